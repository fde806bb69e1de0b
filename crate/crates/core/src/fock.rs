//! Fock-space bookkeeping and exact interferometer output states.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expand_submatrix, UnitaryMatrix};
use crate::permanent::permanent_ryser;

/// Normalization tolerance for states and distributions.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;
/// Rounding slack below zero that is clamped instead of rejected.
pub const NEGATIVE_PROBABILITY_SLACK: f64 = 1e-14;

/// Photon occupation numbers over `m` modes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockConfig(Vec<usize>);

impl FockConfig {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    /// `k` photons in each of `m` modes.
    pub fn uniform(m: usize, k: usize) -> Self {
        Self(vec![k; m])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> Option<usize> {
        self.0.get(mode).copied()
    }

    /// Mode index repeated once per photon, ascending.
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(mode, &count)| std::iter::repeat_n(mode, count))
            .collect()
    }

    /// `Π_j n_j!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n).map(|x| x as f64).product::<f64>())
            .product()
    }

    /// Shifts every occupation one mode to the right (mode `m−1` wraps to 0).
    pub fn rotated(&self, shift: usize) -> Self {
        let mut occ = self.0.clone();
        occ.rotate_right(shift % self.modes().max(1));
        Self(occ)
    }
}

impl fmt::Debug for FockConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FockConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for FockConfig {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Pure state over configurations with a common photon total.
#[derive(Clone, Debug)]
pub struct FockState {
    configs: Vec<FockConfig>,
    amplitudes: Vec<Complex64>,
}

impl FockState {
    /// Validates alignment, a common photon total and unit norm.
    pub fn new(configs: Vec<FockConfig>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if configs.len() != amplitudes.len() {
            return Err(Error::Arity {
                expected: configs.len(),
                actual: amplitudes.len(),
            });
        }
        if let Some(first) = configs.first() {
            let total = first.total();
            if configs
                .iter()
                .any(|c| c.total() != total || c.modes() != first.modes())
            {
                return Err(Error::Configuration(
                    "state mixes photon totals or mode counts".into(),
                ));
            }
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            configs,
            amplitudes,
        })
    }

    /// The single configuration `cfg` with amplitude 1.
    pub fn basis(cfg: FockConfig) -> Self {
        Self {
            configs: vec![cfg],
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn configs(&self) -> &[FockConfig] {
        &self.configs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn modes(&self) -> usize {
        self.configs.first().map_or(0, FockConfig::modes)
    }

    pub fn amplitude_of(&self, cfg: &FockConfig) -> Complex64 {
        self.configs
            .iter()
            .position(|c| c == cfg)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Number-resolved outcome distribution `|γ|²`.
    pub fn distribution(&self) -> OutcomeDistribution<FockConfig> {
        OutcomeDistribution {
            outcomes: self.configs.clone(),
            probabilities: self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        }
    }
}

/// Outcome labels with aligned probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<L> {
    outcomes: Vec<L>,
    probabilities: Vec<f64>,
}

impl<L: fmt::Debug> OutcomeDistribution<L> {
    /// Clamps rounding negatives down to `−1e-14`; anything lower is an error.
    pub fn new(outcomes: Vec<L>, mut probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probabilities.len() {
            return Err(Error::Arity {
                expected: outcomes.len(),
                actual: probabilities.len(),
            });
        }
        for (label, p) in outcomes.iter().zip(probabilities.iter_mut()) {
            if *p < 0.0 {
                if *p < -NEGATIVE_PROBABILITY_SLACK {
                    return Err(Error::NegativeProbability {
                        value: *p,
                        outcome: format!("{label:?}"),
                    });
                }
                *p = 0.0;
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }
}

impl<L> OutcomeDistribution<L> {
    pub fn outcomes(&self) -> &[L] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, f64)> {
        self.outcomes.iter().zip(self.probabilities.iter().copied())
    }

    pub fn probability_of(&self, label: &L) -> Option<f64>
    where
        L: PartialEq,
    {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .map(|i| self.probabilities[i])
    }

    pub(crate) fn from_parts_unchecked(outcomes: Vec<L>, probabilities: Vec<f64>) -> Self {
        Self {
            outcomes,
            probabilities,
        }
    }
}

/// All weak compositions of `t` photons into `m` modes, lexicographically descending.
///
/// There are `C(t+m−1, m−1)` of them.
pub fn enumerate_configs(m: usize, t: usize) -> Result<Vec<FockConfig>> {
    if m == 0 {
        return Err(Error::InvalidDimension(
            "cannot distribute photons over zero modes".into(),
        ));
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fn fill(mode: usize, remaining: usize, current: &mut [usize], out: &mut Vec<FockConfig>) {
        let last = current.len() - 1;
        if mode == last {
            current[mode] = remaining;
            out.push(FockConfig(current.to_vec()));
            return;
        }
        for n in (0..=remaining).rev() {
            current[mode] = n;
            fill(mode + 1, remaining - n, current, out);
        }
    }
    fill(0, t, &mut current, &mut out);
    Ok(out)
}

fn check_transition(
    unitary: &UnitaryMatrix,
    in_cfg: &FockConfig,
    out_cfg: &FockConfig,
) -> Result<()> {
    if in_cfg.total() != out_cfg.total() {
        return Err(Error::Configuration(format!(
            "input {in_cfg} and output {out_cfg} carry different photon numbers"
        )));
    }
    if in_cfg.modes() != unitary.dim() || out_cfg.modes() != unitary.dim() {
        return Err(Error::Configuration(format!(
            "configurations must span {} modes",
            unitary.dim()
        )));
    }
    Ok(())
}

/// Transition amplitude `⟨out| U |in⟩ = perm(W) / √(Π in! · Π out!)`.
pub fn amplitude(
    unitary: &UnitaryMatrix,
    in_cfg: &FockConfig,
    out_cfg: &FockConfig,
) -> Result<Complex64> {
    check_transition(unitary, in_cfg, out_cfg)?;
    let w = expand_submatrix(unitary, in_cfg, out_cfg)?;
    let norm = (in_cfg.factorial_product() * out_cfg.factorial_product()).sqrt();
    Ok(permanent_ryser(&w)? / norm)
}

/// `U|in⟩` expanded over every output configuration in [`enumerate_configs`] order.
pub fn output_distribution(unitary: &UnitaryMatrix, in_cfg: &FockConfig) -> Result<FockState> {
    if in_cfg.modes() != unitary.dim() {
        return Err(Error::Configuration(format!(
            "input {in_cfg} does not span {} modes",
            unitary.dim()
        )));
    }
    if in_cfg.total() == 0 {
        return Err(Error::Configuration("input carries no photons".into()));
    }
    let configs = enumerate_configs(unitary.dim(), in_cfg.total())?;
    // Ordered collect keeps the result independent of scheduling.
    let amplitudes = configs
        .par_iter()
        .map(|out| amplitude(unitary, in_cfg, out))
        .collect::<Result<Vec<_>>>()?;
    let state = FockState {
        configs,
        amplitudes,
    };
    debug_assert!((state.norm_sqr() - 1.0).abs() < NORMALIZATION_TOLERANCE);
    Ok(state)
}

/// `V†|in⟩`: the input expressed in the modes where the phases act.
pub fn frame_state(frame: &UnitaryMatrix, in_cfg: &FockConfig) -> Result<FockState> {
    output_distribution(&frame.adjoint(), in_cfg)
}

/// `⟨n_l n_n⟩ − ⟨n_l⟩⟨n_n⟩` in `state`.
pub fn number_covariance(state: &FockState, l: usize, n: usize) -> Result<f64> {
    let modes = state.modes();
    for index in [l, n] {
        if index >= modes {
            return Err(Error::ModeIndex { index, modes });
        }
    }
    let (mut joint, mut mean_l, mut mean_n) = (0.0, 0.0, 0.0);
    for (cfg, amp) in state.configs.iter().zip(&state.amplitudes) {
        let p = amp.norm_sqr();
        let (a, b) = (cfg.0[l] as f64, cfg.0[n] as f64);
        joint += p * a * b;
        mean_l += p * a;
        mean_n += p * b;
    }
    Ok(joint - mean_l * mean_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_phase_layer, build_qft, compose_interferometer};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn cfg(v: &[usize]) -> FockConfig {
        FockConfig::new(v.to_vec())
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            enumerate_configs(2, 2).unwrap(),
            vec![cfg(&[2, 0]), cfg(&[1, 1]), cfg(&[0, 2])]
        );
        assert_eq!(enumerate_configs(4, 4).unwrap().len(), 35);
        assert_eq!(enumerate_configs(1, 3).unwrap(), vec![cfg(&[3])]);
        assert_eq!(enumerate_configs(3, 0).unwrap(), vec![cfg(&[0, 0, 0])]);
        assert!(matches!(
            enumerate_configs(0, 2),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn enumerate_is_strictly_descending() {
        let configs = enumerate_configs(4, 5).unwrap();
        assert!(configs.windows(2).all(|w| w[0] > w[1]));
        assert!(configs.iter().all(|c| c.total() == 5));
    }

    #[test]
    fn amplitude_examples() {
        let id = UnitaryMatrix::identity(2);
        let ones = cfg(&[1, 1]);
        assert!((amplitude(&id, &ones, &ones).unwrap() - 1.0).norm() < 1e-15);

        let qft = build_qft(2).unwrap();
        assert!(amplitude(&qft, &ones, &ones).unwrap().norm() < 1e-15);
        let bunched = amplitude(&qft, &ones, &cfg(&[2, 0])).unwrap();
        assert!((bunched - FRAC_1_SQRT_2).norm() < 1e-15);

        assert!(matches!(
            amplitude(&qft, &ones, &cfg(&[1, 0])),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn output_of_identity_is_input() {
        let state = output_distribution(&UnitaryMatrix::identity(3), &cfg(&[1, 1, 1])).unwrap();
        for (c, a) in state.configs().iter().zip(state.amplitudes()) {
            let want = if c == &cfg(&[1, 1, 1]) { 1.0 } else { 0.0 };
            assert!((a - want).norm() < 1e-15);
        }
    }

    #[test]
    fn two_mode_swap_keeps_coincidence() {
        let u = compose_interferometer(
            &build_qft(2).unwrap(),
            &build_phase_layer(2, 1, &[PI]).unwrap(),
        )
        .unwrap();
        let dist = output_distribution(&u, &cfg(&[1, 1]))
            .unwrap()
            .distribution();
        assert!((dist.probability_of(&cfg(&[1, 1])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_input_rejected() {
        assert!(output_distribution(&UnitaryMatrix::identity(2), &cfg(&[0, 0])).is_err());
    }

    #[test]
    fn frame_state_examples() {
        let id_state = frame_state(&UnitaryMatrix::identity(3), &cfg(&[1, 0, 2])).unwrap();
        assert!((id_state.amplitude_of(&cfg(&[1, 0, 2])) - 1.0).norm() < 1e-15);

        let state = frame_state(&build_qft(2).unwrap(), &cfg(&[1, 1])).unwrap();
        assert!(state.amplitude_of(&cfg(&[1, 1])).norm() < 1e-15);
        assert!((state.amplitude_of(&cfg(&[2, 0])).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((state.amplitude_of(&cfg(&[0, 2])).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let pure = FockState::basis(cfg(&[2, 1, 0]));
        for l in 0..3 {
            for n in 0..3 {
                assert_eq!(number_covariance(&pure, l, n).unwrap(), 0.0);
            }
        }
        let state = frame_state(&build_qft(2).unwrap(), &cfg(&[1, 1])).unwrap();
        assert!((number_covariance(&state, 0, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((number_covariance(&state, 0, 1).unwrap() + 1.0).abs() < 1e-14);
        assert!(matches!(
            number_covariance(&state, 0, 2),
            Err(Error::ModeIndex { index: 2, modes: 2 })
        ));
    }

    #[test]
    fn distribution_clamps_tiny_negatives_only() {
        let ok = OutcomeDistribution::new(vec!["a", "b"], vec![1.0, -5e-15]).unwrap();
        assert_eq!(ok.probabilities()[1], 0.0);
        assert!(matches!(
            OutcomeDistribution::new(vec!["a", "b"], vec![1.0 + 1e-9, -1e-9]),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(OutcomeDistribution::new(vec!["a"], vec![0.5]).is_err());
    }

    #[test]
    fn state_validation() {
        let bad = FockState::new(
            vec![cfg(&[1, 0]), cfg(&[2, 0])],
            vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2],
        );
        assert!(matches!(bad, Err(Error::Configuration(_))));
        let unnormalized = FockState::new(vec![cfg(&[1, 0])], vec![Complex64::new(0.5, 0.0)]);
        assert!(unnormalized.is_err());
    }
}
