//! Classical and quantum Fisher information and the Cramér–Rao variances built on them.
//!
//! Classical information comes from the probability Jacobian of the detected
//! distribution, computed either exactly (permanent derivatives) or by central
//! differences. Quantum information is available in two independent forms: the
//! closed form for `k` photons in every mode of the Fourier interferometer, and
//! four times the number covariance of the input expressed in the phase frame.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::detection::{DetectionOutcome, DetectionScheme, OutcomeGrouping};
use crate::error::{Error, Result};
use crate::fock::{enumerate_configs, frame_state, number_covariance, FockConfig};
use crate::interferometer::Interferometer;
use crate::linalg::{check_reference_mode, ComplexMatrix, UnitaryMatrix};
use crate::permanent::{permanent_ryser, permanent_with_rank_one_derivatives};

/// Symmetry tolerance for [`FisherMatrix`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Outcomes below this probability are candidates for the `0·0/0` limit.
pub const SMALL_PROBABILITY: f64 = 1e-12;
/// Derivative magnitude below which a small-probability term is dropped.
pub const SMALL_DERIVATIVE: f64 = 1e-9;
/// Condition number above which a Fisher matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Smallest eigenvalue below which a Fisher matrix is treated as singular.
pub const MIN_EIGENVALUE: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Real symmetric positive-semidefinite `d×d` matrix, in rad⁻².
#[derive(Clone, PartialEq)]
pub struct FisherMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl FisherMatrix {
    /// Checks finiteness, symmetry to `1e-10` and eigenvalues `≥ −1e-9`.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        let candidate = Self::from_entries(dim, entries)?;
        let min = candidate.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "Fisher matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(candidate)
    }

    fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Arity {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Fisher entry".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Fisher matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut values: Vec<f64> = self
            .to_nalgebra()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self · other` as a plain row-major matrix.
    pub fn product(&self, other: &Self) -> Vec<f64> {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                for j in 0..d {
                    out[i * d + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Inverse through the symmetric eigendecomposition, or `None` when the
    /// matrix fails the singularity guard.
    pub fn inverse(&self) -> Option<Self> {
        let eig = self.to_nalgebra().symmetric_eigen();
        if is_singular(eig.eigenvalues.as_slice()) {
            return None;
        }
        let inv_values = eig.eigenvalues.map(|x| 1.0 / x);
        let inv =
            &eig.eigenvectors * DMatrix::from_diagonal(&inv_values) * eig.eigenvectors.transpose();
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                // symmetrize away rounding
                entries[i * d + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            }
        }
        Some(Self { dim: d, entries })
    }
}

impl fmt::Debug for FisherMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FisherMatrix [")?;
        for i in 0..self.dim {
            write!(f, "{}[", if i > 0 { ", " } else { "" })?;
            for j in 0..self.dim {
                write!(f, "{}{:.12}", if j > 0 { ", " } else { "" }, self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn is_singular(eigenvalues: &[f64]) -> bool {
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    eigenvalues.is_empty() || !(min >= MIN_EIGENVALUE) || max / min > MAX_CONDITION
}

/// Smallest eigenvalue of `upper − lower`; non-negative (up to rounding) when
/// `lower ⪯ upper` in the positive-semidefinite order.
pub fn psd_gap(upper: &FisherMatrix, lower: &FisherMatrix) -> f64 {
    assert_eq!(upper.dim, lower.dim);
    let diff = DMatrix::from_fn(upper.dim, upper.dim, |i, j| {
        upper.get(i, j) - lower.get(i, j)
    });
    diff.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Cramér–Rao total variance `Tr[F⁻¹]/ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceBound {
    /// Sum of per-phase variances in rad²; `+∞` when `singular` is set.
    pub total_variance: f64,
    pub trials: u64,
    pub singular: bool,
}

impl VarianceBound {
    pub fn singular(trials: u64) -> Self {
        Self {
            total_variance: f64::INFINITY,
            trials,
            singular: true,
        }
    }

    /// `1/total_variance`, zero for singular bounds.
    pub fn inverse_variance(&self) -> f64 {
        if self.singular {
            0.0
        } else {
            1.0 / self.total_variance
        }
    }
}

pub fn total_variance(fisher: &FisherMatrix, trials: u64) -> Result<VarianceBound> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let eigenvalues = fisher.eigenvalues();
    if is_singular(&eigenvalues) {
        return Ok(VarianceBound::singular(trials));
    }
    let trace: f64 = eigenvalues.iter().map(|x| 1.0 / x).sum();
    Ok(VarianceBound {
        total_variance: trace / trials as f64,
        trials,
        singular: false,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum JacobianEngine {
    /// Analytic derivatives through the permanent.
    #[default]
    Exact,
    /// Central differences of the detected probabilities.
    CentralDifference { step: f64 },
}

impl JacobianEngine {
    pub fn central_difference() -> Self {
        JacobianEngine::CentralDifference {
            step: DEFAULT_FD_STEP,
        }
    }
}

/// Detected probabilities and their phase derivatives at one phase point.
#[derive(Clone, Debug)]
pub struct ProbabilityJacobian {
    pub outcomes: Vec<DetectionOutcome>,
    pub probabilities: Vec<f64>,
    /// `jacobian[x][j] = ∂p(x|φ)/∂φ_j`.
    pub jacobian: Vec<Vec<f64>>,
}

impl ProbabilityJacobian {
    /// Sum of column `j`; zero for a normalized family.
    pub fn column_sum(&self, j: usize) -> f64 {
        self.jacobian.iter().map(|row| row[j]).sum()
    }
}

/// Everything about a `(device, input, scheme)` triple that does not depend on
/// the phases: output configurations, their outcome grouping, the row and
/// column selections of every transition submatrix, and cyclic-orbit sharing.
///
/// `U = V Φ V†` with the Fourier `V` is circulant, so when the input is
/// invariant under a cyclic mode shift, every output in one cyclic orbit has
/// the same probability and the same derivatives. Only one representative
/// per orbit is evaluated in that case.
#[derive(Clone, Debug)]
pub struct FisherModel {
    device: Interferometer,
    configs: Vec<FockConfig>,
    grouping: OutcomeGrouping,
    /// Index into `representatives` for every configuration.
    orbit_of: Vec<usize>,
    representatives: Vec<Transition>,
}

#[derive(Clone, Debug)]
struct Transition {
    rows: Vec<usize>,
    cols: Vec<usize>,
    norm: f64,
}

impl Transition {
    fn new(input: &FockConfig, output: &FockConfig) -> Self {
        Self {
            rows: output.mode_list(),
            cols: input.mode_list(),
            norm: (input.factorial_product() * output.factorial_product()).sqrt(),
        }
    }

    fn select(&self, matrix: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows.len(), self.cols.len(), |r, c| {
            matrix[(self.rows[r], self.cols[c])]
        })
    }
}

impl FisherModel {
    pub fn new(
        device: &Interferometer,
        input: &FockConfig,
        scheme: DetectionScheme,
    ) -> Result<Self> {
        Self::build(device, input, scheme, true)
    }

    /// Same model without cyclic-orbit sharing; every configuration is evaluated.
    pub fn without_symmetry(
        device: &Interferometer,
        input: &FockConfig,
        scheme: DetectionScheme,
    ) -> Result<Self> {
        Self::build(device, input, scheme, false)
    }

    fn build(
        device: &Interferometer,
        input: &FockConfig,
        scheme: DetectionScheme,
        share_orbits: bool,
    ) -> Result<Self> {
        if input.modes() != device.modes() {
            return Err(Error::Configuration(format!(
                "input {input} does not span {} modes",
                device.modes()
            )));
        }
        if input.total() == 0 {
            return Err(Error::Configuration("input carries no photons".into()));
        }
        scheme.validate(device.modes())?;
        let configs = enumerate_configs(device.modes(), input.total())?;
        let grouping = OutcomeGrouping::new(&configs, scheme)?;
        let cyclic = share_orbits && device.is_circulant() && input.rotated(1) == *input;
        let mut orbit_of = Vec::with_capacity(configs.len());
        let mut representatives = Vec::new();
        let mut seen: HashMap<FockConfig, usize> = HashMap::new();
        for cfg in &configs {
            let key = if cyclic {
                canonical_rotation(cfg)
            } else {
                cfg.clone()
            };
            let slot = *seen.entry(key).or_insert_with(|| {
                representatives.push(Transition::new(input, cfg));
                representatives.len() - 1
            });
            orbit_of.push(slot);
        }
        Ok(Self {
            device: device.clone(),
            configs,
            grouping,
            orbit_of,
            representatives,
        })
    }

    pub fn outcomes(&self) -> &[DetectionOutcome] {
        self.grouping.outcomes()
    }

    pub fn configs(&self) -> &[FockConfig] {
        &self.configs
    }

    /// Number of distinct transition amplitudes evaluated per phase point.
    pub fn evaluated_transitions(&self) -> usize {
        self.representatives.len()
    }

    fn check_phases(&self, phases: &[f64]) -> Result<()> {
        if phases.len() != self.device.num_phases() {
            return Err(Error::Arity {
                expected: self.device.num_phases(),
                actual: phases.len(),
            });
        }
        Ok(())
    }

    /// Detected probabilities at `phases`.
    pub fn probabilities(&self, phases: &[f64]) -> Result<Vec<f64>> {
        self.check_phases(phases)?;
        let unitary = self.device.unitary(phases)?;
        let per_orbit: Vec<f64> = self
            .representatives
            .par_iter()
            .map(|t| permanent_ryser(&t.select(unitary.matrix())).map(|p| (p / t.norm).norm_sqr()))
            .collect::<Result<_>>()?;
        let per_config: Vec<f64> = self.orbit_of.iter().map(|&o| per_orbit[o]).collect();
        Ok(self.grouping.accumulate(&per_config))
    }

    /// Detected probabilities and their Jacobian at `phases`.
    pub fn jacobian(&self, phases: &[f64], engine: JacobianEngine) -> Result<ProbabilityJacobian> {
        self.check_phases(phases)?;
        let d = self.device.num_phases();
        let (probabilities, jacobian) = match engine {
            JacobianEngine::Exact => self.exact_jacobian(phases)?,
            JacobianEngine::CentralDifference { step } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "finite-difference step must be positive, got {step}"
                    )));
                }
                let probabilities = self.probabilities(phases)?;
                let mut jacobian = vec![vec![0.0; d]; probabilities.len()];
                for j in 0..d {
                    let mut up = phases.to_vec();
                    let mut down = phases.to_vec();
                    up[j] += step;
                    down[j] -= step;
                    let (pu, pd) = (self.probabilities(&up)?, self.probabilities(&down)?);
                    for (x, row) in jacobian.iter_mut().enumerate() {
                        row[j] = (pu[x] - pd[x]) / (2.0 * step);
                    }
                }
                (probabilities, jacobian)
            }
        };
        Ok(ProbabilityJacobian {
            outcomes: self.grouping.outcomes().to_vec(),
            probabilities,
            jacobian,
        })
    }

    fn exact_jacobian(&self, phases: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let d = self.device.num_phases();
        let unitary = self.device.unitary(phases)?;
        let frame = self.device.frame();
        // ∂U/∂φ_k = (i e^{iφ_k}) · v_k v_k†, with v_k the k-th column of V.
        let factors: Vec<Complex64> = phases
            .iter()
            .map(|&phi| Complex64::i() * Complex64::from_polar(1.0, phi))
            .collect();
        let per_orbit: Vec<(f64, Vec<f64>)> = self
            .representatives
            .par_iter()
            .map(|t| {
                let w = t.select(unitary.matrix());
                let left: Vec<Vec<Complex64>> = (0..d)
                    .map(|k| t.rows.iter().map(|&r| frame[(r, k)]).collect())
                    .collect();
                let right: Vec<Vec<Complex64>> = (0..d)
                    .map(|k| t.cols.iter().map(|&c| frame[(c, k)].conj()).collect())
                    .collect();
                let (perm, dperm) = permanent_with_rank_one_derivatives(&w, &left, &right);
                let gamma = perm / t.norm;
                let gradient = dperm
                    .iter()
                    .zip(&factors)
                    .map(|(dp, f)| 2.0 * (gamma.conj() * (f * dp / t.norm)).re)
                    .collect();
                (gamma.norm_sqr(), gradient)
            })
            .collect();
        let mut probabilities = vec![0.0; self.grouping.len()];
        let mut jacobian = vec![vec![0.0; d]; self.grouping.len()];
        for (i, &orbit) in self.orbit_of.iter().enumerate() {
            let g = self.grouping.group_of(i);
            let (p, grad) = &per_orbit[orbit];
            probabilities[g] += p;
            for (acc, v) in jacobian[g].iter_mut().zip(grad) {
                *acc += v;
            }
        }
        Ok((probabilities, jacobian))
    }

    pub fn classical_fisher(
        &self,
        phases: &[f64],
        engine: JacobianEngine,
    ) -> Result<ClassicalFisher> {
        fisher_from_jacobian(&self.jacobian(phases, engine)?)
    }
}

/// Lexicographically largest cyclic rotation, used as the orbit key.
fn canonical_rotation(cfg: &FockConfig) -> FockConfig {
    (0..cfg.modes().max(1))
        .map(|s| cfg.rotated(s))
        .max()
        .unwrap_or_else(|| cfg.clone())
}

/// `∂p(x|φ)/∂φ_j` for every outcome `x` of `scheme`.
pub fn probability_jacobian(
    device: &Interferometer,
    input: &FockConfig,
    scheme: DetectionScheme,
    phases: &[f64],
    engine: JacobianEngine,
) -> Result<ProbabilityJacobian> {
    FisherModel::new(device, input, scheme)?.jacobian(phases, engine)
}

/// Classical Fisher matrix plus a flag for outcomes that broke the `0·0/0` rule.
#[derive(Clone, Debug)]
pub struct ClassicalFisher {
    pub matrix: FisherMatrix,
    /// Set when an outcome with `p < 1e-12` still had a derivative `≥ 1e-9`.
    pub degenerate: bool,
}

/// Assembles `F_ij = Σ_x ∂_i p ∂_j p / p` from a Jacobian.
pub fn fisher_from_jacobian(jac: &ProbabilityJacobian) -> Result<ClassicalFisher> {
    let d = jac.jacobian.first().map_or(0, Vec::len);
    let mut entries = vec![0.0; d * d];
    let mut degenerate = false;
    for (p, grad) in jac.probabilities.iter().zip(&jac.jacobian) {
        let p = *p;
        if p < SMALL_PROBABILITY {
            if grad.iter().all(|g| g.abs() < SMALL_DERIVATIVE) {
                continue;
            }
            degenerate = true;
            if p <= 0.0 {
                continue;
            }
        }
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] += grad[i] * grad[j] / p;
            }
        }
    }
    // Summation order is fixed, but enforce exact symmetry for the eigen-solver.
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (entries[i * d + j] + entries[j * d + i]);
            entries[i * d + j] = avg;
            entries[j * d + i] = avg;
        }
    }
    Ok(ClassicalFisher {
        matrix: FisherMatrix::new(d, entries)?,
        degenerate,
    })
}

pub fn classical_fisher(
    device: &Interferometer,
    input: &FockConfig,
    scheme: DetectionScheme,
    phases: &[f64],
    engine: JacobianEngine,
) -> Result<ClassicalFisher> {
    FisherModel::new(device, input, scheme)?.classical_fisher(phases, engine)
}

/// `4·Cov(n_l, n_n)` of the input seen in the phase frame, for `l, n < d`.
pub fn quantum_fisher_numeric(
    frame: &UnitaryMatrix,
    input: &FockConfig,
    d: usize,
) -> Result<FisherMatrix> {
    check_reference_mode(frame.dim(), d)?;
    let state = frame_state(frame, input)?;
    let mut entries = vec![0.0; d * d];
    for l in 0..d {
        for n in l..d {
            let value = 4.0 * number_covariance(&state, l, n)?;
            entries[l * d + n] = value;
            entries[n * d + l] = value;
        }
    }
    FisherMatrix::new(d, entries)
}

fn check_photons(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "need k ≥ 1 photons per mode".into(),
        ));
    }
    Ok(())
}

/// `4k(k+1)` times `(m−1)/m` on the diagonal and `−1/m` off it.
pub fn quantum_fisher_analytic(m: usize, d: usize, k: usize) -> Result<FisherMatrix> {
    check_reference_mode(m, d)?;
    check_photons(k)?;
    let scale = 4.0 * (k * (k + 1)) as f64;
    let m = m as f64;
    FisherMatrix::from_fn(d, |i, j| {
        if i == j {
            scale * (m - 1.0) / m
        } else {
            -scale / m
        }
    })
}

/// `1/(4k(k+1))` times `(m−d+1)/(m−d)` on the diagonal and `1/(m−d)` off it.
pub fn qfi_inverse_closed_form(m: usize, d: usize, k: usize) -> Result<FisherMatrix> {
    check_reference_mode(m, d)?;
    check_photons(k)?;
    let scale = 1.0 / (4.0 * (k * (k + 1)) as f64);
    let gap = (m - d) as f64;
    FisherMatrix::from_fn(d, |i, j| {
        if i == j {
            scale * (gap + 1.0) / gap
        } else {
            scale / gap
        }
    })
}

/// `(1/ν)·d(m−d+1) / (4k(k+1)(m−d))`.
pub fn qcrb_closed_form(m: usize, d: usize, k: usize, trials: u64) -> Result<f64> {
    check_reference_mode(m, d)?;
    check_photons(k)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let (m, d, k) = (m as f64, d as f64, k as f64);
    Ok(d * (m - d + 1.0) / (4.0 * k * (k + 1.0) * (m - d)) / trials as f64)
}

/// Total variances of the three strategies at equal photon budget, per sequential repetition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FairComparison {
    /// Parallel Fourier interferometer, `(m−d+1) / (8(m−d))`.
    pub parallel: f64,
    /// One phase at a time, `md / (8(m−1))`.
    pub sequential: f64,
    /// Uncorrelated coherent states with `n̄ = md`, `d/m`.
    pub coherent: f64,
}

pub fn fair_comparison(m: usize, d: usize) -> Result<FairComparison> {
    check_reference_mode(m, d)?;
    let (mf, df) = (m as f64, d as f64);
    Ok(FairComparison {
        parallel: qcrb_closed_form(m, d, 1, 1)? / df,
        sequential: mf * df / (8.0 * (mf - 1.0)),
        coherent: coherent_variance(d, mf * df)?,
    })
}

/// Shot-noise total variance `d²/n̄` for `d` phases and mean photon number `n̄`.
pub fn coherent_variance(d: usize, mean_photons: f64) -> Result<f64> {
    if !(mean_photons > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be positive, got {mean_photons}"
        )));
    }
    Ok((d * d) as f64 / mean_photons)
}
