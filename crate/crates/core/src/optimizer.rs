//! Deterministic multistart Nelder–Mead search for phase settings that
//! minimize the classical Cramér–Rao total variance.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detection::DetectionScheme;
use crate::error::{Error, Result};
use crate::fisher::{total_variance, FisherModel, JacobianEngine, VarianceBound};
use crate::fock::FockConfig;
use crate::interferometer::Interferometer;
use crate::linalg::check_reference_mode;

/// Keeps random starts this far from `φ = 0`, where the output is deterministic.
pub const START_COLLAR: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerOptions {
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Simplex diameter below which a start has converged.
    pub simplex_tolerance: f64,
    /// Spread of vertex values below which a start has converged.
    pub objective_tolerance: f64,
    /// Start `i` draws its initial point from `base_seed + i`.
    pub base_seed: u64,
    /// Edge length of the initial simplex, in radians.
    pub initial_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iters: 2000,
            simplex_tolerance: 1e-8,
            objective_tolerance: 1e-10,
            base_seed: 0,
            initial_step: 0.3,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParameter("need at least one start".into()));
        }
        for (name, value) in [
            ("simplex tolerance", self.simplex_tolerance),
            ("objective tolerance", self.objective_tolerance),
            ("initial step", self.initial_step),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of one simplex descent.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead descent from `start` with an axis-aligned initial simplex.
///
/// `+∞` objective values are allowed and simply lose every comparison. When
/// the simplex collapses, the search restarts once around the best vertex
/// with a fresh simplex, sharing the iteration budget.
pub fn nelder_mead<F>(objective: F, start: &[f64], opts: &OptimizerOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = descend(&objective, start, opts.initial_step, opts.max_iters, opts);
    if best.converged && best.value.is_finite() && best.iterations < opts.max_iters {
        let budget = opts.max_iters - best.iterations;
        let polish = descend(
            &objective,
            &best.point,
            opts.initial_step * 0.1,
            budget,
            opts,
        );
        let iterations = best.iterations + polish.iterations;
        if polish.value < best.value {
            best = polish;
        }
        best.iterations = iterations;
    }
    best
}

fn descend<F>(
    objective: &F,
    start: &[f64],
    step: f64,
    max_iters: usize,
    opts: &OptimizerOptions,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = start.len();
    let eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..n {
        let mut vertex = start.to_vec();
        vertex[i] += step;
        let value = eval(&vertex);
        simplex.push((vertex, value));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_value, worst_value) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| distance(v, &simplex[0].0))
            .fold(0.0, f64::max);
        if best_value.is_finite()
            && worst_value - best_value <= opts.objective_tolerance
            && diameter <= opts.simplex_tolerance
        {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(EXPAND);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let x = along(REFLECT * CONTRACT);
            let f = eval(&x);
            (x, f)
        } else {
            let x = along(-CONTRACT);
            let f = eval(&x);
            (x, f)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (vertex, value) in simplex.iter_mut().skip(1) {
            for (x, a) in vertex.iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            *value = eval(vertex);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    SimplexResult {
        point,
        value,
        iterations,
        converged,
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Best point found over all starts.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    /// Phases wrapped into `[0, 2π)`.
    pub phases: Vec<f64>,
    pub variance: f64,
    pub start_index: usize,
    pub converged: bool,
}

/// Initial point of start `index`: uniform on `[0.1, 2π − 0.1]^d` from seed `base_seed + index`.
pub fn start_point(base_seed: u64, index: usize, d: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(index as u64));
    (0..d)
        .map(|_| rng.gen_range(START_COLLAR..TAU - START_COLLAR))
        .collect()
}

/// Multistart Nelder–Mead over `d` periodic coordinates.
///
/// Starts run in parallel; the winner is the lowest value with ties going to
/// the lowest start index, so the result does not depend on scheduling.
pub fn multistart_minimize<F>(objective: F, d: usize, opts: &OptimizerOptions) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    opts.validate()?;
    let runs: Vec<SimplexResult> = (0..opts.starts)
        .into_par_iter()
        .map(|i| nelder_mead(&objective, &start_point(opts.base_seed, i, d), opts))
        .collect();
    let winner = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value.is_finite())
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)));
    match winner {
        Some((index, run)) => Ok(Optimum {
            phases: run.point.iter().map(|&p| wrap_phase(p)).collect(),
            variance: run.value,
            start_index: index,
            converged: run.converged,
        }),
        None => Err(Error::NoOptimum {
            starts: opts.starts,
            diagnostics: format!(
                "{} starts ended on singular Fisher information; {} hit the iteration cap",
                runs.len(),
                runs.iter().filter(|r| !r.converged).count()
            ),
        }),
    }
}

/// Maps a phase into `[0, 2π)`; `rem_euclid` alone can round tiny negatives up to `2π`.
fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The parallel Fourier interferometer with `k` photons in each of `m` modes and `d` phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub modes: usize,
    pub num_phases: usize,
    pub photons_per_mode: usize,
}

impl Scenario {
    pub fn new(modes: usize, num_phases: usize) -> Result<Self> {
        Self::with_photons(modes, num_phases, 1)
    }

    pub fn with_photons(modes: usize, num_phases: usize, photons_per_mode: usize) -> Result<Self> {
        check_reference_mode(modes, num_phases)?;
        if photons_per_mode == 0 {
            return Err(Error::InvalidParameter(
                "need k ≥ 1 photons per mode".into(),
            ));
        }
        Ok(Self {
            modes,
            num_phases,
            photons_per_mode,
        })
    }

    pub fn device(&self) -> Result<Interferometer> {
        Interferometer::fourier(self.modes, self.num_phases)
    }

    pub fn input(&self) -> FockConfig {
        FockConfig::uniform(self.modes, self.photons_per_mode)
    }
}

/// Single-shot total variance `Tr[F⁻¹]` of a detection scheme at `phases`.
///
/// Degenerate Fisher matrices (an outcome with vanishing probability but a
/// non-negligible derivative) are reported as singular.
pub fn classical_variance(
    device: &Interferometer,
    input: &FockConfig,
    scheme: DetectionScheme,
    phases: &[f64],
) -> Result<VarianceBound> {
    model_variance(&FisherModel::new(device, input, scheme)?, phases)
}

/// Single-shot `Tr F⁻¹` from a prepared model; degenerate information counts as singular.
pub fn model_variance(model: &FisherModel, phases: &[f64]) -> Result<VarianceBound> {
    let fisher = model.classical_fisher(phases, JacobianEngine::Exact)?;
    if fisher.degenerate {
        return Ok(VarianceBound::singular(1));
    }
    total_variance(&fisher.matrix, 1)
}

/// Minimizes `Tr[F_clas⁻¹(φ)]` for one measurement of `scenario` under `scheme`.
pub fn minimize_variance(
    scenario: &Scenario,
    scheme: DetectionScheme,
    opts: &OptimizerOptions,
) -> Result<Optimum> {
    let device = scenario.device()?;
    let input = scenario.input();
    let model = FisherModel::new(&device, &input, scheme)?;
    let objective = |phases: &[f64]| {
        model_variance(&model, phases)
            .map(|v| v.total_variance)
            .unwrap_or(f64::INFINITY)
    };
    let mut optimum = multistart_minimize(objective, scenario.num_phases, opts)?;
    // Report the value at the wrapped phases actually returned.
    optimum.variance = model_variance(&model, &optimum.phases)?.total_variance;
    Ok(optimum)
}
