//! Heralded probabilistic sources.
//!
//! Each of the `m` sources independently heralds one photon into its mode
//! with probability `p`. Every heralded input configuration is analysed with
//! its own classical Fisher information at a common phase setting, and the
//! scattershot variance combines them as
//! `1/Δ²_avg = Σ_i p_i / Δ²_i`, singular configurations contributing nothing.

use rayon::prelude::*;

use crate::detection::DetectionScheme;
use crate::error::{Error, Result};
use crate::fisher::{FisherModel, VarianceBound};
use crate::fock::FockConfig;
use crate::interferometer::Interferometer;
use crate::linalg::check_reference_mode;
use crate::optimizer::{classical_variance, model_variance, multistart_minimize, OptimizerOptions};

/// Heralding probabilities below this are skipped.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct ScattershotSpec {
    pub modes: usize,
    pub num_phases: usize,
    pub scheme: DetectionScheme,
    /// Per-source heralding efficiency `p`.
    pub efficiency: f64,
    pub phases: Vec<f64>,
}

impl ScattershotSpec {
    pub fn validate(&self) -> Result<()> {
        check_reference_mode(self.modes, self.num_phases)?;
        check_efficiency(self.efficiency)?;
        self.scheme.validate(self.modes)?;
        if self.phases.len() != self.num_phases {
            return Err(Error::Arity {
                expected: self.num_phases,
                actual: self.phases.len(),
            });
        }
        Ok(())
    }
}

fn check_efficiency(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "source efficiency must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// All `2^m` binary input patterns with weight `p^{|s|}(1−p)^{m−|s|}`.
///
/// Patterns are listed in descending lexicographic order, full occupation first.
pub fn herald_configs(m: usize, p: f64) -> Result<Vec<(FockConfig, f64)>> {
    check_efficiency(p)?;
    if m == 0 || m >= usize::BITS as usize {
        return Err(Error::InvalidDimension(format!(
            "cannot herald into {m} modes"
        )));
    }
    Ok((0..1usize << m)
        .rev()
        .map(|mask| {
            let occupations: Vec<usize> = (0..m).map(|j| (mask >> (m - 1 - j)) & 1).collect();
            let photons = mask.count_ones() as i32;
            let weight = p.powi(photons) * (1.0 - p).powi(m as i32 - photons);
            (FockConfig::new(occupations), weight)
        })
        .collect())
}

/// Combines per-configuration variances into the scattershot variance.
///
/// `variance_of` is called for every configuration whose weight is at least
/// [`NEGLIGIBLE_WEIGHT`]; the reduction runs in the order of `heralds`.
pub fn scattershot_average<F>(
    heralds: &[(FockConfig, f64)],
    variance_of: F,
) -> Result<VarianceBound>
where
    F: Fn(&FockConfig) -> Result<VarianceBound> + Sync,
{
    let contributions = heralds
        .par_iter()
        .map(|(cfg, weight)| {
            if *weight < NEGLIGIBLE_WEIGHT {
                return Ok(0.0);
            }
            Ok(weight * variance_of(cfg)?.inverse_variance())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(from_inverse(contributions.iter().sum()))
}

fn from_inverse(inverse: f64) -> VarianceBound {
    if inverse > 0.0 {
        VarianceBound {
            total_variance: 1.0 / inverse,
            trials: 1,
            singular: false,
        }
    } else {
        VarianceBound::singular(1)
    }
}

/// Single-shot variance of one heralded input; vacuum carries no information.
pub fn heralded_variance(
    device: &Interferometer,
    input: &FockConfig,
    scheme: DetectionScheme,
    phases: &[f64],
) -> Result<VarianceBound> {
    if input.total() == 0 {
        return Ok(VarianceBound::singular(1));
    }
    classical_variance(device, input, scheme, phases)
}

pub fn scattershot_variance(spec: &ScattershotSpec) -> Result<VarianceBound> {
    spec.validate()?;
    let device = Interferometer::fourier(spec.modes, spec.num_phases)?;
    let heralds = herald_configs(spec.modes, spec.efficiency)?;
    scattershot_average(&heralds, |cfg| {
        heralded_variance(&device, cfg, spec.scheme, &spec.phases)
    })
}

/// Phase setting used across an efficiency sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepPhases {
    /// One phase vector for every efficiency, as a fixed device would run.
    Fixed(Vec<f64>),
    /// Re-minimize the scattershot variance at each efficiency.
    Reoptimize(OptimizerOptions),
}

/// One point of an efficiency sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub efficiency: f64,
    pub variance: VarianceBound,
    pub phases: Vec<f64>,
}

/// Scattershot variance over a grid of efficiencies.
///
/// With fixed phases the per-configuration inverse variances do not depend on
/// `p`, so they are computed once and re-weighted for every grid point.
pub fn scattershot_sweep(
    modes: usize,
    num_phases: usize,
    scheme: DetectionScheme,
    phases: &SweepPhases,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    check_reference_mode(modes, num_phases)?;
    scheme.validate(modes)?;
    for &p in grid {
        check_efficiency(p)?;
    }
    let device = Interferometer::fourier(modes, num_phases)?;
    let patterns = herald_configs(modes, 1.0)?;
    match phases {
        SweepPhases::Fixed(phi) => {
            if phi.len() != num_phases {
                return Err(Error::Arity {
                    expected: num_phases,
                    actual: phi.len(),
                });
            }
            let inverse = patterns
                .par_iter()
                .map(
                    |(cfg, _)| Ok(heralded_variance(&device, cfg, scheme, phi)?.inverse_variance()),
                )
                .collect::<Result<Vec<f64>>>()?;
            grid.iter()
                .map(|&p| {
                    let weighted = herald_configs(modes, p)?
                        .iter()
                        .zip(&inverse)
                        .filter(|((_, w), _)| *w >= NEGLIGIBLE_WEIGHT)
                        .map(|((_, w), inv)| w * inv)
                        .sum();
                    Ok(SweepPoint {
                        efficiency: p,
                        variance: from_inverse(weighted),
                        phases: phi.clone(),
                    })
                })
                .collect()
        }
        SweepPhases::Reoptimize(opts) => {
            // One model per non-vacuum pattern, shared by every objective call.
            let models = patterns
                .iter()
                .map(|(cfg, _)| {
                    if cfg.total() == 0 {
                        Ok(None)
                    } else {
                        FisherModel::new(&device, cfg, scheme).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let average = |p: f64, phi: &[f64]| -> Result<VarianceBound> {
                let heralds = herald_configs(modes, p)?;
                let contributions = heralds
                    .par_iter()
                    .zip(&models)
                    .map(|((_, weight), model)| match model {
                        Some(model) if *weight >= NEGLIGIBLE_WEIGHT => {
                            Ok(weight * model_variance(model, phi)?.inverse_variance())
                        }
                        _ => Ok(0.0),
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(from_inverse(contributions.iter().sum()))
            };
            grid.iter()
                .map(|&p| {
                    let objective = |phi: &[f64]| {
                        average(p, phi)
                            .map(|v| v.total_variance)
                            .unwrap_or(f64::INFINITY)
                    };
                    let best = match multistart_minimize(objective, num_phases, opts) {
                        Ok(best) => best,
                        Err(Error::NoOptimum { .. }) => {
                            return Ok(SweepPoint {
                                efficiency: p,
                                variance: VarianceBound::singular(1),
                                phases: vec![f64::NAN; num_phases],
                            })
                        }
                        Err(e) => return Err(e),
                    };
                    Ok(SweepPoint {
                        efficiency: p,
                        variance: average(p, &best.phases)?,
                        phases: best.phases,
                    })
                })
                .collect()
        }
    }
}
