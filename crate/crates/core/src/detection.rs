//! Detector arrays and how they coarse-grain the number-resolved output.
//!
//! Number-resolving detection refines the hybrid scheme, which in turn refines
//! on/off detection, so classical Fisher information can only drop along
//! `Nrd → OneNrd → Spd`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{FockConfig, FockState, OutcomeDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectionScheme {
    /// Number-resolving detector on every output mode.
    Nrd,
    /// On/off (single-photon) detector on every output mode.
    Spd,
    /// Number resolution on `resolved_mode` (zero-based) and on/off everywhere else.
    OneNrd { resolved_mode: usize },
}

impl DetectionScheme {
    pub fn validate(&self, modes: usize) -> Result<()> {
        match *self {
            DetectionScheme::OneNrd { resolved_mode } if resolved_mode >= modes => {
                Err(Error::ModeIndex {
                    index: resolved_mode,
                    modes,
                })
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DetectionScheme::Nrd => "nrd",
            DetectionScheme::Spd => "spd",
            DetectionScheme::OneNrd { .. } => "one-nrd",
        }
    }
}

impl fmt::Display for DetectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a detector array reports for one shot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DetectionOutcome {
    Counts(FockConfig),
    /// One entry per mode, each 0 or 1.
    Clicks(Vec<u8>),
    /// Photon count at the resolved mode plus clicks on the remaining modes in order.
    Hybrid {
        count: usize,
        clicks: Vec<u8>,
    },
}

impl fmt::Display for DetectionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u8]| v.iter().map(u8::to_string).collect::<Vec<_>>().join(",");
        match self {
            DetectionOutcome::Counts(cfg) => write!(f, "{cfg}"),
            DetectionOutcome::Clicks(c) => write!(f, "[{}]", join(c)),
            DetectionOutcome::Hybrid { count, clicks } => write!(f, "{count}|[{}]", join(clicks)),
        }
    }
}

fn click(n: usize) -> u8 {
    u8::from(n > 0)
}

pub fn classify_outcome(cfg: &FockConfig, scheme: DetectionScheme) -> Result<DetectionOutcome> {
    scheme.validate(cfg.modes())?;
    let occ = cfg.occupations();
    Ok(match scheme {
        DetectionScheme::Nrd => DetectionOutcome::Counts(cfg.clone()),
        DetectionScheme::Spd => DetectionOutcome::Clicks(occ.iter().map(|&n| click(n)).collect()),
        DetectionScheme::OneNrd { resolved_mode } => DetectionOutcome::Hybrid {
            count: occ[resolved_mode],
            clicks: occ
                .iter()
                .enumerate()
                .filter(|&(mode, _)| mode != resolved_mode)
                .map(|(_, &n)| click(n))
                .collect(),
        },
    })
}

/// Map from configurations to the detection outcomes they produce.
///
/// Outcomes are listed in order of first appearance, so a grouping built from
/// [`crate::fock::enumerate_configs`] is reproducible. Outcomes keep their slot
/// even where their probability vanishes.
#[derive(Clone, Debug)]
pub struct OutcomeGrouping {
    outcomes: Vec<DetectionOutcome>,
    group_of: Vec<usize>,
}

impl OutcomeGrouping {
    pub fn new(configs: &[FockConfig], scheme: DetectionScheme) -> Result<Self> {
        let mut index: HashMap<DetectionOutcome, usize> = HashMap::new();
        let mut outcomes = Vec::new();
        let mut group_of = Vec::with_capacity(configs.len());
        for cfg in configs {
            let outcome = classify_outcome(cfg, scheme)?;
            let slot = *index.entry(outcome.clone()).or_insert_with(|| {
                outcomes.push(outcome);
                outcomes.len() - 1
            });
            group_of.push(slot);
        }
        Ok(Self { outcomes, group_of })
    }

    pub fn outcomes(&self) -> &[DetectionOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Group index of configuration `i`.
    pub fn group_of(&self, config_index: usize) -> usize {
        self.group_of[config_index]
    }

    /// Sums per-configuration values into per-outcome values, in configuration order.
    pub fn accumulate(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.group_of.len());
        let mut out = vec![0.0; self.outcomes.len()];
        for (&g, v) in self.group_of.iter().zip(values) {
            out[g] += v;
        }
        out
    }
}

/// Outcome distribution seen by the detector array.
pub fn coarse_grain(
    state: &FockState,
    scheme: DetectionScheme,
) -> Result<OutcomeDistribution<DetectionOutcome>> {
    let grouping = OutcomeGrouping::new(state.configs(), scheme)?;
    let probs: Vec<f64> = state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    Ok(OutcomeDistribution::from_parts_unchecked(
        grouping.outcomes.clone(),
        grouping.accumulate(&probs),
    ))
}
