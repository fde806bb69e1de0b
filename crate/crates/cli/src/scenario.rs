//! JSON scenario files and their merge with command-line flags.

use std::path::PathBuf;

use clap::ValueEnum;
use qufti::{DetectionScheme, OptimizerOptions, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Nrd,
    Spd,
    OneNrd,
}

/// Optimizer settings as written in a scenario file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

/// A partially specified scenario; every field may be missing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    /// One-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_mode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl ScenarioInput {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: ScenarioInput) -> ScenarioInput {
        let optimizer = match (self.optimizer, base.optimizer) {
            (Some(top), Some(bottom)) => Some(OptimizerInput {
                starts: top.starts.or(bottom.starts),
                seed: top.seed.or(bottom.seed),
                max_iters: top.max_iters.or(bottom.max_iters),
            }),
            (top, bottom) => top.or(bottom),
        };
        ScenarioInput {
            m: self.m.or(base.m),
            d: self.d.or(base.d),
            k: self.k.or(base.k),
            scheme: self.scheme.or(base.scheme),
            resolved_mode: self.resolved_mode.or(base.resolved_mode),
            phases: self.phases.or(base.phases),
            optimizer,
            p_grid: self.p_grid.or(base.p_grid),
            out: self.out.or(base.out),
            svg: self.svg.or(base.svg),
        }
    }
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub scheme: SchemeName,
    /// One-based mode carrying the number-resolving detector.
    pub resolved_mode: usize,
    pub phases: Option<Vec<f64>>,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub p_grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ScenarioSpec {
    pub fn from_input(input: ScenarioInput) -> CliResult<Self> {
        let missing = |name: &str| CliError::Validation(format!("scenario is missing `{name}`"));
        let defaults = OptimizerOptions::default();
        let optimizer = input.optimizer.unwrap_or_default();
        let spec = ScenarioSpec {
            m: input.m.ok_or_else(|| missing("m"))?,
            d: input.d.ok_or_else(|| missing("d"))?,
            k: input.k.unwrap_or(1),
            scheme: input.scheme.unwrap_or(SchemeName::Nrd),
            resolved_mode: input.resolved_mode.unwrap_or(1),
            phases: input.phases,
            starts: optimizer.starts.unwrap_or(defaults.starts),
            seed: optimizer.seed.unwrap_or(defaults.base_seed),
            max_iters: optimizer.max_iters.unwrap_or(defaults.max_iters),
            p_grid: input.p_grid,
            out: input.out,
            svg: input.svg,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> CliResult<()> {
        Scenario::with_photons(self.m, self.d, self.k)?;
        if self.resolved_mode == 0 || self.resolved_mode > self.m {
            return Err(CliError::Validation(format!(
                "resolved_mode must lie in 1..={}, got {}",
                self.m, self.resolved_mode
            )));
        }
        if let Some(phases) = &self.phases {
            if phases.len() != self.d {
                return Err(CliError::Validation(format!(
                    "phases has {} entries, expected d = {}",
                    phases.len(),
                    self.d
                )));
            }
            if phases.iter().any(|p| !p.is_finite()) {
                return Err(CliError::Validation("phases must be finite".into()));
            }
        }
        if let Some(grid) = &self.p_grid {
            if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(CliError::Validation(
                    "p_grid must be a non-empty list of efficiencies in [0, 1]".into(),
                ));
            }
        }
        self.optimizer_options().validate()?;
        Ok(())
    }

    pub fn detection(&self) -> DetectionScheme {
        self.detection_for(self.scheme)
    }

    pub fn detection_for(&self, scheme: SchemeName) -> DetectionScheme {
        match scheme {
            SchemeName::Nrd => DetectionScheme::Nrd,
            SchemeName::Spd => DetectionScheme::Spd,
            SchemeName::OneNrd => DetectionScheme::OneNrd {
                resolved_mode: self.resolved_mode - 1,
            },
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            starts: self.starts,
            base_seed: self.seed,
            max_iters: self.max_iters,
            ..OptimizerOptions::default()
        }
    }

    pub fn to_input(&self) -> ScenarioInput {
        ScenarioInput {
            m: Some(self.m),
            d: Some(self.d),
            k: Some(self.k),
            scheme: Some(self.scheme),
            resolved_mode: Some(self.resolved_mode),
            phases: self.phases.clone(),
            optimizer: Some(OptimizerInput {
                starts: Some(self.starts),
                seed: Some(self.seed),
                max_iters: Some(self.max_iters),
            }),
            p_grid: self.p_grid.clone(),
            out: self.out.clone(),
            svg: self.svg.clone(),
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_input()).expect("scenario serializes")
    }
}

/// Reads a scenario document without validating it.
pub fn parse_scenario_input(text: &str) -> CliResult<ScenarioInput> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Validation(format!("scenario: {}", e.inner()))
        } else {
            CliError::Validation(format!("scenario field `{path}`: {}", e.inner()))
        }
    })
}

/// Parses, applies defaults and validates a scenario document.
pub fn parse_scenario(text: &str) -> CliResult<ScenarioSpec> {
    ScenarioSpec::from_input(parse_scenario_input(text)?)
}

/// `start:stop:step`, inclusive of `stop` when the step lands on it.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Validation(format!("expected start:stop:step, got `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_applied() {
        let spec = parse_scenario(r#"{"m":4,"d":3,"scheme":"nrd"}"#).unwrap();
        assert_eq!((spec.m, spec.d, spec.k), (4, 3, 1));
        assert_eq!(spec.detection(), DetectionScheme::Nrd);
    }

    #[test]
    fn reference_mode_required() {
        let err = parse_scenario(r#"{"m":3,"d":3,"scheme":"nrd"}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn resolved_mode_is_one_based() {
        let spec = parse_scenario(r#"{"m":4,"d":3,"scheme":"one-nrd","resolved_mode":2}"#).unwrap();
        assert_eq!(
            spec.detection(),
            DetectionScheme::OneNrd { resolved_mode: 1 }
        );
        assert!(parse_scenario(r#"{"m":4,"d":3,"scheme":"one-nrd","resolved_mode":0}"#).is_err());
        assert!(parse_scenario(r#"{"m":4,"d":3,"scheme":"one-nrd","resolved_mode":5}"#).is_err());
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = parse_scenario(r#"{"m":4,"d":3,"optimizer":{"starts":4,"sead":1}}"#).unwrap_err();
        assert!(err.to_string().contains("optimizer"), "{err}");
        let err = parse_scenario(r#"{"m":4,"d":"three"}"#).unwrap_err();
        assert!(err.to_string().contains("`d`"), "{err}");
    }

    #[test]
    fn render_round_trips() {
        let spec = parse_scenario(
            r#"{"m":5,"d":2,"k":2,"scheme":"spd","phases":[0.1,2.718281828459045],
                "optimizer":{"seed":9},"p_grid":[0.5,1.0],"out":"a.csv"}"#,
        )
        .unwrap();
        assert_eq!(parse_scenario(&spec.render()).unwrap(), spec);
    }

    #[test]
    fn file_overrides_flags() {
        let flags = ScenarioInput {
            m: Some(3),
            d: Some(2),
            optimizer: Some(OptimizerInput {
                starts: Some(4),
                seed: Some(1),
                max_iters: None,
            }),
            ..Default::default()
        };
        let file = parse_scenario_input(r#"{"m":4,"optimizer":{"seed":7}}"#).unwrap();
        let spec = ScenarioSpec::from_input(file.over(flags)).unwrap();
        assert_eq!((spec.m, spec.d, spec.starts, spec.seed), (4, 2, 4, 7));
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.05:1.0:0.05").unwrap();
        assert_eq!(g.len(), 20);
        assert!((g[19] - 1.0).abs() < 1e-12);
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
