use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qufti_cli::commands::{self, FIG2_COMFORTABLE_MAX, FIG2_SCHEMES, FIG3_SCHEMES};
use qufti_cli::scenario::{parse_scenario_input, OptimizerInput};
use qufti_cli::{
    emit_outputs, parse_grid, CliError, CliResult, Fig3Phases, ScenarioInput, ScenarioSpec,
    SchemeName,
};

#[derive(Parser)]
#[command(
    name = "qufti",
    version,
    about = "Phase-estimation bounds for Fourier interferometers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form quantum Cramér–Rao bound.
    Qcrb(Common),
    /// Quantum Fisher information, closed form next to the numeric evaluation.
    Qfi(Common),
    /// Classical Fisher information at the phases given with --phi.
    Cfi(Common),
    /// Minimize the classical total variance over the phases.
    Optimize(Common),
    /// Optimized variance against the bound and reference strategies for d = m - 1.
    Fig2 {
        #[command(flatten)]
        common: Common,
        /// Smallest m in the sweep; --modes sets the largest (default 6).
        #[arg(long, default_value_t = 2)]
        m_min: usize,
    },
    /// Scattershot-averaged variance against source efficiency.
    Fig3 {
        #[command(flatten)]
        common: Common,
        /// Keep one phase setting (--phi, or the full-efficiency optimum) for every p.
        #[arg(long)]
        fixed_phases: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    num_phases: Option<usize>,
    /// Photons per input mode.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeName>,
    /// Mode with the number-resolving detector, counted from 1.
    #[arg(long)]
    resolved_mode: Option<usize>,
    /// Comma-separated phases in radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Option<Vec<f64>>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Efficiency grid as start:stop:step.
    #[arg(long)]
    p_grid: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON scenario; its fields take precedence over flags.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

impl Common {
    fn input(&self) -> CliResult<ScenarioInput> {
        let optimizer = (self.starts.is_some() || self.seed.is_some() || self.max_iters.is_some())
            .then_some(OptimizerInput {
                starts: self.starts,
                seed: self.seed,
                max_iters: self.max_iters,
            });
        let flags = ScenarioInput {
            m: self.modes,
            d: self.num_phases,
            k: self.k,
            scheme: self.scheme,
            resolved_mode: self.resolved_mode,
            phases: self.phi.clone(),
            optimizer,
            p_grid: self.p_grid.as_deref().map(parse_grid).transpose()?,
            out: self.out.clone(),
            svg: self.svg.clone(),
        };
        match &self.scenario {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Ok(parse_scenario_input(&text)?.over(flags))
            }
            None => Ok(flags),
        }
    }

    fn spec_with(&self, defaults: ScenarioInput) -> CliResult<(ScenarioSpec, Option<SchemeName>)> {
        let input = self.input()?;
        let chosen = input.scheme;
        Ok((ScenarioSpec::from_input(input.over(defaults))?, chosen))
    }

    fn spec(&self) -> CliResult<ScenarioSpec> {
        Ok(self.spec_with(ScenarioInput::default())?.0)
    }
}

fn print_or_write(csv: Option<String>) {
    if let Some(text) = csv {
        print!("{text}");
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Qcrb(common) => {
            let spec = common.spec()?;
            print_or_write(emit_outputs(
                &commands::qcrb(&spec)?,
                spec.out.as_deref(),
                None,
            )?);
        }
        Command::Qfi(common) => {
            let spec = common.spec()?;
            print_or_write(emit_outputs(
                &commands::qfi(&spec)?,
                spec.out.as_deref(),
                None,
            )?);
        }
        Command::Cfi(common) => {
            let spec = common.spec()?;
            let (table, summary) = commands::cfi(&spec)?;
            eprintln!("{summary}");
            print_or_write(emit_outputs(&table, spec.out.as_deref(), None)?);
        }
        Command::Optimize(common) => {
            let spec = common.spec()?;
            print_or_write(emit_outputs(
                &commands::optimize(&spec)?,
                spec.out.as_deref(),
                None,
            )?);
        }
        Command::Fig2 { common, m_min } => {
            let m_max = common.input()?.m.unwrap_or(FIG2_COMFORTABLE_MAX);
            let defaults = ScenarioInput {
                m: Some(m_max),
                d: Some(m_max.saturating_sub(1)),
                ..Default::default()
            };
            // d is m - 1 on every row; only m, the schemes and the optimizer settings matter.
            let (spec, chosen) = common.spec_with(defaults)?;
            if spec.m > FIG2_COMFORTABLE_MAX {
                eprintln!(
                    "warning: m up to {} enumerates C(2m-1, m) outputs per evaluation; expect a long run",
                    spec.m
                );
            }
            let schemes: Vec<_> = match chosen {
                Some(s) => vec![spec.detection_for(s)],
                None => FIG2_SCHEMES
                    .iter()
                    .map(|&s| spec.detection_for(s))
                    .collect(),
            };
            let (table, chart) = commands::run_fig2_sweep(
                m_min..=spec.m,
                &schemes,
                &spec.optimizer_options(),
                |w| eprintln!("warning: {w}"),
            )?;
            emit(&table, &chart, &spec)?;
        }
        Command::Fig3 {
            common,
            fixed_phases,
        } => {
            let defaults = ScenarioInput {
                m: Some(4),
                d: Some(3),
                p_grid: Some(parse_grid("0.05:1.0:0.05")?),
                ..Default::default()
            };
            let (spec, chosen) = common.spec_with(defaults)?;
            let schemes: Vec<_> = match chosen {
                Some(s) => vec![spec.detection_for(s)],
                None => FIG3_SCHEMES
                    .iter()
                    .map(|&s| spec.detection_for(s))
                    .collect(),
            };
            let phases = if fixed_phases {
                Fig3Phases::Fixed(spec.phases.clone())
            } else {
                Fig3Phases::Reoptimize
            };
            let grid = spec.p_grid.clone().unwrap_or_default();
            let (table, chart) = commands::run_fig3_sweep(&spec, &grid, &schemes, &phases)?;
            emit(&table, &chart, &spec)?;
        }
    }
    Ok(())
}

fn emit(
    table: &qufti_cli::CsvTable,
    chart: &qufti_cli::svg::Chart,
    spec: &ScenarioSpec,
) -> CliResult<()> {
    let svg = spec.svg.as_deref().map(|p: &Path| (chart, p));
    print_or_write(emit_outputs(table, spec.out.as_deref(), svg)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
