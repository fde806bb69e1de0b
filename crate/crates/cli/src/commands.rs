//! One function per subcommand; each returns a table (and a chart for the figures).

use std::path::Path;

use qufti::{
    classical_fisher, coherent_variance, fair_comparison, minimize_variance, qcrb_closed_form,
    quantum_fisher_analytic, quantum_fisher_numeric, scattershot_sweep, total_variance,
    DetectionScheme, Error, FockConfig, Interferometer, JacobianEngine, OptimizerOptions, Scenario,
    SweepPhases,
};

use crate::error::{CliError, CliResult};
use crate::scenario::{ScenarioSpec, SchemeName};
use crate::svg::Chart;
use crate::table::{Cell, CsvTable};

/// Largest `m` in the default figure-2 range; beyond it the run gets slow.
pub const FIG2_COMFORTABLE_MAX: usize = 6;
pub const FIG2_SCHEMES: [SchemeName; 3] = [SchemeName::Nrd, SchemeName::Spd, SchemeName::OneNrd];
pub const FIG3_SCHEMES: [SchemeName; 2] = [SchemeName::Nrd, SchemeName::OneNrd];

fn scheme_label(scheme: DetectionScheme) -> String {
    match scheme {
        DetectionScheme::OneNrd { resolved_mode } => format!("one-nrd({})", resolved_mode + 1),
        other => other.name().to_string(),
    }
}

pub fn qcrb(spec: &ScenarioSpec) -> CliResult<CsvTable> {
    let mut table = CsvTable::new(["m", "d", "k", "qcrb[per_measurement]"]);
    table.push(vec![
        spec.m.into(),
        spec.d.into(),
        spec.k.into(),
        qcrb_closed_form(spec.m, spec.d, spec.k, 1)?.into(),
    ])?;
    Ok(table)
}

/// Closed-form and numerically evaluated QFI, entry by entry (one-based indices).
pub fn qfi(spec: &ScenarioSpec) -> CliResult<CsvTable> {
    let analytic = quantum_fisher_analytic(spec.m, spec.d, spec.k)?;
    let device = Interferometer::fourier(spec.m, spec.d)?;
    let numeric =
        quantum_fisher_numeric(device.frame(), &FockConfig::uniform(spec.m, spec.k), spec.d)?;
    let mut table = CsvTable::new(["i", "j", "analytic", "numeric"]);
    for i in 0..spec.d {
        for j in 0..spec.d {
            table.push(vec![
                (i + 1).into(),
                (j + 1).into(),
                analytic.get(i, j).into(),
                numeric.get(i, j).into(),
            ])?;
        }
    }
    Ok(table)
}

/// Classical Fisher matrix at the given phases, plus a one-line summary.
pub fn cfi(spec: &ScenarioSpec) -> CliResult<(CsvTable, String)> {
    let phases = spec
        .phases
        .as_ref()
        .ok_or_else(|| CliError::Validation("cfi needs --phi or `phases`".into()))?;
    let scenario = Scenario::with_photons(spec.m, spec.d, spec.k)?;
    let fisher = classical_fisher(
        &scenario.device()?,
        &scenario.input(),
        spec.detection(),
        phases,
        JacobianEngine::Exact,
    )?;
    let mut table = CsvTable::new(["i", "j", "fisher"]);
    for i in 0..spec.d {
        for j in 0..spec.d {
            table.push(vec![
                (i + 1).into(),
                (j + 1).into(),
                fisher.matrix.get(i, j).into(),
            ])?;
        }
    }
    let variance = total_variance(&fisher.matrix, 1)?;
    let mut summary = if variance.singular {
        "Fisher information is singular; the variance is unbounded".to_string()
    } else {
        format!(
            "total variance per measurement: {}",
            crate::table::format_number(variance.total_variance)
        )
    };
    if fisher.degenerate {
        summary.push_str(" (warning: outcomes with vanishing probability but non-zero slope)");
    }
    Ok((table, summary))
}

pub fn optimize(spec: &ScenarioSpec) -> CliResult<CsvTable> {
    let scenario = Scenario::with_photons(spec.m, spec.d, spec.k)?;
    let best = minimize_variance(&scenario, spec.detection(), &spec.optimizer_options())?;
    let mut header: Vec<String> = [
        "m",
        "d",
        "k",
        "scheme",
        "variance[per_measurement]",
        "qcrb[per_measurement]",
        "start",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=spec.d).map(|j| format!("phi_{j}")));
    let mut table = CsvTable::new(header);
    let mut row: Vec<Cell> = vec![
        spec.m.into(),
        spec.d.into(),
        spec.k.into(),
        scheme_label(spec.detection()).as_str().into(),
        best.variance.into(),
        qcrb_closed_form(spec.m, spec.d, spec.k, 1)?.into(),
        best.start_index.into(),
    ];
    row.extend(best.phases.iter().map(|&p| Cell::Num(p)));
    table.push(row)?;
    Ok(table)
}

/// Optimized total variance against the closed-form strategies for `d = m − 1`,
/// all in fair-comparison units.
///
/// A row whose optimization finds no finite variance is written with `nan`
/// and the sweep moves on.
pub fn run_fig2_sweep(
    m_range: std::ops::RangeInclusive<usize>,
    schemes: &[DetectionScheme],
    opts: &OptimizerOptions,
    mut warn: impl FnMut(&str),
) -> CliResult<(CsvTable, Chart)> {
    if *m_range.start() < 2 || m_range.is_empty() {
        return Err(CliError::Validation(format!(
            "fig2 needs 2 ≤ m_min ≤ m_max, got {}..={}",
            m_range.start(),
            m_range.end()
        )));
    }
    for scheme in schemes {
        scheme.validate(*m_range.start())?;
    }
    let mut table = CsvTable::new([
        "m",
        "d",
        "scheme",
        "optimized_variance[per_nu2]",
        "qcrb[per_nu2]",
        "sequential[per_nu2]",
        "coherent[per_nu2]",
        "ratio_to_qcrb",
    ]);
    let mut chart = Chart::new(
        "Total variance, d = m - 1",
        "modes m",
        "total variance (per nu2)",
    );
    let mut curves = vec![Vec::new(); schemes.len()];
    let (mut bound, mut sequential, mut coherent) = (Vec::new(), Vec::new(), Vec::new());
    let mut failures = 0;
    for m in m_range.clone() {
        let d = m - 1;
        let fair = fair_comparison(m, d)?;
        let qcrb = qcrb_closed_form(m, d, 1, 1)? / d as f64;
        let x = m as f64;
        bound.push((x, qcrb));
        sequential.push((x, fair.sequential));
        coherent.push((x, fair.coherent));
        for (curve, &scheme) in curves.iter_mut().zip(schemes) {
            let variance = match minimize_variance(&Scenario::new(m, d)?, scheme, opts) {
                Ok(best) => best.variance / d as f64,
                Err(e @ Error::NoOptimum { .. }) => {
                    warn(&format!("m = {m}, {}: {e}", scheme_label(scheme)));
                    failures += 1;
                    f64::NAN
                }
                Err(e) => return Err(e.into()),
            };
            curve.push((x, variance));
            table.push(vec![
                m.into(),
                d.into(),
                scheme_label(scheme).as_str().into(),
                variance.into(),
                qcrb.into(),
                fair.sequential.into(),
                fair.coherent.into(),
                (variance / qcrb).into(),
            ])?;
        }
    }
    if failures > 0 && failures == table.rows().len() {
        return Err(CliError::Numerical("every fig2 optimization failed".into()));
    }
    for (curve, &scheme) in curves.into_iter().zip(schemes) {
        chart.add(&scheme_label(scheme), curve, false);
    }
    chart.add("qcrb", bound, true);
    chart.add("sequential", sequential, true);
    chart.add("coherent", coherent, true);
    Ok((table, chart))
}

/// How `fig3` chooses the phase setting at each efficiency.
#[derive(Clone, Debug, PartialEq)]
pub enum Fig3Phases {
    /// Re-optimize one common phase vector for every efficiency.
    Reoptimize,
    /// Keep these phases, or the full-efficiency optimum of each scheme when `None`.
    Fixed(Option<Vec<f64>>),
}

/// Scattershot-averaged variance per single measurement over the efficiency grid.
pub fn run_fig3_sweep(
    spec: &ScenarioSpec,
    grid: &[f64],
    schemes: &[DetectionScheme],
    phases: &Fig3Phases,
) -> CliResult<(CsvTable, Chart)> {
    if spec.k != 1 {
        return Err(CliError::Validation(
            "heralded sources emit one photon per mode; fig3 needs k = 1".into(),
        ));
    }
    let opts = spec.optimizer_options();
    // Mean photon number of the coherent comparison: one photon per source.
    let reference = coherent_variance(spec.d, spec.m as f64)?;
    let mut table = CsvTable::new([
        "p",
        "scheme",
        "avg_variance[per_measurement]",
        "coherent_reference[per_measurement]",
    ]);
    let mut chart = Chart::new(
        &format!(
            "Scattershot average variance, m = {}, d = {}",
            spec.m, spec.d
        ),
        "source efficiency p",
        "total variance (per measurement)",
    );
    let mut all_singular = true;
    for &scheme in schemes {
        let mode = match phases {
            Fig3Phases::Reoptimize => SweepPhases::Reoptimize(opts.clone()),
            Fig3Phases::Fixed(Some(phi)) => SweepPhases::Fixed(phi.clone()),
            Fig3Phases::Fixed(None) => {
                let scenario = Scenario::new(spec.m, spec.d)?;
                SweepPhases::Fixed(minimize_variance(&scenario, scheme, &opts)?.phases)
            }
        };
        let points = scattershot_sweep(spec.m, spec.d, scheme, &mode, grid)?;
        let mut curve = Vec::with_capacity(points.len());
        for point in points {
            all_singular &= point.variance.singular;
            let v = point.variance.total_variance;
            curve.push((point.efficiency, v));
            table.push(vec![
                point.efficiency.into(),
                scheme_label(scheme).as_str().into(),
                v.into(),
                reference.into(),
            ])?;
        }
        chart.add(&scheme_label(scheme), curve, false);
    }
    if all_singular && !table.rows().is_empty() {
        return Err(CliError::Numerical(
            "the Fisher information is singular at every grid point".into(),
        ));
    }
    let ends = [grid.first(), grid.last()].map(|p| p.copied().unwrap_or(0.0));
    chart.add(
        "coherent",
        ends.iter().map(|&p| (p, reference)).collect(),
        true,
    );
    Ok((table, chart))
}

/// Writes the CSV to `csv_path` (or returns it for stdout) and the chart to `svg_path`.
pub fn emit_outputs(
    table: &CsvTable,
    csv_path: Option<&Path>,
    chart: Option<(&Chart, &Path)>,
) -> CliResult<Option<String>> {
    if let Some((chart, path)) = chart {
        std::fs::write(path, chart.render()).map_err(|e| CliError::io(path, e))?;
    }
    match csv_path {
        Some(path) => {
            table.write(path)?;
            Ok(None)
        }
        None => Ok(Some(table.to_csv())),
    }
}
