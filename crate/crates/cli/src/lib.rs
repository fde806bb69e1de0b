//! Command-line front end for `qufti`: scenario files, experiment drivers and
//! CSV/SVG output.

pub mod commands;
pub mod error;
pub mod scenario;
pub mod svg;
pub mod table;

pub use commands::{emit_outputs, run_fig2_sweep, run_fig3_sweep, Fig3Phases};
pub use error::{CliError, CliResult};
pub use scenario::{parse_grid, parse_scenario, ScenarioInput, ScenarioSpec, SchemeName};
pub use table::{format_number, Cell, CsvTable};
