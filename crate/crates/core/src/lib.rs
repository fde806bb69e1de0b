//! Exact simulation and Fisher-information bounds for multiparameter phase
//! estimation in a Fourier interferometer fed with single photons.
//!
//! The device applies `U(φ) = V Φ(φ) V†` to `k` photons in each of `m` modes,
//! where `V` is the discrete Fourier transform and `Φ` carries `d < m` unknown
//! phases. Output amplitudes are permanents of submatrices of `U`; from them
//! the crate builds detected distributions for number-resolving, on/off and
//! hybrid detector arrays, classical Fisher information with exact Jacobians,
//! the quantum Fisher information (closed form and numeric), Cramér–Rao
//! variances, phase optimization, and heralded-source averaging.
//!
//! ```
//! use qufti::{qcrb_closed_form, quantum_fisher_analytic, total_variance};
//!
//! // Three single photons, two phases, one reference arm.
//! let qfi = quantum_fisher_analytic(3, 2, 1)?;
//! let bound = total_variance(&qfi, 1)?;
//! assert!((bound.total_variance - qcrb_closed_form(3, 2, 1, 1)?).abs() < 1e-12);
//! # Ok::<(), qufti::Error>(())
//! ```
//!
//! The guide under `book/` walks through the physics and the numerics; its
//! code listings are compiled as doctests of this crate.

pub mod detection;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod interferometer;
pub mod linalg;
pub mod optimizer;
pub mod permanent;
pub mod scattershot;

pub use detection::{
    classify_outcome, coarse_grain, DetectionOutcome, DetectionScheme, OutcomeGrouping,
};
pub use error::{Error, Result};
pub use fisher::{
    classical_fisher, coherent_variance, fair_comparison, fisher_from_jacobian,
    probability_jacobian, psd_gap, qcrb_closed_form, qfi_inverse_closed_form,
    quantum_fisher_analytic, quantum_fisher_numeric, total_variance, ClassicalFisher,
    FairComparison, FisherMatrix, FisherModel, JacobianEngine, ProbabilityJacobian, VarianceBound,
};
pub use fock::{
    amplitude, enumerate_configs, frame_state, number_covariance, output_distribution, FockConfig,
    FockState, OutcomeDistribution,
};
pub use interferometer::Interferometer;
pub use linalg::{
    build_phase_layer, build_qft, compose_interferometer, expand_submatrix, ComplexMatrix,
    UnitaryMatrix,
};
pub use num_complex::Complex64;
pub use optimizer::{
    classical_variance, minimize_variance, model_variance, multistart_minimize, nelder_mead,
    OptimizerOptions, Optimum, Scenario,
};
pub use permanent::{permanent_minor_gradient, permanent_naive, permanent_ryser};
pub use scattershot::{
    herald_configs, scattershot_average, scattershot_sweep, scattershot_variance, ScattershotSpec,
    SweepPhases, SweepPoint,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/interferometer.md")]
    mod interferometer {}
    #[doc = include_str!("../../../book/src/permanents.md")]
    mod permanents {}
    #[doc = include_str!("../../../book/src/fisher.md")]
    mod fisher {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/scattershot.md")]
    mod scattershot {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
