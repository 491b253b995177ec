//! Fixed-point iteration schemes for contraction mappings on normed spaces:
//! the Picard-S hybrid scheme and the classical Picard, Mann, Ishikawa, Noor,
//! SP, S and CR schemes, with a-priori error bounds, rate comparison,
//! data-dependence estimates and a delay-differential-equation solver.
//!
//! Everything is generic over [`Scalar`]. The aliases below fix the two
//! arithmetics used in practice: `f64` and ten-significant-digit decimal.
//!
//! ```
//! use fixiter::{iterate, ContractionMap, ControlSequences, Point, SchemeId, StopRule};
//!
//! let map = ContractionMap::<f64>::sahu();
//! let controls = ControlSequences::uniform(0.5);
//! let run = iterate(SchemeId::PicardS, &map, Point::Scalar(1000.0), &controls, &StopRule::default()).unwrap();
//! assert!((run.last().as_scalar().unwrap() - 3.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod datadep;
pub mod dde;
pub mod decimal;
pub mod error;
pub mod format;
pub mod scalar;
pub mod schemes;
pub mod space;

pub use convergence::{
    compare_rates, compare_rates_with, cr_error_bound, iterate, iterate_map, picard_s_error_bound,
    picard_s_exponential_bound, theta_ratio, Classification, RateThresholds, RateVerdict, StopReason, StopRule,
    Trajectory,
};
pub use datadep::{
    data_dependence_bound, perturbed_picard_s_step, verify_data_dependence, ApproximateOperator, DataDependenceReport,
};
pub use dde::{
    check_conditions, dde_error_bound, integral_operator_apply, solve_picard_s, solve_picard_s_observed,
    ConditionCheck, ConditionReport, DdeProblem, DdeSolution, GridFunction, IntegralOperator,
};
pub use decimal::Decimal10;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use schemes::{
    classical_step, cr_step, picard_s_step, step, ContractionMap, ControlSequence, ControlSequences, Counting,
    IterationState, SchemeId, SelfMap,
};
pub use space::{affine_combine, sup_distance, NormValue, Point};

pub type Point64 = Point<f64>;
pub type DecPoint = Point<Decimal10>;
pub type Map64 = ContractionMap<f64>;
pub type DecMap = ContractionMap<Decimal10>;
pub type Controls64 = ControlSequences<f64>;
pub type DecControls = ControlSequences<Decimal10>;
pub type Trajectory64 = Trajectory<f64>;
pub type DecTrajectory = Trajectory<Decimal10>;
pub type Grid64 = GridFunction<f64>;
pub type Problem64 = DdeProblem<f64>;
