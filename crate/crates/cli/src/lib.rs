//! Command-line front end for `fixiter`: iteration tables, rate comparison,
//! data-dependence experiments and delay-equation solves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;

pub use commands::{
    cmd_compare, cmd_datadep, cmd_dde, cmd_table, compare, datadep, table, CompareReport, DataDependenceOutput,
    DdeReport, Table, TableRow,
};
pub use config::{Arithmetic, ControlsSpec, DdeProblemFile, ExperimentConfig, Format, MapSpec, OutputSpec, StopSpec};
pub use error::CliError;
pub use expr::{Expr, ExprError};
