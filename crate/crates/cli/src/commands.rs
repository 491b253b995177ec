//! The four subcommands, as functions producing their artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use fixiter::{
    check_conditions, compare_rates, iterate_map, solve_picard_s, verify_data_dependence, ApproximateOperator,
    ContractionMap, ControlSequences, DataDependenceReport, Decimal10, Error, IterationState, Point, RateVerdict,
    Scalar, SchemeId, StopRule,
};
use serde::Serialize;

use crate::config::{default_max_iters, Arithmetic, DdeProblemFile, ExperimentConfig, Format};
use crate::error::CliError;

/// Significant digits shown in tables.
pub const TABLE_DIGITS: usize = 10;

const DEFAULT_TAIL: usize = 5;
const FIXED_POINT_SEARCH: usize = 10_000;
const CONDITION_PROBES: usize = 500;

/// One row per iteration index, one column per scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub schemes: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub values: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = format!("n,{}\n", self.schemes.join(","));
        for row in &self.rows {
            out.push_str(&format!("{},{}\n", row.n, row.values.join(",")));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn scalar_of<S: Scalar>(p: &Point<S>) -> Result<S, CliError> {
    p.as_scalar().ok_or_else(|| CliError::Config(format!("expected a scalar iterate, got {}", p.kind())))
}

fn printed<S: Scalar>(p: &Point<S>) -> Result<String, CliError> {
    Ok(scalar_of(p)?.to_significant(TABLE_DIGITS))
}

/// The map's fixed point, or the limit of a long Picard run from `x0`.
fn resolve_fixed_point<S: Scalar>(map: &ContractionMap<S>, x0: &Point<S>) -> Result<Point<S>, CliError> {
    if let Some(p) = map.fixed_point() {
        return Ok(p.clone());
    }
    let stop = StopRule { max_iters: FIXED_POINT_SEARCH, abs_tol: 0.0, target_tol: None };
    let controls = ControlSequences::uniform(S::zero());
    Ok(iterate_map(SchemeId::Picard, map, None, x0.clone(), &controls, &stop)?.last().clone())
}

fn check_schemes<S: Scalar>(schemes: &[SchemeId], controls: &ControlSequences<S>) -> Result<(), CliError> {
    if schemes.contains(&SchemeId::PicardS) && !controls.is_divergent() {
        return Err(CliError::Config("Picard-S needs eta1 > 0 and eta2 > 0".into()));
    }
    Ok(())
}

struct Column<S> {
    printed: Vec<String>,
    state: IterationState<S>,
    done: Option<usize>,
}

impl<S: Scalar> Column<S> {
    fn advance(&mut self, id: SchemeId, map: &ContractionMap<S>, controls: &ControlSequences<S>) -> Result<(), CliError> {
        self.state = fixiter::step(id, &self.state, map, controls)?;
        if self.state.x.first_non_finite().is_some() {
            return Err(Error::NonFinite { index: self.state.n }.into());
        }
        self.printed.push(printed(&self.state.x)?);
        Ok(())
    }
}

type ColumnWork<'a, S> = dyn Fn(SchemeId, &mut Column<S>) -> Result<(), CliError> + Sync + 'a;

fn columns<S: Scalar>(config: &ExperimentConfig) -> Result<Table, CliError> {
    let map = config.map.build::<S>()?;
    let controls = config.controls.build::<S>();
    check_schemes(&config.schemes, &controls)?;
    let max_iters = config.stop.build()?.max_iters;
    let x0 = Point::Scalar(S::lit(config.x0));
    let target = printed(&resolve_fixed_point(&map, &x0)?)?;

    let run_all = |work: &ColumnWork<S>, cols: &mut [Column<S>]| {
        thread::scope(|scope| {
            let handles: Vec<_> = config
                .schemes
                .iter()
                .zip(cols.iter_mut())
                .map(|(id, col)| scope.spawn(move || work(*id, col)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("column worker panicked")).collect::<Result<Vec<()>, _>>()
        })
    };

    let mut cols: Vec<Column<S>> = config
        .schemes
        .iter()
        .map(|_| Column { printed: Vec::new(), state: IterationState::start(x0.clone()), done: None })
        .collect();
    run_all(
        &|id, col| {
            while col.printed.len() < max_iters {
                col.advance(id, &map, &controls)?;
                if col.printed.last() == Some(&target) {
                    col.done = Some(col.printed.len());
                    break;
                }
            }
            Ok(())
        },
        &mut cols,
    )?;
    let rows = cols.iter().map(|c| c.done.unwrap_or(max_iters)).max().unwrap_or(0);
    run_all(
        &|id, col| {
            while col.printed.len() < rows {
                col.advance(id, &map, &controls)?;
            }
            Ok(())
        },
        &mut cols,
    )?;

    Ok(Table {
        schemes: config.schemes.iter().map(|s| s.label().to_string()).collect(),
        rows: (0..rows)
            .map(|i| TableRow { n: i + 1, values: cols.iter().map(|c| c.printed[i].clone()).collect() })
            .collect(),
    })
}

/// Iterates every configured scheme and tabulates the iterates until all
/// columns print the fixed point, or `max_iters` rows.
pub fn table(config: &ExperimentConfig) -> Result<Table, CliError> {
    match config.arithmetic {
        Arithmetic::F64 => columns::<f64>(config),
        Arithmetic::Decimal10 => columns::<Decimal10>(config),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))
}

/// Runs `table` and writes it to `out`, the config's output path, or returns
/// it for standard output.
pub fn cmd_table(config: &ExperimentConfig, out: Option<&Path>, format: Option<Format>) -> Result<String, CliError> {
    let t = table(config)?;
    let target = out.map(Path::to_path_buf).or_else(|| config.output.as_ref().map(|o| o.path.clone()));
    let format = format.or(config.output.as_ref().map(|o| o.format)).unwrap_or_default();
    let text = t.render(format);
    match target {
        Some(path) => {
            write_file(&path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub scheme_a: String,
    pub scheme_b: String,
    pub fixed_point: f64,
    pub iterations_a: usize,
    pub iterations_b: usize,
    #[serde(flatten)]
    pub verdict: RateVerdict,
}

fn compare_in<S: Scalar>(config: &ExperimentConfig, a: SchemeId, b: SchemeId) -> Result<CompareReport, CliError> {
    let map = config.map.build::<S>()?;
    let controls = config.controls.build::<S>();
    check_schemes(&[a, b], &controls)?;
    let stop = config.stop.build()?;
    let x0 = Point::Scalar(S::lit(config.x0));
    let fixed = resolve_fixed_point(&map, &x0)?;
    let run = |id| iterate_map(id, &map, Some(&fixed), x0.clone(), &controls, &stop);
    let (ta, tb) = (run(a)?, run(b)?);
    let verdict = compare_rates(&ta, &tb, &fixed, config.tail_window.unwrap_or(DEFAULT_TAIL))?;
    Ok(CompareReport {
        scheme_a: a.label().into(),
        scheme_b: b.label().into(),
        fixed_point: scalar_of(&fixed)?.as_f64(),
        iterations_a: ta.n_final(),
        iterations_b: tb.n_final(),
        verdict,
    })
}

/// Compares the convergence rates of schemes `a` and `b` on the configured map.
pub fn compare(config: &ExperimentConfig, a: SchemeId, b: SchemeId) -> Result<CompareReport, CliError> {
    match config.arithmetic {
        Arithmetic::F64 => compare_in::<f64>(config, a, b),
        Arithmetic::Decimal10 => compare_in::<Decimal10>(config, a, b),
    }
}

pub fn cmd_compare(config: &ExperimentConfig, a: &str, b: &str) -> Result<String, CliError> {
    let (a, b) = (a.parse()?, b.parse()?);
    Ok(to_json_line(&compare(config, a, b)?))
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdeReport {
    pub iterations: usize,
    pub residual: f64,
    pub nodes: usize,
    pub t_end: f64,
    pub x_end: f64,
    pub output: PathBuf,
}

/// Solves a delay problem file and writes the `t,x` CSV.
///
/// The CSV goes to `out`, else the file's `output`, else
/// `<problem stem>_solution.csv` in the working directory.
pub fn cmd_dde(problem: &Path, step: f64, tol: f64, out: Option<&Path>) -> Result<String, CliError> {
    let file = DdeProblemFile::load(problem)?;
    let p = file.build()?;
    let report = check_conditions(&p, CONDITION_PROBES);
    if !report.all_passed() {
        return Err(CliError::Conditions(report));
    }
    let stop = StopRule {
        max_iters: match file.max_iters {
            Some(n) => n,
            None => default_max_iters()?,
        },
        abs_tol: tol,
        target_tol: None,
    };
    let sol = solve_picard_s(&p, step, &file.controls.build(), &stop)?;
    let path = out.map(Path::to_path_buf).or(file.output.clone()).unwrap_or_else(|| {
        let stem = problem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dde".into());
        PathBuf::from(format!("{stem}_solution.csv"))
    });
    let mut csv = Vec::new();
    sol.solution.write_csv(&mut csv).map_err(|e| CliError::io(&path, e))?;
    write_file(&path, std::str::from_utf8(&csv).expect("csv is ascii"))?;
    let g = &sol.solution;
    Ok(to_json_line(&DdeReport {
        iterations: sol.iterations,
        residual: sol.residual,
        nodes: g.len(),
        t_end: g.t_end(),
        x_end: g.values()[g.len() - 1],
        output: path,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataDependenceOutput {
    pub epsilon: f64,
    pub perturbation: f64,
    #[serde(flatten)]
    pub report: DataDependenceReport,
}

fn datadep_in<S: Scalar>(config: &ExperimentConfig, epsilon: f64, shift: f64) -> Result<DataDependenceReport, CliError> {
    let map = config.map.build::<S>()?;
    let controls = config.controls.build::<S>();
    let stop = config.stop.build()?;
    let x0 = Point::Scalar(S::lit(config.x0));
    let fixed = scalar_of(&resolve_fixed_point(&map, &x0)?)?.as_f64();
    let lo = config.x0.min(fixed).min(0.0);
    let hi = config.x0.max(fixed).max(0.0);
    let op = ApproximateOperator::shifted(map, S::lit(shift), S::lit(epsilon), lo, hi)?;
    Ok(verify_data_dependence(&op, x0, &controls, &stop)?)
}

/// Perturbs the configured map by the constant `perturbation` and checks the
/// drift of the Picard-S fixed point against `5 epsilon / (1 - delta)`.
pub fn datadep(config: &ExperimentConfig, epsilon: f64, perturbation: f64) -> Result<DataDependenceOutput, CliError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(CliError::Config(format!("epsilon = {epsilon} must be finite and nonnegative")));
    }
    if !(perturbation.abs() <= epsilon) {
        return Err(CliError::Config(format!("|perturbation| = {} exceeds epsilon = {epsilon}", perturbation.abs())));
    }
    let report = match config.arithmetic {
        Arithmetic::F64 => datadep_in::<f64>(config, epsilon, perturbation)?,
        Arithmetic::Decimal10 => datadep_in::<Decimal10>(config, epsilon, perturbation)?,
    };
    Ok(DataDependenceOutput { epsilon, perturbation, report })
}

pub fn cmd_datadep(config: &ExperimentConfig, epsilon: f64, perturbation: f64) -> Result<String, CliError> {
    Ok(to_json_line(&datadep(config, epsilon, perturbation)?))
}
