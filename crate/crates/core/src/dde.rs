//! Delay differential equations `x'(t) = f(t, x(t), x(t - tau))` with history
//! `x = psi` on `[t0 - tau, t0]`, solved on a uniform grid by iterating the
//! integral operator
//!
//! ```text
//! Tx(t) = psi(t)                                   t in [t0 - tau, t0]
//! Tx(t) = psi(t0) + int_{t0}^{t} f(s, x(s), x(s - tau)) ds   t in [t0, b]
//! ```
//!
//! with the Picard-S scheme. Delayed reads that land in `[t0 - tau, t0]` take
//! the history value; the integral is the cumulative composite trapezoid.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convergence::{run, StopReason, StopRule};
use crate::error::{Error, Result};
use crate::format::significant;
use crate::scalar::Scalar;
use crate::schemes::{picard_s_step, ControlSequences, SchemeId, SelfMap};
use crate::space::{sup_distance, Point};

/// Piecewise-linear function given by its values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<S> {
    t_start: S,
    step: S,
    values: Vec<S>,
    /// Node times are `anchor.0 + (i - anchor.1) * step`.
    anchor: (S, usize),
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(t_start: S, step: S, values: Vec<S>) -> Result<Self> {
        if !(step > S::zero() && step.is_finite() && t_start.is_finite()) {
            return Err(Error::Domain(format!("grid step {step} must be positive and finite")));
        }
        if values.is_empty() {
            return Err(Error::Domain("grid function needs at least one node".into()));
        }
        Ok(Self { t_start, step, values, anchor: (t_start, 0) })
    }

    /// Samples `f` at the nodes of `problem` for grid spacing `step`.
    pub fn for_problem(problem: &DdeProblem<S>, step: S, f: impl Fn(S) -> S) -> Result<Self> {
        let layout = problem.layout(step)?;
        let values = (0..layout.nodes()).map(|i| f(layout.time(i))).collect();
        Ok(layout.grid(values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_start(&self) -> S {
        self.t_start
    }

    pub fn step(&self) -> S {
        self.step
    }

    pub fn t_end(&self) -> S {
        self.node_time(self.len() - 1)
    }

    pub fn node_time(&self, i: usize) -> S {
        let (t, k) = self.anchor;
        if i >= k {
            t + S::lit((i - k) as f64) * self.step
        } else {
            t - S::lit((k - i) as f64) * self.step
        }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.len() == other.len() && self.t_start == other.t_start && self.step == other.step
    }

    /// Same grid, new node values.
    pub fn with_values(&self, values: Vec<S>) -> Self {
        debug_assert_eq!(values.len(), self.len());
        Self { values, ..*self }
    }

    /// Linear interpolation between nodes; `None` outside the grid.
    pub fn eval(&self, t: S) -> Option<S> {
        let pos = ((t - self.t_start) / self.step).as_f64();
        let last = (self.len() - 1) as f64;
        if !(-1e-9..=last + 1e-9).contains(&pos) {
            return None;
        }
        let i = (pos.floor().max(0.0) as usize).min(self.len().saturating_sub(2));
        if self.len() == 1 {
            return Some(self.values[0]);
        }
        let frac = (t - self.node_time(i)) / self.step;
        Some(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// CSV with header `t,x` and 17 significant digits per field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", significant(self.node_time(i).as_f64(), 17), significant(v.as_f64(), 17))?;
        }
        Ok(())
    }
}

type Rhs<S> = Arc<dyn Fn(S, S, S) -> S + Send + Sync>;
type History<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

/// Initial-value problem with a retarded argument.
#[derive(Clone)]
pub struct DdeProblem<S> {
    pub t0: S,
    pub b: S,
    pub tau: S,
    /// `f(t, u, v)` with `u = x(t)` and `v = x(t - tau)`.
    pub rhs: Rhs<S>,
    /// Declared Lipschitz constant `L_f` of the sum form.
    pub lipschitz: S,
    /// `psi` on `[t0 - tau, t0]`.
    pub history: History<S>,
}

impl<S: Scalar> fmt::Debug for DdeProblem<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdeProblem")
            .field("t0", &self.t0)
            .field("b", &self.b)
            .field("tau", &self.tau)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// Node bookkeeping: `m` history steps, `k` steps over `[t0, b]`.
#[derive(Debug, Clone, Copy)]
struct Layout<S> {
    t0: S,
    step: S,
    m: usize,
    k: usize,
}

impl<S: Scalar> Layout<S> {
    fn nodes(&self) -> usize {
        self.m + self.k + 1
    }

    fn grid(&self, values: Vec<S>) -> GridFunction<S> {
        GridFunction { t_start: self.time(0), step: self.step, values, anchor: (self.t0, self.m) }
    }

    fn time(&self, i: usize) -> S {
        if i >= self.m {
            self.t0 + S::lit((i - self.m) as f64) * self.step
        } else {
            self.t0 - S::lit((self.m - i) as f64) * self.step
        }
    }
}

fn whole_steps<S: Scalar>(span: S, step: S, what: &str) -> Result<usize> {
    let ratio = (span / step).as_f64();
    let count = ratio.round();
    if count < 1.0 || (ratio - count).abs() > 1e-9 * count.max(1.0) {
        return Err(Error::Domain(format!("{what} = {span} is not a positive integer multiple of step {step}")));
    }
    Ok(count as usize)
}

impl<S: Scalar> DdeProblem<S> {
    pub fn new(
        t0: S,
        b: S,
        tau: S,
        lipschitz: S,
        rhs: impl Fn(S, S, S) -> S + Send + Sync + 'static,
        history: impl Fn(S) -> S + Send + Sync + 'static,
    ) -> Result<Self> {
        if ![t0, b, tau, lipschitz].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("problem parameters must be finite".into()));
        }
        if !(tau > S::zero() && lipschitz > S::zero()) {
            return Err(Error::Domain("tau and the Lipschitz constant must be positive".into()));
        }
        Ok(Self { t0, b, tau, rhs: Arc::new(rhs), lipschitz, history: Arc::new(history) })
    }

    /// `2 L_f (b - t0)`, the contraction factor of the integral operator.
    pub fn contraction_factor(&self) -> S {
        S::lit(2.0) * self.lipschitz * (self.b - self.t0)
    }

    fn layout(&self, step: S) -> Result<Layout<S>> {
        if !(step > S::zero() && step.is_finite()) {
            return Err(Error::Domain(format!("step {step} must be positive")));
        }
        if !(self.b > self.t0) {
            return Err(Error::Domain("the interval needs t0 < b".into()));
        }
        let m = whole_steps(self.tau, step, "tau")?;
        let k = whole_steps(self.b - self.t0, step, "b - t0")?;
        Ok(Layout { t0: self.t0, step, m, k })
    }

    fn layout_of(&self, x: &GridFunction<S>) -> Result<Layout<S>> {
        let layout = self.layout(x.step())?;
        let start = layout.time(0);
        let tol = S::lit(1e-9) * x.step();
        if x.len() != layout.nodes() || (x.t_start() - start).abs() > tol {
            return Err(Error::Structural {
                left: Point::Grid(x.clone()).kind(),
                right: format!("grid[{} nodes from {} step {}]", layout.nodes(), start, x.step()),
            });
        }
        Ok(layout)
    }

    /// Starting iterate: `psi` on the history and `psi(t0)` on `[t0, b]`.
    pub fn initial_iterate(&self, step: S) -> Result<GridFunction<S>> {
        let layout = self.layout(step)?;
        let start = (self.history)(self.t0);
        let values = (0..layout.nodes())
            .map(|i| if i < layout.m { (self.history)(layout.time(i)) } else { start })
            .collect();
        Ok(layout.grid(values))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub description: &'static str,
    pub passed: bool,
    /// Counterexample or offending value when the check fails.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const CONDITION_SEED: u64 = 0x5eed_dde0;

fn check(name: &'static str, description: &'static str, witness: Option<String>) -> ConditionCheck {
    ConditionCheck { name, description, passed: witness.is_none(), witness }
}

/// Looks for a jump of `g` on `[lo, hi]`: samples `n` cells, then bisects
/// the cell with the largest increment. Returns `(location, size)`.
fn find_jump(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Option<(f64, f64)> {
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|x| g(*x)).collect();
    if let Some(i) = vs.iter().position(|v| !v.is_finite()) {
        return Some((xs[i], f64::INFINITY));
    }
    let i = (0..n).max_by(|&i, &j| (vs[i + 1] - vs[i]).abs().total_cmp(&(vs[j + 1] - vs[j]).abs()))?;
    let (mut a, mut b, mut ga, mut gb) = (xs[i], xs[i + 1], vs[i], vs[i + 1]);
    for _ in 0..80 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        let gc = g(c);
        if !gc.is_finite() {
            return Some((c, f64::INFINITY));
        }
        if (gc - ga).abs() >= (gb - gc).abs() {
            (b, gb) = (c, gc);
        } else {
            (a, ga) = (c, gc);
        }
    }
    let size = (gb - ga).abs();
    (size > 1e-6 * (1.0 + ga.abs().max(gb.abs()))).then_some((a, size))
}

/// Checks the standing assumptions on the problem.
///
/// `A1` (`t0 < b`, `tau > 0`) and `A5` (`2 L_f (b - t0) < 1`) are exact.
/// `A2` (continuity of `f`), `A3` (continuity of `psi`) and `A4` (the
/// Lipschitz bound `|f(t,u1,u2) - f(t,v1,v2)| <= L_f (|u1-v1| + |u2-v2|)`)
/// are sampled at `probes` seeded random points.
pub fn check_conditions<S: Scalar>(problem: &DdeProblem<S>, probes: usize) -> ConditionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(CONDITION_SEED);
    let (t0, b, tau) = (problem.t0.as_f64(), problem.b.as_f64(), problem.tau.as_f64());
    let lf = problem.lipschitz.as_f64();
    let span = (b - t0).abs().max(f64::MIN_POSITIVE);

    let a1 = (!(t0 < b && tau > 0.0)).then(|| format!("t0 = {t0}, b = {b}, tau = {tau}"));

    let history = |t: S| (problem.history)(t);
    let level = (0..=16)
        .map(|i| history(S::lit(t0 - tau + tau * i as f64 / 16.0)).as_f64().abs())
        .fold(0.0, f64::max);
    let radius = 10.0 * (1.0 + if level.is_finite() { level } else { 0.0 });

    let f = |t: f64, u: f64, v: f64| (problem.rhs)(S::lit(t), S::lit(u), S::lit(v)).as_f64();
    let cells = probes.max(16);
    let mut a2 = None;
    for _ in 0..4 {
        let t = t0 + rng.gen::<f64>() * span;
        let (u, v) = (rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        let lines = [
            ("t", find_jump(|s| f(s, u, v), t0, t0 + span, cells)),
            ("u", find_jump(|s| f(t, s, v), -radius, radius, cells)),
            ("v", find_jump(|s| f(t, u, s), -radius, radius, cells)),
        ];
        if let Some((axis, Some((at, size)))) = lines.into_iter().find(|(_, j)| j.is_some()) {
            a2 = Some(format!("f jumps by {size:e} along {axis} = {at} from (t, u, v) = ({t}, {u}, {v})"));
            break;
        }
    }
    let a3 = find_jump(|s| history(S::lit(s)).as_f64(), t0 - tau, t0, cells)
        .map(|(at, size)| format!("psi jumps by {size:e} near t = {at}"));

    let mut a4 = None;
    for _ in 0..probes {
        let t = t0 + rng.gen::<f64>() * span;
        let (u, v) = (rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if a4.is_none() {
            let (du, dv) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for (u2, v2) in [(u + du, v), (u, v + dv), (u + du, v + dv)] {
                let lhs = (f(t, u, v) - f(t, u2, v2)).abs();
                let dist = (u - u2).abs() + (v - v2).abs();
                if dist > 0.0 && !(lhs <= lf * dist * (1.0 + 1e-9)) {
                    a4 = Some(format!(
                        "(t, u1, u2) = ({t}, {u}, {v}) vs (v1, v2) = ({u2}, {v2}): ratio {} > L_f = {lf}",
                        lhs / dist
                    ));
                    break;
                }
            }
        }
    }

    let factor = problem.contraction_factor().as_f64();
    let a5 = (!(factor < 1.0)).then(|| format!("2 L_f (b - t0) = {}", significant(factor, 10)));

    ConditionReport {
        checks: vec![
            check("A1", "t0 < b and tau > 0", a1),
            check("A2", "f continuous on [t0, b] x R^2", a2),
            check("A3", "psi continuous on [t0 - tau, t0]", a3),
            check("A4", "f Lipschitz with constant L_f in the sum norm", a4),
            check("A5", "2 L_f (b - t0) < 1", a5),
        ],
    }
}

/// Applies the integral operator to `x` on the problem grid.
pub fn integral_operator_apply<S: Scalar>(x: &GridFunction<S>, problem: &DdeProblem<S>) -> Result<GridFunction<S>> {
    let layout = problem.layout_of(x)?;
    apply_on(x, problem, &layout)
}

fn apply_on<S: Scalar>(x: &GridFunction<S>, problem: &DdeProblem<S>, layout: &Layout<S>) -> Result<GridFunction<S>> {
    let m = layout.m;
    let history: Vec<S> = (0..=m).map(|i| (problem.history)(layout.time(i))).collect();
    let xs = x.values();
    let delayed = |j: usize| if j - m <= m { history[j - m] } else { xs[j - m] };
    let integrand = |j: usize| -> Result<S> {
        let g = (problem.rhs)(layout.time(j), xs[j], delayed(j));
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFinite { index: j })
        }
    };

    let base = history[m];
    let half = layout.step / S::lit(2.0);
    let mut out = history.clone();
    out.reserve(layout.k);
    let mut acc = S::zero();
    let mut prev = integrand(m)?;
    for j in m + 1..layout.nodes() {
        let g = integrand(j)?;
        acc = acc + half * (prev + g);
        out.push(base + acc);
        prev = g;
    }
    Ok(x.with_values(out))
}

/// The integral operator as a self-map of grid points.
pub struct IntegralOperator<'a, S> {
    problem: &'a DdeProblem<S>,
    layout: Layout<S>,
}

impl<'a, S: Scalar> IntegralOperator<'a, S> {
    pub fn new(problem: &'a DdeProblem<S>, step: S) -> Result<Self> {
        Ok(Self { problem, layout: problem.layout(step)? })
    }
}

impl<S: Scalar> SelfMap<S> for IntegralOperator<'_, S> {
    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        match x {
            Point::Grid(g) => {
                self.problem.layout_of(g)?;
                apply_on(g, self.problem, &self.layout).map(Point::Grid)
            }
            other => Err(Error::Structural { left: other.kind(), right: "grid".into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdeSolution<S> {
    pub solution: GridFunction<S>,
    pub iterations: usize,
    /// `|Tx - x|` in the sup norm at the returned iterate.
    pub residual: S,
}

/// Solves the problem by Picard-S iteration of the integral operator.
///
/// Stops when the sup-norm step difference is at most `stop.abs_tol`.
pub fn solve_picard_s<S: Scalar>(
    problem: &DdeProblem<S>,
    step: S,
    controls: &ControlSequences<S>,
    stop: &StopRule,
) -> Result<DdeSolution<S>> {
    solve_picard_s_observed(problem, step, controls, stop, |_, _| {})
}

/// [`solve_picard_s`] reporting every iterate `(n, x_n)` to `observe`.
pub fn solve_picard_s_observed<S: Scalar>(
    problem: &DdeProblem<S>,
    step: S,
    controls: &ControlSequences<S>,
    stop: &StopRule,
    mut observe: impl FnMut(usize, &GridFunction<S>),
) -> Result<DdeSolution<S>> {
    let report = check_conditions(problem, 200);
    if !report.all_passed() {
        return Err(Error::ConditionsFailed(report.failed()));
    }
    if !controls.is_divergent() {
        return Err(Error::Config("the controls must satisfy sum eta1_n * eta2_n = inf".into()));
    }
    let op = IntegralOperator::new(problem, step)?;
    let x0 = Point::Grid(problem.initial_iterate(step)?);
    if let Point::Grid(g) = &x0 {
        observe(0, g);
    }
    let trajectory = run(SchemeId::PicardS, x0, None, stop, |state| {
        let next = picard_s_step(state, &op, controls)?;
        if let Point::Grid(g) = &next.x {
            observe(next.n, g);
        }
        Ok(next)
    })?;
    let last = trajectory.last().clone();
    let residual = sup_distance(&op.apply(&last)?, &last)?.value();
    let iterations = trajectory.n_final();
    if trajectory.stop == StopReason::MaxIters {
        return Err(Error::NonConvergence { iterations, residual: residual.as_f64() });
    }
    let Point::Grid(solution) = last else { unreachable!("grid iteration yields grids") };
    Ok(DdeSolution { solution, iterations, residual })
}

/// `e0 * prod_{k<=n} [1 - eta1_k eta2_k (1 - 2 L_f (b - t0))]`.
pub fn dde_error_bound<S: Scalar>(
    n: usize,
    problem: &DdeProblem<S>,
    controls: &ControlSequences<S>,
    initial_error: S,
) -> Result<S> {
    let factor = problem.contraction_factor();
    if !(factor < S::one()) {
        return Err(Error::Domain(format!("2 L_f (b - t0) = {factor} is not below 1")));
    }
    if initial_error < S::zero() {
        return Err(Error::Domain("initial error must be nonnegative".into()));
    }
    let gap = S::one() - factor;
    (0..=n).try_fold(initial_error, |acc, k| Ok(acc * (S::one() - controls.eta1(k)? * controls.eta2(k)? * gap)))
}
