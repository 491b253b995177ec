//! One-step transition functions for the Picard-S scheme and the classical
//! schemes it is compared against.
//!
//! Every step evaluates `T` at a given argument once and reuses the image
//! wherever the recursion mentions it again. Map evaluations per step:
//!
//! | scheme   | evaluations |
//! |----------|-------------|
//! | Picard   | 1 |
//! | Mann     | 1 |
//! | Ishikawa | 2 |
//! | S        | 2 |
//! | Noor     | 3 |
//! | SP       | 3 |
//! | CR       | 3 |
//! | Picard-S | 3 |

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{affine_combine, sup_distance, Point};

/// A self-map of the working space.
pub trait SelfMap<S> {
    fn apply(&self, x: &Point<S>) -> Result<Point<S>>;
}

type MapFn<S> = Arc<dyn Fn(&Point<S>) -> Result<Point<S>> + Send + Sync>;

/// A self-map together with its contraction factor `delta`.
#[derive(Clone)]
pub struct ContractionMap<S> {
    apply: MapFn<S>,
    delta: S,
    fixed_point: Option<Point<S>>,
}

impl<S: Scalar> fmt::Debug for ContractionMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContractionMap")
            .field("delta", &self.delta)
            .field("fixed_point", &self.fixed_point)
            .finish_non_exhaustive()
    }
}

fn check_delta<S: Scalar>(delta: S) -> Result<()> {
    if delta > S::zero() && delta < S::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("contraction factor {delta} must lie in (0, 1)")))
    }
}

impl<S: Scalar> ContractionMap<S> {
    pub fn new<F>(delta: S, apply: F) -> Result<Self>
    where
        F: Fn(&Point<S>) -> Result<Point<S>> + Send + Sync + 'static,
    {
        check_delta(delta)?;
        Ok(Self { apply: Arc::new(apply), delta, fixed_point: None })
    }

    /// Wraps a real function; non-scalar points are rejected.
    pub fn scalar<F>(delta: S, f: F) -> Result<Self>
    where
        F: Fn(S) -> S + Send + Sync + 'static,
    {
        Self::new(delta, move |p: &Point<S>| match p {
            Point::Scalar(x) => Ok(Point::Scalar(f(*x))),
            other => Err(Error::Structural { left: "scalar".into(), right: other.kind() }),
        })
    }

    /// `T x = (3x + 18)^(1/3)` on `[0, inf)` with `delta = 18^(-1/3)` and fixed point 3.
    pub fn sahu() -> Self {
        Self::cube_root_affine(S::lit(3.0), S::lit(18.0))
            .expect("valid parameters")
            .with_fixed_point(Point::Scalar(S::lit(3.0)))
    }

    /// `T x = (a x + c)^(1/3)` for `a, c > 0`.
    ///
    /// The contraction factor is `max(c^(-1/3), (a/3) c^(-2/3))`, which bounds
    /// the derivative on `[0, inf)` and reduces to `18^(-1/3)` for `a = 3, c = 18`.
    pub fn cube_root_affine(a: S, c: S) -> Result<Self> {
        if !(a > S::zero() && c > S::zero()) {
            return Err(Error::Domain("cube-root map needs a > 0 and c > 0".into()));
        }
        let root = c.cbrt();
        let delta = (S::one() / root).larger(a / (S::lit(3.0) * root * root));
        Self::scalar(delta, move |x| (a * x + c).cbrt())
    }

    pub fn with_fixed_point(mut self, p: Point<S>) -> Self {
        self.fixed_point = Some(p);
        self
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn fixed_point(&self) -> Option<&Point<S>> {
        self.fixed_point.as_ref()
    }

    /// Checks `|Tx - Ty| <= delta |x - y|` on every probe pair.
    pub fn validate(&self, pairs: &[(Point<S>, Point<S>)]) -> Result<()> {
        let slack = S::one() + S::lit(1e-12);
        for (x, y) in pairs {
            let lhs = sup_distance(&self.apply(x)?, &self.apply(y)?)?.value();
            let rhs = sup_distance(x, y)?.value();
            if lhs > self.delta * rhs * slack {
                return Err(Error::Domain(format!(
                    "contraction violated at probe pair: |Tx-Ty| = {lhs}, delta |x-y| = {}",
                    self.delta * rhs
                )));
            }
        }
        Ok(())
    }

    /// Largest observed `|Tx - Ty| / |x - y|` over the probe pairs.
    pub fn estimate_delta<F>(apply: F, pairs: &[(Point<S>, Point<S>)]) -> Result<S>
    where
        F: Fn(&Point<S>) -> Result<Point<S>>,
    {
        let mut best = S::zero();
        for (x, y) in pairs {
            let den = sup_distance(x, y)?.value();
            if den.is_zero() {
                continue;
            }
            best = best.larger(sup_distance(&apply(x)?, &apply(y)?)?.value() / den);
        }
        Ok(best)
    }
}

impl<S: Scalar> SelfMap<S> for ContractionMap<S> {
    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        (self.apply)(x)
    }
}

/// Wrapper counting how often the inner map is evaluated.
pub struct Counting<'a, M: ?Sized> {
    inner: &'a M,
    count: Cell<usize>,
}

impl<'a, M: ?Sized> Counting<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Self { inner, count: Cell::new(0) }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }
}

impl<S, M: SelfMap<S> + ?Sized> SelfMap<S> for Counting<'_, M> {
    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        self.count.set(self.count.get() + 1);
        self.inner.apply(x)
    }
}

/// One weight sequence `n -> eta_n`.
#[derive(Clone)]
pub enum ControlSequence<S> {
    Constant(S),
    Formula(Arc<dyn Fn(usize) -> S + Send + Sync>),
}

impl<S: Scalar> ControlSequence<S> {
    pub fn formula(f: impl Fn(usize) -> S + Send + Sync + 'static) -> Self {
        ControlSequence::Formula(Arc::new(f))
    }

    fn raw(&self, n: usize) -> S {
        match self {
            ControlSequence::Constant(v) => *v,
            ControlSequence::Formula(f) => f(n),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for ControlSequence<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlSequence::Constant(v) => write!(f, "Constant({v:?})"),
            ControlSequence::Formula(_) => f.write_str("Formula(..)"),
        }
    }
}

/// The three weight sequences `eta^0, eta^1, eta^2`.
///
/// `divergent` records that `sum eta^1_n eta^2_n = inf`; it is set
/// automatically for constant positive `eta^1, eta^2` and must be asserted by
/// the caller for formula sequences.
#[derive(Debug, Clone)]
pub struct ControlSequences<S> {
    pub eta0: ControlSequence<S>,
    pub eta1: ControlSequence<S>,
    pub eta2: ControlSequence<S>,
    divergent: bool,
}

impl<S: Scalar> ControlSequences<S> {
    pub fn new(eta0: ControlSequence<S>, eta1: ControlSequence<S>, eta2: ControlSequence<S>) -> Self {
        let divergent = matches!(
            (&eta1, &eta2),
            (ControlSequence::Constant(a), ControlSequence::Constant(b)) if *a > S::zero() && *b > S::zero()
        );
        Self { eta0, eta1, eta2, divergent }
    }

    pub fn constant(eta0: S, eta1: S, eta2: S) -> Self {
        Self::new(ControlSequence::Constant(eta0), ControlSequence::Constant(eta1), ControlSequence::Constant(eta2))
    }

    /// All three sequences equal to `eta`.
    pub fn uniform(eta: S) -> Self {
        Self::constant(eta, eta, eta)
    }

    pub fn assert_divergent(mut self) -> Self {
        self.divergent = true;
        self
    }

    pub fn is_divergent(&self) -> bool {
        self.divergent
    }

    fn checked(name: &'static str, seq: &ControlSequence<S>, n: usize) -> Result<S> {
        let v = seq.raw(n);
        if v >= S::zero() && v <= S::one() {
            Ok(v)
        } else {
            Err(Error::ControlOutOfRange { name, n, value: v.as_f64() })
        }
    }

    pub fn eta0(&self, n: usize) -> Result<S> {
        Self::checked("eta0", &self.eta0, n)
    }

    pub fn eta1(&self, n: usize) -> Result<S> {
        Self::checked("eta1", &self.eta1, n)
    }

    pub fn eta2(&self, n: usize) -> Result<S> {
        Self::checked("eta2", &self.eta2, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    Picard,
    Mann,
    Ishikawa,
    Noor,
    SP,
    S,
    CR,
    PicardS,
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::Picard,
        SchemeId::Mann,
        SchemeId::Ishikawa,
        SchemeId::Noor,
        SchemeId::SP,
        SchemeId::S,
        SchemeId::CR,
        SchemeId::PicardS,
    ];

    /// Column label, e.g. `Picard-S`.
    pub fn label(self) -> &'static str {
        match self {
            SchemeId::Picard => "Picard",
            SchemeId::Mann => "Mann",
            SchemeId::Ishikawa => "Ishikawa",
            SchemeId::Noor => "Noor",
            SchemeId::SP => "SP",
            SchemeId::S => "S",
            SchemeId::CR => "CR",
            SchemeId::PicardS => "Picard-S",
        }
    }

    pub fn evaluations_per_step(self) -> usize {
        match self {
            SchemeId::Picard | SchemeId::Mann => 1,
            SchemeId::Ishikawa | SchemeId::S => 2,
            SchemeId::Noor | SchemeId::SP | SchemeId::CR | SchemeId::PicardS => 3,
        }
    }

    /// Names of the intermediates recorded by one step.
    pub fn intermediate_names(self) -> &'static [&'static str] {
        match self {
            SchemeId::Picard | SchemeId::Mann => &[],
            SchemeId::Ishikawa => &["w"],
            SchemeId::Noor => &["varpi", "rho"],
            SchemeId::SP => &["r", "s"],
            SchemeId::S => &["u"],
            SchemeId::CR => &["v", "w"],
            SchemeId::PicardS => &["y", "z"],
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    /// Case-insensitive; hyphens and underscores are ignored (`picard-s`, `PicardS`).
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !matches!(c, '-' | '_' | ' ')).collect::<String>().to_lowercase();
        SchemeId::ALL
            .into_iter()
            .find(|id| id.label().replace('-', "").to_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// Current iterate plus the intermediates of the step that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState<S> {
    pub n: usize,
    pub x: Point<S>,
    pub intermediates: Vec<(&'static str, Point<S>)>,
}

impl<S: Scalar> IterationState<S> {
    pub fn start(x0: Point<S>) -> Self {
        Self { n: 0, x: x0, intermediates: Vec::new() }
    }

    pub fn intermediate(&self, name: &str) -> Option<&Point<S>> {
        self.intermediates.iter().find(|(k, _)| *k == name).map(|(_, p)| p)
    }

    fn next(&self, x: Point<S>, intermediates: Vec<(&'static str, Point<S>)>) -> Self {
        Self { n: self.n + 1, x, intermediates }
    }
}

/// Picard-S step:
/// `z = (1-eta2) x + eta2 Tx`, `y = (1-eta1) Tx + eta1 Tz`, `x' = Ty`.
pub fn picard_s_step<S, M>(state: &IterationState<S>, map: &M, controls: &ControlSequences<S>) -> Result<IterationState<S>>
where
    S: Scalar,
    M: SelfMap<S> + ?Sized,
{
    let n = state.n;
    let (eta1, eta2) = (controls.eta1(n)?, controls.eta2(n)?);
    let tx = map.apply(&state.x)?;
    let z = affine_combine(&state.x, &tx, eta2)?;
    let tz = map.apply(&z)?;
    let y = affine_combine(&tx, &tz, eta1)?;
    let x_next = map.apply(&y)?;
    Ok(state.next(x_next, vec![("y", y), ("z", z)]))
}

/// CR step:
/// `w = (1-eta2) u + eta2 Tu`, `v = (1-eta1) Tu + eta1 Tw`, `u' = (1-eta0) v + eta0 Tv`.
pub fn cr_step<S, M>(state: &IterationState<S>, map: &M, controls: &ControlSequences<S>) -> Result<IterationState<S>>
where
    S: Scalar,
    M: SelfMap<S> + ?Sized,
{
    let n = state.n;
    let (eta0, eta1, eta2) = (controls.eta0(n)?, controls.eta1(n)?, controls.eta2(n)?);
    let u = &state.x;
    let tu = map.apply(u)?;
    let w = affine_combine(u, &tu, eta2)?;
    let tw = map.apply(&w)?;
    let v = affine_combine(&tu, &tw, eta1)?;
    let tv = map.apply(&v)?;
    let u_next = affine_combine(&v, &tv, eta0)?;
    Ok(state.next(u_next, vec![("v", v), ("w", w)]))
}

/// One step of Picard, Mann, Ishikawa, Noor, SP or S.
///
/// SP is written with weights `eta^1, eta^2, eta^3` from the outer to the
/// inner stage; they are read positionally from `eta0, eta1, eta2`:
/// `s = (1-eta2) q + eta2 Tq`, `r = (1-eta1) s + eta1 Ts`, `q' = (1-eta0) r + eta0 Tr`.
pub fn classical_step<S, M>(
    id: SchemeId,
    state: &IterationState<S>,
    map: &M,
    controls: &ControlSequences<S>,
) -> Result<IterationState<S>>
where
    S: Scalar,
    M: SelfMap<S> + ?Sized,
{
    let n = state.n;
    let x = &state.x;
    match id {
        SchemeId::Picard => Ok(state.next(map.apply(x)?, Vec::new())),
        SchemeId::Mann => {
            let eta0 = controls.eta0(n)?;
            let tx = map.apply(x)?;
            Ok(state.next(affine_combine(x, &tx, eta0)?, Vec::new()))
        }
        SchemeId::Ishikawa => {
            let (eta0, eta1) = (controls.eta0(n)?, controls.eta1(n)?);
            let tx = map.apply(x)?;
            let w = affine_combine(x, &tx, eta1)?;
            let tw = map.apply(&w)?;
            Ok(state.next(affine_combine(x, &tw, eta0)?, vec![("w", w)]))
        }
        SchemeId::Noor => {
            let (eta0, eta1, eta2) = (controls.eta0(n)?, controls.eta1(n)?, controls.eta2(n)?);
            let tx = map.apply(x)?;
            let rho = affine_combine(x, &tx, eta2)?;
            let trho = map.apply(&rho)?;
            let varpi = affine_combine(x, &trho, eta1)?;
            let tvarpi = map.apply(&varpi)?;
            Ok(state.next(affine_combine(x, &tvarpi, eta0)?, vec![("varpi", varpi), ("rho", rho)]))
        }
        SchemeId::SP => {
            let (outer, middle, inner) = (controls.eta0(n)?, controls.eta1(n)?, controls.eta2(n)?);
            let tq = map.apply(x)?;
            let s = affine_combine(x, &tq, inner)?;
            let ts = map.apply(&s)?;
            let r = affine_combine(&s, &ts, middle)?;
            let tr = map.apply(&r)?;
            Ok(state.next(affine_combine(&r, &tr, outer)?, vec![("r", r), ("s", s)]))
        }
        SchemeId::S => {
            let (eta0, eta1) = (controls.eta0(n)?, controls.eta1(n)?);
            let tt = map.apply(x)?;
            let u = affine_combine(x, &tt, eta1)?;
            let tu = map.apply(&u)?;
            Ok(state.next(affine_combine(&tt, &tu, eta0)?, vec![("u", u)]))
        }
        SchemeId::CR | SchemeId::PicardS => Err(Error::Routing(id)),
    }
}

/// Dispatches to the step function of `id`.
pub fn step<S, M>(id: SchemeId, state: &IterationState<S>, map: &M, controls: &ControlSequences<S>) -> Result<IterationState<S>>
where
    S: Scalar,
    M: SelfMap<S> + ?Sized,
{
    match id {
        SchemeId::PicardS => picard_s_step(state, map, controls),
        SchemeId::CR => cr_step(state, map, controls),
        other => classical_step(other, state, map, controls),
    }
}
