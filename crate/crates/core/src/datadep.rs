//! Approximate operators and the drift of the Picard-S fixed point under an
//! `epsilon`-perturbation of the map: `|x* - x~*| <= 5 epsilon / (1 - delta)`.

use std::fmt;
use std::sync::Arc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convergence::{iterate_map, run, StopReason, StopRule, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schemes::{picard_s_step, ContractionMap, ControlSequences, IterationState, SchemeId, SelfMap};
use crate::space::{sup_distance, Point};

/// Probe points drawn when validating a scalar approximate operator.
pub const DEFAULT_SAMPLES: usize = 100;

const SAMPLE_SEED: u64 = 0xda7a_dee9;
const CONTRACT_SLACK: f64 = 1e-12;
const GAP_SLACK: f64 = 1e-9;

type MapFn<S> = Arc<dyn Fn(&Point<S>) -> Result<Point<S>> + Send + Sync>;

/// A map `T~` with `|Tx - T~x| <= epsilon` on the working domain.
#[derive(Clone)]
pub struct ApproximateOperator<S> {
    base: ContractionMap<S>,
    perturbed: MapFn<S>,
    epsilon: S,
}

impl<S: Scalar> fmt::Debug for ApproximateOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApproximateOperator")
            .field("base", &self.base)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar> ApproximateOperator<S> {
    /// Builds the operator after checking `|Tx - T~x| <= epsilon` at every probe.
    pub fn new<F>(base: ContractionMap<S>, perturbed: F, epsilon: S, probes: &[Point<S>]) -> Result<Self>
    where
        F: Fn(&Point<S>) -> Result<Point<S>> + Send + Sync + 'static,
    {
        if !(epsilon >= S::zero() && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon = {epsilon} must be finite and nonnegative")));
        }
        let op = Self { base, perturbed: Arc::new(perturbed), epsilon };
        let limit = epsilon.as_f64() + CONTRACT_SLACK;
        for x in probes {
            let d = sup_distance(&op.base.apply(x)?, &(op.perturbed)(x)?)?.value().as_f64();
            if !(d <= limit) {
                return Err(Error::Hypothesis(format!(
                    "approximate operator contract fails at {x:?}: |Tx - T~x| = {d:e} > epsilon = {epsilon}"
                )));
            }
        }
        Ok(op)
    }

    /// Scalar `T~` validated at `samples` seeded points of `[lo, hi]`.
    pub fn scalar<F>(base: ContractionMap<S>, perturbed: F, epsilon: S, lo: f64, hi: f64, samples: usize) -> Result<Self>
    where
        F: Fn(S) -> S + Send + Sync + 'static,
    {
        if !(lo <= hi) {
            return Err(Error::Domain(format!("empty sampling interval [{lo}, {hi}]")));
        }
        let probes = sample_points(lo, hi, samples);
        Self::new(
            base,
            move |p: &Point<S>| match p {
                Point::Scalar(x) => Ok(Point::Scalar(perturbed(*x))),
                other => Err(Error::Structural { left: "scalar".into(), right: other.kind() }),
            },
            epsilon,
            &probes,
        )
    }

    /// `T~ = T + shift` component-wise, validated on `[lo, hi]`.
    pub fn shifted(base: ContractionMap<S>, shift: S, epsilon: S, lo: f64, hi: f64) -> Result<Self> {
        let inner = base.clone();
        Self::new(
            base,
            move |p| {
                let tx = inner.apply(p)?;
                Ok(match tx {
                    Point::Scalar(v) => Point::Scalar(v + shift),
                    Point::Vector(v) => Point::Vector(v.into_iter().map(|c| c + shift).collect()),
                    Point::Grid(g) => {
                        let values = g.values().iter().map(|c| *c + shift).collect();
                        Point::Grid(g.with_values(values))
                    }
                })
            },
            epsilon,
            &sample_points(lo, hi, DEFAULT_SAMPLES),
        )
    }

    pub fn base(&self) -> &ContractionMap<S> {
        &self.base
    }

    pub fn epsilon(&self) -> S {
        self.epsilon
    }

    /// `T~` as a self-map.
    pub fn perturbed(&self) -> Perturbed<'_, S> {
        Perturbed(self)
    }
}

fn sample_points<S: Scalar>(lo: f64, hi: f64, samples: usize) -> Vec<Point<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    (0..samples).map(|_| Point::Scalar(S::lit(rng.gen_range(lo..=hi)))).collect()
}

/// Borrowed view of `T~`.
pub struct Perturbed<'a, S>(&'a ApproximateOperator<S>);

impl<S: Scalar> SelfMap<S> for Perturbed<'_, S> {
    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        (self.0.perturbed)(x)
    }
}

fn check_product<S: Scalar>(controls: &ControlSequences<S>, n: usize) -> Result<()> {
    let product = controls.eta1(n)? * controls.eta2(n)?;
    if product < S::lit(0.5) {
        return Err(Error::Hypothesis(format!(
            "data-dependence hypothesis (i): eta1_n * eta2_n >= 1/2 fails at n = {n} (product {product})"
        )));
    }
    Ok(())
}

/// One Picard-S step with `T~` in place of `T`.
pub fn perturbed_picard_s_step<S: Scalar>(
    state: &IterationState<S>,
    op: &ApproximateOperator<S>,
    controls: &ControlSequences<S>,
) -> Result<IterationState<S>> {
    check_product(controls, state.n)?;
    picard_s_step(state, &op.perturbed(), controls)
}

/// `5 epsilon / (1 - delta)`.
pub fn data_dependence_bound<S: Scalar>(epsilon: S, delta: S) -> Result<S> {
    if !(delta > S::zero() && delta < S::one()) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    if epsilon < S::zero() {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be nonnegative")));
    }
    Ok(S::lit(5.0) * epsilon / (S::one() - delta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataDependenceReport {
    pub base_fixed_point: Vec<f64>,
    pub perturbed_fixed_point: Vec<f64>,
    pub empirical_gap: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub base_iterations: usize,
    pub perturbed_iterations: usize,
}

/// Runs Picard-S under `T` and under `T~` from `x0` and compares the limits.
///
/// The two runs execute on separate threads. Either run exhausting
/// `stop.max_iters` is a non-convergence error.
pub fn verify_data_dependence<S: Scalar>(
    op: &ApproximateOperator<S>,
    x0: Point<S>,
    controls: &ControlSequences<S>,
    stop: &StopRule,
) -> Result<DataDependenceReport> {
    check_product(controls, 0)?;
    if !controls.is_divergent() {
        return Err(Error::Config("the controls must satisfy sum eta1_n * eta2_n = inf".into()));
    }
    let converged = |t: Result<Trajectory<S>>| -> Result<Trajectory<S>> {
        let t = t?;
        if t.stop == StopReason::MaxIters {
            let tail = &t.iterates[t.iterates.len() - 2..];
            let residual = sup_distance(&tail[1], &tail[0])?.value().as_f64();
            return Err(Error::NonConvergence { iterations: t.n_final(), residual });
        }
        Ok(t)
    };
    let (base, perturbed) = thread::scope(|scope| {
        let x0_base = x0.clone();
        let base = scope.spawn(move || iterate_map(SchemeId::PicardS, op.base(), None, x0_base, controls, stop));
        let perturbed = run(SchemeId::PicardS, x0, None, stop, |s| perturbed_picard_s_step(s, op, controls));
        (base.join().expect("base run panicked"), perturbed)
    });
    let (base, perturbed) = (converged(base)?, converged(perturbed)?);

    let gap = sup_distance(base.last(), perturbed.last())?.value().as_f64();
    let bound = data_dependence_bound(op.epsilon(), op.base().delta())?.as_f64();
    let coords = |p: &Point<S>| p.components().iter().map(|c| c.as_f64()).collect();
    Ok(DataDependenceReport {
        base_fixed_point: coords(base.last()),
        perturbed_fixed_point: coords(perturbed.last()),
        empirical_gap: gap,
        bound,
        satisfied: gap <= bound + GAP_SLACK,
        base_iterations: base.n_final(),
        perturbed_iterations: perturbed.n_final(),
    })
}
