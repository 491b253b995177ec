//! Trajectory runner, a-priori error bounds and rate-of-convergence comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schemes::{step, ContractionMap, ControlSequences, Counting, IterationState, SchemeId, SelfMap};
use crate::space::{sup_distance, Point};


/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iters: usize,
    /// Stop once `|x_{n+1} - x_n| <= abs_tol`.
    pub abs_tol: f64,
    /// Stop once `|x_n - x*| <= target_tol` (needs a known fixed point).
    pub target_tol: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_iters: 100, abs_tol: 1e-12, target_tol: None }
    }
}

impl StopRule {
    pub fn with_target(mut self, tol: f64) -> Self {
        self.target_tol = Some(tol);
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        let ok = |t: f64| t.is_finite() && t >= 0.0;
        if !ok(self.abs_tol) || !self.target_tol.is_none_or(ok) {
            return Err(Error::Config("tolerances must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    AbsTol,
    TargetTol,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub scheme: SchemeId,
    /// `x_0, ..., x_N`.
    pub iterates: Vec<Point<S>>,
    /// `|x_n - x*|`, parallel to `iterates`; empty when `x*` is unknown.
    pub errors: Vec<S>,
    pub map_eval_count: usize,
    pub stop: StopReason,
}

impl<S: Scalar> Trajectory<S> {
    pub fn last(&self) -> &Point<S> {
        self.iterates.last().expect("trajectory holds x0")
    }

    /// Index of the final iterate.
    pub fn n_final(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIters
    }
}

/// Runs `id` from `x0` until a stop criterion fires.
///
/// Errors are recorded against the map's fixed-point hint when it has one.
/// Picard-S requires `controls` to carry the divergence flag.
pub fn iterate<S: Scalar>(
    id: SchemeId,
    map: &ContractionMap<S>,
    x0: Point<S>,
    controls: &ControlSequences<S>,
    stop: &StopRule,
) -> Result<Trajectory<S>> {
    iterate_map(id, map, map.fixed_point(), x0, controls, stop)
}

/// [`iterate`] for an arbitrary self-map and optional fixed point.
pub fn iterate_map<S, M>(
    id: SchemeId,
    map: &M,
    fixed_point: Option<&Point<S>>,
    x0: Point<S>,
    controls: &ControlSequences<S>,
    stop: &StopRule,
) -> Result<Trajectory<S>>
where
    S: Scalar,
    M: SelfMap<S> + ?Sized,
{
    if id == SchemeId::PicardS && !controls.is_divergent() {
        return Err(Error::Config(
            "Picard-S needs sum eta1_n * eta2_n = inf; assert the divergence flag on the controls".into(),
        ));
    }
    let counting = Counting::new(map);
    run(id, x0, fixed_point, stop, |state| step(id, state, &counting, controls)).map(|mut t| {
        t.map_eval_count = counting.count();
        t
    })
}

/// Shared trajectory loop; `advance` performs one scheme step.
pub(crate) fn run<S, F>(
    scheme: SchemeId,
    x0: Point<S>,
    fixed_point: Option<&Point<S>>,
    stop: &StopRule,
    mut advance: F,
) -> Result<Trajectory<S>>
where
    S: Scalar,
    F: FnMut(&IterationState<S>) -> Result<IterationState<S>>,
{
    stop.validate()?;
    if x0.first_non_finite().is_some() {
        return Err(Error::NonFinite { index: 0 });
    }
    let error_of = |p: &Point<S>| -> Result<Option<S>> {
        fixed_point.map(|fp| sup_distance(p, fp).map(|d| d.value())).transpose()
    };
    let hits_target = |e: Option<S>| match (e, stop.target_tol) {
        (Some(e), Some(tol)) => e.as_f64() <= tol,
        _ => false,
    };

    let mut errors = Vec::new();
    let e0 = error_of(&x0)?;
    errors.extend(e0);
    let mut state = IterationState::start(x0);
    let mut iterates = vec![state.x.clone()];
    let done = |iterates, errors, stop| Trajectory { scheme, iterates, errors, map_eval_count: 0, stop };
    if hits_target(e0) {
        return Ok(done(iterates, errors, StopReason::TargetTol));
    }

    for _ in 0..stop.max_iters {
        let next = advance(&state)?;
        if next.x.first_non_finite().is_some() {
            return Err(Error::NonFinite { index: next.n });
        }
        let moved = sup_distance(&next.x, &state.x)?.value();
        let e = error_of(&next.x)?;
        errors.extend(e);
        iterates.push(next.x.clone());
        if hits_target(e) {
            return Ok(done(iterates, errors, StopReason::TargetTol));
        }
        if moved.as_f64() <= stop.abs_tol {
            return Ok(done(iterates, errors, StopReason::AbsTol));
        }
        state = next;
    }
    Ok(done(iterates, errors, StopReason::MaxIters))
}

fn check_bound_inputs<S: Scalar>(delta: S, initial_error: S) -> Result<()> {
    if !(delta > S::zero() && delta < S::one()) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    if initial_error < S::zero() {
        return Err(Error::Domain("initial error must be nonnegative".into()));
    }
    Ok(())
}

/// `e0 * delta^(2(n+1)) * prod_{k<=n} [1 - eta1_k eta2_k (1 - delta)]`,
/// the a-priori bound on `|x_{n+1} - x*|` for Picard-S.
pub fn picard_s_error_bound<S: Scalar>(n: usize, delta: S, controls: &ControlSequences<S>, initial_error: S) -> Result<S> {
    check_bound_inputs(delta, initial_error)?;
    let gap = S::one() - delta;
    let mut bound = initial_error;
    for k in 0..=n {
        let damping = S::one() - controls.eta1(k)? * controls.eta2(k)? * gap;
        bound = bound * delta * delta * damping;
    }
    Ok(bound)
}

/// Exponential relaxation of [`picard_s_error_bound`] using `1 - x <= e^(-x)`:
/// `e0 * delta^(2(n+1)) * exp(-(1 - delta) * sum_{k<=n} eta1_k eta2_k)`.
pub fn picard_s_exponential_bound<S: Scalar>(
    n: usize,
    delta: S,
    controls: &ControlSequences<S>,
    initial_error: S,
) -> Result<S> {
    check_bound_inputs(delta, initial_error)?;
    let mut sum = S::zero();
    let mut power = S::one();
    for k in 0..=n {
        sum = sum + controls.eta1(k)? * controls.eta2(k)?;
        power = power * delta * delta;
    }
    Ok(initial_error * power * (-(S::one() - delta) * sum).exp())
}

/// `e0 * prod_{k<=n} delta [1 - eta0_k (1 - delta)] [1 - eta1_k eta2_k (1 - delta)]`,
/// the a-priori bound on `|u_{n+1} - x*|` for CR.
pub fn cr_error_bound<S: Scalar>(n: usize, delta: S, controls: &ControlSequences<S>, initial_error: S) -> Result<S> {
    check_bound_inputs(delta, initial_error)?;
    let gap = S::one() - delta;
    let mut bound = initial_error;
    for k in 0..=n {
        let outer = S::one() - controls.eta0(k)? * gap;
        let inner = S::one() - controls.eta1(k)? * controls.eta2(k)? * gap;
        bound = bound * delta * outer * inner;
    }
    Ok(bound)
}

/// Ratio of the Picard-S bound to the CR bound under constant lower bounds on
/// the controls: `[delta / (1 - eta0 (1 - delta))]^(n+1)`.
pub fn theta_ratio<S: Scalar>(n: usize, delta: S, eta0_lower: S) -> Result<S> {
    let unit = |v: S| v > S::zero() && v < S::one();
    if !unit(delta) || !unit(eta0_lower) {
        return Err(Error::Domain("delta and eta0 lower bound must lie in (0, 1)".into()));
    }
    let base = delta / (S::one() - eta0_lower * (S::one() - delta));
    Ok((0..=n).fold(S::one(), |acc, _| acc * base))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    FasterA,
    FasterB,
    SameRate,
    Inconclusive,
}

/// Finite-sample thresholds on the estimated limit of `|a_n - p| / |b_n - p|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateThresholds {
    /// Limit below this: `a` is faster.
    pub faster: f64,
    /// Limit above this: `b` is faster.
    pub slower: f64,
    pub same_low: f64,
    pub same_high: f64,
    /// Largest allowed max/min spread of the tail ratios for `SameRate`.
    pub stability: f64,
}

impl Default for RateThresholds {
    fn default() -> Self {
        Self { faster: 0.1, slower: 10.0, same_low: 0.5, same_high: 2.0, stability: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVerdict {
    /// Geometric mean of the tail ratios; NaN when undefined.
    pub limit_estimate: f64,
    pub classification: Classification,
    pub tail_window: usize,
    pub tail_ratios: Vec<f64>,
}

/// Compares the rates at which two trajectories approach `fixed_point`,
/// using the default thresholds.
pub fn compare_rates<S: Scalar>(
    a: &Trajectory<S>,
    b: &Trajectory<S>,
    fixed_point: &Point<S>,
    tail_window: usize,
) -> Result<RateVerdict> {
    compare_rates_with(a, b, fixed_point, tail_window, &RateThresholds::default())
}

pub fn compare_rates_with<S: Scalar>(
    a: &Trajectory<S>,
    b: &Trajectory<S>,
    fixed_point: &Point<S>,
    tail_window: usize,
    thresholds: &RateThresholds,
) -> Result<RateVerdict> {
    if tail_window == 0 {
        return Err(Error::Config("tail window must be at least 1".into()));
    }
    let errors = |t: &Trajectory<S>| -> Result<Vec<f64>> {
        t.iterates.iter().map(|p| sup_distance(p, fixed_point).map(|d| d.value().as_f64())).collect()
    };
    let (ea, eb) = (errors(a)?, errors(b)?);
    let len = ea.len().min(eb.len());
    let first_zero = |e: &[f64]| e[..len].iter().position(|v| *v == 0.0);
    let (za, zb) = (first_zero(&ea), first_zero(&eb));
    let cutoff = [za, zb].into_iter().flatten().min().unwrap_or(len);

    if cutoff == 0 {
        let (limit_estimate, classification) = match (za, zb) {
            (Some(i), Some(j)) if i == j => (f64::NAN, Classification::Inconclusive),
            (Some(i), Some(j)) if i < j => (0.0, Classification::FasterA),
            (Some(_), None) => (0.0, Classification::FasterA),
            (Some(_), Some(_)) | (None, Some(_)) => (f64::INFINITY, Classification::FasterB),
            (None, None) => (f64::NAN, Classification::Inconclusive),
        };
        return Ok(RateVerdict { limit_estimate, classification, tail_window, tail_ratios: Vec::new() });
    }

    let start = cutoff.saturating_sub(tail_window);
    let ratios: Vec<f64> = (start..cutoff).map(|i| ea[i] / eb[i]).collect();
    let limit = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
    let classification = if limit < thresholds.faster {
        Classification::FasterA
    } else if limit > thresholds.slower {
        Classification::FasterB
    } else if (thresholds.same_low..=thresholds.same_high).contains(&limit) && hi / lo <= thresholds.stability {
        Classification::SameRate
    } else {
        Classification::Inconclusive
    };
    Ok(RateVerdict { limit_estimate: limit, classification, tail_window, tail_ratios: ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Decimal10;
    use approx::assert_relative_eq;

    fn sahu_run<S: Scalar>(id: SchemeId, x0: f64, stop: StopRule) -> Trajectory<S> {
        let map = ContractionMap::<S>::sahu();
        iterate(id, &map, Point::Scalar(S::lit(x0)), &ControlSequences::uniform(S::lit(0.5)), &stop).unwrap()
    }

    #[test]
    fn picard_s_reaches_fixed_point_at_six() {
        let stop = StopRule::default().with_target(5e-10);
        let t = sahu_run::<f64>(SchemeId::PicardS, 1000.0, stop);
        assert_eq!(t.n_final(), 6);
        assert_eq!(t.last().as_scalar().unwrap().to_significant(10), "3.000000000");
        assert_eq!(t.stop, StopReason::TargetTol);
        assert_eq!(t.map_eval_count, 18);
        assert_eq!(t.errors.len(), t.iterates.len());

        let t = sahu_run::<Decimal10>(SchemeId::PicardS, 1000.0, stop);
        assert_eq!(t.n_final(), 6);
    }

    #[test]
    fn fixed_point_start_stops_after_one_step() {
        let t = sahu_run::<f64>(SchemeId::Picard, 3.0, StopRule::default());
        assert_eq!(t.n_final(), 1);
        assert_eq!(t.last(), &Point::Scalar(3.0));
        assert_eq!(t.stop, StopReason::AbsTol);
    }

    #[test]
    fn mann_reaches_fixed_point_at_47_in_ten_digits() {
        let stop = StopRule::default().with_target(5e-10);
        let t = sahu_run::<Decimal10>(SchemeId::Mann, 1000.0, stop);
        assert_eq!(t.n_final(), 47);
        assert_eq!(t.last().as_scalar().unwrap().to_string(), "3.000000000");
    }

    #[test]
    fn divergence_flag_required_for_picard_s() {
        let map = ContractionMap::<f64>::sahu();
        let controls = ControlSequences::uniform(0.0);
        let e = iterate(SchemeId::PicardS, &map, Point::Scalar(1.0), &controls, &StopRule::default());
        assert!(matches!(e, Err(Error::Config(_))));
        // The flag does not gate the other schemes.
        assert!(iterate(SchemeId::CR, &map, Point::Scalar(1.0), &controls, &StopRule::default()).is_ok());
    }

    #[test]
    fn non_finite_iterate_reports_index() {
        let map = ContractionMap::<f64>::scalar(0.5, |x| if x > 10.0 { f64::NAN } else { 2.0 * x }).unwrap();
        let e = iterate(SchemeId::Picard, &map, Point::Scalar(3.0), &ControlSequences::uniform(0.5), &StopRule::default());
        assert_eq!(e.unwrap_err(), Error::NonFinite { index: 3 });
    }

    #[test]
    fn stop_rule_validation() {
        assert!(StopRule::default().with_max_iters(0).validate().is_err());
        assert!(StopRule::default().with_abs_tol(-1.0).validate().is_err());
        assert!(StopRule::default().with_target(f64::NAN).validate().is_err());
    }

    #[test]
    fn max_iters_cap() {
        let t = sahu_run::<f64>(SchemeId::Mann, 1000.0, StopRule::default().with_max_iters(5));
        assert_eq!(t.n_final(), 5);
        assert!(!t.converged());
    }

    #[test]
    fn picard_s_bound_first_step() {
        let delta = 18f64.powf(-1.0 / 3.0);
        let controls = ControlSequences::uniform(0.5);
        let b = picard_s_error_bound(0, delta, &controls, 997.0).unwrap();
        // 997 * 18^(-2/3) * (1 - (1/4)(1 - 18^(-1/3))), evaluated independently.
        assert_relative_eq!(b, 122.71718763998347, max_relative = 1e-13);
        assert_eq!(picard_s_error_bound(7, delta, &controls, 0.0).unwrap(), 0.0);
        assert!(picard_s_error_bound(0, 1.0, &controls, 1.0).is_err());
    }

    #[test]
    fn cr_bound_by_hand() {
        let controls = ControlSequences::uniform(0.5);
        assert_eq!(cr_error_bound(0, 0.5, &controls, 1.0).unwrap(), 21.0 / 64.0);
        assert_eq!(cr_error_bound(3, 0.5, &controls, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_first_term_and_geometry() {
        let delta = 18f64.powf(-1.0 / 3.0);
        let t0 = theta_ratio(0, delta, 0.5).unwrap();
        assert_relative_eq!(t0, 0.5523730590643257, max_relative = 1e-13);
        let mut prev = t0;
        for n in 1..60 {
            let t = theta_ratio(n, delta, 0.5).unwrap();
            assert_relative_eq!(t / prev, t0, max_relative = 1e-12);
            assert!(t < prev);
            prev = t;
        }
        assert!(theta_ratio(0, 1.2, 0.5).is_err());
        assert!(theta_ratio(0, 0.5, 0.0).is_err());
    }

    #[test]
    fn bounds_dominate_trajectories() {
        let delta = 18f64.powf(-1.0 / 3.0);
        let controls = ControlSequences::uniform(0.5);
        let stop = StopRule::default().with_abs_tol(0.0).with_max_iters(40);
        for (id, bound) in [
            (SchemeId::PicardS, picard_s_error_bound::<f64> as fn(_, _, &_, _) -> _),
            (SchemeId::CR, cr_error_bound::<f64>),
        ] {
            let t = sahu_run::<f64>(id, 1000.0, stop);
            for n in 0..t.n_final() {
                let b = bound(n, delta, &controls, t.errors[0]).unwrap();
                assert!(b >= t.errors[n + 1], "{id} n={n}: {b} < {}", t.errors[n + 1]);
            }
        }
    }

    #[test]
    fn exponential_bound_dominates_product() {
        let delta = 0.4;
        let controls = ControlSequences::constant(0.3, 0.7, 0.9);
        for n in 0..50 {
            let p = picard_s_error_bound(n, delta, &controls, 12.0).unwrap();
            let e = picard_s_exponential_bound(n, delta, &controls, 12.0).unwrap();
            assert!(e >= p);
        }
    }

    #[test]
    fn compare_picard_s_with_cr() {
        let a = sahu_run::<f64>(SchemeId::PicardS, 1000.0, StopRule::default());
        let b = sahu_run::<f64>(SchemeId::CR, 1000.0, StopRule::default());
        let r3 = a.errors[3] / b.errors[3];
        assert!((r3 - 7.10e-3).abs() < 5e-5, "{r3}");
        let v = compare_rates(&a, &b, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::FasterA);
        assert!(v.tail_ratios.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn self_comparison_is_same_rate() {
        let a = sahu_run::<f64>(SchemeId::Mann, 1000.0, StopRule::default());
        let v = compare_rates(&a, &a, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.limit_estimate, 1.0);
        assert_eq!(v.classification, Classification::SameRate);
    }

    #[test]
    fn picard_beats_mann() {
        let a = sahu_run::<f64>(SchemeId::Picard, 1000.0, StopRule::default());
        let b = sahu_run::<f64>(SchemeId::Mann, 1000.0, StopRule::default());
        let v = compare_rates(&a, &b, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::FasterA);
        let v = compare_rates(&b, &a, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::FasterB);
    }

    #[test]
    fn zero_errors_from_the_start() {
        let a = sahu_run::<f64>(SchemeId::Picard, 3.0, StopRule::default());
        let v = compare_rates(&a, &a, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::Inconclusive);
        let b = sahu_run::<f64>(SchemeId::Picard, 1000.0, StopRule::default());
        let v = compare_rates(&a, &b, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::FasterA);
        assert_eq!(v.limit_estimate, 0.0);
        let v = compare_rates(&b, &a, &Point::Scalar(3.0), 5).unwrap();
        assert_eq!(v.classification, Classification::FasterB);
        assert!(compare_rates(&a, &b, &Point::Scalar(3.0), 0).is_err());
    }

    #[test]
    fn picard_s_and_cr_iterates_merge() {
        let map = ContractionMap::<f64>::sahu();
        let controls = ControlSequences::uniform(0.5);
        let twelfth = |id| {
            (0..12).fold(IterationState::start(Point::Scalar(1000.0)), |s, _| step(id, &s, &map, &controls).unwrap()).x
        };
        let gap = sup_distance(&twelfth(SchemeId::PicardS), &twelfth(SchemeId::CR)).unwrap().value();
        assert!(gap < 1e-8, "{gap}");
    }

    #[test]
    fn error_lists_nonincreasing() {
        for id in SchemeId::ALL {
            let t = sahu_run::<f64>(id, 1000.0, StopRule::default());
            for w in t.errors.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{id}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn picard_s_over_cr_ratio_decreases() {
        let stop = StopRule::default().with_abs_tol(0.0).with_max_iters(30);
        let a = sahu_run::<f64>(SchemeId::PicardS, 1000.0, stop);
        let b = sahu_run::<f64>(SchemeId::CR, 1000.0, stop);
        let ratios: Vec<f64> = (1..=30)
            .take_while(|&n| a.errors[n] > 1e-12 && b.errors[n] > 1e-12)
            .map(|n| a.errors[n] / b.errors[n])
            .collect();
        assert!(ratios.len() >= 4);
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }
}
