use fixiter::{check_conditions, dde_error_bound, solve_picard_s, ControlSequences, DdeProblem, StopRule};

fn method_of_steps(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t <= 0.2 {
        1.0 + t
    } else {
        1.2 + 0.8 * (t - 0.2) + (t * t - 0.04) / 2.0
    }
}

fn worked() -> DdeProblem<f64> {
    DdeProblem::new(0.0, 0.4, 0.2, 1.0, |_, _, v| v, |_| 1.0).unwrap()
}

#[test]
fn nodes_match_oracle() {
    let p = worked();
    assert!(check_conditions(&p, 1000).all_passed());
    let sol = solve_picard_s(&p, 0.001, &ControlSequences::uniform(0.5), &StopRule::default().with_abs_tol(1e-10)).unwrap();
    let g = &sol.solution;
    assert_eq!(g.len(), 601);
    for i in 0..g.len() {
        assert!((g.values()[i] - method_of_steps(g.node_time(i))).abs() <= 1e-5);
    }
    assert_eq!(g.node_time(600), 0.4);
    assert!((g.eval(0.4).unwrap() - 1.42).abs() < 1e-5);
}

#[test]
fn nonlinear_problem_refines_quadratically() {
    // x' = -x(t - 1/4) / 2 with psi = 1: on [0, 1/4] x = 1 - t/2, on [1/4, 1/2]
    // x = 7/8 - (t - 1/4)/2 + (t - 1/4)^2 / 8.
    let p = DdeProblem::new(0.0, 0.5, 0.25, 0.5, |_, _, v: f64| -0.5 * v, |_| 1.0).unwrap();
    let exact = |t: f64| {
        if t <= 0.0 {
            1.0
        } else if t <= 0.25 {
            1.0 - t / 2.0
        } else {
            let s = t - 0.25;
            0.875 - s / 2.0 + s * s / 8.0
        }
    };
    let stop = StopRule::default().with_abs_tol(1e-14).with_max_iters(200);
    let err = |h: f64| {
        let g = solve_picard_s(&p, h, &ControlSequences::uniform(0.5), &stop).unwrap().solution;
        (0..2 * (g.len() - 1))
            .map(|j| g.t_start() + j as f64 * h / 2.0)
            .map(|t| (g.eval(t).unwrap() - exact(t)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.0025) / err(0.00125);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn bound_is_product_of_damping_factors() {
    let p = worked();
    let c = ControlSequences::uniform(0.5);
    let b3 = dde_error_bound(3, &p, &c, 2.0).unwrap();
    assert!((b3 - 2.0 * 0.95f64.powi(4)).abs() < 1e-15);
}

#[test]
fn node_error_is_second_order_for_curved_integrand() {
    let p = DdeProblem::new(0.0, 0.4, 0.2, 0.1, |t: f64, _, _| t.cos(), |_| 1.0).unwrap();
    let stop = StopRule::default().with_abs_tol(1e-15);
    let err = |h: f64| {
        let g = solve_picard_s(&p, h, &ControlSequences::uniform(0.5), &stop).unwrap().solution;
        (0..g.len()).map(|i| (g.values()[i] - (1.0 + g.node_time(i).max(0.0).sin())).abs()).fold(0.0, f64::max)
    };
    let ratio = err(0.01) / err(0.005);
    assert!((3.9..=4.1).contains(&ratio), "{ratio}");
}
