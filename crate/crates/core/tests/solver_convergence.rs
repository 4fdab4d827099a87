//! Refinement studies against manufactured solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use varexp_parabolic::model::{Field, FieldExpr, NonlinearityForm, Profile, ProblemSpec, SeparableTerm};
use varexp_parabolic::solver::{solve, weak_residual, Scheme, SolutionTrajectory, SolverConfig};
use varexp_parabolic::{Mesh, Sampled, SpaceTimeField};

fn timed(nodes: usize, horizon: f64, dt: f64) -> Arc<Mesh> {
    let steps = (horizon / dt).round() as usize;
    Arc::new(Mesh::interval(1.0, nodes).unwrap().with_time(horizon, steps).unwrap())
}

fn term(coefficient: f64, x: Profile, t: Profile) -> SeparableTerm {
    SeparableTerm { coefficient, x: vec![x], t }
}

fn pow(e: f64) -> Profile {
    Profile::Power { exponent: e }
}

fn config(dt: f64, scheme: Scheme) -> SolverConfig {
    SolverConfig {
        dt,
        scheme,
        nonlinear_tol: 1e-12,
        ..SolverConfig::default()
    }
}

/// `max_n ||u^n - u*(t_n)||_{L^2}` with dual-cell weights.
fn max_l2_error(traj: &SolutionTrajectory, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let n = traj.mesh().node_count();
    let h = 1.0 / (n - 1) as f64;
    traj.times()
        .iter()
        .enumerate()
        .map(|(level, &t)| {
            traj.slice(level)
                .values()
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let w = if k == 0 || k == n - 1 { h / 2.0 } else { h };
                    w * (v - exact(k as f64 * h, t)).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn order(a: f64, b: f64) -> f64 {
    (a / b).log2()
}

/// `u* = t x(1-x)` solves the p0 = 3 problem with `a = u` and
/// `h = (1 + t)(x - x^2) - t^2 (1 - 6x + 6x^2)`.
fn degenerate_spec(mesh: Arc<Mesh>) -> ProblemSpec {
    let mut spec = ProblemSpec::new(mesh);
    spec.p0 = 3.0;
    spec.nonlinearity = NonlinearityForm::PowerSign;
    spec.alpha = Field::constant(2.0);
    spec.h = Field::analytic(FieldExpr::Separable {
        terms: vec![
            term(1.0, pow(1.0), Profile::One),
            term(-1.0, pow(2.0), Profile::One),
            term(1.0, pow(1.0), pow(1.0)),
            term(-1.0, pow(2.0), pow(1.0)),
            term(-1.0, Profile::One, pow(2.0)),
            term(6.0, pow(1.0), pow(2.0)),
            term(-6.0, pow(2.0), pow(2.0)),
        ],
    })
    .unwrap();
    spec
}

#[test]
fn degenerate_manufactured_first_order_in_dt() {
    let exact = |x: f64, t: f64| t * x * (1.0 - x);
    let horizon = 1.0;
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            let spec = degenerate_spec(timed(201, horizon, dt));
            let traj = solve(&spec, &config(dt, Scheme::ImexLagged)).unwrap();
            assert!(traj.is_complete());
            max_l2_error(&traj, exact)
        })
        .collect();
    for w in errs.windows(2) {
        assert!(order(w[0], w[1]) >= 0.95, "errors {errs:?}");
    }
}

#[test]
fn degenerate_manufactured_newton_reaches_spatial_floor() {
    // linear in t, so backward Euler with a consistent Jacobian carries no time error
    let exact = |x: f64, t: f64| t * x * (1.0 - x);
    let mut errs = Vec::new();
    for &n in &[11usize, 21, 41] {
        let spec = degenerate_spec(timed(n, 0.5, 0.05));
        let traj = solve(&spec, &config(0.05, Scheme::ImplicitNewton)).unwrap();
        assert!(traj.is_complete());
        errs.push(max_l2_error(&traj, exact));
    }
    for w in errs.windows(2) {
        assert!(order(w[0], w[1]) >= 1.8, "errors {errs:?}");
    }
}

fn heat_spec(mesh: Arc<Mesh>) -> ProblemSpec {
    let mut spec = ProblemSpec::new(mesh);
    spec.nonlinearity = NonlinearityForm::Zero;
    spec.h = Field::analytic(FieldExpr::Separable {
        terms: vec![
            term(1.0, Profile::SinPi { k: 1.0 }, Profile::One),
            term(PI * PI, Profile::SinPi { k: 1.0 }, pow(1.0)),
        ],
    })
    .unwrap();
    spec
}

#[test]
fn weak_residual_of_heat_solution_vanishes_under_refinement() {
    let hat = |x: f64| (1.0 - (x - 0.5).abs() / 0.25).max(0.0);
    let mut res = Vec::new();
    for &n in &[11usize, 21, 41, 81] {
        let h = 1.0 / (n - 1) as f64;
        let dt = 10.0 * h * h;
        let spec = heat_spec(timed(n, 0.4, dt));
        let traj = solve(&spec, &config(dt, Scheme::ImexLagged)).unwrap();
        let tm = Arc::new(Mesh::interval(1.0, n).unwrap());
        let w = SpaceTimeField::from_slices(
            tm,
            traj.times().to_vec(),
            traj.times()
                .iter()
                .map(|&t| (0..n).map(|k| (1.0 + t) * hat(k as f64 * h)).collect())
                .collect(),
        )
        .unwrap();
        res.push(weak_residual(&traj, &spec, &w).unwrap().abs());
    }
    for w in res.windows(2) {
        assert!(order(w[0], w[1]) >= 1.0, "residuals {res:?}");
    }
}

#[test]
fn schemes_agree_on_smooth_nondegenerate_run() {
    let mut diffs = Vec::new();
    for &dt in &[0.02, 0.01, 0.005] {
        let mut spec = degenerate_spec(timed(41, 0.4, dt));
        spec.p0 = 2.5;
        let a = solve(&spec, &config(dt, Scheme::ImexLagged)).unwrap();
        let b = solve(&spec, &config(dt, Scheme::ImplicitNewton)).unwrap();
        let d = a
            .slices()
            .iter()
            .zip(b.slices())
            .map(|(x, y)| x.values().iter().zip(y.values()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        assert!(a.is_complete() && b.is_complete());
        diffs.push(d);
    }
    for w in diffs.windows(2) {
        assert!(order(w[0], w[1]) >= 0.9, "differences {diffs:?}");
    }
}
