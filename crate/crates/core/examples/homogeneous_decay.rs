//! Homogeneous problem (`h = 0`, `p = 2`): zero data stays zero, and injected
//! data stays under the Groenwall bound.
//!
//! ```bash
//! cargo run --release --example homogeneous_decay
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use varexp_parabolic::diagnostics::{homogeneous_decay_check, DecayOptions};
use varexp_parabolic::model::{validate_theorem41, Field, ProblemSpec};
use varexp_parabolic::solver::{solve, solve_from, Scheme, SolverConfig};
use varexp_parabolic::{GridFunction, Mesh, Result, Sampled};

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::interval(1.0, 41)?.with_time(0.2, 40)?);
    let mut spec = ProblemSpec::new(mesh);
    spec.p0 = 3.0;
    spec.s = 1.5;
    spec.alpha = Field::constant(2.5);
    spec.g = Field::constant(1.0);
    println!("hypotheses: {:?}", validate_theorem41(&spec)?);

    let cfg = SolverConfig { dt: 0.005, scheme: Scheme::ImplicitNewton, ..SolverConfig::default() };
    let zero = solve(&spec, &cfg)?;
    println!("zero data: max |u| = {:e}", zero.max_abs());

    let space = Arc::new(Mesh::interval(1.0, 41)?);
    let u0 = GridFunction::from_fn(space, |x| (PI * x[0]).sin()).with_zero_boundary();
    let traj = solve_from(&spec, &cfg, &u0)?;
    let rep = homogeneous_decay_check(&traj, &spec, &DecayOptions::default())?;
    println!(
        "K = {:.4}, eps = {:?} (threshold {:.4}), c(eps) = {:?}",
        rep.k, rep.epsilon, rep.epsilon_threshold, rep.young_constant
    );
    println!("relation holds: {}, max residual {:.2e}", rep.relation_holds, rep.max_relation_residual);
    for (n, (&t, bound)) in traj.times().iter().zip(&rep.gronwall_bound).enumerate().step_by(8) {
        let y = traj.slice(n).values().iter().zip(traj.mesh().volumes()).map(|(v, w)| w * v * v).sum::<f64>();
        println!("t = {t:.3}  y = {y:.6}  bound = {bound:.6}");
    }
    println!("passed: {}", rep.passed);
    Ok(())
}
