//! A 2-D degenerate run (`p0 = 3`) with the nonlocal term switched on,
//! followed by the per-level coercivity check and energy table.
//!
//! ```bash
//! cargo run --release --example degenerate_nonlocal
//! ```

use std::sync::Arc;

use varexp_parabolic::diagnostics::{coercivity_check_33, coercivity_summary_35, energy_report};
use varexp_parabolic::model::{Field, FieldExpr, Profile, ProblemSpec, SeparableTerm};
use varexp_parabolic::solver::{solve, Scheme, SolverConfig, TrajectoryStatus};
use varexp_parabolic::{Mesh, Result};

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::rectangle(1.0, 1.0, 21, 21)?.with_time(0.2, 10)?);
    let mut spec = ProblemSpec::new(mesh);
    spec.p0 = 3.0;
    spec.s = 1.5;
    spec.alpha = Field::constant(2.5);
    spec.g = Field::analytic(FieldExpr::term(SeparableTerm {
        coefficient: 0.5,
        x: vec![Profile::SinPi { k: 1.0 }, Profile::One],
        t: Profile::One,
    }))?;
    spec.h = Field::analytic(FieldExpr::term(SeparableTerm {
        coefficient: 4.0,
        x: vec![Profile::SinPi { k: 1.0 }, Profile::SinPi { k: 1.0 }],
        t: Profile::One,
    }))?;

    let cfg = SolverConfig { dt: 0.02, scheme: Scheme::ImplicitNewton, ..SolverConfig::default() };
    let traj = solve(&spec, &cfg)?;
    if let TrajectoryStatus::Aborted { last_level, reason, .. } = traj.status() {
        println!("aborted after level {last_level}: {reason}");
    }
    for r in traj.records() {
        println!(
            "t = {:.2}  newton its {:>2}  residual {:.1e}  ||u||^2 = {:.5}",
            r.t, r.nonlinear_iterations, r.residual, r.l2_energy
        );
    }

    let coercive = coercivity_check_33(&traj, &spec)?;
    println!("coercivity: {} violations over {} levels", coercive.violations, coercive.levels);
    let summary = coercivity_summary_35(&traj, &spec, 1e-3)?;
    println!("coercivity ratio over the run: {:?}", summary.ratio);

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "y", "diffusion", "absorb", "nonlocal");
    for row in energy_report(&traj, &spec)? {
        println!(
            "{:>5.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            row.t, row.y, row.diffusion_energy, row.absorption_pairing, row.nonlocal_pairing
        );
    }
    Ok(())
}
