//! The linear heat equation with `u* = t sin(pi x)`: error under joint
//! refinement `dt = h^2`.
//!
//! ```bash
//! cargo run --release --example heat_manufactured
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use varexp_parabolic::model::{Field, FieldExpr, NonlinearityForm, Profile, ProblemSpec, SeparableTerm};
use varexp_parabolic::solver::{solve, Scheme, SolverConfig};
use varexp_parabolic::{Mesh, Result, Sampled};

fn main() -> Result<()> {
    let horizon = 0.1;
    let mut last: Option<f64> = None;
    println!("{:>6} {:>10} {:>12} {:>6}", "nodes", "dt", "max L2 err", "order");
    for nodes in [11, 21, 41, 81] {
        let h = 1.0 / (nodes - 1) as f64;
        let dt = h * h;
        let steps = (horizon / dt).round() as usize;
        let mesh = Arc::new(Mesh::interval(1.0, nodes)?.with_time(horizon, steps)?);

        let mut spec = ProblemSpec::new(mesh);
        spec.nonlinearity = NonlinearityForm::Zero;
        // h = u*_t - u*_xx
        spec.h = Field::analytic(FieldExpr::Separable {
            terms: vec![
                SeparableTerm { coefficient: 1.0, x: vec![Profile::SinPi { k: 1.0 }], t: Profile::One },
                SeparableTerm {
                    coefficient: PI * PI,
                    x: vec![Profile::SinPi { k: 1.0 }],
                    t: Profile::Power { exponent: 1.0 },
                },
            ],
        })?;

        let cfg = SolverConfig { dt, scheme: Scheme::ImexLagged, ..SolverConfig::default() };
        let traj = solve(&spec, &cfg)?;
        let exact = Field::analytic(FieldExpr::term(SeparableTerm {
            coefficient: 1.0,
            x: vec![Profile::SinPi { k: 1.0 }],
            t: Profile::Power { exponent: 1.0 },
        }))?;
        let err = traj
            .slices()
            .iter()
            .zip(traj.times())
            .map(|(u, &t)| {
                let e = exact.sample(traj.mesh(), t);
                u.values()
                    .iter()
                    .zip(e.values())
                    .zip(traj.mesh().volumes())
                    .map(|((a, b), w)| w * (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let order = last.map(|prev| format!("{:.2}", (prev / err).log2())).unwrap_or_default();
        println!("{nodes:>6} {dt:>10.2e} {err:>12.3e} {order:>6}");
        last = Some(err);
    }
    Ok(())
}
