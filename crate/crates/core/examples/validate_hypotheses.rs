//! Build a problem by hand and run the structural validators on it.
//!
//! ```bash
//! cargo run --example validate_hypotheses
//! ```

use std::sync::Arc;

use varexp_parabolic::model::{
    validate_theorem31, validate_theorem32, validate_theorem41, validate_u1, Field, FieldExpr,
    ProblemSpec, U1Options,
};
use varexp_parabolic::{Mesh, Result};

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::rectangle(1.0, 1.0, 21, 21)?.with_time(0.5, 25)?);
    let mut spec = ProblemSpec::new(mesh);
    spec.p0 = 3.0;
    spec.s = 1.5;
    spec.alpha = Field::analytic(FieldExpr::Affine {
        offset: 2.0,
        slopes: vec![0.5, 0.0],
        rate: 0.0,
    })?;
    spec.a0 = Field::constant(2.0);
    spec.a2 = Field::constant(2.0);
    spec.g = Field::constant(0.3);
    spec.h = Field::constant(1.0);

    let u1 = validate_u1(&spec, &U1Options { seed: 42, ..U1Options::default() })?;
    println!(
        "U1: passed = {}, worst coercive margin {:.3e} at tau = {:.3e}",
        u1.passed, u1.worst_coercive.relative_margin, u1.worst_coercive.tau
    );

    let t31 = validate_theorem31(&spec)?;
    println!("existence: passed = {}, s < p0 - 1: {}, ||g|| = {:?}", t31.passed, t31.s_condition, t31.g_mixed_norm);
    for note in &t31.notes {
        println!("  note: {note}");
    }
    let t32 = validate_theorem32(&spec)?;
    println!("regularity variant: passed = {}, alpha < p0: {}", t32.passed, t32.alpha_below_p0);

    // the source is nonzero, so the trivial-solution result does not apply
    let t41 = validate_theorem41(&spec)?;
    println!("trivial solution: passed = {}, h = 0: {}", t41.passed, t41.h_zero);

    spec.s = 2.0;
    println!("with s = 2: existence passed = {}", validate_theorem31(&spec)?.passed);
    Ok(())
}
