//! Luxemburg norms on a variable exponent, the conjugate exponent and the
//! three structural inequalities.
//!
//! ```bash
//! cargo run --example variable_exponent_norms
//! ```

use std::sync::Arc;

use varexp_parabolic::exponent_spaces::{
    beta1_exponent, beta_exponent, conjugate, critical_exponent, holder_pairing_check,
    inclusion_modular_check, luxemburg_norm, modular, norm_modular_sandwich_check, DEFAULT_ETA,
};
use varexp_parabolic::{ExponentField, GridFunction, Mesh, Result};

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::interval(1.0, 101)?);

    // p(x) = 2 + 3x, from L^2 at the left end to L^5 at the right
    let p = ExponentField::new(GridFunction::from_fn(mesh.clone(), |x| 2.0 + 3.0 * x[0]).into_values())?;
    let u = GridFunction::from_fn(mesh.clone(), |x| (3.0 * x[0]).exp() - 1.0);
    let v = GridFunction::from_fn(mesh.clone(), |x| (std::f64::consts::PI * x[0]).cos());

    let norm = luxemburg_norm(&u, &p)?;
    println!("p in [{}, {}]", p.lower_bound(), p.upper_bound());
    println!("sigma_p(u)          = {:.6}", modular(&u, &p)?);
    println!("||u||_p             = {norm:.6}");
    println!("sigma_p(u / ||u||)  = {:.6}", modular(&u.scaled(1.0 / norm), &p)?);

    let q = conjugate(&p)?;
    println!("p* in [{:.4}, {:.4}]", q.lower_bound(), q.upper_bound());

    let h = holder_pairing_check(&u, &v, &p)?;
    println!("Hoelder:   {:.4} <= {:.4}  {}", h.lhs, h.rhs, h.holds);
    let s = norm_modular_sandwich_check(&u, &p)?;
    println!("sandwich:  {:.4} <= {:.4} <= {:.4}  {}", s.lower, s.modular, s.upper, s.holds);
    let low = ExponentField::constant(mesh.node_count(), 1.5)?;
    let inc = inclusion_modular_check(&u, &p, &low)?;
    println!("inclusion: {:.4} <= {:.4}  {}", inc.lhs, inc.rhs, inc.holds);

    // exponents derived from alpha(x) for p0 = 3
    let alpha = ExponentField::new(GridFunction::from_fn(mesh, |x| 1.5 + x[0]).into_values())?;
    let beta = beta_exponent(&alpha, 3.0, DEFAULT_ETA)?;
    let beta1 = beta1_exponent(&alpha, 3.0)?;
    println!(
        "beta  in [{:.3}, {:.3}], beta1 in [{:.3}, {:.3}]",
        beta.lower_bound(),
        beta.upper_bound(),
        beta1.lower_bound(),
        beta1.upper_bound()
    );
    let c = critical_exponent(3, 3.0)?;
    println!("n = 3, p0 = 3: q0 = {}, p~ = {}, p~* = {}", c.q0, c.p_tilde, c.p_tilde_conj);
    Ok(())
}
