//! The pseudo-norm `[u]_{alpha,beta}`, the homeomorphism `phi(t) = |t|^{alpha/beta} t`
//! and the gradient identity that links them.
//!
//! ```bash
//! cargo run --example pn_spaces
//! ```

use std::sync::Arc;

use varexp_parabolic::pn_spaces::{
    embedding_predicate, embedding_ratio, gradient_identity_check, phi_inverse, phi_map,
    pn_metric, pn_pseudonorm, PnIndex,
};
use varexp_parabolic::{GridFunction, Mesh, Result, Sampled};

fn main() -> Result<()> {
    let mesh = Arc::new(Mesh::interval(1.0, 201)?);
    let u = GridFunction::from_fn(mesh.clone(), |x| (2.0 * std::f64::consts::PI * x[0]).sin());
    let v = GridFunction::from_fn(mesh, |x| x[0] * (1.0 - x[0]));

    // the space the diffusion of the p0 = 3 problem lives in
    let idx = PnIndex::for_diffusion(3.0)?;
    println!("diffusion index: {idx:?}");
    println!("[u]                 = {:.6}", pn_pseudonorm(&u, idx));
    println!("d(u, v)             = {:.6}", pn_metric(&u, &v, idx)?);

    let back = phi_inverse(&phi_map(&u, idx), idx);
    let err = u
        .values()
        .iter()
        .zip(back.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max |phi^-1(phi(u)) - u| = {err:.2e}");

    for (alpha, beta) in [(0.0, 2.0), (1.0, 1.0), (2.0, 2.0), (1.0, 1.5)] {
        let idx = PnIndex::new(alpha, beta)?;
        let rep = gradient_identity_check(&u, idx);
        println!(
            "({alpha}, {beta}): ||D phi(u)||^beta = {:.8}, scaled [u]^(alpha+beta) = {:.8}, rel err {:.1e}",
            rep.lhs, rep.rhs, rep.relative_error
        );
    }

    let emb = embedding_predicate(PnIndex::new(1.0, 2.0)?, PnIndex::new(0.0, 2.0)?, 3, 4.0, 3.0);
    println!("embeddings: {emb:?}");
    if let Some(r) = embedding_ratio(&u, PnIndex::new(1.0, 2.0)?, 4.0) {
        println!("||u||_4 / [u] = {r:.4}");
    }
    Ok(())
}
