//! Finite-volume diffusion operators on the dual cells.

use crate::mesh::{Edge, GridFunction, Mesh, Sampled};

/// `|u|^{p0-2}`, with `|0|^0 = 1` and `|0|^{>0} = 0`.
pub(crate) fn degeneracy(u: f64, p0: f64) -> f64 {
    if p0 == 2.0 {
        1.0
    } else if u == 0.0 {
        0.0
    } else {
        u.abs().powf(p0 - 2.0)
    }
}

/// `d/du |u|^{p0-2}`; taken as 0 at the origin.
pub(crate) fn degeneracy_slope(u: f64, p0: f64) -> f64 {
    if p0 == 2.0 || u == 0.0 {
        0.0
    } else {
        (p0 - 2.0) * u.abs().powf(p0 - 3.0) * u.signum()
    }
}

/// Arithmetic face mean of `|u|^{p0-2} + delta`.
pub(crate) fn face_coefficient(ui: f64, uj: f64, p0: f64, delta: f64) -> f64 {
    0.5 * (degeneracy(ui, p0) + degeneracy(uj, p0)) + delta
}

/// Edge conductance `measure / h^2`; the flux through the face is
/// `conductance * kappa * (u_tail - u_head)`.
pub(crate) fn conductance(e: &Edge) -> f64 {
    e.measure / (e.spacing * e.spacing)
}

/// `(1/V_i) sum_e kappa_e c_e (v_i - v_other)` on interior nodes, 0 on the boundary.
fn apply_weighted(mesh: &Mesh, v: &[f64], kappa: impl Fn(&Edge) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; mesh.node_count()];
    for e in mesh.edges() {
        let flux = kappa(&e) * conductance(&e) * (v[e.tail] - v[e.head]);
        out[e.tail] += flux;
        out[e.head] -= flux;
    }
    for (k, o) in out.iter_mut().enumerate() {
        if mesh.is_boundary(k) {
            *o = 0.0;
        } else {
            *o /= mesh.volumes()[k];
        }
    }
    out
}

/// `-div(kappa grad u)` with face coefficients `kappa` the arithmetic mean of
/// `|u|^{p0-2} + delta` at the two end nodes. Boundary entries are 0.
///
/// At `p0 = 2`, `delta = 0` this is the negative 3-point (1-D) or 5-point
/// (2-D) Laplacian.
pub fn assemble_diffusion_divergence(u: &GridFunction, p0: f64, delta: f64) -> GridFunction {
    let v = u.values();
    let out = apply_weighted(u.mesh(), v, |e| face_coefficient(v[e.tail], v[e.head], p0, delta));
    GridFunction::new(u.mesh().clone(), out).expect("same mesh")
}

/// `-(1/(p0-1)) Laplacian(|u|^{p0-2} u)`.
pub fn assemble_diffusion_transformed(u: &GridFunction, p0: f64) -> GridFunction {
    let phi: Vec<f64> = u.values().iter().map(|&x| degeneracy(x, p0) * x).collect();
    let scale = 1.0 / (p0 - 1.0);
    let mut out = apply_weighted(u.mesh(), &phi, |_| 1.0);
    if scale != 1.0 {
        out.iter_mut().for_each(|o| *o *= scale);
    }
    GridFunction::new(u.mesh().clone(), out).expect("same mesh")
}
