//! Nonlinear pn-spaces `S_{1,alpha,beta}`: the pseudo-norm
//! `[u] = (sum_i int |u|^alpha |D_i u|^beta)^{1/(alpha+beta)}`, the map
//! `phi(t) = |t|^{alpha/beta} t` onto `W^{1,beta}`, the induced metric, and
//! the embedding hypotheses.
//!
//! Gradients are forward differences on mesh edges; edge integrands are
//! evaluated at the edge midpoint.

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Sampled, SpaceTimeField};
use crate::quadrature;

/// Index pair `(alpha, beta)` of `S_{1,alpha,beta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnIndex {
    alpha: f64,
    beta: f64,
}

impl PnIndex {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("pn index alpha must be >= 0, got {alpha}")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("pn index beta must be >= 1, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    /// The pair `((p0 - 2) q0, q0)` with `q0 = p0 / (p0 - 1)` used by the solution space.
    pub fn for_diffusion(p0: f64) -> Result<Self> {
        if p0 < 2.0 {
            return Err(Error::Domain(format!("p0 must be at least 2, got {p0}")));
        }
        let q0 = p0 / (p0 - 1.0);
        Self::new((p0 - 2.0) * q0, q0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Homogeneity degree `alpha + beta`.
    pub fn degree(&self) -> f64 {
        self.alpha + self.beta
    }
}

fn pow0(a: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        a.powf(e)
    }
}

/// `[u]^{alpha+beta}` with midpoint evaluation on each edge.
pub fn pn_integral(u: &GridFunction, idx: PnIndex) -> f64 {
    let v = u.values();
    u.mesh()
        .edges()
        .iter()
        .map(|e| {
            let mid = 0.5 * (v[e.tail] + v[e.head]);
            let grad = (v[e.head] - v[e.tail]) / e.spacing;
            e.measure * pow0(mid.abs(), idx.alpha) * pow0(grad.abs(), idx.beta)
        })
        .sum()
}

/// `[u]_{S_{1,alpha,beta}}`.
pub fn pn_pseudonorm(u: &GridFunction, idx: PnIndex) -> f64 {
    pn_integral(u, idx).powf(1.0 / idx.degree())
}

/// `[u]^{alpha+beta}` for the edgewise-linear interpolant of `u`, with
/// `int |u|^alpha` along each edge taken in closed form.
pub fn pn_integral_exact(u: &GridFunction, idx: PnIndex) -> f64 {
    let v = u.values();
    u.mesh()
        .edges()
        .iter()
        .map(|e| {
            let grad = (v[e.head] - v[e.tail]) / e.spacing;
            e.measure
                * quadrature::mean_abs_power_linear(v[e.tail], v[e.head], idx.alpha)
                * pow0(grad.abs(), idx.beta)
        })
        .sum()
}

/// Pointwise `phi(t) = |t|^{alpha/beta} t`.
pub fn phi_scalar(t: f64, idx: PnIndex) -> f64 {
    pow0(t.abs(), idx.alpha / idx.beta) * t
}

/// Pointwise `phi^{-1}(s) = |s|^{-alpha/(alpha+beta)} s`, with `0 -> 0`.
pub fn phi_inverse_scalar(s: f64, idx: PnIndex) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s.abs().powf(-idx.alpha / idx.degree()) * s
}

pub fn phi_map(u: &GridFunction, idx: PnIndex) -> GridFunction {
    u.map(|t| phi_scalar(t, idx))
}

pub fn phi_inverse(v: &GridFunction, idx: PnIndex) -> GridFunction {
    v.map(|s| phi_inverse_scalar(s, idx))
}

/// Both sides of `||D phi(u)||_beta^beta = ((alpha+beta)/beta)^beta [u]^{alpha+beta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientIdentityReport {
    /// `int |d/dx phi(u_h)|^beta` by adaptive quadrature on each edge.
    pub lhs: f64,
    /// `((alpha+beta)/beta)^beta` times the closed-form `[u_h]^{alpha+beta}`.
    pub rhs: f64,
    pub relative_error: f64,
    /// Forward-difference version of the left side.
    pub discrete_lhs: f64,
    /// Midpoint version of the right side.
    pub discrete_rhs: f64,
    pub holds: bool,
}

/// Relative tolerance of [`gradient_identity_check`].
pub const GRADIENT_IDENTITY_RTOL: f64 = 1e-8;

/// Chain-rule identity behind the homeomorphism `phi`, evaluated on the
/// edgewise-linear interpolant `u_h` of the nodal values.
pub fn gradient_identity_check(u: &GridFunction, idx: PnIndex) -> GradientIdentityReport {
    let v = u.values();
    let ratio = idx.alpha / idx.beta;
    let factor = (idx.degree() / idx.beta).powf(idx.beta);
    let mut lhs = 0.0;
    for e in u.mesh().edges() {
        let (a, b) = (v[e.tail], v[e.head]);
        if a == b {
            continue;
        }
        let slope = (b - a) / e.spacing;
        // derivative of phi(u_h(x)) on the edge, x measured from the tail
        let integrand = |x: f64| {
            let t = a + slope * x;
            let dphi = (idx.degree() / idx.beta) * pow0(t.abs(), ratio);
            (dphi * slope).abs().powf(idx.beta)
        };
        let width = e.measure / e.spacing;
        let scale = (slope.abs().powf(idx.beta) * a.abs().max(b.abs()).powf(idx.alpha)).max(1e-300);
        let tol = 1e-14 * scale * e.spacing;
        let mut pieces = vec![0.0, e.spacing];
        if a * b < 0.0 {
            pieces.insert(1, -a / slope);
        }
        let integral: f64 = pieces
            .windows(2)
            .map(|w| quadrature::integrate(integrand, w[0], w[1], tol))
            .sum();
        lhs += width * integral;
    }
    let rhs = factor * pn_integral_exact(u, idx);
    let relative_error = if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
    };

    let phi = phi_map(u, idx);
    let pv = phi.values();
    let discrete_lhs: f64 = u
        .mesh()
        .edges()
        .iter()
        .map(|e| e.measure * ((pv[e.head] - pv[e.tail]) / e.spacing).abs().powf(idx.beta))
        .sum();
    let discrete_rhs = factor * pn_integral(u, idx);
    GradientIdentityReport {
        lhs,
        rhs,
        relative_error,
        discrete_lhs,
        discrete_rhs,
        holds: relative_error <= GRADIENT_IDENTITY_RTOL,
    }
}

/// Discrete `W^{1,beta}` norm: `||w||_{L^beta} + ||D w||_{L^beta}`.
pub fn sobolev_norm(w: &GridFunction, beta: f64) -> f64 {
    let v = w.values();
    let grad: f64 = w
        .mesh()
        .edges()
        .iter()
        .map(|e| e.measure * ((v[e.head] - v[e.tail]) / e.spacing).abs().powf(beta))
        .sum();
    w.lp_norm(beta) + grad.powf(1.0 / beta)
}

/// `d(u, v) = || phi(u) - phi(v) ||_{W^{1,beta}}`.
pub fn pn_metric(u: &GridFunction, v: &GridFunction, idx: PnIndex) -> Result<f64> {
    if !u.same_mesh(v) {
        return Err(Error::Structural("pn_metric arguments live on different meshes".into()));
    }
    let pu = phi_map(u, idx);
    let pv = phi_map(v, idx);
    let diff: Vec<f64> = pu.values().iter().zip(pv.values()).map(|(a, b)| a - b).collect();
    let w = GridFunction::new(u.mesh().clone(), diff)?;
    Ok(sobolev_norm(&w, idx.beta))
}

/// `[u]_{L^p(0,T; S_{1,alpha,beta})}` by trapezoid quadrature over time levels.
pub fn bochner_pseudonorm(field: &SpaceTimeField, p: f64, idx: PnIndex) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Bochner exponent must be >= 1, got {p}")));
    }
    if field.levels() < 2 {
        return Err(Error::Structural("trajectory has no time extent".into()));
    }
    let tw = field.time_weights();
    let integral: f64 = field
        .slices()
        .zip(&tw)
        .map(|(s, &w)| w * pn_pseudonorm(&s, idx).powf(p))
        .sum();
    Ok(integral.powf(1.0 / p))
}

/// Which embeddings between pn-spaces and Lebesgue spaces are guaranteed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    /// `S_{1,alpha,beta} in S_{1,alpha1,beta1}`.
    pub case_i: bool,
    /// `S_{1,alpha,beta} in L^r`.
    pub case_ii: bool,
    /// The `L^r` embedding is compact.
    pub case_ii_compact: bool,
    /// `W_0^{1,p} in S_{1,alpha,beta}`.
    pub case_iii: bool,
    /// `n (alpha+beta) / (n - beta)`, infinite when `n <= beta`.
    pub critical_r: f64,
}

pub fn embedding_predicate(idx: PnIndex, idx1: PnIndex, n: usize, r: f64, p: f64) -> EmbeddingReport {
    let case_i = idx.beta >= idx1.beta
        && idx1.alpha / idx1.beta >= idx.alpha / idx.beta
        && idx1.degree() <= idx.degree();
    let nf = n as f64;
    let (case_ii, case_ii_compact, critical_r) = if nf > idx.beta {
        let crit = nf * idx.degree() / (nf - idx.beta);
        (crit >= r, crit > r, crit)
    } else {
        (false, false, f64::INFINITY)
    };
    EmbeddingReport {
        case_i,
        case_ii,
        case_ii_compact,
        case_iii: p >= idx.degree(),
        critical_r,
    }
}

/// `||u||_{L^r} / [u]`, the empirical constant of the `L^r` embedding.
pub fn embedding_ratio(u: &GridFunction, idx: PnIndex, r: f64) -> Option<f64> {
    let denom = pn_pseudonorm(u, idx);
    (denom > 0.0).then(|| u.lp_norm(r) / denom)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::Mesh;

    fn unit(nodes: usize) -> Arc<Mesh> {
        Arc::new(Mesh::interval(1.0, nodes).unwrap())
    }

    #[test]
    fn index_validation() {
        assert!(PnIndex::new(-0.1, 2.0).is_err());
        assert!(PnIndex::new(0.0, 0.5).is_err());
        let i = PnIndex::for_diffusion(4.0).unwrap();
        assert!((i.alpha() - 8.0 / 3.0).abs() < 1e-15 && (i.beta() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pseudonorm_examples() {
        let m = unit(17);
        let z = GridFunction::zeros(m.clone());
        assert_eq!(pn_pseudonorm(&z, PnIndex::new(1.0, 2.0).unwrap()), 0.0);
        let x = GridFunction::from_fn(m, |c| c[0]);
        assert!((pn_pseudonorm(&x, PnIndex::new(0.0, 2.0).unwrap()) - 1.0).abs() < 1e-14);
        let v = pn_pseudonorm(&x, PnIndex::new(1.0, 1.0).unwrap());
        assert!((v - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn phi_examples() {
        let id = PnIndex::new(2.0, 2.0).unwrap();
        assert_eq!(phi_scalar(0.0, id), 0.0);
        assert_eq!(phi_scalar(1.0, id), 1.0);
        assert_eq!(phi_scalar(-2.0, id), -4.0);
        assert_eq!(phi_inverse_scalar(0.0, id), 0.0);
        let p4 = PnIndex::for_diffusion(4.0).unwrap();
        assert!((phi_scalar(2.0, p4) - 8.0).abs() < 1e-13);
        assert!((phi_inverse_scalar(8.0, p4) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gradient_identity_examples() {
        let m = unit(9);
        let z = GridFunction::zeros(m.clone());
        let r = gradient_identity_check(&z, PnIndex::new(1.0, 1.0).unwrap());
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);

        let x = GridFunction::from_fn(m.clone(), |c| c[0]);
        // phi(x) = x^2, int |2x| = 1 = 2 * 1/2
        let r = gradient_identity_check(&x, PnIndex::new(1.0, 1.0).unwrap());
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12, "{r:?}");

        let s = GridFunction::from_fn(m, |c| (3.0 * c[0]).sin() - 0.4);
        let r = gradient_identity_check(&s, PnIndex::new(0.0, 2.0).unwrap());
        assert!(r.holds);
        assert!((r.discrete_lhs - r.discrete_rhs).abs() < 1e-14);
    }

    #[test]
    fn metric_basics() {
        let m = unit(7);
        let idx = PnIndex::new(1.0, 2.0).unwrap();
        let u = GridFunction::from_fn(m.clone(), |c| c[0].sin());
        let v = GridFunction::from_fn(m.clone(), |c| c[0] * c[0] - 0.3);
        assert_eq!(pn_metric(&u, &u, idx).unwrap(), 0.0);
        assert!((pn_metric(&u, &v, idx).unwrap() - pn_metric(&v, &u, idx).unwrap()).abs() < 1e-15);
        let other = GridFunction::zeros(unit(8));
        assert!(pn_metric(&u, &other, idx).is_err());
    }

    #[test]
    fn bochner_examples() {
        let m = Arc::new(Mesh::interval(1.0, 11).unwrap().with_time(1.0, 200).unwrap());
        let idx = PnIndex::new(0.0, 2.0).unwrap();
        let z = SpaceTimeField::from_fn(m.clone(), |_, _| 0.0).unwrap();
        assert_eq!(bochner_pseudonorm(&z, 2.0, idx).unwrap(), 0.0);
        let c = SpaceTimeField::from_fn(m.clone(), |x, _| x[0]).unwrap();
        assert!((bochner_pseudonorm(&c, 2.0, idx).unwrap() - 1.0).abs() < 1e-13);
        let lin = SpaceTimeField::from_fn(m.clone(), |x, t| t * x[0]).unwrap();
        let exact = 3f64.powf(-0.5);
        assert!((bochner_pseudonorm(&lin, 2.0, idx).unwrap() - exact).abs() < 1e-5);
        let single = SpaceTimeField::from_slices(m.clone(), vec![0.0], vec![vec![0.0; 11]]).unwrap();
        assert!(matches!(bochner_pseudonorm(&single, 2.0, idx), Err(Error::Structural(_))));
    }

    #[test]
    fn embedding_examples() {
        let a = PnIndex::new(2.0, 2.0).unwrap();
        assert!(embedding_predicate(a, a, 3, 1.0, 1.0).case_i);
        let r = embedding_predicate(a, a, 3, 12.0, 1.0);
        assert!(r.case_ii && !r.case_ii_compact);
        assert!((r.critical_r - 12.0).abs() < 1e-14);
        let w = PnIndex::new(0.0, 2.0).unwrap();
        assert!(embedding_predicate(w, w, 3, 1.0, 2.0).case_iii);
        assert!(!embedding_predicate(w, w, 3, 1.0, 1.9).case_iii);
        assert!(!embedding_predicate(w, w, 2, 1.0, 2.0).case_ii);
    }
}
