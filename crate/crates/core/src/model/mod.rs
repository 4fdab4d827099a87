//! Problem data: exponents, absorption nonlinearity, coefficient fields and
//! the validators for the structural hypotheses on them.

mod field;
mod nonlinearity;
mod validate;

use std::sync::Arc;

pub use field::{Field, FieldExpr, Profile, SeparableTerm, TableField};
pub use nonlinearity::{LocalCoefficients, NonlinearityForm, TabulatedNonlinearity};
pub use validate::{
    validate_theorem31, validate_theorem32, validate_theorem41, validate_u1, Theorem31Report,
    Theorem32Report, Theorem41Report, U1Options, U1Report, WorstSample,
};

use crate::error::{Error, Result};
use crate::exponent_spaces::ExponentField;
use crate::mesh::{GridFunction, Mesh};

/// A complete instance of the nonlocal degenerate problem with zero initial
/// and boundary data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Diffusion exponent, `>= 2`.
    pub p0: f64,
    /// Exponent of the nonlocal norm `||u||_{L^p}`.
    pub p: f64,
    /// Power of the nonlocal norm.
    pub s: f64,
    /// Dimension used in exponent arithmetic (`>= 3`), independent of the simulated one.
    pub n: usize,
    /// Growth exponent `alpha(x,t)` of the absorption.
    pub alpha: Field,
    pub nonlinearity: NonlinearityForm,
    pub a0: Field,
    pub a1: Field,
    pub a2: Field,
    pub a3: Field,
    /// Lower bound `A0` for `a2`.
    pub a_lower: f64,
    pub g: Field,
    pub h: Field,
    /// Spatial mesh with its time axis.
    pub mesh: Arc<Mesh>,
}

impl ProblemSpec {
    /// Defaults: linear diffusion (`p0 = 2`), linear absorption `a = u`
    /// (power_sign with `alpha = 2`, `a0 = a2 = 1`), no nonlocal term, no source.
    pub fn new(mesh: Arc<Mesh>) -> Self {
        Self {
            p0: 2.0,
            p: 2.0,
            s: 1.0,
            n: 3,
            alpha: Field::constant(2.0),
            nonlinearity: NonlinearityForm::PowerSign,
            a0: Field::constant(1.0),
            a1: Field::zero(),
            a2: Field::constant(1.0),
            a3: Field::zero(),
            a_lower: 1.0,
            g: Field::zero(),
            h: Field::zero(),
            mesh,
        }
    }

    /// Parameter ranges every instance must satisfy.
    pub fn check(&self) -> Result<()> {
        if !(self.p0 >= 2.0 && self.p0.is_finite()) {
            return Err(Error::Domain(format!("p0 must be >= 2, got {}", self.p0)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Domain(format!("p must be >= 1, got {}", self.p)));
        }
        if !(self.s >= 1.0 && self.s.is_finite()) {
            return Err(Error::Domain(format!("s must be >= 1, got {}", self.s)));
        }
        if self.n < 3 {
            return Err(Error::Domain(format!("n must be >= 3, got {}", self.n)));
        }
        if !(self.a_lower > 0.0) {
            return Err(Error::Domain(format!("A0 must be positive, got {}", self.a_lower)));
        }
        if !self.mesh.has_time() {
            return Err(Error::Structural("problem mesh has no time axis".into()));
        }
        if let NonlinearityForm::Tabulated(tab) = &self.nonlinearity {
            tab.validate()?;
        }
        Ok(())
    }

    pub fn coefficients_at(&self, x: &[f64], t: f64) -> LocalCoefficients {
        LocalCoefficients {
            alpha: self.alpha.eval(x, t),
            a0: self.a0.eval(x, t),
            a1: self.a1.eval(x, t),
            a2: self.a2.eval(x, t),
            a3: self.a3.eval(x, t),
        }
    }

    /// `a(x, t, tau)`.
    pub fn eval_nonlinearity(&self, x: &[f64], t: f64, tau: f64) -> Result<f64> {
        let c = self.coefficients_at(x, t);
        self.nonlinearity.eval(x, t, &c, tau)
    }

    /// `d a / d tau (x, t, tau)`.
    pub fn nonlinearity_slope(&self, x: &[f64], t: f64, tau: f64) -> Result<f64> {
        let c = self.coefficients_at(x, t);
        self.nonlinearity.derivative(x, t, &c, tau)
    }

    /// `alpha(., t)` on the mesh nodes.
    pub fn alpha_at(&self, t: f64) -> Result<ExponentField> {
        ExponentField::new(self.alpha.sample(&self.mesh, t).into_values())
    }

    /// `alpha` on every node of every time level.
    pub fn alpha_space_time(&self) -> Result<ExponentField> {
        use crate::mesh::Sampled;
        let f = self.alpha.sample_space_time(&self.mesh)?;
        ExponentField::new(f.values().to_vec())
    }

    pub fn q0(&self) -> f64 {
        self.p0 / (self.p0 - 1.0)
    }
}

/// `||u||_{L^p(Omega)}^s`, the spatially constant factor of the nonlocal term.
pub fn nonlocal_factor(u: &GridFunction, p: f64, s: f64) -> f64 {
    let norm = u.lp_norm(p);
    if norm == 0.0 {
        0.0
    } else {
        norm.powf(s)
    }
}

/// `g(., t) ||u(., t)||_{L^p}^s`.
pub fn nonlocal_term(u: &GridFunction, g: &GridFunction, p: f64, s: f64) -> Result<GridFunction> {
    if !u.same_mesh(g) {
        return Err(Error::Structural("u and g live on different meshes".into()));
    }
    if p < 1.0 || s < 1.0 {
        return Err(Error::Domain(format!("nonlocal term needs p, s >= 1, got p={p}, s={s}")));
    }
    Ok(g.scaled(nonlocal_factor(u, p, s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Sampled;

    fn mesh(nodes: usize) -> Arc<Mesh> {
        Arc::new(Mesh::interval(1.0, nodes).unwrap().with_time(1.0, 4).unwrap())
    }

    #[test]
    fn nonlocal_examples() {
        let m = mesh(11);
        let g = GridFunction::from_fn(m.clone(), |x| 1.0 + x[0]);
        let z = GridFunction::zeros(m.clone());
        assert!(nonlocal_term(&z, &g, 2.0, 1.5).unwrap().values().iter().all(|&v| v == 0.0));
        let one = GridFunction::constant(m.clone(), 1.0);
        assert_eq!(nonlocal_term(&one, &g, 3.0, 2.0).unwrap().values(), g.values());
        assert!(nonlocal_term(&one, &g, 0.5, 2.0).is_err());
    }

    #[test]
    fn nonlocal_quadratic_profile() {
        // int_0^1 x^2 = 1/3; dual-cell quadrature adds h^2/6
        for nodes in [41, 401] {
            let m = mesh(nodes);
            let h = 1.0 / (nodes - 1) as f64;
            let g = GridFunction::constant(m.clone(), 1.0);
            let x = GridFunction::from_fn(m, |c| c[0]);
            let v = nonlocal_term(&x, &g, 2.0, 2.0).unwrap().values()[3];
            assert!((v - 1.0 / 3.0).abs() <= h * h / 6.0 + 1e-14);
        }
    }

    #[test]
    fn spec_check_rejects_bad_parameters() {
        let mut s = ProblemSpec::new(mesh(5));
        s.check().unwrap();
        s.p0 = 1.5;
        assert!(s.check().is_err());
        let mut s = ProblemSpec::new(mesh(5));
        s.n = 2;
        assert!(s.check().is_err());
        let s = ProblemSpec::new(Arc::new(Mesh::interval(1.0, 5).unwrap()));
        assert!(matches!(s.check(), Err(Error::Structural(_))));
    }

    #[test]
    fn nonlinearity_through_spec() {
        let mut s = ProblemSpec::new(mesh(5));
        s.alpha = Field::constant(3.0);
        assert_eq!(s.eval_nonlinearity(&[0.5], 0.0, -2.0).unwrap(), -4.0);
        let alpha = s.alpha_space_time().unwrap();
        assert_eq!(alpha.len(), 5 * 5);
        assert_eq!(s.alpha_at(0.2).unwrap().lower_bound(), 3.0);
    }
}
