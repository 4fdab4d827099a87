//! Hypothesis validators. Failures are reported, never raised.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ProblemSpec;
use crate::error::Result;
use crate::exponent_spaces::{
    beta1_exponent, beta_exponent, conjugate, critical_exponent, luxemburg_norm, mixed_norm,
    ExponentField, DEFAULT_ETA,
};
use crate::mesh::{Sampled, SpaceTimeField};

/// Relative slack on the pointwise growth and coercivity margins.
const U1_RTOL: f64 = 1e-12;

/// Sampling controls for [`validate_u1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U1Options {
    pub samples: usize,
    pub tau_max: f64,
    /// Smallest sampled `|tau|`; magnitudes are log-uniform in `[tau_min, tau_max]`.
    pub tau_min: f64,
    pub seed: u64,
}

impl Default for U1Options {
    fn default() -> Self {
        Self {
            samples: 10_000,
            tau_max: 10.0,
            tau_min: 1e-6,
            seed: 0,
        }
    }
}

/// The sample with the smallest relative margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub tau: f64,
    pub margin: f64,
    pub relative_margin: f64,
}

impl WorstSample {
    fn empty() -> Self {
        Self {
            x: Vec::new(),
            t: 0.0,
            tau: 0.0,
            margin: f64::INFINITY,
            relative_margin: f64::INFINITY,
        }
    }

    fn offer(&mut self, x: &[f64], t: f64, tau: f64, margin: f64, scale: f64) {
        let rel = if scale > 0.0 { margin / scale } else { 0.0 };
        if rel < self.relative_margin || self.x.is_empty() {
            *self = Self {
                x: x.to_vec(),
                t,
                tau,
                margin,
                relative_margin: rel,
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct U1Report {
    pub samples: usize,
    pub seed: u64,
    pub tau_max: f64,
    /// `|a| <= a0 |tau|^{alpha-1} + a1` at every sample.
    pub growth_holds: bool,
    /// `a tau >= a2 |tau|^alpha - a3` at every sample.
    pub coercive_holds: bool,
    pub coefficients_nonnegative: bool,
    pub a2_above_lower_bound: bool,
    /// `1 < alpha < infinity` at every sample.
    pub alpha_in_range: bool,
    pub worst_growth: WorstSample,
    pub worst_coercive: WorstSample,
    pub passed: bool,
}

/// Sample `(x, t, tau)` over the cylinder and check both structural
/// inequalities of the absorption.
pub fn validate_u1(spec: &ProblemSpec, opts: &U1Options) -> Result<U1Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let extents = spec.mesh.extents().to_vec();
    let horizon = spec.mesh.horizon();
    let (ln_lo, ln_hi) = (opts.tau_min.ln(), opts.tau_max.ln());

    let mut worst_growth = WorstSample::empty();
    let mut worst_coercive = WorstSample::empty();
    let mut nonneg = true;
    let mut lower_ok = true;
    let mut alpha_ok = true;
    for _ in 0..opts.samples.max(1) {
        let x: Vec<f64> = extents.iter().map(|&l| rng.gen::<f64>() * l).collect();
        let t = rng.gen::<f64>() * horizon;
        let mag = (ln_lo + rng.gen::<f64>() * (ln_hi - ln_lo)).exp();
        let tau = if rng.gen::<bool>() { mag } else { -mag };

        let c = spec.coefficients_at(&x, t);
        nonneg &= c.a0 >= 0.0 && c.a1 >= 0.0 && c.a2 >= 0.0 && c.a3 >= 0.0;
        lower_ok &= c.a2 >= spec.a_lower;
        alpha_ok &= c.alpha > 1.0 && c.alpha.is_finite();

        let a = spec.nonlinearity.eval(&x, t, &c, tau)?;
        let growth_bound = c.a0 * tau.abs().powf(c.alpha - 1.0) + c.a1;
        worst_growth.offer(&x, t, tau, growth_bound - a.abs(), growth_bound + a.abs());

        let coercive_bound = c.a2 * tau.abs().powf(c.alpha) - c.a3;
        let pairing = a * tau;
        worst_coercive.offer(
            &x,
            t,
            tau,
            pairing - coercive_bound,
            pairing.abs() + c.a2 * tau.abs().powf(c.alpha) + c.a3,
        );
    }
    let growth_holds = worst_growth.relative_margin >= -U1_RTOL;
    let coercive_holds = worst_coercive.relative_margin >= -U1_RTOL;
    Ok(U1Report {
        samples: opts.samples.max(1),
        seed: opts.seed,
        tau_max: opts.tau_max,
        growth_holds,
        coercive_holds,
        coefficients_nonnegative: nonneg,
        a2_above_lower_bound: lower_ok,
        alpha_in_range: alpha_ok,
        worst_growth,
        worst_coercive,
        passed: growth_holds && coercive_holds && nonneg && lower_ok && alpha_ok,
    })
}

fn finite(v: &Option<f64>) -> bool {
    v.is_some_and(f64::is_finite)
}

fn norm_or_note(
    name: &str,
    field: &SpaceTimeField,
    exponent: Result<ExponentField>,
    notes: &mut Vec<String>,
) -> Option<f64> {
    match exponent.and_then(|p| luxemburg_norm(field, &p)) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    }
}

fn sup_abs(f: &SpaceTimeField) -> f64 {
    f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `g` in `L^{p0/(p0-(s+1))}(0,T; L^{p~0*}(Omega))`.
fn g_membership(
    spec: &ProblemSpec,
    g: &SpaceTimeField,
    notes: &mut Vec<String>,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let crit = match critical_exponent(spec.n, spec.p0) {
        Ok(c) => c,
        Err(e) => {
            notes.push(format!("g: {e}"));
            return (None, None, None);
        }
    };
    let denom = spec.p0 - (spec.s + 1.0);
    if !(denom > 0.0) {
        notes.push(format!(
            "g: time exponent p0/(p0-(s+1)) undefined for p0 = {}, s = {}",
            spec.p0, spec.s
        ));
        return (None, None, Some(crit.p_tilde_conj));
    }
    let r_time = spec.p0 / denom;
    match mixed_norm(g, r_time, crit.p_tilde_conj) {
        Ok(v) => (Some(v), Some(r_time), Some(crit.p_tilde_conj)),
        Err(e) => {
            notes.push(format!("g: {e}"));
            (None, Some(r_time), Some(crit.p_tilde_conj))
        }
    }
}

/// Hypotheses of the existence result with the `beta` exponent profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem31Report {
    /// `1 <= s < p0 - 1`
    pub s_condition: bool,
    /// `p <= p0`
    pub p_condition: bool,
    pub a0_beta_norm: Option<f64>,
    pub a1_alpha_conjugate_norm: Option<f64>,
    pub a2_sup: f64,
    pub a3_l1: f64,
    pub g_mixed_norm: Option<f64>,
    pub g_time_exponent: Option<f64>,
    pub g_space_exponent: Option<f64>,
    pub eta: f64,
    pub exponent_dimension: usize,
    pub simulated_dimension: usize,
    pub notes: Vec<String>,
    pub passed: bool,
}

pub fn validate_theorem31(spec: &ProblemSpec) -> Result<Theorem31Report> {
    let mesh = &spec.mesh;
    let mut notes = Vec::new();
    let s_condition = spec.s >= 1.0 && spec.s < spec.p0 - 1.0;
    let p_condition = spec.p <= spec.p0;

    let alpha = spec.alpha_space_time();
    let a0 = spec.a0.sample_space_time(mesh)?;
    let a1 = spec.a1.sample_space_time(mesh)?;
    let a2 = spec.a2.sample_space_time(mesh)?;
    let a3 = spec.a3.sample_space_time(mesh)?;
    let g = spec.g.sample_space_time(mesh)?;

    let beta = alpha
        .clone()
        .and_then(|a| beta_exponent(&a, spec.p0, DEFAULT_ETA));
    let a0_beta_norm = norm_or_note("a0", &a0, beta, &mut notes);
    let a1_alpha_conjugate_norm =
        norm_or_note("a1", &a1, alpha.and_then(|a| conjugate(&a)), &mut notes);
    let a2_sup = sup_abs(&a2);
    let a3_l1 = a3.integrate(f64::abs);
    let (g_mixed_norm, g_time_exponent, g_space_exponent) = g_membership(spec, &g, &mut notes);

    let passed = s_condition
        && p_condition
        && finite(&a0_beta_norm)
        && finite(&a1_alpha_conjugate_norm)
        && a2_sup.is_finite()
        && a3_l1.is_finite()
        && finite(&g_mixed_norm);
    Ok(Theorem31Report {
        s_condition,
        p_condition,
        a0_beta_norm,
        a1_alpha_conjugate_norm,
        a2_sup,
        a3_l1,
        g_mixed_norm,
        g_time_exponent,
        g_space_exponent,
        eta: DEFAULT_ETA,
        exponent_dimension: spec.n,
        simulated_dimension: mesh.dim(),
        notes,
        passed,
    })
}

/// Hypotheses of the existence result for sub-diffusive growth `alpha+ < p0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem32Report {
    pub s_condition: bool,
    pub p_condition: bool,
    /// `1 < alpha- <= alpha+ < p0`
    pub alpha_below_p0: bool,
    pub alpha_upper: f64,
    pub beta1_upper: Option<f64>,
    pub a0_beta1_norm: Option<f64>,
    pub a1_alpha_conjugate_norm: Option<f64>,
    pub g_mixed_norm: Option<f64>,
    pub exponent_dimension: usize,
    pub simulated_dimension: usize,
    pub notes: Vec<String>,
    pub passed: bool,
}

pub fn validate_theorem32(spec: &ProblemSpec) -> Result<Theorem32Report> {
    let mesh = &spec.mesh;
    let mut notes = Vec::new();
    let s_condition = spec.s >= 1.0 && spec.s < spec.p0 - 1.0;
    let p_condition = spec.p <= spec.p0;

    let alpha = spec.alpha_space_time();
    let (alpha_below_p0, alpha_upper) = match &alpha {
        Ok(a) => (a.lower_bound() > 1.0 && a.upper_bound() < spec.p0, a.upper_bound()),
        Err(e) => {
            notes.push(format!("alpha: {e}"));
            (false, f64::NAN)
        }
    };
    let a0 = spec.a0.sample_space_time(mesh)?;
    let a1 = spec.a1.sample_space_time(mesh)?;
    let g = spec.g.sample_space_time(mesh)?;

    let beta1 = alpha.clone().and_then(|a| beta1_exponent(&a, spec.p0));
    let beta1_upper = beta1.as_ref().ok().map(|b| b.upper_bound());
    let a0_beta1_norm = norm_or_note("a0", &a0, beta1, &mut notes);
    let a1_alpha_conjugate_norm =
        norm_or_note("a1", &a1, alpha.and_then(|a| conjugate(&a)), &mut notes);
    let (g_mixed_norm, _, _) = g_membership(spec, &g, &mut notes);

    let passed = s_condition
        && p_condition
        && alpha_below_p0
        && finite(&a0_beta1_norm)
        && finite(&a1_alpha_conjugate_norm)
        && finite(&g_mixed_norm);
    Ok(Theorem32Report {
        s_condition,
        p_condition,
        alpha_below_p0,
        alpha_upper,
        beta1_upper,
        a0_beta1_norm,
        a1_alpha_conjugate_norm,
        g_mixed_norm,
        exponent_dimension: spec.n,
        simulated_dimension: mesh.dim(),
        notes,
        passed,
    })
}

/// Hypotheses of the trivial-solution result for the homogeneous problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem41Report {
    pub h_zero: bool,
    pub p_is_two: bool,
    pub p0_above_two: bool,
    pub a3_zero: bool,
    /// `K = sup_t ||g(., t)||_{L^2(Omega)}` over the time grid.
    pub k: f64,
    pub k_finite: bool,
    pub passed: bool,
}

pub fn validate_theorem41(spec: &ProblemSpec) -> Result<Theorem41Report> {
    let mesh = &spec.mesh;
    let h = spec.h.sample_space_time(mesh)?;
    let a3 = spec.a3.sample_space_time(mesh)?;
    let g = spec.g.sample_space_time(mesh)?;
    let h_zero = spec.h.is_identically_zero() || h.values().iter().all(|&v| v == 0.0);
    let a3_zero = a3.values().iter().all(|&v| v == 0.0);
    let k = mixed_norm(&g, f64::INFINITY, 2.0)?;
    let p_is_two = spec.p == 2.0;
    let p0_above_two = spec.p0 > 2.0;
    let k_finite = k.is_finite();
    Ok(Theorem41Report {
        h_zero,
        p_is_two,
        p0_above_two,
        a3_zero,
        k,
        k_finite,
        passed: h_zero && p_is_two && p0_above_two && a3_zero && k_finite,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::Mesh;
    use crate::model::{Field, FieldExpr, NonlinearityForm, TabulatedNonlinearity};

    fn spec() -> ProblemSpec {
        let mesh = Arc::new(Mesh::interval(1.0, 11).unwrap().with_time(1.0, 10).unwrap());
        let mut s = ProblemSpec::new(mesh);
        s.p0 = 3.0;
        s.s = 1.0;
        s.alpha = Field::constant(2.5);
        s
    }

    fn small() -> U1Options {
        U1Options { samples: 2000, ..Default::default() }
    }

    #[test]
    fn power_sign_equality_case() {
        let s = spec();
        let r = validate_u1(&s, &small()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.worst_coercive.relative_margin.abs() < 1e-14);
        assert!(r.worst_growth.relative_margin.abs() < 1e-14);
    }

    #[test]
    fn offset_form_fails_coercivity_for_negative_tau() {
        let mut s = spec();
        s.nonlinearity = NonlinearityForm::PowerAbsPlusOffset;
        s.a0 = Field::constant(1.0);
        s.a1 = Field::zero();
        let r = validate_u1(&s, &small()).unwrap();
        assert!(r.growth_holds);
        assert!(!r.coercive_holds);
        assert!(r.worst_coercive.tau < 0.0);
        // hand arithmetic at tau = -1: a tau = -1 < 1 = |tau|^alpha
        let a = s.eval_nonlinearity(&[0.5], 0.5, -1.0).unwrap();
        assert!(-a < 1.0);
    }

    #[test]
    fn zero_absorption_with_offset() {
        let mut s = spec();
        s.nonlinearity = NonlinearityForm::Zero;
        s.a3 = Field::constant(1.0);
        let r = validate_u1(&s, &U1Options { tau_max: 1.0, ..small() }).unwrap();
        assert!(r.coercive_holds);
        let r = validate_u1(&s, &small()).unwrap();
        assert!(!r.coercive_holds);
    }

    #[test]
    fn validator_is_deterministic() {
        let s = spec();
        let a = validate_u1(&s, &small()).unwrap();
        let b = validate_u1(&s, &small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tabulated_outside_range_propagates() {
        let mut s = spec();
        s.nonlinearity = NonlinearityForm::Tabulated(TabulatedNonlinearity {
            points: vec![],
            times: vec![],
            taus: vec![-1.0, 1.0],
            values: vec![-1.0, 1.0],
        });
        assert!(validate_u1(&s, &small()).is_err());
    }

    #[test]
    fn theorem31_s_condition() {
        let mut s = spec();
        s.g = Field::constant(1.0);
        let r = validate_theorem31(&s).unwrap();
        assert!(r.s_condition && r.passed, "{r:?}");
        assert!(finite(&r.g_mixed_norm));
        s.s = 2.0;
        let r = validate_theorem31(&s).unwrap();
        assert!(!r.s_condition && !r.passed);
    }

    #[test]
    fn theorem31_infinite_beta_branch() {
        let mut s = spec();
        s.alpha = Field::constant(3.0);
        s.a0 = Field::constant(0.5);
        let r = validate_theorem31(&s).unwrap();
        assert!((r.a0_beta_norm.unwrap() - 0.5).abs() < 1e-11);
    }

    #[test]
    fn theorem32_profile() {
        let mut s = spec();
        s.alpha = Field::constant(2.0);
        let r = validate_theorem32(&s).unwrap();
        assert!(r.alpha_below_p0 && r.passed, "{r:?}");
        assert!((r.beta1_upper.unwrap() - 6.0).abs() < 1e-13);
        s.alpha = Field::constant(3.0);
        assert!(!validate_theorem32(&s).unwrap().passed);
        s.alpha = Field::constant(2.0);
        s.a0 = Field::zero();
        let r = validate_theorem32(&s).unwrap();
        assert_eq!(r.a0_beta1_norm, Some(0.0));
    }

    #[test]
    fn theorem41_constant() {
        let mut s = spec();
        s.p = 2.0;
        let r = validate_theorem41(&s).unwrap();
        assert_eq!(r.k, 0.0);
        assert!(r.passed);
        s.g = Field::constant(1.0);
        assert!((validate_theorem41(&s).unwrap().k - 1.0).abs() < 1e-14);
        s.g = Field::analytic(FieldExpr::Affine { offset: 0.0, slopes: vec![], rate: 1.0 }).unwrap();
        assert!((validate_theorem41(&s).unwrap().k - 1.0).abs() < 1e-14);
        s.h = Field::constant(1.0);
        assert!(!validate_theorem41(&s).unwrap().passed);
    }
}
