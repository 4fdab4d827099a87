//! Generalized Lebesgue spaces `L^{p(x,t)}`: modulars, Luxemburg norms,
//! conjugate exponents and the exponents derived from the absorption growth.
//!
//! All integrals are weighted nodal sums (see [`Sampled`]), i.e. the midpoint
//! rule on dual cells with piecewise-constant extension of nodal data.

use crate::error::{Error, Result};
use crate::mesh::{Sampled, SpaceTimeField};

/// Relative slack used by the inequality predicates.
pub const CHECK_RTOL: f64 = 1e-9;

/// Above this magnitude powers are evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 1e100;

/// Default `eta` splitting the cylinder into the finite and infinite parts of `beta`.
pub const DEFAULT_ETA: f64 = 0.01;

/// A sampled exponent `p(x,t)` with its essential bounds.
///
/// Samples equal to `f64::INFINITY` are flagged in the infinity mask and do
/// not enter `lower_bound`/`upper_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    samples: Vec<f64>,
    infinite: Vec<bool>,
    lower: f64,
    upper: f64,
}

impl ExponentField {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        let mut infinite = Vec::with_capacity(samples.len());
        for &p in &samples {
            if p.is_nan() {
                return Err(Error::Domain("exponent sample is NaN".into()));
            }
            if p == f64::INFINITY {
                infinite.push(true);
                continue;
            }
            if p < 1.0 {
                return Err(Error::Domain(format!("exponent {p} below 1")));
            }
            infinite.push(false);
            lower = lower.min(p);
            upper = upper.max(p);
        }
        if upper == f64::NEG_INFINITY {
            // every node is infinite
            upper = f64::INFINITY;
        }
        Ok(Self { samples, infinite, lower, upper })
    }

    pub fn constant(len: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; len])
    }

    /// Evaluate `p` at every sample position of `field`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_infinite(&self, k: usize) -> bool {
        self.infinite[k]
    }

    pub fn infinity_mask(&self) -> &[bool] {
        &self.infinite
    }

    pub fn has_infinite(&self) -> bool {
        self.infinite.iter().any(|&b| b)
    }

    /// `p^-` over finite samples.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// `p^+` over finite samples.
    pub fn upper_bound(&self) -> f64 {
        self.upper
    }
}

fn check_len(u: &impl Sampled, p: &ExponentField) -> Result<()> {
    if u.values().len() != p.len() {
        return Err(Error::Structural(format!(
            "field has {} samples, exponent has {}",
            u.values().len(),
            p.len()
        )));
    }
    Ok(())
}

/// `|v|^p` for `p >= 1`, in log space for very large `|v|`.
pub(crate) fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        0.0
    } else if a > LOG_SPACE_THRESHOLD {
        (p * a.ln()).exp()
    } else {
        a.powf(p)
    }
}

/// Modular of `u / lambda` without materializing the scaled field.
fn scaled_modular(values: &[f64], weights: &[f64], p: &ExponentField, lambda: f64) -> f64 {
    let ln_lambda = lambda.ln();
    let mut sum = 0.0;
    for (k, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let a = v.abs();
        if a == 0.0 {
            continue;
        }
        if p.infinite[k] {
            if a > lambda {
                return f64::INFINITY;
            }
            continue;
        }
        let r = a / lambda;
        let term = if r.is_finite() && r > 0.0 && a <= LOG_SPACE_THRESHOLD {
            r.powf(p.samples[k])
        } else {
            (p.samples[k] * (a.ln() - ln_lambda)).exp()
        };
        sum += w * term;
    }
    sum
}

/// `sigma_p(u) = int |u|^{p(x,t)}`.
///
/// Nodes in the infinity mask contribute 0 where `|u| <= 1` and make the
/// modular infinite otherwise.
pub fn modular(u: &impl Sampled, p: &ExponentField) -> Result<f64> {
    check_len(u, p)?;
    let mut sum = 0.0;
    for (k, (&v, &w)) in u.values().iter().zip(u.weights()).enumerate() {
        if v.is_nan() {
            return Err(Error::NumericDomain(format!("NaN sample at node {k}")));
        }
        if p.infinite[k] {
            if v.abs() > 1.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        sum += w * abs_pow(v, p.samples[k]);
    }
    if sum.is_nan() {
        return Err(Error::NumericDomain("modular evaluated to NaN".into()));
    }
    Ok(sum)
}

/// Controls for the Luxemburg bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuxemburgOptions {
    /// Bracket width at which bisection stops.
    pub abs_tol: f64,
    /// Relative bracket width at which bisection stops; the tighter of the
    /// two widths is used so small norms keep their relative accuracy.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for LuxemburgOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-14,
            max_iter: 200,
        }
    }
}

/// Luxemburg norm `inf { lambda > 0 : sigma_p(u / lambda) <= 1 }`.
pub fn luxemburg_norm(u: &impl Sampled, p: &ExponentField) -> Result<f64> {
    luxemburg_norm_with(u, p, &LuxemburgOptions::default())
}

pub fn luxemburg_norm_with(
    u: &impl Sampled,
    p: &ExponentField,
    opts: &LuxemburgOptions,
) -> Result<f64> {
    check_len(u, p)?;
    let values = u.values();
    let weights = u.weights();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NumericDomain("NaN sample".into()));
    }
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    if sup.is_infinite() {
        return Err(Error::NumericDomain("infinite sample".into()));
    }
    let feasible = |lambda: f64| scaled_modular(values, weights, p, lambda) <= 1.0;

    let measure: f64 = weights.iter().sum();
    let p_lo = if p.lower.is_finite() { p.lower } else { 1.0 };
    let mut hi = (sup * measure.powf(1.0 / p_lo)).max(1.0);
    let mut expansions = 0;
    while !feasible(hi) {
        hi *= 2.0;
        expansions += 1;
        if expansions > 2100 || !hi.is_finite() {
            return Err(Error::Solver {
                reason: "Luxemburg bracket expansion failed".into(),
                residual: scaled_modular(values, weights, p, hi),
            });
        }
    }
    let mut lo = 0.5 * hi;
    while feasible(lo) {
        hi = lo;
        lo *= 0.5;
        if lo == 0.0 {
            return Ok(hi);
        }
    }

    for _ in 0..opts.max_iter {
        let width = hi - lo;
        if width <= opts.abs_tol.min(opts.rel_tol * hi) {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // bracket at floating-point resolution
            return Ok(mid);
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Solver {
        reason: format!("Luxemburg bisection did not converge in {} iterations", opts.max_iter),
        residual: hi - lo,
    })
}

/// How the endpoint exponent 1 is treated by [`conjugate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugateMode {
    /// `p = 1` is a domain error.
    Strict,
    /// `p = 1` maps to `infinity`.
    ExtendedInfinity,
}

/// Pointwise `p* = p / (p - 1)`, with `infinity -> 1`.
pub fn conjugate(p: &ExponentField) -> Result<ExponentField> {
    conjugate_with(p, ConjugateMode::Strict)
}

pub fn conjugate_with(p: &ExponentField, mode: ConjugateMode) -> Result<ExponentField> {
    let samples = p
        .samples
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            if p.infinite[k] {
                Ok(1.0)
            } else if q == 1.0 {
                match mode {
                    ConjugateMode::Strict => Err(Error::Domain(format!(
                        "exponent equal to 1 at node {k} has no finite conjugate"
                    ))),
                    ConjugateMode::ExtendedInfinity => Ok(f64::INFINITY),
                }
            } else {
                Ok(q / (q - 1.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ExponentField::new(samples)
}

/// Scalar conjugate exponent.
pub fn conjugate_scalar(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Outcome of a two-sided inequality check `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs + CHECK_RTOL * rhs.abs().max(1e-300);
        Self { lhs, rhs, holds }
    }
}

/// Hoelder inequality with constant 2:
/// `int |u v| <= 2 ||u||_{p} ||v||_{p*}`.
pub fn holder_pairing_check(
    u: &impl Sampled,
    v: &impl Sampled,
    p: &ExponentField,
) -> Result<InequalityReport> {
    if u.values().len() != v.values().len() {
        return Err(Error::Structural("u and v have different sample counts".into()));
    }
    let q = conjugate(p)?;
    let lhs: f64 = u
        .values()
        .iter()
        .zip(v.values())
        .zip(u.weights())
        .map(|((&a, &b), &w)| w * (a * b).abs())
        .sum();
    let rhs = 2.0 * luxemburg_norm(u, p)? * luxemburg_norm(v, &q)?;
    Ok(InequalityReport::new(lhs, rhs))
}

/// `min(|u|^{p-}, |u|^{p+}) <= sigma_p(u) <= max(|u|^{p-}, |u|^{p+})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub lower: f64,
    pub modular: f64,
    pub upper: f64,
    pub norm: f64,
    pub holds: bool,
}

pub fn norm_modular_sandwich_check(u: &impl Sampled, p: &ExponentField) -> Result<SandwichReport> {
    let modular = modular(u, p)?;
    let norm = luxemburg_norm(u, p)?;
    let a = norm.powf(p.lower);
    let b = norm.powf(p.upper);
    let lower = a.min(b);
    let upper = a.max(b);
    let slack = CHECK_RTOL * upper.max(modular);
    let holds = lower <= modular + slack && modular <= upper + slack;
    Ok(SandwichReport { lower, modular, upper, norm, holds })
}

/// Modular witness of the inclusion `L^{p1} in L^{p2}` for `p2 <= p1`:
/// `sigma_{p2}(u) <= sigma_{p1}(u) + |Q|`, from `|u|^{p2} <= |u|^{p1} + 1`.
pub fn inclusion_modular_check(
    u: &impl Sampled,
    p1: &ExponentField,
    p2: &ExponentField,
) -> Result<InequalityReport> {
    check_len(u, p1)?;
    check_len(u, p2)?;
    for k in 0..p1.len() {
        if p2.samples[k] > p1.samples[k] {
            return Err(Error::Precondition(format!(
                "p2 = {} exceeds p1 = {} at node {k}",
                p2.samples[k], p1.samples[k]
            )));
        }
    }
    let lhs = modular(u, p2)?;
    let rhs = modular(u, p1)? + u.total_measure();
    Ok(InequalityReport::new(lhs, rhs))
}

/// `beta = p0 alpha* / (p0 - alpha)` where `alpha < p0 - eta`, infinite elsewhere.
pub fn beta_exponent(alpha: &ExponentField, p0: f64, eta: f64) -> Result<ExponentField> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0,1), got {eta}")));
    }
    check_growth_exponent(alpha, p0)?;
    let samples = alpha
        .samples
        .iter()
        .map(|&a| {
            if a < p0 - eta {
                p0 * conjugate_scalar(a) / (p0 - a)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    ExponentField::new(samples)
}

/// `beta_1 = p0 alpha* / (p0 - alpha)`, finite everywhere when `alpha+ < p0`.
pub fn beta1_exponent(alpha: &ExponentField, p0: f64) -> Result<ExponentField> {
    check_growth_exponent(alpha, p0)?;
    if alpha.upper >= p0 {
        return Err(Error::Domain(format!(
            "beta_1 needs alpha+ < p0, got alpha+ = {} and p0 = {p0}",
            alpha.upper
        )));
    }
    let samples = alpha
        .samples
        .iter()
        .map(|&a| p0 * conjugate_scalar(a) / (p0 - a))
        .collect();
    ExponentField::new(samples)
}

fn check_growth_exponent(alpha: &ExponentField, p0: f64) -> Result<()> {
    if p0 < 2.0 {
        return Err(Error::Domain(format!("p0 must be at least 2, got {p0}")));
    }
    if alpha.has_infinite() || !(alpha.lower > 1.0) {
        return Err(Error::Domain(format!(
            "growth exponent needs 1 < alpha- <= alpha+ < infinity, got [{}, {}]",
            alpha.lower, alpha.upper
        )));
    }
    Ok(())
}

/// `q0 = p0'`, the critical exponent `p~0 = n p0 / (n - q0)` and its conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExponents {
    pub q0: f64,
    pub p_tilde: f64,
    pub p_tilde_conj: f64,
}

pub fn critical_exponent(n: usize, p0: f64) -> Result<CriticalExponents> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension n must be at least 3, got {n}")));
    }
    if p0 < 2.0 {
        return Err(Error::Domain(format!("p0 must be at least 2, got {p0}")));
    }
    let q0 = p0 / (p0 - 1.0);
    let nf = n as f64;
    if nf <= q0 {
        return Err(Error::Domain(format!("need n > q0, got n = {n}, q0 = {q0}")));
    }
    let p_tilde = nf * p0 / (nf - q0);
    Ok(CriticalExponents {
        q0,
        p_tilde,
        p_tilde_conj: p_tilde / (p_tilde - 1.0),
    })
}

/// `( int_0^T ||g(t)||_{L^{r_space}}^{r_time} dt )^{1/r_time}`, with the
/// supremum over time levels when `r_time` is infinite.
pub fn mixed_norm(g: &SpaceTimeField, r_time: f64, r_space: f64) -> Result<f64> {
    if !(r_space >= 1.0) {
        return Err(Error::Domain(format!("spatial exponent must be >= 1, got {r_space}")));
    }
    if !(r_time >= 1.0) {
        return Err(Error::Domain(format!("time exponent must be >= 1, got {r_time}")));
    }
    let spatial: Vec<f64> = g.slices().map(|s| s.lp_norm(r_space)).collect();
    if spatial.iter().any(|v| v.is_nan()) {
        return Err(Error::NumericDomain("NaN in spatial norm".into()));
    }
    if r_time.is_infinite() {
        return Ok(spatial.iter().fold(0.0_f64, |m, &v| m.max(v)));
    }
    let tw = g.time_weights();
    let integral: f64 = spatial
        .iter()
        .zip(&tw)
        .map(|(&n, &w)| w * abs_pow(n, r_time))
        .sum();
    Ok(integral.powf(1.0 / r_time))
}
