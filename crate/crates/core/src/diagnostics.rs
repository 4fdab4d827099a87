//! Energy, coercivity and decay monitors evaluated on computed trajectories.
//!
//! All spatial integrals use the nodal dual-cell rule; gradient terms are
//! summed over mesh edges with the same face coefficient the solver uses, so
//! that the discrete energy relation closes up to the backward-Euler defect
//! `-||u^n - u^{n-1}||^2 / (2 dt)`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent_spaces::{critical_exponent, luxemburg_norm, modular, ExponentField};
use crate::mesh::{GridFunction, Mesh, Sampled};
use crate::model::{nonlocal_factor, validate_theorem41, ProblemSpec};
use crate::numfmt::float;
use crate::pn_spaces::{bochner_pseudonorm, pn_pseudonorm, PnIndex};
use crate::solver::{conductance, face_coefficient, Scheme, SolutionTrajectory};

/// Relative tolerance of the pointwise-algebra checks.
pub const COERCIVITY_RTOL: f64 = 1e-8;

/// The integrals making up `<f(u), u>` at one time level, plus the source pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingTerms {
    pub t: f64,
    /// `sum_e |e| kappa_e (D_e u)^2`, `kappa_e` the face mean of `|u|^{p0-2}`.
    pub diffusion_energy: f64,
    /// `int a(x,t,u) u`
    pub absorption_pairing: f64,
    /// `||u||_p^s int g u`
    pub nonlocal_pairing: f64,
    /// `int h u` (not part of `<f(u), u>`).
    pub source_pairing: f64,
}

impl PairingTerms {
    /// `<f(u), u>` without the source.
    pub fn total(&self) -> f64 {
        self.diffusion_energy + self.absorption_pairing + self.nonlocal_pairing
    }
}

fn diffusion_energy(u: &GridFunction, p0: f64, delta: f64) -> f64 {
    let v = u.values();
    u.mesh()
        .edges()
        .iter()
        .map(|e| {
            let d = v[e.head] - v[e.tail];
            conductance(e) * face_coefficient(v[e.tail], v[e.head], p0, delta) * d * d
        })
        .sum()
}

/// `(4/p0^2) sum_e |e| (D_e |u|^{p0/2})^2`.
pub fn sobolev_form(u: &GridFunction, p0: f64) -> f64 {
    let mu = 0.5 * p0;
    let w: Vec<f64> = u.values().iter().map(|x| x.abs().powf(mu)).collect();
    let sum: f64 = u
        .mesh()
        .edges()
        .iter()
        .map(|e| {
            let d = w[e.head] - w[e.tail];
            conductance(e) * d * d
        })
        .sum();
    4.0 / (p0 * p0) * sum
}

pub fn pairing_terms(u: &GridFunction, t: f64, spec: &ProblemSpec) -> Result<PairingTerms> {
    pairing_terms_with(u, t, spec, 0.0)
}

/// [`pairing_terms`] with a degeneracy floor in the face coefficient.
pub fn pairing_terms_with(u: &GridFunction, t: f64, spec: &ProblemSpec, delta: f64) -> Result<PairingTerms> {
    let mesh = u.mesh();
    let vol = mesh.volumes();
    let v = u.values();
    let factor = nonlocal_factor(u, spec.p, spec.s);
    let (mut absorb, mut gu, mut hu) = (0.0, 0.0, 0.0);
    for k in 0..mesh.node_count() {
        if v[k] == 0.0 {
            continue;
        }
        let x = mesh.coords(k);
        absorb += vol[k] * spec.eval_nonlinearity(&x, t, v[k])? * v[k];
        gu += vol[k] * spec.g.eval(&x, t) * v[k];
        hu += vol[k] * spec.h.eval(&x, t) * v[k];
    }
    Ok(PairingTerms {
        t,
        diffusion_energy: diffusion_energy(u, spec.p0, delta),
        absorption_pairing: absorb,
        nonlocal_pairing: factor * gu,
        source_pairing: hu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub levels: usize,
    pub violations: usize,
    pub worst_level: usize,
    pub worst_t: f64,
    pub worst_margin: f64,
    pub worst_relative_margin: f64,
    pub passed: bool,
}

/// Checks, level by level,
///
/// ```text
/// <f(u),u> >= D(u) + int a2 |u|^alpha - int a3 - int |g| ||u||_p^s |u|
/// ```
///
/// which follows from the pointwise coercivity bound on `a`.
pub fn coercivity_check_33(traj: &SolutionTrajectory, spec: &ProblemSpec) -> Result<CoercivityReport> {
    let mesh = traj.mesh();
    let vol = mesh.volumes();
    let coords: Vec<Vec<f64>> = (0..mesh.node_count()).map(|k| mesh.coords(k)).collect();
    let mut report = CoercivityReport {
        levels: traj.levels(),
        violations: 0,
        worst_level: 0,
        worst_t: 0.0,
        worst_margin: f64::INFINITY,
        worst_relative_margin: f64::INFINITY,
        passed: true,
    };
    let mut worst_informative = false;
    for (n, (u, &t)) in traj.slices().iter().zip(traj.times()).enumerate() {
        let terms = pairing_terms(u, t, spec)?;
        let factor = nonlocal_factor(u, spec.p, spec.s);
        let (mut lower, mut offset, mut nonlocal) = (0.0, 0.0, 0.0);
        for (k, &x) in u.values().iter().enumerate() {
            let c = spec.coefficients_at(&coords[k], t);
            if x != 0.0 {
                lower += vol[k] * c.a2 * x.abs().powf(c.alpha);
                nonlocal += vol[k] * spec.g.eval(&coords[k], t).abs() * factor * x.abs();
            }
            offset += vol[k] * c.a3;
        }
        let lhs = terms.total();
        let rhs = terms.diffusion_energy + lower - offset - nonlocal;
        let margin = lhs - rhs;
        let scale = terms.diffusion_energy
            + terms.absorption_pairing.abs()
            + terms.nonlocal_pairing.abs()
            + lower
            + offset
            + nonlocal;
        let rel = if scale > 0.0 { margin / scale } else { 0.0 };
        if rel < -COERCIVITY_RTOL {
            report.violations += 1;
        }
        // levels with nothing to compare only count when no other level exists
        let informative = scale > 0.0;
        if (informative, -rel) > (worst_informative, -report.worst_relative_margin) {
            worst_informative = informative;
            report.worst_level = n;
            report.worst_t = t;
            report.worst_margin = margin;
            report.worst_relative_margin = rel;
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivitySummary {
    /// `[u]_{L^{p0}(0,T; S_{1,(p0-2)q0,q0})}`
    pub bochner_pseudonorm: f64,
    /// `sigma_alpha(u)` over the cylinder.
    pub alpha_modular: f64,
    /// `||u||_{L^alpha(Q_T)}`
    pub alpha_norm: f64,
    /// `int_0^T ||g||_{L^{p~0*}} [u]^{s+1} dt`
    pub g_weighted_term: f64,
    /// `int_0^T <f(u), u> dt`
    pub pairing_integral: f64,
    /// `pairing / ([u]^{p0} + ||u||_alpha^{alpha-})`; `None` for a zero trajectory.
    pub ratio: Option<f64>,
    pub threshold: f64,
    /// Positivity of the ratio is asserted only above the threshold.
    pub asserted: bool,
    pub passed: bool,
}

/// Empirical coercivity ratio over the whole trajectory.
pub fn coercivity_summary_35(
    traj: &SolutionTrajectory,
    spec: &ProblemSpec,
    threshold: f64,
) -> Result<CoercivitySummary> {
    let mesh = traj.mesh();
    let field = traj.to_space_time()?;
    let idx = PnIndex::for_diffusion(spec.p0)?;
    let bochner = if field.levels() >= 2 {
        bochner_pseudonorm(&field, spec.p0, idx)?
    } else {
        0.0
    };
    let alpha_samples: Vec<f64> = traj
        .times()
        .iter()
        .flat_map(|&t| spec.alpha.sample(mesh, t).into_values())
        .collect();
    let alpha = ExponentField::new(alpha_samples)?;
    let alpha_modular = modular(&field, &alpha)?;
    let alpha_norm = luxemburg_norm(&field, &alpha)?;
    let p_conj = critical_exponent(spec.n, spec.p0)?.p_tilde_conj;

    let tw = field.time_weights();
    let (mut g_term, mut pairing) = (0.0, 0.0);
    for ((u, &t), &w) in traj.slices().iter().zip(traj.times()).zip(&tw) {
        let g = spec.g.sample(mesh, t).lp_norm(p_conj);
        g_term += w * g * pn_pseudonorm(u, idx).powf(spec.s + 1.0);
        pairing += w * pairing_terms(u, t, spec)?.total();
    }
    let denom = bochner.powf(spec.p0) + alpha_norm.powf(alpha.lower_bound());
    let ratio = (denom > 0.0).then(|| pairing / denom);
    let asserted = bochner >= threshold && ratio.is_some();
    let passed = !asserted || ratio.is_some_and(|r| r > 0.0);
    Ok(CoercivitySummary {
        bochner_pseudonorm: bochner,
        alpha_modular,
        alpha_norm,
        g_weighted_term: g_term,
        pairing_integral: pairing,
        ratio,
        threshold,
        asserted,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevIdentityReport {
    pub diffusion_energy: f64,
    pub sobolev_form: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

/// Compares `sum int |u|^{p0-2} (D_i u)^2` with `(4/p0^2) sum int (D_i |u|^{p0/2})^2`.
pub fn sobolev_identity_check(u: &GridFunction, p0: f64) -> SobolevIdentityReport {
    let d = diffusion_energy(u, p0, 0.0);
    let s = sobolev_form(u, p0);
    let gap = (d - s).abs();
    let scale = d.abs().max(s.abs());
    SobolevIdentityReport {
        diffusion_energy: d,
        sobolev_form: s,
        gap,
        relative_gap: if scale > 0.0 { gap / scale } else { 0.0 },
    }
}

/// Terms of the discrete energy relation on one step `n-1 -> n`, evaluated
/// with the arguments the scheme used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationStep {
    pub t: f64,
    /// `(y_n - y_{n-1}) / (2 dt)`
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    /// `-int h u^n`
    pub t5: f64,
    pub residual: f64,
    pub scale: f64,
}

/// Per-step relation `T1 + T2 + T3 + T4 + T5`. For an exactly solved
/// backward-Euler step it equals `-||u^n - u^{n-1}||^2 / (2 dt)`.
pub fn relation_terms(traj: &SolutionTrajectory, spec: &ProblemSpec) -> Result<Vec<RelationStep>> {
    let mesh = traj.mesh();
    let vol = mesh.volumes();
    let edges = mesh.edges();
    let coords: Vec<Vec<f64>> = (0..mesh.node_count()).map(|k| mesh.coords(k)).collect();
    let delta = traj.degeneracy_floor();
    let lagged = traj.scheme() == Scheme::ImexLagged;
    let mut out = Vec::with_capacity(traj.levels().saturating_sub(1));
    for n in 1..traj.levels() {
        let (t0, t) = (traj.times()[n - 1], traj.times()[n]);
        let dt = t - t0;
        let (old, new) = (traj.slice(n - 1), traj.slice(n));
        let (uo, un) = (old.values(), new.values());
        let y0 = old.integrate(|x| x * x);
        let y1 = new.integrate(|x| x * x);
        let coef = if lagged { uo } else { un };
        let t2: f64 = edges
            .iter()
            .map(|e| {
                let d = un[e.head] - un[e.tail];
                conductance(e) * face_coefficient(coef[e.tail], coef[e.head], spec.p0, delta) * d * d
            })
            .sum();
        let (factor, t_g) = if lagged {
            (nonlocal_factor(old, spec.p, spec.s), t0)
        } else {
            (nonlocal_factor(new, spec.p, spec.s), t)
        };
        let (mut t3, mut t4, mut t5) = (0.0, 0.0, 0.0);
        for k in 0..un.len() {
            if mesh.is_boundary(k) || un[k] == 0.0 {
                continue;
            }
            let x = &coords[k];
            t3 += vol[k] * spec.eval_nonlinearity(x, t, coef[k])? * un[k];
            t4 += vol[k] * spec.g.eval(x, t_g) * factor * un[k];
            t5 -= vol[k] * spec.h.eval(x, t) * un[k];
        }
        let t1 = 0.5 * (y1 - y0) / dt;
        out.push(RelationStep {
            t,
            t1,
            t2,
            t3,
            t4,
            t5,
            residual: t1 + t2 + t3 + t4 + t5,
            scale: t1.abs() + t2.abs() + t3.abs() + t4.abs() + t5.abs(),
        });
    }
    Ok(out)
}

/// Smallest eigenvalue of the discrete Dirichlet Laplacian on the mesh.
pub fn discrete_dirichlet_eigenvalue(mesh: &Mesh) -> f64 {
    mesh.spacing()
        .iter()
        .zip(mesh.extents())
        .map(|(&h, &l)| 2.0 * (1.0 - (std::f64::consts::PI * h / l).cos()) / (h * h))
        .sum()
}

/// Smallest `c(eps)` with `y^{(s+1)/2} <= eps y^mu + c(eps) y` for all `y >= 0`,
/// `mu = p0/2`. `None` when `(s+1)/2 >= mu` (no such constant).
pub fn young_constant(eps: f64, s: f64, p0: f64) -> Option<f64> {
    let mu = 0.5 * p0;
    if !(mu > 1.0) || !(eps > 0.0) {
        return None;
    }
    let theta = (0.5 * (s + 1.0) - 1.0) / (mu - 1.0);
    if !(0.0..1.0).contains(&theta) {
        return None;
    }
    if theta == 0.0 {
        return Some(1.0);
    }
    Some((1.0 - theta) * (theta / eps).powf(theta / (1.0 - theta)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    /// Relative tolerance on the one-sided relation check.
    pub relation_tol: f64,
    /// Embedding constant `c`; default `1 / lambda_min` of the mesh.
    pub embedding_constant: Option<f64>,
    /// Young parameter; default half the admissibility threshold.
    pub epsilon: Option<f64>,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            relation_tol: 1e-8,
            embedding_constant: None,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// Reason the check was not run; all other fields are defaults then.
    pub skipped: Option<String>,
    /// (a) `T1+T2+T3+T4 <= tol * scale` at every step.
    pub relation_holds: bool,
    pub max_relation_residual: f64,
    pub worst_relation_t: f64,
    /// (b) zero data stays zero: `max_t y <= 1e-20`.
    pub zero_data: bool,
    pub zero_stays_zero: Option<bool>,
    pub max_y: f64,
    pub k: f64,
    pub embedding_constant: f64,
    pub epsilon: Option<f64>,
    pub epsilon_threshold: f64,
    pub young_constant: Option<f64>,
    /// (c) `y(t) <= y(0) exp(2 K c(eps) t)` with nonzero initial data.
    pub gronwall_holds: Option<bool>,
    pub worst_gronwall_ratio: Option<f64>,
    /// Bound at each level (empty when not computed).
    #[serde(skip_serializing)]
    pub gronwall_bound: Vec<f64>,
    pub passed: bool,
}

impl DecayReport {
    fn skipped(reason: String) -> Self {
        Self {
            skipped: Some(reason),
            relation_holds: false,
            max_relation_residual: f64::NAN,
            worst_relation_t: f64::NAN,
            zero_data: false,
            zero_stays_zero: None,
            max_y: f64::NAN,
            k: f64::NAN,
            embedding_constant: f64::NAN,
            epsilon: None,
            epsilon_threshold: f64::NAN,
            young_constant: None,
            gronwall_holds: None,
            worst_gronwall_ratio: None,
            gronwall_bound: Vec::new(),
            passed: false,
        }
    }
}

/// Decay checks for the homogeneous problem (`h = 0`, `p = 2`, `p0 > 2`, `a3 = 0`).
pub fn homogeneous_decay_check(
    traj: &SolutionTrajectory,
    spec: &ProblemSpec,
    opts: &DecayOptions,
) -> Result<DecayReport> {
    let mut on_mesh = spec.clone();
    on_mesh.mesh = traj.mesh().clone();
    let pre = validate_theorem41(&on_mesh)?;
    if !pre.passed {
        return Ok(DecayReport::skipped(format!("trivial-solution hypotheses fail: {pre:?}")));
    }
    let mesh = traj.mesh();
    let ys: Vec<f64> = traj.slices().iter().map(|u| u.integrate(|x| x * x)).collect();

    let rel = relation_terms(traj, spec)?;
    let mut relation_holds = true;
    let (mut max_r, mut worst_t) = (0.0_f64, 0.0);
    for step in &rel {
        if step.residual > opts.relation_tol * step.scale {
            relation_holds = false;
        }
        if step.residual.abs() > max_r {
            max_r = step.residual.abs();
            worst_t = step.t;
        }
    }

    let y0 = ys[0];
    let max_y = ys.iter().fold(0.0_f64, |m, &y| m.max(y));
    let zero_data = y0 == 0.0;
    let zero_stays_zero = zero_data.then_some(max_y <= 1e-20);

    let k = pre.k;
    let c_embed = opts
        .embedding_constant
        .unwrap_or_else(|| 1.0 / discrete_dirichlet_eigenvalue(mesh));
    let threshold = 4.0 / (k * spec.p0 * spec.p0 * c_embed * mesh.measure().powf(0.5 * (spec.p0 - 2.0)));
    let epsilon = opts.epsilon.or((k > 0.0).then_some(0.5 * threshold));
    if let Some(eps) = epsilon {
        if !(eps < threshold) {
            return Err(Error::Precondition(format!(
                "epsilon = {eps} must lie below the threshold {threshold}"
            )));
        }
    }
    // with K = 0 the nonlocal term vanishes and the bound is y(0)
    let c_eps = match epsilon {
        Some(eps) => young_constant(eps, spec.s, spec.p0),
        None => Some(0.0),
    };
    let (gronwall_holds, worst_ratio, bound) = match (zero_data, c_eps) {
        (false, Some(c)) => {
            let bound: Vec<f64> = traj
                .times()
                .iter()
                .map(|&t| y0 * (2.0 * k * c * t).exp())
                .collect();
            let worst = ys
                .iter()
                .zip(&bound)
                .map(|(y, b)| y / b)
                .fold(0.0_f64, f64::max);
            let holds = ys.iter().zip(&bound).all(|(y, b)| *y <= b * (1.0 + 1e-12));
            (Some(holds), Some(worst), bound)
        }
        _ => (None, None, Vec::new()),
    };
    let passed = relation_holds && zero_stays_zero.unwrap_or(true) && gronwall_holds.unwrap_or(true);
    Ok(DecayReport {
        skipped: None,
        relation_holds,
        max_relation_residual: max_r,
        worst_relation_t: worst_t,
        zero_data,
        zero_stays_zero,
        max_y,
        k,
        embedding_constant: c_embed,
        epsilon,
        epsilon_threshold: threshold,
        young_constant: if epsilon.is_some() { c_eps } else { None },
        gronwall_holds,
        worst_gronwall_ratio: worst_ratio,
        gronwall_bound: bound,
        passed,
    })
}

/// One row of the per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub y: f64,
    pub diffusion_energy: f64,
    pub sobolev_form: f64,
    pub absorption_pairing: f64,
    pub alpha_modular: f64,
    pub nonlocal_pairing: f64,
    /// Relation residual of the step ending here (`None` at level 0).
    pub relation_residual: Option<f64>,
}

/// Per-level energies of a trajectory.
pub fn energy_report(traj: &SolutionTrajectory, spec: &ProblemSpec) -> Result<Vec<EnergyRow>> {
    let rel = relation_terms(traj, spec)?;
    let mesh = traj.mesh();
    traj.slices()
        .iter()
        .zip(traj.times())
        .enumerate()
        .map(|(n, (u, &t))| {
            let terms = pairing_terms(u, t, spec)?;
            let alpha = ExponentField::new(spec.alpha.sample(mesh, t).into_values())?;
            Ok(EnergyRow {
                t,
                y: u.integrate(|x| x * x),
                diffusion_energy: terms.diffusion_energy,
                sobolev_form: sobolev_form(u, spec.p0),
                absorption_pairing: terms.absorption_pairing,
                alpha_modular: modular(u, &alpha)?,
                nonlocal_pairing: terms.nonlocal_pairing,
                relation_residual: n.checked_sub(1).map(|m| rel[m].residual),
            })
        })
        .collect()
}

/// Summary CSV: `t, y, diffusion_energy, sobolev_form, absorption_pairing,
/// nonlocal_pairing, relation_residual, gronwall_bound`, then `l2_error` when
/// errors are supplied, then `complete`. Missing values are empty cells.
pub fn write_summary_csv<W: Write>(
    out: W,
    rows: &[EnergyRow],
    gronwall: &[f64],
    l2_error: Option<&[f64]>,
    complete: bool,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec![
        "t",
        "y",
        "diffusion_energy",
        "sobolev_form",
        "absorption_pairing",
        "nonlocal_pairing",
        "relation_residual",
        "gronwall_bound",
    ];
    if l2_error.is_some() {
        header.push("l2_error");
    }
    header.push("complete");
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    for (n, r) in rows.iter().enumerate() {
        let mut rec = vec![
            float(r.t),
            float(r.y),
            float(r.diffusion_energy),
            float(r.sobolev_form),
            float(r.absorption_pairing),
            float(r.nonlocal_pairing),
            opt(r.relation_residual),
            opt(gronwall.get(n).copied()),
        ];
        if let Some(errs) = l2_error {
            rec.push(opt(errs.get(n).copied()));
        }
        rec.push(complete.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
