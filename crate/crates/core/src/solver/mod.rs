//! Backward-Euler time stepping for the nonlocal degenerate problem on 1-D and
//! 2-D boxes with zero Dirichlet data.
//!
//! Two schemes are available. `imex_lagged` freezes the diffusion
//! coefficient, the absorption and the nonlocal factor at the old level and
//! needs one SPD solve per step. `implicit_newton` treats everything at the
//! new level and runs a damped Newton iteration with a dense Jacobian.

mod assembly;
mod linalg;

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use assembly::{assemble_diffusion_divergence, assemble_diffusion_transformed};
pub(crate) use assembly::{conductance, degeneracy, face_coefficient};

use crate::error::{Error, Result};
use crate::mesh::{Edge, GridFunction, Mesh, Sampled, SpaceTimeField};
use crate::model::{nonlocal_factor, LocalCoefficients, ProblemSpec};
use crate::numfmt::float;
use linalg::{conjugate_gradient, SymmetricSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImexLagged,
    ImplicitNewton,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ImexLagged => "imex_lagged",
            Scheme::ImplicitNewton => "implicit_newton",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// `delta` added to `|u|^{p0-2}` in the face coefficients.
    pub degeneracy_floor: f64,
    /// Newton stops once the max nodal residual drops below this.
    pub nonlinear_tol: f64,
    pub max_nonlinear_iterations: usize,
    /// Relative residual target of the conjugate-gradient solves.
    pub linear_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            scheme: Scheme::ImexLagged,
            degeneracy_floor: 0.0,
            nonlinear_tol: 1e-10,
            max_nonlinear_iterations: 50,
            linear_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.degeneracy_floor >= 0.0) {
            return Err(Error::Domain(format!(
                "degeneracy floor must be >= 0, got {}",
                self.degeneracy_floor
            )));
        }
        if !(self.nonlinear_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::Domain("solver tolerances must be positive".into()));
        }
        if self.max_nonlinear_iterations == 0 {
            return Err(Error::Domain("max_nonlinear_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// Time of the new level.
    pub t: f64,
    pub nonlinear_iterations: usize,
    pub linear_iterations: usize,
    /// Newton: max nodal residual. Imex: relative CG residual.
    pub residual: f64,
    /// `||u||_{L^2}^2` at the new level.
    pub l2_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Complete,
    /// A step failed; slices up to `last_level` are kept.
    Aborted { last_level: usize, reason: String, residual: f64 },
}

/// Computed levels `u^0, ..., u^N` with per-step statistics.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    mesh: Arc<Mesh>,
    times: Vec<f64>,
    slices: Vec<GridFunction>,
    records: Vec<StepRecord>,
    status: TrajectoryStatus,
    scheme: Scheme,
    degeneracy_floor: f64,
}

impl SolutionTrajectory {
    /// Spatial mesh with the trajectory's own time axis.
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Times of the computed levels (shorter than the grid when aborted).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[GridFunction] {
        &self.slices
    }

    pub fn slice(&self, level: usize) -> &GridFunction {
        &self.slices[level]
    }

    pub fn levels(&self) -> usize {
        self.slices.len()
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn status(&self) -> &TrajectoryStatus {
        &self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Complete
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn degeneracy_floor(&self) -> f64 {
        self.degeneracy_floor
    }

    pub fn dt(&self) -> f64 {
        self.mesh.dt()
    }

    pub fn to_space_time(&self) -> Result<SpaceTimeField> {
        SpaceTimeField::from_slices(
            self.mesh.clone(),
            self.times.clone(),
            self.slices.iter().map(|s| s.values().to_vec()).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0, |m, s| m.max(s.max_abs()))
    }

    /// Long-form CSV `t,node,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["t", "node", "value"])?;
        for (t, s) in self.times.iter().zip(&self.slices) {
            for (k, v) in s.values().iter().enumerate() {
                w.write_record([float(*t), k.to_string(), float(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Mesh-dependent data reused across steps.
struct Stepper<'a> {
    spec: &'a ProblemSpec,
    cfg: &'a SolverConfig,
    mesh: Arc<Mesh>,
    coords: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    /// node -> unknown index (interior nodes only)
    unknown: Vec<Option<usize>>,
    interior: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct StepStats {
    nonlinear_iterations: usize,
    linear_iterations: usize,
    residual: f64,
}

impl<'a> Stepper<'a> {
    fn new(mesh: Arc<Mesh>, spec: &'a ProblemSpec, cfg: &'a SolverConfig) -> Self {
        let coords = (0..mesh.node_count()).map(|k| mesh.coords(k)).collect();
        let interior = mesh.interior_nodes();
        let mut unknown = vec![None; mesh.node_count()];
        for (i, &k) in interior.iter().enumerate() {
            unknown[k] = Some(i);
        }
        Self {
            spec,
            cfg,
            edges: mesh.edges(),
            mesh,
            coords,
            unknown,
            interior,
        }
    }

    fn coefficients(&self, t: f64) -> Vec<LocalCoefficients> {
        self.coords.iter().map(|x| self.spec.coefficients_at(x, t)).collect()
    }

    fn absorption(&self, c: &[LocalCoefficients], t: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.interior
            .iter()
            .map(|&k| self.spec.nonlinearity.eval(&self.coords[k], t, &c[k], v[k]))
            .collect()
    }

    fn step(&self, state: &GridFunction, t: f64) -> Result<(GridFunction, StepStats)> {
        match self.cfg.scheme {
            Scheme::ImexLagged => self.imex(state, t),
            Scheme::ImplicitNewton => self.newton(state, t),
        }
    }

    fn imex(&self, state: &GridFunction, t: f64) -> Result<(GridFunction, StepStats)> {
        let (spec, cfg) = (self.spec, self.cfg);
        let dt = cfg.dt;
        let t_new = t + dt;
        let u = state.values();
        let vol = self.mesh.volumes();
        let n = self.interior.len();

        let mut sys = SymmetricSystem::new(n);
        for (i, &k) in self.interior.iter().enumerate() {
            sys.diag[i] = vol[k] / dt;
        }
        for e in &self.edges {
            let w = conductance(e) * face_coefficient(u[e.tail], u[e.head], spec.p0, cfg.degeneracy_floor);
            let (a, b) = (self.unknown[e.tail], self.unknown[e.head]);
            if let Some(i) = a {
                sys.diag[i] += w;
            }
            if let Some(j) = b {
                sys.diag[j] += w;
            }
            if let (Some(i), Some(j)) = (a, b) {
                sys.off.push((i, j, -w));
            }
        }

        let c = self.coefficients(t_new);
        let absorb = self.absorption(&c, t_new, u)?;
        let factor = nonlocal_factor(state, spec.p, spec.s);
        let mut rhs = vec![0.0; n];
        for (i, &k) in self.interior.iter().enumerate() {
            let x = &self.coords[k];
            let g = spec.g.eval(x, t);
            let h = spec.h.eval(x, t_new);
            rhs[i] = vol[k] * (u[k] / dt - absorb[i] - g * factor + h);
        }
        let mut x: Vec<f64> = self.interior.iter().map(|&k| u[k]).collect();
        let out = conjugate_gradient(&sys, &rhs, &mut x, cfg.linear_tol)?;
        let next = self.scatter(&x);
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver {
                reason: "non-finite values after linear solve".into(),
                residual: f64::INFINITY,
            });
        }
        Ok((
            next,
            StepStats {
                nonlinear_iterations: 1,
                linear_iterations: out.iterations,
                residual: out.residual,
            },
        ))
    }

    fn scatter(&self, x: &[f64]) -> GridFunction {
        let mut values = vec![0.0; self.mesh.node_count()];
        for (i, &k) in self.interior.iter().enumerate() {
            values[k] = x[i];
        }
        GridFunction::new(self.mesh.clone(), values).expect("node count")
    }

    /// Nodal residual `R_i / V_i` of the fully implicit relation.
    fn newton_residual(
        &self,
        v: &GridFunction,
        old: &[f64],
        c: &[LocalCoefficients],
        g: &[f64],
        h: &[f64],
        t_new: f64,
    ) -> Result<Vec<f64>> {
        let (spec, cfg) = (self.spec, self.cfg);
        let vals = v.values();
        let vol = self.mesh.volumes();
        let absorb = self.absorption(c, t_new, vals)?;
        let factor = nonlocal_factor(v, spec.p, spec.s);
        let mut r = vec![0.0; self.interior.len()];
        for (i, &k) in self.interior.iter().enumerate() {
            r[i] = vol[k] * ((vals[k] - old[k]) / cfg.dt + absorb[i] + g[k] * factor - h[k]);
        }
        for e in &self.edges {
            let flux = conductance(e)
                * face_coefficient(vals[e.tail], vals[e.head], spec.p0, cfg.degeneracy_floor)
                * (vals[e.tail] - vals[e.head]);
            if let Some(i) = self.unknown[e.tail] {
                r[i] += flux;
            }
            if let Some(j) = self.unknown[e.head] {
                r[j] -= flux;
            }
        }
        for (i, &k) in self.interior.iter().enumerate() {
            r[i] /= vol[k];
        }
        Ok(r)
    }

    fn newton_jacobian(
        &self,
        v: &GridFunction,
        c: &[LocalCoefficients],
        g: &[f64],
        t_new: f64,
    ) -> Result<DMatrix<f64>> {
        let (spec, cfg) = (self.spec, self.cfg);
        let vals = v.values();
        let vol = self.mesh.volumes();
        let n = self.interior.len();
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for (i, &k) in self.interior.iter().enumerate() {
            let slope = spec.nonlinearity.derivative(&self.coords[k], t_new, &c[k], vals[k])?;
            jac[(i, i)] = vol[k] * (1.0 / cfg.dt + slope);
        }
        for e in &self.edges {
            let ce = conductance(e);
            let (ui, uj) = (vals[e.tail], vals[e.head]);
            let w = ce * face_coefficient(ui, uj, spec.p0, cfg.degeneracy_floor);
            let diff = ui - uj;
            // d flux / d u_tail and d flux / d u_head
            let d_tail = w + ce * 0.5 * assembly::degeneracy_slope(ui, spec.p0) * diff;
            let d_head = -w + ce * 0.5 * assembly::degeneracy_slope(uj, spec.p0) * diff;
            let (a, b) = (self.unknown[e.tail], self.unknown[e.head]);
            if let Some(i) = a {
                jac[(i, i)] += d_tail;
                if let Some(j) = b {
                    jac[(i, j)] += d_head;
                }
            }
            if let Some(j) = b {
                jac[(j, j)] -= d_head;
                if let Some(i) = a {
                    jac[(j, i)] -= d_tail;
                }
            }
        }
        // rank-one derivative of g ||v||_p^s
        let norm = v.lp_norm(spec.p);
        if norm > 0.0 && g.iter().any(|&x| x != 0.0) {
            let scale = spec.s * norm.powf(spec.s - spec.p);
            let grad: Vec<f64> = self
                .interior
                .iter()
                .map(|&k| {
                    let x = vals[k];
                    scale * vol[k] * x.abs().powf(spec.p - 1.0) * x.signum()
                })
                .collect();
            for (i, &k) in self.interior.iter().enumerate() {
                let gi = vol[k] * g[k];
                if gi != 0.0 {
                    for (j, dj) in grad.iter().enumerate() {
                        jac[(i, j)] += gi * dj;
                    }
                }
            }
        }
        // rows were assembled for R_i; scale to R_i / V_i
        for (i, &k) in self.interior.iter().enumerate() {
            let inv = 1.0 / vol[k];
            jac.row_mut(i).iter_mut().for_each(|x| *x *= inv);
        }
        Ok(jac)
    }

    fn newton(&self, state: &GridFunction, t: f64) -> Result<(GridFunction, StepStats)> {
        let (spec, cfg) = (self.spec, self.cfg);
        let t_new = t + cfg.dt;
        let old = state.values();
        let c = self.coefficients(t_new);
        let g: Vec<f64> = self.coords.iter().map(|x| spec.g.eval(x, t_new)).collect();
        let h: Vec<f64> = self.coords.iter().map(|x| spec.h.eval(x, t_new)).collect();
        let sup = |r: &[f64]| r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

        let mut v = state.clone();
        let mut r = self.newton_residual(&v, old, &c, &g, &h, t_new)?;
        let mut res = sup(&r);
        let mut iterations = 0;
        while res > cfg.nonlinear_tol {
            if iterations == cfg.max_nonlinear_iterations {
                return Err(Error::Solver {
                    reason: format!("Newton did not converge in {iterations} iterations at t = {t_new}"),
                    residual: res,
                });
            }
            iterations += 1;
            let jac = self.newton_jacobian(&v, &c, &g, t_new)?;
            let rhs = -DVector::from_column_slice(&r);
            let delta = jac.lu().solve(&rhs).ok_or_else(|| Error::Solver {
                reason: "singular Newton Jacobian".into(),
                residual: res,
            })?;
            if delta.iter().any(|d| !d.is_finite()) {
                return Err(Error::Solver {
                    reason: "non-finite Newton update".into(),
                    residual: res,
                });
            }

            let mut lambda = 1.0;
            let (trial, trial_r, trial_res) = loop {
                let mut trial = v.clone();
                {
                    let tv = trial.values_mut();
                    for (i, &k) in self.interior.iter().enumerate() {
                        tv[k] += lambda * delta[i];
                    }
                }
                let tr = self.newton_residual(&trial, old, &c, &g, &h, t_new)?;
                let tres = sup(&tr);
                if tres.is_finite() && tres < (1.0 - 1e-4 * lambda) * res || lambda < 1e-6 {
                    break (trial, tr, tres);
                }
                lambda *= 0.5;
            };
            let step = lambda * delta.amax();
            v = trial;
            r = trial_r;
            res = trial_res;
            if lambda == 1.0 && step <= 1e-14 * (1.0 + v.max_abs()) {
                break;
            }
        }
        Ok((
            v,
            StepStats {
                nonlinear_iterations: iterations,
                linear_iterations: iterations,
                residual: res,
            },
        ))
    }
}

/// One backward-Euler step from `state` at time `t` to `t + cfg.dt`.
pub fn time_step(
    state: &GridFunction,
    t: f64,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<GridFunction> {
    cfg.check()?;
    if !state.is_admissible() {
        return Err(Error::Precondition("state does not vanish on the boundary".into()));
    }
    let stepper = Stepper::new(state.mesh().clone(), spec, cfg);
    stepper.step(state, t).map(|(u, _)| u)
}

/// Trajectory mesh: the spatial mesh of `spec` with `T / dt` uniform steps.
fn trajectory_mesh(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Arc<Mesh>> {
    let horizon = spec.mesh.horizon();
    let steps = (horizon / cfg.dt).round();
    if steps < 1.0 || (steps * cfg.dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Precondition(format!(
            "horizon T = {horizon} is not an integer multiple of dt = {}",
            cfg.dt
        )));
    }
    let steps = steps as usize;
    if spec.mesh.steps() == steps {
        return Ok(spec.mesh.clone());
    }
    Ok(Arc::new((*spec.mesh).clone().with_time(horizon, steps)?))
}

/// March from `u^0 = 0` to `T`.
pub fn solve(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolutionTrajectory> {
    let mesh = trajectory_mesh(spec, cfg)?;
    solve_from(spec, cfg, &GridFunction::zeros(mesh))
}

/// March from injected initial data `u0` (must vanish on the boundary).
///
/// A failing step does not raise; the trajectory is returned with the levels
/// computed so far and an `Aborted` status.
pub fn solve_from(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    u0: &GridFunction,
) -> Result<SolutionTrajectory> {
    spec.check()?;
    cfg.check()?;
    let mesh = trajectory_mesh(spec, cfg)?;
    if u0.values().len() != mesh.node_count() || u0.mesh().counts() != mesh.counts() {
        return Err(Error::Structural("initial data lives on a different mesh".into()));
    }
    if !u0.is_admissible() {
        return Err(Error::Precondition("initial data does not vanish on the boundary".into()));
    }
    let grid = mesh.times();
    let stepper = Stepper::new(mesh.clone(), spec, cfg);
    let first = GridFunction::new(mesh.clone(), u0.values().to_vec())?;
    let mut slices = vec![first];
    let mut records = Vec::with_capacity(grid.len() - 1);
    let mut status = TrajectoryStatus::Complete;
    for n in 0..grid.len() - 1 {
        match stepper.step(&slices[n], grid[n]) {
            Ok((next, stats)) => {
                records.push(StepRecord {
                    t: grid[n + 1],
                    nonlinear_iterations: stats.nonlinear_iterations,
                    linear_iterations: stats.linear_iterations,
                    residual: stats.residual,
                    l2_energy: next.integrate(|x| x * x),
                });
                slices.push(next);
            }
            Err(e) => {
                let residual = match &e {
                    Error::Solver { residual, .. } => *residual,
                    _ => f64::NAN,
                };
                status = TrajectoryStatus::Aborted {
                    last_level: n,
                    reason: e.to_string(),
                    residual,
                };
                break;
            }
        }
    }
    let times = grid[..slices.len()].to_vec();
    Ok(SolutionTrajectory {
        mesh,
        times,
        slices,
        records,
        status,
        scheme: cfg.scheme,
        degeneracy_floor: cfg.degeneracy_floor,
    })
}

/// Signed residual of the space-time integral relation tested against `w`:
///
/// ```text
/// int int u_t w + |u|^{p0-2} grad u . grad w + a(x,t,u) w + g ||u||_p^s w - h w
/// ```
///
/// The time-derivative term is exact for `u` and `w` piecewise linear in
/// time; the remaining terms use the trapezoid rule in time, the nodal rule
/// in space and edge midpoints for the gradient term.
pub fn weak_residual(traj: &SolutionTrajectory, spec: &ProblemSpec, w: &SpaceTimeField) -> Result<f64> {
    let mesh = traj.mesh();
    if w.times() != traj.times() || w.mesh().counts() != mesh.counts() || w.mesh().extents() != mesh.extents() {
        return Err(Error::Structural("test function and trajectory grids differ".into()));
    }
    for n in 0..w.levels() {
        if !w.slice_function(n).is_admissible() {
            return Err(Error::Precondition("test function must vanish on the boundary".into()));
        }
    }
    let vol = mesh.volumes();
    let edges = mesh.edges();
    let coords: Vec<Vec<f64>> = (0..mesh.node_count()).map(|k| mesh.coords(k)).collect();
    let tw = crate::mesh::time_weights(traj.times());

    let mut total = 0.0;
    for n in 1..traj.levels() {
        let (prev, cur) = (traj.slice(n - 1).values(), traj.slice(n).values());
        let (wp, wc) = (w.slice(n - 1), w.slice(n));
        for k in 0..vol.len() {
            total += vol[k] * (cur[k] - prev[k]) * 0.5 * (wp[k] + wc[k]);
        }
    }
    for (n, (&t, &weight)) in traj.times().iter().zip(&tw).enumerate() {
        if weight == 0.0 {
            continue;
        }
        let u = traj.slice(n);
        let uv = u.values();
        let wv = w.slice(n);
        let mut level = 0.0;
        for e in &edges {
            let mid = 0.5 * (uv[e.tail] + uv[e.head]);
            let du = (uv[e.head] - uv[e.tail]) / e.spacing;
            let dw = (wv[e.head] - wv[e.tail]) / e.spacing;
            level += e.measure * degeneracy(mid, spec.p0) * du * dw;
        }
        let factor = nonlocal_factor(u, spec.p, spec.s);
        for k in 0..vol.len() {
            if wv[k] == 0.0 {
                continue;
            }
            let x = &coords[k];
            let a = spec.eval_nonlinearity(x, t, uv[k])?;
            level += vol[k] * (a + spec.g.eval(x, t) * factor - spec.h.eval(x, t)) * wv[k];
        }
        total += weight * level;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::{Field, FieldExpr, NonlinearityForm, Profile, SeparableTerm};

    fn heat_spec(nodes: usize, horizon: f64) -> ProblemSpec {
        let mesh = Arc::new(Mesh::interval(1.0, nodes).unwrap().with_time(horizon, 1).unwrap());
        let mut s = ProblemSpec::new(mesh);
        s.nonlinearity = NonlinearityForm::Zero;
        s
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let mut s = heat_spec(11, 0.1);
        s.p0 = 3.0;
        s.nonlinearity = NonlinearityForm::PowerSign;
        s.g = Field::constant(2.0);
        for scheme in [Scheme::ImexLagged, Scheme::ImplicitNewton] {
            let cfg = SolverConfig { dt: 0.01, scheme, ..Default::default() };
            let traj = solve(&s, &cfg).unwrap();
            assert!(traj.is_complete());
            assert_eq!(traj.levels(), 11);
            assert_eq!(traj.max_abs(), 0.0);
        }
    }

    #[test]
    fn heat_step_on_discrete_eigenvector() {
        let nodes = 21;
        let h = 1.0 / (nodes - 1) as f64;
        let s = heat_spec(nodes, 0.1);
        let dt = 0.05;
        let lambda = 2.0 * (1.0 - (PI * h).cos()) / (h * h);
        let u = GridFunction::from_fn(s.mesh.clone(), |x| (PI * x[0]).sin()).with_zero_boundary();
        for scheme in [Scheme::ImexLagged, Scheme::ImplicitNewton] {
            let cfg = SolverConfig { dt, scheme, ..Default::default() };
            let next = time_step(&u, 0.0, &s, &cfg).unwrap();
            for (k, (&a, &b)) in next.values().iter().zip(u.values()).enumerate() {
                assert!((a - b / (1.0 + dt * lambda)).abs() < 1e-10, "{scheme:?} node {k}");
            }
        }
    }

    #[test]
    fn aborted_step_keeps_partial_trajectory() {
        let mut s = heat_spec(5, 0.1);
        s.nonlinearity = NonlinearityForm::Tabulated(crate::model::TabulatedNonlinearity {
            points: vec![],
            times: vec![],
            taus: vec![-0.01, 0.01],
            values: vec![0.0, 0.0],
        });
        s.h = Field::constant(1.0);
        let traj = solve(&s, &SolverConfig { dt: 0.02, ..Default::default() }).unwrap();
        assert!(!traj.is_complete());
        assert!(traj.levels() >= 1 && traj.levels() < 6);
        assert_eq!(traj.times().len(), traj.levels());
    }

    #[test]
    fn horizon_must_be_a_multiple_of_dt() {
        let s = heat_spec(5, 0.1);
        assert!(solve(&s, &SolverConfig { dt: 0.03, ..Default::default() }).is_err());
    }

    #[test]
    fn weak_residual_trivial_cases() {
        let s = heat_spec(9, 0.1);
        let cfg = SolverConfig { dt: 0.025, ..Default::default() };
        let traj = solve(&s, &cfg).unwrap();
        let w = SpaceTimeField::from_fn_on(traj.mesh().clone(), traj.times().to_vec(), |x, t| {
            (PI * x[0]).sin() * t
        })
        .unwrap()
        .map(|v| if v.abs() < 1e-15 { 0.0 } else { v });
        let w = zero_boundary(w);
        assert_eq!(weak_residual(&traj, &s, &w).unwrap(), 0.0);
        let zero = w.map(|_| 0.0);
        assert_eq!(weak_residual(&traj, &s, &zero).unwrap(), 0.0);
    }

    fn zero_boundary(w: SpaceTimeField) -> SpaceTimeField {
        let slices = w.slices().map(|s| s.with_zero_boundary().into_values()).collect();
        SpaceTimeField::from_slices(w.mesh().clone(), w.times().to_vec(), slices).unwrap()
    }

    #[test]
    fn newton_and_imex_agree_to_first_order() {
        // nondegenerate smooth run: p0 = 3 with delta, power_sign absorption, source
        let mesh = Arc::new(Mesh::interval(1.0, 17).unwrap().with_time(0.2, 1).unwrap());
        let mut s = ProblemSpec::new(mesh);
        s.p0 = 3.0;
        s.alpha = Field::constant(2.5);
        s.g = Field::constant(0.5);
        s.h = Field::analytic(FieldExpr::term(SeparableTerm {
            coefficient: 4.0,
            x: vec![Profile::SinPi { k: 1.0 }],
            t: Profile::One,
        }))
        .unwrap();
        let mut gaps = Vec::new();
        for dt in [0.02, 0.01, 0.005] {
            let base = SolverConfig { dt, degeneracy_floor: 0.1, ..Default::default() };
            let a = solve(&s, &SolverConfig { scheme: Scheme::ImexLagged, ..base }).unwrap();
            let b = solve(&s, &SolverConfig { scheme: Scheme::ImplicitNewton, ..base }).unwrap();
            let last = a.levels() - 1;
            let gap = a
                .slice(last)
                .values()
                .iter()
                .zip(b.slice(last).values())
                .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            gaps.push(gap);
        }
        for w in gaps.windows(2) {
            assert!((w[0] / w[1]).log2() >= 0.9, "{gaps:?}");
        }
    }

    #[test]
    fn trajectory_csv_layout() {
        let s = heat_spec(3, 0.1);
        let traj = solve(&s, &SolverConfig { dt: 0.05, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,node,value");
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert_eq!(lines[4], "0.05,0,0.0");
    }
}
