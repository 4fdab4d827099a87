//! The `validate`, `solve`, `norms` and `sweep` commands behind the `varexp`
//! binary. Every command reads one TOML config and writes its results into an
//! output directory; floats in CSV files are written in shortest round-trip
//! form so repeated runs are byte-identical.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    apply_override, from_tree, load, to_toml, DiagnosticsConfig, HypothesisPolicy, LoadedConfig,
    MeshConfig, NormsConfig, ProblemConfig, ProfileName, RunConfig, ValidateConfig,
};

use crate::diagnostics::{
    coercivity_check_33, coercivity_summary_35, energy_report, homogeneous_decay_check,
    write_summary_csv, CoercivityReport, CoercivitySummary, DecayOptions, DecayReport,
};
use crate::error::{Error, Result};
use crate::exponent_spaces::{luxemburg_norm, modular, norm_modular_sandwich_check, ExponentField};
use crate::mesh::{time_weights, GridFunction, Sampled, SpaceTimeField};
use crate::model::{
    validate_theorem31, validate_theorem32, validate_theorem41, validate_u1, Field, FieldExpr,
    ProblemSpec,
};
use crate::numfmt::float;
use crate::pn_spaces::{bochner_pseudonorm, gradient_identity_check, pn_pseudonorm, PnIndex};
use crate::solver::{solve, solve_from, SolutionTrajectory, TrajectoryStatus};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success,
    /// A validator or diagnostic check failed.
    Failure,
    /// Bad arguments, unreadable or malformed config.
    Usage,
    /// The solver aborted.
    Abort,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Usage => 2,
            ExitStatus::Abort => 3,
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::Solver { .. } => ExitStatus::Abort,
            _ => ExitStatus::Usage,
        }
    }

    fn worst(self, other: Self) -> Self {
        self.max(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Solve,
    Norms,
    Sweep,
}

/// Arguments shared by all commands.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Validator profiles; empty means the config's list.
    pub profiles: Vec<ProfileName>,
    /// Field CSV for `norms`, overriding `[norms].field`.
    pub field: Option<PathBuf>,
}

/// Run a command, printing errors to stderr.
pub fn run(command: Command, inv: &Invocation) -> ExitStatus {
    let result = match command {
        Command::Validate => cmd_validate(inv),
        Command::Solve => cmd_solve(inv),
        Command::Norms => cmd_norms(inv),
        Command::Sweep => cmd_sweep(inv),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitStatus::of_error(&e)
    })
}

fn out_dir(inv: &Invocation, cfg: &RunConfig) -> PathBuf {
    inv.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn toml_string<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Parse(e.to_string()))
}

fn toml_value<T: Serialize>(value: &T) -> Result<toml::Value> {
    toml::Value::try_from(value).map_err(|e| Error::Parse(e.to_string()))
}

/// Run the requested validators; returns the report table and overall verdict.
fn validation_reports(
    spec: &ProblemSpec,
    cfg: &RunConfig,
    profiles: &[ProfileName],
) -> Result<(toml::Table, bool)> {
    let mut table = toml::Table::new();
    table.insert("exponent_dimension".into(), toml::Value::Integer(spec.n as i64));
    table.insert(
        "simulated_dimension".into(),
        toml::Value::Integer(spec.mesh.dim() as i64),
    );
    let mut all = true;
    let mut profiles = profiles.to_vec();
    profiles.sort();
    profiles.dedup();
    for profile in profiles {
        let (value, passed) = match profile {
            ProfileName::U1 => match validate_u1(spec, &cfg.u1_options()) {
                Ok(r) => (toml_value(&r)?, r.passed),
                Err(e) => {
                    let mut t = toml::Table::new();
                    t.insert("error".into(), toml::Value::String(e.to_string()));
                    t.insert("passed".into(), toml::Value::Boolean(false));
                    (toml::Value::Table(t), false)
                }
            },
            ProfileName::Thm31 => {
                let r = validate_theorem31(spec)?;
                (toml_value(&r)?, r.passed)
            }
            ProfileName::Thm32 => {
                let r = validate_theorem32(spec)?;
                (toml_value(&r)?, r.passed)
            }
            ProfileName::Thm41 => {
                let r = validate_theorem41(spec)?;
                (toml_value(&r)?, r.passed)
            }
        };
        all &= passed;
        table.insert(profile.key().into(), value);
    }
    table.insert("passed".into(), toml::Value::Boolean(all));
    Ok((table, all))
}

/// `validate`: exit 0 iff every requested profile passes.
pub fn cmd_validate(inv: &Invocation) -> Result<ExitStatus> {
    let loaded = load(&inv.config, inv.seed)?;
    let cfg = &loaded.config;
    let spec = cfg.build_spec(&loaded.base)?;
    let profiles = if inv.profiles.is_empty() {
        cfg.validate.profiles.clone()
    } else {
        inv.profiles.clone()
    };
    let (table, passed) = validation_reports(&spec, cfg, &profiles)?;
    let dir = out_dir(inv, cfg);
    write_file(&dir, "config.toml", &to_toml(cfg)?)?;
    write_file(&dir, "validation.toml", &toml_string(&table)?)?;
    Ok(if passed { ExitStatus::Success } else { ExitStatus::Failure })
}

#[derive(Debug, Clone, Serialize)]
struct HypothesisVerdict {
    policy: HypothesisPolicy,
    thm31: bool,
    thm32: bool,
    u1: bool,
}

#[derive(Debug, Clone, Serialize)]
struct Verdict {
    passed: bool,
    scheme: &'static str,
    levels: usize,
    max_abs: f64,
    exponent_dimension: usize,
    simulated_dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_error: Option<f64>,
    status: TrajectoryStatus,
    hypotheses: HypothesisVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    coercivity: Option<CoercivityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coercivity_skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coercivity_summary: Option<CoercivitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<DecayReport>,
}

/// What one solve produced, for sweep tables.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub complete: bool,
    pub final_t: f64,
    pub max_y: f64,
    pub l2_error: Option<f64>,
}

/// `||u - u*||_{L^2(Omega)}` per level and the `L^2(Q_T)` error.
fn errors_against(traj: &SolutionTrajectory, exact: &Field) -> (Vec<f64>, f64) {
    let per_level: Vec<f64> = traj
        .slices()
        .iter()
        .zip(traj.times())
        .map(|(u, &t)| {
            let e = exact.sample(traj.mesh(), t);
            let diff = GridFunction::new(
                traj.mesh().clone(),
                u.values().iter().zip(e.values()).map(|(a, b)| a - b).collect(),
            )
            .expect("same mesh");
            diff.lp_norm(2.0)
        })
        .collect();
    let tw = time_weights(traj.times());
    let total = per_level.iter().zip(&tw).map(|(e, w)| w * e * e).sum::<f64>().sqrt();
    (per_level, total)
}

/// Solve one config and write its outputs into `dir`.
pub fn solve_into(cfg: &RunConfig, base: &Path, dir: &Path) -> Result<RunOutcome> {
    let spec = cfg.build_spec(base)?;
    let (mut validation, _) = validation_reports(
        &spec,
        cfg,
        &[ProfileName::U1, ProfileName::Thm31, ProfileName::Thm32, ProfileName::Thm41],
    )?;
    validation.remove("passed");
    let passed = |key: &str| {
        validation
            .get(key)
            .and_then(|v| v.get("passed"))
            .and_then(toml::Value::as_bool)
            .unwrap_or(false)
    };
    let hyp = HypothesisVerdict {
        policy: cfg.validate.hypotheses,
        thm31: passed("thm31"),
        thm32: passed("thm32"),
        u1: passed("u1"),
    };
    write_file(dir, "config.toml", &to_toml(cfg)?)?;
    write_file(dir, "validation.toml", &toml_string(&validation)?)?;
    if !(hyp.thm31 || hyp.thm32) {
        match cfg.validate.hypotheses {
            HypothesisPolicy::Enforce => {
                eprintln!("existence hypotheses fail; not solving (policy = enforce)");
                return Ok(RunOutcome {
                    status: ExitStatus::Failure,
                    complete: false,
                    final_t: 0.0,
                    max_y: f64::NAN,
                    l2_error: None,
                });
            }
            HypothesisPolicy::Warn => {
                eprintln!("warning: existence hypotheses fail for {}; solving anyway", dir.display());
            }
        }
    }

    let traj = match &cfg.initial {
        Some(expr) => {
            let u0 = Field::load(expr.clone(), base, &spec.mesh)?
                .sample(&spec.mesh, 0.0)
                .with_zero_boundary();
            solve_from(&spec, &cfg.solver, &u0)?
        }
        None => solve(&spec, &cfg.solver)?,
    };

    let rows = energy_report(&traj, &spec)?;
    let d = &cfg.diagnostics;
    let (coercivity, coercivity_skipped, coercivity_summary) = if d.coercivity {
        let summary = coercivity_summary_35(&traj, &spec, d.ratio_threshold)?;
        if hyp.u1 {
            (Some(coercivity_check_33(&traj, &spec)?), None, Some(summary))
        } else {
            (None, Some("pointwise absorption bounds fail".to_string()), Some(summary))
        }
    } else {
        (None, None, None)
    };
    let decay = if d.decay {
        let opts = DecayOptions {
            relation_tol: d.relation_tol,
            embedding_constant: d.embedding_constant,
            epsilon: d.epsilon,
        };
        Some(homogeneous_decay_check(&traj, &spec, &opts)?)
    } else {
        None
    };
    let errors = match &cfg.exact {
        Some(expr) => Some(errors_against(&traj, &Field::load(expr.clone(), base, &spec.mesh)?)),
        None => None,
    };

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    fs::write(dir.join("trajectory.csv"), csv)?;
    let mut csv = Vec::new();
    let bound = decay.as_ref().map(|r| r.gronwall_bound.clone()).unwrap_or_default();
    write_summary_csv(
        &mut csv,
        &rows,
        &bound,
        errors.as_ref().map(|(e, _)| e.as_slice()),
        traj.is_complete(),
    )?;
    fs::write(dir.join("summary.csv"), csv)?;

    let checks_pass = coercivity.as_ref().is_none_or(|r| r.passed)
        && coercivity_summary.as_ref().is_none_or(|r| r.passed)
        && decay
            .as_ref()
            .is_none_or(|r| r.skipped.is_some() || r.passed);
    let verdict = Verdict {
        passed: checks_pass && traj.is_complete(),
        scheme: traj.scheme().name(),
        levels: traj.levels(),
        max_abs: traj.max_abs(),
        exponent_dimension: spec.n,
        simulated_dimension: spec.mesh.dim(),
        l2_error: errors.as_ref().map(|(_, e)| *e),
        status: traj.status().clone(),
        hypotheses: hyp,
        coercivity,
        coercivity_skipped,
        coercivity_summary,
        decay,
    };
    write_file(dir, "verdict.toml", &toml_string(&verdict)?)?;

    let status = if !traj.is_complete() {
        ExitStatus::Abort
    } else if !checks_pass {
        ExitStatus::Failure
    } else {
        ExitStatus::Success
    };
    Ok(RunOutcome {
        status,
        complete: traj.is_complete(),
        final_t: *traj.times().last().unwrap_or(&0.0),
        max_y: rows.iter().fold(0.0, |m, r| m.max(r.y)),
        l2_error: verdict.l2_error,
    })
}

/// `solve`: trajectory, summary and verdict for one config.
pub fn cmd_solve(inv: &Invocation) -> Result<ExitStatus> {
    let loaded = load(&inv.config, inv.seed)?;
    let dir = out_dir(inv, &loaded.config);
    Ok(solve_into(&loaded.config, &loaded.base, &dir)?.status)
}

#[derive(Debug, Clone, Serialize)]
struct SpatialNorms {
    time: f64,
    measure: f64,
    modular: f64,
    luxemburg: f64,
    sandwich_holds: bool,
    l1: f64,
    l2: f64,
    linf: f64,
    pn_alpha: f64,
    pn_beta: f64,
    pn_pseudonorm: f64,
    gradient_identity_lhs: f64,
    gradient_identity_rhs: f64,
    gradient_identity_relative_error: f64,
    gradient_identity_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SpaceTimeNorms {
    measure: f64,
    modular: f64,
    luxemburg: f64,
    /// `[u]_{L^{p0}(0,T; S_{1,alpha,beta})}`
    bochner: f64,
}

#[derive(Debug, Clone, Serialize)]
struct NormsReport {
    space: SpatialNorms,
    space_time: SpaceTimeNorms,
}

/// `norms`: modular, Luxemburg and pn quantities of a stored or closed-form field.
pub fn cmd_norms(inv: &Invocation) -> Result<ExitStatus> {
    let loaded = load(&inv.config, inv.seed)?;
    let cfg = &loaded.config;
    let mut norms = cfg
        .norms
        .clone()
        .ok_or_else(|| Error::Parse("config has no [norms] table".into()))?;
    let mut field_base = loaded.base.clone();
    if let Some(path) = &inv.field {
        norms.field = FieldExpr::Table { path: path.clone() };
        field_base = PathBuf::new();
    }
    let mesh = cfg.build_mesh()?;
    let field = Field::load(norms.field.clone(), &field_base, &mesh)?;
    let exponent = Field::load(norms.exponent.clone(), &loaded.base, &mesh)?;

    let u = field.sample(&mesh, norms.time);
    let p = ExponentField::new(exponent.sample(&mesh, norms.time).into_values())?;
    let idx = match (norms.pn_alpha, norms.pn_beta) {
        (Some(a), Some(b)) => PnIndex::new(a, b)?,
        (None, None) => PnIndex::for_diffusion(cfg.problem.p0)?,
        _ => return Err(Error::Parse("give both pn_alpha and pn_beta or neither".into())),
    };
    let gi = gradient_identity_check(&u, idx);
    let space = SpatialNorms {
        time: norms.time,
        measure: u.total_measure(),
        modular: modular(&u, &p)?,
        luxemburg: luxemburg_norm(&u, &p)?,
        sandwich_holds: norm_modular_sandwich_check(&u, &p)?.holds,
        l1: u.lp_norm(1.0),
        l2: u.lp_norm(2.0),
        linf: u.max_abs(),
        pn_alpha: idx.alpha(),
        pn_beta: idx.beta(),
        pn_pseudonorm: pn_pseudonorm(&u, idx),
        gradient_identity_lhs: gi.lhs,
        gradient_identity_rhs: gi.rhs,
        gradient_identity_relative_error: gi.relative_error,
        gradient_identity_holds: gi.holds,
    };
    let uq = SpaceTimeField::from_fn(mesh.clone(), |x, t| field.eval(x, t))?;
    let pq = ExponentField::new(
        SpaceTimeField::from_fn(mesh.clone(), |x, t| exponent.eval(x, t))?
            .values()
            .to_vec(),
    )?;
    let space_time = SpaceTimeNorms {
        measure: uq.total_measure(),
        modular: modular(&uq, &pq)?,
        luxemburg: luxemburg_norm(&uq, &pq)?,
        bochner: bochner_pseudonorm(&uq, cfg.problem.p0, idx)?,
    };
    let report = toml_string(&NormsReport { space, space_time })?;
    let dir = out_dir(inv, cfg);
    write_file(&dir, "config.toml", &to_toml(cfg)?)?;
    write_file(&dir, "norms.toml", &report)?;
    print!("{report}");
    Ok(ExitStatus::Success)
}

fn value_cell(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(f) => float(*f),
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `sweep`: one solve per point of the Cartesian product of `[sweep]` axes,
/// each in `run_NNN/`, plus `sweep.csv` with one row per run.
pub fn cmd_sweep(inv: &Invocation) -> Result<ExitStatus> {
    let loaded = load(&inv.config, inv.seed)?;
    let axes: Vec<(String, Vec<toml::Value>)> = loaded.config.sweep.clone().into_iter().collect();
    if axes.is_empty() || axes.iter().any(|(_, v)| v.is_empty()) {
        return Err(Error::Parse("sweep needs at least one non-empty axis in [sweep]".into()));
    }
    let dir = out_dir(inv, &loaded.config);
    let mut base_tree = loaded.tree.clone();
    base_tree.remove("sweep");

    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut header: Vec<String> = vec!["run".into()];
    header.extend(axes.iter().map(|(k, _)| k.clone()));
    header.extend(["exit", "complete", "final_t", "max_y", "l2_error"].map(String::from));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header)?;

    let mut overall = ExitStatus::Success;
    for run in 0..total {
        // last axis varies fastest
        let mut rest = run;
        let mut picks = vec![0; axes.len()];
        for (a, (_, values)) in axes.iter().enumerate().rev() {
            picks[a] = rest % values.len();
            rest /= values.len();
        }
        let mut tree = base_tree.clone();
        let mut cells = vec![format!("run_{run:03}")];
        for ((key, values), &i) in axes.iter().zip(&picks) {
            apply_override(&mut tree, key, values[i].clone())?;
            cells.push(value_cell(&values[i]));
        }
        let run_dir = dir.join(format!("run_{run:03}"));
        let outcome = from_tree(&tree).and_then(|cfg| solve_into(&cfg, &loaded.base, &run_dir));
        match outcome {
            Ok(o) => {
                overall = overall.worst(o.status);
                cells.push(o.status.code().to_string());
                cells.push(o.complete.to_string());
                cells.push(float(o.final_t));
                cells.push(float(o.max_y));
                cells.push(o.l2_error.map(float).unwrap_or_default());
            }
            Err(e) => {
                eprintln!("error in run_{run:03}: {e}");
                let status = ExitStatus::of_error(&e);
                overall = overall.worst(status);
                cells.push(status.code().to_string());
                cells.extend(["false", "", "", ""].map(String::from));
            }
        }
        w.write_record(&cells)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("sweep.csv"), bytes)?;
    Ok(overall)
}
