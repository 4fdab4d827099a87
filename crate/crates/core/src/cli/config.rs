//! Run configuration: one TOML document per run, optionally with sweep axes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::model::{Field, FieldExpr, NonlinearityForm, ProblemSpec, U1Options};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub extents: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Final time `T`.
    pub horizon: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            extents: vec![1.0],
            nodes: vec![21],
            horizon: 0.1,
        }
    }
}

fn zero() -> FieldExpr {
    FieldExpr::Zero
}

fn one() -> FieldExpr {
    FieldExpr::constant(1.0)
}

fn two() -> FieldExpr {
    FieldExpr::constant(2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub p0: f64,
    pub p: f64,
    pub s: f64,
    pub n: usize,
    pub a_lower: f64,
    pub nonlinearity: NonlinearityForm,
    pub alpha: FieldExpr,
    pub a0: FieldExpr,
    pub a1: FieldExpr,
    pub a2: FieldExpr,
    pub a3: FieldExpr,
    pub g: FieldExpr,
    pub h: FieldExpr,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            p0: 2.0,
            p: 2.0,
            s: 1.0,
            n: 3,
            a_lower: 1.0,
            nonlinearity: NonlinearityForm::PowerSign,
            alpha: two(),
            a0: one(),
            a1: zero(),
            a2: one(),
            a3: zero(),
            g: zero(),
            h: zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    U1,
    Thm31,
    Thm32,
    Thm41,
}

impl ProfileName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(Self::U1),
            "thm31" => Ok(Self::Thm31),
            "thm32" => Ok(Self::Thm32),
            "thm41" => Ok(Self::Thm41),
            _ => Err(Error::Parse(format!("unknown profile `{s}` (u1, thm31, thm32, thm41)"))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            Self::U1 => "u1",
            Self::Thm31 => "thm31",
            Self::Thm32 => "thm32",
            Self::Thm41 => "thm41",
        }
    }
}

/// What `solve` does when the existence hypotheses fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisPolicy {
    #[default]
    Warn,
    Enforce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub profiles: Vec<ProfileName>,
    pub samples: usize,
    pub tau_max: f64,
    pub tau_min: f64,
    pub hypotheses: HypothesisPolicy,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        let u1 = U1Options::default();
        Self {
            profiles: vec![ProfileName::U1, ProfileName::Thm31],
            samples: u1.samples,
            tau_max: u1.tau_max,
            tau_min: u1.tau_min,
            hypotheses: HypothesisPolicy::Warn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub coercivity: bool,
    pub decay: bool,
    /// Norm threshold above which the coercivity ratio must be positive.
    pub ratio_threshold: f64,
    pub relation_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            coercivity: true,
            decay: true,
            ratio_threshold: 1e-3,
            relation_tol: 1e-8,
            embedding_constant: None,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    pub field: FieldExpr,
    #[serde(default = "two")]
    pub exponent: FieldExpr,
    /// Time at which spatial norms are taken.
    #[serde(default)]
    pub time: f64,
    /// pn-space index; defaults to `((p0-2) q0, q0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pn_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pn_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    /// Injected initial data (the problem itself starts from zero).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<FieldExpr>,
    /// Exact solution, enables the error columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<FieldExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsConfig>,
    /// Dotted key -> values; `sweep` runs the Cartesian product.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, Vec<toml::Value>>,
}

/// A parsed config together with its raw tree and the directory relative
/// paths are resolved against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub tree: toml::Table,
    pub base: PathBuf,
}

fn parse_table(text: &str, origin: &Path) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Parse(format!("{}: {e}", origin.display())))
}

/// Read a config file. A top-level `problem_file` key names a TOML file whose
/// contents form the `[problem]` table; inline `[problem]` keys win.
pub fn load(path: &Path, seed: Option<u64>) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut tree = parse_table(&text, path)?;
    if let Some(file) = tree.remove("problem_file") {
        let rel = file
            .as_str()
            .ok_or_else(|| Error::Parse("problem_file must be a string".into()))?;
        let full = base.join(rel);
        let ptext = std::fs::read_to_string(&full)
            .map_err(|e| Error::Io(format!("{}: {e}", full.display())))?;
        let mut problem = parse_table(&ptext, &full)?;
        if let Some(toml::Value::Table(inline)) = tree.remove("problem") {
            problem.extend(inline);
        }
        tree.insert("problem".into(), toml::Value::Table(problem));
    }
    if let Some(seed) = seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Parse("seed too large".into()))?;
        tree.insert("seed".into(), toml::Value::Integer(seed));
    }
    let config = from_tree(&tree)?;
    Ok(LoadedConfig { config, tree, base })
}

pub fn from_tree(tree: &toml::Table) -> Result<RunConfig> {
    let config: RunConfig = toml::Value::Table(tree.clone())
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    Ok(config)
}

/// Set `a.b.c = value`, creating intermediate tables.
pub fn apply_override(tree: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("bad override key `{key}`")));
    }
    let mut table = tree;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Parse(format!("override `{key}`: `{part}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Normalized echo of a config.
pub fn to_toml(config: &RunConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Parse(e.to_string()))
}

impl RunConfig {
    /// Mesh with the time axis implied by `horizon` and `dt`.
    pub fn build_mesh(&self) -> Result<Arc<Mesh>> {
        let m = &self.mesh;
        let steps = (m.horizon / self.solver.dt).round().max(1.0) as usize;
        Ok(Arc::new(Mesh::from_axes(&m.extents, &m.nodes)?.with_time(m.horizon, steps)?))
    }

    pub fn build_spec(&self, base: &Path) -> Result<ProblemSpec> {
        let mesh = self.build_mesh()?;
        let p = &self.problem;
        let load = |e: &FieldExpr| Field::load(e.clone(), base, &mesh);
        let mut spec = ProblemSpec::new(mesh.clone());
        spec.p0 = p.p0;
        spec.p = p.p;
        spec.s = p.s;
        spec.n = p.n;
        spec.a_lower = p.a_lower;
        spec.nonlinearity = p.nonlinearity.clone();
        spec.alpha = load(&p.alpha)?;
        spec.a0 = load(&p.a0)?;
        spec.a1 = load(&p.a1)?;
        spec.a2 = load(&p.a2)?;
        spec.a3 = load(&p.a3)?;
        spec.g = load(&p.g)?;
        spec.h = load(&p.h)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn u1_options(&self) -> U1Options {
        U1Options {
            samples: self.validate.samples,
            tau_max: self.validate.tau_max,
            tau_min: self.validate.tau_min,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = from_tree(&toml::Table::new()).unwrap();
        let text = to_toml(&cfg).unwrap();
        let back = from_tree(&text.parse().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: toml::Table = "[problem]\nq0 = 2.0\n".parse().unwrap();
        assert!(matches!(from_tree(&t), Err(Error::Parse(_))));
        let t: toml::Table = "[problem.g]\nkind = \"sine\"\n".parse().unwrap();
        assert!(matches!(from_tree(&t), Err(Error::Parse(_))));
    }

    #[test]
    fn overrides_nest() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "solver.dt", toml::Value::Float(0.5)).unwrap();
        apply_override(&mut t, "problem.p0", toml::Value::Float(3.0)).unwrap();
        let cfg = from_tree(&t).unwrap();
        assert_eq!(cfg.solver.dt, 0.5);
        assert_eq!(cfg.problem.p0, 3.0);
        assert!(apply_override(&mut t, "solver..dt", toml::Value::Float(1.0)).is_err());
    }

    #[test]
    fn field_expressions_parse() {
        let text = r#"
            [problem]
            p0 = 3.0
            nonlinearity = { form = "power_abs_plus_offset" }
            g = { kind = "separable", terms = [{ coefficient = 2.0, x = [{ kind = "sin_pi", k = 1.0 }] }] }
            h = { kind = "affine", offset = 1.0, slopes = [0.5], rate = 2.0 }
        "#;
        let cfg = from_tree(&text.parse().unwrap()).unwrap();
        let spec = cfg.build_spec(Path::new(".")).unwrap();
        assert!((spec.g.eval(&[0.5], 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(spec.h.eval(&[1.0], 1.0), 3.5);
        assert_eq!(spec.nonlinearity, NonlinearityForm::PowerAbsPlusOffset);
    }
}
