//! Closed-form coefficient fields and CSV-backed tables.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{GridFunction, Mesh, SpaceTimeField};

/// One-dimensional factor of a separable term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    #[default]
    One,
    /// `z^exponent`
    Power { exponent: f64 },
    /// `sin(k pi z)`
    SinPi { k: f64 },
    /// `cos(k pi z)`
    CosPi { k: f64 },
    /// `exp(rate z)`
    Exp { rate: f64 },
    /// `offset + slope z`
    Affine { offset: f64, slope: f64 },
}

impl Profile {
    pub fn eval(&self, z: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Profile::One => 1.0,
            Profile::Power { exponent } => {
                if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
                    z.powi(exponent as i32)
                } else {
                    z.powf(exponent)
                }
            }
            Profile::SinPi { k } => (k * PI * z).sin(),
            Profile::CosPi { k } => (k * PI * z).cos(),
            Profile::Exp { rate } => (rate * z).exp(),
            Profile::Affine { offset, slope } => offset + slope * z,
        }
    }
}

/// `coefficient * prod_i x_profile_i(x_i) * t_profile(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub coefficient: f64,
    #[serde(default)]
    pub x: Vec<Profile>,
    #[serde(default)]
    pub t: Profile,
}

impl SeparableTerm {
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let mut v = self.coefficient * self.t.eval(t);
        for (axis, prof) in self.x.iter().enumerate() {
            v *= prof.eval(x.get(axis).copied().unwrap_or(0.0));
        }
        v
    }
}

/// Field identifiers accepted in problem configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldExpr {
    Zero,
    Constant {
        value: f64,
    },
    /// `offset + sum_i slopes_i x_i + rate t`
    Affine {
        offset: f64,
        #[serde(default)]
        slopes: Vec<f64>,
        #[serde(default)]
        rate: f64,
    },
    /// Sum of separable products.
    Separable { terms: Vec<SeparableTerm> },
    /// CSV table: `node,value` or `t,node,value`.
    Table { path: PathBuf },
}

impl FieldExpr {
    pub fn constant(value: f64) -> Self {
        FieldExpr::Constant { value }
    }

    pub fn term(term: SeparableTerm) -> Self {
        FieldExpr::Separable { terms: vec![term] }
    }
}

/// A coefficient field ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    expr: FieldExpr,
    table: Option<Arc<TableField>>,
}

impl Field {
    /// Analytic field; table expressions need [`Field::load`].
    pub fn analytic(expr: FieldExpr) -> Result<Self> {
        if let FieldExpr::Table { path } = &expr {
            return Err(Error::Structural(format!(
                "table field {} must be loaded against a mesh",
                path.display()
            )));
        }
        Ok(Self { expr, table: None })
    }

    pub fn zero() -> Self {
        Self { expr: FieldExpr::Zero, table: None }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            expr: FieldExpr::Constant { value },
            table: None,
        }
    }

    /// Resolve table paths relative to `base` and bind them to `mesh`.
    pub fn load(expr: FieldExpr, base: &Path, mesh: &Arc<Mesh>) -> Result<Self> {
        match &expr {
            FieldExpr::Table { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let table = TableField::read(&full, mesh)?;
                Ok(Self {
                    expr,
                    table: Some(Arc::new(table)),
                })
            }
            _ => Self::analytic(expr),
        }
    }

    pub fn from_table(table: TableField, path: PathBuf) -> Self {
        Self {
            expr: FieldExpr::Table { path },
            table: Some(Arc::new(table)),
        }
    }

    pub fn expr(&self) -> &FieldExpr {
        &self.expr
    }

    /// Value at `(x, t)`.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match &self.expr {
            FieldExpr::Zero => 0.0,
            FieldExpr::Constant { value } => *value,
            FieldExpr::Affine { offset, slopes, rate } => {
                offset
                    + slopes
                        .iter()
                        .zip(x)
                        .map(|(s, xi)| s * xi)
                        .sum::<f64>()
                    + rate * t
            }
            FieldExpr::Separable { terms } => terms.iter().map(|term| term.eval(x, t)).sum(),
            FieldExpr::Table { .. } => self
                .table
                .as_ref()
                .map(|tab| tab.eval(x, t))
                .unwrap_or(f64::NAN),
        }
    }

    /// Structural zero (no sampling needed).
    pub fn is_identically_zero(&self) -> bool {
        match &self.expr {
            FieldExpr::Zero => true,
            FieldExpr::Constant { value } => *value == 0.0,
            FieldExpr::Affine { offset, slopes, rate } => {
                *offset == 0.0 && *rate == 0.0 && slopes.iter().all(|&s| s == 0.0)
            }
            FieldExpr::Separable { terms } => terms.iter().all(|t| t.coefficient == 0.0),
            FieldExpr::Table { .. } => self
                .table
                .as_ref()
                .is_some_and(|tab| tab.values.iter().all(|&v| v == 0.0)),
        }
    }

    pub fn sample(&self, mesh: &Arc<Mesh>, t: f64) -> GridFunction {
        GridFunction::from_fn(mesh.clone(), |x| self.eval(x, t))
    }

    pub fn sample_space_time(&self, mesh: &Arc<Mesh>) -> Result<SpaceTimeField> {
        SpaceTimeField::from_fn(mesh.clone(), |x, t| self.eval(x, t))
    }
}

/// Nodal samples read from CSV, nearest-node in space and linear in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TableField {
    coords: Vec<Vec<f64>>,
    times: Vec<f64>,
    /// level-major: `values[level * nodes + node]`
    values: Vec<f64>,
}

impl TableField {
    pub fn new(mesh: &Mesh, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = mesh.node_count();
        if times.is_empty() || values.len() != n * times.len() {
            return Err(Error::Structural(format!(
                "table needs {} values per time level for {} levels, got {}",
                n,
                times.len(),
                values.len()
            )));
        }
        Ok(Self {
            coords: (0..n).map(|k| mesh.coords(k)).collect(),
            times,
            values,
        })
    }

    /// Read `node,value` (time independent) or `t,node,value` rows.
    pub fn read(path: &Path, mesh: &Mesh) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let timed = match cols.as_slice() {
            ["node", "value"] => false,
            ["t", "node", "value"] => true,
            _ => {
                return Err(Error::Parse(format!(
                    "{}: expected header `node,value` or `t,node,value`, got `{}`",
                    path.display(),
                    cols.join(",")
                )))
            }
        };
        let n = mesh.node_count();
        let mut rows: Vec<(f64, usize, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("short CSV row".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
            };
            let (t, node, value) = if timed {
                (num(0)?, num(1)?, num(2)?)
            } else {
                (0.0, num(0)?, num(1)?)
            };
            if node < 0.0 || node.fract() != 0.0 || node as usize >= n {
                return Err(Error::Parse(format!("{}: bad node index {node}", path.display())));
            }
            rows.push((t, node as usize, value));
        }
        let mut times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut values = vec![f64::NAN; n * times.len()];
        for (t, node, v) in rows {
            let level = times.iter().position(|&s| s == t).unwrap_or(0);
            values[level * n + node] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse(format!(
                "{}: table does not cover every node at every time level",
                path.display()
            )));
        }
        Self::new(mesh, times, values)
    }

    fn nearest(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in self.coords.iter().enumerate() {
            let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let node = self.nearest(x);
        let n = self.coords.len();
        let at = |level: usize| self.values[level * n + node];
        if self.times.len() == 1 || t <= self.times[0] {
            return at(0);
        }
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            return at(last);
        }
        let j = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * at(j) + w * at(j + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn separable_and_affine() {
        let f = Field::analytic(FieldExpr::Separable {
            terms: vec![SeparableTerm {
                coefficient: 2.0,
                x: vec![Profile::SinPi { k: 1.0 }],
                t: Profile::Affine { offset: 1.0, slope: 3.0 },
            }],
        })
        .unwrap();
        assert!((f.eval(&[0.5], 1.0) - 8.0).abs() < 1e-14);
        let a = Field::analytic(FieldExpr::Affine {
            offset: 1.0,
            slopes: vec![2.0, -1.0],
            rate: 0.5,
        })
        .unwrap();
        assert!((a.eval(&[1.0, 2.0], 2.0) - 2.0).abs() < 1e-15);
        assert!(Field::analytic(FieldExpr::Table { path: "x.csv".into() }).is_err());
    }

    #[test]
    fn zero_detection() {
        assert!(Field::zero().is_identically_zero());
        assert!(Field::constant(0.0).is_identically_zero());
        assert!(!Field::constant(1e-300).is_identically_zero());
    }

    #[test]
    fn table_round_trip() {
        let mesh = Arc::new(Mesh::interval(1.0, 3).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "t,node,value").unwrap();
        for (t, vals) in [(0.0, [0.0, 1.0, 2.0]), (1.0, [0.0, 3.0, 4.0])] {
            for (k, v) in vals.iter().enumerate() {
                writeln!(f, "{t},{k},{v}").unwrap();
            }
        }
        drop(f);
        let field = Field::load(FieldExpr::Table { path: "g.csv".into() }, dir.path(), &mesh).unwrap();
        assert!((field.eval(&[0.5], 0.5) - 2.0).abs() < 1e-15);
        assert!((field.eval(&[0.9], 2.0) - 4.0).abs() < 1e-15);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "node,val\n0,1\n").unwrap();
        assert!(matches!(TableField::read(&bad, &mesh), Err(Error::Parse(_))));
    }
}
