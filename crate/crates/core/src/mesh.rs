//! Uniform tensor meshes on boxes `[0, L_1] x ... x [0, L_d]` (d = 1 or 2), the
//! nodal fields living on them, and space-time stacks of such fields.
//!
//! Every node owns its dual cell (half cells at the boundary), so nodal values
//! extend piecewise-constantly and integrals are weighted sums with the dual
//! cell volumes as weights.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A uniform tensor mesh with an optional uniform time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    extents: Vec<f64>,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    volumes: Vec<f64>,
    boundary: Vec<bool>,
    horizon: f64,
    steps: usize,
}

/// A mesh edge between two neighbouring nodes along one axis.
///
/// `measure` is the edge length times the transverse dual width, so that
/// `sum(measure)` over the edges of one axis equals `|Omega|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub axis: usize,
    pub tail: usize,
    pub head: usize,
    pub spacing: f64,
    pub measure: f64,
}

fn dual_widths(length: f64, count: usize) -> Vec<f64> {
    let h = length / (count - 1) as f64;
    (0..count)
        .map(|i| if i == 0 || i + 1 == count { 0.5 * h } else { h })
        .collect()
}

impl Mesh {
    fn build(extents: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        for (&l, &n) in extents.iter().zip(&counts) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Structural(format!("extent must be positive, got {l}")));
            }
            if n < 2 {
                return Err(Error::Structural(format!("need at least 2 nodes per axis, got {n}")));
            }
        }
        let spacing: Vec<f64> = extents
            .iter()
            .zip(&counts)
            .map(|(&l, &n)| l / (n - 1) as f64)
            .collect();
        let widths: Vec<Vec<f64>> = extents
            .iter()
            .zip(&counts)
            .map(|(&l, &n)| dual_widths(l, n))
            .collect();
        let total: usize = counts.iter().product();
        let mut volumes = Vec::with_capacity(total);
        let mut boundary = Vec::with_capacity(total);
        for k in 0..total {
            let idx = multi_index(&counts, k);
            let mut v = 1.0;
            let mut on_boundary = false;
            for (axis, &i) in idx.iter().enumerate() {
                v *= widths[axis][i];
                on_boundary |= i == 0 || i + 1 == counts[axis];
            }
            volumes.push(v);
            boundary.push(on_boundary);
        }
        Ok(Self {
            extents,
            counts,
            spacing,
            volumes,
            boundary,
            horizon: 0.0,
            steps: 0,
        })
    }

    /// `[0, length]` with `nodes` equally spaced nodes (both ends included).
    pub fn interval(length: f64, nodes: usize) -> Result<Self> {
        Self::build(vec![length], vec![nodes])
    }

    /// `[0, lx] x [0, ly]` with `nx * ny` nodes, x-index running fastest.
    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::build(vec![lx, ly], vec![nx, ny])
    }

    /// Box mesh from per-axis extents and node counts (1 or 2 axes).
    pub fn from_axes(extents: &[f64], counts: &[usize]) -> Result<Self> {
        if extents.len() != counts.len() || extents.is_empty() || extents.len() > 2 {
            return Err(Error::Structural(format!(
                "mesh needs 1 or 2 axes with matching extents and node counts, got {} and {}",
                extents.len(),
                counts.len()
            )));
        }
        Self::build(extents.to_vec(), counts.to_vec())
    }

    /// Attach a uniform time axis `0 = t_0 < ... < t_steps = horizon`.
    pub fn with_time(mut self, horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(Error::Structural(format!(
                "time axis needs positive horizon and step count, got T={horizon}, steps={steps}"
            )));
        }
        self.horizon = horizon;
        self.steps = steps;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.volumes.len()
    }

    /// Dual cell volumes, one per node.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// `|Omega|` as the sum of dual cell volumes.
    pub fn measure(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.boundary[k]).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| !self.boundary[k]).collect()
    }

    /// Per-axis index of a node.
    pub fn index(&self, node: usize) -> Vec<usize> {
        multi_index(&self.counts, node)
    }

    /// Coordinates of a node, one entry per axis.
    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.index(node)
            .iter()
            .zip(&self.spacing)
            .map(|(&i, &h)| i as f64 * h)
            .collect()
    }

    /// Neighbour of `node` one step along `axis` in the positive direction.
    pub fn forward(&self, node: usize, axis: usize) -> Option<usize> {
        let idx = self.index(node);
        if idx[axis] + 1 >= self.counts[axis] {
            return None;
        }
        let stride: usize = self.counts[..axis].iter().product();
        Some(node + stride)
    }

    /// All edges of the mesh, axis 0 first.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            let h = self.spacing[axis];
            for node in 0..self.node_count() {
                if let Some(head) = self.forward(node, axis) {
                    // transverse dual width: volume without this axis' factor
                    let idx = self.index(node);
                    let mut width = 1.0;
                    for (other, &i) in idx.iter().enumerate() {
                        if other != axis {
                            let n = self.counts[other];
                            let ho = self.spacing[other];
                            width *= if i == 0 || i + 1 == n { 0.5 * ho } else { ho };
                        }
                    }
                    out.push(Edge {
                        axis,
                        tail: node,
                        head,
                        spacing: h,
                        measure: h * width,
                    });
                }
            }
        }
        out
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn has_time(&self) -> bool {
        self.steps > 0
    }

    pub fn dt(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.horizon / self.steps as f64
        }
    }

    /// Time levels `t_0, ..., t_steps`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|n| self.horizon * n as f64 / self.steps as f64)
            .collect()
    }
}

fn multi_index(counts: &[usize], mut k: usize) -> Vec<usize> {
    counts
        .iter()
        .map(|&n| {
            let i = k % n;
            k /= n;
            i
        })
        .collect()
}

/// Trapezoid weights of a (possibly non-uniform) time grid.
pub fn time_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let half = 0.5 * (times[i + 1] - times[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

/// Anything that can be integrated by a weighted nodal sum.
pub trait Sampled {
    fn values(&self) -> &[f64];
    fn weights(&self) -> &[f64];

    /// Measure of the underlying domain (`|Omega|` or `|Q_T|`).
    fn total_measure(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Weighted sum of `f(value)`.
    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.values()
            .iter()
            .zip(self.weights())
            .map(|(&v, &w)| w * f(v))
            .sum()
    }
}

/// Nodal values of a scalar field on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::Structural(format!(
                "expected {} nodal values, got {}",
                mesh.node_count(),
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.node_count();
        Self { mesh, values: vec![0.0; n] }
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        let n = mesh.node_count();
        Self { mesh, values: vec![c; n] }
    }

    /// Sample `f(coords)` at every node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(mesh: Arc<Mesh>, f: F) -> Self {
        let values = (0..mesh.node_count()).map(|k| f(&mesh.coords(k))).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// True when the field vanishes on every boundary node.
    pub fn is_admissible(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(k, &v)| !self.mesh.is_boundary(k) || v == 0.0)
    }

    /// Zero the boundary nodes.
    pub fn with_zero_boundary(mut self) -> Self {
        for k in 0..self.values.len() {
            if self.mesh.is_boundary(k) {
                self.values[k] = 0.0;
            }
        }
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Classical `L^p(Omega)` norm under the nodal quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        self.integrate(|v| v.abs().powf(p)).powf(1.0 / p)
    }

    pub fn same_mesh(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }
}

impl Sampled for GridFunction {
    fn values(&self) -> &[f64] {
        &self.values
    }

    fn weights(&self) -> &[f64] {
        self.mesh.volumes()
    }
}

/// A field on the space-time cylinder: one nodal slice per time level,
/// stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    mesh: Arc<Mesh>,
    times: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl SpaceTimeField {
    pub fn from_slices(mesh: Arc<Mesh>, times: Vec<f64>, slices: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != slices.len() || times.is_empty() {
            return Err(Error::Structural(format!(
                "{} time levels but {} slices",
                times.len(),
                slices.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structural("time levels must increase strictly".into()));
        }
        let n = mesh.node_count();
        let mut values = Vec::with_capacity(n * times.len());
        for s in &slices {
            if s.len() != n {
                return Err(Error::Structural(format!(
                    "slice has {} values, mesh has {n} nodes",
                    s.len()
                )));
            }
            values.extend_from_slice(s);
        }
        let tw = time_weights(&times);
        let weights = tw
            .iter()
            .flat_map(|&w| mesh.volumes().iter().map(move |&v| w * v))
            .collect();
        Ok(Self { mesh, times, values, weights })
    }

    /// Sample `f(x, t)` on the mesh nodes and the mesh time levels.
    pub fn from_fn<F: Fn(&[f64], f64) -> f64>(mesh: Arc<Mesh>, f: F) -> Result<Self> {
        if !mesh.has_time() {
            return Err(Error::Structural("mesh has no time axis".into()));
        }
        let times = mesh.times();
        Self::from_fn_on(mesh, times, f)
    }

    pub fn from_fn_on<F: Fn(&[f64], f64) -> f64>(
        mesh: Arc<Mesh>,
        times: Vec<f64>,
        f: F,
    ) -> Result<Self> {
        let coords: Vec<Vec<f64>> = (0..mesh.node_count()).map(|k| mesh.coords(k)).collect();
        let slices = times
            .iter()
            .map(|&t| coords.iter().map(|x| f(x, t)).collect())
            .collect();
        Self::from_slices(mesh, times, slices)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn levels(&self) -> usize {
        self.times.len()
    }

    pub fn slice(&self, level: usize) -> &[f64] {
        let n = self.mesh.node_count();
        &self.values[level * n..(level + 1) * n]
    }

    pub fn slice_function(&self, level: usize) -> GridFunction {
        GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: self.slice(level).to_vec(),
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = GridFunction> + '_ {
        (0..self.levels()).map(|n| self.slice_function(n))
    }

    /// Trapezoid weights of the time grid.
    pub fn time_weights(&self) -> Vec<f64> {
        time_weights(&self.times)
    }

    /// Same grid, new values.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn same_grid(&self, other: &SpaceTimeField) -> bool {
        (Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh)
            && self.times == other.times
    }
}

impl Sampled for SpaceTimeField {
    fn values(&self) -> &[f64] {
        &self.values
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_sum_to_domain_measure() {
        let m = Mesh::rectangle(2.0, 0.5, 7, 4).unwrap();
        assert!((m.measure() - 1.0).abs() < 1e-12);
        let m = Mesh::interval(3.0, 11).unwrap();
        assert!((m.measure() - 3.0).abs() < 1e-12);
        assert!(m.volumes().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn boundary_set() {
        let m = Mesh::rectangle(1.0, 1.0, 4, 3).unwrap();
        assert_eq!(m.boundary_nodes().len(), 4 * 3 - 2);
        assert_eq!(m.interior_nodes(), vec![5, 6]);
        let m = Mesh::interval(1.0, 5).unwrap();
        assert_eq!(m.boundary_nodes(), vec![0, 4]);
    }

    #[test]
    fn edge_measures_cover_domain_per_axis() {
        let m = Mesh::rectangle(1.0, 2.0, 5, 6).unwrap();
        for axis in 0..2 {
            let s: f64 = m.edges().iter().filter(|e| e.axis == axis).map(|e| e.measure).sum();
            assert!((s - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Mesh::interval(1.0, 1).is_err());
        assert!(Mesh::interval(-1.0, 4).is_err());
        assert!(Mesh::interval(1.0, 4).unwrap().with_time(1.0, 0).is_err());
    }

    #[test]
    fn space_time_weights() {
        let m = Arc::new(Mesh::interval(1.0, 9).unwrap().with_time(2.0, 8).unwrap());
        let f = SpaceTimeField::from_fn(m, |_, _| 1.0).unwrap();
        assert!((f.total_measure() - 2.0).abs() < 1e-12);
        assert_eq!(f.levels(), 9);
    }

    #[test]
    fn grid_function_length_checked() {
        let m = Arc::new(Mesh::interval(1.0, 4).unwrap());
        assert!(GridFunction::new(m.clone(), vec![0.0; 3]).is_err());
        let u = GridFunction::from_fn(m, |x| x[0] * (1.0 - x[0]));
        assert!(u.is_admissible());
    }
}
