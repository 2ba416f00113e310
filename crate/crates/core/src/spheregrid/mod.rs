//! Quadrature grids on the round unit sphere and the unit circle, sampled
//! fields on them, and the discrete calculus the rest of the crate uses.

mod circle;
mod io;
mod ops;
mod rotate;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use circle::{
    bv_norm, derivative, derivative_sq, face_form, integrate_circle, interpolate_circle, lq_norm_circle,
    second_derivative, CircleField, CircleGrid,
};
pub use io::{read_field, write_circle_field, write_sphere_field, AnyField, FieldFile, GridSpec};
pub use ops::{
    dirichlet_form, gradient_norm, integrate, laplacian, lq_norm, partial_r, partial_theta, w1p_norm,
    weighted_dirichlet_form,
};
pub use rotate::{interpolate, rotate_from_pole, rotate_to_pole, sample_point, Frame};

/// Minimum resolution in either direction.
pub const MIN_NODES: usize = 4;

/// Polar-coordinate grid on the unit sphere.
///
/// Radial nodes sit at cell midpoints `r_i = (i + 1/2) pi / n_r`, so neither
/// pole is a node. Azimuthal nodes are `theta_k = 2 pi k / n_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    n_r: usize,
    n_theta: usize,
    dr: f64,
    dtheta: f64,
    r: Vec<f64>,
    sin_r: Vec<f64>,
    theta: Vec<f64>,
    weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Arc<Self>> {
        if n_r < MIN_NODES {
            return Err(Error::GridTooCoarse { what: "n_r", got: n_r, min: MIN_NODES });
        }
        if n_theta < MIN_NODES {
            return Err(Error::GridTooCoarse { what: "n_theta", got: n_theta, min: MIN_NODES });
        }
        let dr = PI / n_r as f64;
        let dtheta = 2.0 * PI / n_theta as f64;
        let r: Vec<f64> = (0..n_r).map(|i| (i as f64 + 0.5) * dr).collect();
        let sin_r: Vec<f64> = r.iter().map(|r| r.sin()).collect();
        let theta = (0..n_theta).map(|k| k as f64 * dtheta).collect();
        let weights = sin_r.iter().flat_map(|s| std::iter::repeat_n(s * dr * dtheta, n_theta)).collect();
        Ok(Arc::new(Self { n_r, n_theta, dr, dtheta, r, sin_r, theta, weights }))
    }

    /// Square-ish grid with `n` radial and `2n` azimuthal nodes.
    pub fn square(n: usize) -> Result<Arc<Self>> {
        Self::new(n, 2 * n)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn sin_r(&self) -> &[f64] {
        &self.sin_r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_theta + k
    }

    /// Inverse of [`PolarGrid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_theta, idx % self.n_theta)
    }

    /// Embedded unit vector of node `(i, k)`.
    pub fn node_point(&self, i: usize, k: usize) -> [f64; 3] {
        spherical_to_point(self.r[i], self.theta[k])
    }

    /// Node embedded in R^3, indexed like the field values.
    pub fn node_points(&self) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|idx| {
                let (i, k) = self.coords(idx);
                self.node_point(i, k)
            })
            .collect()
    }

    /// Node antipodal to `(i, k)`. Exact when `n_theta` is even, otherwise the
    /// azimuth is rounded down.
    pub fn antipode(&self, i: usize, k: usize) -> (usize, usize) {
        (self.n_r - 1 - i, (k + self.n_theta / 2) % self.n_theta)
    }

    /// Exact area of the geodesic cap of radius `rho` (clamped to `[0, pi]`).
    pub fn cap_area(rho: f64) -> f64 {
        2.0 * PI * (1.0 - rho.clamp(0.0, PI).cos())
    }
}

pub fn spherical_to_point(r: f64, theta: f64) -> [f64; 3] {
    let s = r.sin();
    [s * theta.cos(), s * theta.sin(), r.cos()]
}

/// `(r, theta)` of a unit vector, with `theta` in `[0, 2 pi)`.
pub fn point_to_spherical(p: [f64; 3]) -> (f64, f64) {
    let r = p[0].hypot(p[1]).atan2(p[2]);
    let mut t = p[1].atan2(p[0]);
    if t < 0.0 {
        t += 2.0 * PI;
    }
    (r, t)
}

/// Great-circle distance between unit vectors.
pub fn sphere_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    // atan2 form stays accurate for nearly equal and nearly antipodal points
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    c.atan2(d)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Real values sampled on a [`PolarGrid`], stored row-major in `(i, k)`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<PolarGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<PolarGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: &Arc<PolarGrid>, c: f64) -> Self {
        Self::from_raw(grid.clone(), vec![c; grid.len()])
    }

    /// Samples `f(r, theta)` at every node.
    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (i, k) = grid.coords(idx);
                f(grid.r[i], grid.theta[k])
            })
            .collect();
        Self::from_raw(grid.clone(), values)
    }

    /// Samples a function of the embedded point.
    pub fn from_point_fn(grid: &Arc<PolarGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = grid.node_points().into_iter().map(f).collect();
        Self::from_raw(grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.grid.clone(), values))
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the smallest value; the lowest index wins ties.
    pub fn argmin(&self) -> usize {
        argmin(&self.values)
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.values)
    }

    /// Errors unless every value is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            Some((index, &value)) => Err(Error::NonPositive { index, value }),
            None => Ok(()),
        }
    }

    pub fn require_nonnegative(&self) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            Some((index, &value)) => Err(Error::NegativeTestFunction { index, value }),
            None => Ok(()),
        }
    }
}

/// Mean of row `i`.
pub fn row_mean_of(f: &ScalarField, i: usize) -> f64 {
    rotate::row_mean(f.values(), f.grid().n_theta(), i)
}

pub fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_close_to_sphere_area() {
        for n in [4, 8, 16, 64, 256] {
            let g = PolarGrid::square(n).unwrap();
            let s: f64 = g.weights().iter().sum();
            let bound = 4.0 * PI / (n * n) as f64;
            assert!((s - 4.0 * PI).abs() <= bound, "n = {n}: {s}");
        }
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(PolarGrid::new(3, 8), Err(Error::GridTooCoarse { what: "n_r", .. })));
        assert!(PolarGrid::new(8, 2).is_err());
    }

    #[test]
    fn field_validation() {
        let g = PolarGrid::new(4, 4).unwrap();
        assert!(matches!(
            ScalarField::new(g.clone(), vec![1.0; 15]),
            Err(Error::ShapeMismatch { expected: 16, got: 15 })
        ));
        let mut v = vec![1.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(g.clone(), v), Err(Error::NonFinite { index: 3, .. })));
        let f = ScalarField::from_fn(&g, |r, _| r.cos());
        assert!(f.require_positive().is_err());
    }

    #[test]
    fn distance_matches_acos() {
        let a = spherical_to_point(0.3, 1.0);
        let b = spherical_to_point(2.0, 4.0);
        assert!((sphere_distance(a, b) - dot(a, b).acos()).abs() < 1e-14);
        assert!(sphere_distance(a, a).abs() < 1e-15);
    }

    #[test]
    fn antipode_is_antipodal() {
        let g = PolarGrid::new(6, 10).unwrap();
        let (i, k) = g.antipode(1, 7);
        let p = g.node_point(1, 7);
        let q = g.node_point(i, k);
        assert!((dot(p, q) + 1.0).abs() < 1e-14);
    }
}
