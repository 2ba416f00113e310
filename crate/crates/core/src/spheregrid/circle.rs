use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

use super::MIN_NODES;

/// Uniform periodic grid `phi_m = 2 pi m / n` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    n: usize,
    dphi: f64,
    phi: Vec<f64>,
}

impl CircleGrid {
    pub fn new(n_phi: usize) -> Result<Arc<Self>> {
        if n_phi < MIN_NODES {
            return Err(Error::GridTooCoarse { what: "n_phi", got: n_phi, min: MIN_NODES });
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let phi = (0..n_phi).map(|m| m as f64 * dphi).collect();
        Ok(Arc::new(Self { n: n_phi, dphi, phi }))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }

    /// Every node carries the same weight `2 pi / n`.
    pub fn weight(&self) -> f64 {
        self.dphi
    }

    pub fn nodes(&self) -> &[f64] {
        &self.phi
    }
}

/// Values sampled on a [`CircleGrid`].
#[derive(Debug, Clone)]
pub struct CircleField {
    grid: Arc<CircleGrid>,
    values: Vec<f64>,
}

impl CircleField {
    pub fn new(grid: Arc<CircleGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<CircleGrid>, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn from_fn(grid: &Arc<CircleGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid.clone(), grid.phi.iter().map(|&p| f(p)).collect())
    }

    pub fn constant(grid: &Arc<CircleGrid>, c: f64) -> Self {
        Self::from_raw(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<CircleGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
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

    #[inline]
    pub(crate) fn next(&self, m: usize) -> usize {
        if m + 1 == self.grid.n {
            0
        } else {
            m + 1
        }
    }

    #[inline]
    pub(crate) fn prev(&self, m: usize) -> usize {
        if m == 0 {
            self.grid.n - 1
        } else {
            m - 1
        }
    }
}

pub fn integrate_circle(h: &CircleField) -> f64 {
    h.grid.weight() * h.values.iter().sum::<f64>()
}

/// Centered first derivative.
pub fn derivative(h: &CircleField) -> CircleField {
    let inv = 0.5 / h.grid.dphi;
    let v = &h.values;
    let out = (0..v.len()).map(|m| (v[h.next(m)] - v[h.prev(m)]) * inv).collect();
    CircleField::from_raw(h.grid.clone(), out)
}

/// Three-point second derivative.
pub fn second_derivative(h: &CircleField) -> CircleField {
    let inv = 1.0 / (h.grid.dphi * h.grid.dphi);
    let v = &h.values;
    let out = (0..v.len()).map(|m| (v[h.next(m)] - 2.0 * v[m] + v[h.prev(m)]) * inv).collect();
    CircleField::from_raw(h.grid.clone(), out)
}

/// `h'^2` as the mean of the squared one-sided differences on the two
/// adjacent faces. Pairs with [`face_form`] so that discrete integration by
/// parts holds exactly.
pub fn derivative_sq(h: &CircleField) -> CircleField {
    let d = h.grid.dphi;
    let v = &h.values;
    let out = (0..v.len())
        .map(|m| {
            let a = (v[h.next(m)] - v[m]) / d;
            let b = (v[m] - v[h.prev(m)]) / d;
            0.5 * (a * a + b * b)
        })
        .collect();
    CircleField::from_raw(h.grid.clone(), out)
}

/// `sum over faces of weight_face * (D a)(D b) * dphi`, with the weight
/// averaged from the two face endpoints. Without a weight this is the
/// discrete `int a' b' dphi`.
pub fn face_form(a: &CircleField, b: &CircleField, weight: Option<&CircleField>) -> Result<f64> {
    a.same_grid(b)?;
    if let Some(w) = weight {
        a.same_grid(w)?;
    }
    let d = a.grid.dphi;
    let total: f64 = (0..a.values.len())
        .map(|m| {
            let n = a.next(m);
            let w = weight.map_or(1.0, |w| 0.5 * (w.values[m] + w.values[n]));
            w * (a.values[n] - a.values[m]) * (b.values[n] - b.values[m])
        })
        .sum();
    Ok(total / d)
}

pub fn lq_norm_circle(h: &CircleField, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(invalid(format!("L^q exponent must be finite and at least 1, got {q}")));
    }
    let s: f64 = h.values.iter().map(|v| v.abs().powf(q)).sum::<f64>() * h.grid.weight();
    Ok(s.powf(1.0 / q))
}

/// `int |h'| + int |h''|`.
pub fn bv_norm(h: &CircleField) -> f64 {
    let w = h.grid.weight();
    let d1: f64 = derivative(h).values.iter().map(|v| v.abs()).sum();
    let d2: f64 = second_derivative(h).values.iter().map(|v| v.abs()).sum();
    w * (d1 + d2)
}

/// Periodic linear interpolation.
pub fn interpolate_circle(h: &CircleField, phi: f64) -> f64 {
    let n = h.grid.n;
    let t = (phi / h.grid.dphi).rem_euclid(n as f64);
    let m0 = (t.floor() as usize).min(n - 1);
    let a = t - m0 as f64;
    (1.0 - a) * h.values[m0] + a * h.values[h.next(m0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_quadrature_is_spectral() {
        let g = CircleGrid::new(32).unwrap();
        let h = CircleField::from_fn(&g, |p| 2.0 + p.sin() + (3.0 * p).cos().powi(2));
        assert!((integrate_circle(&h) - (4.0 * PI + PI)).abs() < 1e-12);
    }

    #[test]
    fn bv_norm_of_sine() {
        let g = CircleGrid::new(1024).unwrap();
        let h = CircleField::from_fn(&g, f64::sin);
        assert!((bv_norm(&h) - 8.0).abs() < 1e-4);
        assert!(bv_norm(&CircleField::constant(&g, 3.0)) == 0.0);
    }

    #[test]
    fn face_form_integrates_by_parts() {
        let g = CircleGrid::new(50).unwrap();
        let a = CircleField::from_fn(&g, |p| p.sin() + 0.2 * (2.0 * p).cos());
        let b = CircleField::from_fn(&g, |p| 1.0 + 0.5 * (3.0 * p).sin());
        let lhs = face_form(&a, &b, None).unwrap();
        let dd = second_derivative(&a);
        let rhs: f64 = -g.weight() * dd.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn interpolation_wraps() {
        let g = CircleGrid::new(8).unwrap();
        let h = CircleField::from_fn(&g, |p| p.cos());
        assert!((interpolate_circle(&h, 2.0 * PI) - 1.0).abs() < 1e-14);
        assert!((interpolate_circle(&h, -g.dphi()) - h.values()[7]).abs() < 1e-14);
    }

    #[test]
    fn derivatives_are_second_order() {
        let mut errs = Vec::new();
        for n in [64, 128] {
            let g = CircleGrid::new(n).unwrap();
            let h = CircleField::from_fn(&g, |p| (2.0 * p).sin());
            let d = derivative(&h);
            let e =
                g.nodes().iter().zip(d.values()).map(|(p, v)| (v - 2.0 * (2.0 * p).cos()).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 3.9);
        assert!(lq_norm_circle(&CircleField::constant(&CircleGrid::new(4).unwrap(), 1.0), 0.0).is_err());
    }
}
