use std::f64::consts::PI;

use crate::error::{invalid, Result};

use super::{point_to_spherical, PolarGrid, ScalarField};

/// Tolerance on `|center| - 1` accepted by the rotation routines.
pub const UNIT_TOL: f64 = 1e-12;

/// Rotation taking the north pole to `center`, stored as orthonormal columns.
///
/// The rotation is the minimal one about the axis `e_z x center`, so it
/// degenerates to the identity as `center` approaches the north pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    cols: [[f64; 3]; 3],
}

impl Frame {
    pub fn new(center: [f64; 3]) -> Result<Self> {
        let norm = (center[0].powi(2) + center[1].powi(2) + center[2].powi(2)).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!("center must be a unit vector, |center| = {norm}")));
        }
        let c = center;
        if c[0] == 0.0 && c[1] == 0.0 {
            return Ok(if c[2] > 0.0 {
                Self { cols: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
            } else {
                Self { cols: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]] }
            });
        }
        // Rodrigues with axis v = e_z x c, |v| = sin(alpha), cos(alpha) = c_z
        let (vx, vy) = (-c[1], c[0]);
        let k = 1.0 / (1.0 + c[2]);
        if c[2] > -0.5 {
            let e1 = [1.0 - vy * vy * k, vx * vy * k, -vy];
            let e2 = [vx * vy * k, 1.0 - vx * vx * k, vx];
            Ok(Self { cols: [e1, e2, c] })
        } else {
            // near the south pole 1 + c_z is tiny; go through the half turn about x
            let flipped = [c[0], -c[1], -c[2]];
            let inner = Self::new(flipped)?;
            let flip = |p: [f64; 3]| [p[0], -p[1], -p[2]];
            let [a, b, _] = inner.cols;
            Ok(Self { cols: [flip(a), flip(b), c] })
        }
    }

    pub fn center(&self) -> [f64; 3] {
        self.cols[2]
    }

    /// `R p`: maps pole-frame coordinates to world coordinates.
    #[inline]
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let [a, b, c] = &self.cols;
        [
            a[0] * p[0] + b[0] * p[1] + c[0] * p[2],
            a[1] * p[0] + b[1] * p[1] + c[1] * p[2],
            a[2] * p[0] + b[2] * p[1] + c[2] * p[2],
        ]
    }

    /// `R^T q`.
    #[inline]
    pub fn apply_inverse(&self, q: [f64; 3]) -> [f64; 3] {
        let [a, b, c] = &self.cols;
        [super::dot(*a, q), super::dot(*b, q), super::dot(*c, q)]
    }

    /// Point at geodesic distance `rho` from the center, at azimuth `phi` in the frame.
    pub fn point_at(&self, rho: f64, phi: f64) -> [f64; 3] {
        self.apply(super::spherical_to_point(rho, phi))
    }
}

#[inline]
fn row_value(v: &[f64], nt: usize, i: usize, t: f64) -> f64 {
    // t is an azimuth in units of dtheta, possibly outside [0, nt)
    let t = t.rem_euclid(nt as f64);
    let k0 = t.floor();
    let a = t - k0;
    let k0 = (k0 as usize).min(nt - 1);
    let k1 = if k0 + 1 == nt { 0 } else { k0 + 1 };
    (1.0 - a) * v[i * nt + k0] + a * v[i * nt + k1]
}

/// Bilinear interpolation at `(r, theta)`.
///
/// Between the outermost row and a pole the interpolant runs linearly in `r`
/// from the row mean (taken as the pole value) to the row value at `theta`,
/// which keeps it continuous through the pole.
pub fn interpolate(f: &ScalarField, r: f64, theta: f64) -> f64 {
    let g = f.grid();
    interpolate_raw(g, f.values(), r, theta)
}

pub(crate) fn row_mean(v: &[f64], nt: usize, i: usize) -> f64 {
    v[i * nt..(i + 1) * nt].iter().sum::<f64>() / nt as f64
}

pub(crate) fn interpolate_raw(g: &PolarGrid, v: &[f64], r: f64, theta: f64) -> f64 {
    let (nr, nt) = (g.n_r(), g.n_theta());
    let t = theta / g.dtheta();
    let s = (r.clamp(0.0, PI) / g.dr()) - 0.5;
    if s < 0.0 {
        let b = 2.0 * (s + 0.5);
        return (1.0 - b) * row_mean(v, nt, 0) + b * row_value(v, nt, 0, t);
    }
    let i0 = s.floor() as usize;
    if i0 >= nr - 1 {
        let b = 2.0 * (s - (nr - 1) as f64);
        return (1.0 - b) * row_value(v, nt, nr - 1, t) + b * row_mean(v, nt, nr - 1);
    }
    let b = s - i0 as f64;
    (1.0 - b) * row_value(v, nt, i0, t) + b * row_value(v, nt, i0 + 1, t)
}

/// Interpolated value at an embedded unit vector.
pub fn sample_point(f: &ScalarField, p: [f64; 3]) -> f64 {
    let (r, t) = point_to_spherical(p);
    interpolate(f, r, t)
}

/// Resamples `f` in the frame whose north pole is `center`: the result `g`
/// satisfies `g(p) = f(R p)`, so `g` at radius `rho` is `f` on the circle of
/// radius `rho` about `center`.
pub fn rotate_to_pole(f: &ScalarField, center: [f64; 3]) -> Result<ScalarField> {
    let frame = Frame::new(center)?;
    Ok(resample(f, |p| frame.apply(p)))
}

/// Inverse of [`rotate_to_pole`] up to interpolation error.
pub fn rotate_from_pole(g: &ScalarField, center: [f64; 3]) -> Result<ScalarField> {
    let frame = Frame::new(center)?;
    Ok(resample(g, |p| frame.apply_inverse(p)))
}

fn resample(f: &ScalarField, map: impl Fn([f64; 3]) -> [f64; 3]) -> ScalarField {
    let g = f.grid();
    let values = g.node_points().into_iter().map(|p| sample_point(f, map(p))).collect();
    ScalarField::from_raw(g.clone(), values)
}
