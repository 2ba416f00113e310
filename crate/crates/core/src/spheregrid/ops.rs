use crate::error::{invalid, Result};

use super::{PolarGrid, ScalarField};

/// Quadrature `sum w_ik f_ik`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid().weights().iter().zip(f.values()).map(|(w, v)| w * v).sum()
}

/// Conservative five-point Laplace-Beltrami operator.
///
/// The radial part is written in flux form with face factors `sin(r_i +- dr/2)`,
/// which vanish at the poles, so no ghost rows are needed there. Constants are
/// annihilated exactly and `integrate(laplacian(f))` is zero up to roundoff.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let (nr, nt) = (g.n_r(), g.n_theta());
    let (h, dt) = (g.dr(), g.dtheta());
    let v = f.values();
    let mut out = vec![0.0; g.len()];
    for i in 0..nr {
        let s = g.sin_r()[i];
        let r = g.r_nodes()[i];
        let s_up = if i + 1 < nr { (r + 0.5 * h).sin() } else { 0.0 };
        let s_dn = if i > 0 { (r - 0.5 * h).sin() } else { 0.0 };
        let radial = 1.0 / (h * h * s);
        let azim = 1.0 / (dt * dt * s * s);
        for k in 0..nt {
            let c = v[i * nt + k];
            let up = if i + 1 < nr { s_up * (v[(i + 1) * nt + k] - c) } else { 0.0 };
            let dn = if i > 0 { s_dn * (c - v[(i - 1) * nt + k]) } else { 0.0 };
            let kp = if k + 1 == nt { 0 } else { k + 1 };
            let km = if k == 0 { nt - 1 } else { k - 1 };
            let lap_t = v[i * nt + kp] - 2.0 * c + v[i * nt + km];
            out[i * nt + k] = (up - dn) * radial + lap_t * azim;
        }
    }
    ScalarField::from_raw(g.clone(), out)
}

/// Value of row `i` at azimuth `theta + pi`, used as the ghost row across a pole.
fn reflected(g: &PolarGrid, v: &[f64], i: usize, k: usize) -> f64 {
    let nt = g.n_theta();
    if nt.is_multiple_of(2) {
        v[i * nt + (k + nt / 2) % nt]
    } else {
        let t = k as f64 + 0.5 * nt as f64;
        let k0 = t.floor() as usize;
        let a = t - k0 as f64;
        (1.0 - a) * v[i * nt + k0 % nt] + a * v[i * nt + (k0 + 1) % nt]
    }
}

/// Centered `df/dr`. Across a pole the ghost value is the same row at the
/// opposite azimuth.
pub fn partial_r(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let (nr, nt) = (g.n_r(), g.n_theta());
    let v = f.values();
    let inv = 0.5 / g.dr();
    let mut out = vec![0.0; g.len()];
    for i in 0..nr {
        for k in 0..nt {
            let up = if i + 1 < nr { v[(i + 1) * nt + k] } else { reflected(g, v, i, k) };
            let dn = if i > 0 { v[(i - 1) * nt + k] } else { reflected(g, v, i, k) };
            out[i * nt + k] = (up - dn) * inv;
        }
    }
    ScalarField::from_raw(g.clone(), out)
}

/// Centered `df/dtheta` (periodic).
pub fn partial_theta(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let nt = g.n_theta();
    let v = f.values();
    let inv = 0.5 / g.dtheta();
    let out = (0..g.len())
        .map(|idx| {
            let (i, k) = (idx / nt, idx % nt);
            let kp = (k + 1) % nt;
            let km = (k + nt - 1) % nt;
            (v[i * nt + kp] - v[i * nt + km]) * inv
        })
        .collect();
    ScalarField::from_raw(g.clone(), out)
}

/// `|grad f|` in the round metric from centered differences.
pub fn gradient_norm(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let fr = partial_r(f);
    let ft = partial_theta(f);
    let nt = g.n_theta();
    let out = fr
        .values()
        .iter()
        .zip(ft.values())
        .enumerate()
        .map(|(idx, (a, b))| {
            let s = g.sin_r()[idx / nt];
            (a * a + b * b / (s * s)).sqrt()
        })
        .collect();
    ScalarField::from_raw(g.clone(), out)
}

/// Discrete `int <grad f, grad g> dA` on cell faces.
///
/// This is the exact adjoint of [`laplacian`]:
/// `dirichlet_form(f, g) == -integrate(g * laplacian(f))` up to roundoff.
pub fn dirichlet_form(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    weighted_faces(f, g, None)
}

/// Like [`dirichlet_form`] with an extra weight, averaged onto each face.
pub fn weighted_dirichlet_form(f: &ScalarField, g: &ScalarField, weight: &ScalarField) -> Result<f64> {
    f.same_grid(weight)?;
    weighted_faces(f, g, Some(weight.values()))
}

fn weighted_faces(f: &ScalarField, g: &ScalarField, weight: Option<&[f64]>) -> Result<f64> {
    f.same_grid(g)?;
    let grid = f.grid();
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    let (h, dt) = (grid.dr(), grid.dtheta());
    let (a, b) = (f.values(), g.values());
    let wavg = |p: usize, q: usize| weight.map_or(1.0, |w| 0.5 * (w[p] + w[q]));
    let mut total = 0.0;
    for i in 0..nr {
        let s = grid.sin_r()[i];
        let c_theta = h / (s * dt);
        let c_r = if i + 1 < nr { (grid.r_nodes()[i] + 0.5 * h).sin() * dt / h } else { 0.0 };
        for k in 0..nt {
            let p = i * nt + k;
            let q = i * nt + (k + 1) % nt;
            total += c_theta * wavg(p, q) * (a[q] - a[p]) * (b[q] - b[p]);
            if i + 1 < nr {
                let q = p + nt;
                total += c_r * wavg(p, q) * (a[q] - a[p]) * (b[q] - b[p]);
            }
        }
    }
    Ok(total)
}

/// `(int |f|^q)^(1/q)` for `q >= 1`.
pub fn lq_norm(f: &ScalarField, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(invalid(format!("L^q exponent must be finite and at least 1, got {q}")));
    }
    let s: f64 = f.grid().weights().iter().zip(f.values()).map(|(w, v)| w * v.abs().powf(q)).sum();
    Ok(s.powf(1.0 / q))
}

/// `(int |f|^p + |grad f|^p)^(1/p)` for `p >= 1`.
pub fn w1p_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("Sobolev exponent must be finite and at least 1, got {p}")));
    }
    let grad = gradient_norm(f);
    let s: f64 = f
        .grid()
        .weights()
        .iter()
        .zip(f.values().iter().zip(grad.values()))
        .map(|(w, (v, d))| w * (v.abs().powf(p) + d.powf(p)))
        .sum();
    Ok(s.powf(1.0 / p))
}
