//! The two warped product families.
//!
//! `CosMetric` is `g = g_{S^2} + f^2 dphi^2` on `S^2 x S^1` with `f` sampled on
//! a [`PolarGrid`]; `SocMetric` is `g = dphi^2 + h^2 g_{S^2}` on `S^1 x S^2` with
//! `h` sampled on a [`CircleGrid`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::harmonics::laplacian_errors;
use crate::report::InequalityReport;
use crate::spheregrid::{
    derivative, derivative_sq, integrate, interpolate_circle, laplacian, second_derivative, CircleField, CircleGrid,
    PolarGrid, ScalarField,
};

/// Warped product `S^2 x_f S^1` with a positive warping function.
#[derive(Debug, Clone)]
pub struct CosMetric {
    f: ScalarField,
}

impl CosMetric {
    pub fn new(f: ScalarField) -> Result<Self> {
        f.require_positive()?;
        Ok(Self { f })
    }

    pub fn warp(&self) -> &ScalarField {
        &self.f
    }

    pub fn grid(&self) -> &std::sync::Arc<PolarGrid> {
        self.f.grid()
    }
}

/// Warped product `S^1 x_h S^2` with a positive warping function.
#[derive(Debug, Clone)]
pub struct SocMetric {
    h: CircleField,
}

impl SocMetric {
    pub fn new(h: CircleField) -> Result<Self> {
        h.require_positive()?;
        Ok(Self { h })
    }

    pub fn warp(&self) -> &CircleField {
        &self.h
    }

    pub fn grid(&self) -> &std::sync::Arc<CircleGrid> {
        self.h.grid()
    }
}

/// `Scal = 2 - 2 (Laplacian f) / f`.
pub fn scalar_curvature_cos(m: &CosMetric) -> ScalarField {
    let lap = laplacian(&m.f);
    lap.zip_map(&m.f, |l, f| 2.0 - 2.0 * l / f).expect("same grid")
}

/// `2 pi int f dA`.
pub fn volume_cos(m: &CosMetric) -> f64 {
    2.0 * PI * integrate(&m.f)
}

/// Ten times the worst area-weighted RMS Laplacian error over harmonics of
/// degree at most 4, cached per grid shape.
pub fn default_nnsc_tolerance(grid: &std::sync::Arc<PolarGrid>) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let key = (grid.n_r(), grid.n_theta());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return *v;
    }
    let tol = 10.0 * laplacian_errors(grid, 4).iter().map(|e| e.rms).fold(0.0, f64::max);
    cache.lock().expect("cache lock").insert(key, tol);
    tol
}

/// Nonnegative scalar curvature for `CosMetric`, as `max (Laplacian f - f) <= tol`.
///
/// `Scal >= 0` is equivalent to `Laplacian f <= f` because `f > 0`. The report has
/// `rhs = 0`, so `slack = -max(Laplacian f - f)`.
pub fn nnsc_check_cos(m: &CosMetric, tol: Option<f64>) -> InequalityReport {
    let tol = tol.unwrap_or_else(|| default_nnsc_tolerance(m.grid()));
    let lap = laplacian(&m.f);
    let excess = lap.zip_map(&m.f, |l, f| l - f).expect("same grid");
    let worst = excess.argmax();
    InequalityReport::new("NNSC (cos)", excess.values()[worst], 0.0, tol).at(worst)
}

/// `Scal = -4 h''/h + 2 (1 - h'^2)/h^2`.
pub fn scalar_curvature_soc(m: &SocMetric) -> CircleField {
    let d2 = second_derivative(&m.h);
    let dsq = derivative_sq(&m.h);
    let vals =
        m.h.values()
            .iter()
            .zip(d2.values().iter().zip(dsq.values()))
            .map(|(&h, (&hpp, &hp2))| -4.0 * hpp / h + 2.0 * (1.0 - hp2) / (h * h))
            .collect();
    CircleField::new(m.h.grid().clone(), vals).expect("finite curvature")
}

/// Ten times the sup error of the discrete `h''` and `h'^2` on `cos(phi)`.
pub fn default_soc_tolerance(grid: &std::sync::Arc<CircleGrid>) -> f64 {
    let mut worst = 0.0_f64;
    {
        let jf = 1.0_f64;
        let h = CircleField::from_fn(grid, |p| (jf * p).cos());
        let d2 = second_derivative(&h);
        let dsq = derivative_sq(&h);
        for (m, &p) in grid.nodes().iter().enumerate() {
            worst = worst.max((d2.values()[m] + jf * jf * (jf * p).cos()).abs());
            worst = worst.max((dsq.values()[m] - (jf * (jf * p).sin()).powi(2)).abs());
        }
    }
    10.0 * worst
}

/// Nonnegative scalar curvature for `SocMetric`, as `max (2 h h'' + h'^2 - 1) <= tol`
/// (which is `-h^2 Scal / 2`).
pub fn nnsc_check_soc(m: &SocMetric, tol: Option<f64>) -> InequalityReport {
    let tol = tol.unwrap_or_else(|| default_soc_tolerance(m.grid()));
    let d2 = second_derivative(&m.h);
    let dsq = derivative_sq(&m.h);
    let excess: Vec<f64> =
        m.h.values()
            .iter()
            .zip(d2.values().iter().zip(dsq.values()))
            .map(|(&h, (&hpp, &hp2))| 2.0 * h * hpp + hp2 - 1.0)
            .collect();
    let worst = crate::spheregrid::argmax(&excess);
    InequalityReport::new("NNSC (soc)", excess[worst], 0.0, tol).at(worst)
}

/// `|h'| <= 1`, which holds whenever the scalar curvature is nonnegative.
pub fn gradient_bound_soc(m: &SocMetric, tol: f64) -> InequalityReport {
    let d = derivative(&m.h);
    let abs: Vec<f64> = d.values().iter().map(|v| v.abs()).collect();
    let worst = crate::spheregrid::argmax(&abs);
    let nnsc = nnsc_check_soc(m, None);
    let mut r = InequalityReport::new("|h'| <= 1", abs[worst], 1.0, tol).at(worst).with_hypotheses(nnsc.pass);
    if !nnsc.pass {
        r = r.note(format!("scalar curvature is negative somewhere (excess {:.3e})", nnsc.lhs));
    }
    r
}

/// Mean curvature `2 |h'(phi)| / h(phi)` of the slice `{phi} x S^2`.
pub fn slice_mean_curvature_soc(m: &SocMetric, phi: f64) -> f64 {
    let d = derivative(&m.h);
    2.0 * interpolate_circle(&d, phi).abs() / interpolate_circle(&m.h, phi)
}

/// The warp bounds that follow from nonnegative curvature plus a diameter
/// bound `D` and a lower bound `A` on the area of minimizing 2-spheres.
#[derive(Debug, Clone, Serialize)]
pub struct SocWarpBounds {
    /// `min h <= D / pi`.
    pub min_from_diameter: InequalityReport,
    /// `sqrt(A / 4 pi) <= min h`.
    pub min_from_area: InequalityReport,
    /// `max h <= D / pi + 2 pi`.
    pub max_from_diameter: InequalityReport,
}

pub fn soc_min_warp_bounds(m: &SocMetric, diameter: f64, area: f64, tol: f64) -> Result<SocWarpBounds> {
    if !(diameter > 0.0) || !(area > 0.0) {
        return Err(invalid(format!("diameter and area must be positive, got D = {diameter}, A = {area}")));
    }
    let hyp = nnsc_check_soc(m, None).pass;
    let lo = m.h.values().iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
    let hi =
        m.h.values().iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    Ok(SocWarpBounds {
        min_from_diameter: InequalityReport::new("min h <= D/pi", lo.1, diameter / PI, tol)
            .at(lo.0)
            .with_hypotheses(hyp),
        min_from_area: InequalityReport::new("sqrt(A/4pi) <= min h", (area / (4.0 * PI)).sqrt(), lo.1, tol)
            .at(lo.0)
            .with_hypotheses(hyp),
        max_from_diameter: InequalityReport::new("max h <= D/pi + 2pi", hi.1, diameter / PI + 2.0 * PI, tol)
            .at(hi.0)
            .with_hypotheses(hyp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::Harmonic;

    #[test]
    fn round_product_has_scalar_curvature_two() {
        let g = PolarGrid::square(32).unwrap();
        let m = CosMetric::new(ScalarField::constant(&g, 1.0)).unwrap();
        assert!(scalar_curvature_cos(&m).values().iter().all(|s| (s - 2.0).abs() < 1e-12));
        let r = nnsc_check_cos(&m, None);
        assert!(r.pass && (r.slack - 1.0).abs() < 1e-12);
        assert!((volume_cos(&m) - 8.0 * PI * PI).abs() < 8.0 * PI * PI / 1024.0);
    }

    #[test]
    fn harmonic_warp_curvature() {
        // f = 2 + 0.5 Y_1: Laplacian f = -Y_1, Scal = 2 + 2 Y_1 / f
        let g = PolarGrid::square(128).unwrap();
        let y = Harmonic::new(1, 0).unwrap();
        let m = CosMetric::new(ScalarField::from_fn(&g, |r, t| 2.0 + 0.5 * y.eval(r, t))).unwrap();
        let s = scalar_curvature_cos(&m);
        let err = (0..g.len())
            .map(|idx| {
                let (i, k) = g.coords(idx);
                let yv = y.eval(g.r_nodes()[i], g.theta_nodes()[k]);
                (s.values()[idx] - (2.0 + 2.0 * yv / (2.0 + 0.5 * yv))).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        assert!(nnsc_check_cos(&m, None).pass);
    }

    #[test]
    fn nonpositive_warp_rejected() {
        let g = PolarGrid::new(4, 4).unwrap();
        assert!(CosMetric::new(ScalarField::constant(&g, 0.0)).is_err());
        let c = CircleGrid::new(8).unwrap();
        assert!(SocMetric::new(CircleField::constant(&c, -1.0)).is_err());
    }

    #[test]
    fn deep_dip_fails_nnsc() {
        let g = PolarGrid::square(64).unwrap();
        let y = Harmonic::new(3, 2).unwrap();
        let m = CosMetric::new(ScalarField::from_fn(&g, |r, t| 1.0 + 0.9 * y.eval(r, t))).unwrap();
        assert!(!nnsc_check_cos(&m, None).pass);
    }

    #[test]
    fn soc_constant_warp() {
        let c = CircleGrid::new(64).unwrap();
        for h0 in [0.5, 1.0, 3.0] {
            let m = SocMetric::new(CircleField::constant(&c, h0)).unwrap();
            let s = scalar_curvature_soc(&m);
            assert!(s.values().iter().all(|v| (v - 2.0 / (h0 * h0)).abs() < 1e-12));
            assert_eq!(slice_mean_curvature_soc(&m, 1.0), 0.0);
        }
        let m = SocMetric::new(CircleField::constant(&c, 1.0)).unwrap();
        let b = soc_min_warp_bounds(&m, PI, 4.0 * PI, 1e-12).unwrap();
        assert!(b.min_from_diameter.pass && b.min_from_area.pass && b.max_from_diameter.pass);
        assert!(b.min_from_diameter.slack.abs() < 1e-12 && b.min_from_area.slack.abs() < 1e-12);
        assert!(soc_min_warp_bounds(&m, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn soc_gradient_bound_with_bad_curvature() {
        // 2 eps (c - eps) > 1 so the curvature goes negative, yet |h'| stays below 1
        let c = CircleGrid::new(256).unwrap();
        let m = SocMetric::new(CircleField::from_fn(&c, |p| 2.0 + 0.5 * p.sin())).unwrap();
        let r = gradient_bound_soc(&m, 1e-9);
        assert!(r.pass);
        assert!(!r.hypotheses_hold, "{:?} {:?}", r, nnsc_check_soc(&m, None));
        let m = SocMetric::new(CircleField::from_fn(&c, |p| 2.0 + 0.25 * p.sin())).unwrap();
        let r = gradient_bound_soc(&m, 1e-9);
        assert!(r.pass && r.hypotheses_hold);
    }
}
