//! Distributional scalar curvature of the warped products against the
//! isometric product background `g_0`, together with the classical total
//! scalar curvature for comparison.
//!
//! Test functions enter only through their fiber (cos) or spherical (soc)
//! averages `u_bar`, which callers supply directly.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{scalar_curvature_cos, scalar_curvature_soc, CosMetric, SocMetric};
use crate::spheregrid::{
    derivative, derivative_sq, dirichlet_form, face_form, gradient_norm, integrate, integrate_circle, partial_r,
    partial_theta, weighted_dirichlet_form, CircleField, PolarGrid, ScalarField,
};

/// Connection data of `S^2 x_f S^1` relative to the product background.
#[derive(Debug, Clone)]
pub struct LLDataCos {
    pub gamma_r_phiphi: ScalarField,
    pub gamma_theta_phiphi: ScalarField,
    pub gamma_phi_rphi: ScalarField,
    pub gamma_phi_thetaphi: ScalarField,
    /// `(V^r, V^theta)`; the fiber component vanishes.
    pub v: [ScalarField; 2],
    pub f_fn: ScalarField,
    pub density: ScalarField,
}

pub fn ll_assemble_cos(m: &CosMetric) -> LLDataCos {
    let f = m.warp();
    let g = f.grid();
    let nt = g.n_theta();
    let fr = partial_r(f);
    let ft = partial_theta(f);
    let grad = gradient_norm(f);
    let inv_sin2 = |idx: usize| 1.0 / g.sin_r()[idx / nt].powi(2);
    let build = |h: &dyn Fn(usize, f64, f64, f64) -> f64| {
        let vals = (0..g.len()).map(|idx| h(idx, f.values()[idx], fr.values()[idx], ft.values()[idx])).collect();
        ScalarField::new(g.clone(), vals).expect("finite connection data")
    };
    LLDataCos {
        gamma_r_phiphi: build(&|_, f, fr, _| -f * fr),
        gamma_theta_phiphi: build(&|i, f, _, ft| -inv_sin2(i) * f * ft),
        gamma_phi_rphi: build(&|_, f, fr, _| fr / f),
        gamma_phi_thetaphi: build(&|_, f, _, ft| ft / f),
        v: [build(&|_, f, fr, _| -2.0 * fr / f), build(&|i, f, _, ft| -2.0 * inv_sin2(i) * ft / f)],
        f_fn: build(&|i, f, _, _| 2.0 - 2.0 * (grad.values()[i] / f).powi(2)),
        density: f.clone(),
    }
}

/// Connection data of `S^1 x_h S^2` relative to the product background.
#[derive(Debug, Clone)]
pub struct LLDataSoc {
    pub gamma_phi_rr: CircleField,
    /// Coefficient of `sin^2 r` in `Gamma^phi_{theta theta}`.
    pub gamma_phi_thetatheta_over_sin2: CircleField,
    pub gamma_r_phir: CircleField,
    pub gamma_theta_phitheta: CircleField,
    /// Only the fiber component `V^phi` is nonzero.
    pub v_phi: CircleField,
    pub f_fn: CircleField,
    pub density: CircleField,
}

pub fn ll_assemble_soc(m: &SocMetric) -> LLDataSoc {
    let h = m.warp();
    let d = derivative(h);
    let zip = |op: &dyn Fn(f64, f64) -> f64| {
        let vals = h.values().iter().zip(d.values()).map(|(&h, &hp)| op(h, hp)).collect();
        CircleField::new(h.grid().clone(), vals).expect("finite connection data")
    };
    LLDataSoc {
        gamma_phi_rr: zip(&|h, hp| -h * hp),
        gamma_phi_thetatheta_over_sin2: zip(&|h, hp| -h * hp),
        gamma_r_phir: zip(&|h, hp| hp / h),
        gamma_theta_phitheta: zip(&|h, hp| hp / h),
        v_phi: zip(&|h, hp| -4.0 * hp / h),
        f_fn: zip(&|h, hp| 2.0 / (h * h) - 6.0 * (hp / h).powi(2)),
        density: h.map(|v| v * v),
    }
}

/// The two halves of the pairing that share the term `int (u_bar/f)|grad f|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitIntegrals {
    pub first: f64,
    pub second: f64,
}

impl SplitIntegrals {
    pub fn sum(&self) -> f64 {
        self.first + self.second
    }
}

/// `first = int 2<grad f, grad u_bar> + 2 (u_bar/f)|grad f|^2` and
/// `second = int 2 u_bar f - 2 (u_bar/f)|grad f|^2`, on the same face
/// stencil as [`pairing_cos`] so the sum matches it to roundoff.
pub fn ll_first_second_integrals_cos(m: &CosMetric, ubar: &ScalarField) -> Result<SplitIntegrals> {
    ubar.require_nonnegative()?;
    let f = m.warp();
    let ratio = ubar.zip_map(f, |u, f| u / f)?;
    let shared = weighted_dirichlet_form(f, f, &ratio)?;
    let cross = dirichlet_form(f, ubar)?;
    let mass = weighted_mass(f, ubar);
    Ok(SplitIntegrals { first: 2.0 * cross + 2.0 * shared, second: 2.0 * mass - 2.0 * shared })
}

fn weighted_mass(f: &ScalarField, u: &ScalarField) -> f64 {
    f.grid().weights().iter().zip(f.values().iter().zip(u.values())).map(|(w, (a, b))| w * a * b).sum()
}

/// `int_{S^2} 2 <grad f, grad u_bar> + 2 f u_bar`.
pub fn pairing_cos(m: &CosMetric, ubar: &ScalarField) -> Result<f64> {
    let f = m.warp();
    Ok(2.0 * dirichlet_form(f, ubar)? + 2.0 * weighted_mass(f, ubar))
}

/// `int Scal u dvol_g = int_{S^2} Scal f u_bar dA` with the pointwise curvature.
pub fn classical_total_cos(m: &CosMetric, ubar: &ScalarField) -> Result<f64> {
    let s = scalar_curvature_cos(m);
    let integrand = s.zip_map(m.warp(), |s, f| s * f)?;
    Ok(weighted_mass(&integrand, ubar))
}

/// Pairing with `u = 1`: `4 pi int f`.
pub fn total_scalar_cos(m: &CosMetric) -> f64 {
    4.0 * PI * integrate(m.warp())
}

/// `int_{S^1} 2 u_bar + 2 h'^2 u_bar + 4 h h' u_bar'`, with derivatives on
/// cell faces and `h`, `u_bar` averaged onto them.
pub fn pairing_soc(m: &SocMetric, ubar: &CircleField) -> Result<f64> {
    let h = m.warp();
    Ok(2.0 * integrate_circle(ubar) + 2.0 * face_form(h, h, Some(ubar))? + 4.0 * face_form(h, ubar, Some(h))?)
}

/// `first = int 8 h'^2 u_bar + 4 h h' u_bar'`, `second = int 2 u_bar - 6 h'^2 u_bar`.
pub fn ll_first_second_integrals_soc(m: &SocMetric, ubar: &CircleField) -> Result<SplitIntegrals> {
    ubar.require_nonnegative()?;
    let h = m.warp();
    let grad_sq = face_form(h, h, Some(ubar))?;
    Ok(SplitIntegrals {
        first: 8.0 * grad_sq + 4.0 * face_form(h, ubar, Some(h))?,
        second: 2.0 * integrate_circle(ubar) - 6.0 * grad_sq,
    })
}

/// `int Scal dvol_g` weighted by the reduced test function: `int Scal h^2 u_bar dphi`.
pub fn classical_total_soc(m: &SocMetric, ubar: &CircleField) -> Result<f64> {
    m.warp().same_grid(ubar)?;
    let s = scalar_curvature_soc(m);
    let w = m.grid().weight();
    Ok(w * s
        .values()
        .iter()
        .zip(m.warp().values().iter().zip(ubar.values()))
        .map(|(s, (h, u))| s * h * h * u)
        .sum::<f64>())
}

/// Pairing with `u = 1`, whose spherical average is `4 pi`.
pub fn total_scalar_soc(m: &SocMetric) -> f64 {
    let ubar = CircleField::constant(m.grid(), 4.0 * PI);
    pairing_soc(m, &ubar).expect("same grid")
}

/// `|h'|^2` on nodes as used by the soc curvature, exposed for oracles.
pub fn soc_gradient_sq(m: &SocMetric) -> CircleField {
    derivative_sq(m.warp())
}

/// Summary of one distributional/classical comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistscalReport {
    pub pairing: f64,
    pub first_int: f64,
    pub second_int: f64,
    pub total: f64,
    pub classical_total: f64,
    pub discrepancy: f64,
}

pub fn distscal_report_cos(m: &CosMetric, ubar: &ScalarField) -> Result<DistscalReport> {
    let pairing = pairing_cos(m, ubar)?;
    let split = ll_first_second_integrals_cos(m, ubar)?;
    let classical_total = classical_total_cos(m, ubar)?;
    Ok(DistscalReport {
        pairing,
        first_int: split.first,
        second_int: split.second,
        total: total_scalar_cos(m),
        classical_total,
        discrepancy: (pairing - classical_total).abs(),
    })
}

pub fn distscal_report_soc(m: &SocMetric, ubar: &CircleField) -> Result<DistscalReport> {
    let pairing = pairing_soc(m, ubar)?;
    let split = ll_first_second_integrals_soc(m, ubar)?;
    let classical_total = classical_total_soc(m, ubar)?;
    Ok(DistscalReport {
        pairing,
        first_int: split.first,
        second_int: split.second,
        total: total_scalar_soc(m),
        classical_total,
        discrepancy: (pairing - classical_total).abs(),
    })
}

/// One row of a refinement study of the split integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitRefinement {
    pub n: usize,
    pub first: f64,
    pub second: f64,
    pub sum: f64,
}

/// Evaluates the split integrals of `make(grid)` against `ubar(grid)` on
/// square grids with `n` radial nodes for each `n` in `sizes`.
pub fn split_refinement_cos(
    sizes: &[usize],
    make: impl Fn(&Arc<PolarGrid>) -> Result<ScalarField>,
    ubar: impl Fn(&Arc<PolarGrid>) -> ScalarField,
) -> Result<Vec<SplitRefinement>> {
    sizes
        .iter()
        .map(|&n| {
            let g = PolarGrid::square(n)?;
            let m = CosMetric::new(make(&g)?)?;
            let s = ll_first_second_integrals_cos(&m, &ubar(&g))?;
            Ok(SplitRefinement { n, first: s.first, second: s.second, sum: s.sum() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spheregrid::{laplacian, CircleGrid};

    #[test]
    fn round_product_data() {
        let g = PolarGrid::square(16).unwrap();
        let m = CosMetric::new(ScalarField::constant(&g, 1.0)).unwrap();
        let d = ll_assemble_cos(&m);
        for s in [&d.gamma_r_phiphi, &d.gamma_theta_phiphi, &d.gamma_phi_rphi, &d.gamma_phi_thetaphi, &d.v[0], &d.v[1]]
        {
            assert!(s.values().iter().all(|v| *v == 0.0));
        }
        assert!(d.f_fn.values().iter().all(|v| *v == 2.0));
        let two_pi = ScalarField::constant(&g, 2.0 * PI);
        let s = ll_first_second_integrals_cos(&m, &two_pi).unwrap();
        assert_eq!(s.first, 0.0);
        assert!((s.second - 16.0 * PI * PI).abs() < 16.0 * PI * PI / 256.0);
    }

    #[test]
    fn warped_christoffel_oracle() {
        let g = PolarGrid::square(128).unwrap();
        let m = CosMetric::new(ScalarField::from_fn(&g, |r, _| 2.0 + r.cos())).unwrap();
        let d = ll_assemble_cos(&m);
        for idx in [500, 9000, 20000] {
            let (i, _) = g.coords(idx);
            let r = g.r_nodes()[i];
            assert!((d.gamma_r_phiphi.values()[idx] - (2.0 + r.cos()) * r.sin()).abs() < 1e-3);
            let f_expect = 2.0 - 2.0 * r.sin().powi(2) / (2.0 + r.cos()).powi(2);
            assert!((d.f_fn.values()[idx] - f_expect).abs() < 1e-3);
        }
        assert!(d.f_fn.values().iter().all(|v| *v <= 2.0));
    }

    #[test]
    fn split_sums_to_pairing_and_matches_classical() {
        let g = PolarGrid::square(64).unwrap();
        let m = CosMetric::new(ScalarField::from_fn(&g, |r, t| 2.0 + r.cos() + 0.2 * r.sin() * t.cos())).unwrap();
        let u = ScalarField::from_fn(&g, |r, _| 2.0 * PI * (1.0 + r.cos().powi(2)));
        let s = ll_first_second_integrals_cos(&m, &u).unwrap();
        let p = pairing_cos(&m, &u).unwrap();
        assert!((s.sum() - p).abs() < 1e-10 * (1.0 + p.abs()));
        let c = classical_total_cos(&m, &u).unwrap();
        assert!((p - c).abs() < 1e-10 * (1.0 + p.abs()));
        // independent form of the classical integrand: (2f - 2 Laplacian f) u_bar
        let lap = laplacian(m.warp());
        let direct: f64 = (0..g.len())
            .map(|i| g.weights()[i] * (2.0 * m.warp().values()[i] - 2.0 * lap.values()[i]) * u.values()[i])
            .sum();
        assert!((direct - c).abs() < 1e-10 * (1.0 + c.abs()));
    }

    #[test]
    fn pairing_examples() {
        let g = PolarGrid::square(64).unwrap();
        let one = CosMetric::new(ScalarField::constant(&g, 1.0)).unwrap();
        let ubar = ScalarField::constant(&g, 2.0 * PI);
        assert!((pairing_cos(&one, &ubar).unwrap() - 16.0 * PI * PI).abs() < 16.0 * PI * PI / 4096.0);
        let odd = ScalarField::from_fn(&g, |r, _| 2.0 * PI * r.cos());
        assert!(pairing_cos(&one, &odd).unwrap().abs() < 1e-10);
        let c = CosMetric::new(ScalarField::constant(&g, 3.0)).unwrap();
        assert!((total_scalar_cos(&c) - 3.0 * total_scalar_cos(&one)).abs() < 1e-10);
    }

    #[test]
    fn soc_examples() {
        let cg = CircleGrid::new(256).unwrap();
        for c in [1.0, 2.5] {
            let m = SocMetric::new(CircleField::constant(&cg, c)).unwrap();
            let ubar = CircleField::constant(&cg, 4.0 * PI);
            assert!((pairing_soc(&m, &ubar).unwrap() - 16.0 * PI * PI).abs() < 1e-10);
            assert!((classical_total_soc(&m, &ubar).unwrap() - 16.0 * PI * PI).abs() < 1e-10);
            let d = ll_assemble_soc(&m);
            assert!(d.f_fn.values().iter().all(|v| (v - 2.0 / (c * c)).abs() < 1e-12));
        }
        let m = SocMetric::new(CircleField::from_fn(&cg, |p| 2.0 + 0.5 * p.sin())).unwrap();
        let ubar = CircleField::constant(&cg, 4.0 * PI);
        let p = pairing_soc(&m, &ubar).unwrap();
        assert!((p - classical_total_soc(&m, &ubar).unwrap()).abs() < 1e-8);
        // closed form: int (2 + 2 h'^2) 4 pi dphi with h' = 0.5 cos
        let exact = 4.0 * PI * (4.0 * PI + 0.5 * PI);
        assert!((p - exact).abs() < 1e-3, "{p} {exact}");
        let u = CircleField::from_fn(&cg, |p| 1.0 + 0.5 * (2.0 * p).cos());
        let s = ll_first_second_integrals_soc(&m, &u).unwrap();
        assert!((s.sum() - pairing_soc(&m, &u).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn soc_christoffel_oracle() {
        let cg = CircleGrid::new(512).unwrap();
        let m = SocMetric::new(CircleField::from_fn(&cg, |p| 2.0 + p.sin())).unwrap();
        let d = ll_assemble_soc(&m);
        for (j, &p) in cg.nodes().iter().enumerate().step_by(37) {
            let (h, hp) = (2.0 + p.sin(), p.cos());
            assert!((d.gamma_phi_rr.values()[j] + h * hp).abs() < 1e-4);
            assert!((d.v_phi.values()[j] + 4.0 * hp / h).abs() < 1e-4);
            assert!((d.f_fn.values()[j] - (2.0 / (h * h) - 6.0 * (hp / h).powi(2))).abs() < 1e-3);
            assert!((d.density.values()[j] - h * h).abs() < 1e-12);
        }
    }
}
