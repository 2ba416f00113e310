//! `S1 x_h S2`: curvature, the gradient bound, warp bounds and the pairing.

use std::f64::consts::PI;

use warpgeom::distscal::distscal_report_soc;
use warpgeom::metrics::{gradient_bound_soc, nnsc_check_soc, soc_min_warp_bounds, SocMetric};
use warpgeom::spheregrid::{bv_norm, integrate_circle, CircleField, CircleGrid};

fn main() -> warpgeom::Result<()> {
    let g = CircleGrid::new(256)?;
    let m = SocMetric::new(CircleField::from_fn(&g, |p| 2.0 + 0.25 * p.cos()))?;
    let nnsc = nnsc_check_soc(&m, None);
    let grad = gradient_bound_soc(&m, 1e-12);
    println!("NNSC {} (slack {:.3e}); |h'| max {:.4}", nnsc.pass, nnsc.slack, grad.lhs);

    let area = 4.0 * PI * m.warp().min().powi(2);
    let bounds = soc_min_warp_bounds(&m, 2.0 * PI, area, 1e-9)?;
    for r in [&bounds.min_from_diameter, &bounds.min_from_area, &bounds.max_from_diameter] {
        println!("{:<24} {:.4} vs {:.4}  pass {}", r.name, r.lhs, r.rhs, r.pass);
    }
    println!("bv norm {:.4} <= {:.4}", bv_norm(m.warp()), 2.0 * PI * (1.0 + 2.0 * (PI / area).sqrt()));

    let ubar = CircleField::from_fn(&g, |p| 4.0 * PI * (1.5 + p.sin()));
    let d = distscal_report_soc(&m, &ubar)?;
    println!("pairing {:.8}, classical {:.8}, test mass {:.4}", d.pairing, d.classical_total, integrate_circle(&ubar));
    Ok(())
}
