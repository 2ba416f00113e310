//! Distributional scalar curvature against test functions, and the split
//! integrals on the log-spike limit under refinement.

use std::f64::consts::PI;

use warpgeom::distscal::{distscal_report_cos, split_refinement_cos};
use warpgeom::metrics::CosMetric;
use warpgeom::sequences::{limit_proxy, FamilyKind};
use warpgeom::spheregrid::{PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(64)?;
    let m = CosMetric::new(ScalarField::from_fn(&g, |r, t| 3.0 + r.cos() + 0.3 * r.sin() * t.sin()))?;
    let tests = [
        ("u = 1", ScalarField::constant(&g, 2.0 * PI)),
        ("u = 2 + cos r", ScalarField::from_fn(&g, |r, _| 2.0 * PI * (2.0 + r.cos()))),
    ];
    for (name, ubar) in tests {
        let d = distscal_report_cos(&m, &ubar)?;
        println!(
            "{name:<14} pairing {:.8}  classical {:.8}  |diff| {:.2e}",
            d.pairing, d.classical_total, d.discrepancy
        );
    }

    let spike = FamilyKind::LogSpike { floor: 1.0 };
    let rows =
        split_refinement_cos(&[32, 64, 128], |g| limit_proxy(&spike, g), |g| ScalarField::constant(g, 2.0 * PI))?;
    for r in rows {
        println!("n = {:>4}: first {:>10.4} second {:>10.4} sum {:>10.4}", r.n, r.first, r.second, r.sum);
    }
    Ok(())
}
