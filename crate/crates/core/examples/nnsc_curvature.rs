//! Scalar curvature of `S2 x_f S1` and the NNSC check for a few warping functions.

use warpgeom::metrics::{nnsc_check_cos, scalar_curvature_cos, volume_cos, CosMetric};
use warpgeom::spheregrid::{PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(64)?;
    let fields = [
        ("f = 1", ScalarField::constant(&g, 1.0)),
        ("f = 3 + cos r", ScalarField::from_fn(&g, |r, _| 3.0 + r.cos())),
        ("f = 1 + 0.9 cos 3r", ScalarField::from_fn(&g, |r, _| 1.0 + 0.9 * (3.0 * r).cos())),
    ];
    for (name, f) in fields {
        let m = CosMetric::new(f)?;
        let s = scalar_curvature_cos(&m);
        let r = nnsc_check_cos(&m, None);
        println!(
            "{name:<20} Scal in [{:8.3}, {:8.3}]  volume {:8.3}  NNSC {} (slack {:.3e})",
            s.min(),
            s.max(),
            volume_cos(&m),
            if r.pass { "yes" } else { "no" },
            r.slack
        );
    }
    Ok(())
}
