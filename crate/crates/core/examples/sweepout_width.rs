//! Torus sweepout widths: `4 pi^2 c` for constants, and a perturbed warp.

use std::f64::consts::PI;

use warpgeom::mina::mina_upper_bound;
use warpgeom::spheregrid::{PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(48)?;
    for c in [1.0, 2.5] {
        let (w, rec) = mina_upper_bound(&ScalarField::constant(&g, c))?;
        println!("f = {c}: width {w:.6} (4 pi^2 c = {:.6}), radius {:.4}", 4.0 * PI * PI * c, rec.best_radius);
    }
    let f = ScalarField::from_fn(&g, |r, t| 2.0 + 0.4 * r.sin() * t.cos());
    let (w, rec) = mina_upper_bound(&f)?;
    println!("f = 2 + 0.4 sin r cos t: width {w:.6} at center {:?}, radius {:.4}", rec.center, rec.best_radius);
    Ok(())
}
