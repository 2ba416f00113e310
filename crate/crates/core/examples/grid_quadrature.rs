//! Quadrature and Laplacian convergence on the polar grid.

use std::f64::consts::PI;

use warpgeom::harmonics::laplacian_errors;
use warpgeom::spheregrid::{integrate, PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    println!("{:>5} {:>14} {:>14} {:>12}", "n", "area - 4pi", "int 1+cos^2", "lap err");
    for n in [16, 32, 64, 128] {
        let g = PolarGrid::square(n)?;
        let area = integrate(&ScalarField::constant(&g, 1.0)) - 4.0 * PI;
        let q = integrate(&ScalarField::from_fn(&g, |r, _| 1.0 + r.cos().powi(2))) - 16.0 * PI / 3.0;
        let worst = laplacian_errors(&g, 4).iter().map(|e| e.max_interior).fold(0.0, f64::max);
        println!("{n:>5} {area:>14.3e} {q:>14.3e} {worst:>12.3e}");
    }
    Ok(())
}
