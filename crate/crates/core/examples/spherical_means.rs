//! Circle means, the mean growth bound and the shifted ball-average ladder.

use std::f64::consts::PI;

use warpgeom::harmonics::band_limited_random;
use warpgeom::means::{
    ball_average_monotonicity_check, conforming_shift, direction, dyadic_ladder, lsc_representative,
    spherical_mean_inequality_check, MeanCurve, DEFAULT_LADDER_LEVELS,
};
use warpgeom::spheregrid::PolarGrid;

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(64)?;
    let f = band_limited_random(&g, 4.0, 3, 0.3, 7);
    let x = direction(1.0, 2.0);

    let radii: Vec<f64> = (1..=8).map(|k| k as f64 * PI / 16.0).collect();
    let curve = MeanCurve::new(&f, x, &radii)?;
    for (r, v) in curve.radii.iter().zip(&curve.values) {
        println!("phi({r:.4}) = {v:.6}");
    }

    let ineq = spherical_mean_inequality_check(&f, x, 0.3, PI / 2.0, 1e-4)?;
    println!("growth: lhs {:.4e} rhs {:.4e} pass {}", ineq.interval.lhs, ineq.interval.rhs, ineq.interval.pass);

    let c = conforming_shift(&f);
    let ladder = dyadic_ladder(DEFAULT_LADDER_LEVELS);
    let mono = ball_average_monotonicity_check(&f, x, &ladder, c, 1e-4)?;
    println!("ladder with C = {c:.4}: largest rise {:.3e}, pass {}", mono.lhs, mono.pass);

    let lsc = lsc_representative(&f, x, c, DEFAULT_LADDER_LEVELS, 100.0)?;
    println!("lsc estimate {:.6} (sampled value {:.6})", lsc.value, warpgeom::spheregrid::sample_point(&f, x));
    Ok(())
}
