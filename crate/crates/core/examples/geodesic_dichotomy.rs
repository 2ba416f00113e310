//! Geodesics on `S2 x_f S1`: a single trajectory, the shooting battery and systole bounds.

use std::f64::consts::PI;

use warpgeom::geodesics::{
    default_shooting_seeds, geodesic_integrate, shooting_battery, systole_lower_bound_cos, GeodesicState, SmoothWarp,
};
use warpgeom::metrics::CosMetric;
use warpgeom::spheregrid::{PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(32)?;
    let m = CosMetric::new(ScalarField::from_fn(&g, |r, _| 2.0 + 0.3 * r.cos()))?;
    let warp = SmoothWarp::new(&m)?;

    let s = GeodesicState::unit(&warp, [PI / 2.0, 0.0, 0.0], PI / 2.0 - 0.3, 0.5);
    let traj = geodesic_integrate(&warp, &s, 20.0, 1e-3)?;
    println!("T = 20: energy drift {:.2e}, killing drift {:.2e}", traj.energy_drift, traj.killing_drift);

    let seeds = default_shooting_seeds(&warp);
    let rep = shooting_battery(&warp, &seeds, 2.0 * PI + 1.0, 1e-3)?;
    println!(
        "{} seeds: {} wrap the fiber, {} base geodesics, {} open ({} hit a cap), {} violations",
        seeds.len(),
        rep.wraps_fiber,
        rep.base,
        rep.open,
        rep.aborted,
        rep.violations
    );

    let sys = systole_lower_bound_cos(&m);
    println!("systole >= {:.6} ({:?} branch)", sys.value, sys.binding);
    Ok(())
}
