//! The H set and the disjoint-ball chain for a lower bound on `|f|_1`.

use warpgeom::mina::{l2_threshold, mina_upper_bound, vitali_l1_trace, HypothesisMode};
use warpgeom::spheregrid::{lq_norm, PolarGrid, ScalarField};

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(32)?;
    let f = ScalarField::from_fn(&g, |r, _| 1.0 + 0.2 * r.cos());
    let (width, _) = mina_upper_bound(&f)?;
    let area = 0.9 * width;
    println!("|f|_2 = {:.4}, threshold A/(2^1.5 pi^2.5) = {:.4}", lq_norm(&f, 2.0)?, l2_threshold(area));
    let trace = vitali_l1_trace(&f, area, HypothesisMode::Report)?;
    println!("H set: {} centers, {} selected", trace.h_set_size, trace.selected.len());
    for link in &trace.links {
        println!(
            "  {:<6} {:<60} {:>12.4e} <= {:>12.4e}  {}",
            link.label, link.statement, link.lhs, link.rhs, link.holds
        );
    }
    println!("hypotheses hold: {}, chain holds: {}", trace.hypotheses_hold, trace.holds());
    Ok(())
}
