//! Log-spike family: Sobolev norms, distances to the limit, the gradient
//! energy outside shrinking caps, and the cutoff probe.

use warpgeom::sequences::{convergence_report, cutoff_dichotomy_probe, sharpness_witness, FamilyKind};
use warpgeom::spheregrid::PolarGrid;

fn main() -> warpgeom::Result<()> {
    let g = PolarGrid::square(128)?;
    let kind = FamilyKind::LogSpike { floor: 1.0 };
    let js = [2, 4, 8, 16];
    let rep = convergence_report(&kind, &js, &[1.5, 2.0], &[1.0, 2.0, 4.0], &[], &g)?;
    for s in &rep.w1p {
        println!("W^(1,{}) norms: {:?}", s.param, s.values);
    }
    for s in &rep.lq_to_limit {
        println!("L^{} distance to limit: {:?}", s.param, s.values);
    }
    for w in sharpness_witness(&g, 1.0, &[0.2, 0.1, 0.05])? {
        println!("eps {:.2}: energy {:.4}, 2 pi ln(1/eps) {:.4}, ratio {:.3}", w.eps, w.energy, w.model, w.ratio);
    }
    for kind in [kind, FamilyKind::Scaled { c: 3.0, eps: 0.5 }] {
        let p = cutoff_dichotomy_probe(&kind, &js, 10.0, &g)?;
        println!("{}: branch {:?}, margin {:.4}", kind.name(), p.branch, p.margin);
    }
    Ok(())
}
