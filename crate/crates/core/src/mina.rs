//! Torus sweepouts of `S^2 x_f S^1`, the min-max width upper bound they give,
//! and the covering argument that turns a width lower bound into an `L^1` bound.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::means::{circle_mean, essential_infimum, RadialProfile, DEFAULT_ESS_DELTA};
use crate::metrics::{nnsc_check_cos, CosMetric};
use crate::report::InequalityReport;
use crate::spheregrid::{
    dot, lq_norm, point_to_spherical, sample_point, sphere_distance, Frame, PolarGrid, ScalarField,
};

const GOLDEN_ITERATIONS: usize = 20;
/// Relative band inside which sweep values count as tied.
const TIE: f64 = 1e-12;

/// Area of the torus `{d(., x) = rho} x S^1`.
pub fn torus_area(f: &ScalarField, x: [f64; 3], rho: f64) -> Result<f64> {
    let mean = crate::means::spherical_mean(f, x, rho)?;
    Ok(torus_from_mean(rho, mean))
}

fn torus_from_mean(rho: f64, mean: f64) -> f64 {
    2.0 * PI * (2.0 * PI * rho.sin()) * mean
}

/// The widest torus about one center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepoutRecord {
    pub center: [f64; 3],
    pub center_node: usize,
    pub best_radius: f64,
    pub best_area: f64,
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    base: usize,
    col: usize,
    w: f64,
}

/// Interpolation taps for one sample point, in a form that can be shifted in
/// azimuth. Pole values live in two extra rows (`n_r` for the north pole,
/// `n_r + 1` for the south) filled with the mean of the adjacent grid row.
fn taps(g: &PolarGrid, q: [f64; 3]) -> [Tap; 4] {
    let (nr, nt) = (g.n_r(), g.n_theta());
    let (r, theta) = point_to_spherical(q);
    let t = theta / g.dtheta();
    let row = |i: usize, w: f64| -> [Tap; 2] {
        let t = t.rem_euclid(nt as f64);
        let k0 = (t.floor() as usize).min(nt - 1);
        let a = t - k0 as f64;
        [Tap { base: i * nt, col: k0, w: w * (1.0 - a) }, Tap { base: i * nt, col: (k0 + 1) % nt, w: w * a }]
    };
    let pole =
        |i: usize, w: f64| -> [Tap; 2] { [Tap { base: i * nt, col: 0, w }, Tap { base: i * nt, col: 0, w: 0.0 }] };
    let s = r / g.dr() - 0.5;
    let (lo, hi) = if s < 0.0 {
        let b = 2.0 * (s + 0.5);
        (pole(nr, 1.0 - b), row(0, b))
    } else {
        let i0 = s.floor() as usize;
        if i0 >= nr - 1 {
            let b = 2.0 * (s - (nr - 1) as f64);
            (row(nr - 1, 1.0 - b), pole(nr + 1, b))
        } else {
            let b = s - i0 as f64;
            (row(i0, 1.0 - b), row(i0 + 1, b))
        }
    };
    [lo[0], lo[1], hi[0], hi[1]]
}

/// Field values followed by the two pole rows used by [`taps`].
fn with_pole_rows(f: &ScalarField) -> Vec<f64> {
    let g = f.grid();
    let (nr, nt) = (g.n_r(), g.n_theta());
    let v = f.values();
    let north = crate::spheregrid::row_mean_of(f, 0);
    let south = crate::spheregrid::row_mean_of(f, nr - 1);
    let mut out = Vec::with_capacity(v.len() + 2 * nt);
    out.extend_from_slice(v);
    out.extend(std::iter::repeat_n(north, nt));
    out.extend(std::iter::repeat_n(south, nt));
    out
}

/// Circle means about every node of one grid row, on every grid row.
///
/// Rotating a center about the polar axis by a grid step permutes the grid,
/// so the interpolation taps for center `(i, 0)` serve the whole row once
/// their columns are shifted.
struct RowSweep {
    taps: Vec<[Tap; 4]>,
}

impl RowSweep {
    fn new(g: &PolarGrid, i: usize) -> Result<Self> {
        let frame = Frame::new(g.node_point(i, 0))?;
        let taps = g.node_points().into_iter().map(|p| taps(g, frame.apply(p))).collect();
        Ok(Self { taps })
    }

    fn means(&self, g: &PolarGrid, v: &[f64], k: usize, out: &mut [f64]) {
        let nt = g.n_theta();
        for (j, slot) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for tp in &self.taps[j * nt..(j + 1) * nt] {
                for t in tp {
                    let c = t.col + k;
                    let c = if c >= nt { c - nt } else { c };
                    s += t.w * v[t.base + c];
                }
            }
            *slot = s / nt as f64;
        }
    }
}

/// Golden-section maximization of `a` on `[lo, hi]`.
fn golden_max(lo: f64, hi: f64, a: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (a(x1), a(x2));
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = a(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = a(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Per-center sweep data on the radial nodes.
struct CenterSweep {
    node: usize,
    phi: Vec<f64>,
    best_row: usize,
    best_node_area: f64,
}

fn sweep_all(f: &ScalarField, mut visit: impl FnMut(CenterSweep)) -> Result<()> {
    let g = f.grid();
    let (nr, nt) = (g.n_r(), g.n_theta());
    let mut phi = vec![0.0; nr];
    let ext = with_pole_rows(f);
    for i in 0..nr {
        let sweep = RowSweep::new(g, i)?;
        for k in 0..nt {
            sweep.means(g, &ext, k, &mut phi);
            let (best_row, best_node_area) = phi
                .iter()
                .enumerate()
                .map(|(j, &m)| (j, torus_from_mean(g.r_nodes()[j], m)))
                .fold((0, f64::NEG_INFINITY), |b, (j, a)| if a > b.1 { (j, a) } else { b });
            visit(CenterSweep { node: g.index(i, k), phi: phi.clone(), best_row, best_node_area });
        }
    }
    Ok(())
}

/// Refines the best radius of one center between the neighbouring radial nodes.
fn refine(f: &ScalarField, node: usize, best_row: usize, best_node_area: f64) -> Result<SweepoutRecord> {
    let g = f.grid();
    let (i, k) = g.coords(node);
    let center = g.node_point(i, k);
    let frame = Frame::new(center)?;
    let r0 = g.r_nodes()[best_row];
    let lo = (r0 - g.dr()).max(1e-9);
    let hi = (r0 + g.dr()).min(PI - 1e-9);
    let (r, a) = golden_max(lo, hi, |r| torus_from_mean(r, circle_mean(f, &frame, r)));
    let (best_radius, best_area) = if a > best_node_area { (r, a) } else { (r0, best_node_area) };
    Ok(SweepoutRecord { center, center_node: node, best_radius, best_area })
}

/// Upper bound for the min-max width: the smallest, over grid centers, of the
/// largest torus area about that center. Ties go to the lowest node index.
pub fn mina_upper_bound(f: &ScalarField) -> Result<(f64, SweepoutRecord)> {
    f.require_positive()?;
    let mut coarse = Vec::with_capacity(f.grid().len());
    sweep_all(f, |s| coarse.push((s.node, s.best_row, s.best_node_area)))?;
    // refinement only raises a center's value, so centers whose node maximum
    // already exceeds the best refined value cannot win
    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&a, &b| coarse[a].2.total_cmp(&coarse[b].2).then(a.cmp(&b)));
    let mut best = f64::INFINITY;
    let mut refined = Vec::new();
    for idx in order {
        let (node, row, area) = coarse[idx];
        if area > best * (1.0 + TIE) {
            break;
        }
        let rec = refine(f, node, row, area)?;
        best = best.min(rec.best_area);
        refined.push(rec);
    }
    let rec = refined
        .into_iter()
        .filter(|r| r.best_area <= best * (1.0 + TIE))
        .min_by_key(|r| r.center_node)
        .expect("at least one center");
    Ok((rec.best_area, rec))
}

/// Whether unmet hypotheses abort [`build_h_set`] or are only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HypothesisMode {
    Enforce,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HEntry {
    pub center: [f64; 3],
    pub node: usize,
    pub radius: f64,
    pub circle_integral: f64,
    /// Smallest circle mean over radii in `(0, radius]`.
    pub floor: f64,
    /// Whether this entry came from the antipode of the node whose sweep produced it.
    pub folded: bool,
    /// Distance between the exact antipode and the node used in its place.
    pub pairing_distance: f64,
}

/// Centers with good circles, one of each antipodal pair.
#[derive(Debug, Clone, Serialize)]
pub struct HSet {
    pub area: f64,
    pub entries: Vec<HEntry>,
    pub l2_hypothesis: InequalityReport,
    pub nnsc: InequalityReport,
    /// `A / 2 pi <= min circle integral`.
    pub circle_integrals: InequalityReport,
    /// `A / 8 pi^2 <= min floor`.
    pub floor: InequalityReport,
    /// `2 pi <= Area(union of B_{r/10})`.
    pub coverage: InequalityReport,
}

impl HSet {
    pub fn hypotheses_hold(&self) -> bool {
        self.l2_hypothesis.pass && self.nnsc.pass
    }

    pub fn all_checks_pass(&self) -> bool {
        self.circle_integrals.pass && self.floor.pass && self.coverage.pass
    }

    /// A set with caller-chosen entries, for probing the covering argument.
    pub fn from_entries(f: &ScalarField, area: f64, entries: Vec<HEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("H set needs at least one entry"));
        }
        let (l2_hypothesis, nnsc) = hypotheses(f, area)?;
        Ok(summarize(f, area, entries, l2_hypothesis, nnsc))
    }
}

/// `A / (2^{3/2} pi^{5/2})`, the `L^2` threshold of the covering argument.
pub fn l2_threshold(area: f64) -> f64 {
    area / (2f64.powf(1.5) * PI.powf(2.5))
}

/// Area tolerance for node-based measures of unions of caps: one band of
/// cells along a great circle.
pub fn measure_tolerance(g: &PolarGrid) -> f64 {
    4.0 * PI * g.dr()
}

fn hypotheses(f: &ScalarField, area: f64) -> Result<(InequalityReport, InequalityReport)> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(invalid(format!("area bound must be positive, got {area}")));
    }
    let m = CosMetric::new(f.clone())?;
    let l2 = lq_norm(f, 2.0)?;
    Ok((InequalityReport::new("|f|_2 < A / (2^1.5 pi^2.5)", l2, l2_threshold(area), 0.0), nnsc_check_cos(&m, None)))
}

/// Builds the set of centers `x` with radius `r_x <= pi/2` whose circle
/// integral is at least `A / 2 pi` and checks the three properties the
/// covering argument needs.
///
/// Each grid node contributes its best circle; if that radius exceeds `pi/2`
/// the same circle is recorded about the antipodal node with radius
/// `pi - r_x`. A node reached twice keeps the larger radius.
pub fn build_h_set(f: &ScalarField, area: f64, mode: HypothesisMode) -> Result<HSet> {
    let (l2_hypothesis, nnsc) = hypotheses(f, area)?;
    if mode == HypothesisMode::Enforce {
        if !l2_hypothesis.pass {
            return Err(Error::Hypothesis(format!(
                "|f|_2 = {:.6} is not below A / (2^1.5 pi^2.5) = {:.6}",
                l2_hypothesis.lhs, l2_hypothesis.rhs
            )));
        }
        if !nnsc.pass {
            return Err(Error::Hypothesis(format!(
                "scalar curvature is negative: max(Laplacian f - f) = {:.3e}",
                nnsc.lhs
            )));
        }
    }
    let g = f.grid().clone();
    let mut sweeps = Vec::with_capacity(g.len());
    sweep_all(f, |s| sweeps.push(s))?;
    let mut kept: HashMap<usize, HEntry> = HashMap::new();
    for s in sweeps {
        let rec = refine(f, s.node, s.best_row, s.best_node_area)?;
        let circle_integral = rec.best_area / (2.0 * PI);
        let mean_at = circle_integral / (2.0 * PI * rec.best_radius.sin());
        let (i, k) = g.coords(s.node);
        let rows = g.r_nodes();
        let entry = if rec.best_radius <= PI / 2.0 {
            let floor = rows
                .iter()
                .zip(&s.phi)
                .filter(|(r, _)| **r <= rec.best_radius)
                .map(|(_, m)| *m)
                .fold(f.at(i, k).min(mean_at), f64::min);
            HEntry {
                center: rec.center,
                node: s.node,
                radius: rec.best_radius,
                circle_integral,
                floor,
                folded: false,
                pairing_distance: 0.0,
            }
        } else {
            let (ai, ak) = g.antipode(i, k);
            let exact = [-rec.center[0], -rec.center[1], -rec.center[2]];
            let floor = rows
                .iter()
                .zip(&s.phi)
                .filter(|(r, _)| **r >= rec.best_radius)
                .map(|(_, m)| *m)
                .fold(sample_point(f, exact).min(mean_at), f64::min);
            let center = g.node_point(ai, ak);
            HEntry {
                center,
                node: g.index(ai, ak),
                radius: PI - rec.best_radius,
                circle_integral,
                floor,
                folded: true,
                pairing_distance: sphere_distance(center, exact),
            }
        };
        match kept.get(&entry.node) {
            Some(e) if e.radius >= entry.radius => {}
            _ => {
                kept.insert(entry.node, entry);
            }
        }
    }
    let mut entries: Vec<HEntry> = kept.into_values().collect();
    entries.sort_by_key(|e| e.node);
    let set = summarize(f, area, entries, l2_hypothesis, nnsc);
    if mode == HypothesisMode::Enforce && !set.all_checks_pass() {
        let failed = [&set.circle_integrals, &set.floor, &set.coverage]
            .into_iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{} (slack {:.3e})", r.name, r.slack))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::Hypothesis(format!("H set checks failed: {failed}")));
    }
    Ok(set)
}

fn summarize(
    f: &ScalarField,
    area: f64,
    entries: Vec<HEntry>,
    l2_hypothesis: InequalityReport,
    nnsc: InequalityReport,
) -> HSet {
    let g = f.grid();
    let tol = 1e-9 * (1.0 + area);
    let (ci_idx, ci) = entries
        .iter()
        .enumerate()
        .map(|(j, e)| (j, e.circle_integral))
        .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    let (fl_idx, fl) =
        entries
            .iter()
            .enumerate()
            .map(|(j, e)| (j, e.floor))
            .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    let balls: Vec<([f64; 3], f64)> = entries.iter().map(|e| (e.center, e.radius / 10.0)).collect();
    let covered = union_area(g, &balls);
    HSet {
        area,
        circle_integrals: InequalityReport::new("A/2pi <= circle integral", area / (2.0 * PI), ci, tol).at(ci_idx),
        floor: InequalityReport::new("A/8pi^2 <= circle mean floor", area / (8.0 * PI * PI), fl, tol).at(fl_idx),
        coverage: InequalityReport::new("2pi <= Area(union B_{r/10})", 2.0 * PI, covered, measure_tolerance(g)),
        entries,
        l2_hypothesis,
        nnsc,
    }
}

/// Node-quadrature area of a union of open caps `(center, radius)`.
pub fn union_area(g: &Arc<PolarGrid>, balls: &[([f64; 3], f64)]) -> f64 {
    let mut sorted: Vec<([f64; 3], f64)> = balls.iter().map(|&(c, r)| (c, r.cos())).collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    g.node_points()
        .iter()
        .zip(g.weights())
        .filter(|(p, _)| sorted.iter().any(|(c, cr)| dot(**p, *c) > *cr))
        .map(|(_, w)| w)
        .sum()
}

/// One inequality in the covering chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub label: &'static str,
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(label: &'static str, statement: &'static str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self { label, statement, lhs, rhs, tolerance, holds: lhs <= rhs + tolerance }
    }
}

/// Every number in the disjoint-ball argument for `|f|_1 >= A / (100 pi)`.
#[derive(Debug, Clone, Serialize)]
pub struct VitaliTrace {
    pub area: f64,
    pub h_set_size: usize,
    /// Indices into the H set entries, in selection order.
    pub selected: Vec<usize>,
    pub links: Vec<ChainLink>,
    pub l1_norm: f64,
    pub target: f64,
    /// Position of the first failing link in `links`.
    pub first_broken: Option<usize>,
    pub hypotheses_hold: bool,
}

impl VitaliTrace {
    pub fn holds(&self) -> bool {
        self.first_broken.is_none()
    }

    pub fn link(&self, label: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.label == label)
    }
}

/// Builds the H set and traces the covering argument.
pub fn vitali_l1_trace(f: &ScalarField, area: f64, mode: HypothesisMode) -> Result<VitaliTrace> {
    let set = build_h_set(f, area, mode)?;
    vitali_trace_from(f, &set)
}

/// Greedy selection (largest radius first) of pairwise disjoint balls
/// `B_{r/10}`, then the chain
/// `|f|_1 >= sum int_{B_{r/10}} f >= (A/8pi^2) sum Area(B_{r/10})
///  >= (A/200pi^2) sum Area(B_{r/2}) >= (A/200pi^2) Area(union B_{r/2}) >= A/(100 pi)`.
pub fn vitali_trace_from(f: &ScalarField, set: &HSet) -> Result<VitaliTrace> {
    let g = f.grid();
    let area = set.area;
    let entries = &set.entries;
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].radius.total_cmp(&entries[a].radius).then(a.cmp(&b)));
    let mut selected: Vec<usize> = Vec::new();
    for j in order {
        let e = &entries[j];
        let clear = selected.iter().all(|&s| {
            let o = &entries[s];
            sphere_distance(e.center, o.center) >= (e.radius + o.radius) / 10.0
        });
        if clear {
            selected.push(j);
        }
    }
    let tiny = 1e-12;
    let mtol = measure_tolerance(g);
    let mut links = Vec::new();

    // (a) selected tenth-balls are pairwise disjoint
    let mut overlap = f64::NEG_INFINITY;
    for (a, &s) in selected.iter().enumerate() {
        for &t in &selected[a + 1..] {
            let (x, y) = (&entries[s], &entries[t]);
            overlap = overlap.max((x.radius + y.radius) / 10.0 - sphere_distance(x.center, y.center));
        }
    }
    links.push(ChainLink::new("a", "selected B_{r/10} pairwise disjoint", overlap.max(0.0), 0.0, tiny));

    // (b) half-balls of the selection cover every tenth-ball of H, which covers half the sphere
    let tenth: Vec<([f64; 3], f64)> = entries.iter().map(|e| (e.center, e.radius / 10.0)).collect();
    let half: Vec<([f64; 3], f64)> = selected.iter().map(|&s| (entries[s].center, entries[s].radius / 2.0)).collect();
    let tenth_cos: Vec<([f64; 3], f64)> = tenth.iter().map(|&(c, r)| (c, r.cos())).collect();
    let half_cos: Vec<([f64; 3], f64)> = half.iter().map(|&(c, r)| (c, r.cos())).collect();
    let mut uncovered = 0.0;
    let mut tenth_area = 0.0;
    for (p, w) in g.node_points().iter().zip(g.weights()) {
        if tenth_cos.iter().any(|(c, cr)| dot(*p, *c) > *cr) {
            tenth_area += w;
            if !half_cos.iter().any(|(c, cr)| dot(*p, *c) > *cr) {
                uncovered += w;
            }
        }
    }
    let half_area = union_area(g, &half);
    let b_ok = uncovered <= tiny && tenth_area >= 2.0 * PI - mtol;
    links.push(ChainLink {
        label: "b",
        statement: "union B_{r/2} (selected) contains union B_{r/10} (H), of area >= 2pi",
        lhs: 2.0 * PI + uncovered,
        rhs: tenth_area,
        tolerance: mtol,
        holds: b_ok,
    });

    // (c) per-ball floor
    let floor = area / (8.0 * PI * PI);
    let mut worst_c = f64::NEG_INFINITY;
    let mut ball_mass = 0.0;
    let mut sum_tenth = 0.0;
    let mut sum_half = 0.0;
    for &s in &selected {
        let e = &entries[s];
        let profile = RadialProfile::new(f, e.center)?;
        let mass = profile.ball_integral(e.radius / 10.0);
        let cap = PolarGrid::cap_area(e.radius / 10.0);
        worst_c = worst_c.max(floor * cap - mass);
        ball_mass += mass;
        sum_tenth += cap;
        sum_half += PolarGrid::cap_area(e.radius / 2.0);
    }
    let ctol = 1e-9 * (1.0 + area);
    links.push(ChainLink::new("c", "(A/8pi^2) Area(B_{r/10}) <= int_{B_{r/10}} f", worst_c, 0.0, ctol));

    // (d) the summed chain
    let l1_norm = lq_norm(f, 1.0)?;
    let target = area / (100.0 * PI);
    let s2 = floor * sum_tenth;
    let s3 = area / (200.0 * PI * PI) * sum_half;
    let s4 = area / (200.0 * PI * PI) * half_area;
    let s5 = target;
    let union_tol = area / (200.0 * PI * PI) * mtol;
    links.push(ChainLink::new("d1", "sum int_{B_{r/10}} f <= |f|_1", ball_mass, l1_norm, mtol * f.max()));
    links.push(ChainLink::new("d2", "(A/8pi^2) sum Area(B_{r/10}) <= sum int_{B_{r/10}} f", s2, ball_mass, ctol));
    links.push(ChainLink::new("d3", "(A/200pi^2) sum Area(B_{r/2}) <= (A/8pi^2) sum Area(B_{r/10})", s3, s2, tiny));
    links.push(ChainLink::new(
        "d4",
        "(A/200pi^2) Area(union B_{r/2}) <= (A/200pi^2) sum Area(B_{r/2})",
        s4,
        s3,
        union_tol,
    ));
    links.push(ChainLink::new("d5", "A/(100 pi) <= (A/200pi^2) Area(union B_{r/2})", s5, s4, union_tol));
    links.push(ChainLink::new("final", "A/(100 pi) <= |f|_1", target, l1_norm, ctol));
    let first_broken = links.iter().position(|l| !l.holds);
    Ok(VitaliTrace {
        area,
        h_set_size: entries.len(),
        selected,
        links,
        l1_norm,
        target,
        first_broken,
        hypotheses_hold: set.hypotheses_hold(),
    })
}

/// The pieces of the pointwise lower bound for a sequence member.
#[derive(Debug, Clone, Serialize)]
pub struct FloorEstimate {
    /// `e/4 <= min f`.
    pub report: InequalityReport,
    pub essential_infimum: f64,
    /// `None` when no radius makes both error terms small enough.
    pub r1: Option<f64>,
    pub l1_distance: f64,
    /// `|f_limit - f|_1 / V(r1)`.
    pub l1_term: f64,
    /// `(|f|_2 / sqrt(2 pi)) (sin r1 - r1 cos r1) / (1 - cos r1)`.
    pub l2_term: f64,
    /// `e - l1_term - l2_term`.
    pub lower_bound: f64,
}

fn psi(r: f64) -> f64 {
    (r.sin() - r * r.cos()) / (1.0 - r.cos())
}

/// Lower bound `f >= e - |f_limit - f|_1 / V(r1) - (|f|_2/sqrt(2pi)) psi(r1)`
/// with `e` the essential infimum of the limit.
///
/// `r1` is the largest radius below `pi/2` with `C psi(r1) < e/2`, where `C`
/// bounds `|f_j|_2 / sqrt(2 pi)` along the sequence; it is admissible when
/// the `L^1` term is at most `e/4`, and then the bound is at least `e/4`.
pub fn fj_floor_estimate(f: &ScalarField, f_limit: &ScalarField, c: f64, delta: Option<f64>) -> Result<FloorEstimate> {
    f.same_grid(f_limit)?;
    let delta = delta.unwrap_or(DEFAULT_ESS_DELTA);
    let e = essential_infimum(f_limit, delta)?;
    if !(e > 0.0) {
        return Err(invalid(format!("essential infimum of the limit must be positive, got {e}")));
    }
    let l2 = lq_norm(f, 2.0)? / (2.0 * PI).sqrt();
    let hyp_c = c >= l2 * (1.0 - 1.0 / (f.grid().n_r() as f64).powi(2));
    let nnsc = CosMetric::new(f.clone()).map(|m| nnsc_check_cos(&m, None).pass).unwrap_or(false);
    let l1_distance = lq_norm(&f.zip_map(f_limit, |a, b| a - b)?, 1.0)?;
    // psi increases from 0 at r = 0 to 1 at r = pi/2
    let target = 0.5 * e;
    let r_max = PI / 2.0 * (1.0 - 1e-9);
    let r1 = if c * psi(r_max) < target {
        r_max
    } else {
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c * psi(mid.max(1e-300)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let cap = PolarGrid::cap_area(r1);
    let l1_term = if r1 > 0.0 { l1_distance / cap } else { f64::INFINITY };
    let l2_term = if r1 > 0.0 { l2 * psi(r1) } else { 0.0 };
    let admissible = r1 > 0.0 && l1_term <= 0.25 * e;
    let lower_bound = e - l1_term - l2_term;
    let mut report = InequalityReport::new("e/4 <= min f", 0.25 * e, f.min(), 1e-12)
        .at(f.argmin())
        .with_hypotheses(hyp_c && nnsc)
        .detail("e", e)
        .detail("lower bound", lower_bound);
    if !admissible {
        report = report.note(format!(
            "no admissible r1: L1 term {l1_term:.4e} exceeds e/4 = {:.4e} (sequence not yet close to its limit)",
            0.25 * e
        ));
    }
    Ok(FloorEstimate {
        report,
        essential_infimum: e,
        r1: admissible.then_some(r1),
        l1_distance,
        l1_term,
        l2_term,
        lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::direction;

    #[test]
    fn torus_areas_of_constants() {
        let g = PolarGrid::square(64).unwrap();
        let f = ScalarField::constant(&g, 2.0);
        let x = direction(0.7, 1.0);
        for rho in [0.3, PI / 2.0, 2.5] {
            assert!((torus_area(&f, x, rho).unwrap() - 8.0 * PI * PI * rho.sin()).abs() < 1e-12);
        }
        let one = ScalarField::constant(&g, 1.0);
        assert!((torus_area(&one, x, PI / 2.0).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn row_sweep_matches_direct_means() {
        let g = PolarGrid::new(12, 20).unwrap();
        let f = crate::harmonics::band_limited_random(&g, 3.0, 3, 0.4, 1);
        let (i, k) = (4, 7);
        let sweep = RowSweep::new(&g, i).unwrap();
        let mut phi = vec![0.0; g.n_r()];
        sweep.means(&g, &with_pole_rows(&f), k, &mut phi);
        let frame = Frame::new(g.node_point(i, k)).unwrap();
        for (j, &r) in g.r_nodes().iter().enumerate() {
            let d = circle_mean(&f, &frame, r);
            assert!((phi[j] - d).abs() < 1e-12, "row {j}: {} vs {d}", phi[j]);
        }
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, v) = golden_max(0.0, 2.0, |r| -(r - 1.3).powi(2));
        assert!((x - 1.3).abs() < 1e-3 && v <= 0.0);
    }

    #[test]
    fn constant_width() {
        let g = PolarGrid::square(32).unwrap();
        let (w, rec) = mina_upper_bound(&ScalarField::constant(&g, 1.5)).unwrap();
        assert!((w - 4.0 * PI * PI * 1.5).abs() < 1e-9, "{w}");
        assert_eq!(rec.center_node, 0);
        assert!((rec.best_radius - PI / 2.0).abs() <= g.dr());
    }

    #[test]
    fn h_set_of_constant() {
        let g = PolarGrid::square(16).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let set = build_h_set(&f, 2.0 * PI * PI, HypothesisMode::Report).unwrap();
        assert!(set.entries.iter().all(|e| e.radius <= PI / 2.0 && (e.radius - PI / 2.0).abs() < g.dr()));
        assert!(set.all_checks_pass());
        assert!(!set.l2_hypothesis.pass);
        assert!(matches!(build_h_set(&f, 2.0 * PI * PI, HypothesisMode::Enforce), Err(Error::Hypothesis(_))));
        let trace = vitali_trace_from(&f, &set).unwrap();
        assert!(trace.holds(), "{:?}", trace.links);
        assert!((trace.l1_norm - 4.0 * PI).abs() < 4.0 * PI / 256.0);
    }

    #[test]
    fn degenerate_h_set_breaks_coverage() {
        let g = PolarGrid::square(16).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let entry = HEntry {
            center: g.node_point(3, 0),
            node: g.index(3, 0),
            radius: PI / 2.0,
            circle_integral: 2.0 * PI,
            floor: 1.0,
            folded: false,
            pairing_distance: 0.0,
        };
        let set = HSet::from_entries(&f, 2.0 * PI * PI, vec![entry]).unwrap();
        let trace = vitali_trace_from(&f, &set).unwrap();
        assert_eq!(trace.links[trace.first_broken.unwrap()].label, "b");
    }

    #[test]
    fn floor_estimate_branches() {
        let g = PolarGrid::square(32).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        let est = fj_floor_estimate(&one, &one, 2f64.sqrt(), None).unwrap();
        assert!(est.report.pass && est.r1.is_some());
        assert_eq!(est.essential_infimum, 1.0);
        let far = ScalarField::from_fn(&g, |r, _| 1.0 + 20.0 * r.cos().powi(2));
        let est = fj_floor_estimate(&far, &one, 10.0, None).unwrap();
        assert!(est.r1.is_none() && !est.report.notes.is_empty());
    }
}
