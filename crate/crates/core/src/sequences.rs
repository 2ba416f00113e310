//! Families of warping functions and diagnostics for their convergence.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::harmonics::Harmonic;
use crate::means::{essential_infimum, truncate, weak_pairing, TruncationLevel, DEFAULT_ESS_DELTA};
use crate::metrics::{nnsc_check_cos, nnsc_check_soc, volume_cos, CosMetric, SocMetric};
use crate::report::InequalityReport;
use crate::spheregrid::{
    dirichlet_form, gradient_norm, laplacian, lq_norm, w1p_norm, CircleField, CircleGrid, PolarGrid, ScalarField,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `f_j = c`.
    Constant { c: f64 },
    /// `f_j = c + eps_j Y_lm` with `eps_j = eps j / (j + 1)`.
    Harmonic { c: f64, eps: f64, l: usize, m: i64 },
    /// `f_j = C + min(K_j, -ln sin(r/2))` with `K_j = 1 + ln j`, corner smoothed.
    LogSpike { floor: f64 },
    /// `f_j = (c + eps cos r) / j`, collapsing to zero.
    Scaled { c: f64, eps: f64 },
    /// `h_j = c` on the circle.
    SocConstant { c: f64 },
    /// `h_j = c + eps_j cos phi` with `eps_j = eps j / (j + 1)`.
    SocHarmonic { c: f64, eps: f64 },
}

impl FamilyKind {
    pub fn is_circle(&self) -> bool {
        matches!(self, Self::SocConstant { .. } | Self::SocHarmonic { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Harmonic { .. } => "harmonic",
            Self::LogSpike { .. } => "log_spike",
            Self::Scaled { .. } => "scaled",
            Self::SocConstant { .. } => "soc_constant",
            Self::SocHarmonic { .. } => "soc_harmonic",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant { c } | Self::SocConstant { c } => c > 0.0,
            Self::Harmonic { c, eps, l, m } => c > eps.abs() && Harmonic::new(l, m).is_some(),
            Self::LogSpike { floor } => floor >= 1.0,
            Self::Scaled { c, eps } => c > eps.abs(),
            Self::SocHarmonic { c, eps } => c > eps.abs(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("parameters of {self:?} do not give a positive family")))
        }
    }
}

/// Truncation level `K_j = 1 + ln j` of the log-spike family.
pub fn log_spike_level(j: usize) -> f64 {
    1.0 + (j as f64).ln()
}

fn harmonic_eps(eps: f64, j: usize) -> f64 {
    eps * j as f64 / (j as f64 + 1.0)
}

/// The singular profile `-ln sin(r/2)`, zero at the south pole.
pub fn log_profile(r: f64) -> f64 {
    -(0.5 * r).sin().ln()
}

/// `min(K, -ln sin(r/2))` with the corner replaced by a concave parabola.
///
/// The parabola starts flat at `a` and meets the profile with matching slope
/// at `b = max(r_K + h, b_min)`, where `r_K` solves `-ln sin(r_K/2) = K`.
pub fn log_spike_profile(k: f64, h: f64, b_min: f64) -> impl Fn(f64) -> f64 {
    let rk = 2.0 * (-k).exp().asin();
    let b = (rk + h).max(b_min);
    let gb = log_profile(b);
    let slope = -0.5 / (0.5 * b).tan();
    // the tangent at b meets the level K at rs; a = 2 rs - b makes the blend a parabola in r
    let rs = b + (k - gb) / slope;
    let a = 2.0 * rs - b;
    move |r: f64| {
        if r >= b {
            log_profile(r)
        } else if r <= a {
            k
        } else {
            let t = (r - a) / (b - a);
            k - t * t * (k - gb)
        }
    }
}

/// Smallest blend end point that keeps the corner away from rows where the
/// sampled profile is under-resolved.
///
/// Near the pole the discrete Laplacian of `-ln sin(r/2)` overshoots the exact
/// value `1/2` by `O(1/(i^4 h^2))` on row `i`. The returned face lies below
/// the first row from which the overshoot stays under half the curvature
/// margin `1/2 + g` available with floor 1.
pub fn log_spike_resolved_radius(grid: &Arc<PolarGrid>) -> f64 {
    let g = ScalarField::from_fn(grid, |r, _| log_profile(r));
    let lap = laplacian(&g);
    let nr = grid.n_r();
    let ok = |i: usize| lap.at(i, 0) <= 0.75 + 0.5 * g.at(i, 0);
    let first = (0..nr / 2).rev().take_while(|&i| ok(i)).last().unwrap_or(nr / 2);
    grid.r_nodes()[first] - 0.5 * grid.dr()
}

pub fn log_spike_field(grid: &Arc<PolarGrid>, k: f64, floor: f64) -> Result<ScalarField> {
    if !(k > 0.0) || !(floor >= 1.0) {
        return Err(invalid(format!("log spike needs K > 0 and floor >= 1, got K = {k}, floor = {floor}")));
    }
    let p = log_spike_profile(k, grid.dr(), log_spike_resolved_radius(grid));
    Ok(ScalarField::from_fn(grid, |r, _| floor + p(r)))
}

/// A generated sphere member and its curvature certificate.
#[derive(Debug, Clone)]
pub struct Member {
    pub j: usize,
    pub field: ScalarField,
    pub nnsc: InequalityReport,
}

impl Member {
    pub fn nnsc_verified(&self) -> bool {
        self.nnsc.pass
    }

    pub fn metric(&self) -> CosMetric {
        CosMetric::new(self.field.clone()).expect("generated members are positive")
    }
}

#[derive(Debug, Clone)]
pub struct CircleMember {
    pub j: usize,
    pub field: CircleField,
    pub nnsc: InequalityReport,
}

impl CircleMember {
    pub fn nnsc_verified(&self) -> bool {
        self.nnsc.pass
    }

    pub fn metric(&self) -> SocMetric {
        SocMetric::new(self.field.clone()).expect("generated members are positive")
    }
}

fn sphere_values(kind: &FamilyKind, j: usize, grid: &Arc<PolarGrid>) -> Result<ScalarField> {
    match *kind {
        FamilyKind::Constant { c } => Ok(ScalarField::constant(grid, c)),
        FamilyKind::Harmonic { c, eps, l, m } => {
            let y = Harmonic::new(l, m).expect("validated");
            let e = harmonic_eps(eps, j);
            Ok(ScalarField::from_fn(grid, |r, t| c + e * y.eval(r, t)))
        }
        FamilyKind::LogSpike { floor } => log_spike_field(grid, log_spike_level(j), floor),
        FamilyKind::Scaled { c, eps } => Ok(ScalarField::from_fn(grid, |r, _| (c + eps * r.cos()) / j as f64)),
        _ => Err(invalid(format!("{} is a circle family", kind.name()))),
    }
}

/// Member `j >= 1` of a sphere family, with its NNSC check recorded.
pub fn generate(kind: &FamilyKind, j: usize, grid: &Arc<PolarGrid>) -> Result<Member> {
    kind.validate()?;
    if j == 0 {
        return Err(invalid("family index starts at 1"));
    }
    let field = sphere_values(kind, j, grid)?;
    let m = CosMetric::new(field.clone())?;
    Ok(Member { j, nnsc: nnsc_check_cos(&m, None), field })
}

/// Member `j >= 1` of a circle family, with its NNSC check recorded.
pub fn generate_circle(kind: &FamilyKind, j: usize, grid: &Arc<CircleGrid>) -> Result<CircleMember> {
    kind.validate()?;
    if j == 0 {
        return Err(invalid("family index starts at 1"));
    }
    let field = match *kind {
        FamilyKind::SocConstant { c } => CircleField::constant(grid, c),
        FamilyKind::SocHarmonic { c, eps } => {
            let e = harmonic_eps(eps, j);
            CircleField::from_fn(grid, |p| c + e * p.cos())
        }
        _ => return Err(invalid(format!("{} is a sphere family", kind.name()))),
    };
    let m = SocMetric::new(field.clone())?;
    Ok(CircleMember { j, nnsc: nnsc_check_soc(&m, None), field })
}

/// The `j -> infinity` limit sampled on the grid. Nodes avoid the poles, so the
/// log-spike limit is finite there.
pub fn limit_proxy(kind: &FamilyKind, grid: &Arc<PolarGrid>) -> Result<ScalarField> {
    kind.validate()?;
    match *kind {
        FamilyKind::Constant { c } => Ok(ScalarField::constant(grid, c)),
        FamilyKind::Harmonic { c, eps, l, m } => {
            let y = Harmonic::new(l, m).expect("validated");
            Ok(ScalarField::from_fn(grid, |r, t| c + eps * y.eval(r, t)))
        }
        FamilyKind::LogSpike { floor } => Ok(ScalarField::from_fn(grid, |r, _| floor + log_profile(r))),
        FamilyKind::Scaled { .. } => Ok(ScalarField::constant(grid, 0.0)),
        _ => Err(invalid(format!("{} is a circle family", kind.name()))),
    }
}

pub fn limit_proxy_circle(kind: &FamilyKind, grid: &Arc<CircleGrid>) -> Result<CircleField> {
    kind.validate()?;
    match *kind {
        FamilyKind::SocConstant { c } => Ok(CircleField::constant(grid, c)),
        FamilyKind::SocHarmonic { c, eps } => Ok(CircleField::from_fn(grid, |p| c + eps * p.cos())),
        _ => Err(invalid(format!("{} is a sphere family", kind.name()))),
    }
}

/// Families used by the built-in batteries.
pub fn builtin_families() -> Vec<FamilyKind> {
    vec![
        FamilyKind::Constant { c: 1.0 },
        FamilyKind::Constant { c: 3.0 },
        FamilyKind::Harmonic { c: 3.0, eps: 0.5, l: 2, m: 0 },
        FamilyKind::Harmonic { c: 4.0, eps: 0.3, l: 3, m: 2 },
        FamilyKind::LogSpike { floor: 1.0 },
        FamilyKind::LogSpike { floor: 2.0 },
        FamilyKind::Scaled { c: 3.0, eps: 0.5 },
        FamilyKind::SocConstant { c: 1.0 },
        FamilyKind::SocConstant { c: 3.0 },
        FamilyKind::SocHarmonic { c: 2.0, eps: 0.25 },
        FamilyKind::SocHarmonic { c: 1.0, eps: 0.3 },
    ]
}

fn default_tolerance(grid: &PolarGrid) -> f64 {
    4.0 * PI / (grid.n_r() as f64).powi(2)
}

/// `int |grad ln f|^2 <= 4 pi`.
pub fn grad_log_bound_check(f: &ScalarField, tol: Option<f64>) -> Result<InequalityReport> {
    let m = CosMetric::new(f.clone())?;
    let nnsc = nnsc_check_cos(&m, None);
    let lnf = f.map(f64::ln);
    let lhs = dirichlet_form(&lnf, &lnf)?;
    let mut r =
        InequalityReport::new("int |grad ln f|^2 <= 4 pi", lhs, 4.0 * PI, tol.unwrap_or(default_tolerance(f.grid())))
            .with_hypotheses(nnsc.pass);
    if !nnsc.pass {
        r = r.note(format!("NNSC fails (excess {:.3e})", nnsc.lhs));
    }
    Ok(r)
}

/// `|f|_p^p <= 4 pi exp(V p / (8 pi^2) + p^2 / 4)` when the volume is at most `V`.
pub fn moser_trudinger_check(f: &ScalarField, p: f64, volume: f64, tol: Option<f64>) -> Result<InequalityReport> {
    if !(p >= 1.0) || !(volume > 0.0) {
        return Err(invalid(format!("need p >= 1 and V > 0, got p = {p}, V = {volume}")));
    }
    let m = CosMetric::new(f.clone())?;
    let nnsc = nnsc_check_cos(&m, None);
    let vol = volume_cos(&m);
    let lhs = lq_norm(f, p)?.powf(p);
    let rhs = 4.0 * PI * (volume * p / (8.0 * PI * PI) + 0.25 * p * p).exp();
    let vol_ok = vol <= volume * (1.0 + 1e-12);
    let mut r = InequalityReport::new("Moser-Trudinger", lhs, rhs, tol.unwrap_or(default_tolerance(f.grid())))
        .with_hypotheses(nnsc.pass && vol_ok)
        .detail("p", p)
        .detail("volume", vol);
    if !nnsc.pass {
        r = r.note(format!("NNSC fails (excess {:.3e})", nnsc.lhs));
    }
    if !vol_ok {
        r = r.note(format!("volume {vol:.6e} exceeds V = {volume:.6e}"));
    }
    Ok(r)
}

/// One value per member, keyed by an exponent.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub param: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub family: FamilyKind,
    pub js: Vec<usize>,
    pub nnsc: Vec<bool>,
    /// `|f_j - f_J|_q` with `J` the largest index.
    pub lq_to_last: Vec<Series>,
    /// `|f_j - f_limit|_q` against the limit proxy.
    pub lq_to_limit: Vec<Series>,
    pub w1p: Vec<Series>,
    /// Moser-Trudinger slack with `V` the member's own volume.
    pub moser_trudinger_slack: Vec<Series>,
    pub grad_log_slack: Vec<f64>,
    /// `|<f_j, phi> - <f_J, phi>|` in the weak `W^{1,2}` pairing, one series per test function.
    pub weak_residuals: Vec<Vec<f64>>,
    /// Non-monotone `L^q` trends; warnings only, since convergence may be subsequential.
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn limit_distances_decrease(&self) -> bool {
        self.lq_to_limit.iter().all(|s| strictly_decreasing(&s.values))
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Diagnostics for members `js` of a sphere family.
pub fn convergence_report(
    kind: &FamilyKind,
    js: &[usize],
    ps: &[f64],
    qs: &[f64],
    tests: &[ScalarField],
    grid: &Arc<PolarGrid>,
) -> Result<ConvergenceReport> {
    if js.is_empty() {
        return Err(invalid("no members requested"));
    }
    let mut js = js.to_vec();
    js.sort_unstable();
    js.dedup();
    let members = js.iter().map(|&j| generate(kind, j, grid)).collect::<Result<Vec<_>>>()?;
    let limit = limit_proxy(kind, grid)?;
    let last = &members.last().expect("nonempty").field;
    let dist = |a: &ScalarField, b: &ScalarField, q: f64| -> Result<f64> { lq_norm(&a.zip_map(b, |x, y| x - y)?, q) };
    let mut lq_to_last = Vec::new();
    let mut lq_to_limit = Vec::new();
    let mut warnings = Vec::new();
    for &q in qs {
        let to_last = members.iter().map(|m| dist(&m.field, last, q)).collect::<Result<Vec<_>>>()?;
        let to_limit = members.iter().map(|m| dist(&m.field, &limit, q)).collect::<Result<Vec<_>>>()?;
        if !strictly_decreasing(&to_limit) {
            warnings.push(format!("L^{q} distance to the limit is not strictly decreasing"));
        }
        lq_to_last.push(Series { param: q, values: to_last });
        lq_to_limit.push(Series { param: q, values: to_limit });
    }
    let w1p = ps
        .iter()
        .map(|&p| {
            let values = members.iter().map(|m| w1p_norm(&m.field, p)).collect::<Result<Vec<_>>>()?;
            Ok(Series { param: p, values })
        })
        .collect::<Result<Vec<_>>>()?;
    let moser_trudinger_slack = ps
        .iter()
        .map(|&p| {
            let values = members
                .iter()
                .map(|m| {
                    let v = volume_cos(&m.metric());
                    Ok(moser_trudinger_check(&m.field, p, v, None)?.slack)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Series { param: p, values })
        })
        .collect::<Result<Vec<_>>>()?;
    let grad_log_slack =
        members.iter().map(|m| Ok(grad_log_bound_check(&m.field, None)?.slack)).collect::<Result<Vec<_>>>()?;
    let weak_residuals = tests
        .iter()
        .map(|phi| {
            let reference = weak_pairing(last, phi)?;
            members.iter().map(|m| Ok((weak_pairing(&m.field, phi)? - reference).abs())).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        family: *kind,
        nnsc: members.iter().map(Member::nnsc_verified).collect(),
        js,
        lq_to_last,
        lq_to_limit,
        w1p,
        moser_trudinger_slack,
        grad_log_slack,
        weak_residuals,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffBranch {
    BoundedAway,
    Zero,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffProbe {
    pub level: f64,
    pub js: Vec<usize>,
    /// Essential infimum of `min(f_j, K)` per member.
    pub member_margins: Vec<f64>,
    /// Essential infimum of `min(f_limit, K)`.
    pub margin: f64,
    pub branch: CutoffBranch,
}

/// Which side of the zero / bounded-away alternative the data supports.
///
/// The branch is `zero` when the limit margin vanishes or the member margins
/// shrink by more than a factor 4 across the requested indices.
pub fn cutoff_dichotomy_probe(
    kind: &FamilyKind,
    js: &[usize],
    level: f64,
    grid: &Arc<PolarGrid>,
) -> Result<CutoffProbe> {
    let k = TruncationLevel::new(level)?;
    let member_margins = js
        .iter()
        .map(|&j| essential_infimum(&truncate(&generate(kind, j, grid)?.field, k), DEFAULT_ESS_DELTA))
        .collect::<Result<Vec<_>>>()?;
    let margin = essential_infimum(&truncate(&limit_proxy(kind, grid)?, k), DEFAULT_ESS_DELTA)?;
    let shrinking = match (member_margins.first(), member_margins.last()) {
        (Some(&a), Some(&b)) if member_margins.len() > 1 => b < 0.25 * a,
        _ => false,
    };
    let branch = if margin <= 0.0 || shrinking { CutoffBranch::Zero } else { CutoffBranch::BoundedAway };
    Ok(CutoffProbe { level, js: js.to_vec(), member_margins, margin, branch })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessRow {
    pub eps: f64,
    /// `int |grad f|^2` outside the cap of radius `eps` around the north pole.
    pub energy: f64,
    /// `2 pi ln(1/eps)`.
    pub model: f64,
    pub ratio: f64,
}

/// Dirichlet energy of the log-spike limit outside shrinking caps.
///
/// The row straddling the cap edge is counted with the fraction of its cell
/// that lies outside.
pub fn sharpness_witness(grid: &Arc<PolarGrid>, floor: f64, eps: &[f64]) -> Result<Vec<WitnessRow>> {
    let f = limit_proxy(&FamilyKind::LogSpike { floor }, grid)?;
    let g2 = gradient_norm(&f).map(|v| v * v);
    let h = grid.dr();
    let nt = grid.n_theta();
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e < PI) {
                return Err(invalid(format!("cap radius must lie in (0, pi), got {e}")));
            }
            let energy: f64 = grid
                .r_nodes()
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let frac = ((r + 0.5 * h - e) / h).clamp(0.0, 1.0);
                    let row: f64 = (0..nt).map(|k| grid.weights()[i * nt + k] * g2.values()[i * nt + k]).sum();
                    frac * row
                })
                .sum();
            let model = 2.0 * PI * (1.0 / e).ln();
            Ok(WitnessRow { eps: e, energy, model, ratio: energy / model })
        })
        .collect()
}
