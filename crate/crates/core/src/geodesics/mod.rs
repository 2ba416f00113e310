//! Geodesics of the circle-over-sphere metric `g_S2 + f^2 dphi^2`.
//!
//! Coordinates are `(r, theta, phi)`. `phi` is integrated on the real line, so
//! its displacement at a closure directly gives the winding number around the
//! fiber.

mod smooth;

use std::f64::consts::PI;
use std::thread;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::DEFAULT_ESS_DELTA;
use crate::metrics::CosMetric;
use crate::mina::fj_floor_estimate;
use crate::spheregrid::{lq_norm, sphere_distance, spherical_to_point, ScalarField};

pub use smooth::{SmoothWarp, WarpSample};

/// Closure tolerance on the position distance.
pub const CLOSE_POSITION_TOL: f64 = 1e-4;
/// Closure tolerance on the angle between initial and final velocity.
pub const CLOSE_ANGLE_TOL: f64 = 1e-3;
/// A trajectory must first get this far from its start before a return counts.
const LEAVE_DISTANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    /// `(r, theta, phi)`.
    pub position: [f64; 3],
    /// `(r', theta', phi')`.
    pub velocity: [f64; 3],
    /// `r'^2 + sin^2 r theta'^2 + f^2 phi'^2`.
    pub energy: f64,
    /// `f^2 phi'`, conserved because `d/dphi` is Killing.
    pub killing_momentum: f64,
}

impl GeodesicState {
    pub fn new(warp: &SmoothWarp, position: [f64; 3], velocity: [f64; 3]) -> Self {
        let f = warp.eval(position[0], position[1]).f;
        let s = position[0].sin();
        let [dr, dt, dp] = velocity;
        Self { position, velocity, energy: dr * dr + s * s * dt * dt + f * f * dp * dp, killing_momentum: f * f * dp }
    }

    /// Unit-speed state. `psi` is the angle out of the base (`pi/2` is purely
    /// along the fiber), `alpha` the base heading measured from `d/dr`.
    pub fn unit(warp: &SmoothWarp, position: [f64; 3], alpha: f64, psi: f64) -> Self {
        let f = warp.eval(position[0], position[1]).f;
        let base = psi.cos();
        let vel = [base * alpha.cos(), base * alpha.sin() / position[0].sin(), psi.sin() / f];
        // exact zeros keep base seeds exactly in the base
        let vel = vel.map(|v| if v.abs() < 1e-15 { 0.0 } else { v });
        Self::new(warp, position, vel)
    }

    fn point(&self) -> [f64; 3] {
        spherical_to_point(self.position[0], self.position[1])
    }

    /// Velocity in `R^3 x R`: the base part embedded in space, then `f phi'`.
    fn embedded_velocity(&self, f: f64) -> [f64; 4] {
        let [r, th, _] = self.position;
        let [dr, dt, dp] = self.velocity;
        let (sr, cr, st, ct) = (r.sin(), r.cos(), th.sin(), th.cos());
        let er = [cr * ct, cr * st, -sr];
        let et = [-st, ct, 0.0];
        let b = |i: usize| dr * er[i] + sr * dt * et[i];
        [b(0), b(1), b(2), f * dp]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GeodesicState>,
    /// `max_t |E(t) - E(0)|`.
    pub energy_drift: f64,
    /// `max_t |f^2 phi'(t) - f^2 phi'(0)|`.
    pub killing_drift: f64,
    /// Set when the path ran into a polar cap before `T`.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn initial(&self) -> &GeodesicState {
        &self.states[0]
    }
}

type Phase = [f64; 6];

fn rhs(warp: &SmoothWarp, y: &Phase) -> Phase {
    let [r, th, _, dr, dt, dp] = *y;
    let WarpSample { f, f_r, f_theta } = warp.eval(r, th);
    let (s, c) = (r.sin(), r.cos());
    [
        dr,
        dt,
        dp,
        s * c * dt * dt + f * f_r * dp * dp,
        -2.0 * c / s * dr * dt + f * f_theta * dp * dp / (s * s),
        -2.0 * (f_r * dr + f_theta * dt) * dp / f,
    ]
}

fn rk4_step(warp: &SmoothWarp, y: &Phase, h: f64) -> Phase {
    let add = |a: &Phase, k: &Phase, s: f64| -> Phase { std::array::from_fn(|i| a[i] + s * k[i]) };
    let k1 = rhs(warp, y);
    let k2 = rhs(warp, &add(y, &k1, 0.5 * h));
    let k3 = rhs(warp, &add(y, &k2, 0.5 * h));
    let k4 = rhs(warp, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn pole_margin(warp: &SmoothWarp) -> f64 {
    2.0 * warp.grid().dr()
}

/// Classical RK4 on the geodesic equations, recording every step.
///
/// Leaving the band `2h <= r <= pi - 2h` stops the integration; the partial
/// trajectory is returned with `aborted` set.
pub fn geodesic_integrate(warp: &SmoothWarp, s0: &GeodesicState, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(crate::error::invalid(format!("need T > 0 and dt > 0, got T = {t_end}, dt = {dt}")));
    }
    let margin = pole_margin(warp);
    let r0 = s0.position[0];
    if r0 < margin || r0 > PI - margin {
        return Err(Error::SeedNearPole { r: r0 });
    }
    let s0 = GeodesicState::new(warp, s0.position, s0.velocity);
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(s0);
    let (mut e_drift, mut k_drift) = (0.0f64, 0.0f64);
    let mut aborted = None;
    let mut y: Phase = [s0.position[0], s0.position[1], s0.position[2], s0.velocity[0], s0.velocity[1], s0.velocity[2]];
    for n in 1..=steps {
        y = rk4_step(warp, &y, dt);
        let t = n as f64 * dt;
        if !(y[0] >= margin && y[0] <= PI - margin) || y.iter().any(|v| !v.is_finite()) {
            aborted = Some(format!("entered a polar cap at t = {t:.6} (r = {:.6})", y[0]));
            break;
        }
        let s = GeodesicState::new(warp, [y[0], y[1], y[2]], [y[3], y[4], y[5]]);
        e_drift = e_drift.max((s.energy - s0.energy).abs());
        k_drift = k_drift.max((s.killing_momentum - s0.killing_momentum).abs());
        times.push(t);
        states.push(s);
    }
    Ok(Trajectory { times, states, energy_drift: e_drift, killing_drift: k_drift, aborted })
}

/// Cubic Hermite interpolation between two recorded states; returns the
/// interpolated position and its time derivative.
fn hermite(a: &GeodesicState, b: &GeodesicState, h: f64, s: f64) -> ([f64; 3], [f64; 3]) {
    let (s2, s3) = (s * s, s * s * s);
    let (h00, h10, h01, h11) = (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2);
    let (d00, d10, d01, d11) = (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s);
    let p = std::array::from_fn(|i| {
        h00 * a.position[i] + h10 * h * a.velocity[i] + h01 * b.position[i] + h11 * h * b.velocity[i]
    });
    let v = std::array::from_fn(|i| {
        (d00 * a.position[i] + d01 * b.position[i]) / h + d10 * a.velocity[i] + d11 * b.velocity[i]
    });
    (p, v)
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn angle_between(a: [f64; 4], b: [f64; 4]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return PI;
    }
    let d = (0..4).map(|i| (a[i] / na - b[i] / nb).powi(2)).sum::<f64>().sqrt();
    2.0 * (0.5 * d).min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closure {
    pub time: f64,
    pub position_distance: f64,
    pub velocity_angle: f64,
    /// `phi(t) - phi(0)` at the closure, unwrapped.
    pub phi_displacement: f64,
}

struct Returner<'a> {
    warp: &'a SmoothWarp,
    start: GeodesicState,
    f0: f64,
    p0: [f64; 3],
}

impl Returner<'_> {
    fn distance(&self, pos: [f64; 3]) -> f64 {
        let base = sphere_distance(spherical_to_point(pos[0], pos[1]), self.p0);
        let fiber = self.f0 * wrap_angle(pos[2] - self.start.position[2]);
        base.hypot(fiber)
    }

    fn angle(&self, pos: [f64; 3], vel: [f64; 3]) -> f64 {
        let s = GeodesicState { position: pos, velocity: vel, energy: 0.0, killing_momentum: 0.0 };
        let f = self.warp.eval(pos[0], pos[1]).f;
        angle_between(self.start.embedded_velocity(self.f0), s.embedded_velocity(f))
    }
}

/// First time the trajectory returns to its initial point with its initial
/// direction, within the closure tolerances.
pub fn find_closure(warp: &SmoothWarp, traj: &Trajectory) -> Option<Closure> {
    let start = *traj.initial();
    let ret = Returner { warp, start, f0: warp.eval(start.position[0], start.position[1]).f, p0: start.point() };
    let d: Vec<f64> = traj.states.iter().map(|s| ret.distance(s.position)).collect();
    let left = d.iter().position(|&x| x > LEAVE_DISTANCE)?;
    let n = d.len();
    for j in left.max(1)..n {
        let next = if j + 1 < n { d[j + 1] } else { f64::INFINITY };
        if !(d[j] <= d[j - 1] && d[j] <= next) {
            continue;
        }
        let hi = (j + 1).min(n - 1);
        let eval = |t: f64| -> ([f64; 3], [f64; 3]) {
            let seg = ((t - traj.times[j - 1]) / (traj.times[j] - traj.times[j - 1])).floor() as usize;
            let a = (j - 1 + seg).min(hi.max(j) - 1);
            let h = traj.times[a + 1] - traj.times[a];
            hermite(&traj.states[a], &traj.states[a + 1], h, ((t - traj.times[a]) / h).clamp(0.0, 1.0))
        };
        let (lo_t, hi_t) = (traj.times[j - 1], traj.times[hi]);
        let t = golden_min(lo_t, hi_t, |t| ret.distance(eval(t).0));
        let (pos, vel) = eval(t);
        let dist = ret.distance(pos);
        if dist < CLOSE_POSITION_TOL {
            let ang = ret.angle(pos, vel);
            if ang < CLOSE_ANGLE_TOL {
                return Some(Closure {
                    time: t,
                    position_distance: dist,
                    velocity_angle: ang,
                    phi_displacement: pos[2] - start.position[2],
                });
            }
        }
    }
    None
}

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dichotomy {
    WrapsFiber {
        winding: i64,
    },
    BaseGeodesic,
    /// Never closed within the tolerances; no claim.
    Open,
    /// Closed, zero winding, but `phi` moved: contradicts the dichotomy.
    Violation {
        phi_excursion: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyOutcome {
    pub class: Dichotomy,
    pub closure: Option<Closure>,
    /// Allowed `phi` excursion on the base branch.
    pub phi_tolerance: f64,
}

/// Classify a trajectory as fiber-wrapping, a base geodesic, or open.
///
/// The base branch allows a `phi` excursion of `10 * killing_drift * t / min f^2`,
/// the amount a drifting momentum could move `phi` by.
pub fn dichotomy_check(warp: &SmoothWarp, traj: &Trajectory) -> DichotomyOutcome {
    let fmin = traj.states.iter().map(|s| warp.eval(s.position[0], s.position[1]).f).fold(f64::INFINITY, f64::min);
    let Some(closure) = find_closure(warp, traj) else {
        return DichotomyOutcome { class: Dichotomy::Open, closure: None, phi_tolerance: 0.0 };
    };
    let phi_tolerance = 10.0 * traj.killing_drift * closure.time / (fmin * fmin) + 1e-12;
    let winding = (closure.phi_displacement / (2.0 * PI)).round() as i64;
    let class = if winding != 0 {
        Dichotomy::WrapsFiber { winding }
    } else {
        let phi0 = traj.initial().position[2];
        let excursion = traj
            .times
            .iter()
            .zip(&traj.states)
            .take_while(|(t, _)| **t <= closure.time)
            .map(|(_, s)| (s.position[2] - phi0).abs())
            .fold(0.0, f64::max);
        if excursion <= phi_tolerance {
            Dichotomy::BaseGeodesic
        } else {
            Dichotomy::Violation { phi_excursion: excursion }
        }
    };
    DichotomyOutcome { class, closure: Some(closure), phi_tolerance }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    pub seed: GeodesicState,
    pub outcome: DichotomyOutcome,
    pub aborted: bool,
    pub energy_drift: f64,
    pub killing_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingReport {
    pub results: Vec<ShootingResult>,
    pub wraps_fiber: usize,
    pub base: usize,
    pub open: usize,
    pub aborted: usize,
    pub violations: usize,
}

/// The seed grid used for the dichotomy battery: `5 x 8 x 5 = 200` unit-speed
/// states around the equator, headings kept away from the radial direction so
/// great circles stay clear of the polar caps.
pub fn default_shooting_seeds(warp: &SmoothWarp) -> Vec<GeodesicState> {
    let rows = [-0.4, -0.2, 0.0, 0.2, 0.4].map(|d| PI / 2.0 + d);
    let psis = [0.0, 0.3, 0.7, 1.2, PI / 2.0];
    let mut seeds = Vec::with_capacity(200);
    for (a, &r) in rows.iter().enumerate() {
        for m in 0..8 {
            let alpha = PI / 2.0 + (m as f64 - 3.5) * 0.25;
            for &psi in &psis {
                seeds.push(GeodesicState::unit(warp, [r, 0.7 * a as f64, 0.0], alpha, psi));
            }
        }
    }
    seeds
}

/// Integrate each seed and classify it. Seeds are split across threads.
pub fn shooting_battery(warp: &SmoothWarp, seeds: &[GeodesicState], t_end: f64, dt: f64) -> Result<ShootingReport> {
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers).max(1);
    let results: Result<Vec<Vec<ShootingResult>>> = thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|s| {
                            let traj = geodesic_integrate(warp, s, t_end, dt)?;
                            Ok(ShootingResult {
                                seed: traj.states[0],
                                outcome: dichotomy_check(warp, &traj),
                                aborted: traj.aborted.is_some(),
                                energy_drift: traj.energy_drift,
                                killing_drift: traj.killing_drift,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shooting worker panicked")).collect()
    });
    let results: Vec<ShootingResult> = results?.into_iter().flatten().collect();
    let count = |p: fn(&Dichotomy) -> bool| results.iter().filter(|r| p(&r.outcome.class)).count();
    Ok(ShootingReport {
        wraps_fiber: count(|c| matches!(c, Dichotomy::WrapsFiber { .. })),
        base: count(|c| matches!(c, Dichotomy::BaseGeodesic)),
        open: count(|c| matches!(c, Dichotomy::Open)),
        violations: count(|c| matches!(c, Dichotomy::Violation { .. })),
        aborted: results.iter().filter(|r| r.aborted).count(),
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystoleBranch {
    Base,
    Fiber,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystoleBound {
    pub value: f64,
    /// Systole of the round base, `2 pi`.
    pub base: f64,
    /// `2 pi min f`.
    pub fiber: f64,
    pub binding: SystoleBranch,
}

/// `min(2 pi, 2 pi min f)` over the grid nodes.
pub fn systole_lower_bound_cos(m: &CosMetric) -> SystoleBound {
    let base = 2.0 * PI;
    let fiber = 2.0 * PI * m.warp().min();
    let binding = if (base - fiber).abs() <= 1e-12 * base {
        SystoleBranch::Both
    } else if base < fiber {
        SystoleBranch::Base
    } else {
        SystoleBranch::Fiber
    };
    SystoleBound { value: base.min(fiber), base, fiber, binding }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberSystole {
    pub index: usize,
    pub systole: SystoleBound,
    /// `min(2 pi, 2 pi e/4)`.
    pub required: f64,
    pub pass: bool,
    /// Whether the floor estimate found an admissible radius for this member.
    pub floor_admissible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformSystole {
    /// `min(2 pi, (pi/2) e)`.
    pub bound: f64,
    pub essential_infimum: f64,
    /// First member from which every floor estimate is admissible.
    pub j0: usize,
    pub members: Vec<MemberSystole>,
    pub notes: Vec<String>,
}

impl UniformSystole {
    pub fn all_members_pass(&self) -> bool {
        self.members.iter().all(|m| m.pass)
    }
}

/// Uniform systole bound for a sequence converging to `f_limit`.
///
/// The floor estimate runs on every member with `C = max_j |f_j|_2 / sqrt(2 pi)`.
/// Members before the first index from which all estimates are admissible
/// are reported but not required to satisfy the floor.
pub fn systole_uniform_bound(
    members: &[CosMetric],
    f_limit: &ScalarField,
    delta: Option<f64>,
) -> Result<UniformSystole> {
    if members.is_empty() {
        return Err(crate::error::invalid("empty sequence"));
    }
    let delta = delta.unwrap_or(DEFAULT_ESS_DELTA);
    let c = members.iter().map(|m| lq_norm(m.warp(), 2.0)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max)
        / (2.0 * PI).sqrt();
    let floors =
        members.iter().map(|m| fj_floor_estimate(m.warp(), f_limit, c, Some(delta))).collect::<Result<Vec<_>>>()?;
    let e = floors[0].essential_infimum;
    let j0 = floors.iter().rposition(|fl| fl.r1.is_none()).map_or(0, |j| j + 1);
    if j0 == floors.len() {
        return Err(Error::Hypothesis("no member of the sequence admits the floor estimate".into()));
    }
    let mut notes = Vec::new();
    for (j, fl) in floors.iter().enumerate().skip(j0) {
        if !fl.report.pass {
            return Err(Error::Hypothesis(format!(
                "floor estimate fails for member {j}: min f = {:.6e} < e/4 = {:.6e}",
                fl.report.rhs, fl.report.lhs
            )));
        }
    }
    if j0 > 0 {
        notes.push(format!("members 0..{j0} precede the floor regime"));
    }
    let required = (2.0 * PI).min(2.0 * PI * e / 4.0);
    let members = members
        .iter()
        .zip(&floors)
        .enumerate()
        .map(|(index, (m, fl))| {
            let systole = systole_lower_bound_cos(m);
            MemberSystole {
                index,
                systole,
                required,
                pass: index < j0 || systole.value >= required * (1.0 - 1e-12),
                floor_admissible: fl.r1.is_some(),
            }
        })
        .collect();
    Ok(UniformSystole { bound: (2.0 * PI).min(0.5 * PI * e), essential_infimum: e, j0, members, notes })
}

impl SmoothWarp {
    pub fn new(m: &CosMetric) -> Result<Self> {
        Self::from_field(m.warp())
    }
}
