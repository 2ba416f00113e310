//! Real spherical harmonics scaled to unit sup norm, and a few fields built from them.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spheregrid::{laplacian, PolarGrid, ScalarField};

/// Associated Legendre function `P_l^m(x)` without the Condon-Shortley phase.
pub fn legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * p - (ll + m - 1) as f64 * p_prev) / (ll - m) as f64;
        p_prev = p;
        p = next;
    }
    p
}

fn legendre_sup(l: usize, m: usize) -> f64 {
    const SAMPLES: usize = 20_000;
    (0..=SAMPLES).map(|j| legendre(l, m, (PI * j as f64 / SAMPLES as f64).cos()).abs()).fold(0.0, f64::max)
}

/// Real harmonic of degree `l` and order `m` (`|m| <= l`), an eigenfunction of
/// the round Laplacian with eigenvalue `-l(l+1)`, scaled so its sup norm is 1.
/// Negative `m` selects the `sin(|m| theta)` member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub l: usize,
    pub m: i64,
    scale: f64,
}

impl Harmonic {
    pub fn new(l: usize, m: i64) -> Option<Self> {
        let am = m.unsigned_abs() as usize;
        if am > l {
            return None;
        }
        Some(Self { l, m, scale: 1.0 / legendre_sup(l, am) })
    }

    pub fn eigenvalue(&self) -> f64 {
        -((self.l * (self.l + 1)) as f64)
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let am = self.m.unsigned_abs() as usize;
        let ang = if self.m >= 0 { (am as f64 * theta).cos() } else { (am as f64 * theta).sin() };
        self.scale * legendre(self.l, am, r.cos()) * ang
    }

    pub fn sample(&self, grid: &Arc<PolarGrid>) -> ScalarField {
        ScalarField::from_fn(grid, |r, t| self.eval(r, t))
    }

    /// All harmonics of degree `1..=lmax`.
    pub fn up_to(lmax: usize) -> Vec<Self> {
        (1..=lmax).flat_map(|l| (-(l as i64)..=l as i64).filter_map(move |m| Self::new(l, m))).collect()
    }
}

/// `c0 + sum a_lm Y_lm` with independent uniform coefficients in
/// `[-amplitude, amplitude]`, degrees `1..=lmax`.
pub fn band_limited_random(grid: &Arc<PolarGrid>, c0: f64, lmax: usize, amplitude: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(Harmonic, f64)> =
        Harmonic::up_to(lmax).into_iter().map(|h| (h, rng.gen_range(-amplitude..=amplitude))).collect();
    ScalarField::from_fn(grid, |r, t| c0 + terms.iter().map(|(h, a)| a * h.eval(r, t)).sum::<f64>())
}

/// Discrete Laplacian error on one harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicError {
    pub l: usize,
    pub m: i64,
    /// Max error over all nodes.
    pub max: f64,
    /// Max error over nodes with `pi/8 <= r <= 7pi/8`.
    pub max_interior: f64,
    /// Area-weighted root mean square error, normalized by the sphere area.
    pub rms: f64,
}

/// Compares [`laplacian`] against `-l(l+1) Y` for every harmonic with `l <= lmax`.
pub fn laplacian_errors(grid: &Arc<PolarGrid>, lmax: usize) -> Vec<HarmonicError> {
    let cap = PI / 8.0;
    Harmonic::up_to(lmax)
        .into_iter()
        .map(|h| {
            let y = h.sample(grid);
            let lap = laplacian(&y);
            let (mut max, mut max_interior, mut sq) = (0.0_f64, 0.0_f64, 0.0);
            for (idx, (a, b)) in lap.values().iter().zip(y.values()).enumerate() {
                let e = (a - h.eigenvalue() * b).abs();
                let r = grid.r_nodes()[idx / grid.n_theta()];
                max = max.max(e);
                if r >= cap && r <= PI - cap {
                    max_interior = max_interior.max(e);
                }
                sq += grid.weights()[idx] * e * e;
            }
            HarmonicError { l: h.l, m: h.m, max, max_interior, rms: (sq / (4.0 * PI)).sqrt() }
        })
        .collect()
}
