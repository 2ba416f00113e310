//! Smooth interpolant of a sampled warping function.
//!
//! The field is extended across the poles to a function of `(s, theta)` on
//! the torus, `f~(s, theta) = f(s, theta)` for `s < pi` and
//! `f(2 pi - s, theta + pi)` beyond, and represented by its trigonometric
//! interpolant. The result is smooth everywhere, so fourth-order integration
//! sees no derivative jumps.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::spheregrid::{PolarGrid, ScalarField};

/// Coefficients smaller than this fraction of the largest are dropped.
const TRUNCATION: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpSample {
    pub f: f64,
    pub f_r: f64,
    pub f_theta: f64,
}

#[derive(Debug, Clone)]
pub struct SmoothWarp {
    grid: Arc<PolarGrid>,
    /// `(j, k, c)` for the term `c e^{i (j s + k theta)}`.
    terms: Vec<(i32, i32, Complex<f64>)>,
    jmax: usize,
    kmax: usize,
}

impl SmoothWarp {
    /// Requires an even number of azimuthal nodes so that `theta + pi` is a node.
    pub fn from_field(f: &ScalarField) -> Result<Self> {
        let g = f.grid();
        let (nr, nt) = (g.n_r(), g.n_theta());
        if nt % 2 != 0 {
            return Err(invalid("smooth interpolation needs an even n_theta"));
        }
        let ns = 2 * nr;
        let mut data = vec![Complex::new(0.0, 0.0); ns * nt];
        for i in 0..ns {
            for k in 0..nt {
                let v = if i < nr { f.at(i, k) } else { f.at(ns - 1 - i, (k + nt / 2) % nt) };
                data[i * nt + k] = Complex::new(v, 0.0);
            }
        }
        let mut planner = FftPlanner::new();
        let row_fft = planner.plan_fft_forward(nt);
        for row in data.chunks_mut(nt) {
            row_fft.process(row);
        }
        let col_fft = planner.plan_fft_forward(ns);
        let mut col = vec![Complex::new(0.0, 0.0); ns];
        for k in 0..nt {
            for i in 0..ns {
                col[i] = data[i * nt + k];
            }
            col_fft.process(&mut col);
            for i in 0..ns {
                data[i * nt + k] = col[i];
            }
        }
        let norm = 1.0 / (ns * nt) as f64;
        let signed = |idx: usize, n: usize| -> i32 {
            if idx < n / 2 {
                idx as i32
            } else {
                idx as i32 - n as i32
            }
        };
        let h = g.dr();
        let mut raw = Vec::new();
        for j in 0..ns {
            for k in 0..nt {
                let c = data[j * nt + k] * norm;
                let (js, ks) = (signed(j, ns), signed(k, nt));
                // samples sit at s = (i + 1/2) h, so shift the phase back to s = 0
                let c = c * Complex::from_polar(1.0, -(js as f64) * 0.5 * h);
                raw.push((js, ks, c));
            }
        }
        // Nyquist modes are split evenly between +N/2 and -N/2
        let mut split = Vec::with_capacity(raw.len());
        for (j, k, c) in raw {
            let jn = j == -(ns as i32) / 2;
            let kn = k == -(nt as i32) / 2;
            match (jn, kn) {
                (false, false) => split.push((j, k, c)),
                (true, false) => {
                    split.push((j, k, c * 0.5));
                    split.push((-j, k, c * 0.5));
                }
                (false, true) => {
                    split.push((j, k, c * 0.5));
                    split.push((j, -k, c * 0.5));
                }
                (true, true) => {
                    for (a, b) in [(j, k), (-j, k), (j, -k), (-j, -k)] {
                        split.push((a, b, c * 0.25));
                    }
                }
            }
        }
        let cmax = split.iter().map(|t| t.2.norm()).fold(0.0, f64::max);
        let terms: Vec<_> = split.into_iter().filter(|t| t.2.norm() > TRUNCATION * cmax).collect();
        let jmax = terms.iter().map(|t| t.0.unsigned_abs() as usize).max().unwrap_or(0);
        let kmax = terms.iter().map(|t| t.1.unsigned_abs() as usize).max().unwrap_or(0);
        Ok(Self { grid: g.clone(), terms, jmax, kmax })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// Number of retained Fourier terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, r: f64, theta: f64) -> WarpSample {
        let es = powers(r, self.jmax);
        let et = powers(theta, self.kmax);
        let (mut f, mut fr, mut ft) = (0.0, 0.0, 0.0);
        for &(j, k, c) in &self.terms {
            let e = pick(&es, j) * pick(&et, k);
            let z = c * e;
            f += z.re;
            // d/ds of c e^{i(js + k theta)} is i j z, whose real part is -j Im z
            fr -= j as f64 * z.im;
            ft -= k as f64 * z.im;
        }
        WarpSample { f, f_r: fr, f_theta: ft }
    }
}

fn powers(x: f64, n: usize) -> Vec<Complex<f64>> {
    let base = Complex::from_polar(1.0, x);
    let mut out = Vec::with_capacity(n + 1);
    let mut z = Complex::new(1.0, 0.0);
    for m in 0..=n {
        if m % 32 == 0 {
            // re-anchor to keep roundoff from the running product in check
            z = Complex::from_polar(1.0, m as f64 * x);
        }
        out.push(z);
        z *= base;
    }
    out
}

#[inline]
fn pick(p: &[Complex<f64>], j: i32) -> Complex<f64> {
    if j >= 0 {
        p[j as usize]
    } else {
        p[(-j) as usize].conj()
    }
}
