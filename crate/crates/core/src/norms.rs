//! Discrete anisotropic Sobolev `H^{s1,s2}`, space-time `H^{b,s1,s2}` and
//! Bourgain `X^{b,s1,s2}` norms.
//!
//! Space-time norms taper the trajectory in time with a raised-cosine window,
//! take the DFT over the `n` stored samples and weight bin `j` at
//! `tau_j = 2 pi j' / (n dt)` (`j'` the signed bin index). With the taper
//! `w_k` the squared norm is
//! `(dt / n) * parseval * sum_{j, nu} weight(tau_j, nu) |sum_k w_k c_k(nu) e^{-i tau_j (t_k - t_0)}|^2`,
//! so at zero weight exponents it equals `sum_k dt w_k^2 ||u(t_k)||^2` exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{signed_frequency, Grid2D};
use crate::semigroup::{PropagatorKind, PropagatorTable};
use crate::solver::Trajectory;

/// Minimum number of time steps for the windowed transform.
pub const MIN_TIME_STEPS: usize = 16;

/// Default share of the interval tapered at each end.
pub const DEFAULT_TAPER_FRACTION: f64 = 0.1;

/// `<x> = (1 + x^2)^{1/2}`
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Raised-cosine taper rising over the first `fraction` of the samples and
/// falling over the last `fraction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaperWindow {
    pub fraction: f64,
}

impl Default for TaperWindow {
    fn default() -> Self {
        Self {
            fraction: DEFAULT_TAPER_FRACTION,
        }
    }
}

impl TaperWindow {
    pub fn new(fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 0.5) {
            return Err(invalid("taper_fraction", format!("{fraction} not in (0, 1/2]")));
        }
        Ok(Self { fraction })
    }

    /// Window value at relative position `s` in `[0, 1]`.
    pub fn value(&self, s: f64) -> f64 {
        let edge = s.min(1.0 - s);
        if edge <= 0.0 {
            0.0
        } else if edge >= self.fraction {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * edge / self.fraction).cos())
        }
    }

    /// Weights for `n` equally spaced samples including both endpoints.
    pub fn weights(&self, n: usize) -> Vec<f64> {
        if n < 2 {
            return vec![1.0; n];
        }
        (0..n)
            .map(|k| self.value(k as f64 / (n - 1) as f64))
            .collect()
    }
}

/// `<xi>^{2 s1} <eta>^{2 s2}` per grid mode.
#[derive(Clone, Debug)]
pub struct SobolevWeight {
    pub s1: f64,
    pub s2: f64,
    table: Vec<f64>,
}

impl SobolevWeight {
    pub fn new(grid: &Grid2D, s1: f64, s2: f64) -> Self {
        let table = (0..grid.len())
            .map(|i| {
                let (xi, eta) = grid.wavenumber(i);
                Self::value(s1, s2, xi, eta)
            })
            .collect();
        Self { s1, s2, table }
    }

    pub fn value(s1: f64, s2: f64, xi: f64, eta: f64) -> f64 {
        (1.0 + xi * xi).powf(s1) * (1.0 + eta * eta).powf(s2)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// `<i sigma + xi^2>^{2b} <xi>^{2 s1} <eta>^{2 s2}` with `sigma = tau - P(xi, eta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BourgainWeight {
    pub b: f64,
    pub s1: f64,
    pub s2: f64,
}

impl BourgainWeight {
    pub fn value(&self, sigma: f64, xi: f64, eta: f64) -> f64 {
        let xi2 = xi * xi;
        (1.0 + sigma * sigma + xi2 * xi2).powf(self.b) * SobolevWeight::value(self.s1, self.s2, xi, eta)
    }
}

/// `||f||_{H^{s1,s2}}` with the grid's Parseval measure.
pub fn sobolev_norm(f: &SpectralField, s1: f64, s2: f64) -> f64 {
    let grid = f.grid();
    let ny = grid.ny();
    let (xi, eta) = (grid.xi(), grid.eta());
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| SobolevWeight::value(s1, s2, xi[i / ny], eta[i % ny]) * c.norm_sqr())
        .sum();
    (grid.parseval_factor() * sum).sqrt()
}

/// Signed angular frequencies of an `n`-point DFT at spacing `dt`.
pub fn time_frequencies(n: usize, dt: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    (0..n).map(|j| scale * signed_frequency(j, n) as f64).collect()
}

fn check_samples(traj: &Trajectory) -> Result<()> {
    if traj.steps() < MIN_TIME_STEPS {
        return Err(Error::TooFewSamples {
            min: MIN_TIME_STEPS,
            got: traj.steps(),
        });
    }
    Ok(())
}

struct TimeTransform {
    n: usize,
    dt: f64,
    taper: Vec<f64>,
    taus: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl TimeTransform {
    fn new(n: usize, dt: f64, window: &TaperWindow) -> Self {
        Self {
            n,
            dt,
            taper: window.weights(n),
            taus: time_frequencies(n, dt),
            fft: FftPlanner::new().plan_fft_forward(n),
        }
    }

    /// `(dt/n) sum_j weight(tau_j) |DFT_j(w * series)|^2`
    fn weighted_energy(&self, series: &mut [Complex64], weight: impl Fn(f64) -> f64) -> f64 {
        for (c, w) in series.iter_mut().zip(&self.taper) {
            *c *= w;
        }
        self.fft.process(series);
        let sum: f64 = series
            .iter()
            .zip(&self.taus)
            .map(|(c, &tau)| weight(tau) * c.norm_sqr())
            .sum();
        self.dt / self.n as f64 * sum
    }
}

/// Windowed time-frequency norm of a trajectory with weight `weight(tau, i)`
/// on mode `i`. Per-mode partial sums are reduced in index order so the
/// result does not depend on the thread count.
fn windowed_norm(
    traj: &Trajectory,
    window: &TaperWindow,
    weight: impl Fn(f64, usize) -> f64 + Sync,
) -> Result<f64> {
    check_samples(traj)?;
    let grid = traj.grid();
    let n = traj.states().len();
    let transform = TimeTransform::new(n, traj.dt(), window);
    let partial: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut series: Vec<Complex64> = traj.states().iter().map(|s| s.coeffs()[i]).collect();
            if series.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                return 0.0;
            }
            transform.weighted_energy(&mut series, |tau| weight(tau, i))
        })
        .collect();
    let sum: f64 = partial.iter().sum();
    Ok((grid.parseval_factor() * sum).sqrt())
}

/// `||u||_{H^{b,s1,s2}}` with weight `<tau>^{2b} <xi>^{2 s1} <eta>^{2 s2}`.
pub fn spacetime_norm(traj: &Trajectory, b: f64, s1: f64, s2: f64) -> Result<f64> {
    spacetime_norm_with(traj, b, s1, s2, &TaperWindow::default())
}

pub fn spacetime_norm_with(
    traj: &Trajectory,
    b: f64,
    s1: f64,
    s2: f64,
    window: &TaperWindow,
) -> Result<f64> {
    let sobolev = SobolevWeight::new(traj.grid(), s1, s2);
    let table = sobolev.table();
    windowed_norm(traj, window, |tau, i| (1.0 + tau * tau).powf(b) * table[i])
}

/// `||u||_{X^{b,s1,s2}}` with `sigma = tau - P(nu)`.
pub fn bourgain_norm(traj: &Trajectory, b: f64, s1: f64, s2: f64) -> Result<f64> {
    bourgain_norm_with(traj, b, s1, s2, &TaperWindow::default())
}

pub fn bourgain_norm_with(
    traj: &Trajectory,
    b: f64,
    s1: f64,
    s2: f64,
    window: &TaperWindow,
) -> Result<f64> {
    let grid = traj.grid();
    let sobolev = SobolevWeight::new(grid, s1, s2);
    let table = sobolev.table();
    let p = grid.symbol().values();
    let ny = grid.ny();
    let xi4: Vec<f64> = grid.xi().iter().map(|x| (x * x) * (x * x)).collect();
    windowed_norm(traj, window, |tau, i| {
        let sigma = tau - p[i];
        (1.0 + sigma * sigma + xi4[i / ny]).powf(b) * table[i]
    })
}

/// `||u||_X / (||U(-t) u||_{H^{b,s1,s2}} + ||u||_{L2_t H^{s1+2b,s2}})`, all with
/// the same window; defined as 1 when both sides vanish.
pub fn equivalence_gap(traj: &Trajectory, b: f64, s1: f64, s2: f64) -> Result<f64> {
    let window = TaperWindow::default();
    let x = bourgain_norm_with(traj, b, s1, s2, &window)?;
    let grid = traj.grid();
    let pulled_back = traj.map(|t, s| PropagatorTable::build(grid, PropagatorKind::Free, -t).apply(s));
    let first = spacetime_norm_with(&pulled_back, b, s1, s2, &window)?;
    let second = spacetime_norm_with(traj, 0.0, s1 + 2.0 * b, s2, &window)?;
    let denominator = first + second;
    if denominator == 0.0 {
        return Ok(if x == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(x / denominator)
}

/// Windowed norm of a scalar time signal: `sqrt((dt/n) sum_j weight(tau_j) |DFT_j(w f)|^2)`.
pub fn signal_norm(values: &[Complex64], dt: f64, window: &TaperWindow, weight: impl Fn(f64) -> f64) -> f64 {
    let transform = TimeTransform::new(values.len(), dt, window);
    let mut series = values.to_vec();
    transform.weighted_energy(&mut series, weight).sqrt()
}
