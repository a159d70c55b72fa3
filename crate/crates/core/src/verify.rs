//! Randomized ratio checks of the linear and bilinear estimates.
//!
//! Each check returns `lhs / rhs` for one input; a suite runs many seeded
//! inputs and summarizes the ratios. Stability of the maximum under
//! resolution doubling is the computable stand-in for a finite constant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{make_grid, Grid2D};
use crate::norms::{bourgain_norm, bracket, signal_norm, sobolev_norm, TaperWindow};
use crate::random::{random_field, RandomFieldSpec, Source};
use crate::semigroup::apply_w;
use crate::solver::{phi_functions, product_derivative, Trajectory};

/// Time steps over `[-2, 2]` in [`free_estimate_ratio`].
pub const DEFAULT_FREE_STEPS: usize = 256;

/// Smooth cutoff: 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
pub fn psi(t: f64) -> f64 {
    let x = 2.0 - t.abs();
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Identifies which estimate a ratio belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateId {
    Free,
    Smoothing,
    Bilinear,
}

impl EstimateId {
    pub fn name(&self) -> &'static str {
        match self {
            EstimateId::Free => "free",
            EstimateId::Smoothing => "smoothing",
            EstimateId::Bilinear => "bilinear",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "free" => Some(EstimateId::Free),
            "smoothing" => Some(EstimateId::Smoothing),
            "bilinear" => Some(EstimateId::Bilinear),
            _ => None,
        }
    }
}

/// Parameters of one estimate instance; unused entries are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimateParams {
    pub b: f64,
    pub s1: f64,
    pub s2: f64,
    pub delta: f64,
    pub eps: f64,
    /// Frequency `xi` of the smoothing check.
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRatio {
    pub sample: usize,
    pub seed: u64,
    pub ratio: f64,
}

/// Ratios of one estimate at one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub estimate_id: EstimateId,
    pub params: EstimateParams,
    pub samples: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// Inputs with a vanishing right-hand side but nonzero left-hand side.
    pub violations: usize,
    pub ratios: Vec<SampleRatio>,
}

impl RatioReport {
    pub fn from_samples(
        estimate_id: EstimateId,
        params: EstimateParams,
        ratios: Vec<SampleRatio>,
        violations: usize,
    ) -> Self {
        let mut sorted: Vec<f64> = ratios.iter().map(|r| r.ratio).collect();
        sorted.sort_by(f64::total_cmp);
        let median = match sorted.len() {
            0 => 0.0,
            n if n % 2 == 1 => sorted[n / 2],
            n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
        };
        Self {
            estimate_id,
            params,
            samples: ratios.len(),
            max_ratio: sorted.last().copied().unwrap_or(0.0),
            median_ratio: median,
            violations,
            ratios,
        }
    }
}

/// Seed of sample `i` in a suite started from `seed`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64 + 1)
}

/// `||psi(t) W(t) phi||_{X^{b,s1,s2}} / ||phi||_{H^{s1+2b-1,s2}}` with `t` on
/// `[-2, 2]`.
pub fn free_estimate_ratio(phi: &SpectralField, b: f64, s1: f64, s2: f64) -> Result<f64> {
    free_estimate_ratio_with(phi, b, s1, s2, DEFAULT_FREE_STEPS)
}

pub fn free_estimate_ratio_with(phi: &SpectralField, b: f64, s1: f64, s2: f64, steps: usize) -> Result<f64> {
    if !(0.0..=0.5).contains(&b) {
        return Err(invalid("b", format!("{b} not in [0, 1/2]")));
    }
    let dt = 4.0 / steps as f64;
    let traj = Trajectory::from_fn(-2.0, dt, steps, |t| Ok(apply_w(phi, t)?.scaled(psi(t))))?;
    let lhs = bourgain_norm(&traj, b, s1, s2)?;
    let rhs = sobolev_norm(phi, s1 + 2.0 * b - 1.0, s2);
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Uniform samples of a complex time signal; the grid must contain `t = 0`
/// and cover `[-2, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl TimeSignal {
    pub fn sample(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            t0,
            dt,
            values: (0..n).map(|k| f(t0 + k as f64 * dt)).collect(),
        }
    }

    /// `n` samples on `[-2, 2]`, endpoints included.
    pub fn on_cutoff_support(n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        Self::sample(-2.0, 4.0 / (n - 1) as f64, n, f)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    fn origin_index(&self) -> Result<usize> {
        let k = (-self.t0 / self.dt).round();
        let last = self.time(self.values.len().saturating_sub(1));
        if k < 0.0 || (self.t0 + k * self.dt).abs() > 1e-9 * self.dt || self.t0 > -2.0 + 1e-12 || last < 2.0 - 1e-12 {
            return Err(invalid("signal", "time grid must contain t = 0 and cover [-2, 2]"));
        }
        Ok(k as usize)
    }
}

/// `K(t) = psi(t) int_0^t e^{-|t - t'| xi^2} f(t') dt'` on the signal's grid, with
/// `f` linear between samples and the exponential integrated exactly.
pub fn smoothing_operator(f: &TimeSignal, xi: f64) -> Result<Vec<Complex64>> {
    let origin = f.origin_index()?;
    let h = f.dt;
    let (p1, p2) = phi_functions(Complex64::new(-xi * xi * h, 0.0));
    let (p1, p2) = (p1.re, p2.re);
    let decay = (-xi * xi * h).exp();
    let n = f.values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    // forward from 0; the newer endpoint sits at zero lag
    let mut acc = Complex64::new(0.0, 0.0);
    for k in origin..n - 1 {
        acc = acc * decay + (f.values[k + 1] * p2 + f.values[k] * (p1 - p2)) * h;
        out[k + 1] = acc * psi(f.time(k + 1));
    }
    // backward from 0; int_0^t = -int_t^0
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=origin).rev() {
        acc = acc * decay + (f.values[k - 1] * p2 + f.values[k] * (p1 - p2)) * h;
        out[k - 1] = -acc * psi(f.time(k - 1));
    }
    Ok(out)
}

/// `||K_xi||_{Y^{1/2}} / (<xi>^{-2 delta} ||f||_{Y^{-1/2+delta}})` with the
/// weight `<i tau + xi^2>^b = (1 + tau^2 + xi^4)^{b/2}`.
pub fn smoothing_ratio(f: &TimeSignal, xi: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid("delta", format!("{delta} not in (0, 1/2]")));
    }
    let k = smoothing_operator(f, xi)?;
    let window = TaperWindow::default();
    let xi4 = xi.powi(4);
    let y = |values: &[Complex64], b: f64| signal_norm(values, f.dt, &window, |tau| (1.0 + tau * tau + xi4).powf(b));
    let rhs = bracket(xi).powf(-2.0 * delta) * y(&f.values, -0.5 + delta);
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(y(&k, 0.5) / rhs)
}

/// Smooth random signal `sum_m a_m e^{i w_m t} e^{-(t - c_m)^2 / (2 s_m^2)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSignal {
    terms: Vec<(Complex64, f64, f64, f64)>,
}

impl RandomSignal {
    pub fn new(seed: u64) -> Self {
        let mut src = Source::new(seed);
        let terms = (0..4)
            .map(|_| {
                let a = src.complex_normal();
                let w = src.uniform(-20.0, 20.0);
                let c = src.uniform(-1.0, 1.0);
                let s = src.uniform(0.2, 0.6);
                (a, w, c, s)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(a, w, c, s)| a * Complex64::cis(w * t) * (-(t - c) * (t - c) / (2.0 * s * s)).exp())
            .sum()
    }
}

fn check_bilinear(s1: f64, s2: f64, delta: f64, eps: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("{delta} must be positive")));
    }
    if !(s1 >= -0.5 + 8.0 * delta - 1e-12 && s1 <= 0.0) {
        return Err(invalid("s1", format!("{s1} not in [-1/2 + 8 delta, 0] for delta = {delta}")));
    }
    if s2 < 0.0 {
        return Err(invalid("s2", format!("{s2} must be non-negative")));
    }
    if !(eps > 0.0 && eps <= delta / 10.0 + 1e-15) {
        return Err(invalid("eps", format!("{eps} not in (0, delta/10]")));
    }
    Ok(())
}

/// `||d_x(uv)||_{X^{-1/2+delta, s1-2delta+eps, s2}} / (||u||_{X^{1/2,s1,s2}} ||v||_{X^{1/2,s1,s2}})`.
pub fn bilinear_ratio(u: &Trajectory, v: &Trajectory, s1: f64, s2: f64, delta: f64, eps: f64) -> Result<f64> {
    check_bilinear(s1, s2, delta, eps)?;
    if u.steps() != v.steps() || u.dt() != v.dt() || u.t0() != v.t0() {
        return Err(invalid("v", "u and v must share the time grid"));
    }
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let states = u
        .states()
        .iter()
        .zip(v.states())
        .map(|(a, b)| product_derivative(a, b))
        .collect::<Result<Vec<_>>>()?;
    let w = Trajectory::new(u.t0(), u.dt(), states)?;
    let num = bourgain_norm(&w, -0.5 + delta, s1 - 2.0 * delta + eps, s2)?;
    let den = bourgain_norm(u, 0.5, s1, s2)? * bourgain_norm(v, 0.5, s1, s2)?;
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::EstimateViolation { numerator: num });
    }
    Ok(num / den)
}

/// Resolution of a suite run; `Refined` doubles every discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Base,
    Refined,
}

impl Resolution {
    fn factor(self) -> usize {
        match self {
            Resolution::Base => 1,
            Resolution::Refined => 2,
        }
    }
}

/// Band limit of the random fields in the suites.
pub const SUITE_KMAX: i64 = 4;

fn suite_grid(n: usize, res: Resolution) -> Result<Grid2D> {
    let n = n * res.factor();
    make_grid(n, n, PI, PI)
}

fn collect_report(
    id: EstimateId,
    params: EstimateParams,
    size: usize,
    seed: u64,
    mut ratio: impl FnMut(u64) -> Result<f64>,
) -> Result<RatioReport> {
    let mut samples = Vec::with_capacity(size);
    let mut violations = 0;
    for i in 0..size {
        let s = sample_seed(seed, i);
        match ratio(s) {
            Ok(r) => samples.push(SampleRatio { sample: i, seed: s, ratio: r }),
            Err(Error::EstimateViolation { .. }) => violations += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(RatioReport::from_samples(id, params, samples, violations))
}

/// `size` random fields on a `16 x 16` box of side `2 pi` (doubled when
/// refined), `DEFAULT_FREE_STEPS` time steps (doubled when refined).
pub fn free_suite(size: usize, seed: u64, b: f64, s1: f64, s2: f64, res: Resolution) -> Result<RatioReport> {
    let grid = suite_grid(16, res)?;
    let steps = DEFAULT_FREE_STEPS * res.factor();
    let params = EstimateParams { b, s1, s2, ..Default::default() };
    collect_report(EstimateId::Free, params, size, seed, |s| {
        let (phi, _) = random_field(&grid, &RandomFieldSpec::new(SUITE_KMAX), s)?;
        free_estimate_ratio_with(&phi, b, s1, s2, steps)
    })
}

/// Samples per signal over `[-2, 2]` at base resolution.
pub const SMOOTHING_SAMPLES: usize = 4097;

pub fn smoothing_suite(size: usize, seed: u64, xi: f64, delta: f64, res: Resolution) -> Result<RatioReport> {
    let n = (SMOOTHING_SAMPLES - 1) * res.factor() + 1;
    let params = EstimateParams { delta, xi, ..Default::default() };
    collect_report(EstimateId::Smoothing, params, size, seed, |s| {
        let f = RandomSignal::new(s);
        smoothing_ratio(&TimeSignal::on_cutoff_support(n, |t| f.eval(t)), xi, delta)
    })
}

/// Largest `delta <= 0.05` allowed by `s1 >= -1/2 + 8 delta`.
pub fn bilinear_delta(s1: f64) -> f64 {
    0.05_f64.min((s1 + 0.5) / 8.0)
}

/// Window length and steps of the bilinear suite at base resolution.
pub const BILINEAR_T: f64 = 1.0;
pub const BILINEAR_STEPS: usize = 256;

/// Pairs `u = W(t) phi_u`, `v = W(t) phi_v` on `[0, t_window]` over a
/// `32 x 32` box of side `2 pi`, with `delta = bilinear_delta(s1)`,
/// `eps = delta / 10`, `s2 = 0`.
pub fn bilinear_suite(size: usize, seed: u64, s1: f64, t_window: f64, res: Resolution) -> Result<RatioReport> {
    let grid = suite_grid(32, res)?;
    let steps = ((BILINEAR_STEPS as f64 * t_window / BILINEAR_T).round() as usize) * res.factor();
    let dt = t_window / steps as f64;
    let delta = bilinear_delta(s1);
    let eps = delta / 10.0;
    let params = EstimateParams { s1, delta, eps, ..Default::default() };
    let spec = RandomFieldSpec::new(SUITE_KMAX);
    collect_report(EstimateId::Bilinear, params, size, seed, |s| {
        let (phi_u, _) = random_field(&grid, &spec, s)?;
        let (phi_v, _) = random_field(&grid, &spec, s ^ 0x5555_5555_5555_5555)?;
        let u = Trajectory::from_fn(0.0, dt, steps, |t| apply_w(&phi_u, t))?;
        let v = Trajectory::from_fn(0.0, dt, steps, |t| apply_w(&phi_v, t))?;
        bilinear_ratio(&u, &v, s1, 0.0, delta, eps)
    })
}
