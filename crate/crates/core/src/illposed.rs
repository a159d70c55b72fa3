//! Second Picard iterate of KPB-II on the rectangle data `phi_N`.
//!
//! `phi_N` has Fourier transform `N^{-3/2-s}` on
//! `D1 = [N/2, N) x [-6N^2, 6N^2)` and `D2 = [N, 2N) x [sqrt3 N^2, (sqrt3+1) N^2)`
//! plus the mirrored rectangles at negative `xi`. In this crate's Fourier
//! convention the quadratic Duhamel term `u2 = -int_0^t W(t-t') d_x (W(t') phi)^2 dt'`
//! has
//!
//! `u2^(nu) = -i xi e^{itP(nu)} (2 pi)^{-2} int phi^(nu1) phi^(nu - nu1) K(t, xi, xi1, eta, eta1) dnu1`
//!
//! with `K = e^{-xi^2 t} (e^{tD} - 1)/D`, `D = 2 xi1 (xi - xi1) - i chi`.
//! Inside the output window only the two cross interactions `D1 x D2`
//! contribute, so the integral runs over two boxes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{dispersion, Grid2D};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Smallest quadrature resolution per axis accepted by the public entry points.
pub const MIN_CELLS: usize = 64;

/// Smallest frequency scale accepted by [`second_iterate_norm`].
pub const MIN_N: f64 = 8.0;

/// Smallest sample count for [`chi_bound_check`].
pub const MIN_CHI_SAMPLES: usize = 10_000;

/// Phase recurrences are re-anchored to a directly evaluated exponential at
/// this stride.
pub const RESYNC: usize = 32;

/// Axis-aligned rectangle `[xi0, xi1) x [eta0, eta1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub xi0: f64,
    pub xi1: f64,
    pub eta0: f64,
    pub eta1: f64,
}

impl Rect {
    pub fn contains(&self, xi: f64, eta: f64) -> bool {
        xi >= self.xi0 && xi < self.xi1 && eta >= self.eta0 && eta < self.eta1
    }

    pub fn width(&self) -> f64 {
        self.xi1 - self.xi0
    }

    pub fn height(&self) -> f64 {
        self.eta1 - self.eta0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    fn is_empty(&self) -> bool {
        self.xi1 <= self.xi0 || self.eta1 <= self.eta0
    }
}

/// The rectangles `D1`, `D2` at frequency scale `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectanglePair {
    pub n: f64,
    pub d1: Rect,
    pub d2: Rect,
}

impl RectanglePair {
    pub fn new(n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("N", format!("{n} must be positive")));
        }
        let n2 = n * n;
        Ok(Self {
            n,
            d1: Rect {
                xi0: 0.5 * n,
                xi1: n,
                eta0: -6.0 * n2,
                eta1: 6.0 * n2,
            },
            d2: Rect {
                xi0: n,
                xi1: 2.0 * n,
                eta0: SQRT3 * n2,
                eta1: (SQRT3 + 1.0) * n2,
            },
        })
    }

    /// Indicator of `D1 u D2` and of their mirror images `-D1 u -D2`.
    pub fn contains(&self, xi: f64, eta: f64) -> bool {
        self.d1.contains(xi, eta)
            || self.d2.contains(xi, eta)
            || self.d1.contains(-xi, -eta)
            || self.d2.contains(-xi, -eta)
    }

    /// The output window `[3N/2, 3N] x [(sqrt3-6) N^2, (sqrt3+7) N^2]`.
    pub fn window(&self) -> Rect {
        let n2 = self.n * self.n;
        Rect {
            xi0: 1.5 * self.n,
            xi1: 3.0 * self.n,
            eta0: (SQRT3 - 6.0) * n2,
            eta1: (SQRT3 + 7.0) * n2,
        }
    }

    pub fn in_window(&self, xi: f64, eta: f64) -> bool {
        let w = self.window();
        xi >= w.xi0 && xi <= w.xi1 && eta >= w.eta0 && eta <= w.eta1
    }

    /// The boxes of `(xi1, eta1)` with one factor in `D2` and the other in `D1`.
    pub fn interaction_boxes(&self, xi: f64, eta: f64) -> Vec<Rect> {
        [(self.d2, self.d1), (self.d1, self.d2)]
            .into_iter()
            .map(|(first, second)| Rect {
                xi0: first.xi0.max(xi - second.xi1),
                xi1: first.xi1.min(xi - second.xi0),
                eta0: first.eta0.max(eta - second.eta1),
                eta1: first.eta1.min(eta - second.eta0),
            })
            .filter(|r| !r.is_empty())
            .collect()
    }

    /// Lebesgue measure of the interaction set at `(xi, eta)`.
    pub fn interaction_measure(&self, xi: f64, eta: f64) -> f64 {
        self.interaction_boxes(xi, eta).iter().map(Rect::area).sum()
    }
}

/// Data amplitude `N^{-3/2-s}`.
pub fn amplitude(n: f64, s: f64) -> f64 {
    n.powf(-1.5 - s)
}

/// Time `t_N = N^{-3-eps0}`.
pub fn critical_time(n: f64, eps0: f64) -> f64 {
    n.powf(-3.0 - eps0)
}

/// Where `phi_N` is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum PhiMode<'a> {
    Continuum,
    Grid(&'a Grid2D),
}

/// Closed-form description of `phi_N^`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPhi {
    pub rects: RectanglePair,
    pub s: f64,
    pub amplitude: f64,
}

impl AnalyticPhi {
    pub fn value(&self, xi: f64, eta: f64) -> f64 {
        if self.rects.contains(xi, eta) {
            self.amplitude
        } else {
            0.0
        }
    }

    /// `(int (1 + xi^2)^s |phi^|^2 dxi deta)^{1/2}`
    pub fn sobolev_norm(&self) -> f64 {
        let (d1, d2) = (self.rects.d1, self.rects.d2);
        let weight = |xi: f64| (1.0 + xi * xi).powf(self.s);
        let i1 = simpson(weight, d1.xi0, d1.xi1, 2048) * d1.height();
        let i2 = simpson(weight, d2.xi0, d2.xi1, 2048) * d2.height();
        (2.0 * self.amplitude * self.amplitude * (i1 + i2)).sqrt()
    }
}

#[derive(Clone, Debug)]
pub enum PhiN {
    Analytic(AnalyticPhi),
    Field(SpectralField),
}

/// `phi_N` either in closed form or as grid coefficients.
pub fn build_phi_n(n: f64, s: f64, mode: PhiMode<'_>) -> Result<PhiN> {
    if !(n >= 4.0) {
        return Err(invalid("N", format!("{n} must be at least 4")));
    }
    match mode {
        PhiMode::Continuum => Ok(PhiN::Analytic(AnalyticPhi {
            rects: RectanglePair::new(n)?,
            s,
            amplitude: amplitude(n, s),
        })),
        PhiMode::Grid(grid) => phi_n_on_grid(n, s, grid).map(PhiN::Field),
    }
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

/// Grid coefficients of `phi_N`: each mode carries `N^{-3/2-s}/(hx hy)` times
/// the fraction of its Fourier cell covered by the rectangles, so that
/// `hx hy c_k` is the cell average of `phi_N^`.
pub fn phi_n_on_grid(n: f64, s: f64, grid: &Grid2D) -> Result<SpectralField> {
    let rects = RectanglePair::new(n)?;
    let (dxi, deta) = grid.spacing();
    let fraction = grid.dealias_fraction();
    let xi_max = fraction * grid.nx() as f64 / 2.0 * dxi;
    let eta_max = fraction * grid.ny() as f64 / 2.0 * deta;
    for (name, r) in [("D1", rects.d1), ("D2", rects.d2)] {
        let cells_x = (r.width() / dxi).floor() as usize;
        let cells_y = (r.height() / deta).floor() as usize;
        if cells_x < 8 || cells_y < 8 {
            return Err(Error::UnderResolved {
                name,
                cells_x,
                cells_y,
                min: 8,
            });
        }
        if r.xi1 > xi_max || r.eta0.abs().max(r.eta1.abs()) > eta_max {
            return Err(invalid(
                "grid",
                format!("{name} reaches past the dealiased band ({xi_max}, {eta_max})"),
            ));
        }
    }
    let (hx, hy) = grid.cell();
    let scale = amplitude(n, s) / (hx * hy);
    let cell_fraction = |r: &Rect, xi: f64, eta: f64| {
        overlap(xi - 0.5 * dxi, xi + 0.5 * dxi, r.xi0, r.xi1) / dxi
            * overlap(eta - 0.5 * deta, eta + 0.5 * deta, r.eta0, r.eta1)
            / deta
    };
    let mut f = SpectralField::from_fn(grid, |xi, eta| {
        let w: f64 = [rects.d1, rects.d2]
            .iter()
            .map(|r| cell_fraction(r, xi, eta) + cell_fraction(r, -xi, -eta))
            .sum();
        Complex64::new(scale * w, 0.0)
    });
    f.project_in_place();
    Ok(f)
}

/// Composite Simpson rule with `panels` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// `chi = 3 xi xi1 (xi - xi1) + (xi1 eta - xi eta1)^2 / (xi xi1 (xi - xi1))`,
/// which equals `P(xi, eta) - P(xi1, eta1) - P(xi - xi1, eta - eta1)`.
pub fn resonance_chi(xi: f64, xi1: f64, eta: f64, eta1: f64) -> Result<f64> {
    let xi2 = xi - xi1;
    if xi == 0.0 || xi1 == 0.0 || xi2 == 0.0 {
        return Err(Error::Degenerate(format!(
            "resonance function needs nonzero xi, xi1, xi - xi1; got ({xi}, {xi1})"
        )));
    }
    Ok(chi_unchecked(xi, xi1, eta, eta1))
}

#[inline]
fn chi_unchecked(xi: f64, xi1: f64, eta: f64, eta1: f64) -> f64 {
    let b = xi * xi1 * (xi - xi1);
    let q = xi1 * eta - xi * eta1;
    3.0 * b + q * q / b
}

/// `e^z - 1` without cancellation for small `|z|`.
fn expm1_complex(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// `K` from its ingredients `(t, xi, xi1, chi)`.
pub fn kernel_from_chi(t: f64, xi: f64, xi1: f64, chi: f64) -> Result<Complex64> {
    let d = Complex64::new(2.0 * xi1 * (xi - xi1), -chi);
    if d.norm() == 0.0 {
        return Err(Error::Degenerate("kernel denominator vanishes".into()));
    }
    Ok((-xi * xi * t).exp() * expm1_complex(d * t) / d)
}

/// `K(t) = int_0^t e^{-xi^2 (t - t')} e^{-t'(xi1^2 + xi2^2)} e^{-i t' chi} dt'`, i.e.
/// `(e^{-t(xi1^2 + xi2^2)} e^{-itchi} - e^{-xi^2 t}) / (2 xi1 xi2 - i chi)`.
pub fn kernel_k(t: f64, xi: f64, xi1: f64, eta: f64, eta1: f64) -> Result<Complex64> {
    let chi = resonance_chi(xi, xi1, eta, eta1)?;
    kernel_from_chi(t, xi, xi1, chi)
}

/// Midpoint sum of `K` over one box, `cells x cells` nodes, by direct evaluation.
fn box_integral_reference(t: f64, xi: f64, eta: f64, r: &Rect, cells: usize) -> Complex64 {
    let hx = r.width() / cells as f64;
    let he = r.height() / cells as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..cells {
        let xi1 = r.xi0 + (i as f64 + 0.5) * hx;
        for j in 0..cells {
            let eta1 = r.eta0 + (j as f64 + 0.5) * he;
            let chi = chi_unchecked(xi, xi1, eta, eta1);
            sum += kernel_from_chi(t, xi, xi1, chi).expect("xi1 (xi - xi1) > 0 inside a box");
        }
    }
    sum * (hx * he)
}

/// Same sum as [`box_integral_reference`]. Along `eta1` the phase `t chi` is
/// quadratic, so `e^{-itchi}` advances by a geometric chirp.
fn box_integral(t: f64, xi: f64, eta: f64, r: &Rect, cells: usize) -> Complex64 {
    let hx = r.width() / cells as f64;
    let he = r.height() / cells as f64;
    let c = xi * he;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..cells {
        let xi1 = r.xi0 + (i as f64 + 0.5) * hx;
        let xi2 = xi - xi1;
        let b = xi * xi1 * xi2;
        let a = 3.0 * b;
        let re = 2.0 * xi1 * xi2;
        let re2 = re * re;
        let growth = (t * re).exp();
        let q0 = xi1 * eta - xi * (r.eta0 + 0.5 * he);
        let rho = Complex64::cis(-2.0 * t * c * c / b);
        let mut row = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(0.0, 0.0);
        let mut step = Complex64::new(0.0, 0.0);
        for j in 0..cells {
            let q = q0 - j as f64 * c;
            let chi = a + q * q / b;
            if j % RESYNC == 0 {
                z = Complex64::cis(-t * chi);
                // phase increment from j to j + 1
                step = Complex64::cis(t * (2.0 * c * q - c * c) / b);
            }
            let num = Complex64::new(growth * z.re - 1.0, growth * z.im);
            let inv = 1.0 / (re2 + chi * chi);
            // num / (re - i chi) = num (re + i chi) / (re^2 + chi^2)
            row.re += (num.re * re - num.im * chi) * inv;
            row.im += (num.re * chi + num.im * re) * inv;
            z *= step;
            step *= rho;
        }
        total += row;
    }
    total * ((-xi * xi * t).exp() * hx * he)
}

/// `int_{k(xi, eta)} K dnu1` by the midpoint rule with `cells` nodes per axis
/// on each box; zero when the interaction set is empty.
pub fn interaction_integral(
    rects: &RectanglePair,
    t: f64,
    xi: f64,
    eta: f64,
    cells: usize,
) -> Complex64 {
    rects
        .interaction_boxes(xi, eta)
        .iter()
        .map(|r| box_integral(t, xi, eta, r, cells))
        .sum()
}

/// [`interaction_integral`] with every node evaluated through [`kernel_k`].
pub fn interaction_integral_reference(
    rects: &RectanglePair,
    t: f64,
    xi: f64,
    eta: f64,
    cells: usize,
) -> Complex64 {
    rects
        .interaction_boxes(xi, eta)
        .iter()
        .map(|r| box_integral_reference(t, xi, eta, r, cells))
        .sum()
}

fn check_cells(cells: usize) -> Result<()> {
    if cells < MIN_CELLS {
        return Err(invalid("cells", format!("{cells} per axis; need at least {MIN_CELLS}")));
    }
    Ok(())
}

/// Continuum Fourier transform of the second iterate `u2(t)` at `(xi, eta)`
/// in the output window.
pub fn second_iterate_hat(n: f64, s: f64, t: f64, xi: f64, eta: f64, cells: usize) -> Result<Complex64> {
    let rects = RectanglePair::new(n)?;
    if !rects.in_window(xi, eta) {
        return Err(Error::OutOfWindow { xi, eta });
    }
    check_cells(cells)?;
    let v = amplitude(n, s);
    let f = interaction_integral(&rects, t, xi, eta, cells);
    let prefactor = Complex64::new(0.0, -xi) * Complex64::cis(t * dispersion(xi, eta));
    Ok(prefactor * f * (v * v / (4.0 * std::f64::consts::PI * std::f64::consts::PI)))
}

/// One row of the scaling study.
#[derive(Clone, Debug, PartialEq)]
pub struct IllposedResult {
    pub n: f64,
    pub s: f64,
    pub eps0: f64,
    pub t_n: f64,
    /// `||u2(t_N)||_{H^{s,0}}` restricted to the output window.
    pub norm_u2: f64,
    /// `||phi_N||_{H^{s,0}}`.
    pub norm_phi: f64,
    pub quadrature_cells: usize,
    /// Mean over the window of `mes k(xi, eta) / N^3`.
    pub interaction_measure: f64,
    /// `max |chi| / N^3` from [`chi_bound_check`], when computed.
    pub max_chi_ratio: Option<f64>,
}

/// `|F(xi, eta)|^2` on the midpoint grid of the output window at `t_N`, where
/// `F` is the interaction integral. It does not depend on `s`.
#[derive(Clone, Debug)]
pub struct InteractionProfile {
    pub n: f64,
    pub eps0: f64,
    pub t_n: f64,
    pub cells: usize,
    xi: Vec<f64>,
    dxi: f64,
    deta: f64,
    /// `sum_eta |F|^2` per `xi` column.
    column_energy: Vec<f64>,
    mean_measure: f64,
}

impl InteractionProfile {
    pub fn compute(n: f64, eps0: f64, cells: usize) -> Result<Self> {
        if !(n >= MIN_N) {
            return Err(invalid("N", format!("{n} must be at least {MIN_N}")));
        }
        if !(eps0 >= 0.0 && eps0.is_finite()) {
            return Err(invalid("eps0", format!("{eps0} must be non-negative")));
        }
        check_cells(cells)?;
        let rects = RectanglePair::new(n)?;
        let t = critical_time(n, eps0);
        let w = rects.window();
        let dxi = w.width() / cells as f64;
        let deta = w.height() / cells as f64;
        let xi: Vec<f64> = (0..cells).map(|i| w.xi0 + (i as f64 + 0.5) * dxi).collect();
        let columns: Vec<(f64, f64)> = xi
            .par_iter()
            .map(|&x| {
                let mut energy = 0.0;
                let mut measure = 0.0;
                for j in 0..cells {
                    let eta = w.eta0 + (j as f64 + 0.5) * deta;
                    energy += interaction_integral(&rects, t, x, eta, cells).norm_sqr();
                    measure += rects.interaction_measure(x, eta);
                }
                (energy, measure)
            })
            .collect();
        let column_energy = columns.iter().map(|c| c.0).collect();
        let total_measure: f64 = columns.iter().map(|c| c.1).sum();
        Ok(Self {
            n,
            eps0,
            t_n: t,
            cells,
            xi,
            dxi,
            deta,
            column_energy,
            mean_measure: total_measure / (cells * cells) as f64 / (n * n * n),
        })
    }

    /// `(int_window xi^2 (1 + xi^2)^s |u2^|^2)^{1/2}`; the `xi^2` is the
    /// modulus of the `-i xi` prefactor of `u2^`.
    pub fn norm_u2(&self, s: f64) -> f64 {
        let v = amplitude(self.n, s);
        let c = v * v / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
        let sum: f64 = self
            .xi
            .iter()
            .zip(&self.column_energy)
            .map(|(&x, &e)| x * x * (1.0 + x * x).powf(s) * e)
            .sum();
        c * (sum * self.dxi * self.deta).sqrt()
    }

    pub fn result(&self, s: f64) -> IllposedResult {
        let phi = AnalyticPhi {
            rects: RectanglePair::new(self.n).expect("validated in compute"),
            s,
            amplitude: amplitude(self.n, s),
        };
        IllposedResult {
            n: self.n,
            s,
            eps0: self.eps0,
            t_n: self.t_n,
            norm_u2: self.norm_u2(s),
            norm_phi: phi.sobolev_norm(),
            quadrature_cells: self.cells,
            interaction_measure: self.mean_measure,
            max_chi_ratio: None,
        }
    }
}

/// `||u2(t_N)||_{H^{s,0}}` over the output window with `t_N = N^{-3-eps0}`.
pub fn second_iterate_norm(n: f64, s: f64, eps0: f64, cells: usize) -> Result<IllposedResult> {
    Ok(InteractionProfile::compute(n, eps0, cells)?.result(s))
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Per-`N` results and the fitted growth exponent of `||u2(t_N)||`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingStudy {
    pub s: f64,
    pub eps0: f64,
    pub cells: usize,
    pub rows: Vec<IllposedResult>,
    pub slope: f64,
}

impl ScalingStudy {
    /// The exponent `(-1 - 2 eps0 - 2s)/2` predicted for the norm.
    pub fn predicted_slope(&self) -> f64 {
        (-1.0 - 2.0 * self.eps0 - 2.0 * self.s) / 2.0
    }

    pub fn from_profiles(profiles: &[InteractionProfile], s: f64) -> Result<Self> {
        if profiles.len() < 4 {
            return Err(invalid("N_list", format!("{} values; need at least 4", profiles.len())));
        }
        let rows: Vec<IllposedResult> = profiles.iter().map(|p| p.result(s)).collect();
        let ns: Vec<f64> = rows.iter().map(|r| r.n).collect();
        let norms: Vec<f64> = rows.iter().map(|r| r.norm_u2).collect();
        Ok(Self {
            s,
            eps0: profiles[0].eps0,
            cells: profiles[0].cells,
            slope: fit_log_slope(&ns, &norms),
            rows,
        })
    }
}

fn check_n_list(n_list: &[f64]) -> Result<()> {
    if n_list.len() < 4 {
        return Err(invalid("N_list", format!("{} values; need at least 4", n_list.len())));
    }
    if n_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("N_list", "values must be strictly increasing"));
    }
    Ok(())
}

/// Computes one [`InteractionProfile`] per `N`.
pub fn interaction_profiles(n_list: &[f64], eps0: f64, cells: usize) -> Result<Vec<InteractionProfile>> {
    check_n_list(n_list)?;
    n_list
        .iter()
        .map(|&n| InteractionProfile::compute(n, eps0, cells))
        .collect()
}

pub fn scaling_study(n_list: &[f64], s: f64, eps0: f64, cells: usize) -> Result<ScalingStudy> {
    ScalingStudy::from_profiles(&interaction_profiles(n_list, eps0, cells)?, s)
}

/// [`scaling_study`] with [`chi_bound_check`] filled in per row.
pub fn scaling_study_with_chi(
    n_list: &[f64],
    s: f64,
    eps0: f64,
    cells: usize,
    chi_samples: usize,
    seed: u64,
) -> Result<ScalingStudy> {
    let mut study = scaling_study(n_list, s, eps0, cells)?;
    for row in &mut study.rows {
        row.max_chi_ratio = Some(chi_bound_check(row.n, chi_samples, seed)?);
    }
    Ok(study)
}

/// `max |chi| / N^3` over uniform samples of `(xi, eta)` in the output window
/// and `(xi1, eta1)` in the interaction set (box chosen in proportion to area).
pub fn chi_bound_check(n: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples < MIN_CHI_SAMPLES {
        return Err(invalid("samples", format!("{samples}; need at least {MIN_CHI_SAMPLES}")));
    }
    let rects = RectanglePair::new(n)?;
    let w = rects.window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n3 = n * n * n;
    let mut max_ratio: f64 = 0.0;
    let mut taken = 0;
    while taken < samples {
        let xi = rng.random_range(w.xi0..w.xi1);
        let eta = rng.random_range(w.eta0..w.eta1);
        let boxes = rects.interaction_boxes(xi, eta);
        let total: f64 = boxes.iter().map(Rect::area).sum();
        if total <= 0.0 {
            continue;
        }
        let mut pick = rng.random_range(0.0..total);
        let mut chosen = boxes[boxes.len() - 1];
        for r in &boxes {
            if pick < r.area() {
                chosen = *r;
                break;
            }
            pick -= r.area();
        }
        let xi1 = rng.random_range(chosen.xi0..chosen.xi1);
        let eta1 = rng.random_range(chosen.eta0..chosen.eta1);
        let chi = resonance_chi(xi, xi1, eta, eta1)?;
        max_ratio = max_ratio.max(chi.abs() / n3);
        taken += 1;
    }
    Ok(max_ratio)
}
