//! Periodic two-dimensional box, its wavenumber tables and the KP dispersion
//! symbol.
//!
//! The physical box is `[-Lx, Lx) x [-Ly, Ly)`; samples sit at
//! `x_j = j * 2Lx / nx`, which is the same periodic lattice shifted by one
//! period. Mode `(j, l)` carries the wavenumber `(pi/Lx * k_j, pi/Ly * k_l)`
//! where `k_j` is the signed integer frequency in `[-nx/2, nx/2)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::semigroup::PropagatorCache;

/// Default fraction of retained modes per axis for the quadratic nonlinearity.
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Smallest accepted mode count per axis.
pub const MIN_MODES: usize = 8;

/// Immutable periodic grid. Cloning is cheap and clones share FFT plans and
/// the propagator cache.
#[derive(Clone)]
pub struct Grid2D {
    inner: Arc<GridData>,
}

struct GridData {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dealias_fraction: f64,
    kx: Vec<i64>,
    ky: Vec<i64>,
    xi: Vec<f64>,
    eta: Vec<f64>,
    retained: Vec<bool>,
    symbol: DispersionSymbol,
    fft: Fft2,
    propagators: PropagatorCache,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("nx", &self.nx())
            .field("ny", &self.ny())
            .field("lx", &self.lx())
            .field("ly", &self.ly())
            .field("dealias_fraction", &self.dealias_fraction())
            .finish()
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.nx() == other.nx()
                && self.ny() == other.ny()
                && self.lx() == other.lx()
                && self.ly() == other.ly()
                && self.dealias_fraction() == other.dealias_fraction())
    }
}

/// Signed integer frequency of storage index `i` on an axis with `n` modes.
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `P(xi, eta) = xi^3 - eta^2 / xi`, with the value 0 stored on `xi = 0`.
pub fn dispersion(xi: f64, eta: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi * xi * xi - eta * eta / xi
    }
}

/// Per-mode table of the KP-II dispersion symbol.
#[derive(Clone, Debug)]
pub struct DispersionSymbol {
    values: Arc<[f64]>,
}

impl DispersionSymbol {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Builds a grid with the default 2/3 dealiasing fraction.
pub fn make_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Grid2D> {
    Grid2D::new(nx, ny, lx, ly)
}

/// Per-mode dispersion table of `grid`.
pub fn dispersion_values(grid: &Grid2D) -> DispersionSymbol {
    grid.symbol().clone()
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::with_dealias_fraction(nx, ny, lx, ly, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias_fraction(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        dealias_fraction: f64,
    ) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < MIN_MODES || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least {MIN_MODES}"
                )));
            }
        }
        for (name, l) in [("Lx", lx), ("Ly", ly)] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} must lie in (0, 1]"
            )));
        }

        let kx: Vec<i64> = (0..nx).map(|i| signed_frequency(i, nx)).collect();
        let ky: Vec<i64> = (0..ny).map(|i| signed_frequency(i, ny)).collect();
        let xi: Vec<f64> = kx.iter().map(|&k| PI / lx * k as f64).collect();
        let eta: Vec<f64> = ky.iter().map(|&k| PI / ly * k as f64).collect();

        let cut_x = dealias_fraction * (nx / 2) as f64;
        let cut_y = dealias_fraction * (ny / 2) as f64;
        let mut retained = Vec::with_capacity(nx * ny);
        let mut symbol = Vec::with_capacity(nx * ny);
        let nyquist_x = -(nx as i64) / 2;
        for (ix, &kxi) in kx.iter().enumerate() {
            for (iy, &kyi) in ky.iter().enumerate() {
                retained.push((kxi.abs() as f64) <= cut_x && (kyi.abs() as f64) <= cut_y);
                // the x-Nyquist line is its own mirror image under xi -> -xi,
                // so an odd symbol cannot be represented there
                let p = if kxi == nyquist_x {
                    0.0
                } else {
                    dispersion(xi[ix], eta[iy])
                };
                symbol.push(p);
            }
        }

        Ok(Self {
            inner: Arc::new(GridData {
                nx,
                ny,
                lx,
                ly,
                dealias_fraction,
                kx,
                ky,
                xi,
                eta,
                retained,
                symbol: DispersionSymbol {
                    values: symbol.into(),
                },
                fft: Fft2::new(nx, ny),
                propagators: PropagatorCache::new(),
            }),
        })
    }

    pub fn nx(&self) -> usize {
        self.inner.nx
    }

    pub fn ny(&self) -> usize {
        self.inner.ny
    }

    pub fn len(&self) -> usize {
        self.inner.nx * self.inner.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lx(&self) -> f64 {
        self.inner.lx
    }

    pub fn ly(&self) -> f64 {
        self.inner.ly
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.dealias_fraction
    }

    /// Wavenumber spacing `(pi/Lx, pi/Ly)`.
    pub fn spacing(&self) -> (f64, f64) {
        (PI / self.inner.lx, PI / self.inner.ly)
    }

    /// Physical sample spacing `(2Lx/nx, 2Ly/ny)`.
    pub fn cell(&self) -> (f64, f64) {
        (
            2.0 * self.inner.lx / self.inner.nx as f64,
            2.0 * self.inner.ly / self.inner.ny as f64,
        )
    }

    /// Area of the periodic box.
    pub fn area(&self) -> f64 {
        4.0 * self.inner.lx * self.inner.ly
    }

    /// Multiplier turning `sum |c_k|^2` into the squared L2 norm over the box.
    pub fn parseval_factor(&self) -> f64 {
        let n = self.len() as f64;
        self.area() / (n * n)
    }

    pub fn kx(&self) -> &[i64] {
        &self.inner.kx
    }

    pub fn ky(&self) -> &[i64] {
        &self.inner.ky
    }

    /// x-wavenumbers by storage index.
    pub fn xi(&self) -> &[f64] {
        &self.inner.xi
    }

    /// y-wavenumbers by storage index.
    pub fn eta(&self) -> &[f64] {
        &self.inner.eta
    }

    /// Storage index of mode `(kx, ky)`, or `None` when it is not on the grid.
    pub fn index_of(&self, kx: i64, ky: i64) -> Option<usize> {
        let (nx, ny) = (self.inner.nx as i64, self.inner.ny as i64);
        if kx < -nx / 2 || kx >= nx / 2 || ky < -ny / 2 || ky >= ny / 2 {
            return None;
        }
        let ix = kx.rem_euclid(nx) as usize;
        let iy = ky.rem_euclid(ny) as usize;
        Some(ix * self.inner.ny + iy)
    }

    /// Storage index of the mode `-k` (modulo the grid), for Hermitian checks.
    pub fn mirror_index(&self, index: usize) -> usize {
        let (nx, ny) = (self.inner.nx, self.inner.ny);
        let (ix, iy) = (index / ny, index % ny);
        ((nx - ix) % nx) * ny + (ny - iy) % ny
    }

    /// `(xi, eta)` of the mode stored at `index`.
    pub fn wavenumber(&self, index: usize) -> (f64, f64) {
        let ny = self.inner.ny;
        (self.inner.xi[index / ny], self.inner.eta[index % ny])
    }

    /// Whether the dealias mask keeps the mode at `index`.
    pub fn retained(&self, index: usize) -> bool {
        self.inner.retained[index]
    }

    pub fn retained_mask(&self) -> &[bool] {
        &self.inner.retained
    }

    pub fn symbol(&self) -> &DispersionSymbol {
        &self.inner.symbol
    }

    /// Whether `index` lies on the `xi = 0` line.
    pub fn on_zero_x_line(&self, index: usize) -> bool {
        index < self.inner.ny
    }

    /// Whether `index` lies on the x-Nyquist line `k_x = -nx/2`.
    pub fn on_x_nyquist(&self, index: usize) -> bool {
        index / self.inner.ny == self.inner.nx / 2
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.inner.fft
    }

    pub(crate) fn propagators(&self) -> &PropagatorCache {
        &self.inner.propagators
    }

    /// Largest `|xi|` and `|eta|` representable on the grid.
    pub fn max_wavenumber(&self) -> (f64, f64) {
        let (dx, dy) = self.spacing();
        (dx * (self.inner.nx / 2) as f64, dy * (self.inner.ny / 2) as f64)
    }
}
