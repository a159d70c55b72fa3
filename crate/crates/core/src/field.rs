//! Spectral fields and the grid transforms.
//!
//! Coefficients are the unnormalized DFT of the physical samples
//! (`c_k = sum_j u_j e^{-i k x_j}`); the inverse carries the `1/(nx ny)`.
//! With this convention `c_k * hx * hy` approximates the continuum Fourier
//! transform `int e^{-i(x xi + y eta)} u dx dy` and
//! `||u||_{L2(box)}^2 = grid.parseval_factor() * sum |c_k|^2`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Relative Hermitian defect tolerated by [`SpectralField::to_physical`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients of a field on a [`Grid2D`], row-major in `(k_x, k_y)`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Builds a field from a per-mode function of `(xi, eta)`.
    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let coeffs = (0..grid.len())
            .map(|i| {
                let (xi, eta) = grid.wavenumber(i);
                f(xi, eta)
            })
            .collect();
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the signed mode `(kx, ky)`; zero off the grid.
    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        self.grid
            .index_of(kx, ky)
            .map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, kx: i64, ky: i64, value: Complex64) -> Result<()> {
        let i = self.grid.index_of(kx, ky).ok_or_else(|| {
            Error::InvalidGrid(format!("mode ({kx}, {ky}) is not on the grid"))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// `sum |c_k|^2` (no Parseval factor).
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Squared L2 norm over the periodic box, via Parseval.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.grid.parseval_factor() * self.coefficient_energy()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    /// `max |c(k) - conj c(-k)| / max |c|`; zero for the zero field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let defect = (0..self.coeffs.len()).fold(0.0_f64, |m, i| {
            let j = self.grid.mirror_index(i);
            m.max((self.coeffs[i] - self.coeffs[j].conj()).norm())
        });
        defect / scale
    }

    /// Energy (coefficient sum of squares) on the `xi = 0` line.
    pub fn zero_line_energy(&self) -> f64 {
        self.coeffs[..self.grid.ny()].iter().map(|c| c.norm_sqr()).sum()
    }

    /// KP admissibility: the `xi = 0` line is exactly zero.
    pub fn is_kp_admissible(&self) -> bool {
        self.coeffs[..self.grid.ny()].iter().all(|c| *c == ZERO)
    }

    pub(crate) fn require_admissible(&self) -> Result<()> {
        if self.is_kp_admissible() {
            Ok(())
        } else {
            Err(Error::NotAdmissible {
                energy: self.zero_line_energy(),
            })
        }
    }

    pub(crate) fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Inverse transform to physical samples; rejects non-Hermitian spectra.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian {
                defect,
                tolerance: HERMITIAN_TOLERANCE,
            });
        }
        Ok(self.to_physical_unchecked())
    }

    pub(crate) fn to_physical_unchecked(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft().inverse(&mut buf);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Modes outside the dealias mask set to zero; retained ones untouched.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        for (c, keep) in self.coeffs.iter_mut().zip(self.grid.retained_mask()) {
            if !keep {
                *c = ZERO;
            }
        }
    }

    /// Zeroes the `xi = 0` line, leaving every other mode untouched.
    pub fn projected(&self) -> Self {
        let mut out = self.clone();
        out.project_in_place();
        out
    }

    pub fn project_in_place(&mut self) {
        let ny = self.grid.ny();
        self.coeffs[..ny].fill(ZERO);
    }

    /// Multiplies every coefficient by the matching entry of `factors`.
    pub fn multiplied(&self, factors: &[Complex64]) -> Self {
        debug_assert_eq!(factors.len(), self.coeffs.len());
        Self {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(factors)
                .map(|(c, f)| c * f)
                .collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: Complex64, other: &Self) {
        debug_assert!(self.grid == other.grid);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }

    /// Spectral `x`-derivative; the x-Nyquist line is dropped because `i xi`
    /// is odd and that line is self-conjugate.
    pub fn dx(&self) -> Self {
        let ny = self.grid.ny();
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.grid.on_x_nyquist(i) {
                *c = ZERO;
            } else {
                *c *= Complex64::new(0.0, self.grid.xi()[i / ny]);
            }
        }
        out
    }

    /// Real L2 inner product over the box, `int u v dx dy`.
    pub fn inner(&self, other: &Self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        s * self.grid.parseval_factor()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

/// Forward transform of physical samples laid out row-major (`y` fastest).
pub fn forward_transform(grid: &Grid2D, u_phys: &[f64]) -> Result<SpectralField> {
    if u_phys.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: u_phys.len(),
        });
    }
    let mut buf: Vec<Complex64> = u_phys.iter().map(|&u| Complex64::new(u, 0.0)).collect();
    grid.fft().forward(&mut buf);
    Ok(SpectralField {
        grid: grid.clone(),
        coeffs: buf,
    })
}

pub fn inverse_transform(f: &SpectralField) -> Result<Vec<f64>> {
    f.to_physical()
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    f.dealiased()
}

pub fn project_zero_x_mean(f: &SpectralField) -> SpectralField {
    f.projected()
}

/// Physical sample coordinates `(x_j, y_l)` in storage order.
pub fn sample_points(grid: &Grid2D) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (hx, hy) = grid.cell();
    (0..grid.len()).map(move |i| ((i / grid.ny()) as f64 * hx, (i % grid.ny()) as f64 * hy))
}

/// Samples a physical function on the grid.
pub fn sample(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    sample_points(grid).map(|(x, y)| f(x, y)).collect()
}
