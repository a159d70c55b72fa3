//! Initial data builders shared by the solver tests and the CLI.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{forward_transform, sample, SpectralField};
use crate::grid::Grid2D;

/// `amplitude * exp(-(x - Lx)^2/wx^2 - (y - Ly)^2/wy^2)` centred in the box,
/// then KP-projected and dealiased.
pub fn gaussian(grid: &Grid2D, amplitude: f64, wx: f64, wy: f64) -> Result<SpectralField> {
    if !(wx > 0.0 && wy > 0.0) {
        return Err(invalid("widths", format!("({wx}, {wy}) must be positive")));
    }
    if !amplitude.is_finite() {
        return Err(invalid("amplitude", "must be finite"));
    }
    let (cx, cy) = (grid.lx(), grid.ly());
    let u = sample(grid, |x, y| {
        let dx = (x - cx) / wx;
        let dy = (y - cy) / wy;
        amplitude * (-(dx * dx) - dy * dy).exp()
    });
    let mut f = forward_transform(grid, &u)?;
    f.project_in_place();
    f.dealias_in_place();
    Ok(f)
}

/// Field with the listed coefficients and their conjugate mirrors at
/// `(-kx, -ky)`. Modes on the `kx = 0` line are rejected.
pub fn modes(grid: &Grid2D, entries: &[(i64, i64, Complex64)]) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    for &(kx, ky, value) in entries {
        if kx == 0 {
            return Err(invalid("modes", "kx = 0 is not KP-admissible"));
        }
        let i = grid
            .index_of(kx, ky)
            .ok_or_else(|| invalid("modes", format!("({kx}, {ky}) is not on the grid")))?;
        let j = grid.mirror_index(i);
        if i == j || grid.on_x_nyquist(i) {
            return Err(invalid("modes", format!("({kx}, {ky}) has no distinct mirror")));
        }
        f.coeffs_mut()[i] += value;
        f.coeffs_mut()[j] += value.conj();
    }
    Ok(f)
}
