//! Seeded random inputs for the estimate suites.
//!
//! Draws are made in a fixed order over `|kx|, |ky| <= kmax` that does not
//! depend on the grid, so the same seed gives the same physical field on a
//! refined grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::Grid2D;
use crate::solver::Trajectory;

/// Band-limited complex Gaussian field description.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomFieldSpec {
    /// Largest integer frequency along each axis.
    pub kmax: i64,
    /// Power-law exponent `p` in `(1 + kx^2 + ky^2)^{-p/2}`; drawn from
    /// `{0, 1, 2}` when `None`.
    pub decay: Option<u32>,
}

impl RandomFieldSpec {
    pub fn new(kmax: i64) -> Self {
        Self { kmax, decay: None }
    }
}

/// Seeded generator wrapper so callers do not depend on the RNG crate.
pub struct Source(ChaCha8Rng);

impl Source {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.random_range(lo..hi)
    }

    pub fn choose_decay(&mut self) -> u32 {
        self.0.random_range(0..3)
    }
}

fn check_band(grid: &Grid2D, kmax: i64) -> Result<()> {
    if kmax < 1 {
        return Err(invalid("kmax", format!("{kmax} must be at least 1")));
    }
    let limit = |n: usize| (grid.dealias_fraction() * n as f64 / 2.0).floor() as i64;
    if kmax > limit(grid.nx()) || kmax > limit(grid.ny()) {
        return Err(invalid("kmax", format!("{kmax} exceeds the dealiased band of the grid")));
    }
    Ok(())
}

/// Fourier-series amplitudes `a_k` in canonical order; returns the decay used.
fn draw_amplitudes(spec: &RandomFieldSpec, src: &mut Source) -> (Vec<(i64, i64, Complex64)>, u32) {
    let decay = spec.decay.unwrap_or_else(|| src.choose_decay());
    let mut out = Vec::new();
    for kx in -spec.kmax..=spec.kmax {
        for ky in -spec.kmax..=spec.kmax {
            let scale = (1.0 + (kx * kx + ky * ky) as f64).powf(-0.5 * decay as f64);
            out.push((kx, ky, src.complex_normal() * scale));
        }
    }
    (out, decay)
}

/// Random real KP-admissible dealiased field. Coefficients are `nx ny a_k` so
/// that the physical field does not change under grid refinement.
pub fn random_field(grid: &Grid2D, spec: &RandomFieldSpec, seed: u64) -> Result<(SpectralField, u32)> {
    check_band(grid, spec.kmax)?;
    let mut src = Source::new(seed);
    let (amplitudes, decay) = draw_amplitudes(spec, &mut src);
    let scale = grid.len() as f64;
    let mut f = SpectralField::zeros(grid);
    for &(kx, ky, a) in &amplitudes {
        let i = grid.index_of(kx, ky).expect("band checked");
        f.coeffs_mut()[i] = a * scale;
    }
    let mut sym = f.clone();
    for i in 0..grid.len() {
        let j = grid.mirror_index(i);
        sym.coeffs_mut()[i] = 0.5 * (f.coeffs()[i] + f.coeffs()[j].conj());
    }
    sym.project_in_place();
    sym.dealias_in_place();
    Ok((sym, decay))
}

/// Random band-limited trajectory `c_nu(t) = a_nu e^{i (P(nu) + w_nu) t}` with
/// detunings `w_nu` uniform in `[-omega_max, omega_max]`, odd under `nu -> -nu`.
pub fn random_trajectory(
    grid: &Grid2D,
    spec: &RandomFieldSpec,
    omega_max: f64,
    t0: f64,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    let (phi, _) = random_field(grid, spec, seed)?;
    let mut src = Source::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut omega = vec![0.0; grid.len()];
    for kx in 1..=spec.kmax {
        for ky in -spec.kmax..=spec.kmax {
            let i = grid.index_of(kx, ky).expect("band checked");
            let w = src.uniform(-omega_max, omega_max);
            omega[i] = w;
            omega[grid.mirror_index(i)] = -w;
        }
    }
    let p = grid.symbol().values();
    Trajectory::from_fn(t0, dt, steps, |t| {
        let mut s = phi.clone();
        for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
            *c *= Complex64::cis((p[i] + omega[i]) * t);
        }
        Ok(s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn field_is_real_admissible_and_reproducible() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let spec = RandomFieldSpec::new(4);
        let (a, da) = random_field(&g, &spec, 11).unwrap();
        let (b, db) = random_field(&g, &spec, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(da, db);
        assert!(da <= 2);
        assert!(a.hermitian_defect() < 1e-15);
        assert!(a.is_kp_admissible());
        let (c, _) = random_field(&g, &spec, 12).unwrap();
        assert!(a != c);
    }

    #[test]
    fn refinement_keeps_the_physical_field() {
        let g1 = make_grid(16, 16, PI, PI).unwrap();
        let g2 = make_grid(32, 32, PI, PI).unwrap();
        let spec = RandomFieldSpec { kmax: 4, decay: Some(1) };
        let (a, _) = random_field(&g1, &spec, 3).unwrap();
        let (b, _) = random_field(&g2, &spec, 3).unwrap();
        assert!((a.l2_norm() - b.l2_norm()).abs() < 1e-12 * a.l2_norm());
        assert!(random_field(&g1, &RandomFieldSpec::new(6), 3).is_err());
    }

    #[test]
    fn trajectory_states_are_real() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let traj = random_trajectory(&g, &RandomFieldSpec::new(3), 5.0, 0.0, 0.01, 20, 4).unwrap();
        for s in traj.states() {
            assert!(s.hermitian_defect() < 1e-13);
        }
    }
}
