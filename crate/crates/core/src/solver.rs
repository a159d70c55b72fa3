//! Duhamel/Picard solver for KPB-II,
//! `u(t) = W(t) phi - 1/2 int_0^t W(t - t') d_x(u^2)(t') dt'`,
//! plus a second-order exponential integrator used as an independent check.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid2D;
use crate::semigroup::{propagator, PropagatorKind};

/// Time-indexed states on the uniform grid `t_k = t0 + k dt`, `k = 0..=steps`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid2D,
    t0: f64,
    dt: f64,
    states: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, states: Vec<SpectralField>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| invalid("states", "a trajectory needs at least one state"))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("{dt} must be positive")));
        }
        let grid = first.grid().clone();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid,
            t0,
            dt,
            states,
        })
    }

    pub fn zeros(grid: &Grid2D, t0: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(t0, dt, vec![SpectralField::zeros(grid); steps + 1])
    }

    /// Samples `state(t)` on `t_k = t0 + k dt`.
    pub fn from_fn(
        t0: f64,
        dt: f64,
        steps: usize,
        mut state: impl FnMut(f64) -> Result<SpectralField>,
    ) -> Result<Self> {
        let states = (0..=steps)
            .map(|k| state(t0 + k as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        Self::new(t0, dt, states)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of time steps `M`; there are `M + 1` states.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.time(k)).collect()
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.steps())
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &SpectralField {
        &self.states[k]
    }

    pub fn last(&self) -> &SpectralField {
        &self.states[self.steps()]
    }

    pub fn into_states(self) -> Vec<SpectralField> {
        self.states
    }

    /// Applies `f` to every state, keeping the time grid.
    pub fn map(&self, mut f: impl FnMut(f64, &SpectralField) -> SpectralField) -> Self {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| f(self.time(k), s))
            .collect();
        Self {
            grid: self.grid.clone(),
            t0: self.t0,
            dt: self.dt,
            states,
        }
    }

    /// `sup_k ||self(t_k) - other(t_k)||_{L2}`.
    pub fn sup_l2_distance(&self, other: &Self) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a - b).l2_norm())
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`solve_picard`].
#[derive(Clone, Debug, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    /// `sup_k ||u^{j+1}(t_k) - u^j(t_k)||_{L2}` per iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    /// Ratios of successive residuals.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.residual_history
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Whether the quadratic term is present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Quadratic,
    /// Linear KPB-II, `u_t = (iP - xi^2) u`.
    Off,
}

/// `d_x(u v)` computed pseudospectrally, then dealiased and re-projected.
pub fn product_derivative(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.require_same_grid(v)?;
    let grid = u.grid();
    let pu = u.to_physical()?;
    let pv = if std::ptr::eq(u, v) {
        pu.clone()
    } else {
        v.to_physical()?
    };
    let mut buf: Vec<Complex64> = pu
        .iter()
        .zip(&pv)
        .map(|(a, b)| Complex64::new(a * b, 0.0))
        .collect();
    grid.fft().forward(&mut buf);
    let ny = grid.ny();
    let xi = grid.xi();
    let mask = grid.retained_mask();
    for (i, c) in buf.iter_mut().enumerate() {
        if i < ny || !mask[i] || grid.on_x_nyquist(i) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, xi[i / ny]);
        }
    }
    SpectralField::from_coeffs(grid, buf)
}

/// `d_x(u^2)` of a KP-admissible field.
pub fn nonlinearity(f: &SpectralField) -> Result<SpectralField> {
    f.require_admissible()?;
    if f.is_zero() {
        return Ok(SpectralField::zeros(f.grid()));
    }
    product_derivative(f, f)
}

/// One Picard sweep of the Duhamel map over `prev`'s time grid.
///
/// The Duhamel integral is the trapezoidal rule in `t'` with `W(t_k - t_j)`
/// evaluated exactly at every node pair.
pub fn picard_step(prev: &Trajectory, phi: &SpectralField) -> Result<Trajectory> {
    picard_step_with(prev, phi, Nonlinearity::Quadratic)
}

pub fn picard_step_with(
    prev: &Trajectory,
    phi: &SpectralField,
    nonlinear: Nonlinearity,
) -> Result<Trajectory> {
    if prev.t0() != 0.0 {
        return Err(invalid("prev", "Duhamel trajectories start at t = 0"));
    }
    phi.require_same_grid(&prev.states[0])?;
    phi.require_admissible()?;
    let grid = prev.grid().clone();
    let m = prev.steps();
    let dt = prev.dt();

    let forcing: Vec<Option<SpectralField>> = match nonlinear {
        Nonlinearity::Off => vec![None; m + 1],
        Nonlinearity::Quadratic => prev
            .states()
            .iter()
            .map(|u| {
                if u.is_zero() {
                    Ok(None)
                } else {
                    nonlinearity(u).map(Some)
                }
            })
            .collect::<Result<_>>()?,
    };

    let mut next = vec![SpectralField::zeros(&grid); m + 1];
    for lag in 0..=m {
        let table = propagator(&grid, PropagatorKind::Dissipative, lag as f64 * dt);
        let factors = table.factors();
        for ((c, p), f) in next[lag].coeffs_mut().iter_mut().zip(phi.coeffs()).zip(factors) {
            *c += p * f;
        }
        // next[k] -= 1/2 * w_{j,k} * W(t_k - t_j) g_j  with  j = k - lag
        next[lag..]
            .par_iter_mut()
            .enumerate()
            .for_each(|(offset, state)| {
                let k = lag + offset;
                let j = offset;
                if k == 0 {
                    return;
                }
                let Some(g) = &forcing[j] else { return };
                let w = if j == 0 || j == k { 0.5 * dt } else { dt };
                let a = -0.5 * w;
                for ((c, gv), f) in state.coeffs_mut().iter_mut().zip(g.coeffs()).zip(factors) {
                    *c += a * (gv * f);
                }
            });
    }
    Trajectory::new(0.0, dt, next)
}

fn validate_run(t_final: f64, steps: usize) -> Result<()> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(invalid("T", format!("{t_final} must be positive")));
    }
    if steps < 8 {
        return Err(invalid("M", format!("{steps} time steps; need at least 8")));
    }
    Ok(())
}

/// Picard iteration from the zero trajectory until the sup-in-time L2
/// difference of successive iterates drops to `tol`. Hitting `max_iter` is
/// reported through [`PicardReport::converged`], not as an error.
pub fn solve_picard(
    phi: &SpectralField,
    t_final: f64,
    steps: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardReport)> {
    solve_picard_with(phi, t_final, steps, tol, max_iter, Nonlinearity::Quadratic)
}

pub fn solve_picard_with(
    phi: &SpectralField,
    t_final: f64,
    steps: usize,
    tol: f64,
    max_iter: usize,
    nonlinear: Nonlinearity,
) -> Result<(Trajectory, PicardReport)> {
    validate_run(t_final, steps)?;
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "need at least one iteration"));
    }
    let dt = t_final / steps as f64;
    let mut current = Trajectory::zeros(phi.grid(), 0.0, dt, steps)?;
    let mut residual_history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = picard_step_with(&current, phi, nonlinear)?;
        let residual = next.sup_l2_distance(&current);
        residual_history.push(residual);
        current = next;
        if residual <= tol {
            converged = true;
            break;
        }
    }
    let report = PicardReport {
        iterations: residual_history.len(),
        residual_history,
        converged,
    };
    Ok((current, report))
}

/// Below this `|z|` the phi functions are summed as power series.
pub const PHI_SERIES_RADIUS: f64 = 0.2;

/// `phi_1(z) = (e^z - 1)/z`, `phi_2(z) = (e^z - 1 - z)/z^2`.
pub(crate) fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < PHI_SERIES_RADIUS {
        // Taylor: phi_1 = sum z^k/(k+1)!, phi_2 = sum z^k/(k+2)!
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut phi2 = Complex64::new(0.0, 0.0);
        let mut term1 = Complex64::new(1.0, 0.0);
        let mut term2 = Complex64::new(0.5, 0.0);
        for k in 0..18 {
            phi1 += term1;
            phi2 += term2;
            term1 = term1 * z / (k as f64 + 2.0);
            term2 = term2 * z / (k as f64 + 3.0);
        }
        (phi1, phi2)
    } else {
        let em1 = z.exp() - 1.0;
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Second-order exponential Runge-Kutta (ETDRK2): the linear part is
/// propagated exactly by `W(dt)`, the quadratic term through `phi_1, phi_2`.
pub fn solve_etd(phi: &SpectralField, t_final: f64, steps: usize) -> Result<Trajectory> {
    solve_etd_with(phi, t_final, steps, Nonlinearity::Quadratic)
}

pub fn solve_etd_with(
    phi: &SpectralField,
    t_final: f64,
    steps: usize,
    nonlinear: Nonlinearity,
) -> Result<Trajectory> {
    validate_run(t_final, steps)?;
    phi.require_admissible()?;
    let grid = phi.grid().clone();
    let h = t_final / steps as f64;
    let ny = grid.ny();
    let n = grid.len();
    let p = grid.symbol().values();
    let mut e = Vec::with_capacity(n);
    let mut hphi1 = Vec::with_capacity(n);
    let mut hphi2 = Vec::with_capacity(n);
    for (i, pv) in p.iter().enumerate() {
        let xi = grid.xi()[i / ny];
        let z = Complex64::new(-xi * xi * h, pv * h);
        let (p1, p2) = phi_functions(z);
        e.push(z.exp());
        hphi1.push(p1 * h);
        hphi2.push(p2 * h);
    }
    // N(u) = -1/2 d_x(u^2)
    let forcing = |u: &SpectralField| -> Result<Option<SpectralField>> {
        match nonlinear {
            Nonlinearity::Off => Ok(None),
            Nonlinearity::Quadratic => Ok(Some(nonlinearity(u)?.scaled(-0.5))),
        }
    };

    let mut states = Vec::with_capacity(steps + 1);
    states.push(phi.clone());
    for _ in 0..steps {
        let u = states.last().expect("non-empty");
        let nu = forcing(u)?;
        let mut a = u.multiplied(&e);
        if let Some(nu) = &nu {
            for ((c, nv), w) in a.coeffs_mut().iter_mut().zip(nu.coeffs()).zip(&hphi1) {
                *c += w * nv;
            }
        }
        let mut next = a.clone();
        if let Some(nu) = &nu {
            let na = forcing(&a)?.expect("nonlinear branch");
            for (((c, nav), nuv), w) in next
                .coeffs_mut()
                .iter_mut()
                .zip(na.coeffs())
                .zip(nu.coeffs())
                .zip(&hphi2)
            {
                *c += w * (nav - nuv);
            }
        }
        states.push(next);
    }
    Trajectory::new(0.0, h, states)
}

/// `||u(t_k)||_{L2}` for every stored time.
pub fn l2_history(traj: &Trajectory) -> Vec<f64> {
    traj.states().iter().map(SpectralField::l2_norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{forward_transform, sample};
    use crate::grid::make_grid;
    use crate::initial::gaussian;
    use crate::semigroup::apply_w;
    use std::f64::consts::PI;

    #[test]
    fn zero_input_gives_zero_nonlinearity() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        assert!(nonlinearity(&SpectralField::zeros(&g)).unwrap().is_zero());
    }

    #[test]
    fn cosine_nonlinearity_is_minus_sin_2x() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let u = forward_transform(&g, &sample(&g, |x, _| x.cos())).unwrap().projected();
        let n = nonlinearity(&u).unwrap();
        let oracle = forward_transform(&g, &sample(&g, |x, _| -(2.0 * x).sin())).unwrap();
        assert!(n.max_abs_diff(&oracle) < 1e-12 * g.len() as f64);
        for i in 0..g.len() {
            if n.coeffs()[i].norm() > 1e-9 {
                assert_eq!(g.kx()[i / g.ny()].abs(), 2);
                assert_eq!(g.ky()[i % g.ny()], 0);
            }
        }
    }

    #[test]
    fn nonlinearity_is_orthogonal_to_band_limited_input() {
        let g = make_grid(32, 32, PI, PI).unwrap();
        let u = forward_transform(&g, &sample(&g, |x, y| (x + 2.0 * y).sin() + 0.5 * (2.0 * x - y).cos() + 0.2 * (3.0 * x).cos()))
            .unwrap()
            .projected();
        let n = nonlinearity(&u).unwrap();
        assert!(n.inner(&u).abs() < 1e-12 * u.l2_norm_sqr());
    }

    #[test]
    fn first_picard_iterate_is_free_evolution() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let phi = gaussian(&g, 0.1, 0.7, 0.9).unwrap();
        let zero = Trajectory::zeros(&g, 0.0, 0.01, 10).unwrap();
        let u1 = picard_step(&zero, &phi).unwrap();
        for k in 0..=10 {
            let w = apply_w(&phi, u1.time(k)).unwrap();
            assert!(u1.state(k).max_abs_diff(&w) == 0.0);
        }
        let silent = picard_step(&zero, &SpectralField::zeros(&g)).unwrap();
        assert!(silent.states().iter().all(SpectralField::is_zero));
    }

    #[test]
    fn picard_on_zero_data_converges_immediately() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let (traj, report) = solve_picard(&SpectralField::zeros(&g), 0.1, 8, 1e-12, 5).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!(traj.states().iter().all(SpectralField::is_zero));
    }

    #[test]
    fn picard_small_data_contracts_geometrically() {
        let g = make_grid(32, 32, PI, PI).unwrap();
        let mut phi = gaussian(&g, 1.0, 0.8, 0.8).unwrap();
        phi = phi.scaled(1e-3 / phi.l2_norm());
        let (traj, report) = solve_picard(&phi, 0.1, 16, 1e-17, 12).unwrap();
        assert!(report.converged, "{report:?}");
        // drop the first ratio (iterate 1 vs the zero guess) and the tail at round-off
        let ratios = report.contraction_ratios();
        for r in ratios.iter().take_while(|_| true).filter(|r| r.is_finite()).take(3) {
            assert!(*r <= 0.5, "ratios {ratios:?}");
        }
        let l2 = l2_history(&traj);
        for w in l2.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn etd_zero_and_linear_cases() {
        let g = make_grid(16, 16, PI, PI).unwrap();
        let zero = solve_etd(&SpectralField::zeros(&g), 0.1, 10).unwrap();
        assert!(zero.states().iter().all(SpectralField::is_zero));

        let phi = gaussian(&g, 1.0, 0.7, 0.7).unwrap();
        let lin = solve_etd_with(&phi, 0.5, 20, Nonlinearity::Off).unwrap();
        for k in 0..=20 {
            let w = apply_w(&phi, lin.time(k)).unwrap();
            let err = lin.state(k).max_abs_diff(&w);
            let scale = phi.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm()));
            assert!(err <= 1e-12 * scale, "step {k}: {err}");
        }
    }

    #[test]
    fn l2_history_of_single_mode() {
        let g = make_grid(8, 8, PI, PI).unwrap();
        let mut phi = SpectralField::zeros(&g);
        phi.set(1, 0, Complex64::new(1.0, 0.0)).unwrap();
        phi.set(-1, 0, Complex64::new(1.0, 0.0)).unwrap();
        let traj = solve_etd_with(&phi, 1.0, 10, Nonlinearity::Off).unwrap();
        let l2 = l2_history(&traj);
        for (k, v) in l2.iter().enumerate() {
            let t = traj.time(k);
            assert!((v - (-t).exp() * l2[0]).abs() < 1e-13 * l2[0]);
        }
        let z = Trajectory::zeros(&g, 0.0, 0.1, 4).unwrap();
        assert!(l2_history(&z).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn phi_functions_match_on_both_branches() {
        for z in [
            Complex64::new(0.19, 0.0),
            Complex64::new(-0.1, 0.15),
            Complex64::new(0.0, 0.199),
        ] {
            let (a1, a2) = phi_functions(z);
            let em1 = z.exp() - 1.0;
            assert!((a1 - em1 / z).norm() < 1e-14);
            assert!((a2 - (em1 - z) / (z * z)).norm() < 1e-12);
        }
        let (p1, p2) = phi_functions(Complex64::new(0.0, 0.0));
        assert_eq!(p1, Complex64::new(1.0, 0.0));
        assert_eq!(p2, Complex64::new(0.5, 0.0));
    }
}
