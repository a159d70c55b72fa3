//! The free KP-II group `U(t) = e^{itP}` and the KPB-II semigroup
//! `W(t) = e^{itP - xi^2 |t|}` as diagonal Fourier multipliers.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::Result;
use crate::field::SpectralField;
use crate::grid::Grid2D;

/// Number of tables kept per grid.
pub const PROPAGATOR_CACHE_CAPACITY: usize = 64;

/// Memory ceiling for the cached tables of one grid; large grids keep fewer
/// than [`PROPAGATOR_CACHE_CAPACITY`] entries.
pub const PROPAGATOR_CACHE_BYTES: usize = 256 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    /// `e^{itP}`
    Free,
    /// `e^{itP - xi^2 |t|}`
    Dissipative,
    /// `e^{-xi^2 |t|}`
    Heat,
}

/// Per-mode multipliers of one propagator at one time.
#[derive(Clone, Debug)]
pub struct PropagatorTable {
    pub t: f64,
    pub kind: PropagatorKind,
    factors: Arc<[Complex64]>,
}

impl PropagatorTable {
    pub fn build(grid: &Grid2D, kind: PropagatorKind, t: f64) -> Self {
        let p = grid.symbol().values();
        let ny = grid.ny();
        let xi = grid.xi();
        let factors: Vec<Complex64> = p
            .iter()
            .enumerate()
            .map(|(i, &pv)| {
                let x = xi[i / ny];
                match kind {
                    PropagatorKind::Free => Complex64::cis(t * pv),
                    PropagatorKind::Dissipative => {
                        Complex64::from_polar((-x * x * t.abs()).exp(), t * pv)
                    }
                    PropagatorKind::Heat => Complex64::new((-x * x * t.abs()).exp(), 0.0),
                }
            })
            .collect();
        Self {
            t,
            kind,
            factors: factors.into(),
        }
    }

    pub fn factors(&self) -> &[Complex64] {
        &self.factors
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        f.multiplied(&self.factors)
    }
}

type CacheKey = (PropagatorKind, u64);

/// Small LRU cache of propagator tables keyed by `(kind, t)`.
pub(crate) struct PropagatorCache {
    entries: Mutex<VecDeque<(CacheKey, PropagatorTable)>>,
}

impl PropagatorCache {
    pub(crate) fn new() -> Self {
        Self {
            entries: Mutex::new(VecDeque::with_capacity(PROPAGATOR_CACHE_CAPACITY)),
        }
    }

    fn get_or_build(&self, grid: &Grid2D, kind: PropagatorKind, t: f64) -> PropagatorTable {
        let key = (kind, t.to_bits());
        {
            let mut entries = self.entries.lock().expect("propagator cache poisoned");
            if let Some(pos) = entries.iter().position(|(k, _)| *k == key) {
                let entry = entries.remove(pos).expect("position is in range");
                let table = entry.1.clone();
                entries.push_front(entry);
                return table;
            }
        }
        // build outside the lock; a concurrent duplicate build is harmless
        let table = PropagatorTable::build(grid, kind, t);
        let mut entries = self.entries.lock().expect("propagator cache poisoned");
        if !entries.iter().any(|(k, _)| *k == key) {
            let table_bytes = grid.len() * std::mem::size_of::<Complex64>();
            let capacity = PROPAGATOR_CACHE_CAPACITY.min(PROPAGATOR_CACHE_BYTES / table_bytes.max(1));
            if capacity > 0 {
                while entries.len() >= capacity {
                    entries.pop_back();
                }
                entries.push_front((key, table.clone()));
            }
        }
        table
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.lock().expect("propagator cache poisoned").len()
    }
}

/// Cached propagator table for `grid`.
pub fn propagator(grid: &Grid2D, kind: PropagatorKind, t: f64) -> PropagatorTable {
    grid.propagators().get_or_build(grid, kind, t)
}

/// Number of tables currently cached for `grid`.
pub fn cached_tables(grid: &Grid2D) -> usize {
    grid.propagators().len()
}

/// `U(t) f`; `f` must be KP-admissible.
pub fn apply_u(f: &SpectralField, t: f64) -> Result<SpectralField> {
    f.require_admissible()?;
    Ok(propagator(f.grid(), PropagatorKind::Free, t).apply(f))
}

/// `W(t) f` for any real `t`, damping with `|t|`; `f` must be KP-admissible.
pub fn apply_w(f: &SpectralField, t: f64) -> Result<SpectralField> {
    f.require_admissible()?;
    Ok(propagator(f.grid(), PropagatorKind::Dissipative, t).apply(f))
}

/// The dissipative factor `e^{-xi^2 |t|}` alone.
pub fn apply_heat(f: &SpectralField, t: f64) -> SpectralField {
    propagator(f.grid(), PropagatorKind::Heat, t).apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn single_mode(kx: i64, ky: i64) -> SpectralField {
        let g = make_grid(8, 8, PI, PI).unwrap();
        let mut f = SpectralField::zeros(&g);
        f.set(kx, ky, Complex64::new(1.0, 0.0)).unwrap();
        f
    }

    #[test]
    fn zero_time_is_identity() {
        let f = single_mode(1, 2);
        assert_eq!(apply_u(&f, 0.0).unwrap(), f);
        assert_eq!(apply_w(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn resonant_mode_is_stationary_under_u() {
        let f = single_mode(1, 1);
        for t in [0.3, 1.0, 7.5] {
            assert!((apply_u(&f, t).unwrap().get(1, 1) - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn w_on_unit_mode() {
        let f = single_mode(1, 0);
        let c = apply_w(&f, 1.0).unwrap().get(1, 0);
        let expected = Complex64::from_polar((-1.0_f64).exp(), 1.0);
        assert!((c - expected).norm() < 1e-15);
        let back = apply_w(&f, -1.0).unwrap().get(1, 0);
        assert!((back.norm() - (-1.0_f64).exp()).abs() < 1e-15);
        assert!((back - expected.conj()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_admissible_input() {
        let f = single_mode(0, 2);
        assert!(matches!(apply_u(&f, 1.0), Err(Error::NotAdmissible { .. })));
        assert!(matches!(apply_w(&f, 1.0), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn cache_is_bounded() {
        let g = make_grid(8, 8, 1.0, 1.0).unwrap();
        for k in 0..(PROPAGATOR_CACHE_CAPACITY + 10) {
            propagator(&g, PropagatorKind::Dissipative, k as f64 * 0.01);
        }
        assert_eq!(cached_tables(&g), PROPAGATOR_CACHE_CAPACITY);
        let a = propagator(&g, PropagatorKind::Free, 0.25);
        let b = PropagatorTable::build(&g, PropagatorKind::Free, 0.25);
        assert_eq!(a.factors(), b.factors());
    }
}
