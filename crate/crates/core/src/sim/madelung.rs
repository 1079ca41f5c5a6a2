use super::grid::{FieldOnGrid, Grid, SimUnits, WavefunctionGrid};
use crate::scalar::Real;

/// Density floor relative to the peak density; fields are masked below it.
pub const RHO_FLOOR: f64 = 1e-12;

fn floor_mask<T: Real>(rho: &[T]) -> Vec<bool> {
    let peak = rho.iter().copied().fold(T::zero(), T::max);
    let floor = T::of(RHO_FLOOR) * peak;
    rho.iter().map(|r| *r >= floor && *r > T::zero()).collect()
}

/// `psi = sqrt(rho) exp(iS/hbar)`. `rho` is defined everywhere; `S` is the
/// phase unwrapped left to right, masked below the density floor.
pub fn madelung<T: Real>(psi: &WavefunctionGrid<T>) -> (FieldOnGrid<T>, FieldOnGrid<T>) {
    let rho = psi.density();
    let mask = floor_mask(&rho);
    let two_pi = T::of(2.0) * T::PI();
    let mut phase = vec![T::zero(); rho.len()];
    let mut prev: Option<T> = None;
    for (j, a) in psi.amplitudes.iter().enumerate() {
        if !mask[j] {
            continue;
        }
        let raw = a.arg();
        let unwrapped = match prev {
            None => raw,
            Some(p) => {
                let mut d = raw - p;
                d = d - two_pi * ((d + T::PI()) / two_pi).floor();
                p + d
            }
        };
        phase[j] = unwrapped;
        prev = Some(unwrapped);
    }
    let hbar = psi.units.hbar();
    let s = phase.iter().map(|p| *p * hbar).collect();
    (FieldOnGrid::full(psi.grid, rho), FieldOnGrid::new(psi.grid, s, mask))
}

/// `(hbar^2/2m) (d^2 sqrt(rho)/dx^2) / sqrt(rho)` by central differences;
/// masked at the endpoints and wherever the stencil touches the floor.
pub fn quantum_potential<T: Real>(rho: &FieldOnGrid<T>, units: SimUnits<T>) -> FieldOnGrid<T> {
    let grid = rho.grid;
    let n = grid.n;
    let floor = floor_mask(&rho.values);
    let root: Vec<T> = rho.values.iter().map(|r| r.max(T::zero()).sqrt()).collect();
    let scale = units.hbar() * units.hbar() / (T::of(2.0) * units.mass() * grid.dx * grid.dx);
    let mut values = vec![T::zero(); n];
    let mut mask = vec![false; n];
    for j in 1..n.saturating_sub(1) {
        if floor[j - 1] && floor[j] && floor[j + 1] && rho.mask[j] {
            values[j] = scale * (root[j + 1] - T::of(2.0) * root[j] + root[j - 1]) / root[j];
            mask[j] = true;
        }
    }
    FieldOnGrid::new(grid, values, mask)
}

/// Central-difference phase gradient `dS/dx`, from the phase of
/// `psi_{j+1} conj(psi_{j-1})` so no unwrapping is needed.
pub fn phase_gradient<T: Real>(psi: &WavefunctionGrid<T>) -> FieldOnGrid<T> {
    let n = psi.grid.n;
    let floor = floor_mask(&psi.density());
    let a = &psi.amplitudes;
    let k = psi.units.hbar() / (T::of(2.0) * psi.grid.dx);
    let mut values = vec![T::zero(); n];
    let mut mask = vec![false; n];
    for j in 1..n.saturating_sub(1) {
        if floor[j - 1] && floor[j] && floor[j + 1] {
            values[j] = k * (a[j + 1] * a[j - 1].conj()).arg();
            mask[j] = true;
        }
    }
    FieldOnGrid::new(psi.grid, values, mask)
}

/// Forward drift `b = (dS/dx)/m + (hbar/2m) (drho/dx)/rho`.
pub fn nelson_drift<T: Real>(psi: &WavefunctionGrid<T>) -> FieldOnGrid<T> {
    let units = psi.units;
    let grid = psi.grid;
    let rho = psi.density();
    let grad_s = phase_gradient(psi);
    let osmotic = units.hbar() / (T::of(2.0) * units.mass()) / (T::of(2.0) * grid.dx);
    let mut values = vec![T::zero(); grid.n];
    for j in 0..grid.n {
        if grad_s.mask[j] {
            values[j] = grad_s.values[j] / units.mass() + osmotic * (rho[j + 1] - rho[j - 1]) / rho[j];
        }
    }
    FieldOnGrid::new(grid, values, grad_s.mask)
}

/// Central interval carrying `prob` of the density's mass, from the
/// piecewise-constant CDF.
pub fn probability_region<T: Real>(grid: Grid<T>, rho: &[T], prob: f64) -> Vec<bool> {
    let total: T = rho.iter().copied().sum();
    let tail = T::of((1.0 - prob) / 2.0) * total;
    let mut acc = T::zero();
    let mut lo = 0;
    for (j, r) in rho.iter().enumerate() {
        acc = acc + *r;
        if acc > tail {
            lo = j;
            break;
        }
    }
    let mut acc = T::zero();
    let mut hi = grid.n - 1;
    for (j, r) in rho.iter().enumerate().rev() {
        acc = acc + *r;
        if acc > tail {
            hi = j;
            break;
        }
    }
    (0..grid.n).map(|j| j >= lo && j <= hi).collect()
}
