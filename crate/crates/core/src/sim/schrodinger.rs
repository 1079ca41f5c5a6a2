use num_complex::Complex;

use super::grid::{FieldOnGrid, WavefunctionGrid};
use super::SimError;
use crate::scalar::Real;

/// Largest step the accuracy guard admits: `dx^2 * m / hbar`.
pub fn dt_guard<T: Real>(dx: T, hbar: T, mass: T) -> T {
    dx * dx * mass / hbar
}

/// Crank–Nicolson propagator for a fixed potential and step, with the
/// tridiagonal elimination factors cached.
#[derive(Debug, Clone)]
pub struct CnPropagator<T> {
    dt: T,
    off_a: Complex<T>,
    off_b: Complex<T>,
    diag_b: Vec<Complex<T>>,
    /// Modified super-diagonal of the forward sweep.
    c_prime: Vec<Complex<T>>,
    /// Reciprocal pivots of the forward sweep.
    inv_pivot: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> CnPropagator<T> {
    pub fn new(psi: &WavefunctionGrid<T>, potential: &FieldOnGrid<T>, dt: T) -> Result<Self, SimError> {
        let grid = psi.grid;
        let units = psi.units;
        if potential.grid != grid {
            return Err(SimError::InvalidGrid("potential and wavefunction grids differ".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(SimError::InvalidStep(dt.as_f64()));
        }
        let limit = dt_guard(grid.dx, units.hbar(), units.mass());
        if dt > limit {
            return Err(SimError::DtGuard { dt: dt.as_f64(), limit: limit.as_f64() });
        }
        let hbar = units.hbar();
        let kinetic = hbar * hbar / (units.mass() * grid.dx * grid.dx);
        let tau = Complex::new(T::zero(), dt / (T::of(2.0) * hbar));
        let off_h = Complex::new(-kinetic / T::of(2.0), T::zero());
        let off_a = tau * off_h;
        let off_b = -tau * off_h;
        let one = Complex::new(T::one(), T::zero());
        let n = grid.n;
        let mut diag_b = Vec::with_capacity(n);
        let mut c_prime = Vec::with_capacity(n);
        let mut inv_pivot = Vec::with_capacity(n);
        for (j, v) in potential.values.iter().enumerate() {
            let h = Complex::new(kinetic + *v, T::zero());
            diag_b.push(one - tau * h);
            let a_diag = one + tau * h;
            let pivot = if j == 0 { a_diag } else { a_diag - off_a * c_prime[j - 1] };
            let inv = one / pivot;
            inv_pivot.push(inv);
            c_prime.push(off_a * inv);
        }
        Ok(Self { dt, off_a, off_b, diag_b, c_prime, inv_pivot, scratch: vec![Complex::new(T::zero(), T::zero()); n] })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Advances `psi` by one step in place and checks the box edges.
    pub fn step(&mut self, psi: &mut WavefunctionGrid<T>) -> Result<(), SimError> {
        let a = &mut psi.amplitudes;
        let n = a.len();
        let d = &mut self.scratch;
        for j in 0..n {
            let mut r = self.diag_b[j] * a[j];
            if j > 0 {
                r = r + self.off_b * a[j - 1];
            }
            if j + 1 < n {
                r = r + self.off_b * a[j + 1];
            }
            d[j] = r;
        }
        d[0] = d[0] * self.inv_pivot[0];
        for j in 1..n {
            d[j] = (d[j] - self.off_a * d[j - 1]) * self.inv_pivot[j];
        }
        a[n - 1] = d[n - 1];
        for j in (0..n - 1).rev() {
            a[j] = d[j] - self.c_prime[j] * a[j + 1];
        }
        psi.time = psi.time + self.dt;
        psi.check_edges()
    }
}

/// One Crank–Nicolson step of `i hbar psi_t = (-hbar^2/(2m) psi_xx + V psi)`
/// in a Dirichlet box.
pub fn cn_step<T: Real>(
    psi: &WavefunctionGrid<T>,
    potential: &FieldOnGrid<T>,
    dt: T,
) -> Result<WavefunctionGrid<T>, SimError> {
    let mut out = psi.clone();
    CnPropagator::new(psi, potential, dt)?.step(&mut out)?;
    Ok(out)
}
