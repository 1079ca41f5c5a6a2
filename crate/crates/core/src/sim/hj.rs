use std::fmt;

use super::grid::{FieldOnGrid, WavefunctionGrid};
use super::madelung::{madelung, phase_gradient, probability_region, quantum_potential};
use super::SimError;
use crate::scalar::Real;

/// Probability mass of the central region the residual is measured on.
pub const HJ_REGION: f64 = 0.99;

/// Sign of the quantum-potential term `Vq = (hbar^2/2m)(d^2 sqrt(rho))/sqrt(rho)`
/// in `dS/dt = -(dS/dx)^2/2m - V ± Vq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VqSign {
    /// `+Vq`, as the term is printed.
    Printed,
    /// `-Vq`.
    Reversed,
}

impl fmt::Display for VqSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VqSign::Printed => "printed",
            VqSign::Reversed => "reversed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjResidual<T> {
    /// Max-norm of `dS/dt + (dS/dx)^2/2m + V - Vq`.
    pub printed: T,
    /// Max-norm of `dS/dt + (dS/dx)^2/2m + V + Vq`.
    pub reversed: T,
    /// Grid points the norms were taken over, summed across frames.
    pub points: usize,
}

impl<T: Real> HjResidual<T> {
    pub fn consistent(&self) -> VqSign {
        if self.printed <= self.reversed {
            VqSign::Printed
        } else {
            VqSign::Reversed
        }
    }

    pub fn norm(&self, sign: VqSign) -> T {
        match sign {
            VqSign::Printed => self.printed,
            VqSign::Reversed => self.reversed,
        }
    }

    /// Larger norm over smaller.
    pub fn separation(&self) -> T {
        self.printed.max(self.reversed) / self.printed.min(self.reversed)
    }

    /// Combines residuals measured on disjoint frame windows.
    pub fn merge(self, other: Self) -> Self {
        Self {
            printed: self.printed.max(other.printed),
            reversed: self.reversed.max(other.reversed),
            points: self.points + other.points,
        }
    }
}

/// Quantum Hamilton–Jacobi residual on every interior frame, with `dS/dt`
/// from the central time difference of the phase. Measured on the 99%
/// probability region of each frame intersected with the density mask.
pub fn hj_residual<T: Real>(frames: &[WavefunctionGrid<T>], potential: &FieldOnGrid<T>) -> Result<HjResidual<T>, SimError> {
    if frames.len() < 3 {
        return Err(SimError::TooFewFrames(frames.len()));
    }
    let grid = frames[0].grid;
    if frames.iter().any(|f| f.grid != grid) || potential.grid != grid {
        return Err(SimError::InvalidGrid("frames and potential must share one grid".into()));
    }
    let spacing = frames[1].time - frames[0].time;
    if !(spacing > T::zero()) {
        return Err(SimError::NonUniformFrames);
    }
    for w in frames.windows(2) {
        if ((w[1].time - w[0].time) - spacing).abs() > T::of(1e-6) * spacing {
            return Err(SimError::NonUniformFrames);
        }
    }
    let mut printed = T::zero();
    let mut reversed = T::zero();
    let mut points = 0;
    for w in frames.windows(3) {
        let (p, r) = hj_residual_fields(&w[0], &w[1], &w[2], potential);
        for j in 0..grid.n {
            if p.mask[j] {
                printed = printed.max(p.values[j].abs());
                reversed = reversed.max(r.values[j].abs());
                points += 1;
            }
        }
    }
    if points == 0 {
        return Err(SimError::MaskEmpty);
    }
    Ok(HjResidual { printed, reversed, points })
}

/// Pointwise residuals `(printed, reversed)` at the middle frame of three,
/// masked to the 99% region and the density mask.
pub fn hj_residual_fields<T: Real>(
    before: &WavefunctionGrid<T>,
    here: &WavefunctionGrid<T>,
    after: &WavefunctionGrid<T>,
    potential: &FieldOnGrid<T>,
) -> (FieldOnGrid<T>, FieldOnGrid<T>) {
    let grid = here.grid;
    let units = here.units;
    let hbar = units.hbar();
    let two_m = T::of(2.0) * units.mass();
    let (rho, _) = madelung(here);
    let vq = quantum_potential(&rho, units);
    let grad = phase_gradient(here);
    let region = probability_region(grid, &rho.values, HJ_REGION);
    let dt2 = after.time - before.time;
    let mut printed = vec![T::zero(); grid.n];
    let mut reversed = vec![T::zero(); grid.n];
    let mut mask = vec![false; grid.n];
    for j in 0..grid.n {
        if !(vq.mask[j] && grad.mask[j] && region[j]) {
            continue;
        }
        let s_t = hbar * (after.amplitudes[j] * before.amplitudes[j].conj()).arg() / dt2;
        let base = s_t + grad.values[j] * grad.values[j] / two_m + potential.values[j];
        printed[j] = base - vq.values[j];
        reversed[j] = base + vq.values[j];
        mask[j] = true;
    }
    (FieldOnGrid::new(grid, printed, mask.clone()), FieldOnGrid::new(grid, reversed, mask))
}
