use num_complex::Complex;

use super::SimError;
use crate::scalar::Real;

/// Natural-unit constants for the laboratory. The diffusion constant is
/// always derived, never set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimUnits<T> {
    hbar: T,
    mass: T,
}

impl<T: Real> SimUnits<T> {
    pub fn new(hbar: T, mass: T) -> Result<Self, SimError> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !ok(hbar) || !ok(mass) {
            return Err(SimError::InvalidUnits { hbar: hbar.as_f64(), mass: mass.as_f64() });
        }
        Ok(Self { hbar, mass })
    }

    pub fn natural() -> Self {
        Self { hbar: T::one(), mass: T::one() }
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// `nu = hbar / m`
    pub fn diffusion(&self) -> T {
        self.hbar / self.mass
    }
}

impl<T: Real> Default for SimUnits<T> {
    fn default() -> Self {
        Self::natural()
    }
}

/// Uniform 1D grid geometry: `x_j = x0 + j*dx`, `j < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub x0: T,
    pub dx: T,
    pub n: usize,
}

pub const MIN_POINTS: usize = 16;

impl<T: Real> Grid<T> {
    pub fn new(x0: T, dx: T, n: usize) -> Result<Self, SimError> {
        if n < MIN_POINTS || !(dx > T::zero()) || !dx.is_finite() || !x0.is_finite() {
            return Err(SimError::InvalidGrid(format!(
                "need n >= {MIN_POINTS} and finite dx > 0 (n = {n}, dx = {})",
                dx.as_f64()
            )));
        }
        Ok(Self { x0, dx, n })
    }

    /// Grid of `n` points centred on `center`.
    pub fn centered(center: T, dx: T, n: usize) -> Result<Self, SimError> {
        let half = T::of((n.max(1) - 1) as f64) * dx / T::of(2.0);
        Self::new(center - half, dx, n)
    }

    pub fn x(&self, j: usize) -> T {
        self.x0 + T::of(j as f64) * self.dx
    }

    pub fn x_end(&self) -> T {
        self.x(self.n - 1)
    }

    pub fn xs(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(|j| self.x(j))
    }
}

/// Real field sampled on a grid; `mask[j]` marks where `values[j]` is
/// defined.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOnGrid<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
    pub mask: Vec<bool>,
}

impl<T: Real> FieldOnGrid<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>, mask: Vec<bool>) -> Self {
        assert_eq!(values.len(), grid.n);
        assert_eq!(mask.len(), grid.n);
        Self { grid, values, mask }
    }

    pub fn full(grid: Grid<T>, values: Vec<T>) -> Self {
        let mask = vec![true; values.len()];
        Self::new(grid, values, mask)
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        Self::full(grid, grid.xs().map(f).collect())
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::full(grid, vec![T::zero(); grid.n])
    }

    pub fn get(&self, j: usize) -> Option<T> {
        self.mask[j].then(|| self.values[j])
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Maximum of `|values|` over points where both this mask and `region`
    /// hold.
    pub fn max_abs_on(&self, region: &[bool]) -> Option<T> {
        self.values
            .iter()
            .zip(&self.mask)
            .zip(region)
            .filter(|((_, m), r)| **m && **r)
            .map(|((v, _), _)| v.abs())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: T| a.max(v))))
    }
}

/// Harmonic potential `m*omega^2*(x - center)^2 / 2`.
pub fn harmonic_potential<T: Real>(grid: Grid<T>, units: SimUnits<T>, omega: T, center: T) -> FieldOnGrid<T> {
    let k = units.mass() * omega * omega / T::of(2.0);
    FieldOnGrid::from_fn(grid, |x| k * (x - center) * (x - center))
}

/// Complex amplitudes on a grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid<T> {
    pub grid: Grid<T>,
    pub amplitudes: Vec<Complex<T>>,
    pub time: T,
    pub units: SimUnits<T>,
}

/// Edge amplitudes must stay below this fraction of the peak amplitude.
pub const EDGE_FRACTION: f64 = 1e-6;

impl<T: Real> WavefunctionGrid<T> {
    /// `sum |psi_j|^2 dx`
    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>() * self.grid.dx
    }

    pub fn density(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn normalize(&mut self) {
        let s = self.norm().sqrt();
        for a in &mut self.amplitudes {
            *a = *a / s;
        }
    }

    /// `(<x>, <x^2> - <x>^2)` of `|psi|^2`.
    pub fn moments(&self) -> (T, T) {
        moments(self.grid, &self.density())
    }

    pub fn check_edges(&self) -> Result<(), SimError> {
        let peak = self.amplitudes.iter().map(|a| a.norm()).fold(T::zero(), T::max);
        let edge = self.amplitudes[0].norm().max(self.amplitudes[self.grid.n - 1].norm());
        if !(edge < T::of(EDGE_FRACTION) * peak) {
            return Err(SimError::BoundaryContamination {
                time: self.time.as_f64(),
                edge_fraction: (edge / peak).as_f64(),
            });
        }
        Ok(())
    }
}

/// Mean and variance of a density sampled on `grid`.
pub fn moments<T: Real>(grid: Grid<T>, rho: &[T]) -> (T, T) {
    let total: T = rho.iter().copied().sum();
    let mean = grid.xs().zip(rho).map(|(x, r)| x * *r).sum::<T>() / total;
    let var = grid.xs().zip(rho).map(|(x, r)| (x - mean) * (x - mean) * *r).sum::<T>() / total;
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    GaussianFree,
    HarmonicGround,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams<T> {
    /// Position spread of `|psi|^2`; ignored for `HarmonicGround`, whose
    /// spread is `sqrt(hbar/(2 m omega))`.
    pub sigma0: T,
    pub x_center: T,
    pub k0: T,
    pub omega: T,
}

impl<T: Real> PacketParams<T> {
    pub fn spread(&self, kind: PacketKind, units: SimUnits<T>) -> T {
        match kind {
            PacketKind::GaussianFree => self.sigma0,
            PacketKind::HarmonicGround => (units.hbar() / (T::of(2.0) * units.mass() * self.omega)).sqrt(),
        }
    }
}

/// Normalized initial state. The packet must be resolved (`spread > 4 dx`)
/// and vanish at the box edges.
pub fn init_wavepacket<T: Real>(
    kind: PacketKind,
    params: PacketParams<T>,
    grid: Grid<T>,
    units: SimUnits<T>,
) -> Result<WavefunctionGrid<T>, SimError> {
    let sigma = params.spread(kind, units);
    if !(sigma > T::of(4.0) * grid.dx) {
        return Err(SimError::UnresolvedPacket { sigma: sigma.as_f64(), dx: grid.dx.as_f64() });
    }
    let xc = params.x_center;
    let amplitudes = grid
        .xs()
        .map(|x| {
            let d = x - xc;
            match kind {
                PacketKind::GaussianFree => {
                    let env = (-(d * d) / (T::of(4.0) * sigma * sigma)).exp();
                    Complex::from_polar(env, params.k0 * x)
                }
                PacketKind::HarmonicGround => {
                    let a = units.mass() * params.omega / units.hbar();
                    Complex::new((-(a * d * d) / T::of(2.0)).exp(), T::zero())
                }
            }
        })
        .collect();
    let mut psi = WavefunctionGrid { grid, amplitudes, time: T::zero(), units };
    psi.normalize();
    psi.check_edges()?;
    Ok(psi)
}
