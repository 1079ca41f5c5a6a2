use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::grid::{FieldOnGrid, Grid, SimUnits};
use super::SimError;
use crate::scalar::Real;

/// Paths evolved together by one worker; chunking never changes results.
const CHUNK: usize = 256;

/// One sample path with its private random stream.
#[derive(Debug, Clone)]
pub struct Walker<T> {
    pub x: T,
    rng: ChaCha8Rng,
}

/// Stream for path `index` under root `seed`. Depends on nothing else, so
/// any partition of paths across workers draws the same numbers.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct EnsembleState<T> {
    walkers: Vec<Walker<T>>,
    pub time: T,
    pub units: SimUnits<T>,
    seed: u64,
    /// Reflecting walls, if any.
    pub bounds: Option<(T, T)>,
}

impl<T: Real> EnsembleState<T> {
    /// All paths start at `x`.
    pub fn at_point(x: T, n_paths: usize, seed: u64, units: SimUnits<T>) -> Result<Self, SimError> {
        if n_paths == 0 {
            return Err(SimError::NoPaths);
        }
        let walkers = (0..n_paths).map(|i| Walker { x, rng: path_rng(seed, i) }).collect();
        Ok(Self { walkers, time: T::zero(), units, seed, bounds: None })
    }

    /// Paths drawn from `rho` by inverse CDF, each from its own stream.
    /// `rho[j]` is the mass of the cell centred on `x_j`; walls are set to
    /// the grid ends.
    pub fn sample(rho: &FieldOnGrid<T>, n_paths: usize, seed: u64, units: SimUnits<T>) -> Result<Self, SimError> {
        let mut ens = Self::at_point(T::zero(), n_paths, seed, units)?;
        let grid = rho.grid;
        let mut cdf = Vec::with_capacity(grid.n);
        let mut acc = 0.0;
        for r in &rho.values {
            acc += r.as_f64().max(0.0);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(SimError::MaskEmpty);
        }
        let (lo, hi) = (grid.x0, grid.x_end());
        ens.walkers.par_chunks_mut(CHUNK).for_each(|chunk| {
            for w in chunk {
                let u: f64 = w.rng.random::<f64>() * acc;
                let j = cdf.partition_point(|c| *c <= u).min(grid.n - 1);
                let below = if j == 0 { 0.0 } else { cdf[j - 1] };
                let frac = (u - below) / (cdf[j] - below);
                let x = grid.x(j) + grid.dx * T::of(frac - 0.5);
                w.x = x.max(lo).min(hi);
            }
        });
        ens.bounds = Some((lo, hi));
        Ok(ens)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.walkers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walkers.is_empty()
    }

    pub fn positions(&self) -> Vec<T> {
        self.walkers.iter().map(|w| w.x).collect()
    }

    /// `(seed, path index, words consumed)` for path `i`.
    pub fn rng_descriptor(&self, i: usize) -> (u64, u64, u128) {
        let rng = &self.walkers[i].rng;
        (self.seed, rng.get_stream(), rng.get_word_pos())
    }

    /// Sample mean and (population) variance, summed in path order.
    pub fn moments(&self) -> (T, T) {
        sample_moments(self.walkers.iter().map(|w| w.x))
    }
}

pub(crate) fn sample_moments<T: Real>(xs: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = T::of(xs.clone().count() as f64);
    let mean = xs.clone().sum::<T>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var)
}

/// Drift field prepared for interpolation: masked nodes take the value of
/// the nearest defined node.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTable<T> {
    x0: T,
    inv_dx: T,
    values: Vec<T>,
}

impl<T: Real> DriftTable<T> {
    pub fn from_field(field: &FieldOnGrid<T>) -> Result<Self, SimError> {
        let n = field.grid.n;
        let defined: Vec<usize> = (0..n).filter(|j| field.mask[*j]).collect();
        if defined.is_empty() {
            return Err(SimError::MaskEmpty);
        }
        let mut values = field.values.clone();
        let first = defined[0];
        let last = defined[defined.len() - 1];
        let mut prev: Option<usize> = None;
        let mut next_idx = 0;
        for j in 0..n {
            if field.mask[j] {
                prev = Some(j);
                next_idx += 1;
                continue;
            }
            let source = match (prev, defined.get(next_idx)) {
                (None, _) => first,
                (Some(_), None) => last,
                (Some(p), Some(&q)) => {
                    if j - p <= q - j {
                        p
                    } else {
                        q
                    }
                }
            };
            values[j] = field.values[source];
        }
        Ok(Self { x0: field.grid.x0, inv_dx: T::one() / field.grid.dx, values })
    }

    /// Linear interpolation, constant beyond the ends.
    #[inline]
    pub fn at(&self, x: T) -> T {
        let s = ((x - self.x0) * self.inv_dx).as_f64();
        let last = self.values.len() - 1;
        if !(s > 0.0) {
            return self.values[0];
        }
        let i = s as usize;
        if i >= last {
            return self.values[last];
        }
        let f = T::of(s - i as f64);
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }
}

/// Where the drift comes from at each step.
#[derive(Debug, Clone, Copy)]
pub enum DriftSource<'a, T> {
    Zero,
    /// `tables[k]` holds the drift at time `t0 + k*dt`.
    Frames { t0: T, dt: T, tables: &'a [DriftTable<T>] },
}

/// `n_steps` Euler–Maruyama steps `x += b(x,t) dt + sqrt(nu dt) xi` on every
/// path. Paths are independent, so the outcome is the same for any number of
/// worker threads.
pub fn evolve_ensemble<T: Real>(
    ens: &mut EnsembleState<T>,
    drift: DriftSource<'_, T>,
    dt: T,
    n_steps: usize,
) -> Result<(), SimError> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(SimError::InvalidStep(dt.as_f64()));
    }
    let start = ens.time;
    let tables: Option<&[DriftTable<T>]> = match drift {
        DriftSource::Zero => None,
        DriftSource::Frames { t0, dt: frame_dt, tables } => {
            let unavailable = || SimError::DriftUnavailable { time: start.as_f64() };
            let k = ((start - t0) / frame_dt).round();
            let aligned = (t0 + k * frame_dt - start).abs() <= T::of(1e-6) * frame_dt;
            let same_dt = (frame_dt - dt).abs() <= T::of(1e-12) * dt;
            let k = k.to_usize().ok_or_else(unavailable)?;
            if !aligned || !same_dt || k + n_steps > tables.len() {
                return Err(unavailable());
            }
            Some(&tables[k..k + n_steps])
        }
    };
    let sd = (ens.units.diffusion() * dt).sqrt();
    let bounds = ens.bounds;
    ens.walkers.par_chunks_mut(CHUNK).for_each(|chunk| {
        for step in 0..n_steps {
            let table = tables.map(|t| &t[step]);
            for w in chunk.iter_mut() {
                let xi: f64 = StandardNormal.sample(&mut w.rng);
                let b = table.map_or(T::zero(), |t| t.at(w.x));
                let mut x = w.x + b * dt + sd * T::of(xi);
                if let Some((lo, hi)) = bounds {
                    if x < lo {
                        x = lo + lo - x;
                    }
                    if x > hi {
                        x = hi + hi - x;
                    }
                    x = x.max(lo).min(hi);
                }
                w.x = x;
            }
        }
    });
    ens.time = start + T::of(n_steps as f64) * dt;
    Ok(())
}

/// Gaussian kernel density estimate on `grid`, kernels truncated at six
/// bandwidths, normalized so that `sum rho dx = 1`.
pub fn density_estimate<T: Real>(positions: &[T], grid: Grid<T>, bandwidth: T) -> Result<FieldOnGrid<T>, SimError> {
    if !(bandwidth >= grid.dx) {
        return Err(SimError::BandwidthTooSmall { bandwidth: bandwidth.as_f64(), dx: grid.dx.as_f64() });
    }
    let n = grid.n;
    let mut acc = vec![T::zero(); n];
    let reach = (T::of(6.0) * bandwidth / grid.dx).ceil().to_usize().unwrap_or(n);
    let inv_h = T::one() / bandwidth;
    let half = T::of(-0.5);
    for x in positions {
        let s = (*x - grid.x0) / grid.dx;
        let centre = s.round().to_i64().unwrap_or(0);
        let lo = (centre - reach as i64).max(0);
        let hi = (centre + reach as i64).min(n as i64 - 1);
        for j in lo..=hi {
            let j = j as usize;
            let u = (grid.x(j) - *x) * inv_h;
            acc[j] = acc[j] + (half * u * u).exp();
        }
    }
    let total: T = acc.iter().copied().sum::<T>() * grid.dx;
    if total > T::zero() {
        for a in &mut acc {
            *a = *a / total;
        }
    }
    Ok(FieldOnGrid::full(grid, acc))
}

/// `sum |a - b| dx`
pub fn l1_distance<T: Real>(a: &[T], b: &[T], dx: T) -> T {
    a.iter().zip(b).map(|(p, q)| (*p - *q).abs()).sum::<T>() * dx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianRow<T> {
    pub dt: T,
    pub mean: T,
    pub variance: T,
    /// `sqrt(nu dt / n_paths)`
    pub std_error: T,
    pub rms_step: T,
    /// `sqrt(nu dt)`
    pub prediction: T,
    pub ratio: T,
}

/// One zero-drift step per `dt`; the `i`-th entry of `dt_list` uses root
/// seed `seed + i`.
pub fn brownian_scaling_check<T: Real>(
    units: SimUnits<T>,
    dt_list: &[T],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<BrownianRow<T>>, SimError> {
    dt_list
        .iter()
        .enumerate()
        .map(|(i, &dt)| {
            let mut ens = EnsembleState::at_point(T::zero(), n_paths, seed.wrapping_add(i as u64), units)?;
            evolve_ensemble(&mut ens, DriftSource::Zero, dt, 1)?;
            let (mean, variance) = ens.moments();
            let n = T::of(n_paths as f64);
            let rms_step = (ens.walkers.iter().map(|w| w.x * w.x).sum::<T>() / n).sqrt();
            let prediction = (units.diffusion() * dt).sqrt();
            Ok(BrownianRow {
                dt,
                mean,
                variance,
                std_error: prediction / n.sqrt(),
                rms_step,
                prediction,
                ratio: rms_step / prediction,
            })
        })
        .collect()
}
