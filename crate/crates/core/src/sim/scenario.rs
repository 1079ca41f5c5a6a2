use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ensemble::{density_estimate, evolve_ensemble, l1_distance, BrownianRow, DriftSource, DriftTable, EnsembleState};
use super::grid::{harmonic_potential, init_wavepacket, FieldOnGrid, Grid, PacketKind, PacketParams, SimUnits, WavefunctionGrid};
use super::hj::{hj_residual, HjResidual, VqSign};
use super::madelung::{madelung, nelson_drift, quantum_potential};
use super::schrodinger::{dt_guard, CnPropagator};
use super::SimError;

use crate::scalar::Real;

/// Steps whose drift tables are built before the ensemble catches up.
const BLOCK: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Ground state of `V = m omega^2 x^2 / 2`; stationary.
    Harmonic,
    /// Free Gaussian packet spreading from `sigma0`.
    Free,
}

impl Fixture {
    pub fn packet(self) -> PacketKind {
        match self {
            Fixture::Harmonic => PacketKind::HarmonicGround,
            Fixture::Free => PacketKind::GaussianFree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for CSV output.
    pub dir: Option<String>,
    /// Also dump `x,rho,S,Vq,b` of the final frame.
    #[serde(default)]
    pub fields: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Upper bound on `L1(rho_hat, |psi|^2)` at every sample.
    pub l1_max: f64,
    /// Relative bound on the final ensemble variance against the analytic one.
    pub variance_rel_tol: f64,
    /// Upper bound on the consistent convention's residual.
    pub hj_max: f64,
    /// Lower bound on the ratio of the two conventions' residuals.
    pub hj_separation: f64,
}

/// A simulation run. Every key except `fixture` has a per-fixture default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub fixture: Fixture,
    pub n_points: usize,
    pub dx: f64,
    pub x_center: f64,
    pub sigma0: f64,
    pub k0: f64,
    pub omega: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub bandwidth: f64,
    /// Steps between consistency samples.
    pub sample_every: usize,
    pub hbar: f64,
    pub mass: f64,
    /// Worker threads for the ensemble; 0 means all available. Never changes
    /// results.
    pub workers: usize,
    pub output: OutputSpec,
    pub thresholds: Thresholds,
}

impl Scenario {
    pub fn harmonic() -> Self {
        Self {
            fixture: Fixture::Harmonic,
            n_points: 1024,
            dx: 0.02,
            x_center: 0.0,
            sigma0: 1.0,
            k0: 0.0,
            omega: 1.0,
            dt: 1e-4,
            n_steps: 50_000,
            n_paths: 100_000,
            seed: 42,
            bandwidth: 0.1,
            sample_every: 2_500,
            hbar: 1.0,
            mass: 1.0,
            workers: 0,
            output: OutputSpec::default(),
            thresholds: Thresholds { l1_max: 0.03, variance_rel_tol: 0.03, hj_max: 1e-2, hj_separation: 10.0 },
        }
    }

    /// `sigma0 = 1` to `t = 2`. The box is 2048 points wide so the packet
    /// stays clear of the walls.
    pub fn free() -> Self {
        Self {
            fixture: Fixture::Free,
            n_points: 2048,
            n_steps: 20_000,
            sample_every: 2_000,
            thresholds: Thresholds { l1_max: 0.05, variance_rel_tol: 0.03, hj_max: 1e-2, hj_separation: 10.0 },
            ..Self::harmonic()
        }
    }

    pub fn for_fixture(fixture: Fixture) -> Self {
        match fixture {
            Fixture::Harmonic => Self::harmonic(),
            Fixture::Free => Self::free(),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Contract checks that need no evolution; failures are configuration
    /// errors.
    pub fn validate(&self) -> Result<(), SimError> {
        SimUnits::new(self.hbar, self.mass)?;
        Grid::centered(self.x_center, self.dx, self.n_points)?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::InvalidStep(self.dt));
        }
        let limit = dt_guard(self.dx, self.hbar, self.mass);
        if self.dt > limit {
            return Err(SimError::DtGuard { dt: self.dt, limit });
        }
        if self.n_paths == 0 {
            return Err(SimError::NoPaths);
        }
        if !(self.bandwidth >= self.dx) {
            return Err(SimError::BandwidthTooSmall { bandwidth: self.bandwidth, dx: self.dx });
        }
        if self.n_steps == 0 || self.sample_every == 0 {
            return Err(SimError::InvalidScenario("n_steps and sample_every must be positive".into()));
        }
        if self.fixture == Fixture::Harmonic && !(self.omega > 0.0) {
            return Err(SimError::InvalidScenario("omega must be positive".into()));
        }
        Ok(())
    }

    /// Variance of `|psi|^2` at time `t` in closed form.
    pub fn analytic_variance(&self, t: f64) -> f64 {
        match self.fixture {
            Fixture::Harmonic => self.hbar / (2.0 * self.mass * self.omega),
            Fixture::Free => {
                let s2 = self.sigma0 * self.sigma0;
                let spread = self.hbar * t / (2.0 * self.mass * self.sigma0);
                s2 + spread * spread
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencySample<T> {
    pub t: T,
    pub x_mean: T,
    pub x_var: T,
    pub l1_discrepancy: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCheck {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome<T> {
    pub samples: Vec<ConsistencySample<T>>,
    /// Absent only when the run has fewer than two steps.
    pub hj: Option<HjResidual<T>>,
    pub final_psi: WavefunctionGrid<T>,
    pub potential: FieldOnGrid<T>,
    pub checks: Vec<ThresholdCheck>,
}

impl<T: Real> ScenarioOutcome<T> {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_l1(&self) -> T {
        self.samples.iter().map(|s| s.l1_discrepancy).fold(T::zero(), T::max)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        if let Some(last) = self.samples.last() {
            let _ = writeln!(
                out,
                "t = {}  x_mean = {}  x_var = {}  L1 = {}",
                sci9(last.t.as_f64()),
                sci9(last.x_mean.as_f64()),
                sci9(last.x_var.as_f64()),
                sci9(last.l1_discrepancy.as_f64())
            );
        }
        let _ = writeln!(out, "max L1 = {}", sci9(self.max_l1().as_f64()));
        if let Some(hj) = &self.hj {
            let _ = writeln!(
                out,
                "HJ residual: printed {}  reversed {}  consistent: {}",
                sci9(hj.printed.as_f64()),
                sci9(hj.reversed.as_f64()),
                hj.consistent()
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<20} {:>16} limit {:>16}  {}",
                c.name,
                sci9(c.value),
                sci9(c.limit),
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }
}

/// Co-evolves the reference wavefunction (Crank–Nicolson) and a Nelson
/// ensemble sampled from `|psi(0)|^2` with the forward drift of each frame.
/// The Hamilton–Jacobi residual is taken around step 1 and every interior
/// sample.
pub fn run_scenario<T: Real>(sc: &Scenario) -> Result<ScenarioOutcome<T>, SimError> {
    sc.validate()?;
    if sc.workers == 0 {
        return evolve_scenario(sc);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(sc.workers)
        .build()
        .map_err(|e| SimError::InvalidScenario(format!("worker pool: {e}")))?
        .install(|| evolve_scenario(sc))
}

fn evolve_scenario<T: Real>(sc: &Scenario) -> Result<ScenarioOutcome<T>, SimError> {
    let units = SimUnits::new(T::of(sc.hbar), T::of(sc.mass))?;
    let grid = Grid::centered(T::of(sc.x_center), T::of(sc.dx), sc.n_points)?;
    let params = PacketParams {
        sigma0: T::of(sc.sigma0),
        x_center: T::of(sc.x_center),
        k0: T::of(sc.k0),
        omega: T::of(sc.omega),
    };
    let mut psi = init_wavepacket(sc.fixture.packet(), params, grid, units)?;
    let potential = match sc.fixture {
        Fixture::Harmonic => harmonic_potential(grid, units, params.omega, params.x_center),
        Fixture::Free => FieldOnGrid::zeros(grid),
    };
    let dt = T::of(sc.dt);
    let mut prop = CnPropagator::new(&psi, &potential, dt)?;
    let bandwidth = T::of(sc.bandwidth);
    let rho0 = FieldOnGrid::full(grid, psi.density());
    let mut ens = EnsembleState::sample(&rho0, sc.n_paths, sc.seed, units)?;

    let sample = |ens: &EnsembleState<T>, psi: &WavefunctionGrid<T>| -> Result<ConsistencySample<T>, SimError> {
        let rho_hat = density_estimate(&ens.positions(), grid, bandwidth)?;
        let (x_mean, x_var) = ens.moments();
        Ok(ConsistencySample {
            t: ens.time,
            x_mean,
            x_var,
            l1_discrepancy: l1_distance(&rho_hat.values, &psi.density(), grid.dx),
        })
    };
    let hj_at = |k: usize| k == 1 || (k > 0 && k.is_multiple_of(sc.sample_every));

    let mut samples = vec![sample(&ens, &psi)?];
    let mut hj: Option<HjResidual<T>> = None;
    let mut before: Option<WavefunctionGrid<T>> = None;
    let mut tables = Vec::with_capacity(BLOCK);
    let mut step = 0;
    while step < sc.n_steps {
        let next_sample = (step / sc.sample_every + 1) * sc.sample_every;
        let len = BLOCK.min(next_sample - step).min(sc.n_steps - step);
        let block_start = ens.time;
        tables.clear();
        for k in step..step + len {
            tables.push(DriftTable::from_field(&nelson_drift(&psi))?);
            let triple = if hj_at(k) { before.take().map(|b| (b, psi.clone())) } else { None };
            if hj_at(k + 1) {
                before = Some(psi.clone());
            }
            prop.step(&mut psi)?;
            psi.time = T::of((k + 1) as f64) * dt;
            if let Some((b, h)) = triple {
                let r = hj_residual(&[b, h, psi.clone()], &potential)?;
                hj = Some(hj.map_or(r, |acc| acc.merge(r)));
            }
        }
        evolve_ensemble(&mut ens, DriftSource::Frames { t0: block_start, dt, tables: &tables }, dt, len)?;
        step += len;
        ens.time = psi.time;
        if step.is_multiple_of(sc.sample_every) || step == sc.n_steps {
            samples.push(sample(&ens, &psi)?);
        }
    }

    let th = sc.thresholds;
    let mut checks = Vec::new();
    let max_l1 = samples.iter().map(|s| s.l1_discrepancy.as_f64()).fold(0.0, f64::max);
    checks.push(ThresholdCheck { name: "max_l1", value: max_l1, limit: th.l1_max, pass: max_l1 <= th.l1_max });
    let last = samples.last().expect("initial sample");
    let analytic = sc.analytic_variance(last.t.as_f64());
    let rel = (last.x_var.as_f64() / analytic - 1.0).abs();
    checks.push(ThresholdCheck {
        name: "variance_rel_err",
        value: rel,
        limit: th.variance_rel_tol,
        pass: rel <= th.variance_rel_tol,
    });
    if let Some(r) = hj {
        let best = r.norm(r.consistent()).as_f64();
        checks.push(ThresholdCheck { name: "hj_consistent", value: best, limit: th.hj_max, pass: best <= th.hj_max });
        let sep = r.separation().as_f64();
        checks.push(ThresholdCheck {
            name: "hj_separation",
            value: sep,
            limit: th.hj_separation,
            pass: sep >= th.hj_separation,
        });
    }
    Ok(ScenarioOutcome { samples, hj, final_psi: psi, potential, checks })
}

fn push_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|v| sci9(*v)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// `t,x_mean,x_var,l1_discrepancy`
pub fn consistency_csv<T: Real>(samples: &[ConsistencySample<T>]) -> String {
    let mut out = String::from("t,x_mean,x_var,l1_discrepancy\n");
    for s in samples {
        push_row(&mut out, &[s.t.as_f64(), s.x_mean.as_f64(), s.x_var.as_f64(), s.l1_discrepancy.as_f64()]);
    }
    out
}

/// `x,rho,S,Vq,b`; masked cells are left empty.
pub fn fields_csv<T: Real>(psi: &WavefunctionGrid<T>) -> String {
    let (rho, s) = madelung(psi);
    let vq = quantum_potential(&rho, psi.units);
    let b = nelson_drift(psi);
    let cell = |f: &FieldOnGrid<T>, j: usize| f.get(j).map(|v| sci9(v.as_f64())).unwrap_or_default();
    let mut out = String::from("x,rho,S,Vq,b\n");
    for j in 0..psi.grid.n {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci9(psi.grid.x(j).as_f64()),
            cell(&rho, j),
            cell(&s, j),
            cell(&vq, j),
            cell(&b, j)
        );
    }
    out
}

/// `convention,max_norm,consistent`
pub fn hj_csv<T: Real>(hj: &HjResidual<T>) -> String {
    let mut out = String::from("convention,max_norm,consistent\n");
    let consistent = hj.consistent();
    for sign in [VqSign::Printed, VqSign::Reversed] {
        let _ = writeln!(out, "{},{},{}", sign, sci9(hj.norm(sign).as_f64()), sign == consistent);
    }
    out
}

/// `dt,mean,variance,std_error,rms_step,prediction,ratio`
pub fn brownian_csv<T: Real>(rows: &[BrownianRow<T>]) -> String {
    let mut out = String::from("dt,mean,variance,std_error,rms_step,prediction,ratio\n");
    for r in rows {
        push_row(
            &mut out,
            &[
                r.dt.as_f64(),
                r.mean.as_f64(),
                r.variance.as_f64(),
                r.std_error.as_f64(),
                r.rms_step.as_f64(),
                r.prediction.as_f64(),
                r.ratio.as_f64(),
            ],
        );
    }
    out
}

/// Scientific notation with exactly 9 significant digits.
pub fn sci9(x: f64) -> String {
    format!("{x:.8e}")
}
