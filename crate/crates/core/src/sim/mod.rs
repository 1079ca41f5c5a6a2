//! One-dimensional stochastic-mechanics laboratory: a Crank–Nicolson
//! reference evolver, Madelung fields, and Nelson ensembles with
//! reproducible per-path random streams.

mod ensemble;
mod grid;
mod hj;
mod madelung;
mod scenario;
mod schrodinger;

use thiserror::Error;

pub use ensemble::{
    brownian_scaling_check, density_estimate, evolve_ensemble, l1_distance, path_rng, BrownianRow, DriftSource,
    DriftTable, EnsembleState,
};
pub use grid::{
    harmonic_potential, init_wavepacket, moments, FieldOnGrid, Grid, PacketKind, PacketParams, SimUnits,
    WavefunctionGrid, EDGE_FRACTION, MIN_POINTS,
};
pub use hj::{hj_residual, hj_residual_fields, HjResidual, VqSign, HJ_REGION};
pub use madelung::{madelung, nelson_drift, phase_gradient, probability_region, quantum_potential, RHO_FLOOR};
pub use scenario::{
    brownian_csv, consistency_csv, fields_csv, hj_csv, run_scenario, sci9, ConsistencySample, Fixture, OutputSpec, Scenario,
    ScenarioOutcome, ThresholdCheck, Thresholds,
};
pub use schrodinger::{cn_step, dt_guard, CnPropagator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("hbar and mass must be finite and positive (hbar = {hbar}, mass = {mass})")]
    InvalidUnits { hbar: f64, mass: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("time step must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("dt = {dt} exceeds the accuracy guard dx^2*m/hbar = {limit}")]
    DtGuard { dt: f64, limit: f64 },
    #[error("packet width {sigma} is not resolved by dx = {dx} (need more than 4 dx)")]
    UnresolvedPacket { sigma: f64, dx: f64 },
    #[error("wavefunction reached the box edge at t = {time} (edge/peak = {edge_fraction:e})")]
    BoundaryContamination { time: f64, edge_fraction: f64 },
    #[error("no drift field for t = {time}")]
    DriftUnavailable { time: f64 },
    #[error("bandwidth {bandwidth} is below the grid spacing {dx}")]
    BandwidthTooSmall { bandwidth: f64, dx: f64 },
    #[error("density floor masks the whole domain")]
    MaskEmpty,
    #[error("ensemble needs at least one path")]
    NoPaths,
    #[error("residual needs at least 3 frames, got {0}")]
    TooFewFrames(usize),
    #[error("frames are not uniformly spaced in time")]
    NonUniformFrames,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl SimError {
    /// Errors detectable from the configuration alone, before any evolution.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            SimError::InvalidUnits { .. }
                | SimError::InvalidGrid(_)
                | SimError::InvalidStep(_)
                | SimError::DtGuard { .. }
                | SimError::UnresolvedPacket { .. }
                | SimError::BandwidthTooSmall { .. }
                | SimError::NoPaths
                | SimError::InvalidScenario(_)
        )
    }
}
