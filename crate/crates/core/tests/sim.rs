use approx::assert_relative_eq;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scalebridge::sim::*;

fn natural() -> SimUnits<f64> {
    SimUnits::natural()
}

fn harmonic_psi(dx: f64, n: usize) -> WavefunctionGrid<f64> {
    let grid = Grid::centered(0.0, dx, n).unwrap();
    let p = PacketParams { sigma0: 1.0, x_center: 0.0, k0: 0.0, omega: 1.0 };
    init_wavepacket(PacketKind::HarmonicGround, p, grid, natural()).unwrap()
}

fn free_psi(dx: f64, n: usize, k0: f64) -> WavefunctionGrid<f64> {
    let grid = Grid::centered(0.0, dx, n).unwrap();
    let p = PacketParams { sigma0: 1.0, x_center: 0.0, k0, omega: 1.0 };
    init_wavepacket(PacketKind::GaussianFree, p, grid, natural()).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn units_and_grid_contracts() {
    assert!(SimUnits::new(0.0, 1.0).is_err());
    assert!(SimUnits::new(1.0, f64::NAN).is_err());
    assert_eq!(SimUnits::new(2.0, 4.0).unwrap().diffusion(), 0.5);
    assert!(Grid::new(0.0, 0.1, 15).is_err());
    assert!(Grid::new(0.0, -0.1, 64).is_err());
    let g = Grid::centered(1.0, 0.5, 17).unwrap();
    assert_eq!(g.x0, -3.0);
    assert_eq!(g.x_end(), 5.0);
}

#[test]
fn harmonic_ground_state_is_normalized_gaussian() {
    let psi = harmonic_psi(0.02, 1024);
    assert!((psi.norm() - 1.0).abs() < 1e-12);
    let rho = psi.density();
    let j0 = 512;
    for j in [300, 450, 600, 700] {
        let x = psi.grid.x(j);
        let x0 = psi.grid.x(j0);
        assert_relative_eq!(rho[j] / rho[j0], (-(x * x) + x0 * x0).exp(), max_relative = 1e-10);
    }
}

#[test]
fn free_packet_is_centred() {
    let grid = Grid::centered(0.0, 0.02, 1024).unwrap();
    let p = PacketParams { sigma0: 1.0, x_center: 0.7, k0: 0.0, omega: 1.0 };
    let psi = init_wavepacket(PacketKind::GaussianFree, p, grid, natural()).unwrap();
    let (mean, var) = psi.moments();
    assert!((mean - 0.7).abs() < 1e-9);
    assert_relative_eq!(var, 1.0, max_relative = 1e-6);
}

#[test]
fn unresolved_and_contaminated_packets_are_rejected() {
    let grid = Grid::centered(0.0, 0.1, 256).unwrap();
    let p = PacketParams { sigma0: 0.1, x_center: 0.0, k0: 0.0, omega: 1.0 };
    assert!(matches!(
        init_wavepacket(PacketKind::GaussianFree, p, grid, natural()),
        Err(SimError::UnresolvedPacket { .. })
    ));
    let p = PacketParams { sigma0: 1.0, x_center: 11.0, k0: 0.0, omega: 1.0 };
    assert!(matches!(
        init_wavepacket(PacketKind::GaussianFree, p, grid, natural()),
        Err(SimError::BoundaryContamination { .. })
    ));
}

#[test]
fn crank_nicolson_preserves_norm() {
    let mut psi = free_psi(0.02, 2048, 1.0);
    let v = FieldOnGrid::zeros(psi.grid);
    let mut prop = CnPropagator::new(&psi, &v, 1e-4).unwrap();
    let mut prev = psi.norm();
    for _ in 0..10_000 {
        prop.step(&mut psi).unwrap();
        let n = psi.norm();
        assert!((n - prev).abs() <= 1e-10);
        prev = n;
    }
    assert!((psi.norm() - 1.0).abs() <= 1e-7);
}

#[test]
fn cn_step_matches_propagator() {
    let psi = free_psi(0.05, 512, 0.5);
    let v = FieldOnGrid::zeros(psi.grid);
    let a = cn_step(&psi, &v, 1e-3).unwrap();
    let mut b = psi.clone();
    CnPropagator::new(&psi, &v, 1e-3).unwrap().step(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn harmonic_ground_state_is_stationary() {
    let mut psi = harmonic_psi(0.02, 1024);
    let rho0 = psi.density();
    let v = harmonic_potential(psi.grid, natural(), 1.0, 0.0);
    let mut prop = CnPropagator::new(&psi, &v, 1e-4).unwrap();
    for _ in 0..100 {
        prop.step(&mut psi).unwrap();
    }
    assert!(max_abs_diff(&rho0, &psi.density()) <= 1e-6);
}

#[test]
fn free_packet_spreads_analytically() {
    let mut psi = free_psi(0.02, 2048, 0.0);
    let v = FieldOnGrid::zeros(psi.grid);
    let mut prop = CnPropagator::new(&psi, &v, 4e-4).unwrap();
    for _ in 0..5000 {
        prop.step(&mut psi).unwrap();
    }
    let (_, var) = psi.moments();
    assert!((var / 2.0 - 1.0).abs() <= 0.01, "{var}");
}

#[test]
fn ehrenfest_velocity() {
    let mut psi = free_psi(0.02, 2048, 1.0);
    let v = FieldOnGrid::zeros(psi.grid);
    let mut prop = CnPropagator::new(&psi, &v, 4e-4).unwrap();
    for _ in 0..5000 {
        prop.step(&mut psi).unwrap();
    }
    let (mean, _) = psi.moments();
    assert!((mean / 2.0 - 1.0).abs() <= 0.01, "{mean}");
}

#[test]
fn dt_guard_is_enforced() {
    let psi = free_psi(0.02, 1024, 0.0);
    let v = FieldOnGrid::zeros(psi.grid);
    match CnPropagator::new(&psi, &v, 1e-3) {
        Err(SimError::DtGuard { limit, .. }) => assert_relative_eq!(limit, 4e-4, max_relative = 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn walls_report_contamination() {
    let grid = Grid::centered(0.0, 0.05, 512).unwrap();
    let p = PacketParams { sigma0: 1.0, x_center: 0.0, k0: 0.0, omega: 1.0 };
    let mut psi = init_wavepacket(PacketKind::GaussianFree, p, grid, natural()).unwrap();
    let v = FieldOnGrid::zeros(grid);
    let mut prop = CnPropagator::new(&psi, &v, 2e-3).unwrap();
    let err = (0..20_000).find_map(|_| prop.step(&mut psi).err());
    assert!(matches!(err, Some(SimError::BoundaryContamination { .. })));
}

#[test]
fn madelung_phase_gradient_and_round_trip() {
    let psi = free_psi(0.02, 1024, 1.5);
    let (rho, s) = madelung(&psi);
    let region = probability_region(psi.grid, &rho.values, 0.99);
    for j in 1..psi.grid.n - 1 {
        if s.mask[j - 1] && s.mask[j + 1] && region[j] {
            let grad = (s.values[j + 1] - s.values[j - 1]) / (2.0 * psi.grid.dx);
            assert!((grad - 1.5).abs() < 1e-9);
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..psi.grid.n {
        if s.mask[j] {
            let rebuilt = Complex::from_polar(rho.values[j].sqrt(), s.values[j] / psi.units.hbar());
            worst = worst.max((rebuilt - psi.amplitudes[j]).norm());
        }
    }
    assert!(worst <= 1e-9);
}

#[test]
fn real_positive_wavefunction_has_zero_phase() {
    let psi = harmonic_psi(0.02, 1024);
    let (_, s) = madelung(&psi);
    assert!(s.masked_count() > 0);
    assert!(s.values.iter().zip(&s.mask).all(|(v, m)| !*m || *v == 0.0));
}

#[test]
fn quantum_potential_of_uniform_density_vanishes() {
    let grid = Grid::new(0.0, 0.1, 64).unwrap();
    let rho = FieldOnGrid::full(grid, vec![0.3; 64]);
    let vq = quantum_potential(&rho, natural());
    assert!(!vq.mask[0] && !vq.mask[63]);
    assert!(vq.values.iter().zip(&vq.mask).all(|(v, m)| !*m || v.abs() < 1e-12));
}

#[test]
fn quantum_potential_of_gaussian() {
    let grid = Grid::centered(0.0, 0.05, 401).unwrap();
    let rho = FieldOnGrid::from_fn(grid, |x: f64| (-x * x).exp());
    let vq = quantum_potential(&rho, natural());
    assert!((vq.values[200] + 0.5).abs() <= 1e-3);
    let region = probability_region(grid, &rho.values, 0.99);
    for j in 0..grid.n {
        if vq.mask[j] && region[j] {
            let x = grid.x(j);
            assert!((vq.values[j] - (x * x - 1.0) / 2.0).abs() <= 1e-3);
        }
    }
}

#[test]
fn quantum_potential_scales_with_units() {
    let grid = Grid::centered(0.0, 0.05, 401).unwrap();
    let rho = FieldOnGrid::from_fn(grid, |x: f64| (-x * x).exp());
    let a = quantum_potential(&rho, natural());
    let b = quantum_potential(&rho, SimUnits::new(2.0, 0.5).unwrap());
    assert_relative_eq!(b.values[200], 8.0 * a.values[200], max_relative = 1e-12);
}

#[test]
fn harmonic_drift_is_restoring() {
    let psi = harmonic_psi(0.02, 1024);
    let b = nelson_drift(&psi);
    let region = probability_region(psi.grid, &psi.density(), 0.99);
    for j in 0..psi.grid.n {
        if b.mask[j] && region[j] {
            assert!((b.values[j] + psi.grid.x(j)).abs() < 1e-3);
        }
    }
}

#[test]
fn plane_wave_drift_is_constant() {
    let grid = Grid::new(0.0, 0.05, 128).unwrap();
    let amplitudes = grid.xs().map(|x| Complex::from_polar(0.5, 2.0 * x)).collect();
    let psi = WavefunctionGrid { grid, amplitudes, time: 0.0, units: natural() };
    let b = nelson_drift(&psi);
    assert!(b.values.iter().zip(&b.mask).all(|(v, m)| !*m || (v - 2.0).abs() < 1e-12));
    assert_eq!(b.masked_count(), 126);
}

#[test]
fn symmetric_density_gives_odd_drift() {
    let psi = harmonic_psi(0.02, 1025);
    let b = nelson_drift(&psi);
    let n = psi.grid.n;
    for j in 0..n {
        if b.mask[j] {
            assert!((b.values[j] + b.values[n - 1 - j]).abs() < 1e-9);
        }
    }
}

#[test]
fn zero_drift_increment_moments() {
    let n = 100_000;
    let dt = 0.01;
    let mut ens = EnsembleState::at_point(0.0, n, 7, natural()).unwrap();
    evolve_ensemble(&mut ens, DriftSource::Zero, dt, 1).unwrap();
    let (mean, var) = ens.moments();
    assert!(mean.abs() <= 3.0 * (dt / n as f64).sqrt());
    assert!((var / dt - 1.0).abs() <= 0.02);
    assert_eq!(ens.rng_descriptor(5).1, 5);
}

#[test]
fn ensemble_is_independent_of_worker_count() {
    let grid = Grid::centered(0.0, 0.02, 1024).unwrap();
    let rho = FieldOnGrid::from_fn(grid, |x: f64| (-x * x).exp());
    let table = DriftTable::from_field(&FieldOnGrid::from_fn(grid, |x| -x)).unwrap();
    let tables = vec![table; 200];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut ens = EnsembleState::sample(&rho, 5_000, 99, natural()).unwrap();
            evolve_ensemble(&mut ens, DriftSource::Frames { t0: 0.0, dt: 1e-3, tables: &tables }, 1e-3, 200).unwrap();
            ens.positions()
        })
    };
    let one = run(1);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one), bits(&run(3)));
    assert_eq!(bits(&one), bits(&run(8)));
}

#[test]
fn drift_outside_schedule_is_unavailable() {
    let grid = Grid::centered(0.0, 0.1, 64).unwrap();
    let tables = vec![DriftTable::from_field(&FieldOnGrid::zeros(grid)).unwrap(); 10];
    let mut ens = EnsembleState::at_point(0.0, 4, 1, natural()).unwrap();
    let src = DriftSource::Frames { t0: 0.0, dt: 0.01, tables: &tables };
    assert!(matches!(evolve_ensemble(&mut ens, src, 0.01, 11), Err(SimError::DriftUnavailable { .. })));
    evolve_ensemble(&mut ens, src, 0.01, 6).unwrap();
    assert!(matches!(evolve_ensemble(&mut ens, src, 0.01, 5), Err(SimError::DriftUnavailable { .. })));
    evolve_ensemble(&mut ens, src, 0.01, 4).unwrap();
}

#[test]
fn reflecting_walls_keep_paths_inside() {
    let grid = Grid::new(-1.0, 0.1, 21).unwrap();
    let rho = FieldOnGrid::full(grid, vec![1.0; 21]);
    let mut ens = EnsembleState::sample(&rho, 1_000, 3, natural()).unwrap();
    evolve_ensemble(&mut ens, DriftSource::Zero, 0.05, 100).unwrap();
    assert!(ens.positions().iter().all(|x| (-1.0..=1.0).contains(x)));
}

#[test]
fn masked_drift_is_filled_from_nearest_node() {
    let grid = Grid::new(0.0, 1.0, 16).unwrap();
    let mut mask = vec![false; 16];
    mask[5] = true;
    mask[9] = true;
    let mut values = vec![f64::NAN; 16];
    values[5] = 1.0;
    values[9] = 3.0;
    let t = DriftTable::from_field(&FieldOnGrid::new(grid, values, mask)).unwrap();
    assert_eq!(t.at(0.0), 1.0);
    assert_eq!(t.at(7.0), 1.0);
    assert_eq!(t.at(8.0), 3.0);
    assert_eq!(t.at(15.0), 3.0);
    assert_eq!(t.at(4.5), 1.0);
    assert!(DriftTable::from_field(&FieldOnGrid::new(grid, vec![0.0; 16], vec![false; 16])).is_err());
}

#[test]
fn kde_of_a_point_is_the_kernel() {
    let grid = Grid::centered(0.0, 0.02, 201).unwrap();
    let rho = density_estimate(&[0.0f64; 10], grid, 0.1).unwrap();
    let peak = rho.values.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert_eq!(peak, 100);
    assert_relative_eq!(rho.values.iter().sum::<f64>() * grid.dx, 1.0, max_relative = 1e-12);
    let kernel = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
    assert_relative_eq!(rho.values[100], kernel, max_relative = 1e-6);
}

#[test]
fn kde_of_gaussian_samples() {
    let grid = Grid::centered(0.0, 0.02, 801).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let rho = density_estimate(&xs, grid, 0.1).unwrap();
    let exact: Vec<f64> = grid.xs().map(|x| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).collect();
    assert!(l1_distance(&rho.values, &exact, grid.dx) <= 0.02);
    let far = density_estimate(&[100.0, -3.0], grid, 0.1).unwrap();
    assert_relative_eq!(far.values.iter().sum::<f64>() * grid.dx, 1.0, max_relative = 1e-12);
    assert!(matches!(density_estimate(&xs, grid, 0.01), Err(SimError::BandwidthTooSmall { .. })));
}

#[test]
fn brownian_step_law() {
    let rows = brownian_scaling_check(natural(), &[0.01, 0.04], 100_000, 11).unwrap();
    assert!((rows[0].rms_step / 0.1 - 1.0).abs() <= 0.02);
    assert!((rows[1].rms_step / rows[0].rms_step / 2.0 - 1.0).abs() <= 0.03);
    let doubled = brownian_scaling_check(SimUnits::new(2.0, 1.0).unwrap(), &[0.01], 100_000, 12).unwrap();
    assert!((doubled[0].rms_step / rows[0].rms_step / 2f64.sqrt() - 1.0).abs() <= 0.03);
    assert!(brownian_csv(&rows).starts_with("dt,mean,variance,std_error,rms_step,prediction,ratio\n"));
}

fn frames(mut psi: WavefunctionGrid<f64>, v: &FieldOnGrid<f64>, dt: f64, n: usize) -> Vec<WavefunctionGrid<f64>> {
    let mut prop = CnPropagator::new(&psi, v, dt).unwrap();
    let mut out = vec![psi.clone()];
    for _ in 1..n {
        prop.step(&mut psi).unwrap();
        out.push(psi.clone());
    }
    out
}

#[test]
fn hj_residual_of_harmonic_ground_state() {
    let psi = harmonic_psi(0.02, 1024);
    let v = harmonic_potential(psi.grid, natural(), 1.0, 0.0);
    let r = hj_residual(&frames(psi, &v, 1e-4, 5), &v).unwrap();
    assert_eq!(r.consistent(), VqSign::Printed);
    assert!(r.printed <= 1e-3);
    assert!(r.reversed >= 1.0);
    assert!(hj_csv(&r).contains("printed,"));
}

#[test]
fn hj_residual_of_free_packet() {
    let psi = free_psi(0.02, 2048, 0.0);
    let v = FieldOnGrid::zeros(psi.grid);
    let r = hj_residual(&frames(psi, &v, 1e-4, 3), &v).unwrap();
    assert_eq!(r.consistent(), VqSign::Printed);
    assert!(r.printed <= 1e-2);
    assert!(r.separation() >= 10.0);
}

#[test]
fn constant_potential_shift_moves_residual_uniformly() {
    let psi = harmonic_psi(0.02, 1024);
    let v = harmonic_potential(psi.grid, natural(), 1.0, 0.0);
    let f = frames(psi, &v, 1e-4, 3);
    let c0 = 0.75;
    let shifted = FieldOnGrid::full(v.grid, v.values.iter().map(|x| x + c0).collect());
    let (a, _) = hj_residual_fields(&f[0], &f[1], &f[2], &v);
    let (b, _) = hj_residual_fields(&f[0], &f[1], &f[2], &shifted);
    for j in 0..a.grid.n {
        if a.mask[j] {
            assert!((b.values[j] - a.values[j] - c0).abs() < 1e-12);
        }
    }
}

#[test]
fn hj_residual_preconditions() {
    let psi = harmonic_psi(0.05, 256);
    let v = harmonic_potential(psi.grid, natural(), 1.0, 0.0);
    let f = frames(psi, &v, 1e-3, 3);
    assert!(matches!(hj_residual(&f[..2], &v), Err(SimError::TooFewFrames(2))));
    let mut uneven = f.clone();
    uneven[2].time = 0.5;
    assert!(matches!(hj_residual(&uneven, &v), Err(SimError::NonUniformFrames)));
}

#[test]
fn small_ensemble_degrades_gracefully() {
    let sc = Scenario { n_paths: 10, n_steps: 200, sample_every: 100, ..Scenario::harmonic() };
    let out = run_scenario::<f64>(&sc).unwrap();
    let l1 = out.max_l1();
    assert!(l1.is_finite() && l1 > 0.1);
    assert_eq!(out.samples.len(), 3);
    assert!(consistency_csv(&out.samples).starts_with("t,x_mean,x_var,l1_discrepancy\n"));
    assert_eq!(fields_csv(&out.final_psi).lines().next(), Some("x,rho,S,Vq,b"));
}

#[test]
fn scenario_validation() {
    let bad_dt = Scenario { dt: 1e-3, ..Scenario::harmonic() };
    assert!(matches!(bad_dt.validate(), Err(SimError::DtGuard { .. })));
    assert!(Scenario { n_paths: 0, ..Scenario::free() }.validate().is_err());
    assert!(Scenario { bandwidth: 0.001, ..Scenario::free() }.validate().is_err());
    assert!(SimError::DtGuard { dt: 1.0, limit: 0.1 }.is_config());
    assert!(!SimError::BoundaryContamination { time: 0.0, edge_fraction: 1.0 }.is_config());
}

#[test]
fn csv_values_have_nine_significant_digits() {
    assert_eq!(sci9(1.0 / 3.0), "3.33333333e-1");
    assert_eq!(sci9(-2.0), "-2.00000000e0");
}

#[test]
fn works_in_single_precision() {
    let grid = Grid::<f32>::centered(0.0, 0.05, 401).unwrap();
    let rho = FieldOnGrid::from_fn(grid, |x: f32| (-x * x).exp());
    let vq = quantum_potential(&rho, SimUnits::natural());
    assert!((vq.values[200] + 0.5).abs() < 1e-2);
}
