use bvlasov_core::diagnostics::*;
use bvlasov_core::*;

fn small_coupled() -> ScenarioConfig {
    let mut cfg = presets::coupled(48, 0.05).unwrap();
    cfg.grid = cfg.grid.with_t_end(0.5).unwrap();
    cfg.output.interval = Some(0.05);
    cfg
}

#[test]
fn zero_data_stays_zero_and_every_check_passes() {
    let cfg = presets::zero().unwrap();
    let traj = run(&cfg).unwrap();
    for s in &traj.snapshots {
        assert!(s.u.values.iter().all(|&u| u == 0.0));
        assert!(s.moments.rho.iter().all(|&r| r == 0.0));
    }
    assert_eq!(traj.dissipation, 0.0);
    let rep = evaluate(&cfg.name, &traj, &ReportOptions::new(cfg.m0)).unwrap();
    assert!(rep.passed(), "{:#?}", rep.records);
}

#[test]
fn coupled_run_is_bitwise_reproducible() {
    let cfg = small_coupled();
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coupled_report_passes_the_invariant_checks() {
    let mut cfg = small_coupled();
    cfg.output.interval = None;
    let traj = run(&cfg).unwrap();
    let rep = evaluate(&cfg.name, &traj, &ReportOptions::new(cfg.measured_m0())).unwrap();
    for name in [
        "mass",
        "kinetic_energy",
        "max_abs_u_minus_psi",
        "max_abs_u",
        "max_principle_monotone",
    ] {
        let r = rep.record(name).unwrap_or_else(|| panic!("missing {name}"));
        assert!(!r.failed(), "{r:?}");
    }
    assert!(rep.record("weak_residual_vlasov").is_some());
    assert_eq!(rep.nx, 48);
}

#[test]
fn snapshots_land_on_the_output_times() {
    let cfg = small_coupled();
    let traj = run(&cfg).unwrap();
    let times = traj.times();
    assert_eq!(times.len(), 11);
    for (k, t) in times.iter().enumerate() {
        assert!((t - 0.05 * k as f64).abs() < 1e-12, "{t}");
    }
}

#[test]
fn constant_flow_oracle_conserves_mass_to_quadrature_accuracy() {
    let g = GridSpec::new((-4.0, 4.0), (-3.0, 3.0), 96, 96, 1.0, 1.0, 0.5).unwrap();
    let f0 = |x: f64, v: f64| (-(x * x) - 4.0 * v * v).exp();
    let states = (0..=5)
        .map(|k| {
            let t = 0.2 * k as f64;
            let mut u = FluidField::constant(&g, -0.4);
            u.time = t;
            (u, exact_const_u(f0, -0.4, t, &g))
        })
        .collect();
    let traj = Trajectory::from_states(&g, 1.0, states).unwrap();
    let rec = check_mass(&traj, 1e-6);
    assert!(!rec.failed(), "{rec:?}");
}

#[test]
fn numerical_transport_tracks_the_constant_flow_oracle() {
    let g = GridSpec::new((-4.0, 4.0), (-3.0, 3.0), 128, 128, 1.0, 0.5, 0.5).unwrap();
    let f0 = |x: f64, v: f64| (-(x * x) / 0.5 - (v * v) / 0.3).exp();
    let u = FluidField::constant(&g, 0.5);
    let steps = 40;
    let dt = g.t_end() / steps as f64;
    let mut f = KineticField::from_fn(&g, f0);
    for _ in 0..steps {
        f = vlasov_step(&f, &u, dt, &g);
    }
    let exact = exact_const_u(f0, 0.5, g.t_end(), &g);
    let err = (&f.values - &exact.values).mapv(f64::abs).sum() * g.dx() * g.dv();
    let scale = exact.mass(&g);
    assert!(err < 0.1 * scale, "err {err}, mass {scale}");
}

#[test]
fn shock_is_captured_at_the_rankine_hugoniot_position() {
    let cfg = presets::riemann_pure_fluid(1.0, 0.0, 256, 0.01).unwrap();
    let traj = run(&cfg).unwrap();
    let rec = check_shock_location(&traj, 1.0, 0.0, 0.0);
    assert!(!rec.failed(), "{rec:?}");
}

#[test]
fn picard_agrees_with_the_time_stepper_on_a_short_window() {
    let mut cfg = presets::smooth(0.02).unwrap();
    cfg.grid = cfg.grid.with_resolution(48, 48).unwrap();
    let g = &cfg.grid;
    let p = cfg.initial.profiles(g);
    let (u0, f0) = mollified_initial_data(&*p.u0, &*p.f0, g.epsilon(), g).unwrap();
    let sol = picard_solve(&u0, &f0, g, g.t_end(), 1e-10, 40).unwrap();
    assert!(sol.converged);
    assert!(sol.final_ratio().unwrap() < 1.0);
    let traj = run(&cfg).unwrap();
    let d = l1_distance(&sol.u, &traj.final_snapshot().u, g).unwrap();
    assert!(d < 0.05, "{d}");
}

#[test]
fn coarse_snapshot_cadence_is_rejected_by_the_weak_form() {
    let cfg = small_coupled();
    let traj = run(&cfg).unwrap();
    let err = evaluate(&cfg.name, &traj, &ReportOptions::new(cfg.m0)).unwrap_err();
    assert!(matches!(err, Error::InvalidTestFunction(_)), "{err}");
}

#[test]
fn sweep_rejects_malformed_epsilon_lists() {
    let cfg = presets::riemann_particles().unwrap();
    let err = epsilon_sweep(&cfg, &[0.04]).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
    let err = epsilon_sweep(&cfg, &[0.01, 0.02]).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn time_series_csv_has_one_row_per_step() {
    let cfg = presets::zero().unwrap();
    let traj = run(&cfg).unwrap();
    let rep = evaluate(&cfg.name, &traj, &ReportOptions::new(cfg.m0)).unwrap();
    let csv = time_series_csv(&traj.steps);
    assert!(csv
        .starts_with("step,t,dt,mass,kinetic_energy,max_abs_u,max_abs_u_minus_psi,dissipation\n"));
    assert_eq!(csv.lines().count(), traj.steps.len() + 1);
    assert_eq!(rep.scenario, "zero");
}
