use ionlink::physics::contrast_timebin;
use ionlink::planner::{
    compose_error_budget, cooling_levels, predict_fidelity, sweep_tau, sweep_window, tune_tau, BoundKind,
    ErrorBudgetEntry,
};
use ionlink::{RunConfig, TrapMode};

#[test]
fn reference_prediction_brackets_measurement() {
    let cfg = RunConfig::reference_defaults();
    let p = predict_fidelity(&cfg.nodes, &cfg.protocol, &cfg.budget).unwrap();
    assert!(p.fidelity > 0.97 && p.fidelity < 0.98, "{}", p.fidelity);
    let sum: f64 = p.terms.iter().map(|t| t.fidelity_error).sum();
    assert!((sum - p.total_error).abs() < 1e-15);
    assert!(p.terms.iter().any(|t| t.label.contains("10 ns") && t.from_model));
}

#[test]
fn sub_doppler_cooling_reaches_three_nines_regime() {
    let cfg = RunConfig::reference_defaults();
    let mut nodes = cfg.nodes.clone();
    for n in &mut nodes {
        for m in &mut n.modes {
            m.nbar = 0.5;
        }
    }
    let budget = [ErrorBudgetEntry {
        label: "SPAM".into(),
        fidelity_error: 1e-3,
        bound: BoundKind::Measured,
        model_term: None,
    }];
    let p = predict_fidelity(&nodes, &cfg.protocol, &budget).unwrap();
    assert!(p.fidelity > 0.995, "{}", p.fidelity);
}

#[test]
fn tau_sweep_peaks_at_tuned_separation() {
    let cfg = RunConfig::reference_defaults();
    let levels = cooling_levels(&cfg.nodes, &cfg.doppler).unwrap();
    assert_eq!(levels.len(), 3);
    let curves = sweep_tau(&levels, (5000e-9, 7000e-9), 1e-9).unwrap();
    for c in &curves {
        let (i, _) = c.y.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        assert!((c.x[i] - 6048.0).abs() <= 2.0, "{}: {}", c.label, c.x[i]);
        assert_eq!(c.y[i], 1.0);
    }
    let raw = |modes: &[TrapMode], t: f64| contrast_timebin(modes, t).0;
    for k in 0..50 {
        let t = 5000e-9 + 40e-9 * k as f64;
        assert!(raw(&levels[2].modes, t) >= raw(&levels[0].modes, t));
        assert!(raw(&levels[2].modes, t) >= raw(&levels[1].modes, t));
    }
    let again = sweep_tau(&levels, (5000e-9, 7000e-9), 1e-9).unwrap();
    assert_eq!(curves, again);
}

#[test]
fn window_sweep_band_contains_nominal() {
    let cfg = RunConfig::reference_defaults();
    let dts: Vec<f64> = (1..=50).map(|k| k as f64 * 1e-9).collect();
    let s = sweep_window(&cfg.nodes, &dts, 3.0, &cfg.bell_state).unwrap();
    for r in &s.rows {
        assert!(r.fidelity_lo <= r.fidelity_rel && r.fidelity_rel <= r.fidelity_hi);
    }
    assert!(s.rows.windows(2).all(|w| w[1].fidelity_rel <= w[0].fidelity_rel));
    assert!(s.rows.windows(2).all(|w| w[1].yield_y >= w[0].yield_y));
    assert!(sweep_window(&cfg.nodes, &[2e-9, 1e-9], 0.0, &cfg.bell_state).is_err());
}

#[test]
fn tuning_and_budget() {
    let cfg = RunConfig::reference_defaults();
    let t = tune_tau(&cfg.all_modes(), (5000e-9, 7000e-9), 1e-9).unwrap();
    assert!((t.tau_s - 6048e-9).abs() <= 2e-9);
    let b = compose_error_budget(&cfg.budget).unwrap();
    assert_eq!(b.total_rounded, 0.02);
    assert!(b.render_text().contains("Micromotion"));
}
