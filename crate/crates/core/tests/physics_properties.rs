use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use ionlink::physics::{
    contrast_arrival, contrast_timebin, derive_beam_angles, doppler_nbar, recoil_params, window_stats,
    DopplerSettings,
};
use ionlink::{BeamGeometry, EmitterSpec, ModeAxis, NodeId, RunConfig, TrapMode};

const TAU_R: f64 = 7.85e-9;

fn mode(freq_hz: f64, eta: f64, zeta: f64, nbar: f64) -> TrapMode {
    TrapMode {
        node: NodeId::A,
        axis: ModeAxis::X,
        freq_hz,
        nbar,
        eta,
        zeta,
    }
}

#[test]
fn tabulated_beam_angles() {
    let a = derive_beam_angles(&BeamGeometry::new(45.0, 45.0).unwrap());
    assert_abs_diff_eq!(a.x.theta_deg, 120.0, epsilon = 1e-9);
    assert_abs_diff_eq!(a.x.psi_deg, 45.0, epsilon = 1e-9);
    assert_abs_diff_eq!(a.z.theta_deg, 135.0, epsilon = 1e-9);
    assert_abs_diff_eq!(a.z.psi_deg, 90.0, epsilon = 1e-9);
    let b = derive_beam_angles(&BeamGeometry::new(85.5, 45.0).unwrap());
    assert_abs_diff_eq!(b.y.theta_deg, 86.8, epsilon = 0.1);
    assert_abs_diff_eq!(b.y.psi_deg, 4.5, epsilon = 0.1);
}

#[test]
fn reference_config_modes_match_table() {
    let cfg = RunConfig::reference_defaults();
    let m = cfg.all_modes();
    let ax = m.iter().find(|m| m.node == NodeId::A && m.axis == ModeAxis::X).unwrap();
    assert_abs_diff_eq!(ax.eta, 0.086, epsilon = 0.002);
    assert_abs_diff_eq!(ax.zeta, 0.051, epsilon = 0.002);
    let bz = m.iter().find(|m| m.node == NodeId::B && m.axis == ModeAxis::Z).unwrap();
    assert_eq!(bz.zeta, 0.0);
}

#[test]
fn doppler_limit_at_tabulated_angles() {
    let g = 1.0 / TAU_R;
    let n = doppler_nbar(991.5e3, 135.0, g, 0.5 * g, 1.0).unwrap();
    assert_abs_diff_eq!(n, 13.0, epsilon = 1.0);
    let n = doppler_nbar(992.0e3, 86.8, g, 0.5 * g, 1.0).unwrap();
    assert_abs_diff_eq!(n, 826.0, epsilon = 10.0);
    assert!(doppler_nbar(1e6, 90.0, g, 0.5 * g, 1.0).is_err());
}

#[test]
fn arrival_penalty_at_ten_ns() {
    let cfg = RunConfig::reference_defaults();
    let ws = window_stats(10e-9, TAU_R);
    assert_abs_diff_eq!(ws.big_w, 0.190, epsilon = 0.002);
    let c = contrast_arrival(&cfg.all_modes(), TAU_R, ws.big_w);
    assert_abs_diff_eq!(c, 0.9954, epsilon = 3e-4);
}

proptest! {
    #[test]
    fn window_stats_are_monotone(a in 0.1f64..100.0, b in 0.1f64..100.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (s, t) = (window_stats(lo * 1e-9, TAU_R), window_stats(hi * 1e-9, TAU_R));
        prop_assert!(s.yield_y <= t.yield_y && s.big_w <= t.big_w);
        prop_assert!(t.yield_y < 1.0 && t.big_w < 1.0 && s.big_w > 0.0);
    }

    #[test]
    fn timebin_contrast_is_periodic(f in 0.2e6f64..2e6, eta in 0.0f64..0.2, nbar in 0.0f64..30.0, t in 0.0f64..10e-6) {
        let m = [mode(f, eta, 0.0, nbar)];
        let c0 = contrast_timebin(&m, t).0;
        let c1 = contrast_timebin(&m, t + 1.0 / f).0;
        prop_assert!((c0 - c1).abs() < 1e-9);
        prop_assert!(c0 > 0.0 && c0 <= 1.0);
    }

    #[test]
    fn contrast_falls_with_temperature(f in 0.2e6f64..2e6, eta in 0.0f64..0.2, n0 in 0.0f64..30.0, dn in 0.0f64..30.0, t in 0.0f64..10e-6) {
        let cold = contrast_timebin(&[mode(f, eta, 0.1, n0)], t).0;
        let hot = contrast_timebin(&[mode(f, eta, 0.1, n0 + dn)], t).0;
        prop_assert!(hot <= cold + 1e-15);
        let w = window_stats(10e-9, TAU_R).big_w;
        let cold = contrast_arrival(&[mode(f, eta, 0.1, n0)], TAU_R, w);
        let hot = contrast_arrival(&[mode(f, eta, 0.1, n0 + dn)], TAU_R, w);
        prop_assert!(hot <= cold + 1e-15);
    }

    #[test]
    fn recoil_scales_as_inverse_root_frequency(f in 0.1e6f64..3e6, alpha in 1.0f64..89.0) {
        let e = EmitterSpec::barium138();
        let angles = derive_beam_angles(&BeamGeometry::new(alpha, 45.0).unwrap()).axis(ModeAxis::X);
        let a = recoil_params(f, angles, &e).unwrap();
        let b = recoil_params(4.0 * f, angles, &e).unwrap();
        prop_assert!((a.eta - 2.0 * b.eta).abs() < 1e-12);
        prop_assert!((a.zeta - 2.0 * b.zeta).abs() < 1e-12);
    }

    #[test]
    fn doppler_limit_exceeds_optimal_projection(f in 0.1e6f64..3e6, theta in 0.0f64..80.0) {
        let d = DopplerSettings::default();
        let g = EmitterSpec::barium138().gamma();
        let n = d.nbar(f, theta, g).unwrap();
        let iso = d.isotropic_part(f, g).unwrap();
        prop_assert!(n >= iso * 4.0 / 3.0 * (1.0 - 1e-12));
    }
}
