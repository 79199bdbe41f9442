use etc_lab_core::hybrid_sim::HybridState;
use etc_lab_core::systems::{lorenz_default, WithGamma};
use etc_lab_core::trigger::{self, in_flow, in_jump, zeta_time, ZetaParams};
use etc_lab_core::{masp, TriggerConfig};
use proptest::prelude::*;

/// `∫_θ^{1/θ} dζ / (2Lζ + λ(ζ² + 1))` by composite Simpson in `s = ln ζ`.
fn transit_quadrature(gamma: f64, l: f64, theta: f64, eta: f64) -> f64 {
    let lambda = (gamma * gamma + eta).sqrt();
    let (a, b) = (theta.ln(), (1.0 / theta).ln());
    let n = 200_000;
    let h = (b - a) / n as f64;
    let f = |s: f64| {
        let z = s.exp();
        z / (2.0 * l * z + lambda * (z * z + 1.0))
    };
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn masp_values() {
    assert!((masp(17.3495, 4.1231).unwrap() - 0.0790).abs() < 5e-4);
    assert!((masp(89.9666, 4.0).unwrap() - 0.017).abs() < 5e-4);
    for l in [0.5, 2.0, 4.1231] {
        assert_eq!(masp(l, l).unwrap(), 1.0 / l);
    }
    assert!((masp(2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(masp(0.0, 1.0).unwrap().is_infinite());
    assert!(masp(0.0, 0.0).is_err());
    assert!((masp(4.0, 0.0).unwrap() - std::f64::consts::FRAC_PI_2 / 4.0).abs() < 1e-15);
}

#[test]
fn masp_matches_transit_quadrature_in_each_branch() {
    // γ > L, γ = L, γ < L
    for (gamma, l) in [(17.3495, 4.1231), (2.0, 2.0), (0.7, 3.0)] {
        let q = transit_quadrature(gamma, l, 1e-4, 1e-6);
        let m = masp(gamma, l).unwrap();
        assert!((q - m).abs() < 1e-3 * m.max(1.0), "quadrature {q} vs masp {m}");
    }
}

#[test]
fn zeta_time_matches_quadrature() {
    for (gamma, l, theta, eta) in [
        (17.3495, 4.1231, 0.1, 0.1),
        (2.0, 2.0, 0.5, 0.01),
        (0.7, 3.0, 0.05, 0.3),
    ] {
        let zp = ZetaParams::new(theta, eta, gamma).unwrap();
        let t = zeta_time(gamma, l, &zp, 1e-5).unwrap();
        let q = transit_quadrature(gamma, l, theta, eta);
        assert!((t - q).abs() < 1e-6 * q.max(1.0), "{t} vs {q}");
    }
}

#[test]
fn zeta_time_approaches_masp() {
    for (gamma, l) in [(17.3495, 4.1231), (2.0, 2.0), (0.7, 3.0)] {
        let zp = ZetaParams::new(1e-4, 1e-6, gamma).unwrap();
        let t = zeta_time(gamma, l, &zp, 1e-5).unwrap();
        let m = masp(gamma, l).unwrap();
        assert!((t - m).abs() < 1e-3, "{t} vs {m}");
        assert!(t < m);
    }
}

#[test]
fn zeta_time_decreases_in_theta_and_eta() {
    let (gamma, l) = (17.3495, 4.1231);
    let thetas = [0.01, 0.1, 0.5];
    let etas = [0.001, 1.0, 50.0];
    let t = |th: f64, et: f64| zeta_time(gamma, l, &ZetaParams::new(th, et, gamma).unwrap(), 1e-5).unwrap();
    for &et in &etas {
        for w in thetas.windows(2) {
            assert!(t(w[1], et) < t(w[0], et));
        }
    }
    for &th in &thetas {
        for w in etas.windows(2) {
            assert!(t(th, w[1]) < t(th, w[0]));
        }
    }
}

proptest! {
    #[test]
    fn masp_decreases_in_gamma(g1 in 0.01f64..100.0, dg in 1e-3f64..10.0, l in 0.0f64..20.0) {
        let a = masp(g1, l).unwrap();
        let b = masp(g1 + dg, l).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn masp_decreases_in_l(g in 0.01f64..100.0, l1 in 0.0f64..20.0, dl in 1e-3f64..10.0) {
        let a = masp(g, l1).unwrap();
        let b = masp(g, l1 + dl).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn masp_is_continuous_across_the_seam(l in 0.1f64..20.0, rel in 1e-9f64..1e-6) {
        let at = masp(l, l).unwrap();
        let above = masp(l * (1.0 + rel), l).unwrap();
        let below = masp(l * (1.0 - rel), l).unwrap();
        prop_assert!((above - at).abs() < 1e-4 * at);
        prop_assert!((below - at).abs() < 1e-4 * at);
    }

    #[test]
    fn flow_and_jump_sets_cover_the_state_space(
        x in prop::array::uniform3(-50.0f64..50.0),
        e in -50.0f64..50.0,
        tau in 0.0f64..0.2,
        mode in 0usize..2,
    ) {
        let (sys, cert) = lorenz_default();
        let cfg = if mode == 0 { TriggerConfig::output_feedback(0.01) } else { TriggerConfig::periodic(0.01) };
        let q = HybridState::new(x.to_vec(), vec![e], tau);
        let c = in_flow(&sys, &cert, &cfg, &q).unwrap();
        let d = in_jump(&sys, &cert, &cfg, &q).unwrap();
        prop_assert!(c || d);
        if tau < 0.01 {
            prop_assert!(c && !d);
        }
    }
}

#[test]
fn dwell_above_bound_is_rejected() {
    let (sys, cert) = lorenz_default();
    let bound = masp(cert_gamma(&cert), 0.0).unwrap();
    let err = TriggerConfig::output_feedback(bound * 1.01)
        .validate(&sys, &cert)
        .unwrap_err();
    assert!(err.to_string().contains("dwell time exceeds MASP"));
    let big = WithGamma {
        inner: &cert,
        gamma: 100.0,
    };
    assert!(TriggerConfig::output_feedback(0.02).validate(&sys, &big).is_err());
    assert!(TriggerConfig::output_feedback(0.01).validate(&sys, &big).is_ok());
    // state-feedback modes need y = x
    assert!(TriggerConfig::state_feedback(0.01, 0.5).validate(&sys, &cert).is_err());
    assert!(matches!(
        TriggerConfig::output_feedback(0.0).validate(&sys, &cert),
        Err(trigger::TriggerError::Config(_))
    ));
}

fn cert_gamma(c: &dyn etc_lab_core::Certificate) -> f64 {
    c.gamma()
}
