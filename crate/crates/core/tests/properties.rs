use num_complex::Complex;
use proptest::prelude::*;

use quantum_work::charfunc::{char_mode, char_total, InitialState};
use quantum_work::oracle::{oracle_distribution, OracleConfig};
use quantum_work::protocol::{compute_functionals, DriveProtocol, FrequencyProfile, ModeSpec, QuadratureConfig, Switching};
use quantum_work::workdist::{dist_number, weights_number, WeightMethod, DEFAULT_EPS};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn state_strategy() -> impl Strategy<Value = InitialState<f64>> {
    prop_oneof![
        (0u32..6).prop_map(|n| InitialState::Number { n }),
        (0.2f64..5.0).prop_map(|beta| InitialState::Thermal { beta }),
        (0.0f64..2.0, 0.0f64..6.3).prop_map(|(r, p)| InitialState::Coherent {
            amplitude: Complex::from_polar(r, p)
        }),
    ]
}

fn scenario() -> impl Strategy<Value = (ModeSpec<f64>, DriveProtocol<f64>, f64)> {
    (0.6f64..1.6, 0.6f64..1.6, 0.05f64..0.6, 0.0f64..6.3, 1.0f64..5.0, 0.2f64..1.6, 0usize..3).prop_map(
        |(w0, w1, f, phase, tau, frac, kind)| {
            let profile = if kind == 0 {
                FrequencyProfile::Constant { omega: w0 }
            } else {
                FrequencyProfile::TanhRamp {
                    start: w0,
                    end: w1,
                    center: tau / 2.0,
                    width: tau / 5.0,
                }
            };
            let switching = match kind {
                0 => Switching::RaisedCosine { amplitude: 1.0 },
                1 => Switching::Gaussian {
                    amplitude: 1.0,
                    center: None,
                    width: tau / 6.0,
                },
                _ => Switching::Constant { amplitude: 0.7 },
            };
            let mode = ModeSpec::new("m", profile, Complex::from_polar(f, phase)).unwrap();
            (mode, DriveProtocol::new(switching, tau).unwrap(), tau * frac)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characteristic_function_invariants((mode, protocol, t) in scenario(), state in state_strategy(), nu in -6.0f64..6.0) {
        let fun = compute_functionals(&mode, &protocol, t, &QuadratureConfig::default()).unwrap();
        let at0 = char_mode(&fun, &state, c(0.0, 0.0)).unwrap();
        prop_assert!((at0 - c(1.0, 0.0)).norm() <= 1e-12);
        let g = char_mode(&fun, &state, c(nu, 0.0)).unwrap();
        let g_neg = char_mode(&fun, &state, c(-nu, 0.0)).unwrap();
        prop_assert!((g_neg - g.conj()).norm() <= 1e-12);
        prop_assert!(g.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn switched_off_drive_freezes_weights((mode, protocol, _t) in scenario(), later in 0.0f64..3.0) {
        let after = |t: f64| compute_functionals(&mode, &protocol, t, &QuadratureConfig::default()).unwrap();
        // Strictly after τ: at τ itself a discontinuous switch may still be on.
        let (a, b) = (after(protocol.tau + 1e-6), after(protocol.tau + 1e-6 + later));
        let scale = a.rapidity.max(1.0);
        prop_assert!((a.rapidity - b.rapidity).abs() <= 1e-9 * scale);
    }

    #[test]
    fn weights_are_normalised(n in 0u32..8, z in 0.0f64..15.0) {
        let s_max = (n as f64 + z + 12.0 * (z * (2 * n + 1) as f64).sqrt() + 30.0) as i64;
        let q = weights_number(n, z, -(n as i64)..=s_max, WeightMethod::Auto).unwrap();
        let total: f64 = q.iter().map(|p| p.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        prop_assert!(q.iter().all(|p| p.1 >= 0.0));
    }

    #[test]
    fn distribution_matches_characteristic_function((mode, protocol, t) in scenario(), n in 0u32..5, nu in -3.0f64..3.0) {
        let fun = compute_functionals(&mode, &protocol, t, &QuadratureConfig::default()).unwrap();
        let d = dist_number(&fun, n, DEFAULT_EPS).unwrap();
        prop_assert!((d.total_weight() + d.mass_deficit - 1.0).abs() <= 1e-12);
        let g = char_mode(&fun, &InitialState::Number { n }, c(nu, 0.0)).unwrap();
        prop_assert!((d.char_value(c(nu, 0.0)) - g).norm() <= 2.0 * DEFAULT_EPS + 1e-11);
    }
}

#[test]
fn doubling_the_basis_leaves_the_oracle_unchanged() {
    let mode = ModeSpec::fixed("m", 1.0, c(0.3, 0.2)).unwrap();
    let protocol = DriveProtocol::new(Switching::RaisedCosine { amplitude: 1.0 }, 4.0).unwrap();
    let state = InitialState::Thermal { beta: 0.7 };
    let run = |dim| {
        let cfg = OracleConfig::<f64> {
            dim,
            ..Default::default()
        };
        oracle_distribution(&mode, &protocol, &state, 4.5, &cfg).unwrap()
    };
    let (small, large) = (run(64), run(128));
    for k in 0..25 {
        let nu = c(-3.0 + 0.25 * k as f64, 0.0);
        assert!((small.char_value(nu) - large.char_value(nu)).norm() < 1e-8);
    }
}

#[test]
fn total_characteristic_function_checks_lengths() {
    let fun = compute_functionals(
        &ModeSpec::fixed("m", 1.0, c(0.2, 0.0)).unwrap(),
        &DriveProtocol::off(),
        1.0,
        &QuadratureConfig::default(),
    )
    .unwrap();
    assert!(char_total(&[fun, fun], &[InitialState::Number { n: 0 }], c(0.5, 0.0)).is_err());
}
