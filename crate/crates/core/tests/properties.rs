//! Property tests for the algebraic invariants of the toolkit.

use bo_spectral::birkhoff::{evolve_linear, evolve_star, phi, BirkhoffCoords};
use bo_spectral::fourier::io::{field_from_csv, field_from_json, field_to_csv, field_to_json};
use bo_spectral::fourier::{
    antiderivative, derivative, exp_field, hilbert, multiply, multiply_full, seq_norm, szego, ComplexField, RealField,
};
use bo_spectral::lax::spectral_data;
use bo_spectral::solver::{evolve, SolverConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn coeffs(max_bw: usize, amp: f64) -> impl Strategy<Value = ComplexField> {
    (1..=max_bw).prop_flat_map(move |bw| {
        prop::collection::vec((-amp..amp, -amp..amp), 2 * bw + 1).prop_map(move |v| {
            ComplexField::from_coeffs(bw, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

fn real_field(max_bw: usize, amp: f64) -> impl Strategy<Value = RealField> {
    prop::collection::vec((-amp..amp, -amp..amp), 1..=max_bw).prop_map(|v| {
        RealField::from_positive_modes(&v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()).unwrap()
    })
}

fn max_diff(a: &ComplexField, b: &ComplexField) -> f64 {
    let bw = a.bandwidth().max(b.bandwidth());
    a.with_bandwidth(bw).sub(&b.with_bandwidth(bw)).max_abs()
}

fn without_mean(f: &ComplexField) -> ComplexField {
    let mut g = f.clone();
    g.set(0, Complex64::new(0.0, 0.0));
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn szego_projection_is_idempotent(f in coeffs(24, 1.0)) {
        let once = szego(&f).to_field();
        prop_assert!(max_diff(&szego(&once).to_field(), &once) == 0.0);
    }

    #[test]
    fn hilbert_squares_to_minus_identity_off_the_mean(f in coeffs(24, 1.0)) {
        let hh = hilbert(&hilbert(&f));
        prop_assert!(max_diff(&hh, &without_mean(&f).scale(Complex64::new(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn derivative_inverts_antiderivative(f in coeffs(24, 1.0)) {
        prop_assert!(max_diff(&derivative(&antiderivative(&f)), &without_mean(&f)) < 1e-13);
    }

    #[test]
    fn product_matches_direct_convolution(f in coeffs(12, 1.0), g in coeffs(12, 1.0)) {
        let full = multiply_full(&f, &g);
        let bw = f.bandwidth() + g.bandwidth();
        let direct = ComplexField::from_fn(bw, |k| {
            f.modes().map(|(j, a)| a * g.coeff(k - j)).sum()
        });
        prop_assert!(max_diff(&full, &direct) < 1e-12);
        let cut = multiply(&f, &g, 3);
        prop_assert!(max_diff(&cut, &direct.with_bandwidth(3)) < 1e-12);
    }

    #[test]
    fn exponential_inverts(f in coeffs(8, 0.15)) {
        let p = exp_field(&f).unwrap();
        let m = exp_field(&f.scale(Complex64::new(-1.0, 0.0))).unwrap();
        let one = multiply_full(&p, &m);
        prop_assert!(max_diff(&one, &ComplexField::constant(Complex64::new(1.0, 0.0))) < 1e-10);
    }

    #[test]
    fn csv_and_json_round_trip(f in coeffs(16, 1e3)) {
        prop_assert_eq!(field_from_csv(&field_to_csv(&f, Some("abc"))).unwrap(), f.clone());
        prop_assert_eq!(field_from_json(&field_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn coordinate_flows_are_isometries(v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..32), t in -10.0..10.0f64) {
        let z = BirkhoffCoords::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(), 1.0, None);
        for w in [evolve_linear(&z, t), evolve_star(&z, t)] {
            for n in 1..=z.trusted() {
                prop_assert!((w.get(n).norm() - z.get(n).norm()).abs() < 1e-14);
            }
            prop_assert!((seq_norm(w.zeta(), 0.5) - seq_norm(z.zeta(), 0.5)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectrum_is_ordered_and_actions_match_gaps(u in real_field(6, 0.3)) {
        let data = spectral_data(&u, 64).unwrap();
        let z = phi(&data);
        for n in 1..=data.trusted() {
            prop_assert!(data.gamma(n) >= 0.0);
            prop_assert!((data.lambda(n) - data.lambda(n - 1) - 1.0 - data.gamma(n)).abs() < 1e-12);
            prop_assert!((z.get(n).norm_sqr() - data.gamma(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn flow_conserves_mass_and_reality(u in real_field(4, 0.3)) {
        let cfg = SolverConfig { bandwidth: 32, dt: 5e-4, t_final: 0.2, sample_times: vec![0.2] };
        let traj = evolve(&u, &cfg).unwrap();
        let v = traj.final_state().unwrap();
        // RK4 is not norm-preserving; the drift is O(dt^4).
        let drift = (v.mean_square() - u.mean_square()).abs();
        prop_assert!(drift < 1e-10 * (1.0 + u.mean_square()), "drift {drift:e}");
        prop_assert_eq!(v.coeff(0), Complex64::new(0.0, 0.0));
    }
}
