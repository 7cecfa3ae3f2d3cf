mod common;

use common::wishart_state;
use fock_filter::fock::{make_state, trace_distance, Cutoff, DensityMatrix, StateSpec};
use fock_filter::tomography::{
    displaced_distribution, kernel_a, phase_fourier, reconstruct, reconstruct_with_sign, simulate_scan, Backend,
    FourierSign, TomographyPlan,
};
use fock_filter::Exec;
use num_complex::Complex64;
use proptest::prelude::*;

fn coherent_one_truncated(m_max: usize) -> DensityMatrix {
    make_state(&StateSpec::Coherent { re: 1.0, im: 0.0 }, Cutoff::Truncate(m_max)).unwrap()
}

#[test]
fn first_diagonal_fourier_component_of_coherent_state() {
    let nu = make_state(&StateSpec::Coherent { re: 1.0, im: 0.0 }, Cutoff::default()).unwrap();
    let n_rows = 12;
    let plan = TomographyPlan::new(1.0, 5).with_phase_count(16).with_rows(n_rows);
    let scan = simulate_scan(&nu, &plan, Exec::default()).unwrap();
    let p1 = phase_fourier(&scan.probabilities, &scan.phases, 1).unwrap();
    let g = Complex64::new(1.0, 0.0);
    for (n, &got) in p1.iter().enumerate().take(n_rows) {
        let want: Complex64 = (0..nu.dim() - 1).map(|m| kernel_a(m + 1, m, n, g) * nu.get(m + 1, m)).sum();
        assert!((got - want).norm() <= 1e-10, "n={n}");
    }
}

#[test]
fn coherent_round_trip() {
    let nu = coherent_one_truncated(5);
    let plan = TomographyPlan::new(1.0, 5).with_phase_count(16).with_rows(12);
    let scan = simulate_scan(&nu, &plan, Exec::default()).unwrap();
    let rec = reconstruct(&plan, &scan, Exec::default()).unwrap();
    assert!(!rec.flagged());
    assert_eq!(rec.nu_hat.max_hermitian_defect(), 0.0);
    assert!(trace_distance(&rec.nu_hat, &nu) <= 1e-6);
}

#[test]
fn flipped_fourier_sign_breaks_round_trip() {
    // a real ν is blind to the sign (it reconstructs ν* = ν), so rotate β off the real axis
    let b = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let nu = make_state(&StateSpec::coherent(b), Cutoff::Truncate(5)).unwrap();
    let plan = TomographyPlan::new(1.0, 5).with_phase_count(16).with_rows(12);
    let scan = simulate_scan(&nu, &plan, Exec::default()).unwrap();
    let good = reconstruct_with_sign(&plan, &scan, FourierSign::Plus, Exec::default()).unwrap();
    assert!(trace_distance(&good.nu_hat, &nu) <= 1e-6);
    let bad = reconstruct_with_sign(&plan, &scan, FourierSign::Minus, Exec::default()).unwrap();
    assert!(trace_distance(&bad.nu_hat, &nu) > 0.5);
}

#[test]
fn vacuum_reconstructs_exactly() {
    let nu = DensityMatrix::number(0, 3).unwrap();
    let plan = TomographyPlan::new(1.0, 2);
    let rec = reconstruct(&plan, &simulate_scan(&nu, &plan, Exec::default()).unwrap(), Exec::default()).unwrap();
    assert!((rec.nu_hat.get(0, 0).re - 1.0).abs() <= 1e-6);
    for n in 0..3 {
        for m in 0..3 {
            if (n, m) != (0, 0) {
                assert!(rec.nu_hat.get(n, m).norm() <= 1e-6);
            }
        }
    }
}

fn random_state(max_dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (2usize..=max_dim).prop_flat_map(|dim| {
        prop::collection::vec(-1.0..1.0f64, 2 * dim * dim).prop_map(move |raw| wishart_state(&raw, dim))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_consistency(nu in random_state(7), amp in 0.0..2.0f64, arg in 0.0..(2.0 * std::f64::consts::PI)) {
        let g = Complex64::from_polar(amp, arg);
        let n_rows = 12;
        let p = displaced_distribution(&nu, g, n_rows, &Backend::ExactProbabilities, Exec::Sequential).unwrap();
        for n in 0..n_rows {
            let mut want = Complex64::new(0.0, 0.0);
            for k in 0..nu.dim() {
                for m in 0..nu.dim() {
                    want += nu.get(k, m) * kernel_a(k, m, n, g);
                }
            }
            prop_assert!((p.values[n] - want.re).abs() <= 1e-9);
            prop_assert!(want.im.abs() <= 1e-9);
        }
    }

    #[test]
    fn kernel_phase_law(k in 0usize..8, m in 0usize..8, n in 0usize..14, amp in 0.1..2.0f64, phi in -7.0..7.0f64) {
        let rotated = kernel_a(k, m, n, Complex64::from_polar(amp, phi));
        let base = kernel_a(k, m, n, Complex64::new(amp, 0.0));
        let phase = Complex64::from_polar(1.0, (m as f64 - k as f64) * phi);
        prop_assert!((rotated - base * phase).norm() <= 1e-10);
    }

    #[test]
    fn round_trip_below_cutoff(nu in random_state(7), amp in 0.6..1.6f64) {
        let plan = TomographyPlan::new(amp, nu.dim() - 1);
        let scan = simulate_scan(&nu, &plan, Exec::default()).unwrap();
        let rec = reconstruct(&plan, &scan, Exec::default()).unwrap();
        prop_assert_eq!(rec.nu_hat.max_hermitian_defect(), 0.0);
        prop_assert!(trace_distance(&rec.nu_hat, &nu) <= 1e-6);
    }
}
