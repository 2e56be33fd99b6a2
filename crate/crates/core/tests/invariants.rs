use escape_core::c64;
use escape_core::funcalc::{apply_eig, apply_fn, SmoothCutoff};
use escape_core::lattice::{build_grid, hermitize, HermitianOperator, WaveState};
use escape_core::propagation::fit_decay;
use escape_core::spectral::operator_norm;
use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(seed: u64, n: usize) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Mat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    hermitize(Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5), "random").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_recovers_power_law_under_noise(
        m in 0.5f64..6.0,
        c in 1e-3f64..1e3,
        noise in prop::collection::vec(-0.05f64..0.05, 6),
    ) {
        let ladder: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let values: Vec<f64> = ladder.iter().zip(&noise).map(|(s, e)| c * s.powf(-m) * (1.0 + e)).collect();
        let fit = fit_decay(&ladder, &values, 0.0).unwrap();
        prop_assert!((fit.exponent() - m).abs() <= 0.1, "m = {m}, fitted {}", fit.exponent());
    }

    #[test]
    fn smooth_step_is_monotone_in_unit_interval(a in -3.0f64..3.0, w in 0.05f64..2.0, x in -6.0f64..6.0, dx in 0.0f64..0.5) {
        let f = SmoothCutoff::smooth_step(a, w).unwrap();
        let (u, v) = (f.value(x), f.value(x + dx));
        prop_assert!((0.0..=1.0).contains(&u));
        prop_assert!(v >= u - 1e-15);
    }

    #[test]
    fn jet_derivative_matches_difference_quotient(lo in -2.0f64..0.0, len in 1.0f64..3.0, w in 0.2f64..0.5, t in 0.0f64..1.0) {
        let f = SmoothCutoff::bump(lo, lo + len, w).unwrap();
        let x = lo + t * len;
        let h = 1e-5;
        let fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
        let scale = 1.0 + f.derivative(x, 1).abs();
        prop_assert!((fd - f.derivative(x, 1)).abs() <= 1e-5 * scale);
    }

    #[test]
    fn cutoff_of_hermitian_is_a_contraction(seed in any::<u64>(), n in 2usize..12, lo in -2.0f64..0.0) {
        let m = random_hermitian(seed, n);
        let f = SmoothCutoff::bump(lo, lo + 1.5, 0.3).unwrap();
        let fm = apply_eig(&m, &f).unwrap();
        prop_assert!(fm.hermiticity_defect() <= 1e-12);
        prop_assert!(operator_norm(fm.matrix()).unwrap() <= 1.0 + 1e-12);
        // f(M) commutes with M
        let comm = fm.matrix() * m.matrix() - m.matrix() * fm.matrix();
        prop_assert!(comm.norm_l2() <= 1e-10 * (1.0 + m.matrix().norm_l2()));
    }

    #[test]
    fn spectral_mapping_is_multiplicative(seed in any::<u64>(), n in 2usize..10) {
        let m = random_hermitian(seed, n);
        let f = apply_fn(&m, |l| (l * 0.3).sin(), "f").unwrap();
        let g = apply_fn(&m, |l| l.exp() * 0.1, "g").unwrap();
        let fg = apply_fn(&m, |l| (l * 0.3).sin() * l.exp() * 0.1, "fg").unwrap();
        let prod = f.matrix() * g.matrix();
        prop_assert!((&prod - fg.matrix()).norm_l2() <= 1e-10 * (1.0 + fg.matrix().norm_l2()));
    }

    #[test]
    fn normalized_states_have_unit_norm(amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16), l in 1.0f64..50.0) {
        prop_assume!(amps.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let grid = build_grid(l, 16).unwrap();
        let psi = WaveState::new(amps.iter().map(|&(a, b)| c64::new(a, b)).collect(), grid.spacing());
        prop_assert!((psi.normalized().unwrap().norm() - 1.0).abs() <= 1e-14);
    }
}
