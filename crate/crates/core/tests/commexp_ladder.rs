use escape_core::build_grid;
use escape_core::commexp::{expansion_ladder, support_observation_check, windowed_observable, ExpansionBasis};
use escape_core::funcalc::SmoothCutoff;
use escape_core::operators::{build_dilation_generator, build_hamiltonian, PotentialModel};

const LADDER: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];
const WF: f64 = 64.0;

fn basis(v: &PotentialModel, g: &SmoothCutoff) -> ExpansionBasis {
    let grid = build_grid(16.0, 256).unwrap();
    let h = build_hamiltonian(&grid, v).unwrap();
    let a = build_dilation_generator(&grid).unwrap();
    let b = windowed_observable(&grid, &h, g, 4.0).unwrap();
    ExpansionBasis::new(&b, &a).unwrap()
}

#[test]
fn remainder_slopes_follow_order() {
    let g = SmoothCutoff::gaussian(1.5, 0.5).unwrap();
    for v in [PotentialModel::zero(4), PotentialModel::lorentz_well(0.5, 1.0, 4).unwrap()] {
        let b = basis(&v, &g);
        let cutoffs = [
            SmoothCutoff::bump(-1.5, 2.5, 2.0).unwrap().affine(WF, 0.0).unwrap(),
            SmoothCutoff::half_order(1.0).unwrap().affine(WF, -0.4).unwrap(),
        ];
        for f in &cutoffs {
            for n in 2..=4 {
                let r = expansion_ladder(&b, f, n, &LADDER).unwrap();
                let fit = r.fit.clone().expect("fit");
                println!("{} n={n} slope={:.3} rms={:.3} c_hat_trend={:.3}", f.label(), fit.slope, fit.rms, r.c_hat_trend);
                assert!((fit.slope + n as f64).abs() <= 0.3, "{} n={n}: {:?}", f.label(), r.remainder_norms);
            }
        }
    }
}

#[test]
fn support_observation_decays_for_each_shift() {
    let g = SmoothCutoff::bump(1.0, 2.0, 0.3).unwrap();
    let b = basis(&PotentialModel::zero(4), &g);
    let f = SmoothCutoff::poly_drop(WF, 3).unwrap();
    let mut slopes = vec![];
    for shift in [-5.0, 0.0, 5.0] {
        let r = support_observation_check(&b, &f, shift, &LADDER).unwrap();
        assert_eq!(r.anchor_weight, 0.0);
        let fit = r.fit.expect("fit");
        println!("shift {shift}: slope {:.3} norms {:?}", fit.slope, r.norms);
        slopes.push(fit.slope);
    }
    let spread = slopes.iter().cloned().fold(f64::MIN, f64::max) - slopes.iter().cloned().fold(f64::MAX, f64::min);
    assert!(slopes.iter().all(|s| *s <= -3.0 + 0.4) && spread <= 0.3, "{slopes:?}");
}
