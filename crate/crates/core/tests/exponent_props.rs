mod common;

use common::channel;
use proptest::prelude::*;
use streamx::channel::{capacity, output_symmetry, Dmc};
use streamx::exponents::{
    auxiliary_channel, haroutunian_exponent, sphere_packing_dual, sphere_packing_primal, RatePoint,
};

const TOL: f64 = 1e-6;

fn rate(r: f64) -> RatePoint {
    RatePoint::new(r).unwrap()
}

/// Rates `C i / (k + 1)` for `i = 1..=k`.
fn grid(c: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| c * i as f64 / (k + 1) as f64).collect()
}

fn shape() -> impl Strategy<Value = Dmc> {
    prop_oneof![channel(2, 2), channel(2, 3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exponents_are_ordered_and_nonincreasing(w in shape()) {
        let c = capacity(&w, 1e-12).unwrap().capacity_bits;
        prop_assume!(c > 0.02);
        let (mut prev_sp, mut prev_h) = (f64::INFINITY, f64::INFINITY);
        for r in grid(c, 4) {
            let sp = sphere_packing_dual(&w, rate(r), TOL).unwrap().value_bits;
            let h = haroutunian_exponent(&w, rate(r), TOL).unwrap().value_bits;
            prop_assert!(sp <= prev_sp + 2.0 * TOL);
            prop_assert!(h <= prev_h + 2.0 * TOL);
            prop_assert!(sp <= h + 2.0 * TOL, "R = {r}: E_SP = {sp}, E+ = {h}");
            prev_sp = sp;
            prev_h = h;
        }
    }

    #[test]
    fn exponents_vanish_at_and_above_capacity(w in shape(), excess in 0.0f64..0.5) {
        let c = capacity(&w, 1e-12).unwrap().capacity_bits;
        let r = rate(c + excess);
        prop_assert_eq!(sphere_packing_dual(&w, r, TOL).unwrap().value_bits, 0.0);
        prop_assert_eq!(haroutunian_exponent(&w, r, TOL).unwrap().value_bits, 0.0);
    }

    #[test]
    fn auxiliary_channel_is_feasible_and_attains_its_value(w in shape(), frac in 0.2f64..0.9) {
        let c = capacity(&w, 1e-12).unwrap().capacity_bits;
        prop_assume!(c > 0.02);
        let r = c * frac;
        let aux = auxiliary_channel(&w, rate(r), TOL).unwrap();
        let v = &aux.optimizing_channel;
        prop_assert!(capacity(v, 1e-12).unwrap().capacity_bits <= r + TOL);
        let attained = (0..w.input_size())
            .map(|x| streamx::channel::kl_row(v, &w, x).unwrap())
            .fold(0.0, f64::max);
        prop_assert!((attained - aux.value_bits).abs() <= TOL);
    }

    #[test]
    fn primal_and_dual_sphere_packing_agree(w in shape(), frac in 0.1f64..0.95) {
        let c = capacity(&w, 1e-12).unwrap().capacity_bits;
        prop_assume!(c > 0.02);
        let r = rate(c * frac);
        let d = sphere_packing_dual(&w, r, TOL).unwrap().value_bits;
        let p = sphere_packing_primal(&w, r, TOL).unwrap().value_bits;
        prop_assert!((d - p).abs() <= 1e-3, "dual {d}, primal {p}");
    }

    #[test]
    fn symmetric_channels_have_equal_exponents(p in 0.01f64..0.3, e in 0.0f64..0.3, frac in 0.1f64..0.9) {
        // binary symmetric-erasure channel: output symmetric for every (p, e)
        let w = Dmc::from_rows(vec![
            vec![(1.0 - e) * (1.0 - p), e, (1.0 - e) * p],
            vec![(1.0 - e) * p, e, (1.0 - e) * (1.0 - p)],
        ]).unwrap();
        prop_assert!(output_symmetry(&w).symmetric);
        let c = capacity(&w, 1e-12).unwrap().capacity_bits;
        let r = rate(c * frac);
        let sp = sphere_packing_dual(&w, r, TOL).unwrap().value_bits;
        let h = haroutunian_exponent(&w, r, TOL).unwrap().value_bits;
        prop_assert!((sp - h).abs() <= 2.0 * TOL, "E_SP = {sp}, E+ = {h}");
    }
}
