mod common;

use common::{any_small_channel, channel, distribution, entropy};
use proptest::prelude::*;
use streamx::channel::{
    capacity, conditional_kl, dispersion, information_variances, mutual_information, output_symmetry, Dmc,
    InputDistribution,
};

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_is_bounded(w in any_small_channel(), seed in 0u64..1000) {
        let p = common_input(&w, seed);
        let i = mutual_information(&p, &w).unwrap();
        prop_assert!(i >= 0.0);
        prop_assert!(i <= entropy(p.probs()).min((w.output_size() as f64).log2()) + 1e-12);
    }

    #[test]
    fn no_input_beats_capacity(w in any_small_channel(), ps in prop::collection::vec(distribution(3), 16)) {
        let c = capacity(&w, TOL).unwrap().capacity_bits;
        for p in ps {
            let p = restrict(&p, w.input_size());
            prop_assert!(mutual_information(&p, &w).unwrap() <= c + TOL);
        }
    }

    #[test]
    fn unconditional_variance_dominates(w in any_small_channel(), seed in 0u64..1000) {
        let p = common_input(&w, seed);
        let (u, v) = information_variances(&p, &w).unwrap();
        prop_assert!(u >= v - 1e-12);
    }

    #[test]
    fn variances_coincide_at_the_capacity_input(w in any_small_channel()) {
        let cap = capacity(&w, TOL).unwrap();
        let (u, v) = information_variances(&cap.input, &w).unwrap();
        prop_assert!((u - v).abs() <= 10.0 * TOL, "U = {u}, V = {v}, gap = {}", cap.gap);
    }

    #[test]
    fn conditional_kl_is_nonnegative_and_zero_on_equal_rows(v in channel(2, 3), w in channel(2, 3), p in distribution(2)) {
        let d = conditional_kl(&v, &w, &p).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(conditional_kl(&w, &w, &p).unwrap().abs() < 1e-15);
        // rows outside the support of P do not count
        let point = InputDistribution::point_mass(2, 0);
        let mut rows = w.to_rows();
        rows[1] = v.row(1).to_vec();
        let mixed = Dmc::from_rows(rows).unwrap();
        prop_assert!(conditional_kl(&mixed, &w, &point).unwrap().abs() < 1e-15);
    }

    #[test]
    fn symmetric_dispersion_is_the_uniform_variance(row in prop::collection::vec(0.05f64..1.0, 3)) {
        let s: f64 = row.iter().sum();
        let r: Vec<f64> = row.iter().map(|v| v / s).collect();
        // cyclic shifts give an output-symmetric channel
        let rows = (0..3).map(|k| (0..3).map(|y| r[(y + k) % 3]).collect()).collect();
        let w = Dmc::from_rows(rows).unwrap();
        prop_assert!(output_symmetry(&w).symmetric);
        let (_, v) = information_variances(&InputDistribution::uniform(3), &w).unwrap();
        prop_assert!((dispersion(&w, TOL).unwrap() - v).abs() <= 1e-8);
    }
}

fn restrict(p: &InputDistribution, k: usize) -> InputDistribution {
    let w: Vec<f64> = p.probs()[..k].to_vec();
    let s: f64 = w.iter().sum();
    InputDistribution::new(w.into_iter().map(|v| v / s).collect()).unwrap()
}

fn common_input(w: &Dmc, seed: u64) -> InputDistribution {
    let mut s = streamx::rng::StreamKey::new(seed, streamx::rng::domain::SAMPLE).stream();
    let raw: Vec<f64> = (0..w.input_size()).map(|_| 0.01 + s.next_f64()).collect();
    let t: f64 = raw.iter().sum();
    InputDistribution::new(raw.into_iter().map(|v| v / t).collect()).unwrap()
}

#[test]
fn constructors_reject_non_stochastic_rows() {
    assert!(Dmc::from_rows(vec![vec![0.5, 0.4]]).is_err());
    assert!(Dmc::from_rows(vec![vec![1.2, -0.2]]).is_err());
    assert!(Dmc::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    assert!(serde_json::from_str::<Dmc>("[[0.5, 0.6], [0.5, 0.5]]").is_err());
    assert!(Dmc::bsc(1.5).is_err());
}
