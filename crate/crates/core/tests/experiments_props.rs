use proptest::prelude::*;
use streamx::channel::Dmc;
use streamx::experiments::{converse_proxy, md_constant, RunRecord};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), 0.0f64..1.0]
}

fn record() -> impl Strategy<Value = RunRecord> {
    (
        (1usize..500, 1usize..5, 0.0f64..0.5, 2u32..u32::MAX, finite(), finite(), any::<bool>()),
        (1usize..6, 1u64..u64::MAX, prop::collection::vec((any::<u64>(), finite(), finite(), finite()), 0..6)),
        (0usize..6, finite(), finite(), finite(), finite(), any::<bool>(), any::<u64>(), 0.0f64..1e5),
    )
        .prop_map(|(a, b, c)| RunRecord {
            n: a.0,
            delay: a.1,
            t: a.2,
            m: a.3,
            log2_m_target: a.4,
            log2_m_realized: a.5,
            infeasible: a.6,
            streams: b.0,
            trials: b.1,
            errors: b.2.iter().map(|v| v.0).collect(),
            eps_hat: b.2.iter().map(|v| v.1).collect(),
            ci_lo: b.2.iter().map(|v| v.2).collect(),
            ci_hi: b.2.iter().map(|v| v.3).collect(),
            max_k: c.0,
            max_eps_hat: c.1,
            max_ci_lo: c.2,
            max_ci_hi: c.3,
            md_constant: c.4,
            md_censored: c.5,
            seed: c.6,
            wall_time_s: c.7,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn records_round_trip_through_csv(rec in record()) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RunRecord::header()).unwrap();
        w.write_record(rec.to_row()).unwrap();
        let bytes = w.into_inner().unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        prop_assert_eq!(rows.len(), 1);
        prop_assert_eq!(RunRecord::from_row(&rows[0]).unwrap(), rec);
    }

    #[test]
    fn md_constant_inverts_to_the_error(eps in 1e-300f64..1.0, n in 1usize..100_000, t in 0.0f64..0.5) {
        let a = md_constant(eps, n, t).unwrap();
        let back = 2f64.powf(-a * (n as f64).powf(1.0 - 2.0 * t));
        prop_assert!((back - eps).abs() <= 1e-9 * eps, "{eps} -> {a} -> {back}");
    }

    #[test]
    fn converse_proxy_grows_with_delay_and_slack(
        p in 0.02f64..0.2,
        n in 50usize..400,
        t in 0.1f64..0.4,
        delay in 1usize..5,
        slack in 0.0f64..0.05,
        extra in 0.0f64..0.05,
    ) {
        let w = Dmc::bsc(p).unwrap();
        let base = converse_proxy(&w, n, t, delay, slack);
        prop_assume!(base.is_ok() && converse_proxy(&w, n, t, delay, slack + extra).is_ok());
        let base = base.unwrap().value_bits;
        prop_assume!(base > 0.0);
        let longer = converse_proxy(&w, n, t, delay + 1, slack).unwrap().value_bits;
        prop_assert!(longer > base);
        let looser = converse_proxy(&w, n, t, delay, slack + extra).unwrap().value_bits;
        prop_assert!(looser >= base - 1e-9 * base.abs());
    }
}

#[test]
fn rejects_rows_with_the_wrong_width() {
    let row = csv::StringRecord::from(vec!["1", "2"]);
    assert!(RunRecord::from_row(&row).is_err());
}
