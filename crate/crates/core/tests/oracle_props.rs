mod common;

use common::seeded_channel;
use proptest::prelude::*;
use streamx::channel::InputDistribution;
use streamx::codec::{StreamingConfig, TableCodebook, TableEntry};
use streamx::oracle::{exact_feedforward_map_error, exact_streaming_error, TinyInstance};

fn instance(seed: u64, n: usize, m: u32, delay: usize, streams: usize, ny: usize) -> TinyInstance {
    let w = seeded_channel(seed, 2, ny);
    let cfg = StreamingConfig::new(n, m, delay, streams, w, InputDistribution::new(vec![0.45, 0.55]).unwrap(), seed)
        .unwrap();
    TinyInstance::from_config(cfg).unwrap()
}

fn shapes() -> impl Strategy<Value = (usize, u32, usize, usize, usize)> {
    prop_oneof![
        Just((2, 2, 2, 2, 2)),
        Just((1, 3, 2, 2, 2)),
        Just((2, 2, 1, 3, 2)),
        Just((1, 2, 3, 2, 3)),
        Just((3, 2, 1, 2, 2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relabelling_messages_preserves_exact_error(seed in 0u64..10_000, swap in any::<bool>()) {
        // permutations fixing message 1 commute with the tie-break toward 1
        let inst = instance(seed, 1, 3, 2, 2, 2);
        let perm = |g: u32| if swap && g > 1 { 5 - g } else { g };
        let entries: Vec<TableEntry> = inst
            .table()
            .entries()
            .into_iter()
            .map(|e| TableEntry { prefix: e.prefix.iter().map(|&g| perm(g)).collect(), codeword: e.codeword })
            .collect();
        let c = inst.config().clone();
        let table = TableCodebook::from_entries(c.n, c.m, c.total_blocks(), 2, &entries).unwrap();
        let relabelled = TinyInstance::new(c, table).unwrap();
        let a = exact_streaming_error(&inst).unwrap();
        let b = exact_streaming_error(&relabelled).unwrap();
        for (x, y) in a.per_message.iter().zip(&b.per_message) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn map_is_no_worse_and_needs_only_the_window(seed in 0u64..10_000, shape in shapes()) {
        let (n, m, delay, streams, ny) = shape;
        let inst = instance(seed, n, m, delay, streams, ny);
        let exact = exact_streaming_error(&inst).unwrap();
        prop_assert!(exact.normalization_error <= 1e-9);
        for k in 1..=streams {
            let full = exact_feedforward_map_error(&inst, k, false).unwrap();
            let window = exact_feedforward_map_error(&inst, k, true).unwrap();
            prop_assert!((full - window).abs() <= 1e-12, "k = {k}: {full} vs {window}");
            prop_assert!(full <= exact.per_message[k - 1] + 1e-12);
        }
    }
}
