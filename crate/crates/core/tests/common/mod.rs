#![allow(dead_code)]

use proptest::prelude::*;
use streamx::channel::{Dmc, InputDistribution};
use streamx::rng::{domain, StreamKey};

/// Row-stochastic matrix with entries bounded away from zero.
pub fn channel(nx: usize, ny: usize) -> impl Strategy<Value = Dmc> {
    prop::collection::vec(prop::collection::vec(0.05f64..1.0, ny), nx).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        Dmc::from_rows(rows).unwrap()
    })
}

pub fn any_small_channel() -> impl Strategy<Value = Dmc> {
    (2usize..=3, 2usize..=3).prop_flat_map(|(nx, ny)| channel(nx, ny))
}

pub fn distribution(k: usize) -> impl Strategy<Value = InputDistribution> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        InputDistribution::new(w.into_iter().map(|v| v / s).collect()).unwrap()
    })
}

/// Deterministic random channel of the given shape from a seed.
pub fn seeded_channel(seed: u64, nx: usize, ny: usize) -> Dmc {
    let mut s = StreamKey::new(seed, domain::SAMPLE).stream();
    let rows = (0..nx)
        .map(|_| {
            let r: Vec<f64> = (0..ny).map(|_| 0.05 + s.next_f64()).collect();
            let t: f64 = r.iter().sum();
            r.into_iter().map(|v| v / t).collect()
        })
        .collect();
    Dmc::from_rows(rows).unwrap()
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}
