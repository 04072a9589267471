//! Monte Carlo checks of the sampling estimators. All runs use fixed seeds.

mod common;

use common::*;
use qkcount::exact::fff_count;
use qkcount::graph::{normalize, Graph, NodeId};
use qkcount::mrengine::Engine;
use qkcount::sampling::{color_of, estimate, sample_decision_plain, SamplingConfig};
use rand::Rng;

const SEEDS: u64 = 200;

fn engine() -> Engine {
    Engine::with_workers(2, true).unwrap()
}

fn estimates(g: &Graph, k: usize, make: impl Fn(u64) -> SamplingConfig) -> Vec<f64> {
    (0..SEEDS)
        .map(|s| estimate(g, k, make(1000 + s), &engine()).unwrap().value)
        .collect()
}

#[test]
fn plain_acceptance_rate() {
    let mut r = rng(1);
    let trials = 1_000_000;
    let accepted = (0..trials)
        .filter(|_| {
            let (s, o, x, y) = (r.gen(), NodeId(r.gen()), NodeId(r.gen()), NodeId(r.gen()));
            sample_decision_plain(s, o, x, y, 0.5)
        })
        .count();
    let rate = accepted as f64 / trials as f64;
    assert!((0.499..=0.501).contains(&rate), "rate {rate}");
}

#[test]
fn plain_decisions_independent_across_owners() {
    let mut r = rng(2);
    let trials = 200_000;
    let p = 0.3;
    let both = (0..trials)
        .filter(|_| {
            let (s, x, y) = (r.gen(), NodeId(r.gen()), NodeId(r.gen()));
            sample_decision_plain(s, NodeId(1), x, y, p) && sample_decision_plain(s, NodeId(2), x, y, p)
        })
        .count();
    let rate = both as f64 / trials as f64;
    assert!((rate - p * p).abs() < 0.005, "joint rate {rate}");
}

#[test]
fn color_agreement_across_owners() {
    let mut r = rng(3);
    let trials = 100_000;
    for c in [2u32, 3, 5, 10] {
        let agree = (0..trials)
            .filter(|_| {
                let (s, x) = (r.gen(), NodeId(r.gen()));
                color_of(s, NodeId(10), x, c) == color_of(s, NodeId(11), x, c)
            })
            .count();
        let rate = agree as f64 / trials as f64;
        assert!((rate - 1.0 / c as f64).abs() < 0.01, "c={c} rate {rate}");
    }
}

#[test]
fn color_is_near_uniform() {
    let mut r = rng(4);
    let c = 7u32;
    let mut hist = vec![0u32; c as usize];
    for _ in 0..70_000 {
        hist[color_of(r.gen(), NodeId(r.gen()), NodeId(r.gen()), c) as usize] += 1;
    }
    assert!(hist.iter().all(|&h| (h as f64 - 10_000.0).abs() < 500.0), "{hist:?}");
}

#[test]
fn estimators_are_unbiased() {
    let mut r = rng(5);
    let g = normalize(&gnp_edges(30, 0.4, &mut r));
    for k in 3..=5 {
        let exact = fff_count(&g, k, &engine(), false).unwrap().count as f64;
        type MakeConfig = Box<dyn Fn(u64) -> SamplingConfig>;
        let modes: [(&str, MakeConfig); 2] = [
            ("plain", Box::new(|s| SamplingConfig::plain(0.5, s).unwrap())),
            ("color", Box::new(|s| SamplingConfig::color(2, s).unwrap())),
        ];
        for (name, make) in modes {
            let xs = estimates(&g, k, make);
            let (mean, var) = mean_and_var(&xs);
            let se = (var / SEEDS as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "{name} k={k}: mean {mean} exact {exact} se {se}"
            );
        }
    }
}

#[test]
fn plain_sampling_reduces_round2_work() {
    let mut r = rng(6);
    let g = normalize(&gnp_edges(80, 0.25, &mut r));
    let k = 4;
    let exact = fff_count(&g, k, &engine(), false).unwrap();
    let exact_wedges = exact.run_report.round("fff-2").unwrap().emitted_pairs - g.m() as u64;
    for p in [0.2, 0.5] {
        let total: u64 = (0..50)
            .map(|s| {
                let e = estimate(&g, k, SamplingConfig::plain(p, s).unwrap(), &engine()).unwrap();
                e.run_report.round("fff-2").unwrap().emitted_pairs - g.m() as u64
            })
            .sum();
        let mean = total as f64 / 50.0;
        let target = p * exact_wedges as f64;
        assert!(
            (mean - target).abs() <= 0.05 * target,
            "p={p}: mean {mean} target {target}"
        );
    }
}

#[test]
fn color_variance_not_worse_than_plain() {
    let mut r = rng(7);
    let g = normalize(&gnp_edges(40, 0.4, &mut r));
    for k in [4, 5] {
        let c = 3;
        let (_, var_color) = mean_and_var(&estimates(&g, k, |s| SamplingConfig::color(c, s).unwrap()));
        let (_, var_plain) = mean_and_var(&estimates(&g, k, |s| SamplingConfig::plain(1.0 / c as f64, s).unwrap()));
        assert!(
            var_color <= 1.1 * var_plain,
            "k={k}: color {var_color} plain {var_plain}"
        );
    }
}
