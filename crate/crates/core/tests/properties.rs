mod common;

use common::*;
use proptest::prelude::*;
use qkcount::baselines::{afu_count, bucket_of, sv_count, AfuConfig};
use qkcount::exact::{fff_count, fff_list};
use qkcount::graph::{normalize, precedes, Edge, Graph, NodeId, OrderKey};
use qkcount::mrengine::{Emitter, Engine, Group};

fn edge_lists(max_label: u64, max_edges: usize) -> impl Strategy<Value = Vec<Edge>> {
    prop::collection::vec((0..max_label, 0..max_label), 0..max_edges)
        .prop_map(|pairs| pairs.into_iter().map(|(a, b)| Edge::new(a, b)).collect())
}

fn engine(workers: usize) -> Engine {
    Engine::with_workers(workers, true).unwrap()
}

fn order_keys() -> impl Strategy<Value = OrderKey> {
    (0u32..5, 0u64..5).prop_map(|(d, l)| OrderKey::new(d, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn precedes_is_strict_total_order(a in order_keys(), b in order_keys(), c in order_keys()) {
        prop_assert!(!precedes(a, a));
        prop_assert!(!(precedes(a, b) && precedes(b, a)));
        if a != b {
            prop_assert!(precedes(a, b) || precedes(b, a));
        }
        if precedes(a, b) && precedes(b, c) {
            prop_assert!(precedes(a, c));
        }
        let lex = (a.degree, a.label) < (b.degree, b.label);
        prop_assert_eq!(precedes(a, b), lex);
    }

    #[test]
    fn normalize_is_idempotent(edges in edge_lists(30, 120)) {
        let g = normalize(&edges);
        prop_assert_eq!(normalize(&g.edge_list()), g.clone());
        prop_assert_eq!(g.m(), simple(&edges).len());
    }

    #[test]
    fn high_neighborhoods_match_oracle(edges in edge_lists(40, 200)) {
        let g = normalize(&edges);
        let expected = oracle_high_degrees(&edges);
        let mut total = 0;
        for (&label, &h) in &expected {
            let hood = g.high_neighborhood(NodeId(label)).unwrap();
            prop_assert_eq!(hood.members.len(), h);
            total += h;
        }
        prop_assert_eq!(total, g.m());
        prop_assert!(g.max_high_degree() as f64 <= 2.0 * (g.m() as f64).sqrt());
    }

    #[test]
    fn fff_matches_oracle(edges in edge_lists(14, 70), k in 3usize..7) {
        let g = normalize(&edges);
        let expected = oracle_count(&edges, k);
        prop_assert_eq!(fff_count(&g, k, &engine(2), false).unwrap().count, expected);
        let (cliques, _) = fff_list(&g, k, &engine(1)).unwrap();
        prop_assert_eq!(cliques.len() as u64, expected);
    }

    #[test]
    fn per_node_counts_sum_to_k_times_total(edges in edge_lists(14, 70), k in 3usize..6) {
        let g = normalize(&edges);
        let r = fff_count(&g, k, &engine(2), true).unwrap();
        let sum: u64 = r.per_node.unwrap().values().sum();
        prop_assert_eq!(sum, k as u64 * r.count);
    }

    #[test]
    fn listed_cliques_are_distinct_cliques(edges in edge_lists(12, 60), k in 3usize..6) {
        let g = normalize(&edges);
        let set = simple(&edges);
        let (cliques, _) = fff_list(&g, k, &engine(2)).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for q in &cliques {
            prop_assert_eq!(q.len(), k);
            for i in 0..k {
                for j in i + 1..k {
                    let (a, b) = (q[i].0.min(q[j].0), q[i].0.max(q[j].0));
                    prop_assert!(set.contains(&(a, b)));
                }
            }
            let mut sorted = q.clone();
            sorted.sort();
            prop_assert!(seen.insert(sorted));
        }
    }

    #[test]
    fn schedule_independence(edges in edge_lists(20, 120), k in 3usize..6) {
        let g = normalize(&edges);
        let reference = fff_count(&g, k, &engine(1), false).unwrap();
        for workers in [1, 2, 8] {
            for deterministic in [true, false] {
                let e = Engine::with_workers(workers, deterministic).unwrap();
                let r = fff_count(&g, k, &e, false).unwrap();
                prop_assert_eq!(r.count, reference.count);
                for (a, b) in r.run_report.rounds.iter().zip(&reference.run_report.rounds) {
                    prop_assert_eq!(a.emitted_pairs, b.emitted_pairs);
                    prop_assert_eq!(a.distinct_keys, b.distinct_keys);
                    prop_assert_eq!(a.max_group_size, b.max_group_size);
                    prop_assert_eq!(a.output_pairs, b.output_pairs);
                }
            }
        }
    }

    #[test]
    fn deterministic_mode_reproduces_output_order(pairs in prop::collection::vec((0u8..20, 0u32..100), 0..200)) {
        let run = |workers| {
            let e = Engine::with_workers(workers, true).unwrap();
            e.run_round(
                "group",
                &pairs,
                |&k, &v, em: &mut Emitter<u8, u32>| { em.emit(k % 7, v); Ok(()) },
                |&k, g: Group<'_, u8, u32>, em: &mut Emitter<u8, Vec<u32>>| {
                    em.emit(k, g.values().copied().collect());
                    Ok(())
                },
            )
            .unwrap()
            .0
        };
        let first = run(1);
        prop_assert_eq!(&run(1), &first);
        prop_assert_eq!(&run(3), &first);
        prop_assert_eq!(&run(8), &first);
    }

    #[test]
    fn round2_traffic_matches_oracle_and_shrinks_with_k(edges in edge_lists(30, 160)) {
        let g = normalize(&edges);
        let mut previous = u64::MAX;
        for k in 3..8 {
            let r = fff_count(&g, k, &engine(2), false).unwrap();
            if k > g.n() {
                continue;
            }
            let emitted = r.run_report.round("fff-2").unwrap().emitted_pairs;
            prop_assert_eq!(emitted, oracle_round2_pairs(&edges, k));
            prop_assert!(emitted <= previous);
            let m = g.m() as f64;
            prop_assert!(emitted as f64 <= 2.0 * m.powf(1.5) + m);
            previous = emitted;
        }
    }

    #[test]
    fn afu_partition_of_unity(edges in edge_lists(14, 70), seed in any::<u64>()) {
        let g = normalize(&edges);
        for k in 3..=5 {
            let expected = oracle_count(&edges, k);
            for b in [1, 2, 3, 5] {
                let r = afu_count(&g, k, &engine(2), AfuConfig { seed, ..AfuConfig::new(b) }).unwrap();
                prop_assert_eq!(r.counts.count, expected, "b={} k={}", b, k);
            }
        }
    }

    #[test]
    fn afu_replication_accounting(edges in edge_lists(25, 120), seed in any::<u64>(), b in 1u32..5, k in 3usize..6) {
        let g = normalize(&edges);
        let r = afu_count(&g, k, &engine(1), AfuConfig { seed, ..AfuConfig::new(b) }).unwrap();
        let expected: u64 = simple(&edges)
            .iter()
            .map(|&(x, y)| {
                let (i, j) = (bucket_of(NodeId(x), b, seed), bucket_of(NodeId(y), b, seed));
                tuples_containing(b, k, i.min(j), i.max(j))
            })
            .sum();
        prop_assert_eq!(r.counts.run_report.rounds[0].emitted_pairs, expected);
    }

    #[test]
    fn triangle_algorithms_agree(edges in edge_lists(20, 100)) {
        let g: Graph = normalize(&edges);
        let expected = oracle_count(&edges, 3);
        prop_assert_eq!(sv_count(&g, &engine(2), false).unwrap().count, expected);
        prop_assert_eq!(sv_count(&g, &engine(2), true).unwrap().count, expected);
        prop_assert_eq!(fff_count(&g, 3, &engine(2), false).unwrap().count, expected);
        prop_assert_eq!(afu_count(&g, 3, &engine(2), AfuConfig::new(3)).unwrap().counts.count, expected);
    }
}

#[test]
fn afu_replication_grows_with_buckets() {
    let mut r = rng(11);
    let edges = gnp_edges(40, 0.3, &mut r);
    let g = normalize(&edges);
    for k in 3..=5 {
        let emitted = |b| {
            afu_count(&g, k, &engine(1), AfuConfig::new(b))
                .unwrap()
                .counts
                .run_report
                .rounds[0]
                .emitted_pairs
        };
        let ratio = emitted(4) as f64 / emitted(2) as f64;
        assert!(ratio >= 2f64.powi(k as i32 - 3), "k={k} ratio={ratio}");
    }
}

#[test]
fn sv_variants_on_seeded_gnp() {
    let mut r = rng(12);
    let edges = gnp_edges(12, 0.5, &mut r);
    let g = normalize(&edges);
    let a = sv_count(&g, &engine(2), false).unwrap().count;
    let b = sv_count(&g, &engine(2), true).unwrap().count;
    assert_eq!(a, b);
    assert_eq!(a, oracle_count(&edges, 3));
}

#[test]
fn afu_bucket_counts_agree_on_seeded_gnp() {
    let mut r = rng(13);
    let edges = gnp_edges(12, 0.5, &mut r);
    let g = normalize(&edges);
    let expected = oracle_count(&edges, 5);
    for b in 1..=3 {
        assert_eq!(
            afu_count(&g, 5, &engine(2), AfuConfig::new(b)).unwrap().counts.count,
            expected
        );
    }
}
