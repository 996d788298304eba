use commscore::cda::{infomap, louvain, map_equation, modularity, truncate_partition, Partition};
use commscore::eval::{agreement_precision, coverage, f_beta, user_entropy, UserOutcome};
use commscore::graph::Graph;
use commscore::nlp::{
    aggregate_user_votes, classify_user, hash_embed, train_ensemble, weighted_vote, EmbeddingStore, EnsembleConfig,
    ForestConfig, VoteWeights,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn outcomes(hits: &[(bool, usize)]) -> Vec<UserOutcome> {
    hits.iter()
        .enumerate()
        .map(|(i, &(agree, tweets))| UserOutcome {
            user_id: format!("u{i:05}"),
            cda: 1,
            nlpca: if agree { 1 } else { 2 },
            tweets,
        })
        .collect()
}

fn weighted_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3usize..30)
        .prop_flat_map(|n| {
            let edge = (0..n, 0..n, 0.1f64..5.0);
            (Just(n), prop::collection::vec(edge, 1..4 * n))
        })
        .prop_map(|(n, raw)| {
            let mut seen = std::collections::BTreeMap::new();
            for (a, b, w) in raw {
                if a != b {
                    seen.insert((a.min(b), a.max(b)), w);
                }
            }
            (n, seen.into_iter().map(|((a, b), w)| (a, b, w)).collect())
        })
        .prop_filter("needs an edge", |(_, e): &(usize, Vec<_>)| !e.is_empty())
}

proptest! {
    #[test]
    fn coverage_is_monotone_in_n_cut(labels in prop::collection::vec(0usize..12, 1..200)) {
        let p = Partition::from_labels(&labels);
        let mut last = 0.0;
        for n_cut in 2..16 {
            let lp = truncate_partition(&p, n_cut).unwrap();
            let c = coverage(&lp);
            prop_assert!(c >= last);
            prop_assert!((0.0..=1.0).contains(&c));
            last = c;
        }
    }

    #[test]
    fn truncation_ranks_by_size(labels in prop::collection::vec(0usize..10, 1..200), n_cut in 2u32..8) {
        let p = Partition::from_labels(&labels);
        let lp = truncate_partition(&p, n_cut).unwrap();
        prop_assert!(lp.categories().iter().all(|&c| (1..=n_cut).contains(&c)));
        let sizes = lp.category_sizes();
        let named = &sizes[..(n_cut as usize - 1).min(sizes.len())];
        prop_assert!(named.windows(2).all(|w| w[0] >= w[1]));
        let largest_unnamed = p.module_sizes().into_iter().enumerate()
            .filter(|&(m, _)| (1..n_cut).all(|c| lp.module_for_category(c) != Some(m)))
            .map(|(_, s)| s).max().unwrap_or(0);
        prop_assert!(named.iter().filter(|&&s| s > 0).all(|&s| s >= largest_unnamed));
    }

    #[test]
    fn agreement_is_permutation_invariant(
        hits in prop::collection::vec((any::<bool>(), 1usize..50), 1..300),
        seed in any::<u64>(),
        shuffle in any::<u64>(),
    ) {
        let records = outcomes(&hits);
        let mut permuted = records.clone();
        permuted.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = agreement_precision(&records, 50, seed).unwrap();
        let b = agreement_precision(&permuted, 50, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a.precision));
    }

    #[test]
    fn entropy_zero_iff_single_category(counts in prop::collection::vec(0usize..20, 1..8)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let e = user_entropy(counts.iter().copied());
        prop_assert_eq!(e.distinct, counts.iter().filter(|&&c| c > 0).count());
        prop_assert_eq!(e.bits == 0.0, e.distinct == 1);
        prop_assert!(e.bits <= (e.distinct as f64).log2() + 1e-12);
    }

    #[test]
    fn user_verdict_ignores_message_order(
        choices in prop::collection::vec(prop::array::uniform4(1u32..5), 1..40),
        shuffle in any::<u64>(),
    ) {
        let cats = [1, 2, 3, 4];
        let w = VoteWeights::default();
        let votes: Vec<_> = choices.iter().map(|&c| weighted_vote(&cats, &w, c).unwrap()).collect();
        let mut permuted = votes.clone();
        permuted.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = aggregate_user_votes(&cats, &votes).unwrap();
        prop_assert_eq!(&a, &aggregate_user_votes(&cats, &permuted).unwrap());
        let top = a.histogram.values().max().unwrap();
        prop_assert_eq!(a.histogram[&a.category], *top);
    }

    #[test]
    fn louvain_never_below_singletons((n, edges) in weighted_graph(), c in 0.25f64..16.0, seed in any::<u64>()) {
        let g = Graph::with_nodes(n, &edges).unwrap();
        let p = louvain(&g, c, seed).unwrap();
        let q = modularity(&g, &p, c).unwrap();
        prop_assert!(q >= modularity(&g, &Partition::singletons(n), c).unwrap() - 1e-12);
        prop_assert_eq!(&p, &louvain(&g, c, seed).unwrap());
    }

    #[test]
    fn infomap_never_above_trivial_partitions((n, edges) in weighted_graph(), seed in any::<u64>()) {
        let g = Graph::with_nodes(n, &edges).unwrap();
        let p = infomap(&g, seed).unwrap();
        let l = map_equation(&g, &p).unwrap().codelength;
        prop_assert!(l <= map_equation(&g, &Partition::one_module(n)).unwrap().codelength + 1e-12);
        prop_assert!(l <= map_equation(&g, &Partition::singletons(n)).unwrap().codelength + 1e-12);
    }

    #[test]
    fn hash_embedding_is_unit_or_zero(text in "[a-z #@]{0,80}", dim in 16usize..300) {
        let v: Vec<f64> = hash_embed(&text, dim);
        prop_assert_eq!(v.len(), dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_bytes_round_trip(dim in 1usize..20, rows in 0usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<String> = (0..rows).map(|i| format!("t{i}")).collect();
        let vectors: Vec<f32> = (0..dim * rows).map(|_| rng.random_range(-1e3f32..1e3)).collect();
        let store = EmbeddingStore::new(dim, ids.clone(), vectors).unwrap();
        let bytes = store.to_bytes();
        let back = EmbeddingStore::from_bytes(&bytes, ids).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(&back, &store);
    }
}

#[test]
fn f_beta_identities() {
    for i in 0..1000 {
        let p = (i % 40 + 1) as f64 / 40.0;
        let r = (i / 40 + 1) as f64 / 25.0;
        let harmonic = 2.0 / (1.0 / p + 1.0 / r);
        assert!((f_beta(p, r, 1.0) - harmonic).abs() <= 1e-12);
    }
    for &beta in &[0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 10.0] {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((f_beta(x, x, beta) - x).abs() <= 1e-12);
        }
    }
}

#[test]
fn entropy_zero_iff_single_category_random_histograms() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut single = 0;
    for _ in 0..1000 {
        let k = rng.random_range(1..=6);
        let counts: Vec<usize> =
            (0..k).map(|_| if rng.random_bool(0.4) { 0 } else { rng.random_range(1..30) }).collect();
        if counts.iter().all(|&c| c == 0) {
            continue;
        }
        let e = user_entropy(counts.iter().copied());
        let distinct = counts.iter().filter(|&&c| c > 0).count();
        assert_eq!(e.bits == 0.0, distinct == 1);
        single += usize::from(distinct == 1);
    }
    assert!(single > 50);
}

#[test]
fn jackknife_error_scales_as_inverse_root_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut errs = Vec::new();
    for n in [2_000usize, 8_000, 32_000] {
        let hits: Vec<(bool, usize)> = (0..n).map(|_| (rng.random_bool(0.85), 1)).collect();
        let a = agreement_precision(&outcomes(&hits), 50, 1).unwrap();
        let analytic = (a.precision * (1.0 - a.precision) / n as f64).sqrt();
        errs.push(a.jackknife_err * (n as f64).sqrt());
        assert!((a.jackknife_err / analytic - 1.0).abs() < 0.35, "n={n}");
    }
    // quadrupling n halves the error
    let ratio = errs[2] / errs[0];
    assert!((0.6..1.6).contains(&ratio), "{errs:?}");
}

#[test]
fn classify_user_ignores_message_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dim = 8;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for c in 0..3u32 {
        for _ in 0..40 {
            let v: Vec<f64> =
                (0..dim).map(|j| if j == c as usize { 2.0 } else { 0.0 } + rng.random_range(-1.0..1.0)).collect();
            x.push(v);
            y.push(c + 1);
        }
    }
    let cfg =
        EnsembleConfig { forest: ForestConfig { trees: 10, ..ForestConfig::default() }, ..EnsembleConfig::default() };
    let e = train_ensemble(&x, &y, &cfg).unwrap();
    for trial in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(trial);
        let mut msgs: Vec<Vec<f64>> =
            (0..r.random_range(1..12)).map(|_| x[r.random_range(0..x.len())].clone()).collect();
        let a = classify_user(&e, &msgs).unwrap();
        msgs.shuffle(&mut r);
        assert_eq!(a, classify_user(&e, &msgs).unwrap());
    }
}
