//! Library results checked against independently written reference
//! computations.

use commscore::cda::{bec_traced, map_equation, modularity, Partition};
use commscore::graph::{eigencentrality, Graph};
use commscore::nlp::{weighted_vote, VoteWeights};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b, rng.random_range(0.1..3.0)));
            }
        }
    }
    edges
}

fn dense(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    a
}

/// Every set partition of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for label in 0..=max + 1 {
            cur.push(label);
            rec(i + 1, n, max.max(label), cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur = vec![0];
    rec(1, n, 0, &mut cur, &mut out);
    out
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877];
    for (n, &b) in bell.iter().enumerate() {
        assert_eq!(set_partitions(n).len(), b);
    }
}

/// `Q = 1/2m Σ_ij [A_ij - k_i k_j / 2m] δ(c_i, c_j)` over the dense matrix.
fn modularity_oracle(a: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

#[test]
fn modularity_matches_exhaustive_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut graphs = 0;
    let mut checked = 0;
    while graphs < 100 {
        let n = rng.random_range(2..=7);
        let edges = random_graph(&mut rng, n, 0.5);
        if edges.is_empty() {
            continue;
        }
        graphs += 1;
        let g = Graph::with_nodes(n, &edges).unwrap();
        let a = dense(n, &edges);
        for labels in set_partitions(n) {
            let p = Partition::new(labels.clone()).unwrap();
            let q = modularity(&g, &p, 1.0).unwrap();
            let oracle = modularity_oracle(&a, &labels);
            assert!((q - oracle).abs() <= 1e-12, "n={n} labels={labels:?}: {q} vs {oracle}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Closed form `L = plogp(q) - 2 Σ plogp(q_i) - Σ_α plogp(p_α) + Σ plogp(q_i + Σ_{α∈i} p_α)`,
/// with flows and exits computed from the dense matrix.
fn map_equation_oracle(a: &[Vec<f64>], labels: &[usize]) -> (f64, f64, Vec<f64>) {
    let n = a.len();
    let m = labels.iter().max().unwrap() + 1;
    let two_w: f64 = a.iter().flatten().sum();
    let p: Vec<f64> = a.iter().map(|row| row.iter().sum::<f64>() / two_w).collect();
    let mut exit = vec![0.0; m];
    let mut flow = vec![0.0; m];
    for i in 0..n {
        flow[labels[i]] += p[i];
        for j in 0..n {
            if labels[i] != labels[j] {
                exit[labels[i]] += a[i][j] / two_w;
            }
        }
    }
    let q: f64 = exit.iter().sum();
    let l = plogp(q) - 2.0 * exit.iter().map(|&x| plogp(x)).sum::<f64>() - p.iter().map(|&x| plogp(x)).sum::<f64>()
        + exit.iter().zip(&flow).map(|(&e, &f)| plogp(e + f)).sum::<f64>();
    let p_circ = exit.iter().zip(&flow).map(|(e, f)| e + f).collect();
    (l, q, p_circ)
}

fn clique(base: usize, size: usize, w: f64, edges: &mut Vec<(usize, usize, f64)>) {
    for a in 0..size {
        for b in a + 1..size {
            edges.push((base + a, base + b, w));
        }
    }
}

/// Twenty small graphs, each with a partition to score.
type Case = (usize, Vec<(usize, usize, f64)>, Vec<usize>);

fn map_equation_cases() -> Vec<Case> {
    let mut cases = Vec::new();

    let mut e = Vec::new();
    clique(0, 3, 1.0, &mut e);
    clique(3, 3, 1.0, &mut e);
    e.push((2, 3, 1.0));
    cases.push((6, e.clone(), vec![0, 0, 0, 1, 1, 1]));
    cases.push((6, e.clone(), vec![0; 6]));
    cases.push((6, e.clone(), (0..6).collect()));
    cases.push((6, e, vec![0, 0, 1, 1, 2, 2]));

    let mut e = Vec::new();
    clique(0, 5, 1.0, &mut e);
    cases.push((5, e.clone(), vec![0; 5]));
    cases.push((5, e, vec![0, 0, 1, 1, 1]));

    let star: Vec<_> = (1..6).map(|i| (0, i, 1.0)).collect();
    cases.push((6, star.clone(), vec![0; 6]));
    cases.push((6, star, vec![0, 0, 0, 1, 1, 1]));

    let path: Vec<_> = (0..6).map(|i| (i, i + 1, 1.0 + i as f64)).collect();
    cases.push((7, path.clone(), vec![0, 0, 0, 0, 1, 1, 1]));
    cases.push((7, path, vec![0, 1, 0, 1, 0, 1, 0]));

    let ring: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8, 1.0)).collect();
    cases.push((8, ring.clone(), vec![0, 0, 1, 1, 2, 2, 3, 3]));
    cases.push((8, ring, vec![0, 0, 0, 0, 1, 1, 1, 1]));

    let mut e = Vec::new();
    for c in 0..4 {
        clique(c * 4, 4, 1.0, &mut e);
        e.push((c * 4, ((c + 1) % 4) * 4 + 1, 0.5));
    }
    cases.push((16, e.clone(), (0..16).map(|i| i / 4).collect()));
    cases.push((16, e.clone(), (0..16).map(|i| i / 8).collect()));
    cases.push((16, e, (0..16).map(|i| i % 4).collect()));

    let mut e = Vec::new();
    clique(0, 4, 2.5, &mut e);
    clique(4, 4, 0.3, &mut e);
    e.push((3, 4, 1.7));
    cases.push((8, e.clone(), vec![0, 0, 0, 0, 1, 1, 1, 1]));
    cases.push((8, e, vec![0, 0, 0, 1, 1, 1, 1, 1]));

    let mut e = Vec::new();
    clique(0, 3, 1.0, &mut e);
    clique(3, 3, 1.0, &mut e);
    cases.push((6, e.clone(), vec![0, 0, 0, 1, 1, 1]));
    cases.push((6, e, vec![0, 0, 1, 1, 1, 1]));

    let weighted = vec![(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 0.5), (3, 4, 3.0), (4, 5, 1.0), (3, 5, 1.0)];
    cases.push((6, weighted, vec![0, 0, 0, 1, 1, 1]));
    cases
}

#[test]
fn map_equation_matches_scripted_oracle() {
    let start = Instant::now();
    let cases = map_equation_cases();
    assert_eq!(cases.len(), 20);
    for (n, edges, labels) in cases {
        let g = Graph::with_nodes(n, &edges).unwrap();
        let p = Partition::new(labels.clone()).unwrap();
        let terms = map_equation(&g, &p).unwrap();
        let (l, q, p_circ) = map_equation_oracle(&dense(n, &edges), &labels);
        assert!((terms.codelength - l).abs() <= 1e-12, "labels={labels:?}: {} vs {l}", terms.codelength);
        assert!((terms.q_switch - q).abs() <= 1e-12);
        for (a, b) in terms.p_circ.iter().zip(&p_circ) {
            assert!((a - b).abs() <= 1e-12);
        }
        let total: f64 = terms.p_circ.iter().sum();
        assert!((total - (1.0 + terms.q_switch)).abs() <= 1e-9);
        assert!(terms.codelength >= 0.0);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

fn connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> =
        (1..n).map(|v| (rng.random_range(0..v), v, rng.random_range(0.1..3.0))).collect();
    let mut present: std::collections::HashSet<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let extra = rng.random_range(0..=2 * n);
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let (u, v) = (a.min(b), a.max(b));
        if u != v && present.insert((u, v)) {
            edges.push((u, v, rng.random_range(0.1..3.0)));
        }
    }
    edges
}

#[test]
fn eigencentrality_matches_dense_eigendecomposition() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(2..=50);
        let edges = connected_graph(&mut rng, n);
        let g = Graph::with_nodes(n, &edges).unwrap();
        assert!(g.is_connected());
        let c = eigencentrality(&g, 1e-14, 200_000).unwrap();

        let d = dense(n, &edges);
        let a = DMatrix::from_fn(n, n, |i, j| d[i][j]);
        let eig = SymmetricEigen::new(a);
        let top = eig.eigenvalues.iter().enumerate().max_by(|x, y| x.1.partial_cmp(y.1).unwrap()).unwrap().0;
        let v = eig.eigenvectors.column(top);
        let dot: f64 = v.iter().zip(&c.scores).map(|(a, b)| a * b).sum();
        let cosine = dot.abs() / (v.norm() * c.scores.iter().map(|x| x * x).sum::<f64>().sqrt());
        assert!(cosine >= 1.0 - 1e-8, "n={n}: cosine {cosine}");
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn bec_visits_every_edge_once_with_non_decreasing_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..60 {
        let n = rng.random_range(2..40);
        let p = rng.random_range(0.05..0.6);
        let edges = random_graph(&mut rng, n, p);
        if edges.is_empty() {
            continue;
        }
        let g = Graph::with_nodes(n, &edges).unwrap();
        for s in [0.1, 0.5, 1.0, 7.0, 60.0] {
            let (_, trace) = bec_traced(&g, s).unwrap();
            assert_eq!(trace.edge_visits, g.edge_count());
            assert!(trace.accepted_scores.windows(2).all(|w| w[0] <= w[1]), "s={s}: {:?}", trace.accepted_scores);
        }
    }
}

#[test]
fn bec_bridged_triangles() {
    let mut e = Vec::new();
    clique(0, 3, 1.0, &mut e);
    clique(3, 3, 1.0, &mut e);
    e.push((2, 3, 1.0));
    let g = Graph::with_nodes(6, &e).unwrap();
    let (fine, trace) = bec_traced(&g, 0.5).unwrap();
    assert_eq!(fine.module_count(), 2);
    assert_eq!(trace.edge_visits, 7);
    let (coarse, trace) = bec_traced(&g, 60.0).unwrap();
    assert_eq!(coarse.module_count(), 1);
    assert_eq!(trace.edge_visits, 7);
}

/// Weighted argmax with ties resolved by the heaviest single backer, then
/// the smallest category, computed by scanning each category separately.
fn vote_oracle(weights: [u32; 4], choices: [u32; 4]) -> (u32, [u32; 4]) {
    let mut mass = [0u32; 4];
    for c in 1..=4u32 {
        mass[c as usize - 1] = (0..4).filter(|&k| choices[k] == c).map(|k| weights[k]).sum();
    }
    let top = *mass.iter().max().unwrap();
    let tied: Vec<u32> = (1..=4).filter(|&c| mass[c as usize - 1] == top).collect();
    let backer = |c: u32| (0..4).filter(|&k| choices[k] == c).map(|k| weights[k]).max().unwrap_or(0);
    let best_backer = tied.iter().map(|&c| backer(c)).max().unwrap();
    let winner = *tied.iter().find(|&&c| backer(c) == best_backer).unwrap();
    (winner, mass)
}

#[test]
fn ensemble_vote_exhaustive() {
    let weights = [1, 1, 3, 2];
    let vw = VoteWeights::new(weights).unwrap();
    let categories = [1, 2, 3, 4];
    let mut ties = 0;
    for code in 0..256u32 {
        let choices = [code % 4 + 1, code / 4 % 4 + 1, code / 16 % 4 + 1, code / 64 + 1];
        let vote = weighted_vote(&categories, &vw, choices).unwrap();
        let (winner, mass) = vote_oracle(weights, choices);
        assert_eq!(vote.category, winner, "choices {choices:?}");
        assert_eq!(vote.counts, mass.to_vec());
        assert_eq!(vote.counts.iter().sum::<u32>(), 7);
        if mass.iter().filter(|&&m| m == *mass.iter().max().unwrap()).count() > 1 {
            ties += 1;
        }
    }
    assert!(ties > 0);
    // a=1, d=1 on category 1; c=2 on category 2; b=3 on category 3
    let v = weighted_vote(&categories, &vw, [1, 1, 3, 2]).unwrap();
    assert_eq!(v.category, 3);
    let v = weighted_vote(&categories, &vw, [1, 3, 2, 1]).unwrap();
    assert_eq!((v.counts[0], v.counts[1]), (3, 3));
    assert_eq!(v.category, 2);
}
