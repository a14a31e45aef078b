mod common;

use irs_core::routing::*;
use irs_core::scene::LosGraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BETA: f64 = 1e-3;

/// Random points in a 40 m square; an edge `i -> j` exists with probability
/// `p` whenever `j` is farther from the BS than `i`, which keeps the graph
/// acyclic. Returns one graph per user.
fn random_graphs(rng: &mut ChaCha8Rng, j: usize, k: usize, p: f64) -> Vec<LosGraph> {
    let pts: Vec<[f64; 2]> = (0..=j + k)
        .map(|i| if i == 0 { [0.0, 0.0] } else { [rng.gen_range(1.0..40.0), rng.gen_range(-20.0..20.0)] })
        .collect();
    let r = |i: usize| (pts[i][0].powi(2) + pts[i][1].powi(2)).sqrt();
    let d = |a: usize, b: usize| ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2)).sqrt();
    let mut inner = Vec::new();
    for a in 0..=j {
        for b in 1..=j {
            if a != b && r(b) > r(a) && rng.gen_bool(p) {
                inner.push((a, b, d(a, b)));
            }
        }
    }
    (0..k)
        .map(|u| {
            let node = j + 1 + u;
            let mut edges = inner.clone();
            for a in 1..=j {
                if rng.gen_bool(p) {
                    edges.push((a, node, d(a, node)));
                }
            }
            LosGraph::from_edges(j, u, &edges)
        })
        .collect()
}

/// Best gain over every path, by explicit recursion with the gain product.
fn dfs_best(g: &LosGraph, m: &[usize], n_b: usize) -> Option<(f64, Vec<usize>)> {
    fn go(g: &LosGraph, m: &[usize], v: usize, acc: f64, seq: &mut Vec<usize>, best: &mut Option<(f64, Vec<usize>)>) {
        for e in g.successors(v) {
            let hop = BETA / (e.distance * e.distance);
            if e.to == g.user_node {
                let total = acc * hop;
                if best.as_ref().map_or(true, |(b, _)| total > *b) {
                    *best = Some((total, seq.clone()));
                }
            } else if e.to >= 1 && e.to <= g.num_irs && !seq.contains(&e.to) {
                seq.push(e.to);
                go(g, m, e.to, acc * hop * (m[e.to] as f64).powi(2), seq, best);
                seq.pop();
            }
        }
    }
    let mut best = None;
    go(g, m, 0, n_b as f64, &mut Vec::new(), &mut best);
    best
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shortest_path_matches_exhaustive_search(seed in any::<u64>(), j in 1usize..8, p in 0.2..0.9f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graphs(&mut rng, j, 1, p).remove(0);
        let ms: Vec<usize> = (0..=j).map(|_| rng.gen_range(4..64)).collect();
        let model = GainModel { beta: BETA, n_b: 8, elements: ms.clone() };
        match (optimal_single_route(&g, &model), dfs_best(&g, &ms, 8)) {
            (Ok(path), Some((gain, _))) => {
                prop_assert!(rel(path.gain, gain) < 1e-9, "{} vs {}", path.gain, gain);
                // N_B exp(-Σw) reproduces the gain
                let mut nodes = vec![0];
                nodes.extend(&path.irs);
                nodes.push(g.user_node);
                let w: f64 = nodes.windows(2).map(|e| {
                    let d = g.edge_distance(e[0], e[1]).unwrap();
                    edge_weight(d, BETA, (e[1] <= j).then(|| ms[e[1]]))
                }).sum();
                prop_assert!(rel(8.0 * (-w).exp(), gain) < 1e-9);
            }
            (Err(RoutingError::NoFeasiblePath { .. }), None) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn adding_edges_or_elements_never_hurts(seed in any::<u64>(), j in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graphs(&mut rng, j, 1, 0.4).remove(0);
        let m = rng.gen_range(4..40);
        let model = GainModel::uniform(j, m, 4, BETA);
        let Ok(base) = optimal_single_route(&g, &model) else { return Ok(()) };

        let mut edges: Vec<_> = g.edges().collect();
        let (a, b) = (rng.gen_range(0..j), rng.gen_range(1..=j));
        if a < b && g.edge_distance(a, b).is_none() {
            edges.push((a, b, rng.gen_range(1.0..30.0)));
        }
        let more = LosGraph::from_edges(j, 0, &edges);
        prop_assert!(optimal_single_route(&more, &model).unwrap().gain >= base.gain * (1.0 - 1e-12));

        let bigger = GainModel::uniform(j, m + rng.gen_range(1..40), 4, BETA);
        let grown = optimal_single_route(&g, &bigger).unwrap();
        prop_assert!(grown.gain >= base.gain);
        prop_assert!(grown.hops() >= base.hops(), "{} < {}", grown.hops(), base.hops());
    }

    #[test]
    fn separation_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = 6;
        let los: Vec<Vec<bool>> = (0..j + 3).map(|_| (0..j + 3).map(|_| rng.gen_bool(0.2)).collect()).collect();
        let u = |a: usize, b: usize| los[a][b];
        let un = |k: usize| j + 1 + k;
        let pick = |rng: &mut ChaCha8Rng, user| {
            let mut irs: Vec<usize> = (1..=j).filter(|_| rng.gen_bool(0.3)).collect();
            if irs.is_empty() { irs.push(rng.gen_range(1..=j)) }
            ReflectionPath { user, irs, gain: 1.0 }
        };
        let (a, b) = (pick(&mut rng, 0), pick(&mut rng, 1));
        prop_assert_eq!(paths_separated(&a, &b, un, u), paths_separated(&b, &a, un, u));
        if a.irs.iter().any(|x| b.irs.contains(x)) {
            prop_assert!(!paths_separated(&a, &b, un, u));
        }
    }
}

/// Exhaustive max-min over all path combinations.
fn brute_multi(graphs: &[LosGraph], model: &GainModel, u: &dyn Fn(usize, usize) -> bool, separate: bool) -> Option<f64> {
    let cands: Vec<Vec<ReflectionPath>> = graphs
        .iter()
        .map(|g| {
            enumerate_routes(g, None)
                .into_iter()
                .map(|irs| ReflectionPath { user: g.user, gain: model.path_gain(g, &irs).unwrap(), irs })
                .collect()
        })
        .collect();
    let un = |k: usize| graphs[k].user_node;
    let mut best: Option<f64> = None;
    let mut idx = vec![0usize; graphs.len()];
    if cands.iter().any(Vec::is_empty) {
        return None;
    }
    loop {
        let picked: Vec<ReflectionPath> = idx.iter().enumerate().map(|(k, &i)| cands[k][i].clone()).collect();
        if !separate || check_path_separation(&picked, un, |a, b| u(a, b)) {
            let m = picked.iter().map(|p| p.gain).fold(f64::INFINITY, f64::min);
            best = Some(best.map_or(m, |b: f64| b.max(m)));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < cands[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn multi_user_routing_against_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..300 {
        let j = rng.gen_range(3..7);
        let k = rng.gen_range(2..4);
        let graphs = random_graphs(&mut rng, j, k, 0.5);
        let model = GainModel::uniform(j, 16, 4, BETA);
        let los: Vec<Vec<bool>> = (0..j + 1 + k).map(|_| (0..j + 1 + k).map(|_| rng.gen_bool(0.15)).collect()).collect();
        let u = |a: usize, b: usize| los[a][b];
        let gain = |user: usize, irs: &[usize]| model.path_gain(&graphs[user], irs);
        for separate in [false, true] {
            let opts = MultiRouteOptions { budget: None, enforce_separation: separate };
            let got = optimal_multi_route(&graphs, gain, u, opts);
            match (got, brute_multi(&graphs, &model, &u, separate)) {
                (Ok(sol), Some(b)) => {
                    assert!(rel(sol.objective, b) < 1e-12);
                    let min = sol.paths.iter().map(|p| p.gain).fold(f64::INFINITY, f64::min);
                    assert_eq!(min, sol.objective);
                    if separate {
                        assert!(sol.separation_ok);
                    }
                    checked += 1;
                }
                (Err(_), None) => {}
                (a, b) => panic!("{a:?} vs {b:?}"),
            }
        }
        let free = optimal_multi_route(&graphs, gain, u, MultiRouteOptions { budget: None, enforce_separation: false });
        let sep = optimal_multi_route(&graphs, gain, u, MultiRouteOptions::default());
        if let (Ok(f), Ok(s)) = (free, sep) {
            assert!(s.objective <= f.objective);
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn max_min_objective_never_rises_with_more_users() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let j = 6;
        let graphs = random_graphs(&mut rng, j, 4, 0.5);
        let model = GainModel::uniform(j, 16, 4, BETA);
        let los: Vec<Vec<bool>> = (0..j + 5).map(|_| (0..j + 5).map(|_| rng.gen_bool(0.1)).collect()).collect();
        let u = |a: usize, b: usize| los[a][b];
        let gain = |user: usize, irs: &[usize]| model.path_gain(&graphs[user], irs);
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            match optimal_multi_route(&graphs[..k], gain, u, MultiRouteOptions::default()) {
                Ok(s) => {
                    assert!(s.objective <= prev);
                    prev = s.objective;
                }
                Err(_) => break,
            }
        }
    }
}

#[test]
fn ties_prefer_fewer_hops_then_lexicographic() {
    // 0 -> 1 -> user and 0 -> 2 -> user are identical; the direct chain
    // through both is strictly worse.
    let g = LosGraph::from_edges(2, 0, &[(0, 1, 5.0), (0, 2, 5.0), (1, 3, 5.0), (2, 3, 5.0), (1, 2, 50.0)]);
    let p = optimal_single_route(&g, &GainModel::uniform(2, 10, 4, BETA)).unwrap();
    assert_eq!(p.irs, vec![1]);
    assert_eq!(enumerate_routes(&g, None), vec![vec![1, 2], vec![1], vec![2]]);
    assert_eq!(enumerate_routes(&g, Some(2)).len(), 2);
}
