mod common;

use common::*;
use glauber_core::exact::{enumerate_gibbs, DEFAULT_RAW_LIMIT};
use glauber_core::graph::{build_bary_tree, cycle_graph, path_graph, Graph};
use glauber_core::model::*;
use glauber_core::rng::stream;
use proptest::prelude::*;

/// Law of the broadcast on a tree: sum over the root spin and the flip
/// pattern of every edge.
fn broadcast_law(g: &Graph, eps: f64) -> Vec<f64> {
    let n = g.n();
    let edges: Vec<(usize, usize)> = (0..n)
        .filter_map(|v| g.parent(v).map(|p| (p, v)))
        .collect();
    let mut law = vec![0.0; 1 << n];
    for root in 0..2u8 {
        for flips in 0u32..(1 << edges.len()) {
            let mut s = vec![0u8; n];
            s[g.root()] = root;
            let mut prob = 0.5;
            // parents precede children in BFS labels
            for (k, &(p, c)) in edges.iter().enumerate() {
                let f = flips >> k & 1 == 1;
                s[c] = if f { 1 - s[p] } else { s[p] };
                prob *= if f { eps } else { 1.0 - eps };
            }
            let code = s.iter().fold(0usize, |acc, &x| acc * 2 + x as usize);
            law[code] += prob;
        }
    }
    law
}

#[test]
fn broadcast_law_is_gibbs() {
    for r in 1..=3 {
        let g = build_bary_tree(2, r).unwrap();
        for beta in [0.0, 0.3, 0.9, 2.0] {
            let law = broadcast_law(&g, eps_of_beta(beta));
            let gt = enumerate_gibbs(&Model::ising(beta).unwrap(), &g, DEFAULT_RAW_LIMIT).unwrap();
            assert_eq!(gt.len(), law.len());
            assert!(tv(&law, gt.probs()) <= 1e-10, "r={r} beta={beta}");
        }
    }
}

#[test]
fn broadcast_correlations_are_powers_of_theta() {
    for r in 1..=3 {
        let g = build_bary_tree(2, r).unwrap();
        let theta: f64 = 0.55;
        let law = broadcast_law(&g, (1.0 - theta) / 2.0);
        let n = g.n();
        for u in 0..n {
            let dist = g.distances_from(u);
            for v in 0..n {
                let corr: f64 = law
                    .iter()
                    .enumerate()
                    .map(|(code, p)| {
                        let su = if code >> (n - 1 - u) & 1 == 1 { 1.0 } else { -1.0 };
                        let sv = if code >> (n - 1 - v) & 1 == 1 { 1.0 } else { -1.0 };
                        p * su * sv
                    })
                    .sum();
                assert!((corr - theta.powi(dist[v] as i32)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn broadcast_sampler_matches_law() {
    let g = build_bary_tree(2, 2).unwrap();
    let eps = 0.2;
    let law = broadcast_law(&g, eps);
    let mut counts = vec![0u64; law.len()];
    let mut rng = stream(11, 0);
    let samples = 200_000;
    for _ in 0..samples {
        let s = broadcast_sample(2, 2, eps, &mut rng).unwrap().0;
        counts[s.iter().fold(0usize, |acc, &x| acc * 2 + x as usize)] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&law)
        .map(|(&c, &p)| {
            let e = p * samples as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 127 degrees of freedom; the 0.999 quantile is about 181
    assert!(chi2 < 181.0, "chi2 = {chi2}");
}

#[test]
fn broadcast_extremes() {
    let mut rng = stream(3, 1);
    for _ in 0..100 {
        let s = broadcast_sample(3, 3, 0.0, &mut rng).unwrap().0;
        assert!(s.iter().all(|&x| x == s[0]));
    }
    let mut plus = vec![0u32; 15];
    let reps = 20_000;
    for _ in 0..reps {
        let s = broadcast_sample(2, 3, 0.5, &mut rng).unwrap().0;
        s.iter().enumerate().for_each(|(v, &x)| plus[v] += x as u32);
    }
    // each site is a fair coin: 4 standard errors
    let se = (reps as f64 * 0.25).sqrt();
    assert!(plus.iter().all(|&c| (c as f64 - reps as f64 / 2.0).abs() < 4.0 * se));
    assert!(broadcast_sample(2, 2, 0.6, &mut rng).is_err());
    assert!(broadcast_on_tree(&cycle_graph(4).unwrap(), 0.1, &mut rng).is_err());
}

#[test]
fn potts_two_is_ising_at_double_temperature() {
    let g = path_graph(3).unwrap();
    let beta = 0.45;
    let ising = enumerate_gibbs(&Model::ising(beta).unwrap(), &g, DEFAULT_RAW_LIMIT).unwrap();
    let potts = enumerate_gibbs(&Model::potts(2, 2.0 * beta).unwrap(), &g, DEFAULT_RAW_LIMIT).unwrap();
    assert!(tv(ising.probs(), potts.probs()) < 1e-14);
    let b = brute_gibbs(3, 2, ising_weight(&g.edges(), beta));
    assert!(tv(ising.probs(), &b.probs) < 1e-14);
}

#[test]
fn coloring_tables() {
    let edge = path_graph(2).unwrap();
    let gt = enumerate_gibbs(&Model::coloring(3).unwrap(), &edge, DEFAULT_RAW_LIMIT).unwrap();
    assert_eq!(gt.len(), 6);
    assert!(gt.probs().iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
    assert!(enumerate_gibbs(&Model::coloring(2).unwrap(), &cycle_graph(3).unwrap(), DEFAULT_RAW_LIMIT).is_err());
}

#[test]
fn coloring_heat_bath_avoids_neighbour_colors() {
    let g = Graph::from_edges(3, &[(0, 1), (0, 2)], 0).unwrap();
    let m = Model::coloring(4).unwrap();
    let p = m.heat_bath_distribution(&g, &Configuration(vec![0, 1, 2]), 0).unwrap();
    assert_eq!(p, vec![0.5, 0.0, 0.0, 0.5]);
    let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)], 0).unwrap();
    let m = Model::coloring(3).unwrap();
    assert!(m.heat_bath_distribution(&g, &Configuration(vec![0, 0, 1, 2]), 0).is_err());
}

#[test]
fn ergodicity_examples() {
    let t = build_bary_tree(2, 2).unwrap();
    assert!(Model::ising(1.7).unwrap().is_ergodic(&t, DEFAULT_RAW_LIMIT).unwrap());
    assert!(Model::coloring(5).unwrap().is_ergodic(&t, DEFAULT_RAW_LIMIT).unwrap());
    assert!(!Model::coloring(2).unwrap().is_ergodic(&path_graph(2).unwrap(), DEFAULT_RAW_LIMIT).unwrap());
    assert!(Model::ising(0.1).unwrap().is_ergodic(&path_graph(30).unwrap(), DEFAULT_RAW_LIMIT).is_err());
}

#[test]
fn field_enters_gibbs_weight() {
    let g = path_graph(2).unwrap();
    let m = Model::ising_with_field(0.3, &[0.5, -0.2]).unwrap();
    let w = m.gibbs_weight(&g, &Configuration(vec![1, 0])).unwrap();
    let expected = (-0.3f64).exp() * 0.5f64.exp() * 0.2f64.exp();
    assert!((w - expected).abs() < 1e-12);
}

fn tree_or_cycle() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (2usize..4, 1u32..3).prop_map(|(b, r)| build_bary_tree(b, r).unwrap()),
        (3usize..8).prop_map(|n| cycle_graph(n).unwrap()),
        (1usize..8).prop_map(|n| path_graph(n).unwrap()),
    ]
}

proptest! {
    #[test]
    fn heat_bath_is_a_distribution_ignoring_current_spin(
        g in tree_or_cycle(),
        beta in 0.0f64..3.0,
        q in 2usize..5,
        seed in any::<u64>(),
    ) {
        let m = if q == 2 { Model::ising(beta).unwrap() } else { Model::potts(q, beta).unwrap() };
        let mut x = seed;
        let mut spins: Vec<u8> = (0..g.n())
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((x >> 40) % q as u64) as u8
            })
            .collect();
        let v = (seed % g.n() as u64) as usize;
        let p = m.heat_bath_distribution(&g, &Configuration(spins.clone()), v).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for a in 0..q as u8 {
            spins[v] = a;
            let p2 = m.heat_bath_distribution(&g, &Configuration(spins.clone()), v).unwrap();
            prop_assert_eq!(&p, &p2);
        }
        // ratios follow the kernel
        let base = m.gibbs_weight(&g, &Configuration(spins.clone())).unwrap();
        for a in 0..q as u8 {
            spins[v] = a;
            let w = m.gibbs_weight(&g, &Configuration(spins.clone())).unwrap();
            prop_assert!((w / base - p[a as usize] / p[q - 1]).abs() < 1e-9 * (1.0 + w / base));
        }
    }

    #[test]
    fn gibbs_weight_factorises_across_a_bridge(
        beta in 0.0f64..2.0,
        n1 in 1usize..5,
        n2 in 1usize..5,
        seed in any::<u64>(),
    ) {
        let g1 = path_graph(n1).unwrap();
        let g2 = cycle_graph(n2 + 2).unwrap();
        let n = n1 + n2 + 2;
        let mut edges = g1.edges();
        edges.extend(g2.edges().into_iter().map(|(u, v)| (u + n1, v + n1)));
        edges.push((n1 - 1, n1));
        let joined = Graph::from_edges(n, &edges, 0).unwrap();
        let spins: Vec<u8> = (0..n).map(|v| (seed >> (v % 64) & 1) as u8).collect();
        let m = Model::ising(beta).unwrap();
        let w = m.gibbs_weight(&joined, &Configuration(spins.clone())).unwrap();
        let w1 = m.gibbs_weight(&g1, &Configuration(spins[..n1].to_vec())).unwrap();
        let w2 = m.gibbs_weight(&g2, &Configuration(spins[n1..].to_vec())).unwrap();
        let bridge = m.alpha(spins[n1 - 1], spins[n1]);
        prop_assert!((w - w1 * w2 * bridge).abs() < 1e-9 * w);
    }
}
