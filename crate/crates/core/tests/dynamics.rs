mod common;

use common::*;
use glauber_core::dynamics::*;
use glauber_core::exact::{enumerate_gibbs, GibbsTable, DEFAULT_RAW_LIMIT};
use glauber_core::graph::{build_bary_tree, path_graph, Graph};
use glauber_core::model::{beta_of_theta, ising_value, Configuration, Model};
use glauber_core::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn code(s: &[u8], q: usize) -> usize {
    s.iter().fold(0usize, |acc, &x| acc * q + x as usize)
}

fn draw(gt: &GibbsTable, rng: &mut impl Rng) -> Vec<u8> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for i in 0..gt.len() {
        acc += gt.prob(i);
        if u < acc {
            return gt.config(i).to_vec();
        }
    }
    gt.config(gt.len() - 1).to_vec()
}

/// Max over cells of |count − N·p| / sqrt(N·p(1−p)).
fn max_z(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .map(|(&c, &p)| (c as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt())
        .fold(0.0, f64::max)
}

fn mat_vec_power(m: &[Vec<f64>], start: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; m.len()];
    x[start] = 1.0;
    for _ in 0..k {
        x = (0..m.len()).map(|j| (0..m.len()).map(|i| x[i] * m[i][j]).sum()).collect();
    }
    x
}

/// M = I + 𝓛/n from the brute-force generator.
fn discrete_matrix(g: &Graph, beta: f64) -> (Brute, Vec<Vec<f64>>) {
    let edges = g.edges();
    let b = brute_gibbs(g.n(), 2, ising_weight(&edges, beta));
    let gen = brute_generator(&b, ising_weight(&edges, beta));
    let n = g.n() as f64;
    let m = (0..gen.len())
        .map(|i| (0..gen.len()).map(|j| (i == j) as u8 as f64 + gen[i][j] / n).collect())
        .collect();
    (b, m)
}

#[test]
fn event_log_replays_and_repeats() {
    let g = build_bary_tree(2, 3).unwrap();
    let m = Model::ising(0.6).unwrap();
    let init = Configuration::constant(g.n(), 1);
    let a = simulate_ct(&m, &g, &init, 5.0, 42, 3).unwrap();
    let b = simulate_ct(&m, &g, &init, 5.0, 42, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.replay(), a.final_config);
    assert!(a.events.windows(2).all(|w| w[0].time < w[1].time));
    assert!(a.events.last().unwrap().time <= 5.0);
    let c = simulate_ct(&m, &g, &init, 5.0, 42, 4).unwrap();
    assert_ne!(a.events, c.events);
    assert!(a.to_csv().starts_with("time,vertex,spin\n"));
}

#[test]
fn event_count_is_about_n_t() {
    let g = build_bary_tree(2, 4).unwrap();
    let m = Model::ising(0.2).unwrap();
    let log = simulate_ct(&m, &g, &Configuration::constant(g.n(), 0), 200.0, 1, 0).unwrap();
    let expected = g.n() as f64 * 200.0;
    assert!((log.events.len() as f64 - expected).abs() < 4.0 * expected.sqrt());
}

#[test]
fn free_dynamics_has_zero_magnetisation() {
    let g = build_bary_tree(2, 3).unwrap();
    let m = Model::ising(0.0).unwrap();
    let log = simulate_ct(&m, &g, &Configuration::constant(g.n(), 1), 100_000.0 / g.n() as f64, 9, 0).unwrap();
    assert!(log.events.len() > 90_000);
    let k = log.events.len() as f64;
    let mean: f64 = log.events.iter().map(|e| ising_value(e.spin)).sum::<f64>() / k;
    assert!(mean.abs() < 4.0 / k.sqrt(), "{mean}");
}

#[test]
fn single_edge_occupancy_matches_gibbs() {
    let g = path_graph(2).unwrap();
    let m = Model::ising(0.8).unwrap();
    let gt = enumerate_gibbs(&m, &g, DEFAULT_RAW_LIMIT).unwrap();
    // law at time t by uniformisation of the brute-force generator
    let (b, mm) = discrete_matrix(&g, 0.8);
    let start = b.configs.iter().position(|c| c == &[1, 1]).unwrap();
    for t in [1.0, 30.0] {
        let rate = g.n() as f64 * t;
        let mut law = vec![0.0; 4];
        let mut w = (-rate).exp();
        for k in 0..200 {
            let pk = mat_vec_power(&mm, start, k);
            law.iter_mut().zip(&pk).for_each(|(l, p)| *l += w * p);
            w *= rate / (k + 1) as f64;
        }
        let mut counts = vec![0u64; 4];
        for rep in 0..20_000 {
            let log = simulate_ct(&m, &g, &Configuration(vec![1, 1]), t, 5, rep).unwrap();
            counts[code(&log.final_config.0, 2)] += 1;
        }
        assert!(max_z(&counts, &law) < 4.0, "t={t}");
        if t > 10.0 {
            assert!(tv(&law, gt.probs()) < 1e-3);
        }
    }
}

#[test]
fn discrete_chain_matches_matrix_power() {
    let g = path_graph(2).unwrap();
    let beta = 0.9;
    let (b, mm) = discrete_matrix(&g, beta);
    let m = Model::ising(beta).unwrap();
    let mut rng = stream(17, 0);
    for steps in [0u64, 1, 2, 5] {
        let start = b.configs.iter().position(|c| c == &[1, 1]).unwrap();
        let exact = mat_vec_power(&mm, start, steps as usize);
        let mut counts = vec![0u64; 4];
        for _ in 0..40_000 {
            let s = simulate_discrete(&m, &g, &Configuration(vec![1, 1]), steps, &mut rng).unwrap();
            counts[code(&s.0, 2)] += 1;
        }
        if steps == 0 {
            assert_eq!(counts[start], 40_000);
        } else {
            assert!(max_z(&counts, &exact) < 4.0, "steps {steps}");
        }
    }
    let one = path_graph(1).unwrap();
    let mut plus = 0;
    for _ in 0..10_000 {
        plus += simulate_discrete(&Model::ising(2.0).unwrap(), &one, &Configuration(vec![0]), 1, &mut rng).unwrap().0[0] as u32;
    }
    assert!((plus as f64 - 5000.0).abs() < 4.0 * 50.0);
}

#[test]
fn stationarity_is_preserved() {
    let g = build_bary_tree(2, 1).unwrap();
    let m = Model::ising(beta_of_theta(0.7)).unwrap();
    let gt = enumerate_gibbs(&m, &g, DEFAULT_RAW_LIMIT).unwrap();
    let mut rng = stream(23, 0);
    let mut counts = vec![0u64; gt.len()];
    for rep in 0..100_000u64 {
        let init = Configuration(draw(&gt, &mut rng));
        let log = simulate_ct(&m, &g, &init, 0.7, 23, rep + 1).unwrap();
        counts[gt.index_of(&log.final_config.0).unwrap()] += 1;
    }
    assert!(max_z(&counts, gt.probs()) < 3.0);
}

#[test]
fn disjoint_partition_examples() {
    let t = build_bary_tree(2, 2).unwrap();
    let p = block_partition_disjoint(&t, 1).unwrap();
    assert_eq!(p.blocks.len(), 3);
    assert_eq!(p.blocks[0], vec![0]);
    assert_eq!(p.blocks[1].len(), 3);
    assert_eq!(p.blocks[2].len(), 3);
    let s = block_partition_disjoint(&t, 2).unwrap();
    assert!(s.blocks.iter().all(|b| b.len() == 1));
    assert!(block_partition_disjoint(&t, 3).is_err());
}

#[test]
fn overlapping_partition_examples() {
    let t = build_bary_tree(2, 1).unwrap();
    let p = block_partition_overlapping(&t, 0).unwrap();
    assert_eq!(p.blocks, vec![vec![0], vec![1], vec![2]]);
    let p = block_partition_overlapping(&t, 1).unwrap();
    assert!(p.blocks.contains(&vec![0, 1, 2]));
    assert_eq!(p.blocks.len(), 4);
    assert!(p.multiplicity(3).iter().all(|&c| c == 2));
}

#[test]
fn single_site_block_is_heat_bath() {
    let g = build_bary_tree(2, 2).unwrap();
    let m = Model::ising(0.7).unwrap();
    let sigma = Configuration(vec![1, 0, 1, 1, 1, 0, 0]);
    let p = m.heat_bath_distribution(&g, &sigma, 1).unwrap();
    let mut rng = stream(4, 0);
    let mut counts = vec![0u64; 2];
    for _ in 0..50_000 {
        let s = block_resample(&m, &g, &sigma, &[1], &mut rng).unwrap();
        counts[s.0[1] as usize] += 1;
    }
    assert!(max_z(&counts, &p) < 4.0);
}

#[test]
fn free_block_is_uniform() {
    let g = build_bary_tree(2, 2).unwrap();
    let m = Model::ising(0.0).unwrap();
    let mut rng = stream(5, 0);
    let sigma = Configuration::constant(7, 1);
    let mut counts = vec![0u64; 8];
    for _ in 0..40_000 {
        let s = block_resample(&m, &g, &sigma, &[1, 3, 4], &mut rng).unwrap();
        counts[code(&[s.0[1], s.0[3], s.0[4]], 2)] += 1;
    }
    assert!(max_z(&counts, &[0.125; 8]) < 4.0);
}

/// Conditional law of the spins on `block` given `sigma` outside it.
fn conditional_oracle(g: &Graph, beta: f64, sigma: &[u8], block: &[usize]) -> Vec<f64> {
    let edges = g.edges();
    let w = ising_weight(&edges, beta);
    let k = block.len();
    let mut probs = vec![0.0; 1 << k];
    for c in 0..1usize << k {
        let mut s = sigma.to_vec();
        for (i, &v) in block.iter().enumerate() {
            s[v] = (c >> (k - 1 - i) & 1) as u8;
        }
        probs[c] = w(&s);
    }
    let z: f64 = probs.iter().sum();
    probs.iter().map(|p| p / z).collect()
}

#[test]
fn subtree_block_conditional_law() {
    let g = build_bary_tree(2, 2).unwrap();
    let beta = 0.6;
    let m = Model::ising(beta).unwrap();
    let sigma = vec![0u8, 1, 1, 0, 1, 1, 0];
    let mut rng = stream(6, 0);
    for block in [vec![1usize, 3, 4], vec![0, 1, 2], vec![2, 5, 6]] {
        let oracle = conditional_oracle(&g, beta, &sigma, &block);
        let mut counts = vec![0u64; 8];
        for _ in 0..100_000 {
            let s = block_resample(&m, &g, &Configuration(sigma.clone()), &block, &mut rng).unwrap();
            let c = block.iter().map(|&v| s.0[v]).collect::<Vec<_>>();
            counts[code(&c, 2)] += 1;
        }
        assert!(max_z(&counts, &oracle) < 3.0, "{block:?}");
    }
}

#[test]
fn non_tree_block_uses_enumeration() {
    let g = glauber_core::graph::cycle_graph(5).unwrap();
    let m = Model::ising(0.5).unwrap();
    let sampler = BlockSampler::new(&m, &g, &[0, 1, 2, 3, 4]).unwrap();
    assert!(!sampler.is_tree());
    assert_eq!(sampler.uniforms_needed(), 1);
    let big = glauber_core::graph::cycle_graph(20).unwrap();
    let all: Vec<usize> = (0..20).collect();
    assert!(BlockSampler::new(&m, &big, &all).is_err());
}

#[test]
fn singleton_block_dynamics_equals_single_site_dynamics() {
    let g = build_bary_tree(2, 1).unwrap();
    let beta = 0.7;
    let m = Model::ising(beta).unwrap();
    let (b, mm) = discrete_matrix(&g, beta);
    let start = b.configs.iter().position(|c| c == &[1, 1, 1]).unwrap();
    let exact = mat_vec_power(&mm, start, 3);
    let part = block_partition_disjoint(&g, 1).unwrap();
    assert!(part.blocks.iter().all(|blk| blk.len() == 1));
    let mut rng = stream(8, 0);
    let mut blocks = vec![0u64; 8];
    let mut sites = vec![0u64; 8];
    let init = Configuration(vec![1, 1, 1]);
    for _ in 0..60_000 {
        blocks[code(&simulate_block_discrete(&m, &g, &init, &part, 3, &mut rng).unwrap().0, 2)] += 1;
        sites[code(&simulate_discrete(&m, &g, &init, 3, &mut rng).unwrap().0, 2)] += 1;
    }
    assert!(max_z(&blocks, &exact) < 4.0);
    assert!(max_z(&sites, &exact) < 4.0);
}

#[test]
fn block_dynamics_preserves_gibbs() {
    let g = build_bary_tree(2, 2).unwrap();
    let m = Model::ising(0.5).unwrap();
    let gt = enumerate_gibbs(&m, &g, DEFAULT_RAW_LIMIT).unwrap();
    let part = block_partition_overlapping(&g, 1).unwrap();
    let mut rng = stream(10, 0);
    let mut counts = vec![0u64; gt.len()];
    for _ in 0..60_000 {
        let init = Configuration(draw(&gt, &mut rng));
        let s = simulate_block_ct(&m, &g, &init, &part, 0.3, &mut rng).unwrap();
        counts[gt.index_of(&s.0).unwrap()] += 1;
    }
    assert!(max_z(&counts, gt.probs()) < 4.0);
}

#[test]
fn coupled_chains_audit() {
    let g = build_bary_tree(2, 3).unwrap();
    let m = Model::ising(0.8).unwrap();
    let mut rng = stream(12, 0);
    let mut sigma = vec![1u8; g.n()];
    let mut eta = vec![1u8; g.n()];
    for _ in 0..2000 {
        coupled_step(&m, &g, &mut sigma, &mut eta, None, &mut rng).unwrap();
        assert_eq!(sigma, eta);
    }
    let mut sigma = vec![1u8; g.n()];
    let mut eta = vec![0u8; g.n()];
    let log = coupled_trajectory(&m, &g, &mut sigma, &mut eta, None, 30.0, &mut rng).unwrap();
    assert!(!log.is_empty());
    for e in &log {
        if e.neighborhood_agreed {
            assert!(!e.disagree_after);
        }
    }
    // frozen η at the root keeps its spin
    let mut frozen = vec![false; g.n()];
    frozen[0] = true;
    let mut sigma = vec![1u8; g.n()];
    let mut eta = vec![0u8; g.n()];
    coupled_trajectory(&m, &g, &mut sigma, &mut eta, Some(&frozen), 20.0, &mut rng).unwrap();
    assert_eq!(eta[0], 0);
}

#[test]
fn free_coupling_coalesces_every_ring() {
    let g = path_graph(3).unwrap();
    let m = Model::ising(0.0).unwrap();
    let mut rng = stream(13, 0);
    let mut sigma = vec![1u8, 0, 1];
    let mut eta = vec![0u8, 1, 0];
    for _ in 0..20 {
        let v = coupled_step(&m, &g, &mut sigma, &mut eta, None, &mut rng).unwrap();
        assert_eq!(sigma[v], eta[v]);
    }
}

#[test]
fn monotone_coupling_examples() {
    let one = path_graph(1).unwrap();
    let mut rng = stream(14, 0);
    match coupling_time_monotone(&Model::ising(1.0).unwrap(), &one, 100.0, &mut rng).unwrap() {
        Coalescence::Coalesced { rings, .. } => assert_eq!(rings, 1),
        c => panic!("{c:?}"),
    }
    // free chain: coalescence is the time every site has rung, mean H_n
    let g = build_bary_tree(2, 2).unwrap();
    let reps = 20_000;
    let mut total = 0.0;
    for _ in 0..reps {
        total += coupling_time_monotone(&Model::ising(0.0).unwrap(), &g, 1e6, &mut rng)
            .unwrap()
            .time()
            .unwrap();
    }
    let harmonic: f64 = (1..=7).map(|k| 1.0 / k as f64).sum();
    assert!((total / reps as f64 - harmonic).abs() < 0.03);
    assert!(matches!(
        coupling_time_monotone(&Model::ising(3.0).unwrap(), &build_bary_tree(2, 4).unwrap(), 0.01, &mut rng).unwrap(),
        Coalescence::Censored { .. }
    ));
    assert!(coupling_time_monotone(&Model::potts(3, 1.0).unwrap(), &g, 1.0, &mut rng).is_err());
}

#[test]
fn monotone_coupling_median_is_stable_across_seeds() {
    let g = build_bary_tree(2, 2).unwrap();
    let m = Model::ising(0.3).unwrap();
    let median = |seed: u64| {
        let mut rng = stream(seed, 0);
        let mut ts: Vec<f64> = (0..501)
            .map(|_| coupling_time_monotone(&m, &g, 1e4, &mut rng).unwrap().time().unwrap())
            .collect();
        ts.sort_by(f64::total_cmp);
        ts[250]
    };
    let (a, b) = (median(1), median(2));
    assert!(a / b < 2.0 && b / a < 2.0);
}

#[test]
fn fpp_inside_source_is_exponential() {
    let g = build_bary_tree(2, 2).unwrap();
    let mut rng = stream(15, 0);
    let a = [3usize, 4, 5];
    let b = [0usize, 3, 4, 5, 6];
    let reps = 10_000;
    let mean: f64 = (0..reps)
        .map(|_| fpp_disagreement_time(&g, &b, &a, &mut rng).unwrap())
        .sum::<f64>()
        / reps as f64;
    // Exp(3): mean 1/3, standard error (1/3)/sqrt(reps)
    assert!((mean - 1.0 / 3.0).abs() < 3.0 * (1.0 / 3.0) / (reps as f64).sqrt());
}

#[test]
fn fpp_grows_linearly_along_a_path() {
    let g = path_graph(41).unwrap();
    let mut rng = stream(16, 0);
    let ds = [5usize, 10, 20, 40];
    let means: Vec<f64> = ds
        .iter()
        .map(|&d| {
            (0..10_000)
                .map(|_| fpp_disagreement_time(&g, &[0], &[d], &mut rng).unwrap())
                .sum::<f64>()
                / 10_000.0
        })
        .collect();
    let slope = (means[3] - means[0]) / (ds[3] - ds[0]) as f64;
    assert!((0.5..=1.5).contains(&slope), "{slope}");
    assert!(fpp_disagreement_time(&g, &[], &[1], &mut rng).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn disjoint_block_count(b in 2usize..4, depth in 1u32..5, top in 0u32..5) {
        let top = top.min(depth);
        let g = build_bary_tree(b, depth).unwrap();
        let p = block_partition_disjoint(&g, top).unwrap();
        prop_assert_eq!(p.blocks.len(), (b.pow(top) - 1) / (b - 1) + b.pow(top));
        prop_assert!(p.multiplicity(g.n()).iter().all(|&c| c == 1));
    }

    #[test]
    fn overlapping_membership(b in 2usize..4, depth in 1u32..5, h in 0u32..5) {
        let g = build_bary_tree(b, depth).unwrap();
        let p = block_partition_overlapping(&g, h).unwrap();
        prop_assert!(p.multiplicity(g.n()).iter().all(|&c| c == h as usize + 1));
    }

    #[test]
    fn replay_determinism(seed in any::<u64>(), beta in 0.0f64..2.0) {
        let g = build_bary_tree(3, 2).unwrap();
        let m = Model::ising(beta).unwrap();
        let init = Configuration::constant(g.n(), 0);
        let a = simulate_ct(&m, &g, &init, 2.0, seed, 0).unwrap();
        let b = simulate_ct(&m, &g, &init, 2.0, seed, 0).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.replay(), a.final_config);
    }
}
