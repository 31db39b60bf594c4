//! Independent brute-force oracles shared by the integration tests. Nothing
//! here calls into the library's enumeration or eigen routines.

#![allow(dead_code)]

pub struct Brute {
    pub n: usize,
    pub q: usize,
    pub configs: Vec<Vec<u8>>,
    pub probs: Vec<f64>,
}

/// All q^n configurations in lexicographic order with normalised weights,
/// dropping zero-weight ones.
pub fn brute_gibbs(n: usize, q: usize, weight: impl Fn(&[u8]) -> f64) -> Brute {
    let total = q.pow(n as u32);
    let mut configs = Vec::new();
    let mut w = Vec::new();
    for code in 0..total {
        let mut s = vec![0u8; n];
        let mut c = code;
        for v in (0..n).rev() {
            s[v] = (c % q) as u8;
            c /= q;
        }
        let x = weight(&s);
        if x > 0.0 {
            configs.push(s);
            w.push(x);
        }
    }
    let z: f64 = w.iter().sum();
    Brute {
        n,
        q,
        configs,
        probs: w.iter().map(|x| x / z).collect(),
    }
}

pub fn ising_weight(edges: &[(usize, usize)], beta: f64) -> impl Fn(&[u8]) -> f64 + '_ {
    move |s: &[u8]| {
        let e: f64 = edges
            .iter()
            .map(|&(u, v)| if s[u] == s[v] { 1.0 } else { -1.0 })
            .sum();
        (beta * e).exp()
    }
}

/// Dense heat-bath generator: rate from σ to σ^{v,a} is μ(σ^{v,a}) divided
/// by the total μ-mass of the q configurations that differ only at v.
pub fn brute_generator(b: &Brute, weight: impl Fn(&[u8]) -> f64) -> Vec<Vec<f64>> {
    let dim = b.configs.len();
    let index = |s: &[u8]| b.configs.iter().position(|c| c == s);
    let mut gen = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for v in 0..b.n {
            let mut t = b.configs[i].clone();
            let ws: Vec<f64> = (0..b.q)
                .map(|a| {
                    t[v] = a as u8;
                    weight(&t)
                })
                .collect();
            let tot: f64 = ws.iter().sum();
            for a in 0..b.q {
                if a as u8 == b.configs[i][v] || ws[a] == 0.0 {
                    continue;
                }
                t[v] = a as u8;
                let j = index(&t).unwrap();
                gen[i][j] += ws[a] / tot;
            }
        }
        let row: f64 = gen[i].iter().sum();
        gen[i][i] = -row;
    }
    gen
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Spectral gap of −gen after symmetrising with √μ.
pub fn brute_gap(b: &Brute, gen: &[Vec<f64>]) -> f64 {
    let dim = gen.len();
    let s: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| -(b.probs[i] / b.probs[j]).sqrt() * gen[i][j])
                .collect()
        })
        .collect();
    // average out rounding asymmetry
    let s: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| 0.5 * (s[i][j] + s[j][i])).collect())
        .collect();
    jacobi_eigenvalues(s)[1]
}

pub fn ising_gap(n: usize, edges: &[(usize, usize)], beta: f64) -> f64 {
    let b = brute_gibbs(n, 2, ising_weight(edges, beta));
    let gen = brute_generator(&b, ising_weight(edges, beta));
    brute_gap(&b, &gen)
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
