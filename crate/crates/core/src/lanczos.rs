//! Restarted Lanczos for the smallest eigenpair of a symmetric positive
//! semidefinite operator on the orthogonal complement of a known null vector.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Smallest eigenvalue of `T` (tridiagonal: `alpha` diagonal, `beta` off).
fn tridiagonal_smallest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (value, eig.eigenvectors.column(idx).iter().copied().collect())
}

pub(crate) struct Options {
    pub basis: usize,
    pub restarts: usize,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            basis: 160,
            restarts: 60,
            tol: 1e-8,
        }
    }
}

/// `apply(x, y)` must write `A x` into `y`. `null` is a unit vector spanning
/// the kernel to be excluded.
pub(crate) fn smallest_excluding<F>(apply: F, null: &[f64], opts: &Options) -> Result<Eigenpair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = null.len();
    if dim < 2 {
        return Err(Error::param("operator needs dimension >= 2"));
    }
    let m = opts.basis.min(dim - 1).max(1);
    let mut start: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin())
        .collect();
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;
    for _ in 0..opts.restarts {
        let c = dot(&start, null);
        axpy(-c, null, &mut start);
        if normalize(&mut start) == 0.0 {
            return Err(Error::Numeric {
                message: "lanczos start vector vanished".into(),
                residual: f64::NAN,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        loop {
            let j = alphas.len();
            apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alphas.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    axpy(-c, b, &mut w);
                }
                let c = dot(&w, null);
                axpy(-c, null, &mut w);
            }
            let beta = dot(&w, &w).sqrt();
            let scale = alphas.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            if alphas.len() == m || beta <= 1e-12 * scale {
                break;
            }
            if alphas.len() % 20 == 0 {
                let (_, y) = tridiagonal_smallest(&alphas, &betas);
                if (beta * y[y.len() - 1]).abs() < 1e-2 * opts.tol {
                    break;
                }
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        let (_, y) = tridiagonal_smallest(&alphas, &betas);
        let mut x = vec![0.0; dim];
        for (coef, b) in y.iter().zip(&basis) {
            axpy(*coef, b, &mut x);
        }
        let c = dot(&x, null);
        axpy(-c, null, &mut x);
        normalize(&mut x);
        apply(&x, &mut w);
        let rayleigh = dot(&x, &w);
        let residual = w
            .iter()
            .zip(&x)
            .map(|(ax, xi)| (ax - rayleigh * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol {
            let pivot = x
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(1.0);
            if pivot < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(Eigenpair {
                value: rayleigh,
                vector: x,
                residual,
            });
        }
        last_residual = residual;
        start = x;
    }
    Err(Error::Numeric {
        message: "lanczos did not converge".into(),
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_laplacian_second_eigenvalue() {
        // Laplacian of the path on k vertices: eigenvalues 2 - 2cos(pi j / k)
        let k = 300;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..k {
                let mut s = 0.0;
                let mut deg = 0.0;
                if i > 0 {
                    s -= x[i - 1];
                    deg += 1.0;
                }
                if i + 1 < k {
                    s -= x[i + 1];
                    deg += 1.0;
                }
                y[i] = deg * x[i] + s;
            }
        };
        let null = vec![1.0 / (k as f64).sqrt(); k];
        let pair = smallest_excluding(apply, &null, &Options::default()).unwrap();
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / k as f64).cos();
        assert!((pair.value - expected).abs() < 1e-12, "{} vs {}", pair.value, expected);
        assert!(pair.residual <= 1e-8);
    }
}
