//! Block inverse iteration with Rayleigh-Ritz for the lowest eigenpairs of a
//! symmetric positive definite banded matrix.

use nalgebra::{DMatrix, SymmetricEigen};

use super::band::SymBand;
use super::operator::dot;

const MAX_ITERATIONS: usize = 2000;
/// Target for `(λ_wanted / λ_block)^k`, the eigenvector contraction.
const CONTRACTION_TARGET: f64 = 1e-18;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Returns the `count` lowest eigenpairs, ascending, with unit-norm vectors.
/// `None` when the matrix is not positive definite or the iteration stalls.
pub fn lowest_eigenpairs(a: &SymBand, count: usize) -> Option<Vec<Eigenpair>> {
    let n = a.dim();
    let block = (count + 4).min(n);
    let chol = a.cholesky()?;

    let mut x = initial_block(n, block);
    orthonormalize(&mut x);

    let mut ay = vec![0.0; n];
    for iteration in 1..=MAX_ITERATIONS {
        for col in x.iter_mut() {
            chol.solve_in_place(col);
        }
        orthonormalize(&mut x);

        let mut g = DMatrix::<f64>::zeros(block, block);
        let mut products = Vec::with_capacity(block);
        for col in &x {
            a.matvec(col, &mut ay);
            products.push(ay.clone());
        }
        for i in 0..block {
            for j in 0..=i {
                let v = 0.5 * (dot(&x[i], &products[j]) + dot(&x[j], &products[i]));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));

        let rotated: Vec<Vec<f64>> = order
            .iter()
            .map(|&k| {
                let mut v = vec![0.0; n];
                for (j, col) in x.iter().enumerate() {
                    let w = eig.eigenvectors[(j, k)];
                    v.iter_mut().zip(col).for_each(|(vi, ci)| *vi += w * ci);
                }
                v
            })
            .collect();
        x = rotated;

        let ritz: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if ritz[0] <= 0.0 {
            return None;
        }
        let ratio = ritz[count - 1] / ritz[block - 1];
        if ratio.powi(iteration as i32) < CONTRACTION_TARGET {
            let pairs: Vec<Eigenpair> = x
                .into_iter()
                .take(count)
                .zip(ritz)
                .map(|(mut vector, value)| {
                    let norm = dot(&vector, &vector).sqrt();
                    vector.iter_mut().for_each(|v| *v /= norm);
                    Eigenpair { value, vector }
                })
                .collect();
            return residuals_ok(a, &pairs).then_some(pairs);
        }
    }
    None
}

fn residuals_ok(a: &SymBand, pairs: &[Eigenpair]) -> bool {
    let mut av = vec![0.0; a.dim()];
    let scale = (0..a.dim()).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    pairs.iter().all(|p| {
        a.matvec(&p.vector, &mut av);
        let r = av
            .iter()
            .zip(&p.vector)
            .map(|(x, v)| (x - p.value * v).powi(2))
            .sum::<f64>()
            .sqrt();
        r < 1e-9 * scale
    })
}

/// Smooth, linearly independent start vectors with a deterministic jitter so
/// no wanted eigenvector is exactly orthogonal to the block.
fn initial_block(n: usize, block: usize) -> Vec<Vec<f64>> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..block)
        .map(|j| {
            (0..n)
                .map(|i| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    let jitter = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                    let s = (i as f64 + 0.5) / n as f64;
                    (std::f64::consts::PI * (j as f64 + 0.5) * s).cos() + 1e-3 * jitter
                })
                .collect()
        })
        .collect()
}

/// Modified Gram-Schmidt, applied twice.
fn orthonormalize(x: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..x.len() {
            let (done, rest) = x.split_at_mut(i);
            let v = &mut rest[0];
            for q in done.iter() {
                let p = dot(q, v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= p * qi);
            }
            let norm = dot(v, v).sqrt();
            v.iter_mut().for_each(|vi| *vi /= norm);
        }
    }
}
