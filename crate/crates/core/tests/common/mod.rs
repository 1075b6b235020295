//! Seeded random instances shared by the integration suites.
#![allow(dead_code)]

use blockrank::blockmat::BlockMatrix;
use blockrank::linalg::HermitianMatrix;
use blockrank::scalar::{cx, CMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat<f64> {
    CMat::from_fn(rows, cols, |_, _| {
        cx(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn gauss_block(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize, c: usize) -> BlockMatrix<f64> {
    BlockMatrix::from_dense(gauss_mat(rng, m * r, n * c), r, c).unwrap()
}

/// `B B^* + 0.1 I`, well conditioned positive definite.
pub fn random_pd(rng: &mut ChaCha8Rng, dim: usize) -> HermitianMatrix<f64> {
    let b = gauss_mat(rng, dim, dim);
    let x = &b * b.adjoint() + CMat::<f64>::identity(dim, dim).scale(0.1);
    HermitianMatrix::from_gram(x)
}

pub fn random_pds(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<HermitianMatrix<f64>> {
    (0..count).map(|_| random_pd(rng, dim)).collect()
}

pub fn frob_sq(m: &CMat<f64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `(|sum A_i|^2, t sum |A_i|^2)` in Frobenius norm for `t` Gaussian blocks.
pub fn block_cauchy_schwarz(rng: &mut ChaCha8Rng, t: usize, r: usize, c: usize) -> (f64, f64) {
    let blocks: Vec<CMat<f64>> = (0..t).map(|_| gauss_mat(rng, r, c)).collect();
    let total = blocks.iter().fold(CMat::<f64>::zeros(r, c), |acc, b| acc + b);
    let rhs = t as f64 * blocks.iter().map(frob_sq).sum::<f64>();
    (frob_sq(&total), rhs)
}

/// `(sum_{i != j} |C_i^* C_j|^2, r (1 - 1/q))` for a random row `C_1..C_q` normalized to
/// `sum C_i C_i^* = I_r`.
pub fn row_estimate(rng: &mut ChaCha8Rng, q: usize, r: usize, c: usize) -> (f64, f64) {
    let a = gauss_block(rng, 1, q, r, c);
    let row = blockrank::blockmat::row_normalize(&a).unwrap().matrix;
    let cs: Vec<CMat<f64>> = (0..q).map(|j| row.block(0, j).into_owned()).collect();
    let mut s = 0.0;
    for i in 0..q {
        for j in 0..q {
            if i != j {
                s += frob_sq(&(cs[i].adjoint() * &cs[j]));
            }
        }
    }
    (s, r as f64 * (1.0 - 1.0 / q as f64))
}

/// Random Hermitian matrix with diagonal in `[1, 3]` and small off-diagonal entries.
pub fn random_dominant(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
    let spread: f64 = rng.random_range(0.01..1.0);
    let mut h = CMat::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = cx(rng.random_range(1.0..3.0), 0.0);
        for j in i + 1..n {
            let z = cx(
                spread * rng.sample::<f64, _>(StandardNormal),
                spread * rng.sample::<f64, _>(StandardNormal),
            );
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(h).unwrap()
}

/// Gram matrix of `n` random unit vectors in `C^k`: rank `min(n, k)`, unit diagonal.
pub fn random_unit_gram(rng: &mut ChaCha8Rng, n: usize, k: usize) -> HermitianMatrix<f64> {
    let mut v = gauss_mat(rng, k, n);
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        col /= cx(norm, 0.0);
    }
    HermitianMatrix::from_gram(v.adjoint() * v)
}
