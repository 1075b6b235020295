//! Seeded random design matrices in regular form.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::blockmat::BlockMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cx, CMat, Real};

/// `nk x n` grid of `r x r` Gaussian blocks. Row `jk + l` holds a block in column `j`
/// plus `q - 1` more, so every column has `k` nonsingular (hence well-spread) blocks in
/// its own band.
///
/// The extra columns come from `q - 1` random cyclic shifts of a random column order,
/// drawn per `l`. Each shift is a bijection on columns, so every column carries exactly
/// `kq` blocks. Uniform choices leave some columns light, and those instances are only
/// approximately scalable: Sinkhorn then creeps along at `ds ~ 1/k^2`.
pub fn random_regular_design<T: Real>(
    n: usize,
    k: usize,
    q: usize,
    r: usize,
    seed: u64,
) -> Result<BlockMatrix<T>> {
    if n == 0 || k == 0 || q == 0 || r == 0 {
        return Err(Error::InvalidArgument("n, k, q, r must be >= 1".into()));
    }
    if q > n {
        return Err(Error::InvalidArgument(format!("q = {q} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |rng: &mut ChaCha8Rng| -> CMat<T> {
        CMat::from_fn(r, r, |_, _| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            cx(T::lit(a), T::lit(b))
        })
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut pos = vec![0; n];
    for (p, &j) in order.iter().enumerate() {
        pos[j] = p;
    }
    let shifts: Vec<Vec<usize>> = (0..k)
        .map(|_| sample(&mut rng, n - 1, q - 1).into_iter().map(|s| s + 1).collect())
        .collect();
    let mut a = BlockMatrix::zeros(n * k, n, r, r)?;
    for j in 0..n {
        for (l, ls) in shifts.iter().enumerate() {
            let row = j * k + l;
            a.set_block(row, j, &block(&mut rng))?;
            for &s in ls {
                a.set_block(row, order[(pos[j] + s) % n], &block(&mut rng))?;
            }
        }
    }
    Ok(a)
}
