use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::points::{delta_block, generic_transform, triple_residual, DEFAULT_COLLINEAR_TOL};
use super::{Mat, PointList, Vector};
use crate::blockmat::BlockMatrix;
use crate::design::{
    design_rank_check, select_well_spread, BoundReport, DesignParams, Mode, RankCheckOptions,
    WellSpreadOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, numerical_rank_rel};
use crate::scalar::re;

pub fn rigidity_matrix(points: &PointList, triples: &[[usize; 3]]) -> Result<BlockMatrix<f64>> {
    rigidity_matrix_with_tol(points, triples, DEFAULT_COLLINEAR_TOL)
}

/// One row per triple `(i, j, k)` with `Delta(v_j - v_k)`, `Delta(v_k - v_i)`,
/// `Delta(v_i - v_j)` in columns `i`, `j`, `k`.
pub fn rigidity_matrix_with_tol(
    points: &PointList,
    triples: &[[usize; 3]],
    tol: f64,
) -> Result<BlockMatrix<f64>> {
    let n = points.n();
    let d = points.d;
    if d < 2 {
        return Err(Error::InvalidArgument("rigidity needs d >= 2".into()));
    }
    if triples.is_empty() {
        return Err(Error::InvalidArgument("no triples".into()));
    }
    let v = &points.points;
    let mut a = BlockMatrix::zeros(triples.len(), n, d - 1, d)?;
    for (row, &[i, j, k]) in triples.iter().enumerate() {
        if i >= n || j >= n || k >= n || i == j || j == k || i == k {
            return Err(Error::InvalidArgument(format!(
                "triple {} = ({}, {}, {}) is not three distinct points of 1..={n}",
                row + 1,
                i + 1,
                j + 1,
                k + 1
            )));
        }
        let residual = triple_residual(v, [i, j, k]);
        if residual > tol {
            return Err(Error::InvalidTriple {
                i: i + 1,
                j: j + 1,
                k: k + 1,
                residual,
            });
        }
        a.set_block(row, i, &delta_block(&(&v[j] - &v[k])))?;
        a.set_block(row, j, &delta_block(&(&v[k] - &v[i])))?;
        a.set_block(row, k, &delta_block(&(&v[i] - &v[j])))?;
    }
    Ok(a)
}

/// Tangent vectors at `V` of the projective action, one per generator of the trace-zero
/// `(d+1) x (d+1)` matrices: `E_ab` for `a != b` and `E_aa - E_dd` for `a < d`.
pub fn projective_motion_basis(points: &PointList) -> Vec<Vector> {
    let d = points.d;
    let mut gens = Vec::with_capacity(d * d + 2 * d);
    for a in 0..=d {
        for b in 0..=d {
            if a != b {
                let mut g = Mat::zeros(d + 1, d + 1);
                g[(a, b)] = re(1.0);
                gens.push(g);
            }
        }
    }
    for a in 0..d {
        let mut g = Mat::zeros(d + 1, d + 1);
        g[(a, a)] = re(1.0);
        g[(d, d)] = re(-1.0);
        gens.push(g);
    }
    gens.iter()
        .map(|g| {
            let mut out = Vector::zeros(points.n() * d);
            for (i, v) in points.points.iter().enumerate() {
                let x = Vector::from_fn(d + 1, |r, _| if r < d { v[r] } else { re(1.0) });
                let z = g * x;
                for c in 0..d {
                    out[i * d + c] = z[c] - v[c] * z[d];
                }
            }
            out
        })
        .collect()
}

/// `floor(2 d^2 t n / (2 d t + k (d - 1)))`, exact for rational `k`.
pub fn rigidity_formula(d: usize, t: usize, k: Ratio<i128>, n: usize) -> Result<u64> {
    if d < 2 || t == 0 || n == 0 || k <= Ratio::from_integer(0) {
        return Err(Error::InvalidArgument("need d >= 2 and t, k, n > 0".into()));
    }
    let (d, t, n) = (d as i128, t as i128, n as i128);
    let num = Ratio::from_integer(2 * d * d * t * n);
    let den = Ratio::from_integer(2 * d * t) + k * Ratio::from_integer(d - 1);
    Ok((num / den).floor().to_integer() as u64)
}

/// `floor(3 delta (n - 1))`, the per-point triple count of a `delta`-SG configuration.
pub fn sg_rigidity_k(delta: f64, n: usize) -> usize {
    (3.0 * delta * (n as f64 - 1.0) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy)]
pub struct RigidityOptions {
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub seed: u64,
    pub tol_collinear: f64,
    /// Relative rank threshold; default `1e-10`.
    pub tol_rank: Option<f64>,
}

impl Default for RigidityOptions {
    fn default() -> Self {
        Self {
            k: None,
            t: None,
            seed: 0,
            tol_collinear: DEFAULT_COLLINEAR_TOL,
            tol_rank: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub n: usize,
    pub d: usize,
    pub triples: usize,
    pub k: usize,
    pub t: usize,
    /// `floor(2 d^2 t n / (2 d t + k (d - 1)))`.
    pub r: u64,
    pub rank: usize,
    /// Tangent-space dimension bound `dn - rank`.
    pub measured: usize,
    pub pass: bool,
    pub motions: usize,
    pub motion_rank: usize,
    /// Largest `|A m| / (|A| |m|)` over the projective motions.
    pub max_motion_residual: f64,
    pub design: BoundReport,
}

pub fn rigidity_bound(
    points: &PointList,
    triples: &[[usize; 3]],
    opts: &RigidityOptions,
) -> Result<RigidityReport> {
    let n = points.n();
    let d = points.d;
    let moved = generic_transform(points, opts.seed)?;
    let a = rigidity_matrix_with_tol(&moved, triples, opts.tol_collinear)?;

    let mut count = vec![0usize; n];
    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    for &[i, j, k] in triples {
        for x in [i, j, k] {
            count[x] += 1;
        }
        for (x, y) in [(i, j), (i, k), (j, k)] {
            *pairs.entry((x.min(y), x.max(y))).or_default() += 1;
        }
    }
    let k = opts.k.unwrap_or_else(|| count.iter().copied().min().unwrap_or(0));
    if k == 0 {
        return Err(Error::HypothesisFailure("some point lies in no triple (k = 0)".into()));
    }
    if let Some(i) = (0..n).find(|&i| count[i] < k) {
        return Err(Error::HypothesisFailure(format!(
            "point {} lies in {} triples, fewer than k = {k}",
            i + 1,
            count[i]
        )));
    }
    let max_pair = pairs.values().copied().max().unwrap_or(0);
    let t = opts.t.unwrap_or(max_pair.max(1));
    if let Some((&(x, y), &c)) = pairs.iter().filter(|(_, &c)| c > t).min() {
        return Err(Error::HypothesisFailure(format!(
            "points {} and {} share {c} triples, more than t = {t}",
            x + 1,
            y + 1
        )));
    }
    let ws = WellSpreadOptions::default();
    for i in 0..n {
        let blocks: Vec<Mat> = triples
            .iter()
            .enumerate()
            .filter(|(_, tr)| tr.contains(&i))
            .map(|(row, _)| a.block(row, i).into_owned())
            .collect();
        if select_well_spread(&blocks, k, Mode::KernelLine, &ws)?.is_none() {
            return Err(Error::HypothesisFailure(format!(
                "point {}: no {k} of its triples avoid concentrating on a common affine subspace",
                i + 1
            )));
        }
    }

    let flat = a.flatten();
    let rank = numerical_rank_rel(&flat, opts.tol_rank)?;
    let measured = d * n - rank;
    let r = rigidity_formula(d, t, Ratio::from_integer(k as i128), n)?;

    let motions = projective_motion_basis(&moved);
    let a_norm = frobenius(&flat);
    let max_motion_residual = motions
        .iter()
        .map(|m| (&flat * m).norm() / (a_norm * m.norm()))
        .fold(0.0, f64::max);
    let motion_mat = Mat::from_columns(&motions);
    let motion_rank = numerical_rank_rel(&motion_mat, None)?;

    let design = design_rank_check(
        &a,
        DesignParams::new(3, k, t)?,
        Mode::KernelLine,
        &RankCheckOptions::default(),
    )?;
    Ok(RigidityReport {
        n,
        d,
        triples: triples.len(),
        k,
        t,
        r,
        rank,
        measured,
        pass: measured as u64 <= r,
        motions: motions.len(),
        motion_rank,
        max_motion_residual,
        design,
    })
}
