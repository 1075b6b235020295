use serde::{Deserialize, Serialize};

use super::rigidity::sg_rigidity_k;
use super::steiner::steiner_triples;
use super::{DimensionReport, Mat, C64};
use crate::blockmat::BlockMatrix;
use crate::design::{design_rank_check, DesignParams, Mode, RankCheckOptions};
use crate::error::{Error, Result};
use crate::linalg::{column_space, frobenius, numerical_rank, numerical_rank_rel, rank_at_scale, solve_left};

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceArrangement {
    pub d: usize,
    pub ell: usize,
    /// `d x ell` basis matrices, one basis vector per column.
    pub bases: Vec<Mat>,
}

impl SubspaceArrangement {
    pub fn new(d: usize, ell: usize, bases: Vec<Mat>) -> Result<Self> {
        if d == 0 || ell == 0 {
            return Err(Error::InvalidArgument("d and ell must be >= 1".into()));
        }
        if let Some((i, b)) = bases.iter().enumerate().find(|(_, b)| b.shape() != (d, ell)) {
            return Err(Error::DimensionMismatch(format!(
                "basis {i} is {}x{}, expected {d}x{ell}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { d, ell, bases })
    }

    pub fn n(&self) -> usize {
        self.bases.len()
    }

    /// `dim(V_1 + .. + V_n)`.
    pub fn span_dim(&self) -> Result<usize> {
        let all = Mat::from_fn(self.d, self.n() * self.ell, |r, c| self.bases[c / self.ell][(r, c % self.ell)]);
        numerical_rank(&all, None)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SgOptions {
    /// Relative rank threshold for the span measurement.
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgSummary {
    pub n: usize,
    pub d: usize,
    pub ell: usize,
    pub delta: f64,
    pub k: usize,
    /// Member index sets of the special `2 ell`-spaces.
    pub special_spaces: Vec<Vec<usize>>,
    /// Per-member fraction of partners sharing a special space.
    pub delta_stat: Vec<f64>,
    /// `|A_C A_V| / (|A_C| |A_V|)`.
    pub orthogonality: f64,
    pub report: DimensionReport,
}

#[derive(Debug, Clone)]
pub struct SgAnalysis {
    /// `n ell x d`; rows are the basis vectors.
    pub a_v: Mat,
    pub a_c: BlockMatrix<f64>,
    pub summary: SgSummary,
}

fn stack(qs: &[&Mat]) -> Mat {
    let d = qs[0].nrows();
    let cols: usize = qs.iter().map(|q| q.ncols()).sum();
    let mut out = Mat::zeros(d, cols);
    let mut at = 0;
    for q in qs {
        out.columns_mut(at, q.ncols()).copy_from(*q);
        at += q.ncols();
    }
    out
}

pub fn sg_matrices(w: &SubspaceArrangement, delta: f64, opts: &SgOptions) -> Result<SgAnalysis> {
    let n = w.n();
    let ell = w.ell;
    if n < 3 {
        return Err(Error::InvalidArgument("need at least 3 subspaces".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let q: Vec<Mat> = w
        .bases
        .iter()
        .map(|b| column_space(b, frobenius(b)))
        .collect::<Result<_>>()?;
    if let Some(i) = (0..n).find(|&i| q[i].ncols() != ell) {
        return Err(Error::InvalidArgument(format!(
            "basis {} has rank {}, expected {ell}",
            i + 1,
            q[i].ncols()
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if numerical_rank(&stack(&[&q[i], &q[j]]), None)? != 2 * ell {
                return Err(Error::HypothesisFailure(format!(
                    "subspaces {} and {} intersect nontrivially",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let mut special: Vec<Vec<usize>> = Vec::new();
    let mut partner = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if partner[i][j] {
                continue;
            }
            let members: Vec<usize> = (0..n)
                .filter(|&x| {
                    x == i || x == j || numerical_rank(&stack(&[&q[i], &q[j], &q[x]]), None).ok() == Some(2 * ell)
                })
                .collect();
            if members.len() >= 3 {
                for &a in &members {
                    for &b in &members {
                        partner[a][b] = a != b;
                    }
                }
                special.push(members);
            }
        }
    }
    special.sort();
    special.dedup();

    let delta_stat: Vec<f64> = (0..n)
        .map(|i| partner[i].iter().filter(|&&x| x).count() as f64 / (n - 1) as f64)
        .collect();
    if let Some(i) = (0..n).find(|&i| delta_stat[i] < delta - 1e-12) {
        return Err(Error::HypothesisFailure(format!(
            "subspace {} has partner fraction {:.6} < delta = {delta}",
            i + 1,
            delta_stat[i]
        )));
    }

    let rows_b: Vec<Mat> = w.bases.iter().map(|b| b.transpose()).collect();
    let mut triples = Vec::new();
    for members in &special {
        for t in steiner_triples(members.len())? {
            triples.push(t.map(|x| members[x]));
        }
    }
    let mut a_c = BlockMatrix::zeros(triples.len(), n, ell, ell)?;
    for (row, &[a, b, c]) in triples.iter().enumerate() {
        let rhs = &rows_b[a];
        let lhs = Mat::from_fn(2 * ell, w.d, |r, col| {
            if r < ell { rows_b[b][(r, col)] } else { rows_b[c][(r - ell, col)] }
        });
        let x = solve_left(&lhs, rhs)?;
        let residual = frobenius(&(&x * &lhs - rhs));
        if residual > 1e-8 * frobenius(rhs).max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "relation for triple ({}, {}, {}) has residual {residual:e}",
                a + 1,
                b + 1,
                c + 1
            )));
        }
        let c2 = x.columns(0, ell).into_owned();
        let c3 = x.columns(ell, ell).into_owned();
        let scale = frobenius(&x);
        if rank_at_scale(&c2, scale)? < ell || rank_at_scale(&c3, scale)? < ell {
            return Err(Error::DegenerateTriple(format!(
                "singular coefficient for triple ({}, {}, {})",
                a + 1,
                b + 1,
                c + 1
            )));
        }
        a_c.set_block(row, a, &Mat::identity(ell, ell))?;
        a_c.set_block(row, b, &(-c2))?;
        a_c.set_block(row, c, &(-c3))?;
    }

    let a_v = Mat::from_fn(n * ell, w.d, |r, col| rows_b[r / ell][(r % ell, col)]);
    let flat = a_c.flatten();
    let orthogonality = frobenius(&(&flat * &a_v)) / (frobenius(&flat) * frobenius(&a_v));
    if orthogonality > 1e-6 {
        return Err(Error::NumericalFailure(format!(
            "|A_C A_V| relative size {orthogonality:e} exceeds 1e-6"
        )));
    }

    let k = sg_rigidity_k(delta, n);
    let design = design_rank_check(
        &a_c,
        DesignParams::new(3, k.max(1), 6)?,
        Mode::Square,
        &RankCheckOptions::default(),
    )?;
    let bound = (4.0 * ell as f64 / delta - 1e-9).ceil() as i64 - 1;
    let measured = numerical_rank_rel(&a_v, opts.tol_rank)?;
    Ok(SgAnalysis {
        a_v,
        a_c,
        summary: SgSummary {
            n,
            d: w.d,
            ell,
            delta,
            k,
            special_spaces: special,
            delta_stat,
            orthogonality,
            report: DimensionReport::new(bound, measured, Some(design)),
        },
    })
}

fn omega(a: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * a as f64 / 3.0)
}

fn check_every_pair_special(w: &SubspaceArrangement) -> Result<()> {
    let n = w.n();
    let ell = w.ell;
    for i in 0..n {
        for j in i + 1..n {
            let found = (0..n).any(|x| {
                x != i
                    && x != j
                    && numerical_rank(&stack(&[&w.bases[i], &w.bases[j], &w.bases[x]]), None).ok()
                        == Some(2 * ell)
            });
            if !found {
                return Err(Error::ConstructionFailure(format!(
                    "pair ({}, {}) spans no third member",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// The nine lines of `C^3` through `(0, 1, -w^a)`, `(1, 0, -w^a)`, `(1, -w^a, 0)`.
pub fn gen_hesse() -> Result<SubspaceArrangement> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut bases = Vec::with_capacity(9);
    for a in 0..3 {
        let w = -omega(a);
        bases.push(Mat::from_column_slice(3, 1, &[zero, one, w]));
        bases.push(Mat::from_column_slice(3, 1, &[one, zero, w]));
        bases.push(Mat::from_column_slice(3, 1, &[one, w, zero]));
    }
    let w = SubspaceArrangement::new(3, 1, bases)?;
    check_every_pair_special(&w)?;
    Ok(w)
}

/// `span{e_i, e_j}` for all `i < j` in `C^d`.
pub fn gen_orthopair(d: usize) -> Result<SubspaceArrangement> {
    if d < 2 {
        return Err(Error::InvalidArgument("orthopair needs d >= 2".into()));
    }
    let mut bases = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut b = Mat::zeros(d, 2);
            b[(i, 0)] = C64::new(1.0, 0.0);
            b[(j, 1)] = C64::new(1.0, 0.0);
            bases.push(b);
        }
    }
    SubspaceArrangement::new(d, 2, bases)
}

/// `h_i (x) C^ell` in `C^{3 ell}` for the Hesse lines `h_i`.
pub fn gen_product_sg(ell: usize) -> Result<SubspaceArrangement> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be >= 1".into()));
    }
    let hesse = gen_hesse()?;
    let bases = hesse
        .bases
        .iter()
        .map(|h| Mat::from_fn(3 * ell, ell, |r, c| if r % ell == c { h[(r / ell, 0)] } else { C64::new(0.0, 0.0) }))
        .collect();
    let w = SubspaceArrangement::new(3 * ell, ell, bases)?;
    if w.span_dim()? != 3 * ell {
        return Err(Error::ConstructionFailure("product arrangement does not span 3 ell".into()));
    }
    check_every_pair_special(&w)?;
    Ok(w)
}
