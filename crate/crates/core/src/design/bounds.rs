//! Rank lower bounds for design matrices and diagonally dominant Hermitian matrices.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::certify::{verify_design, DesignCertificate, DesignParams};
use super::wellspread::Mode;
use crate::blockmat::{block_rank, BlockMatrix};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::scalar::{CMat, Real};
use crate::scaling::{sinkhorn_scale, ScalingOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankBound {
    pub value: f64,
    /// `ceil(value)`, computed exactly.
    pub ceil: u64,
}

impl RankBound {
    pub(crate) fn from_ratio(v: Ratio<i128>) -> Self {
        Self {
            value: v.to_f64().unwrap_or(f64::NAN),
            ceil: v.ceil().to_integer().max(0) as u64,
        }
    }
}

/// `cn - cn / (1 + X)` with `X = kr / (ct(q-1))`, i.e. `cnkr / (ct(q-1) + kr)`.
pub fn rank_lower_bound(q: usize, k: usize, t: usize, r: usize, c: usize, n: usize) -> Result<RankBound> {
    if q < 2 {
        return Err(Error::InvalidArgument("rank bound needs q >= 2".into()));
    }
    if [k, t, r, c, n].contains(&0) {
        return Err(Error::InvalidArgument("k, t, r, c, n must be >= 1".into()));
    }
    let [q, k, t, r, c, n] = [q, k, t, r, c, n].map(|x| x as i128);
    let value = Ratio::new(c * n * k * r, c * t * (q - 1) + k * r);
    Ok(RankBound::from_ratio(value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagDominance {
    /// Smallest diagonal entry.
    pub l: f64,
    /// Sum of squared off-diagonal magnitudes.
    pub s: f64,
    /// `L^2 n^2 / (n L^2 + S)`.
    pub bound: f64,
}

pub fn diag_dominant_bound<T: Real>(h: &HermitianMatrix<T>) -> Result<DiagDominance> {
    let m = h.matrix();
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut l = f64::INFINITY;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if i == j {
                let d = z.re.as_f64();
                if !(d > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "diagonal entry {i} is {d}, must be positive"
                    )));
                }
                l = l.min(d);
            } else {
                s += z.norm_sqr().as_f64();
            }
        }
    }
    let nf = n as f64;
    Ok(DiagDominance {
        l,
        s,
        bound: l * l * nf * nf / (nf * l * l + s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledDominance {
    pub converged: bool,
    pub final_ds: f64,
    pub dominance: DiagDominance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub certificate: DesignCertificate,
    pub bound: RankBound,
    pub measured_rank: usize,
    /// `measured_rank >= bound.ceil`.
    pub rank_ok: bool,
    /// Design verified and rank bound met.
    pub pass: bool,
    /// `(L, S)` dominance of `B^* B` for the scaled regular form `B`, when requested.
    pub scaled: Option<ScaledDominance>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RankCheckOptions {
    /// Regularize and scale `A`, then report the dominance of the scaled gram.
    pub scale: bool,
    pub scaling: ScalingOptions<f64>,
}

pub fn design_rank_check<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
    opts: &RankCheckOptions,
) -> Result<BoundReport> {
    let certificate = verify_design(a, params, mode)?;
    let bound = rank_lower_bound(params.q.max(2), params.k, params.t, a.r(), a.c(), a.n())?;
    let measured_rank = block_rank(a)?;
    let rank_ok = measured_rank as u64 >= bound.ceil;
    let scaled = if opts.scale && certificate.pass {
        scaled_dominance(a, params, mode, opts)?
    } else {
        None
    };
    Ok(BoundReport {
        pass: certificate.pass && rank_ok,
        certificate,
        bound,
        measured_rank,
        rank_ok,
        scaled,
    })
}

fn scaled_dominance<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
    opts: &RankCheckOptions,
) -> Result<Option<ScaledDominance>> {
    let b = match super::certify::regularize(a, params, mode) {
        Ok(b) => b.cast::<f64>(),
        Err(Error::CertificateMismatch(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (state, report) = sinkhorn_scale(&b, &opts.scaling)?;
    if report.failure.is_some() {
        return Ok(None);
    }
    let flat: CMat<f64> = state.current.flatten();
    let h = HermitianMatrix::from_gram(flat.adjoint() * &flat);
    Ok(Some(ScaledDominance {
        converged: report.converged,
        final_ds: report.final_ds,
        dominance: diag_dominant_bound(&h)?,
    }))
}
