//! Design-matrix certification and regular form.

use serde::{Deserialize, Serialize};

use super::wellspread::{check_well_spread_with, select_well_spread, Mode, WellSpreadOptions};
use crate::blockmat::BlockMatrix;
use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

/// `(q, k, t)`: at most `q` nonzero blocks per row, at least `k` well-spread blocks per
/// column, at most `t` shared support rows per column pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignParams {
    pub q: usize,
    pub k: usize,
    pub t: usize,
}

impl DesignParams {
    pub fn new(q: usize, k: usize, t: usize) -> Result<Self> {
        if q == 0 || k == 0 || t == 0 {
            return Err(Error::InvalidArgument(format!(
                "design parameters must be >= 1, got ({q}, {k}, {t})"
            )));
        }
        Ok(Self { q, k, t })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnCertificate {
    pub column: usize,
    pub nonzero: usize,
    /// Size of the certified well-spread subset.
    pub certified: usize,
    /// Rows of the certified subset.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub params: DesignParams,
    pub mode: Mode,
    /// Measured `(q', k', t')`.
    pub actual: DesignParams,
    pub pass: bool,
    pub columns: Vec<ColumnCertificate>,
    pub failures: Vec<String>,
}

fn column_blocks<T: Real>(a: &BlockMatrix<T>, j: usize, support: &[Vec<bool>]) -> (Vec<usize>, Vec<CMat<T>>) {
    let rows: Vec<usize> = (0..a.m()).filter(|&i| support[i][j]).collect();
    let blocks = rows.iter().map(|&i| a.block(i, j).into_owned()).collect();
    (rows, blocks)
}

/// Largest certified well-spread subset of one column: the whole nonzero set when it
/// passes, else a greedy selection of `k`, else the largest smaller greedy selection.
fn certify_column<T: Real>(
    blocks: &[CMat<T>],
    k: usize,
    mode: Mode,
    opts: &WellSpreadOptions,
) -> Result<Vec<usize>> {
    if blocks.is_empty() {
        return Ok(Vec::new());
    }
    if check_well_spread_with(blocks, mode, opts)?.passed() {
        return Ok((0..blocks.len()).collect());
    }
    for target in (1..=k.min(blocks.len())).rev() {
        if let Some(sel) = select_well_spread(blocks, target, mode, opts)? {
            return Ok(sel);
        }
    }
    Ok(Vec::new())
}

pub fn verify_design<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
) -> Result<DesignCertificate> {
    verify_design_with(a, params, mode, &WellSpreadOptions::default())
}

pub fn verify_design_with<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
    opts: &WellSpreadOptions,
) -> Result<DesignCertificate> {
    mode.check_shape(a.r(), a.c())?;
    let support = a.support();
    let mut failures = Vec::new();

    let q_actual = support
        .iter()
        .map(|row| row.iter().filter(|&&x| x).count())
        .max()
        .unwrap_or(0);
    if q_actual > params.q {
        failures.push(format!("a row has {q_actual} nonzero blocks (q = {})", params.q));
    }

    let mut columns = Vec::with_capacity(a.n());
    for j in 0..a.n() {
        let (rows, blocks) = column_blocks(a, j, &support);
        let sel = certify_column(&blocks, params.k, mode, opts)?;
        columns.push(ColumnCertificate {
            column: j,
            nonzero: rows.len(),
            certified: sel.len(),
            rows: sel.iter().map(|&x| rows[x]).collect(),
        });
    }
    let k_actual = columns.iter().map(|c| c.certified).min().unwrap_or(0);
    if let Some(col) = columns.iter().find(|c| c.certified < params.k) {
        failures.push(format!(
            "column {} has only {} certified well-spread blocks (k = {})",
            col.column + 1,
            col.certified,
            params.k
        ));
    }

    let t_actual = max_shared_support(&support, a.n());
    if t_actual > params.t {
        failures.push(format!(
            "two columns share {t_actual} support rows (t = {})",
            params.t
        ));
    }
    Ok(DesignCertificate {
        params,
        mode,
        actual: DesignParams {
            q: q_actual,
            k: k_actual,
            t: t_actual,
        },
        pass: failures.is_empty(),
        columns,
        failures,
    })
}

/// `max_{j < j'} |supp(j) ∩ supp(j')|`.
pub fn max_shared_support(support: &[Vec<bool>], n: usize) -> usize {
    let mut counts = vec![0usize; n * n];
    for row in support {
        let cols: Vec<usize> = (0..n).filter(|&j| row[j]).collect();
        for (x, &a) in cols.iter().enumerate() {
            for &b in &cols[x + 1..] {
                counts[a * n + b] += 1;
            }
        }
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Rows selected for each column by [`regularize`], in column order.
pub fn regular_form_rows<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
    opts: &WellSpreadOptions,
) -> Result<Vec<Vec<usize>>> {
    mode.check_shape(a.r(), a.c())?;
    if mode == Mode::Partition && !params.k.is_multiple_of(a.c() / a.r()) {
        return Err(Error::InvalidArgument(format!(
            "partition mode needs k divisible by c/r = {}",
            a.c() / a.r()
        )));
    }
    let support = a.support();
    let mut out = Vec::with_capacity(a.n());
    for j in 0..a.n() {
        let (rows, blocks) = column_blocks(a, j, &support);
        let sel = if blocks.len() < params.k {
            None
        } else {
            select_well_spread(&blocks, params.k, mode, opts)?
        };
        let sel = sel.ok_or_else(|| {
            Error::CertificateMismatch(format!(
                "column {}: no {} rows with well-spread blocks in {mode} mode",
                j + 1,
                params.k
            ))
        })?;
        out.push(sel.into_iter().map(|x| rows[x]).collect());
    }
    Ok(out)
}

/// Builds `B` in `M_{nk,n}(r,c)`: for each column `j`, the `k` rows of `A` whose `j`-th
/// blocks form the greedy well-spread selection, appended in column order.
pub fn regularize<T: Real>(
    a: &BlockMatrix<T>,
    params: DesignParams,
    mode: Mode,
) -> Result<BlockMatrix<T>> {
    let rows = regular_form_rows(a, params, mode, &WellSpreadOptions::default())?;
    let flat: Vec<usize> = rows.into_iter().flatten().collect();
    a.select_rows(&flat)
}
