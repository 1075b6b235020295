//! Block matrices `M_{m,n}(r,c)`: an `m x n` grid of `r x c` complex blocks.
//!
//! Storage is the flattened `rm x cn` dense matrix; block `(i, j)` is the view at
//! rows `i*r..(i+1)*r`, columns `j*c..(j+1)*c`.

use nalgebra::{DMatrixView, DMatrixViewMut};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Axis, Error, Result};
use crate::linalg::{self, frobenius_sq, inv_sqrt_psd, HermitianMatrix};
use crate::scalar::{re, CMat, Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix<T: Real> {
    m: usize,
    n: usize,
    r: usize,
    c: usize,
    data: CMat<T>,
}

impl<T: Real> BlockMatrix<T> {
    pub fn zeros(m: usize, n: usize, r: usize, c: usize) -> Result<Self> {
        if m == 0 || n == 0 || r == 0 || c == 0 {
            return Err(Error::InvalidArgument(format!(
                "block matrix dimensions must be positive, got m={m} n={n} r={r} c={c}"
            )));
        }
        Ok(Self {
            m,
            n,
            r,
            c,
            data: CMat::zeros(m * r, n * c),
        })
    }

    /// Reinterprets a dense `rm x cn` matrix as blocks of size `r x c`.
    pub fn from_dense(dense: CMat<T>, r: usize, c: usize) -> Result<Self> {
        if r == 0 || c == 0 || !dense.nrows().is_multiple_of(r) || !dense.ncols().is_multiple_of(c) || dense.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot be split into {r}x{c} blocks",
                dense.nrows(),
                dense.ncols()
            )));
        }
        Ok(Self {
            m: dense.nrows() / r,
            n: dense.ncols() / c,
            r,
            c,
            data: dense,
        })
    }

    /// Builds from a row-major grid of blocks; every block must be `r x c`.
    pub fn from_blocks(grid: &[Vec<CMat<T>>]) -> Result<Self> {
        let m = grid.len();
        let n = grid.first().map_or(0, Vec::len);
        let (r, c) = grid
            .first()
            .and_then(|row| row.first())
            .map(|b| (b.nrows(), b.ncols()))
            .ok_or_else(|| Error::InvalidArgument("empty block grid".into()))?;
        let mut out = Self::zeros(m, n, r, c)?;
        for (i, row) in grid.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "block row {i} has {} blocks, expected {n}",
                    row.len()
                )));
            }
            for (j, b) in row.iter().enumerate() {
                out.set_block(i, j, b)?;
            }
        }
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn c(&self) -> usize {
        self.c
    }

    /// `(m, n, r, c)`.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.r, self.c)
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrixView<'_, Cx<T>> {
        self.data.view((i * self.r, j * self.c), (self.r, self.c))
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> DMatrixViewMut<'_, Cx<T>> {
        self.data.view_mut((i * self.r, j * self.c), (self.r, self.c))
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &CMat<T>) -> Result<()> {
        if i >= self.m || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "block index ({i}, {j}) outside {}x{} grid",
                self.m, self.n
            )));
        }
        if b.nrows() != self.r || b.ncols() != self.c {
            return Err(Error::DimensionMismatch(format!(
                "block ({i}, {j}) is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                self.r,
                self.c
            )));
        }
        self.block_mut(i, j).copy_from(b);
        Ok(())
    }

    /// The dense `rm x cn` matrix (blocks laid out in place).
    pub fn flatten(&self) -> CMat<T> {
        self.data.clone()
    }

    pub fn as_dense(&self) -> &CMat<T> {
        &self.data
    }

    /// Rows `i*r..(i+1)*r` of the flattened matrix as a single-row block matrix.
    pub fn block_row(&self, i: usize) -> Self {
        Self {
            m: 1,
            n: self.n,
            r: self.r,
            c: self.c,
            data: self.data.rows(i * self.r, self.r).into_owned(),
        }
    }

    /// Stacks whole block rows (by index, repeats allowed) into a new block matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(rows.len(), self.n, self.r, self.c)?;
        for (dst, &src) in rows.iter().enumerate() {
            if src >= self.m {
                return Err(Error::InvalidArgument(format!("row index {src} out of range")));
            }
            out.data
                .rows_mut(dst * self.r, self.r)
                .copy_from(&self.data.rows(src * self.r, self.r));
        }
        Ok(out)
    }

    /// Copy with the blocks selected by `keep` retained and all others zeroed.
    pub fn keep_blocks(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut out = self.clone();
        for i in 0..self.m {
            for j in 0..self.n {
                if !keep(i, j) {
                    out.block_mut(i, j).fill(re(T::zero()));
                }
            }
        }
        out
    }

    /// Frobenius norm of block `(i, j)`.
    pub fn block_norm(&self, i: usize, j: usize) -> T {
        self.block(i, j)
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Largest block Frobenius norm over the whole grid.
    pub fn max_block_norm(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.m {
            for j in 0..self.n {
                best = best.max(self.block_norm(i, j));
            }
        }
        best
    }

    /// Support mask: block `(i, j)` is nonzero when its Frobenius norm exceeds
    /// `1e-12` times the largest block norm of the matrix.
    pub fn support(&self) -> Vec<Vec<bool>> {
        let thr = T::lit(1e-12) * self.max_block_norm();
        (0..self.m)
            .map(|i| (0..self.n).map(|j| self.block_norm(i, j) > thr).collect())
            .collect()
    }

    /// `nc / (mr)`, the column-gram weight.
    pub fn column_weight(&self) -> T {
        T::of_usize(self.n * self.c) / T::of_usize(self.m * self.r)
    }

    /// Block-diagonal matrix `diag(self, other)`; blocks must have equal shape.
    pub fn block_diag(&self, other: &Self) -> Result<Self> {
        if self.r != other.r || self.c != other.c {
            return Err(Error::DimensionMismatch(
                "block_diag needs equal block shapes".into(),
            ));
        }
        let mut out = Self::zeros(self.m + other.m, self.n + other.n, self.r, self.c)?;
        out.data
            .view_mut((0, 0), self.data.shape())
            .copy_from(&self.data);
        out.data
            .view_mut(self.data.shape(), other.data.shape())
            .copy_from(&other.data);
        Ok(out)
    }

    /// Converts the scalar type (e.g. `f64` to `f32`).
    pub fn cast<U: Real>(&self) -> BlockMatrix<U> {
        BlockMatrix {
            m: self.m,
            n: self.n,
            r: self.r,
            c: self.c,
            data: self
                .data
                .map(|z| Cx::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))),
        }
    }
}

/// Scaling coefficients: `m` nonsingular `r x r` row factors and `n` nonsingular `c x c`
/// column factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCoefficients<T: Real> {
    pub rows: Vec<CMat<T>>,
    pub cols: Vec<CMat<T>>,
}

/// `|det|` below this is treated as singular.
const MIN_ABS_DET: f64 = 1e-300;

impl<T: Real> ScalingCoefficients<T> {
    pub fn identity(m: usize, n: usize, r: usize, c: usize) -> Self {
        Self {
            rows: vec![CMat::identity(r, r); m],
            cols: vec![CMat::identity(c, c); n],
        }
    }

    /// Checks shapes against `a` and nonsingularity of every coefficient.
    pub fn validate(&self, a: &BlockMatrix<T>) -> Result<()> {
        if self.rows.len() != a.m || self.cols.len() != a.n {
            return Err(Error::InvalidScaling(format!(
                "expected {} row and {} column coefficients, got {} and {}",
                a.m,
                a.n,
                self.rows.len(),
                self.cols.len()
            )));
        }
        let floor = MIN_ABS_DET.ln();
        for (axis, list, size) in [(Axis::Row, &self.rows, a.r), (Axis::Column, &self.cols, a.c)] {
            for (idx, coef) in list.iter().enumerate() {
                if coef.nrows() != size || coef.ncols() != size {
                    return Err(Error::InvalidScaling(format!(
                        "{axis} coefficient {idx} is {}x{}, expected {size}x{size}",
                        coef.nrows(),
                        coef.ncols()
                    )));
                }
                let ld = linalg::log_abs_det(coef)?;
                if !(ld.as_f64() > floor) {
                    return Err(Error::InvalidScaling(format!(
                        "{axis} coefficient {idx} is singular (log|det| = {})",
                        ld.as_f64()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sum_j 2 log|det C_j| + (2nc/mr) sum_i log|det R_i|`, the log of the capacity
    /// multiplier of this scaling.
    pub fn log_capacity_factor(&self, a: &BlockMatrix<T>) -> Result<T> {
        let mut col = T::zero();
        for cj in &self.cols {
            col += linalg::log_abs_det(cj)?;
        }
        let mut row = T::zero();
        for ri in &self.rows {
            row += linalg::log_abs_det(ri)?;
        }
        Ok(T::lit(2.0) * col + T::lit(2.0) * a.column_weight() * row)
    }
}

/// Output of a row or column normalization.
#[derive(Debug, Clone)]
pub struct Normalized<T: Real> {
    pub matrix: BlockMatrix<T>,
    /// The inverse square roots `R_i(A)^{-1/2}` (or `C_j(A)^{-1/2}`).
    pub coefficients: Vec<CMat<T>>,
    /// `log det` of each gram that was normalized.
    pub gram_log_dets: Vec<T>,
}

/// `R_i(A) = sum_j A_ij A_ij^*`.
pub fn row_gram<T: Real>(a: &BlockMatrix<T>, i: usize) -> HermitianMatrix<T> {
    let row = a.data.rows(i * a.r, a.r);
    HermitianMatrix::from_gram(row * row.adjoint())
}

/// `C_j(A) = (nc/mr) sum_i A_ij^* A_ij`.
pub fn col_gram<T: Real>(a: &BlockMatrix<T>, j: usize) -> HermitianMatrix<T> {
    let col = a.data.columns(j * a.c, a.c);
    HermitianMatrix::from_gram((col.adjoint() * col).scale(a.column_weight()))
}

/// `Row(A) = R(A) A` with `R(A)_ii = R_i(A)^{-1/2}`.
pub fn row_normalize<T: Real>(a: &BlockMatrix<T>) -> Result<Normalized<T>> {
    let mut out = a.clone();
    let mut coefficients = Vec::with_capacity(a.m);
    let mut gram_log_dets = Vec::with_capacity(a.m);
    for i in 0..a.m {
        let inv = inv_sqrt_psd(&row_gram(a, i), None).map_err(|e| e.at(Axis::Row, i))?;
        let scaled = inv.matrix.matrix() * a.data.rows(i * a.r, a.r);
        out.data.rows_mut(i * a.r, a.r).copy_from(&scaled);
        coefficients.push(inv.matrix.into_matrix());
        gram_log_dets.push(inv.log_det);
    }
    Ok(Normalized {
        matrix: out,
        coefficients,
        gram_log_dets,
    })
}

/// `Col(A) = A C(A)` with `C(A)_jj = C_j(A)^{-1/2}`.
pub fn col_normalize<T: Real>(a: &BlockMatrix<T>) -> Result<Normalized<T>> {
    let mut out = a.clone();
    let mut coefficients = Vec::with_capacity(a.n);
    let mut gram_log_dets = Vec::with_capacity(a.n);
    for j in 0..a.n {
        let inv = inv_sqrt_psd(&col_gram(a, j), None).map_err(|e| e.at(Axis::Column, j))?;
        let scaled = a.data.columns(j * a.c, a.c) * inv.matrix.matrix();
        out.data.columns_mut(j * a.c, a.c).copy_from(&scaled);
        coefficients.push(inv.matrix.into_matrix());
        gram_log_dets.push(inv.log_det);
    }
    Ok(Normalized {
        matrix: out,
        coefficients,
        gram_log_dets,
    })
}

/// Column part of `ds`: `sum_j ||C_j(A) - I_c||_2^2`.
pub fn ds_columns<T: Real>(a: &BlockMatrix<T>) -> T {
    let eye = CMat::<T>::identity(a.c, a.c);
    (0..a.n).fold(T::zero(), |acc, j| {
        acc + frobenius_sq(&(col_gram(a, j).matrix() - &eye))
    })
}

/// Row part of `ds`: `sum_i ||R_i(A) - I_r||_2^2`.
pub fn ds_rows<T: Real>(a: &BlockMatrix<T>) -> T {
    let eye = CMat::<T>::identity(a.r, a.r);
    (0..a.m).fold(T::zero(), |acc, i| {
        acc + frobenius_sq(&(row_gram(a, i).matrix() - &eye))
    })
}

/// Squared distance to doubly stochastic.
pub fn ds<T: Real>(a: &BlockMatrix<T>) -> T {
    ds_columns(a) + ds_rows(a)
}

/// `B_ij = R_i A_ij C_j`.
pub fn apply_scaling<T: Real>(
    a: &BlockMatrix<T>,
    s: &ScalingCoefficients<T>,
) -> Result<BlockMatrix<T>> {
    s.validate(a)?;
    let mut out = a.clone();
    for i in 0..a.m {
        let scaled = &s.rows[i] * a.data.rows(i * a.r, a.r);
        out.data.rows_mut(i * a.r, a.r).copy_from(&scaled);
    }
    for j in 0..a.n {
        let scaled = out.data.columns(j * a.c, a.c) * &s.cols[j];
        out.data.columns_mut(j * a.c, a.c).copy_from(&scaled);
    }
    Ok(out)
}

/// `A^*` in `M_{n,m}(c,r)`: block `(j, i)` is `A_ij^*`.
pub fn adjoint<T: Real>(a: &BlockMatrix<T>) -> BlockMatrix<T> {
    BlockMatrix {
        m: a.n,
        n: a.m,
        r: a.c,
        c: a.r,
        data: a.data.adjoint(),
    }
}

/// Numerical rank of the flattened matrix with the default threshold.
pub fn block_rank<T: Real>(a: &BlockMatrix<T>) -> Result<usize> {
    linalg::numerical_rank(&a.data, None)
}

#[derive(Serialize, Deserialize)]
struct BlockMatrixRepr {
    m: usize,
    n: usize,
    r: usize,
    c: usize,
    blocks: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl<T: Real> Serialize for BlockMatrix<T> {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks = (0..self.m)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let b = self.block(i, j);
                        (0..self.r)
                            .map(|a| {
                                (0..self.c)
                                    .map(|k| [b[(a, k)].re.as_f64(), b[(a, k)].im.as_f64()])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BlockMatrixRepr {
            m: self.m,
            n: self.n,
            r: self.r,
            c: self.c,
            blocks,
        }
        .serialize(ser)
    }
}

impl<'de, T: Real> Deserialize<'de> for BlockMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = BlockMatrixRepr::deserialize(de)?;
        let mut out = BlockMatrix::zeros(repr.m, repr.n, repr.r, repr.c).map_err(D::Error::custom)?;
        if repr.blocks.len() != repr.m {
            return Err(D::Error::custom(format!(
                "blocks: expected {} block rows, found {}",
                repr.m,
                repr.blocks.len()
            )));
        }
        for (i, row) in repr.blocks.iter().enumerate() {
            if row.len() != repr.n {
                return Err(D::Error::custom(format!(
                    "blocks[{i}]: expected {} blocks, found {}",
                    repr.n,
                    row.len()
                )));
            }
            for (j, blk) in row.iter().enumerate() {
                if blk.len() != repr.r || blk.iter().any(|line| line.len() != repr.c) {
                    return Err(D::Error::custom(format!(
                        "blocks[{i}][{j}]: expected a {}x{} block",
                        repr.r, repr.c
                    )));
                }
                let mut view = out.block_mut(i, j);
                for (a, line) in blk.iter().enumerate() {
                    for (k, z) in line.iter().enumerate() {
                        view[(a, k)] = Cx::new(T::lit(z[0]), T::lit(z[1]));
                    }
                }
            }
        }
        Ok(out)
    }
}
