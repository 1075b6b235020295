//! Dense complex linear-algebra helpers: numerical rank, Hermitian inverse square roots,
//! log-determinants and subspace bases.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use crate::error::{Error, Result};
use crate::scalar::{abs, CMat, Real};

/// Relative factor in the default rank threshold `max(rows, cols) * sigma_max * RANK_RTOL`.
pub const RANK_RTOL: f64 = 1e-10;

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMat<T>) -> Result<Vec<T>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite entry in matrix passed to SVD".into(),
        ));
    }
    let svd = m
        .clone()
        .try_svd(false, false, T::eps(), 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut s: Vec<T> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Number of singular values strictly greater than `tol`.
///
/// With `tol = None` the threshold is `max(rows, cols) * sigma_max * 1e-10`.
pub fn numerical_rank<T: Real>(m: &CMat<T>, tol: Option<T>) -> Result<usize> {
    if let Some(t) = tol {
        if t < T::zero() {
            return Err(Error::InvalidArgument("rank tolerance must be >= 0".into()));
        }
    }
    let s = singular_values(m)?;
    let Some(&smax) = s.first() else {
        return Ok(0);
    };
    let tol = tol.unwrap_or_else(|| default_rank_tol(m.nrows(), m.ncols(), smax));
    Ok(s.iter().filter(|&&x| x > tol).count())
}

/// Rank with threshold `max(rows, cols) * sigma_max * rtol`; `None` uses the default
/// relative factor.
pub fn numerical_rank_rel<T: Real>(m: &CMat<T>, rtol: Option<T>) -> Result<usize> {
    let Some(rtol) = rtol else {
        return numerical_rank(m, None);
    };
    if !(rtol > T::zero()) {
        return Err(Error::InvalidArgument("relative rank tolerance must be > 0".into()));
    }
    let s = singular_values(m)?;
    let Some(&smax) = s.first() else {
        return Ok(0);
    };
    let tol = T::of_usize(m.nrows().max(m.ncols())) * smax * rtol;
    Ok(s.iter().filter(|&&x| x > tol).count())
}

/// `max(rows, cols) * scale * rtol` with `rtol = max(1e-10, 8 eps)`.
pub fn default_rank_tol<T: Real>(rows: usize, cols: usize, scale: T) -> T {
    let rtol = T::lit(RANK_RTOL).max(T::eps() * T::lit(8.0));
    T::of_usize(rows.max(cols)) * scale * rtol
}

/// Rank with the threshold anchored to an external magnitude instead of the matrix's own
/// largest singular value. Needed when the matrix may be numerically zero
/// (e.g. the image of a subspace under a map that annihilates it).
pub fn rank_at_scale<T: Real>(m: &CMat<T>, scale: T) -> Result<usize> {
    numerical_rank(m, Some(default_rank_tol(m.nrows(), m.ncols(), scale)))
}

pub fn frobenius_sq<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    frobenius_sq(m).sqrt()
}

pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(abs(*z)))
}

/// `(X + X*) / 2`.
pub fn symmetrize<T: Real>(x: &CMat<T>) -> CMat<T> {
    (x + x.adjoint()).scale(T::lit(0.5))
}

/// Hermitian matrix, conjugate-symmetric up to a relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    entries: CMat<T>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates conjugate symmetry to `1e-12` relative to the largest entry magnitude
    /// (or a few ulps of `T`, whichever is looser).
    pub fn new(entries: CMat<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = max_abs(&entries);
        let tol = T::lit(1e-12).max(T::eps() * T::lit(64.0)) * scale;
        let dev = max_abs(&(&entries - entries.adjoint()));
        if dev > tol {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (asymmetry {:e})",
                dev.as_f64()
            )));
        }
        Ok(Self { entries })
    }

    /// Wraps a matrix that is Hermitian by construction, absorbing roundoff.
    pub fn from_gram(entries: CMat<T>) -> Self {
        Self {
            entries: symmetrize(&entries),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMat::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.entries
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.entries[(i, i)].re)
    }

    /// Eigenvalues in ascending order together with the matching eigenvectors (as columns).
    pub fn eigen(&self) -> Result<(Vec<T>, CMat<T>)> {
        if self.dim() == 0 {
            return Ok((Vec::new(), CMat::zeros(0, 0)));
        }
        let eig = SymmetricEigen::try_new(symmetrize(&self.entries), T::eps(), 10_000)
            .ok_or_else(|| Error::NumericalFailure("Hermitian eigendecomposition failed".into()))?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Default positive-definiteness threshold `1e-12 * trace / dim`.
    pub fn default_eps(&self) -> T {
        if self.dim() == 0 {
            return T::zero();
        }
        T::lit(1e-12) * self.trace().max(T::zero()) / T::of_usize(self.dim())
    }

    /// `log det` if every eigenvalue exceeds the default threshold, `None` otherwise.
    pub fn log_det_pd(&self) -> Result<Option<T>> {
        let (vals, _) = self.eigen()?;
        let eps = self.default_eps();
        if vals.iter().any(|&v| v <= eps) {
            return Ok(None);
        }
        Ok(Some(vals.iter().fold(T::zero(), |acc, &v| acc + v.ln())))
    }

    pub fn is_positive_definite(&self) -> Result<bool> {
        Ok(self.log_det_pd()?.is_some())
    }
}

/// Result of [`inv_sqrt_psd`]: `X^{-1/2}` and `log det X`.
#[derive(Debug, Clone)]
pub struct InvSqrt<T: Real> {
    pub matrix: HermitianMatrix<T>,
    /// Natural log of `det X`; `log |det X^{-1/2}| = -log_det / 2`.
    pub log_det: T,
}

/// `X^{-1/2}` through a Hermitian eigendecomposition.
///
/// `eps` defaults to `1e-12 * trace(X) / dim`; an eigenvalue at or below it is a
/// [`Error::SingularGram`].
pub fn inv_sqrt_psd<T: Real>(x: &HermitianMatrix<T>, eps: Option<T>) -> Result<InvSqrt<T>> {
    let eps = eps.unwrap_or_else(|| x.default_eps());
    let (vals, vecs) = x.eigen()?;
    for (i, &v) in vals.iter().enumerate() {
        if v <= eps || !v.is_finite() {
            return Err(Error::SingularGram {
                site: None,
                eig_index: i,
                eigenvalue: v.as_f64(),
                threshold: eps.as_f64(),
            });
        }
    }
    let mut scaled = vecs.clone();
    let mut log_det = T::zero();
    for (c, &v) in vals.iter().enumerate() {
        log_det += v.ln();
        let f = Complex::new(T::one() / v.sqrt(), T::zero());
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= f;
        }
    }
    let m = &scaled * vecs.adjoint();
    Ok(InvSqrt {
        matrix: HermitianMatrix::from_gram(m),
        log_det,
    })
}

/// `log |det M|` via LU; `-inf` when a pivot vanishes.
pub fn log_abs_det<T: Real>(m: &CMat<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("determinant of non-square matrix".into()));
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = T::zero();
    for i in 0..u.nrows() {
        let p = abs(u[(i, i)]);
        if p == T::zero() {
            return Ok(T::lit(f64::NEG_INFINITY));
        }
        acc += p.ln();
    }
    Ok(acc)
}

/// Full SVD of a (possibly wide) matrix, padding with zero rows so the right singular
/// basis is complete. Returns (singular values descending, V with matching columns).
fn full_right_svd<T: Real>(m: &CMat<T>) -> Result<(Vec<T>, CMat<T>)> {
    let cols = m.ncols();
    let rows = m.nrows().max(cols);
    let mut padded = CMat::<T>::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded
        .try_svd(false, true, T::eps(), 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = CMat::from_fn(cols, cols, |r, c| v_t[(order[c], r)].conj());
    Ok((s, v))
}

/// Orthonormal basis (columns) of `ker M` where singular values at or below
/// `max(dims) * scale * 1e-10` count as zero.
pub fn null_space<T: Real>(m: &CMat<T>, scale: T) -> Result<CMat<T>> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let (s, v) = full_right_svd(m)?;
    let tol = default_rank_tol(m.nrows(), cols, scale);
    let rank = s.iter().filter(|&&x| x > tol).count();
    Ok(v.columns(rank, cols - rank).into_owned())
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn column_space<T: Real>(m: &CMat<T>, scale: T) -> Result<CMat<T>> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(CMat::zeros(m.nrows(), 0));
    }
    // Column space of M is the right singular space of M*.
    let adj = m.adjoint();
    let (s, v) = full_right_svd(&adj)?;
    let tol = default_rank_tol(m.nrows(), m.ncols(), scale);
    let rank = s.iter().filter(|&&x| x > tol).count();
    Ok(v.columns(0, rank).into_owned())
}

/// Kernel null vector of smallest singular value together with that value.
pub fn smallest_right_singular<T: Real>(m: &CMat<T>) -> Result<(T, nalgebra::DVector<Complex<T>>)> {
    let (s, v) = full_right_svd(m)?;
    let last = m.ncols() - 1;
    Ok((s[last], v.column(last).into_owned()))
}

/// Least-squares solution of `X * a = b` for `X` (row-oriented systems), via the
/// pseudo-inverse of `a`.
pub fn solve_left<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    // X a = b  <=>  a^T X^T = b^T
    let at = a.transpose();
    let bt = b.transpose();
    let svd = at
        .try_svd(true, true, T::eps(), 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let smax = svd.singular_values.iter().fold(T::zero(), |m, &x| m.max(x));
    let tol = default_rank_tol(a.nrows(), a.ncols(), smax);
    let xt = svd
        .solve(&bt, tol)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok(xt.transpose())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cx, re};

    fn diag(v: &[f64]) -> CMat<f64> {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { re(v[i]) } else { re(0.0) })
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&identity::<f64>(3), None).unwrap(), 3);
        let ones = CMat::<f64>::from_element(3, 3, re(1.0));
        assert_eq!(numerical_rank(&ones, None).unwrap(), 1);
        assert_eq!(numerical_rank(&CMat::<f64>::zeros(2, 3), None).unwrap(), 0);
        assert!(numerical_rank(&ones, Some(-1.0)).is_err());
    }

    #[test]
    fn inv_sqrt_examples() {
        let out = inv_sqrt_psd(&HermitianMatrix::<f64>::identity(3), None).unwrap();
        assert!((out.matrix.matrix() - identity::<f64>(3)).norm() < 1e-15);
        assert_eq!(out.log_det, 0.0);

        let x = HermitianMatrix::new(diag(&[4.0, 9.0])).unwrap();
        let out = inv_sqrt_psd(&x, None).unwrap();
        assert!((out.matrix.matrix() - diag(&[0.5, 1.0 / 3.0])).norm() < 1e-15);
        assert!((out.log_det - 36.0f64.ln()).abs() < 1e-14);

        let z = HermitianMatrix::new(CMat::<f64>::zeros(2, 2)).unwrap();
        assert!(matches!(
            inv_sqrt_psd(&z, None),
            Err(Error::SingularGram { site: None, .. })
        ));
    }

    #[test]
    fn inv_sqrt_contract_on_complex_hpd() {
        let b = CMat::<f64>::from_fn(4, 4, |i, j| cx((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0));
        let x = HermitianMatrix::from_gram(&b * b.adjoint() + identity::<f64>(4));
        let w = inv_sqrt_psd(&x, None).unwrap();
        let w = w.matrix.matrix();
        let resid = w * x.matrix() * w - identity::<f64>(4);
        let s = singular_values(&resid).unwrap();
        assert!(s[0] <= 1e-8 * 4.0);
        assert!((w - w.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn hermitian_validation() {
        let mut m = diag(&[1.0, 2.0]);
        m[(0, 1)] = cx(0.0, 1.0);
        assert!(HermitianMatrix::new(m.clone()).is_err());
        m[(1, 0)] = cx(0.0, -1.0);
        assert!(HermitianMatrix::new(m).is_ok());
    }

    #[test]
    fn null_space_and_column_space() {
        let m = CMat::<f64>::from_row_slice(1, 3, &[re(1.0), re(1.0), re(0.0)]);
        let k = null_space(&m, 1.0).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-14);
        let cs = column_space(&m.transpose(), 1.0).unwrap();
        assert_eq!(cs.ncols(), 1);
    }

    #[test]
    fn log_abs_det_examples() {
        assert!((log_abs_det(&diag(&[2.0, 3.0])).unwrap() - 6.0f64.ln()).abs() < 1e-14);
        assert_eq!(log_abs_det(&CMat::<f64>::zeros(2, 2)).unwrap(), f64::NEG_INFINITY);
    }
}
