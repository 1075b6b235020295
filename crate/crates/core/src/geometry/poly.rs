//! Univariate complex polynomials as ascending coefficient lists.

use nalgebra::Schur;

use super::{Mat, C64};
use crate::error::{Error, Result};

/// Horner evaluation of `sum_j c_j x^j`.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Degree after dropping leading coefficients with `|c| <= rtol * max |c|`; `None` for
/// the zero polynomial.
pub(crate) fn effective_degree(coeffs: &[C64], rtol: f64) -> Option<usize> {
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if max == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|c| c.norm() > rtol * max)
}

/// Roots of `sum_j c_j x^j` as eigenvalues of the companion matrix, after trimming
/// negligible leading coefficients.
pub fn poly_roots(coeffs: &[C64], rtol: f64) -> Result<Vec<C64>> {
    let Some(deg) = effective_degree(coeffs, rtol) else {
        return Err(Error::InvalidArgument("roots of the zero polynomial".into()));
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = Mat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("companion Schur decomposition did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::NumericalFailure("companion eigenvalues unavailable".into()))?;
    Ok(eig.iter().copied().collect())
}
