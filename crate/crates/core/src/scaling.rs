//! Alternating row/column normalization with capacity tracking.
//!
//! The iteration is `A_0 = Col(A)`, `A_{k+1} = Col(Row(A_k))`. Every normalization is a
//! scaling, so the capacity of the iterate changes by an explicit factor computed from the
//! normalizer determinants. All such factors are kept in log space.

use serde::Serialize;

use crate::blockmat::{
    col_gram, col_normalize, ds, ds_columns, ds_rows, row_normalize, BlockMatrix,
    ScalingCoefficients,
};
use crate::error::{Axis, Error, Result};
use crate::linalg::{inv_sqrt_psd, HermitianMatrix};
use crate::scalar::{CMat, Real};

#[derive(Debug, Clone, Copy)]
pub struct ScalingOptions<T: Real> {
    /// Stop once `ds` of the column-normalized iterate is at most this.
    pub tol: T,
    pub max_iter: usize,
    /// Abort with non-scalable evidence once the accumulated log factor exceeds this.
    pub log_factor_ceiling: T,
}

impl<T: Real> Default for ScalingOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_iter: 10_000,
            log_factor_ceiling: T::lit(1e6),
        }
    }
}

impl<T: Real> ScalingOptions<T> {
    pub fn new(tol: T, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            ..Self::default()
        }
    }
}

/// Log capacity factors of one `Col(Row(.))` iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T: Real> {
    /// `log` of the row step's factor `(prod_i det R_i)^{-nc/mr}`.
    pub log_h_row: T,
    /// `log` of the column step's factor `(prod_j det C_j)^{-1}`.
    pub log_h_col: T,
    /// `ds` of the row-normalized intermediate.
    pub ds_before_col: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initial,
    Row,
    Column,
}

/// Why a run stopped without reaching the tolerance. This is evidence of
/// non-scalability, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonScalableEvidence {
    /// Iteration index at which the run stopped.
    pub step: usize,
    pub phase: Phase,
    pub reason: String,
    /// Offending gram `(axis, index, eigenvalue)` for singular-gram stops.
    pub gram: Option<(Axis, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ScalingState<T: Real> {
    pub current: BlockMatrix<T>,
    /// Composition of every step's coefficients, so that
    /// `apply_scaling(original, accumulated) == current`.
    pub accumulated: ScalingCoefficients<T>,
    pub iterations: usize,
    /// `ds(A_k)` for `k = 0..=iterations`.
    pub ds_trace: Vec<T>,
    /// Natural log of the total capacity multiplier `cap(A_k) / cap(A)`.
    pub log_factor: T,
    /// Log factor contributed by the initial column step alone.
    pub initial_log_factor: T,
    pub steps: Vec<StepRecord<T>>,
    /// `capacity_upper_bound` after each `A_k`.
    pub bound_trace: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_ds: f64,
    pub log_capacity_upper_bound: f64,
    pub ds_trace: Vec<f64>,
    pub failure: Option<NonScalableEvidence>,
}

fn evidence(step: usize, phase: Phase, err: &Error) -> NonScalableEvidence {
    let gram = match err {
        Error::SingularGram {
            site: Some((axis, index)),
            eigenvalue,
            ..
        } => Some((*axis, *index, *eigenvalue)),
        _ => None,
    };
    NonScalableEvidence {
        step,
        phase,
        reason: err.to_string(),
        gram,
    }
}

fn sum<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x)
}

/// `log` of the capacity factor of a column step: `-sum_j log det C_j(A)`.
fn col_step_log_factor<T: Real>(gram_log_dets: &[T]) -> T {
    -sum(gram_log_dets)
}

/// `log` of the capacity factor of a row step: `-(nc/mr) sum_i log det R_i(A)`.
fn row_step_log_factor<T: Real>(a: &BlockMatrix<T>, gram_log_dets: &[T]) -> T {
    -a.column_weight() * sum(gram_log_dets)
}

/// Runs `A_0 = Col(A)`, `A_{k+1} = Col(Row(A_k))` until `ds(A_k) <= tol` or
/// `k = max_iter`.
///
/// A singular gram or an exhausted capacity ceiling is reported in
/// [`ScalingReport::failure`]; only invalid options are errors.
pub fn sinkhorn_scale<T: Real>(
    a: &BlockMatrix<T>,
    opts: &ScalingOptions<T>,
) -> Result<(ScalingState<T>, ScalingReport)> {
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument("scaling tolerance must be > 0".into()));
    }
    if opts.max_iter < 1 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    let (m, n, r, c) = a.shape();
    let mut state = ScalingState {
        current: a.clone(),
        accumulated: ScalingCoefficients::identity(m, n, r, c),
        iterations: 0,
        ds_trace: Vec::new(),
        log_factor: T::zero(),
        initial_log_factor: T::zero(),
        steps: Vec::new(),
        bound_trace: Vec::new(),
    };

    let first = match col_normalize(a) {
        Ok(x) => x,
        Err(e) => {
            let ds0 = ds(a);
            state.ds_trace.push(ds0);
            let report = finish(&state, false, Some(evidence(0, Phase::Initial, &e)));
            return Ok((state, report));
        }
    };
    state.initial_log_factor = col_step_log_factor(&first.gram_log_dets);
    state.log_factor = state.initial_log_factor;
    for (acc, step) in state.accumulated.cols.iter_mut().zip(&first.coefficients) {
        *acc = &*acc * step;
    }
    state.current = first.matrix;
    state.ds_trace.push(ds(&state.current));
    state.bound_trace.push(-state.log_factor);

    let mut failure = None;
    while *state.ds_trace.last().unwrap() > opts.tol && state.iterations < opts.max_iter {
        let k = state.iterations;
        let row = match row_normalize(&state.current) {
            Ok(x) => x,
            Err(e) => {
                failure = Some(evidence(k, Phase::Row, &e));
                break;
            }
        };
        let log_h_row = row_step_log_factor(&state.current, &row.gram_log_dets);
        let ds_before_col = ds_columns(&row.matrix) + ds_rows(&row.matrix);
        let col = match col_normalize(&row.matrix) {
            Ok(x) => x,
            Err(e) => {
                failure = Some(evidence(k, Phase::Column, &e));
                break;
            }
        };
        let log_h_col = col_step_log_factor(&col.gram_log_dets);

        for (acc, step) in state.accumulated.rows.iter_mut().zip(&row.coefficients) {
            *acc = step * &*acc;
        }
        for (acc, step) in state.accumulated.cols.iter_mut().zip(&col.coefficients) {
            *acc = &*acc * step;
        }
        state.current = col.matrix;
        state.log_factor += log_h_row + log_h_col;
        state.steps.push(StepRecord {
            log_h_row,
            log_h_col,
            ds_before_col,
        });
        state.iterations += 1;
        state.ds_trace.push(ds(&state.current));
        state.bound_trace.push(-state.log_factor);

        if state.log_factor > opts.log_factor_ceiling {
            failure = Some(NonScalableEvidence {
                step: state.iterations,
                phase: Phase::Column,
                reason: format!(
                    "accumulated log capacity factor {:e} exceeds ceiling {:e} with ds = {:e}",
                    state.log_factor.as_f64(),
                    opts.log_factor_ceiling.as_f64(),
                    state.ds_trace.last().unwrap().as_f64()
                ),
                gram: None,
            });
            break;
        }
    }
    let converged = failure.is_none() && *state.ds_trace.last().unwrap() <= opts.tol;
    let report = finish(&state, converged, failure);
    Ok((state, report))
}

fn finish<T: Real>(
    state: &ScalingState<T>,
    converged: bool,
    failure: Option<NonScalableEvidence>,
) -> ScalingReport {
    ScalingReport {
        converged,
        iterations: state.iterations,
        final_ds: state.ds_trace.last().map_or(f64::NAN, |x| x.as_f64()),
        log_capacity_upper_bound: capacity_upper_bound(state).as_f64(),
        ds_trace: state.ds_trace.iter().map(|x| x.as_f64()).collect(),
        failure,
    }
}

/// Upper bound on `log cap(A)` for the original matrix: `cap(A_k) <= 1` for a
/// column-normalized iterate, hence `log cap(A) <= -log_factor`.
pub fn capacity_upper_bound<T: Real>(state: &ScalingState<T>) -> T {
    -state.log_factor
}

fn validate_weights<T: Real>(a: &BlockMatrix<T>, xs: &[HermitianMatrix<T>]) -> Result<()> {
    if xs.len() != a.m() {
        return Err(Error::InvalidArgument(format!(
            "expected {} weight matrices, got {}",
            a.m(),
            xs.len()
        )));
    }
    for (i, x) in xs.iter().enumerate() {
        if x.dim() != a.r() {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {}x{}, expected {}x{}",
                x.dim(),
                x.dim(),
                a.r(),
                a.r()
            )));
        }
        if !x.is_positive_definite()? {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is not positive definite"
            )));
        }
    }
    Ok(())
}

/// `sum_i A_ij^* X_i A_ij` (unweighted).
fn weighted_col<T: Real>(a: &BlockMatrix<T>, xs: &[HermitianMatrix<T>], j: usize) -> CMat<T> {
    let mut acc = CMat::<T>::zeros(a.c(), a.c());
    for (i, x) in xs.iter().enumerate() {
        let b = a.block(i, j);
        acc += b.adjoint() * x.matrix() * b;
    }
    acc
}

/// `sum_j log det((nc/mr) sum_i A_ij^* X_i A_ij)`, or `-inf` when some inner matrix
/// is singular.
pub fn capacity_objective<T: Real>(a: &BlockMatrix<T>, xs: &[HermitianMatrix<T>]) -> Result<T> {
    validate_weights(a, xs)?;
    let w = a.column_weight();
    let mut total = T::zero();
    for j in 0..a.n() {
        let inner = HermitianMatrix::from_gram(weighted_col(a, xs, j).scale(w));
        match inner.log_det_pd()? {
            Some(ld) => total += ld,
            None => return Ok(T::lit(f64::NEG_INFINITY)),
        }
    }
    Ok(total)
}

/// `max(e^{-eps/6}, e^{-1/6})` with `eps = sum (x_i - 1)^2`; dominates `prod x_i` when
/// the `x_i` are positive with mean one.
pub fn amgm_bound<T: Real>(xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("empty tuple".into()));
    }
    if let Some(x) = xs.iter().find(|&&x| !(x > T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "entries must be positive, found {}",
            x
        )));
    }
    let s = T::of_usize(xs.len());
    let total = sum(xs);
    if (total - s).abs() > T::lit(1e-9).max(T::eps() * T::lit(16.0)) * s {
        return Err(Error::InvalidArgument(format!(
            "entries must sum to {} (got {})",
            s, total
        )));
    }
    let eps = xs.iter().fold(T::zero(), |acc, &x| acc + (x - T::one()) * (x - T::one()));
    let six = T::lit(6.0);
    Ok((-eps / six).exp().max((-T::one() / six).exp()))
}

/// Rescales a positive tuple to mean one, the normalization `amgm_bound` expects.
pub fn normalize_mean<T: Real>(xs: &[T]) -> Vec<T> {
    let mean = sum(xs) / T::of_usize(xs.len());
    xs.iter().map(|&x| x / mean).collect()
}

/// Guaranteed lower bound on a column step's log factor, `min(1, eps) / 6`.
pub fn column_step_progress<T: Real>(eps: T) -> T {
    eps.min(T::one()) / T::lit(6.0)
}

/// The two sides of the transpose-duality chain at a fixed `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityCheck {
    /// `(1/nc) sum_j [log det((nc/mr) M_j) + log det Y_j]` with `Y_j = M_j^{-1}`,
    /// `M_j = sum_i A_ij^* X_i A_ij`.
    pub lhs: f64,
    /// `(1/mr) sum_i [log det((mr/nc) sum_j A_ij Y_j A_ij^*) + log det X_i] + log(nc/mr)`.
    pub rhs: f64,
}

impl DualityCheck {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluates both sides of the AM-GM step relating `cap(A)` and `cap(A^*)`; the gap
/// `lhs - rhs` is nonnegative for every positive definite `X`.
pub fn duality_check<T: Real>(a: &BlockMatrix<T>, xs: &[HermitianMatrix<T>]) -> Result<DualityCheck> {
    validate_weights(a, xs)?;
    let (m, n, r, c) = a.shape();
    let w = a.column_weight();
    let nc = T::of_usize(n * c);
    let mr = T::of_usize(m * r);

    let mut lhs = T::zero();
    let mut ys = Vec::with_capacity(n);
    for j in 0..n {
        let mj = HermitianMatrix::from_gram(weighted_col(a, xs, j));
        let inv = inv_sqrt_psd(&mj, None).map_err(|e| {
            Error::InvalidArgument(format!("singular intermediate: {}", e.at(Axis::Column, j)))
        })?;
        let y = inv.matrix.matrix() * inv.matrix.matrix();
        let y = HermitianMatrix::from_gram(y);
        let scaled = HermitianMatrix::from_gram(mj.matrix().scale(w));
        let ld_scaled = scaled
            .log_det_pd()?
            .ok_or_else(|| Error::InvalidArgument(format!("singular column intermediate {j}")))?;
        let ld_y = y
            .log_det_pd()?
            .ok_or_else(|| Error::InvalidArgument(format!("singular inverse at column {j}")))?;
        lhs += ld_scaled + ld_y;
        ys.push(y);
    }
    let lhs = lhs / nc;

    let inv_w = mr / nc;
    let mut rhs = T::zero();
    for (i, x) in xs.iter().enumerate() {
        let mut acc = CMat::<T>::zeros(r, r);
        for (j, y) in ys.iter().enumerate() {
            let b = a.block(i, j);
            acc += b * y.matrix() * b.adjoint();
        }
        let inner = HermitianMatrix::from_gram(acc.scale(inv_w));
        match inner.log_det_pd()? {
            Some(ld) => rhs += ld + x.log_det_pd()?.unwrap(),
            None => {
                return Ok(DualityCheck {
                    lhs: lhs.as_f64(),
                    rhs: f64::NEG_INFINITY,
                })
            }
        }
    }
    let rhs = rhs / mr + w.ln();
    Ok(DualityCheck {
        lhs: lhs.as_f64(),
        rhs: rhs.as_f64(),
    })
}

/// Column-gram eigenvalues of every column, used by progress diagnostics.
pub fn column_gram_eigenvalues<T: Real>(a: &BlockMatrix<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(a.n() * a.c());
    for j in 0..a.n() {
        out.extend(col_gram(a, j).eigen()?.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn scalar_matrix(rows: &[&[f64]]) -> BlockMatrix<f64> {
        let grid: Vec<Vec<CMat<f64>>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| CMat::from_element(1, 1, re(x))).collect())
            .collect();
        BlockMatrix::from_blocks(&grid).unwrap()
    }

    /// Classic scalar Sinkhorn on the entrywise squares, targeting row sums 1 and column
    /// sums m/n. Independent of the block machinery.
    fn scalar_sinkhorn_oracle(a: &[Vec<f64>], iters: usize) -> Vec<Vec<f64>> {
        let m = a.len();
        let n = a[0].len();
        let mut p: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| x * x).collect()).collect();
        let col_target = m as f64 / n as f64;
        for _ in 0..iters {
            for row in p.iter_mut() {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
            }
            for j in 0..n {
                let s: f64 = (0..m).map(|i| p[i][j]).sum();
                (0..m).for_each(|i| p[i][j] *= col_target / s);
            }
        }
        p
    }

    #[test]
    fn identity_converges_immediately() {
        let a = BlockMatrix::from_blocks(&[vec![CMat::<f64>::identity(2, 2)]]).unwrap();
        let (state, report) = sinkhorn_scale(&a, &ScalingOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(report.final_ds, 0.0);
        assert_eq!(capacity_upper_bound(&state), 0.0);
    }

    #[test]
    fn positive_two_by_two_matches_scalar_sinkhorn() {
        let a = scalar_matrix(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let (state, report) = sinkhorn_scale(&a, &ScalingOptions::default()).unwrap();
        assert!(report.converged);
        assert!(report.final_ds <= 1e-8);
        let oracle = scalar_sinkhorn_oracle(&[vec![1.0, 1.0], vec![1.0, 2.0]], 500);
        for i in 0..2 {
            for j in 0..2 {
                let got = state.current.block(i, j)[(0, 0)].norm_sqr();
                assert!((got - oracle[i][j]).abs() < 1e-4, "({i},{j}): {got} vs {}", oracle[i][j]);
            }
        }
    }

    #[test]
    fn zero_column_fails_at_step_zero() {
        let a = scalar_matrix(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let (_, report) = sinkhorn_scale(&a, &ScalingOptions::default()).unwrap();
        assert!(!report.converged);
        let f = report.failure.unwrap();
        assert_eq!(f.step, 0);
        assert_eq!(f.phase, Phase::Initial);
        assert_eq!(f.gram.map(|g| (g.0, g.1)), Some((Axis::Column, 1)));
    }

    #[test]
    fn invalid_options_rejected() {
        let a = scalar_matrix(&[&[1.0]]);
        assert!(sinkhorn_scale(&a, &ScalingOptions::new(0.0, 10)).is_err());
        assert!(sinkhorn_scale(&a, &ScalingOptions::new(1e-8, 0)).is_err());
    }

    #[test]
    fn scalar_two_upper_bound_is_log_four() {
        let a = scalar_matrix(&[&[2.0]]);
        let (state, report) = sinkhorn_scale(&a, &ScalingOptions::default()).unwrap();
        assert!(report.converged);
        assert!((capacity_upper_bound(&state) - 4.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn objective_examples() {
        let a = col_normalize(&scalar_matrix(&[&[1.0, 2.0], &[3.0, 1.0]])).unwrap().matrix;
        let ones = vec![HermitianMatrix::identity(1); 2];
        assert!(capacity_objective(&a, &ones).unwrap().abs() < 1e-14);
        let z = scalar_matrix(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(capacity_objective(&z, &ones).unwrap(), f64::NEG_INFINITY);
        let bad = vec![HermitianMatrix::from_gram(CMat::from_element(1, 1, re(-1.0))); 2];
        assert!(capacity_objective(&a, &bad).is_err());
    }

    #[test]
    fn amgm_examples() {
        assert_eq!(amgm_bound(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 1.0);
        let b = amgm_bound(&[1.5, 0.5]).unwrap();
        assert!((b - (-1.0f64 / 12.0).exp()).abs() < 1e-15);
        assert!((b - 0.9200).abs() < 1e-4 && b >= 0.75);
        let b = amgm_bound(&[2.0, 0.5, 0.5]).unwrap();
        assert!((b - (-1.0f64 / 6.0).exp()).abs() < 1e-15);
        assert!((b - 0.8465).abs() < 1e-4 && b >= 0.5);
        assert!(amgm_bound(&[2.0, 0.0]).is_err());
        assert!(amgm_bound(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn duality_scalar_hand_computation() {
        // A = [a], X = [x]: both sides are exactly zero.
        let a = scalar_matrix(&[&[3.0]]);
        let x = vec![HermitianMatrix::from_gram(CMat::from_element(1, 1, re(0.7)))];
        let d = duality_check(&a, &x).unwrap();
        assert!(d.lhs.abs() < 1e-14 && d.rhs.abs() < 1e-14);
    }

    #[test]
    fn duality_scalar_two_by_two_oracle() {
        // Scalar formulas written out directly.
        let p = [[1.0f64, 2.0], [0.5, 3.0]];
        let x = [0.8f64, 2.5];
        let a = scalar_matrix(&[&p[0], &p[1]]);
        let xs: Vec<_> = x
            .iter()
            .map(|&v| HermitianMatrix::from_gram(CMat::from_element(1, 1, re(v))))
            .collect();
        let d = duality_check(&a, &xs).unwrap();
        let mj: Vec<f64> = (0..2).map(|j| (0..2).map(|i| p[i][j] * p[i][j] * x[i]).sum()).collect();
        let lhs: f64 = (0..2).map(|j| (mj[j]).ln() + (1.0 / mj[j]).ln()).sum::<f64>() / 2.0;
        let rhs: f64 = (0..2)
            .map(|i| ((0..2).map(|j| p[i][j] * p[i][j] / mj[j]).sum::<f64>()).ln() + x[i].ln())
            .sum::<f64>()
            / 2.0;
        assert!((d.lhs - lhs).abs() < 1e-13);
        assert!((d.rhs - rhs).abs() < 1e-13);
        assert!(d.gap() >= -1e-12);
    }

    #[test]
    fn duality_near_equality_on_scaled_matrix() {
        let a = scalar_matrix(&[&[1.0, 2.0], &[0.5, 3.0]]);
        let (state, _) = sinkhorn_scale(&a, &ScalingOptions::new(1e-14, 10_000)).unwrap();
        let ones = vec![HermitianMatrix::identity(1); 2];
        let d = duality_check(&state.current, &ones).unwrap();
        assert!(d.gap() >= -1e-8 && d.gap() < 1e-6, "gap {}", d.gap());
    }

    #[test]
    fn single_precision_scaling() {
        let a = scalar_matrix(&[&[1.0, 1.0], &[1.0, 2.0]]).cast::<f32>();
        let (_, report) = sinkhorn_scale(&a, &ScalingOptions::new(1e-5f32, 1000)).unwrap();
        assert!(report.converged);
    }
}
