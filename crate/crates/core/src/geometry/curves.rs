use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lines::LineSet;
use super::poly::{effective_degree, poly_eval, poly_roots};
use super::{gaussian, gaussian_vector, DimensionReport, Mat, Vector, C64};
use crate::blockmat::BlockMatrix;
use crate::design::{design_rank_check, DesignParams, Mode, RankCheckOptions};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, log_abs_det, numerical_rank_rel};

/// Parametric curves `t -> sum_j v_j t^j` of a common degree `r` in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub d: usize,
    pub degree: usize,
    /// `r + 1` coefficient vectors per curve.
    pub curves: Vec<Vec<Vector>>,
}

impl CurveSet {
    pub fn new(d: usize, degree: usize, curves: Vec<Vec<Vector>>) -> Result<Self> {
        if d == 0 || degree == 0 {
            return Err(Error::InvalidArgument("need d >= 1 and degree >= 1".into()));
        }
        for (i, c) in curves.iter().enumerate() {
            if c.len() != degree + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "curve {} has {} coefficients, expected {}",
                    i + 1,
                    c.len(),
                    degree + 1
                )));
            }
            if let Some(j) = c.iter().position(|v| v.len() != d) {
                return Err(Error::DimensionMismatch(format!(
                    "curve {} coefficient {j} is not in C^{d}",
                    i + 1
                )));
            }
            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.camax()));
            if !c[1..].iter().any(|v| v.camax() > 1e-12 * scale.max(1e-300)) {
                return Err(Error::InvalidArgument(format!(
                    "curve {} needs a non constant polynomial coordinate",
                    i + 1
                )));
            }
        }
        Ok(Self { d, degree, curves })
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    /// `n(r+1) x d` with row `i(r+1) + j` equal to `v_ij`.
    pub fn gamma_matrix(&self) -> Mat {
        let w = self.degree + 1;
        Mat::from_fn(self.n() * w, self.d, |r, c| self.curves[r / w][r % w][c])
    }
}

pub fn curve_eval(coeffs: &[Vector], t: C64) -> Vector {
    let d = coeffs[0].len();
    coeffs
        .iter()
        .rev()
        .fold(Vector::zeros(d), |acc, v| acc * t + v)
}

/// `(1, t, .., t^r)` as a `1 x (r+1)` block.
pub fn moment_block(t: C64, r: usize) -> Mat {
    let mut out = Mat::zeros(1, r + 1);
    let mut p = C64::new(1.0, 0.0);
    for j in 0..=r {
        out[(0, j)] = p;
        p *= t;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub i: usize,
    pub j: usize,
    pub t: C64,
    pub t_prime: C64,
    /// `|gamma_i(t) - gamma_j(t')|`.
    pub residual: f64,
}

fn coordinate_poly(coeffs: &[Vector], a: usize) -> Vec<C64> {
    coeffs.iter().map(|v| v[a]).collect()
}

fn curve_scale(g1: &[Vector], g2: &[Vector]) -> f64 {
    g1.iter().chain(g2).fold(1.0f64, |m, v| m.max(v.camax()))
}

/// `det` of the Sylvester matrix of `f` and `g` (ascending coefficients, exact degrees),
/// with the Hadamard bound of the matrix.
fn sylvester_det(f: &[C64], g: &[C64]) -> Result<(C64, f64)> {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return Ok((C64::new(1.0, 0.0), 1.0));
    }
    let mut s = Mat::zeros(size, size);
    for row in 0..n {
        for (k, &c) in f.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in g.iter().rev().enumerate() {
            s[(n + row, row + k)] = c;
        }
    }
    let hadamard = s.row_iter().map(|r| r.norm()).product();
    let _ = log_abs_det(&s)?;
    Ok((s.determinant(), hadamard))
}

/// Coefficients in `s` of `Res_u(g1_a(s) - g2_a(u), g1_b(s) - g2_b(u))`, recovered by
/// sampling on the unit circle and an inverse DFT. `None` when numerically identically 0.
fn resultant_in_s(p1a: &[C64], p2a: &[C64], p1b: &[C64], p2b: &[C64], deg_bound: usize) -> Result<Option<Vec<C64>>> {
    let samples = deg_bound + 1;
    let ma = effective_degree(p2a, 1e-12).unwrap_or(0);
    let mb = effective_degree(p2b, 1e-12).unwrap_or(0);
    let mut values = Vec::with_capacity(samples);
    let mut hadamard: f64 = 0.0;
    for k in 0..samples {
        let s = C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
        let mut fa: Vec<C64> = p2a[..=ma].iter().map(|&c| -c).collect();
        fa[0] += poly_eval(p1a, s);
        let mut fb: Vec<C64> = p2b[..=mb].iter().map(|&c| -c).collect();
        fb[0] += poly_eval(p1b, s);
        let (det, h) = sylvester_det(&fa, &fb)?;
        values.push(det);
        hadamard = hadamard.max(h);
    }
    let coeffs: Vec<C64> = (0..samples)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(k, &v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / samples as f64))
                .sum::<C64>()
                / samples as f64
        })
        .collect();
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if max <= 1e-9 * hadamard.max(1e-300) {
        return Ok(None);
    }
    Ok(Some(coeffs))
}

/// Gauss-Newton on `g1(s) - g2(u) = 0` over all coordinates.
fn refine(g1: &[Vector], g2: &[Vector], mut s: C64, mut u: C64) -> (C64, C64, f64) {
    let d1: Vec<Vector> = (1..g1.len()).map(|j| &g1[j] * C64::new(j as f64, 0.0)).collect();
    let d2: Vec<Vector> = (1..g2.len()).map(|j| &g2[j] * C64::new(j as f64, 0.0)).collect();
    let residual = |s: C64, u: C64| curve_eval(g1, s) - curve_eval(g2, u);
    let mut f = residual(s, u);
    for _ in 0..8 {
        let js = if d1.is_empty() { Vector::zeros(f.len()) } else { curve_eval(&d1, s) };
        let ju = if d2.is_empty() { Vector::zeros(f.len()) } else { -curve_eval(&d2, u) };
        let jac = Mat::from_columns(&[js, ju]);
        let Ok(svd) = jac.clone().try_svd(true, true, f64::EPSILON, 1000).ok_or(()) else {
            break;
        };
        let Ok(step) = svd.solve(&f, 1e-14 * svd.singular_values.max()) else {
            break;
        };
        let (s2, u2) = (s - step[0], u - step[1]);
        let f2 = residual(s2, u2);
        if f2.norm() >= f.norm() {
            break;
        }
        s = s2;
        u = u2;
        f = f2;
    }
    (s, u, f.norm())
}

/// Intersections of two parametric curves as `(t, t', residual)`, at most one record
/// per intersection point.
pub fn curve_intersections(g1: &[Vector], g2: &[Vector]) -> Result<Vec<(C64, C64, f64)>> {
    let d = g1[0].len();
    if d < 2 || g2[0].len() != d {
        return Err(Error::InvalidArgument("curves must share a dimension d >= 2".into()));
    }
    let scale = curve_scale(g1, g2);
    let same = g1.len() == g2.len() && g1.iter().zip(g2).all(|(a, b)| (a - b).camax() <= 1e-12 * scale);
    if same {
        return Err(Error::InvalidArgument("identical curves".into()));
    }
    let r = (g1.len() - 1).max(g2.len() - 1);
    let deg = |p: &[C64]| effective_degree(p, 1e-12).unwrap_or(0);
    let p1: Vec<Vec<C64>> = (0..d).map(|a| coordinate_poly(g1, a)).collect();
    let p2: Vec<Vec<C64>> = (0..d).map(|a| coordinate_poly(g2, a)).collect();

    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let (da1, da2, db1, db2) = (deg(&p1[a]), deg(&p2[a]), deg(&p1[b]), deg(&p2[b]));
            if da2 + db2 == 0 || da1 + db1 == 0 {
                continue;
            }
            let full = [da1, da2, db1, db2].iter().all(|&x| x == r);
            let score = if full { 0 } else { 1 + 4 * r - (da1 + da2 + db1 + db2) };
            pairs.push((score, a, b));
        }
    }
    pairs.sort();

    let mut roots_s = None;
    for &(_, a, b) in &pairs {
        let bound = deg(&p2[b]) * deg(&p1[a]) + deg(&p2[a]) * deg(&p1[b]);
        if let Some(res) = resultant_in_s(&p1[a], &p2[a], &p1[b], &p2[b], bound)? {
            roots_s = Some(poly_roots(&res, 1e-9)?);
            break;
        }
    }
    let Some(roots_s) = roots_s else {
        return Err(Error::InvalidArgument(
            "curves share a component (every resultant vanishes)".into(),
        ));
    };

    let c = (0..d).max_by_key(|&a| (deg(&p2[a]), std::cmp::Reverse(a))).unwrap();
    let mut found: Vec<(C64, C64, f64, Vector)> = Vec::new();
    for s in roots_s {
        let target = poly_eval(&p1[c], s);
        let mut q: Vec<C64> = p2[c].clone();
        q[0] -= target;
        for u in poly_roots(&q, 1e-12)? {
            let (s, u, res) = refine(g1, g2, s, u);
            let point = curve_eval(g1, s);
            let tol = 1e-8 * point.camax().max(1.0);
            if res > tol {
                continue;
            }
            let dup = found
                .iter()
                .any(|f| (&f.3 - &point).camax() <= 1e-6 * point.camax().max(1.0));
            if !dup {
                found.push((s, u, res, point));
            }
        }
    }
    if found.len() > r * r {
        return Err(Error::NumericalFailure(format!(
            "{} intersection points exceed the cap r^2 = {}",
            found.len(),
            r * r
        )));
    }
    Ok(found.into_iter().map(|(s, u, res, _)| (s, u, res)).collect())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CurveOptions {
    pub k: Option<usize>,
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSummary {
    pub n: usize,
    pub d: usize,
    pub degree: usize,
    pub k: usize,
    /// Size of the certified greedy partition per curve, minimized over curves.
    pub k_prime: usize,
    pub incidences: usize,
    /// Largest number of incidences between one pair of curves.
    pub max_pair_incidences: usize,
    pub bezout_ok: bool,
    /// `|A Gamma| / (|A| |Gamma|)`.
    pub orthogonality: f64,
    /// `2 (r+1)^4 n / k`.
    pub bound_value: f64,
    pub report: DimensionReport,
}

#[derive(Debug, Clone)]
pub struct CurveAnalysis {
    pub a: BlockMatrix<f64>,
    pub gamma: Mat,
    pub incidences: Vec<Incidence>,
    pub summary: CurveSummary,
}

fn same_param(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-8 * a.norm().max(1.0)
}

/// Groups of `r + 1` distinct parameters, each taking one member from the currently
/// largest classes.
fn greedy_partition(params: &[C64], r: usize) -> usize {
    let mut classes: Vec<usize> = Vec::new();
    let mut reps: Vec<C64> = Vec::new();
    for &t in params {
        match reps.iter().position(|&x| same_param(x, t)) {
            Some(c) => classes[c] += 1,
            None => {
                reps.push(t);
                classes.push(1);
            }
        }
    }
    let mut groups = 0;
    loop {
        classes.sort_unstable_by(|a, b| b.cmp(a));
        if classes.len() < r + 1 || classes[r] == 0 {
            return groups;
        }
        for c in classes.iter_mut().take(r + 1) {
            *c -= 1;
        }
        groups += 1;
    }
}

pub fn curve_analysis(
    curves: &CurveSet,
    incidences: Option<&[Incidence]>,
    opts: &CurveOptions,
) -> Result<CurveAnalysis> {
    let n = curves.n();
    let r = curves.degree;
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 curves".into()));
    }
    let mut inc: Vec<Incidence> = match incidences {
        Some(given) => given.to_vec(),
        None => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    for (t, t_prime, residual) in curve_intersections(&curves.curves[i], &curves.curves[j])? {
                        out.push(Incidence { i, j, t, t_prime, residual });
                    }
                }
            }
            out
        }
    };
    for x in inc.iter_mut() {
        if x.i >= n || x.j >= n || x.i == x.j {
            return Err(Error::InvalidArgument(format!(
                "incidence ({}, {}) does not name two distinct curves",
                x.i + 1,
                x.j + 1
            )));
        }
        let p = curve_eval(&curves.curves[x.i], x.t);
        let q = curve_eval(&curves.curves[x.j], x.t_prime);
        x.residual = (&p - &q).norm();
        if x.residual > 1e-8 * p.camax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "incidence ({}, {}) has residual {:e}",
                x.i + 1,
                x.j + 1,
                x.residual
            )));
        }
    }
    if inc.is_empty() {
        return Err(Error::HypothesisFailure("no incidences".into()));
    }

    let mut per_pair = std::collections::BTreeMap::new();
    let mut params: Vec<Vec<C64>> = vec![Vec::new(); n];
    for x in &inc {
        *per_pair.entry((x.i.min(x.j), x.i.max(x.j))).or_insert(0usize) += 1;
        params[x.i].push(x.t);
        params[x.j].push(x.t_prime);
    }
    let max_pair_incidences = per_pair.values().copied().max().unwrap_or(0);
    let counts: Vec<usize> = params.iter().map(|p| p.len()).collect();
    let k = opts.k.unwrap_or_else(|| counts.iter().copied().min().unwrap_or(0));
    if k == 0 {
        return Err(Error::HypothesisFailure("some curve has no incidence (k = 0)".into()));
    }
    if let Some(i) = (0..n).find(|&i| counts[i] < k) {
        return Err(Error::HypothesisFailure(format!(
            "curve {} has {} incidences, fewer than k = {k}",
            i + 1,
            counts[i]
        )));
    }
    let per_curve: Vec<usize> = params.iter().map(|p| (r + 1) * greedy_partition(p, r)).collect();
    let k_prime = per_curve.iter().copied().min().unwrap_or(0);
    if 2 * k_prime < k {
        let i = per_curve.iter().position(|&x| x == k_prime).unwrap();
        return Err(Error::HypothesisFailure(format!(
            "curve {}: greedy partition certifies {k_prime} < k/2 blocks; too many incidences share a point",
            i + 1
        )));
    }

    let mut a = BlockMatrix::zeros(inc.len(), n, 1, r + 1)?;
    for (row, x) in inc.iter().enumerate() {
        a.set_block(row, x.i, &moment_block(x.t, r))?;
        a.set_block(row, x.j, &(-moment_block(x.t_prime, r)))?;
    }
    let gamma = curves.gamma_matrix();
    let flat = a.flatten();
    let orthogonality = frobenius(&(&flat * &gamma)) / (frobenius(&flat) * frobenius(&gamma));
    if orthogonality > 1e-6 {
        return Err(Error::NumericalFailure(format!(
            "|A Gamma| relative size {orthogonality:e} exceeds 1e-6"
        )));
    }
    let design = design_rank_check(
        &a,
        DesignParams::new(2, k_prime, r * r)?,
        Mode::Partition,
        &RankCheckOptions::default(),
    )?;
    let bound_value = 2.0 * ((r + 1) as f64).powi(4) * n as f64 / k as f64;
    let measured = numerical_rank_rel(&gamma, opts.tol_rank)?;
    Ok(CurveAnalysis {
        a,
        gamma,
        incidences: inc.clone(),
        summary: CurveSummary {
            n,
            d: curves.d,
            degree: r,
            k,
            k_prime,
            incidences: inc.len(),
            max_pair_incidences,
            bezout_ok: max_pair_incidences <= r * r,
            orthogonality,
            bound_value,
            report: DimensionReport::new(bound_value.floor() as i64, measured, Some(design)),
        },
    })
}

/// Lines `p + t u` as degree-1 curves with coefficients `(p, u)`.
pub fn lines_as_curves(lines: &LineSet) -> Result<CurveSet> {
    CurveSet::new(
        lines.d,
        1,
        lines
            .lines
            .iter()
            .map(|l| vec![l.base.clone(), l.direction.clone()])
            .collect(),
    )
}

/// `n` random conics whose coefficients lie in one random 2-dimensional subspace of `C^d`.
pub fn gen_conics(n: usize, d: usize, seed: u64) -> Result<CurveSet> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidArgument("need n >= 2 and d >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e1 = gaussian_vector(&mut rng, d);
    let e2 = gaussian_vector(&mut rng, d);
    let curves = (0..n)
        .map(|_| {
            (0..3)
                .map(|_| &e1 * gaussian(&mut rng) + &e2 * gaussian(&mut rng))
                .collect()
        })
        .collect();
    CurveSet::new(d, 2, curves)
}
