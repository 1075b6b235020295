use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gaussian, gaussian_vector, Mat, Triples, Vector};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::scalar::abs;

/// Default bound on the normalized triangle area of a collinear triple.
pub const DEFAULT_COLLINEAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PointList {
    pub d: usize,
    pub points: Vec<Vector>,
}

impl PointList {
    pub fn new(d: usize, points: Vec<Vector>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "point {i} has {} coordinates, expected {d}",
                p.len()
            )));
        }
        Ok(Self { d, points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Largest coordinate magnitude, at least 1.
    pub fn scale(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.iter())
            .fold(1.0f64, |m, z| m.max(abs(*z)))
    }
}

/// `Delta(w)`: row `l - 1` is `(w_l, 0, .., -w_1, .., 0)` with `-w_1` in column `l`.
pub fn delta_block(w: &Vector) -> Mat {
    let d = w.len();
    let mut out = Mat::zeros(d.saturating_sub(1), d);
    for l in 1..d {
        out[(l - 1, 0)] = w[l];
        out[(l - 1, l)] = -w[0];
    }
    out
}

/// `|u ^ w| / (|u| |w|)` through the Lagrange identity; `0` if either vector vanishes.
pub fn collinearity_residual(u: &Vector, w: &Vector) -> f64 {
    let nu = u.norm();
    let nw = w.norm();
    if nu == 0.0 || nw == 0.0 {
        return 0.0;
    }
    let mut wedge = 0.0;
    for a in 0..u.len() {
        for b in a + 1..u.len() {
            wedge += (u[a] * w[b] - u[b] * w[a]).norm_sqr();
        }
    }
    wedge.sqrt() / (nu * nw)
}

pub(crate) fn triple_residual(points: &[Vector], [i, j, k]: [usize; 3]) -> f64 {
    collinearity_residual(&(&points[j] - &points[i]), &(&points[k] - &points[i]))
}

/// Applies `x -> Mx + b` with `M`, `b` seeded complex Gaussians, redrawing until `M` is
/// well conditioned and all pairwise first-coordinate differences are separated.
pub fn generic_transform(points: &PointList, seed: u64) -> Result<PointList> {
    let d = points.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let m = Mat::from_fn(d, d, |_, _| gaussian(&mut rng));
        let b = gaussian_vector(&mut rng, d);
        let s = singular_values(&m)?;
        if s[d - 1] <= 0.0 || s[0] / s[d - 1] >= 1e4 {
            continue;
        }
        let moved: Vec<Vector> = points.points.iter().map(|p| &m * p + &b).collect();
        let out = PointList { d, points: moved };
        let tol = 1e-8 * out.scale();
        let separated = (0..out.n()).all(|i| {
            (i + 1..out.n()).all(|j| abs(out.points[i][0] - out.points[j][0]) > tol)
        });
        if separated {
            return Ok(out);
        }
    }
    Err(Error::DegenerateConfiguration(
        "no generic transform separated the first coordinates in 100 draws".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearTriples {
    /// `i < j < k`, lexicographic.
    pub triples: Triples,
    /// Fraction of the other points `j` whose line through `v_i` holds a third point.
    pub delta: Vec<f64>,
}

impl CollinearTriples {
    pub fn min_delta(&self) -> f64 {
        self.delta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn collinear_triples(points: &PointList, tol: f64) -> CollinearTriples {
    let n = points.n();
    let p = &points.points;
    let mut triples = Vec::new();
    let mut partner = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if triple_residual(p, [i, j, k]) <= tol {
                    triples.push([i, j, k]);
                    for (a, b) in [(i, j), (i, k), (j, k)] {
                        partner[a][b] = true;
                        partner[b][a] = true;
                    }
                }
            }
        }
    }
    let delta = (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            partner[i].iter().filter(|&&x| x).count() as f64 / (n - 1) as f64
        })
        .collect();
    CollinearTriples { triples, delta }
}

/// The `s x s` integer grid and all its collinear triples.
pub fn gen_grid(s: usize) -> Result<(PointList, Triples)> {
    if s < 3 {
        return Err(Error::InvalidArgument("grid side must be >= 3".into()));
    }
    let pts = (0..s)
        .flat_map(|a| (0..s).map(move |b| Vector::from_vec(vec![(a as f64).into(), (b as f64).into()])))
        .collect();
    let pl = PointList::new(2, pts)?;
    let triples = collinear_triples(&pl, DEFAULT_COLLINEAR_TOL).triples;
    Ok((pl, triples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.iter().map(|&x| re(x)).collect())
    }

    #[test]
    fn delta_examples() {
        let d = delta_block(&v(&[1.0, 0.0, 0.0]));
        assert_eq!(d, Mat::from_row_slice(2, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, -1.0].map(re)));
        let w = v(&[1.0, 2.0, 3.0]);
        let d = delta_block(&w);
        assert_eq!(d, Mat::from_row_slice(2, 3, &[2.0, -1.0, 0.0, 3.0, 0.0, -1.0].map(re)));
        assert_eq!((&d * &w).norm(), 0.0);
        // w_1 = 0: the kernel is not span(w).
        let d = delta_block(&v(&[0.0, 1.0]));
        assert_eq!(d, Mat::from_row_slice(1, 2, &[1.0, 0.0].map(re)));
        assert!((&d * v(&[0.0, 1.0])).norm() == 0.0);
        assert!((&d * v(&[1.0, 0.0])).norm() > 0.0);
    }

    #[test]
    fn grid_has_eight_triples() {
        let (pl, t) = gen_grid(3).unwrap();
        assert_eq!(pl.n(), 9);
        assert_eq!(t.len(), 8);
        let ct = collinear_triples(&pl, DEFAULT_COLLINEAR_TOL);
        assert_eq!(ct.min_delta(), 0.5);
    }

    #[test]
    fn collinear_basics() {
        let line = PointList::new(2, vec![v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[3.0, 3.0])]).unwrap();
        assert_eq!(collinear_triples(&line, 1e-8).triples, vec![[0, 1, 2]]);
        let gen = PointList::new(2, vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[2.0, 3.0])]).unwrap();
        assert!(collinear_triples(&gen, 1e-8).triples.is_empty());
    }

    #[test]
    fn transform_separates_and_preserves_lines() {
        let pl = PointList::new(2, vec![v(&[0.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 2.0]), v(&[1.0, 5.0])]).unwrap();
        let out = generic_transform(&pl, 7).unwrap();
        let tol = 1e-8 * out.scale();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(abs(out.points[i][0] - out.points[j][0]) > tol);
            }
        }
        assert!(triple_residual(&out.points, [0, 1, 2]) <= 1e-8);
        assert_eq!(out, generic_transform(&pl, 7).unwrap());
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let pl = PointList::new(2, vec![v(&[1.0, 1.0]), v(&[1.0, 1.0])]).unwrap();
        assert!(matches!(generic_transform(&pl, 0), Err(Error::DegenerateConfiguration(_))));
    }
}
