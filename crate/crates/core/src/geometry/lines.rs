use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gaussian, gaussian_vector, DimensionReport, Mat, Vector, C64};
use crate::blockmat::BlockMatrix;
use crate::design::{
    design_rank_check, select_well_spread, DesignParams, Mode, RankCheckOptions, WellSpreadOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, null_space, numerical_rank, numerical_rank_rel};

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub base: Vector,
    pub direction: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub d: usize,
    pub lines: Vec<Line>,
}

impl LineSet {
    pub fn new(d: usize, lines: Vec<Line>) -> Result<Self> {
        for (i, l) in lines.iter().enumerate() {
            if l.base.len() != d || l.direction.len() != d {
                return Err(Error::DimensionMismatch(format!("line {} is not in C^{d}", i + 1)));
            }
            if l.direction.norm() == 0.0 {
                return Err(Error::InvalidArgument(format!("line {} has zero direction", i + 1)));
            }
        }
        Ok(Self { d, lines })
    }

    pub fn n(&self) -> usize {
        self.lines.len()
    }
}

/// Embeds affine lines as the 2-spaces `span{(p, 1), (u, 0)}` of `C^{d+1}`.
pub fn homogenize(lines: &LineSet) -> LineSet {
    let d = lines.d;
    let lift = |v: &Vector, last: f64| Vector::from_fn(d + 1, |r, _| if r < d { v[r] } else { C64::new(last, 0.0) });
    LineSet {
        d: d + 1,
        lines: lines
            .lines
            .iter()
            .map(|l| Line {
                base: lift(&l.base, 1.0),
                direction: lift(&l.direction, 0.0),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LineOptions {
    pub k: Option<usize>,
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineSummary {
    pub n: usize,
    pub d: usize,
    pub homogeneous: bool,
    pub k: usize,
    /// Intersecting pairs, zero-based.
    pub pairs: Vec<(usize, usize)>,
    pub orthogonality: f64,
    pub report: DimensionReport,
}

#[derive(Debug, Clone)]
pub struct LineAnalysis {
    pub a_c: BlockMatrix<f64>,
    /// `2n x d'`; rows `u_i`, `v_i` of each 2-space.
    pub a_v: Mat,
    pub summary: LineSummary,
}

pub fn line_analysis(lines: &LineSet, homogeneous: bool, opts: &LineOptions) -> Result<LineAnalysis> {
    let n = lines.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 lines".into()));
    }
    let spaces = if homogeneous { lines.clone() } else { homogenize(lines) };
    let dp = spaces.d;
    let uv: Vec<(Vector, Vector)> = spaces
        .lines
        .iter()
        .map(|l| (l.base.clone(), l.direction.clone()))
        .collect();
    for (i, (u, v)) in uv.iter().enumerate() {
        if numerical_rank(&Mat::from_columns(&[u.clone(), v.clone()]), None)? != 2 {
            return Err(Error::InvalidArgument(format!(
                "line {} does not span a 2-space",
                i + 1
            )));
        }
    }

    let mut pairs = Vec::new();
    let mut rows: Vec<(usize, usize, [C64; 4])> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = Mat::from_columns(&[uv[i].0.clone(), uv[i].1.clone(), uv[j].0.clone(), uv[j].1.clone()]);
            let ker = null_space(&m, frobenius(&m))?;
            match ker.ncols() {
                0 => continue,
                1 => {}
                _ => {
                    return Err(Error::DegeneratePair(format!(
                        "lines {} and {} coincide",
                        i + 1,
                        j + 1
                    )))
                }
            }
            let x = [ker[(0, 0)], ker[(1, 0)], ker[(2, 0)], ker[(3, 0)]];
            let h1 = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
            let h2 = (x[2].norm_sqr() + x[3].norm_sqr()).sqrt();
            if h1 <= 1e-8 || h2 <= 1e-8 {
                return Err(Error::DegeneratePair(format!(
                    "lines {} and {}: intersection relation has a vanishing half",
                    i + 1,
                    j + 1
                )));
            }
            pairs.push((i, j));
            rows.push((i, j, x));
        }
    }
    if rows.is_empty() {
        return Err(Error::HypothesisFailure("no two lines meet".into()));
    }
    let mut a_c = BlockMatrix::zeros(rows.len(), n, 1, 2)?;
    for (row, &(i, j, x)) in rows.iter().enumerate() {
        a_c.set_block(row, i, &Mat::from_row_slice(1, 2, &x[..2]))?;
        a_c.set_block(row, j, &Mat::from_row_slice(1, 2, &x[2..]))?;
    }

    let mut meets = vec![0usize; n];
    for &(i, j) in &pairs {
        meets[i] += 1;
        meets[j] += 1;
    }
    let k = opts.k.unwrap_or_else(|| meets.iter().copied().min().unwrap_or(0));
    if k == 0 {
        return Err(Error::HypothesisFailure("some line meets no other line (k = 0)".into()));
    }
    if let Some(i) = (0..n).find(|&i| meets[i] < k) {
        return Err(Error::HypothesisFailure(format!(
            "line {} meets {} others, fewer than k = {k}",
            i + 1,
            meets[i]
        )));
    }
    let ws = WellSpreadOptions::default();
    for i in 0..n {
        let blocks: Vec<Mat> = (0..rows.len())
            .filter(|&r| rows[r].0 == i || rows[r].1 == i)
            .map(|r| a_c.block(r, i).into_owned())
            .collect();
        if select_well_spread(&blocks, k, Mode::Covector, &ws)?.is_none() {
            return Err(Error::HypothesisFailure(format!(
                "line {}: more than k/2 = {} of its {k} chosen neighbours meet it in one point",
                i + 1,
                k as f64 / 2.0
            )));
        }
    }

    let a_v = Mat::from_fn(2 * n, dp, |r, c| if r % 2 == 0 { uv[r / 2].0[c] } else { uv[r / 2].1[c] });
    let flat = a_c.flatten();
    let orthogonality = frobenius(&(&flat * &a_v)) / (frobenius(&flat) * frobenius(&a_v));
    if orthogonality > 1e-6 {
        return Err(Error::NumericalFailure(format!(
            "|A_C A_V| relative size {orthogonality:e} exceeds 1e-6"
        )));
    }
    let design = design_rank_check(
        &a_c,
        DesignParams::new(2, k, 1)?,
        Mode::Covector,
        &RankCheckOptions::default(),
    )?;
    let span = numerical_rank_rel(&a_v, opts.tol_rank)?;
    let affine = usize::from(!homogeneous);
    let bound = (4 * n / (k + 2)) as i64 - affine as i64;
    Ok(LineAnalysis {
        a_c,
        a_v,
        summary: LineSummary {
            n,
            d: lines.d,
            homogeneous,
            k,
            pairs,
            orthogonality,
            report: DimensionReport::new(bound, span - affine, Some(design)),
        },
    })
}

fn plane_frame(rng: &mut ChaCha8Rng, d: usize) -> (Vector, Vector, Vector) {
    (gaussian_vector(rng, d), gaussian_vector(rng, d), gaussian_vector(rng, d))
}

fn embed(o: &Vector, e1: &Vector, e2: &Vector, x: C64, y: C64) -> Vector {
    o + e1 * x + e2 * y
}

/// `n` random lines in a random 2-flat of `C^d`, no two parallel and no three concurrent.
pub fn gen_pencil_lines(n: usize, d: usize, seed: u64) -> Result<LineSet> {
    if n < 3 || d < 2 {
        return Err(Error::InvalidArgument("pencil needs n >= 3 and d >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'draw: for _ in 0..100 {
        let (o, e1, e2) = plane_frame(&mut rng, d);
        let p: Vec<[C64; 2]> = (0..n).map(|_| [gaussian(&mut rng), gaussian(&mut rng)]).collect();
        let u: Vec<[C64; 2]> = (0..n).map(|_| [gaussian(&mut rng), gaussian(&mut rng)]).collect();
        // Parameter of the meeting point with every other line, per line.
        let mut params = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // p_i + s u_i = p_j + s' u_j
                let det = u[i][0] * (-u[j][1]) - u[i][1] * (-u[j][0]);
                if det.norm() < 1e-6 {
                    continue 'draw;
                }
                let rx = p[j][0] - p[i][0];
                let ry = p[j][1] - p[i][1];
                params[i].push((rx * (-u[j][1]) - ry * (-u[j][0])) / det);
            }
        }
        for ps in &params {
            for a in 0..ps.len() {
                for b in a + 1..ps.len() {
                    if (ps[a] - ps[b]).norm() < 1e-6 {
                        continue 'draw;
                    }
                }
            }
        }
        let lines = (0..n)
            .map(|i| Line {
                base: embed(&o, &e1, &e2, p[i][0], p[i][1]),
                direction: embed(&Vector::zeros(d), &e1, &e2, u[i][0], u[i][1]),
            })
            .collect();
        return LineSet::new(d, lines);
    }
    Err(Error::ConstructionFailure("no generic pencil in 100 draws".into()))
}

/// `n` lines in a random 2-flat of `C^d`, all through one point.
pub fn gen_concurrent_lines(n: usize, d: usize, seed: u64) -> Result<LineSet> {
    if n < 3 || d < 2 {
        return Err(Error::InvalidArgument("need n >= 3 and d >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (o, e1, e2) = plane_frame(&mut rng, d);
    let lines = (0..n)
        .map(|_| {
            let (x, y) = (gaussian(&mut rng), gaussian(&mut rng));
            Line {
                base: o.clone(),
                direction: &e1 * x + &e2 * y,
            }
        })
        .collect();
    LineSet::new(d, lines)
}
