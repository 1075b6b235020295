//! Well-spread verification for sets of `r x c` blocks.
//!
//! A set `A_1..A_s` is well spread when `sum_i dim(A_i V) >= (rs/c) dim V` for every
//! subspace `V` of `C^c`. The structured modes enumerate a finite family of candidate
//! subspaces that is guaranteed to contain a violator whenever one exists.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_space, frobenius, null_space, rank_at_scale};
use crate::scalar::{cx, CMat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `r = c`; well spread iff every block is nonsingular.
    Square,
    /// `r = c - 1` with full-rank blocks; decided by the kernel lines.
    KernelLine,
    /// `r = 1`; decided by spans of the covectors.
    Covector,
    /// Sufficient condition: a partition into groups of `c/r` blocks with nonsingular stacks.
    Partition,
    /// Random and kernel-derived candidate subspaces; never exhaustive.
    Heuristic,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Square,
        Mode::KernelLine,
        Mode::Covector,
        Mode::Partition,
        Mode::Heuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Square => "square",
            Mode::KernelLine => "kernel-line",
            Mode::Covector => "covector",
            Mode::Partition => "partition",
            Mode::Heuristic => "heuristic",
        }
    }

    /// Checks the block shape requirement of the mode.
    pub fn check_shape(self, r: usize, c: usize) -> Result<()> {
        let ok = match self {
            Mode::Square => r == c,
            Mode::KernelLine => c >= 2 && r + 1 == c,
            Mode::Covector => r == 1,
            Mode::Partition => r >= 1 && c.is_multiple_of(r),
            Mode::Heuristic => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMode(format!(
                "mode {} does not apply to {r}x{c} blocks",
                self.name()
            )))
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('-', "_") == s)
            .ok_or_else(|| Error::InvalidMode(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// No violation found, but the search was not exhaustive.
    Inconclusive,
}

/// A subspace `V` with `c * sum dim(A_i V) < r * s * dim V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Orthonormal basis vectors of `V`, entries as `[re, im]`.
    pub basis: Vec<Vec<[f64; 2]>>,
    pub dim: usize,
    pub image_dim_sum: usize,
    /// `(rs/c) dim V`.
    pub required: f64,
}

impl Witness {
    pub fn basis_matrix<T: Real>(&self, c: usize) -> CMat<T> {
        CMat::from_fn(c, self.basis.len(), |row, col| {
            let [re, im] = self.basis[col][row];
            cx(T::lit(re), T::lit(im))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellSpreadCertificate {
    pub mode: Mode,
    pub verdict: Verdict,
    pub exhaustive: bool,
    pub s: usize,
    pub r: usize,
    pub c: usize,
    pub witness: Option<Witness>,
    /// Smallest `sum dim(A_i V) - (rs/c) dim V` over the examined subspaces.
    pub margin: Option<f64>,
    /// Partition groups (indices into the block list) in partition mode.
    pub groups: Option<Vec<Vec<usize>>>,
    pub candidates: usize,
    pub note: Option<String>,
}

impl WellSpreadCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WellSpreadOptions {
    /// Random subspaces drawn per dimension in heuristic search.
    pub samples: usize,
    pub seed: u64,
    /// Largest number of enumerated subsets before falling back to heuristic search.
    pub enumeration_cap: u64,
}

impl Default for WellSpreadOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            enumeration_cap: 10_000_000,
        }
    }
}

fn block_shape<T: Real>(blocks: &[CMat<T>]) -> Result<(usize, usize)> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty block set".into()))?;
    let (r, c) = first.shape();
    if r == 0 || c == 0 {
        return Err(Error::InvalidArgument("blocks must be nonempty".into()));
    }
    if let Some((i, b)) = blocks.iter().enumerate().find(|(_, b)| b.shape() != (r, c)) {
        return Err(Error::DimensionMismatch(format!(
            "block {i} is {}x{}, expected {r}x{c}",
            b.nrows(),
            b.ncols()
        )));
    }
    Ok((r, c))
}

/// `sum_i dim(A_i V)` for `V` spanned by the orthonormal columns of `basis`, each rank
/// measured at the scale of the block's Frobenius norm.
pub fn image_dim_sum<T: Real>(blocks: &[CMat<T>], basis: &CMat<T>) -> Result<usize> {
    let mut total = 0;
    for b in blocks {
        if basis.ncols() == 0 {
            break;
        }
        total += rank_at_scale(&(b * basis), frobenius(b))?;
    }
    Ok(total)
}

/// Independently re-verifies a failing certificate's witness against the blocks.
pub fn recheck_witness<T: Real>(blocks: &[CMat<T>], witness: &Witness) -> Result<bool> {
    let (r, c) = block_shape(blocks)?;
    let raw = witness.basis_matrix::<T>(c);
    let q = column_space(&raw, T::one())?;
    let dim = q.ncols();
    let sum = image_dim_sum(blocks, &q)?;
    Ok(c * sum < r * blocks.len() * dim)
}

fn to_witness<T: Real>(basis: &CMat<T>, sum: usize, r: usize, s: usize, c: usize) -> Witness {
    Witness {
        basis: basis
            .column_iter()
            .map(|col| col.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect())
            .collect(),
        dim: basis.ncols(),
        image_dim_sum: sum,
        required: (r * s * basis.ncols()) as f64 / c as f64,
    }
}

/// Tracks the worst candidate of a scan against the requirement for a final set of
/// `target` blocks, of which the scanned blocks are a prefix.
struct Scan<'a, T: Real> {
    blocks: &'a [CMat<T>],
    r: usize,
    c: usize,
    target: usize,
    candidates: usize,
    /// `(slack * c, basis, sum)` of the worst candidate so far.
    worst: Option<(i64, CMat<T>, usize)>,
}

impl<'a, T: Real> Scan<'a, T> {
    fn new(blocks: &'a [CMat<T>], r: usize, c: usize, target: usize) -> Self {
        Self {
            blocks,
            r,
            c,
            target,
            candidates: 0,
            worst: None,
        }
    }

    /// Scaled slack `c * (S + (target - p) min(r, dim)) - r * target * dim`; the blocks
    /// still to be added contribute at most `min(r, dim)` each.
    fn visit(&mut self, basis: CMat<T>) -> Result<()> {
        let dim = basis.ncols();
        if dim == 0 {
            return Ok(());
        }
        self.candidates += 1;
        let sum = image_dim_sum(self.blocks, &basis)?;
        let future = (self.target - self.blocks.len()) * self.r.min(dim);
        let slack = (self.c * (sum + future)) as i64 - (self.r * self.target * dim) as i64;
        if self.worst.as_ref().is_none_or(|w| slack < w.0) {
            self.worst = Some((slack, basis, sum));
        }
        Ok(())
    }

    fn violated(&self) -> bool {
        self.worst.as_ref().is_some_and(|w| w.0 < 0)
    }

    fn margin(&self) -> Option<f64> {
        self.worst.as_ref().map(|w| w.0 as f64 / self.c as f64)
    }
}

/// Groups numerically parallel unit vectors; returns one representative per direction.
fn distinct_directions<T: Real>(vectors: &[CMat<T>]) -> Result<Vec<CMat<T>>> {
    let mut reps: Vec<CMat<T>> = Vec::new();
    for v in vectors {
        let mut dup = false;
        for rep in &reps {
            let pair = CMat::from_fn(v.nrows(), 2, |i, j| if j == 0 { rep[(i, 0)] } else { v[(i, 0)] });
            if rank_at_scale(&pair, T::one())? < 2 {
                dup = true;
                break;
            }
        }
        if !dup {
            reps.push(v.clone());
        }
    }
    Ok(reps)
}

fn unit<T: Real>(v: CMat<T>) -> CMat<T> {
    let n = frobenius(&v);
    v.unscale(n)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn stack_columns<T: Real>(vectors: &[&CMat<T>]) -> CMat<T> {
    let rows = vectors[0].nrows();
    CMat::from_fn(rows, vectors.len(), |i, j| vectors[j][(i, 0)])
}

fn stack_rows<T: Real>(blocks: &[&CMat<T>]) -> CMat<T> {
    let c = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, c);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Unit kernel vector of each full-rank `(c-1) x c` block.
fn kernel_lines<T: Real>(blocks: &[CMat<T>]) -> Result<Vec<CMat<T>>> {
    let mut out = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let k = null_space(b, frobenius(b))?;
        if k.ncols() != 1 {
            return Err(Error::InvalidMode(format!(
                "block {i} is not of full rank {}; its kernel has dimension {}",
                b.nrows(),
                k.ncols()
            )));
        }
        out.push(k);
    }
    Ok(out)
}

/// Number of subsets the exact modes enumerate for `u` distinct directions.
fn enumeration_size(u: usize, c: usize) -> u64 {
    (1..c).fold(0u64, |acc, l| acc.saturating_add(binomial(u, l)))
}

fn scan_kernel_lines<T: Real>(scan: &mut Scan<'_, T>, lines: &[CMat<T>]) -> Result<()> {
    let c = scan.c;
    let reps = distinct_directions(lines)?;
    for l in 1..c {
        for_each_subset(reps.len(), l, &mut |sub| {
            let cols: Vec<&CMat<T>> = sub.iter().map(|&i| &reps[i]).collect();
            let q = column_space(&stack_columns(&cols), T::one())?;
            if q.ncols() == l {
                scan.visit(q)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn scan_covectors<T: Real>(scan: &mut Scan<'_, T>) -> Result<()> {
    let c = scan.c;
    let rows: Vec<CMat<T>> = scan
        .blocks
        .iter()
        .filter(|b| frobenius(*b) > T::zero())
        .map(|b| unit(b.adjoint()))
        .collect();
    let reps = distinct_directions(&rows)?;
    for rho in 1..c {
        for_each_subset(reps.len(), rho, &mut |sub| {
            let cols: Vec<&CMat<T>> = sub.iter().map(|&i| &reps[i]).collect();
            let stacked = stack_columns(&cols).adjoint();
            if rank_at_scale(&stacked, T::one())? == rho {
                scan.visit(null_space(&stacked, T::one())?)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn random_subspace<T: Real>(rng: &mut ChaCha8Rng, c: usize, dim: usize) -> Result<CMat<T>> {
    let raw = CMat::from_fn(c, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        cx(T::lit(re), T::lit(im))
    });
    column_space(&raw, T::one())
}

fn scan_heuristic<T: Real>(scan: &mut Scan<'_, T>, opts: &WellSpreadOptions) -> Result<()> {
    let c = scan.c;
    let kernels: Vec<CMat<T>> = scan
        .blocks
        .iter()
        .map(|b| null_space(b, frobenius(b)))
        .collect::<Result<_>>()?;
    let mut seen: Vec<CMat<T>> = Vec::new();
    let add = |q: CMat<T>, seen: &mut Vec<CMat<T>>| -> Result<Option<CMat<T>>> {
        if q.ncols() == 0 || q.ncols() > c {
            return Ok(None);
        }
        for p in seen.iter() {
            if p.ncols() == q.ncols() {
                let joined = CMat::from_fn(c, 2 * q.ncols(), |i, j| {
                    if j < q.ncols() { p[(i, j)] } else { q[(i, j - q.ncols())] }
                });
                if rank_at_scale(&joined, T::one())? == q.ncols() {
                    return Ok(None);
                }
            }
        }
        seen.push(q.clone());
        Ok(Some(q))
    };
    for k in &kernels {
        if let Some(q) = add(k.clone(), &mut seen)? {
            scan.visit(q)?;
        }
    }
    for a in 0..kernels.len() {
        for b in a + 1..kernels.len() {
            let (ka, kb) = (&kernels[a], &kernels[b]);
            if ka.ncols() == 0 || kb.ncols() == 0 {
                continue;
            }
            let joined = CMat::from_fn(c, ka.ncols() + kb.ncols(), |i, j| {
                if j < ka.ncols() { ka[(i, j)] } else { kb[(i, j - ka.ncols())] }
            });
            if let Some(q) = add(column_space(&joined, T::one())?, &mut seen)? {
                scan.visit(q)?;
            }
            let stacked = stack_rows(&[&ka.adjoint(), &kb.adjoint()]);
            if let Some(q) = add(null_space(&stacked, T::one())?, &mut seen)? {
                scan.visit(q)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for dim in 1..c {
        for _ in 0..opts.samples {
            scan.visit(random_subspace(&mut rng, c, dim)?)?;
        }
    }
    Ok(())
}

fn full_space<T: Real>(c: usize) -> CMat<T> {
    CMat::identity(c, c)
}

/// First-fit grouping into groups of `c/r` blocks whose stacks are nonsingular. Stops
/// once `max_groups` groups are complete.
pub(crate) fn partition_groups<T: Real>(
    blocks: &[CMat<T>],
    max_groups: usize,
) -> Result<Vec<Vec<usize>>> {
    let (r, c) = block_shape(blocks)?;
    let g = c / r;
    let mut open: Vec<Vec<usize>> = Vec::new();
    let mut done: Vec<Vec<usize>> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        if done.len() >= max_groups {
            break;
        }
        let scale = frobenius(b);
        if rank_at_scale(b, scale)? < r {
            continue;
        }
        let mut placed = None;
        for (gi, group) in open.iter().enumerate() {
            let mut members: Vec<&CMat<T>> = group.iter().map(|&x| &blocks[x]).collect();
            members.push(b);
            let stacked = stack_rows(&members);
            let s = members.iter().fold(T::zero(), |m, x| m.max(frobenius(*x)));
            if rank_at_scale(&stacked, s)? == r * members.len() {
                placed = Some(gi);
                break;
            }
        }
        match placed {
            Some(gi) => {
                open[gi].push(i);
                if open[gi].len() == g {
                    done.push(open.remove(gi));
                }
            }
            None if g == 1 => done.push(vec![i]),
            None => open.push(vec![i]),
        }
    }
    done.sort();
    Ok(done)
}

fn certificate<T: Real>(
    scan: &Scan<'_, T>,
    mode: Mode,
    exhaustive: bool,
    note: Option<String>,
) -> WellSpreadCertificate {
    let s = scan.blocks.len();
    let violated = scan.violated();
    let verdict = match (violated, exhaustive) {
        (true, _) => Verdict::Fail,
        (false, true) => Verdict::Pass,
        (false, false) if mode == Mode::Heuristic => Verdict::Pass,
        (false, false) => Verdict::Inconclusive,
    };
    WellSpreadCertificate {
        mode,
        verdict,
        exhaustive,
        s,
        r: scan.r,
        c: scan.c,
        witness: if violated {
            scan.worst
                .as_ref()
                .map(|w| to_witness(&w.1, w.2, scan.r, s, scan.c))
        } else {
            None
        },
        margin: scan.margin(),
        groups: None,
        candidates: scan.candidates,
        note,
    }
}

/// Runs the exact scan of `mode` (or the heuristic one) against a final set size `target`.
fn run_scan<'a, T: Real>(
    blocks: &'a [CMat<T>],
    mode: Mode,
    target: usize,
    opts: &WellSpreadOptions,
) -> Result<(Scan<'a, T>, bool, Option<String>)> {
    let (r, c) = block_shape(blocks)?;
    let mut scan = Scan::new(blocks, r, c, target);
    scan.visit(full_space(c))?;
    let mut exhaustive = true;
    let mut note = None;
    match mode {
        Mode::Square => {
            for b in blocks {
                let k = null_space(b, frobenius(b))?;
                if k.ncols() > 0 {
                    scan.visit(k.columns(0, 1).into_owned())?;
                }
            }
        }
        Mode::KernelLine => {
            let lines = kernel_lines(blocks)?;
            let u = distinct_directions(&lines)?.len();
            if enumeration_size(u, c) > opts.enumeration_cap {
                note = Some(format!("{u} kernel lines exceed the enumeration cap; searched heuristically"));
                exhaustive = false;
                scan_heuristic(&mut scan, opts)?;
            } else {
                scan_kernel_lines(&mut scan, &lines)?;
            }
        }
        Mode::Covector => {
            let u = blocks.len();
            if enumeration_size(u, c) > opts.enumeration_cap {
                note = Some(format!("{u} covectors exceed the enumeration cap; searched heuristically"));
                exhaustive = false;
                scan_heuristic(&mut scan, opts)?;
            } else {
                scan_covectors(&mut scan)?;
            }
        }
        Mode::Heuristic => {
            exhaustive = false;
            scan_heuristic(&mut scan, opts)?;
        }
        Mode::Partition => unreachable!("partition is not a scan"),
    }
    Ok((scan, exhaustive, note))
}

pub fn check_well_spread<T: Real>(blocks: &[CMat<T>], mode: Mode) -> Result<WellSpreadCertificate> {
    check_well_spread_with(blocks, mode, &WellSpreadOptions::default())
}

pub fn check_well_spread_with<T: Real>(
    blocks: &[CMat<T>],
    mode: Mode,
    opts: &WellSpreadOptions,
) -> Result<WellSpreadCertificate> {
    let (r, c) = block_shape(blocks)?;
    mode.check_shape(r, c)?;
    let s = blocks.len();
    if mode != Mode::Partition {
        let (scan, exhaustive, note) = run_scan(blocks, mode, s, opts)?;
        return Ok(certificate(&scan, mode, exhaustive, note));
    }
    let g = c / r;
    let groups = if s.is_multiple_of(g) {
        partition_groups(blocks, s / g)?
    } else {
        Vec::new()
    };
    if s.is_multiple_of(g) && groups.len() == s / g {
        return Ok(WellSpreadCertificate {
            mode,
            verdict: Verdict::Pass,
            exhaustive: true,
            s,
            r,
            c,
            witness: None,
            margin: None,
            groups: Some(groups),
            candidates: 0,
            note: None,
        });
    }
    // No partition found: decide exactly when a structured mode applies.
    let fallback = if r == 1 {
        Mode::Covector
    } else if r + 1 == c {
        Mode::KernelLine
    } else {
        Mode::Heuristic
    };
    let lines_ok = fallback != Mode::KernelLine || kernel_lines(blocks).is_ok();
    let fallback = if lines_ok { fallback } else { Mode::Heuristic };
    let (scan, exhaustive, note) = run_scan(blocks, fallback, s, opts)?;
    let mut cert = certificate(&scan, Mode::Partition, exhaustive, note);
    cert.groups = Some(groups);
    let msg = format!("no partition into nonsingular groups; checked in {fallback} mode");
    cert.note = Some(match cert.note {
        Some(n) => format!("{msg}; {n}"),
        None => msg,
    });
    Ok(cert)
}

/// Chooses `target` of the blocks forming a well-spread set, greedily in order.
///
/// Returns indices into `blocks`, or `None` when the greedy pass does not reach `target`.
pub fn select_well_spread<T: Real>(
    blocks: &[CMat<T>],
    target: usize,
    mode: Mode,
    opts: &WellSpreadOptions,
) -> Result<Option<Vec<usize>>> {
    if target == 0 {
        return Ok(Some(Vec::new()));
    }
    if blocks.len() < target {
        return Ok(None);
    }
    let (r, c) = block_shape(blocks)?;
    mode.check_shape(r, c)?;
    match mode {
        Mode::Square => {
            let mut chosen = Vec::with_capacity(target);
            for (i, b) in blocks.iter().enumerate() {
                if chosen.len() == target {
                    break;
                }
                if rank_at_scale(b, frobenius(b))? == r {
                    chosen.push(i);
                }
            }
            Ok((chosen.len() == target).then_some(chosen))
        }
        Mode::Partition => {
            let g = c / r;
            let groups = partition_groups(blocks, target.div_ceil(g))?;
            if groups.len() * g < target {
                return Ok(None);
            }
            let mut chosen: Vec<usize> = groups.into_iter().flatten().collect();
            chosen.sort_unstable();
            Ok(Some(chosen))
        }
        Mode::Heuristic => {
            let picked: Vec<CMat<T>> = blocks[..target].to_vec();
            let cert = check_well_spread_with(&picked, mode, opts)?;
            Ok(cert.passed().then(|| (0..target).collect()))
        }
        Mode::KernelLine | Mode::Covector => {
            let mut chosen: Vec<usize> = Vec::with_capacity(target);
            let mut picked: Vec<CMat<T>> = Vec::with_capacity(target);
            for (i, b) in blocks.iter().enumerate() {
                if chosen.len() == target {
                    break;
                }
                let usable = match mode {
                    Mode::KernelLine => rank_at_scale(b, frobenius(b))? == r,
                    _ => frobenius(b) > T::zero(),
                };
                if !usable {
                    continue;
                }
                picked.push(b.clone());
                let (scan, _, _) = run_scan(&picked, mode, target, opts)?;
                if scan.violated() {
                    picked.pop();
                } else {
                    chosen.push(i);
                }
            }
            Ok((chosen.len() == target).then_some(chosen))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn m(rows: usize, cols: usize, v: &[f64]) -> CMat<f64> {
        CMat::from_row_slice(rows, cols, &v.iter().map(|&x| re(x)).collect::<Vec<_>>())
    }

    fn delta(w: [f64; 2]) -> CMat<f64> {
        m(1, 2, &[w[1], -w[0]])
    }

    #[test]
    fn square_examples() {
        let i2 = CMat::<f64>::identity(2, 2);
        let cert = check_well_spread(&[i2.clone(), i2.clone(), i2.scale(2.0)], Mode::Square).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        let sing = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let blocks = [i2.clone(), sing];
        let cert = check_well_spread(&blocks, Mode::Square).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert!(recheck_witness(&blocks, cert.witness.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn covector_example_fails_with_expected_witness() {
        let blocks = [
            m(1, 2, &[1.0, 0.0]),
            m(1, 2, &[1.0, 0.0]),
            m(1, 2, &[1.0, 0.0]),
            m(1, 2, &[0.0, 1.0]),
        ];
        let cert = check_well_spread(&blocks, Mode::Covector).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        let w = cert.witness.clone().unwrap();
        assert_eq!(w.dim, 1);
        assert_eq!(w.image_dim_sum, 1);
        assert_eq!(w.required, 2.0);
        let v = w.basis_matrix::<f64>(2);
        assert!(v[(0, 0)].norm() < 1e-12 && (v[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(recheck_witness(&blocks, &w).unwrap());
    }

    #[test]
    fn covector_zero_fails() {
        let blocks = [m(1, 2, &[1.0, 0.0]), m(1, 2, &[0.0, 0.0])];
        let cert = check_well_spread(&blocks, Mode::Covector).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert_eq!(cert.witness.unwrap().dim, 2);
    }

    #[test]
    fn kernel_line_examples() {
        let ws = [[1.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, -3.0]];
        let blocks: Vec<_> = ws.iter().map(|&w| delta(w)).collect();
        assert_eq!(check_well_spread(&blocks, Mode::KernelLine).unwrap().verdict, Verdict::Pass);
        let ws = [[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0], [1.0, -3.0]];
        let blocks: Vec<_> = ws.iter().map(|&w| delta(w)).collect();
        let cert = check_well_spread(&blocks, Mode::KernelLine).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert!(recheck_witness(&blocks, cert.witness.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn kernel_line_rejects_rank_deficient() {
        let blocks = [m(1, 2, &[0.0, 0.0])];
        assert!(matches!(
            check_well_spread(&blocks, Mode::KernelLine),
            Err(Error::InvalidMode(_))
        ));
    }

    #[test]
    fn mode_shape_checks() {
        let b = [CMat::<f64>::identity(2, 3)];
        assert!(check_well_spread(&b, Mode::Square).is_err());
        assert!(check_well_spread(&b, Mode::Covector).is_err());
        assert!(check_well_spread(&b, Mode::Partition).is_err());
    }

    #[test]
    fn partition_vandermonde() {
        let blocks: Vec<_> = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&t: &f64| m(1, 3, &[1.0, t, t * t]))
            .collect();
        let cert = check_well_spread(&blocks, Mode::Partition).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.groups.unwrap().len(), 2);
        let rep: Vec<_> = (0..6).map(|_| m(1, 3, &[1.0, 1.0, 1.0])).collect();
        let cert = check_well_spread(&rep, Mode::Partition).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert!(recheck_witness(&rep, cert.witness.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn heuristic_finds_kernel_violation() {
        let blocks = [
            m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        ];
        let opts = WellSpreadOptions {
            samples: 50,
            ..Default::default()
        };
        let cert = check_well_spread_with(&blocks, Mode::Heuristic, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        assert!(!cert.exhaustive);
    }

    #[test]
    fn greedy_selection_skips_overloaded_lines() {
        let ws = [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let blocks: Vec<_> = ws.iter().map(|&w| delta(w)).collect();
        let sel = select_well_spread(&blocks, 4, Mode::KernelLine, &WellSpreadOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(sel, vec![0, 1, 3, 4]);
        let picked: Vec<_> = sel.iter().map(|&i| blocks[i].clone()).collect();
        assert!(check_well_spread(&picked, Mode::KernelLine).unwrap().passed());
    }

    #[test]
    fn subsets_enumerated() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, &mut |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(binomial(10, 3), 120);
    }
}
