//! Command line surface and the job it describes.

use std::path::PathBuf;

use blockrank::design::Mode;
use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::report::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sinkhorn scaling of a block matrix.
    Scale,
    /// Capacity upper bounds from a scaling run.
    Capacity,
    /// Certify a (q, k, t)-design matrix.
    CheckDesign,
    /// Design certificate plus the rank lower bound.
    RankBound,
    /// Tangent dimension bound for a point configuration with collinear triples.
    Rigidity,
    /// Dimension bound for a subspace arrangement with many special spans.
    Sg,
    /// Dimension bound for lines with many intersections.
    Lines,
    /// Dimension bound for parametric curves with many incidences.
    Curves,
    /// Write an example scene (or design matrix) to `--out`.
    Gen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scale => "scale",
            Command::Capacity => "capacity",
            Command::CheckDesign => "check-design",
            Command::RankBound => "rank-bound",
            Command::Rigidity => "rigidity",
            Command::Sg => "sg",
            Command::Lines => "lines",
            Command::Curves => "curves",
            Command::Gen => "gen",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// The 9 Hesse lines through the flexes of a cubic, as 1-dim subspaces of C^3.
    Hesse,
    /// `size x size` grid with its collinear triples.
    Grid,
    /// Pairwise spans of the standard basis of C^size.
    Orthopair,
    /// Product of the Hesse arrangement with C^size.
    ProductSg,
    /// `n` coplanar lines in C^d in general position.
    Pencil,
    /// `n` lines in C^d through one point.
    Concurrent,
    /// `n` random conics in a fixed 2-plane of C^d.
    Conics,
    /// Random regular-form design matrix: `n` columns, `k` rows each, `q` blocks per row,
    /// `size x size` blocks.
    Design,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("tolerance must be positive, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Everything a run depends on. Identical jobs on identical input produce identical
/// reports.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "blockrank", version, about = "Block-matrix scaling, design-matrix rank bounds and incidence-geometry certificates")]
pub struct JobConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input scene or block matrix (JSON).
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Report destination (stdout if absent); for `gen`, the generated file.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Relative singular value threshold for numerical rank.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol_rank: f64,
    /// Stop scaling once ds is at most this.
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol_ds: f64,
    /// Normalized triangle area below which three points count as collinear.
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol_collinear: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Well-spread check: square, kernel-line, covector, partition or heuristic.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    /// Treat lines as 2-dim subspaces (through the origin).
    #[arg(long)]
    pub homogeneous: bool,
    /// What `gen` writes.
    #[arg(long, value_enum)]
    pub kind: Option<GenKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Grid side, subspace dimension, or block size for `gen`.
    #[arg(long)]
    pub size: Option<usize>,
    /// Include wall-clock timing in the report (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

impl JobConfig {
    /// A job with default flags.
    pub fn new(command: Command) -> Self {
        Self::parse_from(["blockrank", command.name()])
    }
}
