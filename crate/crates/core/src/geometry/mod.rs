//! Incidence-geometry constructions built on design matrices: rigidity of point
//! configurations, subspace arrangements with many special spans, lines and parametric
//! curves.
//!
//! This layer works in `f64` only.

mod curves;
mod lines;
mod points;
mod poly;
mod rigidity;
mod steiner;
mod subspaces;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::{BoundReport, DesignCertificate};
use crate::scalar::{CMat, CVec};

pub use curves::{
    curve_analysis, curve_eval, curve_intersections, gen_conics, lines_as_curves, moment_block,
    CurveAnalysis, CurveOptions, CurveSet, CurveSummary, Incidence,
};
pub use lines::{
    gen_concurrent_lines, gen_pencil_lines, homogenize, line_analysis, Line, LineAnalysis,
    LineOptions, LineSet, LineSummary,
};
pub use points::{
    collinear_triples, collinearity_residual, delta_block, gen_grid, generic_transform,
    CollinearTriples, PointList, DEFAULT_COLLINEAR_TOL,
};
pub use poly::{poly_eval, poly_roots};
pub use rigidity::{
    projective_motion_basis, rigidity_bound, rigidity_formula, rigidity_matrix,
    rigidity_matrix_with_tol, sg_rigidity_k, RigidityOptions, RigidityReport,
};
pub use steiner::{steiner_triples, verify_steiner};
pub use subspaces::{
    gen_hesse, gen_orthopair, gen_product_sg, sg_matrices, SgAnalysis, SgOptions, SgSummary,
    SubspaceArrangement,
};

pub type C64 = Complex<f64>;
pub type Mat = CMat<f64>;
pub type Vector = CVec<f64>;
/// Index triples; repetition encodes multiplicity.
pub type Triples = Vec<[usize; 3]>;

pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| gaussian(rng))
}

/// Dimension bound against a measurement, with the design certificate of the matrix
/// the bound is derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub bound: i64,
    pub measured: usize,
    /// `measured <= bound`.
    pub pass: bool,
    pub design: Option<BoundReport>,
}

impl DimensionReport {
    pub(crate) fn new(bound: i64, measured: usize, design: Option<BoundReport>) -> Self {
        Self {
            bound,
            measured,
            pass: measured as i64 <= bound,
            design,
        }
    }

    pub fn certificate(&self) -> Option<&DesignCertificate> {
        self.design.as_ref().map(|d| &d.certificate)
    }
}
