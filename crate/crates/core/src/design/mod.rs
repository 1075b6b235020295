//! Well-spread sets, `(q, k, t)`-design matrices, regular form and rank bounds.

mod bounds;
mod certify;
mod random;
mod wellspread;

pub use bounds::{
    design_rank_check, diag_dominant_bound, rank_lower_bound, BoundReport, DiagDominance,
    RankBound, RankCheckOptions, ScaledDominance,
};
pub use certify::{
    max_shared_support, regular_form_rows, regularize, verify_design, verify_design_with,
    ColumnCertificate, DesignCertificate, DesignParams,
};
pub use random::random_regular_design;
pub use wellspread::{
    check_well_spread, check_well_spread_with, image_dim_sum, recheck_witness,
    select_well_spread, Mode, Verdict, WellSpreadCertificate, WellSpreadOptions, Witness,
};
