//! Dispatch from a job to the library pipelines.

use std::path::Path;
use std::time::Instant;

use blockrank::blockmat::BlockMatrix;
use blockrank::design::{
    design_rank_check, max_shared_support, random_regular_design, verify_design, DesignParams,
    Mode, RankCheckOptions,
};
use blockrank::geometry::{
    collinear_triples, curve_analysis, gen_concurrent_lines, gen_conics, gen_grid, gen_hesse,
    gen_orthopair, gen_pencil_lines, gen_product_sg, line_analysis, rigidity_bound, sg_matrices,
    CurveOptions, DimensionReport, LineOptions, RigidityOptions, SgOptions,
};
use blockrank::linalg::HermitianMatrix;
use blockrank::scaling::{
    capacity_objective, capacity_upper_bound, column_step_progress, sinkhorn_scale,
    ScalingOptions, ScalingState,
};
use blockrank::Error as CoreError;
use serde_json::Value;

use crate::job::{Command, GenKind, JobConfig};
use crate::report::{Relation, Report};
use crate::scene::{load_scene, parse_json, read_text, Scene, SceneError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scene(_) | CliError::Input(_) | CliError::Write { .. } => EXIT_INPUT,
            CliError::Core(e) => match e {
                CoreError::HypothesisFailure(_) | CoreError::CertificateMismatch(_) => EXIT_FAIL,
                CoreError::InvalidArgument(_)
                | CoreError::DimensionMismatch(_)
                | CoreError::InvalidMode(_)
                | CoreError::InvalidScaling(_)
                | CoreError::InvalidTriple { .. }
                | CoreError::DegeneratePair(_)
                | CoreError::DegenerateTriple(_) => EXIT_INPUT,
                CoreError::NumericalFailure(_)
                | CoreError::SingularGram { .. }
                | CoreError::ConstructionFailure(_)
                | CoreError::DegenerateConfiguration(_) => EXIT_NUMERIC,
            },
        }
    }
}

pub fn report_exit_code(report: &Report) -> i32 {
    if report.pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

type Out = Result<Report, CliError>;

fn input_path(job: &JobConfig) -> Result<&Path, CliError> {
    job.input
        .as_deref()
        .ok_or_else(|| CliError::Input(format!("`{}` needs --in PATH", job.command.name())))
}

fn load_matrix(job: &JobConfig) -> Result<BlockMatrix<f64>, CliError> {
    let text = read_text(input_path(job)?)?;
    Ok(parse_json::<BlockMatrix<f64>>(&text)?)
}

fn default_mode(r: usize, c: usize) -> Mode {
    if r == c {
        Mode::Square
    } else if r == 1 {
        Mode::Covector
    } else if r + 1 == c {
        Mode::KernelLine
    } else {
        Mode::Heuristic
    }
}

/// Adds one to every index a certificate reports, matching the input files.
fn one_based_certificate(v: &mut Value) {
    if let Some(cols) = v.get_mut("columns").and_then(Value::as_array_mut) {
        for col in cols {
            if let Some(x) = col.get_mut("column") {
                *x = Value::from(x.as_u64().unwrap_or(0) + 1);
            }
            if let Some(rows) = col.get_mut("rows").and_then(Value::as_array_mut) {
                for r in rows {
                    *r = Value::from(r.as_u64().unwrap_or(0) + 1);
                }
            }
        }
    }
}

fn one_based_bound_report(v: &mut Value) {
    if let Some(cert) = v.get_mut("certificate") {
        one_based_certificate(cert);
    }
}

fn job_echo(job: &JobConfig) -> Value {
    let mut v = serde_json::to_value(job).expect("job serializes");
    if let Value::Object(map) = &mut v {
        // The destination does not change any result.
        map.remove("out");
        map.remove("timing");
        map.remove("format");
    }
    v
}

fn scaling_options(job: &JobConfig) -> ScalingOptions<f64> {
    ScalingOptions {
        tol: job.tol_ds,
        max_iter: job.max_iter,
        ..ScalingOptions::default()
    }
}

fn progress_verdicts(report: &mut Report, state: &ScalingState<f64>) {
    let row_ok = state.steps.iter().all(|s| s.log_h_row >= -1e-8);
    let col_ok = state
        .steps
        .iter()
        .all(|s| s.log_h_col >= column_step_progress(s.ds_before_col) - 1e-8);
    let mono = state.bound_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    report.verdict("row-step-factor-nonnegative", row_ok, "");
    report.verdict("column-step-progress", col_ok, "log factor >= min(1, ds)/6");
    report.verdict("capacity-bound-nonincreasing", mono, "");
}

fn scale(job: &JobConfig) -> Out {
    let a = load_matrix(job)?;
    let (state, result) = sinkhorn_scale(&a, &scaling_options(job))?;
    let mut report = Report::new("scale", job_echo(job));
    let detail = match &result.failure {
        Some(f) => f.reason.clone(),
        None => String::new(),
    };
    report.verdict("converged", result.converged, detail);
    progress_verdicts(&mut report, &state);
    report.bound("ds", result.final_ds, Relation::AtMost, job.tol_ds);
    report.detail("scaling", &result);
    report.detail("scaled", &state.current);
    Ok(report)
}

fn capacity(job: &JobConfig) -> Out {
    let a = load_matrix(job)?;
    let (state, result) = sinkhorn_scale(&a, &scaling_options(job))?;
    let identity: Vec<HermitianMatrix<f64>> = (0..a.m()).map(|_| HermitianMatrix::identity(a.r())).collect();
    let at_identity = capacity_objective(&a, &identity)?;
    let mut report = Report::new("capacity", job_echo(job));
    report.verdict(
        "positive-capacity-evidence",
        result.converged,
        if result.converged { "scaling converged" } else { "scaling did not converge; evidence only" },
    );
    progress_verdicts(&mut report, &state);
    report.detail("log_capacity_upper_bound", capacity_upper_bound(&state));
    report.detail("log_objective_at_identity", at_identity);
    report.detail("iterations", result.iterations);
    report.detail("final_ds", result.final_ds);
    report.detail("failure", &result.failure);
    Ok(report)
}

fn design_params(job: &JobConfig, a: &BlockMatrix<f64>) -> Result<DesignParams, CliError> {
    let support = a.support();
    let q = job
        .q
        .unwrap_or_else(|| support.iter().map(|row| row.iter().filter(|&&x| x).count()).max().unwrap_or(0));
    let k = job.k.unwrap_or_else(|| {
        (0..a.n())
            .map(|j| support.iter().filter(|row| row[j]).count())
            .min()
            .unwrap_or(0)
    });
    let t = job.t.unwrap_or_else(|| max_shared_support(&support, a.n()).max(1));
    Ok(DesignParams::new(q.max(1), k, t)?)
}

fn check_design(job: &JobConfig) -> Out {
    let a = load_matrix(job)?;
    let params = design_params(job, &a)?;
    let mode = job.mode.unwrap_or_else(|| default_mode(a.r(), a.c()));
    let cert = verify_design(&a, params, mode)?;
    let mut report = Report::new("check-design", job_echo(job));
    report.verdict("design", cert.pass, cert.failures.join("; "));
    let mut v = serde_json::to_value(&cert).expect("certificate serializes");
    one_based_certificate(&mut v);
    report.detail("certificate", v);
    Ok(report)
}

fn rank_bound(job: &JobConfig) -> Out {
    let a = load_matrix(job)?;
    let params = design_params(job, &a)?;
    let mode = job.mode.unwrap_or_else(|| default_mode(a.r(), a.c()));
    let opts = RankCheckOptions {
        scale: true,
        scaling: scaling_options(job),
    };
    let br = design_rank_check(&a, params, mode, &opts)?;
    let mut report = Report::new("rank-bound", job_echo(job));
    report.verdict("design", br.certificate.pass, br.certificate.failures.join("; "));
    report.bound("rank", br.measured_rank as f64, Relation::AtLeast, br.bound.ceil as f64);
    let mut v = serde_json::to_value(&br).expect("bound report serializes");
    one_based_bound_report(&mut v);
    report.detail("bound_report", v);
    Ok(report)
}

fn dimension_lines(report: &mut Report, name: &str, dim: &DimensionReport) {
    report.bound(name, dim.measured as f64, Relation::AtMost, dim.bound as f64);
    if let Some(design) = &dim.design {
        report.verdict("design", design.certificate.pass, design.certificate.failures.join("; "));
        report.bound(
            "design-rank",
            design.measured_rank as f64,
            Relation::AtLeast,
            design.bound.ceil as f64,
        );
    }
}

fn dimension_value(dim: &DimensionReport) -> Value {
    let mut v = serde_json::to_value(dim).expect("dimension report serializes");
    if let Some(d) = v.get_mut("design") {
        one_based_bound_report(d);
    }
    v
}

fn rigidity(job: &JobConfig) -> Out {
    let Scene::Points { points, triples } = load_scene(input_path(job)?)? else {
        return Err(CliError::Input("rigidity needs a points scene".into()));
    };
    let detected = triples.is_none();
    let triples = match triples {
        Some(t) => t,
        None => collinear_triples(&points, job.tol_collinear).triples,
    };
    let opts = RigidityOptions {
        k: job.k,
        t: job.t,
        seed: job.seed,
        tol_collinear: job.tol_collinear,
        tol_rank: Some(job.tol_rank),
    };
    let rep = rigidity_bound(&points, &triples, &opts)?;
    let mut report = Report::new("rigidity", job_echo(job));
    report.bound("tangent-dimension", rep.measured as f64, Relation::AtMost, rep.r as f64);
    report.verdict(
        "projective-motions-in-kernel",
        rep.max_motion_residual <= 1e-8,
        format!("{} motions, rank {}", rep.motions, rep.motion_rank),
    );
    report.verdict("design", rep.design.certificate.pass, rep.design.certificate.failures.join("; "));
    report.bound(
        "design-rank",
        rep.design.measured_rank as f64,
        Relation::AtLeast,
        rep.design.bound.ceil as f64,
    );
    report.detail("triples_detected", detected);
    let mut v = serde_json::to_value(&rep).expect("rigidity report serializes");
    if let Some(d) = v.get_mut("design") {
        one_based_bound_report(d);
    }
    report.detail("rigidity", v);
    Ok(report)
}

fn sg(job: &JobConfig) -> Out {
    let Scene::Subspaces(w) = load_scene(input_path(job)?)? else {
        return Err(CliError::Input("sg needs a subspaces scene".into()));
    };
    let an = sg_matrices(&w, job.delta, &SgOptions { tol_rank: Some(job.tol_rank) })?;
    let s = &an.summary;
    let mut report = Report::new("sg", job_echo(job));
    dimension_lines(&mut report, "span-dimension", &s.report);
    report.verdict("orthogonality", s.orthogonality <= 1e-6, "");
    let special: Vec<Vec<usize>> = s
        .special_spaces
        .iter()
        .map(|m| m.iter().map(|x| x + 1).collect())
        .collect();
    report.detail("n", s.n);
    report.detail("d", s.d);
    report.detail("ell", s.ell);
    report.detail("delta", s.delta);
    report.detail("k", s.k);
    report.detail("special_spaces", special);
    report.detail("delta_stat", &s.delta_stat);
    report.detail("orthogonality", s.orthogonality);
    report.detail("dimension", dimension_value(&s.report));
    Ok(report)
}

fn lines(job: &JobConfig) -> Out {
    let Scene::Lines(ls) = load_scene(input_path(job)?)? else {
        return Err(CliError::Input("lines needs a lines scene".into()));
    };
    let an = line_analysis(&ls, job.homogeneous, &LineOptions { k: job.k, tol_rank: Some(job.tol_rank) })?;
    let s = &an.summary;
    let mut report = Report::new("lines", job_echo(job));
    dimension_lines(&mut report, "dimension", &s.report);
    report.verdict("orthogonality", s.orthogonality <= 1e-6, "");
    report.detail("n", s.n);
    report.detail("d", s.d);
    report.detail("homogeneous", s.homogeneous);
    report.detail("k", s.k);
    let pairs: Vec<[usize; 2]> = s.pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
    report.detail("intersecting_pairs", pairs);
    report.detail("orthogonality", s.orthogonality);
    report.detail("dimension", dimension_value(&s.report));
    Ok(report)
}

fn curves(job: &JobConfig) -> Out {
    let Scene::Curves { curves, incidences } = load_scene(input_path(job)?)? else {
        return Err(CliError::Input("curves needs a curves scene".into()));
    };
    let an = curve_analysis(
        &curves,
        incidences.as_deref(),
        &CurveOptions { k: job.k, tol_rank: Some(job.tol_rank) },
    )?;
    let s = &an.summary;
    let mut report = Report::new("curves", job_echo(job));
    dimension_lines(&mut report, "dimension", &s.report);
    report.verdict("orthogonality", s.orthogonality <= 1e-6, "");
    report.verdict(
        "bezout-cap",
        s.bezout_ok,
        format!("at most {} incidences per pair, cap {}", s.max_pair_incidences, s.degree * s.degree),
    );
    report.verdict("partition", 2 * s.k_prime >= s.k, format!("k' = {}, k = {}", s.k_prime, s.k));
    let mut summary = serde_json::to_value(s).expect("curve summary serializes");
    if let Value::Object(map) = &mut summary {
        map.insert("report".into(), dimension_value(&s.report));
    }
    report.detail("summary", summary);
    let incidences: Vec<Value> = an
        .incidences
        .iter()
        .map(|x| {
            serde_json::json!({
                "i": x.i + 1,
                "j": x.j + 1,
                "t": x.t,
                "t_prime": x.t_prime,
                "residual": x.residual,
            })
        })
        .collect();
    report.detail("incidences", incidences);
    Ok(report)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn gen(job: &JobConfig) -> Out {
    let kind = job
        .kind
        .ok_or_else(|| CliError::Input("gen needs --kind".into()))?;
    let out = job
        .out
        .as_deref()
        .ok_or_else(|| CliError::Input("gen needs --out PATH".into()))?;
    let (text, summary): (String, Value) = match kind {
        GenKind::Hesse => {
            let w = gen_hesse()?;
            let n = w.n();
            (Scene::Subspaces(w).to_json(), serde_json::json!({"kind": "subspaces", "n": n}))
        }
        GenKind::Grid => {
            let (points, triples) = gen_grid(job.size.unwrap_or(3))?;
            let (n, m) = (points.n(), triples.len());
            let scene = Scene::Points {
                points,
                triples: Some(triples),
            };
            (scene.to_json(), serde_json::json!({"kind": "points", "n": n, "triples": m}))
        }
        GenKind::Orthopair => {
            let w = gen_orthopair(job.size.or(job.d).unwrap_or(5))?;
            let n = w.n();
            (Scene::Subspaces(w).to_json(), serde_json::json!({"kind": "subspaces", "n": n}))
        }
        GenKind::ProductSg => {
            let w = gen_product_sg(job.size.unwrap_or(2))?;
            let n = w.n();
            (Scene::Subspaces(w).to_json(), serde_json::json!({"kind": "subspaces", "n": n}))
        }
        GenKind::Pencil | GenKind::Concurrent => {
            let (n, d) = (job.n.unwrap_or(5), job.d.unwrap_or(4));
            let ls = if kind == GenKind::Pencil {
                gen_pencil_lines(n, d, job.seed)?
            } else {
                gen_concurrent_lines(n, d, job.seed)?
            };
            (Scene::Lines(ls).to_json(), serde_json::json!({"kind": "lines", "n": n}))
        }
        GenKind::Conics => {
            let (n, d) = (job.n.unwrap_or(6), job.d.unwrap_or(5));
            let cs = gen_conics(n, d, job.seed)?;
            let scene = Scene::Curves {
                curves: cs,
                incidences: None,
            };
            (scene.to_json(), serde_json::json!({"kind": "curves", "n": n}))
        }
        GenKind::Design => {
            let (n, k, q, r) = (job.n.unwrap_or(6), job.k.unwrap_or(2), job.q.unwrap_or(2), job.size.unwrap_or(2));
            let a: BlockMatrix<f64> = random_regular_design(n, k, q, r, job.seed)?;
            let text = serde_json::to_string(&a).expect("matrix serializes");
            (text, serde_json::json!({"kind": "block-matrix", "m": a.m(), "n": n, "r": r, "c": r}))
        }
    };
    write_file(out, &text)?;
    let mut report = Report::new("gen", job_echo(job));
    report.detail("generated", summary);
    report.detail("path", out.display().to_string());
    Ok(report)
}

/// Runs the job and returns its (rounded) report.
pub fn run(job: &JobConfig) -> Out {
    let start = Instant::now();
    let report = match job.command {
        Command::Scale => scale(job),
        Command::Capacity => capacity(job),
        Command::CheckDesign => check_design(job),
        Command::RankBound => rank_bound(job),
        Command::Rigidity => rigidity(job),
        Command::Sg => sg(job),
        Command::Lines => lines(job),
        Command::Curves => curves(job),
        Command::Gen => gen(job),
    }?;
    let mut report = report;
    if job.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report.finalize())
}

/// Writes the report where the job asks (`--out` for analysis commands, else stdout).
pub fn report_destination(job: &JobConfig) -> Option<&Path> {
    match job.command {
        Command::Gen => None,
        _ => job.out.as_deref(),
    }
}

pub fn write_report(path: &Path, text: &str) -> Result<(), CliError> {
    write_file(path, text)
}
