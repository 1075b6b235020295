//! Batch front end: scene and matrix files in, JSON or text reports out.

pub mod job;
pub mod report;
pub mod run;
pub mod scene;

pub use job::{Command, GenKind, JobConfig};
pub use report::{emit, Format, Relation, Report};
pub use run::{report_exit_code, run, CliError};
pub use scene::{load_scene, parse_scene, Scene, SceneError};
