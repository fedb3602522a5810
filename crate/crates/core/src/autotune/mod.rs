//! Offline operating-point selection: knowledge tables of knob settings
//! with measured metrics, constrained ranking with priority relaxation,
//! multiplicative feedback scaling and the knob file read by woven
//! programs.
//!
//! ```
//! use aweave::autotune::{parse_knowledge, select_best, Problem};
//!
//! let kb = parse_knowledge(
//!     "knob:k,metric:thr:mean,metric:err:mean\n1,10,0.05\n2,8,0.02\n3,12,0.07\n",
//! ).unwrap();
//! let problem = Problem::new(vec!["err<=0.03:1".parse().unwrap()], "max:thr".parse().unwrap()).unwrap();
//! let pick = select_best(&kb, &problem, None).unwrap();
//! assert_eq!(aweave::autotune::knob_file_text(&kb.points[pick.point]), "k=2\n");
//! ```

mod feedback;
mod knowledge;
mod select;

pub use feedback::{FeedbackState, DEFAULT_WINDOW, MIN_SCALE};
pub use knowledge::{
    knob_file_text, load_knowledge, parse_knob_file, parse_knowledge, write_knob_file, KnobValue, KnowledgeBase,
    MetricStats, OperatingPoint, STATS,
};
pub use select::{select_best, Constraint, Direction, Problem, Rank, Relation, Selection};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("knowledge schema error at line {line}: {message}")]
    Schema { line: u64, message: String },
    #[error("line {line}: duplicate knob configuration {knobs}")]
    DuplicatePoint { line: u64, knobs: String },
    #[error("knowledge base has no operating points")]
    EmptyKnowledge,
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid observation for `{metric}`: {value}")]
    InvalidObservation { metric: String, value: f64 },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
