//! Benchmark suite and evaluation.

pub mod eval;
pub mod functions;

pub use eval::{
    aggregate_report, run_eval, run_eval_on, time_decisions, Actor, ActorSummary, Band, BaselineActor, EvalReport,
    EvalRun, OracleActor, PolicyActor, StationaryActor, Summary,
};
pub use functions::{make_benchmark, BenchmarkFn, Normalisation, REGISTRY};
