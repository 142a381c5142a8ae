//! Benchmark objectives, the R2 harness and the optimization benchmark.

mod metamodel;
mod objective;
mod optimizer;
mod problem;

pub use metamodel::{bench_metamodels, r2_score, run_seed, write_r2_csv, MetaMethod, R2Options, R2Row};
pub use objective::{
    heart_target, surface_of_revolution, Objective, AREA_PANELS, GRIEWANK_BOUND, GRIEWANK_CENTER,
    GRIEWANK_DIM,
};
pub use optimizer::{
    bench_optimizers, default_bench, evaluations_to_target, opt_report, target_stat, write_opt_csv,
    BenchConfig, CoordinateSpace, MethodOutcome, OptMethod, OptRow,
};
pub use problem::{shape_database, shape_space, Problem};
