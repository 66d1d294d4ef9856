//! Experiment drivers: solution paths over a penalty grid, cross-validation,
//! replicated benchmarks, penalty-robustness sweeps, sparsity-targeted
//! penalty selection and rolling-window index tracking.

pub mod bench;
pub mod cv;
pub mod path;
pub mod robustness;
pub mod sparsity;
pub mod tracking;

pub use bench::{run_benchmark, BenchConfig, BenchResult, MethodRow, MspLambdaPolicy, DEFAULT_MSP_FRACTION};
pub use cv::{cross_validate, cross_validate_many, fold_assignment, CvResult};
pub use path::{lambda_grid, lambda_grid_with_ratio, lasso_path, trace_path, PathPoint, PathResult, VariableClass, DEFAULT_MIN_RATIO};
pub use robustness::{lambda_robustness, RobustnessPoint};
pub use sparsity::{select_lambda_for_sparsity, SparsityOptions};
pub use tracking::{simple_returns, track_index, tracking_error, PriceTable, TrackingResult, TrackingWindow, WindowSpec};
