//! Planning and running a hyperparameter grid.
//!
//! A grid becomes a [`TaskPlan`] of task groups. [`run_serial`] executes
//! every task on the calling thread; [`run_parallel`] hands whole groups to
//! a pool of worker threads that share the training and test sets
//! read-only and send [`ConfigResult`]s back over a channel. Either way the
//! returned [`RunOutcome`] lists results by `config_id`, so it does not
//! depend on completion order.

mod clock;
mod plan;
mod pool;

pub use clock::{now_monotonic, Timestamp};
pub use plan::{plan_tasks, Strategy, TaskPlan, TaskSpec};
pub use pool::{
    collect_results, default_workers, execute_task, run_parallel, run_parallel_with, run_serial,
    run_serial_with, ConfigResult, Mode, RunOptions, RunOutcome,
};
