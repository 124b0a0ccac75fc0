use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::clock::{now_monotonic, Timestamp};
use super::plan::{TaskPlan, TaskSpec};
use crate::classifiers::{fit, HyperParams};
use crate::dataio::Dataset;
use crate::vote::VoteTable;
use crate::{Error, Result};

/// Predictions of one configuration on the test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config_id: usize,
    pub params: HyperParams,
    pub predictions: Vec<usize>,
    /// Internal vote counts, for models that vote (forests).
    pub class_votes: Option<VoteTable>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Serial,
    Parallel,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Serial => "serial",
            Mode::Parallel => "parallel",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// One result per planned config, sorted by `config_id`.
    pub results: Vec<ConfigResult>,
    pub wall_seconds: f64,
    pub mode: Mode,
    pub n_workers: usize,
}

type DelayFn = Arc<dyn Fn(usize) -> Duration + Send + Sync>;

/// Knobs for benchmarking and testing the pool.
#[derive(Clone, Default)]
pub struct RunOptions {
    /// Sleep charged to a worker each time it starts a task group,
    /// standing in for process start-up cost.
    pub group_startup: Duration,
    /// Start the parallel clock only after every worker is up and waiting.
    pub warm_pool: bool,
    /// Extra sleep before a task, keyed by `config_id`.
    pub task_delay: Option<DelayFn>,
}

impl fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunOptions")
            .field("group_startup", &self.group_startup)
            .field("warm_pool", &self.warm_pool)
            .field("task_delay", &self.task_delay.as_ref().map(|_| ".."))
            .finish()
    }
}

/// Logical cores, capped at the number of task groups.
pub fn default_workers(n_groups: usize) -> usize {
    let cores = thread::available_parallelism().map_or(1, |n| n.get());
    cores.min(n_groups).max(1)
}

/// Fits one configuration and predicts the test set.
pub fn execute_task(task: &TaskSpec, train: &Dataset, test: &Dataset) -> Result<ConfigResult> {
    let failed = |e: Error| Error::TaskFailed {
        config_id: task.config_id,
        message: e.to_string(),
    };
    let t0 = now_monotonic();
    let model = fit(&task.params, train).map_err(failed)?;
    let t1 = now_monotonic();
    let class_votes = model.class_votes(test.features()).map_err(failed)?;
    let predictions = match &class_votes {
        Some(v) => v.winners(),
        None => model.predict(test.features()).map_err(failed)?,
    };
    let t2 = now_monotonic();
    Ok(ConfigResult {
        config_id: task.config_id,
        params: task.params.clone(),
        predictions,
        class_votes,
        fit_seconds: t1.seconds_since(t0),
        predict_seconds: t2.seconds_since(t1),
        warnings: model.warnings(),
    })
}

fn execute_guarded(
    task: &TaskSpec,
    train: &Dataset,
    test: &Dataset,
    opts: &RunOptions,
) -> Result<ConfigResult> {
    if let Some(delay) = &opts.task_delay {
        thread::sleep(delay(task.config_id));
    }
    catch_unwind(AssertUnwindSafe(|| execute_task(task, train, test))).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "worker panicked".into());
        Err(Error::TaskFailed {
            config_id: task.config_id,
            message,
        })
    })
}

/// Orders results by `config_id` and checks they cover `plan` exactly once.
pub fn collect_results(
    plan: &TaskPlan,
    mut results: Vec<ConfigResult>,
) -> Result<Vec<ConfigResult>> {
    results.sort_by_key(|r| r.config_id);
    let got: Vec<usize> = results.iter().map(|r| r.config_id).collect();
    let expected = plan.config_ids();
    if got != expected {
        return Err(Error::PlanMismatch(format!(
            "collected config ids {got:?}, planned {expected:?}"
        )));
    }
    Ok(results)
}

pub fn run_serial(plan: &TaskPlan, train: &Dataset, test: &Dataset) -> Result<RunOutcome> {
    run_serial_with(plan, train, test, &RunOptions::default())
}

/// Runs every task on the calling thread, group by group.
///
/// The clock starts before the first fit and stops after the last predict;
/// the first failing task aborts the run.
pub fn run_serial_with(
    plan: &TaskPlan,
    train: &Dataset,
    test: &Dataset,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    if plan.n_tasks() == 0 {
        return Err(Error::Config("task plan is empty".into()));
    }
    let start = now_monotonic();
    let mut results = Vec::with_capacity(plan.n_tasks());
    for task in plan.tasks() {
        results.push(execute_guarded(task, train, test, opts)?);
    }
    let wall_seconds = start.elapsed_seconds();
    Ok(RunOutcome {
        results: collect_results(plan, results)?,
        wall_seconds,
        mode: Mode::Serial,
        n_workers: 1,
    })
}

pub fn run_parallel(
    plan: &TaskPlan,
    train: &Dataset,
    test: &Dataset,
    n_workers: usize,
) -> Result<RunOutcome> {
    run_parallel_with(plan, train, test, n_workers, &RunOptions::default())
}

/// Start line for a warm pool: workers check in, the coordinator opens it.
struct Gate {
    state: Mutex<(usize, bool)>,
    cond: Condvar,
}

impl Gate {
    fn new() -> Self {
        Self {
            state: Mutex::new((0, false)),
            cond: Condvar::new(),
        }
    }

    fn arrive_and_wait(&self) {
        let mut s = self.state.lock().unwrap();
        s.0 += 1;
        self.cond.notify_all();
        while !s.1 {
            s = self.cond.wait(s).unwrap();
        }
    }

    fn wait_for(&self, n: usize) {
        let mut s = self.state.lock().unwrap();
        while s.0 < n {
            s = self.cond.wait(s).unwrap();
        }
    }

    fn open(&self) {
        self.state.lock().unwrap().1 = true;
        self.cond.notify_all();
    }
}

/// Runs task groups on up to `n_workers` threads.
///
/// Each group runs start to finish on one worker; idle workers take the
/// next unclaimed group. Results travel over a channel in completion order
/// and are sorted by `config_id` after every worker has been joined. The
/// clock spans worker creation through the join (or, with
/// [`RunOptions::warm_pool`], gate opening through the join). On the first
/// failure the remaining work is cancelled and the error with the lowest
/// `config_id` among those observed is returned.
pub fn run_parallel_with(
    plan: &TaskPlan,
    train: &Dataset,
    test: &Dataset,
    n_workers: usize,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    if n_workers == 0 {
        return Err(Error::Config("need at least one worker".into()));
    }
    if plan.n_tasks() == 0 {
        return Err(Error::Config("task plan is empty".into()));
    }
    let groups = plan.groups();
    let workers = n_workers.min(groups.len()).max(1);

    let next_group = AtomicUsize::new(0);
    let cancelled = AtomicBool::new(false);
    let gate = Gate::new();
    let mut start: Option<Timestamp> = (!opts.warm_pool).then(now_monotonic);
    let mut received = Vec::with_capacity(plan.n_tasks());
    let mut failures = Vec::new();
    let mut spawn_error = None;

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Result<ConfigResult>>();
        let mut spawned = 0;
        for w in 0..workers {
            let tx = tx.clone();
            let (next_group, cancelled, gate) = (&next_group, &cancelled, &gate);
            let worker = move || {
                if opts.warm_pool {
                    gate.arrive_and_wait();
                }
                loop {
                    if cancelled.load(Ordering::Relaxed) {
                        return;
                    }
                    let g = next_group.fetch_add(1, Ordering::Relaxed);
                    let Some(group) = groups.get(g) else { return };
                    if !opts.group_startup.is_zero() {
                        thread::sleep(opts.group_startup);
                    }
                    for task in group {
                        if cancelled.load(Ordering::Relaxed) {
                            return;
                        }
                        let r = execute_guarded(task, train, test, opts);
                        if r.is_err() {
                            cancelled.store(true, Ordering::Relaxed);
                        }
                        if tx.send(r).is_err() {
                            return;
                        }
                    }
                }
            };
            match thread::Builder::new()
                .name(format!("parvote-worker-{w}"))
                .spawn_scoped(scope, worker)
            {
                Ok(_) => spawned += 1,
                Err(e) => {
                    cancelled.store(true, Ordering::Relaxed);
                    spawn_error = Some(Error::Io(e));
                    break;
                }
            }
        }
        drop(tx);
        if opts.warm_pool {
            gate.wait_for(spawned);
            start = Some(now_monotonic());
            gate.open();
        }
        for msg in rx {
            match msg {
                Ok(r) => received.push(r),
                Err(e) => failures.push(e),
            }
        }
    });
    let wall_seconds = start.map_or(0.0, |s| s.elapsed_seconds());

    if let Some(e) = spawn_error {
        return Err(e);
    }
    if !failures.is_empty() {
        failures.sort_by_key(|e| match e {
            Error::TaskFailed { config_id, .. } => *config_id,
            _ => usize::MAX,
        });
        return Err(failures.swap_remove(0));
    }
    Ok(RunOutcome {
        results: collect_results(plan, received)?,
        wall_seconds,
        mode: Mode::Parallel,
        n_workers: workers,
    })
}
