use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{score, MetricSet};
use crate::classifiers::HyperParams;
use crate::ensemble::EnsembleResult;
use crate::executor::{Mode, RunOutcome, Strategy};
use crate::{Error, Result};

/// Bumped whenever a field of [`BenchmarkReport`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config_id: usize,
    pub label: String,
    pub params: HyperParams,
    pub metrics: MetricSet,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub n_workers: usize,
    pub wall_seconds: f64,
    pub configs: Vec<ConfigSummary>,
    pub ensemble: MetricSet,
    pub n_voters: usize,
    pub best_single_accuracy: f64,
    pub worst_single_accuracy: f64,
    pub ensemble_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub holds: bool,
    /// Whether per-config predictions were compared; split forests are
    /// compared at the forest level only.
    pub per_config: bool,
    pub mismatched_configs: Vec<usize>,
    pub ensemble_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub dataset: DatasetFingerprint,
    pub strategy: Strategy,
    pub positive_class: usize,
    pub serial: Option<ModeSummary>,
    pub parallel: Option<ModeSummary>,
    pub serial_seconds: Option<f64>,
    pub parallel_seconds: Option<f64>,
    /// `serial_seconds / parallel_seconds`.
    pub speedup: Option<f64>,
    pub equivalence: Option<Equivalence>,
}

impl BenchmarkReport {
    /// Copy with every wall-clock measurement zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for m in [&mut r.serial, &mut r.parallel].into_iter().flatten() {
            m.wall_seconds = 0.0;
            for c in &mut m.configs {
                c.fit_seconds = 0.0;
                c.predict_seconds = 0.0;
            }
        }
        r.serial_seconds = r.serial_seconds.map(|_| 0.0);
        r.parallel_seconds = r.parallel_seconds.map(|_| 0.0);
        r.speedup = r.speedup.map(|_| 0.0);
        r
    }

    pub fn equivalence_violated(&self) -> bool {
        self.equivalence.as_ref().is_some_and(|e| !e.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Run-independent facts about an experiment.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub algorithm: String,
    pub dataset: DatasetFingerprint,
    pub strategy: Strategy,
    pub positive_class: usize,
}

/// One timed run and its ensemble.
#[derive(Debug, Clone, Copy)]
pub struct ModeRun<'a> {
    pub outcome: &'a RunOutcome,
    pub ensemble: &'a EnsembleResult,
}

fn summarize(run: ModeRun<'_>, test_labels: &[usize], meta: &ReportMeta) -> Result<ModeSummary> {
    let n_classes = meta.dataset.n_classes;
    let mut configs = Vec::with_capacity(run.outcome.results.len());
    for r in &run.outcome.results {
        if r.predictions.len() != test_labels.len() {
            return Err(Error::LengthMismatch {
                config_id: r.config_id,
                expected: test_labels.len(),
                actual: r.predictions.len(),
            });
        }
        configs.push(ConfigSummary {
            config_id: r.config_id,
            label: r.params.to_string(),
            params: r.params.clone(),
            metrics: score(test_labels, &r.predictions, n_classes, meta.positive_class)?,
            fit_seconds: r.fit_seconds,
            predict_seconds: r.predict_seconds,
            warnings: r.warnings.clone(),
        });
    }
    let ensemble = score(
        test_labels,
        &run.ensemble.predictions,
        n_classes,
        meta.positive_class,
    )?;
    let accs = configs.iter().map(|c| c.metrics.accuracy);
    Ok(ModeSummary {
        mode: run.outcome.mode,
        n_workers: run.outcome.n_workers,
        wall_seconds: run.outcome.wall_seconds,
        best_single_accuracy: accs.clone().fold(f64::NEG_INFINITY, f64::max),
        worst_single_accuracy: accs.fold(f64::INFINITY, f64::min),
        ensemble_accuracy: ensemble.accuracy,
        ensemble,
        n_voters: run.ensemble.n_voters,
        configs,
    })
}

fn compare(serial: ModeRun<'_>, parallel: ModeRun<'_>) -> Result<Equivalence> {
    let (s, p) = (&serial.outcome.results, &parallel.outcome.results);
    let same_plan = s.len() == p.len()
        && s.iter()
            .zip(p)
            .all(|(a, b)| a.config_id == b.config_id && a.params == b.params);
    let forests = s.iter().chain(p).all(|r| r.class_votes.is_some());
    let mismatched_configs: Vec<usize> = if same_plan {
        s.iter()
            .zip(p)
            .filter(|(a, b)| a.predictions != b.predictions)
            .map(|(a, _)| a.config_id)
            .collect()
    } else if forests {
        Vec::new()
    } else {
        return Err(Error::PlanMismatch(
            "serial and parallel runs cover different configurations".into(),
        ));
    };
    let ensemble_matches = serial.ensemble.predictions == parallel.ensemble.predictions;
    Ok(Equivalence {
        holds: mismatched_configs.is_empty() && ensemble_matches,
        per_config: same_plan,
        mismatched_configs,
        ensemble_matches,
    })
}

/// Scores each run against `test_labels` and, when both modes ran, checks
/// that they predicted identically.
///
/// A difference is recorded in [`BenchmarkReport::equivalence`], not
/// returned as an error; runs over different plans are an error.
pub fn build_report(
    meta: ReportMeta,
    serial: Option<ModeRun<'_>>,
    parallel: Option<ModeRun<'_>>,
    test_labels: &[usize],
) -> Result<BenchmarkReport> {
    if serial.is_none() && parallel.is_none() {
        return Err(Error::InvalidInput("report needs at least one run".into()));
    }
    let equivalence = match (serial, parallel) {
        (Some(s), Some(p)) => Some(compare(s, p)?),
        _ => None,
    };
    let serial_seconds = serial.map(|r| r.outcome.wall_seconds);
    let parallel_seconds = parallel.map(|r| r.outcome.wall_seconds);
    let speedup = match (serial_seconds, parallel_seconds) {
        (Some(s), Some(p)) if p > 0.0 => Some(s / p),
        _ => None,
    };
    Ok(BenchmarkReport {
        schema_version: SCHEMA_VERSION,
        serial: serial
            .map(|r| summarize(r, test_labels, &meta))
            .transpose()?,
        parallel: parallel
            .map(|r| summarize(r, test_labels, &meta))
            .transpose()?,
        algorithm: meta.algorithm,
        dataset: meta.dataset,
        strategy: meta.strategy,
        positive_class: meta.positive_class,
        serial_seconds,
        parallel_seconds,
        speedup,
        equivalence,
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Aligned plain-text rendering of a report.
pub fn render_text(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let _ = writeln!(out, "algorithm: {}", report.algorithm);
    let _ = writeln!(
        out,
        "dataset:   {} train / {} test rows, {} features, {} classes, seed {}",
        d.n_train, d.n_test, d.n_features, d.n_classes, d.seed
    );
    let _ = writeln!(out, "strategy:  {}", report.strategy);
    let _ = writeln!(out, "positive class: {}", report.positive_class);

    for m in [&report.serial, &report.parallel].into_iter().flatten() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "== {} ({} worker{}, {:.3} s) ==",
            m.mode,
            m.n_workers,
            if m.n_workers == 1 { "" } else { "s" },
            m.wall_seconds
        );
        let rows: Vec<[String; 8]> = m
            .configs
            .iter()
            .map(|c| {
                [
                    c.config_id.to_string(),
                    c.label.clone(),
                    pct(c.metrics.accuracy),
                    pct(c.metrics.precision),
                    pct(c.metrics.recall),
                    pct(c.metrics.f1),
                    format!("{:.4}", c.fit_seconds),
                    format!("{:.4}", c.predict_seconds),
                ]
            })
            .collect();
        let header = [
            "id",
            "params",
            "acc%",
            "prec%",
            "rec%",
            "f1%",
            "fit s",
            "predict s",
        ];
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[&str]| -> String {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i == 1 {
                    let _ = write!(s, "{cell:<w$}  ");
                } else {
                    let _ = write!(s, "{cell:>w$}  ");
                }
            }
            s.trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(&header));
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&cells));
        }
        let e = &m.ensemble;
        let _ = writeln!(
            out,
            "ensemble ({} voters): acc {}%  prec {}%  rec {}%  f1 {}%",
            m.n_voters,
            pct(e.accuracy),
            pct(e.precision),
            pct(e.recall),
            pct(e.f1)
        );
        let _ = writeln!(
            out,
            "single-config accuracy: best {}%  worst {}%",
            pct(m.best_single_accuracy),
            pct(m.worst_single_accuracy)
        );
    }

    let _ = writeln!(out);
    if let Some(s) = report.serial_seconds {
        let _ = writeln!(out, "serial time:   {s:.3} s");
    }
    if let Some(p) = report.parallel_seconds {
        let _ = writeln!(out, "parallel time: {p:.3} s");
    }
    if let Some(x) = report.speedup {
        let _ = writeln!(out, "speedup:       {x:.3}x");
    }
    if let Some(eq) = &report.equivalence {
        if eq.holds {
            let _ = writeln!(
                out,
                "equivalence:   serial and parallel predictions identical"
            );
        } else {
            let _ = writeln!(
                out,
                "!! EQUIVALENCE VIOLATION: mismatched configs {:?}, ensemble {}",
                eq.mismatched_configs,
                if eq.ensemble_matches {
                    "matches"
                } else {
                    "differs"
                }
            );
        }
    }
    out
}

fn to_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Delimited plot data as `(file name, contents)` pairs.
pub fn plot_tables(report: &BenchmarkReport) -> Result<Vec<(String, String)>> {
    let modes: Vec<&ModeSummary> = [&report.serial, &report.parallel]
        .into_iter()
        .flatten()
        .collect();

    let metrics = to_csv(
        &[
            "mode",
            "config_id",
            "params",
            "accuracy",
            "precision",
            "recall",
            "f1",
        ],
        modes.iter().flat_map(|m| {
            m.configs.iter().map(move |c| {
                vec![
                    m.mode.to_string(),
                    c.config_id.to_string(),
                    c.label.clone(),
                    c.metrics.accuracy.to_string(),
                    c.metrics.precision.to_string(),
                    c.metrics.recall.to_string(),
                    c.metrics.f1.to_string(),
                ]
            })
        }),
    )?;
    let times = to_csv(
        &[
            "mode",
            "config_id",
            "params",
            "fit_seconds",
            "predict_seconds",
        ],
        modes.iter().flat_map(|m| {
            m.configs.iter().map(move |c| {
                vec![
                    m.mode.to_string(),
                    c.config_id.to_string(),
                    c.label.clone(),
                    c.fit_seconds.to_string(),
                    c.predict_seconds.to_string(),
                ]
            })
        }),
    )?;
    let summary = to_csv(
        &[
            "mode",
            "n_workers",
            "wall_seconds",
            "ensemble_accuracy",
            "ensemble_precision",
            "ensemble_recall",
            "ensemble_f1",
            "best_single_accuracy",
            "worst_single_accuracy",
        ],
        modes.iter().map(|m| {
            vec![
                m.mode.to_string(),
                m.n_workers.to_string(),
                m.wall_seconds.to_string(),
                m.ensemble.accuracy.to_string(),
                m.ensemble.precision.to_string(),
                m.ensemble.recall.to_string(),
                m.ensemble.f1.to_string(),
                m.best_single_accuracy.to_string(),
                m.worst_single_accuracy.to_string(),
            ]
        }),
    )?;
    Ok(vec![
        ("plotdata_metrics.csv".into(), metrics),
        ("plotdata_times.csv".into(), times),
        ("plotdata_summary.csv".into(), summary),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{KnnParams, TreeParams};
    use crate::ensemble::majority_vote;
    use crate::executor::ConfigResult;

    fn outcome(mode: Mode, wall: f64, preds: &[Vec<usize>]) -> RunOutcome {
        RunOutcome {
            results: preds
                .iter()
                .enumerate()
                .map(|(i, p)| ConfigResult {
                    config_id: i,
                    params: HyperParams::Knn(KnnParams::new(i + 1)),
                    predictions: p.clone(),
                    class_votes: None,
                    fit_seconds: 0.01,
                    predict_seconds: 0.02,
                    warnings: vec![],
                })
                .collect(),
            wall_seconds: wall,
            mode,
            n_workers: if mode == Mode::Serial { 1 } else { 2 },
        }
    }

    fn meta() -> ReportMeta {
        ReportMeta {
            algorithm: "knn".into(),
            dataset: DatasetFingerprint {
                n_train: 10,
                n_test: 4,
                n_features: 2,
                n_classes: 2,
                seed: 7,
            },
            strategy: Strategy::Striped,
            positive_class: 1,
        }
    }

    fn report_for(serial_wall: f64, par_wall: f64, par_preds: &[Vec<usize>]) -> BenchmarkReport {
        let preds = vec![vec![0, 1, 1, 1], vec![0, 0, 1, 1], vec![1, 1, 1, 1]];
        let s = outcome(Mode::Serial, serial_wall, &preds);
        let p = outcome(Mode::Parallel, par_wall, par_preds);
        let es = majority_vote(&s.results, 2).unwrap();
        let ep = majority_vote(&p.results, 2).unwrap();
        build_report(
            meta(),
            Some(ModeRun {
                outcome: &s,
                ensemble: &es,
            }),
            Some(ModeRun {
                outcome: &p,
                ensemble: &ep,
            }),
            &[0, 0, 1, 1],
        )
        .unwrap()
    }

    fn same() -> Vec<Vec<usize>> {
        vec![vec![0, 1, 1, 1], vec![0, 0, 1, 1], vec![1, 1, 1, 1]]
    }

    #[test]
    fn speedup_is_the_time_ratio() {
        let r = report_for(8.2, 3.2, &same());
        assert_eq!(r.speedup, Some(8.2 / 3.2));
        assert!((r.speedup.unwrap() - 2.5625).abs() < 1e-12);
        assert_eq!(report_for(2.0, 2.0, &same()).speedup, Some(1.0));
    }

    #[test]
    fn accuracy_summaries() {
        let r = report_for(1.0, 1.0, &same());
        let s = r.serial.as_ref().unwrap();
        assert_eq!(s.best_single_accuracy, 1.0);
        assert_eq!(s.worst_single_accuracy, 0.5);
        assert_eq!(s.ensemble_accuracy, 0.75);
        assert!(r.equivalence.as_ref().unwrap().holds);
    }

    #[test]
    fn injected_mismatch_is_flagged() {
        let mut preds = same();
        preds[1][0] = 1;
        let r = report_for(1.0, 1.0, &preds);
        let eq = r.equivalence.as_ref().unwrap();
        assert!(!eq.holds);
        assert_eq!(eq.mismatched_configs, vec![1]);
        assert!(r.equivalence_violated());
        assert!(render_text(&r).contains("EQUIVALENCE VIOLATION"));
    }

    #[test]
    fn different_plans_are_an_error() {
        let s = outcome(Mode::Serial, 1.0, &same());
        let mut p = outcome(Mode::Parallel, 1.0, &same());
        p.results[2].params = HyperParams::DTree(TreeParams::with_min_samples_leaf(3));
        let e = majority_vote(&s.results, 2).unwrap();
        let err = build_report(
            meta(),
            Some(ModeRun {
                outcome: &s,
                ensemble: &e,
            }),
            Some(ModeRun {
                outcome: &p,
                ensemble: &e,
            }),
            &[0, 0, 1, 1],
        )
        .unwrap_err();
        assert!(matches!(err, Error::PlanMismatch(_)));
    }

    #[test]
    fn json_round_trip() {
        let r = report_for(0.123456789, 0.1, &same());
        assert_eq!(
            BenchmarkReport::from_json(&r.to_json().unwrap()).unwrap(),
            r
        );
    }

    #[test]
    fn without_timings_ignores_clock() {
        let a = report_for(1.0, 0.5, &same()).without_timings();
        let b = report_for(3.0, 2.5, &same()).without_timings();
        assert_eq!(a, b);
    }

    #[test]
    fn plot_tables_have_a_row_per_config() {
        let r = report_for(1.0, 0.5, &same());
        let tables = plot_tables(&r).unwrap();
        assert_eq!(tables.len(), 3);
        assert_eq!(tables[0].1.lines().count(), 1 + 2 * 3);
        assert_eq!(tables[2].1.lines().count(), 1 + 2);
    }
}
