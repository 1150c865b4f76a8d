//! `sweep`: run every (sweep value × seed) configuration, one result file
//! pair per run, then aggregate means, confidence intervals and the
//! log-log slope fits of throughput and delay against the swept value.
//!
//! Runs execute in a small worker pool; each worker writes only its own
//! run's files, and the aggregate is assembled afterwards in plan order,
//! so outputs are byte-identical across reruns of the same plan.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use manet_core::oracle::slope_fit;
use manet_core::simcore::{MetricsReport, SimConfig, Simulation};
use manet_core::stats;

use crate::config::{sweep_value_of, ExperimentPlan, SweepAxis};
use crate::output::{num, run_tag, write_json, Csv};

use super::simulate::{config_params, flows_csv};
use super::RunError;

#[derive(serde::Serialize)]
struct PlanDoc<'a> {
    command: String,
    base: &'a SimConfig,
    sweep_axis: Option<&'static str>,
    sweep_values: Vec<f64>,
    seeds: &'a [u64],
    workers: usize,
}

struct RunOutcome {
    value: f64,
    seed: u64,
    result: Result<MetricsReport, String>,
}

pub fn run_sweep(plan: &ExperimentPlan) -> Result<(), RunError> {
    let axis = plan.sweep.as_ref().expect("sweep plan validated");
    let configs = plan.derived_configs();
    let runs_dir = plan.output_dir.join("runs");
    std::fs::create_dir_all(&runs_dir)?;

    write_json(
        &plan.output_dir.join("plan.json"),
        &PlanDoc {
            command: plan.command.to_string(),
            base: &plan.base,
            sweep_axis: Some(axis.name()),
            sweep_values: axis.values(),
            seeds: &plan.seeds,
            workers: plan.workers,
        },
    )?;

    // Worker pool over the run list; results land in plan order.
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<RunOutcome>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    let worker_count = plan.workers.min(configs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= configs.len() {
                    break;
                }
                let cfg = configs[idx].clone();
                let value = sweep_value_of(&cfg, axis);
                let seed = cfg.seed;
                let tag = run_tag(axis.name(), value, seed);
                let result = Simulation::run(cfg).map_err(|e| e.to_string());
                if let Ok(report) = &result {
                    let _ = write_json(&runs_dir.join(format!("report_{tag}.json")), report);
                    let _ = flows_csv(report).write_to(&runs_dir.join(format!("flows_{tag}.csv")));
                }
                outcomes.lock().unwrap()[idx] = Some(RunOutcome {
                    value,
                    seed,
                    result,
                });
            });
        }
    });
    let outcomes: Vec<RunOutcome> = outcomes
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("all runs visited"))
        .collect();

    // Failures are recorded and the aggregate is still produced.
    let failures: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.result.is_err()).collect();
    if !failures.is_empty() {
        let mut csv = Csv::new(&[], &["value", "seed", "error"]);
        for f in &failures {
            csv.row(&[
                num(f.value),
                f.seed.to_string(),
                f.result.as_ref().err().unwrap().replace(',', ";"),
            ]);
        }
        csv.write_to(&runs_dir.join("failures.csv"))?;
    }

    // Aggregate rows per sweep value.
    let mut params = config_params(&plan.base);
    params.push(("sweep", axis.name().to_string()));
    params.push((
        "seeds",
        plan.seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    ));
    let mut csv = Csv::new(
        &params,
        &[
            "kind",
            "value",
            "count",
            "lambda_mean",
            "lambda_ci_lo",
            "lambda_ci_hi",
            "delay_mean",
            "delay_ci_lo",
            "delay_ci_hi",
            "slope",
            "slope_stderr",
            "r2",
        ],
    );
    let values = axis.values();
    let mut lambda_means = Vec::new();
    let mut delay_means = Vec::new();
    let mut fit_values = Vec::new();
    for &value in &values {
        let reports: Vec<&MetricsReport> = outcomes
            .iter()
            .filter(|o| o.value == value)
            .filter_map(|o| o.result.as_ref().ok())
            .collect();
        if reports.is_empty() {
            continue;
        }
        let lambdas: Vec<f64> = reports.iter().map(|r| r.per_node_throughput()).collect();
        let delays: Vec<f64> = reports.iter().filter_map(|r| r.mean_delay()).collect();
        let (lm, llo, lhi) = mean_ci(&lambdas);
        let (dm, dlo, dhi) = if delays.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            mean_ci(&delays)
        };
        csv.row(&[
            "value".to_string(),
            num(value),
            reports.len().to_string(),
            num(lm),
            num(llo),
            num(lhi),
            num(dm),
            num(dlo),
            num(dhi),
            String::new(),
            String::new(),
            String::new(),
        ]);
        if lm > 0.0 && !dm.is_nan() && dm > 0.0 {
            fit_values.push(value);
            lambda_means.push(lm);
            delay_means.push(dm);
        }
    }

    // Log-log slope fits of the per-value means against the swept value.
    let numeric_axis = !matches!(axis, SweepAxis::Delta(_));
    if numeric_axis && fit_values.len() >= 3 {
        for (kind, ys) in [("throughput_fit", &lambda_means), ("delay_fit", &delay_means)] {
            if let Ok(fit) = slope_fit(&fit_values, ys) {
                csv.row(&[
                    kind.to_string(),
                    String::new(),
                    fit.points.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    num(fit.slope),
                    num(fit.stderr),
                    num(fit.r2),
                ]);
            }
        }
    }
    csv.write_to(&plan.output_dir.join("aggregate.csv"))?;

    if !failures.is_empty() {
        return Err(RunError::Partial {
            failed: failures.len(),
            total: outcomes.len(),
        });
    }
    Ok(())
}

/// Mean with a normal-approximation 95% interval across seeds.
fn mean_ci(xs: &[f64]) -> (f64, f64, f64) {
    let m = stats::mean(xs);
    if xs.len() < 2 {
        return (m, m, m);
    }
    let half = 1.96 * (stats::variance(xs) / xs.len() as f64).sqrt();
    (m, m - half, m + half)
}
