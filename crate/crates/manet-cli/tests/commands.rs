//! End-to-end command tests: file layout, determinism, schema.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use manet_cli::commands::execute;
use manet_cli::config::{Command, ExperimentPlan, Overrides};
use manet_core::simcore::MetricsReport;

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("manet_cli_test_{name}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

const SIM: &str = "\
n = 256
delta = 2
z0 = auto
z0_mult = 1.5
lambda = 0.02
slots = 600
warmup = 100
seed = 5
area_mult = 2
";

#[test]
fn simulate_writes_report_and_flows() {
    let dir = scratch_dir("simulate");
    let plan = ExperimentPlan::parse(
        Command::Simulate,
        &format!("{SIM}export_shape = true\n"),
        Overrides {
            out: Some(dir.clone()),
            ..Overrides::default()
        },
    )
    .unwrap();
    execute(&plan).unwrap();

    let report: MetricsReport =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.n, 256);
    assert_eq!(report.injected, report.delivered_total + report.in_flight);

    let flows = fs::read_to_string(dir.join("flows.csv")).unwrap();
    // Parameter header + column header + one row per flow.
    assert_eq!(flows.lines().count(), 2 + 256);
    assert!(flows.lines().next().unwrap().starts_with("# n=256"));

    let shape = fs::read_to_string(dir.join("shape.csv")).unwrap();
    assert!(shape.lines().nth(1).unwrap().starts_with("quantile,distance"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_bookkeeping_and_determinism() {
    let text = format!(
        "{SIM}sweep = n\nvalues = 256\nseeds = 1, 2, 3, 4, 5\nslots = 400\nwarmup = 50\n"
    );
    // `slots` appears twice: the second assignment must be rejected.
    assert!(ExperimentPlan::parse(Command::Sweep, &text, Overrides::default()).is_err());

    let text = "\
n = 256
delta = 2
z0 = auto
z0_mult = 1.5
lambda = 0.02
slots = 400
warmup = 50
area_mult = 2
sweep = n
values = 256
seeds = 1, 2, 3, 4, 5
";
    let dir_a = scratch_dir("sweep_a");
    let plan_a = ExperimentPlan::parse(
        Command::Sweep,
        text,
        Overrides {
            out: Some(dir_a.clone()),
            ..Overrides::default()
        },
    )
    .unwrap();
    execute(&plan_a).unwrap();

    // Single value x 5 seeds: 5 report JSONs + 5 flow CSVs + aggregate + plan.
    let runs: Vec<_> = fs::read_dir(dir_a.join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 10);
    let aggregate = fs::read_to_string(dir_a.join("aggregate.csv")).unwrap();
    let value_rows: Vec<&str> = aggregate
        .lines()
        .filter(|l| l.starts_with("value,"))
        .collect();
    assert_eq!(value_rows.len(), 1);
    assert!(value_rows[0].contains(",5,"), "five runs aggregated: {value_rows:?}");
    assert!(dir_a.join("plan.json").exists());

    // Reruns are byte-identical.
    let dir_b = scratch_dir("sweep_b");
    let plan_b = ExperimentPlan::parse(
        Command::Sweep,
        text,
        Overrides {
            out: Some(dir_b.clone()),
            ..Overrides::default()
        },
    )
    .unwrap();
    execute(&plan_b).unwrap();
    assert_eq!(read_tree(&dir_a), read_tree(&dir_b));
    fs::remove_dir_all(&dir_a).unwrap();
    fs::remove_dir_all(&dir_b).unwrap();
}

#[test]
fn analyze_is_pure_and_emits_schema() {
    let dir = scratch_dir("analyze");
    let plan = ExperimentPlan::parse(
        Command::Analyze,
        "delta_grid = 0:4:0.5\nbeta_grid = 0.1,0.2,0.3,0.4,0.5\n",
        Overrides {
            out: Some(dir.clone()),
            ..Overrides::default()
        },
    )
    .unwrap();
    execute(&plan).unwrap();
    for file in ["power_fast.csv", "tradeoff.csv", "power_slow.csv"] {
        let body = fs::read_to_string(dir.join(file)).unwrap();
        assert!(
            body.lines()
                .nth(1)
                .unwrap()
                .starts_with("delta,beta,lambda_exp,delay_exp,power_exp,scheme"),
            "{file} schema"
        );
    }
    // Pure: a second emission is identical.
    let before = read_tree(&dir);
    execute(&plan).unwrap();
    assert_eq!(before, read_tree(&dir));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_meeting_rows() {
    let dir = scratch_dir("oracle");
    let text = "\
n = 4096
delta = 0
z0 = auto
estimator = meeting
home_distances = 24, 30
cell_area = 16
trials = 20000
seed = 9
";
    let plan = ExperimentPlan::parse(
        Command::Oracle,
        text,
        Overrides {
            out: Some(dir.clone()),
            ..Overrides::default()
        },
    )
    .unwrap();
    execute(&plan).unwrap();
    let body = fs::read_to_string(dir.join("oracle.csv")).unwrap();
    let rows: Vec<&str> = body.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row.starts_with("meeting,"));
        let fields: Vec<&str> = row.split(',').collect();
        let est: f64 = fields[5].parse().unwrap();
        let lo: f64 = fields[6].parse().unwrap();
        let hi: f64 = fields[7].parse().unwrap();
        assert!(lo <= est && est <= hi);
    }
    fs::remove_dir_all(&dir).unwrap();
}
