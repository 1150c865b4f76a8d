//! `oracle`: drive the Monte Carlo estimators and emit one CSV row per
//! estimate.

use manet_core::geometry::TorusGeometry;
use manet_core::mobility::{build_shape, MobilityError};
use manet_core::oracle::{
    eligible_pair_band, estimate_meeting_probability, estimate_pbeta,
    estimate_populated_probability, sample_cell_censuses, Estimate,
};
use manet_core::rng::{stream_rng, StreamDomain};
use manet_core::scheduling::squarelet_area;

use crate::config::{ExperimentPlan, OracleSpec};
use crate::output::{num, Csv};

use super::RunError;

pub fn run_oracle(plan: &ExperimentPlan) -> Result<(), RunError> {
    let spec = plan.oracle.as_ref().expect("oracle plan validated");
    let cfg = &plan.base;
    let n = cfg.n as f64;
    let g = TorusGeometry::from_area(n).map_err(MobilityError::Geometry)?;
    let shape = build_shape(cfg.delta, &g, cfg.shape_resolution)?;

    let mut csv = Csv::new(
        &[
            ("n", cfg.n.to_string()),
            ("delta", num(cfg.delta)),
            ("z0", num(cfg.z0)),
            ("seed", cfg.seed.to_string()),
        ],
        &[
            "estimator",
            "step",
            "cell_area",
            "home_distance",
            "trials",
            "estimate",
            "ci_lo",
            "ci_hi",
            "successes",
        ],
    );
    let mut push = |estimator: &str, step: Option<u32>, area: f64, d: f64, e: &Estimate| {
        csv.row(&[
            estimator.to_string(),
            step.map(|s| s.to_string()).unwrap_or_default(),
            num(area),
            num(d),
            e.trials.to_string(),
            num(e.estimate),
            num(e.ci_lo),
            num(e.ci_hi),
            e.successes.to_string(),
        ]);
    };

    match spec {
        OracleSpec::Meeting {
            home_distances,
            cell_area,
            trials,
        } => {
            for (i, &d) in home_distances.iter().enumerate() {
                let mut rng = stream_rng(cfg.seed, StreamDomain::Oracle, i as u64);
                let est = estimate_meeting_probability(d, *cell_area, &shape, *trials, &mut rng)?;
                push("meeting", None, *cell_area, d, &est);
            }
        }
        OracleSpec::Populated {
            step,
            cell_area,
            instances,
            slots_per_instance,
        } => {
            let area = cell_area
                .unwrap_or_else(|| squarelet_area(*step, cfg.delta, n, cfg.z0, cfg.area_const));
            let mut rng = stream_rng(cfg.seed, StreamDomain::Oracle, 0);
            let est = estimate_populated_probability(
                *step,
                &shape,
                cfg.z0,
                area,
                (0, 0),
                *instances,
                *slots_per_instance,
                &mut rng,
            )?;
            push("populated", Some(*step), area, f64::NAN, &est);
        }
        OracleSpec::PBeta {
            step,
            cell_area,
            instances,
            slots_per_instance,
        } => {
            let area = cell_area
                .unwrap_or_else(|| squarelet_area(*step, cfg.delta, n, cfg.z0, cfg.area_const));
            let mut rng = stream_rng(cfg.seed, StreamDomain::Oracle, 0);
            let censuses =
                sample_cell_censuses(&shape, area, *instances, *slots_per_instance, &mut rng)?;
            let band = eligible_pair_band(*step, cfg.z0);
            let est = estimate_pbeta(&censuses, band, &g, &mut rng);
            push("pbeta", Some(*step), area, f64::NAN, &est);
        }
    }

    csv.write_to(&plan.output_dir.join("oracle.csv"))?;
    Ok(())
}
