//! `analyze`: emit the closed-form curves as CSV. Pure computation, no
//! randomness consumed.
//!
//! Three files share the schema `(delta, beta, lambda_exp, delay_exp,
//! power_exp, scheme)`:
//!
//! * `power_fast.csv` — best power λ/D vs δ under fast mobility, with the
//!   bisection and static-alternative components alongside the envelope.
//! * `tradeoff.csv`   — feasible (λ, D) exponent pairs per δ for Z0 = n^β,
//!   plus the reference lines D = n·λ and D = n·λ².
//! * `power_slow.csv` — slow-mobility comparison: bisection vs the
//!   degenerate single-step point.

use manet_core::analysis::{
    alternative_scheme_law, beta_floor, power_exponent, slow_mobility_summary, tradeoff_curve,
};

use crate::config::ExperimentPlan;
use crate::output::{num, Csv};

use super::RunError;

const COLUMNS: [&str; 6] = [
    "delta",
    "beta",
    "lambda_exp",
    "delay_exp",
    "power_exp",
    "scheme",
];

fn row(csv: &mut Csv, delta: f64, beta: f64, le: f64, de: f64, scheme: &str) {
    csv.row(&[
        num(delta),
        num(beta),
        num(le),
        num(de),
        num(le - de),
        scheme.to_string(),
    ]);
}

/// The minimal-delay operating point of the bisection scheme at this δ.
fn bisection_point(delta: f64) -> (f64, f64, f64) {
    let beta = beta_floor(delta);
    let t = tradeoff_curve(delta, beta).expect("floor is admissible");
    (beta, t.lambda_exp, t.delay_exp)
}

pub fn emit_curves(plan: &ExperimentPlan) -> Result<(), RunError> {
    let params = [("command", "analyze".to_string())];
    let alt = alternative_scheme_law();

    let mut fast = Csv::new(&params, &COLUMNS);
    for &delta in &plan.curves.delta_grid {
        let (beta, le, de) = bisection_point(delta);
        row(&mut fast, delta, beta, le, de, "bisection");
        if delta > 2.0 {
            row(
                &mut fast,
                delta,
                f64::NAN,
                alt.law.throughput_exp,
                alt.law.delay_exp,
                "alternative",
            );
        }
        // The achievable envelope: the alternative takes over past the
        // crossover.
        let best = power_exponent(delta);
        let (b_le, b_de) = if delta > alt.crossover_delta {
            (alt.law.throughput_exp, alt.law.delay_exp)
        } else {
            (le, de)
        };
        debug_assert!((best - (b_le - b_de)).abs() < 1e-12);
        row(&mut fast, delta, f64::NAN, b_le, b_de, "best");
    }
    fast.write_to(&plan.output_dir.join("power_fast.csv"))?;

    let mut tr = Csv::new(&params, &COLUMNS);
    for &delta in &plan.curves.delta_grid {
        if delta < 2.0 {
            let floor = beta_floor(delta);
            let mut betas: Vec<f64> = plan
                .curves
                .beta_grid
                .iter()
                .copied()
                .filter(|&b| b > floor + 1e-12 && b <= 0.5 + 1e-12)
                .collect();
            betas.insert(0, floor);
            for beta in betas {
                let t = tradeoff_curve(delta, beta).expect("validated beta");
                row(&mut tr, delta, beta, t.lambda_exp, t.delay_exp, "bisection");
            }
        } else {
            let t = tradeoff_curve(delta, 0.0).expect("fixed point");
            row(&mut tr, delta, f64::NAN, t.lambda_exp, t.delay_exp, "bisection");
        }
    }
    // Reference lines in the same exponent plane.
    let mut x = -1.0;
    while x <= 1e-12 {
        row(&mut tr, f64::NAN, f64::NAN, x, 1.0 + x, "reference_d_eq_n_lambda");
        row(&mut tr, f64::NAN, f64::NAN, x, 1.0 + 2.0 * x, "reference_d_eq_n_lambda2");
        x += 0.05;
    }
    tr.write_to(&plan.output_dir.join("tradeoff.csv"))?;

    let mut slow = Csv::new(&params, &COLUMNS);
    for &delta in &plan.curves.delta_grid {
        let summary = slow_mobility_summary(delta);
        let (beta, le, de) = bisection_point(delta);
        row(&mut slow, delta, beta, le, de, "bisection");
        row(
            &mut slow,
            delta,
            f64::NAN,
            summary.degenerate.throughput_exp,
            summary.degenerate.delay_exp,
            "degenerate",
        );
        let (b_le, b_de) = if summary.bisection_preferred {
            (le, de)
        } else {
            (summary.degenerate.throughput_exp, summary.degenerate.delay_exp)
        };
        row(&mut slow, delta, f64::NAN, b_le, b_de, "best");
    }
    slow.write_to(&plan.output_dir.join("power_slow.csv"))?;

    Ok(())
}
