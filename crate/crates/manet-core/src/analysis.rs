//! Closed-form evaluation of the scaling laws: regime classification, the
//! squarelet-area and Z0 constraints, throughput/delay/power bounds,
//! trade-off curves, the queueing (Kingman) bound, the converse limits and
//! the pair-meeting probability table.
//!
//! All quantities are asymptotic orders. Results carry explicit
//! `(n-exponent, log-exponent, loglog-exponent)` triples plus a one-sided
//! label where the source row is O(·) or Ω(·), and a numeric evaluation
//! with unit constants (a fitted constant can always be applied outside).
//! Tests compare exponents and ratios, never constants.

use core::fmt;

#[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::scheduling::{i_max, squarelet_area};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisError {
    /// Z0 exponent below the regime floor (the violated bound is carried).
    BetaOutOfRange { beta: f64, floor: f64, ceil: f64 },
    /// Kingman's bound requires queue load strictly below one.
    UnstableQueue { rho: f64 },
    /// Negative variances are not valid moments.
    InvalidMoment,
    /// The meeting-probability table assumes `sqrt(A) < D/4`.
    MeetingPremiseViolated { cell_side: f64, d_home: f64 },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::BetaOutOfRange { beta, floor, ceil } => write!(
                f,
                "Z0 exponent beta={beta} outside the regime range [{floor}, {ceil}]"
            ),
            AnalysisError::UnstableQueue { rho } => {
                write!(f, "queue load rho={rho} must be < 1")
            }
            AnalysisError::InvalidMoment => write!(f, "variances must be non-negative"),
            AnalysisError::MeetingPremiseViolated { cell_side, d_home } => write!(
                f,
                "meeting probability requires sqrt(A)={cell_side} < D/4={}",
                d_home / 4.0
            ),
        }
    }
}

/// Regime of the decay exponent δ (plus the two non-bisection schemes used
/// in comparisons). The δ = 2 row is a genuine boundary case: it is
/// dispatched only on exact equality of the configured δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    DeltaLe1,
    DeltaIn1To2,
    DeltaEq2,
    DeltaIn2To3,
    DeltaGe3,
    AlternativeStatic,
    SlowDegenerate,
}

/// Classify a decay exponent.
pub fn classify(delta: f64) -> Regime {
    assert!(delta >= 0.0 && delta.is_finite());
    if delta <= 1.0 {
        Regime::DeltaLe1
    } else if delta < 2.0 {
        Regime::DeltaIn1To2
    } else if delta == 2.0 {
        Regime::DeltaEq2
    } else if delta < 3.0 {
        Regime::DeltaIn2To3
    } else {
        Regime::DeltaGe3
    }
}

/// Which side of the asymptotic bound a row states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// Θ(·): both sides.
    Exact,
    /// O(·): upper bound only.
    Upper,
    /// Ω(·): lower bound only.
    Lower,
}

/// An asymptotic order `n^a · (ln n)^b · (ln ln n)^c` with its bound side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderExpr {
    pub n_exp: f64,
    pub log_exp: f64,
    pub loglog_exp: f64,
    pub bound: BoundKind,
}

impl OrderExpr {
    pub fn exact(n_exp: f64, log_exp: f64, loglog_exp: f64) -> Self {
        OrderExpr {
            n_exp,
            log_exp,
            loglog_exp,
            bound: BoundKind::Exact,
        }
    }

    /// Evaluate with unit constant at a given n.
    pub fn eval(&self, n: f64) -> f64 {
        let ln_n = n.ln();
        n.powf(self.n_exp) * ln_n.powf(self.log_exp) * ln_n.ln().powf(self.loglog_exp)
    }
}

/// A numeric value (unit constants) together with its order expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub order: OrderExpr,
}

/// Minimum admissible Z0 for the regime of δ:
/// `n^{1/6}` below δ = 1, `n^{(2-δ)/(8-2δ)}` on [1, 2), `sqrt(ln n)` from 2 up.
pub fn z0_constraint(delta: f64, n: f64) -> f64 {
    assert!(delta >= 0.0 && n >= 4.0);
    if delta < 1.0 {
        n.powf(1.0 / 6.0)
    } else if delta < 2.0 {
        n.powf((2.0 - delta) / (8.0 - 2.0 * delta))
    } else {
        n.ln().sqrt()
    }
}

/// Human-readable form of the Z0 floor, used in configuration diagnostics.
pub fn z0_constraint_name(delta: f64) -> &'static str {
    if delta < 1.0 {
        "n^(1/6)"
    } else if delta < 2.0 {
        "n^((2-delta)/(8-2*delta))"
    } else {
        "sqrt(ln n)"
    }
}

fn beta_of(n: f64, z0: f64) -> f64 {
    z0.ln() / n.ln()
}

/// Upper bound on the aggregate network throughput for the bisection scheme
/// with the given parameters. The order's n-exponent folds in
/// `beta = ln(Z0)/ln(n)`.
pub fn throughput_bound(delta: f64, n: f64, z0: f64) -> Bound {
    let beta = beta_of(n, z0);
    match classify(delta) {
        Regime::DeltaLe1 => Bound {
            value: n.sqrt() * z0,
            order: OrderExpr::exact(0.5 + beta, 0.0, 0.0),
        },
        Regime::DeltaIn1To2 => Bound {
            value: n.powf(0.5 * delta) * z0.powf(2.0 - delta),
            order: OrderExpr::exact(0.5 * delta + beta * (2.0 - delta), 0.0, 0.0),
        },
        Regime::DeltaEq2 => {
            if beta >= 0.5 - 1e-9 {
                Bound {
                    value: n / n.ln(),
                    order: OrderExpr::exact(1.0, -1.0, 0.0),
                }
            } else {
                Bound {
                    value: n / (n.ln() * n.ln()),
                    order: OrderExpr::exact(1.0, -2.0, 0.0),
                }
            }
        }
        _ => Bound {
            value: n.powf(2.0 - 0.5 * delta),
            order: OrderExpr::exact(2.0 - 0.5 * delta, 0.0, 0.0),
        },
    }
}

/// Source-to-destination service-time delay `D_S` (queueing excluded) for
/// the bisection scheme. One-sided (O) for δ >= 2, where the underlying
/// service probabilities are lower bounds.
///
/// For δ = 2 the `1/ln Z0` factor is folded into the numeric value; the
/// order triple reports the `Z0² · ln³n · lnln n` part.
pub fn delay_bound(delta: f64, n: f64, z0: f64) -> Bound {
    let beta = beta_of(n, z0);
    match classify(delta) {
        Regime::DeltaLe1 => Bound {
            value: z0 * n.sqrt(),
            order: OrderExpr::exact(beta + 0.5, 0.0, 0.0),
        },
        Regime::DeltaIn1To2 => Bound {
            value: z0.powf(delta) * n.powf(1.0 - 0.5 * delta),
            order: OrderExpr::exact(beta * delta + 1.0 - 0.5 * delta, 0.0, 0.0),
        },
        Regime::DeltaEq2 => {
            let ln_n = n.ln();
            Bound {
                value: z0 * z0 * ln_n.powi(3) * ln_n.ln() / z0.ln(),
                order: OrderExpr {
                    n_exp: 2.0 * beta,
                    log_exp: 3.0,
                    loglog_exp: 1.0,
                    bound: BoundKind::Upper,
                },
            }
        }
        _ => Bound {
            value: n.powf(0.5 * delta - 1.0) * z0 * z0,
            order: OrderExpr {
                n_exp: 0.5 * delta - 1.0 + 2.0 * beta,
                log_exp: 0.0,
                loglog_exp: 0.0,
                bound: BoundKind::Upper,
            },
        },
    }
}

/// The three per-slot factors behind a step-`i` transmission: the slot is
/// assigned to step i (`p_s`, exact from the slot distribution), an eligible
/// receiver co-resides in the holder's squarelet (`p_alpha`), and the pair
/// wins the in-cell contention (`p_beta`). `p_t` is their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceProbabilities {
    pub p_s: f64,
    pub p_alpha: Bound,
    pub p_beta: Bound,
    pub p_t: Bound,
}

/// Evaluate the service-probability rows at step `i` with unit constants.
/// The candidate-receiver count is `|Γ_i| = Z_i²` for i >= 1 and exactly 1
/// at the last step (the unique destination).
pub fn service_probabilities(i: u32, delta: f64, n: f64, z0: f64) -> ServiceProbabilities {
    let im = i_max(n, z0).expect("valid z0");
    assert!(i <= im, "step {i} beyond i_max {im}");
    let z_i = (2.0f64).powi(i as i32) * z0;
    let gamma = if i == 0 { 1.0 } else { z_i * z_i };
    let areas: alloc::vec::Vec<f64> = (0..=im)
        .map(|j| squarelet_area(j, delta, n, z0, 1.0))
        .collect();
    let a_i = areas[i as usize];
    let sum: f64 = areas.iter().sum();
    let p_s = a_i / sum;
    let ln_n = n.ln();

    let p_alpha = match classify(delta) {
        Regime::DeltaLe1 => Bound {
            value: a_i * gamma / n,
            order: OrderExpr::exact(-1.0, 0.0, 0.0),
        },
        Regime::DeltaIn1To2 => Bound {
            value: a_i * z_i.powf(2.0 * (1.0 - delta)) * gamma / n.powf(2.0 - delta),
            order: OrderExpr::exact(-(2.0 - delta), 0.0, 0.0),
        },
        Regime::DeltaEq2 => Bound {
            value: a_i * (gamma / (z_i * z_i)) * z_i.ln() / (ln_n * ln_n),
            order: OrderExpr::exact(0.0, -1.0, 0.0),
        },
        _ => Bound {
            value: a_i * gamma * z_i.powf(-delta),
            order: OrderExpr::exact(0.0, 0.0, 0.0),
        },
    };

    let p_beta = match classify(delta) {
        Regime::DeltaLe1 | Regime::DeltaIn1To2 => Bound {
            value: 1.0,
            order: OrderExpr::exact(0.0, 0.0, 0.0),
        },
        Regime::DeltaEq2 => Bound {
            value: ln_n / (a_i * a_i.ln().max(1.0)),
            order: OrderExpr {
                n_exp: 0.0,
                log_exp: 0.0,
                loglog_exp: -1.0,
                bound: BoundKind::Lower,
            },
        },
        _ => Bound {
            value: 1.0 / a_i,
            order: OrderExpr {
                n_exp: 0.0,
                log_exp: 0.0,
                loglog_exp: 0.0,
                bound: BoundKind::Lower,
            },
        },
    };

    let bound_kind = match (p_alpha.order.bound, p_beta.order.bound) {
        (BoundKind::Exact, BoundKind::Exact) => BoundKind::Exact,
        _ => BoundKind::Lower,
    };
    let p_t = Bound {
        value: p_s * p_alpha.value * p_beta.value,
        order: OrderExpr {
            n_exp: p_alpha.order.n_exp,
            log_exp: p_alpha.order.log_exp,
            loglog_exp: p_alpha.order.loglog_exp,
            bound: bound_kind,
        },
    };

    ServiceProbabilities {
        p_s,
        p_alpha,
        p_beta,
        p_t,
    }
}

/// Best achievable exponent of n for the power function λ/D under fast
/// mobility (poly-logarithmic factors suppressed).
pub fn power_exponent(delta: f64) -> f64 {
    assert!(delta >= 0.0 && delta.is_finite());
    if delta == 2.0 {
        0.0
    } else if delta > 1.0 && delta < 2.0 {
        -3.0 * (2.0 - delta) / (4.0 - delta)
    } else if delta > 2.0 && delta < 3.0 {
        2.0 - delta
    } else {
        -1.0
    }
}

/// One point of the delay-throughput trade-off with `Z0 = n^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda_exp: f64,
    pub lambda_log_exp: f64,
    pub delay_exp: f64,
    pub delay_log_exp: f64,
    pub delay_bound: BoundKind,
}

impl TradeoffPoint {
    pub fn power_exp(&self) -> f64 {
        self.lambda_exp - self.delay_exp
    }
}

/// Z0-exponent floor of the regime (the admissible range is `[floor, 1/2]`).
pub fn beta_floor(delta: f64) -> f64 {
    if delta <= 1.0 {
        1.0 / 6.0
    } else if delta < 2.0 {
        (2.0 - delta) / (8.0 - 2.0 * delta)
    } else {
        0.0
    }
}

/// Per-node throughput and delay exponents for `Z0 = n^beta`. For δ >= 2
/// the scheme has no trade-off; the fixed operating point (minimal Z0) is
/// returned regardless of beta.
pub fn tradeoff_curve(delta: f64, beta: f64) -> Result<TradeoffPoint, AnalysisError> {
    let floor = beta_floor(delta);
    let ceil = 0.5;
    if beta < floor - 1e-12 || beta > ceil + 1e-12 {
        return Err(AnalysisError::BetaOutOfRange { beta, floor, ceil });
    }
    Ok(match classify(delta) {
        Regime::DeltaLe1 => TradeoffPoint {
            lambda_exp: beta - 0.5,
            lambda_log_exp: 0.0,
            delay_exp: beta + 0.5,
            delay_log_exp: 0.0,
            delay_bound: BoundKind::Exact,
        },
        Regime::DeltaIn1To2 => TradeoffPoint {
            lambda_exp: 0.5 * delta - 1.0 + beta * (2.0 - delta),
            lambda_log_exp: 0.0,
            delay_exp: 1.0 - delta * (0.5 - beta),
            delay_log_exp: 0.0,
            delay_bound: BoundKind::Exact,
        },
        Regime::DeltaEq2 => TradeoffPoint {
            lambda_exp: 0.0,
            lambda_log_exp: -2.0,
            delay_exp: 0.0,
            delay_log_exp: 4.0,
            delay_bound: BoundKind::Upper,
        },
        _ => TradeoffPoint {
            lambda_exp: 1.0 - 0.5 * delta,
            lambda_log_exp: 0.0,
            delay_exp: 0.5 * delta - 1.0,
            delay_log_exp: 1.0,
            delay_bound: BoundKind::Upper,
        },
    })
}

/// λ and D orders of a scheme, with power = λ-exponent − D-exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub throughput_exp: f64,
    pub throughput_log_exp: f64,
    pub delay_exp: f64,
    pub delay_log_exp: f64,
}

impl ScalingLaw {
    pub fn power_exp(&self) -> f64 {
        self.throughput_exp - self.delay_exp
    }
}

/// The static-style alternative for δ > 2: fixed `ln n`-area cells, only
/// home squarelet residents transmit, no mobility exploited. Performance is
/// δ-independent: `λ = Θ(1/sqrt(n ln n))`, `D = Θ(sqrt(n/ln n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeScheme {
    pub law: ScalingLaw,
    /// The bisection scheme's power drops below the alternative's exactly
    /// past this exponent.
    pub crossover_delta: f64,
}

pub fn alternative_scheme_law() -> AlternativeScheme {
    AlternativeScheme {
        law: ScalingLaw {
            throughput_exp: -0.5,
            throughput_log_exp: -0.5,
            delay_exp: 0.5,
            delay_log_exp: -0.5,
        },
        crossover_delta: 3.0,
    }
}

/// True iff the alternative scheme beats the bisection scheme at δ.
pub fn alternative_preferred(delta: f64) -> bool {
    delta > alternative_scheme_law().crossover_delta
}

/// Slow-mobility comparison record: the degenerate single-step point, the
/// hybrid-scheme verdict, and the δ-interval on which the bisection scheme
/// beats the degenerate point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowMobilitySummary {
    /// Single step with `Z0 = sqrt(n)`: `λ = Ω(1/sqrt(n ln n))`, `D = Θ(1)`
    /// in coherence-interval slots.
    pub degenerate: ScalingLaw,
    /// Multi-hop last-step squarelets of any area `B0` enable exactly as
    /// many parallel transmissions as the single-hop dimensioning
    /// (`E[Ñ_0] = E[N_0]`), so the hybrid gains nothing.
    pub hybrid_spatial_reuse_gain: bool,
    /// Interval of δ on which the bisection scheme's power exceeds the
    /// degenerate point's −1/2.
    pub preference_lo: f64,
    pub preference_hi: f64,
    /// Whether the bisection scheme is preferred at the queried δ.
    pub bisection_preferred: bool,
}

pub fn slow_mobility_summary(delta: f64) -> SlowMobilitySummary {
    // Crossings of the fast-mobility power curve with the degenerate -1/2:
    // -3(2-δ)/(4-δ) = -1/2 gives δ = 8/5; 2-δ = -1/2 gives δ = 5/2.
    let lo = 8.0 / 5.0;
    let hi = 5.0 / 2.0;
    SlowMobilitySummary {
        degenerate: ScalingLaw {
            throughput_exp: -0.5,
            throughput_log_exp: -0.5,
            delay_exp: 0.0,
            delay_log_exp: 0.0,
        },
        hybrid_spatial_reuse_gain: false,
        preference_lo: lo,
        preference_hi: hi,
        bisection_preferred: power_exponent(delta) > -0.5,
    }
}

/// Moments of a discrete-time GI/GI/1-FIFO queue feeding Kingman's bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KingmanBound {
    /// Variance of the per-slot arrival count.
    pub sigma2_arrivals: f64,
    /// Variance of the service time.
    pub sigma2_service: f64,
    /// Queue load, must be in [0, 1).
    pub rho: f64,
    /// Mean service time.
    pub mean_service: f64,
}

/// Kingman's upper bound on the total (queueing + service) delay:
/// `D <= D_S · max(1, (σ²_a + σ²_D) / (2 · D_S² · (1 - ρ)))`.
pub fn kingman_delay(b: &KingmanBound) -> Result<f64, AnalysisError> {
    if !(b.rho >= 0.0 && b.rho < 1.0) {
        return Err(AnalysisError::UnstableQueue { rho: b.rho });
    }
    if b.sigma2_arrivals < 0.0 || b.sigma2_service < 0.0 || b.mean_service <= 0.0 {
        return Err(AnalysisError::InvalidMoment);
    }
    let factor = (b.sigma2_arrivals + b.sigma2_service)
        / (2.0 * b.mean_service * b.mean_service * (1.0 - b.rho));
    Ok(b.mean_service * factor.max(1.0))
}

/// Converse limits for any single-copy scheme delivering over home-distance
/// Θ(Z) with transmission range `range`: the protocol model caps the
/// aggregate throughput at `n/range²`, and the delay is at least the
/// reciprocal of the pair-meeting probability.
pub fn proposition1_limits(n: f64, range: f64, meet_prob: f64) -> (f64, f64) {
    assert!(range > 0.0 && meet_prob > 0.0 && meet_prob <= 1.0);
    (n / (range * range), 1.0 / meet_prob)
}

/// Probability that two nodes with home-distance `d_home` land in the same
/// cell of area `cell_area` in one slot. Requires `sqrt(A) < D/4`. The
/// order expression reports the n-dependence at fixed D.
pub fn pair_meeting_probability(
    d_home: f64,
    cell_area: f64,
    delta: f64,
    n: f64,
) -> Result<Bound, AnalysisError> {
    let cell_side = cell_area.sqrt();
    if !(cell_side < d_home / 4.0) {
        return Err(AnalysisError::MeetingPremiseViolated { cell_side, d_home });
    }
    Ok(match classify(delta) {
        Regime::DeltaLe1 => Bound {
            value: cell_area / n,
            order: OrderExpr::exact(-1.0, 0.0, 0.0),
        },
        Regime::DeltaIn1To2 => Bound {
            value: cell_area * d_home.powf(2.0 * (1.0 - delta)) / n.powf(2.0 - delta),
            order: OrderExpr::exact(-(2.0 - delta), 0.0, 0.0),
        },
        Regime::DeltaEq2 => Bound {
            value: cell_area * d_home.ln() / (d_home * d_home * n.ln() * n.ln()),
            order: OrderExpr::exact(0.0, -2.0, 0.0),
        },
        _ => Bound {
            value: cell_area * d_home.powf(-delta),
            order: OrderExpr::exact(0.0, 0.0, 0.0),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= TOL * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn z0_floor_rows() {
        close(z0_constraint(0.5, (1u64 << 18) as f64), 8.0);
        let n = 1e7;
        close(z0_constraint(1.5, n).ln() / n.ln(), 0.1);
        close(z0_constraint(2.0, (16.0f64).exp()), 4.0);
        // Continuous at delta = 1.
        close(z0_constraint(1.0, n).ln() / n.ln(), 1.0 / 6.0);
    }

    #[test]
    fn throughput_exponent_rows() {
        let n = (1u64 << 20) as f64;
        close(throughput_bound(1.5, n, n.powf(0.3)).order.n_exp, 0.9);
        close(throughput_bound(3.0, n, n.ln().sqrt()).order.n_exp, 0.5);
        close(
            throughput_bound(0.0, n, n.powf(1.0 / 6.0)).order.n_exp,
            2.0 / 3.0,
        );
        // δ = 2 rows: n/ln²n below β = 1/2, n/ln n at β = 1/2.
        let low = throughput_bound(2.0, n, n.ln().sqrt());
        assert_eq!(low.order.log_exp, -2.0);
        close(low.value, n / (n.ln() * n.ln()));
        let high = throughput_bound(2.0, n, n.sqrt());
        assert_eq!(high.order.log_exp, -1.0);
        close(high.value, n / n.ln());
    }

    #[test]
    fn delay_exponent_rows() {
        let n = (1u64 << 20) as f64;
        close(delay_bound(1.5, n, n.powf(0.1)).order.n_exp, 0.4);
        close(
            delay_bound(0.0, n, n.powf(1.0 / 6.0)).order.n_exp,
            2.0 / 3.0,
        );
        // δ = 3 with Z0 = sqrt(ln n): D = O(sqrt(n) · ln n).
        let d3 = delay_bound(3.0, n, n.ln().sqrt());
        close(d3.value, n.sqrt() * n.ln());
        assert_eq!(d3.order.bound, BoundKind::Upper);
        assert_eq!(delay_bound(2.0, n, n.ln().sqrt()).order.bound, BoundKind::Upper);
    }

    #[test]
    fn service_probability_rows() {
        let n = (1u64 << 16) as f64;
        let z0 = 8.0;
        // δ < 2: contention factor is Θ(1).
        let sp = service_probabilities(2, 1.5, n, z0);
        assert_eq!(sp.p_beta.value, 1.0);
        assert_eq!(sp.p_beta.order.bound, BoundKind::Exact);
        // δ > 2: p_beta = Ω(1/A_i).
        let sp3 = service_probabilities(2, 3.0, n, z0);
        let a = squarelet_area(2, 3.0, n, z0, 1.0);
        close(sp3.p_beta.value, 1.0 / a);
        assert_eq!(sp3.p_beta.order.bound, BoundKind::Lower);
        assert_eq!(sp3.p_t.order.bound, BoundKind::Lower);
        // Factorization p_t = p_s · p_alpha · p_beta holds identically.
        for delta in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            for i in 0..=i_max(n, z0).unwrap() {
                let s = service_probabilities(i, delta, n, z0);
                close(s.p_t.value, s.p_s * s.p_alpha.value * s.p_beta.value);
            }
        }
    }

    #[test]
    fn last_step_transmission_probability_scales_as_inverse_sqrt_n() {
        // δ <= 1, |Γ_0| = 1, fixed Z0: p_T ~ 1/(sqrt(n)·Z0).
        let z0 = 8.0;
        let n1 = (1u64 << 16) as f64;
        let n2 = (1u64 << 24) as f64;
        let p1 = service_probabilities(0, 0.5, n1, z0).p_t.value;
        let p2 = service_probabilities(0, 0.5, n2, z0).p_t.value;
        let slope = (p2 / p1).ln() / (n2 / n1).ln();
        assert!((slope + 0.5).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn power_examples() {
        close(power_exponent(2.0), 0.0);
        close(power_exponent(1.5), -0.6);
        close(power_exponent(2.5), -0.5);
        close(power_exponent(0.0), -1.0);
        close(power_exponent(1.0), -1.0);
        close(power_exponent(3.0), -1.0);
        close(power_exponent(5.0), -1.0);
    }

    #[test]
    fn tradeoff_examples() {
        // The common corner: β = 1/2, δ <= 1 gives (λ, D) = (n^0, n^1).
        let p = tradeoff_curve(0.5, 0.5).unwrap();
        close(p.lambda_exp, 0.0);
        close(p.delay_exp, 1.0);
        let q = tradeoff_curve(1.5, 0.1).unwrap();
        close(q.lambda_exp, -0.2);
        close(q.delay_exp, 0.4);
        close(q.power_exp(), -0.6);
        // δ <= 1: all points lie on D = n·λ.
        for beta in [1.0 / 6.0, 0.25, 1.0 / 3.0, 0.5] {
            let t = tradeoff_curve(1.0, beta).unwrap();
            close(t.delay_exp - t.lambda_exp, 1.0);
        }
        // Below the floor: rejected with the violated bound.
        match tradeoff_curve(1.5, 0.05) {
            Err(AnalysisError::BetaOutOfRange { floor, .. }) => close(floor, 0.1),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn tradeoff_power_consistency_at_minimal_delay() {
        for delta in [0.0, 0.5, 1.0, 1.2, 1.5, 1.8, 1.95] {
            let beta = beta_floor(delta);
            let t = tradeoff_curve(delta, beta).unwrap();
            close(t.power_exp(), power_exponent(delta));
            // The minimal-delay points sit on D = λ^{-2}.
            close(t.delay_exp, -2.0 * t.lambda_exp);
        }
    }

    #[test]
    fn exponents_continuous_across_regime_boundaries() {
        let eps = 1e-9;
        for beta in [1.0 / 6.0, 0.3, 0.5] {
            let below = tradeoff_curve(1.0, beta).unwrap();
            let above = tradeoff_curve(1.0 + eps, beta).unwrap();
            assert!((below.lambda_exp - above.lambda_exp).abs() < 1e-6);
            assert!((below.delay_exp - above.delay_exp).abs() < 1e-6);
        }
        // Toward δ = 2 at the matched (minimal) Z0 exponent the polynomial
        // parts of both λ and D vanish, matching the δ = 2 fixed point.
        let near2 = tradeoff_curve(2.0 - eps, beta_floor(2.0 - eps)).unwrap();
        let at2 = tradeoff_curve(2.0, 0.0).unwrap();
        assert!((near2.lambda_exp - at2.lambda_exp).abs() < 1e-6);
        assert!((near2.delay_exp - at2.delay_exp).abs() < 1e-6);
    }

    #[test]
    fn monotonicity_of_exponents() {
        let mut prev = tradeoff_curve(0.5, 1.0 / 6.0).unwrap();
        for beta in [0.2, 0.3, 0.4, 0.5] {
            let t = tradeoff_curve(0.5, beta).unwrap();
            assert!(t.lambda_exp > prev.lambda_exp);
            assert!(t.delay_exp > prev.delay_exp);
            prev = t;
        }
        let mut prev_power = power_exponent(2.1);
        for d in [2.3, 2.5, 2.7, 2.9] {
            let p = power_exponent(d);
            assert!(p < prev_power);
            prev_power = p;
        }
    }

    #[test]
    fn kingman_examples() {
        let base = KingmanBound {
            sigma2_arrivals: 0.0,
            sigma2_service: 0.0,
            rho: 0.3,
            mean_service: 7.0,
        };
        close(kingman_delay(&base).unwrap(), 7.0);
        let b = KingmanBound {
            sigma2_arrivals: 1.0,
            sigma2_service: 99.0,
            rho: 0.5,
            mean_service: 10.0,
        };
        close(kingman_delay(&b).unwrap(), 10.0);
        let near_critical = KingmanBound {
            rho: 1.0 - 1e-9,
            ..b
        };
        assert!(kingman_delay(&near_critical).unwrap() > 1e9);
        assert!(kingman_delay(&KingmanBound { rho: 1.0, ..b }).is_err());
    }

    #[test]
    fn proposition1_examples() {
        let n = 4096.0;
        let a0 = 30.0;
        let (cap, floor) = proposition1_limits(n, (2.0 * a0).sqrt(), 1e-3);
        close(cap, n / (2.0 * a0));
        close(floor, 1000.0);
        let (cap2, _) = proposition1_limits(n, 2.0 * (2.0 * a0).sqrt(), 1e-3);
        close(cap2, cap / 4.0);
    }

    #[test]
    fn meeting_probability_rows() {
        let n = (1u64 << 20) as f64;
        let a = 9.0;
        // δ < 1: Θ(A/n), independent of D.
        let p1 = pair_meeting_probability(64.0, a, 0.5, n).unwrap();
        let p2 = pair_meeting_probability(128.0, a, 0.5, n).unwrap();
        close(p1.value, a / n);
        close(p2.value, p1.value);
        close(p1.order.n_exp, -1.0);
        // δ = 3: doubling D scales by 2^{-3}.
        let q1 = pair_meeting_probability(64.0, a, 3.0, n).unwrap();
        let q2 = pair_meeting_probability(128.0, a, 3.0, n).unwrap();
        close(q2.value / q1.value, 0.125);
        // δ = 1.5: D-exponent 2(1-δ) = -1.
        let r1 = pair_meeting_probability(64.0, a, 1.5, n).unwrap();
        let r2 = pair_meeting_probability(128.0, a, 1.5, n).unwrap();
        close(r2.value / r1.value, 0.5);
        close(r1.order.n_exp, -0.5);
        // Premise: sqrt(A) < D/4.
        assert!(pair_meeting_probability(10.0, a, 1.5, n).is_err());
    }

    #[test]
    fn alternative_scheme_and_crossover() {
        let alt = alternative_scheme_law();
        close(alt.law.throughput_exp, -0.5);
        close(alt.law.delay_exp, 0.5);
        close(alt.law.power_exp(), -1.0);
        // At δ = 3 the bisection power equals the alternative's −1.
        close(power_exponent(3.0), alt.law.power_exp());
        assert!(!alternative_preferred(3.0));
        assert!(alternative_preferred(4.0));
        close(power_exponent(4.0), -1.0); // plateau past the crossover
    }

    #[test]
    fn slow_mobility_summary_record() {
        let s = slow_mobility_summary(2.0);
        close(s.degenerate.delay_exp, 0.0);
        close(s.degenerate.throughput_exp, -0.5);
        assert!(!s.hybrid_spatial_reuse_gain);
        close(s.preference_lo, 1.6);
        close(s.preference_hi, 2.5);
        assert!(s.bisection_preferred);
        assert!(!slow_mobility_summary(1.2).bisection_preferred);
        assert!(!slow_mobility_summary(2.8).bisection_preferred);
        assert!(slow_mobility_summary(1.7).bisection_preferred);
        assert!(slow_mobility_summary(2.4).bisection_preferred);
    }

    #[test]
    fn regime_classification_is_total_and_exact_at_two() {
        assert_eq!(classify(0.0), Regime::DeltaLe1);
        assert_eq!(classify(1.0), Regime::DeltaLe1);
        assert_eq!(classify(1.5), Regime::DeltaIn1To2);
        assert_eq!(classify(2.0), Regime::DeltaEq2);
        assert_eq!(classify(2.0 + 1e-12), Regime::DeltaIn2To3);
        assert_eq!(classify(1.9999999), Regime::DeltaIn1To2);
        assert_eq!(classify(3.0), Regime::DeltaGe3);
    }
}
