//! Closed-form bound arithmetic and the experiments that tie the pieces
//! together: the advice bound curve, deterministic and randomized reference
//! lines, the advice-vs-randomization crossover, and the measured-vs-closed
//! certification table.

use crate::advice::oracle_threshold_index;
use crate::adversary::adaptive_lower_bound_with_requests;
use crate::error::Error;
use crate::market::{optimal_offline, MarketBounds};
use crate::strategies::{advice_player, run_policy, threshold_family};

/// Guaranteed competitive ratio with `b` advice bits:
/// `(M/m)^(1/(2^b+1))`. Strictly decreasing in `b`, tending to 1.
pub fn advice_bound(b: u32, fluctuation: f64) -> f64 {
    advice_bound_real(b as f64, fluctuation)
}

/// The same curve with a continuous advice budget, for plotting.
pub fn advice_bound_real(b: f64, fluctuation: f64) -> f64 {
    fluctuation.powf(1.0 / (b.exp2() + 1.0))
}

/// Reference lines for randomized play: expected-ratio upper bound
/// `log2(M/m)` and lower bound `log2(M/m)/2`.
pub fn randomized_bounds(fluctuation: f64) -> (f64, f64) {
    let upper = fluctuation.log2();
    (upper, upper / 2.0)
}

/// The advice budget `b*` beyond which the advice bound beats the
/// randomized lower bound:
///
/// `b* = log2( log2(M/m) / log2(log2(M/m)/2) - 1 )`.
///
/// Undefined for fluctuation <= 4, where the inner logarithm is nonpositive
/// or zero; that is reported, never returned as a NaN.
pub fn crossover_bits(fluctuation: f64) -> Result<f64, Error> {
    if fluctuation.is_nan() || fluctuation <= 4.0 {
        return Err(Error::CrossoverUndefined(fluctuation));
    }
    let log_ratio = fluctuation.log2();
    Ok((log_ratio / (log_ratio / 2.0).log2() - 1.0).log2())
}

/// One point of the advice bound curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    /// Advice budget; integral in tables, real-valued on dense plot grids.
    pub b: f64,
    pub advice_bound: f64,
}

/// The advice bound curve next to its reference lines.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub fluctuation: f64,
    pub rows: Vec<BoundRow>,
    /// Tight deterministic bound `(M/m)^(1/2)`, equal to the curve at b = 0.
    pub det_bound: f64,
    pub rand_upper: f64,
    pub rand_lower: f64,
    /// Crossover budget, absent when the fluctuation ratio is <= 4.
    pub crossover: Option<f64>,
}

fn curve_skeleton(fluctuation: f64) -> Result<BoundCurve, Error> {
    if !fluctuation.is_finite() || fluctuation < 1.0 {
        return Err(Error::InvalidFluctuation(fluctuation));
    }
    let (rand_upper, rand_lower) = randomized_bounds(fluctuation);
    Ok(BoundCurve {
        fluctuation,
        rows: Vec::new(),
        // Identical expression to the b = 0 row, so the endpoint identity
        // det_bound = advice_bound(0) holds exactly.
        det_bound: advice_bound(0, fluctuation),
        rand_upper,
        rand_lower,
        crossover: crossover_bits(fluctuation).ok(),
    })
}

/// Bound curve sampled at integer budgets `b = 0..=b_max`.
pub fn figure_data(fluctuation: f64, b_max: u32) -> Result<BoundCurve, Error> {
    let mut curve = curve_skeleton(fluctuation)?;
    curve.rows = (0..=b_max)
        .map(|b| BoundRow {
            b: b as f64,
            advice_bound: advice_bound(b, fluctuation),
        })
        .collect();
    Ok(curve)
}

/// Bound curve sampled on a dense real-valued grid, step defaulting to 0.05
/// in the CLI.
pub fn figure_data_dense(fluctuation: f64, b_max: f64, step: f64) -> Result<BoundCurve, Error> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidGridStep(step));
    }
    let mut curve = curve_skeleton(fluctuation)?;
    let mut i = 0u64;
    loop {
        let b = i as f64 * step;
        if b > b_max + step * 1e-9 {
            break;
        }
        curve.rows.push(BoundRow {
            b,
            advice_bound: advice_bound_real(b, fluctuation),
        });
        i += 1;
    }
    Ok(curve)
}

/// Measured forced ratio next to its closed form for one advice budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRow {
    pub b: u32,
    pub measured: f64,
    pub closed_form: f64,
}

/// One certified budget: the adversary's measured ratio, the closed form,
/// and the oracle-advised player's ratio on the adversary's own transcript.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertRow {
    pub b: u32,
    pub measured: f64,
    pub closed_form: f64,
    /// Ratio of the advice player (with oracle tape) on the transcript; it
    /// must never exceed the closed form.
    pub player_ratio: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Per-budget certification rows plus the overall verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    pub rows: Vec<CertRow>,
    pub all_pass: bool,
}

/// Runs the adaptive adversary against the advice ladder for every budget
/// `b = 0..=b_max` and reports measured versus closed-form ratios.
///
/// The two must agree to within 1e-9 relative; [`certification_report`]
/// carries the verdicts.
pub fn empirical_ratio_table(
    b_max: u32,
    bounds: MarketBounds,
    n_budget: usize,
) -> Result<Vec<RatioRow>, Error> {
    let report = certification_report(b_max, bounds, n_budget, 1e-9, 1.0)?;
    Ok(report
        .rows
        .iter()
        .map(|row| RatioRow {
            b: row.b,
            measured: row.measured,
            closed_form: row.closed_form,
        })
        .collect())
}

/// The certification engine behind [`empirical_ratio_table`] and the CLI
/// `certify` command.
///
/// For each budget the adversary plays the request ladder scaled by
/// `ladder_scale` against the advice-family policies. A scale of exactly 1
/// is the honest experiment; any other scale is a negative control that must
/// drive `measured` away from the closed form and fail the check.
pub fn certification_report(
    b_max: u32,
    bounds: MarketBounds,
    n_budget: usize,
    tol: f64,
    ladder_scale: f64,
) -> Result<CertificationReport, Error> {
    let largest = 1usize << b_max.min(crate::strategies::MAX_ADVICE_BITS);
    if n_budget < largest + 1 {
        return Err(Error::BudgetTooSmall {
            n_budget,
            needed: largest + 1,
        });
    }
    let mut rows = Vec::with_capacity(b_max as usize + 1);
    let mut all_pass = true;
    for b in 0..=b_max {
        let family = threshold_family(b, bounds)?;
        let requests: Vec<f64> = family.thresholds().iter().map(|&t| t * ladder_scale).collect();
        let transcript =
            adaptive_lower_bound_with_requests(&requests, n_budget, bounds, &family.policies())?;
        let closed_form = advice_bound(b, bounds.fluctuation());

        let mut tape = oracle_threshold_index(b, bounds, &transcript.sequence)?;
        let player = advice_player(b, &mut tape, bounds)?;
        let outcome = run_policy(&player, &transcript.sequence);
        let player_ratio = optimal_offline(&transcript.sequence).profit / outcome.profit;

        let rel_err = (transcript.forced_ratio - closed_form).abs() / closed_form;
        let pass = rel_err <= tol && player_ratio <= closed_form * (1.0 + tol);
        all_pass &= pass;
        rows.push(CertRow {
            b,
            measured: transcript.forced_ratio,
            closed_form,
            player_ratio,
            rel_err,
            pass,
        });
    }
    Ok(CertificationReport { rows, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(m: f64, cap: f64) -> MarketBounds {
        MarketBounds::new(m, cap).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn advice_bound_examples() {
        assert!(rel_close(advice_bound(1, 8.0), 2.0, 1e-12));
        assert!(rel_close(advice_bound(0, 100.0), 10.0, 1e-12));
        assert!(advice_bound(40, 100.0) < 1.0 + 1e-10);
    }

    #[test]
    fn advice_bound_decreases_and_flattens() {
        let fluctuation = 100.0;
        let mut prev = advice_bound(0, fluctuation);
        let mut prev_gap = f64::INFINITY;
        for b in 1..=12u32 {
            let cur = advice_bound(b, fluctuation);
            assert!(cur < prev, "not strictly decreasing at b={b}");
            let gap = prev - cur;
            assert!(gap < prev_gap, "differences not shrinking at b={b}");
            prev = cur;
            prev_gap = gap;
        }
    }

    #[test]
    fn randomized_reference_lines() {
        let (upper, lower) = randomized_bounds(100.0);
        assert!((upper - 6.644).abs() < 1e-3);
        assert!((lower - 3.322).abs() < 1e-3);
        assert_eq!(randomized_bounds(2.0), (1.0, 0.5));
        assert_eq!(randomized_bounds(1.0), (0.0, 0.0));
    }

    #[test]
    fn crossover_at_fluctuation_100() {
        let bstar = crossover_bits(100.0).unwrap();
        assert!((bstar - 1.503).abs() < 1e-3);
        // Bracketing: one more bit beats the randomized lower bound, one
        // fewer does not.
        let (_, rand_lower) = randomized_bounds(100.0);
        assert!(advice_bound(2, 100.0) < rand_lower);
        assert!(advice_bound(1, 100.0) > rand_lower);
    }

    #[test]
    fn crossover_undefined_at_and_below_four() {
        for fluctuation in [4.0, 3.0, 1.0] {
            assert_eq!(
                crossover_bits(fluctuation).unwrap_err(),
                Error::CrossoverUndefined(fluctuation)
            );
        }
    }

    #[test]
    fn crossover_sits_on_the_randomized_lower_line() {
        for fluctuation in [4.5, 10.0, 100.0, 1e6] {
            let bstar = crossover_bits(fluctuation).unwrap();
            let (_, rand_lower) = randomized_bounds(fluctuation);
            assert!(rel_close(
                advice_bound_real(bstar, fluctuation),
                rand_lower,
                1e-9
            ));
        }
    }

    #[test]
    fn figure_rows_and_reference_lines() {
        let curve = figure_data(100.0, 10).unwrap();
        assert_eq!(curve.rows.len(), 11);
        assert!(rel_close(curve.rows[0].advice_bound, 10.0, 1e-12));
        assert!(rel_close(curve.rows[3].advice_bound, 1.6681, 1e-4));
        assert_eq!(curve.det_bound, curve.rows[0].advice_bound);
        assert!((curve.crossover.unwrap() - 1.503).abs() < 1e-3);
    }

    #[test]
    fn figure_at_fluctuation_one_is_flat() {
        let curve = figure_data(1.0, 5).unwrap();
        assert!(curve.rows.iter().all(|r| r.advice_bound == 1.0));
        assert_eq!(curve.det_bound, 1.0);
        assert_eq!((curve.rand_upper, curve.rand_lower), (0.0, 0.0));
        assert_eq!(curve.crossover, None);
    }

    #[test]
    fn figure_rejects_fluctuation_below_one() {
        assert!(matches!(
            figure_data(0.5, 3),
            Err(Error::InvalidFluctuation(_))
        ));
    }

    #[test]
    fn dense_grid_covers_the_budget_range() {
        let curve = figure_data_dense(100.0, 2.0, 0.05).unwrap();
        assert_eq!(curve.rows.len(), 41);
        assert_eq!(curve.rows[0].b, 0.0);
        assert!(rel_close(curve.rows[40].b, 2.0, 1e-12));
        assert!(matches!(
            figure_data_dense(100.0, 2.0, 0.0),
            Err(Error::InvalidGridStep(_))
        ));
    }

    #[test]
    fn ratio_table_examples() {
        let rows = empirical_ratio_table(1, bounds(1.0, 8.0), 3).unwrap();
        assert!(rel_close(rows[1].measured, 2.0, 1e-9));
        assert!(rel_close(rows[1].closed_form, 2.0, 1e-9));

        let rows = empirical_ratio_table(0, bounds(1.0, 100.0), 2).unwrap();
        assert!(rel_close(rows[0].measured, 10.0, 1e-9));

        let rows = empirical_ratio_table(2, bounds(1.0, 32.0), 5).unwrap();
        assert!(rel_close(rows[2].measured, 2.0, 1e-9));
        assert!(rel_close(rows[2].closed_form, 2.0, 1e-9));
    }

    #[test]
    fn ratio_table_checks_budget_up_front() {
        assert_eq!(
            empirical_ratio_table(3, bounds(1.0, 8.0), 8).unwrap_err(),
            Error::BudgetTooSmall {
                n_budget: 8,
                needed: 9
            }
        );
    }

    #[test]
    fn certification_passes_honest_and_fails_perturbed() {
        let b = bounds(1.0, 100.0);
        let honest = certification_report(4, b, 17, 1e-9, 1.0).unwrap();
        assert!(honest.all_pass);
        for row in &honest.rows {
            assert!(row.pass);
            assert!(row.player_ratio <= row.closed_form * (1.0 + 1e-9));
        }

        // Scaling the request ladder by 1e-3 must be detected.
        let perturbed = certification_report(4, b, 17, 1e-9, 1.0 + 1e-3).unwrap();
        assert!(!perturbed.all_pass);
    }
}
