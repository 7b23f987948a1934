//! Lower-bound constructions.
//!
//! Two adversaries live here. The staircase family pins down how much advice
//! an optimal player needs: its `n` members share pairwise-indistinguishable
//! prefixes yet have `n` distinct optimal days, so any set of fewer than `n`
//! deterministic policies leaves some member where none of them is optimal
//! ([`pigeonhole_check`]). The adaptive adversary plays the geometric
//! request ladder against a concrete set of `2^b` policies and forces a
//! competitive ratio of at least `(M/m)^(1/(2^b+1))` ([`adaptive_lower_bound`]),
//! which meets the advice player's guarantee exactly.

use crate::error::Error;
use crate::market::{optimal_offline, MarketBounds, PriceSequence, TradeOutcome};
use crate::strategies::{
    fixed_day, never_trades, run_policy, threshold_family, Decision, DecisionPolicy,
    MAX_ADVICE_BITS,
};

/// The staircase family: member `i` rises `m+d, m+2d, ..., m+id` and then
/// drops to the floor for the remaining `n-i` days, with `d = (M-m)/n`.
///
/// Members `i` and `j` share an identical prefix of length `min(i, j)`, and
/// each member's unique optimum is its own peak day.
#[derive(Clone, Debug)]
pub struct StaircaseFamily {
    n: usize,
    bounds: MarketBounds,
    delta: f64,
    members: Vec<PriceSequence>,
}

impl StaircaseFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> MarketBounds {
        self.bounds
    }

    /// Step height `(M-m)/n`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn members(&self) -> &[PriceSequence] {
        &self.members
    }

    /// Member for a 1-based index.
    pub fn member(&self, index: usize) -> &PriceSequence {
        &self.members[index - 1]
    }
}

/// Builds the `n`-member staircase family. Degenerate corridors (`m = M`)
/// admit no staircase.
pub fn build_staircase(n: usize, bounds: MarketBounds) -> Result<StaircaseFamily, Error> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if bounds.lower() == bounds.upper() {
        return Err(Error::DegenerateBounds(bounds.lower()));
    }
    let delta = (bounds.upper() - bounds.lower()) / n as f64;
    let members = (1..=n)
        .map(|i| {
            let mut prices = Vec::with_capacity(n);
            for step in 1..=i {
                // The top step is M up to rounding; clamp the drift.
                prices.push((bounds.lower() + step as f64 * delta).min(bounds.upper()));
            }
            prices.resize(n, bounds.lower());
            PriceSequence::new(prices, bounds)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StaircaseFamily {
        n,
        bounds,
        delta,
        members,
    })
}

/// A staircase member on which no policy in the checked list plays
/// optimally.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PigeonholeWitness {
    /// 1-based index of the uncovered member.
    pub index: usize,
    pub opt_profit: f64,
    /// Best profit any checked policy reaches on the witness member.
    pub best_policy_profit: f64,
}

/// Searches the family for a member where none of the given policies matches
/// the offline optimum. With fewer policies than members a witness always
/// exists; if every member is covered the premise was violated and that is
/// reported as [`Error::NoWitness`], never silently ignored.
pub fn pigeonhole_check(
    family: &StaircaseFamily,
    policies: &[DecisionPolicy],
) -> Result<PigeonholeWitness, Error> {
    for (idx0, member) in family.members().iter().enumerate() {
        let opt = optimal_offline(member);
        let mut best = f64::NEG_INFINITY;
        let mut covered = false;
        for policy in policies {
            let outcome = run_policy(policy, member);
            best = best.max(outcome.profit);
            if outcome.profit == opt.profit {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(PigeonholeWitness {
                index: idx0 + 1,
                opt_profit: opt.profit,
                best_policy_profit: best,
            });
        }
    }
    Err(Error::NoWitness {
        policies: policies.len(),
        n: family.n(),
    })
}

/// The canonical stopping rules on an `n`-day horizon: trade unconditionally
/// on day `1..=n`, plus the rule that never volunteers a trade. On a
/// staircase these are exactly the distinct behaviors that matter, since a
/// deterministic policy's first acceptance day on the shared rising prefix
/// determines the unique member it can be optimal for.
pub fn canonical_stopping_rules(n: usize) -> Vec<DecisionPolicy> {
    let mut rules: Vec<DecisionPolicy> = (1..=n).map(fixed_day).collect();
    rules.push(never_trades());
    rules
}

/// Result of sweeping every size-`(n-1)` subset of the canonical stopping
/// rules over the staircase: each one must leave a witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PigeonholeSweep {
    pub n: usize,
    /// Number of policy families checked, `C(n+1, n-1)`.
    pub families_checked: usize,
}

/// Exhaustively verifies the pigeonhole argument at horizon `n`: every
/// family of `n - 1` canonical stopping rules leaves some member uncovered.
/// Fails with [`Error::NoWitness`] if any family covers all members.
pub fn pigeonhole_sweep(n: usize, bounds: MarketBounds) -> Result<PigeonholeSweep, Error> {
    let family = build_staircase(n, bounds)?;
    let rules = canonical_stopping_rules(n);
    let mut families_checked = 0usize;
    // Choosing n-1 of the n+1 rules = dropping two of them.
    for skip_a in 0..rules.len() {
        for skip_b in skip_a + 1..rules.len() {
            let subset: Vec<DecisionPolicy> = rules
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip_a && *i != skip_b)
                .map(|(_, p)| p.clone())
                .collect();
            pigeonhole_check(&family, &subset)?;
            families_checked += 1;
        }
    }
    Ok(PigeonholeSweep {
        n,
        families_checked,
    })
}

/// Which branch the adaptive adversary ended in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryCase {
    /// Rung `i` (1-based) drew no acceptance from any policy; the tail was
    /// padded with the floor price.
    AllRejectedAt(usize),
    /// Every rung was accepted by some policy, so the closing request is the
    /// ceiling price.
    AllAcceptedThenMax,
}

/// The instance an adaptive adversary constructed, together with the ratio
/// it forces against the best policy in the set it played against.
#[derive(Clone, Debug)]
pub struct AdversaryTranscript {
    pub sequence: PriceSequence,
    pub case_taken: AdversaryCase,
    /// `opt.profit / best_policy_profit`.
    pub forced_ratio: f64,
    pub best_policy_profit: f64,
    pub opt: TradeOutcome,
    pub num_policies: usize,
}

/// Plays the geometric request ladder of the `b`-bit threshold family
/// against the given `2^b` policies and returns the transcript.
///
/// Requests are committed one at a time before the next acceptance is
/// observed. If some rung is rejected by every policy, the remaining days
/// are filled with the floor price (the sequence length is then exactly
/// `n_budget`); if all rungs are accepted, the ceiling price closes the
/// game. Either way the best policy is held to one ladder slice below the
/// optimum, so the forced ratio is at least `(M/m)^(1/(2^b+1))`.
pub fn adaptive_lower_bound(
    b: u32,
    n_budget: usize,
    bounds: MarketBounds,
    policies: &[DecisionPolicy],
) -> Result<AdversaryTranscript, Error> {
    if b > MAX_ADVICE_BITS {
        return Err(Error::BitBudgetTooLarge {
            b,
            cap: MAX_ADVICE_BITS,
        });
    }
    let expected = 1usize << b;
    if policies.len() != expected {
        return Err(Error::PolicyCountMismatch {
            expected,
            got: policies.len(),
        });
    }
    let ladder = threshold_family(b, bounds)?;
    adaptive_lower_bound_with_requests(ladder.thresholds(), n_budget, bounds, policies)
}

/// The same adaptive game on an explicit request ladder. One request per
/// policy is required; the budget must leave room for the closing request.
///
/// This entry point exists for experiments and negative controls (e.g. a
/// deliberately perturbed ladder must make certification fail).
pub fn adaptive_lower_bound_with_requests(
    requests: &[f64],
    n_budget: usize,
    bounds: MarketBounds,
    policies: &[DecisionPolicy],
) -> Result<AdversaryTranscript, Error> {
    if policies.len() != requests.len() {
        return Err(Error::PolicyCountMismatch {
            expected: requests.len(),
            got: policies.len(),
        });
    }
    if n_budget < requests.len() + 1 {
        return Err(Error::BudgetTooSmall {
            n_budget,
            needed: requests.len() + 1,
        });
    }
    for (idx, &request) in requests.iter().enumerate() {
        if !bounds.contains(request) {
            return Err(Error::PriceOutOfRange {
                day: idx + 1,
                price: request,
                lower: bounds.lower(),
                upper: bounds.upper(),
            });
        }
    }

    let mut prices: Vec<f64> = Vec::with_capacity(n_budget);
    let mut traded = vec![false; policies.len()];
    let mut case_taken = AdversaryCase::AllAcceptedThenMax;
    for (round0, &request) in requests.iter().enumerate() {
        prices.push(request);
        let mut any_new_acceptance = false;
        for (pi, policy) in policies.iter().enumerate() {
            if traded[pi] {
                continue;
            }
            if policy.decide(&prices) == Decision::Trade {
                traded[pi] = true;
                any_new_acceptance = true;
            }
        }
        if !any_new_acceptance {
            case_taken = AdversaryCase::AllRejectedAt(round0 + 1);
            break;
        }
    }
    match case_taken {
        AdversaryCase::AllRejectedAt(_) => prices.resize(n_budget, bounds.lower()),
        AdversaryCase::AllAcceptedThenMax => prices.push(bounds.upper()),
    }
    let sequence = PriceSequence::new(prices, bounds)?;

    // Replay every policy on the finished instance; nothing is assumed.
    // Policies that accepted a rung hold it, waiters are forced to the end.
    let best_policy_profit = policies
        .iter()
        .map(|policy| run_policy(policy, &sequence).profit)
        .fold(f64::NEG_INFINITY, f64::max);
    let opt = optimal_offline(&sequence);

    Ok(AdversaryTranscript {
        forced_ratio: opt.profit / best_policy_profit,
        best_policy_profit,
        opt,
        num_policies: policies.len(),
        sequence,
        case_taken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::make_rpp;

    fn bounds(m: f64, cap: f64) -> MarketBounds {
        MarketBounds::new(m, cap).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn staircase_four_member_example() {
        let fam = build_staircase(4, bounds(4.0, 8.0)).unwrap();
        assert_eq!(fam.delta(), 1.0);
        assert_eq!(fam.member(2).prices(), &[5.0, 6.0, 4.0, 4.0]);
        let opt = optimal_offline(fam.member(2));
        assert_eq!((opt.day, opt.profit), (2, 6.0));
    }

    #[test]
    fn staircase_single_day() {
        let fam = build_staircase(1, bounds(1.0, 2.0)).unwrap();
        assert_eq!(fam.member(1).prices(), &[2.0]);
        assert_eq!(optimal_offline(fam.member(1)).profit, 2.0);
    }

    #[test]
    fn staircase_members_share_prefixes() {
        let fam = build_staircase(4, bounds(4.0, 8.0)).unwrap();
        for i in 1..=4usize {
            for j in i..=4usize {
                let shared = i.min(j);
                assert_eq!(
                    &fam.member(i).prices()[..shared],
                    &fam.member(j).prices()[..shared]
                );
            }
        }
    }

    #[test]
    fn staircase_optimal_day_is_the_member_index() {
        for n in [1usize, 3, 7, 16] {
            let fam = build_staircase(n, bounds(2.0, 11.0)).unwrap();
            for i in 1..=n {
                let opt = optimal_offline(fam.member(i));
                assert_eq!(opt.day, i);
                // The peak is unique: no other day carries the same price.
                let peak = opt.profit;
                let dups = fam
                    .member(i)
                    .prices()
                    .iter()
                    .filter(|&&p| p == peak)
                    .count();
                assert_eq!(dups, 1);
            }
        }
    }

    #[test]
    fn staircase_rejects_degenerate_corridor() {
        assert_eq!(
            build_staircase(4, bounds(5.0, 5.0)).unwrap_err(),
            Error::DegenerateBounds(5.0)
        );
    }

    #[test]
    fn pigeonhole_finds_the_uncovered_member() {
        let fam = build_staircase(4, bounds(4.0, 8.0)).unwrap();
        let policies = vec![fixed_day(1), fixed_day(2), fixed_day(3)];
        let witness = pigeonhole_check(&fam, &policies).unwrap();
        assert_eq!(witness.index, 4);
        assert_eq!(witness.opt_profit, 8.0);
    }

    #[test]
    fn pigeonhole_with_never_firing_reservation_policy() {
        let fam = build_staircase(2, bounds(1.0, 3.0)).unwrap();
        // rpp(M) waits through the rising prefix; it cannot be optimal on
        // the first member, whose peak drops away immediately.
        let policies = vec![make_rpp(3.0).unwrap()];
        let witness = pigeonhole_check(&fam, &policies).unwrap();
        assert_eq!(witness.index, 1);
    }

    #[test]
    fn pigeonhole_reports_violated_premise() {
        let fam = build_staircase(4, bounds(4.0, 8.0)).unwrap();
        let covering: Vec<DecisionPolicy> = (1..=4).map(fixed_day).collect();
        assert_eq!(
            pigeonhole_check(&fam, &covering).unwrap_err(),
            Error::NoWitness { policies: 4, n: 4 }
        );
    }

    #[test]
    fn pigeonhole_sweep_covers_all_subsets() {
        let sweep = pigeonhole_sweep(4, bounds(4.0, 8.0)).unwrap();
        assert_eq!(sweep.families_checked, 10); // C(5, 2)
    }

    #[test]
    fn adaptive_all_accepted_case_against_the_advice_ladder() {
        let b = bounds(1.0, 8.0);
        let fam = threshold_family(1, b).unwrap();
        let transcript = adaptive_lower_bound(1, 3, b, &fam.policies()).unwrap();
        assert_eq!(transcript.case_taken, AdversaryCase::AllAcceptedThenMax);
        assert_eq!(transcript.sequence.n(), 3);
        assert!(rel_close(transcript.best_policy_profit, 4.0, 1e-9));
        assert!(rel_close(transcript.opt.profit, 8.0, 1e-9));
        assert!(rel_close(transcript.forced_ratio, 2.0, 1e-9));
    }

    #[test]
    fn adaptive_first_rung_rejected_case() {
        let b = bounds(1.0, 100.0);
        let policies = vec![make_rpp(50.0).unwrap()];
        let transcript = adaptive_lower_bound(0, 2, b, &policies).unwrap();
        assert_eq!(transcript.case_taken, AdversaryCase::AllRejectedAt(1));
        assert_eq!(transcript.sequence.n(), 2);
        // The lone rung sqrt(100) = 10 was rejected; the policy sinks to m.
        assert!(rel_close(transcript.best_policy_profit, 1.0, 1e-9));
        assert!(rel_close(transcript.opt.profit, 10.0, 1e-9));
        assert!(rel_close(transcript.forced_ratio, 10.0, 1e-9));
    }

    #[test]
    fn adaptive_rejected_rung_pads_with_floor() {
        let b = bounds(1.0, 8.0);
        let policies = vec![make_rpp(5.0).unwrap(), make_rpp(6.0).unwrap()];
        let transcript = adaptive_lower_bound(1, 3, b, &policies).unwrap();
        assert_eq!(transcript.case_taken, AdversaryCase::AllRejectedAt(1));
        assert!(rel_close(transcript.sequence.prices()[0], 2.0, 1e-9));
        assert_eq!(transcript.sequence.prices()[1..], [1.0, 1.0]);
        assert!(rel_close(transcript.forced_ratio, 2.0, 1e-9));
    }

    #[test]
    fn adaptive_needs_room_for_the_closing_request() {
        let b = bounds(1.0, 8.0);
        let fam = threshold_family(1, b).unwrap();
        assert_eq!(
            adaptive_lower_bound(1, 2, b, &fam.policies()).unwrap_err(),
            Error::BudgetTooSmall {
                n_budget: 2,
                needed: 3
            }
        );
    }

    #[test]
    fn adaptive_validates_policy_count() {
        let b = bounds(1.0, 8.0);
        let policies = vec![make_rpp(2.0).unwrap()];
        assert_eq!(
            adaptive_lower_bound(1, 3, b, &policies).unwrap_err(),
            Error::PolicyCountMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn adaptive_meets_the_closed_form_on_its_own_family() {
        let b = bounds(1.0, 100.0);
        for bits in 0..=6u32 {
            let fam = threshold_family(bits, b).unwrap();
            let budget = (1usize << bits) + 1;
            let transcript = adaptive_lower_bound(bits, budget, b, &fam.policies()).unwrap();
            let closed = fam.slice_ratio();
            assert!(
                rel_close(transcript.forced_ratio, closed, 1e-9),
                "b={bits}: {} vs {}",
                transcript.forced_ratio,
                closed
            );
        }
    }

    #[test]
    fn adaptive_forces_the_bound_against_arbitrary_policies() {
        // A mix of early stoppers, late stoppers, and a waiter.
        let b = bounds(1.0, 16.0);
        let policies = vec![
            fixed_day(1),
            make_rpp(15.9).unwrap(),
            never_trades(),
            make_rpp(1.2).unwrap(),
        ];
        let transcript = adaptive_lower_bound(2, 8, b, &policies).unwrap();
        let closed = 16f64.powf(1.0 / 5.0);
        assert!(transcript.forced_ratio >= closed - 1e-9);
    }
}
