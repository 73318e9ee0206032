//! Brute-force optima over all pairings for small instances.

use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::fixed::{extra_total_fixed, total_fixed};
use crate::problem::{check_power, IndividualBudgets, PowerConstraint};
use crate::rate::{Allocation, PairingMatrix};
use crate::solver_individual::{refine_with_options, zero_crossing_refine, PairOption};

pub const TOTAL_LIMIT: usize = 8;
pub const EXTRA_TOTAL_LIMIT: usize = 6;
pub const INDIVIDUAL_LIMIT: usize = 6;
pub const EXTRA_INDIVIDUAL_LIMIT: usize = 4;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub rate: f64,
    pub pairing: PairingMatrix,
    pub allocation: Allocation,
    /// Relay indicators of the best solution, for the extra-transmission searches.
    pub relay_indicator: Option<Vec<bool>>,
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..m).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn check_size(m: usize, limit: usize) -> Result<()> {
    if m > limit {
        Err(Error::SizeLimit { m, limit })
    } else {
        Ok(())
    }
}

/// Evaluates `f` on every permutation and keeps the best; ties go to the
/// lexicographically first permutation, so the result does not depend on
/// evaluation order.
fn search<F>(m: usize, f: F) -> Result<OracleResult>
where
    F: Fn(PairingMatrix) -> Result<OracleResult> + Sync,
{
    let perms = permutations(m);
    let results: Vec<OracleResult> = perms
        .into_par_iter()
        .map(|p| f(PairingMatrix::new(p).expect("generated permutation")))
        .collect::<Result<_>>()?;
    let mut best: Option<OracleResult> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.rate > b.rate) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one permutation"))
}

/// Largest M the optimum for `constraint` is searched on.
pub fn size_limit(constraint: &PowerConstraint, extra_direct: bool) -> usize {
    match (constraint, extra_direct) {
        (PowerConstraint::Total(_), false) => TOTAL_LIMIT,
        (PowerConstraint::Total(_), true) => EXTRA_TOTAL_LIMIT,
        (PowerConstraint::Individual(_), false) => INDIVIDUAL_LIMIT,
        (PowerConstraint::Individual(_), true) => EXTRA_INDIVIDUAL_LIMIT,
    }
}

/// Dispatches to the exhaustive search matching `constraint`.
pub fn optimum(real: &ChannelRealization, constraint: &PowerConstraint, extra_direct: bool) -> Result<OracleResult> {
    match (constraint, extra_direct) {
        (PowerConstraint::Total(p), false) => exhaustive_total(real, *p),
        (PowerConstraint::Total(p), true) => exhaustive_extra_total(real, *p),
        (PowerConstraint::Individual(b), false) => exhaustive_individual(real, b),
        (PowerConstraint::Individual(b), true) => reference_extra_individual(real, b),
    }
}

/// Relay indicator vectors allowed for `pairing`: pairs with `a_sr <= a_sd`
/// never relay.
fn indicator_vectors(real: &ChannelRealization) -> Vec<Vec<bool>> {
    let capable: Vec<usize> = (0..real.m()).filter(|&k| real.a_sr[k] > real.a_sd[k]).collect();
    (0..1usize << capable.len())
        .map(|bits| {
            let mut s = vec![false; real.m()];
            for (j, &k) in capable.iter().enumerate() {
                s[k] = bits >> j & 1 == 1;
            }
            s
        })
        .collect()
}

pub fn exhaustive_total(real: &ChannelRealization, power: f64) -> Result<OracleResult> {
    real.validate()?;
    check_power(power)?;
    check_size(real.m(), TOTAL_LIMIT)?;
    search(real.m(), |pairing| {
        let (rate, allocation) = total_fixed(real, &pairing, power)?;
        Ok(OracleResult { rate, pairing, allocation, relay_indicator: None })
    })
}

pub fn exhaustive_extra_total(real: &ChannelRealization, power: f64) -> Result<OracleResult> {
    real.validate()?;
    check_power(power)?;
    check_size(real.m(), EXTRA_TOTAL_LIMIT)?;
    let vectors = indicator_vectors(real);
    search(real.m(), |pairing| {
        let mut best: Option<OracleResult> = None;
        for s in &vectors {
            let (rate, allocation, _) = extra_total_fixed(real, &pairing, s, power)?;
            if best.as_ref().is_none_or(|b| rate > b.rate) {
                best = Some(OracleResult {
                    rate,
                    pairing: pairing.clone(),
                    allocation,
                    relay_indicator: Some(s.clone()),
                });
            }
        }
        Ok(best.expect("at least the all-direct vector"))
    })
}

pub fn exhaustive_individual(real: &ChannelRealization, budgets: &IndividualBudgets) -> Result<OracleResult> {
    real.validate()?;
    budgets.validate()?;
    check_size(real.m(), INDIVIDUAL_LIMIT)?;
    search(real.m(), |pairing| {
        let out = zero_crossing_refine(real, &pairing, budgets)?;
        Ok(OracleResult {
            rate: out.rate,
            pairing,
            allocation: out.allocation,
            relay_indicator: None,
        })
    })
}

/// Reference optimum with individual budgets and extra transmission: every
/// pairing and every relay indicator vector, each solved exactly.
pub fn reference_extra_individual(real: &ChannelRealization, budgets: &IndividualBudgets) -> Result<OracleResult> {
    real.validate()?;
    budgets.validate()?;
    check_size(real.m(), EXTRA_INDIVIDUAL_LIMIT)?;
    let vectors = indicator_vectors(real);
    search(real.m(), |pairing| {
        let mut best: Option<OracleResult> = None;
        for s in &vectors {
            let opts: Vec<PairOption> = pairing
                .pairs()
                .map(|(k, m)| PairOption {
                    relay_capable: s[k] && real.a_rd[m] > 0.0,
                    extra_slot: !s[k],
                })
                .collect();
            let out = refine_with_options(real, &pairing, &opts, budgets, true)?;
            if best.as_ref().is_none_or(|b| out.rate > b.rate) {
                best = Some(OracleResult {
                    rate: out.rate,
                    pairing: pairing.clone(),
                    allocation: out.allocation,
                    relay_indicator: Some(s.clone()),
                });
            }
        }
        Ok(best.expect("at least the all-direct vector"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, RicianConfig};
    use crate::problem::PowerConstraint;
    use crate::validate::validate_allocation;
    use crate::waterfill::{waterfill, WaterfillProblem};
    use approx::assert_relative_eq;

    #[test]
    fn permutation_count_and_order() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn single_pair_closed_form() {
        let real = ChannelRealization::new(vec![1.0], vec![3.0], vec![3.0], vec![1.0]).unwrap();
        let o = exhaustive_total(&real, 5.0).unwrap();
        assert_relative_eq!(o.rate, 0.5 * 10f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn symmetric_pairings_tie() {
        let real = ChannelRealization::new(vec![0.5; 2], vec![2.0; 2], vec![3.0; 2], vec![1.0; 2]).unwrap();
        let a = total_fixed(&real, &PairingMatrix::identity(2), 5.0).unwrap().0;
        let b = total_fixed(&real, &PairingMatrix::new(vec![1, 0]).unwrap(), 5.0).unwrap().0;
        assert_relative_eq!(a, b, epsilon = 1e-14);
        assert_eq!(exhaustive_total(&real, 5.0).unwrap().pairing.as_slice(), &[0, 1]);
    }

    #[test]
    fn size_limits() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 9);
        let real = sample_realization(&cfg, 0).unwrap();
        assert!(matches!(exhaustive_total(&real, 5.0), Err(Error::SizeLimit { m: 9, limit: 8 })));
        let b = IndividualBudgets::new(4.0, 1.0).unwrap();
        assert!(matches!(exhaustive_individual(&real, &b), Err(Error::SizeLimit { .. })));
        assert!(matches!(exhaustive_extra_total(&real, 5.0), Err(Error::SizeLimit { .. })));
        assert!(matches!(reference_extra_individual(&real, &b), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn extra_with_no_relay_advantage_is_two_slot_waterfill() {
        let real = ChannelRealization::new(vec![2.0, 1.0, 3.0], vec![1.0, 0.5, 2.0], vec![4.0; 3], vec![1.0; 3]).unwrap();
        let o = exhaustive_extra_total(&real, 5.0).unwrap();
        let g: Vec<f64> = real.a_sd.iter().chain(&real.a_sd).copied().collect();
        let prob = WaterfillProblem::new(g, vec![1.0; 6], 5.0);
        assert_relative_eq!(o.rate, prob.utility(&waterfill(&prob).unwrap().powers), epsilon = 1e-12);
    }

    #[test]
    fn oracle_orderings() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 4);
        let b = IndividualBudgets::new(4.0, 1.0).unwrap();
        for seed in 0..10 {
            let real = sample_realization(&cfg, seed).unwrap();
            let t = exhaustive_total(&real, 5.0).unwrap();
            let et = exhaustive_extra_total(&real, 5.0).unwrap();
            let i = exhaustive_individual(&real, &b).unwrap();
            let ei = reference_extra_individual(&real, &b).unwrap();
            assert!(et.rate >= t.rate - 1e-12);
            assert!(t.rate >= i.rate - 1e-12);
            assert!(ei.rate >= i.rate - 1e-12);
            validate_allocation(&real, &t.allocation, &PowerConstraint::Total(5.0), false).unwrap();
            validate_allocation(&real, &et.allocation, &PowerConstraint::Total(5.0), true).unwrap();
            validate_allocation(&real, &i.allocation, &PowerConstraint::Individual(b), false).unwrap();
            validate_allocation(&real, &ei.allocation, &PowerConstraint::Individual(b), true).unwrap();
        }
    }

    #[test]
    fn individual_matches_total_at_its_own_split() {
        // budgets equal to the source/relay use of the total optimum leave the
        // total optimum feasible, and nothing better is feasible
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 4);
        for seed in 0..10 {
            let real = sample_realization(&cfg, seed).unwrap();
            let t = exhaustive_total(&real, 5.0).unwrap();
            let b = IndividualBudgets::new(t.allocation.source_power(), t.allocation.relay_power()).unwrap();
            let i = exhaustive_individual(&real, &b).unwrap();
            assert_relative_eq!(i.rate, t.rate, max_relative = 1e-9);
        }
    }

    #[test]
    fn zero_relay_budget_is_direct_only() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 4);
        let real = sample_realization(&cfg, 2).unwrap();
        let o = exhaustive_individual(&real, &IndividualBudgets::new(4.0, 0.0).unwrap()).unwrap();
        let prob = WaterfillProblem::new(real.a_sd.clone(), real.w.clone(), 4.0);
        assert_relative_eq!(o.rate, prob.utility(&waterfill(&prob).unwrap().powers), epsilon = 1e-12);
    }
}
