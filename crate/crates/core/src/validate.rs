//! Feasibility checks shared by every solver, baseline and oracle output.

use crate::channel::{ChannelRealization, PairMode};
use crate::error::{Error, Result};
use crate::problem::PowerConstraint;
use crate::rate::{Allocation, PairingMatrix};

/// Absolute slack on budgets and the relative slack on the
/// equal-information identity.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn validate_allocation(
    real: &ChannelRealization,
    alloc: &Allocation,
    constraint: &PowerConstraint,
    extra_allowed: bool,
) -> Result<()> {
    let m = real.m();
    let fail = |msg: String| Err(Error::Validation(msg));
    if alloc.m() != m || alloc.modes.len() != m || alloc.p_s.len() != m || alloc.p_r.len() != m || alloc.q_s.len() != m {
        return fail(format!("allocation vectors do not match M = {m}"));
    }
    // re-check the permutation in case the struct was built by hand
    PairingMatrix::new(alloc.pairing.as_slice().to_vec())?;

    for (k, mm) in alloc.pairing.pairs() {
        let (ps, pr, q) = (alloc.p_s[k], alloc.p_r[k], alloc.q_s[k]);
        if ![ps, pr, q].iter().all(|x| x.is_finite() && *x >= 0.0) {
            return fail(format!("pair {}: powers ({ps}, {pr}, {q}) must be finite and >= 0", k + 1));
        }
        match alloc.modes[k] {
            PairMode::DirectLink => {
                if pr != 0.0 {
                    return fail(format!("pair {}: direct-link pair has relay power {pr}", k + 1));
                }
                if q != 0.0 && !extra_allowed {
                    return fail(format!("pair {}: extra second-slot power without permission", k + 1));
                }
            }
            mode => {
                if q != 0.0 {
                    return fail(format!("pair {}: relaying pair carries extra power {q}", k + 1));
                }
                if real.a_sr[k] <= real.a_sd[k] {
                    return fail(format!("pair {}: relay used although a_sr <= a_sd", k + 1));
                }
                let at_relay = real.a_sr[k] * ps;
                let at_dest = real.a_sd[k] * ps + real.a_rd[mm] * pr;
                let tol = FEASIBILITY_TOL * at_relay.abs().max(at_dest.abs()).max(1.0);
                match mode {
                    PairMode::Relay => {
                        if (at_relay - at_dest).abs() > tol {
                            return fail(format!(
                                "pair {}: relay pair violates equal information ({at_relay} vs {at_dest})",
                                k + 1
                            ));
                        }
                        if (ps > 0.0) != (pr > 0.0) {
                            return fail(format!("pair {}: relay powers must be zero or positive together", k + 1));
                        }
                    }
                    _ => {
                        if at_relay + tol < at_dest {
                            return fail(format!("pair {}: intermediate pair: relay receives less than destination", k + 1));
                        }
                    }
                }
            }
        }
    }

    let src = alloc.source_power();
    let rly = alloc.relay_power();
    match *constraint {
        PowerConstraint::Total(p) => {
            if src + rly > p + FEASIBILITY_TOL {
                return fail(format!("total power {} exceeds budget {p}", src + rly));
            }
        }
        PowerConstraint::Individual(b) => {
            if src > b.source + FEASIBILITY_TOL {
                return fail(format!("source power {src} exceeds budget {}", b.source));
            }
            if rly > b.relay + FEASIBILITY_TOL {
                return fail(format!("relay power {rly} exceeds budget {}", b.relay));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::IndividualBudgets;

    fn real() -> ChannelRealization {
        ChannelRealization::new(vec![1.0, 1.0], vec![3.0, 0.5], vec![3.0, 3.0], vec![1.0, 1.0]).unwrap()
    }

    fn relay_alloc() -> Allocation {
        let mut a = Allocation::zero(PairingMatrix::identity(2));
        a.modes[0] = PairMode::Relay;
        a.p_s = vec![0.6, 2.0];
        a.p_r = vec![0.4, 0.0];
        a
    }

    #[test]
    fn accepts_feasible() {
        validate_allocation(&real(), &relay_alloc(), &PowerConstraint::Total(3.0), false).unwrap();
        let b = PowerConstraint::Individual(IndividualBudgets::new(2.6, 0.4).unwrap());
        validate_allocation(&real(), &relay_alloc(), &b, false).unwrap();
    }

    #[test]
    fn rejects_budget_overrun() {
        assert!(validate_allocation(&real(), &relay_alloc(), &PowerConstraint::Total(2.9), false).is_err());
        let b = PowerConstraint::Individual(IndividualBudgets::new(2.6, 0.3).unwrap());
        assert!(validate_allocation(&real(), &relay_alloc(), &b, false).is_err());
    }

    #[test]
    fn rejects_unbalanced_relay() {
        let mut a = relay_alloc();
        a.p_r[0] = 0.5;
        assert!(validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), false).is_err());
        // the same powers are fine for an intermediate pair only if the relay
        // still hears at least as much: 1.8 < 0.6 + 1.5, so no
        a.modes[0] = PairMode::Intermediate;
        assert!(validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), false).is_err());
        a.p_r[0] = 0.2;
        validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), false).unwrap();
    }

    #[test]
    fn rejects_misplaced_extra_power() {
        let mut a = relay_alloc();
        a.q_s[1] = 0.5;
        assert!(validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), false).is_err());
        validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), true).unwrap();
        a.q_s[0] = 0.1;
        assert!(validate_allocation(&real(), &a, &PowerConstraint::Total(9.0), true).is_err());
    }

    #[test]
    fn rejects_relay_on_weak_sr_link() {
        let mut a = Allocation::zero(PairingMatrix::identity(2));
        a.modes[1] = PairMode::Relay;
        assert!(validate_allocation(&real(), &a, &PowerConstraint::Total(1.0), false).is_err());
    }
}
