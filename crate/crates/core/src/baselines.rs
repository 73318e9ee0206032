//! Reference pairings: sorted channel pairing and the fixed identity
//! pairing, each finished with the same per-pairing allocation as the
//! solvers.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelRealization;
use crate::dual::SolveReport;
use crate::error::{Error, Result};
use crate::fixed::{extra_total_fixed, total_fixed};
use crate::problem::PowerConstraint;
use crate::rate::PairingMatrix;
use crate::solver_extra::extra_individual_fixed;
use crate::solver_individual::zero_crossing_refine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    /// Sorted pairing on `w_k a_sr_k` against `a_rd_m`.
    ScpWeighted,
    /// Sorted pairing on `a_sr_k` against `a_rd_m`.
    ScpUnweighted,
    /// `k -> k`.
    FixedIdentity,
}

impl BaselineKind {
    pub fn pairing(self, real: &ChannelRealization) -> PairingMatrix {
        match self {
            BaselineKind::ScpWeighted => scp_pairing(real, true),
            BaselineKind::ScpUnweighted => scp_pairing(real, false),
            BaselineKind::FixedIdentity => PairingMatrix::identity(real.m()),
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::ScpWeighted => "scp",
            BaselineKind::ScpUnweighted => "scp-unweighted",
            BaselineKind::FixedIdentity => "fixed",
        })
    }
}

impl FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scp" => Ok(BaselineKind::ScpWeighted),
            "scp-unweighted" => Ok(BaselineKind::ScpUnweighted),
            "fixed" => Ok(BaselineKind::FixedIdentity),
            _ => Err(Error::Config(format!("unknown baseline '{s}'"))),
        }
    }
}

/// Indices sorted by descending key; equal keys keep index order.
fn rank_desc(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    idx
}

/// Pairs the i-th strongest SR subcarrier with the i-th strongest RD one.
/// RD gains are never weighted.
pub fn scp_pairing(real: &ChannelRealization, weighted: bool) -> PairingMatrix {
    let sr_keys: Vec<f64> = if weighted {
        real.a_sr.iter().zip(&real.w).map(|(a, w)| a * w).collect()
    } else {
        real.a_sr.clone()
    };
    let sr = rank_desc(&sr_keys);
    let rd = rank_desc(&real.a_rd);
    let mut perm = vec![0; real.m()];
    for (k, m) in sr.into_iter().zip(rd) {
        perm[k] = m;
    }
    PairingMatrix::new(perm).expect("rank matching is a permutation")
}

/// Mode selection and power allocation on a given pairing.
pub fn evaluate_baseline(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    constraint: &PowerConstraint,
    extra_direct: bool,
) -> Result<SolveReport> {
    constraint.validate()?;
    if pairing.m() != real.m() {
        return Err(Error::Validation(format!(
            "pairing has {} entries, realization {} subcarriers",
            pairing.m(),
            real.m()
        )));
    }
    let mut notes = Vec::new();
    let (rate, allocation) = match (*constraint, extra_direct) {
        (PowerConstraint::Total(p), false) => total_fixed(real, pairing, p)?,
        (PowerConstraint::Total(p), true) => {
            let s: Vec<bool> = pairing.pairs().map(|(k, m)| real.relay_beneficial(k, m)).collect();
            let (r, a, _) = extra_total_fixed(real, pairing, &s, p)?;
            (r, a)
        }
        (PowerConstraint::Individual(b), false) => {
            let out = zero_crossing_refine(real, pairing, &b)?;
            (out.rate, out.allocation)
        }
        (PowerConstraint::Individual(b), true) => {
            let s: Vec<bool> = pairing.pairs().map(|(k, m)| real.relay_beneficial(k, m)).collect();
            let out = extra_individual_fixed(real, pairing, s, &b, &mut notes)?;
            (out.rate, out.allocation)
        }
    };
    Ok(SolveReport {
        pairing: pairing.clone(),
        allocation,
        primal_rate: rate,
        dual_value: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
        trigger_iter: None,
        converged: true,
        trace: Vec::new(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, RicianConfig, WeightRule};
    use crate::problem::IndividualBudgets;
    use crate::validate::validate_allocation;

    fn real(a_sr: Vec<f64>, a_rd: Vec<f64>, w: Vec<f64>) -> ChannelRealization {
        let m = a_sr.len();
        ChannelRealization::new(vec![0.1; m], a_sr, a_rd, w).unwrap()
    }

    #[test]
    fn scp_examples() {
        let r = real(vec![2.0, 5.0], vec![1.0, 4.0], vec![1.0, 1.0]);
        assert_eq!(scp_pairing(&r, true).as_slice(), &[0, 1]);
        let r = real(vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], vec![1.0; 3]);
        assert_eq!(scp_pairing(&r, false).as_slice(), &[2, 1, 0]);
        let r = real(vec![1.0; 4], vec![2.0; 4], vec![1.0; 4]);
        assert_eq!(scp_pairing(&r, true).as_slice(), &[0, 1, 2, 3]);
    }

    #[test]
    fn weights_change_sr_order_only() {
        // weight 3 lifts subcarrier 1 above subcarrier 2 on the SR side
        let r = real(vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 1.0]);
        assert_eq!(scp_pairing(&r, false).as_slice(), &[0, 1]);
        assert_eq!(scp_pairing(&r, true).as_slice(), &[1, 0]);
    }

    #[test]
    fn weighted_equals_unweighted_with_unit_weights() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 16);
        for seed in 0..20 {
            let r = sample_realization(&cfg, seed).unwrap();
            assert_eq!(scp_pairing(&r, true), scp_pairing(&r, false));
        }
    }

    #[test]
    fn baselines_feasible_in_all_scenarios() {
        let mut cfg = RicianConfig::new(3.0, 1.0, 3.0, 6);
        cfg.weight_rule = WeightRule::LinearRamp;
        let constraints = [
            PowerConstraint::Total(5.0),
            PowerConstraint::Individual(IndividualBudgets::new(4.0, 1.0).unwrap()),
        ];
        for seed in 0..10 {
            let r = sample_realization(&cfg, seed).unwrap();
            for kind in [BaselineKind::ScpWeighted, BaselineKind::ScpUnweighted, BaselineKind::FixedIdentity] {
                for c in &constraints {
                    for extra in [false, true] {
                        let rep = evaluate_baseline(&r, &kind.pairing(&r), c, extra).unwrap();
                        validate_allocation(&r, &rep.allocation, c, extra).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for k in [BaselineKind::ScpWeighted, BaselineKind::ScpUnweighted, BaselineKind::FixedIdentity] {
            assert_eq!(k.to_string().parse::<BaselineKind>().unwrap(), k);
        }
        assert!("hungarian".parse::<BaselineKind>().is_err());
    }
}
