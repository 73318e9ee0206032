//! Achievable weighted rates of subcarrier pairs and full allocations.
//!
//! Rates are in nats per two-slot use; [`to_bits`] converts for display.

use std::fmt;

use crate::channel::{ChannelRealization, PairMode};
use crate::error::{Error, Result};

/// A permutation mapping each first-slot subcarrier `k` to its second-slot
/// partner `perm[k]` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairingMatrix {
    perm: Vec<usize>,
}

impl PairingMatrix {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let m = perm.len();
        let mut seen = vec![false; m];
        for (k, &j) in perm.iter().enumerate() {
            if j >= m || seen[j] {
                return Err(Error::Validation(format!(
                    "pairing is not a permutation: row {k} maps to column {j}"
                )));
            }
            seen[j] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(m: usize) -> Self {
        Self { perm: (0..m).collect() }
    }

    pub fn m(&self) -> usize {
        self.perm.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn partner(&self, k: usize) -> usize {
        self.perm[k]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.perm.iter().copied().enumerate()
    }
}

impl fmt::Display for PairingMatrix {
    /// 1-based `k->m` list, e.g. `1->2 2->1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.pairs() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}->{}", k + 1, m + 1)?;
        }
        Ok(())
    }
}

/// A primal solution: pairing, per-pair modes and powers, all indexed by
/// the first-slot subcarrier `k`.
///
/// `q_s[k]` is the extra second-slot source power on subcarrier `perm[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub pairing: PairingMatrix,
    pub modes: Vec<PairMode>,
    pub p_s: Vec<f64>,
    pub p_r: Vec<f64>,
    pub q_s: Vec<f64>,
}

impl Allocation {
    /// All-direct, zero-power allocation on `pairing`.
    pub fn zero(pairing: PairingMatrix) -> Self {
        let m = pairing.m();
        Self {
            pairing,
            modes: vec![PairMode::DirectLink; m],
            p_s: vec![0.0; m],
            p_r: vec![0.0; m],
            q_s: vec![0.0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.pairing.m()
    }

    /// Source power summed over both slots.
    pub fn source_power(&self) -> f64 {
        self.p_s.iter().sum::<f64>() + self.q_s.iter().sum::<f64>()
    }

    pub fn relay_power(&self) -> f64 {
        self.p_r.iter().sum()
    }

    pub fn total_power(&self) -> f64 {
        self.source_power() + self.relay_power()
    }
}

/// `(w/2) ln(1 + a p)`.
pub fn pair_rate(w_k: f64, a_km: f64, p: f64) -> f64 {
    0.5 * w_k * (a_km * p).ln_1p()
}

/// Relay-mode rate in the min form: the relay must decode, and the
/// destination combines both slots.
pub fn pair_rate_relay_raw(w_k: f64, a_sr: f64, a_sd: f64, a_rd: f64, p_s: f64, p_r: f64) -> f64 {
    let at_relay = (a_sr * p_s).ln_1p();
    let at_dest = (a_sd * p_s + a_rd * p_r).ln_1p();
    0.5 * w_k * at_relay.min(at_dest)
}

/// Direct-link rate with an extra second-slot transmission on subcarrier `m`.
pub fn pair_rate_extra_direct(w_k: f64, w_m: f64, a_sd_k: f64, a_sd_m: f64, p: f64, q: f64) -> f64 {
    pair_rate(w_k, a_sd_k, p) + pair_rate(w_m, a_sd_m, q)
}

/// Weighted sum rate of `alloc`. Relay and intermediate pairs always go
/// through the min form.
pub fn weighted_sum_rate(real: &ChannelRealization, alloc: &Allocation, extra_allowed: bool) -> Result<f64> {
    if alloc.m() != real.m() {
        return Err(Error::Validation(format!(
            "allocation has {} pairs, realization {} subcarriers",
            alloc.m(),
            real.m()
        )));
    }
    let mut total = 0.0;
    for (k, m) in alloc.pairing.pairs() {
        let q = alloc.q_s[k];
        if q != 0.0 && !extra_allowed {
            return Err(Error::Validation(format!(
                "pair {} carries extra second-slot power {q} but extra transmission is disabled",
                k + 1
            )));
        }
        total += match alloc.modes[k] {
            PairMode::DirectLink => {
                pair_rate_extra_direct(real.w[k], real.w[m], real.a_sd[k], real.a_sd[m], alloc.p_s[k], q)
            }
            PairMode::Relay | PairMode::Intermediate => pair_rate_relay_raw(
                real.w[k],
                real.a_sr[k],
                real.a_sd[k],
                real.a_rd[m],
                alloc.p_s[k],
                alloc.p_r[k],
            ),
        };
    }
    Ok(total)
}

pub fn to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pair_rate_examples() {
        assert_eq!(pair_rate(1.0, 1.0, 0.0), 0.0);
        assert_relative_eq!(pair_rate(2.0, 1.8, 5.0), 10f64.ln(), epsilon = 1e-12);
        assert_eq!(pair_rate(0.0, 3.0, 7.0), 0.0);
    }

    #[test]
    fn relay_raw_examples() {
        // equal-information split of power 1 on (a_sr, a_sd, a_rd) = (3, 1, 3)
        let r = pair_rate_relay_raw(1.0, 3.0, 1.0, 3.0, 0.6, 0.4);
        assert_relative_eq!(r, 0.5 * 2.8f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(r, pair_rate(1.0, 1.8, 1.0), epsilon = 1e-12);
        let starved = pair_rate_relay_raw(1.0, 3.0, 1.0, 3.0, 1.0, 0.0);
        assert_relative_eq!(starved, 0.5 * 2f64.ln(), epsilon = 1e-12);
        assert_eq!(pair_rate_relay_raw(1.0, 0.0, 1.0, 3.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn extra_direct_examples() {
        assert_relative_eq!(pair_rate_extra_direct(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 2f64.ln());
        assert_eq!(pair_rate_extra_direct(1.0, 1.0, 0.3, 9.0, 2.0, 0.0), pair_rate(1.0, 0.3, 2.0));
        assert_eq!(pair_rate_extra_direct(0.0, 0.0, 1.0, 1.0, 4.0, 4.0), 0.0);
    }

    fn two_sc() -> ChannelRealization {
        ChannelRealization::new(vec![1.0, 1.0], vec![1.0, 3.0], vec![3.0, 3.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn weighted_sum_rate_examples() {
        let real = two_sc();
        let zero = Allocation::zero(PairingMatrix::identity(2));
        assert_eq!(weighted_sum_rate(&real, &zero, false).unwrap(), 0.0);

        let one = ChannelRealization::new(vec![1.0], vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let mut a = Allocation::zero(PairingMatrix::identity(1));
        a.p_s[0] = 5.0;
        assert_relative_eq!(weighted_sum_rate(&one, &a, false).unwrap(), 0.5 * 6f64.ln());

        // pair 0 direct with p = 5, pair 1 relay with the (0.6, 0.4) split
        let mut b = Allocation::zero(PairingMatrix::identity(2));
        b.p_s = vec![5.0, 0.6];
        b.p_r = vec![0.0, 0.4];
        b.modes[1] = PairMode::Relay;
        let expect = 0.5 * 6f64.ln() + 0.5 * 2.8f64.ln();
        assert_relative_eq!(weighted_sum_rate(&real, &b, false).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn extra_power_rejected_when_disabled() {
        let real = two_sc();
        let mut a = Allocation::zero(PairingMatrix::identity(2));
        a.q_s[0] = 1.0;
        assert!(matches!(weighted_sum_rate(&real, &a, false), Err(Error::Validation(_))));
        assert_relative_eq!(weighted_sum_rate(&real, &a, true).unwrap(), 0.5 * 2f64.ln());
    }

    #[test]
    fn pairing_must_be_permutation() {
        assert!(PairingMatrix::new(vec![1, 0, 2]).is_ok());
        assert!(PairingMatrix::new(vec![1, 1, 2]).is_err());
        assert!(PairingMatrix::new(vec![0, 3]).is_err());
        assert_eq!(PairingMatrix::new(vec![1, 0]).unwrap().to_string(), "1->2 2->1");
    }

    #[test]
    fn direct_rate_monotone_in_power() {
        let real = two_sc();
        let mut a = Allocation::zero(PairingMatrix::identity(2));
        let mut last = 0.0;
        for i in 0..20 {
            a.p_s[0] = i as f64 * 0.5;
            let r = weighted_sum_rate(&real, &a, false).unwrap();
            assert!(r >= last);
            last = r;
        }
    }
}
