//! Power allocation on a fixed pairing: every pair contributes one or two
//! parallel channels, and one priced water-filling allocates them all.

use crate::channel::{ChannelRealization, PairGain, PairMode};
use crate::error::{Error, Result};
use crate::problem::check_power;
use crate::rate::{weighted_sum_rate, Allocation, PairingMatrix};
use crate::waterfill::{waterfill, WaterfillProblem, WaterfillSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ChannelKind {
    /// First-slot SD channel of pair `k`.
    Direct,
    /// Second-slot SD channel on the partner subcarrier of pair `k`.
    Extra,
    /// Two-hop channel with source/relay split `(c_s, c_r)`.
    Relay { c_s: f64, c_r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Channel {
    pub pair: usize,
    pub kind: ChannelKind,
    pub gain: f64,
    pub weight: f64,
    pub cost: f64,
}

impl Channel {
    pub fn direct(real: &ChannelRealization, k: usize) -> Self {
        Self {
            pair: k,
            kind: ChannelKind::Direct,
            gain: real.a_sd[k],
            weight: real.w[k],
            cost: 1.0,
        }
    }

    pub fn extra(real: &ChannelRealization, k: usize, m: usize) -> Self {
        Self {
            pair: k,
            kind: ChannelKind::Extra,
            gain: real.a_sd[m],
            weight: real.w[m],
            cost: 1.0,
        }
    }

    pub fn relay(real: &ChannelRealization, g: &PairGain, k: usize, relay_price: f64) -> Self {
        Self {
            pair: k,
            kind: ChannelKind::Relay { c_s: g.c_s, c_r: g.c_r },
            gain: g.gain,
            weight: real.w[k],
            cost: g.c_s + relay_price * g.c_r,
        }
    }
}

/// Water-fills `channels` under `budget`. A positive budget with no usable
/// channel leaves everything at zero.
pub(crate) fn fill(channels: &[Channel], budget: f64) -> Result<WaterfillSolution> {
    let prob = WaterfillProblem::new(
        channels.iter().map(|c| c.gain).collect(),
        channels.iter().map(|c| c.weight).collect(),
        budget,
    )
    .with_costs(channels.iter().map(|c| c.cost).collect());
    match waterfill(&prob) {
        Err(Error::InfeasibleBudget(_)) => Ok(WaterfillSolution {
            powers: vec![0.0; channels.len()],
            water_price: 0.0,
        }),
        r => r,
    }
}

/// Builds the allocation induced by channel powers.
pub(crate) fn assemble(pairing: &PairingMatrix, channels: &[Channel], powers: &[f64]) -> Allocation {
    let mut a = Allocation::zero(pairing.clone());
    for (c, &p) in channels.iter().zip(powers) {
        let k = c.pair;
        match c.kind {
            ChannelKind::Direct => a.p_s[k] = p,
            ChannelKind::Extra => a.q_s[k] = p,
            ChannelKind::Relay { c_s, c_r } => {
                a.modes[k] = PairMode::Relay;
                a.p_s[k] = c_s * p;
                a.p_r[k] = c_r * p;
            }
        }
    }
    a
}

/// Optimal powers on `pairing` under a total budget, with each pair's mode
/// set by the relay advantage test.
pub fn total_fixed(real: &ChannelRealization, pairing: &PairingMatrix, power: f64) -> Result<(f64, Allocation)> {
    total_fixed_priced(real, pairing, power).map(|(r, a, _)| (r, a))
}

/// [`total_fixed`] plus the water price.
pub fn total_fixed_priced(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    power: f64,
) -> Result<(f64, Allocation, f64)> {
    check_power(power)?;
    let channels: Vec<Channel> = pairing
        .pairs()
        .map(|(k, m)| {
            let g = real.pair_total(k, m);
            match g.mode {
                PairMode::DirectLink => Channel::direct(real, k),
                _ => Channel::relay(real, &g, k, 1.0),
            }
        })
        .collect();
    let sol = fill(&channels, power)?;
    let alloc = assemble(pairing, &channels, &sol.powers);
    Ok((weighted_sum_rate(real, &alloc, false)?, alloc, sol.water_price))
}

/// Channel set for extra direct transmission: `s[k]` selects relaying for
/// pair `k`, otherwise the pair gets its first-slot SD channel plus the
/// second-slot SD channel of its partner.
pub(crate) fn extra_channels(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    s: &[bool],
) -> Result<Vec<Channel>> {
    let mut channels = Vec::with_capacity(2 * real.m());
    for (k, m) in pairing.pairs() {
        if s[k] {
            if real.a_sr[k] <= real.a_sd[k] {
                return Err(Error::Domain(format!(
                    "pair {} cannot relay: a_sr <= a_sd",
                    k + 1
                )));
            }
            let g = PairGain::relay(real.a_sr[k], real.a_rd[m], real.a_sd[k]);
            channels.push(Channel::relay(real, &g, k, 1.0));
        } else {
            channels.push(Channel::direct(real, k));
            channels.push(Channel::extra(real, k, m));
        }
    }
    Ok(channels)
}

/// Optimal powers on `pairing` with relay indicators `s` under a total
/// budget, extra second-slot transmission allowed on direct pairs. Also
/// returns the water price.
pub fn extra_total_fixed(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    s: &[bool],
    power: f64,
) -> Result<(f64, Allocation, f64)> {
    check_power(power)?;
    let channels = extra_channels(real, pairing, s)?;
    let sol = fill(&channels, power)?;
    let alloc = assemble(pairing, &channels, &sol.powers);
    Ok((weighted_sum_rate(real, &alloc, true)?, alloc, sol.water_price))
}
