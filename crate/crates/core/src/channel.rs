//! Per-subcarrier normalized channel gains and the per-pair quantities
//! derived from them.
//!
//! All gains are stored normalized by the noise variance, `a = |h|^2 / sigma^2`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Operating mode of a subcarrier pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairMode {
    /// Relay silent; the message rides only on the first-slot SD subcarrier.
    DirectLink,
    /// Relay forwards with equal information at relay and destination.
    Relay,
    /// Relay forwards while receiving strictly more information than the
    /// destination. Only produced by individual-budget solving.
    Intermediate,
}

impl PairMode {
    pub fn uses_relay(self) -> bool {
        !matches!(self, PairMode::DirectLink)
    }
}

/// One problem instance: normalized SD/SR/RD gains and rate weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub a_sd: Vec<f64>,
    pub a_sr: Vec<f64>,
    pub a_rd: Vec<f64>,
    pub w: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(a_sd: Vec<f64>, a_sr: Vec<f64>, a_rd: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let real = Self { a_sd, a_sr, a_rd, w };
        real.validate()?;
        Ok(real)
    }

    /// Number of subcarriers.
    pub fn m(&self) -> usize {
        self.a_sd.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.a_sd.len();
        if m == 0 {
            return Err(Error::Realization("need at least one subcarrier".into()));
        }
        for (name, v) in [("a_sr", &self.a_sr), ("a_rd", &self.a_rd), ("w", &self.w)] {
            if v.len() != m {
                return Err(Error::Realization(format!(
                    "{name} has length {}, expected {m}",
                    v.len()
                )));
            }
        }
        for (name, v) in [
            ("a_sd", &self.a_sd),
            ("a_sr", &self.a_sr),
            ("a_rd", &self.a_rd),
            ("w", &self.w),
        ] {
            if let Some((k, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
                return Err(Error::Realization(format!("{name}[{k}] = {x} is not finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Relay-mode advantage test for pairing first-slot `k` with second-slot `m`.
    pub fn relay_beneficial(&self, k: usize, m: usize) -> bool {
        relay_beneficial_total(self.a_sr[k], self.a_rd[m], self.a_sd[k])
    }

    /// Equivalent gain and (c_s, c_r) split of pair (k, m) under the
    /// total-power mode rule.
    pub fn pair_total(&self, k: usize, m: usize) -> PairGain {
        PairGain::total(self.a_sr[k], self.a_rd[m], self.a_sd[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// `w_k = 1`.
    AllOne,
    /// `w_k = 1 + (k-1)/(M-1)` with 1-based `k`.
    LinearRamp,
}

impl WeightRule {
    pub fn weights(self, m: usize) -> Vec<f64> {
        match self {
            WeightRule::AllOne => vec![1.0; m],
            WeightRule::LinearRamp if m == 1 => vec![1.0],
            WeightRule::LinearRamp => (0..m).map(|k| 1.0 + k as f64 / (m - 1) as f64).collect(),
        }
    }
}

/// i.i.d. Rician fading across subcarriers, independent across links.
#[derive(Debug, Clone, PartialEq)]
pub struct RicianConfig {
    pub k_factor: f64,
    pub mean_sq_sr: f64,
    pub mean_sq_sd: f64,
    pub mean_sq_rd: f64,
    pub noise_var: f64,
    pub m: usize,
    pub weight_rule: WeightRule,
}

impl RicianConfig {
    /// K = 1, unit noise variance, all-one weights.
    pub fn new(mean_sq_sr: f64, mean_sq_sd: f64, mean_sq_rd: f64, m: usize) -> Self {
        Self {
            k_factor: 1.0,
            mean_sq_sr,
            mean_sq_sd,
            mean_sq_rd,
            noise_var: 1.0,
            m,
            weight_rule: WeightRule::AllOne,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.k_factor.is_finite() && self.k_factor >= 0.0) {
            return bad("k_factor must be finite and >= 0");
        }
        for (name, v) in [
            ("mean_sq_sr", self.mean_sq_sr),
            ("mean_sq_sd", self.mean_sq_sd),
            ("mean_sq_rd", self.mean_sq_rd),
            ("noise_var", self.noise_var),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.m == 0 {
            return bad("m must be >= 1");
        }
        Ok(())
    }
}

/// Draws one complex Rician gain `h` with `E[|h|^2] = mean_sq` and returns `|h|^2`.
///
/// `h = sqrt(K/(K+1)) s e^{j theta} + sqrt(1/(K+1)) s z`, with `z` standard
/// complex Gaussian (unit variance), `theta ~ U[0, 2pi)` and `s = sqrt(mean_sq)`.
pub fn rician_power<R: Rng + ?Sized>(rng: &mut R, k_factor: f64, mean_sq: f64) -> f64 {
    let s = mean_sq.sqrt();
    let los = (k_factor / (k_factor + 1.0)).sqrt() * s;
    let nlos = (1.0 / (k_factor + 1.0)).sqrt() * s;
    let theta: f64 = rng.random::<f64>() * 2.0 * PI;
    let zr: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
    let zi: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
    let re = los * theta.cos() + nlos * zr;
    let im = los * theta.sin() + nlos * zi;
    re * re + im * im
}

/// Samples a realization deterministically from `seed`.
pub fn sample_realization(cfg: &RicianConfig, seed: u64) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |mean_sq: f64| -> Vec<f64> {
        (0..cfg.m)
            .map(|_| rician_power(&mut rng, cfg.k_factor, mean_sq) / cfg.noise_var)
            .collect()
    };
    let a_sr = draw(cfg.mean_sq_sr);
    let a_sd = draw(cfg.mean_sq_sd);
    let a_rd = draw(cfg.mean_sq_rd);
    Ok(ChannelRealization {
        a_sd,
        a_sr,
        a_rd,
        w: cfg.weight_rule.weights(cfg.m),
    })
}

/// True iff relaying strictly beats the direct link under a shared power budget.
pub fn relay_beneficial_total(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64) -> bool {
    a_sr_k > a_sd_k && a_rd_m > a_sd_k
}

/// Equivalent single-channel gain of a pair in the given mode.
///
/// `Intermediate` is priced like `Relay` here.
pub fn equivalent_gain(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64, mode: PairMode) -> Result<f64> {
    match mode {
        PairMode::DirectLink => Ok(a_sd_k),
        PairMode::Relay | PairMode::Intermediate => {
            let den = relay_denominator(a_sr_k, a_rd_m, a_sd_k)?;
            Ok(a_sr_k * a_rd_m / den)
        }
    }
}

/// Fractions `(c_s, c_r)` of a pair's total power spent by source and relay.
pub fn power_split(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64, mode: PairMode) -> Result<(f64, f64)> {
    match mode {
        PairMode::DirectLink => Ok((1.0, 0.0)),
        PairMode::Relay | PairMode::Intermediate => {
            let den = relay_denominator(a_sr_k, a_rd_m, a_sd_k)?;
            let c_s = a_rd_m / den;
            Ok((c_s, 1.0 - c_s))
        }
    }
}

fn relay_denominator(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64) -> Result<f64> {
    let den = a_sr_k + a_rd_m - a_sd_k;
    if den > 0.0 && a_sr_k >= a_sd_k {
        Ok(den)
    } else {
        Err(Error::Domain(format!(
            "relay mode needs a_sr >= a_sd and a positive denominator \
             (a_sr={a_sr_k}, a_rd={a_rd_m}, a_sd={a_sd_k})"
        )))
    }
}

/// Equivalent gain plus source/relay power fractions of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGain {
    pub mode: PairMode,
    pub gain: f64,
    pub c_s: f64,
    pub c_r: f64,
}

impl PairGain {
    pub fn direct(a_sd_k: f64) -> Self {
        Self {
            mode: PairMode::DirectLink,
            gain: a_sd_k,
            c_s: 1.0,
            c_r: 0.0,
        }
    }

    /// Relay branch. Caller guarantees `a_sr > a_sd`.
    pub fn relay(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64) -> Self {
        let den = a_sr_k + a_rd_m - a_sd_k;
        let c_s = a_rd_m / den;
        Self {
            mode: PairMode::Relay,
            gain: a_sr_k * a_rd_m / den,
            c_s,
            c_r: (a_sr_k - a_sd_k) / den,
        }
    }

    /// Mode chosen by the shared-budget advantage test.
    pub fn total(a_sr_k: f64, a_rd_m: f64, a_sd_k: f64) -> Self {
        if relay_beneficial_total(a_sr_k, a_rd_m, a_sd_k) {
            Self::relay(a_sr_k, a_rd_m, a_sd_k)
        } else {
            Self::direct(a_sd_k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn relay_advantage_examples() {
        assert!(relay_beneficial_total(3.0, 3.0, 1.0));
        assert!(!relay_beneficial_total(1.0, 5.0, 1.0));
        assert!(!relay_beneficial_total(5.0, 0.5, 1.0));
    }

    #[test]
    fn equivalent_gain_examples() {
        assert_relative_eq!(equivalent_gain(3.0, 3.0, 1.0, PairMode::Relay).unwrap(), 1.8);
        assert_eq!(equivalent_gain(9.0, 4.0, 0.7, PairMode::DirectLink).unwrap(), 0.7);
        assert_relative_eq!(equivalent_gain(2.0, 2.0, 2.0, PairMode::Relay).unwrap(), 2.0);
        assert!(matches!(
            equivalent_gain(0.5, 0.2, 1.0, PairMode::Relay),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn power_split_examples() {
        let (cs, cr) = power_split(3.0, 3.0, 1.0, PairMode::Relay).unwrap();
        assert_relative_eq!(cs, 0.6, epsilon = 1e-15);
        assert_relative_eq!(cr, 0.4, epsilon = 1e-15);
        // a_sr c_s = a_sd c_s + a_rd c_r : 1.8 = 0.6 + 1.2
        assert_relative_eq!(3.0 * cs, 1.0 * cs + 3.0 * cr, epsilon = 1e-12);
        assert_eq!(power_split(1.0, 2.0, 3.0, PairMode::DirectLink).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn sampler_shape_and_determinism() {
        let cfg = RicianConfig::new(1.0, 1.0, 1.0, 4);
        let a = sample_realization(&cfg, 7).unwrap();
        assert_eq!(a.m(), 4);
        assert!(a.a_sd.iter().chain(&a.a_sr).chain(&a.a_rd).all(|x| *x >= 0.0));
        assert_eq!(a, sample_realization(&cfg, 7).unwrap());
        assert_ne!(a, sample_realization(&cfg, 8).unwrap());
    }

    #[test]
    fn sampler_rejects_bad_config() {
        let mut cfg = RicianConfig::new(1.0, 1.0, 1.0, 4);
        cfg.noise_var = 0.0;
        assert!(matches!(sample_realization(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = RicianConfig::new(1.0, 1.0, 1.0, 4);
        cfg.k_factor = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sampler_mean_matches_mean_square() {
        // Law of large numbers: |h|^2 has mean mean_sq and variance
        // mean_sq^2 (2K+1)/(K+1)^2, so the standard error at 1e5 draws is
        // well under 0.01 for K in {0, 1}.
        for (k, mean_sq, noise) in [(0.0, 1.0, 1.0), (1.0, 3.0, 1.0), (1.0, 2.0, 4.0)] {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let n = 100_000;
            let sum: f64 = (0..n).map(|_| rician_power(&mut rng, k, mean_sq) / noise).sum();
            let mean = sum / n as f64;
            let target: f64 = mean_sq / noise;
            let se = target * ((2.0 * k + 1.0) as f64).sqrt() / (k + 1.0) / (n as f64).sqrt();
            assert!((mean - target).abs() < 3.0 * se, "k={k}: {mean} vs {target}");
            if k == 0.0 {
                assert!((mean - 1.0).abs() < 0.02);
            }
        }
    }

    #[test]
    fn linear_ramp_weights() {
        assert_eq!(WeightRule::LinearRamp.weights(3), vec![1.0, 1.5, 2.0]);
        assert_eq!(WeightRule::LinearRamp.weights(1), vec![1.0]);
        assert_eq!(WeightRule::AllOne.weights(2), vec![1.0, 1.0]);
    }

    #[test]
    fn realization_validation() {
        assert!(ChannelRealization::new(vec![1.0], vec![1.0, 2.0], vec![1.0], vec![1.0]).is_err());
        assert!(ChannelRealization::new(vec![-1.0], vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(ChannelRealization::new(vec![f64::NAN], vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(ChannelRealization::new(vec![], vec![], vec![], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn relay_split_identities(
            a_sd in 0.0f64..10.0,
            dsr in 1e-6f64..10.0,
            drd in 1e-6f64..10.0,
        ) {
            let (a_sr, a_rd) = (a_sd + dsr, a_sd + drd);
            prop_assume!(relay_beneficial_total(a_sr, a_rd, a_sd));
            let (cs, cr) = power_split(a_sr, a_rd, a_sd, PairMode::Relay).unwrap();
            prop_assert!((cs + cr - 1.0).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&cs) && (0.0..=1.0).contains(&cr));
            let lhs = a_sr * cs;
            let rhs = a_sd * cs + a_rd * cr;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-300));
            let g = equivalent_gain(a_sr, a_rd, a_sd, PairMode::Relay).unwrap();
            prop_assert!(g > a_sd);
            prop_assert!(g <= a_sr.min(a_rd) * (1.0 + 1e-12));
        }
    }
}
