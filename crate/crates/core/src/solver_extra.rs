//! Solvers allowing an extra second-slot source transmission on the partner
//! subcarrier of every pair that does not relay.
//!
//! A pair either relays (`s = 1`) or sends directly in both slots (`s = 0`).
//! The dual iteration compares the two Lagrangian contributions per
//! candidate pair.

use crate::channel::{ChannelRealization, PairGain, PairMode};
use crate::dual::{
    amend_pairing, closed_form_power, closed_form_value, column_counts, greedy_pairing, norm,
    run_schedule, Candidate, DualIteration, DualPoint, ScoreMatrix,
    SolveReport, SolverConfig, StepOutcome, TraceRow, PRICE_FLOOR,
};
use crate::error::{Error, Result};
use crate::fixed::extra_total_fixed;
use crate::problem::{check_power, IndividualBudgets};
use crate::rate::{Allocation, PairingMatrix};
use crate::solver_individual::{note_refine, refine_with_options, PairOption, RefineOutcome};

const S_ROUNDS_TOTAL: usize = 4;
const S_ROUNDS_INDIVIDUAL: usize = 8;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("mu must be positive and finite, got {mu}")))
    }
}

fn can_relay(real: &ChannelRealization, k: usize) -> bool {
    real.a_sr[k] > real.a_sd[k]
}

/// Relay-mode Lagrangian contribution of pair (k, m) at price `mu`. A pair
/// that cannot relay degenerates to its first-slot direct link.
pub fn score_yr(real: &ChannelRealization, mu: f64, k: usize, m: usize) -> Result<f64> {
    check_mu(mu)?;
    let gain = if can_relay(real, k) {
        PairGain::relay(real.a_sr[k], real.a_rd[m], real.a_sd[k]).gain
    } else {
        real.a_sd[k]
    };
    Ok(closed_form_value(real.w[k], gain, mu).1)
}

/// Two-slot direct contribution of pair (k, m) at price `mu`.
pub fn score_yd(real: &ChannelRealization, mu: f64, k: usize, m: usize) -> Result<f64> {
    check_mu(mu)?;
    Ok(closed_form_value(real.w[k], real.a_sd[k], mu).1 + closed_form_value(real.w[m], real.a_sd[m], mu).1)
}

pub fn choose_relay_indicator(yr: f64, yd: f64, a_sr_k: f64, a_sd_k: f64) -> bool {
    a_sr_k > a_sd_k && yr > yd
}

/// Closed-form powers at price `mu` for a fixed pairing and relay indicator.
pub fn powers_extra(real: &ChannelRealization, mu: f64, pairing: &PairingMatrix, s: &[bool]) -> Result<Allocation> {
    check_mu(mu)?;
    let mut a = Allocation::zero(pairing.clone());
    for (k, m) in pairing.pairs() {
        if s[k] {
            if !can_relay(real, k) {
                return Err(Error::Domain(format!("pair {} cannot relay: a_sr <= a_sd", k + 1)));
            }
            let g = PairGain::relay(real.a_sr[k], real.a_rd[m], real.a_sd[k]);
            let p = closed_form_power(real.w[k], g.gain, mu);
            a.modes[k] = PairMode::Relay;
            a.p_s[k] = g.c_s * p;
            a.p_r[k] = g.c_r * p;
        } else {
            a.p_s[k] = closed_form_power(real.w[k], real.a_sd[k], mu);
            a.q_s[k] = closed_form_power(real.w[m], real.a_sd[m], mu);
        }
    }
    Ok(a)
}

/// Relay indicators of the pairs in `pairing` at price `mu`.
fn indicators_total(real: &ChannelRealization, pairing: &PairingMatrix, mu: f64) -> Vec<bool> {
    let mu = mu.max(PRICE_FLOOR);
    pairing
        .pairs()
        .map(|(k, m)| {
            let yr = score_yr(real, mu, k, m).unwrap_or(f64::NEG_INFINITY);
            let yd = score_yd(real, mu, k, m).unwrap_or(f64::INFINITY);
            choose_relay_indicator(yr, yd, real.a_sr[k], real.a_sd[k])
        })
        .collect()
}

struct ExtraTotalIteration<'a> {
    real: &'a ChannelRealization,
    relay_gain: Vec<f64>,
    power: f64,
    mu: f64,
    alpha: Vec<f64>,
    scores: ScoreMatrix,
    alpha_at_scores: Vec<f64>,
    selection: Vec<usize>,
    power_buf: Vec<f64>,
    logged: Vec<String>,
}

impl ExtraTotalIteration<'_> {
    /// Fills `scores` at `mu` against `alpha` and returns the dual value.
    fn score(&mut self, mu: f64, alpha: &[f64]) -> f64 {
        let real = self.real;
        let m = real.m();
        let direct: Vec<(f64, f64)> = (0..m).map(|k| closed_form_value(real.w[k], real.a_sd[k], mu)).collect();
        for k in 0..m {
            for c in 0..m {
                let yd = direct[k].1 + direct[c].1;
                let pd = direct[k].0 + direct[c].0;
                let (y, p) = if can_relay(real, k) {
                    let (pr, yr) = closed_form_value(real.w[k], self.relay_gain[k * m + c], mu);
                    if yr > yd { (yr, pr) } else { (yd, pd) }
                } else {
                    (yd, pd)
                };
                self.scores.set(k, c, y - alpha[c]);
                self.power_buf[k * m + c] = p;
            }
        }
        let rows: f64 = (0..m)
            .map(|k| self.scores.row(k).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        rows + mu * self.power + alpha.iter().sum::<f64>()
    }
}

impl DualIteration for ExtraTotalIteration<'_> {
    fn step(&mut self, iter: usize, step: f64) -> StepOutcome {
        let m = self.real.m();
        let mu = self.mu.max(PRICE_FLOOR);
        let alpha = self.alpha.clone();
        let dual = self.score(mu, &alpha);
        self.selection = greedy_pairing(&self.scores);
        let power_sum: f64 = self.selection.iter().enumerate().map(|(k, &c)| self.power_buf[k * m + c]).sum();
        let counts = column_counts(&self.selection, m);
        self.alpha_at_scores = alpha;

        let mu_new = (self.mu - step * (self.power - power_sum)).max(0.0);
        let alpha_new: Vec<f64> = self
            .alpha
            .iter()
            .zip(&counts)
            .map(|(a, &c)| a - step * (1.0 - c as f64))
            .collect();
        let trace = TraceRow {
            iter,
            mu: self.mu,
            mu_r: None,
            alpha_norm: norm(&self.alpha),
            power_sum,
            dual_value: dual,
        };
        let point = DualPoint { mus: vec![mu_new], alpha: alpha_new.clone() };
        self.mu = mu_new;
        self.alpha = alpha_new;
        StepOutcome {
            dual_value: dual,
            point,
            trace,
        }
    }

    fn amend_and_evaluate(&mut self) -> Result<Candidate> {
        let pairing = amend_pairing(&self.selection, &self.scores, &self.alpha_at_scores);
        let mu_iter = self.mu.max(PRICE_FLOOR);
        let mut s = indicators_total(self.real, &pairing, mu_iter);
        let mut best: Option<(f64, Allocation, f64)> = None;
        for round in 0..S_ROUNDS_TOTAL {
            let (rate, alloc, price) = extra_total_fixed(self.real, &pairing, &s, self.power)?;
            if round > 0 && best.as_ref().is_some_and(|b| rate > b.0) {
                let msg = "re-derived relay indicators improved the rate".to_string();
                if !self.logged.contains(&msg) {
                    self.logged.push(msg);
                }
            }
            if best.as_ref().is_none_or(|b| rate > b.0) {
                best = Some((rate, alloc, price));
            }
            let next = indicators_total(self.real, &pairing, price);
            if next == s {
                break;
            }
            s = next;
        }
        let (rate, allocation, price) = best.expect("at least one round");
        let alpha = self.alpha_at_scores.clone();
        let dual_hint = (price > 0.0 && price.is_finite()).then(|| {
            let saved = self.scores.clone();
            let h = self.score(price, &alpha);
            self.scores = saved;
            h
        });
        Ok(Candidate { rate, allocation, dual_hint })
    }
}

fn report(res: crate::dual::ScheduleResult, mut notes: Vec<String>, cfg: &SolverConfig) -> SolveReport {
    let (primal_rate, allocation) = res.best;
    if !res.converged {
        notes.push(format!("no convergence within {} iterations", cfg.max_iter_hard));
    }
    SolveReport {
        pairing: allocation.pairing.clone(),
        allocation,
        primal_rate,
        dual_value: res.dual_value,
        gap: res.dual_value - primal_rate,
        iterations: res.iterations,
        trigger_iter: res.trigger_iter,
        converged: res.converged,
        trace: res.trace,
        notes,
    }
}

/// Total-power solver with extra direct transmission.
pub fn solve_extra_total(real: &ChannelRealization, power: f64, cfg: &SolverConfig, seed: u64) -> Result<SolveReport> {
    real.validate()?;
    check_power(power)?;
    cfg.validate()?;
    let m = real.m();
    let mut rng = cfg.rng(seed);
    let mu = cfg.draw_init(&mut rng);
    let alpha = (0..m).map(|_| cfg.draw_init(&mut rng)).collect();
    let relay_gain = (0..m * m)
        .map(|i| {
            let (k, c) = (i / m, i % m);
            if can_relay(real, k) {
                PairGain::relay(real.a_sr[k], real.a_rd[c], real.a_sd[k]).gain
            } else {
                0.0
            }
        })
        .collect();
    let mut it = ExtraTotalIteration {
        real,
        relay_gain,
        power,
        mu,
        alpha,
        scores: ScoreMatrix::zeros(m),
        alpha_at_scores: vec![0.0; m],
        selection: vec![0; m],
        power_buf: vec![0.0; m * m],
        logged: Vec::new(),
    };
    let start = DualPoint { mus: vec![it.mu], alpha: it.alpha.clone() };
    let res = run_schedule(&mut it, cfg, start)?;
    Ok(report(res, it.logged, cfg))
}

/// Per-pair options for the fixed-pairing solve under relay indicators `s`.
fn extra_options(real: &ChannelRealization, pairing: &PairingMatrix, s: &[bool]) -> Vec<PairOption> {
    pairing
        .pairs()
        .map(|(k, m)| PairOption {
            relay_capable: s[k] && can_relay(real, k) && real.a_rd[m] > 0.0,
            extra_slot: !s[k],
        })
        .collect()
}

/// Relay indicators of the pairs in `pairing` at prices `(mu_s, mu_r)`.
fn indicators_individual(real: &ChannelRealization, pairing: &PairingMatrix, mu_s: f64, mu_r: f64) -> Vec<bool> {
    let mu_s = mu_s.max(PRICE_FLOOR);
    let mu_r = mu_r.max(PRICE_FLOOR);
    pairing
        .pairs()
        .map(|(k, m)| {
            let (yr, yd) = pair_scores_individual(real, k, m, mu_s, mu_r);
            choose_relay_indicator(yr, yd, real.a_sr[k], real.a_sd[k])
        })
        .collect()
}

/// `(Y_R, Y_D)` of one pair under individual prices, with their
/// `(source, relay)` consumptions.
#[inline]
fn pair_scores_full(real: &ChannelRealization, k: usize, m: usize, mu_s: f64, mu_r: f64) -> ((f64, f64, f64), (f64, f64)) {
    let (pd_k, yd_k) = closed_form_value(real.w[k], real.a_sd[k], mu_s);
    let (pd_m, yd_m) = closed_form_value(real.w[m], real.a_sd[m], mu_s);
    let g = if can_relay(real, k) && real.a_rd[m] * mu_s >= real.a_sd[k] * mu_r {
        PairGain::relay(real.a_sr[k], real.a_rd[m], real.a_sd[k])
    } else {
        PairGain::direct(real.a_sd[k])
    };
    let (p, yr) = closed_form_value(real.w[k], g.gain, g.c_s * mu_s + g.c_r * mu_r);
    ((yr, g.c_s * p, g.c_r * p), (yd_k + yd_m, pd_k + pd_m))
}

fn pair_scores_individual(real: &ChannelRealization, k: usize, m: usize, mu_s: f64, mu_r: f64) -> (f64, f64) {
    let ((yr, _, _), (yd, _)) = pair_scores_full(real, k, m, mu_s, mu_r);
    (yr, yd)
}

/// Best allocation on a fixed pairing under individual budgets, alternating
/// between the exact solve for given relay indicators and re-deriving the
/// indicators from its prices.
pub(crate) fn extra_individual_fixed(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    s0: Vec<bool>,
    budgets: &IndividualBudgets,
    notes: &mut Vec<String>,
) -> Result<RefineOutcome> {
    let mut s = s0;
    let mut best: Option<RefineOutcome> = None;
    for _ in 0..S_ROUNDS_INDIVIDUAL {
        let out = refine_with_options(real, pairing, &extra_options(real, pairing, &s), budgets, true)?;
        note_refine(notes, &out);
        let next = if out.mu_s > 0.0 && out.mu_s.is_finite() {
            indicators_individual(real, pairing, out.mu_s, out.mu_r)
        } else {
            s.clone()
        };
        if best.as_ref().is_none_or(|b| out.rate > b.rate) {
            best = Some(out);
        }
        if next == s {
            break;
        }
        s = next;
    }
    Ok(best.expect("at least one round"))
}

struct ExtraIndIteration<'a> {
    real: &'a ChannelRealization,
    budgets: IndividualBudgets,
    mu_s: f64,
    mu_r: f64,
    alpha: Vec<f64>,
    scores: ScoreMatrix,
    alpha_at_scores: Vec<f64>,
    selection: Vec<usize>,
    src: Vec<f64>,
    rly: Vec<f64>,
    notes: Vec<String>,
}

impl ExtraIndIteration<'_> {
    fn score(&mut self, mu_s: f64, mu_r: f64, alpha: &[f64]) -> f64 {
        let real = self.real;
        let m = real.m();
        for k in 0..m {
            for c in 0..m {
                let ((yr, ps, pr), (yd, pd)) = pair_scores_full(real, k, c, mu_s, mu_r);
                let relay = choose_relay_indicator(yr, yd, real.a_sr[k], real.a_sd[k]);
                let (y, s_used, r_used) = if relay { (yr, ps, pr) } else { (yd, pd, 0.0) };
                self.scores.set(k, c, y - alpha[c]);
                self.src[k * m + c] = s_used;
                self.rly[k * m + c] = r_used;
            }
        }
        let rows: f64 = (0..m)
            .map(|k| self.scores.row(k).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        rows + mu_s * self.budgets.source + mu_r * self.budgets.relay + alpha.iter().sum::<f64>()
    }
}

impl DualIteration for ExtraIndIteration<'_> {
    fn step(&mut self, iter: usize, step: f64) -> StepOutcome {
        let m = self.real.m();
        let mu_s = self.mu_s.max(PRICE_FLOOR);
        let mu_r = self.mu_r.max(PRICE_FLOOR);
        let alpha = self.alpha.clone();
        let dual = self.score(mu_s, mu_r, &alpha);
        self.selection = greedy_pairing(&self.scores);
        let src_used: f64 = self.selection.iter().enumerate().map(|(k, &c)| self.src[k * m + c]).sum();
        let rly_used: f64 = self.selection.iter().enumerate().map(|(k, &c)| self.rly[k * m + c]).sum();
        let counts = column_counts(&self.selection, m);
        self.alpha_at_scores = alpha;

        let mu_s_new = (self.mu_s - step * (self.budgets.source - src_used)).max(0.0);
        let mu_r_new = (self.mu_r - step * (self.budgets.relay - rly_used)).max(0.0);
        let alpha_new: Vec<f64> = self
            .alpha
            .iter()
            .zip(&counts)
            .map(|(a, &c)| a - step * (1.0 - c as f64))
            .collect();
        let trace = TraceRow {
            iter,
            mu: self.mu_s,
            mu_r: Some(self.mu_r),
            alpha_norm: norm(&self.alpha),
            power_sum: src_used,
            dual_value: dual,
        };
        let point = DualPoint { mus: vec![mu_s_new, mu_r_new], alpha: alpha_new.clone() };
        self.mu_s = mu_s_new;
        self.mu_r = mu_r_new;
        self.alpha = alpha_new;
        StepOutcome {
            dual_value: dual,
            point,
            trace,
        }
    }

    fn amend_and_evaluate(&mut self) -> Result<Candidate> {
        let pairing = amend_pairing(&self.selection, &self.scores, &self.alpha_at_scores);
        let s = indicators_individual(self.real, &pairing, self.mu_s, self.mu_r);
        let out = extra_individual_fixed(self.real, &pairing, s, &self.budgets, &mut self.notes)?;
        let alpha = self.alpha_at_scores.clone();
        let dual_hint = (out.mu_s > 0.0 && out.mu_s.is_finite()).then(|| {
            let saved = self.scores.clone();
            let h = self.score(out.mu_s.max(PRICE_FLOOR), out.mu_r.max(PRICE_FLOOR), &alpha);
            self.scores = saved;
            h
        });
        Ok(Candidate {
            rate: out.rate,
            allocation: out.allocation,
            dual_hint,
        })
    }
}

/// Individual-budget solver with extra direct transmission.
pub fn solve_extra_individual(
    real: &ChannelRealization,
    budgets: &IndividualBudgets,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveReport> {
    real.validate()?;
    budgets.validate()?;
    cfg.validate()?;
    let m = real.m();
    let mut rng = cfg.rng(seed);
    let mu_s = cfg.draw_init(&mut rng);
    let mu_r = cfg.draw_init(&mut rng);
    let alpha = (0..m).map(|_| cfg.draw_init(&mut rng)).collect();
    let mut it = ExtraIndIteration {
        real,
        budgets: *budgets,
        mu_s,
        mu_r,
        alpha,
        scores: ScoreMatrix::zeros(m),
        alpha_at_scores: vec![0.0; m],
        selection: vec![0; m],
        src: vec![0.0; m * m],
        rly: vec![0.0; m * m],
        notes: Vec::new(),
    };
    let start = DualPoint { mus: vec![it.mu_s, it.mu_r], alpha: it.alpha.clone() };
    let res = run_schedule(&mut it, cfg, start)?;
    Ok(report(res, it.notes, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, RicianConfig};
    use crate::problem::PowerConstraint;
    use crate::solver_individual::solve_individual;
    use crate::solver_total::{score_x, solve_total};
    use crate::validate::validate_allocation;
    use crate::waterfill::{waterfill, WaterfillProblem};
    use approx::assert_relative_eq;

    fn one(a_sd: f64, a_sr: f64, a_rd: f64) -> ChannelRealization {
        ChannelRealization::new(vec![a_sd], vec![a_sr], vec![a_rd], vec![1.0]).unwrap()
    }

    #[test]
    fn yr_examples() {
        let real = one(1.0, 3.0, 3.0);
        assert_relative_eq!(score_yr(&real, 0.1, 0, 0).unwrap(), 0.5 * 9f64.ln() - 0.1 * (5.0 - 1.0 / 1.8), epsilon = 1e-12);
        assert_eq!(score_yr(&real, 100.0, 0, 0).unwrap(), 0.0);
        let alpha = [0.37];
        let x = score_x(&real, 0.1, &alpha).unwrap().get(0, 0);
        assert_relative_eq!(score_yr(&real, 0.1, 0, 0).unwrap(), x + alpha[0], epsilon = 1e-12);
    }

    #[test]
    fn yd_examples() {
        let real = ChannelRealization::new(vec![1.0, 1.0], vec![0.5, 0.5], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(score_yd(&real, 0.1, 0, 1).unwrap(), 5f64.ln() - 0.8, epsilon = 1e-12);
        assert_eq!(score_yd(&real, 100.0, 0, 1).unwrap(), 0.0);
        let muted = ChannelRealization::new(vec![1.0, 1.0], vec![0.5, 0.5], vec![1.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(score_yd(&muted, 0.1, 0, 1).unwrap(), 0.5 * 5f64.ln() - 0.4, epsilon = 1e-12);
    }

    #[test]
    fn indicator_examples() {
        assert!(!choose_relay_indicator(9.0, 0.0, 1.0, 1.0));
        assert!(!choose_relay_indicator(0.5, 0.5, 3.0, 1.0));
        assert!(choose_relay_indicator(0.65, 0.55, 3.0, 1.0));
    }

    #[test]
    fn powers_extra_examples() {
        let real = ChannelRealization::new(vec![1.0, 0.5], vec![3.0, 2.0], vec![3.0, 2.0], vec![1.0, 1.0]).unwrap();
        let pairing = PairingMatrix::identity(2);
        let all_relay = powers_extra(&real, 0.1, &pairing, &[true, true]).unwrap();
        assert!(all_relay.q_s.iter().all(|&q| q == 0.0));
        let all_direct = powers_extra(&real, 0.1, &pairing, &[false, false]).unwrap();
        // direct pairs water-fill at price mu over 2M independent SD channels
        assert_relative_eq!(all_direct.p_s[0], 5.0 - 1.0, epsilon = 1e-12);
        assert_relative_eq!(all_direct.q_s[0], 5.0 - 1.0, epsilon = 1e-12);
        assert_relative_eq!(all_direct.p_s[1], 5.0 - 2.0, epsilon = 1e-12);
        // mixed: pair 1 relays with split (0.6, 0.4) of 5 - 1/1.8
        let mixed = powers_extra(&real, 0.1, &pairing, &[true, false]).unwrap();
        let p = 5.0 - 1.0 / 1.8;
        assert_relative_eq!(mixed.p_s[0], 0.6 * p, epsilon = 1e-12);
        assert_relative_eq!(mixed.p_r[0], 0.4 * p, epsilon = 1e-12);
        assert_relative_eq!(mixed.q_s[1], 3.0, epsilon = 1e-12);
        assert!(powers_extra(&one(1.0, 0.5, 3.0), 0.1, &PairingMatrix::identity(1), &[true]).is_err());
    }

    #[test]
    fn forced_direct_single_pair() {
        let real = one(1.0, 0.5, 3.0);
        let r = solve_extra_total(&real, 4.0, &SolverConfig::default(), 1).unwrap();
        assert_relative_eq!(r.primal_rate, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn zero_relay_budget_two_slot_direct() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 4);
        let real = sample_realization(&cfg, 3).unwrap();
        let b = IndividualBudgets::new(4.0, 0.0).unwrap();
        let r = solve_extra_individual(&real, &b, &SolverConfig::default(), 3).unwrap();
        let gains: Vec<f64> = real.a_sd.iter().chain(&real.a_sd).copied().collect();
        let w: Vec<f64> = real.w.iter().chain(&real.w).copied().collect();
        let prob = WaterfillProblem::new(gains, w, 4.0);
        let expect = prob.utility(&waterfill(&prob).unwrap().powers);
        assert_relative_eq!(r.primal_rate, expect, epsilon = 1e-9);
    }

    #[test]
    fn extra_feasible_and_not_worse() {
        let cfg = RicianConfig::new(3.0, 1.0, 3.0, 5);
        let b = IndividualBudgets::new(4.0, 1.0).unwrap();
        let sc = SolverConfig::default();
        for seed in 0..10 {
            let real = sample_realization(&cfg, seed).unwrap();
            let et = solve_extra_total(&real, 5.0, &sc, seed).unwrap();
            validate_allocation(&real, &et.allocation, &PowerConstraint::Total(5.0), true).unwrap();
            assert!(et.gap >= -1e-9);
            let t = solve_total(&real, 5.0, &sc, seed).unwrap();
            assert!(et.primal_rate >= 0.98 * t.primal_rate);

            let ei = solve_extra_individual(&real, &b, &sc, seed).unwrap();
            validate_allocation(&real, &ei.allocation, &PowerConstraint::Individual(b), true).unwrap();
            assert!(ei.gap >= -1e-9);
            let i = solve_individual(&real, &b, &sc, seed).unwrap();
            assert!(ei.primal_rate >= 0.98 * i.primal_rate);
            for (k, mode) in ei.allocation.modes.iter().enumerate() {
                if mode.uses_relay() {
                    assert!(real.a_sr[k] > real.a_sd[k]);
                    assert_eq!(ei.allocation.q_s[k], 0.0);
                }
            }
        }
    }
}
