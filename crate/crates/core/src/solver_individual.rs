//! Dual subgradient solver for separate source and relay budgets.
//!
//! Each candidate pair is priced at `c_s mu_S + c_r mu_R`. Relaying beats
//! the direct link exactly when `a_rd >= a_sd mu_R / mu_S`, so the mode of a
//! pair flips at the breakpoint ratio `a_rd / a_sd`.

use crate::channel::{ChannelRealization, PairGain, PairMode};
use crate::dual::{
    amend_pairing, closed_form_value, column_counts, greedy_pairing, norm,
    run_schedule, Candidate, DualIteration, DualPoint, ScoreMatrix, SolveReport,
    SolverConfig, StepOutcome, TraceRow, PRICE_FLOOR,
};
use crate::error::{Error, Result};
use crate::fixed::{fill, Channel, ChannelKind};
use crate::problem::IndividualBudgets;
use crate::rate::{weighted_sum_rate, Allocation, PairingMatrix};
use crate::validate::FEASIBILITY_TOL;

/// Relative tolerance of the intermediate-mode equality test.
pub const INTERMEDIATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DualStateIndividual {
    pub mu_s: f64,
    pub mu_r: f64,
    pub alpha: Vec<f64>,
    pub iter: usize,
}

fn check_mu_s(mu_s: f64) -> Result<()> {
    if mu_s > 0.0 && mu_s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("mu_S must be positive and finite, got {mu_s}")))
    }
}

pub fn classify_mode(a_sr_k: f64, a_sd_k: f64, a_rd_m: f64, mu_s: f64, mu_r: f64) -> Result<PairMode> {
    check_mu_s(mu_s)?;
    if a_sr_k <= a_sd_k {
        return Ok(PairMode::DirectLink);
    }
    let lhs = a_rd_m * mu_s;
    let rhs = a_sd_k * mu_r;
    Ok(if (lhs - rhs).abs() <= INTERMEDIATE_TOL * rhs {
        PairMode::Intermediate
    } else if lhs > rhs {
        PairMode::Relay
    } else {
        PairMode::DirectLink
    })
}

/// Gain and split of one pair at the given prices; the boundary goes to the
/// relay branch.
#[inline]
fn pair_gain_ind(a_sr_k: f64, a_sd_k: f64, a_rd_m: f64, mu_s: f64, mu_r: f64) -> PairGain {
    if a_sr_k > a_sd_k && a_rd_m * mu_s >= a_sd_k * mu_r {
        PairGain::relay(a_sr_k, a_rd_m, a_sd_k)
    } else {
        PairGain::direct(a_sd_k)
    }
}

/// `(a, c_s, c_r)` for every candidate pair, row-major.
pub fn gains_and_splits(real: &ChannelRealization, mu_s: f64, mu_r: f64) -> Result<Vec<PairGain>> {
    check_mu_s(mu_s)?;
    let m = real.m();
    let mu_r = mu_r.max(PRICE_FLOOR);
    Ok((0..m * m)
        .map(|i| pair_gain_ind(real.a_sr[i / m], real.a_sd[i / m], real.a_rd[i % m], mu_s, mu_r))
        .collect())
}

fn price(g: &PairGain, mu_s: f64, mu_r: f64) -> f64 {
    g.c_s * mu_s + g.c_r * mu_r
}

pub fn power_given_duals_ind(real: &ChannelRealization, mu_s: f64, mu_r: f64) -> Result<ScoreMatrix> {
    let gains = gains_and_splits(real, mu_s, mu_r)?;
    let m = real.m();
    let mut out = ScoreMatrix::zeros(m);
    for (i, g) in gains.iter().enumerate() {
        let pr = price(g, mu_s, mu_r.max(PRICE_FLOOR));
        out.set(i / m, i % m, closed_form_value(real.w[i / m], g.gain, pr).0);
    }
    Ok(out)
}

pub fn score_z(real: &ChannelRealization, mu_s: f64, mu_r: f64, alpha: &[f64]) -> Result<ScoreMatrix> {
    let gains = gains_and_splits(real, mu_s, mu_r)?;
    let m = real.m();
    let mut out = ScoreMatrix::zeros(m);
    for (i, g) in gains.iter().enumerate() {
        let pr = price(g, mu_s, mu_r.max(PRICE_FLOOR));
        out.set(i / m, i % m, closed_form_value(real.w[i / m], g.gain, pr).1 - alpha[i % m]);
    }
    Ok(out)
}

pub fn subgradient_step_ind(
    state: &DualStateIndividual,
    src_used: f64,
    rly_used: f64,
    col_sums: &[usize],
    budgets: &IndividualBudgets,
    iter: usize,
    step_scale: f64,
) -> DualStateIndividual {
    let step = step_scale / (iter as f64).sqrt();
    DualStateIndividual {
        mu_s: (state.mu_s - step * (budgets.source - src_used)).max(0.0),
        mu_r: (state.mu_r - step * (budgets.relay - rly_used)).max(0.0),
        alpha: state
            .alpha
            .iter()
            .zip(col_sums)
            .map(|(a, &c)| a - step * (1.0 - c as f64))
            .collect(),
        iter: iter + 1,
    }
}

/// What a pair on a fixed pairing may do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairOption {
    /// Relaying allowed (requires `a_sr > a_sd` and `a_rd > 0`).
    pub relay_capable: bool,
    /// Direct mode also gets the second-slot SD channel of the partner.
    pub extra_slot: bool,
}

/// Exact solution on a fixed pairing under individual budgets.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub rate: f64,
    pub allocation: Allocation,
    pub mu_s: f64,
    pub mu_r: f64,
    /// Number of pairs left in intermediate mode.
    pub intermediate_pairs: usize,
    /// Set when no sign change of the relay mismatch was found below the
    /// ratio cap; the allocation is then the (feasible) endpoint solution.
    pub bracket_exhausted: bool,
}

/// Optimal modes and powers for a fixed pairing under individual budgets.
///
/// At a fixed ratio `r = mu_R / mu_S` the problem is a single water-filling
/// in which a relaying pair costs `c_s + r c_r` per unit power, against the
/// combined budget `P_S + r P_R`. The relay consumption falls as `r` grows;
/// the returned ratio is where it meets `P_R` (or `r = 0` when the relay
/// budget is slack). Modes only change at the breakpoints `a_rd / a_sd`, so
/// the scan visits those in order and bisects inside the interval holding
/// the crossing. A crossing sitting exactly on a breakpoint is resolved by
/// running the pairs there in intermediate mode.
pub fn zero_crossing_refine(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    budgets: &IndividualBudgets,
) -> Result<RefineOutcome> {
    let opts: Vec<PairOption> = pairing
        .pairs()
        .map(|(k, m)| PairOption {
            relay_capable: real.a_sr[k] > real.a_sd[k] && real.a_rd[m] > 0.0,
            extra_slot: false,
        })
        .collect();
    refine_with_options(real, pairing, &opts, budgets, false)
}

const RATIO_CAP: f64 = 1e15;
const BISECT_ITERS: usize = 200;

struct RefineCtx<'a> {
    real: &'a ChannelRealization,
    pairing: &'a PairingMatrix,
    opts: &'a [PairOption],
    gains: Vec<PairGain>,
    /// Ratio at which each relay-capable pair turns direct.
    breakpoints: Vec<f64>,
    budgets: IndividualBudgets,
}

struct Eval {
    channels: Vec<Channel>,
    powers: Vec<f64>,
    price: f64,
    relay_used: f64,
}

impl RefineCtx<'_> {
    fn mask_above(&self, lo: f64) -> Vec<bool> {
        (0..self.opts.len())
            .map(|k| self.opts[k].relay_capable && self.breakpoints[k] > lo)
            .collect()
    }

    fn eval(&self, r: f64, relay: &[bool]) -> Result<Eval> {
        let mut channels = Vec::with_capacity(2 * self.opts.len());
        for (k, m) in self.pairing.pairs() {
            if relay[k] {
                channels.push(Channel::relay(self.real, &self.gains[k], k, r));
            } else {
                channels.push(Channel::direct(self.real, k));
                if self.opts[k].extra_slot {
                    channels.push(Channel::extra(self.real, k, m));
                }
            }
        }
        let sol = fill(&channels, self.budgets.source + r * self.budgets.relay)?;
        let relay_used = channels
            .iter()
            .zip(&sol.powers)
            .map(|(c, p)| match c.kind {
                ChannelKind::Relay { c_r, .. } => c_r * p,
                _ => 0.0,
            })
            .sum();
        Ok(Eval {
            channels,
            powers: sol.powers,
            price: sol.water_price,
            relay_used,
        })
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, relay: &[bool]) -> Result<(f64, Eval)> {
        let pr = self.budgets.relay;
        let mut best = self.eval(hi, relay)?;
        for _ in 0..BISECT_ITERS {
            if hi - lo <= 1e-15 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let e = self.eval(mid, relay)?;
            if e.relay_used - pr > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                best = e;
            }
        }
        Ok((hi, best))
    }
}

pub(crate) fn refine_with_options(
    real: &ChannelRealization,
    pairing: &PairingMatrix,
    opts: &[PairOption],
    budgets: &IndividualBudgets,
    extra_allowed: bool,
) -> Result<RefineOutcome> {
    budgets.validate()?;
    let gains: Vec<PairGain> = pairing
        .pairs()
        .map(|(k, m)| {
            if opts[k].relay_capable {
                PairGain::relay(real.a_sr[k], real.a_rd[m], real.a_sd[k])
            } else {
                PairGain::direct(real.a_sd[k])
            }
        })
        .collect();
    let breakpoints: Vec<f64> = pairing
        .pairs()
        .map(|(k, m)| {
            if !opts[k].relay_capable {
                0.0
            } else if real.a_sd[k] > 0.0 {
                real.a_rd[m] / real.a_sd[k]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let ctx = RefineCtx {
        real,
        pairing,
        opts,
        gains,
        breakpoints,
        budgets: *budgets,
    };
    let pr = budgets.relay;
    let any_capable = opts.iter().any(|o| o.relay_capable);

    let finish = |r: f64, e: Eval, exhausted: bool| -> Result<RefineOutcome> {
        let alloc = crate::fixed::assemble(pairing, &e.channels, &e.powers);
        outcome(real, alloc, e.price, r, 0, exhausted, budgets, extra_allowed)
    };

    if pr == 0.0 || !any_capable {
        let none = vec![false; opts.len()];
        let e = ctx.eval(0.0, &none)?;
        let r = if any_capable { RATIO_CAP } else { 0.0 };
        return finish(r, e, false);
    }

    let mut lo = 0.0;
    let e0 = ctx.eval(0.0, &ctx.mask_above(0.0))?;
    if e0.relay_used <= pr {
        return finish(0.0, e0, false);
    }

    let mut bps: Vec<f64> = ctx
        .breakpoints
        .iter()
        .zip(opts)
        .filter(|(b, o)| o.relay_capable && b.is_finite())
        .map(|(b, _)| *b)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    for &b in &bps {
        let relay = ctx.mask_above(lo);
        let at_b = ctx.eval(b, &relay)?;
        if at_b.relay_used <= pr {
            let (r, e) = ctx.bisect(lo, b, &relay)?;
            return finish(r, e, false);
        }
        let after = ctx.eval(b, &ctx.mask_above(b))?;
        if after.relay_used <= pr {
            return intermediate_at(&ctx, b, &relay, at_b, extra_allowed);
        }
        lo = b;
    }

    // only pairs with a dead SD link still relay; their breakpoint is infinite
    let relay = ctx.mask_above(lo);
    let mut hi = (2.0 * lo).max(1.0);
    loop {
        let e = ctx.eval(hi, &relay)?;
        if e.relay_used <= pr {
            break;
        }
        if hi >= RATIO_CAP {
            return finish(hi, e, true);
        }
        lo = hi;
        hi *= 2.0;
    }
    let (r, e) = ctx.bisect(lo, hi, &relay)?;
    finish(r, e, false)
}

/// Crossing on the breakpoint `b`: pairs there are indifferent between
/// relaying and the direct link at equal cost-space spend, so they take
/// exactly the relay power the others leave over.
fn intermediate_at(
    ctx: &RefineCtx<'_>,
    b: f64,
    relay: &[bool],
    e: Eval,
    extra_allowed: bool,
) -> Result<RefineOutcome> {
    let mut alloc = crate::fixed::assemble(ctx.pairing, &e.channels, &e.powers);
    let on_b = |k: usize| relay[k] && ctx.breakpoints[k] == b;
    let others: f64 = (0..relay.len()).filter(|&k| relay[k] && !on_b(k)).map(|k| alloc.p_r[k]).sum();
    let mut need = (ctx.budgets.relay - others).max(0.0);
    let mut intermediate = 0;
    for k in (0..relay.len()).filter(|&k| on_b(k)) {
        let full = alloc.p_r[k];
        let spend = alloc.p_s[k] + b * full;
        if need >= full {
            need -= full;
            continue;
        }
        let pr = need;
        need = 0.0;
        alloc.p_r[k] = pr;
        alloc.p_s[k] = spend - b * pr;
        alloc.modes[k] = if pr > 0.0 {
            intermediate += 1;
            PairMode::Intermediate
        } else {
            PairMode::DirectLink
        };
    }
    outcome(ctx.real, alloc, e.price, b, intermediate, false, &ctx.budgets, extra_allowed)
}

#[allow(clippy::too_many_arguments)]
fn outcome(
    real: &ChannelRealization,
    mut alloc: Allocation,
    price: f64,
    r: f64,
    intermediate_pairs: usize,
    bracket_exhausted: bool,
    budgets: &IndividualBudgets,
    extra_allowed: bool,
) -> Result<RefineOutcome> {
    // rounding of the combined budget can leave either side a few ulps over
    let src = alloc.source_power();
    let rly = alloc.relay_power();
    let mut scale: f64 = 1.0;
    if src > budgets.source {
        scale = scale.min(budgets.source / src);
    }
    if rly > budgets.relay {
        scale = scale.min(budgets.relay / rly);
    }
    if scale < 1.0 {
        for v in [&mut alloc.p_s, &mut alloc.p_r, &mut alloc.q_s] {
            v.iter_mut().for_each(|x| *x *= scale);
        }
    }
    debug_assert!(alloc.source_power() <= budgets.source + FEASIBILITY_TOL);
    let rate = weighted_sum_rate(real, &alloc, extra_allowed)?;
    Ok(RefineOutcome {
        rate,
        allocation: alloc,
        mu_s: price,
        mu_r: r * price,
        intermediate_pairs,
        bracket_exhausted,
    })
}

struct IndIteration<'a> {
    real: &'a ChannelRealization,
    budgets: IndividualBudgets,
    state: DualStateIndividual,
    scores: ScoreMatrix,
    alpha_at_scores: Vec<f64>,
    selection: Vec<usize>,
    src: Vec<f64>,
    rly: Vec<f64>,
    notes: Vec<String>,
}

impl IndIteration<'_> {
    fn dual_at(&self, mu_s: f64, mu_r: f64, alpha: &[f64]) -> f64 {
        let m = self.real.m();
        let (mu_s, mu_r) = (mu_s.max(PRICE_FLOOR), mu_r.max(PRICE_FLOOR));
        let mut rows = 0.0;
        for k in 0..m {
            let mut best = f64::NEG_INFINITY;
            for c in 0..m {
                let g = pair_gain_ind(self.real.a_sr[k], self.real.a_sd[k], self.real.a_rd[c], mu_s, mu_r);
                let v = closed_form_value(self.real.w[k], g.gain, price(&g, mu_s, mu_r)).1 - alpha[c];
                best = best.max(v);
            }
            rows += best;
        }
        rows + mu_s * self.budgets.source + mu_r * self.budgets.relay + alpha.iter().sum::<f64>()
    }
}

impl DualIteration for IndIteration<'_> {
    fn step(&mut self, iter: usize, step: f64) -> StepOutcome {
        let real = self.real;
        let m = real.m();
        let mu_s = self.state.mu_s.max(PRICE_FLOOR);
        let mu_r = self.state.mu_r.max(PRICE_FLOOR);
        for k in 0..m {
            for c in 0..m {
                let g = pair_gain_ind(real.a_sr[k], real.a_sd[k], real.a_rd[c], mu_s, mu_r);
                let (p, v) = closed_form_value(real.w[k], g.gain, price(&g, mu_s, mu_r));
                self.src[k * m + c] = g.c_s * p;
                self.rly[k * m + c] = g.c_r * p;
                self.scores.set(k, c, v - self.state.alpha[c]);
            }
        }
        self.selection = greedy_pairing(&self.scores);
        let src_used: f64 = self.selection.iter().enumerate().map(|(k, &c)| self.src[k * m + c]).sum();
        let rly_used: f64 = self.selection.iter().enumerate().map(|(k, &c)| self.rly[k * m + c]).sum();
        let rows: f64 = (0..m)
            .map(|k| self.scores.row(k).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        let dual = rows
            + mu_s * self.budgets.source
            + mu_r * self.budgets.relay
            + self.state.alpha.iter().sum::<f64>();
        let counts = column_counts(&self.selection, m);
        self.alpha_at_scores.clone_from(&self.state.alpha);

        let next = DualStateIndividual {
            mu_s: (self.state.mu_s - step * (self.budgets.source - src_used)).max(0.0),
            mu_r: (self.state.mu_r - step * (self.budgets.relay - rly_used)).max(0.0),
            alpha: self
                .state
                .alpha
                .iter()
                .zip(&counts)
                .map(|(a, &c)| a - step * (1.0 - c as f64))
                .collect(),
            iter: iter + 1,
        };
        let trace = TraceRow {
            iter,
            mu: self.state.mu_s,
            mu_r: Some(self.state.mu_r),
            alpha_norm: norm(&self.state.alpha),
            power_sum: src_used,
            dual_value: dual,
        };
        let point = DualPoint { mus: vec![next.mu_s, next.mu_r], alpha: next.alpha.clone() };
        self.state = next;
        StepOutcome {
            dual_value: dual,
            point,
            trace,
        }
    }

    fn amend_and_evaluate(&mut self) -> Result<Candidate> {
        let pairing = amend_pairing(&self.selection, &self.scores, &self.alpha_at_scores);
        let out = zero_crossing_refine(self.real, &pairing, &self.budgets)?;
        note_refine(&mut self.notes, &out);
        let dual_hint = (out.mu_s > 0.0 && out.mu_s.is_finite())
            .then(|| self.dual_at(out.mu_s, out.mu_r, &self.alpha_at_scores));
        Ok(Candidate {
            rate: out.rate,
            allocation: out.allocation,
            dual_hint,
        })
    }
}

pub(crate) fn note_refine(notes: &mut Vec<String>, out: &RefineOutcome) {
    let mut push = |s: &str| {
        if !notes.iter().any(|n| n == s) {
            notes.push(s.to_string());
        }
    };
    if out.bracket_exhausted {
        push("zero-crossing search hit the ratio cap");
    }
    if out.intermediate_pairs > 1 {
        push("more than one pair in intermediate mode");
    }
}

/// Solves the individual-budget problem.
pub fn solve_individual(
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
    let mut it = IndIteration {
        real,
        budgets: *budgets,
        state: DualStateIndividual { mu_s, mu_r, alpha, iter: 1 },
        scores: ScoreMatrix::zeros(m),
        alpha_at_scores: vec![0.0; m],
        selection: vec![0; m],
        src: vec![0.0; m * m],
        rly: vec![0.0; m * m],
        notes: Vec::new(),
    };
    let start = DualPoint { mus: vec![it.state.mu_s, it.state.mu_r], alpha: it.state.alpha.clone() };
    let res = run_schedule(&mut it, cfg, start)?;
    let (primal_rate, allocation) = res.best;
    let mut notes = it.notes;
    if !res.converged {
        notes.push(format!("no convergence within {} iterations", cfg.max_iter_hard));
    }
    Ok(SolveReport {
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
    })
}
