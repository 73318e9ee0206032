//! Dual subgradient solver for the total power budget.

use crate::channel::{ChannelRealization, PairGain};
use crate::dual::{
    amend_pairing, closed_form_power, closed_form_value, greedy_pairing, column_counts, norm,
    run_schedule, Candidate, DualIteration, DualPoint, ScoreMatrix, SolveReport,
    SolverConfig, StepOutcome, TraceRow, PRICE_FLOOR,
};
use crate::error::{Error, Result};
use crate::fixed::total_fixed_priced;
use crate::problem::check_power;

#[derive(Debug, Clone, PartialEq)]
pub struct DualStateTotal {
    pub mu: f64,
    pub alpha: Vec<f64>,
    pub iter: usize,
}

fn pair_gains(real: &ChannelRealization) -> Vec<PairGain> {
    let m = real.m();
    (0..m * m).map(|i| real.pair_total(i / m, i % m)).collect()
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("mu must be positive and finite, got {mu}")))
    }
}

/// Closed-form power of every candidate pair at price `mu`.
pub fn power_given_duals(real: &ChannelRealization, mu: f64) -> Result<ScoreMatrix> {
    check_mu(mu)?;
    let m = real.m();
    let mut out = ScoreMatrix::zeros(m);
    for (i, g) in pair_gains(real).iter().enumerate() {
        out.set(i / m, i % m, closed_form_power(real.w[i / m], g.gain, mu));
    }
    Ok(out)
}

/// `X[k][m]`: Lagrangian contribution of pair (k, m) minus the column price.
pub fn score_x(real: &ChannelRealization, mu: f64, alpha: &[f64]) -> Result<ScoreMatrix> {
    check_mu(mu)?;
    let m = real.m();
    let mut out = ScoreMatrix::zeros(m);
    for (i, g) in pair_gains(real).iter().enumerate() {
        let (_, v) = closed_form_value(real.w[i / m], g.gain, mu);
        out.set(i / m, i % m, v - alpha[i % m]);
    }
    Ok(out)
}

/// Dual function value at `(mu, alpha)`.
pub fn dual_value(real: &ChannelRealization, mu: f64, alpha: &[f64], power: f64) -> Result<f64> {
    let x = score_x(real, mu, alpha)?;
    Ok(dual_from_scores(&x, mu, alpha, power))
}

fn dual_from_scores(x: &ScoreMatrix, mu: f64, alpha: &[f64], power: f64) -> f64 {
    let rows: f64 = (0..x.m())
        .map(|k| x.row(k).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    rows + mu * power + alpha.iter().sum::<f64>()
}

pub fn subgradient_step(
    state: &DualStateTotal,
    power_sum: f64,
    col_sums: &[usize],
    power: f64,
    iter: usize,
    step_scale: f64,
) -> DualStateTotal {
    let step = step_scale / (iter as f64).sqrt();
    DualStateTotal {
        mu: (state.mu - step * (power - power_sum)).max(0.0),
        alpha: state
            .alpha
            .iter()
            .zip(col_sums)
            .map(|(a, &c)| a - step * (1.0 - c as f64))
            .collect(),
        iter: iter + 1,
    }
}

struct TotalIteration<'a> {
    real: &'a ChannelRealization,
    gains: Vec<PairGain>,
    power: f64,
    state: DualStateTotal,
    scores: ScoreMatrix,
    alpha_at_scores: Vec<f64>,
    selection: Vec<usize>,
}

impl TotalIteration<'_> {
    fn dual_at(&self, mu: f64, alpha: &[f64]) -> f64 {
        let m = self.real.m();
        let rows: f64 = (0..m)
            .map(|k| {
                (0..m)
                    .map(|c| closed_form_value(self.real.w[k], self.gains[k * m + c].gain, mu).1 - alpha[c])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        rows + mu * self.power + alpha.iter().sum::<f64>()
    }
}

impl DualIteration for TotalIteration<'_> {
    fn step(&mut self, iter: usize, step: f64) -> StepOutcome {
        let m = self.real.m();
        let mu = self.state.mu.max(PRICE_FLOOR);
        let mut powers = vec![0.0; m * m];
        for (i, g) in self.gains.iter().enumerate() {
            let (p, v) = closed_form_value(self.real.w[i / m], g.gain, mu);
            powers[i] = p;
            self.scores.set(i / m, i % m, v - self.state.alpha[i % m]);
        }
        self.selection = greedy_pairing(&self.scores);
        let power_sum: f64 = self.selection.iter().enumerate().map(|(k, &c)| powers[k * m + c]).sum();
        let dual = dual_from_scores(&self.scores, mu, &self.state.alpha, self.power);
        let counts = column_counts(&self.selection, m);
        self.alpha_at_scores.clone_from(&self.state.alpha);

        let mu_new = (self.state.mu - step * (self.power - power_sum)).max(0.0);
        let alpha_new: Vec<f64> = self
            .state
            .alpha
            .iter()
            .zip(&counts)
            .map(|(a, &c)| a - step * (1.0 - c as f64))
            .collect();
        let trace = TraceRow {
            iter,
            mu: self.state.mu,
            mu_r: None,
            alpha_norm: norm(&self.state.alpha),
            power_sum,
            dual_value: dual,
        };
        let point = DualPoint { mus: vec![mu_new], alpha: alpha_new.clone() };
        self.state = DualStateTotal {
            mu: mu_new,
            alpha: alpha_new,
            iter: iter + 1,
        };
        StepOutcome {
            dual_value: dual,
            point,
            trace,
        }
    }

    fn amend_and_evaluate(&mut self) -> Result<Candidate> {
        let pairing = amend_pairing(&self.selection, &self.scores, &self.alpha_at_scores);
        let (rate, allocation, price) = total_fixed_priced(self.real, &pairing, self.power)?;
        let dual_hint = (price > 0.0 && price.is_finite())
            .then(|| self.dual_at(price, &self.alpha_at_scores));
        Ok(Candidate { rate, allocation, dual_hint })
    }
}

/// Solves the total-power problem: subgradient iterations on the dual, then
/// amendment and water-filling on the final stretch.
pub fn solve_total(real: &ChannelRealization, power: f64, cfg: &SolverConfig, seed: u64) -> Result<SolveReport> {
    real.validate()?;
    check_power(power)?;
    cfg.validate()?;
    let m = real.m();
    let mut rng = cfg.rng(seed);
    let mu = cfg.draw_init(&mut rng);
    let alpha = (0..m).map(|_| cfg.draw_init(&mut rng)).collect();
    let mut it = TotalIteration {
        real,
        gains: pair_gains(real),
        power,
        state: DualStateTotal { mu, alpha, iter: 1 },
        scores: ScoreMatrix::zeros(m),
        alpha_at_scores: vec![0.0; m],
        selection: vec![0; m],
    };
    let start = DualPoint { mus: vec![it.state.mu], alpha: it.state.alpha.clone() };
    let res = run_schedule(&mut it, cfg, start)?;
    let (primal_rate, allocation) = res.best;
    let mut notes = Vec::new();
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
