//! Machinery shared by the dual subgradient solvers: configuration, the
//! score matrix, greedy row selection, the amendment step that repairs the
//! greedy pairing into a permutation, and the outer iteration schedule.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rate::{Allocation, PairingMatrix};

/// Floor applied to multipliers wherever they divide.
pub const PRICE_FLOOR: f64 = 1e-12;
/// Denominator guard of the relative-change convergence test.
const REL_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative change of every multiplier below which the amendment phase starts.
    pub eps_converge: f64,
    /// Fraction of the trigger iteration count run after the trigger.
    pub extra_iter_frac: f64,
    /// Step sizes are `step_scale / sqrt(i)`.
    pub step_scale: f64,
    /// Iteration cap when the trigger never fires.
    pub max_iter_hard: usize,
    /// Multipliers start uniformly in this range.
    pub init_range: (f64, f64),
    pub record_trace: bool,
    /// The convergence test compares the multipliers with those this many
    /// iterations earlier.
    pub trigger_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_converge: 0.01,
            extra_iter_frac: 0.10,
            step_scale: 0.05,
            max_iter_hard: 100_000,
            init_range: (0.0, 2.0),
            record_trace: false,
            trigger_window: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_converge >= 0.0
            && self.extra_iter_frac >= 0.0
            && self.step_scale > 0.0
            && self.max_iter_hard >= 1
            && self.trigger_window >= 1
            && self.init_range.0 <= self.init_range.1
            && self.init_range.0 >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid solver configuration {self:?}")))
        }
    }

    pub(crate) fn step(&self, iter: usize) -> f64 {
        self.step_scale / (iter as f64).sqrt()
    }

    pub(crate) fn rng(&self, seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub(crate) fn draw_init<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.init_range;
        lo + (hi - lo) * rng.random::<f64>()
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// `mu`, or `mu_S` under individual budgets.
    pub mu: f64,
    /// `mu_R` under individual budgets.
    pub mu_r: Option<f64>,
    pub alpha_norm: f64,
    /// Power consumed by the greedy selection (source part under individual budgets).
    pub power_sum: f64,
    pub dual_value: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub pairing: PairingMatrix,
    pub allocation: Allocation,
    /// Weighted sum rate of `allocation`, nats.
    pub primal_rate: f64,
    /// Smallest dual function value visited, including the water prices of
    /// amended candidates.
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub trigger_iter: Option<usize>,
    /// False when the trigger never fired within `max_iter_hard`.
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    pub notes: Vec<String>,
}

/// Dense row-major `M x M` matrix of pair scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    m: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn zeros(m: usize) -> Self {
        Self { m, data: vec![0.0; m * m] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        assert!(rows.iter().all(|r| r.len() == m), "score matrix must be square");
        Self {
            m,
            data: rows.concat(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.data[k * self.m + m]
    }

    #[inline]
    pub fn set(&mut self, k: usize, m: usize, v: f64) {
        self.data[k * self.m + m] = v;
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }
}

/// Index of the largest entry; the smallest index wins ties.
pub(crate) fn argmax(xs: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in xs.into_iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// Each row picks its best column. Columns may collide.
pub fn greedy_pairing(scores: &ScoreMatrix) -> Vec<usize> {
    (0..scores.m())
        .map(|k| argmax(scores.row(k).iter().copied()).unwrap_or(0))
        .collect()
}

pub fn column_counts(t: &[usize], m: usize) -> Vec<usize> {
    let mut c = vec![0; m];
    for &j in t {
        c[j] += 1;
    }
    c
}

/// Repairs a row selection into a permutation.
///
/// Columns are visited in index order. An over-subscribed column keeps its
/// highest-scoring row; every other row is moved, one at a time, to the
/// empty column whose multiplier is closest to the crowded column's, and
/// among the remaining candidate rows the one scoring highest on that empty
/// column is the one moved.
pub fn amend_pairing(t: &[usize], scores: &ScoreMatrix, alpha: &[f64]) -> PairingMatrix {
    let m = t.len();
    let mut t = t.to_vec();
    let mut counts = column_counts(&t, m);
    for j in 0..m {
        if counts[j] <= 1 {
            continue;
        }
        let rows: Vec<usize> = (0..m).filter(|&r| t[r] == j).collect();
        let keeper = rows[argmax(rows.iter().map(|&s| scores.get(s, j))).unwrap()];
        while counts[j] > 1 {
            let empty: Vec<usize> = (0..m).filter(|&c| counts[c] == 0).collect();
            // by counting, a crowded column implies an empty one
            assert!(!empty.is_empty(), "amendment found no empty column");
            let target = empty[argmax(empty.iter().map(|&c| -(alpha[j] - alpha[c]).abs())).unwrap()];
            let movable: Vec<usize> = (0..m).filter(|&r| t[r] == j && r != keeper).collect();
            let mover = movable[argmax(movable.iter().map(|&r| scores.get(r, target))).unwrap()];
            t[mover] = target;
            counts[j] -= 1;
            counts[target] += 1;
        }
    }
    PairingMatrix::new(t).expect("amendment yields a permutation")
}

pub(crate) fn relative_change(old: f64, new: f64) -> f64 {
    (new - old).abs() / new.abs().max(REL_GUARD)
}

pub(crate) fn relative_change_vec(old: &[f64], new: &[f64]) -> f64 {
    let diff = old.iter().zip(new).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    diff / norm(new).max(REL_GUARD)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `[w/(2 price) - 1/a]^+`, zero for a dead channel.
#[inline]
pub(crate) fn closed_form_power(w: f64, gain: f64, price: f64) -> f64 {
    if w <= 0.0 || gain <= 0.0 {
        return 0.0;
    }
    (w / (2.0 * price.max(PRICE_FLOOR)) - 1.0 / gain).max(0.0)
}

/// Lagrangian contribution `(w/2) ln(1 + a p) - price p` at the closed-form power.
#[inline]
pub(crate) fn closed_form_value(w: f64, gain: f64, price: f64) -> (f64, f64) {
    let p = closed_form_power(w, gain, price);
    (p, 0.5 * w * (gain * p).ln_1p() - price * p)
}

/// Multipliers after one update: the budget prices, then the column prices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DualPoint {
    pub mus: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl DualPoint {
    /// Largest relative change of any budget price and of the column-price
    /// vector, from `older` to `self`.
    fn relative_change_from(&self, older: &DualPoint) -> f64 {
        let mu = self
            .mus
            .iter()
            .zip(&older.mus)
            .map(|(new, old)| relative_change(*old, *new))
            .fold(0.0, f64::max);
        mu.max(relative_change_vec(&older.alpha, &self.alpha))
    }
}

/// What one dual iteration reports to the schedule.
pub(crate) struct StepOutcome {
    pub dual_value: f64,
    pub point: DualPoint,
    pub trace: TraceRow,
}

/// A dual solver driven by [`run_schedule`].
pub(crate) trait DualIteration {
    /// Computes scores, selection and powers at the current multipliers,
    /// then takes one subgradient step. Keeps what `amend_and_evaluate`
    /// needs from this iteration.
    fn step(&mut self, iter: usize, step: f64) -> StepOutcome;

    /// Repairs the last selection into a permutation and returns a feasible
    /// allocation with its rate.
    fn amend_and_evaluate(&mut self) -> Result<Candidate>;
}

/// An amended primal candidate.
pub(crate) struct Candidate {
    pub rate: f64,
    pub allocation: Allocation,
    /// Dual function value at the candidate's water prices and the current
    /// column multipliers, when available. Always a valid upper bound.
    pub dual_hint: Option<f64>,
}

pub(crate) struct ScheduleResult {
    pub best: (f64, Allocation),
    pub dual_value: f64,
    pub iterations: usize,
    pub trigger_iter: Option<usize>,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Outer loop: iterate until every multiplier moves by less than
/// `eps_converge` (relative), then keep iterating for another
/// `extra_iter_frac` of the iterations so far, amending and evaluating each
/// time and keeping the best feasible result.
///
/// Without convergence the amendment phase is forced so that it ends at
/// `max_iter_hard`, and the result is flagged as not converged.
pub(crate) fn run_schedule<D: DualIteration>(
    solver: &mut D,
    cfg: &SolverConfig,
    start: DualPoint,
) -> Result<ScheduleResult> {
    let mut history = VecDeque::with_capacity(cfg.trigger_window + 1);
    history.push_back(start);
    let mut best: Option<(f64, Allocation)> = None;
    let mut dual_min = f64::INFINITY;
    let mut trace = Vec::new();
    let mut trigger_iter = None;
    let mut max_it = usize::MAX;
    let forced_start = ((cfg.max_iter_hard as f64 / (1.0 + cfg.extra_iter_frac)).floor() as usize).max(1);
    let mut amending = false;
    let mut i = 1;
    let mut last = 0;
    while i < max_it && i <= cfg.max_iter_hard {
        let out = solver.step(i, cfg.step(i));
        last = i;
        if history.len() > cfg.trigger_window {
            history.pop_front();
        }
        let converged = history.len() == cfg.trigger_window
            && out.point.relative_change_from(&history[0]) < cfg.eps_converge;
        history.push_back(out.point);
        dual_min = dual_min.min(out.dual_value);
        if cfg.record_trace {
            trace.push(out.trace);
        }
        if !amending && converged {
            trigger_iter = Some(i);
            max_it = ((1.0 + cfg.extra_iter_frac) * i as f64).floor() as usize;
        }
        amending |= converged || i >= forced_start;
        if amending {
            let cand = solver.amend_and_evaluate()?;
            dual_min = dual_min.min(cand.dual_hint.unwrap_or(f64::INFINITY));
            if best.as_ref().is_none_or(|b| cand.rate > b.0) {
                best = Some((cand.rate, cand.allocation));
            }
        }
        i += 1;
    }
    Ok(ScheduleResult {
        best: best.expect("at least one amended candidate"),
        dual_value: dual_min,
        iterations: last,
        trigger_iter,
        converged: trigger_iter.is_some(),
        trace,
    })
}
