//! Weighted water-filling over parallel channels under one priced budget.
//!
//! Maximizes `sum_i (w_i/2) ln(1 + a_i p_i)` subject to `sum_i c_i p_i = B`,
//! `p_i >= 0`. The optimum is `p_i = [w_i/(2 mu c_i) - 1/a_i]^+`; the water
//! price `mu` is found exactly from the sorted activation thresholds, since
//! the spent budget is piecewise linear in `1/(2 mu)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillProblem {
    pub gains: Vec<f64>,
    pub weights: Vec<f64>,
    /// Per-unit power price of each channel; all ones for plain water-filling.
    pub costs: Vec<f64>,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub powers: Vec<f64>,
    /// Lagrange multiplier of the budget. `f64::INFINITY` when the budget is
    /// zero and no channel is usable.
    pub water_price: f64,
}

impl WaterfillProblem {
    pub fn new(gains: Vec<f64>, weights: Vec<f64>, budget: f64) -> Self {
        let costs = vec![1.0; gains.len()];
        Self {
            gains,
            weights,
            costs,
            budget,
        }
    }

    pub fn with_costs(mut self, costs: Vec<f64>) -> Self {
        self.costs = costs;
        self
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.gains.len();
        if self.weights.len() != n || self.costs.len() != n {
            return Err(Error::Domain("water-filling vectors differ in length".into()));
        }
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(Error::Domain(format!("budget {} must be finite and >= 0", self.budget)));
        }
        for i in 0..n {
            let (a, w, c) = (self.gains[i], self.weights[i], self.costs[i]);
            if !(a.is_finite() && a >= 0.0 && w.is_finite() && w >= 0.0 && c.is_finite() && c > 0.0) {
                return Err(Error::Domain(format!(
                    "channel {i}: gain {a}, weight {w}, cost {c} out of range"
                )));
            }
        }
        Ok(())
    }

    /// Objective value of `powers`.
    pub fn utility(&self, powers: &[f64]) -> f64 {
        self.gains
            .iter()
            .zip(&self.weights)
            .zip(powers)
            .map(|((a, w), p)| 0.5 * w * (a * p).ln_1p())
            .sum()
    }

    /// Priced spend `sum_i c_i p_i`.
    pub fn spend(&self, powers: &[f64]) -> f64 {
        self.costs.iter().zip(powers).map(|(c, p)| c * p).sum()
    }
}

/// Solves `prob` exactly (up to rounding).
pub fn waterfill(prob: &WaterfillProblem) -> Result<WaterfillSolution> {
    prob.validate()?;
    let n = prob.len();

    // activation threshold of 1/(2 mu) for each usable channel
    let mut order: Vec<(f64, usize)> = (0..n)
        .filter(|&i| prob.weights[i] * prob.gains[i] > 0.0)
        .map(|i| (prob.costs[i] / (prob.weights[i] * prob.gains[i]), i))
        .collect();

    if prob.budget == 0.0 {
        let water_price = order
            .iter()
            .map(|&(t, _)| 1.0 / (2.0 * t))
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(WaterfillSolution {
            powers: vec![0.0; n],
            water_price: if order.is_empty() { f64::INFINITY } else { water_price },
        });
    }
    if order.is_empty() {
        return Err(Error::InfeasibleBudget(prob.budget));
    }
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut weight_sum = 0.0;
    let mut offset = 0.0;
    let mut level = 0.0;
    for (idx, &(_, i)) in order.iter().enumerate() {
        weight_sum += prob.weights[i];
        offset += prob.costs[i] / prob.gains[i];
        level = (prob.budget + offset) / weight_sum;
        match order.get(idx + 1) {
            Some(&(next, _)) if level > next => continue,
            _ => break,
        }
    }

    let mut powers = vec![0.0; n];
    for &(threshold, i) in &order {
        if level > threshold {
            powers[i] = prob.weights[i] * level / prob.costs[i] - 1.0 / prob.gains[i];
        }
    }
    Ok(WaterfillSolution {
        powers,
        water_price: 1.0 / (2.0 * level),
    })
}

/// Largest violation of the water-filling KKT system at `powers`.
///
/// The price is estimated as the mean marginal utility per unit cost over the
/// active channels; stationarity deviations are relative to it, the budget
/// mismatch is relative to `max(1, B)`. Zero exactly at the optimum.
pub fn kkt_residual(prob: &WaterfillProblem, powers: &[f64]) -> f64 {
    let n = prob.len();
    let marginal: Vec<f64> = (0..n)
        .map(|i| {
            let (a, w, c) = (prob.gains[i], prob.weights[i], prob.costs[i]);
            w * a / (2.0 * c * (1.0 + a * powers[i]))
        })
        .collect();
    let active: Vec<usize> = (0..n).filter(|&i| powers[i] > 0.0).collect();
    let price = if active.is_empty() {
        marginal.iter().copied().fold(0.0, f64::max)
    } else {
        active.iter().map(|&i| marginal[i]).sum::<f64>() / active.len() as f64
    };
    let scale = if price > 0.0 { price } else { 1.0 };

    let mut res: f64 = 0.0;
    for i in 0..n {
        if powers[i] < 0.0 {
            res = res.max(-powers[i]);
        } else if powers[i] > 0.0 {
            res = res.max((marginal[i] - price).abs() / scale);
        } else {
            res = res.max((marginal[i] - price).max(0.0) / scale);
        }
    }
    let mismatch = (prob.spend(powers) - prob.budget).abs() / prob.budget.max(1.0);
    res.max(mismatch)
}
