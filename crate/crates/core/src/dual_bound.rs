//! Exact minimum of the dual function, for measuring duality gaps.
//!
//! For fixed budget prices the minimum of the dual function over the column
//! prices is the linear-programming dual of an assignment problem, whose
//! optimum is integral. So the dual reduces to
//! `D(mu) = max_perm sum_k V[k][perm k](mu) + mu . budgets`, which is convex
//! in the budget prices and is minimized here by golden-section search.

use crate::channel::{ChannelRealization, PairGain};
use crate::dual::{closed_form_value, ScoreMatrix, PRICE_FLOOR};
use crate::error::Result;
use crate::problem::PowerConstraint;

/// Maximum-weight perfect assignment of a square matrix by the shortest
/// augmenting path method with potentials, `O(M^3)`. Returns the total
/// weight and the column chosen by each row.
pub fn max_weight_assignment(w: &ScoreMatrix) -> (f64, Vec<usize>) {
    let n = w.m();
    let inf = f64::INFINITY;
    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -w.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().map(|(k, &m)| w.get(k, m)).sum();
    (total, perm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBound {
    pub value: f64,
    /// `mu`, or `mu_S` under individual budgets.
    pub mu: f64,
    pub mu_r: Option<f64>,
}

/// Lagrangian contribution of every candidate pair at the given prices,
/// maximized over the pair's modes.
fn pair_values(real: &ChannelRealization, mu_s: f64, mu_r: Option<f64>, extra: bool) -> ScoreMatrix {
    let m = real.m();
    let mut out = ScoreMatrix::zeros(m);
    let direct: Vec<f64> = (0..m).map(|k| closed_form_value(real.w[k], real.a_sd[k], mu_s).1).collect();
    for k in 0..m {
        for c in 0..m {
            let relay = if real.a_sr[k] > real.a_sd[k] {
                let g = PairGain::relay(real.a_sr[k], real.a_rd[c], real.a_sd[k]);
                let price = match mu_r {
                    None => mu_s,
                    Some(mu_r) => g.c_s * mu_s + g.c_r * mu_r,
                };
                closed_form_value(real.w[k], g.gain, price).1
            } else {
                f64::NEG_INFINITY
            };
            let direct_value = if extra { direct[k] + direct[c] } else { direct[k] };
            out.set(k, c, relay.max(direct_value));
        }
    }
    out
}

const GOLDEN_ITERS: usize = 90;

/// Minimizes a convex function on `[lo, hi]`; returns `(argmin, min)`.
fn golden_min(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    // the endpoints are candidates too when the minimum sits on the boundary
    [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((lo, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

/// Smallest value of the dual function, to golden-section precision. Every
/// value it reports is a dual function value, hence an upper bound on the
/// optimum.
pub fn dual_optimum(real: &ChannelRealization, constraint: &PowerConstraint, extra: bool) -> Result<DualBound> {
    real.validate()?;
    constraint.validate()?;
    let m = real.m();
    // above these prices every pair is dry and the dual only grows
    let mut hi_s: f64 = 1.0;
    let mut hi_r: f64 = 1.0;
    for k in 0..m {
        let a = real.a_sd[k].max(real.a_sr[k]);
        hi_s = hi_s.max(real.w[k] * a);
        if real.a_sr[k] > real.a_sd[k] {
            for c in 0..m {
                let g = PairGain::relay(real.a_sr[k], real.a_rd[c], real.a_sd[k]);
                if g.c_r > 0.0 {
                    hi_r = hi_r.max(real.w[k] * g.gain / g.c_r);
                }
            }
        }
    }
    let assign = |mu_s: f64, mu_r: Option<f64>| max_weight_assignment(&pair_values(real, mu_s, mu_r, extra)).0;
    Ok(match *constraint {
        PowerConstraint::Total(p) => {
            let (mu, value) = golden_min(PRICE_FLOOR, hi_s, |mu| assign(mu, None) + mu * p);
            DualBound { value, mu, mu_r: None }
        }
        PowerConstraint::Individual(b) => {
            let inner = |mu_s: f64| {
                golden_min(PRICE_FLOOR, hi_r, |mu_r| assign(mu_s, Some(mu_r)) + mu_s * b.source + mu_r * b.relay)
            };
            let (mu, value) = golden_min(PRICE_FLOOR, hi_s, |mu_s| inner(mu_s).1);
            DualBound { value, mu, mu_r: Some(inner(mu).0) }
        }
    })
}
