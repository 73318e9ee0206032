//! Monte-Carlo driver: scenario sweeps, duality-gap statistics and
//! concavity probes, with CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{evaluate_baseline, BaselineKind};
use crate::channel::{sample_realization, ChannelRealization, RicianConfig, WeightRule};
use crate::dual::{SolveReport, SolverConfig};
use crate::dual_bound::dual_optimum;
use crate::error::{Error, Result};
use crate::oracle::{self, exhaustive_total};
use crate::problem::{IndividualBudgets, PowerConstraint};
use crate::solver_extra::{solve_extra_individual, solve_extra_total};
use crate::solver_individual::solve_individual;
use crate::solver_total::solve_total;
use crate::validate::validate_allocation;

/// Trials evaluated in parallel before their rows are handed to the sink.
const CHUNK: usize = 256;

/// Relative gap above which a trial counts as a gap exceedance.
pub const GAP_THRESHOLD: f64 = 1e-3;

/// Runs the dual solver matching `constraint`.
pub fn solve(
    real: &ChannelRealization,
    constraint: &PowerConstraint,
    extra_direct: bool,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveReport> {
    match (constraint, extra_direct) {
        (PowerConstraint::Total(p), false) => solve_total(real, *p, cfg, seed),
        (PowerConstraint::Total(p), true) => solve_extra_total(real, *p, cfg, seed),
        (PowerConstraint::Individual(b), false) => solve_individual(real, b, cfg, seed),
        (PowerConstraint::Individual(b), true) => solve_extra_individual(real, b, cfg, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    ScpWeighted,
    ScpUnweighted,
    Fixed,
    /// The exact dual optimum; an upper bound, not an allocation.
    DualBound,
    Oracle,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Proposed,
        Scheme::ScpWeighted,
        Scheme::ScpUnweighted,
        Scheme::Fixed,
        Scheme::DualBound,
        Scheme::Oracle,
    ];

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Scheme::ScpWeighted => Some(BaselineKind::ScpWeighted),
            Scheme::ScpUnweighted => Some(BaselineKind::ScpUnweighted),
            Scheme::Fixed => Some(BaselineKind::FixedIdentity),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.baseline() {
            Some(b) => b.fmt(f),
            None => f.write_str(match self {
                Scheme::Proposed => "proposed",
                Scheme::DualBound => "dual-bound",
                _ => "oracle",
            }),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Its `m` is ignored; each entry of `m_list` is used in turn.
    pub rician: RicianConfig,
    pub constraint: PowerConstraint,
    pub extra_direct: bool,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
}

impl Scenario {
    /// P = 5 total or 4 + 1 individual, M in {4, 8, 16, 32, 64}, 1000
    /// trials, every scheme except the oracle.
    pub fn new(name: &str, mean_sq_sr: f64, mean_sq_sd: f64, mean_sq_rd: f64, individual: bool, extra_direct: bool) -> Self {
        let constraint = if individual {
            PowerConstraint::Individual(IndividualBudgets { source: 4.0, relay: 1.0 })
        } else {
            PowerConstraint::Total(5.0)
        };
        Self {
            name: name.to_string(),
            rician: RicianConfig::new(mean_sq_sr, mean_sq_sd, mean_sq_rd, 1),
            constraint,
            extra_direct,
            m_list: vec![4, 8, 16, 32, 64],
            trials: 1000,
            schemes: Scheme::ALL[..5].to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rician.validate()?;
        self.constraint.validate()?;
        if self.name.is_empty() || self.name.contains(',') {
            return Err(Error::Config("scenario name must be non-empty and free of commas".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return Err(Error::Config("m_list must hold counts >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        let max_m = *self.m_list.iter().max().unwrap();
        let limit = oracle::size_limit(&self.constraint, self.extra_direct).min(6);
        if self.schemes.contains(&Scheme::Oracle) && max_m > limit {
            return Err(Error::Config(format!(
                "oracle requested with M = {max_m}; this constraint allows at most {limit}"
            )));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            let key = k.trim().to_string();
            if kv.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }

        let mut take = |key: &str| kv.remove(key);
        fn num<T: FromStr>(entry: &(usize, String)) -> Result<T> {
            entry.1.parse().map_err(|_| Error::Parse {
                line: entry.0,
                msg: format!("cannot parse `{}`", entry.1),
            })
        }
        fn list<T: FromStr>(entry: &(usize, String)) -> Result<Vec<T>> {
            entry
                .1
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| num(&(entry.0, s.to_string())))
                .collect()
        }
        let need = |e: Option<(usize, String)>, key: &str| {
            e.ok_or_else(|| Error::Config(format!("scenario is missing `{key}`")))
        };

        let name = need(take("name"), "name")?.1;
        let mut sc = Scenario::new(&name, 1.0, 1.0, 1.0, false, false);
        if let Some(e) = take("k_factor") {
            sc.rician.k_factor = num(&e)?;
        }
        sc.rician.mean_sq_sr = num(&need(take("mean_sq_sr"), "mean_sq_sr")?)?;
        sc.rician.mean_sq_sd = num(&need(take("mean_sq_sd"), "mean_sq_sd")?)?;
        sc.rician.mean_sq_rd = num(&need(take("mean_sq_rd"), "mean_sq_rd")?)?;
        if let Some(e) = take("noise_var") {
            sc.rician.noise_var = num(&e)?;
        }
        if let Some(e) = take("weight_rule") {
            sc.rician.weight_rule = match e.1.as_str() {
                "all-one" => WeightRule::AllOne,
                "linear-ramp" => WeightRule::LinearRamp,
                other => {
                    return Err(Error::Parse {
                        line: e.0,
                        msg: format!("weight_rule `{other}` is not all-one or linear-ramp"),
                    })
                }
            };
        }

        let constraint = take("constraint").unwrap_or((0, "total".into()));
        let (power, ps, pr) = (take("power"), take("ps"), take("pr"));
        sc.constraint = match constraint.1.as_str() {
            "total" => {
                if ps.is_some() || pr.is_some() {
                    return Err(Error::Config("ps/pr given with a total constraint".into()));
                }
                PowerConstraint::Total(power.map(|e| num(&e)).transpose()?.unwrap_or(5.0))
            }
            "individual" => {
                if power.is_some() {
                    return Err(Error::Config("power given with an individual constraint".into()));
                }
                PowerConstraint::Individual(IndividualBudgets {
                    source: ps.map(|e| num(&e)).transpose()?.unwrap_or(4.0),
                    relay: pr.map(|e| num(&e)).transpose()?.unwrap_or(1.0),
                })
            }
            other => {
                return Err(Error::Parse {
                    line: constraint.0,
                    msg: format!("constraint `{other}` is not total or individual"),
                })
            }
        };
        if let Some(e) = take("extra_direct") {
            sc.extra_direct = num(&e)?;
        }
        if let Some(e) = take("m_list") {
            sc.m_list = list(&e)?;
        }
        if let Some(e) = take("trials") {
            sc.trials = num(&e)?;
        }
        if let Some(e) = take("schemes") {
            sc.schemes = e
                .1
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_>>()?;
        }
        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(Error::Parse {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        sc.validate()?;
        Ok(sc)
    }

    /// Inverse of [`Scenario::parse`].
    pub fn to_text(&self) -> String {
        let r = &self.rician;
        let join = |v: Vec<String>| v.join(", ");
        let mut s = format!(
            "name = {}\nk_factor = {}\nmean_sq_sr = {}\nmean_sq_sd = {}\nmean_sq_rd = {}\nnoise_var = {}\n",
            self.name, r.k_factor, r.mean_sq_sr, r.mean_sq_sd, r.mean_sq_rd, r.noise_var
        );
        s += match r.weight_rule {
            WeightRule::AllOne => "weight_rule = all-one\n",
            WeightRule::LinearRamp => "weight_rule = linear-ramp\n",
        };
        s += &match self.constraint {
            PowerConstraint::Total(p) => format!("constraint = total\npower = {p}\n"),
            PowerConstraint::Individual(b) => {
                format!("constraint = individual\nps = {}\npr = {}\n", b.source, b.relay)
            }
        };
        s += &format!(
            "extra_direct = {}\nm_list = {}\ntrials = {}\nschemes = {}\n",
            self.extra_direct,
            join(self.m_list.iter().map(|m| m.to_string()).collect()),
            self.trials,
            join(self.schemes.iter().map(|x| x.to_string()).collect())
        );
        s
    }

    fn realization(&self, m: usize, seed: u64) -> Result<ChannelRealization> {
        sample_realization(&RicianConfig { m, ..self.rician.clone() }, seed)
    }
}

/// Stable seed derived from the run seed and the trial coordinates.
pub fn trial_seed(base_seed: u64, scenario: &str, m: usize, trial: usize) -> u64 {
    let digest = Sha256::new()
        .chain_update(base_seed.to_le_bytes())
        .chain_update((scenario.len() as u64).to_le_bytes())
        .chain_update(scenario.as_bytes())
        .chain_update((m as u64).to_le_bytes())
        .chain_update((trial as u64).to_le_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Seed of the multiplier initialization, kept apart from the channel draw.
fn solver_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// One CSV row. Rates in nats, `wall_time` in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub scheme: String,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub rate: f64,
    pub dual_value: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time: f64,
}

fn run_trial(sc: &Scenario, m: usize, trial: usize, base_seed: u64, cfg: &SolverConfig) -> Result<Vec<ResultRow>> {
    let seed = trial_seed(base_seed, &sc.name, m, trial);
    let real = sc.realization(m, seed)?;
    let row = |scheme: Scheme, rate, dual_value, gap, iterations, started: Instant| ResultRow {
        scenario: sc.name.clone(),
        scheme: scheme.to_string(),
        m,
        trial,
        seed,
        rate,
        dual_value,
        gap,
        iterations,
        wall_time: started.elapsed().as_secs_f64(),
    };

    let mut rows = Vec::with_capacity(sc.schemes.len());
    for &scheme in &sc.schemes {
        let started = Instant::now();
        let (c, x) = (&sc.constraint, sc.extra_direct);
        rows.push(match scheme {
            Scheme::Proposed => {
                let rep = solve(&real, c, x, cfg, solver_seed(seed))?;
                validate_allocation(&real, &rep.allocation, c, x)?;
                let iters = Some(rep.iterations);
                row(scheme, rep.primal_rate, Some(rep.dual_value), Some(rep.gap), iters, started)
            }
            Scheme::DualBound => {
                let d = dual_optimum(&real, c, x)?.value;
                row(scheme, d, Some(d), None, None, started)
            }
            Scheme::Oracle => {
                let o = oracle::optimum(&real, c, x)?;
                validate_allocation(&real, &o.allocation, c, x)?;
                row(scheme, o.rate, None, None, None, started)
            }
            _ => {
                let pairing = scheme.baseline().unwrap().pairing(&real);
                let rep = evaluate_baseline(&real, &pairing, c, x)?;
                validate_allocation(&real, &rep.allocation, c, x)?;
                row(scheme, rep.primal_rate, None, None, None, started)
            }
        });
    }
    Ok(rows)
}

/// Runs every (m, trial) of `sc` and hands the rows to `sink` in
/// (m, trial, scheme) order. Trials run on the current rayon pool.
pub fn run_scenario<F>(sc: &Scenario, base_seed: u64, cfg: &SolverConfig, mut sink: F) -> Result<()>
where
    F: FnMut(&ResultRow) -> Result<()>,
{
    sc.validate()?;
    cfg.validate()?;
    for &m in &sc.m_list {
        for start in (0..sc.trials).step_by(CHUNK) {
            let end = (start + CHUNK).min(sc.trials);
            let chunk: Vec<Result<Vec<ResultRow>>> = (start..end)
                .into_par_iter()
                .map(|t| {
                    run_trial(sc, m, t, base_seed, cfg).map_err(|e| Error::Trial {
                        m,
                        trial: t,
                        source: Box::new(e),
                    })
                })
                .collect();
            for rows in chunk {
                for row in rows? {
                    sink(&row)?;
                }
            }
        }
    }
    Ok(())
}

/// [`run_scenario`] collected into memory.
pub fn collect_scenario(sc: &Scenario, base_seed: u64, cfg: &SolverConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    run_scenario(sc, base_seed, cfg, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(rows)
}

/// [`run_scenario`] streamed to CSV, flushing after every chunk of rows.
/// Returns the per-scheme means.
pub fn write_scenario_csv<W: Write>(sc: &Scenario, base_seed: u64, cfg: &SolverConfig, out: W) -> Result<Vec<SchemeMean>> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut rows = Vec::new();
    run_scenario(sc, base_seed, cfg, |row| {
        wtr.serialize(row).map_err(csv_error)?;
        rows.push(row.clone());
        if rows.len() % CHUNK == 0 {
            wtr.flush()?;
        }
        Ok(())
    })?;
    wtr.flush()?;
    Ok(summarize(&rows))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Config(format!("csv: {kind:?}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMean {
    pub scenario: String,
    pub scheme: String,
    pub m: usize,
    pub trials: usize,
    pub mean_rate: f64,
}

/// Mean rate per (scenario, scheme, m), sorted by those keys.
pub fn summarize(rows: &[ResultRow]) -> Vec<SchemeMean> {
    let mut acc: BTreeMap<(String, String, usize), (usize, f64)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry((r.scenario.clone(), r.scheme.clone(), r.m)).or_default();
        e.0 += 1;
        e.1 += r.rate;
    }
    acc.into_iter()
        .map(|((scenario, scheme, m), (n, sum))| SchemeMean {
            scenario,
            scheme,
            m,
            trials: n,
            mean_rate: sum / n as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub m: usize,
    pub trials: usize,
    /// Fraction of trials where the exact dual optimum exceeds the proposed
    /// solver's rate by more than [`GAP_THRESHOLD`] relative.
    pub exceed_fraction: f64,
    /// Same against the exhaustive optimum, when M is small enough.
    pub true_exceed_fraction: Option<f64>,
    /// Same with the dual value the solver reports itself.
    pub reported_exceed_fraction: f64,
    pub mean_relative_gap: f64,
    /// Smallest `dual - primal` seen, over both the reported and the exact dual.
    pub min_gap: f64,
}

struct GapTrial {
    rel_exact: f64,
    rel_true: Option<f64>,
    rel_reported: f64,
    min_gap: f64,
}

fn gap_trial(sc: &Scenario, m: usize, t: usize, base_seed: u64, cfg: &SolverConfig, oracle_limit: usize) -> Result<GapTrial> {
    let (c, x) = (&sc.constraint, sc.extra_direct);
    let seed = trial_seed(base_seed, &sc.name, m, t);
    let real = sc.realization(m, seed)?;
    let rep = solve(&real, c, x, cfg, solver_seed(seed))?;
    validate_allocation(&real, &rep.allocation, c, x)?;
    let exact = dual_optimum(&real, c, x)?.value;
    let rel = |v: f64| (exact - v) / v.max(f64::MIN_POSITIVE);
    let rel_true = if m <= oracle_limit {
        Some(rel(oracle::optimum(&real, c, x)?.rate))
    } else {
        None
    };
    Ok(GapTrial {
        rel_exact: rel(rep.primal_rate),
        rel_true,
        rel_reported: rep.gap / rep.primal_rate.max(f64::MIN_POSITIVE),
        min_gap: rep.gap.min(exact - rep.primal_rate),
    })
}

/// Per-M duality-gap statistics of the proposed solver on `sc`.
pub fn duality_gap_stats(sc: &Scenario, base_seed: u64, cfg: &SolverConfig) -> Result<Vec<GapStats>> {
    sc.validate()?;
    cfg.validate()?;
    let oracle_limit = oracle::size_limit(&sc.constraint, sc.extra_direct);
    sc.m_list
        .iter()
        .map(|&m| {
            let trials: Vec<GapTrial> = (0..sc.trials)
                .into_par_iter()
                .map(|t| {
                    gap_trial(sc, m, t, base_seed, cfg, oracle_limit).map_err(|e| Error::Trial {
                        m,
                        trial: t,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<_>>()?;
            let n = trials.len() as f64;
            let frac = |f: &dyn Fn(&GapTrial) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / n;
            Ok(GapStats {
                m,
                trials: trials.len(),
                exceed_fraction: frac(&|t| t.rel_exact > GAP_THRESHOLD),
                true_exceed_fraction: (m <= oracle_limit)
                    .then(|| frac(&|t| t.rel_true.is_some_and(|r| r > GAP_THRESHOLD))),
                reported_exceed_fraction: frac(&|t| t.rel_reported > GAP_THRESHOLD),
                mean_relative_gap: trials.iter().map(|t| t.rel_exact).sum::<f64>() / n,
                min_gap: trials.iter().map(|t| t.min_gap).fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub powers: Vec<f64>,
    pub rates: Vec<f64>,
    /// Slope change at each interior grid point; the plain second
    /// difference on a unit-spaced grid.
    pub second_diffs: Vec<f64>,
    pub max_second_diff: f64,
    pub exact: bool,
}

impl ConcavityReport {
    /// True iff every second difference is at most `abs_tol + rel_tol * rate`.
    pub fn is_concave(&self, abs_tol: f64, rel_tol: f64) -> bool {
        self.second_diffs
            .iter()
            .zip(&self.rates[1..])
            .all(|(d, r)| *d <= abs_tol + rel_tol * r.abs())
    }
}

/// Largest M probed with the exhaustive optimum instead of the solver.
pub const CONCAVITY_EXACT_LIMIT: usize = 4;

/// Total-power rate over `p_grid` and its second differences.
pub fn concavity_probe(real: &ChannelRealization, p_grid: &[f64], cfg: &SolverConfig, seed: u64) -> Result<ConcavityReport> {
    if p_grid.len() < 3 {
        return Err(Error::Config("power grid needs at least 3 points".into()));
    }
    if p_grid[0] < 0.0 || p_grid.windows(2).any(|w| !(w[1] > w[0])) || !p_grid.iter().all(|p| p.is_finite()) {
        return Err(Error::Config("power grid must be finite, >= 0 and increasing".into()));
    }
    let exact = real.m() <= CONCAVITY_EXACT_LIMIT;
    let rates: Vec<f64> = p_grid
        .iter()
        .map(|&p| {
            if exact {
                exhaustive_total(real, p).map(|o| o.rate)
            } else {
                solve_total(real, p, cfg, seed).map(|r| r.primal_rate)
            }
        })
        .collect::<Result<_>>()?;
    let second_diffs: Vec<f64> = (1..p_grid.len() - 1)
        .map(|i| {
            let left = (rates[i] - rates[i - 1]) / (p_grid[i] - p_grid[i - 1]);
            let right = (rates[i + 1] - rates[i]) / (p_grid[i + 1] - p_grid[i]);
            right - left
        })
        .collect();
    let max_second_diff = second_diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityReport {
        powers: p_grid.to_vec(),
        rates,
        second_diffs,
        max_second_diff,
        exact,
    })
}

/// Fraction of `trials` realizations whose probe is not concave within the
/// given tolerances.
pub fn nonconcavity_frequency(
    rician: &RicianConfig,
    trials: usize,
    p_grid: &[f64],
    (abs_tol, rel_tol): (f64, f64),
    base_seed: u64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let flags: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(base_seed, "concavity", rician.m, t);
            let real = sample_realization(rician, seed)?;
            let rep = concavity_probe(&real, p_grid, cfg, solver_seed(seed))?;
            Ok(!rep.is_concave(abs_tol, rel_tol))
        })
        .collect::<Result<_>>()?;
    Ok(flags.iter().filter(|&&f| f).count() as f64 / trials.max(1) as f64)
}
