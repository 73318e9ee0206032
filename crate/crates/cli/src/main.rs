use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dfrelay::experiments::write_scenario_csv;
use dfrelay::oracle;
use dfrelay::rate::to_bits;
use dfrelay::{
    evaluate_baseline, load_instance, sample_realization, save_instance, solve, validate_allocation, Allocation,
    BaselineKind, ChannelRealization, IndividualBudgets, PowerConstraint, RicianConfig, Scenario, SolveReport,
    SolverConfig, TraceRow, WeightRule,
};

/// Subcarrier pairing and power allocation for OFDM decode-and-forward relaying.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with the dual method or a baseline pairing.
    Solve(SolveArgs),
    /// Exhaustive optimum of a small instance.
    Oracle(OracleArgs),
    /// Run a Monte-Carlo scenario and write one CSV row per (M, trial, scheme).
    Simulate(SimulateArgs),
    /// Draw a Rician instance and write it as an instance file.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintKind {
    Total,
    Individual,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Scp,
    ScpUnweighted,
    Fixed,
}

#[derive(Args)]
struct ProblemArgs {
    /// Instance CSV with header `k,a_sd,a_sr,a_rd,w`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "total")]
    constraint: ConstraintKind,
    /// Total power budget.
    #[arg(long, default_value_t = 5.0)]
    power: f64,
    /// Source budget under individual constraints.
    #[arg(long, default_value_t = 4.0)]
    ps: f64,
    /// Relay budget under individual constraints.
    #[arg(long, default_value_t = 1.0)]
    pr: f64,
    /// Allow extra second-slot source transmission on direct-link pairs.
    #[arg(long)]
    extra_direct: bool,
}

impl ProblemArgs {
    fn constraint(&self) -> PowerConstraint {
        match self.constraint {
            ConstraintKind::Total => PowerConstraint::Total(self.power),
            ConstraintKind::Individual => PowerConstraint::Individual(IndividualBudgets {
                source: self.ps,
                relay: self.pr,
            }),
        }
    }

    fn load(&self) -> Result<ChannelRealization> {
        load_instance(&self.instance).with_context(|| format!("reading {}", self.instance.display()))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Evaluate a reference pairing instead of running the dual method.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Write the per-iteration log as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Seed of the multiplier initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SolverArgs {
    /// Relative-change threshold that triggers the amendment phase.
    #[arg(long, default_value_t = SolverConfig::default().eps_converge)]
    eps: f64,
    /// Base step size.
    #[arg(long, default_value_t = SolverConfig::default().step_scale)]
    step_scale: f64,
    /// Iterations between the multipliers compared by the trigger test.
    #[arg(long, default_value_t = SolverConfig::default().trigger_window)]
    trigger_window: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_iter_hard)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            eps_converge: self.eps,
            step_scale: self.step_scale,
            trigger_window: self.trigger_window,
            max_iter_hard: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    parallel: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    m: usize,
    /// Mean square SR, SD and RD gains.
    #[arg(long, num_args = 3, value_names = ["SR", "SD", "RD"], default_values_t = [3.0, 1.0, 3.0])]
    gains: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    k_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    /// Use the weights `1 + (k-1)/(M-1)` instead of all ones.
    #[arg(long)]
    ramp_weights: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sample(a) => cmd_sample(a),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let real = a.problem.load()?;
    let constraint = a.problem.constraint();
    let extra = a.problem.extra_direct;
    let report = match a.baseline {
        Some(b) => {
            if a.trace.is_some() {
                bail!("--trace needs the dual method, not a baseline");
            }
            let kind = match b {
                Baseline::Scp => BaselineKind::ScpWeighted,
                Baseline::ScpUnweighted => BaselineKind::ScpUnweighted,
                Baseline::Fixed => BaselineKind::FixedIdentity,
            };
            evaluate_baseline(&real, &kind.pairing(&real), &constraint, extra)?
        }
        None => {
            let cfg = SolverConfig {
                record_trace: a.trace.is_some(),
                ..a.solver.config()
            };
            solve(&real, &constraint, extra, &cfg, a.seed)?
        }
    };
    validate_allocation(&real, &report.allocation, &constraint, extra).context("allocation failed validation")?;

    println!("constraint   {constraint}{}", if extra { " + extra direct" } else { "" });
    print_rate("rate", report.primal_rate);
    if report.dual_value.is_finite() {
        print_rate("dual", report.dual_value);
        println!("gap          {:.6e}", report.gap);
        let trigger = report
            .trigger_iter
            .map_or("never triggered".to_string(), |t| format!("triggered at {t}"));
        println!("iterations   {} ({trigger})", report.iterations);
    }
    print_allocation(&real, &report.allocation);
    for n in &report.notes {
        println!("note: {n}");
    }
    if let Some(path) = &a.trace {
        write_trace(path, &report).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let real = a.problem.load()?;
    let constraint = a.problem.constraint();
    let extra = a.problem.extra_direct;
    let best = oracle::optimum(&real, &constraint, extra)?;
    validate_allocation(&real, &best.allocation, &constraint, extra).context("allocation failed validation")?;
    println!("constraint   {constraint}{}", if extra { " + extra direct" } else { "" });
    print_rate("optimum", best.rate);
    print_allocation(&real, &best.allocation);
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.scenario).with_context(|| format!("reading {}", a.scenario.display()))?;
    let mut sc = Scenario::parse(&text).with_context(|| format!("parsing {}", a.scenario.display()))?;
    if let Some(t) = a.trials {
        sc.trials = t;
    }
    let cfg = a.solver.config();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = a.parallel {
        if k == 0 {
            bail!("--parallel must be >= 1");
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build()?;
    let out = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    let means = pool.install(|| write_scenario_csv(&sc, a.seed, &cfg, out))?;

    println!("{:<16} {:>4} {:>8} {:>12}", "scheme", "M", "trials", "mean rate");
    for s in means {
        println!("{:<16} {:>4} {:>8} {:>12.6}", s.scheme, s.m, s.trials, s.mean_rate);
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let cfg = RicianConfig {
        k_factor: a.k_factor,
        noise_var: a.noise_var,
        weight_rule: if a.ramp_weights { WeightRule::LinearRamp } else { WeightRule::AllOne },
        ..RicianConfig::new(a.gains[0], a.gains[1], a.gains[2], a.m)
    };
    let real = sample_realization(&cfg, a.seed)?;
    save_instance(&real, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn print_rate(label: &str, nats: f64) {
    println!("{label:<12} {nats:.6} nats ({:.6} bits)", to_bits(nats));
}

fn print_allocation(real: &ChannelRealization, alloc: &Allocation) {
    println!("pairing      {}", alloc.pairing);
    println!("{:>4} {:>4} {:<13} {:>10} {:>10} {:>10}", "k", "m", "mode", "p_s", "p_r", "q_s");
    for (k, m) in alloc.pairing.pairs() {
        println!(
            "{:>4} {:>4} {:<13} {:>10.6} {:>10.6} {:>10.6}",
            k + 1,
            m + 1,
            format!("{:?}", alloc.modes[k]),
            alloc.p_s[k],
            alloc.p_r[k],
            alloc.q_s[k]
        );
    }
    println!(
        "power        source {:.6}, relay {:.6} (M = {})",
        alloc.source_power(),
        alloc.relay_power(),
        real.m()
    );
}

fn write_trace(path: &Path, report: &SolveReport) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let individual = report.trace.iter().any(|r| r.mu_r.is_some());
    writeln!(
        out,
        "iter,mu,alpha_norm,power_sum,dual_value{}",
        if individual { ",mu_r" } else { "" }
    )?;
    for TraceRow { iter, mu, mu_r, alpha_norm, power_sum, dual_value } in &report.trace {
        write!(out, "{iter},{mu},{alpha_norm},{power_sum},{dual_value}")?;
        if individual {
            write!(out, ",{}", mu_r.unwrap_or(f64::NAN))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
