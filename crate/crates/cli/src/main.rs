use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use relaxround::hardgen::{generate_hard_instance, greedy_gap_report};
use relaxround::instance::{build_symmetric_bipartite, load_snap_edgelist};
use relaxround::oracle::brute_force_opt;
use relaxround::pipeline::{relax_and_round, PipelineResult};
use relaxround::ratios::{alpha, alpha_curve, default_search_limit};
use relaxround::solver::{EtaMode, SolveOptions, DEFAULT_TOL};
use relaxround::{CoverageInstance, Reward};

#[derive(Parser)]
#[command(
    name = "relaxround",
    version,
    about = "Relax-and-round solver for concave coverage problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy, accelerated fractional solve and swap rounding on one instance.
    Solve(SolveArgs),
    /// Time the pipeline over several instances and budgets.
    Bench(BenchArgs),
    /// Turn a SNAP edge list into a native instance file.
    Convert {
        #[arg(long)]
        snap: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Poisson concavity ratio of a reward.
    Ratio {
        #[arg(long)]
        reward: String,
        /// Largest x searched (and printed with --curve).
        #[arg(long)]
        limit: Option<u64>,
        /// Print `x,alpha` rows for x = 1..limit instead of the minimum.
        #[arg(long)]
        curve: bool,
        #[arg(long, default_value_t = 4)]
        digits: usize,
    },
    /// Write a hard multi-coverage instance and a JSON sidecar.
    GenHard {
        #[arg(long)]
        c: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact optimum by enumeration (small instances only).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        reward: String,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Instance in the native text format.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// SNAP edge list, turned into the symmetric bipartite instance.
    #[arg(long)]
    snap: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Fixed step size.
    #[arg(long, conflicts_with = "eta_scale")]
    eta: Option<f64>,
    /// Multiple of the default step size.
    #[arg(long)]
    eta_scale: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    no_early_stop: bool,
    /// Best-of-N swap roundings.
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        let eta = match (self.eta, self.eta_scale) {
            (Some(v), _) => EtaMode::Absolute(v),
            (None, Some(s)) => EtaMode::Scale(s),
            (None, None) => EtaMode::Theoretical,
        };
        SolveOptions {
            eta,
            tol: self.tol,
            max_iter: self.max_iter,
            early_stop: !self.no_early_stop,
        }
    }

    fn run(&self, inst: &CoverageInstance, reward: &Reward, k: usize) -> Result<PipelineResult> {
        if self.rounds == 0 {
            bail!("--rounds must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(relax_and_round(
            inst,
            reward,
            k,
            self.epsilon,
            &self.options(),
            self.rounds,
            &mut rng,
        )?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    reward: String,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-iteration `iter,smooth_value,true_value` trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Native instance files.
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
    /// SNAP edge lists.
    #[arg(long = "snap")]
    snaps: Vec<PathBuf>,
    /// Generated hard instances `c`; each uses its own budget and `min:c=<c>`.
    #[arg(long = "hard")]
    hard: Vec<u64>,
    #[arg(long = "k", value_delimiter = ',')]
    budgets: Vec<usize>,
    #[arg(long = "reward", value_delimiter = ';')]
    rewards: Vec<String>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Also report the greedy, solve and round stages separately.
    #[arg(long)]
    stages: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_reward(spec: &str) -> Result<Reward> {
    let reward: Reward = spec
        .parse()
        .with_context(|| format!("bad reward `{spec}`"))?;
    Ok(if reward.is_normalized() {
        reward
    } else {
        reward.normalize()?
    })
}

fn load_input(input: &InputArgs) -> Result<(String, CoverageInstance)> {
    match (&input.instance, &input.snap) {
        (Some(p), _) => Ok((p.display().to_string(), CoverageInstance::load_native(p)?)),
        (None, Some(p)) => Ok((
            p.display().to_string(),
            build_symmetric_bipartite(&load_snap_edgelist(p)?)?,
        )),
        (None, None) => bail!("pass --instance or --snap"),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a str,
    instance: &'a str,
    reward: String,
    k: usize,
    epsilon: f64,
    eta: Option<f64>,
    eta_scale: Option<f64>,
    tol: f64,
    max_iter: Option<usize>,
    early_stop: bool,
    rounds: usize,
    seed: u64,
}

#[derive(Serialize)]
struct StageReport {
    value: f64,
    seconds: f64,
}

#[derive(Serialize)]
struct SolveStage {
    value: f64,
    iters: usize,
    mu: Option<f64>,
    eta: Option<f64>,
    #[serde(rename = "T")]
    t: Option<usize>,
    seconds: f64,
    stopped_early: bool,
    degenerate: bool,
}

#[derive(Serialize)]
struct RoundStage {
    value: f64,
    trials: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    config: RunConfig<'a>,
    greedy: StageReport,
    solve: SolveStage,
    round: RoundStage,
    set: &'a [usize],
}

#[derive(Serialize)]
struct SolveRow {
    greedy_value: f64,
    solve_value: f64,
    round_value: f64,
    iters: usize,
    mu: Option<f64>,
    eta: Option<f64>,
    #[serde(rename = "T")]
    t: Option<usize>,
    stopped_early: bool,
    greedy_seconds: f64,
    solve_seconds: f64,
    round_seconds: f64,
}

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    smooth_value: f64,
    true_value: f64,
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let (name, inst) = load_input(&args.input)?;
    let reward = parse_reward(&args.reward)?;
    let res = args.solver.run(&inst, &reward, args.k)?;
    let s = &res.solve;
    let schedule = s.schedule.as_ref();

    if let Some(path) = &args.trace {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        for (iter, (&smooth_value, &true_value)) in
            s.smooth_trace.iter().zip(&s.true_trace).enumerate()
        {
            w.serialize(TraceRow {
                iter,
                smooth_value,
                true_value,
            })?;
        }
        w.flush()?;
    }

    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Json => {
            let report = Report {
                config: RunConfig {
                    command: "solve",
                    instance: &name,
                    reward: reward.to_string(),
                    k: args.k,
                    epsilon: args.solver.epsilon,
                    eta: args.solver.eta,
                    eta_scale: args.solver.eta_scale,
                    tol: args.solver.tol,
                    max_iter: args.solver.max_iter,
                    early_stop: !args.solver.no_early_stop,
                    rounds: args.solver.rounds,
                    seed: args.solver.seed,
                },
                greedy: StageReport {
                    value: s.greedy_value,
                    seconds: s.greedy_seconds,
                },
                solve: SolveStage {
                    value: s.value,
                    iters: s.iterations,
                    mu: schedule.map(|p| p.mu),
                    eta: schedule.map(|p| p.eta),
                    t: schedule.map(|p| p.iterations),
                    seconds: s.solve_seconds,
                    stopped_early: s.stopped_early,
                    degenerate: s.degenerate,
                },
                round: RoundStage {
                    value: res.round.value,
                    trials: res.round.trials,
                    seconds: res.round_seconds,
                },
                set: &res.round.set,
            };
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(SolveRow {
                greedy_value: s.greedy_value,
                solve_value: s.value,
                round_value: res.round.value,
                iters: s.iterations,
                mu: schedule.map(|p| p.mu),
                eta: schedule.map(|p| p.eta),
                t: schedule.map(|p| p.iterations),
                stopped_early: s.stopped_early,
                greedy_seconds: s.greedy_seconds,
                solve_seconds: s.solve_seconds,
                round_seconds: res.round_seconds,
            })?;
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow<'a> {
    instance: &'a str,
    k: usize,
    c_or_reward: &'a str,
    stage: &'a str,
    mean_seconds: f64,
    std_seconds: f64,
    objective: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct BenchCase {
    name: String,
    inst: CoverageInstance,
    runs: Vec<(usize, String, Reward)>,
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let has_files = !args.instances.is_empty() || !args.snaps.is_empty();
    if !has_files && args.hard.is_empty() {
        bail!("pass at least one --instance, --snap or --hard");
    }
    if has_files && (args.budgets.is_empty() || args.rewards.is_empty()) {
        bail!("file instances need --k and --reward");
    }
    let rewards = args
        .rewards
        .iter()
        .map(|s| Ok((s.clone(), parse_reward(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let file_runs: Vec<(usize, String, Reward)> = args
        .budgets
        .iter()
        .flat_map(|&k| rewards.iter().map(move |(s, r)| (k, s.clone(), r.clone())))
        .collect();

    let mut cases = Vec::new();
    for p in &args.instances {
        let input = InputArgs {
            instance: Some(p.clone()),
            snap: None,
        };
        let (name, inst) = load_input(&input)?;
        cases.push(BenchCase {
            name,
            inst,
            runs: file_runs.clone(),
        });
    }
    for p in &args.snaps {
        let input = InputArgs {
            instance: None,
            snap: Some(p.clone()),
        };
        let (name, inst) = load_input(&input)?;
        cases.push(BenchCase {
            name,
            inst,
            runs: file_runs.clone(),
        });
    }
    for &c in &args.hard {
        let h = generate_hard_instance(c)?;
        let runs = vec![(h.k, c.to_string(), h.reward())];
        cases.push(BenchCase {
            name: format!("hard:c={c}"),
            inst: h.instance,
            runs,
        });
    }

    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for case in &cases {
        for (k, label, reward) in &case.runs {
            let mut times = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
            let mut last = None;
            for _ in 0..args.trials {
                let res = args.solver.run(&case.inst, reward, *k)?;
                let stage = [
                    res.solve.greedy_seconds,
                    res.solve.solve_seconds,
                    res.round_seconds,
                ];
                for (t, s) in times.iter_mut().zip(stage) {
                    t.push(s);
                }
                times[3].push(stage.iter().sum());
                last = Some(res);
            }
            let res = last.expect("at least one trial");
            let objectives = [
                res.solve.greedy_value,
                res.solve.value,
                res.round.value,
                res.round.value,
            ];
            let names = ["greedy", "solve", "round", "total"];
            let shown = if args.stages { 0..4 } else { 3..4 };
            for s in shown {
                let (mean_seconds, std_seconds) = mean_std(&times[s]);
                w.serialize(BenchRow {
                    instance: &case.name,
                    k: *k,
                    c_or_reward: label,
                    stage: names[s],
                    mean_seconds,
                    std_seconds,
                    objective: objectives[s],
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_convert(snap: &Path, out: &Path) -> Result<()> {
    let g = load_snap_edgelist(snap)?;
    let inst = build_symmetric_bipartite(&g)?;
    inst.save_native(out)?;
    eprintln!(
        "{} nodes, {} edges -> n = {}, m = {}",
        g.num_nodes(),
        g.num_edges(),
        inst.n(),
        inst.m()
    );
    Ok(())
}

fn cmd_ratio(spec: &str, limit: Option<u64>, curve: bool, digits: usize) -> Result<()> {
    let reward = parse_reward(spec)?;
    let mut out = io::stdout().lock();
    if curve {
        let limit = limit.unwrap_or_else(|| default_search_limit(&reward));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "alpha"])?;
        for (x, a) in alpha_curve(&reward, limit)? {
            w.write_record([x.to_string(), format!("{a:.digits$}")])?;
        }
        w.flush()?;
    } else {
        let a = alpha(&reward, limit)?;
        writeln!(out, "{:.digits$}", a.value)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct HardSidecar {
    c: u64,
    l: usize,
    q: usize,
    k: usize,
    opt_value: f64,
    greedy_value: f64,
}

fn cmd_gen_hard(c: u64, out: &Path) -> Result<()> {
    let h = generate_hard_instance(c)?;
    let gap = greedy_gap_report(&h)?;
    h.instance.save_native(out)?;
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".json");
    let meta = HardSidecar {
        c,
        l: h.l,
        q: h.q,
        k: h.k,
        opt_value: h.opt_value,
        greedy_value: gap.greedy_value,
    };
    let file = File::create(&sidecar)
        .with_context(|| format!("cannot create {}", PathBuf::from(&sidecar).display()))?;
    serde_json::to_writer_pretty(file, &meta)?;
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    value: f64,
    set: Vec<usize>,
}

fn cmd_oracle(input: &InputArgs, spec: &str, k: usize) -> Result<()> {
    let (_, inst) = load_input(input)?;
    let reward = parse_reward(spec)?;
    let (value, set) = brute_force_opt(&inst, &reward, k)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, &OracleReport { value, set })?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Convert { snap, out } => cmd_convert(snap, out),
        Command::Ratio {
            reward,
            limit,
            curve,
            digits,
        } => cmd_ratio(reward, *limit, *curve, *digits),
        Command::GenHard { c, out } => cmd_gen_hard(*c, out),
        Command::Oracle { input, reward, k } => cmd_oracle(input, reward, *k),
    }
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
