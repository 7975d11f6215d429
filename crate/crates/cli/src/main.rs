//! Command-line front end: network generation, bound computation,
//! simulation traces, budget allocation, and the experiment campaigns.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use conbound::bounds::solve_bounds;
use conbound::control::{
    allocate_baseline, allocate_bruteforce, allocate_corollary1_opts, evaluate_allocation,
    ControlProblem, Cor1Options, Target,
};
use conbound::dynamics::{simulate, GammaModel, GammaSpec, Monitors, SimOptions};
use conbound::files::{load_plan, load_vector, plan_to_string};
use conbound::harness::{
    run_bounds_scenario, run_control_large, run_control_small, ControlLargeConfig,
    ControlSmallConfig, ScenarioConfig,
};
use conbound::netgraph::{directify, generate_ba, load_network, save_network};
use conbound::rng::stream_rng;
use conbound::spectral::left_null_eigenvector;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "conbound", version, about = "Consensus bounds and budget allocation for uncertain opinion dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Stubborn,
    Uniform,
}

impl ModelArg {
    fn to_model(self) -> GammaModel {
        match self {
            ModelArg::Stubborn => GammaModel::Stubbornness,
            ModelArg::Uniform => GammaModel::UniformRandom,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Cor1,
    Baseline,
    Brute,
}

#[derive(Args)]
struct OmegaArgs {
    /// Lower uncertainty constant ω_low
    #[arg(long = "wlow", default_value_t = 0.09)]
    wlow: f64,
    /// Upper uncertainty constant ω_high
    #[arg(long = "whigh", default_value_t = 0.25)]
    whigh: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a directed scale-free network and write it as an edge list
    GenNetwork {
        #[arg(long)]
        n: usize,
        /// Edges attached per new node
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Fraction of arcs to remove while keeping strong connectivity
        #[arg(long, default_value_t = 0.2)]
        remove: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the normalized left null eigenvector of the Laplacian
    Centrality {
        #[arg(long)]
        net: PathBuf,
    },
    /// Simulate the dynamics to consensus, emitting a CSV trace
    Simulate {
        #[arg(long)]
        net: PathBuf,
        /// Opinion file (one value per line)
        #[arg(long)]
        x0: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Stubborn)]
        model: ModelArg,
        #[command(flatten)]
        omega: OmegaArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Compute consensus bounds and the extremal gain vectors
    Bounds {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        x0: PathBuf,
        #[command(flatten)]
        omega: OmegaArgs,
    },
    /// Allocate the marketing budget and print the plan
    Allocate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        x0: PathBuf,
        /// Target consensus (0 or 1)
        #[arg(long)]
        d: u8,
        /// Per-agent input cap ū
        #[arg(long, default_value_t = 0.2)]
        umax: f64,
        /// Number of funded agents (budget = nb·ū)
        #[arg(long)]
        nb: usize,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Use the exact per-agent cap rows ũ_i ≤ ū·φ̃_i (the default)
        #[arg(long, conflicts_with = "printed_ucap")]
        exact_ucap: bool,
        /// Use the conservative cap rows ũ_i ≤ ū·χ instead
        #[arg(long)]
        printed_ucap: bool,
        #[command(flatten)]
        omega: OmegaArgs,
        /// Also write the plan CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a plan file by Monte-Carlo simulation
    Evaluate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        x0: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        d: u8,
        #[arg(long, default_value_t = 0.2)]
        umax: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::Uniform)]
        model: ModelArg,
        #[command(flatten)]
        omega: OmegaArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bound-validation campaign: uniform opinions, stubbornness gains
    Scenario1(ScenarioArgs),
    /// Bound-validation campaign: uniform opinions, uniform random gains
    Scenario2(ScenarioArgs),
    /// Bound-validation campaign: beta-distributed opinions, stubbornness gains
    Scenario3(ScenarioArgs),
    /// Small-network comparison of all three allocation strategies
    ControlSmall {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Large-network beta-grid comparison of baseline vs LP allocation
    ControlLarge {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Optional key=value config file overriding the scenario preset
    #[arg(long)]
    config: Option<PathBuf>,
}

fn target_from(d: u8) -> Result<Target> {
    match d {
        0 => Ok(Target::Zero),
        1 => Ok(Target::One),
        _ => bail!("target d must be 0 or 1, got {d}"),
    }
}

fn scenario_config(preset: u32, args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::parse(&text)?
        }
        None => match preset {
            1 => ScenarioConfig::scenario1(args.trials, args.seed),
            2 => ScenarioConfig::scenario2(args.trials, args.seed),
            _ => ScenarioConfig::scenario3(args.trials, args.seed),
        },
    };
    if args.config.is_none() {
        cfg.trials = args.trials;
        cfg.master_seed = args.seed;
    }
    Ok(cfg)
}

fn run_scenario(preset: u32, args: ScenarioArgs) -> Result<()> {
    let cfg = scenario_config(preset, &args)?;
    let campaign = run_bounds_scenario(&cfg)?;
    campaign.write_dir(&args.out_dir)?;
    print!("{}", campaign.summary_csv());
    if campaign.rows.is_empty() {
        bail!("campaign produced no successful trials");
    }
    Ok(())
}

fn main() -> Result<()> {
    // Die quietly when a downstream pipe closes (e.g. `conbound ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match Cli::parse().command {
        Command::GenNetwork {
            n,
            m,
            remove,
            seed,
            out,
        } => {
            let edges = generate_ba(n, m, seed)?;
            let outcome = directify(&edges, remove, seed ^ 0x9e37_79b9)?;
            save_network(&outcome.network, &out)?;
            eprintln!(
                "removed {} of {} requested arcs (realized fraction {:.4}); wrote {}",
                outcome.removed,
                outcome.requested,
                outcome.realized_fraction,
                out.display()
            );
        }
        Command::Centrality { net } => {
            let net = load_network(net)?;
            let e = left_null_eigenvector(&net)?;
            println!("agent,nu");
            for (i, v) in e.nu.iter().enumerate() {
                println!("{i},{v}");
            }
        }
        Command::Simulate {
            net,
            x0,
            model,
            omega,
            seed,
            tol,
            max_steps,
        } => {
            let net = load_network(net)?;
            let x0 = load_vector(x0)?;
            let spec = GammaSpec::new(omega.wlow, omega.whigh, model.to_model())?;
            let b = solve_bounds(&net, &x0, &spec)?;
            let opts = SimOptions {
                tol,
                max_steps,
                record_states: true,
                ..SimOptions::default()
            };
            let mut rng = stream_rng(seed, 0);
            let rec = simulate(
                &net,
                &x0,
                &spec,
                Monitors {
                    nu_under: Some(&b.nu_under),
                    nu_over: Some(&b.nu_over),
                },
                &opts,
                &mut rng,
            )?;
            let n = net.n();
            let header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
            println!("step,{},theta_under,theta_over,flag_low,flag_high", header.join(","));
            for (k, state) in rec.states.iter().enumerate() {
                let xs: Vec<String> = state.iter().map(|v| v.to_string()).collect();
                let flags = if k < rec.steps {
                    format!("{},{}", rec.flags_under[k] as u8, rec.flags_over[k] as u8)
                } else {
                    ",".to_string()
                };
                println!(
                    "{k},{},{},{},{flags}",
                    xs.join(","),
                    rec.theta_under[k],
                    rec.theta_over[k]
                );
            }
            eprintln!(
                "alpha = {}, steps = {}, converged = {}",
                rec.alpha, rec.steps, rec.converged
            );
        }
        Command::Bounds { net, x0, omega } => {
            let net = load_network(net)?;
            let x0 = load_vector(x0)?;
            let spec = GammaSpec::new(omega.wlow, omega.whigh, GammaModel::UniformRandom)?;
            let b = solve_bounds(&net, &x0, &spec)?;
            println!("alpha_min,alpha_max,gap,conservative_gap");
            println!(
                "{},{},{},{}",
                b.alpha_min,
                b.alpha_max,
                b.alpha_max - b.alpha_min,
                b.conservative_high - b.conservative_low
            );
            println!();
            println!("agent,gamma_minimizer,gamma_maximizer");
            for i in 0..net.n() {
                println!("{i},{},{}", b.gamma_star_low[i], b.gamma_star_high[i]);
            }
        }
        Command::Allocate {
            net,
            x0,
            d,
            umax,
            nb,
            strategy,
            exact_ucap: _,
            printed_ucap,
            omega,
            out,
        } => {
            let net = load_network(net)?;
            let x0 = load_vector(x0)?;
            let spec = GammaSpec::new(omega.wlow, omega.whigh, GammaModel::UniformRandom)?;
            let p = ControlProblem::cardinality(&net, &x0, target_from(d)?, umax, nb, &spec)?;
            let plan = match strategy {
                StrategyArg::Cor1 => allocate_corollary1_opts(
                    &p,
                    &Cor1Options {
                        exact_ucap: !printed_ucap,
                    },
                )?,
                StrategyArg::Baseline => allocate_baseline(&p)?,
                StrategyArg::Brute => allocate_bruteforce(&p)?,
            };
            let mut text = plan_to_string(&plan.u);
            text.push_str(&format!("# predicted_bound = {}\n", plan.predicted_bound));
            text.push_str(&format!("# budget_used = {}\n", plan.budget_used));
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(path, text)?;
            }
        }
        Command::Evaluate {
            net,
            x0,
            plan,
            d,
            umax,
            model,
            omega,
            trials,
            seed,
        } => {
            let net = load_network(net)?;
            let x0 = load_vector(x0)?;
            let u = load_plan(plan, net.n())?;
            let spec = GammaSpec::new(omega.wlow, omega.whigh, model.to_model())?;
            let d = target_from(d)?;
            let budget: f64 = u.iter().sum();
            let p = ControlProblem::new(&net, &x0, d, umax, budget, 0, &spec)?;
            let funded: Vec<usize> = (0..net.n()).filter(|&i| u[i] > 0.0).collect();
            let plan = conbound::control::AllocationPlan {
                strategy: conbound::control::Strategy::Corollary1,
                budget_used: budget,
                predicted_bound: f64::NAN,
                u,
                funded,
            };
            let mut rng = stream_rng(seed, 0);
            let ev = evaluate_allocation(&p, &plan, trials, &mut rng)?;
            println!("predicted_bound,alpha_min,alpha_max,alpha_mean,containment_rate,trials");
            println!(
                "{},{},{},{},{},{}",
                ev.predicted_bound,
                ev.alpha_min,
                ev.alpha_max,
                ev.alpha_mean,
                ev.containment_rate,
                trials
            );
            println!();
            println!("trial,alpha");
            for (t, a) in ev.alphas.iter().enumerate() {
                println!("{t},{a}");
            }
        }
        Command::Scenario1(args) => run_scenario(1, args)?,
        Command::Scenario2(args) => run_scenario(2, args)?,
        Command::Scenario3(args) => run_scenario(3, args)?,
        Command::ControlSmall {
            trials,
            seed,
            out_dir,
        } => {
            let cfg = ControlSmallConfig::paper(trials, seed);
            let campaign = run_control_small(&cfg)?;
            campaign.write_dir(&out_dir)?;
            print!("{}", campaign.summary_csv());
            if campaign.rows.is_empty() {
                bail!("campaign produced no successful trials");
            }
        }
        Command::ControlLarge { seed, out_dir } => {
            let cfg = ControlLargeConfig::paper(seed);
            let campaign = run_control_large(&cfg)?;
            campaign.write_dir(&out_dir)?;
            print!("{}", campaign.summary_csv());
            if campaign.rows.is_empty() {
                bail!("campaign produced no successful cells");
            }
        }
    }
    Ok(())
}
