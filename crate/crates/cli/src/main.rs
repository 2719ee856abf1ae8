use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::io::Write;

use coclust_cli::config::ExperimentConfig;
use coclust_cli::{rate, summarize, sweep};
use coclust_core::{
    avg_kl, fit_coblockmodel, kl_small_rho_limit, phi_star_search, population_risk,
    write_fit_record, FitConfig, Kernel, RiskKind, DEFAULT_EPS, DEFAULT_PAIR_GRID,
    DEFAULT_PHI_GRID,
};

#[derive(Parser)]
#[command(
    name = "coclust",
    about = "Sample exchangeable bipartite networks and fit stochastic co-blockmodels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation sweep described by a config file and write a CSV.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the support-function rate experiment and write a CSV; prints
    /// the log-log slope of per-n medians.
    Rate {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Fit a co-blockmodel to an adjacency file and write a fit record.
    Fit {
        #[arg(long)]
        input: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Print the best-in-class blockmodel of a sigmoidal kernel, its
    /// population risk, and the small-density KL limit.
    Oracle {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_PHI_GRID)]
        grid: usize,
    },
    /// Summarize a sweep CSV: per-group median and IQR of excess risk and
    /// normalized KL.
    Summarize {
        #[arg(long = "in")]
        input: String,
        /// Comma-separated group keys, e.g. beta,rho_mode,n
        #[arg(long)]
        by: String,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("COCLUST_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("COCLUST_THREADS must be a positive integer, got '{v}'"))?;
        if threads == 0 {
            anyhow::bail!("COCLUST_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("rayon thread pool already initialized")?;
    }
    Ok(())
}

fn load_config(path: &str) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read config '{path}'"))?;
    ExperimentConfig::parse(&text)
}

fn resolve_out(cli_out: Option<String>, cfg_out: &Option<String>, what: &str) -> Result<String> {
    cli_out
        .or_else(|| cfg_out.clone())
        .with_context(|| format!("{what}: pass --out or set 'out' in the config"))
}

fn main() -> Result<()> {
    init_threads()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = load_config(&config)?;
            let out = resolve_out(out, &cfg.out, "sweep")?;
            sweep::run_sweep_to_file(&cfg, &out)?;
            println!("wrote {out}");
        }
        Command::Rate { config, out } => {
            let cfg = load_config(&config)?;
            let out = resolve_out(out, &cfg.out, "rate")?;
            rate::run_rate_to_file(&cfg, &out)?;
            println!("wrote {out}");
        }
        Command::Fit { input, k, kind, seed, out } => {
            let kind: RiskKind = kind.parse()?;
            let file = std::fs::File::open(&input)
                .with_context(|| format!("cannot read adjacency file '{input}'"))?;
            let (a, _latents) = coclust_core::io::read_adjacency(std::io::BufReader::new(file))?;
            let fit = fit_coblockmodel(&a, k, kind, &FitConfig::new(seed))?;
            let out_file = std::fs::File::create(&out)
                .with_context(|| format!("cannot write fit record '{out}'"))?;
            write_fit_record(std::io::BufWriter::new(out_file), &fit)?;
            println!(
                "fit {}x{} K={k} kind={kind} objective={:.6} -> {out}",
                a.m(),
                a.n(),
                fit.objective
            );
        }
        Command::Oracle { beta, rho, grid } => {
            let kernel = Kernel::sigmoid(beta, rho)?;
            let star = phi_star_search(&kernel, grid, DEFAULT_EPS)?;
            let l_star =
                population_risk(&kernel, &star, RiskKind::Pl, DEFAULT_EPS, DEFAULT_PAIR_GRID)?
                    .value;
            let kl_norm = avg_kl(&kernel, &star, DEFAULT_EPS, DEFAULT_PAIR_GRID)? / rho;
            let base = Kernel::sigmoid(beta, 1.0)?;
            let star_base = phi_star_search(&base, grid, DEFAULT_EPS)?;
            let limit = kl_small_rho_limit(&base, &Kernel::block(star_base)?)?;
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let fmt = |v: &[f64]| {
                v.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" ")
            };
            writeln!(w, "phi_star mu {}", fmt(&star.mu.proportions()))?;
            writeln!(w, "phi_star nu {}", fmt(&star.nu.proportions()))?;
            writeln!(w, "phi_star theta {}", fmt(star.theta.data()))?;
            writeln!(w, "L_star {l_star:.12}")?;
            writeln!(w, "kl_normalized_at_star {kl_norm:.12}")?;
            writeln!(w, "kl_limit {limit:.12}")?;
        }
        Command::Summarize { input, by } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read CSV '{input}'"))?;
            let keys: Vec<String> =
                by.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            let table = summarize::summarize(&text, &keys)?;
            table.write_csv(std::io::stdout().lock())?;
        }
    }
    Ok(())
}
