//! The simulation sweep: for each (beta, rho mode, n) cell, sample arrays,
//! fit co-blockmodels, and report excess population risk, normalized KL
//! divergence, its small-density limit, and the co-cluster fidelity
//! diagnostic. Output is a byte-deterministic CSV.

use anyhow::{Context, Result};
use rayon::prelude::*;
use std::io::Write;

use coclust_core::rng::{derive_seed, role};
use coclust_core::{
    cocluster_fidelity, entropy_integral, fit_coblockmodel, kl_small_rho_limit,
    phi_star_search_kind, population_risk, rho_schedule, sample_bipartite, CoBlockParams,
    FitConfig, InitStrategy, Kernel, RhoMode, RiskKind,
};

use crate::config::{ExperimentConfig, InitKind};
use crate::format_float;

pub const SWEEP_HEADER: &str = "beta,rho_mode,rho_value,n,m,rep,seed,kind,objective,l_star,\
excess_risk_rel,kl_normalized,kl_limit,fidelity,runtime_ms";

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub beta: f64,
    pub rho_mode: RhoMode,
    pub rho_value: f64,
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub kind: RiskKind,
    pub objective: f64,
    pub l_star: f64,
    pub excess_risk_rel: f64,
    pub kl_normalized: f64,
    pub kl_limit: f64,
    pub fidelity: f64,
    /// Kept for schema stability; always 0 so that identical configs
    /// produce byte-identical files. Wall-clock timing goes to stderr.
    pub runtime_ms: u64,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_float(self.beta),
            self.rho_mode,
            format_float(self.rho_value),
            self.n,
            self.m,
            self.rep,
            self.seed,
            self.kind,
            format_float(self.objective),
            format_float(self.l_star),
            format_float(self.excess_risk_rel),
            format_float(self.kl_normalized),
            format_float(self.kl_limit),
            format_float(self.fidelity),
            self.runtime_ms,
        )
    }
}

struct Cell {
    beta: f64,
    rho_mode: RhoMode,
    rho_value: f64,
    n: usize,
    m: usize,
    index: u64,
    kernel: Kernel,
    h_bar: f64,
    kl_limit: f64,
    /// Per kind (aligned with config.kinds): best-in-class phi and its
    /// population risk.
    stars: Vec<(CoBlockParams, f64)>,
}

fn mode_rank(mode: RhoMode) -> u8 {
    match mode {
        RhoMode::Dense => 0,
        RhoMode::Poly => 1,
        RhoMode::Polylog => 2,
    }
}

fn build_cells(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &beta in &config.betas {
        // the small-density asymptote depends only on beta
        let base = Kernel::sigmoid(beta, 1.0)?;
        let star_base = phi_star_search_kind(&base, config.phi_grid, config.eps, RiskKind::Pl)?;
        let q = Kernel::block(star_base)?;
        let kl_limit = kl_small_rho_limit(&base, &q)?;
        for &rho_mode in &config.rho_modes {
            for &n in &config.n_grid {
                let rho_value = rho_schedule(rho_mode, n)?;
                let kernel = Kernel::sigmoid(beta, rho_value)?;
                let h_bar = entropy_integral(&kernel)?;
                let stars = config
                    .kinds
                    .iter()
                    .map(|&kind| -> Result<(CoBlockParams, f64)> {
                        let star =
                            phi_star_search_kind(&kernel, config.phi_grid, config.eps, kind)?;
                        let l = population_risk(&kernel, &star, kind, config.eps, config.pair_grid)?
                            .value;
                        Ok((star, l))
                    })
                    .collect::<Result<_>>()?;
                cells.push(Cell {
                    beta,
                    rho_mode,
                    rho_value,
                    n,
                    m: config.m_for(n),
                    index,
                    kernel,
                    h_bar,
                    kl_limit,
                    stars,
                });
                index += 1;
            }
        }
    }
    Ok(cells)
}

fn run_one(config: &ExperimentConfig, cell: &Cell, kind_idx: usize, rep: usize) -> Result<SweepRow> {
    let kind = config.kinds[kind_idx];
    let seed = derive_seed(config.seed, &[role::REP, cell.index, rep as u64, kind_idx as u64]);
    let sample = sample_bipartite(&cell.kernel, cell.m, cell.n, seed, false)?;
    let init = match config.init {
        InitKind::Oracle => InitStrategy::OracleLatent(sample.latents.clone()),
        InitKind::Random => InitStrategy::Random,
    };
    let fit_cfg = FitConfig {
        restarts: config.restarts,
        anneal_steps: config.anneal_steps,
        initial_temperature: config.initial_temperature,
        cooling_rate: config.cooling_rate,
        eps: config.eps,
        seed,
        init,
        ..FitConfig::new(seed)
    };
    let fit = fit_coblockmodel(&sample.a, 2, kind, &fit_cfg)?;

    let (_, star_risk) = &cell.stars[kind_idx];
    let hat_risk =
        population_risk(&cell.kernel, &fit.phi_hat, kind, config.eps, config.pair_grid)?.value;
    let excess = match kind {
        RiskKind::Pl => (star_risk - hat_risk) / star_risk.abs(),
        RiskKind::Ls => (hat_risk - star_risk) / star_risk.abs(),
    };
    let l_pl_hat = match kind {
        RiskKind::Pl => hat_risk,
        RiskKind::Ls => {
            population_risk(&cell.kernel, &fit.phi_hat, RiskKind::Pl, config.eps, config.pair_grid)?
                .value
        }
    };
    let kl = (cell.h_bar - l_pl_hat) / cell.rho_value;
    let fidelity =
        cocluster_fidelity(&cell.kernel, &fit.phi_hat, kind, config.eps, config.pair_grid)?;
    Ok(SweepRow {
        beta: cell.beta,
        rho_mode: cell.rho_mode,
        rho_value: cell.rho_value,
        n: cell.n,
        m: cell.m,
        rep,
        seed,
        kind,
        objective: fit.objective,
        l_star: *star_risk,
        excess_risk_rel: excess,
        kl_normalized: kl,
        kl_limit: cell.kl_limit,
        fidelity,
        runtime_ms: 0,
    })
}

/// Run the sweep and return the rows sorted by
/// (beta, rho mode, n, rep, kind).
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let start = std::time::Instant::now();
    let cells = build_cells(config)?;
    let jobs: Vec<(usize, usize, usize)> = (0..cells.len())
        .flat_map(|c| {
            (0..config.kinds.len())
                .flat_map(move |k| (0..config.reps).map(move |r| (c, k, r)))
        })
        .collect();
    let mut rows: Vec<SweepRow> = jobs
        .into_par_iter()
        .map(|(c, k, r)| run_one(config, &cells[c], k, r))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(mode_rank(a.rho_mode).cmp(&mode_rank(b.rho_mode)))
            .then(a.n.cmp(&b.n))
            .then(a.rep.cmp(&b.rep))
            .then(a.kind.to_string().cmp(&b.kind.to_string()))
    });
    eprintln!(
        "sweep: {} rows over {} cells in {:.1} s",
        rows.len(),
        cells.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(rows)
}

pub fn write_sweep_csv(mut w: impl Write, rows: &[SweepRow]) -> Result<()> {
    w.write_all(SWEEP_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for row in rows {
        w.write_all(row.to_csv_line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn run_sweep_to_file(config: &ExperimentConfig, path: &str) -> Result<()> {
    let rows = run_sweep(config)?;
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot write sweep output '{path}'"))?;
    write_sweep_csv(std::io::BufWriter::new(file), &rows)
}
