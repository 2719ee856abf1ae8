//! Support-function rate experiment: per replicate, the sampled-direction
//! supremum of |h_A - h_omega| over random directions plus the identity
//! and all-ones, with the empirical side maximized by alternating
//! assignment and the population side by the four-case oracle. The
//! summary is a log-log least-squares slope of the per-n medians.

use anyhow::{Context, Result};
use rand::Rng;
use rayon::prelude::*;
use std::io::Write;

use coclust_core::rng::{derive_seed, role, stream_rng};
use coclust_core::{
    rho_schedule, sample_bipartite, support_empirical, support_oracle, ClassCounts, Direction,
    Kernel, Mat, OracleMethod, RhoMode, SupportMethod,
};

use crate::config::ExperimentConfig;
use crate::format_float;

pub const RATE_HEADER: &str = "beta,rho_mode,rho_value,n,m,rep,seed,directions,sup_dev";

#[derive(Debug, Clone)]
pub struct RateRow {
    pub beta: f64,
    pub rho_mode: RhoMode,
    pub rho_value: f64,
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub directions: usize,
    pub sup_dev: f64,
}

impl RateRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            format_float(self.beta),
            self.rho_mode,
            format_float(self.rho_value),
            self.n,
            self.m,
            self.rep,
            self.seed,
            self.directions,
            format_float(self.sup_dev),
        )
    }
}

/// Fixed probe directions followed by `count` random ones drawn from the
/// replicate stream; drawing more directions extends the same sequence.
pub fn directions_for(seed: u64, count: usize) -> Vec<Direction> {
    let mut dirs = vec![Direction::identity(2), Direction::ones(2)];
    let mut rng = stream_rng(seed, &[role::DIRECTIONS]);
    for _ in 0..count {
        let mut g = Mat::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                g[(a, b)] = rng.random_range(-1.0..=1.0);
            }
        }
        dirs.push(Direction::new(g).expect("entries drawn inside [-1,1]"));
    }
    dirs
}

/// Per-replicate supremum over directions of |h_A - h_omega| at balanced
/// class proportions.
pub fn replicate_sup_dev(
    kernel: &Kernel,
    m: usize,
    n: usize,
    seed: u64,
    directions: usize,
    support_restarts: usize,
) -> Result<f64> {
    let sample = sample_bipartite(kernel, m, n, seed, false)?;
    let mu = ClassCounts::balanced(2, m)?;
    let nu = ClassCounts::balanced(2, n)?;
    let mu1 = mu.proportions()[0];
    let nu1 = nu.proportions()[0];
    let mut sup = 0.0f64;
    for (idx, gamma) in directions_for(seed, directions).iter().enumerate() {
        let h_a = support_empirical(
            &sample.a,
            &mu,
            &nu,
            gamma,
            SupportMethod::Alternating {
                restarts: support_restarts,
                seed: derive_seed(seed, &[role::SUPPORT_RESTART, idx as u64]),
            },
        )?
        .value;
        let method = if kernel.separable_unclamped().is_some() {
            OracleMethod::FourCase
        } else {
            OracleMethod::Grid(coclust_core::DEFAULT_PAIR_GRID)
        };
        let h_w = support_oracle(kernel, mu1, nu1, gamma, method)?.value;
        sup = sup.max((h_a - h_w).abs());
    }
    Ok(sup)
}

fn mode_rank(mode: RhoMode) -> u8 {
    match mode {
        RhoMode::Dense => 0,
        RhoMode::Poly => 1,
        RhoMode::Polylog => 2,
    }
}

pub fn run_rate(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    config.validate()?;
    if config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        anyhow::bail!("rate experiment needs n_grid sorted strictly ascending");
    }
    let start = std::time::Instant::now();
    struct CellSpec {
        beta: f64,
        rho_mode: RhoMode,
        rho_value: f64,
        n: usize,
        m: usize,
        index: u64,
        kernel: Kernel,
    }
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &beta in &config.betas {
        for &rho_mode in &config.rho_modes {
            for &n in &config.n_grid {
                let rho_value = rho_schedule(rho_mode, n)?;
                cells.push(CellSpec {
                    beta,
                    rho_mode,
                    rho_value,
                    n,
                    m: config.m_for(n),
                    index,
                    kernel: Kernel::sigmoid(beta, rho_value)?,
                });
                index += 1;
            }
        }
    }
    let jobs: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..config.reps).map(move |r| (c, r))).collect();
    let mut rows: Vec<RateRow> = jobs
        .into_par_iter()
        .map(|(c, rep)| -> Result<RateRow> {
            let cell = &cells[c];
            let seed = derive_seed(config.seed, &[role::REP, cell.index, rep as u64]);
            let sup_dev = replicate_sup_dev(
                &cell.kernel,
                cell.m,
                cell.n,
                seed,
                config.directions,
                config.support_restarts,
            )?;
            Ok(RateRow {
                beta: cell.beta,
                rho_mode: cell.rho_mode,
                rho_value: cell.rho_value,
                n: cell.n,
                m: cell.m,
                rep,
                seed,
                directions: config.directions + 2,
                sup_dev,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(mode_rank(a.rho_mode).cmp(&mode_rank(b.rho_mode)))
            .then(a.n.cmp(&b.n))
            .then(a.rep.cmp(&b.rep))
    });
    eprintln!("rate: {} rows in {:.1} s", rows.len(), start.elapsed().as_secs_f64());
    Ok(rows)
}

pub fn median(values: &mut Vec<f64>) -> Option<f64> {
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Least-squares slope of ln(median sup_dev) against ln(n), one entry per
/// (beta, rho mode) group.
pub fn rate_slopes(rows: &[RateRow]) -> Vec<(f64, RhoMode, f64)> {
    let mut groups: Vec<(f64, RhoMode)> = Vec::new();
    for r in rows {
        if !groups.iter().any(|&(b, m)| b == r.beta && m == r.rho_mode) {
            groups.push((r.beta, r.rho_mode));
        }
    }
    let mut out = Vec::new();
    for (beta, mode) in groups {
        let mut ns: Vec<usize> = rows
            .iter()
            .filter(|r| r.beta == beta && r.rho_mode == mode)
            .map(|r| r.n)
            .collect();
        ns.sort_unstable();
        ns.dedup();
        let points: Vec<(f64, f64)> = ns
            .iter()
            .filter_map(|&n| {
                let mut vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.beta == beta && r.rho_mode == mode && r.n == n)
                    .map(|r| r.sup_dev)
                    .collect();
                median(&mut vals).map(|med| ((n as f64).ln(), med.max(1e-300).ln()))
            })
            .collect();
        if points.len() < 2 {
            continue;
        }
        let len = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
        let my = points.iter().map(|p| p.1).sum::<f64>() / len;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        out.push((beta, mode, sxy / sxx));
    }
    out
}

pub fn write_rate_csv(mut w: impl Write, rows: &[RateRow]) -> Result<()> {
    w.write_all(RATE_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for row in rows {
        w.write_all(row.to_csv_line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn run_rate_to_file(config: &ExperimentConfig, path: &str) -> Result<Vec<(f64, RhoMode, f64)>> {
    let rows = run_rate(config)?;
    let file =
        std::fs::File::create(path).with_context(|| format!("cannot write rate output '{path}'"))?;
    write_rate_csv(std::io::BufWriter::new(file), &rows)?;
    let slopes = rate_slopes(&rows);
    for (beta, mode, slope) in &slopes {
        println!("slope beta={beta} rho_mode={mode}: {slope:.4}");
    }
    Ok(slopes)
}
