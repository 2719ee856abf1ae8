//! Line-oriented `key = value` experiment configuration. Unknown and
//! duplicate keys are errors; `#` starts a comment.

use anyhow::{bail, Context, Result};
use std::collections::HashSet;
use std::str::FromStr;

use coclust_core::{RhoMode, RiskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Random,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub betas: Vec<f64>,
    pub rho_modes: Vec<RhoMode>,
    pub n_grid: Vec<usize>,
    /// m/n ratio; m = max(1, round(aspect * n)).
    pub aspect: f64,
    pub reps: usize,
    pub seed: u64,
    pub kinds: Vec<RiskKind>,
    pub init: InitKind,
    pub restarts: usize,
    pub anneal_steps: Option<usize>,
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub eps: f64,
    /// Proportion-grid resolution of the best-blockmodel search.
    pub phi_grid: usize,
    /// Window positions per side in fidelity / fallback grid searches.
    pub pair_grid: usize,
    /// Random directions per replicate in the rate experiment.
    pub directions: usize,
    /// Alternating restarts for the empirical support function in the
    /// rate experiment.
    pub support_restarts: usize,
    /// Default output path; the command line overrides it.
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            betas: vec![3.0],
            rho_modes: vec![RhoMode::Dense],
            n_grid: vec![100, 200],
            aspect: 1.0,
            reps: 10,
            seed: 0,
            kinds: vec![RiskKind::Pl],
            init: InitKind::Oracle,
            restarts: 8,
            anneal_steps: None,
            initial_temperature: 1.0,
            cooling_rate: 0.995,
            eps: coclust_core::DEFAULT_EPS,
            phi_grid: coclust_core::DEFAULT_PHI_GRID,
            pair_grid: coclust_core::DEFAULT_PAIR_GRID,
            directions: 20,
            support_restarts: 32,
            out: None,
        }
    }
}

fn parse_list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("{key}: bad item '{s}': {e}")))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("{key}: list must be nonempty");
    }
    Ok(items)
}

fn parse_scalar<T: FromStr>(value: &str, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| anyhow::anyhow!("{key}: bad value '{value}': {e}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                bail!("line {}: duplicate key '{key}'", lineno + 1);
            }
            match key {
                "betas" => cfg.betas = parse_list(value, key)?,
                "rho_modes" => cfg.rho_modes = parse_list(value, key)?,
                "n_grid" => cfg.n_grid = parse_list(value, key)?,
                "aspect" => cfg.aspect = parse_scalar(value, key)?,
                "reps" => cfg.reps = parse_scalar(value, key)?,
                "seed" => cfg.seed = parse_scalar(value, key)?,
                "kinds" => cfg.kinds = parse_list(value, key)?,
                "init" => {
                    cfg.init = match value {
                        "random" => InitKind::Random,
                        "oracle" => InitKind::Oracle,
                        other => bail!("init: expected 'random' or 'oracle', got '{other}'"),
                    }
                }
                "restarts" => cfg.restarts = parse_scalar(value, key)?,
                "anneal_steps" => cfg.anneal_steps = Some(parse_scalar(value, key)?),
                "initial_temperature" => cfg.initial_temperature = parse_scalar(value, key)?,
                "cooling_rate" => cfg.cooling_rate = parse_scalar(value, key)?,
                "eps" => cfg.eps = parse_scalar(value, key)?,
                "phi_grid" => cfg.phi_grid = parse_scalar(value, key)?,
                "pair_grid" => cfg.pair_grid = parse_scalar(value, key)?,
                "directions" => cfg.directions = parse_scalar(value, key)?,
                "support_restarts" => cfg.support_restarts = parse_scalar(value, key)?,
                "out" => cfg.out = Some(value.to_string()),
                other => bail!("line {}: unknown key '{other}'", lineno + 1),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.rho_modes.is_empty() || self.n_grid.is_empty() {
            bail!("betas, rho_modes, and n_grid must be nonempty");
        }
        if self.kinds.is_empty() {
            bail!("kinds must be nonempty");
        }
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if !(self.aspect > 0.0) {
            bail!("aspect must be positive");
        }
        if self.n_grid.iter().any(|&n| n < 2) {
            bail!("every n must be at least 2");
        }
        Ok(())
    }

    pub fn m_for(&self, n: usize) -> usize {
        ((self.aspect * n as f64).round() as usize).max(1)
    }
}
