//! Co-blockmodel M-estimation: search over labeling pairs with plug-in
//! block-mean connectivity, by simulated annealing over single-node
//! relabels and same-side pair swaps, followed by a greedy polish to a
//! local optimum. Restarts run concurrently on derived seeds and reduce
//! deterministically.

use rand::Rng;
use rayon::prelude::*;

use crate::binmat::{BinMat, ClassMasks};
use crate::coclust::Labeling;
use crate::error::{Error, Result};
use crate::kernels::LatentSample;
use crate::mat::Mat;
use crate::risk::{empirical_value_at, CoBlockParams, RiskKind, DEFAULT_EPS};
use crate::rng::{role, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSet {
    SingleRelabel,
    PairSwap,
    Both,
}

/// How the first restart is initialized. Later restarts always start from
/// random labelings on derived seeds.
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// Uniform label per node (class proportions unconstrained).
    Random,
    /// Two-class split of the latent positions at 1/2: class 1 below.
    OracleLatent(LatentSample),
    Provided(Labeling, Labeling),
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub restarts: usize,
    /// Annealing steps per restart; `None` resolves to `50 * (m + n)`.
    pub anneal_steps: Option<usize>,
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub moves: MoveSet,
    pub eps: f64,
    pub seed: u64,
    pub init: InitStrategy,
}

impl FitConfig {
    pub fn new(seed: u64) -> Self {
        FitConfig {
            restarts: 8,
            anneal_steps: None,
            initial_temperature: 1.0,
            cooling_rate: 0.995,
            moves: MoveSet::Both,
            eps: DEFAULT_EPS,
            seed,
            init: InitStrategy::Random,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::Domain("cooling rate must lie in (0,1)".into()));
        }
        if !(self.initial_temperature > 0.0) {
            return Err(Error::Domain("initial temperature must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Domain("eps must lie in (0, 1/2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub phi_hat: CoBlockParams,
    pub s: Labeling,
    pub t: Labeling,
    pub objective: f64,
    pub kind: RiskKind,
    /// Best objective reached by each restart, in restart order.
    pub trace: Vec<f64>,
    pub seed: u64,
}

/// Per-block means of the array under a labeling pair, clamped into
/// `[eps, 1-eps]`; empty blocks take 1/2.
pub fn block_means(a: &BinMat, s: &Labeling, t: &Labeling, eps: f64) -> Result<Mat> {
    if s.len() != a.m() || t.len() != a.n() {
        return Err(Error::DimensionMismatch("labeling does not match array".into()));
    }
    let k1 = s.k();
    let k2 = t.k();
    let counts = crate::coclust::block_edge_counts(a, s, t);
    let rc = s.class_counts();
    let cc = t.class_counts();
    let mut means = Mat::zeros(k1, k2);
    for x in 0..k1 {
        for y in 0..k2 {
            let n_block = rc.counts()[x] * cc.counts()[y];
            means[(x, y)] = if n_block == 0 {
                0.5
            } else {
                (counts[x * k2 + y] as f64 / n_block as f64).clamp(eps, 1.0 - eps)
            };
        }
    }
    Ok(means)
}

/// Initial labeling pair for a fit.
pub fn init_labels(
    strategy: &InitStrategy,
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<(Labeling, Labeling)> {
    match strategy {
        InitStrategy::Random => {
            let mut rng = stream_rng(seed, &[role::INIT]);
            let s: Vec<u32> = (0..m).map(|_| rng.random_range(0..k as u32)).collect();
            let t: Vec<u32> = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
            Ok((Labeling::new(s, k)?, Labeling::new(t, k)?))
        }
        InitStrategy::OracleLatent(latents) => {
            if k != 2 {
                return Err(Error::Unsupported("latent-split initialization is two-class".into()));
            }
            if latents.xi.len() != m || latents.zeta.len() != n {
                return Err(Error::DimensionMismatch("latent sample does not match array".into()));
            }
            let s: Vec<u32> = latents.xi.iter().map(|&x| u32::from(x >= 0.5)).collect();
            let t: Vec<u32> = latents.zeta.iter().map(|&z| u32::from(z >= 0.5)).collect();
            Ok((Labeling::new(s, k)?, Labeling::new(t, k)?))
        }
        InitStrategy::Provided(s, t) => {
            if s.len() != m || t.len() != n || s.k() != k || t.k() != k {
                return Err(Error::DimensionMismatch(
                    "provided labelings do not match array and K".into(),
                ));
            }
            Ok((s.clone(), t.clone()))
        }
    }
}

/// Mutable labeling state with exact block counts and an incrementally
/// maintained goodness value (the objective for pl, its negation for ls,
/// so larger is always better).
struct LabelState<'a> {
    a: &'a BinMat,
    k: usize,
    kind: RiskKind,
    eps: f64,
    s: Vec<u32>,
    t: Vec<u32>,
    row_counts: Vec<usize>,
    col_counts: Vec<usize>,
    edges: Vec<i64>,
    s_masks: ClassMasks,
    t_masks: ClassMasks,
    goodness: f64,
}

impl<'a> LabelState<'a> {
    fn new(a: &'a BinMat, k: usize, kind: RiskKind, eps: f64, s: &Labeling, t: &Labeling) -> Self {
        let mut row_counts = vec![0usize; k];
        let mut col_counts = vec![0usize; k];
        for &l in s.labels() {
            row_counts[l as usize] += 1;
        }
        for &l in t.labels() {
            col_counts[l as usize] += 1;
        }
        let edges: Vec<i64> = crate::coclust::block_edge_counts(a, s, t)
            .into_iter()
            .map(|c| c as i64)
            .collect();
        let s_masks = ClassMasks::new(s.labels(), k, a.col_words());
        let t_masks = ClassMasks::new(t.labels(), k, a.row_words());
        let mut state = LabelState {
            a,
            k,
            kind,
            eps,
            s: s.labels().to_vec(),
            t: t.labels().to_vec(),
            row_counts,
            col_counts,
            edges,
            s_masks,
            t_masks,
            goodness: 0.0,
        };
        state.goodness = state.full_goodness();
        state
    }

    fn block_term(&self, e: i64, n_block: i64) -> f64 {
        if n_block == 0 {
            return 0.0;
        }
        let e = e as f64;
        let nb = n_block as f64;
        let mean = (e / nb).clamp(self.eps, 1.0 - self.eps);
        match self.kind {
            RiskKind::Pl => e * mean.ln() + (nb - e) * (1.0 - mean).ln(),
            // negated least squares so that larger is better
            RiskKind::Ls => -(nb * mean * mean - 2.0 * mean * e + e),
        }
    }

    fn full_goodness(&self) -> f64 {
        let mut acc = 0.0;
        for x in 0..self.k {
            for y in 0..self.k {
                acc += self.block_term(
                    self.edges[x * self.k + y],
                    (self.row_counts[x] * self.col_counts[y]) as i64,
                );
            }
        }
        acc / (self.a.m() * self.a.n()) as f64
    }

    /// Ones of row `i` per column class.
    fn row_profile(&self, i: usize) -> Vec<i64> {
        (0..self.k).map(|b| self.a.row_mask_count(i, self.t_masks.mask(b)) as i64).collect()
    }

    fn col_profile(&self, j: usize) -> Vec<i64> {
        (0..self.k).map(|x| self.a.col_mask_count(j, self.s_masks.mask(x)) as i64).collect()
    }

    /// Goodness delta for relabeling one node; `profile` is the node's
    /// per-class one count against the fixed opposite side.
    fn relabel_delta(&self, side: Side, from: usize, to: usize, profile: &[i64]) -> f64 {
        if from == to {
            return 0.0;
        }
        let k = self.k;
        let mn = (self.a.m() * self.a.n()) as f64;
        let mut delta = 0.0;
        match side {
            Side::Row => {
                for b in 0..k {
                    let n_from = self.col_counts[b] as i64;
                    let old_f = self.edges[from * k + b];
                    let old_t = self.edges[to * k + b];
                    delta -= self.block_term(old_f, self.row_counts[from] as i64 * n_from);
                    delta -= self.block_term(old_t, self.row_counts[to] as i64 * n_from);
                    delta += self.block_term(old_f - profile[b], (self.row_counts[from] as i64 - 1) * n_from);
                    delta += self.block_term(old_t + profile[b], (self.row_counts[to] as i64 + 1) * n_from);
                }
            }
            Side::Col => {
                for x in 0..k {
                    let n_from = self.row_counts[x] as i64;
                    let old_f = self.edges[x * k + from];
                    let old_t = self.edges[x * k + to];
                    delta -= self.block_term(old_f, n_from * self.col_counts[from] as i64);
                    delta -= self.block_term(old_t, n_from * self.col_counts[to] as i64);
                    delta += self.block_term(old_f - profile[x], n_from * (self.col_counts[from] as i64 - 1));
                    delta += self.block_term(old_t + profile[x], n_from * (self.col_counts[to] as i64 + 1));
                }
            }
        }
        delta / mn
    }

    fn apply_relabel(&mut self, side: Side, idx: usize, to: usize, profile: &[i64], delta: f64) {
        let k = self.k;
        match side {
            Side::Row => {
                let from = self.s[idx] as usize;
                for b in 0..k {
                    self.edges[from * k + b] -= profile[b];
                    self.edges[to * k + b] += profile[b];
                }
                self.row_counts[from] -= 1;
                self.row_counts[to] += 1;
                self.s[idx] = to as u32;
                self.s_masks.move_index(idx, from, to);
            }
            Side::Col => {
                let from = self.t[idx] as usize;
                for x in 0..k {
                    self.edges[x * k + from] -= profile[x];
                    self.edges[x * k + to] += profile[x];
                }
                self.col_counts[from] -= 1;
                self.col_counts[to] += 1;
                self.t[idx] = to as u32;
                self.t_masks.move_index(idx, from, to);
            }
        }
        self.goodness += delta;
    }

    /// Swap delta: relabel both nodes (same side, distinct classes);
    /// class sizes are unchanged so the two block-count shifts compose.
    fn swap_delta(&self, side: Side, i: usize, j: usize, pi: &[i64], pj: &[i64]) -> f64 {
        let k = self.k;
        let mn = (self.a.m() * self.a.n()) as f64;
        let (ci, cj) = match side {
            Side::Row => (self.s[i] as usize, self.s[j] as usize),
            Side::Col => (self.t[i] as usize, self.t[j] as usize),
        };
        debug_assert_ne!(ci, cj);
        let mut delta = 0.0;
        for b in 0..k {
            let (e_i, e_j, n_i, n_j) = match side {
                Side::Row => (
                    self.edges[ci * k + b],
                    self.edges[cj * k + b],
                    (self.row_counts[ci] * self.col_counts[b]) as i64,
                    (self.row_counts[cj] * self.col_counts[b]) as i64,
                ),
                Side::Col => (
                    self.edges[b * k + ci],
                    self.edges[b * k + cj],
                    (self.row_counts[b] * self.col_counts[ci]) as i64,
                    (self.row_counts[b] * self.col_counts[cj]) as i64,
                ),
            };
            let shift = pj[b] - pi[b];
            delta -= self.block_term(e_i, n_i) + self.block_term(e_j, n_j);
            delta += self.block_term(e_i + shift, n_i) + self.block_term(e_j - shift, n_j);
        }
        delta / mn
    }

    fn apply_swap(&mut self, side: Side, i: usize, j: usize, pi: &[i64], pj: &[i64], delta: f64) {
        let k = self.k;
        let (ci, cj) = match side {
            Side::Row => (self.s[i] as usize, self.s[j] as usize),
            Side::Col => (self.t[i] as usize, self.t[j] as usize),
        };
        for b in 0..k {
            let shift = pj[b] - pi[b];
            match side {
                Side::Row => {
                    self.edges[ci * k + b] += shift;
                    self.edges[cj * k + b] -= shift;
                }
                Side::Col => {
                    self.edges[b * k + ci] += shift;
                    self.edges[b * k + cj] -= shift;
                }
            }
        }
        match side {
            Side::Row => {
                self.s.swap(i, j);
                self.s_masks.move_index(i, ci, cj);
                self.s_masks.move_index(j, cj, ci);
            }
            Side::Col => {
                self.t.swap(i, j);
                self.t_masks.move_index(i, ci, cj);
                self.t_masks.move_index(j, cj, ci);
            }
        }
        self.goodness += delta;
    }

    fn labelings(&self) -> (Labeling, Labeling) {
        (
            Labeling::new(self.s.clone(), self.k).expect("labels stay in range"),
            Labeling::new(self.t.clone(), self.k).expect("labels stay in range"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Row,
    Col,
}

fn anneal(state: &mut LabelState, steps: usize, config: &FitConfig, restart: u64) -> (Vec<u32>, Vec<u32>, f64) {
    let mut rng = stream_rng(config.seed, &[role::ANNEAL, restart]);
    let m = state.a.m();
    let n = state.a.n();
    let mut temp = config.initial_temperature;
    let mut best = (state.s.clone(), state.t.clone(), state.goodness);
    for _ in 0..steps {
        let side = if rng.random_range(0..m + n) < m { Side::Row } else { Side::Col };
        let len = if side == Side::Row { m } else { n };
        let use_swap = match config.moves {
            MoveSet::SingleRelabel => false,
            MoveSet::PairSwap => true,
            MoveSet::Both => rng.random::<bool>(),
        };
        if use_swap {
            let i = rng.random_range(0..len);
            let j = rng.random_range(0..len);
            let (ci, cj) = match side {
                Side::Row => (state.s[i], state.s[j]),
                Side::Col => (state.t[i], state.t[j]),
            };
            if ci != cj {
                let (pi, pj) = match side {
                    Side::Row => (state.row_profile(i), state.row_profile(j)),
                    Side::Col => (state.col_profile(i), state.col_profile(j)),
                };
                let delta = state.swap_delta(side, i, j, &pi, &pj);
                if delta >= 0.0 || rng.random::<f64>() < (delta / temp).exp() {
                    state.apply_swap(side, i, j, &pi, &pj, delta);
                }
            }
        } else {
            let idx = rng.random_range(0..len);
            let from = match side {
                Side::Row => state.s[idx] as usize,
                Side::Col => state.t[idx] as usize,
            };
            let mut to = rng.random_range(0..state.k.max(2) - 1);
            if to >= from {
                to += 1;
            }
            if to < state.k {
                let profile = match side {
                    Side::Row => state.row_profile(idx),
                    Side::Col => state.col_profile(idx),
                };
                let delta = state.relabel_delta(side, from, to, &profile);
                if delta >= 0.0 || rng.random::<f64>() < (delta / temp).exp() {
                    state.apply_relabel(side, idx, to, &profile, delta);
                }
            }
        }
        if state.goodness > best.2 {
            best = (state.s.clone(), state.t.clone(), state.goodness);
        }
        temp *= config.cooling_rate;
    }
    best
}

/// Apply strictly improving single relabels until a full sweep finds none.
fn greedy_polish(state: &mut LabelState) {
    const MAX_SWEEPS: usize = 1000;
    let improvement_floor = |g: f64| 1e-13 * (1.0 + g.abs());
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        let before = state.goodness;
        for side in [Side::Row, Side::Col] {
            let len = if side == Side::Row { state.a.m() } else { state.a.n() };
            for idx in 0..len {
                let from = match side {
                    Side::Row => state.s[idx] as usize,
                    Side::Col => state.t[idx] as usize,
                };
                let profile = match side {
                    Side::Row => state.row_profile(idx),
                    Side::Col => state.col_profile(idx),
                };
                let mut best_move: Option<(usize, f64)> = None;
                for to in 0..state.k {
                    if to == from {
                        continue;
                    }
                    let delta = state.relabel_delta(side, from, to, &profile);
                    if delta > improvement_floor(state.goodness)
                        && best_move.is_none_or(|(_, bd)| delta > bd)
                    {
                        best_move = Some((to, delta));
                    }
                }
                if let Some((to, delta)) = best_move {
                    state.apply_relabel(side, idx, to, &profile, delta);
                    improved = true;
                }
            }
        }
        debug_assert!(state.goodness >= before - 1e-9, "polish must not decrease goodness");
        if !improved {
            break;
        }
    }
}

fn restart_init(
    a: &BinMat,
    k: usize,
    config: &FitConfig,
    restart: usize,
) -> Result<(Labeling, Labeling)> {
    if restart == 0 {
        init_labels(&config.init, a.m(), a.n(), k, derive_init_seed(config.seed, 0))
    } else {
        init_labels(
            &InitStrategy::Random,
            a.m(),
            a.n(),
            k,
            derive_init_seed(config.seed, restart as u64),
        )
    }
}

fn derive_init_seed(seed: u64, restart: u64) -> u64 {
    crate::rng::derive_seed(seed, &[role::FIT_RESTART, restart])
}

/// Fit a K-class co-blockmodel by annealing over labelings with plug-in
/// block means, returning the best restart. Deterministic given the
/// config seed; the trace records each restart's best objective.
pub fn fit_coblockmodel(
    a: &BinMat,
    k: usize,
    kind: RiskKind,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let steps = config.anneal_steps.unwrap_or(50 * (a.m() + a.n()));
    let runs: Vec<(usize, f64, Labeling, Labeling)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| -> Result<(usize, f64, Labeling, Labeling)> {
            let (s0, t0) = restart_init(a, k, config, r)?;
            let mut state = LabelState::new(a, k, kind, config.eps, &s0, &t0);
            if k > 1 {
                let (bs, bt, bg) = anneal(&mut state, steps, config, r as u64);
                if bg > state.goodness {
                    state = LabelState::new(
                        a,
                        k,
                        kind,
                        config.eps,
                        &Labeling::new(bs, k)?,
                        &Labeling::new(bt, k)?,
                    );
                }
                greedy_polish(&mut state);
            }
            let (s, t) = state.labelings();
            Ok((r, state.goodness, s, t))
        })
        .collect::<Result<_>>()?;

    let mut trace = vec![0.0; config.restarts];
    for (r, g, _, _) in &runs {
        // goodness is the objective for pl and its negation for ls
        trace[*r] = match kind {
            RiskKind::Pl => *g,
            RiskKind::Ls => -*g,
        };
    }
    let (_, _, s, t) = runs
        .into_iter()
        .min_by(|(ri, gi, _, _), (rj, gj, _, _)| gj.total_cmp(gi).then(ri.cmp(rj)))
        .expect("at least one restart");

    let theta = block_means(a, &s, &t, config.eps)?;
    let phi_hat = CoBlockParams::new(s.class_counts(), t.class_counts(), theta)?;
    let objective = empirical_value_at(a, &phi_hat, &s, &t, kind, config.eps)?;
    Ok(FitResult { phi_hat, s, t, objective, kind, trace, seed: config.seed })
}

/// Serialize a fit result as a plain-text record: K, kind, objective,
/// class proportions, theta row-major, then the labelings as 1-based
/// lines.
pub fn write_fit_record(mut w: impl std::io::Write, fit: &FitResult) -> std::io::Result<()> {
    writeln!(w, "K {}", fit.phi_hat.k())?;
    writeln!(w, "kind {}", fit.kind)?;
    writeln!(w, "objective {:.17e}", fit.objective)?;
    let fmt_props = |p: Vec<f64>| -> String {
        p.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ")
    };
    writeln!(w, "mu {}", fmt_props(fit.phi_hat.mu.proportions()))?;
    writeln!(w, "nu {}", fmt_props(fit.phi_hat.nu.proportions()))?;
    let theta: Vec<String> =
        fit.phi_hat.theta.data().iter().map(|v| format!("{v:.17e}")).collect();
    writeln!(w, "theta {}", theta.join(" "))?;
    writeln!(w, "S {}", fit.s.to_one_based_line())?;
    writeln!(w, "T {}", fit.t.to_one_based_line())?;
    Ok(())
}
