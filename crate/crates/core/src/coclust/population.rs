//! Population-side co-clustering: two-class interval partitions of [0,1],
//! kernel block masses, and the population support function. For separable
//! unclamped kernels the per-side objective is affine in the monotone
//! sigmoid, so the supremum over all measure-respecting partitions is
//! attained among the four canonical interval-partition pairs; every other
//! kernel goes through a threshold-grid search over the same interval
//! family.

use crate::coclust::{BlockSummary, Direction};
use crate::error::{Error, Result};
use crate::kernels::{BlockKernel, GridKernel, Kernel, SigmoidKernel};
use crate::mat::Mat;
use crate::quad;

/// Which class occupies the sliding window of a threshold partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowClass {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionKind {
    /// Class 1 is the lower interval `[0, mu1)`.
    Canonical1,
    /// Class 1 is the upper interval `[1 - mu1, 1]`.
    Canonical2,
    /// The window class occupies `[t, t + width)`; the other class holds
    /// the complement.
    Threshold { t: f64, window: WindowClass },
}

/// Two-class partition of [0,1] into intervals with class measures
/// `(mu1, 1 - mu1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPartition {
    mu1: f64,
    kind: PartitionKind,
}

impl IntervalPartition {
    pub fn canonical_1(mu1: f64) -> Result<Self> {
        check_measure(mu1)?;
        Ok(IntervalPartition { mu1, kind: PartitionKind::Canonical1 })
    }

    pub fn canonical_2(mu1: f64) -> Result<Self> {
        check_measure(mu1)?;
        Ok(IntervalPartition { mu1, kind: PartitionKind::Canonical2 })
    }

    pub fn threshold(mu1: f64, t: f64, window: WindowClass) -> Result<Self> {
        check_measure(mu1)?;
        let width = match window {
            WindowClass::First => mu1,
            WindowClass::Second => 1.0 - mu1,
        };
        if !(0.0..=1.0).contains(&t) || t + width > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "window [{t}, {}] does not fit in [0,1]",
                t + width
            )));
        }
        Ok(IntervalPartition { mu1, kind: PartitionKind::Threshold { t, window } })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn measures(&self) -> [f64; 2] {
        [self.mu1, 1.0 - self.mu1]
    }

    /// Closed intervals making up one class (zero-width pieces dropped).
    pub fn class_intervals(&self, class: usize) -> Vec<(f64, f64)> {
        debug_assert!(class < 2);
        let mu1 = self.mu1;
        let raw: Vec<(f64, f64)> = match self.kind {
            PartitionKind::Canonical1 => {
                if class == 0 {
                    vec![(0.0, mu1)]
                } else {
                    vec![(mu1, 1.0)]
                }
            }
            PartitionKind::Canonical2 => {
                if class == 0 {
                    vec![(1.0 - mu1, 1.0)]
                } else {
                    vec![(0.0, 1.0 - mu1)]
                }
            }
            PartitionKind::Threshold { t, window } => {
                let width = match window {
                    WindowClass::First => mu1,
                    WindowClass::Second => 1.0 - mu1,
                };
                let in_window = (class == 0) == (window == WindowClass::First);
                let hi = (t + width).min(1.0);
                if in_window {
                    vec![(t, hi)]
                } else {
                    vec![(0.0, t), (hi, 1.0)]
                }
            }
        };
        raw.into_iter().filter(|&(a, b)| b - a > 0.0).collect()
    }

    /// Short text form for witnesses and logs.
    pub fn describe(&self) -> String {
        match self.kind {
            PartitionKind::Canonical1 => format!("canonical_1(mu1={})", self.mu1),
            PartitionKind::Canonical2 => format!("canonical_2(mu1={})", self.mu1),
            PartitionKind::Threshold { t, window } => {
                let w = match window {
                    WindowClass::First => 1,
                    WindowClass::Second => 2,
                };
                format!("threshold(t={t}, class={w}, mu1={})", self.mu1)
            }
        }
    }
}

fn check_measure(mu1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu1) {
        return Err(Error::Domain(format!("class measure must lie in [0,1], got {mu1}")));
    }
    Ok(())
}

/// The four canonical partition pairs of the separable-kernel reduction,
/// in lexicographic `(i, j)` order.
pub fn canonical_pairs(mu1: f64, nu1: f64) -> Result<[(IntervalPartition, IntervalPartition); 4]> {
    let s1 = IntervalPartition::canonical_1(mu1)?;
    let s2 = IntervalPartition::canonical_2(mu1)?;
    let t1 = IntervalPartition::canonical_1(nu1)?;
    let t2 = IntervalPartition::canonical_2(nu1)?;
    Ok([(s1, t1), (s1, t2), (s2, t1), (s2, t2)])
}

fn rect_mass(kernel: &Kernel, x: (f64, f64), y: (f64, f64)) -> Result<f64> {
    match kernel {
        Kernel::Sigmoid(k) if k.valid_unclamped() => {
            let fx = k.f_integral(x.0, x.1)?;
            let fy = k.f_integral(y.0, y.1)?;
            Ok(k.rho() * (fx * fy + 0.5 * (x.1 - x.0) * (y.1 - y.0)))
        }
        Kernel::Sigmoid(k) => {
            Ok(quad::integrate2d(|a, b| k.eval(a, b), x, y, 1e-8)?.value)
        }
        Kernel::Block(k) => Ok(piecewise_rect_mass(
            &piece_breaks_block(k).0,
            &piece_breaks_block(k).1,
            &k.phi().theta,
            x,
            y,
        )),
        Kernel::Grid(k) => {
            let (bx, by) = piece_breaks_grid(k);
            Ok(piecewise_rect_mass(&bx, &by, k.values(), x, y))
        }
    }
}

fn piece_breaks_block(k: &BlockKernel) -> (Vec<f64>, Vec<f64>) {
    (k.row_breaks(), k.col_breaks())
}

fn piece_breaks_grid(k: &GridKernel) -> (Vec<f64>, Vec<f64>) {
    let bx = (0..=k.rows()).map(|i| i as f64 / k.rows() as f64).collect();
    let by = (0..=k.cols()).map(|j| j as f64 / k.cols() as f64).collect();
    (bx, by)
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

fn piecewise_rect_mass(bx: &[f64], by: &[f64], theta: &Mat, x: (f64, f64), y: (f64, f64)) -> f64 {
    let mut acc = 0.0;
    for c in 0..bx.len() - 1 {
        let ox = overlap(bx[c], bx[c + 1], x.0, x.1);
        if ox == 0.0 {
            continue;
        }
        for d in 0..by.len() - 1 {
            let oy = overlap(by[d], by[d + 1], y.0, y.1);
            if oy > 0.0 {
                acc += theta[(c, d)] * ox * oy;
            }
        }
    }
    acc
}

/// Kernel mass per class pair: `mass[a][b] = integral of omega over
/// sigma^{-1}(a) x tau^{-1}(b)`.
pub fn population_block_mass(
    kernel: &Kernel,
    sigma: &IntervalPartition,
    tau: &IntervalPartition,
) -> Result<BlockSummary> {
    let mut mass = Mat::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = 0.0;
            for &ix in &sigma.class_intervals(a) {
                for &iy in &tau.class_intervals(b) {
                    acc += rect_mass(kernel, ix, iy)?;
                }
            }
            mass[(a, b)] = acc;
        }
    }
    Ok(BlockSummary::from_mass(
        mass,
        sigma.measures().to_vec(),
        tau.measures().to_vec(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Exact four-case reduction; only valid for separable unclamped
    /// kernels.
    FourCase,
    /// Threshold-grid search over interval partitions with the given
    /// number of window positions per side.
    Grid(usize),
}

pub const DEFAULT_ORACLE_GRID: usize = 256;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub sigma: IntervalPartition,
    pub tau: IntervalPartition,
    /// False when the value is exact for the supremum over all
    /// measure-respecting partitions, true for the flagged grid
    /// approximation of clamped kernels.
    pub approximate: bool,
}

/// Population support function `h(Gamma) = sup over (sigma, tau) of
/// <Gamma, omega/sigma tau>` for two-class partitions with measures
/// `(mu1, 1-mu1)` and `(nu1, 1-nu1)`.
pub fn support_oracle(
    kernel: &Kernel,
    mu1: f64,
    nu1: f64,
    gamma: &Direction,
    method: OracleMethod,
) -> Result<OracleResult> {
    if gamma.k() != 2 {
        return Err(Error::Unsupported("population oracles are two-class only".into()));
    }
    match method {
        OracleMethod::FourCase => {
            if kernel.separable_unclamped().is_none() {
                return Err(Error::Unsupported(
                    "four-case oracle requires a separable unclamped kernel".into(),
                ));
            }
            let mut best: Option<OracleResult> = None;
            for (s, t) in canonical_pairs(mu1, nu1)? {
                let bs = population_block_mass(kernel, &s, &t)?;
                let v = gamma.gamma().inner(&bs.mass);
                if best.as_ref().is_none_or(|b| v > b.value) {
                    best = Some(OracleResult { value: v, sigma: s, tau: t, approximate: false });
                }
            }
            Ok(best.expect("four canonical pairs"))
        }
        OracleMethod::Grid(g) => {
            let gm = gamma.gamma().clone();
            let (value, sigma, tau, approximate) =
                optimize_over_pairs(kernel, mu1, nu1, g, OptimizeGoal::Max, |p| {
                    gm[(0, 0)] * p.mass[0]
                        + gm[(0, 1)] * p.mass[1]
                        + gm[(1, 0)] * p.mass[2]
                        + gm[(1, 1)] * p.mass[3]
                })?;
            Ok(OracleResult { value, sigma, tau, approximate })
        }
    }
}

// ---------------------------------------------------------------------------
// Threshold-grid pair search engine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub(crate) enum OptimizeGoal {
    Max,
    Min,
}

/// Per-pair quantities handed to a score closure: row-major 2x2 mass and
/// the class measures of both sides.
pub(crate) struct PairScore<'a> {
    pub mass: &'a [f64; 4],
    pub w_sigma: &'a [f64; 2],
    pub w_tau: &'a [f64; 2],
}

enum SideData {
    /// Per-class integral of f (separable kernels).
    Sep([f64; 2]),
    /// Per-class overlap with the kernel's constant pieces along this axis.
    Pieces([Vec<f64>; 2]),
    /// Per-class node-index intervals into the panel cumulative table.
    Nodes([Vec<(usize, usize)>; 2]),
}

struct SideCand {
    part: IntervalPartition,
    w: [f64; 2],
    data: SideData,
}

enum PairEval {
    Sep { rho: f64 },
    Pieces { theta: Mat },
    Panels { cum: Vec<f64>, stride: usize },
}

fn candidate_partitions(mu1: f64, grid: usize) -> Result<Vec<IntervalPartition>> {
    let mut out = vec![IntervalPartition::canonical_1(mu1)?, IntervalPartition::canonical_2(mu1)?];
    for window in [WindowClass::First, WindowClass::Second] {
        let width = match window {
            WindowClass::First => mu1,
            WindowClass::Second => 1.0 - mu1,
        };
        for kidx in 0..=grid {
            let t = kidx as f64 / grid as f64;
            if t + width <= 1.0 + 1e-12 {
                out.push(IntervalPartition::threshold(mu1, t.min(1.0 - width).max(0.0), window)?);
            }
        }
    }
    Ok(out)
}

/// Cumulative antiderivative of f at a sorted list of points.
fn f_cumulative(k: &SigmoidKernel, points: &[f64]) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(points.len());
    out.push(0.0);
    for w in points.windows(2) {
        acc += quad::integrate(|x| k.f(x), w[0], w[1], 1e-13)?.value;
        out.push(acc);
    }
    Ok(out)
}

fn lookup(points: &[f64], x: f64) -> usize {
    points.partition_point(|&p| p < x).min(points.len() - 1)
}

fn build_sides(
    kernel: &Kernel,
    parts: Vec<IntervalPartition>,
    axis: usize,
    grid: usize,
    eval: &PairEval,
) -> Result<Vec<SideCand>> {
    match kernel {
        Kernel::Sigmoid(k) if k.valid_unclamped() => {
            let mut pts: Vec<f64> = vec![0.0, 1.0];
            for p in &parts {
                for c in 0..2 {
                    for (a, b) in p.class_intervals(c) {
                        pts.push(a);
                        pts.push(b);
                    }
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let cum = f_cumulative(k, &pts)?;
            let f_of = |a: f64, b: f64| cum[lookup(&pts, b)] - cum[lookup(&pts, a)];
            Ok(parts
                .into_iter()
                .map(|p| {
                    let mut f = [0.0; 2];
                    for (c, fc) in f.iter_mut().enumerate() {
                        for (a, b) in p.class_intervals(c) {
                            *fc += f_of(a, b);
                        }
                    }
                    SideCand { w: p.measures(), part: p, data: SideData::Sep(f) }
                })
                .collect())
        }
        Kernel::Sigmoid(_) => {
            let g = match eval {
                PairEval::Panels { stride, .. } => stride - 1,
                _ => unreachable!("clamped kernels use the panel evaluator"),
            };
            Ok(parts
                .into_iter()
                .map(|p| {
                    let mut iv: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
                    for (c, slot) in iv.iter_mut().enumerate() {
                        for (a, b) in p.class_intervals(c) {
                            let lo = (a * g as f64).round() as usize;
                            let hi = (b * g as f64).round() as usize;
                            if hi > lo {
                                slot.push((lo.min(g), hi.min(g)));
                            }
                        }
                    }
                    SideCand { w: p.measures(), part: p, data: SideData::Nodes(iv) }
                })
                .collect())
        }
        Kernel::Block(_) | Kernel::Grid(_) => {
            let breaks = match kernel {
                Kernel::Block(k) => {
                    if axis == 0 {
                        k.row_breaks()
                    } else {
                        k.col_breaks()
                    }
                }
                Kernel::Grid(k) => {
                    let (bx, by) = piece_breaks_grid(k);
                    if axis == 0 {
                        bx
                    } else {
                        by
                    }
                }
                _ => unreachable!(),
            };
            let _ = grid;
            Ok(parts
                .into_iter()
                .map(|p| {
                    let mut over: [Vec<f64>; 2] =
                        [vec![0.0; breaks.len() - 1], vec![0.0; breaks.len() - 1]];
                    for (c, slot) in over.iter_mut().enumerate() {
                        for (a, b) in p.class_intervals(c) {
                            for (piece, o) in slot.iter_mut().enumerate() {
                                *o += overlap(breaks[piece], breaks[piece + 1], a, b);
                            }
                        }
                    }
                    SideCand { w: p.measures(), part: p, data: SideData::Pieces(over) }
                })
                .collect())
        }
    }
}

fn pair_mass(eval: &PairEval, sc: &SideCand, tc: &SideCand) -> [f64; 4] {
    let mut mass = [0.0; 4];
    match (eval, &sc.data, &tc.data) {
        (PairEval::Sep { rho }, SideData::Sep(fs), SideData::Sep(ft)) => {
            for a in 0..2 {
                for b in 0..2 {
                    mass[a * 2 + b] = rho * (fs[a] * ft[b] + 0.5 * sc.w[a] * tc.w[b]);
                }
            }
        }
        (PairEval::Pieces { theta }, SideData::Pieces(os), SideData::Pieces(ot)) => {
            for a in 0..2 {
                for b in 0..2 {
                    let mut acc = 0.0;
                    for (c, &oc) in os[a].iter().enumerate() {
                        if oc == 0.0 {
                            continue;
                        }
                        for (d, &od) in ot[b].iter().enumerate() {
                            acc += theta[(c, d)] * oc * od;
                        }
                    }
                    mass[a * 2 + b] = acc;
                }
            }
        }
        (PairEval::Panels { cum, stride }, SideData::Nodes(is), SideData::Nodes(it)) => {
            let rect = |i0: usize, i1: usize, j0: usize, j1: usize| {
                cum[i1 * stride + j1] - cum[i0 * stride + j1] - cum[i1 * stride + j0]
                    + cum[i0 * stride + j0]
            };
            for a in 0..2 {
                for b in 0..2 {
                    let mut acc = 0.0;
                    for &(i0, i1) in &is[a] {
                        for &(j0, j1) in &it[b] {
                            acc += rect(i0, i1, j0, j1);
                        }
                    }
                    mass[a * 2 + b] = acc;
                }
            }
        }
        _ => unreachable!("side data matches the evaluator by construction"),
    }
    mass
}

const X7: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const W7: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Cumulative 7x7-Gauss panel integrals of a kernel over an equispaced
/// grid. Rectangle masses with node-aligned corners come out by
/// inclusion-exclusion; the table backs the flagged grid approximation
/// for clamped kernels.
pub(crate) struct NodeMassTable {
    cum: Vec<f64>,
    stride: usize,
    g: usize,
}

impl NodeMassTable {
    pub(crate) fn build(kernel: &Kernel, g: usize) -> Self {
        let stride = g + 1;
        let h = 1.0 / g as f64;
        // separable kernels only need f at the per-axis Gauss nodes; the
        // panel fill is then a clamped product
        let axis_nodes: Vec<f64> = (0..g)
            .flat_map(|i| {
                let c = (i as f64 + 0.5) * h;
                X7.iter().map(move |x| c + 0.5 * h * x)
            })
            .collect();
        let panel_at: Box<dyn Fn(usize, usize) -> f64> = match kernel {
            Kernel::Sigmoid(k) => {
                let rho = k.rho();
                let f_vals: Vec<f64> = axis_nodes.iter().map(|&x| k.f(x)).collect();
                Box::new(move |i: usize, j: usize| {
                    let mut acc = 0.0;
                    for (a, wx) in W7.iter().enumerate() {
                        let fx = f_vals[i * 7 + a];
                        let mut row = 0.0;
                        for (b, wy) in W7.iter().enumerate() {
                            row += wy * (rho * (fx * f_vals[j * 7 + b] + 0.5)).clamp(0.0, 1.0);
                        }
                        acc += wx * row;
                    }
                    acc
                })
            }
            other => {
                let k = other.clone();
                let nodes = axis_nodes.clone();
                Box::new(move |i: usize, j: usize| {
                    let mut acc = 0.0;
                    for (a, wx) in W7.iter().enumerate() {
                        let x = nodes[i * 7 + a];
                        let mut row = 0.0;
                        for (b, wy) in W7.iter().enumerate() {
                            row += wy * k.eval(x, nodes[j * 7 + b]);
                        }
                        acc += wx * row;
                    }
                    acc
                })
            }
        };
        let scale = 0.25 * h * h;
        let mut cum = vec![0.0; stride * stride];
        for i in 1..stride {
            for j in 1..stride {
                cum[i * stride + j] = panel_at(i - 1, j - 1) * scale
                    + cum[(i - 1) * stride + j]
                    + cum[i * stride + (j - 1)]
                    - cum[(i - 1) * stride + (j - 1)];
            }
        }
        NodeMassTable { cum, stride, g }
    }

    fn rect(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let s = self.stride;
        self.cum[i1 * s + j1] - self.cum[i0 * s + j1] - self.cum[i1 * s + j0]
            + self.cum[i0 * s + j0]
    }

    fn snap(&self, x: f64) -> usize {
        ((x * self.g as f64).round() as usize).min(self.g)
    }

    /// Block masses of a partition pair with boundaries snapped to grid
    /// nodes.
    pub(crate) fn pair_mass(&self, sigma: &IntervalPartition, tau: &IntervalPartition) -> Mat {
        let mut mass = Mat::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = 0.0;
                for &(x0, x1) in &sigma.class_intervals(a) {
                    for &(y0, y1) in &tau.class_intervals(b) {
                        acc += self.rect(self.snap(x0), self.snap(x1), self.snap(y0), self.snap(y1));
                    }
                }
                mass[(a, b)] = acc;
            }
        }
        mass
    }
}

/// Optimize a score of the pair block masses over the interval-partition
/// candidate family (canonical pairs plus `grid` window positions per
/// orientation per side). Returns the flagged-approximate marker: false
/// when the family search is exact for the kernel's supremum.
pub(crate) fn optimize_over_pairs(
    kernel: &Kernel,
    mu1: f64,
    nu1: f64,
    grid: usize,
    goal: OptimizeGoal,
    score: impl Fn(PairScore) -> f64,
) -> Result<(f64, IntervalPartition, IntervalPartition, bool)> {
    if grid == 0 {
        return Err(Error::Domain("grid must have at least one cell".into()));
    }
    let (eval, approximate) = match kernel {
        Kernel::Sigmoid(k) if k.valid_unclamped() => (PairEval::Sep { rho: k.rho() }, false),
        Kernel::Sigmoid(_) => {
            let table = NodeMassTable::build(kernel, grid);
            (PairEval::Panels { cum: table.cum, stride: table.stride }, true)
        }
        Kernel::Block(k) => (PairEval::Pieces { theta: k.phi().theta.clone() }, true),
        Kernel::Grid(k) => (PairEval::Pieces { theta: k.values().clone() }, true),
    };
    let sig_cands = build_sides(kernel, candidate_partitions(mu1, grid)?, 0, grid, &eval)?;
    let tau_cands = build_sides(kernel, candidate_partitions(nu1, grid)?, 1, grid, &eval)?;

    let mut best: Option<(f64, usize, usize)> = None;
    for (si, sc) in sig_cands.iter().enumerate() {
        for (ti, tc) in tau_cands.iter().enumerate() {
            let mass = pair_mass(&eval, sc, tc);
            let v = score(PairScore { mass: &mass, w_sigma: &sc.w, w_tau: &tc.w });
            let better = match (goal, &best) {
                (_, None) => true,
                (OptimizeGoal::Max, Some((bv, _, _))) => v > *bv,
                (OptimizeGoal::Min, Some((bv, _, _))) => v < *bv,
            };
            if better {
                best = Some((v, si, ti));
            }
        }
    }
    let (v, si, ti) = best.expect("candidate sets are nonempty");
    Ok((v, sig_cands[si].part, tau_cands[ti].part, approximate))
}
