//! Co-clustering machinery: labelings with class-count constraints, block
//! summaries of binary arrays and kernels, and support functions of the
//! induced co-clustering sets.

mod assign;
mod population;
mod support;

pub use assign::assign_side;
pub use population::{
    canonical_pairs, population_block_mass, support_oracle, IntervalPartition, OracleMethod,
    OracleResult, PartitionKind, WindowClass, DEFAULT_ORACLE_GRID,
};
pub use support::{enumerate_labelings, support_empirical, SupportMethod, SupportResult};

pub(crate) use population::{optimize_over_pairs, NodeMassTable, OptimizeGoal};

use crate::binmat::BinMat;
use crate::error::{Error, Result};
use crate::mat::Mat;

/// Node-to-class assignment with labels in `0..k` (rendered 1-based in
/// text form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<u32>,
    k: usize,
}

impl Labeling {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain("labeling must have length >= 1".into()));
        }
        if k == 0 {
            return Err(Error::Domain("class count must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
            return Err(Error::Domain(format!("label {bad} out of range for K={k}")));
        }
        Ok(Labeling { labels, k })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = vec![0usize; self.k];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        ClassCounts { counts, total: self.labels.len() }
    }

    /// One-based whitespace-separated rendering for debug dumps and records.
    pub fn to_one_based_line(&self) -> String {
        let parts: Vec<String> = self.labels.iter().map(|&l| (l + 1).to_string()).collect();
        parts.join(" ")
    }

    pub fn from_one_based(values: &[u32], k: usize) -> Result<Self> {
        let labels = values
            .iter()
            .map(|&v| {
                if v == 0 {
                    Err(Error::Parse("labels in text form are 1-based".into()))
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<u32>>>()?;
        Labeling::new(labels, k)
    }
}

/// Integer class sizes summing to the number of nodes on one side; their
/// proportions live in the quantized simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCounts {
    counts: Vec<usize>,
    total: usize,
}

impl ClassCounts {
    pub fn new(counts: Vec<usize>, total: usize) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Domain("need at least one class".into()));
        }
        let sum: usize = counts.iter().sum();
        if sum != total {
            return Err(Error::Infeasible(format!("counts sum to {sum}, expected {total}")));
        }
        Ok(ClassCounts { counts, total })
    }

    /// Split `total` as evenly as possible over `k` classes (larger classes
    /// first).
    pub fn balanced(k: usize, total: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("need at least one class".into()));
        }
        let base = total / k;
        let extra = total % k;
        let counts = (0..k).map(|a| base + usize::from(a < extra)).collect();
        ClassCounts::new(counts, total)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn proportions(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }
}

/// A direction matrix with entries in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    gamma: Mat,
}

impl Direction {
    pub fn new(gamma: Mat) -> Result<Self> {
        if gamma.max_abs() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "direction entries must lie in [-1,1], max abs {}",
                gamma.max_abs()
            )));
        }
        Ok(Direction { gamma: gamma.map(|v| v.clamp(-1.0, 1.0)) })
    }

    pub fn identity(k: usize) -> Self {
        let mut g = Mat::zeros(k, k);
        for a in 0..k {
            g[(a, a)] = 1.0;
        }
        Direction { gamma: g }
    }

    pub fn ones(k: usize) -> Self {
        Direction { gamma: Mat::zeros(k, k).map(|_| 1.0) }
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.gamma.rows()
    }

    pub fn transpose(&self) -> Direction {
        Direction { gamma: self.gamma.transpose() }
    }
}

/// K x K block summary of an array or kernel under a co-clustering: per-pair
/// mass (fraction of the total domain), class shares, and block means with
/// the 0/0 -> 0 convention.
#[derive(Debug, Clone)]
pub struct BlockSummary {
    pub mass: Mat,
    pub means: Mat,
    pub row_share: Vec<f64>,
    pub col_share: Vec<f64>,
}

impl BlockSummary {
    pub fn from_mass(mass: Mat, row_share: Vec<f64>, col_share: Vec<f64>) -> Self {
        let k1 = mass.rows();
        let k2 = mass.cols();
        let mut means = Mat::zeros(k1, k2);
        for a in 0..k1 {
            for b in 0..k2 {
                let denom = row_share[a] * col_share[b];
                means[(a, b)] = if denom > 0.0 { mass[(a, b)] / denom } else { 0.0 };
            }
        }
        BlockSummary { mass, means, row_share, col_share }
    }

    pub fn k(&self) -> usize {
        self.mass.rows()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.sum()
    }
}

/// Empirical block summary: `mass[a][b]` is the fraction of all `m*n`
/// entries that are 1 and fall in block `(a, b)`.
pub fn block_summary(a: &BinMat, s: &Labeling, t: &Labeling) -> Result<BlockSummary> {
    if s.len() != a.m() || t.len() != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "array is {}x{}, labelings cover {}x{}",
            a.m(),
            a.n(),
            s.len(),
            t.len()
        )));
    }
    let counts = block_edge_counts(a, s, t);
    let k1 = s.k();
    let k2 = t.k();
    let mn = (a.m() * a.n()) as f64;
    let mut mass = Mat::zeros(k1, k2);
    for x in 0..k1 {
        for y in 0..k2 {
            mass[(x, y)] = counts[x * k2 + y] as f64 / mn;
        }
    }
    let row_share = s.class_counts().proportions();
    let col_share = t.class_counts().proportions();
    Ok(BlockSummary::from_mass(mass, row_share, col_share))
}

/// Raw per-block edge counts (integers, exact).
pub fn block_edge_counts(a: &BinMat, s: &Labeling, t: &Labeling) -> Vec<u64> {
    let k2 = t.k();
    let mut counts = vec![0u64; s.k() * k2];
    for i in 0..a.m() {
        let sa = s.get(i);
        a.for_each_one_in_row(i, |j| {
            counts[sa * k2 + t.get(j)] += 1;
        });
    }
    counts
}

/// The labeling that assigns nodes to classes in index order: the first
/// `counts[0]` nodes to class 1, the next `counts[1]` to class 2, and so on.
pub fn canonical_labeling(counts: &ClassCounts) -> Labeling {
    let mut labels = Vec::with_capacity(counts.total());
    for (c, &cnt) in counts.counts().iter().enumerate() {
        labels.extend(std::iter::repeat_n(c as u32, cnt));
    }
    Labeling::new(labels, counts.k()).expect("counts sum to total")
}

/// Fraction of positions where the two labelings differ.
pub fn hamming_normalized(s: &Labeling, s2: &Labeling) -> Result<f64> {
    if s.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "labeling lengths {} vs {}",
            s.len(),
            s2.len()
        )));
    }
    let diff = s.labels.iter().zip(&s2.labels).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / s.len() as f64)
}

/// `<Gamma, A/ST>` evaluated from exact integer block counts.
pub fn support_inner(a: &BinMat, gamma: &Direction, s: &Labeling, t: &Labeling) -> f64 {
    let counts = block_edge_counts(a, s, t);
    let k2 = t.k();
    let mn = (a.m() * a.n()) as f64;
    let mut acc = 0.0;
    for x in 0..s.k() {
        for y in 0..k2 {
            acc += gamma.gamma()[(x, y)] * counts[x * k2 + y] as f64;
        }
    }
    acc / mn
}
