//! Test-side oracles, independent of the library's quadrature and
//! support-function paths: composite Simpson integration and a tiny
//! xorshift generator for reproducible random instances.

#![allow(dead_code)]

/// Composite Simpson rule with `panels` subintervals (made even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = if panels % 2 == 0 { panels } else { panels + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Tensor-product Simpson rule on a rectangle.
pub fn simpson2d(
    f: impl Fn(f64, f64) -> f64,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    panels: usize,
) -> f64 {
    simpson(|x| simpson(|y| f(x, y), y0, y1, panels), x0, x1, panels)
}

/// xorshift64* stream; good enough for generating test instances.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

use coclust_core::{BinMat, ClassCounts, Direction, Labeling, Mat};

pub fn random_binmat(rng: &mut TestRng, m: usize, n: usize, density: f64) -> BinMat {
    let bits: Vec<Vec<u8>> =
        (0..m).map(|_| (0..n).map(|_| u8::from(rng.unit() < density)).collect()).collect();
    BinMat::from_rows(&bits).unwrap()
}

pub fn random_labeling(rng: &mut TestRng, len: usize, k: usize) -> Labeling {
    Labeling::new((0..len).map(|_| rng.below(k) as u32).collect(), k).unwrap()
}

/// Random class counts with every class nonempty.
pub fn random_counts(rng: &mut TestRng, total: usize, k: usize) -> ClassCounts {
    assert!(total >= k);
    let mut counts = vec![1usize; k];
    for _ in 0..total - k {
        counts[rng.below(k)] += 1;
    }
    ClassCounts::new(counts, total).unwrap()
}

pub fn random_direction(rng: &mut TestRng, k: usize) -> Direction {
    let rows: Vec<Vec<f64>> =
        (0..k).map(|_| (0..k).map(|_| rng.range(-1.0, 1.0)).collect()).collect();
    Direction::new(Mat::from_rows(&rows).unwrap()).unwrap()
}

/// All labelings of `len` nodes into `k` classes (no count constraint).
pub fn all_labelings(len: usize, k: usize) -> Vec<Labeling> {
    let mut out = Vec::new();
    let total = (k as u64).pow(len as u32);
    for code in 0..total {
        let mut c = code;
        let mut labels = Vec::with_capacity(len);
        for _ in 0..len {
            labels.push((c % k as u64) as u32);
            c /= k as u64;
        }
        out.push(Labeling::new(labels, k).unwrap());
    }
    out
}

/// Direct evaluation of `<Gamma, A/ST>` by summing over all entries.
pub fn naive_inner(a: &BinMat, gamma: &Direction, s: &Labeling, t: &Labeling) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.m() {
        for j in 0..a.n() {
            if a.get(i, j) {
                acc += gamma.gamma()[(s.get(i), t.get(j))];
            }
        }
    }
    acc / (a.m() * a.n()) as f64
}
