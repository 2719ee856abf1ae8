//! Adaptive quadrature: Gauss–Kronrod (G7, K15) refinement in one dimension
//! and tensor-product Gauss panels in two dimensions. Panels with the worst
//! error estimate are bisected first; refinement is deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod-15 abscissae on [-1, 1] (positive half; symmetric).
const XK: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];

const WK: [f64; 8] = [
    0.209_482_141_084_727_8,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_9,
    0.104_790_010_322_250_2,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_22,
];

/// Gauss-7 weights matching XK[0], XK[2], XK[4], XK[6].
const WG: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let f0 = f(c);
    let mut kron = WK[0] * f0;
    let mut gauss = WG[0] * f0;
    for i in 1..8 {
        let x = h * XK[i];
        let fs = f(c - x) + f(c + x);
        kron += WK[i] * fs;
        if i % 2 == 0 {
            gauss += WG[i / 2] * fs;
        }
    }
    (kron * h, (kron - gauss).abs() * h.abs())
}

struct Panel {
    err: f64,
    val: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    const MAX_PANELS: usize = 8192;
    if !(a <= b) {
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let mut heap = BinaryHeap::new();
    let (val, err) = gk15(&f, a, b);
    heap.push(Panel { err, val, a, b });
    let mut total_err = err;
    while total_err > tol && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval is at floating-point resolution; keep as is
            total_err -= worst.err;
            heap.push(Panel { err: 0.0, val: worst.val, a: worst.a, b: worst.b });
            continue;
        }
        total_err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(&f, lo, hi);
            total_err += e;
            heap.push(Panel { err: e, val: v, a: lo, b: hi });
        }
    }
    let panels = heap.len();
    let value: f64 = heap.iter().map(|p| p.val).sum();
    if total_err > tol {
        return Err(Error::Quadrature { tol, achieved: total_err, panels });
    }
    Ok(QuadResult { value, error: total_err, panels })
}

/// Gauss-Legendre 5-point rule on [-1, 1].
const X5: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const W5: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

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

fn tensor_rule(
    f: &impl Fn(f64, f64) -> f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> (f64, f64) {
    let cx = 0.5 * (x0 + x1);
    let hx = 0.5 * (x1 - x0);
    let cy = 0.5 * (y0 + y1);
    let hy = 0.5 * (y1 - y0);
    let mut i7 = 0.0;
    for (xi, wx) in X7.iter().zip(&W7) {
        let x = cx + hx * xi;
        let mut row = 0.0;
        for (yi, wy) in X7.iter().zip(&W7) {
            row += wy * f(x, cy + hy * yi);
        }
        i7 += wx * row;
    }
    let mut i5 = 0.0;
    for (xi, wx) in X5.iter().zip(&W5) {
        let x = cx + hx * xi;
        let mut row = 0.0;
        for (yi, wy) in X5.iter().zip(&W5) {
            row += wy * f(x, cy + hy * yi);
        }
        i5 += wx * row;
    }
    let scale = hx * hy;
    (i7 * scale, (i7 - i5).abs() * scale.abs())
}

struct Panel2 {
    err: f64,
    val: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl PartialEq for Panel2 {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.x0 == other.x0 && self.y0 == other.y0
    }
}
impl Eq for Panel2 {}
impl PartialOrd for Panel2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel2 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then(other.x0.total_cmp(&self.x0))
            .then(other.y0.total_cmp(&self.y0))
    }
}

/// Integrate `f` over `[x0, x1] x [y0, y1]` to absolute tolerance `tol`.
pub fn integrate2d(
    f: impl Fn(f64, f64) -> f64,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    tol: f64,
) -> Result<QuadResult> {
    const MAX_PANELS: usize = 65536;
    if !(x0 <= x1 && y0 <= y1) {
        return Err(Error::Domain("bad rectangle".into()));
    }
    if x0 == x1 || y0 == y1 {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let mut heap = BinaryHeap::new();
    let (val, err) = tensor_rule(&f, x0, x1, y0, y1);
    heap.push(Panel2 { err, val, x0, x1, y0, y1 });
    let mut total_err = err;
    while total_err > tol && heap.len() < MAX_PANELS {
        let p = heap.pop().expect("heap nonempty");
        total_err -= p.err;
        let wx = p.x1 - p.x0;
        let wy = p.y1 - p.y0;
        let halves: [(f64, f64, f64, f64); 2] = if wx >= wy {
            let mx = 0.5 * (p.x0 + p.x1);
            if mx <= p.x0 || mx >= p.x1 {
                heap.push(Panel2 { err: 0.0, ..p });
                continue;
            }
            [(p.x0, mx, p.y0, p.y1), (mx, p.x1, p.y0, p.y1)]
        } else {
            let my = 0.5 * (p.y0 + p.y1);
            if my <= p.y0 || my >= p.y1 {
                heap.push(Panel2 { err: 0.0, ..p });
                continue;
            }
            [(p.x0, p.x1, p.y0, my), (p.x0, p.x1, my, p.y1)]
        };
        for (a, b, c, d) in halves {
            let (v, e) = tensor_rule(&f, a, b, c, d);
            total_err += e;
            heap.push(Panel2 { err: e, val: v, x0: a, x1: b, y0: c, y1: d });
        }
    }
    let panels = heap.len();
    let value: f64 = heap.iter().map(|p| p.val).sum();
    if total_err > tol {
        return Err(Error::Quadrature { tol, achieved: total_err, panels });
    }
    Ok(QuadResult { value, error: total_err, panels })
}
