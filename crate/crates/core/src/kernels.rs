//! Generative kernels for separately exchangeable bipartite arrays:
//! sigmoidal-separable families, blockmodel-induced kernels via inverse
//! class CDFs, and piecewise-constant grid fixtures, together with seeded
//! sampling of latent positions and Bernoulli adjacency matrices.

use rand::Rng;
use std::fmt;
use std::str::FromStr;

use crate::binmat::BinMat;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quad;
use crate::risk::CoBlockParams;
use crate::rng::{role, stream_rng};

/// Raw sigmoidal ratio `x^beta / (x^beta + (1-x)^beta)`, evaluated in a
/// form that stays finite for arbitrarily large `beta`.
fn sigmoid_ratio(beta: f64, x: f64) -> f64 {
    if x >= 1.0 - x {
        let s = ((1.0 - x) / x).powf(beta);
        1.0 / (1.0 + s)
    } else {
        let r = (x / (1.0 - x)).powf(beta);
        r / (1.0 + r)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be a finite value >= 1, got {beta}")));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} must lie in [0,1], got {x}")));
    }
    Ok(())
}

/// Normalizer `Z_beta = 4 * integral_0^{1/2} |x^beta/(x^beta+(1-x)^beta) - 1/2| dx`.
pub fn z_beta(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let r = quad::integrate(|x| (sigmoid_ratio(beta, x) - 0.5).abs(), 0.0, 0.5, 1e-10)?;
    Ok(4.0 * r.value)
}

/// Normalized sigmoid `f_beta(x)`: strictly increasing, antisymmetric about
/// 1/2, with unit area under its absolute value split evenly by sign.
pub fn f_beta(beta: f64, x: f64) -> Result<f64> {
    check_beta(beta)?;
    check_unit("x", x)?;
    let z = z_beta(beta)?;
    Ok((sigmoid_ratio(beta, x) - 0.5) / z)
}

/// Sparsity schedules for the edge-density scale as a function of n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RhoMode {
    Dense,
    Poly,
    Polylog,
}

impl fmt::Display for RhoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RhoMode::Dense => "dense",
            RhoMode::Poly => "poly",
            RhoMode::Polylog => "polylog",
        };
        f.write_str(s)
    }
}

impl FromStr for RhoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(RhoMode::Dense),
            "poly" => Ok(RhoMode::Poly),
            "polylog" => Ok(RhoMode::Polylog),
            other => Err(Error::Parse(format!("unknown rho mode '{other}'"))),
        }
    }
}

/// Edge-density scale: 1/2, n^{-2/3}, or min(1, ln^2(n)/n).
pub fn rho_schedule(mode: RhoMode, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("rho schedule needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(match mode {
        RhoMode::Dense => 0.5,
        RhoMode::Poly => nf.powf(-2.0 / 3.0),
        RhoMode::Polylog => (nf.ln().powi(2) / nf).min(1.0),
    })
}

/// Separable sigmoidal kernel `clamp(rho * (f_beta(x) f_beta(y) + 1/2))`.
///
/// `valid_unclamped` records whether `max|f_beta|^2 <= 1/2`, in which case
/// the clamp never fires for any `rho <= 1` and closed-form block masses
/// apply.
#[derive(Debug, Clone)]
pub struct SigmoidKernel {
    beta: f64,
    rho: f64,
    z: f64,
    max_abs_f: f64,
    valid_unclamped: bool,
}

impl SigmoidKernel {
    pub fn new(beta: f64, rho: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0,1], got {rho}")));
        }
        let z = z_beta(beta)?;
        let max_abs_f = 0.5 / z;
        let valid_unclamped = max_abs_f * max_abs_f <= 0.5 + 1e-12;
        Ok(SigmoidKernel { beta, rho, z, max_abs_f, valid_unclamped })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn max_abs_f(&self) -> f64 {
        self.max_abs_f
    }

    pub fn valid_unclamped(&self) -> bool {
        self.valid_unclamped
    }

    pub fn f(&self, x: f64) -> f64 {
        (sigmoid_ratio(self.beta, x) - 0.5) / self.z
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.rho * (self.f(x) * self.f(y) + 0.5)).clamp(0.0, 1.0)
    }

    /// `integral_a^b f_beta`.
    pub fn f_integral(&self, a: f64, b: f64) -> Result<f64> {
        Ok(quad::integrate(|x| self.f(x), a, b, 1e-12)?.value)
    }

    /// `integral_a^b f_beta^2`.
    pub fn f_sq_integral(&self, a: f64, b: f64) -> Result<f64> {
        Ok(quad::integrate(|x| self.f(x) * self.f(x), a, b, 1e-12)?.value)
    }

    /// `integral over [0,1]^2 of omega^2` in closed form (unclamped only).
    pub fn omega_sq_integral(&self) -> Result<f64> {
        if !self.valid_unclamped {
            return Err(Error::Unsupported(
                "closed-form omega^2 integral requires an unclamped kernel".into(),
            ));
        }
        let fsq = self.f_sq_integral(0.0, 1.0)?;
        Ok(self.rho * self.rho * (fsq * fsq + 0.25))
    }
}

/// Blockmodel-induced kernel `theta[F_mu^{-1}(x), F_nu^{-1}(y)]`, with the
/// left-continuous inverse CDF mapping each axis to a class.
#[derive(Debug, Clone)]
pub struct BlockKernel {
    phi: CoBlockParams,
    row_cum: Vec<f64>,
    col_cum: Vec<f64>,
}

fn cumulative(props: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(props.len());
    for &p in props {
        acc += p;
        out.push(acc);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn inv_cdf(cum: &[f64], x: f64) -> usize {
    cum.iter().position(|&c| c >= x).unwrap_or(cum.len() - 1)
}

impl BlockKernel {
    pub fn new(phi: CoBlockParams) -> Result<Self> {
        let row_cum = cumulative(&phi.mu.proportions());
        let col_cum = cumulative(&phi.nu.proportions());
        Ok(BlockKernel { phi, row_cum, col_cum })
    }

    pub fn phi(&self) -> &CoBlockParams {
        &self.phi
    }

    /// Class interval boundaries `[0, cum_1, ..., 1]` on the row axis.
    pub fn row_breaks(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.row_cum.iter().copied()).collect()
    }

    pub fn col_breaks(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.col_cum.iter().copied()).collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let a = inv_cdf(&self.row_cum, x);
        let b = inv_cdf(&self.col_cum, y);
        self.phi.theta[(a, b)]
    }
}

/// Piecewise-constant kernel on an equal-measure R x C grid. Test fixture
/// and carrier for constant kernels.
#[derive(Debug, Clone)]
pub struct GridKernel {
    rows: usize,
    cols: usize,
    values: Mat,
}

impl GridKernel {
    pub fn new(values: Mat) -> Result<Self> {
        if values.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Domain("grid kernel values must lie in [0,1]".into()));
        }
        Ok(GridKernel { rows: values.rows(), cols: values.cols(), values })
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let i = ((x * self.rows as f64) as usize).min(self.rows - 1);
        let j = ((y * self.cols as f64) as usize).min(self.cols - 1);
        self.values[(i, j)]
    }
}

/// A generative kernel `omega: [0,1]^2 -> [0,1]`. Deterministic and pure;
/// constant in the network-level mixture variable (single-network regime).
#[derive(Debug, Clone)]
pub enum Kernel {
    Sigmoid(SigmoidKernel),
    Block(BlockKernel),
    Grid(GridKernel),
}

impl Kernel {
    pub fn sigmoid(beta: f64, rho: f64) -> Result<Kernel> {
        Ok(Kernel::Sigmoid(SigmoidKernel::new(beta, rho)?))
    }

    pub fn block(phi: CoBlockParams) -> Result<Kernel> {
        Ok(Kernel::Block(BlockKernel::new(phi)?))
    }

    pub fn grid(values: Mat) -> Result<Kernel> {
        Ok(Kernel::Grid(GridKernel::new(values)?))
    }

    pub fn constant(c: f64) -> Result<Kernel> {
        Kernel::grid(Mat::from_vec(1, 1, vec![c])?)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Kernel::Sigmoid(k) => k.eval(x, y),
            Kernel::Block(k) => k.eval(x, y),
            Kernel::Grid(k) => k.eval(x, y),
        }
    }

    /// The sigmoid kernel when its closed-form (clamp-free) identities hold.
    pub fn separable_unclamped(&self) -> Option<&SigmoidKernel> {
        match self {
            Kernel::Sigmoid(k) if k.valid_unclamped() => Some(k),
            _ => None,
        }
    }
}

/// Latent uniform positions for both vertex sets, reproducible from `seed`.
#[derive(Debug, Clone)]
pub struct LatentSample {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub seed: u64,
}

/// A sampled binary array, optionally with its edge-probability matrix.
#[derive(Debug, Clone)]
pub struct SampledArray {
    pub a: BinMat,
    pub w: Option<Vec<f64>>,
    pub latents: LatentSample,
}

impl SampledArray {
    pub fn w_at(&self, i: usize, j: usize) -> Option<f64> {
        self.w.as_ref().map(|w| w[i * self.a.n() + j])
    }
}

/// Draw latent positions and an adjacency matrix from a kernel.
///
/// Latents and Bernoulli draws consume disjoint streams derived from
/// `(seed, role)`, so `keep_w` never perturbs the sampled array.
pub fn sample_bipartite(
    kernel: &Kernel,
    m: usize,
    n: usize,
    seed: u64,
    keep_w: bool,
) -> Result<SampledArray> {
    if m == 0 || n == 0 {
        return Err(Error::Domain("sample dimensions must be at least 1".into()));
    }
    let mut rng_xi = stream_rng(seed, &[role::XI]);
    let mut rng_zeta = stream_rng(seed, &[role::ZETA]);
    let xi: Vec<f64> = (0..m).map(|_| rng_xi.random()).collect();
    let zeta: Vec<f64> = (0..n).map(|_| rng_zeta.random()).collect();

    let mut w_full = Vec::with_capacity(m * n);
    for &x in &xi {
        for &z in &zeta {
            w_full.push(kernel.eval(x, z));
        }
    }

    let mut rng_edges = stream_rng(seed, &[role::EDGES]);
    let mut draws = Vec::with_capacity(m * n);
    for &p in &w_full {
        let u: f64 = rng_edges.random();
        draws.push(u8::from(u < p));
    }
    let a = BinMat::from_fn(m, n, |i, j| draws[i * n + j] == 1)?;

    Ok(SampledArray {
        a,
        w: keep_w.then_some(w_full),
        latents: LatentSample { xi, zeta, seed },
    })
}
