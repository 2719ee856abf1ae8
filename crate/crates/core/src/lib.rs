//! Generation of separately exchangeable bipartite network data from
//! nonparametric kernels, stochastic co-blockmodel fitting by least
//! squares and profile likelihood, and exact population-risk oracles for
//! separable kernels.

pub mod binmat;
pub mod coclust;
pub mod error;
pub mod fit;
pub mod io;
pub mod kernels;
pub mod mat;
pub mod quad;
pub mod risk;
pub mod rng;

pub use binmat::{BinMat, ClassMasks};
pub use coclust::{
    assign_side, block_summary, canonical_pairs, hamming_normalized, population_block_mass,
    support_empirical, support_oracle, BlockSummary, ClassCounts, Direction, IntervalPartition,
    Labeling, OracleMethod, OracleResult, SupportMethod, SupportResult, WindowClass,
};
pub use error::{Error, Result};
pub use fit::{
    block_means, fit_coblockmodel, init_labels, write_fit_record, FitConfig, FitResult,
    InitStrategy, MoveSet,
};
pub use kernels::{
    f_beta, rho_schedule, sample_bipartite, z_beta, Kernel, LatentSample, RhoMode, SampledArray,
    SigmoidKernel,
};
pub use mat::Mat;
pub use risk::{
    avg_kl, b_and_gamma, bernoulli_kl, cocluster_fidelity, empirical_objective,
    empirical_value_at, entropy_integral, kl_small_rho_limit, omega_sq_integral, phi_star_search,
    phi_star_search_kind, population_risk, population_risk_grid, CoBlockParams, RiskKind,
    RiskReport, Witness, DEFAULT_EPS, DEFAULT_PAIR_GRID, DEFAULT_PHI_GRID,
};
