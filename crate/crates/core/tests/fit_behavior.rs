//! End-to-end behavior of the annealing fit: exactness at toy sizes
//! against exhaustive enumeration, invariants of the returned result, and
//! label recovery on planted blockmodels.

mod common;

use coclust_core::{
    empirical_value_at, fit_coblockmodel, hamming_normalized, sample_bipartite, ClassCounts,
    CoBlockParams, FitConfig, InitStrategy, Kernel, Labeling, Mat, RiskKind,
};
use common::{all_labelings, random_binmat, TestRng};

/// Plug-in objective of a labeling pair computed by direct loops.
fn plug_in_objective(
    a: &coclust_core::BinMat,
    s: &Labeling,
    t: &Labeling,
    kind: RiskKind,
    eps: f64,
) -> f64 {
    let k = s.k();
    let mut edges = vec![0i64; k * k];
    let mut rows = vec![0i64; k];
    let mut cols = vec![0i64; k];
    for i in 0..a.m() {
        rows[s.get(i)] += 1;
    }
    for j in 0..a.n() {
        cols[t.get(j)] += 1;
    }
    for i in 0..a.m() {
        for j in 0..a.n() {
            if a.get(i, j) {
                edges[s.get(i) * k + t.get(j)] += 1;
            }
        }
    }
    let mut acc = 0.0;
    for x in 0..k {
        for y in 0..k {
            let nb = (rows[x] * cols[y]) as f64;
            if nb == 0.0 {
                continue;
            }
            let e = edges[x * k + y] as f64;
            let mean = (e / nb).clamp(eps, 1.0 - eps);
            acc += match kind {
                RiskKind::Pl => e * mean.ln() + (nb - e) * (1.0 - mean).ln(),
                RiskKind::Ls => nb * mean * mean - 2.0 * mean * e + e,
            };
        }
    }
    acc / (a.m() * a.n()) as f64
}

#[test]
fn fit_matches_exhaustive_search_at_toy_size() {
    let mut rng = TestRng::new(5);
    let rows = all_labelings(6, 2);
    for case in 0..10 {
        let density = rng.unit() * 0.6 + 0.2;
        let a = random_binmat(&mut rng, 6, 6, density);
        for kind in [RiskKind::Pl, RiskKind::Ls] {
            let mut best = match kind {
                RiskKind::Pl => f64::NEG_INFINITY,
                RiskKind::Ls => f64::INFINITY,
            };
            for s in &rows {
                for t in &rows {
                    let v = plug_in_objective(&a, s, t, kind, 1e-6);
                    best = match kind {
                        RiskKind::Pl => best.max(v),
                        RiskKind::Ls => best.min(v),
                    };
                }
            }
            let cfg = FitConfig { restarts: 64, ..FitConfig::new(1000 + case) };
            let fit = fit_coblockmodel(&a, 2, kind, &cfg).unwrap();
            assert!(
                (fit.objective - best).abs() <= 1e-12,
                "{kind}: fit {} vs exhaustive {best}",
                fit.objective
            );
        }
    }
}

#[test]
fn final_objective_never_worse_than_initialization() {
    let mut rng = TestRng::new(15);
    for case in 0..10 {
        let a = random_binmat(&mut rng, 20, 25, 0.3);
        let s0 = common::random_labeling(&mut rng, 20, 3);
        let t0 = common::random_labeling(&mut rng, 25, 3);
        let init_obj = plug_in_objective(&a, &s0, &t0, RiskKind::Pl, 1e-6);
        let cfg = FitConfig {
            restarts: 1,
            init: InitStrategy::Provided(s0, t0),
            ..FitConfig::new(case)
        };
        let fit = fit_coblockmodel(&a, 3, RiskKind::Pl, &cfg).unwrap();
        assert!(fit.objective >= init_obj - 1e-12);
        // trace carries per-restart bests
        assert_eq!(fit.trace.len(), 1);
        assert!((fit.trace[0] - fit.objective).abs() <= 1e-12);
    }
}

#[test]
fn recompute_consistency_with_witness() {
    let mut rng = TestRng::new(25);
    let a = random_binmat(&mut rng, 15, 18, 0.4);
    for kind in [RiskKind::Pl, RiskKind::Ls] {
        let cfg = FitConfig { restarts: 4, ..FitConfig::new(2) };
        let fit = fit_coblockmodel(&a, 2, kind, &cfg).unwrap();
        let recomputed =
            empirical_value_at(&a, &fit.phi_hat, &fit.s, &fit.t, kind, cfg.eps).unwrap();
        assert!((fit.objective - recomputed).abs() <= 1e-12);
        // theta is the clamped block means of the witness labeling
        let means = coclust_core::block_means(&a, &fit.s, &fit.t, cfg.eps).unwrap();
        assert_eq!(fit.phi_hat.theta, means);
    }
}

#[test]
fn objective_invariant_under_class_permutation() {
    let mut rng = TestRng::new(35);
    let a = random_binmat(&mut rng, 12, 12, 0.5);
    let cfg = FitConfig { restarts: 2, ..FitConfig::new(9) };
    let fit = fit_coblockmodel(&a, 3, RiskKind::Pl, &cfg).unwrap();
    let perm = [2usize, 0, 1];
    let phi_perm = fit.phi_hat.permute_classes(&perm).unwrap();
    // relabel witnesses with the inverse permutation
    let mut inv = [0usize; 3];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let s2 = Labeling::new(fit.s.labels().iter().map(|&l| inv[l as usize] as u32).collect(), 3)
        .unwrap();
    let t2 = Labeling::new(fit.t.labels().iter().map(|&l| inv[l as usize] as u32).collect(), 3)
        .unwrap();
    let v = empirical_value_at(&a, &phi_perm, &s2, &t2, RiskKind::Pl, cfg.eps).unwrap();
    assert!((v - fit.objective).abs() <= 1e-12);
}

/// Label accuracy up to the two-class permutation.
fn two_class_accuracy(est: &Labeling, truth: &[u32]) -> f64 {
    let t = Labeling::new(truth.to_vec(), 2).unwrap();
    let flipped =
        Labeling::new(truth.iter().map(|&l| 1 - l).collect(), 2).unwrap();
    let d1 = hamming_normalized(est, &t).unwrap();
    let d2 = hamming_normalized(est, &flipped).unwrap();
    1.0 - d1.min(d2)
}

#[test]
fn planted_blockmodel_recovery_smoke() {
    let phi0 = CoBlockParams::new(
        ClassCounts::new(vec![1, 1], 2).unwrap(),
        ClassCounts::new(vec![1, 1], 2).unwrap(),
        Mat::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap(),
    )
    .unwrap();
    let kernel = Kernel::block(phi0).unwrap();
    let mut recovered = 0;
    let seeds = 10;
    for seed in 0..seeds {
        let sample = sample_bipartite(&kernel, 60, 60, 777 + seed, false).unwrap();
        let truth_s: Vec<u32> =
            sample.latents.xi.iter().map(|&x| u32::from(x > 0.5)).collect();
        let cfg = FitConfig { restarts: 8, ..FitConfig::new(seed) };
        let fit = fit_coblockmodel(&sample.a, 2, RiskKind::Pl, &cfg).unwrap();
        if two_class_accuracy(&fit.s, &truth_s) >= 0.95 {
            recovered += 1;
        }
    }
    assert!(recovered >= 8, "recovered rows in only {recovered}/{seeds} runs");
}

#[test]
fn single_class_fit_uses_global_mean() {
    let mut rng = TestRng::new(45);
    let a = random_binmat(&mut rng, 10, 10, 0.35);
    let cfg = FitConfig::new(0);
    let fit = fit_coblockmodel(&a, 1, RiskKind::Pl, &cfg).unwrap();
    assert!((fit.phi_hat.theta[(0, 0)] - a.mean()).abs() <= 1e-12);
    let p = a.mean();
    let expect = p * p.ln() + (1.0 - p) * (1.0 - p).ln();
    assert!((fit.objective - expect).abs() <= 1e-12);
}
