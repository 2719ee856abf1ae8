//! Lipschitz properties of the block-summary inner product, support
//! function laws, and soundness of the alternating maximizer against
//! exhaustive enumeration.

mod common;

use coclust_core::coclust::support_inner;
use coclust_core::{
    block_summary, support_empirical, BinMat, Direction, Labeling, SupportMethod,
};
use common::{
    naive_inner, random_binmat, random_counts, random_direction, random_labeling, TestRng,
};

#[test]
fn mass_conservation_over_random_instances() {
    let mut rng = TestRng::new(11);
    for _ in 0..1000 {
        let m = 2 + rng.below(12);
        let n = 2 + rng.below(12);
        let k = 1 + rng.below(3);
        let density = rng.range(0.1, 0.9);
        let a = random_binmat(&mut rng, m, n, density);
        let s = random_labeling(&mut rng, m, k);
        let t = random_labeling(&mut rng, n, k);
        let bs = block_summary(&a, &s, &t).unwrap();
        assert!((bs.total_mass() - a.mean()).abs() <= 1e-14);
    }
}

#[test]
fn lipschitz_in_labelings() {
    // |<G, A/ST> - <G, A/S'T'>| <= 2 [ dH(S,S')/m + dH(T,T')/n ], hard
    let mut rng = TestRng::new(21);
    for _ in 0..1000 {
        let m = 3 + rng.below(20);
        let n = 3 + rng.below(20);
        let k = 2 + rng.below(2);
        let density = rng.range(0.1, 0.9);
        let a = random_binmat(&mut rng, m, n, density);
        let gamma = random_direction(&mut rng, k);
        let s = random_labeling(&mut rng, m, k);
        let t = random_labeling(&mut rng, n, k);
        let s2 = random_labeling(&mut rng, m, k);
        let t2 = random_labeling(&mut rng, n, k);
        let lhs = (support_inner(&a, &gamma, &s, &t) - support_inner(&a, &gamma, &s2, &t2)).abs();
        let dh_s = coclust_core::hamming_normalized(&s, &s2).unwrap();
        let dh_t = coclust_core::hamming_normalized(&t, &t2).unwrap();
        assert!(lhs <= 2.0 * (dh_s + dh_t), "lhs {lhs} vs bound {}", 2.0 * (dh_s + dh_t));
    }
}

#[test]
fn lipschitz_in_single_entry_flips() {
    // flipping one entry of A moves <G, A/ST> by at most 1/(mn), hard
    let mut rng = TestRng::new(31);
    for _ in 0..1000 {
        let m = 3 + rng.below(20);
        let n = 3 + rng.below(20);
        let k = 2 + rng.below(2);
        let density = rng.range(0.1, 0.9);
        let a = random_binmat(&mut rng, m, n, density);
        let i = rng.below(m);
        let j = rng.below(n);
        let flipped = BinMat::from_fn(m, n, |x, y| {
            if (x, y) == (i, j) {
                !a.get(x, y)
            } else {
                a.get(x, y)
            }
        })
        .unwrap();
        let gamma = random_direction(&mut rng, k);
        let s = random_labeling(&mut rng, m, k);
        let t = random_labeling(&mut rng, n, k);
        let lhs = (support_inner(&a, &gamma, &s, &t) - support_inner(&flipped, &gamma, &s, &t)).abs();
        assert!(lhs <= 1.0 / (m as f64 * n as f64));
    }
}

#[test]
fn support_inner_matches_naive_sum() {
    let mut rng = TestRng::new(41);
    for _ in 0..200 {
        let m = 2 + rng.below(9);
        let n = 2 + rng.below(9);
        let k = 1 + rng.below(3);
        let a = random_binmat(&mut rng, m, n, 0.5);
        let gamma = random_direction(&mut rng, k);
        let s = random_labeling(&mut rng, m, k);
        let t = random_labeling(&mut rng, n, k);
        let fast = support_inner(&a, &gamma, &s, &t);
        let slow = naive_inner(&a, &gamma, &s, &t);
        assert!((fast - slow).abs() <= 1e-13);
    }
}

#[test]
fn support_positive_homogeneity_and_sublinearity() {
    let mut rng = TestRng::new(51);
    for _ in 0..50 {
        let m = 4 + rng.below(4);
        let n = 4 + rng.below(4);
        let a = random_binmat(&mut rng, m, n, 0.5);
        let mu = random_counts(&mut rng, m, 2);
        let nu = random_counts(&mut rng, n, 2);
        let g1 = random_direction(&mut rng, 2);
        let g2 = random_direction(&mut rng, 2);
        let c = rng.range(0.0, 1.0);

        let h = |g: &Direction| {
            support_empirical(&a, &mu, &nu, g, SupportMethod::Exact).unwrap().value
        };
        let scaled = Direction::new(g1.gamma().map(|v| c * v)).unwrap();
        assert!((h(&scaled) - c * h(&g1)).abs() <= 1e-12, "positive homogeneity");

        let half_sum =
            Direction::new(Mat2::add_halved(g1.gamma(), g2.gamma())).unwrap();
        // h((g1+g2)/2) <= (h(g1) + h(g2))/2, hard inequality
        assert!(h(&half_sum) <= 0.5 * (h(&g1) + h(&g2)) + 1e-15, "sublinearity");
    }
}

struct Mat2;

impl Mat2 {
    fn add_halved(a: &coclust_core::Mat, b: &coclust_core::Mat) -> coclust_core::Mat {
        let mut out = a.clone();
        for x in 0..a.rows() {
            for y in 0..a.cols() {
                out[(x, y)] = 0.5 * (a[(x, y)] + b[(x, y)]);
            }
        }
        out
    }
}

#[test]
fn alternating_is_sound_and_usually_exact() {
    let mut rng = TestRng::new(61);
    let mut equal = 0usize;
    let total = 200usize;
    for case in 0..total {
        let m = 4 + rng.below(5);
        let n = 4 + rng.below(5);
        let density = rng.range(0.2, 0.8);
        let a = random_binmat(&mut rng, m, n, density);
        let mu = random_counts(&mut rng, m, 2);
        let nu = random_counts(&mut rng, n, 2);
        let gamma = random_direction(&mut rng, 2);
        let exact = support_empirical(&a, &mu, &nu, &gamma, SupportMethod::Exact).unwrap();
        let alt = support_empirical(
            &a,
            &mu,
            &nu,
            &gamma,
            SupportMethod::Alternating { restarts: 32, seed: case as u64 },
        )
        .unwrap();
        assert!(alt.value <= exact.value + 1e-12, "heuristic exceeded the true maximum");
        // the witness labelings must reproduce the reported value
        assert!((support_inner(&a, &gamma, &alt.s, &alt.t) - alt.value).abs() <= 1e-13);
        if (exact.value - alt.value).abs() <= 1e-12 {
            equal += 1;
        }
    }
    assert!(equal * 100 >= total * 99, "alternating matched exact on {equal}/{total}");
}

#[test]
fn labeling_counts_respected_by_witnesses() {
    let mut rng = TestRng::new(71);
    let a = random_binmat(&mut rng, 8, 7, 0.4);
    let mu = random_counts(&mut rng, 8, 2);
    let nu = random_counts(&mut rng, 7, 2);
    let gamma = random_direction(&mut rng, 2);
    for method in [SupportMethod::Exact, SupportMethod::Alternating { restarts: 8, seed: 3 }] {
        let r = support_empirical(&a, &mu, &nu, &gamma, method).unwrap();
        assert_eq!(r.s.class_counts(), mu);
        assert_eq!(r.t.class_counts(), nu);
    }
}

#[test]
fn exact_support_agrees_with_all_pairs_enumeration() {
    let mut rng = TestRng::new(81);
    for _ in 0..20 {
        let m = 4 + rng.below(3);
        let n = 4 + rng.below(3);
        let a = random_binmat(&mut rng, m, n, 0.5);
        let mu = random_counts(&mut rng, m, 2);
        let nu = random_counts(&mut rng, n, 2);
        let gamma = random_direction(&mut rng, 2);
        let got = support_empirical(&a, &mu, &nu, &gamma, SupportMethod::Exact).unwrap();
        let mut best = f64::NEG_INFINITY;
        for s in coclust_core::coclust::enumerate_labelings(&mu) {
            for t in coclust_core::coclust::enumerate_labelings(&nu) {
                best = best.max(naive_inner(&a, &gamma, &s, &t));
            }
        }
        assert!((got.value - best).abs() <= 1e-13);
    }
}

#[test]
fn direction_validation() {
    let too_big = coclust_core::Mat::from_rows(&[vec![1.2, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!(Direction::new(too_big).is_err());
    let l = Labeling::new(vec![0, 1, 1], 2).unwrap();
    assert_eq!(l.class_counts().counts(), &[1, 2]);
}
