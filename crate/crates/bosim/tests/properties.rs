//! Property and invariant tests across the simulation core.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use bosim::matrix::ComplexMatrix;
use bosim::patterns::{binomial, enumerate_multisets, enumerate_no_collision};
use bosim::permanent::{perm_naive, perm_ryser, perm_ryser_partitioned};
use bosim::{
    haar_random, lossy_source_distribution, standard_distribution, uniform_distribution,
    InputPattern, LossProfile, OutputPattern,
};

fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| {
        // uniform in the unit disc by rejection
        loop {
            let re: f64 = rng.random::<f64>() * 2.0 - 1.0;
            let im: f64 = rng.random::<f64>() * 2.0 - 1.0;
            if re * re + im * im <= 1.0 {
                return Complex64::new(re, im);
            }
        }
    })
}

fn permute_rows(m: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(perm[i], j))
}

fn permute_cols(m: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, perm[j]))
}

fn perm_vec(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ryser_matches_naive(n in 2usize..=7, seed in 0u64..10_000) {
        let m = random_matrix(n, seed);
        let fast = perm_ryser(&m).unwrap();
        let slow = perm_naive(&m).unwrap();
        let tol = 1e-10 * slow.norm().max(1.0);
        prop_assert!((fast - slow).norm() <= tol);
    }

    #[test]
    fn permanent_invariant_under_permutations(n in 2usize..=6, seed in 0u64..10_000) {
        let m = random_matrix(n, seed);
        let base = perm_naive(&m).unwrap();
        let rp = permute_rows(&m, &perm_vec(n, seed.wrapping_add(1)));
        let cp = permute_cols(&m, &perm_vec(n, seed.wrapping_add(2)));
        let tol = 1e-10 * base.norm().max(1.0);
        prop_assert!((perm_naive(&rp).unwrap() - base).norm() <= tol);
        prop_assert!((perm_naive(&cp).unwrap() - base).norm() <= tol);
    }

    #[test]
    fn permanent_scaling_law(n in 2usize..=6, seed in 0u64..10_000) {
        let m = random_matrix(n, seed);
        let scaled = m.scale(Complex64::new(2.0, 0.0));
        let expected = perm_naive(&m).unwrap() * 2f64.powi(n as i32);
        let got = perm_naive(&scaled).unwrap();
        prop_assert!((got - expected).norm() <= 1e-10 * expected.norm().max(1.0));
    }

    #[test]
    fn permanent_zero_row_is_zero(n in 2usize..=6, seed in 0u64..10_000, row in 0usize..6) {
        let mut m = random_matrix(n, seed);
        let row = row % n;
        for j in 0..n {
            m.set(row, j, Complex64::new(0.0, 0.0));
        }
        prop_assert_eq!(perm_naive(&m).unwrap(), Complex64::new(0.0, 0.0));
        prop_assert!(perm_ryser(&m).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn ryser_partition_independent(seed in 0u64..1_000) {
        let m = random_matrix(8, seed);
        let reference = perm_ryser(&m).unwrap();
        for parts in [1usize, 2, 3, 4, 7, 8, 16, 255] {
            let split = perm_ryser_partitioned(&m, parts);
            prop_assert!(
                (split - reference).norm() <= 1e-10 * reference.norm().max(1.0),
                "parts = {}", parts
            );
        }
    }
}

#[test]
fn enumeration_counts_match_binomials() {
    for m in 1..=16usize {
        for n in 1..=7usize.min(m) {
            let c = enumerate_no_collision(m, n).unwrap().len();
            assert_eq!(c as u128, binomial(m, n), "C({m},{n})");
        }
        for n in 0..=7usize {
            let c = enumerate_multisets(m, n).unwrap().len();
            assert_eq!(c as u128, binomial(m + n - 1, n), "multisets({m},{n})");
        }
    }
}

#[test]
fn uniform_profile_weights_depend_only_on_size() {
    let profile = LossProfile::uniform(16, 16, 0.7, 0.9).unwrap();
    let a = InputPattern::new(vec![1, 2, 3]).unwrap();
    let b = InputPattern::new(vec![5, 9, 16]).unwrap();
    let wa = profile.input_weight(&a).unwrap();
    let wb = profile.input_weight(&b).unwrap();
    assert_eq!(wa, wb);
    assert!((wa - 0.7f64.powi(3)).abs() < 1e-15);

    let t = OutputPattern::new(vec![2, 4, 8]).unwrap();
    assert!((profile.output_weight(&t).unwrap() - 0.9f64.powi(3)).abs() < 1e-15);
}

#[test]
fn weights_monotone_in_efficiency() {
    let s = InputPattern::new(vec![1, 2]).unwrap();
    let mut last = f64::INFINITY;
    for xi in [1.0, 0.9, 0.7, 0.4, 0.1] {
        let p = LossProfile::uniform(4, 4, xi, 1.0).unwrap();
        let w = p.input_weight(&s).unwrap();
        assert!(w < last);
        last = w;
    }
}

#[test]
fn distribution_permutation_covariance() {
    // Relabeling output modes permutes the support probabilities.
    let m = 6;
    let u = haar_random(m, 77).unwrap();
    let s = InputPattern::new(vec![1, 2, 3]).unwrap();
    let base = standard_distribution(&u, &s, true).unwrap();

    // cyclic relabeling pi(j) = j % m + 1 (1-based)
    let pi: Vec<usize> = (0..m).map(|j| (j + 1) % m).collect();
    // column pi[j] of relabeled matrix = column j of u
    let mut relabeled = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            relabeled.set(i, pi[j], u.matrix().get(i, j));
        }
    }
    let relabeled = bosim::UnitaryMatrix::from_matrix(relabeled).unwrap();
    let moved = standard_distribution(&relabeled, &s, true).unwrap();

    for (t, &p) in base.support().iter().zip(base.probs()) {
        let mapped: Vec<usize> = t.ports().iter().map(|&q| pi[q - 1] + 1).collect();
        let mapped = OutputPattern::new(mapped).unwrap();
        let q = moved.prob(&mapped).unwrap();
        assert!(
            (p - q).abs() <= 1e-12,
            "probability moved under relabeling: {p} vs {q}"
        );
    }
}

#[test]
fn builder_bitwise_independent_of_worker_count() {
    let u = haar_random(10, 5).unwrap();
    let inputs = InputPattern::new(vec![1, 2, 3, 4]).unwrap();
    let profile = LossProfile::lossless(10);
    let reference = lossy_source_distribution(&u, &inputs, 3, &profile).unwrap();
    for threads in [1usize, 2, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let d = pool.install(|| lossy_source_distribution(&u, &inputs, 3, &profile).unwrap());
        assert_eq!(d.probs(), reference.probs(), "threads = {threads}");
    }
}

#[test]
fn sampler_chi_square_goodness_of_fit() {
    // Sampled events against their source distribution: chi-square p-value
    // above 1e-3 for every seed. Fixed seeds keep the check deterministic.
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let d = uniform_distribution(16, 3).unwrap();
    let n = 100_000usize;
    let chi2 = ChiSquared::new((d.len() - 1) as f64).unwrap();
    for seed in 0..20u64 {
        let log = bosim::sample(&d, n, seed, bosim::SourceLabel::Uniform).unwrap();
        let emp = bosim::empirical_distribution(&log, &d).unwrap();
        let stat: f64 = emp
            .probs()
            .iter()
            .zip(d.probs())
            .map(|(&q, &p)| {
                let expected = p * n as f64;
                let observed = q * n as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        let p_value = 1.0 - chi2.cdf(stat);
        assert!(
            p_value > 1e-3,
            "seed {seed}: chi2 = {stat:.1}, p = {p_value:.5}"
        );
    }
}

#[test]
fn validation_power_grows_with_event_count() {
    let mut lr_short = 0i64;
    let mut lr_long = 0i64;
    let mut rne_short = 0i64;
    let mut rne_long = 0i64;
    for seed in 0..10u64 {
        let u = haar_random(16, 1000 + seed).unwrap();
        let inputs = InputPattern::new(vec![1, 2, 3, 4]).unwrap();
        let boson = lossy_source_distribution(&u, &inputs, 3, &LossProfile::lossless(16)).unwrap();
        let dis =
            bosim::distinguishable_distribution(&u, &inputs, 3, &LossProfile::lossless(16))
                .unwrap();
        let uni = uniform_distribution(16, 3).unwrap();

        for (dist, is_boson) in [(&boson, true), (&dis, false)] {
            let long = bosim::sample(dist, 2000, seed, bosim::SourceLabel::Boson).unwrap();
            let mut short = long.clone();
            short.events.truncate(500);
            let tl = bosim::lr_test(&long, &u, &inputs, 3, None, 0.9, 1.5).unwrap();
            let ts = bosim::lr_test(&short, &u, &inputs, 3, None, 0.9, 1.5).unwrap();
            let _ = is_boson;
            lr_long += tl.final_value().abs();
            lr_short += ts.final_value().abs();
        }
        for dist in [&boson, &uni] {
            let long = bosim::sample(dist, 2000, seed, bosim::SourceLabel::Boson).unwrap();
            let mut short = long.clone();
            short.events.truncate(500);
            let tl = bosim::rne_test(&long, &u, &inputs, 3, None).unwrap();
            let ts = bosim::rne_test(&short, &u, &inputs, 3, None).unwrap();
            rne_long += tl.final_value().abs();
            rne_short += ts.final_value().abs();
        }
    }
    assert!(
        lr_long > lr_short,
        "lr: mean |final| should grow with N ({lr_long} vs {lr_short})"
    );
    assert!(
        rne_long > rne_short,
        "rne: mean |final| should grow with N ({rne_long} vs {rne_short})"
    );
}

#[test]
fn sampling_tvd_scale() {
    // Mirrors the expected TVD ~ sqrt(|support| / (2 pi N)) Monte Carlo scale.
    let u = haar_random(16, 31).unwrap();
    let s = InputPattern::new(vec![1, 2, 3]).unwrap();
    let d = standard_distribution(&u, &s, true).unwrap();
    let log = bosim::sample(&d, 400_000, 8, bosim::SourceLabel::Boson).unwrap();
    let emp = bosim::empirical_distribution(&log, &d).unwrap();
    let tvd = emp.tvd(&d).unwrap();
    assert!(tvd <= 0.03, "tvd = {tvd}");
}
