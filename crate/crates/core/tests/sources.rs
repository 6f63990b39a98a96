use israte::{ExtReal, Gaussian, SourceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn g(mu: f64, sigma: f64) -> Gaussian {
    Gaussian::new(mu, sigma).unwrap()
}

fn sources() -> Vec<SourceSpec> {
    vec![
        SourceSpec::gaussian(0.3, 1.5).unwrap(),
        SourceSpec::mixed(g(-1.0, 1.0), g(1.0, 0.5), [0.3, 0.7]).unwrap(),
        SourceSpec::interleaved(g(-1.0, 1.0), g(1.0, 1.0)).unwrap(),
        SourceSpec::divergent(),
    ]
}

#[test]
fn sampler_frequencies_match_exact_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let count = 100_000;
    for src in sources() {
        for k in 0..20 {
            let n: u64 = rng.random_range(1..60);
            let centre: f64 = if src == SourceSpec::divergent() { n as f64 } else { rng.random_range(-1.5..1.5) };
            let hw: f64 = rng.random_range(0.05..1.0);
            let (lo, hi) = (centre - hw, centre + hw);
            let p = src.exact_interval_prob(n, lo, hi).unwrap();
            let draws = src.sample(n, count, 1000 + k).unwrap();
            let hits = draws.iter().filter(|&&z| lo < z && z < hi).count() as f64;
            let sd = (count as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (hits - count as f64 * p).abs() <= 5.0 * sd + 1e-9,
                "{} n={n} ({lo}, {hi}): {hits} hits vs {}",
                src.slug(),
                count as f64 * p
            );
        }
    }
}

#[test]
fn cgf_vanishes_at_zero_and_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for src in sources() {
        for n in [1u64, 2, 7, 100, 5000] {
            assert_eq!(src.exact_cgf(n, 0.0).unwrap(), ExtReal::ZERO);
        }
        for _ in 0..50 {
            let n: u64 = rng.random_range(1..2000);
            let (a, b): (f64, f64) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let lam: f64 = rng.random_range(0.01..0.99);
            let mid = src.exact_cgf(n, lam * a + (1.0 - lam) * b).unwrap().to_f64();
            let chord =
                lam * src.exact_cgf(n, a).unwrap().to_f64() + (1.0 - lam) * src.exact_cgf(n, b).unwrap().to_f64();
            assert!(mid <= chord + 1e-9, "{} n={n}", src.slug());
        }
    }
}

#[test]
fn mixture_probability_is_the_weighted_sum() {
    let (a, b) = (g(-1.0, 1.0), g(1.0, 0.5));
    let src = SourceSpec::mixed(a, b, [0.3, 0.7]).unwrap();
    let (pa, pb) = (SourceSpec::GaussianIid(a), SourceSpec::GaussianIid(b));
    for n in [1u64, 10, 1000] {
        for (lo, hi) in [(-0.5, 0.5), (0.9, 1.2), (-3.0, -0.2)] {
            let want =
                0.3 * pa.exact_interval_prob(n, lo, hi).unwrap() + 0.7 * pb.exact_interval_prob(n, lo, hi).unwrap();
            assert_eq!(src.exact_interval_prob(n, lo, hi).unwrap(), want);
        }
    }
}

#[test]
fn deep_tails_stay_finite_in_log_space() {
    let src = SourceSpec::gaussian(0.0, 1.0).unwrap();
    // P(Z > 3) at n = 2e4 is about exp(-9e4): far below the smallest double
    let lp = src.log_interval_prob(20_000, 3.0, 3.5).unwrap().to_f64() / 20_000.0;
    assert!((lp + 4.5).abs() < 1e-3, "{lp}");
    assert_eq!(SourceSpec::divergent().log_interval_prob(5, -1.0, 1.0).unwrap(), ExtReal::NegInf);
}
