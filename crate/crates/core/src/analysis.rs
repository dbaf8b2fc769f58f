//! Numeric validators: the Gaussian unit-grid code-length bound and a
//! Monte-Carlo battery over the reward codec.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bits::BitString;
use crate::codec::{self, DecodeOffsets, QubanFrame};
use crate::math;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("quadrature step {0} must lie in (0, 0.01]")]
    BadQuadrature(f64),
    #[error("z_max must be at least 3, got {0}")]
    BadLevelRange(u32),
}

/// Integration range of the quadrature.
pub const QUADRATURE_HALF_WIDTH: f64 = 8.0;
pub const DEFAULT_QUADRATURE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCode {
    pub level: i32,
    pub probability: f64,
    /// Length of the level's codeword in bits.
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub z_max: u32,
    /// Levels `-z_max..=z_max` in decreasing-probability order.
    pub levels: Vec<LevelCode>,
    pub total_probability: f64,
    pub expected_length: f64,
    /// Same assignment computed from the tail-corrected level bounds on
    /// levels `-3..=3` only.
    pub tail_corrected_length: f64,
}

impl LowerBoundReport {
    pub fn probability(&self, level: i32) -> Option<f64> {
        self.levels.iter().find(|l| l.level == level).map(|l| l.probability)
    }
}

fn phi(x: f64) -> f64 {
    math::exp(-0.5 * x * x) / math::sqrt(2.0 * core::f64::consts::PI)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + math::erf(x / core::f64::consts::SQRT_2))
}

/// Composite trapezoid rule for `f` over `[a, b]` with spacing at most `h`.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = math::ceil((b - a) / h - 1e-9).max(1.0) as usize;
    let dx = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n {
        sum += f(a + dx * i as f64);
    }
    sum * dx
}

/// Integrates `f * phi` over `[lo, hi]` clipped to the quadrature window.
fn gauss_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> f64 {
    let a = lo.max(-QUADRATURE_HALF_WIDTH);
    let b = hi.min(QUADRATURE_HALF_WIDTH);
    trapezoid(|x| f(x) * phi(x), a, b, h)
}

/// Assigns prefix-code lengths `1, 2, 3, ...` by decreasing probability
/// (ties to the level nearer zero, then the positive one) and returns the
/// sorted levels with the expected length.
fn assign_lengths(mut levels: Vec<(i32, f64)>) -> (Vec<LevelCode>, f64) {
    levels.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.abs().cmp(&b.0.abs()))
            .then(b.0.cmp(&a.0))
    });
    let mut expected = 0.0;
    let coded = levels
        .into_iter()
        .enumerate()
        .map(|(i, (level, probability))| {
            let length = i as u32 + 1;
            expected += probability * f64::from(length);
            LevelCode {
                level,
                probability,
                length,
            }
        })
        .collect();
    (coded, expected)
}

/// Code-length bound for unbiased stochastic rounding of a standard
/// Gaussian onto the integers: level `z` is sent with probability
/// `p_z = E[max(0, 1 - |X - z|)]`, and levels receive codewords of length
/// `1, 2, 3, ...` in decreasing order of `p_z`.
pub fn gaussian_unit_grid_bound(z_max: u32, step: f64) -> Result<LowerBoundReport, AnalysisError> {
    if !(step > 0.0 && step <= 0.01) {
        return Err(AnalysisError::BadQuadrature(step));
    }
    if z_max < 3 {
        return Err(AnalysisError::BadLevelRange(z_max));
    }
    let zm = z_max as i32;
    let probs: Vec<(i32, f64)> = (-zm..=zm)
        .map(|z| {
            let zf = f64::from(z);
            // The kernel has kinks at z - 1, z and z + 1; integrate each
            // linear piece separately.
            let left = gauss_integral(|x| 1.0 - (zf - x), zf - 1.0, zf, step);
            let right = gauss_integral(|x| 1.0 - (x - zf), zf, zf + 1.0, step);
            (z, left + right)
        })
        .collect();
    let total_probability = probs.iter().map(|p| p.1).sum();
    let (levels, expected_length) = assign_lengths(probs);

    let corrected: Vec<(i32, f64)> = (-3..=3).map(|i| (i, tail_corrected_level(i, step))).collect();
    let (_, tail_corrected_length) = assign_lengths(corrected);

    Ok(LowerBoundReport {
        z_max,
        levels,
        total_probability,
        expected_length,
        tail_corrected_length,
    })
}

/// Level-`i` probability bound with the far-level mass subtracted:
/// the triangle weight `1 - |x - i|` less `sum_j j exp(-2 (ceil(x) + j)^2)`
/// on `[i-1, i]` and `sum_j j exp(-2 (floor(x) - j)^2)` on `[i, i+1]`.
fn tail_corrected_level(i: i32, step: f64) -> f64 {
    fn series(base: f64, sign: f64) -> f64 {
        (1..=40)
            .map(|j| {
                let q = base + sign * f64::from(j);
                f64::from(j) * math::exp(-2.0 * q * q)
            })
            .sum()
    }
    let fi = f64::from(i);
    // Inside each half-open piece the ceiling (floor) is constant.
    let left_sub = series(fi, 1.0);
    let right_sub = series(fi, -1.0);
    let left = gauss_integral(|x| 1.0 - (fi - x) - left_sub, fi - 1.0, fi, step);
    let right = gauss_integral(|x| 1.0 - (x - fi) - right_sub, fi, fi + 1.0, step);
    left + right
}

/// One line of a validation report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub statistic: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &'static str, statistic: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: statistic <= tolerance,
            statistic,
            tolerance,
        }
    }

    fn at_least(name: &'static str, statistic: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: statistic >= tolerance,
            statistic,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    /// Monte-Carlo draws per statistical estimate, and fuzz cases per
    /// exhaustive check.
    pub samples: usize,
    pub seed: u64,
    /// Decoder constants; anything but the default is a fault injection.
    pub offsets: DecodeOffsets,
}

impl SuiteConfig {
    pub fn full(seed: u64) -> Self {
        Self {
            samples: 1_000_000,
            seed,
            offsets: DecodeOffsets::default(),
        }
    }

    pub fn quick(seed: u64) -> Self {
        Self {
            samples: 10_000,
            ..Self::full(seed)
        }
    }
}

/// A fuzzed codec input `(r, mu_hat, M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub r: f64,
    pub mu_hat: f64,
    pub m: f64,
}

fn log_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    let (a, b) = (math::ln(lo), math::ln(hi));
    math::exp(a + (b - a) * rng.uniform())
}

fn triple_with(rng: &mut RngStream, r_bar: f64) -> Triple {
    let m = log_uniform(rng, 1e-2, 1e2);
    let mu_hat = m * rng.random_range(-50.0..50.0);
    let center = math::floor(mu_hat / m);
    Triple {
        r: (r_bar + center) * m,
        mu_hat,
        m,
    }
}

/// `count` triples: a fifth central, a fifth near the window edges, the
/// rest in the tails with `|r_bar|` up to `1e3`, both signs.
pub fn fuzz_triples(count: usize, rng: &mut RngStream) -> Vec<Triple> {
    (0..count)
        .map(|i| {
            let r_bar = match i % 5 {
                0 => rng.random_range(-3.0..=4.0),
                1 => {
                    let edge = if rng.bernoulli(0.5) { 4.0 } else { -3.0 };
                    edge + rng.random_range(-1.0..1.0)
                }
                _ => {
                    let mag = log_uniform(rng, 1.0, 1e3);
                    if rng.bernoulli(0.5) {
                        4.0 + mag
                    } else {
                        -3.0 - mag
                    }
                }
            };
            triple_with(rng, r_bar)
        })
        .collect()
}

fn encode_decode(t: &Triple, rng: &mut RngStream, offsets: DecodeOffsets) -> f64 {
    let frame = codec::encode(t.r, t.mu_hat, t.m, rng).expect("fuzzed inputs are in range");
    codec::decode_with(&frame, t.mu_hat, t.m, offsets).expect("fuzzed inputs are in range")
}

/// Largest `|mean(r_hat) - r| * sqrt(N) / M` over 50 fuzzed triples.
pub fn unbiasedness_statistic(config: &SuiteConfig) -> f64 {
    let mut rng = RngStream::new(config.seed, 100);
    let triples = fuzz_triples(50, &mut rng);
    let n = config.samples;
    triples
        .iter()
        .map(|t| {
            // Accumulate the offset from r to keep the sum well scaled.
            let mut dev = 0.0;
            for _ in 0..n {
                dev += encode_decode(t, &mut rng, config.offsets) - t.r;
            }
            (dev / n as f64).abs() * math::sqrt(n as f64) / t.m
        })
        .fold(0.0, f64::max)
}

/// Counts `|r_hat - r| > M` over `samples` fuzzed encode/decode cycles.
pub fn bounded_error(config: &SuiteConfig) -> Check {
    let mut rng = RngStream::new(config.seed, 101);
    let mut violations = 0u64;
    for _ in 0..config.samples {
        let t = fuzz_triples(1, &mut rng)[0];
        let t = if rng.bernoulli(0.5) {
            t
        } else {
            // Arbitrary real rewards, not only grid-aligned offsets.
            Triple {
                r: t.r + t.m * rng.uniform(),
                ..t
            }
        };
        let r_hat = encode_decode(&t, &mut rng, config.offsets);
        if (r_hat - t.r).abs() > t.m * (1.0 + 1e-9) {
            violations += 1;
        }
    }
    Check::at_most("bounded_error", violations as f64, 0.0)
}

/// Fixed `(r, M)` pairs for the shift-invariance check.
pub fn shift_pairs() -> Vec<(f64, f64)> {
    vec![
        (0.3, 1.0),
        (-0.3, 1.0),
        (2.75, 0.5),
        (-7.1, 2.0),
        (10.5, 1.0),
        (0.01, 0.1),
        (123.456, 0.7),
        (-55.5, 3.0),
        (1.0 / 3.0, 0.25),
        (9.99, 0.01),
        (-0.001, 0.05),
        (31.6, 0.316),
        (-12.9, 0.316),
        (1000.2, 10.0),
        (4.4, 1.0),
        (-3.6, 1.0),
        (0.95, 0.1),
        (77.7, 5.0),
        (-2.25, 0.2),
        (6.02, 1.5),
    ]
}

/// Support and upper-level frequency of the decoded reward for each fixed
/// `(r, M)` pair under 100 random centres.
pub fn shift_invariance(config: &SuiteConfig) -> (Check, Check) {
    let mut rng = RngStream::new(config.seed, 102);
    let draws = (config.samples / 100).max(100);
    let mut support_errors = 0u64;
    let mut max_z: f64 = 0.0;
    for (r, m) in shift_pairs() {
        let (whole, frac) = crate::sq::split(r / m);
        let lower = whole * m;
        let upper = (whole + 1.0) * m;
        let sd = math::sqrt(frac * (1.0 - frac) / draws as f64);
        for j in 0..100 {
            // Centres near the reward and far into either tail.
            let spread = if j % 2 == 0 { 5.0 } else { 1e3 };
            let mu_hat = r + m * rng.random_range(-spread..spread);
            let t = Triple { r, mu_hat, m };
            let mut ups = 0u64;
            for _ in 0..draws {
                let r_hat = encode_decode(&t, &mut rng, config.offsets);
                if r_hat == upper {
                    ups += 1;
                } else if r_hat != lower {
                    support_errors += 1;
                }
            }
            let freq = ups as f64 / draws as f64;
            let z = if sd > 0.0 {
                (freq - frac).abs() / sd
            } else if freq == frac {
                0.0
            } else {
                f64::INFINITY
            };
            max_z = max_z.max(z);
        }
    }
    (
        Check::at_most("shift_support", support_errors as f64, 0.0),
        Check::at_most("shift_frequency", max_z, 4.0),
    )
}

/// A random well-formed frame, covering every case code.
pub fn random_frame(rng: &mut RngStream) -> QubanFrame {
    match rng.random_range(0..4u8) {
        0 => QubanFrame::central(rng.random_range(-2..=3i8)).expect("central range"),
        1 => QubanFrame::boundary(rng.bernoulli(0.5)),
        _ => {
            let index = rng.random_range(1..=24u32);
            let max = codec::ladder_value(index).max(1);
            let residual = rng.random_range(0..=max);
            QubanFrame::tail(rng.bernoulli(0.5), index, residual).expect("residual within grid")
        }
    }
}

/// Frame pairs written back to back must parse back exactly, each
/// consuming its own length.
pub fn prefix_free(config: &SuiteConfig) -> Check {
    let mut rng = RngStream::new(config.seed, 103);
    let mut failures = 0u64;
    let mut wire = BitString::new();
    for i in 0..config.samples {
        let a = if i % 2 == 0 {
            random_frame(&mut rng)
        } else {
            let t = fuzz_triples(1, &mut rng)[0];
            codec::encode(t.r, t.mu_hat, t.m, &mut rng).expect("fuzzed inputs are in range")
        };
        let b = random_frame(&mut rng);
        wire.clear();
        a.write_to(&mut wire);
        let split = wire.len();
        b.write_to(&mut wire);
        let mut reader = wire.reader();
        let ok = split == a.bit_len() as usize
            && QubanFrame::read_from(&mut reader).is_ok_and(|f| f == a)
            && reader.position() == split
            && QubanFrame::read_from(&mut reader).is_ok_and(|f| f == b)
            && reader.remaining() == 0;
        if !ok {
            failures += 1;
        }
    }
    Check::at_most("prefix_free_round_trip", failures as f64, 0.0)
}

fn formula_agreement(config: &SuiteConfig) -> Check {
    let mut rng = RngStream::new(config.seed, 104);
    let mut mismatches = 0u64;
    for _ in 0..config.samples {
        let frame = random_frame(&mut rng);
        let m = log_uniform(&mut rng, 1e-2, 1e2);
        let mu_hat = m * rng.random_range(-1e3..1e3);
        let a = codec::decode_with(&frame, mu_hat, m, config.offsets).expect("in range");
        let b = codec::decode_explicit(&frame, mu_hat, m).expect("in range");
        if a != b {
            mismatches += 1;
        }
    }
    Check::at_most("decode_formula_agreement", mismatches as f64, 0.0)
}

/// Largest ratio of the empirical variance of `r_hat` to
/// `((1 + eps/2) sigma)^2` for Gaussian rewards.
fn variance_proxy(config: &SuiteConfig) -> Check {
    let mut rng = RngStream::new(config.seed, 105);
    let sigma = 1.0;
    let mut worst: f64 = 0.0;
    for &eps in &[0.5, 1.0, 2.0] {
        for &(mu, offset) in &[(0.0, 0.0), (3.3, -1.7), (-40.0, 25.0)] {
            let m = eps * sigma;
            let mu_hat = mu + offset;
            let n = config.samples;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let t = Triple {
                    r: mu + sigma * z,
                    mu_hat,
                    m,
                };
                let d = encode_decode(&t, &mut rng, config.offsets) - mu;
                sum += d;
                sum_sq += d * d;
            }
            let mean = sum / n as f64;
            let var = (sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0);
            let proxy = (1.0 + eps / 2.0) * sigma;
            worst = worst.max(var / (proxy * proxy));
        }
    }
    Check::at_most("variance_proxy", worst, 1.05)
}

/// Runs the codec battery and the code-length bound checks.
pub fn codec_validation_suite(config: &SuiteConfig) -> ValidationReport {
    let mut checks = Vec::new();
    checks.push(Check::at_most("unbiasedness", unbiasedness_statistic(config), 5.0));
    checks.push(bounded_error(config));
    let (support, freq) = shift_invariance(config);
    checks.push(support);
    checks.push(freq);
    checks.push(prefix_free(config));
    checks.push(formula_agreement(config));
    checks.push(variance_proxy(config));

    let closed_p0 = 2.0 * (normal_cdf(1.0) - normal_cdf(0.0) - (phi(0.0) - phi(1.0)));
    match (
        gaussian_unit_grid_bound(6, DEFAULT_QUADRATURE_STEP),
        gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP),
    ) {
        (Ok(six), Ok(eight)) => {
            let p0 = eight.probability(0).unwrap_or(f64::NAN);
            checks.push(Check::at_most("lower_bound_p0", (p0 - closed_p0).abs(), 1e-6));
            checks.push(Check::at_least("lower_bound_length", eight.expected_length, 2.2));
            checks.push(Check::at_most(
                "lower_bound_stability",
                (eight.expected_length - six.expected_length).abs(),
                1e-4,
            ));
        }
        _ => checks.push(Check::at_most("lower_bound_length", f64::INFINITY, 0.0)),
    }
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_matches_closed_form() {
        let r = gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP).unwrap();
        let closed = 2.0 * (normal_cdf(1.0) - normal_cdf(0.0) - (phi(0.0) - phi(1.0)));
        assert!((r.probability(0).unwrap() - closed).abs() < 1e-6);
        assert!((closed - 0.368_746_38).abs() < 1e-8);
    }

    #[test]
    fn level_masses() {
        let r = gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP).unwrap();
        // Upper end allows for summation rounding.
        assert!(r.total_probability <= 1.0 + 1e-12 && r.total_probability >= 1.0 - 1e-6);
        let inner: f64 = (-4..=4).map(|z| r.probability(z).unwrap()).sum();
        assert!(inner >= 0.999);
        assert!(r.expected_length >= 2.2);
        let lengths: Vec<u32> = r.levels.iter().map(|l| l.length).collect();
        assert_eq!(lengths, (1..=17).collect::<Vec<_>>());
        assert!(r.levels.windows(2).all(|w| w[0].probability >= w[1].probability));
        assert_eq!(r.levels[0].level, 0);
    }

    #[test]
    fn stable_in_level_range() {
        let a = gaussian_unit_grid_bound(6, DEFAULT_QUADRATURE_STEP).unwrap();
        let b = gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP).unwrap();
        let c = gaussian_unit_grid_bound(12, DEFAULT_QUADRATURE_STEP).unwrap();
        assert!((a.expected_length - b.expected_length).abs() < 1e-4);
        assert!((c.expected_length - b.expected_length).abs() < 1e-4);
    }

    #[test]
    fn tail_corrected_variant_is_below_the_plain_bound() {
        let r = gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP).unwrap();
        assert!(r.tail_corrected_length.is_finite());
        assert!(r.tail_corrected_length < r.expected_length);
    }

    #[test]
    fn bad_arguments() {
        assert_eq!(gaussian_unit_grid_bound(8, 0.02), Err(AnalysisError::BadQuadrature(0.02)));
        assert!(gaussian_unit_grid_bound(8, 0.0).is_err());
        assert_eq!(gaussian_unit_grid_bound(2, 1e-3), Err(AnalysisError::BadLevelRange(2)));
    }

    #[test]
    fn quick_suite_passes() {
        let report = codec_validation_suite(&SuiteConfig::quick(7));
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(report.checks.len(), 10);
    }

    #[test]
    fn offset_mutation_breaks_unbiasedness() {
        let mut cfg = SuiteConfig::quick(7);
        cfg.offsets.magnitude = 3.0;
        let report = codec_validation_suite(&cfg);
        assert!(!report.get("unbiasedness").unwrap().passed);
        assert!(!report.all_passed());
    }

    #[test]
    fn standard_error_follows_square_root_law() {
        // Empirical standard error of the decoded mean at N, 2N and 4N.
        let t = Triple {
            r: 0.37,
            mu_hat: 0.0,
            m: 1.0,
        };
        let se = |n: usize, seed: u64| {
            let mut rng = RngStream::new(seed, 0);
            let batches = 200;
            let means: Vec<f64> = (0..batches)
                .map(|_| (0..n).map(|_| encode_decode(&t, &mut rng, DecodeOffsets::default())).sum::<f64>() / n as f64)
                .collect();
            let mu = means.iter().sum::<f64>() / batches as f64;
            math::sqrt(means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (batches - 1) as f64)
        };
        let base = se(1000, 1);
        let doubled = se(2000, 2) / base;
        let quadrupled = se(4000, 3) / base;
        let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
        assert!((doubled - inv_sqrt2).abs() <= 0.2 * inv_sqrt2, "{doubled}");
        assert!((quadrupled - 0.5).abs() <= 0.2 * 0.5, "{quadrupled}");
    }
}
