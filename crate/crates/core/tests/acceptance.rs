//! Acceptance gate. Runs every headline criterion at its stated tolerance
//! and prints one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use quban_core::analysis::{self, SuiteConfig, DEFAULT_QUADRATURE_STEP};
use quban_core::envs::Preset;
use quban_core::metrics::RunMetrics;
use quban_core::presets::{self, DEFAULT_RUNS};
use quban_core::rng::run_seed;
use quban_core::sim::{self, RunConfig};

const SEED: u64 = 20_240_601;
const N: u64 = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn variant(preset: Preset, name: &str, horizon: u64) -> RunConfig {
    presets::variant(preset, name, horizon).unwrap_or_else(|| panic!("no variant {name}"))
}

/// Runs `DEFAULT_RUNS` matched-seed repetitions.
fn runs(config: &RunConfig) -> Vec<RunMetrics> {
    (0..DEFAULT_RUNS as u64)
        .map(|i| sim::run_once(config, run_seed(SEED, i)).expect("run").metrics)
        .collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn final_regret(rs: &[RunMetrics]) -> f64 {
    mean(rs.iter().map(|r| r.realized_regret))
}

fn avg_bits_at(rs: &[RunMetrics], t: u64) -> f64 {
    mean(rs.iter().map(|r| r.avg_bits_at(t).expect("horizon reached")))
}

fn unbiasedness() -> Outcome {
    let start = Instant::now();
    let stat = analysis::unbiasedness_statistic(&SuiteConfig::full(SEED));
    let took = start.elapsed();
    outcome(
        stat <= 5.0 && took < Duration::from_secs(60),
        format!("max |mean - r| sqrt(N)/M = {stat:.3} (tol 5), {:.1}s", took.as_secs_f64()),
    )
}

fn bounded_error() -> Outcome {
    let c = analysis::bounded_error(&SuiteConfig::full(SEED));
    outcome(c.passed, format!("{} violations in 1e6 cycles", c.statistic))
}

fn shift_invariance() -> Outcome {
    let (support, freq) = analysis::shift_invariance(&SuiteConfig::full(SEED));
    outcome(
        support.passed && freq.passed,
        format!(
            "{} off-support decodes; max frequency z = {:.2} (tol 4)",
            support.statistic, freq.statistic
        ),
    )
}

fn prefix_free() -> Outcome {
    let c = analysis::prefix_free(&SuiteConfig::full(SEED));
    outcome(c.passed, format!("{} failed frame pairs in 1e6", c.statistic))
}

fn average_bits() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (preset, name) in [
        (Preset::Setup1, "ucb_quban_avg_arm_pt"),
        (Preset::Setup3, "linucb_quban_contextual"),
    ] {
        let rs = runs(&variant(preset, name, N));
        let late = avg_bits_at(&rs, N);
        let early = avg_bits_at(&rs, 1_000);
        ok &= late <= 4.0 && late <= early + 0.2;
        parts.push(format!("{}: B(1e4) = {late:.3}, B(1e3) = {early:.3}", preset.name()));
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(300);
    outcome(ok, format!("{} ({:.1}s)", parts.join("; "), took.as_secs_f64()))
}

fn regret_factor() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (preset, q, u) in [
        (Preset::Setup1, "ucb_quban_avg_arm_pt", "ucb_unquantized"),
        (Preset::Setup3, "linucb_quban_contextual", "linucb_unquantized"),
    ] {
        let ratio = final_regret(&runs(&variant(preset, q, N))) / final_regret(&runs(&variant(preset, u, N)));
        ok &= ratio <= 1.5;
        parts.push(format!("{}: {ratio:.3}", preset.name()));
    }
    outcome(ok, format!("regret ratio quban/unquantized {} (tol 1.5)", parts.join(", ")))
}

fn instantaneous_bound() -> Outcome {
    let bound = quban_core::codec::instantaneous_bound(N);
    let rs = runs(&variant(Preset::Setup1, "ucb_quban_avg_arm_pt", N));
    let over = rs
        .iter()
        .flat_map(|r| &r.records)
        .filter(|s| s.bits > bound)
        .count();
    let frac = over as f64 / (rs.len() as f64 * N as f64);
    outcome(
        bound == 13 && frac <= 0.01,
        format!("bound {bound} bits; fraction above = {frac:.5} (tol 0.01)"),
    )
}

fn one_bit_penalty() -> Outcome {
    // Realized regret is the criterion; pseudo-regret is shown because
    // clipping at lambda = 1 adds the same mean shift to every policy.
    let ratios = |lambda: &str| {
        let sq = runs(&variant(Preset::AppG, &format!("ucb_sq1_clip{lambda}"), N));
        let un = runs(&variant(Preset::AppG, &format!("ucb_unquantized_clip{lambda}"), N));
        let pseudo = |rs: &[RunMetrics]| mean(rs.iter().map(|r| r.pseudo_regret));
        (final_regret(&sq) / final_regret(&un), pseudo(&sq) / pseudo(&un))
    };
    let (wide, wide_p) = ratios("100");
    let (narrow, narrow_p) = ratios("1");
    outcome(
        wide >= 5.0 && narrow <= 1.5,
        format!(
            "sq1/unquantized: lambda=100 {wide:.2} (need >= 5), lambda=1 {narrow:.3} (need <= 1.5); \
             pseudo-regret ratios {wide_p:.2}, {narrow_p:.3}"
        ),
    )
}

fn baseline_gap() -> Outcome {
    let quban = final_regret(&runs(&variant(Preset::Setup2, "ucb_quban_avg_arm_pt", N)));
    let sq1 = final_regret(&runs(&variant(Preset::Setup2, "ucb_sq1", N)));
    let sq3 = final_regret(&runs(&variant(Preset::Setup2, "ucb_sq3", N)));
    outcome(
        sq1 >= 2.0 * quban && sq3 >= quban,
        format!("regret quban {quban:.1}, sq1 {sq1:.1} ({:.2}x), sq3 {sq3:.1} ({:.2}x)", sq1 / quban, sq3 / quban),
    )
}

fn lower_bound() -> Outcome {
    let six = analysis::gaussian_unit_grid_bound(6, DEFAULT_QUADRATURE_STEP).expect("valid");
    let eight = analysis::gaussian_unit_grid_bound(8, DEFAULT_QUADRATURE_STEP).expect("valid");
    let drift = (six.expected_length - eight.expected_length).abs();
    outcome(
        eight.expected_length >= 2.2 && drift < 1e-4,
        format!(
            "expected length {:.5} bits (need >= 2.2), |L6 - L8| = {drift:.2e}; tail-corrected {:.4}",
            eight.expected_length, eight.tail_corrected_length
        ),
    )
}

fn sublinear_scaling() -> Outcome {
    let k = 100.0;
    let scaled = |n: u64| {
        let r = final_regret(&runs(&variant(Preset::Setup1, "ucb_quban_avg_arm_pt", n)));
        let nf = n as f64;
        r / (nf * k * nf.ln()).sqrt()
    };
    let early = scaled(1_000);
    let late = scaled(N);
    outcome(
        late <= 1.3 * early,
        format!("R/sqrt(nk ln n): n=1e3 {early:.4}, n=1e4 {late:.4}, ratio {:.3} (tol 1.3)", late / early),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("codec unbiasedness", unbiasedness),
        ("bounded error", bounded_error),
        ("shift invariance / two-level support", shift_invariance),
        ("prefix-free round trip", prefix_free),
        ("average bits", average_bits),
        ("regret factor", regret_factor),
        ("instantaneous bound", instantaneous_bound),
        ("1-bit SQ penalty", one_bit_penalty),
        ("baseline gap", baseline_gap),
        ("lower-bound integral", lower_bound),
        ("sublinear regret scaling", sublinear_scaling),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
