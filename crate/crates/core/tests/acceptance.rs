//! Acceptance suite. One test per criterion; each prints a single
//! `criterion N ... PASS|FAIL` line. Tests hold a shared lock so runtime
//! budgets are measured without contention from sibling tests.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use dml::bounds::{count_signed_factorizations, mertens_cos_sum, sound_majorant};
use dml::characters::{enumerate_characters, primitive_characters, DirichletCharacter, Parity};
use dml::constants::*;
use dml::lfunc::{functional_equation_residual, log_abs_l, zeta_value, EvalPoint, LogAbs};
use dml::moments::{moment_ratio_scan, Predictor, YMode};
use dml::sieve::PrimeSieve;
use dml::sums::{perron_weighted_batch, polya_expansion, SmoothWeight};
use dml::theta::theta_mellin_batch;
use dml::verify::{PERRON_C, PERRON_GRID_Q, PERRON_GRID_Y, PERRON_LINE, PERRON_TOL, PERRON_T_MAX};

static SERIAL: Mutex<()> = Mutex::new(());

struct Outcome {
    passed: bool,
    detail: String,
    /// bit-level fingerprint of every number the verdict rests on
    digest: String,
}

fn bits(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn report(n: u32, budget: Duration, run: fn() -> Outcome) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = elapsed < budget;
    let passed = out.passed && in_time;
    println!(
        "criterion {n:2} {} | {} | {:.2}s of {:.0}s",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(out.passed, "criterion {n}: {}", out.detail);
    assert!(in_time, "criterion {n}: {:.2}s exceeds {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64());
}

// independent arithmetic oracles

fn oracle_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        oracle_gcd(b, a % b)
    }
}

fn oracle_phi(q: u64) -> u64 {
    (1..=q).filter(|&n| oracle_gcd(n, q) == 1).count() as u64
}

fn oracle_mu(n: u64) -> i64 {
    let mut m = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

fn oracle_is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

// 1

fn character_axioms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count_mismatch = Vec::new();
    let mut digest = 0.0;
    for q in 1..=60u64 {
        let chars = enumerate_characters(q);
        let phi = oracle_phi(q) as f64;
        // column sums: Σ_χ χ(n) = φ(q)·[n ≡ 1]
        for n in 1..=q as i64 {
            let s: Complex64 = chars.iter().map(|c| c.eval(n)).sum();
            let want = if n == 1 || q == 1 { phi } else { 0.0 };
            worst = worst.max((s - want).norm());
        }
        // row sums: Σ_n χ(n) conj ψ(n) = φ(q)·[χ = ψ]
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let s: Complex64 = (1..=q as i64).map(|n| a.eval(n) * b.eval(n).conj()).sum();
                let want = if i == j { phi } else { 0.0 };
                worst = worst.max((s - want).norm());
            }
        }
        let primitive = chars.iter().filter(|c| c.is_primitive()).count() as i64;
        let formula: i64 = (1..=q).filter(|d| q % d == 0).map(|d| oracle_mu(d) * oracle_phi(q / d) as i64).sum();
        if primitive != formula {
            count_mismatch.push(q);
        }
        digest += primitive as f64;
    }
    Outcome {
        passed: worst < 1e-10 && count_mismatch.is_empty(),
        detail: format!("orthogonality max deviation {worst:.2e}, count mismatches {count_mismatch:?}"),
        digest: format!("{} {}", bits(worst), bits(digest)),
    }
}

#[test]
fn criterion_01_character_axioms() {
    report(1, Duration::from_secs(1), character_axioms);
}

// 2

fn gauss_sums() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lib_gap: f64 = 0.0;
    for q in 1..=200u64 {
        for chi in primitive_characters(q, None) {
            let direct: Complex64 =
                (1..=q).map(|n| chi.eval(n as i64) * Complex64::from_polar(1.0, 2.0 * PI * n as f64 / q as f64)).sum();
            worst = worst.max((direct.norm() - (q as f64).sqrt()).abs());
            lib_gap = lib_gap.max((chi.gauss_sum() - direct).norm());
        }
    }
    Outcome {
        passed: worst < 1e-9 && lib_gap < 1e-9,
        detail: format!("max ||tau| - sqrt q| {worst:.2e}, library vs direct {lib_gap:.2e}"),
        digest: format!("{} {}", bits(worst), bits(lib_gap)),
    }
}

#[test]
fn criterion_02_gauss_sums() {
    report(2, Duration::from_secs(5), gauss_sums);
}

// 3

fn functional_equation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for q in [3u64, 4, 5, 7, 8, 11, 12, 13] {
        for chi in primitive_characters(q, None) {
            for t in [0.0, 0.5, 1.0, 2.7] {
                match functional_equation_residual(EvalPoint::new(0.5, t), &chi) {
                    Ok(r) => worst = worst.max(r),
                    Err(_) => worst = f64::INFINITY,
                }
                cases += 1;
            }
        }
    }
    Outcome {
        passed: worst < 1e-8,
        detail: format!("max residual {worst:.2e} over {cases} cases"),
        digest: bits(worst),
    }
}

#[test]
fn criterion_03_functional_equation() {
    report(3, Duration::from_secs(10), functional_equation);
}

// 4

fn theta_brute(chi: &DirichletCharacter) -> Complex64 {
    // e^{-π n²/q} < 1e-300 well before n = 400 for q ≤ 50
    (1..=400i64).map(|n| chi.eval(n) * (-PI * (n * n) as f64 / chi.q() as f64).exp()).sum()
}

fn theta_mellin_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for q in 3..=50u64 {
        let chars = primitive_characters(q, Some(Parity::Even));
        if chars.is_empty() {
            continue;
        }
        for (c, t_max) in [(1.0, 200.0), (0.25, 200.0)] {
            let Ok(values) = theta_mellin_batch(chars[0].modulus(), &chars, c, t_max) else {
                worst = f64::INFINITY;
                continue;
            };
            for (chi, m) in chars.iter().zip(values) {
                let d = theta_brute(chi);
                worst = worst.max((m.value - d).norm() / d.norm());
                count += 1;
            }
        }
    }
    Outcome {
        passed: worst < 1e-6,
        detail: format!("max relative difference {worst:.2e} over {count} evaluations (c = 1 and c = 1/4)"),
        digest: bits(worst),
    }
}

#[test]
fn criterion_04_theta_mellin_identity() {
    report(4, Duration::from_secs(30), theta_mellin_identity);
}

// 5

fn oracle_primes(limit: u64) -> Vec<u64> {
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for n in 2..=limit as usize {
        if !composite[n] {
            out.push(n as u64);
            let mut m = n * n;
            while m <= limit as usize {
                composite[m] = true;
                m += n;
            }
        }
    }
    out
}

fn mertens() -> Outcome {
    let x = 1e5f64;
    let primes = oracle_primes(x as u64);
    let mut worst: f64 = 0.0;
    let mut lib_gap: f64 = 0.0;
    let mut digest = String::new();
    for alpha in [0.01, 0.1, 1.0, 5.0, 20.0, 100.0] {
        let own: f64 = primes.iter().map(|&p| (alpha * (p as f64).ln()).cos() / p as f64).sum();
        let lib = mertens_cos_sum(x, alpha).unwrap_or(f64::NAN);
        lib_gap = lib_gap.max((own - lib).abs());
        let z = zeta_value(EvalPoint::new(1.0 + 1.0 / x.ln(), alpha)).map(|z| z.norm().ln()).unwrap_or(f64::NAN);
        worst = worst.max((lib - z).abs());
        digest.push_str(&bits(lib));
    }
    Outcome {
        passed: worst <= MERTENS_C0 && lib_gap < 1e-10,
        detail: format!("max gap {worst:.4} <= C0 = {MERTENS_C0}; library vs oracle prime sum {lib_gap:.1e}"),
        digest,
    }
}

#[test]
fn criterion_05_mertens() {
    // the budget excludes building the sieve
    PrimeSieve::shared(100_000).unwrap();
    report(5, Duration::from_secs(10), mertens);
}

// 6

/// Σ_{p^k ≤ x} Re χ(p^k) p^{-k(σ₀+it)} / k · log(x/p^k)/log x with σ₀ = ½ + 1/log x.
fn oracle_majorant_poly(chi: &DirichletCharacter, t: f64, x: f64) -> f64 {
    let lx = x.ln();
    let mut total = 0.0;
    for p in oracle_primes(x as u64) {
        let mut k = 1;
        let mut n = p;
        while (n as f64) <= x {
            let ln = (n as f64).ln();
            let v = chi.eval(n as i64) * Complex64::new(-(0.5 + 1.0 / lx) * ln, -t * ln).exp();
            total += v.re / k as f64 * (lx - ln) / lx;
            k += 1;
            n *= p;
        }
    }
    total
}

fn majorant_slack() -> Outcome {
    let mut worst = f64::MIN;
    let mut poly_gap: f64 = 0.0;
    let mut cases = 0;
    let mut skipped = 0;
    for q in (3..=101u64).filter(|&q| oracle_is_prime(q)) {
        for chi in primitive_characters(q, None) {
            for t in [0.0, 1.0] {
                let m = sound_majorant(&chi, t, q as f64, None).expect("valid x");
                let own = oracle_majorant_poly(&chi, t, q as f64);
                poly_gap = poly_gap.max((own - m.dirichlet_poly).abs());
                let log_term = ((q as f64).ln() + t.abs().ln().max(0.0)) / (q as f64).ln();
                poly_gap = poly_gap.max((log_term - m.log_term).abs());
                match log_abs_l(EvalPoint::new(0.5, t), &chi) {
                    Ok(LogAbs::Finite(l)) => {
                        worst = worst.max(l - m.total);
                        cases += 1;
                    }
                    _ => skipped += 1,
                }
            }
        }
    }
    Outcome {
        passed: worst <= MAJORANT_C1 && poly_gap < 1e-12,
        detail: format!(
            "max excess {worst:.4} <= C1 = {MAJORANT_C1} in {cases}/{cases} cases ({skipped} near-zero skipped); oracle gap {poly_gap:.1e}"
        ),
        digest: format!("{} {}", bits(worst), bits(poly_gap)),
    }
}

#[test]
fn criterion_06_majorant_slack() {
    report(6, Duration::from_secs(60), majorant_slack);
}

// 7

/// Counts by exhaustive enumeration over exponent vectors.
fn oracle_counts(multiset: &[u64]) -> (u128, u128) {
    let distinct: Vec<u64> = {
        let mut d = multiset.to_vec();
        d.sort();
        d.dedup();
        d
    };
    let alpha: Vec<i32> = distinct.iter().map(|p| multiset.iter().filter(|x| *x == p).count() as i32).collect();
    let r = distinct.len();
    let m = multiset.len();
    let mut pairs = 0u128;
    for code in 0..r.pow(m as u32) {
        let mut c = code;
        let mut e = vec![0; r];
        for _ in 0..m {
            e[c % r] += 1;
            c /= r;
        }
        pairs += (e == alpha) as u128;
    }
    let mut signed = 0u128;
    for code in 0..r.pow(2 * m as u32) {
        let mut c = code;
        let mut picks = Vec::with_capacity(2 * m);
        for _ in 0..2 * m {
            picks.push(c % r);
            c /= r;
        }
        let mut e = vec![0; r];
        picks.iter().for_each(|&k| e[k] += 1);
        if e.iter().zip(&alpha).any(|(a, b)| *a != 2 * b) {
            continue;
        }
        for signs in 0u32..(1 << (2 * m)) {
            let mut net = vec![0i32; r];
            for (pos, &k) in picks.iter().enumerate() {
                net[k] += if signs >> pos & 1 == 1 { 1 } else { -1 };
            }
            signed += net.iter().all(|&s| s == 0) as u128;
        }
    }
    (pairs, signed)
}

fn fact(n: u128) -> u128 {
    (1..=n).product()
}

fn counting_identity() -> Outcome {
    let mut mismatches = Vec::new();
    let mut total = 0u128;
    let mut n = 0;
    for m in 1..=4 {
        for multiset in dml::verify::multisets(&[2, 3, 5], m) {
            let lib = count_signed_factorizations(&multiset).expect("valid multiset");
            let (pairs, signed) = oracle_counts(&multiset);
            let mut distinct = multiset.clone();
            distinct.dedup();
            let alpha: Vec<u128> = distinct.iter().map(|p| multiset.iter().filter(|x| *x == p).count() as u128).collect();
            let closed_pairs = fact(m as u128) / alpha.iter().map(|&a| fact(a)).product::<u128>();
            let closed_signed = fact(2 * m as u128) / alpha.iter().map(|&a| fact(2 * a)).product::<u128>()
                * alpha.iter().map(|&a| fact(2 * a) / (fact(a) * fact(a))).product::<u128>();
            let ok = lib.brute_count_pairs == pairs
                && lib.brute_count_signed == signed
                && pairs == closed_pairs
                && signed == closed_signed
                && lib.formula_pairs == closed_pairs
                && lib.formula_signed == closed_signed;
            if !ok {
                mismatches.push(multiset);
            }
            total += signed;
            n += 1;
        }
    }
    Outcome {
        passed: mismatches.is_empty(),
        detail: format!("{n} multisets, mismatches {mismatches:?}"),
        digest: total.to_string(),
    }
}

#[test]
fn criterion_07_counting_identity() {
    report(7, Duration::from_secs(5), counting_identity);
}

// 8

fn polya_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut direct_gap: f64 = 0.0;
    let mut at = 0;
    for q in 3..=500u64 {
        let y = (q as f64).sqrt();
        for chi in primitive_characters(q, None) {
            let e = polya_expansion(&chi, y, None).expect("primitive");
            let direct: Complex64 = (1..=(q as f64 / y).floor() as i64).map(|n| chi.eval(n)).sum();
            direct_gap = direct_gap.max((direct - e.direct).norm());
            let r = (direct - e.approx).norm() / (q as f64).ln();
            if r > worst {
                worst = r;
                at = q;
            }
        }
    }
    Outcome {
        passed: worst <= POLYA_C2 && direct_gap < 1e-9,
        detail: format!("max residual / log q {worst:.4} at q = {at} <= C2 = {POLYA_C2}"),
        digest: bits(worst),
    }
}

#[test]
fn criterion_08_polya_residual() {
    report(8, Duration::from_secs(60), polya_residual);
}

// 9

fn perron_identity() -> Outcome {
    let mut worst = (0.0f64, 0u64, 0.0f64);
    let mut digest = String::new();
    for q in PERRON_GRID_Q {
        let chars = primitive_characters(q, None);
        let mut requests = Vec::new();
        for chi in &chars {
            for y in PERRON_GRID_Y {
                requests.push((chi.clone(), SmoothWeight::new(y, PERRON_C).unwrap()));
            }
        }
        let out = perron_weighted_batch(chars[0].modulus(), &requests, PERRON_LINE, PERRON_T_MAX).unwrap();
        for ((chi, w), p) in requests.iter().zip(out) {
            // f(n) evaluated from its definition
            let direct: Complex64 = (1..=w.y.floor() as i64)
                .map(|n| {
                    let x = n as f64;
                    let f = if x <= w.y - w.t { 1.0 } else { (w.y - x) / w.t };
                    chi.eval(n) * f
                })
                .sum();
            let d = (p.value - direct).norm();
            digest.push_str(&bits(d));
            if d > worst.0 {
                worst = (d, q, w.y);
            }
        }
    }
    Outcome {
        passed: worst.0 < PERRON_TOL,
        detail: format!(
            "max |perron - weighted sum| {:.3e} at q = {}, y = {} (t_max = {PERRON_T_MAX}, target {PERRON_TOL:.0e})",
            worst.0, worst.1, worst.2
        ),
        digest,
    }
}

#[test]
fn criterion_09_perron_identity() {
    report(9, Duration::from_secs(60), perron_identity);
}

// 10

fn ratio_bands() -> Outcome {
    let primes: Vec<u64> = (100..=3000u64).filter(|&q| oracle_is_prime(q)).collect();
    let theta = moment_ratio_scan(&primes, &Predictor::Theta { k: 3.0, parity: Parity::Even, eps: 1e-12 }).unwrap();
    let sums = moment_ratio_scan(&primes, &Predictor::CharSum { k: 3.0, y: YMode::Sqrt }).unwrap();

    // spot checks of the empirical side against brute force
    let mut spot: f64 = 0.0;
    for (i, &q) in primes.iter().enumerate().step_by(97) {
        let chars = primitive_characters(q, Some(Parity::Even));
        let s6: f64 = chars
            .iter()
            .map(|chi| {
                let th: Complex64 = (1..=(q as i64).min(400)).map(|n| chi.eval(n) * (-PI * (n * n) as f64 / q as f64).exp()).sum();
                th.norm().powi(6)
            })
            .sum();
        spot = spot.max((s6 - theta[i].empirical).abs() / s6);
        let y = (q as f64).sqrt();
        let c3: f64 = primitive_characters(q, None)
            .iter()
            .map(|chi| (1..=y.floor() as i64).map(|n| chi.eval(n)).sum::<Complex64>().norm().powi(6))
            .sum();
        spot = spot.max((c3 - sums[i].empirical).abs() / c3);
    }

    let range = |r: &[dml::moments::MomentReport]| {
        let lo = r.iter().map(|x| x.ratio).fold(f64::MAX, f64::min);
        let hi = r.iter().map(|x| x.ratio).fold(f64::MIN, f64::max);
        (lo, hi)
    };
    let (tl, th) = range(&theta);
    let (sl, sh) = range(&sums);
    let inside = |(lo, hi): (f64, f64), band: (f64, f64)| lo >= band.0 && hi <= band.1 && band.1 / band.0 <= MAX_BAND_SPREAD;
    Outcome {
        passed: inside((tl, th), THETA_RATIO_BAND) && inside((sl, sh), CHAR_SUM_RATIO_BAND) && spot < 1e-9,
        detail: format!(
            "{} primes; theta ratios [{tl:.4e}, {th:.4e}] spread {:.3}; char-sum ratios [{sl:.4e}, {sh:.4e}] spread {:.3}",
            primes.len(),
            th / tl,
            sh / sl
        ),
        digest: theta.iter().chain(&sums).map(|r| bits(r.empirical)).collect(),
    }
}

#[test]
fn criterion_10_ratio_bands() {
    report(10, Duration::from_secs(600), ratio_bands);
}

// 11

fn determinism() -> Outcome {
    let suites: [(u32, fn() -> Outcome); 10] = [
        (1, character_axioms),
        (2, gauss_sums),
        (3, functional_equation),
        (4, theta_mellin_identity),
        (5, mertens),
        (6, majorant_slack),
        (7, counting_identity),
        (8, polya_residual),
        (9, perron_identity),
        (10, ratio_bands),
    ];
    let mut differing = Vec::new();
    for (n, run) in suites {
        let digests: Vec<(String, String)> = [1usize, 4, 8]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| {
                    let o = run();
                    (o.digest, o.detail)
                })
            })
            .collect();
        if digests.iter().any(|d| *d != digests[0]) {
            differing.push(n);
        }
    }
    Outcome {
        passed: differing.is_empty(),
        detail: format!("criteria 1-10 under 1, 4 and 8 threads; differing {differing:?}"),
        digest: String::new(),
    }
}

#[test]
fn criterion_11_determinism() {
    report(11, Duration::from_secs(900), determinism);
}
