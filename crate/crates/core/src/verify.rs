//! Invariant suites, one per module, run by `dml verify`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{is_prime, totient};
use crate::bounds::{correlation_g, count_signed_factorizations, mertens_cos_sum, sound_majorant, ShiftConfig};
use crate::characters::{enumerate_characters, primitive_characters, primitive_count_formula, Modulus, Parity};
use crate::constants::*;
use crate::error::{invalid, Result};
use crate::export::{Format, Table};
use crate::sieve::SIEVE_CAP;
use crate::lfunc::{functional_equation_residual, l_value, log_abs_l, zeta_value, EvalPoint, LogAbs};
use crate::moments::{moment_ratio_scan, shifted_moment, Predictor, YMode};
use crate::sums::{
    char_sum, perron_weighted_batch, polya_expansion, ramp_defect, ramp_integer_count, weighted_char_sum,
    SmoothWeight,
};
use crate::theta::{theta_direct, theta_mellin_batch};

pub const MODULES: [&str; 7] = ["characters", "lfunc", "theta", "bounds", "sums", "moments", "cli"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: f64,
}

fn check(module: &'static str, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { module, name, passed, detail, runtime_ms: start.elapsed().as_secs_f64() * 1e3 }
}

pub const DEFAULT_MERTENS_X: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// range of the prime cosine sums
    pub mertens_x: f64,
}

impl Options {
    pub fn new(mertens_x: f64) -> Result<Self> {
        if !(mertens_x >= 10.0 && mertens_x <= SIEVE_CAP as f64) {
            return Err(invalid("x", format!("x = {mertens_x} must lie in [10, {SIEVE_CAP}]")));
        }
        Ok(Options { mertens_x })
    }
}

impl Default for Options {
    fn default() -> Self {
        Options { mertens_x: DEFAULT_MERTENS_X }
    }
}

/// Runs one module's suite, or all of them for `"all"`.
pub fn run(module: &str) -> Option<Vec<Check>> {
    run_with(module, &Options::default())
}

pub fn run_with(module: &str, opts: &Options) -> Option<Vec<Check>> {
    let suite: fn(&Options) -> Vec<Check> = match module {
        "all" => return Some(MODULES.iter().flat_map(|m| run_with(m, opts).unwrap()).collect()),
        "characters" => characters_suite,
        "lfunc" => lfunc_suite,
        "theta" => theta_suite,
        "bounds" => bounds_suite,
        "sums" => sums_suite,
        "moments" => moments_suite,
        "cli" => export_suite,
        _ => return None,
    };
    Some(suite(opts))
}

fn characters_suite(_: &Options) -> Vec<Check> {
    vec![
        check("characters", "orthogonality q<=60", || {
            let mut worst: f64 = 0.0;
            for q in 1..=60u64 {
                let chars = enumerate_characters(q);
                let phi = totient(q) as f64;
                for n in 1..=q as i64 {
                    let s: Complex64 = chars.iter().map(|c| c.eval(n)).sum();
                    let want = if n == 1 || (q == 1) { phi } else { 0.0 };
                    worst = worst.max((s - want).norm());
                }
            }
            Ok((worst < 1e-10, format!("max deviation {worst:.3e}")))
        }),
        check("characters", "primitive counts q<=300", || {
            let bad: Vec<u64> = (1..=300u64)
                .filter(|&q| primitive_characters(q, None).len() as i64 != primitive_count_formula(q))
                .collect();
            Ok((bad.is_empty(), format!("mismatches {bad:?}")))
        }),
        check("characters", "gauss sum modulus q<=200", || {
            let mut worst: f64 = 0.0;
            for q in 3..=200u64 {
                for chi in primitive_characters(q, None) {
                    worst = worst.max((chi.gauss_sum().norm() - (q as f64).sqrt()).abs());
                }
            }
            Ok((worst < 1e-9, format!("max deviation {worst:.3e}")))
        }),
        check("characters", "generator orders q<=300", || {
            let bad: Vec<u64> =
                (1..=300u64).filter(|&q| !crate::characters::generators_have_stated_orders(&Modulus::new(q))).collect();
            Ok((bad.is_empty(), format!("failures {bad:?}")))
        }),
    ]
}

fn lfunc_suite(_: &Options) -> Vec<Check> {
    vec![
        check("lfunc", "zeta(2)", || {
            let d = (zeta_value(EvalPoint::new(2.0, 0.0))? - PI * PI / 6.0).norm();
            Ok((d < 1e-12, format!("deviation {d:.3e}")))
        }),
        check("lfunc", "L(1, chi_4) = pi/4", || {
            let chi = primitive_characters(4, None).remove(0);
            let d = (l_value(EvalPoint::new(1.0, 0.0), &chi)? - PI / 4.0).norm();
            Ok((d < 1e-12, format!("deviation {d:.3e}")))
        }),
        check("lfunc", "functional equation", || {
            let mut worst: f64 = 0.0;
            for q in [3u64, 4, 5, 7, 8, 11, 12, 13] {
                for chi in primitive_characters(q, None) {
                    for t in [0.0, 0.5, 1.0, 2.7] {
                        worst = worst.max(functional_equation_residual(EvalPoint::new(0.5, t), &chi)?);
                    }
                }
            }
            Ok((worst < 1e-8, format!("max residual {worst:.3e}")))
        }),
    ]
}

fn theta_suite(_: &Options) -> Vec<Check> {
    vec![
        check("theta", "mellin vs direct q<=50", || {
            let mut worst: f64 = 0.0;
            for q in 3..=50u64 {
                let chars = primitive_characters(q, Some(Parity::Even));
                if chars.is_empty() {
                    continue;
                }
                let mellin = theta_mellin_batch(chars[0].modulus(), &chars, 1.0, 200.0)?;
                for (chi, m) in chars.iter().zip(mellin) {
                    let d = theta_direct(chi, 1e-14)?.value;
                    worst = worst.max((m.value - d).norm() / d.norm().max(1e-300));
                }
            }
            Ok((worst < 1e-6, format!("max relative difference {worst:.3e}")))
        }),
        check("theta", "tail certification", || {
            let mut worst: f64 = 0.0;
            for chi in primitive_characters(97, None) {
                let a = theta_direct(&chi, 1e-8)?.value;
                let b = theta_direct(&chi, 1e-10)?.value;
                worst = worst.max((a - b).norm());
            }
            Ok((worst < 1e-8, format!("max change {worst:.3e}")))
        }),
        check("theta", "conjugation", || {
            let mut worst: f64 = 0.0;
            for chi in primitive_characters(41, None) {
                let a = theta_direct(&chi, 1e-12)?.value;
                let b = theta_direct(&chi.conjugate(), 1e-12)?.value;
                worst = worst.max((a.conj() - b).norm());
            }
            Ok((worst < 1e-12, format!("max deviation {worst:.3e}")))
        }),
    ]
}

fn bounds_suite(opts: &Options) -> Vec<Check> {
    vec![
        check("bounds", "mertens cosine sums", || {
            let x = opts.mertens_x;
            let mut worst: f64 = 0.0;
            for alpha in [0.01, 0.1, 1.0, 5.0, 20.0, 100.0] {
                let s = mertens_cos_sum(x, alpha)?;
                let z = zeta_value(EvalPoint::new(1.0 + 1.0 / x.ln(), alpha))?.norm().ln();
                worst = worst.max((s - z).abs());
            }
            Ok((worst <= MERTENS_C0, format!("max gap {worst:.6} (C0 = {MERTENS_C0})")))
        }),
        check("bounds", "majorant slack", || {
            let mut worst = f64::MIN;
            for q in (3..=101u64).filter(|&q| is_prime(q)) {
                for chi in primitive_characters(q, None) {
                    for t in [0.0, 1.0] {
                        let m = sound_majorant(&chi, t, q as f64, None)?;
                        if let LogAbs::Finite(l) = log_abs_l(EvalPoint::new(0.5, t), &chi)? {
                            worst = worst.max(l - m.total);
                        }
                    }
                }
            }
            Ok((worst <= MAJORANT_C1, format!("max excess {worst:.6} (C1 = {MAJORANT_C1})")))
        }),
        check("bounds", "factorization counts", || {
            let mut bad = Vec::new();
            for m in 1..=4usize {
                for multiset in multisets(&[2, 3, 5], m) {
                    let c = count_signed_factorizations(&multiset)?;
                    if c.brute_count_pairs != c.formula_pairs || c.brute_count_signed != c.formula_signed {
                        bad.push(multiset);
                    }
                }
            }
            Ok((bad.is_empty(), format!("mismatches {bad:?}")))
        }),
        check("bounds", "correlation g cases", || {
            let q = 1e6f64;
            let ok = correlation_g(0.0, q) == q.ln() && correlation_g(2.0, q) == 0.5 && correlation_g(100.0, q) == 100f64.ln().ln();
            Ok((ok, String::new()))
        }),
    ]
}

/// Nondecreasing tuples of length `m` drawn from `primes`.
pub fn multisets(primes: &[u64], m: usize) -> Vec<Vec<u64>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for mut rest in multisets(&primes[i..], m - 1) {
            rest.insert(0, p);
            out.push(rest);
        }
    }
    out
}

/// The Perron grid: moduli, cutoffs, `C`, `c` and `t_max`.
pub const PERRON_GRID_Q: [u64; 10] = [3, 4, 5, 7, 8, 11, 12, 13, 24, 47];
pub const PERRON_GRID_Y: [f64; 4] = [10.0, 20.0, 37.5, 50.0];
pub const PERRON_C: f64 = 2.0;
pub const PERRON_LINE: f64 = 1.5;
pub const PERRON_T_MAX: f64 = 500.0;
pub const PERRON_TOL: f64 = 1e-4;

/// Largest |perron − weighted sum| over the grid, with its location.
pub fn perron_grid_worst() -> Result<(f64, u64, f64)> {
    let mut worst = (0.0, 0, 0.0);
    for q in PERRON_GRID_Q {
        let chars = primitive_characters(q, None);
        let mut requests = Vec::new();
        for chi in &chars {
            for y in PERRON_GRID_Y {
                requests.push((chi.clone(), SmoothWeight::new(y, PERRON_C)?));
            }
        }
        let out = perron_weighted_batch(chars[0].modulus(), &requests, PERRON_LINE, PERRON_T_MAX)?;
        for ((chi, w), p) in requests.iter().zip(out) {
            let d = (p.value - weighted_char_sum(chi, w)).norm();
            if d > worst.0 {
                worst = (d, q, w.y);
            }
        }
    }
    Ok(worst)
}

fn sums_suite(_: &Options) -> Vec<Check> {
    vec![
        check("sums", "polya residual q<=500", || {
            let mut worst: f64 = 0.0;
            for q in 3..=500u64 {
                for chi in primitive_characters(q, None) {
                    let e = polya_expansion(&chi, (q as f64).sqrt(), None)?;
                    worst = worst.max(e.residual / (q as f64).ln());
                }
            }
            Ok((worst <= POLYA_C2, format!("max residual/log q {worst:.6} (C2 = {POLYA_C2})")))
        }),
        check("sums", "perron consistency", || {
            let (d, q, y) = perron_grid_worst()?;
            Ok((d < PERRON_TOL, format!("max gap {d:.3e} at q = {q}, y = {y} (t_max = {PERRON_T_MAX})")))
        }),
        check("sums", "perron tail decay", || {
            let chi = primitive_characters(7, None).remove(0);
            let w = SmoothWeight::new(20.0, PERRON_C)?;
            let target = weighted_char_sum(&chi, &w);
            let mut gaps = Vec::new();
            for t in [250.0, 500.0, 1000.0] {
                let p = perron_weighted_batch(chi.modulus(), &[(chi.clone(), w)], PERRON_LINE, t)?;
                gaps.push((p[0].value - target).norm());
            }
            let ok = gaps[1] <= 0.55 * gaps[0] && gaps[2] <= 0.55 * gaps[1];
            Ok((ok, format!("gaps {:.3e} {:.3e} {:.3e}", gaps[0], gaps[1], gaps[2])))
        }),
        check("sums", "ramp counting bound", || {
            let mut ok = true;
            for chi in primitive_characters(13, None) {
                for y in [7.3, 20.0, 41.7] {
                    let w = SmoothWeight::new(y, 1.0)?;
                    ok &= ramp_defect(&chi, &w).norm() <= ramp_integer_count(&w) as f64 + 1e-12;
                }
            }
            Ok((ok, String::new()))
        }),
        check("sums", "character sum periodicity", || {
            let mut worst: f64 = 0.0;
            for chi in primitive_characters(17, None) {
                let full: Complex64 = (1..=17).map(|n| chi.eval(n)).sum();
                worst = worst.max(full.norm()).max((char_sum(&chi, 40.0)? - char_sum(&chi, 6.0)?).norm());
            }
            Ok((worst < 1e-12, format!("max deviation {worst:.3e}")))
        }),
    ]
}

fn moments_suite(_: &Options) -> Vec<Check> {
    vec![
        check("moments", "permutation and reflection", || {
            let cfg = ShiftConfig::with_shifts(vec![1.0, 0.5, 2.0], vec![0.0, 0.3, -4.1])?;
            let mut worst: f64 = 0.0;
            for q in [7u64, 12, 31] {
                let base = shifted_moment(q, &cfg, 0.0)?.moment;
                let p = shifted_moment(q, &cfg.permuted(&[2, 0, 1]), 0.0)?.moment;
                let n = shifted_moment(q, &cfg.negated(), 0.0)?.moment;
                worst = worst.max((base - p).abs() / base).max((base - n).abs() / base);
            }
            Ok((worst < 1e-10, format!("max relative deviation {worst:.3e}")))
        }),
        check("moments", "offset 1.5 termwise bound", || {
            let zeta_3_2 = zeta_value(EvalPoint::new(1.5, 0.0))?.re;
            let cfg = ShiftConfig::with_shifts(vec![2.0], vec![0.0])?;
            let mut ok = true;
            for q in [5u64, 11, 24, 97, 101] {
                ok &= shifted_moment(q, &cfg, 1.5)?.moment <= totient(q) as f64 * zeta_3_2 * zeta_3_2;
            }
            Ok((ok, String::new()))
        }),
        check("moments", "ratio bands inside frozen range", || {
            let primes: Vec<u64> = (100..=3000u64).filter(|&q| is_prime(q)).step_by(10).collect();
            let theta = moment_ratio_scan(&primes, &Predictor::Theta { k: 3.0, parity: Parity::Even, eps: 1e-12 })?;
            let sums = moment_ratio_scan(&primes, &Predictor::CharSum { k: 3.0, y: YMode::Sqrt })?;
            let inside = |r: f64, band: (f64, f64)| r >= band.0 && r <= band.1;
            let ok = theta.iter().all(|r| inside(r.ratio, THETA_RATIO_BAND))
                && sums.iter().all(|r| inside(r.ratio, CHAR_SUM_RATIO_BAND));
            Ok((ok, format!("{} moduli sampled", primes.len())))
        }),
    ]
}

fn export_suite(_: &Options) -> Vec<Check> {
    vec![check("cli", "export round trip", || {
        let mut t = Table::new(["q", "value"]);
        t.push(vec![5u64.into(), (1.0f64 / 3.0).into()]);
        let csv = t.render(Format::Csv)?;
        let json = t.render(Format::Json)?;
        let ok = csv == "q,value\r\n5,0.333333333333333\r\n" && json.contains("\"value\":0.333333333333333");
        Ok((ok, String::new()))
    })]
}
