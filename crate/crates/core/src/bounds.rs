//! Conditional upper-bound machinery for shifted L-moments.
//!
//! The functions here evaluate the explicit objects of the argument: the
//! shift polynomial `h(n)`, the correlation functions `g` and `g*`, the
//! prime-power majorant of `log |L|`, the β-ladder with its segment sums
//! `G_{(i,j)}(χ)` and the resulting classification of characters, the
//! predicted size `B`, and the factorisation counts behind the moment
//! expansion. No unknown `O(1)` constant is ever added to anything here.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::DirichletCharacter;
use crate::error::{invalid, Result};
use crate::reduce::pairwise_sum;
use crate::sieve::PrimeSieve;

/// The data `(a_1..a_{2k}; t_1..t_{2k}; A)` of a shifted moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftConfig {
    exponents: Vec<f64>,
    shifts: Vec<f64>,
    big_a: f64,
}

impl ShiftConfig {
    pub fn new(exponents: Vec<f64>, shifts: Vec<f64>, big_a: f64) -> Result<Self> {
        if exponents.is_empty() {
            return Err(invalid("a", "at least one exponent is required"));
        }
        if exponents.len() != shifts.len() {
            return Err(invalid(
                "t",
                format!("{} shifts given for {} exponents", shifts.len(), exponents.len()),
            ));
        }
        if let Some(bad) = exponents.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
            return Err(invalid("a", format!("exponent {bad} is not a positive real")));
        }
        if shifts.iter().any(|t| !t.is_finite()) {
            return Err(invalid("t", "shifts must be finite"));
        }
        if !(big_a > 0.0) {
            return Err(invalid("A", "must be positive"));
        }
        Ok(ShiftConfig { exponents, shifts, big_a })
    }

    /// `A = 1` convenience constructor.
    pub fn with_shifts(exponents: Vec<f64>, shifts: Vec<f64>) -> Result<Self> {
        Self::new(exponents, shifts, 1.0)
    }

    pub fn two_k(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn big_a(&self) -> f64 {
        self.big_a
    }

    /// `a = a_1 + … + a_{2k} + 10`.
    pub fn a_total(&self) -> f64 {
        self.exponents.iter().sum::<f64>() + 10.0
    }

    pub fn sum_a_squared(&self) -> f64 {
        self.exponents.iter().map(|a| a * a).sum()
    }

    /// Checks `|t_j| ≤ q^A`.
    pub fn check_shift_range(&self, q: u64) -> Result<()> {
        let cap = (q as f64).powf(self.big_a);
        match self.shifts.iter().find(|t| t.abs() > cap) {
            Some(t) => Err(invalid("t", format!("|t| = {} exceeds q^A = {cap}", t.abs()))),
            None => Ok(()),
        }
    }

    /// Same pairs with every shift negated.
    pub fn negated(&self) -> ShiftConfig {
        ShiftConfig { shifts: self.shifts.iter().map(|t| -t).collect(), ..self.clone() }
    }

    /// The `(a_j, t_j)` pairs reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> ShiftConfig {
        ShiftConfig {
            exponents: perm.iter().map(|&i| self.exponents[i]).collect(),
            shifts: perm.iter().map(|&i| self.shifts[i]).collect(),
            big_a: self.big_a,
        }
    }
}

/// h(n) = ½ Σ_j a_j n^{−i t_j}.
pub fn h_value(cfg: &ShiftConfig, n: u64) -> Complex64 {
    let ln = (n as f64).ln();
    cfg.exponents
        .iter()
        .zip(&cfg.shifts)
        .map(|(&a, &t)| Complex64::from_polar(a, -t * ln))
        .sum::<Complex64>()
        * 0.5
}

fn three_case(x: f64, log_scale: f64, scale: f64) -> f64 {
    // cases are tried in the listed order; the first match wins at the
    // overlapping endpoints
    if x <= 1.0 / log_scale || x >= scale.exp() {
        log_scale
    } else if x <= 10.0 {
        1.0 / x
    } else {
        x.ln().ln()
    }
}

/// g(x): log q below 1/log q or beyond e^q, 1/x up to 10, log log x above.
pub fn correlation_g(x: f64, q: f64) -> f64 {
    three_case(x, q.ln(), q)
}

/// g*(x): as [`correlation_g`] with `y` in place of `q`.
pub fn correlation_g_star(x: f64, y: f64) -> f64 {
    three_case(x, y.ln(), y)
}

/// Σ_{p ≤ x} cos(α log p) / p.
pub fn mertens_cos_sum(x: f64, alpha: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(invalid("x", format!("x = {x} must be at least 2")));
    }
    let sieve = PrimeSieve::shared(x.floor() as u64)?;
    let terms: Vec<f64> = sieve
        .primes_up_to(x.floor() as u64)
        .iter()
        .map(|&p| {
            let p = p as f64;
            (alpha * p.ln()).cos() / p
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// The majorant split into its Dirichlet-polynomial part and the
/// `(log q + log⁺ t) / log x` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Majorant {
    pub dirichlet_poly: f64,
    pub log_term: f64,
    pub total: f64,
}

fn log_plus(t: f64) -> f64 {
    t.abs().ln().max(0.0)
}

/// Re Σ_{n ≤ x} Λ(n) χ(n) / (n^{σ₀+it} log n) · log(x/n)/log x + (log q + log⁺ t)/log x
/// with σ₀ = ½ + 1/log x, or ½ + max(1/log y, 1/log x) when `y` is given.
pub fn sound_majorant(chi: &DirichletCharacter, t: f64, x: f64, y: Option<f64>) -> Result<Majorant> {
    let q = chi.q();
    if !(x >= 2.0) || x > q as f64 {
        return Err(invalid("x", format!("x = {x} must satisfy 2 ≤ x ≤ q = {q}")));
    }
    if let Some(y) = y {
        if !(y >= 2.0) {
            return Err(invalid("y", format!("y = {y} must be at least 2")));
        }
    }
    let lx = x.ln();
    let sigma0 = 0.5 + y.map_or(1.0 / lx, |y| (1.0 / y.ln()).max(1.0 / lx));
    let sieve = PrimeSieve::shared(x.floor() as u64)?;
    let mut terms = Vec::new();
    for &p in sieve.primes_up_to(x.floor() as u64) {
        let p = p as u64;
        let mut pk = p;
        let mut k = 1u32;
        while pk as f64 <= x {
            let chi_val = chi.eval(pk as i64);
            if chi_val.norm() > 0.0 {
                let ln_n = (pk as f64).ln();
                let n_pow = Complex64::new(-sigma0 * ln_n, -t * ln_n).exp();
                let w = (lx - ln_n) / lx;
                terms.push((chi_val * n_pow).re * w / k as f64);
            }
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
            k += 1;
        }
    }
    let dirichlet_poly = pairwise_sum(&terms);
    let log_term = ((q as f64).ln() + log_plus(t)) / lx;
    Ok(Majorant { dirichlet_poly, log_term, total: dirichlet_poly + log_term })
}

/// The three pieces of the multi-shift majorant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimeSquareSplit {
    pub linear_term: f64,
    pub square_term: f64,
    pub error_term: f64,
}

impl PrimeSquareSplit {
    pub fn total(&self) -> f64 {
        self.linear_term + self.square_term + self.error_term
    }
}

/// 2 Re Σ_{p≤x} h(p)χ(p)/p^{½+1/log x} · log(x/p)/log x,
/// Re Σ_{p≤√x} h(p²)χ(p²)/p and (A+1) a log q / log x.
pub fn prime_square_split(chi: &DirichletCharacter, cfg: &ShiftConfig, x: f64) -> Result<PrimeSquareSplit> {
    let q = chi.q();
    if !(x >= 2.0) || x > q as f64 {
        return Err(invalid("x", format!("x = {x} must satisfy 2 ≤ x ≤ q = {q}")));
    }
    let lx = x.ln();
    let sieve = PrimeSieve::shared(x.floor() as u64)?;
    let primes = sieve.primes_up_to(x.floor() as u64);
    let linear: Vec<f64> = primes
        .iter()
        .map(|&p| {
            let pf = p as f64;
            let w = (lx - pf.ln()) / lx;
            (h_value(cfg, p as u64) * chi.eval(p as i64)).re * pf.powf(-0.5 - 1.0 / lx) * w
        })
        .collect();
    let square: Vec<f64> = primes
        .iter()
        .take_while(|&&p| (p as f64) * (p as f64) <= x)
        .map(|&p| {
            let p2 = p as u64 * p as u64;
            (h_value(cfg, p2) * chi.eval(p2 as i64)).re / p as f64
        })
        .collect();
    Ok(PrimeSquareSplit {
        linear_term: 2.0 * pairwise_sum(&linear),
        square_term: pairwise_sum(&square),
        error_term: (cfg.big_a + 1.0) * cfg.a_total() * (q as f64).ln() / lx,
    })
}

/// How the ladder's cap index is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LadderMode {
    /// β_i = 20^{i−1}/(log log q)², cap e^{−10000 a² (A+1)}.
    Exact,
    /// β_i = 20^{i−2} τ, cap τ: two levels at or below the cap, so the
    /// top range `q^{β_𝓘} = q^{20τ}` stays within reach of the sieve.
    Demo { threshold: f64 },
}

pub const DEFAULT_DEMO_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicLadder {
    pub q: u64,
    pub mode: LadderMode,
    /// β_0, β_1, …, β_𝓘.
    pub betas: Vec<f64>,
    /// 𝓘.
    pub cap_index: usize,
    /// No β_i with i ≥ 1 lies under the cap.
    pub degenerate: bool,
}

impl DyadicLadder {
    pub fn beta(&self, i: usize) -> f64 {
        self.betas[i]
    }

    /// β_i^{−3/4}
    pub fn threshold(&self, i: usize) -> f64 {
        self.betas[i].powf(-0.75)
    }
}

pub fn dyadic_ladder(q: u64, cfg: &ShiftConfig, mode: LadderMode) -> Result<DyadicLadder> {
    let lq = (q as f64).ln();
    let (base, cap) = match mode {
        LadderMode::Exact => {
            let llq = lq.ln();
            if !(llq > 1.0) {
                return Err(invalid("q", format!("log log q must exceed 1 (q = {q})")));
            }
            let a = cfg.a_total();
            (1.0 / (llq * llq), (-10000.0 * a * a * (cfg.big_a + 1.0)).exp())
        }
        LadderMode::Demo { threshold } => {
            if !(threshold > 0.0) {
                return Err(invalid("threshold", "must be positive"));
            }
            if q < 3 {
                return Err(invalid("q", "must be at least 3"));
            }
            (threshold / 20.0, threshold)
        }
    };
    let beta = |i: usize| if i == 0 { 0.0 } else { base * 20f64.powi(i as i32 - 1) };
    let mut top = 0usize;
    while beta(top + 1) <= cap {
        top += 1;
    }
    let cap_index = top + 1;
    Ok(DyadicLadder {
        q,
        mode,
        betas: (0..=cap_index).map(beta).collect(),
        cap_index,
        degenerate: top == 0,
    })
}

/// G_{(i,j)}(χ) = Σ_{q^{β_{i−1}} < p ≤ q^{β_i}} χ(p)h(p)/p^{½+1/(β_j log q)} · log(q^{β_j}/p)/log(q^{β_j}).
pub fn segment_g(
    chi: &DirichletCharacter,
    i: usize,
    j: usize,
    ladder: &DyadicLadder,
    cfg: &ShiftConfig,
) -> Result<Complex64> {
    if !(1 <= i && i <= j && j <= ladder.cap_index) {
        return Err(invalid("i", format!("need 1 ≤ i ≤ j ≤ {}, got i = {i}, j = {j}", ladder.cap_index)));
    }
    let lq = (ladder.q as f64).ln();
    let lo = (ladder.beta(i - 1) * lq).exp();
    let hi = (ladder.beta(i) * lq).exp();
    if hi < 2.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sieve = PrimeSieve::shared(hi.floor() as u64)?;
    let log_x = ladder.beta(j) * lq;
    let sigma = 0.5 + 1.0 / log_x;
    let terms: Vec<Complex64> = sieve
        .primes_between(lo, hi)
        .iter()
        .map(|&p| {
            let pf = p as f64;
            let w = (log_x - pf.ln()) / log_x;
            chi.eval(p as i64) * h_value(cfg, p as u64) * pf.powf(-sigma) * w
        })
        .collect();
    Ok(crate::reduce::pairwise_sum_complex(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ClassLabel {
    /// The well-behaved set 𝒯.
    T,
    /// 𝒮(j); `witness` is the smallest l with |Re G_{(j+1,l)}| > β_{j+1}^{−3/4}.
    S { j: usize, witness: usize },
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassLabel::T => f.write_str("T"),
            ClassLabel::S { j, .. } => write!(f, "S({j})"),
        }
    }
}

/// All segment values `G_{(i,l)}` for `1 ≤ i ≤ l ≤ 𝓘`, row `i−1`, column `l−i`.
pub fn segment_table(chi: &DirichletCharacter, ladder: &DyadicLadder, cfg: &ShiftConfig) -> Result<Vec<Vec<Complex64>>> {
    (1..=ladder.cap_index)
        .map(|i| (i..=ladder.cap_index).map(|l| segment_g(chi, i, l, ladder, cfg)).collect())
        .collect()
}

/// Labels χ as 𝒯 when every `|Re G_{(i,𝓘)}|` is within its threshold;
/// otherwise as 𝒮(i*−1), i* the smallest level with a violation at any l.
pub fn classify_character(chi: &DirichletCharacter, ladder: &DyadicLadder, cfg: &ShiftConfig) -> Result<ClassLabel> {
    let table = segment_table(chi, ladder, cfg)?;
    Ok(classify_from_table(&table, ladder))
}

pub fn classify_from_table(table: &[Vec<Complex64>], ladder: &DyadicLadder) -> ClassLabel {
    let top = ladder.cap_index;
    let in_t = (1..=top).all(|i| table[i - 1][top - i].re.abs() <= ladder.threshold(i));
    if in_t {
        return ClassLabel::T;
    }
    for i in 1..=top {
        if let Some(l) = (i..=top).find(|&l| table[i - 1][l - i].re.abs() > ladder.threshold(i)) {
            return ClassLabel::S { j: i - 1, witness: l };
        }
    }
    unreachable!("a character outside 𝒯 violates some level")
}

/// B = φ(q) (log q)^{Σa²/4} Π_{i<j} g(|t_i − t_j|)^{a_i a_j / 2}.
pub fn predicted_bound_b(q: u64, phi: u64, cfg: &ShiftConfig) -> f64 {
    let qf = q as f64;
    let mut b = phi as f64 * qf.ln().powf(cfg.sum_a_squared() / 4.0);
    let (a, t) = (cfg.exponents(), cfg.shifts());
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            b *= correlation_g((t[i] - t[j]).abs(), qf).powf(a[i] * a[j] / 2.0);
        }
    }
    b
}

/// The off-line analogue with `g*` and `log y`.
pub fn predicted_bound_b_star(phi: u64, y: f64, cfg: &ShiftConfig) -> f64 {
    let mut b = phi as f64 * y.ln().powf(cfg.sum_a_squared() / 4.0);
    let (a, t) = (cfg.exponents(), cfg.shifts());
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            b *= correlation_g_star((t[i] - t[j]).abs(), y).powf(a[i] * a[j] / 2.0);
        }
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorizationCounts {
    /// #{(q_1..q_m) : Π q_i = Π p_i}, by enumeration.
    pub brute_count_pairs: u128,
    /// #{(q_1..q_{2m}, δ) : Π q_i = Π p_i², Π q_i^{δ_i} = 1}, by enumeration.
    pub brute_count_signed: u128,
    /// m! / Π α_i!
    pub formula_pairs: u128,
    /// (2m)! / Π (2α_i)! · Π C(2α_i, α_i)
    pub formula_signed: u128,
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

fn binomial(n: u32, k: u32) -> u128 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Enumerates tuples of primes drawn from the distinct primes of the
/// multiset; other primes cannot divide the target and are skipped.
pub fn count_signed_factorizations(primes: &[u64]) -> Result<FactorizationCounts> {
    let m = primes.len();
    if m == 0 || m > 6 {
        return Err(invalid("primes", format!("multiset size {m} must be between 1 and 6")));
    }
    if let Some(&p) = primes.iter().find(|&&p| !crate::arith::is_prime(p)) {
        return Err(invalid("primes", format!("{p} is not prime")));
    }
    let mut distinct: Vec<u64> = primes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let alphas: Vec<u32> = distinct.iter().map(|d| primes.iter().filter(|&&p| p == *d).count() as u32).collect();

    // unsigned m-tuples: every position picks any distinct prime; the tuple
    // counts when its product is Π p_i
    let target: u128 = primes.iter().map(|&p| p as u128).product();
    let mut pairs = 0u128;
    let r = distinct.len();
    let mut idx = vec![0usize; m];
    loop {
        let prod: u128 = idx.iter().map(|&k| distinct[k] as u128).product();
        if prod == target {
            pairs += 1;
        }
        if !advance(&mut idx, r) {
            break;
        }
    }

    // signed 2m-tuples with sign vectors; depth-first over positions with a
    // per-prime (count, net sign) state and pruning of exhausted primes
    let mut used = vec![0u32; r];
    let mut net = vec![0i32; r];
    let signed = signed_dfs(2 * m, &alphas, &mut used, &mut net);

    let formula_pairs = factorial(m as u32) / alphas.iter().map(|&a| factorial(a)).product::<u128>();
    let formula_signed = factorial(2 * m as u32) / alphas.iter().map(|&a| factorial(2 * a)).product::<u128>()
        * alphas.iter().map(|&a| binomial(2 * a, a)).product::<u128>();
    Ok(FactorizationCounts { brute_count_pairs: pairs, brute_count_signed: signed, formula_pairs, formula_signed })
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn signed_dfs(remaining: usize, alphas: &[u32], used: &mut [u32], net: &mut [i32]) -> u128 {
    if remaining == 0 {
        let ok = alphas.iter().zip(used.iter()).all(|(&a, &u)| u == 2 * a) && net.iter().all(|&s| s == 0);
        return ok as u128;
    }
    let mut total = 0;
    for k in 0..alphas.len() {
        if used[k] >= 2 * alphas[k] {
            continue;
        }
        for sign in [1i32, -1] {
            used[k] += 1;
            net[k] += sign;
            total += signed_dfs(remaining - 1, alphas, used, net);
            used[k] -= 1;
            net[k] -= sign;
        }
    }
    total
}

/// |h(p)|² = Σ a_i²/4 + Σ_{i<j} (a_i a_j / 2) cos(|t_i − t_j| log p).
pub fn h_abs_squared_expansion(cfg: &ShiftConfig, p: u64) -> f64 {
    let lp = (p as f64).ln();
    let (a, t) = (cfg.exponents(), cfg.shifts());
    let mut v = cfg.sum_a_squared() / 4.0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            v += a[i] * a[j] / 2.0 * ((t[i] - t[j]).abs() * lp).cos();
        }
    }
    v
}

/// Γ-decay constant used in the Mellin tail argument, `e^{−t/10}`.
pub fn gamma_decay_bound(t: f64) -> f64 {
    (-t.abs() / 10.0).exp()
}
