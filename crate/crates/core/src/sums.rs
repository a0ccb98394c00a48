//! Character sums, the smoothed cutoff, its Perron integral and the Pólya
//! expansion of short sums.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{primitive_characters, DirichletCharacter, Modulus};
use crate::error::{invalid, Error, Result};
use crate::lfunc::HurwitzResidues;
use crate::quad;
use crate::reduce::{pairwise_sum, pairwise_sum_complex};

/// Cutoff equal to 1 on `(0, y − T]`, falling linearly to 0 at `y`, with
/// `T = y / (log y)^C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothWeight {
    pub y: f64,
    pub c: f64,
    pub t: f64,
    pub y0: f64,
}

impl SmoothWeight {
    pub fn new(y: f64, c: f64) -> Result<Self> {
        if !(y >= 2.0) || !y.is_finite() {
            return Err(invalid("y", format!("y = {y} must be at least 2")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("C", format!("C = {c} must be positive")));
        }
        let t = y / y.ln().powf(c);
        if !(t > 0.0 && t <= y) {
            return Err(invalid("C", format!("ramp length {t} falls outside (0, y]")));
        }
        Ok(SmoothWeight { y, c, t, y0: y - t })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.y {
            0.0
        } else if x <= self.y0 {
            1.0
        } else {
            (self.y - x) / self.t
        }
    }

    /// ∫₀^∞ f(x) x^{s−1} dx = (y^{s+1} − (y−T)^{s+1}) / (T s (s+1)).
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        if s == Complex64::new(0.0, 0.0) || s == Complex64::new(-1.0, 0.0) {
            return Err(Error::Pole(format!("{s}")));
        }
        let s1 = s + 1.0;
        let top = (s1 * self.y.ln()).exp();
        let bottom = if self.y0 > 0.0 { (s1 * self.y0.ln()).exp() } else { Complex64::new(0.0, 0.0) };
        Ok((top - bottom) / (s * s1 * self.t))
    }
}

pub fn mellin_of_weight(w: &SmoothWeight, s: Complex64) -> Result<Complex64> {
    w.mellin(s)
}

/// Σ_{n ≤ y} χ(n).
pub fn char_sum(chi: &DirichletCharacter, y: f64) -> Result<Complex64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(invalid("y", format!("y = {y} must be a finite nonnegative real")));
    }
    let n_max = y.floor() as u64;
    let q = chi.q();
    // a full period sums to zero for non-principal χ
    let n_max = if !chi.is_principal() && n_max >= q { n_max % q } else { n_max };
    let terms: Vec<Complex64> = (1..=n_max).map(|n| chi.eval(n as i64)).collect();
    Ok(pairwise_sum_complex(&terms))
}

/// Σ_n f(n) χ(n).
pub fn weighted_char_sum(chi: &DirichletCharacter, w: &SmoothWeight) -> Complex64 {
    let n_max = w.y.ceil() as u64;
    let terms: Vec<Complex64> = (1..=n_max).map(|n| chi.eval(n as i64) * w.eval(n as f64)).collect();
    pairwise_sum_complex(&terms)
}

/// Σ_{n ≤ y} (1 − f(n)) χ(n), the part removed by the ramp.
pub fn ramp_defect(chi: &DirichletCharacter, w: &SmoothWeight) -> Complex64 {
    let terms: Vec<Complex64> = (1..=w.y.floor() as u64)
        .map(|n| chi.eval(n as i64) * (1.0 - w.eval(n as f64)))
        .collect();
    pairwise_sum_complex(&terms)
}

/// Number of integers in `(y − T, y]`.
pub fn ramp_integer_count(w: &SmoothWeight) -> u64 {
    (w.y.floor() as i64 - w.y0.floor() as i64).max(0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronValue {
    pub value: Complex64,
    pub t_max: f64,
    pub quad_error: f64,
    /// `t_max = 0`: nothing beyond the central point was integrated.
    pub incomplete: bool,
    /// χ is principal, so `L` has a pole at `s = 1` left of the line.
    pub principal_pole: bool,
}

/// Per-panel absolute tolerance of the Perron quadrature.
pub const PERRON_PANEL_TOL: f64 = 1e-9;

/// Hurwitz tolerance inside the Perron integrand.
const PERRON_HURWITZ_TOL: f64 = 1e-13;

/// (1/2π) ∫_{−t_max}^{t_max} L(c+it, χ) F(c+it) dt with `F` the weight's
/// Mellin transform.
pub fn perron_weighted(chi: &DirichletCharacter, w: &SmoothWeight, c: f64, t_max: f64) -> Result<PerronValue> {
    Ok(perron_weighted_batch(chi.modulus(), &[(chi.clone(), *w)], c, t_max)?[0])
}

/// [`perron_weighted`] for many (character, weight) pairs over one modulus;
/// each quadrature node evaluates a single Hurwitz table.
///
/// Only `t ≥ 0` is integrated: for real `f` the integrand at `c − it` for χ
/// is the conjugate of the one at `c + it` for χ̄.
pub fn perron_weighted_batch(
    modulus: &Arc<Modulus>,
    requests: &[(DirichletCharacter, SmoothWeight)],
    c: f64,
    t_max: f64,
) -> Result<Vec<PerronValue>> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(invalid("c", format!("c = {c} must exceed 1")));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(invalid("t_max", format!("t_max = {t_max} must be finite and nonnegative")));
    }
    if requests.iter().any(|(chi, _)| chi.q() != modulus.q()) {
        return Err(invalid("chi", "all characters must share the modulus"));
    }
    let finish = |totals: &[Complex64], quad_error: f64| -> Vec<PerronValue> {
        requests
            .iter()
            .enumerate()
            .map(|(i, (chi, _))| PerronValue {
                value: totals[i] / (2.0 * PI),
                t_max,
                quad_error: quad_error / PI,
                incomplete: t_max == 0.0,
                principal_pole: chi.is_principal(),
            })
            .collect()
    };
    if requests.is_empty() || t_max == 0.0 {
        return Ok(finish(&vec![Complex64::new(0.0, 0.0); requests.len()], 0.0));
    }

    let mut chars: Vec<DirichletCharacter> = Vec::new();
    let mut slot = |chi: DirichletCharacter| match chars.iter().position(|x| *x == chi) {
        Some(i) => i,
        None => {
            chars.push(chi);
            chars.len() - 1
        }
    };
    let slots: Vec<(usize, usize)> = requests.iter().map(|(chi, _)| (slot(chi.clone()), slot(chi.conjugate()))).collect();

    let mut failure: Option<Error> = None;
    let mut integrand = |t: f64| -> Vec<Complex64> {
        let s = Complex64::new(c, t);
        let start = 30usize.max((0.5 * t.abs()).ceil() as usize);
        let l: Vec<Complex64> = match HurwitzResidues::with_start_shift(modulus, s, PERRON_HURWITZ_TOL, start)
            .and_then(|table| chars.iter().map(|chi| table.l_value(chi)).collect::<Result<Vec<_>>>())
        {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                vec![Complex64::new(0.0, 0.0); chars.len()]
            }
        };
        requests
            .iter()
            .zip(&slots)
            .map(|((_, w), &(a, b))| {
                let f = w.mellin(s).unwrap_or_default();
                l[a] * f + (l[b] * f).conj()
            })
            .collect()
    };

    let mut totals = vec![Complex64::new(0.0, 0.0); requests.len()];
    let mut quad_error = 0.0;
    let mut lo = 0.0;
    while lo < t_max {
        let hi = (lo + 1.0).min(t_max);
        let panel = quad::adaptive(&mut integrand, lo, hi, PERRON_PANEL_TOL, 10);
        for (acc, v) in totals.iter_mut().zip(&panel.kronrod) {
            *acc += v;
        }
        quad_error += panel.error;
        lo = hi;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(finish(&totals, quad_error))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyaExpansion {
    pub approx: Complex64,
    pub residual: f64,
    pub direct: Complex64,
    pub h: u64,
}

/// The finite Fourier main term for Σ_{n ≤ q/y} χ(n):
/// (τ(χ)/2πi) Σ_{1≤|h|≤H} χ̄(h)/h · (1 − e(−h/y)).
///
/// The expansion follows from χ(n) = τ(χ)^{-1} Σ_h χ̄(h) e(hn/q) summed over
/// n ≤ q/y; see the decisions note on the sign of the exponential.
pub fn polya_main_term(chi: &DirichletCharacter, y: f64, h_cap: u64, tau: Complex64) -> Complex64 {
    let alpha = 1.0 / y;
    let terms: Vec<Complex64> = (1..=h_cap)
        .flat_map(|h| [h as i64, -(h as i64)])
        .map(|h| {
            let e = Complex64::from_polar(1.0, -2.0 * PI * (h as f64) * alpha);
            chi.eval(h).conj() / h as f64 * (Complex64::new(1.0, 0.0) - e)
        })
        .collect();
    tau / Complex64::new(0.0, 2.0 * PI) * pairwise_sum_complex(&terms)
}

/// The expansion with the exponential written as `e(h/y) − 1` and an
/// overall `−τ(χ)/2πi`; equal to [`polya_main_term`] for odd χ and its
/// negative for even χ.
pub fn polya_main_term_positive_phase(chi: &DirichletCharacter, y: f64, h_cap: u64, tau: Complex64) -> Complex64 {
    let alpha = 1.0 / y;
    let terms: Vec<Complex64> = (1..=h_cap)
        .flat_map(|h| [h as i64, -(h as i64)])
        .map(|h| {
            let e = Complex64::from_polar(1.0, 2.0 * PI * (h as f64) * alpha);
            chi.eval(h).conj() / h as f64 * (e - 1.0)
        })
        .collect();
    -tau / Complex64::new(0.0, 2.0 * PI) * pairwise_sum_complex(&terms)
}

/// Main term and residual `|Σ_{n≤q/y} χ(n) − approx|`; `h_cap` defaults to `q`.
pub fn polya_expansion(chi: &DirichletCharacter, y: f64, h_cap: Option<u64>) -> Result<PolyaExpansion> {
    if !chi.is_primitive() {
        return Err(invalid("chi", "the expansion needs a primitive character"));
    }
    if !(y >= 1.0) || !y.is_finite() {
        return Err(invalid("y", format!("y = {y} must be at least 1")));
    }
    let h = h_cap.unwrap_or(chi.q());
    if h < 2 {
        return Err(invalid("H", format!("H = {h} must exceed 1")));
    }
    let tau = chi.gauss_sum();
    let approx = polya_main_term(chi, y, h, tau);
    let direct = char_sum(chi, chi.q() as f64 / y)?;
    Ok(PolyaExpansion { approx, residual: (direct - approx).norm(), direct, h })
}

/// Σ_{χ primitive mod q} |Σ_{n≤y} χ(n)|^{2k}.
pub fn char_sum_moment(q: u64, k: f64, y: f64) -> Result<f64> {
    if q < 3 {
        return Err(invalid("q", format!("q = {q} must be at least 3")));
    }
    if !(k > 0.0) {
        return Err(invalid("k", format!("k = {k} must be positive")));
    }
    char_sum_moment_over(&primitive_characters(q, None), k, y)
}

pub fn char_sum_moment_over(chars: &[DirichletCharacter], k: f64, y: f64) -> Result<f64> {
    let vals: Vec<f64> = chars
        .par_iter()
        .map(|chi| char_sum(chi, y).map(|s| s.norm().powf(2.0 * k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&vals))
}

/// |Σ_{n≤y} χ(n)| / ((y/√q) |Σ_{n≤q/y} χ̄(n)|), one entry per character.
/// Reported for inspection only; the heuristic carries no error term.
pub fn duality_ratios(chars: &[DirichletCharacter], y: f64) -> Result<Vec<f64>> {
    chars
        .iter()
        .map(|chi| {
            let q = chi.q() as f64;
            let short = char_sum(chi, y)?.norm();
            let dual = char_sum(&chi.conjugate(), q / y)?.norm() * y / q.sqrt();
            Ok(if dual > 0.0 { short / dual } else { f64::INFINITY })
        })
        .collect()
}
