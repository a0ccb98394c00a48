//! θ(1, χ) = Σ_{n≥1} χ(n) n^κ e^{−πn²/q}, directly and through its Mellin
//! representation, and the moments S±_{2k}(q).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{DirichletCharacter, Modulus, Parity};
use crate::error::{invalid, Error, Result};
use crate::gamma::ln_gamma;
use crate::lfunc::HurwitzResidues;
use crate::quad;
use crate::reduce::pairwise_sum;

/// `|θ|` below this counts as a candidate zero in moment sums.
pub const THETA_ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Last summed index.
    pub truncation_n: u64,
    /// Certified bound on Σ_{n > N} n^κ e^{−πn²/q}.
    pub tail_bound: f64,
}

/// Integral bound on the Gaussian tail beyond `n`. Valid because the summand
/// is decreasing past `sqrt(q / 2π)`, which the starting truncation exceeds.
pub fn gaussian_tail_bound(q: u64, kappa: u8, n: u64) -> f64 {
    let q = q as f64;
    let n = n as f64;
    let g = (-PI * n * n / q).exp();
    if kappa == 0 {
        g * q / (2.0 * PI * n)
    } else {
        g * q / (2.0 * PI)
    }
}

pub fn initial_truncation(q: u64, eps: f64) -> u64 {
    ((q as f64 * ((1.0 / eps).ln() + 5.0) / PI).sqrt()).ceil().max(1.0) as u64
}

pub fn theta_direct(chi: &DirichletCharacter, eps: f64) -> Result<ThetaValue> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let q = chi.q();
    let kappa = chi.kappa();
    let mut n_max = initial_truncation(q, eps);
    while gaussian_tail_bound(q, kappa, n_max) >= eps {
        n_max += 1;
    }
    let qf = q as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        if let Some(k) = chi.value_index(n as i64) {
            let nf = n as f64;
            let w = (-PI * nf * nf / qf).exp() * if kappa == 1 { nf } else { 1.0 };
            acc += chi.modulus().root_of_unity(k) * w;
        }
    }
    Ok(ThetaValue { value: acc, truncation_n: n_max, tail_bound: gaussian_tail_bound(q, kappa, n_max) })
}

/// Result of the contour evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaMellin {
    pub value: Complex64,
    /// Height at which the integration stopped (≤ t_max).
    pub t_reached: f64,
    /// Summed Gauss–Kronrod error estimates.
    pub quad_error: f64,
}

/// Absolute tolerance of the contour quadrature.
pub const MELLIN_TOL: f64 = 1e-11;

fn check_mellin_args(chi: &DirichletCharacter, c: f64, t_max: f64) -> Result<()> {
    if chi.kappa() != 0 {
        return Err(invalid("chi", "the Mellin representation is only implemented for even characters"));
    }
    if !chi.is_primitive() {
        return Err(invalid("chi", "character must be primitive"));
    }
    if !(c > 0.5 || c == 0.25) {
        return Err(invalid("c", format!("contour abscissa {c} must exceed 1/2 or equal 1/4")));
    }
    if !(t_max > 0.0) {
        return Err(Error::DegenerateQuadrature(format!("t_max = {t_max} gives an empty integration range")));
    }
    Ok(())
}

/// θ(1, χ) = (1/2πi) ∫_{(c)} L(2s, χ) (q/π)^s Γ(s) ds for even primitive χ,
/// integrated numerically over `|Im s| ≤ t_max`.
pub fn theta_mellin(chi: &DirichletCharacter, c: f64, t_max: f64) -> Result<ThetaMellin> {
    let out = theta_mellin_batch(chi.modulus(), std::slice::from_ref(chi), c, t_max)?;
    Ok(out[0])
}

/// [`theta_mellin`] for several characters sharing one modulus; the Hurwitz
/// table at each node is computed once for all of them.
///
/// Only `Im s ≥ 0` is integrated: the integrand at `c − iu` for χ is the
/// conjugate of the one at `c + iu` for χ̄.
pub fn theta_mellin_batch(
    modulus: &std::sync::Arc<Modulus>,
    chars: &[DirichletCharacter],
    c: f64,
    t_max: f64,
) -> Result<Vec<ThetaMellin>> {
    for chi in chars {
        if chi.q() != modulus.q() {
            return Err(invalid("chi", "all characters must share the modulus"));
        }
        check_mellin_args(chi, c, t_max)?;
    }
    if chars.is_empty() {
        return Ok(Vec::new());
    }
    // channel set: every requested character and its conjugate
    let mut channels: Vec<DirichletCharacter> = Vec::new();
    let slot = |chi: &DirichletCharacter, channels: &mut Vec<DirichletCharacter>| -> usize {
        match channels.iter().position(|x| x == chi) {
            Some(i) => i,
            None => {
                channels.push(chi.clone());
                channels.len() - 1
            }
        }
    };
    let pairs: Vec<(usize, usize)> = chars
        .iter()
        .map(|chi| {
            let a = slot(chi, &mut channels);
            let b = slot(&chi.conjugate(), &mut channels);
            (a, b)
        })
        .collect();

    let log_q_over_pi = (modulus.q() as f64 / PI).ln();
    let mut failure: Option<Error> = None;
    let mut integrand = |u: f64| -> Vec<Complex64> {
        let s = Complex64::new(c, u);
        let table = match HurwitzResidues::new(modulus, s * 2.0) {
            Ok(t) => t,
            Err(e) => {
                failure.get_or_insert(e);
                return vec![Complex64::new(0.0, 0.0); channels.len()];
            }
        };
        let weight = (s * log_q_over_pi + ln_gamma(s)).exp();
        channels
            .iter()
            .map(|chi| table.l_value(chi).map(|l| l * weight).unwrap_or_default())
            .collect()
    };

    let mut totals = vec![Complex64::new(0.0, 0.0); channels.len()];
    let mut quad_error = 0.0;
    let mut lo = 0.0;
    let mut t_reached = 0.0;
    while lo < t_max {
        let hi = (lo + 1.0).min(t_max);
        let panel = quad::adaptive(&mut integrand, lo, hi, MELLIN_TOL, 12);
        for (t, v) in totals.iter_mut().zip(&panel.kronrod) {
            *t += v;
        }
        quad_error += panel.error;
        t_reached = hi;
        // |Γ(c + iu)| decreases in |u|; the rest of the line is bounded by
        // the current panel's peak times a geometric e^{−πu/2} tail.
        let gamma_ratio = (ln_gamma(Complex64::new(c, hi)).re - ln_gamma(Complex64::new(c, lo)).re).exp();
        let tail = panel.max_abs * gamma_ratio * 2.0 / PI;
        if tail < MELLIN_TOL {
            break;
        }
        lo = hi;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(pairs
        .into_iter()
        .map(|(a, b)| ThetaMellin {
            value: (totals[a] + totals[b].conj()) / (2.0 * PI),
            t_reached,
            quad_error: quad_error / PI,
        })
        .collect())
}

/// Outcome of a theta moment sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaMoment {
    pub moment: f64,
    pub count: usize,
    /// Characters whose |θ| fell below [`THETA_ZERO_THRESHOLD`].
    pub near_zero: usize,
    /// No primitive character of the requested parity exists.
    pub empty_class: bool,
}

/// S±_{2k}(q) = Σ over primitive χ of the given parity of |θ(1, χ)|^{2k}.
pub fn theta_moment(q: u64, k: f64, parity: Parity, eps: f64) -> Result<ThetaMoment> {
    if q < 3 {
        return Err(invalid("q", format!("q = {q} must be at least 3")));
    }
    let chars: Vec<DirichletCharacter> = crate::characters::primitive_characters(q, Some(parity));
    theta_moment_over(&chars, k, eps)
}

pub fn theta_moment_over(chars: &[DirichletCharacter], k: f64, eps: f64) -> Result<ThetaMoment> {
    if !(k >= 0.0) {
        return Err(invalid("k", "must be non-negative"));
    }
    let thetas: Vec<Result<ThetaValue>> = chars.par_iter().map(|chi| theta_direct(chi, eps)).collect();
    let mut terms = Vec::with_capacity(chars.len());
    let mut near_zero = 0;
    for th in thetas {
        let abs = th?.value.norm();
        if abs < THETA_ZERO_THRESHOLD {
            near_zero += 1;
        }
        terms.push(abs.powf(2.0 * k));
    }
    Ok(ThetaMoment { moment: pairwise_sum(&terms), count: chars.len(), near_zero, empty_class: chars.is_empty() })
}

/// Predicted growth φ(q) q^{k/2} (log q)^{(k−1)²} (even) or
/// φ(q) q^{3k/2} (log q)^{(k−1)²} (odd).
pub fn theta_moment_bound(q: u64, phi: u64, k: f64, parity: Parity) -> f64 {
    let qf = q as f64;
    let power = match parity {
        Parity::Even => k / 2.0,
        Parity::Odd => 1.5 * k,
    };
    phi as f64 * qf.powf(power) * qf.ln().powf((k - 1.0) * (k - 1.0))
}
