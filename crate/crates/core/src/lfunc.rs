//! ζ(s), Hurwitz ζ(s, a), Dirichlet L-functions and their completed forms.
//!
//! Everything is built on an Euler–Maclaurin evaluation of the Hurwitz zeta
//! function with a shift of `max(30, ⌈3|t|⌉)` terms and Bernoulli corrections
//! up to `B_24`. `L(s, χ) = q^{-s} Σ_a χ(a) ζ(s, a/q)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{DirichletCharacter, Modulus};
use crate::error::{invalid, Error, Result};
use crate::gamma;
use crate::reduce::pairwise_sum_complex;

/// Absolute tolerance targeted by the Hurwitz evaluation.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Number of Bernoulli correction terms.
pub const EM_ORDER: usize = 12;
/// `|L| ` below this is reported as a candidate zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Largest `|Im|` accepted by the Gamma factor of the completed L-function.
pub const GAMMA_T_CAP: f64 = 400.0;

const MAX_SHIFT: usize = 1 << 22;

// B_{2k} / (2k)!, k = 1..=12
const BERNOULLI_OVER_FACTORIAL: [f64; EM_ORDER] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1.1240007277776077e21,
    -236364091.0 / 2730.0 / 6.204484017332394e23,
];

/// A point `s = σ + it`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalPoint {
    pub sigma: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        EvalPoint { sigma, t }
    }

    pub fn s(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

impl From<Complex64> for EvalPoint {
    fn from(s: Complex64) -> Self {
        EvalPoint { sigma: s.re, t: s.im }
    }
}

impl fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.sigma, self.t)
    }
}

/// Hurwitz zeta value together with the size of the last Bernoulli term.
#[derive(Debug, Clone, Copy)]
pub struct HurwitzEval {
    pub value: Complex64,
    pub error_estimate: f64,
    pub shift: usize,
}

pub fn em_shift(t: f64) -> usize {
    30usize.max((3.0 * t.abs()).ceil() as usize)
}

/// Euler–Maclaurin core. With `regularize_pole`, the `x^{1-s}/(s-1)` term is
/// replaced at `s = 1` by its finite part `-log x`; only meaningful inside a
/// combination whose pole parts cancel.
fn hurwitz_em(s: Complex64, a: f64, shift: usize, regularize_pole: bool) -> HurwitzEval {
    let one = Complex64::new(1.0, 0.0);
    let mut head = Vec::with_capacity(shift);
    for n in 0..shift {
        head.push((-s * (n as f64 + a).ln()).exp());
    }
    let mut value = pairwise_sum_complex(&head);
    let x = shift as f64 + a;
    let lx = x.ln();
    let xs = (-s * lx).exp();
    if s == one {
        value += if regularize_pole { Complex64::new(-lx, 0.0) } else { Complex64::new(f64::INFINITY, 0.0) };
    } else {
        value += xs * x / (s - one);
    }
    value += xs * 0.5;
    let mut poch = s;
    let mut xpow = xs / x;
    let mut last = 0.0;
    for (k, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = poch * xpow * b;
        value += term;
        last = term.norm();
        let m = 2.0 * (k as f64 + 1.0);
        poch *= (s + (m - 1.0)) * (s + m);
        xpow /= x * x;
    }
    HurwitzEval { value, error_estimate: last, shift }
}

fn hurwitz_adaptive(s: Complex64, a: f64, tol: f64, regularize_pole: bool) -> HurwitzEval {
    hurwitz_adaptive_from(s, a, tol, regularize_pole, em_shift(s.im))
}

fn hurwitz_adaptive_from(s: Complex64, a: f64, tol: f64, regularize_pole: bool, start: usize) -> HurwitzEval {
    let mut shift = start.max(1);
    loop {
        let ev = hurwitz_em(s, a, shift, regularize_pole);
        if ev.error_estimate <= tol || shift >= MAX_SHIFT {
            return ev;
        }
        shift *= 2;
    }
}

/// ζ(s, a) for any `a > 0` (no domain restriction on `a`).
pub fn hurwitz_zeta_general(s: Complex64, a: f64, tol: f64) -> Result<HurwitzEval> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("1".into()));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("Hurwitz parameter a = {a} must be positive")));
    }
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(invalid("s", "must be finite"));
    }
    Ok(hurwitz_adaptive(s, a, tol, false))
}

/// ζ(s, a) for `a ∈ (0, 1]`.
pub fn hurwitz_zeta(s: EvalPoint, a: f64) -> Result<Complex64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("Hurwitz parameter a = {a} outside (0, 1]")));
    }
    hurwitz_zeta_general(s.s(), a, DEFAULT_TOL).map(|e| e.value)
}

/// ζ(s).
pub fn zeta_value(s: EvalPoint) -> Result<Complex64> {
    hurwitz_zeta(s, 1.0)
}

/// The Hurwitz values `ζ(s, a/q)` at every unit residue `a` modulo `q`, ready
/// to be contracted against any character modulo `q`.
pub struct HurwitzResidues {
    s: Complex64,
    q: u64,
    q_pow: Complex64,
    residues: Vec<(i64, Complex64)>,
    pole_regularized: bool,
    error_estimate: f64,
}

impl HurwitzResidues {
    pub fn new(modulus: &Modulus, s: Complex64) -> Result<Self> {
        Self::with_tol(modulus, s, DEFAULT_TOL)
    }

    pub fn with_tol(modulus: &Modulus, s: Complex64, tol: f64) -> Result<Self> {
        Self::with_start_shift(modulus, s, tol, em_shift(s.im))
    }

    /// As [`HurwitzResidues::with_tol`] with the Euler–Maclaurin shift starting
    /// at `start` instead of `max(30, 3|t|)`; it still doubles until the last
    /// correction term is below `tol`.
    pub fn with_start_shift(modulus: &Modulus, s: Complex64, tol: f64, start: usize) -> Result<Self> {
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(invalid("s", "must be finite"));
        }
        let q = modulus.q();
        let at_pole = s == Complex64::new(1.0, 0.0);
        let mut residues = Vec::with_capacity(modulus.phi() as usize);
        let mut err: f64 = 0.0;
        for a in 1..=q as i64 {
            if modulus.logs(a).is_some() {
                let ev = hurwitz_adaptive_from(s, a as f64 / q as f64, tol, at_pole, start);
                err = err.max(ev.error_estimate);
                residues.push((a, ev.value));
            }
        }
        Ok(HurwitzResidues {
            s,
            q,
            q_pow: (-s * (q as f64).ln()).exp(),
            residues,
            pole_regularized: at_pole,
            error_estimate: err,
        })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    /// Largest per-residue a-posteriori error estimate.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn l_value(&self, chi: &DirichletCharacter) -> Result<Complex64> {
        if chi.q() != self.q {
            return Err(invalid("chi", format!("character modulo {} used with table modulo {}", chi.q(), self.q)));
        }
        if self.pole_regularized && chi.is_principal() {
            return Err(Error::Pole("1 (principal character)".into()));
        }
        let terms: Vec<Complex64> = self.residues.iter().map(|&(a, z)| chi.eval(a) * z).collect();
        Ok(self.q_pow * pairwise_sum_complex(&terms))
    }
}

/// L(s, χ) via the Hurwitz decomposition.
pub fn l_value(s: EvalPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    if chi.is_principal() && s.s() == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("1 (principal character)".into()));
    }
    HurwitzResidues::new(chi.modulus(), s.s())?.l_value(chi)
}

/// The Gamma factor `(q/π)^{(s+κ)/2} Γ((s+κ)/2)`.
pub fn gamma_factor(s: Complex64, q: u64, kappa: u8) -> Result<Complex64> {
    if s.im.abs() > GAMMA_T_CAP {
        return Err(invalid("t", format!("|t| = {} exceeds the Gamma-factor cap {GAMMA_T_CAP}", s.im.abs())));
    }
    let w = (s + kappa as f64) * 0.5;
    Ok((w * (q as f64 / PI).ln() + gamma::ln_gamma(w)).exp())
}

fn require_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_primitive() {
        Ok(())
    } else {
        Err(invalid("chi", format!("character {} modulo {} is not primitive", chi.index(), chi.q())))
    }
}

/// Λ(s, χ) = (q/π)^{(s+κ)/2} Γ((s+κ)/2) L(s, χ), χ primitive.
pub fn completed_l(s: EvalPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    require_primitive(chi)?;
    Ok(gamma_factor(s.s(), chi.q(), chi.kappa())? * l_value(s, chi)?)
}

/// Root number ε(χ) = τ(χ) / (i^κ √q).
pub fn root_number(chi: &DirichletCharacter) -> Complex64 {
    let i_kappa = if chi.kappa() == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    chi.gauss_sum() / (i_kappa * (chi.q() as f64).sqrt())
}

/// |Λ(s, χ) − ε(χ) Λ(1−s, χ̄)| / max(|Λ(s, χ)|, 1e−300).
pub fn functional_equation_residual(s: EvalPoint, chi: &DirichletCharacter) -> Result<f64> {
    require_primitive(chi)?;
    let lhs = completed_l(s, chi)?;
    let reflected = EvalPoint::from(Complex64::new(1.0, 0.0) - s.s());
    let rhs = root_number(chi) * completed_l(reflected, &chi.conjugate())?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-300))
}

/// Outcome of `log |L(s, χ)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LogAbs {
    Finite(f64),
    /// `|L| < ZERO_THRESHOLD`: a candidate zero, never turned into `-inf`.
    NearZero { abs: f64 },
}

impl LogAbs {
    pub fn from_abs(abs: f64) -> Self {
        if abs < ZERO_THRESHOLD {
            LogAbs::NearZero { abs }
        } else {
            LogAbs::Finite(abs.ln())
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            LogAbs::Finite(v) => Some(v),
            LogAbs::NearZero { .. } => None,
        }
    }
}

pub fn log_abs_l(s: EvalPoint, chi: &DirichletCharacter) -> Result<LogAbs> {
    Ok(LogAbs::from_abs(l_value(s, chi)?.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;

    const CATALAN: f64 = 0.915_965_594_177_219_015_054_6;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zeta_two() {
        let z = zeta_value(EvalPoint::new(2.0, 0.0)).unwrap();
        assert!((z - cplx(PI * PI / 6.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn hurwitz_half() {
        // ζ(s, 1/2) = (2^s − 1) ζ(s), with ζ(2) from the closed form.
        let h = hurwitz_zeta(EvalPoint::new(2.0, 0.0), 0.5).unwrap();
        assert!((h - cplx(3.0 * PI * PI / 6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zeta_minus_one() {
        // ζ(−1) = −B_2 / 2
        let z = zeta_value(EvalPoint::new(-1.0, 0.0)).unwrap();
        assert!((z - cplx(-1.0 / 12.0, 0.0)).norm() < 1e-12, "{z}");
    }

    #[test]
    fn zeta_half() {
        // Higher-shift Euler–Maclaurin run as an independent reference.
        let reference = hurwitz_em(cplx(0.5, 0.0), 1.0, 400, false).value;
        let z = zeta_value(EvalPoint::new(0.5, 0.0)).unwrap();
        assert!((z - reference).norm() < 1e-12);
        assert!((z.re + 1.460_354_508_809_586_8).abs() < 1e-12, "{z}");
    }

    #[test]
    fn zeta_near_one_matches_series_with_tail() {
        let sigma = 1.0 + 1.0 / (1e5f64).ln();
        let z = zeta_value(EvalPoint::new(sigma, 0.0)).unwrap();
        // Σ_{n<M} n^{-σ} + M^{1-σ}/(σ-1) + M^{-σ}/2 + σ M^{-σ-1}/12
        let m = 200_000u64;
        let head: f64 = (1..m).map(|n| (n as f64).powf(-sigma)).rev().sum();
        let mf = m as f64;
        let tail = mf.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * mf.powf(-sigma) + sigma * mf.powf(-sigma - 1.0) / 12.0;
        assert!(z.re > 1.0);
        assert!((z.re - (head + tail)).abs() < 1e-9, "{} vs {}", z.re, head + tail);
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn pole_and_domain_errors() {
        assert!(matches!(zeta_value(EvalPoint::new(1.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(hurwitz_zeta(EvalPoint::new(2.0, 0.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(hurwitz_zeta(EvalPoint::new(2.0, 0.0), 1.5), Err(Error::Domain(_))));
        let principal = &enumerate_characters(5)[0];
        assert!(matches!(l_value(EvalPoint::new(1.0, 0.0), principal), Err(Error::Pole(_))));
    }

    #[test]
    fn hurwitz_recurrence() {
        for &a in &[0.1, 0.37, 0.5, 0.99] {
            for &(sigma, t) in &[(0.5, 0.0), (0.5, 14.1), (2.0, 3.0), (-0.5, 7.0), (1.3, -20.0)] {
                let s = cplx(sigma, t);
                let lhs = hurwitz_zeta_general(s, a, DEFAULT_TOL).unwrap().value
                    - hurwitz_zeta_general(s, a + 1.0, DEFAULT_TOL).unwrap().value;
                let rhs = (-s * a.ln()).exp();
                assert!((lhs - rhs).norm() < 1e-10, "a={a} s={s}");
            }
        }
    }

    #[test]
    fn catalan() {
        let chi = enumerate_characters(4).into_iter().find(|c| !c.is_principal()).unwrap();
        let l = l_value(EvalPoint::new(2.0, 0.0), &chi).unwrap();
        // Alternating series 1 − 1/9 + 1/25 − …, averaged partial sums.
        let mut partial = 0.0;
        let mut prev = 0.0;
        for k in 0..200_000u64 {
            prev = partial;
            let n = (2 * k + 1) as f64;
            partial += if k % 2 == 0 { 1.0 } else { -1.0 } / (n * n);
        }
        let accelerated = 0.5 * (partial + prev);
        assert!((accelerated - CATALAN).abs() < 1e-12);
        assert!((l - cplx(CATALAN, 0.0)).norm() < 1e-12, "{l}");
        let la = log_abs_l(EvalPoint::new(2.0, 0.0), &chi).unwrap().finite().unwrap();
        assert!(la < 0.0 && (la - CATALAN.ln()).abs() < 1e-12);
    }

    #[test]
    fn trivial_mod_one_is_zeta() {
        let chi = &enumerate_characters(1)[0];
        let l = l_value(EvalPoint::new(2.0, 0.0), chi).unwrap();
        assert!((l - cplx(PI * PI / 6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn real_character_real_point() {
        let chi = enumerate_characters(5).into_iter().find(|c| c.order() == 2).unwrap();
        let l = l_value(EvalPoint::new(0.5, 0.0), &chi).unwrap();
        assert!(l.im.abs() < 1e-14);
        let lam = completed_l(EvalPoint::new(0.5, 0.0), &chi).unwrap();
        assert!(lam.im.abs() < 1e-13);
        assert!(lam.re > 0.0);
        assert!(log_abs_l(EvalPoint::new(0.5, 0.0), &chi).unwrap().finite().is_some());
    }

    #[test]
    fn completed_at_two_mod_four() {
        let chi = enumerate_characters(4).into_iter().find(|c| !c.is_principal()).unwrap();
        let lam = completed_l(EvalPoint::new(2.0, 0.0), &chi).unwrap();
        let want = (4.0 / PI).powf(1.5) * (PI.sqrt() / 2.0) * CATALAN;
        assert!((lam - cplx(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn functional_equation_examples() {
        let chi5 = enumerate_characters(5).into_iter().find(|c| c.order() == 2).unwrap();
        assert!(functional_equation_residual(EvalPoint::new(0.5, 0.7), &chi5).unwrap() < 1e-8);
        let chi4 = enumerate_characters(4).into_iter().find(|c| !c.is_principal()).unwrap();
        assert!(functional_equation_residual(EvalPoint::new(0.5, 0.0), &chi4).unwrap() < 1e-10);
        let chi3 = enumerate_characters(3).into_iter().find(|c| !c.is_principal()).unwrap();
        assert!(functional_equation_residual(EvalPoint::new(0.3, 2.0), &chi3).unwrap() < 1e-8);
    }

    #[test]
    fn imprimitive_rejected_by_completed() {
        let principal = &enumerate_characters(5)[0];
        assert!(completed_l(EvalPoint::new(0.5, 0.0), principal).is_err());
    }

    #[test]
    fn nonprincipal_at_one_is_finite() {
        // L(1, χ_4) = π/4
        let chi = enumerate_characters(4).into_iter().find(|c| !c.is_principal()).unwrap();
        let l = l_value(EvalPoint::new(1.0, 0.0), &chi).unwrap();
        assert!((l - cplx(PI / 4.0, 0.0)).norm() < 1e-12, "{l}");
    }

    #[test]
    fn unit_modulus_log_is_zero() {
        assert_eq!(LogAbs::from_abs(1.0), LogAbs::Finite(0.0));
        assert!(matches!(LogAbs::from_abs(1e-13), LogAbs::NearZero { .. }));
    }
}
