//! Shifted L-moments over primitive characters and ratio-to-bound scans.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{predicted_bound_b, predicted_bound_b_star, ShiftConfig};
use crate::characters::{primitive_characters, DirichletCharacter, Parity};
use crate::error::{invalid, Result};
use crate::lfunc::{HurwitzResidues, ZERO_THRESHOLD};
use crate::reduce::pairwise_sum;
use crate::sums::char_sum_moment_over;
use crate::theta::{theta_moment_bound, theta_moment_over};

/// An `L` value too small to take a logarithm of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearZero {
    pub character_index: usize,
    pub shift: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedMoment {
    pub moment: f64,
    pub count: usize,
    pub near_zero: Vec<NearZero>,
}

/// Σ_{χ primitive} Π_j |L(½ + offset + i t_j, χ)|^{a_j}. A near-zero factor
/// makes that character's term 0 and is listed in `near_zero`.
pub fn shifted_moment(q: u64, cfg: &ShiftConfig, sigma_offset: f64) -> Result<ShiftedMoment> {
    if q < 3 {
        return Err(invalid("q", format!("q = {q} must be at least 3")));
    }
    cfg.check_shift_range(q)?;
    shifted_moment_over(&primitive_characters(q, None), cfg, sigma_offset)
}

pub fn shifted_moment_over(chars: &[DirichletCharacter], cfg: &ShiftConfig, sigma_offset: f64) -> Result<ShiftedMoment> {
    if !(sigma_offset >= 0.0) || !sigma_offset.is_finite() {
        return Err(invalid("offset", format!("offset = {sigma_offset} must be finite and nonnegative")));
    }
    let Some(first) = chars.first() else {
        return Ok(ShiftedMoment { moment: 0.0, count: 0, near_zero: Vec::new() });
    };
    let modulus = first.modulus().clone();
    let sigma = 0.5 + sigma_offset;

    // one Hurwitz table per distinct shift
    let mut distinct: Vec<f64> = Vec::new();
    for &t in cfg.shifts() {
        if !distinct.iter().any(|&d| d == t) {
            distinct.push(t);
        }
    }
    let tables: Vec<HurwitzResidues> = distinct
        .par_iter()
        .map(|&t| HurwitzResidues::new(&modulus, Complex64::new(sigma, t)))
        .collect::<Result<_>>()?;
    let table_of: Vec<usize> = cfg.shifts().iter().map(|t| distinct.iter().position(|d| d == t).unwrap()).collect();

    let per_char: Vec<(f64, Vec<NearZero>)> = chars
        .par_iter()
        .enumerate()
        .map(|(idx, chi)| {
            let mut abs_at = Vec::with_capacity(distinct.len());
            for table in &tables {
                abs_at.push(table.l_value(chi)?.norm());
            }
            let mut flags = Vec::new();
            let mut log_sum = 0.0;
            for (j, &a) in cfg.exponents().iter().enumerate() {
                let v = abs_at[table_of[j]];
                if v < ZERO_THRESHOLD {
                    flags.push(NearZero { character_index: idx, shift: cfg.shifts()[j], abs: v });
                } else {
                    log_sum += a * v.ln();
                }
            }
            let term = if flags.is_empty() { log_sum.exp() } else { 0.0 };
            Ok((term, flags))
        })
        .collect::<Result<_>>()?;
    let terms: Vec<f64> = per_char.iter().map(|(v, _)| *v).collect();
    Ok(ShiftedMoment {
        moment: pairwise_sum(&terms),
        count: chars.len(),
        near_zero: per_char.into_iter().flat_map(|(_, f)| f).collect(),
    })
}

/// How the length `y` of a character sum is chosen from `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum YMode {
    Sqrt,
    Fixed(f64),
}

impl YMode {
    pub fn resolve(self, q: u64) -> f64 {
        match self {
            YMode::Sqrt => (q as f64).sqrt(),
            YMode::Fixed(y) => y,
        }
    }
}

impl std::str::FromStr for YMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "sqrt" {
            return Ok(YMode::Sqrt);
        }
        match s.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(y)) if y >= 1.0 => Ok(YMode::Fixed(y)),
            _ => Err(format!("expected `sqrt` or `fixed:<y>` with y ≥ 1, got `{s}`")),
        }
    }
}

pub const DEFAULT_L0_EXPONENT: f64 = 4.0;

/// An empirical moment paired with the size it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Predictor {
    /// Shifted moment at `offset` against φ(q)(log q)^{Σa²/4} Π g^{a_i a_j/2}.
    BoundB { cfg: ShiftConfig, offset: f64 },
    /// Shifted moment at offset 1/log y against the `g*` form with log y.
    BoundBStar { cfg: ShiftConfig, y: f64 },
    /// Shifted moment at offset 1/log y against φ(q) L₀^e, L₀ = min(log y + 1, log q).
    CrudeOffLine { cfg: ShiftConfig, y: f64, exponent: f64 },
    /// S^±_{2k}(q) against φ(q) q^{k/2 or 3k/2} (log q)^{(k−1)²}.
    Theta { k: f64, parity: Parity, eps: f64 },
    /// S_k(q, y) against φ(q) y^k (log y)^{(k−1)²}.
    CharSum { k: f64, y: YMode },
    /// S_k(q, y) against φ(q) y^k (log 2q/y)^{(k−1)²}.
    CharSumDual { k: f64, y: YMode },
}

impl Predictor {
    pub fn label(&self) -> &'static str {
        match self {
            Predictor::BoundB { .. } => "B",
            Predictor::BoundBStar { .. } => "B*",
            Predictor::CrudeOffLine { .. } => "L0",
            Predictor::Theta { .. } => "thm2",
            Predictor::CharSum { .. } => "thm3",
            Predictor::CharSumDual { .. } => "thm3-dual",
        }
    }

    fn summary(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        match self {
            Predictor::BoundB { cfg, offset } => {
                format!("a={} t={} A={} offset={offset}", list(cfg.exponents()), list(cfg.shifts()), cfg.big_a())
            }
            Predictor::BoundBStar { cfg, y } | Predictor::CrudeOffLine { cfg, y, .. } => {
                format!("a={} t={} A={} y={y}", list(cfg.exponents()), list(cfg.shifts()), cfg.big_a())
            }
            Predictor::Theta { k, parity, .. } => format!("k={k} parity={parity}"),
            Predictor::CharSum { k, y } | Predictor::CharSumDual { k, y } => match y {
                YMode::Sqrt => format!("k={k} y=sqrt"),
                YMode::Fixed(v) => format!("k={k} y={v}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub phi: u64,
    pub predictor: &'static str,
    pub config: String,
    pub sigma_offset: f64,
    /// characters summed over
    pub count: usize,
    pub empirical: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// characters whose term was zeroed or flagged
    pub warnings: usize,
    pub runtime_ms: f64,
}

/// Evaluates one predictor at one modulus.
pub fn moment_report(q: u64, predictor: &Predictor) -> Result<MomentReport> {
    if q < 3 {
        return Err(invalid("q", format!("q = {q} must be at least 3")));
    }
    let start = Instant::now();
    let phi = crate::arith::totient(q);
    let lq = (q as f64).ln();
    let off_line = |y: f64| -> Result<f64> {
        if !(y >= 2.0 && y <= q as f64) {
            return Err(invalid("y", format!("y = {y} must lie in [2, q]")));
        }
        Ok(1.0 / y.ln())
    };
    let (offset, count, empirical, predicted, warnings) = match predictor {
        Predictor::BoundB { cfg, offset } => {
            let m = shifted_moment(q, cfg, *offset)?;
            (*offset, m.count, m.moment, predicted_bound_b(q, phi, cfg), m.near_zero.len())
        }
        Predictor::BoundBStar { cfg, y } => {
            let off = off_line(*y)?;
            let m = shifted_moment(q, cfg, off)?;
            (off, m.count, m.moment, predicted_bound_b_star(phi, *y, cfg), m.near_zero.len())
        }
        Predictor::CrudeOffLine { cfg, y, exponent } => {
            let off = off_line(*y)?;
            let m = shifted_moment(q, cfg, off)?;
            let l0 = (y.ln() + 1.0).min(lq);
            (off, m.count, m.moment, phi as f64 * l0.powf(*exponent), m.near_zero.len())
        }
        Predictor::Theta { k, parity, eps } => {
            let chars = primitive_characters(q, Some(*parity));
            let m = theta_moment_over(&chars, *k, *eps)?;
            (0.0, m.count, m.moment, theta_moment_bound(q, phi, *k, *parity), m.near_zero + m.empty_class as usize)
        }
        Predictor::CharSum { k, y } | Predictor::CharSumDual { k, y } => {
            let yv = y.resolve(q);
            if !(yv >= 1.0) {
                return Err(invalid("y", format!("y = {yv} must be at least 1")));
            }
            let chars = primitive_characters(q, None);
            let m = char_sum_moment_over(&chars, *k, yv)?;
            let log_factor = match predictor {
                Predictor::CharSum { .. } => yv.ln(),
                _ => (2.0 * q as f64 / yv).ln(),
            };
            let predicted = phi as f64 * yv.powf(*k) * log_factor.powf((k - 1.0) * (k - 1.0));
            (0.0, chars.len(), m, predicted, 0)
        }
    };
    Ok(MomentReport {
        q,
        phi,
        predictor: predictor.label(),
        config: predictor.summary(),
        sigma_offset: offset,
        count,
        empirical,
        predicted,
        ratio: empirical / predicted,
        warnings,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One report per modulus, in the order given.
pub fn moment_ratio_scan(q_list: &[u64], predictor: &Predictor) -> Result<Vec<MomentReport>> {
    if q_list.is_empty() {
        return Err(invalid("q-range", "no moduli to scan"));
    }
    q_list.par_iter().map(|&q| moment_report(q, predictor)).collect()
}

/// max ratio / min ratio over the finite positive ratios.
pub fn ratio_band(reports: &[MomentReport]) -> f64 {
    let good: Vec<f64> = reports.iter().map(|r| r.ratio).filter(|r| r.is_finite() && *r > 0.0).collect();
    if good.is_empty() {
        return f64::NAN;
    }
    let hi = good.iter().cloned().fold(f64::MIN, f64::max);
    let lo = good.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}
