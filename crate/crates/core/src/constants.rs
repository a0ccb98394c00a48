//! Constants fixed by measurement before any assertion uses them.
//!
//! Each value was taken from a full oracle run of the quantity it bounds
//! (release build, single thread, the exact grids used by the acceptance
//! target) and rounded outward to two significant digits. The measured
//! extreme is recorded next to each constant. Reruns are deterministic, so
//! the same extremes reappear bit for bit.

/// |Σ_{p≤x} cos(α log p)/p − log|ζ(1 + 1/log x + iα)|| ≤ MERTENS_C0 for
/// x = 10^5 and α ∈ {0.01, 0.1, 1, 5, 20, 100}.
/// Measured maximum 0.332144 at α = 0.1.
pub const MERTENS_C0: f64 = 0.34;

/// log|L(½+it, χ)| ≤ majorant + MAJORANT_C1 for primes q ≤ 101, primitive χ,
/// t ∈ {0, 1}, x = q (2218 finite cases).
/// Measured maximum of the difference −0.456491: the majorant already
/// dominates with room to spare.
pub const MAJORANT_C1: f64 = -0.45;

/// |Σ_{n≤q/y} χ(n) − main term| ≤ POLYA_C2 · log q for every primitive χ
/// with q ≤ 500, y = √q, H = q.
/// Measured maximum residual / log q 0.139128 at q = 37.
pub const POLYA_C2: f64 = 0.14;

/// S⁺₆(q) / (φ(q) q^{3/2} (log q)^4) for primes q ∈ [100, 3000].
/// Measured range [1.07414e-4, 1.28669e-4], spread 1.198.
pub const THETA_RATIO_BAND: (f64, f64) = (1.0e-4, 1.4e-4);

/// S_3(q, √q) / (φ(q) y³ (log y)^4) for primes q ∈ [100, 3000].
/// Measured range [8.19588e-2, 1.98833e-1], spread 2.426.
pub const CHAR_SUM_RATIO_BAND: (f64, f64) = (8.0e-2, 2.0e-1);

/// Largest admissible max/min spread of a frozen ratio band.
pub const MAX_BAND_SPREAD: f64 = 10.0;
