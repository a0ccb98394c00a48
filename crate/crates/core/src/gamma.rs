//! Complex Gamma function.
//!
//! Lanczos approximation with `g = 671/128` and fifteen series terms
//! (constant plus fourteen poles), valid for `Re z >= 1/2`; the left half
//! plane goes through the reflection formula.

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 671.0 / 128.0;
const LANCZOS_C0: f64 = 0.999999999999997092;
const LANCZOS_COEFFS: [f64; 14] = [
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
];
const SQRT_TWO_PI: f64 = 2.5066282746310005024;

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let tmp = z + LANCZOS_G;
    let tmp = (z + 0.5) * tmp.ln() - tmp;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    for (j, &c) in LANCZOS_COEFFS.iter().enumerate() {
        ser += c / (z + (j + 1) as f64);
    }
    tmp + (ser * SQRT_TWO_PI / z).ln()
}

/// log Γ(z), on some branch; `exp` of it is Γ(z). Poles give `inf`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z) Γ(1 - z) = π / sin(πz)
        let s = (z * PI).sin();
        Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_right(Complex64::new(1.0, 0.0) - z)
    } else {
        ln_gamma_right(z)
    }
}

pub fn gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// Real Γ(x) for convenience.
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}
