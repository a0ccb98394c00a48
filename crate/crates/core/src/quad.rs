//! Gauss–Kronrod (7, 15) quadrature for vector-valued complex integrands.
//!
//! Integrands return one value per "channel" (e.g. per character), so that an
//! expensive shared evaluation, such as a table of Hurwitz values, is done
//! once per node for every channel.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One GK15 rule application.
#[derive(Debug, Clone)]
pub struct PanelResult {
    pub kronrod: Vec<Complex64>,
    /// max over channels of |Kronrod − Gauss|
    pub error: f64,
    /// max over nodes and channels of |f|
    pub max_abs: f64,
}

pub fn gk15<F>(f: &mut F, a: f64, b: f64) -> PanelResult
where
    F: FnMut(f64) -> Vec<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let channels = fc.len();
    let mut kron: Vec<Complex64> = fc.iter().map(|&v| v * WGK[7]).collect();
    let mut gauss: Vec<Complex64> = fc.iter().map(|&v| v * WG[3]).collect();
    let mut max_abs = fc.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..channels {
            let s = f1[c] + f2[c];
            kron[c] += s * WGK[j];
            if j % 2 == 1 {
                gauss[c] += s * WG[j / 2];
            }
            max_abs = max_abs.max(f1[c].norm()).max(f2[c].norm());
        }
    }
    let mut error: f64 = 0.0;
    for c in 0..channels {
        kron[c] *= half;
        gauss[c] *= half;
        error = error.max((kron[c] - gauss[c]).norm());
    }
    PanelResult { kronrod: kron, error, max_abs }
}

/// Integrates over `[a, b]`, bisecting while the panel error exceeds `tol`
/// (scaled by the panel's share of the interval) up to `max_depth` levels.
pub fn adaptive<F>(f: &mut F, a: f64, b: f64, tol: f64, max_depth: u32) -> PanelResult
where
    F: FnMut(f64) -> Vec<Complex64>,
{
    let whole = gk15(f, a, b);
    if whole.error <= tol || max_depth == 0 {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, a, mid, 0.5 * tol, max_depth - 1);
    let right = adaptive(f, mid, b, 0.5 * tol, max_depth - 1);
    PanelResult {
        kronrod: left.kronrod.iter().zip(&right.kronrod).map(|(l, r)| l + r).collect(),
        error: left.error + right.error,
        max_abs: left.max_abs.max(right.max_abs),
    }
}
