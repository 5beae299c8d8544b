//! Log-space upper incomplete gamma function and the adaptive quadrature it
//! leans on for small arguments.

use crate::error::{Error, Result};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * K15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of a smooth integrand on a
/// finite interval, to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_SEGMENTS: usize = 2000;
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![(a, b, gauss_kronrod(&f, a, b))];
    loop {
        let total: f64 = segments.iter().map(|s| s.2 .0).sum();
        let err: f64 = segments.iter().map(|s| s.2 .1).sum();
        if err <= rel_tol * total.abs() || err < f64::MIN_POSITIVE {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total:e}, error {err:e} after {} segments",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = segments.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        segments.push((lo, m, gauss_kronrod(&f, lo, m)));
        segments.push((m, hi, gauss_kronrod(&f, m, hi)));
    }
}

/// `ln Gamma(a, z)` by the Legendre continued fraction (modified Lentz).
/// Converges for every real `a` once `z` is past `max(a + 1, 1)`.
fn ln_upper_gamma_cf(a: f64, z: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const MAX_ITER: usize = 10_000;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(-z + a * z.ln() + h.ln());
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma continued fraction did not converge for a = {a}, z = {z}"
    )))
}

fn log_add(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// Natural log of the upper incomplete gamma function
/// `Gamma(a, z) = int_z^inf u^(a-1) e^(-u) du` for any real `a` and `z > 0`.
///
/// Past the cutoff `z1 = max(a + 1, 1)` the continued fraction is used
/// directly. Below it the segment `[z, z1]` is integrated in the variable
/// `v = ln u`, where the integrand `exp(a v - e^v)` is smooth, and the
/// continued fraction supplies the tail.
pub fn ln_upper_gamma(a: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !a.is_finite() || !z.is_finite() {
        return Err(Error::Numeric(format!(
            "incomplete gamma needs finite a and z > 0, got a = {a}, z = {z}"
        )));
    }
    let cutoff = (a + 1.0).max(1.0);
    if z >= cutoff {
        return ln_upper_gamma_cf(a, z);
    }
    let tail = ln_upper_gamma_cf(a, cutoff)?;
    let (v0, v1) = (z.ln(), cutoff.ln());
    let g = |v: f64| a * v - v.exp();
    // g is concave, peak at v = ln a when a > 0
    let peak = if a > 0.0 { a.ln().clamp(v0, v1) } else { v0 };
    let shift = g(peak);
    let segment = integrate(|v| (g(v) - shift).exp(), v0, v1, 1e-14)?;
    Ok(log_add(shift + segment.ln(), tail))
}
