//! Daubechies filter banks and the single-level periodic DWT.
//!
//! The lowpass filter of order N is built from its frequency response
//! `H(w) = sqrt(2) ((1 + e^-iw) / 2)^N L(e^-iw)` with
//! `|L|^2 = P(sin^2(w/2))` and `P(y) = sum_{k<N} C(N-1+k, k) y^k`.
//! Each root `y` of `P` maps to a pair `r, 1/r` through
//! `y = (2 - r - 1/r) / 4`; keeping the root inside the unit circle gives the
//! minimal-phase filter.

use nalgebra::{Complex, ComplexField};

use super::{DspError, Result};

/// Orthogonal analysis filters of a Daubechies wavelet.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub order: u8,
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

type C64 = Complex<f64>;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Roots of a real polynomial given by ascending coefficients (Durand-Kerner).
fn poly_roots(coeffs: &[f64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..deg).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let denom = (0..deg)
                .filter(|&j| j != i)
                .fold(C64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.modulus());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Minimal-phase Daubechies filters with `order` vanishing moments (db1..db4).
pub fn daubechies_filters(order: u8) -> Result<FilterPair> {
    if !(1..=4).contains(&order) {
        return Err(DspError::UnsupportedOrder(order));
    }
    let n = u64::from(order);
    let one = C64::new(1.0, 0.0);
    // (1 + w)^N in powers of w = z^-1.
    let mut h: Vec<C64> = vec![one];
    for _ in 0..n {
        h = poly_mul(&h, &[one, one]);
    }
    if n > 1 {
        let p: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
        for y in poly_roots(&p) {
            // r + 1/r = 2 - 4y; keep |r| < 1.
            let s = C64::new(2.0, 0.0) - y * 4.0;
            let disc = (s * s - 4.0).sqrt();
            let (r1, r2) = ((s + disc) / 2.0, (s - disc) / 2.0);
            let r = if r1.modulus() < r2.modulus() { r1 } else { r2 };
            h = poly_mul(&h, &[one, -r]);
        }
    }
    let sum: f64 = h.iter().map(|c| c.re).sum();
    let lowpass: Vec<f64> = h.iter().map(|c| c.re * std::f64::consts::SQRT_2 / sum).collect();
    let len = lowpass.len();
    let highpass = (0..len)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * lowpass[len - 1 - k])
        .collect();
    Ok(FilterPair {
        order,
        lowpass,
        highpass,
    })
}

fn pad_even(signal: &[f64]) -> std::borrow::Cow<'_, [f64]> {
    if signal.len() % 2 == 1 {
        let mut v = signal.to_vec();
        v.push(0.0);
        v.into()
    } else {
        signal.into()
    }
}

/// One level of the periodic DWT. Odd-length input is zero-padded by one sample.
///
/// `approx[n] = sum_k lowpass[k] x[(2n + k) mod N]`, likewise `detail` with the highpass.
pub fn dwt_level1(signal: &[f64], order: u8) -> Result<(Vec<f64>, Vec<f64>)> {
    let filters = daubechies_filters(order)?;
    dwt_with(signal, &filters)
}

pub fn dwt_with(signal: &[f64], filters: &FilterPair) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.is_empty() {
        return Err(DspError::EmptySignal);
    }
    let x = pad_even(signal);
    let n = x.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for (i, (a, d)) in approx.iter_mut().zip(detail.iter_mut()).enumerate() {
        for (k, (lo, hi)) in filters.lowpass.iter().zip(&filters.highpass).enumerate() {
            let v = x[(2 * i + k) % n];
            *a += lo * v;
            *d += hi * v;
        }
    }
    Ok((approx, detail))
}

/// Inverse of [`dwt_level1`] (synthesis with the transposed filter bank).
pub fn idwt_level1(approx: &[f64], detail: &[f64], order: u8) -> Result<Vec<f64>> {
    let filters = daubechies_filters(order)?;
    if approx.len() != detail.len() {
        return Err(DspError::LengthMismatch {
            approx: approx.len(),
            detail: detail.len(),
        });
    }
    if approx.is_empty() {
        return Err(DspError::EmptySignal);
    }
    let n = 2 * approx.len();
    let mut x = vec![0.0; n];
    for (i, (a, d)) in approx.iter().zip(detail).enumerate() {
        for (k, (lo, hi)) in filters.lowpass.iter().zip(&filters.highpass).enumerate() {
            x[(2 * i + k) % n] += lo * a + hi * d;
        }
    }
    Ok(x)
}
