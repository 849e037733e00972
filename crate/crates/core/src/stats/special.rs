use statrs::function::{beta, gamma};

use super::{Result, StatsError};

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(StatsError::Domain(format!("ln_gamma({x})")));
    }
    Ok(gamma::ln_gamma(x))
}

/// Upper tail P(X > x) of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 || x.is_nan() || x < 0.0 {
        return Err(StatsError::Domain(format!("chi_square_sf({x}, {df})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma::gamma_ur(f64::from(df) / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// Upper tail P(F > x) of the F distribution with (`d1`, `d2`) degrees of freedom.
pub fn f_sf(x: f64, d1: u32, d2: u32) -> Result<f64> {
    if d1 == 0 || d2 == 0 || x.is_nan() || x < 0.0 {
        return Err(StatsError::Domain(format!("f_sf({x}, {d1}, {d2})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (a, b) = (f64::from(d1), f64::from(d2));
    // P(F > x) = I_{d2 / (d2 + d1 x)}(d2/2, d1/2); use the complement form when the
    // argument is close to 1 to keep precision in the upper tail.
    let z = b / (b + a * x);
    let p = if z < 0.5 {
        beta::beta_reg(b / 2.0, a / 2.0, z)
    } else {
        1.0 - beta::beta_reg(a / 2.0, b / 2.0, a * x / (b + a * x))
    };
    Ok(p.clamp(0.0, 1.0))
}
