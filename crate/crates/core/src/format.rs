//! Number formatting shared by the CSV and text reports.

/// Formats `x` with `digits` significant digits using C `%g` rules: fixed
/// notation unless the exponent is below -4 or at least `digits`, trailing
/// zeros trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `sig(x, 9)`, the precision used for feature tables.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.583_237_5), "0.5832375");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(9331.8), "9331.8");
        assert_eq!(sig9(-2.0f64.sqrt()), "-1.41421356");
        assert_eq!(sig9(6.214e-9), "6.214e-09");
        assert_eq!(sig9(1.234_567_891e12), "1.23456789e+12");
        assert_eq!(sig9(123_456_789.0), "123456789");
        assert_eq!(sig9(0.0001), "0.0001");
        assert_eq!(sig(0.066_666, 3), "0.0667");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }
}
