//! Number formatting for reports.

/// `%.{digits}g` formatting: shortest of fixed or scientific notation with
/// `digits` significant digits and trailing zeros removed.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    // Round first so that the exponent reflects any carry into a new decade.
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Report value: 10 significant digits, with magnitudes below `1e-14`
/// printed as `0`.
pub fn report(v: f64) -> String {
    if v.abs() < 1e-14 {
        "0".into()
    } else {
        fmt_sig(v, 10)
    }
}

/// Machine-readable value: shortest text that parses back to `v`.
pub fn exact(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || (1e-5..1e16).contains(&m) || !m.is_finite() {
        format!("{v:?}")
    } else {
        format!("{v:e}")
    }
}

/// Error estimates: three significant digits, never zeroed.
pub fn estimate(v: f64) -> String {
    fmt_sig(v, 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.5, "0.5"),
            (0.18393972058572117, "0.1839397206"),
            (std::f64::consts::SQRT_2, "1.414213562"),
            (-1.0, "-1"),
            (123456789.0, "123456789"),
            (12345678901.0, "1.23456789e+10"),
            (9.99999999999, "10"),
            (0.0001234, "0.0001234"),
            (0.00001234, "1.234e-05"),
            (1e-300, "1e-300"),
            (-2.5e-7, "-2.5e-07"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_sig(v, 10), want, "{v}");
        }
        assert_eq!(fmt_sig(f64::NAN, 10), "NaN");
    }

    #[test]
    fn report_hides_roundoff() {
        assert_eq!(report(4.4e-16), "0");
        assert_eq!(report(-3e-15), "0");
        assert_eq!(report(2e-14), "2e-14");
        assert_eq!(report(0.49999999999999245), "0.5");
    }

    #[test]
    fn exact_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678, 1e20, 0.0] {
            assert_eq!(exact(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(exact(0.5), "0.5");
        assert_eq!(exact(1.0), "1.0");
        assert_eq!(exact(3.6e-16), "3.6e-16");
    }
}
