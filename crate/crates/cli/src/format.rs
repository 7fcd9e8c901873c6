/// Formats `x` with six significant digits, `%g` style: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.326_214_751_205_778_75), "0.326215");
        assert_eq!(sig6(-2.566_582_489), "-2.56658");
        assert_eq!(sig6(123_456.7), "123457");
        assert_eq!(sig6(1_234_567.0), "1.23457e6");
        assert_eq!(sig6(0.000_012_345_67), "1.23457e-5");
        assert_eq!(sig6(0.000_123_456_7), "0.000123457");
        assert_eq!(sig6(9.999_999), "10");
        assert_eq!(sig6(999_999.7), "1e6");
        assert_eq!(sig6(1e-7), "1e-7");
    }
}
