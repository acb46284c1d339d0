/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn sci17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Scientific notation with 12 significant digits.
pub fn sci12(x: f64) -> String {
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0] {
            assert_eq!(sci17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(sci12(1.0), "1.00000000000e0");
    }
}
