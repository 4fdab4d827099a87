//! Float formatting shared by every CSV and report writer.

/// Shortest decimal string that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-20, 6.02e23, -0.0, 123456789.125, f64::MIN_POSITIVE] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(float(0.5), "0.5");
        assert_eq!(float(2.0), "2.0");
    }
}
