/// Formats a float with 17 significant digits (round-trips every f64).
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an optional float, empty when absent.
pub fn f17_opt(x: Option<f64>) -> String {
    x.map(f17).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 38.0] {
            assert_eq!(f17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(f17_opt(None), "");
    }
}
