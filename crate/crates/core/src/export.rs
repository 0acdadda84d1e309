//! Plain-text output helpers shared by the CSV writers.

/// Formats `x` with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn formatted_values_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
