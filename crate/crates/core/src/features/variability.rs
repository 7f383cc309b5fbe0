use crate::{Error, Result};

/// Coefficient of variation `sd / mean` with the sample (n − 1) standard
/// deviation.
pub fn variability(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Degenerate(format!("variability needs at least 2 values, got {}", values.len())));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean.abs() <= 1e-9 {
        return Err(Error::Degenerate(format!("variability undefined for mean {mean:.3e}")));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((ss / (n - 1.0)).sqrt() / mean)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(variability(&[1.0, 2.0, 3.0]).unwrap(), 0.5);
        assert_eq!(variability(&[4.2; 7]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(variability(&[1.0]), Err(Error::Degenerate(_))));
        assert!(matches!(variability(&[-1.0, 1.0]), Err(Error::Degenerate(_))));
    }

    proptest! {
        #[test]
        fn scale_invariant(xs in prop::collection::vec(0.5..2.0f64, 2..40), c in 0.01..100.0f64) {
            let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
            let (a, b) = (variability(&xs).unwrap(), variability(&scaled).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            prop_assert!(a >= 0.0);
        }
    }
}
