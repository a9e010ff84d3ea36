//! Area hyperbolic sine variance-stabilizing transform with (median, MAD)
//! normalization.

use crate::error::{Error, Result};

/// Scales the MAD to a standard-deviation estimate under normality.
pub const MAD_SCALE: f64 = 1.4826;

/// Robust location/scale fitted on one calibration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub med: f64,
    pub mad: f64,
}

/// Median of `values`; even lengths average the two central order statistics.
/// `values` is reordered.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

impl Normalizer {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("normalizer window"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("normalizer window contains non-finite values".into()));
        }
        let mut buf = values.to_vec();
        let med = median_in_place(&mut buf);
        for (b, v) in buf.iter_mut().zip(values) {
            *b = (v - med).abs();
        }
        let mad = median_in_place(&mut buf);
        Ok(Self { med, mad })
    }

    pub fn is_degenerate(&self) -> bool {
        self.mad <= 0.0
    }

    pub fn scale(&self) -> f64 {
        MAD_SCALE * self.mad
    }

    fn check(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateNormalizer { median: self.med })
        } else {
            Ok(())
        }
    }

    pub fn transform(&self, value: f64) -> Result<f64> {
        self.check()?;
        Ok(((value - self.med) / self.scale()).asinh())
    }

    /// Plain `sinh` back-transform, without any bias correction.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.check()?;
        Ok(self.scale() * y.sinh() + self.med)
    }

    pub fn transform_all(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        let s = self.scale();
        Ok(values.iter().map(|v| ((v - self.med) / s).asinh()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn fit_symmetric_sequence() {
        let n = Normalizer::fit(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((n.med, n.mad), (3.0, 1.0));
    }

    #[test]
    fn even_length_median() {
        let n = Normalizer::fit(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(n.med, 2.5);
        assert_eq!(n.mad, 1.0);
    }

    #[test]
    fn constant_window_is_degenerate() {
        let n = Normalizer::fit(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!((n.med, n.mad), (7.0, 0.0));
        assert!(n.is_degenerate());
        assert!(matches!(n.transform(7.0), Err(Error::DegenerateNormalizer { .. })));
        assert!(n.inverse(0.0).is_err());
    }

    #[test]
    fn empty_window_errors() {
        assert!(matches!(Normalizer::fit(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn scale_is_consistent_for_normal_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = Normalizer::fit(&draws).unwrap();
        assert!((n.scale() - 1.0).abs() < 0.05, "scale {}", n.scale());
    }

    #[test]
    fn closed_form_values() {
        let n = Normalizer { med: 50.0, mad: 30.0 };
        assert_eq!(n.transform(50.0).unwrap(), 0.0);
        let one = n.transform(50.0 + 1.4826 * 30.0).unwrap();
        assert!((one - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12);
        assert!((one - 0.881373587019543).abs() < 1e-12);
        let neg = n.transform(-500.0).unwrap();
        assert!(neg.is_finite() && neg < 0.0);
        assert_eq!(n.inverse(0.0).unwrap(), 50.0);
        assert!((n.inverse(1f64.asinh()).unwrap() - (50.0 + 1.4826 * 30.0)).abs() < 1e-10);
    }

    #[test]
    fn window_transform_has_zero_median() {
        let vals: Vec<f64> = (0..101).map(|i| ((i * 37) % 101) as f64 * 0.7 - 20.0).collect();
        let n = Normalizer::fit(&vals).unwrap();
        let mut t = n.transform_all(&vals).unwrap();
        assert!(median_in_place(&mut t).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip(v in -1e6f64..1e6, med in -100f64..300.0, mad in 0.01f64..200.0) {
            let n = Normalizer { med, mad };
            let back = n.inverse(n.transform(v).unwrap()).unwrap();
            prop_assert!((back - v).abs() <= 1e-10 * v.abs().max(1.0));
        }

        #[test]
        fn strictly_increasing(a in -1e5f64..1e5, b in -1e5f64..1e5) {
            let n = Normalizer { med: 40.0, mad: 12.0 };
            prop_assume!(b - a > 1e-9 * (1.0 + a.abs()));
            prop_assert!(n.transform(a).unwrap() < n.transform(b).unwrap());
        }
    }
}
