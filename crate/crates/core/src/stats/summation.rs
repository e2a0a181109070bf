const BLOCK: usize = 64;

/// Pairwise (cascade) summation with a fixed split, so the result depends
/// only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and its standard error `s/√m`.
///
/// The standard error is `NaN` for fewer than two samples.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / m as f64;
    if m < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.5]), 6.5);
        let (m, se) = mean_and_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-15);
        assert!(mean_and_se(&[]).0.is_nan());
        assert!(mean_and_se(&[4.0]).1.is_nan());
    }

    #[test]
    fn pairwise_beats_naive_accumulation() {
        let xs = vec![0.1; 1_000_000];
        let exact = 100_000.0;
        let naive: f64 = xs.iter().fold(0.0, |a, b| a + b);
        assert!((pairwise_sum(&xs) - exact).abs() < (naive - exact).abs());
        assert!((pairwise_sum(&xs) - exact).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn close_to_exact_sum(xs in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
            let plain: f64 = xs.iter().sum();
            prop_assert!((pairwise_sum(&xs) - plain).abs() <= 1e-9);
        }
    }
}
