use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// `sup_x |F1(x) - F2(x)|`.
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² x²)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let a2 = -2.0 * x * x;
    let mut sign = 2.0;
    let mut sum = 0.0;
    let mut previous = 0.0;
    for j in 1..=100 {
        let term = sign * (a2 * f64::from(j * j)).exp();
        sum += term;
        if term.abs() <= 1e-10 * previous || term.abs() <= 1e-16 * sum.abs() {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        previous = term.abs();
    }
    // the series has not converged: x is tiny and Q(x) is indistinguishable from 1
    1.0
}

fn sorted_finite(xs: &[f64], which: &str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::InvalidInput(format!("KS test: {which} sample is empty")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("KS test: {which} sample has non-finite values")));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov test.
///
/// The statistic is exact (one merged sweep over both sorted samples, stepping
/// past ties together). The p-value uses the asymptotic Kolmogorov
/// distribution at effective size `n1·n2/(n1+n2)` with the Stephens
/// small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted_finite(a, "first")?;
    let b = sorted_finite(b, "second")?;
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = a[i].min(b[j]);
        while i < n1 && a[i] == x {
            i += 1;
        }
        while j < n2 && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let sq = ne.sqrt();
    let p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    Ok(KsResult {
        statistic: d,
        p_value,
        n1,
        n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Evaluates both ECDFs at every sample point and just below it.
    pub(crate) fn brute_force_d(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let ecdf_left = |s: &[f64], x: f64| s.iter().filter(|&&v| v < x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .flat_map(|&x| [(ecdf(a, x) - ecdf(b, x)).abs(), (ecdf_left(a, x) - ecdf_left(b, x)).abs()])
            .fold(0.0, f64::max)
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 2.0, 2.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_support() {
        let r = ks_two_sample(&[0.0; 30], &[1.0; 40]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn hand_checked_half() {
        let r = ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert_eq!(brute_force_d(&[1.0, 2.0], &[1.5, 2.5]), 0.5);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn survival_reference_values() {
        // Q(1) and Q(0.5), from the alternating series summed to convergence
        assert!((kolmogorov_survival(1.0) - 0.269_999_671_677_9).abs() < 1e-9);
        assert!((kolmogorov_survival(0.5) - 0.963_945_243_664_1).abs() < 1e-9);
        assert!(kolmogorov_survival(5.0) < 1e-20);
    }

    proptest::proptest! {
        #[test]
        fn sweep_matches_brute_force(
            a in proptest::collection::vec(0u8..20, 1..50),
            b in proptest::collection::vec(0u8..20, 1..50),
            shift in -100.0f64..100.0,
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let d = ks_two_sample(&a, &b).unwrap().statistic;
            proptest::prop_assert_eq!(d, brute_force_d(&a, &b));
            proptest::prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap().statistic);
            let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
            proptest::prop_assert_eq!(d, ks_two_sample(&a2, &b2).unwrap().statistic);
        }
    }
}
