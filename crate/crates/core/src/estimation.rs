//! Growth-rate estimation on top of separation counts: log-log power-law
//! fits, scale-family entropies via bisection, and exponential-rate checks.
//!
//! Tail conventions matter here.  Every asymptotic proxy (scale entropy,
//! exponential rate) evaluates only samples with n > n_max / 2, so early
//! transients cannot manufacture growth that the tail does not show.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Least-squares fit of y against x with the coefficient of determination.
/// A zero-variance response is a perfect fit of the constant model.
fn ols<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = T::from_usize_exact(xs.len());
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, b| a + *b) / n;
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (*x - mx, *y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if syy == T::zero() {
        return (T::zero(), my, T::one());
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        let r = *y - (intercept + slope * *x);
        ss_res = ss_res + r * r;
    }
    (slope, intercept, T::one() - ss_res / syy)
}

#[derive(Clone, Debug)]
pub struct GrowthEstimate<T: Scalar> {
    /// Fitted exponent of count ~ n^slope.
    pub slope: T,
    /// Fitted log-log offset.
    pub intercept: T,
    pub r_squared: T,
    /// Slopes between consecutive samples.
    pub local_slopes: Vec<T>,
    pub n_min: usize,
    pub n_max: usize,
}

fn validated_logs<T: Scalar>(samples: &[(usize, usize)]) -> Result<(Vec<T>, Vec<T>)> {
    if samples.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "power-law fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::DegenerateInput(format!(
                "horizons must be strictly increasing, got {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(n, c) in samples {
        if n == 0 || c == 0 {
            return Err(Error::DegenerateInput(format!(
                "sample ({n}, {c}) has no logarithm"
            )));
        }
        xs.push(T::from_usize_exact(n).ln());
        ys.push(T::from_usize_exact(c).ln());
    }
    Ok((xs, ys))
}

/// Fit count ~ C * n^s on (horizon, count) samples with ascending horizons.
pub fn fit_power_law<T: Scalar>(samples: &[(usize, usize)]) -> Result<GrowthEstimate<T>> {
    let (xs, ys) = validated_logs::<T>(samples)?;
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    let local_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    Ok(GrowthEstimate {
        slope,
        intercept,
        r_squared,
        local_slopes,
        n_min: samples[0].0,
        n_max: samples[samples.len() - 1].0,
    })
}

#[derive(Clone, Debug)]
pub struct AmorphicEstimate<T: Scalar> {
    /// Fitted exponent of count ~ (1 / nu)^slope.
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub local_slopes: Vec<T>,
    pub nu_min: T,
    pub nu_max: T,
}

/// Fit count ~ C * (1 / nu)^s on (nu, count) samples, nu descending.
pub fn amorphic_fit<T: Scalar>(samples: &[(T, usize)]) -> Result<AmorphicEstimate<T>> {
    if samples.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "amorphic fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(nu, c) in samples {
        if !(nu > T::zero() && nu <= T::one()) || c == 0 {
            return Err(Error::DegenerateInput(format!(
                "sample ({nu}, {c}) has no logarithm"
            )));
        }
        xs.push(-nu.ln());
        ys.push(T::from_usize_exact(c).ln());
    }
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::DegenerateInput(
                "frequency thresholds must be strictly decreasing".into(),
            ));
        }
    }
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    let local_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    Ok(AmorphicEstimate {
        slope,
        intercept,
        r_squared,
        local_slopes,
        nu_min: samples[samples.len() - 1].0,
        nu_max: samples[0].0,
    })
}

#[derive(Clone, Debug)]
pub struct EntropyEstimate<T: Scalar> {
    pub per_delta: Vec<(T, GrowthEstimate<T>)>,
    /// Slow-entropy proxy: the steepest per-delta growth exponent.
    pub aggregate_slope: T,
}

/// Power-law growth per separation threshold, aggregated over thresholds.
pub fn entropy_estimate<T: Scalar>(
    per_delta: &[(T, Vec<(usize, usize)>)],
) -> Result<EntropyEstimate<T>> {
    if per_delta.is_empty() {
        return Err(Error::DegenerateInput("no thresholds to aggregate".into()));
    }
    let mut fits = Vec::with_capacity(per_delta.len());
    for (delta, samples) in per_delta {
        fits.push((*delta, fit_power_law(samples)?));
    }
    let aggregate_slope = fits
        .iter()
        .map(|(_, g)| g.slope)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    Ok(EntropyEstimate {
        per_delta: fits,
        aggregate_slope,
    })
}

/// Scale family a(s, n) used to calibrate separation growth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleFamily {
    /// a(s, n) = n^s.
    Polynomial,
    /// a(s, n) = e^(s n).
    Exponential,
}

impl ScaleFamily {
    pub fn value<T: Scalar>(&self, s: T, n: usize) -> T {
        match self {
            ScaleFamily::Polynomial => (s * T::from_usize_exact(n).ln()).exp(),
            ScaleFamily::Exponential => (s * T::from_usize_exact(n)).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScaleFamily::Polynomial => "polynomial",
            ScaleFamily::Exponential => "exponential",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Critical s for the limsup proxy max over the tail.
    Upper,
    /// Critical s for the liminf proxy min over the tail.
    Lower,
}

const BISECTION_STEPS: usize = 100;
const MAX_BRACKET: f64 = 1048576.0;

/// Critical scale parameter: the s at which the tail ratio count / a(s, n)
/// crosses 1.  The tail is the samples with n > n_max / 2.
pub fn scale_entropy<T: Scalar>(
    family: ScaleFamily,
    samples: &[(usize, usize)],
    bound: Bound,
) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::DegenerateInput("no samples".into()));
    }
    let n_max = samples.iter().map(|s| s.0).max().unwrap();
    if n_max < 2 {
        return Err(Error::DegenerateInput(
            "scale entropy needs horizons beyond 1".into(),
        ));
    }
    let tail: Vec<(usize, usize)> = samples
        .iter()
        .copied()
        .filter(|&(n, _)| n > n_max / 2)
        .collect();
    for &(n, c) in &tail {
        if n == 0 || c == 0 {
            return Err(Error::DegenerateInput(format!(
                "tail sample ({n}, {c}) is degenerate"
            )));
        }
    }
    let ratio = |s: T| -> T {
        let vals = tail
            .iter()
            .map(|&(n, c)| T::from_usize_exact(c) / family.value(s, n));
        match bound {
            Bound::Upper => vals.fold(T::zero(), |a, b| a.max(b)),
            Bound::Lower => vals.fold(T::infinity(), |a, b| a.min(b)),
        }
    };

    // Counts are >= 1, so s = 0 always sits on the unbounded side.
    let mut lo = T::zero();
    let mut hi = T::one();
    while ratio(hi) >= T::one() {
        hi = hi + hi;
        if hi.as_f64() > MAX_BRACKET {
            return Err(Error::BracketFailure {
                family: family.name().into(),
                detail: format!("no s <= {MAX_BRACKET} tames the tail"),
            });
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) * T::half();
        if ratio(mid) >= T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

/// Largest tail value of ln(count) / n; near zero for subexponential growth.
pub fn exponential_rate<T: Scalar>(samples: &[(usize, usize)]) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::DegenerateInput("no samples".into()));
    }
    let n_max = samples.iter().map(|s| s.0).max().unwrap();
    let mut rate = T::neg_infinity();
    let mut hits = 0usize;
    for &(n, c) in samples {
        if n > n_max / 2 {
            if n == 0 || c == 0 {
                return Err(Error::DegenerateInput(format!(
                    "tail sample ({n}, {c}) is degenerate"
                )));
            }
            rate = rate.max(T::from_usize_exact(c).ln() / T::from_usize_exact(n));
            hits += 1;
        }
    }
    debug_assert!(hits > 0, "n_max itself is always in the tail");
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn collinear_square_root_growth() {
        let samples: Vec<(usize, usize)> =
            (1..=8).map(|k| (4usize.pow(k), 2usize.pow(k))).collect();
        let g: GrowthEstimate<f64> = fit_power_law(&samples).unwrap();
        assert_relative_eq!(g.slope, 0.5, epsilon = 1e-12);
        assert_relative_eq!(g.r_squared, 1.0, epsilon = 1e-12);
        assert!(g.local_slopes.iter().all(|s| (s - 0.5).abs() < 1e-12));
        assert_eq!(g.n_min, 4);
        assert_eq!(g.n_max, 4usize.pow(8));
    }

    #[test]
    fn rounded_square_root_growth() {
        let samples: Vec<(usize, usize)> = (4..=14)
            .map(|k| {
                let n = 1usize << k;
                (n, (n as f64).sqrt().round() as usize)
            })
            .collect();
        let g: GrowthEstimate<f64> = fit_power_law(&samples).unwrap();
        assert!((g.slope - 0.5).abs() < 0.02, "slope = {}", g.slope);
        assert!(g.r_squared > 0.999);
    }

    #[test]
    fn constant_counts_are_a_perfect_flat_fit() {
        let samples = vec![(16, 4), (32, 4), (64, 4), (128, 4)];
        let g: GrowthEstimate<f64> = fit_power_law(&samples).unwrap();
        assert_eq!(g.slope, 0.0);
        assert_eq!(g.r_squared, 1.0);
        assert!(g.local_slopes.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn fit_input_validation() {
        assert!(fit_power_law::<f64>(&[(1, 1), (2, 2)]).is_err());
        assert!(fit_power_law::<f64>(&[(1, 1), (2, 0), (4, 2)]).is_err());
        assert!(fit_power_law::<f64>(&[(4, 1), (2, 2), (8, 3)]).is_err());
        assert!(fit_power_law::<f64>(&[(2, 1), (2, 2), (8, 3)]).is_err());
    }

    #[test]
    fn amorphic_doubling() {
        let samples: Vec<(f64, usize)> = (1..=6)
            .map(|k| (0.5f64.powi(k), 4usize.pow(k as u32)))
            .collect();
        let a = amorphic_fit(&samples).unwrap();
        assert_relative_eq!(a.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(a.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(a.nu_max, 0.5);
        assert!(amorphic_fit::<f64>(&[(0.5, 1), (0.5, 2), (0.125, 3)]).is_err());
        assert!(amorphic_fit::<f64>(&[(0.5, 1), (1.5, 2), (0.1, 3)]).is_err());
    }

    #[test]
    fn entropy_aggregates_the_steepest_threshold() {
        let per_delta = vec![
            (0.5_f64, vec![(4, 2), (16, 4), (64, 8)]),
            (0.25, vec![(4, 4), (16, 16), (64, 64)]),
        ];
        let e = entropy_estimate(&per_delta).unwrap();
        assert_relative_eq!(e.aggregate_slope, 1.0, epsilon = 1e-12);
        assert_eq!(e.per_delta.len(), 2);
    }

    #[test]
    fn scale_families_are_monotone_in_s() {
        for family in [ScaleFamily::Polynomial, ScaleFamily::Exponential] {
            for n in [2usize, 7, 100] {
                let mut prev = 0.0_f64;
                for i in 1..=20 {
                    let v = family.value(0.3 * i as f64, n);
                    assert!(v > prev);
                    prev = v;
                }
            }
        }
        assert_relative_eq!(
            ScaleFamily::Polynomial.value(2.0_f64, 10),
            100.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn polynomial_scale_entropy_recovers_the_exponent() {
        let samples: Vec<(usize, usize)> =
            (1..=8).map(|k| (4usize.pow(k), 2usize.pow(k))).collect();
        let s: f64 = scale_entropy(ScaleFamily::Polynomial, &samples, Bound::Upper).unwrap();
        assert!((s - 0.5).abs() < 1e-6, "s = {s}");
        let s: f64 = scale_entropy(ScaleFamily::Polynomial, &samples, Bound::Lower).unwrap();
        assert!((s - 0.5).abs() < 1e-6);
    }

    #[test]
    fn linear_counts_with_a_constant_sit_above_one() {
        let short: Vec<(usize, usize)> = (4..=8).map(|k| (1usize << k, 3 << k)).collect();
        let long: Vec<(usize, usize)> = (4..=16).map(|k| (1usize << k, 3 << k)).collect();
        let s_short: f64 = scale_entropy(ScaleFamily::Polynomial, &short, Bound::Upper).unwrap();
        let s_long: f64 = scale_entropy(ScaleFamily::Polynomial, &long, Bound::Upper).unwrap();
        assert!(s_short > 1.0 && s_long > 1.0);
        // The constant's contribution ln(3)/ln(n) fades with the horizon.
        assert!(s_long < s_short);
        assert!((s_long - (1.0 + 3.0_f64.ln() / (16.0 * 2.0_f64.ln()))).abs() < 1e-6);
    }

    #[test]
    fn exponential_scale_entropy() {
        let samples: Vec<(usize, usize)> = (4..=10).map(|n| (n, 1usize << n)).collect();
        let s: f64 = scale_entropy(ScaleFamily::Exponential, &samples, Bound::Upper).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-6, "s = {s}");
    }

    #[test]
    fn scale_entropy_rejects_degenerate_horizons() {
        assert!(scale_entropy::<f64>(ScaleFamily::Polynomial, &[], Bound::Upper).is_err());
        assert!(scale_entropy::<f64>(ScaleFamily::Polynomial, &[(1, 5)], Bound::Upper).is_err());
    }

    #[test]
    fn exponential_rate_examples() {
        let doubling: Vec<(usize, usize)> = (4..=10).map(|n| (n, 1usize << n)).collect();
        let r: f64 = exponential_rate(&doubling).unwrap();
        assert_relative_eq!(r, std::f64::consts::LN_2, epsilon = 1e-12);

        let flat: Vec<(usize, usize)> = (1..=12).map(|k| (1usize << k, 4)).collect();
        let r: f64 = exponential_rate(&flat).unwrap();
        assert_relative_eq!(r, 4.0_f64.ln() / 4096.0, epsilon = 1e-12);
        assert!(r < 0.01);
    }
}
