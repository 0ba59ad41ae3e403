//! Statistics kit: empirical CDF distances, the skew Brownian reference
//! distribution, quantiles, confidence intervals and QQ correlations.

use crate::numeric::KahanSum;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample must be nonempty")]
    EmptySample,
    #[error("parameter out of range: {0}")]
    Parameter(String),
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Skew Brownian motion at time `t` started at the membrane: transition
/// density `(1 + gamma sgn(y)) phi_t(y)`, `gamma` the permeability
/// parameter.
#[derive(Clone, Copy, Debug)]
pub struct SkewBmRef {
    gamma: f64,
    t: f64,
}

impl SkewBmRef {
    pub fn new(gamma: f64, t: f64) -> Result<Self, StatsError> {
        if !(-1.0..=1.0).contains(&gamma) {
            return Err(StatsError::Parameter(format!("gamma {gamma}")));
        }
        if t.is_nan() || t <= 0.0 {
            return Err(StatsError::Parameter(format!("t {t}")));
        }
        Ok(Self { gamma, t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let s = self.t.sqrt();
        (1.0 + self.gamma * y.signum()) * normal_pdf(y / s) / s
    }

    /// CDF: `(1-gamma) Phi(y/sqrt t)` for `y <= 0`, then
    /// `(1-gamma)/2 + (1+gamma)(Phi(y/sqrt t) - 1/2)` for `y > 0`.
    pub fn cdf(&self, y: f64) -> f64 {
        let z = normal_cdf(y / self.t.sqrt());
        if y <= 0.0 {
            (1.0 - self.gamma) * z
        } else {
            0.5 * (1.0 - self.gamma) + (1.0 + self.gamma) * (z - 0.5)
        }
    }

    /// `P{Y(t) > 0} = (1 + gamma) / 2`, independent of `t`.
    pub fn positive_mass(&self) -> f64 {
        0.5 * (1.0 + self.gamma)
    }
}

fn sort_unstable(sample: &mut [f64]) {
    sample.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
}

/// One-sample Kolmogorov-Smirnov distance between a sample and a reference
/// CDF: `max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut xs = sample.to_vec();
    sort_unstable(&mut xs);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov distance (sup distance between the two
/// empirical CDFs, evaluated by a sorted merge).
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_unstable(&mut xs);
    sort_unstable(&mut ys);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov quantile `c(alpha) = sqrt(-ln(alpha/2) / 2)`.
pub fn kolmogorov_quantile(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample critical value at level `alpha` for sample size `n`.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    kolmogorov_quantile(alpha) / (n as f64).sqrt()
}

/// Two-sample critical value through the effective-size formula
/// `n_eff = n m / (n + m)`.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let n_eff = (n as f64 * m as f64) / (n as f64 + m as f64);
    kolmogorov_quantile(alpha) / n_eff.sqrt()
}

/// Type-7 (linear interpolation) quantile of an unsorted sample.
pub fn quantile(sample: &[f64], q: f64) -> Result<f64, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(StatsError::Parameter(format!("quantile {q}")));
    }
    let mut xs = sample.to_vec();
    sort_unstable(&mut xs);
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(xs[lo] + frac * (xs[hi] - xs[lo]))
}

pub fn mean(sample: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in sample {
        acc.add(x);
    }
    acc.value() / sample.len() as f64
}

/// Sample mean with a z-interval half width at the given z score.
pub fn mean_ci(sample: &[f64], z: f64) -> Result<(f64, f64), StatsError> {
    if sample.len() < 2 {
        return Err(StatsError::EmptySample);
    }
    let m = mean(sample);
    let mut acc = KahanSum::new();
    for &x in sample {
        acc.add((x - m) * (x - m));
    }
    let var = acc.value() / (sample.len() - 1) as f64;
    Ok((m, z * (var / sample.len() as f64).sqrt()))
}

/// Wilson score interval for a binomial proportion.
pub fn binomial_ci(successes: u64, trials: u64, z: f64) -> Result<(f64, f64, f64), StatsError> {
    if trials == 0 {
        return Err(StatsError::EmptySample);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    Ok((p, (center - half).max(0.0), (center + half).min(1.0)))
}

/// z scores used by the experiments.
pub const Z_95: f64 = 1.959963984540054;
pub const Z_99: f64 = 2.5758293035489004;

/// Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(StatsError::EmptySample);
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy.add((x - mx) * (y - my));
        sxx.add((x - mx) * (x - mx));
        syy.add((y - my) * (y - my));
    }
    Ok(sxy.value() / (sxx.value() * syy.value()).sqrt())
}

/// QQ correlation of a sample against exponential quantiles
/// `-ln(1 - (i - 1/2)/n)`. Scale free, so only the shape is tested.
pub fn exponential_qq_correlation(sample: &[f64]) -> Result<f64, StatsError> {
    if sample.len() < 2 {
        return Err(StatsError::EmptySample);
    }
    let mut xs = sample.to_vec();
    sort_unstable(&mut xs);
    let n = xs.len();
    let qs: Vec<f64> = (0..n)
        .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
        .collect();
    pearson(&xs, &qs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-8.0) - 6.22096057427178e-16).abs() < 1e-18);
    }

    #[test]
    fn skew_cdf_reduces_to_gaussian_at_gamma_zero() {
        let skew = SkewBmRef::new(0.0, 2.0).unwrap();
        for i in 0..1000 {
            let y = -6.0 + 12.0 * i as f64 / 999.0;
            let expect = normal_cdf(y / 2.0f64.sqrt());
            assert!((skew.cdf(y) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn skew_cdf_is_a_valid_cdf_and_mass_integrates_to_one() {
        for &gamma in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            let skew = SkewBmRef::new(gamma, 1.0).unwrap();
            assert!(skew.cdf(-40.0).abs() < 1e-12);
            assert!((skew.cdf(40.0) - 1.0).abs() < 1e-12);
            let mut prev = -1.0;
            for i in 0..2000 {
                let y = -8.0 + 16.0 * i as f64 / 1999.0;
                let c = skew.cdf(y);
                assert!(c >= prev - 1e-15, "CDF must be nondecreasing");
                prev = c;
            }
            // Simpson quadrature per half line: the density jumps at 0
            let simpson = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
                let m = 12_000usize;
                let h = (b - a) / m as f64;
                let mut acc = KahanSum::new();
                for i in 0..=m {
                    let w = if i == 0 || i == m {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc.add(w * f(a + i as f64 * h));
                }
                acc.value() * h / 3.0
            };
            let phi = |y: f64| normal_pdf(y);
            let mass = (1.0 - gamma) * simpson(-12.0, 0.0, &phi)
                + (1.0 + gamma) * simpson(0.0, 12.0, &phi);
            assert!((mass - 1.0).abs() < 1e-9, "gamma {gamma}: mass {mass}");
        }
    }

    #[test]
    fn skew_positive_mass() {
        for &gamma in &[-1.0, -0.25, 0.0, 5.0 / 7.0, 1.0] {
            let skew = SkewBmRef::new(gamma, 3.0).unwrap();
            // P{Y > 0} = 1 - CDF(0) = (1+gamma)/2
            assert!((1.0 - skew.cdf(0.0) - skew.positive_mass()).abs() < 1e-12);
        }
        // gamma = 1 puts no mass on the negative half line
        let reflected = SkewBmRef::new(1.0, 1.0).unwrap();
        assert_eq!(reflected.cdf(-0.3), 0.0);
    }

    #[test]
    fn ks_statistic_examples() {
        // nine points 0.1..0.9 against uniform(0,1): sup distance 0.1
        let xs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.1).abs() < 1e-12);

        // a sample against its own empirical CDF stays within 1/n
        let sample = vec![0.3, 0.9, 0.1, 0.4];
        let sorted = {
            let mut s = sample.clone();
            s.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            s
        };
        let ecdf = move |x: f64| sorted.iter().filter(|&&v| v <= x).count() as f64 / 4.0;
        assert!(ks_statistic(&sample, ecdf).unwrap() <= 0.25 + 1e-12);
    }

    #[test]
    fn ks_statistic_matches_brute_force_sup() {
        let mut rng = crate::rng::CounterRng::from_words(&[13]);
        for _ in 0..50 {
            let n = 1 + (rng.next_u64() % 1000) as usize;
            let xs: Vec<f64> = (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
            let cdf = |x: f64| normal_cdf(x);
            let d = ks_statistic(&xs, cdf).unwrap();
            // brute force over all jump points
            let mut sorted = xs.clone();
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let mut brute = 0.0f64;
            for (i, &x) in sorted.iter().enumerate() {
                brute = brute
                    .max(((i + 1) as f64 / n as f64 - cdf(x)).abs())
                    .max((i as f64 / n as f64 - cdf(x)).abs());
            }
            assert!((d - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn two_sample_ks_examples() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![4.0, 3.0, 2.0, 1.0];
        assert_eq!(two_sample_ks(&a, &b).unwrap(), 0.0);

        let c = vec![1.0, 1.0, 4.0, 4.0];
        let d = vec![1.0, 1.0, 1.0, 4.0];
        assert!((two_sample_ks(&c, &d).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_quantile_reference() {
        assert!((kolmogorov_quantile(0.05) - 1.3581015157406195).abs() < 1e-12);
    }

    #[test]
    fn quantile_and_intervals() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        assert_eq!(quantile(&xs, 0.5).unwrap(), 50.0);
        assert_eq!(quantile(&xs, 0.99).unwrap(), 99.0);

        let (p, lo, hi) = binomial_ci(850, 1000, Z_99).unwrap();
        assert!((p - 0.85).abs() < 1e-12);
        assert!(lo < 0.85 && hi > 0.85);
        assert!(hi - lo < 0.07);
    }

    #[test]
    fn exponential_qq_detects_shape() {
        let mut rng = crate::rng::CounterRng::from_words(&[29]);
        let exp_sample: Vec<f64> = (0..5000).map(|_| -rng.next_open_closed().ln()).collect();
        assert!(exponential_qq_correlation(&exp_sample).unwrap() > 0.99);
        let uniform_sample: Vec<f64> = (0..5000).map(|_| rng.next_f64()).collect();
        let r = exponential_qq_correlation(&uniform_sample).unwrap();
        assert!(r < 0.99, "uniform sample should correlate worse, got {r}");
    }
}
