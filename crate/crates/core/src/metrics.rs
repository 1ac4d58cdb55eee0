//! Statistical-fidelity and geometric-validity metrics for K4 edge-weight
//! samples.
//!
//! Validity checks work on a single fixed-size sextuple, so their cost is
//! constant per quadruple. A constraint counts as violated only when its
//! deficit exceeds the tolerance.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES, TRIANGLES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub triangle: f64,
    pub ptolemy: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            triangle: 1e-2,
            ptolemy: 1e-2,
        }
    }
}

/// Largest `e_ik − (e_ij + e_jk)` over the four triangles and every choice of
/// the long side.
pub fn triangle_deficit(w: &EdgeWeights) -> f64 {
    TRIANGLES
        .iter()
        .map(|&[a, b, c]| {
            let (x, y, z) = (w[a], w[b], w[c]);
            (x - y - z).max(y - x - z).max(z - x - y)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn triangle_valid(w: &EdgeWeights, eps: f64) -> bool {
    triangle_deficit(w) <= eps
}

/// Largest Ptolemaic deficit over the three perfect matchings
/// `(AC,BD)`, `(AB,CD)`, `(AD,BC)`: the product of one matching's pair minus
/// the sum of the other two pair products.
pub fn ptolemy_deficit(w: &EdgeWeights) -> f64 {
    let ac_bd = w[1] * w[4];
    let ab_cd = w[0] * w[5];
    let ad_bc = w[2] * w[3];
    (ac_bd - ab_cd - ad_bc)
        .max(ab_cd - ac_bd - ad_bc)
        .max(ad_bc - ab_cd - ac_bd)
}

pub fn ptolemaic_valid(w: &EdgeWeights, eps: f64) -> bool {
    ptolemy_deficit(w) <= eps
}

fn fraction(samples: &[EdgeWeights], pass: impl Fn(&EdgeWeights) -> bool) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::input("validity rate of an empty sample set"));
    }
    Ok(samples.iter().filter(|w| pass(w)).count() as f64 / samples.len() as f64)
}

/// Triangle validity score: fraction of samples whose four triangles all pass.
pub fn tvs(samples: &[EdgeWeights], eps: f64) -> Result<f64> {
    fraction(samples, |w| triangle_valid(w, eps))
}

/// Four-point (Ptolemaic) consistency: fraction passing all three matchings.
pub fn pcm4(samples: &[EdgeWeights], eps: f64) -> Result<f64> {
    fraction(samples, |w| ptolemaic_valid(w, eps))
}

/// Population standard deviation across the six components of one sample.
pub fn sample_std(w: &EdgeWeights) -> f64 {
    let mean = w.iter().sum::<f64>() / NUM_EDGES as f64;
    (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / NUM_EDGES as f64).sqrt()
}

/// Mean per-sample standard deviation.
pub fn mean_sample_std(samples: &[EdgeWeights]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(sample_std).sum::<f64>() / samples.len() as f64
}

fn pooled(samples: &[EdgeWeights]) -> Vec<f64> {
    samples.iter().flat_map(|w| w.iter().copied()).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn subsample<R: Rng>(values: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut idx = index::sample(rng, values.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| values[i]).collect()
}

/// W1 between two 1-D empirical distributions of equal size, both sorted.
fn w1_sorted(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// W1 between pooled 1-D value sets; the larger set is subsampled without
/// replacement to the smaller size using `seed`.
pub fn wasserstein1_values(a: &[f64], b: &[f64], seed: u64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::input("Wasserstein distance of an empty sample set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = match a.len().cmp(&b.len()) {
        std::cmp::Ordering::Equal => (a.to_vec(), b.to_vec()),
        std::cmp::Ordering::Greater => (subsample(a, b.len(), &mut rng), b.to_vec()),
        std::cmp::Ordering::Less => (a.to_vec(), subsample(b, a.len(), &mut rng)),
    };
    Ok(w1_sorted(&sorted(a), &sorted(b)))
}

/// W1 between the pooled marginal edge-weight distributions.
pub fn wasserstein1(generated: &[EdgeWeights], real: &[EdgeWeights], seed: u64) -> Result<f64> {
    wasserstein1_values(&pooled(generated), &pooled(real), seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub bins: usize,
    pub upper: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: 50,
            upper: 0.5,
        }
    }
}

impl HistogramConfig {
    /// Bin of `x` over `[0, upper]`; values outside clamp to the end bins.
    pub fn bin(&self, x: f64) -> usize {
        let b = (x / self.upper * self.bins as f64).floor();
        if b.is_nan() || b < 0.0 {
            0
        } else {
            (b as usize).min(self.bins - 1)
        }
    }

    pub fn counts(&self, values: impl IntoIterator<Item = f64>) -> Vec<u64> {
        let mut counts = vec![0u64; self.bins];
        for v in values {
            counts[self.bin(v)] += 1;
        }
        counts
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|i| self.upper * i as f64 / self.bins as f64)
            .collect()
    }
}

/// Base-2 JS divergence between two count histograms over the same bins.
pub fn js_from_counts(p: &[u64], q: &[u64]) -> f64 {
    let (np, nq) = (p.iter().sum::<u64>() as f64, q.iter().sum::<u64>() as f64);
    let mut js = 0.0;
    for (&cp, &cq) in p.iter().zip(q) {
        let (pi, qi) = (cp as f64 / np, cq as f64 / nq);
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            js += 0.5 * pi * (pi / m).log2();
        }
        if qi > 0.0 {
            js += 0.5 * qi * (qi / m).log2();
        }
    }
    js.max(0.0)
}

/// JS divergence between the histogrammed pooled edge weights.
pub fn js_divergence(
    generated: &[EdgeWeights],
    real: &[EdgeWeights],
    hist: &HistogramConfig,
) -> Result<f64> {
    if generated.is_empty() || real.is_empty() {
        return Err(Error::input("JS divergence of an empty sample set"));
    }
    Ok(js_from_counts(
        &hist.counts(pooled(generated)),
        &hist.counts(pooled(real)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval of `statistic` over resamples of `samples`
/// drawn with replacement. The interval is widened, if needed, to contain
/// the statistic of the original sample.
pub fn bootstrap_ci<T: Clone>(
    samples: &[T],
    statistic: impl Fn(&[T]) -> f64,
    cfg: &BootstrapConfig,
) -> Result<Interval> {
    if samples.len() < 2 {
        return Err(Error::input("bootstrap needs at least two samples"));
    }
    if cfg.resamples == 0 || !(0.0 < cfg.level && cfg.level < 1.0) {
        return Err(Error::input(format!(
            "invalid bootstrap settings: {} resamples at level {}",
            cfg.resamples, cfg.level
        )));
    }
    let point = statistic(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut buf = Vec::with_capacity(samples.len());
    let mut stats: Vec<f64> = (0..cfg.resamples)
        .map(|_| {
            buf.clear();
            buf.extend((0..samples.len()).map(|_| samples[rng.random_range(0..samples.len())].clone()));
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.level;
    Ok(Interval {
        low: quantile(&stats, alpha / 2.0).min(point),
        high: quantile(&stats, 1.0 - alpha / 2.0).max(point),
    })
}

/// Bootstrap interval of the mean of per-sample values.
pub fn bootstrap_mean_ci(values: &[f64], cfg: &BootstrapConfig) -> Result<Interval> {
    bootstrap_ci(values, |v| v.iter().sum::<f64>() / v.len() as f64, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    fn new(point: f64, ci: Interval) -> Self {
        Self {
            point,
            ci_low: ci.low,
            ci_high: ci.high,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.point.is_finite() && self.ci_low.is_finite() && self.ci_high.is_finite()
    }
}

/// Every knob that shapes a metric value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub tolerances: ToleranceConfig,
    pub histogram: HistogramConfig,
    pub bootstrap: BootstrapConfig,
    /// Seed for subsampling the larger set in W1.
    pub wasserstein_seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            tolerances: ToleranceConfig::default(),
            histogram: HistogramConfig::default(),
            bootstrap: BootstrapConfig::default(),
            wasserstein_seed: 0,
        }
    }
}

/// Point metrics without intervals, cheap enough for periodic logging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub wass: f64,
    pub js: f64,
    pub tvs: f64,
    pub pcm4: f64,
    pub sigma: f64,
}

pub fn snapshot(
    generated: &[EdgeWeights],
    real: &[EdgeWeights],
    cfg: &MetricConfig,
) -> Result<MetricSnapshot> {
    Ok(MetricSnapshot {
        wass: wasserstein1(generated, real, cfg.wasserstein_seed)?,
        js: js_divergence(generated, real, &cfg.histogram)?,
        tvs: tvs(generated, cfg.tolerances.triangle)?,
        pcm4: pcm4(generated, cfg.tolerances.ptolemy)?,
        sigma: mean_sample_std(generated),
    })
}

/// All metrics with bootstrap intervals over the generated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_samples: usize,
    pub wass: Estimate,
    pub js: Estimate,
    pub tvs: Estimate,
    pub pcm4: Estimate,
    pub sigma: Estimate,
}

impl MetricsReport {
    pub fn compute(
        generated: &[EdgeWeights],
        real: &[EdgeWeights],
        cfg: &MetricConfig,
    ) -> Result<Self> {
        let point = snapshot(generated, real, cfg)?;
        let boot = &cfg.bootstrap;
        let tol = cfg.tolerances;

        let tri: Vec<f64> = generated
            .iter()
            .map(|w| f64::from(u8::from(triangle_valid(w, tol.triangle))))
            .collect();
        let pto: Vec<f64> = generated
            .iter()
            .map(|w| f64::from(u8::from(ptolemaic_valid(w, tol.ptolemy))))
            .collect();
        let stds: Vec<f64> = generated.iter().map(sample_std).collect();

        let real_pooled = pooled(real);
        let real_counts = cfg.histogram.counts(real_pooled.iter().copied());
        let wass_ci = bootstrap_ci(
            generated,
            |s| {
                wasserstein1_values(&pooled(s), &real_pooled, cfg.wasserstein_seed)
                    .expect("non-empty")
            },
            boot,
        )?;
        let js_ci = bootstrap_ci(
            generated,
            |s| js_from_counts(&cfg.histogram.counts(pooled(s)), &real_counts),
            boot,
        )?;

        Ok(Self {
            n_samples: generated.len(),
            wass: Estimate::new(point.wass, wass_ci),
            js: Estimate::new(point.js, js_ci),
            tvs: Estimate::new(point.tvs, bootstrap_mean_ci(&tri, boot)?),
            pcm4: Estimate::new(point.pcm4, bootstrap_mean_ci(&pto, boot)?),
            sigma: Estimate::new(point.sigma, bootstrap_mean_ci(&stds, boot)?),
        })
    }

    pub fn snapshot(&self) -> MetricSnapshot {
        MetricSnapshot {
            wass: self.wass.point,
            js: self.js.point,
            tvs: self.tvs.point,
            pcm4: self.pcm4.point,
            sigma: self.sigma.point,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.wass, self.js, self.tvs, self.pcm4, self.sigma]
            .iter()
            .all(Estimate::is_finite)
    }

    pub const CSV_HEADER: [&'static str; 15] = [
        "wass", "wass_low", "wass_high", "js", "js_low", "js_high", "tvs", "tvs_low",
        "tvs_high", "pcm4", "pcm4_low", "pcm4_high", "sigma", "sigma_low", "sigma_high",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        [self.wass, self.js, self.tvs, self.pcm4, self.sigma]
            .iter()
            .flat_map(|e| [e.point, e.ci_low, e.ci_high])
            .map(|x| x.to_string())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::k4::{relabel, vertex_permutations, EDGE_VERTICES};
    use approx::assert_abs_diff_eq;

    const UNIFORM: EdgeWeights = [1.0 / 6.0; 6];

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn euclidean_weights(p: &[[f64; 3]]) -> EdgeWeights {
        let d: [f64; 6] = std::array::from_fn(|i| {
            let (u, v) = EDGE_VERTICES[i];
            (0..3).map(|k| (p[u][k] - p[v][k]).powi(2)).sum::<f64>().sqrt()
        });
        let s: f64 = d.iter().sum();
        d.map(|x| x / s)
    }

    fn gross_violation() -> EdgeWeights {
        // AB=0.6, AC=0.05, BC=0.05, remaining 0.3 over AD, BD, CD.
        [0.6, 0.05, 0.1, 0.05, 0.1, 0.1]
    }

    #[test]
    fn uniform_weights_are_valid() {
        assert!(triangle_valid(&UNIFORM, 0.0));
        assert!(ptolemaic_valid(&UNIFORM, 0.0));
        assert_abs_diff_eq!(ptolemy_deficit(&UNIFORM), -1.0 / 36.0, epsilon = 1e-15);
    }

    #[test]
    fn gross_triangle_violation() {
        let w = gross_violation();
        assert!(!triangle_valid(&w, 1e-2));
        assert_abs_diff_eq!(triangle_deficit(&w), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_quadruples_pass_at_zero_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<EdgeWeights> = (0..1000)
            .map(|_| euclidean_weights(&random_points(&mut rng, 4)))
            .collect();
        assert_eq!(tvs(&samples, 0.0).unwrap(), 1.0);
        assert_eq!(pcm4(&samples, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn rates() {
        assert_eq!(tvs(&[UNIFORM; 10], 1e-2).unwrap(), 1.0);
        assert_eq!(pcm4(&[UNIFORM; 10], 1e-2).unwrap(), 1.0);
        let mixed: Vec<_> = (0..10)
            .map(|i| if i % 2 == 0 { UNIFORM } else { gross_violation() })
            .collect();
        assert_eq!(tvs(&mixed, 1e-2).unwrap(), 0.5);
        assert!(matches!(tvs(&[], 1e-2), Err(Error::Input(_))));
        assert!(matches!(pcm4(&[], 1e-2), Err(Error::Input(_))));
    }

    #[test]
    fn verdicts_are_relabeling_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let perms = vertex_permutations();
        for _ in 0..500 {
            // Random simplex points, so a mix of valid and invalid verdicts.
            let raw: [f64; 6] = std::array::from_fn(|_| rng.random::<f64>().powi(3));
            let s: f64 = raw.iter().sum();
            let w = raw.map(|x| x / s);
            let (t, p) = (triangle_valid(&w, 1e-2), ptolemaic_valid(&w, 1e-2));
            for &perm in &perms {
                let r = relabel(&w, perm);
                assert_eq!(triangle_valid(&r, 1e-2), t);
                assert_eq!(ptolemaic_valid(&r, 1e-2), p);
            }
        }
    }

    #[test]
    fn sigma_of_uniform_is_zero() {
        assert_eq!(sample_std(&UNIFORM), 0.0);
        assert_abs_diff_eq!(
            sample_std(&[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]),
            (0.5f64.powi(2) * 2.0 / 6.0 - (1.0f64 / 6.0).powi(2)).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn wasserstein_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p: Vec<EdgeWeights> = (0..50)
            .map(|_| euclidean_weights(&random_points(&mut rng, 4)))
            .collect();
        assert_eq!(wasserstein1(&p, &p, 0).unwrap(), 0.0);
        let a = [[0.3; 6]];
        let b = [[0.1; 6]];
        assert_abs_diff_eq!(wasserstein1(&a, &b, 0).unwrap(), 0.2, epsilon = 1e-15);
        assert!(wasserstein1(&[], &a, 0).is_err());
    }

    /// Exact 1-D optimal transport by CDF integration, independent of the
    /// sorted-coupling formula used in the implementation.
    fn w1_cdf(a: &[f64], b: &[f64]) -> f64 {
        let mut pts: Vec<f64> = a.iter().chain(b).copied().collect();
        pts.sort_by(f64::total_cmp);
        let cdf = |v: &[f64], x: f64| v.iter().filter(|&&y| y <= x).count() as f64 / v.len() as f64;
        pts.windows(2)
            .map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0]))
            .sum()
    }

    #[test]
    fn wasserstein_matches_cdf_oracle_on_shifted_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let real: Vec<EdgeWeights> = (0..1000)
            .map(|_| euclidean_weights(&random_points(&mut rng, 4)))
            .collect();
        let gen: Vec<EdgeWeights> = real
            .iter()
            .map(|w| {
                let mut s = *w;
                s[2] += 0.01;
                let t: f64 = s.iter().sum();
                s.map(|x| x / t)
            })
            .collect();
        let got = wasserstein1(&gen, &real, 0).unwrap();
        let oracle = w1_cdf(&pooled(&gen), &pooled(&real));
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn wasserstein_metric_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut set = |shift: f64| -> Vec<EdgeWeights> {
            (0..200)
                .map(|_| {
                    let raw: [f64; 6] = std::array::from_fn(|i| rng.random::<f64>() + shift * i as f64);
                    let s: f64 = raw.iter().sum();
                    raw.map(|x| x / s)
                })
                .collect()
        };
        let (p, q, r) = (set(0.0), set(0.2), set(0.5));
        let d = |a: &[EdgeWeights], b: &[EdgeWeights]| wasserstein1(a, b, 0).unwrap();
        assert_abs_diff_eq!(d(&p, &q), d(&q, &p), epsilon = 1e-15);
        assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-15);
        assert!(d(&p, &q) > 0.0);
    }

    #[test]
    fn wasserstein_subsamples_larger_set() {
        let big: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let small = vec![0.5; 10];
        let a = wasserstein1_values(&big, &small, 7).unwrap();
        assert_eq!(a, wasserstein1_values(&big, &small, 7).unwrap());
        assert_eq!(a, wasserstein1_values(&small, &big, 7).unwrap());
    }

    #[test]
    fn js_basics() {
        let h = HistogramConfig::default();
        let a = vec![[0.05; 6]; 20];
        let b = vec![[0.3; 6]; 20];
        assert_eq!(js_divergence(&a, &a, &h).unwrap(), 0.0);
        assert_abs_diff_eq!(js_divergence(&a, &b, &h).unwrap(), 1.0, epsilon = 1e-12);
        // Overflow lands in the last bin; negatives in the first.
        assert_eq!(h.bin(0.9), 49);
        assert_eq!(h.bin(0.5), 49);
        assert_eq!(h.bin(-0.1), 0);
        assert_eq!(h.bin(0.0101), 1);
    }

    #[test]
    fn js_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = HistogramConfig::default();
        for _ in 0..20 {
            let p: Vec<u64> = (0..50).map(|_| rng.random_range(0..20)).collect();
            let q: Vec<u64> = (0..50).map(|_| rng.random_range(0..20)).collect();
            let (a, b) = (js_from_counts(&p, &q), js_from_counts(&q, &p));
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            assert!((0.0..=1.0).contains(&a));
        }
        assert_eq!(h.counts([0.1, 0.2, 0.2]).iter().sum::<u64>(), 3);
    }

    #[test]
    fn bootstrap_constant_values() {
        let ci = bootstrap_mean_ci(&[0.25; 100], &BootstrapConfig::default()).unwrap();
        assert_eq!(ci, Interval { low: 0.25, high: 0.25 });
        assert!(bootstrap_mean_ci(&[1.0], &BootstrapConfig::default()).is_err());
    }

    #[test]
    fn bootstrap_bernoulli_width_matches_normal_approximation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let values: Vec<f64> = (0..5000).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let ci = bootstrap_mean_ci(&values, &BootstrapConfig::default()).unwrap();
        let analytic = 2.0 * 1.96 * (0.25f64 / 5000.0).sqrt();
        let width = ci.high - ci.low;
        assert!((width - analytic).abs() / analytic < 0.2, "{width} vs {analytic}");
    }

    #[test]
    fn bootstrap_contains_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let values: Vec<f64> = (0..50).map(|_| rng.random::<f64>().powi(4)).collect();
            let mean = values.iter().sum::<f64>() / 50.0;
            let ci = bootstrap_mean_ci(&values, &BootstrapConfig { seed: rng.random(), ..Default::default() }).unwrap();
            assert!(ci.low <= mean && mean <= ci.high);
        }
    }

    #[test]
    fn report_on_self_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let real: Vec<EdgeWeights> = (0..300)
            .map(|_| euclidean_weights(&random_points(&mut rng, 4)))
            .collect();
        let cfg = MetricConfig {
            bootstrap: BootstrapConfig { resamples: 100, ..Default::default() },
            ..Default::default()
        };
        let r = MetricsReport::compute(&real, &real, &cfg).unwrap();
        assert_eq!(r.wass.point, 0.0);
        assert_eq!(r.js.point, 0.0);
        assert_eq!(r.tvs.point, 1.0);
        assert!(r.is_finite());
        assert_eq!(r.csv_row().len(), MetricsReport::CSV_HEADER.len());

        let constant = vec![UNIFORM; 300];
        let r = MetricsReport::compute(&constant, &real, &cfg).unwrap();
        assert_eq!(r.tvs.point, 1.0);
        assert_eq!(r.pcm4.point, 1.0);
        assert_eq!(r.sigma.point, 0.0);
    }
}
