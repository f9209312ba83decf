//! Permutation resampling of test statistics under the null hypothesis.
//!
//! Each iteration pools all observations, shuffles them (sampling without
//! replacement) and deals them back into groups of the original sizes.
//! Iteration `i` draws from `seed.substream(i)`, so the resulting values do
//! not depend on how rayon schedules the work.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descr::GroupSample;
use crate::dist::{cdf_unchecked, DistSpec, RngSeed};
use crate::error::{Result, StatsError};
use crate::hypothesis::{anova_f_kernel, pooled_t_kernel, Stat, Tail};

pub const DEFAULT_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    TPooled,
    FAnova,
}

impl StatisticKind {
    /// Reference distribution for groups of the given sizes.
    pub fn reference(self, sizes: &[usize]) -> DistSpec {
        let total: usize = sizes.iter().sum();
        match self {
            StatisticKind::TPooled => DistSpec::StudentT { df: (total - 2) as f64 },
            StatisticKind::FAnova => DistSpec::F {
                df1: (sizes.len() - 1) as f64,
                df2: (total - sizes.len()) as f64,
            },
        }
    }

    /// The natural choice for `k` groups: t for two, F otherwise.
    pub fn for_group_count(k: usize) -> Self {
        if k == 2 {
            StatisticKind::TPooled
        } else {
            StatisticKind::FAnova
        }
    }
}

/// Density-normalized histogram with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl HistogramData {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    /// `Σ density · width`, which is 1 for a non-empty histogram.
    pub fn total_mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    /// CSV with header `bin_left,bin_right,density`, 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_left,bin_right,density")?;
        for (d, e) in self.densities.iter().zip(self.bin_edges.windows(2)) {
            writeln!(out, "{},{},{}", fmt_sig9(e[0]), fmt_sig9(e[1]), fmt_sig9(*d))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// `%.9g`-style formatting.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Histogram over `[min, max]` of the values.
pub fn histogram(values: &[f64], bins: usize) -> Result<HistogramData> {
    if values.is_empty() {
        return Err(StatsError::Empty("histogram of no values".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        // Point mass: a unit-wide span centred on the value.
        return histogram_in_range(values, bins, lo - 0.5, hi + 0.5);
    }
    histogram_in_range(values, bins, lo, hi)
}

/// Histogram over an explicit `[lo, hi]`; values outside the range are
/// dropped, and the densities are normalized over the retained values.
pub fn histogram_in_range(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<HistogramData> {
    if bins == 0 {
        return Err(StatsError::Domain("histogram needs at least one bin".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(StatsError::Domain(format!("invalid histogram range [{lo}, {hi}]")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::Domain("histogram of NaN".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut kept = 0usize;
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
        kept += 1;
    }
    if kept == 0 {
        return Err(StatsError::Empty("no values inside histogram range".into()));
    }
    let bin_edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let densities = counts.iter().map(|&c| c as f64 / (kept as f64 * width)).collect();
    Ok(HistogramData { bin_edges, densities })
}

/// One-sample Kolmogorov–Smirnov distance between the empirical CDF of
/// `values` and `reference`.
pub fn ks_distance(values: &[f64], reference: &DistSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(StatsError::Empty("KS distance of no values".into()));
    }
    reference.validate()?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::Domain("KS distance of NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let c = cdf_unchecked(reference, v);
        let above = (i + 1) as f64 / n - c;
        let below = c - i as f64 / n;
        d.max(above.abs()).max(below.abs())
    });
    Ok(d)
}

/// Simulated values of a statistic with the theoretical curve they should follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub statistic_kind: StatisticKind,
    pub reference: DistSpec,
    /// Iterations requested.
    pub n_iter: usize,
    /// Iterations dropped because the statistic was undefined or infinite.
    pub degenerate_count: usize,
    pub values: Vec<f64>,
    /// `None` when every iteration was degenerate.
    pub ks_distance: Option<f64>,
    pub histogram: Option<HistogramData>,
}

impl EmpiricalDistribution {
    pub fn new(
        statistic_kind: StatisticKind,
        reference: DistSpec,
        n_iter: usize,
        values: Vec<f64>,
        bins: usize,
    ) -> Result<Self> {
        let degenerate_count = n_iter.saturating_sub(values.len());
        let (ks, hist) = if values.is_empty() {
            (None, None)
        } else {
            (Some(ks_distance(&values, &reference)?), Some(histogram(&values, bins)?))
        };
        Ok(Self {
            statistic_kind,
            reference,
            n_iter,
            degenerate_count,
            values,
            ks_distance: ks,
            histogram: hist,
        })
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.values.is_empty())
            .then(|| self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    pub fn rebin(&mut self, bins: usize) -> Result<()> {
        self.histogram =
            if self.values.is_empty() { None } else { Some(histogram(&self.values, bins)?) };
        Ok(())
    }
}

fn check_groups(groups: &[GroupSample], kind: StatisticKind) -> Result<()> {
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: groups.len() });
    }
    if kind == StatisticKind::TPooled && groups.len() != 2 {
        return Err(StatsError::Mismatch(format!(
            "t_pooled permutation needs exactly 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::InsufficientData { needed: 2, got: g.len() });
    }
    Ok(())
}

fn kernel(kind: StatisticKind, data: &[f64], sizes: &[usize]) -> Stat {
    match kind {
        StatisticKind::TPooled => pooled_t_kernel(&data[..sizes[0]], &data[sizes[0]..]),
        StatisticKind::FAnova => anova_f_kernel(data, sizes),
    }
}

/// The statistic evaluated on the groups as given; `None` if degenerate.
pub fn observed_statistic(groups: &[GroupSample], kind: StatisticKind) -> Result<Option<f64>> {
    check_groups(groups, kind)?;
    let data: Vec<f64> = groups.iter().flat_map(|g| g.scores.iter().copied()).collect();
    let sizes: Vec<usize> = groups.iter().map(GroupSample::len).collect();
    Ok(match kernel(kind, &data, &sizes) {
        Stat::Value(v) => Some(v),
        Stat::Degenerate => None,
    })
}

pub(crate) fn permuted_stat(
    kind: StatisticKind,
    pool: &[f64],
    sizes: &[usize],
    buf: &mut [f64],
    rng: &mut crate::dist::StreamRng,
) -> Stat {
    buf.copy_from_slice(pool);
    buf.shuffle(rng);
    kernel(kind, buf, sizes)
}

/// Null sampling distribution of the statistic by random permutation.
pub fn permutation_null(
    groups: &[GroupSample],
    statistic_kind: StatisticKind,
    n_iter: usize,
    seed: RngSeed,
) -> Result<EmpiricalDistribution> {
    check_groups(groups, statistic_kind)?;
    if n_iter == 0 {
        return Err(StatsError::InvalidConfig("n_iter must be positive".into()));
    }
    let pool: Vec<f64> = groups.iter().flat_map(|g| g.scores.iter().copied()).collect();
    let sizes: Vec<usize> = groups.iter().map(GroupSample::len).collect();
    let stats: Vec<Stat> = (0..n_iter)
        .into_par_iter()
        .map_init(
            || vec![0.0; pool.len()],
            |buf, i| {
                let mut rng = seed.substream(i as u64).rng();
                permuted_stat(statistic_kind, &pool, &sizes, buf, &mut rng)
            },
        )
        .collect();
    let values: Vec<f64> = stats
        .into_iter()
        .filter_map(|s| match s {
            Stat::Value(v) => Some(v),
            Stat::Degenerate => None,
        })
        .collect();
    EmpiricalDistribution::new(
        statistic_kind,
        statistic_kind.reference(&sizes),
        n_iter,
        values,
        DEFAULT_BINS,
    )
}

fn at_least(v: f64, observed: f64) -> bool {
    v >= observed - 1e-12 * observed.abs().max(1.0)
}

fn at_most(v: f64, observed: f64) -> bool {
    v <= observed + 1e-12 * observed.abs().max(1.0)
}

/// Add-one Monte Carlo p-value `(b + 1)/(N + 1)`. For F, any tail other
/// than `Left` counts the right tail.
pub(crate) fn p_value_from_values(
    observed: f64,
    values: &[f64],
    kind: StatisticKind,
    tail: Tail,
) -> Result<f64> {
    if values.is_empty() {
        return Err(StatsError::Empty("permutation distribution has no values".into()));
    }
    if observed.is_nan() {
        return Err(StatsError::Domain("observed statistic is NaN".into()));
    }
    let tail = match (kind, tail) {
        (StatisticKind::FAnova, Tail::TwoSided) => Tail::Right,
        (_, t) => t,
    };
    let b = match tail {
        Tail::Right => values.iter().filter(|&&v| at_least(v, observed)).count(),
        Tail::Left => values.iter().filter(|&&v| at_most(v, observed)).count(),
        Tail::TwoSided => values.iter().filter(|&&v| at_least(v.abs(), observed.abs())).count(),
    };
    Ok((b + 1) as f64 / (values.len() + 1) as f64)
}

pub fn permutation_p_value(observed: f64, dist: &EmpiricalDistribution, tail: Tail) -> Result<f64> {
    p_value_from_values(observed, &dist.values, dist.statistic_kind, tail)
}

/// A complete permutation test: observed statistic, its null distribution
/// and the resulting p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub statistic_kind: StatisticKind,
    pub observed: f64,
    pub p_value: f64,
    pub tail: Tail,
    pub n_iter: usize,
    pub degenerate_count: usize,
    pub ks_distance: Option<f64>,
}

pub fn permutation_test(
    groups: &[GroupSample],
    statistic_kind: StatisticKind,
    n_iter: usize,
    seed: RngSeed,
    tail: Tail,
) -> Result<(PermutationOutcome, EmpiricalDistribution)> {
    let observed = observed_statistic(groups, statistic_kind)?.ok_or_else(|| {
        StatsError::Degenerate("observed statistic undefined (zero within-group variance)".into())
    })?;
    let dist = permutation_null(groups, statistic_kind, n_iter, seed)?;
    let p_value = permutation_p_value(observed, &dist, tail)?;
    let outcome = PermutationOutcome {
        statistic_kind,
        observed,
        p_value,
        tail,
        n_iter,
        degenerate_count: dist.degenerate_count,
        ks_distance: dist.ks_distance,
    };
    Ok((outcome, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descr::fixtures::quality_triple;
    use crate::dist::{quantile, sample, Sampler};
    use crate::hypothesis::t_test_pooled;

    fn g(id: &str, xs: &[f64]) -> GroupSample {
        GroupSample::new(id, xs.to_vec()).unwrap()
    }

    fn dist_of(values: Vec<f64>, kind: StatisticKind) -> EmpiricalDistribution {
        let reference = match kind {
            StatisticKind::TPooled => DistSpec::StudentT { df: 10.0 },
            StatisticKind::FAnova => DistSpec::F { df1: 2.0, df2: 10.0 },
        };
        let n = values.len();
        EmpiricalDistribution::new(kind, reference, n, values, 10).unwrap()
    }

    #[test]
    fn constant_groups_are_all_degenerate() {
        let a = g("a", &[3.0; 5]);
        let d = permutation_null(&[a.clone(), a], StatisticKind::TPooled, 200, RngSeed::new(1)).unwrap();
        assert!(d.values.iter().all(|v| *v == 0.0));
        assert_eq!(d.degenerate_count, 200);
        assert_eq!(d.ks_distance, None);
    }

    #[test]
    fn t_null_is_symmetric() {
        let gs = quality_triple();
        let n_iter = 20_000;
        let d = permutation_null(&gs[..2], StatisticKind::TPooled, n_iter, RngSeed::new(8)).unwrap();
        let m = d.mean().unwrap();
        let sd = (d.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / d.values.len() as f64).sqrt();
        assert!(m.abs() < 3.0 * sd / (n_iter as f64).sqrt());
        assert_eq!(d.reference, DistSpec::StudentT { df: 50.0 });
    }

    #[test]
    fn f_null_matches_reference() {
        let xs = sample(&DistSpec::STANDARD_NORMAL, 78, RngSeed::new(31)).unwrap();
        let gs: Vec<GroupSample> =
            xs.chunks(26).enumerate().map(|(i, c)| g(&format!("g{i}"), c)).collect();
        let d = permutation_null(&gs, StatisticKind::FAnova, 100_000, RngSeed::new(32)).unwrap();
        assert_eq!(d.reference, DistSpec::F { df1: 2.0, df2: 75.0 });
        assert_eq!(d.degenerate_count, 0);
        assert!(d.ks_distance.unwrap() < 0.02, "{:?}", d.ks_distance);
    }

    #[test]
    fn deterministic_under_seed() {
        let gs = quality_triple();
        let a = permutation_null(&gs, StatisticKind::FAnova, 3000, RngSeed::new(4)).unwrap();
        let b = permutation_null(&gs, StatisticKind::FAnova, 3000, RngSeed::new(4)).unwrap();
        assert_eq!(a, b);
        let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = one_thread
            .install(|| permutation_null(&gs, StatisticKind::FAnova, 3000, RngSeed::new(4)))
            .unwrap();
        assert_eq!(a, c);
        let d = permutation_null(&gs, StatisticKind::FAnova, 3000, RngSeed::new(5)).unwrap();
        assert_ne!(a.values, d.values);
    }

    #[test]
    fn permutation_preserves_pooled_multiset() {
        let pool = [1.0, 2.0, 2.0, 5.0, 7.5, 9.0, 11.0];
        let sizes = [3, 4];
        let mut sorted_pool = pool.to_vec();
        sorted_pool.sort_by(f64::total_cmp);
        let mut buf = vec![0.0; pool.len()];
        for i in 0..50 {
            let mut rng = RngSeed::new(2).substream(i).rng();
            permuted_stat(StatisticKind::TPooled, &pool, &sizes, &mut buf, &mut rng);
            let mut after = buf.clone();
            after.sort_by(f64::total_cmp);
            assert_eq!(after, sorted_pool);
        }
    }

    #[test]
    fn group_count_mismatch() {
        let gs = quality_triple();
        assert!(matches!(
            permutation_null(&gs, StatisticKind::TPooled, 10, RngSeed::new(1)),
            Err(StatsError::Mismatch(_))
        ));
        assert!(permutation_null(&gs[..1], StatisticKind::FAnova, 10, RngSeed::new(1)).is_err());
        let tiny = [g("a", &[1.0]), g("b", &[1.0, 2.0])];
        assert!(matches!(
            permutation_null(&tiny, StatisticKind::TPooled, 10, RngSeed::new(1)),
            Err(StatsError::InsufficientData { .. })
        ));
    }

    #[test]
    fn p_value_counting() {
        let values: Vec<f64> = (1..=9).map(f64::from).collect();
        let d = dist_of(values, StatisticKind::FAnova);
        assert_eq!(permutation_p_value(100.0, &d, Tail::Right).unwrap(), 0.1);
        assert_eq!(permutation_p_value(0.0, &d, Tail::Right).unwrap(), 1.0);
        // Median of N = 9 distinct values: ⌈N/2⌉ = 5 at or above it.
        assert_eq!(permutation_p_value(5.0, &d, Tail::Right).unwrap(), 6.0 / 10.0);
        assert!(permutation_p_value(1.0, &dist_of(vec![], StatisticKind::FAnova), Tail::Right).is_err());

        let t = dist_of(vec![-3.0, -1.0, 0.5, 2.0, 4.0], StatisticKind::TPooled);
        assert_eq!(permutation_p_value(2.0, &t, Tail::TwoSided).unwrap(), 4.0 / 6.0);
        assert_eq!(permutation_p_value(-1.0, &t, Tail::Left).unwrap(), 3.0 / 6.0);
        assert_eq!(permutation_p_value(9.0, &t, Tail::Right).unwrap(), 1.0 / 6.0);
    }

    #[test]
    fn ks_at_reference_quantiles() {
        let reference = DistSpec::F { df1: 2.0, df2: 75.0 };
        let n = 500;
        let values: Vec<f64> =
            (1..=n).map(|i| quantile(&reference, i as f64 / (n + 1) as f64).unwrap()).collect();
        let d = ks_distance(&values, &reference).unwrap();
        assert!(d <= 1.0 / (n + 1) as f64 + 1e-9, "{d}");
    }

    #[test]
    fn ks_point_mass() {
        let d = ks_distance(&[0.3; 50], &DistSpec::STANDARD_NORMAL).unwrap();
        assert!(d >= 0.5);
        assert!(ks_distance(&[], &DistSpec::STANDARD_NORMAL).is_err());
    }

    #[test]
    fn ks_exact_t_samples() {
        // t(50) draws built from normals: Z / √(χ²₅₀ / 50).
        let normal = Sampler::new(&DistSpec::STANDARD_NORMAL).unwrap();
        let mut rng = RngSeed::new(21).rng();
        let values: Vec<f64> = (0..100_000)
            .map(|_| {
                let z = normal.draw(&mut rng);
                let chi: f64 = (0..50).map(|_| normal.draw(&mut rng).powi(2)).sum();
                z / (chi / 50.0).sqrt()
            })
            .collect();
        let d = ks_distance(&values, &DistSpec::StudentT { df: 50.0 }).unwrap();
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[2.5], 1).unwrap();
        assert_eq!(h.bins(), 1);
        assert!(h.bin_edges[0] <= 2.5 && 2.5 <= h.bin_edges[1]);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);

        let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let h = histogram(&grid, 10).unwrap();
        assert_eq!((h.bin_edges[0], h.bin_edges[10]), (0.0, 1.0));
        assert!(h.densities.iter().all(|d| (d - 1.0).abs() < 1e-9), "{:?}", h.densities);
        let mid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let h = histogram_in_range(&mid, 10, 0.0, 1.0).unwrap();
        assert!(h.densities.iter().all(|d| (d - 1.0).abs() < 1e-9), "{:?}", h.densities);

        let xs = sample(&DistSpec::Exponential { lambda: 0.5 }, 5000, RngSeed::new(1)).unwrap();
        for bins in [1, 7, 100] {
            assert!((histogram(&xs, bins).unwrap().total_mass() - 1.0).abs() < 1e-9);
        }
        assert!(histogram(&[], 10).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn histogram_csv_format() {
        let h = HistogramData { bin_edges: vec![0.0, 0.5, 1.0], densities: vec![1.2, 0.8] };
        assert_eq!(h.to_csv(), "bin_left,bin_right,density\n0,0.5,1.2\n0.5,1,0.8\n");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(123_456.789_012_3), "123456.789");
        assert_eq!(fmt_sig9(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_sig9(6.02e23), "6.02e+23");
        assert_eq!(fmt_sig9(1e8), "100000000");
    }

    #[test]
    fn p_values_uniform_under_null() {
        // 1000 repetitions, two normal groups of 15 from one population.
        let normal = Sampler::new(&DistSpec::STANDARD_NORMAL).unwrap();
        let rejections: usize = (0..1000u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = RngSeed::with_stream(77, rep).rng();
                let a: Vec<f64> = (0..15).map(|_| normal.draw(&mut rng)).collect();
                let b: Vec<f64> = (0..15).map(|_| normal.draw(&mut rng)).collect();
                let gs = [g("a", &a), g("b", &b)];
                let (out, _) =
                    permutation_test(&gs, StatisticKind::TPooled, 999, RngSeed::new(rep), Tail::TwoSided)
                        .unwrap();
                usize::from(out.p_value <= 0.05)
            })
            .sum();
        let rate = rejections as f64 / 1000.0;
        assert!((rate - 0.05).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn permutation_agrees_with_pooled_t() {
        let normal = Sampler::new(&DistSpec::STANDARD_NORMAL).unwrap();
        let mut rng = RngSeed::new(404).rng();
        let a: Vec<f64> = (0..25).map(|_| normal.draw(&mut rng)).collect();
        let b: Vec<f64> = (0..25).map(|_| normal.draw(&mut rng) + 0.5).collect();
        let gs = [g("a", &a), g("b", &b)];
        let t = t_test_pooled(&gs[0], &gs[1], Tail::TwoSided).unwrap();
        let (perm, _) =
            permutation_test(&gs, StatisticKind::TPooled, 100_000, RngSeed::new(1), Tail::TwoSided).unwrap();
        assert!((perm.p_value - t.p_value).abs() < 0.02, "{} vs {}", perm.p_value, t.p_value);
        assert_eq!(perm.observed, t.statistic);
    }
}
