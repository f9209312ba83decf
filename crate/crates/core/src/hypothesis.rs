//! Parametric two-sample and k-sample tests on group means.
//!
//! Every test comes in a raw-data form and a summary-statistics form; the
//! raw form of the pooled t-test goes through the summary form, so both
//! give bit-identical answers on the same data.
//!
//! Zero within-group variance is not treated as an error when the group
//! means differ: the statistic is reported as ±∞ with `infinite_statistic`
//! set, so Monte Carlo loops can count such draws instead of aborting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::descr::{central_moments, mean, sum_sq_dev, GroupSample};
use crate::dist::{cdf_unchecked, sf_unchecked, DistSpec};
use crate::error::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    TPooled,
    TWelch,
    AnovaOneway,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    #[default]
    TwoSided,
    Left,
    Right,
}

/// Degrees of freedom: one value for t, a (numerator, denominator) pair for F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    One(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extra {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    pub tail: Tail,
    /// Set when the statistic diverged because the within-group variance is zero.
    pub infinite_statistic: bool,
    pub extras: BTreeMap<String, Extra>,
}

impl TestResult {
    pub fn extra(&self, key: &str) -> Option<f64> {
        match self.extras.get(key) {
            Some(Extra::Scalar(v)) => Some(*v),
            _ => None,
        }
    }
}

/// Outcome of a statistic kernel used inside resampling loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stat {
    Value(f64),
    /// Zero within-group spread; no finite statistic.
    Degenerate,
}

fn require_len(g: &GroupSample, needed: usize) -> Result<()> {
    if g.len() < needed {
        return Err(StatsError::InsufficientData { needed, got: g.len() });
    }
    Ok(())
}

fn t_p_value(t: f64, df: f64, tail: Tail) -> f64 {
    let spec = DistSpec::StudentT { df };
    match tail {
        Tail::TwoSided => (2.0 * sf_unchecked(&spec, t.abs())).min(1.0),
        Tail::Left => cdf_unchecked(&spec, t),
        Tail::Right => sf_unchecked(&spec, t),
    }
}

/// p-value for a statistic that diverged to ±∞.
fn infinite_p_value(sign: f64, tail: Tail) -> f64 {
    match tail {
        Tail::TwoSided => 0.0,
        Tail::Left => {
            if sign < 0.0 {
                0.0
            } else {
                1.0
            }
        }
        Tail::Right => {
            if sign > 0.0 {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// `(t, pooled variance)` from group summaries; `t` may be ±∞ and is NaN
/// when both the mean difference and the pooled variance are zero.
pub(crate) fn pooled_t_core(m1: f64, v1: f64, n1: usize, m2: f64, v2: f64, n2: usize) -> (f64, f64) {
    let sp2 = if n1 == n2 {
        0.5 * (v1 + v2)
    } else {
        let w1 = (n1 - 1) as f64;
        let w2 = (n2 - 1) as f64;
        (v1 * w1 + v2 * w2) / (w1 + w2)
    };
    let se = (sp2 * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let diff = m1 - m2;
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        f64::NAN
    } else {
        diff.signum() * f64::INFINITY
    };
    (t, sp2)
}

/// Pooled t statistic of two slices, through the same summary path as
/// [`t_test_pooled`].
pub(crate) fn pooled_t_kernel(a: &[f64], b: &[f64]) -> Stat {
    let (m1, m2) = (mean(a), mean(b));
    let v1 = sum_sq_dev(a, m1) / (a.len() - 1) as f64;
    let v2 = sum_sq_dev(b, m2) / (b.len() - 1) as f64;
    let (t, sp2) = pooled_t_core(m1, v1, a.len(), m2, v2, b.len());
    if sp2 > 0.0 {
        Stat::Value(t)
    } else {
        Stat::Degenerate
    }
}

/// Student's two-sample t-test with pooled variance, `df = n1 + n2 − 2`.
pub fn t_test_pooled(g1: &GroupSample, g2: &GroupSample, tail: Tail) -> Result<TestResult> {
    require_len(g1, 2)?;
    require_len(g2, 2)?;
    let (m1, m2) = (g1.mean(), g2.mean());
    let v1 = sum_sq_dev(&g1.scores, m1) / (g1.len() - 1) as f64;
    let v2 = sum_sq_dev(&g2.scores, m2) / (g2.len() - 1) as f64;
    t_test_pooled_summary(m1, v1, g1.len(), m2, v2, g2.len(), tail)
}

/// Pooled t-test from group means, unbiased variances and sizes.
pub fn t_test_pooled_summary(
    mean1: f64,
    var1: f64,
    n1: usize,
    mean2: f64,
    var2: f64,
    n2: usize,
    tail: Tail,
) -> Result<TestResult> {
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: n1.min(n2) });
    }
    if !(var1 >= 0.0) || !(var2 >= 0.0) || !mean1.is_finite() || !mean2.is_finite() {
        return Err(StatsError::Domain("means must be finite and variances nonnegative".into()));
    }
    let (t, sp2) = pooled_t_core(mean1, var1, n1, mean2, var2, n2);
    if t.is_nan() {
        return Err(StatsError::Degenerate(
            "both groups constant with equal means; pooled t undefined".into(),
        ));
    }
    let df = (n1 + n2 - 2) as f64;
    let infinite = t.is_infinite();
    let p_value = if infinite { infinite_p_value(t, tail) } else { t_p_value(t, df, tail) };
    let mut extras = BTreeMap::new();
    extras.insert("pooled_variance".into(), Extra::Scalar(sp2));
    extras.insert("mean_difference".into(), Extra::Scalar(mean1 - mean2));
    extras.insert("group_means".into(), Extra::Vector(vec![mean1, mean2]));
    Ok(TestResult {
        method: TestMethod::TPooled,
        statistic: t,
        df: Df::One(df),
        p_value,
        tail,
        infinite_statistic: infinite,
        extras,
    })
}

/// Satterthwaite degrees of freedom from sample variances (fractional).
pub fn welch_df(var1: f64, n1: usize, var2: f64, n2: usize) -> f64 {
    let a = var1 / n1 as f64;
    let b = var2 / n2 as f64;
    (a + b).powi(2) / (a * a / (n1 - 1) as f64 + b * b / (n2 - 1) as f64)
}

/// Welch's unequal-variance t-test.
pub fn t_test_welch(g1: &GroupSample, g2: &GroupSample, tail: Tail) -> Result<TestResult> {
    require_len(g1, 2)?;
    require_len(g2, 2)?;
    let (m1, m2) = (g1.mean(), g2.mean());
    let v1 = sum_sq_dev(&g1.scores, m1) / (g1.len() - 1) as f64;
    let v2 = sum_sq_dev(&g2.scores, m2) / (g2.len() - 1) as f64;
    if v1 == 0.0 && v2 == 0.0 {
        return Err(StatsError::Degenerate("Welch t-test with both groups constant".into()));
    }
    let (n1, n2) = (g1.len(), g2.len());
    let se = (v1 / n1 as f64 + v2 / n2 as f64).sqrt();
    let t = (m1 - m2) / se;
    let df = welch_df(v1, n1, v2, n2);
    let mut extras = BTreeMap::new();
    extras.insert("standard_error".into(), Extra::Scalar(se));
    extras.insert("group_means".into(), Extra::Vector(vec![m1, m2]));
    extras.insert("group_variances".into(), Extra::Vector(vec![v1, v2]));
    Ok(TestResult {
        method: TestMethod::TWelch,
        statistic: t,
        df: Df::One(df),
        p_value: t_p_value(t, df, tail),
        tail,
        infinite_statistic: false,
        extras,
    })
}

struct AnovaParts {
    ss_between: f64,
    ss_within: f64,
    grand_mean: f64,
    k: usize,
    total: usize,
}

fn anova_result(parts: AnovaParts, means: Vec<f64>, vars: Vec<f64>, ns: Vec<f64>) -> Result<TestResult> {
    let AnovaParts { ss_between, ss_within, grand_mean, k, total } = parts;
    let df_b = (k - 1) as f64;
    let df_w = (total - k) as f64;
    let ms_b = ss_between / df_b;
    let ms_w = ss_within / df_w;
    let (f, p, infinite) = if ss_within > 0.0 {
        let f = ms_b / ms_w;
        (f, sf_unchecked(&DistSpec::F { df1: df_b, df2: df_w }, f), false)
    } else if ss_between > 0.0 {
        (f64::INFINITY, 0.0, true)
    } else {
        return Err(StatsError::Degenerate("ANOVA with every observation equal".into()));
    };
    let mut extras = BTreeMap::new();
    extras.insert("ss_between".into(), Extra::Scalar(ss_between));
    extras.insert("ss_within".into(), Extra::Scalar(ss_within));
    extras.insert("ms_between".into(), Extra::Scalar(ms_b));
    extras.insert("ms_within".into(), Extra::Scalar(ms_w));
    extras.insert("grand_mean".into(), Extra::Scalar(grand_mean));
    extras.insert("group_means".into(), Extra::Vector(means));
    extras.insert("group_variances".into(), Extra::Vector(vars));
    extras.insert("group_sizes".into(), Extra::Vector(ns));
    Ok(TestResult {
        method: TestMethod::AnovaOneway,
        statistic: f,
        df: Df::Pair(df_b, df_w),
        p_value: p,
        tail: Tail::Right,
        infinite_statistic: infinite,
        extras,
    })
}

/// One-way ANOVA F-test on `k >= 2` groups, from raw deviations.
pub fn anova_oneway(groups: &[GroupSample]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: groups.len() });
    }
    for g in groups {
        require_len(g, 2)?;
    }
    let total: usize = groups.iter().map(GroupSample::len).sum();
    let grand_mean = groups.iter().flat_map(|g| g.scores.iter()).sum::<f64>() / total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    let mut means = Vec::with_capacity(groups.len());
    let mut vars = Vec::with_capacity(groups.len());
    for g in groups {
        let m = g.mean();
        let ss = sum_sq_dev(&g.scores, m);
        ss_between += g.len() as f64 * (m - grand_mean).powi(2);
        ss_within += ss;
        means.push(m);
        vars.push(ss / (g.len() - 1) as f64);
    }
    let ns = groups.iter().map(|g| g.len() as f64).collect();
    let parts = AnovaParts { ss_between, ss_within, grand_mean, k: groups.len(), total };
    anova_result(parts, means, vars, ns)
}

/// One-way ANOVA from group means, unbiased variances and sizes.
pub fn anova_oneway_summary(means: &[f64], vars: &[f64], ns: &[usize]) -> Result<TestResult> {
    if means.len() != vars.len() || means.len() != ns.len() {
        return Err(StatsError::Mismatch(format!(
            "{} means, {} variances, {} sizes",
            means.len(),
            vars.len(),
            ns.len()
        )));
    }
    let k = means.len();
    if k < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: k });
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(StatsError::InsufficientData { needed: 2, got: n });
    }
    if vars.iter().any(|v| !(*v >= 0.0)) || means.iter().any(|m| !m.is_finite()) {
        return Err(StatsError::Domain("means must be finite and variances nonnegative".into()));
    }
    let total: usize = ns.iter().sum();
    let grand_mean =
        means.iter().zip(ns).map(|(m, &n)| m * n as f64).sum::<f64>() / total as f64;
    let ss_between =
        means.iter().zip(ns).map(|(m, &n)| n as f64 * (m - grand_mean).powi(2)).sum::<f64>();
    let ss_within = vars.iter().zip(ns).map(|(v, &n)| (n - 1) as f64 * v).sum::<f64>();
    let parts = AnovaParts { ss_between, ss_within, grand_mean, k, total };
    anova_result(parts, means.to_vec(), vars.to_vec(), ns.iter().map(|&n| n as f64).collect())
}

/// F statistic for consecutive groups of `sizes` laid out in `data`.
pub(crate) fn anova_f_kernel(data: &[f64], sizes: &[usize]) -> Stat {
    let total = data.len();
    let grand = data.iter().sum::<f64>() / total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    let mut start = 0;
    for &n in sizes {
        let g = &data[start..start + n];
        let m = mean(g);
        ss_between += n as f64 * (m - grand).powi(2);
        ss_within += sum_sq_dev(g, m);
        start += n;
    }
    if ss_within > 0.0 {
        let k = sizes.len();
        Stat::Value((ss_between / (k - 1) as f64) / (ss_within / (total - k) as f64))
    } else {
        Stat::Degenerate
    }
}

/// Multiplier relating the pooled t statistic to a t variate when the two
/// population variances differ; exactly 1 for equal sizes or equal variances.
pub fn c_pooled_factor(n1: usize, n2: usize, var1: f64, var2: f64) -> Result<f64> {
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: n1.min(n2) });
    }
    if !(var1 > 0.0) || !(var2 > 0.0) {
        return Err(StatsError::Domain("c_pooled requires positive variances".into()));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let num = (a + b - 2.0) * (var1 / a + var2 / b);
    let den = (1.0 / a + 1.0 / b) * ((a - 1.0) * var1 + (b - 1.0) * var2);
    Ok((num / den).sqrt())
}

#[cfg(test)]
thread_local! {
    pub(crate) static NORMALITY_TEST_CALLS: std::cell::Cell<usize> = const { std::cell::Cell::new(0) };
}

/// Jarque–Bera statistic `n/6 · (S² + (K − 3)²/4)` with biased moments.
pub fn jb_statistic(g: &GroupSample) -> Result<f64> {
    require_len(g, 4)?;
    jb_from_slice(&g.scores)
        .ok_or_else(|| StatsError::Degenerate(format!("group '{}' has zero variance", g.id)))
}

pub(crate) fn jb_from_slice(xs: &[f64]) -> Option<f64> {
    #[cfg(test)]
    NORMALITY_TEST_CALLS.with(|c| c.set(c.get() + 1));
    let (m2, m3, m4) = central_moments(xs);
    if m2 <= 0.0 {
        return None;
    }
    let s = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2);
    Some(xs.len() as f64 / 6.0 * (s * s + 0.25 * (k - 3.0).powi(2)))
}
