//! Descriptive statistics for groups of opinion scores.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};

/// The scores collected for one test condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub id: String,
    pub scores: Vec<f64>,
}

impl GroupSample {
    /// Build a group, rejecting empty or non-finite score vectors.
    pub fn new(id: impl Into<String>, scores: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if scores.is_empty() {
            return Err(StatsError::Empty(format!("group '{id}' has no scores")));
        }
        if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
            return Err(StatsError::Domain(format!("group '{id}' contains non-finite score {bad}")));
        }
        Ok(Self { id, scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Mean opinion score.
    pub fn mean(&self) -> f64 {
        mean(&self.scores)
    }
}

/// Per-group summary. `variance` is the unbiased (n − 1) estimate;
/// `skewness` and `kurtosis` use biased central moments and are `None` for
/// a constant group. Kurtosis is non-excess (3 for a normal population).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub id: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub sos: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the sample mean.
pub(crate) fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    let m = mean(xs);
    Ok(sum_sq_dev(xs, m) / (xs.len() - 1) as f64)
}

/// Biased central moments `(m2, m3, m4)`.
pub(crate) fn central_moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - m;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    (s2 / n, s3 / n, s4 / n)
}

/// Non-excess sample kurtosis `m4 / m2²`.
pub fn kurtosis(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    let (m2, _, m4) = central_moments(xs);
    if m2 == 0.0 {
        return Err(StatsError::Degenerate("kurtosis of a constant sample".into()));
    }
    Ok(m4 / (m2 * m2))
}

/// Sample skewness `m3 / m2^{3/2}`.
pub fn skewness(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    let (m2, m3, _) = central_moments(xs);
    if m2 == 0.0 {
        return Err(StatsError::Degenerate("skewness of a constant sample".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

pub fn moments(g: &GroupSample) -> Result<SummaryStats> {
    let n = g.len();
    if n < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: n });
    }
    let mean = g.mean();
    let variance = sum_sq_dev(&g.scores, mean) / (n - 1) as f64;
    let (m2, m3, m4) = central_moments(&g.scores);
    let (skewness, kurtosis) =
        if m2 > 0.0 { (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2))) } else { (None, None) };
    Ok(SummaryStats {
        id: g.id.clone(),
        n,
        mean,
        variance,
        sos: variance.sqrt(),
        skewness,
        kurtosis,
    })
}

/// Pooled variance `(s1²(n1−1) + s2²(n2−1)) / (n1 + n2 − 2)`.
pub fn pooled_variance(s1_sq: f64, n1: usize, s2_sq: f64, n2: usize) -> Result<f64> {
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: n1.min(n2) });
    }
    if !(s1_sq >= 0.0) || !(s2_sq >= 0.0) {
        return Err(StatsError::Domain("variances must be nonnegative".into()));
    }
    if n1 == n2 {
        return Ok(0.5 * (s1_sq + s2_sq));
    }
    let w1 = (n1 - 1) as f64;
    let w2 = (n2 - 1) as f64;
    Ok((s1_sq * w1 + s2_sq * w2) / (w1 + w2))
}

/// Mean over all observations of all groups.
pub fn grand_mean(groups: &[GroupSample]) -> Result<f64> {
    if groups.is_empty() {
        return Err(StatsError::Empty("grand mean of zero groups".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for g in groups {
        if g.is_empty() {
            return Err(StatsError::Empty(format!("group '{}' has no scores", g.id)));
        }
        total += g.scores.iter().sum::<f64>();
        count += g.len();
    }
    Ok(total / count as f64)
}

/// Fraction of scores strictly below `threshold` (percentage of dissatisfied users).
pub fn pdu(g: &GroupSample, threshold: f64) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    g.scores.iter().filter(|&&s| s < threshold).count() as f64 / g.len() as f64
}
