//! Test selection for MOS comparisons.
//!
//! The procedure never runs a normality test. It asks the caller whether the
//! mean is an adequate summary, checks the ratio of smallest to largest
//! group variance and whether the design is balanced, and then picks the
//! pooled t-test, one-way ANOVA or a permutation test.

use serde::{Deserialize, Serialize};

use crate::descr::{moments, variance, GroupSample, SummaryStats};
use crate::dist::RngSeed;
use crate::error::{Result, StatsError};
use crate::hypothesis::{anova_oneway, t_test_pooled, Tail, TestResult};
use crate::resample::{permutation_test, PermutationOutcome, StatisticKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowConfig {
    pub alpha: f64,
    /// Flag heterogeneity when min/max group variance falls below this.
    pub variance_ratio_threshold: f64,
    /// Caller's judgement that the mean represents each group adequately.
    pub mean_adequate: bool,
    pub permutation_iters: usize,
    pub seed: RngSeed,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            variance_ratio_threshold: 0.25,
            mean_adequate: true,
            permutation_iters: 100_000,
            seed: RngSeed::new(0),
        }
    }
}

impl WorkflowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(StatsError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        check_threshold(self.variance_ratio_threshold)?;
        if self.permutation_iters == 0 {
            return Err(StatsError::InvalidConfig("permutation_iters must be positive".into()));
        }
        Ok(())
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidConfig(format!("variance ratio threshold must lie in (0, 1), got {t}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    /// Smallest over largest group variance.
    pub ratio: f64,
    pub heterogeneous: bool,
    /// When heterogeneous: the groups whose variance is furthest, as a
    /// factor, from the median group variance.
    pub offending_groups: Vec<String>,
}

/// Median with the geometric mean of the middle pair for even counts.
fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        (sorted[m - 1] * sorted[m]).sqrt()
    }
}

fn distance_factor(v: f64, med: f64) -> f64 {
    if v == med {
        1.0
    } else if v == 0.0 || med == 0.0 {
        f64::INFINITY
    } else {
        (v / med).max(med / v)
    }
}

pub fn variance_homogeneity_check(groups: &[GroupSample], threshold: f64) -> Result<VarianceCheck> {
    check_threshold(threshold)?;
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: groups.len() });
    }
    let vars = groups.iter().map(|g| variance(&g.scores)).collect::<Result<Vec<f64>>>()?;
    let max = vars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vars.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return Err(StatsError::Degenerate("every group has zero variance".into()));
    }
    let ratio = min / max;
    let heterogeneous = ratio < threshold;
    let offending_groups = if heterogeneous {
        let mut sorted = vars.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let med = median(&sorted);
        let factors: Vec<f64> = vars.iter().map(|&v| distance_factor(v, med)).collect();
        let worst = factors.iter().copied().fold(1.0, f64::max);
        groups
            .iter()
            .zip(&factors)
            .filter(|(_, &f)| f == worst || (worst.is_finite() && worst - f <= 1e-12 * worst))
            .map(|(g, _)| g.id.clone())
            .collect()
    } else {
        Vec::new()
    };
    Ok(VarianceCheck { ratio, heterogeneous, offending_groups })
}

/// True when every group has the same size.
pub fn balanced_check(groups: &[GroupSample]) -> bool {
    groups.windows(2).all(|w| w[0].len() == w[1].len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChosenMethod {
    TPooled,
    AnovaOneway,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub schema_version: u32,
    pub config: WorkflowConfig,
    pub groups_summary: Vec<SummaryStats>,
    pub variance_ratio: f64,
    pub heterogeneous_flag: bool,
    pub balanced_flag: bool,
    pub mean_adequate_flag: bool,
    pub offending_groups: Vec<String>,
    pub chosen_method: ChosenMethod,
    /// p-value of the chosen method.
    pub p_value: f64,
    pub significant: bool,
    pub parametric: Option<TestResult>,
    pub permutation: Option<PermutationOutcome>,
    /// Set when the variances differ strongly and the design is unbalanced.
    pub flagged: bool,
    pub checks_performed: Vec<String>,
    pub warnings: Vec<String>,
    pub rationale: Vec<String>,
}

fn parametric(groups: &[GroupSample]) -> Result<TestResult> {
    if groups.len() == 2 {
        t_test_pooled(&groups[0], &groups[1], Tail::TwoSided)
    } else {
        anova_oneway(groups)
    }
}

fn permutation(groups: &[GroupSample], cfg: &WorkflowConfig) -> Result<PermutationOutcome> {
    let kind = StatisticKind::for_group_count(groups.len());
    permutation_test(groups, kind, cfg.permutation_iters, cfg.seed, Tail::TwoSided).map(|(o, _)| o)
}

fn kind_name(groups: &[GroupSample]) -> &'static str {
    if groups.len() == 2 {
        "pooled t-test"
    } else {
        "one-way ANOVA"
    }
}

/// Choose and run the test for comparing the group means.
pub fn recommend(groups: &[GroupSample], cfg: &WorkflowConfig) -> Result<DecisionReport> {
    cfg.validate()?;
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: groups.len() });
    }
    let groups_summary = groups.iter().map(moments).collect::<Result<Vec<_>>>()?;
    let vc = variance_homogeneity_check(groups, cfg.variance_ratio_threshold)?;
    let balanced = balanced_check(groups);
    let parametric_method =
        if groups.len() == 2 { ChosenMethod::TPooled } else { ChosenMethod::AnovaOneway };

    let mut checks = vec!["mean_adequacy".to_string()];
    let mut warnings = Vec::new();
    let mut rationale = vec![
        "Decision path: mean adequacy, then variance ratio, then balance. The path is a \
         reconstruction of the recommended flow; no normality test is applied."
            .to_string(),
    ];
    let mut flagged = false;
    let (chosen, param, perm) = if !cfg.mean_adequate {
        rationale.push(
            "The mean was declared not to represent the groups adequately, so a permutation \
             test is used instead of a parametric test on means."
                .into(),
        );
        (ChosenMethod::Permutation, None, Some(permutation(groups, cfg)?))
    } else {
        checks.push("variance_homogeneity".into());
        checks.push("balanced_design".into());
        rationale.push(format!(
            "Mean declared adequate. Variance ratio min/max = {:.4} against threshold {}.",
            vc.ratio, cfg.variance_ratio_threshold
        ));
        match (vc.heterogeneous, balanced) {
            (false, _) => {
                rationale.push(format!("Variances are similar; running the {}.", kind_name(groups)));
                (parametric_method, Some(parametric(groups)?), None)
            }
            (true, true) => {
                warnings.push(format!(
                    "Group variances differ by more than a factor of {} (groups: {}). The design \
                     is balanced, so the pooled test remains valid.",
                    1.0 / cfg.variance_ratio_threshold,
                    vc.offending_groups.join(", ")
                ));
                rationale.push(format!(
                    "Variances are heterogeneous but the design is balanced; running the {}.",
                    kind_name(groups)
                ));
                (parametric_method, Some(parametric(groups)?), None)
            }
            (true, false) => {
                flagged = true;
                warnings.push(format!(
                    "STRONG WARNING: group variances differ by more than a factor of {} (groups: \
                     {}) and group sizes are unequal. The samples are likely drawn from different \
                     populations; revisit these conditions before relying on a test of means.",
                    1.0 / cfg.variance_ratio_threshold,
                    vc.offending_groups.join(", ")
                ));
                rationale.push(format!(
                    "Variances are heterogeneous and the design is unbalanced; reporting the {} \
                     alongside a permutation test for comparison.",
                    kind_name(groups)
                ));
                (parametric_method, Some(parametric(groups)?), Some(permutation(groups, cfg)?))
            }
        }
    };
    let p_value = match (chosen, &param, &perm) {
        (ChosenMethod::Permutation, _, Some(p)) => p.p_value,
        (_, Some(r), _) => r.p_value,
        _ => unreachable!("chosen method always has a result"),
    };
    rationale.push(format!(
        "p = {p_value:.6}; {} at alpha = {}.",
        if p_value <= cfg.alpha { "significant" } else { "not significant" },
        cfg.alpha
    ));
    Ok(DecisionReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        groups_summary,
        variance_ratio: vc.ratio,
        heterogeneous_flag: vc.heterogeneous,
        balanced_flag: balanced,
        mean_adequate_flag: cfg.mean_adequate,
        offending_groups: vc.offending_groups,
        chosen_method: chosen,
        p_value,
        significant: p_value <= cfg.alpha,
        parametric: param,
        permutation: perm,
        flagged,
        checks_performed: checks,
        warnings,
        rationale,
    })
}
