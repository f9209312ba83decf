//! Monte Carlo experiments: sampling distributions of F under non-normal
//! parents, the two-step (normality check, then test) procedure, and a
//! generator for synthetic treatment-effect data.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descr::GroupSample;
use crate::dist::{sf_unchecked, DistSpec, RngSeed, Sampler};
use crate::error::{Result, StatsError};
use crate::hypothesis::{anova_f_kernel, jb_from_slice, pooled_t_kernel, Stat, Tail};
use crate::resample::{
    p_value_from_values, permutation_null, permuted_stat, EmpiricalDistribution, StatisticKind,
    DEFAULT_BINS,
};

/// Permutations used by the nonparametric branch of the two-step procedure.
pub const TWO_STEP_PERMUTATIONS: usize = 999;
/// Null draws used to calibrate the Jarque–Bera critical value.
pub const JB_CALIBRATION_DRAWS: usize = 10_000;
const JB_CALIBRATION_SEED: u64 = 0x4A42_4341_4C49_4252;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltExperimentConfig {
    pub dist: DistSpec,
    pub k: usize,
    pub n: usize,
    pub n_iter: usize,
    pub seed: RngSeed,
}

impl CltExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(StatsError::InvalidConfig(format!("k must be at least 2, got {}", self.k)));
        }
        if self.n < 2 {
            return Err(StatsError::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n_iter == 0 {
            return Err(StatsError::InvalidConfig("n_iter must be positive".into()));
        }
        Sampler::new(&self.dist).map(|_| ())
    }
}

/// Sampling distribution of the one-way ANOVA F over `k` groups of `n`
/// independent draws from `cfg.dist`.
pub fn clt_experiment(cfg: &CltExperimentConfig) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    let sampler = Sampler::new(&cfg.dist)?;
    let sizes = vec![cfg.n; cfg.k];
    let stats: Vec<Stat> = (0..cfg.n_iter)
        .into_par_iter()
        .map_init(
            || vec![0.0; cfg.k * cfg.n],
            |buf, i| {
                let mut rng = cfg.seed.substream(i as u64).rng();
                sampler.fill(&mut rng, buf);
                anova_f_kernel(buf, &sizes)
            },
        )
        .collect();
    let values = stats
        .into_iter()
        .filter_map(|s| match s {
            Stat::Value(v) => Some(v),
            Stat::Degenerate => None,
        })
        .collect();
    EmpiricalDistribution::new(
        StatisticKind::FAnova,
        StatisticKind::FAnova.reference(&sizes),
        cfg.n_iter,
        values,
        DEFAULT_BINS,
    )
}

/// Permutation null distribution for user-supplied groups.
pub fn resample_experiment(
    groups: &[GroupSample],
    statistic_kind: StatisticKind,
    n_iter: usize,
    seed: RngSeed,
) -> Result<EmpiricalDistribution> {
    permutation_null(groups, statistic_kind, n_iter, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepResult {
    pub n: usize,
    pub dist: DistSpec,
    pub alpha: f64,
    pub n_iter: usize,
    pub seed: RngSeed,
    /// Rejection rate of the pooled t-test applied unconditionally.
    pub rate_direct: f64,
    /// Rejection rate of normality check followed by pooled t or permutation.
    pub rate_two_step: f64,
    /// Fraction of iterations sent to the permutation branch.
    pub rate_normality_reject: f64,
    pub jb_critical_value: f64,
}

/// Upper `alpha` point of the Jarque–Bera statistic for normal samples of
/// size `n`, by simulation. Results are cached per `(n, alpha)`.
pub fn jb_critical_value(n: usize, alpha: f64) -> Result<f64> {
    if n < 4 {
        return Err(StatsError::InsufficientData { needed: 4, got: n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, alpha.to_bits());
    if let Some(&c) = cache.lock().expect("cache lock").get(&key) {
        return Ok(c);
    }
    let sampler = Sampler::new(&DistSpec::STANDARD_NORMAL)?;
    let seed = RngSeed::with_stream(JB_CALIBRATION_SEED, n as u64);
    let mut values: Vec<f64> = (0..JB_CALIBRATION_DRAWS)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, i| {
                sampler.fill(&mut seed.substream(i as u64).rng(), buf);
                jb_from_slice(buf).unwrap_or(0.0)
            },
        )
        .collect();
    values.sort_unstable_by(f64::total_cmp);
    let rank = ((1.0 - alpha) * values.len() as f64).ceil() as usize;
    let c = values[rank.clamp(1, values.len()) - 1];
    cache.lock().expect("cache lock").insert(key, c);
    Ok(c)
}

fn pooled_t_rejects(t: Stat, df: f64, alpha: f64) -> bool {
    match t {
        Stat::Value(t) if t.is_infinite() => true,
        Stat::Value(t) => {
            let p = (2.0 * sf_unchecked(&DistSpec::StudentT { df }, t.abs())).min(1.0);
            p <= alpha
        }
        Stat::Degenerate => false,
    }
}

/// Type-I error of the pooled t-test alone versus the two-step procedure,
/// with both groups drawn from `dist` so the null is true.
pub fn two_step_experiment(
    n: usize,
    dist: &DistSpec,
    alpha: f64,
    n_iter: usize,
    seed: RngSeed,
) -> Result<TwoStepResult> {
    if n_iter == 0 {
        return Err(StatsError::InvalidConfig("n_iter must be positive".into()));
    }
    let sampler = Sampler::new(dist)?;
    let crit = jb_critical_value(n, alpha)?;
    let df = (2 * n - 2) as f64;
    let sizes = [n, n];
    // (direct reject, two-step reject, routed to permutation)
    let outcomes: Vec<(bool, bool, bool)> = (0..n_iter)
        .into_par_iter()
        .map_init(
            || (vec![0.0; 2 * n], vec![0.0; 2 * n], Vec::with_capacity(TWO_STEP_PERMUTATIONS)),
            |(data, buf, perm), i| {
                let mut rng = seed.substream(i as u64).rng();
                sampler.fill(&mut rng, data);
                let t = pooled_t_kernel(&data[..n], &data[n..]);
                let direct = pooled_t_rejects(t, df, alpha);
                let non_normal = |xs: &[f64]| jb_from_slice(xs).is_none_or(|jb| jb > crit);
                let routed = non_normal(&data[..n]) || non_normal(&data[n..]);
                if !routed {
                    return (direct, direct, false);
                }
                let Stat::Value(observed) = t else {
                    return (direct, false, true);
                };
                perm.clear();
                for _ in 0..TWO_STEP_PERMUTATIONS {
                    if let Stat::Value(v) =
                        permuted_stat(StatisticKind::TPooled, data, &sizes, buf, &mut rng)
                    {
                        perm.push(v);
                    }
                }
                let p = p_value_from_values(observed, perm, StatisticKind::TPooled, Tail::TwoSided)
                    .unwrap_or(1.0);
                (direct, p <= alpha, true)
            },
        )
        .collect();
    let rate = |f: fn(&(bool, bool, bool)) -> bool| {
        outcomes.iter().filter(|o| f(o)).count() as f64 / n_iter as f64
    };
    Ok(TwoStepResult {
        n,
        dist: *dist,
        alpha,
        n_iter,
        seed,
        rate_direct: rate(|o| o.0),
        rate_two_step: rate(|o| o.1),
        rate_normality_reject: rate(|o| o.2),
        jb_critical_value: crit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TreatmentMode {
    /// Every subject in a condition receives the same effect.
    #[default]
    Systematic,
    /// Each (subject, condition) effect is perturbed independently.
    Heterogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentConfig {
    pub mu_org: f64,
    pub effects: Vec<f64>,
    pub noise_sigma: f64,
    pub mode: TreatmentMode,
    /// Ignored in systematic mode.
    pub hetero_sigma: f64,
    pub n_subjects: usize,
    pub seed: RngSeed,
}

impl TreatmentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(StatsError::InvalidConfig(m));
        if self.effects.is_empty() {
            return bad("at least one effect is required".into());
        }
        if !self.mu_org.is_finite() || self.effects.iter().any(|e| !e.is_finite()) {
            return bad("mu_org and effects must be finite".into());
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be positive, got {}", self.noise_sigma));
        }
        if !(self.hetero_sigma >= 0.0 && self.hetero_sigma.is_finite()) {
            return bad(format!("hetero_sigma must be non-negative, got {}", self.hetero_sigma));
        }
        if self.n_subjects < 2 {
            return bad(format!("n_subjects must be at least 2, got {}", self.n_subjects));
        }
        Ok(())
    }
}

/// Scores `mu_org + effects[c] + ε_i (+ δ_ic)` for subjects `i` and
/// conditions `c`. The subject offsets `ε_i` are shared by all conditions;
/// `δ_ic ~ N(0, hetero_sigma²)` is added only in heterogeneous mode.
/// Groups are named `c0, c1, …` and hold scores in subject order.
pub fn generate_treatment_groups(cfg: &TreatmentConfig) -> Result<Vec<GroupSample>> {
    cfg.validate()?;
    let noise = Sampler::new(&DistSpec::Normal { mu: 0.0, sigma: cfg.noise_sigma })?;
    let mut rng = cfg.seed.rng();
    let eps: Vec<f64> = (0..cfg.n_subjects).map(|_| noise.draw(&mut rng)).collect();
    let std_normal = Sampler::new(&DistSpec::STANDARD_NORMAL)?;
    let mut hetero_rng = cfg.seed.substream(1).rng();
    cfg.effects
        .iter()
        .enumerate()
        .map(|(c, effect)| {
            let scores = eps
                .iter()
                .map(|e| {
                    let base = cfg.mu_org + effect + e;
                    match cfg.mode {
                        TreatmentMode::Systematic => base,
                        TreatmentMode::Heterogeneous => {
                            base + cfg.hetero_sigma * std_normal.draw(&mut hetero_rng)
                        }
                    }
                })
                .collect();
            GroupSample::new(format!("c{c}"), scores)
        })
        .collect()
}
