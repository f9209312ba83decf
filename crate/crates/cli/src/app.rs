use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qstat::descr::{grand_mean, moments, pdu};
use qstat::hypothesis::{anova_oneway, t_test_pooled, t_test_welch};
use qstat::resample::{permutation_test, PermutationOutcome, DEFAULT_BINS};
use qstat::sim::{
    clt_experiment, generate_treatment_groups, two_step_experiment, CltExperimentConfig,
    TreatmentConfig, TreatmentMode,
};
use qstat::workflow::{balanced_check, recommend, variance_homogeneity_check, VarianceCheck, WorkflowConfig};
use qstat::{DistSpec, EmpiricalDistribution, GroupSample, RngSeed, StatisticKind, SummaryStats, Tail, TestResult};

use crate::data::{load_csv, write_groups_csv, OpinionDataset};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "QSTAT_THREADS";

/// Bad flag combinations detected after parsing; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Debug, Parser)]
#[command(name = "qstat", version, about = "Significance tests and Monte Carlo studies for opinion scores")]
pub struct Cli {
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-condition MOS, SOS, skewness, kurtosis and optional PDU.
    Describe(DescribeArgs),
    /// Two-sample t-test between two conditions.
    Ttest(TtestArgs),
    /// One-way ANOVA across conditions.
    Anova(DataArgs),
    /// Min/max group variance ratio and balance check.
    CheckVariance(CheckVarianceArgs),
    /// Choose a test and report the decision path.
    Workflow(WorkflowArgs),
    /// Permutation test with histogram export.
    Permute(PermuteArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Sim(SimCommand),
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Sampling distribution of the ANOVA F for a non-normal parent.
    Clt(CltArgs),
    /// Type-I error of normality-gated testing versus the direct t-test.
    TwoStep(TwoStepArgs),
    /// Generate synthetic treatment-effect scores as CSV.
    Treatment(TreatmentArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Long-format CSV with header `subject,condition,score`.
    pub data: PathBuf,
    /// Comma-separated condition ids (default: all, in file order).
    #[arg(long, value_delimiter = ',')]
    pub conditions: Vec<String>,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Report the fraction of scores strictly below this value.
    #[arg(long)]
    pub pdu_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TtestMethod {
    Pooled,
    Welch,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TailArg {
    TwoSided,
    Left,
    Right,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::TwoSided => Tail::TwoSided,
            TailArg::Left => Tail::Left,
            TailArg::Right => Tail::Right,
        }
    }
}

#[derive(Debug, Args)]
pub struct TtestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "pooled")]
    pub method: TtestMethod,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub tail: TailArg,
}

#[derive(Debug, Args)]
pub struct CheckVarianceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Flag heterogeneity when min/max variance is below this.
    #[arg(long, default_value_t = 0.25)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct WorkflowArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    pub threshold: f64,
    /// Declare that the mean does not summarize the groups adequately.
    #[arg(long)]
    pub mean_not_adequate: bool,
    /// Permutations used when a permutation test is run.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatisticArg {
    /// Pooled t (two conditions).
    T,
    /// One-way ANOVA F.
    F,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[arg(long, default_value_t = DEFAULT_BINS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
    /// Write the histogram as CSV to this file.
    #[arg(long, value_name = "PATH")]
    pub hist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PermuteArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Statistic to permute (default: t for two conditions, F otherwise).
    #[arg(long, value_enum)]
    pub statistic: Option<StatisticArg>,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub tail: TailArg,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub hist: HistArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistArg {
    /// Beta(0.5, 0.5).
    Beta,
    /// Exponential with rate 0.5.
    Exponential,
    /// Standard normal.
    Normal,
    /// Uniform on [0, 1].
    Uniform,
}

impl DistArg {
    pub fn spec(self) -> DistSpec {
        let name = self.to_possible_value().expect("no skipped variants").get_name().to_owned();
        DistSpec::preset(&name).expect("every DistArg is a preset")
    }
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long, value_enum)]
    pub dist: DistArg,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub hist: HistArgs,
}

#[derive(Debug, Args)]
pub struct TwoStepArgs {
    #[arg(long, value_enum)]
    pub dist: DistArg,
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Systematic,
    Heterogeneous,
}

#[derive(Debug, Args)]
pub struct TreatmentArgs {
    /// Baseline MOS.
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub mu_org: f64,
    /// Comma-separated effect per condition, e.g. `0,-1.2,-3.1`.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub effects: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub noise_sigma: f64,
    #[arg(long, value_enum, default_value = "systematic")]
    pub mode: ModeArg,
    /// Spread of per-subject effects (heterogeneous mode only).
    #[arg(long)]
    pub hetero_sigma: Option<f64>,
    #[arg(long, default_value_t = 24)]
    pub subjects: usize,
    #[arg(long)]
    pub seed: u64,
    /// Where to write the generated scores.
    #[arg(long, value_name = "PATH")]
    pub csv: PathBuf,
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    seed: Option<u64>,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(out: Option<&Path>, command: &str, seed: Option<u64>, body: T) -> Result<()> {
    let json = serde_json::to_string_pretty(&Output { schema_version: SCHEMA_VERSION, command, seed, body })?;
    match out {
        Some(path) => {
            let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            writeln!(f, "{json}")?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match writeln!(lock, "{json}") {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn write_hist(dist: &mut EmpiricalDistribution, args: &HistArgs) -> Result<()> {
    let Some(path) = &args.hist else { return Ok(()) };
    dist.rebin(args.bins as usize)?;
    let hist = dist
        .histogram
        .as_ref()
        .context("no histogram: every iteration was degenerate")?;
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(f);
    hist.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn load(args: &DataArgs) -> Result<(OpinionDataset, Vec<GroupSample>)> {
    let data = load_csv(&args.data)?;
    let groups = data.select(&args.conditions)?;
    Ok((data, groups))
}

fn ids(groups: &[GroupSample]) -> Vec<&str> {
    groups.iter().map(|g| g.id.as_str()).collect()
}

/// Caps rayon's global pool when `QSTAT_THREADS` is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure thread pool")
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Describe(a) => describe(out, a),
        Command::Ttest(a) => ttest(out, a),
        Command::Anova(a) => anova(out, a),
        Command::CheckVariance(a) => check_variance(out, a),
        Command::Workflow(a) => workflow(out, a),
        Command::Permute(a) => permute(out, a),
        Command::Sim(SimCommand::Clt(a)) => sim_clt(out, a),
        Command::Sim(SimCommand::TwoStep(a)) => sim_two_step(out, a),
        Command::Sim(SimCommand::Treatment(a)) => sim_treatment(out, a),
    }
}

#[derive(Serialize)]
struct ConditionSummary {
    #[serde(flatten)]
    stats: SummaryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pdu: Option<f64>,
}

fn describe(out: Option<&Path>, a: DescribeArgs) -> Result<()> {
    let (_, groups) = load(&a.data)?;
    let conditions = groups
        .iter()
        .map(|g| Ok(ConditionSummary { stats: moments(g)?, pdu: a.pdu_threshold.map(|t| pdu(g, t)) }))
        .collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Body {
        #[serde(skip_serializing_if = "Option::is_none")]
        pdu_threshold: Option<f64>,
        grand_mean: f64,
        conditions: Vec<ConditionSummary>,
    }
    let body = Body { pdu_threshold: a.pdu_threshold, grand_mean: grand_mean(&groups)?, conditions };
    emit(out, "describe", None, body)
}

#[derive(Serialize)]
struct TestBody<'a> {
    conditions: Vec<&'a str>,
    #[serde(flatten)]
    result: TestResult,
}

fn ttest(out: Option<&Path>, a: TtestArgs) -> Result<()> {
    if !a.data.conditions.is_empty() && a.data.conditions.len() != 2 {
        return usage(format!("ttest needs exactly two conditions, got {}", a.data.conditions.len()));
    }
    let (data, groups) = load(&a.data)?;
    if groups.len() != 2 {
        return usage(format!(
            "ttest needs exactly two conditions; the data has {} ({}), pass --conditions",
            groups.len(),
            data.conditions().join(", ")
        ));
    }
    let result = match a.method {
        TtestMethod::Pooled => t_test_pooled(&groups[0], &groups[1], a.tail.into())?,
        TtestMethod::Welch => t_test_welch(&groups[0], &groups[1], a.tail.into())?,
    };
    emit(out, "ttest", None, TestBody { conditions: ids(&groups), result })
}

fn anova(out: Option<&Path>, a: DataArgs) -> Result<()> {
    let (_, groups) = load(&a)?;
    let result = anova_oneway(&groups)?;
    emit(out, "anova", None, TestBody { conditions: ids(&groups), result })
}

fn check_variance(out: Option<&Path>, a: CheckVarianceArgs) -> Result<()> {
    let (_, groups) = load(&a.data)?;
    let check = variance_homogeneity_check(&groups, a.threshold)?;
    #[derive(Serialize)]
    struct Body<'a> {
        conditions: Vec<&'a str>,
        threshold: f64,
        #[serde(flatten)]
        check: VarianceCheck,
        balanced: bool,
        variances: Vec<f64>,
    }
    let variances = groups.iter().map(|g| moments(g).map(|s| s.variance)).collect::<Result<_, _>>()?;
    let body = Body {
        conditions: ids(&groups),
        threshold: a.threshold,
        check,
        balanced: balanced_check(&groups),
        variances,
    };
    emit(out, "check-variance", None, body)
}

fn workflow(out: Option<&Path>, a: WorkflowArgs) -> Result<()> {
    let (_, groups) = load(&a.data)?;
    let cfg = WorkflowConfig {
        alpha: a.alpha,
        variance_ratio_threshold: a.threshold,
        mean_adequate: !a.mean_not_adequate,
        permutation_iters: a.iters as usize,
        seed: RngSeed::new(a.seed),
    };
    let report = recommend(&groups, &cfg)?;
    #[derive(Serialize)]
    struct Body {
        report: qstat::workflow::DecisionReport,
    }
    emit(out, "workflow", Some(a.seed), Body { report })
}

fn permute(out: Option<&Path>, a: PermuteArgs) -> Result<()> {
    let (_, groups) = load(&a.data)?;
    let kind = match a.statistic {
        Some(StatisticArg::T) if groups.len() != 2 => {
            return usage(format!("--statistic t needs exactly two conditions, got {}", groups.len()))
        }
        Some(StatisticArg::T) => StatisticKind::TPooled,
        Some(StatisticArg::F) => StatisticKind::FAnova,
        None => StatisticKind::for_group_count(groups.len()),
    };
    let (outcome, mut dist) =
        permutation_test(&groups, kind, a.iters as usize, RngSeed::new(a.seed), a.tail.into())?;
    write_hist(&mut dist, &a.hist)?;
    #[derive(Serialize)]
    struct Body<'a> {
        conditions: Vec<&'a str>,
        #[serde(flatten)]
        outcome: PermutationOutcome,
        reference: DistSpec,
        empirical_mean: Option<f64>,
        bins: u64,
    }
    let body = Body {
        conditions: ids(&groups),
        outcome,
        reference: dist.reference,
        empirical_mean: dist.mean(),
        bins: a.hist.bins,
    };
    emit(out, "permute", Some(a.seed), body)
}

fn sim_clt(out: Option<&Path>, a: CltArgs) -> Result<()> {
    let cfg = CltExperimentConfig {
        dist: a.dist.spec(),
        k: a.k,
        n: a.n,
        n_iter: a.iters as usize,
        seed: RngSeed::new(a.seed),
    };
    let mut dist = clt_experiment(&cfg)?;
    write_hist(&mut dist, &a.hist)?;
    #[derive(Serialize)]
    struct Body {
        dist: DistSpec,
        k: usize,
        n: usize,
        n_iter: usize,
        reference: DistSpec,
        ks_distance: Option<f64>,
        empirical_mean: Option<f64>,
        reference_mean: Option<f64>,
        degenerate_count: usize,
        bins: u64,
    }
    let body = Body {
        dist: cfg.dist,
        k: cfg.k,
        n: cfg.n,
        n_iter: cfg.n_iter,
        reference: dist.reference,
        ks_distance: dist.ks_distance,
        empirical_mean: dist.mean(),
        reference_mean: dist.reference.mean(),
        degenerate_count: dist.degenerate_count,
        bins: a.hist.bins,
    };
    emit(out, "sim clt", Some(a.seed), body)
}

fn sim_two_step(out: Option<&Path>, a: TwoStepArgs) -> Result<()> {
    let r = two_step_experiment(a.n, &a.dist.spec(), a.alpha, a.iters as usize, RngSeed::new(a.seed))?;
    #[derive(Serialize)]
    struct Body {
        dist: DistSpec,
        n: usize,
        alpha: f64,
        n_iter: usize,
        rate_direct: f64,
        rate_two_step: f64,
        rate_normality_reject: f64,
        jb_critical_value: f64,
    }
    let body = Body {
        dist: r.dist,
        n: r.n,
        alpha: r.alpha,
        n_iter: r.n_iter,
        rate_direct: r.rate_direct,
        rate_two_step: r.rate_two_step,
        rate_normality_reject: r.rate_normality_reject,
        jb_critical_value: r.jb_critical_value,
    };
    emit(out, "sim two-step", Some(a.seed), body)
}

fn sim_treatment(out: Option<&Path>, a: TreatmentArgs) -> Result<()> {
    let (mode, hetero_sigma) = match (a.mode, a.hetero_sigma) {
        (ModeArg::Systematic, Some(_)) => {
            return usage("--hetero-sigma conflicts with --mode systematic")
        }
        (ModeArg::Systematic, None) => (TreatmentMode::Systematic, 0.0),
        (ModeArg::Heterogeneous, s) => (TreatmentMode::Heterogeneous, s.unwrap_or(1.0)),
    };
    let cfg = TreatmentConfig {
        mu_org: a.mu_org,
        effects: a.effects,
        noise_sigma: a.noise_sigma,
        mode,
        hetero_sigma,
        n_subjects: a.subjects,
        seed: RngSeed::new(a.seed),
    };
    let groups = generate_treatment_groups(&cfg)?;
    let f = File::create(&a.csv).with_context(|| format!("cannot create {}", a.csv.display()))?;
    write_groups_csv(&groups, BufWriter::new(f))?;
    #[derive(Serialize)]
    struct Body {
        mu_org: f64,
        effects: Vec<f64>,
        noise_sigma: f64,
        mode: TreatmentMode,
        hetero_sigma: f64,
        n_subjects: usize,
        conditions: Vec<SummaryStats>,
    }
    let conditions = groups.iter().map(moments).collect::<Result<_, _>>()?;
    let body = Body {
        mu_org: cfg.mu_org,
        effects: cfg.effects,
        noise_sigma: cfg.noise_sigma,
        mode: cfg.mode,
        hetero_sigma: cfg.hetero_sigma,
        n_subjects: cfg.n_subjects,
        conditions,
    };
    emit(out, "sim treatment", Some(a.seed), body)
}
