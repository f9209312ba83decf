//! Statistical analysis of subjective quality (opinion score) data.
//!
//! The crate covers the parametric tests commonly applied to mean opinion
//! scores (pooled and Welch t-tests, one-way ANOVA), a permutation engine
//! that builds null sampling distributions directly from the data, and a
//! Monte Carlo harness for studying how those statistics behave when the
//! scores are not normally distributed.

pub mod descr;
pub mod dist;
pub mod error;
pub mod hypothesis;
pub mod resample;
pub mod sim;
pub mod workflow;


pub use descr::{GroupSample, SummaryStats};
pub use dist::{DistSpec, RngSeed};
pub use error::{Result, StatsError};
pub use hypothesis::{Df, Tail, TestMethod, TestResult};
pub use resample::{EmpiricalDistribution, HistogramData, StatisticKind};
