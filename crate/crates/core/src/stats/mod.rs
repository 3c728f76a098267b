//! Frequentist and Bayesian evaluation of benchmark results.

mod descriptive;
mod intervals;
mod mcmc;
mod models;
mod wilcoxon;

use thiserror::Error;

pub use descriptive::{mean, quantile, quantile_sorted, sample_sd, sample_variance, skewness};
pub use intervals::{confidence_interval_mean, hpd_interval, rope_decision, rope_verdict, RopeVerdict, MIN_HPD_SAMPLES};
pub use mcmc::{gelman_rubin, mcmc_sample, monte_carlo_se, McmcSettings, PosteriorTrace, Target};
pub use models::{
    bayes_factor_indicator, fit_model, summarize, BayesFactor, BoundKind, ModelData, ModelSpec, ModelVariant,
    ParamSummary, PosteriorSummary, Prior, RegressionTarget, RHAT_WARNING,
};
pub use wilcoxon::{wilcoxon_signed_rank, PairedSample, WilcoxonResult, EXACT_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    NotEnoughData { needed: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("log density is not finite at the initial point; consider rescaling the data")]
    NonFiniteInit,
}
