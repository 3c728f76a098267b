//! Confidence intervals, HPD intervals and ROPE decisions.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::descriptive::{mean, sample_sd};
use super::StatsError;

pub const MIN_HPD_SAMPLES: usize = 100;

/// Student-t interval for the mean at confidence `level`.
pub fn confidence_interval_mean(values: &[f64], level: f64) -> Result<(f64, f64), StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Invalid(format!("confidence level {level} outside (0, 1)")));
    }
    let sd = sample_sd(values)?;
    let m = mean(values)?;
    let k = values.len() as f64;
    let t = StudentsT::new(0.0, 1.0, k - 1.0)
        .map_err(|e| StatsError::Invalid(e.to_string()))?
        .inverse_cdf((1.0 + level) / 2.0);
    let half = t * sd / k.sqrt();
    Ok((m - half, m + half))
}

/// Shortest window over the sorted samples holding `ceil(mass · k)` of
/// them; among equally short windows the lowest one wins.
pub fn hpd_interval(samples: &[f64], mass: f64) -> Result<(f64, f64), StatsError> {
    if samples.len() < MIN_HPD_SAMPLES {
        return Err(StatsError::NotEnoughData {
            needed: MIN_HPD_SAMPLES,
            got: samples.len(),
        });
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(StatsError::Invalid(format!("HPD mass {mass} outside (0, 1]")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::Invalid("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    // the epsilon keeps 0.95 · 100 from rounding up to 96
    let window = ((mass * k as f64 - 1e-9).ceil() as usize).clamp(1, k);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for i in 0..=k - window {
        let width = sorted[i + window - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best = i;
        }
    }
    Ok((sorted[best], sorted[best + window - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RopeVerdict {
    PracticallyEquivalent,
    Different,
    Inconclusive,
}

impl RopeVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            RopeVerdict::PracticallyEquivalent => "practically_equivalent",
            RopeVerdict::Different => "different",
            RopeVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Compares an interval with a region of practical equivalence.
pub fn rope_verdict(interval: (f64, f64), rope_low: f64, rope_high: f64) -> Result<RopeVerdict, StatsError> {
    if rope_low.is_nan() || rope_high.is_nan() || rope_low >= rope_high {
        return Err(StatsError::Invalid(format!("empty ROPE [{rope_low}, {rope_high}]")));
    }
    let (lo, hi) = interval;
    if lo > hi {
        return Err(StatsError::Invalid(format!("interval [{lo}, {hi}] is reversed")));
    }
    Ok(if lo >= rope_low && hi <= rope_high {
        RopeVerdict::PracticallyEquivalent
    } else if hi < rope_low || lo > rope_high {
        RopeVerdict::Different
    } else {
        RopeVerdict::Inconclusive
    })
}

pub fn rope_decision(samples: &[f64], rope_low: f64, rope_high: f64, hpd_mass: f64) -> Result<RopeVerdict, StatsError> {
    rope_verdict(hpd_interval(samples, hpd_mass)?, rope_low, rope_high)
}
