//! Adaptive random-walk Metropolis with an optional binary indicator.
//!
//! Each sweep updates every continuous coordinate with its own Gaussian
//! proposal. During warmup the proposal scales are adjusted every
//! [`ADAPT_INTERVAL`] iterations to keep acceptance between 20 % and 40 %.
//! When the target has an indicator, it is redrawn by Gibbs from its
//! conditional odds after each sweep, and coordinates that only enter the
//! likelihood while the indicator is on are drawn from their prior while it
//! is off.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::descriptive::{mean, sample_variance};
use super::StatsError;

const ADAPT_INTERVAL: usize = 50;
const TARGET_LOW: f64 = 0.2;
const TARGET_HIGH: f64 = 0.4;
/// Start points are spread this many initial step sizes around the target's initial point.
const INIT_SPREAD: f64 = 3.0;

/// A posterior over unconstrained coordinates.
pub trait Target: Sync {
    fn names(&self) -> Vec<String>;

    /// Starting point in unconstrained coordinates.
    fn initial(&self) -> Vec<f64>;

    /// Initial proposal standard deviations.
    fn initial_steps(&self) -> Vec<f64> {
        vec![0.1; self.names().len()]
    }

    /// Unnormalized log posterior (prior, likelihood and Jacobian) with the
    /// indicator, if any, held at `indicator`.
    fn log_density(&self, theta: &[f64], indicator: bool) -> f64;

    /// Prior probability of the indicator being on, if the model has one.
    fn indicator_prior(&self) -> Option<f64> {
        None
    }

    /// Coordinates that only enter the likelihood while the indicator is on.
    fn gated(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Draw for a gated coordinate from its prior.
    fn sample_prior(&self, _index: usize, _rng: &mut ChaCha8Rng) -> f64 {
        unreachable!("target declares no gated coordinates")
    }

    /// Maps unconstrained coordinates to the reported parameters, which
    /// must have the same length and order as [`Target::names`].
    fn constrain(&self, theta: &[f64], _indicator: bool) -> Vec<f64> {
        theta.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcSettings {
    pub chains: usize,
    pub draws: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for McmcSettings {
    fn default() -> Self {
        McmcSettings {
            chains: 4,
            draws: 2000,
            warmup: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrace {
    pub names: Vec<String>,
    /// Per parameter, chain after chain, `draws` values each.
    pub values: Vec<Vec<f64>>,
    /// Indicator draws as 0/1, laid out like `values`.
    pub indicator: Option<Vec<f64>>,
    /// Parameters that are prior draws while the indicator is off.
    pub gated: Vec<usize>,
    /// Post-warmup acceptance rate per parameter, averaged over chains.
    pub acceptance: Vec<f64>,
    pub chains: usize,
    pub draws: usize,
    pub warmup: usize,
}

impl PosteriorTrace {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn samples(&self, name: &str) -> Option<&[f64]> {
        self.index(name).map(|i| self.values[i].as_slice())
    }

    pub fn chain(&self, name: &str, chain: usize) -> Option<&[f64]> {
        let all = self.samples(name)?;
        all.get(chain * self.draws..(chain + 1) * self.draws)
    }

    /// Split-chain potential scale reduction of one parameter.
    pub fn rhat(&self, name: &str) -> Option<f64> {
        let chains: Vec<&[f64]> = (0..self.chains).map(|c| self.chain(name, c)).collect::<Option<_>>()?;
        Some(gelman_rubin(&chains))
    }

    /// Draws of a parameter that belong to the model it is part of: for
    /// gated parameters only those with the indicator on.
    pub fn active_samples(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.index(name)?;
        match (&self.indicator, self.gated.contains(&i)) {
            (Some(ind), true) => Some(
                self.values[i]
                    .iter()
                    .zip(ind)
                    .filter(|(_, on)| **on == 1.0)
                    .map(|(v, _)| *v)
                    .collect(),
            ),
            _ => Some(self.values[i].clone()),
        }
    }

    pub fn max_rhat(&self) -> f64 {
        self.names
            .iter()
            .filter_map(|n| self.rhat(n))
            .fold(f64::NAN, f64::max)
    }
}

/// Split-chain R̂: each chain is halved, then the classic between/within
/// variance ratio is formed. Returns 1 for constant traces.
pub fn gelman_rubin(chains: &[&[f64]]) -> f64 {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[h..2 * h]]
        })
        .filter(|h| h.len() >= 2)
        .collect();
    if halves.len() < 2 {
        return f64::NAN;
    }
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h).unwrap_or(f64::NAN)).collect();
    let within = halves.iter().map(|h| sample_variance(h).unwrap_or(f64::NAN)).sum::<f64>() / halves.len() as f64;
    let between = n * sample_variance(&means).unwrap_or(f64::NAN);
    if within == 0.0 {
        return if between == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    (var_plus / within).sqrt()
}

/// Monte-Carlo standard error of the mean by non-overlapping batch means.
pub fn monte_carlo_se(values: &[f64]) -> f64 {
    let batch = (values.len() as f64).sqrt().floor().max(1.0) as usize;
    let means: Vec<f64> = values
        .chunks_exact(batch)
        .map(|c| c.iter().sum::<f64>() / batch as f64)
        .collect();
    match sample_variance(&means) {
        Ok(v) => (v / means.len() as f64).sqrt(),
        Err(_) => f64::NAN,
    }
}

struct ChainResult {
    values: Vec<Vec<f64>>,
    indicator: Vec<f64>,
    acceptance: Vec<f64>,
}

pub fn mcmc_sample<T: Target + ?Sized>(target: &T, settings: &McmcSettings) -> Result<PosteriorTrace, StatsError> {
    if settings.chains == 0 || settings.draws == 0 {
        return Err(StatsError::Invalid("need at least one chain and one draw".into()));
    }
    let names = target.names();
    let initial = target.initial();
    if initial.len() != names.len() {
        return Err(StatsError::Invalid("initial point does not match parameter names".into()));
    }
    let start_on = target.indicator_prior().is_some();
    if !target.log_density(&initial, start_on).is_finite() {
        return Err(StatsError::NonFiniteInit);
    }

    let results: Vec<ChainResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..settings.chains)
            .map(|c| scope.spawn(move || run_chain(target, settings, c as u64)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain panicked")).collect()
    });

    let dim = names.len();
    let mut values = vec![Vec::with_capacity(settings.chains * settings.draws); dim];
    let mut indicator = Vec::new();
    let mut acceptance = vec![0.0; dim];
    for r in &results {
        for j in 0..dim {
            values[j].extend_from_slice(&r.values[j]);
            acceptance[j] += r.acceptance[j] / settings.chains as f64;
        }
        indicator.extend_from_slice(&r.indicator);
    }
    Ok(PosteriorTrace {
        names,
        values,
        indicator: start_on.then_some(indicator),
        gated: target.gated(),
        acceptance,
        chains: settings.chains,
        draws: settings.draws,
        warmup: settings.warmup,
    })
}

fn run_chain<T: Target + ?Sized>(target: &T, settings: &McmcSettings, chain: u64) -> ChainResult {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(chain);
    let prior_on = target.indicator_prior();
    let gated = target.gated();
    let base = target.initial();
    let dim = base.len();
    let mut steps = target.initial_steps();
    let mut on = prior_on.is_some();

    // jittered start so that R̂ can detect non-mixing chains
    let mut theta = base.clone();
    for _ in 0..100 {
        for (t, (b, s)) in theta.iter_mut().zip(base.iter().zip(&steps)) {
            *t = b + INIT_SPREAD * s * rng.sample::<f64, _>(StandardNormal);
        }
        if target.log_density(&theta, on).is_finite() {
            break;
        }
        theta.clone_from(&base);
    }
    let mut current = target.log_density(&theta, on);

    let mut values = vec![Vec::with_capacity(settings.draws); dim];
    let mut indicator = Vec::with_capacity(settings.draws);
    let mut window_accepts = vec![0usize; dim];
    let mut window_tries = vec![0usize; dim];
    let mut accepts = vec![0usize; dim];
    let mut tries = vec![0usize; dim];

    for iter in 0..settings.warmup + settings.draws {
        let sampling = iter >= settings.warmup;
        for j in 0..dim {
            if !on && gated.contains(&j) {
                theta[j] = target.sample_prior(j, &mut rng);
                current = target.log_density(&theta, on);
                continue;
            }
            let old = theta[j];
            theta[j] = old + steps[j] * rng.sample::<f64, _>(StandardNormal);
            let proposed = target.log_density(&theta, on);
            let accept = proposed.is_finite() && rng.gen::<f64>().ln() < proposed - current;
            if accept {
                current = proposed;
            } else {
                theta[j] = old;
            }
            if sampling {
                tries[j] += 1;
                accepts[j] += accept as usize;
            } else {
                window_tries[j] += 1;
                window_accepts[j] += accept as usize;
            }
        }
        if let Some(p) = prior_on {
            let ld_on = target.log_density(&theta, true) + p.ln();
            let ld_off = target.log_density(&theta, false) + (1.0 - p).ln();
            let prob_on = 1.0 / (1.0 + (ld_off - ld_on).exp());
            on = rng.gen::<f64>() < prob_on;
            current = target.log_density(&theta, on);
        }
        if !sampling && (iter + 1) % ADAPT_INTERVAL == 0 {
            for j in 0..dim {
                if window_tries[j] == 0 {
                    continue;
                }
                let rate = window_accepts[j] as f64 / window_tries[j] as f64;
                if rate < TARGET_LOW {
                    steps[j] *= 0.6;
                } else if rate > TARGET_HIGH {
                    steps[j] *= 1.6;
                }
                window_accepts[j] = 0;
                window_tries[j] = 0;
            }
        }
        if sampling {
            for (v, x) in values.iter_mut().zip(target.constrain(&theta, on)) {
                v.push(x);
            }
            indicator.push(if on { 1.0 } else { 0.0 });
        }
    }
    let acceptance = accepts
        .iter()
        .zip(&tries)
        .map(|(&a, &t)| if t == 0 { f64::NAN } else { a as f64 / t as f64 })
        .collect();
    ChainResult {
        values,
        indicator,
        acceptance,
    }
}
