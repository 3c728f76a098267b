//! Log-log regression models for running times.
//!
//! All variants share the form
//!
//! ```text
//! y_i ~ Normal(alpha + beta * x_i + I * gamma * z_i, sigma^2)
//! ```
//!
//! * `SizeScaling`: y = log T(n), x = log n, no z term.
//! * `RelativeTime`: y = log T_A, x = log T_B on the same instance.
//! * `RelativeTimeWithDiameter`: adds z = log diameter behind a binary
//!   indicator I with prior probability 1/2.
//!
//! The sampler works on centered covariates and log sigma; reported values
//! are on the original scale.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist};

use super::descriptive::mean;
use super::intervals::hpd_interval;
use super::mcmc::{mcmc_sample, McmcSettings, PosteriorTrace, Target};
use super::StatsError;

/// Chains whose R̂ reaches this value are flagged as unconverged.
pub const RHAT_WARNING: f64 = 1.05;
const HPD_MASS: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    SizeScaling,
    RelativeTime,
    RelativeTimeWithDiameter,
}

impl ModelVariant {
    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::SizeScaling => "size_scaling",
            ModelVariant::RelativeTime => "relative_time",
            ModelVariant::RelativeTimeWithDiameter => "relative_time_with_diameter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ModelVariant::SizeScaling,
            ModelVariant::RelativeTime,
            ModelVariant::RelativeTimeWithDiameter,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Normal { mean: f64, sd: f64 },
    InverseGamma { shape: f64, scale: f64 },
}

impl Prior {
    fn log_density(self, x: f64) -> f64 {
        match self {
            Prior::Normal { mean, sd } => -0.5 * ((x - mean) / sd).powi(2) - sd.ln(),
            Prior::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -(shape + 1.0) * x.ln() - scale / x
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: ModelVariant,
    pub alpha: Prior,
    pub beta: Prior,
    pub gamma: Prior,
    /// Prior on the noise standard deviation sigma.
    pub sigma: Prior,
    pub indicator_prior: f64,
}

impl ModelSpec {
    pub fn new(variant: ModelVariant) -> Self {
        ModelSpec {
            variant,
            alpha: Prior::Normal { mean: 0.0, sd: 10.0 },
            // prior belief: equal scaling
            beta: Prior::Normal { mean: 1.0, sd: 10.0 },
            gamma: Prior::Normal { mean: 0.0, sd: 10.0 },
            sigma: Prior::InverseGamma { shape: 1.0, scale: 1.0 },
            indicator_prior: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// Required only by the diameter variant.
    pub z: Option<Vec<f64>>,
}

impl ModelData {
    /// Takes positive measurements and moves them to log scale.
    pub fn from_positive(y: &[f64], x: &[f64], z: Option<&[f64]>) -> Result<Self, StatsError> {
        let log = |v: &[f64], what: &str| -> Result<Vec<f64>, StatsError> {
            v.iter()
                .map(|&a| {
                    if a > 0.0 && a.is_finite() {
                        Ok(a.ln())
                    } else {
                        Err(StatsError::Invalid(format!("{what} value {a} is not positive")))
                    }
                })
                .collect()
        };
        Ok(ModelData {
            y: log(y, "response")?,
            x: log(x, "covariate")?,
            z: z.map(|z| log(z, "diameter")).transpose()?,
        })
    }
}

/// The regression posterior as an MCMC target.
#[derive(Debug, Clone)]
pub struct RegressionTarget {
    spec: ModelSpec,
    y: Vec<f64>,
    /// Centered covariates.
    xc: Vec<f64>,
    zc: Option<Vec<f64>>,
    x_mean: f64,
    z_mean: f64,
    init: Vec<f64>,
    steps: Vec<f64>,
}

impl RegressionTarget {
    pub fn new(spec: ModelSpec, data: &ModelData) -> Result<Self, StatsError> {
        let n = data.y.len();
        if n < 3 || data.x.len() != n {
            return Err(StatsError::Invalid(format!(
                "need at least 3 observations with matching covariates, got {} and {}",
                n,
                data.x.len()
            )));
        }
        let with_z = spec.variant == ModelVariant::RelativeTimeWithDiameter;
        let z = match (&data.z, with_z) {
            (Some(z), true) if z.len() == n => Some(z.clone()),
            (_, true) => return Err(StatsError::Invalid("diameter model needs one diameter per observation".into())),
            (_, false) => None,
        };
        if data.y.iter().chain(&data.x).chain(z.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(StatsError::Invalid("non-finite observation".into()));
        }
        let x_mean = mean(&data.x)?;
        let xc: Vec<f64> = data.x.iter().map(|x| x - x_mean).collect();
        let (z_mean, zc) = match &z {
            Some(z) => {
                let m = mean(z)?;
                (m, Some(z.iter().map(|v| v - m).collect::<Vec<_>>()))
            }
            None => (0.0, None),
        };

        let (intercept, coef, resid_sd) = least_squares(&data.y, &xc, zc.as_deref());
        let sigma0 = resid_sd.max(1e-3);
        let nf = n as f64;
        let sxx = xc.iter().map(|v| v * v).sum::<f64>().max(1e-12);
        let mut init = vec![intercept, coef[0]];
        let mut steps = vec![sigma0 / nf.sqrt(), sigma0 / sxx.sqrt()];
        if let (Some(zc), Some(g)) = (&zc, coef.get(1)) {
            let szz = zc.iter().map(|v| v * v).sum::<f64>().max(1e-12);
            init.push(*g);
            steps.push(sigma0 / szz.sqrt());
        }
        init.push(sigma0.ln());
        steps.push(1.0 / (2.0 * nf).sqrt());

        Ok(RegressionTarget {
            spec,
            y: data.y.clone(),
            xc,
            zc,
            x_mean,
            z_mean,
            init,
            steps,
        })
    }

    fn has_gamma(&self) -> bool {
        self.zc.is_some()
    }

    /// (alpha on the original scale, beta, gamma, sigma).
    fn unpack(&self, theta: &[f64], on: bool) -> (f64, f64, f64, f64) {
        let beta = theta[1];
        let gamma = if self.has_gamma() { theta[2] } else { 0.0 };
        let sigma = theta[theta.len() - 1].exp();
        let active_gamma = if on { gamma } else { 0.0 };
        let alpha = theta[0] - beta * self.x_mean - active_gamma * self.z_mean;
        (alpha, beta, gamma, sigma)
    }
}

/// Ordinary least squares of y on centered x (and z):
/// returns intercept, slopes and residual standard deviation.
fn least_squares(y: &[f64], xc: &[f64], zc: Option<&[f64]>) -> (f64, Vec<f64>, f64) {
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let sxx = dot(xc, xc);
    let coef = match zc {
        None => vec![if sxx > 0.0 { dot(xc, &yc) / sxx } else { 0.0 }],
        Some(zc) => {
            let (szz, sxz) = (dot(zc, zc), dot(xc, zc));
            let (sxy, szy) = (dot(xc, &yc), dot(zc, &yc));
            let det = sxx * szz - sxz * sxz;
            if det.abs() > 1e-12 {
                vec![(szz * sxy - sxz * szy) / det, (sxx * szy - sxz * sxy) / det]
            } else {
                vec![if sxx > 0.0 { sxy / sxx } else { 0.0 }, 0.0]
            }
        }
    };
    let resid: f64 = (0..y.len())
        .map(|i| {
            let fit = coef[0] * xc[i] + zc.map_or(0.0, |z| coef[1] * z[i]);
            (yc[i] - fit).powi(2)
        })
        .sum();
    let dof = (n - 1.0 - coef.len() as f64).max(1.0);
    (y_mean, coef, (resid / dof).sqrt())
}

impl Target for RegressionTarget {
    fn names(&self) -> Vec<String> {
        let mut names = vec!["alpha".to_string(), "beta".to_string()];
        if self.has_gamma() {
            names.push("gamma".into());
        }
        names.push("sigma".into());
        names
    }

    fn initial(&self) -> Vec<f64> {
        self.init.clone()
    }

    fn initial_steps(&self) -> Vec<f64> {
        self.steps.clone()
    }

    fn log_density(&self, theta: &[f64], on: bool) -> f64 {
        let (alpha, beta, gamma, sigma) = self.unpack(theta, on);
        let log_sigma = theta[theta.len() - 1];
        // the shift from the centered intercept to alpha has unit Jacobian;
        // + log_sigma is the Jacobian of sigma = exp(log_sigma)
        let mut lp = self.spec.alpha.log_density(alpha)
            + self.spec.beta.log_density(beta)
            + self.spec.sigma.log_density(sigma)
            + log_sigma;
        if self.has_gamma() {
            lp += self.spec.gamma.log_density(gamma);
        }
        let g = if on { gamma } else { 0.0 };
        let inv_var = 1.0 / (sigma * sigma);
        let mut ss = 0.0;
        for i in 0..self.y.len() {
            let mut mu = theta[0] + beta * self.xc[i];
            if let Some(zc) = &self.zc {
                mu += g * zc[i];
            }
            ss += (self.y[i] - mu).powi(2);
        }
        lp - self.y.len() as f64 * log_sigma - 0.5 * ss * inv_var
    }

    fn indicator_prior(&self) -> Option<f64> {
        self.has_gamma().then_some(self.spec.indicator_prior)
    }

    fn gated(&self) -> Vec<usize> {
        if self.has_gamma() {
            vec![2]
        } else {
            Vec::new()
        }
    }

    fn sample_prior(&self, index: usize, rng: &mut ChaCha8Rng) -> f64 {
        debug_assert_eq!(index, 2);
        match self.spec.gamma {
            Prior::Normal { mean, sd } => NormalDist::new(mean, sd).expect("valid prior").sample(rng),
            Prior::InverseGamma { .. } => unreachable!("gamma prior is normal"),
        }
    }

    fn constrain(&self, theta: &[f64], on: bool) -> Vec<f64> {
        let (alpha, beta, gamma, sigma) = self.unpack(theta, on);
        let mut out = vec![alpha, beta];
        if self.has_gamma() {
            out.push(gamma);
        }
        out.push(sigma);
        out
    }
}

pub fn fit_model(spec: &ModelSpec, data: &ModelData, settings: &McmcSettings) -> Result<PosteriorTrace, StatsError> {
    if settings.draws < 1000 {
        return Err(StatsError::Invalid(format!(
            "at least 1000 draws per chain required, got {}",
            settings.draws
        )));
    }
    let target = RegressionTarget::new(spec.clone(), data)?;
    mcmc_sample(&target, settings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub rhat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    /// Posterior probability of the indicator, if present.
    pub inclusion: Option<BayesFactor>,
    pub warning: Option<String>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Fixed-width table with HPD columns.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:>12} {:>12} {:>12} {:>8}\n", "", "HPD 2.5", "Mean", "HPD 97.5", "R-hat");
        for p in &self.params {
            let rhat = if p.rhat.is_finite() { format!("{:.3}", p.rhat) } else { "-".into() };
            out += &format!(
                "{:<8} {:>12.4} {:>12.4} {:>12.4} {:>8}\n",
                p.name, p.hpd_low, p.mean, p.hpd_high, rhat
            );
        }
        if let Some(bf) = &self.inclusion {
            out += &format!(
                "inclusion probability {:.4}, Bayes factor {}{:.3}\n",
                bf.inclusion_probability,
                match bf.bound {
                    BoundKind::Exact => "",
                    BoundKind::AtLeast => ">= ",
                    BoundKind::AtMost => "<= ",
                },
                bf.bayes_factor
            );
        }
        if let Some(w) = &self.warning {
            out += &format!("warning: {w}\n");
        }
        out
    }
}

/// Mean, 95 % HPD and R̂ per parameter. Gated parameters are summarized
/// over the draws with the indicator on and skipped when there are too few.
pub fn summarize(trace: &PosteriorTrace) -> Result<PosteriorSummary, StatsError> {
    let mut params = Vec::new();
    let mut worst: f64 = 1.0;
    for (i, name) in trace.names.iter().enumerate() {
        let values = trace.active_samples(name).expect("name from trace");
        if trace.gated.contains(&i) && values.len() < super::intervals::MIN_HPD_SAMPLES {
            continue;
        }
        let (hpd_low, hpd_high) = hpd_interval(&values, HPD_MASS)?;
        // a gated parameter's chains mix prior and posterior draws
        let rhat = if trace.gated.contains(&i) {
            f64::NAN
        } else {
            trace.rhat(name).unwrap_or(f64::NAN)
        };
        if rhat >= RHAT_WARNING {
            worst = worst.max(rhat);
        }
        params.push(ParamSummary {
            name: name.clone(),
            mean: mean(&values)?,
            hpd_low,
            hpd_high,
            rhat,
        });
    }
    let warning = (worst >= RHAT_WARNING).then(|| format!("chains may not have converged (max R-hat {worst:.3})"));
    let inclusion = trace
        .indicator
        .as_deref()
        .map(|ind| bayes_factor_indicator(ind, 1.0))
        .transpose()?;
    Ok(PosteriorSummary {
        params,
        inclusion,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    /// Every draw had the indicator on; the factor is a lower bound.
    AtLeast,
    /// Every draw had the indicator off; the factor is an upper bound.
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesFactor {
    pub inclusion_probability: f64,
    pub bayes_factor: f64,
    pub bound: BoundKind,
}

/// Posterior odds of the indicator divided by the prior odds. When all `k`
/// draws agree, the probability is moved by the resolution 1/k and the
/// result is reported as a bound.
pub fn bayes_factor_indicator(indicator: &[f64], prior_odds: f64) -> Result<BayesFactor, StatsError> {
    if indicator.is_empty() {
        return Err(StatsError::NotEnoughData { needed: 1, got: 0 });
    }
    if !(prior_odds > 0.0 && prior_odds.is_finite()) {
        return Err(StatsError::Invalid(format!("prior odds {prior_odds} must be positive")));
    }
    if indicator.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(StatsError::Invalid("indicator samples must be 0 or 1".into()));
    }
    let k = indicator.len() as f64;
    let p = indicator.iter().sum::<f64>() / k;
    let (effective, bound) = if p == 1.0 {
        (1.0 - 1.0 / k, BoundKind::AtLeast)
    } else if p == 0.0 {
        (1.0 / k, BoundKind::AtMost)
    } else {
        (p, BoundKind::Exact)
    };
    Ok(BayesFactor {
        inclusion_probability: p,
        bayes_factor: effective / (1.0 - effective) / prior_odds,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    use super::*;

    fn settings(seed: u64) -> McmcSettings {
        McmcSettings {
            chains: 4,
            draws: 1500,
            warmup: 1000,
            seed,
        }
    }

    fn synthetic(alpha: f64, beta: f64, sigma: f64, n: usize, seed: u64) -> ModelData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|i| 1.0 + 8.0 * i as f64 / n as f64).collect();
        let y = x
            .iter()
            .map(|x| alpha + beta * x + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        ModelData { y, x, z: None }
    }

    use rand::Rng;

    #[test]
    fn bayes_factor_values() {
        let half: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        assert_eq!(bayes_factor_indicator(&half, 1.0).unwrap().bayes_factor, 1.0);
        let mut v = vec![1.0; 945];
        v.extend(vec![0.0; 55]);
        let bf = bayes_factor_indicator(&v, 1.0).unwrap();
        assert!((bf.bayes_factor - 17.1818).abs() < 1e-3);
        let all = bayes_factor_indicator(&[1.0; 100], 1.0).unwrap();
        assert_eq!(all.bound, BoundKind::AtLeast);
        assert!((all.bayes_factor - 99.0).abs() < 1e-9);
        let none = bayes_factor_indicator(&[0.0; 100], 1.0).unwrap();
        assert_eq!(none.bound, BoundKind::AtMost);
        assert!(bayes_factor_indicator(&[0.5], 1.0).is_err());
    }

    #[test]
    fn near_deterministic_slope() {
        let data = synthetic(0.3, 2.0, 0.01, 30, 1);
        let trace = fit_model(&ModelSpec::new(ModelVariant::RelativeTime), &data, &settings(2)).unwrap();
        let summary = summarize(&trace).unwrap();
        assert!((summary.get("beta").unwrap().mean - 2.0).abs() < 0.05);
        assert!(summary.warning.is_none(), "{summary:?}");
    }

    #[test]
    fn exact_ratio_gives_unit_slope() {
        for a in [-1.0, 0.0, 2.0] {
            let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() * 3.0 + 2.0).collect();
            // a tiny deterministic wobble keeps sigma away from zero
            let y: Vec<f64> = x.iter().enumerate().map(|(i, x)| a + x + 1e-3 * ((i % 3) as f64 - 1.0)).collect();
            let data = ModelData { y, x, z: None };
            let s = summarize(&fit_model(&ModelSpec::new(ModelVariant::RelativeTime), &data, &settings(5)).unwrap()).unwrap();
            let beta = s.get("beta").unwrap();
            let alpha = s.get("alpha").unwrap();
            assert!(beta.hpd_low <= 1.0 && 1.0 <= beta.hpd_high, "{beta:?}");
            assert!((beta.mean - 1.0).abs() < 1e-2);
            assert!(alpha.hpd_low <= a && a <= alpha.hpd_high, "{alpha:?}");
        }
    }

    #[test]
    fn variants_and_table() {
        assert_eq!(ModelVariant::parse("relative_time"), Some(ModelVariant::RelativeTime));
        assert_eq!(ModelVariant::parse("nope"), None);
        let data = synthetic(-5.22, 1.01, 1.13, 30, 4);
        let s = summarize(&fit_model(&ModelSpec::new(ModelVariant::RelativeTime), &data, &settings(1)).unwrap()).unwrap();
        let table = s.to_table();
        for needle in ["HPD 2.5", "Mean", "HPD 97.5", "alpha", "beta", "sigma"] {
            assert!(table.contains(needle), "{table}");
        }
    }

    #[test]
    fn diameter_model_requires_diameters() {
        let data = synthetic(0.0, 1.0, 0.5, 10, 1);
        let spec = ModelSpec::new(ModelVariant::RelativeTimeWithDiameter);
        assert!(RegressionTarget::new(spec, &data).is_err());
        assert!(fit_model(&ModelSpec::new(ModelVariant::RelativeTime), &data, &McmcSettings { draws: 10, ..settings(0) }).is_err());
    }

    #[test]
    fn log_transform_rejects_non_positive() {
        assert!(ModelData::from_positive(&[1.0, 0.0], &[1.0, 2.0], None).is_err());
        let d = ModelData::from_positive(&[1.0, std::f64::consts::E], &[1.0, 1.0], None).unwrap();
        assert_eq!(d.y, [0.0, 1.0]);
    }
}
