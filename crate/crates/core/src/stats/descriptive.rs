//! Sample moments and quantiles.

use super::StatsError;

fn require(values: &[f64], min: usize) -> Result<(), StatsError> {
    if values.len() < min {
        return Err(StatsError::NotEnoughData {
            needed: min,
            got: values.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::Invalid(format!("non-finite value {v}")));
    }
    Ok(())
}

pub fn mean(values: &[f64]) -> Result<f64, StatsError> {
    require(values, 1)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Unbiased (k − 1) variance.
pub fn sample_variance(values: &[f64]) -> Result<f64, StatsError> {
    require(values, 2)?;
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok(ss / (values.len() - 1) as f64)
}

pub fn sample_sd(values: &[f64]) -> Result<f64, StatsError> {
    Ok(sample_variance(values)?.sqrt())
}

/// Moment skewness g1 = m3 / m2^(3/2); zero for constant data.
pub fn skewness(values: &[f64]) -> Result<f64, StatsError> {
    require(values, 3)?;
    let m = mean(values)?;
    let k = values.len() as f64;
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / k;
    let m3 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / k;
    if m2 == 0.0 {
        return Ok(0.0);
    }
    Ok(m3 / m2.powf(1.5))
}

/// Linear-interpolation quantile (R type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> Result<f64, StatsError> {
    require(values, 1)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::Invalid(format!("quantile level {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 6.0]).unwrap(), 3.0);
        assert_eq!(sample_variance(&[2.0, 4.0, 6.0]).unwrap(), 4.0);
        assert!(sample_variance(&[1.0]).is_err());
        assert!(mean(&[]).is_err());
        assert!(mean(&[f64::NAN]).is_err());
        assert_eq!(skewness(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(skewness(&[1.0, 1.0, 1.0, 10.0]).unwrap() > 1.0);
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.25).unwrap(), 2.0);
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&v, 0.75).unwrap(), 4.0);
        let w = [100.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&w, 0.25).unwrap(), 1.75);
        assert_eq!(quantile(&w, 0.75).unwrap(), 27.25);
    }
}
