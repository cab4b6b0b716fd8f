//! Gamma fits of channel-power samples.

use crate::channel::{gamma_cdf, GammaModelParams};
use crate::error::{Error, Result};
use crate::montecarlo::{empirical_cdf, ks_distance};
use crate::specfun;
use serde::{Deserialize, Serialize};

pub const MIN_FIT_SAMPLES: usize = 1000;
const MLE_MAX_ITER: usize = 100;
const MLE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    Moments,
    MaxLikelihood,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GammaModelParams,
    pub n_samples: usize,
    pub method: FitMethod,
    /// in-sample Kolmogorov-Smirnov distance
    pub gof_ks: f64,
}

struct Summary {
    mean: f64,
    var: f64,
    mean_ln: f64,
}

fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_FIT_SAMPLES, got: samples.len() });
    }
    if samples.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Degenerate("samples must be positive and finite".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let mean_ln = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    if !(var > 1e-14 * mean * mean) {
        return Err(Error::Degenerate("sample variance vanishes".into()));
    }
    Ok(Summary { mean, var, mean_ln })
}

fn finish(samples: &[f64], alpha: f64, beta: f64, method: FitMethod) -> Result<FitResult> {
    let params = GammaModelParams { alpha, beta_scale: beta, beta_eff: 1.0 };
    let ecdf = empirical_cdf(samples)?;
    let gof_ks = ks_distance(&ecdf, |x| gamma_cdf(x, &params));
    Ok(FitResult { params, n_samples: samples.len(), method, gof_ks })
}

/// Moment matching: alpha = mean^2 / var, beta = var / mean.
pub fn fit_moments(samples: &[f64]) -> Result<FitResult> {
    let s = summarize(samples)?;
    finish(samples, s.mean * s.mean / s.var, s.var / s.mean, FitMethod::Moments)
}

// Newton on ln(a) - psi(a) = ln(mean) - mean(ln x).
fn mle_shape(target: f64, start: f64) -> Result<f64> {
    let mut a = start;
    for _ in 0..MLE_MAX_ITER {
        let f = a.ln() - specfun::digamma(a) - target;
        let df = 1.0 / a - specfun::trigamma(a);
        let mut next = a - f / df;
        if !(next > 0.0) || !next.is_finite() {
            next = 0.5 * a;
        }
        let step = (next - a).abs();
        a = next;
        if step <= MLE_REL_TOL * a {
            return Ok(a);
        }
    }
    Err(Error::Convergence { func: "fit_mle", terms: MLE_MAX_ITER })
}

/// Maximum likelihood fit, started from the moment estimate.
pub fn fit_mle(samples: &[f64]) -> Result<FitResult> {
    let s = summarize(samples)?;
    let target = s.mean.ln() - s.mean_ln;
    if !(target > 0.0) {
        return Err(Error::Degenerate("log-mean gap is not positive".into()));
    }
    let alpha = mle_shape(target, s.mean * s.mean / s.var)?;
    finish(samples, alpha, s.mean / alpha, FitMethod::MaxLikelihood)
}

/// Maximum likelihood, falling back to moments if Newton fails.
pub fn fit(samples: &[f64]) -> Result<FitResult> {
    match fit_mle(samples) {
        Err(e) if e.is_numerical() => fit_moments(samples),
        other => other,
    }
}

/// Scale estimate with the shape held fixed (the MLE is mean / alpha).
pub fn fit_scale_fixed_shape(samples: &[f64], alpha: f64) -> Result<GammaModelParams> {
    if !(alpha > 0.0) {
        return Err(Error::Config(format!("shape {alpha} must be positive")));
    }
    let s = summarize(samples)?;
    Ok(GammaModelParams { alpha, beta_scale: s.mean / alpha, beta_eff: 1.0 })
}
