//! Cascaded Rician channel: element statistics, the three surrogate models
//! for the combined channel power, and the exact single-element product
//! density used as a reference.
//!
//! Every model assumes coherent combining, i.e. the combined amplitude is
//! sqrt(beta) * sum_m |h_BR,m| |h_RU,m|.

use crate::error::{Error, Result};
use crate::specfun::{self, Hyp2f1Value};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkSide {
    #[serde(rename = "rfl")]
    Reflecting,
    #[serde(rename = "rfr")]
    Transmitting,
}

impl LinkSide {
    pub const BOTH: [LinkSide; 2] = [LinkSide::Reflecting, LinkSide::Transmitting];

    pub fn tag(self) -> &'static str {
        match self {
            LinkSide::Reflecting => "rfl",
            LinkSide::Transmitting => "rfr",
        }
    }
}

/// Rician amplitude with unit second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianParams {
    pub k: f64,
    pub h_bar: f64,
    pub eta: f64,
}

pub fn rician_moments(k: f64) -> Result<RicianParams> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain("rician_moments", format!("k = {k} must be nonnegative")));
    }
    let h_bar = (std::f64::consts::PI / (4.0 * (1.0 + k))).sqrt() * specfun::hyp1f1(-0.5, 1.0, -k)?;
    Ok(RicianParams { k, h_bar, eta: 1.0 - h_bar * h_bar })
}

/// Rician amplitude density 2(1+k)e^{-k} x exp(-(1+k)x^2) I0(2 sqrt(k(1+k)) x).
pub fn rician_pdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = 2.0 * (k * (1.0 + k)).sqrt() * x;
    // scaled I0 keeps large-k evaluations finite
    2.0 * (1.0 + k) * x * (-(1.0 + k) * x * x - k + z).exp() * specfun::bessel_i0_scaled(z)
}

/// Surface operating protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProtocolConfig {
    /// energy splitting: every element splits its energy between sides
    ES { beta_rfl: f64, beta_rfr: f64 },
    /// mode switching: elements are partitioned between sides
    MS { m_rfl: u32, m_rfr: u32 },
    /// time switching: all elements serve one side per time block
    TS { lambda_rfl: f64, lambda_rfr: f64 },
}

impl ProtocolConfig {
    pub fn es(beta_rfl: f64) -> Self {
        ProtocolConfig::ES { beta_rfl, beta_rfr: 1.0 - beta_rfl }
    }

    /// Mode switching with ceil(frac * M) elements on the reflecting side.
    pub fn ms_fraction(m: u32, frac_rfl: f64) -> Self {
        let m_rfl = ((frac_rfl * m as f64) - 1e-9).ceil().clamp(0.0, m as f64) as u32;
        ProtocolConfig::MS { m_rfl, m_rfr: m - m_rfl }
    }

    pub fn ts(lambda_rfl: f64) -> Self {
        ProtocolConfig::TS { lambda_rfl, lambda_rfr: 1.0 - lambda_rfl }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ProtocolConfig::ES { .. } => "ES",
            ProtocolConfig::MS { .. } => "MS",
            ProtocolConfig::TS { .. } => "TS",
        }
    }

    pub fn validate(&self, m: u32) -> Result<()> {
        if m < 1 {
            return Err(Error::Config("element count must be at least 1".into()));
        }
        match *self {
            ProtocolConfig::ES { beta_rfl, beta_rfr } => {
                let ok = (0.0..=1.0).contains(&beta_rfl) && (0.0..=1.0).contains(&beta_rfr);
                if !ok || (beta_rfl + beta_rfr - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "ES fractions {beta_rfl} + {beta_rfr} must lie in [0,1] and sum to 1"
                    )));
                }
            }
            ProtocolConfig::MS { m_rfl, m_rfr } => {
                if m_rfl + m_rfr != m {
                    return Err(Error::Config(format!("MS split {m_rfl} + {m_rfr} must sum to M = {m}")));
                }
            }
            ProtocolConfig::TS { lambda_rfl, lambda_rfr } => {
                let ok = (0.0..=1.0).contains(&lambda_rfl) && (0.0..=1.0).contains(&lambda_rfr);
                if !ok || (lambda_rfl + lambda_rfr - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "TS fractions {lambda_rfl} + {lambda_rfr} must lie in [0,1] and sum to 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// (active element count, energy fraction) seen by one side.
    pub fn active(&self, m: u32, side: LinkSide) -> (u32, f64) {
        match (*self, side) {
            (ProtocolConfig::ES { beta_rfl, .. }, LinkSide::Reflecting) => (m, beta_rfl),
            (ProtocolConfig::ES { beta_rfr, .. }, LinkSide::Transmitting) => (m, beta_rfr),
            (ProtocolConfig::MS { m_rfl, .. }, LinkSide::Reflecting) => (m_rfl, 1.0),
            (ProtocolConfig::MS { m_rfr, .. }, LinkSide::Transmitting) => (m_rfr, 1.0),
            // time switching: each user owns every element during its block
            (ProtocolConfig::TS { .. }, _) => (m, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannelStats {
    pub h_bar_eq: f64,
    pub eta_eq: f64,
    pub m_active: u32,
    pub beta_eff: f64,
}

/// Gaussian-approximation parameters when both hops share `rp`.
pub fn effective_stats(
    m: u32,
    rp: &RicianParams,
    proto: &ProtocolConfig,
    side: LinkSide,
) -> Result<EffectiveChannelStats> {
    effective_stats_cascade(m, rp, rp, proto, side)
}

/// Gaussian-approximation parameters with separate BR and RU statistics.
///
/// One element contributes mean h1 h2 and variance 1 - (h1 h2)^2; for
/// equal hops that is h^2 and 2 h^2 eta + eta^2.
pub fn effective_stats_cascade(
    m: u32,
    rp_br: &RicianParams,
    rp_ru: &RicianParams,
    proto: &ProtocolConfig,
    side: LinkSide,
) -> Result<EffectiveChannelStats> {
    proto.validate(m)?;
    let (m_active, beta_eff) = proto.active(m, side);
    if m_active == 0 || beta_eff == 0.0 {
        return Err(Error::Config(format!(
            "the {} side receives no elements or energy under {}",
            side.tag(),
            proto.tag()
        )));
    }
    let mean1 = rp_br.h_bar * rp_ru.h_bar;
    let var1 = if rp_br == rp_ru {
        2.0 * rp_br.h_bar * rp_br.h_bar * rp_br.eta + rp_br.eta * rp_br.eta
    } else {
        1.0 - mean1 * mean1
    };
    let mf = m_active as f64;
    Ok(EffectiveChannelStats {
        h_bar_eq: beta_eff.sqrt() * mf * mean1,
        eta_eq: beta_eff * mf * var1,
        m_active,
        beta_eff,
    })
}

/// Common density/distribution contract for the combined channel power.
pub trait ChannelModel {
    fn pdf(&self, y: f64) -> f64;
    fn cdf(&self, y: f64) -> f64;
}

/// Gaussian approximation of the combined amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralLimitModel(pub EffectiveChannelStats);

pub fn cl_cdf(y: f64, stats: &EffectiveChannelStats) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let s = (2.0 * stats.eta_eq).sqrt();
    (0.5 * specfun::erf_span(stats.h_bar_eq / s, y.sqrt() / s)).clamp(0.0, 1.0)
}

pub fn cl_pdf(y: f64, stats: &EffectiveChannelStats) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let r = y.sqrt();
    let two_eta = 2.0 * stats.eta_eq;
    let ap = (stats.h_bar_eq + r).powi(2) / two_eta;
    let am = (stats.h_bar_eq - r).powi(2) / two_eta;
    ((-ap).exp() + (-am).exp()) / (2.0 * (std::f64::consts::PI * two_eta * y).sqrt())
}

impl ChannelModel for CentralLimitModel {
    fn pdf(&self, y: f64) -> f64 {
        cl_pdf(y, &self.0)
    }
    fn cdf(&self, y: f64) -> f64 {
        cl_cdf(y, &self.0)
    }
}

/// sigma(t, n) coefficient of the near-origin Laplace expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaValue {
    pub value: f64,
    pub regularized: bool,
}

/// Coefficient sigma(t, n) for hops with shape factors k1 (BR) and k2 (RU).
///
/// The hypergeometric factor sits at unit argument, where it diverges for
/// t >= n; those values are taken at 1 - `delta` and flagged.
pub fn mfold_sigma(t: u32, n: u32, k1: f64, k2: f64, delta: f64) -> Result<SigmaValue> {
    if !(k1 >= 0.0 && k2 >= 0.0) {
        return Err(Error::domain("mfold_sigma", "shape factors must be nonnegative"));
    }
    let (tf, nf) = (t as f64, n as f64);
    let p = (1.0 + k1) * (1.0 + k2);
    let pow = |k: f64, e: f64| if e == 0.0 { 1.0 } else { k.powf(e) };
    let ln_mag = (tf - nf + 1.0) * 4f64.ln() + 0.5 * std::f64::consts::PI.ln() + (tf + 1.0) * p.ln()
        - 2.0 * specfun::ln_factorial(t)
        - 2.0 * specfun::ln_factorial(n)
        - (k1 + k2)
        + specfun::lgamma(2.0 * nf + 2.0)
        + specfun::lgamma(2.0 * tf + 2.0)
        - specfun::lgamma(tf + nf + 2.5);
    let Hyp2f1Value { value: f, regularized } =
        specfun::hyp2f1_unit(2.0 * tf + 2.0, tf - nf + 0.5, tf + nf + 2.5, delta)?;
    let value = pow(k1, tf) * pow(k2, nf) * ln_mag.exp() * f;
    Ok(SigmaValue { value, regularized })
}

/// Near-origin M-fold model: CDF = sigma^M x^M / (2 beta^M M (2M-1)!).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MFoldModel {
    pub m_eff: u32,
    pub beta_eff: f64,
    pub sigma00: f64,
}

impl MFoldModel {
    fn ln_cdf(&self, x: f64) -> f64 {
        let m = self.m_eff as f64;
        m * (self.sigma00.ln() + x.ln() - self.beta_eff.ln())
            - 2f64.ln()
            - m.ln()
            - specfun::lgamma(2.0 * m)
    }
}

pub fn mfold_cdf(x: f64, m_eff: u32, beta_eff: f64, sigma00: f64) -> f64 {
    MFoldModel { m_eff, beta_eff, sigma00 }.cdf(x)
}

pub fn mfold_pdf(x: f64, m_eff: u32, beta_eff: f64, sigma00: f64) -> f64 {
    MFoldModel { m_eff, beta_eff, sigma00 }.pdf(x)
}

impl ChannelModel for MFoldModel {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.ln_cdf(x).exp().min(1.0)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln_f = self.ln_cdf(x);
        if ln_f >= 0.0 {
            // the monomial has reached 1; the asymptotic form is exhausted
            return 0.0;
        }
        self.m_eff as f64 * ln_f.exp() / x
    }
}

/// Density of |h1| |h2| for independent unit-power Rician amplitudes.
pub fn exact_product_pdf(z: f64, k1: f64, k2: f64, series_cap: usize) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("exact_product_pdf", format!("z = {z} must be positive")));
    }
    let p = (1.0 + k1) * (1.0 + k2);
    let arg = 2.0 * z * p.sqrt();
    let ln_k = specfun::ln_bessel_k_int_orders(series_cap, arg)?;
    let base = 4f64.ln() - k1 - k2 + p.ln() + z.ln();
    let ln_k1 = if k1 > 0.0 { k1.ln() } else { f64::NEG_INFINITY };
    let ln_k2 = if k2 > 0.0 { k2.ln() } else { f64::NEG_INFINITY };
    let mut total = 0.0;
    let mut edge_max = 0.0f64;
    for t in 0..=series_cap {
        for n in 0..=series_cap {
            let (tf, nf) = (t as f64, n as f64);
            let lk1 = if t == 0 { 0.0 } else { tf * ln_k1 };
            let lk2 = if n == 0 { 0.0 } else { nf * ln_k2 };
            let ln_term = base + lk1 + lk2 + (tf + nf) * (0.5 * p.ln() + z.ln())
                - 2.0 * specfun::ln_factorial(t as u32)
                - 2.0 * specfun::ln_factorial(n as u32)
                + ln_k[t.abs_diff(n)];
            let term = ln_term.exp();
            total += term;
            if t == series_cap || n == series_cap {
                edge_max = edge_max.max(term);
            }
        }
    }
    if edge_max > 1e-12 * total {
        return Err(Error::Convergence { func: "exact_product_pdf", terms: series_cap });
    }
    Ok(total)
}

/// Gamma surrogate for the combined channel power, scale beta_eff * beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaModelParams {
    pub alpha: f64,
    pub beta_scale: f64,
    pub beta_eff: f64,
}

impl GammaModelParams {
    /// Shape pinned to the active element count and the scale matched to
    /// the exact mean power beta_eff (M + M(M-1) (h1 h2)^2).
    pub fn structural(m_eff: u32, beta_eff: f64, rp_br: &RicianParams, rp_ru: &RicianParams) -> Self {
        let m = m_eff as f64;
        let mu2 = (rp_br.h_bar * rp_ru.h_bar).powi(2);
        GammaModelParams { alpha: m, beta_scale: 1.0 + (m - 1.0) * mu2, beta_eff }
    }

    pub fn theta(&self) -> f64 {
        self.beta_eff * self.beta_scale
    }
}

pub fn gamma_pdf(x: f64, p: &GammaModelParams) -> f64 {
    if x <= 0.0 {
        return if p.alpha == 1.0 && x == 0.0 { 1.0 / p.theta() } else { 0.0 };
    }
    let th = p.theta();
    ((p.alpha - 1.0) * x.ln() - x / th - specfun::lgamma(p.alpha) - p.alpha * th.ln()).exp()
}

pub fn gamma_cdf(x: f64, p: &GammaModelParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    specfun::lower_inc_gamma_reg(p.alpha, x / p.theta()).unwrap_or(f64::NAN)
}

impl ChannelModel for GammaModelParams {
    fn pdf(&self, x: f64) -> f64 {
        gamma_pdf(x, self)
    }
    fn cdf(&self, x: f64) -> f64 {
        gamma_cdf(x, self)
    }
}

/// Exact mean of the combined channel power.
pub fn mean_channel_power(m_eff: u32, beta_eff: f64, rp_br: &RicianParams, rp_ru: &RicianParams) -> f64 {
    let m = m_eff as f64;
    beta_eff * (m + m * (m - 1.0) * (rp_br.h_bar * rp_ru.h_bar).powi(2))
}
