//! Outage probabilities from the channel models, averaged over the user
//! position (density 2x/R^2 on the disc).
//!
//! The closed forms are Maclaurin expansions of the erf / incomplete-gamma
//! CDFs integrated term by term. They alternate, with intermediate terms
//! that can exceed the result by tens of orders of magnitude, so they are
//! summed in double-double arithmetic with an explicit rounding-error bound.
//! When that bound or the term cap is exceeded the series reports
//! `SeriesDivergence` and `evaluate` switches to quadrature.

use crate::channel::{self, ChannelModel, GammaModelParams, LinkSide, MFoldModel, ProtocolConfig};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::specfun::dd::{self, Dd};
use crate::specfun::quad::{self, QuadTol};
use crate::specfun::{self, Accuracy};
use serde::{Deserialize, Serialize};

/// Hard cap on outer series terms.
pub const MAX_SERIES_TERMS: usize = 200;
/// Largest tolerated relative rounding error of a series result. Ten
/// times tighter than the agreement demanded of series against quadrature.
pub const SERIES_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    CentralLimit,
    CurveFit(GammaModelParams),
    MFoldAsymptotic { sigma00: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageQuery {
    pub scenario: Scenario,
    pub side: LinkSide,
    pub model: ModelKind,
    pub accuracy: Accuracy,
}

impl OutageQuery {
    pub fn new(scenario: Scenario, side: LinkSide, model: ModelKind) -> Self {
        OutageQuery { scenario, side, model, accuracy: default_accuracy() }
    }
}

pub fn default_accuracy() -> Accuracy {
    Accuracy { rel_tol: 1e-12, max_terms: MAX_SERIES_TERMS }
}

/// An outage probability plus what had to be done to obtain it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutageValue {
    pub p: f64,
    /// raw value fell outside [0, 1] and was clamped
    pub clamped: bool,
    /// depends on a regularized hypergeometric value
    pub regularized: bool,
    /// series failed and quadrature was substituted
    pub fallback: bool,
    pub terms: usize,
}

impl OutageValue {
    fn certain() -> Self {
        OutageValue { p: 1.0, ..Default::default() }
    }

    fn clamp(raw: f64, terms: usize) -> Self {
        let p = raw.clamp(0.0, 1.0);
        OutageValue { p, clamped: p != raw, terms, ..Default::default() }
    }
}

fn require_es(q: &OutageQuery, what: &str) -> Result<f64> {
    match q.scenario.protocol.active(q.scenario.elements, q.side) {
        (_, beta) if matches!(q.scenario.protocol, ProtocolConfig::ES { .. }) => Ok(beta),
        _ => Err(Error::Config(format!(
            "{what} series is derived for energy splitting only; use the quadrature oracle for {}",
            q.scenario.protocol.tag()
        ))),
    }
}

fn rounding_check(func: &'static str, sum: Dd, abs_sum: f64, terms: usize) -> Result<f64> {
    // each term carries O(n) double-double roundings
    let err = abs_sum * (terms as f64 + 2.0) * dd::EPS;
    let s = sum.to_f64();
    if !s.is_finite() || !abs_sum.is_finite() {
        return Err(Error::SeriesDivergence { func, detail: "terms overflowed".into() });
    }
    if err > SERIES_SIGNIFICANCE * s.abs() {
        return Err(Error::SeriesDivergence {
            func,
            detail: format!("rounding bound {err:.2e} against sum {s:.2e}"),
        });
    }
    Ok(s)
}

/// Term-by-term average of the central-limit CDF,
/// 4/sqrt(pi) sum_n (-1)^n/(n!(2n+1)) sum_{r odd} C(2n+1,r) a^{2n+1-r} b^r/(alpha r/2 + 2)
/// with a = h/sqrt(2 eta), b = sqrt(c R^alpha)/sqrt(2 eta).
fn central_limit_series(a: f64, b: f64, alpha: f64, acc: &Accuracy) -> Result<(f64, usize)> {
    const FUNC: &str = "central_limit_series";
    let a2 = Dd::prod(a, a);
    let q = Dd::new(b) / Dd::new(a);
    let q = q * q;
    let mut base = Dd::ONE; // a^{2n}/n!
    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let cap = acc.max_terms.min(MAX_SERIES_TERMS);
    for n in 0..cap {
        if n > 0 {
            base = base * a2 / n as f64;
        }
        let two_n1 = 2 * n + 1;
        let mut t = base * b * two_n1 as f64; // r = 1
        // every factor stays in double-double: one f64 rounding on a term
        // of size 1e12 would already swamp a result of 1e-6
        let den = |r: usize| Dd::prod(alpha, r as f64) * 0.5 + 2.0;
        let mut inner = t / den(1);
        let mut r = 1;
        while r + 2 <= two_n1 {
            t = t * q * ((two_n1 - r) * (two_n1 - r - 1)) as f64 / ((r + 1) * (r + 2)) as f64;
            r += 2;
            inner = inner + t / den(r);
        }
        let mut term = inner / two_n1 as f64;
        if n % 2 == 1 {
            term = -term;
        }
        let mag = term.to_f64().abs();
        sum = sum + term;
        abs_sum += mag;
        if !mag.is_finite() {
            return Err(Error::SeriesDivergence { func: FUNC, detail: "terms overflowed".into() });
        }
        if n > 0 && mag < prev && mag <= acc.rel_tol * sum.to_f64().abs() {
            let s = rounding_check(FUNC, sum, abs_sum, n + 1)?;
            return Ok((4.0 / std::f64::consts::PI.sqrt() * s, n + 1));
        }
        prev = mag;
    }
    Err(Error::SeriesDivergence { func: FUNC, detail: format!("no convergence within {cap} terms") })
}

/// Central-limit outage of `q.side` by series (energy splitting).
pub fn pout_central_limit(q: &OutageQuery) -> Result<OutageValue> {
    require_es(q, "central-limit")?;
    let sc = &q.scenario;
    let Some(c) = sc.threshold_coeff(q.side) else {
        return Ok(OutageValue::certain());
    };
    let (rp_br, rp_ru) = sc.rician()?;
    let st = channel::effective_stats_cascade(sc.elements, &rp_br, &rp_ru, &sc.protocol, q.side)?;
    let s = (2.0 * st.eta_eq).sqrt();
    let g = &sc.geometry;
    let b = (c * g.radius_r.powf(g.alpha_t)).sqrt() / s;
    let (raw, terms) = central_limit_series(st.h_bar_eq / s, b, g.alpha_t, &q.accuracy)?;
    Ok(OutageValue::clamp(raw, terms))
}

pub fn pout_rfl_central_limit(q: &OutageQuery) -> Result<OutageValue> {
    pout_central_limit(&OutageQuery { side: LinkSide::Reflecting, ..q.clone() })
}

pub fn pout_rfr_central_limit(q: &OutageQuery) -> Result<OutageValue> {
    pout_central_limit(&OutageQuery { side: LinkSide::Transmitting, ..q.clone() })
}

/// (2/Gamma(alpha)) sum_n (-1)^n w^{alpha+n} / (n! (alpha+n) (alpha_t (alpha+n) + 2)).
fn curvefit_series(alpha: f64, w: f64, alpha_t: f64, acc: &Accuracy) -> Result<(f64, usize)> {
    const FUNC: &str = "curvefit_series";
    let mut pow = Dd::ONE; // w^n / n!
    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let cap = acc.max_terms.min(MAX_SERIES_TERMS);
    for n in 0..cap {
        if n > 0 {
            pow = pow * w / n as f64;
        }
        let an = Dd::new(alpha) + n as f64;
        let mut term = pow / (an * (an * alpha_t + 2.0));
        if n % 2 == 1 {
            term = -term;
        }
        let mag = term.to_f64().abs();
        sum = sum + term;
        abs_sum += mag;
        if !mag.is_finite() {
            return Err(Error::SeriesDivergence { func: FUNC, detail: "terms overflowed".into() });
        }
        if n > 0 && mag < prev && mag <= acc.rel_tol * sum.to_f64().abs() {
            let s = rounding_check(FUNC, sum, abs_sum, n + 1)?;
            let pref = (alpha * w.ln() - specfun::lgamma(alpha)).exp();
            return Ok((2.0 * pref * s, n + 1));
        }
        prev = mag;
    }
    Err(Error::SeriesDivergence { func: FUNC, detail: format!("no convergence within {cap} terms") })
}

/// Curve-fit outage of `q.side` by series (energy splitting). The Gamma
/// scale is `gp.beta_eff * gp.beta_scale`.
pub fn pout_curvefit(q: &OutageQuery, gp: &GammaModelParams) -> Result<OutageValue> {
    require_es(q, "curve-fit")?;
    let sc = &q.scenario;
    let Some(c) = sc.threshold_coeff(q.side) else {
        return Ok(OutageValue::certain());
    };
    let g = &sc.geometry;
    let w = c * g.radius_r.powf(g.alpha_t) / gp.theta();
    let (raw, terms) = curvefit_series(gp.alpha, w, g.alpha_t, &q.accuracy)?;
    Ok(OutageValue::clamp(raw, terms))
}

pub fn pout_rfl_curvefit(q: &OutageQuery, gp: &GammaModelParams) -> Result<OutageValue> {
    pout_curvefit(&OutageQuery { side: LinkSide::Reflecting, ..q.clone() }, gp)
}

pub fn pout_rfr_curvefit(q: &OutageQuery, gp: &GammaModelParams) -> Result<OutageValue> {
    pout_curvefit(&OutageQuery { side: LinkSide::Transmitting, ..q.clone() }, gp)
}

/// Curve-fit parameters for one side: shape = active elements, scale from
/// the exact mean power.
pub fn curvefit_params(sc: &Scenario, side: LinkSide) -> Result<GammaModelParams> {
    sc.protocol.validate(sc.elements)?;
    let (m_active, beta) = sc.protocol.active(sc.elements, side);
    if m_active == 0 || beta == 0.0 {
        return Err(Error::Config(format!("the {} side has no active elements", side.tag())));
    }
    let (rp_br, rp_ru) = sc.rician()?;
    Ok(GammaModelParams::structural(m_active, beta, &rp_br, &rp_ru))
}

/// sigma(0,0) for the scenario's Rician factors.
pub fn sigma00(sc: &Scenario, delta: f64) -> Result<channel::SigmaValue> {
    channel::mfold_sigma(0, 0, sc.k_br, sc.k_ru, delta)
}

/// High-SNR monomial
/// sigma^M R^{alpha M} c^M / (M (alpha M + 2) (2M-1)! beta^M)
/// for the protocol `proto` (overriding the scenario's).
pub fn pout_asymptotic(q: &OutageQuery, proto: &ProtocolConfig, sigma00: f64) -> Result<OutageValue> {
    let mut sc = q.scenario.clone();
    sc.protocol = *proto;
    proto.validate(sc.elements)?;
    let Some(c) = sc.threshold_coeff(q.side) else {
        return Ok(OutageValue::certain());
    };
    let (m_active, beta) = proto.active(sc.elements, q.side);
    if m_active == 0 || beta == 0.0 {
        return Ok(OutageValue::certain());
    }
    let m = m_active as f64;
    let g = &sc.geometry;
    let ln_p = m * (sigma00.ln() + g.alpha_t * g.radius_r.ln() + c.ln() - beta.ln())
        - m.ln()
        - (g.alpha_t * m + 2.0).ln()
        - specfun::lgamma(2.0 * m);
    Ok(OutageValue::clamp(ln_p.exp(), 1))
}

/// ln of the asymptotic outage, free of the clamp at 1 (for slopes).
pub fn ln_pout_asymptotic(q: &OutageQuery, proto: &ProtocolConfig, sigma00: f64) -> Result<f64> {
    let mut sc = q.scenario.clone();
    sc.protocol = *proto;
    let Some(c) = sc.threshold_coeff(q.side) else {
        return Ok(0.0);
    };
    let (m_active, beta) = proto.active(sc.elements, q.side);
    let m = m_active as f64;
    let g = &sc.geometry;
    Ok(m * (sigma00.ln() + g.alpha_t * g.radius_r.ln() + c.ln() - beta.ln())
        - m.ln()
        - (g.alpha_t * m + 2.0).ln()
        - specfun::lgamma(2.0 * m))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub protocol: String,
    pub side: LinkSide,
    pub order: u32,
}

/// Diversity order = number of elements serving the user.
pub fn diversity_order(proto: &ProtocolConfig, side: LinkSide, m: u32) -> Result<DiversityReport> {
    proto.validate(m)?;
    let (order, _) = proto.active(m, side);
    Ok(DiversityReport { protocol: proto.tag().to_string(), side, order })
}

/// Channel model selected by a query, built from its scenario.
pub fn model_for(q: &OutageQuery) -> Result<Box<dyn ChannelModel>> {
    let sc = &q.scenario;
    Ok(match q.model {
        ModelKind::CentralLimit => {
            let (rp_br, rp_ru) = sc.rician()?;
            let st = channel::effective_stats_cascade(sc.elements, &rp_br, &rp_ru, &sc.protocol, q.side)?;
            Box::new(channel::CentralLimitModel(st))
        }
        ModelKind::CurveFit(gp) => Box::new(gp),
        ModelKind::MFoldAsymptotic { sigma00 } => {
            let (m_eff, beta_eff) = sc.protocol.active(sc.elements, q.side);
            Box::new(MFoldModel { m_eff, beta_eff, sigma00 })
        }
    })
}

/// Adaptive quadrature of F(c x^alpha) 2x/R^2 over [0, R].
///
/// The tolerance is 1e-10 relative, which implies 1e-10 absolute for a
/// probability and keeps tiny high-SNR values meaningful.
pub fn pout_quadrature_oracle(q: &OutageQuery) -> Result<OutageValue> {
    let sc = &q.scenario;
    sc.validate()?;
    let Some(c) = sc.threshold_coeff(q.side) else {
        return Ok(OutageValue::certain());
    };
    let model = model_for(q)?;
    let g = &sc.geometry;
    let r = g.radius_r;
    let alpha = g.alpha_t;
    let f = |x: f64| model.cdf(c * x.powf(alpha)) * 2.0 * x / (r * r);
    let breaks: Vec<f64> = (0..=8).map(|i| r * i as f64 / 8.0).collect();
    let res = quad::integrate_with_breaks(f, &breaks, QuadTol { abs: 1e-300, rel: 1e-10 })?;
    Ok(OutageValue::clamp(res.value, 0))
}

/// Series where derived, quadrature otherwise or when the series fails.
pub fn evaluate(q: &OutageQuery) -> Result<OutageValue> {
    let es = matches!(q.scenario.protocol, ProtocolConfig::ES { .. });
    let series = match q.model {
        ModelKind::MFoldAsymptotic { sigma00 } => return pout_asymptotic(q, &q.scenario.protocol, sigma00),
        _ if !es => return pout_quadrature_oracle(q),
        ModelKind::CentralLimit => pout_central_limit(q),
        ModelKind::CurveFit(gp) => pout_curvefit(q, &gp),
    };
    match series {
        Err(Error::SeriesDivergence { .. }) => {
            let mut v = pout_quadrature_oracle(q)?;
            v.fallback = true;
            Ok(v)
        }
        other => other,
    }
}
