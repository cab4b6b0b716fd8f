//! Scenario documents: JSON on disk, every field optional, resolved into
//! core types with all defaults materialized.

use serde::{Deserialize, Serialize};
use starios_core::channel::{LinkSide, ProtocolConfig};
use starios_core::network::{self, Geometry, PowerConfig};
use starios_core::{McConfig, Scenario};
use std::fmt;

/// Malformed or inconsistent scenario input.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario schema: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn schema<T>(msg: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub d_br: f64,
    pub radius_r: f64,
    pub alpha_t: f64,
    pub f_c: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection { d_br: 100.0, radius_r: 20.0, alpha_t: 2.4, f_c: 1e7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSection {
    pub p_t_dbm: f64,
    /// defaults to -170 + 10 log10(f_c) + noise_figure_db
    pub noise_dbm: Option<f64>,
    pub noise_figure_db: f64,
    pub a_rfl: f64,
    pub a_rfr: f64,
    pub g_sic: f64,
    pub g_out: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        let g = 2f64.powf(0.1) - 1.0;
        PowerSection {
            p_t_dbm: 24.0,
            noise_dbm: None,
            noise_figure_db: 10.0,
            a_rfl: 0.4,
            a_rfr: 0.6,
            g_sic: g,
            g_out: g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RicianSection {
    pub k_br: f64,
    pub k_ru: f64,
}

impl Default for RicianSection {
    fn default() -> Self {
        RicianSection { k_br: 1.0, k_ru: 1.0 }
    }
}

/// Protocol as written in a scenario; MS may give a fraction so the split
/// follows the element count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ProtocolSpec {
    ES { beta_rfl: f64 },
    MS {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_rfl: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frac_rfl: Option<f64>,
    },
    TS { lambda_rfl: f64 },
}

impl ProtocolSpec {
    pub fn resolve(&self, m: u32) -> Result<ProtocolConfig, SchemaError> {
        let p = match *self {
            ProtocolSpec::ES { beta_rfl } => ProtocolConfig::es(beta_rfl),
            ProtocolSpec::TS { lambda_rfl } => ProtocolConfig::ts(lambda_rfl),
            ProtocolSpec::MS { m_rfl: Some(r), frac_rfl: None } if r <= m => ProtocolConfig::MS { m_rfl: r, m_rfr: m - r },
            ProtocolSpec::MS { m_rfl: None, frac_rfl: Some(f) } if (0.0..=1.0).contains(&f) => {
                ProtocolConfig::ms_fraction(m, f)
            }
            ProtocolSpec::MS { .. } => {
                return schema(format!("MS needs exactly one of m_rfl <= {m} or frac_rfl in [0,1]"))
            }
        };
        p.validate(m).map_err(|e| SchemaError(e.to_string()))?;
        Ok(p)
    }

    /// Column label, e.g. `es`, `ms`, `ts`.
    pub fn label(&self) -> &'static str {
        match self {
            ProtocolSpec::ES { .. } => "es",
            ProtocolSpec::MS { .. } => "ms",
            ProtocolSpec::TS { .. } => "ts",
        }
    }

    pub fn default_set() -> Vec<ProtocolSpec> {
        vec![
            ProtocolSpec::ES { beta_rfl: 0.7 },
            ProtocolSpec::MS { m_rfl: None, frac_rfl: Some(0.7) },
            ProtocolSpec::TS { lambda_rfl: 0.5 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// transmit power in dBm
    PtDbm,
    /// transmit SNR rho_t = P_t / sigma^2 in dB
    SnrDb,
    Elements,
    Radius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: Axis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axis: Axis::PtDbm, range: None, values: (10..=24).map(f64::from).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub trials: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl Default for McSection {
    fn default() -> Self {
        let d = McConfig::default();
        McSection { trials: d.trials, seed: d.seed, chunk_size: d.chunk_size }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Monte Carlo estimate
    Mc,
    /// central-limit series, quadrature where the series fails
    Cl,
    /// curve-fit series, quadrature where the series fails
    Cf,
    /// quadrature of the central-limit CDF
    ClOracle,
    /// quadrature of the curve-fit CDF
    CfOracle,
    /// high-SNR M-fold asymptote
    Asym,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Cl => "cl",
            Method::Cf => "cf",
            Method::ClOracle => "cl_oracle",
            Method::CfOracle => "cf_oracle",
            Method::Asym => "asym",
        }
    }
}

/// Curve-fit Gamma override; absent fields fall back to shape = active
/// elements and the mean-matched scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFitSpec {
    pub alpha: f64,
    pub beta_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelCdfSection {
    pub elements: Vec<u32>,
    pub points: usize,
    pub side: LinkSide,
}

impl Default for ChannelCdfSection {
    fn default() -> Self {
        ChannelCdfSection { elements: vec![10, 20, 30], points: 101, side: LinkSide::Reflecting }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiversitySection {
    pub protocols: Vec<ProtocolSpec>,
    pub analytic_only: bool,
}

impl Default for DiversitySection {
    fn default() -> Self {
        DiversitySection { protocols: ProtocolSpec::default_set(), analytic_only: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub protocols: Vec<ProtocolSpec>,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection { protocols: ProtocolSpec::default_set() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitChoice {
    Mle,
    Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub side: LinkSide,
    pub method: FitChoice,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection { side: LinkSide::Reflecting, method: FitChoice::Mle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub geometry: GeometrySection,
    pub power: PowerSection,
    pub rician: RicianSection,
    pub elements: u32,
    pub protocol: ProtocolSpec,
    pub sweep: SweepSection,
    pub mc: McSection,
    pub models: Vec<Method>,
    pub curve_fit: Option<CurveFitSpec>,
    /// offset used for the unit-argument hypergeometric in sigma(0,0)
    pub sigma_delta: f64,
    pub channel_cdf: ChannelCdfSection,
    pub diversity: DiversitySection,
    pub compare: CompareSection,
    pub fit: FitSection,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            geometry: GeometrySection::default(),
            power: PowerSection::default(),
            rician: RicianSection::default(),
            elements: 30,
            protocol: ProtocolSpec::ES { beta_rfl: 0.7 },
            sweep: SweepSection::default(),
            mc: McSection::default(),
            models: vec![Method::Mc, Method::Cl, Method::Cf, Method::Asym],
            curve_fit: None,
            sigma_delta: 1e-6,
            channel_cdf: ChannelCdfSection::default(),
            diversity: DiversitySection::default(),
            compare: CompareSection::default(),
            fit: FitSection::default(),
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| SchemaError(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    /// Fill derived defaults and expand ranges so the document describes the
    /// run completely.
    pub fn resolve(mut self) -> Result<Self, SchemaError> {
        if self.power.noise_dbm.is_none() {
            self.power.noise_dbm = Some(network::noise_power_dbm(self.geometry.f_c, self.power.noise_figure_db));
        }
        if let Some(r) = self.sweep.range.take() {
            if !(r.step > 0.0) || r.to < r.from {
                return schema("sweep range needs step > 0 and to >= from");
            }
            let n = ((r.to - r.from) / r.step + 1e-9).floor() as usize;
            self.sweep.values = (0..=n).map(|i| r.from + i as f64 * r.step).collect();
        }
        if self.sweep.values.is_empty() {
            return schema("sweep has no values");
        }
        if matches!(self.sweep.axis, Axis::Elements)
            && self.sweep.values.iter().any(|v| !(*v >= 1.0 && v.fract() == 0.0))
        {
            return schema("element sweep values must be positive integers");
        }
        if !(self.sigma_delta > 0.0 && self.sigma_delta < 0.1) {
            return schema("sigma_delta must lie in (0, 0.1)");
        }
        if self.mc.trials == 0 || self.mc.chunk_size == 0 {
            return schema("mc.trials and mc.chunk_size must be positive");
        }
        if let Some(cf) = &self.curve_fit {
            if !(cf.alpha > 0.0 && cf.beta_scale > 0.0) {
                return schema("curve_fit alpha and beta_scale must be positive");
            }
        }
        self.base_scenario()?;
        Ok(self)
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig { trials: self.mc.trials, seed: self.mc.seed, chunk_size: self.mc.chunk_size }
    }

    /// The core scenario at the document's own operating point.
    pub fn base_scenario(&self) -> Result<Scenario, SchemaError> {
        self.scenario_with(self.elements, &self.protocol)
    }

    pub fn scenario_with(&self, elements: u32, proto: &ProtocolSpec) -> Result<Scenario, SchemaError> {
        let g = &self.geometry;
        let p = &self.power;
        let noise = p.noise_dbm.unwrap_or_else(|| network::noise_power_dbm(g.f_c, p.noise_figure_db));
        let sc = Scenario {
            geometry: Geometry::new(g.d_br, g.radius_r, g.alpha_t, g.f_c),
            power: PowerConfig {
                p_t: network::dbm_to_watts(p.p_t_dbm),
                sigma2: network::dbm_to_watts(noise),
                a_rfl: p.a_rfl,
                a_rfr: p.a_rfr,
                g_sic: p.g_sic,
                g_out: p.g_out,
            },
            k_br: self.rician.k_br,
            k_ru: self.rician.k_ru,
            elements,
            protocol: proto.resolve(elements)?,
        };
        sc.validate().map_err(|e| SchemaError(e.to_string()))?;
        Ok(sc)
    }

    /// Scenario at one sweep value.
    pub fn point(&self, x: f64, proto: &ProtocolSpec) -> Result<Scenario, SchemaError> {
        match self.sweep.axis {
            Axis::Elements => self.scenario_with(x as u32, proto),
            axis => {
                let mut sc = self.scenario_with(self.elements, proto)?;
                match axis {
                    Axis::PtDbm => sc.power.p_t = network::dbm_to_watts(x),
                    Axis::SnrDb => sc = sc.with_snr_db(x),
                    _ => sc.geometry.radius_r = x,
                }
                sc.validate().map_err(|e| SchemaError(e.to_string()))?;
                Ok(sc)
            }
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("scenario documents always serialize")
    }
}
