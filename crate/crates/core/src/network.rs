//! Planar geometry, user placement, path loss and the SINR expressions of
//! the two-user NOMA downlink.
//!
//! Powers are watts everywhere in this module; dB conversions happen at the
//! boundary through the helpers at the bottom.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Free-space intercept (c / (4 pi f_c))^2 at the 1 m reference distance.
pub fn intercept(f_c: f64) -> f64 {
    (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * f_c)).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// BS to surface distance, meters
    pub d_br: f64,
    /// radius of the disc the users are dropped in, meters
    pub radius_r: f64,
    pub alpha_t: f64,
    /// carrier frequency, hertz
    pub f_c: f64,
    pub c_br: f64,
    pub c_ru_rfl: f64,
    pub c_ru_rfr: f64,
}

impl Geometry {
    /// All three intercepts derived from `f_c`.
    pub fn new(d_br: f64, radius_r: f64, alpha_t: f64, f_c: f64) -> Self {
        let c = intercept(f_c);
        Geometry { d_br, radius_r, alpha_t, f_c, c_br: c, c_ru_rfl: c, c_ru_rfr: c }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d_br", self.d_br),
            ("radius_r", self.radius_r),
            ("alpha_t", self.alpha_t),
            ("f_c", self.f_c),
            ("c_br", self.c_br),
            ("c_ru_rfl", self.c_ru_rfl),
            ("c_ru_rfr", self.c_ru_rfr),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("geometry.{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Intercept of the surface-to-user hop on the given side.
    pub fn c_ru(&self, side: crate::channel::LinkSide) -> f64 {
        match side {
            crate::channel::LinkSide::Reflecting => self.c_ru_rfl,
            crate::channel::LinkSide::Transmitting => self.c_ru_rfr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// transmit power, watts
    pub p_t: f64,
    /// noise power, watts
    pub sigma2: f64,
    pub a_rfl: f64,
    pub a_rfr: f64,
    pub g_sic: f64,
    pub g_out: f64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_t > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::Config("p_t and sigma2 must be positive".into()));
        }
        if !(self.a_rfl > 0.0 && self.a_rfr > 0.0) || (self.a_rfl + self.a_rfr - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "power fractions a_rfl = {}, a_rfr = {} must be positive and sum to 1",
                self.a_rfl, self.a_rfr
            )));
        }
        if self.a_rfl >= self.a_rfr {
            return Err(Error::Config("the weak (transmitting) user needs a_rfr > a_rfl".into()));
        }
        if !(self.g_sic >= 0.0 && self.g_out >= 0.0) {
            return Err(Error::Config("thresholds must be nonnegative".into()));
        }
        Ok(())
    }

    /// Transmit SNR rho_t = P_t / sigma^2.
    pub fn rho_t(&self) -> f64 {
        self.p_t / self.sigma2
    }
}

/// Inverse-CDF draw from the density 2x/R^2 on [0, R].
pub fn sample_user_distance(radius_r: f64, u: f64) -> f64 {
    radius_r * u.sqrt()
}

pub fn pathloss(d: f64, alpha: f64, c: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain("pathloss", format!("distance {d} must be positive")));
    }
    Ok(c * d.powf(-alpha))
}

// Received signal power before the NOMA split: P_t PL_BR PL_RU g2.
fn received(g2: f64, geom: &Geometry, pw: &PowerConfig, d_ru: f64, c_ru: f64) -> f64 {
    let pl_br = geom.c_br * geom.d_br.powf(-geom.alpha_t);
    let pl_ru = c_ru * d_ru.powf(-geom.alpha_t);
    pw.p_t * pl_br * pl_ru * g2
}

// a_rfr S / (a_rfl S + sigma^2), written so it never rounds above a_rfr/a_rfl
fn interference_limited(pw: &PowerConfig, s: f64) -> f64 {
    pw.a_rfr / (pw.a_rfl + pw.sigma2 / s)
}

/// SINR of the SIC step at the reflecting user (decoding the weak user's
/// message while its own is interference).
pub fn sinr_sic(g2: f64, geom: &Geometry, pw: &PowerConfig, d_ru: f64) -> f64 {
    let s = received(g2, geom, pw, d_ru, geom.c_ru_rfl);
    interference_limited(pw, s)
}

/// SNR of the reflecting user after SIC.
pub fn snr_rfl(g2: f64, geom: &Geometry, pw: &PowerConfig, d_ru: f64) -> f64 {
    pw.a_rfl * received(g2, geom, pw, d_ru, geom.c_ru_rfl) / pw.sigma2
}

/// SINR of the transmitting user, which treats the other signal as noise.
pub fn sinr_rfr(g2: f64, geom: &Geometry, pw: &PowerConfig, d_ru: f64) -> f64 {
    let s = received(g2, geom, pw, d_ru, geom.c_ru_rfr);
    interference_limited(pw, s)
}

/// Received-power threshold normalized by the path-loss chain, or the
/// marker that no channel realization can meet the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upsilon {
    Finite(f64),
    OutageCertain,
}

impl Upsilon {
    pub fn value(self) -> Option<f64> {
        match self {
            Upsilon::Finite(v) => Some(v),
            Upsilon::OutageCertain => None,
        }
    }
}

/// Threshold for the reflecting user: both the SIC and its own decoding
/// must succeed, so the larger requirement wins.
pub fn upsilon_max(pw: &PowerConfig) -> Upsilon {
    let denom = pw.a_rfr - pw.g_sic * pw.a_rfl;
    if denom <= 0.0 || pw.a_rfl <= 0.0 {
        return Upsilon::OutageCertain;
    }
    let sic = pw.g_sic * pw.sigma2 / denom;
    let own = pw.g_out * pw.sigma2 / pw.a_rfl;
    Upsilon::Finite(sic.max(own))
}

/// Threshold for the transmitting user.
pub fn upsilon_2(pw: &PowerConfig) -> Upsilon {
    let denom = pw.a_rfr - pw.g_out * pw.a_rfl;
    if denom <= 0.0 {
        return Upsilon::OutageCertain;
    }
    Upsilon::Finite(pw.g_out * pw.sigma2 / denom)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise floor -170 dBm/Hz + 10 log10(bandwidth) + noise figure.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -170.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (Geometry, PowerConfig) {
        let geom = Geometry::new(100.0, 20.0, 2.4, 1e7);
        let g = 2f64.powf(0.1) - 1.0;
        let pw = PowerConfig {
            p_t: dbm_to_watts(24.0),
            sigma2: dbm_to_watts(-90.0),
            a_rfl: 0.4,
            a_rfr: 0.6,
            g_sic: g,
            g_out: g,
        };
        (geom, pw)
    }

    #[test]
    fn user_distance_examples() {
        assert_eq!(sample_user_distance(20.0, 0.0), 0.0);
        assert_eq!(sample_user_distance(20.0, 1.0), 20.0);
        assert_eq!(sample_user_distance(20.0, 0.25), 10.0);
    }

    #[test]
    fn intercepts_and_pathloss() {
        let c = intercept(1e7);
        // 5.69931..., usually quoted truncated as 5.6992
        assert!((c - 5.6992).abs() / 5.6992 < 1e-4);
        assert!((c - 5.699_31).abs() < 1e-5);
        let g = Geometry::new(100.0, 20.0, 2.4, 1e7);
        assert!(g.c_br == g.c_ru_rfl && g.c_ru_rfl == g.c_ru_rfr);
        assert_eq!(pathloss(1.0, 2.4, c).unwrap(), c);
        assert!(((pathloss(100.0, 2.4, c).unwrap() / (c * 10f64.powf(-4.8))) - 1.0).abs() < 1e-14);
        assert!(pathloss(0.0, 2.4, c).is_err());
    }

    #[test]
    fn noise_floor_matches_default() {
        assert!((noise_power_dbm(1e7, 10.0) + 90.0).abs() < 1e-12);
        assert!((dbm_to_watts(-90.0) - 1e-12).abs() < 1e-27);
        assert!((watts_to_dbm(dbm_to_watts(17.3)) - 17.3).abs() < 1e-12);
    }

    #[test]
    fn sic_sinr_limits() {
        let (geom, mut pw) = defaults();
        assert_eq!(sinr_sic(0.0, &geom, &pw, 10.0), 0.0);
        pw.sigma2 = 1e-300;
        assert!((sinr_sic(1.0, &geom, &pw, 10.0) - 1.5).abs() < 1e-12);
        let (geom, pw) = defaults();
        let mut prev = 0.0;
        for i in 1..50 {
            let v = sinr_sic(i as f64 * 0.3, &geom, &pw, 10.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn reflecting_snr_hand_chain() {
        let (geom, pw) = defaults();
        // spreadsheet-style chain for g2 = 1, d_ru = 10 m
        let c = (3e8 / (4.0 * std::f64::consts::PI * 1e7)).powi(2);
        let pl_br = c / 100f64.powf(2.4);
        let pl_ru = c / 10f64.powf(2.4);
        let p_t = 10f64.powf(-0.6); // 24 dBm
        let expect = 0.4 * p_t * pl_br * pl_ru / 1e-12;
        let got = snr_rfl(1.0, &geom, &pw, 10.0);
        assert!((got / expect - 1.0).abs() < 1e-12);
        assert_eq!(snr_rfl(0.0, &geom, &pw, 10.0), 0.0);
        assert!((snr_rfl(2.0, &geom, &pw, 10.0) / got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn transmitting_sinr_ceiling() {
        let (geom, pw) = defaults();
        for g2 in [1e-3, 1.0, 1e3, 1e9] {
            let v = sinr_rfr(g2, &geom, &pw, 5.0);
            assert!(v < pw.a_rfr / pw.a_rfl);
        }
        // far into saturation the ratio rounds onto the ceiling
        assert!(sinr_rfr(1e15, &geom, &pw, 5.0) <= pw.a_rfr / pw.a_rfl);
        assert_eq!(sinr_rfr(0.0, &geom, &pw, 10.0), 0.0);
    }

    #[test]
    fn upsilon_feasibility() {
        let (_, pw) = defaults();
        let um = upsilon_max(&pw).value().unwrap();
        let u2 = upsilon_2(&pw).value().unwrap();
        assert!(um.is_finite() && u2.is_finite());
        let g = pw.g_sic;
        assert!(um >= g * pw.sigma2 / (pw.a_rfr - g * pw.a_rfl));
        assert!(um >= pw.g_out * pw.sigma2 / pw.a_rfl);
        // exactly at the boundary a_rfr = g a_rfl
        let mut edge = pw.clone();
        edge.g_sic = 1.5;
        edge.g_out = 1.5;
        assert_eq!(upsilon_max(&edge), Upsilon::OutageCertain);
        assert_eq!(upsilon_2(&edge), Upsilon::OutageCertain);
    }
}
