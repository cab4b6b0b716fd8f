use crate::channel::{self, LinkSide, ProtocolConfig, RicianParams};
use crate::error::{Error, Result};
use crate::network::{self, Geometry, PowerConfig};
use serde::{Deserialize, Serialize};

/// A complete link configuration: geometry, powers, fading and surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: Geometry,
    pub power: PowerConfig,
    /// Rician factor of the BS-to-surface hop
    pub k_br: f64,
    /// Rician factor of the surface-to-user hops
    pub k_ru: f64,
    pub elements: u32,
    pub protocol: ProtocolConfig,
}

/// Threshold 2^R - 1 for target rate R bits/s/Hz.
pub fn rate_threshold(rate: f64) -> f64 {
    2f64.powf(rate) - 1.0
}

impl Default for Scenario {
    /// d_BR = 100 m, R = 20 m, alpha = 2.4, f_c = 10 MHz, P_t = 24 dBm,
    /// noise -90 dBm, a = (0.4, 0.6), thresholds 2^0.1 - 1, M = 30,
    /// ES with beta_rfl = 0.7, k = 1 on both hops.
    fn default() -> Self {
        let f_c = 1e7;
        let g = rate_threshold(0.1);
        Scenario {
            geometry: Geometry::new(100.0, 20.0, 2.4, f_c),
            power: PowerConfig {
                p_t: network::dbm_to_watts(24.0),
                sigma2: network::dbm_to_watts(network::noise_power_dbm(f_c, 10.0)),
                a_rfl: 0.4,
                a_rfr: 0.6,
                g_sic: g,
                g_out: g,
            },
            k_br: 1.0,
            k_ru: 1.0,
            elements: 30,
            protocol: ProtocolConfig::es(0.7),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.power.validate()?;
        if !(self.k_br >= 0.0 && self.k_ru >= 0.0) {
            return Err(Error::Config("Rician factors must be nonnegative".into()));
        }
        self.protocol.validate(self.elements)
    }

    pub fn rician(&self) -> Result<(RicianParams, RicianParams)> {
        Ok((channel::rician_moments(self.k_br)?, channel::rician_moments(self.k_ru)?))
    }

    /// Copy with the transmit power set from a transmit SNR in dB.
    pub fn with_snr_db(&self, snr_db: f64) -> Scenario {
        let mut s = self.clone();
        s.power.p_t = s.power.sigma2 * network::db_to_linear(snr_db);
        s
    }

    pub fn snr_db(&self) -> f64 {
        network::linear_to_db(self.power.rho_t())
    }

    /// Normalized received-power threshold of one user.
    pub fn upsilon(&self, side: LinkSide) -> network::Upsilon {
        match side {
            LinkSide::Reflecting => network::upsilon_max(&self.power),
            LinkSide::Transmitting => network::upsilon_2(&self.power),
        }
    }

    /// Coefficient c with outage iff channel power < c * d^alpha, or None
    /// when the threshold is unreachable.
    pub fn threshold_coeff(&self, side: LinkSide) -> Option<f64> {
        let g = &self.geometry;
        let ups = self.upsilon(side).value()?;
        Some(ups * g.d_br.powf(g.alpha_t) / (self.power.p_t * g.c_br * g.c_ru(side)))
    }
}
