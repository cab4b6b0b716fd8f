//! Monte Carlo reference engine.
//!
//! Trials are grouped in chunks; chunk `i` draws from its own ChaCha8
//! stream keyed by `(seed, i)`, and chunk results are merged in index order.
//! Estimates therefore depend only on `(seed, trials, chunk_size)`, never on
//! the number of worker threads.

use crate::channel::{LinkSide, ProtocolConfig, RicianParams};
use crate::error::{Error, Result};
use crate::network;
use crate::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { trials: 1_000_000, seed: 20_240_601, chunk_size: 1 << 16 }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig { trials, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.chunk_size == 0 {
            return Err(Error::Config("trials and chunk_size must be at least 1".into()));
        }
        Ok(())
    }

    fn chunks(&self) -> impl IndexedParallelIterator<Item = (u64, u64)> + '_ {
        let n = self.trials.div_ceil(self.chunk_size) as usize;
        (0..n).into_par_iter().map(move |i| {
            let i = i as u64;
            let start = i * self.chunk_size;
            (i, self.chunk_size.min(self.trials - start))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let p = failures as f64 / trials as f64;
        McEstimate { p_hat: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials }
    }

    /// Standard error with p_hat floored at one event, so a zero-count
    /// estimate still carries a resolution limit.
    pub fn stderr_floored(&self) -> f64 {
        let p = self.p_hat.max(1.0 / self.trials as f64);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// The random stream of chunk `chunk` under `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Run `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

// uniform on (0, 1]; keeps logs and the user distance away from zero
#[inline]
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Unit-power Rician amplitude from two uniforms by Box-Muller.
pub fn sample_rician(k: f64, u1: f64, u2: f64) -> f64 {
    let mu = (k / (1.0 + k)).sqrt();
    let s = (0.5 / (1.0 + k)).sqrt();
    let r = (-2.0 * u1.ln()).sqrt();
    let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
    (mu + s * r * cos).hypot(s * r * sin)
}

/// One draw of the combined channel power beta (sum |h_BR| |h_RU|)^2 seen
/// by `side`. Elements are drawn BR first, then RU.
pub fn simulate_channel_power<R: Rng>(
    m: u32,
    rp_br: &RicianParams,
    rp_ru: &RicianParams,
    proto: &ProtocolConfig,
    side: LinkSide,
    rng: &mut R,
) -> f64 {
    let (m_active, beta) = proto.active(m, side);
    let mut amp = 0.0;
    for _ in 0..m_active {
        let a = sample_rician(rp_br.k, open_unit(rng), rng.random());
        let b = sample_rician(rp_ru.k, open_unit(rng), rng.random());
        amp += a * b;
    }
    beta * amp * amp
}

/// `trials` channel-power samples in deterministic order.
pub fn channel_power_samples(
    m: u32,
    rp_br: &RicianParams,
    rp_ru: &RicianParams,
    proto: &ProtocolConfig,
    side: LinkSide,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    mc.validate()?;
    proto.validate(m)?;
    let parts: Vec<Vec<f64>> = mc
        .chunks()
        .map(|(i, n)| {
            let mut rng = chunk_rng(mc.seed, i);
            (0..n).map(|_| simulate_channel_power(m, rp_br, rp_ru, proto, side, &mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

fn is_outage(side: LinkSide, g2: f64, sc: &Scenario, d: f64) -> bool {
    let (geom, pw) = (&sc.geometry, &sc.power);
    match side {
        LinkSide::Reflecting => {
            let ok = network::sinr_sic(g2, geom, pw, d) > pw.g_sic
                && network::snr_rfl(g2, geom, pw, d) > pw.g_out;
            !ok
        }
        LinkSide::Transmitting => network::sinr_rfr(g2, geom, pw, d) <= pw.g_out,
    }
}

/// Outage estimates of one user at several scenarios that share the same
/// geometry and channel statistics (typically a transmit-power sweep).
/// Every trial is evaluated at every point: common random numbers.
pub fn estimate_outage_curve(points: &[Scenario], side: LinkSide, mc: &McConfig) -> Result<Vec<McEstimate>> {
    mc.validate()?;
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    for p in points {
        p.validate()?;
        let same_channel = p.geometry == first.geometry
            && p.elements == first.elements
            && p.protocol == first.protocol
            && p.k_br == first.k_br
            && p.k_ru == first.k_ru;
        if !same_channel {
            return Err(Error::Config("curve points must share geometry and channel".into()));
        }
    }
    let (rp_br, rp_ru) = first.rician()?;
    let radius = first.geometry.radius_r;
    let counts: Vec<Vec<u64>> = mc
        .chunks()
        .map(|(i, n)| {
            let mut rng = chunk_rng(mc.seed, i);
            let mut fails = vec![0u64; points.len()];
            for _ in 0..n {
                let d = network::sample_user_distance(radius, open_unit(&mut rng));
                let g2 = simulate_channel_power(first.elements, &rp_br, &rp_ru, &first.protocol, side, &mut rng);
                for (j, sc) in points.iter().enumerate() {
                    fails[j] += is_outage(side, g2, sc, d) as u64;
                }
            }
            fails
        })
        .collect();
    let mut total = vec![0u64; points.len()];
    for c in &counts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    Ok(total.into_iter().map(|f| McEstimate::from_counts(f, mc.trials)).collect())
}

/// Outage estimate of one user at one scenario.
pub fn estimate_outage(scenario: &Scenario, side: LinkSide, mc: &McConfig) -> Result<McEstimate> {
    Ok(estimate_outage_curve(std::slice::from_ref(scenario), side, mc)?[0])
}

/// Sorted sample set viewed as a step function.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

pub const MIN_ECDF_SAMPLES: usize = 100;

pub fn empirical_cdf(samples: &[f64]) -> Result<Ecdf> {
    if samples.len() < MIN_ECDF_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_ECDF_SAMPLES, got: samples.len() });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Degenerate("NaN in samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ecdf { sorted })
}

impl Ecdf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Empirical quantile (lower), q in [0, 1].
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let i = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[i]
    }
}

/// Kolmogorov-Smirnov statistic sup |F_n - F| evaluated on both sides of
/// every jump.
pub fn ks_distance(ecdf: &Ecdf, model_cdf: impl Fn(f64) -> f64) -> f64 {
    let n = ecdf.sorted.len() as f64;
    ecdf.sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = model_cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Negated least-squares slope of log10(pout) against log10(rho_t).
pub fn diversity_slope(snr_db_grid: &[f64], pout: &[f64]) -> Result<f64> {
    if pout.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Degenerate("slope needs strictly positive outage values".into()));
    }
    let ln_p: Vec<f64> = pout.iter().map(|p| p.ln()).collect();
    diversity_slope_ln(snr_db_grid, &ln_p)
}

/// Same slope from natural logs of the outage, for values below the
/// smallest double.
pub fn diversity_slope_ln(snr_db_grid: &[f64], ln_pout: &[f64]) -> Result<f64> {
    if snr_db_grid.len() != ln_pout.len() {
        return Err(Error::Degenerate("grid and outage lengths differ".into()));
    }
    if snr_db_grid.len() < 3 {
        return Err(Error::Degenerate("need at least 3 grid points".into()));
    }
    if ln_pout.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("outage logs must be finite".into()));
    }
    let xs: Vec<f64> = snr_db_grid.iter().map(|s| s / 10.0).collect();
    let ys: Vec<f64> = ln_pout.iter().map(|l| l / std::f64::consts::LN_10).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all grid points coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(-sxy / sxx)
}
