//! Shared fixtures for the benchmarks under benches/.

use starios_core::{network, Scenario};

/// The default link at each transmit power of the usual 10..=24 dBm sweep.
pub fn pt_sweep(elements: u32) -> Vec<Scenario> {
    (10..=24)
        .map(|pt| {
            let mut sc = Scenario { elements, ..Scenario::default() };
            sc.power.p_t = network::dbm_to_watts(pt as f64);
            sc
        })
        .collect()
}

/// Transmit-SNR grid where outage is resolvable by simulation.
pub fn snr_sweep(elements: u32) -> Vec<Scenario> {
    let base = Scenario { elements, ..Scenario::default() };
    (0..8).map(|i| base.with_snr_db(20.0 + 2.0 * i as f64)).collect()
}
