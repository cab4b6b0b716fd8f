use rand::Rng;
use starios_core::channel::{self, rician_moments, rician_pdf, LinkSide, ProtocolConfig};
use starios_core::montecarlo::*;
use starios_core::outage::{pout_quadrature_oracle, ModelKind, OutageQuery};
use starios_core::specfun::quad::{integrate, QuadTol};
use starios_core::{network, Error, Scenario};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn draws(k: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = chunk_rng(seed, 0);
    (0..n).map(|_| sample_rician(k, 1.0 - rng.random::<f64>(), rng.random())).collect()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn rayleigh_mean_and_unit_power() {
    let n = 1_000_000;
    let x = draws(0.0, n, 1);
    let (m, sd) = mean_sd(&x);
    assert!((m - std::f64::consts::PI.sqrt() / 2.0).abs() < 3.0 * sd / (n as f64).sqrt());
    for k in [0.0, 1.0, 5.0] {
        let sq: Vec<f64> = draws(k, n, 2).iter().map(|a| a * a).collect();
        let (m2, sd2) = mean_sd(&sq);
        assert!((m2 - 1.0).abs() < 3.0 * sd2 / (n as f64).sqrt(), "k={k} {m2}");
    }
}

#[test]
fn rician_draws_match_density() {
    let k = 2.0;
    let n = 1_000_000;
    let width = 0.1;
    let bins = 30;
    let mut counts = vec![0u64; bins + 1];
    for x in draws(k, n, 3) {
        counts[((x / width) as usize).min(bins)] += 1;
    }
    let tol = QuadTol { abs: 1e-14, rel: 1e-12 };
    let mut chi2 = 0.0;
    let mut used = 0;
    let mut mass = 0.0;
    for (i, &c) in counts.iter().enumerate().take(bins) {
        let p = integrate(|x| rician_pdf(x, k), i as f64 * width, (i + 1) as f64 * width, tol).unwrap().value;
        mass += p;
        let e = p * n as f64;
        if e >= 5.0 {
            chi2 += (c as f64 - e).powi(2) / e;
            used += 1;
        }
    }
    assert!(1.0 - mass < 1e-6);
    let p_value = 1.0 - ChiSquared::new((used - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2={chi2} p={p_value}");
}

#[test]
fn deterministic_amplitudes_in_the_los_limit() {
    let rp = rician_moments(1e12).unwrap();
    let mut rng = chunk_rng(4, 0);
    let g = simulate_channel_power(1, &rp, &rp, &ProtocolConfig::es(0.7), LinkSide::Reflecting, &mut rng);
    assert!((g - 0.7).abs() < 1e-5, "{g}");
}

#[test]
fn channel_power_mean_matches_moments() {
    let rp = rician_moments(1.0).unwrap();
    for (m, proto, side) in [
        (30, ProtocolConfig::es(0.7), LinkSide::Reflecting),
        (10, ProtocolConfig::ms_fraction(10, 0.7), LinkSide::Transmitting),
    ] {
        let s = channel_power_samples(m, &rp, &rp, &proto, side, &McConfig::new(1_000_000, 8)).unwrap();
        let (mean, sd) = mean_sd(&s);
        let (m_eff, beta) = proto.active(m, side);
        let want = channel::mean_channel_power(m_eff, beta, &rp, &rp);
        assert!((mean - want).abs() < 3.0 * sd / (s.len() as f64).sqrt(), "{mean} {want}");
    }
}

#[test]
fn full_energy_split_equals_time_switching_draw_for_draw() {
    let rp = rician_moments(1.0).unwrap();
    let mc = McConfig::new(5000, 9);
    let a = channel_power_samples(8, &rp, &rp, &ProtocolConfig::es(1.0), LinkSide::Reflecting, &mc).unwrap();
    let b = channel_power_samples(8, &rp, &rp, &ProtocolConfig::ts(0.5), LinkSide::Reflecting, &mc).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trivial_outage_events() {
    let mut free = Scenario::default();
    free.power.g_sic = 0.0;
    free.power.g_out = 0.0;
    let mc = McConfig::new(20_000, 10);
    for side in LinkSide::BOTH {
        assert_eq!(estimate_outage(&free, side, &mc).unwrap().p_hat, 0.0);
    }
    let mut dead = Scenario::default();
    dead.power.g_sic = 2.0;
    dead.power.g_out = 2.0;
    for side in LinkSide::BOTH {
        let e = estimate_outage(&dead, side, &mc).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert_eq!(e.stderr, 0.0);
    }
}

#[test]
fn stderr_formula_and_floor() {
    let e = McEstimate::from_counts(25, 10_000);
    assert_eq!(e.p_hat, 0.0025);
    assert!((e.stderr - (0.0025f64 * 0.9975 / 1e4).sqrt()).abs() < 1e-18);
    let zero = McEstimate::from_counts(0, 1000);
    assert_eq!(zero.stderr, 0.0);
    assert!((zero.stderr_floored() - (0.001f64 * 0.999 / 1000.0).sqrt()).abs() < 1e-15);
}

#[test]
fn results_independent_of_thread_count() {
    let sc = Scenario::default().with_snr_db(30.0);
    let points: Vec<Scenario> = [26.0, 30.0, 34.0].iter().map(|&s| sc.with_snr_db(s)).collect();
    let mc = McConfig { trials: 300_001, seed: 77, chunk_size: 4096 };
    let one = with_threads(1, || estimate_outage_curve(&points, LinkSide::Reflecting, &mc).unwrap());
    let many = with_threads(4, || estimate_outage_curve(&points, LinkSide::Reflecting, &mc).unwrap());
    assert_eq!(one, many);
    let again = with_threads(3, || estimate_outage_curve(&points, LinkSide::Reflecting, &mc).unwrap());
    assert_eq!(one, again);
    let other_seed = estimate_outage_curve(&points, LinkSide::Reflecting, &McConfig { seed: 78, ..mc }).unwrap();
    assert_ne!(one, other_seed);
}

#[test]
fn curve_points_must_share_the_channel() {
    let a = Scenario::default();
    let b = Scenario { elements: 20, ..a.clone() };
    let err = estimate_outage_curve(&[a, b], LinkSide::Reflecting, &McConfig::new(10, 1));
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn user_distance_law() {
    let n = 1_000_000;
    let mut rng = chunk_rng(12, 0);
    let d: Vec<f64> = (0..n).map(|_| network::sample_user_distance(20.0, rng.random())).collect();
    let ecdf = empirical_cdf(&d).unwrap();
    assert!(ks_distance(&ecdf, |x| (x / 20.0).powi(2).min(1.0)) < 0.002);
}

#[test]
fn more_energy_means_less_outage() {
    let sc = Scenario::default().with_snr_db(30.0);
    let mc = McConfig::new(200_000, 13);
    let hi = estimate_outage(&Scenario { protocol: ProtocolConfig::es(0.7), ..sc.clone() }, LinkSide::Reflecting, &mc).unwrap();
    let lo = estimate_outage(&Scenario { protocol: ProtocolConfig::es(0.3), ..sc }, LinkSide::Reflecting, &mc).unwrap();
    assert!(hi.p_hat <= lo.p_hat, "{} {}", hi.p_hat, lo.p_hat);
}

#[test]
fn simulation_agrees_with_central_limit_oracle_at_low_snr() {
    for side in LinkSide::BOTH {
        let sc = Scenario::default().with_snr_db(22.0);
        let mc_est = estimate_outage(&sc, side, &McConfig::new(1_000_000, 14)).unwrap();
        let oracle = pout_quadrature_oracle(&OutageQuery::new(sc, side, ModelKind::CentralLimit)).unwrap().p;
        assert!((mc_est.p_hat - oracle).abs() < 3.0 * mc_est.stderr_floored(), "{side:?} {} {oracle}", mc_est.p_hat);
    }
}

#[test]
fn ks_reference_behaviour() {
    // the model sampled from itself stays under the 1% critical value
    let n = 100_000;
    let mut rng = chunk_rng(15, 0);
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let ecdf = empirical_cdf(&u).unwrap();
    assert!(ks_distance(&ecdf, |x| x.clamp(0.0, 1.0)) < 1.63 / (n as f64).sqrt());
    assert_eq!(ks_distance(&ecdf, |_| 0.0), 1.0);
    assert!(matches!(empirical_cdf(&u[..99]), Err(Error::TooFewSamples { .. })));
}

#[test]
fn ecdf_lookup() {
    let xs: Vec<f64> = (1..=200).map(|i| i as f64).collect();
    let e = empirical_cdf(&xs).unwrap();
    assert_eq!(e.eval(0.5), 0.0);
    assert_eq!(e.eval(100.0), 0.5);
    assert_eq!(e.eval(1e9), 1.0);
    assert_eq!(e.quantile(0.5), 100.0);
    assert_eq!(e.len(), 200);
}

#[test]
fn slope_of_exact_power_law() {
    let snr: Vec<f64> = (0..6).map(|i| 20.0 + 5.0 * i as f64).collect();
    let p: Vec<f64> = snr.iter().map(|s| 7.0 * network::db_to_linear(*s).powi(-3)).collect();
    assert!((diversity_slope(&snr, &p).unwrap() - 3.0).abs() < 1e-12);
    assert!(diversity_slope(&snr[..2], &p[..2]).is_err());
    assert!(diversity_slope(&snr, &[0.0; 6]).is_err());
    assert!(diversity_slope(&[1.0; 4], &[0.1; 4]).is_err());
}
