use rand::Rng;
use starios_core::channel::*;
use starios_core::montecarlo::{self, chunk_rng, empirical_cdf, ks_distance, McConfig};
use starios_core::specfun::quad::{integrate, integrate_with_breaks, QuadTol};
use starios_core::specfun;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const TIGHT: QuadTol = QuadTol { abs: 1e-14, rel: 1e-13 };

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn moment(k: f64, p: i32) -> f64 {
    let f = |x: f64| x.powi(p) * rician_pdf(x, k);
    integrate_with_breaks(f, &[0.0, 1.0, 2.0, 4.0, 12.0], TIGHT).unwrap().value
}

#[test]
fn rician_moments_closed_cases() {
    let r0 = rician_moments(0.0).unwrap();
    assert!((r0.h_bar - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-15);
    assert!((r0.eta - (1.0 - std::f64::consts::PI / 4.0)).abs() < 1e-15);
    assert!((rician_moments(100.0).unwrap().h_bar - 1.0).abs() < 1e-2);
    assert!(rician_moments(-0.1).is_err());
    for k in [0.0, 0.3, 1.0, 3.5, 20.0, 400.0] {
        let r = rician_moments(k).unwrap();
        assert!((r.h_bar * r.h_bar + r.eta - 1.0).abs() < 1e-12);
        assert!(r.h_bar > 0.0 && r.h_bar < 1.0 && r.eta > 0.0 && r.eta < 1.0);
    }
}

#[test]
fn rician_mean_matches_density_quadrature() {
    for k in [0.0, 1.0, 3.5, 10.0] {
        let h = rician_moments(k).unwrap().h_bar;
        assert!(rel(moment(k, 1), h) < 1e-11, "k={k}");
    }
}

#[test]
fn rician_density_is_normalized_with_unit_power() {
    for k in [0.0, 0.5, 1.0, 3.5, 10.0, 50.0] {
        assert!((moment(k, 0) - 1.0).abs() < 1e-8, "k={k}");
        assert!((moment(k, 2) - 1.0).abs() < 1e-8, "k={k}");
    }
}

#[test]
fn rician_reduces_to_rayleigh() {
    for x in [0.01f64, 0.3, 1.0, 2.5] {
        let ray = 2.0 * x * (-x * x).exp();
        assert!(rel(rician_pdf(x, 0.0), ray) < 1e-14);
    }
}

#[test]
fn effective_stats_cases() {
    let rp = rician_moments(1.0).unwrap();
    let (h2, eta) = (rp.h_bar * rp.h_bar, rp.eta);
    let one = effective_stats(1, &rp, &ProtocolConfig::es(1.0), LinkSide::Reflecting).unwrap();
    assert!(rel(one.h_bar_eq, h2) < 1e-15);
    assert!(rel(one.eta_eq, 2.0 * h2 * eta + eta * eta) < 1e-15);

    let es = effective_stats(30, &rp, &ProtocolConfig::es(0.7), LinkSide::Reflecting).unwrap();
    assert!(rel(es.h_bar_eq, 0.7f64.sqrt() * 30.0 * h2) < 1e-14);
    assert!(rel(es.eta_eq, 0.7 * 30.0 * (2.0 * h2 * eta + eta * eta)) < 1e-14);
    assert_eq!(es.m_active, 30);

    let ms = effective_stats(30, &rp, &ProtocolConfig::MS { m_rfl: 21, m_rfr: 9 }, LinkSide::Reflecting).unwrap();
    let es21 = effective_stats(21, &rp, &ProtocolConfig::es(1.0), LinkSide::Reflecting).unwrap();
    assert_eq!(ms, es21);
}

#[test]
fn remark_one_equalities() {
    let rp = rician_moments(2.0).unwrap();
    for side in LinkSide::BOTH {
        let ts = effective_stats(12, &rp, &ProtocolConfig::ts(0.4), side).unwrap();
        let ms_all = match side {
            LinkSide::Reflecting => ProtocolConfig::MS { m_rfl: 12, m_rfr: 0 },
            LinkSide::Transmitting => ProtocolConfig::MS { m_rfl: 0, m_rfr: 12 },
        };
        let es_all = match side {
            LinkSide::Reflecting => ProtocolConfig::es(1.0),
            LinkSide::Transmitting => ProtocolConfig::es(0.0),
        };
        assert_eq!(effective_stats(12, &rp, &ms_all, side).unwrap(), ts);
        assert_eq!(effective_stats(12, &rp, &es_all, side).unwrap(), ts);
    }
}

#[test]
fn protocol_validation() {
    assert!(ProtocolConfig::es(0.7).validate(30).is_ok());
    assert!(ProtocolConfig::ES { beta_rfl: 0.7, beta_rfr: 0.7 }.validate(30).is_err());
    assert!(ProtocolConfig::MS { m_rfl: 20, m_rfr: 9 }.validate(30).is_err());
    assert!(ProtocolConfig::ts(1.2).validate(30).is_err());
    assert_eq!(ProtocolConfig::ms_fraction(30, 0.7), ProtocolConfig::MS { m_rfl: 21, m_rfr: 9 });
    assert_eq!(ProtocolConfig::ms_fraction(2, 0.7), ProtocolConfig::MS { m_rfl: 2, m_rfr: 0 });
    let rp = rician_moments(1.0).unwrap();
    let empty = ProtocolConfig::MS { m_rfl: 2, m_rfr: 0 };
    assert!(effective_stats(2, &rp, &empty, LinkSide::Transmitting).is_err());
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// CDF(0) = 0, nondecreasing, and central differences reproduce the pdf.
fn check_model(model: &dyn ChannelModel, lo: f64, hi: f64) {
    assert_eq!(model.cdf(0.0), 0.0);
    let mut prev = 0.0;
    for x in log_grid(lo, hi, 60) {
        let f = model.cdf(x);
        assert!(f >= prev, "cdf decreased at {x}");
        prev = f;
        let h = x * 1e-5;
        let fd = (model.cdf(x + h) - model.cdf(x - h)) / (2.0 * h);
        let pdf = model.pdf(x);
        if pdf > 1e-250 && f < 1.0 - 1e-6 {
            assert!(rel(fd, pdf) < 1e-4, "x={x} fd={fd} pdf={pdf}");
        }
    }
}

#[test]
fn central_limit_model_contract() {
    let rp = rician_moments(1.0).unwrap();
    let st = effective_stats(30, &rp, &ProtocolConfig::es(0.7), LinkSide::Reflecting).unwrap();
    let m = CentralLimitModel(st);
    assert_eq!(cl_cdf(0.0, &st), 0.0);
    assert!((cl_cdf(1e6, &st) - 1.0).abs() < 1e-15);
    check_model(&m, 1.0, 2000.0);
    let small = effective_stats(2, &rp, &ProtocolConfig::es(0.3), LinkSide::Transmitting).unwrap();
    check_model(&CentralLimitModel(small), 1e-4, 20.0);
}

#[test]
fn central_limit_median_against_simulation() {
    let rp = rician_moments(1.0).unwrap();
    let proto = ProtocolConfig::es(0.7);
    let samples = montecarlo::channel_power_samples(30, &rp, &rp, &proto, LinkSide::Reflecting, &McConfig::new(1_000_000, 11)).unwrap();
    let ecdf = empirical_cdf(&samples).unwrap();
    let st = effective_stats(30, &rp, &proto, LinkSide::Reflecting).unwrap();
    assert!((cl_cdf(ecdf.quantile(0.5), &st) - 0.5).abs() < 0.02);
}

#[test]
fn mfold_model_contract() {
    let m = MFoldModel { m_eff: 3, beta_eff: 0.7, sigma00: 2.5 };
    check_model(&m, 1e-6, 0.5);
    // exact monomial slope
    let (x1, x2) = (1e-4, 1e-2);
    let slope = (m.cdf(x2).ln() - m.cdf(x1).ln()) / (x2 / x1).ln();
    assert!((slope - 3.0).abs() < 1e-12);
    // CDF(beta x; beta) = CDF(x; 1)
    for x in [1e-5, 1e-3, 0.05] {
        assert!(rel(mfold_cdf(0.7 * x, 3, 0.7, 2.5), mfold_cdf(x, 3, 1.0, 2.5)) < 1e-13);
    }
    // large M stays finite through log space
    let big = mfold_cdf(100.0, 120, 1.0, 3.0);
    assert!(big.is_finite() && big > 0.0);
    assert_eq!(mfold_cdf(1e9, 2, 1.0, 3.0), 1.0);
}

fn sigma_single_k(t: u32, n: u32, k: f64) -> f64 {
    // both hops with the same factor: k1^t k2^n -> k^{t+n}, P -> (1+k)^2
    let (tf, nf) = (t as f64, n as f64);
    let g = |x: f64| specfun::gamma(x);
    let fact = |m: u32| g(m as f64 + 1.0);
    let f = specfun::hyp2f1_unit(2.0 * tf + 2.0, tf - nf + 0.5, tf + nf + 2.5, 1e-6).unwrap().value;
    4f64.powf(tf - nf + 1.0) * std::f64::consts::PI.sqrt() * k.powf(tf + nf) * (1.0 + k).powf(2.0 * tf + 2.0)
        / (fact(t).powi(2) * fact(n).powi(2) * (2.0 * k).exp())
        * g(2.0 * nf + 2.0)
        * g(2.0 * tf + 2.0)
        / g(tf + nf + 2.5)
        * f
}

#[test]
fn sigma_collapses_for_equal_factors() {
    for (t, n) in [(0, 0), (0, 1), (1, 1), (1, 3), (2, 2)] {
        for k in [0.5, 1.0, 3.0] {
            let s = mfold_sigma(t, n, k, k, 1e-6).unwrap().value;
            assert!(rel(s, sigma_single_k(t, n, k)) < 1e-12, "({t},{n}) k={k}");
        }
    }
}

#[test]
fn sigma_convergent_entries_match_gauss_sum() {
    // for n > t the unit-argument value is Gauss's Gamma ratio
    for (t, n) in [(0, 1), (0, 2), (1, 2), (1, 4)] {
        let (a, b, c) = (2.0 * t as f64 + 2.0, t as f64 - n as f64 + 0.5, (t + n) as f64 + 2.5);
        let gauss = statrs::function::gamma::gamma(c) * statrs::function::gamma::gamma(c - a - b)
            / (statrs::function::gamma::gamma(c - a) * statrs::function::gamma::gamma(c - b));
        let f = specfun::hyp2f1_unit(a, b, c, 1e-6).unwrap();
        assert!(!f.regularized);
        assert!(rel(f.value, gauss) < 1e-12, "({t},{n})");
    }
    let s00 = mfold_sigma(0, 0, 1.0, 1.0, 1e-6).unwrap();
    assert!(s00.regularized && s00.value.is_finite() && s00.value > 0.0);
}

#[test]
fn exact_product_pdf_normalizes() {
    let f = |z: f64| if z > 0.0 { exact_product_pdf(z, 1.0, 1.0, 20).unwrap() } else { 0.0 };
    let tol = QuadTol { abs: 1e-10, rel: 1e-10 };
    let total = integrate_with_breaks(f, &[0.0, 0.05, 0.5, 1.0, 2.0, 4.0, 8.0], tol).unwrap().value;
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn exact_product_pdf_rayleigh_collapse() {
    for z in [0.01, 0.4, 1.3, 3.0] {
        let k0 = specfun::bessel_k(0.0, 2.0 * z).unwrap();
        assert!(rel(exact_product_pdf(z, 0.0, 0.0, 30).unwrap(), 4.0 * z * k0) < 1e-13);
    }
    assert!(exact_product_pdf(0.0, 1.0, 1.0, 20).is_err());
}

#[test]
fn exact_product_pdf_matches_histogram() {
    let (k1, k2) = (1.0, 1.0);
    let n = 1_000_000;
    let mut rng = chunk_rng(99, 0);
    let mut draw = |k: f64| montecarlo::sample_rician(k, 1.0 - rng.random::<f64>(), rng.random());
    let edges: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
    let mut counts = vec![0u64; edges.len()]; // last bin is the tail
    for _ in 0..n {
        let z = draw(k1) * draw(k2);
        let i = ((z / 0.1) as usize).min(edges.len() - 1);
        counts[i] += 1;
    }
    let pdf = |z: f64| if z > 0.0 { exact_product_pdf(z, k1, k2, 30).unwrap() } else { 0.0 };
    let tol = QuadTol { abs: 1e-13, rel: 1e-11 };
    let mut chi2 = 0.0;
    let mut mass = 0.0;
    for i in 0..edges.len() - 1 {
        let p = integrate(pdf, edges[i], edges[i + 1], tol).unwrap().value;
        mass += p;
        let e = p * n as f64;
        chi2 += (counts[i] as f64 - e).powi(2) / e;
    }
    let e_tail = (1.0 - mass) * n as f64;
    let df = if e_tail >= 5.0 {
        chi2 += (counts[edges.len() - 1] as f64 - e_tail).powi(2) / e_tail;
        edges.len() - 1
    } else {
        edges.len() - 2
    };
    let p_value = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2={chi2} p={p_value}");
}

#[test]
fn single_element_exponent_near_origin() {
    // F(x) for x = z^2 behaves like x ln(1/x); its local log-log slope
    // tends to 1 = M_eff, the exponent of the M-fold monomial
    let cdf = |x: f64| {
        let f = |z: f64| if z > 0.0 { exact_product_pdf(z, 1.0, 1.0, 20).unwrap() } else { 0.0 };
        integrate(f, 0.0, x.sqrt(), QuadTol { abs: 1e-300, rel: 1e-12 }).unwrap().value
    };
    let x = 1e-12;
    let slope = (cdf(2.0 * x).ln() - cdf(x).ln()) / 2f64.ln();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

#[test]
fn gamma_model_contract() {
    let exp = GammaModelParams { alpha: 1.0, beta_scale: 4.0, beta_eff: 0.5 };
    for x in [0.1, 1.0, 5.0] {
        assert!(rel(gamma_cdf(x, &exp), 1.0 - (-x / 2.0).exp()) < 1e-14);
        assert!(rel(gamma_pdf(x, &exp), 0.5 * (-x / 2.0).exp()) < 1e-14);
    }
    let p = GammaModelParams { alpha: 30.0, beta_scale: 22.46, beta_eff: 1.0 };
    assert!((gamma_cdf(1e9, &p) - 1.0).abs() < 1e-15);
    let at_mean = gamma_cdf(30.0 * 22.46, &p);
    let reference = statrs::function::gamma::gamma_lr(30.0, 30.0);
    assert!(rel(at_mean, reference) < 1e-12);
    check_model(&p, 10.0, 3000.0);
    check_model(&exp, 1e-3, 40.0);
}

#[test]
fn structural_gamma_matches_exact_mean() {
    let rp = rician_moments(1.0).unwrap();
    let gp = GammaModelParams::structural(30, 0.7, &rp, &rp);
    assert_eq!(gp.alpha, 30.0);
    assert!(rel(gp.alpha * gp.theta(), mean_channel_power(30, 0.7, &rp, &rp)) < 1e-14);
}

fn es_samples(m: u32, k: f64, trials: u64) -> Vec<f64> {
    let rp = rician_moments(k).unwrap();
    montecarlo::channel_power_samples(m, &rp, &rp, &ProtocolConfig::es(0.7), LinkSide::Reflecting, &McConfig::new(trials, 5)).unwrap()
}

#[test]
fn central_limit_accuracy_grows_with_elements() {
    let rp = rician_moments(1.0).unwrap();
    let mut last = f64::INFINITY;
    for m in [10, 20, 30] {
        let ecdf = empirical_cdf(&es_samples(m, 1.0, 400_000)).unwrap();
        let st = effective_stats(m, &rp, &ProtocolConfig::es(0.7), LinkSide::Reflecting).unwrap();
        let ks = ks_distance(&ecdf, |y| cl_cdf(y, &st));
        assert!(ks < last, "M={m} ks={ks}");
        last = ks;
    }
}

#[test]
fn fitted_gamma_tracks_channel_samples() {
    for m in [10, 20, 30] {
        let s = es_samples(m, 1.0, 400_000);
        let (fit_half, held_out) = s.split_at(s.len() / 2);
        let fit = starios_core::gamma_fit::fit(fit_half).unwrap();
        let ecdf = empirical_cdf(held_out).unwrap();
        let ks = ks_distance(&ecdf, |y| gamma_cdf(y, &fit.params));
        assert!(ks < 0.05, "M={m} ks={ks}");
    }
}
