//! One function per subcommand; each returns the complete output text.

use crate::output::{num, Flags, Table, VERSION};
use crate::scenario_file::{Axis, FitChoice, Method, ProtocolSpec, ScenarioFile, SchemaError};
use anyhow::{Context, Result};
use starios_core::channel::{self, CentralLimitModel, ChannelModel, GammaModelParams, LinkSide};
use starios_core::gamma_fit;
use starios_core::montecarlo::{self, empirical_cdf, ks_distance};
use starios_core::outage::{self, ModelKind, OutageQuery, OutageValue};
use starios_core::{McEstimate, Scenario};

fn curve_fit_params(file: &ScenarioFile, sc: &Scenario, side: LinkSide) -> Result<GammaModelParams> {
    let structural = outage::curvefit_params(sc, side)?;
    Ok(match &file.curve_fit {
        Some(cf) => GammaModelParams { alpha: cf.alpha, beta_scale: cf.beta_scale, beta_eff: structural.beta_eff },
        None => structural,
    })
}

pub fn channel_cdf(file: &ScenarioFile) -> Result<String> {
    let cfg = &file.channel_cdf;
    if cfg.elements.is_empty() {
        return Err(SchemaError("channel_cdf.elements is empty".into()).into());
    }
    if cfg.points < 2 {
        return Err(SchemaError("channel_cdf.points must be at least 2".into()).into());
    }
    let mc = file.mc_config();
    let side = cfg.side;
    let mut table = Table::new(["elements", "x", "ecdf", "cl_cdf", "cf_cdf"].map(String::from).to_vec());
    for &m in &cfg.elements {
        let sc = file.scenario_with(m, &file.protocol)?;
        let (rp_br, rp_ru) = sc.rician()?;
        let samples = montecarlo::channel_power_samples(m, &rp_br, &rp_ru, &sc.protocol, side, &mc)?;
        let ecdf = empirical_cdf(&samples)?;
        let cl = CentralLimitModel(channel::effective_stats_cascade(m, &rp_br, &rp_ru, &sc.protocol, side)?);
        let cf = curve_fit_params(file, &sc, side)?;
        let top = ecdf.quantile(0.999);
        for i in 0..cfg.points {
            let x = top * i as f64 / (cfg.points - 1) as f64;
            table.push(vec![m.to_string(), num(x), num(ecdf.eval(x)), num(cl.cdf(x)), num(cf.cdf(x))]);
        }
        let ks_cl = ks_distance(&ecdf, |x| cl.cdf(x));
        let ks_cf = ks_distance(&ecdf, |x| cf.cdf(x));
        table.footer.push(format!("ks elements={m} cl={} cf={}", num(ks_cl), num(ks_cf)));
    }
    Ok(table.render("channel-cdf", &file.to_json_line()))
}

/// MC estimates at every sweep point; shared-channel sweeps reuse one set
/// of draws.
fn mc_curve(file: &ScenarioFile, points: &[Scenario], side: LinkSide) -> Result<Vec<McEstimate>> {
    let mc = file.mc_config();
    Ok(match file.sweep.axis {
        Axis::PtDbm | Axis::SnrDb => montecarlo::estimate_outage_curve(points, side, &mc)?,
        Axis::Elements | Axis::Radius => points
            .iter()
            .map(|p| montecarlo::estimate_outage(p, side, &mc))
            .collect::<Result<_, _>>()?,
    })
}

fn note(flags: &mut Flags, column: &str, v: &OutageValue, direct_quadrature: bool) {
    if direct_quadrature {
        flags.add(column, "quadrature");
    }
    if v.fallback {
        flags.add(column, "fallback");
    }
    if v.clamped {
        flags.add(column, "clamped");
    }
    if v.regularized {
        flags.add(column, "regularized");
    }
}

fn analytic(file: &ScenarioFile, method: Method, sc: &Scenario, side: LinkSide) -> Result<(OutageValue, bool)> {
    let es = matches!(sc.protocol, channel::ProtocolConfig::ES { .. });
    let q = |model| OutageQuery::new(sc.clone(), side, model);
    Ok(match method {
        Method::Cl => (outage::evaluate(&q(ModelKind::CentralLimit))?, !es),
        Method::Cf => {
            let gp = curve_fit_params(file, sc, side)?;
            (outage::evaluate(&q(ModelKind::CurveFit(gp)))?, !es)
        }
        Method::ClOracle => (outage::pout_quadrature_oracle(&q(ModelKind::CentralLimit))?, false),
        Method::CfOracle => {
            let gp = curve_fit_params(file, sc, side)?;
            (outage::pout_quadrature_oracle(&q(ModelKind::CurveFit(gp)))?, false)
        }
        Method::Asym => {
            let s = outage::sigma00(sc, file.sigma_delta)?;
            let q = q(ModelKind::MFoldAsymptotic { sigma00: s.value });
            let mut v = outage::pout_asymptotic(&q, &sc.protocol, s.value)?;
            v.regularized |= s.regularized;
            (v, false)
        }
        Method::Mc => unreachable!("handled by the simulation path"),
    })
}

/// Leading columns: the swept value, then the transmit SNR unless that is
/// the swept value.
fn x_columns(axis: Axis) -> Vec<String> {
    let name = match axis {
        Axis::PtDbm => "pt_dbm",
        Axis::SnrDb => return vec!["snr_db".into()],
        Axis::Elements => "elements",
        Axis::Radius => "radius",
    };
    vec![name.into(), "snr_db".into()]
}

fn x_cells(axis: Axis, x: f64, snr_db: f64) -> Vec<String> {
    match axis {
        Axis::SnrDb => vec![num(x)],
        _ => vec![num(x), num(snr_db)],
    }
}

pub fn outage_sweep(file: &ScenarioFile) -> Result<String> {
    if file.models.is_empty() {
        return Err(SchemaError("models is empty".into()).into());
    }
    let xs = &file.sweep.values;
    let points: Vec<Scenario> = xs.iter().map(|&x| file.point(x, &file.protocol)).collect::<Result<_, _>>()?;

    let mut columns = x_columns(file.sweep.axis);
    for side in LinkSide::BOTH {
        for &m in &file.models {
            columns.push(format!("{}_{}", m.label(), side.tag()));
            if m == Method::Mc {
                columns.push(format!("mc_{}_se", side.tag()));
            }
        }
    }
    columns.push("flags".into());

    // cells[i] collects the value columns of row i, side by side
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); xs.len()];
    let mut flags: Vec<Flags> = (0..xs.len()).map(|_| Flags::default()).collect();
    for side in LinkSide::BOTH {
        for &m in &file.models {
            let col = format!("{}_{}", m.label(), side.tag());
            if m == Method::Mc {
                for (i, e) in mc_curve(file, &points, side)?.iter().enumerate() {
                    cells[i].push(num(e.p_hat));
                    cells[i].push(num(e.stderr));
                }
                continue;
            }
            for (i, sc) in points.iter().enumerate() {
                let (v, direct) = analytic(file, m, sc, side).with_context(|| format!("{col} at x = {}", xs[i]))?;
                note(&mut flags[i], &col, &v, direct);
                cells[i].push(num(v.p));
            }
        }
    }

    let mut table = Table::new(columns);
    for (i, ((x, sc), f)) in xs.iter().zip(&points).zip(flags).enumerate() {
        let mut row = x_cells(file.sweep.axis, *x, sc.snr_db());
        row.append(&mut cells[i]);
        row.push(f.render());
        table.push(row);
    }
    Ok(table.render("outage-sweep", &file.to_json_line()))
}

fn snr_axis(file: &ScenarioFile) -> Result<()> {
    match file.sweep.axis {
        Axis::PtDbm | Axis::SnrDb => Ok(()),
        _ => Err(SchemaError("this command needs a pt_dbm or snr_db sweep".into()).into()),
    }
}

pub fn diversity(file: &ScenarioFile) -> Result<String> {
    snr_axis(file)?;
    let cfg = &file.diversity;
    if cfg.protocols.is_empty() {
        return Err(SchemaError("diversity.protocols is empty".into()).into());
    }
    if !cfg.analytic_only && file.elements > 4 {
        eprintln!(
            "warning: M = {} makes simulated outage too small to resolve at high SNR; \
             consider diversity.analytic_only",
            file.elements
        );
    }
    let columns = ["protocol", "side", "analytic_order", "asym_slope", "mc_slope", "mc_points", "flags"];
    let mut table = Table::new(columns.map(String::from).to_vec());
    for spec in &cfg.protocols {
        let points: Vec<Scenario> = file.sweep.values.iter().map(|&x| file.point(x, spec)).collect::<Result<_, _>>()?;
        let snr: Vec<f64> = points.iter().map(Scenario::snr_db).collect();
        let proto = points[0].protocol;
        for side in LinkSide::BOTH {
            let mut flags = Flags::default();
            let order = outage::diversity_order(&proto, side, file.elements)?;
            let s = outage::sigma00(&points[0], file.sigma_delta)?;
            if s.regularized {
                flags.add("asym", "regularized");
            }
            let ln_p: Vec<f64> = points
                .iter()
                .map(|sc| {
                    let q = OutageQuery::new(sc.clone(), side, ModelKind::MFoldAsymptotic { sigma00: s.value });
                    outage::ln_pout_asymptotic(&q, &proto, s.value)
                })
                .collect::<Result<_, _>>()?;
            let asym = if order.order == 0 {
                flags.add("asym", "no_active_elements");
                f64::NAN
            } else {
                montecarlo::diversity_slope_ln(&snr, &ln_p)?
            };

            let (mc_slope, used) = if cfg.analytic_only {
                (f64::NAN, 0)
            } else {
                let est = mc_curve(file, &points, side)?;
                let (x, p): (Vec<f64>, Vec<f64>) =
                    snr.iter().zip(&est).filter(|(_, e)| e.p_hat > 0.0).map(|(s, e)| (*s, e.p_hat)).unzip();
                if x.len() < est.len() {
                    flags.add("mc", "zero_count_points_dropped");
                }
                match montecarlo::diversity_slope(&x, &p) {
                    Ok(v) => (v, x.len()),
                    Err(_) => {
                        flags.add("mc", "too_few_points");
                        (f64::NAN, x.len())
                    }
                }
            };
            table.push(vec![
                spec.label().into(),
                side.tag().into(),
                order.order.to_string(),
                num(asym),
                num(mc_slope),
                used.to_string(),
                flags.render(),
            ]);
        }
    }
    Ok(table.render("diversity", &file.to_json_line()))
}

/// Distinct column labels even when a protocol kind appears twice.
fn protocol_labels(specs: &[ProtocolSpec]) -> Vec<String> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let dup = specs.iter().filter(|t| t.label() == s.label()).count() > 1;
            if dup {
                format!("{}{}", s.label(), i)
            } else {
                s.label().to_string()
            }
        })
        .collect()
}

pub fn compare_protocols(file: &ScenarioFile) -> Result<String> {
    snr_axis(file)?;
    let specs = &file.compare.protocols;
    if specs.is_empty() {
        return Err(SchemaError("compare.protocols is empty".into()).into());
    }
    let labels = protocol_labels(specs);
    let mut columns = x_columns(file.sweep.axis);
    let mut cols: Vec<Vec<McEstimate>> = Vec::new();
    let mut snr = Vec::new();
    for side in LinkSide::BOTH {
        for (spec, label) in specs.iter().zip(&labels) {
            let points: Vec<Scenario> = file.sweep.values.iter().map(|&x| file.point(x, spec)).collect::<Result<_, _>>()?;
            snr = points.iter().map(Scenario::snr_db).collect();
            columns.push(format!("{label}_{}", side.tag()));
            columns.push(format!("{label}_{}_se", side.tag()));
            cols.push(mc_curve(file, &points, side)?);
        }
    }
    let mut table = Table::new(columns);
    for (i, x) in file.sweep.values.iter().enumerate() {
        let mut row = x_cells(file.sweep.axis, *x, snr[i]);
        for c in &cols {
            row.push(num(c[i].p_hat));
            row.push(num(c[i].stderr));
        }
        table.push(row);
    }
    Ok(table.render("compare-protocols", &file.to_json_line()))
}

#[derive(serde::Serialize)]
struct FitDocument<'a> {
    version: &'a str,
    command: &'a str,
    scenario: &'a ScenarioFile,
    fit: gamma_fit::FitResult,
}

/// Gamma fit of the channel power divided by the side's energy fraction,
/// so the fitted scale is comparable with the curve-fit beta.
pub fn fit_gamma(file: &ScenarioFile) -> Result<String> {
    let sc = file.base_scenario()?;
    let side = file.fit.side;
    let (rp_br, rp_ru) = sc.rician()?;
    let (m_active, beta) = sc.protocol.active(sc.elements, side);
    if m_active == 0 || beta == 0.0 {
        return Err(SchemaError(format!("the {} side has no active elements", side.tag())).into());
    }
    let samples = montecarlo::channel_power_samples(sc.elements, &rp_br, &rp_ru, &sc.protocol, side, &file.mc_config())?;
    let scaled: Vec<f64> = samples.iter().map(|g| g / beta).collect();
    let mut fit = match file.fit.method {
        FitChoice::Mle => gamma_fit::fit(&scaled)?,
        FitChoice::Moments => gamma_fit::fit_moments(&scaled)?,
    };
    fit.params.beta_eff = beta;
    let doc = FitDocument { version: VERSION, command: "fit-gamma", scenario: file, fit };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}
