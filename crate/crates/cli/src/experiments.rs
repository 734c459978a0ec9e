//! One function per experiment. Each returns a [`Report`]; nothing here
//! touches the filesystem except reading a sequence file.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mlab_core::construct::{
    build_domain, build_profile, check_secant_property, validate_sequence, EpsilonSequence, SequenceReport,
};
use mlab_core::domain::{index_of_convexity, validate_regular_cusp, CuspProfile, GraphDomain, DEFAULT_R_MAX};
use mlab_core::jacobi::{EnvelopeConstants, JacobiParams};
use mlab_core::markov::{
    alpha_selector, best_markov_p2, extremal_ratio, fit_exponent, lemma31_ratio, local_slopes, lower_bound_markov_p,
    AscentOptions, EigenOptions, FitModel, MarkovReport,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{DomainSpec, Experiment, ExperimentConfig, SCHEMA};

/// Columns shared by every Markov-factor sweep.
pub const SWEEP_COLUMNS: [&str; 5] = ["n", "factor", "epsilon_n", "n2_over_eps", "ratio_to_law"];

/// Fewest degrees an exponent fit is attempted on.
pub const MIN_FIT_DEGREES: usize = 4;

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// Exported profile, written only by `construct`.
    pub profile: Option<Value>,
    pub summary: String,
    pub passed: bool,
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e16)`. Non-finite values become empty cells.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        String::new()
    } else if x == 0.0 || (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn band_text(config: &ExperimentConfig) -> String {
    match config.band {
        Some([lo, hi]) => format!("band [{lo}, {hi}]"),
        None => "no band".into(),
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values.into_iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo
}

fn header(config: &ExperimentConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("experiment".into(), json!(config.experiment.name()));
    m.insert("config".into(), serde_json::to_value(config).expect("config serialises"));
    m.insert("band".into(), json!(config.band));
    m
}

fn fit_json(report: &MarkovReport) -> Value {
    let model = match report.model {
        FitModel::PurePower => json!({"model": "pure-power"}),
        FitModel::LogCorrected { iota } => json!({"model": "log-corrected", "iota": iota}),
    };
    json!({
        "model": model,
        "fitted_exponent": report.fitted_exponent,
        "fitted_constant": report.fitted_constant,
        "residual": report.residual,
        "entries": report.entries.iter().map(|&(n, m)| json!({"n": n, "factor": m})).collect::<Vec<_>>(),
    })
}

fn optional_fit(entries: &[(usize, f64)], model: FitModel) -> Result<Option<MarkovReport>> {
    if entries.len() < MIN_FIT_DEGREES {
        return Ok(None);
    }
    Ok(Some(fit_exponent(entries, model)?))
}

/// Runs `config.experiment`. `base` resolves relative paths inside the config.
pub fn run(config: &ExperimentConfig, base: &Path) -> Result<Report> {
    match config.experiment {
        Experiment::JacobiCheck => jacobi_check(config),
        Experiment::DomainInfo => domain_info(config),
        Experiment::MarkovSweep => markov_sweep(config),
        Experiment::EigenSweep => eigen_sweep(config),
        Experiment::Lemma31 => lemma31(config),
        Experiment::Construct => construct(config, base),
        Experiment::Logcusp => logcusp(config),
    }
}

fn jacobi_check(config: &ExperimentConfig) -> Result<Report> {
    let params = JacobiParams::new(config.alpha.unwrap_or(0.0), config.beta)?;
    let (lo, hi) = (config.theta_margin, PI - config.theta_margin);
    let consts = EnvelopeConstants::default();
    let degrees = config.degrees();
    let rows: Vec<(usize, f64, f64, f64)> = degrees
        .par_iter()
        .map(|&n| -> Result<_> {
            let mh = params.mehler_heine_gap(config.z, n)?;
            let darboux = params.darboux_max_error(n, lo, hi, 2000)?;
            let top = PI - consts.delta;
            let mut envelope = 0.0f64;
            for i in 1..=2000 {
                let t = top * i as f64 / 2000.0;
                envelope = envelope.max(params.eval(n, t.cos())?.abs() / params.envelope_bound(n, t, consts));
            }
            Ok((n, mh, darboux, envelope))
        })
        .collect::<Result<_>>()?;
    let errors: Vec<(usize, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
    let exponent = if errors.len() >= 4 {
        fit_exponent(&errors, FitModel::PurePower)?.fitted_exponent
    } else if errors.len() >= 2 {
        let (a, b) = (errors[0], errors[errors.len() - 1]);
        (b.1 / a.1).ln() / (b.0 as f64 / a.0 as f64).ln()
    } else {
        bail!("jacobi-check needs at least two degrees to measure the Darboux decay");
    };
    let passed = config.in_band(exponent);
    let mut json = header(config);
    json.insert("alpha".into(), json!(params.alpha()));
    json.insert("beta".into(), json!(params.beta()));
    json.insert(
        "entries".into(),
        json!(rows
            .iter()
            .map(|r| json!({"n": r.0, "mehler_heine_gap": r.1, "darboux_error": r.2, "envelope_ratio": r.3}))
            .collect::<Vec<_>>()),
    );
    json.insert("darboux_local_slopes".into(), json!(local_slopes(&errors)));
    json.insert("darboux_exponent".into(), json!(exponent));
    json.insert("passed".into(), json!(passed));
    Ok(Report {
        columns: vec!["n", "mehler_heine_gap", "darboux_error", "envelope_ratio"],
        rows: rows.iter().map(|r| vec![r.0.to_string(), num(r.1), num(r.2), num(r.3)]).collect(),
        json: Value::Object(json),
        profile: None,
        summary: format!(
            "jacobi-check: Darboux error exponent {exponent:.4} (theory -1.5), {}: {}",
            band_text(config),
            verdict(passed)
        ),
        passed,
    })
}

fn is_cusp(profile: &CuspProfile) -> bool {
    profile.value_at_gap(0.0) == 0.0
}

fn domain_info(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.domain.domain()?;
    let profile = domain.profile();
    let reg = validate_regular_cusp(&domain);
    let top = profile.max_value();
    let omega: Vec<(f64, f64)> = (0..config.omega_points)
        .map(|j| {
            let t = top * 0.5f64.powi(j as i32);
            Ok((t, domain.modulus_of_continuity(t)?))
        })
        .collect::<Result<_>>()?;
    let scales = if is_cusp(profile) {
        config.degrees().par_iter().map(|&n| Ok(domain.solve_epsilon_n(n)?)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let passed = config.in_band(reg.i_conv);
    let mut json = header(config);
    json.insert("i_conv_estimate".into(), json!(reg.i_conv));
    json.insert("i_conv_finite".into(), json!(reg.i_conv_finite));
    json.insert("regular".into(), json!(reg.regular));
    json.insert("convex".into(), json!(reg.convex));
    json.insert("eta".into(), json!(reg.eta));
    json.insert("appindex_margin".into(), json!(reg.appindex_margin));
    json.insert("appindex_holds".into(), json!(reg.appindex_holds));
    json.insert("omega".into(), json!(omega.iter().map(|&(t, w)| json!({"t": t, "omega": w})).collect::<Vec<_>>()));
    json.insert(
        "epsilon".into(),
        json!(scales
            .iter()
            .map(|s| json!({"n": s.n, "epsilon_n": s.epsilon_n, "gap": s.gap, "in_sandwich": s.in_sandwich()}))
            .collect::<Vec<_>>()),
    );
    json.insert("passed".into(), json!(passed));
    Ok(Report {
        columns: vec!["n", "epsilon_n", "gap", "x_n", "u_n", "residual", "in_sandwich"],
        rows: scales
            .iter()
            .map(|s| {
                vec![
                    s.n.to_string(),
                    num(s.epsilon_n),
                    num(s.gap),
                    num(s.x_n),
                    num(s.u_n),
                    num(s.residual),
                    s.in_sandwich().to_string(),
                ]
            })
            .collect(),
        json: Value::Object(json),
        profile: None,
        summary: format!(
            "domain-info: I_conv ≈ {:.6}, regular = {}, appindex = {}, {}: {}",
            reg.i_conv,
            reg.regular,
            reg.appindex_holds,
            band_text(config),
            verdict(passed)
        ),
        passed,
    })
}

/// `α` from the config, or from the convexity index of the profile.
fn resolve_alpha(config: &ExperimentConfig, profile: &CuspProfile) -> Result<(f64, Option<f64>)> {
    if let Some(a) = config.alpha {
        return Ok((a, None));
    }
    let i_conv = index_of_convexity(profile, profile.convex_from(), DEFAULT_R_MAX)?;
    Ok((alpha_selector(config.p, i_conv, config.alpha_margin), Some(i_conv)))
}

/// One sweep row: the factor and, on cusps, the scale `ε_n`.
struct SweepRow {
    n: usize,
    factor: f64,
    epsilon_n: Option<f64>,
}

impl SweepRow {
    fn law(&self) -> f64 {
        let n2 = (self.n as f64).powi(2);
        match self.epsilon_n {
            Some(e) => n2 / e,
            None => n2,
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            num(self.factor),
            opt_num(self.epsilon_n),
            opt_num(self.epsilon_n.map(|_| self.law())),
            num(self.factor / self.law()),
        ]
    }

    fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "factor": self.factor,
            "epsilon_n": self.epsilon_n,
            "ratio_to_law": self.factor / self.law(),
        })
    }
}

fn sweep<F>(config: &ExperimentConfig, domain: &GraphDomain, factor: F) -> Result<Vec<SweepRow>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let cusp = is_cusp(domain.profile());
    config
        .degrees()
        .par_iter()
        .map(|&n| {
            let f = factor(n)?;
            let epsilon_n = if cusp { Some(domain.solve_epsilon_n(n)?.epsilon_n) } else { None };
            Ok(SweepRow { n, factor: f, epsilon_n })
        })
        .collect()
}

fn sweep_report(
    config: &ExperimentConfig,
    rows: &[SweepRow],
    fit: Option<&MarkovReport>,
    mut json: serde_json::Map<String, Value>,
) -> Report {
    let exponent = fit.map(|f| f.fitted_exponent);
    let passed = match exponent {
        Some(mu) => config.in_band(mu),
        None => config.band.is_none(),
    };
    let law_spread = spread(rows.iter().map(|r| r.factor / r.law()));
    let entries: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.factor)).collect();
    json.insert("entries".into(), json!(rows.iter().map(SweepRow::to_json).collect::<Vec<_>>()));
    json.insert("fit".into(), fit.map(fit_json).unwrap_or(Value::Null));
    json.insert("local_slopes".into(), json!(local_slopes(&entries)));
    json.insert("law_spread".into(), json!(law_spread));
    json.insert("passed".into(), json!(passed));
    Report {
        columns: SWEEP_COLUMNS.to_vec(),
        rows: rows.iter().map(SweepRow::cells).collect(),
        json: Value::Object(json),
        profile: None,
        summary: format!(
            "{}: {}, law spread {:.3}, {}: {}",
            config.experiment.name(),
            match fit {
                Some(f) => format!("fitted exponent {:.4} (residual {:.3e})", f.fitted_exponent, f.residual),
                None => format!("no fit ({} degrees, at least {MIN_FIT_DEGREES} needed)", rows.len()),
            },
            law_spread,
            band_text(config),
            verdict(passed)
        ),
        passed,
    }
}

fn markov_sweep(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.domain.domain()?;
    let mesh = config.mesh.mesh()?;
    let (alpha, i_conv) = resolve_alpha(config, domain.profile())?;
    let params = JacobiParams::new(alpha, config.beta)?;
    let rows = sweep(config, &domain, |n| Ok(extremal_ratio(&domain, &params, n, config.p, &mesh)?))?;
    let entries: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.factor)).collect();
    let fit = optional_fit(&entries, config.fit.model()?)?;
    let mut json = header(config);
    json.insert("alpha".into(), json!(alpha));
    json.insert("i_conv_estimate".into(), json!(i_conv));
    Ok(sweep_report(config, &rows, fit.as_ref(), json))
}

fn eigen_sweep(config: &ExperimentConfig) -> Result<Report> {
    let domain = config.domain.domain()?;
    let mesh = config.mesh.mesh()?;
    let direction = config.direction()?;
    let exact = config.p == 2.0;
    let rows = sweep(config, &domain, |n| {
        if exact {
            let options = EigenOptions {
                mesh,
                threshold: config.threshold,
                basis: None,
                allow_large_degree: config.allow_large_degree,
            };
            Ok(best_markov_p2(&domain, n, direction, &options)?)
        } else {
            let options = AscentOptions { mesh, threshold: config.threshold, ..AscentOptions::default() };
            Ok(lower_bound_markov_p(&domain, n, config.p, direction, config.restarts, config.seed, &options)?)
        }
    })?;
    let entries: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.factor)).collect();
    let fit = optional_fit(&entries, config.fit.model()?)?;
    let mut json = header(config);
    json.insert("method".into(), json!(if exact { "generalized-eigenvalue" } else { "ascent-lower-bound" }));
    Ok(sweep_report(config, &rows, fit.as_ref(), json))
}

fn lemma31(config: &ExperimentConfig) -> Result<Report> {
    let profile = config.domain.profile()?;
    let mesh = config.mesh.mesh()?;
    let (alpha, _) = resolve_alpha(config, &profile)?;
    let params = JacobiParams::new(alpha, config.beta)?;
    let rows: Vec<(usize, f64, f64)> = config
        .degrees()
        .par_iter()
        .map(|&n| {
            let ratio = lemma31_ratio(&profile, &params, n, config.p, config.upsilon, &mesh)?;
            let nf = n as f64;
            Ok((n, ratio, nf * nf * profile.value_at_gap(config.upsilon / (nf * nf))))
        })
        .collect::<Result<_>>()?;
    let s = spread(rows.iter().map(|r| r.1));
    let passed = config.in_band(s);
    let mut json = header(config);
    json.insert("alpha".into(), json!(alpha));
    json.insert(
        "entries".into(),
        json!(rows.iter().map(|r| json!({"n": r.0, "ratio": r.1, "epsilon_n": r.2})).collect::<Vec<_>>()),
    );
    json.insert("spread".into(), json!(s));
    json.insert("passed".into(), json!(passed));
    Ok(Report {
        columns: vec!["n", "ratio", "epsilon_n"],
        rows: rows.iter().map(|r| vec![r.0.to_string(), num(r.1), num(r.2)]).collect(),
        json: Value::Object(json),
        profile: None,
        summary: format!("lemma31: max/min ratio {s:.4}, {}: {}", band_text(config), verdict(passed)),
        passed,
    })
}

fn sequence_json(report: &SequenceReport) -> Value {
    json!({
        "passed": report.passed(),
        "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "equality_cases": report.equality_cases.iter().map(|e| json!({
            "m": e.m, "n": e.n, "slope_m": e.slope_m, "slope_n": e.slope_n, "consistent": e.consistent,
        })).collect::<Vec<_>>(),
        "checked_range": [report.checked_range.0, report.checked_range.1],
        "sup_constant": report.sup_constant,
    })
}

fn construct(config: &ExperimentConfig, base: &Path) -> Result<Report> {
    let full = config.sequence.sequence(base)?;
    let n_max = config.n_max.min(full.len());
    let seq = EpsilonSequence::new(full.values()[..n_max].to_vec(), full.constants()[..n_max].to_vec())?;
    let validation = validate_sequence(&seq);
    let mut json = header(config);
    json.insert("validation".into(), sequence_json(&validation));
    if !validation.passed() {
        json.insert("passed".into(), json!(false));
        let first = validation.violations[0].to_string();
        return Ok(Report {
            columns: vec!["n", "x", "value", "slope", "epsilon_n", "epsilon_hat", "recovery_ratio"],
            rows: Vec::new(),
            json: Value::Object(json),
            profile: None,
            summary: format!(
                "construct: sequence rejected with {} violation(s), first: {first}: FAIL",
                validation.violations.len()
            ),
            passed: false,
        });
    }
    let result = build_profile(&seq, n_max)?;
    let secant = check_secant_property(&result.profile, config.secant_samples, config.seed);
    let domain = build_domain(&result)?;
    let [r_lo, r_hi] = config.recovery_range.unwrap_or([4, n_max / 2]);
    let recovered: Vec<(usize, f64)> = result
        .knots
        .par_iter()
        .map(|k| Ok((k.n, domain.solve_epsilon_n(k.n)?.epsilon_n)))
        .collect::<Result<_>>()?;
    let [b_lo, b_hi] = config.recovery_band;
    let recovery_ok = recovered
        .iter()
        .filter(|(n, _)| (r_lo..=r_hi).contains(n))
        .all(|&(n, e)| (b_lo..=b_hi).contains(&(e / seq.epsilon(n))));

    let (alpha, i_conv) = resolve_alpha(config, &result.profile)?;
    let params = JacobiParams::new(alpha, config.beta)?;
    let mesh = config.mesh.mesh()?;
    let sweep_rows = sweep(config, &domain, |n| Ok(extremal_ratio(&domain, &params, n, config.p, &mesh)?))?;
    let entries: Vec<(usize, f64)> = sweep_rows.iter().map(|r| (r.n, r.factor)).collect();
    let fit = optional_fit(&entries, config.fit.model()?)?;
    let slope_ok = match &fit {
        Some(f) => config.in_band(f.fitted_exponent),
        None => config.band.is_none(),
    };
    let secant_ok = secant.violations == 0;
    let passed = secant_ok && recovery_ok && slope_ok;

    let interp = result.interpolant();
    let tail = result.tail;
    let profile_json = json!({
        "schema": SCHEMA,
        "profile": serde_json::to_value(DomainSpec::from_interpolant(interp))?,
        "pieces": interp.pieces().iter().map(|q| json!({
            "gap_left": q.left, "gap_right": q.right, "anchor": q.anchor,
            "value": q.value, "slope": q.slope, "curvature": q.curvature,
        })).collect::<Vec<_>>(),
        "tail": {"end_gap": tail.end, "value_end": tail.value_end, "exponent": tail.exponent, "coefficient": tail.coefficient()},
        "cap_kink": result.cap_kink,
    });
    json.insert(
        "secant".into(),
        json!({
            "samples": secant.samples, "checked": secant.checked, "skipped": secant.skipped,
            "violations": secant.violations, "worst_margin": secant.worst_margin,
            "worst_at": secant.worst_at.map(|(a, b, y)| [a, b, y]),
        }),
    );
    json.insert(
        "recovery".into(),
        json!({"range": [r_lo, r_hi], "band": config.recovery_band, "passed": recovery_ok}),
    );
    json.insert("alpha".into(), json!(alpha));
    json.insert("i_conv_estimate".into(), json!(i_conv));
    json.insert("sweep".into(), json!(sweep_rows.iter().map(SweepRow::to_json).collect::<Vec<_>>()));
    json.insert("fit".into(), fit.as_ref().map(fit_json).unwrap_or(Value::Null));
    json.insert("cap_kink".into(), json!(result.cap_kink));
    json.insert("passed".into(), json!(passed));
    let rows = result
        .knots
        .iter()
        .zip(&recovered)
        .map(|(k, &(_, hat))| {
            let eps = seq.epsilon(k.n);
            vec![k.n.to_string(), num(k.x), num(k.value), num(k.slope), num(eps), num(hat), num(hat / eps)]
        })
        .collect();
    Ok(Report {
        columns: vec!["n", "x", "value", "slope", "epsilon_n", "epsilon_hat", "recovery_ratio"],
        rows,
        json: Value::Object(json),
        profile: Some(profile_json),
        summary: format!(
            "construct: {} knots, secant violations {}, recovery {} on [{r_lo}, {r_hi}], {}, {}: {}",
            n_max,
            secant.violations,
            if recovery_ok { "ok" } else { "out of band" },
            match &fit {
                Some(f) => format!("fitted exponent {:.4}", f.fitted_exponent),
                None => "no fit".into(),
            },
            band_text(config),
            verdict(passed)
        ),
        passed,
    })
}

fn logcusp(config: &ExperimentConfig) -> Result<Report> {
    if config.domain.kind != "log" {
        bail!("logcusp needs a log profile, got '{}'", config.domain.kind);
    }
    let iota = config.domain.parameters["iota"];
    let domain = config.domain.domain().context("building the log cusp")?;
    let mesh = config.mesh.mesh()?;
    let (alpha, i_conv) = resolve_alpha(config, domain.profile())?;
    let params = JacobiParams::new(alpha, config.beta)?;
    let rows = sweep(config, &domain, |n| Ok(extremal_ratio(&domain, &params, n, config.p, &mesh)?))?;
    let entries: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.factor)).collect();
    let model = match config.fit.model()? {
        FitModel::PurePower => FitModel::LogCorrected { iota },
        m => m,
    };
    let corrected = fit_exponent(&entries, model)?;
    let pure = fit_exponent(&entries, FitModel::PurePower)?;
    let mut json = header(config);
    json.insert("alpha".into(), json!(alpha));
    json.insert("i_conv_estimate".into(), json!(i_conv));
    json.insert("pure_power_fit".into(), fit_json(&pure));
    json.insert("log_corrected_residual_smaller".into(), json!(corrected.residual < pure.residual));
    let mut report = sweep_report(config, &rows, Some(&corrected), json);
    report.summary = format!(
        "{} (pure-power exponent {:.4}, residual {:.3e})",
        report.summary, pure.fitted_exponent, pure.residual
    );
    Ok(report)
}
