use std::fs::File;
use std::io;

use cantor_qc::geometry::{generation_disks, hex_params, m_for_epsilon, ConstructionParams, Side, ENUMERATION_CAP};
use cantor_qc::glue::ladder_spec;
use cantor_qc::mass::{lp_mass_closed_form, lp_mass_monte_carlo, Sampling};
use cantor_qc::nonremovable::{build_counterexample, counterexample_spec, verify_counterexample, VerifyConfig};
use cantor_qc::verify::{
    box_dimension, default_scales, generation_growth, growth_exponent, holder_estimate, integral_growth_check,
    packing_condition_check, HolderConfig, PhiMap,
};
use serde::Serialize;
use serde_json::json;

use crate::eval::{stream, EvalOptions};
use crate::output::{emit, num, sink, Failure, Outcome, Table};
use crate::{Command, RunConfig};

/// Upper end of the layout search for `params --epsilon`.
const M_SEARCH: usize = 200_000;

fn construction(cfg: &RunConfig) -> Outcome<ConstructionParams> {
    Ok(hex_params(cfg.t, cfg.k, cfg.m)?)
}

fn samples(cfg: &RunConfig, default: usize) -> Outcome<usize> {
    match cfg.samples {
        Some(0) => Err(Failure::Reject("--samples must be positive".into())),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn side_list(side: &str) -> Outcome<Vec<Side>> {
    match side {
        "both" => Ok(vec![Side::Source, Side::Image]),
        other => Ok(vec![other.parse::<Side>()?]),
    }
}

fn chosen_m(cfg: &RunConfig, epsilon: Option<f64>) -> Outcome<usize> {
    match epsilon {
        None => Ok(cfg.m),
        Some(e) if !(e > 0.0) => Err(Failure::Reject(format!("epsilon = {e} must be positive"))),
        Some(e) => m_for_epsilon(cfg.t, cfg.k, e, M_SEARCH)
            .map(|(m, _)| m)
            .ok_or_else(|| Failure::Reject(format!("no layout with m <= {M_SEARCH} reaches epsilon = {e}"))),
    }
}

#[derive(Serialize)]
struct DryRun<'a> {
    dry_run: bool,
    config: &'a RunConfig,
    #[serde(flatten)]
    command: &'a Command,
    derived: serde_json::Value,
}

fn dry_run(cfg: &RunConfig, cmd: &Command) -> Outcome<()> {
    let derived = match cmd {
        Command::Cauchy { alpha, .. } => {
            let (threshold, epsilon_max, epsilon) = counterexample_spec(*alpha, cfg.k, cfg.t)?;
            let m = m_for_epsilon(cfg.t, cfg.k, epsilon, cantor_qc::nonremovable::M_SEARCH_LIMIT).map(|x| x.0);
            json!({ "threshold": threshold, "epsilon_max": epsilon_max, "epsilon": epsilon, "m": m })
        }
        Command::Glue { pieces } => {
            let spec = ladder_spec(cfg.t, cfg.k, *pieces, cfg.m)?;
            serde_json::to_value(spec.summary())?
        }
        Command::Params { epsilon } => {
            let m = chosen_m(cfg, *epsilon)?;
            serde_json::to_value(hex_params(cfg.t, cfg.k, m)?.record())?
        }
        _ => serde_json::to_value(construction(cfg)?.record())?,
    };
    let doc = DryRun {
        dry_run: true,
        config: cfg,
        command: cmd,
        derived,
    };
    emit(cfg.out.as_deref(), crate::Format::Json, &doc, None)
}

pub fn run(cfg: &RunConfig, cmd: &Command) -> Outcome<()> {
    if cfg.dry_run {
        return dry_run(cfg, cmd);
    }
    match cmd {
        Command::Params { epsilon } => params(cfg, *epsilon),
        Command::Disks { side } => disks(cfg, side),
        Command::Eval {
            input,
            inverse,
            jacobian,
        } => {
            let p = construction(cfg)?;
            let opts = EvalOptions {
                depth: cfg.depth,
                inverse: *inverse,
                jacobian: *jacobian,
            };
            let out = sink(cfg.out.as_deref())?;
            match input {
                Some(path) => stream(&p, &opts, File::open(path)?, out)?,
                None => stream(&p, &opts, io::stdin().lock(), out)?,
            };
            Ok(())
        }
        Command::LpMass {
            p,
            generations,
            mc,
            sampling,
        } => lp_mass(cfg, *p, *generations, *mc, sampling),
        Command::Dimension { side, per_generation } => dimension(cfg, side, *per_generation),
        Command::Holder { exponent } => holder(cfg, *exponent),
        Command::Packing { exponents } => packing(cfg, exponents),
        Command::Growth { trials, cap } => growth(cfg, *trials, *cap),
        Command::Cauchy { alpha, atoms } => cauchy(cfg, *alpha, *atoms),
        Command::Glue { pieces } => glue(cfg, *pieces),
    }
}

fn params(cfg: &RunConfig, epsilon: Option<f64>) -> Outcome<()> {
    let m = chosen_m(cfg, epsilon)?;
    let p = hex_params(cfg.t, cfg.k, m)?;
    let rec = p.record();
    let doc = json!({
        "params": rec,
        "image_ratio": p.ratio(Side::Image),
        "gap": p.t_prime() - p.dim_image(),
        "epsilon": epsilon,
        "identity_residuals": p.identity_residuals(),
    });
    let mut table = Table::new(vec!["key", "value"]);
    for (k, v) in [
        ("m", m as f64),
        ("r", rec.r),
        ("c_m", rec.c_m),
        ("t", rec.t),
        ("K", rec.k),
        ("sigma", rec.sigma),
        ("t_prime", rec.t_prime),
        ("dim_image", rec.dim_image),
        ("holder_exp", rec.holder_exp),
    ] {
        table.push(vec![k.to_string(), num(v)]);
    }
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn disks(cfg: &RunConfig, side: &str) -> Outcome<()> {
    let p = construction(cfg)?;
    let side: Side = side.parse()?;
    let disks = generation_disks(cfg.n, side, &p, ENUMERATION_CAP)?;
    let mut table = Table::new(vec!["re", "im", "radius", "chain"]);
    let mut list = Vec::with_capacity(disks.len());
    for (j, d) in &disks {
        let chain = j.digits().iter().map(u32::to_string).collect::<Vec<_>>().join(".");
        table.push(vec![num(d.center.re), num(d.center.im), num(d.radius), chain]);
        list.push(json!({ "chain": j.digits(), "center": d.center, "radius": d.radius }));
    }
    let doc = json!({ "side": side, "generation": cfg.n, "count": disks.len(), "disks": list });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn lp_mass(cfg: &RunConfig, p: f64, generations: usize, mc: bool, sampling: &str) -> Outcome<()> {
    let params = construction(cfg)?;
    let sampling: Sampling = sampling.parse()?;
    let report = lp_mass_closed_form(p, &params, generations)?;
    let estimate = if mc {
        let truncated = report.partial_sums[(cfg.depth as usize).min(report.partial_sums.len() - 1)];
        let est = lp_mass_monte_carlo(p, &params, samples(cfg, 1_000_000)?, cfg.depth, cfg.seed, sampling)?;
        Some(json!({ "monte_carlo": est, "closed_form_truncated": truncated }))
    } else {
        None
    };
    let mut table = Table::new(vec!["generation", "flat", "annulus", "partial_sum"]);
    for g in 0..report.flat_terms.len() {
        table.push(vec![
            g.to_string(),
            num(report.flat_terms[g]),
            num(report.annulus_terms[g]),
            num(report.partial_sums[g + 1]),
        ]);
    }
    let doc = json!({ "closed_form": report, "check": estimate });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn dimension(cfg: &RunConfig, side: &str, per_generation: usize) -> Outcome<()> {
    let p = construction(cfg)?;
    let mut estimates = Vec::new();
    let mut table = Table::new(vec!["side", "scale", "count"]);
    for s in side_list(side)? {
        let scales = default_scales(s, &p, cfg.n, per_generation);
        let est = box_dimension(s, &p, cfg.n, Some(&scales))?;
        let label = if s == Side::Source { "source" } else { "image" };
        for (scale, count) in est.scales.iter().zip(&est.counts) {
            table.push(vec![label.to_string(), num(*scale), count.to_string()]);
        }
        let expected = if s == Side::Source { p.t() } else { p.dim_image() };
        estimates.push(json!({ "estimate": est, "expected": expected, "error": est.slope - expected }));
    }
    let doc = json!({ "m": p.m(), "generation": cfg.n, "estimates": estimates });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn holder(cfg: &RunConfig, exponent: Option<f64>) -> Outcome<()> {
    let p = construction(cfg)?;
    let target = exponent.unwrap_or(p.holder_exp());
    let pairs = samples(cfg, 20_000)?;
    let config = HolderConfig {
        uniform_pairs: pairs / 2,
        stratified_pairs: pairs - pairs / 2,
        construction: Some(&p),
        ..HolderConfig::default()
    };
    let map = PhiMap {
        params: &p,
        depth_max: cfg.depth,
    };
    let report = holder_estimate(&map, target, &config, cfg.seed);
    let mut table = Table::new(vec!["separation", "ratio", "family"]);
    for row in &report.rows {
        table.push(vec![
            num(row.separation),
            num(row.ratio),
            serde_json::to_value(row.family)?.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let doc = json!({
        "report": report,
        "t_over_t_prime": p.holder_exp(),
        "sibling_exponent": p.t() / p.dim_image(),
        "one_over_K": 1.0 / p.k(),
    });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn packing(cfg: &RunConfig, exponents: &[f64]) -> Outcome<()> {
    let p = construction(cfg)?;
    let exponents = if exponents.is_empty() {
        vec![p.t(), growth_exponent(&p)]
    } else {
        exponents.to_vec()
    };
    let report = packing_condition_check(&p, cfg.n, &exponents, samples(cfg, 2000)?, cfg.seed)?;
    let mut table = Table::new(vec!["diameter", "center_re", "center_im", "count"]);
    for row in &report.rows {
        table.push(vec![
            num(row.diameter),
            num(row.center.re),
            num(row.center.im),
            row.count.to_string(),
        ]);
    }
    emit(cfg.out.as_deref(), cfg.format(), &report, Some(table))
}

fn growth(cfg: &RunConfig, trials: usize, cap: f64) -> Outcome<()> {
    let p = construction(cfg)?;
    let report = integral_growth_check(&p, trials, cfg.seed, cfg.depth.min(12), samples(cfg, 20_000)?, cap)?;
    let generations: Vec<_> = (1..=cfg.n).map(|n| generation_growth(&p, n)).collect();
    let mut table = Table::new(vec!["diameter", "normalized", "std_error", "flagged"]);
    for row in &report.rows {
        table.push(vec![
            num(row.diameter),
            num(row.normalized),
            num(row.std_error),
            row.flagged.to_string(),
        ]);
    }
    let doc = json!({ "random_disks": report, "generation_disks": generations });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn cauchy(cfg: &RunConfig, alpha: f64, atoms: bool) -> Outcome<()> {
    let cx = build_counterexample(alpha, cfg.k, cfg.t, cfg.n, cfg.depth)?;
    let config = VerifyConfig {
        pairs: samples(cfg, 10_000)?,
        ..VerifyConfig::default()
    };
    let report = verify_counterexample(&cx, &config, cfg.seed);
    let mut table = Table::new(vec!["re", "im", "weight"]);
    for a in cx.measure.atoms() {
        table.push(vec![num(a.position.re), num(a.position.im), num(cx.measure.weight(a))]);
    }
    let doc = json!({
        "spec": cx.spec,
        "report": report,
        "growth": cx.measure.growth(),
        "atoms": atoms.then(|| cx.measure.atoms()),
    });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}

fn glue(cfg: &RunConfig, pieces: usize) -> Outcome<()> {
    let spec = ladder_spec(cfg.t, cfg.k, pieces, cfg.m)?;
    let summary = spec.summary();
    let mut table = Table::new(vec!["center_re", "center_im", "radius", "m", "dim_image", "epsilon", "holder_factor"]);
    for s in &summary {
        table.push(vec![
            num(s.center.re),
            num(s.center.im),
            num(s.radius),
            s.m.to_string(),
            num(s.dim_image),
            num(s.epsilon),
            num(s.holder_factor),
        ]);
    }
    let doc = json!({ "t": cfg.t, "K": cfg.k, "pieces": summary });
    emit(cfg.out.as_deref(), cfg.format(), &doc, Some(table))
}
