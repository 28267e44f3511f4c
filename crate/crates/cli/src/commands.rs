//! Subcommand implementations.

use crate::args::{read_values, ConvertArgs, CurveArgs, Method, Schedule, ValidateArgs, VarianceArgs};
use crate::format::{num, opt, write_csv};
use anyhow::{bail, Result};
use fsrdp::validation::{all_checks, ValidationOptions};
use fsrdp::*;
use std::io::Write;

/// A composed curve with the settings that produced it.
struct Evaluated {
    method: Method,
    order: Option<usize>,
    curve: RdpCurveF64,
}

struct Setup {
    spec: SubsamplingSpec,
    schedule: Schedule,
    alphas: Vec<f64>,
    methods: Vec<Method>,
}

fn setup(args: &CurveArgs) -> Result<Setup> {
    Ok(Setup {
        spec: SubsamplingSpec::new(args.batch, args.dataset)?,
        schedule: args.schedule()?,
        alphas: args.alphas()?,
        methods: args.methods()?,
    })
}

fn evaluate(args: &CurveArgs, s: &Setup) -> Result<Vec<Evaluated>> {
    let q: f64 = s.spec.q();
    let sigmas = &s.schedule.sigmas;
    s.methods
        .iter()
        .map(|&method| {
            let order = method.default_order().map(|d| args.m.unwrap_or(d));
            let config = |adj| AccountantConfigF64::new(s.spec, sigmas.clone(), order.unwrap_or(3), adj, s.alphas.clone());
            let curve = match method {
                Method::FsworAr => compose(&config(Adjacency::AddRemove)?)?,
                Method::FsworRo => compose(&config(Adjacency::ReplaceOne)?)?,
                Method::FswrUpper => compose_fswr(&config(Adjacency::AddRemove)?)?,
                Method::PoissonRo => compose_poisson(&s.alphas, sigmas, q, order.unwrap_or(4))?,
                Method::WangUpper => compose_wang_upper(&s.alphas, sigmas, q)?,
                Method::FswrLower => compose_fswr_lower(&s.alphas, sigmas, s.spec.batch, s.spec.dataset)?,
                Method::WangLower => compose_wang_lower(&s.alphas, sigmas, q)?,
            };
            Ok(Evaluated { method, order, curve })
        })
        .collect()
}

pub fn curve(args: &CurveArgs) -> Result<()> {
    let s = setup(args)?;
    let mut curves = evaluate(args, &s)?;
    curves.sort_by_key(|e| e.method.name());
    let header = ["method", "alpha", "epsilon", "m", "sigma", "q", "B", "D", "steps"].map(String::from);
    let mut rows = Vec::new();
    for e in &curves {
        for p in &e.curve.points {
            rows.push(vec![
                e.method.name().to_string(),
                num(p.alpha),
                num(p.epsilon),
                e.order.map(|m| m.to_string()).unwrap_or_default(),
                opt(s.schedule.constant),
                num(s.spec.q()),
                s.spec.batch.to_string(),
                s.spec.dataset.to_string(),
                s.schedule.sigmas.len().to_string(),
            ]);
        }
    }
    write_csv(args.out.as_deref(), &header, &rows)
}

pub fn convert(args: &ConvertArgs) -> Result<()> {
    let s = setup(&args.curve)?;
    if let Some(m) = s.methods.iter().find(|m| m.is_lower_bound()) {
        bail!("{} is a lower bound and does not yield an (epsilon, delta) guarantee", m.name());
    }
    let deltas = args.deltas()?;
    let variant = ConversionVariant::from(args.variant);
    let mut curves = evaluate(&args.curve, &s)?;
    curves.sort_by_key(|e| e.method.name());
    let header = ["method", "delta", "epsilon", "alpha_star", "variant"].map(String::from);
    let mut rows = Vec::new();
    for e in &curves {
        for &delta in &deltas {
            let g = rdp_to_dp(&e.curve, delta, variant)?;
            rows.push(vec![
                e.method.name().to_string(),
                num(delta),
                num(g.epsilon),
                opt(g.alpha_star),
                variant.name().to_string(),
            ]);
        }
    }
    write_csv(args.curve.out.as_deref(), &header, &rows)
}

pub fn compare(args: &CurveArgs) -> Result<()> {
    let s = setup(args)?;
    let curves = evaluate(args, &s)?;
    let mut header = vec!["alpha".to_string()];
    header.extend(curves.iter().map(|e| e.method.name().to_string()));
    let first = &curves[0];
    header.extend(
        curves[1..]
            .iter()
            .map(|e| format!("{}/{}", e.method.name(), first.method.name())),
    );
    let rows = s
        .alphas
        .iter()
        .map(|&alpha| {
            let values: Vec<Option<f64>> = curves.iter().map(|e| e.curve.epsilon_at(alpha)).collect();
            let mut row = vec![num(alpha)];
            row.extend(values.iter().map(|v| opt(*v)));
            row.extend(values[1..].iter().map(|v| match (*v, values[0]) {
                (Some(x), Some(base)) if base != 0.0 && base.is_finite() => num(x / base),
                _ => String::new(),
            }));
            row
        })
        .collect::<Vec<_>>();
    write_csv(args.out.as_deref(), &header, &rows)
}

pub fn variance(args: &VarianceArgs) -> Result<()> {
    let pop = PopulationF64::new(read_values(&args.population)?)?;
    let b = args.batch;
    let vp = var_poisson(&pop, b)?;
    let vb = var_fswor(&pop, b)?;
    let vr = var_fswr(&pop, b)?;
    let ratios = variance_ratios(&pop, b).ok();
    let header = [
        "D",
        "B",
        "var_poisson",
        "var_fswor",
        "var_fswr",
        "fswor_over_poisson",
        "fswr_over_fswor",
    ]
    .map(String::from);
    let row = vec![
        pop.len().to_string(),
        b.to_string(),
        num(vp),
        num(vb),
        num(vr),
        opt(ratios.as_ref().map(|r| r.fswor_over_poisson)),
        opt(ratios.as_ref().map(|r| r.fswr_over_fswor)),
    ];
    write_csv(args.out.as_deref(), &header, &[row])
}

/// Returns whether every check passed.
pub fn validate(args: &ValidateArgs) -> Result<bool> {
    if args.samples < 10_000 {
        bail!("at least 10000 Monte-Carlo samples are required, got {}", args.samples);
    }
    let checks = all_checks(ValidationOptions {
        mc_samples: args.samples,
        seed: args.seed,
    });
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{c}\n"));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    text.push_str(&format!("{} passed, {failed} failed\n", checks.len() - failed));
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(failed == 0)
}
