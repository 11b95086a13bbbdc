use std::f64::consts::TAU;

use anyhow::{bail, Context, Result};
use entrain_core::bounds::{
    averaged_transient, compare, fit_loglog_slope, lowpass_sweep, BoundOptions, BoundReport,
    SweepRow,
};
use entrain_core::models::{certify, CertifyOptions, ContractionCertificate, DynSystem};
use entrain_core::norms::{NormKind, NormSpec};
use entrain_core::registry::{ApproximantRegistry, ModelRegistry, ParamValues};
use entrain_core::sim::{self, OrbitOptions, PeriodicOrbit, StepOptions};
use serde_json::{json, Value};

use crate::args::{
    BoundArgs, CertifyArgs, Figure, FigureArgs, MeasureArgs, ModelArgs, NumericArgs, OrbitArgs,
    SweepArgs,
};
use crate::lti_file;
use crate::report::{csv_row, emit, write_file, BoundViolation, Meta, UsageError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn parse_overrides(raw: &[String]) -> Result<ParamValues> {
    let mut values = ParamValues::new();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| UsageError(format!("parameter '{item}' is not key=value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("parameter {key}: '{value}' is not a number")))?;
        if values.insert(key.trim().to_owned(), v).is_some() {
            return Err(UsageError(format!("parameter {key} given twice")).into());
        }
    }
    Ok(values)
}

fn build_model(args: &ModelArgs) -> Result<Box<dyn DynSystem>> {
    let overrides = parse_overrides(&args.params)?;
    if let Some(path) = &args.lti {
        if !overrides.is_empty() {
            bail!(UsageError("parameters cannot be combined with --lti".into()));
        }
        return Ok(Box::new(lti_file::load(path)?));
    }
    let name = args
        .model
        .as_deref()
        .ok_or_else(|| UsageError("--model or --lti is required".into()))?;
    Ok(ModelRegistry::with_builtin().build(name, &overrides)?)
}

fn certify_opts(n: &NumericArgs) -> CertifyOptions {
    CertifyOptions {
        grid_per_axis: n.grid,
        time_samples: n.time_samples,
        norm: None,
    }
}

fn orbit_opts(n: &NumericArgs) -> OrbitOptions {
    OrbitOptions {
        tol: n.tol,
        steps_per_period: n.steps,
        ..OrbitOptions::default()
    }
}

fn bound_opts(n: &NumericArgs, slack: f64) -> BoundOptions {
    BoundOptions {
        orbit: orbit_opts(n),
        validity_slack: slack,
        ..BoundOptions::default()
    }
}

fn model_meta(sys: &dyn DynSystem) -> Meta {
    Meta::default()
        .text("model", sys.name())
        .params(&sys.params())
}

fn cert_meta(meta: Meta, cert: &ContractionCertificate) -> Meta {
    meta.number("eta", cert.eta)
        .text("norm", cert.norm.to_string())
        .text("certificate", cert.describe())
}

pub fn models() -> Result<()> {
    let registry = ModelRegistry::with_builtin();
    let mut out = String::new();
    for name in registry.names() {
        let factory = registry.get(name)?;
        out.push_str(&format!("{name}: {}\n", factory.summary()));
        for p in factory.params() {
            let flag = format!("--{} {}", p.name, entrain_core::output::format_number(p.default));
            out.push_str(&format!("    {flag:<28} {}\n", p.help));
        }
    }
    out.push_str("\napproximants:\n");
    let approximants = ApproximantRegistry::with_builtin();
    for name in approximants.names() {
        out.push_str(&format!("    {name}: {}\n", approximants.get(name)?.summary()));
    }
    print!("{out}");
    Ok(())
}

pub fn measure(args: &MeasureArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.matrix)
        .with_context(|| format!("cannot read matrix file {}", args.matrix.display()))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a JSON array of rows", args.matrix.display()))?;
    let a = entrain_core::linalg::Matrix::from_rows(&rows)?;
    let mut results = Vec::new();
    for name in &args.norm {
        let kind = NormKind::parse(name)?;
        let spec = if args.scale.is_empty() {
            NormSpec::new(kind)
        } else {
            NormSpec::diagonal(kind, args.scale.clone())?
        };
        results.push((spec.to_string(), spec.measure(&a)?.value()));
    }
    let text = match args.out.format {
        crate::args::Format::Csv if results.len() == 1 => {
            format!("{}\n", entrain_core::output::format_number(results[0].1))
        }
        crate::args::Format::Csv => results
            .iter()
            .map(|(n, v)| format!("{n},{}\n", entrain_core::output::format_number(*v)))
            .collect(),
        crate::args::Format::Json => {
            let map: serde_json::Map<String, Value> =
                results.iter().map(|(n, v)| (n.clone(), json!(v))).collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&crate::report::round_floats(Value::Object(map)))?
            )
        }
    };
    match &args.out.output {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn certify_cmd(args: &CertifyArgs) -> Result<()> {
    let sys = build_model(&args.model)?;
    let cert = certify(sys.as_ref(), &certify_opts(&args.numeric))?;
    let meta = cert_meta(model_meta(sys.as_ref()), &cert)
        .count("N", args.numeric.steps)
        .text("version", VERSION);
    emit(
        &args.out,
        meta,
        || format!("eta,{}\n", entrain_core::output::format_number(cert.eta)),
        || json!({ "certificate_detail": cert }),
    )
}

fn orbit_start(sys: &dyn DynSystem) -> Vec<f64> {
    let bx = sys.state_box();
    match sys.averaging_point() {
        Some(z) => bx.clamp(&z),
        None => (0..sys.dim())
            .map(|i| 0.5 * (bx.lower()[i] + bx.upper()[i]))
            .collect(),
    }
}

pub fn orbit(args: &OrbitArgs) -> Result<()> {
    let sys = build_model(&args.model)?;
    let opts = orbit_opts(&args.numeric);
    let start = orbit_start(sys.as_ref());
    let mut meta = model_meta(sys.as_ref());
    let orbit: PeriodicOrbit = match sys.certification_refusal() {
        Some(reason) => {
            let label = if sys.name() == "rfm" {
                "uncertified (n>2)".to_owned()
            } else {
                "uncertified".to_owned()
            };
            eprintln!("warning: {reason}; iterating the period map without a certificate");
            let norm = sys.certificate_norm();
            meta = meta.text("norm", norm.to_string()).text("certificate", label);
            sim::periodic_orbit_uncertified(sys.as_ref(), &norm, &start, &opts, args.max_periods)?
        }
        None => {
            let cert = certify(sys.as_ref(), &certify_opts(&args.numeric))?;
            meta = cert_meta(meta, &cert);
            sim::periodic_orbit(sys.as_ref(), &cert, &start, &opts)?
        }
    };
    let meta = meta
        .count("N", orbit.grid_len())
        .number("closure_defect", orbit.closure_defect())
        .count("iterations", orbit.iterations())
        .text("version", VERSION);
    let n = orbit.dim();
    emit(
        &args.out,
        meta,
        || {
            let mut header: Vec<String> = vec!["t".into()];
            header.extend((1..=n).map(|i| format!("x{i}")));
            let mut out = format!("{}\n", header.join(","));
            for k in 0..orbit.grid_len() {
                let mut row = vec![orbit.time(k)];
                row.extend_from_slice(orbit.sample(k));
                out.push_str(&csv_row(&row));
            }
            out
        },
        || {
            json!({
                "t": (0..orbit.grid_len()).map(|k| orbit.time(k)).collect::<Vec<_>>(),
                "states": orbit.samples(),
            })
        },
    )
}

fn report_meta(r: &BoundReport) -> Meta {
    let mut meta = Meta::default()
        .text("model", r.model.clone())
        .params(&r.params.iter().map(|p| (p.name.clone(), p.value)).collect::<Vec<_>>())
        .text("approximant", r.approximant.clone())
        .number("eta", r.eta)
        .text("norm", r.norm.to_string())
        .text("certificate", r.certificate.clone())
        .count("N", r.grid)
        .number("c_period", r.c_period)
        .number("constant_bound", r.constant_bound);
    if let Some(b) = &r.box_bound {
        meta = meta
            .number("box_bound", b.value)
            .text("box_exact", b.exact.to_string());
    }
    meta.number("max_measured", r.max_measured)
        .number("max_ratio", r.max_ratio)
        .text("valid", r.valid.to_string())
        .text("version", VERSION)
}

fn run_bound(
    sys: &dyn DynSystem,
    approx_name: &str,
    numeric: &NumericArgs,
    slack: f64,
) -> Result<BoundReport> {
    let approximants = ApproximantRegistry::with_builtin();
    let approximant = approximants.get(approx_name)?;
    let cert = certify(sys, &certify_opts(numeric))?;
    let approx = approximant.build(sys)?;
    Ok(compare(sys, &approx, &cert, &bound_opts(numeric, slack))?)
}

fn check_valid(r: &BoundReport) -> Result<()> {
    if r.valid {
        Ok(())
    } else {
        Err(BoundViolation(format!(
            "{} / {}: max measured/bound ratio {}",
            r.model, r.approximant, r.max_ratio
        ))
        .into())
    }
}

pub fn bound(args: &BoundArgs) -> Result<()> {
    if !(args.slack >= 0.0) {
        bail!(UsageError(format!("--slack must be nonnegative, got {}", args.slack)));
    }
    let sys = build_model(&args.model)?;
    let report = run_bound(sys.as_ref(), &args.approx, &args.numeric, args.slack)?;
    eprintln!(
        "constant_bound={} max_measured={} valid={}",
        entrain_core::output::format_number(report.constant_bound),
        entrain_core::output::format_number(report.max_measured),
        report.valid
    );
    emit(
        &args.out,
        report_meta(&report),
        || report.to_csv(),
        || json!({ "report": &report }),
    )?;
    check_valid(&report)
}

/// `lo:hi:log:k` or `lo:hi:lin:k`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || UsageError(format!("frequency grid '{spec}' is not lo:hi:log|lin:k"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, mode, k] = parts[..] else {
        return Err(bad().into());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let k: usize = k.parse().map_err(|_| bad())?;
    if k == 0 || !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(UsageError(format!("frequency grid '{spec}' needs 0 < lo <= hi and k >= 1")).into());
    }
    let frac = |i: usize| if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
    match mode {
        "log" => Ok((0..k).map(|i| lo * (hi / lo).powf(frac(i))).collect()),
        "lin" => Ok((0..k).map(|i| lo + (hi - lo) * frac(i)).collect()),
        _ => Err(bad().into()),
    }
}

/// Rows of a sweep for a catalog model: its frequency parameter when it
/// has one, otherwise the period `2 pi / omega`.
fn sweep_rows(
    name: &str,
    overrides: &ParamValues,
    omegas: &[f64],
    approx_name: &str,
    opts: &BoundOptions,
) -> Result<Vec<SweepRow>> {
    let registry = ModelRegistry::with_builtin();
    let factory = registry.get(name)?;
    let (key, as_period) = match factory.frequency_param() {
        Some(k) => (k, false),
        None if factory.params().iter().any(|p| p.name == "period") => ("period", true),
        None => bail!(UsageError(format!("model {name} has no frequency or period parameter"))),
    };
    if overrides.contains_key(key) {
        bail!(UsageError(format!("{key} is set by the sweep and cannot be overridden")));
    }
    // validate the remaining overrides once, before fanning out
    registry.resolve(name, overrides)?;
    let approximants = ApproximantRegistry::with_builtin();
    let approximant = approximants.get(approx_name)?;
    let build = |omega: f64| -> entrain_core::Result<Box<dyn DynSystem>> {
        let mut values = overrides.clone();
        values.insert(key.into(), if as_period { TAU / omega } else { omega });
        registry.build(name, &values)
    };
    Ok(lowpass_sweep(&build, omegas, approximant, opts))
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("omega,measured_max,bound_max\n");
    for r in rows {
        out.push_str(&csv_row(&[r.omega, r.measured_max, r.bound_max]));
    }
    out
}

fn sweep_summary(rows: &[SweepRow]) -> (usize, Option<f64>) {
    for r in rows {
        if let Some(e) = &r.error {
            eprintln!(
                "warning: omega = {}: {e}",
                entrain_core::output::format_number(r.omega)
            );
        }
    }
    let ok = rows.iter().filter(|r| r.error.is_none()).count();
    let omegas: Vec<f64> = rows.iter().map(|r| r.omega).collect();
    let measured: Vec<f64> = rows.iter().map(|r| r.measured_max).collect();
    (ok, fit_loglog_slope(&omegas, &measured))
}

fn sweep_meta(name: &str, overrides: &ParamValues, approx: &str, ok: usize, total: usize, slope: Option<f64>, steps: usize) -> Meta {
    let params: Vec<(String, f64)> = overrides.iter().map(|(k, v)| (k.clone(), *v)).collect();
    Meta::default()
        .text("model", name)
        .params(&params)
        .text("approximant", approx)
        .count("N", steps)
        .count("succeeded", ok)
        .count("rows", total)
        .number("slope", slope.unwrap_or(f64::NAN))
        .text("version", VERSION)
}

fn require_success(ok: usize, total: usize) -> Result<()> {
    if 10 * ok >= 9 * total {
        Ok(())
    } else {
        Err(entrain_core::Error::Unsupported(format!(
            "only {ok} of {total} frequencies succeeded"
        ))
        .into())
    }
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    if args.model.lti.is_some() {
        bail!(UsageError("sweep needs a catalog model".into()));
    }
    let name = args.model.model.as_deref().unwrap_or_default();
    let overrides = parse_overrides(&args.model.params)?;
    let omegas = parse_grid(&args.omega)?;
    let opts = bound_opts(&args.numeric, entrain_core::bounds::DEFAULT_VALIDITY_SLACK);
    let rows = sweep_rows(name, &overrides, &omegas, &args.approx, &opts)?;
    let (ok, slope) = sweep_summary(&rows);
    match slope {
        Some(s) => eprintln!("log-log slope over the top decade: {}", entrain_core::output::format_number(s)),
        None => eprintln!("log-log slope over the top decade: unavailable"),
    }
    let meta = sweep_meta(name, &overrides, &args.approx, ok, rows.len(), slope, args.numeric.steps);
    emit(&args.out, meta, || sweep_csv(&rows), || json!({ "rows": &rows }))?;
    require_success(ok, rows.len())
}

fn reference_rfm2() -> Result<Box<dyn DynSystem>> {
    Ok(ModelRegistry::with_builtin().build("rfm2", &ParamValues::new())?)
}

fn figure_file(args: &FigureArgs, name: &str, meta: Meta, body: String) -> Result<()> {
    std::fs::create_dir_all(&args.dir)
        .with_context(|| format!("cannot create {}", args.dir.display()))?;
    let path = args.dir.join(name);
    write_file(&path, &format!("{}{body}", meta.line()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn figure(args: &FigureArgs) -> Result<()> {
    let numeric = NumericArgs {
        steps: entrain_core::sim::DEFAULT_STEPS_PER_PERIOD,
        tol: entrain_core::sim::DEFAULT_ORBIT_TOL,
        grid: entrain_core::models::DEFAULT_GRID_PER_AXIS,
        time_samples: entrain_core::models::DEFAULT_TIME_SAMPLES,
    };
    let slack = entrain_core::bounds::DEFAULT_VALIDITY_SLACK;
    match args.which {
        Figure::Fig2 => {
            let sys = reference_rfm2()?;
            let cert = certify(sys.as_ref(), &certify_opts(&numeric))?;
            let z = sys
                .averaging_point()
                .context("the two-site model has a closed-form equilibrium")?;
            let t_end = 6.0;
            let tr = averaged_transient(sys.as_ref(), &z, &cert, t_end, &StepOptions::default())?;
            let mut body = String::from("t,error,bound\n");
            for k in 0..tr.times.len() {
                body.push_str(&csv_row(&[tr.times[k], tr.measured[k], tr.bound[k]]));
            }
            let meta = cert_meta(model_meta(sys.as_ref()), &cert)
                .text("start", "equilibrium of the averaged system")
                .number("t_end", t_end)
                .text("version", VERSION);
            figure_file(args, "fig2.csv", meta, body)
        }
        Figure::Fig3 | Figure::Fig5 => {
            let sys = reference_rfm2()?;
            let (approx, file) = if args.which == Figure::Fig3 {
                ("averaged", "fig3.csv")
            } else {
                ("linearized", "fig5.csv")
            };
            let report = run_bound(sys.as_ref(), approx, &numeric, slack)?;
            figure_file(args, file, report_meta(&report), report.to_csv())?;
            check_valid(&report)
        }
        Figure::Fig6 => {
            let mut overrides = ParamValues::new();
            overrides.insert("a".into(), 1.0);
            let omegas = parse_grid("0.01:100:log:50")?;
            let rows = sweep_rows("ex52", &overrides, &omegas, "linearized", &bound_opts(&numeric, slack))?;
            let (ok, slope) = sweep_summary(&rows);
            let meta = sweep_meta("ex52", &overrides, "linearized", ok, rows.len(), slope, numeric.steps);
            figure_file(args, "fig6.csv", meta, sweep_csv(&rows))?;
            require_success(ok, rows.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_grids() {
        assert_eq!(parse_grid("1:5:log:2").unwrap(), vec![1.0, 5.0]);
        let g = parse_grid("0.01:100:log:5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert_eq!(parse_grid("1:3:lin:3").unwrap(), vec![1.0, 2.0, 3.0]);
        for bad in ["1:5:log", "0:5:log:3", "5:1:lin:2", "1:5:cubic:2", "1:5:log:0"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn overrides_parse() {
        let v = parse_overrides(&["lam0=4".into(), "amp = 0.5".into()]).unwrap();
        assert_eq!(v["lam0"], 4.0);
        assert_eq!(v["amp"], 0.5);
        assert!(parse_overrides(&["lam0".into()]).is_err());
        assert!(parse_overrides(&["lam0=x".into()]).is_err());
        assert!(parse_overrides(&["a=1".into(), "a=2".into()]).is_err());
    }
}
