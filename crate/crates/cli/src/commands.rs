use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use shaping4d::air::{air_sweep, GmiCurve, NORMALIZED_ES};
use shaping4d::formats::{builtin, fit_prs_params, prs_from_params, PrsParams};
use shaping4d::io::{read_constellation, to_json};
use shaping4d::link::{
    air_vs_distance, interpolate_gmi, nli_moments, optimal_launch_power, power_sweep, reach_at_threshold, LinkSpec,
};
use shaping4d::optimize::{joint_optimize, prs_optimize, prs_param_sweep, OptimizerConfig, SymmetryMode};
use shaping4d::{Constellation, Error, Polarization};

use crate::{Cli, CliError, Command, Estimator, LinkCommon, LinkMode, OptimizeArgs, OutputFormat, PrsMode, Symmetry};

const AIR_SAMPLES: usize = 1_000_000;
const PRS_SAMPLES: usize = 100_000;
const LINK_SAMPLES: usize = 200_000;
/// Every generator pair once per round.
const ORTHANT_POA_ITERS: usize = 6;
/// SNR grid step of the AWGN curve behind `link distance`.
const LINK_CURVE_STEP_DB: f64 = 0.25;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = match &cli.command {
        Command::Analyze { constellation } => analyze(cli, constellation)?,
        Command::Air {
            constellation,
            snr,
            estimator,
        } => air(cli, constellation, &snr.values(), *estimator)?,
        Command::Prs { mode } => prs(cli, mode)?,
        Command::Optimize(args) => optimize(cli, args)?,
        Command::Link { mode } => link(cli, mode)?,
    };
    emit(cli.out.as_deref(), &out)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Built-in name, or a constellation file when the argument looks like a path.
fn resolve(name: &str) -> Result<(Constellation, Map<String, Value>), CliError> {
    if name.ends_with(".json") || name.contains('/') || Path::new(name).is_file() {
        read_constellation(name).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{name}: {io}"))).into(),
            other => other.into(),
        })
    } else {
        Ok((builtin(name)?, Map::new()))
    }
}

/// Rows of numbers rendered as CSV (default) or a JSON array of objects.
struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn render(&self, format: Option<OutputFormat>) -> Result<String, CliError> {
        if format == Some(OutputFormat::Json) {
            let rows: Vec<Value> = self
                .rows
                .iter()
                .map(|r| Value::Object(self.headers.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                .collect();
            return Ok(serde_json::to_string_pretty(&rows).map_err(Error::from)? + "\n");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Library(Error::Io(e.into()));
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Library(Error::Io(e.into_error())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON number, or null for NaN and infinities.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn analyze(cli: &Cli, name: &str) -> Result<String, CliError> {
    let (c, metadata) = resolve(name)?;
    let es = c.mean_energy();
    let normalized = c.normalize(NORMALIZED_ES)?;
    let spectrum = normalized.distance_spectrum();
    let spectrum_rows: Vec<[f64; 3]> = spectrum
        .entries
        .iter()
        .map(|e| [e.d2, e.count as f64, e.hd1_count as f64])
        .collect();

    if cli.format == Some(OutputFormat::Csv) {
        let mut t = Table::new(&["d2", "count", "hd1_count"]);
        for e in &spectrum.entries {
            t.push(vec![num(e.d2), json!(e.count), json!(e.hd1_count)]);
        }
        return t.render(cli.format);
    }

    let energies: Vec<f64> = c.points().iter().map(|p| p.iter().map(|v| v * v).sum()).collect();
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let e_max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e_var = energies.iter().map(|e| (e - es).powi(2)).sum::<f64>() / energies.len() as f64;
    let moments = c.moments()?;
    let four_d = nli_moments(&c, shaping4d::link::MomentSource::FourDEnergy)?;
    let projection = |pol| {
        let pts = c.project_2d(pol);
        json!({
            "distinct_points": pts.len(),
            "points": pts.iter().map(|(q, n)| json!({"x": q[0], "y": q[1], "multiplicity": n})).collect::<Vec<_>>(),
        })
    };
    let msed = spectrum.msed().expect("at least two points");

    let mut report = Map::new();
    report.insert("points".into(), json!(c.len()));
    report.insert("bits_per_symbol".into(), json!(c.bits_per_symbol()));
    report.insert(
        "energy".into(),
        json!({"mean": es, "min": e_min, "max": e_max, "std": e_var.sqrt()}),
    );
    report.insert("constant_modulus".into(), json!(c.is_constant_modulus(1e-9 * es)));
    report.insert("mu4".into(), num(moments.mu4));
    report.insert("mu6".into(), num(moments.mu6));
    report.insert("mu4_4d".into(), num(four_d.mu4));
    report.insert("mu6_4d".into(), num(four_d.mu6));
    report.insert("spectrum_es".into(), json!(NORMALIZED_ES));
    report.insert("msed".into(), num(msed.d2));
    report.insert("msed_pairs".into(), json!(msed.count));
    report.insert("gray".into(), json!(c.gray_check()));
    report.insert(
        "spectrum".into(),
        json!(spectrum_rows
            .iter()
            .map(|r| json!({"d2": r[0], "count": r[1] as usize, "hd1_count": r[2] as usize}))
            .collect::<Vec<_>>()),
    );
    report.insert(
        "projections".into(),
        json!({"x": projection(Polarization::X), "y": projection(Polarization::Y)}),
    );
    if let Some(p) = ring_switching_params(&c) {
        report.insert("prs_params".into(), json!({"r": p.r, "theta_deg": p.theta_deg, "es": p.es}));
    }
    if !metadata.is_empty() {
        report.insert("metadata".into(), Value::Object(metadata));
    }
    Ok(serde_json::to_string_pretty(&Value::Object(report)).map_err(Error::from)? + "\n")
}

/// Ring-switching parameters, if rebuilding from them reproduces `c`.
fn ring_switching_params(c: &Constellation) -> Option<PrsParams<f64>> {
    if c.len() != 64 {
        return None;
    }
    let p = fit_prs_params(c).ok()?;
    let rebuilt = prs_from_params(&p).ok()?;
    let tol = 1e-9 * c.mean_energy().sqrt();
    let same = c.points().iter().zip(c.labels()).all(|(q, &l)| {
        rebuilt
            .index_of_label(l)
            .is_some_and(|k| rebuilt.points()[k].iter().zip(q).all(|(a, b)| (a - b).abs() <= tol))
    });
    same.then_some(p)
}

fn air(cli: &Cli, name: &str, snrs: &[f64], estimator: Estimator) -> Result<String, CliError> {
    let (c, _) = resolve(name)?;
    let samples = cli.samples.unwrap_or(AIR_SAMPLES);
    let rows = air_sweep(&c, snrs, samples, cli.seed)?;
    let mut t = Table::new(&["snr_db", "mi", "mi_stderr", "gmi", "gmi_stderr", "samples", "seed"]);
    let want_mi = estimator != Estimator::Gmi;
    let want_gmi = estimator != Estimator::Mi;
    let pick = |keep: bool, v: f64| if keep { num(v) } else { Value::Null };
    for r in rows {
        t.push(vec![
            num(r.snr_db),
            pick(want_mi, r.mi),
            pick(want_mi, r.mi_stderr),
            pick(want_gmi, r.gmi),
            pick(want_gmi, r.gmi_stderr),
            json!(r.samples),
            json!(r.seed),
        ]);
    }
    t.render(cli.format)
}

fn prs(cli: &Cli, mode: &PrsMode) -> Result<String, CliError> {
    match mode {
        PrsMode::Gen { r, theta, es } => {
            let params = PrsParams::new(*r, *theta, *es)?;
            let c = prs_from_params(&params)?;
            let mut meta = Map::new();
            meta.insert("format".into(), json!("prs64"));
            meta.insert("r".into(), json!(r));
            meta.insert("theta_deg".into(), json!(theta));
            meta.insert("es".into(), json!(es));
            Ok(to_json(&c, &meta))
        }
        PrsMode::Sweep { snr, r, theta } => {
            let samples = cli.samples.unwrap_or(PRS_SAMPLES);
            let s = prs_param_sweep(*snr, &r.values(), &theta.values(), samples, cli.seed)?;
            eprintln!(
                "optimum at {} dB: r = {:.4}, theta = {:.3} deg, gmi = {:.5}",
                s.snr_db, s.r_opt, s.theta_opt, s.gmi_opt
            );
            let mut t = Table::new(&["r", "theta_deg", "gmi"]);
            for (i, &rv) in s.r.iter().enumerate() {
                for (j, &tv) in s.theta_deg.iter().enumerate() {
                    t.push(vec![num(rv), num(tv), num(s.gmi[i][j])]);
                }
            }
            t.render(cli.format)
        }
        PrsMode::Opt { snr } => {
            let samples = cli.samples.unwrap_or(PRS_SAMPLES);
            let mut t = Table::new(&["snr_db", "r_opt", "theta_opt", "gmi_opt"]);
            for s in snr.values() {
                let o = prs_optimize(s, samples, cli.seed)?;
                t.push(vec![num(s), num(o.r_opt), num(o.theta_opt), num(o.gmi_opt)]);
            }
            t.render(cli.format)
        }
    }
}

fn optimize(cli: &Cli, args: &OptimizeArgs) -> Result<String, CliError> {
    let (init, _) = resolve(&args.init)?;
    let defaults = OptimizerConfig::default();
    let cfg = OptimizerConfig {
        snr_db: args.snr,
        poa_iters: args.poa_iters.unwrap_or(match args.symmetry {
            Symmetry::Free => defaults.poa_iters,
            Symmetry::Orthant => ORTHANT_POA_ITERS,
        }),
        bsa_passes: args.bsa_passes,
        outer_iters: args.outer_iters,
        seed: cli.seed,
        symmetry: match args.symmetry {
            Symmetry::Free => SymmetryMode::Free,
            Symmetry::Orthant => SymmetryMode::OrthantLocked,
        },
        es: args.es,
        surrogate_samples: args.surrogate_samples,
        poa_budget: args.poa_budget,
        final_samples: cli.samples.unwrap_or(defaults.final_samples),
        ..defaults
    };
    let trace = joint_optimize(&init, &cfg)?;
    if let Some(path) = &args.trace {
        let mut lines = String::new();
        for r in &trace.records {
            lines += &json!({
                "round": r.round,
                "kind": r.kind.as_str(),
                "objective_before": r.objective_before,
                "objective_after": r.objective_after,
            })
            .to_string();
            lines.push('\n');
        }
        std::fs::write(path, lines)?;
    }
    eprintln!(
        "{} rounds, objective {:.5} -> {:.5}, final gmi {:.5} +/- {:.5}",
        trace.rounds, trace.initial_objective, trace.final_objective, trace.final_gmi.value, trace.final_gmi.stderr
    );
    let mut meta = Map::new();
    meta.insert("init".into(), json!(args.init));
    meta.insert("snr_db".into(), json!(cfg.snr_db));
    meta.insert("seed".into(), json!(cfg.seed));
    meta.insert("symmetry".into(), json!(format!("{:?}", args.symmetry).to_lowercase()));
    meta.insert("rounds".into(), json!(trace.rounds));
    meta.insert("initial_objective".into(), num(trace.initial_objective));
    meta.insert("final_objective".into(), num(trace.final_objective));
    meta.insert("gmi".into(), num(trace.final_gmi.value));
    meta.insert("gmi_stderr".into(), num(trace.final_gmi.stderr));
    meta.insert("gmi_samples".into(), json!(trace.final_gmi.samples));
    Ok(to_json(&trace.constellation, &meta))
}

fn load_link(common: &LinkCommon) -> Result<LinkSpec, CliError> {
    match &common.config {
        Some(p) => Ok(LinkSpec::from_json(&std::fs::read_to_string(p)?)?),
        None => Ok(LinkSpec::calibrated()),
    }
}

/// Formats at unit-free normalized energy, as the link model assumes.
fn link_formats(common: &LinkCommon) -> Result<Vec<(String, Constellation)>, CliError> {
    if common.formats.is_empty() {
        return Err(CliError::Argument("no formats given".into()));
    }
    common
        .formats
        .iter()
        .map(|f| Ok((f.clone(), resolve(f)?.0.normalize(NORMALIZED_ES)?)))
        .collect()
}

fn link(cli: &Cli, mode: &LinkMode) -> Result<String, CliError> {
    match mode {
        LinkMode::Config => Ok(LinkSpec::calibrated().to_json() + "\n"),
        LinkMode::Power { common, power, spans } => {
            let mut spec = load_link(common)?;
            if let Some(n) = spans {
                spec = spec.with_spans(*n);
                spec.validate()?;
            }
            let formats = link_formats(common)?;
            let mut t = Table::new(&["format", "launch_power_dbm", "sigma2_ase", "sigma2_nli", "snr_eff_db"]);
            let mut reference = None;
            for (name, c) in &formats {
                let (p, snr) = optimal_launch_power(&spec, c)?;
                let delta = *reference.get_or_insert(snr) - snr;
                eprintln!("{name}: p_opt = {p:.3} dBm, snr_eff = {snr:.4} dB, gap to first = {delta:.4} dB");
                let powers = power.values();
                for (dbm, op) in powers.iter().zip(power_sweep(&spec, c, &powers)?) {
                    t.push(vec![
                        json!(name),
                        num(*dbm),
                        num(op.sigma2_ase),
                        num(op.sigma2_nli),
                        num(op.snr_eff_db),
                    ]);
                }
            }
            t.render(cli.format)
        }
        LinkMode::Distance {
            common,
            distance,
            reach_at,
        } => {
            let spec = load_link(common)?;
            let formats = link_formats(common)?;
            let distances = distance.values();
            if let Some(d) = distances.iter().find(|d| {
                let spans = *d / spec.span_length;
                spans < 0.5 || (spans - spans.round()).abs() > 1e-9
            }) {
                return Err(Error::InvalidParameter(format!(
                    "distance {d} km is not a positive multiple of the {} km span",
                    spec.span_length
                ))
                .into());
            }
            let samples = cli.samples.unwrap_or(LINK_SAMPLES);
            let mut t = Table::new(&["format", "distance_km", "p_opt_dbm", "snr_eff_db", "gmi"]);
            let mut first_reach = None;
            for (name, c) in &formats {
                let curve = awgn_curve(&spec, c, &distances, samples, cli.seed)?;
                let points = air_vs_distance(&spec, c, &distances, |snr| Ok(interpolate_gmi(&curve, snr)))?;
                if let Some(thr) = reach_at {
                    let reach = reach_at_threshold(&points, *thr)?;
                    let delta = reach - *first_reach.get_or_insert(reach);
                    eprintln!("{name}: reach at gmi {thr} = {reach:.1} km, delta to first = {delta:.1} km");
                }
                for p in points {
                    t.push(vec![
                        json!(name),
                        num(p.distance_km),
                        num(p.p_opt_dbm),
                        num(p.snr_eff_db),
                        num(p.gmi),
                    ]);
                }
            }
            t.render(cli.format)
        }
    }
}

/// Monte-Carlo GMI sampled on a grid covering the optimal-power SNRs of the
/// requested distances, one grid step of margin on each side.
fn awgn_curve(
    spec: &LinkSpec,
    c: &Constellation,
    distances: &[f64],
    samples: usize,
    seed: u64,
) -> Result<GmiCurve, CliError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &d in distances {
        let spans = (d / spec.span_length).round().max(1.0) as u32;
        let (_, snr) = optimal_launch_power(&spec.with_spans(spans), c)?;
        lo = lo.min(snr);
        hi = hi.max(snr);
    }
    let start = (lo / LINK_CURVE_STEP_DB).floor() * LINK_CURVE_STEP_DB - LINK_CURVE_STEP_DB;
    let count = ((hi - start) / LINK_CURVE_STEP_DB).ceil() as usize + 2;
    let snrs: Vec<f64> = (0..count).map(|k| start + k as f64 * LINK_CURVE_STEP_DB).collect();
    Ok(GmiCurve::from_sweep(&air_sweep(c, &snrs, samples, seed)?)?)
}
