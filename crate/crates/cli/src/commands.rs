//! Subcommand implementations: resolve the effective configuration
//! (defaults, then the config file, then flags), validate it, run, and emit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use ybip::distributions::{sample, DistSpec, Law};
use ybip::maps::{MapSpec, PlanePoint};
use ybip::quadrature::QuadratureConfig;
use ybip::statcheck::{run_ip_experiment, IpExperimentConfig};
use ybip::transforms::ModelQuad;
use ybip::verify::{
    preset_fa_inf, preset_fa_zero, preset_fab, preset_gdelta, preset_negative_control, verify_euler,
    verify_hde, verify_maps, verify_monte_carlo, verify_transforms, CheckSummary, HdeSuiteConfig,
    IpDefaults, MapsSuiteConfig, MonteCarloSuiteConfig, TransformSuiteConfig,
};

use crate::config::{layered, read_file, to_file_value};
use crate::output::{config_hash, csv_num, emit_csv, emit_json, fmt_num, write_text, Format};
use crate::{failed, invalid, Cli, CliError, Command, Common, DistArgs, MapArgs, ModelArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub dist: DistSpec,
    pub n: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            dist: DistSpec::Gb2 { nu: 0.3, p: 1.5, q: 2.0, gamma: 2.0 },
            n: 1000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub dist: DistSpec,
    pub x: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            dist: DistSpec::B2 { a: 1.0, b: 1.0 },
            x: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEvalConfig {
    pub map: MapSpec,
    pub x: f64,
    pub y: f64,
}

impl Default for MapEvalConfig {
    fn default() -> Self {
        Self {
            map: MapSpec::Fab { alpha: 1.0, beta: 2.0 },
            x: 1.0,
            y: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for EulerConfig {
    fn default() -> Self {
        Self { draws: 200, seed: 5 }
    }
}

pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let c = &cli.common;
    let cfg_path = c.config.as_deref();
    match &cli.command {
        Command::VerifyTransforms { model, grid, corrupt_lambda } => {
            let mut cfg = layered(TransformSuiteConfig::default(), cfg_path)?;
            apply_model(&mut cfg.model, model);
            if let Some(g) = grid {
                cfg.grid = parse_grid(g)?;
            }
            if corrupt_lambda.is_some() {
                cfg.corrupt_lambda = *corrupt_lambda;
            }
            cfg.validate().map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = verify_transforms(&cfg, &QuadratureConfig::default()).map_err(failed)?;
            finish(c, "verify-transforms", &cfg, report.pass, &report, || check_rows(&cfg, "verify-transforms", &report.checks))
        }
        Command::VerifyMc { dist, n, grid } => {
            let mut cfg = layered(MonteCarloSuiteConfig::default(), cfg_path)?;
            cfg.law = override_dist(cfg.law, dist)?;
            set(&mut cfg.n, *n);
            set(&mut cfg.seed, c.seed);
            if let Some(g) = grid {
                cfg.grid = parse_grid(g)?;
            }
            cfg.validate().map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = verify_monte_carlo(&cfg, &QuadratureConfig::default()).map_err(failed)?;
            finish(c, "verify-mc", &cfg, report.pass, &report, || {
                let hash = config_hash(&cfg)?;
                let header = ["config_hash", "s", "theta", "sigma", "closed", "mc", "se", "z_score", "pass"];
                let rows = report
                    .points
                    .iter()
                    .map(|p| {
                        vec![
                            hash.clone(),
                            fmt_num(p.point.s),
                            fmt_num(p.point.theta),
                            fmt_num(p.point.sigma),
                            csv_num(p.closed),
                            csv_num(p.mc),
                            csv_num(p.se),
                            csv_num(p.z_score),
                            p.pass.to_string(),
                        ]
                    })
                    .collect();
                Ok((header.to_vec(), rows))
            })
        }
        Command::VerifyMaps { points, alpha, beta, delta } => {
            let mut cfg = layered(MapsSuiteConfig::default(), cfg_path)?;
            set(&mut cfg.points, *points);
            set(&mut cfg.seed, c.seed);
            for (slot, v) in [(&mut cfg.alpha, alpha), (&mut cfg.beta, beta), (&mut cfg.delta, delta)] {
                if v.is_some() {
                    *slot = *v;
                }
            }
            cfg.validate().map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = verify_maps(&cfg).map_err(failed)?;
            finish(c, "verify-maps", &cfg, report.pass, &report, || check_rows(&cfg, "verify-maps", &report.checks))
        }
        Command::VerifyIp {
            preset,
            model,
            c: cc,
            delta,
            n,
            permutations,
            subsample,
            level,
            retries,
            ks_threshold,
        } => {
            let params_given = model.lambda.is_some()
                || model.a.is_some()
                || model.b.is_some()
                || model.alpha.is_some()
                || model.beta.is_some()
                || cc.is_some()
                || delta.is_some();
            let base = build_preset(preset.as_deref().unwrap_or("fab"), model, *cc, *delta)?;
            if let (true, Some(path)) = (params_given || preset.is_some(), cfg_path) {
                let file = read_file(path)?;
                const LAW_FIELDS: [&str; 7] =
                    ["name", "map", "law_x", "law_y", "predicted_u", "predicted_v", "expect"];
                if let Some(k) = LAW_FIELDS.iter().find(|k| file.contains_key(**k)) {
                    return Err(CliError::Config(format!(
                        "{} sets \"{k}\", which conflicts with --preset and parameter flags",
                        path.display()
                    )));
                }
            }
            let mut cfg = layered(base, cfg_path)?;
            let full = cfg.dcorr_subsample == cfg.n;
            set(&mut cfg.n, *n);
            // an unspecified subsample follows n: kept full, or capped at n
            if subsample.is_none() {
                cfg.dcorr_subsample = if full { cfg.n } else { cfg.dcorr_subsample.min(cfg.n) };
            }
            set(&mut cfg.seed, c.seed);
            set(&mut cfg.n_permutations, *permutations);
            set(&mut cfg.dcorr_subsample, *subsample);
            set(&mut cfg.level, *level);
            set(&mut cfg.retries, *retries);
            if ks_threshold.is_some() {
                cfg.ks_threshold = *ks_threshold;
            }
            cfg.validate().map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = run_ip_experiment(&cfg).map_err(failed)?;
            finish(c, "verify-ip", &cfg, report.pass, &report, || {
                let header = [
                    "config_hash", "name", "map", "params", "n", "seed", "dcorr", "p_value", "ks_u", "ks_v", "pass",
                ];
                let params = serde_json::json!({ "law_x": cfg.law_x, "law_y": cfg.law_y }).to_string();
                let opt = |v: Option<f64>| v.map(csv_num).unwrap_or_default();
                let row = vec![
                    config_hash(&cfg)?,
                    cfg.name.clone(),
                    serde_json::to_string(&cfg.map).map_err(|e| CliError::Runtime(e.to_string()))?,
                    params,
                    cfg.n.to_string(),
                    report.seed_used.to_string(),
                    csv_num(report.dcorr_stat),
                    csv_num(report.p_value),
                    opt(report.ks_u),
                    opt(report.ks_v),
                    report.pass.to_string(),
                ];
                Ok((header.to_vec(), vec![row]))
            })
        }
        Command::VerifyHde { alpha, lambda, a, b, lattice } => {
            let mut cfg = layered(HdeSuiteConfig::default(), cfg_path)?;
            set(&mut cfg.alpha, *alpha);
            set(&mut cfg.lambda, *lambda);
            set(&mut cfg.a, *a);
            set(&mut cfg.b, *b);
            set(&mut cfg.lattice, *lattice);
            set(&mut cfg.seed, c.seed);
            cfg.validate().map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = verify_hde(&cfg, &QuadratureConfig::default()).map_err(failed)?;
            finish(c, "verify-hde", &cfg, report.pass, &report, || check_rows(&cfg, "verify-hde", &report.checks))
        }
        Command::VerifyEuler { n } => {
            let mut cfg = layered(EulerConfig::default(), cfg_path)?;
            set(&mut cfg.draws, *n);
            set(&mut cfg.seed, c.seed);
            if cfg.draws == 0 {
                return Err(CliError::Config("draws must be at least 1".into()));
            }
            if c.print_config {
                return print_config(c, &cfg);
            }
            let report = verify_euler(cfg.draws, cfg.seed, &QuadratureConfig::default()).map_err(failed)?;
            finish(c, "verify-euler", &cfg, report.pass, &report, || {
                let row = vec![
                    config_hash(&cfg)?,
                    report.draws.to_string(),
                    report.seed.to_string(),
                    csv_num(report.max_residual),
                    csv_num(report.tolerance),
                    report.pass.to_string(),
                ];
                Ok((vec!["config_hash", "draws", "seed", "max_residual", "tolerance", "pass"], vec![row]))
            })
        }
        Command::Sample { dist, n } => {
            let mut cfg = layered(SampleConfig::default(), cfg_path)?;
            cfg.dist = override_dist(cfg.dist, dist)?;
            set(&mut cfg.n, *n);
            set(&mut cfg.seed, c.seed);
            if cfg.n == 0 {
                return Err(CliError::Config("n must be at least 1".into()));
            }
            if c.print_config {
                return print_config(c, &cfg);
            }
            let batch = sample(&cfg.dist, cfg.n, cfg.seed).map_err(failed)?;
            match c.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let mut text = serde_json::to_string_pretty(&batch).map_err(|e| CliError::Runtime(e.to_string()))?;
                    text.push('\n');
                    write_text(c.out.as_deref(), &text)?;
                }
                Format::Csv => {
                    let mut text = String::with_capacity(batch.values.len() * 20 + 6);
                    text.push_str("value\n");
                    for v in &batch.values {
                        text.push_str(&v.to_string());
                        text.push('\n');
                    }
                    write_text(c.out.as_deref(), &text)?;
                }
            }
            Ok(true)
        }
        Command::Density { dist, x } => {
            let mut cfg = layered(DensityConfig::default(), cfg_path)?;
            cfg.dist = override_dist(cfg.dist, dist)?;
            set(&mut cfg.x, *x);
            if c.print_config {
                return print_config(c, &cfg);
            }
            let law = Law::new(cfg.dist, &QuadratureConfig::default()).map_err(failed)?;
            let value = law.density(cfg.x);
            scalar_output(c, &cfg, &[("x", cfg.x), ("density", value)], fmt_num(value))
        }
        Command::MapEval { map, x, y } => {
            let mut cfg = layered(MapEvalConfig::default(), cfg_path)?;
            cfg.map = override_map(cfg.map, map)?;
            set(&mut cfg.x, *x);
            set(&mut cfg.y, *y);
            cfg.map.check_point(PlanePoint::new(cfg.x, cfg.y)).map_err(invalid)?;
            if c.print_config {
                return print_config(c, &cfg);
            }
            let img = cfg.map.apply(PlanePoint::new(cfg.x, cfg.y)).map_err(failed)?;
            let text = format!("{} {}", fmt_num(img.x), fmt_num(img.y));
            scalar_output(c, &cfg, &[("x", cfg.x), ("y", cfg.y), ("u", img.x), ("v", img.y)], text)
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_model(m: &mut ModelQuad, args: &ModelArgs) {
    set(&mut m.lambda, args.lambda);
    set(&mut m.a, args.a);
    set(&mut m.b, args.b);
    set(&mut m.alpha, args.alpha);
    set(&mut m.beta, args.beta);
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("--grid value {t:?}: {e}")))
        })
        .collect()
}

/// Replace fields of a tagged spec by flags. A different `kind` starts the
/// spec afresh, so every parameter of the new family must be given.
fn override_tagged<T>(base: &T, kind: Option<&str>, fields: &[(&str, Option<f64>)], what: &str) -> Result<T, CliError>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let Ok(Value::Object(mut obj)) = serde_json::to_value(base) else {
        return Err(CliError::Runtime(format!("{what} is not an object")));
    };
    if let Some(kind) = kind {
        if obj.get("kind").and_then(Value::as_str) != Some(kind) {
            obj = Map::new();
            obj.insert("kind".into(), Value::from(kind));
        }
    }
    for (k, v) in fields {
        if let Some(v) = v {
            obj.insert((*k).into(), Value::from(*v));
        }
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn override_dist(base: DistSpec, a: &DistArgs) -> Result<DistSpec, CliError> {
    let fields = [
        ("nu", a.nu),
        ("p", a.p),
        ("q", a.q),
        ("gamma", a.gamma),
        ("a", a.a),
        ("b", a.b),
        ("r", a.r),
        ("delta", a.delta),
    ];
    let spec: DistSpec = override_tagged(&base, a.dist.as_deref(), &fields, "distribution")?;
    spec.validate().map_err(invalid)?;
    Ok(spec)
}

fn override_map(base: MapSpec, a: &MapArgs) -> Result<MapSpec, CliError> {
    let fields = [("alpha", a.alpha), ("beta", a.beta), ("delta", a.delta)];
    let spec: MapSpec = override_tagged(&base, a.map.as_deref(), &fields, "map")?;
    spec.validate().map_err(invalid)?;
    Ok(spec)
}

fn build_preset(name: &str, m: &ModelArgs, c: Option<f64>, delta: Option<f64>) -> Result<IpExperimentConfig, CliError> {
    let d = IpDefaults::default();
    let lambda = m.lambda.unwrap_or(0.3);
    let a = m.a.unwrap_or(1.5);
    let b = m.b.unwrap_or(2.0);
    let alpha = m.alpha.unwrap_or(2.0);
    let beta = m.beta.unwrap_or(0.5);
    let unused = |flag: &str, given: bool| {
        if given {
            Err(CliError::Config(format!("--{flag} is not a parameter of preset {name}")))
        } else {
            Ok(())
        }
    };
    let cfg = match name {
        "fab" => {
            unused("c", c.is_some())?;
            unused("delta", delta.is_some())?;
            let model = ModelQuad::new(lambda, a, b, alpha, beta).map_err(invalid)?;
            preset_fab(&model, &d)
        }
        "fa-inf" | "fa-zero" => {
            unused("c", c.is_some())?;
            unused("delta", delta.is_some())?;
            unused("beta", m.beta.is_some())?;
            if name == "fa-inf" {
                preset_fa_inf(lambda, a, b, alpha, &d)
            } else {
                preset_fa_zero(lambda, a, b, alpha, &d)
            }
        }
        "gdelta" | "dr" => {
            unused("lambda", m.lambda.is_some())?;
            unused("alpha", m.alpha.is_some())?;
            unused("beta", m.beta.is_some())?;
            let delta = if name == "dr" {
                unused("delta", delta.is_some())?;
                1.0
            } else {
                delta.unwrap_or(0.4)
            };
            preset_gdelta(a, b, c.unwrap_or(1.2), delta, &d)
        }
        "negative-control" => {
            unused("lambda", m.lambda.is_some())?;
            unused("c", c.is_some())?;
            unused("delta", delta.is_some())?;
            preset_negative_control(m.a.unwrap_or(2.0), m.b.unwrap_or(2.0), alpha, beta, &d)
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?}; expected fab, fa-inf, fa-zero, gdelta, dr or negative-control"
            )))
        }
    };
    cfg.map_err(invalid)
}

fn print_config<T: Serialize>(c: &Common, cfg: &T) -> Result<bool, CliError> {
    let v = to_file_value(cfg)?;
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_text(c.out.as_deref(), &text)?;
    Ok(true)
}

type CsvTable = (Vec<&'static str>, Vec<Vec<String>>);

fn finish<C, R, F>(c: &Common, command: &str, cfg: &C, pass: bool, report: &R, csv: F) -> Result<bool, CliError>
where
    C: Serialize,
    R: Serialize,
    F: FnOnce() -> Result<CsvTable, CliError>,
{
    match c.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(c.out.as_deref(), command, &config_hash(cfg)?, pass, report)?,
        Format::Csv => {
            let (header, rows) = csv()?;
            emit_csv(c.out.as_deref(), &header, &rows)?;
        }
    }
    Ok(pass)
}

fn check_rows<C: Serialize>(cfg: &C, command: &str, checks: &BTreeMap<String, CheckSummary>) -> Result<CsvTable, CliError> {
    let hash = config_hash(cfg)?;
    let rows = checks
        .values()
        .map(|s| {
            vec![
                hash.clone(),
                command.to_string(),
                s.check.clone(),
                s.count.to_string(),
                csv_num(s.max_residual),
                csv_num(s.tolerance),
                s.pass.to_string(),
            ]
        })
        .collect();
    Ok((
        vec!["config_hash", "command", "check", "count", "max_residual", "tolerance", "pass"],
        rows,
    ))
}

/// Plain text by default, or a one-record JSON object or CSV table.
fn scalar_output<C: Serialize>(c: &Common, cfg: &C, fields: &[(&str, f64)], text: String) -> Result<bool, CliError> {
    let out: Option<&Path> = c.out.as_deref();
    match c.format {
        None => write_text(out, &(text + "\n"))?,
        Some(Format::Json) => {
            let mut obj = Map::new();
            obj.insert("config".into(), serde_json::to_value(cfg).map_err(|e| CliError::Runtime(e.to_string()))?);
            for (k, v) in fields {
                obj.insert((*k).into(), Value::from(*v));
            }
            let mut s = serde_json::to_string_pretty(&obj).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            write_text(out, &s)?;
        }
        Some(Format::Csv) => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row = fields.iter().map(|(_, v)| csv_num(*v)).collect();
            emit_csv(out, &header, &[row])?;
        }
    }
    Ok(true)
}
