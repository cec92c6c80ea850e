//! `asymlab` — batch front-end for the quasi-linear hyperbolic-space
//! laboratory: parses experiment configs, orchestrates classification,
//! barrier, residual, solver and probe runs, and emits machine-readable
//! reports (CSV data + report.json).
//!
//! Exit codes: 0 all assertions pass; 2 an assertion failed; 1 on
//! operational errors (bad config, I/O, solver breakdown).

mod config;
mod report;
mod runner;

use clap::{Parser, Subcommand};
use config::{parse_config, DataKind, ExperimentConfig, GeometryDef, OperatorDef, RunBlock, RunKind};
use report::{Check, Json};
use runner::BlockResult;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "asymlab", version, about = "numerical laboratory for quasi-linear elliptic operators on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute every run block of a config file.
    Run {
        config: PathBuf,
        /// Run independent blocks concurrently (per-block output
        /// directories keep artifacts separate).
        #[arg(long)]
        parallel: bool,
        /// Output directory (default: ./asymlab-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify operators (removable vs singular type).
    Classify {
        /// Operator specs: `minimal_graph`, `p_laplacian:p=2`,
        /// `custom:formula=rational_saturating,k0=2`. Repeatable.
        #[arg(long = "operator", required = true)]
        operators: Vec<String>,
        /// Shorthand for the p of a single `p_laplacian` operator.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        quad_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a barrier profile and export it as CSV.
    Barriers {
        #[arg(long = "operator")]
        operator: String,
        /// scherk | annulus | singular
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 2.0)]
        big_k: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        curvature: f64,
        #[arg(long, default_value_t = 257)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncation-radius sweep probing the removability dichotomy.
    Probe {
        #[arg(long = "operator")]
        operator: String,
        #[arg(long, default_value_t = 1.0)]
        plateau: f64,
        /// Use the trace of the horospherical singular field instead of a
        /// plateau spike.
        #[arg(long)]
        singular_trace: bool,
        /// Comma-separated increasing truncation radii.
        #[arg(long, default_value = "3,4,5,6")]
        r_seq: String,
        #[arg(long, default_value_t = 16.0)]
        nr_per_unit: f64,
        #[arg(long, default_value_t = 128)]
        ntheta: usize,
        /// Compact annulus the sups are read on, as `lo,hi`.
        #[arg(long, default_value = "1,2")]
        annulus: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_operator_arg(raw: &str, fallback_p: Option<f64>) -> Result<OperatorDef, String> {
    let (kind, rest) = match raw.split_once(':') {
        Some((k, r)) => (k.to_string(), Some(r)),
        None => (raw.to_string(), None),
    };
    let mut params = BTreeMap::new();
    let mut formula = None;
    if let Some(rest) = rest {
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("bad operator parameter '{part}' (expected k=v)"))?;
            if k.trim() == "formula" {
                formula = Some(v.trim().to_string());
            } else {
                let num: f64 =
                    v.trim().parse().map_err(|_| format!("parameter '{k}' must be numeric"))?;
                params.insert(k.trim().to_string(), num);
            }
        }
    }
    if kind == "p_laplacian" && !params.contains_key("p") {
        if let Some(p) = fallback_p {
            params.insert("p".into(), p);
        }
    }
    let name = match kind.as_str() {
        "p_laplacian" => format!("p_laplacian_{}", params.get("p").copied().unwrap_or(f64::NAN)),
        "custom" => formula.clone().unwrap_or_else(|| "custom".into()),
        other => other.to_string(),
    };
    Ok(OperatorDef { name: name.replace('.', "_"), kind, formula, params, expect_class: None })
}

fn timestamp() -> String {
    match std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH) {
        Ok(d) => format!("unix:{}", d.as_secs()),
        Err(_) => "unix:0".into(),
    }
}

fn write_outputs(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    parallel: bool,
    results: &[Result<BlockResult, String>],
) -> Result<bool, String> {
    std::fs::create_dir_all(out_dir).map_err(|e| format!("creating {out_dir:?}: {e}"))?;
    let mut blocks_json = Vec::new();
    let mut all_pass = true;
    let mut operational_failure = false;
    for (block, res) in cfg.runs.iter().zip(results) {
        match res {
            Ok(r) => {
                let block_dir = out_dir.join(&block.out);
                std::fs::create_dir_all(&block_dir)
                    .map_err(|e| format!("creating {block_dir:?}: {e}"))?;
                for (fname, content) in &r.artifacts {
                    std::fs::write(block_dir.join(fname), content)
                        .map_err(|e| format!("writing {fname}: {e}"))?;
                }
                all_pass &= r.all_pass();
                let mut fields = vec![
                    ("name".to_string(), Json::Str(r.name.clone())),
                    ("kind".to_string(), Json::Str(r.kind.clone())),
                    ("incomplete".to_string(), Json::Bool(r.incomplete)),
                    (
                        "checks".to_string(),
                        Json::Arr(r.checks.iter().map(Check::to_json).collect()),
                    ),
                    (
                        "artifacts".to_string(),
                        Json::Arr(
                            r.artifacts
                                .iter()
                                .map(|(f, _)| Json::Str(format!("{}/{f}", block.out)))
                                .collect(),
                        ),
                    ),
                ];
                fields.extend(r.summary.clone());
                blocks_json.push(Json::Obj(fields));
            }
            Err(e) => {
                operational_failure = true;
                all_pass = false;
                blocks_json.push(Json::Obj(vec![
                    ("name".into(), Json::Str(block.name.clone())),
                    ("kind".into(), Json::Str(block.kind.name().into())),
                    ("incomplete".into(), Json::Bool(true)),
                    ("error".into(), Json::Str(e.clone())),
                ]));
                eprintln!("error: run '{}': {e}", block.name);
            }
        }
    }
    // canonical echo of the parsed config: reproducibility aid and the
    // round-trip surface for parse(serialize(cfg))
    std::fs::write(out_dir.join("config.echo.txt"), config::serialize(cfg))
        .map_err(|e| format!("writing config.echo.txt: {e}"))?;
    let report = Json::Obj(vec![
        ("version".into(), Json::Str(env!("CARGO_PKG_VERSION").into())),
        ("timestamp".into(), Json::Str(timestamp())),
        ("seed".into(), Json::Int(cfg.seed as i64)),
        ("parallel".into(), Json::Bool(parallel)),
        ("blocks".into(), Json::Arr(blocks_json)),
        ("all_pass".into(), Json::Bool(all_pass)),
    ]);
    std::fs::write(out_dir.join("report.json"), report.to_text())
        .map_err(|e| format!("writing report.json: {e}"))?;
    if operational_failure {
        return Err("one or more blocks failed operationally".into());
    }
    Ok(all_pass)
}

fn execute(cfg: &ExperimentConfig, parallel: bool, out_dir: &Path) -> ExitCode {
    let results: Vec<Result<BlockResult, String>> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> =
                cfg.runs.iter().map(|b| scope.spawn(move || runner::run_block(b, cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("run block panicked")).collect()
        })
    } else {
        cfg.runs.iter().map(|b| runner::run_block(b, cfg)).collect()
    };
    match write_outputs(out_dir, cfg, parallel, &results) {
        Ok(true) => {
            println!("all checks passed; report at {:?}", out_dir.join("report.json"));
            ExitCode::SUCCESS
        }
        Ok(false) => {
            eprintln!("assertion failures; see {:?}", out_dir.join("report.json"));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn apply_seed_override(cfg: &mut ExperimentConfig) {
    if let Ok(s) = std::env::var("ASYMLAB_SEED") {
        match s.parse::<u64>() {
            Ok(seed) => cfg.seed = seed,
            Err(_) => eprintln!("warning: ignoring non-integer ASYMLAB_SEED = {s:?}"),
        }
    }
}

fn default_geometry() -> GeometryDef {
    GeometryDef::default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, parallel, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: reading {config:?}: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(errors) => {
                    eprintln!("error: invalid config {config:?}:");
                    for e in errors {
                        eprintln!("  {e}");
                    }
                    return ExitCode::from(1);
                }
            };
            apply_seed_override(&mut cfg);
            let out_dir = out.unwrap_or_else(|| PathBuf::from("asymlab-out"));
            execute(&cfg, parallel, &out_dir)
        }
        Cmd::Classify { operators, p, quad_tol, out } => {
            let mut defs = Vec::new();
            for raw in &operators {
                match parse_operator_arg(raw, p) {
                    Ok(d) => defs.push(d),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
            }
            let mut cfg = ExperimentConfig {
                seed: 0,
                operators: defs,
                geometry: default_geometry(),
                runs: vec![RunBlock {
                    name: "classify".into(),
                    kind: RunKind::Classify,
                    out: "classify".into(),
                    quad_tol: quad_tol.unwrap_or(asymlab::QUAD_TOL_DEFAULT),
                    solver_tol: asymlab::SOLVER_TOL_DEFAULT,
                }],
            };
            apply_seed_override(&mut cfg);
            execute(&cfg, false, &out.unwrap_or_else(|| PathBuf::from("asymlab-out")))
        }
        Cmd::Barriers {
            operator,
            profile,
            delta,
            b,
            rho,
            big_k,
            n,
            curvature,
            nodes,
            out,
        } => {
            let def = match parse_operator_arg(&operator, None) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let op_name = def.name.clone();
            let mut cfg = ExperimentConfig {
                seed: 0,
                operators: vec![def],
                geometry: default_geometry(),
                runs: vec![RunBlock {
                    name: "barriers".into(),
                    kind: RunKind::Barriers {
                        operator: op_name,
                        profile,
                        delta,
                        b,
                        rho,
                        big_k,
                        n,
                        curvature,
                        d_lo: -8.0,
                        d_hi: 3.0,
                        nodes,
                    },
                    out: "barriers".into(),
                    quad_tol: asymlab::QUAD_TOL_DEFAULT,
                    solver_tol: asymlab::SOLVER_TOL_DEFAULT,
                }],
            };
            apply_seed_override(&mut cfg);
            execute(&cfg, false, &out.unwrap_or_else(|| PathBuf::from("asymlab-out")))
        }
        Cmd::Probe {
            operator,
            plateau,
            singular_trace,
            r_seq,
            nr_per_unit,
            ntheta,
            annulus,
            out,
        } => {
            let def = match parse_operator_arg(&operator, None) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let r_sequence: Result<Vec<f64>, _> =
                r_seq.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let r_sequence = match r_sequence {
                Ok(v) if !v.is_empty() && v.windows(2).all(|w| w[1] > w[0]) => v,
                _ => {
                    eprintln!("error: --r-seq must be an increasing comma-separated list");
                    return ExitCode::from(1);
                }
            };
            let annulus = {
                let parts: Vec<Option<f64>> =
                    annulus.split(',').map(|t| t.trim().parse::<f64>().ok()).collect();
                match parts.as_slice() {
                    [Some(lo), Some(hi)] if lo < hi => (*lo, *hi),
                    _ => {
                        eprintln!("error: --annulus must be 'lo,hi' with lo < hi");
                        return ExitCode::from(1);
                    }
                }
            };
            let data = if singular_trace {
                DataKind::SingularTrace { offset: 4.0 }
            } else {
                DataKind::Plateau(plateau)
            };
            let op_name = def.name.clone();
            let mut cfg = ExperimentConfig {
                seed: 0,
                operators: vec![def],
                geometry: default_geometry(),
                runs: vec![RunBlock {
                    name: "probe".into(),
                    kind: RunKind::Probe {
                        operator: op_name,
                        data,
                        r_sequence,
                        nr_per_unit,
                        ntheta,
                        annulus,
                    },
                    out: "probe".into(),
                    quad_tol: asymlab::QUAD_TOL_DEFAULT,
                    solver_tol: asymlab::SOLVER_TOL_DEFAULT,
                }],
            };
            apply_seed_override(&mut cfg);
            execute(&cfg, false, &out.unwrap_or_else(|| PathBuf::from("asymlab-out")))
        }
    }
}
