//! Sectioned `key = value` experiment configs.
//!
//! ```text
//! # one or more run blocks, executed in order
//! [run classify-builtin]
//! kind = classify
//! out = classify-builtin
//!
//! [operator mg]
//! kind = minimal_graph
//! expect_class = removable
//!
//! [operator p2]
//! kind = p_laplacian
//! p = 2.0
//!
//! [geometry]
//! dimension = 2
//! curvature = 1.0
//! ideal_points = 1 0, -1 0
//! geodesics = 0 1
//! horospheres = 0 0 0
//! ```
//!
//! Parsing is not fail-fast: every problem is collected with its line
//! number and reported in one batch.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDef {
    pub name: String,
    pub kind: String,
    /// Named formula table entry, for `kind = custom`.
    pub formula: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub expect_class: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryDef {
    pub dimension: usize,
    pub curvature: f64,
    pub ideal_points: Vec<Vec<f64>>,
    /// pairs of ideal-point indices
    pub geodesics: Vec<(usize, usize)>,
    /// (ideal-point index, through-point coordinates)
    pub horospheres: Vec<(usize, Vec<f64>)>,
}

impl Default for GeometryDef {
    fn default() -> Self {
        GeometryDef {
            dimension: 2,
            curvature: 1.0,
            ideal_points: vec![vec![1.0, 0.0]],
            geodesics: Vec::new(),
            horospheres: Vec::new(),
        }
    }
}

/// Boundary data selector for disk solves and probes.
#[derive(Debug, Clone, PartialEq)]
pub enum DataKind {
    Constant(f64),
    Plateau(f64),
    /// Trace of the horospherical singular field `g0 ∘ busemann` for the
    /// run's operator; `offset` places the horosphere's through-point on
    /// the axis toward the singular direction.
    SingularTrace { offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunKind {
    Classify,
    Barriers {
        operator: String,
        profile: String,
        delta: f64,
        b: f64,
        rho: f64,
        big_k: f64,
        n: usize,
        curvature: f64,
        d_lo: f64,
        d_hi: f64,
        nodes: usize,
    },
    Residuals {
        operator: String,
        field: String,
        samples: usize,
        h: f64,
        tol: f64,
    },
    RadialBvp {
        operator: String,
        r0: f64,
        r1: f64,
        nodes: usize,
        u_lo: f64,
        u_hi: f64,
        n: usize,
        curvature: f64,
    },
    DiskSolve {
        operator: String,
        r_trunc: f64,
        nr: usize,
        ntheta: usize,
        data: DataKind,
    },
    Probe {
        operator: String,
        data: DataKind,
        r_sequence: Vec<f64>,
        nr_per_unit: f64,
        ntheta: usize,
        annulus: (f64, f64),
    },
}

impl RunKind {
    pub fn name(&self) -> &'static str {
        match self {
            RunKind::Classify => "classify",
            RunKind::Barriers { .. } => "barriers",
            RunKind::Residuals { .. } => "residuals",
            RunKind::RadialBvp { .. } => "radial-bvp",
            RunKind::DiskSolve { .. } => "disk-solve",
            RunKind::Probe { .. } => "removability-probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBlock {
    pub name: String,
    pub kind: RunKind,
    pub out: String,
    pub quad_tol: f64,
    pub solver_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub operators: Vec<OperatorDef>,
    pub geometry: GeometryDef,
    pub runs: Vec<RunBlock>,
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    NumList(Vec<f64>),
    Groups(Vec<Vec<f64>>),
    Str(String),
}

impl Value {
    fn parse(raw: &str) -> Value {
        let raw = raw.trim();
        if let Ok(v) = raw.parse::<f64>() {
            return Value::Num(v);
        }
        let groups: Vec<Vec<Option<f64>>> = raw
            .split(',')
            .map(|g| g.split_whitespace().map(|t| t.parse::<f64>().ok()).collect())
            .collect();
        let all_num = groups.iter().flatten().all(|v| v.is_some())
            && groups.iter().all(|g| !g.is_empty());
        if all_num {
            if groups.len() == 1 {
                return Value::NumList(groups[0].iter().map(|v| v.unwrap()).collect());
            }
            return Value::Groups(
                groups.iter().map(|g| g.iter().map(|v| v.unwrap()).collect()).collect(),
            );
        }
        Value::Str(raw.to_string())
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    fn as_list(&self) -> Option<Vec<f64>> {
        match self {
            Value::Num(v) => Some(vec![*v]),
            Value::NumList(v) => Some(v.clone()),
            _ => None,
        }
    }

    fn as_groups(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            Value::Num(v) => Some(vec![vec![*v]]),
            Value::NumList(v) => Some(vec![v.clone()]),
            Value::Groups(g) => Some(g.clone()),
            _ => None,
        }
    }
}

struct Section {
    name: String,
    label: String,
    line: usize,
    entries: Vec<(String, Value, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&(String, Value, usize)> {
        self.entries.iter().find(|(k, _, _)| k == key)
    }

    fn num(&self, key: &str, default: f64, errors: &mut Vec<ConfigError>) -> f64 {
        match self.get(key) {
            None => default,
            Some((_, v, line)) => v.as_num().unwrap_or_else(|| {
                errors.push(err(Some(*line), format!("'{key}' must be a number")));
                default
            }),
        }
    }

    fn num_required(&self, key: &str, errors: &mut Vec<ConfigError>) -> f64 {
        match self.get(key) {
            None => {
                errors.push(err(
                    Some(self.line),
                    format!("section [{} {}] is missing required key '{key}'", self.name, self.label),
                ));
                f64::NAN
            }
            Some((_, v, line)) => v.as_num().unwrap_or_else(|| {
                errors.push(err(Some(*line), format!("'{key}' must be a number")));
                f64::NAN
            }),
        }
    }

    fn string(&self, key: &str, default: &str, errors: &mut Vec<ConfigError>) -> String {
        match self.get(key) {
            None => default.to_string(),
            Some((_, v, line)) => match v {
                Value::Str(s) => s.clone(),
                Value::Num(n) => n.to_string(),
                _ => {
                    errors.push(err(Some(*line), format!("'{key}' must be a name")));
                    default.to_string()
                }
            },
        }
    }
}

fn parse_sections(text: &str) -> (Vec<Section>, Vec<ConfigError>) {
    let mut sections: Vec<Section> = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let mut parts = inner.trim().splitn(2, char::is_whitespace);
            let name = parts.next().unwrap_or("").to_string();
            let label = parts.next().unwrap_or("").trim().to_string();
            if !["run", "operator", "geometry"].contains(&name.as_str()) {
                errors.push(err(Some(lineno), format!("unknown section '[{name}]'")));
            }
            sections.push(Section { name, label, line: lineno, entries: Vec::new() });
            continue;
        }
        let Some(eq) = line.find('=') else {
            errors.push(err(Some(lineno), format!("expected 'key = value', got '{line}'")));
            continue;
        };
        let key = line[..eq].trim().to_string();
        let value = Value::parse(&line[eq + 1..]);
        if key.is_empty() {
            errors.push(err(Some(lineno), "empty key".to_string()));
            continue;
        }
        match sections.last_mut() {
            Some(s) => s.entries.push((key, value, lineno)),
            None => errors.push(err(Some(lineno), "key outside any section".to_string())),
        }
    }
    (sections, errors)
}

fn validate_operator(section: &Section, errors: &mut Vec<ConfigError>) -> OperatorDef {
    let name = if section.label.is_empty() { "operator".to_string() } else { section.label.clone() };
    let kind = section.string("kind", "", errors);
    if kind.is_empty() {
        errors.push(err(Some(section.line), format!("operator '{name}' needs a 'kind'")));
    }
    let mut params = BTreeMap::new();
    let mut expect_class = None;
    let mut formula = None;
    for (k, v, line) in &section.entries {
        match k.as_str() {
            "kind" => {}
            "expect_class" => match v.as_str() {
                Some(s) if s == "removable" || s == "singular" => {
                    expect_class = Some(s.to_string())
                }
                _ => errors.push(err(
                    Some(*line),
                    "expect_class must be 'removable' or 'singular'",
                )),
            },
            "formula" => match v.as_str() {
                Some(s) => formula = Some(s.to_string()),
                None => errors.push(err(Some(*line), "formula must be a name")),
            },
            other => match v.as_num() {
                Some(n) => {
                    params.insert(other.to_string(), n);
                }
                None => errors.push(err(Some(*line), format!("parameter '{other}' must be a number"))),
            },
        }
    }
    // structural validation mirroring the operator constructors
    if kind == "p_laplacian" {
        match params.get("p") {
            None => errors.push(err(Some(section.line), format!("operator '{name}': p_laplacian needs 'p'"))),
            Some(&p) if p <= 1.0 => errors.push(err(
                Some(section.line),
                format!("operator '{name}': p must exceed 1 (got {p})"),
            )),
            _ => {}
        }
    }
    if kind == "custom" && formula.is_none() {
        errors.push(err(
            Some(section.line),
            format!("operator '{name}': custom operators need 'formula = <table name>'"),
        ));
    }
    OperatorDef { name, kind, formula, params, expect_class }
}

fn validate_geometry(section: &Section, errors: &mut Vec<ConfigError>) -> GeometryDef {
    let mut g = GeometryDef::default();
    g.dimension = section.num("dimension", 2.0, errors) as usize;
    if g.dimension < 2 {
        errors.push(err(Some(section.line), "dimension must be at least 2"));
    }
    g.curvature = section.num("curvature", 1.0, errors);
    if g.curvature <= 0.0 {
        errors.push(err(Some(section.line), "curvature must be positive"));
    }
    if let Some((_, v, line)) = section.get("ideal_points") {
        match v.as_groups() {
            Some(groups) => {
                for p in &groups {
                    if p.len() != g.dimension {
                        errors.push(err(
                            Some(*line),
                            format!("ideal point {p:?} has wrong dimension (expected {})", g.dimension),
                        ));
                    }
                }
                g.ideal_points = groups;
            }
            None => errors.push(err(Some(*line), "ideal_points must be numeric groups")),
        }
    }
    if let Some((_, v, line)) = section.get("geodesics") {
        match v.as_groups() {
            Some(groups) => {
                for pair in groups {
                    if pair.len() != 2 {
                        errors.push(err(Some(*line), "each geodesic needs two ideal indices"));
                        continue;
                    }
                    let (a, b) = (pair[0] as usize, pair[1] as usize);
                    if a >= g.ideal_points.len() || b >= g.ideal_points.len() {
                        errors.push(err(Some(*line), format!("geodesic ({a}, {b}) references a missing ideal point")));
                    } else {
                        g.geodesics.push((a, b));
                    }
                }
            }
            None => errors.push(err(Some(*line), "geodesics must be pairs of indices")),
        }
    }
    if let Some((_, v, line)) = section.get("horospheres") {
        match v.as_groups() {
            Some(groups) => {
                for h in groups {
                    if h.len() != 1 + g.dimension {
                        errors.push(err(
                            Some(*line),
                            "each horosphere needs an ideal index followed by through-point coordinates",
                        ));
                        continue;
                    }
                    let idx = h[0] as usize;
                    if idx >= g.ideal_points.len() {
                        errors.push(err(Some(*line), format!("horosphere references missing ideal point {idx}")));
                    } else {
                        g.horospheres.push((idx, h[1..].to_vec()));
                    }
                }
            }
            None => errors.push(err(Some(*line), "horospheres must be numeric groups")),
        }
    }
    g
}

fn parse_data_kind(section: &Section, errors: &mut Vec<ConfigError>) -> DataKind {
    let data = section.string("data", "constant", errors);
    match data.as_str() {
        "constant" => DataKind::Constant(section.num("value", 0.0, errors)),
        "plateau" => DataKind::Plateau(section.num("plateau", 1.0, errors)),
        "singular-trace" => {
            DataKind::SingularTrace { offset: section.num("trace_offset", 4.0, errors) }
        }
        other => {
            errors.push(err(
                Some(section.line),
                format!("unknown data kind '{other}' (constant | plateau | singular-trace)"),
            ));
            DataKind::Constant(0.0)
        }
    }
}

fn validate_run(
    section: &Section,
    operators: &[OperatorDef],
    errors: &mut Vec<ConfigError>,
) -> RunBlock {
    let name = if section.label.is_empty() { "run".to_string() } else { section.label.clone() };
    let kind_name = section.string("kind", "", errors);
    let quad_tol = section.num("quad_tol", asymlab::QUAD_TOL_DEFAULT, errors);
    let solver_tol = section.num("solver_tol", asymlab::SOLVER_TOL_DEFAULT, errors);
    for (label, v) in [("quad_tol", quad_tol), ("solver_tol", solver_tol)] {
        if !(v > 0.0) {
            errors.push(err(Some(section.line), format!("{label} must be positive")));
        }
    }
    let operator_key = |key: &str, errors: &mut Vec<ConfigError>| -> String {
        let op = section.string(key, "", errors);
        if op.is_empty() {
            errors.push(err(
                Some(section.line),
                format!("run '{name}' needs '{key} = <operator name>'"),
            ));
        } else if !operators.iter().any(|o| o.name == op) {
            errors.push(err(
                Some(section.line),
                format!("run '{name}' references missing [operator {op}] section"),
            ));
        }
        op
    };
    let kind = match kind_name.as_str() {
        "classify" => {
            if operators.is_empty() {
                errors.push(err(
                    Some(section.line),
                    "classify run needs at least one [operator] section",
                ));
            }
            RunKind::Classify
        }
        "barriers" => RunKind::Barriers {
            operator: operator_key("operator", errors),
            profile: {
                let p = section.string("profile", "scherk", errors);
                if !["scherk", "annulus", "singular"].contains(&p.as_str()) {
                    errors.push(err(
                        Some(section.line),
                        format!("unknown profile '{p}' (scherk | annulus | singular)"),
                    ));
                }
                p
            },
            delta: section.num("delta", 0.0, errors),
            b: section.num("b", 1.0, errors),
            rho: section.num("rho", 1.0, errors),
            big_k: section.num("big_k", 2.0, errors),
            n: section.num("n", 2.0, errors) as usize,
            curvature: section.num("curvature", 1.0, errors),
            d_lo: section.num("d_lo", -8.0, errors),
            d_hi: section.num("d_hi", 3.0, errors),
            nodes: section.num("nodes", asymlab::PROFILE_NODES_DEFAULT as f64, errors) as usize,
        },
        "residuals" => RunKind::Residuals {
            operator: operator_key("operator", errors),
            field: section.string("field", "scherk", errors),
            samples: section.num("samples", 200.0, errors) as usize,
            h: section.num("h", 0.02, errors),
            tol: section.num("tol", 1e-6, errors),
        },
        "radial-bvp" => RunKind::RadialBvp {
            operator: operator_key("operator", errors),
            r0: section.num_required("r0", errors),
            r1: section.num_required("r1", errors),
            nodes: section.num("nodes", 256.0, errors) as usize,
            u_lo: section.num_required("u_lo", errors),
            u_hi: section.num_required("u_hi", errors),
            n: section.num("n", 2.0, errors) as usize,
            curvature: section.num("curvature", 1.0, errors),
        },
        "disk-solve" => RunKind::DiskSolve {
            operator: operator_key("operator", errors),
            r_trunc: section.num("r_trunc", 3.0, errors),
            nr: section.num("nr", 48.0, errors) as usize,
            ntheta: section.num("ntheta", 64.0, errors) as usize,
            data: parse_data_kind(section, errors),
        },
        "removability-probe" => {
            let r_sequence = match section.get("r_sequence") {
                None => vec![3.0, 4.0, 5.0, 6.0],
                Some((_, v, line)) => match v.as_list() {
                    Some(l) if l.windows(2).all(|w| w[1] > w[0]) && !l.is_empty() => l,
                    _ => {
                        errors.push(err(Some(*line), "r_sequence must be an increasing list"));
                        vec![3.0, 4.0, 5.0, 6.0]
                    }
                },
            };
            let annulus = match section.get("annulus") {
                None => (1.0, 2.0),
                Some((_, v, line)) => match v.as_list() {
                    Some(l) if l.len() == 2 && l[0] < l[1] => (l[0], l[1]),
                    _ => {
                        errors.push(err(Some(*line), "annulus must be 'lo hi' with lo < hi"));
                        (1.0, 2.0)
                    }
                },
            };
            let data = if section.get("data").is_none() {
                DataKind::Plateau(section.num("plateau", 1.0, errors))
            } else {
                parse_data_kind(section, errors)
            };
            RunKind::Probe {
                operator: operator_key("operator", errors),
                data,
                r_sequence,
                nr_per_unit: section.num("nr_per_unit", 16.0, errors),
                ntheta: section.num("ntheta", 128.0, errors) as usize,
                annulus,
            }
        }
        "" => {
            errors.push(err(Some(section.line), format!("run '{name}' is missing 'kind'")));
            RunKind::Classify
        }
        other => {
            errors.push(err(
                Some(section.line),
                format!(
                    "unknown experiment kind '{other}' (classify | barriers | residuals | \
                     radial-bvp | disk-solve | removability-probe)"
                ),
            ));
            RunKind::Classify
        }
    };
    RunBlock { name: name.clone(), kind, out: section.string("out", &name, errors), quad_tol, solver_tol }
}

/// Parses and validates; returns either a complete config or every
/// problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let (sections, mut errors) = parse_sections(text);
    let mut operators = Vec::new();
    let mut geometry = GeometryDef::default();
    let mut seed = 0u64;
    let mut seen_geometry = false;
    for s in &sections {
        match s.name.as_str() {
            "operator" => operators.push(validate_operator(s, &mut errors)),
            "geometry" => {
                if seen_geometry {
                    errors.push(err(Some(s.line), "duplicate [geometry] section"));
                }
                seen_geometry = true;
                geometry = validate_geometry(s, &mut errors);
            }
            _ => {}
        }
    }
    // operator names must be unique
    for i in 0..operators.len() {
        for j in i + 1..operators.len() {
            if operators[i].name == operators[j].name {
                errors.push(err(None, format!("duplicate operator name '{}'", operators[i].name)));
            }
        }
    }
    let mut runs = Vec::new();
    for s in &sections {
        if s.name == "run" {
            if let Some((_, v, line)) = s.get("seed") {
                match v.as_num() {
                    Some(n) if n >= 0.0 => seed = n as u64,
                    _ => errors.push(err(Some(*line), "seed must be a non-negative integer")),
                }
            }
            runs.push(validate_run(s, &operators, &mut errors));
        }
    }
    if runs.is_empty() {
        errors.push(err(None, "config has no [run] section"));
    }
    // run block names must be unique (they name output directories)
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            if runs[i].name == runs[j].name {
                errors.push(err(None, format!("duplicate run name '{}'", runs[i].name)));
            }
        }
    }
    if errors.is_empty() {
        Ok(ExperimentConfig { seed, operators, geometry, runs })
    } else {
        Err(errors)
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

/// Canonical text form; `parse_config(serialize(c)) == c`.
pub fn serialize(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    for (i, r) in config.runs.iter().enumerate() {
        out.push_str(&format!("[run {}]\n", r.name));
        out.push_str(&format!("kind = {}\n", r.kind.name()));
        out.push_str(&format!("out = {}\n", r.out));
        if i == 0 {
            out.push_str(&format!("seed = {}\n", config.seed));
        }
        out.push_str(&format!("quad_tol = {}\n", fmt_num(r.quad_tol)));
        out.push_str(&format!("solver_tol = {}\n", fmt_num(r.solver_tol)));
        match &r.kind {
            RunKind::Classify => {}
            RunKind::Barriers {
                operator,
                profile,
                delta,
                b,
                rho,
                big_k,
                n,
                curvature,
                d_lo,
                d_hi,
                nodes,
            } => {
                out.push_str(&format!("operator = {operator}\n"));
                out.push_str(&format!("profile = {profile}\n"));
                out.push_str(&format!("delta = {}\n", fmt_num(*delta)));
                out.push_str(&format!("b = {}\n", fmt_num(*b)));
                out.push_str(&format!("rho = {}\n", fmt_num(*rho)));
                out.push_str(&format!("big_k = {}\n", fmt_num(*big_k)));
                out.push_str(&format!("n = {n}\n"));
                out.push_str(&format!("curvature = {}\n", fmt_num(*curvature)));
                out.push_str(&format!("d_lo = {}\n", fmt_num(*d_lo)));
                out.push_str(&format!("d_hi = {}\n", fmt_num(*d_hi)));
                out.push_str(&format!("nodes = {nodes}\n"));
            }
            RunKind::Residuals { operator, field, samples, h, tol } => {
                out.push_str(&format!("operator = {operator}\n"));
                out.push_str(&format!("field = {field}\n"));
                out.push_str(&format!("samples = {samples}\n"));
                out.push_str(&format!("h = {}\n", fmt_num(*h)));
                out.push_str(&format!("tol = {}\n", fmt_num(*tol)));
            }
            RunKind::RadialBvp { operator, r0, r1, nodes, u_lo, u_hi, n, curvature } => {
                out.push_str(&format!("operator = {operator}\n"));
                out.push_str(&format!("r0 = {}\n", fmt_num(*r0)));
                out.push_str(&format!("r1 = {}\n", fmt_num(*r1)));
                out.push_str(&format!("nodes = {nodes}\n"));
                out.push_str(&format!("u_lo = {}\n", fmt_num(*u_lo)));
                out.push_str(&format!("u_hi = {}\n", fmt_num(*u_hi)));
                out.push_str(&format!("n = {n}\n"));
                out.push_str(&format!("curvature = {}\n", fmt_num(*curvature)));
            }
            RunKind::DiskSolve { operator, r_trunc, nr, ntheta, data } => {
                out.push_str(&format!("operator = {operator}\n"));
                out.push_str(&format!("r_trunc = {}\n", fmt_num(*r_trunc)));
                out.push_str(&format!("nr = {nr}\n"));
                out.push_str(&format!("ntheta = {ntheta}\n"));
                match data {
                    DataKind::Constant(v) => {
                        out.push_str("data = constant\n");
                        out.push_str(&format!("value = {}\n", fmt_num(*v)));
                    }
                    DataKind::Plateau(v) => {
                        out.push_str("data = plateau\n");
                        out.push_str(&format!("plateau = {}\n", fmt_num(*v)));
                    }
                    DataKind::SingularTrace { offset } => {
                        out.push_str("data = singular-trace\n");
                        out.push_str(&format!("trace_offset = {}\n", fmt_num(*offset)));
                    }
                }
            }
            RunKind::Probe { operator, data, r_sequence, nr_per_unit, ntheta, annulus } => {
                out.push_str(&format!("operator = {operator}\n"));
                match data {
                    DataKind::Constant(v) => {
                        out.push_str("data = constant\n");
                        out.push_str(&format!("value = {}\n", fmt_num(*v)));
                    }
                    DataKind::Plateau(v) => {
                        out.push_str("data = plateau\n");
                        out.push_str(&format!("plateau = {}\n", fmt_num(*v)));
                    }
                    DataKind::SingularTrace { offset } => {
                        out.push_str("data = singular-trace\n");
                        out.push_str(&format!("trace_offset = {}\n", fmt_num(*offset)));
                    }
                }
                let seq: Vec<String> = r_sequence.iter().map(|v| fmt_num(*v)).collect();
                out.push_str(&format!("r_sequence = {}\n", seq.join(" ")));
                out.push_str(&format!("nr_per_unit = {}\n", fmt_num(*nr_per_unit)));
                out.push_str(&format!("ntheta = {ntheta}\n"));
                out.push_str(&format!("annulus = {} {}\n", fmt_num(annulus.0), fmt_num(annulus.1)));
            }
        }
        out.push('\n');
    }
    for op in &config.operators {
        out.push_str(&format!("[operator {}]\n", op.name));
        out.push_str(&format!("kind = {}\n", op.kind));
        if let Some(f) = &op.formula {
            out.push_str(&format!("formula = {f}\n"));
        }
        for (k, v) in &op.params {
            out.push_str(&format!("{k} = {}\n", fmt_num(*v)));
        }
        if let Some(e) = &op.expect_class {
            out.push_str(&format!("expect_class = {e}\n"));
        }
        out.push('\n');
    }
    let g = &config.geometry;
    out.push_str("[geometry]\n");
    out.push_str(&format!("dimension = {}\n", g.dimension));
    out.push_str(&format!("curvature = {}\n", fmt_num(g.curvature)));
    let pts: Vec<String> = g
        .ideal_points
        .iter()
        .map(|p| p.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" "))
        .collect();
    out.push_str(&format!("ideal_points = {}\n", pts.join(", ")));
    if !g.geodesics.is_empty() {
        let gs: Vec<String> = g.geodesics.iter().map(|(a, b)| format!("{a} {b}")).collect();
        out.push_str(&format!("geodesics = {}\n", gs.join(", ")));
    }
    if !g.horospheres.is_empty() {
        let hs: Vec<String> = g
            .horospheres
            .iter()
            .map(|(i, p)| {
                format!("{i} {}", p.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" "))
            })
            .collect();
        out.push_str(&format!("horospheres = {}\n", hs.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[run]
kind = classify

[operator mg]
kind = minimal_graph
";

    #[test]
    fn minimal_classify_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.runs.len(), 1);
        assert_eq!(cfg.runs[0].kind, RunKind::Classify);
        assert_eq!(cfg.runs[0].quad_tol, asymlab::QUAD_TOL_DEFAULT);
        assert_eq!(cfg.operators.len(), 1);
    }

    #[test]
    fn missing_operator_section_is_named() {
        let errs = parse_config("[run]\nkind = classify\n").unwrap_err();
        assert!(
            errs.iter().any(|e| e.message.contains("[operator]")
                || e.message.contains("operator")),
            "{errs:?}"
        );
    }

    #[test]
    fn small_p_is_rejected_with_message() {
        let text = "
[run]
kind = classify

[operator bad]
kind = p_laplacian
p = 0.5
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("p must exceed 1")), "{errs:?}");
    }

    #[test]
    fn errors_carry_line_numbers_and_accumulate() {
        let text = "
[run]
kind = nonsense
bogus line without equals

[operator]
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.len() >= 3, "expected several errors, got {errs:?}");
        assert!(errs.iter().any(|e| e.line == Some(4)));
    }

    #[test]
    fn round_trip_is_identity() {
        let text = "
[run probe-mg]
kind = removability-probe
operator = mg
plateau = 1.0
r_sequence = 3 4 5 6
ntheta = 64
seed = 7

[operator mg]
kind = minimal_graph
expect_class = removable

[geometry]
dimension = 2
curvature = 1.0
ideal_points = 1 0, -1 0
geodesics = 0 1
horospheres = 0 0 0
";
        let cfg = parse_config(text).unwrap();
        let cfg2 = parse_config(&serialize(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }
}
