use std::fs;

use clap::{Args, ValueEnum};
use opuc::cmv::{
    cmv_matrix, eigenvector_transport_residual, persymmetric_sign_pattern, verify_mirror_relations,
};
use opuc::families::verify_family;
use opuc::inverse::reconstruct_persymmetric;
use opuc::mirror::{dual_weights, mirror_dual, persymmetry_defect, verify_persymmetry_characterizations};
use opuc::poly::{node_derivatives, normalize_angle, sort_by_theta};
use opuc::{OpucSystem, UnitCirclePoint, TOL};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::json;
use crate::source::{Source, SourceArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Phis,
    Spectrum,
    Weights,
    Cmv,
    All,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Which artifacts to include besides the Verblunsky data.
    #[arg(long, value_enum, default_value = "all")]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Require persymmetry and check its characterizations.
    #[arg(long)]
    pub persymmetric: bool,
    /// Mirror-dual relations: final polynomials, weight identity, CMV factors.
    #[arg(long)]
    pub mirror_relations: bool,
    /// Finite orthogonality and paraorthogonality.
    #[arg(long)]
    pub orthogonality: bool,
    /// Everything (the default when no check is selected).
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// θ values in radians: a JSON array, whitespace/comma separated numbers,
    /// a CSV with an `s,theta,weight` header, or an exported document.
    #[arg(long, value_name = "FILE")]
    pub spectrum: String,
    /// ω = exp(iσ).
    #[arg(long, value_name = "SIGMA", allow_negative_numbers = true)]
    pub omega_arg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: String,
    /// Artifacts in the JSON document (CSV always holds nodes and weights).
    #[arg(long, value_enum, default_value = "all")]
    pub emit: Emit,
}

/// A finished command: the document to print and whether it passed.
pub struct Outcome {
    pub document: Option<Value>,
    pub passed: bool,
}

impl Outcome {
    fn pass(document: Value) -> Self {
        Outcome {
            document: Some(document),
            passed: true,
        }
    }
}

fn spectral_record(nodes: &[UnitCirclePoint]) -> Value {
    Value::Array(
        nodes
            .iter()
            .enumerate()
            .map(|(s, p)| json!({ "s": s, "theta": p.theta(), "z": json::complex(p.value()) }))
            .collect(),
    )
}

fn build_payload(src: &Source, emit: Emit) -> Result<Map<String, Value>, CliError> {
    let v = &src.verblunsky;
    let sys = OpucSystem::build(v);
    let mut payload = Map::new();
    payload.insert("n".into(), json!(v.n()));
    payload.insert("verblunsky".into(), json::verblunsky(v));
    if let Some(f) = &src.family {
        payload.insert("family".into(), json!(f.kind.name()));
    }
    let wants = |e: Emit| emit == e || emit == Emit::All;
    if wants(Emit::Phis) {
        payload.insert("phis".into(), Value::Array(sys.phis().iter().map(json::polynomial).collect()));
        payload.insert("norms".into(), json!(sys.norms()));
    }
    if wants(Emit::Spectrum) || wants(Emit::Weights) {
        let nodes = sys.spectrum().map_err(|e| CliError::Verification(e.to_string()))?;
        payload.insert("spectrum".into(), spectral_record(&nodes));
        if wants(Emit::Weights) {
            let sd = sys.weights(&nodes).map_err(|e| CliError::Verification(e.to_string()))?;
            payload.insert("weights".into(), json!(sd.weights()));
        }
    }
    if wants(Emit::Cmv) {
        payload.insert("cmv".into(), json::matrix(&cmv_matrix(v)));
    }
    Ok(payload)
}

pub fn generate(args: &GenerateArgs) -> Result<Outcome, CliError> {
    let src = args.source.load()?;
    Ok(Outcome::pass(json::document(build_payload(&src, args.emit)?)))
}

/// One residual against its tolerance, or an error that prevented computing it.
struct Item {
    residual: Option<f64>,
    tolerance: f64,
    error: Option<String>,
}

impl Item {
    fn new(residual: f64, tolerance: f64) -> Self {
        Item {
            residual: Some(residual),
            tolerance,
            error: None,
        }
    }

    fn from_result(r: opuc::Result<f64>, tolerance: f64) -> Self {
        match r {
            Ok(x) => Item::new(x, tolerance),
            Err(e) => Item {
                residual: None,
                tolerance,
                error: Some(e.to_string()),
            },
        }
    }

    fn passed(&self) -> bool {
        self.residual.is_some_and(|r| r <= self.tolerance)
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("pass".into(), json!(self.passed()));
        m.insert("tolerance".into(), json!(self.tolerance));
        if let Some(r) = self.residual {
            m.insert("residual".into(), json!(r));
        }
        if let Some(e) = &self.error {
            m.insert("error".into(), json!(e));
        }
        Value::Object(m)
    }
}

#[derive(Default)]
struct Section {
    items: Vec<(&'static str, Item)>,
    extra: Map<String, Value>,
}

impl Section {
    fn push(&mut self, name: &'static str, item: Item) {
        self.items.push((name, item));
    }

    fn passed(&self) -> bool {
        self.items.iter().all(|(_, i)| i.passed())
    }

    fn to_json(&self) -> Value {
        let mut m = self.extra.clone();
        for (name, item) in &self.items {
            m.insert((*name).into(), item.to_json());
        }
        Value::Object(m)
    }
}

fn orthogonality_section(sys: &OpucSystem) -> Section {
    let mut sec = Section::default();
    let gram = sys
        .spectrum()
        .and_then(|nodes| sys.weights(&nodes))
        .map(|sd| sys.orthogonality_residual(&sd));
    sec.push("gram", Item::from_result(gram, 1e-8));
    sec.push("paraorthogonality", Item::new(sys.paraorthogonality_residual(), 1e-10));
    sec
}

fn mirror_section(sys: &OpucSystem) -> Section {
    let v = sys.verblunsky();
    let mut sec = Section::default();
    let dual = OpucSystem::build(&mirror_dual(v));
    sec.push("final_polynomial", Item::new(dual.final_poly().max_abs_diff(sys.final_poly()), 1e-10));
    let identity = sys.spectrum().and_then(|nodes| {
        let sd = sys.weights(&nodes)?;
        let hat = dual_weights(sys, &nodes)?;
        let values: Vec<_> = nodes.iter().map(|p| p.value()).collect();
        Ok(sd
            .weights()
            .iter()
            .zip(&hat)
            .zip(node_derivatives(&values))
            .map(|((w, wh), d)| (w * wh * d.norm_sqr() / sys.h_final() - 1.0).abs())
            .fold(0.0, f64::max))
    });
    sec.push("weight_identity", Item::from_result(identity, 1e-8));
    let relations = verify_mirror_relations(v);
    sec.push("cmv_relations", Item::new(relations.max_residual(), 1e-10));
    sec.extra.insert("tau".into(), json::complex(relations.tau));
    sec.push("eigenvector_transport", Item::from_result(eigenvector_transport_residual(v), 1e-9));
    sec
}

/// With `required`, a non-persymmetric sequence fails the section; otherwise
/// the persymmetry-only residuals are simply skipped for it.
fn persymmetry_section(sys: &OpucSystem, required: bool) -> Section {
    let v = sys.verblunsky();
    let mut sec = Section::default();
    let defect = persymmetry_defect(v);
    let persymmetric = defect <= TOL.persymmetry;
    sec.extra.insert("is_persymmetric".into(), json!(persymmetric));
    sec.extra.insert("defect".into(), json!(defect));
    if required {
        sec.push("persymmetry", Item::new(defect, TOL.persymmetry));
    }
    if !persymmetric {
        return sec;
    }
    match verify_persymmetry_characterizations(v) {
        Ok(r) => {
            sec.push("weights", Item::new(r.weights, 1e-8));
            sec.push("modulus", Item::new(r.modulus, 1e-8));
            sec.push("phase", Item::new(r.phase, 1e-8));
            sec.extra.insert("epsilon".into(), json!(r.epsilon.value()));
        }
        Err(e) => sec.push("characterizations", Item::from_result(Err(e), 1e-8)),
    }
    if v.n() % 2 == 1 {
        match persymmetric_sign_pattern(v) {
            Ok(p) => {
                sec.push("commutation", Item::new(p.commutation, 1e-10));
                sec.push("sign_pattern", Item::new(p.relation_residual.max(p.eigen_spread), 1e-8));
            }
            Err(e) => sec.push("sign_pattern", Item::from_result(Err(e), 1e-8)),
        }
    }
    sec
}

pub fn check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let src = args.source.load()?;
    let sys = OpucSystem::build(&src.verblunsky);
    let all = args.all || !(args.persymmetric || args.mirror_relations || args.orthogonality);

    let mut sections: Vec<(&str, Section)> = Vec::new();
    if all || args.orthogonality {
        sections.push(("orthogonality", orthogonality_section(&sys)));
    }
    if all || args.mirror_relations {
        sections.push(("mirror_relations", mirror_section(&sys)));
    }
    if all || args.persymmetric {
        sections.push(("persymmetric", persymmetry_section(&sys, args.persymmetric)));
    }
    if all {
        if let Some(f) = &src.family {
            let mut sec = Section::default();
            sec.push("closed_forms", Item::from_result(verify_family(f).map(|r| r.max_residual()), 1e-8));
            sections.push(("family", sec));
        }
    }

    let passed = sections.iter().all(|(_, s)| s.passed());
    let mut checks = Map::new();
    for (name, sec) in &sections {
        checks.insert((*name).into(), sec.to_json());
    }
    let mut payload = Map::new();
    payload.insert("verblunsky".into(), json::verblunsky(&src.verblunsky));
    payload.insert("checks".into(), Value::Object(checks));
    payload.insert("pass".into(), json!(passed));
    Ok(Outcome {
        document: Some(json::document(payload)),
        passed,
    })
}

/// θ values from a JSON array, an exported document, an `s,theta,weight`
/// CSV, or plain whitespace/comma separated numbers.
fn parse_thetas(text: &str) -> Result<Vec<f64>, CliError> {
    let invalid = |msg: String| CliError::InvalidInput(msg);
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let value: Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed spectrum JSON: {e}")))?;
        let list = match &value {
            Value::Array(items) => items.clone(),
            _ => value
                .pointer("/payload/spectrum")
                .and_then(Value::as_array)
                .ok_or_else(|| invalid("spectrum document has no payload.spectrum array".into()))?
                .iter()
                .map(|node| node.get("theta").cloned().unwrap_or(Value::Null))
                .collect(),
        };
        return list
            .iter()
            .enumerate()
            .map(|(i, x)| x.as_f64().ok_or_else(|| invalid(format!("theta #{i} is not a number"))))
            .collect();
    }
    let mut lines = text.lines().peekable();
    let csv = lines.peek().is_some_and(|l| l.trim() == "s,theta,weight");
    if csv {
        lines.next();
        return lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                line.split(',')
                    .nth(1)
                    .and_then(|t| t.trim().parse().ok())
                    .ok_or_else(|| invalid(format!("CSV row {i} has no numeric theta")))
            })
            .collect();
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| invalid(format!("'{t}' is not a number"))))
        .collect()
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&args.spectrum).map_err(|e| CliError::io(&args.spectrum, e))?;
    let thetas = parse_thetas(&text)?;
    if let Some(bad) = thetas.iter().find(|t| !t.is_finite()) {
        return Err(CliError::InvalidInput(format!("theta {bad} is not finite")));
    }
    let mut nodes: Vec<UnitCirclePoint> =
        thetas.iter().map(|&t| UnitCirclePoint::from_theta(normalize_angle(t))).collect();
    sort_by_theta(&mut nodes);
    let omega = opuc::Complex::from_polar(1.0, args.omega_arg);
    let rec = reconstruct_persymmetric(&nodes, omega).map_err(CliError::reconstruction)?;

    let mut payload = Map::new();
    payload.insert("n".into(), json!(rec.verblunsky.n()));
    payload.insert("verblunsky".into(), json::verblunsky(&rec.verblunsky));
    payload.insert("epsilon".into(), json!(rec.epsilon.value()));
    payload.insert("h_final".into(), json!(rec.h_final));
    payload.insert("round_trip".into(), json!(rec.round_trip));
    payload.insert("division_remainders".into(), json!(rec.division_remainders));
    payload.insert("passing_signs".into(), json!(rec.passing_signs));
    payload.insert("spectrum".into(), spectral_record(&nodes));
    Ok(Outcome::pass(json::document(payload)))
}

pub fn export(args: &ExportArgs) -> Result<Outcome, CliError> {
    let src = args.source.load()?;
    let contents = match args.format {
        Format::Json => {
            let mut text = json::to_canonical_string(&json::document(build_payload(&src, args.emit)?));
            text.push('\n');
            text
        }
        Format::Csv => {
            let sys = OpucSystem::build(&src.verblunsky);
            let sd = sys
                .spectrum()
                .and_then(|nodes| sys.weights(&nodes))
                .map_err(|e| CliError::Verification(e.to_string()))?;
            let mut text = String::from("s,theta,weight\n");
            for (s, (p, w)) in sd.nodes().iter().zip(sd.weights()).enumerate() {
                text.push_str(&format!("{s},{},{}\n", json::format_float(p.theta()), json::format_float(*w)));
            }
            text
        }
    };
    fs::write(&args.out, contents).map_err(|e| CliError::io(&args.out, e))?;
    Ok(Outcome {
        document: None,
        passed: true,
    })
}
