//! The `kdlab` command line.
//!
//! Operators, states and vectors are read from JSON files in the shapes
//! produced by the library's serializers. Exit codes: 0 success or
//! `inside`, 1 parse or configuration error, 2 violated precondition,
//! 3 `outside` (or a failed verification report), 4 `inconclusive`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circle::{circle_is_classical, circle_negativity_search, BandLimitedOperator};
use crate::classify::{enumerate_kd_positive_pure, recognize_kd_positive_pure};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fragment::{
    find_conv_gap_witness_with, is_kd_positive_state, is_kd_real, kd_real_dimension, HermitianOperator, PureFamily, WitnessConfig,
};
use crate::group::{parse_group, FiniteAbelianGroup};
use crate::harmonic::GFunction;
use crate::kd::{char_fn, kd, kd_inverse, CharOrder};
use crate::operator::Operator;
use crate::phase_space::PhaseSpaceFunction;
use crate::verify::{verify_all, VerifyOptions};
use crate::weyl_heisenberg::{wh_conjugate, wh_unitary, WHElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "kdlab", version, about = "Kirkwood-Dirac quasiprobabilities over finite abelian groups and the circle")]
pub struct RunConfig {
    /// Group spec such as Z4 or Z2xZ2.
    #[arg(long, global = true)]
    pub group: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol_structural: Option<f64>,
    #[arg(long, global = true)]
    pub tol_positivity: Option<f64>,
    #[arg(long, global = true)]
    pub tol_membership: Option<f64>,
    #[arg(long, global = true)]
    pub tol_witness: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Iteration budget for witness searches.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Group(GroupCmd),
    #[command(subcommand)]
    Kd(KdCmd),
    /// Characteristic function of an operator.
    Charfn {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value = "standard0")]
        order: CharOrder,
    },
    #[command(subcommand)]
    Wh(WhCmd),
    #[command(subcommand)]
    Pure(PureCmd),
    #[command(subcommand)]
    Check(CheckCmd),
    #[command(subcommand)]
    Member(MemberCmd),
    #[command(subcommand)]
    Witness(WitnessCmd),
    #[command(subcommand)]
    Circle(CircleCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
pub enum GroupCmd {
    Info,
    Subgroups,
}

#[derive(Debug, Subcommand)]
pub enum KdCmd {
    /// KD table of an operator.
    Compute {
        #[arg(long)]
        op: PathBuf,
    },
    /// Operator with a given KD table.
    Invert {
        #[arg(long)]
        table: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum WhCmd {
    /// Conjugate an operator, or apply `U` to a vector.
    Act(WhAct),
}

#[derive(Debug, Args)]
pub struct WhAct {
    #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
    pub op: Option<PathBuf>,
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// Translation, residues separated by commas.
    #[arg(long, default_value = "")]
    pub g: String,
    /// Character label, residues separated by commas.
    #[arg(long, default_value = "")]
    pub chi: String,
    /// Phase angle of the central element in radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phase: f64,
}

#[derive(Debug, Subcommand)]
pub enum PureCmd {
    Enumerate,
    Recognize {
        #[arg(long)]
        vector: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CheckCmd {
    KdReal {
        #[arg(long)]
        op: PathBuf,
    },
    KdPositive {
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum MemberCmd {
    Span {
        #[arg(long)]
        op: PathBuf,
    },
    Conv {
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum WitnessCmd {
    Search,
}

#[derive(Debug, Subcommand)]
pub enum CircleCmd {
    /// Fourier-diagonality verdict.
    Check {
        #[arg(long)]
        op: PathBuf,
    },
    /// Grid-and-refine search for KD negativity.
    Search {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    All {
        /// Random operators per sampled identity.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Command result: a JSON document, an optional CSV rendering and the
/// process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub value: Value,
    pub csv: Option<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Self { value, csv: None, exit_code: 0 }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::GroupMismatch(_) | Error::Malformed(_) | Error::Io(_) | Error::Json(_) => 1,
        Error::BoundExceeded { .. }
        | Error::UnsupportedOrder(_)
        | Error::Precondition(_)
        | Error::NotNormalized(_)
        | Error::NotHermitian(_)
        | Error::NotState(_)
        | Error::OutOfBand { .. } => 2,
    }
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            structural: self.tol_structural.unwrap_or(d.structural),
            positivity: self.tol_positivity.unwrap_or(d.positivity),
            membership: self.tol_membership.unwrap_or(d.membership),
            witness: self.tol_witness.unwrap_or(d.witness),
        }
    }

    fn group(&self) -> Result<FiniteAbelianGroup> {
        match &self.group {
            Some(s) => parse_group(s),
            None => Err(Error::Malformed("this command needs --group".into())),
        }
    }

    /// Checks a file's group against `--group` when both are present.
    fn reconcile(&self, found: &FiniteAbelianGroup) -> Result<()> {
        if let Some(s) = &self.group {
            let want = parse_group(s)?;
            if &want != found {
                return Err(Error::GroupMismatch(format!("--group {want} but the input lives on {found}")));
            }
        }
        Ok(())
    }

    fn operator(&self, path: &Path) -> Result<Operator> {
        let op: Operator = read_json(path)?;
        self.reconcile(&op.group)?;
        Ok(op)
    }

    fn hermitian(&self, path: &Path) -> Result<HermitianOperator> {
        HermitianOperator::with_tol(self.operator(path)?, self.tolerances().structural)
    }

    fn vector(&self, path: &Path) -> Result<GFunction> {
        let v: GFunction = read_json(path)?;
        self.reconcile(&v.group)?;
        if v.values.len() != v.group.order() {
            return Err(Error::GroupMismatch(format!("{} values for a group of order {}", v.values.len(), v.group.order())));
        }
        Ok(v)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_residues(group: &FiniteAbelianGroup, text: &str) -> Result<usize> {
    if text.trim().is_empty() {
        return Ok(0);
    }
    let t: Vec<usize> = text
        .split([',', '-'])
        .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Malformed(format!("bad residue '{p}': {e}"))))
        .collect::<Result<_>>()?;
    group.index_of_tuple(&t)
}

fn operator_csv(op: &Operator) -> String {
    let n = op.dim();
    let mut s = String::from("row,col,re,im\n");
    for i in 0..n {
        for j in 0..n {
            let v = op.kernel[(i, j)];
            let _ = writeln!(s, "{},{},{:?},{:?}", op.group.element(i), op.group.element(j), v.re, v.im);
        }
    }
    s
}

/// Runs one command.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let tols = cfg.tolerances();
    match &cfg.command {
        Command::Group(GroupCmd::Info) => {
            let g = cfg.group()?;
            let subgroups = g.enumerate_subgroups()?.len();
            Ok(Outcome::ok(json!({
                "group": g.to_string(),
                "factors": g.factors(),
                "order": g.order(),
                "rank": g.rank(),
                "subgroups": subgroups,
                "kd_positive_pure_states": g.order() * subgroups,
                "kd_real_dimension": kd_real_dimension(&g),
                "doubling_invertible": g.doubling().invertible,
            })))
        }
        Command::Group(GroupCmd::Subgroups) => {
            let g = cfg.group()?;
            let subs = g.enumerate_subgroups()?;
            let list: Vec<Value> = subs
                .iter()
                .map(|h| {
                    let elems: Vec<_> = h.elements.iter().map(|&e| g.element(e)).collect();
                    json!({ "order": h.order(), "elements": elems })
                })
                .collect();
            let mut csv = String::from("subgroup,order,elements\n");
            for (i, h) in subs.iter().enumerate() {
                let elems: Vec<String> = h.elements.iter().map(|&e| g.element(e).to_string()).collect();
                let _ = writeln!(csv, "{i},{},{}", h.order(), elems.join(" "));
            }
            Ok(Outcome::ok(json!({ "group": g.to_string(), "count": subs.len(), "subgroups": list })).with_csv(csv))
        }
        Command::Kd(KdCmd::Compute { op }) => {
            let t = kd(&cfg.operator(op)?);
            Ok(Outcome::ok(to_value(&t)?).with_csv(t.to_csv()))
        }
        Command::Kd(KdCmd::Invert { table }) => {
            let t: PhaseSpaceFunction = read_json(table)?;
            cfg.reconcile(&t.group)?;
            let t = PhaseSpaceFunction::new(&t.group.clone(), t.values)?;
            let op = kd_inverse(&t);
            Ok(Outcome::ok(to_value(&op)?).with_csv(operator_csv(&op)))
        }
        Command::Charfn { op, order } => {
            let t = char_fn(&cfg.operator(op)?, *order)?;
            Ok(Outcome::ok(to_value(&t)?).with_csv(t.to_csv()))
        }
        Command::Wh(WhCmd::Act(act)) => {
            let group = match (&act.op, &act.vector) {
                (Some(p), _) => cfg.operator(p)?.group,
                (None, Some(p)) => cfg.vector(p)?.group,
                (None, None) => return Err(Error::Malformed("wh act needs --op or --vector".into())),
            };
            let g = parse_residues(&group, &act.g)?;
            let c = parse_residues(&group, &act.chi)?;
            let w = WHElement::from_indices(&group, g, c, Complex64::from_polar(1.0, act.phase))?;
            if let Some(p) = &act.op {
                let out = wh_conjugate(&cfg.operator(p)?, &w)?;
                Ok(Outcome::ok(json!({ "element": w, "operator": out })).with_csv(operator_csv(&out)))
            } else {
                let v = cfg.vector(act.vector.as_ref().expect("checked above"))?;
                let out = wh_unitary(&group, &w)?.apply(&v);
                Ok(Outcome::ok(json!({ "element": w, "vector": out })))
            }
        }
        Command::Pure(PureCmd::Enumerate) => {
            let g = cfg.group()?;
            let fam = enumerate_kd_positive_pure(&g)?;
            Ok(Outcome::ok(json!({ "group": g.to_string(), "count": fam.len(), "states": fam })))
        }
        Command::Pure(PureCmd::Recognize { vector }) => {
            let v = cfg.vector(vector)?;
            let found = recognize_kd_positive_pure(&v, tols.positivity)?;
            Ok(Outcome::ok(json!({ "recognized": found.is_some(), "match": found })))
        }
        Command::Check(CheckCmd::KdReal { op }) => {
            let a = cfg.hermitian(op)?;
            Ok(Outcome::ok(to_value(&is_kd_real(&a, tols.structural))?))
        }
        Command::Check(CheckCmd::KdPositive { state }) => {
            let rho = cfg.hermitian(state)?;
            Ok(Outcome::ok(to_value(&is_kd_positive_state(&rho, tols.positivity)?)?))
        }
        Command::Member(MemberCmd::Span { op }) => {
            let a = cfg.hermitian(op)?;
            let res = PureFamily::new(a.group())?.span_membership(&a, tols.membership)?;
            Ok(Outcome { exit_code: res.verdict.exit_code(), ..Outcome::ok(to_value(&res)?) })
        }
        Command::Member(MemberCmd::Conv { state }) => {
            let rho = cfg.hermitian(state)?;
            let res = PureFamily::new(rho.group())?.conv_membership(&rho, tols.membership)?;
            Ok(Outcome { exit_code: res.verdict.exit_code(), ..Outcome::ok(to_value(&res)?) })
        }
        Command::Witness(WitnessCmd::Search) => {
            let g = cfg.group()?;
            let budget = cfg.budget.unwrap_or(10_000);
            let wc = WitnessConfig { gap_tol: tols.witness, membership_tol: tols.membership, ..Default::default() };
            let s = find_conv_gap_witness_with(&g, cfg.seed, budget, &wc)?;
            Ok(Outcome::ok(to_value(&s)?))
        }
        Command::Circle(CircleCmd::Check { op }) => {
            let a: BandLimitedOperator = read_json(op)?;
            Ok(Outcome::ok(to_value(&circle_is_classical(&a, tols.positivity)?)?))
        }
        Command::Circle(CircleCmd::Search { op, grid }) => {
            let a: BandLimitedOperator = read_json(op)?;
            let grid = grid.unwrap_or_else(|| (4 * a.band() + 4).max(1024));
            let r = circle_negativity_search(&a, grid)?;
            let mut v = to_value(&r)?;
            v["violation"] = json!(r.violation());
            Ok(Outcome::ok(v))
        }
        Command::Verify(VerifyCmd::All { samples }) => {
            let g = cfg.group()?;
            let opts = VerifyOptions {
                seed: cfg.seed,
                samples: *samples,
                witness_budget: cfg.budget.unwrap_or(VerifyOptions::default().witness_budget),
                tolerances: tols,
            };
            let rep = verify_all(&g, &opts)?;
            let mut csv = String::from("name,status,measured,tolerance,anchor\n");
            for c in &rep.checks {
                let status = serde_json::to_value(c.status)?;
                let _ = writeln!(csv, "{},{},{:?},{:?},\"{}\"", c.name, status.as_str().unwrap_or(""), c.measured, c.tolerance, c.anchor);
            }
            Ok(Outcome { exit_code: if rep.pass { 0 } else { 3 }, ..Outcome::ok(to_value(&rep)?) }.with_csv(csv))
        }
    }
}

/// `%g`-style rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&e) {
        let s = format!("{x:.5e}");
        let (m, exp) = s.split_once('e').expect("exponent");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{exp}")
    } else {
        let s = format!("{:.*}", (5 - e).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", parts.join(", "))));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => sig6(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Two-column `key value` rendering of a JSON document.
pub fn render_table(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, x) in rows {
        let _ = writeln!(s, "{k:<width$}  {x}");
    }
    s
}

pub fn render(outcome: &Outcome, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&outcome.value)? + "\n"),
        Format::Table => Ok(render_table(&outcome.value)),
        Format::Csv => outcome.csv.clone().ok_or_else(|| Error::Malformed("csv output is not available for this command".into())),
    }
}

/// Parses `args`, runs the command, writes the output and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = run(&cfg).and_then(|o| Ok((render(&o, cfg.format)?, o.exit_code)));
    match result {
        Ok((text, code)) => {
            let written = match &cfg.out {
                Some(p) => fs::write(p, text.as_bytes()).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
