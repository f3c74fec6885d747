use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use p1wedge::diagrams::{bracket_expression, enumerate_k, g_n_connected, Expr, GradedOp};
use p1wedge::exactseries::rational;
use p1wedge::gwformulas::{
    cap_invariant, connected_tube_invariant, one_point_tube_connected, tube_invariant, ContactData, Insertion,
};
use p1wedge::johnson::{bracket_at, default_samples, relative_at_s, JohnsonMode};
use p1wedge::suites::{run_suite, SUITES};
use p1wedge::wedgeops::{connected_vev, parse_operator, vev, WedgeOperator};
use p1wedge::{wdvv, Error, Rational, Series};

#[derive(Parser)]
#[command(name = "p1wedge", version, about = "Exact relative invariants of P^1 from the infinite wedge")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Append decimal approximations (marked with ≈) to non-integral values.
    #[arg(long, global = true)]
    decimal: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    T0,
    Full,
}

#[derive(clap::Args)]
struct Contact {
    /// Contact orders at 0, comma separated; negative entries allowed.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu0: Vec<i64>,
    /// Contact orders at infinity; omit for the cap.
    #[arg(long = "muInf", value_delimiter = ',', allow_hyphen_values = true)]
    mu_inf: Vec<i64>,
    /// Stationary insertions τ_k(ω), given by their k.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<u32>,
    /// Contact data as a JSON file instead of the flags above.
    #[arg(long, conflicts_with_all = ["mu0", "mu_inf", "tau"])]
    input: Option<std::path::PathBuf>,
}

impl Contact {
    fn data(&self) -> Result<ContactData, Error> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            return ContactData::from_json(&text);
        }
        if self.mu0.is_empty() {
            return Err(Error::Config("--mu0 is required".into()));
        }
        Ok(ContactData::new(self.mu0.clone(), self.mu_inf.clone(), self.tau.iter().map(|k| Insertion::omega(*k)).collect()))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// A cap or tube invariant from the closed-form operator formulas.
    Invariant {
        #[command(flatten)]
        contact: Contact,
        /// Connected instead of disconnected (tubes only).
        #[arg(long)]
        connected: bool,
    },
    /// Coefficients of the connected one-point tube function.
    Gf {
        #[command(flatten)]
        contact: Contact,
        /// Report τ_k for k + 1 < order.
        #[arg(long, default_value_t = 8)]
        order: i64,
    },
    /// Vacuum expectation of an operator expression.
    Vev {
        /// Prefix expression, e.g. "(* (alpha 1) (E 0 z) (alpha -1))".
        #[arg(long)]
        expr: String,
        /// Connected expectation over the factors of a top-level product.
        #[arg(long)]
        connected: bool,
        /// Truncation order of every series variable.
        #[arg(long, default_value_t = 6)]
        order: i64,
        /// Energy cap for factors that lower energy without bound.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Finite-r orbifold bracket and its polynomial dependence on r.
    Johnson {
        #[command(flatten)]
        contact: Contact,
        #[arg(long)]
        r: i64,
        /// Defaults to r for a tube and 1 for a cap.
        #[arg(long)]
        s: Option<i64>,
        #[arg(long, value_enum, default_value_t = Mode::T0)]
        mode: Mode,
        /// Values of r for the polynomial fit.
        #[arg(long, value_delimiter = ',')]
        samples: Vec<i64>,
    },
    /// Valid interaction diagrams for operators R_m with the given subscripts.
    Diagrams {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        energies: Vec<i64>,
    },
    /// Genus-zero invariant I_d([0]_a, [0]_b.., [∞]_d) via WDVV.
    Wdvv {
        #[arg(long)]
        a: i64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<i64>,
        #[arg(long)]
        d: i64,
    },
    /// Run verification suites; nonzero exit status on any failure.
    Verify {
        /// Suite names; all of them when omitted.
        #[arg(long)]
        suite: Vec<String>,
    },
}

fn s(x: &Rational) -> Value {
    Value::String(rational::to_string(x))
}

fn invariant(contact: &Contact, connected: bool) -> Result<Value, Error> {
    let cd = contact.data()?;
    let v = match (cd.mu_inf.is_empty(), connected) {
        (true, true) => return Err(Error::Config("--connected applies to tubes only".into())),
        (true, false) => cap_invariant(&cd)?,
        (false, true) => connected_tube_invariant(&cd)?,
        (false, false) => tube_invariant(&cd)?,
    };
    Ok(json!({ "value": s(&v) }))
}

fn gf(contact: &Contact, order: i64) -> Result<Value, Error> {
    if order < 1 {
        return Err(Error::Config("--order must be at least 1".into()));
    }
    let cd = contact.data()?;
    let f = one_point_tube_connected(&cd, order - 1)?;
    let mut out = Map::new();
    for k in 0..order - 1 {
        let c = f.coeff1(k + 1)?;
        if c != Rational::from_integer(0.into()) {
            out.insert(format!("tau{k}"), s(&c));
        }
    }
    Ok(Value::Object(out))
}

fn vev_cmd(expr: &str, connected: bool, order: i64, cap: Option<u64>) -> Result<Value, Error> {
    let (op, _) = parse_operator::<Series>(expr, order)?;
    let factors = match op {
        WedgeOperator::Product(f) => f,
        other => vec![other],
    };
    let v = if connected { connected_vev(&factors, cap)? } else { vev(&factors, cap)? };
    Ok(match v.constant_value() {
        Some(c) => json!({ "value": s(&c) }),
        None => json!({ "value": v.to_json(), "rendered": v.render() }),
    })
}

fn johnson(contact: &Contact, r: i64, s_arg: Option<i64>, mode: Mode, samples: &[i64]) -> Result<Value, Error> {
    let cd = contact.data()?;
    let s_val = s_arg.unwrap_or(if cd.mu_inf.is_empty() { 1 } else { r });
    let mode = match mode {
        Mode::T0 => JohnsonMode::TZero,
        Mode::Full => JohnsonMode::Full,
    };
    let poly = bracket_at(&cd, r, s_val, mode)?;
    let samples = if samples.is_empty() { default_samples(&cd, 5)? } else { samples.to_vec() };
    let (rel, fit) = relative_at_s(&cd, s_val == 1 && !cd.mu_inf.is_empty(), &samples)?;
    let mut out = json!({
        "value": s(&poly.coeff(0)),
        "r_polynomial": fit.coeffs.iter().map(s).collect::<Vec<_>>(),
        "relative": s(&rel),
        "samples": fit.samples,
    });
    if matches!(mode, JohnsonMode::Full) {
        let t: Map<String, Value> = poly.terms().map(|(e, c)| (format!("t^{e}"), s(c))).collect();
        out["t_polynomial"] = Value::Object(t);
    }
    Ok(out)
}

fn diagrams(subscripts: &[i64]) -> Result<Value, Error> {
    // R_m has r-energy -m
    let energies: Vec<i64> = subscripts.iter().map(|m| -m).collect();
    let n = energies.len();
    let mut list = Vec::new();
    for j in enumerate_k(&energies)? {
        let mut v = serde_json::to_value(&j).map_err(|e| Error::Integrity(e.to_string()))?;
        v["bracket"] = Value::String(bracket_expression(&j, n)?);
        v["connected"] = Value::Bool(j.is_connected());
        list.push(v);
    }
    let names: Vec<GradedOp<Expr>> =
        energies.iter().enumerate().map(|(i, k)| GradedOp::new(Expr(format!("O{}", i + 1)), *k, 0)).collect();
    let g = g_n_connected(&names)?.0;
    Ok(json!({ "diagrams": list, "connected_sum": if g.is_empty() { "0".to_string() } else { g } }))
}

fn wdvv_cmd(a: i64, b: &[i64], d: i64) -> Result<Value, Error> {
    let rep = wdvv::report(a, b, d)?;
    Ok(json!({ "value": rep.value, "closed_form": rep.closed_form, "residual_check": rep.residual_check }))
}

fn verify(names: &[String]) -> Result<(Value, bool), Error> {
    let names: Vec<String> = if names.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let mut reports = Vec::new();
    let mut ok = true;
    for n in &names {
        let rep = run_suite(n)?;
        ok &= rep.pass;
        reports.push(serde_json::to_value(&rep).map_err(|e| Error::Integrity(e.to_string()))?);
    }
    Ok((json!({ "pass": ok, "suites": reports }), ok))
}

/// Adds `≈ decimal` to every string holding a non-integral rational.
fn with_decimals(v: Value) -> Value {
    match v {
        Value::String(t) => match rational::parse(&t) {
            Ok(x) if !x.is_integer() => Value::String(format!("{t} ≈ {}", rational::to_decimal(&x, 10))),
            _ => Value::String(t),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(with_decimals).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, with_decimals(v))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(t) => t.clone(),
        other => other.to_string(),
    }
}

fn pretty(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if matches!(x, Value::Object(_)) || matches!(x, Value::Array(a) if a.iter().any(|e| e.is_object())) {
                    out.push_str(&format!("{pad}{k}:\n"));
                    pretty(x, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", scalar(x)));
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                pretty(x, indent + 1, out);
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

/// Coefficient tables (`tauK` keys) become `k,value` rows; anything else is
/// written as `key,value` with nested values in compact JSON.
fn csv_text(v: &Value) -> Result<String, Error> {
    let err = |e: csv::Error| Error::Integrity(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let obj = v.as_object().cloned().unwrap_or_default();
    let table = !obj.is_empty() && obj.keys().all(|k| k.strip_prefix("tau").is_some_and(|n| n.parse::<u32>().is_ok()));
    if table {
        w.write_record(["k", "value"]).map_err(err)?;
        let mut rows: Vec<(u32, String)> =
            obj.iter().map(|(k, x)| (k[3..].parse().expect("checked above"), scalar(x))).collect();
        rows.sort();
        for (k, x) in rows {
            w.write_record([k.to_string(), x]).map_err(err)?;
        }
    } else {
        w.write_record(["key", "value"]).map_err(err)?;
        for (k, x) in &obj {
            w.write_record([k.clone(), scalar(x)]).map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Integrity(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Integrity(e.to_string()))
}

fn render(v: &Value, format: Format) -> Result<String, Error> {
    Ok(match format {
        Format::Json => format!("{v}\n"),
        Format::Pretty => {
            let mut out = String::new();
            pretty(v, 0, &mut out);
            out
        }
        Format::Csv => csv_text(v)?,
    })
}

fn run(cli: &Cli) -> Result<(Value, bool), Error> {
    let v = match &cli.cmd {
        Cmd::Invariant { contact, connected } => invariant(contact, *connected)?,
        Cmd::Gf { contact, order } => gf(contact, *order)?,
        Cmd::Vev { expr, connected, order, cap } => vev_cmd(expr, *connected, *order, *cap)?,
        Cmd::Johnson { contact, r, s, mode, samples } => johnson(contact, *r, *s, *mode, samples)?,
        Cmd::Diagrams { energies } => diagrams(energies)?,
        Cmd::Wdvv { a, b, d } => wdvv_cmd(*a, b, *d)?,
        Cmd::Verify { suite } => return verify(suite),
    };
    Ok((v, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|(v, ok)| {
        let v = if cli.decimal { with_decimals(v) } else { v };
        Ok((render(&v, cli.format)?, ok))
    }) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
