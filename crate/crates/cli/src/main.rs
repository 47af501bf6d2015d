//! `novikov` — certified computations in the Novikov completion of a group
//! ring, driven by JSON job files.
//!
//! Every subcommand reads one JSON document (a file path, or `-` for
//! standard input), computes with certified truncations, and prints one
//! report to standard output. Reports are canonical: object keys are
//! alphabetical, series terms are sorted by weight and then by element, and
//! rerunning a command on the same input reproduces the output bytes
//! exactly.
//!
//! The exit status encodes the failure family: `0` success, `1` unreadable
//! or malformed input, `2` a mathematical refusal — a matrix that is not
//! regular, a cutoff that is not strictly negative, a depth request below
//! the certified bound, or a chain that is not a cycle.

use std::io::Read;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use novikov_core::chains::{extract_descent, mapping_cone, novikov_cokernel};
use novikov_core::hochschild::{
    boundary_one, boundary_two, class_pairing, cycle_class_series, Chain1, Chain2,
};
use novikov_core::json as wire;
use novikov_core::level::{parse_level, parse_rational, rational_int};
use novikov_core::orbits::{
    eta_from_descent_with_depth, torsion_from_descent, zeta_from_eta, EtaFunction,
};
use novikov_core::regmat::{abelian_determinant, neumann_inverse_with_depth, regularity};
use novikov_core::{genus2, Error, GroupElement, Level, Rational, TorsionClass, Weighting};
use serde_json::{json, Map, Value};

/// Phrase stamped on every closed-orbit report, fixing how class terms are
/// to be read.
const CLASS_SEMANTICS: &str =
    "conjugacy classes of the coefficient group, keyed by one representative word";

#[derive(Parser)]
#[command(
    name = "novikov",
    version,
    about = "Certified series computations over Novikov completions of group rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    /// Canonical JSON: alphabetical keys, deterministic term order
    Json,
    /// Line-oriented plain text
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Section {
    /// Closed-orbit series (signed traces of matrix powers, by class)
    Eta,
    /// Exponential of the abelianized orbit series
    Zeta,
    /// Torsion class with its abelianized determinant
    Torsion,
    /// Everything above
    All,
}

impl Section {
    fn wants_eta(self) -> bool {
        matches!(self, Section::Eta | Section::All)
    }
    fn wants_zeta(self) -> bool {
        matches!(self, Section::Zeta | Section::All)
    }
    fn wants_torsion(self) -> bool {
        matches!(self, Section::Torsion | Section::All)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide regularity of a square matrix and print the certificate
    ///
    /// Input: {"group", "weights", "matrix"}. The certificate carries the
    /// maximum cycle mean of the weighted support digraph; when the mean is
    /// not negative it also carries a witness cycle, vertices numbered from
    /// one. A non-regular matrix exits 2 after printing the report.
    CheckRegular {
        /// JSON job file; `-` reads standard input
        input: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Invert 1 - A for a regular square matrix A, certified below a cutoff
    ///
    /// Input: {"group", "weights", "matrix"}. The inverse is the geometric
    /// power sum, truncated at the cutoff, and is verified against its
    /// defining identity before printing. The report records the certified
    /// summation depth.
    Invert {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level, a strictly negative rational such as -4 or -7/2
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        /// Summation depth request; must be at least the certified depth
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Torsion class of a descent family, with its abelianized determinant
    ///
    /// Input: {"group", "weights", "matrices": [{"dim", "matrix"}, …]}.
    /// Dimension i contributes 1 - A_i with sign (-1)^(i+1); the determinant
    /// multiplies the abelianized summand determinants, inverting the
    /// negative ones as certified geometric series, and is reduced so that
    /// its leading term is 1.
    Torsion {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level, a strictly negative rational
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Closed-orbit series of a descent family
    ///
    /// Input: as for `torsion`. The series sums (-1)^(i+1)/m times the
    /// conjugacy-projected trace of A_i^m over all certified powers m, one
    /// term per conjugacy class above the cutoff.
    Eta {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level, a strictly negative rational
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        /// Power-sum depth request; must be at least the certified depth
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exponential of the abelianized closed-orbit series
    ///
    /// Input: as for `eta`. Always a series with integer structure when the
    /// descent family comes from a based free chain complex; the report
    /// keeps exact rational coefficients regardless.
    Zeta {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level, a strictly negative rational
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        /// Power-sum depth request for the underlying orbit series
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Verify boundary identities of a tensor chain
    ///
    /// Input: {"group", "weights", "chain": [{"coeff", "legs": […]}, …]}
    /// with an optional "cutoff". All terms must have the same number of
    /// legs, each a word in the generators. Three legs: the boundary is
    /// computed and checked to die under both the degree-one boundary and
    /// the class pairing. Two legs: the chain must be a cycle (exit 2
    /// otherwise) and its class series is printed, truncated at --cutoff.
    HochschildCheck {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level for the class series of a two-leg cycle
        #[arg(long, allow_hyphen_values = true)]
        cutoff: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Quotient complex, torsion, and orbit series of a based subcomplex pair
    ///
    /// Input: {"group", "weights", "sub", "ambient", "inclusion", "flow"}.
    /// The report always carries the mapping-cone ranks and the certified
    /// quotient complex; --what selects the derived sections.
    Cone {
        /// JSON job file; `-` reads standard input
        input: String,
        /// Truncation level, a strictly negative rational
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        /// Power-sum depth request for the orbit series
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value = "all")]
        what: Section,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run a built-in example and print its reference values
    ///
    /// `genus2` is the descent family of a circle-valued Morse function on
    /// a closed orientable surface of genus two with one down-pointing
    /// generator: two matrices, (a2 a1) in dimension zero and (a1) in
    /// dimension one. The report embeds the descent data in the exact shape
    /// the `eta`, `zeta`, and `torsion` commands accept.
    Example {
        /// Example name; `genus2` is the only one built in
        name: String,
        /// Truncation level, a strictly negative rational
        #[arg(long, allow_hyphen_values = true)]
        cutoff: String,
        /// Power-sum depth request for the orbit series
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value = "all")]
        what: Section,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

impl Command {
    fn format(&self) -> Format {
        match self {
            Command::CheckRegular { format, .. }
            | Command::Invert { format, .. }
            | Command::Torsion { format, .. }
            | Command::Eta { format, .. }
            | Command::Zeta { format, .. }
            | Command::HochschildCheck { format, .. }
            | Command::Cone { format, .. }
            | Command::Example { format, .. } => *format,
        }
    }
}

/// A finished report: the canonical JSON value, its plain-text rendering,
/// and the process exit status.
struct Report {
    json: Value,
    text: String,
    exit: u8,
}

impl Report {
    fn ok(json: Value, text: String) -> Report {
        Report {
            json,
            text,
            exit: 0,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are input problems (exit 1); --help and
            // --version are successes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.command.format();
    match run(cli.command) {
        Ok(report) => {
            match format {
                Format::Json => print!("{}", wire::to_pretty(&report.json)),
                Format::Text => print!("{}", report.text),
            }
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_mathematical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<Report, Error> {
    match command {
        Command::CheckRegular { input, .. } => check_regular(&input),
        Command::Invert {
            input,
            cutoff,
            depth,
            ..
        } => invert(&input, &cutoff, depth),
        Command::Torsion { input, cutoff, .. } => torsion(&input, &cutoff),
        Command::Eta {
            input,
            cutoff,
            depth,
            ..
        } => eta(&input, &cutoff, depth),
        Command::Zeta {
            input,
            cutoff,
            depth,
            ..
        } => zeta(&input, &cutoff, depth),
        Command::HochschildCheck { input, cutoff, .. } => hochschild_check(&input, cutoff),
        Command::Cone {
            input,
            cutoff,
            depth,
            what,
            ..
        } => cone(&input, &cutoff, depth, what),
        Command::Example {
            name,
            cutoff,
            depth,
            what,
            ..
        } => example(&name, &cutoff, depth, what),
    }
}

// ---------------------------------------------------------------------------
// input plumbing
// ---------------------------------------------------------------------------

fn schema(reason: String) -> Error {
    Error::Schema { reason }
}

fn read_input(path: &str) -> Result<Value, Error> {
    let raw = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| schema(format!("cannot read standard input: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {path}: {e}")))?
    };
    serde_json::from_str(&raw).map_err(|e| schema(format!("{path} is not valid JSON: {e}")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Error> {
    v.get(key)
        .ok_or_else(|| schema(format!("missing key `{key}`")))
}

/// Parse a cutoff flag and insist that it is strictly negative; every
/// truncation in the completed ring certifies terms *above* the cutoff, so a
/// non-negative level would certify nothing.
fn negative_cutoff(text: &str) -> Result<Rational, Error> {
    let q = parse_rational(text)?;
    if q >= rational_int(0) {
        return Err(Error::CutoffNotNegative {
            requested: text.trim().to_string(),
        });
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// shared report sections
// ---------------------------------------------------------------------------

fn eta_section(eta: &EtaFunction, t: &Rational) -> Value {
    json!({
        "class_semantics": CLASS_SEMANTICS,
        "cutoff": wire::rational_value(t),
        "depth": eta.depth(),
        "series": wire::class_series_to_value(eta.series()),
    })
}

fn zeta_section(eta: &EtaFunction, t: &Rational) -> Result<Value, Error> {
    let z = zeta_from_eta(eta, t)?;
    Ok(json!({
        "cutoff": wire::rational_value(t),
        "depth": eta.depth(),
        "series": wire::series_to_value(&z),
    }))
}

fn torsion_section(tc: &TorsionClass, t: &Rational) -> Result<Value, Error> {
    let det = abelian_determinant(tc, t)?;
    let mut obj = Map::new();
    obj.insert(
        "abelian_determinant".into(),
        wire::series_to_value(&det),
    );
    obj.insert("cutoff".into(), wire::rational_value(t));
    obj.insert("summands".into(), wire::torsion_to_value(tc)["summands"].take());
    Ok(Value::Object(obj))
}

// ---------------------------------------------------------------------------
// command handlers
// ---------------------------------------------------------------------------

fn check_regular(input: &str) -> Result<Report, Error> {
    let v = read_input(input)?;
    let xi = wire::parse_weighting(&v)?;
    let m = wire::parse_square_matrix(field(&v, "matrix")?, &xi)?;
    let cert = regularity(&m)?;
    let out = json!({
        "certificate": wire::certificate_to_value(&cert),
        "n": m.dim()?,
    });
    let text = certificate_text(&out["certificate"]);
    Ok(Report {
        exit: if cert.is_regular() { 0 } else { 2 },
        json: out,
        text,
    })
}

fn invert(input: &str, cutoff: &str, depth: Option<u64>) -> Result<Report, Error> {
    let t = negative_cutoff(cutoff)?;
    let v = read_input(input)?;
    let xi = wire::parse_weighting(&v)?;
    let m = wire::parse_square_matrix(field(&v, "matrix")?, &xi)?;
    let cert = regularity(&m)?;
    let (inverse, used) = neumann_inverse_with_depth(&m, &t, depth)?;
    let out = json!({
        "certificate": wire::certificate_to_value(&cert),
        "cutoff": wire::rational_value(&t),
        "depth": used,
        "inverse": wire::square_matrix_to_value(&inverse),
    });
    let mut text = String::new();
    text += &format!("cutoff: {}\n", scalar_text(&out["cutoff"]));
    text += &format!("depth: {used}\n");
    text += &certificate_text(&out["certificate"]);
    text += "inverse:\n";
    text += &matrix_text(&out["inverse"]);
    Ok(Report::ok(out, text))
}

fn torsion(input: &str, cutoff: &str) -> Result<Report, Error> {
    let t = negative_cutoff(cutoff)?;
    let data = wire::parse_descent(&read_input(input)?)?;
    let tc = torsion_from_descent(&data)?;
    let out = torsion_section(&tc, &t)?;
    let text = torsion_text(&out);
    Ok(Report::ok(out, text))
}

fn eta(input: &str, cutoff: &str, depth: Option<u64>) -> Result<Report, Error> {
    let t = negative_cutoff(cutoff)?;
    let data = wire::parse_descent(&read_input(input)?)?;
    let eta = eta_from_descent_with_depth(&data, &t, depth)?;
    let out = eta_section(&eta, &t);
    let text = eta_text(&out);
    Ok(Report::ok(out, text))
}

fn zeta(input: &str, cutoff: &str, depth: Option<u64>) -> Result<Report, Error> {
    let t = negative_cutoff(cutoff)?;
    let data = wire::parse_descent(&read_input(input)?)?;
    let eta = eta_from_descent_with_depth(&data, &t, depth)?;
    let out = zeta_section(&eta, &t)?;
    let text = zeta_text(&out);
    Ok(Report::ok(out, text))
}

fn cone(input: &str, cutoff: &str, depth: Option<u64>, what: Section) -> Result<Report, Error> {
    let t = negative_cutoff(cutoff)?;
    let data = wire::parse_cone(&read_input(input)?)?;
    let cone_complex = mapping_cone(&data)?;
    let (quotient, tc) = novikov_cokernel(&data, &t)?;

    let mut obj = Map::new();
    obj.insert("cone_ranks".into(), json!(cone_complex.ranks()));
    obj.insert("cutoff".into(), wire::rational_value(&t));
    obj.insert("quotient".into(), wire::complex_to_value(&quotient));
    if what.wants_eta() || what.wants_zeta() {
        let descent = extract_descent(&data)?;
        let eta = eta_from_descent_with_depth(&descent, &t, depth)?;
        if what.wants_eta() {
            obj.insert("eta".into(), eta_section(&eta, &t));
        }
        if what.wants_zeta() {
            obj.insert("zeta".into(), zeta_section(&eta, &t)?);
        }
    }
    if what.wants_torsion() {
        obj.insert("torsion".into(), torsion_section(&tc, &t)?);
    }
    let out = Value::Object(obj);

    let mut text = String::new();
    text += &format!("cone ranks: {}\n", int_list_text(&out["cone_ranks"]));
    text += &format!("cutoff: {}\n", scalar_text(&out["cutoff"]));
    text += &complex_text(&out["quotient"], "quotient");
    if let Some(section) = out.get("eta") {
        text += &eta_text(section);
    }
    if let Some(section) = out.get("torsion") {
        text += &torsion_text(section);
    }
    if let Some(section) = out.get("zeta") {
        text += &zeta_text(section);
    }
    Ok(Report::ok(out, text))
}

fn example(name: &str, cutoff: &str, depth: Option<u64>, what: Section) -> Result<Report, Error> {
    if name != "genus2" {
        return Err(schema(format!(
            "unknown example `{name}` (available: genus2)"
        )));
    }
    let t = negative_cutoff(cutoff)?;
    let data = genus2::descent();

    let mut obj = Map::new();
    // Both data blocks are valid inputs in their own right: `descent` feeds
    // the eta/zeta/torsion commands, `cone` feeds the cone command.
    obj.insert("cone".into(), wire::cone_to_value(&genus2::cone_data()));
    obj.insert("cutoff".into(), wire::rational_value(&t));
    obj.insert("descent".into(), wire::descent_to_value(&data));
    if what.wants_eta() || what.wants_zeta() {
        let eta = eta_from_descent_with_depth(&data, &t, depth)?;
        if what.wants_eta() {
            obj.insert("eta".into(), eta_section(&eta, &t));
        }
        if what.wants_zeta() {
            obj.insert("zeta".into(), zeta_section(&eta, &t)?);
        }
    }
    if what.wants_torsion() {
        let tc = torsion_from_descent(&data)?;
        obj.insert("torsion".into(), torsion_section(&tc, &t)?);
    }
    let out = Value::Object(obj);

    let mut text = String::new();
    text += &format!("cutoff: {}\n", scalar_text(&out["cutoff"]));
    text += &descent_summary_text(&out["descent"]);
    if let Some(section) = out.get("eta") {
        text += &eta_text(section);
    }
    if let Some(section) = out.get("torsion") {
        text += &torsion_text(section);
    }
    if let Some(section) = out.get("zeta") {
        text += &zeta_text(section);
    }
    Ok(Report::ok(out, text))
}

// ---------------------------------------------------------------------------
// tensor chains
// ---------------------------------------------------------------------------

enum ParsedChain {
    One(Chain1),
    Two(Chain2),
}

fn parse_chain(v: &Value, xi: &Arc<Weighting>) -> Result<ParsedChain, Error> {
    let cutoff = match v.get("cutoff") {
        None | Some(Value::Null) => Level::NegInf,
        Some(c) => {
            let s = c
                .as_str()
                .ok_or_else(|| schema("chain cutoff: expected a string".into()))?;
            parse_level(s)?
        }
    };
    let items = field(v, "chain")?
        .as_array()
        .ok_or_else(|| schema("`chain` must be an array of terms".into()))?;
    if items.is_empty() {
        return Err(schema("`chain` holds no terms; nothing to check".into()));
    }

    let mut arity = None;
    let mut terms: Vec<(Vec<GroupElement>, Rational)> = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let ctx = format!("chain[{idx}]");
        let coeff = field(item, "coeff")?;
        let coeff = coeff
            .as_str()
            .ok_or_else(|| schema(format!("{ctx}.coeff: expected a rational string")))?;
        let coeff = parse_rational(coeff)?;
        let legs = field(item, "legs")?
            .as_array()
            .ok_or_else(|| schema(format!("{ctx}.legs: expected an array of words")))?;
        match arity {
            None if legs.len() == 2 || legs.len() == 3 => arity = Some(legs.len()),
            None => {
                return Err(schema(format!(
                    "{ctx}: chains have two or three legs, got {}",
                    legs.len()
                )))
            }
            Some(n) if n != legs.len() => {
                return Err(schema(format!(
                    "{ctx}: expected {n} legs to match the first term, got {}",
                    legs.len()
                )))
            }
            Some(_) => {}
        }
        let legs = legs
            .iter()
            .map(|leg| {
                let word = leg
                    .as_str()
                    .ok_or_else(|| schema(format!("{ctx}.legs: expected word strings")))?;
                GroupElement::parse(xi.spec(), word)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        terms.push((legs, coeff));
    }

    match arity.expect("nonempty chain fixes an arity") {
        2 => {
            let raw = terms
                .into_iter()
                .map(|(mut legs, c)| {
                    let h = legs.pop().expect("two legs");
                    let g = legs.pop().expect("two legs");
                    (g, h, c)
                })
                .collect();
            Ok(ParsedChain::One(Chain1::from_terms(xi, raw, cutoff)?))
        }
        _ => {
            let raw = terms
                .into_iter()
                .map(|(mut legs, c)| {
                    let k = legs.pop().expect("three legs");
                    let h = legs.pop().expect("three legs");
                    let g = legs.pop().expect("three legs");
                    (g, h, k, c)
                })
                .collect();
            Ok(ParsedChain::Two(Chain2::from_terms(xi, raw, cutoff)?))
        }
    }
}

fn chain1_value(chain: &Chain1) -> Value {
    let terms: Vec<Value> = chain
        .terms()
        .map(|((g, h), c)| {
            json!({
                "coeff": wire::rational_value(c),
                "legs": [g.to_word_string(), h.to_word_string()],
            })
        })
        .collect();
    json!({ "cutoff": wire::level_value(chain.cutoff()), "terms": terms })
}

fn hochschild_check(input: &str, cutoff: Option<String>) -> Result<Report, Error> {
    let v = read_input(input)?;
    let xi = wire::parse_weighting(&v)?;
    match parse_chain(&v, &xi)? {
        ParsedChain::Two(chain) => {
            let d2 = boundary_two(&chain)?;
            let composite = boundary_one(&d2)?;
            let paired = class_pairing(&d2)?;
            let composite_dies = composite.term_count() == 0;
            let pairing_dies = paired.term_count() == 0;
            if !(composite_dies && pairing_dies) {
                // Both identities are theorems; surviving terms mean the
                // arithmetic itself is broken, not the input.
                return Err(Error::CertificationFailed {
                    what: "a boundary identity left terms above the cutoff".into(),
                });
            }
            let out = json!({
                "boundary": chain1_value(&d2),
                "checks": {
                    "composite_boundary_vanishes": composite_dies,
                    "pairing_kills_boundary": pairing_dies,
                },
                "cutoff": wire::level_value(chain.cutoff()),
                "kind": "boundary",
            });
            let mut text = String::new();
            text += "kind: boundary\n";
            text += &format!("cutoff: {}\n", scalar_text(&out["cutoff"]));
            text += "composite boundary vanishes: true\n";
            text += "pairing kills boundary: true\n";
            text += "boundary:\n";
            text += &chain_text(&out["boundary"]);
            Ok(Report::ok(out, text))
        }
        ParsedChain::One(chain) => {
            let t = match cutoff {
                Some(c) => negative_cutoff(&c)?,
                None => {
                    return Err(schema(
                        "a two-leg chain check needs --cutoff for its class series".into(),
                    ))
                }
            };
            let classes = cycle_class_series(&chain, &t)?;
            let out = json!({
                "class_series": wire::class_series_to_value(&classes),
                "cutoff": wire::rational_value(&t),
                "kind": "cycle",
            });
            let mut text = String::new();
            text += "kind: cycle\n";
            text += &format!("cutoff: {}\n", scalar_text(&out["cutoff"]));
            text += "class series:\n";
            text += &series_block(&out["class_series"]);
            Ok(Report::ok(out, text))
        }
    }
}

// ---------------------------------------------------------------------------
// plain-text rendering
//
// Renderers walk the canonical JSON value rather than the library objects,
// so both formats are guaranteed to present the same terms in the same
// order.
// ---------------------------------------------------------------------------

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn int_list_text(v: &Value) -> String {
    // Ranks, exponent vectors: always arrays of JSON numbers.
    let items: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(|x| x.to_string()).collect())
        .unwrap_or_default();
    format!("[{}]", items.join(", "))
}

/// One term of a series: `coeff · element`, with the element drawn in the
/// style its key dictates (word, exponent vector, or braced class).
fn term_text(term: &Value) -> String {
    let coeff = scalar_text(&term["coeff"]);
    if let Some(word) = term.get("word").and_then(Value::as_str) {
        let word = if word.is_empty() { "1" } else { word };
        return format!("{coeff} · {word}");
    }
    if let Some(vector) = term.get("vector") {
        return format!("{coeff} · {}", int_list_text(vector));
    }
    if let Some(class) = term.get("class").and_then(Value::as_str) {
        let class = if class.is_empty() { "1" } else { class };
        return format!("{coeff} · {{{class}}}");
    }
    coeff
}

/// A series `{"cutoff", "terms"}` on one line: terms joined by ` + `, the
/// empty sum drawn as `0`.
fn series_inline(v: &Value) -> String {
    let terms = v["terms"].as_array().map(Vec::as_slice).unwrap_or(&[]);
    if terms.is_empty() {
        return "0".to_string();
    }
    terms
        .iter()
        .map(term_text)
        .collect::<Vec<_>>()
        .join(" + ")
}

/// A series as an indented block, one term per line; the empty sum is one
/// `0` line.
fn series_block(v: &Value) -> String {
    let terms = v["terms"].as_array().map(Vec::as_slice).unwrap_or(&[]);
    if terms.is_empty() {
        return "  0\n".to_string();
    }
    let mut out = String::new();
    for term in terms {
        out += &format!("  {}\n", term_text(term));
    }
    out
}

/// A matrix `{"entries", "n"}` or bare entry grid, one `[i,j] = …` line per
/// entry, indices numbered from one.
fn matrix_text(v: &Value) -> String {
    let entries = v.get("entries").unwrap_or(v);
    let mut out = String::new();
    if let Some(rows) = entries.as_array() {
        for (i, row) in rows.iter().enumerate() {
            if let Some(cells) = row.as_array() {
                for (j, cell) in cells.iter().enumerate() {
                    out += &format!("  [{},{}] = {}\n", i + 1, j + 1, series_inline(cell));
                }
            }
        }
    }
    out
}

/// A one-chain `{"cutoff", "terms": [{"coeff", "legs": […]}]}`, one term per
/// line, the legs joined by ` ⊗ ` and the identity drawn as `1`.
fn chain_text(v: &Value) -> String {
    let terms = v["terms"].as_array().map(Vec::as_slice).unwrap_or(&[]);
    if terms.is_empty() {
        return "  0\n".to_string();
    }
    let mut out = String::new();
    for term in terms {
        let coeff = scalar_text(&term["coeff"]);
        let legs: Vec<String> = term["legs"]
            .as_array()
            .map(|a| {
                a.iter()
                    .map(|leg| match leg.as_str() {
                        Some("") | None => "1".to_string(),
                        Some(word) => word.to_string(),
                    })
                    .collect()
            })
            .unwrap_or_default();
        out += &format!("  {coeff} · {}\n", legs.join(" ⊗ "));
    }
    out
}

fn certificate_text(cert: &Value) -> String {
    let mut out = String::new();
    out += &format!(
        "regular: {}\n",
        cert["regular"].as_bool().unwrap_or(false)
    );
    out += &format!(
        "max cycle mean: {}\n",
        scalar_text(&cert["max_cycle_mean"])
    );
    match cert["witness"].as_array() {
        Some(cycle) => {
            let verts: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
            out += &format!("witness cycle: {}\n", verts.join(" "));
        }
        None => out += "witness cycle: none\n",
    }
    out
}

fn eta_text(section: &Value) -> String {
    let mut out = String::new();
    out += &format!(
        "eta (cutoff {}, depth {}):\n",
        scalar_text(&section["cutoff"]),
        section["depth"]
    );
    out += &series_block(&section["series"]);
    out
}

fn zeta_text(section: &Value) -> String {
    let mut out = String::new();
    out += &format!(
        "zeta (cutoff {}, depth {}):\n",
        scalar_text(&section["cutoff"]),
        section["depth"]
    );
    out += &series_block(&section["series"]);
    out
}

fn torsion_text(section: &Value) -> String {
    let mut out = String::new();
    out += &format!(
        "torsion determinant (cutoff {}):\n",
        scalar_text(&section["cutoff"])
    );
    out += &series_block(&section["abelian_determinant"]);
    if let Some(summands) = section["summands"].as_array() {
        for (idx, summand) in summands.iter().enumerate() {
            let sign = summand["sign"].as_str().unwrap_or("?");
            let n = &summand["matrix"]["n"];
            out += &format!("summand {} (sign {sign}, {n}x{n}):\n", idx + 1);
            out += &matrix_text(&summand["matrix"]);
        }
    }
    out
}

fn complex_text(complex: &Value, label: &str) -> String {
    let mut out = String::new();
    out += &format!("{label} ranks: {}\n", int_list_text(&complex["ranks"]));
    if let Some(boundaries) = complex["boundaries"].as_array() {
        for item in boundaries {
            out += &format!("{label} boundary (dim {}):\n", item["dim"]);
            out += &matrix_text(&item["entries"]);
        }
    }
    out
}

fn descent_summary_text(descent: &Value) -> String {
    let generators: Vec<String> = descent["group"]["generators"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|g| g.as_str().unwrap_or("?").to_string())
                .collect()
        })
        .unwrap_or_default();
    let mut out = format!(
        "group: {} on {}\n",
        descent["group"]["kind"].as_str().unwrap_or("?"),
        generators.join(" ")
    );
    if let Some(matrices) = descent["matrices"].as_array() {
        for item in matrices {
            out += &format!("matrix (dim {}):\n", item["dim"]);
            out += &matrix_text(&item["matrix"]);
        }
    }
    out
}
