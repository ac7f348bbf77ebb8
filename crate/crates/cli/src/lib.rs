//! Argument handling and dispatch for the `hilb` binary.
//!
//! [`run`] is a pure function of its arguments and input files: it writes
//! artifacts atomically and reports through the returned exit code.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilb_core::cr_orbifold::{compare_rings_with, format_gaussian};
use hilb_core::egl_cobordism::{chern_number_with, universal_polynomial_with, ChernOptions, ChernPolynomial, DiagonalMode};
use hilb_core::fock::FockVector;
use hilb_core::goettsche::poincare_series;
use hilb_core::heisenberg::{check_relation_with, Budget, Relation};
use hilb_core::io::{
    betti_csv, betti_json, chern_json, load_model, parse_monomial, ring_table_to_json, universal_to_json, vector_from_json,
    vector_to_json, write_atomic,
};
use hilb_core::taut_ring::{ring_table_with, TautRing};
use hilb_core::{HilbError, SurfaceModel};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "hilb", version, about = "Exact cohomology of Hilbert schemes of points on surfaces")]
pub struct Cli {
    /// Wall-clock budget in seconds for the whole computation.
    #[arg(long, global = true, default_value_t = 600)]
    pub time_limit: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Betti numbers of X^[k] for k <= n, as CSV rows (n, d, b).
    Betti(BettiArgs),
    /// Full cup-product table of H*(X^[n]) as JSON.
    Ring(RingArgs),
    /// Checks operator relations on the Fock space.
    Verify(VerifyArgs),
    /// Compares H*(X^[n]) with the orbifold ring of the symmetric product.
    CrCompare(CrCompareArgs),
    /// Chern numbers of X^[n].
    Chern(ChernArgs),
    /// Cup product of two classes in H*(X^[n]).
    Cup(CupArgs),
}

#[derive(Args, Debug)]
pub struct SurfaceArg {
    /// Builtin name (k3, t4, p2, p1xp1, "synthetic(b2, c1, e)") or a JSON file.
    #[arg(long)]
    pub surface: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct BettiArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RingArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the ring-axiom checks; exit 1 if any fails.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    /// Comma-separated relation ids; all relations when omitted.
    #[arg(long, value_delimiter = ',')]
    pub relations: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub max_weight: usize,
}

#[derive(Args, Debug)]
pub struct CrCompareArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long)]
    pub n: usize,
    /// Run the comparison even though c1 is nonzero.
    #[arg(long)]
    pub allow_nonzero_c1: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Diagonal {
    Formal,
    Kunneth,
}

#[derive(Args, Debug)]
pub struct ChernArgs {
    /// Required unless --universal is given.
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub n: usize,
    /// Polynomial in c1 .. c_{2n}, e.g. "c1^2*c2 + c4".
    #[arg(long)]
    pub poly: String,
    /// Emit the universal polynomial in (c1^2, c2) instead of a number.
    #[arg(long)]
    pub universal: bool,
    #[arg(long, value_enum, default_value_t = Diagonal::Formal)]
    pub diagonal: Diagonal,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CupArgs {
    #[command(flatten)]
    pub surface: SurfaceArg,
    #[arg(long)]
    pub n: usize,
    /// A monomial such as "q1(h) q1(1)", a JSON vector, or a file holding either.
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Either a mathematical failure (exit 1) or an error mapped by
/// [`exit_code`].
enum Failure {
    Check(String),
    Error(HilbError),
}

impl From<HilbError> for Failure {
    fn from(e: HilbError) -> Self {
        Failure::Error(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Exit code for an error: 1 for resource limits and failed mathematical
/// checks, 2 for bad input.
pub fn exit_code(e: &HilbError) -> i32 {
    match e {
        HilbError::Resource(_)
        | HilbError::SpanFailure { .. }
        | HilbError::GenerationFailure { .. }
        | HilbError::InterpolationInconsistent(_) => EXIT_FAILED,
        _ => EXIT_INPUT,
    }
}

/// Applies `HILB_THREADS` to the global rayon pool.
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("HILB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| format!("HILB_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let budget = Budget::seconds(cli.time_limit);
    let result = match &cli.command {
        Command::Betti(a) => betti(a, stdout),
        Command::Ring(a) => ring(a, &budget, stdout),
        Command::Verify(a) => verify(a, &budget, stdout),
        Command::CrCompare(a) => cr_compare(a, &budget, stdout),
        Command::Chern(a) => chern(a, &budget, stdout),
        Command::Cup(a) => cup(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Check(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_FAILED
        }
        Err(Failure::Error(e)) => {
            let code = exit_code(&e);
            let _ = match &e {
                HilbError::Resource(_) => writeln!(stderr, "resource: {e}"),
                _ => writeln!(stderr, "error: {e}"),
            };
            code
        }
    }
}

fn io_err(e: std::io::Error) -> HilbError {
    HilbError::Io(e.to_string())
}

/// Writes `text` to `out` atomically, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Outcome {
    let mut bytes = text.to_string();
    if !bytes.ends_with('\n') {
        bytes.push('\n');
    }
    match out {
        Some(path) => write_atomic(path, bytes.as_bytes())?,
        None => stdout.write_all(bytes.as_bytes()).map_err(io_err)?,
    }
    Ok(())
}

fn require_positive(n: usize) -> Result<(), HilbError> {
    if n == 0 {
        return Err(HilbError::Parse("--n must be at least 1".into()));
    }
    Ok(())
}

fn betti(a: &BettiArgs, stdout: &mut dyn Write) -> Outcome {
    let model = load_model(&a.surface.surface)?;
    let series = poincare_series(model.betti(), a.n)?;
    let text = match a.format {
        TableFormat::Csv => betti_csv(&series),
        TableFormat::Json => betti_json(&series),
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn ring(a: &RingArgs, budget: &Budget, stdout: &mut dyn Write) -> Outcome {
    require_positive(a.n)?;
    let model = load_model(&a.surface.surface)?;
    let table = ring_table_with(&model, a.n, budget)?;
    if a.check {
        let report = table.check(Some(&model), budget)?;
        if !report.pass() {
            let first = [
                &report.associativity,
                &report.commutativity,
                &report.unit,
                &report.frobenius,
                &report.nondegeneracy,
            ]
            .into_iter()
            .flatten()
            .next()
            .cloned()
            .unwrap_or_default();
            return Err(Failure::Check(first));
        }
    }
    emit(a.out.as_deref(), &ring_table_to_json(&model, &table), stdout)
}

fn verify(a: &VerifyArgs, budget: &Budget, stdout: &mut dyn Write) -> Outcome {
    let relations = if a.relations.is_empty() {
        Relation::ALL.to_vec()
    } else {
        a.relations
            .iter()
            .map(|r| Relation::parse(r))
            .collect::<Result<Vec<_>, _>>()?
    };
    let model = load_model(&a.surface.surface)?;
    let mut table = format!("{:<16}{:<8}{:>10}  detail\n", "relation", "result", "checked");
    let mut failed = Vec::new();
    for relation in relations {
        let report = check_relation_with(relation, &model, a.max_weight, budget)?;
        let result = if report.pass { "pass" } else { "FAIL" };
        let detail = report.residual.as_deref().unwrap_or("");
        let line = format!("{:<16}{:<8}{:>10}  {}", relation.id(), result, report.checked, detail);
        table.push_str(line.trim_end());
        table.push('\n');
        if !report.pass {
            failed.push(relation.id());
        }
    }
    emit(None, &table, stdout)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn cr_compare(a: &CrCompareArgs, budget: &Budget, stdout: &mut dyn Write) -> Outcome {
    require_positive(a.n)?;
    let model = load_model(&a.surface.surface)?;
    let report = compare_rings_with(&model, a.n, a.allow_nonzero_c1, budget)?;
    let mut text = String::new();
    for (m, c) in report.cycle_scalars.iter().enumerate() {
        text.push_str(&format!("c{} = {}\n", m + 1, format_gaussian(c)));
    }
    let zero = report.residual == 0u32;
    text.push_str(&format!("equations = {}\n", report.equations));
    text.push_str(&format!("rational = {}\n", report.rational));
    text.push_str(&format!(
        "residual = {}\n",
        if zero {
            "0".to_string()
        } else {
            format!("nonzero ({})", report.residual)
        }
    ));
    emit(None, &text, stdout)?;
    if zero && report.iso_found && !report.inconclusive {
        Ok(())
    } else {
        Err(Failure::Check("no isomorphism with zero residual".into()))
    }
}

fn chern(a: &ChernArgs, budget: &Budget, stdout: &mut dyn Write) -> Outcome {
    require_positive(a.n)?;
    let poly: ChernPolynomial = a.poly.parse()?;
    poly.check_degree(a.n)?;
    let opts = ChernOptions {
        diagonal: match a.diagonal {
            Diagonal::Formal => DiagonalMode::Formal,
            Diagonal::Kunneth => DiagonalMode::Kunneth,
        },
        ..ChernOptions::default()
    };
    if a.universal {
        let u = universal_polynomial_with(a.n, &poly, &opts, budget)?;
        return emit(a.out.as_deref(), &universal_to_json(&u), stdout);
    }
    let source = a
        .surface
        .as_deref()
        .ok_or_else(|| HilbError::Parse("--surface is required without --universal".into()))?;
    let model = load_model(source)?;
    let value = chern_number_with(&model, a.n, &poly, &opts, budget)?;
    emit(a.out.as_deref(), &chern_json(source, a.n, &poly.to_string(), &value), stdout)
}

/// A vector argument: inline JSON, a monomial, or a file containing either.
fn read_vector(model: &SurfaceModel, n: usize, arg: &str) -> Result<FockVector, HilbError> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(io_err)?
    } else {
        arg.to_string()
    };
    let v = if text.trim_start().starts_with('[') {
        vector_from_json(model, &text)?
    } else {
        parse_monomial(model, &text)?
    };
    if let Some((m, _)) = v.iter().find(|(m, _)| m.weight() != n) {
        return Err(HilbError::Parse(format!(
            "'{}' has weight {}, expected {n}",
            m.display(model),
            m.weight()
        )));
    }
    Ok(v)
}

fn cup(a: &CupArgs, stdout: &mut dyn Write) -> Outcome {
    require_positive(a.n)?;
    let model = load_model(&a.surface.surface)?;
    let left = read_vector(&model, a.n, &a.left)?;
    let right = read_vector(&model, a.n, &a.right)?;
    let product = TautRing::new(&model, a.n)?.cup(&left, &right);
    emit(a.out.as_deref(), &vector_to_json(&model, &product), stdout)
}
