//! File formats: surface descriptions, Fock vectors, ring tables, fitted
//! Chern polynomials and Betti tables, plus atomic output.

use crate::egl_cobordism::UniversalPolynomial;
use crate::error::{HilbError, Result};
use crate::fock::{FockVector, NakajimaMonomial};
use crate::frobenius::{builtin, load_surface, BasisElement, SurfaceClass, SurfaceData, SurfaceModel};
use crate::goettsche::BivariateSeries;
use crate::rational::{factorial, from_num_den_str, is_zero, num_den_strings, one, Q};
use crate::taut_ring::RingTable;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// An integer written as a JSON number when it fits in `i64`, otherwise as
/// a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_decimal(s: String) -> Self {
        s.parse().map(JsonInt::Small).unwrap_or(JsonInt::Big(s))
    }

    fn decimal(&self) -> String {
        match self {
            JsonInt::Small(x) => x.to_string(),
            JsonInt::Big(s) => s.clone(),
        }
    }
}

fn split_q(x: &Q) -> (JsonInt, JsonInt) {
    let (n, d) = num_den_strings(x);
    (JsonInt::from_decimal(n), JsonInt::from_decimal(d))
}

fn join_q(num: &JsonInt, den: &JsonInt, what: &str) -> Result<Q> {
    from_num_den_str(&num.decimal(), &den.decimal())
        .ok_or_else(|| HilbError::Schema(format!("{what}: invalid rational {}/{}", num.decimal(), den.decimal())))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisJson {
    name: String,
    degree: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    k: usize,
    num: JsonInt,
    den: JsonInt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceJson {
    name: String,
    basis: Vec<BasisJson>,
    unit: usize,
    #[serde(default)]
    products: Vec<(usize, usize, Vec<EntryJson>)>,
    integral: Vec<EntryJson>,
    #[serde(default)]
    c1: Vec<EntryJson>,
    #[serde(default)]
    c2: Vec<EntryJson>,
}

fn class_to_json(c: &SurfaceClass) -> Vec<EntryJson> {
    c.terms()
        .iter()
        .map(|(k, x)| {
            let (num, den) = split_q(x);
            EntryJson { k: *k, num, den }
        })
        .collect()
}

fn class_from_json(entries: &[EntryJson], what: &str) -> Result<SurfaceClass> {
    let terms = entries
        .iter()
        .map(|e| Ok((e.k, join_q(&e.num, &e.den, what)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceClass::from_terms(terms))
}

fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn schema(e: serde_json::Error) -> HilbError {
    HilbError::Schema(e.to_string())
}

/// Serializes a model in the surface description format.
pub fn surface_to_json(model: &SurfaceModel) -> String {
    let data = model.to_data();
    let json = SurfaceJson {
        name: data.name,
        basis: data
            .basis
            .into_iter()
            .map(|b| BasisJson {
                name: b.name,
                degree: b.degree,
            })
            .collect(),
        unit: data.unit,
        products: data.products.iter().map(|(i, j, c)| (*i, *j, class_to_json(c))).collect(),
        integral: class_to_json(&data.integral),
        c1: class_to_json(&data.c1),
        c2: class_to_json(&data.c2),
    };
    to_json_string(&json)
}

/// Parses and validates a surface description.
pub fn surface_from_json(text: &str) -> Result<SurfaceModel> {
    let json: SurfaceJson = serde_json::from_str(text).map_err(schema)?;
    let products = json
        .products
        .iter()
        .map(|(i, j, c)| Ok((*i, *j, class_from_json(c, &format!("products[{i},{j}]"))?)))
        .collect::<Result<Vec<_>>>()?;
    load_surface(SurfaceData {
        name: json.name,
        basis: json
            .basis
            .into_iter()
            .map(|b| BasisElement {
                name: b.name,
                degree: b.degree,
            })
            .collect(),
        unit: json.unit,
        products,
        integral: class_from_json(&json.integral, "integral")?,
        c1: class_from_json(&json.c1, "c1")?,
        c2: class_from_json(&json.c2, "c2")?,
    })
}

pub fn parse_surface_file(path: &Path) -> Result<SurfaceModel> {
    let text = std::fs::read_to_string(path).map_err(|e| HilbError::Io(format!("{}: {e}", path.display())))?;
    surface_from_json(&text).map_err(|e| match e {
        HilbError::Schema(m) => HilbError::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// A builtin name, or a path to a surface description file.
pub fn load_model(source: &str) -> Result<SurfaceModel> {
    let path = Path::new(source);
    if path.is_file() {
        parse_surface_file(path)
    } else {
        builtin(source)
    }
}

/// Parses `q2(h) q1(1)` (factors in any order) or `|0>`; the result carries
/// the Koszul sign of reordering, and is zero if an odd label repeats.
pub fn parse_monomial(model: &SurfaceModel, text: &str) -> Result<FockVector> {
    let text = text.trim();
    if text == "|0>" || text.is_empty() {
        return Ok(FockVector::vacuum());
    }
    let err = |m: String| HilbError::Parse(format!("{m} in monomial {text:?}"));
    let mut word = Vec::new();
    for token in text.split_whitespace() {
        let rest = token
            .strip_prefix('q')
            .ok_or_else(|| err(format!("expected q<m>(<class>), got {token:?}")))?;
        let (m, label) = rest.split_once('(').ok_or_else(|| err(format!("missing '(' in {token:?}")))?;
        let label = label
            .strip_suffix(')')
            .ok_or_else(|| err(format!("missing ')' in {token:?}")))?;
        let m: u32 = m.parse().map_err(|_| err(format!("bad weight in {token:?}")))?;
        if m == 0 {
            return Err(err("weight 0".into()));
        }
        let idx = model.index_of(label).ok_or_else(|| err(format!("unknown class {label:?}")))?;
        word.push((m, idx));
    }
    Ok(match NakajimaMonomial::from_word(model, &word) {
        Some((negative, mono)) => FockVector::monomial(mono, if negative { -one() } else { one() }),
        None => FockVector::zero(),
    })
}

/// Parses a monomial that must already be canonical.
fn parse_canonical(model: &SurfaceModel, text: &str) -> Result<NakajimaMonomial> {
    let v = parse_monomial(model, text)?;
    match v.sorted().as_slice() {
        [(m, c)] if *c == 1 => Ok(m.clone()),
        _ => Err(HilbError::Schema(format!("{text:?} is not a canonical monomial"))),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorEntry {
    monomial: String,
    num: JsonInt,
    den: JsonInt,
}

/// `[{monomial, num, den}]` in canonical monomial order.
pub fn vector_to_json(model: &SurfaceModel, v: &FockVector) -> String {
    let entries: Vec<VectorEntry> = v
        .sorted()
        .iter()
        .map(|(m, c)| {
            let (num, den) = split_q(c);
            VectorEntry {
                monomial: m.display(model),
                num,
                den,
            }
        })
        .collect();
    to_json_string(&entries)
}

pub fn vector_from_json(model: &SurfaceModel, text: &str) -> Result<FockVector> {
    let entries: Vec<VectorEntry> = serde_json::from_str(text).map_err(schema)?;
    let mut out = FockVector::zero();
    for e in entries {
        let c = join_q(&e.num, &e.den, &e.monomial)?;
        out.add_scaled(&parse_monomial(model, &e.monomial)?, &c);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RingTableJson {
    n: usize,
    basis: Vec<String>,
    constants: Vec<(usize, usize, usize, JsonInt, JsonInt)>,
    form: Vec<(usize, usize, JsonInt, JsonInt)>,
}

/// `{n, basis, constants: [[i, j, k, num, den]], form: [[i, j, num, den]]}`.
pub fn ring_table_to_json(model: &SurfaceModel, table: &RingTable) -> String {
    let mut constants = Vec::new();
    for ((i, j), row) in &table.constants {
        for (k, c) in row {
            let (num, den) = split_q(c);
            constants.push((*i, *j, *k, num, den));
        }
    }
    let form = table
        .form
        .iter()
        .map(|((i, j), c)| {
            let (num, den) = split_q(c);
            (*i, *j, num, den)
        })
        .collect();
    let json = RingTableJson {
        n: table.n,
        basis: table.basis.iter().map(|m| m.display(model)).collect(),
        constants,
        form,
    };
    to_json_string(&json)
}

pub fn ring_table_from_json(model: &SurfaceModel, text: &str) -> Result<RingTable> {
    let json: RingTableJson = serde_json::from_str(text).map_err(schema)?;
    let basis = json
        .basis
        .iter()
        .map(|s| parse_canonical(model, s))
        .collect::<Result<Vec<_>>>()?;
    let dim = basis.len();
    let check = |i: usize| {
        if i < dim {
            Ok(i)
        } else {
            Err(HilbError::Schema(format!("basis index {i} out of range")))
        }
    };
    let mut constants: BTreeMap<(usize, usize), BTreeMap<usize, Q>> = BTreeMap::new();
    for (i, j, k, num, den) in &json.constants {
        let c = join_q(num, den, "constants")?;
        *constants
            .entry((check(*i)?, check(*j)?))
            .or_default()
            .entry(check(*k)?)
            .or_insert_with(crate::rational::zero) += c;
    }
    let mut form = BTreeMap::new();
    for (i, j, num, den) in &json.form {
        let c = join_q(num, den, "form")?;
        if !is_zero(&c) {
            form.insert((check(*i)?, check(*j)?), c);
        }
    }
    let unit_mono = NakajimaMonomial::from_word(model, &vec![(1, model.unit_index()); json.n])
        .ok_or_else(|| HilbError::Schema("no unit monomial".into()))?
        .1;
    let unit = basis
        .iter()
        .position(|m| *m == unit_mono)
        .ok_or_else(|| HilbError::Schema(format!("basis lacks the unit {}", unit_mono.display(model))))?;
    Ok(RingTable {
        n: json.n,
        degrees: basis.iter().map(|m| m.degree(model)).collect(),
        odd: basis.iter().map(|m| m.is_odd(model)).collect(),
        basis,
        constants: constants
            .into_iter()
            .map(|(key, row)| (key, row.into_iter().filter(|(_, c)| !is_zero(c)).collect::<Vec<_>>()))
            .filter(|(_, row)| !row.is_empty())
            .collect(),
        form,
        unit,
        unit_scale: one() / factorial(json.n as u32),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UniversalTerm {
    a: u32,
    b: u32,
    num: JsonInt,
    den: JsonInt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UniversalJson {
    n: usize,
    terms: Vec<UniversalTerm>,
}

/// `{n, terms: [{a, b, num, den}]}` meaning `Σ (c₁²)^a c₂^b`.
pub fn universal_to_json(u: &UniversalPolynomial) -> String {
    let terms = u
        .terms()
        .map(|((a, b), c)| {
            let (num, den) = split_q(c);
            UniversalTerm { a: *a, b: *b, num, den }
        })
        .collect();
    to_json_string(&UniversalJson { n: u.n, terms })
}

pub fn universal_from_json(text: &str) -> Result<UniversalPolynomial> {
    let json: UniversalJson = serde_json::from_str(text).map_err(schema)?;
    let mut u = UniversalPolynomial::zero(json.n);
    for t in &json.terms {
        u.add_term(t.a, t.b, join_q(&t.num, &t.den, "terms")?);
    }
    Ok(u)
}

/// Betti table as CSV (`n,d,b`, sorted by `(n, d)`).
pub fn betti_csv(series: &BivariateSeries) -> String {
    series.to_csv()
}

#[derive(Serialize)]
struct BettiJson {
    n_max: usize,
    rows: Vec<(usize, usize, String)>,
}

/// Betti table as JSON `{n_max, rows: [[n, d, b]]}`.
pub fn betti_json(series: &BivariateSeries) -> String {
    let rows = (0..=series.n_max)
        .flat_map(|n| series.row(n).iter().enumerate().map(move |(d, b)| (n, d, b.to_string())))
        .collect();
    to_json_string(&BettiJson {
        n_max: series.n_max,
        rows,
    })
}

#[derive(Serialize)]
struct ChernJson {
    surface: String,
    n: usize,
    polynomial: String,
    num: JsonInt,
    den: JsonInt,
}

/// A single Chern number as JSON `{surface, n, polynomial, num, den}`.
pub fn chern_json(surface: &str, n: usize, polynomial: &str, value: &Q) -> String {
    let (num, den) = split_q(value);
    to_json_string(&ChernJson {
        surface: surface.to_string(),
        n,
        polynomial: polynomial.to_string(),
        num,
        den,
    })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves no partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| HilbError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
