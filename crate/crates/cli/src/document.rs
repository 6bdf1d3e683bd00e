//! Typed JSON input documents. Every error carries a JSON pointer to the
//! offending value; syntax errors carry line and column instead.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use kazhdan::garland::{build_complex, Complex2, GarlandError};
use kazhdan::spectral::{
    gauge_representation, raw_representation, regular_representation, trivial_representation, CMatrix, Field,
    Representation, SpectralError,
};
use kazhdan::walks::{custom_walk, regular_walk, BaseMeasure, RandomWalk, WalkError};
use kazhdan::{FiniteRelation, Graphing, RelationError};
use num_complex::Complex64;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// JSON pointer, `""` for the whole document.
    pub pointer: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => write!(f, "at '{}': {}", self.pointer, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn err(pointer: &str, message: impl Into<String>) -> ParseError {
    ParseError {
        pointer: pointer.to_string(),
        line: None,
        column: None,
        message: message.into(),
    }
}

/// Failure to turn a well-formed document into a mathematical object.
#[derive(Debug, Clone, PartialEq)]
pub enum DocumentError {
    Parse(ParseError),
    Relation(RelationError),
    Walk(WalkError),
    Spectral(SpectralError),
    Garland(GarlandError),
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse(e) => e.fmt(f),
            Self::Relation(e) => e.fmt(f),
            Self::Walk(e) => e.fmt(f),
            Self::Spectral(e) => e.fmt(f),
            Self::Garland(e) => e.fmt(f),
        }
    }
}

impl From<ParseError> for DocumentError {
    fn from(e: ParseError) -> Self {
        Self::Parse(e)
    }
}
impl From<RelationError> for DocumentError {
    fn from(e: RelationError) -> Self {
        Self::Relation(e)
    }
}
impl From<WalkError> for DocumentError {
    fn from(e: WalkError) -> Self {
        Self::Walk(e)
    }
}
impl From<SpectralError> for DocumentError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}
impl From<GarlandError> for DocumentError {
    fn from(e: GarlandError) -> Self {
        Self::Garland(e)
    }
}

/// A relation document, with its optional graphing.
#[derive(Debug, Clone)]
pub struct RelationDoc {
    pub relation: Arc<FiniteRelation>,
    pub graphing: Option<Graphing>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepMode {
    Trivial,
    Regular,
    /// One unitary per point.
    Gauge(Vec<CMatrix>),
    /// One matrix per ordered pair.
    Raw(BTreeMap<(usize, usize), CMatrix>),
}

/// A representation document; it is resolved against a relation later.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationDoc {
    pub dim: usize,
    pub mode: RepMode,
}

impl RepresentationDoc {
    /// Raw blocks are checked along the walk's support.
    pub fn build(&self, walk: &RandomWalk) -> Result<Representation, SpectralError> {
        let rel = walk.relation();
        match &self.mode {
            RepMode::Trivial => Ok(trivial_representation(rel)),
            RepMode::Regular => Ok(regular_representation(rel)),
            RepMode::Gauge(u) => gauge_representation(rel, self.dim, u.clone()),
            RepMode::Raw(blocks) => raw_representation(rel, &walk.support_graphing(), blocks, kazhdan::spectral::UNITARY_TOL),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Document {
    Relation(RelationDoc),
    Walk(RandomWalk),
    Complex(Complex2),
    Representation(RepresentationDoc),
    Field(Field),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Relation(_) => "relation",
            Self::Walk(_) => "walk",
            Self::Complex(_) => "complex",
            Self::Representation(_) => "representation",
            Self::Field(_) => "field",
        }
    }
}

/// Parses JSON text into a value, mapping syntax errors to positions.
pub fn parse_json(text: &str) -> Result<Value, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        pointer: String::new(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })
}

/// Detects the document kind (explicit `"kind"` or by its keys).
pub fn detect_kind(v: &Value) -> Result<&'static str, ParseError> {
    let obj = v.as_object().ok_or_else(|| err("", "expected a JSON object"))?;
    if let Some(k) = obj.get("kind") {
        return match k.as_str() {
            Some("relation") => Ok("relation"),
            Some("walk") => Ok("walk"),
            Some("complex") => Ok("complex"),
            Some("representation") => Ok("representation"),
            Some("field") => Ok("field"),
            _ => Err(err("/kind", "expected one of relation, walk, complex, representation, field")),
        };
    }
    if obj.contains_key("triangles") {
        Ok("complex")
    } else if obj.contains_key("entries") || obj.contains_key("relation") {
        Ok("walk")
    } else if obj.contains_key("mode") {
        Ok("representation")
    } else if obj.contains_key("values") {
        Ok("field")
    } else if obj.contains_key("masses") {
        Ok("relation")
    } else {
        Err(err("", "cannot tell the document kind; add a \"kind\" field"))
    }
}

/// Parses and builds a document of any kind.
pub fn parse_document(text: &str) -> Result<Document, DocumentError> {
    let v = parse_json(text)?;
    document_from_value(&v)
}

pub fn document_from_value(v: &Value) -> Result<Document, DocumentError> {
    Ok(match detect_kind(v)? {
        "relation" => Document::Relation(relation_from(v, "")?),
        "walk" => Document::Walk(walk_from(v)?),
        "complex" => Document::Complex(complex_from(v)?),
        "representation" => Document::Representation(representation_from(v)?),
        _ => Document::Field(field_from(v)?),
    })
}

fn child(p: &str, key: impl fmt::Display) -> String {
    format!("{p}/{key}")
}

fn get<'a>(v: &'a Value, p: &str, key: &str) -> Result<&'a Value, ParseError> {
    v.get(key).ok_or_else(|| err(p, format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, p: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array().ok_or_else(|| err(p, "expected an array"))
}

/// A double, or a decimal string for masses written exactly.
fn number(v: &Value, p: &str) -> Result<f64, ParseError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| err(p, "number out of range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| err(p, format!("\"{s}\" is not a decimal number"))),
        _ => Err(err(p, "expected a number")),
    }
}

fn index(v: &Value, p: &str) -> Result<usize, ParseError> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| err(p, "expected a nonnegative integer"))
}

fn numbers(v: &Value, p: &str) -> Result<Vec<f64>, ParseError> {
    array(v, p)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &child(p, i)))
        .collect()
}

fn indices(v: &Value, p: &str) -> Result<Vec<usize>, ParseError> {
    array(v, p)?
        .iter()
        .enumerate()
        .map(|(i, x)| index(x, &child(p, i)))
        .collect()
}

/// A complex entry: `[re, im]` or a plain real number.
fn complex(v: &Value, p: &str) -> Result<Complex64, ParseError> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(number(&a[0], &child(p, 0))?, number(&a[1], &child(p, 1))?)),
        Value::Array(_) => Err(err(p, "expected [re, im]")),
        _ => Ok(Complex64::new(number(v, p)?, 0.0)),
    }
}

fn matrix(v: &Value, p: &str, d: usize) -> Result<CMatrix, ParseError> {
    let rows = array(v, p)?;
    if rows.len() != d {
        return Err(err(p, format!("expected {d} rows, found {}", rows.len())));
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        let rp = child(p, i);
        let row = array(row, &rp)?;
        if row.len() != d {
            return Err(err(&rp, format!("row has {} entries, expected {d}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = complex(x, &child(&rp, j))?;
        }
    }
    Ok(m)
}

fn pairs(v: &Value, p: &str) -> Result<Vec<(usize, usize)>, ParseError> {
    array(v, p)?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let ep = child(p, i);
            let a = array(e, &ep)?;
            if a.len() != 2 {
                return Err(err(&ep, "expected [x, y]"));
            }
            Ok((index(&a[0], &child(&ep, 0))?, index(&a[1], &child(&ep, 1))?))
        })
        .collect()
}

fn graphing_from(v: &Value, p: &str) -> Result<Graphing, ParseError> {
    // either {"edges": [...], "degree_bound": k} or a bare edge list
    let (edges, bound) = match v {
        Value::Array(_) => (pairs(v, p)?, None),
        _ => {
            let e = pairs(get(v, p, "edges")?, &child(p, "edges"))?;
            let b = match v.get("degree_bound") {
                Some(b) => Some(index(b, &child(p, "degree_bound"))?),
                None => None,
            };
            (e, b)
        }
    };
    let g = Graphing::new(edges);
    Ok(match bound {
        Some(b) => g.with_degree_bound(b),
        None => g,
    })
}

/// `{"masses": [...], "classes": [...], "graphing"?: ...}`.
pub fn relation_from(v: &Value, p: &str) -> Result<RelationDoc, DocumentError> {
    let masses = numbers(get(v, p, "masses")?, &child(p, "masses"))?;
    let classes = match v.get("classes") {
        Some(c) => indices(c, &child(p, "classes"))?,
        None => vec![0; masses.len()],
    };
    let relation = Arc::new(kazhdan::build_relation(&masses, &classes)?);
    let graphing = match v.get("graphing") {
        Some(g) => Some(graphing_from(g, &child(p, "graphing"))?),
        None => None,
    };
    Ok(RelationDoc { relation, graphing })
}

/// `{"relation": {...}, "entries": [[x, y, p], ...], "base"?: ...}`, or a
/// relation with a graphing for the regular walk.
pub fn walk_from(v: &Value) -> Result<RandomWalk, DocumentError> {
    let rel = relation_from(get(v, "", "relation")?, "/relation")?;
    let entries = match v.get("entries") {
        Some(e) => e,
        None => {
            let g = rel
                .graphing
                .as_ref()
                .ok_or_else(|| err("", "a walk needs \"entries\" or a relation graphing"))?;
            return Ok(regular_walk(rel.relation.clone(), g)?);
        }
    };
    let list = array(entries, "/entries")?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let ep = child("/entries", i);
            let a = array(e, &ep)?;
            if a.len() != 3 {
                return Err(err(&ep, "expected [x, y, p]"));
            }
            Ok((
                index(&a[0], &child(&ep, 0))?,
                index(&a[1], &child(&ep, 1))?,
                number(&a[2], &child(&ep, 2))?,
            ))
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let base = match v.get("base") {
        None => BaseMeasure::Mu,
        Some(Value::String(s)) if s == "mu" => BaseMeasure::Mu,
        Some(Value::String(s)) if s == "tilde" => BaseMeasure::Tilde,
        Some(b @ Value::Array(_)) => BaseMeasure::Explicit(numbers(b, "/base")?),
        Some(_) => return Err(err("/base", "expected \"mu\", \"tilde\" or an array of weights").into()),
    };
    Ok(custom_walk(rel.relation, &list, base)?)
}

/// `{"masses": [...], "triangles": [[a, b, c], ...]}`.
pub fn complex_from(v: &Value) -> Result<Complex2, DocumentError> {
    let masses = numbers(get(v, "", "masses")?, "/masses")?;
    let tris = array(get(v, "", "triangles")?, "/triangles")?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tp = child("/triangles", i);
            let a = indices(t, &tp)?;
            <[usize; 3]>::try_from(a).map_err(|_| err(&tp, "expected three vertices"))
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(build_complex(&masses, &tris)?)
}

/// `{"dim": d, "mode": "trivial" | "regular" | "gauge" | "raw", "blocks": ...}`.
pub fn representation_from(v: &Value) -> Result<RepresentationDoc, ParseError> {
    let mode = get(v, "", "mode")?.as_str().ok_or_else(|| err("/mode", "expected a string"))?;
    let dim = match v.get("dim") {
        Some(d) => index(d, "/dim")?,
        None => 1,
    };
    if dim == 0 {
        return Err(err("/dim", "dimension must be positive"));
    }
    let mode = match mode {
        "trivial" => RepMode::Trivial,
        "regular" => RepMode::Regular,
        "gauge" => RepMode::Gauge(
            array(get(v, "", "blocks")?, "/blocks")?
                .iter()
                .enumerate()
                .map(|(i, m)| matrix(m, &child("/blocks", i), dim))
                .collect::<Result<_, _>>()?,
        ),
        "raw" => {
            let mut out = BTreeMap::new();
            for (i, b) in array(get(v, "", "blocks")?, "/blocks")?.iter().enumerate() {
                let bp = child("/blocks", i);
                let x = index(get(b, &bp, "from")?, &child(&bp, "from"))?;
                let y = index(get(b, &bp, "to")?, &child(&bp, "to"))?;
                let m = matrix(get(b, &bp, "matrix")?, &child(&bp, "matrix"), dim)?;
                if out.insert((x, y), m).is_some() {
                    return Err(err(&bp, format!("block ({x}, {y}) given twice")));
                }
            }
            RepMode::Raw(out)
        }
        other => return Err(err("/mode", format!("unknown mode \"{other}\""))),
    };
    Ok(RepresentationDoc { dim, mode })
}

/// `{"dim": d, "values": [[c_1, ..., c_d] per point]}`; a scalar field may
/// list plain numbers.
pub fn field_from(v: &Value) -> Result<Field, ParseError> {
    let dim = match v.get("dim") {
        Some(d) => index(d, "/dim")?,
        None => 1,
    };
    if dim == 0 {
        return Err(err("/dim", "dimension must be positive"));
    }
    let mut values = Vec::new();
    for (x, point) in array(get(v, "", "values")?, "/values")?.iter().enumerate() {
        let pp = child("/values", x);
        match point {
            // dim 1 accepts a bare [re, im]
            Value::Array(a) if dim == 1 && a.len() == 2 && a.iter().all(Value::is_number) => {
                values.push(complex(point, &pp)?)
            }
            Value::Array(a) => {
                if a.len() != dim {
                    return Err(err(&pp, format!("expected {dim} entries, found {}", a.len())));
                }
                for (j, c) in a.iter().enumerate() {
                    values.push(complex(c, &child(&pp, j))?);
                }
            }
            _ if dim == 1 => values.push(complex(point, &pp)?),
            _ => return Err(err(&pp, format!("expected an array of {dim} entries"))),
        }
    }
    Field::new(dim, values).map_err(|e| err("/values", e.to_string()))
}
