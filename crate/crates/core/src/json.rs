//! JSON I/O, schema "twistorkit/1".
//!
//! Scalars are {"re", "im"} pairs: "p/q" strings on the exact backend, numbers
//! on the float backend. A Laurent polynomial is an array of {"pow", "re", "im"};
//! a matrix is {"rank": r, "entries": [poly; r·r]} in row-major order.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::bundle::{BundleCP1, GlobalSection};
use crate::deformation::BundleFamily;
use crate::error::{Error, Result};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::matrix::Matrix;
use crate::hypercomplex::TwistorData;
use crate::quaternionic::{check_quaternionic, SectionAB};
use crate::scalar::{Backend, Exact, Float, GaussRational, Scalar};
use crate::twistor::{quaternionic_from_tau, standard_flat};

pub const SCHEMA: &str = "twistorkit/1";

fn schema_err(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

pub trait JsonScalar: Scalar {
    fn encode_parts(&self) -> (Value, Value);
    fn decode_parts(re: &Value, im: &Value) -> Result<Self>;
}

fn rational_value(r: &BigRational) -> Value {
    Value::String(GaussRational::rational_to_string(r))
}

impl JsonScalar for Exact {
    fn encode_parts(&self) -> (Value, Value) {
        (rational_value(&self.re), rational_value(&self.im))
    }

    fn decode_parts(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| match v {
            Value::String(s) => {
                GaussRational::parse_rational(s).ok_or_else(|| schema_err(format!("bad rational literal {s:?}")))
            }
            Value::Number(_) => Err(Error::BackendMismatch("numeric literal on the exact backend".into())),
            other => Err(schema_err(format!("expected scalar literal, found {other}"))),
        };
        Ok(GaussRational::new(part(re)?, part(im)?))
    }
}

impl JsonScalar for Float {
    fn encode_parts(&self) -> (Value, Value) {
        (json!(self.re), json!(self.im))
    }

    fn decode_parts(re: &Value, im: &Value) -> Result<Self> {
        // rational strings are accepted and rounded, so exact files load on the float backend
        let part = |v: &Value| match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| schema_err("number out of range")),
            Value::String(s) => GaussRational::parse_rational(s)
                .and_then(|r| r.to_f64())
                .ok_or_else(|| schema_err(format!("bad rational literal {s:?}"))),
            other => Err(schema_err(format!("expected scalar literal, found {other}"))),
        };
        Ok(Float::new(part(re)?, part(im)?))
    }
}

/// Literal kind used throughout a document; mixing strings and numbers is rejected.
pub fn literal_backend(doc: &Value) -> Result<Option<Backend>> {
    fn walk(v: &Value, found: &mut Option<Backend>) -> Result<()> {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    if k == "re" || k == "im" {
                        let kind = match x {
                            Value::String(_) => Backend::Exact,
                            Value::Number(_) => Backend::Float,
                            other => return Err(schema_err(format!("bad scalar literal {other}"))),
                        };
                        match found {
                            Some(b) if *b != kind => {
                                return Err(Error::BackendMismatch(
                                    "document mixes rational strings and float numbers".into(),
                                ))
                            }
                            _ => *found = Some(kind),
                        }
                    } else {
                        walk(x, found)?;
                    }
                }
            }
            Value::Array(a) => {
                for x in a {
                    walk(x, found)?;
                }
            }
            _ => {}
        }
        Ok(())
    }
    let mut found = None;
    walk(doc, &mut found)?;
    Ok(found)
}

/// Parses a document, checks its schema tag and that its literals suit backend `S`.
pub fn parse_document<S: Scalar>(text: &str) -> Result<Value> {
    let doc: Value = serde_json::from_str(text).map_err(|e| schema_err(format!("invalid JSON: {e}")))?;
    match doc.get("schema") {
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(other) => return Err(schema_err(format!("unsupported schema {other}"))),
        None => return Err(schema_err("missing \"schema\" field")),
    }
    if literal_backend(&doc)? == Some(Backend::Float) && S::BACKEND == Backend::Exact {
        return Err(Error::BackendMismatch("float literals cannot be read on the exact backend".into()));
    }
    Ok(doc)
}

pub fn document(fields: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::String(SCHEMA.into()));
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    Value::Object(m)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema_err(format!("missing field {key:?}")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema_err(format!("{what} must be an array")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema_err(format!("{what} must be a nonnegative integer")))
}

pub fn encode_scalar<S: JsonScalar>(x: &S) -> Value {
    let (re, im) = x.encode_parts();
    json!({ "re": re, "im": im })
}

pub fn decode_scalar<S: JsonScalar>(v: &Value) -> Result<S> {
    S::decode_parts(field(v, "re")?, field(v, "im")?)
}

pub fn encode_vector<S: JsonScalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(encode_scalar).collect())
}

pub fn decode_vector<S: JsonScalar>(v: &Value) -> Result<Vec<S>> {
    as_array(v, "vector")?.iter().map(decode_scalar).collect()
}

pub fn encode_poly<S: JsonScalar>(p: &LaurentPoly<S>) -> Value {
    Value::Array(
        p.terms()
            .map(|(k, c)| {
                let (re, im) = c.encode_parts();
                json!({ "pow": k, "re": re, "im": im })
            })
            .collect(),
    )
}

pub fn decode_poly<S: JsonScalar>(v: &Value) -> Result<LaurentPoly<S>> {
    let mut p = LaurentPoly::zero();
    for term in as_array(v, "polynomial")? {
        let k = field(term, "pow")?.as_i64().ok_or_else(|| schema_err("\"pow\" must be an integer"))?;
        p.add_term(k, decode_scalar(term)?);
    }
    Ok(p)
}

pub fn encode_laurent_matrix<S: JsonScalar>(m: &LaurentMatrix<S>) -> Value {
    json!({ "rank": m.size(), "entries": m.entries().iter().map(encode_poly).collect::<Vec<_>>() })
}

pub fn decode_laurent_matrix<S: JsonScalar>(v: &Value) -> Result<LaurentMatrix<S>> {
    let r = as_usize(field(v, "rank")?, "rank")?;
    let entries = as_array(field(v, "entries")?, "entries")?;
    if entries.len() != r * r {
        return Err(schema_err(format!("rank {r} needs {} entries, found {}", r * r, entries.len())));
    }
    let polys = entries.iter().map(decode_poly).collect::<Result<Vec<_>>>()?;
    Ok(LaurentMatrix::from_fn(r, |i, j| polys[i * r + j].clone()))
}

pub fn encode_matrix<S: JsonScalar>(m: &Matrix<S>) -> Value {
    encode_laurent_matrix(&LaurentMatrix::from_matrix(m).expect("matrix encoding needs a square matrix"))
}

/// Constant matrix; every term must have pow 0.
pub fn decode_matrix<S: JsonScalar>(v: &Value) -> Result<Matrix<S>> {
    let lm = decode_laurent_matrix::<S>(v)?;
    let r = lm.size();
    if lm.entries().iter().any(|p| !p.is_zero() && !p.is_constant()) {
        return Err(schema_err("expected a constant matrix (pow 0 only)"));
    }
    Ok(Matrix::from_fn(r, r, |i, j| lm.get(i, j).coeff(0)))
}

pub fn encode_bundle<S: JsonScalar>(e: &BundleCP1<S>) -> Value {
    document(json!({ "transition": encode_laurent_matrix(e.transition()) }))
}

pub fn decode_bundle<S: JsonScalar>(doc: &Value) -> Result<BundleCP1<S>> {
    BundleCP1::new(decode_laurent_matrix(field(doc, "transition")?)?)
}

pub fn encode_section_ab<S: JsonScalar>(s: &SectionAB<S>) -> Value {
    json!({ "a": encode_vector(&s.a), "b": encode_vector(&s.b) })
}

pub fn decode_section_ab<S: JsonScalar>(v: &Value) -> Result<SectionAB<S>> {
    SectionAB::new(decode_vector(field(v, "a")?)?, decode_vector(field(v, "b")?)?)
}

pub fn encode_global_section<S: JsonScalar>(s: &GlobalSection<S>) -> Value {
    json!({
        "p": s.p.iter().map(encode_poly).collect::<Vec<_>>(),
        "q": s.q.iter().map(encode_poly).collect::<Vec<_>>(),
    })
}

pub fn decode_global_section<S: JsonScalar>(v: &Value) -> Result<GlobalSection<S>> {
    let polys = |k| as_array(field(v, k)?, k)?.iter().map(decode_poly).collect::<Result<Vec<_>>>();
    let (p, q) = (polys("p")?, polys("q")?);
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(GlobalSection { p, q })
}

/// Family document: "entries" holds r·r lists of {"t": [exponents], "poly": poly}.
pub fn encode_family<S: JsonScalar>(f: &BundleFamily<S>) -> Value {
    let r = f.rank;
    let entries: Vec<Value> = (0..r * r)
        .map(|idx| {
            let (i, j) = (idx / r, idx % r);
            Value::Array(
                f.terms
                    .iter()
                    .filter(|(_, m)| !m.get(i, j).is_zero())
                    .map(|(alpha, m)| json!({ "t": alpha, "poly": encode_poly(m.get(i, j)) }))
                    .collect(),
            )
        })
        .collect();
    document(json!({ "rank": r, "params": f.params, "entries": entries }))
}

pub fn decode_family<S: JsonScalar>(doc: &Value) -> Result<BundleFamily<S>> {
    let r = as_usize(field(doc, "rank")?, "rank")?;
    let params = match doc.get("params") {
        Some(v) => as_usize(v, "params")?,
        None => 1,
    };
    let entries = as_array(field(doc, "entries")?, "entries")?;
    if entries.len() != r * r {
        return Err(schema_err(format!("rank {r} needs {} entries, found {}", r * r, entries.len())));
    }
    let mut by_exp: BTreeMap<Vec<u32>, LaurentMatrix<S>> = BTreeMap::new();
    for (idx, entry) in entries.iter().enumerate() {
        for term in as_array(entry, "family entry")? {
            let alpha: Vec<u32> = match field(term, "t")? {
                Value::Number(n) => vec![n.as_u64().ok_or_else(|| schema_err("bad t exponent"))? as u32],
                Value::Array(a) => a
                    .iter()
                    .map(|x| x.as_u64().map(|e| e as u32).ok_or_else(|| schema_err("bad t exponent")))
                    .collect::<Result<_>>()?,
                _ => return Err(schema_err("\"t\" must be an exponent or a list of exponents")),
            };
            if alpha.len() != params {
                return Err(schema_err(format!("t exponent has {} entries, family has {params} params", alpha.len())));
            }
            let poly = decode_poly::<S>(field(term, "poly")?)?;
            let m = by_exp.entry(alpha).or_insert_with(|| LaurentMatrix::zeros(r));
            let cur = m.get(idx / r, idx % r).add_ref(&poly);
            m.set(idx / r, idx % r, cur);
        }
    }
    BundleFamily::new(r, params, by_exp.into_iter().collect())
}

fn frame_names(n: usize) -> Value {
    let d = 2 * n;
    let tangent: Vec<String> = (1..=d).map(|k| format!("dw{k}")).chain((1..=d).map(|k| format!("dwbar{k}"))).collect();
    let fiber: Vec<String> = (1..=d).map(|k| format!("z{k}")).collect();
    json!({ "tangent": tangent, "fiber": fiber })
}

/// Flat model document: A, Ω_raw, the normalized Ω and phase μ, frame labels
/// and the matrices I, J, K, g.
pub fn encode_flat_data<S: JsonScalar>(n: usize) -> Result<Value> {
    let hk = standard_flat::<S>(n);
    let q = quaternionic_from_tau::<S>(n);
    let raw = hk.restrict_omega()?;
    let data = TwistorData::new(q.clone(), &raw)?;
    Ok(document(json!({
        "n": n,
        "A": encode_matrix(q.matrix()),
        "Omega_raw": encode_matrix(&raw),
        "Omega": encode_matrix(&data.omega),
        "mu": encode_scalar(&data.mu),
        "frames": frame_names(n),
        "matrices": {
            "I": encode_matrix(&hk.i),
            "J": encode_matrix(&hk.j),
            "K": encode_matrix(&hk.k),
            "g": encode_matrix(&hk.g),
        },
    })))
}

/// (A, Ω) from a twistor data document. A stored normalized "Omega" is used
/// as given; otherwise "Omega_raw" goes through the phase normalization.
pub fn decode_twistor_data<S: JsonScalar>(doc: &Value) -> Result<TwistorData<S>> {
    let q = check_quaternionic(decode_matrix::<S>(field(doc, "A")?)?)?;
    if let Some(om) = doc.get("Omega") {
        let omega = decode_matrix::<S>(om)?;
        if omega.rows() != q.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), found: omega.rows() });
        }
        let mu = match doc.get("mu") {
            Some(v) => decode_scalar(v)?,
            None => S::one(),
        };
        return Ok(TwistorData { q, omega, mu });
    }
    TwistorData::new(q, &decode_matrix::<S>(field(doc, "Omega_raw")?)?)
}

/// Parses a CLI parameter literal: "i", "-i", "1/2", "0.5", "2+3i", "1-i".
pub fn parse_scalar_literal<S: Scalar>(s: &str) -> Option<S> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let real = |t: &str| -> Option<S> {
        let r = GaussRational::parse_decimal(t)?;
        Some(match S::BACKEND {
            Backend::Exact => {
                S::from_ratio(r.numer().to_i64()?, r.denom().to_i64()?)
            }
            Backend::Float => S::from_f64_parts(r.to_f64()?, 0.0),
        })
    };
    let Some(body) = s.strip_suffix('i') else {
        return real(s);
    };
    // split at the last sign that is not leading
    let cut = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(k, _)| k).last();
    let (re_part, im_part) = match cut {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im_coef = match im_part {
        "" | "+" => S::one(),
        "-" => -S::one(),
        t => real(t)?,
    };
    let re = if re_part.is_empty() { S::zero() } else { real(re_part)? };
    Some(re + im_coef * S::i())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_roundtrip_exact() {
        let p = LaurentPoly::from_terms(vec![(-1, Exact::from_ratio(1, 2)), (2, Exact::i())]);
        let v = encode_poly(&p);
        assert_eq!(v[0]["re"], "1/2");
        assert_eq!(v[0]["pow"], -1);
        assert_eq!(decode_poly::<Exact>(&v).unwrap(), p);
    }

    #[test]
    fn bundle_roundtrip_and_schema() {
        let e = BundleCP1::<Exact>::line_sum(&[1, -2]).unwrap();
        let doc = encode_bundle(&e);
        assert_eq!(doc["schema"], SCHEMA);
        assert_eq!(doc["transition"]["rank"], 2);
        let text = serde_json::to_string(&doc).unwrap();
        let back = decode_bundle::<Exact>(&parse_document::<Exact>(&text).unwrap()).unwrap();
        assert_eq!(back, e);
        assert!(matches!(parse_document::<Exact>("{\"transition\": 1}"), Err(Error::Schema(_))));
        assert!(matches!(parse_document::<Exact>("not json"), Err(Error::Schema(_))));
    }

    #[test]
    fn mixed_literals_rejected() {
        let text = r#"{"schema":"twistorkit/1","transition":{"rank":1,"entries":[[{"pow":1,"re":"1/1","im":0}]]}}"#;
        assert!(matches!(parse_document::<Float>(text), Err(Error::BackendMismatch(_))));
        let float_text = r#"{"schema":"twistorkit/1","transition":{"rank":1,"entries":[[{"pow":1,"re":1.0,"im":0.0}]]}}"#;
        assert!(matches!(parse_document::<Exact>(float_text), Err(Error::BackendMismatch(_))));
        let doc = parse_document::<Float>(float_text).unwrap();
        assert_eq!(decode_bundle::<Float>(&doc).unwrap().winding(), 1);
    }

    #[test]
    fn family_roundtrip() {
        let f = BundleFamily::<Exact>::jump_family();
        let doc = encode_family(&f);
        let back = decode_family::<Exact>(&doc).unwrap();
        assert_eq!(back.transition_at(&[Exact::from_i64(3)]).unwrap(), f.transition_at(&[Exact::from_i64(3)]).unwrap());
    }

    #[test]
    fn sections_roundtrip() {
        let s = SectionAB::new(vec![Exact::one(), Exact::i()], vec![Exact::from_ratio(-1, 3), Exact::zero()]).unwrap();
        assert_eq!(decode_section_ab::<Exact>(&encode_section_ab(&s)).unwrap(), s);
        let g = s.to_global();
        assert_eq!(decode_global_section::<Exact>(&encode_global_section(&g)).unwrap(), g);
    }

    #[test]
    fn constant_matrix_roundtrip() {
        let m = Matrix::from_rows(vec![vec![Exact::zero(), Exact::one()], vec![-Exact::one(), Exact::zero()]]).unwrap();
        assert_eq!(decode_matrix::<Exact>(&encode_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn flat_document_roundtrip() {
        let doc = encode_flat_data::<Exact>(1).unwrap();
        assert_eq!(doc["mu"]["im"], "1/1");
        let data = decode_twistor_data::<Exact>(&doc).unwrap();
        assert_eq!(data, TwistorData::flat(1).unwrap());
        let mut raw_only = doc.clone();
        raw_only.as_object_mut().unwrap().remove("Omega");
        let renormalized = decode_twistor_data::<Exact>(&raw_only).unwrap();
        assert_eq!(renormalized.omega, data.omega);
    }

    #[test]
    fn scalar_literals() {
        let p = parse_scalar_literal::<Exact>;
        assert_eq!(p("i"), Some(Exact::i()));
        assert_eq!(p("-i"), Some(-Exact::i()));
        assert_eq!(p("0.5"), Some(Exact::from_ratio(1, 2)));
        assert_eq!(p("1/2"), Some(Exact::from_ratio(1, 2)));
        assert_eq!(p("2+3i"), Some(Exact::from_i64(2) + Exact::from_i64(3) * Exact::i()));
        assert_eq!(p("1-i"), Some(Exact::one() - Exact::i()));
        assert_eq!(p("-1/2i"), Some(Exact::from_ratio(-1, 2) * Exact::i()));
        assert_eq!(p("x"), None);
        assert_eq!(p(""), None);
    }
}
