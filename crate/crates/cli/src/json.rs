//! Machine-readable certificates.
//!
//! Fields appear in the order `status, rho, constant, k, f, case,
//! diagnostics`; absent fields are omitted. Rationals are strings such as
//! `"3"` or `"-1/2"`.

use elrf::detect::{CaseTag, Certificate, CertificateKind, IncreasingFn};
use elrf::linexpr::Var;
use elrf::loop_model::CandidateFn;
use elrf::rational::{format_rational, parse_rational, Rational};
use num_traits::Zero;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid certificate JSON: {0}")]
pub struct JsonError(pub String);

fn err<T>(message: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError(message.into()))
}

pub fn status(kind: CertificateKind) -> &'static str {
    match kind {
        CertificateKind::Lrf => "LRF_FOUND",
        CertificateKind::Elrf => "ELRF_FOUND",
        CertificateKind::EventualAffine => "EVENTUAL_AFFINE_FOUND",
        CertificateKind::TriviallyTerminating => "TRIVIAL_BODY_UNSAT",
        CertificateKind::None => "NOT_FOUND",
    }
}

fn kind_of(status: &str) -> Option<CertificateKind> {
    [
        CertificateKind::Lrf,
        CertificateKind::Elrf,
        CertificateKind::EventualAffine,
        CertificateKind::TriviallyTerminating,
        CertificateKind::None,
    ]
    .into_iter()
    .find(|k| self::status(*k) == status)
}

fn rational(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

fn coeffs(g: &CandidateFn) -> Value {
    Value::Object(
        g.coeffs()
            .iter()
            .map(|(v, c)| (v.name().to_string(), rational(c)))
            .collect(),
    )
}

/// The certificate as a JSON value; the raw LP solution is not included.
pub fn certificate_value(cert: &Certificate) -> Value {
    let mut m = Map::new();
    m.insert("status".into(), status(cert.kind).into());
    if let Some(rho) = &cert.rho {
        m.insert("rho".into(), coeffs(rho));
        m.insert("constant".into(), rational(rho.constant()));
    }
    if let Some(k) = &cert.k {
        m.insert("k".into(), rational(k));
    }
    match &cert.f {
        Some(IncreasingFn::Single(g)) => {
            m.insert("f".into(), coeffs(g));
        }
        Some(IncreasingFn::MinPair {
            decrease,
            positivity,
        }) => {
            m.insert("f".into(), Value::Array(vec![coeffs(decrease), coeffs(positivity)]));
        }
        None => {}
    }
    if let Some(case) = cert.case {
        m.insert("case".into(), case.label().into());
    }
    if !cert.diagnostics.is_empty() {
        m.insert("diagnostics".into(), cert.diagnostics.clone().into());
    }
    Value::Object(m)
}

pub fn emit_json(cert: &Certificate) -> String {
    certificate_value(cert).to_string()
}

fn parse_q(v: &Value, what: &str) -> Result<Rational, JsonError> {
    match v {
        Value::String(s) => match parse_rational(s) {
            Some(q) => Ok(q),
            None => err(format!("{what}: `{s}` is not a rational")),
        },
        _ => err(format!("{what} must be a string")),
    }
}

fn parse_fn(v: &Value, constant: Rational, what: &str) -> Result<CandidateFn, JsonError> {
    let Value::Object(obj) = v else {
        return err(format!("{what} must be an object"));
    };
    let vars: Vec<Var> = obj.keys().map(Var::new).collect();
    let values = obj
        .iter()
        .map(|(name, q)| parse_q(q, &format!("{what}.{name}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CandidateFn::new(&vars, values, constant))
}

/// Reads back what [`emit_json`] writes. `raw_solution` is always `None`.
pub fn parse_json(text: &str) -> Result<Certificate, JsonError> {
    let value: Value = serde_json::from_str(text).map_err(|e| JsonError(e.to_string()))?;
    let Value::Object(obj) = value else {
        return err("top level must be an object");
    };
    for key in obj.keys() {
        if !["status", "rho", "constant", "k", "f", "case", "diagnostics"].contains(&key.as_str()) {
            return err(format!("unknown field `{key}`"));
        }
    }
    let kind = match obj.get("status") {
        Some(Value::String(s)) => kind_of(s).ok_or_else(|| JsonError(format!("unknown status `{s}`")))?,
        _ => return err("missing status"),
    };
    let constant = match obj.get("constant") {
        Some(v) => parse_q(v, "constant")?,
        None => Rational::zero(),
    };
    let rho = obj.get("rho").map(|v| parse_fn(v, constant, "rho")).transpose()?;
    let k = obj.get("k").map(|v| parse_q(v, "k")).transpose()?;
    let f = match obj.get("f") {
        None => None,
        Some(Value::Array(pair)) => match pair.as_slice() {
            [d, p] => Some(IncreasingFn::MinPair {
                decrease: parse_fn(d, Rational::zero(), "f[0]")?,
                positivity: parse_fn(p, Rational::zero(), "f[1]")?,
            }),
            _ => return err("a min-pair f has exactly two entries"),
        },
        Some(v) => Some(IncreasingFn::Single(parse_fn(v, Rational::zero(), "f")?)),
    };
    let case = match obj.get("case") {
        None => None,
        Some(Value::String(s)) => {
            Some(CaseTag::from_label(s).ok_or_else(|| JsonError(format!("unknown case `{s}`")))?)
        }
        Some(_) => return err("case must be a string"),
    };
    let diagnostics = match obj.get("diagnostics") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|d| match d {
                Value::String(s) => Ok(s.clone()),
                _ => err("diagnostics must be strings"),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return err("diagnostics must be a list"),
    };
    Ok(Certificate {
        kind,
        rho,
        k,
        f,
        case,
        raw_solution: None,
        diagnostics,
    })
}
