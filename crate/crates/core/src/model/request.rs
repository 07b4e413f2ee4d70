//! Requests from `name=value,...` literals or structured maps. Values are
//! typed by the declared parameter domain.

use serde_json::Value as Json;

use crate::decimal::Decimal;
use crate::value::Value;

use super::{OperationSpec, ParamDomain, Request, SpecError};

/// Parses `name=value[,name=value]*`. String values may be single-quoted
/// (needed when they contain commas).
pub fn parse_request_literal(spec: &OperationSpec, literal: &str) -> Result<Request, SpecError> {
    let mut request = Request::new();
    for pair in split_pairs(literal)? {
        let (name, raw) = pair.split_once('=').ok_or_else(|| {
            SpecError::MalformedRequest(format!("`{pair}` is not of the form name=value"))
        })?;
        let name = name.trim();
        let value = typed_value(spec, name, raw.trim())?;
        if request.bindings.insert(name.to_string(), value).is_some() {
            return Err(SpecError::MalformedRequest(format!(
                "`{name}` given more than once"
            )));
        }
    }
    Ok(request)
}

fn split_pairs(literal: &str) -> Result<Vec<String>, SpecError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in literal.chars() {
        match c {
            '\'' => {
                quoted = !quoted;
                cur.push(c);
            }
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    if quoted {
        return Err(SpecError::MalformedRequest("unterminated quote".into()));
    }
    out.push(cur);
    Ok(out
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect())
}

fn unquote(raw: &str) -> &str {
    raw.strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .or_else(|| raw.strip_prefix('"').and_then(|s| s.strip_suffix('"')))
        .unwrap_or(raw)
}

fn typed_value(spec: &OperationSpec, name: &str, raw: &str) -> Result<Value, SpecError> {
    let param = spec
        .param(name)
        .ok_or_else(|| SpecError::UnknownParameter(name.to_string()))?;
    let text = unquote(raw);
    let mismatch = |expected| SpecError::TypeMismatch {
        param: name.to_string(),
        value: raw.to_string(),
        expected,
    };
    match &param.domain {
        ParamDomain::Boolean => match text {
            t if t.eq_ignore_ascii_case("true") => Ok(Value::Bool(true)),
            t if t.eq_ignore_ascii_case("false") => Ok(Value::Bool(false)),
            _ => Err(mismatch("boolean")),
        },
        d if d.is_integer() => text
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| mismatch("integer")),
        d if d.is_string() => Ok(Value::Str(text.to_string())),
        _ => text
            .parse::<Decimal>()
            .map(Value::Num)
            .map_err(|_| mismatch("number")),
    }
}

/// Builds a request from a structured map such as `{p1: 2, p2: thing}`.
pub fn request_from_map(spec: &OperationSpec, map: &Json) -> Result<Request, SpecError> {
    let obj = map.as_object().ok_or_else(|| {
        SpecError::MalformedRequest("expected a map of parameter names to values".into())
    })?;
    let mut request = Request::new();
    for (name, v) in obj {
        let text = match v {
            Json::String(s) => s.clone(),
            Json::Bool(_) | Json::Number(_) => v.to_string(),
            other => {
                return Err(SpecError::MalformedRequest(format!(
                    "`{name}` has a non-scalar value {other}"
                )))
            }
        };
        let value = match (&spec.param(name).map(|p| &p.domain), v) {
            // Quoting is meaningless in structured values, keep strings verbatim.
            (Some(d), Json::String(s)) if d.is_string() => Value::Str(s.clone()),
            _ => typed_value(spec, name, &text)?,
        };
        request.bindings.insert(name.clone(), value);
    }
    Ok(request)
}
