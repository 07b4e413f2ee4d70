//! Operation parameters and their binding to a dependency model.
//!
//! Parameters come either from an OpenAPI document carrying an
//! `x-dependencies` extension ([`load_idl4oas`]) or from a standalone params
//! file plus a separate dependency document ([`load_spec_files`]).

mod domains;
mod oas;
mod params;
mod request;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::idl::{DependencyModel, IdlError};
use crate::value::Value;

pub use domains::{build_domains, IntWindow, SENTINEL};
pub use oas::{load_idl4oas, load_idl4oas_value, parse_document};
pub use params::{load_params_file, load_spec_files, parse_params, ParamRecord};
pub use request::{parse_request_literal, request_from_map};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("operation `{0}` not found in the document")]
    OperationNotFound(String),
    #[error("parameter `{param}`: unsupported schema ({reason})")]
    SchemaUnsupported { param: String, reason: String },
    #[error("parameter `{param}`: invalid domain ({reason})")]
    InvalidDomain { param: String, reason: String },
    #[error("x-dependencies[{index}]: {source}")]
    Dependency {
        index: usize,
        #[source]
        source: IdlError,
    },
    #[error(transparent)]
    Idl(#[from] IdlError),
    #[error("dependency references undeclared parameter `{0}`")]
    UndeclaredParameter(String),
    #[error("parameter `{0}` is declared more than once")]
    DuplicateParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{param}`: `{value}` is not a valid {expected}")]
    TypeMismatch {
        param: String,
        value: String,
        expected: &'static str,
    },
    #[error("malformed request: {0}")]
    MalformedRequest(String),
    #[error("malformed document: {0}")]
    Document(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The set of values a parameter may take.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ParamDomain {
    Boolean,
    IntRange {
        min: i64,
        max: i64,
    },
    EnumInt {
        values: Vec<i64>,
    },
    EnumString {
        values: Vec<String>,
    },
    /// Free-form string; replaced by a finite symbolic domain in [`build_domains`].
    OpenString,
    /// Integer lacking an enum or one of its bounds; clipped in [`build_domains`].
    OpenInt {
        min: Option<i64>,
        max: Option<i64>,
    },
    /// Real numbers. Usable for request validation, never enumerated.
    Continuous,
}

impl ParamDomain {
    /// Enumerates the domain, `None` when it is not finite.
    pub fn values(&self) -> Option<Vec<Value>> {
        Some(match self {
            ParamDomain::Boolean => vec![Value::Bool(false), Value::Bool(true)],
            ParamDomain::IntRange { min, max } => (*min..=*max).map(Value::Int).collect(),
            ParamDomain::EnumInt { values } => values.iter().copied().map(Value::Int).collect(),
            ParamDomain::EnumString { values } => values.iter().cloned().map(Value::Str).collect(),
            ParamDomain::OpenString | ParamDomain::OpenInt { .. } | ParamDomain::Continuous => {
                return None
            }
        })
    }

    pub fn is_finite(&self) -> bool {
        !matches!(
            self,
            ParamDomain::OpenString | ParamDomain::OpenInt { .. } | ParamDomain::Continuous
        )
    }

    /// Number of values, `None` when not finite.
    pub fn size(&self) -> Option<u64> {
        Some(match self {
            ParamDomain::Boolean => 2,
            ParamDomain::IntRange { min, max } => (*max as i128 - *min as i128 + 1) as u64,
            ParamDomain::EnumInt { values } => values.len() as u64,
            ParamDomain::EnumString { values } => values.len() as u64,
            _ => return None,
        })
    }

    pub fn is_integer(&self) -> bool {
        matches!(
            self,
            ParamDomain::IntRange { .. }
                | ParamDomain::EnumInt { .. }
                | ParamDomain::OpenInt { .. }
        )
    }

    pub fn is_string(&self) -> bool {
        matches!(
            self,
            ParamDomain::EnumString { .. } | ParamDomain::OpenString
        )
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            ParamDomain::Boolean => "boolean",
            d if d.is_integer() => "integer",
            d if d.is_string() => "string",
            _ => "number",
        }
    }

    /// Short description used by CSP rendering.
    pub fn describe(&self) -> String {
        match self {
            ParamDomain::Boolean => "Boolean".into(),
            ParamDomain::IntRange { min, max } => format!("int[{min}..{max}]"),
            ParamDomain::EnumInt { values } => {
                let v: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                format!("{{{}}}", v.join(", "))
            }
            ParamDomain::EnumString { values } => {
                let v: Vec<String> = values.iter().map(|v| crate::idl::quote(v)).collect();
                format!("{{{}}}", v.join(", "))
            }
            ParamDomain::OpenString => "string".into(),
            ParamDomain::OpenInt { .. } => "int".into(),
            ParamDomain::Continuous => "real".into(),
        }
    }

    fn check(&self, param: &str) -> Result<(), SpecError> {
        let invalid = |reason: &str| {
            Err(SpecError::InvalidDomain {
                param: param.to_string(),
                reason: reason.to_string(),
            })
        };
        match self {
            ParamDomain::IntRange { min, max } if min > max => invalid("minimum exceeds maximum"),
            ParamDomain::OpenInt {
                min: Some(min),
                max: Some(max),
            } if min > max => invalid("minimum exceeds maximum"),
            ParamDomain::EnumInt { values } if values.is_empty() => invalid("empty enum"),
            ParamDomain::EnumString { values } if values.is_empty() => invalid("empty enum"),
            ParamDomain::EnumInt { values } if has_duplicates(values) => {
                invalid("duplicate enum value")
            }
            ParamDomain::EnumString { values } if has_duplicates(values) => {
                invalid("duplicate enum value")
            }
            _ => Ok(()),
        }
    }
}

fn has_duplicates<T: Ord>(values: &[T]) -> bool {
    let mut v: Vec<&T> = values.iter().collect();
    v.sort();
    v.windows(2).any(|w| w[0] == w[1])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Parameter {
    pub name: String,
    pub domain: ParamDomain,
    pub required: bool,
}

impl Parameter {
    pub fn new(name: impl Into<String>, domain: ParamDomain, required: bool) -> Self {
        Parameter {
            name: name.into(),
            domain,
            required,
        }
    }

    pub fn optional(name: impl Into<String>, domain: ParamDomain) -> Self {
        Parameter::new(name, domain, false)
    }

    pub fn required(name: impl Into<String>, domain: ParamDomain) -> Self {
        Parameter::new(name, domain, true)
    }
}

/// One API operation: its parameters and the dependencies among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationSpec {
    pub operation_id: String,
    pub parameters: Vec<Parameter>,
    pub model: DependencyModel,
}

impl OperationSpec {
    /// Binds `model` to `parameters`, checking names are unique, domains are
    /// well formed and every reference resolves.
    pub fn new(
        operation_id: impl Into<String>,
        parameters: Vec<Parameter>,
        model: DependencyModel,
    ) -> Result<Self, SpecError> {
        for (i, p) in parameters.iter().enumerate() {
            if parameters[..i].iter().any(|q| q.name == p.name) {
                return Err(SpecError::DuplicateParameter(p.name.clone()));
            }
            p.domain.check(&p.name)?;
        }
        for name in model.referenced_params() {
            if !parameters.iter().any(|p| p.name == name) {
                return Err(SpecError::UndeclaredParameter(name));
            }
        }
        Ok(OperationSpec {
            operation_id: operation_id.into(),
            parameters,
            model,
        })
    }

    pub fn param(&self, name: &str) -> Option<&Parameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn is_finite(&self) -> bool {
        self.parameters.iter().all(|p| p.domain.is_finite())
    }
}

/// An assignment of values to a subset of an operation's parameters. A full
/// request lists exactly the parameters it sends; the same shape read as a
/// partial request may be extended.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Request {
    pub bindings: BTreeMap<String, Value>,
}

impl Request {
    pub fn new() -> Self {
        Request::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.bindings.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl FromIterator<(String, Value)> for Request {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Request {
            bindings: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                Value::Str(s) => write!(f, "{k}={}", crate::idl::quote(s))?,
                other => write!(f, "{k}={other}")?,
            }
        }
        f.write_str("}")
    }
}
