//! OpenAPI documents extended with an operation-level `x-dependencies`
//! array of dependency strings.

use serde_json::{Map, Value as Json};

use crate::idl::{parse_idl, DependencyModel};

use super::{OperationSpec, ParamDomain, Parameter, SpecError};

const METHODS: &[&str] = &[
    "get", "put", "post", "delete", "options", "head", "patch", "trace",
];

/// Parses a document in either JSON or YAML form into a JSON tree.
pub fn parse_document(text: &str) -> Result<Json, SpecError> {
    if text.trim_start().starts_with('{') {
        if let Ok(v) = serde_json::from_str(text) {
            return Ok(v);
        }
    }
    let yaml: serde_yaml::Value =
        serde_yaml::from_str(text).map_err(|e| SpecError::Document(e.to_string()))?;
    yaml_to_json(yaml)
}

fn yaml_to_json(v: serde_yaml::Value) -> Result<Json, SpecError> {
    use serde_yaml::Value as Y;
    Ok(match v {
        Y::Null => Json::Null,
        Y::Bool(b) => Json::Bool(b),
        Y::Number(n) => {
            if let Some(i) = n.as_i64() {
                Json::from(i)
            } else if let Some(u) = n.as_u64() {
                Json::from(u)
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                serde_json::Number::from_f64(f)
                    .map(Json::Number)
                    .unwrap_or(Json::Null)
            }
        }
        Y::String(s) => Json::String(s),
        Y::Sequence(seq) => Json::Array(
            seq.into_iter()
                .map(yaml_to_json)
                .collect::<Result<_, _>>()?,
        ),
        Y::Mapping(m) => {
            let mut out = Map::new();
            for (k, v) in m {
                let key = match k {
                    Y::String(s) => s,
                    Y::Number(n) => n.to_string(),
                    Y::Bool(b) => b.to_string(),
                    other => {
                        return Err(SpecError::Document(format!(
                            "unsupported mapping key {other:?}"
                        )))
                    }
                };
                out.insert(key, yaml_to_json(v)?);
            }
            Json::Object(out)
        }
        Y::Tagged(t) => yaml_to_json(t.value)?,
    })
}

/// Loads `operation_id` (`"GET /search"` or an `operationId` value) from
/// document text.
pub fn load_idl4oas(text: &str, operation_id: &str) -> Result<OperationSpec, SpecError> {
    load_idl4oas_value(&parse_document(text)?, operation_id)
}

pub fn load_idl4oas_value(doc: &Json, operation_id: &str) -> Result<OperationSpec, SpecError> {
    let (path_item, op) = find_operation(doc, operation_id)
        .ok_or_else(|| SpecError::OperationNotFound(operation_id.to_string()))?;

    // Operation-level parameters override path-level ones with the same name and location.
    let mut raw: Vec<&Json> = Vec::new();
    for list in [path_item.get("parameters"), op.get("parameters")]
        .into_iter()
        .flatten()
    {
        let Some(items) = list.as_array() else {
            return Err(SpecError::Document("`parameters` must be an array".into()));
        };
        for item in items {
            let item = resolve(doc, item)?;
            let key = (item.get("name"), item.get("in"));
            raw.retain(|p| (p.get("name"), p.get("in")) != key);
            raw.push(item);
        }
    }

    let mut parameters = Vec::new();
    for p in raw {
        let name = p
            .get("name")
            .and_then(Json::as_str)
            .ok_or_else(|| SpecError::Document("parameter without a name".into()))?;
        let location = p.get("in").and_then(Json::as_str).unwrap_or("query");
        if location == "body" {
            // Body payloads are out of scope; flatten fields into named parameters instead.
            continue;
        }
        let required = p
            .get("required")
            .and_then(Json::as_bool)
            .unwrap_or(location == "path");
        let schema = match p.get("schema") {
            Some(s) => resolve(doc, s)?,
            None => p,
        };
        parameters.push(Parameter::new(
            name,
            schema_to_domain(name, schema)?,
            required,
        ));
    }

    let mut model = DependencyModel::default();
    if let Some(deps) = op.get("x-dependencies") {
        let entries = deps.as_array().ok_or_else(|| {
            SpecError::Document("`x-dependencies` must be an array of strings".into())
        })?;
        for (index, entry) in entries.iter().enumerate() {
            let text = entry.as_str().ok_or_else(|| {
                SpecError::Document(format!("x-dependencies[{index}] is not a string"))
            })?;
            let parsed =
                parse_idl(text).map_err(|source| SpecError::Dependency { index, source })?;
            model.dependencies.extend(parsed.dependencies);
        }
    }

    OperationSpec::new(operation_id, parameters, model)
}

fn find_operation<'a>(doc: &'a Json, operation_id: &str) -> Option<(&'a Json, &'a Json)> {
    let paths = doc.get("paths")?.as_object()?;
    if let Some((method, path)) = operation_id.trim().split_once(char::is_whitespace) {
        let method = method.to_ascii_lowercase();
        if let Some(item) = paths.get(path.trim()) {
            if let Some(op) = item.get(&method) {
                return Some((item, op));
            }
        }
    }
    paths.values().find_map(|item| {
        METHODS.iter().find_map(|m| {
            let op = item.get(*m)?;
            (op.get("operationId")?.as_str()? == operation_id).then_some((item, op))
        })
    })
}

/// Follows one local `$ref` (`#/components/...`).
fn resolve<'a>(doc: &'a Json, node: &'a Json) -> Result<&'a Json, SpecError> {
    match node.get("$ref").and_then(Json::as_str) {
        None => Ok(node),
        Some(r) => {
            let pointer = r.strip_prefix('#').ok_or_else(|| {
                SpecError::Document(format!("only local references are supported: `{r}`"))
            })?;
            doc.pointer(pointer)
                .ok_or_else(|| SpecError::Document(format!("unresolved reference `{r}`")))
        }
    }
}

/// Maps a schema object (`type`, `enum`, `minimum`, `maximum`) to a domain.
pub(crate) fn schema_to_domain(param: &str, schema: &Json) -> Result<ParamDomain, SpecError> {
    let unsupported = |reason: String| SpecError::SchemaUnsupported {
        param: param.to_string(),
        reason,
    };
    let enumeration = schema.get("enum").and_then(Json::as_array);
    let ty = match schema.get("type") {
        Some(Json::String(t)) => t.as_str(),
        // OpenAPI 3.1 allows `type: [integer, "null"]`.
        Some(Json::Array(ts)) => ts
            .iter()
            .filter_map(Json::as_str)
            .find(|t| *t != "null")
            .ok_or_else(|| unsupported("no usable type".into()))?,
        None => match enumeration.and_then(|e| e.first()) {
            Some(Json::String(_)) => "string",
            Some(Json::Number(n)) if n.is_i64() => "integer",
            Some(Json::Bool(_)) => "boolean",
            _ => return Err(unsupported("missing `type`".into())),
        },
        Some(other) => return Err(unsupported(format!("`type` is {other}"))),
    };

    let bound = |key: &str, exclusive_key: &str, step: i64| -> Result<Option<i64>, SpecError> {
        match schema.get(key) {
            None | Some(Json::Null) => Ok(None),
            Some(v) => {
                let n = v
                    .as_i64()
                    .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64))
                    .ok_or_else(|| unsupported(format!("`{key}` is not an integer")))?;
                let exclusive = schema
                    .get(exclusive_key)
                    .and_then(Json::as_bool)
                    .unwrap_or(false);
                Ok(Some(if exclusive { n + step } else { n }))
            }
        }
    };

    match ty {
        "boolean" => Ok(ParamDomain::Boolean),
        "integer" => {
            if let Some(values) = enumeration {
                let mut out = Vec::new();
                for v in values {
                    let i = v
                        .as_i64()
                        .ok_or_else(|| unsupported(format!("enum value {v} is not an integer")))?;
                    if !out.contains(&i) {
                        out.push(i);
                    }
                }
                return Ok(ParamDomain::EnumInt { values: out });
            }
            match (
                bound("minimum", "exclusiveMinimum", 1)?,
                bound("maximum", "exclusiveMaximum", -1)?,
            ) {
                (Some(min), Some(max)) => Ok(ParamDomain::IntRange { min, max }),
                (min, max) => Ok(ParamDomain::OpenInt { min, max }),
            }
        }
        "string" => match enumeration {
            Some(values) => {
                let mut out: Vec<String> = Vec::new();
                for v in values {
                    let s = match v {
                        Json::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                Ok(ParamDomain::EnumString { values: out })
            }
            None => Ok(ParamDomain::OpenString),
        },
        "number" => Ok(ParamDomain::Continuous),
        other => Err(unsupported(format!(
            "type `{other}` has no finite-domain mapping"
        ))),
    }
}
