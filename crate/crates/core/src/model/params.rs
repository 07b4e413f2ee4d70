//! Standalone parameter declarations, paired with a separate dependency file.
//!
//! ```yaml
//! - {name: p1, type: boolean, required: true}
//! - {name: p2, type: integer, minimum: 0, maximum: 10}
//! - {name: p3, type: string, enum: [a, b]}
//! ```

use std::path::Path;

use serde::Deserialize;
use serde_json::json;

use crate::idl::{parse_idl, DependencyModel};

use super::oas::{parse_document, schema_to_domain};
use super::{OperationSpec, Parameter, SpecError};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRecord {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub required: bool,
    #[serde(default, rename = "enum")]
    pub enumeration: Option<Vec<serde_json::Value>>,
    #[serde(default)]
    pub minimum: Option<i64>,
    #[serde(default)]
    pub maximum: Option<i64>,
}

impl ParamRecord {
    fn into_parameter(self) -> Result<Parameter, SpecError> {
        let schema = json!({
            "type": self.ty,
            "enum": self.enumeration,
            "minimum": self.minimum,
            "maximum": self.maximum,
        });
        let schema = match schema {
            serde_json::Value::Object(mut m) => {
                m.retain(|_, v| !v.is_null());
                serde_json::Value::Object(m)
            }
            other => other,
        };
        let domain = schema_to_domain(&self.name, &schema)?;
        Ok(Parameter::new(self.name, domain, self.required))
    }
}

/// Parses params-file text (YAML or JSON list of records).
pub fn parse_params(text: &str) -> Result<Vec<Parameter>, SpecError> {
    let doc = parse_document(text)?;
    let list = match doc {
        serde_json::Value::Null => serde_json::Value::Array(Vec::new()),
        serde_json::Value::Object(mut m) if m.contains_key("parameters") => {
            m.remove("parameters").unwrap_or_default()
        }
        other => other,
    };
    let records: Vec<ParamRecord> = serde_json::from_value(list)
        .map_err(|e| SpecError::Document(format!("params file: {e}")))?;
    records
        .into_iter()
        .map(ParamRecord::into_parameter)
        .collect()
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_params_file(path: &Path) -> Result<Vec<Parameter>, SpecError> {
    parse_params(&read(path)?)
}

/// Reads a params file and a dependency file and binds them. The operation
/// id defaults to the dependency file's stem.
pub fn load_spec_files(
    params_path: &Path,
    idl_path: &Path,
    operation_id: Option<&str>,
) -> Result<OperationSpec, SpecError> {
    let params = load_params_file(params_path)?;
    let model: DependencyModel = parse_idl(&read(idl_path)?)?;
    let id = operation_id.map(str::to_string).unwrap_or_else(|| {
        idl_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    OperationSpec::new(id, params, model)
}
