//! Canonical JSON emission for GIR documents.

use serde_json::{Map, Value};
use thiserror::Error;

use super::validate::{validate_gir, ValidationReport};
use super::{BitSpec, GirDocument, GirInstance, GirModule, GirParameter, GirPort};

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("document failed validation: {0}")]
    ValidationFailed(ValidationReport),
}

/// Serializes a document to its canonical JSON form.
///
/// The output is stable: known keys come first in template order, preserved
/// unknown keys follow in their original order, indentation is two spaces,
/// and the text ends with a newline. Parsing the result reproduces the
/// document, so serialize-then-parse is an identity on parsed inputs.
///
/// Documents with hard validation errors are refused; warnings pass through.
pub fn serialize_gir(doc: &GirDocument) -> Result<String, SerializeError> {
    let report = validate_gir(doc);
    if report.has_errors() {
        return Err(SerializeError::ValidationFailed(report));
    }

    let mut root = Map::new();
    root.insert(
        "modules".to_string(),
        Value::Array(doc.modules.iter().map(module_value).collect()),
    );
    for (key, val) in &doc.extra {
        root.insert(key.clone(), val.clone());
    }

    let mut text = serde_json::to_string_pretty(&Value::Object(root))
        .expect("JSON value tree serializes");
    text.push('\n');
    Ok(text)
}

fn module_value(module: &GirModule) -> Value {
    let mut obj = Map::new();
    obj.insert(
        module.name.clone(),
        Value::String(module.function_summary.clone()),
    );
    obj.insert(
        "Function".to_string(),
        Value::String(module.function_summary.clone()),
    );
    obj.insert(
        "Parameters".to_string(),
        parameters_value(&module.parameters),
    );
    obj.insert(
        "Ports".to_string(),
        Value::Array(module.ports.iter().map(port_value).collect()),
    );
    obj.insert(
        "Instances".to_string(),
        Value::Array(module.instances.iter().map(instance_value).collect()),
    );
    for (key, val) in &module.extra {
        obj.insert(key.clone(), val.clone());
    }
    Value::Object(obj)
}

/// Parameters render as one object holding every name/value pair, wrapped in
/// a single-element list; an empty set renders as an empty list.
fn parameters_value(params: &[GirParameter]) -> Value {
    if params.is_empty() {
        return Value::Array(vec![]);
    }
    let mut obj = Map::new();
    for p in params {
        obj.insert(p.name.clone(), Value::String(p.value.clone()));
    }
    Value::Array(vec![Value::Object(obj)])
}

fn port_value(port: &GirPort) -> Value {
    let mut attrs = Map::new();
    attrs.insert(
        "Direction".to_string(),
        Value::String(port.direction.as_str().to_string()),
    );
    attrs.insert(
        "Type".to_string(),
        Value::String(port.net_type.as_str().to_string()),
    );
    attrs.insert("Bits".to_string(), bits_value(port.bits));
    for (key, val) in &port.extra {
        attrs.insert(key.clone(), val.clone());
    }
    let mut obj = Map::new();
    obj.insert(port.name.clone(), Value::Object(attrs));
    Value::Object(obj)
}

fn bits_value(bits: BitSpec) -> Value {
    match bits {
        BitSpec::Width(w) => Value::Number(w.into()),
        BitSpec::Range(msb, lsb) => Value::String(format!("[{msb}:{lsb}]")),
    }
}

fn instance_value(inst: &GirInstance) -> Value {
    let mut attrs = Map::new();
    attrs.insert("Type".to_string(), Value::String(inst.module_type.clone()));
    attrs.insert(
        "Function".to_string(),
        Value::String(inst.function_summary.clone()),
    );
    attrs.insert(
        "Parameters".to_string(),
        parameters_value(&inst.parameters),
    );
    attrs.insert(
        "Connections".to_string(),
        Value::Array(
            inst.connections
                .iter()
                .map(|conn| {
                    let mut pair = Map::new();
                    pair.insert(
                        conn.submodule_port.clone(),
                        Value::String(conn.parent_signal_expression.clone()),
                    );
                    Value::Object(pair)
                })
                .collect(),
        ),
    );
    for (key, val) in &inst.extra {
        attrs.insert(key.clone(), val.clone());
    }
    let mut obj = Map::new();
    obj.insert(inst.instance_name.clone(), Value::Object(attrs));
    Value::Object(obj)
}
