//! JSON-to-model parsing for GIR documents.

use serde_json::Value;
use thiserror::Error;

use super::{
    BitSpec, ExtraMap, GirConnection, GirDocument, GirInstance, GirModule, GirParameter, GirPort,
    NetType, PortDirection,
};

#[derive(Debug, Error)]
pub enum GirParseError {
    #[error("malformed JSON: {0}")]
    JsonSyntax(String),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("unparseable Bits value at {path}: {value:?}")]
    BitSpecParse { path: String, value: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> GirParseError {
    GirParseError::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

/// Template repetition markers (`"..."`) are skipped wherever a model echoed
/// them back.
fn is_ellipsis(s: &str) -> bool {
    s.chars().all(|c| c == '.') && !s.is_empty()
}

/// Parses GIR JSON text into a [`GirDocument`].
///
/// The accepted shape follows the GIR template: a `"modules"` list whose
/// entries lead with the module name as a key. `Bits` accepts a bare integer,
/// a decimal string, or a `"msb:lsb"` / `"[msb:lsb]"` range string. Unknown
/// keys are kept in per-node `extra` maps so serialization can reproduce them.
pub fn parse_gir(text: &str) -> Result<GirDocument, GirParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| GirParseError::JsonSyntax(e.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| schema("$", "root must be a JSON object"))?;

    let mut doc = GirDocument::default();
    let mut saw_modules = false;
    for (key, val) in root {
        if key == "modules" {
            saw_modules = true;
            let list = as_object_list(val, "modules")?;
            for (idx, module_obj) in list.iter().enumerate() {
                doc.modules
                    .push(parse_module(module_obj, &format!("modules[{idx}]"))?);
            }
        } else if !is_ellipsis(key) {
            doc.extra.insert(key.clone(), val.clone());
        }
    }
    if !saw_modules {
        return Err(schema("modules", "missing required key \"modules\""));
    }
    Ok(doc)
}

/// Accepts either a JSON list of objects or a bare object (treated as a
/// one-element list). String elements that are pure ellipsis are dropped.
fn as_object_list<'a>(
    val: &'a Value,
    path: &str,
) -> Result<Vec<&'a serde_json::Map<String, Value>>, GirParseError> {
    match val {
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for (idx, item) in items.iter().enumerate() {
                match item {
                    Value::Object(obj) => out.push(obj),
                    Value::String(s) if is_ellipsis(s) => {}
                    _ => {
                        return Err(schema(
                            format!("{path}[{idx}]"),
                            "expected an object element",
                        ))
                    }
                }
            }
            Ok(out)
        }
        Value::Object(obj) => Ok(vec![obj]),
        _ => Err(schema(path, "expected a list of objects")),
    }
}

fn parse_module(
    obj: &serde_json::Map<String, Value>,
    path: &str,
) -> Result<GirModule, GirParseError> {
    let mut module = GirModule::default();
    let mut name_desc: Option<String> = None;

    for (key, val) in obj {
        match key.as_str() {
            "Function" => {
                module.function_summary = val
                    .as_str()
                    .ok_or_else(|| schema(format!("{path}.Function"), "expected a string"))?
                    .to_string();
            }
            "Parameters" => {
                module.parameters =
                    parse_parameters(val, &format!("{path}.Parameters"))?;
            }
            "Ports" => {
                let list = as_object_list(val, &format!("{path}.Ports"))?;
                for (idx, port_obj) in list.iter().enumerate() {
                    for (port_name, attrs) in port_obj.iter() {
                        if is_ellipsis(port_name) {
                            continue;
                        }
                        module.ports.push(parse_port(
                            port_name,
                            attrs,
                            &format!("{path}.Ports[{idx}].{port_name}"),
                        )?);
                    }
                }
            }
            "Instances" => {
                let list = as_object_list(val, &format!("{path}.Instances"))?;
                for (idx, inst_obj) in list.iter().enumerate() {
                    for (inst_name, attrs) in inst_obj.iter() {
                        if is_ellipsis(inst_name) {
                            continue;
                        }
                        module.instances.push(parse_instance(
                            inst_name,
                            attrs,
                            &format!("{path}.Instances[{idx}].{inst_name}"),
                        )?);
                    }
                }
            }
            _ if is_ellipsis(key) => {}
            _ if module.name.is_empty() => {
                // First unrecognized key names the module; its value is the
                // same two-sentence description the Function field carries.
                let desc = val.as_str().ok_or_else(|| {
                    schema(
                        format!("{path}.{key}"),
                        "module name key must map to a description string",
                    )
                })?;
                module.name = key.clone();
                name_desc = Some(desc.to_string());
            }
            _ => {
                module.extra.insert(key.clone(), val.clone());
            }
        }
    }

    if module.name.is_empty() {
        return Err(schema(path, "missing module name key"));
    }
    if module.function_summary.is_empty() {
        if let Some(desc) = name_desc {
            module.function_summary = desc;
        }
    }
    Ok(module)
}

fn parse_parameters(val: &Value, path: &str) -> Result<Vec<GirParameter>, GirParseError> {
    let list = as_object_list(val, path)?;
    let mut params = Vec::new();
    for (idx, obj) in list.iter().enumerate() {
        for (name, value) in obj.iter() {
            if is_ellipsis(name) {
                continue;
            }
            let text = match value {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => {
                    return Err(schema(
                        format!("{path}[{idx}].{name}"),
                        "parameter value must be a string or number",
                    ))
                }
            };
            params.push(GirParameter {
                name: name.clone(),
                value: text,
            });
        }
    }
    Ok(params)
}

fn parse_port(name: &str, attrs: &Value, path: &str) -> Result<GirPort, GirParseError> {
    let obj = attrs
        .as_object()
        .ok_or_else(|| schema(path, "port attributes must be an object"))?;

    let mut direction = None;
    let mut net_type = None;
    let mut bits = None;
    let mut extra = ExtraMap::new();

    for (key, val) in obj {
        match key.as_str() {
            "Direction" => {
                let s = val
                    .as_str()
                    .ok_or_else(|| schema(format!("{path}.Direction"), "expected a string"))?;
                direction = Some(PortDirection::from_str(s).ok_or_else(|| {
                    schema(
                        format!("{path}.Direction"),
                        format!("expected one of input|output|inout, got {s:?}"),
                    )
                })?);
            }
            "Type" => {
                let s = val
                    .as_str()
                    .ok_or_else(|| schema(format!("{path}.Type"), "expected a string"))?;
                net_type = Some(NetType::from_str(s).ok_or_else(|| {
                    schema(
                        format!("{path}.Type"),
                        format!("expected one of reg|wire, got {s:?}"),
                    )
                })?);
            }
            "Bits" => {
                bits = Some(parse_bits(val, &format!("{path}.Bits"))?);
            }
            _ if is_ellipsis(key) => {}
            _ => {
                extra.insert(key.clone(), val.clone());
            }
        }
    }

    Ok(GirPort {
        name: name.to_string(),
        direction: direction
            .ok_or_else(|| schema(path, "missing required key \"Direction\""))?,
        net_type: net_type.ok_or_else(|| schema(path, "missing required key \"Type\""))?,
        bits: bits.ok_or_else(|| schema(path, "missing required key \"Bits\""))?,
        extra,
    })
}

/// `Bits` spellings: bare integer, decimal string, `"msb:lsb"`, `"[msb:lsb]"`.
fn parse_bits(val: &Value, path: &str) -> Result<BitSpec, GirParseError> {
    let fail = |text: &str| GirParseError::BitSpecParse {
        path: path.to_string(),
        value: text.to_string(),
    };
    match val {
        Value::Number(n) => {
            let w = n.as_u64().ok_or_else(|| fail(&n.to_string()))?;
            if w == 0 {
                return Err(fail("0"));
            }
            Ok(BitSpec::Width(w))
        }
        Value::String(raw) => {
            let s = raw.trim();
            let inner = s
                .strip_prefix('[')
                .and_then(|rest| rest.strip_suffix(']'))
                .unwrap_or(s);
            if let Some((msb, lsb)) = inner.split_once(':') {
                let msb: u64 = msb.trim().parse().map_err(|_| fail(raw))?;
                let lsb: u64 = lsb.trim().parse().map_err(|_| fail(raw))?;
                Ok(BitSpec::Range(msb, lsb))
            } else {
                let w: u64 = inner.trim().parse().map_err(|_| fail(raw))?;
                if w == 0 {
                    return Err(fail(raw));
                }
                Ok(BitSpec::Width(w))
            }
        }
        _ => Err(fail(&val.to_string())),
    }
}

fn parse_instance(name: &str, attrs: &Value, path: &str) -> Result<GirInstance, GirParseError> {
    let obj = attrs
        .as_object()
        .ok_or_else(|| schema(path, "instance attributes must be an object"))?;

    let mut instance = GirInstance {
        instance_name: name.to_string(),
        ..Default::default()
    };

    for (key, val) in obj {
        match key.as_str() {
            "Type" => {
                instance.module_type = val
                    .as_str()
                    .ok_or_else(|| schema(format!("{path}.Type"), "expected a string"))?
                    .to_string();
            }
            "Function" => {
                instance.function_summary = val
                    .as_str()
                    .ok_or_else(|| schema(format!("{path}.Function"), "expected a string"))?
                    .to_string();
            }
            "Parameters" => {
                instance.parameters =
                    parse_parameters(val, &format!("{path}.Parameters"))?;
            }
            "Connections" => {
                let list = as_object_list(val, &format!("{path}.Connections"))?;
                for (idx, obj) in list.iter().enumerate() {
                    for (port, expr) in obj.iter() {
                        if is_ellipsis(port) {
                            continue;
                        }
                        let text = match expr {
                            Value::String(s) => s.clone(),
                            Value::Number(n) => n.to_string(),
                            _ => {
                                return Err(schema(
                                    format!("{path}.Connections[{idx}].{port}"),
                                    "connection expression must be a string",
                                ))
                            }
                        };
                        instance.connections.push(GirConnection {
                            submodule_port: port.clone(),
                            parent_signal_expression: text,
                        });
                    }
                }
            }
            _ if is_ellipsis(key) => {}
            _ => {
                instance.extra.insert(key.clone(), val.clone());
            }
        }
    }

    if instance.module_type.is_empty() {
        return Err(schema(path, "missing required key \"Type\""));
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = parse_gir(
            r#"{"modules":[{"m":"", "Function":"x. y.","Parameters":[],"Ports":[],"Instances":[]}]}"#,
        )
        .unwrap();
        assert_eq!(doc.modules.len(), 1);
        let m = &doc.modules[0];
        assert_eq!(m.name, "m");
        assert_eq!(m.function_summary, "x. y.");
        assert!(m.parameters.is_empty());
        assert!(m.ports.is_empty());
        assert!(m.instances.is_empty());
    }

    #[test]
    fn bits_spellings() {
        // Each accepted spelling with the width the range arithmetic implies.
        let cases: &[(&str, BitSpec, u64)] = &[
            ("8", BitSpec::Width(8), 8),
            ("\"8\"", BitSpec::Width(8), 8),
            ("\"7:0\"", BitSpec::Range(7, 0), 8),
            ("\"[7:0]\"", BitSpec::Range(7, 0), 8),
            ("\"[0:7]\"", BitSpec::Range(0, 7), 8),
            ("\"15 : 8\"", BitSpec::Range(15, 8), 8),
            ("1", BitSpec::Width(1), 1),
            ("\"[3:3]\"", BitSpec::Range(3, 3), 1),
        ];
        for (spelling, expect, width) in cases {
            let text = format!(
                r#"{{"modules":[{{"m":"d","Function":"d","Ports":[{{"p":{{"Direction":"input","Type":"wire","Bits":{spelling}}}}}]}}]}}"#
            );
            let doc = parse_gir(&text).unwrap();
            let bits = doc.modules[0].ports[0].bits;
            assert_eq!(bits, *expect, "spelling {spelling}");
            assert_eq!(bits.width(), *width, "spelling {spelling}");
        }
    }

    #[test]
    fn bits_rejects_garbage() {
        for bad in ["\"x\"", "\"\"", "0", "\"0\"", "\"7:\"", "true", "-3"] {
            let text = format!(
                r#"{{"modules":[{{"m":"d","Function":"d","Ports":[{{"p":{{"Direction":"input","Type":"wire","Bits":{bad}}}}}]}}]}}"#
            );
            let err = parse_gir(&text).unwrap_err();
            assert!(
                matches!(err, GirParseError::BitSpecParse { .. }),
                "{bad} gave {err:?}"
            );
        }
    }

    #[test]
    fn missing_direction_is_schema_violation() {
        let err = parse_gir(
            r#"{"modules":[{"m":"d","Ports":[{"p":{"Type":"wire","Bits":1}}]}]}"#,
        )
        .unwrap_err();
        match err {
            GirParseError::SchemaViolation { path, message } => {
                assert!(path.contains("Ports[0].p"), "{path}");
                assert!(message.contains("Direction"), "{message}");
            }
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn bad_enum_value_names_the_path() {
        let err = parse_gir(
            r#"{"modules":[{"m":"d","Ports":[{"p":{"Direction":"in","Type":"wire","Bits":1}}]}]}"#,
        )
        .unwrap_err();
        match err {
            GirParseError::SchemaViolation { path, .. } => {
                assert_eq!(path, "modules[0].Ports[0].p.Direction");
            }
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_preserved() {
        let doc = parse_gir(
            r#"{"modules":[{"m":"d","Function":"d","Notes":"extra"}],"Version":"1"}"#,
        )
        .unwrap();
        assert_eq!(doc.extra["Version"], "1");
        assert_eq!(doc.modules[0].extra["Notes"], "extra");
    }

    #[test]
    fn malformed_json_is_syntax_error() {
        assert!(matches!(
            parse_gir("{not json"),
            Err(GirParseError::JsonSyntax(_))
        ));
    }

    #[test]
    fn ellipsis_entries_are_skipped() {
        let doc = parse_gir(
            r#"{"modules":[{"m":"d","Function":"d","Parameters":[{"W":"8","...":"..."}],"Ports":["..."]}]}"#,
        )
        .unwrap();
        assert_eq!(doc.modules[0].parameters.len(), 1);
        assert!(doc.modules[0].ports.is_empty());
    }

    #[test]
    fn instance_parsing() {
        let doc = parse_gir(
            r#"{"modules":[{"top":"t. t.","Function":"t. t.",
                "Instances":[{"u0":{"Type":"leaf","Function":"leaf fn.",
                  "Parameters":[{"W":"4"}],
                  "Connections":[{"a":"x[3:0]"},{"b":"y & z"}]}}]}]}"#,
        )
        .unwrap();
        let inst = &doc.modules[0].instances[0];
        assert_eq!(inst.instance_name, "u0");
        assert_eq!(inst.module_type, "leaf");
        assert_eq!(inst.connections.len(), 2);
        assert_eq!(inst.connections[1].parent_signal_expression, "y & z");
    }
}
