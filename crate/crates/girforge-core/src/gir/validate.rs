//! Structural validation of GIR documents.

use std::collections::HashSet;
use std::fmt;

use super::{GirDocument, NetType, PortDirection};
use crate::ident::is_valid_identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// The document cannot be used downstream (serialization refuses it).
    Error,
    /// Suspicious but usable; surfaced so callers can log or report it.
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.issues
            .iter()
            .any(|i| i.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }

    fn push(&mut self, severity: Severity, path: String, message: String) {
        self.issues.push(ValidationIssue {
            severity,
            path,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("no issues");
        }
        for (idx, issue) in self.issues.iter().enumerate() {
            if idx > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}: {}", issue.severity, issue.path, issue.message)?;
        }
        Ok(())
    }
}

/// Checks a document against the structural rules the rest of the pipeline
/// relies on. All issues are collected rather than stopping at the first.
///
/// Errors: no modules at all, names that are not Verilog identifiers
/// (connection port names excepted), duplicate names within a scope, and a
/// later module redefining the top module's name. Warnings: duplicate names
/// among non-top modules, `input` ports declared `reg`, instances of types no
/// module in the document defines, empty function descriptions, and
/// connection port names that are not identifiers.
pub fn validate_gir(doc: &GirDocument) -> ValidationReport {
    let mut report = ValidationReport::default();

    if doc.modules.is_empty() {
        report.push(
            Severity::Error,
            "modules".to_string(),
            "document defines no modules".to_string(),
        );
        return report;
    }

    let defined: HashSet<&str> = doc.modules.iter().map(|m| m.name.as_str()).collect();
    let top_name = doc.modules[0].name.as_str();
    let mut seen_modules: HashSet<&str> = HashSet::new();

    for (mi, module) in doc.modules.iter().enumerate() {
        let mpath = format!("modules[{mi}]");

        if !is_valid_identifier(&module.name) {
            report.push(
                Severity::Error,
                mpath.clone(),
                format!("module name {:?} is not a valid identifier", module.name),
            );
        }
        if mi > 0 && module.name == top_name {
            report.push(
                Severity::Error,
                mpath.clone(),
                format!("module {:?} redefines the top module's name", module.name),
            );
        } else if !seen_modules.insert(module.name.as_str()) {
            report.push(
                Severity::Warning,
                mpath.clone(),
                format!("module name {:?} appears more than once", module.name),
            );
        }
        if module.function_summary.trim().is_empty() {
            report.push(
                Severity::Warning,
                format!("{mpath}.Function"),
                "module has no function description".to_string(),
            );
        }

        let mut seen_params = HashSet::new();
        for (pi, param) in module.parameters.iter().enumerate() {
            let ppath = format!("{mpath}.Parameters[{pi}]");
            if !is_valid_identifier(&param.name) {
                report.push(
                    Severity::Error,
                    ppath.clone(),
                    format!("parameter name {:?} is not a valid identifier", param.name),
                );
            }
            if !seen_params.insert(param.name.as_str()) {
                report.push(
                    Severity::Error,
                    ppath,
                    format!("duplicate parameter name {:?}", param.name),
                );
            }
        }

        let mut seen_ports = HashSet::new();
        for (pi, port) in module.ports.iter().enumerate() {
            let ppath = format!("{mpath}.Ports[{pi}]");
            if !is_valid_identifier(&port.name) {
                report.push(
                    Severity::Error,
                    ppath.clone(),
                    format!("port name {:?} is not a valid identifier", port.name),
                );
            }
            if !seen_ports.insert(port.name.as_str()) {
                report.push(
                    Severity::Error,
                    ppath.clone(),
                    format!("duplicate port name {:?}", port.name),
                );
            }
            if port.direction == PortDirection::Input && port.net_type == NetType::Reg {
                report.push(
                    Severity::Warning,
                    ppath,
                    format!("input port {:?} declared as reg", port.name),
                );
            }
        }

        let mut seen_instances = HashSet::new();
        for (ii, inst) in module.instances.iter().enumerate() {
            let ipath = format!("{mpath}.Instances[{ii}]");
            if !is_valid_identifier(&inst.instance_name) {
                report.push(
                    Severity::Error,
                    ipath.clone(),
                    format!(
                        "instance name {:?} is not a valid identifier",
                        inst.instance_name
                    ),
                );
            }
            if !seen_instances.insert(inst.instance_name.as_str()) {
                report.push(
                    Severity::Error,
                    ipath.clone(),
                    format!("duplicate instance name {:?}", inst.instance_name),
                );
            }
            if !is_valid_identifier(&inst.module_type) {
                report.push(
                    Severity::Error,
                    format!("{ipath}.Type"),
                    format!(
                        "instance type {:?} is not a valid identifier",
                        inst.module_type
                    ),
                );
            } else if !defined.contains(inst.module_type.as_str()) {
                report.push(
                    Severity::Warning,
                    format!("{ipath}.Type"),
                    format!(
                        "instance type {:?} is not defined in this document",
                        inst.module_type
                    ),
                );
            }

            let mut seen_conns = HashSet::new();
            for (ci, conn) in inst.connections.iter().enumerate() {
                let cpath = format!("{ipath}.Connections[{ci}]");
                // Warning rather than error: extraction uses "$pos<i>"
                // placeholder names for positional connections it cannot
                // resolve, and those must stay serializable.
                if !is_valid_identifier(&conn.submodule_port) {
                    report.push(
                        Severity::Warning,
                        cpath.clone(),
                        format!(
                            "connection port {:?} is not a valid identifier",
                            conn.submodule_port
                        ),
                    );
                }
                if !seen_conns.insert(conn.submodule_port.as_str()) {
                    report.push(
                        Severity::Error,
                        cpath,
                        format!("duplicate connection to port {:?}", conn.submodule_port),
                    );
                }
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_gir;
    use super::*;

    fn parse(text: &str) -> GirDocument {
        parse_gir(text).unwrap()
    }

    #[test]
    fn clean_document_has_no_issues() {
        let doc = parse(
            r#"{"modules":[
              {"top":"t. t.","Function":"t. t.",
               "Ports":[{"clk":{"Direction":"input","Type":"wire","Bits":1}}],
               "Instances":[{"u0":{"Type":"leaf","Connections":[{"a":"clk"}]}}]},
              {"leaf":"l. l.","Function":"l. l."}
            ]}"#,
        );
        let report = validate_gir(&doc);
        assert!(report.issues.is_empty(), "{report}");
    }

    #[test]
    fn empty_document_is_an_error() {
        let doc = parse(r#"{"modules":[]}"#);
        assert!(validate_gir(&doc).has_errors());
    }

    #[test]
    fn bad_names_are_errors() {
        let doc = parse(
            r#"{"modules":[{"2bad":"d","Function":"d",
               "Ports":[{"my port":{"Direction":"input","Type":"wire","Bits":1}}]}]}"#,
        );
        let report = validate_gir(&doc);
        assert_eq!(report.errors().count(), 2);
    }

    #[test]
    fn duplicate_ports_are_errors() {
        let doc = parse(
            r#"{"modules":[{"m":"d","Function":"d","Ports":[
               {"a":{"Direction":"input","Type":"wire","Bits":1}},
               {"a":{"Direction":"output","Type":"wire","Bits":1}}]}]}"#,
        );
        let report = validate_gir(&doc);
        assert_eq!(report.errors().count(), 1);
        assert!(report.issues[0].message.contains("duplicate port"));
    }

    #[test]
    fn top_name_collision_is_error_other_duplicates_warn() {
        let doc = parse(
            r#"{"modules":[{"m":"d","Function":"d"},{"m":"d","Function":"d"}]}"#,
        );
        assert!(validate_gir(&doc).has_errors());

        let doc = parse(
            r#"{"modules":[{"top":"d","Function":"d"},
               {"leaf":"d","Function":"d"},{"leaf":"d","Function":"d"}]}"#,
        );
        let report = validate_gir(&doc);
        assert!(!report.has_errors());
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn input_reg_and_external_type_warn() {
        let doc = parse(
            r#"{"modules":[{"m":"d","Function":"d",
               "Ports":[{"a":{"Direction":"input","Type":"reg","Bits":1}}],
               "Instances":[{"u0":{"Type":"elsewhere"}}]}]}"#,
        );
        let report = validate_gir(&doc);
        assert!(!report.has_errors());
        assert_eq!(report.warnings().count(), 2);
    }

    #[test]
    fn empty_function_warns() {
        let doc = parse(r#"{"modules":[{"m":"","Function":"  "}]}"#);
        let report = validate_gir(&doc);
        assert!(!report.has_errors());
        assert_eq!(report.warnings().count(), 1);
    }
}
