//! Conversion from parsed module declarations to the design summary form.

use thiserror::Error;

use super::{Connection, SubsetNote, VerilogModuleDecl};
use crate::gir::{
    GirConnection, GirDocument, GirInstance, GirModule, GirParameter, GirPort,
};

#[derive(Debug, Error)]
pub enum ToGirError {
    #[error("top module {top:?} not found among extracted modules")]
    TopNotFound { top: String },
}

/// Builds a hierarchical design summary rooted at `top`.
///
/// The top module comes first, followed by the declarations it instantiates
/// in depth-first first-instantiation order; declarations unreachable from
/// the top are left out. Function summaries are emitted empty, to be filled
/// in later by description synthesis. Positional connections are resolved to
/// the instantiated module's port names when its declaration is available;
/// otherwise they keep `$pos<i>` placeholder names and a note is recorded.
pub fn to_gir(
    decls: &[VerilogModuleDecl],
    top: &str,
) -> Result<(GirDocument, Vec<SubsetNote>), ToGirError> {
    if !decls.iter().any(|d| d.name == top) {
        return Err(ToGirError::TopNotFound {
            top: top.to_string(),
        });
    }

    let mut order: Vec<&VerilogModuleDecl> = Vec::new();
    let mut included: Vec<&str> = Vec::new();
    visit(decls, top, &mut order, &mut included);

    let mut notes = Vec::new();
    let modules = order
        .iter()
        .map(|decl| convert_module(decl, decls, &mut notes))
        .collect();

    Ok((
        GirDocument {
            modules,
            extra: Default::default(),
        },
        notes,
    ))
}

fn visit<'a>(
    decls: &'a [VerilogModuleDecl],
    name: &str,
    order: &mut Vec<&'a VerilogModuleDecl>,
    included: &mut Vec<&'a str>,
) {
    if included.iter().any(|n| *n == name) {
        return;
    }
    let Some(decl) = decls.iter().find(|d| d.name == name) else {
        return;
    };
    included.push(&decl.name);
    order.push(decl);
    for inst in &decl.instantiations {
        visit(decls, &inst.module_type, order, included);
    }
}

fn convert_module(
    decl: &VerilogModuleDecl,
    all: &[VerilogModuleDecl],
    notes: &mut Vec<SubsetNote>,
) -> GirModule {
    GirModule {
        name: decl.name.clone(),
        function_summary: String::new(),
        parameters: decl
            .public_params()
            .map(|p| GirParameter {
                name: p.name.clone(),
                value: p.default_text.clone(),
            })
            .collect(),
        ports: decl
            .ports
            .iter()
            .map(|p| GirPort {
                name: p.name.clone(),
                direction: p.direction,
                net_type: p.net_type,
                bits: p.bits,
                extra: Default::default(),
            })
            .collect(),
        instances: decl
            .instantiations
            .iter()
            .map(|inst| convert_instance(inst, &decl.name, all, notes))
            .collect(),
        extra: Default::default(),
    }
}

fn convert_instance(
    inst: &super::Instantiation,
    parent: &str,
    all: &[VerilogModuleDecl],
    notes: &mut Vec<SubsetNote>,
) -> GirInstance {
    let target = all.iter().find(|d| d.name == inst.module_type);
    let connections = inst
        .connections
        .iter()
        .map(|conn| match conn {
            Connection::Named { port, expr } => GirConnection {
                submodule_port: port.clone(),
                parent_signal_expression: expr.clone(),
            },
            Connection::Positional { index, expr } => {
                let port = target
                    .and_then(|d| d.ports.get(*index))
                    .map(|p| p.name.clone());
                let submodule_port = match port {
                    Some(name) => name,
                    None => {
                        notes.push(SubsetNote {
                            construct: "positional connection".to_string(),
                            reason: format!(
                                "connection {index} of instance {} in module {parent} has \
                                 no resolvable port name",
                                inst.instance_name
                            ),
                        });
                        format!("$pos{index}")
                    }
                };
                GirConnection {
                    submodule_port,
                    parent_signal_expression: expr.clone(),
                }
            }
        })
        .collect();

    GirInstance {
        instance_name: inst.instance_name.clone(),
        module_type: inst.module_type.clone(),
        function_summary: String::new(),
        parameters: inst
            .param_overrides
            .iter()
            .map(|(name, value)| GirParameter {
                name: name.clone(),
                value: value.clone(),
            })
            .collect(),
        connections,
        extra: Default::default(),
    }
}
