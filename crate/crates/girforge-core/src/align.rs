//! Rule-based translation of a design summary into natural-language prompt
//! material.
//!
//! Three fixed sentence templates cover module declarations, ports, and
//! instantiations, and a guidance block spells out architecture, control,
//! and data-path expectations. The templates are reproduced verbatim,
//! including their hard-coded plural forms ("1 parameters"): downstream
//! tests check template fidelity, and prettified grammar would break the
//! fixed structure the second-stage model is prompted with.

use serde::Serialize;

use crate::gir::{GirDocument, GirInstance, GirModule, GirPort, PortDirection};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuidanceText {
    pub architecture_decomposition: String,
    pub control_logic: String,
    pub data_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentText {
    pub module_declaration: String,
    pub port_descriptions: Vec<String>,
    pub instantiation_descriptions: Vec<String>,
    pub guidance: GuidanceText,
}

/// Placeholder for facts the summary cannot supply; the generating model is
/// expected to choose them.
pub const TO_BE_DETERMINED: &str = "<to be determined by the generator>";

/// "<module_name> module defined with <parameter_count> parameters,
/// <input_count> input ports, and <output_count> output ports."
/// An inout port counts as both an input and an output.
pub fn render_module_declaration(module: &GirModule) -> String {
    format!(
        "{} module defined with {} parameters, {} input ports, and {} output ports.",
        module.name,
        module.parameters.len(),
        module.input_count(),
        module.output_count(),
    )
}

/// "Port <name> is of <direction> type, with bit-width <width>, synchronized
/// to the <clock_domain> clock domain."
pub fn render_port(port: &GirPort, clock_domain: &str) -> String {
    format!(
        "Port {} is of {} type, with bit-width {}, synchronized to the {} clock domain.",
        port.name,
        port.direction.as_str(),
        port.bits.width(),
        clock_domain,
    )
}

/// "Instantiates <count> submodules, where <submodule_name> implements
/// <function_description>, connected to the parent module via
/// <interface_name>."
pub fn render_instance(instance: &GirInstance, count: usize, interface_name: &str) -> String {
    let function = if instance.function_summary.trim().is_empty() {
        "an unspecified function"
    } else {
        instance.function_summary.trim()
    };
    format!(
        "Instantiates {} submodules, where {} implements {}, connected to the parent module via {}.",
        count, instance.instance_name, function, interface_name,
    )
}

/// The clock domain attributed to a module's ports: the name of its first
/// clock-looking port (`clk*`, `*_clk`, or exactly `clock`), else "default".
pub fn clock_domain_of(module: &GirModule) -> String {
    module
        .ports
        .iter()
        .find(|p| {
            let name = p.name.to_ascii_lowercase();
            name.starts_with("clk") || name.ends_with("_clk") || name == "clock"
        })
        .map(|p| p.name.clone())
        .unwrap_or_else(|| "default".to_string())
}

/// Comma-joined parent signal expressions, or "direct wiring" when the
/// instance has no connection list.
fn interface_name_of(instance: &GirInstance) -> String {
    if instance.connections.is_empty() {
        return "direct wiring".to_string();
    }
    instance
        .connections
        .iter()
        .map(|c| c.parent_signal_expression.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Builds the three guidance aspects from whole-document structure.
pub fn render_guidance(doc: &GirDocument) -> GuidanceText {
    GuidanceText {
        architecture_decomposition: architecture_decomposition(doc),
        control_logic: control_logic(doc),
        data_path: data_path(doc),
    }
}

fn architecture_decomposition(doc: &GirDocument) -> String {
    let mut lines = Vec::new();

    lines.push("Module hierarchy matrix:".to_string());
    let mut any_edge = false;
    for module in &doc.modules {
        for inst in &module.instances {
            lines.push(format!(
                "- {} -> {} (instance {})",
                module.name, inst.module_type, inst.instance_name
            ));
            any_edge = true;
        }
    }
    if !any_edge {
        let top = doc.top().map(|m| m.name.as_str()).unwrap_or("design");
        lines.push(format!("- {top} (no submodules)"));
    }

    lines.push("Submodule function mapping:".to_string());
    let mut any_inst = false;
    for module in &doc.modules {
        for inst in &module.instances {
            let function = if inst.function_summary.trim().is_empty() {
                "an unspecified function"
            } else {
                inst.function_summary.trim()
            };
            lines.push(format!("- {}: {}", inst.instance_name, function));
            any_inst = true;
        }
    }
    if !any_inst {
        lines.push("- (none)".to_string());
    }

    lines.push("Storage configuration parameters:".to_string());
    let mut any_param = false;
    for module in &doc.modules {
        for param in &module.parameters {
            lines.push(format!("- {}.{} = {}", module.name, param.name, param.value));
            any_param = true;
        }
    }
    if !any_param {
        lines.push("- (none)".to_string());
    }

    lines.join("\n")
}

fn control_logic(doc: &GirDocument) -> String {
    let reset = doc.top().map(reset_style).unwrap_or(TO_BE_DETERMINED);
    format!(
        "Define a state machine with unspecified, timing control based on {reset} reset \
         mechanisms, and finite state machine encoding for processing steps."
    )
}

/// Reset synchronicity heuristic: with no reset-looking port the choice is
/// left to the generator; a reset named with `_n` or `async` markers, or one
/// in a module without a clock, reads as asynchronous; otherwise synchronous.
fn reset_style(module: &GirModule) -> &'static str {
    let reset = module.ports.iter().find(|p| {
        let name = p.name.to_ascii_lowercase();
        name.contains("rst") || name.contains("reset")
    });
    let Some(reset) = reset else {
        return TO_BE_DETERMINED;
    };
    let name = reset.name.to_ascii_lowercase();
    let has_clock = clock_domain_of(module) != "default";
    if has_clock && !name.ends_with("_n") && !name.contains("async") {
        "synchronous"
    } else {
        "asynchronous"
    }
}

fn data_path(doc: &GirDocument) -> String {
    let strategy = doc.top().map(width_strategy).unwrap_or_else(|| "none".to_string());
    format!(
        "Define a signal flow architecture from input buffers to pipeline registers, \
         computational units, and output latches, incorporating an {TO_BE_DETERMINED}-stage \
         pipeline design with a bit-width conversion strategy named {strategy}."
    )
}

/// Names a conversion strategy from the dominant input and output widths of
/// the top module: "none" when they agree (or there are no ports), otherwise
/// "<in>-bit to <out>-bit conversion". Dominance = most frequent width,
/// wider width winning ties so data buses outrank single-bit flags.
fn width_strategy(module: &GirModule) -> String {
    let dominant = |dir_in: bool| -> Option<u64> {
        let mut counts: Vec<(u64, usize)> = Vec::new();
        for port in &module.ports {
            let matches_dir = match port.direction {
                PortDirection::Input => dir_in,
                PortDirection::Output => !dir_in,
                PortDirection::Inout => true,
            };
            if !matches_dir {
                continue;
            }
            let w = port.bits.width();
            match counts.iter_mut().find(|(width, _)| *width == w) {
                Some((_, n)) => *n += 1,
                None => counts.push((w, 1)),
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(w, _)| w)
    };

    match (dominant(true), dominant(false)) {
        (Some(i), Some(o)) if i != o => format!("{i}-bit to {o}-bit conversion"),
        _ => "none".to_string(),
    }
}

/// Composes the full alignment: declaration sentences for every module (top
/// first), port sentences in summary order, instantiation sentences in
/// summary order, and the guidance triple.
pub fn render_alignment(doc: &GirDocument) -> AlignmentText {
    let module_declaration = doc
        .modules
        .iter()
        .map(render_module_declaration)
        .collect::<Vec<_>>()
        .join("\n");

    let mut port_descriptions = Vec::new();
    for module in &doc.modules {
        let domain = clock_domain_of(module);
        for port in &module.ports {
            port_descriptions.push(render_port(port, &domain));
        }
    }

    let mut instantiation_descriptions = Vec::new();
    for module in &doc.modules {
        let count = module.instances.len();
        for inst in &module.instances {
            instantiation_descriptions.push(render_instance(
                inst,
                count,
                &interface_name_of(inst),
            ));
        }
    }

    AlignmentText {
        module_declaration,
        port_descriptions,
        instantiation_descriptions,
        guidance: render_guidance(doc),
    }
}

impl AlignmentText {
    /// Plain-text form used in prompts and written by the CLI.
    pub fn to_text(&self) -> String {
        let list = |items: &[String]| {
            if items.is_empty() {
                "(none)".to_string()
            } else {
                items.join("\n")
            }
        };
        format!(
            "Module Declaration:\n{}\n\nPort Descriptions:\n{}\n\nInstantiation Logic:\n{}\n\n\
             Architecture Decomposition:\n{}\n\nControl Logic:\n{}\n\nData Path:\n{}\n",
            self.module_declaration,
            list(&self.port_descriptions),
            list(&self.instantiation_descriptions),
            self.guidance.architecture_decomposition,
            self.guidance.control_logic,
            self.guidance.data_path,
        )
    }

    /// JSON form: {module_declaration, ports[], instances[], guidance{}}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "module_declaration": self.module_declaration,
            "ports": self.port_descriptions,
            "instances": self.instantiation_descriptions,
            "guidance": {
                "architecture_decomposition": self.guidance.architecture_decomposition,
                "control_logic": self.guidance.control_logic,
                "data_path": self.guidance.data_path,
            },
        })
    }
}
