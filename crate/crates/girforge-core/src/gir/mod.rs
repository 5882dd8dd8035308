//! General intermediate representation of one Verilog design: the data
//! model, its canonical JSON form, strict validation, and lenient repair of
//! LLM-emitted text.
//!
//! The JSON layout is hierarchical: a root `"modules"` list in which every
//! module object leads with its own name as a key, followed by `"Function"`,
//! `"Parameters"`, `"Ports"` (each port mapping its name to `Direction` /
//! `Type` / `Bits` attributes), and `"Instances"` (each instance mapping its
//! name to `Type` / `Function` / `Parameters` / `Connections`). Unknown keys
//! are carried along verbatim so that documents survive a parse/serialize
//! round trip byte for byte.

mod parse;
mod repair;
mod serialize;
pub mod template;
mod validate;

pub use parse::{parse_gir, GirParseError};
pub use repair::{repair_gir, RepairError};
pub use serialize::{serialize_gir, SerializeError};
pub use validate::{validate_gir, Severity, ValidationIssue, ValidationReport};

/// Ordered JSON object used to hold unknown keys verbatim.
pub type ExtraMap = serde_json::Map<String, serde_json::Value>;

/// A whole design: one or more modules, the first being the top module.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GirDocument {
    pub modules: Vec<GirModule>,
    /// Unknown root-level keys, preserved for round-trip fidelity.
    pub extra: ExtraMap,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GirModule {
    pub name: String,
    pub function_summary: String,
    pub parameters: Vec<GirParameter>,
    pub ports: Vec<GirPort>,
    pub instances: Vec<GirInstance>,
    pub extra: ExtraMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GirParameter {
    pub name: String,
    /// Literal text, stored verbatim (e.g. `8`, `4'b1010`).
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDirection {
    Input,
    Output,
    Inout,
}

impl PortDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            PortDirection::Input => "input",
            PortDirection::Output => "output",
            PortDirection::Inout => "inout",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "input" => Some(PortDirection::Input),
            "output" => Some(PortDirection::Output),
            "inout" => Some(PortDirection::Inout),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetType {
    Reg,
    Wire,
}

impl NetType {
    pub fn as_str(self) -> &'static str {
        match self {
            NetType::Reg => "reg",
            NetType::Wire => "wire",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "reg" => Some(NetType::Reg),
            "wire" => Some(NetType::Wire),
            _ => None,
        }
    }
}

/// Port width: either a bare width or an explicit `[msb:lsb]` range.
/// Ascending and descending ranges are both legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitSpec {
    Width(u64),
    Range(u64, u64),
}

impl BitSpec {
    /// Number of bits covered: `w` for `Width(w)`, `|msb - lsb| + 1` for a range.
    pub fn width(&self) -> u64 {
        match *self {
            BitSpec::Width(w) => w,
            BitSpec::Range(msb, lsb) => msb.abs_diff(lsb) + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GirPort {
    pub name: String,
    pub direction: PortDirection,
    pub net_type: NetType,
    pub bits: BitSpec,
    pub extra: ExtraMap,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GirInstance {
    pub instance_name: String,
    pub module_type: String,
    pub function_summary: String,
    pub parameters: Vec<GirParameter>,
    pub connections: Vec<GirConnection>,
    pub extra: ExtraMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GirConnection {
    pub submodule_port: String,
    /// Verbatim Verilog expression on the parent side.
    pub parent_signal_expression: String,
}

impl GirDocument {
    /// The top module (first in the list), if any.
    pub fn top(&self) -> Option<&GirModule> {
        self.modules.first()
    }

    /// Looks up a module by name.
    pub fn module(&self, name: &str) -> Option<&GirModule> {
        self.modules.iter().find(|m| m.name == name)
    }
}

impl GirModule {
    pub fn port(&self, name: &str) -> Option<&GirPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn input_count(&self) -> usize {
        self.ports
            .iter()
            .filter(|p| matches!(p.direction, PortDirection::Input | PortDirection::Inout))
            .count()
    }

    pub fn output_count(&self) -> usize {
        self.ports
            .iter()
            .filter(|p| matches!(p.direction, PortDirection::Output | PortDirection::Inout))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitspec_width() {
        assert_eq!(BitSpec::Width(8).width(), 8);
        assert_eq!(BitSpec::Range(7, 0).width(), 8);
        assert_eq!(BitSpec::Range(0, 7).width(), 8);
        assert_eq!(BitSpec::Range(3, 3).width(), 1);
    }

    #[test]
    fn inout_counts_as_both() {
        let m = GirModule {
            name: "m".into(),
            ports: vec![GirPort {
                name: "io".into(),
                direction: PortDirection::Inout,
                net_type: NetType::Wire,
                bits: BitSpec::Width(1),
                extra: ExtraMap::new(),
            }],
            ..Default::default()
        };
        assert_eq!(m.input_count(), 1);
        assert_eq!(m.output_count(), 1);
    }
}
