//! Prompt assembly for both generation stages.

use crate::align::AlignmentText;
use crate::gir::template::GIR_TEMPLATE;
use crate::gir::GirDocument;
use crate::retrieval::RetrievedContext;

pub struct Stage1Prompt {
    pub system: String,
    pub user: String,
}

/// Stage 1 asks for a structured design summary. The system text embeds the
/// summary template verbatim so replies land in a parseable shape.
pub fn stage1_prompt(nl_description: &str) -> Stage1Prompt {
    let system = format!(
        "You translate natural-language hardware requirements into a hierarchical \
design summary.\nReply with exactly one JSON object inside a ```json fence, \
following this template:\n\n{GIR_TEMPLATE}\n\
Rules:\n\
- Every module object starts with its own name as the first key, whose value \
is a one-sentence function description.\n\
- Ports need Direction (input/output/inout), Type (wire/reg), and Bits.\n\
- List an Instances entry for every submodule instantiation, and define each \
instantiated module in \"modules\".\n\
- Output nothing outside the fenced JSON."
    );
    Stage1Prompt {
        system,
        user: nl_description.to_string(),
    }
}

/// Re-prompt after a failed attempt: the original request plus the error
/// report from parsing or validating the previous reply.
pub fn stage1_retry_prompt(nl_description: &str, error_report: &str) -> Stage1Prompt {
    let base = stage1_prompt(nl_description);
    Stage1Prompt {
        system: base.system,
        user: format!(
            "{nl_description}\n\nThe previous reply could not be used:\n{error_report}\n\
Reply again with a corrected JSON object in a ```json fence."
        ),
    }
}

pub struct Stage2Prompt {
    pub system: String,
    pub user: String,
}

/// Stage 2 turns the summary into Verilog. The user text carries the
/// rendered alignment sentences with their guidance sections, the retrieved
/// reference snippet (when available), and the summary JSON itself.
pub fn stage2_prompt(
    gir_json: &str,
    alignment: &AlignmentText,
    retrieval: Option<&RetrievedContext>,
    include_all_retrieved: bool,
) -> Stage2Prompt {
    let system = "You write synthesizable Verilog-2001. Implement every module in the \
design summary, matching the given names, parameters, port directions, and bit widths \
exactly. Reply with the complete source for all modules inside one ```verilog fence."
        .to_string();

    let mut user = String::new();
    user.push_str("Design summary sentences:\n");
    user.push_str(&alignment.to_text());
    user.push('\n');

    match retrieval {
        Some(context) => {
            user.push_str("Reference snippet (similar design, adapt as needed):\n");
            user.push_str("```verilog\n");
            user.push_str(context.winner.code.trim_end());
            user.push_str("\n```\n\n");
            if include_all_retrieved {
                for candidate in context
                    .candidates
                    .iter()
                    .filter(|c| c.entry.fingerprint != context.winner.fingerprint)
                {
                    user.push_str("Additional reference:\n```verilog\n");
                    user.push_str(candidate.entry.code.trim_end());
                    user.push_str("\n```\n\n");
                }
            }
        }
        None => user.push('\n'),
    }

    user.push_str("Design structure (JSON):\n```json\n");
    user.push_str(gir_json.trim_end());
    user.push_str("\n```\n");

    Stage2Prompt { system, user }
}

/// Deterministic description used by dataprep when no LLM is configured:
/// name, function, parameter and port coverage straight from the summary.
pub fn template_description(doc: &GirDocument) -> String {
    let top = doc.top().expect("validated document has a top module");
    let mut text = format!(
        "Design a Verilog module named {} with {} parameters, {} input ports, and {} output ports.",
        top.name,
        top.parameters.len(),
        top.input_count(),
        top.output_count()
    );
    if !top.function_summary.trim().is_empty() {
        text.push_str(&format!(" It implements {}.", top.function_summary.trim()));
    }
    if !top.instances.is_empty() {
        let names: Vec<String> = top
            .instances
            .iter()
            .map(|i| format!("{} ({})", i.instance_name, i.module_type))
            .collect();
        text.push_str(&format!(" It instantiates {}.", names.join(", ")));
    }
    if doc.modules.len() > 1 {
        text.push_str(&format!(
            " The full hierarchy defines {} modules.",
            doc.modules.len()
        ));
    }
    text
}

/// Prompt for LLM-written dataset descriptions, covering the attributes the
/// deterministic template covers.
pub fn description_prompt(gir_json: &str) -> (String, String) {
    let system = "You summarize hardware designs. Given a design structure in JSON, \
write one natural-language paragraph describing the top module: its name, its function, \
its parameters, and its input and output ports. Mention submodules when present. \
Reply with the paragraph only."
        .to_string();
    let user = format!("```json\n{}\n```", gir_json.trim_end());
    (system, user)
}
