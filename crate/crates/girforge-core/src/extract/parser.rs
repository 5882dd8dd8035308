//! Structural parsing of purified Verilog: module headers, parameter and
//! port declarations, and instantiations.

use std::collections::HashMap;

use thiserror::Error;

use super::const_eval::eval_const_expr;
use super::lexer::{tokenize, TokKind, Token};
use super::{Connection, Instantiation, ParamDecl, PortDecl, SubsetNote, VerilogModuleDecl};
use crate::gir::{BitSpec, NetType, PortDirection};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("no module definitions found")]
    NoModulesFound,
}

/// Words that can never be instance types or signal names in the subset.
const KEYWORDS: &[&str] = &[
    "module", "macromodule", "endmodule", "input", "output", "inout", "wire", "reg", "logic",
    "bit", "tri", "tri0", "tri1", "triand", "trior", "trireg", "wand", "wor", "supply0",
    "supply1", "integer", "real", "realtime", "time", "genvar", "event", "signed", "unsigned",
    "parameter", "localparam", "defparam", "specparam", "assign", "deassign", "always",
    "always_comb", "always_ff", "always_latch", "initial", "final", "begin", "end", "if",
    "else", "case", "casex", "casez", "endcase", "default", "for", "while", "repeat",
    "forever", "wait", "disable", "function", "endfunction", "task", "endtask", "generate",
    "endgenerate", "fork", "join", "join_any", "join_none", "specify", "endspecify",
    "posedge", "negedge", "or", "and", "not", "nand", "nor", "xor", "xnor", "buf", "bufif0",
    "bufif1", "notif0", "notif1", "pullup", "pulldown", "cmos", "nmos", "pmos", "force",
    "release", "automatic", "scalared", "vectored", "small", "medium", "large", "edge",
];

/// Gate primitives: keyword-led instantiations the structural model skips.
const GATE_PRIMITIVES: &[&str] = &[
    "and", "or", "not", "nand", "nor", "xor", "xnor", "buf", "bufif0", "bufif1", "notif0",
    "notif1", "pullup", "pulldown", "cmos", "nmos", "pmos",
];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Block-opening and block-closing keywords. Statements are only inspected
/// at nesting depth zero, so instantiation-shaped text inside behavioral or
/// generate blocks is never misread as structure.
fn block_delta(word: &str) -> i32 {
    match word {
        "begin" | "case" | "casex" | "casez" | "function" | "task" | "generate" | "fork"
        | "specify" => 1,
        "end" | "endcase" | "endfunction" | "endtask" | "endgenerate" | "join" | "join_any"
        | "join_none" | "endspecify" => -1,
        _ => 0,
    }
}

/// Finds every `module ... endmodule` region in purified source and parses
/// its structural skeleton. Subset violations (generate blocks, gate
/// primitives, wildcard connections, unevaluable widths) become notes; a
/// module whose header cannot be parsed at all is skipped with a note.
pub fn extract_modules(
    purified: &str,
) -> Result<(Vec<VerilogModuleDecl>, Vec<SubsetNote>), ExtractError> {
    let tokens = tokenize(purified);
    let mut decls = Vec::new();
    let mut notes = Vec::new();
    let mut pos = 0usize;

    while pos < tokens.len() {
        let tok = &tokens[pos];
        if tok.kind == TokKind::Ident && matches!(tok.text(purified), "module" | "macromodule") {
            let mut parser = ModuleParser {
                src: purified,
                tokens: &tokens,
                pos: pos + 1,
                notes: &mut notes,
            };
            match parser.parse(tok.span.start) {
                Ok(decl) => {
                    pos = parser.pos;
                    decls.push(decl);
                }
                Err(reason) => {
                    // Recover at the matching endmodule, or at the next
                    // module keyword if none is found.
                    pos = parser.pos;
                    notes.push(SubsetNote {
                        construct: "module".to_string(),
                        reason,
                    });
                    while pos < tokens.len() {
                        let t = &tokens[pos];
                        if t.kind == TokKind::Ident {
                            match t.text(purified) {
                                "endmodule" => {
                                    pos += 1;
                                    break;
                                }
                                "module" | "macromodule" => break,
                                _ => {}
                            }
                        }
                        pos += 1;
                    }
                }
            }
        } else {
            pos += 1;
        }
    }

    if decls.is_empty() {
        return Err(ExtractError::NoModulesFound);
    }
    Ok((decls, notes))
}

/// Port facts accumulated from the header, to be completed (for the
/// body-declared style) while scanning the body.
struct PendingPort {
    name: String,
    direction: Option<PortDirection>,
    net_type: Option<NetType>,
    range_text: Option<(String, String)>,
}

struct ModuleParser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    pos: usize,
    notes: &'a mut Vec<SubsetNote>,
}

impl ModuleParser<'_> {
    fn parse(&mut self, module_start: usize) -> Result<VerilogModuleDecl, String> {
        let name = self
            .take_ident()
            .ok_or_else(|| "module keyword without a name".to_string())?;

        let mut params: Vec<ParamDecl> = Vec::new();
        if self.peek_punct('#') {
            self.pos += 1;
            let items = self
                .paren_items()
                .ok_or_else(|| format!("unbalanced parameter list in module {name}"))?;
            for item in items {
                self.parse_param_item(&item, false, &mut params);
            }
        }

        let mut pending: Vec<PendingPort> = Vec::new();
        if self.peek_punct('(') {
            let items = self
                .paren_items()
                .ok_or_else(|| format!("unbalanced port list in module {name}"))?;
            let mut carry: Option<(PortDirection, Option<NetType>, Option<(String, String)>)> =
                None;
            for item in items {
                if item.is_empty() {
                    continue;
                }
                if let Some(port) = self.parse_header_port(&item, &mut carry) {
                    pending.push(port);
                }
            }
        }
        if !self.eat_punct(';') {
            // Tolerate a missing semicolon by scanning to the next one.
            while self.pos < self.tokens.len() && !self.eat_punct(';') {
                self.pos += 1;
            }
        }

        let mut instantiations = Vec::new();
        let end = self.parse_body(&name, &mut params, &mut pending, &mut instantiations)?;

        // Complete pending ports: body declarations have filled in what the
        // header left open.
        let env: HashMap<String, String> = params
            .iter()
            .map(|p| (p.name.clone(), p.default_text.clone()))
            .collect();
        let mut ports = Vec::new();
        for p in pending {
            let Some(direction) = p.direction else {
                self.notes.push(SubsetNote {
                    construct: "port".to_string(),
                    reason: format!(
                        "port {} of module {name} has no direction declaration; skipped",
                        p.name
                    ),
                });
                continue;
            };
            let bits = match &p.range_text {
                None => BitSpec::Width(1),
                Some((msb, lsb)) => self.eval_range(msb, lsb, &env, &p.name, &name),
            };
            ports.push(PortDecl {
                name: p.name,
                direction,
                net_type: p.net_type.unwrap_or(NetType::Wire),
                bits,
            });
        }

        Ok(VerilogModuleDecl {
            name,
            params,
            ports,
            instantiations,
            source_span: module_start..end,
        })
    }

    fn eval_range(
        &mut self,
        msb: &str,
        lsb: &str,
        env: &HashMap<String, String>,
        port: &str,
        module: &str,
    ) -> BitSpec {
        match (eval_const_expr(msb, env), eval_const_expr(lsb, env)) {
            (Some(m), Some(l)) if m >= 0 && l >= 0 => BitSpec::Range(m as u64, l as u64),
            _ => {
                self.notes.push(SubsetNote {
                    construct: "port width".to_string(),
                    reason: format!(
                        "range [{msb}:{lsb}] of port {port} in module {module} does not \
                         fold to constants; recorded as width 1"
                    ),
                });
                BitSpec::Width(1)
            }
        }
    }

    /// Parses one comma-separated header port item. `carry` holds the
    /// direction/type/range of the previous item, which bare names inherit
    /// (`input [7:0] a, b` makes b an 8-bit input).
    fn parse_header_port(
        &mut self,
        item: &[Token],
        carry: &mut Option<(PortDirection, Option<NetType>, Option<(String, String)>)>,
    ) -> Option<PendingPort> {
        let mut direction = None;
        let mut net_type = None;
        let mut range_text = None;
        let mut name = None;
        let mut i = 0usize;

        while i < item.len() {
            let tok = &item[i];
            match &tok.kind {
                TokKind::Ident => {
                    let word = tok.text(self.src);
                    match word {
                        "input" => direction = Some(PortDirection::Input),
                        "output" => direction = Some(PortDirection::Output),
                        "inout" => direction = Some(PortDirection::Inout),
                        "reg" => net_type = Some(NetType::Reg),
                        "wire" | "logic" | "bit" | "tri" => net_type = Some(NetType::Wire),
                        "signed" | "unsigned" | "integer" | "automatic" | "scalared"
                        | "vectored" => {}
                        _ if is_keyword(word) => {}
                        _ => name = Some(word.to_string()),
                    }
                    i += 1;
                }
                TokKind::Punct('[') => {
                    let (range, next) = self.bracket_range(item, i)?;
                    if name.is_none() {
                        // Packed range before the name.
                        range_text = Some(range);
                    }
                    // Ranges after the name are unpacked dimensions; the
                    // structural model ignores them.
                    i = next;
                }
                _ => {
                    i += 1;
                }
            }
        }

        let name = name?;
        if direction.is_none() {
            if let Some((dir, net, range)) = carry {
                // Bare continuation name inheriting the previous declaration.
                return Some(PendingPort {
                    name,
                    direction: Some(*dir),
                    net_type: *net,
                    range_text: range.clone(),
                });
            }
            // Old-style header: just names, details follow in the body.
            return Some(PendingPort {
                name,
                direction: None,
                net_type: None,
                range_text: None,
            });
        }
        *carry = Some((direction.unwrap(), net_type, range_text.clone()));
        Some(PendingPort {
            name,
            direction,
            net_type,
            range_text,
        })
    }

    /// Parses `[msb : lsb]` starting at `item[start]` (an opening bracket).
    /// Returns the two expression texts and the index after the bracket.
    /// The split is at the last colon at bracket depth 1, so parenthesized
    /// ternaries inside the msb expression survive.
    fn bracket_range(&self, item: &[Token], start: usize) -> Option<((String, String), usize)> {
        let mut depth = 0i32;
        let mut colon: Option<usize> = None;
        let mut end = None;
        for (i, tok) in item.iter().enumerate().skip(start) {
            match tok.kind {
                TokKind::Punct('[') | TokKind::Punct('(') | TokKind::Punct('{') => depth += 1,
                TokKind::Punct(']') | TokKind::Punct(')') | TokKind::Punct('}') => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                TokKind::Punct(':') if depth == 1 => colon = Some(i),
                _ => {}
            }
        }
        let end = end?;
        let colon = colon?;
        let msb = self.slice(&item[start + 1..colon]);
        let lsb = self.slice(&item[colon + 1..end]);
        Some(((msb, lsb), end + 1))
    }

    /// Verbatim source text spanned by a token slice.
    fn slice(&self, tokens: &[Token]) -> String {
        match (tokens.first(), tokens.last()) {
            (Some(first), Some(last)) => {
                self.src[first.span.start..last.span.end].trim().to_string()
            }
            _ => String::new(),
        }
    }

    /// Parses one item of a parameter list: `parameter [type] NAME = expr`.
    fn parse_param_item(&mut self, item: &[Token], local: bool, out: &mut Vec<ParamDecl>) {
        let mut local = local;
        let eq = item.iter().position(|t| t.kind == TokKind::Punct('='));
        let name_region = match eq {
            Some(idx) => &item[..idx],
            None => item,
        };
        let mut name = None;
        for tok in name_region {
            if tok.kind == TokKind::Ident {
                let word = tok.text(self.src);
                if word == "localparam" {
                    local = true;
                } else if !is_keyword(word) {
                    name = Some(word.to_string());
                }
            }
        }
        let Some(name) = name else { return };
        let default_text = match eq {
            Some(idx) => self.slice(&item[idx + 1..]),
            None => String::new(),
        };
        out.push(ParamDecl {
            name,
            default_text,
            local,
        });
    }

    /// Collects the token groups inside a balanced `( ... )`, split at
    /// depth-1 commas. `self.pos` must sit on the opening parenthesis;
    /// afterwards it sits just past the closing one.
    fn paren_items(&mut self) -> Option<Vec<Vec<Token>>> {
        if !self.peek_punct('(') {
            return None;
        }
        self.pos += 1;
        let mut items = Vec::new();
        let mut current = Vec::new();
        let mut depth = 1i32;

        while self.pos < self.tokens.len() {
            let tok = self.tokens[self.pos].clone();
            self.pos += 1;
            match tok.kind {
                TokKind::Punct('(') | TokKind::Punct('[') | TokKind::Punct('{') => {
                    depth += 1;
                    current.push(tok);
                }
                TokKind::Punct(')') | TokKind::Punct(']') | TokKind::Punct('}') => {
                    depth -= 1;
                    if depth == 0 {
                        items.push(current);
                        return Some(items);
                    }
                    current.push(tok);
                }
                TokKind::Punct(',') if depth == 1 => {
                    items.push(std::mem::take(&mut current));
                }
                _ => current.push(tok),
            }
        }
        None
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some(t) if t.kind == TokKind::Punct(c))
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek_punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn take_ident(&mut self) -> Option<String> {
        let tok = self.tokens.get(self.pos)?;
        if tok.kind == TokKind::Ident {
            let text = tok.text(self.src);
            if !is_keyword(text) {
                self.pos += 1;
                return Some(text.to_string());
            }
        }
        None
    }

    /// Scans the module body up to `endmodule`, handling the statements the
    /// structural model cares about and tracking block nesting for the rest.
    /// Returns the byte offset just past `endmodule`.
    fn parse_body(
        &mut self,
        module: &str,
        params: &mut Vec<ParamDecl>,
        pending: &mut Vec<PendingPort>,
        instantiations: &mut Vec<Instantiation>,
    ) -> Result<usize, String> {
        let mut depth = 0i32;

        while self.pos < self.tokens.len() {
            let tok = &self.tokens[self.pos];
            if tok.kind == TokKind::Punct('@') {
                // Event controls like @(posedge clk or negedge rst_n) are
                // consumed whole so their contents are never mistaken for
                // statements.
                self.pos += 1;
                if self.peek_punct('(') {
                    let _ = self.paren_items();
                }
                continue;
            }
            if tok.kind != TokKind::Ident {
                self.pos += 1;
                continue;
            }
            let word = tok.text(self.src);

            if word == "endmodule" && depth <= 0 {
                let end = tok.span.end;
                self.pos += 1;
                return Ok(end);
            }

            let delta = block_delta(word);
            if delta != 0 {
                if word == "generate" {
                    self.notes.push(SubsetNote {
                        construct: "generate".to_string(),
                        reason: format!("generate block in module {module} not modeled"),
                    });
                }
                depth += delta;
                self.pos += 1;
                continue;
            }
            if depth > 0 {
                self.pos += 1;
                continue;
            }

            match word {
                "input" | "output" | "inout" => {
                    self.parse_body_direction(word, pending);
                }
                "reg" | "wire" | "logic" | "bit" => {
                    self.parse_body_net(word, pending);
                }
                "parameter" | "localparam" => {
                    let local = word == "localparam";
                    self.pos += 1;
                    let items = self.statement_items();
                    for item in items {
                        self.parse_param_item(&item, local, params);
                    }
                }
                _ if GATE_PRIMITIVES.contains(&word) => {
                    self.notes.push(SubsetNote {
                        construct: "gate primitive".to_string(),
                        reason: format!("{word} instantiation in module {module} not modeled"),
                    });
                    self.skip_statement();
                }
                _ if !is_keyword(word) => {
                    if !self.try_instantiation(instantiations) {
                        self.pos += 1;
                    }
                }
                _ => {
                    self.pos += 1;
                }
            }
        }
        Err(format!("module {module} is missing endmodule"))
    }

    /// Body-style direction declaration: fills direction/net/range for the
    /// named header ports.
    fn parse_body_direction(&mut self, word: &str, pending: &mut [PendingPort]) {
        let direction = match word {
            "input" => PortDirection::Input,
            "output" => PortDirection::Output,
            _ => PortDirection::Inout,
        };
        self.pos += 1;
        let items = self.statement_items();
        let mut net_type = None;
        let mut range_text = None;
        for (idx, item) in items.iter().enumerate() {
            let mut name = None;
            let mut i = 0usize;
            while i < item.len() {
                let tok = &item[i];
                match &tok.kind {
                    TokKind::Ident => {
                        let w = tok.text(self.src);
                        match w {
                            "reg" if idx == 0 => net_type = Some(NetType::Reg),
                            "wire" | "logic" | "bit" | "tri" if idx == 0 => {
                                net_type = Some(NetType::Wire)
                            }
                            _ if !is_keyword(w) => name = Some(w.to_string()),
                            _ => {}
                        }
                        i += 1;
                    }
                    TokKind::Punct('[') => match self.bracket_range(item, i) {
                        Some((range, next)) => {
                            if idx == 0 && name.is_none() {
                                range_text = Some(range);
                            }
                            i = next;
                        }
                        None => i += 1,
                    },
                    _ => i += 1,
                }
            }
            if let Some(name) = name {
                if let Some(port) = pending.iter_mut().find(|p| p.name == name) {
                    port.direction = Some(direction);
                    if port.net_type.is_none() {
                        port.net_type = net_type;
                    }
                    if port.range_text.is_none() {
                        port.range_text = range_text.clone();
                    }
                }
            }
        }
    }

    /// Body net declaration (`reg c;`): upgrades the net type of a port that
    /// was declared `output c;` separately.
    fn parse_body_net(&mut self, word: &str, pending: &mut [PendingPort]) {
        let net = if word == "reg" {
            NetType::Reg
        } else {
            NetType::Wire
        };
        self.pos += 1;
        let items = self.statement_items();
        for item in items {
            // Reject memories (`reg [7:0] mem [0:255]`): a range after the
            // name means this is storage, not a port net.
            let mut name = None;
            let mut after_name_range = false;
            let mut i = 0usize;
            while i < item.len() {
                let tok = &item[i];
                match &tok.kind {
                    TokKind::Ident => {
                        let w = tok.text(self.src);
                        if !is_keyword(w) {
                            name = Some(w.to_string());
                        }
                        i += 1;
                    }
                    TokKind::Punct('[') => {
                        if name.is_some() {
                            after_name_range = true;
                        }
                        match self.bracket_range(&item, i) {
                            Some((_, next)) => i = next,
                            None => i += 1,
                        }
                    }
                    TokKind::Punct('=') => break,
                    _ => i += 1,
                }
            }
            if after_name_range {
                continue;
            }
            if let Some(name) = name {
                if let Some(port) = pending.iter_mut().find(|p| p.name == name) {
                    if net == NetType::Reg {
                        port.net_type = Some(NetType::Reg);
                    }
                }
            }
        }
    }

    /// Collects the comma-separated items of the current statement, up to
    /// the terminating semicolon (consumed). Commas inside brackets or
    /// parens do not split.
    fn statement_items(&mut self) -> Vec<Vec<Token>> {
        let mut items = Vec::new();
        let mut current = Vec::new();
        let mut depth = 0i32;
        while self.pos < self.tokens.len() {
            let tok = self.tokens[self.pos].clone();
            match tok.kind {
                TokKind::Punct(';') if depth <= 0 => {
                    self.pos += 1;
                    break;
                }
                TokKind::Punct('(') | TokKind::Punct('[') | TokKind::Punct('{') => {
                    depth += 1;
                    current.push(tok);
                    self.pos += 1;
                }
                TokKind::Punct(')') | TokKind::Punct(']') | TokKind::Punct('}') => {
                    depth -= 1;
                    current.push(tok);
                    self.pos += 1;
                }
                TokKind::Punct(',') if depth <= 0 => {
                    items.push(std::mem::take(&mut current));
                    self.pos += 1;
                }
                TokKind::Ident
                    if depth <= 0 && matches!(tok.text(self.src), "endmodule") =>
                {
                    // Malformed statement running into endmodule: stop
                    // without consuming it.
                    break;
                }
                _ => {
                    current.push(tok);
                    self.pos += 1;
                }
            }
        }
        if !current.is_empty() {
            items.push(current);
        }
        items
    }

    fn skip_statement(&mut self) {
        self.pos += 1;
        let _ = self.statement_items();
    }

    /// Attempts to parse `type [#(overrides)] name (conns) [, name (conns)]* ;`
    /// starting at the current position. Returns false (position unchanged)
    /// when the shape does not match.
    fn try_instantiation(&mut self, out: &mut Vec<Instantiation>) -> bool {
        let start = self.pos;
        let Some(module_type) = self.take_ident() else {
            return false;
        };

        let mut param_overrides = Vec::new();
        if self.peek_punct('#') {
            self.pos += 1;
            let Some(items) = self.paren_items() else {
                self.pos = start;
                return false;
            };
            for (idx, item) in items.iter().enumerate() {
                if item.is_empty() {
                    continue;
                }
                match self.named_assoc(item) {
                    Some((name, expr)) => param_overrides.push((name, expr)),
                    None => param_overrides.push((format!("$pos{idx}"), self.slice(item))),
                }
            }
        }

        let mut parsed = Vec::new();
        loop {
            let Some(instance_name) = self.take_ident() else {
                self.pos = start;
                return false;
            };
            if !self.peek_punct('(') {
                self.pos = start;
                return false;
            }
            let Some(items) = self.paren_items() else {
                self.pos = start;
                return false;
            };

            let mut connections = Vec::new();
            let mut positional_index = 0usize;
            for item in &items {
                if item.is_empty() {
                    continue;
                }
                if item.len() == 2
                    && item[0].kind == TokKind::Punct('.')
                    && item[1].kind == TokKind::Punct('*')
                {
                    self.notes.push(SubsetNote {
                        construct: "wildcard connection".to_string(),
                        reason: format!(".* connection on instance {instance_name} not expanded"),
                    });
                    continue;
                }
                match self.named_assoc(item) {
                    Some((port, expr)) => connections.push(Connection::Named { port, expr }),
                    None => {
                        connections.push(Connection::Positional {
                            index: positional_index,
                            expr: self.slice(item),
                        });
                    }
                }
                positional_index += 1;
            }

            parsed.push(Instantiation {
                module_type: module_type.clone(),
                instance_name,
                param_overrides: param_overrides.clone(),
                connections,
            });

            if self.eat_punct(',') {
                continue;
            }
            if self.eat_punct(';') {
                break;
            }
            // Neither separator nor terminator: not an instantiation after
            // all (e.g. SystemVerilog typed declarations).
            self.pos = start;
            return false;
        }

        out.extend(parsed);
        true
    }

    /// Parses `.name(expr)` from a token group. The expression text is the
    /// verbatim slice between the parentheses, empty for open connections.
    /// The `.name` shorthand (connect to a same-named signal) is expanded.
    fn named_assoc(&self, item: &[Token]) -> Option<(String, String)> {
        if item.len() == 2 && item[0].kind == TokKind::Punct('.') && item[1].kind == TokKind::Ident
        {
            let name = item[1].text(self.src).to_string();
            return Some((name.clone(), name));
        }
        if item.len() < 4
            || item[0].kind != TokKind::Punct('.')
            || item[1].kind != TokKind::Ident
            || item[2].kind != TokKind::Punct('(')
            || item.last()?.kind != TokKind::Punct(')')
        {
            return None;
        }
        let name = item[1].text(self.src).to_string();
        let expr = self.slice(&item[3..item.len() - 1]);
        Some((name, expr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extract(src: &str) -> (Vec<VerilogModuleDecl>, Vec<SubsetNote>) {
        extract_modules(src).unwrap()
    }

    #[test]
    fn ansi_header() {
        let (decls, notes) = extract(
            "module m #(parameter WIDTH = 8) (
                input wire [WIDTH-1:0] a, b,
                input cin,
                output reg [WIDTH:0] sum
             );
             endmodule",
        );
        assert!(notes.is_empty(), "{notes:?}");
        let m = &decls[0];
        assert_eq!(m.name, "m");
        assert_eq!(m.params.len(), 1);
        assert_eq!(m.params[0].name, "WIDTH");
        assert_eq!(m.params[0].default_text, "8");
        let names: Vec<&str> = m.ports.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "cin", "sum"]);
        assert_eq!(m.ports[0].bits, BitSpec::Range(7, 0));
        assert_eq!(m.ports[1].bits, BitSpec::Range(7, 0));
        assert_eq!(m.ports[1].direction, PortDirection::Input);
        assert_eq!(m.ports[2].bits, BitSpec::Width(1));
        assert_eq!(m.ports[3].direction, PortDirection::Output);
        assert_eq!(m.ports[3].net_type, NetType::Reg);
        assert_eq!(m.ports[3].bits, BitSpec::Range(8, 0));
    }

    #[test]
    fn non_ansi_header_matches_ansi() {
        let ansi = "module m(input wire [7:0] a, output reg b); endmodule";
        let non_ansi = "module m(a, b);
            input [7:0] a;
            output b;
            reg b;
        endmodule";
        let (d1, _) = extract(ansi);
        let (d2, _) = extract(non_ansi);
        assert_eq!(d1[0].ports, d2[0].ports);
    }

    #[test]
    fn named_instantiations() {
        let (decls, _) = extract(
            "module top(input a, output z);
               wire t;
               leaf #(.W(4)) u0 (.x(a), .y(t));
               leaf u1 (.x(t), .y(z));
             endmodule
             module leaf #(parameter W=1)(input x, output y);
               assign y = x;
             endmodule",
        );
        let top = &decls[0];
        assert_eq!(top.instantiations.len(), 2);
        let u0 = &top.instantiations[0];
        assert_eq!(u0.module_type, "leaf");
        assert_eq!(u0.instance_name, "u0");
        assert_eq!(u0.param_overrides, vec![("W".to_string(), "4".to_string())]);
        assert_eq!(
            u0.connections,
            vec![
                Connection::Named { port: "x".into(), expr: "a".into() },
                Connection::Named { port: "y".into(), expr: "t".into() },
            ]
        );
    }

    #[test]
    fn positional_and_list_instantiations() {
        let (decls, _) = extract(
            "module top(input a, b, output z);
               wire t;
               leaf u0 (a, t), u1 (t, z);
             endmodule",
        );
        let top = &decls[0];
        assert_eq!(top.instantiations.len(), 2);
        assert_eq!(top.instantiations[1].instance_name, "u1");
        assert_eq!(
            top.instantiations[0].connections,
            vec![
                Connection::Positional { index: 0, expr: "a".into() },
                Connection::Positional { index: 1, expr: "t".into() },
            ]
        );
    }

    #[test]
    fn complex_connection_expressions_survive_verbatim() {
        let (decls, _) = extract(
            "module top(input [7:0] a, output z);
               leaf u0 (.x(a[3:0]), .y({z, 1'b0}), .w(a & 8'hF0));
             endmodule",
        );
        let conns = &decls[0].instantiations[0].connections;
        let exprs: Vec<&str> = conns
            .iter()
            .map(|c| match c {
                Connection::Named { expr, .. } => expr.as_str(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(exprs, ["a[3:0]", "{z, 1'b0}", "a & 8'hF0"]);
    }

    #[test]
    fn instantiations_inside_blocks_are_ignored() {
        let (decls, _) = extract(
            "module top(input clk, output reg q);
               always @(posedge clk) begin
                 q <= ~q;
               end
               initial begin
                 q = 0;
               end
             endmodule",
        );
        assert!(decls[0].instantiations.is_empty());
    }

    #[test]
    fn sensitivity_lists_are_not_mistaken_for_gate_primitives() {
        let (decls, notes) = extract(
            "module top(input clk, input rst_n, output reg q);
               always @(posedge clk or negedge rst_n)
                 if (!rst_n) q <= 1'b0;
                 else q <= ~q;
             endmodule",
        );
        assert!(notes.is_empty(), "unexpected notes: {notes:?}");
        assert_eq!(decls[0].ports.len(), 3);
        assert!(decls[0].instantiations.is_empty());
    }

    #[test]
    fn generate_blocks_are_noted_and_skipped() {
        let (decls, notes) = extract(
            "module top(input a, output z);
               generate
                 leaf u0 (.x(a), .y(z));
               endgenerate
             endmodule",
        );
        assert!(decls[0].instantiations.is_empty());
        assert!(notes.iter().any(|n| n.construct == "generate"));
    }

    #[test]
    fn gate_primitives_are_noted() {
        let (decls, notes) = extract(
            "module top(input a, b, output z);
               and g1 (z, a, b);
             endmodule",
        );
        assert!(decls[0].instantiations.is_empty());
        assert!(notes.iter().any(|n| n.construct == "gate primitive"));
    }

    #[test]
    fn body_parameters_and_localparams() {
        let (decls, _) = extract(
            "module m(a);
               input a;
               parameter W = 8, H = W/2;
               localparam DEPTH = 1 << H;
             endmodule",
        );
        let m = &decls[0];
        assert_eq!(m.params.len(), 3);
        assert_eq!(m.public_params().count(), 2);
        assert_eq!(m.params[2].name, "DEPTH");
        assert!(m.params[2].local);
        assert_eq!(m.params[2].default_text, "1 << H");
    }

    #[test]
    fn unevaluable_width_is_noted_with_fallback() {
        let (decls, notes) = extract(
            "module m(input [UNDEFINED-1:0] a, output z);
             endmodule",
        );
        assert_eq!(decls[0].ports[0].bits, BitSpec::Width(1));
        assert!(notes.iter().any(|n| n.construct == "port width"));
    }

    #[test]
    fn no_modules_is_an_error() {
        assert!(matches!(
            extract_modules("wire x; assign x = 1;"),
            Err(ExtractError::NoModulesFound)
        ));
    }

    #[test]
    fn module_keyword_in_string_is_not_a_module() {
        let (decls, _) = extract(
            "module m(input a);
               initial $display(\"module fake(x); endmodule\");
             endmodule",
        );
        assert_eq!(decls.len(), 1);
        assert_eq!(decls[0].name, "m");
    }

    #[test]
    fn source_span_covers_each_module() {
        let src = "module a(input x); endmodule\nmodule b(input y); endmodule\n";
        let (decls, _) = extract(src);
        assert_eq!(decls.len(), 2);
        let a_text = &src[decls[0].source_span.clone()];
        assert!(a_text.starts_with("module a"));
        assert!(a_text.ends_with("endmodule"));
        let b_text = &src[decls[1].source_span.clone()];
        assert!(b_text.starts_with("module b"));
    }

    #[test]
    fn broken_module_is_skipped_with_note() {
        let (decls, notes) = extract(
            "module (input a);
             endmodule
             module ok(input a); endmodule",
        );
        assert_eq!(decls.len(), 1);
        assert_eq!(decls[0].name, "ok");
        assert!(notes.iter().any(|n| n.construct == "module"));
    }

    #[test]
    fn fuzzing_never_panics() {
        for src in [
            "module",
            "module m",
            "module m (",
            "module m (input",
            "module m (input a;",
            "module m; leaf u0 (",
            "module m; leaf u0 (.x(",
            "endmodule endmodule",
            "module m #(#(#( ; endmodule",
            "module m(); inst a(b,c) module",
        ] {
            let _ = extract_modules(src);
        }
    }
}
