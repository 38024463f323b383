use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{Tok, Token};
use super::{FormatError, FormatErrorKind, ModelDocument, Position, FORMAT_VERSION};
use crate::model::{
    CftElement, CftOutputFailureMode, CmcElement, CmcOutputFailureMode, Component, Connection, FailureLogic, Gate,
    GateKind, InputDependency, InputFailureMode, PortRef, Rate, RateKind, RateUnit, SystemModel, Transition,
};

type Result<T> = std::result::Result<T, FormatError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    i: usize,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(f) if f.is_ascii_alphabetic() || f == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '_' | '.' | '-'))
}

// States may also start with a digit ("1", "2", ...).
fn is_state_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(f) if f.is_ascii_alphanumeric() || f == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '_' | '.' | '-'))
}

fn duplicate(pos: Position, what: &'static str, id: &str) -> FormatError {
    FormatError {
        pos,
        kind: FormatErrorKind::DuplicateIdentifier {
            what,
            id: id.to_string(),
        },
    }
}

impl Parser {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Parser { toks, i: 0 }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn peek_word(&self) -> Option<&str> {
        match &self.peek().tok {
            Tok::Word(w) => Some(w),
            _ => None,
        }
    }

    fn error(&self, expected: &[&str]) -> FormatError {
        let t = self.peek();
        FormatError::syntax(t.pos, expected, &t.tok.describe())
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Position> {
        if self.peek_word() == Some(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn word(&mut self, what: &str, valid: fn(&str) -> bool) -> Result<(String, Position)> {
        match self.peek_word() {
            Some(w) if valid(w) => {
                let w = w.to_string();
                Ok((w, self.bump().pos))
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Position)> {
        self.word(what, is_ident)
    }

    fn state(&mut self) -> Result<(String, Position)> {
        self.word("state", is_state_ident)
    }

    fn arrow(&mut self) -> Result<()> {
        if self.peek().tok == Tok::Arrow {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`->`"]))
        }
    }

    // A statement ends at a newline or right before a closing brace.
    fn end_statement(&mut self) -> Result<()> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Close | Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of line"])),
        }
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek().tok, Tok::Newline | Tok::Close | Tok::Eof)
    }

    fn open(&mut self) -> Result<()> {
        if self.peek().tok != Tok::Open {
            return Err(self.error(&["`{`"]));
        }
        self.bump();
        self.skip_newlines();
        Ok(())
    }

    // True (and consumes it) when the next token closes the current block.
    fn close(&mut self) -> Result<bool> {
        self.skip_newlines();
        if self.peek().tok == Tok::Close {
            self.bump();
            self.end_statement()?;
            return Ok(true);
        }
        Ok(false)
    }

    fn rate(&mut self) -> Result<Rate> {
        let value = match self.peek_word() {
            Some(w) if w.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '.' | '-' | '+')) => {
                w.parse::<f64>().ok().filter(|v| v.is_finite())
            }
            _ => None,
        };
        let Some(value) = value else {
            return Err(self.error(&["rate"]));
        };
        self.bump();
        let unit = match self.peek_word() {
            Some("/h") => Some(RateUnit::PerHour),
            Some("FIT") | Some("per1e9h") => Some(RateUnit::Fit),
            _ => None,
        };
        if unit.is_some() {
            self.bump();
        }
        let kind = match self.peek_word() {
            Some("failure") => Some(RateKind::Failure),
            Some("repair") => Some(RateKind::Repair),
            _ => None,
        };
        if kind.is_some() {
            self.bump();
        }
        if !self.at_statement_end() {
            return Err(self.error(&["`/h`", "`FIT`", "`per1e9h`", "`failure`", "`repair`", "end of line"]));
        }
        Ok(Rate::new(value, unit.unwrap_or(RateUnit::PerHour), kind.unwrap_or_default()))
    }

    fn reference(&mut self) -> Result<PortRef> {
        let bad = self.error(&["`component.port` reference"]);
        match self.peek_word().map(|w| w.parse::<PortRef>()) {
            Some(Ok(r)) if is_ident(&r.component) && is_ident(&r.port) => {
                self.bump();
                Ok(r)
            }
            _ => Err(bad),
        }
    }

    pub(crate) fn document(mut self) -> Result<ModelDocument> {
        self.skip_newlines();
        self.keyword("ghcft")?;
        let version = match &self.peek().tok {
            Tok::Word(v) => v.clone(),
            _ => return Err(self.error(&["format version"])),
        };
        let pos = self.bump().pos;
        if version != FORMAT_VERSION {
            return Err(FormatError {
                pos,
                kind: FormatErrorKind::UnknownVersion(version),
            });
        }
        self.end_statement()?;

        let mut doc = ModelDocument {
            format_version: version,
            system: SystemModel::new(),
            metadata: BTreeMap::new(),
        };
        loop {
            self.skip_newlines();
            match self.peek_word() {
                Some("meta") => self.meta(&mut doc.metadata)?,
                Some("component") => {
                    let (c, pos) = self.component()?;
                    if doc.system.components.contains_key(&c.id) {
                        return Err(duplicate(pos, "component", &c.id));
                    }
                    doc.system.components.insert(c.id.clone(), c);
                }
                Some("connections") => self.connections(&mut doc.system.connections)?,
                _ if self.peek().tok == Tok::Eof => return Ok(doc),
                _ => return Err(self.error(&["`component`", "`connections`", "`meta`", "end of input"])),
            }
        }
    }

    fn meta(&mut self, out: &mut BTreeMap<String, String>) -> Result<()> {
        self.keyword("meta")?;
        self.open()?;
        while !self.close()? {
            let (key, pos) = self.ident("metadata key")?;
            let value = match &self.peek().tok {
                Tok::Str(s) | Tok::Word(s) => s.clone(),
                _ => return Err(self.error(&["string"])),
            };
            self.bump();
            self.end_statement()?;
            if out.insert(key.clone(), value).is_some() {
                return Err(duplicate(pos, "metadata key", &key));
            }
        }
        Ok(())
    }

    fn connections(&mut self, out: &mut BTreeSet<Connection>) -> Result<()> {
        self.keyword("connections")?;
        self.open()?;
        while !self.close()? {
            let pos = self.peek().pos;
            let from = self.reference()?;
            self.arrow()?;
            let to = self.reference()?;
            self.end_statement()?;
            let c = Connection { from, to };
            if out.contains(&c) {
                return Err(duplicate(pos, "connection", &format!("{} -> {}", c.from, c.to)));
            }
            out.insert(c);
        }
        Ok(())
    }

    fn component(&mut self) -> Result<(Component, Position)> {
        self.keyword("component")?;
        let (id, id_pos) = self.ident("component id")?;
        self.open()?;
        let mut inports = BTreeSet::new();
        let mut outports = BTreeSet::new();
        let mut flm: Option<FailureLogic> = None;
        while !self.close()? {
            let pos = self.peek().pos;
            match self.peek_word() {
                Some(kw @ ("inport" | "outport")) => {
                    let is_in = kw == "inport";
                    self.bump();
                    let set = if is_in { &mut inports } else { &mut outports };
                    loop {
                        let (p, ppos) = self.ident("port name")?;
                        if !set.insert(p.clone()) {
                            return Err(duplicate(ppos, "port", &p));
                        }
                        if self.at_statement_end() {
                            break;
                        }
                    }
                    self.end_statement()?;
                }
                Some(kw @ ("cft" | "cmc")) => {
                    if flm.is_some() {
                        return Err(duplicate(pos, "failure logic block in component", &id));
                    }
                    flm = Some(if kw == "cft" { self.cft()?.into() } else { self.cmc()?.into() });
                }
                _ => return Err(self.error(&["`inport`", "`outport`", "`cft`", "`cmc`", "`}`"])),
            }
        }
        let Some(flm) = flm else {
            let prev = self.toks[self.i.saturating_sub(1)].pos;
            return Err(FormatError::syntax(prev, &["`cft` or `cmc` block"], "`}`"));
        };
        Ok((
            Component {
                id,
                inports,
                outports,
                flm,
            },
            id_pos,
        ))
    }

    fn ifm(&mut self) -> Result<(String, Position, InputFailureMode)> {
        self.keyword("ifm")?;
        let (id, pos) = self.ident("failure mode id")?;
        self.keyword("on")?;
        let (port, _) = self.ident("port name")?;
        let mut ifm = InputFailureMode::on(port);
        if self.peek_word() == Some("mode") {
            self.bump();
            ifm.source_mode = Some(self.ident("failure mode id")?.0);
        }
        self.end_statement()?;
        Ok((id, pos, ifm))
    }

    fn cft(&mut self) -> Result<CftElement> {
        self.keyword("cft")?;
        self.open()?;
        let mut cft = CftElement::new();
        let mut ids = BTreeSet::new();
        let mut claim = |id: &str, pos: Position| {
            if ids.insert(id.to_string()) {
                Ok(())
            } else {
                Err(duplicate(pos, "node", id))
            }
        };
        while !self.close()? {
            match self.peek_word() {
                Some("basic") => {
                    self.bump();
                    let (id, pos) = self.ident("event id")?;
                    claim(&id, pos)?;
                    let rate = self.rate()?;
                    self.end_statement()?;
                    cft.basic_events.insert(id, rate);
                }
                Some("gate") => {
                    self.bump();
                    let (id, pos) = self.ident("gate id")?;
                    claim(&id, pos)?;
                    let kind = match self.peek_word() {
                        Some("and") => GateKind::And,
                        Some("or") => GateKind::Or,
                        _ => return Err(self.error(&["`and`", "`or`"])),
                    };
                    self.bump();
                    let mut inputs = Vec::new();
                    while !self.at_statement_end() {
                        inputs.push(self.ident("node id")?.0);
                    }
                    self.end_statement()?;
                    cft.gates.insert(id, Gate { kind, inputs });
                }
                Some("ifm") => {
                    let (id, pos, ifm) = self.ifm()?;
                    claim(&id, pos)?;
                    cft.ifms.insert(id, ifm);
                }
                Some("ofm") => {
                    self.bump();
                    let (id, pos) = self.ident("failure mode id")?;
                    claim(&id, pos)?;
                    self.keyword("on")?;
                    let (port, _) = self.ident("port name")?;
                    self.keyword("from")?;
                    let (input, _) = self.ident("node id")?;
                    self.end_statement()?;
                    cft.ofms.insert(id, CftOutputFailureMode { port, input });
                }
                _ => return Err(self.error(&["`basic`", "`gate`", "`ifm`", "`ofm`", "`}`"])),
            }
        }
        Ok(cft)
    }

    fn cmc(&mut self) -> Result<CmcElement> {
        let start = self.keyword("cmc")?;
        self.open()?;
        let mut states: Option<Vec<String>> = None;
        let mut initial: Option<String> = None;
        let mut errors: Option<Vec<String>> = None;
        let mut transitions = Vec::new();
        let mut ifms = BTreeMap::new();
        let mut deps = BTreeSet::new();
        let mut ofms = BTreeMap::new();
        while !self.close()? {
            let pos = self.peek().pos;
            match self.peek_word() {
                Some("states") => {
                    self.bump();
                    if states.is_some() {
                        return Err(duplicate(pos, "statement", "states"));
                    }
                    let mut list: Vec<String> = Vec::new();
                    while !self.at_statement_end() {
                        let (s, spos) = self.state()?;
                        if list.contains(&s) {
                            return Err(duplicate(spos, "state", &s));
                        }
                        list.push(s);
                    }
                    if list.is_empty() {
                        return Err(self.error(&["state"]));
                    }
                    self.end_statement()?;
                    states = Some(list);
                }
                Some("initial") => {
                    self.bump();
                    if initial.is_some() {
                        return Err(duplicate(pos, "statement", "initial"));
                    }
                    initial = Some(self.state()?.0);
                    self.end_statement()?;
                }
                Some("error") => {
                    self.bump();
                    if errors.is_some() {
                        return Err(duplicate(pos, "statement", "error"));
                    }
                    let mut list = Vec::new();
                    while !self.at_statement_end() {
                        list.push(self.state()?.0);
                    }
                    self.end_statement()?;
                    errors = Some(list);
                }
                Some("transition") => {
                    self.bump();
                    let from = self.state()?.0;
                    self.arrow()?;
                    let to = self.state()?.0;
                    let rate = self.rate()?;
                    self.end_statement()?;
                    transitions.push(Transition { from, to, rate });
                }
                Some("depends") => {
                    self.bump();
                    let ifm = self.ident("input failure mode id")?.0;
                    let from = self.state()?.0;
                    self.arrow()?;
                    let to = self.state()?.0;
                    self.end_statement()?;
                    let dep = InputDependency { ifm, from, to };
                    if deps.contains(&dep) {
                        return Err(duplicate(pos, "dependency", &format!("{} {} -> {}", dep.ifm, dep.from, dep.to)));
                    }
                    deps.insert(dep);
                }
                Some("ifm") => {
                    let (id, ipos, ifm) = self.ifm()?;
                    if ifms.contains_key(&id) || ofms.contains_key(&id) {
                        return Err(duplicate(ipos, "failure mode", &id));
                    }
                    ifms.insert(id, ifm);
                }
                Some("ofm") => {
                    self.bump();
                    let (id, opos) = self.ident("failure mode id")?;
                    if ifms.contains_key(&id) || ofms.contains_key(&id) {
                        return Err(duplicate(opos, "failure mode", &id));
                    }
                    self.keyword("on")?;
                    let (port, _) = self.ident("port name")?;
                    self.keyword("from")?;
                    let mut from = Vec::new();
                    loop {
                        from.push(self.state()?.0);
                        if self.at_statement_end() {
                            break;
                        }
                    }
                    self.end_statement()?;
                    ofms.insert(id, CmcOutputFailureMode { port, states: from });
                }
                _ => {
                    return Err(self.error(&[
                        "`states`",
                        "`initial`",
                        "`error`",
                        "`transition`",
                        "`ifm`",
                        "`depends`",
                        "`ofm`",
                        "`}`",
                    ]))
                }
            }
        }
        let (Some(states), Some(initial)) = (states, initial) else {
            return Err(FormatError::syntax(start, &["`states` and `initial` in cmc block"], "neither or only one"));
        };
        Ok(CmcElement {
            states,
            initial,
            error_states: errors.unwrap_or_default(),
            transitions,
            ifms,
            input_deps: deps,
            ofms,
        })
    }
}
