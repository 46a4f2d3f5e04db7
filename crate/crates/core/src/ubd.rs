//! Parser and serializer for the UBD textual diagram format.
//!
//! UBD is line-oriented: one declaration per line, `#` comments, blocks
//! closed by `end` (sequence fragments) or `}` (state-machine regions).
//! The header keyword of the first non-comment line decides the diagram
//! kind: `sequence`, `statemachine` or `activity`. Files use extension
//! `.ubd`; LF and CRLF are both accepted and LF is emitted.
//!
//! ```text
//! sequence S            statemachine M              activity A
//! lifeline A            initial Idle                initial
//! lifeline B            state Idle                  action Work
//! msg m1: A -> B        region R1 {                 final done
//! alt [g]                 state P                   edge initial -> Work
//!   msg m2: A -> B        initial P                 edge Work -> done
//! else [!g]             }
//!   msg m3: A -> B      trans Idle -> P : ev [g]
//! end
//! ```

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::diagram::{
    ActivityDiagram, AdEdge, AdNode, DiagramBundle, GuardLiteral, GuardName, GuardSet, Message,
    NodeKind, Region, SdElement, SequenceDiagram, SmTransition, StateMachineDiagram,
};

/// Position of a token in its source file; 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLocation {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: SourceLocation,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("sequence diagram is mandatory but none of the inputs is one")]
    MissingSequence,
    #[error("two {kind} diagrams given ({first} and {second}); at most one of each kind")]
    DuplicateKind {
        kind: String,
        first: String,
        second: String,
    },
    #[error("a bundle needs 2 or 3 diagram files, got {0}; a second diagram is required alongside the sequence diagram")]
    WrongFileCount(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagram {
    Sequence(SequenceDiagram),
    StateMachine(StateMachineDiagram),
    Activity(ActivityDiagram),
}

impl Diagram {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Diagram::Sequence(_) => "sequence",
            Diagram::StateMachine(_) => "statemachine",
            Diagram::Activity(_) => "activity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Colon,
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Bang,
    Semicolon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Semicolon => "`;`".into(),
        }
    }
}

struct Line {
    number: usize,
    tokens: Vec<(Tok, usize)>,
}

fn lex_line(file: &str, number: usize, text: &str) -> Result<Line, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            ':' => {
                tokens.push((Tok::Colon, col));
                i += 1;
            }
            '[' => {
                tokens.push((Tok::LBracket, col));
                i += 1;
            }
            ']' => {
                tokens.push((Tok::RBracket, col));
                i += 1;
            }
            '{' => {
                tokens.push((Tok::LBrace, col));
                i += 1;
            }
            '}' => {
                tokens.push((Tok::RBrace, col));
                i += 1;
            }
            ',' => {
                tokens.push((Tok::Comma, col));
                i += 1;
            }
            '!' => {
                tokens.push((Tok::Bang, col));
                i += 1;
            }
            ';' => {
                tokens.push((Tok::Semicolon, col));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    tokens.push((Tok::Arrow, col));
                    i += 2;
                } else {
                    return Err(ParseError {
                        location: SourceLocation {
                            file: file.into(),
                            line: number,
                            column: col,
                        },
                        message: "reserved character `-` (labels may not contain hyphens)".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                tokens.push((Tok::Ident(word), start + 1));
            }
            other => {
                return Err(ParseError {
                    location: SourceLocation {
                        file: file.into(),
                        line: number,
                        column: col,
                    },
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(Line { number, tokens })
}

/// Token cursor over one line.
struct Cursor<'a> {
    file: &'a str,
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(file: &'a str, line: &'a Line) -> Self {
        Cursor { file, line, pos: 0 }
    }

    fn loc_at(&self, col: usize) -> SourceLocation {
        SourceLocation {
            file: self.file.into(),
            line: self.line.number,
            column: col,
        }
    }

    fn here(&self) -> SourceLocation {
        let col = self
            .line
            .tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| {
                self.line
                    .tokens
                    .last()
                    .map(|(t, c)| c + t.describe().len())
                    .unwrap_or(1)
            });
        self.loc_at(col)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            location: self.here(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.line.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.line.tokens.get(self.pos).map(|(t, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.line.tokens.get(self.pos) {
            Some((t, _)) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some((t, c)) => {
                let msg = format!("expected {}, found {}", want.describe(), t.describe());
                let loc = self.loc_at(*c);
                Err(ParseError { location: loc, message: msg })
            }
            None => self.err(format!("expected {} at end of line", want.describe())),
        }
    }

    /// Reads any identifier token, including reserved structural keywords
    /// like `and`; used where the grammar dispatches on a keyword.
    fn raw_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.line.tokens.get(self.pos) {
            Some((Tok::Ident(s), _)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some((t, c)) => {
                let msg = format!("expected {what}, found {}", t.describe());
                let loc = self.loc_at(*c);
                Err(ParseError { location: loc, message: msg })
            }
            None => self.err(format!("expected {what} at end of line")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.line.tokens.get(self.pos) {
            Some((Tok::Ident(s), _)) => {
                let s = s.clone();
                self.pos += 1;
                if s == "and" {
                    let loc = self.loc_at(self.line.tokens[self.pos - 1].1);
                    return Err(ParseError {
                        location: loc,
                        message: "`and` is reserved for composed labels".into(),
                    });
                }
                Ok(s)
            }
            Some((t, c)) => {
                let msg = format!("expected {what}, found {}", t.describe());
                let loc = self.loc_at(*c);
                Err(ParseError { location: loc, message: msg })
            }
            None => self.err(format!("expected {what} at end of line")),
        }
    }

    fn end_of_line(&self) -> Result<(), ParseError> {
        if self.pos == self.line.tokens.len() {
            Ok(())
        } else {
            let (t, c) = &self.line.tokens[self.pos];
            Err(ParseError {
                location: self.loc_at(*c),
                message: format!("unexpected trailing {}", t.describe()),
            })
        }
    }

    /// `[LIT{,LIT}]` where LIT := `G` | `!G`.
    fn guard_set(&mut self) -> Result<GuardSet, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut guards = Vec::new();
        loop {
            let polarity = if self.peek() == Some(&Tok::Bang) {
                self.next();
                false
            } else {
                true
            };
            let name = self.ident("guard name")?;
            let guard = GuardName::new(&name).map_err(|e| ParseError {
                location: self.here(),
                message: e.to_string(),
            })?;
            guards.push(GuardLiteral { guard, polarity });
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => break,
                Some(t) => {
                    let msg = format!("expected `,` or `]`, found {}", t.describe());
                    return self.err(msg);
                }
                None => return self.err("expected `,` or `]` at end of line"),
            }
        }
        Ok(guards)
    }
}

struct Lines {
    file: String,
    lines: Vec<Line>,
    pos: usize,
}

impl Lines {
    fn peek_keyword(&self) -> Option<&str> {
        self.lines.get(self.pos).and_then(|l| match l.tokens.first() {
            Some((Tok::Ident(s), _)) => Some(s.as_str()),
            _ => None,
        })
    }

    fn next_cursor(&mut self) -> Option<Cursor<'_>> {
        if self.pos < self.lines.len() {
            let line = &self.lines[self.pos];
            self.pos += 1;
            Some(Cursor::new(&self.file, line))
        } else {
            None
        }
    }

    fn eof_error(&self, message: &str) -> ParseError {
        let line = self.lines.last().map(|l| l.number).unwrap_or(1);
        ParseError {
            location: SourceLocation {
                file: self.file.clone(),
                line,
                column: 1,
            },
            message: message.into(),
        }
    }
}

fn lex(file: &str, text: &str) -> Result<Lines, ParseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = lex_line(file, i + 1, raw)?;
        if !line.tokens.is_empty() {
            lines.push(line);
        }
    }
    Ok(Lines {
        file: file.to_string(),
        lines,
        pos: 0,
    })
}

/// Parses one diagram from UTF-8 text. The header keyword picks the kind.
pub fn parse_diagram(text: &str) -> Result<Diagram, ParseError> {
    parse_diagram_named(text, "<input>")
}

/// Like [`parse_diagram`], recording `file` in every source location.
pub fn parse_diagram_named(text: &str, file: &str) -> Result<Diagram, ParseError> {
    let mut lines = lex(file, text)?;
    let Some(mut cur) = lines.next_cursor() else {
        return Err(ParseError {
            location: SourceLocation { file: file.into(), line: 1, column: 1 },
            message: "empty input: expected `sequence`, `statemachine` or `activity` header".into(),
        });
    };
    let keyword = cur.ident("diagram header keyword")?;
    let name = cur.ident("diagram name")?;
    cur.end_of_line()?;
    match keyword.as_str() {
        "sequence" => parse_sd(&mut lines, name).map(Diagram::Sequence),
        "statemachine" => parse_smd(&mut lines, name).map(Diagram::StateMachine),
        "activity" => parse_ad(&mut lines, name).map(Diagram::Activity),
        other => Err(ParseError {
            location: SourceLocation { file: file.into(), line: 1, column: 1 },
            message: format!("unknown keyword `{other}` (expected `sequence`, `statemachine` or `activity`)"),
        }),
    }
}

fn parse_sd(lines: &mut Lines, name: String) -> Result<SequenceDiagram, ParseError> {
    let mut lifelines: Vec<String> = Vec::new();
    while lines.peek_keyword() == Some("lifeline") {
        let mut cur = lines.next_cursor().unwrap();
        cur.next();
        let id = cur.ident("lifeline name")?;
        if lifelines.contains(&id) {
            return Err(ParseError {
                location: cur.here(),
                message: format!("duplicate declaration of lifeline `{id}`"),
            });
        }
        cur.end_of_line()?;
        lifelines.push(id);
    }
    let body = parse_sd_body(lines, &[])?;
    Ok(SequenceDiagram { name, lifelines, body })
}

/// Parses elements until one of `until` keywords (left unconsumed) or EOF.
fn parse_sd_body(lines: &mut Lines, until: &[&str]) -> Result<Vec<SdElement>, ParseError> {
    let mut body = Vec::new();
    loop {
        let Some(keyword) = lines.peek_keyword() else {
            if until.is_empty() {
                return Ok(body);
            }
            return Err(lines.eof_error(&format!("unterminated block: expected `{}`", until.join("` or `"))));
        };
        if until.contains(&keyword) {
            return Ok(body);
        }
        let keyword = keyword.to_string();
        match keyword.as_str() {
            "msg" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                let name = cur.ident("message name")?;
                cur.expect(Tok::Colon)?;
                let from = cur.ident("source lifeline")?;
                cur.expect(Tok::Arrow)?;
                let to = cur.ident("target lifeline")?;
                cur.end_of_line()?;
                body.push(SdElement::Message(Message { name, from, to }));
            }
            "alt" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                let guards = cur.guard_set()?;
                cur.end_of_line()?;
                let mut branches = Vec::new();
                let mut branch_guards = guards;
                loop {
                    let inner = parse_sd_body(lines, &["else", "end"])?;
                    branches.push((branch_guards, inner));
                    let mut cur = lines.next_cursor().unwrap();
                    match cur.raw_ident("`else` or `end`")?.as_str() {
                        "else" => {
                            branch_guards = cur.guard_set()?;
                            cur.end_of_line()?;
                        }
                        "end" => {
                            cur.end_of_line()?;
                            break;
                        }
                        _ => unreachable!("peeked keyword"),
                    }
                }
                body.push(SdElement::Alt(branches));
            }
            "opt" | "loop" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                let guards = cur.guard_set()?;
                cur.end_of_line()?;
                let inner = parse_sd_body(lines, &["end"])?;
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                cur.end_of_line()?;
                body.push(if keyword == "opt" {
                    SdElement::Opt(guards, inner)
                } else {
                    SdElement::Loop(guards, inner)
                });
            }
            "par" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                cur.end_of_line()?;
                let mut operands = Vec::new();
                loop {
                    let operand = parse_sd_body(lines, &["and", "end"])?;
                    operands.push(operand);
                    let mut cur = lines.next_cursor().unwrap();
                    match cur.raw_ident("`and` or `end`")?.as_str() {
                        "and" => {
                            cur.end_of_line()?;
                        }
                        "end" => {
                            cur.end_of_line()?;
                            break;
                        }
                        _ => unreachable!("peeked keyword"),
                    }
                }
                body.push(SdElement::Par(operands));
            }
            other => {
                let cur = lines.next_cursor().unwrap();
                return cur.err(format!("unknown keyword `{other}` in sequence diagram body"));
            }
        }
    }
}

fn parse_smd(lines: &mut Lines, name: String) -> Result<StateMachineDiagram, ParseError> {
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<String> = None;
    let mut regions: Vec<Region> = Vec::new();
    let mut transitions: Vec<SmTransition> = Vec::new();

    while let Some(keyword) = lines.peek_keyword() {
        let keyword = keyword.to_string();
        match keyword.as_str() {
            "state" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                let id = cur.ident("state name")?;
                if states.contains(&id) || regions.iter().any(|r| r.states.contains(&id)) {
                    return Err(ParseError {
                        location: cur.here(),
                        message: format!("duplicate declaration of state `{id}`"),
                    });
                }
                cur.end_of_line()?;
                states.push(id);
            }
            "initial" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                let id = cur.ident("initial state name")?;
                if initial.is_some() {
                    return Err(ParseError {
                        location: cur.here(),
                        message: "duplicate declaration of `initial`".into(),
                    });
                }
                cur.end_of_line()?;
                initial = Some(id);
            }
            "region" => {
                let region = parse_region(lines, &states, &regions, &mut transitions)?;
                regions.push(region);
            }
            "trans" => {
                let mut cur = lines.next_cursor().unwrap();
                cur.next();
                transitions.push(parse_trans_tail(&mut cur)?);
            }
            other => {
                let cur = lines.next_cursor().unwrap();
                return cur.err(format!("unknown keyword `{other}` in state machine diagram"));
            }
        }
    }

    let Some(initial) = initial else {
        return Err(lines.eof_error("state machine requires an `initial` declaration"));
    };
    Ok(StateMachineDiagram { name, states, initial, regions, transitions })
}

fn parse_trans_tail(cur: &mut Cursor<'_>) -> Result<SmTransition, ParseError> {
    let source = cur.ident("source state")?;
    cur.expect(Tok::Arrow)?;
    let target = cur.ident("target state")?;
    let event = if cur.peek() == Some(&Tok::Colon) {
        cur.next();
        Some(cur.ident("event name")?)
    } else {
        None
    };
    let guards = if cur.peek() == Some(&Tok::LBracket) {
        cur.guard_set()?
    } else {
        Vec::new()
    };
    cur.end_of_line()?;
    Ok(SmTransition { source, target, event, guards })
}

fn parse_region(
    lines: &mut Lines,
    flat_states: &[String],
    regions: &[Region],
    transitions: &mut Vec<SmTransition>,
) -> Result<Region, ParseError> {
    let mut cur = lines.next_cursor().unwrap();
    cur.next();
    let name = cur.ident("region name")?;
    if regions.iter().any(|r| r.name == name) {
        return Err(ParseError {
            location: cur.here(),
            message: format!("duplicate declaration of region `{name}`"),
        });
    }
    cur.expect(Tok::LBrace)?;

    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<String> = None;

    // Inline form: `region R { state A; initial A }` on one line. Otherwise
    // the block spans lines and is closed by a `}` line.
    let inline = cur.peek().is_some();
    if inline {
        loop {
            match cur.peek() {
                Some(Tok::RBrace) => {
                    cur.next();
                    cur.end_of_line()?;
                    break;
                }
                Some(Tok::Semicolon) => {
                    cur.next();
                }
                Some(_) => {
                    parse_region_item(&mut cur, flat_states, regions, &mut states, &mut initial, transitions)?;
                }
                None => return cur.err("unterminated region: expected `}`"),
            }
        }
    } else {
        loop {
            let Some(mut cur) = lines.next_cursor() else {
                return Err(lines.eof_error("unterminated region: expected `}`"));
            };
            if cur.peek() == Some(&Tok::RBrace) {
                cur.next();
                cur.end_of_line()?;
                break;
            }
            parse_region_item(&mut cur, flat_states, regions, &mut states, &mut initial, transitions)?;
            cur.end_of_line()?;
        }
    }

    let Some(initial) = initial else {
        return Err(lines.eof_error(&format!("region `{name}` requires an `initial` declaration")));
    };
    Ok(Region { name, states, initial })
}

fn parse_region_item(
    cur: &mut Cursor<'_>,
    flat_states: &[String],
    regions: &[Region],
    states: &mut Vec<String>,
    initial: &mut Option<String>,
    transitions: &mut Vec<SmTransition>,
) -> Result<(), ParseError> {
    match cur.ident("`state`, `initial` or `trans`")?.as_str() {
        "state" => {
            let id = cur.ident("state name")?;
            if states.contains(&id)
                || flat_states.contains(&id)
                || regions.iter().any(|r| r.states.contains(&id))
            {
                return cur.err(format!("duplicate declaration of state `{id}`"));
            }
            states.push(id);
        }
        "initial" => {
            let id = cur.ident("initial state name")?;
            if initial.is_some() {
                return cur.err("duplicate declaration of region `initial`");
            }
            *initial = Some(id);
        }
        "trans" => {
            transitions.push(parse_trans_tail(cur)?);
        }
        other => {
            return cur.err(format!("unknown keyword `{other}` in region block"));
        }
    }
    Ok(())
}

fn parse_ad(lines: &mut Lines, name: String) -> Result<ActivityDiagram, ParseError> {
    let mut nodes: Vec<AdNode> = Vec::new();
    let mut edges: Vec<AdEdge> = Vec::new();

    while let Some(keyword) = lines.peek_keyword() {
        let keyword = keyword.to_string();
        let kind = match keyword.as_str() {
            "initial" => Some(NodeKind::Initial),
            "action" => Some(NodeKind::Action),
            "decision" => Some(NodeKind::Decision),
            "merge" => Some(NodeKind::Merge),
            "fork" => Some(NodeKind::Fork),
            "join" => Some(NodeKind::Join),
            "final" => Some(NodeKind::Final),
            _ => None,
        };
        if let Some(kind) = kind {
            let mut cur = lines.next_cursor().unwrap();
            cur.next();
            // The single initial node is declared bare and gets the id
            // `initial`, so edges can reference it.
            let id = if kind == NodeKind::Initial {
                "initial".to_string()
            } else {
                cur.ident("node name")?
            };
            if nodes.iter().any(|n| n.id == id) {
                return cur.err(format!("duplicate declaration of node `{id}`"));
            }
            cur.end_of_line()?;
            nodes.push(AdNode { id, kind });
        } else if keyword == "edge" {
            let mut cur = lines.next_cursor().unwrap();
            cur.next();
            let source = cur.ident("source node")?;
            cur.expect(Tok::Arrow)?;
            let target = cur.ident("target node")?;
            let guards = if cur.peek() == Some(&Tok::LBracket) {
                cur.guard_set()?
            } else {
                Vec::new()
            };
            cur.end_of_line()?;
            edges.push(AdEdge { source, target, guards });
        } else {
            let cur = lines.next_cursor().unwrap();
            return cur.err(format!("unknown keyword `{keyword}` in activity diagram"));
        }
    }

    Ok(ActivityDiagram { name, nodes, edges })
}

fn render_guard_set(guards: &GuardSet) -> String {
    let lits: Vec<String> = guards.iter().map(|l| l.to_string()).collect();
    format!("[{}]", lits.join(","))
}

/// Canonical text for a diagram; `parse(serialize(d))` structurally equals
/// `d`. Declarations keep first-occurrence order, block bodies indent by two
/// spaces.
pub fn serialize_diagram(d: &Diagram) -> String {
    match d {
        Diagram::Sequence(sd) => serialize_sd(sd),
        Diagram::StateMachine(smd) => serialize_smd(smd),
        Diagram::Activity(ad) => serialize_ad(ad),
    }
}

pub fn serialize_sd(sd: &SequenceDiagram) -> String {
    let mut out = format!("sequence {}\n", sd.name);
    for l in &sd.lifelines {
        out.push_str(&format!("lifeline {l}\n"));
    }
    serialize_sd_body(&mut out, &sd.body, 0);
    out
}

fn serialize_sd_body(out: &mut String, body: &[SdElement], depth: usize) {
    let pad = "  ".repeat(depth);
    for el in body {
        match el {
            SdElement::Message(m) => {
                out.push_str(&format!("{pad}msg {}: {} -> {}\n", m.name, m.from, m.to));
            }
            SdElement::Alt(branches) => {
                for (i, (guards, inner)) in branches.iter().enumerate() {
                    let head = if i == 0 { "alt" } else { "else" };
                    out.push_str(&format!("{pad}{head} {}\n", render_guard_set(guards)));
                    serialize_sd_body(out, inner, depth + 1);
                }
                out.push_str(&format!("{pad}end\n"));
            }
            SdElement::Opt(guards, inner) => {
                out.push_str(&format!("{pad}opt {}\n", render_guard_set(guards)));
                serialize_sd_body(out, inner, depth + 1);
                out.push_str(&format!("{pad}end\n"));
            }
            SdElement::Loop(guards, inner) => {
                out.push_str(&format!("{pad}loop {}\n", render_guard_set(guards)));
                serialize_sd_body(out, inner, depth + 1);
                out.push_str(&format!("{pad}end\n"));
            }
            SdElement::Par(operands) => {
                out.push_str(&format!("{pad}par\n"));
                for (i, op) in operands.iter().enumerate() {
                    if i > 0 {
                        out.push_str(&format!("{pad}and\n"));
                    }
                    serialize_sd_body(out, op, depth + 1);
                }
                out.push_str(&format!("{pad}end\n"));
            }
        }
    }
}

pub fn serialize_smd(smd: &StateMachineDiagram) -> String {
    let mut out = format!("statemachine {}\n", smd.name);
    out.push_str(&format!("initial {}\n", smd.initial));
    for s in &smd.states {
        out.push_str(&format!("state {s}\n"));
    }
    for r in &smd.regions {
        out.push_str(&format!("region {} {{\n", r.name));
        for s in &r.states {
            out.push_str(&format!("  state {s}\n"));
        }
        out.push_str(&format!("  initial {}\n", r.initial));
        out.push_str("}\n");
    }
    for t in &smd.transitions {
        out.push_str(&format!("trans {} -> {}", t.source, t.target));
        if let Some(ev) = &t.event {
            out.push_str(&format!(" : {ev}"));
        }
        if !t.guards.is_empty() {
            out.push_str(&format!(" {}", render_guard_set(&t.guards)));
        }
        out.push('\n');
    }
    out
}

pub fn serialize_ad(ad: &ActivityDiagram) -> String {
    let mut out = format!("activity {}\n", ad.name);
    for n in &ad.nodes {
        if n.kind == NodeKind::Initial {
            out.push_str("initial\n");
        } else {
            out.push_str(&format!("{} {}\n", n.kind, n.id));
        }
    }
    for e in &ad.edges {
        out.push_str(&format!("edge {} -> {}", e.source, e.target));
        if !e.guards.is_empty() {
            out.push_str(&format!(" {}", render_guard_set(&e.guards)));
        }
        out.push('\n');
    }
    out
}

/// Reads 2 or 3 `.ubd` files, classifies each by header keyword, and
/// assembles the bundle. The sequence diagram is mandatory; at most one
/// diagram of each kind.
pub fn load_bundle<P: AsRef<Path>>(paths: &[P]) -> Result<DiagramBundle, LoadError> {
    if paths.len() < 2 || paths.len() > 3 {
        return Err(LoadError::WrongFileCount(paths.len()));
    }
    let mut sd: Option<(String, SequenceDiagram)> = None;
    let mut smd: Option<(String, StateMachineDiagram)> = None;
    let mut ad: Option<(String, ActivityDiagram)> = None;
    for path in paths {
        let display = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| LoadError::Io {
            path: display.clone(),
            source,
        })?;
        let diagram = parse_diagram_named(&text, &display)?;
        let kind = diagram.kind_name().to_string();
        let dup = |first: &str| LoadError::DuplicateKind {
            kind,
            first: first.to_string(),
            second: display.clone(),
        };
        match diagram {
            Diagram::Sequence(d) => match &sd {
                Some((first, _)) => return Err(dup(first)),
                None => sd = Some((display, d)),
            },
            Diagram::StateMachine(d) => match &smd {
                Some((first, _)) => return Err(dup(first)),
                None => smd = Some((display, d)),
            },
            Diagram::Activity(d) => match &ad {
                Some((first, _)) => return Err(dup(first)),
                None => ad = Some((display, d)),
            },
        }
    }
    let Some((_, sd)) = sd else {
        return Err(LoadError::MissingSequence);
    };
    Ok(DiagramBundle {
        sd,
        smd: smd.map(|(_, d)| d),
        ad: ad.map(|(_, d)| d),
    })
}
