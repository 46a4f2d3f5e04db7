//! CTL formulas: abstract syntax, NuSMV-style concrete syntax, and
//! specification-pattern instantiation.
//!
//! Atoms are equalities over the unified system's variables: `State = <name>`
//! compares the rendered state name, any other subject is a guard compared
//! against `dc`, `false` or `true`. The parser is name-agnostic; unknown
//! identifiers surface at check time.
//!
//! Precedence, tightest first: `!`, temporal unaries, `&`, `|`, `->`
//! (right-associative). Until/weak-until use the bracketed forms
//! `A [p U q]`, `E [p W q]`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Left-hand side of an atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomSubject {
    /// The unified state name variable.
    State,
    /// A guard variable, compared against `dc`/`false`/`true`.
    Guard(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub subject: AtomSubject,
    pub value: String,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            AtomSubject::State => write!(f, "State = {}", self.value),
            AtomSubject::Guard(name) => write!(f, "{} = {}", name, self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Ax(Box<Formula>),
    Ex(Box<Formula>),
    Af(Box<Formula>),
    Ef(Box<Formula>),
    Ag(Box<Formula>),
    Eg(Box<Formula>),
    Au(Box<Formula>, Box<Formula>),
    Eu(Box<Formula>, Box<Formula>),
    Aw(Box<Formula>, Box<Formula>),
    Ew(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn state(name: impl Into<String>) -> Formula {
        Formula::Atom(Atom {
            subject: AtomSubject::State,
            value: name.into(),
        })
    }

    pub fn guard(name: impl Into<String>, value: impl Into<String>) -> Formula {
        Formula::Atom(Atom {
            subject: AtomSubject::Guard(name.into()),
            value: value.into(),
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn ag(f: Formula) -> Formula {
        Formula::Ag(Box::new(f))
    }

    pub fn af(f: Formula) -> Formula {
        Formula::Af(Box::new(f))
    }

    pub fn aw(p: Formula, q: Formula) -> Formula {
        Formula::Aw(Box::new(p), Box::new(q))
    }

    fn is_binary(&self) -> bool {
        matches!(
            self,
            Formula::And(..) | Formula::Or(..) | Formula::Implies(..)
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct CtlParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Value(String),
    Eq,
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Value(s) => format!("`{s}`"),
            Tok::Eq => "`=`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
        }
    }
}

fn lex_ctl(text: &str) -> Result<Vec<(Tok, usize)>, CtlParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<(Tok, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        // A value may contain hyphens (`State = msg--act`); it is lexed in
        // place of an identifier right after `=`.
        let value_mode = matches!(tokens.last(), Some((Tok::Eq, _)));
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                tokens.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, col));
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
            '=' => {
                tokens.push((Tok::Eq, col));
                i += 1;
            }
            '!' => {
                tokens.push((Tok::Not, col));
                i += 1;
            }
            '&' => {
                tokens.push((Tok::And, col));
                i += 1;
            }
            '|' => {
                tokens.push((Tok::Or, col));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    tokens.push((Tok::Implies, col));
                    i += 2;
                } else {
                    return Err(CtlParseError {
                        column: col,
                        message: "`-` is only valid inside a state name or as `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() {
                    let ch = chars[i];
                    let value_hyphen =
                        value_mode && ch == '-' && chars.get(i + 1) != Some(&'>');
                    if ch.is_ascii_alphanumeric() || ch == '_' || value_hyphen {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word: String = chars[start..i].iter().collect();
                if value_mode {
                    tokens.push((Tok::Value(word), start + 1));
                } else {
                    tokens.push((Tok::Ident(word), start + 1));
                }
            }
            other => {
                return Err(CtlParseError {
                    column: col,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.len + 1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, CtlParseError> {
        Err(CtlParseError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), CtlParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = t.describe();
                self.err(format!("expected {}, found {found}", want.describe()))
            }
            None => self.err(format!("expected {} at end of input", want.describe())),
        }
    }

    fn implies(&mut self) -> Result<Formula, CtlParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, CtlParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, CtlParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, CtlParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.implies()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(word)) => {
                let word = word.clone();
                match word.as_str() {
                    "TRUE" => {
                        self.bump();
                        Ok(Formula::True)
                    }
                    "FALSE" => {
                        self.bump();
                        Ok(Formula::False)
                    }
                    "AX" | "EX" | "AF" | "EF" | "AG" | "EG" => {
                        self.bump();
                        let arg = self.unary()?;
                        Ok(match word.as_str() {
                            "AX" => Formula::Ax(Box::new(arg)),
                            "EX" => Formula::Ex(Box::new(arg)),
                            "AF" => Formula::Af(Box::new(arg)),
                            "EF" => Formula::Ef(Box::new(arg)),
                            "AG" => Formula::Ag(Box::new(arg)),
                            _ => Formula::Eg(Box::new(arg)),
                        })
                    }
                    "A" | "E" => {
                        self.bump();
                        self.expect(Tok::LBracket)?;
                        let lhs = self.implies()?;
                        let op = match self.bump() {
                            Some(Tok::Ident(w)) if w == "U" || w == "W" => w,
                            Some(t) => {
                                return Err(CtlParseError {
                                    column: self.tokens[self.pos - 1].1,
                                    message: format!("expected `U` or `W`, found {}", t.describe()),
                                })
                            }
                            None => return self.err("expected `U` or `W` at end of input"),
                        };
                        let rhs = self.implies()?;
                        self.expect(Tok::RBracket)?;
                        Ok(match (word.as_str(), op.as_str()) {
                            ("A", "U") => Formula::Au(Box::new(lhs), Box::new(rhs)),
                            ("A", "W") => Formula::Aw(Box::new(lhs), Box::new(rhs)),
                            ("E", "U") => Formula::Eu(Box::new(lhs), Box::new(rhs)),
                            _ => Formula::Ew(Box::new(lhs), Box::new(rhs)),
                        })
                    }
                    _ => self.atom(word),
                }
            }
            Some(t) => {
                let found = t.describe();
                self.err(format!("expected a formula, found {found}"))
            }
            None => self.err("expected a formula at end of input"),
        }
    }

    fn atom(&mut self, subject: String) -> Result<Formula, CtlParseError> {
        self.bump();
        self.expect(Tok::Eq)?;
        let value = match self.bump() {
            Some(Tok::Value(v)) => v,
            Some(t) => {
                return Err(CtlParseError {
                    column: self.tokens[self.pos - 1].1,
                    message: format!("expected a value after `=`, found {}", t.describe()),
                })
            }
            None => return self.err("expected a value after `=` at end of input"),
        };
        let subject = if subject == "State" {
            AtomSubject::State
        } else {
            AtomSubject::Guard(subject)
        };
        Ok(Formula::Atom(Atom { subject, value }))
    }
}

/// Parses the NuSMV-style CTL concrete syntax.
pub fn parse_ctl(text: &str) -> Result<Formula, CtlParseError> {
    let tokens = lex_ctl(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        len: text.chars().count(),
    };
    let formula = parser.implies()?;
    if parser.pos != parser.tokens.len() {
        let found = parser.peek().unwrap().describe();
        return parser.err(format!("unexpected trailing {found}"));
    }
    Ok(formula)
}

fn wrap_binary(f: &Formula) -> String {
    if f.is_binary() {
        format!("({})", render_ctl(f))
    } else {
        render_ctl(f)
    }
}

/// Canonical concrete syntax; `parse_ctl(render_ctl(f))` equals `f`.
pub fn render_ctl(f: &Formula) -> String {
    match f {
        Formula::True => "TRUE".into(),
        Formula::False => "FALSE".into(),
        Formula::Atom(a) => a.to_string(),
        Formula::Not(inner) => format!("!({})", render_ctl(inner)),
        Formula::And(a, b) => format!("{} & {}", wrap_binary(a), wrap_binary(b)),
        Formula::Or(a, b) => format!("{} | {}", wrap_binary(a), wrap_binary(b)),
        Formula::Implies(a, b) => format!("{} -> {}", wrap_binary(a), wrap_binary(b)),
        Formula::Ax(inner) => format!("AX ({})", render_ctl(inner)),
        Formula::Ex(inner) => format!("EX ({})", render_ctl(inner)),
        Formula::Af(inner) => format!("AF ({})", render_ctl(inner)),
        Formula::Ef(inner) => format!("EF ({})", render_ctl(inner)),
        Formula::Ag(inner) => format!("AG ({})", render_ctl(inner)),
        Formula::Eg(inner) => format!("EG ({})", render_ctl(inner)),
        Formula::Au(p, q) => format!("A [ {} U {} ]", wrap_binary(p), wrap_binary(q)),
        Formula::Eu(p, q) => format!("E [ {} U {} ]", wrap_binary(p), wrap_binary(q)),
        Formula::Aw(p, q) => format!("A [ {} W {} ]", wrap_binary(p), wrap_binary(q)),
        Formula::Ew(p, q) => format!("E [ {} W {} ]", wrap_binary(p), wrap_binary(q)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_ctl(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Absence,
    Existence,
    Universality,
    Response,
    Precedence,
}

impl Pattern {
    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Absence => "absence",
            Pattern::Existence => "existence",
            Pattern::Universality => "universality",
            Pattern::Response => "response",
            Pattern::Precedence => "precedence",
        }
    }
}

impl FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "absence" => Ok(Pattern::Absence),
            "existence" => Ok(Pattern::Existence),
            "universality" => Ok(Pattern::Universality),
            "response" => Ok(Pattern::Response),
            "precedence" => Ok(Pattern::Precedence),
            other => Err(PatternError::UnknownPattern(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Global,
    BeforeR,
    AfterQ,
    BetweenQAndR,
    AfterQUntilR,
}

impl Scope {
    pub fn name(&self) -> &'static str {
        match self {
            Scope::Global => "global",
            Scope::BeforeR => "before-r",
            Scope::AfterQ => "after-q",
            Scope::BetweenQAndR => "between-q-and-r",
            Scope::AfterQUntilR => "after-q-until-r",
        }
    }
}

impl FromStr for Scope {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "global" => Ok(Scope::Global),
            "before-r" => Ok(Scope::BeforeR),
            "after-q" => Ok(Scope::AfterQ),
            "between-q-and-r" => Ok(Scope::BetweenQAndR),
            "after-q-until-r" => Ok(Scope::AfterQUntilR),
            other => Err(PatternError::UnknownScope(other.to_string())),
        }
    }
}

/// A pattern instantiation request. `p` is the primary proposition, `q`/`r`
/// scope anchors, and `s` the effect proposition of `response`/`precedence`.
#[derive(Debug, Clone)]
pub struct PatternSpec {
    pub pattern: Pattern,
    pub scope: Scope,
    pub p: Formula,
    pub q: Option<Formula>,
    pub r: Option<Formula>,
    pub s: Option<Formula>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("unknown pattern `{0}` (expected absence, existence, universality, response or precedence)")]
    UnknownPattern(String),
    #[error("unknown scope `{0}` (expected global, before-r, after-q, between-q-and-r or after-q-until-r)")]
    UnknownScope(String),
    #[error("unsupported pattern/scope cell {pattern}/{scope}; supported cells: {supported}")]
    UnsupportedCell {
        pattern: &'static str,
        scope: &'static str,
        supported: String,
    },
    #[error("scope/pattern requires anchor `{0}`")]
    MissingAnchor(&'static str),
}

fn supported_cells() -> String {
    let patterns = [
        Pattern::Absence,
        Pattern::Existence,
        Pattern::Universality,
        Pattern::Response,
        Pattern::Precedence,
    ];
    patterns
        .iter()
        .flat_map(|p| [format!("{}/global", p.name()), format!("{}/after-q", p.name())])
        .collect::<Vec<_>>()
        .join(", ")
}

/// Instantiates a specification pattern as CTL. The implemented cells are
/// the five patterns crossed with the `global` and `after-q` scopes.
pub fn instantiate_pattern(spec: &PatternSpec) -> Result<Formula, PatternError> {
    let p = spec.p.clone();
    let q = || spec.q.clone().ok_or(PatternError::MissingAnchor("q"));
    let s = || spec.s.clone().ok_or(PatternError::MissingAnchor("s"));
    // After-Q wrapper for patterns whose body is a plain invariant.
    let after_q = |q: Formula, body: Formula| Formula::ag(Formula::implies(q, body));
    // After-Q wrapper requiring the body to hold once Q first occurs.
    let after_q_first = |q: Formula, body: Formula| {
        Formula::aw(Formula::not(q.clone()), Formula::and(q, body))
    };
    match (spec.pattern, spec.scope) {
        (Pattern::Absence, Scope::Global) => Ok(Formula::ag(Formula::not(p))),
        (Pattern::Absence, Scope::AfterQ) => Ok(after_q(q()?, Formula::ag(Formula::not(p)))),
        (Pattern::Existence, Scope::Global) => Ok(Formula::af(p)),
        (Pattern::Existence, Scope::AfterQ) => Ok(after_q_first(q()?, Formula::af(p))),
        (Pattern::Universality, Scope::Global) => Ok(Formula::ag(p)),
        (Pattern::Universality, Scope::AfterQ) => Ok(after_q(q()?, Formula::ag(p))),
        (Pattern::Response, Scope::Global) => {
            Ok(Formula::ag(Formula::implies(p, Formula::af(s()?))))
        }
        (Pattern::Response, Scope::AfterQ) => Ok(after_q_first(
            q()?,
            Formula::ag(Formula::implies(p, Formula::af(s()?))),
        )),
        (Pattern::Precedence, Scope::Global) => Ok(Formula::aw(Formula::not(p), s()?)),
        (Pattern::Precedence, Scope::AfterQ) => Ok(after_q_first(
            q()?,
            Formula::aw(Formula::not(p), s()?),
        )),
        (pattern, scope) => Err(PatternError::UnsupportedCell {
            pattern: pattern.name(),
            scope: scope.name(),
            supported: supported_cells(),
        }),
    }
}

/// Catalog LTL templates for the implemented cells, kept for reference next
/// to the CTL mappings; the checker and the emitter work in CTL only.
pub fn ltl_template(pattern: Pattern, scope: Scope) -> Option<&'static str> {
    match (pattern, scope) {
        (Pattern::Absence, Scope::Global) => Some("G (!P)"),
        (Pattern::Absence, Scope::AfterQ) => Some("G (Q -> G (!P))"),
        (Pattern::Existence, Scope::Global) => Some("F (P)"),
        (Pattern::Existence, Scope::AfterQ) => Some("G (!Q) | F (Q & F (P))"),
        (Pattern::Universality, Scope::Global) => Some("G (P)"),
        (Pattern::Universality, Scope::AfterQ) => Some("G (Q -> G (P))"),
        (Pattern::Response, Scope::Global) => Some("G (P -> F (S))"),
        (Pattern::Response, Scope::AfterQ) => Some("G (Q -> G (P -> F (S)))"),
        (Pattern::Precedence, Scope::Global) => Some("(!P U S) | G (!P)"),
        (Pattern::Precedence, Scope::AfterQ) => Some("G (!Q) | F (Q & ((!P U S) | G (!P)))"),
        _ => None,
    }
}
