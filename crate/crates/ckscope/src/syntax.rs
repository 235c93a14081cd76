//! Formula AST, concrete grammar, substitution, schema matching, and bounded enumeration.
//!
//! Grammar tokens: `bot`, `top`, identifiers `[a-z][a-z0-9_]*`, `/\`, `\/`, `->`, `~`,
//! `[]`, `<>`, parentheses. Precedence, tightest first: `~` `[]` `<>`, then `/\`, then
//! `\/`, then `->`; all binary operators associate to the right. `~f` and `top` are
//! parser sugar for `f -> bot` and `bot -> bot`; the AST keeps only the seven core
//! constructors, so structural induction never has to treat negation specially.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A modal formula over `bot`, propositional atoms, `/\`, `\/`, `->`, `[]`, `<>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bot,
    Prop(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Dia(Box<Formula>),
}

/// A finite mapping from proposition names to formulas, applied uniformly.
pub type Substitution = BTreeMap<String, Formula>;

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn imp(left: Formula, right: Formula) -> Self {
        Formula::Imp(Box::new(left), Box::new(right))
    }

    pub fn boxed(body: Formula) -> Self {
        Formula::Box(Box::new(body))
    }

    pub fn dia(body: Formula) -> Self {
        Formula::Dia(Box::new(body))
    }

    /// `~f`, desugared: `f -> bot`.
    pub fn not(body: Formula) -> Self {
        Formula::imp(body, Formula::Bot)
    }

    /// `top`, desugared: `bot -> bot`.
    pub fn top() -> Self {
        Formula::imp(Formula::Bot, Formula::Bot)
    }

    /// Tree depth: atoms have depth 0, each constructor adds 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Bot | Formula::Prop(_) => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                1 + l.depth().max(r.depth())
            }
            Formula::Box(b) | Formula::Dia(b) => 1 + b.depth(),
        }
    }

    /// Sorted, deduplicated list of proposition names occurring in the formula.
    pub fn prop_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .subformulas()
            .filter_map(|f| match f {
                Formula::Prop(n) => Some(n.clone()),
                _ => None,
            })
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Pre-order traversal of all subformulas, including the formula itself.
    pub fn subformulas(&self) -> Subformulas<'_> {
        Subformulas { stack: vec![self] }
    }

    pub fn is_diamond_free(&self) -> bool {
        self.subformulas().all(|f| !matches!(f, Formula::Dia(_)))
    }

    /// Uniform substitution: every `Prop(n)` with `n` in the map is replaced by its image.
    pub fn substitute(&self, subst: &Substitution) -> Formula {
        match self {
            Formula::Bot => Formula::Bot,
            Formula::Prop(n) => subst.get(n).cloned().unwrap_or_else(|| self.clone()),
            Formula::And(l, r) => Formula::and(l.substitute(subst), r.substitute(subst)),
            Formula::Or(l, r) => Formula::or(l.substitute(subst), r.substitute(subst)),
            Formula::Imp(l, r) => Formula::imp(l.substitute(subst), r.substitute(subst)),
            Formula::Box(b) => Formula::boxed(b.substitute(subst)),
            Formula::Dia(b) => Formula::dia(b.substitute(subst)),
        }
    }
}

pub struct Subformulas<'a> {
    stack: Vec<&'a Formula>,
}

impl<'a> Iterator for Subformulas<'a> {
    type Item = &'a Formula;

    fn next(&mut self) -> Option<&'a Formula> {
        let f = self.stack.pop()?;
        match f {
            Formula::Bot | Formula::Prop(_) => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
                self.stack.push(r);
                self.stack.push(l);
            }
            Formula::Box(b) | Formula::Dia(b) => self.stack.push(b),
        }
        Some(f)
    }
}

/// First-order matching of a candidate against a schema whose propositions are
/// metavariables. Returns the unique substitution `s` with
/// `schema.substitute(&s) == *candidate`, if one exists.
pub fn match_schema(schema: &Formula, candidate: &Formula) -> Option<Substitution> {
    fn go(schema: &Formula, candidate: &Formula, s: &mut Substitution) -> bool {
        match (schema, candidate) {
            (Formula::Prop(n), c) => match s.get(n) {
                Some(bound) => bound == c,
                None => {
                    s.insert(n.clone(), c.clone());
                    true
                }
            },
            (Formula::Bot, Formula::Bot) => true,
            (Formula::And(a, b), Formula::And(c, d))
            | (Formula::Or(a, b), Formula::Or(c, d))
            | (Formula::Imp(a, b), Formula::Imp(c, d)) => go(a, c, s) && go(b, d, s),
            (Formula::Box(a), Formula::Box(b)) | (Formula::Dia(a), Formula::Dia(b)) => go(a, b, s),
            _ => false,
        }
    }
    let mut s = Substitution::new();
    go(schema, candidate, &mut s).then_some(s)
}

/// Right-nested disjunction of a list; the empty disjunction is `bot`.
pub fn big_disjunction<I: IntoIterator<Item = Formula>>(gamma: I) -> Formula {
    let items: Vec<Formula> = gamma.into_iter().collect();
    items
        .into_iter()
        .rev()
        .reduce(|acc, f| Formula::or(f, acc))
        .unwrap_or(Formula::Bot)
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Binding strength used for minimal parenthesisation; higher binds tighter.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Imp(_, _) => 0,
        Formula::Or(_, _) => 1,
        Formula::And(_, _) => 2,
        Formula::Box(_) | Formula::Dia(_) => 3,
        Formula::Bot | Formula::Prop(_) => 4,
    }
}

fn print_prec(f: &Formula, min: u8, out: &mut String) {
    let wrap = prec(f) < min;
    if wrap {
        out.push('(');
    }
    match f {
        Formula::Bot => out.push_str("bot"),
        Formula::Prop(n) => out.push_str(n),
        Formula::Imp(l, r) => {
            print_prec(l, 1, out);
            out.push_str(" -> ");
            print_prec(r, 0, out);
        }
        Formula::Or(l, r) => {
            print_prec(l, 2, out);
            out.push_str(" \\/ ");
            print_prec(r, 1, out);
        }
        Formula::And(l, r) => {
            print_prec(l, 3, out);
            out.push_str(" /\\ ");
            print_prec(r, 2, out);
        }
        Formula::Box(b) => {
            out.push_str("[]");
            print_prec(b, 3, out);
        }
        Formula::Dia(b) => {
            out.push_str("<>");
            print_prec(b, 3, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        print_prec(self, 0, &mut out);
        f.write_str(&out)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at byte {pos}")]
    Lexical { ch: char, pos: usize },
    #[error("unexpected end of input at byte {pos}: expected {expected}")]
    UnexpectedEnd { pos: usize, expected: &'static str },
    #[error("expected {expected} at byte {pos}, found `{found}`")]
    Unexpected {
        expected: &'static str,
        found: String,
        pos: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Bot,
    Top,
    And,
    Or,
    Arrow,
    Not,
    BoxOp,
    DiaOp,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(n) => n.clone(),
            Token::Bot => "bot".into(),
            Token::Top => "top".into(),
            Token::And => "/\\".into(),
            Token::Or => "\\/".into(),
            Token::Arrow => "->".into(),
            Token::Not => "~".into(),
            Token::BoxOp => "[]".into(),
            Token::DiaOp => "<>".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            '~' => {
                tokens.push((Token::Not, i));
                i += 1;
            }
            '/' | '\\' | '-' | '[' | '<' => {
                let two = &text[i..(i + 2).min(text.len())];
                let tok = match two {
                    "/\\" => Token::And,
                    "\\/" => Token::Or,
                    "->" => Token::Arrow,
                    "[]" => Token::BoxOp,
                    "<>" => Token::DiaOp,
                    _ => return Err(ParseError::Lexical { ch: c, pos: i }),
                };
                tokens.push((tok, i));
                i += 2;
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                let name = &text[start..i];
                let tok = match name {
                    "bot" => Token::Bot,
                    "top" => Token::Top,
                    _ => Token::Ident(name.to_string()),
                };
                tokens.push((tok, start));
            }
            _ => return Err(ParseError::Lexical { ch: c, pos: i }),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Token, expected: &'static str) -> Result<(), ParseError> {
        match self.bump() {
            Some((tok, _)) if tok == *want => Ok(()),
            Some((tok, pos)) => Err(ParseError::Unexpected {
                expected,
                found: tok.describe(),
                pos,
            }),
            None => Err(ParseError::UnexpectedEnd {
                pos: self.end,
                expected,
            }),
        }
    }

    // imp := or ('->' imp)?
    fn imp(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        if matches!(self.peek(), Some((Token::Arrow, _))) {
            self.bump();
            let right = self.imp()?;
            Ok(Formula::imp(left, right))
        } else {
            Ok(left)
        }
    }

    // or := and ('\/' or)?
    fn or(&mut self) -> Result<Formula, ParseError> {
        let left = self.and()?;
        if matches!(self.peek(), Some((Token::Or, _))) {
            self.bump();
            let right = self.or()?;
            Ok(Formula::or(left, right))
        } else {
            Ok(left)
        }
    }

    // and := unary ('/\' and)?
    fn and(&mut self) -> Result<Formula, ParseError> {
        let left = self.unary()?;
        if matches!(self.peek(), Some((Token::And, _))) {
            self.bump();
            let right = self.and()?;
            Ok(Formula::and(left, right))
        } else {
            Ok(left)
        }
    }

    // unary := ('~' | '[]' | '<>') unary | atom
    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some((Token::Not, _)) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some((Token::BoxOp, _)) => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Some((Token::DiaOp, _)) => {
                self.bump();
                Ok(Formula::dia(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    // atom := 'bot' | 'top' | ident | '(' imp ')'
    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some((Token::Bot, _)) => Ok(Formula::Bot),
            Some((Token::Top, _)) => Ok(Formula::top()),
            Some((Token::Ident(n), _)) => Ok(Formula::Prop(n)),
            Some((Token::LParen, _)) => {
                let inner = self.imp()?;
                self.eat(&Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some((tok, pos)) => Err(ParseError::Unexpected {
                expected: "a formula",
                found: tok.describe(),
                pos,
            }),
            None => Err(ParseError::UnexpectedEnd {
                pos: self.end,
                expected: "a formula",
            }),
        }
    }
}

/// Parse a formula in the concrete grammar. Inverse of [`Formula`]'s `Display`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = p.imp()?;
    match p.bump() {
        None => Ok(f),
        Some((tok, pos)) => Err(ParseError::Unexpected {
            expected: "end of input",
            found: tok.describe(),
            pos,
        }),
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse(s)
    }
}

// Formulas travel through JSON documents as strings in the concrete grammar.
impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("formula enumeration exceeded the cap of {cap} formulas")]
pub struct EnumerationCapExceeded {
    pub cap: usize,
}

/// Deterministic stream of every formula over the given propositions up to a depth
/// bound: by depth, then constructor order `[]`, `<>`, `/\`, `\/`, `->`, then
/// lexicographically by the emission index of the children.
pub fn enumerate_formulas(props: &[&str], max_depth: usize) -> FormulaEnumeration {
    FormulaEnumeration {
        props: props.iter().map(|s| s.to_string()).collect(),
        max_depth,
        diamond_free: false,
        all: Vec::new(),
        prev_start: 0,
        prev_end: 0,
        depth: 0,
        state: State::Atom(0),
    }
}

pub struct FormulaEnumeration {
    props: Vec<String>,
    max_depth: usize,
    diamond_free: bool,
    // Every emitted formula of depth < max_depth, in emission order; the band
    // [prev_start, prev_end) holds the deepest completed level. The final level is
    // not recorded, which keeps long streams from hoarding memory.
    all: Vec<Formula>,
    prev_start: usize,
    prev_end: usize,
    depth: usize,
    state: State,
}

enum State {
    Atom(usize),
    BoxU(usize),
    DiaU(usize),
    Bin { ctor: u8, li: usize, ri: usize },
    Done,
}

impl FormulaEnumeration {
    /// Restrict the stream to the `<>`-free fragment.
    pub fn diamond_free(mut self) -> Self {
        self.diamond_free = true;
        self
    }

    /// Collect the whole stream, failing if it holds more than `cap` formulas.
    pub fn collect_capped(self, cap: usize) -> Result<Vec<Formula>, EnumerationCapExceeded> {
        let mut out = Vec::new();
        for f in self {
            if out.len() == cap {
                return Err(EnumerationCapExceeded { cap });
            }
            out.push(f);
        }
        Ok(out)
    }

    fn emit(&mut self, f: Formula) -> Formula {
        if self.depth < self.max_depth {
            self.all.push(f.clone());
        }
        f
    }

    // First (li, ri) pair at or after the given one where at least one side lies in
    // the deepest completed level, or None when the constructor is exhausted.
    fn next_pair(&self, mut li: usize, mut ri: usize) -> Option<(usize, usize)> {
        loop {
            if ri >= self.prev_end {
                li += 1;
                ri = 0;
            }
            if li >= self.prev_end {
                return None;
            }
            if li >= self.prev_start || ri >= self.prev_start {
                return Some((li, ri));
            }
            // Both children too shallow: jump to the first admissible right child.
            ri = self.prev_start;
        }
    }

    fn start_level(&mut self) -> bool {
        if self.depth == self.max_depth {
            self.state = State::Done;
            return false;
        }
        self.prev_start = self.prev_end;
        self.prev_end = self.all.len();
        self.depth += 1;
        self.state = State::BoxU(self.prev_start);
        true
    }
}

impl Iterator for FormulaEnumeration {
    type Item = Formula;

    fn next(&mut self) -> Option<Formula> {
        loop {
            match self.state {
                State::Done => return None,
                State::Atom(i) => {
                    if i < 1 + self.props.len() {
                        self.state = State::Atom(i + 1);
                        let f = if i == 0 {
                            Formula::Bot
                        } else {
                            Formula::Prop(self.props[i - 1].clone())
                        };
                        return Some(self.emit(f));
                    }
                    if !self.start_level() {
                        return None;
                    }
                }
                State::BoxU(i) => {
                    if i < self.prev_end {
                        self.state = State::BoxU(i + 1);
                        let f = Formula::boxed(self.all[i].clone());
                        return Some(self.emit(f));
                    }
                    self.state = if self.diamond_free {
                        State::Bin {
                            ctor: 0,
                            li: 0,
                            ri: 0,
                        }
                    } else {
                        State::DiaU(self.prev_start)
                    };
                }
                State::DiaU(i) => {
                    if i < self.prev_end {
                        self.state = State::DiaU(i + 1);
                        let f = Formula::dia(self.all[i].clone());
                        return Some(self.emit(f));
                    }
                    self.state = State::Bin {
                        ctor: 0,
                        li: 0,
                        ri: 0,
                    };
                }
                State::Bin { ctor, li, ri } => match self.next_pair(li, ri) {
                    Some((l, r)) => {
                        self.state = State::Bin {
                            ctor,
                            li: l,
                            ri: r + 1,
                        };
                        let (a, b) = (self.all[l].clone(), self.all[r].clone());
                        let f = match ctor {
                            0 => Formula::and(a, b),
                            1 => Formula::or(a, b),
                            _ => Formula::imp(a, b),
                        };
                        return Some(self.emit(f));
                    }
                    None => {
                        if ctor < 2 {
                            self.state = State::Bin {
                                ctor: ctor + 1,
                                li: 0,
                                ri: 0,
                            };
                        } else if !self.start_level() {
                            return None;
                        }
                    }
                },
            }
        }
    }
}
