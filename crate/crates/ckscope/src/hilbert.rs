//! Hilbert-style proofs over consecutions `Γ ⊢ φ`, with a fixed intuitionistic
//! base, the two modal K schemas, and a configurable set of extension schemas.
//!
//! The calculus has four primitive rules:
//!
//! * `Ax` — any substitution instance of an available schema, under any context;
//! * `MP` — from `Γ ⊢ φ` and `Γ ⊢ φ → ψ` conclude `Γ ⊢ ψ` (same context);
//! * `Nec` — from `⊢ φ` (empty context!) conclude `Γ ⊢ []φ` under any context;
//! * `El` — `Γ ⊢ φ` whenever `φ ∈ Γ`.
//!
//! Proofs are line DAGs with sharing. [`check_proof`] verifies every line;
//! the transformers ([`weaken`], [`deduction`], [`detach`], [`k_rule`],
//! [`substitute_proof`]) realise the calculus's admissible rules by rewriting
//! checked proofs into checked proofs built from the primitive rules alone.

pub mod builtins;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse, Formula, Substitution};

// ---------------------------------------------------------------------------
// Consecutions
// ---------------------------------------------------------------------------

/// A judgement `Γ ⊢ φ` with a finite set of hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Consecution {
    context: BTreeSet<Formula>,
    conclusion: Formula,
}

impl Consecution {
    pub fn new(context: impl IntoIterator<Item = Formula>, conclusion: Formula) -> Consecution {
        Consecution {
            context: context.into_iter().collect(),
            conclusion,
        }
    }

    /// `⊢ φ` with no hypotheses.
    pub fn theorem(conclusion: Formula) -> Consecution {
        Consecution {
            context: BTreeSet::new(),
            conclusion,
        }
    }

    pub fn context(&self) -> impl Iterator<Item = &Formula> {
        self.context.iter()
    }

    pub fn context_set(&self) -> &BTreeSet<Formula> {
        &self.context
    }

    pub fn context_contains(&self, f: &Formula) -> bool {
        self.context.contains(f)
    }

    pub fn conclusion(&self) -> &Formula {
        &self.conclusion
    }
}

impl fmt::Display for Consecution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hyps: Vec<String> = self.context.iter().map(|g| g.to_string()).collect();
        if hyps.is_empty() {
            write!(f, "|- {}", self.conclusion)
        } else {
            write!(f, "{} |- {}", hyps.join(", "), self.conclusion)
        }
    }
}

// ---------------------------------------------------------------------------
// Axiom sets
// ---------------------------------------------------------------------------

/// The five named extension schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxiomName {
    Nd,
    Cd,
    Idb,
    Ndb,
    #[serde(rename = "wCD")]
    WCd,
}

pub const AXIOM_NAMES: [AxiomName; 5] = [
    AxiomName::Nd,
    AxiomName::Cd,
    AxiomName::Idb,
    AxiomName::Ndb,
    AxiomName::WCd,
];

impl AxiomName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxiomName::Nd => "Nd",
            AxiomName::Cd => "Cd",
            AxiomName::Idb => "Idb",
            AxiomName::Ndb => "Ndb",
            AxiomName::WCd => "wCD",
        }
    }

    /// The schema formula, over the metavariables `p`, `q`.
    pub fn formula(self) -> Formula {
        let text = match self {
            AxiomName::Nd => "<>bot -> bot",
            AxiomName::Cd => "<>(p \\/ q) -> <>p \\/ <>q",
            AxiomName::Idb => "(<>p -> []q) -> [](p -> q)",
            AxiomName::Ndb => "<>bot -> []bot",
            AxiomName::WCd => "[](p \\/ q) -> (<>p -> []q) -> []q",
        };
        parse(text).expect("named schemas parse")
    }
}

impl fmt::Display for AxiomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown axiom name `{0}` (expected Nd, Cd, Idb, Ndb or wCD)")]
pub struct UnknownAxiom(pub String);

impl FromStr for AxiomName {
    type Err = UnknownAxiom;

    fn from_str(s: &str) -> Result<AxiomName, UnknownAxiom> {
        match s {
            "Nd" => Ok(AxiomName::Nd),
            "Cd" => Ok(AxiomName::Cd),
            "Idb" => Ok(AxiomName::Idb),
            "Ndb" => Ok(AxiomName::Ndb),
            "wCD" => Ok(AxiomName::WCd),
            _ => Err(UnknownAxiom(s.to_string())),
        }
    }
}

pub const BASE_SCHEMA_NAMES: [&str; 11] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "Kb", "Kd",
];

/// The always-available schemas: the nine intuitionistic schemas `A1`..`A9`
/// plus the box and diamond K schemas.
pub fn base_schema(name: &str) -> Option<Formula> {
    let text = match name {
        "A1" => "p -> q -> p",
        "A2" => "(p -> q -> r) -> (p -> q) -> p -> r",
        "A3" => "p -> q -> p /\\ q",
        "A4" => "p /\\ q -> p",
        "A5" => "p /\\ q -> q",
        "A6" => "p -> p \\/ q",
        "A7" => "q -> p \\/ q",
        "A8" => "(p -> r) -> (q -> r) -> p \\/ q -> r",
        "A9" => "bot -> p",
        "Kb" => "[](p -> q) -> []p -> []q",
        "Kd" => "[](p -> q) -> <>p -> <>q",
        _ => return None,
    };
    Some(parse(text).expect("base schemas parse"))
}

/// The schemas a proof may cite: the fixed base, a chosen subset of the named
/// extension schemas, and optional user schemas (closed under substitution,
/// cited as `S1`, `S2`, ... in declaration order).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxiomSet {
    extras: BTreeSet<AxiomName>,
    user_schemas: Vec<Formula>,
}

impl AxiomSet {
    /// The bare calculus: base schemas only.
    pub fn ck() -> AxiomSet {
        AxiomSet::default()
    }

    pub fn extend(mut self, ax: AxiomName) -> AxiomSet {
        self.extras.insert(ax);
        self
    }

    pub fn with_extras(extras: impl IntoIterator<Item = AxiomName>) -> AxiomSet {
        AxiomSet {
            extras: extras.into_iter().collect(),
            user_schemas: Vec::new(),
        }
    }

    pub fn add_user_schema(&mut self, schema: Formula) {
        self.user_schemas.push(schema);
    }

    pub fn contains(&self, ax: AxiomName) -> bool {
        self.extras.contains(&ax)
    }

    pub fn extras(&self) -> impl Iterator<Item = AxiomName> + '_ {
        self.extras.iter().copied()
    }

    pub fn user_schemas(&self) -> &[Formula] {
        &self.user_schemas
    }

    /// Every schema beyond the base, with its citable name.
    pub fn extra_schemas(&self) -> Vec<(String, Formula)> {
        let mut out: Vec<(String, Formula)> = self
            .extras
            .iter()
            .map(|ax| (ax.as_str().to_string(), ax.formula()))
            .collect();
        for (i, s) in self.user_schemas.iter().enumerate() {
            out.push((format!("S{}", i + 1), s.clone()));
        }
        out
    }

    /// Resolve a schema name to its formula, honouring the enabled extras.
    pub fn resolve(&self, name: &str) -> Option<Formula> {
        if let Some(f) = base_schema(name) {
            return Some(f);
        }
        if let Ok(ax) = name.parse::<AxiomName>() {
            return self.extras.contains(&ax).then(|| ax.formula());
        }
        let index: usize = name.strip_prefix('S')?.parse().ok()?;
        self.user_schemas.get(index.checked_sub(1)?).cloned()
    }
}

impl fmt::Display for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CK")?;
        for ax in &self.extras {
            write!(f, "+{ax}")?;
        }
        for i in 1..=self.user_schemas.len() {
            write!(f, "+S{i}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Named formula constants
// ---------------------------------------------------------------------------

/// The box-only weak constant-domain formula (a single formula, not a schema):
/// the diamond of the wCD schema replaced by its box rendering `~[]~p`.
pub fn wcdb_formula() -> Formula {
    parse("[](p \\/ q) -> (~[]~p -> []q) -> []q").expect("constant parses")
}

/// Grefe's formula, a classical-flavoured box principle used as a search target.
pub fn grefe_formula() -> Formula {
    parse("(~[]bot -> []bot) -> []bot").expect("constant parses")
}

// ---------------------------------------------------------------------------
// Proof objects
// ---------------------------------------------------------------------------

/// How a line is justified. Line references are zero-based indices into the
/// proof and must point strictly earlier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// A substitution instance of the named schema.
    Ax { schema: String, subst: Substitution },
    /// `minor` proves `φ`, `major` proves `φ → ψ`, both under this line's context.
    Mp { minor: usize, major: usize },
    /// `premise` proves `φ` under the empty context; this line is `Γ ⊢ []φ`.
    Nec { premise: usize },
    /// The formula is a member of the context.
    El,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Ax { schema, subst } => {
                write!(f, "Ax {schema}")?;
                if !subst.is_empty() {
                    let binds: Vec<String> =
                        subst.iter().map(|(p, g)| format!("{p} := {g}")).collect();
                    write!(f, " [{}]", binds.join(", "))?;
                }
                Ok(())
            }
            Justification::Mp { minor, major } => write!(f, "MP {minor} {major}"),
            Justification::Nec { premise } => write!(f, "Nec {premise}"),
            Justification::El => write!(f, "El"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub consecution: Consecution,
    pub justification: Justification,
}

/// An ordered list of justified lines; the last line is the conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Proof {
    lines: Vec<ProofLine>,
}

impl Proof {
    /// Wrap lines without checking them; run [`check_proof`] to validate.
    pub fn new(lines: Vec<ProofLine>) -> Proof {
        Proof { lines }
    }

    pub fn lines(&self) -> &[ProofLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn conclusion(&self) -> Option<&Consecution> {
        self.lines.last().map(|l| &l.consecution)
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, line) in self.lines.iter().enumerate() {
            writeln!(f, "{i}: {}   [{}]", line.consecution, line.justification)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The checker
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("proof has no lines")]
    Empty,
    #[error("line {line}: reference to line {reference} is out of range or not earlier")]
    BadRef { line: usize, reference: usize },
    #[error("line {line}: schema `{name}` is not available in {axioms}")]
    UnknownSchema {
        line: usize,
        name: String,
        axioms: String,
    },
    #[error("line {line}: formula is not the claimed instance of `{name}`")]
    NotAnInstance { line: usize, name: String },
    #[error("line {line}: modus ponens premises must share the line's context")]
    MpContext { line: usize },
    #[error("line {line}: modus ponens premises do not fit (need `A` and `A -> B`)")]
    MpShape { line: usize },
    #[error("line {line}: necessitation premise has a nonempty context")]
    NecPremise { line: usize },
    #[error("line {line}: formula is not the box of the premise's formula")]
    NecShape { line: usize },
    #[error("line {line}: formula is not an element of the context")]
    NotElement { line: usize },
}

fn check_line(
    earlier: &[ProofLine],
    i: usize,
    line: &ProofLine,
    ax: &AxiomSet,
) -> Result<(), ProofError> {
    let resolve_ref = |r: usize| -> Result<&ProofLine, ProofError> {
        earlier
            .get(r)
            .ok_or(ProofError::BadRef { line: i, reference: r })
    };
    let c = &line.consecution;
    match &line.justification {
        Justification::Ax { schema, subst } => {
            let template = ax.resolve(schema).ok_or_else(|| ProofError::UnknownSchema {
                line: i,
                name: schema.clone(),
                axioms: ax.to_string(),
            })?;
            if template.substitute(subst) != *c.conclusion() {
                return Err(ProofError::NotAnInstance {
                    line: i,
                    name: schema.clone(),
                });
            }
        }
        Justification::Mp { minor, major } => {
            let minor = resolve_ref(*minor)?;
            let major = resolve_ref(*major)?;
            if minor.consecution.context_set() != c.context_set()
                || major.consecution.context_set() != c.context_set()
            {
                return Err(ProofError::MpContext { line: i });
            }
            let expected = Formula::imp(
                minor.consecution.conclusion().clone(),
                c.conclusion().clone(),
            );
            if *major.consecution.conclusion() != expected {
                return Err(ProofError::MpShape { line: i });
            }
        }
        Justification::Nec { premise } => {
            let premise = resolve_ref(*premise)?;
            if premise.consecution.context().next().is_some() {
                return Err(ProofError::NecPremise { line: i });
            }
            let expected = Formula::boxed(premise.consecution.conclusion().clone());
            if *c.conclusion() != expected {
                return Err(ProofError::NecShape { line: i });
            }
        }
        Justification::El => {
            if !c.context_contains(c.conclusion()) {
                return Err(ProofError::NotElement { line: i });
            }
        }
    }
    Ok(())
}

/// Verify every line; on success return the final consecution.
pub fn check_proof(p: &Proof, ax: &AxiomSet) -> Result<Consecution, ProofError> {
    if p.is_empty() {
        return Err(ProofError::Empty);
    }
    for (i, line) in p.lines.iter().enumerate() {
        check_line(&p.lines[..i], i, line, ax)?;
    }
    Ok(p.conclusion().unwrap().clone())
}

// ---------------------------------------------------------------------------
// Proof builder
// ---------------------------------------------------------------------------

type Context = BTreeSet<Formula>;

/// Grows a proof line by line, checking each step as it is added and sharing
/// lines that restate an already-proved consecution.
///
/// The stepping methods panic on ill-formed use (wrong shapes, unavailable
/// schemas); they are meant for programmatic construction where such a panic is
/// an internal bug, not for validating untrusted input — that is
/// [`check_proof`]'s job.
pub struct ProofBuilder {
    axioms: AxiomSet,
    lines: Vec<ProofLine>,
    by_consecution: HashMap<Consecution, usize>,
}

impl ProofBuilder {
    pub fn new(axioms: AxiomSet) -> ProofBuilder {
        ProofBuilder {
            axioms,
            lines: Vec::new(),
            by_consecution: HashMap::new(),
        }
    }

    pub fn axioms(&self) -> &AxiomSet {
        &self.axioms
    }

    pub fn line(&self, i: usize) -> &ProofLine {
        &self.lines[i]
    }

    fn push(&mut self, consecution: Consecution, justification: Justification) -> usize {
        if let Some(&i) = self.by_consecution.get(&consecution) {
            return i;
        }
        let line = ProofLine {
            consecution,
            justification,
        };
        let i = self.lines.len();
        if let Err(e) = check_line(&self.lines, i, &line, &self.axioms) {
            panic!("proof construction bug at `{}`: {e}", line.consecution);
        }
        self.by_consecution.insert(line.consecution.clone(), i);
        self.lines.push(line);
        i
    }

    /// Instantiate a schema under the given context.
    pub fn ax(&mut self, ctx: &Context, schema: &str, subst: Substitution) -> usize {
        let template = self
            .axioms
            .resolve(schema)
            .unwrap_or_else(|| panic!("schema `{schema}` not available in {}", self.axioms));
        let formula = template.substitute(&subst);
        self.push(
            Consecution::new(ctx.iter().cloned(), formula),
            Justification::Ax {
                schema: schema.to_string(),
                subst,
            },
        )
    }

    pub fn mp(&mut self, minor: usize, major: usize) -> usize {
        let ctx = self.lines[major].consecution.context_set().clone();
        let conclusion = match self.lines[major].consecution.conclusion() {
            Formula::Imp(a, b) if **a == *self.lines[minor].consecution.conclusion() => {
                (**b).clone()
            }
            _ => panic!(
                "modus ponens mismatch: `{}` against `{}`",
                self.lines[minor].consecution, self.lines[major].consecution
            ),
        };
        self.push(
            Consecution::new(ctx, conclusion),
            Justification::Mp { minor, major },
        )
    }

    pub fn nec(&mut self, ctx: &Context, premise: usize) -> usize {
        let boxed = Formula::boxed(self.lines[premise].consecution.conclusion().clone());
        self.push(
            Consecution::new(ctx.iter().cloned(), boxed),
            Justification::Nec { premise },
        )
    }

    pub fn el(&mut self, ctx: &Context, formula: Formula) -> usize {
        self.push(
            Consecution::new(ctx.iter().cloned(), formula),
            Justification::El,
        )
    }

    /// Append an already-checked proof, reusing shared lines; returns the index
    /// of its final line.
    pub fn import(&mut self, p: &Proof) -> usize {
        assert!(!p.is_empty(), "cannot import an empty proof");
        let mut map = Vec::with_capacity(p.len());
        for line in p.lines() {
            let justification = match &line.justification {
                Justification::Mp { minor, major } => Justification::Mp {
                    minor: map[*minor],
                    major: map[*major],
                },
                Justification::Nec { premise } => Justification::Nec {
                    premise: map[*premise],
                },
                other => other.clone(),
            };
            map.push(self.push(line.consecution.clone(), justification));
        }
        *map.last().unwrap()
    }

    /// `Γ ⊢ f → f`, the standard five-line identity derivation.
    pub fn lemma_id(&mut self, ctx: &Context, f: Formula) -> usize {
        let ff = Formula::imp(f.clone(), f.clone());
        let a1a = self.ax(ctx, "A1", subst([("p", f.clone()), ("q", f.clone())]));
        let a1b = self.ax(ctx, "A1", subst([("p", f.clone()), ("q", ff.clone())]));
        let a2 = self.ax(
            ctx,
            "A2",
            subst([("p", f.clone()), ("q", ff), ("r", f.clone())]),
        );
        let step = self.mp(a1b, a2);
        self.mp(a1a, step)
    }

    /// From `Γ ⊢ a → b` and `Γ ⊢ b → c`, derive `Γ ⊢ a → c`.
    pub fn syllogism(&mut self, ab: usize, bc: usize) -> usize {
        let ctx = self.lines[ab].consecution.context_set().clone();
        let (a, b) = match self.lines[ab].consecution.conclusion() {
            Formula::Imp(a, b) => ((**a).clone(), (**b).clone()),
            other => panic!("syllogism needs implications, got `{other}`"),
        };
        let c = match self.lines[bc].consecution.conclusion() {
            Formula::Imp(b2, c) if **b2 == b => (**c).clone(),
            other => panic!("syllogism needs chained implications, got `{other}`"),
        };
        let bc_formula = Formula::imp(b.clone(), c.clone());
        let lift = self.ax(&ctx, "A1", subst([("p", bc_formula), ("q", a.clone())]));
        let a_bc = self.mp(bc, lift);
        let a2 = self.ax(&ctx, "A2", subst([("p", a), ("q", b), ("r", c)]));
        let chain = self.mp(a_bc, a2);
        self.mp(ab, chain)
    }

    /// Close the proof with the given line as its conclusion. Later lines are
    /// dropped (references only ever point backwards, so the prefix is still a
    /// proof); this matters because line sharing can place the intended
    /// conclusion before auxiliary lines.
    pub fn finish_at(mut self, last: usize) -> Proof {
        self.lines.truncate(last + 1);
        let p = Proof { lines: self.lines };
        debug_assert!(check_proof(&p, &self.axioms).is_ok());
        p
    }

    /// Close the proof at its literal last line.
    pub fn finish(self) -> Proof {
        let last = self.lines.len().saturating_sub(1);
        self.finish_at(last)
    }
}

/// Convenience constructor for substitutions over string metavariables.
pub(crate) fn subst(
    pairs: impl IntoIterator<Item = (&'static str, Formula)>,
) -> Substitution {
    pairs
        .into_iter()
        .map(|(p, f)| (p.to_string(), f))
        .collect()
}

// ---------------------------------------------------------------------------
// Admissible-rule transformers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProofTransformError {
    #[error(transparent)]
    Invalid(#[from] ProofError),
    #[error("pivot `{0}` does not occur in the final context")]
    PivotAbsent(Formula),
    #[error("the final formula is not an implication")]
    NotImplication,
}

/// Monotonicity: rebuild a proof of `Γ ⊢ φ` into one of `Γ ∪ extra ⊢ φ`.
///
/// Every line is widened except the sub-proofs feeding necessitation steps,
/// whose contexts must stay empty; those are imported verbatim.
pub fn weaken(
    p: &Proof,
    ax: &AxiomSet,
    extra: impl IntoIterator<Item = Formula>,
) -> Result<Proof, ProofError> {
    check_proof(p, ax)?;
    let extra: Context = extra.into_iter().collect();
    let mut w = Weakener {
        p,
        extra: &extra,
        b: ProofBuilder::new(ax.clone()),
        verbatim: vec![None; p.len()],
        widened: vec![None; p.len()],
    };
    let last = w.widened(p.len() - 1);
    Ok(w.b.finish_at(last))
}

struct Weakener<'a> {
    p: &'a Proof,
    extra: &'a Context,
    b: ProofBuilder,
    verbatim: Vec<Option<usize>>,
    widened: Vec<Option<usize>>,
}

impl Weakener<'_> {
    fn verbatim(&mut self, i: usize) -> usize {
        if let Some(j) = self.verbatim[i] {
            return j;
        }
        let line = self.p.lines()[i].clone();
        let j = match line.justification {
            Justification::Mp { minor, major } => {
                let minor = self.verbatim(minor);
                let major = self.verbatim(major);
                self.b.mp(minor, major)
            }
            Justification::Nec { premise } => {
                let premise = self.verbatim(premise);
                self.b
                    .nec(line.consecution.context_set(), premise)
            }
            other => self.b.push(line.consecution, other),
        };
        self.verbatim[i] = Some(j);
        j
    }

    fn widened(&mut self, i: usize) -> usize {
        if let Some(j) = self.widened[i] {
            return j;
        }
        let line = self.p.lines()[i].clone();
        let mut ctx = line.consecution.context_set().clone();
        ctx.extend(self.extra.iter().cloned());
        let j = match line.justification {
            Justification::Ax { schema, subst } => self.b.ax(&ctx, &schema, subst),
            Justification::El => self.b.el(&ctx, line.consecution.conclusion().clone()),
            Justification::Mp { minor, major } => {
                let minor = self.widened(minor);
                let major = self.widened(major);
                self.b.mp(minor, major)
            }
            Justification::Nec { premise } => {
                let premise = self.verbatim(premise);
                self.b.nec(&ctx, premise)
            }
        };
        self.widened[i] = Some(j);
        j
    }
}

/// Deduction: from a proof of `Γ ∪ {pivot} ⊢ ψ` build one of `Γ ⊢ pivot → ψ`.
///
/// The classic line-by-line translation: axiom and element lines are lifted with
/// `A1`, the pivot's own element line becomes the identity lemma, modus ponens
/// routes through `A2`, and necessitation conclusions are lifted like axioms
/// (their premises stay untouched).
pub fn deduction(p: &Proof, ax: &AxiomSet, pivot: &Formula) -> Result<Proof, ProofTransformError> {
    let end = check_proof(p, ax)?;
    if !end.context_contains(pivot) {
        return Err(ProofTransformError::PivotAbsent(pivot.clone()));
    }
    let mut d = Deducer {
        p,
        pivot,
        b: ProofBuilder::new(ax.clone()),
        verbatim: vec![None; p.len()],
        translated: vec![None; p.len()],
    };
    let last = d.translated(p.len() - 1);
    Ok(d.b.finish_at(last))
}

struct Deducer<'a> {
    p: &'a Proof,
    pivot: &'a Formula,
    b: ProofBuilder,
    verbatim: Vec<Option<usize>>,
    translated: Vec<Option<usize>>,
}

impl Deducer<'_> {
    fn verbatim(&mut self, i: usize) -> usize {
        if let Some(j) = self.verbatim[i] {
            return j;
        }
        let line = self.p.lines()[i].clone();
        let j = match line.justification {
            Justification::Mp { minor, major } => {
                let minor = self.verbatim(minor);
                let major = self.verbatim(major);
                self.b.mp(minor, major)
            }
            Justification::Nec { premise } => {
                let premise = self.verbatim(premise);
                self.b.nec(line.consecution.context_set(), premise)
            }
            other => self.b.push(line.consecution, other),
        };
        self.verbatim[i] = Some(j);
        j
    }

    /// `Γ ⊢ χ` becomes `Γ \ {pivot} ⊢ pivot → χ`.
    fn translated(&mut self, i: usize) -> usize {
        if let Some(j) = self.translated[i] {
            return j;
        }
        let line = self.p.lines()[i].clone();
        let chi = line.consecution.conclusion().clone();
        let mut ctx = line.consecution.context_set().clone();
        ctx.remove(self.pivot);
        let j = match line.justification {
            Justification::Ax { schema, subst } => {
                let base = self.b.ax(&ctx, &schema, subst);
                self.lift(&ctx, base, chi)
            }
            Justification::El => {
                if chi == *self.pivot {
                    self.b.lemma_id(&ctx, chi)
                } else {
                    let base = self.b.el(&ctx, chi.clone());
                    self.lift(&ctx, base, chi)
                }
            }
            Justification::Nec { premise } => {
                let premise = self.verbatim(premise);
                let base = self.b.nec(&ctx, premise);
                self.lift(&ctx, base, chi)
            }
            Justification::Mp { minor, major } => {
                let chi1 = self.p.lines()[minor].consecution.conclusion().clone();
                let minor = self.translated(minor);
                let major = self.translated(major);
                let a2 = self.b.ax(
                    &ctx,
                    "A2",
                    subst([
                        ("p", self.pivot.clone()),
                        ("q", chi1),
                        ("r", chi),
                    ]),
                );
                let step = self.b.mp(major, a2);
                self.b.mp(minor, step)
            }
        };
        self.translated[i] = Some(j);
        j
    }

    /// From `Γ ⊢ χ` (at `base`) derive `Γ ⊢ pivot → χ` via `A1`.
    fn lift(&mut self, ctx: &Context, base: usize, chi: Formula) -> usize {
        let a1 = self.b.ax(
            ctx,
            "A1",
            subst([("p", chi), ("q", self.pivot.clone())]),
        );
        self.b.mp(base, a1)
    }
}

/// Detachment: from a proof of `Γ ⊢ φ → ψ` build one of `Γ ∪ {φ} ⊢ ψ`
/// (weaken by `φ`, cite it, apply modus ponens).
pub fn detach(p: &Proof, ax: &AxiomSet) -> Result<Proof, ProofTransformError> {
    let end = check_proof(p, ax)?;
    let antecedent = match end.conclusion() {
        Formula::Imp(a, _) => (**a).clone(),
        _ => return Err(ProofTransformError::NotImplication),
    };
    let widened = weaken(p, ax, [antecedent.clone()])?;
    let mut b = ProofBuilder::new(ax.clone());
    let major = b.import(&widened);
    let ctx = b.line(major).consecution.context_set().clone();
    let minor = b.el(&ctx, antecedent);
    let last = b.mp(minor, major);
    Ok(b.finish_at(last))
}

/// The boxed-context rule: from a proof of `{γ1, .., γk} ⊢ φ` build one of
/// `{[]γ1, .., []γk} ⊢ []φ`.
///
/// Deduction flattens the context into `⊢ γ1 -> .. -> γk -> φ`, one
/// necessitation boxes the chain, and `Kb` with the boxed hypotheses unrolls it.
pub fn k_rule(p: &Proof, ax: &AxiomSet) -> Result<Proof, ProofError> {
    let end = check_proof(p, ax)?;
    let gammas: Vec<Formula> = end.context().cloned().collect();
    let mut flat = p.clone();
    for g in gammas.iter().rev() {
        flat = deduction(&flat, ax, g).expect("pivot taken from the context");
    }
    let boxed_ctx: Context = gammas.iter().cloned().map(Formula::boxed).collect();
    let mut b = ProofBuilder::new(ax.clone());
    let closed = b.import(&flat);
    let mut current = b.nec(&boxed_ctx, closed);
    let mut chain = flat.conclusion().unwrap().conclusion().clone();
    for g in &gammas {
        let rest = match &chain {
            Formula::Imp(l, r) if **l == *g => (**r).clone(),
            other => panic!("deduction produced an unexpected chain `{other}`"),
        };
        let kb = b.ax(
            &boxed_ctx,
            "Kb",
            subst([("p", g.clone()), ("q", rest.clone())]),
        );
        let unrolled = b.mp(current, kb);
        let hyp = b.el(&boxed_ctx, Formula::boxed(g.clone()));
        current = b.mp(hyp, unrolled);
        chain = rest;
    }
    Ok(b.finish_at(current))
}

/// Substitution: apply `sigma` to every line, yielding a proof of
/// `Γ^σ ⊢ φ^σ`. Axiom lines compose their instantiation with `sigma`.
pub fn substitute_proof(
    p: &Proof,
    ax: &AxiomSet,
    sigma: &Substitution,
) -> Result<Proof, ProofError> {
    check_proof(p, ax)?;
    let mut b = ProofBuilder::new(ax.clone());
    let mut map = Vec::with_capacity(p.len());
    for line in p.lines() {
        let ctx: Context = line
            .consecution
            .context()
            .map(|g| g.substitute(sigma))
            .collect();
        let j = match &line.justification {
            Justification::Ax { schema, subst: tau } => {
                let template = b.axioms().resolve(schema).expect("checked above");
                let composed: Substitution = template
                    .prop_names()
                    .into_iter()
                    .map(|x| {
                        let image = tau
                            .get(&x)
                            .cloned()
                            .unwrap_or_else(|| Formula::prop(x.clone()));
                        (x, image.substitute(sigma))
                    })
                    .collect();
                b.ax(&ctx, schema, composed)
            }
            Justification::El => b.el(&ctx, line.consecution.conclusion().substitute(sigma)),
            Justification::Mp { minor, major } => b.mp(map[*minor], map[*major]),
            Justification::Nec { premise } => b.nec(&ctx, map[*premise]),
        };
        map.push(j);
    }
    let last = *map.last().expect("nonempty proof");
    Ok(b.finish_at(last))
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

/// On-disk proof document. `axioms` lists enabled extension schemas by name;
/// `user_schemas` lists extra schema formulas citable as `S1`, `S2`, ...;
/// `refs` are zero-based line indices (for `MP`: minor first, then major).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axioms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub user_schemas: Vec<Formula>,
    pub lines: Vec<ProofLineJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofLineJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context: Vec<Formula>,
    pub formula: Formula,
    pub rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subst: Substitution,
}

#[derive(Debug, Error)]
pub enum ProofDocError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Axiom(#[from] UnknownAxiom),
    #[error("line {line}: unknown rule `{rule}` (expected Ax, MP, Nec or El)")]
    UnknownRule { line: usize, rule: String },
    #[error("line {line}: rule {rule} takes {expected} reference(s), got {got}")]
    RefCount {
        line: usize,
        rule: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: an Ax line needs a `schema` field")]
    MissingSchema { line: usize },
}

pub fn proof_from_doc(doc: &ProofJson) -> Result<(AxiomSet, Proof), ProofDocError> {
    let mut ax = AxiomSet::with_extras(
        doc.axioms
            .iter()
            .map(|s| s.parse::<AxiomName>())
            .collect::<Result<Vec<_>, _>>()?,
    );
    for s in &doc.user_schemas {
        ax.add_user_schema(s.clone());
    }
    let mut lines = Vec::with_capacity(doc.lines.len());
    for (i, l) in doc.lines.iter().enumerate() {
        let expect_refs = |rule: &'static str, expected: usize| -> Result<(), ProofDocError> {
            if l.refs.len() != expected {
                Err(ProofDocError::RefCount {
                    line: i,
                    rule,
                    expected,
                    got: l.refs.len(),
                })
            } else {
                Ok(())
            }
        };
        let justification = match l.rule.as_str() {
            "Ax" => {
                expect_refs("Ax", 0)?;
                Justification::Ax {
                    schema: l
                        .schema
                        .clone()
                        .ok_or(ProofDocError::MissingSchema { line: i })?,
                    subst: l.subst.clone(),
                }
            }
            "MP" => {
                expect_refs("MP", 2)?;
                Justification::Mp {
                    minor: l.refs[0],
                    major: l.refs[1],
                }
            }
            "Nec" => {
                expect_refs("Nec", 1)?;
                Justification::Nec { premise: l.refs[0] }
            }
            "El" => {
                expect_refs("El", 0)?;
                Justification::El
            }
            other => {
                return Err(ProofDocError::UnknownRule {
                    line: i,
                    rule: other.to_string(),
                })
            }
        };
        lines.push(ProofLine {
            consecution: Consecution::new(l.context.iter().cloned(), l.formula.clone()),
            justification,
        });
    }
    Ok((ax, Proof::new(lines)))
}

pub fn proof_to_doc(ax: &AxiomSet, p: &Proof) -> ProofJson {
    ProofJson {
        axioms: ax.extras().map(|a| a.as_str().to_string()).collect(),
        user_schemas: ax.user_schemas().to_vec(),
        lines: p
            .lines()
            .iter()
            .map(|l| {
                let (rule, refs, schema, subst) = match &l.justification {
                    Justification::Ax { schema, subst } => {
                        ("Ax", vec![], Some(schema.clone()), subst.clone())
                    }
                    Justification::Mp { minor, major } => {
                        ("MP", vec![*minor, *major], None, Substitution::new())
                    }
                    Justification::Nec { premise } => {
                        ("Nec", vec![*premise], None, Substitution::new())
                    }
                    Justification::El => ("El", vec![], None, Substitution::new()),
                };
                ProofLineJson {
                    context: l.consecution.context().cloned().collect(),
                    formula: l.consecution.conclusion().clone(),
                    rule: rule.to_string(),
                    refs,
                    schema,
                    subst,
                }
            })
            .collect(),
    }
}

pub fn proof_from_json_str(s: &str) -> Result<(AxiomSet, Proof), ProofDocError> {
    proof_from_doc(&serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn ctx(items: &[&str]) -> Context {
        items.iter().map(|s| f(s)).collect()
    }

    fn id_proof() -> Proof {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        let last = b.lemma_id(&ctx(&[]), f("p"));
        b.finish_at(last)
    }

    #[test]
    fn identity_derivation_is_accepted() {
        let end = check_proof(&id_proof(), &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::theorem(f("p -> p")));
    }

    #[test]
    fn nec_premise_must_have_empty_context() {
        let lines = vec![
            ProofLine {
                consecution: Consecution::new([f("p")], f("p")),
                justification: Justification::El,
            },
            ProofLine {
                consecution: Consecution::new([f("p")], f("[]p")),
                justification: Justification::Nec { premise: 0 },
            },
        ];
        let err = check_proof(&Proof::new(lines), &AxiomSet::ck()).unwrap_err();
        assert_eq!(err, ProofError::NecPremise { line: 1 });
    }

    #[test]
    fn nec_applies_under_any_context() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        let thm = b.lemma_id(&ctx(&[]), f("p"));
        let last = b.nec(&ctx(&["q"]), thm);
        let end = check_proof(&b.finish_at(last), &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("q")], f("[](p -> p)")));
    }

    #[test]
    fn extension_schema_requires_membership() {
        let line = ProofLine {
            consecution: Consecution::theorem(f("<>bot -> bot")),
            justification: Justification::Ax {
                schema: "Nd".to_string(),
                subst: Substitution::new(),
            },
        };
        let p = Proof::new(vec![line]);
        assert!(matches!(
            check_proof(&p, &AxiomSet::ck()),
            Err(ProofError::UnknownSchema { .. })
        ));
        let with_nd = AxiomSet::ck().extend(AxiomName::Nd);
        assert!(check_proof(&p, &with_nd).is_ok());
    }

    #[test]
    fn wrong_instance_is_rejected() {
        let line = ProofLine {
            consecution: Consecution::theorem(f("p -> q")),
            justification: Justification::Ax {
                schema: "A1".to_string(),
                subst: Substitution::new(),
            },
        };
        assert!(matches!(
            check_proof(&Proof::new(vec![line]), &AxiomSet::ck()),
            Err(ProofError::NotAnInstance { .. })
        ));
    }

    #[test]
    fn mp_contexts_must_agree() {
        let lines = vec![
            ProofLine {
                consecution: Consecution::new([f("p")], f("p")),
                justification: Justification::El,
            },
            ProofLine {
                consecution: Consecution::theorem(f("p -> q -> p")),
                justification: Justification::Ax {
                    schema: "A1".to_string(),
                    subst: Substitution::new(),
                },
            },
            ProofLine {
                consecution: Consecution::new([f("p")], f("q -> p")),
                justification: Justification::Mp { minor: 0, major: 1 },
            },
        ];
        let err = check_proof(&Proof::new(lines), &AxiomSet::ck()).unwrap_err();
        assert_eq!(err, ProofError::MpContext { line: 2 });
    }

    #[test]
    fn forward_references_are_rejected() {
        let lines = vec![ProofLine {
            consecution: Consecution::theorem(f("[]p")),
            justification: Justification::Nec { premise: 0 },
        }];
        assert!(matches!(
            check_proof(&Proof::new(lines), &AxiomSet::ck()),
            Err(ProofError::BadRef { .. })
        ));
    }

    #[test]
    fn user_schemas_are_cited_by_position() {
        let mut ax = AxiomSet::ck();
        ax.add_user_schema(f("p -> p"));
        let mut b = ProofBuilder::new(ax.clone());
        b.ax(&ctx(&[]), "S1", subst([("p", f("<>q"))]));
        let end = check_proof(&b.finish(), &ax).unwrap();
        assert_eq!(end, Consecution::theorem(f("<>q -> <>q")));
    }

    #[test]
    fn weaken_theorem() {
        let out = weaken(&id_proof(), &AxiomSet::ck(), [f("q")]).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("q")], f("p -> p")));
    }

    #[test]
    fn weaken_keeps_el_lines() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p"]), f("p"));
        let out = weaken(&b.finish(), &AxiomSet::ck(), [f("q")]).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("p"), f("q")], f("p")));
    }

    #[test]
    fn weaken_preserves_empty_nec_premises() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        let thm = b.lemma_id(&ctx(&[]), f("p"));
        b.nec(&ctx(&[]), thm);
        let out = weaken(&b.finish(), &AxiomSet::ck(), [f("r")]).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("r")], f("[](p -> p)")));
    }

    #[test]
    fn deduction_on_pivot_el() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p"]), f("p"));
        let out = deduction(&b.finish(), &AxiomSet::ck(), &f("p")).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::theorem(f("p -> p")));
    }

    #[test]
    fn deduction_on_other_el() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p", "q"]), f("p"));
        let out = deduction(&b.finish(), &AxiomSet::ck(), &f("q")).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("p")], f("q -> p")));
    }

    #[test]
    fn deduction_requires_the_pivot() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p"]), f("p"));
        assert!(matches!(
            deduction(&b.finish(), &AxiomSet::ck(), &f("q")),
            Err(ProofTransformError::PivotAbsent(_))
        ));
    }

    #[test]
    fn detach_identity() {
        let out = detach(&id_proof(), &AxiomSet::ck()).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("p")], f("p")));
    }

    #[test]
    fn detach_kb_instance() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.ax(&ctx(&[]), "Kb", Substitution::new());
        let out = detach(&b.finish(), &AxiomSet::ck()).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(
            end,
            Consecution::new([f("[](p -> q)")], f("[]p -> []q"))
        );
    }

    #[test]
    fn detach_rejects_non_implications() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p"]), f("p"));
        assert!(matches!(
            detach(&b.finish(), &AxiomSet::ck()),
            Err(ProofTransformError::NotImplication)
        ));
    }

    #[test]
    fn deduction_detach_round_trip() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p", "q -> p"]), f("p"));
        let p = b.finish();
        let there = deduction(&p, &AxiomSet::ck(), &f("q -> p")).unwrap();
        let back = detach(&there, &AxiomSet::ck()).unwrap();
        assert_eq!(
            check_proof(&back, &AxiomSet::ck()).unwrap(),
            p.conclusion().unwrap().clone()
        );
    }

    #[test]
    fn k_rule_on_empty_context_is_necessitation() {
        let out = k_rule(&id_proof(), &AxiomSet::ck()).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::theorem(f("[](p -> p)")));
    }

    #[test]
    fn k_rule_boxes_a_singleton_context() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p"]), f("p"));
        let out = k_rule(&b.finish(), &AxiomSet::ck()).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("[]p")], f("[]p")));
    }

    #[test]
    fn k_rule_distributes_box_over_meets() {
        // {p, q} |- p /\ q by A3 and two element lines.
        let mut b = ProofBuilder::new(AxiomSet::ck());
        let c = ctx(&["p", "q"]);
        let a3 = b.ax(&c, "A3", Substitution::new());
        let ep = b.el(&c, f("p"));
        let eq = b.el(&c, f("q"));
        let step = b.mp(ep, a3);
        let last = b.mp(eq, step);
        let out = k_rule(&b.finish_at(last), &AxiomSet::ck()).unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(
            end,
            Consecution::new([f("[]p"), f("[]q")], f("[](p /\\ q)"))
        );
    }

    #[test]
    fn substitute_identity_proof() {
        let out = substitute_proof(
            &id_proof(),
            &AxiomSet::ck(),
            &subst([("p", f("[]q"))]),
        )
        .unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::theorem(f("[]q -> []q")));
    }

    #[test]
    fn substitute_keeps_el_membership() {
        let mut b = ProofBuilder::new(AxiomSet::ck());
        b.el(&ctx(&["p", "q"]), f("p"));
        let out = substitute_proof(
            &b.finish(),
            &AxiomSet::ck(),
            &subst([("p", f("p /\\ q"))]),
        )
        .unwrap();
        let end = check_proof(&out, &AxiomSet::ck()).unwrap();
        assert_eq!(end, Consecution::new([f("p /\\ q"), f("q")], f("p /\\ q")));
    }

    #[test]
    fn proof_json_round_trip() {
        let ax = AxiomSet::ck().extend(AxiomName::Idb);
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["<>p -> []q"]);
        let idb = b.ax(&c, "Idb", Substitution::new());
        let hyp = b.el(&c, f("<>p -> []q"));
        let last = b.mp(hyp, idb);
        let p = b.finish_at(last);
        let doc = proof_to_doc(&ax, &p);
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let (ax2, p2) = proof_from_json_str(&json).unwrap();
        assert_eq!(ax2, ax);
        assert_eq!(p2, p);
        assert!(check_proof(&p2, &ax2).is_ok());
    }

    #[test]
    fn proof_doc_rejects_unknown_rules() {
        let doc = r#"{"lines":[{"formula":"p","rule":"Cut"}]}"#;
        assert!(matches!(
            proof_from_json_str(doc),
            Err(ProofDocError::UnknownRule { .. })
        ));
    }

    #[test]
    fn axiom_set_display_lists_extras() {
        let mut ax = AxiomSet::ck().extend(AxiomName::Idb).extend(AxiomName::Nd);
        ax.add_user_schema(f("p -> p"));
        assert_eq!(ax.to_string(), "CK+Nd+Idb+S1");
    }

    #[test]
    fn named_formula_constants_are_diamond_free() {
        assert!(wcdb_formula().is_diamond_free());
        assert!(grefe_formula().is_diamond_free());
        assert!(!AxiomName::WCd.formula().is_diamond_free());
    }
}
