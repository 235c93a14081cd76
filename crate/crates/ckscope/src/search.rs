//! Exhaustive frame enumeration, correspondence audits, and bounded
//! countermodel search.
//!
//! Everything here is deterministic: frames are enumerated in a fixed order
//! (preorders by generator subset, then modal relations by row encoding),
//! valuations lazily per frame, and the first countermodel wins. "Exhausted"
//! therefore means "no countermodel up to the stated bound" — never a
//! derivability proof.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::conditions::{check_condition, conditions_for, ConditionName, ConditionsForError, Mode};
use crate::hilbert::{AxiomName, AxiomSet, Proof, ProofBuilder};
use crate::kripke::{
    enumerate_valuations, frame_validates_schema, Frame, Model, Relation, WorldSet,
};
use crate::syntax::{match_schema, Formula, Substitution};

/// Default cap on raw `(preorder candidate, R assignment)` combinations per
/// world count. Covers everything up to 4 worlds.
pub const DEFAULT_FRAME_CAP: u128 = 8_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("{candidates} candidate frames on {n} worlds exceed the cap of {cap}")]
    CapExceeded { n: usize, candidates: u128, cap: u128 },
    #[error(transparent)]
    Conditions(#[from] ConditionsForError),
}

/// Knobs for frame enumeration.
#[derive(Debug, Clone)]
pub struct EnumerationOptions {
    /// Upper bound on raw candidate combinations before filtering.
    pub cap: u128,
    /// Emit one representative per isomorphism class (bomb-fixing world
    /// permutations). Off by default: correctness first, and the audit bounds
    /// are small.
    pub dedup_isomorphic: bool,
}

impl Default for EnumerationOptions {
    fn default() -> EnumerationOptions {
        EnumerationOptions {
            cap: DEFAULT_FRAME_CAP,
            dedup_isomorphic: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Frame enumeration
// ---------------------------------------------------------------------------

/// Every valid frame on `n` worlds satisfying all the given conditions, in a
/// fixed deterministic order. The bomb is always the last world.
///
/// Preorders are generated as reflexive-transitive closures of candidate edge
/// sets (duplicates eliminated by hashing the closed matrix); edges out of the
/// bomb are never proposed, which realises exactly the bomb-maximal preorders.
/// Modal relations range over all rows for non-bomb worlds; the bomb's row is
/// pinned to its self-loop.
pub fn enumerate_frames(
    n: usize,
    filter: &[ConditionName],
    opts: &EnumerationOptions,
) -> Result<Frames, SearchError> {
    assert!(n >= 1, "frames need at least one world");
    let pairs: Vec<(usize, usize)> = (0..n - 1)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let subset_count = 1u128 << pairs.len();
    let rows_per_world = 1u128 << n;
    let r_count = rows_per_world.pow((n - 1) as u32);
    let candidates = subset_count.saturating_mul(r_count);
    if candidates > opts.cap {
        return Err(SearchError::CapExceeded {
            n,
            candidates,
            cap: opts.cap,
        });
    }
    let names: Vec<String> = (0..n - 1)
        .map(|i| format!("w{i}"))
        .chain(["bomb".to_string()])
        .collect();
    Ok(Frames {
        n,
        names,
        filter: filter.to_vec(),
        dedup: opts.dedup_isomorphic,
        pairs,
        subset: 0,
        subset_count: subset_count as u64,
        seen_leq: HashSet::new(),
        current_leq: None,
        r_index: 0,
        r_count: r_count as u64,
        seen_canonical: HashSet::new(),
    })
}

pub struct Frames {
    n: usize,
    names: Vec<String>,
    filter: Vec<ConditionName>,
    dedup: bool,
    pairs: Vec<(usize, usize)>,
    subset: u64,
    subset_count: u64,
    seen_leq: HashSet<Vec<u64>>,
    current_leq: Option<Relation>,
    r_index: u64,
    r_count: u64,
    seen_canonical: HashSet<Vec<u64>>,
}

impl Frames {
    /// Advance to the next unseen closed preorder, if any.
    fn next_leq(&mut self) -> bool {
        while self.subset < self.subset_count {
            let bits = self.subset;
            self.subset += 1;
            let rel = Relation::from_pairs(
                self.n,
                self.pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bits >> k & 1 == 1)
                    .map(|(_, p)| *p),
            )
            .reflexive_transitive_closure();
            let key: Vec<u64> = (0..self.n).map(|w| rel.row(w).bits()).collect();
            if self.seen_leq.insert(key) {
                self.current_leq = Some(rel);
                self.r_index = 0;
                return true;
            }
        }
        false
    }

    fn build(&self, leq: &Relation, r_index: u64) -> Frame {
        let mut r = Relation::empty(self.n);
        let mut rest = r_index;
        let row_space = 1u64 << self.n;
        for w in 0..self.n - 1 {
            r.set_row(w, WorldSet::from_bits(rest % row_space));
            rest /= row_space;
        }
        r.set_row(self.n - 1, WorldSet::singleton(self.n - 1));
        Frame::new(self.names.clone(), self.n - 1, leq.clone(), r, false)
            .expect("enumerated frames are valid by construction")
    }

    /// Smallest matrix encoding over all world permutations fixing the bomb.
    fn canonical_key(&self, fr: &Frame) -> Vec<u64> {
        let n = self.n;
        let mut best: Option<Vec<u64>> = None;
        for perm in permutations(n - 1) {
            let place = |w: usize| if w == n - 1 { n - 1 } else { perm[w] };
            let mut key = vec![0u64; 2 * n];
            for x in 0..n {
                for y in 0..n {
                    if fr.leq(x, y) {
                        key[place(x)] |= 1 << place(y);
                    }
                    if fr.r(x, y) {
                        key[n + place(x)] |= 1 << place(y);
                    }
                }
            }
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        best.expect("at least the identity permutation")
    }
}

impl Iterator for Frames {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        loop {
            if self.current_leq.is_none() && !self.next_leq() {
                return None;
            }
            let leq = self.current_leq.clone().unwrap();
            while self.r_index < self.r_count {
                let fr = self.build(&leq, self.r_index);
                self.r_index += 1;
                if !self.filter.iter().all(|&c| check_condition(&fr, c)) {
                    continue;
                }
                if self.dedup {
                    let key = self.canonical_key(&fr);
                    if !self.seen_canonical.insert(key) {
                        continue;
                    }
                }
                return Some(fr);
            }
            self.current_leq = None;
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for shorter in permutations(k - 1) {
        for slot in 0..k {
            let mut perm = shorter.clone();
            perm.insert(slot, k - 1);
            out.push(perm);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Countermodel search
// ---------------------------------------------------------------------------

/// How candidate frames are matched against the axiom set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Sufficient conditions: a sound but not exhaustive frame class.
    Suff,
    /// Correspondence conditions: exactly the frames validating every axiom.
    Corr,
    /// Brute-force schema validity; the only option for wCD or user schemas.
    Schema,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SearchStats {
    pub frames: u64,
    pub valuations: u64,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    /// A model over a frame passing the axiom filter, and a world in it that
    /// does not force the target.
    Countermodel { model: Model, world: usize },
    /// No countermodel up to the bound. Not a derivability proof.
    Exhausted { max_worlds: usize },
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

fn frame_passes(fr: &Frame, ax: &AxiomSet, schema_mode: bool, conds: &[ConditionName]) -> bool {
    if schema_mode {
        ax.extra_schemas()
            .iter()
            .all(|(_, s)| frame_validates_schema(fr, s))
    } else {
        conds.iter().all(|&c| check_condition(fr, c))
    }
}

/// Search all frames up to `max_worlds` passing the axiom filter for a model
/// and world where `target` fails. First hit wins; the hit is re-verified
/// against the filter and the forcing relation before being returned.
pub fn find_countermodel(
    target: &Formula,
    ax: &AxiomSet,
    max_worlds: usize,
    mode: FilterMode,
    opts: &EnumerationOptions,
) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let conds = match mode {
        FilterMode::Schema => Vec::new(),
        FilterMode::Suff => conditions_for(ax, Mode::Suff)?,
        FilterMode::Corr => conditions_for(ax, Mode::Corr)?,
    };
    let schema_mode = matches!(mode, FilterMode::Schema);
    let names = target.prop_names();
    let props: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut stats = SearchStats::default();
    for n in 1..=max_worlds {
        // The conditions are applied post-enumeration here so that stats count
        // the frames actually examined against the filter.
        for fr in enumerate_frames(n, &[], opts)? {
            stats.frames += 1;
            if !frame_passes(&fr, ax, schema_mode, &conds) {
                continue;
            }
            let everything = fr.worlds();
            for v in enumerate_valuations(&fr, &props) {
                stats.valuations += 1;
                let m = Model::new(fr.clone(), v).expect("enumerated valuations are admissible");
                let forced = m.truth_set(target);
                if forced != everything {
                    let world = everything.minus(forced).min_world().unwrap();
                    assert!(
                        frame_passes(m.frame(), ax, schema_mode, &conds)
                            && !m.forces(world, target),
                        "countermodel failed re-verification"
                    );
                    stats.elapsed_ms = start.elapsed().as_millis();
                    return Ok(SearchResult {
                        outcome: SearchOutcome::Countermodel { model: m, world },
                        stats,
                    });
                }
            }
        }
    }
    stats.elapsed_ms = start.elapsed().as_millis();
    Ok(SearchResult {
        outcome: SearchOutcome::Exhausted { max_worlds },
        stats,
    })
}

// ---------------------------------------------------------------------------
// Correspondence audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditTriple {
    pub suff: bool,
    pub corr: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditViolation {
    pub frame: Frame,
    pub triple: AuditTriple,
    pub reason: String,
}

/// Outcome of sweeping one axiom's conditions against all small frames:
/// bucket counts for every (suff, corr, valid) combination, and the offending
/// frames if the sufficiency or correspondence claims break anywhere.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub axiom: AxiomName,
    pub max_worlds: usize,
    pub pass: bool,
    pub frames: u64,
    pub buckets: Vec<(AuditTriple, u64)>,
    pub violations: Vec<AuditViolation>,
    pub elapsed_ms: u128,
}

impl AuditReport {
    pub fn bucket(&self, suff: bool, corr: bool, valid: bool) -> u64 {
        self.buckets
            .iter()
            .find(|(t, _)| t.suff == suff && t.corr == corr && t.valid == valid)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }
}

fn condition_pair(axiom: AxiomName) -> Result<(ConditionName, ConditionName), ConditionsForError> {
    match axiom {
        AxiomName::Nd => Ok((ConditionName::NdSuff, ConditionName::NdCorr)),
        AxiomName::Cd => Ok((ConditionName::CdSuff, ConditionName::CdCorr)),
        AxiomName::Idb => Ok((ConditionName::IdbSuff, ConditionName::IdbCorr)),
        AxiomName::Ndb => Ok((ConditionName::NdbSuff, ConditionName::NdbCorr)),
        AxiomName::WCd => Err(ConditionsForError::WCd),
    }
}

/// Evaluate one frame against an axiom's sufficient condition, correspondence
/// condition, and actual schema validity.
pub fn audit_frame(fr: &Frame, axiom: AxiomName) -> Result<AuditTriple, ConditionsForError> {
    let (suff, corr) = condition_pair(axiom)?;
    Ok(AuditTriple {
        suff: check_condition(fr, suff),
        corr: check_condition(fr, corr),
        valid: frame_validates_schema(fr, &axiom.formula()),
    })
}

/// Sweep every frame up to `max_worlds` and check that the sufficient
/// condition implies validity and the correspondence condition is exactly
/// validity.
pub fn correspondence_audit(
    axiom: AxiomName,
    max_worlds: usize,
    opts: &EnumerationOptions,
) -> Result<AuditReport, SearchError> {
    let start = Instant::now();
    condition_pair(axiom)?;
    let mut buckets: HashMap<(bool, bool, bool), u64> = HashMap::new();
    let mut violations = Vec::new();
    let mut frames = 0u64;
    for n in 1..=max_worlds {
        for fr in enumerate_frames(n, &[], opts)? {
            frames += 1;
            let t = audit_frame(&fr, axiom).expect("axiom admits conditions");
            *buckets.entry((t.suff, t.corr, t.valid)).or_default() += 1;
            if t.suff && !t.valid {
                violations.push(AuditViolation {
                    frame: fr.clone(),
                    triple: t,
                    reason: "sufficient condition holds but the schema fails".to_string(),
                });
            }
            if t.corr != t.valid {
                violations.push(AuditViolation {
                    frame: fr,
                    triple: t,
                    reason: "correspondence condition disagrees with schema validity".to_string(),
                });
            }
        }
    }
    let mut buckets: Vec<(AuditTriple, u64)> = buckets
        .into_iter()
        .map(|((suff, corr, valid), count)| (AuditTriple { suff, corr, valid }, count))
        .collect();
    buckets.sort_by_key(|(t, _)| (t.suff, t.corr, t.valid));
    Ok(AuditReport {
        axiom,
        max_worlds,
        pass: violations.is_empty(),
        frames,
        buckets,
        violations,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

// ---------------------------------------------------------------------------
// Bounded proof search
// ---------------------------------------------------------------------------

/// Backward-chaining search for a proof of `⊢ target`, bounded by rule depth.
///
/// The move set is modest by design — hypothesis, schema instance,
/// introduction rules for the right-hand connective, necessitation, and modus
/// ponens whose major premise is a (possibly curried) schema instance with
/// leftover metavariables drawn from the goal's and context's subformulas. A
/// `None` is only "not found at this depth", never a refutation; the companion
/// countermodel search provides the negative evidence.
pub fn bounded_proof_search(target: &Formula, ax: &AxiomSet, depth: usize) -> Option<Proof> {
    let mut schemas: Vec<(String, Formula)> = crate::hilbert::BASE_SCHEMA_NAMES
        .iter()
        .map(|&n| (n.to_string(), crate::hilbert::base_schema(n).unwrap()))
        .collect();
    schemas.extend(ax.extra_schemas());
    let mut searcher = Searcher {
        ax: ax.clone(),
        schemas,
        memo: HashMap::new(),
    };
    searcher.solve(&BTreeSet::new(), target, depth)
}

struct Searcher {
    ax: AxiomSet,
    schemas: Vec<(String, Formula)>,
    /// `(context, goal)` to the deepest budget tried and the outcome there.
    memo: HashMap<(BTreeSet<Formula>, Formula), (usize, Option<Proof>)>,
}

impl Searcher {
    fn solve(&mut self, ctx: &BTreeSet<Formula>, goal: &Formula, budget: usize) -> Option<Proof> {
        if budget == 0 {
            return None;
        }
        let key = (ctx.clone(), goal.clone());
        if let Some((tried, outcome)) = self.memo.get(&key) {
            if outcome.is_some() || *tried >= budget {
                return outcome.clone();
            }
        }
        let result = self.attempt(ctx, goal, budget);
        self.memo.insert(key, (budget, result.clone()));
        result
    }

    fn attempt(&mut self, ctx: &BTreeSet<Formula>, goal: &Formula, budget: usize) -> Option<Proof> {
        // Hypothesis.
        if ctx.contains(goal) {
            let mut b = ProofBuilder::new(self.ax.clone());
            let i = b.el(ctx, goal.clone());
            return Some(b.finish_at(i));
        }
        // Schema instance.
        for (name, schema) in self.schemas.clone() {
            if let Some(sigma) = match_schema(&schema, goal) {
                let mut b = ProofBuilder::new(self.ax.clone());
                let i = b.ax(ctx, &name, sigma);
                return Some(b.finish_at(i));
            }
        }
        // Introduction on the goal's shape.
        match goal {
            Formula::Imp(a, c) => {
                if ctx.contains(a) {
                    if let Some(sub) = self.solve(ctx, c, budget - 1) {
                        return Some(lift_implication(&self.ax, &sub, (**a).clone()));
                    }
                } else {
                    let mut wider = ctx.clone();
                    wider.insert((**a).clone());
                    if let Some(sub) = self.solve(&wider, c, budget - 1) {
                        let p = crate::hilbert::deduction(&sub, &self.ax, a)
                            .expect("pivot was added to the context");
                        return Some(p);
                    }
                }
            }
            Formula::And(l, r) => {
                if let (Some(pl), Some(pr)) = (
                    self.solve(ctx, l, budget - 1),
                    self.solve(ctx, r, budget - 1),
                ) {
                    let mut b = ProofBuilder::new(self.ax.clone());
                    let il = b.import(&pl);
                    let ir = b.import(&pr);
                    let a3 = b.ax(
                        ctx,
                        "A3",
                        crate::hilbert::subst([("p", (**l).clone()), ("q", (**r).clone())]),
                    );
                    let half = b.mp(il, a3);
                    let i = b.mp(ir, half);
                    return Some(b.finish_at(i));
                }
            }
            Formula::Or(l, r) => {
                for (sub_goal, schema, other) in
                    [(l, "A6", (**r).clone()), (r, "A7", (**l).clone())]
                {
                    if let Some(sub) = self.solve(ctx, sub_goal, budget - 1) {
                        let mut b = ProofBuilder::new(self.ax.clone());
                        let i = b.import(&sub);
                        let binding = match schema {
                            "A6" => crate::hilbert::subst([
                                ("p", (**l).clone()),
                                ("q", other),
                            ]),
                            _ => crate::hilbert::subst([
                                ("p", other),
                                ("q", (**r).clone()),
                            ]),
                        };
                        let inj = b.ax(ctx, schema, binding);
                        let i = b.mp(i, inj);
                        return Some(b.finish_at(i));
                    }
                }
            }
            Formula::Box(a) => {
                if let Some(sub) = self.solve(&BTreeSet::new(), a, budget - 1) {
                    let mut b = ProofBuilder::new(self.ax.clone());
                    let premise = b.import(&sub);
                    let i = b.nec(ctx, premise);
                    return Some(b.finish_at(i));
                }
            }
            _ => {}
        }
        // Modus ponens with a curried schema instance as the major premise.
        let pool = self.binding_pool(ctx, goal);
        for (name, schema) in self.schemas.clone() {
            let mut antecedents: Vec<Formula> = Vec::new();
            let mut pattern = schema.clone();
            while let Formula::Imp(a, c) = pattern {
                antecedents.push(*a);
                pattern = *c;
                let Some(partial) = match_schema(&pattern, goal) else {
                    continue;
                };
                let leftover: Vec<String> = schema
                    .prop_names()
                    .into_iter()
                    .filter(|p| !partial.contains_key(p))
                    .collect();
                if leftover.len() > 1 {
                    continue; // keep the branching factor sane
                }
                let assignments: Vec<Substitution> = if leftover.is_empty() {
                    vec![partial.clone()]
                } else {
                    pool.iter()
                        .map(|f| {
                            let mut s = partial.clone();
                            s.insert(leftover[0].clone(), f.clone());
                            s
                        })
                        .collect()
                };
                'sigma: for sigma in assignments {
                    let mut subs = Vec::new();
                    for ante in &antecedents {
                        match self.solve(ctx, &ante.substitute(&sigma), budget - 1) {
                            Some(p) => subs.push(p),
                            None => continue 'sigma,
                        }
                    }
                    let mut b = ProofBuilder::new(self.ax.clone());
                    let mut major = b.ax(ctx, &name, sigma);
                    for sub in &subs {
                        let minor = b.import(sub);
                        major = b.mp(minor, major);
                    }
                    return Some(b.finish_at(major));
                }
            }
        }
        None
    }

    fn binding_pool(&self, ctx: &BTreeSet<Formula>, goal: &Formula) -> Vec<Formula> {
        let mut pool: BTreeSet<Formula> = goal.subformulas().cloned().collect();
        for g in ctx {
            pool.extend(g.subformulas().cloned());
        }
        pool.insert(Formula::Bot);
        pool.into_iter().collect()
    }
}

/// From `Γ ⊢ c` (with `a` in `Γ`) produce `Γ ⊢ a -> c` via `A1`.
fn lift_implication(ax: &AxiomSet, sub: &Proof, a: Formula) -> Proof {
    let mut b = ProofBuilder::new(ax.clone());
    let i = b.import(sub);
    let end = b.line(i).consecution.clone();
    let ctx = end.context_set().clone();
    let a1 = b.ax(
        &ctx,
        "A1",
        crate::hilbert::subst([("p", end.conclusion().clone()), ("q", a)]),
    );
    let i = b.mp(i, a1);
    b.finish_at(i)
}
