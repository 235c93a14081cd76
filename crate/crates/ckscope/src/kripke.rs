//! Finite birelational frames and models with an exploding world, the forcing
//! relation, and validity checking.
//!
//! A frame carries a preorder `<=` (intuitionistic accessibility), a modal relation
//! `R`, and a distinguished exploding world — called the *bomb* throughout — that is
//! `<=`-maximal (though not necessarily a top element) and whose only `R`-successor
//! is itself. The bomb forces every formula, including `bot`; valuations assign to
//! each proposition an `<=`-upset containing the bomb.
//!
//! Truth sets are computed bottom-up as bit sets over worlds, which turns the
//! alternating quantifiers of the modal clauses into word operations and keeps
//! exhaustive audits over thousands of frames cheap.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::hilbert::Consecution;
use crate::syntax::Formula;

/// Hard limit on world count, so that a set of worlds fits in one machine word.
pub const MAX_WORLDS: usize = 64;

// ---------------------------------------------------------------------------
// World sets and relations
// ---------------------------------------------------------------------------

/// A set of worlds, stored as a bit mask over world indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WorldSet(u64);

impl WorldSet {
    pub const EMPTY: WorldSet = WorldSet(0);

    pub fn singleton(w: usize) -> WorldSet {
        WorldSet(1 << w)
    }

    pub fn full(n: usize) -> WorldSet {
        if n >= 64 {
            WorldSet(u64::MAX)
        } else {
            WorldSet((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> WorldSet {
        WorldSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, w: usize) -> bool {
        self.0 >> w & 1 == 1
    }

    pub fn insert(&mut self, w: usize) {
        self.0 |= 1 << w;
    }

    pub fn union(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 | other.0)
    }

    pub fn intersect(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & other.0)
    }

    pub fn minus(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & !other.0)
    }

    pub fn complement_within(self, n: usize) -> WorldSet {
        WorldSet(!self.0).intersect(WorldSet::full(n))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: WorldSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Worlds in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let w = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w)
            }
        })
    }

    pub fn min_world(self) -> Option<usize> {
        self.iter().next()
    }
}

/// A binary relation on `{0, .., n-1}`, stored as one successor bit row per world.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: usize,
    rows: Vec<WorldSet>,
}

impl Relation {
    pub fn empty(n: usize) -> Relation {
        Relation {
            n,
            rows: vec![WorldSet::EMPTY; n],
        }
    }

    pub fn identity(n: usize) -> Relation {
        let mut rel = Relation::empty(n);
        for w in 0..n {
            rel.rows[w].insert(w);
        }
        rel
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Relation {
        let mut rel = Relation::empty(n);
        for (x, y) in pairs {
            rel.set(x, y);
        }
        rel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    /// The successor set `{y | x ~ y}`.
    pub fn row(&self, x: usize) -> WorldSet {
        self.rows[x]
    }

    pub fn set_row(&mut self, x: usize, row: WorldSet) {
        self.rows[x] = row;
    }

    /// The predecessor set `{x | x ~ y}`, by column scan.
    pub fn column(&self, y: usize) -> WorldSet {
        let mut col = WorldSet::EMPTY;
        for x in 0..self.n {
            if self.rows[x].contains(y) {
                col.insert(x);
            }
        }
        col
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |x| self.rows[x].iter().map(move |y| (x, y)))
    }

    pub fn union(&self, other: &Relation) -> Relation {
        debug_assert_eq!(self.n, other.n);
        Relation {
            n: self.n,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.union(*b))
                .collect(),
        }
    }

    /// Warshall-style closure over bit rows.
    pub fn reflexive_transitive_closure(&self) -> Relation {
        let mut rows = self.rows.clone();
        for (w, row) in rows.iter_mut().enumerate() {
            row.insert(w);
        }
        for via in 0..self.n {
            let via_row = rows[via];
            for x in 0..self.n {
                if rows[x].contains(via) {
                    rows[x] = rows[x].union(via_row);
                }
            }
        }
        Relation { n: self.n, rows }
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|w| self.rows[w].contains(w))
    }

    /// First triple `x ~ y ~ z` with `x !~ z`, if any.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        for x in 0..self.n {
            for y in self.rows[x].iter() {
                let escaped = self.rows[y].minus(self.rows[x]);
                if let Some(z) = escaped.min_world() {
                    return Some((x, y, z));
                }
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("a frame needs at least one world")]
    Empty,
    #[error("frame has {n} worlds; at most {MAX_WORLDS} are supported")]
    TooLarge { n: usize },
    #[error("bomb index {bomb} out of range for {n} worlds")]
    BombOutOfRange { bomb: usize, n: usize },
    #[error("world name `{name}` appears twice")]
    DuplicateName { name: String },
    #[error("relation size does not match the world count")]
    RelationSize,
    #[error("`<=` is not reflexive: missing {world} <= {world}")]
    NotReflexive { world: String },
    #[error("`<=` is not transitive: {x} <= {y} <= {z} but not {x} <= {z}")]
    NotTransitive { x: String, y: String, z: String },
    #[error("bomb not maximal: bomb <= {above}")]
    BombNotMaximal { above: String },
    #[error("the R-successors of bomb must be exactly bomb itself")]
    BombRow,
}

/// A finite frame `(X, bomb, <=, R)`: `<=` a preorder, the bomb `<=`-maximal, and
/// `bomb R x` exactly when `x` is the bomb.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    names: Vec<String>,
    bomb: usize,
    leq: Relation,
    r: Relation,
}

impl Frame {
    /// Validate a raw frame candidate. With `auto_close`, `leq` is replaced by its
    /// reflexive-transitive closure before the checks run.
    pub fn new(
        names: Vec<String>,
        bomb: usize,
        leq: Relation,
        r: Relation,
        auto_close: bool,
    ) -> Result<Frame, FrameError> {
        let n = names.len();
        if n == 0 {
            return Err(FrameError::Empty);
        }
        if n > MAX_WORLDS {
            return Err(FrameError::TooLarge { n });
        }
        if bomb >= n {
            return Err(FrameError::BombOutOfRange { bomb, n });
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(FrameError::DuplicateName { name: name.clone() });
            }
        }
        if leq.n() != n || r.n() != n {
            return Err(FrameError::RelationSize);
        }
        let leq = if auto_close {
            leq.reflexive_transitive_closure()
        } else {
            leq
        };
        if !leq.is_reflexive() {
            let w = (0..n).find(|&w| !leq.contains(w, w)).unwrap();
            return Err(FrameError::NotReflexive {
                world: names[w].clone(),
            });
        }
        if let Some((x, y, z)) = leq.transitivity_violation() {
            return Err(FrameError::NotTransitive {
                x: names[x].clone(),
                y: names[y].clone(),
                z: names[z].clone(),
            });
        }
        if let Some(above) = leq.row(bomb).minus(WorldSet::singleton(bomb)).min_world() {
            return Err(FrameError::BombNotMaximal {
                above: names[above].clone(),
            });
        }
        if r.row(bomb) != WorldSet::singleton(bomb) {
            return Err(FrameError::BombRow);
        }
        Ok(Frame { names, bomb, leq, r })
    }

    /// The one-world frame consisting solely of the bomb.
    pub fn point() -> Frame {
        Frame::new(
            vec!["bomb".to_string()],
            0,
            Relation::identity(1),
            Relation::identity(1),
            false,
        )
        .expect("the point frame is valid")
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn bomb(&self) -> usize {
        self.bomb
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq.contains(x, y)
    }

    pub fn r(&self, x: usize, y: usize) -> bool {
        self.r.contains(x, y)
    }

    /// The intuitionistic cone `{y | x <= y}` (includes `x`).
    pub fn up(&self, x: usize) -> WorldSet {
        self.leq.row(x)
    }

    /// The modal successor set `R[x]`.
    pub fn r_row(&self, x: usize) -> WorldSet {
        self.r.row(x)
    }

    pub fn leq_relation(&self) -> &Relation {
        &self.leq
    }

    pub fn r_relation(&self) -> &Relation {
        &self.r
    }

    pub fn worlds(&self) -> WorldSet {
        WorldSet::full(self.n())
    }

    /// `{x | up(x) ⊆ s}`: the worlds whose whole intuitionistic cone lies in `s`.
    pub fn box_leq(&self, s: WorldSet) -> WorldSet {
        let mut out = WorldSet::EMPTY;
        for x in 0..self.n() {
            if self.leq.row(x).is_subset_of(s) {
                out.insert(x);
            }
        }
        out
    }

    /// Is `s` upward closed under `<=`?
    pub fn is_upset(&self, s: WorldSet) -> bool {
        s.iter().all(|x| self.leq.row(x).is_subset_of(s))
    }

    /// All `<=`-upsets containing the bomb, in ascending bit-mask order.
    ///
    /// Exponential in the world count; intended for the small frames of audits.
    pub fn upsets_with_bomb(&self) -> Vec<WorldSet> {
        let n = self.n();
        let mut out = Vec::new();
        for bits in 0..(1u64 << n) {
            let s = WorldSet::from_bits(bits);
            if s.contains(self.bomb) && self.is_upset(s) {
                out.push(s);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Valuations and models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("valuation of `{prop}` does not contain the bomb")]
    MissingBomb { prop: String },
    #[error("valuation of `{prop}` is not an upset: it holds {lower} but not {upper}")]
    NotUpset {
        prop: String,
        lower: String,
        upper: String,
    },
}

/// Assignment of world sets to proposition names. Propositions absent from the
/// map default to the minimal admissible upset `{bomb}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Valuation {
    map: BTreeMap<String, WorldSet>,
}

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn from_map(map: BTreeMap<String, WorldSet>) -> Valuation {
        Valuation { map }
    }

    pub fn set(&mut self, prop: impl Into<String>, worlds: WorldSet) {
        self.map.insert(prop.into(), worlds);
    }

    pub fn get(&self, prop: &str) -> Option<WorldSet> {
        self.map.get(prop).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, WorldSet)> {
        self.map.iter().map(|(p, s)| (p.as_str(), *s))
    }
}

/// A frame together with a valuation whose values are upsets containing the bomb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    frame: Frame,
    valuation: Valuation,
}

impl Model {
    pub fn new(frame: Frame, valuation: Valuation) -> Result<Model, ModelError> {
        for (prop, s) in valuation.iter() {
            if !s.contains(frame.bomb()) {
                return Err(ModelError::MissingBomb { prop: prop.into() });
            }
            for x in s.iter() {
                if let Some(y) = frame.up(x).minus(s).min_world() {
                    return Err(ModelError::NotUpset {
                        prop: prop.into(),
                        lower: frame.name(x).into(),
                        upper: frame.name(y).into(),
                    });
                }
            }
        }
        Ok(Model { frame, valuation })
    }

    /// A model whose every proposition takes the default value `{bomb}`.
    pub fn bare(frame: Frame) -> Model {
        Model {
            frame,
            valuation: Valuation::new(),
        }
    }

    pub(crate) fn from_parts_unchecked(frame: Frame, valuation: Valuation) -> Model {
        Model { frame, valuation }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    fn prop_set(&self, prop: &str) -> WorldSet {
        self.valuation
            .get(prop)
            .unwrap_or_else(|| WorldSet::singleton(self.frame.bomb()))
    }

    /// The set of worlds forcing `f`, computed bottom-up.
    pub fn truth_set(&self, f: &Formula) -> WorldSet {
        let fr = &self.frame;
        match f {
            Formula::Bot => WorldSet::singleton(fr.bomb()),
            Formula::Prop(p) => self.prop_set(p),
            Formula::And(l, r) => self.truth_set(l).intersect(self.truth_set(r)),
            Formula::Or(l, r) => self.truth_set(l).union(self.truth_set(r)),
            Formula::Imp(l, r) => {
                let (a, b) = (self.truth_set(l), self.truth_set(r));
                fr.box_leq(a.complement_within(fr.n()).union(b))
            }
            Formula::Box(b) => {
                let a = self.truth_set(b);
                let mut direct = WorldSet::EMPTY;
                for y in 0..fr.n() {
                    if fr.r_row(y).is_subset_of(a) {
                        direct.insert(y);
                    }
                }
                fr.box_leq(direct)
            }
            Formula::Dia(b) => {
                let a = self.truth_set(b);
                let mut direct = WorldSet::EMPTY;
                for y in 0..fr.n() {
                    if !fr.r_row(y).intersect(a).is_empty() {
                        direct.insert(y);
                    }
                }
                fr.box_leq(direct)
            }
        }
    }

    pub fn forces(&self, w: usize, f: &Formula) -> bool {
        self.truth_set(f).contains(w)
    }

    /// Does every world forcing the whole context force the conclusion?
    pub fn validates(&self, c: &Consecution) -> bool {
        let mut ctx = self.frame.worlds();
        for g in c.context() {
            ctx = ctx.intersect(self.truth_set(g));
        }
        ctx.is_subset_of(self.truth_set(c.conclusion()))
    }
}

// ---------------------------------------------------------------------------
// Valuation enumeration and schema validity
// ---------------------------------------------------------------------------

/// Every valuation of the given propositions by upsets containing the bomb,
/// deterministically: the product of the frame's upset list, last proposition
/// cycling fastest.
pub fn enumerate_valuations(frame: &Frame, props: &[&str]) -> Valuations {
    Valuations {
        upsets: frame.upsets_with_bomb(),
        props: props.iter().map(|p| p.to_string()).collect(),
        odometer: vec![0; props.len()],
        done: false,
    }
}

pub struct Valuations {
    upsets: Vec<WorldSet>,
    props: Vec<String>,
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for Valuations {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        let mut v = Valuation::new();
        for (p, &i) in self.props.iter().zip(&self.odometer) {
            v.set(p.clone(), self.upsets[i]);
        }
        // Advance the odometer, last position fastest.
        let mut pos = self.props.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.upsets.len() {
                break;
            }
            self.odometer[pos] = 0;
        }
        Some(v)
    }
}

/// Does the frame validate the schema, i.e. every substitution instance under
/// every valuation?
///
/// It suffices to check the schema formula itself under all valuations of its own
/// propositions: given an instance `f[p := g]` and a valuation `V`, the truth set
/// of `g` under `V` is an upset containing the bomb (by persistence and the bomb
/// clauses), so `V'(p) := truth-set(g)` is an admissible valuation — and under
/// `V'` the schema takes the same truth set as the instance under `V`.
pub fn frame_validates_schema(frame: &Frame, schema: &Formula) -> bool {
    let names = schema.prop_names();
    let props: Vec<&str> = names.iter().map(String::as_str).collect();
    let all = frame.worlds();
    for v in enumerate_valuations(frame, &props) {
        let m = Model::from_parts_unchecked(frame.clone(), v);
        if m.truth_set(schema) != all {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Joint truth-value states
// ---------------------------------------------------------------------------

/// The reachable joint truth-set vectors over several models, with a witness
/// formula (of minimal depth, first in enumeration order) for each.
///
/// Two formulas with the same truth set in every listed model stay
/// indistinguishable under every connective, so closing the atom states under the
/// constructors level by level visits exactly the truth-set vectors realised by
/// formulas of depth `<= max_depth` over `props` — no formula needs to be
/// enumerated twice. A predicate that only depends on truth sets (persistence,
/// preservation along a world map, "the bomb forces everything") therefore holds
/// for all such formulas iff it holds for every state returned here.
pub fn joint_truth_states(
    models: &[&Model],
    props: &[&str],
    max_depth: usize,
    diamond_free: bool,
) -> Vec<(Vec<WorldSet>, Formula)> {
    let mut out: Vec<(Vec<WorldSet>, Formula)> = Vec::new();
    let mut seen: HashMap<Vec<WorldSet>, usize> = HashMap::new();

    let add = |out: &mut Vec<(Vec<WorldSet>, Formula)>,
                   seen: &mut HashMap<Vec<WorldSet>, usize>,
                   state: Vec<WorldSet>,
                   witness: &dyn Fn() -> Formula| {
        if !seen.contains_key(&state) {
            seen.insert(state.clone(), out.len());
            out.push((state, witness()));
        }
    };

    let bot_state: Vec<WorldSet> = models
        .iter()
        .map(|m| WorldSet::singleton(m.frame().bomb()))
        .collect();
    add(&mut out, &mut seen, bot_state, &|| Formula::Bot);
    for p in props {
        let state: Vec<WorldSet> = models.iter().map(|m| m.prop_set(p)).collect();
        add(&mut out, &mut seen, state, &|| Formula::prop(*p));
    }

    let imp = |ms: &[&Model], a: &[WorldSet], b: &[WorldSet]| -> Vec<WorldSet> {
        ms.iter()
            .enumerate()
            .map(|(i, m)| {
                let fr = m.frame();
                fr.box_leq(a[i].complement_within(fr.n()).union(b[i]))
            })
            .collect()
    };
    let boxed = |ms: &[&Model], a: &[WorldSet]| -> Vec<WorldSet> {
        ms.iter()
            .enumerate()
            .map(|(i, m)| {
                let fr = m.frame();
                let mut direct = WorldSet::EMPTY;
                for y in 0..fr.n() {
                    if fr.r_row(y).is_subset_of(a[i]) {
                        direct.insert(y);
                    }
                }
                fr.box_leq(direct)
            })
            .collect()
    };
    let dia = |ms: &[&Model], a: &[WorldSet]| -> Vec<WorldSet> {
        ms.iter()
            .enumerate()
            .map(|(i, m)| {
                let fr = m.frame();
                let mut direct = WorldSet::EMPTY;
                for y in 0..fr.n() {
                    if !fr.r_row(y).intersect(a[i]).is_empty() {
                        direct.insert(y);
                    }
                }
                fr.box_leq(direct)
            })
            .collect()
    };

    let mut prev_start = 0;
    for _ in 0..max_depth {
        let prev_end = out.len();
        if prev_start == prev_end {
            break; // fixpoint: the previous level added no new states
        }
        for i in prev_start..prev_end {
            let (state, witness) = out[i].clone();
            let s = boxed(models, &state);
            add(&mut out, &mut seen, s, &|| Formula::boxed(witness.clone()));
            if !diamond_free {
                let s = dia(models, &state);
                add(&mut out, &mut seen, s, &|| Formula::dia(witness.clone()));
            }
        }
        for li in 0..prev_end {
            for ri in 0..prev_end {
                if li < prev_start && ri < prev_start {
                    continue;
                }
                let (ls, lw) = out[li].clone();
                let (rs, rw) = out[ri].clone();
                let and_state: Vec<WorldSet> = ls
                    .iter()
                    .zip(&rs)
                    .map(|(a, b)| a.intersect(*b))
                    .collect();
                add(&mut out, &mut seen, and_state, &|| {
                    Formula::and(lw.clone(), rw.clone())
                });
                let or_state: Vec<WorldSet> =
                    ls.iter().zip(&rs).map(|(a, b)| a.union(*b)).collect();
                add(&mut out, &mut seen, or_state, &|| {
                    Formula::or(lw.clone(), rw.clone())
                });
                let imp_state = imp(models, &ls, &rs);
                add(&mut out, &mut seen, imp_state, &|| {
                    Formula::imp(lw.clone(), rw.clone())
                });
            }
        }
        prev_start = prev_end;
    }
    out
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown world `{name}` in {field}")]
    UnknownWorld { name: String, field: &'static str },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// On-disk frame document. `leq` and `r` list pairs of world names; with
/// `auto_close_leq` the listed `leq` pairs are generators whose
/// reflexive-transitive closure is taken, otherwise they must already form a
/// preorder. `r` is always taken literally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub worlds: Vec<String>,
    pub bomb: String,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
    #[serde(default)]
    pub r: Vec<(String, String)>,
    #[serde(default)]
    pub auto_close_leq: bool,
}

/// On-disk model document: a frame plus a valuation listing, per proposition,
/// the world names where it holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(flatten)]
    pub frame: FrameJson,
    /// Missing valuations default to empty, so a bare frame document is also a
    /// valid model document.
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

fn resolve(
    names: &[String],
    name: &str,
    field: &'static str,
) -> Result<usize, LoadError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| LoadError::UnknownWorld {
            name: name.to_string(),
            field,
        })
}

impl Frame {
    pub fn from_doc(doc: &FrameJson) -> Result<Frame, LoadError> {
        let n = doc.worlds.len();
        let bomb = resolve(&doc.worlds, &doc.bomb, "bomb")?;
        let mut leq = Relation::empty(n.max(1));
        for (x, y) in &doc.leq {
            leq.set(
                resolve(&doc.worlds, x, "leq")?,
                resolve(&doc.worlds, y, "leq")?,
            );
        }
        let mut r = Relation::empty(n.max(1));
        for (x, y) in &doc.r {
            r.set(resolve(&doc.worlds, x, "r")?, resolve(&doc.worlds, y, "r")?);
        }
        if n == 0 {
            return Err(FrameError::Empty.into());
        }
        Ok(Frame::new(doc.worlds.clone(), bomb, leq, r, doc.auto_close_leq)?)
    }

    /// Explicit document: every pair listed, no closure on reload.
    pub fn to_doc(&self) -> FrameJson {
        FrameJson {
            worlds: self.names.clone(),
            bomb: self.names[self.bomb].clone(),
            leq: self
                .leq
                .pairs()
                .map(|(x, y)| (self.names[x].clone(), self.names[y].clone()))
                .collect(),
            r: self
                .r
                .pairs()
                .map(|(x, y)| (self.names[x].clone(), self.names[y].clone()))
                .collect(),
            auto_close_leq: false,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Frame, LoadError> {
        Frame::from_doc(&serde_json::from_str(s)?)
    }
}

impl Model {
    pub fn from_doc(doc: &ModelJson) -> Result<Model, LoadError> {
        let frame = Frame::from_doc(&doc.frame)?;
        let mut v = Valuation::new();
        for (prop, worlds) in &doc.valuation {
            let mut s = WorldSet::EMPTY;
            for w in worlds {
                s.insert(resolve(frame.names(), w, "valuation")?);
            }
            v.set(prop.clone(), s);
        }
        Ok(Model::new(frame, v)?)
    }

    pub fn to_doc(&self) -> ModelJson {
        ModelJson {
            frame: self.frame.to_doc(),
            valuation: self
                .valuation
                .iter()
                .map(|(p, s)| {
                    (
                        p.to_string(),
                        s.iter().map(|w| self.frame.names[w].clone()).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Model, LoadError> {
        Model::from_doc(&serde_json::from_str(s)?)
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = FrameJson::deserialize(deserializer)?;
        Frame::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = ModelJson::deserialize(deserializer)?;
        Model::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leq: Vec<String> = self
            .leq
            .pairs()
            .filter(|(x, y)| x != y)
            .map(|(x, y)| format!("{}<={}", self.names[x], self.names[y]))
            .collect();
        let r: Vec<String> = self
            .r
            .pairs()
            .map(|(x, y)| format!("{}R{}", self.names[x], self.names[y]))
            .collect();
        write!(
            f,
            "frame[{}; bomb={}; {}; {}]",
            self.names.join(","),
            self.names[self.bomb],
            leq.join(" "),
            r.join(" ")
        )
    }
}
