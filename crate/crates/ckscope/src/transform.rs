//! Frame surgeries and their preservation evidence.
//!
//! Two operations rebuild a model so that extra frame conditions come to hold
//! while diamond-free truth stays put: [`bomb_saturate`] wires every world to
//! the bomb (intuitionistically and modally), and [`plus_duplicate`] adds for
//! each non-bomb world an order-equivalent copy that cannot modally see
//! anything. [`preservation_check`] then confirms, exhaustively over truth
//! profiles, that no diamond-free formula up to a depth bound changed its
//! value anywhere.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::conditions::{check_condition, ConditionName};
use crate::kripke::{joint_truth_states, Frame, Model, Relation, Valuation};
use crate::syntax::Formula;

/// The available surgeries, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformOp {
    BombSaturate,
    PlusDuplicate,
}

impl TransformOp {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformOp::BombSaturate => "bomb-saturate",
            TransformOp::PlusDuplicate => "plus-duplicate",
        }
    }

    /// The frame conditions each surgery is meant to establish.
    pub fn target_conditions(self) -> [ConditionName; 2] {
        match self {
            TransformOp::BombSaturate => [ConditionName::CdStrong, ConditionName::IdbCorr],
            TransformOp::PlusDuplicate => [ConditionName::NdCorr, ConditionName::CdCorr],
        }
    }
}

impl fmt::Display for TransformOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl serde::Serialize for TransformOp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown transformation `{0}` (expected bomb-saturate or plus-duplicate)")]
pub struct UnknownTransform(pub String);

impl FromStr for TransformOp {
    type Err = UnknownTransform;

    fn from_str(s: &str) -> Result<TransformOp, UnknownTransform> {
        match s {
            "bomb-saturate" => Ok(TransformOp::BombSaturate),
            "plus-duplicate" => Ok(TransformOp::PlusDuplicate),
            other => Err(UnknownTransform(other.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// The surgeries
// ---------------------------------------------------------------------------

/// Make the bomb a top element of both orders: `⪯ = ≤ ∪ (X×{⊛})` and
/// `R' = R ∪ (X×{⊛})`. World indices are unchanged.
pub fn bomb_saturate(fr: &Frame) -> Frame {
    let bomb = fr.bomb();
    let mut leq = fr.leq_relation().clone();
    let mut r = fr.r_relation().clone();
    for x in 0..fr.n() {
        leq.set(x, bomb);
        r.set(x, bomb);
    }
    Frame::new(fr.names().to_vec(), bomb, leq, r, false)
        .expect("saturating towards the bomb preserves frame validity")
}

/// [`bomb_saturate`] lifted to models; the valuation is reused verbatim
/// (truth sets stay upsets because only edges into the bomb are added).
pub fn bomb_saturate_model(m: &Model) -> Model {
    Model::new(bomb_saturate(m.frame()), m.valuation().clone())
        .expect("valuations survive bomb saturation")
}

/// Add, for every non-bomb world `x`, a copy `x+` that is order-equivalent to
/// `x` (`x ⪯ x+ ⪯ x`) but has an empty modal row, and extend the valuation so
/// copies agree with their originals. Original worlds keep their indices;
/// copies are appended in original order, named with a `+` suffix.
pub fn plus_duplicate(m: &Model) -> Model {
    let fr = m.frame();
    let n = fr.n();
    let bomb = fr.bomb();
    let mut names = fr.names().to_vec();
    let mut copy_at: Vec<Option<usize>> = vec![None; n];
    for x in 0..n {
        if x != bomb {
            copy_at[x] = Some(names.len());
            names.push(format!("{}+", fr.name(x)));
        }
    }
    let total = names.len();

    // The generated order {(x,y),(x,y+),(x+,y),(x+,y+) | x ≤ y} is already
    // reflexive and transitive because ≤ is and copies are order-clones.
    let mut leq = Relation::empty(total);
    for x in 0..n {
        for y in 0..n {
            if !fr.leq(x, y) {
                continue;
            }
            leq.set(x, y);
            if let Some(yc) = copy_at[y] {
                leq.set(x, yc);
            }
            if let Some(xc) = copy_at[x] {
                leq.set(xc, y);
                if let Some(yc) = copy_at[y] {
                    leq.set(xc, yc);
                }
            }
        }
    }

    let mut r = Relation::empty(total);
    for (x, y) in fr.r_relation().pairs() {
        r.set(x, y);
    }

    let mut valuation = Valuation::new();
    for (p, worlds) in m.valuation().iter() {
        let mut extended = worlds;
        for x in worlds.iter() {
            if let Some(xc) = copy_at[x] {
                extended.insert(xc);
            }
        }
        valuation.set(p, extended);
    }

    let frame = Frame::new(names, bomb, leq, r, false)
        .expect("duplicating worlds preserves frame validity");
    Model::new(frame, valuation).expect("copied valuations stay admissible")
}

/// Run a surgery on a model, returning the result together with the world map
/// sending each input world to its counterpart. Both surgeries keep original
/// indices, so the map is the identity embedding.
pub fn apply(m: &Model, op: TransformOp) -> (Model, Vec<usize>) {
    let out = match op {
        TransformOp::BombSaturate => bomb_saturate_model(m),
        TransformOp::PlusDuplicate => plus_duplicate(m),
    };
    let map = (0..m.frame().n()).collect();
    (out, map)
}

// ---------------------------------------------------------------------------
// Preservation
// ---------------------------------------------------------------------------

/// Verdict of a preservation check. `Pass` reports how many distinct joint
/// truth profiles were examined; `Fail` carries the first diamond-free
/// formula whose truth moved, with the input-model world where it did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservationOutcome {
    Pass { profiles: u64 },
    Fail { world: usize, formula: Formula },
}

impl PreservationOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, PreservationOutcome::Pass { .. })
    }
}

/// Check that every diamond-free formula of depth `<= max_depth` over `props`
/// has the same truth value at each before-world `x` and its image
/// `world_map[x]`.
///
/// This is exhaustive, not sampled: formulas with equal truth sets in both
/// models at once are closed under the connectives, so it suffices to examine
/// each reachable joint truth profile, and every profile carries a
/// minimal-depth witness formula to report on failure.
pub fn preservation_check(
    before: &Model,
    after: &Model,
    world_map: &[usize],
    max_depth: usize,
    props: &[&str],
) -> PreservationOutcome {
    assert_eq!(
        world_map.len(),
        before.frame().n(),
        "world map must cover the input model"
    );
    for &w in world_map {
        assert!(w < after.frame().n(), "world map target out of range");
    }
    let mut profiles = 0;
    for (state, witness) in joint_truth_states(&[before, after], props, max_depth, true) {
        profiles += 1;
        for (x, &mapped) in world_map.iter().enumerate() {
            if state[0].contains(x) != state[1].contains(mapped) {
                return PreservationOutcome::Fail {
                    world: x,
                    formula: witness,
                };
            }
        }
    }
    PreservationOutcome::Pass { profiles }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Everything a caller needs to audit one surgery run: the output model, the
/// world map, whether the targeted frame conditions actually hold on the
/// output, and (when requested) the preservation verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TransformReport {
    pub input: String,
    pub op: TransformOp,
    pub output: Model,
    pub world_map: Vec<usize>,
    pub conditions: Vec<(ConditionName, bool)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preservation: Option<PreservationOutcome>,
}

impl TransformReport {
    /// Targeted conditions all hold and preservation (if checked) passed.
    pub fn is_clean(&self) -> bool {
        self.conditions.iter().all(|(_, ok)| *ok)
            && self.preservation.as_ref().is_none_or(|p| p.is_pass())
    }
}

/// Run a surgery and assemble the full report. Preservation, when a depth is
/// given, is checked over the propositions of the input valuation.
pub fn transform_report(
    input: &str,
    m: &Model,
    op: TransformOp,
    preservation_depth: Option<usize>,
) -> TransformReport {
    let (output, world_map) = apply(m, op);
    let conditions = op
        .target_conditions()
        .iter()
        .map(|&c| (c, check_condition(output.frame(), c)))
        .collect();
    let preservation = preservation_depth.map(|depth| {
        let names: Vec<&str> = m.valuation().iter().map(|(p, _)| p).collect();
        preservation_check(m, &output, &world_map, depth, &names)
    });
    TransformReport {
        input: input.to_string(),
        op,
        output,
        world_map,
        conditions,
        preservation,
    }
}
