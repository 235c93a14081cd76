//! Decision procedures for the ten frame conditions tied to the axioms Nd, Cd,
//! Idb and Ndb, plus the relational helpers they are phrased in.
//!
//! Each axiom has a *sufficient* condition (any frame satisfying it validates
//! the axiom) and a *correspondence* condition (satisfied exactly by the frames
//! validating the axiom); Cd additionally has the stronger classical-style
//! condition and Idb a weaker one, both of interest because they coincide with
//! the sufficient conditions only on restricted frame classes.
//!
//! All checkers are literal bounded-quantifier loops over worlds with early
//! exit — frames in this workbench are tiny, so clarity beats asymptotics.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hilbert::{AxiomName, AxiomSet};
use crate::kripke::{Frame, WorldSet};

/// `{x | x <= y for some y in a}` — the downset generated by `a`.
pub fn downset(fr: &Frame, a: WorldSet) -> WorldSet {
    let mut out = WorldSet::EMPTY;
    for x in 0..fr.n() {
        if !fr.up(x).intersect(a).is_empty() {
            out.insert(x);
        }
    }
    out
}

/// `R[x]`, the worlds `x` modally sees.
pub fn r_image(fr: &Frame, x: usize) -> WorldSet {
    fr.r_row(x)
}

/// `{y | y R x}`, the worlds that modally see `x`.
pub fn r_preimage(fr: &Frame, x: usize) -> WorldSet {
    fr.r_relation().column(x)
}

/// The ten decidable frame conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionName {
    NdSuff,
    NdCorr,
    CdSuff,
    CdStrong,
    CdCorr,
    IdbSuff,
    IdbWeak,
    IdbCorr,
    NdbSuff,
    NdbCorr,
}

pub const CONDITION_NAMES: [ConditionName; 10] = [
    ConditionName::NdSuff,
    ConditionName::NdCorr,
    ConditionName::CdSuff,
    ConditionName::CdStrong,
    ConditionName::CdCorr,
    ConditionName::IdbSuff,
    ConditionName::IdbWeak,
    ConditionName::IdbCorr,
    ConditionName::NdbSuff,
    ConditionName::NdbCorr,
];

impl ConditionName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionName::NdSuff => "NdSuff",
            ConditionName::NdCorr => "NdCorr",
            ConditionName::CdSuff => "CdSuff",
            ConditionName::CdStrong => "CdStrong",
            ConditionName::CdCorr => "CdCorr",
            ConditionName::IdbSuff => "IdbSuff",
            ConditionName::IdbWeak => "IdbWeak",
            ConditionName::IdbCorr => "IdbCorr",
            ConditionName::NdbSuff => "NdbSuff",
            ConditionName::NdbCorr => "NdbCorr",
        }
    }
}

impl fmt::Display for ConditionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl serde::Serialize for ConditionName {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown condition name `{0}`")]
pub struct UnknownCondition(pub String);

impl FromStr for ConditionName {
    type Err = UnknownCondition;

    fn from_str(s: &str) -> Result<ConditionName, UnknownCondition> {
        CONDITION_NAMES
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCondition(s.to_string()))
    }
}

/// Does the frame satisfy the condition?
pub fn check_condition(fr: &Frame, c: ConditionName) -> bool {
    violation(fr, c).is_none()
}

/// The first tuple of worlds instantiating the condition's outer universal
/// quantifiers for which the body fails, if any (in the quantifier order of
/// the condition's statement).
pub fn violation(fr: &Frame, c: ConditionName) -> Option<Vec<usize>> {
    let n = fr.n();
    let bomb = fr.bomb();
    match c {
        // x R bomb implies x = bomb
        ConditionName::NdSuff => (0..n)
            .find(|&x| fr.r(x, bomb) && x != bomb)
            .map(|x| vec![x]),

        // if every y >= x has y R bomb, then x = bomb
        ConditionName::NdCorr => (0..n)
            .find(|&x| x != bomb && fr.up(x).iter().all(|y| fr.r(y, bomb)))
            .map(|x| vec![x]),

        // every x has some x' >= x such that all y >= x and z in R[x']
        // admit w with y R w and z <= w
        ConditionName::CdSuff => (0..n)
            .find(|&x| {
                !fr.up(x).iter().any(|xp| {
                    fr.up(x).iter().all(|y| {
                        fr.r_row(xp)
                            .iter()
                            .all(|z| !fr.r_row(y).intersect(fr.up(z)).is_empty())
                    })
                })
            })
            .map(|x| vec![x]),

        // x <= y and x R z admit w with y R w and z <= w
        ConditionName::CdStrong => {
            for x in 0..n {
                for y in fr.up(x).iter() {
                    for z in fr.r_row(x).iter() {
                        if fr.r_row(y).intersect(fr.up(z)).is_empty() {
                            return Some(vec![x, y, z]);
                        }
                    }
                }
            }
            None
        }

        // if y and z both avoid R^{-1}(bomb) and lie above x, some w >= x has
        // R[w] inside both generated downsets of R[y] and R[z]
        ConditionName::CdCorr => {
            let sees_bomb = r_preimage(fr, bomb);
            for x in 0..n {
                for y in fr.up(x).iter() {
                    if sees_bomb.contains(y) {
                        continue;
                    }
                    for z in fr.up(x).iter() {
                        if sees_bomb.contains(z) {
                            continue;
                        }
                        let bound = downset(fr, fr.r_row(y)).intersect(downset(fr, fr.r_row(z)));
                        if !fr.up(x).iter().any(|w| fr.r_row(w).is_subset_of(bound)) {
                            return Some(vec![x, y, z]);
                        }
                    }
                }
            }
            None
        }

        // x R y <= z admit u with x <= u R z and every s >= u reaching
        // above z through R
        ConditionName::IdbSuff => {
            for x in 0..n {
                for y in fr.r_row(x).iter() {
                    for z in fr.up(y).iter() {
                        let good = fr.up(x).iter().any(|u| {
                            fr.r(u, z)
                                && fr
                                    .up(u)
                                    .iter()
                                    .all(|s| !fr.r_row(s).intersect(fr.up(z)).is_empty())
                        });
                        if !good {
                            return Some(vec![x, y, z]);
                        }
                    }
                }
            }
            None
        }

        // x R z <= u admit y with x <= y R u
        ConditionName::IdbWeak => {
            for x in 0..n {
                for z in fr.r_row(x).iter() {
                    for u in fr.up(z).iter() {
                        if !fr.up(x).iter().any(|y| fr.r(y, u)) {
                            return Some(vec![x, z, u]);
                        }
                    }
                }
            }
            None
        }

        // x R y <= z with z != bomb admit u, w with x <= u R w <= z and every
        // s >= u either seeing bomb or reaching above z through R
        ConditionName::IdbCorr => {
            for x in 0..n {
                for y in fr.r_row(x).iter() {
                    for z in fr.up(y).iter() {
                        if z == bomb {
                            continue;
                        }
                        let good = fr.up(x).iter().any(|u| {
                            let has_w = fr.r_row(u).iter().any(|w| fr.leq(w, z));
                            has_w
                                && fr.up(u).iter().all(|s| {
                                    fr.r(s, bomb)
                                        || !fr.r_row(s).intersect(fr.up(z)).is_empty()
                                })
                        });
                        if !good {
                            return Some(vec![x, y, z]);
                        }
                    }
                }
            }
            None
        }

        // x R bomb and x R y imply y = bomb
        ConditionName::NdbSuff => {
            for x in 0..n {
                if !fr.r(x, bomb) {
                    continue;
                }
                if let Some(y) = fr.r_row(x).minus(WorldSet::singleton(bomb)).min_world() {
                    return Some(vec![x, y]);
                }
            }
            None
        }

        // if every y >= x has y R bomb, then everything R-seen above x is bomb
        ConditionName::NdbCorr => {
            for x in 0..n {
                if !fr.up(x).iter().all(|y| fr.r(y, bomb)) {
                    continue;
                }
                for y in fr.up(x).iter() {
                    if let Some(z) = fr.r_row(y).minus(WorldSet::singleton(bomb)).min_world() {
                        return Some(vec![x, y, z]);
                    }
                }
            }
            None
        }
    }
}

/// Which flavour of condition to attach to an axiom set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Sound only: satisfying frames validate the axiom.
    Suff,
    /// Exact: satisfied iff the frame validates the axiom.
    Corr,
}

impl FromStr for Mode {
    type Err = UnknownCondition;

    fn from_str(s: &str) -> Result<Mode, UnknownCondition> {
        match s {
            "suff" => Ok(Mode::Suff),
            "corr" => Ok(Mode::Corr),
            _ => Err(UnknownCondition(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConditionsForError {
    #[error("no frame condition is known for `wCD`; check it as a schema instead")]
    WCd,
    #[error("no frame conditions are known for user schemas; check them as schemas instead")]
    UserSchemas,
}

/// The condition list for an axiom set, in the fixed order Nd, Cd, Idb, Ndb.
///
/// `wCD` and user schemas have no known first-order frame condition; callers
/// must fall back to brute-force schema validity for those.
pub fn conditions_for(ax: &AxiomSet, mode: Mode) -> Result<Vec<ConditionName>, ConditionsForError> {
    if ax.contains(AxiomName::WCd) {
        return Err(ConditionsForError::WCd);
    }
    if !ax.user_schemas().is_empty() {
        return Err(ConditionsForError::UserSchemas);
    }
    let table = [
        (AxiomName::Nd, ConditionName::NdSuff, ConditionName::NdCorr),
        (AxiomName::Cd, ConditionName::CdSuff, ConditionName::CdCorr),
        (AxiomName::Idb, ConditionName::IdbSuff, ConditionName::IdbCorr),
        (AxiomName::Ndb, ConditionName::NdbSuff, ConditionName::NdbCorr),
    ];
    Ok(table
        .into_iter()
        .filter(|(ax_name, _, _)| ax.contains(*ax_name))
        .map(|(_, suff, corr)| match mode {
            Mode::Suff => suff,
            Mode::Corr => corr,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{frame_validates_schema, Relation};
    use crate::syntax::parse;

    fn frame(
        names: &[&str],
        leq: &[(usize, usize)],
        r: &[(usize, usize)],
    ) -> Frame {
        let n = names.len();
        Frame::new(
            names.iter().map(|s| s.to_string()).collect(),
            n - 1,
            Relation::from_pairs(n, leq.iter().copied()),
            Relation::from_pairs(n, r.iter().copied()),
            true,
        )
        .unwrap()
    }

    fn fig2a() -> Frame {
        frame(&["x", "y", "bomb"], &[(0, 1)], &[(0, 2), (2, 2)])
    }

    fn fig2b() -> Frame {
        frame(
            &["x", "y", "u", "v", "w", "bomb"],
            &[(0, 1), (2, 3), (3, 4)],
            &[(0, 2), (0, 4), (1, 4), (5, 5)],
        )
    }

    fn fig5a() -> Frame {
        frame(
            &["x", "y", "z", "bomb"],
            &[(0, 1), (2, 3)],
            &[(0, 2), (1, 3), (3, 3)],
        )
    }

    fn fig5b() -> Frame {
        frame(
            &["x", "y", "z", "w", "bomb"],
            &[(0, 1)],
            &[(0, 2), (1, 3), (4, 4)],
        )
    }

    #[test]
    fn downset_of_empty_is_empty() {
        assert_eq!(downset(&fig2a(), WorldSet::EMPTY), WorldSet::EMPTY);
    }

    #[test]
    fn downset_collects_everything_below() {
        // In the fig5a shape, z <= bomb, so the bomb's downset is {z, bomb}.
        let fr = fig5a();
        let got = downset(&fr, WorldSet::singleton(3));
        assert_eq!(got, WorldSet::from_bits(0b1100));
    }

    #[test]
    fn downset_of_isolated_world_is_itself() {
        let fr = fig5b();
        assert_eq!(downset(&fr, WorldSet::singleton(3)), WorldSet::singleton(3));
    }

    #[test]
    fn r_slices_of_fig2a() {
        let fr = fig2a();
        assert_eq!(r_image(&fr, 0), WorldSet::singleton(2));
        assert_eq!(r_preimage(&fr, 2), WorldSet::from_bits(0b101));
    }

    #[test]
    fn r_image_of_fig2b_root() {
        let fr = fig2b();
        assert_eq!(r_image(&fr, 0), WorldSet::from_bits(0b10100)); // {u, w}
    }

    #[test]
    fn point_frame_satisfies_every_condition() {
        let fr = Frame::point();
        for c in CONDITION_NAMES {
            assert!(check_condition(&fr, c), "{c}");
        }
    }

    #[test]
    fn fig2a_validates_nd_without_the_sufficient_condition() {
        let fr = fig2a();
        assert!(!check_condition(&fr, ConditionName::NdSuff));
        assert_eq!(violation(&fr, ConditionName::NdSuff), Some(vec![0]));
        assert!(check_condition(&fr, ConditionName::NdCorr));
        assert!(frame_validates_schema(&fr, &AxiomName::Nd.formula()));
    }

    #[test]
    fn fig2b_validates_idb_without_either_condition() {
        let fr = fig2b();
        assert!(!check_condition(&fr, ConditionName::IdbSuff));
        assert!(!check_condition(&fr, ConditionName::IdbWeak));
        assert!(check_condition(&fr, ConditionName::IdbCorr));
        assert!(frame_validates_schema(&fr, &AxiomName::Idb.formula()));
    }

    #[test]
    fn fig5a_satisfies_the_three_sufficient_conditions() {
        let fr = fig5a();
        assert!(check_condition(&fr, ConditionName::NdbSuff));
        assert!(check_condition(&fr, ConditionName::CdStrong));
        assert!(check_condition(&fr, ConditionName::IdbSuff));
    }

    #[test]
    fn fig5b_frame_fails_ndb_conditions() {
        // y R w with y R nothing else and w != bomb, while x's cone is
        // {x, y}, both seeing only non-bomb worlds: NdbSuff and NdbCorr
        // trivially hold here -- the frame validates Ndb.
        let fr = fig5b();
        assert!(check_condition(&fr, ConditionName::NdbSuff));
        assert!(frame_validates_schema(&fr, &AxiomName::Ndb.formula()));
        // The interesting failure is the classical Cd condition.
        assert!(!check_condition(&fr, ConditionName::CdStrong));
    }

    #[test]
    fn conditions_for_maps_axioms_in_fixed_order() {
        let nd = AxiomSet::ck().extend(AxiomName::Nd);
        assert_eq!(
            conditions_for(&nd, Mode::Corr).unwrap(),
            vec![ConditionName::NdCorr]
        );
        assert_eq!(conditions_for(&AxiomSet::ck(), Mode::Suff).unwrap(), vec![]);
        let cd_idb = AxiomSet::ck().extend(AxiomName::Idb).extend(AxiomName::Cd);
        assert_eq!(
            conditions_for(&cd_idb, Mode::Suff).unwrap(),
            vec![ConditionName::CdSuff, ConditionName::IdbSuff]
        );
    }

    #[test]
    fn conditions_for_refuses_wcd() {
        let ax = AxiomSet::ck().extend(AxiomName::WCd);
        assert_eq!(
            conditions_for(&ax, Mode::Corr),
            Err(ConditionsForError::WCd)
        );
        let mut with_user = AxiomSet::ck();
        with_user.add_user_schema(parse("p -> p").unwrap());
        assert_eq!(
            conditions_for(&with_user, Mode::Suff),
            Err(ConditionsForError::UserSchemas)
        );
    }

    #[test]
    fn condition_names_round_trip_through_strings() {
        for c in CONDITION_NAMES {
            assert_eq!(c.as_str().parse::<ConditionName>().unwrap(), c);
        }
        assert!("NdSufff".parse::<ConditionName>().is_err());
    }
}
