//! Derivations packaged with the library.
//!
//! Each builder returns a checked proof together with the axiom set it lives
//! in. The proofs are constructed from the primitive rules via the
//! admissible-rule transformers, so every one of them replays line by line
//! under [`check_proof`].

use super::{
    deduction, detach, k_rule, subst, substitute_proof, weaken, AxiomName, AxiomSet, Proof,
    ProofBuilder,
};
use crate::syntax::{parse, Formula, Substitution};
use std::collections::BTreeSet;

pub const BUILTIN_NAMES: [&str; 5] = [
    "wcd_from_idb",
    "eq7_ndb_idb",
    "wcdb_from_nd_wcd",
    "nn_box_from_nd_idb",
    "grefe_consequence_nd_idb",
];

/// Look up a packaged derivation by name.
pub fn builtin_proof(name: &str) -> Option<(Proof, AxiomSet)> {
    match name {
        "wcd_from_idb" => Some(wcd_from_idb()),
        "eq7_ndb_idb" => Some(eq7_ndb_idb()),
        "wcdb_from_nd_wcd" => Some(wcdb_from_nd_wcd()),
        "nn_box_from_nd_idb" => Some(nn_box_from_nd_idb()),
        "grefe_consequence_nd_idb" => Some(grefe_consequence_nd_idb()),
        _ => None,
    }
}

fn f(s: &str) -> Formula {
    parse(s).expect("builtin formulas parse")
}

fn ctx(items: &[&str]) -> BTreeSet<Formula> {
    items.iter().map(|s| f(s)).collect()
}

/// `|- [](p \/ q) -> (<>p -> []q) -> []q` — the weak constant-domain schema —
/// from the back-implication schema Idb.
///
/// Under the hypotheses `[](p \/ q)` and `<>p -> []q`, Idb turns the second
/// hypothesis into `[](p -> q)`; boxing the cut `{p \/ q, p -> q} |- q` with the
/// boxed-context rule then yields `[]q`, and two deductions discharge the
/// hypotheses.
pub fn wcd_from_idb() -> (Proof, AxiomSet) {
    let ax = AxiomSet::ck().extend(AxiomName::Idb);
    let d = ctx(&["[](p \\/ q)", "<>p -> []q"]);

    // d |- [](p -> q)
    let boxed_imp = {
        let mut b = ProofBuilder::new(ax.clone());
        let idb = b.ax(&d, "Idb", Substitution::new());
        let hyp = b.el(&d, f("<>p -> []q"));
        let last = b.mp(hyp, idb);
        b.finish_at(last)
    };

    // {p \/ q, p -> q} |- q, by cases via A8 (the q-disjunct is the identity).
    let cut = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["p \\/ q", "p -> q"]);
        let disj = b.el(&c, f("p \\/ q"));
        let imp = b.el(&c, f("p -> q"));
        let a8 = b.ax(&c, "A8", subst([("p", f("p")), ("q", f("q")), ("r", f("q"))]));
        let step = b.mp(imp, a8);
        let idq = b.lemma_id(&c, f("q"));
        let by_cases = b.mp(idq, step);
        let last = b.mp(disj, by_cases);
        b.finish_at(last)
    };

    // {[](p \/ q), [](p -> q)} |- []q, then discharge [](p -> q) and re-weaken.
    let boxed_cut = k_rule(&cut, &ax).expect("cut checks");
    let discharge = deduction(&boxed_cut, &ax, &f("[](p -> q)")).expect("pivot present");
    let under_d = weaken(&discharge, &ax, [f("<>p -> []q")]).expect("input checks");

    let combined = {
        let mut b = ProofBuilder::new(ax.clone());
        let have = b.import(&boxed_imp);
        let implies = b.import(&under_d);
        let last = b.mp(have, implies);
        b.finish_at(last)
    };

    let once = deduction(&combined, &ax, &f("<>p -> []q")).expect("pivot present");
    let done = deduction(&once, &ax, &f("[](p \\/ q)")).expect("pivot present");
    (done, ax)
}

/// `|- ~[]bot -> ~~[]p -> []~~p` in the calculus extended with Ndb and Idb.
///
/// The derivation: box the intuitionistic theorem `p -> ~~p` and compose with
/// the diamond K schema at `{p := ~p, q := bot}` to get
/// `[]p -> <>~p -> <>bot`; Ndb upgrades the conclusion to `[]bot`; discharging
/// in the right order yields `~[]bot, ~~[]p |- <>~p -> bot`, which `bot -> []bot`
/// and Idb at `{p := ~p, q := bot}` turn into `[]~~p`.
pub fn eq7_ndb_idb() -> (Proof, AxiomSet) {
    let ax = AxiomSet::ck()
        .extend(AxiomName::Ndb)
        .extend(AxiomName::Idb);

    // |- p -> ~~p
    let double_negation = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["p", "~p"]);
        let p = b.el(&c, f("p"));
        let np = b.el(&c, f("~p"));
        let clash = b.mp(p, np);
        let clash = b.finish_at(clash);
        let half = deduction(&clash, &ax, &f("~p")).expect("pivot present");
        deduction(&half, &ax, &f("p")).expect("pivot present")
    };

    // |- []p -> <>~p -> <>bot
    let to_dia = {
        let mut b = ProofBuilder::new(ax.clone());
        let empty = ctx(&[]);
        let thm = b.import(&double_negation);
        let boxed = b.nec(&empty, thm);
        let kb = b.ax(&empty, "Kb", subst([("p", f("p")), ("q", f("~~p"))]));
        let box_mono = b.mp(boxed, kb); // []p -> []~~p
        let kd = b.ax(&empty, "Kd", subst([("p", f("~p")), ("q", f("bot"))]));
        let last = b.syllogism(box_mono, kd);
        b.finish_at(last)
    };

    // {[]p, <>~p} |- []bot via Ndb
    let to_boxbot = {
        let opened = detach(&to_dia, &ax).expect("implication");
        let opened = detach(&opened, &ax).expect("implication");
        let mut b = ProofBuilder::new(ax.clone());
        let dia_bot = b.import(&opened);
        let c = ctx(&["[]p", "<>~p"]);
        let ndb = b.ax(&c, "Ndb", Substitution::new());
        let last = b.mp(dia_bot, ndb);
        b.finish_at(last)
    };

    // {~[]bot, ~~[]p} |- <>~p -> bot, by clashing []bot with ~[]bot and then
    // []p with ~~[]p (currying and commuting happen in the discharge order).
    let refute_dia = {
        let wide = weaken(&to_boxbot, &ax, [f("~[]bot"), f("~~[]p")]).expect("input checks");
        let mut b = ProofBuilder::new(ax.clone());
        let boxbot = b.import(&wide);
        let c = ctx(&["[]p", "<>~p", "~[]bot", "~~[]p"]);
        let nbb = b.el(&c, f("~[]bot"));
        let clash = b.mp(boxbot, nbb);
        let clash = b.finish_at(clash);
        let no_boxp = deduction(&clash, &ax, &f("[]p")).expect("pivot present");
        let mut b = ProofBuilder::new(ax.clone());
        let nb = b.import(&no_boxp);
        let c = ctx(&["<>~p", "~[]bot", "~~[]p"]);
        let nnb = b.el(&c, f("~~[]p"));
        let clash2 = b.mp(nb, nnb);
        let clash2 = b.finish_at(clash2);
        deduction(&clash2, &ax, &f("<>~p")).expect("pivot present")
    };

    // bot -> []bot and Idb close the box.
    let boxed_dn = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["~[]bot", "~~[]p"]);
        let base = b.import(&refute_dia);
        let a9 = b.ax(&c, "A9", subst([("p", f("[]bot"))]));
        let strengthened = b.syllogism(base, a9); // <>~p -> []bot
        let idb = b.ax(&c, "Idb", subst([("p", f("~p")), ("q", f("bot"))]));
        let last = b.mp(strengthened, idb); // [](~p -> bot) = []~~p
        b.finish_at(last)
    };

    let once = deduction(&boxed_dn, &ax, &f("~~[]p")).expect("pivot present");
    let done = deduction(&once, &ax, &f("~[]bot")).expect("pivot present");
    (done, ax)
}

/// `|- [](p \/ q) -> (~[]~p -> []q) -> []q` — the box-only rendering of the
/// weak constant-domain schema — from Nd and wCD.
///
/// The bridge is `<>p -> ~[]~p` (diamond K at `{q := bot}` plus Nd); it turns
/// the box-only hypothesis into the diamond hypothesis wCD expects.
pub fn wcdb_from_nd_wcd() -> (Proof, AxiomSet) {
    let ax = AxiomSet::ck()
        .extend(AxiomName::Nd)
        .extend(AxiomName::WCd);

    // {<>p} |- ~[]~p
    let bridge = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["<>p", "[]~p"]);
        let boxed = b.el(&c, f("[]~p"));
        let kd = b.ax(&c, "Kd", subst([("p", f("p")), ("q", f("bot"))]));
        let step = b.mp(boxed, kd); // <>p -> <>bot
        let dia = b.el(&c, f("<>p"));
        let dia_bot = b.mp(dia, step);
        let nd = b.ax(&c, "Nd", Substitution::new());
        let clash = b.mp(dia_bot, nd);
        let clash = b.finish_at(clash);
        deduction(&clash, &ax, &f("[]~p")).expect("pivot present")
    };

    let w = ctx(&["[](p \\/ q)", "~[]~p -> []q"]);

    // w |- <>p -> []q
    let dia_to_boxq = {
        let wide = weaken(&bridge, &ax, w.iter().cloned()).expect("input checks");
        let mut b = ProofBuilder::new(ax.clone());
        let not_box_not = b.import(&wide);
        let c = ctx(&["<>p", "[](p \\/ q)", "~[]~p -> []q"]);
        let hyp = b.el(&c, f("~[]~p -> []q"));
        let with_dia = b.mp(not_box_not, hyp);
        let with_dia = b.finish_at(with_dia);
        deduction(&with_dia, &ax, &f("<>p")).expect("pivot present")
    };

    // w |- []q via wCD
    let boxq = {
        let mut b = ProofBuilder::new(ax.clone());
        let have = b.import(&dia_to_boxq);
        let wcd = b.ax(&w, "wCD", Substitution::new());
        let disj = b.el(&w, f("[](p \\/ q)"));
        let opened = b.mp(disj, wcd);
        let last = b.mp(have, opened);
        b.finish_at(last)
    };

    let once = deduction(&boxq, &ax, &f("~[]~p -> []q")).expect("pivot present");
    let done = deduction(&once, &ax, &f("[](p \\/ q)")).expect("pivot present");
    (done, ax)
}

/// `|- ~~[]p -> []~~p` in the calculus extended with Nd and Idb.
///
/// The boxed-context rule gives `[]p |- []~~p`; diamond K and Nd turn that into
/// `|- []p -> ~<>~p`, whose double-negation shuffle yields
/// `~~[]p |- <>~p -> bot`; finally `bot -> []bot` and Idb rebuild the box.
pub fn nn_box_from_nd_idb() -> (Proof, AxiomSet) {
    let ax = AxiomSet::ck()
        .extend(AxiomName::Nd)
        .extend(AxiomName::Idb);

    // {[]p} |- []~~p
    let boxed_dn = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["p", "~p"]);
        let p = b.el(&c, f("p"));
        let np = b.el(&c, f("~p"));
        let clash = b.mp(p, np);
        let clash = b.finish_at(clash);
        let dn = deduction(&clash, &ax, &f("~p")).expect("pivot present");
        k_rule(&dn, &ax).expect("input checks")
    };

    // {[]p} |- <>~p -> <>bot
    let dia_step = {
        let mut b = ProofBuilder::new(ax.clone());
        let have = b.import(&boxed_dn);
        let c = ctx(&["[]p"]);
        let kd = b.ax(&c, "Kd", subst([("p", f("~p")), ("q", f("bot"))]));
        let last = b.mp(have, kd);
        b.finish_at(last)
    };

    // {<>~p} |- ~[]p, by clashing <>bot with Nd and discharging []p.
    let refute_box = {
        let opened = detach(&dia_step, &ax).expect("implication");
        let mut b = ProofBuilder::new(ax.clone());
        let dia_bot = b.import(&opened);
        let c = ctx(&["[]p", "<>~p"]);
        let nd = b.ax(&c, "Nd", Substitution::new());
        let clash = b.mp(dia_bot, nd);
        let clash = b.finish_at(clash);
        deduction(&clash, &ax, &f("[]p")).expect("pivot present")
    };

    // {~~[]p} |- <>~p -> bot
    let refute_dia = {
        let wide = weaken(&refute_box, &ax, [f("~~[]p")]).expect("input checks");
        let mut b = ProofBuilder::new(ax.clone());
        let not_box = b.import(&wide);
        let c = ctx(&["<>~p", "~~[]p"]);
        let nn = b.el(&c, f("~~[]p"));
        let clash = b.mp(not_box, nn);
        let clash = b.finish_at(clash);
        deduction(&clash, &ax, &f("<>~p")).expect("pivot present")
    };

    // bot -> []bot, then Idb closes the box.
    let rebuilt = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["~~[]p"]);
        let base = b.import(&refute_dia);
        let a9 = b.ax(&c, "A9", subst([("p", f("[]bot"))]));
        let strengthened = b.syllogism(base, a9); // <>~p -> []bot
        let idb = b.ax(&c, "Idb", subst([("p", f("~p")), ("q", f("bot"))]));
        let last = b.mp(strengthened, idb);
        b.finish_at(last)
    };

    let done = deduction(&rebuilt, &ax, &f("~~[]p")).expect("pivot present");
    (done, ax)
}

/// `|- ~~[]bot -> []bot` in the calculus extended with Nd and Idb: the
/// `p := bot` instance of [`nn_box_from_nd_idb`] composed with
/// `[]~~bot -> []bot`.
pub fn grefe_consequence_nd_idb() -> (Proof, AxiomSet) {
    let (nn_box, ax) = nn_box_from_nd_idb();
    let instance =
        substitute_proof(&nn_box, &ax, &subst([("p", f("bot"))])).expect("input checks");

    // |- []~~bot -> []bot
    let collapse = {
        let mut b = ProofBuilder::new(ax.clone());
        let c = ctx(&["~~bot"]);
        let nn = b.el(&c, f("~~bot"));
        let id_bot = b.lemma_id(&c, f("bot")); // bot -> bot = ~bot
        let clash = b.mp(id_bot, nn);
        let clash = b.finish_at(clash);
        let boxed = k_rule(&clash, &ax).expect("input checks");
        deduction(&boxed, &ax, &f("[]~~bot")).expect("pivot present")
    };

    let mut b = ProofBuilder::new(ax.clone());
    let first = b.import(&instance);
    let second = b.import(&collapse);
    let last = b.syllogism(first, second);
    (b.finish_at(last), ax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{check_proof, Consecution};

    fn assert_builtin(name: &str, conclusion: &str, extras: &[AxiomName]) {
        let (proof, ax) = builtin_proof(name).unwrap();
        let end = check_proof(&proof, &ax).unwrap();
        assert_eq!(end, Consecution::theorem(f(conclusion)), "{name}");
        let expect: Vec<AxiomName> = extras.to_vec();
        let got: Vec<AxiomName> = ax.extras().collect();
        assert_eq!(got, expect, "{name}");
    }

    #[test]
    fn wcd_from_idb_checks() {
        assert_builtin(
            "wcd_from_idb",
            "[](p \\/ q) -> (<>p -> []q) -> []q",
            &[AxiomName::Idb],
        );
        let (_, ax) = builtin_proof("wcd_from_idb").unwrap();
        let (proof, _) = builtin_proof("wcd_from_idb").unwrap();
        assert_eq!(
            *check_proof(&proof, &ax).unwrap().conclusion(),
            AxiomName::WCd.formula()
        );
    }

    #[test]
    fn eq7_ndb_idb_checks() {
        assert_builtin(
            "eq7_ndb_idb",
            "~[]bot -> ~~[]p -> []~~p",
            &[AxiomName::Idb, AxiomName::Ndb],
        );
    }

    #[test]
    fn wcdb_from_nd_wcd_checks() {
        assert_builtin(
            "wcdb_from_nd_wcd",
            "[](p \\/ q) -> (~[]~p -> []q) -> []q",
            &[AxiomName::Nd, AxiomName::WCd],
        );
        let (proof, ax) = builtin_proof("wcdb_from_nd_wcd").unwrap();
        assert_eq!(
            *check_proof(&proof, &ax).unwrap().conclusion(),
            super::super::wcdb_formula()
        );
    }

    #[test]
    fn nn_box_from_nd_idb_checks() {
        assert_builtin(
            "nn_box_from_nd_idb",
            "~~[]p -> []~~p",
            &[AxiomName::Nd, AxiomName::Idb],
        );
    }

    #[test]
    fn grefe_consequence_checks() {
        assert_builtin(
            "grefe_consequence_nd_idb",
            "~~[]bot -> []bot",
            &[AxiomName::Nd, AxiomName::Idb],
        );
    }

    #[test]
    fn unknown_builtin_is_none() {
        assert!(builtin_proof("no_such_proof").is_none());
    }

    #[test]
    fn builtin_names_and_registry_agree() {
        for name in BUILTIN_NAMES {
            assert!(builtin_proof(name).is_some(), "{name}");
        }
    }
}
