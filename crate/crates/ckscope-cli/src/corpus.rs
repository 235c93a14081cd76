//! The packaged corpus: the four figure frames, their countermodel
//! valuations, the named target formulas, and the five packaged proofs, all
//! embedded at compile time together with the verdicts they are documented to
//! reproduce.

use std::collections::BTreeMap;

use ckscope::conditions::{check_condition, ConditionName};
use ckscope::hilbert::{check_proof, grefe_formula, proof_from_json_str, wcdb_formula, AxiomName};
use ckscope::kripke::frame_validates_schema;
use ckscope::syntax::parse;
use ckscope::{Formula, Frame, Model};

pub const FIG2A: &str = include_str!("../../../corpus/fig2a.json");
pub const FIG2B: &str = include_str!("../../../corpus/fig2b.json");
pub const FIG5A: &str = include_str!("../../../corpus/fig5a.json");
pub const FIG5B: &str = include_str!("../../../corpus/fig5b.json");
pub const FIG5A_MODEL: &str = include_str!("../../../corpus/fig5a_model.json");
pub const FIG5B_MODEL_P: &str = include_str!("../../../corpus/fig5b_model_p.json");
pub const FIG5B_MODEL_PQ: &str = include_str!("../../../corpus/fig5b_model_pq.json");
pub const TARGETS: &str = include_str!("../../../corpus/targets.json");

/// `(builtin name, embedded proof file, target key, expected extra axioms)`.
pub const PROOFS: [(&str, &str, &str, &[AxiomName]); 5] = [
    (
        "wcd_from_idb",
        include_str!("../../../corpus/proofs/wcd_from_idb.json"),
        "wcd",
        &[AxiomName::Idb],
    ),
    (
        "eq7_ndb_idb",
        include_str!("../../../corpus/proofs/eq7_ndb_idb.json"),
        "eq7",
        &[AxiomName::Idb, AxiomName::Ndb],
    ),
    (
        "wcdb_from_nd_wcd",
        include_str!("../../../corpus/proofs/wcdb_from_nd_wcd.json"),
        "wcdb",
        &[AxiomName::Nd, AxiomName::WCd],
    ),
    (
        "nn_box_from_nd_idb",
        include_str!("../../../corpus/proofs/nn_box_from_nd_idb.json"),
        "nn_box",
        &[AxiomName::Nd, AxiomName::Idb],
    ),
    (
        "grefe_consequence_nd_idb",
        include_str!("../../../corpus/proofs/grefe_consequence_nd_idb.json"),
        "grefe_consequence",
        &[AxiomName::Nd, AxiomName::Idb],
    ),
];

#[derive(Debug, Clone)]
pub struct CorpusCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

struct Checks(Vec<CorpusCheck>);

impl Checks {
    fn push(&mut self, name: &str, outcome: Result<(), String>) {
        self.0.push(match outcome {
            Ok(()) => CorpusCheck {
                name: name.to_string(),
                ok: true,
                detail: String::new(),
            },
            Err(detail) => CorpusCheck {
                name: name.to_string(),
                ok: false,
                detail,
            },
        });
    }
}

fn expect(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn load_frame(src: &str) -> Result<Frame, String> {
    Frame::from_json_str(src).map_err(|e| e.to_string())
}

fn load_model(src: &str) -> Result<Model, String> {
    Model::from_json_str(src).map_err(|e| e.to_string())
}

fn falsifies_at(model_src: &str, world: &str, target: &Formula) -> Result<(), String> {
    let m = load_model(model_src)?;
    let w = m
        .frame()
        .world_index(world)
        .ok_or_else(|| format!("world `{world}` missing"))?;
    expect(
        !m.forces(w, target),
        &format!("expected `{world}` to falsify {target}"),
    )
}

/// Re-check every packaged verdict. Purely library calls over the embedded
/// files; nothing here consults the filesystem.
pub fn verify() -> Vec<CorpusCheck> {
    let mut checks = Checks(Vec::new());
    let targets: BTreeMap<String, String> =
        serde_json::from_str(TARGETS).expect("targets file is embedded JSON");
    let target = |key: &str| -> Formula {
        parse(&targets[key]).expect("embedded targets parse")
    };

    checks.push(
        "targets parse and match the library constants",
        (|| {
            for (k, v) in &targets {
                parse(v).map_err(|e| format!("target `{k}`: {e}"))?;
            }
            expect(target("wcd") == AxiomName::WCd.formula(), "wcd constant")?;
            expect(target("wcdb") == wcdb_formula(), "wcdb constant")?;
            expect(target("grefe") == grefe_formula(), "grefe constant")
        })(),
    );

    checks.push(
        "fig2a validates Nd but fails NdSuff",
        (|| {
            let fr = load_frame(FIG2A)?;
            expect(
                frame_validates_schema(&fr, &AxiomName::Nd.formula()),
                "Nd should be valid",
            )?;
            expect(
                !check_condition(&fr, ConditionName::NdSuff),
                "NdSuff should fail",
            )
        })(),
    );

    checks.push(
        "fig2b validates Idb but fails IdbSuff and IdbWeak",
        (|| {
            let fr = load_frame(FIG2B)?;
            expect(
                frame_validates_schema(&fr, &AxiomName::Idb.formula()),
                "Idb should be valid",
            )?;
            expect(
                !check_condition(&fr, ConditionName::IdbSuff),
                "IdbSuff should fail",
            )?;
            expect(
                !check_condition(&fr, ConditionName::IdbWeak),
                "IdbWeak should fail",
            )
        })(),
    );

    checks.push(
        "fig5a satisfies NdbSuff, CdStrong and IdbSuff",
        (|| {
            let fr = load_frame(FIG5A)?;
            for c in [
                ConditionName::NdbSuff,
                ConditionName::CdStrong,
                ConditionName::IdbSuff,
            ] {
                expect(check_condition(&fr, c), &format!("{c} should hold"))?;
            }
            Ok(())
        })(),
    );

    checks.push(
        "fig5b fails CdStrong",
        (|| {
            let fr = load_frame(FIG5B)?;
            expect(
                !check_condition(&fr, ConditionName::CdStrong),
                "CdStrong should fail",
            )
        })(),
    );

    checks.push(
        "fig5a model falsifies the double-negation shift at x",
        falsifies_at(FIG5A_MODEL, "x", &target("nn_box")),
    );
    checks.push(
        "fig5b model (p) falsifies the guarded shift at x",
        falsifies_at(FIG5B_MODEL_P, "x", &target("eq7")),
    );
    checks.push(
        "fig5b model (p, q) falsifies wCDb at x",
        falsifies_at(FIG5B_MODEL_PQ, "x", &target("wcdb")),
    );

    checks.push(
        "model files round-trip through JSON",
        (|| {
            for src in [FIG5A_MODEL, FIG5B_MODEL_P, FIG5B_MODEL_PQ] {
                let m = load_model(src)?;
                let emitted = serde_json::to_string(&m).map_err(|e| e.to_string())?;
                let back = load_model(&emitted)?;
                expect(back == m, "re-loaded model differs")?;
            }
            Ok(())
        })(),
    );

    for (name, src, target_key, extras) in PROOFS {
        checks.push(
            &format!("proof {name} checks and ends at its target"),
            (|| {
                let (ax, proof) = proof_from_json_str(src).map_err(|e| e.to_string())?;
                let got: Vec<AxiomName> = ax.extras().collect();
                expect(got == extras, &format!("axioms {got:?}, expected {extras:?}"))?;
                let end = check_proof(&proof, &ax).map_err(|e| e.to_string())?;
                expect(end.context().next().is_none(), "context should be empty")?;
                expect(
                    *end.conclusion() == target(target_key),
                    &format!("conclusion {}", end.conclusion()),
                )
            })(),
        );
    }

    checks.0
}
