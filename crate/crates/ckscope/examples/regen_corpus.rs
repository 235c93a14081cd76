//! Regenerate the proof files under `corpus/proofs/` from the packaged
//! derivations. Run from anywhere in the workspace:
//!
//! ```text
//! cargo run -p ckscope --example regen_corpus
//! ```
//!
//! The figure and target files in `corpus/` are hand-written and not touched.

use std::fs;
use std::path::Path;

use ckscope::hilbert::builtins::{builtin_proof, BUILTIN_NAMES};
use ckscope::hilbert::proof_to_doc;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/proofs");
    fs::create_dir_all(&dir).expect("create corpus/proofs");
    for name in BUILTIN_NAMES {
        let (proof, axioms) = builtin_proof(name).expect("packaged proof exists");
        let doc = proof_to_doc(&axioms, &proof);
        let mut json = serde_json::to_string_pretty(&doc).expect("proofs serialise");
        json.push('\n');
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, json).expect("write proof file");
        println!("wrote {}", path.display());
    }
}
