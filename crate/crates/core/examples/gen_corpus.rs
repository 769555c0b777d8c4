//! Regenerates the committed corpus files under data/corpus from the
//! bundled generators. Run from the workspace root:
//!
//!   cargo run -p labelsift --example gen_corpus
//!
//! The integration test corpus_files.rs fails if the committed files
//! drift from what this writes.

use labelsift::data::{save_arff, save_csv, synth};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus");
    std::fs::create_dir_all(&dir).expect("create data/corpus");
    for name in synth::CORPUS_NAMES {
        let ds = synth::by_name(name).expect("bundled name");
        // One ARFF file keeps that loader exercised by real data; the
        // all-categorical dataset shows the dialect best.
        let path = if name == "shades" {
            dir.join(format!("{name}.arff"))
        } else {
            dir.join(format!("{name}.csv"))
        };
        if name == "shades" {
            save_arff(&ds, &path).expect("write arff");
        } else {
            save_csv(&ds, &path).expect("write csv");
        }
        println!("wrote {}", path.display());
    }
}
