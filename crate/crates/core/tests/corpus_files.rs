//! The committed corpus files must stay in lockstep with the bundled
//! generators, and must load back into working datasets.

use labelsift::data::{load_dataset, save_arff, save_csv, synth};

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus")
}

#[test]
fn committed_files_match_the_generators() {
    let dir = corpus_dir();
    let tmp = std::env::temp_dir().join(format!("labelsift_corpus_{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    for name in synth::CORPUS_NAMES {
        let ds = synth::by_name(name).unwrap();
        let (fresh, committed) = if name == "shades" {
            let p = tmp.join(format!("{name}.arff"));
            save_arff(&ds, &p).unwrap();
            (p, dir.join(format!("{name}.arff")))
        } else {
            let p = tmp.join(format!("{name}.csv"));
            save_csv(&ds, &p).unwrap();
            (p, dir.join(format!("{name}.csv")))
        };
        let want = std::fs::read(&fresh).unwrap();
        let got = std::fs::read(&committed)
            .unwrap_or_else(|e| panic!("{}: {e}; regenerate with the gen_corpus example", committed.display()));
        assert_eq!(
            got, want,
            "{name} drifted; regenerate with the gen_corpus example"
        );
        std::fs::remove_file(&fresh).ok();
    }
    std::fs::remove_dir(&tmp).ok();
}

#[test]
fn committed_files_load_as_valid_datasets() {
    let dir = corpus_dir();
    for name in synth::CORPUS_NAMES {
        let ext = if name == "shades" { "arff" } else { "csv" };
        let ds = load_dataset(dir.join(format!("{name}.{ext}"))).unwrap();
        let reference = synth::by_name(name).unwrap();
        assert_eq!(ds.name(), name);
        assert_eq!(ds.len(), reference.len(), "{name}");
        assert_eq!(ds.n_classes(), reference.n_classes(), "{name}");
        // Labels survive the round trip row by row.
        let want: Vec<&str> = reference
            .labels()
            .into_iter()
            .map(|y| reference.classes()[y].as_str())
            .collect();
        let got: Vec<&str> = ds
            .labels()
            .into_iter()
            .map(|y| ds.classes()[y].as_str())
            .collect();
        assert_eq!(got, want, "{name}");
    }
}
