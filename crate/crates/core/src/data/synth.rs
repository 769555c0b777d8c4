/*!
Seeded synthetic datasets.

The desk corpus is ten small datasets with iris-like scale and known,
varied structure: Gaussian blobs, interleaved moons, concentric rings,
xor quadrants, diagonal parity bands, categorical-only tables, a mixed
numeric/categorical set with missing values, a many-irrelevant-features
set, and a heavily imbalanced set. The variety is deliberate: each shape
defeats at least one base classifier family, which is what gives the
classifier-difference machinery something to measure.

Every generator is pure in its seed, so the committed corpus files can be
regenerated byte-for-byte (see `examples/gen_corpus.rs`) and tests can
build the same data in memory without touching the filesystem.
*/

use super::{Dataset, FeatureDescriptor, Instance, Value};
use crate::rng::{derive_seed, SplitMix64};

/// Names of the bundled desk corpus, in canonical order.
pub const CORPUS_NAMES: [&str; 10] = [
    "bands", "blobs2", "facets", "medley", "moons", "quadrants", "rings", "shades", "tilt", "trio",
];

/// The three known-structure fixtures referenced throughout the tests.
pub const FIXTURE_NAMES: [&str; 3] = ["blobs2", "quadrants", "rings"];

/// Builds the whole desk corpus in canonical (name-sorted) order.
pub fn desk_corpus() -> Vec<Dataset> {
    CORPUS_NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

/// Builds one corpus dataset by name, with its fixed size and seed.
pub fn by_name(name: &str) -> Option<Dataset> {
    match name {
        "bands" => Some(bands(500, 0xBA9D5)),
        "blobs2" => Some(two_blobs(500, 0xB10B5)),
        "facets" => Some(facets(200, 0xFACE7)),
        "medley" => Some(medley(600, 0x3D1E1)),
        "moons" => Some(moons(450, 0x300715)),
        "quadrants" => Some(quadrants(400, 0x4AD5)),
        "rings" => Some(rings(400, 0x21965)),
        "shades" => Some(shades(300, 0x5AAD5)),
        "tilt" => Some(tilt(400, 0x7117)),
        "trio" => Some(trio(150, 0x7210)),
        _ => None,
    }
}

fn numeric_features(names: &[&str]) -> Vec<FeatureDescriptor> {
    names.iter().map(|n| FeatureDescriptor::numeric(n)).collect()
}

fn class_names(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("c{c}")).collect()
}

/// Wraps rows into a shuffled dataset so committed files do not carry the
/// class-grouped generation order.
fn assemble(
    name: &str,
    features: Vec<FeatureDescriptor>,
    classes: Vec<String>,
    rows: Vec<(Vec<Value>, usize)>,
    seed: u64,
) -> Dataset {
    let instances = rows
        .into_iter()
        .map(|(values, label)| Instance { values, label })
        .collect();
    let ds = Dataset::new(name, features, classes, instances)
        .expect("generator produced a schema-consistent dataset");
    super::shuffle(&ds, derive_seed(seed, &["order", name]))
}

fn gauss_row(rng: &mut SplitMix64, center: &[f64], std: &[f64]) -> Vec<Value> {
    center
        .iter()
        .zip(std)
        .map(|(&m, &s)| Value::Num(m + s * rng.gaussian()))
        .collect()
}

fn draw_cat(rng: &mut SplitMix64, probs: &[f64]) -> usize {
    let u = rng.next_f64();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Two well-separated Gaussian blobs; 2 numeric features, 2 classes.
/// The canonical clean-concept fixture: a competent classifier gets
/// essentially every instance right, so a flipped label is visible.
pub fn two_blobs(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    let centers = [[0.0, 0.0], [4.0, 4.0]];
    for i in 0..n {
        let c = i % 2;
        rows.push((gauss_row(&mut rng, &centers[c], &[0.8, 0.8]), c));
    }
    assemble("blobs2", numeric_features(&["x", "y"]), class_names(2), rows, seed)
}

/// Three 4-dimensional Gaussian classes of 50 each, two of them partially
/// overlapping. Same shape as the classic 150-flower table.
pub fn trio(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let centers = [
        [5.0, 3.4, 1.5, 0.2],
        [5.9, 2.8, 4.3, 1.3],
        [6.6, 3.0, 5.6, 2.0],
    ];
    let stds = [
        [0.35, 0.38, 0.17, 0.10],
        [0.52, 0.31, 0.47, 0.20],
        [0.64, 0.32, 0.55, 0.27],
    ];
    let per = n / 3;
    let mut rows = Vec::with_capacity(n);
    for c in 0..3 {
        let count = if c == 2 { n - 2 * per } else { per };
        for _ in 0..count {
            rows.push((gauss_row(&mut rng, &centers[c], &stds[c]), c));
        }
    }
    assemble(
        "trio",
        numeric_features(&["len1", "wid1", "len2", "wid2"]),
        class_names(3),
        rows,
        seed,
    )
}

/// Inner disc vs. outer ring. Radially symmetric, so no single axis
/// threshold works; per-class variance still differs, which keeps every
/// learner family in the game without making any of them trivial.
pub fn rings(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let r = if c == 0 {
            0.85 * rng.next_f64().sqrt()
        } else {
            1.15 + 0.55 * rng.next_f64()
        };
        let theta = rng.next_f64() * std::f64::consts::TAU;
        rows.push((vec![Value::Num(r * theta.cos()), Value::Num(r * theta.sin())], c));
    }
    assemble("rings", numeric_features(&["x", "y"]), class_names(2), rows, seed)
}

/// Xor over quadrant signs with a small margin around the axes. Feature
/// marginals are identical across classes, which starves independence
/// assumptions while staying easy for local and partitioning learners.
pub fn quadrants(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let x = rng.next_f64() * 2.0 - 1.0;
        let y = rng.next_f64() * 2.0 - 1.0;
        if x.abs() < 0.05 || y.abs() < 0.05 {
            continue;
        }
        let c = usize::from((x > 0.0) != (y > 0.0));
        rows.push((vec![Value::Num(x), Value::Num(y)], c));
    }
    assemble("quadrants", numeric_features(&["x", "y"]), class_names(2), rows, seed)
}

/// Two interleaved half-moons with Gaussian jitter.
pub fn moons(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let t = rng.next_f64() * std::f64::consts::PI;
        let (mut x, mut y) = if c == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        x += 0.15 * rng.gaussian();
        y += 0.15 * rng.gaussian();
        rows.push((vec![Value::Num(x), Value::Num(y)], c));
    }
    assemble("moons", numeric_features(&["x", "y"]), class_names(2), rows, seed)
}

/// Diagonal parity bands: class = parity of floor(x + y), with a margin
/// carved around the band boundaries.
pub fn bands(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let x = rng.next_f64() * 4.0;
        let y = rng.next_f64() * 4.0;
        let s = x + y;
        if (s - s.round()).abs() < 0.10 {
            continue;
        }
        let c = (s.floor() as i64).rem_euclid(2) as usize;
        rows.push((vec![Value::Num(x), Value::Num(y)], c));
    }
    assemble("bands", numeric_features(&["x", "y"]), class_names(2), rows, seed)
}

/// Categorical-only table: five 3-valued features, the first three with
/// class-dependent distributions, the last two pure noise.
pub fn shades(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let informative: [[[f64; 3]; 2]; 3] = [
        [[0.70, 0.20, 0.10], [0.10, 0.20, 0.70]],
        [[0.60, 0.30, 0.10], [0.15, 0.30, 0.55]],
        [[0.50, 0.40, 0.10], [0.10, 0.40, 0.50]],
    ];
    let uniform = [1.0 / 3.0; 3];
    let cats = ["low", "mid", "high"];
    let features: Vec<FeatureDescriptor> = (0..5)
        .map(|i| FeatureDescriptor::categorical(&format!("f{i}"), &cats))
        .collect();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let mut values = Vec::with_capacity(5);
        for f in 0..5 {
            let table: &[f64; 3] = if f < 3 { &informative[f][c] } else { &uniform };
            values.push(Value::Cat(draw_cat(&mut rng, table)));
        }
        rows.push((values, c));
    }
    assemble("shades", features, class_names(2), rows, seed)
}

/// Mixed numeric/categorical three-class set with ~2% missing feature
/// values, the only corpus member exercising imputation end to end.
pub fn medley(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let centers = [[0.0, 0.0, 0.0], [2.2, 1.6, 0.0], [1.0, 3.0, 2.2]];
    let cat_tables: [[[f64; 3]; 3]; 3] = [
        // feature -> class -> category distribution
        [[0.7, 0.2, 0.1], [0.2, 0.6, 0.2], [0.1, 0.2, 0.7]],
        [[0.5, 0.3, 0.2], [0.3, 0.5, 0.2], [0.2, 0.2, 0.6]],
        [[0.4, 0.4, 0.2], [0.4, 0.2, 0.4], [0.2, 0.4, 0.4]],
    ];
    let cats = ["a", "b", "c"];
    let mut features = numeric_features(&["u", "v", "w"]);
    for i in 0..3 {
        features.push(FeatureDescriptor::categorical(&format!("g{i}"), &cats));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        let mut values = gauss_row(&mut rng, &centers[c], &[0.9, 0.9, 0.9]);
        for f in 0..3 {
            values.push(Value::Cat(draw_cat(&mut rng, &cat_tables[f][c])));
        }
        for v in values.iter_mut() {
            if rng.next_f64() < 0.02 {
                *v = Value::Missing;
            }
        }
        rows.push((values, c));
    }
    assemble("medley", features, class_names(3), rows, seed)
}

/// Four tight classes in a 10-dimensional space where only the first
/// three dimensions carry signal; the other seven are unit noise that
/// dilutes distance-based learners.
pub fn facets(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let informative = [
        [0.0, 0.0, 0.0],
        [2.6, 0.0, 0.0],
        [0.0, 2.6, 0.0],
        [0.0, 0.0, 2.6],
    ];
    let names: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
    let features: Vec<FeatureDescriptor> =
        names.iter().map(|n| FeatureDescriptor::numeric(n)).collect();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 4;
        let mut values = gauss_row(&mut rng, &informative[c], &[0.8, 0.8, 0.8]);
        for _ in 0..7 {
            values.push(Value::Num(rng.gaussian()));
        }
        rows.push((values, c));
    }
    assemble("facets", features, class_names(4), rows, seed)
}

/// Imbalanced three-class blobs (70/20/10).
pub fn tilt(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix64::new(seed);
    let centers = [[0.0, 0.0, 0.0], [2.6, 2.6, 0.0], [0.0, 2.6, 2.6]];
    let counts = [(n * 7) / 10, n / 5, n - (n * 7) / 10 - n / 5];
    let mut rows = Vec::with_capacity(n);
    for (c, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            rows.push((gauss_row(&mut rng, &centers[c], &[1.0, 1.0, 1.0]), c));
        }
    }
    assemble("tilt", numeric_features(&["p", "q", "r"]), class_names(3), rows, seed)
}
