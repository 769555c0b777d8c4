//! Release gate: each test checks one end-to-end guarantee the tool
//! advertises and prints a PASS line with timing. Run
//! `cargo test -p labelsift-cli --test acceptance -- --nocapture`
//! to watch the lines as they complete. The heavier checks drive the
//! full experiment harness over the bundled corpus, so this target is
//! minutes, not seconds.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::Instant;

use labelsift::data::{
    inject_label_noise, stratified_split, synth, Dataset, FeatureDescriptor, Instance, NoiseSpec,
    Value,
};
use labelsift::diversity::{agglomerative_cluster, cod, CodMatrix, Linkage, PredictionRecord};
use labelsift::ensemble::VotingEnsemble;
use labelsift::eval::report::mean_percent_reduction;
use labelsift::eval::{
    percent_reduction_in_error, run_experiment, wilcoxon_signed_rank_mode, ExperimentConfig,
    Technique, WilcoxonMode,
};
use labelsift::learners::{registry, train, LearnerSpec};
use labelsift::noiseid::{estimate_correctness, l_filter, CorrectnessScores};
use labelsift::rng::{derive_seed, SplitMix64};

fn check<F>(label: &str, f: F)
where
    F: FnOnce() -> String + UnwindSafe,
{
    let start = Instant::now();
    match catch_unwind(f) {
        Ok(detail) => {
            println!("PASS  {label}  ({detail}; {:.1}s)", start.elapsed().as_secs_f64());
        }
        Err(e) => {
            println!("FAIL  {label}");
            resume_unwind(e);
        }
    }
}

// A deliberately naive clustering reference: clusters live in an
// id-keyed map and every pairwise distance is recomputed from the leaf
// matrix at every step. The production active list stays sorted by id,
// so iterating ids ascending reproduces its float summation order and
// heights must come out bitwise equal.
fn rescan_merges(m: &CodMatrix, linkage: Linkage) -> Vec<(usize, usize, f64)> {
    let n = m.len();
    let mut clusters: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let ids: Vec<usize> = clusters.keys().copied().collect();
        let mut candidates = Vec::new();
        for x in 0..ids.len() {
            for y in (x + 1)..ids.len() {
                let a = &clusters[&ids[x]];
                let b = &clusters[&ids[y]];
                let d = rescan_distance(m, a, b, linkage);
                let key = (a[0].min(b[0]), a[0].max(b[0]));
                candidates.push((d, key, ids[x], ids[y]));
            }
        }
        candidates.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap().then(p.1.cmp(&q.1)));
        let (height, _, ia, ib) = candidates[0];
        let mut merged = clusters.remove(&ia).unwrap();
        merged.extend(clusters.remove(&ib).unwrap());
        merged.sort_unstable();
        clusters.insert(n + step, merged);
        out.push((ia.min(ib), ia.max(ib), height));
    }
    out
}

fn rescan_distance(m: &CodMatrix, a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let pairs = a.iter().flat_map(|&i| b.iter().map(move |&j| m.value(i, j)));
    match linkage {
        Linkage::Single => pairs.fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs.fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => pairs.sum::<f64>() / (a.len() * b.len()) as f64,
    }
}

#[test]
fn merge_trace_matches_exhaustive_rescan() {
    check("clustering merge trace matches the exhaustive rescan oracle", || {
        let start = Instant::now();
        let mut rng = SplitMix64::new(0xC1);
        let axes = registry();
        let mut clusterings = 0usize;
        for round in 0..200usize {
            let n = 4 + round % 4;
            let mut values = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    // Snap a third of the entries onto a coarse grid so
                    // distance ties actually occur and the tie-break
                    // path gets exercised.
                    let v = if rng.below(3) == 0 {
                        rng.below(6) as f64 / 10.0
                    } else {
                        rng.next_f64()
                    };
                    values[i][j] = v;
                    values[j][i] = v;
                }
            }
            let m = CodMatrix::new(axes[..n].to_vec(), values).unwrap();
            for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
                let got = agglomerative_cluster(&m, linkage);
                let want = rescan_merges(&m, linkage);
                assert_eq!(got.merges.len(), want.len());
                for (g, w) in got.merges.iter().zip(&want) {
                    assert_eq!((g.a, g.b), (w.0, w.1), "merge pair diverged");
                    assert_eq!(
                        g.height.to_bits(),
                        w.2.to_bits(),
                        "height diverged: {} vs {}",
                        g.height,
                        w.2
                    );
                }
                clusterings += 1;
            }
        }
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 5.0, "oracle sweep took {secs:.1}s, budget is 5s");
        format!("{clusterings} clusterings, exact ids and bitwise heights")
    });
}

// Independent tail computation: midrank formula instead of a sort
// (doubled rank 2r = 2*smaller + equal + 1, an integer), full sign-mask
// enumeration instead of the subset-sum recurrence.
fn enumerated_tail(a: &[f64], b: &[f64]) -> (f64, f64, usize) {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    let n = d.len();
    assert!(n <= 20, "enumeration fixture too large");
    let doubled: Vec<u64> = (0..n)
        .map(|i| {
            let less = d.iter().filter(|v| v.abs() < d[i].abs()).count() as u64;
            let eq = d.iter().filter(|v| v.abs() == d[i].abs()).count() as u64;
            2 * less + eq + 1
        })
        .collect();
    let total: u64 = doubled.iter().sum();
    let w2_plus: u64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| doubled[i]).sum();
    let w2 = w2_plus.min(total - w2_plus);
    let mut below = 0u64;
    for mask in 0u64..(1u64 << n) {
        let s: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        if s <= w2 {
            below += 1;
        }
    }
    (w2 as f64 / 2.0, below as f64 / (1u64 << n) as f64, n)
}

#[test]
fn wilcoxon_tail_matches_sign_enumeration() {
    check("wilcoxon tails match full sign enumeration", || {
        let mut rng = SplitMix64::new(0x3AB);
        let mut compared = 0usize;
        for _ in 0..100 {
            // Quarter-step grids force tied magnitudes and zero
            // differences, the two conventions worth pinning.
            let a: Vec<f64> = (0..12).map(|_| rng.below(13) as f64 * 0.25).collect();
            let b: Vec<f64> = (0..12).map(|_| rng.below(13) as f64 * 0.25).collect();
            let (stat, p, n) = enumerated_tail(&a, &b);
            let got = wilcoxon_signed_rank_mode(&a, &b, WilcoxonMode::Exact).unwrap();
            assert_eq!(got.n, n);
            assert_eq!(got.statistic, stat, "statistic diverged on {a:?} vs {b:?}");
            assert!(
                (got.p - p).abs() <= 1e-12,
                "exact tail diverged: {} vs {} on {a:?} vs {b:?}",
                got.p,
                p
            );
            compared += 1;
        }

        // All-positive differences: the statistic collapses to zero and
        // only the empty sign set sits at or below it.
        let a: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let b = vec![0.0; 10];
        let got = wilcoxon_signed_rank_mode(&a, &b, WilcoxonMode::Exact).unwrap();
        assert_eq!(got.statistic, 0.0);
        assert!((got.p - 1.0 / 1024.0).abs() <= 1e-12);

        // Normal approximation at 20 pairs, checked against the same
        // enumeration: one balanced fixture with every magnitude tied
        // once, one with a thinner tail around p = 0.04.
        for diffs in [
            (1..=10)
                .flat_map(|m| [m as f64 * 0.5, -(m as f64) * 0.5])
                .collect::<Vec<f64>>(),
            (1..=20)
                .map(|i| if i % 2 == 0 && i <= 14 { -(i as f64) } else { i as f64 })
                .collect::<Vec<f64>>(),
        ] {
            let zeros = vec![0.0; diffs.len()];
            let (_, p_enum, n) = enumerated_tail(&diffs, &zeros);
            assert_eq!(n, 20);
            let approx = wilcoxon_signed_rank_mode(&diffs, &zeros, WilcoxonMode::Normal).unwrap();
            assert!(
                (approx.p - p_enum).abs() < 0.005,
                "normal tail off by {:.4} (approx {:.4}, enumerated {:.4})",
                (approx.p - p_enum).abs(),
                approx.p,
                p_enum
            );
        }
        format!("{compared} random fixtures exact to 1e-12, normal within 5e-3 at n=20")
    });
}

#[test]
fn correctness_scores_on_vote_grid() {
    check("correctness scores sit exactly on the vote-count grid", || {
        let pool = [
            LearnerSpec::knn(1),
            LearnerSpec::naive_bayes(),
            LearnerSpec::decision_tree(),
        ];
        let mut rng = SplitMix64::new(0x9C0);
        let mut checked = 0usize;
        for round in 0..1000usize {
            let n = 8 + rng.below(23) as usize;
            let seed = rng.next_u64();
            let ds = if round % 2 == 0 {
                synth::two_blobs(n, seed)
            } else {
                synth::trio(n, seed)
            };
            let members = 1 + rng.below(3) as usize;
            let specs: Vec<LearnerSpec> = (0..members)
                .map(|_| pool[rng.below(pool.len() as u64) as usize].clone())
                .collect();
            let folds = 2 + rng.below(3) as usize;
            let s = estimate_correctness(&specs, &ds, folds, rng.next_u64()).unwrap();
            assert_eq!(s.ensemble_size, members);
            for &score in &s.scores {
                let on_grid = (0..=members).any(|k| score == k as f64 / members as f64);
                assert!(on_grid, "score {score} off the /{members} grid");
                checked += 1;
            }
        }
        format!("{checked} scores across 1000 fixtures, all equal to k/|ensemble|")
    });
}

#[test]
fn error_reduction_reference_points() {
    check("error-reduction reference points reproduce", || {
        let worse = percent_reduction_in_error(76.83, 79.31).unwrap();
        assert!(
            (worse - -0.1199).abs() < 1e-4,
            "expected about -0.1199, got {worse:.6}"
        );
        let better = percent_reduction_in_error(78.98, 78.35).unwrap();
        assert!(
            (better - 0.0291).abs() < 1e-4,
            "expected about +0.0291, got {better:.6}"
        );
        assert_eq!(percent_reduction_in_error(99.0, 100.0), None);
        format!("two signed references within 1e-4, perfect baseline yields None")
    });
}

#[test]
fn filter_precision_recall_on_noisy_blobs() {
    check("noise filter keeps precision and recall at or above 0.8", || {
        let start = Instant::now();
        let ds = synth::by_name("blobs2").unwrap();
        let judges = registry();
        let runs = 10u64;
        let (mut p_total, mut r_total) = (0.0, 0.0);
        for run in 0..runs {
            let seed = derive_seed(0xF11, &["run", &run.to_string()]);
            let (noisy, flipped) =
                inject_label_noise(&ds, &NoiseSpec::new(0.2, derive_seed(seed, &["noise"])))
                    .unwrap();
            let scores =
                estimate_correctness(&judges, &noisy, 10, derive_seed(seed, &["cv"])).unwrap();
            let outcome = l_filter(&noisy, &scores, 0.5).unwrap();
            let truly_bad: std::collections::HashSet<usize> = flipped.iter().copied().collect();
            let hits = outcome.removed.iter().filter(|i| truly_bad.contains(i)).count();
            assert!(!outcome.removed.is_empty(), "filter removed nothing");
            p_total += hits as f64 / outcome.removed.len() as f64;
            r_total += hits as f64 / flipped.len() as f64;
        }
        let (precision, recall) = (p_total / runs as f64, r_total / runs as f64);
        assert!(precision >= 0.8, "mean precision {precision:.3} below 0.8");
        assert!(recall >= 0.8, "mean recall {recall:.3} below 0.8");
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 120.0, "filter sweep took {secs:.1}s, budget is 120s");
        format!("20% corrupted blobs2, precision {precision:.3}, recall {recall:.3}")
    });
}

#[test]
fn diverse_vote_beats_trio_under_noise() {
    check("diverse-vote ensemble outscores the fixed trio under heavy noise", || {
        let start = Instant::now();
        let mut cfg = ExperimentConfig::new(synth::desk_corpus());
        cfg.techniques = vec![Technique::None, Technique::LEnsemble, Technique::ThreeEnsemble];
        cfg.levels = vec![0.0, 0.4];
        cfg.runs = 10;
        cfg.seed = 0x6A11;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.error_count(), 0, "some cells failed");

        let noisy_vote = report.mean_accuracy("-", Technique::LEnsemble, 0.4).unwrap();
        let noisy_trio = report.mean_accuracy("-", Technique::ThreeEnsemble, 0.4).unwrap();
        assert!(
            noisy_vote > noisy_trio,
            "diverse vote {noisy_vote:.4} did not beat trio {noisy_trio:.4} at 40% noise"
        );

        let clean_vote = report.mean_accuracy("-", Technique::LEnsemble, 0.0).unwrap();
        for spec in registry() {
            let token = spec.token();
            let base = report.mean_accuracy(&token, Technique::None, 0.0).unwrap();
            assert!(
                clean_vote + 1e-9 >= base,
                "clean vote {clean_vote:.4} below plain {token} at {base:.4}"
            );
        }
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 1800.0, "corpus sweep took {secs:.1}s, budget is 1800s");
        format!(
            "40% noise: vote {:.2} vs trio {:.2}; clean vote {:.2} tops every base learner",
            noisy_vote * 100.0,
            noisy_trio * 100.0,
            clean_vote * 100.0
        )
    });
}

#[test]
fn treatments_cut_error_at_high_noise() {
    check("filter and weight treatments cut error at high noise", || {
        let mut cfg = ExperimentConfig::new(synth::desk_corpus());
        cfg.learners = vec![LearnerSpec::decision_tree(), LearnerSpec::knn(5)];
        cfg.techniques = vec![Technique::None, Technique::LFilter, Technique::LWeight];
        cfg.levels = vec![0.3, 0.4];
        cfg.runs = 10;
        cfg.seed = 0x6A12;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.error_count(), 0, "some cells failed");

        let mut details = Vec::new();
        for spec in &cfg.learners {
            let token = spec.token();
            for technique in [Technique::LFilter, Technique::LWeight] {
                for &level in &cfg.levels {
                    let re = mean_percent_reduction(&report, &token, technique, level).unwrap();
                    assert!(
                        re > 0.0,
                        "{technique} on {token} at {level}: mean reduction {re:.4} not positive"
                    );
                    details.push(format!("{re:+.3}"));
                }
            }
        }
        format!("8 learner/treatment/level cells, reductions {}", details.join(" "))
    });
}

#[test]
fn randomized_structural_invariants() {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    fn runner() -> TestRunner {
        TestRunner::new(Config {
            cases: 128,
            failure_persistence: None,
            ..Config::default()
        })
    }

    fn labeled(counts: &[usize]) -> Dataset {
        let classes: Vec<String> = (0..counts.len()).map(|c| format!("c{c}")).collect();
        let mut instances = Vec::new();
        for (c, &k) in counts.iter().enumerate() {
            for i in 0..k {
                instances.push(Instance {
                    values: vec![Value::Num((c * 1000 + i) as f64)],
                    label: c,
                });
            }
        }
        Dataset::new("prop", vec![FeatureDescriptor::numeric("x")], classes, instances).unwrap()
    }

    check("randomized structural invariants hold", || {
        let record = |tag: &str, predictions: &[usize]| PredictionRecord {
            learner: LearnerSpec::knn(1),
            dataset: format!("prop-{tag}"),
            predictions: predictions.to_vec(),
        };

        // Disagreement is a pseudo-metric: symmetric, zero on the
        // diagonal, triangle inequality.
        runner()
            .run(
                &(1usize..=60, 2usize..=5).prop_flat_map(|(n, c)| {
                    (
                        prop::collection::vec(0..c, n),
                        prop::collection::vec(0..c, n),
                        prop::collection::vec(0..c, n),
                    )
                }),
                |(pa, pb, pc)| {
                    let (ra, rb, rc) = (record("d", &pa), record("d", &pb), record("d", &pc));
                    let ab = cod(&ra, &rb).unwrap();
                    let ba = cod(&rb, &ra).unwrap();
                    let ac = cod(&ra, &rc).unwrap();
                    let bc = cod(&rb, &rc).unwrap();
                    prop_assert_eq!(ab, ba);
                    prop_assert_eq!(cod(&ra, &ra).unwrap(), 0.0);
                    prop_assert!(ac <= ab + bc + 1e-12);
                    Ok(())
                },
            )
            .unwrap_or_else(|e| panic!("disagreement metric property failed: {e}"));

        // Raising the removal threshold never removes new instances.
        // One score-1.0 sentinel per class keeps the class-retention
        // guard idle; the guard's own behavior has dedicated tests.
        runner()
            .run(
                &(1usize..=6, 2usize..=40).prop_flat_map(|(l, n)| {
                    (
                        Just(l),
                        prop::collection::vec(0..=l, n),
                        prop::collection::vec(0usize..2, n),
                        0.05f64..=1.0,
                        0.05f64..=1.0,
                    )
                }),
                |(l, ks, mut labels, t1, t2)| {
                    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                    labels[0] = 0;
                    labels[1] = 1;
                    let mut scores: Vec<f64> =
                        ks.iter().map(|&k| k as f64 / l as f64).collect();
                    scores[0] = 1.0;
                    scores[1] = 1.0;
                    let instances: Vec<Instance> = labels
                        .iter()
                        .enumerate()
                        .map(|(i, &label)| Instance {
                            values: vec![Value::Num(i as f64)],
                            label,
                        })
                        .collect();
                    let ds = Dataset::new(
                        "prop",
                        vec![FeatureDescriptor::numeric("x")],
                        vec!["a".into(), "b".into()],
                        instances,
                    )
                    .unwrap();
                    let s = CorrectnessScores {
                        scores,
                        ensemble_size: l,
                    };
                    let loose = l_filter(&ds, &s, lo).unwrap();
                    let strict = l_filter(&ds, &s, hi).unwrap();
                    for i in &strict.removed {
                        prop_assert!(
                            loose.removed.contains(i),
                            "index {} removed at {:.2} but kept at {:.2}",
                            i,
                            hi,
                            lo
                        );
                    }
                    Ok(())
                },
            )
            .unwrap_or_else(|e| panic!("filter monotonicity property failed: {e}"));

        // Committee votes ignore member order. Training is
        // deterministic per (spec, data, seed), so rebuilding the same
        // members in permuted order isolates the voting logic.
        runner()
            .run(
                &(
                    any::<u64>(),
                    16usize..=40,
                    prop::collection::vec(0usize..3, 3),
                    0usize..6,
                ),
                |(seed, n, picks, which)| {
                    let pool = [
                        LearnerSpec::knn(1),
                        LearnerSpec::naive_bayes(),
                        LearnerSpec::decision_tree(),
                    ];
                    let ds = synth::two_blobs(n, seed);
                    let specs: Vec<&LearnerSpec> = picks.iter().map(|&i| &pool[i]).collect();
                    let fit = |i: usize| {
                        train(specs[i], &ds, None, derive_seed(seed, &["m", &i.to_string()]))
                            .unwrap()
                    };
                    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                    let straight: Vec<_> = (0..3).map(fit).collect();
                    let permuted: Vec<_> = perms[which].iter().map(|&i| fit(i)).collect();
                    let priors = straight[0].priors().to_vec();
                    let one = VotingEnsemble::from_members(straight, priors.clone()).unwrap();
                    let two = VotingEnsemble::from_members(permuted, priors).unwrap();
                    for inst in ds.instances() {
                        prop_assert_eq!(one.vote(inst).unwrap(), two.vote(inst).unwrap());
                    }
                    Ok(())
                },
            )
            .unwrap_or_else(|e| panic!("vote order property failed: {e}"));

        // Stratified splits hold every class within one instance of its
        // proportional share, never empty a class, and partition.
        runner()
            .run(
                &(
                    prop::collection::vec(1usize..=15, 2..=4),
                    0.15f64..=0.85,
                    any::<u64>(),
                ),
                |(counts, fraction, seed)| {
                    let ds = labeled(&counts);
                    let (tr, te) = stratified_split(&ds, fraction, seed).unwrap();
                    prop_assert_eq!(tr.len() + te.len(), ds.len());
                    for (c, &total) in counts.iter().enumerate() {
                        let in_train = tr.labels().iter().filter(|&&l| l == c).count();
                        let in_test = te.labels().iter().filter(|&&l| l == c).count();
                        prop_assert_eq!(in_train + in_test, total);
                        prop_assert!(in_train >= 1);
                        prop_assert!(
                            (in_train as f64 - fraction * total as f64).abs() <= 1.0,
                            "class {} got {} of {} at fraction {:.2}",
                            c,
                            in_train,
                            total,
                            fraction
                        );
                    }
                    Ok(())
                },
            )
            .unwrap_or_else(|e| panic!("stratified split property failed: {e}"));

        // Label corruption hits exactly the rounded count, always lands
        // on a different class, and leaves features untouched.
        runner()
            .run(
                &(
                    prop::collection::vec(1usize..=20, 2..=4),
                    0.0f64..=1.0,
                    any::<u64>(),
                ),
                |(counts, rate, seed)| {
                    let ds = labeled(&counts);
                    let (noisy, flipped) =
                        inject_label_noise(&ds, &NoiseSpec::new(rate, seed)).unwrap();
                    let expected = ((rate * ds.len() as f64) + 0.5).floor() as usize;
                    prop_assert_eq!(flipped.len(), expected);
                    prop_assert!(flipped.windows(2).all(|w| w[0] < w[1]));
                    let mut hit = vec![false; ds.len()];
                    for &i in &flipped {
                        hit[i] = true;
                    }
                    for i in 0..ds.len() {
                        let before = &ds.instances()[i];
                        let after = &noisy.instances()[i];
                        prop_assert_eq!(&before.values, &after.values);
                        if hit[i] {
                            prop_assert_ne!(before.label, after.label);
                        } else {
                            prop_assert_eq!(before.label, after.label);
                        }
                    }
                    Ok(())
                },
            )
            .unwrap_or_else(|e| panic!("noise injection property failed: {e}"));

        format!("5 properties x 128 cases")
    });
}

#[test]
fn records_byte_stable_across_reruns() {
    check("experiment records are byte-stable across reruns and thread counts", || {
        let bin = env!("CARGO_BIN_EXE_labelsift");
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("exp.toml");
        std::fs::write(
            &cfg,
            "datasets = [\"trio\", \"quadrants\"]\n\
             learners = [\"knn:k=1\", \"nb\"]\n\
             techniques = [\"none\", \"l_weight\"]\n\
             diverse = [\"knn:k=1\", \"nb\", \"tree\"]\n\
             levels = [0.0, 0.2]\n\
             runs = 2\n\
             folds = 5\n\
             seed = 3\n",
        )
        .unwrap();

        let run = |config: &std::path::Path, out: &str, jobs: Option<&str>| {
            let outdir = dir.path().join(out);
            let mut command = std::process::Command::new(bin);
            command
                .arg("experiment")
                .arg("--config")
                .arg(config)
                .arg("--out")
                .arg(&outdir);
            if let Some(j) = jobs {
                command.arg("--jobs").arg(j);
            }
            let result = command.output().unwrap();
            assert!(
                result.status.success(),
                "experiment run failed: {}",
                String::from_utf8_lossy(&result.stderr)
            );
            std::fs::read(outdir.join("records.txt")).unwrap()
        };

        let first = run(&cfg, "out1", None);
        let manifest = dir.path().join("out1/manifest.toml");
        let second = run(&manifest, "out2", None);
        let third = run(&manifest, "out3", Some("3"));

        assert!(first.starts_with(b"experiment-records v1\n"));
        assert_eq!(first, second, "manifest rerun changed the records");
        assert_eq!(first, third, "thread count changed the records");
        format!("{} record bytes identical across 3 runs, one with --jobs 3", first.len())
    });
}
