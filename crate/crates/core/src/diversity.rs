//! Behavioral diversity between learners. Two learners are far apart
//! when their out-of-fold predictions disagree often, regardless of
//! which of them is right. The pairwise disagreement rates, averaged
//! over a corpus of datasets, feed agglomerative clustering; cutting
//! the dendrogram and keeping each cluster's most accurate member
//! yields a set of learners that err in different places, which is
//! exactly what a correctness-scoring committee needs.

use crate::data::{ClassId, Dataset};
use crate::learners::{cross_val_scored, LearnerSpec};
use crate::rng::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;

/// Out-of-fold predictions of one learner on one dataset, aligned to
/// instance order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub learner: LearnerSpec,
    pub dataset: String,
    pub predictions: Vec<ClassId>,
}

/// Fraction of instances on which two prediction records disagree.
/// Both-wrong-but-different counts as disagreement; this is a Hamming
/// fraction and therefore a pseudo-metric.
pub fn cod(a: &PredictionRecord, b: &PredictionRecord) -> Result<f64> {
    if a.dataset != b.dataset {
        return Err(Error::Argument(format!(
            "records come from different datasets: {} vs {}",
            a.dataset, b.dataset
        )));
    }
    if a.predictions.len() != b.predictions.len() {
        return Err(Error::Argument(format!(
            "prediction lengths differ: {} vs {}",
            a.predictions.len(),
            b.predictions.len()
        )));
    }
    if a.predictions.is_empty() {
        return Err(Error::Argument("empty prediction records".into()));
    }
    let differing = a
        .predictions
        .iter()
        .zip(&b.predictions)
        .filter(|(x, y)| x != y)
        .count();
    Ok(differing as f64 / a.predictions.len() as f64)
}

/// Pairwise mean disagreement over a corpus. Axes follow the registry
/// order handed in.
#[derive(Debug, Clone)]
pub struct CodMatrix {
    pub learners: Vec<LearnerSpec>,
    values: Vec<Vec<f64>>,
}

impl CodMatrix {
    /// Validates shape, symmetry, the zero diagonal, and the [0,1]
    /// range.
    pub fn new(learners: Vec<LearnerSpec>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = learners.len();
        if n < 2 {
            return Err(Error::Argument("need at least 2 learners".into()));
        }
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Argument(format!("matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::Argument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Argument(format!("entry ({i},{j}) = {v} outside [0,1]")));
                }
                if v != values[j][i] {
                    return Err(Error::Argument(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        Ok(CodMatrix { learners, values })
    }

    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Line-oriented text form: a header, one `learner:` line per axis
    /// entry, then one whitespace-separated row per learner. Floats are
    /// shortest-round-trip, so parsing the text back reproduces the
    /// matrix exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from("cod-matrix v1\n");
        for l in &self.learners {
            out.push_str(&format!("learner: {l}\n"));
        }
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "cod-matrix v1" {
            return Err(Error::Format(format!("unexpected header: {header:?}")));
        }
        let mut learners = Vec::new();
        let mut rows = Vec::new();
        for line in lines {
            if let Some(tok) = line.strip_prefix("learner: ") {
                learners.push(tok.parse()?);
            } else if !line.trim().is_empty() {
                let row: Vec<f64> = line
                    .split_whitespace()
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|_| Error::Format(format!("bad matrix cell {c:?}")))
                    })
                    .collect::<Result<_>>()?;
                rows.push(row);
            }
        }
        CodMatrix::new(learners, rows)
    }
}

/// COD matrix plus the per-learner mean out-of-fold accuracy gathered
/// from the same predictions, which is the representative-selection
/// criterion.
pub struct CorpusScan {
    pub matrix: CodMatrix,
    pub accuracy: Vec<f64>,
}

/// Runs every learner over every corpus dataset out-of-fold and reduces
/// the records to a disagreement matrix and accuracy ranking. Cells run
/// in parallel; cell seeds hang off the learner token and dataset name,
/// and per-dataset results are averaged in sorted-name order, so the
/// outcome does not depend on corpus order or scheduling. Corpus names
/// should be distinct or the order invariance is meaningless.
pub fn scan_corpus(
    registry: &[LearnerSpec],
    corpus: &[Dataset],
    folds: usize,
    seed: u64,
) -> Result<CorpusScan> {
    if registry.len() < 2 {
        return Err(Error::Argument("need at least 2 learners".into()));
    }
    if corpus.is_empty() {
        return Err(Error::Argument("need at least 1 corpus dataset".into()));
    }

    let mut ds_order: Vec<usize> = (0..corpus.len()).collect();
    ds_order.sort_by(|&a, &b| corpus[a].name().cmp(corpus[b].name()));

    let cells: Vec<(usize, usize)> = (0..registry.len())
        .flat_map(|li| ds_order.iter().map(move |&di| (li, di)))
        .collect();
    let outcomes: Vec<(Vec<ClassId>, f64)> = cells
        .par_iter()
        .map(|&(li, di)| {
            let ds = &corpus[di];
            let token = registry[li].to_string();
            let cell_seed = derive_seed(seed, &[&token, ds.name()]);
            let cv = cross_val_scored(&registry[li], ds, folds, cell_seed)?;
            let labels = ds.labels();
            let correct = cv
                .predictions
                .iter()
                .zip(&labels)
                .filter(|(p, t)| p == t)
                .count();
            let acc = correct as f64 / ds.len() as f64;
            Ok((cv.predictions, acc))
        })
        .collect::<Result<_>>()?;

    // outcomes is laid out learner-major in sorted-dataset order.
    let per = ds_order.len();
    let n = registry.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut total = 0.0;
            for d in 0..per {
                let a = &outcomes[i * per + d].0;
                let b = &outcomes[j * per + d].0;
                let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
                total += differing as f64 / a.len() as f64;
            }
            let mean = total / per as f64;
            values[i][j] = mean;
            values[j][i] = mean;
        }
    }
    let accuracy: Vec<f64> = (0..n)
        .map(|i| (0..per).map(|d| outcomes[i * per + d].1).sum::<f64>() / per as f64)
        .collect();

    Ok(CorpusScan {
        matrix: CodMatrix::new(registry.to_vec(), values)?,
        accuracy,
    })
}

/// Mean-disagreement matrix alone; see [`scan_corpus`].
pub fn cod_matrix(
    registry: &[LearnerSpec],
    corpus: &[Dataset],
    folds: usize,
    seed: u64,
) -> Result<CodMatrix> {
    Ok(scan_corpus(registry, corpus, folds, seed)?.matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl std::str::FromStr for Linkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::Argument(format!("unknown linkage {other:?}"))),
        }
    }
}

impl std::fmt::Display for Linkage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

/// One agglomeration step. Cluster ids: leaves are 0..n-1, the step-t
/// merge creates cluster n+t.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

#[derive(Debug, Clone)]
pub struct Dendrogram {
    pub leaves: Vec<LearnerSpec>,
    pub merges: Vec<MergeStep>,
}

/// Bottom-up clustering by rescanning all pairwise cluster distances
/// each step against the original leaf matrix. Linkage distances sum
/// member pairs in ascending leaf order, so equal inputs give bitwise
/// equal heights. Distance ties merge the pair whose (smaller, larger)
/// minimum leaf indices are lexicographically lowest.
pub fn agglomerative_cluster(m: &CodMatrix, linkage: Linkage) -> Dendrogram {
    let n = m.len();
    // Active clusters as (id, ascending leaf members).
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for x in 0..active.len() {
            for y in (x + 1)..active.len() {
                let d = cluster_distance(m, &active[x].1, &active[y].1, linkage);
                let key = (active[x].1[0].min(active[y].1[0]), active[x].1[0].max(active[y].1[0]));
                let replace = match &best {
                    None => true,
                    Some((bd, bkey, _, _)) => d < *bd || (d == *bd && key < *bkey),
                };
                if replace {
                    best = Some((d, key, x, y));
                }
            }
        }
        let (height, _, x, y) = best.expect("at least two active clusters");
        let (id_b, members_b) = active.remove(y);
        let (id_a, members_a) = active.remove(x);
        let mut merged = members_a;
        merged.extend(members_b);
        merged.sort_unstable();
        merges.push(MergeStep {
            a: id_a.min(id_b),
            b: id_a.max(id_b),
            height,
        });
        active.push((n + step, merged));
    }

    Dendrogram {
        leaves: m.learners.clone(),
        merges,
    }
}

fn cluster_distance(m: &CodMatrix, a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    match linkage {
        Linkage::Single => {
            let mut best = f64::INFINITY;
            for &i in a {
                for &j in b {
                    best = best.min(m.value(i, j));
                }
            }
            best
        }
        Linkage::Complete => {
            let mut best = f64::NEG_INFINITY;
            for &i in a {
                for &j in b {
                    best = best.max(m.value(i, j));
                }
            }
            best
        }
        Linkage::Average => {
            let mut total = 0.0;
            for &i in a {
                for &j in b {
                    total += m.value(i, j);
                }
            }
            total / (a.len() * b.len()) as f64
        }
    }
}

impl Dendrogram {
    /// Text form mirroring the matrix format: header, leaves, then one
    /// `merge: a b height` line per step in merge order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("dendrogram v1\n");
        for l in &self.leaves {
            out.push_str(&format!("leaf: {l}\n"));
        }
        for m in &self.merges {
            out.push_str(&format!("merge: {} {} {}\n", m.a, m.b, m.height));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "dendrogram v1" {
            return Err(Error::Format(format!("unexpected header: {header:?}")));
        }
        let mut leaves = Vec::new();
        let mut merges = Vec::new();
        for line in lines {
            if let Some(tok) = line.strip_prefix("leaf: ") {
                leaves.push(tok.parse()?);
            } else if let Some(rest) = line.strip_prefix("merge: ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Format(format!("bad merge line {line:?}")));
                }
                let a = parts[0]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad merge id {:?}", parts[0])))?;
                let b = parts[1]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad merge id {:?}", parts[1])))?;
                let height = parts[2]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad merge height {:?}", parts[2])))?;
                merges.push(MergeStep { a, b, height });
            } else if !line.trim().is_empty() {
                return Err(Error::Format(format!("unexpected line {line:?}")));
            }
        }
        Ok(Dendrogram { leaves, merges })
    }

    fn replay(&self, keep: impl Fn(usize, &MergeStep) -> bool) -> Vec<Vec<usize>> {
        let n = self.leaves.len();
        let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
        for (t, step) in self.merges.iter().enumerate() {
            if !keep(t, step) {
                break;
            }
            let b = clusters[step.b].take().expect("merge ids are live");
            let a = clusters[step.a].take().expect("merge ids are live");
            let mut merged = a;
            merged.extend(b);
            merged.sort_unstable();
            clusters.push(Some(merged));
        }
        let mut out: Vec<Vec<usize>> = clusters.into_iter().flatten().collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

/// Partition induced by dropping merges above the cut. Clusters come
/// back as ascending leaf-index lists, ordered by smallest member.
pub fn cut_dendrogram(d: &Dendrogram, height: f64) -> Vec<Vec<usize>> {
    // Merges are height-sorted, so stopping at the first too-high merge
    // drops exactly the merges above the cut.
    d.replay(|_, step| step.height <= height)
}

/// Partition with exactly k clusters, applying the first n-k merges.
pub fn cut_to_k(d: &Dendrogram, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = d.leaves.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("cannot cut {n} leaves into {k} clusters")));
    }
    Ok(d.replay(|t, _| t < n - k))
}

/// One leaf per cluster: the member with the highest criterion value,
/// ties to the lower leaf index. Returned in ascending leaf order.
pub fn select_representatives(partition: &[Vec<usize>], criterion: &[f64]) -> Vec<usize> {
    let mut reps: Vec<usize> = partition
        .iter()
        .map(|cluster| {
            let mut best = cluster[0];
            for &i in &cluster[1..] {
                if criterion[i] > criterion[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    reps.sort_unstable();
    reps
}

/// How to cut the dendrogram when deriving a diverse set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutRule {
    Height(f64),
    Clusters(usize),
}

/// Default cut height; tuned for COD dendrograms of modestly sized
/// registries, adjustable per run.
pub const DEFAULT_CUT: CutRule = CutRule::Height(0.18);

/// The full pipeline: scan, cluster, cut, and keep each cluster's most
/// accurate member. Logs the matrix, the partition, and the chosen set.
pub fn diverse_set(
    registry: &[LearnerSpec],
    corpus: &[Dataset],
    folds: usize,
    seed: u64,
    linkage: Linkage,
    cut: CutRule,
) -> Result<Vec<LearnerSpec>> {
    let scan = scan_corpus(registry, corpus, folds, seed)?;
    let dendro = agglomerative_cluster(&scan.matrix, linkage);
    let partition = match cut {
        CutRule::Height(h) => {
            if h < 0.0 {
                return Err(Error::Argument(format!("negative cut height {h}")));
            }
            cut_dendrogram(&dendro, h)
        }
        CutRule::Clusters(k) => cut_to_k(&dendro, k)?,
    };
    let reps = select_representatives(&partition, &scan.accuracy);
    for cluster in &partition {
        let names: Vec<String> = cluster.iter().map(|&i| registry[i].to_string()).collect();
        log::info!("cluster: {}", names.join(", "));
    }
    let set: Vec<LearnerSpec> = reps.iter().map(|&i| registry[i].clone()).collect();
    let names: Vec<String> = set.iter().map(|l| l.to_string()).collect();
    log::info!("diverse set: {}", names.join(", "));
    Ok(set)
}
