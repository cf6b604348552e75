//! Defense baselines a data thief might run to scrub poison before
//! training: spectral signatures and activation clustering.
//!
//! Both operate on per-instance representation vectors (e.g. hidden-state
//! activations averaged over an instance) supplied as JSONL. Neither knows
//! which instances are poisoned; [`evaluate_detection`] scores a flagged
//! set against ground truth with false-positive and false-negative rates.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One instance's representation vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Representation {
    pub id: String,
    pub vector: Vec<f64>,
}

/// A validated, dimension-consistent collection of representations.
#[derive(Debug, Clone)]
pub struct RepresentationSet {
    reps: Vec<Representation>,
    dim: usize,
}

impl RepresentationSet {
    /// Validate that all vectors share one dimension and are finite.
    pub fn new(reps: Vec<Representation>) -> Result<Self> {
        let dim = reps.first().map(|r| r.vector.len()).unwrap_or(0);
        for rep in &reps {
            if rep.vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    id: rep.id.clone(),
                    expected: dim,
                    got: rep.vector.len(),
                });
            }
            if rep.vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteVector { id: rep.id.clone() });
            }
        }
        Ok(RepresentationSet { reps, dim })
    }

    /// Load from JSONL, one `{"id": ..., "vector": [...]}` per line.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reps = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rep: Representation =
                serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            reps.push(rep);
        }
        Self::new(reps)
    }

    /// Write as JSONL in input order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for rep in &self.reps {
            let line = serde_json::to_string(rep).expect("representation serializes");
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> Vec<String> {
        self.reps.iter().map(|r| r.id.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Representation> {
        self.reps.iter()
    }

    /// Rows with the column mean subtracted.
    fn centered(&self) -> Vec<Vec<f64>> {
        let n = self.reps.len();
        let mut mean = vec![0.0; self.dim];
        for rep in &self.reps {
            for (m, x) in mean.iter_mut().zip(&rep.vector) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        self.reps
            .iter()
            .map(|rep| {
                rep.vector
                    .iter()
                    .zip(&mean)
                    .map(|(x, m)| x - m)
                    .collect()
            })
            .collect()
    }
}

const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 1000;
const KMEANS_MAX_ITERS: usize = 300;
const KMEANS_REL_TOL: f64 = 1e-6;

/// `ceil` that forgives float fuzz: values within 1e-9 of an integer are
/// rounded instead of bumped up (1.5 * 0.1 * 1000 must give 150, not 151).
pub(crate) fn float_safe_ceil(raw: f64) -> usize {
    let snapped = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    snapped.max(0.0) as usize
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Top right-singular vector of `rows` by power iteration on the Gram
/// matrix (computed implicitly as `Mᵀ(Mv)`). Returns the zero vector when
/// the matrix itself is (numerically) zero.
fn top_right_singular_vector(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    // Deterministic pseudo-random start; a fixed all-ones start could be
    // orthogonal to the top component on adversarially symmetric data.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();
    let n = norm(&v);
    if n == 0.0 {
        return vec![0.0; dim];
    }
    for x in &mut v {
        *x /= n;
    }
    for _ in 0..POWER_MAX_ITERS {
        // y = Mv, w = Mᵀy
        let y: Vec<f64> = rows.iter().map(|row| dot(row, &v)).collect();
        let mut w = vec![0.0; dim];
        for (row, yi) in rows.iter().zip(&y) {
            for (wj, xj) in w.iter_mut().zip(row) {
                *wj += xj * yi;
            }
        }
        let wn = norm(&w);
        if wn < 1e-300 {
            return vec![0.0; dim];
        }
        for x in &mut w {
            *x /= wn;
        }
        // The Gram matrix is positive semi-definite, so the iteration
        // converges without sign oscillation.
        let delta: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = w;
        if delta < POWER_TOL {
            break;
        }
    }
    v
}

/// Outcome of a spectral-signature pass.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Outlier score per id, in input order.
    pub scores: Vec<(String, f64)>,
    /// Flagged ids in flagging order (score descending, ties by id).
    pub flagged: Vec<String>,
    pub epsilon: f64,
    pub n_flagged: usize,
}

/// Spectral signatures: center the representations, project onto the top
/// right-singular vector, and flag the `ceil(1.5 * epsilon * n)` instances
/// with the largest squared projection. `epsilon` is the assumed upper
/// bound on the poison fraction.
pub fn spectral_signature(set: &RepresentationSet, epsilon: f64) -> Result<SpectralReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if set.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "spectral signature needs at least 2 representations, got {}",
            set.len()
        )));
    }
    let rows = set.centered();
    let v = top_right_singular_vector(&rows, set.dim());
    let scores: Vec<(String, f64)> = set
        .iter()
        .zip(&rows)
        .map(|(rep, row)| {
            let proj = dot(row, &v);
            (rep.id.clone(), proj * proj)
        })
        .collect();
    let k = float_safe_ceil(1.5 * epsilon * set.len() as f64).min(set.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .1
            .partial_cmp(&scores[a].1)
            .expect("scores are finite")
            .then_with(|| scores[a].0.cmp(&scores[b].0))
    });
    let flagged: Vec<String> = order[..k].iter().map(|&i| scores[i].0.clone()).collect();
    Ok(SpectralReport {
        scores,
        n_flagged: flagged.len(),
        flagged,
        epsilon,
    })
}

/// Outcome of an activation-clustering pass.
#[derive(Debug, Clone, Serialize)]
pub struct ClusteringReport {
    /// Flagged ids, ascending.
    pub flagged: Vec<String>,
    /// Cluster index (0 or 1) per id, in input order.
    pub assignments: Vec<(String, usize)>,
    pub cluster_sizes: [usize; 2],
    /// Within-cluster sum of squares after each k-means iteration.
    pub inertia_trace: Vec<f64>,
    /// Principal components actually used: `min(10, dim, n)`.
    pub n_components: usize,
}

/// Top-`k` principal components by deflated power iteration. Returns the
/// data projected onto them (stopping early if the residual is zero).
fn project_onto_principal_components(rows: &[Vec<f64>], dim: usize, k: usize) -> Vec<Vec<f64>> {
    let mut working: Vec<Vec<f64>> = rows.to_vec();
    let mut components: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let v = top_right_singular_vector(&working, dim);
        if norm(&v) == 0.0 {
            break;
        }
        // Deflate: remove the found component from the working matrix.
        for row in &mut working {
            let proj = dot(row, &v);
            for (x, vj) in row.iter_mut().zip(&v) {
                *x -= proj * vj;
            }
        }
        components.push(v);
    }
    rows.iter()
        .map(|row| components.iter().map(|c| dot(row, c)).collect())
        .collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Activation clustering: project centered representations onto the top
/// 10 principal components, split them with 2-means, and flag the smaller
/// cluster.
///
/// Tie-breaking is deterministic: equal-sized clusters flag the one whose
/// members sit further (on average) from the global centroid; if that ties
/// too, the cluster containing the lexicographically smallest id is kept
/// clean. A degenerate empty cluster means nothing is flagged.
pub fn activation_clustering(set: &RepresentationSet) -> Result<ClusteringReport> {
    if set.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "activation clustering needs at least 2 representations, got {}",
            set.len()
        )));
    }
    let rows = set.centered();
    let k = 10.min(set.dim()).min(set.len());
    let points = project_onto_principal_components(&rows, set.dim(), k);
    let n_components = points.first().map(|p| p.len()).unwrap_or(0);
    let ids = set.ids();

    // Deterministic farthest-pair init: the point with the largest norm,
    // then the point farthest from it. Ties prefer the smaller id.
    let pick_best = |score_of: &dyn Fn(usize) -> f64| -> usize {
        let mut best = 0usize;
        for i in 1..points.len() {
            let (si, sb) = (score_of(i), score_of(best));
            if si > sb || (si == sb && ids[i] < ids[best]) {
                best = i;
            }
        }
        best
    };
    let origin = vec![0.0; n_components];
    let first = pick_best(&|i| squared_distance(&points[i], &origin));
    let second = pick_best(&|i| squared_distance(&points[i], &points[first]));
    let mut centers = [points[first].clone(), points[second].clone()];

    let mut assignments = vec![0usize; points.len()];
    let mut inertia_trace = Vec::new();
    let mut prev_inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITERS {
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let d0 = squared_distance(p, &centers[0]);
            let d1 = squared_distance(p, &centers[1]);
            // Ties go to cluster 0 for determinism.
            assignments[i] = if d1 < d0 { 1 } else { 0 };
            inertia += d0.min(d1);
        }
        inertia_trace.push(inertia);
        for cluster in 0..2 {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == cluster)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue; // keep the previous center
            }
            let mut mean = vec![0.0; n_components];
            for p in &members {
                for (m, x) in mean.iter_mut().zip(p.iter()) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= members.len() as f64;
            }
            centers[cluster] = mean;
        }
        if prev_inertia.is_finite()
            && (prev_inertia - inertia).abs() <= KMEANS_REL_TOL * prev_inertia.max(1e-12)
        {
            break;
        }
        prev_inertia = inertia;
    }

    let sizes = [
        assignments.iter().filter(|&&a| a == 0).count(),
        assignments.iter().filter(|&&a| a == 1).count(),
    ];
    let flagged_cluster = if sizes[0] != sizes[1] {
        if sizes[0] < sizes[1] {
            0
        } else {
            1
        }
    } else {
        // Equal sizes: flag the cluster further from the global centroid.
        let centroid = {
            let mut c = vec![0.0; n_components];
            for p in &points {
                for (m, x) in c.iter_mut().zip(p) {
                    *m += x;
                }
            }
            for m in &mut c {
                *m /= points.len() as f64;
            }
            c
        };
        let mean_dist = |cluster: usize| -> f64 {
            let dists: Vec<f64> = points
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == cluster)
                .map(|(p, _)| squared_distance(p, &centroid).sqrt())
                .collect();
            dists.iter().sum::<f64>() / dists.len() as f64
        };
        let (d0, d1) = (mean_dist(0), mean_dist(1));
        if d0 > d1 {
            0
        } else if d1 > d0 {
            1
        } else {
            // Full tie: keep the cluster holding the smallest id clean.
            let smallest = (0..points.len())
                .min_by(|&a, &b| ids[a].cmp(&ids[b]))
                .expect("non-empty set");
            1 - assignments[smallest]
        }
    };
    let mut flagged: Vec<String> = ids
        .iter()
        .zip(&assignments)
        .filter(|(_, &a)| a == flagged_cluster && sizes[flagged_cluster] > 0)
        .map(|(id, _)| id.clone())
        .collect();
    flagged.sort();
    Ok(ClusteringReport {
        flagged,
        assignments: ids.iter().cloned().zip(assignments.iter().copied()).collect(),
        cluster_sizes: sizes,
        inertia_trace,
        n_components,
    })
}

/// False-positive / false-negative rates of a flagged set against ground
/// truth.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionScore {
    /// `|flagged \ poison| / |flagged|`, 0 when nothing was flagged.
    pub false_positive_rate: f64,
    /// `|poison \ flagged| / |poison|`, 0 when nothing was poisoned.
    pub false_negative_rate: f64,
    pub n_flagged: usize,
    pub n_poison: usize,
    pub true_positives: usize,
}

/// Score `flagged` against the true `poison` ids. Both must be subsets of
/// `universe` (the ids the detector actually saw).
pub fn evaluate_detection(
    flagged: &[String],
    poison: &[String],
    universe: &[String],
) -> Result<DetectionScore> {
    let universe: BTreeSet<&str> = universe.iter().map(|s| s.as_str()).collect();
    let flagged: BTreeSet<&str> = flagged.iter().map(|s| s.as_str()).collect();
    let poison: BTreeSet<&str> = poison.iter().map(|s| s.as_str()).collect();
    for (name, set) in [("flagged", &flagged), ("poison", &poison)] {
        if let Some(stray) = set.iter().find(|id| !universe.contains(*id)) {
            return Err(Error::InvalidInput(format!(
                "{name} id '{stray}' is not in the evaluated universe"
            )));
        }
    }
    let true_positives = flagged.intersection(&poison).count();
    let false_positives = flagged.len() - true_positives;
    let false_negatives = poison.len() - true_positives;
    let false_positive_rate = if flagged.is_empty() {
        0.0
    } else {
        false_positives as f64 / flagged.len() as f64
    };
    let false_negative_rate = if poison.is_empty() {
        0.0
    } else {
        false_negatives as f64 / poison.len() as f64
    };
    Ok(DetectionScore {
        false_positive_rate,
        false_negative_rate,
        n_flagged: flagged.len(),
        n_poison: poison.len(),
        true_positives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn make_set(vectors: Vec<(&str, Vec<f64>)>) -> RepresentationSet {
        RepresentationSet::new(
            vectors
                .into_iter()
                .map(|(id, vector)| Representation {
                    id: id.to_string(),
                    vector,
                })
                .collect(),
        )
        .unwrap()
    }

    /// n points around the origin plus a shifted poison blob, with ids
    /// `c000..` and `p000..`.
    fn blob_set(n_clean: usize, n_poison: usize, dim: usize, shift: f64, seed: u64) -> RepresentationSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut reps = Vec::new();
        for i in 0..n_clean {
            let vector: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            reps.push(Representation {
                id: format!("c{i:03}"),
                vector,
            });
        }
        for i in 0..n_poison {
            let vector: Vec<f64> = (0..dim)
                .map(|j| rng.gen_range(-1.0..1.0) + if j == 0 { shift } else { 0.0 })
                .collect();
            reps.push(Representation {
                id: format!("p{i:03}"),
                vector,
            });
        }
        RepresentationSet::new(reps).unwrap()
    }

    #[test]
    fn float_safe_ceil_handles_fuzz_and_exact_values() {
        assert_eq!(float_safe_ceil(1.5 * 0.1 * 1000.0), 150); // raw is 150.00000000000003
        assert_eq!(float_safe_ceil(2.3), 3);
        assert_eq!(float_safe_ceil(3.0), 3);
        assert_eq!(float_safe_ceil(149.9999999999), 150);
        assert_eq!(float_safe_ceil(0.0), 0);
        assert_eq!(float_safe_ceil(0.1), 1);
    }

    #[test]
    fn representation_set_load_and_save_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reps.jsonl");
        let set = make_set(vec![("a", vec![1.0, 2.0]), ("b", vec![3.0, 4.0])]);
        set.save(&path).unwrap();
        let loaded = RepresentationSet::load(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.dim(), 2);
        assert_eq!(loaded.ids(), vec!["a", "b"]);
    }

    #[test]
    fn representation_set_rejects_bad_input() {
        let err = RepresentationSet::new(vec![
            Representation {
                id: "a".into(),
                vector: vec![1.0, 2.0],
            },
            Representation {
                id: "b".into(),
                vector: vec![1.0],
            },
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));

        let err = RepresentationSet::new(vec![Representation {
            id: "a".into(),
            vector: vec![f64::NAN],
        }])
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteVector { .. }));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"id\": \"a\", \"vector\": [1.0]}\nnot json\n").unwrap();
        let err = RepresentationSet::load(&path).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }));
    }

    #[test]
    fn power_iteration_matches_nalgebra_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (n, d) = (20, 5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        // Center exactly as spectral_signature does.
        let mut mean = vec![0.0; d];
        for row in &rows {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x / n as f64;
            }
        }
        let centered: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
            .collect();
        let ours = top_right_singular_vector(&centered, d);

        let flat: Vec<f64> = centered.iter().flatten().copied().collect();
        let m = nalgebra::DMatrix::from_row_slice(n, d, &flat);
        let svd = m.svd(true, true);
        let top = svd
            .singular_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let v_t = svd.v_t.unwrap();
        let reference: Vec<f64> = v_t.row(top).iter().copied().collect();
        let alignment = dot(&ours, &reference).abs();
        assert!(
            (alignment - 1.0).abs() < 1e-6,
            "singular vector misaligned: |dot| = {alignment}"
        );
    }

    #[test]
    fn spectral_flags_planted_outliers() {
        let set = blob_set(36, 4, 6, 50.0, 7);
        // 1.5 * 0.1 * 40 = 6 flagged.
        let report = spectral_signature(&set, 0.1).unwrap();
        assert_eq!(report.n_flagged, 6);
        assert_eq!(report.flagged.len(), 6);
        for i in 0..4 {
            let id = format!("p{i:03}");
            assert!(report.flagged.contains(&id), "poison {id} not flagged");
        }
        // Scores are reported for every instance in input order.
        assert_eq!(report.scores.len(), 40);
        assert_eq!(report.scores[0].0, "c000");
    }

    #[test]
    fn spectral_flag_count_uses_float_safe_ceil() {
        // With n = 40 and epsilon = 0.05: 1.5 * 0.05 * 40 = 3.0000000000000004
        // in floats; a naive ceil would flag 4.
        let raw = 1.5 * 0.05 * 40.0;
        assert!(raw > 3.0, "premise: raw float exceeds 3");
        let set = blob_set(38, 2, 4, 30.0, 3);
        let report = spectral_signature(&set, 0.05).unwrap();
        assert_eq!(report.n_flagged, 3);
    }

    #[test]
    fn spectral_validates_inputs() {
        let set = blob_set(10, 2, 3, 10.0, 1);
        assert!(matches!(
            spectral_signature(&set, 0.0),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            spectral_signature(&set, 1.5),
            Err(Error::InvalidEpsilon(_))
        ));
        let tiny = make_set(vec![("a", vec![1.0])]);
        assert!(matches!(
            spectral_signature(&tiny, 0.1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn clustering_separates_blobs_exactly() {
        let set = blob_set(30, 8, 12, 30.0, 11);
        let report = activation_clustering(&set).unwrap();
        let expected: Vec<String> = (0..8).map(|i| format!("p{i:03}")).collect();
        assert_eq!(report.flagged, expected);
        assert_eq!(report.cluster_sizes.iter().sum::<usize>(), 38);
        assert_eq!(report.n_components, 10);
        // Inertia never increases.
        for pair in report.inertia_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "inertia rose: {pair:?}");
        }
    }

    #[test]
    fn clustering_uses_all_dims_when_fewer_than_ten() {
        let set = blob_set(10, 3, 4, 25.0, 2);
        let report = activation_clustering(&set).unwrap();
        assert_eq!(report.n_components, 4);
        let expected: Vec<String> = (0..3).map(|i| format!("p{i:03}")).collect();
        assert_eq!(report.flagged, expected);
    }

    #[test]
    fn clustering_equal_sizes_flags_farther_cluster() {
        // Two points near the centroid, two far on the other side.
        let set = make_set(vec![
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.1, 0.0]),
            ("c", vec![-9.0, 0.0]),
            ("d", vec![-9.1, 0.0]),
        ]);
        let report = activation_clustering(&set).unwrap();
        assert_eq!(report.cluster_sizes, [2, 2]);
        assert_eq!(report.flagged, vec!["c".to_string(), "d".to_string()]);
    }

    #[test]
    fn clustering_full_tie_keeps_smallest_id_clean() {
        // Perfectly symmetric: both clusters have size 2 and identical mean
        // distance to the centroid.
        let set = make_set(vec![
            ("a", vec![5.0, 0.0]),
            ("b", vec![5.0, 0.0]),
            ("c", vec![-5.0, 0.0]),
            ("d", vec![-5.0, 0.0]),
        ]);
        let report = activation_clustering(&set).unwrap();
        assert_eq!(report.cluster_sizes, [2, 2]);
        assert!(
            !report.flagged.contains(&"a".to_string()),
            "smallest id must stay clean, flagged: {:?}",
            report.flagged
        );
        assert_eq!(report.flagged.len(), 2);
    }

    #[test]
    fn clustering_identical_points_flags_nothing() {
        let set = make_set(vec![
            ("a", vec![2.0, 2.0]),
            ("b", vec![2.0, 2.0]),
            ("c", vec![2.0, 2.0]),
        ]);
        let report = activation_clustering(&set).unwrap();
        assert!(report.flagged.is_empty());
        assert_eq!(report.cluster_sizes, [3, 0]);
    }

    #[test]
    fn clustering_is_deterministic() {
        let set = blob_set(25, 6, 8, 2.5, 19); // weakly separated: harder case
        let a = activation_clustering(&set).unwrap();
        let b = activation_clustering(&set).unwrap();
        assert_eq!(a.flagged, b.flagged);
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.inertia_trace, b.inertia_trace);
    }

    #[test]
    fn detection_rates_are_exact_fractions() {
        let universe: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
        let poison: Vec<String> = (0..4).map(|i| format!("u{i}")).collect();
        let flagged = vec!["u0".to_string(), "u1".to_string(), "u7".to_string()];
        let score = evaluate_detection(&flagged, &poison, &universe).unwrap();
        assert_eq!(score.false_positive_rate, 1.0 / 3.0);
        assert_eq!(score.false_negative_rate, 2.0 / 4.0);
        assert_eq!(score.true_positives, 2);
        assert_eq!(score.n_flagged, 3);
        assert_eq!(score.n_poison, 4);
    }

    #[test]
    fn detection_empty_set_rules() {
        let universe: Vec<String> = (0..5).map(|i| format!("u{i}")).collect();
        let poison = vec!["u0".to_string()];
        let score = evaluate_detection(&[], &poison, &universe).unwrap();
        assert_eq!(score.false_positive_rate, 0.0);
        assert_eq!(score.false_negative_rate, 1.0);

        let flagged = vec!["u1".to_string()];
        let score = evaluate_detection(&flagged, &[], &universe).unwrap();
        assert_eq!(score.false_positive_rate, 1.0);
        assert_eq!(score.false_negative_rate, 0.0);
    }

    #[test]
    fn detection_validates_universe_membership() {
        let universe = vec!["a".to_string()];
        let err = evaluate_detection(&["zz".to_string()], &[], &universe).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let err = evaluate_detection(&[], &["zz".to_string()], &universe).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
