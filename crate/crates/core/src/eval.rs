//! Embedding quality: stratified k-fold k-NN accuracy, a PCA baseline and
//! the output dimensionalities compared in experiments.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gp::Embedding;
use crate::neighbors::{by_distance_then_id, squared_distance};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_KNN: usize = 5;

/// Output dimensionalities for a `d`-feature dataset: 2, 3, 5 and the
/// rounded cube root of `d`, each capped at `d`, sorted and deduplicated.
pub fn dimensionality_schedule(d: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [2, 3, 5, cube_root_dims(d)]
        .into_iter()
        .map(|t| t.min(d).max(1))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `round(d^(1/3))`, halves rounding up.
pub fn cube_root_dims(d: usize) -> usize {
    ((d as f64).cbrt() + 0.5).floor() as usize
}

/// Assigns every instance to one of `folds` folds, class by class.
///
/// Members of each class are shuffled with `seed` and dealt round-robin,
/// continuing from where the previous class stopped so fold sizes stay
/// balanced. Returns the effective fold count, lowered (with a warning) when
/// the smallest class has fewer members than `folds`.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<(usize, Vec<usize>)> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    members.retain(|m| !m.is_empty());
    if members.len() < 2 {
        return Err(Error::InvalidDataset(
            "cross-validation needs at least 2 classes".into(),
        ));
    }
    let smallest = members.iter().map(Vec::len).min().unwrap();
    let mut folds = folds.max(2);
    if smallest < folds {
        let reduced = smallest.max(2);
        log::warn!("smallest class has {smallest} members; using {reduced} folds instead of {folds}");
        folds = reduced;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for m in &mut members {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok((folds, assignment))
}

/// Majority vote among the `k` nearest training rows. Distance ties go to
/// the lower instance id, vote ties to the lower class id.
pub fn knn_predict(
    emb: &Embedding,
    labels: &[usize],
    train: &[usize],
    query: usize,
    k: usize,
    classes: usize,
) -> usize {
    let q = emb.row(query);
    let mut cand: Vec<(f64, u32)> = train
        .iter()
        .map(|&j| (squared_distance(q, emb.row(j)), j as u32))
        .collect();
    let k = k.min(cand.len());
    if k < cand.len() {
        cand.select_nth_unstable_by(k, by_distance_then_id);
        cand.truncate(k);
    }
    let mut votes = vec![0usize; classes];
    for &(_, j) in &cand {
        votes[labels[j as usize]] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub method: String,
    pub t: usize,
    pub folds: Vec<f64>,
    pub mean: f64,
    pub seed: u64,
}

impl EvalReport {
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["dataset", "method", "t", "mean"].map(String::from).to_vec();
        h.extend((0..self.folds.len()).map(|i| format!("fold_{i}")));
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut r = vec![
            self.dataset.clone(),
            self.method.clone(),
            self.t.to_string(),
            self.mean.to_string(),
        ];
        r.extend(self.folds.iter().map(f64::to_string));
        r
    }
}

/// Cross-validated k-NN accuracy of an embedding against class labels.
pub fn knn_cv_accuracy(
    emb: &Embedding,
    labels: &[usize],
    folds: usize,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<EvalReport> {
    if labels.len() != emb.n() {
        return Err(Error::InvalidDataset(format!(
            "{} labels for {} embedded instances",
            labels.len(),
            emb.n()
        )));
    }
    let (folds, assignment) = stratified_folds(labels, folds, seed)?;
    let classes = labels.iter().max().unwrap() + 1;
    let accuracies = exec.map_range(folds, |f| {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..labels.len()).partition(|&i| assignment[i] == f);
        let correct = test
            .iter()
            .filter(|&&i| knn_predict(emb, labels, &train, i, k, classes) == labels[i])
            .count();
        correct as f64 / test.len() as f64
    });
    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    Ok(EvalReport {
        dataset: String::new(),
        method: String::new(),
        t: emb.t(),
        folds: accuracies,
        mean,
        seed,
    })
}

/// A fitted principal component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit-length components, strongest first; `components[c][j]` is the
    /// loading of feature `j`.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalues (explained variances), non-increasing.
    pub eigenvalues: Vec<f64>,
}

const POWER_MAX_ITERS: usize = 20_000;
const POWER_TOL: f64 = 1e-13;

/// Sample covariance (divisor `n - 1`) of a row-major `n x d` matrix.
pub fn covariance(features: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = features.len() / d;
    let mut mean = vec![0.0; d];
    for row in features.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![0.0; d * d];
    for row in features.chunks_exact(d) {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[a * d + b] += da * (row[b] - mean[b]);
            }
        }
    }
    let denom = (n as f64 - 1.0).max(1.0);
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    (mean, cov)
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    m.chunks_exact(v.len())
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalise(v: &mut [f64], basis: &[Vec<f64>]) {
    // twice, for numerical stability
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
}

fn normalise(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Top eigenpairs of a symmetric `d x d` matrix by power iteration with
/// deflation, each iterate re-orthogonalised against earlier vectors.
pub fn symmetric_top_eigen(m: &[f64], d: usize, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut deflated = m.to_vec();
    let mut values = Vec::with_capacity(count);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        orthogonalise(&mut v, &vectors);
        normalise(&mut v);
        for _ in 0..POWER_MAX_ITERS {
            let mut w = mat_vec(&deflated, &v);
            orthogonalise(&mut w, &vectors);
            if normalise(&mut w) == 0.0 {
                // remaining spectrum is numerically zero; keep any orthonormal direction
                break;
            }
            // the sign can flip for negative eigenvalues; compare up to sign
            let diff = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs().min((a + b).abs()))
                .fold(0.0, f64::max);
            v = w;
            if diff < POWER_TOL {
                break;
            }
        }
        let lambda = dot(&v, &mat_vec(m, &v));
        for a in 0..d {
            for b in 0..d {
                deflated[a * d + b] -= lambda * v[a] * v[b];
            }
        }
        values.push(lambda);
        vectors.push(v);
    }
    (values, vectors)
}

impl Pca {
    pub fn fit(ds: &Dataset, t: usize) -> Result<Pca> {
        if t > ds.d() {
            return Err(Error::Config(format!(
                "cannot keep {t} components of {} features",
                ds.d()
            )));
        }
        let d = ds.d();
        let (mean, cov) = covariance(ds.features(), d);
        let (eigenvalues, mut components) = symmetric_top_eigen(&cov, d, t);
        for c in &mut components {
            let big = c
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if big < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(Pca {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn transform(&self, ds: &Dataset) -> Embedding {
        let t = self.components.len();
        let mut data = Vec::with_capacity(ds.n() * t);
        let mut centred = vec![0.0; ds.d()];
        for row in ds.rows() {
            for ((c, x), m) in centred.iter_mut().zip(row).zip(&self.mean) {
                *c = x - m;
            }
            data.extend(self.components.iter().map(|comp| dot(comp, &centred)));
        }
        Embedding::new(ds.n(), t, data)
    }
}

/// Projects a dataset onto its top-`t` principal components.
pub fn pca_project(ds: &Dataset, t: usize) -> Result<Embedding> {
    Ok(Pca::fit(ds, t)?.transform(ds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(dimensionality_schedule(500), vec![2, 3, 5, 8]);
        assert_eq!(dimensionality_schedule(13), vec![2, 3, 5]);
        assert_eq!(dimensionality_schedule(4), vec![2, 3, 4]);
        assert_eq!(dimensionality_schedule(1024), vec![2, 3, 5, 10]);
        assert_eq!(cube_root_dims(500), 8);
        assert_eq!(cube_root_dims(13), 2);
        // 3.375 = 1.5^3 rounds up
        assert_eq!(cube_root_dims(27), 3);
    }

    #[test]
    fn separable_clusters_are_perfect() {
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let c = i % 2;
            data.push(c as f64 * 10.0 + (i as f64) * 0.01);
            labels.push(c);
        }
        let emb = Embedding::new(40, 1, data);
        let r = knn_cv_accuracy(&emb, &labels, 10, 5, 1, Execution::Sequential).unwrap();
        assert_eq!(r.folds.len(), 10);
        assert_eq!(r.mean, 1.0);
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<usize> = (0..103).map(|i| if i % 3 == 0 { 0 } else if i % 7 == 0 { 2 } else { 1 }).collect();
        let (k, a) = stratified_folds(&labels, 10, 42).unwrap();
        assert_eq!(k, 10);
        assert_eq!(a.len(), labels.len());
        for c in 0..3 {
            let total = labels.iter().filter(|&&l| l == c).count() as f64;
            for f in 0..10 {
                let in_fold = (0..labels.len()).filter(|&i| a[i] == f && labels[i] == c).count() as f64;
                assert!((in_fold - total / 10.0).abs() <= 1.0, "class {c} fold {f}");
            }
        }
    }

    #[test]
    fn small_classes_reduce_folds() {
        let labels = vec![0, 0, 0, 1, 1, 1, 1, 1];
        let (k, _) = stratified_folds(&labels, 10, 0).unwrap();
        assert_eq!(k, 3);
        assert!(stratified_folds(&[0, 0, 0], 10, 0).is_err());
    }

    #[test]
    fn vote_ties_prefer_lower_class() {
        let emb = Embedding::new(5, 1, vec![0.0, -1.0, 1.0, -2.0, 2.0]);
        let labels = vec![0, 1, 0, 1, 0];
        // neighbours of 0 among {1,2}: one of each class
        assert_eq!(knn_predict(&emb, &labels, &[1, 2], 0, 2, 2), 0);
        let labels = vec![0, 0, 1, 1, 0];
        assert_eq!(knn_predict(&emb, &labels, &[1, 2], 0, 2, 2), 0);
        // distance tie at k = 1: lower id (1) wins
        assert_eq!(knn_predict(&emb, &labels, &[1, 2], 0, 1, 2), 0);
        let labels = vec![0, 1, 0, 1, 0];
        assert_eq!(knn_predict(&emb, &labels, &[2, 1], 0, 1, 2), 1);
    }

    #[test]
    fn pca_on_a_line_preserves_distances() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.2, 0.5 - i as f64 * 0.1]).collect();
        let ds = Dataset::from_rows(&rows, None).unwrap();
        let e = pca_project(&ds, 1).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let orig = squared_distance(ds.row(i), ds.row(j)).sqrt();
                let proj = (e.row(i)[0] - e.row(j)[0]).abs();
                assert!((orig - proj).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_rejects_too_many_components() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0]], None).unwrap();
        assert!(pca_project(&ds, 2).is_err());
    }

    #[test]
    fn report_csv_shape() {
        let r = EvalReport {
            dataset: "wine".into(),
            method: "pca".into(),
            t: 2,
            folds: vec![0.5, 1.0],
            mean: 0.75,
            seed: 3,
        };
        assert_eq!(r.csv_header().len(), r.csv_row().len());
        assert_eq!(r.csv_row()[..4], ["wine", "pca", "2", "0.75"].map(String::from));
    }
}
