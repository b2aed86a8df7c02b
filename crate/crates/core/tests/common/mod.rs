//! Shared helpers and independent reference implementations for the
//! integration tests. Nothing here calls into the library's hot paths.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gpmal::gp::{InitMethod, TreeGen};
use gpmal::{Dataset, Embedding, Individual, LabelColumn};
use rand::Rng;

pub fn wine_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/wine.csv")
}

pub fn wine() -> Dataset {
    gpmal::dataset::load_csv(&wine_path(), &LabelColumn::Named("class".into())).unwrap()
}

/// Uniform random dataset with `n` rows and `d` columns, already in [0,1].
pub fn random_dataset<R: Rng>(n: usize, d: usize, rng: &mut R) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    Dataset::from_rows(&rows, None).unwrap()
}

/// Random individual with `t` trees drawn by ramped grow/full up to `max_depth`.
pub fn random_individual<R: Rng>(t: usize, d: usize, max_depth: usize, rng: &mut R) -> Individual {
    let gen = TreeGen { d, p_feat: 0.8 };
    let trees = (0..t)
        .map(|_| {
            let depth = rng.random_range(1..=max_depth);
            let method = if rng.random::<bool>() { InitMethod::Full } else { InitMethod::Grow };
            gen.tree(method, 1, depth, rng)
        })
        .collect();
    Individual::new(trees)
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Standard normal survival function 2(1 - Phi(z)) for z >= 0, by composite
/// Simpson quadrature of the density on [0, z].
pub fn two_sided_tail(z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let m = 20_000;
    let h = z / m as f64;
    let phi = |x: f64| (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = phi(0.0) + phi(z);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * phi(i as f64 * h);
    }
    1.0 - 2.0 * s * h / 3.0
}

/// Whether ordering position `p` is kept, decided per position: block `b`
/// covers positions `[k(2^b - 1), k(2^(b+1) - 1))` and keeps every `2^b`-th.
pub fn naive_keep(p: usize, k: usize) -> bool {
    let mut b = 0;
    while k * ((1 << (b + 1)) - 1) <= p {
        b += 1;
    }
    (p - k * ((1 << b) - 1)).is_multiple_of(1 << b)
}

/// `two_sided_tail(dev / theta)` for dev in `0..len`.
pub fn tail_table(theta: f64, len: usize) -> Vec<f64> {
    (0..len).map(|dev| two_sided_tail(dev as f64 / theta)).collect()
}

/// Brute-force fitness: Euclidean distances, full sorts of every neighbour
/// list in both spaces, positions looked up by id. `tails` comes from
/// [`tail_table`] and must cover deviations up to `n - 1`.
pub fn naive_fitness(ds: &Dataset, emb: &Embedding, k: usize, tails: &[f64]) -> f64 {
    let n = ds.n();
    let sorted = |i: usize, row: &dyn Fn(usize) -> Vec<f64>| {
        let me = row(i);
        let mut v: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclid(&me, &row(j)), j))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        v.into_iter().map(|p| p.1).collect::<Vec<_>>()
    };
    let high_row = |j: usize| ds.row(j).to_vec();
    let low_row = |j: usize| emb.row(j).to_vec();
    let mut total = 0.0;
    let mut eta = 0;
    for i in 0..n {
        let high = sorted(i, &high_row);
        let chosen: Vec<usize> = high
            .iter()
            .enumerate()
            .filter(|(p, _)| naive_keep(*p, k))
            .map(|(_, &j)| j)
            .collect();
        eta = chosen.len();
        let low: Vec<usize> = sorted(i, &low_row)
            .into_iter()
            .filter(|j| chosen.contains(j))
            .collect();
        for (hp, j) in chosen.iter().enumerate() {
            let lp = low.iter().position(|x| x == j).unwrap();
            total += tails[hp.abs_diff(lp)];
        }
    }
    total / (n * eta) as f64
}
