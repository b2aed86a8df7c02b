//! High-dimensional neighbour orderings and block-wise neighbour subsampling.
//!
//! For every instance, all other instances are sorted by ascending Euclidean
//! distance (ties broken by id). A subsequence of that ordering is then kept:
//! the first `k` neighbours whole, then `k` evenly spaced picks out of the
//! next `2k`, `k` out of the next `4k`, and so on. Fitness only ever ranks the
//! kept neighbours.

use std::cmp::Ordering;
use std::path::Path;

use crate::dataset::{write_table, Dataset};
use crate::error::Result;
use crate::exec::Execution;

/// Squared Euclidean distance. Orderings are invariant under the square root.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Compares `(distance, id)` pairs: ascending distance, then ascending id.
#[inline]
pub(crate) fn by_distance_then_id(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Positions (0-based) kept from an ordering of length `len` with block
/// parameter `k`.
///
/// Block `j` has size `k * 2^j` and contributes every `2^j`-th entry starting
/// at its first. A trailing partial block of size `s` contributes
/// `ceil(s / 2^j)` entries with the same stride.
pub fn block_positions(len: usize, k: usize) -> Vec<usize> {
    assert!(k >= 1, "block parameter must be positive");
    let mut out = Vec::new();
    let mut start = 0;
    let mut stride = 1;
    while start < len {
        let size = k * stride;
        let end = (start + size).min(len);
        out.extend((start..end).step_by(stride));
        start += size;
        stride *= 2;
    }
    out
}

/// Number of neighbours kept for an ordering of length `len`.
pub fn selection_size(len: usize, k: usize) -> usize {
    block_positions(len, k).len()
}

/// The closed-form approximation `k * log2(n / k + 1)` of the selection size.
pub fn approximate_selection_size(n: usize, k: usize) -> f64 {
    k as f64 * (n as f64 / k as f64 + 1.0).log2()
}

/// Keeps the block-scheme subsequence of `ordering`.
pub fn select_neighbors(ordering: &[u32], k: usize) -> Vec<u32> {
    block_positions(ordering.len(), k)
        .into_iter()
        .map(|p| ordering[p])
        .collect()
}

/// Sorts selected neighbours by their low-dimensional distance.
///
/// `distances[p]` is the distance to `ids[p]`. Returns the permutation of
/// positions into `ids`, ordered by ascending distance with ties broken by
/// ascending id.
pub fn reorder_selected_lowdim(distances: &[f64], ids: &[u32]) -> Vec<usize> {
    debug_assert_eq!(distances.len(), ids.len());
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        distances[a]
            .total_cmp(&distances[b])
            .then(ids[a].cmp(&ids[b]))
    });
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    n: usize,
    k: usize,
    eta: usize,
    /// Row-major `n x (n-1)` full orderings.
    orderings: Vec<u32>,
    /// Squared distances aligned with `orderings`.
    distances: Vec<f64>,
    /// Row-major `n x eta` selected neighbours, in high-dimensional order.
    selected: Vec<u32>,
}

impl NeighborIndex {
    pub fn build(ds: &Dataset, k: usize, exec: Execution) -> Self {
        assert!(k >= 1, "block parameter must be positive");
        let n = ds.n();
        let width = n - 1;
        let rows = exec.map_range(n, |i| {
            let me = ds.row(i);
            let mut row: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(me, ds.row(j)), j as u32))
                .collect();
            row.sort_unstable_by(by_distance_then_id);
            row
        });
        let positions = block_positions(width, k);
        let eta = positions.len();
        let mut orderings = Vec::with_capacity(n * width);
        let mut distances = Vec::with_capacity(n * width);
        let mut selected = Vec::with_capacity(n * eta);
        for row in &rows {
            orderings.extend(row.iter().map(|p| p.1));
            distances.extend(row.iter().map(|p| p.0));
            selected.extend(positions.iter().map(|&p| row[p].1));
        }
        NeighborIndex {
            n,
            k,
            eta,
            orderings,
            distances,
            selected,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Selection size, identical for every instance.
    pub fn eta(&self) -> usize {
        self.eta
    }

    /// All other instances, nearest first.
    pub fn ordering(&self, i: usize) -> &[u32] {
        let w = self.n - 1;
        &self.orderings[i * w..(i + 1) * w]
    }

    /// Squared distances matching [`Self::ordering`].
    pub fn ordering_distances(&self, i: usize) -> &[f64] {
        let w = self.n - 1;
        &self.distances[i * w..(i + 1) * w]
    }

    /// Selected neighbours of `i`; their position in this slice is their
    /// high-dimensional rank.
    pub fn selected(&self, i: usize) -> &[u32] {
        &self.selected[i * self.eta..(i + 1) * self.eta]
    }

    /// High-dimensional rank (within the selection) of each selected neighbour.
    pub fn rank_of_selected(&self, i: usize) -> Vec<(u32, usize)> {
        self.selected(i).iter().copied().zip(0..).collect()
    }

    /// Writes `instance,rank,neighbor,distance,selected` for every pair.
    pub fn write_debug_csv(&self, path: &Path) -> Result<()> {
        let header = ["instance", "rank", "neighbor", "distance", "selected"].map(String::from);
        let positions = block_positions(self.n - 1, self.k);
        let rows = (0..self.n).flat_map(|i| {
            let positions = &positions;
            self.ordering(i)
                .iter()
                .zip(self.ordering_distances(i))
                .enumerate()
                .map(move |(rank, (&j, &d2))| {
                    vec![
                        i.to_string(),
                        rank.to_string(),
                        j.to_string(),
                        d2.sqrt().to_string(),
                        (positions.binary_search(&rank).is_ok() as u8).to_string(),
                    ]
                })
        });
        write_table(path, &header, rows)
    }
}
