//! Neighbour-ordering fitness.
//!
//! Each instance's selected neighbours are ranked once by high-dimensional
//! distance and once by distance in the embedding. Every neighbour whose rank
//! moves by `dev` positions contributes `agreement(dev)`, the two-sided tail
//! mass of a zero-mean Gaussian beyond `±dev`. The summed agreement is
//! normalised to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::exec::Execution;
use crate::gp::{Embedding, Individual};
use crate::neighbors::{reorder_selected_lowdim, squared_distance, NeighborIndex};

/// Agreement weights for integer rank deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementKernel {
    theta: f64,
    table: Vec<f64>,
}

impl AgreementKernel {
    /// Precomputes weights for deviations `0..=max_dev`.
    pub fn new(theta: f64, max_dev: usize) -> Self {
        assert!(theta > 0.0 && theta.is_finite(), "theta must be positive");
        let table = (0..=max_dev).map(|dev| gaussian_tail(dev as f64, theta)).collect();
        AgreementKernel { theta, table }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    #[inline]
    pub fn agreement(&self, dev: usize) -> f64 {
        match self.table.get(dev) {
            Some(&w) => w,
            None => gaussian_tail(dev as f64, self.theta),
        }
    }
}

/// `1 - P(-dev < X < dev)` for `X ~ N(0, theta^2)`, i.e. `erfc(dev / (theta * sqrt 2))`.
pub fn gaussian_tail(dev: f64, theta: f64) -> f64 {
    libm::erfc(dev / (theta * std::f64::consts::SQRT_2))
}

/// Absolute rank change of each id in `high` when re-ranked as in `low`.
///
/// # Panics
///
/// If the two slices are not permutations of the same ids.
pub fn deviations(high: &[u32], low: &[u32]) -> Vec<usize> {
    assert_eq!(high.len(), low.len(), "rankings differ in length");
    let mut low_pos: Vec<(u32, usize)> = low.iter().copied().zip(0..).collect();
    low_pos.sort_unstable();
    high.iter()
        .enumerate()
        .map(|(hp, id)| {
            let at = low_pos
                .binary_search_by(|p| p.0.cmp(id))
                .unwrap_or_else(|_| panic!("id {id} missing from low-dimensional ranking"));
            hp.abs_diff(low_pos[at].1)
        })
        .collect()
}

/// Sum of agreements between two rankings of the same neighbours.
pub fn similarity(high: &[u32], low: &[u32], kernel: &AgreementKernel) -> f64 {
    deviations(high, low).into_iter().map(|d| kernel.agreement(d)).sum()
}

/// Denominator applied to the summed similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalisation {
    /// `n * eta`: the attainable maximum, so fitness spans `[0, 1]`.
    #[default]
    SelectedPairs,
    /// `n^2`, as if every instance kept all its neighbours.
    SquaredInstances,
}

/// Everything fitness needs besides the individual. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct FitnessContext<'a> {
    pub dataset: &'a Dataset,
    pub index: &'a NeighborIndex,
    pub kernel: AgreementKernel,
    pub normalisation: Normalisation,
}

impl<'a> FitnessContext<'a> {
    pub fn new(dataset: &'a Dataset, index: &'a NeighborIndex, theta: f64) -> Self {
        FitnessContext {
            dataset,
            index,
            kernel: AgreementKernel::new(theta, index.eta()),
            normalisation: Normalisation::default(),
        }
    }

    pub fn with_normalisation(mut self, normalisation: Normalisation) -> Self {
        self.normalisation = normalisation;
        self
    }

    fn denominator(&self) -> f64 {
        let n = self.index.n() as f64;
        match self.normalisation {
            Normalisation::SelectedPairs => n * self.index.eta() as f64,
            Normalisation::SquaredInstances => n * n,
        }
    }

    /// Fitness of an already computed embedding. Non-finite embeddings score 0.
    pub fn embedding_fitness(&self, emb: &Embedding) -> f64 {
        if !emb.is_finite() {
            return 0.0;
        }
        let eta = self.index.eta();
        if eta == 0 {
            return 0.0;
        }
        let mut dists = vec![0.0; eta];
        let mut total = 0.0;
        for i in 0..self.index.n() {
            let ids = self.index.selected(i);
            let me = emb.row(i);
            for (d, &j) in dists.iter_mut().zip(ids) {
                *d = squared_distance(me, emb.row(j as usize));
            }
            let order = reorder_selected_lowdim(&dists, ids);
            total += order
                .iter()
                .enumerate()
                .map(|(low, &high)| self.kernel.agreement(low.abs_diff(high)))
                .sum::<f64>();
        }
        total / self.denominator()
    }

    pub fn fitness(&self, ind: &Individual) -> f64 {
        self.embedding_fitness(&ind.embed(self.dataset))
    }

    /// Fills in `fitness` for every individual that has none.
    pub fn evaluate_population(&self, pop: &mut [Individual], exec: Execution) {
        exec.for_each_mut(pop, |ind| {
            if ind.fitness.is_none() {
                ind.fitness = Some(self.fitness(ind));
            }
        });
    }
}
