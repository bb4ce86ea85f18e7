//! Histograms of recorded values and the bin-count choice that minimizes the
//! Shimazaki–Shinomoto cost.
//!
//! For `b` equal-width bins of width `Δ` over the sample range, with bin
//! counts `k_i`, mean `k̄` and biased variance `v`, the cost is
//! `C(b) = (2k̄ − v) / Δ²`. Substituting `k̄ = n/b` and `Δ = range/b` gives
//! `C(b) = (n² + b·(2n − Σk_i²)) / range²`, so the argmin only depends on the
//! integer `b·(2n − Σk_i²)`, which is what the search compares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{IncompleteDataset, VariableKind};
use crate::error::{Error, Result};
use crate::item_set::ItemSet;

/// Upper limit of the bin-count search.
pub const MAX_BINS: usize = 50;

/// `b + 1` edges from `min` to `max`; the last edge is exactly `max`.
pub fn equal_width_edges(min: f64, max: f64, bins: usize) -> Vec<f64> {
    let range = max - min;
    (0..=bins)
        .map(|i| {
            if i == bins {
                max
            } else {
                min + range * (i as f64 / bins as f64)
            }
        })
        .collect()
}

/// Bin of `x` under `edges`: bins are `[e_i, e_{i+1})` except the last,
/// which is closed on the right. Values outside the range clamp to the end bins.
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    let interior = &edges[1..edges.len() - 1];
    interior.partition_point(|&e| e <= x)
}

/// Bin counts of an ascending sample under `edges`.
fn counts_sorted(sorted: &[f64], edges: &[f64]) -> Vec<u64> {
    let b = edges.len() - 1;
    let mut counts = Vec::with_capacity(b);
    let mut prev = 0usize;
    for edge in &edges[1..b] {
        let pos = sorted.partition_point(|&v| v < *edge);
        counts.push((pos - prev) as u64);
        prev = pos;
    }
    counts.push((sorted.len() - prev) as u64);
    counts
}

/// Bin count in `1..=min(MAX_BINS, n)` minimizing the cost; ties go to the
/// smaller count. A sample with zero range gets one bin.
pub fn optimal_bin_count(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Ok(1);
    }

    let n = sorted.len() as i128;
    let mut best = (1usize, i128::MAX);
    for b in 1..=MAX_BINS.min(sorted.len()) {
        let edges = equal_width_edges(min, max, b);
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            continue;
        }
        let sum_sq: i128 = counts_sorted(&sorted, &edges)
            .iter()
            .map(|&c| (c as i128) * (c as i128))
            .sum();
        let score = b as i128 * (2 * n - sum_sq);
        if score < best.1 {
            best = (b, score);
        }
    }
    Ok(best.0)
}

/// Bin layout of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bins {
    Numeric { edges: Vec<f64> },
    Categorical { categories: Vec<String> },
}

impl Bins {
    pub fn len(&self) -> usize {
        match self {
            Bins::Numeric { edges } => edges.len() - 1,
            Bins::Categorical { categories } => categories.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Histogram plus the discrete distribution derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDistribution {
    pub variable: String,
    pub bin_count: usize,
    #[serde(flatten)]
    pub bins: Bins,
    pub counts: Vec<u64>,
    /// `counts[o] / Σ counts`; all zero when the histogram is empty.
    pub probabilities: Vec<f64>,
}

impl BinnedDistribution {
    fn from_counts(variable: &str, bins: &Bins, counts: Vec<u64>) -> Self {
        BinnedDistribution {
            variable: variable.to_string(),
            bin_count: bins.len(),
            bins: bins.clone(),
            probabilities: probabilities(&counts),
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn probabilities(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Bins of one variable together with the bin of every recorded item, so
/// histograms of arbitrary item subsets share the same partition.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableBinning {
    variable: String,
    bins: Bins,
    item_bins: Vec<Option<u32>>,
}

impl VariableBinning {
    /// Numerical variables get equal-width bins over their recorded range with
    /// the optimal count; categorical variables one bin per label, label-sorted.
    pub fn of(d: &IncompleteDataset, k: usize) -> Result<Self> {
        let col = d.variable(k)?;
        if col.recorded_count() == 0 {
            return Err(Error::NoSupport(col.name().to_string()));
        }
        let mut item_bins = vec![None; d.item_count()];
        let bins = match col.kind() {
            VariableKind::Numerical => {
                let values: Vec<f64> = col.recorded_numbers().map(|(_, v)| v).collect();
                // Discrete codes (e.g. a binary class) drive the cost scan to its
                // upper limit; never use more bins than distinct values.
                let b = optimal_bin_count(&values)?.min(distinct_count(&values));
                let (min, max) = values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                let edges = if min == max {
                    vec![min, max]
                } else {
                    equal_width_edges(min, max, b)
                };
                for (item, v) in col.recorded_numbers() {
                    item_bins[item] = Some(bin_index(&edges, v) as u32);
                }
                Bins::Numeric { edges }
            }
            VariableKind::Categorical => {
                let mut index: BTreeMap<&str, u32> = BTreeMap::new();
                for (_, label) in col.recorded_labels() {
                    index.entry(label).or_insert(0);
                }
                for (i, slot) in index.values_mut().enumerate() {
                    *slot = i as u32;
                }
                for (item, label) in col.recorded_labels() {
                    item_bins[item] = Some(index[label]);
                }
                Bins::Categorical {
                    categories: index.keys().map(|s| s.to_string()).collect(),
                }
            }
        };
        Ok(Self {
            variable: col.name().to_string(),
            bins,
            item_bins,
        })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn bins(&self) -> &Bins {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_of(&self, item: usize) -> Option<usize> {
        self.item_bins.get(item).copied().flatten().map(|b| b as usize)
    }

    /// Counts over `items`, skipping items not recorded in this variable.
    pub fn counts(&self, items: &ItemSet) -> Vec<u64> {
        let mut counts = vec![0u64; self.bin_count()];
        for item in items.iter() {
            if let Some(b) = self.item_bins[item] {
                counts[b as usize] += 1;
            }
        }
        counts
    }

    /// Distribution of all recorded values.
    pub fn overall(&self) -> BinnedDistribution {
        let mut counts = vec![0u64; self.bin_count()];
        for b in self.item_bins.iter().flatten() {
            counts[*b as usize] += 1;
        }
        BinnedDistribution::from_counts(&self.variable, &self.bins, counts)
    }

    /// Distribution over the recorded members of `items`, on the same bins.
    pub fn subset(&self, items: &ItemSet) -> BinnedDistribution {
        BinnedDistribution::from_counts(&self.variable, &self.bins, self.counts(items))
    }
}

fn distinct_count(values: &[f64]) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

pub fn bin_distribution(d: &IncompleteDataset, k: usize) -> Result<BinnedDistribution> {
    Ok(VariableBinning::of(d, k)?.overall())
}
