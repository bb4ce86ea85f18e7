//! Seeded synthetic tables for tests, demos and benchmarks.
//!
//! [`breast_cancer_like`] is a complete 116×10 table with the column names,
//! rough marginals and class split of the Coimbra breast cancer data, for use
//! as generator input when the real file is not at hand.
//! [`icicle_like`] is a wide, heavily incomplete clinical-style table mixing
//! block, joint and conditional missingness.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::dataset::{IncompleteDataset, VariableColumn};
use crate::error::Result;
use crate::item_set::ItemSet;
use crate::missgen::{condition_range, RangeType};

pub const BREAST_CANCER_COLUMNS: [&str; 10] = [
    "Age",
    "BMI",
    "Glucose",
    "Insulin",
    "HOMA",
    "Leptin",
    "Adiponectin",
    "Resistin",
    "MCP.1",
    "Classification",
];

pub const BREAST_CANCER_ITEMS: usize = 116;
/// Items in class 1 (healthy controls); the remaining 64 are class 2.
pub const BREAST_CANCER_CONTROLS: usize = 52;

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

/// Complete table shaped like the Coimbra data. Same seed, same table.
pub fn breast_cancer_like(seed: u64) -> IncompleteDataset {
    let n = BREAST_CANCER_ITEMS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class: Vec<f64> = (0..n)
        .map(|i| if i < BREAST_CANCER_CONTROLS { 1.0 } else { 2.0 })
        .collect();

    let mut normal = |mean: f64, sd: f64, lo: f64, hi: f64, decimals: i32| -> Vec<f64> {
        let dist = Normal::new(mean, sd).unwrap();
        (0..n)
            .map(|_| round_to(dist.sample(&mut rng).clamp(lo, hi), decimals))
            .collect::<Vec<f64>>()
    };
    let age = normal(57.3, 16.1, 24.0, 89.0, 0);
    let bmi = normal(27.6, 5.0, 18.4, 38.6, 2);
    let glucose = normal(97.8, 22.5, 60.0, 201.0, 0);

    let mut lognormal = |median: f64, sigma: f64, decimals: i32| -> Vec<f64> {
        let dist = LogNormal::new(median.ln(), sigma).unwrap();
        (0..n)
            .map(|_| round_to(dist.sample(&mut rng), decimals))
            .collect::<Vec<f64>>()
    };
    let insulin = lognormal(5.9, 0.8, 3);
    let leptin = lognormal(20.3, 0.7, 4);
    let adiponectin = lognormal(8.4, 0.6, 6);
    let resistin = lognormal(10.8, 0.7, 5);
    let mcp = lognormal(471.3, 0.6, 3);
    let homa: Vec<f64> = glucose
        .iter()
        .zip(&insulin)
        .map(|(g, i)| round_to(g * i / 405.0, 6))
        .collect();

    let columns = [age, bmi, glucose, insulin, homa, leptin, adiponectin, resistin, mcp, class];
    let variables = BREAST_CANCER_COLUMNS
        .iter()
        .zip(columns)
        .map(|(name, values)| VariableColumn::complete(*name, values).expect("finite by construction"))
        .collect();
    IncompleteDataset::new("BreastCancer", variables).expect("consistent shape")
}

/// Shape and missingness mix of [`icicle_like`].
#[derive(Debug, Clone, PartialEq)]
pub struct IcicleConfig {
    pub items: usize,
    pub variables: usize,
    /// Variables per block sharing a visit-level missing set.
    pub block_size: usize,
    /// Every `gate_every`-th variable is a complete categorical gate with a
    /// rare level; the variable after it is missing exactly on that level.
    pub gate_every: usize,
    /// Missing fraction of a block is drawn from this range.
    pub block_missing: (f64, f64),
    /// Extra missingness per variable on top of its block.
    pub extra_missing: (f64, f64),
    pub seed: u64,
}

impl Default for IcicleConfig {
    fn default() -> Self {
        Self {
            items: 303,
            variables: 206,
            block_size: 8,
            gate_every: 12,
            block_missing: (0.4, 0.9),
            extra_missing: (0.0, 0.12),
            seed: 0,
        }
    }
}

/// Wide clinical-style table: variables are grouped into blocks that share a
/// missing item set (attendance at a follow-up), some variables are missing
/// exactly when a gate variable takes its rare level, and some are missing
/// mostly where another variable is high.
pub fn icicle_like(config: &IcicleConfig) -> Result<IncompleteDataset> {
    let n = config.items;
    let k = config.variables;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, 1.0).unwrap();

    // Complete values: one latent factor per block.
    let blocks = k.div_ceil(config.block_size.max(1));
    let latent: Vec<Vec<f64>> = (0..blocks)
        .map(|_| (0..n).map(|_| noise.sample(&mut rng)).collect())
        .collect();
    let is_gate = |j: usize| config.gate_every > 0 && j % config.gate_every == config.gate_every - 1;
    let mut columns = Vec::with_capacity(k);
    for j in 0..k {
        let name = format!("V{:03}", j + 1);
        let block = j / config.block_size.max(1);
        if is_gate(j) {
            let rare = rng.random_range(0.04..0.09);
            let labels = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    Some(if u < rare { "rare" } else if u < 0.55 { "no" } else { "yes" }.to_string())
                })
                .collect();
            columns.push(VariableColumn::categorical(name, labels));
        } else {
            let loading: f64 = rng.random_range(0.3..0.9);
            let scale: f64 = rng.random_range(1.0..50.0);
            let values = (0..n)
                .map(|i| round_to(scale * (loading * latent[block][i] + noise.sample(&mut rng)), 3))
                .collect();
            columns.push(VariableColumn::complete(name, values)?);
        }
    }
    let complete = IncompleteDataset::new("ICICLE_like", columns)?;

    let all: Vec<usize> = (0..n).collect();
    let random_subset = |rng: &mut ChaCha8Rng, pool: &[usize], amount: usize| {
        ItemSet::from_indices(n, sample(rng, pool.len(), amount.min(pool.len())).into_iter().map(|i| pool[i]))
    };

    let mut masks: Vec<ItemSet> = Vec::with_capacity(k);
    let mut block_mask = ItemSet::empty(n);
    for j in 0..k {
        if j % config.block_size.max(1) == 0 {
            let f = rng.random_range(config.block_missing.0..=config.block_missing.1);
            block_mask = random_subset(&mut rng, &all, (n as f64 * f).round() as usize);
        }
        let mask = if is_gate(j) {
            ItemSet::empty(n)
        } else if j > 0 && is_gate(j - 1) {
            rare_level(&complete, j - 1)
        } else if j % 5 == 4 && j >= 1 && !is_gate(j - 1) {
            // Missing mostly where the preceding variable is high.
            let (high, _) = condition_range(&complete, j - 1, RangeType::High)?;
            let pool: Vec<usize> = high.iter().collect();
            let inside = random_subset(&mut rng, &pool, (pool.len() as f64 * 0.9).round() as usize);
            inside.union(&block_mask.difference(&high))
        } else {
            let f = rng.random_range(config.extra_missing.0..=config.extra_missing.1);
            block_mask.union(&random_subset(&mut rng, &all, (n as f64 * f).round() as usize))
        };
        masks.push(mask);
    }

    let mut out = complete;
    for (j, mask) in masks.iter().enumerate() {
        if !mask.is_empty() {
            out = out.with_missing(j, mask)?;
        }
    }
    Ok(out)
}

fn rare_level(d: &IncompleteDataset, j: usize) -> ItemSet {
    let col = &d.variables()[j];
    ItemSet::from_indices(
        d.item_count(),
        col.recorded_labels().filter(|(_, l)| *l == "rare").map(|(i, _)| i),
    )
}
