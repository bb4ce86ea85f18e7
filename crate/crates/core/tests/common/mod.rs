//! Brute-force reference implementations, written against raw cells only.
#![allow(dead_code)]

use missq_core::{Cell, IncompleteDataset, VariableColumn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `mask[j][i]` is true when cell `(i, j)` is missing.
pub fn mask(d: &IncompleteDataset) -> Vec<Vec<bool>> {
    d.variables()
        .iter()
        .map(|v| (0..d.item_count()).map(|i| matches!(v.cell(i), Cell::Missing)).collect())
        .collect()
}

pub fn missing_count(mask: &[Vec<bool>], j: usize) -> u64 {
    mask[j].iter().filter(|&&m| m).count() as u64
}

pub fn joint_count(mask: &[Vec<bool>], j: usize, k: usize) -> u64 {
    mask[j].iter().zip(&mask[k]).filter(|(a, b)| **a && **b).count() as u64
}

/// `(numerator, denominator)` of each joint metric as exact integers.
pub fn q_am(mask: &[Vec<bool>], j: usize) -> (i128, i128) {
    (missing_count(mask, j) as i128, mask[j].len() as i128)
}

pub fn jm_mag(mask: &[Vec<bool>], j: usize, k: usize) -> (i128, i128) {
    (joint_count(mask, j, k) as i128, mask[j].len() as i128)
}

pub fn expected(mask: &[Vec<bool>], j: usize, k: usize) -> (i128, i128) {
    let n = mask[j].len() as i128;
    (missing_count(mask, j) as i128 * missing_count(mask, k) as i128, n * n)
}

pub fn jm_dir(mask: &[Vec<bool>], j: usize, k: usize) -> (i128, i128) {
    let n = mask[j].len() as i128;
    let c = joint_count(mask, j, k) as i128;
    let (mj, mk) = (missing_count(mask, j) as i128, missing_count(mask, k) as i128);
    (c * n - mj * mk, n * n)
}

pub fn ratio((num, den): (i128, i128)) -> f64 {
    num as f64 / den as f64
}

/// Recorded values of `k` as bin keys, or `None` when missing. Numerical
/// variables use equal-width bins with the cost-scan count capped by the
/// number of distinct values; categorical variables one bin per sorted label.
pub fn bins(d: &IncompleteDataset, k: usize) -> Option<(usize, Vec<Option<usize>>)> {
    let col = &d.variables()[k];
    let n = d.item_count();
    let cells: Vec<Cell<'_>> = (0..n).map(|i| col.cell(i)).collect();
    let numbers: Vec<f64> = cells
        .iter()
        .filter_map(|c| if let Cell::Number(x) = c { Some(*x) } else { None })
        .collect();
    let mut labels: Vec<&str> = cells
        .iter()
        .filter_map(|c| if let Cell::Label(s) = c { Some(*s) } else { None })
        .collect();
    if numbers.is_empty() && labels.is_empty() {
        return None;
    }
    if !labels.is_empty() {
        labels.sort();
        labels.dedup();
        let keys = cells
            .iter()
            .map(|c| match c {
                Cell::Label(s) => labels.iter().position(|l| l == s),
                _ => None,
            })
            .collect();
        return Some((labels.len(), keys));
    }
    let min = numbers.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = numbers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut distinct = numbers.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let b = bin_count(&numbers).min(distinct.len());
    let edges = edges(min, max, b);
    let keys = cells
        .iter()
        .map(|c| match c {
            Cell::Number(x) => Some(locate(&edges, *x)),
            _ => None,
        })
        .collect();
    Some((b, keys))
}

fn edges(min: f64, max: f64, b: usize) -> Vec<f64> {
    (0..=b)
        .map(|i| if i == b { max } else { min + (max - min) * (i as f64 / b as f64) })
        .collect()
}

fn locate(edges: &[f64], x: f64) -> usize {
    let b = edges.len() - 1;
    (0..b)
        .find(|&o| {
            if o == b - 1 {
                x >= edges[o] && x <= edges[o + 1]
            } else {
                x >= edges[o] && x < edges[o + 1]
            }
        })
        .unwrap_or(if x < edges[0] { 0 } else { b - 1 })
}

/// Float evaluation of `(2·mean − var)/Δ²` for every candidate count, smaller
/// count on (near) ties.
pub fn bin_count(values: &[f64]) -> usize {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return 1;
    }
    let mut best: Option<(usize, f64)> = None;
    for b in 1..=values.len().min(50) {
        let e = edges(min, max, b);
        let width = (max - min) / b as f64;
        let mut counts = vec![0f64; b];
        for &x in values {
            counts[locate(&e, x)] += 1.0;
        }
        let mean = counts.iter().sum::<f64>() / b as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / b as f64;
        let cost = (2.0 * mean - var) / (width * width);
        match best {
            Some((_, c)) if cost >= c - 1e-9 * c.abs().max(1.0) => {}
            _ => best = Some((b, cost)),
        }
    }
    best.unwrap().0
}

/// Exact integer cost `b·(2n − Σ counts²)` of every candidate count, on the
/// same bin assignment as `bin_count`. Its argmin equals the float scan's.
pub fn integer_costs(values: &[f64]) -> Vec<(usize, i128)> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len() as i128;
    (1..=values.len().min(50))
        .map(|b| {
            let e = edges(min, max, b);
            let mut counts = vec![0i128; b];
            for &x in values {
                counts[locate(&e, x)] += 1;
            }
            (b, b as i128 * (2 * n - counts.iter().map(|c| c * c).sum::<i128>()))
        })
        .collect()
}

/// `(q_cm_did, q_cm_h, support)` for missingness in `j` conditioned on `k`,
/// or `None` when `k` has no recorded values.
pub fn cm(d: &IncompleteDataset, j: usize, k: usize) -> Option<(f64, f64, u64)> {
    let (b, keys) = bins(d, k)?;
    let m = mask(d);
    let mut all = vec![0f64; b];
    let mut cond = vec![0f64; b];
    for (i, key) in keys.iter().enumerate() {
        if let Some(o) = key {
            all[*o] += 1.0;
            if m[j][i] {
                cond[*o] += 1.0;
            }
        }
    }
    let support = cond.iter().sum::<f64>();
    if support == 0.0 {
        return Some((0.0, 0.0, 0));
    }
    let total = all.iter().sum::<f64>();
    let p: Vec<f64> = all.iter().map(|c| c / total).collect();
    let q: Vec<f64> = cond.iter().map(|c| c / support).collect();
    let mut tv = 0.0;
    for o in 0..b {
        tv += (p[o] - q[o]).abs();
    }
    tv /= 2.0;
    let h = |x: &[f64]| {
        let mut s = 0.0;
        for &v in x {
            if v > 0.0 {
                s -= v * v.ln();
            }
        }
        s
    };
    let nh = if b <= 1 { 0.0 } else { (h(&p) - h(&q)).abs() / (b as f64).ln() };
    Some((tv.min(1.0), nh.min(1.0), support as u64))
}

/// Random incomplete table: numerical variables (continuous or coarse
/// integer codes, to force ties and few distinct values) and categorical
/// ones, each with its own missing rate.
pub fn random_dataset(seed: u64, max_items: usize, max_vars: usize) -> IncompleteDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_items);
    let k = rng.random_range(2..=max_vars);
    let cols = (0..k)
        .map(|j| {
            let rate: f64 = match rng.random_range(0..5) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random(),
            };
            let name = format!("v{j}");
            match rng.random_range(0..3) {
                0 => {
                    let values = (0..n)
                        .map(|_| (!rng.random_bool(rate)).then(|| rng.random_range(-50.0..50.0)))
                        .collect();
                    VariableColumn::numerical(name, values).unwrap()
                }
                1 => {
                    let levels = rng.random_range(1..6);
                    let values = (0..n)
                        .map(|_| (!rng.random_bool(rate)).then(|| rng.random_range(0..levels) as f64))
                        .collect();
                    VariableColumn::numerical(name, values).unwrap()
                }
                _ => {
                    let levels = rng.random_range(1..5);
                    let values = (0..n)
                        .map(|_| (!rng.random_bool(rate)).then(|| format!("c{}", rng.random_range(0..levels))))
                        .collect();
                    VariableColumn::categorical(name, values)
                }
            }
        })
        .collect();
    IncompleteDataset::new(format!("random{seed}"), cols).unwrap()
}
