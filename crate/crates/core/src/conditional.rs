//! Conditional missingness: how the recorded values of `k` are distributed
//! over the items missing in `j`, compared with all recorded values of `k`.
//!
//! Both histograms use the bins computed from all recorded values of `k`.
//! When no item is missing in `j` and recorded in `k` (zero support) both
//! metrics are 0 and the support is reported as 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{probabilities, BinnedDistribution, VariableBinning};
use crate::dataset::IncompleteDataset;
use crate::error::{Error, Result};
use crate::matrix::{Aggregation, Metric, PairwiseQMMatrix};

/// Half the L1 distance between two distributions on the same bins.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Natural-log Shannon entropy, with `0·ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// `|H(p) − H(q)| / ln b`; zero for a single bin.
pub fn normalized_entropy_difference(p: &[f64], q: &[f64]) -> f64 {
    let b = p.len();
    if b <= 1 {
        return 0.0;
    }
    ((shannon_entropy(p) - shannon_entropy(q)).abs() / (b as f64).ln()).min(1.0)
}

/// Both conditional metrics of one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmValue {
    pub q_cm_did: f64,
    pub q_cm_h: f64,
    /// `|D_Rk ∩ D_Mj|`
    pub support: u64,
}

fn cm_from_counts(overall: &[f64], conditioned_counts: &[u64]) -> CmValue {
    let support: u64 = conditioned_counts.iter().sum();
    if support == 0 {
        return CmValue {
            q_cm_did: 0.0,
            q_cm_h: 0.0,
            support: 0,
        };
    }
    let conditioned = probabilities(conditioned_counts);
    CmValue {
        q_cm_did: total_variation(overall, &conditioned).min(1.0),
        q_cm_h: normalized_entropy_difference(overall, &conditioned),
        support,
    }
}

/// Missingness in `j` conditioned on recorded values of `k`.
pub fn cm_pair(d: &IncompleteDataset, j: usize, k: usize) -> Result<CmValue> {
    let target = d.variable(j)?;
    let binning = VariableBinning::of(d, k)?;
    let overall = binning.overall();
    Ok(cm_from_counts(
        &overall.probabilities,
        &binning.counts(target.missing_set()),
    ))
}

pub fn cm_density_difference(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(cm_pair(d, j, k)?.q_cm_did)
}

pub fn cm_entropy(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(cm_pair(d, j, k)?.q_cm_h)
}

/// Per-variable binnings, computed once per dataset. Variables without any
/// recorded value have no binning.
#[derive(Debug, Clone)]
pub struct BinningCache {
    binnings: Vec<Option<VariableBinning>>,
    overall: Vec<Option<Vec<f64>>>,
}

impl BinningCache {
    pub fn compute(d: &IncompleteDataset) -> Result<Self> {
        let binnings = (0..d.variable_count())
            .into_par_iter()
            .map(|k| match VariableBinning::of(d, k) {
                Ok(b) => Ok(Some(b)),
                Err(Error::NoSupport(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        let overall = binnings
            .iter()
            .map(|b| b.as_ref().map(|b| b.overall().probabilities))
            .collect();
        Ok(Self { binnings, overall })
    }

    pub fn get(&self, k: usize) -> Option<&VariableBinning> {
        self.binnings.get(k).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.binnings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binnings.is_empty()
    }

    fn pair(&self, d: &IncompleteDataset, j: usize, k: usize) -> Option<CmValue> {
        let binning = self.get(k)?;
        let overall = self.overall[k].as_ref()?;
        let counts = binning.counts(d.variables()[j].missing_set());
        Some(cm_from_counts(overall, &counts))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMatrices {
    pub density_difference: PairwiseQMMatrix,
    pub entropy: PairwiseQMMatrix,
}

impl ConditionalMatrices {
    pub fn get(&self, metric: Metric) -> Option<&PairwiseQMMatrix> {
        match metric {
            Metric::CmDid => Some(&self.density_difference),
            Metric::CmH => Some(&self.entropy),
            _ => None,
        }
    }

    /// Symmetric per-pair view, e.g. for ordering or undirected edges.
    pub fn aggregated(&self, metric: Metric, aggregation: Aggregation) -> Option<PairwiseQMMatrix> {
        self.get(metric).map(|m| m.symmetrized(aggregation))
    }
}

/// Both conditional matrices over all ordered pairs `j ≠ k`. Entries whose
/// condition variable has no recorded values are not applicable (`None`).
pub fn cm_matrices(d: &IncompleteDataset) -> Result<ConditionalMatrices> {
    let cache = BinningCache::compute(d)?;
    cm_matrices_with(d, &cache)
}

pub fn cm_matrices_with(d: &IncompleteDataset, cache: &BinningCache) -> Result<ConditionalMatrices> {
    let k_count = d.variable_count();
    if k_count < 2 {
        return Err(Error::TooFewVariables(k_count));
    }
    let rows: Vec<Vec<Option<CmValue>>> = (0..k_count)
        .into_par_iter()
        .map(|j| {
            (0..k_count)
                .map(|k| if j == k { None } else { cache.pair(d, j, k) })
                .collect()
        })
        .collect();

    let names = d.variable_names();
    let mut density_difference = PairwiseQMMatrix::new(Metric::CmDid, names.clone());
    let mut entropy = PairwiseQMMatrix::new(Metric::CmH, names);
    for (j, row) in rows.into_iter().enumerate() {
        for (k, value) in row.into_iter().enumerate() {
            if let Some(v) = value {
                density_difference.set(j, k, Some(v.q_cm_did), v.support);
                entropy.set(j, k, Some(v.q_cm_h), v.support);
            }
        }
    }
    Ok(ConditionalMatrices {
        density_difference,
        entropy,
    })
}

/// Everything a glyph for condition variable `k` needs while `j` is selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalProfile {
    pub target: String,
    pub condition: String,
    /// All recorded values of the condition variable; `None` if it has none.
    pub overall: Option<BinnedDistribution>,
    /// Recorded values of the condition variable over items missing in the
    /// target, on the same bins as `overall`.
    pub conditioned: Option<BinnedDistribution>,
    pub support: u64,
    /// `|D_Mj ∩ D_Mk|`
    pub joint_missing: u64,
    pub q_cm_did: Option<f64>,
    pub q_cm_h: Option<f64>,
}

pub fn conditional_profile(d: &IncompleteDataset, j: usize) -> Result<Vec<ConditionalProfile>> {
    let cache = BinningCache::compute(d)?;
    conditional_profile_with(d, &cache, j)
}

pub fn conditional_profile_with(
    d: &IncompleteDataset,
    cache: &BinningCache,
    j: usize,
) -> Result<Vec<ConditionalProfile>> {
    let target = d.variable(j)?;
    let missing = target.missing_set();
    let mut out = Vec::with_capacity(d.variable_count().saturating_sub(1));
    for (k, cond) in d.variables().iter().enumerate() {
        if k == j {
            continue;
        }
        let joint_missing = missing.intersection_len(cond.missing_set()) as u64;
        let profile = match cache.get(k) {
            Some(binning) => {
                let overall = binning.overall();
                let conditioned = binning.subset(missing);
                let value = cm_from_counts(&overall.probabilities, &conditioned.counts);
                ConditionalProfile {
                    target: target.name().to_string(),
                    condition: cond.name().to_string(),
                    overall: Some(overall),
                    conditioned: Some(conditioned),
                    support: value.support,
                    joint_missing,
                    q_cm_did: Some(value.q_cm_did),
                    q_cm_h: Some(value.q_cm_h),
                }
            }
            None => ConditionalProfile {
                target: target.name().to_string(),
                condition: cond.name().to_string(),
                overall: None,
                conditioned: None,
                support: 0,
                joint_missing,
                q_cm_did: None,
                q_cm_h: None,
            },
        };
        out.push(profile);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableColumn;

    fn target(mask: &[bool]) -> VariableColumn {
        VariableColumn::numerical("j", mask.iter().map(|&m| (!m).then_some(0.0)).collect()).unwrap()
    }

    #[test]
    fn tv_and_entropy_hand_values() {
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
        assert_eq!(total_variation(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        let uniform = [0.25; 4];
        assert!((shannon_entropy(&uniform) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0]), 0.0);
        assert!((normalized_entropy_difference(&uniform, &[1.0, 0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(normalized_entropy_difference(&[1.0], &[1.0]), 0.0);
    }

    #[test]
    fn identical_distribution_scores_zero() {
        // condition values 0,1,0,1,...; target missing on items 0..4 (two of each)
        let cond = VariableColumn::complete("k", (0..8).map(|i| (i % 2) as f64).collect()).unwrap();
        let mask = [true, true, true, true, false, false, false, false];
        let d = IncompleteDataset::new("t", vec![target(&mask), cond]).unwrap();
        let v = cm_pair(&d, 0, 1).unwrap();
        assert_eq!(v.q_cm_did, 0.0);
        assert_eq!(v.q_cm_h, 0.0);
        assert_eq!(v.support, 4);
    }

    #[test]
    fn concentrated_in_one_of_two_bins() {
        let cond = VariableColumn::complete("k", (0..8).map(|i| (i % 2) as f64).collect()).unwrap();
        // missing exactly where k == 1
        let mask: Vec<bool> = (0..8).map(|i| i % 2 == 1).collect();
        let d = IncompleteDataset::new("t", vec![target(&mask), cond]).unwrap();
        assert_eq!(cm_density_difference(&d, 0, 1).unwrap(), 0.5);
        assert_eq!(cm_entropy(&d, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn uniform_four_bins_collapse_to_one() {
        let cond = VariableColumn::categorical(
            "k",
            ["a", "b", "c", "d"].iter().cycle().take(8).map(|s| Some(s.to_string())).collect(),
        );
        let mask: Vec<bool> = (0..8).map(|i| i % 4 == 2).collect();
        let d = IncompleteDataset::new("t", vec![target(&mask), cond]).unwrap();
        assert_eq!(cm_entropy(&d, 0, 1).unwrap(), 1.0);
        assert_eq!(cm_density_difference(&d, 0, 1).unwrap(), 0.75);
    }

    #[test]
    fn zero_support_and_no_support() {
        let cond = VariableColumn::complete("k", vec![1.0, 2.0, 3.0]).unwrap();
        let empty = VariableColumn::numerical("e", vec![None, None, None]).unwrap();
        let d = IncompleteDataset::new("t", vec![target(&[false; 3]), cond, empty]).unwrap();
        let v = cm_pair(&d, 0, 1).unwrap();
        assert_eq!((v.q_cm_did, v.q_cm_h, v.support), (0.0, 0.0, 0));
        assert!(matches!(cm_pair(&d, 0, 2), Err(Error::NoSupport(_))));

        let m = cm_matrices(&d).unwrap();
        // row of a fully recorded target
        for k in 1..3 {
            assert_eq!(m.density_difference.support(0, k), 0);
        }
        assert_eq!(m.density_difference.get(0, 1), Some(0.0));
        assert_eq!(m.density_difference.get(0, 2), None);
        assert_eq!(m.density_difference.get(1, 1), None);
        assert_eq!(m.density_difference.entries().count(), 6);
        // items missing in `e` are recorded in `k`
        assert_eq!(m.density_difference.support(2, 1), 3);
    }

    #[test]
    fn profile_excludes_selected_and_shares_bins() {
        let cond = VariableColumn::complete("k", (0..8).map(|i| i as f64).collect()).unwrap();
        let other = VariableColumn::numerical("o", (0..8).map(|i| (i % 3 != 0).then_some(i as f64)).collect())
            .unwrap();
        let mask: Vec<bool> = (0..8).map(|i| i < 3).collect();
        let d = IncompleteDataset::new("t", vec![target(&mask), cond, other]).unwrap();
        let profiles = conditional_profile(&d, 0).unwrap();
        assert_eq!(profiles.len(), 2);
        assert!(profiles.iter().all(|p| p.condition != "j"));
        for p in &profiles {
            let (o, c) = (p.overall.as_ref().unwrap(), p.conditioned.as_ref().unwrap());
            assert_eq!(o.bins, c.bins);
            assert_eq!(c.total(), p.support);
        }
        assert_eq!(profiles[1].joint_missing, 1);

        // fully recorded selection
        let profiles = conditional_profile(&d, 1).unwrap();
        assert!(profiles.iter().all(|p| p.support == 0 && p.joint_missing == 0));
        assert!(profiles
            .iter()
            .all(|p| p.conditioned.as_ref().is_none_or(|c| c.total() == 0)));
    }
}
