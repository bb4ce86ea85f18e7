//! Joint missingness: magnitude, the independence baseline, and the signed
//! and absolute deviation from it.
//!
//! All values are ratios of integer counts, formed in `i128` and divided once,
//! so that any independent recount yields bit-identical results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::IncompleteDataset;
use crate::error::{Error, Result};
use crate::matrix::{Metric, PairwiseQMMatrix};

/// Raw counts behind every joint-missingness value of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCounts {
    pub items: usize,
    pub missing_j: usize,
    pub missing_k: usize,
    /// `|D_Mj ∩ D_Mk|`
    pub joint: usize,
}

impl JointCounts {
    pub fn of(d: &IncompleteDataset, j: usize, k: usize) -> Result<Self> {
        let vj = d.variable(j)?;
        let vk = d.variable(k)?;
        if d.item_count() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            items: d.item_count(),
            missing_j: vj.missing_count(),
            missing_k: vk.missing_count(),
            joint: vj.missing_set().intersection_len(vk.missing_set()),
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.joint as f64 / self.items as f64
    }

    pub fn expected(&self) -> f64 {
        let n = self.items as i128;
        ratio(self.missing_j as i128 * self.missing_k as i128, n * n)
    }

    /// `(joint·N − m_j·m_k) / N²`
    pub fn directional(&self) -> f64 {
        let n = self.items as i128;
        ratio(
            self.joint as i128 * n - self.missing_j as i128 * self.missing_k as i128,
            n * n,
        )
    }

    pub fn absolute(&self) -> f64 {
        self.directional().abs()
    }
}

fn ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

pub fn jm_magnitude(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(JointCounts::of(d, j, k)?.magnitude())
}

/// Product of the two empirical missing fractions.
pub fn expected_jm(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(JointCounts::of(d, j, k)?.expected())
}

/// Positive when the pair is jointly missing more often than chance predicts.
pub fn jm_directional(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(JointCounts::of(d, j, k)?.directional())
}

pub fn jm_absolute(d: &IncompleteDataset, j: usize, k: usize) -> Result<f64> {
    Ok(JointCounts::of(d, j, k)?.absolute())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMatrices {
    pub magnitude: PairwiseQMMatrix,
    pub directional: PairwiseQMMatrix,
    pub absolute: PairwiseQMMatrix,
}

impl JointMatrices {
    pub fn get(&self, metric: Metric) -> Option<&PairwiseQMMatrix> {
        match metric {
            Metric::JmMag => Some(&self.magnitude),
            Metric::JmDir => Some(&self.directional),
            Metric::JmAbs => Some(&self.absolute),
            _ => None,
        }
    }
}

/// All three joint matrices. Support is `|D_Mj ∩ D_Mk|`; the magnitude
/// diagonal holds `Q_AM`, the deviation diagonals are not applicable.
pub fn jm_matrices(d: &IncompleteDataset) -> Result<JointMatrices> {
    let k_count = d.variable_count();
    if k_count < 2 {
        return Err(Error::TooFewVariables(k_count));
    }
    let n = d.item_count();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let names = d.variable_names();
    let vars = d.variables();

    let rows: Vec<Vec<usize>> = (0..k_count)
        .into_par_iter()
        .map(|j| {
            let mj = vars[j].missing_set();
            ((j + 1)..k_count)
                .map(|k| mj.intersection_len(vars[k].missing_set()))
                .collect()
        })
        .collect();

    let mut magnitude = PairwiseQMMatrix::new(Metric::JmMag, names.clone());
    let mut directional = PairwiseQMMatrix::new(Metric::JmDir, names.clone());
    let mut absolute = PairwiseQMMatrix::new(Metric::JmAbs, names);

    for (j, row) in rows.into_iter().enumerate() {
        let mj = vars[j].missing_count();
        magnitude.set(j, j, Some(mj as f64 / n as f64), mj as u64);
        for (offset, joint) in row.into_iter().enumerate() {
            let k = j + 1 + offset;
            let counts = JointCounts {
                items: n,
                missing_j: mj,
                missing_k: vars[k].missing_count(),
                joint,
            };
            let support = joint as u64;
            magnitude.set(j, k, Some(counts.magnitude()), support);
            directional.set(j, k, Some(counts.directional()), support);
            absolute.set(j, k, Some(counts.absolute()), support);
        }
    }

    Ok(JointMatrices {
        magnitude,
        directional,
        absolute,
    })
}
