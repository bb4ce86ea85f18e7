//! Every metric of one dataset, computed together.

use serde::Serialize;

use crate::conditional::{cm_matrices_with, BinningCache, ConditionalMatrices};
use crate::dataset::IncompleteDataset;
use crate::error::Result;
use crate::filter::MatrixSet;
use crate::joint::{jm_matrices, JointMatrices};
use crate::univariate::{profile, MissingnessProfile};

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub profile: MissingnessProfile,
    pub joint: JointMatrices,
    pub conditional: ConditionalMatrices,
    #[serde(skip)]
    pub binning: BinningCache,
}

impl Analysis {
    pub fn compute(d: &IncompleteDataset) -> Result<Self> {
        let profile = profile(d)?;
        let joint = jm_matrices(d)?;
        let binning = BinningCache::compute(d)?;
        let conditional = cm_matrices_with(d, &binning)?;
        Ok(Self {
            profile,
            joint,
            conditional,
            binning,
        })
    }

    pub fn matrices(&self) -> MatrixSet {
        MatrixSet::from_parts(Some(&self.joint), Some(&self.conditional))
    }
}
