//! Quality metrics for missing data in tabular datasets.
//!
//! A dataset is a set of items (rows) over variables (columns) where any cell
//! may be missing. The crate measures how much is missing per variable, how
//! missingness co-occurs between variables, and how missingness in one
//! variable relates to the recorded values of another. It also orders and
//! selects variables by those metrics, injects synthetic missingness with a
//! known ground truth, and exports the results as graph tables.
//!
//! ```
//! use missq_core::{jm_matrices, profile, IncompleteDataset, VariableColumn};
//!
//! let d = IncompleteDataset::new(
//!     "demo",
//!     vec![
//!         VariableColumn::numerical("a", vec![Some(1.0), None, Some(3.0), None]).unwrap(),
//!         VariableColumn::numerical("b", vec![None, None, Some(2.0), Some(5.0)]).unwrap(),
//!     ],
//! )
//! .unwrap();
//! assert_eq!(profile(&d).unwrap().q_am(), vec![0.5, 0.5]);
//! let jm = jm_matrices(&d).unwrap();
//! assert_eq!(jm.magnitude.get(0, 1), Some(0.25));
//! assert_eq!(jm.directional.get(0, 1), Some(0.0));
//! ```

pub mod analysis;
pub mod binning;
pub mod conditional;
pub mod csv_io;
pub mod dataset;
pub mod error;
pub mod export;
pub mod filter;
pub mod item_set;
pub mod joint;
pub mod matrix;
pub mod missgen;
pub mod ordering;
pub mod synthetic;
pub mod univariate;

pub use analysis::Analysis;
pub use binning::{bin_distribution, optimal_bin_count, BinnedDistribution, Bins, VariableBinning, MAX_BINS};
pub use conditional::{
    cm_density_difference, cm_entropy, cm_matrices, cm_pair, conditional_profile, BinningCache, CmValue,
    ConditionalMatrices, ConditionalProfile,
};
pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use dataset::{
    Cell, DatasetSummary, IncompleteDataset, IngestConfig, VariableColumn, VariableKind, DEFAULT_MISSING_TOKENS,
};
pub use error::{Error, ErrorKind, Result};
pub use export::{export_matrix_csv, export_network, read_matrix_csv, NetworkExport};
pub use filter::{CompareOp, EdgeFilter, MatrixSet, Predicate};
pub use item_set::ItemSet;
pub use joint::{expected_jm, jm_absolute, jm_directional, jm_magnitude, jm_matrices, JointCounts, JointMatrices};
pub use matrix::{Aggregation, Metric, PairwiseQMMatrix};
pub use missgen::{generate, inject_am, inject_cm, inject_jm, GenerationMode, GroundTruthManifest, MissingnessSpec};
pub use ordering::{order_by_pairwise, order_by_univariate, select_by_edges, threshold_select, SelectionSource, VariableOrdering};
pub use univariate::{amount_missing, profile, MissingnessProfile};
