//! Amount missing per variable and the dataset-level profile.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::IncompleteDataset;
use crate::error::{Error, Result};

/// `|D_Mj| / N`.
pub fn amount_missing(d: &IncompleteDataset, j: usize) -> Result<f64> {
    let col = d.variable(j)?;
    if d.item_count() == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(col.missing_count() as f64 / d.item_count() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub variable: String,
    pub q_am: f64,
    pub missing_count: usize,
    pub recorded_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessProfile {
    pub item_count: usize,
    pub entries: Vec<ProfileEntry>,
    /// Missing cells over all `K·N` cells.
    pub total_missing_fraction: f64,
}

impl MissingnessProfile {
    pub fn q_am(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.q_am).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Two columns, `variable,q_am`, values with nine decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["variable", "q_am"])?;
        for e in &self.entries {
            wtr.write_record([e.variable.as_str(), &format!("{:.9}", e.q_am)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn profile(d: &IncompleteDataset) -> Result<MissingnessProfile> {
    let n = d.item_count();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let entries: Vec<ProfileEntry> = d
        .variables()
        .iter()
        .map(|v| ProfileEntry {
            variable: v.name().to_string(),
            q_am: v.missing_count() as f64 / n as f64,
            missing_count: v.missing_count(),
            recorded_count: v.recorded_count(),
        })
        .collect();
    let cells = d.variable_count() * n;
    let total_missing_fraction = if cells == 0 {
        0.0
    } else {
        d.total_missing() as f64 / cells as f64
    };
    Ok(MissingnessProfile {
        item_count: n,
        entries,
        total_missing_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableColumn;
    use proptest::prelude::*;

    fn column(name: &str, mask: &[bool]) -> VariableColumn {
        VariableColumn::numerical(
            name,
            mask.iter()
                .enumerate()
                .map(|(i, m)| (!m).then_some(i as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn amount_missing_cases() {
        let mut three = vec![false; 10];
        three[1] = true;
        three[4] = true;
        three[9] = true;
        let d = IncompleteDataset::new(
            "t",
            vec![
                column("full", &[false; 10]),
                column("none", &[true; 10]),
                column("three", &three),
            ],
        )
        .unwrap();
        assert_eq!(amount_missing(&d, 0).unwrap(), 0.0);
        assert_eq!(amount_missing(&d, 1).unwrap(), 1.0);
        assert_eq!(amount_missing(&d, 2).unwrap(), 0.3);
        assert!(amount_missing(&d, 3).is_err());
    }

    #[test]
    fn empty_dataset_is_error() {
        let d = IncompleteDataset::new("t", vec![column("a", &[])]).unwrap();
        assert!(matches!(amount_missing(&d, 0), Err(Error::EmptyDataset)));
        assert!(matches!(profile(&d), Err(Error::EmptyDataset)));
    }

    #[test]
    fn two_variable_profile() {
        let d = IncompleteDataset::new("t", vec![column("a", &[false; 4]), column("b", &[true; 4])])
            .unwrap();
        let p = profile(&d).unwrap();
        assert_eq!(p.q_am(), vec![0.0, 1.0]);
        assert_eq!(p.total_missing_fraction, 0.5);
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "variable,q_am\na,0.000000000\nb,1.000000000\n"
        );
    }

    #[test]
    fn zero_missing_profile() {
        let d = IncompleteDataset::new("t", vec![column("a", &[false; 4]), column("b", &[false; 4])])
            .unwrap();
        let p = profile(&d).unwrap();
        assert!(p.q_am().iter().all(|&q| q == 0.0));
        assert_eq!(p.total_missing_fraction, 0.0);
    }

    fn arb_masks() -> impl Strategy<Value = Vec<Vec<bool>>> {
        (1usize..50, 1usize..6).prop_flat_map(|(n, k)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), k)
        })
    }

    proptest! {
        #[test]
        fn matches_cell_recount_and_is_permutation_invariant(masks in arb_masks(), seed in any::<u64>()) {
            let cols: Vec<_> = masks.iter().enumerate().map(|(i, m)| column(&format!("v{i}"), m)).collect();
            let d = IncompleteDataset::new("t", cols).unwrap();
            let n = d.item_count();
            let p = profile(&d).unwrap();
            for (j, mask) in masks.iter().enumerate() {
                let mut count = 0usize;
                for &cell in mask {
                    if cell { count += 1; }
                }
                prop_assert_eq!(p.entries[j].q_am, count as f64 / n as f64);
                prop_assert!((0.0..=1.0).contains(&p.entries[j].q_am));
                prop_assert_eq!(p.entries[j].missing_count + p.entries[j].recorded_count, n);
            }
            // reverse-rotate the items by a seed-dependent amount
            let shift = (seed as usize) % n;
            let order: Vec<usize> = (0..n).rev().map(|i| (i + shift) % n).collect();
            let permuted = profile(&d.permute_items(&order).unwrap()).unwrap();
            prop_assert_eq!(permuted.q_am(), p.q_am());
        }
    }
}
