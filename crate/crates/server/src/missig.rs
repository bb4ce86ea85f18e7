//! Payload behind the per-variable glyph shown while one variable is selected.

use missq_core::{Analysis, BinnedDistribution, IncompleteDataset, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Glyph {
    pub variable: String,
    /// Blue block.
    pub q_am: f64,
    pub missing_count: usize,
    /// Red block: items missing in both this variable and the selected one.
    pub joint_missing: u64,
    /// Grey histogram: all recorded values.
    pub overall: Option<BinnedDistribution>,
    /// Red histogram: recorded values over items missing in the selected
    /// variable, on the bins of `overall`.
    pub conditioned: Option<BinnedDistribution>,
    pub support: u64,
    pub q_cm_did: Option<f64>,
    pub q_cm_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissigPayload {
    pub selected: String,
    pub selected_index: usize,
    pub item_count: usize,
    pub glyphs: Vec<Glyph>,
}

/// One glyph per variable, in dataset order. The selected variable's own
/// glyph has no conditioned histogram.
pub fn payload(d: &IncompleteDataset, analysis: &Analysis, j: usize) -> Result<MissigPayload> {
    let selected = d.variable(j)?;
    let mut conditional = missq_core::conditional::conditional_profile_with(d, &analysis.binning, j)?.into_iter();
    let glyphs = d
        .variables()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let entry = &analysis.profile.entries[k];
            let joint_missing = analysis.joint.magnitude.support(j, k);
            if k == j {
                return Glyph {
                    variable: v.name().to_string(),
                    q_am: entry.q_am,
                    missing_count: entry.missing_count,
                    joint_missing: entry.missing_count as u64,
                    overall: analysis.binning.get(k).map(|b| b.overall()),
                    conditioned: None,
                    support: 0,
                    q_cm_did: None,
                    q_cm_h: None,
                };
            }
            let c = conditional.next().expect("one conditional profile per other variable");
            Glyph {
                variable: v.name().to_string(),
                q_am: entry.q_am,
                missing_count: entry.missing_count,
                joint_missing,
                overall: c.overall,
                conditioned: c.conditioned,
                support: c.support,
                q_cm_did: c.q_cm_did,
                q_cm_h: c.q_cm_h,
            }
        })
        .collect();
    Ok(MissigPayload {
        selected: selected.name().to_string(),
        selected_index: j,
        item_count: d.item_count(),
        glyphs,
    })
}
