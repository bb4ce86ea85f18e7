//! Metric-driven variable orderings and threshold selections.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{EdgeFilter, MatrixSet, Predicate};
use crate::matrix::{Aggregation, Metric, PairwiseQMMatrix};
use crate::univariate::MissingnessProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableOrdering {
    pub metric: Metric,
    /// `permutation[p]` is the variable index placed at position `p`.
    pub permutation: Vec<usize>,
    /// Names in permuted order.
    pub variables: Vec<String>,
    pub anchor_pair: (usize, usize),
}

impl VariableOrdering {
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.permutation.len()];
        for &p in &self.permutation {
            if p >= seen.len() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        true
    }

    pub fn position(&self, variable: usize) -> Option<usize> {
        self.permutation.iter().position(|&p| p == variable)
    }
}

/// Stable sort by amount missing; equal values keep dataset order.
pub fn order_by_univariate(profile: &MissingnessProfile, descending: bool) -> VariableOrdering {
    let q = profile.q_am();
    let mut permutation: Vec<usize> = (0..q.len()).collect();
    permutation.sort_by(|&a, &b| {
        let ord = q[a].total_cmp(&q[b]);
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    let anchor_pair = match permutation.as_slice() {
        [a, b, ..] => (*a, *b),
        [a] => (*a, *a),
        [] => (0, 0),
    };
    VariableOrdering {
        metric: Metric::QAm,
        variables: permutation
            .iter()
            .map(|&i| profile.entries[i].variable.clone())
            .collect(),
        permutation,
        anchor_pair,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Left,
    Right,
}

/// Greedy ordering from the highest-valued pair outward: each step takes the
/// unplaced variable with the largest value against either end of the current
/// sequence and attaches it there. Ties go to the lower variable index and to
/// the left end. Directional matrices are symmetrized by max first.
pub fn order_by_pairwise(matrix: &PairwiseQMMatrix) -> Result<VariableOrdering> {
    let k = matrix.size();
    if k < 2 {
        return Err(Error::TooFewVariables(k));
    }
    let value = |a: usize, b: usize| {
        matrix
            .pair_value(a, b, Aggregation::Max)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut anchor = (0, 1);
    let mut best = value(0, 1);
    for a in 0..k {
        for b in (a + 1)..k {
            if value(a, b).total_cmp(&best) == Ordering::Greater {
                best = value(a, b);
                anchor = (a, b);
            }
        }
    }

    let mut sequence = std::collections::VecDeque::with_capacity(k);
    sequence.push_back(anchor.0);
    sequence.push_back(anchor.1);
    let mut placed = vec![false; k];
    placed[anchor.0] = true;
    placed[anchor.1] = true;

    for _ in 2..k {
        let left = *sequence.front().unwrap();
        let right = *sequence.back().unwrap();
        let mut choice: Option<(f64, usize, End)> = None;
        for u in (0..k).filter(|&u| !placed[u]) {
            let (lv, rv) = (value(u, left), value(u, right));
            let (v, end) = if lv.total_cmp(&rv) != Ordering::Less {
                (lv, End::Left)
            } else {
                (rv, End::Right)
            };
            if choice.is_none_or(|(cv, _, _)| v.total_cmp(&cv) == Ordering::Greater) {
                choice = Some((v, u, end));
            }
        }
        let (_, u, end) = choice.expect("unplaced variable remains");
        placed[u] = true;
        match end {
            End::Left => sequence.push_front(u),
            End::Right => sequence.push_back(u),
        }
    }

    let permutation: Vec<usize> = sequence.into_iter().collect();
    Ok(VariableOrdering {
        metric: matrix.metric(),
        variables: permutation
            .iter()
            .map(|&i| matrix.variables()[i].clone())
            .collect(),
        permutation,
        anchor_pair: anchor,
    })
}

/// What a threshold selection runs over.
#[derive(Debug, Clone, Copy)]
pub enum SelectionSource<'a> {
    Profile(&'a MissingnessProfile),
    Matrix(&'a PairwiseQMMatrix),
}

/// Variables whose metric value satisfies `predicate`; for pairwise metrics,
/// variables incident to at least one satisfying pair, scored by their best
/// satisfying pair. Sorted by descending value (ties by index), then cut to `top_n`.
pub fn threshold_select(
    source: SelectionSource<'_>,
    predicate: &Predicate,
    top_n: Option<usize>,
) -> Result<Vec<usize>> {
    let scored: Vec<(usize, f64)> = match source {
        SelectionSource::Profile(profile) => {
            if predicate.metric != Metric::QAm {
                return Err(Error::MetricUnavailable {
                    metric: predicate.metric.to_string(),
                    reason: "a profile only carries q_am".into(),
                });
            }
            profile
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| predicate.holds(Some(e.q_am)))
                .map(|(i, e)| (i, e.q_am))
                .collect()
        }
        SelectionSource::Matrix(matrix) => {
            if predicate.metric != matrix.metric() {
                return Err(Error::MetricUnavailable {
                    metric: predicate.metric.to_string(),
                    reason: format!("matrix holds {}", matrix.metric()),
                });
            }
            let mut best: BTreeMap<usize, f64> = BTreeMap::new();
            let n = matrix.size();
            for j in 0..n {
                for k in (j + 1)..n {
                    let v = matrix.pair_value(j, k, Aggregation::Max);
                    if let Some(v) = v.filter(|_| predicate.holds(v)) {
                        for i in [j, k] {
                            let slot = best.entry(i).or_insert(v);
                            *slot = slot.max(v);
                        }
                    }
                }
            }
            best.into_iter().collect()
        }
    };
    Ok(rank(scored, top_n))
}

/// Variables incident to at least one pair passing every predicate of
/// `filter`, scored by the first predicate's metric.
pub fn select_by_edges(
    matrices: &MatrixSet,
    filter: &EdgeFilter,
    top_n: Option<usize>,
) -> Result<Vec<usize>> {
    let edges = filter.select_edges(matrices)?;
    let Some(first) = filter.predicates.first() else {
        return Ok(rank((0..matrices.size()).map(|i| (i, 0.0)).collect(), top_n));
    };
    let lead = matrices.require(first.metric)?;
    let mut best: BTreeMap<usize, f64> = BTreeMap::new();
    for (j, k) in edges {
        let v = lead
            .pair_value(j, k, filter.aggregation)
            .unwrap_or(f64::NEG_INFINITY);
        for i in [j, k] {
            let slot = best.entry(i).or_insert(v);
            *slot = slot.max(v);
        }
    }
    Ok(rank(best.into_iter().collect(), top_n))
}

fn rank(mut scored: Vec<(usize, f64)>, top_n: Option<usize>) -> Vec<usize> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out: Vec<usize> = scored.into_iter().map(|(i, _)| i).collect();
    if let Some(n) = top_n {
        out.truncate(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::univariate::ProfileEntry;

    fn profile(q: &[f64]) -> MissingnessProfile {
        MissingnessProfile {
            item_count: 100,
            entries: q
                .iter()
                .enumerate()
                .map(|(i, &q)| ProfileEntry {
                    variable: format!("v{i}"),
                    q_am: q,
                    missing_count: (q * 100.0) as usize,
                    recorded_count: 100 - (q * 100.0) as usize,
                })
                .collect(),
            total_missing_fraction: 0.0,
        }
    }

    fn symmetric(metric: Metric, names: &[&str], pairs: &[(usize, usize, f64)]) -> PairwiseQMMatrix {
        let mut m = PairwiseQMMatrix::new(metric, names.iter().map(|s| s.to_string()).collect());
        for j in 0..names.len() {
            for k in (j + 1)..names.len() {
                m.set(j, k, Some(0.0), 0);
            }
        }
        for &(j, k, v) in pairs {
            m.set(j, k, Some(v), 0);
        }
        m
    }

    #[test]
    fn univariate_descending_and_stable() {
        let o = order_by_univariate(&profile(&[0.1, 0.5, 0.3]), true);
        assert_eq!(o.permutation, vec![1, 2, 0]);
        assert_eq!(o.anchor_pair, (1, 2));
        let o = order_by_univariate(&profile(&[0.2, 0.2, 0.2, 0.2]), true);
        assert_eq!(o.permutation, vec![0, 1, 2, 3]);
        let o = order_by_univariate(&profile(&[0.1, 0.5, 0.3]), false);
        assert_eq!(o.permutation, vec![0, 2, 1]);
    }

    #[test]
    fn pairwise_hand_simulation() {
        let m = symmetric(Metric::JmAbs, &["A", "B", "C"], &[(0, 1, 0.9), (1, 2, 0.5), (0, 2, 0.1)]);
        let o = order_by_pairwise(&m).unwrap();
        assert_eq!(o.permutation, vec![0, 1, 2]);
        assert_eq!(o.variables, vec!["A", "B", "C"]);
        assert_eq!(o.anchor_pair, (0, 1));
    }

    #[test]
    fn pairwise_all_zero_uses_tie_rules() {
        let m = symmetric(Metric::JmAbs, &["A", "B", "C", "D"], &[]);
        let o = order_by_pairwise(&m).unwrap();
        assert_eq!(o.anchor_pair, (0, 1));
        // C ties on both ends → left; then D ties → left
        assert_eq!(o.permutation, vec![3, 2, 0, 1]);
    }

    #[test]
    fn pairwise_directional_symmetrized_by_max() {
        let mut m = PairwiseQMMatrix::new(Metric::CmH, vec!["a".into(), "b".into(), "c".into()]);
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    m.set(j, k, Some(0.0), 0);
                }
            }
        }
        m.set(2, 1, Some(0.8), 4);
        let o = order_by_pairwise(&m).unwrap();
        assert_eq!(o.anchor_pair, (1, 2));
        assert!(o.is_permutation());
    }

    #[test]
    fn pairwise_needs_two_variables() {
        let m = PairwiseQMMatrix::new(Metric::JmAbs, vec!["a".into()]);
        assert!(matches!(order_by_pairwise(&m), Err(Error::TooFewVariables(1))));
    }

    #[test]
    fn select_top_n_by_amount_missing() {
        let q: Vec<f64> = (0..20).map(|i| ((i * 7) % 20) as f64 / 20.0).collect();
        let p = profile(&q);
        let pred: Predicate = "q_am>=0".parse().unwrap();
        let sel = threshold_select(SelectionSource::Profile(&p), &pred, Some(9)).unwrap();
        assert_eq!(sel.len(), 9);
        assert!(sel.windows(2).all(|w| q[w[0]] >= q[w[1]]));
        assert_eq!(q[sel[0]], 0.95);

        let pred: Predicate = "q_am>1.0".parse().unwrap();
        assert!(threshold_select(SelectionSource::Profile(&p), &pred, None).unwrap().is_empty());

        let pred: Predicate = "jm_abs>0".parse().unwrap();
        assert!(threshold_select(SelectionSource::Profile(&p), &pred, None).is_err());
    }

    #[test]
    fn select_incident_to_pairs() {
        let m = symmetric(Metric::JmAbs, &["A", "B", "C", "D"], &[(0, 3, 0.2), (2, 3, 0.1)]);
        let pred: Predicate = "jm_abs>0.05".parse().unwrap();
        let sel = threshold_select(SelectionSource::Matrix(&m), &pred, None).unwrap();
        assert_eq!(sel, vec![0, 3, 2]);
    }

    #[test]
    fn conjunctive_edge_selection() {
        let dir = symmetric(Metric::JmDir, &["A", "B", "C"], &[(0, 1, 0.01), (0, 2, 0.2), (1, 2, -0.1)]);
        let mut cm = PairwiseQMMatrix::new(Metric::CmDid, dir.variables().to_vec());
        cm.set(0, 1, Some(0.95), 1);
        cm.set(1, 0, Some(0.2), 1);
        cm.set(0, 2, Some(0.99), 1);
        cm.set(1, 2, Some(0.5), 1);
        let mut set = MatrixSet::new();
        set.insert(dir);
        set.insert(cm);
        let f: EdgeFilter = "jm_dir<0.05,cm_did>0.9".parse().unwrap();
        assert_eq!(f.select_edges(&set).unwrap(), vec![(0, 1)]);
        assert_eq!(select_by_edges(&set, &f, None).unwrap(), vec![0, 1]);
    }
}
