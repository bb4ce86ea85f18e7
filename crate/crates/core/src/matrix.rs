//! Metric identifiers and the K×K pairwise metric container.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every quality metric the engine computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Amount missing (per variable).
    QAm,
    /// Joint-missing magnitude.
    JmMag,
    /// Signed deviation of joint missingness from the independence baseline.
    JmDir,
    /// Absolute deviation of joint missingness from the baseline.
    JmAbs,
    /// Conditional missingness, density difference.
    CmDid,
    /// Conditional missingness, normalized entropy difference.
    CmH,
}

impl Metric {
    pub const PAIRWISE: [Metric; 5] = [
        Metric::JmMag,
        Metric::JmDir,
        Metric::JmAbs,
        Metric::CmDid,
        Metric::CmH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::QAm => "q_am",
            Metric::JmMag => "jm_mag",
            Metric::JmDir => "jm_dir",
            Metric::JmAbs => "jm_abs",
            Metric::CmDid => "cm_did",
            Metric::CmH => "cm_h",
        }
    }

    pub fn is_pairwise(self) -> bool {
        self != Metric::QAm
    }

    /// Conditional metrics differ between `(j, k)` and `(k, j)`.
    pub fn is_directional(self) -> bool {
        matches!(self, Metric::CmDid | Metric::CmH)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect();
        let key = key.strip_prefix('q').unwrap_or(&key);
        Ok(match key {
            "am" => Metric::QAm,
            "jmmag" => Metric::JmMag,
            "jmdir" => Metric::JmDir,
            "jmabs" => Metric::JmAbs,
            "cmdid" => Metric::CmDid,
            "cmh" => Metric::CmH,
            _ => return Err(Error::UnknownMetric(s.to_string())),
        })
    }
}

/// How the two directions of a conditional metric collapse into one value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    #[default]
    Max,
    Min,
}

impl Aggregation {
    pub fn combine(self, a: Option<f64>, b: Option<f64>) -> Option<f64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(match self {
                Aggregation::Mean => (x + y) / 2.0,
                Aggregation::Max => x.max(y),
                Aggregation::Min => x.min(y),
            }),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
            Aggregation::Min => "min",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "avg" | "average" => Ok(Aggregation::Mean),
            "max" | "maximum" => Ok(Aggregation::Max),
            "min" | "minimum" => Ok(Aggregation::Min),
            other => Err(Error::UnknownAggregation(other.to_string())),
        }
    }
}

/// K×K values of one pairwise metric with per-entry support counts.
///
/// Entry `(j, k)` of a directional matrix describes missingness in `j`
/// conditioned on recorded values of `k`. `None` marks entries that are not
/// applicable (the diagonal for everything except `jm_mag`, and pairs whose
/// condition variable has no recorded values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct PairwiseQMMatrix {
    metric: Metric,
    symmetric: bool,
    variables: Vec<String>,
    values: Vec<Option<f64>>,
    support: Vec<u64>,
}

impl PairwiseQMMatrix {
    pub fn new(metric: Metric, variables: Vec<String>) -> Self {
        let k = variables.len();
        Self {
            metric,
            symmetric: !metric.is_directional(),
            variables,
            values: vec![None; k * k],
            support: vec![0; k * k],
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn size(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn get(&self, j: usize, k: usize) -> Option<f64> {
        self.values[j * self.size() + k]
    }

    pub fn support(&self, j: usize, k: usize) -> u64 {
        self.support[j * self.size() + k]
    }

    /// Writes `(j, k)`, and `(k, j)` too when the matrix is symmetric.
    pub fn set(&mut self, j: usize, k: usize, value: Option<f64>, support: u64) {
        let n = self.size();
        self.values[j * n + k] = value;
        self.support[j * n + k] = support;
        if self.symmetric {
            self.values[k * n + j] = value;
            self.support[k * n + j] = support;
        }
    }

    pub fn row(&self, j: usize) -> &[Option<f64>] {
        let n = self.size();
        &self.values[j * n..(j + 1) * n]
    }

    /// Single value for the unordered pair `{j, k}`.
    pub fn pair_value(&self, j: usize, k: usize, aggregation: Aggregation) -> Option<f64> {
        if self.symmetric {
            self.get(j, k)
        } else {
            aggregation.combine(self.get(j, k), self.get(k, j))
        }
    }

    /// Off-diagonal entries in row-major order: `(j, k, value, support)`.
    /// Symmetric matrices yield only `j < k`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Option<f64>, u64)> + '_ {
        let n = self.size();
        (0..n).flat_map(move |j| {
            let start = if self.symmetric { j + 1 } else { 0 };
            (start..n)
                .filter(move |&k| k != j)
                .map(move |k| (j, k, self.get(j, k), self.support(j, k)))
        })
    }

    /// Collapses a directional matrix into a symmetric one. Support of the
    /// combined entry is the smaller of the two directions.
    pub fn symmetrized(&self, aggregation: Aggregation) -> PairwiseQMMatrix {
        if self.symmetric {
            return self.clone();
        }
        let n = self.size();
        let mut out = self.clone();
        out.symmetric = true;
        for j in 0..n {
            for k in (j + 1)..n {
                let v = self.pair_value(j, k, aggregation);
                let s = self.support(j, k).min(self.support(k, j));
                out.set(j, k, v, s);
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    metric: Metric,
    symmetric: bool,
    variables: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
    support: Vec<Vec<u64>>,
}

impl From<PairwiseQMMatrix> for MatrixRepr {
    fn from(m: PairwiseQMMatrix) -> Self {
        let n = m.size();
        let values = if n == 0 {
            Vec::new()
        } else {
            m.values.chunks(n).map(<[_]>::to_vec).collect()
        };
        let support = if n == 0 {
            Vec::new()
        } else {
            m.support.chunks(n).map(<[_]>::to_vec).collect()
        };
        MatrixRepr {
            metric: m.metric,
            symmetric: m.symmetric,
            variables: m.variables,
            values,
            support,
        }
    }
}

impl TryFrom<MatrixRepr> for PairwiseQMMatrix {
    type Error = String;

    fn try_from(r: MatrixRepr) -> std::result::Result<Self, String> {
        let n = r.variables.len();
        if r.values.len() != n
            || r.support.len() != n
            || r.values.iter().any(|row| row.len() != n)
            || r.support.iter().any(|row| row.len() != n)
        {
            return Err(format!("matrix rows must be {n}×{n}"));
        }
        Ok(PairwiseQMMatrix {
            metric: r.metric,
            symmetric: r.symmetric,
            variables: r.variables,
            values: r.values.into_iter().flatten().collect(),
            support: r.support.into_iter().flatten().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_parse() {
        for m in [Metric::QAm, Metric::JmMag, Metric::JmDir, Metric::JmAbs, Metric::CmDid, Metric::CmH] {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
        }
        assert_eq!("Q_JMabs".parse::<Metric>().unwrap(), Metric::JmAbs);
        assert_eq!("Q_CMdid".parse::<Metric>().unwrap(), Metric::CmDid);
        assert!("kl".parse::<Metric>().is_err());
    }

    #[test]
    fn symmetric_set_and_entries() {
        let mut m = PairwiseQMMatrix::new(Metric::JmAbs, vec!["a".into(), "b".into(), "c".into()]);
        m.set(0, 2, Some(0.5), 3);
        assert_eq!(m.get(2, 0), Some(0.5));
        assert_eq!(m.support(2, 0), 3);
        assert_eq!(m.entries().count(), 3);

        let d = PairwiseQMMatrix::new(Metric::CmDid, vec!["a".into(), "b".into(), "c".into()]);
        assert_eq!(d.entries().count(), 6);
    }

    #[test]
    fn symmetrize_directional() {
        let mut m = PairwiseQMMatrix::new(Metric::CmH, vec!["a".into(), "b".into()]);
        m.set(0, 1, Some(0.25), 5);
        m.set(1, 0, Some(0.75), 2);
        let s = m.symmetrized(Aggregation::Max);
        assert!(s.is_symmetric());
        assert_eq!(s.get(0, 1), Some(0.75));
        assert_eq!(s.get(1, 0), Some(0.75));
        assert_eq!(s.support(0, 1), 2);
        assert_eq!(m.pair_value(0, 1, Aggregation::Min), Some(0.25));
        assert_eq!(m.pair_value(0, 1, Aggregation::Mean), Some(0.5));
    }

    #[test]
    fn json_round_trip() {
        let mut m = PairwiseQMMatrix::new(Metric::JmDir, vec!["a".into(), "b".into()]);
        m.set(0, 1, Some(-0.0625), 4);
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"values\":[[null,-0.0625],[-0.0625,null]]"));
        let back: PairwiseQMMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
