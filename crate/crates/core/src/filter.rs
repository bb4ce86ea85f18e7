//! Threshold predicates (`jm_dir<0.05`) and conjunctive edge filters
//! (`jm_dir<0.05,cm_did>0.9`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conditional::ConditionalMatrices;
use crate::error::{Error, Result};
use crate::joint::JointMatrices;
use crate::matrix::{Aggregation, Metric, PairwiseQMMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CompareOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            CompareOp::Lt => value < threshold,
            CompareOp::Le => value <= threshold,
            CompareOp::Gt => value > threshold,
            CompareOp::Ge => value >= threshold,
        }
    }
}

impl FromStr for CompareOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "<" | "lt" => Ok(CompareOp::Lt),
            "<=" | "le" => Ok(CompareOp::Le),
            ">" | "gt" => Ok(CompareOp::Gt),
            ">=" | "ge" => Ok(CompareOp::Ge),
            other => Err(Error::InvalidPredicate(other.to_string())),
        }
    }
}

/// `metric op threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub metric: Metric,
    pub op: CompareOp,
    pub threshold: f64,
}

impl Predicate {
    pub fn new(metric: Metric, op: CompareOp, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidPredicate(format!("{metric}{}{threshold}", op.as_str())));
        }
        Ok(Self { metric, op, threshold })
    }

    /// Not-applicable values never satisfy a predicate.
    pub fn holds(&self, value: Option<f64>) -> bool {
        value.is_some_and(|v| self.op.holds(v, self.threshold))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.metric, self.op.as_str(), self.threshold)
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPredicate(s.to_string());
        let at = s.find(['<', '>']).ok_or_else(bad)?;
        let (lhs, rest) = s.split_at(at);
        let op_len = if rest[1..].starts_with('=') { 2 } else { 1 };
        let op: CompareOp = rest[..op_len].parse().map_err(|_| bad())?;
        let metric: Metric = lhs.trim().parse()?;
        let threshold: f64 = rest[op_len..].trim().parse().map_err(|_| bad())?;
        Predicate::new(metric, op, threshold)
    }
}

/// Pairwise matrices keyed by metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatrixSet {
    matrices: BTreeMap<Metric, PairwiseQMMatrix>,
}

impl MatrixSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(joint: Option<&JointMatrices>, conditional: Option<&ConditionalMatrices>) -> Self {
        let mut set = Self::new();
        if let Some(j) = joint {
            set.insert(j.magnitude.clone());
            set.insert(j.directional.clone());
            set.insert(j.absolute.clone());
        }
        if let Some(c) = conditional {
            set.insert(c.density_difference.clone());
            set.insert(c.entropy.clone());
        }
        set
    }

    pub fn insert(&mut self, matrix: PairwiseQMMatrix) {
        self.matrices.insert(matrix.metric(), matrix);
    }

    pub fn get(&self, metric: Metric) -> Option<&PairwiseQMMatrix> {
        self.matrices.get(&metric)
    }

    pub fn require(&self, metric: Metric) -> Result<&PairwiseQMMatrix> {
        self.get(metric).ok_or_else(|| Error::MetricUnavailable {
            metric: metric.to_string(),
            reason: "matrix not computed".into(),
        })
    }

    pub fn metrics(&self) -> impl Iterator<Item = Metric> + '_ {
        self.matrices.keys().copied()
    }

    /// Number of variables, taken from any member matrix.
    pub fn size(&self) -> usize {
        self.matrices.values().next().map_or(0, PairwiseQMMatrix::size)
    }

    pub fn variables(&self) -> &[String] {
        self.matrices.values().next().map_or(&[], |m| m.variables())
    }
}

/// Conjunction of pairwise predicates evaluated on unordered pairs.
/// Directional metrics are collapsed per pair with `aggregation` (default
/// max, i.e. the stronger direction).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeFilter {
    pub predicates: Vec<Predicate>,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl EdgeFilter {
    pub fn new(predicates: Vec<Predicate>) -> Result<Self> {
        if let Some(p) = predicates.iter().find(|p| !p.metric.is_pairwise()) {
            return Err(Error::MetricUnavailable {
                metric: p.metric.to_string(),
                reason: "edge filters take pairwise metrics only".into(),
            });
        }
        Ok(Self {
            predicates,
            aggregation: Aggregation::default(),
        })
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    /// Fails if a predicate names a metric absent from `matrices`.
    pub fn check(&self, matrices: &MatrixSet) -> Result<()> {
        for p in &self.predicates {
            matrices.require(p.metric)?;
        }
        Ok(())
    }

    pub fn accepts(&self, matrices: &MatrixSet, j: usize, k: usize) -> Result<bool> {
        for p in &self.predicates {
            let value = matrices.require(p.metric)?.pair_value(j, k, self.aggregation);
            if !p.holds(value) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Satisfying pairs `(j, k)` with `j < k`, row-major.
    pub fn select_edges(&self, matrices: &MatrixSet) -> Result<Vec<(usize, usize)>> {
        self.check(matrices)?;
        let n = matrices.size();
        let mut out = Vec::new();
        for j in 0..n {
            for k in (j + 1)..n {
                if self.accepts(matrices, j, k)? {
                    out.push((j, k));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for EdgeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.predicates.iter().map(Predicate::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for EdgeFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let predicates = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Predicate>>>()?;
        EdgeFilter::new(predicates)
    }
}
