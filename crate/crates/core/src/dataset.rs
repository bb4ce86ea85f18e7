//! Columnar incomplete tables with an explicit per-column missing mask.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item_set::ItemSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Numerical,
    Categorical,
}

impl std::fmt::Display for VariableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariableKind::Numerical => "numerical",
            VariableKind::Categorical => "categorical",
        })
    }
}

impl std::str::FromStr for VariableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "numerical" | "numeric" | "num" => Ok(VariableKind::Numerical),
            "categorical" | "category" | "cat" => Ok(VariableKind::Categorical),
            other => Err(Error::InvalidConfig(format!("unknown variable kind `{other}`"))),
        }
    }
}

/// A single cell as seen through the mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Label(&'a str),
    Missing,
}

// Slots under the mask hold 0.0 / "" so that equality only sees recorded data.
#[derive(Debug, Clone, PartialEq)]
enum ColumnData {
    Numerical(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableColumn {
    name: String,
    data: ColumnData,
    missing: ItemSet,
}

impl VariableColumn {
    /// Numerical column; `None` marks a missing cell. Recorded values must be finite.
    pub fn numerical(name: impl Into<String>, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        let mut missing = ItemSet::empty(values.len());
        let mut data = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            match v {
                Some(x) if x.is_finite() => data.push(x),
                Some(x) => {
                    return Err(Error::NotNumeric {
                        variable: name,
                        item: i,
                        value: x.to_string(),
                    })
                }
                None => {
                    missing.insert(i);
                    data.push(0.0);
                }
            }
        }
        Ok(Self {
            name,
            data: ColumnData::Numerical(data),
            missing,
        })
    }

    /// Fully recorded numerical column.
    pub fn complete(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::numerical(name, values.into_iter().map(Some).collect())
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        let mut missing = ItemSet::empty(values.len());
        let data = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| match v {
                Some(label) => label,
                None => {
                    missing.insert(i);
                    String::new()
                }
            })
            .collect();
        Self {
            name: name.into(),
            data: ColumnData::Categorical(data),
            missing,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> VariableKind {
        match self.data {
            ColumnData::Numerical(_) => VariableKind::Numerical,
            ColumnData::Categorical(_) => VariableKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.universe()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `D_Mj`.
    pub fn missing_set(&self) -> &ItemSet {
        &self.missing
    }

    /// `D_Rj`, the exact complement of [`missing_set`](Self::missing_set).
    pub fn recorded_set(&self) -> ItemSet {
        self.missing.complement()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.len()
    }

    pub fn recorded_count(&self) -> usize {
        self.len() - self.missing_count()
    }

    pub fn is_missing(&self, item: usize) -> bool {
        self.missing.contains(item)
    }

    pub fn cell(&self, item: usize) -> Cell<'_> {
        if self.missing.contains(item) {
            return Cell::Missing;
        }
        match &self.data {
            ColumnData::Numerical(v) => Cell::Number(v[item]),
            ColumnData::Categorical(v) => Cell::Label(&v[item]),
        }
    }

    pub fn number(&self, item: usize) -> Option<f64> {
        match self.cell(item) {
            Cell::Number(x) => Some(x),
            _ => None,
        }
    }

    pub fn label(&self, item: usize) -> Option<&str> {
        match self.cell(item) {
            Cell::Label(s) => Some(s),
            _ => None,
        }
    }

    /// `(item, value)` for every recorded cell of a numerical column; empty
    /// for categorical columns.
    pub fn recorded_numbers(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let values: &[f64] = match &self.data {
            ColumnData::Numerical(v) => v,
            ColumnData::Categorical(_) => &[],
        };
        values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.missing.contains(*i))
            .map(|(i, v)| (i, *v))
    }

    /// `(item, label)` for every recorded cell of a categorical column; empty
    /// for numerical columns.
    pub fn recorded_labels(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        let values: &[String] = match &self.data {
            ColumnData::Categorical(v) => v,
            ColumnData::Numerical(_) => &[],
        };
        values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.missing.contains(*i))
            .map(|(i, v)| (i, v.as_str()))
    }

    /// Copy of this column with `items` additionally masked.
    pub fn with_missing(&self, items: &ItemSet) -> Self {
        let missing = self.missing.union(items);
        let data = match &self.data {
            ColumnData::Numerical(v) => ColumnData::Numerical(
                v.iter()
                    .enumerate()
                    .map(|(i, x)| if missing.contains(i) { 0.0 } else { *x })
                    .collect(),
            ),
            ColumnData::Categorical(v) => ColumnData::Categorical(
                v.iter()
                    .enumerate()
                    .map(|(i, x)| {
                        if missing.contains(i) {
                            String::new()
                        } else {
                            x.clone()
                        }
                    })
                    .collect(),
            ),
        };
        Self {
            name: self.name.clone(),
            data,
            missing,
        }
    }
}

/// `K` variables by `N` items. Immutable once built; generators return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteDataset {
    name: String,
    variables: Vec<VariableColumn>,
    item_count: usize,
}

impl IncompleteDataset {
    pub fn new(name: impl Into<String>, variables: Vec<VariableColumn>) -> Result<Self> {
        let item_count = variables.first().map_or(0, VariableColumn::len);
        let mut seen = HashSet::new();
        for v in &variables {
            if v.len() != item_count {
                return Err(Error::LengthMismatch {
                    variable: v.name.clone(),
                    expected: item_count,
                    found: v.len(),
                });
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            variables,
            item_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `K`.
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    /// `N`.
    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn variables(&self) -> &[VariableColumn] {
        &self.variables
    }

    pub fn variable(&self, j: usize) -> Result<&VariableColumn> {
        self.variables.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            count: self.variables.len(),
        })
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// `D_Mj`.
    pub fn missing_set(&self, j: usize) -> Result<ItemSet> {
        Ok(self.variable(j)?.missing_set().clone())
    }

    /// `D_Rj`.
    pub fn recorded_set(&self, j: usize) -> Result<ItemSet> {
        Ok(self.variable(j)?.recorded_set())
    }

    pub fn total_missing(&self) -> usize {
        self.variables.iter().map(VariableColumn::missing_count).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.total_missing() == 0
    }

    /// New dataset where `items` are additionally missing in variable `j`.
    pub fn with_missing(&self, j: usize, items: &ItemSet) -> Result<Self> {
        self.variable(j)?;
        if items.universe() != self.item_count {
            return Err(Error::LengthMismatch {
                variable: self.variables[j].name.clone(),
                expected: self.item_count,
                found: items.universe(),
            });
        }
        let mut out = self.clone();
        out.variables[j] = self.variables[j].with_missing(items);
        Ok(out)
    }

    /// Reorders items; `order[i]` is the source item of output item `i`.
    pub fn permute_items(&self, order: &[usize]) -> Result<Self> {
        let mut variables = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let col = match &v.data {
                ColumnData::Numerical(_) => {
                    VariableColumn::numerical(v.name.clone(), order.iter().map(|&i| v.number(i)).collect())?
                }
                ColumnData::Categorical(_) => VariableColumn::categorical(
                    v.name.clone(),
                    order.iter().map(|&i| v.label(i).map(str::to_string)).collect(),
                ),
            };
            variables.push(col);
        }
        Self::new(self.name.clone(), variables)
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            name: self.name.clone(),
            variable_count: self.variable_count(),
            item_count: self.item_count,
            total_missing: self.total_missing(),
            variables: self
                .variables
                .iter()
                .map(|v| VariableSummary {
                    name: v.name.clone(),
                    kind: v.kind(),
                    missing_count: v.missing_count(),
                    recorded_count: v.recorded_count(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub name: String,
    pub kind: VariableKind,
    pub missing_count: usize,
    pub recorded_count: usize,
}

/// JSON-facing description of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    #[serde(rename = "K")]
    pub variable_count: usize,
    #[serde(rename = "N")]
    pub item_count: usize,
    pub total_missing: usize,
    pub variables: Vec<VariableSummary>,
}

pub const DEFAULT_MISSING_TOKENS: [&str; 5] = ["NaN", "NA", "N/A", "null", ""];

/// How CSV cells are interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// Matched case-insensitively against trimmed cells.
    pub missing_tokens: BTreeSet<String>,
    pub kind_overrides: BTreeMap<String, VariableKind>,
    pub delimiter: char,
    pub header: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            missing_tokens: DEFAULT_MISSING_TOKENS.iter().map(|s| s.to_string()).collect(),
            kind_overrides: BTreeMap::new(),
            delimiter: ',',
            header: true,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.missing_tokens.is_empty() {
            return Err(Error::InvalidConfig("missing_tokens must not be empty".into()));
        }
        let d = self.delimiter;
        if !d.is_ascii() || matches!(d, '"' | '\n' | '\r') {
            return Err(Error::InvalidConfig(format!("unusable delimiter {d:?}")));
        }
        Ok(())
    }

    pub fn is_missing_token(&self, cell: &str) -> bool {
        let cell = cell.trim();
        self.missing_tokens
            .iter()
            .any(|t| t.trim().eq_ignore_ascii_case(cell))
    }
}
