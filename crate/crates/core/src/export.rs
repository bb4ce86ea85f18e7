//! Node/edge tables for graph tools and long-form matrix files.
//!
//! `nodes.csv`
//!
//! | column | meaning |
//! |---|---|
//! | `id` | variable index |
//! | `label` | variable name |
//! | `q_am` | amount missing |
//! | `missing_count` | missing items |
//!
//! `edges.csv`, one row per unordered pair `source < target`
//!
//! | column | meaning |
//! |---|---|
//! | `source`, `target` | node ids |
//! | `source_label`, `target_label` | variable names |
//! | `jm_mag`, `jm_dir`, `jm_abs` | joint metrics |
//! | `cm_did`, `cm_h` | conditional metrics collapsed with the filter's aggregation |
//! | `cm_did_st`, `cm_h_st` | missingness in source conditioned on target |
//! | `cm_did_ts`, `cm_h_ts` | missingness in target conditioned on source |
//! | `jm_support` | items missing in both |
//! | `cm_support_st`, `cm_support_ts` | items behind each conditional direction |
//!
//! `matrix.csv`: `source,target,metric,value,support`. Symmetric metrics
//! write `source < target` only; conditional metrics write every ordered pair.
//!
//! Values carry nine decimals; an empty cell is a metric that was not
//! computed or does not apply.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::IncompleteDataset;
use crate::error::{Error, Result};
use crate::filter::{EdgeFilter, MatrixSet};
use crate::matrix::{Metric, PairwiseQMMatrix};

pub const NODE_COLUMNS: [&str; 4] = ["id", "label", "q_am", "missing_count"];

pub const EDGE_COLUMNS: [&str; 16] = [
    "source",
    "target",
    "source_label",
    "target_label",
    "jm_mag",
    "jm_dir",
    "jm_abs",
    "cm_did",
    "cm_did_st",
    "cm_did_ts",
    "cm_h",
    "cm_h_st",
    "cm_h_ts",
    "jm_support",
    "cm_support_st",
    "cm_support_ts",
];

pub const MATRIX_COLUMNS: [&str; 5] = ["source", "target", "metric", "value", "support"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub id: usize,
    pub label: String,
    pub q_am: f64,
    pub missing_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub source: usize,
    pub target: usize,
    pub source_label: String,
    pub target_label: String,
    pub jm_mag: Option<f64>,
    pub jm_dir: Option<f64>,
    pub jm_abs: Option<f64>,
    pub cm_did: Option<f64>,
    pub cm_did_st: Option<f64>,
    pub cm_did_ts: Option<f64>,
    pub cm_h: Option<f64>,
    pub cm_h_st: Option<f64>,
    pub cm_h_ts: Option<f64>,
    pub jm_support: Option<u64>,
    pub cm_support_st: Option<u64>,
    pub cm_support_ts: Option<u64>,
}

impl EdgeRow {
    /// Value of `metric` as the edge filter sees it.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::QAm => None,
            Metric::JmMag => self.jm_mag,
            Metric::JmDir => self.jm_dir,
            Metric::JmAbs => self.jm_abs,
            Metric::CmDid => self.cm_did,
            Metric::CmH => self.cm_h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkExport {
    pub nodes: Vec<NodeRow>,
    pub edges: Vec<EdgeRow>,
    pub applied_filters: Vec<String>,
}

fn fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

fn count(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One node per variable and one edge per unordered pair passing `filter`.
pub fn export_network(d: &IncompleteDataset, matrices: &MatrixSet, filter: &EdgeFilter) -> Result<NetworkExport> {
    let k = d.variable_count();
    if matrices.size() != 0 && matrices.size() != k {
        return Err(Error::MatrixFormat(format!(
            "matrices cover {} variables, dataset has {k}",
            matrices.size()
        )));
    }
    let n = d.item_count();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let nodes = d
        .variables()
        .iter()
        .enumerate()
        .map(|(id, v)| NodeRow {
            id,
            label: v.name().to_string(),
            q_am: v.missing_count() as f64 / n as f64,
            missing_count: v.missing_count(),
        })
        .collect();

    let agg = filter.aggregation;
    let jm = |m: Metric, j, t| matrices.get(m).and_then(|x| x.get(j, t));
    let edges = filter
        .select_edges(matrices)?
        .into_iter()
        .map(|(s, t)| {
            let did = matrices.get(Metric::CmDid);
            let h = matrices.get(Metric::CmH);
            EdgeRow {
                source: s,
                target: t,
                source_label: d.variables()[s].name().to_string(),
                target_label: d.variables()[t].name().to_string(),
                jm_mag: jm(Metric::JmMag, s, t),
                jm_dir: jm(Metric::JmDir, s, t),
                jm_abs: jm(Metric::JmAbs, s, t),
                cm_did: did.and_then(|m| m.pair_value(s, t, agg)),
                cm_did_st: did.and_then(|m| m.get(s, t)),
                cm_did_ts: did.and_then(|m| m.get(t, s)),
                cm_h: h.and_then(|m| m.pair_value(s, t, agg)),
                cm_h_st: h.and_then(|m| m.get(s, t)),
                cm_h_ts: h.and_then(|m| m.get(t, s)),
                jm_support: matrices.get(Metric::JmMag).map(|m| m.support(s, t)),
                cm_support_st: did.or(h).map(|m| m.support(s, t)),
                cm_support_ts: did.or(h).map(|m| m.support(t, s)),
            }
        })
        .collect();
    Ok(NetworkExport {
        nodes,
        edges,
        applied_filters: filter.predicates.iter().map(ToString::to_string).collect(),
    })
}

impl NetworkExport {
    pub fn write_nodes<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(NODE_COLUMNS)?;
        for node in &self.nodes {
            w.write_record([
                node.id.to_string(),
                node.label.clone(),
                format!("{:.9}", node.q_am),
                node.missing_count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_edges<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(EDGE_COLUMNS)?;
        for e in &self.edges {
            w.write_record([
                e.source.to_string(),
                e.target.to_string(),
                e.source_label.clone(),
                e.target_label.clone(),
                fixed(e.jm_mag),
                fixed(e.jm_dir),
                fixed(e.jm_abs),
                fixed(e.cm_did),
                fixed(e.cm_did_st),
                fixed(e.cm_did_ts),
                fixed(e.cm_h),
                fixed(e.cm_h_st),
                fixed(e.cm_h_ts),
                count(e.jm_support),
                count(e.cm_support_st),
                count(e.cm_support_ts),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `nodes.csv` and `edges.csv` into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_nodes(BufWriter::new(File::create(dir.join("nodes.csv"))?))?;
        self.write_edges(BufWriter::new(File::create(dir.join("edges.csv"))?))?;
        Ok(())
    }
}

pub fn write_matrix_csv<W: Write>(matrix: &PairwiseQMMatrix, writer: W) -> Result<()> {
    write_matrices_csv(&[matrix], writer)
}

/// Several matrices under one header, one after another.
pub fn write_matrices_csv<W: Write>(matrices: &[&PairwiseQMMatrix], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MATRIX_COLUMNS)?;
    for matrix in matrices {
        let names = matrix.variables();
        let metric = matrix.metric().as_str();
        for (j, k, value, support) in matrix.entries() {
            w.write_record([
                names[j].as_str(),
                names[k].as_str(),
                metric,
                &fixed(value),
                &support.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_matrix_csv(matrix: &PairwiseQMMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_csv(matrix, BufWriter::new(File::create(path)?))
}

pub fn matrix_csv_string(matrix: &PairwiseQMMatrix) -> Result<String> {
    let mut buf = Vec::new();
    write_matrix_csv(matrix, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::MatrixFormat(e.to_string()))
}

/// Inverse of [`write_matrix_csv`]. Variables take the order in which they
/// first appear; entries absent from the file read back as not applicable.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<PairwiseQMMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(MATRIX_COLUMNS) {
        return Err(Error::MatrixFormat(format!(
            "expected header {}",
            MATRIX_COLUMNS.join(",")
        )));
    }
    let mut names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let mut metric: Option<Metric> = None;
    let index = |names: &mut Vec<String>, s: &str| match names.iter().position(|n| n == s) {
        Some(i) => i,
        None => {
            names.push(s.to_string());
            names.len() - 1
        }
    };
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::MatrixFormat(format!("line {line}: {what}"));
        let m: Metric = record[2].parse()?;
        if *metric.get_or_insert(m) != m {
            return Err(bad("mixed metrics"));
        }
        let j = index(&mut names, &record[0]);
        let k = index(&mut names, &record[1]);
        let value = match record[3].trim() {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("bad value"))?),
        };
        let support: u64 = record[4].trim().parse().map_err(|_| bad("bad support"))?;
        rows.push((j, k, value, support));
    }
    let metric = metric.ok_or_else(|| Error::MatrixFormat("no entries".into()))?;
    let mut matrix = PairwiseQMMatrix::new(metric, names);
    for (j, k, value, support) in rows {
        matrix.set(j, k, value, support);
    }
    Ok(matrix)
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<PairwiseQMMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditional::cm_matrices;
    use crate::dataset::VariableColumn;
    use crate::joint::jm_matrices;
    use crate::matrix::Aggregation;

    fn dataset() -> IncompleteDataset {
        let cols = (0..4)
            .map(|j| {
                let values = (0..12)
                    .map(|i| if (i + j) % (j + 2) == 0 { None } else { Some((i * (j + 1)) as f64) })
                    .collect();
                VariableColumn::numerical(format!("x{j}"), values).unwrap()
            })
            .collect();
        IncompleteDataset::new("d", cols).unwrap()
    }

    fn matrices(d: &IncompleteDataset) -> MatrixSet {
        MatrixSet::from_parts(Some(&jm_matrices(d).unwrap()), Some(&cm_matrices(d).unwrap()))
    }

    #[test]
    fn unfiltered_network_is_complete_graph() {
        let d = dataset();
        let net = export_network(&d, &matrices(&d), &EdgeFilter::default()).unwrap();
        assert_eq!(net.nodes.len(), 4);
        assert_eq!(net.edges.len(), 6);
        assert!(net.edges.iter().all(|e| e.source < e.target));
        assert!(net.applied_filters.is_empty());
    }

    #[test]
    fn impossible_filter_gives_no_edges() {
        let d = dataset();
        let f: EdgeFilter = "jm_abs>1.0".parse().unwrap();
        let net = export_network(&d, &matrices(&d), &f).unwrap();
        assert!(net.edges.is_empty());
        assert_eq!(net.applied_filters, vec!["jm_abs>1".to_string()]);
    }

    #[test]
    fn filter_then_export_equals_export_then_filter() {
        let d = dataset();
        let m = matrices(&d);
        let f: EdgeFilter = "jm_dir<0.02,cm_did>0.1".parse().unwrap();
        let filtered = export_network(&d, &m, &f).unwrap();
        let all = export_network(&d, &m, &EdgeFilter::default()).unwrap();
        let kept: Vec<EdgeRow> = all
            .edges
            .into_iter()
            .filter(|e| f.predicates.iter().all(|p| p.holds(e.value(p.metric))))
            .collect();
        assert_eq!(filtered.edges, kept);
    }

    #[test]
    fn uncomputed_metric_rejected() {
        let d = dataset();
        let m = MatrixSet::from_parts(Some(&jm_matrices(&d).unwrap()), None);
        let f: EdgeFilter = "cm_h>0".parse().unwrap();
        assert!(export_network(&d, &m, &f).is_err());
        let net = export_network(&d, &m, &EdgeFilter::default()).unwrap();
        assert_eq!(net.edges[0].cm_did, None);
        let mut out = Vec::new();
        net.write_edges(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), EDGE_COLUMNS.join(","));
    }

    #[test]
    fn matrix_row_counts() {
        let names = vec!["a".to_string(), "b".to_string()];
        let mut m = PairwiseQMMatrix::new(Metric::JmMag, names);
        m.set(0, 1, Some(0.25), 3);
        assert_eq!(matrix_csv_string(&m).unwrap(), "source,target,metric,value,support\na,b,jm_mag,0.250000000,3\n");

        let d = dataset();
        let d3 = IncompleteDataset::new("d3", d.variables()[..3].to_vec()).unwrap();
        let cm = cm_matrices(&d3).unwrap();
        assert_eq!(matrix_csv_string(&cm.density_difference).unwrap().lines().count(), 7);
    }

    #[test]
    fn matrix_round_trip() {
        let d = dataset();
        let m = matrices(&d);
        for metric in Metric::PAIRWISE {
            let original = m.get(metric).unwrap();
            let text = matrix_csv_string(original).unwrap();
            let back = read_matrix_csv(text.as_bytes()).unwrap();
            assert_eq!(back.variables(), original.variables());
            for (j, k, v, s) in original.entries() {
                assert_eq!(back.support(j, k), s);
                match (v, back.get(j, k)) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
        let sym = m.get(Metric::CmDid).unwrap().symmetrized(Aggregation::Max);
        assert_eq!(sym.entries().count(), 6);
    }

    #[test]
    fn bad_matrix_files() {
        assert!(read_matrix_csv("a,b\n".as_bytes()).is_err());
        assert!(read_matrix_csv("source,target,metric,value,support\n".as_bytes()).is_err());
        let mixed = "source,target,metric,value,support\na,b,jm_mag,0.1,1\na,c,jm_dir,0.1,1\n";
        assert!(matches!(read_matrix_csv(mixed.as_bytes()), Err(Error::MatrixFormat(_))));
    }
}
