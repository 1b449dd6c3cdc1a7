//! Department incidence matrices and their co-occurrence products.
//!
//! An incidence matrix `B` is binary with departments along the rows and
//! works (co-citation) or papers (co-authorship) along the columns. The
//! co-occurrence matrix is `B · Bᵀ`: entry `(d, e)` is the number of
//! columns shared by `d` and `e`, and the diagonal holds each department's
//! column count.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::citegraph::CitationGraph;
use crate::classify::CollabLabels;
use crate::corpus::Corpus;
use crate::{Error, Result};

/// Default minimum number of distinct citing corpus papers for a work to
/// become a co-citation column.
pub const DEFAULT_MIN_COCITE: usize = 2;
/// Default earliest publication year of a co-citation column.
pub const DEFAULT_MIN_WORK_YEAR: i32 = 1991;
/// Default out-citation threshold for clustering.
pub const DEFAULT_MIN_OUT_CITATIONS: usize = 20;

/// Sparse binary matrix; each row stores its sorted column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Vec<u32>>,
}

impl IncidenceMatrix {
    /// Builds a matrix from `(row, col)` index pairs; duplicates are fine.
    pub fn from_pairs(rows: Vec<String>, cols: Vec<String>, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.par_sort_unstable();
        pairs.dedup();
        let mut cells = vec![Vec::new(); rows.len()];
        for (r, c) in pairs {
            cells[r as usize].push(c);
        }
        IncidenceMatrix { rows, cols, cells }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    /// Sorted column indices set in row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cells[r].binary_search(&(c as u32)).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.cells
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.cols.len()];
                for &c in row {
                    dense[c as usize] = 1;
                }
                dense
            })
            .collect()
    }
}

fn department_index(departments: &[String]) -> Result<HashMap<&str, u32>> {
    let mut sorted = departments.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.as_slice() != departments {
        return Err(Error::InvalidArgument(
            "department ids must be sorted and unique".into(),
        ));
    }
    Ok(departments
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i as u32))
        .collect())
}

/// Department row indices of a labelled paper.
fn paper_rows(l: &CollabLabels, index: &HashMap<&str, u32>) -> Result<Vec<u32>> {
    l.departments()
        .into_iter()
        .map(|d| {
            index.get(d).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("department `{d}` is not a matrix row"))
            })
        })
        .collect()
}

/// Works cited by at least `min_cocite` distinct corpus papers and
/// published in or after `min_work_year`; works of unknown year are left
/// out. Cell `(d, w)` is set when a corpus paper with an author in `d`
/// cites `w`.
pub fn citation_incidence(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
    departments: &[String],
    min_cocite: usize,
    min_work_year: i32,
) -> Result<IncidenceMatrix> {
    let index = department_index(departments)?;

    let mut cited: Vec<&str> = corpus
        .papers()
        .par_iter()
        .flat_map_iter(|p| graph.cited_by(&p.id))
        .collect();
    cited.par_sort_unstable();
    let mut columns: Vec<String> = Vec::new();
    for run in cited.chunk_by(|a, b| a == b) {
        let w = run[0];
        // edges are deduplicated per citing paper, so run length = distinct citers
        if run.len() >= min_cocite && graph.work_year(w).is_some_and(|y| y >= min_work_year) {
            columns.push(w.to_string());
        }
    }
    let col_index: HashMap<&str, u32> = columns
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();

    let per_paper: Vec<Vec<(u32, u32)>> = labels
        .par_iter()
        .map(|l| {
            let rows = paper_rows(l, &index)?;
            let mut pairs = Vec::new();
            if rows.is_empty() {
                return Ok(pairs);
            }
            for w in graph.cited_by(&l.paper_id) {
                if let Some(&c) = col_index.get(w) {
                    pairs.extend(rows.iter().map(|&r| (r, c)));
                }
            }
            Ok(pairs)
        })
        .collect::<Result<_>>()?;
    let pairs = per_paper.into_iter().flatten().collect();
    Ok(IncidenceMatrix::from_pairs(
        departments.to_vec(),
        columns,
        pairs,
    ))
}

/// Departments × all labelled papers; cell `(d, p)` is set when paper `p`
/// has an author resolved to `d`.
pub fn authorship_incidence(
    labels: &[CollabLabels],
    departments: &[String],
) -> Result<IncidenceMatrix> {
    let index = department_index(departments)?;
    let mut cols: Vec<String> = labels.iter().map(|l| l.paper_id.clone()).collect();
    cols.par_sort_unstable();
    let col_index: HashMap<&str, u32> = cols
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i as u32))
        .collect();
    let per_paper: Vec<Vec<(u32, u32)>> = labels
        .par_iter()
        .map(|l| {
            let c = col_index[l.paper_id.as_str()];
            Ok(paper_rows(l, &index)?.into_iter().map(|r| (r, c)).collect())
        })
        .collect::<Result<_>>()?;
    let pairs = per_paper.into_iter().flatten().collect();
    Ok(IncidenceMatrix::from_pairs(
        departments.to_vec(),
        cols,
        pairs,
    ))
}

/// Out-citations per department: the number of distinct (citing paper,
/// cited work) edges from papers with an author in that department.
pub fn department_out_citations(
    labels: &[CollabLabels],
    graph: &CitationGraph,
    departments: &[String],
) -> Result<BTreeMap<String, usize>> {
    let index = department_index(departments)?;
    let mut totals = vec![0usize; departments.len()];
    for l in labels {
        let out = graph.cited_by(&l.paper_id).count();
        for r in paper_rows(l, &index)? {
            totals[r as usize] += out;
        }
    }
    Ok(departments.iter().cloned().zip(totals).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoKind {
    CoCitation,
    CoAuthorship,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoMatrix {
    pub kind: CoKind,
    pub ids: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    /// Rows of `counts` divided by their sums; zero rows stay zero.
    pub normalized: Vec<Vec<f64>>,
    /// Ids whose count row is all zero.
    pub zero_rows: Vec<String>,
}

/// Row-normalizes `counts`, returning the indices of all-zero rows.
pub fn normalize_rows(counts: &[Vec<u64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut zero = Vec::new();
    let normalized = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let sum: u64 = row.iter().sum();
            if sum == 0 {
                zero.push(i);
                vec![0.0; row.len()]
            } else {
                row.iter().map(|&v| v as f64 / sum as f64).collect()
            }
        })
        .collect();
    (normalized, zero)
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl CoMatrix {
    fn from_counts(kind: CoKind, ids: Vec<String>, counts: Vec<Vec<u64>>) -> CoMatrix {
        let (normalized, zero) = normalize_rows(&counts);
        let zero_rows = zero.into_iter().map(|i| ids[i].clone()).collect();
        CoMatrix {
            kind,
            ids,
            counts,
            normalized,
            zero_rows,
        }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|d| d == id)
    }

    /// Restricts to `keep` (in this matrix's order) and renormalizes.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Result<CoMatrix> {
        if let Some(unknown) = keep.iter().find(|id| self.index_of(id).is_none()) {
            return Err(Error::InvalidArgument(format!(
                "unknown department `{unknown}`"
            )));
        }
        let idx: Vec<usize> = (0..self.ids.len())
            .filter(|&i| keep.contains(&self.ids[i]))
            .collect();
        let ids = idx.iter().map(|&i| self.ids[i].clone()).collect();
        let counts = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.counts[i][j]).collect())
            .collect();
        Ok(CoMatrix::from_counts(self.kind, ids, counts))
    }

    /// Symmetry and diagonal dominance of the count matrix.
    pub fn check(&self) -> Result<()> {
        let n = self.ids.len();
        for i in 0..n {
            for j in 0..n {
                if self.counts[i][j] != self.counts[j][i] {
                    return Err(Error::Invariant(format!(
                        "co-matrix asymmetric at ({i}, {j})"
                    )));
                }
                if self.counts[i][j] > self.counts[i][i] {
                    return Err(Error::Invariant(format!(
                        "co-matrix off-diagonal exceeds diagonal at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `B · Bᵀ` with its row-normalized view.
pub fn co_matrix(incidence: &IncidenceMatrix, kind: CoKind) -> CoMatrix {
    let n = incidence.rows().len();
    let upper: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| sorted_intersection_len(incidence.row(i), incidence.row(j)))
                .collect()
        })
        .collect();
    let mut counts = vec![vec![0u64; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            counts[i][i + k] = v;
            counts[i + k][i] = v;
        }
    }
    CoMatrix::from_counts(kind, incidence.rows().to_vec(), counts)
}

/// Departments with at least `min_out_citations` out-citations that are
/// not in `exclude`, renormalized.
pub fn select_for_clustering(
    matrix: &CoMatrix,
    out_citations: &BTreeMap<String, usize>,
    min_out_citations: usize,
    exclude: &BTreeSet<String>,
) -> Result<CoMatrix> {
    let keep: BTreeSet<String> = matrix
        .ids
        .iter()
        .filter(|id| !exclude.contains(*id))
        .filter(|id| out_citations.get(*id).copied().unwrap_or(0) >= min_out_citations)
        .cloned()
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "no department qualifies for clustering".into(),
        ));
    }
    matrix.restrict(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn from_dense(dense: &[&[u8]]) -> IncidenceMatrix {
        let rows = (0..dense.len()).map(|i| format!("d{i}")).collect();
        let cols = (0..dense[0].len()).map(|i| format!("w{i}")).collect();
        let mut pairs = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v == 1 {
                    pairs.push((r as u32, c as u32));
                }
            }
        }
        IncidenceMatrix::from_pairs(rows, cols, pairs)
    }

    #[test]
    fn two_by_two_hand_values() {
        let m = co_matrix(&from_dense(&[&[1, 1], &[1, 0]]), CoKind::CoCitation);
        assert_eq!(m.counts, vec![vec![2, 1], vec![1, 1]]);
        assert_eq!(m.normalized[0], vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(m.normalized[1], vec![0.5, 0.5]);
        assert!(m.zero_rows.is_empty());
        m.check().unwrap();
    }

    #[test]
    fn single_department() {
        let m = co_matrix(&from_dense(&[&[1, 0, 1]]), CoKind::CoAuthorship);
        assert_eq!(m.counts, vec![vec![2]]);
        assert_eq!(m.normalized, vec![vec![1.0]]);
    }

    #[test]
    fn zero_rows_flagged() {
        let m = co_matrix(&from_dense(&[&[1, 0], &[0, 0]]), CoKind::CoCitation);
        assert_eq!(m.zero_rows, ids(&["d1"]));
        assert_eq!(m.normalized[1], vec![0.0, 0.0]);
    }

    #[test]
    fn selection_threshold_and_exclusions() {
        let m = co_matrix(
            &from_dense(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]),
            CoKind::CoCitation,
        );
        let out: BTreeMap<String, usize> = [("d0", 19), ("d1", 20), ("d2", 40)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let s = select_for_clustering(&m, &out, 20, &BTreeSet::new()).unwrap();
        assert_eq!(s.ids, ids(&["d1", "d2"]));
        assert_eq!(s.counts, vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(s.normalized[0], vec![2.0 / 3.0, 1.0 / 3.0]);

        let ex: BTreeSet<String> = ["d2".to_string()].into();
        let s = select_for_clustering(&m, &out, 0, &ex).unwrap();
        assert_eq!(s.ids, ids(&["d0", "d1"]));

        let all: BTreeSet<String> = m.ids.iter().cloned().collect();
        assert!(select_for_clustering(&m, &out, 0, &all).is_err());
    }

    #[test]
    fn rows_must_be_sorted() {
        assert!(authorship_incidence(&[], &ids(&["b", "a"])).is_err());
        let m = authorship_incidence(&[], &ids(&["a", "b"])).unwrap();
        assert_eq!(m.cols().len(), 0);
    }
}
