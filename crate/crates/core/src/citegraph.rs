//! Citation network over the corpus and per-group citation statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{CollabLabels, Dimension, ExclusionReason, Label};
use crate::corpus::{CitationEdge, Corpus, WorkRecord};
use crate::{Error, Result};

/// What happened to the edges handed to [`CitationGraph::build`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GraphReport {
    pub edges_read: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    /// Edges with neither endpoint in the corpus.
    pub unrelated: usize,
    pub edges_kept: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    corpus_ids: BTreeSet<String>,
    in_edges: BTreeMap<String, BTreeSet<String>>,
    out_edges: BTreeMap<String, BTreeSet<String>>,
    work_years: BTreeMap<String, Option<i32>>,
    report: GraphReport,
}

impl CitationGraph {
    /// Links every corpus paper with its citing and cited works. Edges
    /// touching the corpus on at least one end are kept; duplicates
    /// collapse and self-citations of a single id are dropped.
    pub fn build(
        corpus: &Corpus,
        edges: &[CitationEdge],
        works: &[WorkRecord],
    ) -> Result<CitationGraph> {
        #[derive(Clone, Copy)]
        enum Fate {
            Keep,
            SelfLoop,
            Unrelated,
        }
        let fates: Vec<Fate> = edges
            .par_iter()
            .map(|e| {
                if e.citing == e.cited {
                    Fate::SelfLoop
                } else if corpus.contains(&e.citing) || corpus.contains(&e.cited) {
                    Fate::Keep
                } else {
                    Fate::Unrelated
                }
            })
            .collect();
        let mut report = GraphReport {
            edges_read: edges.len(),
            ..GraphReport::default()
        };
        let mut kept: Vec<(&str, &str)> = Vec::with_capacity(edges.len());
        for (e, fate) in edges.iter().zip(fates) {
            match fate {
                Fate::Keep => kept.push((e.citing.as_str(), e.cited.as_str())),
                Fate::SelfLoop => report.self_loops += 1,
                Fate::Unrelated => report.unrelated += 1,
            }
        }
        kept.par_sort_unstable();
        let before = kept.len();
        kept.dedup();
        report.duplicates = before - kept.len();
        report.edges_kept = kept.len();

        let mut in_edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut out_edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (citing, cited) in kept {
            out_edges
                .entry(citing.to_string())
                .or_default()
                .insert(cited.to_string());
            in_edges
                .entry(cited.to_string())
                .or_default()
                .insert(citing.to_string());
        }

        let mut work_years: BTreeMap<String, Option<i32>> =
            works.iter().map(|w| (w.id.clone(), w.year)).collect();
        for p in corpus.papers() {
            work_years.insert(p.id.clone(), Some(p.year));
        }

        let graph = CitationGraph {
            corpus_ids: corpus.papers().iter().map(|p| p.id.clone()).collect(),
            in_edges,
            out_edges,
            work_years,
            report,
        };
        graph.check_symmetry()?;
        Ok(graph)
    }

    /// Every edge in `out_edges` appears in `in_edges` and vice versa.
    pub fn check_symmetry(&self) -> Result<()> {
        let count =
            |m: &BTreeMap<String, BTreeSet<String>>| m.values().map(BTreeSet::len).sum::<usize>();
        if count(&self.in_edges) != count(&self.out_edges) {
            return Err(Error::Invariant("in/out edge counts differ".into()));
        }
        for (citing, cited_set) in &self.out_edges {
            for cited in cited_set {
                if !self.in_edges.get(cited).is_some_and(|s| s.contains(citing)) {
                    return Err(Error::Invariant(format!(
                        "edge {citing} -> {cited} missing from in-edges"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn report(&self) -> &GraphReport {
        &self.report
    }

    /// Number of distinct works citing `paper_id`.
    pub fn citation_count(&self, paper_id: &str) -> Result<usize> {
        if !self.corpus_ids.contains(paper_id) {
            return Err(Error::UnknownPaper(paper_id.to_string()));
        }
        Ok(self.in_edges.get(paper_id).map_or(0, BTreeSet::len))
    }

    pub fn citing(&self, id: &str) -> impl Iterator<Item = &str> {
        self.in_edges
            .get(id)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn cited_by(&self, id: &str) -> impl Iterator<Item = &str> {
        self.out_edges
            .get(id)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    /// Publication year of a work, if known.
    pub fn work_year(&self, id: &str) -> Option<i32> {
        self.work_years.get(id).copied().flatten()
    }
}

/// Median, mean and share cited for one group. Undefined for empty groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub pct_cited: Option<f64>,
}

/// Summary over all values; the median of an even-sized sample is the mean
/// of the two central order statistics.
pub fn summarize(counts: &[usize]) -> Summary {
    let n = counts.len();
    if n == 0 {
        return Summary {
            n,
            median: None,
            mean: None,
            pct_cited: None,
        };
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    };
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let cited = counts.iter().filter(|&&c| c >= 1).count() as u64;
    Summary {
        n,
        median: Some(median),
        mean: Some(total as f64 / n as f64),
        pct_cited: Some((100 * cited) as f64 / n as f64),
    }
}

/// Values of `counts` lying between the `lo_pct` and `hi_pct` nearest-rank
/// percentiles (inclusive), sorted ascending.
pub fn trimmed_distribution(counts: &[usize], lo_pct: u32, hi_pct: u32) -> Result<Vec<usize>> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot trim an empty distribution".into(),
        ));
    }
    if lo_pct > hi_pct || hi_pct > 100 {
        return Err(Error::InvalidArgument(format!(
            "bad percentile range [{lo_pct}, {hi_pct}]"
        )));
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let lo = sorted[nearest_rank(lo_pct, sorted.len()) - 1];
    let hi = sorted[nearest_rank(hi_pct, sorted.len()) - 1];
    Ok(sorted
        .into_iter()
        .filter(|v| (lo..=hi).contains(v))
        .collect())
}

/// 1-based nearest rank: `ceil(p * n / 100)`, at least 1.
fn nearest_rank(pct: u32, n: usize) -> usize {
    (pct as usize * n).div_ceil(100).max(1)
}

/// How papers are grouped for statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grouping {
    All,
    By(Dimension),
}

impl Grouping {
    pub fn name(self) -> &'static str {
        match self {
            Grouping::All => "all",
            Grouping::By(d) => d.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub dimension: String,
    pub group: String,
    /// `None` for the all-years row.
    pub year: Option<i32>,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Citation counts keyed by group and year (`None` for all years).
pub type GroupBuckets = BTreeMap<(GroupKey, Option<i32>), Vec<usize>>;

/// Citation counts of every corpus paper bucketed by group label (and
/// optionally year). Buckets for multi/single always exist; exclusion
/// buckets exist when populated.
pub fn group_counts(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
    grouping: Grouping,
    by_year: bool,
) -> Result<GroupBuckets> {
    let by_id: HashMap<&str, &CollabLabels> =
        labels.iter().map(|l| (l.paper_id.as_str(), l)).collect();
    let mut buckets = GroupBuckets::new();
    let years: BTreeSet<i32> = corpus.papers().iter().map(|p| p.year).collect();
    let fixed: Vec<GroupKey> = match grouping {
        Grouping::All => vec![GroupKey::All],
        Grouping::By(_) => vec![
            GroupKey::Label(Label::Multi),
            GroupKey::Label(Label::Single),
        ],
    };
    for key in &fixed {
        if by_year {
            for &y in &years {
                buckets.entry((*key, Some(y))).or_default();
            }
        } else {
            buckets.entry((*key, None)).or_default();
        }
    }
    for p in corpus.papers() {
        let key = match grouping {
            Grouping::All => GroupKey::All,
            Grouping::By(dim) => {
                let l = by_id.get(p.id.as_str()).ok_or_else(|| {
                    Error::InvalidArgument(format!("no labels for paper `{}`", p.id))
                })?;
                GroupKey::Label(l.label(dim))
            }
        };
        let count = graph.citation_count(&p.id)?;
        let year = by_year.then_some(p.year);
        if by_year && key.is_excluded() {
            // exclusion buckets appear per year once populated anywhere
            for &y in &years {
                buckets.entry((key, Some(y))).or_default();
            }
        }
        buckets.entry((key, year)).or_default().push(count);
    }
    Ok(buckets)
}

/// Ordering key for groups: all, multi, single, then exclusions by reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKey {
    All,
    Label(Label),
}

impl GroupKey {
    fn is_excluded(self) -> bool {
        matches!(self, GroupKey::Label(l) if l.is_excluded())
    }

    pub fn name(self, grouping: Grouping) -> String {
        match (self, grouping) {
            (GroupKey::All, _) | (_, Grouping::All) => "all".to_string(),
            (GroupKey::Label(l), Grouping::By(d)) => l.group(d),
        }
    }

    pub fn reason(self) -> Option<ExclusionReason> {
        match self {
            GroupKey::Label(l) => l.reason(),
            GroupKey::All => None,
        }
    }
}

/// Per-group citation statistics. Group sizes sum to the corpus size.
pub fn group_stats(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
    grouping: Grouping,
    by_year: bool,
) -> Result<Vec<GroupStats>> {
    let buckets = group_counts(corpus, labels, graph, grouping, by_year)?;
    let buckets: Vec<_> = buckets.into_iter().collect();
    Ok(buckets
        .par_iter()
        .map(|((key, year), counts)| GroupStats {
            dimension: grouping.name().to_string(),
            group: key.name(grouping),
            year: *year,
            summary: summarize(counts),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorEntry, PaperRecord};

    fn corpus(ids: &[&str]) -> Corpus {
        let papers = ids
            .iter()
            .map(|id| PaperRecord {
                id: id.to_string(),
                year: 2010,
                authors: vec![AuthorEntry {
                    name: "x".into(),
                    orgs: vec![],
                    suborgs: vec![],
                }],
            })
            .collect();
        Corpus::from_papers(papers, "t").unwrap()
    }

    fn edge(a: &str, b: &str) -> CitationEdge {
        CitationEdge {
            citing: a.into(),
            cited: b.into(),
        }
    }

    #[test]
    fn empty_edges_give_zero_counts() {
        let c = corpus(&["a", "b"]);
        let g = CitationGraph::build(&c, &[], &[]).unwrap();
        assert_eq!(g.citation_count("a").unwrap(), 0);
        assert_eq!(g.citation_count("b").unwrap(), 0);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let c = corpus(&["a", "b", "c"]);
        let g = CitationGraph::build(&c, &[edge("a", "b"), edge("a", "b"), edge("c", "b")], &[])
            .unwrap();
        assert_eq!(g.citation_count("b").unwrap(), 2);
        assert_eq!(g.report().duplicates, 1);
    }

    #[test]
    fn self_loops_and_unrelated_edges_dropped() {
        let c = corpus(&["a"]);
        let g = CitationGraph::build(
            &c,
            &[
                edge("a", "a"),
                edge("x", "y"),
                edge("ext", "a"),
                edge("a", "w"),
            ],
            &[],
        )
        .unwrap();
        let r = g.report();
        assert_eq!((r.self_loops, r.unrelated, r.edges_kept), (1, 1, 2));
        assert_eq!(g.citation_count("a").unwrap(), 1);
        assert_eq!(g.cited_by("a").collect::<Vec<_>>(), ["w"]);
    }

    #[test]
    fn unknown_paper_is_an_error() {
        let c = corpus(&["a"]);
        let g = CitationGraph::build(&c, &[edge("z", "a")], &[]).unwrap();
        assert!(matches!(g.citation_count("z"), Err(Error::UnknownPaper(_))));
    }

    #[test]
    fn summary_hand_values() {
        let s = summarize(&[0, 0, 5]);
        assert_eq!(s.median, Some(0.0));
        assert_eq!(s.mean, Some(5.0 / 3.0));
        assert_eq!(s.pct_cited, Some(100.0 / 3.0));
        let s = summarize(&[7]);
        assert_eq!(
            (s.median, s.mean, s.pct_cited),
            (Some(7.0), Some(7.0), Some(100.0))
        );
        assert_eq!(summarize(&[1, 4, 2, 9]).median, Some(3.0));
        assert_eq!(summarize(&[]).median, None);
    }

    #[test]
    fn trimmed_nearest_rank() {
        let v: Vec<usize> = (1..=10).collect();
        assert_eq!(
            trimmed_distribution(&v, 10, 90).unwrap(),
            (1..=9).collect::<Vec<_>>()
        );
        assert_eq!(trimmed_distribution(&[4, 4, 4], 10, 90).unwrap(), [4, 4, 4]);
        assert_eq!(trimmed_distribution(&[3], 10, 90).unwrap(), [3]);
        assert!(trimmed_distribution(&[], 10, 90).is_err());
        assert!(trimmed_distribution(&[1], 90, 10).is_err());
    }

    #[test]
    fn work_years_from_works_and_corpus() {
        let c = corpus(&["a"]);
        let works = vec![
            WorkRecord {
                id: "w".into(),
                year: Some(1995),
            },
            WorkRecord {
                id: "n".into(),
                year: None,
            },
        ];
        let g = CitationGraph::build(&c, &[], &works).unwrap();
        assert_eq!(g.work_year("w"), Some(1995));
        assert_eq!(g.work_year("n"), None);
        assert_eq!(g.work_year("a"), Some(2010));
        assert_eq!(g.work_year("missing"), None);
    }
}
