//! Stage orchestration: load, classify, summarize, build matrices, cluster
//! and render into one output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::affnorm::{Outcome, RuleSet};
use crate::citegraph::{CitationGraph, GraphReport};
use crate::classify::{classify_corpus, write_labels_csv, CollabLabels};
use crate::cluster::{ward_linkage, Dendrogram, Linkage};
use crate::comatrix::{
    authorship_incidence, citation_incidence, co_matrix, department_out_citations,
    select_for_clustering, CoKind, CoMatrix, DEFAULT_MIN_COCITE, DEFAULT_MIN_OUT_CITATIONS,
    DEFAULT_MIN_WORK_YEAR,
};
use crate::corpus::{
    parse_citations, parse_papers, parse_works, CitationEdge, Corpus, ParseReport, Provenance,
    WorkRecord,
};
use crate::report::{self, HeatmapSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub papers: PathBuf,
    pub citations: Option<PathBuf>,
    pub works: Option<PathBuf>,
    pub rules: PathBuf,
    pub home: String,
    pub min_year: Option<i32>,
    pub max_year: Option<i32>,
    pub min_cocite: usize,
    pub min_work_year: i32,
    pub min_out_citations: usize,
    /// Departments left out of clustering.
    pub exclude: BTreeSet<String>,
    /// Departments left out of the heatmap on top of `exclude`.
    pub heatmap_exclude: BTreeSet<String>,
}

impl PipelineConfig {
    pub fn new(
        papers: impl Into<PathBuf>,
        rules: impl Into<PathBuf>,
        home: impl Into<String>,
    ) -> Self {
        PipelineConfig {
            papers: papers.into(),
            citations: None,
            works: None,
            rules: rules.into(),
            home: home.into(),
            min_year: None,
            max_year: None,
            min_cocite: DEFAULT_MIN_COCITE,
            min_work_year: DEFAULT_MIN_WORK_YEAR,
            min_out_citations: DEFAULT_MIN_OUT_CITATIONS,
            exclude: BTreeSet::new(),
            heatmap_exclude: BTreeSet::new(),
        }
    }
}

/// Parsed and filtered inputs.
pub struct Loaded {
    pub rules: RuleSet,
    /// Papers as read, before filters.
    pub parse: ParseReport,
    /// Papers after the year filter and home-institution selection.
    pub corpus: Corpus,
    pub edges: Vec<CitationEdge>,
    pub works: Vec<WorkRecord>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn load(cfg: &PipelineConfig) -> Result<Loaded> {
    let rules = RuleSet::from_json(&fs::read_to_string(&cfg.rules).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", cfg.rules.display()),
        ))
    })?)?;
    if !rules.has_institution(&cfg.home) {
        return Err(Error::UnknownInstitution(cfg.home.clone()));
    }
    let (corpus, parse) = parse_papers(open(&cfg.papers)?, &cfg.papers.display().to_string())?;
    let corpus = match (cfg.min_year, cfg.max_year) {
        (None, None) => corpus,
        (lo, hi) => corpus.filter_by_year(lo.unwrap_or(i32::MIN), hi.unwrap_or(i32::MAX))?,
    };
    let corpus = corpus.select_by_institution(&rules, &cfg.home)?;
    let edges = match &cfg.citations {
        Some(p) => parse_citations(open(p)?, &p.display().to_string())?,
        None => Vec::new(),
    };
    let works = match &cfg.works {
        Some(p) => parse_works(open(p)?, &p.display().to_string())?,
        None => Vec::new(),
    };
    Ok(Loaded {
        rules,
        parse,
        corpus,
        edges,
        works,
    })
}

pub struct Analysis {
    pub loaded: Loaded,
    pub labels: Vec<CollabLabels>,
    pub graph: CitationGraph,
}

pub fn analyze(loaded: Loaded, home: &str) -> Result<Analysis> {
    let labels = classify_corpus(&loaded.corpus, &loaded.rules, home)?;
    let graph = CitationGraph::build(&loaded.corpus, &loaded.edges, &loaded.works)?;
    Ok(Analysis {
        loaded,
        labels,
        graph,
    })
}

pub struct Matrices {
    pub cocitation: CoMatrix,
    pub coauthorship: CoMatrix,
    pub out_citations: BTreeMap<String, usize>,
    pub cocited_works: usize,
}

pub fn matrices(a: &Analysis, cfg: &PipelineConfig) -> Result<Matrices> {
    let departments: Vec<String> = a.loaded.rules.department_ids().iter().cloned().collect();
    let cites = citation_incidence(
        &a.loaded.corpus,
        &a.labels,
        &a.graph,
        &departments,
        cfg.min_cocite,
        cfg.min_work_year,
    )?;
    let authors = authorship_incidence(&a.labels, &departments)?;
    let cocitation = co_matrix(&cites, CoKind::CoCitation);
    let coauthorship = co_matrix(&authors, CoKind::CoAuthorship);
    cocitation.check()?;
    coauthorship.check()?;
    Ok(Matrices {
        cocitation,
        coauthorship,
        out_citations: department_out_citations(&a.labels, &a.graph, &departments)?,
        cocited_works: cites.cols().len(),
    })
}

pub struct Clustering {
    /// Co-citation matrix restricted to the clustered departments.
    pub selected: CoMatrix,
    pub linkage: Linkage,
    pub dendrogram: Dendrogram,
}

/// Ward clustering of the row-normalized co-citation profiles.
pub fn cluster(m: &Matrices, cfg: &PipelineConfig) -> Result<Clustering> {
    let selected = select_for_clustering(
        &m.cocitation,
        &m.out_citations,
        cfg.min_out_citations,
        &cfg.exclude,
    )?;
    let linkage = ward_linkage(&selected.normalized, &selected.ids)?;
    let dendrogram = Dendrogram::from_linkage(&linkage)?;
    Ok(Clustering {
        selected,
        linkage,
        dendrogram,
    })
}

/// Heatmap of the co-authorship profiles over the clustered departments
/// not in `heatmap_exclude`, rows renormalized over that set.
pub fn heatmap(a: &Analysis, m: &Matrices, c: &Clustering, cfg: &PipelineConfig) -> Result<String> {
    let keep: BTreeSet<String> = c
        .selected
        .ids
        .iter()
        .filter(|id| !cfg.heatmap_exclude.contains(*id))
        .cloned()
        .collect();
    let dendrogram = c.dendrogram.prune(&keep).ok_or_else(|| {
        Error::InvalidArgument("heatmap exclusions remove every department".into())
    })?;
    let spec = HeatmapSpec::from_comatrix(
        &m.coauthorship.restrict(&keep)?,
        report::coauthored_paper_counts(&a.labels),
    );
    report::render_heatmap(&spec, &dendrogram)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// `labels.csv`, `table1.csv`, `timeseries.csv`, `affiliations.csv`.
pub fn write_classify(a: &Analysis, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_labels_csv(&a.labels, create(dir, "labels.csv")?)?;
    report::write_group_count_table(&a.labels, create(dir, "table1.csv")?)?;
    report::write_timeseries(&a.labels, &a.loaded.corpus, create(dir, "timeseries.csv")?)?;
    write_affiliations(&a.loaded, create(dir, "affiliations.csv")?)
}

/// `stats.csv`, `violin.csv`, `table2.csv`.
pub fn write_stats(a: &Analysis, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let corpus = &a.loaded.corpus;
    let stats = report::all_group_stats(corpus, &a.labels, &a.graph)?;
    report::write_stats_csv(&stats, create(dir, "stats.csv")?)?;
    report::write_violin_csv(corpus, &a.labels, &a.graph, create(dir, "violin.csv")?)?;
    let rows = report::citation_table_rows(corpus, &a.labels, &a.graph)?;
    report::write_citation_table(&rows, create(dir, "table2.csv")?)
}

/// The four matrix files and `out_citations.csv`.
pub fn write_matrices(m: &Matrices, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    report::write_matrix_counts(&m.cocitation, create(dir, "cocitation_counts.csv")?)?;
    report::write_matrix_normalized(&m.cocitation, create(dir, "cocitation_norm.csv")?)?;
    report::write_matrix_counts(&m.coauthorship, create(dir, "coauthorship_counts.csv")?)?;
    report::write_matrix_normalized(&m.coauthorship, create(dir, "coauthorship_norm.csv")?)?;
    let mut w = csv::Writer::from_writer(create(dir, "out_citations.csv")?);
    w.write_record(["department", "out_citations"])?;
    for (d, n) in &m.out_citations {
        w.write_record([d.as_str(), &n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `linkage.csv` and `leaf_order.txt`.
pub fn write_cluster(c: &Clustering, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    report::write_linkage_csv(&c.linkage, create(dir, "linkage.csv")?)?;
    let mut w = create(dir, "leaf_order.txt")?;
    report::write_lines(&c.dendrogram.leaf_order(), &mut w)?;
    finish(w)
}

/// `heatmap.svg`.
pub fn write_render(svg: &str, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("heatmap.svg"), svg)?;
    Ok(())
}

/// Resolution of every distinct affiliation string: `kind,raw,outcome,id,trace`.
pub fn write_affiliations<W: Write>(loaded: &Loaded, out: W) -> Result<()> {
    let mut orgs = BTreeSet::new();
    let mut suborgs = BTreeSet::new();
    for p in loaded.corpus.papers() {
        for a in &p.authors {
            orgs.extend(a.orgs.iter().map(String::as_str));
            suborgs.extend(a.suborgs.iter().map(String::as_str));
        }
    }
    let rules = &loaded.rules;
    let rows = |kind: &'static str,
                set: BTreeSet<&str>,
                resolve: &(dyn Fn(&str) -> crate::affnorm::Resolution + Sync)| {
        let set: Vec<&str> = set.into_iter().collect();
        set.par_iter()
            .map(|raw| {
                let r = resolve(raw);
                let (outcome, id) = match &r.outcome {
                    Outcome::Resolved(id) => ("resolved", id.clone()),
                    Outcome::Unmatched => ("unmatched", String::new()),
                    Outcome::Excluded => ("excluded", String::new()),
                };
                let trace = r
                    .trace
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ");
                [
                    kind.to_string(),
                    raw.to_string(),
                    outcome.to_string(),
                    id,
                    trace,
                ]
            })
            .collect::<Vec<_>>()
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "raw", "outcome", "id", "trace"])?;
    for row in rows("institution", orgs, &|s| rules.resolve_institution(s)) {
        w.write_record(&row)?;
    }
    for row in rows("department", suborgs, &|s| rules.resolve_department(s)) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Counts that describe an input set, printed by `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub parse: ParseReport,
    pub provenance: Provenance,
    pub papers_selected: usize,
    pub citation_edges: usize,
    pub works: usize,
    pub institutions: usize,
    pub departments: usize,
    pub fuzzy: bool,
}

pub fn validate(cfg: &PipelineConfig) -> Result<ValidationSummary> {
    Ok(describe(&load(cfg)?))
}

fn describe(l: &Loaded) -> ValidationSummary {
    ValidationSummary {
        parse: l.parse.clone(),
        provenance: l.corpus.provenance().clone(),
        papers_selected: l.corpus.len(),
        citation_edges: l.edges.len(),
        works: l.works.len(),
        institutions: l.rules.institution_ids().len(),
        departments: l.rules.department_ids().len(),
        fuzzy: l.rules.fuzzy_enabled(),
    }
}

/// `summary.json` written by a full run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub validation: ValidationSummary,
    pub graph: GraphReport,
    pub cocited_works: usize,
    pub cocitation_zero_rows: Vec<String>,
    pub coauthorship_zero_rows: Vec<String>,
    pub clustered: Vec<String>,
    pub leaf_order: Vec<String>,
}

/// Runs every stage and writes all outputs into `dir`.
pub fn run(cfg: &PipelineConfig, dir: &Path) -> Result<RunSummary> {
    let loaded = load(cfg)?;
    let validation = describe(&loaded);
    let a = analyze(loaded, &cfg.home)?;
    write_classify(&a, dir)?;
    write_stats(&a, dir)?;
    let m = matrices(&a, cfg)?;
    write_matrices(&m, dir)?;
    let c = cluster(&m, cfg)?;
    write_cluster(&c, dir)?;
    write_render(&heatmap(&a, &m, &c, cfg)?, dir)?;
    let summary = RunSummary {
        validation,
        graph: a.graph.report().clone(),
        cocited_works: m.cocited_works,
        cocitation_zero_rows: m.cocitation.zero_rows.clone(),
        coauthorship_zero_rows: m.coauthorship.zero_rows.clone(),
        clustered: c.selected.ids.clone(),
        leaf_order: c.dendrogram.leaf_order(),
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(summary)
}
