//! Collaboration labels along three independent dimensions.
//!
//! Authors within one paper are identified by their normalized name;
//! entries sharing a name are merged and their affiliations pooled. An
//! organization string that no rule resolves still names *some* external
//! institution, so it counts as `ext:<normalized text>`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affnorm::{canonicalize_text, Outcome, RuleSet};
use crate::corpus::{Corpus, PaperRecord};
use crate::{Error, Result};

/// Prefix of institution ids synthesized from unresolved organization strings.
pub const EXTERNAL_PREFIX: &str = "ext:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExclusionReason {
    NoAuthors,
    MissingAffiliations,
    SingleAuthorMultiInst,
    NoHomeInstitution,
    NoDeptAffiliations,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 5] = [
        ExclusionReason::NoAuthors,
        ExclusionReason::MissingAffiliations,
        ExclusionReason::SingleAuthorMultiInst,
        ExclusionReason::NoHomeInstitution,
        ExclusionReason::NoDeptAffiliations,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ExclusionReason::NoAuthors => "no-authors",
            ExclusionReason::MissingAffiliations => "missing-affiliations",
            ExclusionReason::SingleAuthorMultiInst => "single-author-multi-inst",
            ExclusionReason::NoHomeInstitution => "no-home-institution",
            ExclusionReason::NoDeptAffiliations => "no-dept-affiliations",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.code() == code)
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Authorship,
    Institutional,
    Departmental,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Authorship,
        Dimension::Institutional,
        Dimension::Departmental,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Authorship => "authorship",
            Dimension::Institutional => "institutional",
            Dimension::Departmental => "departmental",
        }
    }

    fn noun(self) -> &'static str {
        match self {
            Dimension::Authorship => "author",
            Dimension::Institutional => "institution",
            Dimension::Departmental => "department",
        }
    }
}

/// A verdict in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Multi,
    Single,
    Excluded(ExclusionReason),
}

impl Label {
    /// Label text as written to CSV, e.g. `multi-department` or `excluded`.
    pub fn name(self, dim: Dimension) -> String {
        match self {
            Label::Multi => format!("multi-{}", dim.noun()),
            Label::Single => format!("single-{}", dim.noun()),
            Label::Excluded(_) => "excluded".to_string(),
        }
    }

    /// Group key used in statistics: the label name, or `excluded:<reason>`.
    pub fn group(self, dim: Dimension) -> String {
        match self {
            Label::Excluded(r) => format!("excluded:{}", r.code()),
            other => other.name(dim),
        }
    }

    pub fn reason(self) -> Option<ExclusionReason> {
        match self {
            Label::Excluded(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_excluded(self) -> bool {
        matches!(self, Label::Excluded(_))
    }

    fn parse(dim: Dimension, name: &str, reason: &str) -> Option<Label> {
        if name == "excluded" {
            return ExclusionReason::from_code(reason).map(Label::Excluded);
        }
        [Label::Multi, Label::Single]
            .into_iter()
            .find(|l| l.name(dim) == name)
    }
}

/// Sorted distinct ids. Ids are shared with the resolution cache, so a
/// label set costs one small allocation, or none when empty.
pub type IdSet = Box<[Arc<str>]>;

fn id_set(ids: impl Iterator<Item = Arc<str>>) -> IdSet {
    let mut v: Vec<Arc<str>> = ids.collect();
    v.sort_unstable();
    v.dedup();
    v.into_boxed_slice()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollabLabels {
    pub paper_id: String,
    pub authorship: Label,
    pub institutional: Label,
    pub departmental: Label,
    /// Resolved department ids per distinct author, sorted and distinct.
    pub author_departments: Vec<IdSet>,
    /// Resolved institution ids per distinct author, sorted and distinct.
    pub author_institutions: Vec<IdSet>,
}

impl CollabLabels {
    pub fn label(&self, dim: Dimension) -> Label {
        match dim {
            Dimension::Authorship => self.authorship,
            Dimension::Institutional => self.institutional,
            Dimension::Departmental => self.departmental,
        }
    }

    /// Union of resolved departments over all authors.
    pub fn departments(&self) -> BTreeSet<&str> {
        self.author_departments
            .iter()
            .flat_map(|s| s.iter().map(|id| &**id))
            .collect()
    }

    pub fn to_row(&self) -> LabelRow {
        let reason = |l: Label| l.reason().map(|r| r.code().to_string()).unwrap_or_default();
        LabelRow {
            paper_id: self.paper_id.clone(),
            authorship: self.authorship.name(Dimension::Authorship),
            institutional: self.institutional.name(Dimension::Institutional),
            departmental: self.departmental.name(Dimension::Departmental),
            inst_reason: reason(self.institutional),
            dept_reason: reason(self.departmental),
            departments: self.departments().into_iter().collect::<Vec<_>>().join(";"),
        }
    }
}

/// One line of `labels.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub paper_id: String,
    pub authorship: String,
    pub institutional: String,
    pub departmental: String,
    pub inst_reason: String,
    pub dept_reason: String,
    pub departments: String,
}

impl LabelRow {
    /// The three labels encoded by this row, or `None` if any cell is unknown.
    pub fn labels(&self) -> Option<(Label, Label, Label)> {
        let authorship_reason = if self.authorship == "excluded" {
            "no-authors"
        } else {
            ""
        };
        Some((
            Label::parse(Dimension::Authorship, &self.authorship, authorship_reason)?,
            Label::parse(
                Dimension::Institutional,
                &self.institutional,
                &self.inst_reason,
            )?,
            Label::parse(
                Dimension::Departmental,
                &self.departmental,
                &self.dept_reason,
            )?,
        ))
    }
}

pub fn write_labels_csv<W: Write>(labels: &[CollabLabels], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if labels.is_empty() {
        w.write_record([
            "paper_id",
            "authorship",
            "institutional",
            "departmental",
            "inst_reason",
            "dept_reason",
            "departments",
        ])?;
    }
    for l in labels {
        w.serialize(l.to_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(input: R) -> Result<Vec<LabelRow>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<LabelRow>, _>>()?;
    Ok(rows)
}

/// A paper's authors after merging entries with equal normalized names.
struct DistinctAuthor<'a> {
    orgs: Vec<&'a str>,
    suborgs: Vec<&'a str>,
}

fn distinct_authors(paper: &PaperRecord) -> Vec<DistinctAuthor<'_>> {
    let mut order: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<DistinctAuthor<'_>> = Vec::new();
    for a in &paper.authors {
        let key = canonicalize_text(&a.name);
        let idx = *order.entry(key).or_insert_with(|| {
            out.push(DistinctAuthor {
                orgs: Vec::new(),
                suborgs: Vec::new(),
            });
            out.len() - 1
        });
        out[idx].orgs.extend(a.orgs.iter().map(String::as_str));
        out[idx]
            .suborgs
            .extend(a.suborgs.iter().map(String::as_str));
    }
    out
}

/// Number of distinct authors by normalized name.
pub fn distinct_author_count(paper: &PaperRecord) -> usize {
    paper
        .authors
        .iter()
        .map(|a| canonicalize_text(&a.name))
        .collect::<HashSet<_>>()
        .len()
}

pub fn classify_authorship(paper: &PaperRecord) -> Label {
    match distinct_author_count(paper) {
        0 => Label::Excluded(ExclusionReason::NoAuthors),
        1 => Label::Single,
        _ => Label::Multi,
    }
}

/// Institution id for one organization string: the rule match, an
/// `ext:` id for unmatched text, or `None` for text that normalizes to
/// nothing.
pub fn institution_of(rules: &RuleSet, raw: &str) -> Option<String> {
    let res = rules.resolve_institution(raw);
    match res.outcome {
        Outcome::Resolved(id) => Some(id),
        _ => {
            let canonical = canonicalize_text(raw);
            (!canonical.is_empty()).then(|| format!("{EXTERNAL_PREFIX}{canonical}"))
        }
    }
}

pub fn department_of(rules: &RuleSet, raw: &str) -> Option<String> {
    rules
        .resolve_department(raw)
        .resolved_id()
        .map(str::to_string)
}

fn institutional_label(per_author: &[IdSet], home: &str) -> Label {
    if per_author.is_empty() {
        return Label::Excluded(ExclusionReason::NoAuthors);
    }
    let all: BTreeSet<&str> = per_author
        .iter()
        .flat_map(|s| s.iter().map(|id| &**id))
        .collect();
    let has_home = all.contains(home);
    if per_author.len() >= 2 && all.len() >= 2 && has_home {
        Label::Multi
    } else if !has_home {
        Label::Excluded(ExclusionReason::NoHomeInstitution)
    } else if all.len() == 1 && per_author.iter().all(|s| !s.is_empty()) {
        Label::Single
    } else if all.len() == 1 {
        Label::Excluded(ExclusionReason::MissingAffiliations)
    } else {
        Label::Excluded(ExclusionReason::SingleAuthorMultiInst)
    }
}

fn departmental_label(per_author: &[IdSet]) -> Label {
    if per_author.is_empty() {
        return Label::Excluded(ExclusionReason::NoAuthors);
    }
    let all: BTreeSet<&Arc<str>> = per_author.iter().flatten().collect();
    let with_dept = per_author.iter().filter(|s| !s.is_empty()).count();
    if all.is_empty() {
        Label::Excluded(ExclusionReason::NoDeptAffiliations)
    } else if with_dept >= 2 && all.len() >= 2 {
        // two non-empty authors and two departments always admit a pair
        // (a, d1), (b, d2) with a != b and d1 != d2
        Label::Multi
    } else {
        Label::Single
    }
}

fn label_paper<I, D>(paper: &PaperRecord, home: &str, inst: I, dept: D) -> CollabLabels
where
    I: Fn(&str) -> Option<Arc<str>>,
    D: Fn(&str) -> Option<Arc<str>>,
{
    let authors = distinct_authors(paper);
    let author_institutions: Vec<IdSet> = authors
        .iter()
        .map(|a| id_set(a.orgs.iter().filter_map(|o| inst(o))))
        .collect();
    let author_departments: Vec<IdSet> = authors
        .iter()
        .map(|a| id_set(a.suborgs.iter().filter_map(|s| dept(s))))
        .collect();
    let authorship = match authors.len() {
        0 => Label::Excluded(ExclusionReason::NoAuthors),
        1 => Label::Single,
        _ => Label::Multi,
    };
    CollabLabels {
        paper_id: paper.id.clone(),
        authorship,
        institutional: institutional_label(&author_institutions, home),
        departmental: departmental_label(&author_departments),
        author_departments,
        author_institutions,
    }
}

pub fn classify_institutional(paper: &PaperRecord, rules: &RuleSet, home: &str) -> Label {
    label_paper(
        paper,
        home,
        |o| institution_of(rules, o).map(Arc::from),
        |_| None,
    )
    .institutional
}

pub fn classify_departmental(paper: &PaperRecord, rules: &RuleSet) -> Label {
    label_paper(
        paper,
        "",
        |_| None,
        |s| department_of(rules, s).map(Arc::from),
    )
    .departmental
}

pub fn classify_paper(paper: &PaperRecord, rules: &RuleSet, home: &str) -> CollabLabels {
    label_paper(
        paper,
        home,
        |o| institution_of(rules, o).map(Arc::from),
        |s| department_of(rules, s).map(Arc::from),
    )
}

/// Labels every paper, resolving each distinct affiliation string once.
/// Output is ordered by paper id.
pub fn classify_corpus(corpus: &Corpus, rules: &RuleSet, home: &str) -> Result<Vec<CollabLabels>> {
    if !rules.has_institution(home) {
        return Err(Error::UnknownInstitution(home.to_string()));
    }
    let mut orgs: HashSet<&str> = HashSet::new();
    let mut suborgs: HashSet<&str> = HashSet::new();
    for p in corpus.papers() {
        for a in &p.authors {
            orgs.extend(a.orgs.iter().map(String::as_str));
            suborgs.extend(a.suborgs.iter().map(String::as_str));
        }
    }
    // equal ids share one allocation
    let mut interned: HashMap<String, Arc<str>> = HashMap::new();
    let mut intern = |id: Option<String>| {
        id.map(|id| {
            interned
                .entry(id)
                .or_insert_with_key(|k| Arc::from(k.as_str()))
                .clone()
        })
    };
    let resolved: Vec<(&str, Option<String>)> = orgs
        .into_par_iter()
        .map(|o| (o, institution_of(rules, o)))
        .collect();
    let inst_cache: HashMap<&str, Option<Arc<str>>> = resolved
        .into_iter()
        .map(|(o, id)| (o, intern(id)))
        .collect();
    let resolved: Vec<(&str, Option<String>)> = suborgs
        .into_par_iter()
        .map(|s| (s, department_of(rules, s)))
        .collect();
    let dept_cache: HashMap<&str, Option<Arc<str>>> = resolved
        .into_iter()
        .map(|(s, id)| (s, intern(id)))
        .collect();

    let mut labels: Vec<CollabLabels> = corpus
        .papers()
        .par_iter()
        .map(|p| {
            label_paper(
                p,
                home,
                |o| inst_cache.get(o).cloned().flatten(),
                |s| dept_cache.get(s).cloned().flatten(),
            )
        })
        .collect();
    labels.par_sort_unstable_by(|a, b| a.paper_id.cmp(&b.paper_id));
    Ok(labels)
}
