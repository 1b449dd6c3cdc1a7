//! Canonical data model and ingest of the line-oriented input files.
//!
//! Three files feed the pipeline, each one JSON object per line:
//!
//! * `papers.jsonl`: `{"id", "year", "authors": [{"name", "orgs", "suborgs"}]}`
//! * `citations.jsonl`: `{"citing", "cited"}`
//! * `works.jsonl`: `{"id", "year"}` with `year` possibly `null`
//!
//! Lines are parsed in parallel; results are reassembled in input order so
//! the resulting [`Corpus`] does not depend on the worker count.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::affnorm::{Outcome, RuleSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorEntry {
    pub name: String,
    /// Raw organization strings. Empty means no metadata.
    pub orgs: Vec<String>,
    /// Raw suborganization strings. Empty means no metadata.
    pub suborgs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaperRecord {
    pub id: String,
    pub year: i32,
    pub authors: Vec<AuthorEntry>,
}

impl PaperRecord {
    /// Serializes the record as a single `papers.jsonl` line (no newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("paper records always serialize")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAuthor {
    name: String,
    #[serde(default)]
    orgs: Option<Vec<String>>,
    #[serde(default)]
    suborgs: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct RawPaper {
    id: String,
    year: i32,
    authors: Vec<RawAuthor>,
}

/// One applied filter, kept in the corpus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterRecord {
    pub description: String,
    pub kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub sources: Vec<String>,
    pub filters: Vec<FilterRecord>,
}

/// Counts gathered while parsing a papers file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub lines: usize,
    pub records: usize,
    pub blank_lines: usize,
    /// Authors whose `orgs` key was absent or `null`.
    pub absent_orgs: usize,
    /// Authors whose `suborgs` key was absent or `null`.
    pub absent_suborgs: usize,
}

/// An immutable, id-indexed collection of papers in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
    provenance: Provenance,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids. Line numbers in the error
    /// are 1-based positions in `papers`.
    pub fn from_papers(papers: Vec<PaperRecord>, source: impl Into<String>) -> Result<Self> {
        let lines: Vec<usize> = (1..=papers.len()).collect();
        Self::build(papers, &lines, source.into())
    }

    fn build(papers: Vec<PaperRecord>, lines: &[usize], source: String) -> Result<Self> {
        let mut index = HashMap::with_capacity(papers.len());
        for (i, p) in papers.iter().enumerate() {
            if let Some(prev) = index.insert(p.id.clone(), i) {
                return Err(Error::DuplicateId {
                    id: p.id.clone(),
                    first: lines[prev],
                    second: lines[i],
                });
            }
        }
        Ok(Corpus {
            papers,
            index,
            provenance: Provenance {
                sources: vec![source],
                filters: Vec::new(),
            },
        })
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PaperRecord> {
        self.index.get(id).map(|&i| &self.papers[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn retain(&self, description: String, keep: impl Fn(&PaperRecord) -> bool + Sync) -> Corpus {
        let flags: Vec<bool> = self.papers.par_iter().map(&keep).collect();
        let papers: Vec<PaperRecord> = self
            .papers
            .iter()
            .zip(&flags)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p.clone())
            .collect();
        let index = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        let mut provenance = self.provenance.clone();
        provenance.filters.push(FilterRecord {
            description,
            kept: papers.len(),
            dropped: self.papers.len() - papers.len(),
        });
        Corpus {
            papers,
            index,
            provenance,
        }
    }

    /// Keeps papers with `min_year <= year <= max_year`.
    pub fn filter_by_year(&self, min_year: i32, max_year: i32) -> Result<Corpus> {
        if min_year > max_year {
            return Err(Error::InvalidArgument(format!(
                "min_year {min_year} is after max_year {max_year}"
            )));
        }
        Ok(
            self.retain(format!("year in [{min_year}, {max_year}]"), |p| {
                (min_year..=max_year).contains(&p.year)
            }),
        )
    }

    /// Keeps papers where at least one author lists an organization that
    /// resolves to `home`.
    pub fn select_by_institution(&self, rules: &RuleSet, home: &str) -> Result<Corpus> {
        if !rules.has_institution(home) {
            return Err(Error::UnknownInstitution(home.to_string()));
        }
        let distinct: HashSet<&str> = self
            .papers
            .iter()
            .flat_map(|p| {
                p.authors
                    .iter()
                    .flat_map(|a| a.orgs.iter().map(String::as_str))
            })
            .collect();
        let mut distinct: Vec<&str> = distinct.into_iter().collect();
        distinct.sort_unstable();
        let home_strings: HashSet<&str> = distinct
            .par_iter()
            .filter(|s| matches!(rules.resolve_institution(s).outcome, Outcome::Resolved(ref id) if id == home))
            .copied()
            .collect();
        Ok(self.retain(format!("institution {home}"), |p| {
            p.authors
                .iter()
                .any(|a| a.orgs.iter().any(|o| home_strings.contains(o.as_str())))
        }))
    }

    /// Writes one JSON line per paper, in corpus order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.papers {
            out.write_all(p.to_json_line().as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Splits `bytes` into numbered non-blank lines and parses each in parallel.
/// The first failing line (in input order) is reported.
fn parse_lines<T, F>(bytes: &[u8], source: &str, convert: F) -> Result<(Vec<(usize, T)>, usize)>
where
    T: Send,
    F: Fn(&str) -> std::result::Result<T, String> + Sync,
{
    let mut segments: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    // the empty segment after a final newline is not a line
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        segments.pop();
    }
    let mut lines = Vec::with_capacity(segments.len());
    let mut blank = 0;
    for (i, raw) in segments.into_iter().enumerate() {
        if raw.iter().all(u8::is_ascii_whitespace) {
            blank += 1;
        } else {
            lines.push((i + 1, raw));
        }
    }
    let parsed: Vec<std::result::Result<(usize, T), Error>> = lines
        .par_iter()
        .map(|&(n, raw)| {
            let text = std::str::from_utf8(raw)
                .map_err(|e| Error::malformed(source, n, format!("invalid UTF-8: {e}")))?;
            convert(text)
                .map(|v| (n, v))
                .map_err(|m| Error::malformed(source, n, m))
        })
        .collect();
    let out = parsed.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((out, blank))
}

fn json_line<T: DeserializeOwned>(text: &str) -> std::result::Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// Parses a `papers.jsonl` stream.
pub fn parse_papers<R: Read>(mut reader: R, source: &str) -> Result<(Corpus, ParseReport)> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_papers_bytes(&bytes, source)
}

pub fn parse_papers_bytes(bytes: &[u8], source: &str) -> Result<(Corpus, ParseReport)> {
    let (rows, blank_lines) = parse_lines(bytes, source, json_line::<RawPaper>)?;
    let mut report = ParseReport {
        lines: rows.len() + blank_lines,
        records: rows.len(),
        blank_lines,
        ..ParseReport::default()
    };
    let mut lines = Vec::with_capacity(rows.len());
    let mut papers = Vec::with_capacity(rows.len());
    for (n, raw) in rows {
        let authors = raw
            .authors
            .into_iter()
            .map(|a| {
                report.absent_orgs += usize::from(a.orgs.is_none());
                report.absent_suborgs += usize::from(a.suborgs.is_none());
                AuthorEntry {
                    name: a.name,
                    orgs: a.orgs.unwrap_or_default(),
                    suborgs: a.suborgs.unwrap_or_default(),
                }
            })
            .collect();
        lines.push(n);
        papers.push(PaperRecord {
            id: raw.id,
            year: raw.year,
            authors,
        });
    }
    let corpus = Corpus::build(papers, &lines, source.to_string())?;
    Ok((corpus, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitationEdge {
    pub citing: String,
    pub cited: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub id: String,
    #[serde(default)]
    pub year: Option<i32>,
}

/// Parses a `citations.jsonl` stream, preserving line order.
pub fn parse_citations<R: Read>(mut reader: R, source: &str) -> Result<Vec<CitationEdge>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let (rows, _) = parse_lines(&bytes, source, json_line::<CitationEdge>)?;
    Ok(rows.into_iter().map(|(_, e)| e).collect())
}

/// Parses a `works.jsonl` stream. A repeated id with conflicting years is
/// an error; exact repeats are tolerated.
pub fn parse_works<R: Read>(mut reader: R, source: &str) -> Result<Vec<WorkRecord>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let (rows, _) = parse_lines(&bytes, source, json_line::<WorkRecord>)?;
    let mut seen: HashMap<String, (usize, Option<i32>)> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (n, w) in rows {
        match seen.get(&w.id) {
            Some(&(first, year)) if year != w.year => {
                return Err(Error::malformed(
                    source,
                    n,
                    format!(
                        "work `{}` already declared on line {first} with a different year",
                        w.id
                    ),
                ));
            }
            Some(_) => continue,
            None => {
                seen.insert(w.id.clone(), (n, w.year));
                out.push(w);
            }
        }
    }
    Ok(out)
}
