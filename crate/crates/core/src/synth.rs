//! Seeded synthetic corpora with known labels and planted co-citation
//! clusters.
//!
//! Departments are split into clusters, each cluster owning a pool of cited
//! works. A department cites each work of its own cluster's pool with
//! probability `p_within` and every other pool's works with `p_cross`; each
//! such citation is carried by one home paper whose first author sits in
//! the department. Works left with fewer than `min_work_citers` citing
//! departments are topped up from their own cluster. Citations between corpus papers stay inside the citing
//! paper's cluster.
//! Affiliation strings are drawn from the generated rules' aliases and,
//! with probability `misspell_rate`, receive one single-character edit in a
//! token of six or more letters, which the fuzzy matcher can undo.
//!
//! Ground truth is derived from the intended institution and department of
//! each author, not from the emitted strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affnorm::RulesFile;
use crate::classify::{Dimension, ExclusionReason, Label, LabelRow};
use crate::corpus::{AuthorEntry, CitationEdge, PaperRecord, WorkRecord};
use crate::{Error, Result};

/// Canonical id of the home institution in generated rules.
pub const HOME_ID: &str = "uw";
const HOME_ALIASES: [&str; 2] = ["University of Washington", "Univ. of Washington"];

/// Minimum Damerau-Levenshtein distance between generated name stems.
pub const MIN_STEM_DISTANCE: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_departments: usize,
    pub n_clusters: usize,
    pub n_papers: usize,
    pub n_external_institutions: usize,
    /// Relative weight of each author count; index 0 is a paper without
    /// authors.
    pub author_count_weights: Vec<f64>,
    /// Probability that a paper has a home-institution first author.
    pub p_home_paper: f64,
    /// Probability that a co-author is external.
    pub p_external: f64,
    /// Probability that a home co-author sits in a department other than
    /// the paper's primary one.
    pub p_other_department: f64,
    /// Probability that such a department is drawn from the primary
    /// department's cluster.
    pub p_same_cluster_coauthor: f64,
    pub p_missing_org: f64,
    pub p_missing_suborg: f64,
    pub p_within: f64,
    pub p_cross: f64,
    pub works_per_pool: usize,
    /// Pool works cited by fewer departments than this gain citations from
    /// further departments of the owning cluster.
    pub min_work_citers: usize,
    /// Each paper cites up to this many earlier corpus papers.
    pub max_corpus_citations: usize,
    pub misspell_rate: f64,
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_departments: 30,
            n_clusters: 3,
            n_papers: 1000,
            n_external_institutions: 8,
            author_count_weights: vec![0.0, 0.1, 0.3, 0.3, 0.2, 0.1],
            p_home_paper: 1.0,
            p_external: 0.3,
            p_other_department: 0.15,
            p_same_cluster_coauthor: 0.8,
            p_missing_org: 0.0,
            p_missing_suborg: 0.0,
            p_within: 0.8,
            p_cross: 0.05,
            works_per_pool: 40,
            min_work_citers: 2,
            max_corpus_citations: 3,
            misspell_rate: 0.0,
            min_year: 2000,
            max_year: 2020,
        }
    }
}

impl SynthConfig {
    pub fn from_json(text: &str) -> Result<SynthConfig> {
        let config: SynthConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let probabilities = [
            ("p_home_paper", self.p_home_paper),
            ("p_external", self.p_external),
            ("p_other_department", self.p_other_department),
            ("p_same_cluster_coauthor", self.p_same_cluster_coauthor),
            ("p_missing_org", self.p_missing_org),
            ("p_missing_suborg", self.p_missing_suborg),
            ("p_within", self.p_within),
            ("p_cross", self.p_cross),
            ("misspell_rate", self.misspell_rate),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.n_papers == 0 {
            return bad("n_papers must be positive".into());
        }
        if self.n_departments == 0 {
            return bad("n_departments must be positive".into());
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_departments {
            return bad(format!(
                "n_clusters = {} must be between 1 and n_departments = {}",
                self.n_clusters, self.n_departments
            ));
        }
        if self.min_year > self.max_year {
            return bad(format!(
                "min_year {} exceeds max_year {}",
                self.min_year, self.max_year
            ));
        }
        if self
            .author_count_weights
            .iter()
            .any(|w| !w.is_finite() || *w < 0.0)
            || !self.author_count_weights.iter().any(|w| *w > 0.0)
        {
            return bad(
                "author_count_weights needs non-negative weights with a positive sum".into(),
            );
        }
        if self.p_external > 0.0 && self.n_external_institutions == 0 {
            return bad("p_external > 0 needs at least one external institution".into());
        }
        Ok(())
    }
}

/// Everything a generator run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub papers: Vec<PaperRecord>,
    pub citations: Vec<CitationEdge>,
    pub works: Vec<WorkRecord>,
    pub rules: RulesFile,
    /// Intended labels, in paper order.
    pub truth: Vec<LabelRow>,
    /// Planted cluster of every department id.
    pub clusters: BTreeMap<String, usize>,
}

impl SynthOutput {
    /// Writes `papers.jsonl`, `citations.jsonl`, `works.jsonl`,
    /// `rules.json`, `truth_labels.csv` and `truth_clusters.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(fs::File::create(dir.join("papers.jsonl"))?);
        for p in &self.papers {
            writeln!(w, "{}", p.to_json_line())?;
        }
        w.flush()?;
        write_jsonl(&dir.join("citations.jsonl"), &self.citations)?;
        write_jsonl(&dir.join("works.jsonl"), &self.works)?;
        let mut rules = serde_json::to_string_pretty(&self.rules)?;
        rules.push('\n');
        fs::write(dir.join("rules.json"), rules)?;
        let mut w = csv::Writer::from_path(dir.join("truth_labels.csv"))?;
        for row in &self.truth {
            w.serialize(row)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("truth_clusters.csv"))?;
        w.write_record(["department", "cluster"])?;
        for (dept, c) in &self.clusters {
            w.write_record([dept.as_str(), &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    let mut w = String::with_capacity(syllables * 2);
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    w
}

/// `n` eight-letter stems, pairwise at least [`MIN_STEM_DISTANCE`] apart.
fn distinct_stems(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * (n + 10) {
            return Err(Error::InvalidArgument(format!(
                "cannot generate {n} well-separated names"
            )));
        }
        let w = pseudo_word(rng, 4);
        if out
            .iter()
            .all(|o| strsim::damerau_levenshtein(o, &w) >= MIN_STEM_DISTANCE)
        {
            out.push(w);
        }
    }
    Ok(out)
}

fn title_case(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// One single-character edit (substitution, deletion, insertion or
/// adjacent transposition) inside a random token of at least six letters.
/// Strings without such a token are returned unchanged.
fn misspell(rng: &mut ChaCha8Rng, s: &str) -> String {
    let tokens: Vec<&str> = s.split(' ').collect();
    let eligible: Vec<usize> = (0..tokens.len())
        .filter(|&i| {
            tokens[i].chars().count() >= 6 && tokens[i].chars().all(|c| c.is_ascii_alphabetic())
        })
        .collect();
    let Some(&t) = eligible.choose(rng) else {
        return s.to_string();
    };
    let mut chars: Vec<char> = tokens[t].chars().collect();
    // keep the first letter so capitalization survives
    let pos = rng.gen_range(1..chars.len());
    let letter = |rng: &mut ChaCha8Rng, not: char| loop {
        let c = (b'a' + rng.gen_range(0..26u8)) as char;
        if c != not {
            break c;
        }
    };
    match rng.gen_range(0..4) {
        0 => chars[pos] = letter(rng, chars[pos]),
        1 => {
            chars.remove(pos);
        }
        2 => {
            let c = letter(rng, chars[pos]);
            chars.insert(pos, c)
        }
        _ => {
            if pos + 1 < chars.len() && chars[pos] != chars[pos + 1] {
                chars.swap(pos, pos + 1);
            } else {
                chars[pos] = letter(rng, chars[pos]);
            }
        }
    }
    let edited: String = chars.into_iter().collect();
    let mut out: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
    out[t] = edited;
    out.join(" ")
}

struct Department {
    id: String,
    aliases: Vec<String>,
    cluster: usize,
}

struct Institution {
    id: String,
    aliases: Vec<String>,
    faculty: String,
}

/// Intended affiliation of one author.
struct Intended {
    institution: Option<String>,
    department: Option<String>,
}

fn truth_row(paper_id: &str, authors: &[Intended]) -> LabelRow {
    let authorship = match authors.len() {
        0 => Label::Excluded(ExclusionReason::NoAuthors),
        1 => Label::Single,
        _ => Label::Multi,
    };
    let insts: BTreeSet<&str> = authors
        .iter()
        .filter_map(|a| a.institution.as_deref())
        .collect();
    let any_missing = authors.iter().any(|a| a.institution.is_none());
    let institutional = if authors.is_empty() {
        Label::Excluded(ExclusionReason::NoAuthors)
    } else if !insts.contains(HOME_ID) {
        Label::Excluded(ExclusionReason::NoHomeInstitution)
    } else if authors.len() >= 2 && insts.len() >= 2 {
        Label::Multi
    } else if insts.len() >= 2 {
        Label::Excluded(ExclusionReason::SingleAuthorMultiInst)
    } else if any_missing {
        Label::Excluded(ExclusionReason::MissingAffiliations)
    } else {
        Label::Single
    };
    let depts: BTreeSet<&str> = authors
        .iter()
        .filter_map(|a| a.department.as_deref())
        .collect();
    let with_dept = authors.iter().filter(|a| a.department.is_some()).count();
    let departmental = if authors.is_empty() {
        Label::Excluded(ExclusionReason::NoAuthors)
    } else if depts.is_empty() {
        Label::Excluded(ExclusionReason::NoDeptAffiliations)
    } else if with_dept >= 2 && depts.len() >= 2 {
        Label::Multi
    } else {
        Label::Single
    };
    let reason = |l: Label| l.reason().map(|r| r.code().to_string()).unwrap_or_default();
    LabelRow {
        paper_id: paper_id.to_string(),
        authorship: authorship.name(Dimension::Authorship),
        institutional: institutional.name(Dimension::Institutional),
        departmental: departmental.name(Dimension::Departmental),
        inst_reason: reason(institutional),
        dept_reason: reason(departmental),
        departments: depts.into_iter().collect::<Vec<_>>().join(";"),
    }
}

/// Generates a corpus. The output is a pure function of `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_ext = config.n_external_institutions;
    let stems = distinct_stems(&mut rng, config.n_departments + 2 * n_ext)?;

    let mut cluster_of: Vec<usize> = (0..config.n_departments)
        .map(|i| i % config.n_clusters)
        .collect();
    cluster_of.shuffle(&mut rng);
    let departments: Vec<Department> = stems[..config.n_departments]
        .iter()
        .zip(&cluster_of)
        .map(|(stem, &cluster)| {
            let name = title_case(stem);
            Department {
                id: format!("dept-{stem}"),
                aliases: vec![
                    format!("Department of {name}"),
                    format!("Dept. of {name}"),
                    format!("{name} Department"),
                ],
                cluster,
            }
        })
        .collect();
    let externals: Vec<Institution> = (0..n_ext)
        .map(|i| {
            let stem = &stems[config.n_departments + 2 * i];
            let faculty = &stems[config.n_departments + 2 * i + 1];
            let name = title_case(stem);
            Institution {
                id: format!("inst-{stem}"),
                aliases: vec![
                    format!("{name} Institute of Technology"),
                    format!("{name} Tech"),
                ],
                faculty: format!("Faculty of {}", title_case(faculty)),
            }
        })
        .collect();
    let mut by_cluster: Vec<Vec<usize>> = vec![Vec::new(); config.n_clusters];
    for (i, d) in departments.iter().enumerate() {
        by_cluster[d.cluster].push(i);
    }

    let mut rules = RulesFile {
        fuzzy: true,
        ..RulesFile::default()
    };
    rules.institution_aliases.insert(
        HOME_ID.to_string(),
        HOME_ALIASES.iter().map(|s| s.to_string()).collect(),
    );
    for inst in &externals {
        rules
            .institution_aliases
            .insert(inst.id.clone(), inst.aliases.clone());
        rules.exclusions.push(inst.faculty.clone());
    }
    for d in &departments {
        rules
            .department_aliases
            .insert(d.id.clone(), d.aliases.clone());
    }

    let mut works = Vec::new();
    let pools: Vec<Vec<String>> = (0..config.n_clusters)
        .map(|c| {
            (0..config.works_per_pool)
                .map(|k| {
                    let id = format!("w{c:02}-{k:04}");
                    works.push(WorkRecord {
                        id: id.clone(),
                        year: Some(rng.gen_range(config.min_year - 5..=config.max_year)),
                    });
                    id
                })
                .collect()
        })
        .collect();

    let authors_dist = WeightedIndex::new(&config.author_count_weights)
        .map_err(|e| Error::InvalidArgument(format!("author_count_weights: {e}")))?;
    let width = config.n_papers.to_string().len().max(6);
    let mut papers = Vec::with_capacity(config.n_papers);
    let mut truth = Vec::with_capacity(config.n_papers);
    let mut citations = Vec::new();
    let mut all_earlier: Vec<usize> = Vec::new();
    let mut by_cluster_papers: Vec<Vec<usize>> = vec![Vec::new(); config.n_clusters];
    // home papers by primary department
    let mut carriers: Vec<Vec<usize>> = vec![Vec::new(); departments.len()];
    let noisy = |rng: &mut ChaCha8Rng, s: &str| {
        if config.misspell_rate > 0.0 && rng.gen_bool(config.misspell_rate) {
            misspell(rng, s)
        } else {
            s.to_string()
        }
    };

    for idx in 0..config.n_papers {
        let id = format!("p{idx:0width$}");
        let year = rng.gen_range(config.min_year..=config.max_year);
        let n_authors = authors_dist.sample(&mut rng);
        let primary = rng.gen_range(0..departments.len());
        let home_paper = rng.gen_bool(config.p_home_paper);
        let mut names = BTreeSet::new();
        let mut authors = Vec::with_capacity(n_authors);
        let mut intended = Vec::with_capacity(n_authors);
        for j in 0..n_authors {
            let name = loop {
                let n = format!(
                    "{} {}",
                    title_case(&pseudo_word(&mut rng, 2)),
                    title_case(&pseudo_word(&mut rng, 3))
                );
                if names.insert(n.clone()) {
                    break n;
                }
            };
            let external =
                !(home_paper && (j == 0 || !rng.gen_bool(config.p_external))) && n_ext > 0;
            let (inst_id, inst_aliases, dept): (&str, Vec<String>, Option<&Department>) =
                if external {
                    let inst = &externals[rng.gen_range(0..n_ext)];
                    (&inst.id, inst.aliases.clone(), None)
                } else {
                    let d = if j == 0 || !rng.gen_bool(config.p_other_department) {
                        primary
                    } else if rng.gen_bool(config.p_same_cluster_coauthor) {
                        *by_cluster[departments[primary].cluster]
                            .choose(&mut rng)
                            .unwrap()
                    } else {
                        rng.gen_range(0..departments.len())
                    };
                    let aliases = HOME_ALIASES.iter().map(|s| s.to_string()).collect();
                    (HOME_ID, aliases, Some(&departments[d]))
                };
            let missing_org = rng.gen_bool(config.p_missing_org);
            let missing_suborg = rng.gen_bool(config.p_missing_suborg);
            let orgs = if missing_org {
                Vec::new()
            } else {
                let raw = inst_aliases.choose(&mut rng).unwrap().clone();
                vec![noisy(&mut rng, &raw)]
            };
            let suborgs = if missing_suborg {
                Vec::new()
            } else {
                match dept {
                    Some(d) => {
                        let raw = d.aliases.choose(&mut rng).unwrap().clone();
                        vec![noisy(&mut rng, &raw)]
                    }
                    None => vec![externals
                        .iter()
                        .find(|e| e.id == inst_id)
                        .unwrap()
                        .faculty
                        .clone()],
                }
            };
            intended.push(Intended {
                institution: (!missing_org).then(|| inst_id.to_string()),
                department: match dept {
                    Some(d) if !missing_suborg => Some(d.id.clone()),
                    _ => None,
                },
            });
            authors.push(AuthorEntry {
                name,
                orgs,
                suborgs,
            });
        }

        if idx > 0 {
            let same: &[usize] = &by_cluster_papers[departments[primary].cluster];
            let pool: &[usize] = if same.is_empty() { &all_earlier } else { same };
            let k = rng.gen_range(0..=config.max_corpus_citations.min(pool.len()));
            let mut targets: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), k)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            targets.sort_unstable();
            for t in targets {
                citations.push(CitationEdge {
                    citing: id.clone(),
                    cited: papers_id(t, width),
                });
            }
        }
        all_earlier.push(idx);
        by_cluster_papers[departments[primary].cluster].push(idx);
        if home_paper {
            carriers[primary].push(idx);
        }

        truth.push(truth_row(&id, &intended));
        papers.push(PaperRecord { id, year, authors });
    }

    // Department-level citations of pool works, each carried by one of the
    // department's home papers.
    let mut citing_depts: Vec<Vec<BTreeSet<usize>>> = pools
        .iter()
        .map(|p| vec![BTreeSet::new(); p.len()])
        .collect();
    let mut carry = |rng: &mut ChaCha8Rng, d: usize, w: &str| {
        let carrier = *carriers[d].choose(rng).unwrap();
        citations.push(CitationEdge {
            citing: papers_id(carrier, width),
            cited: w.to_string(),
        });
    };
    for (d, dept) in departments.iter().enumerate() {
        for (c, pool) in pools.iter().enumerate() {
            let p = if c == dept.cluster {
                config.p_within
            } else {
                config.p_cross
            };
            for (k, w) in pool.iter().enumerate() {
                if rng.gen_bool(p) && !carriers[d].is_empty() {
                    carry(&mut rng, d, w);
                    citing_depts[c][k].insert(d);
                }
            }
        }
    }
    for (c, pool) in pools.iter().enumerate() {
        let members: Vec<usize> = (0..departments.len())
            .filter(|&d| departments[d].cluster == c && !carriers[d].is_empty())
            .collect();
        for (k, w) in pool.iter().enumerate() {
            let mut spare: Vec<usize> = members
                .iter()
                .copied()
                .filter(|d| !citing_depts[c][k].contains(d))
                .collect();
            spare.shuffle(&mut rng);
            let missing = config
                .min_work_citers
                .saturating_sub(citing_depts[c][k].len());
            for d in spare.into_iter().take(missing) {
                carry(&mut rng, d, w);
            }
        }
    }
    citations.sort_by(|a, b| (&a.citing, &a.cited).cmp(&(&b.citing, &b.cited)));
    citations.dedup();

    let clusters = departments
        .iter()
        .map(|d| (d.id.clone(), d.cluster))
        .collect();
    Ok(SynthOutput {
        papers,
        citations,
        works,
        rules,
        truth,
        clusters,
    })
}

fn papers_id(idx: usize, width: usize) -> String {
    format!("p{idx:0width$}")
}
