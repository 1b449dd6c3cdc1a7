//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use collab_core::affnorm::{canonicalize_text, RuleSet};
use collab_core::corpus::{CitationEdge, Corpus, WorkRecord};

/// Ward merge sequence recomputed from the raw points at every step.
/// Returns `(a, b, distance)` with scipy-style cluster labels.
pub fn ward_from_scratch(points: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut clusters: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    let centroid = |members: &[usize]| -> Vec<f64> {
        let dim = points[0].len();
        let mut c = vec![0.0; dim];
        for &m in members {
            for (k, v) in points[m].iter().enumerate() {
                c[k] += v;
            }
        }
        c.iter().map(|v| v / members.len() as f64).collect()
    };
    let mut out = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let labels: Vec<usize> = clusters.keys().copied().collect();
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &a) in labels.iter().enumerate() {
            for &b in &labels[i + 1..] {
                let (ma, mb) = (&clusters[&a], &clusters[&b]);
                let (ca, cb) = (centroid(ma), centroid(mb));
                let sq: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y) * (x - y)).sum();
                let (na, nb) = (ma.len() as f64, mb.len() as f64);
                let d = (2.0 * na * nb / (na + nb) * sq).sqrt();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.unwrap();
        let mut merged = clusters.remove(&a).unwrap();
        merged.extend(clusters.remove(&b).unwrap());
        clusters.insert(n + step, merged);
        out.push((a, b, d));
    }
    out
}

/// Co-citation counts by direct enumeration over departments and works.
pub fn cocitation_nested_loop(
    corpus: &Corpus,
    paper_departments: &HashMap<String, BTreeSet<String>>,
    edges: &[CitationEdge],
    works: &[WorkRecord],
    departments: &[String],
    min_cocite: usize,
    min_work_year: i32,
) -> Vec<Vec<u64>> {
    let mut year: HashMap<&str, Option<i32>> =
        works.iter().map(|w| (w.id.as_str(), w.year)).collect();
    for p in corpus.papers() {
        year.insert(p.id.as_str(), Some(p.year));
    }
    let mut citers: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in edges {
        if e.citing != e.cited && corpus.contains(&e.citing) {
            citers
                .entry(e.cited.as_str())
                .or_default()
                .insert(e.citing.as_str());
        }
    }
    let qualifying: Vec<&str> = citers
        .iter()
        .filter(|(w, c)| {
            c.len() >= min_cocite
                && year
                    .get(*w)
                    .copied()
                    .flatten()
                    .is_some_and(|y| y >= min_work_year)
        })
        .map(|(w, _)| *w)
        .collect();
    let cites = |d: &str, w: &str| {
        citers[w]
            .iter()
            .any(|p| paper_departments.get(*p).is_some_and(|ds| ds.contains(d)))
    };
    let n = departments.len();
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            for w in &qualifying {
                if cites(&departments[i], w) && cites(&departments[j], w) {
                    m[i][j] += 1;
                }
            }
        }
    }
    m
}

/// Departmental label by enumerating author pairs: `"multi-department"`,
/// `"single-department"` or the exclusion code.
pub fn departmental_by_pairs(per_author: &[BTreeSet<String>]) -> &'static str {
    if per_author.is_empty() {
        return "no-authors";
    }
    if per_author.iter().all(BTreeSet::is_empty) {
        return "no-dept-affiliations";
    }
    for (a, da) in per_author.iter().enumerate() {
        for (b, db) in per_author.iter().enumerate() {
            if a != b && da.iter().any(|x| db.iter().any(|y| x != y)) {
                return "multi-department";
            }
        }
    }
    "single-department"
}

/// Authors merged by normalized name, with their department ids.
pub fn author_departments(
    paper: &collab_core::corpus::PaperRecord,
    rules: &RuleSet,
) -> Vec<BTreeSet<String>> {
    let mut by_name: Vec<(String, BTreeSet<String>)> = Vec::new();
    for a in &paper.authors {
        let key = canonicalize_text(&a.name);
        let depts: BTreeSet<String> = a
            .suborgs
            .iter()
            .filter_map(|s| {
                rules
                    .resolve_department(s)
                    .resolved_id()
                    .map(str::to_string)
            })
            .collect();
        match by_name.iter_mut().find(|(k, _)| *k == key) {
            Some((_, d)) => d.extend(depts),
            None => by_name.push((key, depts)),
        }
    }
    by_name.into_iter().map(|(_, d)| d).collect()
}

/// Adjusted Rand index of two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ra: HashMap<usize, f64> = HashMap::new();
    let mut rb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|&v| choose2(v)).sum();
    let sa: f64 = ra.values().map(|&v| choose2(v)).sum();
    let sb: f64 = rb.values().map(|&v| choose2(v)).sum();
    let expected = sa * sb / choose2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Median by sorting; mean of the two central values for even lengths.
pub fn sorted_median(values: &[usize]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2] as f64),
        _ => Some((v[n / 2 - 1] + v[n / 2]) as f64 / 2.0),
    }
}

pub fn mean(values: &[usize]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<usize>() as f64 / values.len() as f64)
}

/// Distinct citing ids per cited id, with self-citations dropped.
pub fn in_citation_counts(edges: &[CitationEdge]) -> HashMap<String, usize> {
    let mut citers: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for e in edges {
        if e.citing != e.cited {
            citers
                .entry(e.cited.as_str())
                .or_default()
                .insert(e.citing.as_str());
        }
    }
    citers
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.len()))
        .collect()
}

/// A small random corpus for co-matrix checks.
pub struct CociteCase {
    pub corpus: Corpus,
    pub rules: RuleSet,
    pub edges: Vec<CitationEdge>,
    pub works: Vec<WorkRecord>,
}

/// Up to `max_papers` papers over up to `max_depts` departments citing
/// twenty works (some undated, some old) and each other.
pub fn random_cocite_case(seed: u64, max_papers: usize, max_depts: usize) -> CociteCase {
    use collab_core::corpus::{AuthorEntry, PaperRecord};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_depts = rng.gen_range(1..=max_depts);
    let n_papers = rng.gen_range(1..=max_papers);
    let names = [
        "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel",
    ];
    let mut rules =
        String::from(r#"{"institution_aliases":{"home":["Home U"]},"department_aliases":{"#);
    for (d, name) in names.iter().take(n_depts).enumerate() {
        if d > 0 {
            rules.push(',');
        }
        rules.push_str(&format!(r#""d{d}":["Dept of {name}"]"#));
    }
    rules.push_str("}}");
    let rules = RuleSet::from_json(&rules).unwrap();
    let papers: Vec<PaperRecord> = (0..n_papers)
        .map(|i| PaperRecord {
            id: format!("p{i:02}"),
            year: rng.gen_range(1988..2000),
            authors: (0..rng.gen_range(0..4))
                .map(|a| AuthorEntry {
                    name: format!("Author {a}"),
                    orgs: vec!["Home U".into()],
                    suborgs: (0..rng.gen_range(0..3))
                        .map(|_| format!("Dept of {}", names[rng.gen_range(0..n_depts)]))
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let works: Vec<WorkRecord> = (0..20)
        .map(|w| WorkRecord {
            id: format!("w{w:02}"),
            year: (w % 7 != 0).then(|| rng.gen_range(1985..2000)),
        })
        .collect();
    let mut edges = Vec::new();
    for p in &papers {
        for w in &works {
            if rng.gen_bool(0.3) {
                edges.push(CitationEdge {
                    citing: p.id.clone(),
                    cited: w.id.clone(),
                });
            }
        }
        for q in &papers {
            if rng.gen_bool(0.05) {
                edges.push(CitationEdge {
                    citing: p.id.clone(),
                    cited: q.id.clone(),
                });
            }
        }
    }
    // duplicates must collapse
    if let Some(e) = edges.first().cloned() {
        edges.push(e);
    }
    CociteCase {
        corpus: Corpus::from_papers(papers, "random").unwrap(),
        rules,
        edges,
        works,
    }
}
