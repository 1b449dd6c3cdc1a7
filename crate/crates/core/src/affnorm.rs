//! Rule-driven disambiguation of affiliation strings.
//!
//! A rules file lists, per canonical id, the alias spellings seen in the
//! data, plus department merges, research-lab mappings, school rollups and
//! strings known to be unresolvable. [`RuleSet::compile`] validates the
//! whole file up front; resolution afterwards is a pure lookup.
//!
//! Department resolution order:
//!
//! 1. exact alias (after [`canonicalize_text`] on both sides)
//! 2. lab pattern contained in the string as a whole-token run
//! 3. exclusion pattern (exact)
//! 4. fuzzy alias match, when enabled
//!
//! A resolved id is then chased through `merges` to its fixed point and
//! rolled up to its school at most once.
//!
//! Every canonical id also acts as an alias of itself through its display
//! form, so `"department-of-biology"` resolves to `department-of-biology`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

/// Compatibility-normalizes, lowercases, maps every character that is not
/// alphanumeric (or a combining mark) to a separator, and collapses runs
/// of separators into single spaces.
pub fn canonicalize_text(raw: &str) -> String {
    let lowered: String = raw.nfkc().collect::<String>().to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut gap = false;
    for c in lowered.nfkc() {
        if c.is_alphanumeric() || is_combining_mark(c) {
            if gap && !out.is_empty() {
                out.push(' ');
            }
            gap = false;
            out.push(c);
        } else {
            gap = true;
        }
    }
    out
}

/// Minimum length (in chars) of a rule token for it to accept a fuzzy match.
pub const FUZZY_MIN_TOKEN_LEN: usize = 5;
/// Maximum Damerau-Levenshtein distance tolerated per token.
pub const FUZZY_MAX_TOKEN_DISTANCE: usize = 2;

/// The on-disk rules document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulesFile {
    pub institution_aliases: BTreeMap<String, Vec<String>>,
    pub department_aliases: BTreeMap<String, Vec<String>>,
    pub merges: BTreeMap<String, String>,
    pub lab_to_dept: BTreeMap<String, String>,
    pub school_rollups: BTreeMap<String, String>,
    pub exclusions: Vec<String>,
    pub fuzzy: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    Resolved(String),
    Unmatched,
    Excluded,
}

/// One rule application in a resolution trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RuleStep {
    Alias { pattern: String },
    Lab { pattern: String },
    Exclusion { pattern: String },
    Fuzzy { pattern: String, distance: usize },
    Merge { from: String, to: String },
    Rollup { from: String, to: String },
}

impl std::fmt::Display for RuleStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleStep::Alias { pattern } => write!(f, "alias({pattern})"),
            RuleStep::Lab { pattern } => write!(f, "lab({pattern})"),
            RuleStep::Exclusion { pattern } => write!(f, "exclusion({pattern})"),
            RuleStep::Fuzzy { pattern, distance } => write!(f, "fuzzy({pattern};{distance})"),
            RuleStep::Merge { from, to } => write!(f, "merge({from}>{to})"),
            RuleStep::Rollup { from, to } => write!(f, "rollup({from}>{to})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Resolution {
    pub outcome: Outcome,
    pub trace: Vec<RuleStep>,
}

impl Resolution {
    fn unmatched() -> Self {
        Resolution {
            outcome: Outcome::Unmatched,
            trace: Vec::new(),
        }
    }

    pub fn resolved_id(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::Resolved(id) => Some(id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct FuzzyEntry {
    tokens: Vec<String>,
    pattern: String,
    id: String,
}

#[derive(Debug, Clone, Default)]
struct AliasTable {
    exact: HashMap<String, String>,
    /// Alias patterns grouped by token count.
    by_len: HashMap<usize, Vec<FuzzyEntry>>,
}

impl AliasTable {
    fn insert(&mut self, raw: &str, id: &str) -> Result<()> {
        let pattern = canonicalize_text(raw);
        if pattern.is_empty() {
            return Err(Error::Rules(format!(
                "pattern `{raw}` for `{id}` is empty after normalization"
            )));
        }
        match self.exact.get(&pattern) {
            Some(prev) if prev != id => {
                return Err(Error::PatternConflict {
                    pattern,
                    first: prev.clone(),
                    second: id.to_string(),
                })
            }
            Some(_) => return Ok(()),
            None => {}
        }
        self.exact.insert(pattern.clone(), id.to_string());
        let tokens: Vec<String> = pattern.split(' ').map(str::to_string).collect();
        self.by_len
            .entry(tokens.len())
            .or_default()
            .push(FuzzyEntry {
                tokens,
                pattern,
                id: id.to_string(),
            });
        Ok(())
    }

    fn finish(&mut self) {
        for entries in self.by_len.values_mut() {
            entries.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        }
    }

    /// Unique fuzzy candidate, or `None` when zero or several ids qualify.
    fn fuzzy(&self, canonical: &str) -> Option<(&FuzzyEntry, usize)> {
        let tokens: Vec<&str> = canonical.split(' ').collect();
        let entries = self.by_len.get(&tokens.len())?;
        // best (distance, entry) per id; entries are sorted so ties keep the first pattern
        let mut best: BTreeMap<&str, (usize, &FuzzyEntry)> = BTreeMap::new();
        for entry in entries {
            if let Some(d) = fuzzy_distance(&tokens, &entry.tokens) {
                let slot = best.entry(entry.id.as_str()).or_insert((d, entry));
                if d < slot.0 {
                    *slot = (d, entry);
                }
            }
        }
        if best.len() == 1 {
            best.into_values().next().map(|(d, e)| (e, d))
        } else {
            None
        }
    }
}

/// Token-wise distance between a string and a rule pattern with the same
/// token count, or `None` if some token pair is not close enough.
fn fuzzy_distance(raw: &[&str], pattern: &[String]) -> Option<usize> {
    let mut total = 0;
    for (r, p) in raw.iter().zip(pattern) {
        if *r == p.as_str() {
            continue;
        }
        if p.chars().count() < FUZZY_MIN_TOKEN_LEN {
            return None;
        }
        let d = strsim::damerau_levenshtein(r, p);
        if d > FUZZY_MAX_TOKEN_DISTANCE {
            return None;
        }
        total += d;
    }
    Some(total)
}

#[derive(Debug, Clone)]
struct LabPattern {
    tokens: Vec<String>,
    pattern: String,
    dept: String,
}

/// A compiled, validated rule set. Immutable; resolution is pure.
#[derive(Debug, Clone)]
pub struct RuleSet {
    institutions: AliasTable,
    departments: AliasTable,
    labs: Vec<LabPattern>,
    exclusions: HashSet<String>,
    merges: BTreeMap<String, String>,
    rollups: BTreeMap<String, String>,
    fuzzy: bool,
    institution_ids: BTreeSet<String>,
    department_ids: BTreeSet<String>,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::compile(RulesFile::default()).expect("empty rules are valid")
    }
}

impl RuleSet {
    /// Parses and compiles a rules document. Whitespace-only input is an
    /// empty rule set.
    pub fn from_json(text: &str) -> Result<RuleSet> {
        if text.trim().is_empty() {
            return RuleSet::compile(RulesFile::default());
        }
        let file: RulesFile = serde_json::from_str(text)
            .map_err(|e| Error::Rules(format!("cannot parse rules: {e}")))?;
        RuleSet::compile(file)
    }

    pub fn compile(file: RulesFile) -> Result<RuleSet> {
        check_merges_acyclic(&file.merges)?;

        let mut institutions = AliasTable::default();
        for (id, aliases) in &file.institution_aliases {
            institutions.insert(id, id)?;
            for a in aliases {
                institutions.insert(a, id)?;
            }
        }
        institutions.finish();

        let mut dept_mentions: BTreeSet<&str> = BTreeSet::new();
        dept_mentions.extend(file.department_aliases.keys().map(String::as_str));
        dept_mentions.extend(
            file.merges
                .iter()
                .flat_map(|(a, b)| [a.as_str(), b.as_str()]),
        );
        dept_mentions.extend(file.lab_to_dept.values().map(String::as_str));
        dept_mentions.extend(
            file.school_rollups
                .iter()
                .flat_map(|(a, b)| [a.as_str(), b.as_str()]),
        );

        for (from, to) in &file.school_rollups {
            if file.merges.contains_key(from) {
                return Err(Error::Rules(format!(
                    "rollup source `{from}` is merged away"
                )));
            }
            if file.merges.contains_key(to) || file.school_rollups.contains_key(to) {
                return Err(Error::Rules(format!(
                    "rollup target `{to}` of `{from}` is not a canonical id"
                )));
            }
        }

        let mut departments = AliasTable::default();
        for id in &dept_mentions {
            departments.insert(id, id)?;
        }
        for (id, aliases) in &file.department_aliases {
            for a in aliases {
                departments.insert(a, id)?;
            }
        }
        departments.finish();

        let mut labs: Vec<LabPattern> = Vec::new();
        let mut lab_seen: HashMap<String, &str> = HashMap::new();
        for (raw, dept) in &file.lab_to_dept {
            let pattern = canonicalize_text(raw);
            if pattern.is_empty() {
                return Err(Error::Rules(format!(
                    "lab pattern `{raw}` is empty after normalization"
                )));
            }
            if let Some(owner) = departments.exact.get(&pattern).filter(|o| *o != dept) {
                return Err(Error::PatternConflict {
                    pattern,
                    first: owner.clone(),
                    second: dept.clone(),
                });
            }
            if let Some(prev) = lab_seen.insert(pattern.clone(), dept) {
                if prev != dept {
                    return Err(Error::PatternConflict {
                        pattern,
                        first: prev.to_string(),
                        second: dept.clone(),
                    });
                }
                continue;
            }
            labs.push(LabPattern {
                tokens: pattern.split(' ').map(str::to_string).collect(),
                pattern,
                dept: dept.clone(),
            });
        }
        // longest pattern wins
        labs.sort_by(|a, b| {
            b.tokens
                .len()
                .cmp(&a.tokens.len())
                .then_with(|| a.pattern.cmp(&b.pattern))
        });

        let mut exclusions = HashSet::new();
        for raw in &file.exclusions {
            let pattern = canonicalize_text(raw);
            if pattern.is_empty() {
                continue;
            }
            let owner = departments
                .exact
                .get(&pattern)
                .map(String::as_str)
                .or_else(|| lab_seen.get(&pattern).copied());
            if let Some(owner) = owner {
                return Err(Error::PatternConflict {
                    first: owner.to_string(),
                    pattern,
                    second: "<exclusion>".into(),
                });
            }
            exclusions.insert(pattern);
        }

        let mut rules = RuleSet {
            institutions,
            departments,
            labs,
            exclusions,
            merges: file.merges.clone(),
            rollups: file.school_rollups.clone(),
            fuzzy: file.fuzzy,
            institution_ids: file.institution_aliases.keys().cloned().collect(),
            department_ids: BTreeSet::new(),
        };
        rules.department_ids = dept_mentions
            .iter()
            .map(|id| {
                let mut trace = Vec::new();
                rules.finish_department(id.to_string(), &mut trace)
            })
            .collect();
        Ok(rules)
    }

    pub fn fuzzy_enabled(&self) -> bool {
        self.fuzzy
    }

    pub fn has_institution(&self, id: &str) -> bool {
        self.institution_ids.contains(id)
    }

    pub fn institution_ids(&self) -> &BTreeSet<String> {
        &self.institution_ids
    }

    /// Every id a department string can resolve to, in ascending order.
    pub fn department_ids(&self) -> &BTreeSet<String> {
        &self.department_ids
    }

    /// The normalized text form of an id; resolving it yields the id back.
    pub fn display_form(id: &str) -> String {
        canonicalize_text(id)
    }

    pub fn resolve_institution(&self, raw: &str) -> Resolution {
        let canonical = canonicalize_text(raw);
        if canonical.is_empty() {
            return Resolution::unmatched();
        }
        if let Some(id) = self.institutions.exact.get(&canonical) {
            return Resolution {
                outcome: Outcome::Resolved(id.clone()),
                trace: vec![RuleStep::Alias { pattern: canonical }],
            };
        }
        if self.fuzzy {
            if let Some((entry, distance)) = self.institutions.fuzzy(&canonical) {
                return Resolution {
                    outcome: Outcome::Resolved(entry.id.clone()),
                    trace: vec![RuleStep::Fuzzy {
                        pattern: entry.pattern.clone(),
                        distance,
                    }],
                };
            }
        }
        Resolution::unmatched()
    }

    pub fn resolve_department(&self, raw: &str) -> Resolution {
        let canonical = canonicalize_text(raw);
        if canonical.is_empty() {
            return Resolution::unmatched();
        }
        let mut trace = Vec::new();
        let matched = if let Some(id) = self.departments.exact.get(&canonical) {
            trace.push(RuleStep::Alias {
                pattern: canonical.clone(),
            });
            Some(id.clone())
        } else if let Some(lab) = self.match_lab(&canonical) {
            trace.push(RuleStep::Lab {
                pattern: lab.pattern.clone(),
            });
            Some(lab.dept.clone())
        } else if self.exclusions.contains(&canonical) {
            return Resolution {
                outcome: Outcome::Excluded,
                trace: vec![RuleStep::Exclusion { pattern: canonical }],
            };
        } else if self.fuzzy {
            self.departments.fuzzy(&canonical).map(|(entry, distance)| {
                trace.push(RuleStep::Fuzzy {
                    pattern: entry.pattern.clone(),
                    distance,
                });
                entry.id.clone()
            })
        } else {
            None
        };
        match matched {
            Some(id) => {
                let id = self.finish_department(id, &mut trace);
                Resolution {
                    outcome: Outcome::Resolved(id),
                    trace,
                }
            }
            None => Resolution::unmatched(),
        }
    }

    /// Longest lab pattern occurring as a contiguous token run. Patterns of
    /// equal length pointing at different departments cancel out.
    fn match_lab(&self, canonical: &str) -> Option<&LabPattern> {
        let tokens: Vec<&str> = canonical.split(' ').collect();
        let mut found: Option<&LabPattern> = None;
        for lab in &self.labs {
            if let Some(f) = found {
                if lab.tokens.len() < f.tokens.len() {
                    break;
                }
            }
            let n = lab.tokens.len();
            let hit = n <= tokens.len()
                && tokens
                    .windows(n)
                    .any(|w| w.iter().zip(&lab.tokens).all(|(a, b)| *a == b.as_str()));
            if hit {
                match found {
                    Some(f) if f.dept != lab.dept => return None,
                    Some(_) => {}
                    None => found = Some(lab),
                }
            }
        }
        found
    }

    fn finish_department(&self, mut id: String, trace: &mut Vec<RuleStep>) -> String {
        // acyclic by construction, so this terminates within |merges| hops
        while let Some(next) = self.merges.get(&id) {
            trace.push(RuleStep::Merge {
                from: id.clone(),
                to: next.clone(),
            });
            id = next.clone();
        }
        if let Some(school) = self.rollups.get(&id) {
            trace.push(RuleStep::Rollup {
                from: id.clone(),
                to: school.clone(),
            });
            id = school.clone();
        }
        id
    }
}

fn check_merges_acyclic(merges: &BTreeMap<String, String>) -> Result<()> {
    let mut done: HashSet<&str> = HashSet::new();
    for start in merges.keys() {
        let mut path: Vec<&str> = Vec::new();
        let mut on_path: HashMap<&str, usize> = HashMap::new();
        let mut cur = start.as_str();
        loop {
            if done.contains(cur) {
                break;
            }
            if let Some(&pos) = on_path.get(cur) {
                let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                let min = cycle
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                cycle.rotate_left(min);
                return Err(Error::MergeCycle(cycle));
            }
            on_path.insert(cur, path.len());
            path.push(cur);
            match merges.get(cur) {
                Some(next) => cur = next,
                None => break,
            }
        }
        done.extend(path);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules(json: &str) -> RuleSet {
        RuleSet::from_json(json).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize_text("  Dept.  of  BIOL "), "dept of biol");
        assert_eq!(canonicalize_text("Département"), "département");
        assert_eq!(
            canonicalize_text("Sch. of Med., Seattle"),
            "sch of med seattle"
        );
        assert_eq!(canonicalize_text("...!"), "");
        // compatibility forms fold to plain text
        assert_eq!(canonicalize_text("ＵＷ"), "uw");
    }

    #[test]
    fn empty_rules_resolve_nothing() {
        let r = rules("");
        assert_eq!(r.resolve_department("Dept Bio").outcome, Outcome::Unmatched);
        assert_eq!(
            r.resolve_institution("Univ Washington").outcome,
            Outcome::Unmatched
        );
        assert!(r.department_ids().is_empty());
    }

    #[test]
    fn alias_resolves_dept_bio() {
        let r = rules(
            r#"{"department_aliases":{"department-of-biology":["Dept Bio","Department of Biol","Biol Department"]}}"#,
        );
        for s in [
            "Dept Bio",
            "dept. bio",
            "Department of Biol",
            "BIOL DEPARTMENT",
        ] {
            let res = r.resolve_department(s);
            assert_eq!(
                res.outcome,
                Outcome::Resolved("department-of-biology".into()),
                "{s}"
            );
            assert!(!res.trace.is_empty());
        }
    }

    #[test]
    fn merged_department_reaches_target() {
        let r = rules(
            r#"{"department_aliases":{"department-of-biology":["Dept Bio"],
                "zoology":["Zoology Department"]},
                "merges":{"zoology":"department-of-biology"}}"#,
        );
        let res = r.resolve_department("Zoology Department");
        assert_eq!(
            res.outcome,
            Outcome::Resolved("department-of-biology".into())
        );
        assert_eq!(
            res.trace.last(),
            Some(&RuleStep::Merge {
                from: "zoology".into(),
                to: "department-of-biology".into()
            })
        );
        assert!(!r.department_ids().contains("zoology"));
    }

    #[test]
    fn merge_chain_takes_two_steps() {
        let r = rules(r#"{"merges":{"Zoology":"Biology","Biology":"LifeSciences"}}"#);
        let res = r.resolve_department("Zoology");
        assert_eq!(res.outcome, Outcome::Resolved("LifeSciences".into()));
        let merges = res
            .trace
            .iter()
            .filter(|s| matches!(s, RuleStep::Merge { .. }))
            .count();
        assert_eq!(merges, 2);
    }

    #[test]
    fn two_cycle_is_reported() {
        match RuleSet::from_json(r#"{"merges":{"A":"B","B":"A"}}"#) {
            Err(Error::MergeCycle(c)) => assert_eq!(c, ["A", "B"]),
            other => panic!("expected cycle, got {other:?}"),
        }
        match RuleSet::from_json(r#"{"merges":{"X":"Y","C":"D","D":"E","E":"C"}}"#) {
            Err(Error::MergeCycle(c)) => assert_eq!(c, ["C", "D", "E"]),
            other => panic!("expected cycle, got {other:?}"),
        }
        assert!(matches!(
            RuleSet::from_json(r#"{"merges":{"A":"A"}}"#),
            Err(Error::MergeCycle(_))
        ));
    }

    #[test]
    fn pattern_claimed_twice_is_rejected() {
        let err = RuleSet::from_json(r#"{"department_aliases":{"a":["Dept X"],"b":["dept. x"]}}"#)
            .unwrap_err();
        match err {
            Error::PatternConflict {
                pattern,
                first,
                second,
            } => {
                assert_eq!(pattern, "dept x");
                assert_eq!((first.as_str(), second.as_str()), ("a", "b"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(RuleSet::from_json(
            r#"{"department_aliases":{"a":["Lab Y"]},"lab_to_dept":{"Lab Y":"b"}}"#
        )
        .is_err());
        assert!(RuleSet::from_json(
            r#"{"department_aliases":{"a":["Dept"]},"exclusions":["dept"]}"#
        )
        .is_err());
    }

    #[test]
    fn school_rollup_applies_once() {
        let r = rules(
            r#"{"department_aliases":{"department-of-surgery":["Dept Surg"],"school-of-medicine":["Sch of Medicine","Sch Med"]},
                "school_rollups":{"department-of-surgery":"school-of-medicine"}}"#,
        );
        assert_eq!(
            r.resolve_department("Dept Surg").outcome,
            Outcome::Resolved("school-of-medicine".into())
        );
        assert_eq!(
            r.resolve_department("Sch of Medicine").outcome,
            Outcome::Resolved("school-of-medicine".into())
        );
        assert_eq!(
            r.department_ids().iter().collect::<Vec<_>>(),
            ["school-of-medicine"]
        );
    }

    #[test]
    fn rollup_target_must_be_canonical() {
        assert!(RuleSet::from_json(r#"{"school_rollups":{"a":"b","b":"c"}}"#).is_err());
        assert!(RuleSet::from_json(r#"{"school_rollups":{"a":"b"},"merges":{"b":"c"}}"#).is_err());
    }

    #[test]
    fn lab_maps_to_department() {
        let r = rules(
            r#"{"department_aliases":{"oceanography":["School of Oceanography"]},
                "lab_to_dept":{"Friday Harbor Labs":"oceanography","Applied Physics Lab":"physics"}}"#,
        );
        let res = r.resolve_department("Friday Harbor Labs, Friday Harbor");
        assert_eq!(res.outcome, Outcome::Resolved("oceanography".into()));
        assert!(matches!(res.trace[0], RuleStep::Lab { .. }));
        assert_eq!(
            r.resolve_department("Harbor Labs").outcome,
            Outcome::Unmatched
        );
    }

    #[test]
    fn exclusion_drops_ambiguous_strings() {
        let r = rules(
            r#"{"department_aliases":{"biology":["Dept Bio"]},"exclusions":["Dept", "Grad Sch"]}"#,
        );
        let res = r.resolve_department("DEPT.");
        assert_eq!(res.outcome, Outcome::Excluded);
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn institution_alias_and_fuzzy() {
        let strict = rules(
            r#"{"institution_aliases":{"uw":["University of Washington","Univ Washington"]}}"#,
        );
        assert_eq!(
            strict.resolve_institution("univ washington").outcome,
            Outcome::Resolved("uw".into())
        );
        assert_eq!(
            strict.resolve_institution("Universty of Washngton").outcome,
            Outcome::Unmatched
        );
        assert_eq!(
            strict.resolve_institution("MIT").outcome,
            Outcome::Unmatched
        );

        let fuzzy =
            rules(r#"{"institution_aliases":{"uw":["University of Washington"]},"fuzzy":true}"#);
        let res = fuzzy.resolve_institution("Universty of Washngton");
        assert_eq!(res.outcome, Outcome::Resolved("uw".into()));
        // one deletion in each long token
        assert_eq!(
            res.trace,
            vec![RuleStep::Fuzzy {
                pattern: "university of washington".into(),
                distance: 2
            }]
        );
    }

    #[test]
    fn fuzzy_ignores_short_tokens_and_ties() {
        let r = rules(
            r#"{"department_aliases":{"bio":["Dept Bio"],"chem":["Dept Chemistry"],"chen":["Dept Chemistre"]},"fuzzy":true}"#,
        );
        // short token "bio" must match exactly
        assert_eq!(r.resolve_department("Dept Bia").outcome, Outcome::Unmatched);
        // "chemistrx" is within 1 of both chemistry and chemistre: tie
        assert_eq!(
            r.resolve_department("Dept Chemistrx").outcome,
            Outcome::Unmatched
        );
        assert_eq!(
            r.resolve_department("Depp Chemistry").outcome,
            Outcome::Unmatched
        );
    }

    #[test]
    fn fuzzy_transposition_counts_once() {
        let r = rules(
            r#"{"department_aliases":{"oceanography":["School of Oceanography"]},"fuzzy":true}"#,
        );
        let res = r.resolve_department("School of Ocaenography");
        assert_eq!(res.outcome, Outcome::Resolved("oceanography".into()));
        assert!(matches!(res.trace[0], RuleStep::Fuzzy { distance: 1, .. }));
    }

    #[test]
    fn display_form_resolves_to_id() {
        let r = rules(
            r#"{"department_aliases":{"department-of-biology":["Dept Bio"]},
                "merges":{"zoology":"department-of-biology"},
                "school_rollups":{"music-theory":"school-of-music"}}"#,
        );
        for id in r.department_ids() {
            assert_eq!(
                r.resolve_department(&RuleSet::display_form(id)).outcome,
                Outcome::Resolved(id.clone())
            );
        }
    }

    #[test]
    fn trace_empty_iff_unmatched() {
        let r = rules(r#"{"department_aliases":{"bio":["Dept Bio"]},"exclusions":["Dept"]}"#);
        for s in ["Dept Bio", "Dept", "Nothing here", ""] {
            let res = r.resolve_department(s);
            assert_eq!(
                res.trace.is_empty(),
                res.outcome == Outcome::Unmatched,
                "{s}"
            );
        }
    }
}
