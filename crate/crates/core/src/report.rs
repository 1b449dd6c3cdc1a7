//! CSV tables and the dendrogram-ordered SVG heatmap.
//!
//! Reals are written with six decimals and `.` as separator; undefined
//! values are empty cells. Nothing here reads the clock or the locale.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use crate::citegraph::{
    group_counts, summarize, trimmed_distribution, CitationGraph, GroupKey, GroupStats, Grouping,
    Summary,
};
use crate::classify::{CollabLabels, Dimension, ExclusionReason, Label};
use crate::cluster::{Dendrogram, Linkage, TreeNode};
use crate::comatrix::CoMatrix;
use crate::corpus::Corpus;
use crate::{Error, Result};

/// Six-decimal fixed notation; negative zero prints as zero.
pub fn real(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn pct(count: usize, basis: usize) -> String {
    if basis == 0 {
        String::new()
    } else {
        real(100.0 * count as f64 / basis as f64)
    }
}

/// Exclusion reasons that can occur in each dimension.
fn reasons(dim: Dimension) -> &'static [ExclusionReason] {
    use ExclusionReason::*;
    match dim {
        Dimension::Authorship => &[NoAuthors],
        Dimension::Institutional => &[
            NoAuthors,
            MissingAffiliations,
            SingleAuthorMultiInst,
            NoHomeInstitution,
        ],
        Dimension::Departmental => &[NoAuthors, NoDeptAffiliations],
    }
}

/// One row of the paper-count table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub dimension: &'static str,
    pub group: String,
    pub count: usize,
    /// Group the percentage is taken over, or `None` for the total row.
    pub basis: Option<(String, usize)>,
}

/// Paper counts by label. For the institutional and departmental
/// dimensions, multi/single percentages are over papers with usable
/// affiliations, everything else over all papers.
pub fn group_count_rows(labels: &[CollabLabels]) -> Vec<CountRow> {
    let total = labels.len();
    let mut rows = vec![CountRow {
        dimension: "all",
        group: "all".into(),
        count: total,
        basis: None,
    }];
    for dim in Dimension::ALL {
        let mut counts: HashMap<Label, usize> = HashMap::new();
        for l in labels {
            *counts.entry(l.label(dim)).or_default() += 1;
        }
        let get = |l: Label| counts.get(&l).copied().unwrap_or(0);
        let multi = get(Label::Multi);
        let single = get(Label::Single);
        let all_basis = Some(("all".to_string(), total));
        let mut push = |group: String, count: usize, basis: Option<(String, usize)>| {
            rows.push(CountRow {
                dimension: dim.name(),
                group,
                count,
                basis,
            })
        };
        if dim == Dimension::Authorship {
            push(Label::Multi.name(dim), multi, all_basis.clone());
            push(Label::Single.name(dim), single, all_basis.clone());
        } else {
            let usable = multi + single;
            push("with-affiliations".into(), usable, all_basis.clone());
            let subset = Some(("with-affiliations".to_string(), usable));
            push(Label::Multi.name(dim), multi, subset.clone());
            push(Label::Single.name(dim), single, subset);
            push(
                "without-affiliations".into(),
                total - usable,
                all_basis.clone(),
            );
        }
        for &r in reasons(dim) {
            push(
                Label::Excluded(r).group(dim),
                get(Label::Excluded(r)),
                all_basis.clone(),
            );
        }
    }
    rows
}

/// `table1.csv`: `dimension,group,count,pct,basis`. Header only when there
/// are no papers.
pub fn write_group_count_table<W: Write>(labels: &[CollabLabels], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dimension", "group", "count", "pct", "basis"])?;
    if !labels.is_empty() {
        for row in group_count_rows(labels) {
            let (pct_cell, basis) = match &row.basis {
                Some((name, n)) => (pct(row.count, *n), name.clone()),
                None => (String::new(), String::new()),
            };
            w.write_record([
                row.dimension.to_string(),
                row.group,
                row.count.to_string(),
                pct_cell,
                basis,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `timeseries.csv`: per year and dimension, the count and within-year
/// percentage of multi, single and excluded papers.
pub fn write_timeseries<W: Write>(labels: &[CollabLabels], corpus: &Corpus, out: W) -> Result<()> {
    let by_id: HashMap<&str, &CollabLabels> =
        labels.iter().map(|l| (l.paper_id.as_str(), l)).collect();
    // year -> dim -> [multi, single, excluded]
    let mut table: BTreeMap<i32, [[usize; 3]; 3]> = BTreeMap::new();
    for p in corpus.papers() {
        let l = by_id
            .get(p.id.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("no labels for paper `{}`", p.id)))?;
        let slot = table.entry(p.year).or_default();
        for (d, dim) in Dimension::ALL.into_iter().enumerate() {
            let k = match l.label(dim) {
                Label::Multi => 0,
                Label::Single => 1,
                Label::Excluded(_) => 2,
            };
            slot[d][k] += 1;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["year", "dimension", "label", "count", "pct"])?;
    for (year, dims) in &table {
        for (d, dim) in Dimension::ALL.into_iter().enumerate() {
            let total: usize = dims[d].iter().sum();
            let names = [
                Label::Multi.name(dim),
                Label::Single.name(dim),
                "excluded".to_string(),
            ];
            for (k, name) in names.into_iter().enumerate() {
                w.write_record([
                    year.to_string(),
                    dim.name().to_string(),
                    name,
                    dims[d][k].to_string(),
                    pct(dims[d][k], total),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// All partition statistics: the all-papers row and one row per label per
/// dimension, overall and per year.
pub fn all_group_stats(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
) -> Result<Vec<GroupStats>> {
    let mut out = Vec::new();
    let groupings =
        std::iter::once(Grouping::All).chain(Dimension::ALL.into_iter().map(Grouping::By));
    for g in groupings {
        out.extend(crate::citegraph::group_stats(
            corpus, labels, graph, g, false,
        )?);
        out.extend(crate::citegraph::group_stats(
            corpus, labels, graph, g, true,
        )?);
    }
    Ok(out)
}

/// `stats.csv`: `dimension,group,year,n,median,mean,pct_cited`.
pub fn write_stats_csv<W: Write>(stats: &[GroupStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dimension",
        "group",
        "year",
        "n",
        "median",
        "mean",
        "pct_cited",
    ])?;
    for s in stats {
        w.write_record([
            s.dimension.clone(),
            s.group.clone(),
            s.year.map_or_else(|| "ALL".to_string(), |y| y.to_string()),
            s.summary.n.to_string(),
            opt_real(s.summary.median),
            opt_real(s.summary.mean),
            opt_real(s.summary.pct_cited),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `violin.csv`: per dimension, group and year, the citation counts between
/// the 10th and 90th nearest-rank percentiles.
pub fn write_violin_csv<W: Write>(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dimension", "group", "year", "value"])?;
    for dim in Dimension::ALL {
        let g = Grouping::By(dim);
        for ((key, year), counts) in group_counts(corpus, labels, graph, g, true)? {
            if counts.is_empty() {
                continue;
            }
            let year = year.map(|y| y.to_string()).unwrap_or_default();
            for v in trimmed_distribution(&counts, 10, 90)? {
                w.write_record([
                    dim.name().to_string(),
                    key.name(g),
                    year.clone(),
                    v.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of the citation-metrics table: all papers, then per dimension the
/// collaborative and non-collaborative groups, with and without usable
/// affiliations.
pub fn citation_table_rows(
    corpus: &Corpus,
    labels: &[CollabLabels],
    graph: &CitationGraph,
) -> Result<Vec<(String, Summary)>> {
    let mut rows = Vec::new();
    let all = group_counts(corpus, labels, graph, Grouping::All, false)?;
    let all_counts: Vec<usize> = all.into_values().flatten().collect();
    rows.push(("all".to_string(), summarize(&all_counts)));
    for dim in Dimension::ALL {
        let g = Grouping::By(dim);
        let buckets = group_counts(corpus, labels, graph, g, false)?;
        let pick = |f: &dyn Fn(GroupKey) -> bool| -> Vec<usize> {
            buckets
                .iter()
                .filter(|((k, _), _)| f(*k))
                .flat_map(|(_, v)| v.iter().copied())
                .collect()
        };
        let multi = pick(&|k| k == GroupKey::Label(Label::Multi));
        let single = pick(&|k| k == GroupKey::Label(Label::Single));
        let excluded = pick(&|k| k.reason().is_some());
        if dim == Dimension::Authorship {
            rows.push((Label::Multi.name(dim), summarize(&multi)));
            rows.push((Label::Single.name(dim), summarize(&single)));
        } else {
            let short = if dim == Dimension::Institutional {
                "inst"
            } else {
                "dept"
            };
            let usable: Vec<usize> = multi.iter().chain(&single).copied().collect();
            rows.push((format!("with-{short}-affiliations"), summarize(&usable)));
            rows.push((Label::Multi.name(dim), summarize(&multi)));
            rows.push((Label::Single.name(dim), summarize(&single)));
            rows.push((
                format!("without-{short}-affiliations"),
                summarize(&excluded),
            ));
        }
    }
    Ok(rows)
}

/// `table2.csv`: `group,n,median,mean,pct_cited`.
pub fn write_citation_table<W: Write>(rows: &[(String, Summary)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "n", "median", "mean", "pct_cited"])?;
    for (group, s) in rows {
        w.write_record([
            group.clone(),
            s.n.to_string(),
            opt_real(s.median),
            opt_real(s.mean),
            opt_real(s.pct_cited),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_square<W: Write>(
    ids: &[String],
    cell: impl Fn(usize, usize) -> String,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["department".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header)?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..ids.len()).map(|j| cell(i, j)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_counts<W: Write>(m: &CoMatrix, out: W) -> Result<()> {
    write_square(&m.ids, |i, j| m.counts[i][j].to_string(), out)
}

pub fn write_matrix_normalized<W: Write>(m: &CoMatrix, out: W) -> Result<()> {
    write_square(&m.ids, |i, j| real(m.normalized[i][j]), out)
}

/// `linkage.csv`: `step,a,b,distance,size`.
pub fn write_linkage_csv<W: Write>(linkage: &Linkage, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "a", "b", "distance", "size"])?;
    for (step, m) in linkage.merges.iter().enumerate() {
        w.write_record([
            step.to_string(),
            m.a.to_string(),
            m.b.to_string(),
            real(m.distance),
            m.size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One id per line.
pub fn write_lines<W: Write>(ids: &[String], mut out: W) -> Result<()> {
    for id in ids {
        writeln!(out, "{id}")?;
    }
    Ok(())
}

/// Per department, the papers it shares with at least one other
/// department.
pub fn coauthored_paper_counts(labels: &[CollabLabels]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for l in labels {
        let depts = l.departments();
        if depts.len() >= 2 {
            for d in depts {
                *out.entry(d.to_string()).or_default() += 1;
            }
        }
    }
    out
}

/// Matrix and labels for the heatmap. `values` is indexed like `ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSpec {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Papers co-authored with another department, per id.
    pub annotations: BTreeMap<String, usize>,
}

impl HeatmapSpec {
    /// Uses the row-normalized view of a co-authorship matrix.
    pub fn from_comatrix(m: &CoMatrix, annotations: BTreeMap<String, usize>) -> HeatmapSpec {
        HeatmapSpec {
            ids: m.ids.clone(),
            values: m.normalized.clone(),
            annotations,
        }
    }
}

/// White at zero to this color at the maximum.
pub const RAMP_HIGH: (u8, u8, u8) = (0x08, 0x30, 0x6b);

/// Linear ramp from white (`t = 0`) to [`RAMP_HIGH`] (`t = 1`).
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let ch = |hi: u8| (255.0 + (hi as f64 - 255.0) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(RAMP_HIGH.0),
        ch(RAMP_HIGH.1),
        ch(RAMP_HIGH.2)
    )
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const CELL: f64 = 14.0;
const MARGIN: f64 = 10.0;
const DENDRO_WIDTH: f64 = 120.0;
const CHAR_WIDTH: f64 = 6.0;

fn coord(x: f64) -> String {
    format!("{x:.2}")
}

/// Draws `node` and returns its anchor point.
fn draw_tree(
    node: &TreeNode,
    pos: &HashMap<usize, usize>,
    x_leaf: f64,
    step: f64,
    top: f64,
    out: &mut String,
) -> (f64, f64) {
    match node {
        TreeNode::Leaf(i) => (x_leaf, top + pos[i] as f64 * CELL + CELL / 2.0),
        TreeNode::Node { left, right, .. } => {
            let (lx, ly) = draw_tree(left, pos, x_leaf, step, top, out);
            let (rx, ry) = draw_tree(right, pos, x_leaf, step, top, out);
            let x = x_leaf - node.height() as f64 * step;
            let _ = writeln!(
                out,
                r#"<path d="M{} {} H{} V{} H{}"/>"#,
                coord(lx),
                coord(ly),
                coord(x),
                coord(ry),
                coord(rx)
            );
            (x, (ly + ry) / 2.0)
        }
    }
}

/// Renders the heatmap with rows and columns in dendrogram leaf order, the
/// dendrogram along the left edge (topology only, uniform level spacing),
/// the diagonal forced to zero and each row labelled with its
/// co-authored-paper count.
pub fn render_heatmap(spec: &HeatmapSpec, dendrogram: &Dendrogram) -> Result<String> {
    let order = dendrogram.leaf_order();
    let have: BTreeSet<&String> = spec.ids.iter().collect();
    let want: BTreeSet<&String> = order.iter().collect();
    if have != want || spec.ids.len() != order.len() {
        return Err(Error::IdMismatch {
            missing: want.difference(&have).map(|s| s.to_string()).collect(),
            unexpected: have.difference(&want).map(|s| s.to_string()).collect(),
        });
    }
    let index: HashMap<&str, usize> = spec
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let perm: Vec<usize> = order.iter().map(|id| index[id.as_str()]).collect();
    let n = order.len();
    let value = |r: usize, c: usize| {
        if r == c {
            0.0
        } else {
            spec.values[perm[r]][perm[c]]
        }
    };
    let max = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| value(r, c))
        .fold(0.0f64, f64::max);

    let labels: Vec<String> = order
        .iter()
        .map(|id| {
            format!(
                "{} ({})",
                id,
                spec.annotations.get(id).copied().unwrap_or(0)
            )
        })
        .collect();
    let label_w =
        labels.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64 * CHAR_WIDTH + 8.0;
    let col_label_h =
        order.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64 * CHAR_WIDTH + 8.0;
    let grid_x = MARGIN + DENDRO_WIDTH;
    let grid_y = MARGIN;
    let grid = n as f64 * CELL;
    let width = grid_x + grid + label_w + MARGIN;
    let height = grid_y + grid + col_label_h + MARGIN;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="10">"#,
        w = coord(width),
        h = coord(height)
    );
    let _ = writeln!(
        svg,
        "<metadata>color ramp: linear #ffffff at 0 to {} at {}; diagonal zeroed; rows normalized by row sums</metadata>",
        ramp_color(1.0),
        real(max)
    );

    let pos: HashMap<usize, usize> = dendrogram
        .root
        .leaves()
        .into_iter()
        .enumerate()
        .map(|(p, leaf)| (leaf, p))
        .collect();
    let levels = dendrogram.root.height().max(1) as f64;
    let _ = writeln!(
        svg,
        r##"<g class="dendrogram" fill="none" stroke="#333333" stroke-width="1">"##
    );
    draw_tree(
        &dendrogram.root,
        &pos,
        grid_x - 2.0,
        (DENDRO_WIDTH - 4.0) / levels,
        grid_y,
        &mut svg,
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="cells" stroke="none">"#);
    for r in 0..n {
        for c in 0..n {
            let v = value(r, c);
            let t = if max > 0.0 { v / max } else { 0.0 };
            let _ = writeln!(
                svg,
                r#"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{}" data-row="{}" data-col="{}" data-value="{}"/>"#,
                coord(grid_x + c as f64 * CELL),
                coord(grid_y + r as f64 * CELL),
                coord(CELL),
                coord(CELL),
                ramp_color(t),
                xml_escape(&order[r]),
                xml_escape(&order[c]),
                real(v)
            );
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="row-labels">"#);
    for (r, label) in labels.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="row-label" data-id="{}" x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
            xml_escape(&order[r]),
            coord(grid_x + grid + 4.0),
            coord(grid_y + r as f64 * CELL + CELL / 2.0),
            xml_escape(label)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="col-labels">"#);
    for (c, id) in order.iter().enumerate() {
        let x = grid_x + c as f64 * CELL + CELL / 2.0;
        let y = grid_y + grid + 4.0;
        let _ = writeln!(
            svg,
            r#"<text class="col-label" data-id="{}" x="{}" y="{}" transform="rotate(90 {} {})" dominant-baseline="middle">{}</text>"#,
            xml_escape(id),
            coord(x),
            coord(y),
            coord(x),
            coord(y),
            xml_escape(id)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}
