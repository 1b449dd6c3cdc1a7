//! Agglomerative clustering with Ward linkage.
//!
//! Cluster labels follow the usual linkage-matrix convention: leaves are
//! `0..n` and the cluster created at step `k` is `n + k`. Leaves are
//! indexed in ascending id order, so the result does not depend on the
//! order in which points are supplied.
//!
//! Distances between clusters are kept squared and updated with the
//! Lance-Williams form of Ward's criterion:
//!
//! ```text
//! d(k, i∪j)² = ((nᵢ+nₖ)·d(k,i)² + (nⱼ+nₖ)·d(k,j)² − nₖ·d(i,j)²) / (nᵢ+nⱼ+nₖ)
//! ```
//!
//! starting from squared Euclidean distances. The reported merge distance
//! is the square root. Equal distances are broken by the smallest
//! `(a, b)` label pair.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Smaller cluster label.
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    /// Leaves under the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linkage {
    /// Leaf ids; leaf `i` is `ids[i]`. Ascending.
    pub ids: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Linkage {
    pub fn n_leaves(&self) -> usize {
        self.ids.len()
    }
}

pub fn ward_linkage(points: &[Vec<f64>], ids: &[String]) -> Result<Linkage> {
    if points.len() != ids.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points but {} ids",
            points.len(),
            ids.len()
        )));
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "Ward linkage needs at least two points".into(),
        ));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidArgument("points differ in dimension".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "points contain non-finite values".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    if let Some(w) = order.windows(2).find(|w| ids[w[0]] == ids[w[1]]) {
        return Err(Error::InvalidArgument(format!(
            "duplicate id `{}`",
            ids[w[0]]
        )));
    }
    let pts: Vec<&[f64]> = order.iter().map(|&i| points[i].as_slice()).collect();

    // slot i holds one active cluster
    let mut label: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![1; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut d2 = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = pts[i]
                .iter()
                .zip(pts[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            d2[i][j] = s;
            d2[j][i] = s;
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let key = (label[i].min(label[j]), label[i].max(label[j]));
                let better = match best {
                    None => true,
                    Some((d, k, _, _)) => d2[i][j] < d || (d2[i][j] == d && key < k),
                };
                if better {
                    best = Some((d2[i][j], key, i, j));
                }
            }
        }
        let (dij, (a, b), i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let v = ((ni + nk) * d2[k][i] + (nj + nk) * d2[k][j] - nk * dij) / (ni + nj + nk);
            d2[k][i] = v;
            d2[i][k] = v;
        }
        active[j] = false;
        size[i] += size[j];
        label[i] = n + step;
        merges.push(Merge {
            a,
            b,
            distance: dij.max(0.0).sqrt(),
            size: size[i],
        });
    }

    Ok(Linkage {
        ids: order.iter().map(|&i| ids[i].clone()).collect(),
        merges,
    })
}

/// Binary merge tree. Internal nodes carry the step that created them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(usize),
    Node {
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        step: usize,
    },
}

impl TreeNode {
    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                TreeNode::Leaf(i) => out.push(*i),
                TreeNode::Node { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Topological height: 0 for leaves, one more than the taller child.
    pub fn height(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Node { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    fn prune(self, keep: &dyn Fn(usize) -> bool) -> Option<TreeNode> {
        match self {
            TreeNode::Leaf(i) => keep(i).then_some(TreeNode::Leaf(i)),
            TreeNode::Node { left, right, step } => match (left.prune(keep), right.prune(keep)) {
                (Some(l), Some(r)) => Some(TreeNode::Node {
                    left: Box::new(l),
                    right: Box::new(r),
                    step,
                }),
                (Some(only), None) | (None, Some(only)) => Some(only),
                (None, None) => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dendrogram {
    pub ids: Vec<String>,
    pub root: TreeNode,
}

impl Dendrogram {
    /// Builds the tree; at every internal node the child with the smaller
    /// label (the leaf, or the earlier-created cluster) goes left.
    pub fn from_linkage(linkage: &Linkage) -> Result<Dendrogram> {
        let n = linkage.n_leaves();
        if n == 0 || linkage.merges.len() != n - 1 {
            return Err(Error::InvalidArgument(format!(
                "linkage with {n} leaves has {} merges",
                linkage.merges.len()
            )));
        }
        let mut nodes: Vec<Option<TreeNode>> = (0..n).map(|i| Some(TreeNode::Leaf(i))).collect();
        for (step, m) in linkage.merges.iter().enumerate() {
            let (lo, hi) = (m.a.min(m.b), m.a.max(m.b));
            let take = |nodes: &mut Vec<Option<TreeNode>>, label: usize| {
                nodes.get_mut(label).and_then(Option::take).ok_or_else(|| {
                    Error::InvalidArgument(format!("step {step} reuses or skips cluster {label}"))
                })
            };
            let left = take(&mut nodes, lo)?;
            let right = take(&mut nodes, hi)?;
            nodes.push(Some(TreeNode::Node {
                left: Box::new(left),
                right: Box::new(right),
                step,
            }));
        }
        let root = nodes.pop().flatten().expect("root exists");
        if nodes.iter().any(Option::is_some) {
            return Err(Error::InvalidArgument(
                "linkage leaves disconnected clusters".into(),
            ));
        }
        Ok(Dendrogram {
            ids: linkage.ids.clone(),
            root,
        })
    }

    pub fn leaf_order(&self) -> Vec<String> {
        self.root
            .leaves()
            .into_iter()
            .map(|i| self.ids[i].clone())
            .collect()
    }

    /// Drops leaves not in `keep`, splicing out nodes left with one child.
    pub fn prune(&self, keep: &BTreeSet<String>) -> Option<Dendrogram> {
        let keep_leaf = |i: usize| keep.contains(&self.ids[i]);
        self.root.clone().prune(&keep_leaf).map(|root| Dendrogram {
            ids: self.ids.clone(),
            root,
        })
    }
}

/// Deterministic in-order leaf sequence of `linkage`.
pub fn leaf_order(linkage: &Linkage) -> Result<Vec<String>> {
    Ok(Dendrogram::from_linkage(linkage)?.leaf_order())
}

/// Partition into `k` clusters by undoing the last `k - 1` merges. Members
/// are sorted, clusters ordered by their first member.
pub fn cut(linkage: &Linkage, k: usize) -> Result<Vec<Vec<String>>> {
    let n = linkage.n_leaves();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot cut {n} leaves into {k} clusters"
        )));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in linkage.merges.iter().take(n - k).enumerate() {
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = n + step;
        parent[rb] = n + step;
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<String>> = Default::default();
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        groups
            .entry(root)
            .or_default()
            .push(linkage.ids[leaf].clone());
    }
    let mut out: Vec<Vec<String>> = groups.into_values().collect();
    for g in &mut out {
        g.sort();
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i:02}")).collect()
    }

    #[test]
    fn two_points_one_merge() {
        let l = ward_linkage(&[vec![0.0, 0.0], vec![3.0, 4.0]], &ids(2)).unwrap();
        assert_eq!(
            l.merges,
            vec![Merge {
                a: 0,
                b: 1,
                distance: 5.0,
                size: 2
            }]
        );
        assert_eq!(leaf_order(&l).unwrap(), ids(2));
    }

    #[test]
    fn collinear_three_points() {
        let l = ward_linkage(&[vec![0.0], vec![1.0], vec![10.0]], &ids(3)).unwrap();
        assert_eq!((l.merges[0].a, l.merges[0].b), (0, 1));
        assert_eq!(l.merges[0].distance, 1.0);
        assert_eq!((l.merges[1].a, l.merges[1].b, l.merges[1].size), (2, 3, 3));
        let expected = ((2.0 * 100.0 + 2.0 * 81.0 - 1.0) / 3.0f64).sqrt();
        assert!((l.merges[1].distance - expected).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(ward_linkage(&[vec![1.0]], &ids(1)).is_err());
        assert!(ward_linkage(&[vec![1.0], vec![f64::NAN]], &ids(2)).is_err());
        assert!(ward_linkage(&[vec![1.0], vec![1.0, 2.0]], &ids(2)).is_err());
        let dup = vec!["x".to_string(), "x".to_string()];
        assert!(ward_linkage(&[vec![1.0], vec![2.0]], &dup).is_err());
    }

    #[test]
    fn ties_break_on_smallest_labels() {
        // four corners of a unit square: every side ties
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let l = ward_linkage(&pts, &ids(4)).unwrap();
        assert_eq!((l.merges[0].a, l.merges[0].b), (0, 1));
        assert_eq!((l.merges[1].a, l.merges[1].b), (2, 3));
        assert_eq!((l.merges[2].a, l.merges[2].b), (4, 5));
    }

    #[test]
    fn hand_built_four_leaf_order() {
        // (p03 + p01) first, then p00 joins p02, then both clusters
        let l = Linkage {
            ids: ids(4),
            merges: vec![
                Merge {
                    a: 1,
                    b: 3,
                    distance: 1.0,
                    size: 2,
                },
                Merge {
                    a: 0,
                    b: 2,
                    distance: 2.0,
                    size: 2,
                },
                Merge {
                    a: 4,
                    b: 5,
                    distance: 3.0,
                    size: 4,
                },
            ],
        };
        assert_eq!(leaf_order(&l).unwrap(), ["p01", "p03", "p00", "p02"]);
        let l2 = Linkage {
            ids: ids(4),
            merges: vec![
                Merge {
                    a: 2,
                    b: 3,
                    distance: 1.0,
                    size: 2,
                },
                Merge {
                    a: 1,
                    b: 4,
                    distance: 2.0,
                    size: 3,
                },
                Merge {
                    a: 0,
                    b: 5,
                    distance: 3.0,
                    size: 4,
                },
            ],
        };
        assert_eq!(leaf_order(&l2).unwrap(), ["p00", "p01", "p02", "p03"]);
    }

    #[test]
    fn order_independent_of_input_permutation() {
        let pts = vec![
            vec![0.0, 1.0],
            vec![5.0, 2.0],
            vec![0.5, 1.2],
            vec![4.0, 2.5],
            vec![9.0, 9.0],
        ];
        let names = ids(5);
        let base = ward_linkage(&pts, &names).unwrap();
        let perm = [3, 0, 4, 2, 1];
        let pp: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let pn: Vec<String> = perm.iter().map(|&i| names[i].clone()).collect();
        let other = ward_linkage(&pp, &pn).unwrap();
        assert_eq!(base, other);
    }

    #[test]
    fn cut_extremes_and_range() {
        let pts = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.2], vec![10.0]];
        let l = ward_linkage(&pts, &ids(5)).unwrap();
        assert_eq!(cut(&l, 5).unwrap().len(), 5);
        assert_eq!(cut(&l, 1).unwrap(), vec![ids(5)]);
        assert_eq!(
            cut(&l, 3).unwrap(),
            vec![vec!["p00", "p01"], vec!["p02", "p03"], vec!["p04"]]
        );
        assert!(cut(&l, 0).is_err());
        assert!(cut(&l, 6).is_err());
    }

    #[test]
    fn merges_telescope() {
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![(i * i) as f64, (i % 3) as f64])
            .collect();
        let l = ward_linkage(&pts, &ids(7)).unwrap();
        assert_eq!(l.merges.len(), 6);
        assert_eq!(l.merges.last().unwrap().size, 7);
        let mut sizes = vec![1usize; 7];
        for m in &l.merges {
            let s = sizes[m.a] + sizes[m.b];
            assert_eq!(s, m.size);
            sizes.push(s);
        }
    }

    #[test]
    fn prune_splices_single_children() {
        let l = ward_linkage(&[vec![0.0], vec![1.0], vec![10.0]], &ids(3)).unwrap();
        let d = Dendrogram::from_linkage(&l).unwrap();
        let keep: BTreeSet<String> = ["p00".to_string(), "p02".to_string()].into();
        let p = d.prune(&keep).unwrap();
        assert_eq!(p.leaf_order(), ["p02", "p00"]);
        assert_eq!(p.root.height(), 1);
        assert!(d.prune(&BTreeSet::new()).is_none());
    }
}
