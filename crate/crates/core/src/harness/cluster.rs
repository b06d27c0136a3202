//! Agglomerative clustering of a distance matrix into a Newick tree.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    Single,
    Average,
    Complete,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::InvalidArgument(format!("unknown linkage {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Labels of the two merged clusters, each a sorted member list.
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
    pub newick: String,
}

enum Tree {
    Leaf(usize),
    Node(Box<Tree>, Box<Tree>, f64),
}

struct Cluster {
    members: Vec<usize>,
    tree: Tree,
    height: f64,
    /// Smallest label among the members.
    key: String,
}

fn quote(label: &str) -> String {
    if label.chars().any(|c| " ()[]':;,\t\n".contains(c)) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

fn write_tree(tree: &Tree, parent: f64, labels: &[String], out: &mut String) {
    match tree {
        Tree::Leaf(i) => {
            let _ = write!(out, "{}:{:.6}", quote(&labels[*i]), parent);
        }
        Tree::Node(a, b, h) => {
            out.push('(');
            write_tree(a, *h, labels, out);
            out.push(',');
            write_tree(b, *h, labels, out);
            let _ = write!(out, "):{:.6}", parent - h);
        }
    }
}

/// Deterministic agglomerative clustering. Among equally close cluster pairs
/// the one with the lexicographically smallest pair of minimum labels merges
/// first. In the Newick output the child with the smaller minimum label comes
/// first, and each branch length is the difference of merge heights.
pub fn cluster(matrix: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = matrix.size();
    if n < 2 {
        return Err(Error::TooFewElements { needed: 2, got: n });
    }
    for i in 0..n {
        for j in 0..n {
            if matrix.get(i, j).is_nan() {
                return Err(Error::NanEntry(i, j));
            }
        }
    }
    if !matrix.is_symmetric() {
        return Err(Error::InvalidArgument("distance matrix is not symmetric".into()));
    }
    let labels = &matrix.labels;
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            members: vec![i],
            tree: Tree::Leaf(i),
            height: 0.0,
            key: labels[i].clone(),
        })
        .collect();
    let dist = |a: &Cluster, b: &Cluster| -> f64 {
        let pairs = a
            .members
            .iter()
            .flat_map(|&i| b.members.iter().map(move |&j| matrix.get(i, j)));
        match linkage {
            Linkage::Single => pairs.fold(f64::INFINITY, f64::min),
            Linkage::Complete => pairs.fold(f64::NEG_INFINITY, f64::max),
            Linkage::Average => pairs.sum::<f64>() / (a.members.len() * b.members.len()) as f64,
        }
    };
    let mut merges = Vec::with_capacity(n - 1);
    while clusters.len() > 1 {
        let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let d = dist(&clusters[i], &clusters[j]);
                let (ki, kj) = (clusters[i].key.as_str(), clusters[j].key.as_str());
                let key = if ki <= kj { (ki, kj) } else { (kj, ki) };
                let better = match &best {
                    None => true,
                    Some((bd, bk, _, _)) => d < *bd || (d == *bd && key < *bk),
                };
                if better {
                    best = Some((d, key, i, j));
                }
            }
        }
        let (d, _, i, j) = best.expect("at least two clusters");
        let b = clusters.remove(j);
        let a = clusters.remove(i);
        let (a, b) = if a.key <= b.key { (a, b) } else { (b, a) };
        let height = d.max(a.height).max(b.height);
        let names = |c: &Cluster| {
            let mut v: Vec<String> = c.members.iter().map(|&k| labels[k].clone()).collect();
            v.sort();
            v
        };
        merges.push(Merge {
            left: names(&a),
            right: names(&b),
            height,
        });
        let mut members = a.members;
        members.extend(b.members);
        clusters.push(Cluster {
            members,
            key: a.key,
            tree: Tree::Node(Box::new(a.tree), Box::new(b.tree), height),
            height,
        });
    }
    let root = clusters.pop().expect("one cluster left");
    let mut newick = String::new();
    match &root.tree {
        Tree::Node(a, b, h) => {
            newick.push('(');
            write_tree(a, *h, labels, &mut newick);
            newick.push(',');
            write_tree(b, *h, labels, &mut newick);
            newick.push_str(");");
        }
        Tree::Leaf(_) => unreachable!("n >= 2"),
    }
    Ok(Dendrogram {
        linkage,
        merges,
        newick,
    })
}
