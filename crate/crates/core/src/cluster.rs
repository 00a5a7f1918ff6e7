//! Hierarchical agglomerative clustering over a precomputed distance matrix.
//!
//! Distances between merged clusters are maintained with the Lance–Williams
//! update formulas. The main loop keeps, for every active cluster, its nearest
//! neighbour among the clusters with a larger slot index, and a priority queue
//! over those row minima. Rows whose cached minimum became stale are refreshed
//! lazily when they reach the top of the queue; rows whose minimum decreased
//! are refreshed eagerly.
//!
//! Each cluster is identified by the smallest instance index it contains (its
//! slot). Among pairs at equal distance, the pair with the smallest
//! `(min slot, max slot)` is merged first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Ward,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Euclidean, Metric::Manhattan, Metric::Cosine];

    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        if x == y {
            return 0.0;
        }
        match self {
            Metric::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Cosine => {
                let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nx == 0.0 || ny == 0.0 {
                    return 1.0;
                }
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                // rounding can push the cosine slightly outside [-1, 1]
                (1.0 - dot / (nx * ny)).max(0.0)
            }
        }
    }
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Ward,
    ];
}

macro_rules! name_enum {
    ($ty:ident { $($variant:ident => $name:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name),* })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)*
                    other => Err(Error::config(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

name_enum!(Metric { Euclidean => "euclidean", Manhattan => "manhattan", Cosine => "cosine" });
name_enum!(Linkage { Single => "single", Complete => "complete", Average => "average", Ward => "ward" });

/// Symmetric pairwise distances, stored as the condensed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    metric: Metric,
    condensed: Vec<f64>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.condensed[condensed_index(self.n, i, j)],
            Ordering::Greater => self.condensed[condensed_index(self.n, j, i)],
        }
    }
}

/// All pairwise distances between rows.
pub fn pairwise_distances(rows: &[Vec<f64>], metric: Metric) -> Result<DistanceMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::data("cannot cluster zero instances"));
    }
    let dim = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::data(format!(
                "row {i} has length {}, expected {dim}",
                r.len()
            )));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::data(format!("row {i} contains a non-finite value")));
        }
    }
    let row_distances = |i: usize| -> Vec<f64> {
        (i + 1..n)
            .map(|j| metric.distance(&rows[i], &rows[j]))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row_distances).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = (0..n).map(row_distances).collect();

    let condensed: Vec<f64> = parts.into_iter().flatten().collect();
    if let Some(bad) = condensed.iter().find(|d| !d.is_finite()) {
        return Err(Error::data(format!("distance overflowed to {bad}")));
    }
    Ok(DistanceMatrix {
        n,
        metric,
        condensed,
    })
}

/// One agglomeration step. `left`/`right` use the scipy numbering: ids below
/// `n` are instances, id `n + t` is the cluster created by merge `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
    /// Smallest and largest instance slot merged at each step.
    slots: Vec<(usize, usize)>,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Indices of merges whose height is lower than the previous merge's.
    pub fn inversions(&self) -> Vec<usize> {
        self.merges
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].height < w[0].height)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Flat clustering with `k` clusters, labels dense in first-appearance order.
    pub fn cut(&self, k: usize) -> Result<Clustering> {
        if k == 0 || k > self.n {
            return Err(Error::config(format!(
                "cluster count {k} must be between 1 and {}",
                self.n
            )));
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.slots[..self.n - k] {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            parent[ra.max(rb)] = ra.min(rb);
        }
        let assignment = (0..self.n).map(|i| find(&mut parent, i)).collect();
        Ok(relabel_dense(&Clustering { assignment }))
    }

    /// TSV dump: `merge_index  left  right  height  size`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("merge_index\tleft\tright\theight\tsize\n");
        for (i, m) in self.merges.iter().enumerate() {
            out.push_str(&format!(
                "{i}\t{}\t{}\t{}\t{}\n",
                m.left, m.right, m.height, m.size
            ));
        }
        out
    }
}

/// Cluster label per instance, index-aligned with the clustered rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub assignment: Vec<usize>,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        let mut labels = self.assignment.clone();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }
}

/// Renumbers labels to `0..k` in order of first appearance.
pub fn relabel_dense(clustering: &Clustering) -> Clustering {
    let mut map = std::collections::HashMap::new();
    let assignment = clustering
        .assignment
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    Clustering { assignment }
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    row: usize,
    version: u64,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed: BinaryHeap is a max-heap, we want the smallest (dist, row)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.row.cmp(&self.row))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Working {
    n: usize,
    d: Vec<f64>,
    active: Vec<bool>,
    nn: Vec<usize>,
    mindist: Vec<f64>,
    version: Vec<u64>,
    heap: BinaryHeap<Candidate>,
}

impl Working {
    fn dist(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.d[condensed_index(self.n, i, j)]
        } else {
            self.d[condensed_index(self.n, j, i)]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = if i < j {
            condensed_index(self.n, i, j)
        } else {
            condensed_index(self.n, j, i)
        };
        self.d[idx] = v;
    }

    fn push(&mut self, row: usize) {
        self.version[row] += 1;
        if self.mindist[row].is_finite() {
            self.heap.push(Candidate {
                dist: self.mindist[row],
                row,
                version: self.version[row],
            });
        }
    }

    /// Recomputes the nearest larger-slot neighbour of `row`.
    fn refresh(&mut self, row: usize) {
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for j in row + 1..self.n {
            if self.active[j] {
                let d = self.d[condensed_index(self.n, row, j)];
                if d < best {
                    best = d;
                    arg = j;
                }
            }
        }
        self.mindist[row] = best;
        self.nn[row] = arg;
        self.push(row);
    }

    fn row_is_current(&self, row: usize) -> bool {
        let j = self.nn[row];
        j != usize::MAX && self.active[j] && self.dist(row, j) == self.mindist[row]
    }
}

/// Runs the full agglomeration and cuts the result at `k` clusters.
///
/// Ward linkage requires a euclidean distance matrix; it works on squared
/// distances internally and reports heights as their square roots.
pub fn agglomerate(
    dist: &DistanceMatrix,
    linkage: Linkage,
    k: usize,
) -> Result<(Dendrogram, Clustering)> {
    if linkage == Linkage::Ward && dist.metric != Metric::Euclidean {
        return Err(Error::config(format!(
            "ward requires euclidean affinity, got {}",
            dist.metric
        )));
    }
    let n = dist.n;
    if k == 0 || k > n {
        return Err(Error::config(format!(
            "cluster count {k} must be between 1 and {n}"
        )));
    }
    let dendrogram = build_dendrogram(dist, linkage);
    let clustering = dendrogram.cut(k)?;
    Ok((dendrogram, clustering))
}

fn build_dendrogram(dist: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dist.n;
    let mut d = dist.condensed.clone();
    if linkage == Linkage::Ward {
        d.iter_mut().for_each(|x| *x *= *x);
    }
    let mut w = Working {
        n,
        d,
        active: vec![true; n],
        nn: vec![usize::MAX; n],
        mindist: vec![f64::INFINITY; n],
        version: vec![0; n],
        heap: BinaryHeap::with_capacity(n),
    };
    for row in 0..n {
        w.refresh(row);
    }

    let mut size = vec![1usize; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut slots = Vec::with_capacity(n.saturating_sub(1));

    while merges.len() + 1 < n {
        let Some(top) = w.heap.pop() else {
            unreachable!("active clusters remain but the queue is empty")
        };
        let a = top.row;
        if !w.active[a] || top.version != w.version[a] {
            continue;
        }
        if !w.row_is_current(a) {
            w.refresh(a);
            continue;
        }
        let b = w.nn[a];
        let dab = w.mindist[a];
        let (na, nb) = (size[a] as f64, size[b] as f64);

        let height = if linkage == Linkage::Ward { dab.sqrt() } else { dab };
        let (left, right) = {
            let (x, y) = (node_id[a], node_id[b]);
            (x.min(y), x.max(y))
        };
        merges.push(Merge {
            left,
            right,
            height,
            id: n + merges.len(),
            size: size[a] + size[b],
        });
        slots.push((a, b));

        w.active[b] = false;
        w.version[b] += 1;
        for (x, &sx) in size.iter().enumerate() {
            if !w.active[x] || x == a {
                continue;
            }
            let dax = w.dist(a, x);
            let dbx = w.dist(b, x);
            let nx = sx as f64;
            let new = match linkage {
                Linkage::Single => dax.min(dbx),
                Linkage::Complete => dax.max(dbx),
                Linkage::Average => (na * dax + nb * dbx) / (na + nb),
                Linkage::Ward => {
                    ((na + nx) * dax + (nb + nx) * dbx - nx * dab) / (na + nb + nx)
                }
            };
            w.set(a, x, new);
        }
        size[a] += size[b];
        node_id[a] = n + merges.len() - 1;

        // rows before `a` see a changed entry at column `a`
        for x in 0..a {
            if !w.active[x] {
                continue;
            }
            let dxa = w.dist(x, a);
            if dxa < w.mindist[x] || (dxa == w.mindist[x] && a < w.nn[x]) {
                w.mindist[x] = dxa;
                w.nn[x] = a;
                w.push(x);
            }
            // rows pointing at `a` or `b` with a larger value are fixed lazily
        }
        w.refresh(a);
    }

    Dendrogram { n, merges, slots }
}
