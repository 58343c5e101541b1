//! CART tree construction shared by the forest and the boosted ensemble.
//!
//! Rows are presorted once per feature; each node owns the same contiguous
//! range in every feature's sorted list, and a split stably partitions that
//! range. Any impure node above the depth cap takes its best candidate split,
//! even one with zero gain; ties go to the lowest feature and threshold.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::seed::Stream;

/// Impurity measured on weighted sums `(w, Σ w t, Σ w t²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Binary Gini on 0/1 targets, weighted by node weight.
    Gini,
    /// Sum of squared errors around the node mean.
    Sse,
}

impl Criterion {
    fn impurity(self, w: f64, s1: f64, s2: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => 2.0 * s1 * (w - s1) / w,
            Criterion::Sse => (s2 - s1 * s1 / w).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        weight: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Total impurity decrease achieved by this split.
        gain: f64,
        weight: f64,
        /// Features that were eligible at this split, when subsampled.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        candidates: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Depth of the deepest leaf; a lone root leaf has depth 0.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn splits(&self) -> impl Iterator<Item = &Node> {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
    }

    /// Per-feature sum of split gains.
    pub fn gains(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                out[*feature] += gain;
            }
        }
        out
    }
}

/// Column-major copy of the training matrix with per-feature sort orders.
pub struct Presorted {
    n: usize,
    d: usize,
    columns: Vec<f64>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut columns = vec![0.0; n * d];
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                columns[j * n + i] = *v;
            }
        }
        let order = (0..d)
            .map(|j| {
                let col = &columns[j * n..(j + 1) * n];
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Presorted {
            n,
            d,
            columns,
            order,
        }
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    fn value(&self, feature: usize, row: u32) -> f64 {
        self.columns[feature * self.n + row as usize]
    }
}

pub struct TreeSpec<'a> {
    pub criterion: Criterion,
    pub max_depth: usize,
    /// Features drawn per split; `None` tries all.
    pub max_features: Option<usize>,
    pub target: &'a [f64],
    pub weight: &'a [f64],
}

struct Builder<'a, F> {
    data: &'a Presorted,
    spec: &'a TreeSpec<'a>,
    leaf_value: F,
    lists: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    buffer: Vec<u32>,
    nodes: Vec<Node>,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Grows one tree. Rows with zero weight are left out; `leaf_value` maps the
/// rows reaching a leaf to its output.
pub fn build_tree<F>(
    data: &Presorted,
    spec: &TreeSpec<'_>,
    rng: Option<&mut Stream>,
    leaf_value: F,
) -> Tree
where
    F: Fn(&[u32]) -> f64,
{
    let lists: Vec<Vec<u32>> = data
        .order
        .iter()
        .map(|o| {
            o.iter()
                .copied()
                .filter(|&r| spec.weight[r as usize] > 0.0)
                .collect()
        })
        .collect();
    let active = lists.first().map_or(0, Vec::len);
    let mut b = Builder {
        data,
        spec,
        leaf_value,
        lists,
        goes_left: vec![false; data.n],
        buffer: Vec::with_capacity(active),
        nodes: Vec::new(),
    };
    let mut rng = rng;
    b.grow(0, active, 0, &mut rng);
    Tree { nodes: b.nodes }
}

impl<'a, F: Fn(&[u32]) -> f64> Builder<'a, F> {
    fn grow(&mut self, lo: usize, hi: usize, depth: usize, rng: &mut Option<&mut Stream>) -> usize {
        let id = self.nodes.len();
        let (w, s1, s2) = self.stats(&self.lists[0][lo..hi]);
        let parent = self.spec.criterion.impurity(w, s1, s2);
        self.nodes.push(Node::Leaf {
            value: 0.0,
            weight: w,
        });

        let mut best = None;
        let mut candidates = None;
        // Rounding can leave a constant-target node with a tiny positive SSE.
        let impure = parent > 1e-12 * s2.abs() && parent > 0.0;
        if depth < self.spec.max_depth && impure && hi - lo >= 2 {
            let features: Vec<usize> = match (self.spec.max_features, rng.as_mut()) {
                (Some(k), Some(r)) if k < self.data.d => {
                    let mut f = index::sample(&mut **r, self.data.d, k).into_vec();
                    f.sort_unstable();
                    candidates = Some(f.clone());
                    f
                }
                _ => (0..self.data.d).collect(),
            };
            best = self.best_split(lo, hi, &features, (w, s1, s2), parent);
        }

        match best {
            None => {
                let value = (self.leaf_value)(&self.lists[0][lo..hi]);
                self.nodes[id] = Node::Leaf { value, weight: w };
            }
            Some(best) => {
                let mid = self.partition(lo, hi, best.feature, best.threshold);
                let left = self.grow(lo, mid, depth + 1, rng);
                let right = self.grow(mid, hi, depth + 1, rng);
                self.nodes[id] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                    gain: best.gain,
                    weight: w,
                    candidates,
                };
            }
        }
        id
    }

    fn stats(&self, rows: &[u32]) -> (f64, f64, f64) {
        let (mut w, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &r in rows {
            let (wi, ti) = (self.spec.weight[r as usize], self.spec.target[r as usize]);
            w += wi;
            s1 += wi * ti;
            s2 += wi * ti * ti;
        }
        (w, s1, s2)
    }

    fn best_split(
        &self,
        lo: usize,
        hi: usize,
        features: &[usize],
        (w, s1, s2): (f64, f64, f64),
        parent: f64,
    ) -> Option<Best> {
        let crit = self.spec.criterion;
        let mut best: Option<Best> = None;
        for &f in features {
            let list = &self.lists[f][lo..hi];
            let (mut lw, mut ls1, mut ls2) = (0.0, 0.0, 0.0);
            for k in 0..list.len() - 1 {
                let r = list[k];
                let (wi, ti) = (self.spec.weight[r as usize], self.spec.target[r as usize]);
                lw += wi;
                ls1 += wi * ti;
                ls2 += wi * ti * ti;
                let (a, b) = (self.data.value(f, r), self.data.value(f, list[k + 1]));
                if a >= b {
                    continue;
                }
                let gain = parent
                    - crit.impurity(lw, ls1, ls2)
                    - crit.impurity(w - lw, s1 - ls1, s2 - ls2);
                if best.as_ref().is_none_or(|bst| gain > bst.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Best {
                        feature: f,
                        threshold,
                        gain: gain.max(0.0),
                    });
                }
            }
        }
        best
    }

    /// Stable partition of every feature list; returns the split point.
    fn partition(&mut self, lo: usize, hi: usize, feature: usize, threshold: f64) -> usize {
        for &r in &self.lists[feature][lo..hi] {
            self.goes_left[r as usize] = self.data.value(feature, r) <= threshold;
        }
        let mut mid = lo;
        for list in &mut self.lists {
            self.buffer.clear();
            let mut write = lo;
            for k in lo..hi {
                let r = list[k];
                if self.goes_left[r as usize] {
                    list[write] = r;
                    write += 1;
                } else {
                    self.buffer.push(r);
                }
            }
            list[write..hi].copy_from_slice(&self.buffer);
            mid = write;
        }
        mid
    }
}
