//! Exact k-nearest-neighbour distances, by brute force or a kd-tree.
//!
//! Both routes use the same distance kernel and report the mean of the `k`
//! smallest distances summed in ascending order, so they return bit-identical
//! results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::matrix::SampleMatrix;

/// Above this many points the kd-tree replaces the brute-force scan.
pub const BRUTE_FORCE_LIMIT: usize = 20_000;
/// Beyond this dimension the tree prunes too little to beat the scan.
pub const TREE_MAX_DIMS: usize = 16;
const LEAF_SIZE: usize = 16;

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let mut rest = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let t = x - y;
        rest += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}

fn mean_of_smallest(mut squared: Vec<f64>, k: usize) -> f64 {
    if k < squared.len() {
        squared.select_nth_unstable_by(k - 1, f64::total_cmp);
        squared.truncate(k);
    }
    squared.sort_unstable_by(f64::total_cmp);
    squared.iter().map(|d| d.sqrt()).sum::<f64>() / squared.len() as f64
}

/// Mean distance from every row to its `k` nearest other rows.
///
/// `k` is capped at `n - 1`; with a single row the result is `[0.0]`.
pub fn mean_knn_distances(points: &SampleMatrix, k: usize) -> Vec<f64> {
    if points.nrows() <= BRUTE_FORCE_LIMIT || points.ncols() > TREE_MAX_DIMS {
        mean_knn_distances_brute(points, k)
    } else {
        mean_knn_distances_tree(points, k)
    }
}

pub fn mean_knn_distances_brute(points: &SampleMatrix, k: usize) -> Vec<f64> {
    let n = points.nrows();
    let k = k.min(n.saturating_sub(1));
    if k == 0 {
        return vec![0.0; n];
    }
    let mut buf = Vec::with_capacity(n);
    (0..n)
        .map(|i| {
            buf.clear();
            let xi = points.row(i);
            buf.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| squared_distance(xi, points.row(j))),
            );
            mean_of_smallest(std::mem::take(&mut buf), k)
        })
        .collect()
}

struct Node {
    start: usize,
    end: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    children: Option<(usize, usize)>,
}

impl Node {
    /// Squared distance from `q` to the node's bounding box.
    fn box_distance(&self, q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((&x, &lo), &hi) in q.iter().zip(&self.lower).zip(&self.upper) {
            let t = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            acc += t * t;
        }
        acc
    }
}

/// kd-tree with bounding boxes over the rows of a matrix.
pub struct KdTree<'a> {
    points: &'a SampleMatrix,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(PartialEq)]
struct Candidate(f64);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a SampleMatrix) -> Self {
        let mut tree = Self {
            points,
            order: (0..points.nrows()).collect(),
            nodes: Vec::new(),
        };
        if points.nrows() > 0 {
            tree.build(0, points.nrows());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let d = self.points.ncols();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (j, &x) in self.points.row(i).iter().enumerate() {
                lower[j] = lower[j].min(x);
                upper[j] = upper[j].max(x);
            }
        }
        // split on the widest side, lowest index on ties
        let mut split = 0;
        for j in 1..d {
            if upper[j] - lower[j] > upper[split] - lower[split] {
                split = j;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            lower,
            upper,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let mid = start + (end - start) / 2;
            let points = self.points;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                points
                    .get(a, split)
                    .total_cmp(&points.get(b, split))
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    /// Squared distances from row `query` to its `k` nearest other rows.
    pub fn knn_squared(&self, query: usize, k: usize) -> Vec<f64> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            let q = self.points.row(query);
            self.search(0, self.nodes[0].box_distance(q), query, q, k, &mut heap);
        }
        heap.into_iter().map(|c| c.0).collect()
    }

    fn search(
        &self,
        node: usize,
        bound: f64,
        query: usize,
        q: &[f64],
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        // slack keeps rounding in the box bound from pruning an exact tie
        if heap.len() == k && bound > heap.peek().unwrap().0 * (1.0 + 1e-12) {
            return;
        }
        let n = &self.nodes[node];
        match n.children {
            None => {
                for &i in &self.order[n.start..n.end] {
                    if i == query {
                        continue;
                    }
                    let d = squared_distance(q, self.points.row(i));
                    if heap.len() < k {
                        heap.push(Candidate(d));
                    } else if d < heap.peek().unwrap().0 {
                        heap.pop();
                        heap.push(Candidate(d));
                    }
                }
            }
            Some((l, r)) => {
                let dl = self.nodes[l].box_distance(q);
                let dr = self.nodes[r].box_distance(q);
                if dl <= dr {
                    self.search(l, dl, query, q, k, heap);
                    self.search(r, dr, query, q, k, heap);
                } else {
                    self.search(r, dr, query, q, k, heap);
                    self.search(l, dl, query, q, k, heap);
                }
            }
        }
    }
}

pub fn mean_knn_distances_tree(points: &SampleMatrix, k: usize) -> Vec<f64> {
    let n = points.nrows();
    let k = k.min(n.saturating_sub(1));
    if k == 0 {
        return vec![0.0; n];
    }
    let tree = KdTree::new(points);
    (0..n)
        .map(|i| mean_of_smallest(tree.knn_squared(i, k), k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Frame;
    use crate::numerics::RngStream;

    fn cloud(n: usize, d: usize, seed: u64) -> SampleMatrix {
        let mut rng = RngStream::new(seed);
        let data = (0..n * d).map(|_| rng.uniform()).collect();
        SampleMatrix::from_vec(n, d, data, Frame::Unit).unwrap()
    }

    #[test]
    fn tree_matches_brute_force_exactly() {
        for &(n, d, k) in &[
            (500, 2, 8),
            (700, 5, 3),
            (300, 20, 8),
            (64, 3, 63),
            (100, 1, 1),
        ] {
            let pts = cloud(n, d, n as u64 + d as u64);
            assert_eq!(
                mean_knn_distances_brute(&pts, k),
                mean_knn_distances_tree(&pts, k)
            );
        }
    }

    #[test]
    fn duplicates_have_zero_distance() {
        let mut rows = vec![vec![0.2, 0.2]; 10];
        rows.push(vec![0.9, 0.9]);
        let pts = SampleMatrix::from_rows(&rows, Frame::Unit).unwrap();
        let brute = mean_knn_distances_brute(&pts, 3);
        assert_eq!(brute[0], 0.0);
        assert!(brute[10] > 0.9);
        assert_eq!(brute, mean_knn_distances_tree(&pts, 3));
    }

    #[test]
    fn tiny_inputs() {
        let one = SampleMatrix::from_rows(&[vec![0.5]], Frame::Unit).unwrap();
        assert_eq!(mean_knn_distances(&one, 8), vec![0.0]);
        let two = SampleMatrix::from_rows(&[vec![0.0], vec![0.5]], Frame::Unit).unwrap();
        assert_eq!(mean_knn_distances(&two, 8), vec![0.5, 0.5]);
    }
}
