//! Output-alphabet reduction.
//!
//! Two outputs whose columns are proportional carry the same posterior on the
//! input, so replacing them by one output with the summed column is an exact
//! equivalence (each channel is degraded from the other). [`reduce_columns`]
//! applies that merge, drops zero-probability outputs and sorts the result by
//! posterior, which makes the representation canonical.
//!
//! [`quantize_columns`] is the lossy counterpart used only on request: it keeps
//! merging the two closest neighbouring posteriors until a size target is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Absolute tolerance on posterior entries when deciding that two outputs coincide.
pub const POSTERIOR_TOL: f64 = 1e-9;

/// Columns below this total weight are treated as zero-probability outputs.
const ZERO_WEIGHT: f64 = 1e-300;

/// Merges proportional columns of a column-major `q x m` table.
///
/// `cols[y * q + x]` is `W(y|x)`. Returns the reduced table in canonical order.
pub fn reduce_columns(cols: &[f64], q: usize) -> Vec<f64> {
    let m = cols.len() / q;
    let mut post = Vec::with_capacity(cols.len());
    let mut live = Vec::with_capacity(m);
    for y in 0..m {
        let c = &cols[y * q..(y + 1) * q];
        let s: f64 = c.iter().sum();
        if s > ZERO_WEIGHT {
            live.push(y);
            post.extend(c.iter().map(|v| v / s));
        } else {
            post.extend(std::iter::repeat_n(0.0, q));
        }
    }

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    // The last posterior coordinate is implied by the others.
    cluster(&mut live, &post, q, 0, q.saturating_sub(1).max(1), POSTERIOR_TOL, &mut clusters);

    let mut merged: Vec<(Vec<f64>, Vec<f64>)> = clusters
        .into_iter()
        .map(|mut members| {
            members.sort_unstable();
            let mut col = vec![0.0; q];
            for &y in &members {
                for (acc, v) in col.iter_mut().zip(&cols[y * q..(y + 1) * q]) {
                    *acc += v;
                }
            }
            let s: f64 = col.iter().sum();
            let p: Vec<f64> = col.iter().map(|v| v / s).collect();
            (p, col)
        })
        .collect();
    merged.sort_by(|a, b| cmp_vec(&a.0, &b.0).then_with(|| cmp_vec(&a.1, &b.1)));
    merged.into_iter().flat_map(|(_, c)| c).collect()
}

/// Groups the rows of a row-major `n x dim` feature table that agree within `tol` on every coordinate.
pub(crate) fn cluster_features(feat: &[f64], dim: usize, tol: f64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..feat.len() / dim).collect();
    let mut out = Vec::new();
    cluster(&mut idx, feat, dim, 0, dim, tol, &mut out);
    out
}

/// Splits `idx` into groups of equal features, one coordinate at a time.
fn cluster(
    idx: &mut [usize],
    post: &[f64],
    q: usize,
    coord: usize,
    ncoords: usize,
    tol: f64,
    out: &mut Vec<Vec<usize>>,
) {
    if idx.is_empty() {
        return;
    }
    if coord == ncoords || idx.len() == 1 {
        out.push(idx.to_vec());
        return;
    }
    idx.sort_unstable_by(|&a, &b| {
        post[a * q + coord].total_cmp(&post[b * q + coord]).then(a.cmp(&b))
    });
    let mut start = 0;
    for i in 1..=idx.len() {
        let split = i == idx.len()
            || post[idx[i] * q + coord] - post[idx[i - 1] * q + coord] > tol;
        if split {
            cluster(&mut idx[start..i], post, q, coord + 1, ncoords, tol, out);
            start = i;
        }
    }
}

fn cmp_vec(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Collects raw output columns and compacts them whenever the buffer grows past a threshold.
pub(crate) struct ColumnAccumulator {
    q: usize,
    reduced: Vec<f64>,
    pending: Vec<f64>,
    threshold: usize,
}

impl ColumnAccumulator {
    pub(crate) fn new(q: usize) -> Self {
        ColumnAccumulator { q, reduced: Vec::new(), pending: Vec::new(), threshold: 1 << 16 }
    }

    pub(crate) fn push(&mut self, col: &[f64]) {
        self.pending.extend_from_slice(col);
        if self.pending.len() / self.q >= self.threshold {
            self.compact();
        }
    }

    fn compact(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let mut all = std::mem::take(&mut self.reduced);
        all.append(&mut self.pending);
        self.reduced = reduce_columns(&all, self.q);
        // Keep compaction amortised when the reduced set itself is large.
        self.threshold = self.threshold.max(self.reduced.len() / self.q);
    }

    pub(crate) fn finish(mut self) -> Vec<f64> {
        self.compact();
        self.reduced
    }
}

/// Greedily merges adjacent posteriors (in canonical order) until at most `target` columns remain.
///
/// Each step merges the neighbouring pair with the smallest L1 distance between
/// posteriors. The input must already be reduced.
pub fn quantize_columns(cols: &[f64], q: usize, target: usize) -> Vec<f64> {
    let m = cols.len() / q;
    let target = target.max(1);
    if m <= target {
        return cols.to_vec();
    }

    #[derive(PartialEq)]
    struct Cand {
        dist: f64,
        left: usize,
        right: usize,
    }
    impl Eq for Cand {}
    impl Ord for Cand {
        fn cmp(&self, other: &Self) -> Ordering {
            other.dist.total_cmp(&self.dist).then(other.left.cmp(&self.left))
        }
    }
    impl PartialOrd for Cand {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut col: Vec<Vec<f64>> = (0..m).map(|y| cols[y * q..(y + 1) * q].to_vec()).collect();
    let posterior = |c: &[f64]| -> Vec<f64> {
        let s: f64 = c.iter().sum();
        c.iter().map(|v| v / s).collect()
    };
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        let (pa, pb) = (posterior(a), posterior(b));
        pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum()
    };
    let mut prev: Vec<Option<usize>> = (0..m).map(|i| i.checked_sub(1)).collect();
    let mut next: Vec<Option<usize>> = (0..m).map(|i| Some(i + 1).filter(|&j| j < m)).collect();
    let mut alive = vec![true; m];
    let mut version = vec![0u32; m];
    let mut heap = BinaryHeap::new();
    let mut stamp: Vec<(u32, u32)> = Vec::new();
    for i in 0..m - 1 {
        heap.push((Cand { dist: dist(&col[i], &col[i + 1]), left: i, right: i + 1 }, stamp.len()));
        stamp.push((0, 0));
    }
    let mut count = m;
    while count > target {
        let Some((c, s)) = heap.pop() else { break };
        if !alive[c.left] || !alive[c.right] || next[c.left] != Some(c.right) {
            continue;
        }
        if stamp[s] != (version[c.left], version[c.right]) {
            continue;
        }
        let right = std::mem::take(&mut col[c.right]);
        for (a, b) in col[c.left].iter_mut().zip(&right) {
            *a += b;
        }
        alive[c.right] = false;
        version[c.left] += 1;
        next[c.left] = next[c.right];
        if let Some(n) = next[c.right] {
            prev[n] = Some(c.left);
        }
        count -= 1;
        if let Some(p) = prev[c.left] {
            heap.push((Cand { dist: dist(&col[p], &col[c.left]), left: p, right: c.left }, stamp.len()));
            stamp.push((version[p], version[c.left]));
        }
        if let Some(n) = next[c.left] {
            heap.push((Cand { dist: dist(&col[c.left], &col[n]), left: c.left, right: n }, stamp.len()));
            stamp.push((version[c.left], version[n]));
        }
    }
    let flat: Vec<f64> = (0..m).filter(|&i| alive[i]).flat_map(|i| col[i].clone()).collect();
    reduce_columns(&flat, q)
}
