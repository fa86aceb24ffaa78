//! Discrete memoryless channels with a group as input alphabet.
//!
//! A [`Channel`] stores its transition law column by column: for every output
//! `y` the `q` numbers `W(y|x)` sit next to each other. Transforms, reduction
//! and capacity all walk outputs one at a time, so this layout keeps each
//! output's likelihood vector contiguous.
//!
//! Information quantities are in bits. Symmetric capacity is the mutual
//! information between a uniform input and the output.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CosetPartition, GroupSpec, Subgroup};
use crate::reduce::{reduce_columns, POSTERIOR_TOL};

/// Tolerance on row sums accepted on ingest.
pub const INGEST_ROW_TOL: f64 = 1e-9;

/// Tolerance on row sums maintained internally.
pub const ROW_TOL: f64 = 1e-12;

/// A channel `W: G -> Y` with a finite output alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    group: Arc<GroupSpec>,
    cols: Vec<f64>,
    label: String,
}

impl Channel {
    /// Validates a row-major matrix (`rows[x][y] = W(y|x)`) and builds a channel.
    ///
    /// Rows are renormalised to sum to one, and all-zero output columns are dropped.
    pub fn new(group: Arc<GroupSpec>, rows: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let q = group.order();
        if rows.len() != q {
            return Err(Error::InvalidChannel(format!("expected {q} rows, got {}", rows.len())));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::InvalidChannel("the output alphabet is empty".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some((y, v)) = row.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidChannel(format!("entry ({x}, {y}) = {v} is not a probability")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > INGEST_ROW_TOL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        let sums: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        let mut cols = Vec::with_capacity(q * m);
        for y in 0..m {
            if rows.iter().all(|r| r[y] == 0.0) {
                continue;
            }
            cols.extend((0..q).map(|x| rows[x][y] / sums[x]));
        }
        Ok(Channel { group, cols, label: label.into() })
    }

    /// Builds a channel from a column-major table without validation.
    pub(crate) fn from_columns(group: Arc<GroupSpec>, cols: Vec<f64>, label: impl Into<String>) -> Self {
        debug_assert_eq!(cols.len() % group.order(), 0);
        Channel { group, cols, label: label.into() }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Size of the group.
    pub fn num_inputs(&self) -> usize {
        self.group.order()
    }

    pub fn num_outputs(&self) -> usize {
        self.cols.len() / self.group.order()
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.cols[y * self.group.order() + x]
    }

    /// The likelihood vector `(W(y|x))_x` of output `y`.
    #[inline]
    pub fn column(&self, y: usize) -> &[f64] {
        let q = self.group.order();
        &self.cols[y * q..(y + 1) * q]
    }

    /// Row-major copy of the transition matrix.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_inputs())
            .map(|x| (0..self.num_outputs()).map(|y| self.prob(y, x)).collect())
            .collect()
    }

    /// Symmetric capacity `I(W)` in bits.
    pub fn symmetric_capacity(&self) -> f64 {
        let q = self.group.order();
        let identity = CosetPartition { coset_of: (0..q).collect(), num_cosets: q };
        partition_capacity(&self.cols, q, &identity)
    }

    /// `I(W[H]) = I(X mod H; Y)` in bits, without materialising the quotient channel.
    pub fn quotient_capacity(&self, cosets: &CosetPartition) -> f64 {
        partition_capacity(&self.cols, self.group.order(), cosets)
    }

    /// The channel `W[H]` from cosets of `h` to the same outputs.
    pub fn quotient_channel(&self, h: &Subgroup) -> Result<QuotientChannel> {
        self.group.check_subgroup(h)?;
        let q = self.group.order();
        let cosets = self.group.coset_partition(h);
        let k = cosets.num_cosets;
        let hs = h.order() as f64;
        let mut cols = vec![0.0; k * self.num_outputs()];
        for (y, col) in self.cols.chunks_exact(q).enumerate() {
            for (x, &v) in col.iter().enumerate() {
                cols[y * k + cosets.coset_of[x]] += v;
            }
            for v in &mut cols[y * k..(y + 1) * k] {
                *v /= hs;
            }
        }
        Ok(QuotientChannel { cosets, cols })
    }

    /// Merges outputs with equal posteriors and puts the outputs in canonical order.
    pub fn reduce(&self) -> Channel {
        Channel {
            group: self.group.clone(),
            cols: reduce_columns(&self.cols, self.group.order()),
            label: self.label.clone(),
        }
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_error(&self) -> f64 {
        let q = self.group.order();
        let mut sums = vec![0.0; q];
        for col in self.cols.chunks_exact(q) {
            for (s, v) in sums.iter_mut().zip(col) {
                *s += v;
            }
        }
        sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// The erasure parameter `eps` if this channel is equivalent to `qEC(eps)`.
    ///
    /// After reduction every output must either leave the input uniformly
    /// uncertain (an erasure) or pin it to a single element, and the
    /// non-erased mass must be the same for every input.
    pub fn erasure_equivalent(&self) -> Option<f64> {
        let r = self.reduce();
        let q = r.num_inputs();
        let uniform = 1.0 / q as f64;
        let mut eps_per_input = vec![0.0; q];
        let mut kept = vec![0.0; q];
        for col in r.cols.chunks_exact(q) {
            let s: f64 = col.iter().sum();
            let post: Vec<f64> = col.iter().map(|v| v / s).collect();
            if post.iter().all(|p| (p - uniform).abs() <= POSTERIOR_TOL) {
                for (e, v) in eps_per_input.iter_mut().zip(col) {
                    *e += v;
                }
            } else {
                let x = post.iter().position(|&p| p >= 1.0 - POSTERIOR_TOL)?;
                kept[x] += s;
            }
        }
        let eps = eps_per_input.iter().sum::<f64>() / q as f64;
        let consistent = eps_per_input
            .iter()
            .zip(&kept)
            .all(|(e, k)| (e - eps).abs() <= 1e-9 && (k - (1.0 - eps)).abs() <= 1e-9);
        consistent.then_some(eps.clamp(0.0, 1.0))
    }

    /// Serialisable form of this channel.
    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            orders: self.group.orders().to_vec(),
            num_outputs: self.num_outputs(),
            rows: self.rows(),
            label: self.label.clone(),
        }
    }

    /// Parses a channel from its JSON representation.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        file.into_channel()
    }

    /// JSON representation (pretty-printed, full precision).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("channel serialisation cannot fail")
    }
}

/// On-disk channel schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub orders: Vec<usize>,
    pub num_outputs: usize,
    pub rows: Vec<Vec<f64>>,
    pub label: String,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<Channel> {
        let group = Arc::new(GroupSpec::new(&self.orders)?);
        if let Some(r) = self.rows.iter().find(|r| r.len() != self.num_outputs) {
            return Err(Error::InvalidChannel(format!(
                "num_outputs is {} but a row has {} entries",
                self.num_outputs,
                r.len()
            )));
        }
        Channel::new(group, &self.rows, self.label)
    }
}

/// `W[H]`: the channel from `G/H` to the outputs of `W`, averaging over each coset.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientChannel {
    pub cosets: CosetPartition,
    cols: Vec<f64>,
}

impl QuotientChannel {
    pub fn num_inputs(&self) -> usize {
        self.cosets.num_cosets
    }

    pub fn num_outputs(&self) -> usize {
        self.cols.len() / self.cosets.num_cosets
    }

    /// `W[H](y|A)` where `A` is the coset with label `coset`.
    pub fn prob(&self, y: usize, coset: usize) -> f64 {
        self.cols[y * self.cosets.num_cosets + coset]
    }

    pub fn symmetric_capacity(&self) -> f64 {
        let k = self.cosets.num_cosets;
        let identity = CosetPartition { coset_of: (0..k).collect(), num_cosets: k };
        partition_capacity(&self.cols, k, &identity)
    }
}

/// `I(X mod H; Y)` for uniform `X`, computed from a column-major table over `q` inputs.
fn partition_capacity(cols: &[f64], q: usize, cosets: &CosetPartition) -> f64 {
    let k = cosets.num_cosets;
    if k == 1 {
        return 0.0;
    }
    let h = (q / k) as f64;
    let inv_k = 1.0 / k as f64;
    let mut merged = vec![0.0; k];
    let mut total = 0.0;
    for col in cols.chunks_exact(q) {
        merged.iter_mut().for_each(|v| *v = 0.0);
        for (x, &v) in col.iter().enumerate() {
            merged[cosets.coset_of[x]] += v;
        }
        let mut py = 0.0;
        for v in merged.iter_mut() {
            *v /= h;
            py += *v;
        }
        py *= inv_k;
        if py <= 0.0 {
            continue;
        }
        for &v in &merged {
            if v > 0.0 {
                total += inv_k * v * (v / py).ln();
            }
        }
    }
    (total / std::f64::consts::LN_2).clamp(0.0, (k as f64).log2())
}

/// The outcome of testing whether a channel is δ-determined by one subgroup.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminationReport {
    pub subgroup: Subgroup,
    pub delta: f64,
    pub capacity: f64,
    pub quotient_capacity: f64,
    pub gap_capacity: f64,
    pub gap_quotient: f64,
    pub determined: bool,
}

/// Checks whether `w` is δ-determined by `h`: both `|I(W) - log|G/H||` and
/// `|I(W[H]) - log|G/H||` must be below `delta`.
pub fn determination_check(w: &Channel, h: &Subgroup, delta: f64) -> Result<DeterminationReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    w.group().check_subgroup(h)?;
    let capacity = w.symmetric_capacity();
    let quotient_capacity = w.quotient_capacity(&w.group().coset_partition(h));
    let level = h.quotient_bits(w.group());
    let gap_capacity = (capacity - level).abs();
    let gap_quotient = (quotient_capacity - level).abs();
    Ok(DeterminationReport {
        subgroup: h.clone(),
        delta,
        capacity,
        quotient_capacity,
        gap_capacity,
        gap_quotient,
        determined: gap_capacity < delta && gap_quotient < delta,
    })
}

/// Result of [`Classifier::classify`].
///
/// `nearest` is the subgroup minimising the worse of the two gaps; the channel
/// is classified when that worse gap is below `delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub nearest: usize,
    pub capacity: f64,
    pub gap_capacity: f64,
    pub gap_quotient: f64,
    pub determined: bool,
    pub qualifying: usize,
}

impl Classification {
    /// Index of the determining subgroup, if any.
    pub fn subgroup(&self) -> Option<usize> {
        self.determined.then_some(self.nearest)
    }

    /// More than one subgroup determines the channel.
    pub fn ambiguous(&self) -> bool {
        self.qualifying > 1
    }
}

/// Cached subgroup lattice and coset partitions of one group, for repeated classification.
#[derive(Clone, Debug)]
pub struct Classifier {
    group: Arc<GroupSpec>,
    subgroups: Vec<Subgroup>,
    cosets: Vec<CosetPartition>,
    levels: Vec<f64>,
}

impl Classifier {
    pub fn new(group: Arc<GroupSpec>) -> Self {
        let subgroups = group.enumerate_subgroups();
        let cosets = subgroups.iter().map(|h| group.coset_partition(h)).collect();
        let levels = subgroups.iter().map(|h| h.quotient_bits(&group)).collect();
        Classifier { group, subgroups, cosets, levels }
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    /// Subgroups in canonical order; classification indices refer to this list.
    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    /// `log2 |G/H|` for each subgroup.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `I(W[H])` for every subgroup, in canonical order.
    pub fn quotient_capacities(&self, w: &Channel) -> Vec<f64> {
        self.cosets.iter().map(|c| w.quotient_capacity(c)).collect()
    }

    pub fn classify(&self, w: &Channel, delta: f64) -> Classification {
        debug_assert_eq!(w.group(), &*self.group);
        let cap = w.symmetric_capacity();
        let quotients = self.quotient_capacities(w);
        self.classify_capacities(cap, &quotients, delta)
    }

    /// Classification from precomputed `I(W)` and `I(W[H])` values.
    pub fn classify_capacities(&self, capacity: f64, quotients: &[f64], delta: f64) -> Classification {
        let mut best: Option<(usize, f64, f64)> = None;
        let mut qualifying = 0;
        for (i, (&level, &qc)) in self.levels.iter().zip(quotients).enumerate() {
            let gc = (capacity - level).abs();
            let gq = (qc - level).abs();
            let worst = gc.max(gq);
            if worst < delta {
                qualifying += 1;
            }
            if best.is_none_or(|(_, a, b)| worst < a.max(b)) {
                best = Some((i, gc, gq));
            }
        }
        let (nearest, gap_capacity, gap_quotient) = best.expect("a group has at least one subgroup");
        Classification {
            nearest,
            capacity,
            gap_capacity,
            gap_quotient,
            determined: gap_capacity.max(gap_quotient) < delta,
            qualifying,
        }
    }
}

/// Classifies `w` against every subgroup of its group.
pub fn classify(w: &Channel, delta: f64) -> Result<(Classification, Vec<Subgroup>)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let c = Classifier::new(w.group_arc().clone());
    let out = c.classify(w, delta);
    Ok((out, c.subgroups))
}
