use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{Classification, Classifier};
use crate::transform::SignSequence;

/// Per-branch records kept unless a full listing is requested.
pub const BRANCH_RECORD_CAP: usize = 1 << 12;

/// How many leaves one subgroup determines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgroupCount {
    pub id: usize,
    pub order: usize,
    pub members: Vec<usize>,
    pub count: u64,
    pub fraction: f64,
}

/// One synthetic channel of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchRecord {
    pub seq: String,
    pub capacity: f64,
    /// Id of the determining subgroup, `None` when unclassified.
    pub class: Option<usize>,
    pub gap_capacity: f64,
    pub gap_quotient: f64,
}

/// Classification histogram over all `2^n` synthetic channels at one δ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationReport {
    pub orders: Vec<usize>,
    pub channel: String,
    pub depth: usize,
    pub delta: f64,
    pub approximate: bool,
    pub subgroups: Vec<SubgroupCount>,
    pub unclassified: u64,
    pub unclassified_fraction: f64,
    pub ambiguous: u64,
    /// Largest `|I(W-) + I(W+) - 2 I(W)|` over the tree (matrix path only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_conservation_error: Option<f64>,
    /// Largest reduced output alphabet met in the tree (matrix path only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_alphabet: Option<usize>,
    pub branches: Vec<BranchRecord>,
    pub branches_truncated: bool,
}

impl PolarizationReport {
    pub fn total(&self) -> u64 {
        1u64 << self.depth
    }

    /// Count for the subgroup with the given member list, if present.
    pub fn count_for(&self, members: &[usize]) -> u64 {
        self.subgroups.iter().find(|s| s.members == members).map_or(0, |s| s.count)
    }

    /// Subgroups that determine at least one leaf.
    pub fn classes_present(&self) -> Vec<&SubgroupCount> {
        self.subgroups.iter().filter(|s| s.count > 0).collect()
    }

    /// Fraction of leaves determined by some subgroup.
    pub fn classified_fraction(&self) -> f64 {
        1.0 - self.unclassified_fraction
    }

    /// `seq,I_bits,class,gapI,gapIH` with one line per recorded branch.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seq,I_bits,class,gapI,gapIH\n");
        for b in &self.branches {
            let class = b.class.map_or_else(|| "none".to_string(), |c| c.to_string());
            let _ = writeln!(out, "{},{},{},{},{}", b.seq, b.capacity, class, b.gap_capacity, b.gap_quotient);
        }
        out
    }
}

/// Accumulates leaf classifications in sequence order.
pub(crate) struct ReportBuilder {
    counts: Vec<u64>,
    unclassified: u64,
    ambiguous: u64,
    branches: Vec<BranchRecord>,
    record_cap: usize,
    truncated: bool,
}

impl ReportBuilder {
    pub(crate) fn new(num_subgroups: usize, full: bool) -> Self {
        ReportBuilder {
            counts: vec![0; num_subgroups],
            unclassified: 0,
            ambiguous: 0,
            branches: Vec::new(),
            record_cap: if full { usize::MAX } else { BRANCH_RECORD_CAP },
            truncated: false,
        }
    }

    pub(crate) fn add(&mut self, index: u64, depth: usize, c: &Classification) {
        match c.subgroup() {
            Some(h) => self.counts[h] += 1,
            None => self.unclassified += 1,
        }
        if c.ambiguous() {
            self.ambiguous += 1;
        }
        if self.branches.len() < self.record_cap {
            self.branches.push(BranchRecord {
                seq: SignSequence::from_index(index, depth).to_string(),
                capacity: c.capacity,
                class: c.subgroup(),
                gap_capacity: c.gap_capacity,
                gap_quotient: c.gap_quotient,
            });
        } else {
            self.truncated = true;
        }
    }

    /// Appends a builder covering the leaves that follow this one's.
    pub(crate) fn append(&mut self, other: ReportBuilder) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.unclassified += other.unclassified;
        self.ambiguous += other.ambiguous;
        self.truncated |= other.truncated;
        for b in other.branches {
            if self.branches.len() < self.record_cap {
                self.branches.push(b);
            } else {
                self.truncated = true;
            }
        }
    }

    pub(crate) fn finish(
        self,
        classifier: &Classifier,
        channel: String,
        depth: usize,
        delta: f64,
        approximate: bool,
    ) -> PolarizationReport {
        let total = (1u64 << depth) as f64;
        let subgroups = classifier
            .subgroups()
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(id, (h, &count))| SubgroupCount {
                id,
                order: h.order(),
                members: h.members().to_vec(),
                count,
                fraction: count as f64 / total,
            })
            .collect();
        PolarizationReport {
            orders: classifier.group().orders().to_vec(),
            channel,
            depth,
            delta,
            approximate,
            subgroups,
            unclassified: self.unclassified,
            unclassified_fraction: self.unclassified as f64 / total,
            ambiguous: self.ambiguous,
            max_conservation_error: None,
            max_alphabet: None,
            branches: self.branches,
            branches_truncated: self.truncated,
        }
    }
}
