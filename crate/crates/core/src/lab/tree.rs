use std::sync::Arc;

use crate::channel::{Channel, Classifier};
use crate::error::{Error, Result};
use crate::lab::report::{PolarizationReport, ReportBuilder};
use crate::transform::{annotate, step, Sign, TransformOptions};

/// Settings for a matrix-path polarization run.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeOptions {
    pub transform: TransformOptions,
    /// Keep every per-branch record instead of the first [`super::BRANCH_RECORD_CAP`].
    pub full: bool,
    /// Subtrees rooted above this depth are evaluated in parallel.
    pub parallel_depth: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { transform: TransformOptions::default(), full: false, parallel_depth: 6 }
    }
}

pub(crate) struct Leaf {
    pub(crate) capacity: f64,
    pub(crate) quotients: Vec<f64>,
}

pub(crate) struct Subtree {
    pub(crate) leaves: Vec<Leaf>,
    pub(crate) max_conservation_error: f64,
    pub(crate) max_alphabet: usize,
}

impl Subtree {
    fn join(mut self, other: Subtree) -> Subtree {
        self.leaves.extend(other.leaves);
        self.max_conservation_error = self.max_conservation_error.max(other.max_conservation_error);
        self.max_alphabet = self.max_alphabet.max(other.max_alphabet);
        self
    }
}

struct Walk<'a> {
    classifier: &'a Classifier,
    opts: &'a TreeOptions,
    depth: usize,
}

impl Walk<'_> {
    fn visit(&self, w: &Channel, capacity: f64, prefix: Vec<Sign>) -> Result<Subtree> {
        if prefix.len() == self.depth {
            return Ok(Subtree {
                leaves: vec![Leaf { capacity, quotients: self.classifier.quotient_capacities(w) }],
                max_conservation_error: 0.0,
                max_alphabet: w.num_outputs(),
            });
        }
        let child = |sign: Sign| -> Result<(Channel, f64, Vec<Sign>)> {
            let mut p = prefix.clone();
            p.push(sign);
            let (c, _) = step(w, sign, &self.opts.transform).map_err(|e| annotate(e, &p))?;
            let cap = c.symmetric_capacity();
            Ok((c, cap, p))
        };
        // The minus branch is always evaluated first; in parallel mode both
        // run together but results are still assembled minus-first.
        let (lo, hi) = if prefix.len() < self.opts.parallel_depth {
            let (a, b) = rayon::join(|| child(Sign::Minus), || child(Sign::Plus));
            (a?, b?)
        } else {
            let a = child(Sign::Minus)?;
            (a, child(Sign::Plus)?)
        };
        let conservation = (lo.1 + hi.1 - 2.0 * capacity).abs();
        let here = w.num_outputs();
        let (left, right) = if prefix.len() < self.opts.parallel_depth {
            let (l, r) = rayon::join(|| self.visit(&lo.0, lo.1, lo.2), || self.visit(&hi.0, hi.1, hi.2));
            (l?, r?)
        } else {
            let l = self.visit(&lo.0, lo.1, lo.2)?;
            drop(lo.0);
            (l, self.visit(&hi.0, hi.1, hi.2)?)
        };
        let mut out = left.join(right);
        out.max_conservation_error = out.max_conservation_error.max(conservation);
        out.max_alphabet = out.max_alphabet.max(here);
        Ok(out)
    }
}

/// Capacities of all `2^n` synthetic channels, in sequence order.
pub(crate) fn evaluate_tree(w: &Channel, n: usize, opts: &TreeOptions) -> Result<(Classifier, Subtree)> {
    let classifier = Classifier::new(Arc::clone(w.group_arc()));
    let walk = Walk { classifier: &classifier, opts, depth: n };
    let tree = walk.visit(w, w.symmetric_capacity(), Vec::new())?;
    Ok((classifier, tree))
}

/// Classifies all `2^n` synthetic channels of `w` at one δ.
pub fn polarize_tree(w: &Channel, n: usize, delta: f64, opts: &TreeOptions) -> Result<PolarizationReport> {
    polarize_tree_multi(w, n, &[delta], opts).map(|mut v| v.remove(0))
}

/// Like [`polarize_tree`] for several δ values, sharing the transform work.
pub fn polarize_tree_multi(
    w: &Channel,
    n: usize,
    deltas: &[f64],
    opts: &TreeOptions,
) -> Result<Vec<PolarizationReport>> {
    if n == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if n > opts.transform.max_depth || n >= 63 {
        return Err(Error::InvalidParameter(format!(
            "depth {n} exceeds the limit {}",
            opts.transform.max_depth
        )));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
    }
    let (classifier, tree) = evaluate_tree(w, n, opts)?;
    Ok(deltas
        .iter()
        .map(|&delta| {
            let mut b = ReportBuilder::new(classifier.subgroups().len(), opts.full);
            for (i, leaf) in tree.leaves.iter().enumerate() {
                let c = classifier.classify_capacities(leaf.capacity, &leaf.quotients, delta);
                b.add(i as u64, n, &c);
            }
            let mut r = b.finish(&classifier, w.label().to_string(), n, delta, opts.transform.is_approximate());
            r.max_conservation_error = Some(tree.max_conservation_error);
            r.max_alphabet = Some(tree.max_alphabet);
            r
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::zoo;

    fn g(orders: &[usize]) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::new(orders).unwrap())
    }

    #[test]
    fn homomorphism_fixed_point() {
        let grp = g(&[4]);
        let h = grp.subgroup_from_members(&[0, 2]).unwrap();
        let w = zoo::deterministic_homomorphism(grp, &h).unwrap();
        let r = polarize_tree(&w, 3, 0.01, &TreeOptions::default()).unwrap();
        assert_eq!(r.count_for(&[0, 2]), 8);
        assert_eq!(r.unclassified, 0);
        assert!(r.branches.iter().all(|b| b.gap_capacity == 0.0 && b.gap_quotient == 0.0));
    }

    #[test]
    fn counts_sum_and_order() {
        let w = zoo::qec(g(&[2]), 0.5).unwrap();
        let r = polarize_tree(&w, 4, 0.1, &TreeOptions::default()).unwrap();
        let total: u64 = r.subgroups.iter().map(|s| s.count).sum::<u64>() + r.unclassified;
        assert_eq!(total, 16);
        assert_eq!(r.branches.len(), 16);
        assert_eq!(r.branches[0].seq, "----");
        assert_eq!(r.branches[1].seq, "---+");
        assert!(r.max_conservation_error.unwrap() < 1e-12);
    }

    #[test]
    fn zero_depth_rejected() {
        let w = zoo::qec(g(&[2]), 0.5).unwrap();
        assert!(polarize_tree(&w, 0, 0.1, &TreeOptions::default()).is_err());
        assert!(polarize_tree(&w, 2, 0.0, &TreeOptions::default()).is_err());
    }

    #[test]
    fn blow_up_carries_prefix() {
        let w = zoo::qsc(g(&[2]), 0.11).unwrap();
        let mut opts = TreeOptions::default();
        opts.transform.max_alphabet = 20;
        match polarize_tree(&w, 6, 0.1, &opts) {
            Err(Error::AlphabetBlowUp { prefix: Some(p), .. }) => assert!(!p.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        let w = zoo::qsc(g(&[3]), 0.1).unwrap();
        let serial = TreeOptions { parallel_depth: 0, ..Default::default() };
        let par = TreeOptions { parallel_depth: 4, ..Default::default() };
        let a = polarize_tree(&w, 3, 0.1, &serial).unwrap();
        let b = polarize_tree(&w, 3, 0.1, &par).unwrap();
        assert_eq!(a, b);
    }
}
