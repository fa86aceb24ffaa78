use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{Channel, Classifier};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::transform::{annotate, step, Sign, SignSequence, TransformOptions};
use crate::zoo;

/// Classification fractions of all synthetic channels at one depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub depth: usize,
    /// Determined by `{0}`.
    pub perfect: f64,
    /// Determined by `G`.
    pub useless: f64,
    /// Determined by a proper non-trivial subgroup.
    pub intermediate: f64,
    pub unclassified: f64,
    pub max_alphabet: usize,
}

/// Depth-by-depth fractions for `qSC(eps)` over a cyclic group. No convergence claim is made.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendTable {
    pub orders: Vec<usize>,
    pub eps: f64,
    pub delta: f64,
    pub approximate: bool,
    pub rows: Vec<TrendRow>,
    /// Set when the exact computation stopped early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
}

impl TrendTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,perfect,useless,intermediate,unclassified,max_alphabet\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.depth, r.perfect, r.useless, r.intermediate, r.unclassified, r.max_alphabet
            ));
        }
        out
    }
}

/// Tracks how `qSC(eps)` over `Z_q` splits between perfect, useless and intermediate levels as depth grows.
///
/// Alphabet blow-up ends the table early (recorded in `stopped`) rather than failing it.
pub fn open_problem_trend(
    group: Arc<GroupSpec>,
    eps: f64,
    n_max: usize,
    delta: f64,
    opts: &TransformOptions,
) -> Result<TrendTable> {
    let q = group.order();
    if !group.is_cyclic() || (2..q).all(|d| !q.is_multiple_of(d)) {
        return Err(Error::Precondition(format!("{group} is not cyclic of composite order")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let classifier = Classifier::new(group.clone());
    let w = zoo::qsc(group, eps)?;
    let mut level: Vec<(Channel, SignSequence)> = vec![(w, SignSequence::default())];
    let mut rows = Vec::new();
    let mut stopped = None;
    for depth in 1..=n_max {
        let next: Result<Vec<Vec<(Channel, SignSequence)>>> = level
            .par_iter()
            .map(|(c, s)| {
                [Sign::Minus, Sign::Plus]
                    .into_iter()
                    .map(|sign| {
                        let mut seq = s.clone();
                        seq.push(sign);
                        step(c, sign, opts).map(|(o, _)| (o, seq.clone())).map_err(|e| annotate(e, &seq.0))
                    })
                    .collect()
            })
            .collect();
        match next {
            Ok(v) => level = v.into_iter().flatten().collect(),
            Err(e @ Error::AlphabetBlowUp { .. }) => {
                stopped = Some(format!("stopped before depth {depth}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
        let classes: Vec<Option<usize>> =
            level.par_iter().map(|(c, _)| classifier.classify(c, delta).subgroup()).collect();
        let total = level.len() as f64;
        let count = |pred: &dyn Fn(usize) -> bool| {
            classes.iter().filter(|c| c.is_some_and(pred)).count() as f64 / total
        };
        let order = |h: usize| classifier.subgroups()[h].order();
        rows.push(TrendRow {
            depth,
            perfect: count(&|h| order(h) == 1),
            useless: count(&|h| order(h) == q),
            intermediate: count(&|h| order(h) != 1 && order(h) != q),
            unclassified: classes.iter().filter(|c| c.is_none()).count() as f64 / total,
            max_alphabet: level.iter().map(|(c, _)| c.num_outputs()).max().unwrap_or(0),
        });
    }
    Ok(TrendTable { orders: classifier.group().orders().to_vec(), eps, delta, approximate: opts.is_approximate(), rows, stopped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(orders: &[usize]) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::new(orders).unwrap())
    }

    #[test]
    fn noiseless_has_no_intermediate_levels() {
        let t = open_problem_trend(g(&[4]), 0.0, 5, 0.1, &TransformOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert!(t.rows.iter().all(|r| r.intermediate == 0.0 && r.perfect == 1.0));
    }

    #[test]
    fn requires_composite_cyclic() {
        assert!(open_problem_trend(g(&[5]), 0.1, 2, 0.1, &TransformOptions::default()).is_err());
        assert!(open_problem_trend(g(&[2, 2]), 0.1, 2, 0.1, &TransformOptions::default()).is_err());
    }

    #[test]
    fn stops_cleanly_on_blow_up() {
        let opts = TransformOptions { max_alphabet: 200, ..Default::default() };
        let t = open_problem_trend(g(&[4]), 0.15, 10, 0.1, &opts).unwrap();
        assert!(t.stopped.is_some());
        assert!(t.rows.len() < 10);
        for r in &t.rows {
            assert!((r.perfect + r.useless + r.intermediate + r.unclassified - 1.0).abs() < 1e-12);
        }
    }
}
