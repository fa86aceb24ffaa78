use std::sync::Arc;

use rayon::prelude::*;

use crate::channel::Classifier;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::lab::report::{PolarizationReport, ReportBuilder};
use crate::transform::{erasure_step, Sign};

/// Deepest run accepted by [`polarize_erasure`].
pub const MAX_ERASURE_DEPTH: usize = 30;

/// Polarization of `qEC(eps)` via the closed-form recursion `eps- = 2eps - eps^2`, `eps+ = eps^2`.
///
/// Every leaf is classified from `I = (1 - eps) log2 q` and
/// `I(W[H]) = (1 - eps) log2 |G/H|`.
pub fn polarize_erasure(
    group: Arc<GroupSpec>,
    eps: f64,
    n: usize,
    delta: f64,
    full: bool,
) -> Result<PolarizationReport> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("erasure probability {eps} is outside [0, 1]")));
    }
    if n == 0 || n > MAX_ERASURE_DEPTH {
        return Err(Error::InvalidParameter(format!("depth must be in 1..={MAX_ERASURE_DEPTH}, got {n}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let classifier = Classifier::new(group.clone());
    let top = n.min(8);
    let below = n - top;

    let parts: Vec<ReportBuilder> = (0..1u64 << top)
        .into_par_iter()
        .map(|prefix| {
            let mut e = eps;
            for i in 0..top {
                let sign = if prefix >> (top - 1 - i) & 1 == 1 { Sign::Plus } else { Sign::Minus };
                e = erasure_step(e, sign);
            }
            let mut b = ReportBuilder::new(classifier.subgroups().len(), full);
            let mut quotients = vec![0.0; classifier.levels().len()];
            let log_q = (group.order() as f64).log2();
            let mut leaf = |index: u64, e: f64| {
                for (qc, level) in quotients.iter_mut().zip(classifier.levels()) {
                    *qc = (1.0 - e) * level;
                }
                let c = classifier.classify_capacities((1.0 - e) * log_q, &quotients, delta);
                b.add(index, n, &c);
            };
            descend(e, below, prefix << below, &mut leaf);
            b
        })
        .collect();

    let mut all = ReportBuilder::new(classifier.subgroups().len(), full);
    for p in parts {
        all.append(p);
    }
    Ok(all.finish(&classifier, format!("qEC({eps})"), n, delta, false))
}

fn descend(e: f64, levels: usize, index: u64, leaf: &mut impl FnMut(u64, f64)) {
    if levels == 0 {
        leaf(index, e);
        return;
    }
    let shift = levels - 1;
    descend(erasure_step(e, Sign::Minus), shift, index, leaf);
    descend(erasure_step(e, Sign::Plus), shift, index | 1 << shift, leaf);
}
