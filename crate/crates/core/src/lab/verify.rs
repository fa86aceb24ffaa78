//! Numerical verification suites.
//!
//! Every suite returns a [`VerificationOutcome`]: `passed` is true exactly when
//! no counterexample was found among the cases checked, and `worst_margin` is
//! the smallest distance to a failure seen (positive when passing).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{Channel, Classifier};
use crate::error::{Error, Result};
use crate::group::{GroupSpec, Subgroup};
use crate::lab::tree::{evaluate_tree, TreeOptions};
use crate::lab::{delta_qec, DELTA_ZERO};
use crate::symmetry::{is_automorphic_symmetric, quick_symmetry_check, SYMMETRY_TOL};
use crate::transform::{minus, plus, step, Sign, TransformOptions};
use crate::zoo::{self, GeneralizedSymmetricSpec};

/// Result of one verification suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationOutcome {
    pub name: String,
    pub passed: bool,
    pub cases_checked: u64,
    /// `None` when no case had anything to measure (e.g. a vacuous suite).
    pub worst_margin: Option<f64>,
    pub details: String,
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn proper_nontrivial(group: &GroupSpec) -> Vec<Subgroup> {
    let q = group.order();
    group.enumerate_subgroups().into_iter().filter(|h| h.order() != 1 && h.order() != q).collect()
}

/// No `qEC(eps)` on the grid `eps = k/100` is `δ_qEC`-determined by a proper non-trivial subgroup.
///
/// The margin of a case is `max(gapI, gapIH) - δ_qEC`.
pub fn verify_lemma_qec_bound(group: Arc<GroupSpec>) -> VerificationOutcome {
    let q = group.order();
    let delta = delta_qec(q);
    let subgroups = proper_nontrivial(&group);
    let mut worst: Option<f64> = None;
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for k in 0..=100 {
        let eps = k as f64 / 100.0;
        let w = zoo::qec(group.clone(), eps).expect("grid eps is valid");
        let cap = w.symmetric_capacity();
        for h in &subgroups {
            let level = h.quotient_bits(&group);
            let quotient = w.quotient_capacity(&group.coset_partition(h));
            let margin = (cap - level).abs().max((quotient - level).abs()) - delta;
            cases += 1;
            worst = min_opt(worst, Some(margin));
            if margin < 0.0 && failures.len() < 5 {
                failures.push(format!("eps={eps} H={:?}", h.members()));
            }
        }
    }
    let details = if subgroups.is_empty() {
        format!("{group} has no proper non-trivial subgroup; vacuously true")
    } else if failures.is_empty() {
        format!("{} eps values x {} subgroups, delta_qEC={delta:.6} bits", 101, subgroups.len())
    } else {
        format!("determined cases: {}", failures.join("; "))
    };
    VerificationOutcome {
        name: "qec-bound".into(),
        passed: failures.is_empty(),
        cases_checked: cases,
        worst_margin: worst,
        details,
    }
}

/// Structured channels checked by the uniqueness suite besides the random ones.
fn uniqueness_families(group: &Arc<GroupSpec>) -> Vec<Channel> {
    let q = group.order();
    let mut out = Vec::new();
    for k in 0..=100 {
        out.push(zoo::qec(group.clone(), k as f64 / 100.0).expect("valid eps"));
    }
    for k in 0..=40 {
        let eps = k as f64 / 40.0 / (q - 1) as f64;
        out.push(zoo::qsc(group.clone(), eps).expect("valid eps"));
    }
    let subgroups = group.enumerate_subgroups();
    let homos: Vec<Channel> =
        subgroups.iter().map(|h| zoo::deterministic_homomorphism(group.clone(), h).expect("valid subgroup")).collect();
    out.extend(homos.iter().cloned());
    // Adversarial: walk between two deterministic levels, crossing every boundary.
    for (i, a) in homos.iter().enumerate() {
        for b in &homos[i + 1..] {
            for k in 0..=100 {
                out.push(zoo::flagged_mixture(a, b, k as f64 / 100.0).expect("valid weight"));
            }
        }
    }
    // Erasure towards each level.
    for a in &homos {
        let e = zoo::qec(group.clone(), 1.0).expect("valid eps");
        for k in 0..=20 {
            out.push(zoo::flagged_mixture(a, &e, k as f64 / 20.0).expect("valid weight"));
        }
    }
    out
}

fn random_trial(group: &Arc<GroupSpec>, subgroups: &[Subgroup], seed: u64) -> Channel {
    let q = group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=2 * q);
    let noise = zoo::random_channel(group.clone(), m, rng.next_u64()).expect("m >= 1");
    match rng.random_range(0..3u8) {
        0 => noise,
        1 => {
            // A deterministic level perturbed by noise.
            let h = &subgroups[rng.random_range(0..subgroups.len())];
            let base = zoo::deterministic_homomorphism(group.clone(), h).expect("valid subgroup");
            zoo::flagged_mixture(&base, &noise, rng.random_range(0.5..1.0)).expect("valid weight")
        }
        _ => {
            let a = &subgroups[rng.random_range(0..subgroups.len())];
            let b = &subgroups[rng.random_range(0..subgroups.len())];
            let a = zoo::deterministic_homomorphism(group.clone(), a).expect("valid subgroup");
            let b = zoo::deterministic_homomorphism(group.clone(), b).expect("valid subgroup");
            zoo::flagged_mixture(&a, &b, rng.random::<f64>()).expect("valid weight")
        }
    }
}

/// Second smallest worst gap minus `δ₀`: positive iff at most one subgroup determines `w`.
fn uniqueness_margin(classifier: &Classifier, w: &Channel) -> (f64, usize) {
    let cap = w.symmetric_capacity();
    let quotients = classifier.quotient_capacities(w);
    let mut worst: Vec<f64> = classifier
        .levels()
        .iter()
        .zip(&quotients)
        .map(|(&l, &qc)| (cap - l).abs().max((qc - l).abs()))
        .collect();
    worst.sort_by(f64::total_cmp);
    let qualifying = worst.iter().filter(|&&g| g < DELTA_ZERO).count();
    (worst.get(1).map_or(f64::INFINITY, |g| g - DELTA_ZERO), qualifying)
}

/// At `δ₀ = 1/3` bit no channel is determined by two distinct subgroups.
///
/// Checks `trials` seeded random channels (plain, noisy levels and mixtures of
/// two levels) plus erasure, symmetric, homomorphism and boundary-crossing mixtures.
pub fn verify_uniqueness(group: Arc<GroupSpec>, trials: u64, seed: u64) -> Result<VerificationOutcome> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let classifier = Classifier::new(group.clone());
    let subgroups = classifier.subgroups().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| rng.next_u64()).collect();
    let check = |w: &Channel| {
        let (margin, qualifying) = uniqueness_margin(&classifier, w);
        (margin, qualifying, w.label().to_string())
    };
    let random: Vec<(f64, usize, String)> =
        seeds.par_iter().map(|&s| check(&random_trial(&group, &subgroups, s))).collect();
    let families = uniqueness_families(&group);
    let structured: Vec<(f64, usize, String)> = families.par_iter().map(check).collect();

    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for (margin, qualifying, label) in random.iter().chain(&structured) {
        worst = worst.min(*margin);
        if *qualifying > 1 && failures.len() < 5 {
            failures.push(format!("{label} ({qualifying} subgroups)"));
        }
    }
    let passed = failures.is_empty();
    let details = if passed {
        format!("{trials} random + {} structured channels, delta0={DELTA_ZERO:.6} bits", structured.len())
    } else {
        format!("ambiguous at delta0: {}", failures.join("; "))
    };
    Ok(VerificationOutcome {
        name: "uniqueness".into(),
        passed,
        cases_checked: trials + structured.len() as u64,
        worst_margin: worst.is_finite().then_some(worst),
        details,
    })
}

/// Largest `|W(pi(y) | f(x)) - W(y | x)|` over the returned witnesses, or `None` if not symmetric.
fn symmetry_residual(w: &Channel) -> Option<f64> {
    let v = is_automorphic_symmetric(w);
    if !v.symmetric {
        return None;
    }
    let autos = w.group().enumerate_automorphisms();
    let mut worst = 0.0f64;
    for (f, pi) in autos.iter().zip(&v.witnesses) {
        for (y, &py) in pi.iter().enumerate() {
            for x in 0..w.num_inputs() {
                worst = worst.max((w.prob(py, f.apply(x)) - w.prob(y, x)).abs());
            }
        }
    }
    Some(worst)
}

/// Automorphism groups up to this size also get orbit-averaged random inputs.
const ORBIT_AVERAGE_MAX_AUT: usize = 200;

fn closure_inputs(group: &Arc<GroupSpec>, trials: u64, seed: u64) -> Vec<Channel> {
    let q = group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small_aut = group.automorphism_count() <= ORBIT_AVERAGE_MAX_AUT;
    let mut out: Vec<Channel> = (0..trials)
        .map(|i| {
            let s = rng.next_u64();
            if small_aut && i % 4 == 3 {
                let w = zoo::random_channel(group.clone(), 2, s).expect("m >= 1");
                zoo::orbit_average(&w).expect("valid channel")
            } else {
                let spec = GeneralizedSymmetricSpec::random(q, 1 + (i % 3) as usize, s);
                zoo::generalized_qsym(group.clone(), &spec).expect("random spec is valid")
            }
        })
        .collect();
    let qsc_eps = 0.1f64.min(1.0 / (q - 1) as f64);
    out.push(zoo::qsc(group.clone(), qsc_eps).expect("valid eps"));
    out.push(zoo::qec(group.clone(), 0.3).expect("valid eps"));
    out.push(zoo::deterministic_homomorphism(group.clone(), &group.trivial_subgroup()).expect("valid"));
    out
}

/// Generalized q-symmetric and orbit-averaged channels are automorphic-symmetric, and so are their
/// minus and plus transforms. Every witness is re-checked entrywise.
pub fn verify_closure(group: Arc<GroupSpec>, trials: u64, seed: u64) -> Result<VerificationOutcome> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let inputs = closure_inputs(&group, trials, seed);
    let results: Vec<Result<[Option<f64>; 3]>> = inputs
        .par_iter()
        .map(|w| Ok([symmetry_residual(w), symmetry_residual(&minus(w)?), symmetry_residual(&plus(w)?)]))
        .collect();
    let mut worst: Option<f64> = None;
    let mut failures = Vec::new();
    for (w, r) in inputs.iter().zip(results) {
        for (which, res) in ["W", "W-", "W+"].iter().zip(r?) {
            match res {
                Some(residual) => worst = min_opt(worst, Some(SYMMETRY_TOL - residual)),
                None => {
                    if failures.len() < 5 {
                        failures.push(format!("{which} of {}", w.label()));
                    }
                    worst = min_opt(worst, Some(-SYMMETRY_TOL));
                }
            }
        }
    }
    let passed = failures.is_empty() && worst.is_some_and(|m| m >= 0.0);
    let details = if failures.is_empty() {
        format!("{} channels and their minus/plus transforms", inputs.len())
    } else {
        format!("not symmetric: {}", failures.join("; "))
    };
    Ok(VerificationOutcome {
        name: "closure".into(),
        passed,
        cases_checked: 3 * inputs.len() as u64,
        worst_margin: worst,
        details,
    })
}

/// Every classified leaf of an automorphic-symmetric channel is determined by a characteristic subgroup.
///
/// Unclassified leaves are counted but never fail the check. The margin is the
/// smallest `max(gapI, gapIH) - delta` over all leaves and all non-characteristic
/// subgroups (`None` when every subgroup is characteristic).
pub fn verify_characteristic_levels(
    w: &Channel,
    n: usize,
    delta: f64,
    opts: &TreeOptions,
) -> Result<VerificationOutcome> {
    if !(delta > 0.0 && delta < DELTA_ZERO) {
        return Err(Error::Precondition(format!("delta must lie in (0, {DELTA_ZERO}), got {delta}")));
    }
    if n == 0 || n > opts.transform.max_depth {
        return Err(Error::InvalidParameter(format!("depth must be in 1..={}", opts.transform.max_depth)));
    }
    if !quick_symmetry_check(w) {
        return Err(Error::Precondition(format!("{} is not automorphic-symmetric", w.label())));
    }
    let group = w.group_arc().clone();
    let characteristic = group.characteristic_subgroups();
    let (classifier, tree) = evaluate_tree(w, n, opts)?;
    let is_char: Vec<bool> = classifier.subgroups().iter().map(|h| characteristic.contains(h)).collect();
    let levels = classifier.levels();

    let mut worst: Option<f64> = None;
    let mut counts = vec![0u64; is_char.len()];
    let mut unclassified = 0u64;
    let mut violations = Vec::new();
    for (index, leaf) in tree.leaves.iter().enumerate() {
        let c = classifier.classify_capacities(leaf.capacity, &leaf.quotients, delta);
        match c.subgroup() {
            Some(h) => {
                counts[h] += 1;
                if !is_char[h] && violations.len() < 5 {
                    violations.push(format!("leaf {index} -> {:?}", classifier.subgroups()[h].members()));
                }
            }
            None => unclassified += 1,
        }
        for (i, _) in is_char.iter().enumerate().filter(|(_, c)| !**c) {
            let gap = (leaf.capacity - levels[i]).abs().max((leaf.quotients[i] - levels[i]).abs());
            worst = min_opt(worst, Some(gap - delta));
        }
    }
    let classes: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("|H|={}:{c}", classifier.subgroups()[i].order()))
        .collect();
    let passed = counts.iter().zip(&is_char).all(|(&c, &ch)| ch || c == 0);
    let details = if passed {
        format!("{}: n={n}, classes [{}], {unclassified} not yet polarized", w.label(), classes.join(" "))
    } else {
        format!("{}: non-characteristic classes: {}", w.label(), violations.join("; "))
    };
    Ok(VerificationOutcome {
        name: "levels".into(),
        passed,
        cases_checked: tree.leaves.len() as u64,
        worst_margin: worst,
        details,
    })
}

/// One input of the characteristic-levels audit.
#[derive(Clone, Debug)]
pub struct AuditInput {
    pub channel: Channel,
    pub depth: usize,
}

/// Output alphabet budget for inputs whose exact alphabet grows quickly.
pub const AUDIT_ALPHABET_BUDGET: usize = 50_000;
const AUDIT_RAW_BUDGET: usize = 40_000_000;

/// Deepest `d <= n` to which every branch of `w` can be computed exactly within `budget` outputs.
pub fn max_exact_depth(w: &Channel, n: usize, budget: usize) -> usize {
    let q = w.num_inputs();
    let opts = TransformOptions { max_alphabet: budget, ..Default::default() };
    let mut level = vec![w.clone()];
    for d in 1..=n {
        if level.iter().any(|c| c.num_outputs().pow(2).saturating_mul(q * q) > AUDIT_RAW_BUDGET) {
            return d - 1;
        }
        let next: Result<Vec<Vec<Channel>>> = level
            .par_iter()
            .map(|c| [Sign::Minus, Sign::Plus].into_iter().map(|s| step(c, s, &opts).map(|r| r.0)).collect())
            .collect();
        match next {
            Ok(v) => level = v.into_iter().flatten().collect(),
            Err(_) => return d - 1,
        }
    }
    n
}

/// Automorphic-symmetric inputs for the characteristic-levels audit of `group`.
///
/// Coset-structured inputs (erasure, characteristic homomorphisms, mixtures of
/// nested ones, erasure-type generalized symmetric) run at depth `n`. Inputs
/// whose exact alphabet explodes (symmetric, random generalized symmetric and
/// orbit-averaged random channels) run at the largest depth that fits
/// [`AUDIT_ALPHABET_BUDGET`]; inputs that do not fit even one step are dropped.
pub fn audit_family(group: &Arc<GroupSpec>, n: usize, seed: u64) -> Vec<AuditInput> {
    let q = group.order();
    let mut deep = Vec::new();
    for eps in [0.2, 0.5, 0.8] {
        deep.push(zoo::qec(group.clone(), eps).expect("valid eps"));
    }
    let characteristic = group.characteristic_subgroups();
    let homos: Vec<(Subgroup, Channel)> = characteristic
        .iter()
        .map(|h| (h.clone(), zoo::deterministic_homomorphism(group.clone(), h).expect("valid subgroup")))
        .collect();
    deep.extend(homos.iter().map(|(_, c)| c.clone()));
    for (a, ca) in &homos {
        for (b, cb) in &homos {
            if a != b && a.is_subset_of(b) {
                deep.push(zoo::flagged_mixture(ca, cb, 0.5).expect("valid weight"));
            }
        }
    }
    let erasure_like = GeneralizedSymmetricSpec::new(vec![(0.6, 0.0), (0.4, 1.0 / q as f64)]);
    deep.push(zoo::generalized_qsym(group.clone(), &erasure_like).expect("valid spec"));

    let mut shallow = Vec::new();
    if q > 1 {
        shallow.push(zoo::qsc(group.clone(), 0.5 / q as f64).expect("valid eps"));
        let spec = GeneralizedSymmetricSpec::random(q, 2, seed);
        shallow.push(zoo::generalized_qsym(group.clone(), &spec).expect("random spec is valid"));
        if group.automorphism_count() <= ORBIT_AVERAGE_MAX_AUT {
            let w = zoo::random_channel(group.clone(), 2, seed ^ 0x5eed).expect("m >= 1");
            shallow.push(zoo::orbit_average(&w).expect("valid channel"));
        }
    }

    let mut out: Vec<AuditInput> = deep.into_iter().map(|channel| AuditInput { channel, depth: n }).collect();
    for channel in shallow {
        let depth = max_exact_depth(&channel, n, AUDIT_ALPHABET_BUDGET);
        if depth > 0 {
            out.push(AuditInput { channel, depth });
        }
    }
    out
}

/// Runs [`verify_characteristic_levels`] over [`audit_family`] and merges the outcomes.
pub fn verify_levels_suite(group: Arc<GroupSpec>, n: usize, delta: f64, seed: u64) -> Result<VerificationOutcome> {
    let opts = TreeOptions::default();
    let inputs = audit_family(&group, n, seed);
    let mut merged = VerificationOutcome {
        name: "levels".into(),
        passed: true,
        cases_checked: 0,
        worst_margin: None,
        details: String::new(),
    };
    let mut lines = Vec::new();
    for input in &inputs {
        let o = verify_characteristic_levels(&input.channel, input.depth, delta, &opts)?;
        merged.passed &= o.passed;
        merged.cases_checked += o.cases_checked;
        merged.worst_margin = min_opt(merged.worst_margin, o.worst_margin);
        lines.push(o.details);
    }
    merged.details = format!("{} inputs at delta={delta}; {}", inputs.len(), lines.join(" | "));
    Ok(merged)
}

/// Named suite selection for [`run_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    QecBound,
    Uniqueness,
    Closure,
    Levels,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qec-bound" => Ok(Suite::QecBound),
            "uniqueness" => Ok(Suite::Uniqueness),
            "closure" => Ok(Suite::Closure),
            "levels" => Ok(Suite::Levels),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite {other:?} (expected qec-bound, uniqueness, closure, levels or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::QecBound => "qec-bound",
            Suite::Uniqueness => "uniqueness",
            Suite::Closure => "closure",
            Suite::Levels => "levels",
            Suite::All => "all",
        })
    }
}

/// Depth and δ used by the `levels` suite.
pub const LEVELS_DEPTH: usize = 8;
pub const LEVELS_DELTA: f64 = 0.1;

/// Runs the selected suites in a fixed order.
pub fn run_suite(suite: Suite, group: Arc<GroupSpec>, trials: u64, seed: u64) -> Result<Vec<VerificationOutcome>> {
    let all = suite == Suite::All;
    let mut out = Vec::new();
    if all || suite == Suite::QecBound {
        out.push(verify_lemma_qec_bound(group.clone()));
    }
    if all || suite == Suite::Uniqueness {
        out.push(verify_uniqueness(group.clone(), trials, seed)?);
    }
    if all || suite == Suite::Closure {
        out.push(verify_closure(group.clone(), trials, seed)?);
    }
    if all || suite == Suite::Levels {
        out.push(verify_levels_suite(group, LEVELS_DEPTH, LEVELS_DELTA, seed)?);
    }
    Ok(out)
}
