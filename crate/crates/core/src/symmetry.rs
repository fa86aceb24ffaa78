//! Deciding automorphic symmetry.
//!
//! `W` is automorphic-symmetric when every automorphism `f` of the group has an
//! output bijection `pi_f` with `W(pi_f(y) | f(x)) = W(y | x)`. Equivalently,
//! the output `pi_f(y)` must have the likelihood vector `x -> W(y | f^-1(x))`,
//! so a witness exists exactly when the multiset of columns is unchanged by
//! composing every column with `f^-1`. Columns are compared through their
//! weight and posterior, and matched class by class.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::Channel;
use crate::group::Automorphism;
use crate::reduce::cluster_features;

/// Tolerance on posterior entries and on log-weights when matching columns.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Outcome of [`is_automorphic_symmetric`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryVerdict {
    pub symmetric: bool,
    pub automorphisms_checked: usize,
    /// One output permutation per automorphism, in canonical automorphism order
    /// (empty unless requested and the channel is symmetric).
    #[serde(skip)]
    pub witnesses: Vec<Vec<usize>>,
    /// The first automorphism (in canonical order) without a witness.
    pub failing: Option<Vec<usize>>,
}

fn features(w: &Channel, map: Option<&[usize]>) -> Vec<f64> {
    let q = w.num_inputs();
    let mut out = Vec::with_capacity(w.num_outputs() * (q + 1));
    for y in 0..w.num_outputs() {
        let c = w.column(y);
        let s: f64 = c.iter().sum();
        match map {
            Some(inv) => out.extend((0..q).map(|x| c[inv[x]] / s)),
            None => out.extend(c.iter().map(|v| v / s)),
        }
        out.push(s.ln());
    }
    out
}

/// Searches for `pi` with `W(pi(y) | f(x)) = W(y | x)`; returns it as `pi[y]`.
pub fn find_witness(w: &Channel, f: &Automorphism) -> Option<Vec<usize>> {
    let q = w.num_inputs();
    let m = w.num_outputs();
    let inv = f.inverse();
    let mut feat = features(w, None);
    feat.extend(features(w, Some(inv.perm())));
    let mut pi = vec![usize::MAX; m];
    for class in cluster_features(&feat, q + 1, SYMMETRY_TOL) {
        let (orig, moved): (Vec<usize>, Vec<usize>) = class.into_iter().partition(|&i| i < m);
        if orig.len() != moved.len() {
            return None;
        }
        for (o, t) in orig.into_iter().zip(moved) {
            pi[t - m] = o;
        }
    }
    Some(pi)
}

/// Checks every automorphism; witnesses are kept only if `keep_witnesses` is set.
pub fn is_automorphic_symmetric_with(w: &Channel, keep_witnesses: bool) -> SymmetryVerdict {
    let autos = w.group().enumerate_automorphisms();
    let results: Vec<Option<Vec<usize>>> = autos.par_iter().map(|f| find_witness(w, f)).collect();
    let failing = results.iter().position(|r| r.is_none()).map(|i| autos[i].perm().to_vec());
    let symmetric = failing.is_none();
    let witnesses = if keep_witnesses && symmetric { results.into_iter().flatten().collect() } else { Vec::new() };
    SymmetryVerdict { symmetric, automorphisms_checked: autos.len(), witnesses, failing }
}

/// Overall verdict with witnesses.
pub fn is_automorphic_symmetric(w: &Channel) -> SymmetryVerdict {
    is_automorphic_symmetric_with(w, true)
}

/// Verdict only, stopping at the first automorphism without a witness.
pub fn quick_symmetry_check(w: &Channel) -> bool {
    let mut ok = true;
    w.group().for_each_automorphism(|f| {
        if find_witness(w, f).is_none() {
            ok = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    ok
}
