//! The two-channel Arıkan transforms over the group operation.
//!
//! For `W: G -> Y`,
//!
//! ```text
//! W-(y1, y2 | u1)     = 1/q * sum_{u2} W(y1 | u1 + u2) W(y2 | u2)
//! W+(y1, y2, u1 | u2) = 1/q * W(y1 | u1 + u2) W(y2 | u2)
//! ```
//!
//! The raw output alphabets are `Y^2` and `Y^2 x G`; both results are reduced
//! before they are returned, which is what keeps repeated application
//! tractable. When a reduced alphabet still exceeds the configured cap the
//! transform fails with [`Error::AlphabetBlowUp`]; an optional lossy quantizer
//! can be enabled instead, and every channel it touches is labelled
//! approximate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::reduce::{quantize_columns, ColumnAccumulator};

/// Default cap on the reduced output alphabet.
pub const DEFAULT_MAX_ALPHABET: usize = 1_000_000;

/// Default cap on sign-sequence length.
pub const DEFAULT_MAX_DEPTH: usize = 30;

/// Marker appended to the label of any channel produced with the quantizer on.
pub const APPROXIMATE_TAG: &str = "[approximate]";

/// One step of the transform.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

/// A sequence of transform steps, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SignSequence(pub Vec<Sign>);

impl SignSequence {
    pub fn new(signs: Vec<Sign>) -> Self {
        SignSequence(signs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Sign) {
        self.0.push(s);
    }

    /// The `index`-th sequence of length `n`, with bit `n-1-i` of `index` choosing step `i` (`1` = plus).
    pub fn from_index(index: u64, n: usize) -> Self {
        SignSequence(
            (0..n)
                .map(|i| if index >> (n - 1 - i) & 1 == 1 { Sign::Plus } else { Sign::Minus })
                .collect(),
        )
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '-' => Ok(Sign::Minus),
                '+' => Ok(Sign::Plus),
                other => Err(Error::InvalidParameter(format!("unexpected sign character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SignSequence)
    }
}

/// Limits and the optional quantizer used by the transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformOptions {
    pub max_alphabet: usize,
    pub max_depth: usize,
    /// Target alphabet size for the lossy quantizer; `None` keeps every transform exact.
    pub quantize: Option<usize>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { max_alphabet: DEFAULT_MAX_ALPHABET, max_depth: DEFAULT_MAX_DEPTH, quantize: None }
    }
}

impl TransformOptions {
    pub fn is_approximate(&self) -> bool {
        self.quantize.is_some()
    }
}

/// Output-alphabet sizes observed by one transform.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlphabetStats {
    pub raw: usize,
    pub reduced: usize,
}

fn finish(
    w: &Channel,
    acc: ColumnAccumulator,
    raw: usize,
    sign: Sign,
    opts: &TransformOptions,
) -> Result<(Channel, AlphabetStats)> {
    let q = w.num_inputs();
    let mut cols = acc.finish();
    let mut reduced = cols.len() / q;
    let mut label = extend_label(w.label(), sign);
    if let Some(target) = opts.quantize {
        if reduced > target {
            cols = quantize_columns(&cols, q, target);
            reduced = cols.len() / q;
        }
        if !label.contains(APPROXIMATE_TAG) {
            label.push(' ');
            label.push_str(APPROXIMATE_TAG);
        }
    }
    if reduced > opts.max_alphabet {
        return Err(Error::AlphabetBlowUp { size: reduced, cap: opts.max_alphabet, prefix: None });
    }
    Ok((Channel::from_columns(w.group_arc().clone(), cols, label), AlphabetStats { raw, reduced }))
}

/// `name^s` becomes `name^s` followed by the new sign.
fn extend_label(label: &str, sign: Sign) -> String {
    let (base, approx) = match label.strip_suffix(APPROXIMATE_TAG) {
        Some(b) => (b.trim_end(), true),
        None => (label, false),
    };
    let mut out = if base.rsplit_once('^').is_some_and(|(_, t)| t.chars().all(|c| c == '-' || c == '+')) {
        format!("{base}{}", sign.as_char())
    } else {
        format!("{base}^{}", sign.as_char())
    };
    if approx {
        out.push(' ');
        out.push_str(APPROXIMATE_TAG);
    }
    out
}

/// `W-`, reduced.
pub fn minus(w: &Channel) -> Result<Channel> {
    minus_with(w, &TransformOptions::default()).map(|(c, _)| c)
}

/// `W+`, reduced.
pub fn plus(w: &Channel) -> Result<Channel> {
    plus_with(w, &TransformOptions::default()).map(|(c, _)| c)
}

pub fn minus_with(w: &Channel, opts: &TransformOptions) -> Result<(Channel, AlphabetStats)> {
    let g: &GroupSpec = w.group();
    let q = g.order();
    let m = w.num_outputs();
    let inv_q = 1.0 / q as f64;
    let mut acc = ColumnAccumulator::new(q);
    let mut out = vec![0.0; q];
    for y1 in 0..m {
        let c1 = w.column(y1);
        for y2 in 0..m {
            let c2 = w.column(y2);
            for (u1, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for (u2, &b) in c2.iter().enumerate() {
                    s += c1[g.add(u1, u2)] * b;
                }
                *o = s * inv_q;
            }
            acc.push(&out);
        }
    }
    finish(w, acc, m * m, Sign::Minus, opts)
}

pub fn plus_with(w: &Channel, opts: &TransformOptions) -> Result<(Channel, AlphabetStats)> {
    let g: &GroupSpec = w.group();
    let q = g.order();
    let m = w.num_outputs();
    let inv_q = 1.0 / q as f64;
    let mut acc = ColumnAccumulator::new(q);
    let mut out = vec![0.0; q];
    for y1 in 0..m {
        let c1 = w.column(y1);
        for y2 in 0..m {
            let c2 = w.column(y2);
            for u1 in 0..q {
                for (u2, o) in out.iter_mut().enumerate() {
                    *o = c1[g.add(u1, u2)] * c2[u2] * inv_q;
                }
                acc.push(&out);
            }
        }
    }
    finish(w, acc, m * m * q, Sign::Plus, opts)
}

/// One transform step in the given direction.
pub fn step(w: &Channel, sign: Sign, opts: &TransformOptions) -> Result<(Channel, AlphabetStats)> {
    match sign {
        Sign::Minus => minus_with(w, opts),
        Sign::Plus => plus_with(w, opts),
    }
}

/// `W^s = (...(W^{s_1})^{s_2}...)^{s_n}`, reducing after every step.
pub fn apply_sequence(w: &Channel, s: &SignSequence, opts: &TransformOptions) -> Result<Channel> {
    apply_sequence_traced(w, s, opts).map(|(c, _)| c)
}

/// Like [`apply_sequence`], also returning the alphabet sizes at each step.
pub fn apply_sequence_traced(
    w: &Channel,
    s: &SignSequence,
    opts: &TransformOptions,
) -> Result<(Channel, Vec<AlphabetStats>)> {
    if s.len() > opts.max_depth {
        return Err(Error::InvalidParameter(format!(
            "sequence length {} exceeds the depth limit {}",
            s.len(),
            opts.max_depth
        )));
    }
    let mut cur = w.clone();
    let mut stats = Vec::with_capacity(s.len());
    for (i, &sign) in s.0.iter().enumerate() {
        let (next, st) = step(&cur, sign, opts).map_err(|e| annotate(e, &s.0[..=i]))?;
        cur = next;
        stats.push(st);
    }
    Ok((cur, stats))
}

/// Attaches the offending prefix to a blow-up error.
pub(crate) fn annotate(e: Error, prefix: &[Sign]) -> Error {
    match e {
        Error::AlphabetBlowUp { size, cap, prefix: None } => Error::AlphabetBlowUp {
            size,
            cap,
            prefix: Some(SignSequence(prefix.to_vec()).to_string()),
        },
        other => other,
    }
}

/// Erasure probability of a `qEC` after one transform step, in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureState {
    pub epsilon: f64,
    pub q: usize,
}

impl ErasureState {
    pub fn new(q: usize, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!("erasure probability {epsilon} is outside [0, 1]")));
        }
        Ok(ErasureState { epsilon, q })
    }

    pub fn step(&self, sign: Sign) -> ErasureState {
        ErasureState { epsilon: erasure_step(self.epsilon, sign), q: self.q }
    }

    /// `I(qEC(eps)) = (1 - eps) log2 q`.
    pub fn capacity(&self) -> f64 {
        (1.0 - self.epsilon) * (self.q as f64).log2()
    }
}

/// `eps- = 2 eps - eps^2`, `eps+ = eps^2`.
#[inline]
pub fn erasure_step(eps: f64, sign: Sign) -> f64 {
    match sign {
        Sign::Minus => 2.0 * eps - eps * eps,
        Sign::Plus => eps * eps,
    }
}
