//! Constructors for the channel families used in experiments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::group::{GroupSpec, Subgroup};

/// `qEC(eps)`: outputs are the group elements followed by one erasure symbol.
pub fn qec(group: Arc<GroupSpec>, eps: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("erasure probability {eps} is outside [0, 1]")));
    }
    let q = group.order();
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|x| {
            let mut r = vec![0.0; q + 1];
            r[x] = 1.0 - eps;
            r[q] = eps;
            r
        })
        .collect();
    Channel::new(group, &rows, format!("qEC({eps})"))
}

/// `qSC(eps)`: correct with probability `1 - (q-1) eps`, each wrong symbol with probability `eps`.
pub fn qsc(group: Arc<GroupSpec>, eps: f64) -> Result<Channel> {
    let q = group.order();
    check_qsc_param(q, eps)?;
    let rows: Vec<Vec<f64>> = (0..q).map(|x| qsc_row(q, x, eps)).collect();
    Channel::new(group, &rows, format!("qSC({eps})"))
}

fn check_qsc_param(q: usize, eps: f64) -> Result<()> {
    let max = 1.0 / (q - 1) as f64;
    if !(0.0..=max + 1e-12).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "q-symmetric parameter {eps} is outside [0, 1/(q-1)] = [0, {max}]"
        )));
    }
    Ok(())
}

fn qsc_row(q: usize, x: usize, eps: f64) -> Vec<f64> {
    let mut r = vec![eps; q];
    r[x] = (1.0 - (q - 1) as f64 * eps).max(0.0);
    r
}

/// Mixture weights and qSC parameters of a generalized q-symmetric channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedSymmetricSpec {
    /// `(p, eps)` pairs: component `qSC(eps)` is used with probability `p`.
    pub components: Vec<(f64, f64)>,
}

impl GeneralizedSymmetricSpec {
    pub fn new(components: Vec<(f64, f64)>) -> Self {
        GeneralizedSymmetricSpec { components }
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("at least one component is required".into()));
        }
        let mut total = 0.0;
        for &(p, eps) in &self.components {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("component weight {p} is outside [0, 1]")));
            }
            check_qsc_param(q, eps)?;
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("component weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Parses `"p1:e1,p2:e2,..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let components = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|part| {
                let (p, e) = part
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidParameter(format!("component {part:?} is not of the form p:eps")))?;
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("{s:?} is not a number")))
                };
                Ok((num(p)?, num(e)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GeneralizedSymmetricSpec { components })
    }

    /// A random spec with `k` components: Dirichlet weights, uniform parameters in `[0, 1/(q-1)]`.
    pub fn random(q: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = dirichlet(&mut rng, k.max(1));
        let max = 1.0 / (q - 1) as f64;
        let mut components: Vec<(f64, f64)> = w.into_iter().map(|p| (p, rng.random::<f64>() * max)).collect();
        // Make the weights sum to one exactly.
        let rest: f64 = components[1..].iter().map(|c| c.0).sum();
        components[0].0 = (1.0 - rest).max(0.0);
        GeneralizedSymmetricSpec { components }
    }
}

/// Generalized q-symmetric channel: output `y' * q + x'` means component `y'` produced `x'`.
pub fn generalized_qsym(group: Arc<GroupSpec>, spec: &GeneralizedSymmetricSpec) -> Result<Channel> {
    let q = group.order();
    spec.validate(q)?;
    let k = spec.components.len();
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|x| {
            let mut r = Vec::with_capacity(q * k);
            for &(p, eps) in &spec.components {
                r.extend(qsc_row(q, x, eps).into_iter().map(|v| p * v));
            }
            r
        })
        .collect();
    let desc: Vec<String> = spec.components.iter().map(|(p, e)| format!("{p}:{e}")).collect();
    Channel::new(group, &rows, format!("gensym({})", desc.join(",")))
}

/// The channel that outputs the coset `x + H`, labelled by first appearance.
pub fn deterministic_homomorphism(group: Arc<GroupSpec>, h: &Subgroup) -> Result<Channel> {
    group.check_subgroup(h)?;
    let cosets = group.coset_partition(h);
    let rows: Vec<Vec<f64>> = (0..group.order())
        .map(|x| {
            let mut r = vec![0.0; cosets.num_cosets];
            r[cosets.coset_of[x]] = 1.0;
            r
        })
        .collect();
    let label = format!("homo(|H|={})", h.order());
    Channel::new(group, &rows, label)
}

/// Rows drawn independently from the flat Dirichlet distribution on `m` outcomes.
pub fn random_channel(group: Arc<GroupSpec>, m: usize, seed: u64) -> Result<Channel> {
    if m == 0 {
        return Err(Error::InvalidParameter("a channel needs at least one output".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..group.order()).map(|_| dirichlet(&mut rng, m)).collect();
    Channel::new(group, &rows, format!("random(m={m},seed={seed})"))
}

/// Mixture `lambda * A + (1 - lambda) * B` where the receiver also learns which branch was used.
pub fn flagged_mixture(a: &Channel, b: &Channel, lambda: f64) -> Result<Channel> {
    if a.group() != b.group() {
        return Err(Error::InvalidParameter("mixed channels must share a group".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("mixture weight {lambda} is outside [0, 1]")));
    }
    let rows: Vec<Vec<f64>> = a
        .rows()
        .into_iter()
        .zip(b.rows())
        .map(|(ra, rb)| {
            ra.iter()
                .map(|v| lambda * v)
                .chain(rb.iter().map(|v| (1.0 - lambda) * v))
                .collect()
        })
        .collect();
    Channel::new(a.group_arc().clone(), &rows, format!("mix({lambda};{};{})", a.label(), b.label()))
}

/// Symmetrises `w` over the automorphism group: output `(y, f)` with probability `W(y | f(x)) / |Aut|`.
///
/// The result is automorphic-symmetric for any `w`: for an automorphism `g`
/// the output map `(y, f) -> (y, f o g^-1)` is a witness.
pub fn orbit_average(w: &Channel) -> Result<Channel> {
    let autos = w.group().enumerate_automorphisms();
    let n = autos.len() as f64;
    let m = w.num_outputs();
    let rows: Vec<Vec<f64>> = (0..w.num_inputs())
        .map(|x| {
            let mut r = Vec::with_capacity(m * autos.len());
            for f in &autos {
                r.extend((0..m).map(|y| w.prob(y, f.apply(x)) / n));
            }
            r
        })
        .collect();
    Channel::new(w.group_arc().clone(), &rows, format!("orbit({})", w.label())).map(|c| c.reduce())
}

fn dirichlet(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = draws.iter().sum();
    let mut row: Vec<f64> = draws.iter().map(|d| d / s).collect();
    // Absorb the rounding error in the largest entry.
    let err = 1.0 - row.iter().sum::<f64>();
    let imax = (0..m).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    row[imax] += err;
    row
}
