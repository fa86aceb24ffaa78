//! Finite Abelian groups given as products of cyclic factors.
//!
//! A group `Z_{d_1} x ... x Z_{d_k}` has its elements numbered `0..q` by
//! mixed-radix encoding of the coordinate tuple, first coordinate most
//! significant. Index `0` is the identity, and numeric order on indices is the
//! lexicographic order on tuples.
//!
//! Everything here is exhaustive: the subgroup lattice, the automorphism group
//! and the characteristic subgroups are all enumerated outright. That is only
//! sensible for small groups, so construction enforces an order bound
//! ([`DEFAULT_MAX_ORDER`] unless configured otherwise).

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest group order accepted by [`GroupSpec::new`].
pub const DEFAULT_MAX_ORDER: usize = 64;

/// A finite Abelian group `Z_{d_1} x ... x Z_{d_k}` with cached arithmetic tables.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupSpec {
    orders: Vec<usize>,
    q: usize,
    strides: Vec<usize>,
    add: Vec<u16>,
    neg: Vec<u16>,
    elem_order: Vec<usize>,
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec({})", self)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|d| format!("Z{d}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl GroupSpec {
    /// Builds `Z_{orders[0]} x Z_{orders[1]} x ...` under the default order bound.
    pub fn new(orders: &[usize]) -> Result<Self> {
        Self::with_bound(orders, DEFAULT_MAX_ORDER)
    }

    /// Builds the group, rejecting it if its order exceeds `bound`.
    pub fn with_bound(orders: &[usize], bound: usize) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidGroup("at least one cyclic factor is required".into()));
        }
        if let Some(d) = orders.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidGroup(format!("cyclic factor order {d} is below 2")));
        }
        let mut q: usize = 1;
        for &d in orders {
            q = q.checked_mul(d).filter(|&q| q <= bound).ok_or(Error::GroupTooLarge {
                order: orders.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
                bound,
            })?;
        }
        if q > u16::MAX as usize {
            return Err(Error::GroupTooLarge { order: q, bound: u16::MAX as usize });
        }

        let mut strides = vec![1; orders.len()];
        for i in (0..orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * orders[i + 1];
        }

        let mut g = GroupSpec {
            orders: orders.to_vec(),
            q,
            strides,
            add: Vec::new(),
            neg: Vec::new(),
            elem_order: Vec::new(),
        };

        let coords: Vec<Vec<usize>> = (0..q).map(|i| g.decode(i)).collect();
        let mut add = vec![0u16; q * q];
        for a in 0..q {
            for b in 0..q {
                let s: usize = coords[a]
                    .iter()
                    .zip(&coords[b])
                    .zip(&g.orders)
                    .zip(&g.strides)
                    .map(|(((x, y), d), st)| ((x + y) % d) * st)
                    .sum();
                add[a * q + b] = s as u16;
            }
        }
        g.add = add;
        g.neg = (0..q)
            .map(|a| (0..q).find(|&b| g.add[a * q + b] == 0).unwrap() as u16)
            .collect();
        g.elem_order = (0..q)
            .map(|a| {
                let mut k = 1;
                let mut x = a;
                while x != 0 {
                    x = g.add(x, a);
                    k += 1;
                }
                k
            })
            .collect();
        Ok(g)
    }

    /// Cyclic factor orders.
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Group order.
    pub fn order(&self) -> usize {
        self.q
    }

    /// Coordinate tuple of an element index.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        self.orders
            .iter()
            .zip(&self.strides)
            .map(|(d, st)| (index / st) % d)
            .collect()
    }

    /// Element index of a coordinate tuple (coordinates are reduced modulo their factor).
    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.orders.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.orders.len(),
                coords.len()
            )));
        }
        Ok(coords
            .iter()
            .zip(&self.orders)
            .zip(&self.strides)
            .map(|((c, d), st)| (c % d) * st)
            .sum())
    }

    /// Group addition on element indices. Panics on out-of-range indices.
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    /// Group addition with range checking.
    pub fn checked_add(&self, a: usize, b: usize) -> Result<usize> {
        for x in [a, b] {
            if x >= self.q {
                return Err(Error::ElementOutOfRange { index: x, order: self.q });
            }
        }
        Ok(self.add(a, b))
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Order of the element `a`.
    pub fn element_order(&self, a: usize) -> usize {
        self.elem_order[a]
    }

    /// `k` copies of `a` added together.
    pub fn scale(&self, a: usize, k: usize) -> usize {
        let k = k % self.elem_order[a];
        (0..k).fold(0, |acc, _| self.add(acc, a))
    }

    /// True when some element generates the whole group.
    pub fn is_cyclic(&self) -> bool {
        self.elem_order.contains(&self.q)
    }

    /// Index of the canonical generator of the `i`-th cyclic factor.
    fn factor_generator(&self, i: usize) -> usize {
        self.strides[i]
    }

    /// `{0}` as a subgroup.
    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup { members: vec![0] }
    }

    /// The whole group as a subgroup.
    pub fn full_subgroup(&self) -> Subgroup {
        Subgroup { members: (0..self.q).collect() }
    }

    /// Cyclic subgroup generated by `a`.
    pub fn cyclic_subgroup(&self, a: usize) -> Subgroup {
        let mut members = Vec::with_capacity(self.elem_order[a]);
        let mut x = 0;
        loop {
            members.push(x);
            x = self.add(x, a);
            if x == 0 {
                break;
            }
        }
        members.sort_unstable();
        Subgroup { members }
    }

    /// Validates a member list and returns it as a subgroup.
    pub fn subgroup_from_members(&self, members: &[usize]) -> Result<Subgroup> {
        let mut m = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.first() != Some(&0) {
            return Err(Error::SubgroupMismatch("the identity is not a member".into()));
        }
        if let Some(&x) = m.iter().find(|&&x| x >= self.q) {
            return Err(Error::ElementOutOfRange { index: x, order: self.q });
        }
        let set = ElemSet::from_members(self.q, &m);
        for &a in &m {
            if !set.contains(self.neg(a)) {
                return Err(Error::SubgroupMismatch(format!("not closed under negation at {a}")));
            }
            for &b in &m {
                if !set.contains(self.add(a, b)) {
                    return Err(Error::SubgroupMismatch(format!(
                        "not closed under addition at {a} + {b}"
                    )));
                }
            }
        }
        Ok(Subgroup { members: m })
    }

    /// Checks that `h` is a subgroup of this group.
    pub fn check_subgroup(&self, h: &Subgroup) -> Result<()> {
        self.subgroup_from_members(&h.members).map(|_| ())
    }

    /// Every subgroup, sorted by order and then lexicographically by member list.
    ///
    /// The lattice is grown from the cyclic subgroups: every subgroup of an
    /// Abelian group is a sum of cyclic ones, so joining each newly found
    /// subgroup with each cyclic subgroup until nothing new appears is complete.
    pub fn enumerate_subgroups(&self) -> Vec<Subgroup> {
        let mut cyclic: Vec<ElemSet> = Vec::new();
        let mut seen: HashSet<ElemSet> = HashSet::new();
        for a in 0..self.q {
            let c = ElemSet::from_members(self.q, &self.cyclic_subgroup(a).members);
            if seen.insert(c.clone()) {
                cyclic.push(c);
            }
        }
        let mut work: Vec<ElemSet> = cyclic.clone();
        while let Some(x) = work.pop() {
            let xm = x.members();
            for c in &cyclic {
                if c.is_subset(&x) {
                    continue;
                }
                let mut s = ElemSet::empty(self.q);
                for &a in &xm {
                    for b in c.iter() {
                        s.insert(self.add(a, b));
                    }
                }
                if seen.insert(s.clone()) {
                    work.push(s);
                }
            }
        }
        let mut out: Vec<Subgroup> =
            seen.into_iter().map(|s| Subgroup { members: s.members() }).collect();
        out.sort();
        out
    }

    /// Calls `visit` on every automorphism, in no particular order, until it breaks.
    ///
    /// Candidate images for the canonical generator of each factor `Z_d` are
    /// the elements whose order divides `d`; any such assignment extends to a
    /// homomorphism, and the search keeps the partial map injective on the
    /// subgroup spanned by the generators assigned so far.
    pub fn for_each_automorphism<F>(&self, mut visit: F)
    where
        F: FnMut(&Automorphism) -> ControlFlow<()>,
    {
        let q = self.q;
        let candidates: Vec<Vec<usize>> = self
            .orders
            .iter()
            .map(|&d| (0..q).filter(|&x| d % self.elem_order[x] == 0).collect())
            .collect();
        let mut perm = vec![usize::MAX; q];
        let mut used = vec![false; q];
        perm[0] = 0;
        used[0] = true;
        let mut domain = vec![0usize];
        let _ = self.extend_automorphism(0, &candidates, &mut perm, &mut used, &mut domain, &mut visit);
    }

    fn extend_automorphism<F>(
        &self,
        factor: usize,
        candidates: &[Vec<usize>],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        domain: &mut Vec<usize>,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&Automorphism) -> ControlFlow<()>,
    {
        if factor == self.orders.len() {
            return visit(&Automorphism { perm: perm.clone() });
        }
        let gen = self.factor_generator(factor);
        let d = self.orders[factor];
        let base = domain.len();
        for &img in &candidates[factor] {
            let mut added: Vec<usize> = Vec::with_capacity(base * (d - 1));
            let mut ok = true;
            'outer: for &src in &domain[..base] {
                let (mut s, mut t) = (src, perm[src]);
                for _ in 1..d {
                    s = self.add(s, gen);
                    t = self.add(t, img);
                    if used[t] {
                        ok = false;
                        break 'outer;
                    }
                    used[t] = true;
                    perm[s] = t;
                    added.push(s);
                }
            }
            if ok {
                domain.extend_from_slice(&added);
                let flow = self.extend_automorphism(factor + 1, candidates, perm, used, domain, visit);
                domain.truncate(base);
                if flow.is_break() {
                    for &s in &added {
                        used[perm[s]] = false;
                        perm[s] = usize::MAX;
                    }
                    return flow;
                }
            }
            for &s in &added {
                used[perm[s]] = false;
                perm[s] = usize::MAX;
            }
        }
        ControlFlow::Continue(())
    }

    /// All automorphisms, sorted lexicographically by permutation (identity first).
    pub fn enumerate_automorphisms(&self) -> Vec<Automorphism> {
        let mut out = Vec::new();
        self.for_each_automorphism(|f| {
            out.push(f.clone());
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    /// Number of automorphisms.
    pub fn automorphism_count(&self) -> usize {
        let mut n = 0;
        self.for_each_automorphism(|_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    /// Subgroups mapped onto themselves by every automorphism, in canonical order.
    pub fn characteristic_subgroups(&self) -> Vec<Subgroup> {
        let subgroups = self.enumerate_subgroups();
        let sets: Vec<ElemSet> =
            subgroups.iter().map(|h| ElemSet::from_members(self.q, &h.members)).collect();
        // {0} and G are always invariant.
        let mut alive: Vec<bool> = subgroups
            .iter()
            .map(|h| h.order() != 1 && h.order() != self.q)
            .collect();
        let mut remaining = alive.iter().filter(|&&a| a).count();
        if remaining > 0 {
            self.for_each_automorphism(|f| {
                for (i, h) in subgroups.iter().enumerate() {
                    if alive[i] && !h.members.iter().all(|&x| sets[i].contains(f.apply(x))) {
                        alive[i] = false;
                        remaining -= 1;
                    }
                }
                if remaining == 0 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
        }
        subgroups
            .into_iter()
            .zip(alive)
            .filter(|(h, a)| *a || h.order() == 1 || h.order() == self.q)
            .map(|(h, _)| h)
            .collect()
    }

    /// Partition of the group into cosets of `h`, labelled by first appearance.
    pub fn coset_partition(&self, h: &Subgroup) -> CosetPartition {
        let mut coset_of = vec![usize::MAX; self.q];
        let mut next = 0;
        for x in 0..self.q {
            if coset_of[x] == usize::MAX {
                for &m in &h.members {
                    coset_of[self.add(x, m)] = next;
                }
                next += 1;
            }
        }
        CosetPartition { coset_of, num_cosets: next }
    }

    /// Coordinate tuple rendered as `(a,b,...)`.
    pub fn format_element(&self, index: usize) -> String {
        let c: Vec<String> = self.decode(index).iter().map(|x| x.to_string()).collect();
        format!("({})", c.join(","))
    }
}

/// A subgroup, stored as its sorted member indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    /// `{0}` or the whole group.
    pub fn is_trivial_in(&self, g: &GroupSpec) -> bool {
        self.order() == 1 || self.order() == g.order()
    }

    /// `log2 |G/H|`.
    pub fn quotient_bits(&self, g: &GroupSpec) -> f64 {
        ((g.order() / self.order()) as f64).log2()
    }
}

// Canonical subgroup order: by order, then lexicographically by members.
impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.order(), &self.members).cmp(&(other.order(), &other.members))
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// An addition-preserving permutation of the group elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    perm: Vec<usize>,
}

impl Automorphism {
    pub fn identity(g: &GroupSpec) -> Self {
        Automorphism { perm: (0..g.order()).collect() }
    }

    /// Wraps a permutation after checking that it is an automorphism of `g`.
    pub fn from_perm(g: &GroupSpec, perm: Vec<usize>) -> Result<Self> {
        let q = g.order();
        if perm.len() != q {
            return Err(Error::InvalidParameter(format!("permutation has length {}, expected {q}", perm.len())));
        }
        let mut seen = vec![false; q];
        for &p in &perm {
            if p >= q || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a bijection".into()));
            }
        }
        for a in 0..q {
            for b in 0..q {
                if perm[g.add(a, b)] != g.add(perm[a], perm[b]) {
                    return Err(Error::InvalidParameter(format!("not additive at ({a}, {b})")));
                }
            }
        }
        Ok(Automorphism { perm })
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.perm[x]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> Automorphism {
        let mut inv = vec![0; self.perm.len()];
        for (x, &y) in self.perm.iter().enumerate() {
            inv[y] = x;
        }
        Automorphism { perm: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `f(H)`.
    pub fn image_subgroup(&self, h: &Subgroup) -> Subgroup {
        let mut members: Vec<usize> = h.members.iter().map(|&x| self.perm[x]).collect();
        members.sort_unstable();
        Subgroup { members }
    }
}

/// The cosets of a subgroup: `coset_of[x]` is the label of `x + H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPartition {
    pub coset_of: Vec<usize>,
    pub num_cosets: usize,
}

impl CosetPartition {
    /// Members of each coset, in label order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_cosets];
        for (x, &c) in self.coset_of.iter().enumerate() {
            out[c].push(x);
        }
        out
    }
}

/// Fixed-capacity bitset over element indices.
#[derive(Clone, PartialEq, Eq, Hash)]
struct ElemSet {
    words: Vec<u64>,
}

impl ElemSet {
    fn empty(q: usize) -> Self {
        ElemSet { words: vec![0; q.div_ceil(64)] }
    }

    fn from_members(q: usize, members: &[usize]) -> Self {
        let mut s = Self::empty(q);
        for &m in members {
            s.insert(m);
        }
        s
    }

    fn insert(&mut self, x: usize) {
        self.words[x / 64] |= 1 << (x % 64);
    }

    fn contains(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    fn is_subset(&self, other: &ElemSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: every subset of G that contains 0 and is closed under addition.
    fn brute_subgroups(g: &GroupSpec) -> Vec<Vec<usize>> {
        let q = g.order();
        assert!(q <= 12);
        let mut out = Vec::new();
        for mask in 0u32..(1 << q) {
            if mask & 1 == 0 {
                continue;
            }
            let m: Vec<usize> = (0..q).filter(|&i| mask >> i & 1 == 1).collect();
            let closed = m.iter().all(|&a| m.iter().all(|&b| mask >> g.add(a, b) & 1 == 1));
            if closed {
                out.push(m);
            }
        }
        out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        out
    }

    // Oracle: every permutation of G fixing nothing in particular, filtered to additive bijections.
    fn brute_automorphisms(g: &GroupSpec) -> Vec<Vec<usize>> {
        fn rec(g: &GroupSpec, perm: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            let q = g.order();
            if perm.len() == q {
                let additive =
                    (0..q).all(|a| (0..q).all(|b| perm[g.add(a, b)] == g.add(perm[a], perm[b])));
                if additive {
                    out.push(perm.clone());
                }
                return;
            }
            for y in 0..q {
                if !used[y] {
                    used[y] = true;
                    perm.push(y);
                    rec(g, perm, used, out);
                    perm.pop();
                    used[y] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(g, &mut Vec::new(), &mut vec![false; g.order()], &mut out);
        out.sort();
        out
    }

    fn g(orders: &[usize]) -> GroupSpec {
        GroupSpec::new(orders).unwrap()
    }

    #[test]
    fn construction() {
        assert_eq!(g(&[2]).order(), 2);
        assert_eq!(g(&[2, 2]).order(), 4);
        assert_eq!(g(&[4, 3]).order(), 12);
        assert!(matches!(GroupSpec::new(&[1, 4]), Err(Error::InvalidGroup(_))));
        assert!(matches!(GroupSpec::new(&[]), Err(Error::InvalidGroup(_))));
        assert!(matches!(GroupSpec::new(&[8, 9]), Err(Error::GroupTooLarge { order: 72, bound: 64 })));
        assert!(GroupSpec::with_bound(&[8, 9], 100).is_ok());
    }

    #[test]
    fn addition() {
        let z4 = g(&[4]);
        assert_eq!(z4.add(3, 2), 1);
        let k4 = g(&[2, 2]);
        let a = k4.encode(&[1, 0]).unwrap();
        let b = k4.encode(&[1, 1]).unwrap();
        assert_eq!(k4.decode(k4.add(a, b)), vec![0, 1]);
        for x in 0..12 {
            assert_eq!(g(&[4, 3]).add(x, 0), x);
        }
        assert!(matches!(z4.checked_add(4, 0), Err(Error::ElementOutOfRange { .. })));
        assert_eq!(k4.format_element(2), "(1,0)");
        assert_eq!(format!("{}", g(&[4, 2])), "Z4xZ2");
    }

    #[test]
    fn subgroups_match_brute_force() {
        for orders in [&[2][..], &[3], &[4], &[2, 2], &[6], &[8], &[2, 4], &[2, 2, 2], &[3, 3], &[2, 6]] {
            let grp = g(orders);
            let got: Vec<Vec<usize>> =
                grp.enumerate_subgroups().iter().map(|h| h.members().to_vec()).collect();
            assert_eq!(got, brute_subgroups(&grp), "{orders:?}");
        }
        assert_eq!(g(&[5]).enumerate_subgroups().len(), 2);
        let z4: Vec<Vec<usize>> = g(&[4]).enumerate_subgroups().iter().map(|h| h.members().to_vec()).collect();
        assert_eq!(z4, vec![vec![0], vec![0, 2], vec![0, 1, 2, 3]]);
        assert_eq!(g(&[2, 2]).enumerate_subgroups().len(), 5);
    }

    #[test]
    fn automorphisms_match_brute_force() {
        for orders in [&[2][..], &[3], &[4], &[2, 2], &[6], &[8], &[2, 4], &[5]] {
            let grp = g(orders);
            let got: Vec<Vec<usize>> =
                grp.enumerate_automorphisms().iter().map(|f| f.perm().to_vec()).collect();
            assert_eq!(got, brute_automorphisms(&grp), "{orders:?}");
            assert!(grp.enumerate_automorphisms()[0].is_identity());
        }
        assert_eq!(g(&[2]).enumerate_automorphisms().len(), 1);
        assert_eq!(g(&[2, 2]).enumerate_automorphisms().len(), 6);
        let z4 = g(&[4]).enumerate_automorphisms();
        assert_eq!(z4.len(), 2);
        assert_eq!(z4[1].perm(), &[0, 3, 2, 1]);
    }

    #[test]
    fn general_linear_group_orders() {
        // |GL(r, 2)| = prod_{i<r} (2^r - 2^i)
        for r in 1..=3u32 {
            let expect: usize = (0..r).map(|i| (1usize << r) - (1usize << i)).product();
            assert_eq!(g(&vec![2; r as usize]).automorphism_count(), expect);
        }
        assert_eq!(g(&[2, 2, 2, 2]).automorphism_count(), 20160);
    }

    #[test]
    fn image_subgroups() {
        let k4 = g(&[2, 2]);
        let h = k4.subgroup_from_members(&[0, k4.encode(&[1, 0]).unwrap()]).unwrap();
        let id = Automorphism::identity(&k4);
        assert_eq!(id.image_subgroup(&h), h);
        let swap: Vec<usize> = (0..4)
            .map(|x| {
                let c = k4.decode(x);
                k4.encode(&[c[1], c[0]]).unwrap()
            })
            .collect();
        let swap = Automorphism::from_perm(&k4, swap).unwrap();
        let img = swap.image_subgroup(&h);
        assert_eq!(img.members(), &[0, k4.encode(&[0, 1]).unwrap()]);

        let z4 = g(&[4]);
        let triple = Automorphism::from_perm(&z4, vec![0, 3, 2, 1]).unwrap();
        let h = z4.subgroup_from_members(&[0, 2]).unwrap();
        assert_eq!(triple.image_subgroup(&h), h);
        assert!(Automorphism::from_perm(&z4, vec![0, 2, 1, 3]).is_err());
    }

    #[test]
    fn characteristic() {
        let k4 = g(&[2, 2]).characteristic_subgroups();
        assert_eq!(k4.iter().map(|h| h.order()).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(g(&[2, 3]).characteristic_subgroups().len(), 4);
        assert_eq!(g(&[6]).characteristic_subgroups().len(), 4);
        assert_eq!(g(&[4]).characteristic_subgroups().len(), 3);
        // Z2 x Z4: of the 8 subgroups, the characteristic ones are
        // {0}, <(0,2)>, <(1,0),(0,2)>, <(0,1)>+..., checked against brute force.
        let grp = g(&[2, 4]);
        let autos = grp.enumerate_automorphisms();
        let expect: Vec<Subgroup> = grp
            .enumerate_subgroups()
            .into_iter()
            .filter(|h| autos.iter().all(|f| f.image_subgroup(h) == *h))
            .collect();
        assert_eq!(grp.characteristic_subgroups(), expect);
    }

    #[test]
    fn products_of_elementary_groups() {
        // Z2^2 x Z3: characteristic subgroups are the 4 products of full/trivial factors.
        let grp = g(&[2, 2, 3]);
        let ch = grp.characteristic_subgroups();
        assert_eq!(ch.iter().map(|h| h.order()).collect::<Vec<_>>(), vec![1, 3, 4, 12]);
        let grp = g(&[3, 3, 2]);
        assert_eq!(grp.characteristic_subgroups().len(), 4);
        let grp = g(&[2, 3, 5]);
        assert_eq!(grp.characteristic_subgroups().len(), 8);
    }

    #[test]
    fn cosets() {
        let z4 = g(&[4]);
        let h = z4.subgroup_from_members(&[0, 2]).unwrap();
        let p = z4.coset_partition(&h);
        assert_eq!(p.num_cosets, 2);
        assert_eq!(p.classes(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(z4.coset_partition(&z4.full_subgroup()).num_cosets, 1);
        assert_eq!(z4.coset_partition(&z4.trivial_subgroup()).coset_of, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_non_subgroups() {
        let z4 = g(&[4]);
        assert!(z4.subgroup_from_members(&[0, 1]).is_err());
        assert!(z4.subgroup_from_members(&[1, 3]).is_err());
        assert!(z4.subgroup_from_members(&[0, 7]).is_err());
    }

    #[test]
    fn lattice_closed_under_automorphisms() {
        for orders in [&[2, 2][..], &[2, 4], &[4, 4], &[2, 2, 2], &[3, 3], &[2, 6]] {
            let grp = g(orders);
            let subs = grp.enumerate_subgroups();
            for f in grp.enumerate_automorphisms() {
                for h in &subs {
                    assert!(subs.contains(&f.image_subgroup(h)));
                }
            }
            let ch = grp.characteristic_subgroups();
            assert!(ch.iter().all(|h| subs.contains(h)));
            assert_eq!(ch.iter().filter(|h| h.order() == 1).count(), 1);
            assert_eq!(ch.iter().filter(|h| h.order() == grp.order()).count(), 1);
            for h in &subs {
                assert_eq!(grp.order() % h.order(), 0);
                assert!(grp.coset_partition(h).classes().iter().all(|c| c.len() == h.order()));
            }
        }
    }
}
