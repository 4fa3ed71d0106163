//! Finite groups as validated multiplication tables.
//!
//! A [`FiniteGroup`] is an explicit table over indices `0..order`. The
//! constructor locates the identity, computes inverses, and — for orders
//! up to [`FULL_ASSOCIATIVITY_ORDER`] — checks associativity on every
//! triple, reporting a witnessing triple on failure. Larger tables only
//! arise from closure constructions that are associative by construction.
//!
//! Each group carries a canonical generating set, chosen greedily (each
//! step adds the element whose addition grows the generated subgroup the
//! most, ties broken by least index), plus a spanning tree expressing
//! every element as a word in those generators. Homomorphism searches and
//! cocycle solvers work on generator values and use the tree to extend.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{LinalgError, MatP, Prime};

/// Full `O(n^3)` associativity checking is performed up to this order.
pub const FULL_ASSOCIATIVITY_ORDER: usize = 512;

/// Cap on the order of groups built by closure of matrix generators.
pub const MATRIX_CLOSURE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square: row {row} has length {len}, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("table entry {value} at ({row}, {col}) is out of range for order {order}")]
    EntryOutOfRange { row: usize, col: usize, value: u32, order: usize },
    #[error("no two-sided identity element exists")]
    MissingIdentity,
    #[error("element {element} has no two-sided inverse")]
    MissingInverse { element: u32 },
    #[error("associativity fails at ({a}, {b}, {c}): ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: u32, b: u32, c: u32 },
    #[error("map is not a homomorphism: images of {g} and {h} violate f(g*h) = f(g)*f(h)")]
    NotAHomomorphism { g: u32, h: u32 },
    #[error("generators do not reach element {element}")]
    NotGenerated { element: u32 },
    #[error("element set is not closed under multiplication: {a} * {b} lies outside")]
    NotClosed { a: u32, b: u32 },
    #[error("element index {index} is out of range for order {order}")]
    IndexOutOfRange { index: u32, order: usize },
    #[error("group order cap exceeded: closure passed {cap} elements")]
    OrderCapExceeded { cap: usize },
    #[error("invalid construction parameter: {0}")]
    InvalidParameter(String),
    #[error("homomorphism endpoints do not match the expected groups")]
    EndpointMismatch,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite group on indices `0..order` with an explicit multiplication
/// table, validated at construction.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    identity: u32,
    inv: Vec<u32>,
    labels: Option<Vec<String>>,
    generators: Vec<u32>,
    /// For each element, the spanning-tree edge `(parent, generator index)`
    /// with `element = parent * generators[gen]`; identity is the root.
    words: Vec<Option<(u32, usize)>>,
    fingerprint: u64,
}

fn fnv1a(data: impl Iterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for x in data {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.order == other.order && self.mul == other.mul
    }
}
impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Build and validate a group from a nested multiplication table.
    pub fn from_mul_table(table: Vec<Vec<u32>>) -> Result<Self, GroupError> {
        let order = table.len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::NotSquare { row: i, len: row.len(), order });
            }
        }
        let mut flat = Vec::with_capacity(order * order);
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v as usize >= order {
                    return Err(GroupError::EntryOutOfRange { row: i, col: j, value: v, order });
                }
                flat.push(v);
            }
        }
        Self::from_flat_table(order, flat, None)
    }

    pub fn from_mul_table_labeled(
        table: Vec<Vec<u32>>,
        labels: Vec<String>,
    ) -> Result<Self, GroupError> {
        let mut g = Self::from_mul_table(table)?;
        if labels.len() != g.order {
            return Err(GroupError::InvalidParameter(format!(
                "expected {} labels, got {}",
                g.order,
                labels.len()
            )));
        }
        g.labels = Some(labels);
        Ok(g)
    }

    fn from_flat_table(
        order: usize,
        mul: Vec<u32>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GroupError> {
        if order == 0 {
            return Err(GroupError::MissingIdentity);
        }
        debug_assert_eq!(mul.len(), order * order);
        let at = |a: usize, b: usize| mul[a * order + b] as usize;
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or(GroupError::MissingIdentity)? as u32;
        let mut inv = vec![0u32; order];
        for (g, slot) in inv.iter_mut().enumerate() {
            let h = (0..order)
                .find(|&h| at(g, h) == identity as usize && at(h, g) == identity as usize)
                .ok_or(GroupError::MissingInverse { element: g as u32 })?;
            *slot = h as u32;
        }
        if order <= FULL_ASSOCIATIVITY_ORDER {
            for a in 0..order {
                for b in 0..order {
                    let ab = at(a, b);
                    for c in 0..order {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(GroupError::NotAssociative {
                                a: a as u32,
                                b: b as u32,
                                c: c as u32,
                            });
                        }
                    }
                }
            }
        }
        let fingerprint = fnv1a(
            std::iter::once(order as u64).chain(mul.iter().map(|&x| x as u64)),
        );
        let mut g = FiniteGroup {
            order,
            mul,
            identity,
            inv,
            labels,
            generators: Vec::new(),
            words: Vec::new(),
            fingerprint,
        };
        let gens = g.greedy_generators();
        let words = g.spanning_words(&gens).expect("greedy generators generate");
        g.generators = gens;
        g.words = words;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn conjugate(&self, g: u32, a: u32) -> u32 {
        self.mul(self.mul(g, a), self.inv(g))
    }

    pub fn label(&self, g: u32) -> Option<&str> {
        self.labels.as_ref().map(|l| l[g as usize].as_str())
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The canonical greedy generating set (empty for the trivial group).
    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Spanning-tree edges for the canonical generators; see type docs.
    pub fn words(&self) -> &[Option<(u32, usize)>] {
        &self.words
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn element_order(&self, g: u32) -> usize {
        let mut n = 1;
        let mut x = g;
        while x != self.identity {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    pub fn exponent(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        (0..self.order as u32)
            .map(|g| self.element_order(g) as u64)
            .fold(1u64, |acc, o| acc / gcd(acc, o) * o)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order as u32)
            .all(|a| (0..self.order as u32).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Closure of a seed set under multiplication, as sorted indices.
    pub fn closure(&self, seed: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.order];
        seen[self.identity as usize] = true;
        let mut queue: Vec<u32> = vec![self.identity];
        for &s in seed {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push(s);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &s in seed {
                for y in [self.mul(x, s), self.mul(s, x)] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        queue.push(y);
                    }
                }
            }
        }
        let mut members: Vec<u32> = queue;
        members.sort_unstable();
        members
    }

    fn greedy_generators(&self) -> Vec<u32> {
        let mut gens: Vec<u32> = Vec::new();
        let mut span = self.closure(&[]);
        while span.len() < self.order {
            let mut best: Option<(usize, u32)> = None;
            for g in 0..self.order as u32 {
                if span.binary_search(&g).is_ok() {
                    continue;
                }
                let mut trial = gens.clone();
                trial.push(g);
                let grown = self.closure(&trial).len();
                if best.is_none_or(|(sz, _)| grown > sz) {
                    best = Some((grown, g));
                }
            }
            let (_, g) = best.expect("span is proper, so some element extends it");
            gens.push(g);
            let mut trial = gens.clone();
            trial.sort_unstable();
            span = self.closure(&trial);
        }
        gens
    }

    /// Breadth-first spanning tree over left-multiplication by `gens`.
    /// `None` entries mark unreachable elements (and the identity root).
    pub fn spanning_words(&self, gens: &[u32]) -> Option<Vec<Option<(u32, usize)>>> {
        let mut words: Vec<Option<(u32, usize)>> = vec![None; self.order];
        let mut seen = vec![false; self.order];
        seen[self.identity as usize] = true;
        let mut queue = vec![self.identity];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for (gi, &s) in gens.iter().enumerate() {
                let y = self.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    words[y as usize] = Some((x, gi));
                    queue.push(y);
                }
            }
        }
        if seen.iter().all(|&b| b) {
            Some(words)
        } else {
            None
        }
    }

    /// All distinct cyclic subgroups, ordered by (size, members).
    pub fn cyclic_subgroups(self: &Arc<Self>) -> Vec<Subgroup> {
        let mut sets: BTreeSet<Vec<u32>> = BTreeSet::new();
        for g in 0..self.order as u32 {
            let mut members = vec![self.identity];
            let mut x = g;
            while x != self.identity {
                members.push(x);
                x = self.mul(x, g);
            }
            members.sort_unstable();
            sets.insert(members);
        }
        let mut subs: Vec<Vec<u32>> = sets.into_iter().collect();
        subs.sort_by_key(|s| (s.len(), s.clone()));
        subs.into_iter()
            .map(|members| Subgroup { parent: Arc::clone(self), members })
            .collect()
    }

    /// The subgroup generated by the given elements.
    pub fn generated_subgroup(self: &Arc<Self>, gens: &[u32]) -> Result<Subgroup, GroupError> {
        for &g in gens {
            if g as usize >= self.order {
                return Err(GroupError::IndexOutOfRange { index: g, order: self.order });
            }
        }
        Ok(Subgroup { parent: Arc::clone(self), members: self.closure(gens) })
    }

    /// Validate an explicit member set as a subgroup.
    pub fn subgroup(self: &Arc<Self>, members: &[u32]) -> Result<Subgroup, GroupError> {
        let mut sorted: Vec<u32> = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &g in &sorted {
            if g as usize >= self.order {
                return Err(GroupError::IndexOutOfRange { index: g, order: self.order });
            }
        }
        if sorted.binary_search(&self.identity).is_err() {
            return Err(GroupError::MissingIdentity);
        }
        for &a in &sorted {
            for &b in &sorted {
                if sorted.binary_search(&self.mul(a, b)).is_err() {
                    return Err(GroupError::NotClosed { a, b });
                }
            }
        }
        Ok(Subgroup { parent: Arc::clone(self), members: sorted })
    }

    // ---- constructors ----

    pub fn trivial() -> Self {
        Self::from_flat_table(1, vec![0], None).expect("trivial table is a group")
    }

    /// Cyclic group of order `n`, elements `0..n` under addition mod `n`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidParameter("cyclic group order must be positive".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(((a + b) % n) as u32);
            }
        }
        Self::from_flat_table(n, mul, None)
    }

    /// Elementary abelian group of order `p^k`; element `i` has the
    /// little-endian base-`p` digits of `i` as its coordinates.
    pub fn elementary_abelian(p: u32, k: usize) -> Result<Self, GroupError> {
        let p = Prime::new(p)?;
        let order = (p.get() as u64).checked_pow(k as u32).filter(|&n| n <= MATRIX_CLOSURE_CAP as u64)
            .ok_or(GroupError::OrderCapExceeded { cap: MATRIX_CLOSURE_CAP })? as usize;
        let q = p.get() as usize;
        let mut mul = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                let (mut x, mut y, mut pw, mut out) = (a, b, 1usize, 0usize);
                for _ in 0..k {
                    out += ((x % q + y % q) % q) * pw;
                    x /= q;
                    y /= q;
                    pw *= q;
                }
                mul.push(out as u32);
            }
        }
        Self::from_flat_table(order, mul, None)
    }

    /// Direct product; the pair `(g, h)` gets index `g * |H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<Self, GroupError> {
        let order = g
            .order
            .checked_mul(h.order)
            .filter(|&n| n <= MATRIX_CLOSURE_CAP)
            .ok_or(GroupError::OrderCapExceeded { cap: MATRIX_CLOSURE_CAP })?;
        let mut mul = Vec::with_capacity(order * order);
        for a in 0..order {
            let (ag, ah) = ((a / h.order) as u32, (a % h.order) as u32);
            for b in 0..order {
                let (bg, bh) = ((b / h.order) as u32, (b % h.order) as u32);
                let pg = g.mul(ag, bg) as usize;
                let ph = h.mul(ah, bh) as usize;
                mul.push((pg * h.order + ph) as u32);
            }
        }
        let labels = match (&g.labels, &h.labels) {
            (Some(gl), Some(hl)) => {
                let mut out = Vec::with_capacity(order);
                for a in 0..order {
                    out.push(format!("({},{})", gl[a / h.order], hl[a % h.order]));
                }
                Some(out)
            }
            _ => None,
        };
        Self::from_flat_table(order, mul, labels)
    }

    /// Dihedral group of order `2n`: rotations `r^i` at indices `0..n`,
    /// reflections `r^i s` at indices `n..2n`.
    pub fn dihedral(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidParameter("dihedral parameter must be positive".into()));
        }
        let order = 2 * n;
        let idx = |i: usize, j: usize| (i % n) + n * (j % 2);
        let mut mul = vec![0u32; order * order];
        for i1 in 0..n {
            for j1 in 0..2 {
                for i2 in 0..n {
                    for j2 in 0..2 {
                        let i = if j1 == 0 { i1 + i2 } else { i1 + n - (i2 % n) };
                        mul[idx(i1, j1) * order + idx(i2, j2)] = idx(i, j1 + j2) as u32;
                    }
                }
            }
        }
        let labels = (0..order)
            .map(|e| {
                let (i, j) = (e % n, e / n);
                if j == 0 {
                    if i == 0 { "e".to_string() } else { format!("r{}", i) }
                } else if i == 0 {
                    "s".to_string()
                } else {
                    format!("r{}s", i)
                }
            })
            .collect();
        Self::from_flat_table(order, mul, Some(labels))
    }

    /// Quaternion group of order 8: `a^m b^l` with `a^4 = e`, `b^2 = a^2`,
    /// `b a b^{-1} = a^{-1}`; index `m + 4l`.
    pub fn quaternion8() -> Self {
        let order = 8;
        let mut mul = vec![0u32; order * order];
        for m1 in 0..4usize {
            for l1 in 0..2usize {
                for m2 in 0..4usize {
                    for l2 in 0..2usize {
                        let mut m = if l1 == 0 { m1 + m2 } else { m1 + 4 - m2 };
                        if l1 == 1 && l2 == 1 {
                            m += 2;
                        }
                        let l = (l1 + l2) % 2;
                        mul[(m1 + 4 * l1) * order + (m2 + 4 * l2)] = ((m % 4) + 4 * l) as u32;
                    }
                }
            }
        }
        let labels = ["e", "a", "a2", "a3", "b", "ab", "a2b", "a3b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::from_flat_table(order, mul, Some(labels)).expect("quaternion table is a group")
    }
}

/// A group whose elements carry faithful matrix labels over `F_p`.
#[derive(Debug, Clone)]
pub struct MatrixGroup {
    pub group: Arc<FiniteGroup>,
    pub matrices: Vec<MatP>,
}

/// Closure of a set of invertible matrices over `F_p` into a
/// [`FiniteGroup`] with matrix labels. Elements are indexed in
/// breadth-first discovery order from the identity.
pub fn from_matrix_generators(
    p: u32,
    dim: usize,
    gens: &[MatP],
    cap: usize,
) -> Result<MatrixGroup, GroupError> {
    let p = Prime::new(p)?;
    for m in gens {
        if m.rows() != dim || m.cols() != dim {
            return Err(GroupError::InvalidParameter(format!(
                "generator is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                dim,
                dim
            )));
        }
        if m.modulus() != p {
            return Err(GroupError::Linalg(LinalgError::ModulusMismatch(
                p.get(),
                m.modulus().get(),
            )));
        }
        crate::linalg::invert(m)?;
    }
    let mut mats: Vec<MatP> = vec![MatP::identity(p, dim)];
    let mut index: std::collections::HashMap<Vec<u32>, u32> = std::collections::HashMap::new();
    let key = |m: &MatP| -> Vec<u32> { m.to_nested().into_iter().flatten().collect() };
    index.insert(key(&mats[0]), 0);
    let mut head = 0;
    while head < mats.len() {
        let current = mats[head].clone();
        head += 1;
        for g in gens {
            let next = current.mul(g)?;
            let k = key(&next);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(k) {
                if mats.len() >= cap {
                    return Err(GroupError::OrderCapExceeded { cap });
                }
                e.insert(mats.len() as u32);
                mats.push(next);
            }
        }
    }
    let order = mats.len();
    let mut mul = vec![0u32; order * order];
    for a in 0..order {
        for b in 0..order {
            let prod = mats[a].mul(&mats[b])?;
            let &idx = index
                .get(&key(&prod))
                .ok_or(GroupError::NotClosed { a: a as u32, b: b as u32 })?;
            mul[a * order + b] = idx;
        }
    }
    let labels: Vec<String> = mats
        .iter()
        .map(|m| {
            let rows: Vec<String> = m
                .to_nested()
                .iter()
                .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
                .collect();
            format!("[{}]", rows.join(";"))
        })
        .collect();
    let group = FiniteGroup::from_flat_table(order, mul, Some(labels))?;
    Ok(MatrixGroup { group: Arc::new(group), matrices: mats })
}

/// A subgroup remembered as a sorted member list inside its parent.
#[derive(Debug, Clone)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<u32>,
}

impl Subgroup {
    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: u32) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn index_of(&self, g: u32) -> Option<usize> {
        self.members.binary_search(&g).ok()
    }

    pub fn is_whole_group(&self) -> bool {
        self.members.len() == self.parent.order()
    }

    /// Reindex the subgroup as a standalone group; the second component
    /// maps the new indices back to parent indices.
    pub fn as_group(&self) -> (FiniteGroup, Vec<u32>) {
        let n = self.members.len();
        let mut mul = vec![0u32; n * n];
        for (i, &a) in self.members.iter().enumerate() {
            for (j, &b) in self.members.iter().enumerate() {
                let prod = self.parent.mul(a, b);
                let k = self
                    .members
                    .binary_search(&prod)
                    .expect("subgroup is closed under multiplication");
                mul[i * n + j] = k as u32;
            }
        }
        let labels = self
            .parent
            .labels()
            .map(|ls| self.members.iter().map(|&m| ls[m as usize].clone()).collect());
        let g = FiniteGroup::from_flat_table(n, mul, labels)
            .expect("a closed subset of a group is a group");
        (g, self.members.clone())
    }
}

/// A validated homomorphism between two explicit groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    images: Vec<u32>,
}

impl GroupHom {
    /// Validate a full image table as a homomorphism.
    pub fn from_images(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        images: Vec<u32>,
    ) -> Result<Self, GroupError> {
        if images.len() != source.order() {
            return Err(GroupError::InvalidParameter(format!(
                "expected {} images, got {}",
                source.order(),
                images.len()
            )));
        }
        for &im in &images {
            if im as usize >= target.order() {
                return Err(GroupError::IndexOutOfRange { index: im, order: target.order() });
            }
        }
        for g in 0..source.order() as u32 {
            for h in 0..source.order() as u32 {
                let lhs = images[source.mul(g, h) as usize];
                let rhs = target.mul(images[g as usize], images[h as usize]);
                if lhs != rhs {
                    return Err(GroupError::NotAHomomorphism { g, h });
                }
            }
        }
        Ok(GroupHom { source, target, images })
    }

    /// Extend generator images along the source's word tree, then verify
    /// the homomorphism law on all (element, generator) pairs — which
    /// suffices because every element is a word in the generators.
    pub fn from_generator_images(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        gens: &[u32],
        gen_images: &[u32],
    ) -> Result<Self, GroupError> {
        if gens.len() != gen_images.len() {
            return Err(GroupError::InvalidParameter(format!(
                "{} generators but {} images",
                gens.len(),
                gen_images.len()
            )));
        }
        for &im in gen_images {
            if im as usize >= target.order() {
                return Err(GroupError::IndexOutOfRange { index: im, order: target.order() });
            }
        }
        let words = source
            .spanning_words(gens)
            .ok_or_else(|| {
                let span = source.closure(gens);
                let missing = (0..source.order() as u32)
                    .find(|g| span.binary_search(g).is_err())
                    .unwrap_or(0);
                GroupError::NotGenerated { element: missing }
            })?;
        let images = extend_by_words(&source, &target, &words, gen_images);
        for g in 0..source.order() as u32 {
            for (gi, &s) in gens.iter().enumerate() {
                let lhs = images[source.mul(g, s) as usize];
                let rhs = target.mul(images[g as usize], gen_images[gi]);
                if lhs != rhs {
                    return Err(GroupError::NotAHomomorphism { g, h: s });
                }
            }
        }
        Ok(GroupHom { source, target, images })
    }

    pub fn identity_on(group: Arc<FiniteGroup>) -> Self {
        let images = (0..group.order() as u32).collect();
        GroupHom { source: Arc::clone(&group), target: group, images }
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    #[inline]
    pub fn apply(&self, g: u32) -> u32 {
        self.images[g as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.order()];
        for &im in &self.images {
            seen[im as usize] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.order()];
        for &im in &self.images {
            if seen[im as usize] {
                return false;
            }
            seen[im as usize] = true;
        }
        true
    }

    pub fn kernel(&self) -> Subgroup {
        let members: Vec<u32> = (0..self.source.order() as u32)
            .filter(|&g| self.apply(g) == self.target.identity())
            .collect();
        Subgroup { parent: Arc::clone(&self.source), members }
    }

    pub fn image(&self) -> Subgroup {
        let mut members: Vec<u32> = self.images.clone();
        members.sort_unstable();
        members.dedup();
        Subgroup { parent: Arc::clone(&self.target), members }
    }

    /// `self` after `other` (i.e. `g ↦ self(other(g))`).
    pub fn compose(&self, other: &GroupHom) -> Result<GroupHom, GroupError> {
        if other.target.fingerprint() != self.source.fingerprint() {
            return Err(GroupError::EndpointMismatch);
        }
        let images = other.images.iter().map(|&g| self.apply(g)).collect();
        Ok(GroupHom {
            source: Arc::clone(&other.source),
            target: Arc::clone(&self.target),
            images,
        })
    }

    /// Restrict to a subgroup of the source, reindexed via `as_group`.
    pub fn restrict_to(&self, sub: &Subgroup) -> Result<(GroupHom, Vec<u32>), GroupError> {
        if sub.parent().fingerprint() != self.source.fingerprint() {
            return Err(GroupError::EndpointMismatch);
        }
        let (small, map) = sub.as_group();
        let images = map.iter().map(|&m| self.apply(m)).collect();
        let hom = GroupHom {
            source: Arc::new(small),
            target: Arc::clone(&self.target),
            images,
        };
        Ok((hom, map))
    }
}

/// Evaluate generator images over a spanning tree: `f(parent * s) =
/// f(parent) * f(s)` in breadth-first order.
pub fn extend_by_words(
    source: &FiniteGroup,
    target: &FiniteGroup,
    words: &[Option<(u32, usize)>],
    gen_images: &[u32],
) -> Vec<u32> {
    let mut images = vec![target.identity(); source.order()];
    // Order of evaluation: repeatedly sweep until fixed; tree depth is at
    // most |G|, and parents are discovered before children in BFS order,
    // but word arrays may be supplied in any indexing, so sweep by depth.
    let mut done = vec![false; source.order()];
    done[source.identity() as usize] = true;
    let mut remaining = source.order() - 1;
    while remaining > 0 {
        let before = remaining;
        for g in 0..source.order() {
            if done[g] {
                continue;
            }
            if let Some((parent, gi)) = words[g] {
                if done[parent as usize] {
                    images[g] = target.mul(images[parent as usize], gen_images[gi]);
                    done[g] = true;
                    remaining -= 1;
                }
            }
        }
        assert!(remaining < before, "word tree contains a cycle or a gap");
    }
    images
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_group_basics() {
        let g = FiniteGroup::cyclic(6).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.mul(4, 5), 3);
        assert_eq!(g.inv(2), 4);
        assert_eq!(g.element_order(2), 3);
        assert_eq!(g.exponent(), 6);
        assert!(g.is_abelian());
        assert_eq!(g.generators().len(), 1);
    }

    #[test]
    fn cyclic_subgroups_of_z4() {
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let subs = g.cyclic_subgroups();
        let orders: Vec<usize> = subs.iter().map(Subgroup::order).collect();
        assert_eq!(orders, vec![1, 2, 4]);
    }

    #[test]
    fn klein_four_has_four_cyclic_subgroups() {
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap());
        assert_eq!(g.cyclic_subgroups().len(), 4);
        assert_eq!(g.generators().len(), 2);
    }

    #[test]
    fn rejects_non_associative_table() {
        // Latin square with identity whose triple products fail.
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        match FiniteGroup::from_mul_table(t) {
            Err(GroupError::NotAssociative { .. }) => {}
            other => panic!("expected associativity failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_identity() {
        let t = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(FiniteGroup::from_mul_table(t).unwrap_err(), GroupError::MissingIdentity);
    }

    #[test]
    fn dihedral_group_relations() {
        let d4 = FiniteGroup::dihedral(4).unwrap();
        assert_eq!(d4.order(), 8);
        assert!(!d4.is_abelian());
        let r = 1u32;
        let s = 4u32;
        assert_eq!(d4.element_order(r), 4);
        assert_eq!(d4.element_order(s), 2);
        // s r s^{-1} = r^{-1}
        assert_eq!(d4.conjugate(s, r), d4.inv(r));
    }

    #[test]
    fn quaternion_group_relations() {
        let q8 = FiniteGroup::quaternion8();
        assert_eq!(q8.order(), 8);
        assert!(!q8.is_abelian());
        let a = 1u32;
        let b = 4u32;
        assert_eq!(q8.element_order(a), 4);
        assert_eq!(q8.element_order(b), 4);
        assert_eq!(q8.mul(b, b), q8.mul(a, a));
        assert_eq!(q8.conjugate(b, a), q8.inv(a));
        // Exactly one element of order 2.
        let count = (0..8u32).filter(|&g| q8.element_order(g) == 2).count();
        assert_eq!(count, 1);
    }

    #[test]
    fn hom_from_generator_images_and_kernel() {
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let f = GroupHom::from_generator_images(Arc::clone(&z4), Arc::clone(&z2), &[1], &[1])
            .unwrap();
        assert_eq!(f.images(), &[0, 1, 0, 1]);
        assert!(f.is_surjective());
        assert_eq!(f.kernel().members(), &[0, 2]);
        // Oracle: validate against all pairs directly.
        for g in 0..4 {
            for h in 0..4 {
                assert_eq!(f.apply(z4.mul(g, h)), z2.mul(f.apply(g), f.apply(h)));
            }
        }
    }

    #[test]
    fn hom_rejects_invalid_generator_assignment() {
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let z3 = Arc::new(FiniteGroup::cyclic(3).unwrap());
        // 1 has order 4 in Z/4 but any nonzero image has order 3.
        let err = GroupHom::from_generator_images(z4, z3, &[1], &[1]).unwrap_err();
        match err {
            GroupError::NotAHomomorphism { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn matrix_closure_unitriangular_3x3() {
        let p = Prime::new(2).unwrap();
        let e12 = MatP::from_nested(p, &[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let e23 = MatP::from_nested(p, &[vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]]).unwrap();
        let mg = from_matrix_generators(2, 3, &[e12, e23], 1000).unwrap();
        assert_eq!(mg.group.order(), 8);
        // Labels are pairwise distinct (the representation is faithful).
        let mut labels: Vec<&str> = (0..8).map(|i| mg.group.label(i).unwrap()).collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 8);
        // Multiplication table matches matrix multiplication.
        for a in 0..8u32 {
            for b in 0..8u32 {
                let prod = mg.matrices[a as usize].mul(&mg.matrices[b as usize]).unwrap();
                assert_eq!(prod, mg.matrices[mg.group.mul(a, b) as usize]);
            }
        }
    }

    #[test]
    fn matrix_closure_respects_cap() {
        let p = Prime::new(5).unwrap();
        let g = MatP::from_nested(p, &[vec![2]]).unwrap();
        match from_matrix_generators(5, 1, &[g], 3) {
            Err(GroupError::OrderCapExceeded { cap: 3 }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn subgroup_reindexing_round_trips() {
        let d4 = Arc::new(FiniteGroup::dihedral(4).unwrap());
        let sub = d4.generated_subgroup(&[2, 4]).unwrap();
        assert_eq!(sub.order(), 4);
        let (small, map) = sub.as_group();
        for i in 0..small.order() as u32 {
            for j in 0..small.order() as u32 {
                let parent_prod = d4.mul(map[i as usize], map[j as usize]);
                assert_eq!(map[small.mul(i, j) as usize], parent_prod);
            }
        }
    }

    #[test]
    fn subgroup_validation_rejects_non_closed_sets() {
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        match z4.subgroup(&[0, 1]) {
            Err(GroupError::NotClosed { .. }) => {}
            other => panic!("expected closure failure, got {other:?}"),
        }
    }

    #[test]
    fn direct_product_structure() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let g = FiniteGroup::direct_product(&z2, &z3).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.exponent(), 6);
        assert!(g.is_abelian());
        // (1,0)*(0,2) = (1,2) -> index 1*3+2 = 5
        assert_eq!(g.mul(3, 2), 5);
    }

    #[test]
    fn greedy_generators_generate_and_are_canonical() {
        for g in [
            FiniteGroup::cyclic(8).unwrap(),
            FiniteGroup::dihedral(4).unwrap(),
            FiniteGroup::quaternion8(),
            FiniteGroup::elementary_abelian(3, 2).unwrap(),
        ] {
            let gens = g.generators().to_vec();
            assert_eq!(g.closure(&gens).len(), g.order());
            // Determinism: rebuilding the same group yields the same set.
            let again = FiniteGroup::from_flat_table(g.order, g.mul.clone(), None).unwrap();
            assert_eq!(again.generators(), gens.as_slice());
        }
    }

    #[test]
    fn exponent_of_quaternion_and_dihedral() {
        assert_eq!(FiniteGroup::quaternion8().exponent(), 4);
        assert_eq!(FiniteGroup::dihedral(4).unwrap().exponent(), 4);
        assert_eq!(FiniteGroup::elementary_abelian(2, 3).unwrap().exponent(), 2);
    }
}
