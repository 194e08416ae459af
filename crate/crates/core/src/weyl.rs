//! Root system and Weyl group combinatorics of `GL_m`.
//!
//! Indices are 0-based throughout: the root `Root { i, j }` is the 1-based
//! `alpha_{i+1, j+1}`, the simple root with index `k` is `(k, k+1)`, and
//! permutations act on `0..m`. Serialized forms convert to 1-based.

use std::collections::BTreeSet;
use std::fmt;

/// A root `alpha_ij` of `GL_m` relative to the diagonal torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Self {
        assert_ne!(i, j, "alpha_ii is not a root");
        Root { i, j }
    }

    /// The simple root `(k, k+1)`.
    pub fn simple(k: usize) -> Self {
        Root { i: k, j: k + 1 }
    }

    pub fn is_positive(self) -> bool {
        self.i < self.j
    }

    pub fn neg(self) -> Self {
        Root { i: self.j, j: self.i }
    }

    /// `j - i` for positive roots; the number of simple roots in the sum.
    pub fn height(self) -> usize {
        self.i.abs_diff(self.j)
    }

    /// Index `k` when this is the simple root `(k, k+1)`.
    pub fn simple_index(self) -> Option<usize> {
        (self.j == self.i + 1).then_some(self.i)
    }

    /// `alpha + beta` when it is a root.
    pub fn add(self, other: Root) -> Option<Root> {
        if self.j == other.i && self.i != other.j {
            Some(Root::new(self.i, other.j))
        } else if other.j == self.i && other.i != self.j {
            Some(Root::new(other.i, self.j))
        } else {
            None
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}{}", self.i + 1, self.j + 1)
    }
}

/// All positive roots of `GL_m`, ordered by (height, row).
pub fn positive_roots(m: usize) -> Vec<Root> {
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for h in 1..m {
        for i in 0..m - h {
            out.push(Root::new(i, i + h));
        }
    }
    out
}

/// All roots of `GL_m`.
pub fn all_roots(m: usize) -> Vec<Root> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out.push(Root::new(i, j));
            }
        }
    }
    out
}

/// `true` when a set of roots is closed under addition (inside the root system).
pub fn is_closed(set: &BTreeSet<Root>) -> bool {
    set.iter()
        .all(|&a| set.iter().all(|&b| a.add(b).map_or(true, |c| set.contains(&c))))
}

/// A permutation of `0..m` in one-line notation: `w(k) = self.0[k]`.
///
/// Composition is as functions: `(w1 * w2)(k) = w1(w2(k))`, matching the
/// product of permutation matrices with `w e_k = e_{w(k)}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(m: usize) -> Self {
        Perm((0..m).collect())
    }

    /// Builds a permutation from 0-based one-line notation.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &v in &images {
            if v >= m || seen[v] {
                return None;
            }
            seen[v] = true;
        }
        Some(Perm(images))
    }

    /// The adjacent transposition `s_k = (k, k+1)`.
    pub fn simple(m: usize, k: usize) -> Self {
        assert!(k + 1 < m);
        let mut v: Vec<usize> = (0..m).collect();
        v.swap(k, k + 1);
        Perm(v)
    }

    /// The longest element `k -> m-1-k`.
    pub fn longest(m: usize) -> Self {
        Perm((0..m).rev().collect())
    }

    pub fn from_word(m: usize, word: &[usize]) -> Self {
        word.iter()
            .fold(Perm::identity(m), |acc, &k| acc.compose(&Perm::simple(m, k)))
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &v)| k == v)
    }

    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.m(), other.m());
        Perm(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.m()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v] = k;
        }
        Perm(inv)
    }

    /// `w alpha_ij = alpha_{w(i) w(j)}`.
    pub fn act(&self, root: Root) -> Root {
        Root::new(self.0[root.i], self.0[root.j])
    }

    /// `N(w) = { alpha > 0 | w alpha < 0 }`.
    pub fn inversion_set(&self) -> BTreeSet<Root> {
        positive_roots(self.m())
            .into_iter()
            .filter(|&r| !self.act(r).is_positive())
            .collect()
    }

    pub fn length(&self) -> usize {
        let v = &self.0;
        let mut n = 0;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                if v[a] > v[b] {
                    n += 1;
                }
            }
        }
        n
    }

    /// `l(s_k w) < l(w)`.
    pub fn has_left_descent(&self, k: usize) -> bool {
        let inv = self.inverse();
        inv.0[k] > inv.0[k + 1]
    }

    /// `l(w s_k) < l(w)`.
    pub fn has_right_descent(&self, k: usize) -> bool {
        self.0[k] > self.0[k + 1]
    }

    /// Lexicographically smallest reduced word `[k1, k2, ...]` with
    /// `w = s_k1 s_k2 ...`.
    pub fn reduced_word(&self) -> Vec<usize> {
        let m = self.m();
        let mut word = Vec::with_capacity(self.length());
        let mut cur = self.clone();
        while !cur.is_identity() {
            let k = (0..m - 1)
                .find(|&k| cur.has_left_descent(k))
                .expect("non-identity permutation has a left descent");
            word.push(k);
            cur = Perm::simple(m, k).compose(&cur);
        }
        word
    }

    /// Membership in the standard parabolic subgroup `W_P`.
    pub fn in_parabolic(&self, p: SimpleSubset) -> bool {
        let blocks = p.blocks(self.m());
        (0..self.m()).all(|k| blocks[k] == blocks[self.0[k]])
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "]")
    }
}

/// A subset of the simple roots, stored as a bitmask over simple indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleSubset(u64);

impl SimpleSubset {
    pub fn empty() -> Self {
        SimpleSubset(0)
    }

    pub fn full(m: usize) -> Self {
        SimpleSubset(if m <= 1 { 0 } else { (1u64 << (m - 1)) - 1 })
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        SimpleSubset(it.into_iter().fold(0, |acc, k| acc | (1 << k)))
    }

    pub fn single(k: usize) -> Self {
        SimpleSubset(1 << k)
    }

    pub fn contains(self, k: usize) -> bool {
        self.0 >> k & 1 == 1
    }

    pub fn insert(&mut self, k: usize) {
        self.0 |= 1 << k;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: SimpleSubset) -> Self {
        SimpleSubset(self.0 & other.0)
    }

    /// `P^ = Sigma - P`.
    pub fn complement(self, m: usize) -> Self {
        SimpleSubset(Self::full(m).0 & !self.0)
    }

    pub fn indices(self, m: usize) -> Vec<usize> {
        (0..m.saturating_sub(1)).filter(|&k| self.contains(k)).collect()
    }

    /// Block label of each position `0..m`: positions `k, k+1` share a block
    /// iff `k` is in the subset.
    pub fn blocks(self, m: usize) -> Vec<usize> {
        let mut out = vec![0; m];
        for k in 1..m {
            out[k] = if self.contains(k - 1) { out[k - 1] } else { out[k - 1] + 1 };
        }
        out
    }

    /// Membership of a root in `Phi_P`.
    pub fn spans(self, root: Root) -> bool {
        let (a, b) = (root.i.min(root.j), root.i.max(root.j));
        (a..b).all(|k| self.contains(k))
    }
}

/// `(Phi_P^+, Psi_P^+)`.
pub fn root_sets(m: usize, p: SimpleSubset) -> (BTreeSet<Root>, BTreeSet<Root>) {
    positive_roots(m).into_iter().partition(|&r| p.spans(r))
}

/// `w = w_P * w'` with `w_P` in `W_P` and `w'` the minimal element of `W_P w`.
pub fn min_decomp_right(p: SimpleSubset, w: &Perm) -> (Perm, Perm) {
    // Left multiplication by W_P permutes values inside each block; the
    // minimal representative lists every block's values in increasing order.
    let m = w.m();
    let blocks = p.blocks(m);
    let mut minimal = vec![0; m];
    let nblocks = blocks.last().map_or(0, |b| b + 1);
    for b in 0..nblocks {
        let values: Vec<usize> = (0..m).filter(|&v| blocks[v] == b).collect();
        let positions: Vec<usize> = (0..m).filter(|&k| blocks[w.apply(k)] == b).collect();
        for (pos, val) in positions.into_iter().zip(values) {
            minimal[pos] = val;
        }
    }
    let minimal = Perm(minimal);
    let wp = w.compose(&minimal.inverse());
    (wp, minimal)
}

/// `w = w' * w_P` with `w'` the minimal element of `w W_P`.
pub fn min_decomp_left(w: &Perm, p: SimpleSubset) -> (Perm, Perm) {
    let (wp_inv, minimal_inv) = min_decomp_right(p, &w.inverse());
    (minimal_inv.inverse(), wp_inv.inverse())
}

/// `true` when `w` is the minimal element of `W_P w`.
pub fn is_min_right(p: SimpleSubset, w: &Perm) -> bool {
    (0..w.m().saturating_sub(1)).all(|k| !p.contains(k) || !w.has_left_descent(k))
}

/// `true` when `w` is the minimal element of `w W_P`.
pub fn is_min_left(w: &Perm, p: SimpleSubset) -> bool {
    (0..w.m().saturating_sub(1)).all(|k| !p.contains(k) || !w.has_right_descent(k))
}

/// A monomial `tau = prod tau_k^{a_k}` in the commutative monoid generated by
/// `tau_k = diag(1 (k+1 times), varpi, ..., varpi)`, `k = 0..m-2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tau(Vec<u32>);

impl Tau {
    pub fn zero(m: usize) -> Self {
        Tau(vec![0; m.saturating_sub(1)])
    }

    pub fn from_exponents(a: Vec<u32>) -> Self {
        Tau(a)
    }

    pub fn generator(m: usize, k: usize) -> Self {
        let mut t = Tau::zero(m);
        t.0[k] = 1;
        t
    }

    /// `tau_P = prod_{k in P} tau_k`.
    pub fn of_subset(m: usize, p: SimpleSubset) -> Self {
        let mut t = Tau::zero(m);
        for k in p.indices(m) {
            t.0[k] = 1;
        }
        t
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len() + 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `P(tau) = { k | a_k = 0 }`.
    pub fn p_set(&self) -> SimpleSubset {
        SimpleSubset::from_indices((0..self.0.len()).filter(|&k| self.0[k] == 0))
    }

    /// Diagonal valuations `(b_0, ..., b_{m-1})` with `b_0 = 0` and
    /// `tau = diag(varpi^{b_0}, ..., varpi^{b_{m-1}})`.
    pub fn diagonal(&self) -> Vec<i64> {
        let mut b = Vec::with_capacity(self.m());
        let mut acc = 0i64;
        b.push(0);
        for &a in &self.0 {
            acc += a as i64;
            b.push(acc);
        }
        b
    }

    pub fn mul(&self, other: &Tau) -> Tau {
        Tau(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when it stays in the monoid.
    pub fn checked_div(&self, other: &Tau) -> Option<Tau> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Tau)
    }
}

/// Signed exponents of a diagonal `varpi`-power matrix in the basis
/// `tau_0 = varpi I` and `tau_1, ..., tau_{m-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTau {
    pub central: i64,
    pub a: Vec<i64>,
}

impl SignedTau {
    pub fn from_diagonal(c: &[i64]) -> Self {
        SignedTau { central: c[0], a: c.windows(2).map(|w| w[1] - w[0]).collect() }
    }

    pub fn diagonal(&self) -> Vec<i64> {
        let mut out = vec![self.central];
        for &x in &self.a {
            out.push(out.last().unwrap() + x);
        }
        out
    }

    pub fn add(&self, other: &SignedTau) -> SignedTau {
        SignedTau {
            central: self.central + other.central,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    /// Exponents of `tau_Q = prod_{h in Q} tau_h` for a subset of `{0..m-1}`
    /// (`0` is the central `tau_0`, `h >= 1` is `tau_h`).
    pub fn of_index_set(m: usize, q: &BTreeSet<usize>) -> Self {
        let mut s = SignedTau { central: 0, a: vec![0; m - 1] };
        for &h in q {
            if h == 0 {
                s.central += 1;
            } else if h < m {
                s.a[h - 1] += 1;
            }
        }
        s
    }
}

/// Exponent vector of `w tau w^{-1}`.
pub fn tau_conj(w: &Perm, tau: &Tau) -> SignedTau {
    let b = tau.diagonal();
    let mut c = vec![0; b.len()];
    for (k, &bk) in b.iter().enumerate() {
        c[w.apply(k)] = bk;
    }
    SignedTau::from_diagonal(&c)
}

/// The sets `A, B, P', Q` attached to `(w, alpha_k)`, 1-based:
/// `A, P'` inside `{1..m}`, `B, Q` inside `{0..m-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PqSets {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    /// `P(w, alpha)`, as 0-based simple indices.
    pub p: SimpleSubset,
    /// `Q(w, alpha)`, where `0` stands for `tau_0`.
    pub q: BTreeSet<usize>,
}

pub fn pq_sets(w: &Perm, k: usize) -> PqSets {
    let m = w.m();
    // alpha = alpha_{i,i+1} with i = k+1 (1-based); A = { w(j) | i+1 <= j <= m }.
    let a: BTreeSet<usize> = (k + 1..m).map(|j| w.apply(j) + 1).collect();
    let b: BTreeSet<usize> = a.iter().map(|&x| x - 1).collect();
    let p_prime: BTreeSet<usize> = a.difference(&b).copied().collect();
    let p = SimpleSubset::from_indices(p_prime.iter().filter(|&&h| h < m).map(|&h| h - 1));
    let q = b.difference(&a).copied().collect();
    PqSets { a, b, p, q }
}

/// Every element of `S_m`, in lexicographic order of one-line notation.
pub fn all_perms(m: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(Perm(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Every subset of the simple roots of `GL_m`.
pub fn all_subsets(m: usize) -> Vec<SimpleSubset> {
    let n = m.saturating_sub(1);
    (0..1u64 << n).map(SimpleSubset).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(one_based: &[usize]) -> Perm {
        Perm::from_images(one_based.iter().map(|v| v - 1).collect()).unwrap()
    }

    #[test]
    fn act_on_roots() {
        let id = Perm::identity(3);
        assert_eq!(id.act(Root::new(0, 1)), Root::new(0, 1));
        assert_eq!(Perm::simple(2, 0).act(Root::new(0, 1)), Root::new(1, 0));
        assert_eq!(Perm::simple(3, 1).act(Root::new(0, 1)), Root::new(0, 2));
    }

    #[test]
    fn inversion_sets_small() {
        assert!(Perm::identity(4).inversion_set().is_empty());
        for k in 0..3 {
            let s = Perm::simple(4, k);
            assert_eq!(s.inversion_set(), BTreeSet::from([Root::simple(k)]));
        }
        // brute force: w0 in S3 inverts every positive root
        let w0 = Perm::longest(3);
        let expected: BTreeSet<Root> = positive_roots(3).into_iter().collect();
        assert_eq!(w0.inversion_set(), expected);
    }

    /// Breadth-first search over words in the simple reflections.
    fn bfs_lengths(m: usize) -> std::collections::HashMap<Perm, usize> {
        let mut dist = std::collections::HashMap::new();
        let mut frontier = vec![Perm::identity(m)];
        dist.insert(Perm::identity(m), 0);
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for w in &frontier {
                for k in 0..m - 1 {
                    let v = w.compose(&Perm::simple(m, k));
                    if !dist.contains_key(&v) {
                        dist.insert(v.clone(), d);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    #[test]
    fn length_matches_minimal_word_search() {
        for m in 1..=5 {
            let dist = bfs_lengths(m);
            for w in all_perms(m) {
                assert_eq!(w.length(), dist[&w], "{w}");
            }
            assert_eq!(Perm::longest(m).length(), m * (m - 1) / 2);
        }
    }

    #[test]
    fn reduced_words() {
        assert!(Perm::identity(3).reduced_word().is_empty());
        assert_eq!(Perm::simple(3, 0).reduced_word(), vec![0]);
        assert_eq!(Perm::longest(3).reduced_word(), vec![0, 1, 0]);
        for w in all_perms(4) {
            let word = w.reduced_word();
            assert_eq!(word.len(), w.length());
            assert_eq!(Perm::from_word(4, &word), w);
        }
    }

    #[test]
    fn lexicographically_smallest_word_by_exhaustion() {
        // enumerate all words of length l(w) and keep the smallest that evaluates to w
        let m = 4;
        for w in all_perms(m) {
            let l = w.length();
            let mut best: Option<Vec<usize>> = None;
            let total = (m - 1).pow(l as u32);
            for code in 0..total {
                let mut word = Vec::with_capacity(l);
                let mut c = code;
                for _ in 0..l {
                    word.push(c % (m - 1));
                    c /= m - 1;
                }
                word.reverse();
                if Perm::from_word(m, &word) == w && best.as_ref().map_or(true, |b| word < *b) {
                    best = Some(word);
                }
            }
            assert_eq!(w.reduced_word(), best.unwrap());
        }
    }

    #[test]
    fn min_decomp_examples() {
        let m = 3;
        let w = perm(&[2, 3, 1]);
        let (wp, w2) = min_decomp_right(SimpleSubset::empty(), &w);
        assert!(wp.is_identity());
        assert_eq!(w2, w);

        let p = SimpleSubset::single(0);
        let s1 = Perm::simple(m, 0);
        let (wp, w2) = min_decomp_right(p, &s1);
        assert_eq!(wp, s1);
        assert!(w2.is_identity());

        // s1 s2 = s1 * s2 with s2 minimal in W_{a12} s1 s2
        let s2 = Perm::simple(m, 1);
        let (wp, w2) = min_decomp_right(p, &s1.compose(&s2));
        assert_eq!((wp, w2), (s1.clone(), s2.clone()));

        // mirror images
        let (w2, wp) = min_decomp_left(&w, SimpleSubset::empty());
        assert_eq!((w2, wp.is_identity()), (w.clone(), true));
        let (w2, wp) = min_decomp_left(&s1, p);
        assert!(w2.is_identity());
        assert_eq!(wp, s1);
        let (w2, wp) = min_decomp_left(&s2.compose(&s1), p);
        assert_eq!((w2, wp), (s2, s1));
    }

    #[test]
    fn min_decomp_is_unique_minimum() {
        for m in 1..=4 {
            let perms = all_perms(m);
            for p in all_subsets(m) {
                let wp_elems: Vec<Perm> = perms.iter().filter(|v| v.in_parabolic(p)).cloned().collect();
                for w in &perms {
                    let (wp, min) = min_decomp_right(p, w);
                    assert!(wp.in_parabolic(p));
                    assert_eq!(wp.compose(&min), *w);
                    assert_eq!(w.length(), wp.length() + min.length());
                    assert!(is_min_right(p, &min));
                    for x in &wp_elems {
                        let v = x.compose(w);
                        if v != min {
                            assert!(v.length() > min.length());
                        }
                    }
                    let (minl, wpl) = min_decomp_left(w, p);
                    assert_eq!(minl.compose(&wpl), *w);
                    assert!(wpl.in_parabolic(p));
                    assert!(is_min_left(&minl, p));
                }
            }
        }
    }

    #[test]
    fn root_set_examples() {
        let (phi, psi) = root_sets(3, SimpleSubset::single(0));
        assert_eq!(phi, BTreeSet::from([Root::new(0, 1)]));
        assert_eq!(psi, BTreeSet::from([Root::new(0, 2), Root::new(1, 2)]));
        let (_, psi) = root_sets(4, SimpleSubset::full(4));
        assert!(psi.is_empty());
        // Psi for P = alpha^: { alpha_hk | h <= i < k }
        let m = 5;
        for k in 0..m - 1 {
            let (_, psi) = root_sets(m, SimpleSubset::single(k).complement(m));
            let expected: BTreeSet<Root> = positive_roots(m)
                .into_iter()
                .filter(|r| r.i <= k && k < r.j)
                .collect();
            assert_eq!(psi, expected);
        }
    }

    #[test]
    fn root_sets_intersection_union_identities() {
        let m = 5;
        for p in all_subsets(m) {
            let (phi, psi) = root_sets(m, p);
            let comp = p.complement(m).indices(m);
            let mut inter: BTreeSet<Root> = positive_roots(m).into_iter().collect();
            let mut union = BTreeSet::new();
            for k in comp {
                let (phi_k, psi_k) = root_sets(m, SimpleSubset::single(k).complement(m));
                inter = inter.intersection(&phi_k).copied().collect();
                union.extend(psi_k);
            }
            assert_eq!(phi, inter);
            assert_eq!(psi, union);
        }
    }

    #[test]
    fn pq_set_examples() {
        for m in 2..=4 {
            for k in 0..m - 1 {
                let r = pq_sets(&Perm::identity(m), k);
                assert!(r.p.is_empty());
                assert_eq!(r.q, BTreeSet::from([k + 1]));
            }
        }
        let r = pq_sets(&Perm::simple(2, 0), 0);
        assert_eq!(r.p, SimpleSubset::single(0));
        assert_eq!(r.q, BTreeSet::from([0]));

        let r = pq_sets(&Perm::longest(3), 0);
        assert_eq!(r.a, BTreeSet::from([1, 2]));
        assert_eq!(r.b, BTreeSet::from([0, 1]));
        assert_eq!(r.p, SimpleSubset::single(1));
        assert_eq!(r.q, BTreeSet::from([0]));
    }

    #[test]
    fn tau_conj_examples() {
        let t = Tau::generator(3, 1);
        assert_eq!(tau_conj(&Perm::identity(3), &t), SignedTau { central: 0, a: vec![0, 1] });
        let t = Tau::generator(2, 0);
        assert_eq!(tau_conj(&Perm::simple(2, 0), &t), SignedTau { central: 1, a: vec![-1] });
        let t = Tau::generator(3, 0);
        // w0 diag(1, v, v) w0 = diag(v, v, 1) = tau_0 tau_2^{-1}
        assert_eq!(tau_conj(&Perm::longest(3), &t), SignedTau { central: 1, a: vec![0, -1] });
    }

    #[test]
    fn pq_identity_holds() {
        for m in 2..=5 {
            for w in all_perms(m) {
                for k in 0..m - 1 {
                    let r = pq_sets(&w, k);
                    let lhs = SignedTau::from_diagonal(
                        &Tau::of_subset(m, r.p).diagonal(),
                    )
                    .add(&tau_conj(&w, &Tau::generator(m, k)));
                    assert_eq!(lhs, SignedTau::of_index_set(m, &r.q), "{w} k={k}");
                }
            }
        }
    }

    #[test]
    fn tau_of_min_coset_and_disjointness() {
        // w minimal in W_P w implies P n P(w, alpha) = 0
        for m in 2..=5 {
            for p in all_subsets(m) {
                for w in all_perms(m).into_iter().filter(|w| is_min_right(p, w)) {
                    for k in 0..m - 1 {
                        assert!(p.intersect(pq_sets(&w, k).p).is_empty());
                    }
                }
            }
        }
    }
}
