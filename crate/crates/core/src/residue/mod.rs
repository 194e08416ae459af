//! Linear algebra in `GL_m(k_D)`, the finite quotient `K / K^1`.
//!
//! Elements of `K` only matter modulo `K^1`, so unipotent and torus factors of
//! normal words are stored through their images over the residue field.

mod field;

pub use field::{Fe, Field, MAX_Q};

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{HeckeError, Result};
use crate::weyl::{is_closed, positive_roots, Perm, Root};

/// An `m x m` matrix over `F_q`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueMatrix {
    m: usize,
    data: Vec<Fe>,
}

impl ResidueMatrix {
    pub fn zero(m: usize) -> Self {
        ResidueMatrix { m, data: vec![0; m * m] }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Self::zero(m);
        for k in 0..m {
            a.data[k * m + k] = 1;
        }
        a
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Self {
        let m = rows.len();
        assert!(rows.iter().all(|r| r.len() == m), "matrix must be square");
        ResidueMatrix { m, data: rows.concat() }
    }

    pub fn permutation(w: &Perm) -> Self {
        let m = w.m();
        let mut a = Self::zero(m);
        for c in 0..m {
            a.set(w.apply(c), c, 1);
        }
        a
    }

    pub fn diagonal(d: &[Fe]) -> Self {
        let mut a = Self::zero(d.len());
        for (k, &x) in d.iter().enumerate() {
            a.set(k, k, x);
        }
        a
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.m + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Fe) {
        self.data[r * self.m + c] = x;
    }

    pub fn rows(&self) -> Vec<Vec<Fe>> {
        self.data.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &Self, k: &Field) -> Self {
        let m = self.m;
        let mut out = Self::zero(m);
        for r in 0..m {
            for l in 0..m {
                let a = self.get(r, l);
                if a == 0 {
                    continue;
                }
                for c in 0..m {
                    let b = other.get(l, c);
                    if b != 0 {
                        let cur = out.get(r, c);
                        out.set(r, c, k.add(cur, k.mul(a, b)));
                    }
                }
            }
        }
        out
    }

    pub fn inverse(&self, k: &Field) -> Result<Self> {
        let m = self.m;
        let mut a = self.clone();
        let mut inv = Self::identity(m);
        for col in 0..m {
            let piv = (col..m)
                .find(|&r| a.get(r, col) != 0)
                .ok_or_else(|| HeckeError::Arithmetic("singular residue matrix".into()))?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let s = k.inv(a.get(col, col))?;
            a.scale_row(col, s, k);
            inv.scale_row(col, s, k);
            for r in 0..m {
                let f = a.get(r, col);
                if r != col && f != 0 {
                    let nf = k.neg(f);
                    a.add_row_multiple(r, col, nf, k);
                    inv.add_row_multiple(r, col, nf, k);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self, k: &Field) -> bool {
        self.inverse(k).is_ok()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.m {
                self.data.swap(a * self.m + c, b * self.m + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: Fe, k: &Field) {
        for c in 0..self.m {
            let v = self.get(r, c);
            self.set(r, c, k.mul(v, s));
        }
    }

    /// `row[dst] += f * row[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, f: Fe, k: &Field) {
        for c in 0..self.m {
            let v = k.add(self.get(dst, c), k.mul(f, self.get(src, c)));
            self.set(dst, c, v);
        }
    }

    /// `col[dst] += f * col[src]`.
    fn add_col_multiple(&mut self, dst: usize, src: usize, f: Fe, k: &Field) {
        for r in 0..self.m {
            let v = k.add(self.get(r, dst), k.mul(f, self.get(r, src)));
            self.set(r, dst, v);
        }
    }

    /// Nonzero off-diagonal positions, as roots.
    pub fn support(&self) -> BTreeSet<Root> {
        let mut s = BTreeSet::new();
        for r in 0..self.m {
            for c in 0..self.m {
                if r != c && self.get(r, c) != 0 {
                    s.insert(Root::new(r, c));
                }
            }
        }
        s
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.m)
    }

    /// `w M w^{-1}`: the entry at `(i, j)` moves to `(w(i), w(j))`.
    pub fn conj_by_perm(&self, w: &Perm) -> Self {
        let mut out = Self::zero(self.m);
        for r in 0..self.m {
            for c in 0..self.m {
                out.set(w.apply(r), w.apply(c), self.get(r, c));
            }
        }
        out
    }

    /// Residue of `d M d^{-1}` for `d = diag(varpi^{b_0}, ..., varpi^{b_{m-1}})`
    /// where conjugation by `varpi` acts on `k_D` as `x -> x^{p^sigma}`.
    ///
    /// The entry at `(j, l)` picks up `varpi^{b_j - b_l}` and the twist
    /// `sigma^{b_l}`; a positive shift sends it into the congruence subgroup,
    /// so it vanishes in the residue.
    pub fn conj_by_varpi_diag(&self, b: &[i64], sigma: i64, k: &Field) -> Result<Self> {
        let mut out = Self::zero(self.m);
        for r in 0..self.m {
            for c in 0..self.m {
                let x = self.get(r, c);
                if x == 0 {
                    continue;
                }
                let shift = b[r] - b[c];
                if shift < 0 {
                    return Err(HeckeError::NegativeShift(format!(
                        "entry ({}, {}) with varpi-shift {shift}",
                        r + 1,
                        c + 1
                    )));
                }
                if shift == 0 {
                    out.set(r, c, k.frobenius_pow(x, sigma * b[c]));
                }
            }
        }
        Ok(out)
    }

    /// `t M t^{-1}` for a diagonal `t`.
    pub fn conj_by_torus(&self, t: &Torus, k: &Field) -> Result<Self> {
        let mut out = self.clone();
        for r in 0..self.m {
            for c in 0..self.m {
                let x = self.get(r, c);
                if x != 0 && r != c {
                    out.set(r, c, k.mul(k.mul(t.0[r], x), k.inv(t.0[c])?));
                }
            }
        }
        Ok(out)
    }

    pub fn random_invertible<R: Rng>(m: usize, k: &Field, rng: &mut R) -> Self {
        loop {
            let mut a = Self::zero(m);
            for x in a.data.iter_mut() {
                *x = rng.gen_range(0..k.q()) as Fe;
            }
            if a.is_invertible(k) {
                return a;
            }
        }
    }

    /// Every element of `GL_m(F_q)` (only sensible for tiny `m, q`).
    pub fn all_invertible(m: usize, k: &Field) -> Vec<Self> {
        let q = k.q() as usize;
        let total = q.pow((m * m) as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut a = Self::zero(m);
            let mut c = code;
            for x in a.data.iter_mut() {
                *x = (c % q) as Fe;
                c /= q;
            }
            if a.is_invertible(k) {
                out.push(a);
            }
        }
        out
    }
}

/// A unipotent matrix supported on roots of a single sign; the image of an
/// element of `U_S` for a closed set `S` of roots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unipotent(ResidueMatrix);

impl Unipotent {
    pub fn identity(m: usize) -> Self {
        Unipotent(ResidueMatrix::identity(m))
    }

    /// The root-subgroup element `e_root(x) = I + x E_root`.
    pub fn elementary(m: usize, root: Root, x: Fe) -> Self {
        let mut a = ResidueMatrix::identity(m);
        a.set(root.i, root.j, x);
        Unipotent(a)
    }

    /// `I + sum x E_root`; the roots must all have the same sign.
    pub fn from_entries(m: usize, entries: &[(Root, Fe)]) -> Result<Self> {
        let mut a = ResidueMatrix::identity(m);
        for &(r, x) in entries {
            if r.i >= m || r.j >= m {
                return Err(HeckeError::Support(format!("root {r} out of range for m = {m}")));
            }
            a.set(r.i, r.j, x);
        }
        Self::from_matrix(a)
    }

    pub fn from_matrix(a: ResidueMatrix) -> Result<Self> {
        let m = a.m();
        if (0..m).any(|k| a.get(k, k) != 1) {
            return Err(HeckeError::Support("unipotent matrix needs unit diagonal".into()));
        }
        let s = a.support();
        if s.iter().any(|r| r.is_positive()) && s.iter().any(|r| !r.is_positive()) {
            return Err(HeckeError::Support("mixed-sign support".into()));
        }
        Ok(Unipotent(a))
    }

    pub fn matrix(&self) -> &ResidueMatrix {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.m()
    }

    pub fn get(&self, root: Root) -> Fe {
        self.0.get(root.i, root.j)
    }

    pub fn support(&self) -> BTreeSet<Root> {
        self.0.support()
    }

    pub fn entries(&self) -> Vec<(Root, Fe)> {
        self.support().into_iter().map(|r| (r, self.get(r))).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    pub fn is_upper(&self) -> bool {
        self.support().iter().all(|r| r.is_positive())
    }

    pub fn mul(&self, other: &Unipotent, k: &Field) -> Result<Unipotent> {
        let s = self.support();
        let t = other.support();
        let pos = s.iter().chain(&t).any(|r| r.is_positive());
        let neg = s.iter().chain(&t).any(|r| !r.is_positive());
        if pos && neg {
            return Err(HeckeError::Support("product of upper and lower unipotents".into()));
        }
        Ok(Unipotent(self.0.mul(&other.0, k)))
    }

    pub fn inverse(&self, k: &Field) -> Unipotent {
        Unipotent(self.0.inverse(k).expect("unipotent matrices are invertible"))
    }

    pub fn conj_by_perm(&self, w: &Perm) -> Unipotent {
        Unipotent(self.0.conj_by_perm(w))
    }

    pub fn conj_by_varpi_diag(&self, b: &[i64], sigma: i64, k: &Field) -> Result<Unipotent> {
        Ok(Unipotent(self.0.conj_by_varpi_diag(b, sigma, k)?))
    }

    pub fn conj_by_torus(&self, t: &Torus, k: &Field) -> Result<Unipotent> {
        Ok(Unipotent(self.0.conj_by_torus(t, k)?))
    }

    /// Entrywise `x -> sigma^e(x)`.
    pub fn twist(&self, e: i64, k: &Field) -> Unipotent {
        let m = self.m();
        let mut a = self.0.clone();
        for r in 0..m {
            for c in 0..m {
                a.set(r, c, k.frobenius_pow(self.0.get(r, c), e));
            }
        }
        Unipotent(a)
    }

    /// Random element of `U_S` for a set `S` of positive roots.
    pub fn random_on<R: Rng>(m: usize, support: &BTreeSet<Root>, k: &Field, rng: &mut R) -> Unipotent {
        let entries: Vec<(Root, Fe)> =
            support.iter().map(|&r| (r, rng.gen_range(0..k.q()) as Fe)).collect();
        Unipotent::from_entries(m, &entries).expect("single-sign support")
    }

    /// Every element of `U_S` (`q^|S|` of them).
    pub fn enumerate_on(m: usize, support: &BTreeSet<Root>, k: &Field) -> Vec<Unipotent> {
        let roots: Vec<Root> = support.iter().copied().collect();
        let q = k.q() as usize;
        let total = q.pow(roots.len() as u32);
        (0..total)
            .map(|code| {
                let mut c = code;
                let entries: Vec<(Root, Fe)> = roots
                    .iter()
                    .map(|&r| {
                        let x = (c % q) as Fe;
                        c /= q;
                        (r, x)
                    })
                    .collect();
                Unipotent::from_entries(m, &entries).expect("single-sign support")
            })
            .collect()
    }
}

/// A diagonal matrix with nonzero residue entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Torus(Vec<Fe>);

impl Torus {
    pub fn identity(m: usize) -> Self {
        Torus(vec![1; m])
    }

    pub fn new(entries: Vec<Fe>) -> Result<Self> {
        if entries.contains(&0) {
            return Err(HeckeError::Arithmetic("torus entries must be nonzero".into()));
        }
        Ok(Torus(entries))
    }

    pub fn entries(&self) -> &[Fe] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&x| x == 1)
    }

    pub fn matrix(&self) -> ResidueMatrix {
        ResidueMatrix::diagonal(&self.0)
    }

    pub fn mul(&self, other: &Torus, k: &Field) -> Torus {
        Torus(self.0.iter().zip(&other.0).map(|(&a, &b)| k.mul(a, b)).collect())
    }

    pub fn inverse(&self, k: &Field) -> Torus {
        Torus(self.0.iter().map(|&a| k.inv(a).expect("nonzero")).collect())
    }

    /// `w t w^{-1}`: the entry at position `j` moves to `w(j)`.
    pub fn conj_by_perm(&self, w: &Perm) -> Torus {
        let mut out = self.0.clone();
        for (j, &x) in self.0.iter().enumerate() {
            out[w.apply(j)] = x;
        }
        Torus(out)
    }

    /// Residue of `d t d^{-1}` with `d = diag(varpi^{b_j})`: entry `j` becomes
    /// `sigma^{b_j}(t_j)`.
    pub fn conj_by_varpi_diag(&self, b: &[i64], sigma: i64, k: &Field) -> Torus {
        Torus(self.0.iter().zip(b).map(|(&x, &bj)| k.frobenius_pow(x, sigma * bj)).collect())
    }

    pub fn random<R: Rng>(m: usize, k: &Field, rng: &mut R) -> Torus {
        Torus((0..m).map(|_| rng.gen_range(1..k.q()) as Fe).collect())
    }
}

/// Factors `u = u1 * u2` with `u1` supported on `s1` and `u2` on `s2`.
///
/// The sets must be disjoint, of a single sign, and closed together with their
/// union; `u` must be supported on the union.
pub fn factor_unipotent(
    u: &Unipotent,
    s1: &BTreeSet<Root>,
    s2: &BTreeSet<Root>,
    k: &Field,
) -> Result<(Unipotent, Unipotent)> {
    let m = u.m();
    let union: BTreeSet<Root> = s1.union(s2).copied().collect();
    if s1.intersection(s2).next().is_some() {
        return Err(HeckeError::Support("factor sets overlap".into()));
    }
    if !u.support().is_subset(&union) {
        return Err(HeckeError::Support("element not supported on the union".into()));
    }
    if !is_closed(s1) || !is_closed(s2) || !is_closed(&union) {
        return Err(HeckeError::Support("factor sets are not closed".into()));
    }
    let positive = union.iter().all(|r| r.is_positive());
    if !positive {
        if union.iter().any(|r| r.is_positive()) {
            return Err(HeckeError::Support("factor sets of mixed sign".into()));
        }
        // conjugate by the longest element to reduce to positive roots
        let w0 = Perm::longest(m);
        let flip = |s: &BTreeSet<Root>| s.iter().map(|&r| w0.act(r)).collect::<BTreeSet<_>>();
        let (a, b) = factor_unipotent(&u.conj_by_perm(&w0), &flip(s1), &flip(s2), k)?;
        return Ok((a.conj_by_perm(&w0), b.conj_by_perm(&w0)));
    }
    // Left elimination in order of increasing height: zeroing the entry at a
    // root of height h only disturbs entries of larger height.
    let mut rest = u.0.clone();
    let mut left = Unipotent::identity(m);
    for root in positive_roots(m) {
        if !s1.contains(&root) {
            continue;
        }
        let x = rest.get(root.i, root.j);
        if x == 0 {
            continue;
        }
        // rest <- e(-x) rest, so u = left * e(x) * rest
        rest.add_row_multiple(root.i, root.j, k.neg(x), k);
        left = left.mul(&Unipotent::elementary(m, root, x), k)?;
    }
    let right = Unipotent(rest);
    if !right.support().is_subset(s2) || !left.support().is_subset(s1) {
        return Err(HeckeError::Support("factorization infeasible for these root sets".into()));
    }
    Ok((left, right))
}

/// `s_k e_k(x) s_k = v3 * s_k * t' * v4` in `GL_m(F_q)`, with
/// `v3 = v4 = e_k(x^{-1})` and `t' = diag(.., x, -x^{-1}, ..)` at `k, k+1`.
pub fn sl2_bruhat(m: usize, x: Fe, kidx: usize, k: &Field) -> Result<(Unipotent, Torus, Unipotent)> {
    if x == 0 {
        return Err(HeckeError::Arithmetic("sl2_bruhat needs a nonzero entry".into()));
    }
    let xi = k.inv(x)?;
    let v = Unipotent::elementary(m, Root::simple(kidx), xi);
    let mut t = vec![1; m];
    t[kidx] = x;
    t[kidx + 1] = k.neg(xi);
    Ok((v.clone(), Torus(t), v))
}

/// Bruhat decomposition `g = u1 * t * w * u2` in `GL_m(F_q)`, normalized so
/// that `u1` lies in `U n w U^- w^{-1}`.
pub fn residue_bruhat(g: &ResidueMatrix, k: &Field) -> Result<(Unipotent, Torus, Perm, Unipotent)> {
    let m = g.m();
    let mut cur = g.clone();
    let mut left = ResidueMatrix::identity(m);
    let mut right = ResidueMatrix::identity(m);
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut images = vec![usize::MAX; m];
    let mut diag = vec![0; m];
    while let Some(&r) = rows.last() {
        // bottom remaining row, leftmost nonzero entry among remaining columns
        let c = *cols
            .iter()
            .find(|&&c| cur.get(r, c) != 0)
            .ok_or_else(|| HeckeError::Arithmetic("singular residue matrix".into()))?;
        let piv = cur.get(r, c);
        let pinv = k.inv(piv)?;
        for &r2 in &rows {
            if r2 != r && cur.get(r2, c) != 0 {
                let f = k.neg(k.mul(cur.get(r2, c), pinv));
                cur.add_row_multiple(r2, r, f, k);
                left.add_row_multiple(r2, r, f, k);
            }
        }
        for &c2 in &cols {
            if c2 != c && cur.get(r, c2) != 0 {
                let f = k.neg(k.mul(cur.get(r, c2), pinv));
                cur.add_col_multiple(c2, c, f, k);
                right.add_col_multiple(c2, c, f, k);
            }
        }
        images[c] = r;
        diag[r] = piv;
        rows.pop();
        cols.retain(|&x| x != c);
    }
    let w = Perm::from_images(images).expect("pivots form a permutation");
    let t = Torus(diag);
    let u1 = Unipotent::from_matrix(left.inverse(k)?)?;
    let u2 = Unipotent::from_matrix(right.inverse(k)?)?;
    // u1 = a * b with a in U n wU^-w^{-1} and b in U n wUw^{-1}; move b right.
    let winv = w.inverse();
    let (s1, s2): (BTreeSet<Root>, BTreeSet<Root>) =
        positive_roots(m).into_iter().partition(|&r| !winv.act(r).is_positive());
    let (a, b) = factor_unipotent(&u1, &s1, &s2, k)?;
    let moved = b.conj_by_torus(&t.inverse(k), k)?.conj_by_perm(&winv);
    let u2 = moved.mul(&u2, k)?;
    Ok((a, t, w, u2))
}

/// `u1 * t * w * u2` as a matrix.
pub fn bruhat_product(u1: &Unipotent, t: &Torus, w: &Perm, u2: &Unipotent, k: &Field) -> ResidueMatrix {
    u1.matrix()
        .mul(&t.matrix(), k)
        .mul(&ResidueMatrix::permutation(w), k)
        .mul(u2.matrix(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::all_perms;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u32) -> Field {
        match q {
            2 => Field::new(2, 1).unwrap(),
            3 => Field::new(3, 1).unwrap(),
            4 => Field::new(2, 2).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn unipotent_products() {
        let k = f(3);
        let a = Unipotent::elementary(2, Root::new(0, 1), 1);
        let b = Unipotent::elementary(2, Root::new(0, 1), 2);
        assert_eq!(a.mul(&b, &k).unwrap(), Unipotent::elementary(2, Root::new(0, 1), 0));
        let k2 = f(2);
        let p = Unipotent::elementary(3, Root::new(0, 1), 1)
            .mul(&Unipotent::elementary(3, Root::new(1, 2), 1), &k2)
            .unwrap();
        assert_eq!(
            p.entries(),
            vec![(Root::new(0, 1), 1), (Root::new(0, 2), 1), (Root::new(1, 2), 1)]
        );
        assert!(p.mul(&p.inverse(&k2), &k2).unwrap().is_identity());
        let lower = Unipotent::elementary(3, Root::new(1, 0), 1);
        assert!(p.mul(&lower, &k2).is_err());
    }

    #[test]
    fn factor_example_m3() {
        let k = f(3);
        let (a, bb, c) = (1, 2, 2);
        let u = Unipotent::from_entries(3, &[(Root::new(0, 1), a), (Root::new(0, 2), bb), (Root::new(1, 2), c)])
            .unwrap();
        let s1 = BTreeSet::from([Root::new(0, 1)]);
        let s2 = BTreeSet::from([Root::new(0, 2), Root::new(1, 2)]);
        let (u1, u2) = factor_unipotent(&u, &s1, &s2, &k).unwrap();
        assert_eq!(u1, Unipotent::elementary(3, Root::new(0, 1), a));
        // e13(B - ac) * e23(c)
        let expected = Unipotent::elementary(3, Root::new(0, 2), k.sub(bb, k.mul(a, c)))
            .mul(&Unipotent::elementary(3, Root::new(1, 2), c), &k)
            .unwrap();
        assert_eq!(u2, expected);
        assert_eq!(u1.mul(&u2, &k).unwrap(), u);

        let all: BTreeSet<Root> = positive_roots(3).into_iter().collect();
        let (x, y) = factor_unipotent(&u, &all, &BTreeSet::new(), &k).unwrap();
        assert_eq!((x, y.is_identity()), (u.clone(), true));
        let id = Unipotent::identity(3);
        let (x, y) = factor_unipotent(&id, &s1, &s2, &k).unwrap();
        assert!(x.is_identity() && y.is_identity());

        let bad = BTreeSet::from([Root::new(0, 1), Root::new(1, 2)]);
        assert!(factor_unipotent(&u, &bad, &BTreeSet::from([Root::new(0, 2)]), &k).is_err());
    }

    #[test]
    fn factor_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, q) in [(2, 2), (3, 2), (3, 3), (4, 2), (4, 3)] {
            let k = f(q);
            let all: BTreeSet<Root> = positive_roots(m).into_iter().collect();
            for w in all_perms(m) {
                let (s1, s2): (BTreeSet<Root>, BTreeSet<Root>) =
                    positive_roots(m).into_iter().partition(|&r| !w.act(r).is_positive());
                for _ in 0..1000 / all_perms(m).len() + 1 {
                    let u = Unipotent::random_on(m, &all, &k, &mut rng);
                    let (a, b) = factor_unipotent(&u, &s1, &s2, &k).unwrap();
                    assert_eq!(a.mul(&b, &k).unwrap(), u);
                    let (a, b) = factor_unipotent(&u, &s2, &s1, &k).unwrap();
                    assert_eq!(a.mul(&b, &k).unwrap(), u);
                }
            }
        }
    }

    #[test]
    fn factor_lower_via_longest_element() {
        let k = f(3);
        let u = Unipotent::from_entries(3, &[(Root::new(1, 0), 1), (Root::new(2, 0), 2), (Root::new(2, 1), 1)])
            .unwrap();
        let s1 = BTreeSet::from([Root::new(1, 0)]);
        let s2 = BTreeSet::from([Root::new(2, 0), Root::new(2, 1)]);
        let (a, b) = factor_unipotent(&u, &s1, &s2, &k).unwrap();
        assert_eq!(a.mul(&b, &k).unwrap(), u);
        assert!(a.support().is_subset(&s1) && b.support().is_subset(&s2));
    }

    #[test]
    fn perm_conjugation() {
        let x = 1;
        let e12 = Unipotent::elementary(2, Root::new(0, 1), x);
        assert_eq!(e12.conj_by_perm(&Perm::identity(2)), e12);
        assert_eq!(e12.conj_by_perm(&Perm::simple(2, 0)), Unipotent::elementary(2, Root::new(1, 0), x));
        let e13 = Unipotent::elementary(3, Root::new(0, 2), x);
        assert_eq!(e13.conj_by_perm(&Perm::simple(3, 1)), Unipotent::elementary(3, Root::new(0, 1), x));
        // group action, and agreement with permutation matrices
        let k = f(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all: BTreeSet<Root> = positive_roots(3).into_iter().collect();
        for w1 in all_perms(3) {
            for w2 in all_perms(3) {
                let u = Unipotent::random_on(3, &all, &k, &mut rng);
                assert_eq!(
                    u.conj_by_perm(&w2).conj_by_perm(&w1),
                    u.conj_by_perm(&w1.compose(&w2))
                );
                let pm = ResidueMatrix::permutation(&w1);
                let direct = pm.mul(u.matrix(), &k).mul(&pm.inverse(&k).unwrap(), &k);
                assert_eq!(&direct, u.conj_by_perm(&w1).matrix());
            }
        }
    }

    #[test]
    fn varpi_conjugation() {
        let k = f(2);
        // tau_1 e21(x) tau_1^{-1} lands in K^1
        let e21 = Unipotent::elementary(2, Root::new(1, 0), 1);
        assert!(e21.conj_by_varpi_diag(&[0, 1], 0, &k).unwrap().is_identity());
        // the other direction leaves the integral model
        let e12 = Unipotent::elementary(2, Root::new(0, 1), 1);
        assert!(matches!(e12.conj_by_varpi_diag(&[0, 1], 0, &k), Err(HeckeError::NegativeShift(_))));
        // shift zero, exponents zero
        let e = Unipotent::elementary(3, Root::new(0, 1), 1);
        assert_eq!(e.conj_by_varpi_diag(&[0, 0, 1], 0, &k).unwrap(), e);
        // split case tau_0 acts trivially
        let k4 = f(4);
        let u = Unipotent::elementary(3, Root::new(0, 2), 2);
        assert_eq!(u.conj_by_varpi_diag(&[1, 1, 1], 0, &k4).unwrap(), u);
        // non-split: tau_0 twists by Frobenius, and it is a bijection
        let tw = u.conj_by_varpi_diag(&[1, 1, 1], 1, &k4).unwrap();
        assert_eq!(tw.get(Root::new(0, 2)), k4.frobenius(2));
        assert_eq!(tw.conj_by_varpi_diag(&[-1, -1, -1], 1, &k4).unwrap(), u);
    }

    #[test]
    fn sl2_closed_form() {
        for q in [2, 3, 4] {
            let k = f(q);
            for x in k.units() {
                for m in 2..=3 {
                    for kidx in 0..m - 1 {
                        let (v3, t, v4) = sl2_bruhat(m, x, kidx, &k).unwrap();
                        let s = ResidueMatrix::permutation(&Perm::simple(m, kidx));
                        let lhs = s
                            .mul(Unipotent::elementary(m, Root::simple(kidx), x).matrix(), &k)
                            .mul(&s, &k);
                        let rhs = v3.matrix().mul(&s, &k).mul(&t.matrix(), &k).mul(v4.matrix(), &k);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
        let k = f(3);
        let (v3, t, _) = sl2_bruhat(2, 2, 0, &k).unwrap();
        assert_eq!(v3, Unipotent::elementary(2, Root::new(0, 1), 2));
        assert_eq!(t.entries(), &[2, 1]);
        assert!(sl2_bruhat(2, 0, 0, &k).is_err());
    }

    #[test]
    fn bruhat_examples() {
        let k = f(3);
        let (u1, t, w, u2) = residue_bruhat(&ResidueMatrix::identity(3), &k).unwrap();
        assert!(u1.is_identity() && t.is_identity() && w.is_identity() && u2.is_identity());
        let d = ResidueMatrix::diagonal(&[2, 1, 2]);
        let (u1, t, w, u2) = residue_bruhat(&d, &k).unwrap();
        assert!(u1.is_identity() && w.is_identity() && u2.is_identity());
        assert_eq!(t.entries(), &[2, 1, 2]);
        // lower elementary
        for x in k.units() {
            let low = ResidueMatrix::from_rows(&[vec![1, 0], vec![x, 1]]);
            let (u1, t, w, u2) = residue_bruhat(&low, &k).unwrap();
            let xi = k.inv(x).unwrap();
            assert_eq!(u1, Unipotent::elementary(2, Root::new(0, 1), xi));
            assert_eq!(u2, Unipotent::elementary(2, Root::new(0, 1), xi));
            assert_eq!(w, Perm::simple(2, 0));
            assert_eq!(t.entries(), &[k.neg(xi), x]);
        }
    }

    #[test]
    fn bruhat_round_trip() {
        let k2 = f(2);
        let all = ResidueMatrix::all_invertible(2, &k2);
        assert_eq!(all.len(), 6);
        for g in all {
            let (u1, t, w, u2) = residue_bruhat(&g, &k2).unwrap();
            assert_eq!(bruhat_product(&u1, &t, &w, &u2, &k2), g);
        }
        let k3 = f(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let g = ResidueMatrix::random_invertible(3, &k3, &mut rng);
            let (u1, t, w, u2) = residue_bruhat(&g, &k3).unwrap();
            assert_eq!(bruhat_product(&u1, &t, &w, &u2, &k3), g);
            assert!(u1.is_upper() && u2.is_upper());
            let winv = w.inverse();
            assert!(u1.support().iter().all(|&r| !winv.act(r).is_positive()));
        }
    }

    #[test]
    fn unipotent_intersection_counts() {
        // |(U^- n wUw^{-1})(F_q)| = q^{l(w)}
        for q in [2, 3] {
            let k = f(q);
            for m in 1..=4 {
                for w in all_perms(m) {
                    let pm = ResidueMatrix::permutation(&w);
                    let pinv = pm.inverse(&k).unwrap();
                    let upper: BTreeSet<Root> = positive_roots(m).into_iter().collect();
                    let count = Unipotent::enumerate_on(m, &upper, &k)
                        .into_iter()
                        .filter(|u| {
                            let c = pm.mul(u.matrix(), &k).mul(&pinv, &k);
                            c.support().iter().all(|r| !r.is_positive())
                        })
                        .count();
                    assert_eq!(count, (q as usize).pow(w.length() as u32), "m={m} w={w}");
                }
            }
        }
    }
}
