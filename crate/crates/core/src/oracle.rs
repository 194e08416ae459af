//! Brute-force convolution in `H(G, K^1)` for split `G = GL_m(F_q((t)))`.
//!
//! Left `K^1`-cosets `zK^1` are labelled canonically, double cosets are
//! enumerated as orbits of `K^1` acting on the left, and structure constants
//! are literal coset counts. Precision is tracked per matrix; every label is
//! computed from data known exactly, or the call fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{HeckeError, Result};
use num_bigint::BigInt;

use crate::presentation::{AlgebraElement, HeckeAlgebra, NormalWord};
use crate::residue::{Fe, Field, ResidueMatrix, Torus, Unipotent};
use crate::weyl::{Perm, Root, Tau};

/// Largest orbit the oracle will enumerate.
pub const MAX_ORBIT: usize = 200_000;

// Truncated power series over F_q: coefficient vectors, `a[d]` of `t^d`.

fn pval(a: &[Fe]) -> Option<usize> {
    a.iter().position(|&c| c != 0)
}

fn pmul(a: &[Fe], b: &[Fe], n: usize, k: &Field) -> Vec<Fe> {
    let mut out = vec![0; n.min(a.len() + b.len())];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            if y != 0 {
                out[i + j] = k.add(out[i + j], k.mul(x, y));
            }
        }
    }
    out
}

fn psub_scaled(a: &mut Vec<Fe>, b: &[Fe], n: usize, k: &Field) {
    // a -= b, truncated at n
    if a.len() < n.min(b.len()) {
        a.resize(n.min(b.len()), 0);
    }
    for (d, &y) in b.iter().enumerate().take(n) {
        if y != 0 {
            a[d] = k.sub(a[d], y);
        }
    }
}

/// Inverse of a unit power series modulo `t^n`.
fn pinv(a: &[Fe], n: usize, k: &Field) -> Result<Vec<Fe>> {
    let a0 = *a.first().unwrap_or(&0);
    let inv0 = k.inv(a0)?;
    let mut out = vec![0; n];
    if n == 0 {
        return Ok(out);
    }
    out[0] = inv0;
    for d in 1..n {
        let mut s = 0;
        for j in 1..=d.min(a.len().saturating_sub(1)) {
            s = k.add(s, k.mul(a[j], out[d - j]));
        }
        out[d] = k.neg(k.mul(s, inv0));
    }
    Ok(out)
}

/// `a / b` for `v(a) >= v(b) = v`, as a power series modulo `t^n`.
fn pquot(a: &[Fe], b: &[Fe], v: usize, n: usize, k: &Field) -> Result<Vec<Fe>> {
    let a_s: Vec<Fe> = a.iter().skip(v).copied().collect();
    let b_s: Vec<Fe> = b.iter().skip(v).copied().collect();
    Ok(pmul(&a_s, &pinv(&b_s, n, k)?, n, k))
}

fn trim(a: &mut Vec<Fe>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// An `m x m` matrix over `F_q((t))`: entries `t^lo * (polynomial)`, known
/// modulo `t^prec` (absolute), or exactly when `prec` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMatrix {
    m: usize,
    lo: i64,
    prec: Option<i64>,
    entries: Vec<Vec<Fe>>,
}

impl LocalMatrix {
    /// From Laurent polynomials `(v, [c0, c1, ..])` meaning `t^v (c0 + c1 t + ..)`.
    pub fn from_laurent(m: usize, entries: &[(i64, Vec<Fe>)]) -> Self {
        assert_eq!(entries.len(), m * m);
        let lo = entries.iter().filter(|(_, c)| c.iter().any(|&x| x != 0)).map(|(v, _)| *v).min().unwrap_or(0);
        let data = entries
            .iter()
            .map(|(v, c)| {
                if c.iter().all(|&x| x == 0) {
                    return Vec::new();
                }
                let mut e = vec![0; (v - lo) as usize];
                e.extend_from_slice(c);
                trim(&mut e);
                e
            })
            .collect();
        LocalMatrix { m, lo, prec: None, entries: data }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_residue(&ResidueMatrix::identity(m))
    }

    /// Constant (Teichmuller) lift of a residue matrix.
    pub fn from_residue(r: &ResidueMatrix) -> Self {
        let m = r.m();
        let e: Vec<(i64, Vec<Fe>)> = (0..m * m).map(|x| (0, vec![r.get(x / m, x % m)])).collect();
        Self::from_laurent(m, &e)
    }

    pub fn permutation(w: &Perm) -> Self {
        Self::from_residue(&ResidueMatrix::permutation(w))
    }

    /// `diag(t^{b_0}, ..., t^{b_{m-1}})`.
    pub fn varpi_diag(b: &[i64]) -> Self {
        let m = b.len();
        let e: Vec<(i64, Vec<Fe>)> =
            (0..m * m).map(|x| if x / m == x % m { (b[x / m], vec![1]) } else { (0, vec![]) }).collect();
        Self::from_laurent(m, &e)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> Option<i64> {
        self.prec
    }

    /// Laurent form of entry `(r, c)`: `(v, coefficients)` with `c0 != 0`,
    /// or `None` when the entry is (known to be) zero.
    pub fn entry(&self, r: usize, c: usize) -> Option<(i64, Vec<Fe>)> {
        let e = &self.entries[r * self.m + c];
        let v = pval(e)?;
        Some((self.lo + v as i64, e[v..].to_vec()))
    }

    /// Coefficient of `t^d` in entry `(r, c)`.
    pub fn coeff(&self, r: usize, c: usize, d: i64) -> Fe {
        let idx = d - self.lo;
        if idx < 0 {
            return 0;
        }
        *self.entries[r * self.m + c].get(idx as usize).unwrap_or(&0)
    }

    /// Minimal valuation of an entry.
    pub fn minval(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| pval(e)).min().map(|v| self.lo + v as i64)
    }

    /// Drops everything at or above `t^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        let p = self.prec.map_or(prec, |q| q.min(prec));
        let keep = (p - self.lo).max(0) as usize;
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.truncate(keep);
                trim(&mut e);
                e
            })
            .collect();
        LocalMatrix { m: self.m, lo: self.lo, prec: Some(p), entries }
    }

    pub fn mul(&self, other: &LocalMatrix, k: &Field) -> LocalMatrix {
        let m = self.m;
        let lo = self.lo + other.lo;
        let prec = match (self.prec, other.prec) {
            (None, None) => None,
            (Some(p), None) => Some(p + other.minval().unwrap_or(i64::MAX / 4)),
            (None, Some(p)) => Some(p + self.minval().unwrap_or(i64::MAX / 4)),
            (Some(p1), Some(p2)) => Some(
                (p1 + other.minval().unwrap_or(i64::MAX / 4)).min(p2 + self.minval().unwrap_or(i64::MAX / 4)),
            ),
        };
        let cap = prec.map(|p| (p - lo).max(0) as usize);
        let mut entries = vec![Vec::new(); m * m];
        for r in 0..m {
            for c in 0..m {
                let mut acc: Vec<Fe> = Vec::new();
                for l in 0..m {
                    let a = &self.entries[r * m + l];
                    let b = &other.entries[l * m + c];
                    if a.is_empty() || b.is_empty() {
                        continue;
                    }
                    let n = cap.unwrap_or(a.len() + b.len());
                    let prod = pmul(a, b, n, k);
                    if acc.len() < prod.len() {
                        acc.resize(prod.len(), 0);
                    }
                    for (d, &x) in prod.iter().enumerate() {
                        acc[d] = k.add(acc[d], x);
                    }
                }
                trim(&mut acc);
                entries[r * m + c] = acc;
            }
        }
        LocalMatrix { m, lo, prec, entries }
    }

    /// `t^c * self` as integral power series, known modulo `t^h`
    /// (`h = None` when exact).
    fn scaled_integral(&self, c: i64) -> (Vec<Vec<Fe>>, Option<i64>) {
        let shift = self.lo + c;
        assert!(shift >= 0 || self.minval().is_none_or(|v| v + c >= 0));
        let ents = self
            .entries
            .iter()
            .map(|e| {
                if shift >= 0 {
                    let mut out = vec![0; shift as usize];
                    out.extend_from_slice(e);
                    trim(&mut out);
                    out
                } else {
                    let mut out: Vec<Fe> = e.iter().skip((-shift) as usize).copied().collect();
                    trim(&mut out);
                    out
                }
            })
            .collect();
        (ents, self.prec.map(|p| p + c))
    }

    /// Elementary divisors `d_1 <= .. <= d_m` by full-pivot elimination.
    pub fn elementary_divisors(&self, k: &Field) -> Result<Vec<i64>> {
        let c = -self.minval().ok_or_else(|| HeckeError::Oracle("zero matrix".into()))?;
        let (a, h) = self.scaled_integral(c);
        let w = h.unwrap_or_else(|| exact_bound(&a, self.m)) as usize;
        let divs = smith_valuations(a, self.m, w, k)
            .ok_or_else(|| HeckeError::Oracle("insufficient precision or singular matrix".into()))?;
        Ok(divs.into_iter().map(|d| d as i64 - c).collect())
    }

    pub fn spread(&self, k: &Field) -> Result<i64> {
        let d = self.elementary_divisors(k)?;
        Ok(d[d.len() - 1] - d[0])
    }

    pub fn det_valuation(&self, k: &Field) -> Result<i64> {
        Ok(self.elementary_divisors(k)?.iter().sum())
    }

    /// Absolute precision needed for `coset_label` to be exact.
    pub fn label_precision(&self, k: &Field) -> Result<i64> {
        let c = -self.minval().ok_or_else(|| HeckeError::Oracle("zero matrix".into()))?;
        Ok(self.det_valuation(k)? + (self.m as i64 - 1) * c + 1)
    }

    pub fn is_integral(&self) -> bool {
        self.minval().is_none_or(|v| v >= 0)
    }

    /// `"t^v*(c0+c1*t+...)"`, or `"0"`.
    pub fn format_entry(&self, r: usize, c: usize, k: &Field) -> String {
        match self.entry(r, c) {
            None => "0".into(),
            Some((v, coeffs)) => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(d, &x)| match d {
                        0 => k.format(x),
                        1 => format!("{}*t", k.format(x)),
                        _ => format!("{}*t^{d}", k.format(x)),
                    })
                    .collect();
                format!("t^{v}*({})", terms.join("+"))
            }
        }
    }

    pub fn parse_entry(s: &str, k: &Field) -> Result<(i64, Vec<Fe>)> {
        let bad = || HeckeError::Parse(format!("invalid local field entry {s:?}"));
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (v, body) = if let Some(rest) = s.strip_prefix("t^") {
            let star = rest.find('*');
            match star {
                Some(pos) => (rest[..pos].parse::<i64>().map_err(|_| bad())?, rest[pos + 1..].to_string()),
                None => (rest.parse::<i64>().map_err(|_| bad())?, "1".to_string()),
            }
        } else if s == "t" {
            (1, "1".to_string())
        } else {
            (0, s.clone())
        };
        let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(&body).to_string();
        let mut coeffs: Vec<Fe> = Vec::new();
        for term in body.split('+') {
            if term.is_empty() {
                return Err(bad());
            }
            let (c, d) = match term.split_once('*') {
                None if term == "t" => (1, 1),
                None => (k.parse(term)?, 0),
                Some((c, tpart)) => {
                    let d = if tpart == "t" {
                        1
                    } else {
                        tpart.strip_prefix("t^").ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?
                    };
                    (k.parse(c)?, d)
                }
            };
            if coeffs.len() <= d {
                coeffs.resize(d + 1, 0);
            }
            coeffs[d] = k.add(coeffs[d], c);
        }
        Ok((v, coeffs))
    }

    pub fn parse(rows: &[Vec<String>], k: &Field) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(HeckeError::Parse("matrix must be square and nonempty".into()));
        }
        let entries: Vec<(i64, Vec<Fe>)> =
            rows.iter().flatten().map(|s| Self::parse_entry(s, k)).collect::<Result<_>>()?;
        Ok(Self::from_laurent(m, &entries))
    }

    pub fn format_rows(&self, k: &Field) -> Vec<Vec<String>> {
        (0..self.m).map(|r| (0..self.m).map(|c| self.format_entry(r, c, k)).collect()).collect()
    }
}

/// A precision at which an exact integral matrix has known determinant
/// valuation: one more than the degree bound of its determinant.
fn exact_bound(a: &[Vec<Fe>], m: usize) -> i64 {
    let mut total = 0i64;
    for c in 0..m {
        total += (0..m).map(|r| a[r * m + c].len() as i64).max().unwrap_or(0);
    }
    total + 1
}

/// Valuations of the Smith invariants of an integral matrix modulo `t^w`,
/// or `None` if some pivot is not visible at this precision.
fn smith_valuations(mut a: Vec<Vec<Fe>>, m: usize, w: usize, k: &Field) -> Option<Vec<usize>> {
    for e in a.iter_mut() {
        e.truncate(w);
    }
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    while !rows.is_empty() {
        let mut best: Option<(usize, usize, usize)> = None;
        for &r in &rows {
            for &c in &cols {
                if let Some(v) = pval(&a[r * m + c]) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, r, c));
                    }
                }
            }
        }
        let (v, r, c) = best?;
        let piv = a[r * m + c].clone();
        for &r2 in &rows {
            if r2 == r || pval(&a[r2 * m + c]).is_none() {
                continue;
            }
            let f = pquot(&a[r2 * m + c], &piv, v, w, k).ok()?;
            for &c2 in &cols {
                let prod = pmul(&f, &a[r * m + c2], w, k);
                psub_scaled(&mut a[r2 * m + c2], &prod, w, k);
            }
        }
        for &c2 in &cols {
            if c2 == c || pval(&a[r * m + c2]).is_none() {
                continue;
            }
            let f = pquot(&a[r * m + c2], &piv, v, w, k).ok()?;
            for &r2 in &rows {
                let prod = pmul(&f, &a[r2 * m + c], w, k);
                psub_scaled(&mut a[r2 * m + c2], &prod, w, k);
            }
        }
        out.push(v);
        rows.retain(|&x| x != r);
        cols.retain(|&x| x != c);
    }
    out.sort_unstable();
    Some(out)
}

/// Canonical label of a left coset `zK^1`: the scaling exponent, the working
/// precision, and the columns of the scaled matrix reduced modulo `t z O^m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CosetLabel {
    pub scale: i64,
    pub precision: i64,
    pub data: Vec<Fe>,
}

impl fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}:{:?}", self.scale, self.precision, self.data)
    }
}

/// One double coset in the support of a product.
#[derive(Clone, Debug)]
pub struct DoubleCosetTerm {
    /// Smallest left-coset label in the double coset.
    pub key: CosetLabel,
    pub labels: BTreeSet<CosetLabel>,
    pub representative: LocalMatrix,
    pub count: u64,
}

impl DoubleCosetTerm {
    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

/// Outcome of a brute-force convolution.
#[derive(Clone, Debug)]
pub struct Convolution {
    pub terms: Vec<DoubleCosetTerm>,
    pub left_size: usize,
    pub right_size: usize,
    pub depth: i64,
}

impl Convolution {
    /// `(key, count)` pairs, sorted.
    pub fn summary(&self) -> Vec<(CosetLabel, u64)> {
        let mut v: Vec<(CosetLabel, u64)> = self.terms.iter().map(|t| (t.key.clone(), t.count)).collect();
        v.sort();
        v
    }

    pub fn find(&self, label: &CosetLabel) -> Option<&DoubleCosetTerm> {
        self.terms.iter().find(|t| t.labels.contains(label))
    }
}

/// The oracle for `GL_m(F_q((t)))`.
#[derive(Clone, Debug)]
pub struct Oracle {
    m: usize,
    field: Field,
}

impl Oracle {
    pub fn new(m: usize, field: Field) -> Self {
        Oracle { m, field }
    }

    pub fn for_algebra(alg: &HeckeAlgebra) -> Result<Self> {
        if alg.sigma().rem_euclid(alg.field().f() as i64) != 0 {
            return Err(HeckeError::Oracle("the oracle realizes only the split case (sigma = id)".into()));
        }
        Ok(Self::new(alg.m(), alg.field().clone()))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coset_label(&self, z: &LocalMatrix) -> Result<CosetLabel> {
        let m = self.m;
        let k = &self.field;
        let c = -z.minval().ok_or_else(|| HeckeError::Oracle("zero matrix".into()))?;
        let (a, h) = z.scaled_integral(c);
        let w = h.unwrap_or_else(|| exact_bound(&a, m));
        let divs = smith_valuations(a.clone(), m, w as usize, k)
            .ok_or_else(|| HeckeError::Oracle("insufficient precision for coset label".into()))?;
        let e: usize = divs.iter().sum();
        let p = e + 1;
        if (p as i64) > w {
            return Err(HeckeError::Oracle(format!("insufficient precision: need {p}, have {w}")));
        }
        let mut a: Vec<Vec<Fe>> = a
            .into_iter()
            .map(|mut x| {
                x.truncate(p);
                x.resize(p, 0);
                x
            })
            .collect();
        let hnf = lattice_basis(&a, m, e, p, k)?;
        // reduce every column modulo t * lattice
        for col in 0..m {
            for r in 0..m {
                let (ref hcol, er) = hnf[r];
                // coefficients of degree > er in row r are removed with t^{d-er} h_r
                for d in (er + 1)..p {
                    let x = a[r * m + col][d];
                    if x == 0 {
                        continue;
                    }
                    let shift = d - er;
                    for rr in r..m {
                        for (dd, &y) in hcol[rr].iter().enumerate() {
                            if dd + shift < p && y != 0 {
                                let cur = a[rr * m + col][dd + shift];
                                a[rr * m + col][dd + shift] = k.sub(cur, k.mul(x, y));
                            }
                        }
                    }
                }
            }
        }
        let mut data = Vec::with_capacity(m * m * p);
        for r in 0..m {
            for col in 0..m {
                data.extend_from_slice(&a[r * m + col]);
            }
        }
        Ok(CosetLabel { scale: c, precision: p as i64, data })
    }

    /// Generators of `K^1` modulo `1 + t^depth M_m(O)`.
    fn k1_generators(&self, depth: i64) -> Vec<LocalMatrix> {
        let m = self.m;
        let mut out = Vec::new();
        for d in 1..depth {
            for &c in &self.field.additive_basis() {
                for i in 0..m {
                    for j in 0..m {
                        let mut e: Vec<(i64, Vec<Fe>)> =
                            (0..m * m).map(|x| if x / m == x % m { (0, vec![1]) } else { (0, vec![]) }).collect();
                        if i == j {
                            let mut poly = vec![0; d as usize + 1];
                            poly[0] = 1;
                            poly[d as usize] = c;
                            e[i * m + i] = (0, poly);
                        } else {
                            e[i * m + j] = (d, vec![c]);
                        }
                        out.push(LocalMatrix::from_laurent(m, &e));
                    }
                }
            }
        }
        out
    }

    /// Depth at which `K^1` acts on `K^1 x K^1 / K^1` through a finite quotient.
    pub fn depth_for(&self, x: &LocalMatrix, n: i64) -> Result<i64> {
        Ok(n.max(x.spread(&self.field)? + 1))
    }

    /// The left cosets `k x K^1`, `k` in `K^1`, with representatives known to
    /// absolute precision `prec`.
    pub fn double_coset_cosets(
        &self,
        x: &LocalMatrix,
        depth: i64,
        prec: i64,
    ) -> Result<BTreeMap<CosetLabel, LocalMatrix>> {
        let k = &self.field;
        if x.m() != self.m {
            return Err(HeckeError::Mismatch("matrix size differs from the oracle's".into()));
        }
        let need = x.label_precision(k)?;
        let prec = prec.max(need);
        let gens = self.k1_generators(depth);
        let start = x.truncate(prec);
        let mut seen = BTreeMap::new();
        seen.insert(self.coset_label(&start)?, start.clone());
        let mut queue = VecDeque::from([start]);
        while let Some(z) = queue.pop_front() {
            for g in &gens {
                let nz = g.mul(&z, k).truncate(prec);
                let lab = self.coset_label(&nz)?;
                if !seen.contains_key(&lab) {
                    if seen.len() >= MAX_ORBIT {
                        return Err(HeckeError::Oracle(format!("orbit exceeds {MAX_ORBIT} cosets")));
                    }
                    seen.insert(lab, nz.clone());
                    queue.push_back(nz);
                }
            }
        }
        Ok(seen)
    }

    /// Number of left cosets in `K^1 x K^1`.
    pub fn coset_count(&self, x: &LocalMatrix) -> Result<usize> {
        let depth = self.depth_for(x, 2)?;
        Ok(self.double_coset_cosets(x, depth, 0)?.len())
    }

    /// Structure constants of `f_x * f_y` by counting pairs of left cosets.
    /// `n` is a lower bound for the `K^1` enumeration depth.
    pub fn convolve(&self, x: &LocalMatrix, y: &LocalMatrix, n: i64) -> Result<Convolution> {
        let k = &self.field;
        let m = self.m as i64;
        let cx = -x.minval().ok_or_else(|| HeckeError::Oracle("zero matrix".into()))?;
        let cy = -y.minval().ok_or_else(|| HeckeError::Oracle("zero matrix".into()))?;
        let need_prod = x.det_valuation(k)? + y.det_valuation(k)? + (m - 1) * (cx + cy).max(0) + 1;
        let hx = x.label_precision(k)?.max(need_prod + cy.max(0));
        let hy = y.label_precision(k)?.max(need_prod + cx.max(0));
        let dx = self.depth_for(x, n)?;
        let dy = self.depth_for(y, n)?;
        let zs = self.double_coset_cosets(x, dx, hx)?;
        let ys = self.double_coset_cosets(y, dy, hy)?;

        let mut counts: HashMap<CosetLabel, (u64, LocalMatrix)> = HashMap::new();
        for z in zs.values() {
            for yb in ys.values() {
                let prod = z.mul(yb, k);
                let lab = self.coset_label(&prod)?;
                counts.entry(lab).or_insert_with(|| (0, prod)).0 += 1;
            }
        }
        let mut remaining: BTreeSet<CosetLabel> = counts.keys().cloned().collect();
        let mut terms = Vec::new();
        let mut depth = dx.max(dy);
        while let Some(first) = remaining.iter().next().cloned() {
            let (count, rep) = counts[&first].clone();
            let d = self.depth_for(&rep, n)?;
            depth = depth.max(d);
            let orbit = self.double_coset_cosets(&rep, d, 0)?;
            for lab in orbit.keys() {
                match counts.get(lab) {
                    Some((c, _)) if *c == count => {
                        remaining.remove(lab);
                    }
                    _ => {
                        return Err(HeckeError::Oracle(
                            "coset counts are not constant on a double coset; precision too low".into(),
                        ))
                    }
                }
            }
            let labels: BTreeSet<CosetLabel> = orbit.keys().cloned().collect();
            let key = labels.iter().next().cloned().expect("nonempty orbit");
            terms.push(DoubleCosetTerm { key, labels, representative: rep, count });
        }
        terms.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(Convolution { terms, left_size: zs.len(), right_size: ys.len(), depth })
    }

    /// Whether `z` lies in `K^1 x K^1`.
    pub fn same_double_coset(&self, x: &LocalMatrix, z: &LocalMatrix) -> Result<bool> {
        let depth = self.depth_for(x, 2)?;
        let orbit = self.double_coset_cosets(x, depth, 0)?;
        Ok(orbit.contains_key(&self.coset_label(z)?))
    }
}

/// A triangular basis of the lattice spanned by the columns of `a` modulo
/// `t^p`, given `t^e O^m` inside it: for each row `r`, a column vector (as
/// rows of power series) with `t^{e_r}` at row `r` and zeros above.
fn lattice_basis(a: &[Vec<Fe>], m: usize, e: usize, p: usize, k: &Field) -> Result<Vec<(Vec<Vec<Fe>>, usize)>> {
    let mut gens: Vec<Vec<Vec<Fe>>> = (0..m).map(|c| (0..m).map(|r| a[r * m + c].clone()).collect()).collect();
    for j in 0..m {
        let mut v = vec![vec![0; p]; m];
        v[j][e] = 1;
        gens.push(v);
    }
    let mut basis = Vec::with_capacity(m);
    for r in 0..m {
        let best = gens
            .iter()
            .enumerate()
            .filter_map(|(i, g)| pval(&g[r]).map(|v| (v, i)))
            .min()
            .ok_or_else(|| HeckeError::Oracle("lattice basis: precision too low".into()))?;
        let (v, idx) = best;
        let mut piv = gens.swap_remove(idx);
        // normalize the pivot entry to exactly t^v
        let unit: Vec<Fe> = piv[r][v..].to_vec();
        let inv = pinv(&unit, p, k)?;
        for row in piv.iter_mut() {
            *row = pmul(row, &inv, p, k);
            row.resize(p, 0);
        }
        for g in gens.iter_mut() {
            if pval(&g[r]).is_none() {
                continue;
            }
            let f: Vec<Fe> = g[r][v..].to_vec();
            for rr in 0..m {
                let prod = pmul(&f, &piv[rr], p, k);
                for (d, &y) in prod.iter().enumerate() {
                    g[rr][d] = k.sub(g[rr][d], y);
                }
            }
        }
        basis.push((piv, v));
    }
    Ok(basis)
}

/// Split-case matrix `u1 t tau_0^i w1 tau w2 u2` of a word.
pub fn word_to_matrix(w: &NormalWord, k: &Field) -> LocalMatrix {
    let m = w.m();
    let factors = [
        LocalMatrix::from_residue(w.u1.matrix()),
        LocalMatrix::from_residue(&w.t.matrix()),
        LocalMatrix::varpi_diag(&vec![w.i; m]),
        LocalMatrix::permutation(&w.w1),
        LocalMatrix::varpi_diag(&w.tau.diagonal()),
        LocalMatrix::permutation(&w.w2),
        LocalMatrix::from_residue(w.u2.matrix()),
    ];
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.mul(f, k))
}

/// Normal word of the double coset `K^1 x K^1`, by elimination to a monomial
/// matrix with row and column operations from the pro-p Iwahori subgroup.
pub fn iwahori_decompose(alg: &HeckeAlgebra, x: &LocalMatrix) -> Result<NormalWord> {
    let m = alg.m();
    let k = alg.field();
    if x.m() != m {
        return Err(HeckeError::Mismatch("matrix size differs from the algebra's".into()));
    }
    if alg.sigma().rem_euclid(k.f() as i64) != 0 {
        return Err(HeckeError::Oracle("decomposition realizes only the split case".into()));
    }
    let divs = x.elementary_divisors(k)?;
    let d1 = divs[0];
    let w = (divs[m - 1] - d1 + 1) as usize;
    let (mut a, h) = x.scaled_integral(-d1);
    if h.is_some_and(|h| h < w as i64) {
        return Err(HeckeError::Oracle("insufficient precision for decomposition".into()));
    }
    for e in a.iter_mut() {
        e.truncate(w);
    }
    let mut left = ResidueMatrix::identity(m);
    let mut right = ResidueMatrix::identity(m);
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut images = vec![0; m];
    let mut torus = vec![1; m];
    let mut vals = vec![0i64; m];
    while !rows.is_empty() {
        let v = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .filter_map(|(r, c)| pval(&a[r * m + c]))
            .min()
            .ok_or_else(|| HeckeError::Oracle("singular matrix".into()))?;
        let r = *rows.iter().rev().find(|&&r| cols.iter().any(|&c| pval(&a[r * m + c]) == Some(v))).unwrap();
        let c = *cols.iter().find(|&&c| pval(&a[r * m + c]) == Some(v)).unwrap();
        let piv = a[r * m + c].clone();
        for &r2 in &rows {
            if r2 == r || pval(&a[r2 * m + c]).is_none() {
                continue;
            }
            let f = pquot(&a[r2 * m + c], &piv, v, w, k)?;
            if r2 < r && f[0] != 0 {
                let nf = k.neg(f[0]);
                for cc in 0..m {
                    let val = k.add(left.get(r2, cc), k.mul(nf, left.get(r, cc)));
                    left.set(r2, cc, val);
                }
            }
            for &c2 in &cols {
                let prod = pmul(&f, &a[r * m + c2], w, k);
                psub_scaled(&mut a[r2 * m + c2], &prod, w, k);
            }
        }
        for &c2 in &cols {
            if c2 == c || pval(&a[r * m + c2]).is_none() {
                continue;
            }
            let f = pquot(&a[r * m + c2], &piv, v, w, k)?;
            if c2 > c && f[0] != 0 {
                let nf = k.neg(f[0]);
                for rr in 0..m {
                    let val = k.add(right.get(rr, c2), k.mul(nf, right.get(rr, c)));
                    right.set(rr, c2, val);
                }
            }
            for &r2 in &rows {
                let prod = pmul(&f, &a[r2 * m + c], w, k);
                psub_scaled(&mut a[r2 * m + c2], &prod, w, k);
            }
        }
        images[c] = r;
        torus[r] = piv[v];
        vals[c] = v as i64 + d1;
        rows.retain(|&x| x != r);
        cols.retain(|&x| x != c);
    }
    let wperm = Perm::from_images(images).expect("pivots form a permutation");
    let u1 = Unipotent::from_matrix(left.inverse(k)?)?;
    let u2 = Unipotent::from_matrix(right.inverse(k)?)?;
    // diag(t^vals) = w2^{-1} tau_0^i tau w2 with w2 the stable sorting permutation
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| vals[j]);
    let mut w2_images = vec![0; m];
    for (pos, &j) in order.iter().enumerate() {
        w2_images[j] = pos;
    }
    let w2 = Perm::from_images(w2_images).unwrap();
    let sorted: Vec<i64> = order.iter().map(|&j| vals[j]).collect();
    let i = sorted[0];
    let tau = Tau::from_exponents(sorted.windows(2).map(|p| (p[1] - p[0]) as u32).collect());
    let raw = NormalWord { u1, t: Torus::new(torus)?, i, w1: wperm.compose(&w2.inverse()), tau, w2, u2 };
    alg.normalize(&raw)
}

/// Engine product against oracle convolution for two basis elements.
#[derive(Clone, Debug)]
pub struct ProductCheck {
    pub engine: AlgebraElement,
    pub convolution: Convolution,
    /// Human-readable disagreements; empty when the two match.
    pub mismatches: Vec<String>,
    /// `sum_xi c_xi L(xi)` and `L(x) L(y)`.
    pub mass: (u64, u64),
}

impl ProductCheck {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty() && self.mass.0 == self.mass.1
    }
}

/// Multiplies `f_a * f_b` with the engine and with the oracle and matches
/// the terms double coset by double coset.
pub fn check_product(alg: &HeckeAlgebra, a: &NormalWord, b: &NormalWord, n: i64) -> Result<ProductCheck> {
    let o = Oracle::for_algebra(alg)?;
    let k = alg.field();
    let x = word_to_matrix(a, k);
    let y = word_to_matrix(b, k);
    let engine = alg.mul(&AlgebraElement::basis(a.clone()), &AlgebraElement::basis(b.clone()))?;
    let conv = o.convolve(&x, &y, n)?;
    let mut mismatches = Vec::new();
    let mut matched = vec![false; conv.terms.len()];
    let mut mass = 0u64;
    for (w, c) in engine.terms() {
        let z = word_to_matrix(w, k);
        let lab = o.coset_label(&z)?;
        match conv.terms.iter().position(|t| t.labels.contains(&lab)) {
            None => mismatches.push(format!("engine term {w} (coefficient {c}) is absent from the oracle product")),
            Some(idx) => {
                let t = &conv.terms[idx];
                if matched[idx] {
                    mismatches.push(format!("engine terms repeat the double coset of {w}"));
                }
                matched[idx] = true;
                if c != &BigInt::from(t.count) {
                    mismatches.push(format!("coefficient of {w}: engine {c}, oracle {}", t.count));
                }
                let cu = u64::try_from(c).unwrap_or(0);
                mass += cu * t.size() as u64;
            }
        }
    }
    for (t, seen) in conv.terms.iter().zip(&matched) {
        if !seen {
            let w = iwahori_decompose(alg, &t.representative)?;
            mismatches.push(format!("oracle term {w} (count {}) is absent from the engine product", t.count));
        }
    }
    let expected = (conv.left_size * conv.right_size) as u64;
    Ok(ProductCheck { engine, convolution: conv, mismatches, mass: (mass, expected) })
}

/// `max(spread x, spread y) + 2`; a lower bound for the enumeration depth.
pub fn precision_for(x: &LocalMatrix, y: &LocalMatrix, k: &Field) -> Result<i64> {
    Ok(x.spread(k)?.max(y.spread(k)?) + 2)
}

/// Root-group element `1 + c t^d E_root` as a local matrix.
pub fn root_element(m: usize, root: Root, c: Fe, d: i64) -> LocalMatrix {
    let e: Vec<(i64, Vec<Fe>)> = (0..m * m)
        .map(|x| {
            if x / m == x % m {
                (0, vec![1])
            } else if x / m == root.i && x % m == root.j {
                (d, vec![c])
            } else {
                (0, vec![])
            }
        })
        .collect();
    LocalMatrix::from_laurent(m, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u32) -> Field {
        Field::new(p, 1).unwrap()
    }

    fn tau1() -> LocalMatrix {
        LocalMatrix::varpi_diag(&[0, 1])
    }

    #[test]
    fn series_inverse() {
        let k = f(3);
        let a = vec![2, 1, 1];
        let inv = pinv(&a, 5, &k).unwrap();
        assert_eq!(pmul(&a, &inv, 5, &k), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn rank_one_labels() {
        let k = f(3);
        let o = Oracle::new(1, k.clone());
        let u = LocalMatrix::from_laurent(1, &[(0, vec![2, 1])]);
        let v = LocalMatrix::from_laurent(1, &[(0, vec![2])]);
        assert_eq!(o.coset_label(&u).unwrap(), o.coset_label(&v).unwrap());
        let w = LocalMatrix::from_laurent(1, &[(0, vec![1])]);
        assert_ne!(o.coset_label(&u).unwrap(), o.coset_label(&w).unwrap());
    }

    #[test]
    fn label_invariance() {
        let k = f(3);
        let o = Oracle::new(2, k.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let zs = [
            tau1(),
            LocalMatrix::varpi_diag(&[1, -1]),
            LocalMatrix::permutation(&Perm::simple(2, 0)).mul(&LocalMatrix::varpi_diag(&[0, 2]), &k),
        ];
        for z in &zs {
            let base = o.coset_label(z).unwrap();
            for _ in 0..100 {
                // random element of K^1
                let e: Vec<(i64, Vec<Fe>)> = (0..4)
                    .map(|x| {
                        let mut c: Vec<Fe> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                        c[0] = if x % 3 == 0 { 1 } else { 0 };
                        (0, c)
                    })
                    .collect();
                let kk = LocalMatrix::from_laurent(2, &e);
                assert_eq!(o.coset_label(&z.mul(&kk, &k)).unwrap(), base);
            }
        }
    }

    #[test]
    fn double_coset_sizes() {
        for p in [2, 3] {
            let k = f(p);
            let o = Oracle::new(2, k.clone());
            assert_eq!(o.coset_count(&LocalMatrix::identity(2)).unwrap(), 1);
            assert_eq!(o.coset_count(&tau1()).unwrap(), p as usize);
            let s = LocalMatrix::permutation(&Perm::simple(2, 0));
            assert_eq!(o.coset_count(&s.mul(&tau1(), &k)).unwrap(), p as usize);
            assert_eq!(o.coset_count(&LocalMatrix::varpi_diag(&[0, 2])).unwrap(), (p * p) as usize);
        }
    }

    #[test]
    fn central_product() {
        let k = f(2);
        let o = Oracle::new(2, k.clone());
        let t0 = LocalMatrix::varpi_diag(&[1, 1]);
        let conv = o.convolve(&t0, &tau1(), 2).unwrap();
        assert_eq!(conv.terms.len(), 1);
        assert_eq!(conv.terms[0].count, 1);
        assert!(o.same_double_coset(&t0.mul(&tau1(), &k), &conv.terms[0].representative).unwrap());
    }

    #[test]
    fn precision_examples() {
        let k = f(2);
        let id = LocalMatrix::identity(2);
        assert_eq!(precision_for(&id, &id, &k).unwrap(), 2);
        assert_eq!(precision_for(&tau1(), &tau1(), &k).unwrap(), 3);
        assert_eq!(precision_for(&tau1(), &LocalMatrix::varpi_diag(&[0, 2]), &k).unwrap(), 4);
    }

    #[test]
    fn parse_and_format() {
        let k = f(3);
        let (v, c) = LocalMatrix::parse_entry("t^-1*(2+1*t^2)", &k).unwrap();
        assert_eq!((v, c), (-1, vec![2, 0, 1]));
        assert_eq!(LocalMatrix::parse_entry("t", &k).unwrap(), (1, vec![1]));
        assert_eq!(LocalMatrix::parse_entry("0", &k).unwrap(), (0, vec![0]));
        assert!(LocalMatrix::parse_entry("t^x*(1)", &k).is_err());
        let rows = vec![vec!["0".to_string(), "1".into()], vec!["t^1*(1)".into(), "0".into()]];
        let a = LocalMatrix::parse(&rows, &k).unwrap();
        let again = LocalMatrix::parse(&a.format_rows(&k), &k).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn decomposition_examples() {
        let k = f(2);
        let alg = HeckeAlgebra::new(2, k.clone(), 0);
        let w = iwahori_decompose(&alg, &LocalMatrix::identity(2)).unwrap();
        assert_eq!(w, NormalWord::unit(2));
        let w = iwahori_decompose(&alg, &LocalMatrix::varpi_diag(&[1, 1])).unwrap();
        assert_eq!(w.i, 1);
        assert!(w.w1.is_identity() && w.w2.is_identity() && w.tau.is_zero());
        let rows = vec![vec!["0".to_string(), "1".into()], vec!["t".into(), "0".into()]];
        let x = LocalMatrix::parse(&rows, &k).unwrap();
        let w = iwahori_decompose(&alg, &x).unwrap();
        assert_eq!(w.tau, Tau::generator(2, 0));
        assert_eq!(w.w2, Perm::simple(2, 0));
        assert!(w.w1.is_identity() && w.i == 0);
    }

    #[test]
    fn engine_matches_oracle_small() {
        for (m, p) in [(2, 2), (2, 3), (3, 2)] {
            let alg = HeckeAlgebra::with_params(m, p, 1, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
            for _ in 0..(if m == 2 { 15 } else { 3 }) {
                let a = alg.random_word(if m == 2 { 2 } else { 1 }, 1, &mut rng);
                let b = alg.random_word(if m == 2 { 2 } else { 1 }, 1, &mut rng);
                let chk = check_product(&alg, &a, &b, 2).unwrap();
                assert!(chk.agrees(), "{a} * {b}: {:?} {:?}", chk.mismatches, chk.mass);
            }
        }
    }
}
