//! The Hecke algebra `H(G, K^1)` through its presentation: normal words, right
//! multiplication by generators, and the defining relations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{HeckeError, Result};
use crate::residue::{
    factor_unipotent, residue_bruhat, sl2_bruhat, Fe, Field, ResidueMatrix, Torus, Unipotent,
};
use crate::weyl::{
    all_perms, is_min_left, is_min_right, min_decomp_left, min_decomp_right, positive_roots, pq_sets, Perm,
    Root, SimpleSubset, Tau,
};

/// Canonical label `(u1, t, i, w1, tau, w2, u2)` of a `K^1`-double coset,
/// standing for `u1 t tau_0^i w1 tau w2 u2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalWord {
    pub u1: Unipotent,
    pub t: Torus,
    pub i: i64,
    pub w1: Perm,
    pub tau: Tau,
    pub w2: Perm,
    pub u2: Unipotent,
}

impl NormalWord {
    pub fn unit(m: usize) -> Self {
        NormalWord {
            u1: Unipotent::identity(m),
            t: Torus::identity(m),
            i: 0,
            w1: Perm::identity(m),
            tau: Tau::zero(m),
            w2: Perm::identity(m),
            u2: Unipotent::identity(m),
        }
    }

    pub fn m(&self) -> usize {
        self.w1.m()
    }

    fn key(&self) -> (i64, &Tau, &Perm, &Perm, &Torus, &Unipotent, &Unipotent) {
        (self.i, &self.tau, &self.w1, &self.w2, &self.t, &self.u1, &self.u2)
    }

    /// Checks the support and minimality conditions of a normal word.
    pub fn check(&self) -> Result<()> {
        let m = self.m();
        let dims = [self.u1.m(), self.t.entries().len(), self.tau.m(), self.w2.m(), self.u2.m()];
        if dims.iter().any(|&d| d != m) {
            return Err(HeckeError::Invariant("components of different sizes".into()));
        }
        let w1inv = self.w1.inverse();
        if !self.u1.support().iter().all(|&r| r.is_positive() && !w1inv.act(r).is_positive()) {
            return Err(HeckeError::Invariant("u1 not supported on N(w1^-1)".into()));
        }
        if !self.u2.support().iter().all(|&r| r.is_positive() && self.w2.act(r).is_positive()) {
            return Err(HeckeError::Invariant("u2 not supported on U n w2^-1 U w2".into()));
        }
        if !is_min_right(self.tau.p_set(), &self.w2) {
            return Err(HeckeError::Invariant("w2 is not minimal in W_P(tau) w2".into()));
        }
        Ok(())
    }
}

impl PartialOrd for NormalWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormalWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ent = |u: &Unipotent| {
            u.entries().iter().map(|(r, x)| format!("{r}:{x}")).collect::<Vec<_>>().join(",")
        };
        write!(
            f,
            "[u1 {{{}}} t {:?} i {} w1 {} tau {:?} w2 {} u2 {{{}}}]",
            ent(&self.u1),
            self.t.entries(),
            self.i,
            self.w1,
            self.tau.exponents(),
            self.w2,
            ent(&self.u2)
        )
    }
}

/// An element of `Omega`, the generating set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorToken {
    /// An element of `U(F_q)`.
    Unipotent(Unipotent),
    Torus(Torus),
    /// `tau_0^e`.
    Tau0(i64),
    /// `s_k`, swapping `k` and `k+1` (0-based).
    Simple(usize),
    /// `tau_k = diag(1, .., 1, varpi, .., varpi)` with `k+1` ones.
    TauAlpha(usize),
    /// An arbitrary element of `K`, through its residue.
    Residue(ResidueMatrix),
}

/// A finite `Z`-combination of normal words, optionally reduced modulo `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: BTreeMap<NormalWord, BigInt>,
    modulus: Option<BigInt>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new(), modulus: None }
    }

    pub fn unit(m: usize) -> Self {
        Self::basis(NormalWord::unit(m))
    }

    pub fn basis(w: NormalWord) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, BigInt::one());
        AlgebraElement { terms, modulus: None }
    }

    pub fn from_terms<I: IntoIterator<Item = (NormalWord, BigInt)>>(it: I) -> Self {
        let mut a = Self::zero();
        for (w, c) in it {
            a.add_term(w, c);
        }
        a
    }

    pub fn with_modulus(mut self, modulus: Option<BigInt>) -> Self {
        self.modulus = modulus;
        self.normalize_coeffs();
        self
    }

    pub fn modulus(&self) -> Option<&BigInt> {
        self.modulus.as_ref()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalWord, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &NormalWord) -> BigInt {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, w: NormalWord, c: BigInt) {
        let entry = self.terms.entry(w).or_default();
        *entry += c;
        if let Some(l) = &self.modulus {
            *entry = ((&*entry % l) + l) % l;
        }
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn normalize_coeffs(&mut self) {
        if let Some(l) = &self.modulus {
            for v in self.terms.values_mut() {
                *v = ((&*v % l) + l) % l;
            }
        }
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        if out.modulus.is_none() {
            out.modulus = other.modulus.clone();
            out.normalize_coeffs();
        }
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> AlgebraElement {
        let mut out = AlgebraElement { terms: BTreeMap::new(), modulus: self.modulus.clone() };
        for (w, v) in &self.terms {
            out.terms.insert(w.clone(), v * c);
        }
        out.normalize_coeffs();
        out
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scale(&BigInt::from(-1))
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.neg())
    }

    /// Coefficientwise reduction modulo `l >= 2`.
    pub fn reduce_mod(&self, l: &BigInt) -> Result<AlgebraElement> {
        if *l < BigInt::from(2) {
            return Err(HeckeError::Config("modulus must be at least 2".into()));
        }
        Ok(self.clone().with_modulus(Some(l.clone())))
    }

    /// All coefficients positive.
    pub fn is_positive(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("{c}*{w}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A factor of a monomial element of `G` used to transport residues.
enum Mono<'a> {
    Perm(&'a Perm),
    Varpi(Vec<i64>),
    Torus(&'a Torus),
}

/// One instance of a defining relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `f_{k1} f_{k2} = f_{k1 k2}`.
    R1 { k1: ResidueMatrix, k2: ResidueMatrix },
    /// `f_{tau_0} f_{tau_0^{-1}} = 1`.
    R2Inverse,
    /// `f_{tau_0^{-1}} f_w = f_{tau_0^{-1} w tau_0} f_{tau_0^{-1}}`.
    R2Conj { omega: GeneratorToken },
    /// `f_{tau_a} f_t = f_{tau_a t tau_a^{-1}} f_{tau_a}`.
    R3 { alpha: usize, t: Torus },
    /// `f_{tau_a} f_u = f_{tau_a u tau_a^{-1}} f_{tau_a}`, `u` in a root group of the Levi.
    R4 { alpha: usize, root: Root, x: Fe },
    /// `f_u f_{tau_a} = f_{tau_a}`, `u` in `U_{a^}^+`.
    R5 { alpha: usize, root: Root, x: Fe },
    /// `f_{tau_a} f_u = f_{tau_a}`, `u` in `U_{a^}^-`.
    R6 { alpha: usize, root: Root, x: Fe },
    /// `f_{tau_a} f_{s_b} = f_{s_b} f_{tau_a}`, `a != b`.
    R7 { alpha: usize, beta: usize },
    /// `f_{tau_a} f_{tau_b} = f_{tau_b} f_{tau_a}`.
    R8 { alpha: usize, beta: usize },
    /// The quadratic-type relation attached to `(w, alpha)`.
    R9 { alpha: usize, w: Perm },
}

impl Relation {
    pub fn number(&self) -> u8 {
        match self {
            Relation::R1 { .. } => 1,
            Relation::R2Inverse | Relation::R2Conj { .. } => 2,
            Relation::R3 { .. } => 3,
            Relation::R4 { .. } => 4,
            Relation::R5 { .. } => 5,
            Relation::R6 { .. } => 6,
            Relation::R7 { .. } => 7,
            Relation::R8 { .. } => 8,
            Relation::R9 { .. } => 9,
        }
    }
}

type WordTerms = Vec<(NormalWord, BigInt)>;

/// The algebra for `GL_m(D)` with residue field `F_q` and twist `sigma = Frob^s`.
pub struct HeckeAlgebra {
    m: usize,
    field: Field,
    sigma: i64,
    cache: Mutex<HashMap<(NormalWord, GeneratorToken), WordTerms>>,
}

impl Clone for HeckeAlgebra {
    fn clone(&self) -> Self {
        HeckeAlgebra::new(self.m, self.field.clone(), self.sigma)
    }
}

impl fmt::Debug for HeckeAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeckeAlgebra")
            .field("m", &self.m)
            .field("p", &self.field.p())
            .field("f", &self.field.f())
            .field("sigma", &self.sigma)
            .finish()
    }
}

impl HeckeAlgebra {
    pub fn new(m: usize, field: Field, sigma: i64) -> Self {
        HeckeAlgebra { m, field, sigma, cache: Mutex::new(HashMap::new()) }
    }

    pub fn with_params(m: usize, p: u32, f: u32, sigma: i64) -> Result<Self> {
        if m == 0 || m > 8 {
            return Err(HeckeError::Config(format!("m = {m} out of range 1..=8")));
        }
        if sigma < 0 {
            return Err(HeckeError::Config("sigma exponent must be nonnegative".into()));
        }
        Ok(Self::new(m, Field::new(p, f)?, sigma))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }

    pub fn same_params(&self, other: &HeckeAlgebra) -> bool {
        self.m == other.m && self.field == other.field && self.sigma.rem_euclid(self.field.f() as i64)
            == other.sigma.rem_euclid(other.field.f() as i64)
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement::unit(self.m)
    }

    fn conj_matrix(&self, factors: &[Mono], a: &ResidueMatrix) -> Result<ResidueMatrix> {
        let k = &self.field;
        let mut cur = a.clone();
        for f in factors.iter().rev() {
            cur = match f {
                Mono::Perm(w) => cur.conj_by_perm(w),
                Mono::Varpi(b) => cur.conj_by_varpi_diag(b, self.sigma, k)?,
                Mono::Torus(t) => cur.conj_by_torus(t, k)?,
            };
        }
        Ok(cur)
    }

    fn conj_unipotent(&self, factors: &[Mono], u: &Unipotent) -> Result<Unipotent> {
        Unipotent::from_matrix(self.conj_matrix(factors, u.matrix())?)
    }

    fn conj_torus(&self, factors: &[Mono], t: &Torus) -> Torus {
        let k = &self.field;
        let mut cur = t.clone();
        for f in factors.iter().rev() {
            cur = match f {
                Mono::Perm(w) => cur.conj_by_perm(w),
                Mono::Varpi(b) => cur.conj_by_varpi_diag(b, self.sigma, k),
                Mono::Torus(_) => cur,
            };
        }
        cur
    }

    fn central(&self, e: i64) -> Vec<i64> {
        vec![e; self.m]
    }

    /// Brings `u1 t tau_0^i w1 tau w2 u2` (arbitrary upper unipotents and
    /// permutations) to its normal word.
    pub fn normalize(&self, raw: &NormalWord) -> Result<NormalWord> {
        let m = self.m;
        let k = &self.field;
        if !raw.u1.is_upper() || !raw.u2.is_upper() {
            return Err(HeckeError::Support("normalize expects upper unipotents".into()));
        }
        let tinv = raw.t.inverse(k);
        // u1' = tau_0^{-i} t^{-1} u1 t tau_0^i
        let u1p = self.conj_unipotent(&[Mono::Varpi(self.central(-raw.i)), Mono::Torus(&tinv)], &raw.u1)?;

        let p = raw.tau.p_set();
        let (w3, w4) = min_decomp_right(p, &raw.w2);
        let w1 = raw.w1.compose(&w3);

        // u2 = a b with a in w4^{-1} U_P^- w4 (absorbed by tau) and b kept
        let (dropped, kept): (BTreeSet<Root>, BTreeSet<Root>) =
            positive_roots(m).into_iter().partition(|&r| !w4.act(r).is_positive());
        let (_, u2b) = factor_unipotent(&raw.u2, &dropped, &kept, k)?;

        // u1' = x y z over w1 U^- w1^{-1}, w1 M_P^+ w1^{-1}, w1 U_P^+ w1^{-1}
        let w1inv = w1.inverse();
        let mut s1 = BTreeSet::new();
        let mut s2 = BTreeSet::new();
        let mut s3 = BTreeSet::new();
        for r in positive_roots(m) {
            let img = w1inv.act(r);
            if !img.is_positive() {
                s1.insert(r);
            } else if p.spans(img) {
                s2.insert(r);
            } else {
                s3.insert(r);
            }
        }
        let s23: BTreeSet<Root> = s2.union(&s3).copied().collect();
        let (x, yz) = factor_unipotent(&u1p, &s1, &s23, k)?;
        let (y, _) = factor_unipotent(&yz, &s2, &s3, k)?;

        // y moves right: w4^{-1} tau^{-1} w1^{-1} y w1 tau w4
        let neg_b: Vec<i64> = raw.tau.diagonal().iter().map(|b| -b).collect();
        let w4inv = w4.inverse();
        let pushed =
            self.conj_unipotent(&[Mono::Perm(&w4inv), Mono::Varpi(neg_b), Mono::Perm(&w1inv)], &y)?;
        let u2 = pushed.mul(&u2b, k)?;

        let u1 = self.conj_unipotent(&[Mono::Torus(&raw.t), Mono::Varpi(self.central(raw.i))], &x)?;
        let word = NormalWord { u1, t: raw.t.clone(), i: raw.i, w1, tau: raw.tau.clone(), w2: w4, u2 };
        debug_assert!(word.check().is_ok());
        Ok(word)
    }

    /// The monomial part `tau_0^i w1 tau w2` as conjugation factors.
    fn g_factors<'a>(&self, x: &'a NormalWord) -> Vec<Mono<'a>> {
        vec![
            Mono::Varpi(self.central(x.i)),
            Mono::Perm(&x.w1),
            Mono::Varpi(x.tau.diagonal()),
            Mono::Perm(&x.w2),
        ]
    }

    /// Right multiplication of one normal word by one generator.
    pub fn word_times(&self, x: &NormalWord, g: &GeneratorToken) -> Result<WordTerms> {
        let key = (x.clone(), g.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let out = self.word_times_uncached(x, g)?;
        self.cache.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    fn single(&self, w: NormalWord) -> Result<WordTerms> {
        Ok(vec![(self.normalize(&w)?, BigInt::one())])
    }

    fn word_times_uncached(&self, x: &NormalWord, g: &GeneratorToken) -> Result<WordTerms> {
        let k = &self.field;
        match g {
            GeneratorToken::Unipotent(u) if !u.is_upper() => {
                self.word_times(x, &GeneratorToken::Residue(u.matrix().clone()))
            }
            GeneratorToken::Unipotent(u) => {
                let mut w = x.clone();
                w.u2 = x.u2.mul(u, k)?;
                self.single(w)
            }
            GeneratorToken::Torus(tt) => {
                let conj = self.conj_torus(&self.g_factors(x), tt);
                let mut w = x.clone();
                w.t = x.t.mul(&conj, k);
                w.u2 = x.u2.conj_by_torus(&tt.inverse(k), k)?;
                self.single(w)
            }
            GeneratorToken::Tau0(e) => {
                let mut w = x.clone();
                w.i += e;
                w.u2 = x.u2.conj_by_varpi_diag(&self.central(-e), self.sigma, k)?;
                self.single(w)
            }
            GeneratorToken::Simple(kk) => Ok(vec![(self.times_simple(x, *kk)?, BigInt::one())]),
            GeneratorToken::TauAlpha(kk) => self.times_tau_alpha(x, *kk),
            GeneratorToken::Residue(r) => {
                let mut terms: WordTerms = vec![(x.clone(), BigInt::one())];
                for tok in self.residue_tokens(r)? {
                    let mut next = Vec::new();
                    for (w, c) in terms {
                        for (w2, c2) in self.word_times(&w, &tok)? {
                            next.push((w2, &c * c2));
                        }
                    }
                    terms = next;
                }
                if terms.len() != 1 {
                    return Err(HeckeError::Invariant("K-generator branched".into()));
                }
                Ok(terms)
            }
        }
    }

    /// `f_k = f_{u1} f_t f_w f_{u2}` via the residue Bruhat decomposition.
    pub fn residue_tokens(&self, r: &ResidueMatrix) -> Result<Vec<GeneratorToken>> {
        if r.m() != self.m {
            return Err(HeckeError::Mismatch("residue matrix of the wrong size".into()));
        }
        let (u1, t, w, u2) = residue_bruhat(r, &self.field)?;
        let mut toks = Vec::new();
        if !u1.is_identity() {
            toks.push(GeneratorToken::Unipotent(u1));
        }
        if !t.is_identity() {
            toks.push(GeneratorToken::Torus(t));
        }
        toks.extend(w.reduced_word().into_iter().map(GeneratorToken::Simple));
        if !u2.is_identity() {
            toks.push(GeneratorToken::Unipotent(u2));
        }
        Ok(toks)
    }

    fn times_simple(&self, x: &NormalWord, kk: usize) -> Result<NormalWord> {
        let m = self.m;
        let k = &self.field;
        if kk + 1 >= m {
            return Err(HeckeError::Config(format!("simple reflection index {kk} out of range")));
        }
        let alpha = Root::simple(kk);
        let s = Perm::simple(m, kk);
        let allowed: BTreeSet<Root> = positive_roots(m).into_iter().filter(|&r| x.w2.act(r).is_positive()).collect();
        let (v1, v2) = if allowed.contains(&alpha) {
            let rest: BTreeSet<Root> = allowed.iter().copied().filter(|&r| r != alpha).collect();
            factor_unipotent(&x.u2, &BTreeSet::from([alpha]), &rest, k)?
        } else {
            (Unipotent::identity(m), x.u2.clone())
        };
        let sv2s = v2.conj_by_perm(&s);
        let xval = v1.get(alpha);
        if xval == 0 {
            let mut w = x.clone();
            w.w2 = x.w2.compose(&s);
            w.u2 = sv2s;
            return self.normalize(&w);
        }
        let gamma = x.w2.act(alpha);
        let p = x.tau.p_set();
        if !p.spans(gamma) {
            let (_, tp, v4) = sl2_bruhat(m, xval, kk, k)?;
            let mut w = x.clone();
            w.t = x.t.mul(&self.conj_torus(&self.g_factors(x), &tp), k);
            w.u2 = v4.mul(&sv2s, k)?;
            self.normalize(&w)
        } else if !x.w1.act(gamma).is_positive() {
            let (v3, tp, v4) = sl2_bruhat(m, xval, kk, k)?;
            let mut factors = vec![Mono::Torus(&x.t)];
            factors.extend(self.g_factors(x));
            factors.push(Mono::Perm(&s));
            let moved = self.conj_unipotent(&factors, &v3)?;
            let mut w = x.clone();
            w.u1 = x.u1.mul(&moved, k)?;
            w.t = x.t.mul(&self.conj_torus(&self.g_factors(x), &tp), k);
            w.u2 = v4.mul(&sv2s, k)?;
            self.normalize(&w)
        } else {
            let mut factors = vec![Mono::Torus(&x.t)];
            factors.extend(self.g_factors(x));
            let moved = self.conj_unipotent(&factors, &v1)?;
            let mut w = x.clone();
            w.u1 = x.u1.mul(&moved, k)?;
            w.w2 = x.w2.compose(&s);
            w.u2 = sv2s;
            self.normalize(&w)
        }
    }

    fn times_tau_alpha(&self, x: &NormalWord, kk: usize) -> Result<WordTerms> {
        let m = self.m;
        let k = &self.field;
        if kk + 1 >= m {
            return Err(HeckeError::Config(format!("tau index {kk} out of range")));
        }
        let hat = SimpleSubset::single(kk).complement(m);
        let (levi, unip): (BTreeSet<Root>, BTreeSet<Root>) = positive_roots(m).into_iter().partition(|&r| hat.spans(r));
        let (v1, _) = factor_unipotent(&x.u2, &levi, &unip, k)?;
        let tau_a = Tau::generator(m, kk);
        let neg: Vec<i64> = tau_a.diagonal().iter().map(|b| -b).collect();
        let v1p = v1.conj_by_varpi_diag(&neg, self.sigma, k)?;

        let (w, _) = min_decomp_left(&x.w2, hat);
        let pq = pq_sets(&w, kk);
        let reduced = x
            .tau
            .checked_div(&Tau::of_subset(m, pq.p))
            .ok_or_else(|| HeckeError::Invariant("tau_P does not divide tau".into()))?;
        let mut q_exp = vec![0u32; m - 1];
        let mut central = 0;
        for &h in &pq.q {
            if h == 0 {
                central += 1;
            } else {
                q_exp[h - 1] += 1;
            }
        }
        let new_tau = reduced.mul(&Tau::from_exponents(q_exp));
        let coeff = BigInt::from(self.q()).pow(w.length() as u32);
        let support = w.inverse().inversion_set();
        let tail: Vec<usize> = x.w2.reduced_word();
        let mut out = Vec::new();
        for u in Unipotent::enumerate_on(m, &support, k) {
            let raw = NormalWord {
                u1: x.u1.clone(),
                t: x.t.clone(),
                i: x.i + central,
                w1: x.w1.clone(),
                tau: new_tau.clone(),
                w2: Perm::identity(m),
                u2: u,
            };
            let mut word = self.normalize(&raw)?;
            for &s in &tail {
                word = self.times_simple(&word, s)?;
            }
            let mut fin = word.clone();
            fin.u2 = word.u2.mul(&v1p, k)?;
            out.push((self.normalize(&fin)?, coeff.clone()));
        }
        Ok(out)
    }

    /// The generator word of a basis element.
    pub fn expand_to_tokens(&self, x: &NormalWord) -> Vec<GeneratorToken> {
        let mut toks = Vec::new();
        if !x.u1.is_identity() {
            toks.push(GeneratorToken::Unipotent(x.u1.clone()));
        }
        if !x.t.is_identity() {
            toks.push(GeneratorToken::Torus(x.t.clone()));
        }
        let e = x.i.signum();
        toks.extend((0..x.i.abs()).map(|_| GeneratorToken::Tau0(e)));
        toks.extend(x.w1.reduced_word().into_iter().map(GeneratorToken::Simple));
        for (kk, &a) in x.tau.exponents().iter().enumerate() {
            toks.extend((0..a).map(|_| GeneratorToken::TauAlpha(kk)));
        }
        toks.extend(x.w2.reduced_word().into_iter().map(GeneratorToken::Simple));
        if !x.u2.is_identity() {
            toks.push(GeneratorToken::Unipotent(x.u2.clone()));
        }
        toks
    }

    pub fn mul_gen(&self, a: &AlgebraElement, g: &GeneratorToken) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero().with_modulus(a.modulus.clone());
        for (w, c) in a.terms() {
            for (w2, c2) in self.word_times(w, g)? {
                out.add_term(w2, c * c2);
            }
        }
        Ok(out)
    }

    pub fn mul_tokens(&self, a: &AlgebraElement, toks: &[GeneratorToken]) -> Result<AlgebraElement> {
        let mut cur = a.clone();
        for g in toks {
            cur = self.mul_gen(&cur, g)?;
        }
        Ok(cur)
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        let modulus = a.modulus.clone().or_else(|| b.modulus.clone());
        let mut out = AlgebraElement::zero().with_modulus(modulus.clone());
        let a = a.clone().with_modulus(modulus);
        for (y, c) in b.terms() {
            self.check_word(y)?;
            let prod = self.mul_tokens(&a, &self.expand_to_tokens(y))?;
            out = out.add(&prod.scale(c));
        }
        Ok(out)
    }

    pub fn check_word(&self, w: &NormalWord) -> Result<()> {
        if w.m() != self.m {
            return Err(HeckeError::Mismatch(format!("word for m = {} in algebra for m = {}", w.m(), self.m)));
        }
        w.check()
    }

    /// Normal word of `f_k` for `k` in `K`.
    pub fn word_of_residue(&self, r: &ResidueMatrix) -> Result<NormalWord> {
        let terms = self.word_times(&NormalWord::unit(self.m), &GeneratorToken::Residue(r.clone()))?;
        Ok(terms.into_iter().next().expect("single term").0)
    }

    pub fn relation_sides(&self, rel: &Relation) -> Result<(AlgebraElement, AlgebraElement)> {
        use GeneratorToken as T;
        let m = self.m;
        let k = &self.field;
        let one = self.unit();
        let eval = |toks: &[GeneratorToken]| self.mul_tokens(&one, toks);
        let bad = |msg: &str| HeckeError::Instance(msg.to_string());
        let check_alpha = |a: usize| if a + 1 < m { Ok(()) } else { Err(bad("simple root index out of range")) };
        let hat = |a: usize| SimpleSubset::single(a).complement(m);
        let root_ok = |r: &Root| r.i < m && r.j < m && r.i != r.j;
        match rel {
            Relation::R1 { k1, k2 } => {
                if !k1.is_invertible(k) || !k2.is_invertible(k) || k1.m() != m || k2.m() != m {
                    return Err(bad("relation 1 needs two elements of GL_m(F_q)"));
                }
                Ok((eval(&[T::Residue(k1.clone()), T::Residue(k2.clone())])?, eval(&[T::Residue(k1.mul(k2, k))])?))
            }
            Relation::R2Inverse => Ok((eval(&[T::Tau0(1), T::Tau0(-1)])?, one.clone())),
            Relation::R2Conj { omega } => {
                let conj = match omega {
                    T::Residue(r) => T::Residue(r.conj_by_varpi_diag(&self.central(-1), self.sigma, k)?),
                    T::Unipotent(u) => T::Unipotent(u.conj_by_varpi_diag(&self.central(-1), self.sigma, k)?),
                    T::Torus(t) => T::Torus(t.conj_by_varpi_diag(&self.central(-1), self.sigma, k)),
                    other => other.clone(),
                };
                Ok((eval(&[T::Tau0(-1), omega.clone()])?, eval(&[conj, T::Tau0(-1)])?))
            }
            Relation::R3 { alpha, t } => {
                check_alpha(*alpha)?;
                let b = Tau::generator(m, *alpha).diagonal();
                let conj = t.conj_by_varpi_diag(&b, self.sigma, k);
                Ok((eval(&[T::TauAlpha(*alpha), T::Torus(t.clone())])?, eval(&[T::Torus(conj), T::TauAlpha(*alpha)])?))
            }
            Relation::R4 { alpha, root, x } => {
                check_alpha(*alpha)?;
                if !root_ok(root) || !hat(*alpha).spans(*root) {
                    return Err(bad("relation 4 needs a root of the Levi of alpha^"));
                }
                let u = Unipotent::elementary(m, *root, *x);
                let b = Tau::generator(m, *alpha).diagonal();
                let conj = u.conj_by_varpi_diag(&b, self.sigma, k)?;
                Ok((
                    eval(&[T::TauAlpha(*alpha), T::Residue(u.matrix().clone())])?,
                    eval(&[T::Residue(conj.matrix().clone()), T::TauAlpha(*alpha)])?,
                ))
            }
            Relation::R5 { alpha, root, x } => {
                check_alpha(*alpha)?;
                if !root_ok(root) || !root.is_positive() || hat(*alpha).spans(*root) {
                    return Err(bad("relation 5 needs a root of Psi_{alpha^}^+"));
                }
                let u = Unipotent::elementary(m, *root, *x);
                Ok((eval(&[T::Unipotent(u), T::TauAlpha(*alpha)])?, eval(&[T::TauAlpha(*alpha)])?))
            }
            Relation::R6 { alpha, root, x } => {
                check_alpha(*alpha)?;
                if !root_ok(root) || root.is_positive() || hat(*alpha).spans(*root) {
                    return Err(bad("relation 6 needs a root of Psi_{alpha^}^-"));
                }
                let u = Unipotent::elementary(m, *root, *x);
                Ok((eval(&[T::TauAlpha(*alpha), T::Residue(u.matrix().clone())])?, eval(&[T::TauAlpha(*alpha)])?))
            }
            Relation::R7 { alpha, beta } => {
                check_alpha(*alpha)?;
                check_alpha(*beta)?;
                if alpha == beta {
                    return Err(bad("relation 7 needs distinct simple roots"));
                }
                Ok((
                    eval(&[T::TauAlpha(*alpha), T::Simple(*beta)])?,
                    eval(&[T::Simple(*beta), T::TauAlpha(*alpha)])?,
                ))
            }
            Relation::R8 { alpha, beta } => {
                check_alpha(*alpha)?;
                check_alpha(*beta)?;
                Ok((
                    eval(&[T::TauAlpha(*alpha), T::TauAlpha(*beta)])?,
                    eval(&[T::TauAlpha(*beta), T::TauAlpha(*alpha)])?,
                ))
            }
            Relation::R9 { alpha, w } => {
                check_alpha(*alpha)?;
                if w.m() != m || !is_min_left(w, hat(*alpha)) {
                    return Err(bad("relation 9 needs w minimal in w W_{alpha^}"));
                }
                let pq = pq_sets(w, *alpha);
                let mut lhs = Vec::new();
                lhs.extend(pq.p.indices(m).into_iter().map(T::TauAlpha));
                lhs.extend(w.reduced_word().into_iter().map(T::Simple));
                lhs.push(T::TauAlpha(*alpha));
                lhs.extend(w.inverse().reduced_word().into_iter().map(T::Simple));
                let mut prefix = Vec::new();
                for &h in &pq.q {
                    prefix.push(if h == 0 { T::Tau0(1) } else { T::TauAlpha(h - 1) });
                }
                let base = eval(&prefix)?;
                let mut rhs = AlgebraElement::zero();
                for u in Unipotent::enumerate_on(m, &w.inverse().inversion_set(), k) {
                    rhs = rhs.add(&self.mul_gen(&base, &T::Unipotent(u))?);
                }
                let coeff = BigInt::from(self.q()).pow(w.length() as u32);
                Ok((eval(&lhs)?, rhs.scale(&coeff)))
            }
        }
    }

    pub fn relation_check(&self, rel: &Relation) -> Result<bool> {
        let (l, r) = self.relation_sides(rel)?;
        Ok(l == r)
    }

    /// Instances of relation `n`: exhaustive over roots, Weyl elements and
    /// (for root groups) field elements; `random` samples for tori and `K`.
    pub fn relation_instances<R: Rng>(&self, n: u8, random: usize, rng: &mut R) -> Result<Vec<Relation>> {
        let m = self.m;
        let k = &self.field;
        let simple: Vec<usize> = (0..m.saturating_sub(1)).collect();
        let mut out = Vec::new();
        let roots: Vec<Root> =
            (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| Root::new(i, j))).collect();
        match n {
            1 => {
                for _ in 0..random {
                    out.push(Relation::R1 {
                        k1: ResidueMatrix::random_invertible(m, k, rng),
                        k2: ResidueMatrix::random_invertible(m, k, rng),
                    });
                }
            }
            2 => {
                out.push(Relation::R2Inverse);
                out.push(Relation::R2Conj { omega: GeneratorToken::Tau0(1) });
                out.push(Relation::R2Conj { omega: GeneratorToken::Tau0(-1) });
                out.extend(simple.iter().map(|&a| Relation::R2Conj { omega: GeneratorToken::TauAlpha(a) }));
                for _ in 0..random {
                    out.push(Relation::R2Conj { omega: GeneratorToken::Residue(ResidueMatrix::random_invertible(m, k, rng)) });
                }
            }
            3 => {
                for &a in &simple {
                    for _ in 0..random {
                        out.push(Relation::R3 { alpha: a, t: Torus::random(m, k, rng) });
                    }
                }
            }
            4..=6 => {
                for &a in &simple {
                    let hat = SimpleSubset::single(a).complement(m);
                    for &r in &roots {
                        let fits = match n {
                            4 => hat.spans(r),
                            5 => r.is_positive() && !hat.spans(r),
                            _ => !r.is_positive() && !hat.spans(r),
                        };
                        if !fits {
                            continue;
                        }
                        for x in k.elements() {
                            out.push(match n {
                                4 => Relation::R4 { alpha: a, root: r, x },
                                5 => Relation::R5 { alpha: a, root: r, x },
                                _ => Relation::R6 { alpha: a, root: r, x },
                            });
                        }
                    }
                }
            }
            7 | 8 => {
                for &a in &simple {
                    for &b in &simple {
                        if n == 8 {
                            out.push(Relation::R8 { alpha: a, beta: b });
                        } else if a != b {
                            out.push(Relation::R7 { alpha: a, beta: b });
                        }
                    }
                }
            }
            9 => {
                for &a in &simple {
                    let hat = SimpleSubset::single(a).complement(m);
                    for w in all_perms(m) {
                        if is_min_left(&w, hat) {
                            out.push(Relation::R9 { alpha: a, w });
                        }
                    }
                }
            }
            _ => return Err(HeckeError::Instance(format!("no relation number {n}"))),
        }
        Ok(out)
    }

    /// Every basis element of `H(K, K^1)`, one per element of `GL_m(F_q)`.
    pub fn group_basis(&self) -> Result<Vec<(ResidueMatrix, NormalWord)>> {
        ResidueMatrix::all_invertible(self.m, &self.field)
            .into_iter()
            .map(|g| Ok((g.clone(), self.word_of_residue(&g)?)))
            .collect()
    }

    /// A random normal word with `tau` exponents at most `max_tau` and
    /// `|i| <= max_i`.
    pub fn random_word<R: Rng>(&self, max_tau: u32, max_i: i64, rng: &mut R) -> NormalWord {
        let m = self.m;
        let k = &self.field;
        let perms = all_perms(m);
        let tau = Tau::from_exponents((0..m - 1).map(|_| rng.gen_range(0..=max_tau)).collect());
        let w1 = perms[rng.gen_range(0..perms.len())].clone();
        let (_, w2) = min_decomp_right(tau.p_set(), &perms[rng.gen_range(0..perms.len())]);
        let s1 = w1.inverse().inversion_set();
        let s2: BTreeSet<Root> = positive_roots(m).into_iter().filter(|&r| w2.act(r).is_positive()).collect();
        NormalWord {
            u1: Unipotent::random_on(m, &s1, k, rng),
            t: Torus::random(m, k, rng),
            i: rng.gen_range(-max_i..=max_i),
            w1,
            tau,
            w2,
            u2: Unipotent::random_on(m, &s2, k, rng),
        }
    }

    /// A random tuple of the right shape that need not be normal.
    pub fn random_raw<R: Rng>(&self, max_tau: u32, max_i: i64, rng: &mut R) -> NormalWord {
        let m = self.m;
        let k = &self.field;
        let perms = all_perms(m);
        let all: BTreeSet<Root> = positive_roots(m).into_iter().collect();
        NormalWord {
            u1: Unipotent::random_on(m, &all, k, rng),
            t: Torus::random(m, k, rng),
            i: rng.gen_range(-max_i..=max_i),
            w1: perms[rng.gen_range(0..perms.len())].clone(),
            tau: Tau::from_exponents((0..m - 1).map(|_| rng.gen_range(0..=max_tau)).collect()),
            w2: perms[rng.gen_range(0..perms.len())].clone(),
            u2: Unipotent::random_on(m, &all, k, rng),
        }
    }
}
