//! Hecke algebras of products `G_1 x .. x G_r`, as tuples of basis words.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{HeckeError, Result};
use crate::presentation::{AlgebraElement, HeckeAlgebra, NormalWord};

/// One basis word per factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductWord(pub Vec<NormalWord>);

impl fmt::Display for ProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(" (x) "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProductElement {
    terms: BTreeMap<ProductWord, BigInt>,
}

impl ProductElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(w: ProductWord) -> Self {
        let mut e = Self::zero();
        e.add_term(w, BigInt::one());
        e
    }

    /// `a_1 (x) .. (x) a_r`.
    pub fn pure(factors: &[AlgebraElement]) -> Self {
        let mut acc = Self::basis(ProductWord(Vec::new()));
        for a in factors {
            let mut next = Self::zero();
            for (pw, c) in &acc.terms {
                for (w, d) in a.terms() {
                    let mut words = pw.0.clone();
                    words.push(w.clone());
                    next.add_term(ProductWord(words), c * d);
                }
            }
            acc = next;
        }
        acc
    }

    pub fn add_term(&mut self, w: ProductWord, c: BigInt) {
        let e = self.terms.entry(w.clone()).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &ProductElement) -> ProductElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProductWord, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &ProductWord) -> BigInt {
        self.terms.get(w).cloned().unwrap_or_default()
    }
}

impl fmt::Display for ProductElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("{c}*{w}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The algebra `H(G_1, K_1^1) (x) .. (x) H(G_r, K_r^1)`.
#[derive(Clone, Debug)]
pub struct TensorAlgebra {
    factors: Vec<HeckeAlgebra>,
}

impl TensorAlgebra {
    pub fn new(factors: Vec<HeckeAlgebra>) -> Result<Self> {
        if factors.is_empty() {
            return Err(HeckeError::Config("a product needs at least one factor".into()));
        }
        Ok(TensorAlgebra { factors })
    }

    pub fn factors(&self) -> &[HeckeAlgebra] {
        &self.factors
    }

    pub fn r(&self) -> usize {
        self.factors.len()
    }

    pub fn unit(&self) -> ProductElement {
        ProductElement::basis(ProductWord(self.factors.iter().map(|a| NormalWord::unit(a.m())).collect()))
    }

    /// `1 (x) .. (x) a (x) .. (x) 1` with `a` in slot `i`.
    pub fn embed(&self, slot: usize, a: &AlgebraElement) -> Result<ProductElement> {
        if slot >= self.r() {
            return Err(HeckeError::Mismatch(format!("slot {slot} out of range for {} factors", self.r())));
        }
        let parts: Vec<AlgebraElement> = self
            .factors
            .iter()
            .enumerate()
            .map(|(j, alg)| if j == slot { a.clone() } else { alg.unit() })
            .collect();
        Ok(ProductElement::pure(&parts))
    }

    fn check(&self, w: &ProductWord) -> Result<()> {
        if w.0.len() != self.r() {
            return Err(HeckeError::Mismatch(format!("{} components for {} factors", w.0.len(), self.r())));
        }
        for (alg, x) in self.factors.iter().zip(&w.0) {
            alg.check_word(x)?;
        }
        Ok(())
    }

    pub fn tensor_mul(&self, a: &ProductElement, b: &ProductElement) -> Result<ProductElement> {
        let mut out = ProductElement::zero();
        for (x, c) in a.terms() {
            self.check(x)?;
            for (y, d) in b.terms() {
                self.check(y)?;
                let parts: Vec<AlgebraElement> = self
                    .factors
                    .iter()
                    .zip(x.0.iter().zip(&y.0))
                    .map(|(alg, (u, v))| {
                        alg.mul(&AlgebraElement::basis(u.clone()), &AlgebraElement::basis(v.clone()))
                    })
                    .collect::<Result<_>>()?;
                let scale = c * d;
                for (w, e) in ProductElement::pure(&parts).terms {
                    out.add_term(w, e * &scale);
                }
            }
        }
        Ok(out)
    }
}
