//! Finite fields `F_q`, `q = p^f`, by lookup tables.

use crate::error::{HeckeError, Result};

/// An element of `F_q`, stored as the index `sum c_k p^k` of its polynomial
/// representative `sum c_k X^k` modulo the field's defining polynomial.
pub type Fe = u16;

/// Largest supported field size; tables are `q * q`.
pub const MAX_Q: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: u32,
    f: u32,
    q: u32,
    /// Coefficients `c_0..c_{f-1}` of the monic defining polynomial minus `X^f`.
    modulus: Vec<u32>,
    add: Vec<Fe>,
    mul: Vec<Fe>,
    neg: Vec<Fe>,
    inv: Vec<Fe>,
    frob: Vec<Fe>,
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl Field {
    pub fn new(p: u32, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(HeckeError::Config(format!("p = {p} is not prime")));
        }
        if f == 0 {
            return Err(HeckeError::Config("f must be at least 1".into()));
        }
        let q = p
            .checked_pow(f)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| HeckeError::Config(format!("q = {p}^{f} exceeds {MAX_Q}")))?;
        let modulus = smallest_irreducible(p, f);
        let mut field = Field {
            p,
            f,
            q,
            modulus,
            add: vec![0; (q * q) as usize],
            mul: vec![0; (q * q) as usize],
            neg: vec![0; q as usize],
            inv: vec![0; q as usize],
            frob: vec![0; q as usize],
        };
        field.build_tables();
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn zero(&self) -> Fe {
        0
    }

    pub fn one(&self) -> Fe {
        1
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.q as Fe
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> {
        1..self.q as Fe
    }

    /// An `F_p`-basis of `F_q`: the monomials `1, X, ..., X^{f-1}`.
    pub fn additive_basis(&self) -> Vec<Fe> {
        (0..self.f).map(|k| self.p.pow(k) as Fe).collect()
    }

    fn digits(&self, x: Fe) -> Vec<u32> {
        let mut x = x as u32;
        (0..self.f)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    fn from_digits(&self, d: &[u32]) -> Fe {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c) as Fe
    }

    fn poly_mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = self.f as usize;
        let mut prod = vec![0u32; 2 * f];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // reduce X^f = -sum c_k X^k
        for deg in (f..2 * f).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (k, &mk) in self.modulus.iter().enumerate() {
                let sub = c * mk % self.p;
                prod[deg - f + k] = (prod[deg - f + k] + self.p - sub) % self.p;
            }
        }
        prod.truncate(f);
        prod
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let digits: Vec<Vec<u32>> = (0..q).map(|x| self.digits(x as Fe)).collect();
        for a in 0..q {
            for b in 0..q {
                let s: Vec<u32> = digits[a].iter().zip(&digits[b]).map(|(x, y)| (x + y) % self.p).collect();
                self.add[a * q + b] = self.from_digits(&s);
                let pr = self.poly_mul(&digits[a], &digits[b]);
                self.mul[a * q + b] = self.from_digits(&pr);
            }
            let n: Vec<u32> = digits[a].iter().map(|x| (self.p - x) % self.p).collect();
            self.neg[a] = self.from_digits(&n);
        }
        for a in 1..q {
            let b = (1..q).find(|&b| self.mul[a * q + b] == 1).expect("field has inverses");
            self.inv[a] = b as Fe;
        }
        for a in 0..q {
            self.frob[a] = self.pow(a as Fe, self.p as u64);
        }
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.add[a as usize * self.q as usize + b as usize]
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a == 0 {
            Err(HeckeError::Arithmetic("inverse of zero in the residue field".into()))
        } else {
            Ok(self.inv[a as usize])
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul[acc as usize * self.q as usize + base as usize];
            }
            base = self.mul[base as usize * self.q as usize + base as usize];
            e >>= 1;
        }
        acc
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.frob[a as usize]
    }

    /// `x -> x^{p^e}` for any integer `e` (taken modulo `f`).
    pub fn frobenius_pow(&self, a: Fe, e: i64) -> Fe {
        let e = e.rem_euclid(self.f as i64);
        (0..e).fold(a, |x, _| self.frobenius(x))
    }

    /// Canonical text form: the base-`p` digits `c_{f-1}..c_0` of the
    /// polynomial representative, joined by `:` when `p > 10`.
    pub fn format(&self, a: Fe) -> String {
        if self.f == 1 {
            return a.to_string();
        }
        let d = self.digits(a);
        let parts: Vec<String> = d.iter().rev().map(|c| c.to_string()).collect();
        if self.p > 10 {
            parts.join(":")
        } else {
            parts.concat()
        }
    }

    pub fn parse(&self, s: &str) -> Result<Fe> {
        let bad = || HeckeError::Parse(format!("invalid F_{} element {s:?}", self.q));
        if self.f == 1 {
            let v: u32 = s.trim().parse().map_err(|_| bad())?;
            return if v < self.p { Ok(v as Fe) } else { Err(bad()) };
        }
        let digits: Vec<u32> = if self.p > 10 {
            s.split(':').map(|t| t.trim().parse::<u32>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?
        } else {
            s.trim().chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>()?
        };
        if digits.len() != self.f as usize || digits.iter().any(|&d| d >= self.p) {
            return Err(bad());
        }
        let little: Vec<u32> = digits.into_iter().rev().collect();
        Ok(self.from_digits(&little))
    }
}

/// Lexicographically smallest monic irreducible polynomial of degree `f`
/// over `F_p`, returned as its low coefficients `c_0..c_{f-1}`.
fn smallest_irreducible(p: u32, f: u32) -> Vec<u32> {
    if f == 1 {
        return vec![0];
    }
    let count = p.pow(f);
    'outer: for code in 0..count {
        let coeffs: Vec<u32> = (0..f).map(|k| code / p.pow(k) % p).collect();
        if coeffs[0] == 0 {
            continue;
        }
        // irreducible iff no monic factor of degree 1..=f/2
        for d in 1..=f / 2 {
            for fc in 0..p.pow(d) {
                let mut factor: Vec<u32> = (0..d).map(|k| fc / p.pow(k) % p).collect();
                factor.push(1);
                let mut full = coeffs.clone();
                full.push(1);
                if poly_rem_is_zero(&full, &factor, p) {
                    continue 'outer;
                }
            }
        }
        return coeffs;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn poly_rem_is_zero(num: &[u32], den: &[u32], p: u32) -> bool {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (k, &c) in den.iter().enumerate() {
                r[shift + k] = (r[shift + k] + p * p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}
