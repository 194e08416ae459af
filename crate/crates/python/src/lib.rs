//! Python bindings: algebras, elements, the oracle check and decomposition.

use std::sync::Arc;

use hecke_core::cli::{element_to_json, parse_element, parse_matrix, render, word_to_json};
use hecke_core::oracle::{check_product, iwahori_decompose};
use hecke_core::presentation::{AlgebraElement, GeneratorToken, HeckeAlgebra};
use hecke_core::residue::Unipotent;
use hecke_core::weyl::Root;
use hecke_core::tensor::{ProductElement, TensorAlgebra};
use hecke_core::HeckeError;
use num_bigint::BigInt;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::Value;

fn err(e: HeckeError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_of(text: &str) -> PyResult<Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid JSON: {e}")))
}

/// The Hecke algebra of `GL_m(D)` relative to `K^1`.
#[pyclass(name = "Algebra", module = "hecke", frozen, from_py_object)]
#[derive(Clone)]
struct PyAlgebra {
    inner: Arc<HeckeAlgebra>,
}

#[pymethods]
impl PyAlgebra {
    #[new]
    #[pyo3(signature = (m, p, f = 1, s = 0))]
    fn new(m: usize, p: u32, f: u32, s: i64) -> PyResult<Self> {
        Ok(PyAlgebra { inner: Arc::new(HeckeAlgebra::with_params(m, p, f, s).map_err(err)?) })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    fn unit(&self) -> PyElement {
        PyElement { alg: self.inner.clone(), inner: self.inner.unit() }
    }

    /// Parses an element document, or a single word.
    #[pyo3(signature = (text, normalize = false))]
    fn element(&self, text: &str, normalize: bool) -> PyResult<PyElement> {
        let inner = parse_element(&json_of(text)?, &self.inner, normalize).map_err(err)?;
        Ok(PyElement { alg: self.inner.clone(), inner })
    }

    /// A named generator: `tau0`, `tau0^-1`, `s<k>`, `tau<k>` or `e<k>(x)`
    /// for the root `(k, k+1)`, with 1-based `k`.
    fn generator(&self, name: &str) -> PyResult<PyElement> {
        let m = self.inner.m();
        let index = |s: &str| -> PyResult<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&k| k >= 1 && k < m)
                .map(|k| k - 1)
                .ok_or_else(|| PyKeyError::new_err(name.to_string()))
        };
        let tok = if name == "tau0" {
            GeneratorToken::Tau0(1)
        } else if name == "tau0^-1" {
            GeneratorToken::Tau0(-1)
        } else if let Some(rest) = name.strip_prefix("tau") {
            GeneratorToken::TauAlpha(index(rest)?)
        } else if let Some(rest) = name.strip_prefix('s') {
            GeneratorToken::Simple(index(rest)?)
        } else if let Some((k, x)) = name.strip_prefix('e').and_then(|r| r.strip_suffix(')')).and_then(|r| r.split_once('(')) {
            let k = index(k)?;
            let x = self.inner.field().parse(x).map_err(err)?;
            GeneratorToken::Unipotent(Unipotent::elementary(m, Root::new(k, k + 1), x))
        } else {
            return Err(PyKeyError::new_err(name.to_string()));
        };
        let inner = self.inner.mul_tokens(&self.inner.unit(), &[tok]).map_err(err)?;
        Ok(PyElement { alg: self.inner.clone(), inner })
    }

    /// The basis element of the double coset of a matrix over `F_q((t))`,
    /// given as rows of strings `"t^v*(c0+c1*t+...)"`.
    fn decompose(&self, rows: Vec<Vec<String>>) -> PyResult<PyElement> {
        let v = Value::from(rows);
        let x = parse_matrix(&v, &self.inner).map_err(err)?;
        let w = iwahori_decompose(&self.inner, &x).map_err(err)?;
        Ok(PyElement { alg: self.inner.clone(), inner: AlgebraElement::basis(w) })
    }

    /// Checks the defining relations; returns the number of failing instances.
    #[pyo3(signature = (random = 100, seed = 0))]
    fn relations_check(&self, random: usize, seed: u64) -> PyResult<usize> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut failures = 0;
        for n in 1..=9 {
            for inst in self.inner.relation_instances(n, random, &mut rng).map_err(err)? {
                if !self.inner.relation_check(&inst).map_err(err)? {
                    failures += 1;
                }
            }
        }
        Ok(failures)
    }

    /// Compares `f_a f_b` with brute-force coset counting; both must be
    /// basis elements. Returns the list of disagreements.
    #[pyo3(signature = (a, b, depth = 4))]
    fn oracle_check(&self, a: &PyElement, b: &PyElement, depth: i64) -> PyResult<Vec<String>> {
        let single = |e: &PyElement| {
            let mut it = e.inner.terms();
            match (it.next(), it.next()) {
                (Some((w, c)), None) if *c == BigInt::from(1) => Ok(w.clone()),
                _ => Err(PyValueError::new_err("expected a basis element")),
            }
        };
        let chk = check_product(&self.inner, &single(a)?, &single(b)?, depth).map_err(err)?;
        let mut out = chk.mismatches;
        if chk.mass.0 != chk.mass.1 {
            out.push(format!("mass {} != {}", chk.mass.0, chk.mass.1));
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        let k = self.inner.field();
        format!("Algebra(m={}, p={}, f={}, s={})", self.inner.m(), k.p(), k.f(), self.inner.sigma())
    }
}

/// A finite integer combination of basis elements.
#[pyclass(name = "Element", module = "hecke", frozen, from_py_object)]
#[derive(Clone)]
struct PyElement {
    alg: Arc<HeckeAlgebra>,
    inner: AlgebraElement,
}

impl PyElement {
    fn same(&self, other: &PyElement) -> PyResult<()> {
        if self.alg.same_params(&other.alg) {
            Ok(())
        } else {
            Err(err(HeckeError::Mismatch("elements of different algebras".into())))
        }
    }
}

#[pymethods]
impl PyElement {
    fn __mul__(&self, other: &PyElement) -> PyResult<PyElement> {
        self.same(other)?;
        Ok(PyElement { alg: self.alg.clone(), inner: self.alg.mul(&self.inner, &other.inner).map_err(err)? })
    }

    fn __add__(&self, other: &PyElement) -> PyResult<PyElement> {
        self.same(other)?;
        Ok(PyElement { alg: self.alg.clone(), inner: self.inner.add(&other.inner) })
    }

    fn __sub__(&self, other: &PyElement) -> PyResult<PyElement> {
        self.same(other)?;
        Ok(PyElement { alg: self.alg.clone(), inner: self.inner.sub(&other.inner) })
    }

    fn __eq__(&self, other: &PyElement) -> bool {
        self.alg.same_params(&other.alg) && self.inner == other.inner
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn scale(&self, c: i64) -> PyElement {
        PyElement { alg: self.alg.clone(), inner: self.inner.scale(&BigInt::from(c)) }
    }

    fn reduce_mod(&self, l: i64) -> PyResult<PyElement> {
        Ok(PyElement { alg: self.alg.clone(), inner: self.inner.reduce_mod(&BigInt::from(l)).map_err(err)? })
    }

    /// Coefficients as decimal strings, in basis order.
    fn coefficients(&self) -> Vec<String> {
        self.inner.terms().map(|(_, c)| c.to_string()).collect()
    }

    /// Basis words as JSON strings, in basis order.
    fn words(&self) -> Vec<String> {
        self.inner.terms().map(|(w, _)| render(&word_to_json(w, &self.alg)).trim_end().to_string()).collect()
    }

    fn to_json(&self) -> String {
        render(&element_to_json(&self.inner, &self.alg))
    }

    fn __repr__(&self) -> String {
        self.inner.to_string()
    }
}

/// Products of several algebras, on documents whose words are arrays.
#[pyclass(name = "TensorAlgebra", module = "hecke", frozen)]
struct PyTensorAlgebra {
    inner: TensorAlgebra,
}

#[pymethods]
impl PyTensorAlgebra {
    #[new]
    fn new(factors: Vec<PyAlgebra>) -> PyResult<Self> {
        let algs = factors.iter().map(|a| (*a.inner).clone()).collect();
        Ok(PyTensorAlgebra { inner: TensorAlgebra::new(algs).map_err(err)? })
    }

    /// `e_1 (x) .. (x) e_r` as a document.
    fn pure(&self, parts: Vec<PyElement>) -> PyResult<String> {
        if parts.len() != self.inner.r() {
            return Err(err(HeckeError::Mismatch(format!("{} parts for {} factors", parts.len(), self.inner.r()))));
        }
        let elems: Vec<AlgebraElement> = parts.into_iter().map(|p| p.inner).collect();
        Ok(render(&hecke_core::cli::product_element_to_json(&ProductElement::pure(&elems), &self.inner)))
    }

    fn mul(&self, a: &str, b: &str) -> PyResult<String> {
        let x = hecke_core::cli::parse_product_element(&json_of(a)?, &self.inner, false).map_err(err)?;
        let y = hecke_core::cli::parse_product_element(&json_of(b)?, &self.inner, false).map_err(err)?;
        let z = self.inner.tensor_mul(&x, &y).map_err(err)?;
        Ok(render(&hecke_core::cli::product_element_to_json(&z, &self.inner)))
    }
}

#[pymodule]
fn hecke(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyElement>()?;
    m.add_class::<PyTensorAlgebra>()?;
    Ok(())
}
