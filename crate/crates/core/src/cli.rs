//! Command-line front end and the JSON document formats.
//!
//! A word is `{"u1": [[i, j, "x"], ..], "t": ["x", ..], "i": n, "w1": [..],
//! "tau": [..], "w2": [..], "u2": [[i, j, "x"], ..]}` with 1-based indices.
//! An element is an array of `{"coeff": "c", "word": word}`; with several
//! factors `"word"` holds an array of words.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{HeckeError, Result};
use crate::oracle::{check_product, iwahori_decompose, precision_for, word_to_matrix, LocalMatrix, Oracle};
use crate::presentation::{AlgebraElement, GeneratorToken, HeckeAlgebra, NormalWord};
use crate::residue::{Torus, Unipotent};
use crate::tensor::{ProductElement, ProductWord, TensorAlgebra};
use crate::weyl::{Perm, Root, Tau};

/// Run parameters; also the schema of `--config` files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub m: usize,
    pub p: u32,
    #[serde(default = "one")]
    pub f: u32,
    #[serde(default)]
    pub s: i64,
    #[serde(default = "one_usize")]
    pub r: usize,
    /// Lower bound for the oracle's enumeration depth.
    #[serde(default)]
    pub n: Option<i64>,
    /// Coefficients are reduced modulo this integer when present.
    #[serde(default)]
    pub modulus: Option<String>,
}

fn one() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

impl Default for Config {
    fn default() -> Self {
        Config { m: 2, p: 2, f: 1, s: 0, r: 1, n: None, modulus: None }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.s < 0 {
            return Err(HeckeError::Config("s must be non-negative".into()));
        }
        if self.r == 0 {
            return Err(HeckeError::Config("r must be at least 1".into()));
        }
        if self.n.is_some_and(|n| n < 2) {
            return Err(HeckeError::Config("N must be at least 2".into()));
        }
        self.modulus_value()?;
        HeckeAlgebra::with_params(self.m, self.p, self.f, self.s).map(|_| ())
    }

    pub fn algebra(&self) -> Result<HeckeAlgebra> {
        self.validate()?;
        HeckeAlgebra::with_params(self.m, self.p, self.f, self.s)
    }

    pub fn modulus_value(&self) -> Result<Option<BigInt>> {
        match &self.modulus {
            None => Ok(None),
            Some(s) => {
                let l: BigInt = s.parse().map_err(|_| HeckeError::Config(format!("invalid modulus {s:?}")))?;
                if l < BigInt::from(2) {
                    return Err(HeckeError::Config("modulus must be at least 2".into()));
                }
                Ok(Some(l))
            }
        }
    }
}

fn at(path: &str, e: HeckeError) -> HeckeError {
    match e {
        HeckeError::Parse(msg) => HeckeError::Parse(format!("{path}: {msg}")),
        other => HeckeError::Parse(format!("{path}: {other}")),
    }
}

fn field_of<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| HeckeError::Parse(format!("{path}: missing field {key:?}")))
}

fn int_list(v: &Value, path: &str) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| HeckeError::Parse(format!("{path}: expected an array of integers")))?
        .iter()
        .enumerate()
        .map(|(n, x)| x.as_i64().ok_or_else(|| HeckeError::Parse(format!("{path}[{n}]: expected an integer"))))
        .collect()
}

fn perm_of(v: &Value, m: usize, path: &str) -> Result<Perm> {
    let imgs = int_list(v, path)?;
    if imgs.len() != m || imgs.iter().any(|&x| x < 1 || x > m as i64) {
        return Err(HeckeError::Parse(format!("{path}: expected a permutation of 1..{m}")));
    }
    Perm::from_images(imgs.iter().map(|&x| (x - 1) as usize).collect())
        .ok_or_else(|| HeckeError::Parse(format!("{path}: not a permutation")))
}

fn unipotent_of(v: &Value, m: usize, alg: &HeckeAlgebra, path: &str) -> Result<Unipotent> {
    let arr = v.as_array().ok_or_else(|| HeckeError::Parse(format!("{path}: expected an array")))?;
    let mut entries = Vec::new();
    for (n, e) in arr.iter().enumerate() {
        let p = format!("{path}[{n}]");
        let t = e.as_array().filter(|t| t.len() == 3).ok_or_else(|| HeckeError::Parse(format!("{p}: expected [i, j, \"x\"]")))?;
        let i = t[0].as_i64().ok_or_else(|| HeckeError::Parse(format!("{p}[0]: expected an integer")))?;
        let j = t[1].as_i64().ok_or_else(|| HeckeError::Parse(format!("{p}[1]: expected an integer")))?;
        if i < 1 || j < 1 || i > m as i64 || j > m as i64 || i == j {
            return Err(HeckeError::Parse(format!("{p}: ({i}, {j}) is not a root for m = {m}")));
        }
        let x = t[2].as_str().ok_or_else(|| HeckeError::Parse(format!("{p}[2]: expected a string")))?;
        let x = alg.field().parse(x).map_err(|e| at(&format!("{p}[2]"), e))?;
        entries.push((Root::new((i - 1) as usize, (j - 1) as usize), x));
    }
    Unipotent::from_entries(m, &entries).map_err(|e| at(path, e))
}

/// Reads a word; non-normal input is rejected unless `normalize` is set.
pub fn parse_word(v: &Value, alg: &HeckeAlgebra, normalize: bool, path: &str) -> Result<NormalWord> {
    let m = alg.m();
    if !v.is_object() {
        return Err(HeckeError::Parse(format!("{path}: expected a word object")));
    }
    for key in v.as_object().unwrap().keys() {
        if !["u1", "t", "i", "w1", "tau", "w2", "u2"].contains(&key.as_str()) {
            return Err(HeckeError::Parse(format!("{path}: unknown field {key:?}")));
        }
    }
    let p = |k: &str| format!("{path}.{k}");
    let u1 = unipotent_of(field_of(v, "u1", path)?, m, alg, &p("u1"))?;
    let t_raw = field_of(v, "t", path)?
        .as_array()
        .ok_or_else(|| HeckeError::Parse(format!("{}: expected an array", p("t"))))?;
    let t_vals = t_raw
        .iter()
        .enumerate()
        .map(|(n, x)| {
            let s = x.as_str().ok_or_else(|| HeckeError::Parse(format!("{}[{n}]: expected a string", p("t"))))?;
            alg.field().parse(s).map_err(|e| at(&format!("{}[{n}]", p("t")), e))
        })
        .collect::<Result<Vec<_>>>()?;
    if t_vals.len() != m {
        return Err(HeckeError::Parse(format!("{}: expected {m} entries", p("t"))));
    }
    let t = Torus::new(t_vals).map_err(|e| at(&p("t"), e))?;
    let i = field_of(v, "i", path)?.as_i64().ok_or_else(|| HeckeError::Parse(format!("{}: expected an integer", p("i"))))?;
    let w1 = perm_of(field_of(v, "w1", path)?, m, &p("w1"))?;
    let tau = int_list(field_of(v, "tau", path)?, &p("tau"))?;
    if tau.len() + 1 != m || tau.iter().any(|&a| a < 0) {
        return Err(HeckeError::Parse(format!("{}: expected {} non-negative integers", p("tau"), m - 1)));
    }
    let tau = Tau::from_exponents(tau.iter().map(|&a| a as u32).collect());
    let w2 = perm_of(field_of(v, "w2", path)?, m, &p("w2"))?;
    let u2 = unipotent_of(field_of(v, "u2", path)?, m, alg, &p("u2"))?;
    let w = NormalWord { u1, t, i, w1, tau, w2, u2 };
    if normalize {
        return alg.normalize(&w).map_err(|e| at(path, e));
    }
    w.check().map_err(|e| HeckeError::Parse(format!("{path}: {e}; pass --normalize to accept non-normal input")))?;
    Ok(w)
}

fn unipotent_json(u: &Unipotent, alg: &HeckeAlgebra) -> Value {
    Value::Array(
        u.entries()
            .iter()
            .map(|(r, x)| json!([r.i + 1, r.j + 1, alg.field().format(*x)]))
            .collect(),
    )
}

pub fn word_to_json(w: &NormalWord, alg: &HeckeAlgebra) -> Value {
    json!({
        "u1": unipotent_json(&w.u1, alg),
        "t": w.t.entries().iter().map(|&x| alg.field().format(x)).collect::<Vec<_>>(),
        "i": w.i,
        "w1": w.w1.images().iter().map(|&x| x + 1).collect::<Vec<_>>(),
        "tau": w.tau.exponents(),
        "w2": w.w2.images().iter().map(|&x| x + 1).collect::<Vec<_>>(),
        "u2": unipotent_json(&w.u2, alg),
    })
}

fn coeff_of(term: &Value, path: &str) -> Result<BigInt> {
    let c = field_of(term, "coeff", path)?
        .as_str()
        .ok_or_else(|| HeckeError::Parse(format!("{path}.coeff: expected a decimal string")))?;
    c.parse().map_err(|_| HeckeError::Parse(format!("{path}.coeff: invalid integer {c:?}")))
}

fn terms_of(v: &Value) -> Result<&Vec<Value>> {
    v.as_array().ok_or_else(|| HeckeError::Parse("element: expected an array of terms".into()))
}

/// Reads an element; a bare word stands for its basis element.
pub fn parse_element(v: &Value, alg: &HeckeAlgebra, normalize: bool) -> Result<AlgebraElement> {
    if v.is_object() {
        return Ok(AlgebraElement::basis(parse_word(v, alg, normalize, "word")?));
    }
    let mut out = AlgebraElement::zero();
    for (n, term) in terms_of(v)?.iter().enumerate() {
        let path = format!("element[{n}]");
        let c = coeff_of(term, &path)?;
        let w = parse_word(field_of(term, "word", &path)?, alg, normalize, &format!("{path}.word"))?;
        out.add_term(w, c);
    }
    Ok(out)
}

pub fn element_to_json(a: &AlgebraElement, alg: &HeckeAlgebra) -> Value {
    Value::Array(
        a.terms().map(|(w, c)| json!({"coeff": c.to_string(), "word": word_to_json(w, alg)})).collect(),
    )
}

pub fn parse_product_element(v: &Value, t: &TensorAlgebra, normalize: bool) -> Result<ProductElement> {
    let mut out = ProductElement::zero();
    for (n, term) in terms_of(v)?.iter().enumerate() {
        let path = format!("element[{n}]");
        let c = coeff_of(term, &path)?;
        let words = field_of(term, "word", &path)?
            .as_array()
            .ok_or_else(|| HeckeError::Parse(format!("{path}.word: expected an array of {} words", t.r())))?;
        if words.len() != t.r() {
            return Err(HeckeError::Mismatch(format!("{path}.word: {} components for {} factors", words.len(), t.r())));
        }
        let ws = words
            .iter()
            .zip(t.factors())
            .enumerate()
            .map(|(j, (w, alg))| parse_word(w, alg, normalize, &format!("{path}.word[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        out.add_term(ProductWord(ws), c);
    }
    Ok(out)
}

pub fn product_element_to_json(a: &ProductElement, t: &TensorAlgebra) -> Value {
    Value::Array(
        a.terms()
            .map(|(w, c)| {
                let words: Vec<Value> = w.0.iter().zip(t.factors()).map(|(x, alg)| word_to_json(x, alg)).collect();
                json!({"coeff": c.to_string(), "word": words})
            })
            .collect(),
    )
}

pub fn parse_matrix(v: &Value, alg: &HeckeAlgebra) -> Result<LocalMatrix> {
    let rows = v.as_array().ok_or_else(|| HeckeError::Parse("matrix: expected an array of rows".into()))?;
    let rows: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.as_array()
                .ok_or_else(|| HeckeError::Parse(format!("matrix[{r}]: expected an array")))?
                .iter()
                .enumerate()
                .map(|(c, x)| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| HeckeError::Parse(format!("matrix[{r}][{c}]: expected a string")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let a = LocalMatrix::parse(&rows, alg.field())?;
    if a.m() != alg.m() {
        return Err(HeckeError::Mismatch(format!("matrix is {}x{}, config has m = {}", a.m(), a.m(), alg.m())));
    }
    Ok(a)
}

/// A single word given either as a word object or as a one-term element.
fn parse_single_word(v: &Value, alg: &HeckeAlgebra, normalize: bool) -> Result<NormalWord> {
    if v.is_object() {
        return parse_word(v, alg, normalize, "word");
    }
    let e = parse_element(v, alg, normalize)?;
    let mut terms = e.terms();
    match (terms.next(), terms.next()) {
        (Some((w, c)), None) if *c == BigInt::from(1) => Ok(w.clone()),
        _ => Err(HeckeError::Parse("expected a single basis element".into())),
    }
}

#[derive(Parser, Debug)]
#[command(name = "hecke", version, about = "Exact computations in the pro-p Iwahori-type Hecke algebra of GL_m(D)")]
pub struct Cli {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct ParamArgs {
    /// JSON file with the fields of the configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    #[arg(long, global = true)]
    pub f: Option<u32>,
    /// Residue field size; sets p and f.
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Exponent of the Frobenius twist.
    #[arg(long, global = true)]
    pub s: Option<i64>,
    /// Number of factors.
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Lower bound for the oracle's enumeration depth.
    #[arg(long, global = true)]
    pub precision: Option<i64>,
    #[arg(long, global = true)]
    pub modulus: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Product of two elements.
    Mul {
        a: String,
        b: String,
        /// Accept non-normal words and normalize them.
        #[arg(long)]
        normalize: bool,
    },
    /// Products of all pairs of generators.
    Table {
        #[arg(long)]
        generators: bool,
    },
    /// Checks the defining relations.
    RelationsCheck {
        /// Random instances per relation with torus or unipotent parameters.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Restrict to one relation.
        #[arg(long)]
        relation: Option<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compares a product with the brute-force convolution.
    OracleCheck {
        a: String,
        b: String,
        #[arg(long)]
        normalize: bool,
    },
    /// Normal word of the double coset of a matrix over F_q((t)).
    Decompose { matrix: String },
    /// Multiplication table of the finite subalgebra H(K, K^1).
    GroupAlgebraTable,
}

fn prime_power(q: u32) -> Result<(u32, u32)> {
    let p = (2..=q).find(|d| q % d == 0).ok_or_else(|| HeckeError::Config(format!("q = {q} is not a prime power")))?;
    let mut f = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        f += 1;
    }
    if r != 1 {
        return Err(HeckeError::Config(format!("q = {q} is not a prime power")));
    }
    Ok((p, f))
}

impl ParamArgs {
    pub fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HeckeError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| HeckeError::Config(format!("{}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        if let Some(m) = self.m {
            c.m = m;
        }
        if let Some(q) = self.q {
            let (p, f) = prime_power(q)?;
            c.p = p;
            c.f = f;
        }
        if let Some(p) = self.p {
            c.p = p;
        }
        if let Some(f) = self.f {
            c.f = f;
        }
        if let Some(s) = self.s {
            c.s = s;
        }
        if let Some(r) = self.r {
            c.r = r;
        }
        if self.precision.is_some() {
            c.n = self.precision;
        }
        if self.modulus.is_some() {
            c.modulus = self.modulus.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// Inline JSON, or the path of a file holding it.
fn load_json(arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| HeckeError::Parse(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| HeckeError::Parse(format!("invalid JSON: {e}")))
}

pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn error_report(e: &HeckeError) -> Value {
    let kind = match e {
        HeckeError::Config(_) => "config",
        HeckeError::Arithmetic(_) => "arithmetic",
        HeckeError::Support(_) => "support",
        HeckeError::NegativeShift(_) => "negative_shift",
        HeckeError::Invariant(_) => "invariant",
        HeckeError::Instance(_) => "instance",
        HeckeError::Oracle(_) => "oracle",
        HeckeError::Parse(_) => "parse",
        HeckeError::Mismatch(_) => "mismatch",
    };
    json!({"status": "error", "kind": kind, "message": e.to_string()})
}

/// Runs a command: exit status and the JSON document to print.
pub fn run(cli: &Cli) -> (i32, String) {
    match execute(cli) {
        Ok((ok, v)) => (if ok { 0 } else { 1 }, render(&v)),
        Err(e) => (2, render(&error_report(&e))),
    }
}

/// The generators listed by `table --generators`.
pub fn named_generators(alg: &HeckeAlgebra) -> Vec<(String, GeneratorToken)> {
    let m = alg.m();
    let mut out = vec![("tau0".to_string(), GeneratorToken::Tau0(1)), ("tau0^-1".into(), GeneratorToken::Tau0(-1))];
    for k in 0..m - 1 {
        out.push((format!("s{}", k + 1), GeneratorToken::Simple(k)));
    }
    for k in 0..m - 1 {
        out.push((format!("tau{}", k + 1), GeneratorToken::TauAlpha(k)));
    }
    for k in 0..m - 1 {
        let u = Unipotent::elementary(m, Root::new(k, k + 1), 1);
        out.push((format!("e{}{}(1)", k + 1, k + 2), GeneratorToken::Unipotent(u)));
    }
    if alg.q() > 2 {
        let g = (2..alg.q() as u16).next().unwrap_or(1);
        let mut d = vec![1; m];
        d[0] = g;
        out.push((format!("diag({},1..)", alg.field().format(g)), GeneratorToken::Torus(Torus::new(d).expect("unit"))));
    }
    out
}

fn execute(cli: &Cli) -> Result<(bool, Value)> {
    let cfg = cli.params.config()?;
    let alg = cfg.algebra()?;
    let modulus = cfg.modulus_value()?;
    let cfg_json = serde_json::to_value(&cfg).expect("serializable");
    match &cli.command {
        Command::Mul { a, b, normalize } => {
            if cfg.r > 1 {
                let t = TensorAlgebra::new(vec![alg.clone(); cfg.r])?;
                let x = parse_product_element(&load_json(a)?, &t, *normalize)?;
                let y = parse_product_element(&load_json(b)?, &t, *normalize)?;
                return Ok((true, product_element_to_json(&t.tensor_mul(&x, &y)?, &t)));
            }
            let x = parse_element(&load_json(a)?, &alg, *normalize)?.with_modulus(modulus.clone());
            let y = parse_element(&load_json(b)?, &alg, *normalize)?;
            Ok((true, element_to_json(&alg.mul(&x, &y)?, &alg)))
        }
        Command::Table { generators } => {
            if !generators {
                return Err(HeckeError::Config("table needs --generators".into()));
            }
            let gens = named_generators(&alg);
            let mut products = Vec::new();
            for (na, ga) in &gens {
                let left = alg.mul_tokens(&alg.unit().with_modulus(modulus.clone()), std::slice::from_ref(ga))?;
                for (nb, gb) in &gens {
                    let prod = alg.mul_gen(&left, gb)?;
                    products.push(json!({"left": na, "right": nb, "product": element_to_json(&prod, &alg)}));
                }
            }
            Ok((true, json!({"config": cfg_json, "products": products})))
        }
        Command::RelationsCheck { n, relation, seed } => {
            let mut rng = StdRng::seed_from_u64(*seed);
            let numbers: Vec<u8> = match relation {
                Some(r) => vec![*r],
                None => (1..=9).collect(),
            };
            let mut rows = Vec::new();
            let mut all_ok = true;
            for num in numbers {
                let insts = alg.relation_instances(num, *n, &mut rng)?;
                let mut failures = Vec::new();
                for inst in &insts {
                    if !alg.relation_check(inst)? {
                        failures.push(format!("{inst:?}"));
                    }
                }
                all_ok &= failures.is_empty();
                failures.truncate(5);
                rows.push(json!({"relation": num, "instances": insts.len(), "failures": failures}));
            }
            Ok((all_ok, json!({"config": cfg_json, "relations": rows, "passed": all_ok})))
        }
        Command::OracleCheck { a, b, normalize } => {
            let x = parse_single_word(&load_json(a)?, &alg, *normalize)?;
            let y = parse_single_word(&load_json(b)?, &alg, *normalize)?;
            let k = alg.field();
            let n = match cfg.n {
                Some(n) => n,
                None => precision_for(&word_to_matrix(&x, k), &word_to_matrix(&y, k), k)?,
            };
            let chk = check_product(&alg, &x, &y, n)?;
            let oracle: Vec<Value> = chk
                .convolution
                .terms
                .iter()
                .map(|t| {
                    let w = iwahori_decompose(&alg, &t.representative)?;
                    Ok(json!({"count": t.count, "cosets": t.size(), "word": word_to_json(&w, &alg)}))
                })
                .collect::<Result<_>>()?;
            let ok = chk.agrees();
            Ok((
                ok,
                json!({
                    "engine": element_to_json(&chk.engine, &alg),
                    "oracle": oracle,
                    "mass": [chk.mass.0, chk.mass.1],
                    "precision": n,
                    "mismatches": chk.mismatches,
                    "passed": ok,
                }),
            ))
        }
        Command::Decompose { matrix } => {
            let x = parse_matrix(&load_json(matrix)?, &alg)?;
            Ok((true, word_to_json(&iwahori_decompose(&alg, &x)?, &alg)))
        }
        Command::GroupAlgebraTable => {
            let basis = alg.group_basis()?;
            let k = alg.field();
            let split = alg.sigma().rem_euclid(k.f() as i64) == 0;
            let oracle = if split { Some(Oracle::for_algebra(&alg)?) } else { None };
            let index = |w: &NormalWord| basis.iter().position(|(_, b)| b == w);
            let mut table = Vec::new();
            let mut mismatches = Vec::new();
            for (i, (g, wg)) in basis.iter().enumerate() {
                for (j, (h, wh)) in basis.iter().enumerate() {
                    let prod = alg.mul(&AlgebraElement::basis(wg.clone()), &AlgebraElement::basis(wh.clone()))?;
                    let gh = g.mul(h, k);
                    let expect = basis.iter().position(|(x, _)| *x == gh).expect("closed under products");
                    let got = match prod.terms().collect::<Vec<_>>().as_slice() {
                        [(w, c)] if **c == BigInt::from(1) => index(w),
                        _ => None,
                    };
                    if got != Some(expect) {
                        mismatches.push(format!("f_{i} * f_{j}: expected f_{expect}, got {prod}"));
                    }
                    if let Some(o) = &oracle {
                        let conv = o.convolve(&LocalMatrix::from_residue(g), &LocalMatrix::from_residue(h), 2)?;
                        let target = o.coset_label(&LocalMatrix::from_residue(&gh))?;
                        if conv.terms.len() != 1 || conv.terms[0].count != 1 || !conv.terms[0].labels.contains(&target) {
                            mismatches.push(format!("f_{i} * f_{j}: oracle disagrees"));
                        }
                    }
                    table.push(json!([i, j, expect]));
                }
            }
            let elements: Vec<Value> = basis
                .iter()
                .map(|(g, w)| {
                    let rows: Vec<Vec<String>> =
                        g.rows().iter().map(|r| r.iter().map(|&x| k.format(x)).collect()).collect();
                    json!({"matrix": rows, "word": word_to_json(w, &alg)})
                })
                .collect();
            let ok = mismatches.is_empty();
            Ok((
                ok,
                json!({
                    "elements": elements,
                    "table": table,
                    "oracle_checked": split,
                    "mismatches": mismatches,
                    "passed": ok,
                }),
            ))
        }
    }
}
