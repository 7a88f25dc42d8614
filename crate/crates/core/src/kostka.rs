//! q-Kostant partition function and Lusztig's q-analogue of weight
//! multiplicity, with memo tables and an advisory on-disk cache.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::{Add, AddAssign, Mul, Neg};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::laurent::{bigint_from_json, bigint_to_json, LaurentCoeff};
use crate::root_datum::{RootDatum, WeightVec};

pub const CACHE_VERSION: u32 = 1;
const CACHE_FILE: &str = "kostka.jsonl";

/// Polynomial in `q` (negative exponents allowed) with big-integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: BTreeMap<i64, BigInt>,
}

impl QPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0)
    }

    pub fn monomial(c: BigInt, e: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(c, e);
        p
    }

    /// `q^e`.
    pub fn q_pow(e: i64) -> Self {
        Self::monomial(BigInt::one(), e)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(BigInt::from(c), e);
        }
        p
    }

    pub fn add_term(&mut self, c: BigInt, e: i64) {
        if c.is_zero() {
            return;
        }
        let x = self.coeffs.entry(e).or_insert_with(BigInt::zero);
        *x += c;
        if x.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.coeffs.get(&e).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn order(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn shift(&self, k: i64) -> Self {
        QPoly { coeffs: self.coeffs.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }

    /// `p(q) -> p(q^{-1})`.
    pub fn invert(&self) -> Self {
        QPoly { coeffs: self.coeffs.iter().map(|(&e, c)| (-e, c.clone())).collect() }
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> BigInt {
        self.coeffs.values().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|c| !c.is_negative())
    }

    /// The same polynomial in the `v`-ring, `q = v^2`.
    pub fn to_laurent(&self) -> LaurentCoeff {
        let mut out = LaurentCoeff::zero();
        for (&e, c) in &self.coeffs {
            out.add_term(c.clone(), 2 * e, 0);
        }
        out
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&e, c)| num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN) * q.powi(e as i32))
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs.iter().map(|(&e, c)| serde_json::json!([e, bigint_to_json(c)])).collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        let mut p = QPoly::zero();
        for t in v.as_array()? {
            let t = t.as_array()?;
            if t.len() != 2 {
                return None;
            }
            p.add_term(bigint_from_json(&t[1])?, t[0].as_i64()?);
        }
        Some(p)
    }
}

impl fmt::Display for QPoly {
    /// Ascending powers: `1 + q + q^2`, `q^-1`, `2*q - q^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let a = c.abs();
            match (e, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{a}*q")?,
                (_, true) => write!(f, "q^{e}")?,
                (_, false) => write!(f, "{a}*q^{e}")?,
            }
        }
        Ok(())
    }
}

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, o: &QPoly) {
        for (&e, c) in &o.coeffs {
            self.add_term(c.clone(), e);
        }
    }
}

impl AddAssign<QPoly> for QPoly {
    fn add_assign(&mut self, o: QPoly) {
        *self += &o;
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        -&self
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect() }
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        let mut r = QPoly::zero();
        for (&a, x) in &self.coeffs {
            for (&b, y) in &o.coeffs {
                r.add_term(x * y, a + b);
            }
        }
        r
    }
}

type MemoKey = (Vec<i64>, usize);

/// Memoized partition counting over the positive roots, non-simple roots
/// first. Once only simple roots remain the expression is unique.
pub(crate) struct KostantEngine {
    nonsimple: Vec<Vec<i64>>,
    q_memo: RwLock<HashMap<MemoKey, QPoly>>,
    n_memo: RwLock<HashMap<MemoKey, BigInt>>,
}

impl KostantEngine {
    pub(crate) fn new(rd: &RootDatum) -> Self {
        let nonsimple = rd
            .positive_roots()
            .iter()
            .filter_map(|a| rd.root_coords(a))
            .filter(|c| c.iter().sum::<i64>() > 1)
            .collect();
        KostantEngine {
            nonsimple,
            q_memo: RwLock::new(HashMap::new()),
            n_memo: RwLock::new(HashMap::new()),
        }
    }

    pub(crate) fn pq(&self, c: &[i64], i: usize) -> QPoly {
        if c.iter().any(|&x| x < 0) {
            return QPoly::zero();
        }
        if i == self.nonsimple.len() {
            return QPoly::q_pow(c.iter().sum());
        }
        let key = (c.to_vec(), i);
        if let Some(p) = self.q_memo.read().unwrap().get(&key) {
            return p.clone();
        }
        let beta = &self.nonsimple[i];
        let mut acc = QPoly::zero();
        let mut cur = c.to_vec();
        let mut k = 0;
        while cur.iter().all(|&x| x >= 0) {
            acc += &self.pq(&cur, i + 1).shift(k);
            for (x, b) in cur.iter_mut().zip(beta) {
                *x -= b;
            }
            k += 1;
        }
        self.q_memo.write().unwrap().insert(key, acc.clone());
        acc
    }

    pub(crate) fn count(&self, c: &[i64], i: usize) -> BigInt {
        if c.iter().any(|&x| x < 0) {
            return BigInt::zero();
        }
        if i == self.nonsimple.len() {
            return BigInt::one();
        }
        let key = (c.to_vec(), i);
        if let Some(p) = self.n_memo.read().unwrap().get(&key) {
            return p.clone();
        }
        let beta = &self.nonsimple[i];
        let mut acc = BigInt::zero();
        let mut cur = c.to_vec();
        while cur.iter().all(|&x| x >= 0) {
            acc += self.count(&cur, i + 1);
            for (x, b) in cur.iter_mut().zip(beta) {
                *x -= b;
            }
        }
        self.n_memo.write().unwrap().insert(key, acc.clone());
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KostkaKey {
    pub cartan: String,
    pub lambda: WeightVec,
    pub mu: WeightVec,
}

impl KostkaKey {
    fn encode(&self) -> String {
        serde_json::to_string(self).expect("key serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub path: PathBuf,
    pub entries: usize,
    pub ignored_lines: usize,
    pub bytes: u64,
}

/// Line-JSON cache of `K_{lambda,mu}`. Unreadable, corrupt or stale lines are
/// skipped; write failures are swallowed since the cache is only advisory.
pub struct DiskCache {
    path: PathBuf,
    entries: RwLock<BTreeMap<String, (KostkaKey, QPoly)>>,
    ignored: Mutex<usize>,
    writer: Mutex<()>,
}

fn record_line(key: &KostkaKey, p: &QPoly) -> String {
    serde_json::json!({"key": key, "qpoly": p.to_json(), "version": CACHE_VERSION}).to_string()
}

fn parse_line(line: &str) -> Option<(KostkaKey, QPoly)> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    if v.get("version")?.as_u64()? != u64::from(CACHE_VERSION) {
        return None;
    }
    let key: KostkaKey = serde_json::from_value(v.get("key")?.clone()).ok()?;
    let p = QPoly::from_json(v.get("qpoly")?)?;
    Some((key, p))
}

impl DiskCache {
    pub fn open(dir: &Path) -> Result<DiskCache> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let cache = DiskCache {
            path,
            entries: RwLock::new(BTreeMap::new()),
            ignored: Mutex::new(0),
            writer: Mutex::new(()),
        };
        if cache.path.exists() {
            let f = File::open(&cache.path)?;
            cache.ingest(BufReader::new(f), false)?;
        }
        Ok(cache)
    }

    fn ingest<R: BufRead>(&self, r: R, append: bool) -> Result<usize> {
        let mut added = 0;
        let mut entries = self.entries.write().unwrap();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(&line) {
                Some((k, p)) => {
                    let enc = k.encode();
                    if let std::collections::btree_map::Entry::Vacant(e) = entries.entry(enc) {
                        if append {
                            self.append_line(&record_line(&k, &p));
                        }
                        e.insert((k, p));
                        added += 1;
                    }
                }
                None => *self.ignored.lock().unwrap() += 1,
            }
        }
        Ok(added)
    }

    fn append_line(&self, line: &str) {
        let _guard = self.writer.lock().unwrap();
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(&self.path) {
            let _ = writeln!(f, "{line}");
        }
    }

    pub fn get(&self, key: &KostkaKey) -> Option<QPoly> {
        self.entries.read().unwrap().get(&key.encode()).map(|(_, p)| p.clone())
    }

    pub fn put(&self, key: KostkaKey, p: &QPoly) {
        let enc = key.encode();
        {
            let mut entries = self.entries.write().unwrap();
            if entries.contains_key(&enc) {
                return;
            }
            entries.insert(enc, (key.clone(), p.clone()));
        }
        self.append_line(&record_line(&key, p));
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            path: self.path.clone(),
            entries: self.entries.read().unwrap().len(),
            ignored_lines: *self.ignored.lock().unwrap(),
            bytes: fs::metadata(&self.path).map(|m| m.len()).unwrap_or(0),
        }
    }

    pub fn clear(&self) -> Result<()> {
        let _guard = self.writer.lock().unwrap();
        self.entries.write().unwrap().clear();
        *self.ignored.lock().unwrap() = 0;
        if self.path.exists() {
            fs::remove_file(&self.path)?;
        }
        Ok(())
    }

    /// Writes every entry, sorted by key, one JSON record per line.
    pub fn export<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, p) in self.entries.read().unwrap().values() {
            writeln!(w, "{}", record_line(k, p))?;
        }
        Ok(())
    }

    /// Imports records from a line-JSON stream; returns the number added.
    pub fn import<R: BufRead>(&self, r: R) -> Result<usize> {
        self.ingest(r, true)
    }
}

impl Context {
    /// `P_q(beta)`: expressions of `beta` as N-combinations of positive
    /// roots, weighted by `q^{number of roots}`.
    pub fn kostant_q(&self, beta: &WeightVec) -> Result<QPoly> {
        let rd = self.rd();
        if beta.len() != rd.rank() {
            return Err(Error::LengthMismatch { expected: rd.rank(), got: beta.len() });
        }
        Ok(match rd.root_coords(beta) {
            Some(c) => self.engine().pq(&c, 0),
            None => QPoly::zero(),
        })
    }

    /// Unweighted Kostant partition function.
    pub fn kostant_count(&self, beta: &WeightVec) -> BigInt {
        match self.rd().root_coords(beta) {
            Some(c) => self.engine().count(&c, 0),
            None => BigInt::zero(),
        }
    }

    fn check_pair(&self, lam: &WeightVec, mu: &WeightVec) -> Result<()> {
        let rd = self.rd();
        for x in [lam, mu] {
            if x.len() != rd.rank() {
                return Err(Error::LengthMismatch { expected: rd.rank(), got: x.len() });
            }
            if !rd.is_dominant(x) {
                return Err(Error::NotDominant(x.clone()));
            }
        }
        let (a, b) = (rd.sigma_grade(lam)?, rd.sigma_grade(mu)?);
        if a != b {
            return Err(Error::GradeMismatch(a, b));
        }
        Ok(())
    }

    /// Alternating Weyl sum of `f(w(lam+rho) - (mu+rho))`.
    fn weyl_alternating<T, F>(&self, lam: &WeightVec, mu: &WeightVec, mut f: F) -> Result<T>
    where
        T: Default + AddAssign<T> + Neg<Output = T>,
        F: FnMut(&[i64]) -> T,
    {
        let rd = self.rd();
        let w = rd.weyl_elements()?;
        let r2 = rd.rho_hat_times_2();
        let a = lam.scale(2).add(r2);
        let b = mu.scale(2).add(r2);
        let mut acc = T::default();
        for e in w.iter() {
            let x = e.act(&a).sub(&b);
            if x.0.iter().any(|v| v % 2 != 0) {
                continue;
            }
            let x = WeightVec(x.0.iter().map(|v| v / 2).collect());
            if let Some(c) = rd.root_coords(&x) {
                if c.iter().all(|&k| k >= 0) {
                    let t = f(&c);
                    if e.sign() > 0 {
                        acc += t;
                    } else {
                        acc += -t;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `K_{lam,mu}(q)`; zero unless `mu <= lam`.
    pub fn lusztig_q_analogue(&self, lam: &WeightVec, mu: &WeightVec) -> Result<QPoly> {
        self.check_pair(lam, mu)?;
        let key = (lam.clone(), mu.clone());
        if let Some(p) = self.k_memo().read().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let ckey = KostkaKey {
            cartan: self.rd().fingerprint().to_string(),
            lambda: lam.clone(),
            mu: mu.clone(),
        };
        if let Some(p) = self.disk().and_then(|d| d.get(&ckey)) {
            self.k_memo().write().unwrap().insert(key, p.clone());
            return Ok(p);
        }
        let p = if self.rd().root_leq(mu, lam) {
            self.weyl_alternating(lam, mu, |c| self.engine().pq(c, 0))?
        } else {
            QPoly::zero()
        };
        if let Some(d) = self.disk() {
            d.put(ckey, &p);
        }
        self.k_memo().write().unwrap().insert(key, p.clone());
        Ok(p)
    }

    /// `dim V(lam)_mu` by the Kostant multiplicity formula.
    pub fn kostant_multiplicity(&self, lam: &WeightVec, mu: &WeightVec) -> Result<BigInt> {
        self.check_pair(lam, mu)?;
        if !self.rd().root_leq(mu, lam) {
            return Ok(BigInt::zero());
        }
        self.weyl_alternating(lam, mu, |c| self.engine().count(c, 0))
    }

    /// `M[lam][mu] = v^{-2<rho_B,mu>} K_{lam,mu}(q^{-1})` on a grade-`k` set,
    /// rows and columns sorted by decreasing height so that the matrix is
    /// upper triangular.
    pub fn kl_matrix(&self, k: i64, lambdas: &[WeightVec]) -> Result<KlMatrix> {
        let rd = self.rd();
        for l in lambdas {
            if !rd.is_dominant(l) {
                return Err(Error::NotDominant(l.clone()));
            }
            let g = rd.sigma_grade(l)?;
            if g != k {
                return Err(Error::GradeMismatch(g, k));
            }
        }
        let mut labels = lambdas.to_vec();
        labels.sort_by(|a, b| rd.rho_b_pair2(b).cmp(&rd.rho_b_pair2(a)).then(b.cmp(a)));
        labels.dedup();
        let entries = labels
            .par_iter()
            .map(|l| {
                labels
                    .iter()
                    .map(|m| {
                        let p = self.lusztig_q_analogue(l, m)?;
                        Ok(p.invert().to_laurent().shift(-rd.rho_b_pair2(m), 0))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KlMatrix { labels, entries })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KlMatrix {
    pub labels: Vec<WeightVec>,
    pub entries: Vec<Vec<LaurentCoeff>>,
}
