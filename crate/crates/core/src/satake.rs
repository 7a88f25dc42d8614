//! Graded Hecke elements, the Satake transform via Kato–Lusztig inversion,
//! convolution, duals and unramified twists.
//!
//! Grade `k` holds the cells `K mu K` with `sigma(mu) = k`, on which
//! `|sigma| = q^{-k}`. Every element carries a grade window on which it is
//! known exactly; outside the window nothing is claimed. A finite element has
//! the unbounded window. Products whose exactness cannot be certified are
//! refused rather than truncated silently.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::laurent::LaurentCoeff;
use crate::root_datum::{RootDatum, WeightVec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Window {
    pub const FULL: Window = Window { lo: None, hi: None };

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Window {
        Window { lo, hi }
    }

    pub fn upto(hi: i64) -> Window {
        Window { lo: None, hi: Some(hi) }
    }

    pub fn from(lo: i64) -> Window {
        Window { lo: Some(lo), hi: None }
    }

    pub fn between(lo: i64, hi: i64) -> Window {
        Window { lo: Some(lo), hi: Some(hi) }
    }

    pub fn is_full(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo.is_none_or(|l| k >= l) && self.hi.is_none_or(|h| k <= h)
    }

    pub fn intersect(&self, o: &Window) -> Window {
        let lo = match (self.lo, o.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, o.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Window { lo, hi }
    }

    /// True when `o` lies inside `self`.
    pub fn covers(&self, o: &Window) -> bool {
        let lo_ok = match (self.lo, o.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b >= a,
        };
        let hi_ok = match (self.hi, o.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }

    pub fn flip(&self) -> Window {
        Window { lo: self.hi.map(|h| -h), hi: self.lo.map(|l| -l) }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.map_or("-inf".to_string(), |l| l.to_string());
        let hi = self.hi.map_or("+inf".to_string(), |h| h.to_string());
        write!(f, "[{lo}, {hi}]")
    }
}

pub trait BasisKind: Clone + Copy + Default + fmt::Debug + PartialEq + Eq + Send + Sync {
    const KEY: &'static str;
}

/// Basis of double-coset indicators `1_{K mu K}`.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Cells;

/// Basis of Weyl characters `chi_lambda`.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Chars;

impl BasisKind for Cells {
    const KEY: &'static str = "mu";
}

impl BasisKind for Chars {
    const KEY: &'static str = "lambda";
}

pub type GradeTerms = BTreeMap<WeightVec, LaurentCoeff>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graded<B: BasisKind> {
    grades: BTreeMap<i64, GradeTerms>,
    window: Window,
    _kind: PhantomData<B>,
}

pub type HeckeElement = Graded<Cells>;
pub type SatakeImage = Graded<Chars>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Difference {
    pub grade: i64,
    pub weight: WeightVec,
    pub expected: String,
    pub got: String,
}

impl<B: BasisKind> Default for Graded<B> {
    fn default() -> Self {
        Graded { grades: BTreeMap::new(), window: Window::FULL, _kind: PhantomData }
    }
}

impl<B: BasisKind> Graded<B> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with_window(window: Window) -> Self {
        Graded { grades: BTreeMap::new(), window, _kind: PhantomData }
    }

    /// A single term in grade `k`.
    pub fn term(k: i64, w: WeightVec, c: LaurentCoeff) -> Self {
        let mut g = Self::zero();
        g.add_term(k, w, c);
        g
    }

    /// The unit: the identity cell, or the trivial character.
    pub fn identity(m: usize) -> Self {
        Self::term(0, WeightVec::zero(m), LaurentCoeff::one())
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_finite(&self) -> bool {
        self.window.is_full()
    }

    /// Adds `c` to the coefficient of `w` in grade `k`; terms outside the
    /// window are dropped.
    pub fn add_term(&mut self, k: i64, w: WeightVec, c: LaurentCoeff) {
        if c.is_zero() || !self.window.contains(k) {
            return;
        }
        let grade = self.grades.entry(k).or_default();
        let e = grade.entry(w.clone()).or_default();
        *e += &c;
        if e.is_zero() {
            grade.remove(&w);
            if grade.is_empty() {
                self.grades.remove(&k);
            }
        }
    }

    pub fn grades(&self) -> impl Iterator<Item = (i64, &GradeTerms)> {
        self.grades.iter().map(|(&k, t)| (k, t))
    }

    pub fn grade(&self, k: i64) -> Option<&GradeTerms> {
        self.grades.get(&k)
    }

    pub fn coeff(&self, k: i64, w: &WeightVec) -> LaurentCoeff {
        self.grades.get(&k).and_then(|t| t.get(w)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &WeightVec, &LaurentCoeff)> {
        self.grades.iter().flat_map(|(&k, t)| t.iter().map(move |(w, c)| (k, w, c)))
    }

    pub fn num_terms(&self) -> usize {
        self.grades.values().map(|t| t.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn min_grade(&self) -> Option<i64> {
        self.grades.keys().next().copied()
    }

    pub fn max_grade(&self) -> Option<i64> {
        self.grades.keys().next_back().copied()
    }

    pub fn restrict(&self, w: Window) -> Self {
        let window = self.window.intersect(&w);
        Graded {
            grades: self
                .grades
                .iter()
                .filter(|(k, _)| window.contains(**k))
                .map(|(&k, t)| (k, t.clone()))
                .collect(),
            window,
            _kind: PhantomData,
        }
    }

    /// Keeps the terms in `w` and declares the result finite. Only sound when
    /// the element is already known to vanish outside `w`.
    pub fn polynomial_part(&self, w: Window) -> Self {
        let mut out = self.restrict(w);
        out.window = Window::FULL;
        out
    }

    pub fn map_coeffs<F: Fn(i64, &LaurentCoeff) -> LaurentCoeff>(&self, f: F) -> Self {
        let mut out = Self::with_window(self.window);
        for (k, w, c) in self.terms() {
            out.add_term(k, w.clone(), f(k, c));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Self::with_window(self.window.intersect(&o.window));
        for (k, w, c) in self.terms().chain(o.terms()) {
            out.add_term(k, w.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|_, c| -c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &LaurentCoeff) -> Self {
        self.map_coeffs(|_, c| c * s)
    }

    /// Multiplies grade `k` by `X^{a k} v^{b k}`, i.e. by `|sigma|^{a s + b/2}`.
    pub fn twist(&self, a: i64, b: i64) -> Self {
        self.map_coeffs(|k, c| c.shift(b * k, a * k))
    }

    /// Substitutes `X -> v^{-h}` (the specialization `s = h/2`).
    pub fn specialize(&self, h: i64) -> Self {
        self.map_coeffs(|_, c| c.specialize_x(h))
    }

    /// Substitutes `X -> 1`.
    pub fn drop_x(&self) -> Self {
        self.specialize(0)
    }

    /// `1_{K mu K} -> 1_{K (-w0 mu) K}` (or `chi_lam -> chi_{-w0 lam}`),
    /// grade `k -> -k`.
    pub fn dual(&self, rd: &RootDatum) -> Self {
        let mut out = Self::with_window(self.window.flip());
        for (k, w, c) in self.terms() {
            out.add_term(-k, rd.dual_weight(w), c.clone());
        }
        out
    }

    /// Bounds on the true support: `(lower, upper)`, where `None` means the
    /// element may be nonzero arbitrarily far in that direction.
    fn support_bounds(&self) -> (Option<i64>, Option<i64>) {
        let lower = match self.window.lo {
            Some(_) => None,
            None => self.min_grade().or(self.window.hi.map(|h| h + 1)),
        };
        let upper = match self.window.hi {
            Some(_) => None,
            None => self.max_grade().or(self.window.lo.map(|l| l - 1)),
        };
        (lower, upper)
    }

    fn is_exact_zero(&self) -> bool {
        self.is_zero() && self.window.is_full()
    }

    /// First coefficient where `self` and `o` differ, scanning grades of
    /// `w` upwards.
    pub fn first_difference(&self, o: &Self, w: Window) -> Option<Difference> {
        let lo = w.lo.unwrap_or(i64::MIN);
        let hi = w.hi.unwrap_or(i64::MAX);
        let keys: std::collections::BTreeSet<i64> = self
            .grades
            .keys()
            .chain(o.grades.keys())
            .copied()
            .filter(|k| (lo..=hi).contains(k))
            .collect();
        let empty = GradeTerms::new();
        for k in keys {
            let a = self.grades.get(&k).unwrap_or(&empty);
            let b = o.grades.get(&k).unwrap_or(&empty);
            let ws: std::collections::BTreeSet<&WeightVec> = a.keys().chain(b.keys()).collect();
            for wt in ws.into_iter().rev() {
                let x = a.get(wt).cloned().unwrap_or_default();
                let y = b.get(wt).cloned().unwrap_or_default();
                if x != y {
                    return Some(Difference {
                        grade: k,
                        weight: wt.clone(),
                        expected: x.to_string(),
                        got: y.to_string(),
                    });
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> serde_json::Value {
        let grades: Vec<serde_json::Value> = self
            .grades
            .iter()
            .map(|(k, t)| {
                let terms: Vec<serde_json::Value> = t
                    .iter()
                    .rev()
                    .map(|(w, c)| {
                        let mut o = serde_json::Map::new();
                        o.insert(B::KEY.into(), serde_json::to_value(w).expect("weight"));
                        o.insert("coeff".into(), c.to_json());
                        serde_json::Value::Object(o)
                    })
                    .collect();
                serde_json::json!({"k": k, "terms": terms})
            })
            .collect();
        let mut o = serde_json::Map::new();
        o.insert("grades".into(), serde_json::Value::Array(grades));
        if !self.window.is_full() {
            o.insert("window".into(), serde_json::to_value(self.window).expect("window"));
        }
        serde_json::Value::Object(o)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(format!("graded element: {s}"));
        let window = match v.get("window") {
            Some(w) => serde_json::from_value(w.clone())?,
            None => Window::FULL,
        };
        let mut out = Self::with_window(window);
        for g in v.get("grades").and_then(|g| g.as_array()).ok_or_else(|| bad("grades"))? {
            let k = g.get("k").and_then(|k| k.as_i64()).ok_or_else(|| bad("k"))?;
            if !window.contains(k) {
                return Err(bad("grade outside window"));
            }
            for t in g.get("terms").and_then(|t| t.as_array()).ok_or_else(|| bad("terms"))? {
                let w: WeightVec =
                    serde_json::from_value(t.get(B::KEY).cloned().ok_or_else(|| bad(B::KEY))?)?;
                let c = LaurentCoeff::from_json(t.get("coeff").ok_or_else(|| bad("coeff"))?)
                    .ok_or_else(|| bad("coeff"))?;
                out.add_term(k, w, c);
            }
        }
        Ok(out)
    }
}

impl<B: BasisKind> Serialize for Graded<B> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, B: BasisKind> Deserialize<'de> for Graded<B> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Graded::from_json(&v).map_err(D::Error::custom)
    }
}

impl<B: BasisKind> fmt::Display for Graded<B> {
    /// One line per term, `k=<grade> <weight> <coefficient>`, grades
    /// ascending and weights descending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.window.is_full() {
            writeln!(f, "window {}", self.window)?;
        }
        if self.grades.is_empty() {
            return writeln!(f, "0");
        }
        for (k, t) in &self.grades {
            for (w, c) in t.iter().rev() {
                writeln!(f, "k={k} {w} {c}")?;
            }
        }
        Ok(())
    }
}

/// The window on which the product of `a` and `b` is exactly determined, or
/// `None` when the product is exactly zero.
pub fn product_window<A: BasisKind, B: BasisKind>(a: &Graded<A>, b: &Graded<B>) -> Result<Option<Window>> {
    if a.is_exact_zero() || b.is_exact_zero() {
        return Ok(None);
    }
    let (la, ua) = a.support_bounds();
    let (lb, ub) = b.support_bounds();
    let undefined = || {
        Error::Window(format!(
            "product of elements with windows {} and {} is not determined by the known coefficients",
            a.window, b.window
        ))
    };
    let mut hi: Option<i64> = None;
    for (h, l) in [(a.window.hi, lb), (b.window.hi, la)] {
        if let Some(h) = h {
            let l = l.ok_or_else(undefined)?;
            hi = Some(hi.map_or(h + l, |x: i64| x.min(h + l)));
        }
    }
    let mut lo: Option<i64> = None;
    for (l, u) in [(a.window.lo, ub), (b.window.lo, ua)] {
        if let Some(l) = l {
            let u = u.ok_or_else(undefined)?;
            lo = Some(lo.map_or(l + u, |x: i64| x.max(l + u)));
        }
    }
    if let (Some(l), Some(h)) = (lo, hi) {
        if l > h {
            return Err(undefined());
        }
    }
    Ok(Some(Window { lo, hi }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericEval {
    pub value: Complex64,
    /// Value of each grade, ascending.
    pub grade_values: Vec<(i64, Complex64)>,
    /// Ratio `|a_N| / |a_{N-1}|` of the last two grades, when defined.
    pub ratio: Option<f64>,
    pub tail_bound: f64,
    pub converged: bool,
}

impl Context {
    pub fn cell(&self, mu: &WeightVec, c: LaurentCoeff) -> Result<HeckeElement> {
        Ok(HeckeElement::term(self.rd().sigma_grade(mu)?, mu.clone(), c))
    }

    pub fn character(&self, lam: &WeightVec, c: LaurentCoeff) -> Result<SatakeImage> {
        Ok(SatakeImage::term(self.rd().sigma_grade(lam)?, lam.clone(), c))
    }

    fn satake_basis_terms(&self, mu: &WeightVec) -> Result<Arc<GradeTerms>> {
        if let Some(t) = self.satake_memo().read().unwrap().get(mu) {
            return Ok(t.clone());
        }
        let rd = self.rd();
        if !rd.is_dominant(mu) {
            return Err(Error::NotDominant(mu.clone()));
        }
        // chi_mu = sum_{nu <= mu} M[mu][nu] S(1_nu), and M[mu][mu] = v^{-2<rho,mu>}
        let mut acc: GradeTerms = [(mu.clone(), LaurentCoeff::one())].into();
        for nu in rd.dominant_below(mu)? {
            if &nu == mu {
                continue;
            }
            let k = self.lusztig_q_analogue(mu, &nu)?;
            if k.is_zero() {
                continue;
            }
            let m = k.invert().to_laurent().shift(-rd.rho_b_pair2(&nu), 0);
            for (lam, c) in self.satake_basis_terms(&nu)?.iter() {
                let e = acc.entry(lam.clone()).or_default();
                *e -= &(&m * c);
            }
        }
        let shift = rd.rho_b_pair2(mu);
        let out: GradeTerms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(l, c)| (l, c.shift(shift, 0)))
            .collect();
        let out = Arc::new(out);
        self.satake_memo().write().unwrap().insert(mu.clone(), out.clone());
        Ok(out)
    }

    /// `S(1_{K mu K})` as a combination of Weyl characters.
    pub fn satake_basis(&self, mu: &WeightVec) -> Result<SatakeImage> {
        let k = self.rd().sigma_grade(mu)?;
        let mut out = SatakeImage::zero();
        for (lam, c) in self.satake_basis_terms(mu)?.iter() {
            out.add_term(k, lam.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn satake(&self, f: &HeckeElement) -> Result<SatakeImage> {
        let terms: Vec<(i64, &WeightVec, &LaurentCoeff)> = f.terms().collect();
        let parts = terms
            .par_iter()
            .map(|(k, mu, c)| {
                let b = self.satake_basis_terms(mu)?;
                Ok(b.iter().map(|(l, x)| (*k, l.clone(), x * *c)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = SatakeImage::with_window(f.window());
        for (k, l, c) in parts.into_iter().flatten() {
            out.add_term(k, l, c);
        }
        Ok(out)
    }

    /// `chi_lam = sum_{mu <= lam} v^{-2<rho_B,mu>} K_{lam,mu}(q^{-1}) S(1_mu)`.
    pub fn inverse_satake(&self, phi: &SatakeImage) -> Result<HeckeElement> {
        let rd = self.rd();
        let terms: Vec<(i64, &WeightVec, &LaurentCoeff)> = phi.terms().collect();
        let parts = terms
            .par_iter()
            .map(|(k, lam, c)| {
                let mut v = Vec::new();
                for mu in rd.dominant_below(lam)? {
                    let p = self.lusztig_q_analogue(lam, &mu)?;
                    if !p.is_zero() {
                        let m = p.invert().to_laurent().shift(-rd.rho_b_pair2(&mu), 0);
                        v.push((*k, mu, &m * *c));
                    }
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = HeckeElement::with_window(phi.window());
        for (k, mu, c) in parts.into_iter().flatten() {
            out.add_term(k, mu, c);
        }
        Ok(out)
    }

    /// Product in the character ring, exact on [`product_window`].
    pub fn mul_satake(&self, a: &SatakeImage, b: &SatakeImage) -> Result<SatakeImage> {
        let Some(window) = product_window(a, b)? else {
            return Ok(SatakeImage::zero());
        };
        let mut targets: Vec<i64> = Vec::new();
        for (ka, _) in a.grades() {
            for (kb, _) in b.grades() {
                if window.contains(ka + kb) {
                    targets.push(ka + kb);
                }
            }
        }
        targets.sort_unstable();
        targets.dedup();
        let parts = targets
            .par_iter()
            .map(|&k| {
                let mut acc = GradeTerms::new();
                for (ka, ta) in a.grades() {
                    let Some(tb) = b.grade(k - ka) else { continue };
                    for (la, ca) in ta {
                        for (lb, cb) in tb {
                            let prod = ca * cb;
                            for (nu, n) in self.tensor_decomp(la, lb)?.iter() {
                                let e = acc.entry(nu.clone()).or_default();
                                *e += &prod.scale(&(*n).into());
                            }
                        }
                    }
                }
                Ok((k, acc))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = SatakeImage::with_window(window);
        for (k, acc) in parts {
            for (nu, c) in acc {
                out.add_term(k, nu, c);
            }
        }
        Ok(out)
    }

    /// Convolution, computed on the Satake side. With `window = Some(w)` the
    /// result is restricted to `w`, which must be covered by the window on
    /// which the product is exact.
    pub fn convolve(&self, a: &HeckeElement, b: &HeckeElement, window: Option<Window>) -> Result<HeckeElement> {
        let p = self.mul_satake(&self.satake(a)?, &self.satake(b)?)?;
        let out = self.inverse_satake(&p)?;
        match window {
            None => Ok(out),
            Some(w) => {
                if !out.window().covers(&w) {
                    return Err(Error::Window(format!(
                        "requested {w} but the inputs determine the product only on {}",
                        out.window()
                    )));
                }
                Ok(out.restrict(w))
            }
        }
    }

    /// Evaluates `phi` at the torus element `c` with `v = sqrt(q)` and
    /// `X = q^{-s}`, summing grades `<= n`.
    pub fn eval_numeric(&self, phi: &SatakeImage, c: &[Complex64], q: f64, s: Complex64, n: i64) -> Result<NumericEval> {
        let rd = self.rd();
        if c.len() != rd.rank() {
            return Err(Error::LengthMismatch { expected: rd.rank(), got: c.len() });
        }
        if phi.window().lo.is_some() {
            return Err(Error::Window("cannot sum a series unbounded below".into()));
        }
        if phi.window().hi.is_some_and(|h| h < n) {
            return Err(Error::Window(format!("grade cap {n} exceeds window {}", phi.window())));
        }
        let v = Complex64::new(q.sqrt(), 0.0);
        let x = (-s * q.ln()).exp();
        let mut grade_values = Vec::new();
        let mut value = Complex64::new(0.0, 0.0);
        for (k, t) in phi.grades() {
            if k > n {
                break;
            }
            let mut g = Complex64::new(0.0, 0.0);
            for (lam, coeff) in t {
                g += coeff.eval(v, x) * self.character_value(lam, c)?;
            }
            value += g;
            grade_values.push((k, g));
        }
        let finite = phi.window().hi.is_none() && phi.max_grade().is_none_or(|m| m <= n);
        let last = |k: i64| grade_values.iter().find(|(j, _)| *j == k).map_or(0.0, |(_, g)| g.norm());
        let (an, an1) = (last(n), last(n - 1));
        let ratio = (an1 > 0.0).then(|| an / an1);
        let (tail_bound, converged) = if finite {
            (0.0, true)
        } else {
            match ratio {
                Some(r) if r < 1.0 => (an * r / (1.0 - r), true),
                Some(_) => (f64::INFINITY, false),
                None => (an, an == 0.0),
            }
        };
        Ok(NumericEval { value, grade_values, ratio, tail_bound, converged })
    }
}
