//! Weyl characters, weight multiplicities, tensor products and plethysm.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::linalg::rat;
use crate::root_datum::{RepSpec, RootDatum, WeightVec};

/// Finite formal combination of weights `e^nu` with integer multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CharacterExpansion {
    pub support: BTreeMap<WeightVec, i64>,
}

impl CharacterExpansion {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The trivial character `e^0`.
    pub fn one(m: usize) -> Self {
        Self::from_map([(WeightVec::zero(m), 1)].into())
    }

    pub fn from_map(mut support: BTreeMap<WeightVec, i64>) -> Self {
        support.retain(|_, m| *m != 0);
        CharacterExpansion { support }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mult(&self, nu: &WeightVec) -> i64 {
        self.support.get(nu).copied().unwrap_or(0)
    }

    pub fn dim(&self) -> i64 {
        self.support.values().sum()
    }

    pub fn add_scaled(&mut self, o: &CharacterExpansion, k: i64) {
        if k == 0 {
            return;
        }
        for (nu, m) in &o.support {
            let e = self.support.entry(nu.clone()).or_insert(0);
            *e += k * m;
            if *e == 0 {
                self.support.remove(nu);
            }
        }
    }

    pub fn mul(&self, o: &CharacterExpansion) -> CharacterExpansion {
        let mut out: BTreeMap<WeightVec, i64> = BTreeMap::new();
        for (a, x) in &self.support {
            for (b, y) in &o.support {
                *out.entry(a.add(b)).or_insert(0) += x * y;
            }
        }
        Self::from_map(out)
    }

    /// Adams operation `e^nu -> e^{j nu}`.
    pub fn adams(&self, j: i64) -> CharacterExpansion {
        Self::from_map(self.support.iter().map(|(nu, m)| (nu.scale(j), *m)).collect())
    }

    /// Evaluation at a torus element `c`, `e^nu(c) = prod c_t^{nu_t}`.
    pub fn eval(&self, c: &[Complex64]) -> Complex64 {
        self.support
            .iter()
            .map(|(nu, &m)| {
                nu.0.iter()
                    .zip(c)
                    .fold(Complex64::new(m as f64, 0.0), |acc, (&e, z)| acc * z.powi(e as i32))
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrPart {
    pub lambda: WeightVec,
    pub mult: i64,
}

/// Decomposition into irreducibles, sorted by descending height then
/// descending lexicographic order of the highest weights.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IrrDecomp {
    pub parts: Vec<IrrPart>,
}

impl IrrDecomp {
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn mult(&self, lam: &WeightVec) -> i64 {
        self.parts.iter().find(|p| &p.lambda == lam).map_or(0, |p| p.mult)
    }
}

/// Weyl dimension formula, `prod <lam+rho, a^vee> / <rho, a^vee>`.
pub fn weyl_dimension(rd: &RootDatum, lam: &WeightVec) -> BigInt {
    let r2 = rd.rho_hat_times_2();
    let a = lam.scale(2).add(r2);
    let mut d = BigRational::one();
    for f in rd.positive_coroots() {
        d *= rat(a.dot(f)) / rat(r2.dot(f));
    }
    d.to_integer()
}

fn sort_parts(rd: &RootDatum, parts: &mut [IrrPart]) {
    parts.sort_by(|a, b| {
        rd.rho_b_pair2(&b.lambda)
            .cmp(&rd.rho_b_pair2(&a.lambda))
            .then(b.lambda.cmp(&a.lambda))
    });
}

impl Context {
    pub(crate) fn weights_of(&self, lam: &WeightVec) -> Result<Arc<CharacterExpansion>> {
        if let Some(c) = self.weight_memo().read().unwrap().get(lam) {
            return Ok(c.clone());
        }
        let rd = self.rd();
        let mut support = BTreeMap::new();
        for mu in rd.dominant_below(lam)? {
            let m = self
                .kostant_multiplicity(lam, &mu)?
                .to_i64()
                .ok_or_else(|| Error::OutOfRange("weight multiplicity overflows i64".into()))?;
            if m > 0 {
                for nu in rd.orbit(&mu) {
                    support.insert(nu, m);
                }
            }
        }
        let ch = Arc::new(CharacterExpansion::from_map(support));
        self.weight_memo().write().unwrap().insert(lam.clone(), ch.clone());
        Ok(ch)
    }

    /// `dim V(lam)_nu` for every weight `nu`.
    pub fn weight_multiplicities(&self, lam: &WeightVec) -> Result<CharacterExpansion> {
        Ok((*self.weights_of(lam)?).clone())
    }

    pub fn rep(&self, lam: &WeightVec) -> Result<RepSpec> {
        let ch = self.weights_of(lam)?;
        Ok(RepSpec { highest_weight: lam.clone(), weights: ch.support.clone() })
    }

    pub fn dual_weight(&self, lam: &WeightVec) -> Result<WeightVec> {
        if !self.rd().is_dominant(lam) {
            return Err(Error::NotDominant(lam.clone()));
        }
        Ok(self.rd().dual_weight(lam))
    }

    pub fn dual_rep(&self, rho: &RepSpec) -> Result<RepSpec> {
        self.rep(&self.dual_weight(&rho.highest_weight)?)
    }

    /// Characters of `Sym^k rho` for `k = 0..=kmax`, by the Newton recursion
    /// `k h_k = sum_j p_j h_{k-j}`.
    pub fn sym_power_characters(&self, rho: &RepSpec, kmax: usize) -> Result<Vec<CharacterExpansion>> {
        let mut memo = self.sym_memo().lock().unwrap();
        let seq = memo
            .entry(rho.highest_weight.clone())
            .or_insert_with(|| vec![CharacterExpansion::one(self.rd().rank())]);
        let base = CharacterExpansion::from_map(rho.weights.clone());
        while seq.len() <= kmax {
            let k = seq.len();
            let mut acc = CharacterExpansion::zero();
            for j in 1..=k {
                acc.add_scaled(&base.adams(j as i64).mul(&seq[k - j]), 1);
            }
            seq.push(divide_exact(acc, k as i64)?);
        }
        Ok(seq[..=kmax].to_vec())
    }

    /// Characters of `wedge^i rho` for `i = 0..=dim rho`.
    pub fn ext_power_characters(&self, rho: &RepSpec) -> Result<Vec<CharacterExpansion>> {
        let n = rho.dim() as usize;
        let base = CharacterExpansion::from_map(rho.weights.clone());
        let mut seq = vec![CharacterExpansion::one(self.rd().rank())];
        for k in 1..=n {
            let mut acc = CharacterExpansion::zero();
            for j in 1..=k {
                let sign = if j % 2 == 1 { 1 } else { -1 };
                acc.add_scaled(&base.adams(j as i64).mul(&seq[k - j]), sign);
            }
            seq.push(divide_exact(acc, k as i64)?);
        }
        Ok(seq)
    }

    pub fn sym_power_decomp(&self, rho: &RepSpec, k: usize) -> Result<IrrDecomp> {
        let ch = self.sym_power_characters(rho, k)?;
        self.decompose(&ch[k])
    }

    pub fn ext_power_decomp(&self, rho: &RepSpec, i: usize) -> Result<IrrDecomp> {
        let n = rho.dim() as usize;
        if i > n {
            return Err(Error::OutOfRange(format!("exterior power {i} exceeds dimension {n}")));
        }
        let ch = self.ext_power_characters(rho)?;
        self.decompose(&ch[i])
    }

    /// Irreducible decomposition; negative multiplicities are an error.
    pub fn decompose(&self, ch: &CharacterExpansion) -> Result<IrrDecomp> {
        let parts = self.decompose_virtual(ch)?;
        if let Some(p) = parts.parts.iter().find(|p| p.mult < 0) {
            return Err(Error::NegativeMultiplicity { lambda: p.lambda.clone(), mult: p.mult });
        }
        Ok(parts)
    }

    /// Decomposition of a virtual character.
    pub fn decompose_virtual(&self, ch: &CharacterExpansion) -> Result<IrrDecomp> {
        let rd = self.rd();
        for (nu, &m) in &ch.support {
            if nu.len() != rd.rank() {
                return Err(Error::LengthMismatch { expected: rd.rank(), got: nu.len() });
            }
            for i in 0..rd.rank_ss() {
                if ch.mult(&rd.reflect(i, nu)) != m {
                    return Err(Error::NotInvariant(nu.clone()));
                }
            }
        }
        let mut dom: BTreeMap<WeightVec, i64> = ch
            .support
            .iter()
            .filter(|(nu, _)| rd.is_dominant(nu))
            .map(|(nu, &m)| (nu.clone(), m))
            .collect();
        let mut parts = Vec::new();
        while let Some(top) = dom
            .keys()
            .max_by(|a, b| rd.rho_b_pair2(a).cmp(&rd.rho_b_pair2(b)).then(a.cmp(b)))
            .cloned()
        {
            let m = dom[&top];
            let w = self.weights_of(&top)?;
            for (nu, &k) in &w.support {
                if rd.is_dominant(nu) {
                    let e = dom.entry(nu.clone()).or_insert(0);
                    *e -= m * k;
                    if *e == 0 {
                        dom.remove(nu);
                    }
                }
            }
            parts.push(IrrPart { lambda: top, mult: m });
        }
        sort_parts(rd, &mut parts);
        Ok(IrrDecomp { parts })
    }

    /// `sum mult * ch V(lambda)`.
    pub fn expand(&self, d: &IrrDecomp) -> Result<CharacterExpansion> {
        let mut out = CharacterExpansion::zero();
        for p in &d.parts {
            out.add_scaled(&*self.weights_of(&p.lambda)?, p.mult);
        }
        Ok(out)
    }

    /// `V(a) ⊗ V(b)` by the Brauer–Klimyk rule, as `(nu, mult)` pairs sorted
    /// descending.
    pub fn tensor_decomp(&self, a: &WeightVec, b: &WeightVec) -> Result<Arc<Vec<(WeightVec, i64)>>> {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(t) = self.tensor_memo().read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let rd = self.rd();
        for x in [a, b] {
            if !rd.is_dominant(x) {
                return Err(Error::NotDominant(x.clone()));
            }
        }
        let (big, small) = if weyl_dimension(rd, a) >= weyl_dimension(rd, b) { (a, b) } else { (b, a) };
        let r2 = rd.rho_hat_times_2();
        let base = big.scale(2).add(r2);
        let mut acc: BTreeMap<WeightVec, i64> = BTreeMap::new();
        for (nu, &m) in &self.weights_of(small)?.support {
            let (y, steps) = rd.to_dominant(&base.add(&nu.scale(2)));
            if rd.simple_coroots().iter().any(|f| y.dot(f) == 0) {
                continue;
            }
            let top = WeightVec(y.sub(r2).0.iter().map(|v| v / 2).collect());
            let sign = if steps % 2 == 0 { 1 } else { -1 };
            *acc.entry(top).or_insert(0) += sign * m;
        }
        let out: Vec<(WeightVec, i64)> = acc.into_iter().rev().filter(|(_, m)| *m != 0).collect();
        let out = Arc::new(out);
        self.tensor_memo().write().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// `chi_lam(c)` via the weight multiset.
    pub fn character_value(&self, lam: &WeightVec, c: &[Complex64]) -> Result<Complex64> {
        Ok(self.weights_of(lam)?.eval(c))
    }
}

fn divide_exact(mut ch: CharacterExpansion, k: i64) -> Result<CharacterExpansion> {
    for (nu, m) in ch.support.iter_mut() {
        if *m % k != 0 {
            return Err(Error::InexactDivision(format!("multiplicity {m} at {nu} by {k}")));
        }
        *m /= k;
    }
    Ok(ch)
}
