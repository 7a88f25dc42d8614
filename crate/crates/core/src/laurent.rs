//! Exact Laurent polynomials in `v` and `X` with big-integer coefficients.
//!
//! Conventions: `v^2 = q` and `X = q^{-s}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Keys are `(v exponent, X exponent)`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentCoeff {
    terms: BTreeMap<(i64, i64), BigInt>,
}

impl LaurentCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0, 0)
    }

    pub fn from_int(c: i64) -> Self {
        Self::monomial(BigInt::from(c), 0, 0)
    }

    pub fn monomial(c: BigInt, v: i64, x: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((v, x), c);
        }
        LaurentCoeff { terms }
    }

    /// `v^e`.
    pub fn v_pow(e: i64) -> Self {
        Self::monomial(BigInt::one(), e, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &BigInt)> {
        self.terms.iter().map(|(&(v, x), c)| (v, x, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, c: BigInt, v: i64, x: i64) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((v, x)).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(v, x));
        }
    }

    /// Multiplies by `v^dv X^dx`.
    pub fn shift(&self, dv: i64, dx: i64) -> Self {
        LaurentCoeff {
            terms: self.terms.iter().map(|(&(v, x), c)| ((v + dv, x + dx), c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LaurentCoeff { terms: self.terms.iter().map(|(&e, c)| (e, c * k)).collect() }
    }

    /// Substitutes `X -> v^{-h}`, i.e. `s = h/2`.
    pub fn specialize_x(&self, h: i64) -> Self {
        let mut out = Self::zero();
        for (&(v, x), c) in &self.terms {
            out.add_term(c.clone(), v - h * x, 0);
        }
        out
    }

    /// Substitutes `X -> 1` (the specialization `s = 0`).
    pub fn drop_x(&self) -> Self {
        self.specialize_x(0)
    }

    pub fn x_exponents(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().map(|&(_, x)| x)
    }

    pub fn eval(&self, v: Complex64, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(ve, xe), c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::NAN);
            acc += v.powi(ve as i32) * x.powi(xe as i32) * c;
        }
        acc
    }

    /// Evaluates at real `v` with `X` left as a formal variable: returns the
    /// numeric coefficient of each power of `X`.
    pub fn eval_v(&self, v: f64) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (&(ve, xe), c) in &self.terms {
            *out.entry(xe).or_insert(0.0) += c.to_f64().unwrap_or(f64::NAN) * v.powi(ve as i32);
        }
        out
    }
}

fn fmt_power(f: &mut fmt::Formatter<'_>, sym: &str, e: i64) -> fmt::Result {
    match e {
        1 => write!(f, "{sym}"),
        _ => write!(f, "{sym}^{e}"),
    }
}

impl fmt::Display for LaurentCoeff {
    /// Terms by descending `v` then descending `X` exponent, e.g. `v^2 - X*v^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(v, x), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let a = c.abs();
            let mut parts = 0;
            if !a.is_one() || (v == 0 && x == 0) {
                write!(f, "{a}")?;
                parts += 1;
            }
            if x != 0 {
                if parts > 0 {
                    write!(f, "*")?;
                }
                fmt_power(f, "X", x)?;
                parts += 1;
            }
            if v != 0 {
                if parts > 0 {
                    write!(f, "*")?;
                }
                fmt_power(f, "v", v)?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&LaurentCoeff> for LaurentCoeff {
    fn add_assign(&mut self, o: &LaurentCoeff) {
        for (&(v, x), c) in &o.terms {
            self.add_term(c.clone(), v, x);
        }
    }
}

impl SubAssign<&LaurentCoeff> for LaurentCoeff {
    fn sub_assign(&mut self, o: &LaurentCoeff) {
        for (&(v, x), c) in &o.terms {
            self.add_term(-c, v, x);
        }
    }
}

impl Add for &LaurentCoeff {
    type Output = LaurentCoeff;
    fn add(self, o: &LaurentCoeff) -> LaurentCoeff {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl Sub for &LaurentCoeff {
    type Output = LaurentCoeff;
    fn sub(self, o: &LaurentCoeff) -> LaurentCoeff {
        let mut r = self.clone();
        r -= o;
        r
    }
}

impl Neg for &LaurentCoeff {
    type Output = LaurentCoeff;
    fn neg(self) -> LaurentCoeff {
        LaurentCoeff { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect() }
    }
}

impl Mul for &LaurentCoeff {
    type Output = LaurentCoeff;
    fn mul(self, o: &LaurentCoeff) -> LaurentCoeff {
        let mut r = LaurentCoeff::zero();
        for (&(v1, x1), c1) in &self.terms {
            for (&(v2, x2), c2) in &o.terms {
                r.add_term(c1 * c2, v1 + v2, x1 + x2);
            }
        }
        r
    }
}

impl Add for LaurentCoeff {
    type Output = LaurentCoeff;
    fn add(mut self, o: LaurentCoeff) -> LaurentCoeff {
        self += &o;
        self
    }
}

impl Sub for LaurentCoeff {
    type Output = LaurentCoeff;
    fn sub(mut self, o: LaurentCoeff) -> LaurentCoeff {
        self -= &o;
        self
    }
}

impl Mul for LaurentCoeff {
    type Output = LaurentCoeff;
    fn mul(self, o: LaurentCoeff) -> LaurentCoeff {
        &self * &o
    }
}

impl Neg for LaurentCoeff {
    type Output = LaurentCoeff;
    fn neg(self) -> LaurentCoeff {
        -&self
    }
}

/// Integers serialize as JSON numbers when they fit in `i64`, otherwise as
/// decimal strings.
pub(crate) fn bigint_to_json(c: &BigInt) -> serde_json::Value {
    match c.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::from(c.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl LaurentCoeff {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(&(v, x), c)| serde_json::json!([v, x, bigint_to_json(c)]))
                .collect(),
        )
    }

    pub fn from_json(val: &serde_json::Value) -> Option<Self> {
        let mut out = LaurentCoeff::zero();
        for t in val.as_array()? {
            let t = t.as_array()?;
            if t.len() != 3 {
                return None;
            }
            out.add_term(bigint_from_json(&t[2])?, t[0].as_i64()?, t[1].as_i64()?);
        }
        Some(out)
    }
}

impl Serialize for LaurentCoeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentCoeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        LaurentCoeff::from_json(&v).ok_or_else(|| D::Error::custom("malformed Laurent coefficient"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb() -> impl Strategy<Value = LaurentCoeff> {
        proptest::collection::vec((-3i64..4, -2i64..3, -5i64..6), 0..5).prop_map(|ts| {
            let mut c = LaurentCoeff::zero();
            for (v, x, k) in ts {
                c.add_term(BigInt::from(k), v, x);
            }
            c
        })
    }

    #[test]
    fn display() {
        let mut c = LaurentCoeff::v_pow(2);
        c.add_term(BigInt::from(-1), 0, 0);
        assert_eq!(c.to_string(), "v^2 - 1");
        let mut d = LaurentCoeff::monomial(BigInt::from(-3), -1, 1);
        d.add_term(BigInt::one(), 1, 0);
        assert_eq!(d.to_string(), "v - 3*X*v^-1");
        assert_eq!(LaurentCoeff::zero().to_string(), "0");
    }

    #[test]
    fn specialization_folds_x_into_v() {
        let c = LaurentCoeff::monomial(BigInt::one(), -2, 2);
        // X -> v^{1}: s = -1/2
        assert_eq!(c.specialize_x(-1), LaurentCoeff::one());
    }

    #[test]
    fn big_coefficients_round_trip_as_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let c = LaurentCoeff::monomial(big, 1, -1);
        let j = serde_json::to_string(&c).unwrap();
        assert!(j.contains("\"123456789012345678901234567890\""));
        assert_eq!(serde_json::from_str::<LaurentCoeff>(&j).unwrap(), c);
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb(), b in arb(), c in arb()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn specialization_is_a_ring_map(a in arb(), b in arb(), h in -3i64..4) {
            prop_assert_eq!((&a * &b).specialize_x(h), &a.specialize_x(h) * &b.specialize_x(h));
        }

        #[test]
        fn json_round_trip(a in arb()) {
            let j = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<LaurentCoeff>(&j).unwrap(), a);
        }
    }
}
