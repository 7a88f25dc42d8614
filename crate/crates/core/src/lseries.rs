//! L-series of a representation of the dual group, its basic function, the
//! inverse-L polynomial, the Fourier kernel, and verifiers for the
//! fixed-point and unitarity identities.
//!
//! Grade `k` of an element carries `X^k` for a formal `X = q^{-s}`; putting
//! `s = h/2` is [`Graded::specialize`]`(h)`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::kostka::QPoly;
use crate::laurent::LaurentCoeff;
use crate::root_datum::{CartanLabel, RepSpec, WeightVec};
use crate::satake::{Graded, HeckeElement, SatakeImage, Window};

/// `1_{rho,X} = sum_mu c_mu(q) q^{-<rho_B,mu>} X^{sigma(mu)} 1_{K mu K}` on
/// grades `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicFunction {
    pub element: HeckeElement,
    pub rho: RepSpec,
    pub n: i64,
    pub l: i64,
    pub coeffs: BTreeMap<WeightVec, QPoly>,
}

impl BasicFunction {
    /// `1_{rho,h/2}`.
    pub fn at_half(&self, h: i64) -> HeckeElement {
        self.element.specialize(h)
    }

    /// `1_{rho,1+l/2}`.
    pub fn shifted_up(&self) -> HeckeElement {
        self.at_half(self.l + 2)
    }

    /// `1_{rho,-l/2}`.
    pub fn schwartz_unit(&self) -> HeckeElement {
        self.at_half(-self.l)
    }
}

/// The Fourier kernel with `s` kept in `X`, exact on grades `<= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelElement {
    pub element: HeckeElement,
    pub n: i64,
    pub l: i64,
    pub dim: i64,
}

impl KernelElement {
    pub fn at_zero(&self) -> HeckeElement {
        self.element.drop_x()
    }
}

/// `1_{rho,-l/2} * h` with `h` finitely supported. `unit` must be known on a
/// window large enough for whatever is computed from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchwartzElement {
    pub unit: HeckeElement,
    pub h: HeckeElement,
}

pub enum FourierInput<'a> {
    Hecke(&'a HeckeElement),
    Schwartz(&'a SchwartzElement),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub grade: i64,
    pub mu: WeightVec,
    pub expected: String,
    pub got: String,
    pub stage: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeDetail {
    pub grade: i64,
    pub terms: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub passed: bool,
    pub grades: Vec<GradeDetail>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub status: Status,
    pub check: String,
    pub group: String,
    pub rho: WeightVec,
    pub n: i64,
    pub stages: Vec<StageReport>,
    pub first_mismatch: Option<Mismatch>,
    /// Kept out of the JSON form so that reports are byte-deterministic.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

struct Checker {
    stages: Vec<StageReport>,
    first: Option<Mismatch>,
}

impl Checker {
    fn new() -> Self {
        Checker { stages: Vec::new(), first: None }
    }

    /// Compares `got` against `want` grade by grade on `[lo, hi]`. Later
    /// stages still run, but only the first mismatch is kept.
    fn stage<B: crate::satake::BasisKind>(&mut self, name: &str, want: &Graded<B>, got: &Graded<B>, lo: i64, hi: i64) {
        let mut grades = Vec::new();
        let mut passed = true;
        for k in lo..=hi {
            let d = want.first_difference(got, Window::between(k, k));
            let terms = got.grade(k).map_or(0, |t| t.len());
            if let Some(d) = &d {
                passed = false;
                if self.first.is_none() {
                    self.first = Some(Mismatch {
                        grade: d.grade,
                        mu: d.weight.clone(),
                        expected: d.expected.clone(),
                        got: d.got.clone(),
                        stage: name.to_string(),
                    });
                }
            }
            grades.push(GradeDetail { grade: k, terms, ok: d.is_none() });
        }
        self.stages.push(StageReport { name: name.into(), lo, hi, passed, grades });
    }

    fn finish(self, ctx: &Context, check: &str, rho: &RepSpec, n: i64, t0: Instant) -> VerifyReport {
        VerifyReport {
            status: if self.first.is_none() { Status::Pass } else { Status::Fail },
            check: check.into(),
            group: ctx.rd().label().to_string(),
            rho: rho.highest_weight.clone(),
            n,
            stages: self.stages,
            first_mismatch: self.first,
            wall_time_ms: t0.elapsed().as_secs_f64() * 1e3,
        }
    }
}

impl Context {
    /// Validates `rho` and returns `l = 2<rho_B, lambda_rho>`.
    pub fn checked_l(&self, rho: &RepSpec) -> Result<i64> {
        let rep = self.rd().validate_rho(rho);
        if !rep.passed {
            return Err(Error::Validation(rep.failures.join("; ")));
        }
        self.rd().l_constant(rho)
    }

    /// `sum_k ch(Sym^k rho) X^k` for `k <= n`.
    pub fn l_series(&self, rho: &RepSpec, n: i64) -> Result<SatakeImage> {
        self.checked_l(rho)?;
        if n < 0 {
            return Err(Error::OutOfRange(format!("grade cap {n} is negative")));
        }
        let chars = self.sym_power_characters(rho, n as usize)?;
        let mut out = SatakeImage::with_window(Window::upto(n));
        for (k, ch) in chars.iter().enumerate() {
            for p in self.decompose(ch)?.parts {
                out.add_term(k as i64, p.lambda, LaurentCoeff::monomial(BigInt::from(p.mult), 0, k as i64));
            }
        }
        Ok(out)
    }

    /// `c_mu(q) = sum_lam K_{lam,mu}(q^{-1}) mult(Sym^k rho : V(lam))`, with
    /// `k = sigma(mu)`; zero when `k < 0`.
    pub fn basic_coeff(&self, rho: &RepSpec, mu: &WeightVec) -> Result<QPoly> {
        let rd = self.rd();
        if !rd.is_dominant(mu) {
            return Err(Error::NotDominant(mu.clone()));
        }
        let k = rd.sigma_grade(mu)?;
        if k < 0 {
            return Ok(QPoly::zero());
        }
        let mut acc = QPoly::zero();
        for p in self.sym_power_decomp(rho, k as usize)?.parts {
            let kq = self.lusztig_q_analogue(&p.lambda, mu)?;
            acc += &(&kq.invert() * &QPoly::monomial(BigInt::from(p.mult), 0));
        }
        Ok(acc)
    }

    pub fn basic_function(&self, rho: &RepSpec, n: i64) -> Result<BasicFunction> {
        let l = self.checked_l(rho)?;
        if n < 0 {
            return Err(Error::OutOfRange(format!("grade cap {n} is negative")));
        }
        let rd = self.rd();
        let mut cells = BTreeSet::new();
        for k in 0..=n {
            for p in self.sym_power_decomp(rho, k as usize)?.parts {
                cells.extend(rd.dominant_below(&p.lambda)?);
            }
        }
        let mut element = HeckeElement::with_window(Window::upto(n));
        let mut coeffs = BTreeMap::new();
        for mu in cells {
            let c = self.basic_coeff(rho, &mu)?;
            if c.is_zero() {
                continue;
            }
            let k = rd.sigma_grade(&mu)?;
            element.add_term(k, mu.clone(), c.to_laurent().shift(-rd.rho_b_pair2(&mu), k));
            coeffs.insert(mu, c);
        }
        Ok(BasicFunction { element, rho: rho.clone(), n, l, coeffs })
    }

    /// Inverse Satake of `sum_i (-1)^i ch(wedge^i rho') X^{a g} v^{b g}`,
    /// where `rho' = rho^vee` when `dualize` is set and `g` is the grade of
    /// `wedge^i rho'`.
    ///
    /// `(true, (1, -l))` gives `1/L(-s-l/2, rho^vee)`; `(false, (0, -(l+2)))`
    /// gives `1/L(1+l/2, rho)`.
    pub fn inverse_l_element(&self, rho: &RepSpec, dualize: bool, shift: (i64, i64)) -> Result<HeckeElement> {
        self.checked_l(rho)?;
        let (a, b) = shift;
        let base = if dualize { self.dual_rep(rho)? } else { rho.clone() };
        let mut chi = SatakeImage::zero();
        for (i, ch) in self.ext_power_characters(&base)?.iter().enumerate() {
            let sign: i64 = if i % 2 == 0 { 1 } else { -1 };
            for p in self.decompose(ch)?.parts {
                let g = self.rd().sigma_grade(&p.lambda)?;
                chi.add_term(g, p.lambda, LaurentCoeff::monomial(BigInt::from(sign * p.mult), b * g, a * g));
            }
        }
        self.inverse_satake(&chi)
    }

    fn kernel_from(&self, rho: &RepSpec, basic: &BasicFunction, n: i64) -> Result<KernelElement> {
        let dim = rho.dim();
        if basic.n < n + dim {
            return Err(Error::Window(format!(
                "the kernel to grade {n} needs the basic function to grade {}",
                n + dim
            )));
        }
        let up = basic.element.twist(0, -(basic.l + 2));
        let inv = self.inverse_l_element(rho, true, (1, -basic.l))?;
        let element = self.convolve(&up, &inv, Some(Window::upto(n)))?;
        Ok(KernelElement { element, n, l: basic.l, dim })
    }

    /// `1_{rho,1+s+l/2} * S^{-1}(1/L(-s-l/2, pi, rho^vee))`, exact on grades
    /// `<= n`; its lowest grade is `-dim rho`.
    pub fn gamma_kernel(&self, rho: &RepSpec, n: i64) -> Result<KernelElement> {
        let basic = self.basic_function(rho, n + rho.dim())?;
        self.kernel_from(rho, &basic, n)
    }

    /// `|sigma|^{-l-1} (Phi * f^vee)` on grades `<= n`, with `Phi` the kernel
    /// at `s = 0`.
    pub fn fourier(&self, f: FourierInput<'_>, rho: &RepSpec, n: i64) -> Result<HeckeElement> {
        let l = self.checked_l(rho)?;
        match f {
            FourierInput::Hecke(f) => {
                if !f.is_finite() {
                    return Err(Error::Window("Fourier input must be finitely supported".into()));
                }
                let Some(top) = f.max_grade() else {
                    return Ok(HeckeElement::zero());
                };
                let need = n + top;
                let kernel = self.gamma_kernel(rho, need.max(0))?.at_zero();
                let p = self.convolve(&kernel, &f.dual(self.rd()), None)?;
                Ok(p.twist(0, 2 * (l + 1)).restrict(Window::upto(n)))
            }
            FourierInput::Schwartz(f) => {
                let g = self.fourier_schwartz(f, rho)?;
                let Some(low) = g.h.min_grade() else {
                    return Ok(HeckeElement::zero());
                };
                let unit = self.basic_function(rho, (n - low).max(0))?.schwartz_unit();
                self.convolve(&unit, &g.h, Some(Window::upto(n)))
            }
        }
    }

    /// The Fourier transform on the Schwartz side:
    /// `1_{rho,-l/2} * h -> 1_{rho,-l/2} * |sigma|^{-l-1} h^vee`.
    pub fn fourier_schwartz(&self, f: &SchwartzElement, rho: &RepSpec) -> Result<SchwartzElement> {
        let l = self.checked_l(rho)?;
        if !f.h.is_finite() {
            return Err(Error::Window("Schwartz element needs finitely supported h".into()));
        }
        Ok(SchwartzElement { unit: f.unit.clone(), h: f.h.dual(self.rd()).twist(0, 2 * (l + 1)) })
    }

    pub fn schwartz_element(&self, rho: &RepSpec, h: &HeckeElement, n: i64) -> Result<SchwartzElement> {
        if !h.is_finite() {
            return Err(Error::Window("Schwartz element needs finitely supported h".into()));
        }
        Ok(SchwartzElement { unit: self.basic_function(rho, n)?.schwartz_unit(), h: h.clone() })
    }

    pub fn schwartz_value(&self, f: &SchwartzElement) -> Result<HeckeElement> {
        self.convolve(&f.unit, &f.h, None)
    }

    /// Solves `1_{rho,-l/2} * h = h'` for finitely supported `h'`.
    pub fn membership_witness(&self, rho: &RepSpec, target: &HeckeElement) -> Result<HeckeElement> {
        let l = self.checked_l(rho)?;
        if !target.is_finite() {
            return Err(Error::Window("target must be finitely supported".into()));
        }
        let det = self.inverse_l_element(rho, false, (0, l))?;
        self.convolve(target, &det, None)
    }

    pub fn verify_fixed_point(&self, rho: &RepSpec, n: i64) -> Result<VerifyReport> {
        let basic = self.basic_function(rho, n + rho.dim())?;
        self.verify_fixed_point_for(rho, &basic, n)
    }

    /// Checks `Phi * (1_{rho,-l/2})^vee = 1_{rho,1+l/2}` on grades `<= n`
    /// using the supplied basic function for every occurrence of it.
    ///
    /// The two sides live in opposite completions, so the identity is checked
    /// after clearing denominators with the finite elements
    /// `P = 1/L(1+l/2, rho)` and `D = 1/L(-l/2, rho^vee)`:
    /// `P * 1_{rho,1+l/2} = 1`, `P * Phi = D`, and `D * (1_{rho,-l/2})^vee = 1`.
    pub fn verify_fixed_point_for(&self, rho: &RepSpec, basic: &BasicFunction, n: i64) -> Result<VerifyReport> {
        let t0 = Instant::now();
        let l = self.checked_l(rho)?;
        let rd = self.rd();
        let m = rd.rank();
        let dim = rho.dim();
        let one = SatakeImage::identity(m);
        let up = self.satake(&basic.shifted_up().restrict(Window::upto(n)))?;
        let p_a = self.inverse_l_element(rho, false, (0, -(l + 2)))?;
        let d = self.inverse_l_element(rho, true, (0, -l))?;
        let (sp, sd) = (self.satake(&p_a)?, self.satake(&d)?);
        let phi = self.kernel_from(rho, basic, n)?.at_zero();
        let dual_unit = basic.schwartz_unit().restrict(Window::upto(n)).dual(rd);

        let mut chk = Checker::new();
        let target = self.mul_satake(&sp, &up)?;
        chk.stage("target", &one, &target, 0, n);
        let kernel = self.mul_satake(&sp, &self.satake(&phi)?)?;
        chk.stage("kernel", &sd, &kernel, -dim, n);
        let dual = self.mul_satake(&sd, &self.satake(&dual_unit)?)?;
        chk.stage("dual", &one, &dual, -n, 0);
        // the first identity once more on the Hecke side
        let hecke = self.convolve(&p_a, &basic.shifted_up(), Some(Window::upto(n.min(1))))?;
        chk.stage("hecke", &HeckeElement::identity(m), &hecke, 0, n.min(1));
        Ok(chk.finish(self, "fixed-point", rho, n, t0))
    }

    /// Checks `S(Phi)(c) S(Phi^vee)(c q^{-(l+1)}) = 1` to grade `n`.
    ///
    /// With `Psi = |sigma|^{-(l+1)}`-twisted `Phi^vee`, `P` and `D` as in
    /// [`Context::verify_fixed_point_for`], `F1 = S(P) S(Phi)` must be a
    /// polynomial in grades `[-dim, 0]`, `F2 = S(D) S(Psi)` one in `[0, dim]`,
    /// and `F1 F2 = S(P) S(D)`.
    pub fn verify_unitarity(&self, rho: &RepSpec, n: i64) -> Result<VerifyReport> {
        let t0 = Instant::now();
        let l = self.checked_l(rho)?;
        let rd = self.rd();
        let dim = rho.dim();
        let phi = self.gamma_kernel(rho, n)?.at_zero();
        let psi = phi.dual(rd).twist(0, -2 * (l + 1));
        let sp = self.satake(&self.inverse_l_element(rho, false, (0, -(l + 2)))?)?;
        let sd = self.satake(&self.inverse_l_element(rho, true, (0, -l))?)?;
        let zero = SatakeImage::zero();

        let mut chk = Checker::new();
        let f1 = self.mul_satake(&sp, &self.satake(&phi)?)?;
        if n >= 1 {
            chk.stage("left", &zero, &f1, 1, n);
        }
        let f2 = self.mul_satake(&sd, &self.satake(&psi)?)?;
        if n >= 1 {
            chk.stage("right", &zero, &f2, -n, -1);
        }
        let g1 = f1.polynomial_part(Window::between(-dim, 0));
        let g2 = f2.polynomial_part(Window::between(0, dim));
        let prod = self.mul_satake(&g1, &g2)?;
        let want = self.mul_satake(&sp, &sd)?;
        chk.stage("product", &want, &prod, -dim, dim);
        Ok(chk.finish(self, "unitarity", rho, n, t0))
    }

    /// For `GL(n)` and the standard representation, the specialization
    /// `s = -(n-1)/2` of the basic function is the indicator of the integral
    /// cells: coefficient 1 on dominant `mu` with nonnegative entries.
    pub fn verify_gj_standard(&self, rho: &RepSpec, n: i64) -> Result<VerifyReport> {
        let t0 = Instant::now();
        let rd = self.rd();
        let CartanLabel::GL(r) = *rd.label() else {
            return Err(Error::Validation(format!("{} is not a general linear group", rd.label())));
        };
        if rho.highest_weight != WeightVec::unit(r, 0) {
            return Err(Error::Validation("representation is not the standard one".into()));
        }
        let got = self.basic_function(rho, n)?.at_half(-(r as i64 - 1));
        let mut want = HeckeElement::with_window(Window::upto(n));
        for k in 0..=n {
            for mu in partitions(k, r) {
                want.add_term(k, mu, LaurentCoeff::one());
            }
        }
        let mut chk = Checker::new();
        chk.stage("indicator", &want, &got, 0, n);
        Ok(chk.finish(self, "gj-standard", rho, n, t0))
    }

    /// `Z/L = S(h)(c q^{-s-l/2})` as a finite combination of characters with
    /// coefficients in `v` and `X`.
    pub fn zeta_over_l(&self, rho: &RepSpec, h: &HeckeElement) -> Result<SatakeImage> {
        let l = self.checked_l(rho)?;
        if !h.is_finite() {
            return Err(Error::Window("h must be finitely supported".into()));
        }
        self.satake(&h.twist(1, -l))
    }

    /// `prod_k (1 - c^{w_k} q^{-s})^{-1}` times `zeta_over_l(h)` at `(c, q, s)`.
    pub fn zeta_closed_form(&self, rho: &RepSpec, h: &HeckeElement, c: &[Complex64], q: f64, s: Complex64) -> Result<Complex64> {
        let zl = self.zeta_over_l(rho, h)?;
        let x = (-s * q.ln()).exp();
        let mut l = Complex64::new(1.0, 0.0);
        for (w, &mult) in &rho.weights {
            let t = torus_monomial(c, w)? * x;
            if t.norm() >= 1.0 {
                return Err(Error::Divergent(format!(
                    "|c^{w} q^-s| = {} is not below 1",
                    t.norm()
                )));
            }
            l /= (Complex64::new(1.0, 0.0) - t).powi(mult as i32);
        }
        let v = Complex64::new(q.sqrt(), 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (_, lam, coeff) in zl.terms() {
            acc += coeff.eval(v, x) * self.character_value(lam, c)?;
        }
        Ok(l * acc)
    }
}

/// `c^w = prod_i c_i^{w_i}`.
pub fn torus_monomial(c: &[Complex64], w: &WeightVec) -> Result<Complex64> {
    if c.len() != w.len() {
        return Err(Error::LengthMismatch { expected: w.len(), got: c.len() });
    }
    Ok(c.iter().zip(w.entries()).fold(Complex64::new(1.0, 0.0), |acc, (z, &e)| acc * z.powi(e as i32)))
}

/// Partitions of `k` into at most `r` parts, padded with zeros.
fn partitions(k: i64, r: usize) -> Vec<WeightVec> {
    fn go(k: i64, r: usize, max: i64, cur: &mut Vec<i64>, out: &mut Vec<WeightVec>) {
        if r == 0 {
            if k == 0 {
                out.push(WeightVec(cur.clone()));
            }
            return;
        }
        for p in (0..=max.min(k)).rev() {
            cur.push(p);
            go(k - p, r - 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, r, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_datum::RootDatum;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn w(v: &[i64]) -> WeightVec {
        WeightVec(v.to_vec())
    }

    fn gl(n: usize) -> (Context, RepSpec) {
        let c = Context::new(RootDatum::gl(n).unwrap());
        let rho = c.rep(&WeightVec::unit(n, 0)).unwrap();
        (c, rho)
    }

    fn x(k: i64) -> LaurentCoeff {
        LaurentCoeff::monomial(BigInt::from(1), 0, k)
    }

    #[test]
    fn l_series_examples() {
        let (c, rho) = gl(2);
        let s = c.l_series(&rho, 3).unwrap();
        assert_eq!(s.restrict(Window::between(2, 2)).polynomial_part(Window::FULL), SatakeImage::term(2, w(&[2, 0]), x(2)));
        assert_eq!(s.grade(0).unwrap().len(), 1);
        assert_eq!(s.coeff(0, &w(&[0, 0])), LaurentCoeff::one());
        let (c1, r1) = gl(1);
        let s1 = c1.l_series(&r1, 7).unwrap();
        for k in 0..=7 {
            assert_eq!(s1.coeff(k, &w(&[k])), x(k));
            assert_eq!(s1.grade(k).unwrap().len(), 1);
        }
    }

    #[test]
    fn basic_coeff_examples() {
        let (c, rho) = gl(2);
        assert_eq!(c.basic_coeff(&rho, &w(&[1, 0])).unwrap(), QPoly::one());
        assert_eq!(c.basic_coeff(&rho, &w(&[1, 1])).unwrap(), QPoly::q_pow(-1));
        assert_eq!(c.basic_coeff(&rho, &w(&[0, -1])).unwrap(), QPoly::zero());
        assert!(c.basic_coeff(&rho, &w(&[0, 1])).is_err());
    }

    #[test]
    fn basic_function_is_inverse_satake_of_the_l_series() {
        for n in 1..=3 {
            let (c, rho) = gl(n);
            let b = c.basic_function(&rho, 5).unwrap();
            assert_eq!(c.satake(&b.element).unwrap(), c.l_series(&rho, 5).unwrap());
        }
        let c = Context::new(RootDatum::preset(CartanLabel::C(2)).unwrap());
        let rho = c.rep(&w(&[1, 0, 1])).unwrap();
        let b = c.basic_function(&rho, 4).unwrap();
        assert_eq!(c.satake(&b.element).unwrap(), c.l_series(&rho, 4).unwrap());
    }

    #[test]
    fn basic_function_examples() {
        let (c, rho) = gl(2);
        let b = c.basic_function(&rho, 2).unwrap().at_half(-1);
        assert_eq!(b.coeff(2, &w(&[2, 0])), LaurentCoeff::one());
        assert_eq!(b.coeff(2, &w(&[1, 1])), LaurentCoeff::one());
        let (c1, r1) = gl(1);
        let b1 = c1.basic_function(&r1, 5).unwrap().at_half(0);
        for k in 0..=5 {
            assert_eq!(b1.coeff(k, &w(&[k])), LaurentCoeff::one());
        }
        assert_eq!(b1.num_terms(), 6);
        let b0 = c.basic_function(&rho, 0).unwrap();
        assert_eq!(b0.element.polynomial_part(Window::FULL), HeckeElement::identity(2));
    }

    #[test]
    fn indicator_property() {
        for n in 1..=3 {
            let (c, rho) = gl(n);
            let r = c.verify_gj_standard(&rho, 6).unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
        assert_eq!(partitions(4, 2), vec![w(&[4, 0]), w(&[3, 1]), w(&[2, 2])]);
    }

    #[test]
    fn inverse_l_examples() {
        let (c1, r1) = gl(1);
        let e = c1.inverse_l_element(&r1, true, (1, 0)).unwrap();
        let mut want = HeckeElement::identity(1);
        want.add_term(-1, w(&[-1]), -x(-1));
        assert_eq!(e, want);
        let (c, rho) = gl(2);
        let e = c.inverse_l_element(&rho, true, (1, -1)).unwrap();
        assert_eq!(e.coeff(0, &w(&[0, 0])), LaurentCoeff::one());
        let grades: Vec<i64> = e.grades().map(|(k, _)| k).collect();
        assert_eq!(grades, vec![-2, -1, 0]);
        // det(1 - c1^{-1} u)(1 - c2^{-1} u) with u = v X^{-1}
        let s = c.satake(&e).unwrap();
        let u = LaurentCoeff::monomial(BigInt::from(1), 1, -1);
        assert_eq!(s.coeff(-1, &w(&[0, -1])), -&u);
        assert_eq!(s.coeff(-2, &w(&[-1, -1])), &u * &u);
    }

    /// Multivariate Laurent polynomials in `c_1..c_m, v, X`.
    type Poly = HashMap<(Vec<i64>, i64, i64), BigInt>;

    fn pmul(a: &Poly, b: &Poly, cap: i64) -> Poly {
        let mut out = Poly::new();
        for ((ea, va, xa), ca) in a {
            for ((eb, vb, xb), cb) in b {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(p, q)| p + q).collect();
                if e.iter().sum::<i64>() > cap {
                    continue;
                }
                *out.entry((e, va + vb, xa + xb)).or_default() += ca * cb;
            }
        }
        out.retain(|_, c| c != &BigInt::from(0));
        out
    }

    fn to_monomials(c: &Context, s: &SatakeImage) -> Poly {
        let mut out = Poly::new();
        for (_, lam, coeff) in s.terms() {
            for (nu, m) in &c.weight_multiplicities(lam).unwrap().support {
                for (v, xe, k) in coeff.terms() {
                    *out.entry((nu.0.clone(), v, xe)).or_default() += k * m;
                }
            }
        }
        out.retain(|_, c| c != &BigInt::from(0));
        out
    }

    #[test]
    fn kernel_matches_series_division_oracle() {
        for (n, cap) in [(1usize, 6i64), (2, 3)] {
            let (c, rho) = gl(n);
            let l = n as i64 - 1;
            let k = c.gamma_kernel(&rho, cap).unwrap();
            // prod_i sum_j (c_i v^{-(l+2)} X)^j * prod_i (1 - c_i^{-1} v^l X^{-1})
            let mut acc: Poly = [((vec![0; n], 0, 0), BigInt::from(1))].into();
            for i in 0..n {
                let mut geo = Poly::new();
                for j in 0..=cap + n as i64 {
                    let mut e = vec![0; n];
                    e[i] = j;
                    geo.insert((e, -(l + 2) * j, j), BigInt::from(1));
                }
                let mut e = vec![0; n];
                e[i] = -1;
                let det: Poly = [((vec![0; n], 0, 0), BigInt::from(1)), ((e, l, -1), BigInt::from(-1))].into();
                acc = pmul(&pmul(&acc, &geo, cap + n as i64), &det, cap + n as i64);
            }
            acc.retain(|(e, _, _), _| e.iter().sum::<i64>() <= cap);
            assert_eq!(to_monomials(&c, &c.satake(&k.element).unwrap()), acc, "GL({n})");
            assert_eq!(k.element.min_grade(), Some(-(n as i64)));
        }
    }

    #[test]
    fn fixed_point_and_unitarity_pass() {
        for n in 1..=3 {
            let (c, rho) = gl(n);
            let r = c.verify_fixed_point(&rho, 4).unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
            let r = c.verify_unitarity(&rho, 4).unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
    }

    #[test]
    fn corrupted_basic_function_fails_at_its_grade() {
        let (c, rho) = gl(2);
        let mut b = c.basic_function(&rho, 6).unwrap();
        b.element.add_term(3, w(&[2, 1]), x(3));
        let r = c.verify_fixed_point_for(&rho, &b, 4).unwrap();
        assert_eq!(r.status, Status::Fail);
        let m = r.first_mismatch.unwrap();
        assert_eq!((m.grade, m.stage.as_str()), (3, "target"));
    }

    #[test]
    fn gl1_fourier_fixes_the_basic_function() {
        let (c, rho) = gl(1);
        let f = c.schwartz_element(&rho, &HeckeElement::identity(1), 8).unwrap();
        let g = c.fourier_schwartz(&f, &rho).unwrap();
        assert_eq!(g, f);
        let u = c.fourier(FourierInput::Schwartz(&f), &rho, 8).unwrap();
        assert_eq!(u, f.unit);
    }

    #[test]
    fn fourier_of_identity_is_the_twisted_kernel() {
        let (c, rho) = gl(2);
        let f = c.fourier(FourierInput::Hecke(&HeckeElement::identity(2)), &rho, 3).unwrap();
        let k = c.gamma_kernel(&rho, 3).unwrap().at_zero().twist(0, 4);
        assert_eq!(f, k);
    }

    #[test]
    fn zeta_examples() {
        let (c, rho) = gl(2);
        let id = HeckeElement::identity(2);
        assert_eq!(c.zeta_over_l(&rho, &id).unwrap(), SatakeImage::identity(2));
        let e = HeckeElement::term(1, w(&[1, 0]), LaurentCoeff::one());
        assert_eq!(c.zeta_over_l(&rho, &e).unwrap(), SatakeImage::term(1, w(&[1, 0]), x(1)));
        let (c1, r1) = gl(1);
        let z = c1
            .zeta_closed_form(&r1, &HeckeElement::identity(1), &[Complex64::new(1.0, 0.0)], 2.0, Complex64::new(1.0, 0.0))
            .unwrap();
        assert!((z - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let bad = c1.zeta_closed_form(&r1, &HeckeElement::identity(1), &[Complex64::new(4.0, 0.0)], 2.0, Complex64::new(1.0, 0.0));
        assert!(matches!(bad, Err(Error::Divergent(_))));
    }

    #[test]
    fn zeta_of_schwartz_element_matches_truncated_sum() {
        let (c, rho) = gl(2);
        let l = 1;
        let mut h = HeckeElement::term(1, w(&[1, 0]), LaurentCoeff::from_int(2));
        h.add_term(0, w(&[0, 0]), LaurentCoeff::from_int(-1));
        h.add_term(2, w(&[1, 1]), LaurentCoeff::v_pow(1));
        let n = 30;
        let f = c.schwartz_element(&rho, &h, n).unwrap();
        let fx = c.schwartz_value(&f).unwrap();
        let series = c.satake(&fx.twist(1, -l)).unwrap();
        let cc = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)];
        let (q, s) = (3.0, Complex64::new(0.4, 1.3));
        let num = c.eval_numeric(&series, &cc, q, s, n).unwrap();
        let closed = c.zeta_closed_form(&rho, &h, &cc, q, s).unwrap();
        assert!((num.value - closed).norm() <= 1e-9 * closed.norm(), "{num:?} vs {closed}");
    }

    #[test]
    fn fourier_paths_agree_on_compact_elements() {
        let (c, rho) = gl(2);
        let mut h = HeckeElement::term(1, w(&[1, 0]), LaurentCoeff::one());
        h.add_term(0, w(&[1, -1]), LaurentCoeff::from_int(3));
        let n = 3;
        let direct = c.fourier(FourierInput::Hecke(&h), &rho, n).unwrap();
        let wit = c.membership_witness(&rho, &h).unwrap();
        let f = c.schwartz_element(&rho, &wit, 0).unwrap();
        let via = c.fourier(FourierInput::Schwartz(&f), &rho, n).unwrap();
        assert_eq!(direct, via);
    }

    fn arb_h(n: usize) -> impl Strategy<Value = HeckeElement> {
        proptest::collection::vec((proptest::collection::vec(-1i64..3, n), -2i64..3, -1i64..2), 1..4).prop_map(|ts| {
            let mut f = HeckeElement::zero();
            for (mut mu, k, v) in ts {
                mu.sort_unstable_by(|a, b| b.cmp(a));
                let g: i64 = mu.iter().sum();
                f.add_term(g, WeightVec(mu), LaurentCoeff::monomial(BigInt::from(k), v, 0));
            }
            f
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn membership_witness_solves_the_equation(h in arb_h(2)) {
            let (c, rho) = gl(2);
            let wit = c.membership_witness(&rho, &h).unwrap();
            prop_assert!(wit.is_finite());
            let n = 8;
            let unit = c.basic_function(&rho, n).unwrap().schwartz_unit();
            let lhs = c.convolve(&unit, &wit, None).unwrap();
            let win = lhs.window();
            prop_assert_eq!(lhs, h.restrict(win));
        }

        #[test]
        fn zeta_over_l_is_a_finite_laurent_polynomial(h in arb_h(3)) {
            let (c, rho) = gl(3);
            let z = c.zeta_over_l(&rho, &h).unwrap();
            prop_assert!(z.is_finite());
            let grades: BTreeSet<i64> = h.grades().map(|(k, _)| k).collect();
            for (k, _, coeff) in z.terms() {
                prop_assert!(grades.contains(&k));
                prop_assert!(coeff.x_exponents().all(|e| e == k));
            }
        }

        #[test]
        fn fourier_is_linear(a in arb_h(2), b in arb_h(2)) {
            let (c, rho) = gl(2);
            let fa = c.fourier(FourierInput::Hecke(&a), &rho, 2).unwrap();
            let fb = c.fourier(FourierInput::Hecke(&b), &rho, 2).unwrap();
            let fab = c.fourier(FourierInput::Hecke(&a.add(&b)), &rho, 2).unwrap();
            prop_assert_eq!(fab.restrict(Window::upto(2)), fa.add(&fb).restrict(Window::upto(2)));
        }
    }
}
