//! Archimedean side: complex Gamma, L- and gamma factors of spherical
//! parameters, Stirling and derivative asymptotics, decay thresholds, the
//! weight-norm constant and a decay probe.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::linalg;
use crate::root_datum::{RepSpec, WeightVec};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln sin(pi z)` up to a multiple of `2 pi i`, without overflow for large
/// `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    // sin(pi z) has period 2
    let z = c(z.re - 2.0 * (z.re / 2.0).round(), z.im);
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        let e = (c(0.0, 2.0 * PI) * z).exp();
        c(0.0, -PI) * z + (c(1.0, 0.0) - e).ln() + c(0.5f64.ln(), PI / 2.0)
    } else {
        ln_sin_pi(z.conj()).conj()
    }
}

/// `ln Gamma(z)` up to a multiple of `2 pi i`.
pub fn ln_cgamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::Pole(format!("Gamma has a pole at {}", z.re)));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OutOfRange(format!("non-finite argument {z}")));
    }
    if z.re < 0.5 {
        let r = ln_cgamma(c(1.0, 0.0) - z)?;
        return Ok(c(PI.ln(), 0.0) - ln_sin_pi(z) - r);
    }
    let z = z - 1.0;
    let mut a = c(LANCZOS[0], 0.0);
    for (i, &k) in LANCZOS.iter().enumerate().skip(1) {
        a += k / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(c(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + a.ln())
}

pub fn cgamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_cgamma(z)?.exp())
}

/// `1/Gamma(z)`, entire: zero at the poles of Gamma.
pub fn rgamma(z: Complex64) -> Complex64 {
    match ln_cgamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => c(0.0, 0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Basic,
    Kernel,
}

/// A spherical parameter `lambda` with the weights `w_k` of `rho` (listed
/// with multiplicity), evaluated at `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchParams {
    pub lambda: Vec<Complex64>,
    pub weights: Vec<WeightVec>,
    pub s: Complex64,
    pub l: i64,
    pub field: Field,
}

impl ArchParams {
    pub fn new(rho: &RepSpec, lambda: Vec<Complex64>, s: Complex64, l: i64, field: Field) -> ArchParams {
        ArchParams { lambda, weights: rho.weight_list(), s, l, field }
    }

    /// `w_k(lambda) = sum_t n^k_t lambda_t`.
    pub fn pairings(&self) -> Result<Vec<Complex64>> {
        self.weights
            .iter()
            .map(|w| {
                if w.len() != self.lambda.len() {
                    return Err(Error::LengthMismatch { expected: w.len(), got: self.lambda.len() });
                }
                Ok(w.entries().iter().zip(&self.lambda).map(|(&n, &x)| x * n as f64).sum())
            })
            .collect()
    }

    /// The contragredient parameter `-lambda`.
    pub fn dual(&self) -> ArchParams {
        ArchParams { lambda: self.lambda.iter().map(|x| -x).collect(), ..self.clone() }
    }

    pub fn at(&self, s: Complex64) -> ArchParams {
        ArchParams { s, ..self.clone() }
    }
}

fn ln_lfactor(p: &ArchParams) -> Result<Complex64> {
    let i = c(0.0, 1.0);
    let mut acc = c(0.0, 0.0);
    for w in p.pairings()? {
        let t = i * w;
        acc += match p.field {
            Field::Real => {
                let u = (p.s + t) / 2.0;
                -u * PI.ln() + ln_cgamma(u)?
            }
            Field::Complex => {
                let u = p.s + t / 2.0;
                c(2f64.ln(), 0.0) - u * (2.0 * PI).ln() + ln_cgamma(u)?
            }
        };
    }
    Ok(acc)
}

/// `prod_k pi^{-(s + i w_k(lambda))/2} Gamma((s + i w_k(lambda))/2)`.
pub fn lfactor_real(p: &ArchParams) -> Result<Complex64> {
    ln_lfactor(&ArchParams { field: Field::Real, ..p.clone() }).map(|l| l.exp())
}

/// `prod_k 2 (2 pi)^{-(s + i w_k(lambda)/2)} Gamma(s + i w_k(lambda)/2)`.
pub fn lfactor_cplx(p: &ArchParams) -> Result<Complex64> {
    ln_lfactor(&ArchParams { field: Field::Complex, ..p.clone() }).map(|l| l.exp())
}

pub fn lfactor(p: &ArchParams) -> Result<Complex64> {
    ln_lfactor(p).map(|l| l.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub value: Complex64,
    pub ratio_route: Complex64,
    pub rel_discrepancy: f64,
}

/// `L(1+s+l/2, pi, rho) / L(-s-l/2, pi^vee, rho)`; zero where the
/// denominator has a pole.
fn gamma_ratio_route(p: &ArchParams) -> Result<Complex64> {
    let a = p.s + p.l as f64 / 2.0;
    let num = lfactor(&p.at(a + 1.0))?;
    let q = p.dual().at(-a);
    let i = c(0.0, 1.0);
    let mut den_inv = c(1.0, 0.0);
    for w in q.pairings()? {
        let t = i * w;
        den_inv *= match q.field {
            Field::Real => {
                let u = (q.s + t) / 2.0;
                (u * PI.ln()).exp() * rgamma(u)
            }
            Field::Complex => {
                let u = q.s + t / 2.0;
                (u * (2.0 * PI).ln()).exp() * rgamma(u) / 2.0
            }
        };
    }
    Ok(num * den_inv)
}

/// The same ratio after the reflection formula, one factor per weight:
/// real `pi^{-(1/2+a+t)} Gamma((1+a+t)/2) sin(pi (2+a+t)/2) Gamma((2+a+t)/2) / pi`,
/// complex `(2 pi)^{-(1+2z)} sin(pi (1+z)) Gamma(1+z)^2 / pi` with
/// `z = a + t/2`, where `a = s + l/2` and `t = i w_k(lambda)`.
fn gamma_reflected_route(p: &ArchParams) -> Result<Complex64> {
    let a = p.s + p.l as f64 / 2.0;
    let i = c(0.0, 1.0);
    let mut acc = c(1.0, 0.0);
    for w in p.pairings()? {
        let t = i * w;
        acc *= match p.field {
            Field::Real => {
                let u = a + t;
                (-(u + 0.5) * PI.ln()).exp()
                    * cgamma((u + 1.0) / 2.0)?
                    * (PI * (u + 2.0) / 2.0).sin()
                    * cgamma((u + 2.0) / 2.0)?
                    / PI
            }
            Field::Complex => {
                let z = a + t / 2.0;
                let g = cgamma(z + 1.0)?;
                (-(2.0 * z + 1.0) * (2.0 * PI).ln()).exp() * (PI * (z + 1.0)).sin() * g * g / PI
            }
        };
    }
    Ok(acc)
}

/// The gamma factor `gamma(-s-l/2, pi^vee, rho)` by the reflected product,
/// with its relative distance to the direct ratio of L-factors.
pub fn gamma_factor(p: &ArchParams) -> Result<GammaFactor> {
    let value = gamma_reflected_route(p)?;
    let ratio_route = gamma_ratio_route(p)?;
    let diff = (value - ratio_route).norm();
    let rel_discrepancy = if value.norm() > 0.0 { diff / value.norm() } else { diff };
    Ok(GammaFactor { value, ratio_route, rel_discrepancy })
}

/// `|Gamma(x+iy)| / (sqrt(2 pi) |y|^{x-1/2} e^{-pi |y|/2})`.
pub fn stirling_ratio(x: f64, y: f64) -> Result<f64> {
    if y.abs() < 1.0 {
        return Err(Error::OutOfRange(format!("|y| = {} is below 1", y.abs())));
    }
    let lg = ln_cgamma(c(x, y))?.re;
    let ls = 0.5 * (2.0 * PI).ln() + (x - 0.5) * y.abs().ln() - PI * y.abs() / 2.0;
    Ok((lg - ls).exp())
}

/// `Gamma^{(n)}(z) / (Gamma(z) (log z)^n)`, differentiating
/// `h -> Gamma(z+h)/Gamma(z)` at 0 by central differences with Richardson
/// extrapolation.
pub fn derivative_ratio(n: u32, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Ok(c(1.0, 0.0));
    }
    if z.arg().abs() >= PI || is_pole(z) {
        return Err(Error::OutOfRange(format!("{z} is outside |arg z| < pi")));
    }
    let l0 = ln_cgamma(z)?;
    let g = |h: f64| -> Result<Complex64> { Ok((ln_cgamma(z + h)? - l0).exp()) };
    let diff = |h: f64| -> Result<Complex64> {
        // n-th central difference with spacing h
        let mut acc = c(0.0, 0.0);
        let mut binom = 1.0;
        for j in 0..=n {
            let x = (n as f64 / 2.0 - j as f64) * h;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += g(x)? * (sign * binom);
            binom = binom * (n - j) as f64 / (j + 1) as f64;
        }
        Ok(acc / h.powi(n as i32))
    };
    let h0 = (0.5 / z.ln().norm()).min(0.25);
    let levels = 5;
    let mut table: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..levels {
        let mut row = vec![diff(h0 / 2f64.powi(i as i32))?];
        for j in 1..=i {
            let f = 4f64.powi(j as i32);
            let v = (row[j - 1] * f - table[i - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    Ok(table[levels - 1][levels - 1] / z.ln().powu(n))
}

/// `epsilon = 2/p - 1`.
pub fn epsilon(p: &BigRational) -> Result<BigRational> {
    let two = BigRational::from_integer(BigInt::from(2));
    if !p.is_positive() || p > &two {
        return Err(Error::OutOfRange(format!("p = {p} is outside (0, 2]")));
    }
    Ok(&two / p - BigRational::one())
}

impl Context {
    /// `max_{k, w} w_k(w epsilon rho_B)` over the weights of `rho` and the
    /// Weyl orbit of `epsilon rho_B`, the vertices of its convex hull.
    fn hull_max(&self, rho: &RepSpec, eps: &BigRational) -> Result<BigRational> {
        let rd = self.rd();
        let group = rd.weyl_elements()?;
        let mut best: Option<i64> = None;
        for w in group.iter() {
            let form = w.act_form(rd.rho_b_times_2());
            for nu in rho.weights.keys() {
                let x = nu.dot(&form);
                best = Some(best.map_or(x, |b| b.max(x)));
            }
        }
        let best = best.ok_or_else(|| Error::Validation("representation has no weights".into()))?;
        Ok(eps * BigRational::new(BigInt::from(best), BigInt::from(2)))
    }

    /// Lower bound on `Re s` for Schwartz-space decay of the basic function or
    /// the kernel, over a real or complex field.
    pub fn threshold(&self, rho: &RepSpec, p: &BigRational, which: Which, field: Field) -> Result<BigRational> {
        let l = self.checked_l(rho)?;
        let m = self.hull_max(rho, &epsilon(p)?)?;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let lr = BigRational::from_integer(BigInt::from(l));
        Ok(match (which, field) {
            (Which::Basic, Field::Real) => m,
            (Which::Kernel, Field::Real) => m - BigRational::one() - &lr * &half,
            (Which::Basic, Field::Complex) => m * &half,
            (Which::Kernel, Field::Complex) => {
                m * &half - &half - lr / BigRational::from_integer(BigInt::from(4))
            }
        })
    }

    pub fn c_rho_constant(&self, rho: &RepSpec) -> Result<BigRational> {
        self.checked_l(rho)?;
        c_rho_from_weights(&rho.weight_list())
    }

    /// Samples `(|lambda|+1)^t |L(s, pi_lambda, rho)|` on shells of real
    /// directions with entries in {-1,0,1}, shifted by `i y` for `y` in the
    /// vertices of the hull and 0.
    pub fn seminorm_probe(&self, rho: &RepSpec, cfg: &ProbeConfig) -> Result<ProbeReport> {
        let l = self.checked_l(rho)?;
        let rd = self.rd();
        let m = rd.rank();
        let eps = epsilon(&cfg.p)?;
        let eps_f = eps.to_f64().unwrap_or(f64::NAN);
        let mut ys: Vec<Vec<f64>> = vec![vec![0.0; m]];
        if !eps.is_zero() {
            let group = rd.weyl_elements()?;
            for w in group.iter() {
                let f = w.act_form(rd.rho_b_times_2());
                let y: Vec<f64> = f.iter().map(|&x| eps_f * x as f64 / 2.0).collect();
                if !ys.contains(&y) {
                    ys.push(y);
                }
            }
        }
        let weights = rho.weight_list();
        // Gamma arguments are (s + i w(lambda))/2 over R and s + i w(lambda)/2
        // over C; at lambda = x + i y their real parts are positive multiples
        // of Re s - w(y)/k
        let k = if cfg.field == Field::Real { 1.0 } else { 2.0 };
        let mut pole_flag = false;
        let mut witness = None;
        for y in &ys {
            for w in &weights {
                let wy: f64 = w.entries().iter().zip(y).map(|(&n, &t)| n as f64 * t).sum::<f64>() / k;
                if cfg.s.re - wy <= 0.0 {
                    pole_flag = true;
                    if witness.is_none() {
                        witness = pole_witness(w, y, wy, cfg.s, k);
                    }
                }
            }
        }
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for code in 0..3usize.pow(m as u32) {
            let mut d = Vec::with_capacity(m);
            let mut x = code;
            for _ in 0..m {
                d.push((x % 3) as f64 - 1.0);
                x /= 3;
            }
            let norm = d.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm > 0.0 {
                dirs.push(d.iter().map(|t| t / norm).collect());
            }
        }
        let shells = cfg.shells.max(2);
        let mut points = Vec::new();
        for sh in 0..=shells {
            let r = cfg.radius * sh as f64 / shells as f64;
            for d in &dirs {
                for y in &ys {
                    points.push((sh, d.iter().zip(y).map(|(a, b)| c(r * a, *b)).collect::<Vec<_>>()));
                }
            }
        }
        let field = cfg.field;
        let s = cfg.s;
        let t = cfg.t;
        let logs: Vec<(usize, Option<f64>)> = points
            .par_iter()
            .map(|(sh, lam)| {
                let p = ArchParams { lambda: lam.clone(), weights: weights.clone(), s, l, field };
                let norm = lam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (*sh, ln_lfactor(&p).ok().map(|v| v.re + t as f64 * (norm + 1.0).ln()))
            })
            .collect();
        let mut shell_max = vec![f64::NEG_INFINITY; shells + 1];
        let mut skipped = 0;
        for (sh, v) in &logs {
            match v {
                Some(v) => shell_max[*sh] = shell_max[*sh].max(*v),
                None => skipped += 1,
            }
        }
        let inner = shell_max[..shells].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let last = shell_max[shells];
        let log_max = inner.max(last);
        Ok(ProbeReport {
            log_max,
            max: log_max.exp(),
            shell_log_max: shell_max,
            decaying: last < inner,
            pole_flag,
            pole_witness: witness,
            samples: logs.len(),
            skipped,
        })
    }
}

/// A parameter `lambda = x + i theta y` at which `Gamma` hits its pole at 0
/// through the factor of `w`, when one exists. `wy` is `w(y)/k`.
fn pole_witness(w: &WeightVec, y: &[f64], wy: f64, s: Complex64, k: f64) -> Option<PoleWitness> {
    if wy <= 0.0 || s.re < 0.0 || s.re > wy {
        return None;
    }
    let theta = s.re / wy;
    let ww: f64 = w.entries().iter().map(|&n| (n * n) as f64).sum();
    let lambda = w
        .entries()
        .iter()
        .zip(y)
        .map(|(&n, &t)| c(-k * s.im * n as f64 / ww, theta * t))
        .collect();
    Some(PoleWitness { lambda, weight: w.clone() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub s: Complex64,
    pub p: BigRational,
    pub t: i32,
    pub radius: f64,
    pub shells: usize,
    pub field: Field,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleWitness {
    pub lambda: Vec<Complex64>,
    pub weight: WeightVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub log_max: f64,
    pub max: f64,
    pub shell_log_max: Vec<f64>,
    pub decaying: bool,
    pub pole_flag: bool,
    pub pole_witness: Option<PoleWitness>,
    pub samples: usize,
    pub skipped: usize,
}

/// The largest `C` with `sum_k |w_k(x)| >= C sum_t |x_t|`: the minimum of the
/// left side on the boundary of the cross-polytope. On each orthant facet
/// the minimum sits at a vertex cut out by the hyperplanes `w_k = 0` and
/// `x_t = 0`, so the vertices are enumerated exactly.
pub fn c_rho_from_weights(weights: &[WeightVec]) -> Result<BigRational> {
    let m = weights.first().map_or(0, |w| w.len());
    if m == 0 {
        return Err(Error::Validation("no weights".into()));
    }
    if m > 4 {
        return Err(Error::OutOfRange(format!("rank {m} exceeds 4")));
    }
    if weights.iter().any(|w| w.len() != m) {
        return Err(Error::LengthMismatch { expected: m, got: weights.iter().map(|w| w.len()).max().unwrap_or(0) });
    }
    let mut planes: Vec<Vec<i64>> = Vec::new();
    for w in weights {
        if !w.is_zero() && !planes.contains(&w.0) {
            planes.push(w.0.clone());
        }
    }
    for t in 0..m {
        planes.push(WeightVec::unit(m, t).0);
    }
    let mut best: Option<BigRational> = None;
    for signs in 0..(1usize << m) {
        let sg: Vec<i64> = (0..m).map(|t| if signs >> t & 1 == 1 { -1 } else { 1 }).collect();
        for subset in subsets(planes.len(), m - 1) {
            let mut a: Vec<Vec<BigRational>> = subset
                .iter()
                .map(|&i| planes[i].iter().map(|&x| linalg::rat(x)).collect())
                .collect();
            a.push(sg.iter().map(|&x| linalg::rat(x)).collect());
            let mut b = vec![BigRational::zero(); m - 1];
            b.push(BigRational::one());
            let Some(x) = linalg::solve(&a, &b) else { continue };
            if x.iter().zip(&sg).any(|(xt, &s)| (xt * linalg::rat(s)).is_negative()) {
                continue;
            }
            let mut f = BigRational::zero();
            for w in weights {
                let v: BigRational = w.entries().iter().zip(&x).map(|(&n, xt)| xt * linalg::rat(n)).sum();
                f += v.abs();
            }
            if best.as_ref().is_none_or(|b| &f < b) {
                best = Some(f);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Validation("no feasible vertex".into()))?;
    if best.is_zero() {
        return Err(Error::Validation("weights do not span: the constant is 0".into()));
    }
    Ok(best)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
