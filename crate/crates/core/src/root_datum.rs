//! Split reductive root data with a grading character.
//!
//! Weights live in `Z^m`. For `GL(n)` the coordinates are the standard ones;
//! the simple presets use fundamental-weight coordinates for the dual group
//! with one extra central coordinate on which `sigma` reads off the grade.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_WEYL_CAP: usize = 50_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVec(pub Vec<i64>);

impl WeightVec {
    pub fn new(v: Vec<i64>) -> Self {
        WeightVec(v)
    }

    pub fn zero(m: usize) -> Self {
        WeightVec(vec![0; m])
    }

    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0; m];
        v[i] = 1;
        WeightVec(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &WeightVec) -> WeightVec {
        WeightVec(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &WeightVec) -> WeightVec {
        WeightVec(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> WeightVec {
        WeightVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> WeightVec {
        WeightVec(self.0.iter().map(|a| a * k).collect())
    }

    /// Pairing with an integer linear form.
    pub fn dot(&self, form: &[i64]) -> i64 {
        self.0.iter().zip(form).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for WeightVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for WeightVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        if t.trim().is_empty() {
            return Err(Error::Parse(format!("empty weight '{s}'")));
        }
        t.split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("weight '{s}': {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(WeightVec)
    }
}

/// Type of the root system of the dual group. `GL(n)` is the reductive
/// preset; the simple types are adjoined with one central coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CartanLabel {
    GL(usize),
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    G2,
    Custom(String),
}

impl fmt::Display for CartanLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CartanLabel::GL(n) => write!(f, "GL({n})"),
            CartanLabel::A(r) => write!(f, "A{r}xGm"),
            CartanLabel::B(r) => write!(f, "B{r}xGm"),
            CartanLabel::C(r) => write!(f, "C{r}xGm"),
            CartanLabel::D(r) => write!(f, "D{r}xGm"),
            CartanLabel::G2 => write!(f, "G2xGm"),
            CartanLabel::Custom(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for CartanLabel {
    type Err = Error;

    /// Accepts `GL(3)`, `gl3`, `C2`, `C2xGm`, `g2`; anything else is custom.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let core = lower.trim_end_matches("xgm");
        if let Some(rest) = core.strip_prefix("gl") {
            let n = rest.trim_start_matches('(').trim_end_matches(')');
            if let Ok(n) = n.parse::<usize>() {
                return Ok(CartanLabel::GL(n));
            }
        }
        if core == "g2" {
            return Ok(CartanLabel::G2);
        }
        let mut chars = core.chars();
        if let Some(c) = chars.next() {
            if let Ok(r) = chars.as_str().parse::<usize>() {
                match c {
                    'a' => return Ok(CartanLabel::A(r)),
                    'b' => return Ok(CartanLabel::B(r)),
                    'c' => return Ok(CartanLabel::C(r)),
                    'd' => return Ok(CartanLabel::D(r)),
                    _ => {}
                }
            }
        }
        Ok(CartanLabel::Custom(t.to_string()))
    }
}

/// One Weyl group element: integer matrix acting on weights (row-major),
/// its length and a reduced word in the simple reflections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    pub matrix: Vec<i64>,
    pub length: usize,
    pub word: Vec<usize>,
    m: usize,
}

impl WeylElement {
    pub fn act(&self, mu: &WeightVec) -> WeightVec {
        let m = self.m;
        WeightVec(
            (0..m)
                .map(|i| (0..m).map(|j| self.matrix[i * m + j] * mu.0[j]).sum())
                .collect(),
        )
    }

    /// Contragredient action on linear forms: `f ↦ f ∘ w`.
    pub fn act_form(&self, f: &[i64]) -> Vec<i64> {
        let m = self.m;
        (0..m)
            .map(|j| (0..m).map(|i| f[i] * self.matrix[i * m + j]).sum())
            .collect()
    }

    pub fn sign(&self) -> i64 {
        if self.length.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeylGroup {
    elements: Vec<WeylElement>,
}

impl WeylGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, WeylElement> {
        self.elements.iter()
    }

    pub fn max_length(&self) -> usize {
        self.elements.iter().map(|w| w.length).max().unwrap_or(0)
    }
}

/// A representation of the dual group given by its highest weight, with its
/// weight multiset (computed by the characters module).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepSpec {
    pub highest_weight: WeightVec,
    pub weights: BTreeMap<WeightVec, i64>,
}

impl RepSpec {
    pub fn dim(&self) -> i64 {
        self.weights.values().sum()
    }

    /// The weights listed with multiplicity, in descending order.
    pub fn weight_list(&self) -> Vec<WeightVec> {
        let mut out = Vec::new();
        for (w, &m) in self.weights.iter().rev() {
            for _ in 0..m {
                out.push(w.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    label: CartanLabel,
    m: usize,
    sigma: Vec<i64>,
    simple_roots: Vec<WeightVec>,
    simple_coroots: Vec<Vec<i64>>,
    positive_roots: Vec<WeightVec>,
    positive_coroots: Vec<Vec<i64>>,
    rho_b_times_2: Vec<i64>,
    rho_hat_times_2: WeightVec,
    w0: WeylElement,
    coord_inv: Vec<Vec<i64>>,
    coord_den: i64,
    weyl_cap: usize,
    fingerprint: String,
    weyl: OnceLock<Arc<WeylGroup>>,
}

impl PartialEq for RootDatum {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
    }
}

/// Positive roots of the Cartan matrix `c` (`c[i][j] = <alpha_j, alpha_i^vee>`)
/// in simple-root coordinates, by height.
fn positive_root_coords(c: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let r = c.len();
    let mut all: Vec<Vec<i64>> = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut layer: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            let mut e = vec![0; r];
            e[i] = 1;
            e
        })
        .collect();
    for e in &layer {
        seen.insert(e.clone());
    }
    while !layer.is_empty() {
        all.extend(layer.iter().cloned());
        let mut next = Vec::new();
        for beta in &layer {
            for i in 0..r {
                let mut p = 0;
                loop {
                    let mut t = beta.clone();
                    t[i] -= p + 1;
                    if seen.contains(&t) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let pair: i64 = (0..r).map(|j| beta[j] * c[i][j]).sum();
                if p - pair > 0 {
                    let mut t = beta.clone();
                    t[i] += 1;
                    if seen.insert(t.clone()) {
                        next.push(t);
                    }
                }
            }
        }
        next.sort();
        if seen.len() > 10_000 {
            return Err(Error::InvalidDatum("root system is not finite".into()));
        }
        layer = next;
    }
    Ok(all)
}

fn cartan_matrix(label: &CartanLabel) -> Result<Vec<Vec<i64>>> {
    let chain = |r: usize| {
        let mut c = vec![vec![0i64; r]; r];
        for i in 0..r {
            c[i][i] = 2;
            if i + 1 < r {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        c
    };
    let bad = |s: &str| Err(Error::InvalidDatum(format!("unsupported preset {s}")));
    match *label {
        CartanLabel::A(r) if (1..=4).contains(&r) => Ok(chain(r)),
        CartanLabel::B(r) if (2..=4).contains(&r) => {
            let mut c = chain(r);
            c[r - 1][r - 2] = -2;
            Ok(c)
        }
        CartanLabel::C(r) if (2..=4).contains(&r) => {
            let mut c = chain(r);
            c[r - 2][r - 1] = -2;
            Ok(c)
        }
        CartanLabel::D(r) if (3..=4).contains(&r) => {
            let mut c = chain(r);
            c[r - 2][r - 1] = 0;
            c[r - 1][r - 2] = 0;
            c[r - 3][r - 1] = -1;
            c[r - 1][r - 3] = -1;
            Ok(c)
        }
        CartanLabel::G2 => Ok(vec![vec![2, -3], vec![-1, 2]]),
        _ => bad(&label.to_string()),
    }
}

impl RootDatum {
    /// `GL(n)` in the standard coordinates, with `sigma` the sum of entries.
    pub fn gl(n: usize) -> Result<RootDatum> {
        if n == 0 {
            return Err(Error::InvalidDatum("GL(0)".into()));
        }
        let simple: Vec<WeightVec> = (0..n - 1)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                v[i + 1] = -1;
                WeightVec(v)
            })
            .collect();
        let coroots = simple.iter().map(|a| a.0.clone()).collect();
        RootDatum::from_simple(CartanLabel::GL(n), vec![1; n], simple, coroots)
    }

    /// Simple type of rank at most 4, times a central `G_m`.
    pub fn preset(label: CartanLabel) -> Result<RootDatum> {
        if let CartanLabel::GL(n) = label {
            return RootDatum::gl(n);
        }
        let c = cartan_matrix(&label)?;
        let r = c.len();
        let m = r + 1;
        // alpha_j in fundamental-weight coordinates is column j of c
        let simple: Vec<WeightVec> = (0..r)
            .map(|j| {
                let mut v: Vec<i64> = (0..r).map(|i| c[i][j]).collect();
                v.push(0);
                WeightVec(v)
            })
            .collect();
        let coroots: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut f = vec![0; m];
                f[i] = 1;
                f
            })
            .collect();
        let mut sigma = vec![0; m];
        sigma[r] = 1;
        RootDatum::from_simple(label, sigma, simple, coroots)
    }

    /// General constructor from simple roots and simple coroots (as forms).
    pub fn from_simple(
        label: CartanLabel,
        sigma: Vec<i64>,
        simple_roots: Vec<WeightVec>,
        simple_coroots: Vec<Vec<i64>>,
    ) -> Result<RootDatum> {
        let m = sigma.len();
        let r = simple_roots.len();
        if m == 0 {
            return Err(Error::InvalidDatum("rank 0".into()));
        }
        if simple_coroots.len() != r {
            return Err(Error::InvalidDatum("roots and coroots differ in number".into()));
        }
        for a in &simple_roots {
            if a.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: a.len() });
            }
            if a.dot(&sigma) != 0 {
                return Err(Error::InvalidDatum(format!("sigma does not vanish on {a}")));
            }
        }
        for f in &simple_coroots {
            if f.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: f.len() });
            }
        }
        if sigma.iter().all(|&x| x == 0) {
            return Err(Error::InvalidDatum("sigma is zero".into()));
        }
        let c: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..r).map(|j| simple_roots[j].dot(&simple_coroots[i])).collect())
            .collect();
        for (i, row) in c.iter().enumerate() {
            if row[i] != 2 {
                return Err(Error::InvalidDatum("<alpha_i, alpha_i^vee> != 2".into()));
            }
            for (j, &cij) in row.iter().enumerate() {
                if i != j && (cij > 0 || (cij == 0) != (c[j][i] == 0)) {
                    return Err(Error::InvalidDatum("not a Cartan matrix".into()));
                }
            }
        }
        let (coord_inv, coord_den) = linalg::integer_left_inverse(
            &simple_roots.iter().map(|a| a.0.clone()).collect::<Vec<_>>(),
            m,
        )
        .ok_or_else(|| Error::InvalidDatum("simple roots are dependent".into()))?;

        let root_coords = positive_root_coords(&c)?;
        let positive_roots: Vec<WeightVec> = root_coords
            .iter()
            .map(|cs| {
                let mut v = WeightVec::zero(m);
                for (j, &k) in cs.iter().enumerate() {
                    v = v.add(&simple_roots[j].scale(k));
                }
                v
            })
            .collect();
        let ct: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| c[j][i]).collect()).collect();
        let positive_coroots: Vec<Vec<i64>> = positive_root_coords(&ct)?
            .iter()
            .map(|ds| {
                let mut f = vec![0; m];
                for (j, &k) in ds.iter().enumerate() {
                    for t in 0..m {
                        f[t] += k * simple_coroots[j][t];
                    }
                }
                f
            })
            .collect();
        if positive_coroots.len() != positive_roots.len() {
            return Err(Error::InvalidDatum("root and coroot counts differ".into()));
        }
        let mut rho_b_times_2 = vec![0; m];
        for f in &positive_coroots {
            for t in 0..m {
                rho_b_times_2[t] += f[t];
            }
        }
        let rho_hat_times_2 = positive_roots
            .iter()
            .fold(WeightVec::zero(m), |acc, a| acc.add(a));

        let mut rd = RootDatum {
            label,
            m,
            sigma,
            simple_roots,
            simple_coroots,
            positive_roots,
            positive_coroots,
            rho_b_times_2,
            rho_hat_times_2,
            w0: WeylElement { matrix: Vec::new(), length: 0, word: Vec::new(), m },
            coord_inv,
            coord_den,
            weyl_cap: DEFAULT_WEYL_CAP,
            fingerprint: String::new(),
            weyl: OnceLock::new(),
        };
        rd.w0 = rd.compute_w0();
        let json = serde_json::to_string(&rd.to_json())?;
        let digest = Sha256::digest(json.as_bytes());
        rd.fingerprint = format!("{}:{}", rd.label, &hex::encode(digest)[..16]);
        Ok(rd)
    }

    pub fn with_weyl_cap(mut self, cap: usize) -> RootDatum {
        self.weyl_cap = cap;
        self.weyl = OnceLock::new();
        self
    }

    fn reflection_matrix(&self, i: usize) -> Vec<i64> {
        let m = self.m;
        let a = &self.simple_roots[i].0;
        let f = &self.simple_coroots[i];
        let mut s = vec![0; m * m];
        for x in 0..m {
            for y in 0..m {
                s[x * m + y] = i64::from(x == y) - a[x] * f[y];
            }
        }
        s
    }

    fn matmul(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let m = self.m;
        let mut c = vec![0; m * m];
        for i in 0..m {
            for k in 0..m {
                let x = a[i * m + k];
                if x != 0 {
                    for j in 0..m {
                        c[i * m + j] += x * b[k * m + j];
                    }
                }
            }
        }
        c
    }

    fn identity_matrix(&self) -> Vec<i64> {
        let m = self.m;
        (0..m * m).map(|k| i64::from(k / m == k % m)).collect()
    }

    fn compute_w0(&self) -> WeylElement {
        let mut x = self.rho_hat_times_2.neg();
        let mut mat = self.identity_matrix();
        let mut word = Vec::new();
        while let Some(i) = (0..self.rank_ss()).find(|&i| x.dot(&self.simple_coroots[i]) < 0) {
            x = self.reflect(i, &x);
            mat = self.matmul(&self.reflection_matrix(i), &mat);
            word.insert(0, i);
        }
        WeylElement { matrix: mat, length: word.len(), word, m: self.m }
    }

    pub fn label(&self) -> &CartanLabel {
        &self.label
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// The coweight rank `m`.
    pub fn rank(&self) -> usize {
        self.m
    }

    /// Semisimple rank (number of simple roots).
    pub fn rank_ss(&self) -> usize {
        self.simple_roots.len()
    }

    pub fn sigma(&self) -> &[i64] {
        &self.sigma
    }

    pub fn simple_roots(&self) -> &[WeightVec] {
        &self.simple_roots
    }

    pub fn simple_coroots(&self) -> &[Vec<i64>] {
        &self.simple_coroots
    }

    pub fn positive_roots(&self) -> &[WeightVec] {
        &self.positive_roots
    }

    pub fn positive_coroots(&self) -> &[Vec<i64>] {
        &self.positive_coroots
    }

    /// `2 rho_B` as a linear form on weights.
    pub fn rho_b_times_2(&self) -> &[i64] {
        &self.rho_b_times_2
    }

    /// Twice the half sum of the positive roots, as a weight.
    pub fn rho_hat_times_2(&self) -> &WeightVec {
        &self.rho_hat_times_2
    }

    pub fn w0(&self) -> &WeylElement {
        &self.w0
    }

    pub fn weyl_cap(&self) -> usize {
        self.weyl_cap
    }

    fn check_len(&self, mu: &WeightVec) -> Result<()> {
        if mu.len() != self.m {
            return Err(Error::LengthMismatch { expected: self.m, got: mu.len() });
        }
        Ok(())
    }

    pub fn sigma_grade(&self, mu: &WeightVec) -> Result<i64> {
        self.check_len(mu)?;
        Ok(mu.dot(&self.sigma))
    }

    /// `<rho_B, mu>`, a half-integer.
    pub fn pair_rho_b(&self, mu: &WeightVec) -> Result<Ratio<i64>> {
        self.check_len(mu)?;
        Ok(Ratio::new(mu.dot(&self.rho_b_times_2), 2))
    }

    /// `2 <rho_B, mu>`, assuming the length has been checked.
    pub fn rho_b_pair2(&self, mu: &WeightVec) -> i64 {
        mu.dot(&self.rho_b_times_2)
    }

    pub fn is_dominant(&self, mu: &WeightVec) -> bool {
        mu.len() == self.m && self.simple_coroots.iter().all(|f| mu.dot(f) >= 0)
    }

    fn require_dominant(&self, mu: &WeightVec) -> Result<()> {
        self.check_len(mu)?;
        if !self.is_dominant(mu) {
            return Err(Error::NotDominant(mu.clone()));
        }
        Ok(())
    }

    pub fn reflect(&self, i: usize, mu: &WeightVec) -> WeightVec {
        let k = mu.dot(&self.simple_coroots[i]);
        mu.sub(&self.simple_roots[i].scale(k))
    }

    /// Coordinates of `beta` in the basis of simple roots, if it lies in
    /// the root lattice.
    pub fn root_coords(&self, beta: &WeightVec) -> Option<Vec<i64>> {
        let mut c = Vec::with_capacity(self.rank_ss());
        for row in &self.coord_inv {
            let n = beta.dot(row);
            if n % self.coord_den != 0 {
                return None;
            }
            c.push(n / self.coord_den);
        }
        let mut back = WeightVec::zero(self.m);
        for (j, &k) in c.iter().enumerate() {
            if k != 0 {
                back = back.add(&self.simple_roots[j].scale(k));
            }
        }
        (back == *beta).then_some(c)
    }

    /// Moves `mu` into the dominant chamber. Returns the dominant weight and
    /// the parity of the number of reflections used.
    pub fn to_dominant(&self, mu: &WeightVec) -> (WeightVec, usize) {
        let mut x = mu.clone();
        let mut steps = 0;
        while let Some(i) = (0..self.rank_ss()).find(|&i| x.dot(&self.simple_coroots[i]) < 0) {
            x = self.reflect(i, &x);
            steps += 1;
        }
        (x, steps)
    }

    /// `-w0 mu`, the highest weight of the dual representation.
    pub fn dual_weight(&self, mu: &WeightVec) -> WeightVec {
        self.w0.act(mu).neg()
    }

    /// True iff `lam - mu` is a nonnegative integer combination of simple roots.
    pub fn dominance_leq(&self, mu: &WeightVec, lam: &WeightVec) -> Result<bool> {
        self.require_dominant(mu)?;
        self.require_dominant(lam)?;
        Ok(self.root_leq(mu, lam))
    }

    /// Root-lattice order without dominance checks.
    pub fn root_leq(&self, mu: &WeightVec, lam: &WeightVec) -> bool {
        match self.root_coords(&lam.sub(mu)) {
            Some(c) => c.iter().all(|&x| x >= 0),
            None => false,
        }
    }

    /// All dominant weights below `lam`, in descending lexicographic order.
    ///
    /// Uses the fact that the dominant weights below `lam` are connected to
    /// `lam` by subtracting single positive roots while staying dominant.
    pub fn dominant_below(&self, lam: &WeightVec) -> Result<Vec<WeightVec>> {
        self.require_dominant(lam)?;
        let mut seen: BTreeSet<WeightVec> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(lam.clone());
        queue.push_back(lam.clone());
        while let Some(nu) = queue.pop_front() {
            for a in &self.positive_roots {
                let x = nu.sub(a);
                if self.is_dominant(&x) && !seen.contains(&x) {
                    seen.insert(x.clone());
                    queue.push_back(x);
                }
            }
        }
        Ok(seen.into_iter().rev().collect())
    }

    /// Full Weyl group by breadth-first search over reduced words.
    pub fn weyl_elements(&self) -> Result<Arc<WeylGroup>> {
        if let Some(w) = self.weyl.get() {
            return Ok(w.clone());
        }
        let r = self.rank_ss();
        let gens: Vec<Vec<i64>> = (0..r).map(|i| self.reflection_matrix(i)).collect();
        let id = self.identity_matrix();
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut elements = vec![WeylElement { matrix: id.clone(), length: 0, word: vec![], m: self.m }];
        index.insert(id, 0);
        let mut head = 0;
        while head < elements.len() {
            for (i, g) in gens.iter().enumerate() {
                let mat = self.matmul(g, &elements[head].matrix);
                if index.contains_key(&mat) {
                    continue;
                }
                if elements.len() >= self.weyl_cap {
                    return Err(Error::WeylCapExceeded(self.weyl_cap));
                }
                let mut word = vec![i];
                word.extend_from_slice(&elements[head].word);
                index.insert(mat.clone(), elements.len());
                elements.push(WeylElement {
                    matrix: mat,
                    length: elements[head].length + 1,
                    word,
                    m: self.m,
                });
            }
            head += 1;
        }
        let group = Arc::new(WeylGroup { elements });
        Ok(self.weyl.get_or_init(|| group).clone())
    }

    /// The Weyl orbit of `mu`, sorted descending.
    pub fn orbit(&self, mu: &WeightVec) -> Vec<WeightVec> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(mu.clone());
        queue.push_back(mu.clone());
        while let Some(x) = queue.pop_front() {
            for i in 0..self.rank_ss() {
                let y = self.reflect(i, &x);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().rev().collect()
    }

    pub fn l_constant(&self, rho: &RepSpec) -> Result<i64> {
        self.require_dominant(&rho.highest_weight)?;
        Ok(self.rho_b_pair2(&rho.highest_weight))
    }

    /// Torus-level checks on `rho`: every weight has grade 1 and the weights
    /// span the whole weight space.
    pub fn validate_rho(&self, rho: &RepSpec) -> ValidationReport {
        let mut failures = Vec::new();
        if !self.is_dominant(&rho.highest_weight) {
            failures.push(format!("highest weight {} is not dominant", rho.highest_weight));
        }
        for nu in rho.weights.keys() {
            if nu.len() != self.m {
                failures.push(format!("weight {nu} has the wrong length"));
                continue;
            }
            let g = nu.dot(&self.sigma);
            if g != 1 {
                failures.push(format!("weight {nu} has sigma-grade {g}, expected 1"));
            }
        }
        let rows: Vec<Vec<i64>> = rho.weights.keys().map(|w| w.0.clone()).collect();
        let rk = linalg::rank(&rows);
        if rk != self.m {
            failures.push(format!("weights span a subspace of rank {rk} < {}", self.m));
        }
        ValidationReport {
            passed: failures.is_empty(),
            failures,
            notes: vec![
                "connectedness of ker(rho) and global faithfulness are group-level \
                 conditions and are not checked from torus data"
                    .into(),
            ],
        }
    }

    pub fn to_json(&self) -> RootDatumJson {
        RootDatumJson {
            cartan: self.label.to_string(),
            rank: self.m,
            sigma: self.sigma.clone(),
            simple_roots: self.simple_roots.clone(),
            simple_coroots: Some(self.simple_coroots.clone()),
            positive_roots: Some(self.positive_roots.clone()),
            rho_b_times_2: Some(self.rho_b_times_2.clone()),
        }
    }

    /// Rebuilds a datum from its JSON form. Omitted coroots default to
    /// `2 alpha / (alpha . alpha)` for the standard dot product; supplied
    /// derived fields are checked against the recomputed ones.
    pub fn from_json(j: &RootDatumJson) -> Result<RootDatum> {
        if j.sigma.len() != j.rank {
            return Err(Error::LengthMismatch { expected: j.rank, got: j.sigma.len() });
        }
        let coroots = match &j.simple_coroots {
            Some(c) => c.clone(),
            None => j
                .simple_roots
                .iter()
                .map(|a| {
                    let n = a.dot(&a.0);
                    if n == 0 || a.0.iter().any(|x| (2 * x) % n != 0) {
                        return Err(Error::InvalidDatum(format!(
                            "cannot infer an integral coroot for {a}"
                        )));
                    }
                    Ok(a.0.iter().map(|x| 2 * x / n).collect())
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let label: CartanLabel = j.cartan.parse()?;
        let label = match label {
            CartanLabel::Custom(_) => label,
            // a preset name on hand-written data is kept only if it matches
            other => match RootDatum::preset(other.clone()) {
                Ok(p) if p.simple_roots == j.simple_roots && p.sigma == j.sigma => other,
                _ => CartanLabel::Custom(j.cartan.clone()),
            },
        };
        let rd = RootDatum::from_simple(label, j.sigma.clone(), j.simple_roots.clone(), coroots)?;
        if let Some(p) = &j.positive_roots {
            let a: BTreeSet<_> = p.iter().collect();
            let b: BTreeSet<_> = rd.positive_roots.iter().collect();
            if a != b {
                return Err(Error::InvalidDatum("positive_roots inconsistent with simple roots".into()));
            }
        }
        if let Some(r) = &j.rho_b_times_2 {
            if *r != rd.rho_b_times_2 {
                return Err(Error::InvalidDatum("rho_b_times_2 inconsistent".into()));
            }
        }
        Ok(rd)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootDatumJson {
    pub cartan: String,
    pub rank: usize,
    pub sigma: Vec<i64>,
    pub simple_roots: Vec<WeightVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple_coroots: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_roots: Option<Vec<WeightVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b_times_2: Option<Vec<i64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> WeightVec {
        WeightVec(v.to_vec())
    }

    #[test]
    fn gl_basics() {
        let g2 = RootDatum::gl(2).unwrap();
        assert_eq!(g2.pair_rho_b(&w(&[1, 0])).unwrap(), Ratio::new(1, 2));
        assert_eq!(g2.pair_rho_b(&w(&[1, 1])).unwrap(), Ratio::new(0, 1));
        assert_eq!(g2.rho_b_times_2(), &[1, -1]);
        let g3 = RootDatum::gl(3).unwrap();
        let roots: BTreeSet<_> = g3.positive_roots().iter().cloned().collect();
        let want: BTreeSet<_> = [w(&[1, -1, 0]), w(&[1, 0, -1]), w(&[0, 1, -1])].into();
        assert_eq!(roots, want);
        assert_eq!(g3.pair_rho_b(&w(&[1, 0, 0])).unwrap(), Ratio::new(1, 1));
        let g1 = RootDatum::gl(1).unwrap();
        assert!(g1.positive_roots().is_empty());
        assert_eq!(g1.rho_b_times_2(), &[0]);
        assert!(RootDatum::gl(2).unwrap().pair_rho_b(&w(&[1])).is_err());
    }

    #[test]
    fn grades() {
        let g3 = RootDatum::gl(3).unwrap();
        assert_eq!(g3.sigma_grade(&w(&[2, 1, 0])).unwrap(), 3);
        let g2 = RootDatum::gl(2).unwrap();
        assert_eq!(g2.sigma_grade(&w(&[1, -1])).unwrap(), 0);
        assert_eq!(g2.sigma_grade(&w(&[-1, -1])).unwrap(), -2);
    }

    #[test]
    fn dominance_examples() {
        let g2 = RootDatum::gl(2).unwrap();
        assert!(g2.dominance_leq(&w(&[1, 1]), &w(&[2, 0])).unwrap());
        assert!(!g2.dominance_leq(&w(&[2, 0]), &w(&[1, 1])).unwrap());
        assert!(g2.dominance_leq(&w(&[0, 1]), &w(&[1, 0])).is_err());
        let g3 = RootDatum::gl(3).unwrap();
        assert!(g3.dominance_leq(&w(&[1, 1, 1]), &w(&[3, 0, 0])).unwrap());
        assert_eq!(g3.root_coords(&w(&[2, -1, -1])), Some(vec![2, 1]));
    }

    #[test]
    fn dominant_below_examples() {
        let g2 = RootDatum::gl(2).unwrap();
        assert_eq!(g2.dominant_below(&w(&[2, 0])).unwrap(), vec![w(&[2, 0]), w(&[1, 1])]);
        assert_eq!(g2.dominant_below(&w(&[1, 0])).unwrap(), vec![w(&[1, 0])]);
        let g3 = RootDatum::gl(3).unwrap();
        assert_eq!(
            g3.dominant_below(&w(&[2, 1, 0])).unwrap(),
            vec![w(&[2, 1, 0]), w(&[1, 1, 1])]
        );
    }

    #[test]
    fn weyl_orders() {
        assert_eq!(RootDatum::gl(2).unwrap().weyl_elements().unwrap().len(), 2);
        let g3 = RootDatum::gl(3).unwrap().weyl_elements().unwrap();
        assert_eq!(g3.len(), 6);
        assert_eq!(g3.max_length(), 3);
        let orders = [
            (CartanLabel::A(2), 6),
            (CartanLabel::B(2), 8),
            (CartanLabel::C(2), 8),
            (CartanLabel::G2, 12),
            (CartanLabel::B(3), 48),
            (CartanLabel::C(3), 48),
            (CartanLabel::D(4), 192),
        ];
        for (label, n) in orders {
            let rd = RootDatum::preset(label.clone()).unwrap();
            assert_eq!(rd.weyl_elements().unwrap().len(), n, "{label}");
            assert_eq!(rd.w0().length, rd.positive_roots().len());
        }
    }

    #[test]
    fn root_counts() {
        let counts = [
            (CartanLabel::B(2), 4),
            (CartanLabel::G2, 6),
            (CartanLabel::B(3), 9),
            (CartanLabel::C(4), 16),
            (CartanLabel::D(4), 12),
            (CartanLabel::A(4), 10),
        ];
        for (label, n) in counts {
            assert_eq!(RootDatum::preset(label).unwrap().positive_roots().len(), n);
        }
    }

    #[test]
    fn weyl_cap_is_enforced() {
        let rd = RootDatum::gl(4).unwrap().with_weyl_cap(10);
        assert_eq!(rd.weyl_elements().unwrap_err(), Error::WeylCapExceeded(10));
    }

    #[test]
    fn rho_b_pairs_to_one_on_simple_roots() {
        for label in [CartanLabel::B(3), CartanLabel::C(3), CartanLabel::G2, CartanLabel::D(4)] {
            let rd = RootDatum::preset(label).unwrap();
            for a in rd.simple_roots() {
                assert_eq!(a.dot(rd.rho_b_times_2()), 2);
            }
            assert_eq!(*rd.rho_b_times_2().last().unwrap(), 0);
        }
    }

    #[test]
    fn validate_examples() {
        let g2 = RootDatum::gl(2).unwrap();
        let std = RepSpec {
            highest_weight: w(&[1, 0]),
            weights: [(w(&[1, 0]), 1), (w(&[0, 1]), 1)].into(),
        };
        assert!(g2.validate_rho(&std).passed);
        let sym2 = RepSpec {
            highest_weight: w(&[2, 0]),
            weights: [(w(&[2, 0]), 1), (w(&[1, 1]), 1), (w(&[0, 2]), 1)].into(),
        };
        let rep = g2.validate_rho(&sym2);
        assert!(!rep.passed);
        assert!(rep.failures[0].contains("grade 2"));
        assert_eq!(g2.l_constant(&sym2).unwrap(), 2);
        assert_eq!(g2.l_constant(&std).unwrap(), 1);
    }

    #[test]
    fn json_round_trip() {
        for rd in [
            RootDatum::gl(3).unwrap(),
            RootDatum::preset(CartanLabel::C(2)).unwrap(),
            RootDatum::preset(CartanLabel::G2).unwrap(),
        ] {
            let j = serde_json::to_string(&rd.to_json()).unwrap();
            let back = RootDatum::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
            assert_eq!(back, rd);
        }
        let hand = r#"{"cartan":"GL(2)","rank":2,"sigma":[1,1],"simple_roots":[[1,-1]]}"#;
        let rd = RootDatum::from_json(&serde_json::from_str(hand).unwrap()).unwrap();
        assert_eq!(rd, RootDatum::gl(2).unwrap());
    }

    #[test]
    fn labels_parse() {
        assert_eq!("gl3".parse::<CartanLabel>().unwrap(), CartanLabel::GL(3));
        assert_eq!("GL(2)".parse::<CartanLabel>().unwrap(), CartanLabel::GL(2));
        assert_eq!("C2xGm".parse::<CartanLabel>().unwrap(), CartanLabel::C(2));
        assert_eq!("g2".parse::<CartanLabel>().unwrap(), CartanLabel::G2);
        assert_eq!("(1,0,-1)".parse::<WeightVec>().unwrap(), w(&[1, 0, -1]));
    }
}
