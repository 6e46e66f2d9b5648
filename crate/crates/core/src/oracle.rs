//! Exact Jacobian-ring oracle.
//!
//! Computes the reduced Gröbner basis of the gradient ideal (∂f/∂z_1, ..,
//! ∂f/∂z_n) under graded-reverse-lex, the standard monomials spanning the
//! quotient ring, and the commuting multiplication matrices on that basis.
//! Critical points are then localized from a random real combination of the
//! multiplication matrices: its characteristic polynomial is computed
//! exactly and split square-free, which fixes every multiplicity as an
//! integer before any floating-point work happens.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bergman::{DomainKind, DomainSpec};
use crate::poly::{GaussianRational, MultiIndex, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("gradient ideal is not zero-dimensional: critical points are not isolated")]
    NotZeroDimensional,
    #[error("could not separate critical points after {attempts} random combinations")]
    ClusterAmbiguity { attempts: usize },
    #[error("critical point at {location:?} lies within {margin:e} of the boundary (margin to boundary {distance:e})")]
    CriticalPointNearBoundary { location: Vec<[f64; 2]>, distance: f64, margin: f64 },
    #[error("margin must be positive")]
    InvalidMargin,
}

/// Graded reverse lexicographic comparison.
pub fn grevlex_cmp(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        for (x, y) in a.exponents().iter().zip(b.exponents()).rev() {
            if x != y {
                // the smaller exponent in the last differing variable is larger
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

fn leading_term(p: &Polynomial) -> Option<(MultiIndex, GaussianRational)> {
    p.terms()
        .max_by(|(a, _), (b, _)| grevlex_cmp(a, b))
        .map(|(a, c)| (a.clone(), c.clone()))
}

fn leading_monomial(p: &Polynomial) -> MultiIndex {
    leading_term(p).expect("leading monomial of zero polynomial").0
}

fn make_monic(p: &Polynomial) -> Polynomial {
    match leading_term(p) {
        Some((_, c)) => p.scalar_mul(&c.inv().unwrap()),
        None => p.clone(),
    }
}

/// Full reduction of `p` modulo `divisors` (remainder of multivariate division).
pub fn reduce(p: &Polynomial, divisors: &[Polynomial]) -> Polynomial {
    let leads: Vec<(MultiIndex, GaussianRational)> =
        divisors.iter().map(|g| leading_term(g).expect("zero divisor")).collect();
    let mut rest = p.clone();
    let mut remainder = Polynomial::zero(p.dim());
    while let Some((lm, lc)) = leading_term(&rest) {
        let hit = leads.iter().enumerate().find_map(|(k, (m, c))| m.quotient_of(&lm).map(|q| (k, q, c)));
        match hit {
            Some((k, q, c)) => {
                let factor = &lc / c;
                rest = &rest - &divisors[k].mul_term(&q, &factor);
            }
            None => {
                let lead = Polynomial::monomial(p.dim(), lm, lc);
                remainder = &remainder + &lead;
                rest = &rest - &lead;
            }
        }
    }
    remainder
}

/// S-polynomial of two nonzero polynomials.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let (fm, fc) = leading_term(f).unwrap();
    let (gm, gc) = leading_term(g).unwrap();
    let l = fm.lcm(&gm);
    let a = fm.quotient_of(&l).unwrap();
    let b = gm.quotient_of(&l).unwrap();
    &f.mul_term(&a, &fc.inv().unwrap()) - &g.mul_term(&b, &gc.inv().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonomialOrder {
    #[serde(rename = "grevlex")]
    GradedReverseLex,
}

/// Reduced Gröbner basis: monic generators sorted by ascending leading
/// monomial, no leading monomial divides another, tails fully reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct GroebnerBasis {
    n: usize,
    generators: Vec<Polynomial>,
    order: MonomialOrder,
}

impl GroebnerBasis {
    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn leading_monomials(&self) -> Vec<MultiIndex> {
        self.generators.iter().map(leading_monomial).collect()
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        if self.generators.is_empty() {
            return p.clone();
        }
        reduce(p, &self.generators)
    }

    /// The unit ideal: the quotient ring is zero.
    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(Polynomial::is_constant)
    }
}

/// Buchberger's algorithm with the coprime-leading-monomial criterion,
/// followed by inter-reduction. Zero generators are ignored.
pub fn buchberger(gens: &[Polynomial]) -> GroebnerBasis {
    assert!(!gens.is_empty(), "buchberger needs at least one generator");
    let n = gens[0].dim();
    let mut basis: Vec<Polynomial> = Vec::new();
    for g in gens {
        assert_eq!(g.dim(), n, "generator dimension");
        if !g.is_zero() {
            basis.push(make_monic(g));
        }
    }
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.insert((i, j));
        }
    }
    while let Some(&(i, j)) = pairs.iter().next() {
        pairs.remove(&(i, j));
        let lm_i = leading_monomial(&basis[i]);
        let lm_j = leading_monomial(&basis[j]);
        let coprime = lm_i.exponents().iter().zip(lm_j.exponents()).all(|(a, b)| *a == 0 || *b == 0);
        if coprime {
            continue;
        }
        let r = reduce(&s_polynomial(&basis[i], &basis[j]), &basis);
        if !r.is_zero() {
            let k = basis.len();
            basis.push(make_monic(&r));
            for i in 0..k {
                pairs.insert((i, k));
            }
        }
    }
    GroebnerBasis { n, generators: interreduce(basis), order: MonomialOrder::GradedReverseLex }
}

fn interreduce(basis: Vec<Polynomial>) -> Vec<Polynomial> {
    // drop generators whose leading monomial is divisible by another's
    let leads: Vec<MultiIndex> = basis.iter().map(leading_monomial).collect();
    let mut keep: Vec<Polynomial> = Vec::new();
    for (k, p) in basis.iter().enumerate() {
        let redundant = leads.iter().enumerate().any(|(m, lm)| {
            m != k && lm.divides(&leads[k]) && (lm != &leads[k] || m < k)
        });
        if !redundant {
            keep.push(p.clone());
        }
    }
    let mut reduced: Vec<Polynomial> = Vec::with_capacity(keep.len());
    for k in 0..keep.len() {
        let others: Vec<Polynomial> =
            keep.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, p)| p.clone()).collect();
        let r = if others.is_empty() { keep[k].clone() } else { reduce(&keep[k], &others) };
        reduced.push(make_monic(&r));
    }
    reduced.sort_by(|a, b| grevlex_cmp(&leading_monomial(a), &leading_monomial(b)));
    reduced
}

/// Standard monomials of a zero-dimensional ideal, ascending graded-lex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientBasis {
    pub monomials: Vec<MultiIndex>,
}

impl QuotientBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

pub fn standard_monomials(basis: &GroebnerBasis) -> Result<QuotientBasis, OracleError> {
    let n = basis.dim();
    if basis.is_unit() {
        return Ok(QuotientBasis { monomials: Vec::new() });
    }
    let leads = basis.leading_monomials();
    // zero-dimensional iff every variable has a pure power among the leads
    let mut bounds = Vec::with_capacity(n);
    for axis in 0..n {
        let pure = leads
            .iter()
            .filter(|m| m.exponents().iter().enumerate().all(|(k, &e)| k == axis || e == 0))
            .map(|m| m.exponents()[axis])
            .min();
        match pure {
            Some(e) => bounds.push(e),
            None => return Err(OracleError::NotZeroDimensional),
        }
    }
    let mut monomials = Vec::new();
    let mut current = vec![0u32; n];
    loop {
        let m = MultiIndex(current.clone());
        if !leads.iter().any(|l| l.divides(&m)) {
            monomials.push(m);
        }
        // odometer over the box Π [0, bounds_k)
        let mut axis = 0;
        loop {
            if axis == n {
                monomials.sort();
                return Ok(QuotientBasis { monomials });
            }
            current[axis] += 1;
            if current[axis] < bounds[axis] {
                break;
            }
            current[axis] = 0;
            axis += 1;
        }
    }
}

/// Dense square matrix with exact Q(i) entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix {
    size: usize,
    entries: Vec<GaussianRational>,
}

impl ExactMatrix {
    pub fn zeros(size: usize) -> Self {
        Self { size, entries: vec![GaussianRational::zero(); size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> &GaussianRational {
        &self.entries[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: GaussianRational) {
        self.entries[row * self.size + col] = value;
    }

    pub fn mul(&self, other: &ExactMatrix) -> ExactMatrix {
        let s = self.size;
        let mut out = ExactMatrix::zeros(s);
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..s {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GaussianRational::is_zero)
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j).to_complex64())
    }

    fn linear_combination(mats: &[ExactMatrix], coeffs: &[GaussianRational]) -> ExactMatrix {
        let s = mats[0].size;
        let mut out = ExactMatrix::zeros(s);
        for (m, c) in mats.iter().zip(coeffs) {
            for (o, e) in out.entries.iter_mut().zip(&m.entries) {
                if !e.is_zero() {
                    *o = &*o + &(e * c);
                }
            }
        }
        out
    }
}

/// Multiplication-by-z_i matrices on the quotient basis. Column j holds the
/// normal form of z_i · b_j expressed in the basis.
pub fn multiplication_matrices(basis: &GroebnerBasis, quotient: &QuotientBasis) -> Vec<ExactMatrix> {
    let n = basis.dim();
    let size = quotient.len();
    (0..n)
        .map(|axis| {
            let mut m = ExactMatrix::zeros(size);
            for (col, b) in quotient.monomials.iter().enumerate() {
                let shifted = Polynomial::monomial(n, b.add(&MultiIndex::unit(n, axis)), GaussianRational::one());
                let nf = basis.normal_form(&shifted);
                for (mono, c) in nf.terms() {
                    let row = quotient
                        .monomials
                        .binary_search(mono)
                        .expect("normal form outside the standard monomials");
                    m.set(row, col, c.clone());
                }
            }
            m
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCluster {
    /// Coordinates as (re, im) pairs.
    #[serde(serialize_with = "serialize_point")]
    pub location: Vec<Complex64>,
    pub multiplicity: usize,
    /// max_i |f_i(location)|
    pub residual: f64,
}

fn serialize_point<S: serde::Serializer>(point: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(point.len()))?;
    for c in point {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateOptions {
    /// Relative cluster tolerance; absolute tolerance is this times the
    /// spectral radius of the combination (or 1 when that is zero).
    pub tol_cluster: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self { tol_cluster: 1e-8, seed: crate::DEFAULT_SEED, max_attempts: 5 }
    }
}

/// Locate the common zeros of `gens` with multiplicities from the
/// multiplication matrices of their (zero-dimensional) ideal.
pub fn locate_critical_points(
    mats: &[ExactMatrix],
    gens: &[Polynomial],
    options: &LocateOptions,
) -> Result<Vec<CriticalCluster>, OracleError> {
    let n = mats.len();
    let size = mats.first().map(ExactMatrix::size).unwrap_or(0);
    if size == 0 {
        return Ok(Vec::new());
    }
    let coeff_scale = gens.iter().map(Polynomial::coefficient_scale).fold(0.0, f64::max);
    let residual_bound = 1e-6 * (1.0 + coeff_scale);
    let float_mats: Vec<DMatrix<Complex64>> = mats.iter().map(ExactMatrix::to_complex).collect();

    for attempt in 0..options.max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(attempt as u64));
        let coeffs: Vec<GaussianRational> =
            (0..n).map(|_| GaussianRational::from_ratio(rng.random_range(1..=997), 997)).collect();
        let combo = ExactMatrix::linear_combination(mats, &coeffs);
        let charpoly = charpoly_hessenberg(&combo);
        let factors = squarefree_decomposition(&charpoly);

        let mut eigen: Vec<(Complex64, usize)> = Vec::new();
        for (factor, multiplicity) in &factors {
            for root in roots_of_squarefree(factor) {
                eigen.push((root, *multiplicity));
            }
        }
        let radius = eigen.iter().map(|(r, _)| r.norm()).fold(0.0, f64::max);
        let tol = options.tol_cluster * if radius > 0.0 { radius } else { 1.0 };
        let separated = eigen.iter().enumerate().all(|(a, (ra, _))| {
            eigen.iter().skip(a + 1).all(|(rb, _)| (ra - rb).norm() > 10.0 * tol)
        });
        if !separated {
            continue;
        }

        let float_combo = combo.to_complex();
        let mut clusters = Vec::with_capacity(eigen.len());
        let mut ok = true;
        for (lambda, multiplicity) in eigen {
            let q = invariant_subspace(&float_combo, lambda, multiplicity);
            let location: Vec<Complex64> = float_mats
                .iter()
                .map(|m| (q.adjoint() * m * &q).trace() / multiplicity as f64)
                .collect();
            let residual = gens.iter().map(|g| g.evaluate(&location).norm()).fold(0.0, f64::max);
            if residual >= residual_bound {
                ok = false;
                break;
            }
            clusters.push(CriticalCluster { location, multiplicity, residual });
        }
        if ok {
            clusters.sort_by(|a, b| cmp_points(&a.location, &b.location));
            return Ok(clusters);
        }
    }
    Err(OracleError::ClusterAmbiguity { attempts: options.max_attempts })
}

fn cmp_points(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Orthonormal basis of ker (A − λ)^m from the m smallest right singular vectors.
fn invariant_subspace(a: &DMatrix<Complex64>, lambda: Complex64, m: usize) -> DMatrix<Complex64> {
    let size = a.nrows();
    let shifted = a - DMatrix::<Complex64>::identity(size, size) * lambda;
    let mut power = DMatrix::<Complex64>::identity(size, size);
    for _ in 0..m {
        power = &power * &shifted;
    }
    let svd = power.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    // singular values are sorted in descending order
    let rows = v_t.rows(size - m, m);
    rows.adjoint()
}

type UniPoly = Vec<GaussianRational>;

fn trim(mut p: UniPoly) -> UniPoly {
    while p.last().is_some_and(GaussianRational::is_zero) {
        p.pop();
    }
    p
}

fn monic(p: UniPoly) -> UniPoly {
    let p = trim(p);
    match p.last() {
        Some(lead) => {
            let inv = lead.inv().unwrap();
            p.iter().map(|c| c * &inv).collect()
        }
        None => p,
    }
}

fn derivative(p: &UniPoly) -> UniPoly {
    trim(p.iter().enumerate().skip(1).map(|(k, c)| c * &GaussianRational::from_integer(k as i64)).collect())
}

fn sub_poly(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let len = a.len().max(b.len());
    let zero = GaussianRational::zero();
    trim((0..len).map(|k| a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).collect())
}

/// Quotient and remainder of a / b, b nonzero.
fn divmod(a: &UniPoly, b: &UniPoly) -> (UniPoly, UniPoly) {
    let b = trim(b.clone());
    let mut rem = trim(a.clone());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead_inv = b.last().unwrap().inv().unwrap();
    let mut quot = vec![GaussianRational::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let factor = rem.last().unwrap() * &lead_inv;
        for (k, c) in b.iter().enumerate() {
            rem[shift + k] = &rem[shift + k] - &(c * &factor);
        }
        quot[shift] = factor;
        rem.pop();
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut x = monic(a.clone());
    let mut y = monic(b.clone());
    while !y.is_empty() {
        let (_, r) = divmod(&x, &y);
        x = y;
        y = monic(r);
    }
    monic(x)
}

/// Characteristic polynomial det(x − A), coefficients ascending, via exact
/// reduction to upper Hessenberg form.
fn charpoly_hessenberg(a: &ExactMatrix) -> UniPoly {
    let s = a.size();
    let mut h: Vec<Vec<GaussianRational>> =
        (0..s).map(|i| (0..s).map(|j| a.get(i, j).clone()).collect()).collect();
    for k in 0..s.saturating_sub(2) {
        let Some(pivot) = (k + 1..s).find(|&i| !h[i][k].is_zero()) else {
            continue;
        };
        if pivot != k + 1 {
            h.swap(pivot, k + 1);
            for row in h.iter_mut() {
                row.swap(pivot, k + 1);
            }
        }
        let inv = h[k + 1][k].inv().unwrap();
        for j in k + 2..s {
            if h[j][k].is_zero() {
                continue;
            }
            let u = &h[j][k] * &inv;
            for c in 0..s {
                let v = &h[j][c] - &(&u * &h[k + 1][c]);
                h[j][c] = v;
            }
            for row in h.iter_mut() {
                let v = &row[k + 1] + &(&u * &row[j]);
                row[k + 1] = v;
            }
        }
    }
    // p_m = (x − h_mm) p_{m−1} − Σ_{i=1}^{m−1} h_{m−i,m} Π_{j=m−i+1}^{m} h_{j,j−1} p_{m−i−1}
    let mut p: Vec<UniPoly> = vec![vec![GaussianRational::one()]];
    for m in 1..=s {
        let hm = |r: usize, c: usize| &h[r - 1][c - 1];
        let prev = &p[m - 1];
        let mut next = vec![GaussianRational::zero(); m + 1];
        for (k, c) in prev.iter().enumerate() {
            next[k + 1] = &next[k + 1] + c;
            next[k] = &next[k] - &(c * hm(m, m));
        }
        let mut prod = GaussianRational::one();
        for i in 1..m {
            prod = &prod * hm(m - i + 1, m - i);
            if prod.is_zero() {
                break;
            }
            let coeff = hm(m - i, m) * &prod;
            for (k, c) in p[m - i - 1].iter().enumerate() {
                next[k] = &next[k] - &(c * &coeff);
            }
        }
        p.push(next);
    }
    trim(p.pop().unwrap())
}

/// Yun's algorithm: monic square-free factors with their multiplicities.
fn squarefree_decomposition(p: &UniPoly) -> Vec<(UniPoly, usize)> {
    let f = monic(p.clone());
    if f.len() <= 1 {
        return Vec::new();
    }
    let df = derivative(&f);
    let a0 = gcd(&f, &df);
    let mut b = divmod(&f, &a0).0;
    let c = divmod(&df, &a0).0;
    let mut d = sub_poly(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut k = 1;
    while b.len() > 1 {
        let a = gcd(&b, &d);
        let b_next = divmod(&b, &a).0;
        let c_next = divmod(&d, &a).0;
        d = sub_poly(&c_next, &derivative(&b_next));
        if a.len() > 1 {
            out.push((a, k));
        }
        b = b_next;
        k += 1;
    }
    out
}

/// Roots of a square-free polynomial: Aberth–Ehrlich iteration then Newton
/// polishing in binary64.
fn roots_of_squarefree(p: &UniPoly) -> Vec<Complex64> {
    let coeffs: Vec<Complex64> = p.iter().map(GaussianRational::to_complex64).collect();
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic_c: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return vec![-monic_c[0]];
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for c in monic_c.iter().rev() {
            dv = dv * z + v;
            v = v * z + c;
        }
        (v, dv)
    };
    // Fujiwara-type bound for the initial circle
    let bound = (0..deg)
        .map(|k| monic_c[k].norm().powf(1.0 / (deg - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..deg {
            let (v, dv) = eval(z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-15 * bound {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = eval(*root);
            if dv.norm() == 0.0 {
                break;
            }
            *root -= v / dv;
        }
    }
    z
}

#[derive(Debug, Clone, Serialize)]
pub struct MilnorResult {
    pub mu_global: usize,
    pub clusters: Vec<CriticalCluster>,
    pub mu_in_domain: usize,
    pub boundary_margin: f64,
    pub seed: u64,
}

/// Everything the oracle derives from the gradient ideal of `f`.
pub struct JacobianRing {
    pub basis: GroebnerBasis,
    pub quotient: QuotientBasis,
    pub matrices: Vec<ExactMatrix>,
}

pub fn jacobian_ring(f: &Polynomial) -> Result<JacobianRing, OracleError> {
    let basis = buchberger(&f.gradient());
    let quotient = standard_monomials(&basis)?;
    let matrices = multiplication_matrices(&basis, &quotient);
    Ok(JacobianRing { basis, quotient, matrices })
}

/// Global Milnor number dim Jac(f) = dim C[z]/(∂f).
pub fn milnor_global(f: &Polynomial) -> Result<usize, OracleError> {
    Ok(jacobian_ring(f)?.quotient.len())
}

/// Count critical points of `f` strictly inside `domain` by more than
/// `margin`, with multiplicity.
pub fn milnor_in_domain(
    f: &Polynomial,
    domain: &DomainSpec,
    margin: f64,
    options: &LocateOptions,
) -> Result<MilnorResult, OracleError> {
    if !(margin > 0.0) {
        return Err(OracleError::InvalidMargin);
    }
    let ring = jacobian_ring(f)?;
    let clusters = locate_critical_points(&ring.matrices, &f.gradient(), options)?;
    let mut mu_in_domain = 0;
    for c in &clusters {
        let dist = domain.boundary_margin(&c.location);
        if dist.abs() <= margin {
            return Err(OracleError::CriticalPointNearBoundary {
                location: c.location.iter().map(|z| [z.re, z.im]).collect(),
                distance: dist,
                margin,
            });
        }
        if dist > margin {
            mu_in_domain += c.multiplicity;
        }
    }
    Ok(MilnorResult {
        mu_global: ring.quotient.len(),
        clusters,
        mu_in_domain,
        boundary_margin: margin,
        seed: options.seed,
    })
}

/// Default boundary margin: 1e-6 times the domain scale.
pub fn default_margin(domain: &DomainSpec) -> f64 {
    1e-6 * domain.scale()
}

/// Smallest |∇f| found on ∂D: quasi-uniform sampling, then projected
/// gradient descent on |∇f|² from the best samples. The result is an upper
/// bound on the true minimum.
pub fn boundary_gradient_min(
    f: &Polynomial,
    domain: &DomainSpec,
    samples: usize,
    refine_steps: usize,
    seed: u64,
) -> f64 {
    assert!(samples >= 100, "at least 100 boundary samples are required");
    let n = f.dim();
    let grad = f.gradient();
    let hess: Vec<Vec<Polynomial>> = grad.iter().map(Polynomial::gradient).collect();
    let objective = |z: &[Complex64]| grad.iter().map(|g| g.evaluate(z).norm_sqr()).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut points: Vec<(f64, Vec<Complex64>, usize)> = (0..samples)
        .map(|k| {
            let (z, face) = boundary_sample(domain, k, samples, &mut rng);
            (objective(&z), z, face)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = points[0].0;

    for (value, start, face) in points.into_iter().take(8) {
        let mut z = start;
        let mut current = value;
        let mut step = 0.1 * domain.scale();
        for _ in 0..refine_steps {
            // ∂_x g + i ∂_y g = 2 Σ_k f_k conj(∂_{z_i} f_k)
            let vals: Vec<Complex64> = grad.iter().map(|g| g.evaluate(&z)).collect();
            let direction: Vec<Complex64> = (0..n)
                .map(|i| 2.0 * (0..n).map(|k| vals[k] * hess[k][i].evaluate(&z).conj()).sum::<Complex64>())
                .collect();
            let dnorm = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if dnorm == 0.0 {
                break;
            }
            let mut improved = false;
            while step > 1e-14 * domain.scale() {
                let trial: Vec<Complex64> =
                    z.iter().zip(&direction).map(|(zi, di)| zi - di * (step / dnorm)).collect();
                let trial = project_to_boundary(domain, trial, face);
                let v = objective(&trial);
                if v < current {
                    z = trial;
                    current = v;
                    step *= 1.5;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.min(current);
    }
    best.sqrt()
}

fn boundary_sample(domain: &DomainSpec, k: usize, total: usize, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, usize) {
    let n = domain.dim();
    let tau = 2.0 * std::f64::consts::PI;
    if n == 1 {
        let theta = tau * k as f64 / total as f64;
        return (vec![Complex64::from_polar(domain.scale(), theta)], 0);
    }
    match domain.kind() {
        DomainKind::Ball => {
            let mut v: Vec<f64> = (0..2 * n).map(|_| standard_normal(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = domain.radii()[0];
            v.iter_mut().for_each(|x| *x *= r / norm);
            ((0..n).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect(), 0)
        }
        DomainKind::Polydisk => {
            let face = k % n;
            let z = (0..n)
                .map(|i| {
                    let r = domain.radii()[i];
                    let theta = tau * rng.random::<f64>();
                    if i == face {
                        Complex64::from_polar(r, theta)
                    } else {
                        Complex64::from_polar(r * rng.random::<f64>().sqrt(), theta)
                    }
                })
                .collect();
            (z, face)
        }
    }
}

fn project_to_boundary(domain: &DomainSpec, mut z: Vec<Complex64>, face: usize) -> Vec<Complex64> {
    match domain.kind() {
        DomainKind::Ball => {
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let r = domain.radii()[0];
            if norm > 0.0 {
                z.iter_mut().for_each(|c| *c *= r / norm);
            }
            z
        }
        DomainKind::Polydisk => {
            for (i, c) in z.iter_mut().enumerate() {
                let r = domain.radii()[i];
                let m = c.norm();
                if i == face {
                    *c = if m > 0.0 { *c * (r / m) } else { Complex64::new(r, 0.0) };
                } else if m > r {
                    *c *= r / m;
                }
            }
            z
        }
    }
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
