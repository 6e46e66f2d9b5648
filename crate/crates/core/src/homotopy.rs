//! Fiberwise exterior algebra on C^n and pointwise checks of the twisted
//! Cauchy–Riemann identities.
//!
//! A form at a point is a vector of 4^n coefficients of dz_S ∧ dz̄_T, with
//! S and T stored as bitmasks and the component index S | (T << n). The
//! fiber metric makes these monomials orthonormal, so contraction (dz_j∧)*
//! is the transpose of wedging.
//!
//! Operators built here, with f_i = ∂f/∂z_i and |∇f|² = Σ|f_i|²:
//!
//!   ∂̄_f = ∂̄ + Σ f_j dz_j∧          ϑ_f = ϑ + Σ f̄_j (dz_j∧)*
//!   ϑ   = −Σ (dz̄_i∧)* ∂_{z_i}       V_f = Σ f̄_i/|∇f|² (dz_i∧)*
//!   T_ρ = ρ + (∂̄ρ)∧ V_f (1 + [∂̄,V_f])⁻¹
//!   R_ρ = (1 − ρ) V_f (1 + [∂̄,V_f])⁻¹
//!
//! Derivatives of fields use central differences with one Richardson step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bergman::{DomainKind, DomainSpec};
use crate::koszul::wedge_sign;
use crate::oracle::{self, LocateOptions, OracleError};
use crate::poly::Polynomial;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomotopyError {
    #[error("|∇f|² = {0:e} is below 1e-30 where V_f is needed")]
    SingularPoint(f64),
    #[error("operator is not nilpotent (‖A^(n+1)‖ = {0:e})")]
    NotNilpotent(f64),
    #[error("bump radii must satisfy 0 < r1 < r2 (got {0}, {1})")]
    InvalidBump(f64, f64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// dz_j
    Holomorphic,
    /// dz̄_j
    Antiholomorphic,
}

pub fn component_index(n: usize, s: u32, t: u32) -> usize {
    (s | (t << n)) as usize
}

fn split_index(n: usize, k: usize) -> (u32, u32) {
    let mask = (1u32 << n) - 1;
    (k as u32 & mask, (k as u32 >> n) & mask)
}

/// Coefficients of a form at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForm {
    n: usize,
    coeffs: DVector<Complex64>,
}

impl PointForm {
    pub fn zeros(n: usize) -> Self {
        Self { n, coeffs: DVector::zeros(1 << (2 * n)) }
    }

    pub fn from_coeffs(n: usize, coeffs: DVector<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 1 << (2 * n), "a form on C^{n} has 4^{n} components");
        Self { n, coeffs }
    }

    /// The monomial dz_S ∧ dz̄_T.
    pub fn basis(n: usize, s: u32, t: u32) -> Self {
        let mut out = Self::zeros(n);
        out.set(s, t, Complex64::new(1.0, 0.0));
        out
    }

    pub fn one(n: usize) -> Self {
        Self::basis(n, 0, 0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, s: u32, t: u32) -> Complex64 {
        self.coeffs[component_index(self.n, s, t)]
    }

    pub fn set(&mut self, s: u32, t: u32, value: Complex64) {
        self.coeffs[component_index(self.n, s, t)] = value;
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<Complex64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

fn wedge_coeffs(n: usize, j: usize, kind: Kind, v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::zeros(v.len());
    for (k, &c) in v.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let (s, t) = split_index(n, k);
        match kind {
            Kind::Holomorphic if s & (1 << j) == 0 => {
                out[component_index(n, s | (1 << j), t)] += c * wedge_sign(j, s);
            }
            Kind::Antiholomorphic if t & (1 << j) == 0 => {
                let sign = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                out[component_index(n, s, t | (1 << j))] += c * (sign * wedge_sign(j, t));
            }
            _ => {}
        }
    }
    out
}

fn contract_coeffs(n: usize, j: usize, kind: Kind, v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::zeros(v.len());
    for (k, &c) in v.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let (s, t) = split_index(n, k);
        match kind {
            Kind::Holomorphic if s & (1 << j) != 0 => {
                let rest = s & !(1 << j);
                out[component_index(n, rest, t)] += c * wedge_sign(j, rest);
            }
            Kind::Antiholomorphic if t & (1 << j) != 0 => {
                let rest = t & !(1 << j);
                let sign = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                out[component_index(n, s, rest)] += c * (sign * wedge_sign(j, rest));
            }
            _ => {}
        }
    }
    out
}

/// Left exterior multiplication by dz_j or dz̄_j (axis j is 0-based).
pub fn wedge(j: usize, kind: Kind, phi: &PointForm) -> PointForm {
    PointForm { n: phi.n, coeffs: wedge_coeffs(phi.n, j, kind, &phi.coeffs) }
}

/// Adjoint of [`wedge`] under the fiber metric.
pub fn contract(j: usize, kind: Kind, phi: &PointForm) -> PointForm {
    PointForm { n: phi.n, coeffs: contract_coeffs(phi.n, j, kind, &phi.coeffs) }
}

/// Matrices of dz_j∧ and dz̄_j∧ on the 4^n-dimensional fiber.
#[derive(Debug, Clone)]
pub struct FiberAlgebra {
    n: usize,
    dz: Vec<DMatrix<Complex64>>,
    dzbar: Vec<DMatrix<Complex64>>,
}

impl FiberAlgebra {
    pub fn new(n: usize) -> Self {
        let size = 1 << (2 * n);
        let build = |j: usize, kind: Kind| {
            let mut m = DMatrix::zeros(size, size);
            for k in 0..size {
                let mut e = DVector::zeros(size);
                e[k] = Complex64::new(1.0, 0.0);
                m.set_column(k, &wedge_coeffs(n, j, kind, &e));
            }
            m
        };
        Self {
            n,
            dz: (0..n).map(|j| build(j, Kind::Holomorphic)).collect(),
            dzbar: (0..n).map(|j| build(j, Kind::Antiholomorphic)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn identity(&self) -> DMatrix<Complex64> {
        DMatrix::identity(self.size(), self.size())
    }

    pub fn wedge(&self, j: usize, kind: Kind) -> &DMatrix<Complex64> {
        match kind {
            Kind::Holomorphic => &self.dz[j],
            Kind::Antiholomorphic => &self.dzbar[j],
        }
    }

    pub fn contraction(&self, j: usize, kind: Kind) -> DMatrix<Complex64> {
        self.wedge(j, kind).adjoint()
    }
}

/// Graded commutator [A, B] = AB − (−1)^{|A||B|} BA.
pub fn super_bracket(a: &DMatrix<Complex64>, a_odd: bool, b: &DMatrix<Complex64>, b_odd: bool) -> DMatrix<Complex64> {
    if a_odd && b_odd {
        a * b + b * a
    } else {
        a * b - b * a
    }
}

/// Σ_{k=0}^{n} (−A)^k, the inverse of 1 + A for A with A^{n+1} = 0.
pub fn neumann_inverse(a: &DMatrix<Complex64>, n: usize) -> Result<DMatrix<Complex64>, HomotopyError> {
    let size = a.nrows();
    let mut term = DMatrix::identity(size, size);
    let mut sum = term.clone();
    for _ in 0..n {
        term = -(&term * a);
        sum += &term;
    }
    let top = (&term * a).norm();
    let scale = a.norm().powi(n as i32 + 1).max(1.0);
    if top > 1e-12 * scale {
        return Err(HomotopyError::NotNilpotent(top));
    }
    Ok(sum)
}

/// Which form of the zeroth-order term L_f to use in the Δ_f expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LfConvention {
    /// Σ f_ij dz_i∧(dz̄_j∧)* + conj(f_ij) dz̄_i∧(dz_j∧)*
    SelfAdjoint,
    /// Σ f_ij (dz̄_j∧)* dz_i∧ + conj(f_ij) dz̄_i∧(dz_j∧)*
    AsWritten,
}

/// A polynomial f with its gradient and Hessian, and the pointwise
/// operators built from them.
#[derive(Debug, Clone)]
pub struct Twist {
    f: Polynomial,
    grad: Vec<Polynomial>,
    hess: Vec<Vec<Polynomial>>,
    algebra: FiberAlgebra,
}

impl Twist {
    pub fn new(f: &Polynomial) -> Self {
        let grad = f.gradient();
        let hess = grad.iter().map(Polynomial::gradient).collect();
        Self { f: f.clone(), grad, hess, algebra: FiberAlgebra::new(f.dim()) }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn algebra(&self) -> &FiberAlgebra {
        &self.algebra
    }

    pub fn gradient_at(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.grad.iter().map(|g| g.evaluate(z)).collect()
    }

    pub fn hessian_at(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j].evaluate(z))
    }

    pub fn grad_norm_sq(&self, z: &[Complex64]) -> f64 {
        self.gradient_at(z).iter().map(|c| c.norm_sqr()).sum()
    }

    /// ∂f∧ = Σ f_j dz_j∧
    pub fn df_wedge(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let g = self.gradient_at(z);
        let mut out = DMatrix::zeros(self.algebra.size(), self.algebra.size());
        for (j, gj) in g.iter().enumerate() {
            out += self.algebra.wedge(j, Kind::Holomorphic) * *gj;
        }
        out
    }

    /// (∂f∧)* = Σ f̄_j (dz_j∧)*
    pub fn df_contract(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        self.df_wedge(z).adjoint()
    }

    fn checked_grad(&self, z: &[Complex64]) -> Result<(Vec<Complex64>, f64), HomotopyError> {
        let g = self.gradient_at(z);
        let g2: f64 = g.iter().map(|c| c.norm_sqr()).sum();
        if !(g2 >= 1e-30) {
            return Err(HomotopyError::SingularPoint(g2));
        }
        Ok((g, g2))
    }

    pub fn v_f(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>, HomotopyError> {
        let (_, g2) = self.checked_grad(z)?;
        Ok(self.df_contract(z) / Complex64::new(g2, 0.0))
    }

    /// [∂̄, V_f] = Σ_ij ∂_{z̄_i}(f̄_j/|∇f|²) dz̄_i∧(dz_j∧)*, in closed form.
    pub fn dbar_v_f(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>, HomotopyError> {
        let (g, g2) = self.checked_grad(z)?;
        let h = self.hessian_at(z);
        let n = self.dim();
        let size = self.algebra.size();
        let mut out = DMatrix::zeros(size, size);
        for i in 0..n {
            let cross: Complex64 = (0..n).map(|k| g[k] * h[(i, k)].conj()).sum();
            for j in 0..n {
                let c = h[(i, j)].conj() / g2 - g[j].conj() * cross / (g2 * g2);
                if c != ZERO {
                    out += self.algebra.wedge(i, Kind::Antiholomorphic)
                        * self.algebra.contraction(j, Kind::Holomorphic)
                        * c;
                }
            }
        }
        Ok(out)
    }

    pub fn l_f(&self, z: &[Complex64], convention: LfConvention) -> DMatrix<Complex64> {
        let h = self.hessian_at(z);
        let n = self.dim();
        let alg = &self.algebra;
        let mut out = DMatrix::zeros(alg.size(), alg.size());
        for i in 0..n {
            for j in 0..n {
                let hol = match convention {
                    LfConvention::SelfAdjoint => {
                        alg.wedge(i, Kind::Holomorphic) * alg.contraction(j, Kind::Antiholomorphic)
                    }
                    LfConvention::AsWritten => {
                        alg.contraction(j, Kind::Antiholomorphic) * alg.wedge(i, Kind::Holomorphic)
                    }
                };
                let anti = alg.wedge(i, Kind::Antiholomorphic) * alg.contraction(j, Kind::Holomorphic);
                out += hol * h[(i, j)] + anti * h[(i, j)].conj();
            }
        }
        out
    }

    /// T_ρ and R_ρ as fiber operators at z.
    pub fn cutoff_operators(
        &self,
        rho: &BumpFunction,
        z: &[Complex64],
    ) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), HomotopyError> {
        let value = rho.value(z);
        let size = self.algebra.size();
        if value == 1.0 {
            return Ok((self.algebra.identity(), DMatrix::zeros(size, size)));
        }
        let resolvent = self.v_f(z)? * neumann_inverse(&self.dbar_v_f(z)?, self.dim())?;
        let mut drho = DMatrix::zeros(size, size);
        for (i, c) in rho.dbar(z).iter().enumerate() {
            drho += self.algebra.wedge(i, Kind::Antiholomorphic) * *c;
        }
        let t = self.algebra.identity() * Complex64::new(value, 0.0) + drho * &resolvent;
        let r = resolvent * Complex64::new(1.0 - value, 0.0);
        Ok((t, r))
    }
}

/// V_f φ at z.
pub fn v_f_apply(f: &Polynomial, z: &[Complex64], phi: &PointForm) -> Result<PointForm, HomotopyError> {
    let v = Twist::new(f).v_f(z)?;
    Ok(PointForm::from_coeffs(phi.n, v * &phi.coeffs))
}

/// ‖(df∧)V_fφ + V_f(df∧)φ − φ‖.
pub fn check_df_wedge_vf(f: &Polynomial, z: &[Complex64], phi: &PointForm) -> Result<f64, HomotopyError> {
    check_df_wedge_vf_with(&Twist::new(f), z, phi)
}

pub fn check_df_wedge_vf_with(twist: &Twist, z: &[Complex64], phi: &PointForm) -> Result<f64, HomotopyError> {
    let v = twist.v_f(z)?;
    let d = twist.df_wedge(z);
    let x = &phi.coeffs;
    Ok((&d * (&v * x) + &v * (&d * x) - x).norm())
}

/// [∂̄, V_f] at z as a fiber operator.
pub fn dbar_commutator_vf(f: &Polynomial, z: &[Complex64]) -> Result<DMatrix<Complex64>, HomotopyError> {
    Twist::new(f).dbar_v_f(z)
}

/// (T_ρφ(z), R_ρφ(z)).
pub fn t_rho_r_rho_apply(
    twist: &Twist,
    rho: &BumpFunction,
    z: &[Complex64],
    phi: &dyn FormField,
) -> Result<(PointForm, PointForm), HomotopyError> {
    let (t, r) = twist.cutoff_operators(rho, z)?;
    let x = phi.eval(z);
    let n = twist.dim();
    Ok((PointForm::from_coeffs(n, &t * &x), PointForm::from_coeffs(n, r * x)))
}

/// Radial cutoff: 1 on |z − center| ≤ r1, 0 beyond r2, joined by
/// χ(t) = σ(1−t)/(σ(1−t)+σ(t)) with σ(t) = exp(−1/t).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpFunction {
    #[serde(skip)]
    center: Vec<Complex64>,
    pub r1: f64,
    pub r2: f64,
}

fn sigma(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn sigma_prime(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        sigma(t) / (t * t)
    }
}

pub fn bridge(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let (a, b) = (sigma(1.0 - t), sigma(t));
        a / (a + b)
    }
}

pub fn bridge_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (sigma(1.0 - t), sigma(t));
    let (da, db) = (-sigma_prime(1.0 - t), sigma_prime(t));
    (da * b - a * db) / ((a + b) * (a + b))
}

impl BumpFunction {
    pub fn new(center: Vec<Complex64>, r1: f64, r2: f64) -> Result<Self, HomotopyError> {
        if !(r1 > 0.0 && r2 > r1) {
            return Err(HomotopyError::InvalidBump(r1, r2));
        }
        Ok(Self { center, r1, r2 })
    }

    pub fn centered(n: usize, r1: f64, r2: f64) -> Result<Self, HomotopyError> {
        Self::new(vec![ZERO; n], r1, r2)
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn distance(&self, z: &[Complex64]) -> f64 {
        z.iter().zip(&self.center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    fn parameter(&self, z: &[Complex64]) -> f64 {
        (self.distance(z) - self.r1) / (self.r2 - self.r1)
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        bridge(self.parameter(z))
    }

    /// Coefficients of ∂̄ρ = Σ ∂_{z̄_i}ρ dz̄_i.
    pub fn dbar(&self, z: &[Complex64]) -> Vec<Complex64> {
        let r = self.distance(z);
        let slope = bridge_derivative(self.parameter(z)) / (self.r2 - self.r1);
        if slope == 0.0 || r == 0.0 {
            return vec![ZERO; z.len()];
        }
        // ∂_{z̄_i}|z − c| = (z_i − c_i)/(2|z − c|)
        z.iter().zip(&self.center).map(|(a, b)| (a - b) * (slope / (2.0 * r))).collect()
    }
}

/// A form-valued function of z, returning 4^n coefficients.
pub trait FormField: Sync {
    fn eval(&self, z: &[Complex64]) -> DVector<Complex64>;
}

impl<F> FormField for F
where
    F: Fn(&[Complex64]) -> DVector<Complex64> + Sync,
{
    fn eval(&self, z: &[Complex64]) -> DVector<Complex64> {
        self(z)
    }
}

/// Σ c · z^a · z̄^b
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPolynomial {
    pub terms: Vec<(Complex64, Vec<u32>, Vec<u32>)>,
}

impl MixedPolynomial {
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, a, b)| {
                let mut v = *c;
                for (k, zk) in z.iter().enumerate() {
                    v *= zk.powu(a[k]) * zk.conj().powu(b[k]);
                }
                v
            })
            .sum()
    }
}

/// A form whose coefficients are polynomials in z and z̄.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFormField {
    n: usize,
    components: Vec<(u32, u32, MixedPolynomial)>,
}

impl PolyFormField {
    pub fn new(n: usize, components: Vec<(u32, u32, MixedPolynomial)>) -> Self {
        Self { n, components }
    }

    /// Seeded random coefficients of degree ≤ `degree` in z and z̄ on the
    /// components with |S| + |T| ≤ `max_form_degree`.
    pub fn random(n: usize, degree: u32, max_form_degree: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exps: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..2 * n {
            exps = exps
                .into_iter()
                .flat_map(|e| (0..=degree).map(move |k| [e.clone(), vec![k]].concat()))
                .filter(|e| e.iter().sum::<u32>() <= degree)
                .collect();
        }
        let mut components = Vec::new();
        for k in 0..1usize << (2 * n) {
            let (s, t) = split_index(n, k);
            if s.count_ones() + t.count_ones() > max_form_degree {
                continue;
            }
            let terms = exps
                .iter()
                .map(|e| {
                    let c = Complex64::new(oracle::standard_normal(&mut rng), oracle::standard_normal(&mut rng))
                        * (0.5 / (1.0 + e.iter().sum::<u32>() as f64));
                    (c, e[..n].to_vec(), e[n..].to_vec())
                })
                .collect();
            components.push((s, t, MixedPolynomial { terms }));
        }
        Self { n, components }
    }
}

impl PolyFormField {
    /// The components of bidegree (p, q) only.
    pub fn bidegree_part(&self, p: u32, q: u32) -> Self {
        let components = self
            .components
            .iter()
            .filter(|(s, t, _)| s.count_ones() == p && t.count_ones() == q)
            .cloned()
            .collect();
        Self { n: self.n, components }
    }
}

impl FormField for PolyFormField {
    fn eval(&self, z: &[Complex64]) -> DVector<Complex64> {
        let mut out = DVector::zeros(1 << (2 * self.n));
        for (s, t, p) in &self.components {
            out[component_index(self.n, *s, *t)] += p.evaluate(z);
        }
        out
    }
}

fn shifted(z: &[Complex64], coord: usize, delta: f64) -> Vec<Complex64> {
    let mut w = z.to_vec();
    let step = if coord % 2 == 0 { Complex64::new(delta, 0.0) } else { Complex64::new(0.0, delta) };
    w[coord / 2] += step;
    w
}

/// ∂/∂x or ∂/∂y of the field along real coordinate `coord` (2i ↦ x_i,
/// 2i+1 ↦ y_i), central differences with Richardson extrapolation.
pub fn real_partial(field: &dyn FormField, z: &[Complex64], coord: usize, h: f64) -> DVector<Complex64> {
    let central = |s: f64| (field.eval(&shifted(z, coord, s)) - field.eval(&shifted(z, coord, -s))) * re(0.5 / s);
    let coarse = central(h);
    let fine = central(h / 2.0);
    (fine * re(4.0) - coarse) * re(1.0 / 3.0)
}

fn second_partial(field: &dyn FormField, z: &[Complex64], coord: usize, h: f64) -> DVector<Complex64> {
    let center = field.eval(z);
    let second =
        |s: f64| (field.eval(&shifted(z, coord, s)) + field.eval(&shifted(z, coord, -s)) - &center * re(2.0)) * re(1.0 / (s * s));
    let coarse = second(h);
    let fine = second(h / 2.0);
    (fine * re(4.0) - coarse) * re(1.0 / 3.0)
}

pub fn d_dzbar(field: &dyn FormField, z: &[Complex64], i: usize, h: f64) -> DVector<Complex64> {
    (real_partial(field, z, 2 * i, h) + real_partial(field, z, 2 * i + 1, h) * I) * re(0.5)
}

pub fn d_dz(field: &dyn FormField, z: &[Complex64], i: usize, h: f64) -> DVector<Complex64> {
    (real_partial(field, z, 2 * i, h) - real_partial(field, z, 2 * i + 1, h) * I) * re(0.5)
}

/// ∂̄φ(z) = Σ dz̄_i ∧ ∂_{z̄_i}φ
pub fn dbar_fd(alg: &FiberAlgebra, field: &dyn FormField, z: &[Complex64], h: f64) -> DVector<Complex64> {
    let mut out = DVector::zeros(alg.size());
    for i in 0..alg.dim() {
        out += alg.wedge(i, Kind::Antiholomorphic) * d_dzbar(field, z, i, h);
    }
    out
}

/// ϑφ(z) = −Σ (dz̄_i∧)* ∂_{z_i}φ
pub fn theta_fd(alg: &FiberAlgebra, field: &dyn FormField, z: &[Complex64], h: f64) -> DVector<Complex64> {
    let mut out = DVector::zeros(alg.size());
    for i in 0..alg.dim() {
        out -= alg.contraction(i, Kind::Antiholomorphic) * d_dz(field, z, i, h);
    }
    out
}

/// Δ_∂̄φ = −Σ ∂_{z_i}∂_{z̄_i}φ = −¼ Σ (∂²_{x_i} + ∂²_{y_i})φ, by second differences.
pub fn laplacian_dbar_fd(field: &dyn FormField, z: &[Complex64], h: f64) -> DVector<Complex64> {
    let mut out = second_partial(field, z, 0, h);
    for coord in 1..2 * z.len() {
        out += second_partial(field, z, coord, h);
    }
    out * re(-0.25)
}

impl Twist {
    pub fn dbar_f_fd(&self, field: &dyn FormField, z: &[Complex64], h: f64) -> DVector<Complex64> {
        dbar_fd(&self.algebra, field, z, h) + self.df_wedge(z) * field.eval(z)
    }

    pub fn theta_f_fd(&self, field: &dyn FormField, z: &[Complex64], h: f64) -> DVector<Complex64> {
        theta_fd(&self.algebra, field, z, h) + self.df_contract(z) * field.eval(z)
    }
}

/// Result of the homotopy-lemma check over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub max_residual: f64,
    /// Points whose stencil comes within 2h of the r1 or r2 shell.
    pub stencil_near_cutoff: usize,
}

/// max over points of ‖∂̄_f R_ρφ + R_ρ∂̄_fφ − φ + T_ρφ‖.
pub fn check_homotopy_lemma(
    twist: &Twist,
    rho: &BumpFunction,
    phi: &dyn FormField,
    points: &[Vec<Complex64>],
    h: f64,
) -> Result<LemmaCheck, HomotopyError> {
    let results: Result<Vec<(f64, bool)>, HomotopyError> = points
        .par_iter()
        .map(|z| {
            let r = rho.distance(z);
            let near = (r - rho.r1).abs() < 2.0 * h || (r - rho.r2).abs() < 2.0 * h;
            let r_field = |w: &[Complex64]| match twist.cutoff_operators(rho, w) {
                Ok((_, op)) => op * phi.eval(w),
                Err(_) => DVector::from_element(twist.algebra.size(), Complex64::new(f64::NAN, 0.0)),
            };
            let (t_op, r_op) = twist.cutoff_operators(rho, z)?;
            let x = phi.eval(z);
            let lhs = twist.dbar_f_fd(&r_field, z, h) + r_op * twist.dbar_f_fd(phi, z, h) - &x + t_op * &x;
            let residual = lhs.norm();
            if !residual.is_finite() {
                return Err(HomotopyError::SingularPoint(twist.grad_norm_sq(z)));
            }
            Ok((residual, near))
        })
        .collect();
    let results = results?;
    Ok(LemmaCheck {
        max_residual: results.iter().map(|r| r.0).fold(0.0, f64::max),
        stencil_near_cutoff: results.iter().filter(|r| r.1).count(),
    })
}

/// max over points of ‖(∂̄_fϑ_f + ϑ_f∂̄_f)φ − (Δ_∂̄ + L_f + |∇f|²)φ‖.
pub fn laplacian_expansion_check(
    twist: &Twist,
    phi: &dyn FormField,
    points: &[Vec<Complex64>],
    h: f64,
    convention: LfConvention,
) -> f64 {
    points
        .par_iter()
        .map(|z| {
            let theta_field = |w: &[Complex64]| twist.theta_f_fd(phi, w, h);
            let dbar_field = |w: &[Complex64]| twist.dbar_f_fd(phi, w, h);
            let lhs = twist.dbar_f_fd(&theta_field, z, h) + twist.theta_f_fd(&dbar_field, z, h);
            let x = phi.eval(z);
            let rhs = laplacian_dbar_fd(phi, z, h) + twist.l_f(z, convention) * &x + &x * re(twist.grad_norm_sq(z));
            (lhs - rhs).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Seeded points with |z| uniform in [r_min, r_max] and uniform direction.
pub fn sample_shell(n: usize, count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<Complex64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..2 * n).map(|_| oracle::standard_normal(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = r_min + (r_max - r_min) * rng.random::<f64>();
            (0..n).map(|i| Complex64::new(v[2 * i], v[2 * i + 1]) * (r / norm)).collect()
        })
        .collect()
}

fn sample_domain(domain: &DomainSpec, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    use rand::Rng;
    let n = domain.dim();
    match domain.kind() {
        DomainKind::Ball => {
            let v: Vec<f64> = (0..2 * n).map(|_| oracle::standard_normal(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = 0.95 * domain.radii()[0] * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
            (0..n).map(|i| Complex64::new(v[2 * i], v[2 * i + 1]) * (r / norm)).collect()
        }
        DomainKind::Polydisk => domain
            .radii()
            .iter()
            .map(|r| {
                let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                Complex64::from_polar(0.95 * r * rng.random::<f64>().sqrt(), theta)
            })
            .collect(),
    }
}

/// Bump centered at the origin with radii 0.5·s and 0.8·s (s the domain
/// scale), widened to m + 0.3(s − m), m + 0.7(s − m) when some critical
/// point in the domain has |c| = m ≥ 0.4·s.
pub fn default_bump(f: &Polynomial, domain: &DomainSpec, seed: u64) -> Result<BumpFunction, HomotopyError> {
    let n = f.dim();
    let s = domain.radii().iter().cloned().fold(f64::INFINITY, f64::min);
    let ring = oracle::jacobian_ring(f)?;
    let options = LocateOptions { seed, ..LocateOptions::default() };
    let clusters = oracle::locate_critical_points(&ring.matrices, &f.gradient(), &options)?;
    let m = clusters
        .iter()
        .filter(|c| domain.contains(&c.location))
        .map(|c| c.location.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if m >= 0.4 * s {
        BumpFunction::centered(n, m + 0.3 * (s - m), m + 0.7 * (s - m))
    } else {
        BumpFunction::centered(n, 0.5 * s, 0.8 * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyConfig {
    pub points: usize,
    /// Step for single finite differences (homotopy lemma, bracket).
    pub fd_step: f64,
    /// Step for nested finite differences (Δ_f expansion, ∂̄²).
    pub nested_step: f64,
    pub seed: u64,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self { points: 50, fd_step: 1e-5, nested_step: 1e-3, seed: crate::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, max_residual: f64, threshold: f64) -> Self {
        Self { name, max_residual, threshold, passed: max_residual < threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyReport {
    pub bump: BumpFunction,
    pub points: usize,
    pub fd_step: f64,
    pub nested_step: f64,
    pub checks: Vec<IdentityCheck>,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl HomotopyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn relative(num: f64, den: f64) -> f64 {
    num / den.max(1.0)
}

/// Run every pointwise identity at seeded points of the domain. Points are
/// kept away from Crit(f) (|∇f|² ≥ 1e-4) and from the bump shells.
pub fn homotopy_suite(
    f: &Polynomial,
    domain: &DomainSpec,
    config: &HomotopyConfig,
) -> Result<HomotopyReport, HomotopyError> {
    let n = f.dim();
    let twist = Twist::new(f);
    let rho = default_bump(f, domain, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(config.points);
    let guard = 4.0 * config.fd_step.max(config.nested_step);
    let mut attempts = 0;
    while points.len() < config.points && attempts < 100 * config.points.max(1) {
        attempts += 1;
        let z = sample_domain(domain, &mut rng);
        let r = rho.distance(&z);
        if twist.grad_norm_sq(&z) < 1e-4 || (r - rho.r1).abs() < guard || (r - rho.r2).abs() < guard {
            continue;
        }
        points.push(z);
    }
    let mut warnings = Vec::new();
    if points.len() < config.points {
        warnings.push(format!("only {} admissible sample points found", points.len()));
    }
    let phi = PolyFormField::random(n, 2, 2 * n as u32, config.seed ^ 0x9e37);
    let size = twist.algebra.size();

    let mut df_vf: f64 = 0.0;
    let mut br_df: f64 = 0.0;
    let mut br_vf: f64 = 0.0;
    let mut holo: f64 = 0.0;
    let mut neumann: f64 = 0.0;
    let mut form_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x51);
    for z in &points {
        let coeffs = DVector::from_fn(size, |_, _| {
            Complex64::new(oracle::standard_normal(&mut form_rng), oracle::standard_normal(&mut form_rng))
        });
        let form = PointForm::from_coeffs(n, coeffs);
        df_vf = df_vf.max(relative(check_df_wedge_vf_with(&twist, z, &form)?, form.norm()));
        let b = twist.dbar_v_f(z)?;
        let d = twist.df_wedge(z);
        let v = twist.v_f(z)?;
        br_df = br_df.max(relative(super_bracket(&d, true, &b, false).norm(), d.norm() * b.norm()));
        br_vf = br_vf.max(relative(super_bracket(&v, true, &b, false).norm(), v.norm() * b.norm()));
        holo = holo.max(b.norm());
        let inv = neumann_inverse(&b, n)?;
        let id = twist.algebra.identity();
        neumann = neumann.max(relative(((&id + &b) * inv - id).norm(), b.norm().powi(n as i32)));
    }

    let probe = DVector::from_fn(size, |k, _| Complex64::new(1.0 / (1.0 + k as f64), 0.0));
    let mut br_dbar: f64 = 0.0;
    for z in &points {
        let scale = twist.dbar_v_f(z)?.norm();
        let field = |w: &[Complex64]| match twist.dbar_v_f(w) {
            Ok(b) => b * &probe,
            Err(_) => DVector::from_element(size, Complex64::new(f64::NAN, 0.0)),
        };
        br_dbar = br_dbar.max(relative(dbar_fd(&twist.algebra, &field, z, config.fd_step).norm(), scale));
    }

    let lemma = check_homotopy_lemma(&twist, &rho, &phi, &points, config.fd_step)?;
    if lemma.stencil_near_cutoff > 0 {
        warnings.push(format!("{} stencils straddle a bump shell", lemma.stencil_near_cutoff));
    }
    let expansion = laplacian_expansion_check(&twist, &phi, &points, config.nested_step, LfConvention::SelfAdjoint);
    let dbar_sq = points
        .iter()
        .map(|z| {
            let inner = |w: &[Complex64]| dbar_fd(&twist.algebra, &phi, w, config.nested_step);
            dbar_fd(&twist.algebra, &inner, z, config.nested_step).norm()
        })
        .fold(0.0, f64::max);

    let mut checks = vec![
        IdentityCheck::new("df_wedge_vf", df_vf, 1e-12),
        IdentityCheck::new("bracket_df_dbar_vf", br_df, 1e-12),
        IdentityCheck::new("bracket_vf_dbar_vf", br_vf, 1e-12),
        IdentityCheck::new("bracket_dbar_dbar_vf", br_dbar, 1e-5),
        IdentityCheck::new("neumann_inverse", neumann, 1e-13),
        IdentityCheck::new("homotopy_lemma", lemma.max_residual, 1e-5),
        IdentityCheck::new("laplacian_expansion", expansion, 1e-5),
        IdentityCheck::new("dbar_squared", dbar_sq, 1e-6),
    ];
    if n == 1 {
        checks.insert(4, IdentityCheck::new("dbar_vf_vanishes", holo, 1e-12));
    }
    Ok(HomotopyReport {
        bump: rho,
        points: points.len(),
        fd_step: config.fd_step,
        nested_step: config.nested_step,
        checks,
        warnings,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(text: &str, n: usize) -> Polynomial {
        parse_polynomial(text, n).unwrap()
    }

    fn mono(coeff: Complex64, a: &[u32], b: &[u32]) -> MixedPolynomial {
        MixedPolynomial { terms: vec![(coeff, a.to_vec(), b.to_vec())] }
    }

    fn random_form(n: usize, rng: &mut ChaCha8Rng) -> PointForm {
        PointForm::from_coeffs(
            n,
            DVector::from_fn(1 << (2 * n), |_, _| c(oracle::standard_normal(rng), oracle::standard_normal(rng))),
        )
    }

    #[test]
    fn wedge_examples() {
        let one = PointForm::one(2);
        assert_eq!(wedge(0, Kind::Holomorphic, &one), PointForm::basis(2, 0b01, 0));
        let dz1 = PointForm::basis(2, 0b01, 0);
        assert_eq!(wedge(0, Kind::Holomorphic, &dz1).norm(), 0.0);
        assert_eq!(wedge(1, Kind::Holomorphic, &dz1).component(0b11, 0), c(-1.0, 0.0));
        // dz̄_1 ∧ dz_1 = −dz_1 ∧ dz̄_1
        assert_eq!(wedge(0, Kind::Antiholomorphic, &dz1).component(0b01, 0b01), c(-1.0, 0.0));
        assert_eq!(contract(0, Kind::Holomorphic, &dz1), one);
        assert_eq!(contract(0, Kind::Holomorphic, &PointForm::basis(2, 0b10, 0)).norm(), 0.0);
    }

    #[test]
    fn canonical_anticommutation_relations() {
        for n in 1..=3 {
            let alg = FiberAlgebra::new(n);
            for j in 0..n {
                for k in 0..n {
                    for (kj, kk) in [
                        (Kind::Holomorphic, Kind::Holomorphic),
                        (Kind::Antiholomorphic, Kind::Antiholomorphic),
                        (Kind::Holomorphic, Kind::Antiholomorphic),
                    ] {
                        let a = alg.wedge(j, kj);
                        let b = alg.contraction(k, kk);
                        let expect = if j == k && kj == kk { alg.identity() } else { DMatrix::zeros(alg.size(), alg.size()) };
                        assert_eq!(super_bracket(a, true, &b, true), expect, "n={n} j={j} k={k}");
                        assert_eq!(super_bracket(a, true, alg.wedge(k, kk), true).norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn v_f_examples() {
        let f = p("z^2/2", 1);
        let out = v_f_apply(&f, &[c(1.0, 0.0)], &PointForm::basis(1, 1, 0)).unwrap();
        assert_eq!(out, PointForm::one(1));
        assert_eq!(v_f_apply(&f, &[c(0.3, 0.2)], &PointForm::one(1)).unwrap().norm(), 0.0);
        assert_eq!(
            v_f_apply(&f, &[c(0.0, 0.0)], &PointForm::one(1)).unwrap_err(),
            HomotopyError::SingularPoint(0.0)
        );

        let g = p("(z1^2 + z2^2)/2", 2);
        let z = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(v_f_apply(&g, &z, &PointForm::basis(2, 0b01, 0)).unwrap(), PointForm::one(2));
        assert_eq!(v_f_apply(&g, &z, &PointForm::basis(2, 0b10, 0)).unwrap().norm(), 0.0);
    }

    #[test]
    fn df_wedge_vf_examples() {
        let f = p("z^2/2", 1);
        assert!(check_df_wedge_vf(&f, &[c(1.0, 0.0)], &PointForm::basis(1, 1, 0)).unwrap() < 1e-14);

        let g = p("(z1^3 + z2^3)/3 - z1*z2 + 2*z2", 2);
        let twist = Twist::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for z in sample_shell(2, 50, 0.1, 2.0, 4) {
            let phi = random_form(2, &mut rng);
            assert!(check_df_wedge_vf_with(&twist, &z, &phi).unwrap() < 1e-12 * phi.norm());
        }

        let h = p("z1^2*z3 + z2^3 - i*z1*z2*z3 + z3^2 - z1", 3);
        let twist = Twist::new(&h);
        let phi = PointForm::basis(3, 0b001, 0b010);
        for z in sample_shell(3, 20, 0.1, 1.5, 5) {
            assert!(check_df_wedge_vf_with(&twist, &z, &phi).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dbar_vf_examples() {
        for text in ["z^2/2", "z^3/3 - z/4", "(1 + i)*z^4 - z"] {
            let f = p(text, 1);
            for z in sample_shell(1, 20, 0.1, 2.0, 6) {
                assert!(dbar_commutator_vf(&f, &z).unwrap().norm() < 1e-12, "{text}");
            }
        }
        let g = p("(z1^2 + z2^2)/2", 2);
        let b = dbar_commutator_vf(&g, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let alg = FiberAlgebra::new(2);
        let want = alg.wedge(1, Kind::Antiholomorphic) * alg.contraction(1, Kind::Holomorphic);
        assert!((b - want).norm() < 1e-15);
    }

    #[test]
    fn dbar_vf_matches_finite_differences() {
        // ∂_{z̄_i} of the coefficient functions f̄_j/|∇f|²
        let g = p("(z1^3 + z2^3)/3 - z1*z2", 2);
        let twist = Twist::new(&g);
        let alg = FiberAlgebra::new(2);
        for z in sample_shell(2, 10, 0.5, 1.2, 7) {
            let b = twist.dbar_v_f(&z).unwrap();
            let coeff_field = |w: &[Complex64]| {
                let grad = twist.gradient_at(w);
                let g2: f64 = grad.iter().map(|x| x.norm_sqr()).sum();
                DVector::from_iterator(2, grad.iter().map(|x| x.conj() / g2))
            };
            let mut want = DMatrix::zeros(16, 16);
            for i in 0..2 {
                let d = d_dzbar(&coeff_field, &z, i, 1e-4);
                for j in 0..2 {
                    want += alg.wedge(i, Kind::Antiholomorphic) * alg.contraction(j, Kind::Holomorphic) * d[j];
                }
            }
            assert!((b - want).norm() < 1e-8);
        }
    }

    #[test]
    fn neumann_examples() {
        let alg = FiberAlgebra::new(2);
        let zero = DMatrix::zeros(16, 16);
        assert_eq!(neumann_inverse(&zero, 2).unwrap(), alg.identity());
        let g = p("(z1^2 + z2^2)/2", 2);
        let a = dbar_commutator_vf(&g, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((neumann_inverse(&a, 2).unwrap() - (alg.identity() - &a)).norm() < 1e-15);
        assert!(matches!(neumann_inverse(&alg.identity(), 2), Err(HomotopyError::NotNilpotent(_))));

        let twist = Twist::new(&p("(z1^3 + z2^3)/3 - z1*z2", 2));
        for z in sample_shell(2, 20, 0.2, 2.0, 8) {
            let a = twist.dbar_v_f(&z).unwrap();
            let inv = neumann_inverse(&a, 2).unwrap();
            assert!(((alg.identity() + &a) * inv - alg.identity()).norm() < 1e-13);
        }
    }

    #[test]
    fn bump_profile() {
        assert_eq!(bridge(-0.1), 1.0);
        assert_eq!(bridge(1.2), 0.0);
        assert!((bridge(0.5) - 0.5).abs() < 1e-15);
        for t in [0.1, 0.3, 0.7, 0.95] {
            let fd = (bridge(t + 1e-6) - bridge(t - 1e-6)) / 2e-6;
            assert!((fd - bridge_derivative(t)).abs() < 1e-6);
        }
        let rho = BumpFunction::centered(2, 0.5, 1.0).unwrap();
        let z = [c(0.4, 0.3), c(0.2, -0.35)];
        let field = |w: &[Complex64]| DVector::from_element(1, c(rho.value(w), 0.0));
        for (i, v) in rho.dbar(&z).iter().enumerate() {
            assert!((d_dzbar(&field, &z, i, 1e-5)[0] - v).norm() < 1e-9);
        }
        assert!(BumpFunction::centered(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_operator_examples() {
        let f = p("z^2/2", 1);
        let twist = Twist::new(&f);
        let rho = BumpFunction::centered(1, 0.4, 1.0).unwrap();
        let phi = PolyFormField::random(1, 2, 2, 9);

        let (t, r) = t_rho_r_rho_apply(&twist, &rho, &[c(0.1, 0.2)], &phi).unwrap();
        assert_eq!(t.into_coeffs(), phi.eval(&[c(0.1, 0.2)]));
        assert_eq!(r.norm(), 0.0);
        // at the critical point itself ρ ≡ 1 and nothing singular is needed
        assert!(t_rho_r_rho_apply(&twist, &rho, &[c(0.0, 0.0)], &phi).is_ok());

        let far = [c(1.5, -0.3)];
        let (t, r) = t_rho_r_rho_apply(&twist, &rho, &far, &phi).unwrap();
        assert_eq!(t.norm(), 0.0);
        let v = twist.v_f(&far).unwrap();
        assert!((r.into_coeffs() - v * phi.eval(&far)).norm() < 1e-15);

        // one variable: [∂̄,V_f] = 0, so R_ρ = (1 − ρ)V_f
        let mid = [c(0.5, 0.4)];
        let (_, r) = t_rho_r_rho_apply(&twist, &rho, &mid, &phi).unwrap();
        let want = twist.v_f(&mid).unwrap() * phi.eval(&mid) * re(1.0 - rho.value(&mid));
        assert!((r.into_coeffs() - want).norm() < 1e-15);
    }

    #[test]
    fn homotopy_lemma_one_variable() {
        let twist = Twist::new(&p("z^2/2", 1));
        let rho = BumpFunction::centered(1, 0.4, 1.0).unwrap();
        let phi = PolyFormField::new(
            1,
            vec![
                (0, 0, MixedPolynomial { terms: vec![(c(1.0, 0.0), vec![2], vec![0]), (c(0.0, 0.5), vec![0], vec![1])] }),
                (1, 0, mono(c(0.3, -0.2), &[1], &[1])),
                (0, 1, mono(c(-0.7, 0.0), &[0], &[2])),
                (1, 1, mono(c(0.25, 0.25), &[1], &[0])),
            ],
        );
        let inner = sample_shell(1, 20, 0.0, 0.38, 10);
        assert!(check_homotopy_lemma(&twist, &rho, &phi, &inner, 1e-5).unwrap().max_residual < 1e-12);
        let annulus = sample_shell(1, 100, 1.2, 1.8, 11);
        let check = check_homotopy_lemma(&twist, &rho, &phi, &annulus, 1e-5).unwrap();
        assert!(check.max_residual < 1e-6, "{check:?}");
        assert_eq!(check.stencil_near_cutoff, 0);
        let transition = sample_shell(1, 50, 0.45, 0.95, 12);
        assert!(check_homotopy_lemma(&twist, &rho, &phi, &transition, 1e-5).unwrap().max_residual < 1e-6);
        let shell = vec![vec![c(1.0, 0.0)]];
        assert_eq!(check_homotopy_lemma(&twist, &rho, &phi, &shell, 1e-5).unwrap().stencil_near_cutoff, 1);
    }

    #[test]
    fn homotopy_lemma_two_variables() {
        let f = p("(z1^3 + z2^3)/3 - z1*z2", 2);
        let twist = Twist::new(&f);
        let domain = DomainSpec::ball(2, 2.0).unwrap();
        let rho = default_bump(&f, &domain, 1).unwrap();
        assert!(rho.r1 > 2f64.sqrt() && rho.r2 < 2.0);
        let phi = PolyFormField::new(2, vec![(0b10, 0, mono(c(1.0, 0.0), &[0, 0], &[1, 0]))]);
        let points: Vec<_> = sample_shell(2, 200, 0.05, 1.95, 13)
            .into_iter()
            .filter(|z| {
                let r = rho.distance(z);
                twist.grad_norm_sq(z) > 1e-4 && (r - rho.r1).abs() > 1e-4 && (r - rho.r2).abs() > 1e-4
            })
            .take(50)
            .collect();
        assert_eq!(points.len(), 50);
        let check = check_homotopy_lemma(&twist, &rho, &phi, &points, 1e-5).unwrap();
        assert!(check.max_residual < 1e-5, "{check:?}");
    }

    #[test]
    fn laplacian_expansion_examples() {
        let twist = Twist::new(&p("z^2/2", 1));
        let one = |_: &[Complex64]| DVector::from_vec(vec![c(1.0, 0.0), ZERO, ZERO, ZERO]);
        for z in sample_shell(1, 5, 0.1, 0.9, 14) {
            let theta_field = |w: &[Complex64]| twist.theta_f_fd(&one, w, 1e-3);
            let dbar_field = |w: &[Complex64]| twist.dbar_f_fd(&one, w, 1e-3);
            let lap = twist.dbar_f_fd(&theta_field, &z, 1e-3) + twist.theta_f_fd(&dbar_field, &z, 1e-3);
            assert!((lap[0] - z[0].norm_sqr()).norm() < 1e-9);
            assert!(lap.iter().skip(1).all(|x| x.norm() < 1e-9));
        }

        let points = sample_shell(2, 20, 0.1, 0.95, 15);
        let linear = Twist::new(&p("z1 + 2*z2", 2));
        let phi = PolyFormField::random(2, 2, 4, 16);
        assert!(laplacian_expansion_check(&linear, &phi, &points, 1e-3, LfConvention::SelfAdjoint) < 1e-5);
        let zero = |_: &[Complex64]| DVector::zeros(16);
        assert_eq!(laplacian_expansion_check(&linear, &zero, &points, 1e-3, LfConvention::SelfAdjoint), 0.0);

        let cubic = Twist::new(&p("(z1^3 + z2^3)/3 - z1*z2", 2));
        assert!(laplacian_expansion_check(&cubic, &phi, &points, 1e-3, LfConvention::SelfAdjoint) < 1e-5);
    }

    #[test]
    fn as_written_lf_fails_on_antiholomorphic_one_forms() {
        let twist = Twist::new(&p("z^2/2", 1));
        let phi = PolyFormField::new(1, vec![(0, 1, mono(c(1.0, 0.0), &[1], &[0]))]);
        let points = sample_shell(1, 10, 0.2, 0.9, 17);
        assert!(laplacian_expansion_check(&twist, &phi, &points, 1e-3, LfConvention::SelfAdjoint) < 1e-6);
        assert!(laplacian_expansion_check(&twist, &phi, &points, 1e-3, LfConvention::AsWritten) > 0.1);
    }

    #[test]
    fn finite_difference_dbar_squares_to_zero() {
        let alg = FiberAlgebra::new(2);
        let phi = PolyFormField::random(2, 3, 4, 18);
        for z in sample_shell(2, 10, 0.1, 1.0, 19) {
            let inner = |w: &[Complex64]| dbar_fd(&alg, &phi, w, 1e-3);
            assert!(dbar_fd(&alg, &inner, &z, 1e-3).norm() < 1e-6);
        }
    }

    #[test]
    fn suite_passes_on_catalogued_cases() {
        let cases = [("z^2/2", 1, "ball:1"), ("(z1^2 + z2^2)/2", 2, "ball:1"), ("(z1^3 + z2^3)/3 - z1*z2", 2, "ball:2")];
        for (text, n, domain) in cases {
            let f = p(text, n);
            let domain = DomainSpec::parse(domain, n).unwrap();
            let config = HomotopyConfig { points: 20, ..HomotopyConfig::default() };
            let report = homotopy_suite(&f, &domain, &config).unwrap();
            assert_eq!(report.points, 20);
            assert!(report.all_passed(), "{text}: {:#?}", report.checks);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn contraction_is_adjoint_of_wedge(n in 1usize..=3, j in 0usize..3, holo in any::<bool>(), seed in any::<u64>()) {
            let j = j % n;
            let kind = if holo { Kind::Holomorphic } else { Kind::Antiholomorphic };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(n, &mut rng);
            let b = random_form(n, &mut rng);
            let lhs = wedge(j, kind, &a).coeffs().dotc(b.coeffs());
            let rhs = a.coeffs().dotc(contract(j, kind, &b).coeffs());
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
            // [dz_j∧, (dz_j∧)*] = 1
            let round = wedge(j, kind, &contract(j, kind, &a)).into_coeffs() + contract(j, kind, &wedge(j, kind, &a)).into_coeffs();
            prop_assert!((round - a.coeffs()).norm() < 1e-12);
        }
    }
}
