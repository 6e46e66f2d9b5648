//! Domains, monomial norms and finite-section Toeplitz matrices on the
//! Bergman space of a ball or polydisk.
//!
//! Monomials are mutually orthogonal on both domain kinds, so the truncated
//! Bergman space of degree `d` has the orthonormal basis e_α = z^α / ν_α with
//! ν_α² = ‖z^α‖², and multiplication by a polynomial acts as a weighted
//! shift in that basis. Inner products use plain Lebesgue volume; a constant
//! rescaling of the volume leaves ranks and eigenvalue ratios unchanged.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{MultiIndex, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("cannot parse domain '{0}': expected ball:<R> or polydisk:<r1,...,rn>")]
    Syntax(String),
    #[error("radii must be positive and finite")]
    NonPositiveRadius,
    #[error("polydisk has {found} radii but dimension is {expected}")]
    RadiusCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Ball,
    Polydisk,
}

/// A ball of radius R or a polydisk with radii (r1, .., rn), centred at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    kind: DomainKind,
    radii: Vec<f64>,
    n: usize,
}

impl DomainSpec {
    pub fn ball(n: usize, radius: f64) -> Result<Self, DomainError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(DomainError::NonPositiveRadius);
        }
        Ok(Self { kind: DomainKind::Ball, radii: vec![radius], n })
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::ball(n, 1.0).unwrap()
    }

    pub fn polydisk(radii: Vec<f64>) -> Result<Self, DomainError> {
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(DomainError::NonPositiveRadius);
        }
        let n = radii.len();
        Ok(Self { kind: DomainKind::Polydisk, radii, n })
    }

    /// Parse `ball:<R>` or `polydisk:<r1,...,rn>` for dimension `n`.
    pub fn parse(text: &str, n: usize) -> Result<Self, DomainError> {
        let (kind, rest) = text
            .trim()
            .split_once(':')
            .ok_or_else(|| DomainError::Syntax(text.to_string()))?;
        let nums: Result<Vec<f64>, _> = rest.split(',').map(|s| f64::from_str(s.trim())).collect();
        let nums = nums.map_err(|_| DomainError::Syntax(text.to_string()))?;
        match kind.trim() {
            "ball" if nums.len() == 1 => Self::ball(n, nums[0]),
            "polydisk" => {
                if nums.len() != n {
                    return Err(DomainError::RadiusCount { expected: n, found: nums.len() });
                }
                Self::polydisk(nums)
            }
            _ => Err(DomainError::Syntax(text.to_string())),
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Largest radius; the reference length for margins and bump radii.
    pub fn scale(&self) -> f64 {
        self.radii.iter().cloned().fold(0.0, f64::max)
    }

    /// Signed distance-like margin to the boundary: positive inside, zero
    /// on ∂D, negative outside. Exact Euclidean distance for the ball; for
    /// the polydisk the minimum slack over the factor disks.
    pub fn boundary_margin(&self, z: &[Complex64]) -> f64 {
        match self.kind {
            DomainKind::Ball => {
                let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                self.radii[0] - r
            }
            DomainKind::Polydisk => z
                .iter()
                .zip(&self.radii)
                .map(|(c, r)| r - c.norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.boundary_margin(z) > 0.0
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Ball => write!(f, "ball:{}", self.radii[0]),
            DomainKind::Polydisk => {
                let parts: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
                write!(f, "polydisk:{}", parts.join(","))
            }
        }
    }
}

/// ln ‖z^α‖² on the domain, via log-gamma.
pub fn monomial_log_norm_sq(alpha: &MultiIndex, domain: &DomainSpec) -> f64 {
    assert_eq!(alpha.dim(), domain.dim(), "multi-index dimension");
    let n = domain.dim() as f64;
    match domain.kind {
        DomainKind::Ball => {
            let deg = alpha.degree() as f64;
            let log_fact: f64 = alpha.exponents().iter().map(|&a| libm::lgamma(a as f64 + 1.0)).sum();
            n * PI.ln() + log_fact - libm::lgamma(n + deg + 1.0)
                + (2.0 * deg + 2.0 * n) * domain.radii[0].ln()
        }
        DomainKind::Polydisk => alpha
            .exponents()
            .iter()
            .zip(&domain.radii)
            .map(|(&a, &r)| {
                let a = a as f64;
                PI.ln() + (2.0 * a + 2.0) * r.ln() - (a + 1.0).ln()
            })
            .sum(),
    }
}

/// ‖z^α‖² on the domain.
///
/// Ball of radius R: π^n α! / (n+|α|)! · R^{2|α|+2n}.
/// Polydisk: Π π r_i^{2α_i+2} / (α_i+1).
pub fn monomial_norm_sq(alpha: &MultiIndex, domain: &DomainSpec) -> f64 {
    monomial_log_norm_sq(alpha, domain).exp()
}

/// All multi-indices with |α| ≤ d, in ascending graded-lex order.
#[derive(Debug, Clone)]
pub struct BasisIndexSet {
    n: usize,
    d: u32,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl BasisIndexSet {
    pub fn new(n: usize, d: u32) -> Self {
        let mut indices = Vec::new();
        let mut current = vec![0u32; n];
        enumerate_bounded(&mut current, 0, d, &mut indices);
        indices.sort();
        let position = indices.iter().enumerate().map(|(k, a)| (a.clone(), k)).collect();
        Self { n, d, indices, position }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}

fn enumerate_bounded(current: &mut Vec<u32>, axis: usize, budget: u32, out: &mut Vec<MultiIndex>) {
    if axis == current.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in 0..=budget {
        current[axis] = e;
        enumerate_bounded(current, axis + 1, budget - e, out);
    }
    current[axis] = 0;
}

pub fn basis_indices(n: usize, d: u32) -> BasisIndexSet {
    BasisIndexSet::new(n, d)
}

/// Log squared norms for every index up to a degree bound on one domain.
#[derive(Debug, Clone)]
pub struct NormTable {
    log_norm_sq: HashMap<MultiIndex, f64>,
}

impl NormTable {
    pub fn new(basis: &BasisIndexSet, domain: &DomainSpec) -> Self {
        let log_norm_sq = basis
            .indices()
            .iter()
            .map(|a| (a.clone(), monomial_log_norm_sq(a, domain)))
            .collect();
        Self { log_norm_sq }
    }

    pub fn log_norm_sq(&self, alpha: &MultiIndex) -> f64 {
        self.log_norm_sq[alpha]
    }

    pub fn norm_sq(&self, alpha: &MultiIndex) -> f64 {
        self.log_norm_sq(alpha).exp()
    }

    /// ν_β / ν_α.
    pub fn ratio(&self, beta: &MultiIndex, alpha: &MultiIndex) -> f64 {
        (0.5 * (self.log_norm_sq(beta) - self.log_norm_sq(alpha))).exp()
    }
}

/// Matrix of multiplication by `g` from span{e_α : α ∈ source} into
/// span{e_β : β ∈ target}, orthogonally projected onto the target span.
///
/// `norms` must cover every index of both sets. Dense, column-major,
/// rows indexed by `target`, columns by `source`.
pub fn toeplitz_between(
    g: &Polynomial,
    source: &BasisIndexSet,
    target: &BasisIndexSet,
    norms: &NormTable,
) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(target.len(), source.len());
    let terms: Vec<(MultiIndex, Complex64)> =
        g.terms().map(|(a, c)| (a.clone(), c.to_complex64())).collect();
    for (col, alpha) in source.indices().iter().enumerate() {
        for (gamma, c) in &terms {
            let beta = alpha.add(gamma);
            if let Some(row) = target.position(&beta) {
                m[(row, col)] += c * norms.ratio(&beta, alpha);
            }
        }
    }
    m
}

/// P_d T_g P_d in the orthonormal monomial basis of degree ≤ d:
/// entry (α+γ, α) = g_γ ν_{α+γ}/ν_α, dropped when |α+γ| > d.
pub fn compressed_toeplitz(g: &Polynomial, d: u32, domain: &DomainSpec) -> DMatrix<Complex64> {
    let basis = BasisIndexSet::new(domain.dim(), d);
    let norms = NormTable::new(&basis, domain);
    toeplitz_between(g, &basis, &basis, &norms)
}

/// ∫_D |z^α|² dV by numerical quadrature, independent of the closed forms.
///
/// The angular integrals are done analytically (each contributes 2π), the
/// remaining radial integral over {ρ_k ≥ 0, Σρ_k² ≤ R²} (ball) or the box
/// Π[0, r_k] (polydisk) by nested double-exponential quadrature.
pub fn quadrature_norm_sq(alpha: &MultiIndex, domain: &DomainSpec) -> f64 {
    let exps: Vec<i32> = alpha.exponents().iter().map(|&a| 2 * a as i32 + 1).collect();
    let angular = (2.0 * PI).powi(domain.dim() as i32);
    let radial = match domain.kind {
        DomainKind::Ball => ball_radial(&exps, domain.radii[0] * domain.radii[0]),
        DomainKind::Polydisk => exps
            .iter()
            .zip(&domain.radii)
            .map(|(&e, &r)| quadrature::double_exponential::integrate(|x| x.powi(e), 0.0, r, 1e-14).integral)
            .product(),
    };
    angular * radial
}

fn ball_radial(exps: &[i32], remaining_sq: f64) -> f64 {
    let Some((&e, rest)) = exps.split_first() else {
        return 1.0;
    };
    let upper = remaining_sq.max(0.0).sqrt();
    if upper == 0.0 {
        return 0.0;
    }
    quadrature::double_exponential::integrate(
        |x| x.powi(e) * ball_radial(rest, remaining_sq - x * x),
        0.0,
        upper,
        1e-14,
    )
    .integral
}
