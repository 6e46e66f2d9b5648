//! The truncated Koszul complex
//!
//!   0 → B⁰_d → B¹_d → … → Bⁿ_d → 0,   D_p = ∂f∧ = Σ_j T_{f_j} dz_j∧
//!
//! on Bergman forms with polynomial coefficients of degree ≤ d, its Hodge
//! Laplacians □_p = D_p†D_p + D_{p−1}D_{p−1}†, and the near-kernel counts that
//! stand in for dim H^p.
//!
//! Two truncation schemes exist. `Square` compresses every Toeplitz factor
//! onto the same degree-d space; this is the finite section of the Bergman
//! operator and is what makes the counts depend on the domain. Holomorphic
//! symbols only raise degree, so compression commutes with products and
//! D_{p+1}D_p vanishes up to rounding; the cut itself still produces spurious
//! near-kernel vectors in the top degree band, which the artifact filter
//! removes.
//! `Rectangular` lets K^p carry degree d + p·max deg f_j so every product is
//! exact; its counts are purely algebraic and track the global Milnor
//! number, not the domain-restricted one. It is a diagnostic only.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergman::{toeplitz_between, BasisIndexSet, DomainSpec, NormTable};
use crate::oracle::{self, LocateOptions, OracleError};
use crate::poly::{MultiIndex, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KoszulError {
    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NonHermitian(f64),
    #[error("degree sweep must be ascending with at least 3 entries")]
    BadSweep,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Square,
    Rectangular,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "square" => Ok(Scheme::Square),
            "rectangular" => Ok(Scheme::Rectangular),
            other => Err(format!("unknown scheme '{other}' (square|rectangular)")),
        }
    }
}

/// Bitmask of a strictly increasing index set I ⊆ {0, .., n−1}.
pub type FormIndex = u32;

/// p-subsets of {0..n−1} in lexicographic order of their sorted elements.
pub fn subsets_of_size(n: usize, p: usize) -> Vec<FormIndex> {
    fn rec(start: usize, n: usize, left: usize, acc: FormIndex, out: &mut Vec<FormIndex>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for k in start..n {
            rec(k + 1, n, left - 1, acc | (1 << k), out);
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, 0, &mut out);
    out
}

/// Sign of moving dz_j to its sorted place in dz_I: (−1)^{#{i ∈ I : i < j}}.
pub fn wedge_sign(j: usize, set: FormIndex) -> f64 {
    if (set & ((1 << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Basis of K^p truncated at coefficient degree d: pairs (α, I), ordered
/// graded-lex in α, then lexicographically in I.
#[derive(Debug, Clone)]
pub struct FormBasis {
    p: usize,
    coefficients: BasisIndexSet,
    subsets: Vec<FormIndex>,
    subset_rank: HashMap<FormIndex, usize>,
}

impl FormBasis {
    pub fn new(n: usize, p: usize, d: u32) -> Self {
        let subsets = subsets_of_size(n, p);
        let subset_rank = subsets.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        Self { p, coefficients: BasisIndexSet::new(n, d), subsets, subset_rank }
    }

    pub fn form_degree(&self) -> usize {
        self.p
    }

    /// Coefficient degree bound d.
    pub fn degree(&self) -> u32 {
        self.coefficients.degree()
    }

    pub fn coefficients(&self) -> &BasisIndexSet {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len() * self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn element(&self, k: usize) -> (&MultiIndex, FormIndex) {
        let s = self.subsets.len();
        (&self.coefficients.indices()[k / s], self.subsets[k % s])
    }

    pub fn elements(&self) -> impl Iterator<Item = (&MultiIndex, FormIndex)> {
        (0..self.len()).map(move |k| self.element(k))
    }

    pub fn position(&self, alpha_pos: usize, set: FormIndex) -> usize {
        alpha_pos * self.subsets.len() + self.subset_rank[&set]
    }
}

/// Matrix of ∂f∧ from `source` (degree p) to `target` (degree p+1).
/// Basis element (α, I) maps to Σ_{j∉I} sign(j, I) · (T_{f_j} e_α) ⊗ dz_{I∪{j}}.
pub fn differential_between(
    grad: &[Polynomial],
    source: &FormBasis,
    target: &FormBasis,
    norms: &NormTable,
) -> DMatrix<Complex64> {
    let blocks: Vec<DMatrix<Complex64>> = grad
        .iter()
        .map(|g| toeplitz_between(g, source.coefficients(), target.coefficients(), norms))
        .collect();
    let mut out = DMatrix::zeros(target.len(), source.len());
    let n_alpha_src = source.coefficients().len();
    let n_alpha_tgt = target.coefficients().len();
    for a in 0..n_alpha_src {
        for &set in &source.subsets {
            let col = source.position(a, set);
            for (j, block) in blocks.iter().enumerate() {
                if set & (1 << j) != 0 {
                    continue;
                }
                let sign = wedge_sign(j, set);
                let new_set = set | (1 << j);
                for b in 0..n_alpha_tgt {
                    let v = block[(b, a)];
                    if v != Complex64::new(0.0, 0.0) {
                        out[(target.position(b, new_set), col)] += v * sign;
                    }
                }
            }
        }
    }
    out
}

/// The square-scheme differential D_p of degree-d truncation.
pub fn assemble_differential(f: &Polynomial, p: usize, d: u32, domain: &DomainSpec) -> DMatrix<Complex64> {
    let n = f.dim();
    assert!(p < n, "differential D_{p} does not exist for n = {n}");
    let source = FormBasis::new(n, p, d);
    let target = FormBasis::new(n, p + 1, d);
    let norms = NormTable::new(source.coefficients(), domain);
    differential_between(&f.gradient(), &source, &target, &norms)
}

/// Differentials and bases of one truncation.
#[derive(Debug, Clone)]
pub struct TruncatedComplex {
    f: Polynomial,
    domain: DomainSpec,
    d: u32,
    scheme: Scheme,
    bases: Vec<FormBasis>,
    differentials: Vec<DMatrix<Complex64>>,
}

impl TruncatedComplex {
    pub fn new(f: &Polynomial, domain: &DomainSpec, d: u32, scheme: Scheme) -> Self {
        let n = f.dim();
        assert_eq!(domain.dim(), n, "domain dimension");
        let grad = f.gradient();
        let step = grad.iter().map(Polynomial::degree).max().unwrap_or(0);
        let degree_of = |p: usize| match scheme {
            Scheme::Square => d,
            Scheme::Rectangular => d + p as u32 * step,
        };
        let bases: Vec<FormBasis> = (0..=n).map(|p| FormBasis::new(n, p, degree_of(p))).collect();
        let norms = NormTable::new(bases[n].coefficients(), domain);
        let differentials =
            (0..n).map(|p| differential_between(&grad, &bases[p], &bases[p + 1], &norms)).collect();
        Self { f: f.clone(), domain: domain.clone(), d, scheme, bases, differentials }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn truncation(&self) -> u32 {
        self.d
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn basis(&self, p: usize) -> &FormBasis {
        &self.bases[p]
    }

    /// D_p : K^p → K^{p+1}, or `None` outside 0 ≤ p < n.
    pub fn differential(&self, p: usize) -> Option<&DMatrix<Complex64>> {
        self.differentials.get(p)
    }
}

/// ‖D_{p+1} D_p‖₂ for p = 0 .. n−2.
pub fn complex_defect(complex: &TruncatedComplex) -> Vec<f64> {
    let n = complex.dim();
    (0..n.saturating_sub(1))
        .map(|p| {
            let prod = complex.differentials[p + 1].clone() * &complex.differentials[p];
            operator_norm(&prod)
        })
        .collect()
}

pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// □_p = D_p†D_p + D_{p−1}D_{p−1}†, with missing differentials treated as 0.
pub fn hodge_laplacian(complex: &TruncatedComplex, p: usize) -> DMatrix<Complex64> {
    let dim = complex.basis(p).len();
    let mut lap = DMatrix::zeros(dim, dim);
    if let Some(d) = complex.differential(p) {
        lap += d.adjoint() * d;
    }
    if p > 0 {
        if let Some(d) = complex.differential(p - 1) {
            lap += d * d.adjoint();
        }
    }
    lap
}

/// Ascending eigenvalues with orthonormal eigenvectors in matching columns.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Full Hermitian eigendecomposition. Inputs with relative asymmetry above
/// 1e-12 are rejected; purely real inputs use the real symmetric solver.
pub fn spectrum(h: &DMatrix<Complex64>) -> Result<Eigenpairs, KoszulError> {
    assert!(h.is_square(), "spectrum of a non-square matrix");
    let size = h.nrows();
    let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let asym = (h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(KoszulError::NonHermitian(if scale > 0.0 { asym / scale } else { asym }));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if sym.iter().all(|c| c.im == 0.0) {
        let real = sym.map(|c| c.re);
        let eig = real.symmetric_eigen();
        (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = sym.symmetric_eigen();
        (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(size, size, |i, j| vectors[(i, order[j])]);
    Ok(Eigenpairs { values: sorted_values, vectors: sorted_vectors })
}

/// Knobs for near-kernel counting and convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Near-kernel threshold relative to λ_max(□_p).
    pub tau: f64,
    /// Top-band width w; `None` means max_j deg f_j + 2.
    pub band_width: Option<u32>,
    /// Mass fraction θ in the top band above which a vector is an artifact.
    pub band_mass: f64,
    /// Lower bound the gap must keep over the converged degrees.
    pub gap_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { tau: 1e-6, band_width: None, band_mass: 0.5, gap_floor: 0.05 }
    }
}

impl TolerancePolicy {
    pub fn resolved_band_width(&self, f: &Polynomial) -> u32 {
        self.band_width
            .unwrap_or_else(|| f.gradient().iter().map(Polynomial::degree).max().unwrap_or(0) + 2)
    }
}

/// Near-kernel classification of one Laplacian spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct NearKernel {
    pub h: usize,
    pub artifacts_removed: usize,
    /// Smallest eigenvalue at or above the threshold (`None` if there is none).
    pub gap: Option<f64>,
    pub threshold: f64,
    /// Column indices of the retained near-kernel eigenvectors.
    pub retained: Vec<usize>,
    /// Column indices of every sub-threshold eigenvector.
    pub candidates: Vec<usize>,
}

/// Count eigenvalues below τ·λ_max, discarding those whose eigenvector has
/// more than a `band_mass` share of its squared norm on |α| > d − w.
/// With `band_width = None` no vector is discarded.
pub fn near_kernel_count(
    eig: &Eigenpairs,
    basis: &FormBasis,
    tau: f64,
    band: Option<(u32, f64)>,
) -> NearKernel {
    let lambda_max = eig.values.last().cloned().unwrap_or(0.0).max(0.0);
    let threshold = tau * lambda_max;
    let cutoff = band.map(|(w, _)| basis.degree().saturating_sub(w));
    let in_band: Vec<bool> = basis
        .elements()
        .map(|(alpha, _)| cutoff.is_some_and(|c| alpha.degree() > c))
        .collect();
    let mut retained = Vec::new();
    let mut candidates = Vec::new();
    let mut gap = None;
    for (k, &lambda) in eig.values.iter().enumerate() {
        let below = if lambda_max > 0.0 { lambda < threshold } else { true };
        if !below {
            gap = gap.or(Some(lambda));
            continue;
        }
        candidates.push(k);
        let artifact = match band {
            Some((_, theta)) => {
                let col = eig.vectors.column(k);
                let total: f64 = col.iter().map(|c| c.norm_sqr()).sum();
                let top: f64 = col.iter().zip(&in_band).filter(|(_, b)| **b).map(|(c, _)| c.norm_sqr()).sum();
                top > theta * total
            }
            None => false,
        };
        if !artifact {
            retained.push(k);
        }
    }
    NearKernel {
        h: retained.len(),
        artifacts_removed: candidates.len() - retained.len(),
        gap,
        threshold,
        retained,
        candidates,
    }
}

#[derive(Debug, Clone)]
pub struct LaplacianReport {
    pub p: usize,
    pub eigenvalues: Vec<f64>,
    pub near_kernel: usize,
    pub artifacts_removed: usize,
    pub gap: Option<f64>,
    /// Largest ‖D_q D_{q−1}‖ over the composites through K^p.
    pub defect: f64,
    pub threshold: f64,
}

/// Components of v = h + D_{p−1}x + D_p†y read off the eigendecomposition
/// of □_p. The harmonic part spans every sub-threshold eigenvector.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub harmonic: DVector<Complex64>,
    pub exact: DVector<Complex64>,
    pub coexact: DVector<Complex64>,
}

impl HodgeParts {
    pub fn relative_residual(&self, v: &DVector<Complex64>) -> f64 {
        let r = v - &self.harmonic - &self.exact - &self.coexact;
        r.norm() / v.norm()
    }
}

pub fn hodge_decomposition(
    complex: &TruncatedComplex,
    p: usize,
    eig: &Eigenpairs,
    kernel: &NearKernel,
    v: &DVector<Complex64>,
) -> HodgeParts {
    let coeffs = eig.vectors.adjoint() * v;
    let dim = v.len();
    let mut harmonic = DVector::zeros(dim);
    let mut green = DVector::zeros(dim);
    let mut is_kernel = vec![false; eig.values.len()];
    for &k in &kernel.candidates {
        is_kernel[k] = true;
    }
    for (k, &lambda) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(k);
        if is_kernel[k] {
            harmonic += col * coeffs[k];
        } else {
            green += col * (coeffs[k] / lambda);
        }
    }
    let exact = match (p > 0).then(|| complex.differential(p - 1)).flatten() {
        Some(d) => d * (d.adjoint() * &green),
        None => DVector::zeros(dim),
    };
    let coexact = match complex.differential(p) {
        Some(d) => d.adjoint() * (d * &green),
        None => DVector::zeros(dim),
    };
    HodgeParts { harmonic, exact, coexact }
}

/// Largest relative Hodge-decomposition residual over `samples` seeded
/// Gaussian test vectors.
pub fn hodge_residual(
    complex: &TruncatedComplex,
    p: usize,
    eig: &Eigenpairs,
    kernel: &NearKernel,
    samples: usize,
    seed: u64,
) -> f64 {
    let dim = complex.basis(p).len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = DVector::from_fn(dim, |_, _| {
                Complex64::new(oracle::standard_normal(&mut rng), oracle::standard_normal(&mut rng))
            });
            hodge_decomposition(complex, p, eig, kernel, &v).relative_residual(&v)
        })
        .fold(0.0, f64::max)
}

/// All spectral data for one truncation degree.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeRecord {
    pub d: u32,
    pub h: Vec<usize>,
    pub gaps: Vec<Option<f64>>,
    pub joint_gap: Option<f64>,
    pub defects: Vec<f64>,
    pub artifacts: Vec<usize>,
    pub hodge_residuals: Vec<f64>,
    #[serde(skip)]
    pub laplacians: Vec<LaplacianReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Converged,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub p: usize,
    pub status: VerdictStatus,
    /// The stable count when converged, otherwise the last observed one.
    pub h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub mu_global: usize,
    pub mu_in_domain: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologyReport {
    pub per_degree: Vec<DegreeRecord>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    pub policy: ResolvedPolicy,
    pub scheme: Scheme,
    /// Echoed by the enclosing run report.
    #[serde(skip)]
    pub seed: u64,
}

impl CohomologyReport {
    pub fn all_converged(&self) -> bool {
        self.verdicts.iter().all(|v| v.status == VerdictStatus::Converged)
    }

    /// Final counts h_0 .. h_n (from the verdicts).
    pub fn final_h(&self) -> Vec<usize> {
        self.verdicts.iter().map(|v| v.h).collect()
    }
}

/// Policy with every default filled in, as echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedPolicy {
    pub tau: f64,
    pub band_width: u32,
    pub band_mass: f64,
    pub gap_floor: f64,
    pub artifact_filter: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub scheme: Scheme,
    pub policy: TolerancePolicy,
    pub seed: u64,
    /// Random test vectors per (degree, p) for the Hodge residual; 0 skips it.
    pub hodge_samples: usize,
    /// Attach the oracle's μ and μ_D, with this boundary margin.
    pub oracle_margin: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Square,
            policy: TolerancePolicy::default(),
            seed: crate::DEFAULT_SEED,
            hodge_samples: 20,
            oracle_margin: None,
        }
    }
}

/// Analyze one truncation degree.
pub fn analyze_degree(
    f: &Polynomial,
    domain: &DomainSpec,
    d: u32,
    options: &SweepOptions,
    resolved: &ResolvedPolicy,
) -> Result<DegreeRecord, KoszulError> {
    let complex = TruncatedComplex::new(f, domain, d, options.scheme);
    let n = f.dim();
    let defects = complex_defect(&complex);
    let band = resolved.artifact_filter.then_some((resolved.band_width, resolved.band_mass));
    let per_p: Vec<Result<(LaplacianReport, f64), KoszulError>> = (0..=n)
        .into_par_iter()
        .map(|p| {
            let lap = hodge_laplacian(&complex, p);
            let eig = spectrum(&lap)?;
            let kernel = near_kernel_count(&eig, complex.basis(p), resolved.tau, band);
            let seed = options.seed ^ ((d as u64) << 32) ^ (p as u64);
            let residual = if options.hodge_samples > 0 {
                hodge_residual(&complex, p, &eig, &kernel, options.hodge_samples, seed)
            } else {
                0.0
            };
            let mut defect: f64 = 0.0;
            if p >= 1 && p < n {
                defect = defect.max(defects[p - 1]);
            }
            if p + 1 < n {
                defect = defect.max(defects[p]);
            }
            let report = LaplacianReport {
                p,
                eigenvalues: eig.values.clone(),
                near_kernel: kernel.h,
                artifacts_removed: kernel.artifacts_removed,
                gap: kernel.gap,
                defect,
                threshold: kernel.threshold,
            };
            Ok((report, residual))
        })
        .collect();
    let mut laplacians = Vec::with_capacity(n + 1);
    let mut hodge_residuals = Vec::with_capacity(n + 1);
    for r in per_p {
        let (rep, res) = r?;
        laplacians.push(rep);
        hodge_residuals.push(res);
    }
    let gaps: Vec<Option<f64>> = laplacians.iter().map(|l| l.gap).collect();
    let joint_gap = gaps.iter().flatten().cloned().reduce(f64::min);
    Ok(DegreeRecord {
        d,
        h: laplacians.iter().map(|l| l.near_kernel).collect(),
        gaps,
        joint_gap,
        defects,
        artifacts: laplacians.iter().map(|l| l.artifacts_removed).collect(),
        hodge_residuals,
        laplacians,
    })
}

pub fn resolve_policy(f: &Polynomial, options: &SweepOptions) -> ResolvedPolicy {
    ResolvedPolicy {
        tau: options.policy.tau,
        band_width: options.policy.resolved_band_width(f),
        band_mass: options.policy.band_mass,
        gap_floor: options.policy.gap_floor,
        artifact_filter: options.scheme == Scheme::Square,
    }
}

/// Run the pipeline at every truncation degree and decide, per form
/// degree p, whether h_p has converged: identical over the last three
/// degrees with every gap there at least the policy's floor.
pub fn cohomology_sweep(
    f: &Polynomial,
    domain: &DomainSpec,
    degrees: &[u32],
    options: &SweepOptions,
) -> Result<CohomologyReport, KoszulError> {
    if degrees.len() < 3 || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KoszulError::BadSweep);
    }
    let oracle = match options.oracle_margin {
        Some(margin) => {
            let locate = LocateOptions { seed: options.seed, ..LocateOptions::default() };
            let r = oracle::milnor_in_domain(f, domain, margin, &locate)?;
            Some(OracleSummary { mu_global: r.mu_global, mu_in_domain: r.mu_in_domain })
        }
        None => None,
    };
    let resolved = resolve_policy(f, options);
    let records: Result<Vec<DegreeRecord>, KoszulError> =
        degrees.par_iter().map(|&d| analyze_degree(f, domain, d, options, &resolved)).collect();
    let per_degree = records?;
    let verdicts = decide(&per_degree, f.dim(), resolved.gap_floor);
    Ok(CohomologyReport { per_degree, verdicts, oracle, policy: resolved, scheme: options.scheme, seed: options.seed })
}

fn decide(records: &[DegreeRecord], n: usize, gap_floor: f64) -> Vec<Verdict> {
    let tail = &records[records.len() - 3..];
    (0..=n)
        .map(|p| {
            let last = tail[2].h[p];
            let stable = tail.iter().all(|r| r.h[p] == last);
            let gapped = tail.iter().all(|r| r.gaps[p].is_none_or(|g| g >= gap_floor));
            let status = if stable && gapped { VerdictStatus::Converged } else { VerdictStatus::Undecided };
            Verdict { p, status, h: last }
        })
        .collect()
}
