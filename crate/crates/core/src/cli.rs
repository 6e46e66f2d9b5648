//! Command-line front end: configuration, the gated analysis pipeline and
//! report emission.
//!
//! Exit codes: 0 confirmed (or check passed), 1 undecided, 2 hypothesis
//! failure, 3 input error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bergman::{monomial_norm_sq, quadrature_norm_sq, BasisIndexSet, DomainSpec};
use crate::homotopy::{homotopy_suite, HomotopyConfig, HomotopyReport};
use crate::koszul::{cohomology_sweep, CohomologyReport, Scheme, SweepOptions, TolerancePolicy, VerdictStatus};
use crate::oracle::{self, CriticalCluster, LocateOptions, OracleError};
use crate::poly::{parse_polynomial, Polynomial};

pub const EXIT_CONFIRMED: i32 = 0;
pub const EXIT_UNDECIDED: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

pub const VERDICT_CONFIRMED: &str = "theorem-1.2-confirmed";
pub const VERDICT_UNDECIDED: &str = "undecided";
pub const VERDICT_HYPOTHESIS: &str = "hypothesis-failure";
pub const VERDICT_DIAGNOSTIC: &str = "rectangular-diagnostic";

/// Boundary-gradient gate, as multiples of the largest gradient coefficient.
pub const GRADIENT_FAIL: f64 = 1e-3;
pub const GRADIENT_WARN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "bergman-koszul", version, about = "Finite-section Koszul cohomology of Toeplitz tuples on Bergman spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Oracle, boundary gate, degree sweep and verdict
    Analyze(SpectralArgs),
    /// Jacobian-ring oracle and boundary gradient only
    Oracle(SpectralArgs),
    /// Degree sweep without the hypothesis gates
    Sweep(SpectralArgs),
    /// Pointwise operator identities at sample points
    HomotopyCheck(HomotopyArgs),
    /// Closed-form monomial norms against quadrature
    NormsCheck(NormsArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectralArgs {
    /// key = value file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// ball:<R> or polydisk:<r1,...,rn>
    #[arg(long)]
    pub domain: Option<String>,
    /// d1..d2 or a comma-separated list
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub band_width: Option<u32>,
    #[arg(long)]
    pub band_mass: Option<f64>,
    #[arg(long)]
    pub gap_floor: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub hodge_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also run the pointwise homotopy identities
    #[arg(long)]
    pub homotopy: bool,
}

#[derive(Debug, Clone, Args)]
pub struct HomotopyArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value = "ball:1")]
    pub domain: String,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct NormsArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value_t = 4)]
    pub max_degree: u32,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Everything a spectral run needs, after defaults and config merging.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub poly: String,
    pub dim: usize,
    pub domain: String,
    pub degrees: Vec<u32>,
    pub scheme: Scheme,
    pub policy: TolerancePolicy,
    pub margin: Option<f64>,
    pub hodge_samples: usize,
    pub seed: u64,
    pub format: Format,
    pub homotopy: bool,
}

impl RunConfig {
    pub fn new(poly: &str, dim: usize, domain: &str, degrees: Vec<u32>) -> Self {
        Self {
            poly: poly.to_string(),
            dim,
            domain: domain.to_string(),
            degrees,
            scheme: Scheme::Square,
            policy: TolerancePolicy::default(),
            margin: None,
            hodge_samples: 20,
            seed: crate::DEFAULT_SEED,
            format: Format::Json,
            homotopy: false,
        }
    }
}

pub fn parse_degrees(text: &str) -> Result<Vec<u32>, String> {
    let text = text.trim();
    let bad = || format!("cannot parse degrees '{text}': expected d1..d2 or a comma-separated list");
    if let Some((a, b)) = text.split_once("..") {
        let b = b.trim_start_matches('=');
        let lo: u32 = a.trim().parse().map_err(|_| bad())?;
        let hi: u32 = b.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", k + 1))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match file.get(key) {
            Some(text) => text.parse().map(Some).map_err(|_| format!("config key '{key}': cannot parse '{text}'")),
            None => Ok(None),
        },
    }
}

/// Merge flags over the optional config file and fill in defaults.
pub fn resolve_config(args: &SpectralArgs) -> Result<RunConfig, String> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let known = [
        "poly", "dim", "domain", "degrees", "scheme", "tau", "band-width", "band-mass", "gap-floor", "margin",
        "hodge-samples", "seed", "format", "homotopy",
    ];
    if let Some(key) = file.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(format!("unknown config key '{key}'"));
    }
    let poly = pick(args.poly.clone(), &file, "poly")?.ok_or("missing --poly")?;
    let dim = pick(args.dim, &file, "dim")?.ok_or("missing --dim")?;
    if dim == 0 {
        return Err("--dim must be at least 1".into());
    }
    let domain = pick(args.domain.clone(), &file, "domain")?.unwrap_or_else(|| "ball:1".into());
    let degrees = match pick(args.degrees.clone(), &file, "degrees")? {
        Some(text) => parse_degrees(&text)?,
        None => (10..=20).collect(),
    };
    let scheme = match pick(args.scheme.clone(), &file, "scheme")? {
        Some(text) => text.parse()?,
        None => Scheme::Square,
    };
    let defaults = TolerancePolicy::default();
    let policy = TolerancePolicy {
        tau: pick(args.tau, &file, "tau")?.unwrap_or(defaults.tau),
        band_width: pick(args.band_width, &file, "band-width")?,
        band_mass: pick(args.band_mass, &file, "band-mass")?.unwrap_or(defaults.band_mass),
        gap_floor: pick(args.gap_floor, &file, "gap-floor")?.unwrap_or(defaults.gap_floor),
    };
    if !(policy.tau > 0.0 && policy.tau < 1.0) || !(policy.band_mass > 0.0 && policy.band_mass <= 1.0) {
        return Err("tau must lie in (0, 1) and band-mass in (0, 1]".into());
    }
    let format = match args.format {
        Some(f) => f,
        None => match file.get("format").map(String::as_str) {
            None | Some("json") => Format::Json,
            Some("text") => Format::Text,
            Some(other) => return Err(format!("config key 'format': unknown format '{other}'")),
        },
    };
    let homotopy = args.homotopy || pick(None, &file, "homotopy")?.unwrap_or(false);
    Ok(RunConfig {
        poly,
        dim,
        domain,
        degrees,
        scheme,
        policy,
        margin: pick(args.margin, &file, "margin")?,
        hodge_samples: pick(args.hodge_samples, &file, "hodge-samples")?.unwrap_or(20),
        seed: pick(args.seed, &file, "seed")?.unwrap_or(crate::DEFAULT_SEED),
        format,
        homotopy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub mu_global: Option<usize>,
    pub mu_in_domain: Option<usize>,
    pub clusters: Vec<CriticalCluster>,
    pub boundary_margin: f64,
    pub boundary_gradient_min: f64,
    pub gradient_fail_threshold: f64,
    pub gradient_warn_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub seed: u64,
    pub oracle: Option<OracleSection>,
    #[serde(flatten)]
    pub spectral: Option<CohomologyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopyReport>,
    pub verdict: String,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
}

impl RunReport {
    fn failed(config: RunConfig, verdict: &str, error: String, exit_code: i32) -> Self {
        Self {
            seed: config.seed,
            config,
            oracle: None,
            spectral: None,
            homotopy: None,
            verdict: verdict.to_string(),
            warnings: Vec::new(),
            error: Some(error),
            exit_code,
        }
    }
}

struct Inputs {
    f: Polynomial,
    domain: DomainSpec,
}

fn parse_inputs(config: &RunConfig) -> Result<Inputs, String> {
    let f = parse_polynomial(&config.poly, config.dim).map_err(|e| format!("polynomial: {e}"))?;
    let domain = DomainSpec::parse(&config.domain, config.dim).map_err(|e| format!("domain: {e}"))?;
    if config.degrees.len() < 3 || config.degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err("degree sweep must be ascending with at least 3 entries".into());
    }
    Ok(Inputs { f, domain })
}

fn gradient_scale(f: &Polynomial) -> f64 {
    f.gradient().iter().map(Polynomial::coefficient_scale).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

/// Oracle and boundary-gradient gates. `Err` carries a finished report.
fn run_gates(config: &RunConfig, inputs: &Inputs) -> (OracleSection, Vec<String>, Option<(String, i32)>) {
    let Inputs { f, domain } = inputs;
    let margin = config.margin.unwrap_or_else(|| oracle::default_margin(domain));
    let scale = gradient_scale(f);
    let mut section = OracleSection {
        mu_global: None,
        mu_in_domain: None,
        clusters: Vec::new(),
        boundary_margin: margin,
        boundary_gradient_min: oracle::boundary_gradient_min(f, domain, 400, 200, config.seed),
        gradient_fail_threshold: GRADIENT_FAIL * scale,
        gradient_warn_threshold: GRADIENT_WARN * scale,
    };
    let mut warnings = Vec::new();
    let mut failure = None;
    let locate = LocateOptions { seed: config.seed, ..LocateOptions::default() };
    match oracle::milnor_in_domain(f, domain, margin, &locate) {
        Ok(r) => {
            section.mu_global = Some(r.mu_global);
            section.mu_in_domain = Some(r.mu_in_domain);
            section.clusters = r.clusters;
        }
        Err(e @ OracleError::CriticalPointNearBoundary { .. }) => {
            failure = Some((format!("oracle: {e}"), EXIT_HYPOTHESIS));
        }
        Err(e @ OracleError::InvalidMargin) => failure = Some((format!("oracle: {e}"), EXIT_INPUT)),
        Err(e) => warnings.push(format!("oracle unavailable: {e}")),
    }
    let g = section.boundary_gradient_min;
    if g < section.gradient_fail_threshold {
        if failure.is_none() {
            failure = Some((
                format!("boundary gradient minimum {g:.3e} is below {:.3e}", section.gradient_fail_threshold),
                EXIT_HYPOTHESIS,
            ));
        }
    } else if g < section.gradient_warn_threshold {
        warnings.push(format!(
            "boundary gradient minimum {g:.3e} is below {:.3e}; a critical point is close to the boundary and truncation may converge slowly",
            section.gradient_warn_threshold
        ));
    }
    (section, warnings, failure)
}

fn sweep_options(config: &RunConfig) -> SweepOptions {
    SweepOptions {
        scheme: config.scheme,
        policy: config.policy,
        seed: config.seed,
        hodge_samples: config.hodge_samples,
        oracle_margin: None,
    }
}

/// Gated pipeline: oracle and boundary gradient, then the degree sweep,
/// then (optionally) the homotopy identities.
pub fn run(config: RunConfig) -> RunReport {
    let inputs = match parse_inputs(&config) {
        Ok(i) => i,
        Err(e) => return RunReport::failed(config, "input-error", e, EXIT_INPUT),
    };
    let (section, mut warnings, failure) = run_gates(&config, &inputs);
    if let Some((error, code)) = failure {
        let verdict = if code == EXIT_HYPOTHESIS { VERDICT_HYPOTHESIS } else { "input-error" };
        let mut report = RunReport::failed(config, verdict, error, code);
        report.oracle = Some(section);
        report.warnings = warnings;
        return report;
    }
    let spectral = match cohomology_sweep(&inputs.f, &inputs.domain, &config.degrees, &sweep_options(&config)) {
        Ok(r) => r,
        Err(e) => {
            let mut report = RunReport::failed(config, "input-error", e.to_string(), EXIT_INPUT);
            report.oracle = Some(section);
            return report;
        }
    };
    let homotopy = if config.homotopy {
        let hc = HomotopyConfig { seed: config.seed, ..HomotopyConfig::default() };
        match homotopy_suite(&inputs.f, &inputs.domain, &hc) {
            Ok(r) => {
                if !r.all_passed() {
                    warnings.push("some homotopy identities exceeded their thresholds".into());
                }
                Some(r)
            }
            Err(e) => {
                warnings.push(format!("homotopy checks skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let n = config.dim;
    let h = spectral.final_h();
    let (verdict, exit_code) = if config.scheme == Scheme::Rectangular {
        let code = if spectral.all_converged() { EXIT_CONFIRMED } else { EXIT_UNDECIDED };
        (VERDICT_DIAGNOSTIC, code)
    } else if !spectral.all_converged() {
        for v in spectral.verdicts.iter().filter(|v| v.status == VerdictStatus::Undecided) {
            warnings.push(format!("h_{} has not converged over the last three degrees", v.p));
        }
        (VERDICT_UNDECIDED, EXIT_UNDECIDED)
    } else {
        match section.mu_in_domain {
            Some(mu) if h[n] == mu && h[..n].iter().all(|&x| x == 0) => (VERDICT_CONFIRMED, EXIT_CONFIRMED),
            Some(mu) => {
                warnings.push(format!("converged counts {h:?} disagree with the oracle (mu_D = {mu})"));
                (VERDICT_UNDECIDED, EXIT_UNDECIDED)
            }
            None => (VERDICT_UNDECIDED, EXIT_UNDECIDED),
        }
    };
    RunReport {
        seed: config.seed,
        config,
        oracle: Some(section),
        spectral: Some(spectral),
        homotopy,
        verdict: verdict.to_string(),
        warnings,
        error: None,
        exit_code,
    }
}

/// Oracle and boundary gate only.
pub fn run_oracle(config: RunConfig) -> RunReport {
    let inputs = match parse_inputs(&config) {
        Ok(i) => i,
        Err(e) => return RunReport::failed(config, "input-error", e, EXIT_INPUT),
    };
    let (section, warnings, failure) = run_gates(&config, &inputs);
    let (verdict, error, exit_code) = match failure {
        Some((e, code)) => (VERDICT_HYPOTHESIS, Some(e), code),
        None => ("hypotheses-satisfied", None, EXIT_CONFIRMED),
    };
    RunReport {
        seed: config.seed,
        config,
        oracle: Some(section),
        spectral: None,
        homotopy: None,
        verdict: verdict.to_string(),
        warnings,
        error,
        exit_code,
    }
}

/// Degree sweep without gates.
pub fn run_sweep(config: RunConfig) -> RunReport {
    let inputs = match parse_inputs(&config) {
        Ok(i) => i,
        Err(e) => return RunReport::failed(config, "input-error", e, EXIT_INPUT),
    };
    match cohomology_sweep(&inputs.f, &inputs.domain, &config.degrees, &sweep_options(&config)) {
        Ok(spectral) => {
            let (verdict, code) =
                if spectral.all_converged() { ("converged", EXIT_CONFIRMED) } else { (VERDICT_UNDECIDED, EXIT_UNDECIDED) };
            RunReport {
                seed: config.seed,
                config,
                oracle: None,
                spectral: Some(spectral),
                homotopy: None,
                verdict: verdict.to_string(),
                warnings: Vec::new(),
                error: None,
                exit_code: code,
            }
        }
        Err(e) => RunReport::failed(config, "input-error", e.to_string(), EXIT_INPUT),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |g| format!("{g:.4e}"))
}

/// Fixed-width text rendering: one row per sweep degree, then verdicts.
pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(out, "f = {}  (n = {}, domain {}, seed {})", c.poly, c.dim, c.domain, report.seed);
    if let Some(o) = &report.oracle {
        let show = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "oracle: mu = {}, mu_D = {}, boundary |grad f| min = {:.4e} (fail < {:.1e}, warn < {:.1e})",
            show(o.mu_global),
            show(o.mu_in_domain),
            o.boundary_gradient_min,
            o.gradient_fail_threshold,
            o.gradient_warn_threshold
        );
    }
    if let Some(s) = &report.spectral {
        let n = c.dim;
        let mut header = format!("{:>4}", "d");
        for p in 0..=n {
            let _ = write!(header, " {:>5}", format!("h_{p}"));
        }
        let _ = write!(header, " {:>12} {:>12} {:>10}", "joint gap", "max defect", "artifacts");
        let _ = writeln!(out, "{header}");
        for r in &s.per_degree {
            let mut row = format!("{:>4}", r.d);
            for h in &r.h {
                let _ = write!(row, " {h:>5}");
            }
            let defect = r.defects.iter().cloned().fold(0.0, f64::max);
            let artifacts = r.artifacts.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("/");
            let _ = write!(row, " {:>12} {:>12.4e} {:>10}", fmt_opt(r.joint_gap), defect, artifacts);
            let _ = writeln!(out, "{row}");
        }
        for v in &s.verdicts {
            let status = match v.status {
                VerdictStatus::Converged => "converged",
                VerdictStatus::Undecided => "undecided",
            };
            let _ = writeln!(out, "h_{} = {} ({status})", v.p, v.h);
        }
    }
    if let Some(h) = &report.homotopy {
        for check in &h.checks {
            let mark = if check.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{:<24} {:>12.4e} < {:.0e}  {mark}", check.name, check.max_residual, check.threshold);
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if let Some(e) = &report.error {
        let _ = writeln!(out, "error: {e}");
    }
    let _ = writeln!(out, "verdict: {} (exit {})", report.verdict, report.exit_code);
    out
}

pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Text => render_text(report),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub alpha: Vec<u32>,
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsReport {
    pub domain: String,
    pub max_degree: u32,
    pub tolerance: f64,
    pub rows: Vec<NormRow>,
    pub max_relative_error: f64,
    pub passed: bool,
}

pub fn norms_check(domain: &DomainSpec, max_degree: u32, tolerance: f64) -> NormsReport {
    use rayon::prelude::*;
    let basis = BasisIndexSet::new(domain.dim(), max_degree);
    let rows: Vec<NormRow> = basis
        .indices()
        .par_iter()
        .map(|alpha| {
            let closed = monomial_norm_sq(alpha, domain);
            let quad = quadrature_norm_sq(alpha, domain);
            NormRow {
                alpha: alpha.0.clone(),
                closed_form: closed,
                quadrature: quad,
                relative_error: ((closed - quad) / closed).abs(),
            }
        })
        .collect();
    let max_relative_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    NormsReport {
        domain: domain.to_string(),
        max_degree,
        tolerance,
        rows,
        max_relative_error,
        passed: max_relative_error < tolerance,
    }
}

fn render_norms(report: &NormsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16} {:>16} {:>16} {:>10}", "alpha", "closed form", "quadrature", "rel err");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<16} {:>16.9e} {:>16.9e} {:>10.2e}",
            format!("{:?}", r.alpha),
            r.closed_form,
            r.quadrature,
            r.relative_error
        );
    }
    let mark = if report.passed { "pass" } else { "FAIL" };
    let _ = writeln!(out, "max relative error {:.2e} (tolerance {:.0e}): {mark}", report.max_relative_error, report.tolerance);
    out
}

fn render_homotopy(report: &HomotopyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bump r1 = {:.4}, r2 = {:.4}; {} points", report.bump.r1, report.bump.r2, report.points);
    for check in &report.checks {
        let mark = if check.passed { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{:<24} {:>12.4e} < {:.0e}  {mark}", check.name, check.max_residual, check.threshold);
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn spectral_command(args: &SpectralArgs, pipeline: fn(RunConfig) -> RunReport) -> (String, i32) {
    match resolve_config(args) {
        Ok(config) => {
            let format = config.format;
            let report = pipeline(config);
            (emit(&report, format), report.exit_code)
        }
        Err(e) => (format!("error: {e}\n"), EXIT_INPUT),
    }
}

/// Execute a parsed command line, returning the rendered output and the
/// exit code.
pub fn execute(cli: Cli) -> (String, i32) {
    match cli.command {
        Command::Analyze(args) => spectral_command(&args, run),
        Command::Oracle(args) => {
            let mut args = args;
            if args.degrees.is_none() {
                args.degrees = Some("0..2".into());
            }
            spectral_command(&args, run_oracle)
        }
        Command::Sweep(args) => spectral_command(&args, run_sweep),
        Command::HomotopyCheck(args) => {
            let parsed = parse_polynomial(&args.poly, args.dim)
                .map_err(|e| format!("polynomial: {e}"))
                .and_then(|f| Ok((f, DomainSpec::parse(&args.domain, args.dim).map_err(|e| format!("domain: {e}"))?)));
            let (f, domain) = match parsed {
                Ok(x) => x,
                Err(e) => return (format!("error: {e}\n"), EXIT_INPUT),
            };
            let config = HomotopyConfig { points: args.points, fd_step: args.fd_step, seed: args.seed, ..HomotopyConfig::default() };
            match homotopy_suite(&f, &domain, &config) {
                Ok(report) => {
                    let code = if report.all_passed() { EXIT_CONFIRMED } else { EXIT_UNDECIDED };
                    let text = match args.format {
                        Format::Json => to_json(&report),
                        Format::Text => render_homotopy(&report),
                    };
                    (text, code)
                }
                Err(e) => (format!("error: {e}\n"), EXIT_UNDECIDED),
            }
        }
        Command::NormsCheck(args) => {
            let domain = match DomainSpec::parse(&args.domain, args.dim) {
                Ok(d) => d,
                Err(e) => return (format!("error: domain: {e}\n"), EXIT_INPUT),
            };
            let report = norms_check(&domain, args.max_degree, args.tolerance);
            let code = if report.passed { EXIT_CONFIRMED } else { EXIT_UNDECIDED };
            let text = match args.format {
                Format::Json => to_json(&report),
                Format::Text => render_norms(&report),
            };
            (text, code)
        }
    }
}

/// Parse `args` (including the program name) and execute. Usage errors
/// map to exit code 3.
pub fn main_with_args<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_CONFIRMED };
            (e.to_string(), code)
        }
    }
}
