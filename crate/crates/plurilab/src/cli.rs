//! Batch front-end: argument parsing, configuration files and the seven
//! report-producing subcommands.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::domains::{first_exit, make_builtin, DomainParams, DomainSpec, ParamRecord};
use crate::error::{Error, Result};
use crate::geodesics::{
    ball_geodesic, dini_check, geodesic_derivative_bound, hl_extend, isometry_defect, mercer_fit, Majorant,
};
use crate::kobayashi::{
    flat_point_sequence, graham_bounds, holder_divergence, sibony_lower, upper_disc, KobayashiBound,
    ModulusOfContinuity, PshCertificate, ALPHA_UNIVERSAL_DEFAULT,
};
use crate::mappings::{
    boundary_extend, boundary_layer_samples, cone_probe, cone_source_sequences, default_target_exponent,
    exponent_chain, extension_continuity_scan, hopf_fit, jacobian_lp_check, lipschitz_chart_fit, make_map,
    properness_probe, BoundaryPatch, ConeConfig,
};
use crate::monge_ampere::{canonical_function, holder_fit, ma_density, pullback_field, CanonicalSolution, CanonicalSolver, HermitianField};
use crate::numerics::{self, basis, c, inner, norm, CVec};
use crate::peaks::{peak_function, PeakConfig};
use crate::report::Report;

/// Command-line arguments of the `plurilab` binary.
#[derive(Debug, Parser)]
#[command(name = "plurilab", version, about = "Invariant metrics, Monge–Ampère diagnostics and boundary behaviour of holomorphic maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Upper and lower bounds for the Kobayashi metric.
    KobayashiBounds,
    /// Divergence of disc-radius ratios along a flat-point sequence.
    HolderFailure,
    /// Pullback coefficients, Monge–Ampère density and Jacobian L^p check.
    MaPullback,
    /// Canonical function and its Hölder diagnostics.
    Canonical,
    /// Properness, exponent chain and boundary extension of a map.
    ExtensionCheck,
    /// Geodesic distance sandwich, Dini check and radial extension.
    GeodesicExtend,
    /// Plurisubharmonic peak function at a boundary point.
    PeakFunction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KobayashiBounds => "kobayashi-bounds",
            Command::HolderFailure => "holder-failure",
            Command::MaPullback => "ma-pullback",
            Command::Canonical => "canonical",
            Command::ExtensionCheck => "extension-check",
            Command::GeodesicExtend => "geodesic-extend",
            Command::PeakFunction => "peak-function",
        }
    }
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Built-in domain identifier.
    #[arg(long, global = true)]
    pub domain: Option<String>,
    /// Complex dimension of dimension-parametrised domains.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Holomorphic map identifier.
    #[arg(long, global = true)]
    pub map: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample budget for Monte Carlo estimates.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Comparison tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML key-value file; its entries override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated exponents.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// `envelope` or `oracle`.
    #[arg(long, global = true)]
    pub solver: Option<String>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub domain: Option<String>,
    pub n: usize,
    pub map: Option<String>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    #[serde(skip)]
    pub out: PathBuf,
    pub alphas: Option<Vec<f64>>,
    pub solver: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            domain: None,
            n: 2,
            map: None,
            seed: 1,
            budget: None,
            tol: None,
            out: PathBuf::from("plurilab-out"),
            alphas: None,
            solver: None,
        }
    }

    /// Flags first, then the config file (if any) on top.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let o = &cli.options;
        let mut cfg = RunConfig::new(cli.command);
        cfg.domain = o.domain.clone();
        cfg.n = o.n.unwrap_or(2);
        cfg.map = o.map.clone();
        cfg.seed = o.seed.unwrap_or(1);
        cfg.budget = o.budget;
        cfg.tol = o.tol;
        if let Some(out) = &o.out {
            cfg.out = out.clone();
        }
        cfg.alphas = o.alphas.clone();
        cfg.solver = o.solver.clone();
        if let Some(path) = &o.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_overrides(&text)?;
        }
        Ok(cfg)
    }

    /// Applies `key = value` entries; unknown keys are rejected.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let bad = |key: &str| Error::Config(format!("`{key}` has the wrong type"));
        let as_usize = |key: &str, v: &toml::Value| -> Result<usize> {
            v.as_integer().and_then(|i| usize::try_from(i).ok()).ok_or_else(|| bad(key))
        };
        let as_f64 = |key: &str, v: &toml::Value| -> Result<f64> {
            v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(|| bad(key))
        };
        let as_str = |key: &str, v: &toml::Value| -> Result<String> { v.as_str().map(str::to_string).ok_or_else(|| bad(key)) };
        for (key, v) in &table {
            match key.as_str() {
                "domain" => self.domain = Some(as_str(key, v)?),
                "n" => self.n = as_usize(key, v)?,
                "map" => self.map = Some(as_str(key, v)?),
                "seed" => self.seed = v.as_integer().and_then(|i| u64::try_from(i).ok()).ok_or_else(|| bad(key))?,
                "budget" => self.budget = Some(as_usize(key, v)?),
                "tol" => self.tol = Some(as_f64(key, v)?),
                "out" => self.out = PathBuf::from(as_str(key, v)?),
                "solver" => self.solver = Some(as_str(key, v)?),
                "alphas" => {
                    let list = v.as_array().ok_or_else(|| bad(key))?;
                    self.alphas = Some(list.iter().map(|x| as_f64(key, x)).collect::<Result<_>>()?);
                }
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    fn domain_or(&self, default: &str) -> Result<DomainSpec> {
        let name = self.domain.as_deref().unwrap_or(default);
        make_builtin(name, &ParamRecord { n: Some(self.n), ..Default::default() })
    }

    fn map_name(&self) -> &str {
        self.map.as_deref().unwrap_or("example25")
    }

    fn seed_for(&self, stream: u64) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(stream)
    }
}

/// Whether an error stems from invalid input rather than a computation.
pub fn is_input_error(err: &Error) -> bool {
    matches!(
        err,
        Error::UnknownDomain(_)
            | Error::UnknownMap(_)
            | Error::InvalidDimension(..)
            | Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::Config(_)
    )
}

/// Parses arguments, runs the subcommand and returns the process exit code:
/// 0 on success, 1 on invariant violations or numerical failure, 2 on
/// invalid input.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&cfg) {
        Ok(report) if report.passed() => {
            println!("{}: ok ({})", report.command, cfg.out.join(format!("{}.json", report.command)).display());
            0
        }
        Ok(report) => {
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_input_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Runs one subcommand and writes `<out>/<command>.json` plus its tables.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    fs::create_dir_all(&cfg.out)?;
    let report = execute(cfg, Some(&cfg.out))?;
    report.write(&cfg.out.join(format!("{}.json", report.command)))?;
    Ok(report)
}

/// Computes the report of a subcommand; CSV tables go to `out` if given.
pub fn execute(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let mut report = Report::new(cfg.command.name(), serde_json::to_value(cfg)?);
    match cfg.command {
        Command::KobayashiBounds => kobayashi_bounds(cfg, &mut report)?,
        Command::HolderFailure => holder_failure(cfg, &mut report, out)?,
        Command::MaPullback => ma_pullback(cfg, &mut report)?,
        Command::Canonical => canonical(cfg, &mut report, out)?,
        Command::ExtensionCheck => extension_check(cfg, &mut report)?,
        Command::GeodesicExtend => geodesic_extend(cfg, &mut report, out)?,
        Command::PeakFunction => peak(cfg, &mut report)?,
    }
    Ok(report)
}

fn csv_file(out: Option<&Path>, name: &str) -> Result<Option<fs::File>> {
    out.map(|dir| fs::File::create(dir.join(name)).map_err(Error::from)).transpose()
}

/// `k_B(z; v)` on the ball of radius `radius` centred at 0.
pub fn ball_kobayashi_metric(radius: f64, z: &[Complex64], v: &[Complex64]) -> f64 {
    let z: CVec = z.iter().map(|x| x / radius).collect();
    let v: CVec = v.iter().map(|x| x / radius).collect();
    let gap = 1.0 - norm(&z).powi(2);
    (norm(&v).powi(2) / gap + inner(&z, &v).norm_sqr() / (gap * gap)).sqrt()
}

#[derive(Serialize)]
struct BoundRow {
    point: CVec,
    direction: CVec,
    bounds: Vec<KobayashiBound>,
    lower: f64,
    upper: f64,
    exact: Option<f64>,
}

fn kobayashi_bounds(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let dom = cfg.domain_or("ball")?;
    let tol = cfg.tol.unwrap_or(1e-9);
    report.tolerance("relative", tol);
    let n = dom.dim();
    let witness = dom.interior_witness().to_vec();
    let e1 = basis(n, 0);
    let exit = first_exit(&dom, &witness, &e1, 1e-13)?;
    let ball_radius = match dom.params() {
        Some(DomainParams::Ball { radius, .. }) => Some(*radius),
        _ => None,
    };
    let mut rows = Vec::new();
    for fraction in [0.0, 0.5, 0.9] {
        let z = numerics::along(&witness, c(fraction * exit, 0.0), &e1);
        for k in 0..n.min(2) {
            let v = basis(n, k);
            let mut bounds = vec![upper_disc(&dom, &z, &v)?];
            if dom.flags().convex {
                bounds.push(graham_bounds(&dom, &z, &v)?);
            }
            if let Some(r) = ball_radius {
                let cert = PshCertificate::new(Arc::new(move |w: &[Complex64]| numerics::norm(w).powi(2) / (r * r) - 1.0), 1.0 / (r * r))?;
                bounds.push(sibony_lower(&dom, &z, &v, &cert, ALPHA_UNIVERSAL_DEFAULT)?);
            }
            let lower = bounds.iter().map(|b| b.lower).fold(0.0, f64::max);
            let upper = bounds.iter().map(|b| b.upper).fold(f64::INFINITY, f64::min);
            for b in &bounds {
                report.expect(b.is_consistent(), format!("inconsistent {:?} bound at {fraction}·exit", b.provenance));
            }
            report.expect(lower <= upper * (1.0 + tol), format!("lower {lower} exceeds upper {upper} at {fraction}·exit"));
            let exact = ball_radius.map(|r| ball_kobayashi_metric(r, &z, &v));
            if let Some(k) = exact {
                report.expect(
                    lower <= k * (1.0 + tol) && k <= upper * (1.0 + tol),
                    format!("exact value {k} outside [{lower}, {upper}] at {fraction}·exit"),
                );
            }
            rows.push(BoundRow { point: z.clone(), direction: v, bounds, lower, upper, exact });
        }
    }
    report.result("rows", &rows)
}

fn holder_failure(cfg: &RunConfig, report: &mut Report, out: Option<&Path>) -> Result<()> {
    let dom = cfg.domain_or("omega_phi")?;
    let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidArgument("exponents must be positive".into()));
    }
    let table = holder_divergence(&dom, &flat_point_sequence(dom.dim(), 2..=16), &alphas)?;
    report.tolerance("divergence_slope", crate::kobayashi::DIVERGENCE_SLOPE);
    for v in &table.verdicts {
        report.expect(v.diverges, format!("ratio sequence for α = {} does not diverge", v.alpha));
    }
    if let Some(f) = csv_file(out, "holder-failure.csv")? {
        table.write_csv(f)?;
    }
    report.result("table", &table)
}

#[derive(Serialize)]
struct PullbackSample {
    point: CVec,
    coefficients: Vec<Vec<Complex64>>,
    density: f64,
    oracle_error: Option<f64>,
}

fn ma_pullback(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let name = cfg.map_name();
    let (source, field, symbolic) = match name {
        "example25" | "sqrt_lift" => (cfg.domain_or("example_D")?, HermitianField::cone_target_levi(), true),
        _ => (cfg.domain_or("ball")?, HermitianField::identity(make_map(name, cfg.n)?.target_dim()), false),
    };
    let map = make_map(name, source.dim())?;
    if map.source_dim() != source.dim() {
        return Err(Error::DimensionMismatch { expected: map.source_dim(), found: source.dim() });
    }
    let tol = cfg.tol.unwrap_or(1e-6);
    report.tolerance("coefficients", tol);
    report.tolerance("density", -1e-12);
    let mut rng = numerics::seeded_rng(cfg.seed_for(1));
    let points = source.sample_interior(&mut rng, 100);
    let mut samples = Vec::with_capacity(points.len());
    let mut worst: f64 = 0.0;
    for z in points {
        let a = pullback_field(&map, &field, &z)?;
        let density = ma_density(&a);
        report.expect(density >= -1e-12, format!("negative density {density}"));
        let oracle_error = symbolic.then(|| {
            let v = z[1].im;
            let expected = [[1.0, 0.0], [0.0, 0.5 + 3.0 * v * v]];
            let mut err: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    err = err.max((a[(i, j)] - c(expected[i][j], 0.0)).norm());
                }
            }
            err
        });
        if let Some(e) = oracle_error {
            worst = worst.max(e);
        }
        let coefficients = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect();
        samples.push(PullbackSample { point: z, coefficients, density, oracle_error });
    }
    report.expect(worst <= tol, format!("pullback coefficients deviate from the symbolic oracle by {worst}"));
    let lp = jacobian_lp_check(&map, &source, 3.0_f64.max(source.dim() as f64 + 1.0), cfg.budget.unwrap_or(4000), cfg.seed_for(2))?;
    report.expect(lp.pass, "Jacobian products fail the L^p stability check");
    report.result("max_oracle_error", &worst)?;
    report.result("samples", &samples)?;
    report.result("lp_check", &lp)
}

fn parse_solver(cfg: &RunConfig) -> Result<CanonicalSolver> {
    match cfg.solver.as_deref().unwrap_or("envelope") {
        "envelope" => Ok(CanonicalSolver::Envelope),
        "oracle" => Ok(CanonicalSolver::Oracle),
        other => Err(Error::InvalidArgument(format!("unknown solver `{other}` (expected envelope or oracle)"))),
    }
}

/// Dyadic scales `2^{-3} … 2^{-12}` of the canonical Hölder diagnostic.
pub fn canonical_scales() -> Vec<f64> {
    (3..=12).map(|k| 2f64.powi(-k)).collect()
}

fn canonical(cfg: &RunConfig, report: &mut Report, out: Option<&Path>) -> Result<()> {
    let dom = cfg.domain_or("omega_phi")?;
    let solver = parse_solver(cfg)?;
    let solution = canonical_function(&dom, solver)?;
    if let CanonicalSolution::Envelope(env) = &solution {
        let inv = env.check_invariants();
        report.tolerance("envelope_invariants", 1e-9);
        report.expect(inv.ok, format!("envelope invariants violated: {inv:?}"));
        report.result("invariants", &inv)?;
        if let Some(f) = csv_file(out, "canonical-log.csv")? {
            env.write_csv_log(f)?;
        }
        if let Some(f) = csv_file(out, "canonical-moduli.csv")? {
            env.write_csv_moduli(f)?;
        }
        report.result("modulus", &env.modulus)?;
    }
    let witness = dom.interior_witness().to_vec();
    let down = numerics::scale(&basis(dom.dim(), dom.dim() - 1), c(-1.0, 0.0));
    let t = first_exit(&dom, &witness, &down, 1e-14)?;
    let xi = numerics::along(&witness, c(t, 0.0), &down);
    let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![0.5, 1.0]);
    let fit = holder_fit(&|z| solution.eval(z), &dom, &xi, &canonical_scales(), &alphas, 3)?;
    let trend: Vec<f64> = fit.alpha_hat.iter().copied().filter(|a| a.is_finite()).collect();
    report.result("holder_fit", &fit)?;
    report.result("alpha_hat_non_increasing", &trend.windows(2).all(|w| w[1] <= w[0] + 1e-12))
}

#[derive(Serialize)]
struct ExtensionRow {
    xi: CVec,
    value: CVec,
    value_short: CVec,
    closed_form: CVec,
    error: f64,
    quadrature_error: f64,
    t_prime_gap: f64,
}

/// Boundary values `(√(ξ₁+1), ξ₂, 0)` of the square-root lift.
pub fn sqrt_lift_closed_form(xi: &[Complex64]) -> CVec {
    vec![(xi[0] + 1.0).sqrt(), xi[1], c(0.0, 0.0)]
}

fn extension_check(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let name = cfg.map_name();
    if !matches!(name, "example25" | "sqrt_lift") {
        return Err(Error::InvalidArgument(format!("extension-check supports the map example25, got `{name}`")));
    }
    let map = make_map(name, 2)?;
    let source = DomainSpec::cone_source();
    let target = DomainSpec::cone_target();
    let tol = cfg.tol.unwrap_or(1e-4);
    report.tolerance("closed_form", tol);
    report.tolerance("t_prime", 1e-6);

    let proper = properness_probe(&map, &source, &target, &cone_source_sequences(12))?;
    for (k, row) in proper.iter().enumerate() {
        report.expect(row.decays, format!("approach sequence {k} does not reach the target boundary"));
    }
    report.result("properness", &proper)?;

    let rho_target = |w: &[Complex64]| target.defining(w);
    let train_t = boundary_layer_samples(&target, 200, 1e-4, 2e-2, cfg.seed_for(10))?;
    let valid_t = boundary_layer_samples(&target, 200, 1e-4, 2e-2, cfg.seed_for(11))?;
    let hopf = hopf_fit(&rho_target, &target, &train_t, &valid_t, 0.5)?;
    report.expect(hopf.pass_rate == 1.0, format!("Hopf inequality holds at {:.1}% of held-out samples", 100.0 * hopf.pass_rate));
    let cone = cone_probe(&target, &train_t[..50], &ConeConfig { seed: cfg.seed_for(12), ..Default::default() })?;
    report.expect(
        hopf.alpha_hopf <= std::f64::consts::PI / cone.aperture + 0.25,
        format!("α_hopf = {} exceeds π/θ + 0.25 with θ = {}", hopf.alpha_hopf, cone.aperture),
    );
    report.result("hopf", &hopf)?;
    report.result("cone", &json!({"aperture": cone.aperture, "reach": cone.reach, "layer_depth": cone.layer_depth}))?;

    let chart = lipschitz_chart_fit(&source, &[c(0.0, 0.0), c(0.0, 0.0)], 0.2, 100, cfg.seed_for(13))?;
    let train_s = boundary_layer_samples(&source, 200, 1e-4, 2e-2, cfg.seed_for(14))?;
    let valid_s = boundary_layer_samples(&source, 200, 1e-4, 2e-2, cfg.seed_for(15))?;
    let s = default_target_exponent(target.dim());
    let mut analysis = exponent_chain(&map, &source, &target, &rho_target, s, &hopf, &train_s, &valid_s, chart.constant, 2.0)?;
    report.expect(
        analysis.validation.pass_rate == 1.0,
        format!("fitted chain fails at {} of {} held-out samples", analysis.validation.samples as f64 * (1.0 - analysis.validation.pass_rate), analysis.validation.samples),
    );
    report.result("chart_constant", &chart.constant)?;

    let patch = BoundaryPatch::cone_source(50, 0.05, cfg.seed_for(16))?;
    let s_tilde = analysis.constants.s_tilde;
    let mut rows = Vec::with_capacity(patch.points.len());
    for xi in &patch.points {
        let long = boundary_extend(&map, xi, &patch.inward, 0.1, s_tilde)?;
        let short = boundary_extend(&map, xi, &patch.inward, 0.05, s_tilde)?;
        let closed_form = sqrt_lift_closed_form(xi);
        let error = norm(&numerics::sub(&long.value, &closed_form));
        let t_prime_gap = norm(&numerics::sub(&long.value, &short.value));
        report.expect(error <= tol, format!("extension error {error} at ξ = {xi:?}"));
        report.expect(t_prime_gap <= 1e-6, format!("t′ disagreement {t_prime_gap} at ξ = {xi:?}"));
        analysis.extensions.push((xi.clone(), long.value.clone()));
        rows.push(ExtensionRow {
            xi: xi.clone(),
            value: long.value,
            value_short: short.value,
            closed_form,
            error,
            quadrature_error: long.error.max(short.error),
            t_prime_gap,
        });
    }
    let scan = extension_continuity_scan(&map, &analysis.constants, &patch, &[0.5, 0.1, 0.02])?;
    for row in &scan {
        report.expect(row.max_extension_gap < row.epsilon, format!("extension gap {} exceeds ε = {}", row.max_extension_gap, row.epsilon));
    }
    report.result("analysis", &analysis)?;
    report.result("extensions", &rows)?;
    report.result("scan", &scan)
}

/// Radii `1 − 2^{-k}`, `k = 2..=12`, used for distance fits along discs.
pub fn geodesic_radii() -> Vec<f64> {
    (2..=12).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

/// Radii `1 − 2^{-k/2}`, `k = 2..=24`, covering `[1/2, 1)` for derivative
/// bounds used from `r₀ = 1/2` outwards.
pub fn derivative_radii() -> Vec<f64> {
    (2..=24).map(|k| 1.0 - 2f64.powf(-(k as f64) / 2.0)).collect()
}

fn geodesic_extend(cfg: &RunConfig, report: &mut Report, out: Option<&Path>) -> Result<()> {
    let dom = cfg.domain_or("ball")?;
    let radius = match dom.params() {
        Some(DomainParams::Ball { radius, .. }) => *radius,
        _ => return Err(Error::InvalidArgument("geodesic-extend needs a ball domain".into())),
    };
    let n = dom.dim();
    let tol = cfg.tol.unwrap_or(1e-4);
    report.tolerance("boundary_values", tol);
    let p = vec![c(0.0, 0.0); n];
    let q = numerics::scale(&basis(n, 0), c(0.5 * radius, 0.0));
    let unit_p: CVec = p.iter().map(|x| x / radius).collect();
    let unit_q: CVec = q.iter().map(|x| x / radius).collect();
    let unit = ball_geodesic(&unit_p, &unit_q)?;
    let disc = if radius == 1.0 {
        unit
    } else {
        let (f, d) = (unit.clone(), unit);
        crate::geodesics::AnalyticDisc::new(
            "scaled ball geodesic",
            n,
            Arc::new(move |z| f.eval(z).iter().map(|x| x * radius).collect()),
            Arc::new(move |z| d.derivative(z).iter().map(|x| x * radius).collect()),
        )
    };
    let pairs: Vec<(Complex64, Complex64)> = [(0.0, 0.5), (0.3, -0.6), (0.1, 0.9)]
        .iter()
        .map(|&(a, b)| (c(a, 0.1), c(b, -0.2)))
        .collect();
    let defect = isometry_defect(&disc, &dom, &pairs)?;
    report.expect(defect.exact && defect.upper < 1e-8, format!("isometry defect {}", defect.upper));
    let fit = mercer_fit(&disc, &dom, &geodesic_radii(), 16)?;
    report.expect(fit.validation_violations == 0, "distance sandwich fails at validation radii");
    let sigmas = cfg.alphas.clone().unwrap_or_else(|| vec![0.25, 1.0]);
    let mut dini = Vec::new();
    for &sigma in &sigmas {
        let modulus = ModulusOfContinuity::power(1.0, sigma)?;
        let table = geodesic_derivative_bound(&disc, &dom, &modulus, &fit, None, &derivative_radii(), 16)?;
        let d = dini_check(&modulus, fit.c2, 1.0 / fit.beta, table.calibrated_c)?;
        report.expect(d.passes, format!("Dini check fails for ω(r) = r^{sigma}"));
        dini.push(json!({"sigma": sigma, "derivative_bound": table, "dini": d}));
    }
    let log_modulus = ModulusOfContinuity::power_log(1.0, 2.0)?;
    report.result("dini_log_modulus", &dini_check(&log_modulus, fit.c2, 1.0 / fit.beta, 1.0)?)?;

    let sigma = sigmas.iter().copied().fold(0.0, f64::max);
    let table = geodesic_derivative_bound(&disc, &dom, &ModulusOfContinuity::power(1.0, sigma)?, &fit, None, &derivative_radii(), 16)?;
    let majorant_c = fit.c2.powf(sigma / 2.0) / (0.9 * table.calibrated_c);
    let majorant = Majorant::Power { c: majorant_c, s: 1.0 - sigma / (2.0 * fit.beta) };
    let angles: Vec<f64> = (0..64).map(|k| std::f64::consts::TAU * k as f64 / 64.0).collect();
    let mut components = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let ext = hl_extend(&disc.component(j), &majorant, &angles, 0.5, 1e-10)?;
        for (theta, value) in angles.iter().zip(&ext.values) {
            worst = worst.max((value - disc.eval(Complex64::from_polar(1.0, *theta))[j]).norm());
        }
        components.push(ext);
    }
    report.expect(worst <= tol, format!("extended boundary values deviate by {worst}"));
    if let Some(f) = csv_file(out, "geodesic-extend.csv")? {
        let mut w = csv::Writer::from_writer(f);
        let mut header = vec!["theta".to_string()];
        for j in 0..n {
            header.push(format!("re_{j}"));
            header.push(format!("im_{j}"));
        }
        w.write_record(&header)?;
        for (k, theta) in angles.iter().enumerate() {
            let mut record = vec![format!("{theta:.17e}")];
            for ext in &components {
                record.push(format!("{:.17e}", ext.values[k].re));
                record.push(format!("{:.17e}", ext.values[k].im));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
    }
    report.result("isometry_defect", &defect)?;
    report.result("mercer", &fit)?;
    report.result("dini", &dini)?;
    report.result("majorant", &json!({"c": majorant_c, "s": 1.0 - sigma / (2.0 * fit.beta)}))?;
    report.result("max_boundary_error", &worst)?;
    report.result("boundary_values", &components)
}

fn peak(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let dom = cfg.domain_or("lens")?;
    let tol = cfg.tol.unwrap_or(1e-6);
    report.tolerance("value_at_peak", tol);
    report.tolerance("eta_drift", 0.2);
    let witness = dom.interior_witness().to_vec();
    let left = numerics::scale(&basis(dom.dim(), 0), c(-1.0, 0.0));
    let p = numerics::along(&witness, c(first_exit(&dom, &witness, &left, 1e-15)?, 0.0), &left);
    let pcfg = PeakConfig { seed: cfg.seed_for(20), ..Default::default() };
    let pf = peak_function(&dom, &p, &pcfg)?;
    report.expect(pf.value_at_peak.abs() <= tol, format!("u(p) = {}", pf.value_at_peak));
    report.expect(pf.eta > 0.0, format!("no strict separation: η = {}", pf.eta));
    report.expect(pf.eta_drift() <= 0.2, format!("η drifts by {:.1}% under sample doubling", 100.0 * pf.eta_drift()));
    report.expect(pf.hessian_min >= -1e-6, format!("Hessian eigenvalue {} is negative", pf.hessian_min));
    let mut rng = numerics::seeded_rng(cfg.seed_for(21));
    let samples: Vec<serde_json::Value> = dom
        .sample_boundary(&mut rng, 32)?
        .into_iter()
        .map(|z| {
            let u = pf.u(&z);
            json!({"point": z, "u": u})
        })
        .collect();
    report.result("p", &p)?;
    report.result("normal", &pf.frame.normal)?;
    report.result("shadow", &pf.map.shadow)?;
    report.result("map_quality", &pf.map.quality)?;
    report.result(
        "summary",
        &json!({
            "diameter": pf.diameter,
            "eta": pf.eta,
            "eta_doubled": pf.eta_doubled,
            "eta_drift": pf.eta_drift(),
            "max_off_peak": pf.max_off_peak,
            "value_at_peak": pf.value_at_peak,
            "hessian_min": pf.hessian_min,
        }),
    )?;
    report.result("u_samples", &samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_flags() {
        let cli = Cli::try_parse_from(["plurilab", "holder-failure", "--domain", "ball", "--seed", "3", "--alphas", "0.5,1"]).unwrap();
        let mut cfg = RunConfig::from_cli(&cli).unwrap();
        assert_eq!(cfg.alphas, Some(vec![0.5, 1.0]));
        cfg.apply_overrides("domain = \"omega_phi\"\nseed = 9\nalphas = [0.25, 1]\n").unwrap();
        assert_eq!(cfg.domain.as_deref(), Some("omega_phi"));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.alphas, Some(vec![0.25, 1.0]));
        assert!(matches!(cfg.apply_overrides("colour = 1"), Err(Error::Config(_))));
        assert!(matches!(cfg.apply_overrides("n = \"two\""), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_domain_exits_with_two() {
        let dir = std::env::temp_dir().join("plurilab-cli-unknown-domain");
        let out = dir.to_string_lossy().to_string();
        assert_eq!(main_with_args(["plurilab", "kobayashi-bounds", "--domain", "torus", "--out", &out]), 2);
        assert_eq!(main_with_args(["plurilab", "no-such-command"]), 2);
    }

    #[test]
    fn ball_metric_matches_poincare_on_the_axis() {
        for t in [0.0, 0.5, 0.9] {
            let k = ball_kobayashi_metric(1.0, &[c(t, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]);
            assert!((k - 1.0 / (1.0 - t * t)).abs() < 1e-14);
        }
        let k = ball_kobayashi_metric(2.0, &[c(1.0, 0.0)], &[c(1.0, 0.0)]);
        assert!((k - 0.5 / 0.75).abs() < 1e-14);
    }

    #[test]
    fn kobayashi_bounds_report_on_the_ball() {
        let report = execute(&RunConfig::new(Command::KobayashiBounds), None).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.results["rows"].as_array().unwrap().len(), 6);
    }
}
