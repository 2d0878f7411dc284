//! Subcommand dispatch.
//!
//! Exit-code contract: 0 when the requested verification passes, 1 when it
//! runs but fails, 2 for usage, parse, or input errors.

use crate::expr::parse_polynomial;
use crate::report::{csv_cell, to_json};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectify_core::bundle::{
    build_rectifier, bundle_from_ab, degree9_monomial_matrix, is_generic_54, is_simple,
    sample_directions, second_common_point, verify_rectification, CircleBundle, TangentParam,
    GENERIC_DIRECTIONS,
};
use rectify_core::fit::{circle_fit, line_residual};
use rectify_core::geom::SphereEq;
use rectify_core::metric::{
    chart_images, geodesic_integrate, path_or_partial, sectional_curvature, GeodesicPath,
    MetricField,
};
use rectify_core::nets::{
    classify_net, degenerate_det, degenerate_test, orthogonal_complement, GeometryClass, SphereNet,
};
use rectify_core::taylor::{
    closed_taylor, diagnostic_from_functions, identity_check_eq7, numeric_taylor, symmetry_check,
    TaylorError, Verdict,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

type Vec3 = Vector3<f64>;

const REPORT_VERSION: u32 = 1;
const DEFAULT_TOL: f64 = 1e-7;
const RECTIFY_RESIDUAL_TOL: f64 = 1e-6;
const NUMERIC_TAYLOR_TOL: f64 = 1e-6;
const CURVATURE_TOL: f64 = 1e-3;
const GEODESIC_CIRCLE_TOL: f64 = 1e-6;
const CHART_LINE_TOL: f64 = 1e-7;

#[derive(Parser)]
#[command(
    name = "rectify",
    version,
    about = "Circle bundles, rectification, sphere nets, and circular-geodesic metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, rectify, and test circle bundles.
    #[command(subcommand)]
    Bundle(BundleCmd),
    /// Taylor-coefficient identities and rectifiability diagnostics.
    #[command(subcommand)]
    Taylor(TaylorCmd),
    /// Sphere nets: classification and degenerate loci.
    #[command(subcommand)]
    Net(NetCmd),
    /// Metric verification: geodesics, curvature, the full suite.
    #[command(subcommand)]
    Metric(MetricCmd),
}

#[derive(Subcommand)]
enum BundleCmd {
    /// Generate a bundle from coefficient polynomials A(k,m), B(k,m).
    Gen(BundleGenArgs),
    /// Find the second common point and verify the rectifying inversion.
    Rectify(BundleRectifyArgs),
    /// Rank test: do the first 54 directions pin a unique degree-9 cone?
    Genericity(GenericityArgs),
}

#[derive(Subcommand)]
enum TaylorCmd {
    /// Closed forms vs numeric extraction, order-3 identities,
    /// divisibility, and the linear-coefficient constraints.
    Verify(TaylorVerifyArgs),
}

#[derive(Subcommand)]
enum NetCmd {
    /// Classify a net into the hyperbolic / Euclidean / elliptic family.
    Classify(NetClassifyArgs),
    /// Sample the degeneracy determinant over a box.
    Degenerate(NetDegenerateArgs),
}

#[derive(Subcommand)]
enum MetricCmd {
    /// Integrate one geodesic and write the sampled path.
    Geodesic(GeodesicArgs),
    /// Sample sectional curvature at seeded points and planes.
    Curvature(CurvatureArgs),
    /// Full suite: geodesics are circles, chart images are lines,
    /// curvature is the expected constant.
    CheckBeltrami(CheckBeltramiArgs),
}

#[derive(Args)]
struct BundleGenArgs {
    /// Coefficient polynomial A(k,m), e.g. "2*k + 1".
    #[arg(long = "A")]
    a: String,
    /// Coefficient polynomial B(k,m), e.g. "2*m + 3".
    #[arg(long = "B")]
    b: String,
    /// Number of tangent directions, sampled uniformly from [-2,2]².
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BundleRectifyArgs {
    /// Bundle JSON produced by `bundle gen`.
    bundle: PathBuf,
    /// Detection tolerance, in units of the bundle's geometric scale.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Sample points per member during verification.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenericityArgs {
    /// Bundle JSON or a directions file {"dirs":[[k,m],...]}.
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TaylorVerifyArgs {
    #[arg(long = "A")]
    a: String,
    #[arg(long = "B")]
    b: String,
    /// Grid size (at least 54).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NetClassifyArgs {
    /// Net JSON {"spheres":[...x4]}.
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NetDegenerateArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GeodesicArgs {
    /// One of: euclidean, klein-hyperbolic, gnomonic-elliptic,
    /// circular-hyperbolic, circular-elliptic.
    #[arg(long)]
    metric: String,
    /// Start point "x,y,z".
    #[arg(long = "x0")]
    x0: String,
    /// Initial velocity "x,y,z".
    #[arg(long = "v0")]
    v0: String,
    /// Total integration time.
    #[arg(long = "T", default_value_t = 2.0)]
    total_time: f64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CurvatureArgs {
    #[arg(long)]
    metric: String,
    /// Seeded sample points (3 planes each).
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckBeltramiArgs {
    #[arg(long)]
    metric: String,
    /// Seeded geodesics and curvature points.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Runs the CLI on the given argv and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let is_usage_error = e.use_stderr();
            let _ = e.print();
            return if is_usage_error { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Bundle(BundleCmd::Gen(args)) => bundle_gen(args),
        Command::Bundle(BundleCmd::Rectify(args)) => bundle_rectify(args),
        Command::Bundle(BundleCmd::Genericity(args)) => bundle_genericity(args),
        Command::Taylor(TaylorCmd::Verify(args)) => taylor_verify(args),
        Command::Net(NetCmd::Classify(args)) => net_classify(args),
        Command::Net(NetCmd::Degenerate(args)) => net_degenerate(args),
        Command::Metric(MetricCmd::Geodesic(args)) => metric_geodesic(args),
        Command::Metric(MetricCmd::Curvature(args)) => metric_curvature(args),
        Command::Metric(MetricCmd::CheckBeltrami(args)) => metric_check_beltrami(args),
    }
}

fn emit(output: &Option<PathBuf>, contents: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, contents)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn parse_vec3(text: &str) -> Result<Vec3> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        bail!("expected three comma-separated components, got {text:?}");
    }
    let mut v = Vec3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.trim().parse::<f64>().with_context(|| format!("bad component {p:?}"))?;
    }
    Ok(v)
}

fn parse_metric(name: &str) -> Result<MetricField> {
    name.parse::<MetricField>().map_err(|e| anyhow::anyhow!(e))
}

fn tolerances(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn ball_point<R: Rng>(rng: &mut R, radius: f64) -> Vec3 {
    loop {
        let p = Vec3::new(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if p.norm() < radius {
            return p;
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = ball_point(rng, 1.0);
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

// ---------------------------------------------------------------- bundle

fn bundle_gen(args: BundleGenArgs) -> Result<bool> {
    let a = parse_polynomial(&args.a).with_context(|| format!("in --A {:?}", args.a))?;
    let b = parse_polynomial(&args.b).with_context(|| format!("in --B {:?}", args.b))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let dirs = sample_directions(&mut rng, args.n, -2.0, 2.0);
    let bundle = bundle_from_ab(&a, &b, &dirs)?;
    emit(&args.output, &to_json(&bundle))?;
    Ok(true)
}

#[derive(Serialize)]
struct RectifyReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    simple: bool,
    second_point: Option<[f64; 3]>,
    residuals: Vec<f64>,
    max_residual: f64,
    rectifiable: bool,
}

fn bundle_rectify(args: BundleRectifyArgs) -> Result<bool> {
    let bundle: CircleBundle = read_json(&args.bundle)?;
    let simple = is_simple(&bundle);
    let mut report = RectifyReport {
        version: REPORT_VERSION,
        seed: 0,
        tolerances: tolerances(&[("tol", args.tol), ("residual", RECTIFY_RESIDUAL_TOL)]),
        simple,
        second_point: None,
        residuals: Vec::new(),
        max_residual: 0.0,
        rectifiable: false,
    };
    if simple {
        if let Some(q) = second_common_point(&bundle, args.tol)? {
            let inv = build_rectifier(q);
            let verification = verify_rectification(&bundle, &inv, args.samples, args.tol)?;
            report.second_point = Some([q.x, q.y, q.z]);
            report.max_residual = verification.max_residual;
            report.residuals = verification.per_circle_residual;
            report.rectifiable = verification.max_residual < RECTIFY_RESIDUAL_TOL;
        }
    }
    let pass = report.rectifiable;
    emit(&args.output, &to_json(&report))?;
    Ok(pass)
}

#[derive(Serialize, Deserialize)]
struct DirsFile {
    dirs: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct GenericityReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    directions: usize,
    rank: usize,
    generic: bool,
}

fn load_directions(path: &Path) -> Result<Vec<TangentParam>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if let Ok(dirs) = serde_json::from_str::<DirsFile>(&text) {
        return Ok(dirs.dirs.iter().map(|&[k, m]| TangentParam { k, m }).collect());
    }
    let bundle: CircleBundle = serde_json::from_str(&text)
        .with_context(|| format!("{} is neither a dirs file nor a bundle", path.display()))?;
    Ok(bundle.members.iter().map(|m| m.tangent).collect())
}

fn bundle_genericity(args: GenericityArgs) -> Result<bool> {
    let dirs = load_directions(&args.input)?;
    if dirs.len() < GENERIC_DIRECTIONS {
        bail!("genericity test needs {} directions, got {}", GENERIC_DIRECTIONS, dirs.len());
    }
    let head = &dirs[..GENERIC_DIRECTIONS];
    let generic = is_generic_54(head)?;
    let svd = degree9_monomial_matrix(head).svd(false, false);
    let smax = svd.singular_values[0];
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
    let report = GenericityReport {
        version: REPORT_VERSION,
        seed: 0,
        tolerances: tolerances(&[("rank", 1e-12)]),
        directions: dirs.len(),
        rank,
        generic,
    };
    emit(&args.output, &to_json(&report))?;
    Ok(generic)
}

// ---------------------------------------------------------------- taylor

#[derive(Serialize)]
struct TaylorReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    closed_vs_numeric_max_rel: f64,
    order3_identity_zero: bool,
    fit_residuals: [f64; 6],
    remainders: [f64; 2],
    recovered: [f64; 3],
    constraint_violations: [f64; 3],
    symmetry_pass: Option<bool>,
    verdict: Verdict,
}

fn taylor_verify(args: TaylorVerifyArgs) -> Result<bool> {
    let a = parse_polynomial(&args.a).with_context(|| format!("in --A {:?}", args.a))?;
    let b = parse_polynomial(&args.b).with_context(|| format!("in --B {:?}", args.b))?;
    if args.grid < GENERIC_DIRECTIONS {
        bail!("--grid must be at least {GENERIC_DIRECTIONS}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let grid = sample_directions(&mut rng, args.grid, -2.0, 2.0);

    let diagnostic =
        diagnostic_from_functions(|k, m| a.eval_f64(k, m), |k, m| b.eval_f64(k, m), &grid)?;

    let (r_phi, r_psi) = identity_check_eq7(&a, &b);
    let identity_zero = r_phi.is_zero() && r_psi.is_zero();

    // Numeric extraction against the closed forms on a slice of the grid.
    let closed = closed_taylor(&a, &b);
    let mut max_rel = 0.0f64;
    for &dir in grid.iter().take(16) {
        let member = bundle_from_ab(&a, &b, &[dir])?;
        let est = numeric_taylor(&member.members[0].curve, dir)?;
        let exact = closed.eval(dir.k, dir.m);
        for (got, want) in est.as_array().iter().zip(exact.as_array()) {
            max_rel = max_rel.max((got - want).abs() / want.abs().max(1.0));
        }
    }

    let symmetry_pass = match symmetry_check(&a, &b) {
        Ok(report) => Some(report.passes()),
        Err(TaylorError::DegreeTooHigh(_)) => None,
        Err(e) => return Err(e.into()),
    };

    let numeric_ok = max_rel < NUMERIC_TAYLOR_TOL;
    let verdict = if diagnostic.verdict == Verdict::Rectifiable && identity_zero && numeric_ok {
        Verdict::Rectifiable
    } else {
        Verdict::NotRectifiable
    };
    let report = TaylorReport {
        version: REPORT_VERSION,
        seed: args.seed,
        tolerances: tolerances(&[
            ("numeric", NUMERIC_TAYLOR_TOL),
            ("fit", rectify_core::taylor::DIAGNOSTIC_FIT_TOL),
            ("constraint", rectify_core::taylor::DIAGNOSTIC_CONSTRAINT_TOL),
        ]),
        closed_vs_numeric_max_rel: max_rel,
        order3_identity_zero: identity_zero,
        fit_residuals: diagnostic.fit_residuals,
        remainders: diagnostic.remainders,
        recovered: diagnostic.recovered,
        constraint_violations: diagnostic.constraint_violations,
        symmetry_pass,
        verdict,
    };
    let pass = verdict == Verdict::Rectifiable;
    emit(&args.output, &to_json(&report))?;
    Ok(pass)
}

// ------------------------------------------------------------------- net

#[derive(Serialize)]
struct ClassifyReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    class: GeometryClass,
    #[serde(rename = "S0")]
    s0: SphereEq,
    disc: f64,
}

fn net_classify(args: NetClassifyArgs) -> Result<bool> {
    let net: SphereNet = read_json(&args.input)?;
    let s0 = orthogonal_complement(&net);
    let report = ClassifyReport {
        version: REPORT_VERSION,
        seed: 0,
        tolerances: tolerances(&[("disc", rectify_core::nets::CLASS_DISC_TOL)]),
        class: classify_net(&net),
        disc: s0.normalized().disc(),
        s0,
    };
    emit(&args.output, &to_json(&report))?;
    Ok(true)
}

fn net_degenerate(args: NetDegenerateArgs) -> Result<bool> {
    let net: SphereNet = read_json(&args.input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut csv = String::from("x,y,z,det,degenerate\n");
    for _ in 0..args.samples {
        let p = Vec3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let det = degenerate_det(&net, p);
        let flag = degenerate_test(&net, p);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_cell(p.x),
            csv_cell(p.y),
            csv_cell(p.z),
            csv_cell(det),
            u8::from(flag)
        ));
    }
    emit(&args.output, &csv)?;
    Ok(true)
}

// ---------------------------------------------------------------- metric

fn metric_geodesic(args: GeodesicArgs) -> Result<bool> {
    let metric = parse_metric(&args.metric)?;
    let x0 = parse_vec3(&args.x0)?;
    let v0 = parse_vec3(&args.v0)?;
    let result = geodesic_integrate(metric, x0, v0, args.total_time, args.steps);
    let path = match result {
        Ok(path) => path,
        Err(abort) => {
            if abort.partial.samples.is_empty() {
                bail!("cannot start integration: {}", abort.cause);
            }
            eprintln!("note: {abort}");
            abort.partial
        }
    };
    emit(&args.output, &path_csv(&path))?;
    Ok(true)
}

fn path_csv(path: &GeodesicPath) -> String {
    let mut csv = String::from("t,x,y,z,vx,vy,vz\n");
    for s in &path.samples {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_cell(s.t),
            csv_cell(s.x[0]),
            csv_cell(s.x[1]),
            csv_cell(s.x[2]),
            csv_cell(s.v[0]),
            csv_cell(s.v[1]),
            csv_cell(s.v[2])
        ));
    }
    csv
}

#[derive(Serialize)]
struct CurvatureSample {
    x: [f64; 3],
    #[serde(rename = "K")]
    k: f64,
}

#[derive(Serialize)]
struct CurvatureReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    metric: String,
    expected: f64,
    samples: Vec<CurvatureSample>,
    mean: f64,
    stddev: f64,
}

fn curvature_sweep(
    metric: MetricField,
    points: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CurvatureSample>> {
    let radius = 0.8f64.min(0.9 * metric.domain_radius());
    let mut samples = Vec::with_capacity(points * 3);
    for _ in 0..points {
        let x = ball_point(rng, radius);
        for _ in 0..3 {
            let (u, v) = loop {
                let u = random_unit(rng);
                let v = random_unit(rng);
                if u.cross(&v).norm() > 1e-2 {
                    break (u, v);
                }
            };
            let k = sectional_curvature(metric, x, u, v)?;
            samples.push(CurvatureSample { x: [x.x, x.y, x.z], k });
        }
    }
    Ok(samples)
}

fn mean_stddev(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn metric_curvature(args: CurvatureArgs) -> Result<bool> {
    let metric = parse_metric(&args.metric)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let samples = curvature_sweep(metric, args.samples, &mut rng)?;
    let (mean, stddev) = mean_stddev(samples.iter().map(|s| s.k));
    let expected = metric.expected_curvature();
    let report = CurvatureReport {
        version: REPORT_VERSION,
        seed: args.seed,
        tolerances: tolerances(&[("mean", CURVATURE_TOL), ("stddev", CURVATURE_TOL)]),
        metric: metric.to_string(),
        expected,
        samples,
        mean,
        stddev,
    };
    let pass = (mean - expected).abs() < CURVATURE_TOL && stddev < CURVATURE_TOL;
    emit(&args.output, &to_json(&report))?;
    Ok(pass)
}

#[derive(Serialize)]
struct BeltramiReport {
    version: u32,
    seed: u64,
    tolerances: BTreeMap<String, f64>,
    metric: String,
    expected_curvature: f64,
    geodesics: usize,
    completed_geodesics: usize,
    max_circle_rms: f64,
    max_chart_line_residual: f64,
    curvature_mean: f64,
    curvature_stddev: f64,
    geodesics_are_circles: bool,
    chart_images_are_lines: bool,
    curvature_is_constant: bool,
    pass: bool,
}

fn metric_check_beltrami(args: CheckBeltramiArgs) -> Result<bool> {
    let metric = parse_metric(&args.metric)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let chart = metric.rectifying_map();

    let mut completed = 0;
    let mut max_rms = 0.0f64;
    let mut max_line = 0.0f64;
    for _ in 0..args.samples {
        let x0 = ball_point(&mut rng, 0.7);
        let v0 = random_unit(&mut rng);
        let result = geodesic_integrate(metric, x0, v0, 2.0, 2000);
        if result.is_ok() {
            completed += 1;
        }
        let path = path_or_partial(result);
        let (_, rms) = circle_fit(&path.positions())?;
        max_rms = max_rms.max(rms);
        let images = chart_images(&path, &chart)?;
        max_line = max_line.max(line_residual(&images)?);
    }

    let samples = curvature_sweep(metric, args.samples, &mut rng)?;
    let (mean, stddev) = mean_stddev(samples.iter().map(|s| s.k));
    let expected = metric.expected_curvature();

    let geodesics_are_circles = max_rms < GEODESIC_CIRCLE_TOL;
    let chart_images_are_lines = max_line < CHART_LINE_TOL;
    let curvature_is_constant = (mean - expected).abs() < CURVATURE_TOL && stddev < CURVATURE_TOL;
    let pass = geodesics_are_circles && chart_images_are_lines && curvature_is_constant;
    let report = BeltramiReport {
        version: REPORT_VERSION,
        seed: args.seed,
        tolerances: tolerances(&[
            ("circle_rms", GEODESIC_CIRCLE_TOL),
            ("chart_line", CHART_LINE_TOL),
            ("mean", CURVATURE_TOL),
            ("stddev", CURVATURE_TOL),
        ]),
        metric: metric.to_string(),
        expected_curvature: expected,
        geodesics: args.samples,
        completed_geodesics: completed,
        max_circle_rms: max_rms,
        max_chart_line_residual: max_line,
        curvature_mean: mean,
        curvature_stddev: stddev,
        geodesics_are_circles,
        chart_images_are_lines,
        curvature_is_constant,
        pass,
    };
    emit(&args.output, &to_json(&report))?;
    Ok(pass)
}
