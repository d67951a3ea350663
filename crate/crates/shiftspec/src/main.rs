//! Command-line front end: analyze weight sequences, compute local
//! spectra and membership sweeps, and render report plots.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use shiftspec::classify::{
    approximate_point_spectrum, classify_all, local_spectrum, spectrum, svep,
    svep_adjoint_failure_region, ClassifyError, VectorSpec,
};
use shiftspec::corpus;
use shiftspec::oracle::{
    self, adjoint_kernel_residual, contour_reconstruct, eigenvector_residual, power_norms,
    resolvent_recurrence, Membership, OracleError,
};
use shiftspec::radii::{compute_radii, RadiiError, RadiiOptions, RadiiReport};
use shiftspec::report::{
    convergence_traces_csv, report_svg, AnalysisReport, InputEcho, OracleCheck, Regions, Timings,
    WeightSpecFile, SCHEMA_VERSION,
};
use shiftspec::weights::{build_beta, Side, WeightError, WeightSequence};

#[derive(Parser)]
#[command(name = "shiftspec", version, about = "Spectral analysis of weighted shift operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute radii, regions, and classifications for a weight sequence.
    Analyze(AnalyzeArgs),
    /// Compute the local spectrum of a vector, optionally with a
    /// lambda-grid membership sweep.
    Local(LocalArgs),
    /// Render an analysis report as SVG regions and CSV traces.
    Plot(PlotArgs),
}

#[derive(Args)]
struct WeightSource {
    /// Registry construction id (s_a, periodic, hyponormal_step,
    /// atzmon, ridge, ki_gap, square_zeros, reciprocal_step).
    #[arg(long, conflicts_with = "spec")]
    corpus: Option<String>,
    /// Path to a weight-spec JSON file {schema, side, structure, bound}.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Construction parameters as a comma list (s_a: a; periodic: the
    /// period entries).
    #[arg(long)]
    params: Option<String>,
    /// Estimation horizon: N (unilateral) or N,N (bilateral).
    #[arg(long)]
    horizon: Option<String>,
    /// Accuracy target for the numerical-radius eigensolve.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: WeightSource,
    /// Run the truncation oracles against the analytic results.
    #[arg(long)]
    verify: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    source: WeightSource,
    /// Vector spec as inline JSON, or @path to a JSON file; defaults to
    /// the basis vector e_0.
    #[arg(long)]
    vector: Option<String>,
    /// Comma list of circle radii for a membership sweep.
    #[arg(long)]
    grid: Option<String>,
    /// Points per grid circle.
    #[arg(long, default_value_t = 40)]
    points: usize,
    /// Write the sweep CSV here (the local-spectrum report always goes
    /// to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Analysis report JSON produced by `analyze`.
    report: PathBuf,
    /// Output SVG path.
    #[arg(long, default_value = "regions.svg")]
    out_svg: PathBuf,
    /// Output CSV path for convergence traces.
    #[arg(long, default_value = "traces.csv")]
    out_csv: PathBuf,
}

// Exit codes: 0 ok, 2 spec, 3 horizon, 4 svep, 5 internal.
#[derive(Debug)]
enum CliError {
    Spec(String),
    Horizon(String),
    Svep(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Horizon(_) => 3,
            CliError::Svep(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Spec(m) | CliError::Horizon(m) | CliError::Svep(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::HorizonMismatch { .. } => CliError::Horizon(e.to_string()),
            other => CliError::Spec(other.to_string()),
        }
    }
}

impl From<RadiiError> for CliError {
    fn from(e: RadiiError) -> Self {
        match e {
            RadiiError::InsufficientHorizon { .. } | RadiiError::TruncationTooSmall(_) => {
                CliError::Horizon(e.to_string())
            }
            RadiiError::Weight(w) => w.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::SvepViolated { .. } => CliError::Svep(e.to_string()),
            other => CliError::Spec(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Spec(e.to_string())
    }
}

fn thread_cap() -> usize {
    std::env::var("SHIFTSPEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn parse_horizon(raw: &Option<String>, side: Side) -> Result<(usize, usize), CliError> {
    let default = match side {
        Side::Unilateral => (0, 4096),
        Side::Bilateral => (2048, 2048),
    };
    let Some(raw) = raw else { return Ok(default) };
    let parts: Vec<&str> = raw.split(',').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Horizon(format!("invalid horizon component `{s}`")))
    };
    match (parts.as_slice(), side) {
        ([n], Side::Unilateral) => Ok((0, parse(n)?)),
        ([n], Side::Bilateral) => {
            let h = parse(n)?;
            Ok((h, h))
        }
        ([a, b], _) => Ok((parse(a)?, parse(b)?)),
        _ => Err(CliError::Horizon(format!("invalid horizon `{raw}`"))),
    }
}

fn parse_params(id: &str, raw: &Option<String>) -> Result<Vec<(String, f64)>, CliError> {
    let Some(raw) = raw else { return Ok(vec![]) };
    let values: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Spec(format!("invalid --params `{raw}`: {e}")))?;
    match id {
        "s_a" => {
            if values.len() != 1 {
                return Err(CliError::Spec("s_a takes exactly one parameter".into()));
            }
            Ok(vec![("a".into(), values[0])])
        }
        "periodic" => Ok(values
            .iter()
            .enumerate()
            .map(|(i, &v)| (format!("p{i}"), v))
            .collect()),
        other => Err(CliError::Spec(format!(
            "construction `{other}` takes no parameters"
        ))),
    }
}

struct LoadedInput {
    weight: WeightSequence,
    corpus_entry: Option<corpus::CorpusEntry>,
    horizon: (usize, usize),
    opts: RadiiOptions,
}

fn load_input(source: &WeightSource) -> Result<LoadedInput, CliError> {
    let (weight, corpus_entry) = if let Some(id) = &source.corpus {
        let entry = corpus::find_entry(id)
            .ok_or_else(|| CliError::Spec(format!("unknown corpus id `{id}`")))?;
        let params = parse_params(id, &source.params)?;
        let weight = if params.is_empty() {
            entry.weight().map_err(CliError::from)?
        } else {
            shiftspec::weights::named_weight(id, &params)?
        };
        (weight, Some(entry))
    } else if let Some(path) = &source.spec {
        let text = std::fs::read_to_string(path)?;
        let file: WeightSpecFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Spec(format!("invalid weight spec: {e}")))?;
        if file.schema != SCHEMA_VERSION {
            return Err(CliError::Spec(format!(
                "unsupported schema version {}",
                file.schema
            )));
        }
        (file.weight, None)
    } else {
        return Err(CliError::Spec(
            "one of --corpus or --spec is required".into(),
        ));
    };

    let horizon = match (&source.horizon, &corpus_entry) {
        (None, Some(entry)) => entry.horizon,
        (raw, _) => parse_horizon(raw, weight.side)?,
    };
    let mut opts = RadiiOptions::new(horizon);
    if let (Some(entry), None) = (&corpus_entry, &source.horizon) {
        opts = entry.options();
    }
    if let Some(tol) = source.tol {
        opts.w_tol = tol;
    }
    Ok(LoadedInput {
        weight,
        corpus_entry,
        horizon,
        opts,
    })
}

fn analyzed_radii(input: &LoadedInput) -> Result<RadiiReport, CliError> {
    let mut radii = compute_radii(&input.weight, &input.opts)?;
    if let Some(entry) = &input.corpus_entry {
        corpus::apply_pins(&mut radii, &entry.pinned);
    }
    Ok(radii)
}

fn verify_checks(
    input: &LoadedInput,
    radii: &RadiiReport,
) -> Result<Vec<OracleCheck>, CliError> {
    let mut checks = Vec::new();
    let horizon = match input.weight.side {
        Side::Unilateral => (0, input.horizon.0.max(input.horizon.1)),
        Side::Bilateral => input.horizon,
    };
    let beta = build_beta(&input.weight, horizon)?;

    checks.push(OracleCheck {
        name: "radius-chain".into(),
        passed: radii.chain_ok,
        value: if radii.chain_ok { 1.0 } else { 0.0 },
        detail: "ordering invariants on the computed radii".into(),
    });

    // power norms of e_0 reproduce the r3 estimator over the same window
    if beta.nplus >= 64 {
        let x = VectorSpec::basis_vector(0);
        if let Ok(norms) = power_norms(&beta, &x, beta.nplus) {
            let est = norms
                .root_estimates
                .iter()
                .skip(beta.nplus.div_ceil(2))
                .cloned()
                .fold(0.0f64, f64::max);
            let raw_r3 = shiftspec::radii::estimate_r2_r3(&beta, shiftspec::radii::SideSign::Plus)
                .map(|(_, r3)| r3.value)
                .unwrap_or(est);
            let rel = (est - raw_r3).abs() / raw_r3.max(1.0);
            checks.push(OracleCheck {
                name: "power-norms-vs-r3".into(),
                passed: rel <= 1e-9,
                value: rel,
                detail: format!("tail-window limsup of ||S^n e_0||^(1/n) = {est:.9} vs r3 estimate {raw_r3:.9}"),
            });
        }
    }

    match input.weight.side {
        Side::Unilateral => {
            if radii.r.value > 0.0 {
                // contour reconstruction outside the spectrum
                let x = VectorSpec::Explicit {
                    start: 0,
                    coeffs: vec![1.0, 1.0],
                };
                match contour_reconstruct(&beta, &x, 1.5 * radii.r.value.max(1.0), 256) {
                    Ok((_, dist)) => checks.push(OracleCheck {
                        name: "contour-reconstruction".into(),
                        passed: dist <= 1e-8,
                        value: dist,
                        detail: "l2 distance of the reconstructed e_0 + e_1".into(),
                    }),
                    Err(e) => checks.push(OracleCheck {
                        name: "contour-reconstruction".into(),
                        passed: false,
                        value: f64::NAN,
                        detail: e.to_string(),
                    }),
                }
                // resolvent membership far outside the spectrum
                let lambda = Complex64::new(2.0 * radii.r.value.max(0.5), 0.0);
                match resolvent_recurrence(&beta, &VectorSpec::basis_vector(0), lambda, beta.nplus / 4)
                {
                    Ok(v) => checks.push(OracleCheck {
                        name: "resolvent-outside".into(),
                        passed: v.decision == Membership::InLocalResolvent,
                        value: v.tail_log10_max,
                        detail: format!("lambda = {:.4}: {:?}", lambda.re, v.decision),
                    }),
                    Err(e) => checks.push(OracleCheck {
                        name: "resolvent-outside".into(),
                        passed: false,
                        value: f64::NAN,
                        detail: e.to_string(),
                    }),
                }
            }
        }
        Side::Bilateral => {
            let minus = radii.minus.as_ref().expect("bilateral radii");
            let (r2m, r3p) = (minus.r2.value, radii.plus.r3.value);
            if r2m > r3p * (1.0 + 1e-6) && r3p > 0.0 {
                // the eigenvector series converges inside the failure annulus
                let lambda = Complex64::new((r2m * r3p).sqrt(), 0.0);
                let trunc = beta.nplus.min(beta.nminus).saturating_sub(2).min(200);
                match eigenvector_residual(&beta, lambda, trunc) {
                    Ok(res) => checks.push(OracleCheck {
                        name: "eigenvector-residual".into(),
                        passed: res <= 1e-6,
                        value: res,
                        detail: format!("lambda = {:.4} inside the failure annulus", lambda.re),
                    }),
                    Err(e) => checks.push(OracleCheck {
                        name: "eigenvector-residual".into(),
                        passed: false,
                        value: f64::NAN,
                        detail: e.to_string(),
                    }),
                }
            }
            let (r3m, r2p) = (minus.r3.value, radii.plus.r2.value);
            if r2p > r3m * (1.0 + 1e-6) {
                // the adjoint kernel exists between r3_minus and r2_plus
                let lambda = Complex64::new((r3m.max(1e-6) * r2p).sqrt(), 0.0);
                let trunc = beta.nplus.min(beta.nminus).saturating_sub(2).min(200);
                match adjoint_kernel_residual(&beta, lambda, trunc) {
                    Ok(res) => checks.push(OracleCheck {
                        name: "adjoint-kernel-residual".into(),
                        passed: res <= 1e-6,
                        value: res,
                        detail: format!("lambda = {:.4} inside the adjoint annulus", lambda.re),
                    }),
                    Err(e) => checks.push(OracleCheck {
                        name: "adjoint-kernel-residual".into(),
                        passed: false,
                        value: f64::NAN,
                        detail: e.to_string(),
                    }),
                }
            }
        }
    }
    Ok(checks)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let input = load_input(&args.source)?;
    let t0 = Instant::now();
    let radii = analyzed_radii(&input)?;
    let radii_ms = t0.elapsed().as_millis() as u64;

    let t1 = Instant::now();
    let classification = classify_all(&radii, &input.weight)?;
    let (aps, caveat) = approximate_point_spectrum(&radii);
    let (_, _, failure) = svep(&radii);
    let regions = Regions {
        spectrum: spectrum(&radii),
        approximate_point_spectrum: aps,
        approximate_point_spectrum_caveat: caveat,
        svep_failure: failure,
        svep_adjoint_failure: svep_adjoint_failure_region(&radii),
    };
    let classify_ms = t1.elapsed().as_millis() as u64;

    let t2 = Instant::now();
    let oracle_checks = if args.verify {
        verify_checks(&input, &radii)?
    } else {
        vec![]
    };
    let oracle_ms = t2.elapsed().as_millis() as u64;

    let report = AnalysisReport {
        schema: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input: InputEcho {
            corpus_id: input.corpus_entry.as_ref().map(|e| e.id.to_string()),
            weight: input.weight.clone(),
            horizon: input.horizon,
            n_max: input.opts.n_max,
            k_max: input.opts.k_max,
        },
        radii,
        regions,
        classification,
        annotations: input
            .corpus_entry
            .as_ref()
            .map(|e| e.annotations.clone())
            .unwrap_or_default(),
        local_spectra: vec![],
        oracle_checks,
        timings: Timings {
            radii_ms,
            classify_ms,
            oracle_ms,
        },
    };

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    if report.oracle_checks.iter().any(|c| !c.passed) {
        return Err(CliError::Internal(
            "one or more oracle cross-checks failed; see the report".into(),
        ));
    }
    Ok(())
}

fn parse_vector(raw: &Option<String>) -> Result<VectorSpec, CliError> {
    let Some(raw) = raw else {
        return Ok(VectorSpec::basis_vector(0));
    };
    let text = if let Some(path) = raw.strip_prefix('@') {
        std::fs::read_to_string(path)?
    } else {
        raw.clone()
    };
    serde_json::from_str(&text).map_err(|e| CliError::Spec(format!("invalid vector spec: {e}")))
}

fn membership_sweep(
    beta: &shiftspec::weights::BetaCache,
    x: &VectorSpec,
    radii_list: &[f64],
    points: usize,
) -> Result<String, CliError> {
    let n_max = (beta.nplus / 4).max(32);
    let mut grid: Vec<Complex64> = Vec::new();
    for &r in radii_list {
        for j in 0..points {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
            grid.push(Complex64::from_polar(r, theta));
        }
    }
    let threads = thread_cap().min(grid.len()).max(1);
    let chunk = grid.len().div_ceil(threads);
    let mut rows: Vec<Option<oracle::MembershipVerdict>> = vec![None; grid.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (t, lambdas) in grid.chunks(chunk).enumerate() {
            let x = x.clone();
            handles.push((
                t,
                scope.spawn(move || {
                    lambdas
                        .iter()
                        .map(|&l| resolvent_recurrence(beta, &x, l, n_max))
                        .collect::<Vec<_>>()
                }),
            ));
        }
        for (t, handle) in handles {
            for (i, res) in handle.join().expect("sweep thread").into_iter().enumerate() {
                rows[t * chunk + i] = res.ok();
            }
        }
    });
    let mut csv = String::from("re,im,decision,tail_log10_max,tail_log10_min\n");
    for (lambda, row) in grid.iter().zip(rows.iter()) {
        match row {
            Some(v) => {
                let d = match v.decision {
                    Membership::InLocalResolvent => "in_local_resolvent",
                    Membership::InLocalSpectrum => "in_local_spectrum",
                    Membership::Inconclusive => "inconclusive",
                };
                csv.push_str(&format!(
                    "{},{},{d},{},{}\n",
                    lambda.re, lambda.im, v.tail_log10_max, v.tail_log10_min
                ));
            }
            None => csv.push_str(&format!("{},{},error,,\n", lambda.re, lambda.im)),
        }
    }
    Ok(csv)
}

fn cmd_local(args: &LocalArgs) -> Result<(), CliError> {
    let input = load_input(&args.source)?;
    let radii = analyzed_radii(&input)?;
    let x = parse_vector(&args.vector)?;
    let horizon = match input.weight.side {
        Side::Unilateral => (0, input.horizon.0.max(input.horizon.1)),
        Side::Bilateral => input.horizon,
    };
    let beta = build_beta(&input.weight, horizon)?;
    let ls = local_spectrum(&radii, &beta, &x)?;
    let json = serde_json::to_string_pretty(&ls).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("{json}");

    if let Some(grid_raw) = &args.grid {
        let radii_list: Result<Vec<f64>, _> =
            grid_raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let radii_list =
            radii_list.map_err(|e| CliError::Spec(format!("invalid --grid: {e}")))?;
        let csv = membership_sweep(&beta, &x, &radii_list, args.points)?;
        match &args.out {
            Some(path) => std::fs::write(path, csv)?,
            None => print!("{csv}"),
        }
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.report)?;
    let report: AnalysisReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Spec(format!("malformed report: {e}")))?;
    if report.schema != SCHEMA_VERSION {
        return Err(CliError::Spec(format!(
            "unsupported report schema {}",
            report.schema
        )));
    }
    std::fs::write(&args.out_svg, report_svg(&report))?;
    let csv = convergence_traces_csv(&report).map_err(CliError::from)?;
    std::fs::write(&args.out_csv, csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Local(args) => cmd_local(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

// keep the oracle error type wired into the CLI error space even though
// most call sites surface it through check records
impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InsufficientHorizon { .. } => CliError::Horizon(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}
