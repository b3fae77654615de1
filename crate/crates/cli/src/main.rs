use std::f64::consts::{FRAC_PI_2, LN_2};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Number, Value};
use sha2::{Digest, Sha256};

use hypermet_core::four_point::DEFAULT_EPS_TOL;
use hypermet_core::metric::DEFAULT_TOL_REL;
use hypermet_core::sharpness::{geometric_grid, write_sweep_csv, DEFAULT_STEPS, DEFAULT_THETA_MAX};
use hypermet_core::{
    equality_case, gromov_delta, max_strong_epsilon_auto, ptolemaic_defect, rearrangement_sides, read_points,
    rho_matrix, strong_defect, strong_to_gromov, sweep, zx_prior_bound, DistanceMatrixF64, DomainSample, EpsilonMax,
    Error, LabeledPoint, ModelSpaceF64, QuadrupleWitness, RawMatrix, SharpnessConfig,
};

#[derive(Parser)]
#[command(name = "hypermet", version, about = "Four-point hyperbolicity analysis and boundary-inversion metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a distance matrix (CSV or JSON).
    Validate(ValidateArgs),
    /// Ptolemaic defect, Gromov delta and strong hyperbolicity of a matrix.
    Analyze(AnalyzeArgs),
    /// Boundary-inversion metric of a sampled domain.
    Rho(RhoArgs),
    /// Sweep the sharpness configuration over a geometric angle grid.
    Sweep(SweepArgs),
    /// Evaluate the rearrangement inequality on a tuple or a random batch.
    Lemma(LemmaArgs),
}

#[derive(Args)]
struct ValidateArgs {
    matrix: PathBuf,
    /// Relative tolerance for symmetry and triangle checks.
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    tol: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    matrix: PathBuf,
    /// Evaluate the strong four-point condition at this parameter.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Search for the largest feasible strong parameter.
    #[arg(long)]
    find_epsilon: bool,
    /// Report the prior Gromov bound for boundary separation R.
    #[arg(long = "prior-R", alias = "prior-r")]
    prior_r: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    tol: f64,
}

#[derive(Args)]
struct RhoArgs {
    /// euclidean:N, hyperbolic:KAPPA or sphere
    #[arg(long)]
    space: String,
    #[arg(long)]
    interior: PathBuf,
    #[arg(long)]
    boundary: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// euclidean:2 or hyperbolic:KAPPA
    #[arg(long, default_value = "euclidean:2")]
    space: String,
    /// Half the distance between the two boundary points p and q.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = DEFAULT_THETA_MAX)]
    theta_max: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Extra boundary points (label,coords... rows) in place of the default one.
    #[arg(long, conflicts_with = "no_extra")]
    extra_boundary: Option<PathBuf>,
    /// Minimum distance from q to the extra boundary points (default 2r).
    #[arg(long = "R")]
    r_sep: Option<f64>,
    /// Use the boundary {p, q} only.
    #[arg(long)]
    no_extra: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LemmaArgs {
    /// alpha beta gamma delta
    #[arg(num_args = 4, value_names = ["ALPHA", "BETA", "GAMMA", "DELTA"], required_unless_present = "random")]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Number of random tuples to check instead of a single tuple.
    #[arg(long, conflicts_with = "values")]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_parse() || matches!(e, Error::InvalidSpace(_)) { 2 } else { 1 };
        Failure { code, message: e.to_string() }
    }
}

fn domain(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn parse_failure(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CmdResult = Result<u8, Failure>;

/// Rewrites every non-integer JSON number with 17 significant digits.
fn fix_reals(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                n.as_f64().map_or(Value::Null, real)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(fix_reals).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, fix_reals(v))).collect()),
        other => other,
    }
}

fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float"))
    } else {
        Value::Null
    }
}

fn print_json(v: Value) {
    println!("{}", serde_json::to_string_pretty(&fix_reals(v)).expect("serializable"));
}

fn load_matrix(path: &Path) -> Result<RawMatrix<f64>, Failure> {
    RawMatrix::load(path).map_err(|e| parse_failure(format!("{}: {e}", path.display())))
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let raw = load_matrix(&args.matrix)?;
    let report = raw.validate(args.tol)?;
    let mut out = serde_json::to_value(&report).expect("serializable");
    out["valid"] = json!(report.is_valid());
    if let Some((i, j, k, _)) = report.worst_triple {
        out["worst_triple_labels"] = json!([raw.labels[i], raw.labels[j], raw.labels[k]]);
    }
    print_json(out);
    Ok(if report.is_valid() { 0 } else { 1 })
}

const PAIRINGS: [&str; 3] = ["xy|zt", "xz|yt", "xt|yz"];

fn witness_json(m: &DistanceMatrixF64, w: &Option<QuadrupleWitness<f64>>) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({
            "indices": w.indices,
            "labels": w.indices.iter().map(|&i| m.labels()[i].clone()).collect::<Vec<_>>(),
            "pairing": PAIRINGS[w.pairing as usize],
            "defect": real(w.defect),
        }),
    }
}

fn epsilon_json(e: EpsilonMax<f64>) -> Value {
    match e {
        EpsilonMax::Finite(x) => real(x),
        EpsilonMax::Unbounded => json!("unbounded"),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let raw = load_matrix(&args.matrix)?;
    let m = raw.into_matrix(args.tol)?;
    let (pd, pw) = ptolemaic_defect(&m);
    let g = gromov_delta(&m);
    let mut out = json!({
        "n": m.len(),
        "ptolemaic_defect": real(pd),
        "delta_min": real(g.delta_min),
        "witnesses": {
            "ptolemaic": witness_json(&m, &pw),
            "gromov": witness_json(&m, &g.witness),
        },
    });
    if let Some(eps) = args.epsilon {
        let s = strong_defect(&m, eps)?;
        out["strong"] = json!({
            "epsilon": real(eps),
            "feasible": s.feasible,
            "max_defect": real(s.max_defect),
            "gromov_bound": real(strong_to_gromov(eps)?),
        });
        out["witnesses"]["strong"] = witness_json(&m, &s.witness);
    }
    if args.find_epsilon {
        let e = max_strong_epsilon_auto(&m)?;
        out["epsilon_max"] = epsilon_json(e);
        out["epsilon_tol"] = real(DEFAULT_EPS_TOL);
    }
    if let Some(r) = args.prior_r {
        out["prior_bound"] = json!({ "R": real(r), "zx_prior_bound": real(zx_prior_bound(r)?), "log2": real(LN_2) });
    }
    print_json(out);
    Ok(0)
}

fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| parse_failure(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `<out>.manifest.json` describing how `out` was produced.
fn write_manifest(command: &str, inputs: &[&Path], out: &Path, started: Instant) -> Result<PathBuf, Failure> {
    let digests: Vec<Value> = inputs
        .iter()
        .map(|p| Ok(json!({ "path": p.display().to_string(), "sha256": sha256_file(p)? })))
        .collect::<Result<_, Failure>>()?;
    let manifest = json!({
        "command": command,
        "args": std::env::args().collect::<Vec<_>>(),
        "inputs": digests,
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "outputs": [out.display().to_string()],
    });
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(&fix_reals(manifest)).expect("serializable");
    std::fs::write(&path, text + "\n").map_err(|e| domain(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn read_point_file(space: &ModelSpaceF64, path: &Path) -> Result<Vec<LabeledPoint<f64>>, Failure> {
    let f = File::open(path).map_err(|e| parse_failure(format!("{}: {e}", path.display())))?;
    read_points(space, BufReader::new(f)).map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    })
}

fn cmd_rho(args: &RhoArgs) -> CmdResult {
    let started = Instant::now();
    let space: ModelSpaceF64 = args.space.parse()?;
    let interior = read_point_file(&space, &args.interior)?;
    let boundary = read_point_file(&space, &args.boundary)?;
    let sample = DomainSample::new(space, interior, boundary)?;
    let rho = rho_matrix(&sample)?;
    let mut w = create(&args.out)?;
    rho.matrix.write_csv(&mut w)?;
    w.flush().map_err(Error::from)?;
    let manifest = write_manifest("rho", &[&args.interior, &args.boundary], &args.out, started)?;
    print_json(json!({
        "out": args.out.display().to_string(),
        "manifest": manifest.display().to_string(),
        "n": rho.matrix.len(),
        "boundary_points": sample.boundary().len(),
    }));
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let started = Instant::now();
    let space: ModelSpaceF64 = args.space.parse()?;
    if !(args.theta_max > 0.0 && args.theta_max < FRAC_PI_2) {
        return Err(domain(format!("theta-max must lie in (0, π/2), got {}", args.theta_max)));
    }
    if args.steps == 0 {
        return Err(domain("steps must be positive"));
    }
    let grid = geometric_grid(args.theta_max, args.steps);
    let r_sep = args.r_sep.unwrap_or(2.0 * args.r);
    let mut inputs: Vec<&Path> = Vec::new();
    let config = if let Some(path) = &args.extra_boundary {
        inputs.push(path);
        let pts = read_point_file(&space, path)?.into_iter().map(|p| p.point).collect();
        SharpnessConfig::new(space, args.r, grid, pts, r_sep)?
    } else if args.no_extra {
        SharpnessConfig::bare(space, args.r, grid)?
    } else {
        SharpnessConfig::with_default_extra(space, args.r, grid, r_sep)?
    };
    let rows = sweep(&config)?;
    let mut w = create(&args.out)?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush().map_err(Error::from)?;
    write_manifest("sweep", &inputs, &args.out, started)?;
    let last = rows.last().expect("non-empty grid");
    let eps = match last.epsilon_max {
        EpsilonMax::Finite(e) => format!("{e:.16e}"),
        EpsilonMax::Unbounded => "unbounded".into(),
    };
    println!(
        "rows={} theta={:.16e} defect_delta={:.16e} log2={LN_2:.16e} epsilon_max={eps}",
        rows.len(),
        last.theta,
        last.defect_delta
    );
    Ok(0)
}

/// Mostly zeros, small-integer ties and repeats of earlier coordinates.
fn lemma_value(rng: &mut StdRng, prev: &[f64]) -> f64 {
    match rng.gen_range(0..10) {
        0..=2 => 0.0,
        3 => f64::from(rng.gen_range(1..4)),
        4 if !prev.is_empty() => prev[rng.gen_range(0..prev.len())],
        _ => rng.gen_range(0.0..10.0),
    }
}

fn cmd_lemma(args: &LemmaArgs) -> CmdResult {
    if let Some(n) = args.random {
        let mut rng = StdRng::seed_from_u64(args.seed);
        let (mut violations, mut equalities, mut mismatches) = (0usize, 0usize, 0usize);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..n {
            let mut v = Vec::with_capacity(4);
            for _ in 0..4 {
                let x = lemma_value(&mut rng, &v);
                v.push(x);
            }
            let (l, r) = rearrangement_sides(v[0], v[1], v[2], v[3])?;
            let gap = (l - r) / r.max(f64::MIN_POSITIVE);
            worst = worst.max(gap);
            violations += (l - r > args.tol * r) as usize;
            let equal = (l - r).abs() <= args.tol * r;
            equalities += equal as usize;
            mismatches += (equality_case(v[0], v[1], v[2], v[3], args.tol)?.any() != equal) as usize;
        }
        print_json(json!({
            "samples": n,
            "seed": args.seed,
            "max_relative_gap": real(worst),
            "violations": violations,
            "equalities": equalities,
            "flag_mismatches": mismatches,
        }));
        return Ok(if violations == 0 && mismatches == 0 { 0 } else { 1 });
    }
    let [a, b, c, d] = <[f64; 4]>::try_from(args.values.as_slice()).map_err(|_| parse_failure("expected four values"))?;
    let (lhs, rhs) = rearrangement_sides(a, b, c, d)?;
    let flags = equality_case(a, b, c, d, args.tol)?;
    print_json(json!({
        "lhs": real(lhs),
        "rhs": real(rhs),
        "holds": lhs - rhs <= args.tol * rhs,
        "equal": (lhs - rhs).abs() <= args.tol * rhs,
        "equality_cases": flags.names(),
    }));
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("HYPERMET_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| parse_failure(format!("HYPERMET_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| domain(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Rho(a) => cmd_rho(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lemma(a) => cmd_lemma(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
