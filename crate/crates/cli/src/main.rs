//! Command-line front end: two-sample and independence permutation tests on
//! CSV data, power experiments from JSON specs, and sphere Monte-Carlo oracles.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use projcvm::dependence::{indep_perm_test, DepConfig, DepKind, PairedSample};
use projcvm::geometry::{mc_orthant, orthant2, orthant3, orthant4, sphere_sample};
use projcvm::harness::{read_csv, run_power, threads_from_env, ExperimentSpec};
use projcvm::permutation::{perm_pvalue, sign_flip_pvalue, PermConfig, PermResult};
use projcvm::two_sample::{Bandwidth, MmdConfig, Statistic};
use projcvm::{AngleConfig, Error, QuadratureConfig, RandomStream, SampleMatrix};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "projcvm", version, about = "Projection-averaged Cramér–von Mises tests and relatives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-sample permutation test (or sign-flip test for `sign`).
    Test(TestArgs),
    /// Independence permutation test on paired columns.
    Indep(IndepArgs),
    /// Run a power experiment described by a JSON spec.
    Bench(BenchArgs),
    /// Sphere Monte-Carlo oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum TwoSampleMethod {
    Cvm,
    Cvm3,
    Lcvm,
    Energy,
    Mmd,
    Cq,
    Wmw,
    Sign,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepMethod {
    Tau,
    Bkr,
    Taustar,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Number of random permutations B.
    #[arg(long, default_value_t = 199)]
    perms: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Input CSV files start with a header line.
    #[arg(long)]
    header: bool,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Report wall time in elapsed_ms (otherwise null, keeping output reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    method: TwoSampleMethod,
    #[arg(long)]
    x: PathBuf,
    /// Second sample; for `sign`, paired rows tested through x − y.
    #[arg(long)]
    y: Option<PathBuf>,
    /// Fixed Gaussian-kernel ς² for mmd (default: median heuristic).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Enumerate all label splits when there are few enough.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct IndepArgs {
    #[arg(long, value_enum)]
    method: DepMethod,
    /// CSV with p + q columns: X first, then Y.
    #[arg(long)]
    pairs: PathBuf,
    /// Number of X columns.
    #[arg(long)]
    p: usize,
    /// Tuples drawn by the incomplete estimator above the exact cap.
    #[arg(long, default_value_t = 200_000)]
    tuples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep mean runtimes in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Monte-Carlo sphere integral of Π 1(βᵀu ≤ 0) next to the closed form.
    Orthant {
        /// Vectors separated by ';', coordinates by ',' (e.g. "1,0;0,1").
        #[arg(long)]
        vectors: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed forms against Monte Carlo for random vector sets in random dimensions.
    Sweep {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Uniform directions on the sphere as CSV.
    Sphere {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::InvalidConfig(_)) { EXIT_USAGE } else { EXIT_DATA };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn data(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_DATA, message: message.into() }
}

#[derive(Serialize)]
struct Report {
    method: &'static str,
    statistic: f64,
    p_value: f64,
    permutations: usize,
    seed: u64,
    m: usize,
    n: usize,
    d: usize,
    alpha: f64,
    reject: bool,
    skipped_tuples: u64,
    elapsed_ms: Option<f64>,
}

impl Report {
    fn new(method: &'static str, r: &PermResult<f64>, (m, n, d): (usize, usize, usize), alpha: f64, elapsed_ms: Option<f64>) -> Self {
        Report {
            method,
            statistic: r.observed,
            p_value: r.p_value,
            permutations: r.n_perms,
            seed: r.seed,
            m,
            n,
            d,
            alpha,
            reject: r.reject,
            skipped_tuples: r.skipped_tuples,
            elapsed_ms,
        }
    }

    fn render(&self, output: Output) -> Result<String, Failure> {
        match output {
            Output::Json => json(self),
            Output::Csv => {
                let v = serde_json::to_value(self).map_err(|e| data(e.to_string()))?;
                let obj = v.as_object().expect("report serializes to an object");
                let head: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
                let vals: Vec<String> = obj
                    .values()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                Ok(format!("{}\n{}\n", head.join(","), vals.join(",")))
            }
        }
    }
}

fn load(path: &Path, header: bool) -> Result<SampleMatrix<f64>, Failure> {
    if !path.exists() {
        return Err(data(format!("{}: no such file", path.display())));
    }
    Ok(read_csv(path, header)?)
}

fn perm_config(c: &Common, exact: bool) -> Result<PermConfig, Failure> {
    let cfg = PermConfig { n_perms: c.perms, alpha: c.alpha, master_seed: c.seed, exact };
    cfg.validate()?;
    Ok(cfg)
}

fn elapsed(c: &Common, t: Instant) -> Option<f64> {
    c.timing.then(|| t.elapsed().as_secs_f64() * 1e3)
}

fn run_test(a: &TestArgs) -> Result<String, Failure> {
    let cfg = perm_config(&a.common, a.exact)?;
    let x = load(&a.x, a.common.header)?;
    let y = a.y.as_ref().map(|p| load(p, a.common.header)).transpose()?;
    let angle = AngleConfig::default();
    let t = Instant::now();
    if let TwoSampleMethod::Sign = a.method {
        let z = match &y {
            None => x,
            Some(y) => {
                if y.nrows() != x.nrows() || y.ncols() != x.ncols() {
                    return Err(data(format!("paired sign test needs equal shapes, got {}×{} and {}×{}", x.nrows(), x.ncols(), y.nrows(), y.ncols())));
                }
                SampleMatrix::from_fn(x.nrows(), x.ncols(), |i, k| x.row(i)[k] - y.row(i)[k])?
            }
        };
        let r = sign_flip_pvalue(&z, &angle, &cfg)?;
        let dims = (z.nrows(), y.as_ref().map_or(0, |y| y.nrows()), z.ncols());
        return Report::new("sign", &r, dims, cfg.alpha, elapsed(&a.common, t)).render(a.common.output);
    }
    let y = y.ok_or_else(|| usage("--y is required for two-sample methods"))?;
    let (name, stat) = match a.method {
        TwoSampleMethod::Cvm => ("cvm", Statistic::Cvm),
        TwoSampleMethod::Cvm3 => ("cvm3", Statistic::Cvm3),
        TwoSampleMethod::Lcvm => ("lcvm", Statistic::CvmLinear),
        TwoSampleMethod::Energy => ("energy", Statistic::Energy),
        TwoSampleMethod::Mmd => {
            let bandwidth = match a.bandwidth {
                None => Bandwidth::Median,
                Some(s) if s > 0.0 && s.is_finite() => Bandwidth::Fixed(s),
                Some(s) => return Err(usage(format!("--bandwidth must be positive, got {s}"))),
            };
            ("mmd", Statistic::Mmd(MmdConfig { bandwidth }))
        }
        TwoSampleMethod::Cq => ("cq", Statistic::Cq),
        TwoSampleMethod::Wmw => ("wmw", Statistic::Wmw),
        TwoSampleMethod::Sign => unreachable!("handled above"),
    };
    let r = perm_pvalue(&x, &y, &stat, &angle, &cfg)?;
    Report::new(name, &r, (x.nrows(), y.nrows(), x.ncols()), cfg.alpha, elapsed(&a.common, t)).render(a.common.output)
}

fn run_indep(a: &IndepArgs) -> Result<String, Failure> {
    let cfg = perm_config(&a.common, false)?;
    let z = load(&a.pairs, a.common.header)?;
    if a.p == 0 || a.p >= z.ncols() {
        return Err(usage(format!("--p must lie in 1..{} for {} columns", z.ncols(), z.ncols())));
    }
    let s = PairedSample::from_columns(&z, a.p)?;
    let (name, kind) = match a.method {
        DepMethod::Tau => ("tau", DepKind::KendallProj),
        DepMethod::Bkr => ("bkr", DepKind::BkrProj),
        DepMethod::Taustar => ("taustar", DepKind::TauStar),
    };
    let dep = DepConfig { n_tuples: a.tuples, seed: a.common.seed, ..DepConfig::default() };
    let t = Instant::now();
    let r = indep_perm_test(&s, kind, &dep, &cfg)?;
    Report::new(name, &r, (z.nrows(), z.nrows(), z.ncols()), cfg.alpha, elapsed(&a.common, t)).render(a.common.output)
}

fn run_bench(a: &BenchArgs) -> Result<String, Failure> {
    if !a.spec.exists() {
        return Err(data(format!("{}: no such file", a.spec.display())));
    }
    let text = std::fs::read_to_string(&a.spec).map_err(|e| data(format!("{}: {e}", a.spec.display())))?;
    let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", a.spec.display())))?;
    let mut report = run_power(&spec)?;
    if !a.timing {
        report = report.without_timing();
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| data(e.to_string()))? + "\n";
    match &a.out {
        None => Ok(json),
        Some(p) => {
            std::fs::write(p, &json).map_err(|e| data(format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
    }
}

fn parse_vectors(s: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let vs = s
        .split(';')
        .map(|v| v.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| usage(format!("cannot parse {c:?} in --vectors")))).collect())
        .collect::<Result<Vec<Vec<f64>>, Failure>>()?;
    if vs.is_empty() || vs.iter().any(|v| v.len() != vs[0].len()) {
        return Err(usage("--vectors needs at least one vector, all of one dimension"));
    }
    Ok(vs)
}

fn closed_form(vs: &[&[f64]]) -> Result<Option<f64>, Error> {
    let (c, q) = (AngleConfig::default(), QuadratureConfig::default());
    Ok(match vs {
        [_] => Some(0.5),
        [a, b] => Some(orthant2(a, b, &c)?),
        [a, b, e] => Some(orthant3(a, b, e, &c)?),
        [a, b, e, f] => Some(orthant4(a, b, e, f, &c, &q)?),
        _ => None,
    })
}

#[derive(Serialize)]
struct OrthantReport {
    vectors: usize,
    d: usize,
    samples: usize,
    seed: u64,
    estimate: f64,
    std_error: f64,
    closed_form: Option<f64>,
    within_3se: Option<bool>,
}

#[derive(Serialize)]
struct SweepReport {
    trials: usize,
    samples: usize,
    seed: u64,
    within_3se: usize,
    fraction: f64,
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| data(e.to_string()))
}

fn run_oracle(c: &OracleCommand) -> Result<String, Failure> {
    match c {
        OracleCommand::Orthant { vectors, samples, seed } => {
            let vs = parse_vectors(vectors)?;
            let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
            let (estimate, std_error) = mc_orthant(&refs, *samples, &mut RandomStream::new(*seed))?;
            let closed = closed_form(&refs)?;
            json(&OrthantReport {
                vectors: vs.len(),
                d: vs[0].len(),
                samples: *samples,
                seed: *seed,
                estimate,
                std_error,
                closed_form: closed,
                within_3se: closed.map(|cf| (cf - estimate).abs() <= 3.0 * std_error),
            })
        }
        OracleCommand::Sweep { trials, samples, seed } => {
            let mut r = RandomStream::new(*seed);
            let mut inside = 0;
            for t in 0..*trials {
                let k = 2 + t % 3;
                let d = 2 + r.below(7);
                let vs: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| r.gaussian()).collect()).collect();
                let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
                let cf = closed_form(&refs)?.expect("k ≤ 4");
                let (est, se) = mc_orthant(&refs, *samples, &mut r)?;
                if (cf - est).abs() <= 3.0 * se {
                    inside += 1;
                }
            }
            json(&SweepReport { trials: *trials, samples: *samples, seed: *seed, within_3se: inside, fraction: inside as f64 / (*trials).max(1) as f64 })
        }
        OracleCommand::Sphere { d, n, seed } => {
            let s = sphere_sample::<f64>(*d, *n, &mut RandomStream::new(*seed))?;
            Ok(s.rows().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n").collect())
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Test(a) => run_test(a),
        Command::Indep(a) => run_indep(a),
        Command::Bench(a) => run_bench(a),
        Command::Oracle(c) => run_oracle(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
