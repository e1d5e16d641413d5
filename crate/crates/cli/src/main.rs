//! Command-line front end: solve single instances, run the benchmark
//! suites, and generate instance files.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 3 when a single
//! solve stalls in the line search.

mod instance_io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gpnp::bench::{self, Algorithm, Instance, ProblemData, TrialRow};
use gpnp::{solve_multistart, MultistartConfig, ProblemKind, SolverConfig, Termination};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "gpnp", version, about = "Sparsity-constrained optimization solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a single result row
    Solve(SolveArgs),
    /// Run a benchmark suite and write its table as CSV
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Generate a seeded instance file
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file to solve (alternative to the generation flags)
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Sparsity level
    #[arg(long, allow_hyphen_values = true)]
    s: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Problem kind: cs or qcs
    #[arg(long, default_value = "cs")]
    kind: String,
    /// Algorithm: gpnp, iht, niht, htp, cosamp, sp
    #[arg(long, default_value = "gpnp")]
    alg: String,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Success rate over a sparsity grid at fixed (m, n)
    SuccessRate(SuccessRateArgs),
    /// Success rate over sample sizes m = floor(frac * n) at fixed (n, s)
    SampleSweep(SampleSweepArgs),
    /// Mean recovery error and wall time over larger problem sizes
    Scaling(ScalingArgs),
    /// Quadratic compressive sensing grids
    Qcs(QcsArgs),
}

#[derive(Args)]
struct CommonBenchArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated algorithms; defaults to all implemented
    #[arg(long, default_value = "")]
    algs: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SuccessRateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Sparsity grid, lo:hi:step or a single value
    #[arg(long)]
    s: String,
    #[command(flatten)]
    common: CommonBenchArgs,
}

#[derive(Args)]
struct SampleSweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    /// Sample fractions, lo:hi:step or a single value (m = floor(frac * n))
    #[arg(long, name = "m-frac")]
    m_frac: String,
    #[command(flatten)]
    common: CommonBenchArgs,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated sizes MxNxS, for instance 500x2000x100
    #[arg(long)]
    sizes: String,
    #[command(flatten)]
    common: CommonBenchArgs,
}

#[derive(Args)]
struct QcsArgs {
    /// Sparsity grid of the (m=80, n=120) success table
    #[arg(long, default_value = "3:15:1")]
    s: String,
    /// Comma-separated n values of the scaling grid (m = 0.8n, s = 0.01n)
    #[arg(long, name = "scale-n", default_value = "")]
    scale_n: String,
    #[command(flatten)]
    common: CommonBenchArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    s: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cs")]
    kind: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(bench) => cmd_bench(bench),
        Command::Gen(args) => cmd_gen(args),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// GPNP_THREADS caps worker parallelism; default is the logical core count.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("GPNP_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn validate_sparsity(s: i64, n: usize) -> Result<usize, String> {
    if s < 1 {
        return Err("s must be ≥ 1".into());
    }
    let s = s as usize;
    if s > n {
        return Err(format!("s must be ≤ n = {n}"));
    }
    Ok(s)
}

fn parse_algorithms(spec: &str) -> Result<Vec<Algorithm>, String> {
    if spec.trim().is_empty() {
        return Ok(Algorithm::ALL.to_vec());
    }
    spec.split(',')
        .map(|name| {
            name.trim().parse::<Algorithm>().map_err(|_| {
                let valid: Vec<&str> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
                format!("unknown algorithm '{name}'; valid names: {}", valid.join(", "))
            })
        })
        .collect()
}

/// lo:hi:step (inclusive) or a single value.
fn parse_usize_range(spec: &str, what: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("{what}: '{t}' is not a non-negative integer"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
            if step == 0 {
                return Err(format!("{what}: step must be ≥ 1"));
            }
            Ok((lo..=hi).step_by(step).collect())
        }
        _ => Err(format!("{what}: expected 'value' or 'lo:hi:step', got '{spec}'")),
    }
}

fn parse_frac_range(spec: &str, what: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .ok_or_else(|| format!("{what}: '{t}' is not a positive number"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
            let mut out = Vec::new();
            let mut v = lo;
            while v <= hi + 1e-12 {
                out.push(v);
                v += step;
            }
            Ok(out)
        }
        _ => Err(format!("{what}: expected 'value' or 'lo:hi:step', got '{spec}'")),
    }
}

fn parse_sizes(spec: &str) -> Result<Vec<(usize, usize, usize)>, String> {
    spec.split(',')
        .map(|size| {
            let dims: Vec<&str> = size.trim().split('x').collect();
            if dims.len() != 3 {
                return Err(format!("size '{size}' must be MxNxS, for instance 500x2000x100"));
            }
            let parse = |t: &str| {
                t.parse::<usize>()
                    .ok()
                    .filter(|v| *v >= 1)
                    .ok_or_else(|| format!("size '{size}': '{t}' is not a positive integer"))
            };
            Ok((parse(dims[0])?, parse(dims[1])?, parse(dims[2])?))
        })
        .collect()
}

fn csv_list(spec: &str, what: &str) -> Result<Vec<usize>, String> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("{what}: '{t}' is not a non-negative integer"))
        })
        .collect()
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, String> {
    let alg: Algorithm = args
        .alg
        .parse()
        .map_err(|_| {
            let valid: Vec<&str> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
            format!("unknown algorithm '{}'; valid names: {}", args.alg, valid.join(", "))
        })?;

    let (inst, has_x_star) = if let Some(path) = &args.instance {
        let (inst, has_x_star) = instance_io::read_instance_from(path).map_err(|e| e.to_string())?;
        (inst, has_x_star)
    } else {
        let kind: ProblemKind = args.kind.parse()?;
        let (m, n) = match (args.m, args.n) {
            (Some(m), Some(n)) => (m, n),
            _ => return Err("either --instance or all of --m, --n, --s are required".into()),
        };
        let s = validate_sparsity(args.s.ok_or("either --instance or all of --m, --n, --s are required")?, n)?;
        if m == 0 || n == 0 {
            return Err("m and n must be ≥ 1".into());
        }
        let inst = match kind {
            ProblemKind::Cs => bench::gen_gaussian_instance(m, n, s, args.seed),
            ProblemKind::Qcs => bench::gen_qcs_instance(m, n, s, args.seed),
        };
        (inst, true)
    };
    if matches!(inst.problem, ProblemData::Qcs(_)) && alg != Algorithm::Gpnp {
        return Err(format!("algorithm '{}' applies to CS instances only", alg.as_str()));
    }

    println!("# columns: {}", manifest::CSV_COLUMNS);
    let row = if has_x_star {
        bench::run_trial(alg, &inst, 0, None)
    } else {
        solve_without_ground_truth(alg, &inst)?
    };
    println!("{}", manifest::csv_row(&row));
    if row.termination == Termination::LineSearchStalled {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

/// Solves a file instance that carries no planted signal; recovery metrics
/// are reported as NaN.
fn solve_without_ground_truth(alg: Algorithm, inst: &Instance) -> Result<TrialRow, String> {
    let start = Instant::now();
    let result = match &inst.problem {
        ProblemData::Cs(p) => {
            if let Some(b) = baseline_of(alg) {
                let cfg = gpnp::baselines::BaselineConfig::new(b);
                gpnp::baselines::baseline_solve(p, inst.s, &cfg).map_err(|e| e.to_string())?
            } else {
                let cfg = SolverConfig::default_for(ProblemKind::Cs);
                solve_multistart(p, inst.s, &cfg, &MultistartConfig::default())
                    .map_err(|e| e.to_string())?
                    .result
            }
        }
        ProblemData::Qcs(p) => {
            let cfg = SolverConfig::default_for(ProblemKind::Qcs);
            solve_multistart(p, inst.s, &cfg, &MultistartConfig::default())
                .map_err(|e| e.to_string())?
                .result
        }
    };
    Ok(TrialRow {
        algorithm: alg,
        m: inst.m,
        n: inst.n,
        s: inst.s,
        trial: 0,
        seed: inst.seed,
        re_er: f64::NAN,
        psnr: f64::NAN,
        f_final: result.f_final(),
        iterations: result.iterations,
        newton_steps: result.newton_steps_taken,
        time_s: start.elapsed().as_secs_f64(),
        success: false,
        termination: result.termination,
        instance_hash: inst.content_hash(),
    })
}

fn baseline_of(alg: Algorithm) -> Option<gpnp::baselines::BaselineAlg> {
    use gpnp::baselines::BaselineAlg;
    match alg {
        Algorithm::Gpnp => None,
        Algorithm::Iht => Some(BaselineAlg::Iht),
        Algorithm::Niht => Some(BaselineAlg::Niht),
        Algorithm::Htp => Some(BaselineAlg::Htp),
        Algorithm::CoSaMp => Some(BaselineAlg::CoSaMp),
        Algorithm::Sp => Some(BaselineAlg::Sp),
    }
}

fn cmd_bench(command: BenchCommand) -> Result<ExitCode, String> {
    let (table, manifest, out) = match command {
        BenchCommand::SuccessRate(args) => {
            let algs = parse_algorithms(&args.common.algs)?;
            let s_values = parse_usize_range(&args.s, "--s")?;
            for &s in &s_values {
                validate_sparsity(s as i64, args.n)?;
            }
            let manifest = RunManifest::new("bench success-rate", args.common.seed)
                .param("n", args.n)
                .param("m", args.m)
                .param("s", &args.s)
                .param("trials", args.common.trials)
                .param("algs", algs.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(","));
            let table = bench::run_success_rate(
                &algs,
                args.m,
                args.n,
                &s_values,
                args.common.trials,
                args.common.seed,
            );
            (table, manifest, args.common.out)
        }
        BenchCommand::SampleSweep(args) => {
            let algs = parse_algorithms(&args.common.algs)?;
            let fracs = parse_frac_range(&args.m_frac, "--m-frac")?;
            validate_sparsity(args.s as i64, args.n)?;
            let manifest = RunManifest::new("bench sample-sweep", args.common.seed)
                .param("n", args.n)
                .param("s", args.s)
                .param("m-frac", &args.m_frac)
                .param("trials", args.common.trials)
                .param("algs", algs.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(","));
            let table = bench::run_sample_sweep(
                &algs,
                args.n,
                args.s,
                &fracs,
                args.common.trials,
                args.common.seed,
            );
            (table, manifest, args.common.out)
        }
        BenchCommand::Scaling(args) => {
            let algs = parse_algorithms(&args.common.algs)?;
            let sizes = parse_sizes(&args.sizes)?;
            for &(_, n, s) in &sizes {
                validate_sparsity(s as i64, n)?;
            }
            let manifest = RunManifest::new("bench scaling", args.common.seed)
                .param("sizes", &args.sizes)
                .param("trials", args.common.trials)
                .param("algs", algs.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(","));
            let table =
                bench::run_scaling(&algs, &sizes, args.common.trials, args.common.seed);
            (table, manifest, args.common.out)
        }
        BenchCommand::Qcs(args) => {
            let s_values = parse_usize_range(&args.s, "--s")?;
            let n_values = csv_list(&args.scale_n, "--scale-n")?;
            let manifest = RunManifest::new("bench qcs", args.common.seed)
                .param("s", &args.s)
                .param("scale-n", &args.scale_n)
                .param("trials", args.common.trials)
                .param("algs", "gpnp");
            let table = bench::run_qcs(&s_values, &n_values, args.common.trials, args.common.seed);
            (table, manifest, args.common.out)
        }
    };
    manifest::write_csv(&out, &manifest, &table.rows)
        .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    println!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, String> {
    let kind: ProblemKind = args.kind.parse()?;
    if args.m == 0 || args.n == 0 {
        return Err("m and n must be ≥ 1".into());
    }
    let s = validate_sparsity(args.s, args.n)?;
    let inst = match kind {
        ProblemKind::Cs => bench::gen_gaussian_instance(args.m, args.n, s, args.seed),
        ProblemKind::Qcs => bench::gen_qcs_instance(args.m, args.n, s, args.seed),
    };
    instance_io::write_instance_to(&args.out, &inst)
        .map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    println!("wrote {} instance ({}x{}, s={}) to {}", kind.as_str(), args.m, args.n, s, args.out.display());
    Ok(ExitCode::SUCCESS)
}
