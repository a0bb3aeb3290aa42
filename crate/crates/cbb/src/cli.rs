//! Command-line front end: instance generation, certified solving, brute
//! force, external-solution verification, and scaling benchmarks.
//!
//! Exit codes: `0` success (solves additionally require convergence),
//! `2` invalid input or parameters, `3` budget-terminated solve with a
//! valid but unconverged certificate.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bnb::{self, BranchRule, Certificate, SolveParams};
use crate::bounds::{BoundParams, CutParams, RelaxationMode};
use crate::error::{Error, Result};
use crate::model::{
    brute_force_ground, gen_chimera, gen_random, gen_square, gen_triangular, parse_configuration,
    parse_instance, serialize_instance, SpinModel,
};

/// Largest spin count the single-block reference relaxation accepts. Its
/// variable count grows quadratically with `n`, so it is a baseline for
/// small instances, not a solver path.
pub const DENSE_REFERENCE_CAP: usize = 36;

/// Parse `args` (including the program name) and run the selected
/// command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let mut stdout = std::io::stdout();
    match execute(cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[derive(Parser)]
#[command(name = "cbb", version, about = "Certified Ising ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance.
    Gen(GenArgs),
    /// Solve an instance to a certified bracket around its ground energy.
    Solve(SolveArgs),
    /// Exhaustive ground-state search for small instances.
    Brute(BruteArgs),
    /// Score an external configuration against a certificate.
    Verify(VerifyArgs),
    /// Sweep instance sizes and emit a runtime table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: FamilyCmd,
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// L x L open-boundary grid, unit couplings, Gaussian fields.
    Square {
        #[arg(long = "L")]
        l: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Triangular lattice patch: grid plus one diagonal per cell.
    Triangular {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// L x L grid of 8-spin bipartite cells with aligned inter-cell bonds.
    Chimera {
        #[arg(long = "L")]
        l: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Erdos-Renyi couplings, standard normal values and fields.
    Random {
        #[arg(long)]
        n: usize,
        /// Edge probability in [0, 1].
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Instance file to write; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenCommon {
    /// Standard deviation of the Gaussian on-site fields.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file in the canonical text format.
    instance: PathBuf,
    #[command(flatten)]
    params: RunParams,
    /// Solve through one full-size block instead of the clique
    /// decomposition (baseline; capped at small sizes).
    #[arg(long)]
    dense: bool,
    /// Certificate file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-node `step,lower,upper` staircase as CSV.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct BruteArgs {
    instance: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// File of +1/-1 tokens holding the external configuration.
    #[arg(long, required_unless_present = "spins", conflicts_with = "spins")]
    config: Option<PathBuf>,
    /// Inline configuration, e.g. "+1,-1,+1".
    #[arg(long)]
    spins: Option<String>,
    /// Certificate from an earlier solve; the instance is solved fresh
    /// when omitted.
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[command(flatten)]
    params: RunParams,
    /// Report file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Comma-separated sizes: side length, or spin count for random.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.5)]
    sigma: f64,
    /// Edge probability for the random family.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Seeds 1..=seeds are run per size.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Cbb)]
    mode: ModeArg,
    /// Instances solved concurrently; rows are unaffected by the order.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    params: RunParams,
    /// CSV file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Solver knobs shared by `solve`, `verify`, and `bench`; echoed into
/// every certificate.
#[derive(Args, Clone, Debug)]
pub struct RunParams {
    /// Cliques smaller than this get the tighter level-2 basis.
    #[arg(long = "nt", default_value_t = 7)]
    pub nt: usize,
    #[arg(long, value_enum, default_value_t = BranchArg::EasyFirst)]
    pub branch_rule: BranchArg,
    /// Converged when upper - lower <= gap-tol * (1 + |upper|).
    #[arg(long, default_value_t = 1e-6)]
    pub gap_tol: f64,
    /// Budget on evaluated nodes; exceeding it ends the run unconverged.
    #[arg(long, default_value_t = 10_000)]
    pub max_nodes: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Close subproblems with at most this many free spins by exhaustive
    /// search; 0 disables the shortcut.
    #[arg(long = "oracle-leaf", default_value_t = 16)]
    pub oracle_leaf: usize,
    /// Tighten bounds with rounds of triangle cuts.
    #[arg(long)]
    pub cuts: bool,
    #[arg(long, default_value_t = 10)]
    pub cut_rounds: usize,
    #[arg(long, default_value_t = 50)]
    pub cut_batch: usize,
    /// Evaluate the two children of each branching concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Embed the per-node trace in the certificate.
    #[arg(long)]
    pub trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchArg {
    /// Branch on the most decided spin.
    EasyFirst,
    /// Branch on the least decided spin.
    HardFirst,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    /// Clique-wise relaxations on the chordal extension.
    Cbb,
    /// Single-block reference relaxation; refuses large sizes.
    Nonchordal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyArg {
    Square,
    Triangular,
    Chimera,
    Random,
}

fn build_solve_params(rp: &RunParams, dense: bool, n: usize) -> Result<SolveParams> {
    if !(rp.gap_tol.is_finite() && rp.gap_tol > 0.0) {
        return Err(Error::InvalidParams(format!("gap-tol must be positive, got {}", rp.gap_tol)));
    }
    if rp.max_nodes == 0 {
        return Err(Error::InvalidParams("max-nodes must be at least 1".into()));
    }
    if let Some(s) = rp.max_seconds {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParams(format!("max-seconds must be positive, got {s}")));
        }
    }
    if rp.cuts && rp.cut_batch == 0 {
        return Err(Error::InvalidParams("cut-batch must be at least 1".into()));
    }
    let mode = if dense {
        if n > DENSE_REFERENCE_CAP {
            return Err(Error::TooLarge {
                what: "the single-block reference relaxation",
                n,
                cap: DENSE_REFERENCE_CAP,
            });
        }
        RelaxationMode::DenseLevelOne
    } else {
        RelaxationMode::Chordal { n_t: rp.nt }
    };
    Ok(SolveParams {
        bounds: BoundParams {
            mode,
            cuts: CutParams {
                enabled: rp.cuts,
                max_rounds: rp.cut_rounds,
                batch: rp.cut_batch,
                ..CutParams::default()
            },
            ..BoundParams::default()
        },
        branch_rule: match rp.branch_rule {
            BranchArg::EasyFirst => BranchRule::EasyFirst,
            BranchArg::HardFirst => BranchRule::HardFirst,
        },
        gap_tol: rp.gap_tol,
        max_nodes: rp.max_nodes,
        max_seconds: rp.max_seconds,
        oracle_leaf_threshold: rp.oracle_leaf,
        parallel_children: rp.parallel,
        keep_trace: rp.trace,
    })
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen(args) => cmd_gen(args, stdout),
        Command::Solve(args) => cmd_solve(args, stdout),
        Command::Brute(args) => cmd_brute(args, stdout),
        Command::Verify(args) => cmd_verify(args, stdout),
        Command::Bench(args) => cmd_bench(args, stdout),
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParams(format!("sigma must be nonnegative, got {sigma}")));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidParams(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn cmd_gen(args: GenArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (model, out) = match args.family {
        FamilyCmd::Square { l, common } => {
            check_sigma(common.sigma)?;
            (gen_square(l, common.sigma, common.seed), common.out)
        }
        FamilyCmd::Triangular { rows, cols, common } => {
            check_sigma(common.sigma)?;
            (gen_triangular(rows, cols, common.sigma, common.seed), common.out)
        }
        FamilyCmd::Chimera { l, common } => {
            check_sigma(common.sigma)?;
            (gen_chimera(l, common.sigma, common.seed), common.out)
        }
        FamilyCmd::Random { n, p, seed, out } => {
            check_probability(p)?;
            (gen_random(n, p, seed), out)
        }
    };
    let text = serialize_instance(&model)?;
    let summary = json!({
        "n": model.n(),
        "edges": model.couplings().len(),
        "digest": model.digest(),
    });
    match out {
        Some(path) => {
            fs::write(path, text)?;
            writeln!(stdout, "{summary}")?;
        }
        None => {
            stdout.write_all(text.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

fn read_instance(path: &Path) -> Result<SpinModel> {
    parse_instance(&fs::read_to_string(path)?)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_solve(args: SolveArgs, stdout: &mut dyn Write) -> Result<i32> {
    let model = read_instance(&args.instance)?;
    let params = build_solve_params(&args.params, args.dense, model.n())?;
    let mut staircase = String::new();
    let cert = if let Some(plot) = &args.plot_data {
        staircase.push_str("step,lower,upper\n");
        let cert = bnb::solve_cbb_observed(&model, &params, |e| {
            let _ = writeln!(staircase, "{},{},{}", e.node, e.global_lower, e.upper);
        })?;
        fs::write(plot, &staircase)?;
        cert
    } else {
        bnb::solve_cbb(&model, &params)?
    };
    emit(&pretty_json(&cert)?, args.out.as_deref(), stdout)?;
    Ok(if cert.converged { 0 } else { 3 })
}

fn cmd_brute(args: BruteArgs, stdout: &mut dyn Write) -> Result<i32> {
    let model = read_instance(&args.instance)?;
    let r = brute_force_ground(&model)?;
    let report = json!({
        "n": model.n(),
        "energy": r.energy,
        "config": r.config,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let model = read_instance(&args.instance)?;
    let external = match (&args.config, &args.spins) {
        (Some(path), None) => parse_configuration(&fs::read_to_string(path)?)?,
        (None, Some(inline)) => parse_configuration(inline)?,
        _ => unreachable!("clap enforces exactly one configuration source"),
    };
    let cert: Certificate = match &args.certificate {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => {
            let params = build_solve_params(&args.params, false, model.n())?;
            bnb::solve_cbb(&model, &params)?
        }
    };
    let report = bnb::verify_external(&cert, &model, &external)?;
    let mut value = serde_json::to_value(&report)?;
    value["certificate"] = json!({
        "instance_digest": cert.instance_digest,
        "lower": cert.lower,
        "upper": cert.upper,
        "converged": cert.converged,
    });
    emit(&pretty_json(&value)?, args.out.as_deref(), stdout)?;
    Ok(0)
}

struct BenchRow {
    size: usize,
    seed: u64,
    /// nodes, wall_time, converged, lower, upper; refused when `None`.
    outcome: Option<(usize, f64, bool, f64, f64)>,
}

fn build_family(family: FamilyArg, size: usize, sigma: f64, p: f64, seed: u64) -> SpinModel {
    match family {
        FamilyArg::Square => gen_square(size, sigma, seed),
        FamilyArg::Triangular => gen_triangular(size, size, sigma, seed),
        FamilyArg::Chimera => gen_chimera(size, sigma, seed),
        FamilyArg::Random => gen_random(size, p, seed),
    }
}

fn run_bench_task(args: &BenchArgs, params: &SolveParams, size: usize, seed: u64) -> Result<BenchRow> {
    let model = build_family(args.family, size, args.sigma, args.p, seed);
    if args.mode == ModeArg::Nonchordal && model.n() > DENSE_REFERENCE_CAP {
        return Ok(BenchRow { size, seed, outcome: None });
    }
    let cert = bnb::solve_cbb(&model, params)?;
    Ok(BenchRow {
        size,
        seed,
        outcome: Some((cert.nodes_explored, cert.wall_time, cert.converged, cert.lower, cert.upper)),
    })
}

fn cmd_bench(args: BenchArgs, stdout: &mut dyn Write) -> Result<i32> {
    check_sigma(args.sigma)?;
    check_probability(args.p)?;
    let params = build_solve_params(&args.params, args.mode == ModeArg::Nonchordal, 0)?;

    let tasks: Vec<(usize, u64)> = args
        .sizes
        .iter()
        .flat_map(|&size| (1..=args.seeds).map(move |seed| (size, seed)))
        .collect();
    let jobs = args.jobs.clamp(1, tasks.len().max(1));
    let mut results: Vec<(usize, Result<BenchRow>)> = if jobs <= 1 {
        tasks
            .iter()
            .enumerate()
            .map(|(i, &(size, seed))| (i, run_bench_task(&args, &params, size, seed)))
            .collect()
    } else {
        let next = AtomicUsize::new(0);
        let collected = Mutex::new(Vec::with_capacity(tasks.len()));
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(size, seed)) = tasks.get(i) else { break };
                    let row = run_bench_task(&args, &params, size, seed);
                    collected.lock().expect("no panics while locked").push((i, row));
                });
            }
        });
        collected.into_inner().expect("all workers joined")
    };
    results.sort_by_key(|&(i, _)| i);

    let mut csv = String::new();
    let sizes: Vec<String> = args.sizes.iter().map(ToString::to_string).collect();
    let _ = writeln!(
        csv,
        "# bench family={:?} mode={:?} sigma={} p={} seeds={} sizes={} jobs={}",
        args.family,
        args.mode,
        args.sigma,
        args.p,
        args.seeds,
        sizes.join(","),
        jobs,
    );
    let _ = writeln!(
        csv,
        "# nt={} gap-tol={} max-nodes={} oracle-leaf={} cuts={}",
        args.params.nt, args.params.gap_tol, args.params.max_nodes, args.params.oracle_leaf, args.params.cuts,
    );
    csv.push_str("size,seed,nodes,wall_time,converged,lower,upper,status\n");
    for (_, row) in results {
        let row = row?;
        match row.outcome {
            Some((nodes, wall, converged, lower, upper)) => {
                let _ = writeln!(
                    csv,
                    "{},{},{nodes},{wall:.6},{converged},{lower},{upper},ok",
                    row.size, row.seed,
                );
            }
            None => {
                let _ = writeln!(csv, "{},{},,,,,,refused", row.size, row.seed);
            }
        }
    }
    emit(&csv, args.out.as_deref(), stdout)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy;
    use tempfile::tempdir;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(args).expect("arguments parse").command
    }

    fn exec(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = execute(parse(args), &mut buf).expect("command succeeds");
        (code, String::from_utf8(buf).expect("output is text"))
    }

    fn exec_err(args: &[&str]) -> Error {
        let mut buf = Vec::new();
        execute(parse(args), &mut buf).expect_err("command fails")
    }

    #[test]
    fn gen_writes_instance_and_prints_summary() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        let (code, out) = exec(&[
            "cbb", "gen", "square", "--L", "3", "--sigma", "1.5", "--seed", "1", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let summary: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(summary["n"], 9);
        assert_eq!(summary["edges"], 12);
        let model = read_instance(&path).unwrap();
        assert_eq!(model, gen_square(3, 1.5, 1));
        assert_eq!(summary["digest"], model.digest());
    }

    #[test]
    fn gen_without_out_streams_the_instance() {
        let (code, out) = exec(&["cbb", "gen", "random", "--n", "10", "--p", "0", "--seed", "1"]);
        assert_eq!(code, 0);
        let model = parse_instance(&out).unwrap();
        assert_eq!(model.n(), 10);
        assert!(model.couplings().is_empty());
    }

    #[test]
    fn gen_rejects_bad_probability() {
        assert!(matches!(
            exec_err(&["cbb", "gen", "random", "--n", "5", "--p", "1.5"]),
            Error::InvalidParams(_)
        ));
    }

    #[test]
    fn solve_certifies_and_matches_brute() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        exec(&[
            "cbb", "gen", "square", "--L", "3", "--sigma", "1.5", "--seed", "4", "--out",
            path.to_str().unwrap(),
        ]);
        let (code, out) = exec(&["cbb", "solve", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let cert: Certificate = serde_json::from_str(&out).unwrap();
        assert!(cert.converged);

        let (bcode, bout) = exec(&["cbb", "brute", path.to_str().unwrap()]);
        assert_eq!(bcode, 0);
        let oracle: serde_json::Value = serde_json::from_str(&bout).unwrap();
        let exact = oracle["energy"].as_f64().unwrap();
        assert!((cert.upper - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
    }

    #[test]
    fn solve_budget_exhaustion_reports_three() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("tri.txt");
        let model =
            SpinModel::new(3, vec![(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)], vec![], 0.0).unwrap();
        fs::write(&path, serialize_instance(&model).unwrap()).unwrap();
        let (code, out) = exec(&[
            "cbb", "solve", path.to_str().unwrap(), "--nt", "0", "--oracle-leaf", "0",
            "--max-nodes", "1",
        ]);
        assert_eq!(code, 3);
        let cert: Certificate = serde_json::from_str(&out).unwrap();
        assert!(!cert.converged);
        assert!(cert.lower <= -1.0 - 1e-7 && -1.0 <= cert.upper + 1e-9);
    }

    #[test]
    fn solve_writes_plot_data() {
        let dir = tempdir().unwrap();
        let inst = dir.path().join("inst.txt");
        let plot = dir.path().join("steps.csv");
        exec(&[
            "cbb", "gen", "random", "--n", "8", "--p", "0.4", "--seed", "2", "--out",
            inst.to_str().unwrap(),
        ]);
        let (code, out) = exec(&[
            "cbb", "solve", inst.to_str().unwrap(), "--plot-data", plot.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let cert: Certificate = serde_json::from_str(&out).unwrap();
        let csv = fs::read_to_string(&plot).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,lower,upper"));
        assert_eq!(lines.count(), cert.nodes_explored);
    }

    #[test]
    fn brute_refuses_oversized_instances() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("big.txt");
        exec(&["cbb", "gen", "square", "--L", "6", "--out", path.to_str().unwrap()]);
        assert!(matches!(
            exec_err(&["cbb", "brute", path.to_str().unwrap()]),
            Error::TooLarge { .. }
        ));
    }

    #[test]
    fn verify_scores_certified_config_and_rejects_mismatch() {
        let dir = tempdir().unwrap();
        let inst = dir.path().join("inst.txt");
        let cert_path = dir.path().join("cert.json");
        exec(&[
            "cbb", "gen", "triangular", "--rows", "3", "--cols", "3", "--sigma", "1.5", "--seed",
            "7", "--out", inst.to_str().unwrap(),
        ]);
        let (code, _) = exec(&[
            "cbb", "solve", inst.to_str().unwrap(), "--out", cert_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let cert: Certificate =
            serde_json::from_str(&fs::read_to_string(&cert_path).unwrap()).unwrap();
        let spins: Vec<String> = cert.config.spins().iter().map(|s| format!("{s:+}")).collect();

        let (vcode, vout) = exec(&[
            "cbb", "verify", inst.to_str().unwrap(), "--spins", &spins.join(","),
            "--certificate", cert_path.to_str().unwrap(),
        ]);
        assert_eq!(vcode, 0);
        let report: serde_json::Value = serde_json::from_str(&vout).unwrap();
        assert_eq!(report["hamming_distance"], 0);
        assert_eq!(report["certified_ground"], true);
        assert_eq!(report["certificate"]["instance_digest"], cert.instance_digest);

        let other = dir.path().join("other.txt");
        exec(&["cbb", "gen", "square", "--L", "3", "--out", other.to_str().unwrap()]);
        assert!(matches!(
            exec_err(&[
                "cbb", "verify", other.to_str().unwrap(), "--spins", &spins.join(","),
                "--certificate", cert_path.to_str().unwrap(),
            ]),
            Error::DigestMismatch
        ));
    }

    #[test]
    fn verify_without_certificate_solves_fresh() {
        let dir = tempdir().unwrap();
        let inst = dir.path().join("inst.txt");
        exec(&[
            "cbb", "gen", "random", "--n", "6", "--p", "0.5", "--seed", "3", "--out",
            inst.to_str().unwrap(),
        ]);
        let model = read_instance(&inst).unwrap();
        let excited = crate::model::SpinConfiguration::new(vec![1; 6]).unwrap();
        let (code, out) = exec(&["cbb", "verify", inst.to_str().unwrap(), "--spins",
            "+1,+1,+1,+1,+1,+1"]);
        assert_eq!(code, 0);
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        let expected = energy(&model, &excited).unwrap();
        assert_eq!(report["external_energy"].as_f64().unwrap(), expected);
        assert!(report["gap_to_lower"].as_f64().unwrap() >= -1e-9);
    }

    #[test]
    fn bench_emits_rows_and_flags_refusals() {
        let (code, out) = exec(&[
            "cbb", "bench", "--family", "square", "--sizes", "2,7", "--seeds", "1", "--mode",
            "nonchordal",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "size,seed,nodes,wall_time,converged,lower,upper,status");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("2,1,") && lines[1].ends_with(",ok"));
        assert_eq!(lines[2], "7,1,,,,,,refused");
    }

    #[test]
    fn bench_empty_sweep_is_header_only() {
        let (code, out) = exec(&["cbb", "bench", "--family", "random"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines, ["size,seed,nodes,wall_time,converged,lower,upper,status"]);
    }

    #[test]
    fn bench_parallel_rows_match_serial() {
        let serial = exec(&[
            "cbb", "bench", "--family", "random", "--sizes", "6,8", "--seeds", "2", "--p", "0.4",
        ]);
        let parallel = exec(&[
            "cbb", "bench", "--family", "random", "--sizes", "6,8", "--seeds", "2", "--p", "0.4",
            "--jobs", "4",
        ]);
        let strip = |s: &str| -> Vec<String> {
            s.lines()
                .filter(|l| !l.starts_with('#'))
                .map(|l| {
                    let cols: Vec<&str> = l.split(',').collect();
                    cols.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != 3)
                        .map(|(_, c)| c.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect()
        };
        assert_eq!(strip(&serial.1), strip(&parallel.1));
    }

    #[test]
    fn default_flags_reproduce_default_params() {
        let Command::Solve(args) = parse(&["cbb", "solve", "x"]) else {
            panic!("expected solve");
        };
        let params = build_solve_params(&args.params, false, 100).unwrap();
        assert_eq!(params, SolveParams::default());
    }

    #[test]
    fn flag_overrides_reach_solve_params() {
        let Command::Solve(args) = parse(&[
            "cbb", "solve", "x", "--nt", "9", "--branch-rule", "hard-first", "--gap-tol", "1e-5",
            "--max-nodes", "77", "--max-seconds", "2.5", "--oracle-leaf", "0", "--cuts",
            "--cut-rounds", "3", "--cut-batch", "11", "--parallel", "--trace",
        ]) else {
            panic!("expected solve");
        };
        let params = build_solve_params(&args.params, false, 100).unwrap();
        assert_eq!(params.bounds.mode, RelaxationMode::Chordal { n_t: 9 });
        assert_eq!(params.branch_rule, BranchRule::HardFirst);
        assert_eq!(params.gap_tol, 1e-5);
        assert_eq!(params.max_nodes, 77);
        assert_eq!(params.max_seconds, Some(2.5));
        assert_eq!(params.oracle_leaf_threshold, 0);
        assert!(params.bounds.cuts.enabled);
        assert_eq!(params.bounds.cuts.max_rounds, 3);
        assert_eq!(params.bounds.cuts.batch, 11);
        assert!(params.parallel_children);
        assert!(params.keep_trace);
    }

    #[test]
    fn dense_flag_caps_instance_size() {
        let Command::Solve(args) = parse(&["cbb", "solve", "x", "--dense"]) else {
            panic!("expected solve");
        };
        assert!(build_solve_params(&args.params, true, 36).is_ok());
        assert!(matches!(
            build_solve_params(&args.params, true, 37),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn run_maps_failures_to_exit_codes() {
        assert_eq!(run(["cbb", "no-such-command"]), 2);
        assert_eq!(run(["cbb", "solve", "/no/such/file"]), 2);
        assert_eq!(run(["cbb", "gen", "random", "--n", "4", "--p", "2.0"]), 2);
    }
}
