//! hlab — batch front-end: solve, sweep, verify, export.
//!
//! Every invocation creates one run directory (timestamp + config hash)
//! containing the output files and a manifest. Exit codes: 0 success,
//! 2 usage/configuration, 3 non-convergence, 4 verification failure.

use clap::{Args, Parser, Subcommand};
use hartree_lab::cartesian::{minimize_action_3d, spherical_average, Descent3dConfig, Init3d};
use hartree_lab::maxprinciple;
use hartree_lab::radial::{Parity, RadialField, RadialGrid, SpacingKind};
use hartree_lab::solver::{
    minimize_action, multistart_uniqueness, scf_fixed_point, SolverConfig,
};
use hartree_lab::spectral::hydrogen_eigenpairs;
use hartree_lab::verify::{
    clarkson_a, clarkson_ii, clarkson_l, pohozaev_residuals, quartic_bound_scan,
    scaled_clarkson_pair, IdentityReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

const EXIT_CONFIG: i32 = 2;
const EXIT_NONCONVERGENCE: i32 = 3;
const EXIT_VERIFICATION: i32 = 4;

#[derive(Parser)]
#[command(name = "hlab", version, about = "Hartree solitary-wave laboratory")]
struct Cli {
    /// Base directory for run outputs.
    #[arg(long, global = true, default_value = "runs")]
    out_dir: PathBuf,
    /// Optional JSON config file; explicit flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hydrogen eigenvalues and eigenfunctions of −Δ − 1/|x|.
    Spectrum(SpectrumArgs),
    /// Minimize the action at one ω and export the profile and reports.
    Solve(SolveArgs),
    /// Run identity/inequality batches; nonzero exit if any check fails.
    Verify(VerifyArgs),
    /// ω-sweeps of solver outputs, CSV rows per ω.
    Sweep(SweepArgs),
    /// Maximum-principle comparison functions and the sign dichotomy.
    Maxprinciple(MaxPrincipleArgs),
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = 60.0)]
    rmax: f64,
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct SolveArgs {
    #[arg(long)]
    omega: f64,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    el_tol: f64,
    /// Use the self-consistent-field solver instead of gradient descent.
    #[arg(long)]
    scf: bool,
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct VerifyArgs {
    /// Run every suite.
    #[arg(long)]
    all: bool,
    /// Clarkson identity/inequality batches on random and constructed pairs.
    #[arg(long)]
    clarkson: bool,
    /// Pohozaev residuals on a converged minimizer (requires --omega).
    #[arg(long)]
    pohozaev: bool,
    /// Maximum-principle regime table over --sweep.
    #[arg(long)]
    maxprinciple: bool,
    /// Pair count for the Clarkson batches.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    omega: f64,
    /// ω range start:end:count for the max-principle table.
    #[arg(long, default_value = "0.05:0.6:50")]
    sweep: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct SweepArgs {
    /// ω range start:end:count.
    #[arg(long)]
    omega: String,
    /// One of: action, n, uniqueness, symmetry3d.
    #[arg(long)]
    what: String,
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize, serde::Deserialize, Clone)]
struct MaxPrincipleArgs {
    #[arg(long)]
    omega: Option<f64>,
    /// ω range start:end:count; emits a CSV table.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Serialize)]
struct RunManifest {
    command: Vec<String>,
    config: serde_json::Value,
    seeds: Vec<u64>,
    content_hash: String,
    wall_time_s: f64,
    outputs: Vec<String>,
}

struct Run {
    dir: PathBuf,
    outputs: Vec<String>,
    started: Instant,
    config: serde_json::Value,
    hash: String,
    seeds: Vec<u64>,
}

impl Run {
    fn create(base: &Path, command: &str, config: serde_json::Value) -> anyhow::Result<Run> {
        let canonical = serde_json::to_string(&config)?;
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\n");
        hasher.update(canonical.as_bytes());
        let hash = format!("{:x}", hasher.finalize());
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
        let dir = base.join(format!("{stamp}-{}", &hash[..8]));
        fs::create_dir_all(&dir)?;
        Ok(Run {
            dir,
            outputs: Vec::new(),
            started: Instant::now(),
            config,
            hash,
            seeds: Vec::new(),
        })
    }

    fn file(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.file(name);
        fs::write(path, serde_json::to_string_pretty(value)?)?;
        Ok(())
    }

    fn finish(self) -> anyhow::Result<()> {
        let manifest = RunManifest {
            command: std::env::args().collect(),
            config: self.config,
            seeds: self.seeds,
            content_hash: self.hash,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        fs::write(
            self.dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        println!("run directory: {}", self.dir.display());
        Ok(())
    }
}

fn fail(code: i32, msg: &str) -> ! {
    eprintln!("hlab: {msg}");
    std::process::exit(code);
}

fn core_exit_code(err: &hartree_lab::Error) -> i32 {
    use hartree_lab::Error::*;
    match err {
        Config(_) | Precondition(_) => EXIT_CONFIG,
        GridTooSmall(_) | NonConvergence(_) => EXIT_NONCONVERGENCE,
        Io(_) | Serde(_) => 1,
    }
}

/// RFC 4180 quoting for free-text CSV fields (solver error messages).
fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_range(spec: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let a: f64 = parts[0].parse().ok()?;
    let b: f64 = parts[1].parse().ok()?;
    let k: usize = parts[2].parse().ok()?;
    if k == 0 || !(a.is_finite() && b.is_finite()) || b < a {
        return None;
    }
    if k == 1 {
        return Some(vec![a]);
    }
    Some(
        (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect(),
    )
}

/// Flags keep their defaults unless the config file provides an entry; any
/// field present in the file that is not overridden on the command line is
/// taken from the file. Command line wins because clap has already applied
/// it; the file only fills fields the user left at their default.
fn merge_config<T: Serialize + for<'de> serde::Deserialize<'de>>(
    args: &T,
    file: Option<&Path>,
    cli_args: &[String],
) -> anyhow::Result<T> {
    let Some(path) = file else {
        return Ok(serde_json::from_value(serde_json::to_value(args)?)?);
    };
    let text = fs::read_to_string(path)?;
    let mut base: serde_json::Value = serde_json::from_str(&text)?;
    let flags = serde_json::to_value(args)?;
    let (Some(base_map), Some(flag_map)) = (base.as_object_mut(), flags.as_object()) else {
        anyhow::bail!("config file must hold a JSON object");
    };
    for (key, value) in flag_map {
        let flag_name = format!("--{}", key.replace('_', "-"));
        let explicit = cli_args.iter().any(|a| {
            a == &flag_name || a.starts_with(&format!("{flag_name}="))
        });
        if explicit || !base_map.contains_key(key) {
            base_map.insert(key.clone(), value.clone());
        }
    }
    Ok(serde_json::from_value(base)?)
}

fn main() {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.cmd {
        Cmd::Spectrum(args) => cmd_spectrum(&cli.out_dir, cli.config.as_deref(), &argv, args),
        Cmd::Solve(args) => cmd_solve(&cli.out_dir, cli.config.as_deref(), &argv, args),
        Cmd::Verify(args) => cmd_verify(&cli.out_dir, cli.config.as_deref(), &argv, args),
        Cmd::Sweep(args) => cmd_sweep(&cli.out_dir, cli.config.as_deref(), &argv, args),
        Cmd::Maxprinciple(args) => cmd_maxprinciple(&cli.out_dir, args),
    };
    if let Err(e) = result {
        fail(1, &format!("{e:#}"));
    }
}

fn build_grid(g: &GridArgs) -> Arc<RadialGrid> {
    match RadialGrid::build(g.n, g.rmax, SpacingKind::Uniform) {
        Ok(grid) => grid,
        Err(e) => fail(EXIT_CONFIG, &e.to_string()),
    }
}

fn cmd_spectrum(
    out: &Path,
    config: Option<&Path>,
    argv: &[String],
    args: SpectrumArgs,
) -> anyhow::Result<()> {
    let args: SpectrumArgs = merge_config(&args, config, argv)?;
    let grid = build_grid(&args.grid);
    let mut run = Run::create(out, "spectrum", serde_json::to_value(&args)?)?;
    let pairs = match hydrogen_eigenpairs(&grid, args.kmax) {
        Ok(p) => p,
        Err(e) => fail(core_exit_code(&e), &e.to_string()),
    };
    #[derive(Serialize)]
    struct Row {
        k: usize,
        omega_k: f64,
        hydrogen: f64,
        rel_error: f64,
    }
    let rows: Vec<Row> = pairs
        .iter()
        .map(|p| {
            let hydrogen = 1.0 / (4.0 * (p.k as f64 + 1.0).powi(2));
            Row {
                k: p.k,
                omega_k: p.omega_k,
                hydrogen,
                rel_error: (p.omega_k - hydrogen).abs() / hydrogen,
            }
        })
        .collect();
    run.write_json("eigenvalues.json", &rows)?;
    let mut csv = String::new();
    csv.push('r');
    for p in &pairs {
        csv.push_str(&format!(",e{}", p.k));
    }
    csv.push('\n');
    for (i, &r) in grid.nodes().iter().enumerate() {
        csv.push_str(&format!("{r}"));
        for p in &pairs {
            csv.push_str(&format!(",{}", p.e_k.values()[i]));
        }
        csv.push('\n');
    }
    fs::write(run.file("eigenfunctions.csv"), csv)?;
    for row in &rows {
        println!(
            "k={} omega_k={:.10} hydrogen={:.10} rel_error={:.3e}",
            row.k, row.omega_k, row.hydrogen, row.rel_error
        );
    }
    run.finish()
}

fn cmd_solve(
    out: &Path,
    config: Option<&Path>,
    argv: &[String],
    args: SolveArgs,
) -> anyhow::Result<()> {
    let args: SolveArgs = merge_config(&args, config, argv)?;
    if !(args.omega > 0.0 && args.omega.is_finite()) {
        fail(EXIT_CONFIG, &format!("need omega > 0, got {}", args.omega));
    }
    if args.omega <= 1.0 / 16.0 || args.omega >= 0.25 {
        eprintln!(
            "hlab: warning: omega = {} lies outside the uniqueness regime (1/16, 1/4); attempting anyway",
            args.omega
        );
    }
    let mut cfg = SolverConfig::new(args.omega);
    cfg.n = args.grid.n;
    cfg.r_max = args.grid.rmax;
    cfg.seed = args.seed;
    cfg.max_iters = args.max_iters;
    cfg.el_tol = args.el_tol;
    let mut run = Run::create(out, "solve", serde_json::to_value(&args)?)?;
    run.seeds.push(args.seed);
    let solve = if args.scf {
        scf_fixed_point(&cfg)
    } else {
        minimize_action(&cfg)
    };
    let result = match solve {
        Ok(r) => r,
        Err(e) => fail(core_exit_code(&e), &e.to_string()),
    };
    let mut profile = Vec::new();
    writeln!(profile, "r,chi")?;
    for (r, v) in result.chi.grid().nodes().iter().zip(result.chi.values()) {
        writeln!(profile, "{r},{v}")?;
    }
    fs::write(run.file("profile.csv"), profile)?;
    run.write_json("report.json", &result)?;
    let (p1, p2) = pohozaev_residuals(&result.chi, args.omega, 1e-3);
    run.write_json("pohozaev.json", &[&p1, &p2])?;
    println!(
        "omega={} converged={} collapsed={} iterations={} el_residual={:.3e} S={:.6e}",
        args.omega,
        result.converged,
        result.collapsed,
        result.iterations,
        result.el_residual,
        result.report.action
    );
    println!(
        "pohozaev-1 rel={:.3e} pohozaev-2 rel={:.3e}",
        p1.rel_residual, p2.rel_residual
    );
    run.finish()?;
    if result.collapsed {
        fail(EXIT_NONCONVERGENCE, "iterate collapsed to the zero field");
    }
    if !result.converged {
        fail(
            EXIT_NONCONVERGENCE,
            &format!("iteration cap hit at residual {:.3e}", result.el_residual),
        );
    }
    Ok(())
}

fn cmd_verify(
    out: &Path,
    config: Option<&Path>,
    argv: &[String],
    args: VerifyArgs,
) -> anyhow::Result<()> {
    let args: VerifyArgs = merge_config(&args, config, argv)?;
    let run_clarkson = args.all || args.clarkson;
    let run_pohozaev = args.all || args.pohozaev;
    let run_maxprinciple = args.all || args.maxprinciple;
    if !(run_clarkson || run_pohozaev || run_maxprinciple) {
        fail(EXIT_CONFIG, "select a suite: --all, --clarkson, --pohozaev or --maxprinciple");
    }
    let mut run = Run::create(out, "verify", serde_json::to_value(&args)?)?;
    run.seeds.push(args.seed);
    let mut reports: Vec<IdentityReport> = Vec::new();
    let mut all_hold = true;

    if run_clarkson {
        let grid = build_grid(&GridArgs { n: 512, rmax: 60.0 });
        let pair_grid = build_grid(&GridArgs { n: 1024, rmax: 60.0 });
        use rayon::prelude::*;
        let batch: Vec<Vec<IdentityReport>> = (0..args.n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(i));
                let sample = |rng: &mut ChaCha8Rng| {
                    let a: f64 = rng.gen_range(0.1..1.0);
                    let b: f64 = rng.gen_range(-0.5..0.5);
                    let c: f64 = rng.gen_range(0.2..1.0);
                    RadialField::sample(&grid, Parity::Even, move |r| {
                        (a + b * r) * (-c * r).exp()
                    })
                };
                let f = sample(&mut rng);
                let g = sample(&mut rng);
                let omega = rng.gen_range(0.05..0.4);
                let mut out = vec![clarkson_l(&f, &g, omega), clarkson_a(&f, &g)];
                let amp: f64 = rng.gen_range(0.2..0.8);
                let alpha: f64 = rng.gen_range(0.15..0.6);
                if let Ok((a_field, partner, _)) =
                    scaled_clarkson_pair(&pair_grid, 0.2, amp, alpha)
                {
                    if let Ok((id, iq)) = clarkson_ii(&a_field, &partner, 0.5, 0.5, 0.2) {
                        out.push(id);
                        out.push(iq);
                    }
                }
                out
            })
            .collect();
        for mut b in batch {
            reports.append(&mut b);
        }
        let scan = quartic_bound_scan(20_001).unwrap();
        reports.push(IdentityReport::equality(
            "quartic-scan-max",
            scan.max_value,
            1.0,
            1e-12,
        ));
    }

    if run_pohozaev {
        let mut cfg = SolverConfig::new(args.omega);
        cfg.n = 2048;
        cfg.r_max = 60.0;
        match minimize_action(&cfg) {
            Ok(res) if res.converged => {
                let (p1, p2) = pohozaev_residuals(&res.chi, args.omega, 1e-3);
                reports.push(p1);
                reports.push(p2);
            }
            Ok(res) => fail(
                EXIT_NONCONVERGENCE,
                &format!("solver stalled at residual {:.3e}", res.el_residual),
            ),
            Err(e) => fail(core_exit_code(&e), &e.to_string()),
        }
    }

    if run_maxprinciple {
        let Some(omegas) = parse_range(&args.sweep) else {
            fail(EXIT_CONFIG, &format!("bad range {:?}", args.sweep));
        };
        let mut csv = String::from(
            "omega,regime,q_always_positive,q_first_root,h_min,residual_rel,residual_holds\n",
        );
        for row in maxprinciple::sweep(&omegas) {
            match row {
                Ok(r) => {
                    let regime_ok = if r.omega > 0.25 {
                        r.q_always_positive
                    } else {
                        !r.q_always_positive
                    };
                    all_hold &= regime_ok && r.residual_holds && r.h_min >= -1e-10;
                    csv.push_str(&format!(
                        "{},{:?},{},{},{},{},{}\n",
                        r.omega,
                        r.regime,
                        r.q_always_positive,
                        r.q_first_root.map_or(String::new(), |v| v.to_string()),
                        r.h_min,
                        r.residual_rel,
                        r.residual_holds
                    ));
                }
                Err(e) => fail(core_exit_code(&e), &e.to_string()),
            }
        }
        fs::write(run.file("maxprinciple.csv"), csv)?;
    }

    run.write_json("identity_reports.json", &reports)?;
    let mut by_name: std::collections::BTreeMap<String, (usize, usize, f64)> = Default::default();
    for r in &reports {
        let e = by_name.entry(r.name.clone()).or_insert((0, 0, 0.0));
        e.0 += 1;
        if r.holds {
            e.1 += 1;
        } else {
            all_hold = false;
        }
        e.2 = e.2.max(r.rel_residual);
    }
    println!("{:<34} {:>6} {:>6} {:>12}", "check", "total", "held", "worst rel");
    for (name, (total, held, worst)) in &by_name {
        println!("{name:<34} {total:>6} {held:>6} {worst:>12.3e}");
    }
    run.finish()?;
    if !all_hold {
        fail(EXIT_VERIFICATION, "at least one check failed");
    }
    Ok(())
}

fn cmd_sweep(
    out: &Path,
    config: Option<&Path>,
    argv: &[String],
    args: SweepArgs,
) -> anyhow::Result<()> {
    let args: SweepArgs = merge_config(&args, config, argv)?;
    let Some(omegas) = parse_range(&args.omega) else {
        fail(EXIT_CONFIG, &format!("bad range {:?}", args.omega));
    };
    if args.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build_global()
            .ok();
    }
    let mut run = Run::create(out, "sweep", serde_json::to_value(&args)?)?;
    run.seeds.push(args.seed);
    use rayon::prelude::*;
    let base = {
        let mut cfg = SolverConfig::new(0.2);
        cfg.n = args.grid.n;
        cfg.r_max = args.grid.rmax;
        cfg.seed = args.seed;
        cfg
    };
    let mut csv = String::new();
    match args.what.as_str() {
        "action" | "n" | "N" => {
            csv.push_str("omega,s_min,n_mass,el_residual,pohozaev1_rel,pohozaev2_rel,status\n");
            let rows: Vec<String> = omegas
                .par_iter()
                .map(|&omega| {
                    let mut cfg = base.clone();
                    cfg.omega = omega;
                    match minimize_action(&cfg) {
                        Ok(res) if res.converged => {
                            let (p1, p2) = pohozaev_residuals(&res.chi, omega, 1e-3);
                            format!(
                                "{omega},{},{},{},{},{},ok\n",
                                res.report.action,
                                res.report.l2_sq,
                                res.el_residual,
                                p1.rel_residual,
                                p2.rel_residual
                            )
                        }
                        Ok(res) => format!(
                            "{omega},,,{},,,stalled at {:.3e}\n",
                            res.el_residual, res.el_residual
                        ),
                        Err(e) => format!("{omega},,,,,,{}\n", csv_escape(&format!("error: {e}"))),
                    }
                })
                .collect();
            for row in rows {
                csv.push_str(&row);
            }
            for &omega in &omegas {
                if omega <= 1.0 / 16.0 || omega >= 0.25 {
                    eprintln!(
                        "hlab: warning: omega = {omega} lies outside the uniqueness regime (1/16, 1/4)"
                    );
                }
            }
        }
        "uniqueness" => {
            csv.push_str("omega,n_starts,n_converged,max_pairwise_rel_l2,status\n");
            for &omega in &omegas {
                match multistart_uniqueness(omega, args.starts, args.seed, &base) {
                    Ok((rep, _)) => csv.push_str(&format!(
                        "{omega},{},{},{},ok\n",
                        rep.n_starts, rep.n_converged, rep.max_pairwise_rel_l2
                    )),
                    Err(e) => csv.push_str(&format!("{omega},{},,,{}\n", args.starts, csv_escape(&format!("error: {e}")))),
                }
            }
        }
        "symmetry3d" => {
            csv.push_str("omega,symmetry_deficit,status\n");
            for &omega in &omegas {
                let mut cfg = Descent3dConfig::coarse();
                cfg.seed = args.seed;
                cfg.init = Init3d::RandomPerturbed;
                match minimize_action_3d(omega, &cfg) {
                    Ok((field, deficit)) => {
                        csv.push_str(&format!("{omega},{deficit},ok\n"));
                        let mut avg = String::from("r,chi_avg\n");
                        for (r, v) in spherical_average(&field) {
                            avg.push_str(&format!("{r},{v}\n"));
                        }
                        fs::write(
                            run.file(&format!("spherical_avg_omega_{omega:.4}.csv")),
                            avg,
                        )?;
                    }
                    Err(e) => csv.push_str(&format!("{omega},,{}\n", csv_escape(&format!("error: {e}")))),
                }
            }
        }
        other => fail(EXIT_CONFIG, &format!("unknown sweep kind {other:?}")),
    }
    fs::write(run.file("sweep.csv"), &csv)?;
    print!("{csv}");
    run.finish()
}

fn cmd_maxprinciple(out: &Path, args: MaxPrincipleArgs) -> anyhow::Result<()> {
    match (&args.omega, &args.sweep) {
        (Some(omega), None) => {
            let (spec, phi) = match maxprinciple::build_test_function(*omega) {
                Ok(v) => v,
                Err(e) => fail(core_exit_code(&e), &e.to_string()),
            };
            let (rep, h_min) = maxprinciple::residual_h(&spec, &phi);
            let sign = maxprinciple::q_sign_analysis(&spec);
            println!("{}", serde_json::to_string_pretty(&spec)?);
            println!("q_always_positive: {}", sign.always_positive);
            if let Some(root) = sign.first_root {
                println!("q_first_root: {root}");
            }
            println!(
                "closed-form residual: rel={:.3e} holds={} h_min={:.3e}",
                rep.rel_residual, rep.holds, h_min
            );
            Ok(())
        }
        (None, Some(range)) => {
            let Some(omegas) = parse_range(range) else {
                fail(EXIT_CONFIG, &format!("bad range {range:?}"));
            };
            let mut run = Run::create(
                out,
                "maxprinciple",
                serde_json::json!({ "sweep": range }),
            )?;
            let mut csv = String::from(
                "omega,regime,q_always_positive,q_first_root,h_min,residual_rel,residual_holds\n",
            );
            for row in maxprinciple::sweep(&omegas) {
                match row {
                    Ok(r) => csv.push_str(&format!(
                        "{},{:?},{},{},{},{},{}\n",
                        r.omega,
                        r.regime,
                        r.q_always_positive,
                        r.q_first_root.map_or(String::new(), |v| v.to_string()),
                        r.h_min,
                        r.residual_rel,
                        r.residual_holds
                    )),
                    Err(e) => fail(core_exit_code(&e), &e.to_string()),
                }
            }
            fs::write(run.file("maxprinciple.csv"), &csv)?;
            print!("{csv}");
            run.finish()
        }
        _ => fail(EXIT_CONFIG, "give exactly one of --omega or --sweep"),
    }
}
