//! CLI driver for the representation-stability toolkit.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use repstab::fourier::{
    convolution_check, fourier_transform, invert, parseval_check, u2_norm4_direct,
    u2_norm4_fourier, MatrixFn, MatrixFnFile, U2_DIRECT_ORDER_CAP,
};
use repstab::group::build_group_str;
use repstab::harness::{construct_input, run_batch, Construction, ExperimentConfig, Task};
use repstab::inverse::inverse_theorem;
use repstab::irreps::{decompose_irreps, matrix_element_orthogonality_check, IrrepTable};
use repstab::stability::{stabilize_with, StabilizeOptions};
use repstab::uniqueness::eps_unitary_intertwiner;

#[derive(Parser)]
#[command(
    name = "repstab",
    version,
    about = "Matrix-valued Fourier analysis on finite groups: U2 inverse theorem, \
             stability and uniqueness of approximate representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args)]
struct TableArgs {
    /// Seed for the randomized irrep decomposition
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Commands {
    /// Compute and certify the irreducible representations of a group
    Irreps {
        /// Group spec: cyclic:<n>, dihedral:<n>, symmetric:<n>, quaternion,
        /// product(<spec>,<spec>), table:<path>
        group_spec: String,
        #[command(flatten)]
        table: TableArgs,
        /// Write dims, characters and residual certificates as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check the Fourier identities for a function file
    Fourier {
        fn_file: PathBuf,
        /// Which identities to check: all, parseval, convolution, inversion, u2
        #[arg(long, default_value = "all")]
        check: String,
        #[command(flatten)]
        table: TableArgs,
    },
    /// The fourth power of the U2 norm of a function file
    U2 {
        fn_file: PathBuf,
        /// Divide by the matrix dimension n
        #[arg(long)]
        normalized: bool,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Run the inverse theorem: extract a correlating partial affine rep
    Invert {
        fn_file: PathBuf,
        /// Correlation threshold c in (0, 1]
        #[arg(long, conflicts_with = "auto_c")]
        c: Option<f64>,
        /// Pick c just below the measured U2 mass
        #[arg(long)]
        auto_c: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Recover a nearby genuine representation from an approximate one
    Stabilize {
        fn_file: PathBuf,
        /// Schatten exponent in [1, 2]
        #[arg(long)]
        p: f64,
        /// Treat the input as an affine approximate representation
        #[arg(long)]
        affine: bool,
        /// Accept values with operator norm <= 1 and unitarize them first
        #[arg(long)]
        relaxed: bool,
        /// Bypass the defect gates and report diagnostically
        #[arg(long)]
        force: bool,
        /// Override the inverse-theorem threshold
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Certify approximate uniqueness of two nearby representations
    Uniqueness {
        rep1: PathBuf,
        rep2: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Run experiments from a config file (a single object or an array)
    Experiment { config: PathBuf },
    /// Generate approximate-representation inputs
    #[command(subcommand)]
    Gen(GenCommands),
}

#[derive(Args)]
struct GenCommon {
    #[arg(long)]
    group: String,
    #[arg(long)]
    irrep_dim: Option<usize>,
    #[arg(long)]
    irrep_index: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCommands {
    /// A genuine irrep times seeded unitary phases with a tuned defect
    Perturbed {
        #[command(flatten)]
        common: GenCommon,
        /// Target multiplicative defect
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// The corner block of a higher-dimensional irrep
    Projection {
        #[command(flatten)]
        common: GenCommon,
    },
    /// Seeded random values clipped to operator norm 1
    RandomBounded {
        #[command(flatten)]
        common: GenCommon,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

fn load_fn(path: &std::path::Path) -> Result<MatrixFn> {
    MatrixFn::load(path).with_context(|| format!("loading function file {}", path.display()))
}

fn table_for(f: &MatrixFn, seed: u64) -> Result<IrrepTable> {
    Ok(decompose_irreps(f.group(), seed)?)
}

fn gen_config(common: &GenCommon, construction: Construction, eps: f64, p: f64, n: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        group: common.group.clone(),
        construction,
        irrep_dim: common.irrep_dim,
        irrep_index: common.irrep_index,
        epsilon: eps,
        p,
        seed: common.seed,
        task: Task::Stabilize,
        c: None,
        input: None,
        n,
        output: None,
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Commands::Irreps { group_spec, table, json } => {
            let group = build_group_str(&group_spec)?;
            let t = decompose_irreps(&group, table.seed)?;
            println!("group {} of order {}", group.name(), group.order());
            println!("irrep dims: {:?} (sum of squares {})", t.dims(), t.sum_dim_sq());
            let cert = t.certificate();
            println!("schur delta residual:        {:.3e}", cert.schur_delta);
            println!("character orthogonality:     {:.3e}", cert.character_orthogonality);
            println!("multiplicativity residual:   {:.3e}", cert.multiplicativity);
            println!("unitarity residual:          {:.3e}", cert.unitarity);
            println!(
                "matrix-element orthogonality: {:.3e}",
                matrix_element_orthogonality_check(&t)
            );
            if let Some(path) = json {
                let payload = json!({
                    "group": group.name(),
                    "order": group.order(),
                    "dims": t.dims(),
                    "characters": t.irreps().iter().map(|r| {
                        r.character().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                    "certificates": {
                        "schur_delta": cert.schur_delta,
                        "character_orthogonality": cert.character_orthogonality,
                        "multiplicativity": cert.multiplicativity,
                        "unitarity": cert.unitarity,
                    },
                });
                std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
                println!("wrote {}", path.display());
            }
        }
        Commands::Fourier { fn_file, check, table } => {
            let f = load_fn(&fn_file)?;
            let t = table_for(&f, table.seed)?;
            let what = check.as_str();
            if !matches!(what, "all" | "parseval" | "convolution" | "inversion" | "u2") {
                bail!("unknown check {check:?}; use all, parseval, convolution, inversion or u2");
            }
            if matches!(what, "all" | "parseval") {
                let (lhs, rhs) = parseval_check(&f, &f, &t)?;
                println!("parseval residual:    {:.3e}", (lhs - rhs).norm());
            }
            if matches!(what, "all" | "convolution") {
                let resid = convolution_check(&f, &f, &t)?;
                println!("convolution residual: {resid:.3e}");
            }
            if matches!(what, "all" | "inversion") {
                let back = invert(&fourier_transform(&f, &t)?, &t)?;
                let resid = f
                    .group()
                    .elements()
                    .map(|x| back.value(x).sub(f.value(x)).max_abs())
                    .fold(0.0, f64::max);
                println!("inversion residual:   {resid:.3e}");
            }
            if matches!(what, "all" | "u2") {
                let via_fourier = u2_norm4_fourier(&f, &t)?;
                if f.group().order() <= U2_DIRECT_ORDER_CAP {
                    let direct = u2_norm4_direct(&f)?;
                    println!("u2 route residual:    {:.3e}", (direct - via_fourier).abs());
                } else {
                    println!("u2 fourth power:      {via_fourier:.9} (fourier route)");
                }
            }
        }
        Commands::U2 { fn_file, normalized, table } => {
            let f = load_fn(&fn_file)?;
            let value = if f.group().order() <= U2_DIRECT_ORDER_CAP {
                u2_norm4_direct(&f)?
            } else {
                u2_norm4_fourier(&f, &table_for(&f, table.seed)?)?
            };
            let value = if normalized { value / f.n() as f64 } else { value };
            println!("{value:.12}");
        }
        Commands::Invert { fn_file, c, auto_c, json, table } => {
            let f = load_fn(&fn_file)?;
            let t = table_for(&f, table.seed)?;
            let c = match (c, auto_c) {
                (Some(c), _) => c,
                (None, true) => {
                    (u2_norm4_fourier(&f, &t)? / f.n() as f64 - 1e-9).clamp(1e-6, 1.0)
                }
                (None, false) => bail!("pass --c <val> or --auto-c"),
            };
            let out = inverse_theorem(&f, &t, c)?;
            println!("c = {c:.6}");
            println!("m = {} (window [{:.4}, {:.4}])", out.m, out.m_window.0, out.m_window.1);
            println!("correlation = {:.9}", out.correlation);
            println!("tau(c)^4 m  = {:.9}", out.tau4_bound);
            println!(
                "certified: correlation >= tau(c)^4 m: {}",
                if out.correlation >= out.tau4_bound - 1e-7 { "PASS" } else { "FAIL" }
            );
            if let Some(path) = json {
                let payload = json!({
                    "c": c,
                    "m": out.m,
                    "correlation": out.correlation,
                    "tau4_bound": out.tau4_bound,
                    "m_window": [out.m_window.0, out.m_window.1],
                    "u": repstab::cmatrix::MatrixJson::from(&out.rep.u),
                    "v": repstab::cmatrix::MatrixJson::from(&out.rep.v),
                    "p": MatrixFnFile::from(&out.rep.p),
                });
                std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
                println!("wrote {}", path.display());
            }
        }
        Commands::Stabilize { fn_file, p, affine, relaxed, force, c, json, table } => {
            let f = load_fn(&fn_file)?;
            let t = table_for(&f, table.seed)?;
            let out = stabilize_with(
                &f,
                &t,
                p,
                StabilizeOptions { affine, relaxed, force, c_override: c },
            )?;
            let r = &out.report;
            println!("epsilon      = {:.9}", r.epsilon);
            println!(
                "n -> m       = {} -> {} (window [{:.4}, {:.4}])",
                r.n, r.m, r.window[0], r.window[1]
            );
            println!("max distance = {:.9}", r.max_distance);
            println!("bound        = {:.9}", r.bound);
            println!("theorem applicable: {}", out.theorem_applicable);
            println!("passed: {}", r.passed);
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(r)?)?;
                println!("wrote {}", path.display());
            }
        }
        Commands::Uniqueness { rep1, rep2, p } => {
            let rho = load_fn(&rep1)?;
            let sigma = load_fn(&rep2)?;
            let out = eps_unitary_intertwiner(&rho, &sigma, p)?;
            println!("epsilon            = {:.9}", out.epsilon);
            println!("rank(T')           = {} of {}", out.common_dim, rho.n());
            println!("|T' - I|'_p        = {:.9}", out.t_prime_dist);
            println!("3 eps              = {:.9}", 3.0 * out.epsilon);
            println!("intertwining resid = {:.3e}", out.intertwining_residual);
            println!("cluster gap ratio  = {:.1}", out.cluster_gap_ratio);
            let pass = out.t_prime_dist <= 3.0 * out.epsilon + 1e-9
                && out.intertwining_residual < 1e-8;
            println!("passed: {pass}");
        }
        Commands::Experiment { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfgs: Vec<ExperimentConfig> = if text.trim_start().starts_with('[') {
                serde_json::from_str(&text)?
            } else {
                vec![serde_json::from_str(&text)?]
            };
            let threads = std::env::var("REPSTAB_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .unwrap_or(1);
            let results = run_batch(&cfgs, threads);
            let mut failures = 0;
            for (cfg, result) in cfgs.iter().zip(results) {
                match result {
                    Ok(report) => {
                        println!(
                            "[{}] {} seed {}: defect {:.6}, passed={} ({} ms)",
                            if report.passed { "ok" } else { "CHECK-FAILED" },
                            cfg.group,
                            cfg.seed,
                            report.defect,
                            report.passed,
                            report.wall_time_ms,
                        );
                        for check in &report.checks {
                            println!(
                                "    {} {}: measured {:.6}, bound {:.6}, margin {:.3e}",
                                if check.passed { "ok " } else { "BAD" },
                                check.name,
                                check.measured,
                                check.bound,
                                check.margin
                            );
                        }
                        if !report.passed {
                            failures += 1;
                        }
                    }
                    Err(e) => {
                        failures += 1;
                        println!("[error] {} seed {}: {e}", cfg.group, cfg.seed);
                    }
                }
            }
            if failures > 0 {
                bail!("{failures} experiment(s) failed");
            }
        }
        Commands::Gen(gen) => {
            let (cfg, label) = match &gen {
                GenCommands::Perturbed { common, eps, p } => {
                    (gen_config(common, Construction::Perturbed, *eps, *p, None), common)
                }
                GenCommands::Projection { common } => {
                    (gen_config(common, Construction::Projection, 0.0, 2.0, None), common)
                }
                GenCommands::RandomBounded { common, n } => {
                    (gen_config(common, Construction::RandomBounded, 0.0, 2.0, Some(*n)), common)
                }
            };
            let group = build_group_str(&cfg.group)?;
            let t = decompose_irreps(&group, cfg.seed)?;
            let f = construct_input(&cfg, &group, &t)?;
            f.save(&label.out)?;
            println!("wrote {} (n = {})", label.out.display(), f.n());
        }
    }
    Ok(())
}
