use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ustat_boot::config::{
    build_kernel, build_process, parse_scheme, CellSpec, KernelConfig, ProcessConfig, RunConfig,
};
use ustat_boot::output::{write_csv, write_json, TableRow};
use ustat_boot_core::blocksel::{select_block_length, BlockSelectConfig};
use ustat_boot_core::experiments::{run_cell, run_table};
use ustat_boot_core::kernels::Kernel;
use ustat_boot_core::procgen::RngStream;
use ustat_boot_core::ustat::degenerate_second_moment;

/// U-statistics of dependent series: block bootstrap distributions, the
/// normal approximation and block-length selection.
#[derive(Parser)]
#[command(name = "ustat-boot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole Monte Carlo table and write CSV/JSON artifacts.
    Table {
        /// JSON run configuration; defaults to the built-in study.
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON output path; defaults to the CSV path with a .json
        /// extension.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run only the first N cells.
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Run a single (n, l) cell and print its summary.
    Cell {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long = "boot-reps", default_value_t = 10_000)]
        boot_reps: usize,
        #[arg(long = "ref-reps", default_value_t = 10_000)]
        ref_reps: usize,
        #[arg(long, default_value = "circular")]
        scheme: String,
        #[arg(long, default_value = "ar1")]
        process: String,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        sd: f64,
        #[arg(long, default_value = "variance")]
        kernel: String,
        /// Indicator kernel threshold.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Reference location: "mean" removes the finite-n bias of U_n,
        /// "theta" keeps the raw draws.
        #[arg(long = "reference-center", default_value = "mean", value_parser = ["mean", "theta"])]
        reference_center: String,
        /// Optional single-row CSV artifact.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the optimal block length by subsampling; prints the MSE
    /// curve as CSV and the selected length.
    SelectL {
        /// Series length to simulate.
        #[arg(long)]
        n: usize,
        /// Subsample window length.
        #[arg(long)]
        m: usize,
        /// Pilot block length for the full-sample target.
        #[arg(long)]
        pilot: usize,
        /// Grid width parameter in (0, 1).
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Bootstrap replicates per variance estimate.
        #[arg(long, default_value_t = 200)]
        bsel: usize,
        #[arg(long, default_value = "ar1")]
        process: String,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        sd: f64,
        #[arg(long, default_value = "variance")]
        kernel: String,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value = "circular")]
        scheme: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Writes the MSE curve CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decay study of the degenerate part: E[n U_n^2(h2)] over a list of
    /// series lengths.
    Decay {
        /// Base kernel whose population degenerate part is studied.
        #[arg(long, default_value = "variance", value_parser = ["variance"])]
        kernel: String,
        /// Comma-separated series lengths.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        sd: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Table {
            config,
            out,
            json,
            seed,
            rows,
        } => run_table_command(config, out, json, seed, rows),
        Command::Cell {
            n,
            l,
            reps,
            boot_reps,
            ref_reps,
            scheme,
            process,
            phi,
            sd,
            kernel,
            t,
            seed,
            reference_center,
            out,
        } => {
            let cfg = RunConfig {
                cells: vec![CellSpec { n, l: Some(l) }],
                reps,
                boot_reps,
                ref_reps,
                scheme,
                process: ProcessConfig {
                    kind: process,
                    phi: Some(phi),
                    sd: Some(sd),
                },
                kernel: KernelConfig { name: kernel, t },
                seed,
                reference_center,
            };
            run_cell_command(&cfg, out)
        }
        Command::SelectL {
            n,
            m,
            pilot,
            eps,
            bsel,
            process,
            phi,
            sd,
            kernel,
            t,
            scheme,
            seed,
            out,
        } => run_select_command(
            n, m, pilot, eps, bsel, &process, phi, sd, &kernel, t, &scheme, seed, out,
        ),
        Command::Decay {
            kernel: _,
            ns,
            reps,
            phi,
            sd,
            seed,
        } => run_decay_command(&ns, reps, phi, sd, seed),
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>, rows: Option<usize>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default_table(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(rows) = rows {
        cfg.cells.truncate(rows);
    }
    if cfg.cells.is_empty() {
        anyhow::bail!("configuration selects no cells");
    }
    Ok(cfg)
}

fn warn_if_normal_scale_is_foreign(cfg: &RunConfig) {
    if cfg.kernel.name != "variance" {
        eprintln!(
            "note: the normal-approximation scale estimates Var[sigma_hat^2]; \
             D_norm is only meaningful for the variance kernel"
        );
    }
}

fn run_table_command(
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    json: Option<PathBuf>,
    seed: Option<u64>,
    rows: Option<usize>,
) -> Result<()> {
    let cfg = load_config(config.as_deref(), seed, rows)?;
    warn_if_normal_scale_is_foreign(&cfg);
    let cells = cfg.cell_configs()?;
    let results = run_table(&cells, &RngStream::from_seed(cfg.seed))?;
    let table: Vec<TableRow> = results
        .iter()
        .map(|cell| TableRow::from_cell(cell, cfg.seed))
        .collect();

    let csv = write_csv(&table);
    match &out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            let json_path = json.unwrap_or_else(|| path.with_extension("json"));
            fs::write(&json_path, write_json(&table))
                .with_context(|| format!("writing {}", json_path.display()))?;
            eprintln!("wrote {} and {}", path.display(), json_path.display());
        }
        None => {
            print!("{csv}");
            if let Some(json_path) = json {
                fs::write(&json_path, write_json(&table))
                    .with_context(|| format!("writing {}", json_path.display()))?;
            }
        }
    }
    Ok(())
}

fn run_cell_command(cfg: &RunConfig, out: Option<PathBuf>) -> Result<()> {
    warn_if_normal_scale_is_foreign(cfg);
    let cell_cfg = cfg.cell_configs()?.remove(0);
    let cell = run_cell(&cell_cfg, &RngStream::from_seed(cfg.seed).child(0))?;
    let row = TableRow::from_cell(&cell, cfg.seed);

    println!(
        "n={} l={} scheme={} reps={} seed={}",
        row.n, row.l, row.scheme, row.reps, row.seed
    );
    println!(
        "d_boot: mean={} median={} q1={} q3={} outliers={}",
        row.mean_d_boot, row.median_d_boot, row.q1, row.q3, row.outliers_boot
    );
    println!(
        "d_norm: mean={} median={} q1={} q3={} outliers={}",
        row.mean_d_norm,
        cell.norm_summary.median,
        cell.norm_summary.q1,
        cell.norm_summary.q3,
        row.outliers_norm
    );

    if let Some(path) = out {
        fs::write(&path, write_csv(&[row]))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_select_command(
    n: usize,
    m: usize,
    pilot: usize,
    eps: f64,
    bsel: usize,
    process: &str,
    phi: f64,
    sd: f64,
    kernel: &str,
    t: Option<f64>,
    scheme: &str,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let process = build_process(&ProcessConfig {
        kind: process.to_string(),
        phi: Some(phi),
        sd: Some(sd),
    })?;
    let kernel = build_kernel(&KernelConfig {
        name: kernel.to_string(),
        t,
    })?;
    let kind = parse_scheme(scheme)?;
    let cfg = BlockSelectConfig {
        pilot_block_length: pilot,
        subsample_size: m,
        epsilon: eps,
        boot_reps: bsel,
    };

    let root = RngStream::from_seed(seed);
    let series = process.simulate(n, &mut root.child(0))?;
    let result = select_block_length(&series, &kernel, &cfg, kind, &root.child(1))?;

    let mut curve = String::from("l,mse\n");
    for (l, mse) in &result.mse_curve {
        curve.push_str(&format!("{l},{mse}\n"));
    }
    match out {
        Some(path) => {
            fs::write(&path, curve).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{curve}"),
    }
    println!("l_hat={}", result.block_length);
    Ok(())
}

fn run_decay_command(ns: &[usize], reps: usize, phi: f64, sd: f64, seed: u64) -> Result<()> {
    // Population degenerate part of the variance kernel for a mean-zero
    // marginal: h2(x, y) = -x y.
    let kernel = Kernel::custom("variance-degenerate", |x, y| -x * y);
    let process = build_process(&ProcessConfig {
        kind: "ar1".to_string(),
        phi: Some(phi),
        sd: Some(sd),
    })?;
    let rng = RngStream::from_seed(seed);
    println!("n,estimate");
    for &n in ns {
        // One shared substream family: the same replication index reuses
        // the same seed path across n, pairing the estimates.
        let estimate = degenerate_second_moment(&kernel, &process, n, reps, &rng)?;
        println!("{n},{estimate}");
    }
    Ok(())
}
