use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use knn_nmi::harness::{
    log_uniform_radii, parse_dims, run_sweep, stability_profile, summarize, ExperimentConfig,
    Status, RHO_GENERATION_CAP,
};
use knn_nmi::synthetic::GENERATOR_ID;
use knn_nmi::{
    estimate, generate_gaussian, generate_student_t, io as kio, Backend, Error, GaussianSpec,
    NmiValue, Result, StudentTSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "knn-nmi",
    version,
    about = "k-NN normalized mutual information experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FamilyArg {
    Gaussian,
    StudentT,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment sweep described by a TOML config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Records CSV (written to stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional JSON-lines mirror of the records.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// Aggregate a records CSV into per-cell means and standard deviations.
    Summarize {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate ln V of every backend against the joint dimension.
    Stability {
        /// Fixed radii, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "random")]
        radii: Vec<f64>,
        /// Draw this many radii log-uniform on [0.1, 10] instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Joint dimensions, e.g. "2:4096:2,1000000".
        #[arg(long, default_value = "2:4096:2")]
        dims: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset as CSV.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        d: usize,
        #[arg(long, required_if_eq("family", "gaussian"))]
        rho: Option<f64>,
        #[arg(long, required_if_eq("family", "student-t"))]
        nu: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate MI, entropies and NMI of a CSV dataset.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// X columns; inferred from the header when omitted together with --dy.
        #[arg(long, requires = "dy")]
        dx: Option<usize>,
        #[arg(long, requires = "dx")]
        dy: Option<usize>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "proposed")]
        backend: String,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_opt(v: Option<f64>) -> serde_json::Value {
    v.map_or(serde_json::Value::Null, |x| json!(x))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { config, out, jsonl } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::from_toml(&text)?;
            let records = run_sweep(&cfg)?;
            kio::write_records_csv(&records, output(out.as_deref())?)?;
            if let Some(p) = jsonl {
                kio::write_records_jsonl(&records, BufWriter::new(File::create(p)?))?;
            }
            if let Some(p) = out {
                let meta = json!({
                    "crate_version": env!("CARGO_PKG_VERSION"),
                    "generator": GENERATOR_ID,
                    "seed_derivation": "splitmix64 fold over (base_seed, family, d, param bits, repetition)",
                    "rho_generation_cap": RHO_GENERATION_CAP,
                    "note": "grid points with rho >= 1 are generated at rho_generation_cap; nmi_true keeps the requested rho (capped at 1)",
                    "config": cfg,
                });
                let mut meta_path = p.into_os_string();
                meta_path.push(".meta.json");
                let mut w = BufWriter::new(File::create(meta_path)?);
                serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| Error::Io(e.into()))?;
                w.write_all(b"\n")?;
            }
            let overflow = records
                .iter()
                .filter(|r| r.status == Status::Overflow)
                .count();
            eprintln!("{} records ({} overflow)", records.len(), overflow);
        }
        Command::Summarize { records, out } => {
            let recs = kio::read_records_csv(BufReader::new(File::open(records)?))?;
            kio::write_summary_csv(&summarize(&recs), output(out.as_deref())?)?;
        }
        Command::Stability {
            radii,
            random,
            seed,
            dims,
            out,
        } => {
            let epsilon = match random {
                Some(n) => log_uniform_radii(n, 0.1, 10.0, seed)?,
                None if radii.is_empty() => vec![1.0, 2.0],
                None => radii,
            };
            let rows = stability_profile(&epsilon, &parse_dims(&dims)?)?;
            kio::write_stability_csv(&rows, output(out.as_deref())?)?;
        }
        Command::Gen {
            family,
            d,
            rho,
            nu,
            n,
            seed,
            out,
        } => {
            let data = match family {
                FamilyArg::Gaussian => generate_gaussian(&GaussianSpec {
                    d,
                    rho: rho.unwrap_or_default(),
                    n,
                    seed,
                })?,
                FamilyArg::StudentT => generate_student_t(&StudentTSpec {
                    d,
                    nu: nu.unwrap_or_default(),
                    n,
                    seed,
                })?,
            };
            kio::write_dataset_csv(&data, output(out.as_deref())?)?;
        }
        Command::Estimate {
            input,
            dx,
            dy,
            k,
            backend,
        } => {
            let backend: Backend = backend.parse()?;
            let dims = dx.zip(dy);
            let data = kio::read_dataset_csv(BufReader::new(File::open(input)?), dims)?;
            let value = match estimate(&data, k, backend) {
                Ok(rep) => json!({
                    "status": match rep.nmi { NmiValue::Defined(_) => "ok", NmiValue::Undefined { .. } => "undefined_nmi" },
                    "backend": backend,
                    "n": rep.n_samples,
                    "k": rep.k,
                    "d_x": data.d_x(),
                    "d_y": data.d_y(),
                    "ln_v": rep.ln_v,
                    "mi_ksg": rep.mi_ksg,
                    "h_x": rep.h_x,
                    "h_y": rep.h_y,
                    "h_xy": rep.h_xy,
                    "mi_from_entropies": rep.mi_from_entropies,
                    "nmi": fmt_opt(rep.nmi.value()),
                }),
                Err(Error::NonFiniteNormalization { ln_v, .. }) => json!({
                    "status": "overflow",
                    "backend": backend,
                    "n": data.n(),
                    "k": k,
                    "d_x": data.d_x(),
                    "d_y": data.d_y(),
                    "ln_v": ln_v.to_string(),
                }),
                Err(e) => return Err(e),
            };
            let mut w = output(None)?;
            serde_json::to_writer_pretty(&mut w, &value).map_err(|e| Error::Io(e.into()))?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
