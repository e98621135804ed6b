use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mts_core::harness::config::OutputConfig;
use mts_core::harness::report::{inspect_decision_log, render_bench_csv, render_bench_markdown, summarize};
use mts_core::harness::{emit_report, run_bench, run_experiment, ExperimentConfig, Manifest, Method, ReportFormat};
use mts_core::theory::run_theory_suite;
use mts_core::{MtsError, SeededRng};

#[derive(Parser)]
#[command(name = "mts", version, about = "Truth-serum aggregation of classifier ensembles")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        /// JSON experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset CSV; overrides the config.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Comma-separated methods, e.g. majority,hmts,dmts.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Report directory; defaults to $MTS_OUTPUT_DIR, then ./reports.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Comma-separated formats: markdown, csv, plain.
        #[arg(long, value_delimiter = ',')]
        format: Vec<String>,
    },
    /// Run the manifest datasets over several seeds.
    Bench {
        #[arg(long, default_value = "data/manifest.json")]
        manifest: PathBuf,
        /// Directory holding the CSVs; defaults to the manifest's directory.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Base config applied to every dataset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of seeds, starting at the master seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Comma-separated dataset names; all by default.
        #[arg(long, value_delimiter = ',')]
        datasets: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Also write per-seed reports and decision logs.
        #[arg(long)]
        per_seed: bool,
    },
    /// Check the counterfactual and underestimation theorems on random models.
    TheoryCheck {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
    /// Print a decision log as a table.
    Inspect {
        path: PathBuf,
        /// Only high-disagreement instances.
        #[arg(long)]
        disagreement: bool,
        #[arg(long)]
        limit: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            let kind = err.downcast_ref::<MtsError>().map(MtsError::kind).unwrap_or("runtime");
            let line = serde_json::json!({ "kind": kind, "message": format!("{err:#}") });
            eprintln!("error: {line}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    })
}

fn parse_formats(formats: &[String]) -> anyhow::Result<Vec<ReportFormat>> {
    Ok(formats
        .iter()
        .map(|f| ReportFormat::parse(f))
        .collect::<Result<_, _>>()?)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            dataset,
            methods,
            output_dir,
            format,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(d) = dataset {
                cfg.dataset = d;
            }
            if cfg.dataset.as_os_str().is_empty() {
                return Err(MtsError::Configuration("no dataset given (use --dataset or the config)".into()).into());
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if !methods.is_empty() {
                cfg.methods = methods.iter().map(|m| Method::parse(m)).collect::<Result<_, _>>()?;
            }
            if output_dir.is_some() {
                cfg.output.dir = output_dir;
            }
            if !format.is_empty() {
                cfg.output.formats = parse_formats(&format)?;
            }
            let report = run_experiment(&cfg)?;
            let paths = emit_report(&report, &cfg.output.resolved_formats(), &cfg.output.resolved_dir())?;
            print!("{}", mts_core::harness::report::render_plain(&report));
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            manifest,
            data_dir,
            config,
            seeds,
            datasets,
            output_dir,
            per_seed,
        } => {
            let base = load_config(config.as_deref())?;
            base.validate()?;
            let mut m = Manifest::load(&manifest)?;
            let data_dir = data_dir
                .or_else(|| manifest.parent().map(Path::to_path_buf))
                .unwrap_or_default();
            let start = cli.seed.unwrap_or(base.seed);
            let seed_list: Vec<u64> = (start..start + seeds).collect();
            let only = (!datasets.is_empty()).then_some(datasets.as_slice());
            let outcome = run_bench(&mut m, &data_dir, &base, &seed_list, only)?;
            if outcome.manifest_updated {
                m.save(&manifest)?;
                println!("recorded checksums in {}", manifest.display());
            }
            let output = OutputConfig {
                dir: output_dir.or(base.output.dir.clone()),
                formats: base.output.formats.clone(),
            };
            let dir = output.resolved_dir();
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            if per_seed {
                for r in &outcome.reports {
                    emit_report(r, &output.resolved_formats(), &dir)?;
                }
            }
            let summaries = summarize(&outcome.reports);
            let md = render_bench_markdown(&summaries);
            std::fs::write(dir.join("bench.md"), &md).with_context(|| format!("writing {}", dir.display()))?;
            std::fs::write(dir.join("bench.csv"), render_bench_csv(&summaries)?)?;
            print!("{md}");
            for (name, reason) in &outcome.skipped {
                println!("skipped {name}: {reason}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::TheoryCheck { cases } => {
            if cases == 0 {
                bail!(MtsError::Configuration("cases must be positive".into()));
            }
            let summary = run_theory_suite(cases, &SeededRng::new(cli.seed.unwrap_or(0)));
            println!(
                "theorem 1: {} of {} models pass (max deviation {:.3e})",
                summary.theorem1_cases - summary.theorem1_failures,
                summary.theorem1_cases,
                summary.theorem1_max_deviation
            );
            println!(
                "theorem 2: {} of {} models pass, {} strict, acceptance rate {:.1}%",
                summary.theorem2_cases - summary.theorem2_failures,
                summary.theorem2_cases,
                summary.theorem2_strict,
                100.0 * summary.acceptance_rate
            );
            println!(
                "all-correct edge case: {}",
                if summary.edge_case_passed { "pass" } else { "FAIL" }
            );
            for c in &summary.counterexamples {
                println!("counterexample: {c}");
            }
            Ok(if summary.passed() {
                println!("PASS");
                ExitCode::SUCCESS
            } else {
                println!("FAIL");
                ExitCode::FAILURE
            })
        }
        Command::Inspect {
            path,
            disagreement,
            limit,
        } => {
            print!("{}", inspect_decision_log(&path, disagreement, limit)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
