use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bcbench::collect::{
    collect_successful, config_attributes, geometric_mean, missing_runs, model_data, read_csv, speedup_table, write_csv,
    ResultFrame,
};
use bcbench::orchestrator::{
    experiments_launch, experiments_list, experiments_purge, instances_download, ExperimentConfig, PurgeFilter,
    RunStatus,
};
use bcbench::plots::{box_plot_svg, relative_deviation, scatter_svg, speedup_bars_svg, write_figure};
use bcbench::plots::{MarkShape, PlotSeries, ScatterOptions};
use bcbench::runfile::{write_run_output, ParamValue, DEFAULT_TOP_K};
use bcbench::stats::{
    fit_model, summarize, wilcoxon_signed_rank, McmcSettings, ModelSpec, ModelVariant, PairedSample,
};
use bcbench::workload::{build_metadata, run_workload, WorkloadAlgorithm, WorkloadError, WorkloadParams};

/// Exit code for partial failures (some runs or instances failed).
const EXIT_PARTIAL: u8 = 1;
/// Exit code for usage errors and unreadable inputs.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "bcbench", version, about = "Betweenness-centrality benchmark workload and experiment pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance and print the run record to stdout.
    Run(RunArgs),
    /// Manage benchmark instances.
    #[command(subcommand)]
    Instances(InstancesCommand),
    /// Launch, list and purge experiment runs.
    #[command(subcommand)]
    Experiments(ExperimentsCommand),
    /// Gather successful runs into a CSV file.
    Collect(CollectArgs),
    /// Compare two algorithms: speedups, Wilcoxon test and a Bayesian model.
    Analyze(AnalyzeArgs),
    /// Draw scatter, speedup and deviation figures as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Brandes,
    Kadabra,
    Rk,
}

#[derive(Args)]
struct RunArgs {
    /// Worker threads; only 1 is supported, larger values are recorded and ignored.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(value_enum)]
    algorithm: AlgorithmArg,
    /// Edge-list file.
    instance: PathBuf,
    /// Absolute error bound for sampling algorithms.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Failure probability for sampling algorithms.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Samples per round between stopping checks (kadabra).
    #[arg(long, default_value_t = 10)]
    c: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of top-ranked nodes to report.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    topk: usize,
    /// Treat edges as directed.
    #[arg(long)]
    directed: bool,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment configuration file.
    #[arg(long, default_value = "experiments.yml")]
    config: PathBuf,
}

#[derive(Subcommand)]
enum InstancesCommand {
    /// Download or generate every configured instance that is not present yet.
    Download(ConfigArg),
}

#[derive(Clone, Copy, ValueEnum)]
enum StatusArg {
    Pending,
    Running,
    Finished,
    Failed,
}

impl From<StatusArg> for RunStatus {
    fn from(s: StatusArg) -> Self {
        match s {
            StatusArg::Pending => RunStatus::Pending,
            StatusArg::Running => RunStatus::Running,
            StatusArg::Finished => RunStatus::Finished,
            StatusArg::Failed => RunStatus::Failed,
        }
    }
}

#[derive(Subcommand)]
enum ExperimentsCommand {
    /// Execute every run without output or failure marker.
    Launch(ConfigArg),
    /// Show the status of every run.
    List {
        #[command(flatten)]
        config: ConfigArg,
        /// Only show runs with this status.
        #[arg(long, value_enum)]
        status: Option<StatusArg>,
    },
    /// Delete outputs and failure markers of matching runs.
    Purge {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum)]
        status: Option<StatusArg>,
        /// Configuration name (repeatable).
        #[arg(long)]
        name: Vec<String>,
        /// Instance name (repeatable).
        #[arg(long)]
        instance: Vec<String>,
        /// Repetition index (repeatable).
        #[arg(long)]
        repetition: Vec<u32>,
        /// Purge every run.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args)]
struct CollectArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Directory for the CSV file.
    #[arg(long, default_value = "results")]
    output_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "size_scaling", alias = "size-scaling")]
    SizeScaling,
    #[value(name = "relative_time", alias = "relative-time")]
    RelativeTime,
    #[value(name = "relative_time_with_diameter", alias = "relative-time-with-diameter")]
    RelativeTimeWithDiameter,
}

impl From<ModelArg> for ModelVariant {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::SizeScaling => ModelVariant::SizeScaling,
            ModelArg::RelativeTime => ModelVariant::RelativeTime,
            ModelArg::RelativeTimeWithDiameter => ModelVariant::RelativeTimeWithDiameter,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Collected runs.
    #[arg(long, default_value = "results/runs.csv")]
    csv: PathBuf,
    /// Algorithm (configuration name) in the numerator of the model.
    #[arg(long)]
    a: String,
    /// Baseline algorithm.
    #[arg(long)]
    b: Option<String>,
    #[arg(long, value_enum, default_value = "relative_time")]
    model: ModelArg,
    /// Draws per chain after warmup.
    #[arg(long, default_value_t = 5000)]
    draws: usize,
    #[arg(long, default_value_t = 1000)]
    warmup: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the summary CSV.
    #[arg(long, default_value = "results")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, default_value = "results/runs.csv")]
    csv: PathBuf,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Used in figure file names.
    #[arg(long, default_value = "experiment")]
    experiment: String,
    #[arg(long, default_value = "results")]
    output_dir: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => return cmd_run(args),
        Command::Instances(InstancesCommand::Download(c)) => cmd_download(&c.config),
        Command::Experiments(cmd) => cmd_experiments(cmd),
        Command::Collect(args) => cmd_collect(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Plot(args) => cmd_plot(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let algorithm = match args.algorithm {
        AlgorithmArg::Brandes => WorkloadAlgorithm::Brandes,
        AlgorithmArg::Kadabra => WorkloadAlgorithm::Kadabra,
        AlgorithmArg::Rk => WorkloadAlgorithm::Rk,
    };
    if args.threads > 1 {
        eprintln!("warning: --threads={} requested; this build runs single-threaded", args.threads);
    }
    let params = WorkloadParams {
        algorithm,
        epsilon: args.epsilon,
        delta: args.delta,
        c: args.c,
        seed: args.seed,
        topk: args.topk,
        directed: args.directed,
    };
    let meta = build_metadata();
    for w in &meta.warnings {
        log::info!("{w}");
    }
    match run_workload(&args.instance, &params, meta.info) {
        Ok(mut result) => {
            for note in &result.notes {
                eprintln!("{note}");
            }
            if args.threads != 1 {
                result
                    .record
                    .parameters
                    .extra
                    .insert("threads".into(), ParamValue::Int(args.threads as i64));
            }
            match write_run_output(&result.record) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_PARTIAL)
                }
            }
        }
        Err(e @ WorkloadError::Load(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e @ WorkloadError::Algorithm(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?)
}

fn cmd_download(config: &Path) -> Result<u8> {
    let cfg = load_config(config)?;
    let report = instances_download(&cfg);
    println!(
        "{} fetched, {} generated, {} present, {} failed",
        report.fetched(),
        report.generated(),
        report.skipped(),
        report.failed().len()
    );
    for (name, reason) in report.failed() {
        println!("failed: {name}: {reason}");
    }
    Ok(if report.is_success() { 0 } else { EXIT_PARTIAL })
}

fn cmd_experiments(cmd: ExperimentsCommand) -> Result<u8> {
    match cmd {
        ExperimentsCommand::Launch(c) => {
            let cfg = load_config(&c.config)?;
            let report = experiments_launch(&cfg)?;
            println!(
                "{} launched, {} finished, {} failed, {} skipped, {} blocked",
                report.launched,
                report.finished.len(),
                report.failed.len(),
                report.skipped,
                report.blocked.len()
            );
            for (run, reason) in &report.failed {
                let first = reason.lines().next().unwrap_or("");
                println!("failed: {}/{} r{}: {first}", run.configuration, run.instance, run.repetition);
            }
            for (run, reason) in &report.blocked {
                println!("blocked: {}/{} r{}: {reason}", run.configuration, run.instance, run.repetition);
            }
            Ok(if report.is_success() { 0 } else { EXIT_PARTIAL })
        }
        ExperimentsCommand::List { config, status } => {
            let cfg = load_config(&config.config)?;
            let status = status.map(RunStatus::from);
            let mut out = std::io::stdout().lock();
            writeln!(out, "{:<20} {:<24} {:>4} {:<9} elapsed", "configuration", "instance", "rep", "status")?;
            for row in experiments_list(&cfg) {
                if status.is_some_and(|s| s != row.status) {
                    continue;
                }
                let elapsed = row.elapsed.map(|d| format!("{}s", d.as_secs())).unwrap_or_default();
                writeln!(
                    out,
                    "{:<20} {:<24} {:>4} {:<9} {elapsed}",
                    row.run.configuration, row.run.instance, row.run.repetition, row.status
                )?;
            }
            Ok(0)
        }
        ExperimentsCommand::Purge {
            config,
            status,
            name,
            instance,
            repetition,
            all,
        } => {
            let cfg = load_config(&config.config)?;
            for n in &name {
                if cfg.configuration(n).is_none() {
                    bail!("unknown configuration `{n}`");
                }
            }
            let filter = PurgeFilter {
                configurations: name,
                instances: instance,
                repetitions: repetition,
                status: status.map(RunStatus::from),
                all,
            };
            let report = experiments_purge(&cfg, &filter)?;
            println!(
                "{} runs purged ({} files removed), {} running runs left alone",
                report.runs, report.removed_files, report.running_skipped
            );
            Ok(0)
        }
    }
}

fn cmd_collect(args: &CollectArgs) -> Result<u8> {
    let cfg = load_config(&args.config.config)?;
    let mut report = collect_successful(&cfg.output_dir)?;
    let (attrs, classes) = config_attributes(&cfg);
    report.frame.join_attributes(&attrs, &classes);
    let missing = missing_runs(&cfg, &report.frame);

    fs::create_dir_all(&args.output_dir).with_context(|| format!("creating {}", args.output_dir.display()))?;
    let path = args.output_dir.join("runs.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(&report.frame, file)?;
    println!(
        "{} successful runs written to {}; {} failed, {} rejected, {} in progress, {} missing",
        report.frame.len(),
        path.display(),
        report.failed.len(),
        report.rejected.len(),
        report.in_progress.len(),
        missing.len()
    );
    for (p, reason) in &report.failed {
        println!("failed: {}: {}", p.display(), reason.lines().next().unwrap_or(""));
    }
    for (p, reason) in &report.rejected {
        println!("rejected: {}: {reason}", p.display());
    }
    for d in &missing {
        println!("missing: {}/{} r{}", d.configuration, d.instance, d.repetition);
    }
    let complete = report.failed.is_empty() && report.rejected.is_empty() && missing.is_empty();
    Ok(if complete { 0 } else { EXIT_PARTIAL })
}

fn read_frame(path: &Path) -> Result<ResultFrame> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_csv(file)?)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let frame = read_frame(&args.csv)?;
    let variant = ModelVariant::from(args.model);
    let mut out = String::new();

    if let Some(b) = &args.b {
        let table = speedup_table(&frame, &args.a, b)?;
        out += &format!(
            "speedup of {} over {}: geometric mean {:.4} over {} instances (min {:.4}, max {:.4})\n",
            args.a,
            b,
            table.geometric_mean,
            table.rows.len(),
            table.min_ratio(),
            table.max_ratio()
        );
        for inst in &table.only_a {
            out += &format!("only {} finished on {inst}\n", args.a);
        }
        for inst in &table.only_b {
            out += &format!("only {b} finished on {inst}\n");
        }
        for w in &table.skew_warnings {
            out += &format!("warning: skewed running times: {w}\n");
        }
        let labels = table.rows.iter().map(|r| r.instance.clone()).collect();
        let a_means = table.rows.iter().map(|r| r.mean_a).collect();
        let b_means = table.rows.iter().map(|r| r.mean_b).collect();
        let w = wilcoxon_signed_rank(&PairedSample::new(labels, a_means, b_means)?);
        out += &format!(
            "Wilcoxon signed-rank on mean times: W = {}, p = {:.4e} ({}, {} nonzero pairs)\n",
            w.statistic,
            w.p_value,
            if w.exact { "exact" } else { "normal approximation" },
            w.nonzero
        );
        fs::create_dir_all(&args.output_dir)?;
        let path = args.output_dir.join(format!("speedup_{}_{}.csv", args.a, b));
        table.write_csv(fs::File::create(&path)?)?;
    }

    let (labels, data) = model_data(&frame, variant, &args.a, args.b.as_deref())?;
    let settings = McmcSettings {
        chains: 4,
        draws: args.draws,
        warmup: args.warmup,
        seed: args.seed,
    };
    let trace = fit_model(&ModelSpec::new(variant), &data, &settings)?;
    let summary = summarize(&trace)?;
    out += &format!("\nmodel {} on {} instances\n", variant.name(), labels.len());
    out += &summary.to_table();
    print!("{out}");

    fs::create_dir_all(&args.output_dir)?;
    let path = args.output_dir.join(format!("summary_{}.csv", variant.name()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["parameter", "hpd_2.5", "mean", "hpd_97.5", "rhat"])?;
    for p in &summary.params {
        w.write_record([
            p.name.clone(),
            p.hpd_low.to_string(),
            p.mean.to_string(),
            p.hpd_high.to_string(),
            p.rhat.to_string(),
        ])?;
    }
    if let Some(bf) = &summary.inclusion {
        w.write_record(["inclusion_probability", "", &bf.inclusion_probability.to_string(), "", ""])?;
        w.write_record(["bayes_factor", "", &bf.bayes_factor.to_string(), "", ""])?;
    }
    w.flush()?;
    Ok(if summary.warning.is_some() { EXIT_PARTIAL } else { 0 })
}

fn cmd_plot(args: &PlotArgs) -> Result<u8> {
    let frame = read_frame(&args.csv)?;
    let size: std::collections::BTreeMap<&str, f64> = frame
        .rows
        .iter()
        .filter_map(|r| r.edges.map(|e| (r.instance.as_str(), e as f64)))
        .collect();
    let a_times = frame.times_by_instance(&args.a);
    let b_times = frame.times_by_instance(&args.b);
    if a_times.is_empty() || b_times.is_empty() {
        bail!("no runs of `{}` or `{}` in {}", args.a, args.b, args.csv.display());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let points = |times: &std::collections::BTreeMap<&str, Vec<f64>>, keep: &dyn Fn(&str) -> bool| -> Vec<(f64, f64)> {
        times
            .iter()
            .filter(|(i, _)| keep(i) && size.contains_key(*i))
            .map(|(i, t)| (size[i], mean(t)))
            .collect()
    };
    let both: BTreeSet<&str> = a_times.keys().filter(|k| b_times.contains_key(*k)).copied().collect();
    let mut series = vec![
        PlotSeries {
            label: args.a.clone(),
            points: points(&a_times, &|i| both.contains(i)),
            mark: MarkShape::Circle,
        },
        PlotSeries {
            label: args.b.clone(),
            points: points(&b_times, &|i| both.contains(i)),
            mark: MarkShape::Cross,
        },
    ];
    let only_a = points(&a_times, &|i| !both.contains(i));
    if !only_a.is_empty() {
        series.push(PlotSeries {
            label: format!("{} (no {} result)", args.a, args.b),
            points: only_a,
            mark: MarkShape::Square,
        });
    }
    series.retain(|s| !s.points.is_empty());
    let mut written = Vec::new();
    if series.is_empty() {
        eprintln!("warning: no instance sizes in the CSV; skipping the scatter plot (collect with a config)");
    } else {
        let svg = scatter_svg(
            &series,
            &ScatterOptions {
                title: format!("{} and {}", args.a, args.b),
                x_label: "edges".into(),
                y_label: "mean running time [s]".into(),
                ..ScatterOptions::default()
            },
        )?;
        written.push(write_figure(&args.output_dir, "scatter", &args.experiment, &svg)?);
    }

    let table = speedup_table(&frame, &args.a, &args.b)?;
    let bars: Vec<(String, f64)> = table.rows.iter().map(|r| (r.instance.clone(), r.ratio)).collect();
    let svg = speedup_bars_svg(
        &bars,
        &format!("speedup of {} over {} (GM {:.3})", args.a, args.b, geometric_mean(&table.rows.iter().map(|r| r.ratio).collect::<Vec<_>>())?),
        "speedup",
    )?;
    written.push(write_figure(&args.output_dir, "speedup", &args.experiment, &svg)?);

    let mut groups = Vec::new();
    for (alg, times) in [(&args.a, &a_times), (&args.b, &b_times)] {
        let mut devs = Vec::new();
        for t in times.values().filter(|t| t.len() >= 2) {
            devs.extend(relative_deviation(t)?);
        }
        if !devs.is_empty() {
            groups.push((alg.clone(), devs));
        }
    }
    if groups.is_empty() {
        eprintln!("warning: no instance has two or more repetitions; skipping the deviation plot");
    } else {
        let svg = box_plot_svg(&groups, "relative deviation from the per-instance mean", "(t - mean) / mean")?;
        written.push(write_figure(&args.output_dir, "deviation", &args.experiment, &svg)?);
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}
