//! `evosynth` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
//! failure. Diagnostics go to stderr; results go to files or stdout.

mod config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evosynth::dataio::{
    format_sig6, load_lineage_report, load_model, save_lineage_report, save_model, ModelMeta,
};
use evosynth::halfprec::quantization_error;
use evosynth::metrics::evaluate;
use evosynth::netcore::Split;
use evosynth::{count_active_synapses, evolve, inference_cost, quantize_network, Overflow, Precision, PrecisionPolicy};
use serde_json::json;

use config::{DatasetSource, RunConfig};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<evosynth::Error> for CliError {
    fn from(e: evosynth::Error) -> Self {
        use evosynth::Error as E;
        let code = match e {
            E::NumericFailure(_) => 3,
            E::InvalidSpec(_) | E::InvalidParam(_) => 1,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "evosynth", version, about = "Evolve sparse half-precision feedforward networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverflowArg {
    Saturate,
    Inf,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolutionary synthesis lineage.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a binary32 model file to binary16.
    Quantize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "saturate")]
        overflow: OverflowArg,
    },
    /// Classification metrics of a model on a dataset.
    Metrics {
        #[arg(long)]
        model: PathBuf,
        /// `path.csv`, `run.json`, `idx:IMAGES,LABELS[,LIMIT]` or
        /// `synthetic:N_PER_CLASS,N_FEATURES,SEPARATION,SEED`.
        #[arg(long)]
        data: String,
        /// Evaluate every row instead of the model's recorded validation split.
        #[arg(long)]
        all: bool,
    },
    /// Render lineage charts and print reduction ratios.
    Report {
        #[arg(long)]
        lineage: PathBuf,
        #[arg(long = "svg-out")]
        svg_out: PathBuf,
    },
    /// Print a model's shape and synapse counts.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Evolve { config, seed, out } => cmd_evolve(&config, seed, out),
        Command::Quantize { model, out, overflow } => cmd_quantize(&model, &out, overflow),
        Command::Metrics { model, data, all } => cmd_metrics(&model, &data, all),
        Command::Report { lineage, svg_out } => cmd_report(&lineage, &svg_out),
        Command::Inspect { model } => cmd_inspect(&model),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evosynth: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values always serialise"));
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn ratio(first: usize, last: usize) -> f64 {
    if last == 0 {
        f64::INFINITY
    } else {
        first as f64 / last as f64
    }
}

fn cmd_evolve(config_path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> CliResult {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(seed) = seed {
        cfg.evolution.master_seed = seed;
    }
    let out = out
        .or(cfg.output_dir.clone())
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set `output_dir`"))?;
    let data = cfg.dataset.load()?;
    if data.n_features != cfg.layers[0].in_dim {
        return Err(CliError::data(format!(
            "dataset has {} features but the first layer expects {}",
            data.n_features, cfg.layers[0].in_dim
        )));
    }
    fs::create_dir_all(&out).map_err(|e| CliError::data(format!("cannot create {}: {e}", out.display())))?;

    let evolved = evolve(&cfg.layers, &data, &cfg.evolution)?;
    let records = &evolved.lineage.records;
    for ((net, meta), record) in evolved.networks.iter().zip(&evolved.metas).zip(records) {
        save_model(net, meta, out.join(&record.model_path))?;
    }
    save_lineage_report(records, out.join("lineage.csv"))?;

    let first = &records[0];
    let last = &records[records.len() - 1];
    let summary = json!({
        "stop_reason": evolved.lineage.stop_reason,
        "generations_completed": records.len(),
        "generations_requested": cfg.evolution.generations,
        "master_seed": cfg.evolution.master_seed,
        "initial_active_synapses": first.active_synapses,
        "final_active_synapses": last.active_synapses,
        "synapse_reduction_ratio": ratio(first.active_synapses, last.active_synapses),
        "macs_speedup_proxy": ratio(first.macs, last.macs),
        "models": records.iter().map(|r| r.model_path.clone()).collect::<Vec<_>>(),
        "config": evolved.lineage.config,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
    write_file(&out.join("run_summary.json"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_quantize(model: &Path, out: &Path, overflow: OverflowArg) -> CliResult {
    let (net, meta) = load_model(model)?;
    if net.precision != Precision::Full {
        return Err(CliError::data(format!(
            "{} is already a binary16 model; quantize expects the binary32 variant",
            model.display()
        )));
    }
    let policy = PrecisionPolicy {
        overflow: match overflow {
            OverflowArg::Saturate => Overflow::Saturate,
            OverflowArg::Inf => Overflow::ToInfinity,
        },
    };
    let (max_abs, max_rel) = quantization_error(&net, policy);
    let half = quantize_network(&net, policy)?;
    save_model(&half, &meta, out)?;
    print_json(&json!({
        "max_abs_error": max_abs,
        "max_rel_error": max_rel,
        "active_synapses": count_active_synapses(&half),
    }));
    Ok(())
}

fn cmd_metrics(model: &Path, data_arg: &str, all: bool) -> CliResult {
    let (net, meta): (_, ModelMeta) = load_model(model)?;
    let data = DatasetSource::parse_arg(data_arg)?.load()?;
    if data.n_features != net.input_dim() {
        return Err(CliError::data(format!(
            "model expects {} features, dataset has {}",
            net.input_dim(),
            data.n_features
        )));
    }
    if data.n_classes > net.output_dim() {
        return Err(CliError::data(format!(
            "dataset has {} classes, model outputs {}",
            data.n_classes,
            net.output_dim()
        )));
    }
    let (rows, scope) = match meta.split {
        Some(s) if !all => (Split::derive(data.len(), s.validation_fraction, s.seed)?.validation, "validation"),
        _ => ((0..data.len()).collect(), "all"),
    };
    let m = evaluate(&net, &data, &rows)?;
    let classes = 0..m.n_classes();
    let (precision, recall, f1) = m.summary();
    print_json(&json!({
        "rows": scope,
        "n_evaluated": rows.len(),
        "accuracy": m.accuracy(),
        "precision": classes.clone().map(|c| m.precision(c)).collect::<Vec<_>>(),
        "recall": classes.clone().map(|c| m.recall(c)).collect::<Vec<_>>(),
        "f1": classes.map(|c| m.f1(c)).collect::<Vec<_>>(),
        "confusion_matrix": m.counts,
        "summary": { "precision": precision, "recall": recall, "f1": f1 },
        "active_synapses": count_active_synapses(&net),
        "macs": inference_cost(&net),
    }));
    Ok(())
}

fn cmd_report(lineage: &Path, svg_out: &Path) -> CliResult {
    let records = load_lineage_report(lineage)?;
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Err(CliError::data(format!("{} has no generations", lineage.display())));
    };
    fs::create_dir_all(svg_out).map_err(|e| CliError::data(format!("cannot create {}: {e}", svg_out.display())))?;

    let series = |name, f: fn(&evosynth::GenerationRecord) -> f64| svg::Series {
        name,
        points: records.iter().map(|r| (r.generation as f64, f(r))).collect(),
    };
    let synapses = svg::Chart {
        title: "Active synapses and MACs per generation",
        x_label: "generation",
        y_label: "count",
        series: vec![
            series("active_synapses", |r| r.active_synapses as f64),
            series("macs", |r| r.macs as f64),
        ],
    };
    let quality = svg::Chart {
        title: "Precision and recall per generation",
        x_label: "generation",
        y_label: "metric",
        series: vec![
            series("precision", |r| r.precision_metric),
            series("recall", |r| r.recall_metric),
        ],
    };
    write_file(&svg_out.join("synapses_macs.svg"), &synapses.render())?;
    write_file(&svg_out.join("precision_recall.svg"), &quality.render())?;

    print_json(&json!({
        "generations": records.len(),
        "first_generation": first.generation,
        "last_generation": last.generation,
        "synapse_reduction_ratio": ratio(first.active_synapses, last.active_synapses),
        "macs_speedup_proxy": ratio(first.macs, last.macs),
        "precision_change": format_sig6(last.precision_metric - first.precision_metric),
        "recall_change": format_sig6(last.recall_metric - first.recall_metric),
    }));
    Ok(())
}

fn cmd_inspect(model: &Path) -> CliResult {
    let (net, meta) = load_model(model)?;
    let layers: Vec<_> = net
        .layers
        .iter()
        .map(|l| {
            json!({
                "in_dim": l.in_dim,
                "out_dim": l.out_dim,
                "activation": l.activation.name(),
                "active_synapses": l.active_synapses(),
                "total_synapses": l.weights.len(),
            })
        })
        .collect();
    print_json(&json!({
        "generation": net.generation,
        "precision": match net.precision { Precision::Half => "binary16", Precision::Full => "binary32" },
        "layers": layers,
        "active_synapses": count_active_synapses(&net),
        "total_synapses": net.total_synapses(),
        "macs": inference_cost(&net),
        "seed": meta.seed,
        "alpha_history": meta.alpha_history,
    }));
    Ok(())
}
