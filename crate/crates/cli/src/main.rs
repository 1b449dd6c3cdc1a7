use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use collab_core::comatrix::{DEFAULT_MIN_COCITE, DEFAULT_MIN_OUT_CITATIONS, DEFAULT_MIN_WORK_YEAR};
use collab_core::pipeline::{self, PipelineConfig};
use collab_core::synth::{self, SynthConfig};
use collab_core::with_workers;

/// Collaboration analytics over bibliographic corpora.
#[derive(Parser)]
#[command(name = "collab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse inputs and rules and print a summary as JSON.
    Validate(Common),
    /// Write labels.csv, table1.csv, timeseries.csv and affiliations.csv.
    Classify(Common),
    /// Write stats.csv, violin.csv and table2.csv.
    Stats(Common),
    /// Write the co-citation and co-authorship matrices.
    Matrix(Common),
    /// Write linkage.csv and leaf_order.txt.
    Cluster(Common),
    /// Write heatmap.svg.
    Render(Common),
    /// Generate a synthetic corpus with ground truth.
    Synth(SynthArgs),
    /// Run every stage.
    Pipeline(Common),
}

#[derive(Args)]
struct Common {
    /// Papers, one JSON object per line.
    #[arg(long)]
    papers: PathBuf,
    /// Citation edges, one JSON object per line.
    #[arg(long)]
    citations: Option<PathBuf>,
    /// Cited works with publication years, one JSON object per line.
    #[arg(long)]
    works: Option<PathBuf>,
    /// Affiliation rules (JSON).
    #[arg(long)]
    rules: PathBuf,
    /// Canonical id of the home institution.
    #[arg(long)]
    home: String,
    #[arg(long)]
    min_year: Option<i32>,
    #[arg(long)]
    max_year: Option<i32>,
    /// Minimum number of corpus papers citing a work for it to count.
    #[arg(long, default_value_t = DEFAULT_MIN_COCITE)]
    min_cocite: usize,
    /// Earliest publication year of a counted cited work.
    #[arg(long, default_value_t = DEFAULT_MIN_WORK_YEAR)]
    min_work_year: i32,
    /// Minimum out-citations for a department to be clustered.
    #[arg(long = "min-outcitations", default_value_t = DEFAULT_MIN_OUT_CITATIONS)]
    min_out_citations: usize,
    /// Department ids left out of clustering (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    /// Department ids left out of the heatmap only.
    #[arg(long, value_delimiter = ',')]
    heatmap_exclude: Vec<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Ignored by analysis stages, which use no randomness.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            papers: self.papers.clone(),
            citations: self.citations.clone(),
            works: self.works.clone(),
            rules: self.rules.clone(),
            home: self.home.clone(),
            min_year: self.min_year,
            max_year: self.max_year,
            min_cocite: self.min_cocite,
            min_work_year: self.min_work_year,
            min_out_citations: self.min_out_citations,
            exclude: self.exclude.iter().cloned().collect(),
            heatmap_exclude: self
                .heatmap_exclude
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>(),
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Generator configuration (JSON); defaults apply to absent fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "synth")]
    out_dir: PathBuf,
}

fn run_stage(c: &Common, stage: &Command) -> collab_core::Result<()> {
    let cfg = c.config();
    let dir = c.out_dir.as_path();
    with_workers(c.workers, || {
        if let Command::Validate(_) = stage {
            let summary = pipeline::validate(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            return Ok(());
        }
        if let Command::Pipeline(_) = stage {
            pipeline::run(&cfg, dir)?;
            return Ok(());
        }
        let a = pipeline::analyze(pipeline::load(&cfg)?, &cfg.home)?;
        match stage {
            Command::Classify(_) => return pipeline::write_classify(&a, dir),
            Command::Stats(_) => return pipeline::write_stats(&a, dir),
            _ => {}
        }
        let m = pipeline::matrices(&a, &cfg)?;
        if let Command::Matrix(_) = stage {
            return pipeline::write_matrices(&m, dir);
        }
        let c = pipeline::cluster(&m, &cfg)?;
        if let Command::Cluster(_) = stage {
            return pipeline::write_cluster(&c, dir);
        }
        pipeline::write_render(&pipeline::heatmap(&a, &m, &c, &cfg)?, dir)
    })
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            SynthConfig::from_json(&text)?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    synth::generate(&config)?.write_to(Path::new(&args.out_dir))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Validate(c)
        | Command::Classify(c)
        | Command::Stats(c)
        | Command::Matrix(c)
        | Command::Cluster(c)
        | Command::Render(c)
        | Command::Pipeline(c) => run_stage(c, &cli.command).map_err(anyhow::Error::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<collab_core::Error>()
                .map_or(2, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
