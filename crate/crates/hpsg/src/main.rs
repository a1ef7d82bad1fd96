use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hpsg::annotate::{annotator_from_env, ANNOTATOR_CMD_ENV};
use hpsg::config::PipelineConfig;
use hpsg::graph::{build_hpsg, load_graph, save_graph};
use hpsg::pipeline::{
    evaluate, load_parse_output, manifest_path, run_parse, save_parse_output,
};
use hpsg::retrieval::{query, render_full_graph, QueryRequest};
use hpsg::synth::{generate, load_ground_truth, SceneSpec};
use hpsg::Error;

#[derive(Parser)]
#[command(name = "hpsg", version, about = "Plane-enhanced scene graphs from sparse-view reconstructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark scene.
    Synth {
        /// Preset: room, office, tilted-room, two-rooms.
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scene tilt in degrees (tilted-room preset).
        #[arg(long, default_value_t = 15.0)]
        rot: f64,
    },
    /// Detect planes, label them, and fuse objects.
    Parse {
        /// Scene directory or manifest path.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run without writing artifacts.
        #[arg(long)]
        dry_run: bool,
    },
    /// Assemble the scene graph from parse artifacts.
    BuildGraph {
        /// Directory holding planes.json and objects.json; graph.json is
        /// written next to them.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Retrieve a query-relevant subgraph.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        /// Print only the rendered context text.
        #[arg(long)]
        context_only: bool,
        /// Render the full graph instead of a query subgraph.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare parse artifacts against a scene's ground truth.
    Eval {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Compact single-line JSON instead of pretty-printed.
        #[arg(long)]
        json: bool,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig, Error> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn annotator_kind() -> &'static str {
    if std::env::var(ANNOTATOR_CMD_ENV).is_ok() {
        "process"
    } else {
        "stub"
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth { preset, out, seed, rot } => {
            let spec = SceneSpec::preset(&preset, seed, rot)?;
            let gt = generate(&spec, &out)?;
            println!(
                "{}",
                serde_json::json!({
                    "scene_dir": out.display().to_string(),
                    "preset": preset,
                    "views": spec.n_views,
                    "planes": gt.planes.len(),
                    "objects": gt.objects.len(),
                })
            );
        }
        Command::Parse { scene, out, config, dry_run } => {
            let cfg = load_config(&config)?;
            let annotator = annotator_from_env(cfg.annotation.embed_dim, cfg.annotation.embed_seed);
            let parsed = run_parse(&scene, &cfg, annotator.as_ref())?;
            if !dry_run {
                save_parse_output(&parsed, &out)?;
            }
            let mut labels = std::collections::BTreeMap::new();
            for p in &parsed.planes {
                *labels.entry(p.label.as_str()).or_insert(0u32) += 1;
            }
            println!(
                "{}",
                serde_json::json!({
                    "planes": parsed.planes.len(),
                    "labels": labels,
                    "objects": parsed.objects.len(),
                    "dry_run": dry_run,
                })
            );
        }
        Command::BuildGraph { out, config } => {
            let cfg = load_config(&config)?;
            let annotator = annotator_from_env(cfg.annotation.embed_dim, cfg.annotation.embed_seed);
            let parsed = load_parse_output(&out)?;
            let g = build_hpsg(
                &parsed.planes,
                &parsed.objects,
                annotator.as_ref(),
                &cfg.fingerprint(),
                annotator_kind(),
            )?;
            let path = out.join("graph.json");
            save_graph(&g, &path)?;
            println!(
                "{}",
                serde_json::json!({
                    "graph": path.display().to_string(),
                    "nodes": g.nodes.len(),
                    "edges": g.edges.len(),
                })
            );
        }
        Command::Query { graph, q, k, tau, context_only, full, config } => {
            let cfg = load_config(&config)?;
            let annotator = annotator_from_env(cfg.annotation.embed_dim, cfg.annotation.embed_seed);
            let g = load_graph(&graph)?;
            if full {
                print!("{}", render_full_graph(&g));
                return Ok(());
            }
            let req = QueryRequest {
                text: q,
                k: k.unwrap_or(cfg.retrieval.top_k),
                temperature: tau.unwrap_or(cfg.retrieval.temperature),
            };
            let result = query(&g, annotator.as_ref(), &req)?;
            if context_only {
                print!("{}", result.context_text);
            } else {
                println!("{}", serde_json::to_string(&result).expect("result serializes"));
            }
        }
        Command::Eval { scene, out, json } => {
            let manifest = manifest_path(&scene);
            let gt_path = manifest
                .parent()
                .unwrap_or(std::path::Path::new("."))
                .join("ground_truth.json");
            if !gt_path.exists() {
                return Err(Error::GroundTruthMissing(gt_path.display().to_string()));
            }
            let gt = load_ground_truth(&gt_path)?;
            let parsed = load_parse_output(&out)?;
            let report = evaluate(&parsed, &gt);
            if json {
                println!("{}", serde_json::to_string(&report).expect("report serializes"));
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            }
        }
    }
    Ok(())
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 2,
        Error::Io { .. }
        | Error::Json { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::InvalidView { .. }
        | Error::SchemaVersion { .. }
        | Error::GroundTruthMissing(_) => 3,
        Error::GravityIndeterminate { .. } | Error::EmptyScene | Error::InfeasiblePlacement(_) => 4,
        Error::Annotator { .. } | Error::InvalidGraph(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
