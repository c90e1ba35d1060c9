//! Command-line entry points.
//!
//! Exit status is 0 on success, 1 when the model has errors (or lint
//! warnings under `--strict`), 2 for usage and I/O problems. Failures are
//! reported on stderr as one JSON object: `{"error": ..., "message": ...}`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::export::{to_dot, to_view_json, RenderStyle};
use crate::kernel::{init_sim, ExternalEvent, KernelError, SimConfig};
use crate::lint::{has_errors, lint, render_table};
use crate::model::{Model, NodeId};
use crate::persistence::{load_xml, validate_schema};
use crate::topology::{classify, project, ViewFilter, ViewKind};

#[derive(Debug, Parser)]
#[command(
    name = "topoflow",
    version,
    about = "Merged object/process models: check, simulate, export, serve"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file against the schema and the model invariants.
    Validate { file: PathBuf },
    /// Report findings of the integration rules.
    Lint {
        file: PathBuf,
        /// Fail on warnings too.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t = LintFormat::Table)]
        format: LintFormat,
    },
    /// Run the token simulation and write the trace as JSON lines.
    Simulate {
        file: PathBuf,
        /// Stop before events later than this time.
        #[arg(long)]
        until: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace output file; stdout when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// External events to inject, one JSON object per line.
        #[arg(long)]
        inject: Option<PathBuf>,
        /// Only move tokens through injected events.
        #[arg(long)]
        monitored: bool,
        #[arg(long, default_value_t = 1)]
        dwell: u64,
        #[arg(long, default_value_t = 100_000)]
        max_events: u64,
    },
    /// Render a view of the model.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        view: ViewArg,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        show_stars: bool,
        /// Hide elements whose name or id matches; repeatable.
        #[arg(long)]
        filter: Vec<String>,
        /// Highlight a node, by id or exact name; repeatable.
        #[arg(long)]
        highlight: Vec<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API for the model.
    Serve {
        file: PathBuf,
        #[arg(long, env = "TOPOFLOW_PORT", default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LintFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewArg {
    Object,
    Process,
    Merged,
}

impl From<ViewArg> for ViewKind {
    fn from(v: ViewArg) -> Self {
        match v {
            ViewArg::Object => ViewKind::Object,
            ViewArg::Process => ViewKind::Process,
            ViewArg::Merged => ViewKind::Merged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Dot,
    Json,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, "io", format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(2, "io", format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(2, "io", e.to_string())),
    }
}

fn load(path: &PathBuf) -> Result<Model, Failure> {
    let text = read(path)?;
    load_xml(&text).map_err(|e| Failure::new(1, "load", format!("{}: {e}", path.display())))
}

/// Parse `args` (program name first) and run. Returns the exit code.
pub fn run(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let f = Failure::new(2, "usage", e.to_string().trim_end());
            let _ = writeln!(err, "{}", f.to_json());
            return f.code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.to_json());
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { file } => {
            let text = read(&file)?;
            if let Err(errors) = validate_schema(&text) {
                let message = errors
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(Failure::new(1, "schema", message));
            }
            let model = load_xml(&text).map_err(|e| Failure::new(1, "load", e.to_string()))?;
            let summary = json!({
                "valid": true,
                "nodes": model.nodes().count(),
                "circles": model.circles().count(),
                "stars": model.stars().count(),
                "arcs": model.arcs().count(),
                "relations": model.relations().count(),
                "services": model.services().count(),
            });
            write_out(None, &format!("{summary}\n"), out)?;
            Ok(0)
        }
        Command::Lint {
            file,
            strict,
            format,
        } => {
            let model = load(&file)?;
            let findings = lint(&model);
            let text = match format {
                LintFormat::Table => render_table(&findings),
                LintFormat::Json => findings.iter().map(|f| f.to_json() + "\n").collect(),
            };
            write_out(None, &text, out)?;
            let failed = has_errors(&findings) || (strict && !findings.is_empty());
            Ok(i32::from(failed))
        }
        Command::Simulate {
            file,
            until,
            seed,
            trace,
            inject,
            monitored,
            dwell,
            max_events,
        } => {
            let model = load(&file)?;
            let mut config = SimConfig {
                default_dwell: dwell,
                max_events,
                ..SimConfig::default()
            }
            .with_seed(seed);
            if monitored {
                config = config.monitored();
            }
            let mut sim = init_sim(model, config).map_err(kernel_failure)?;
            if let Some(path) = inject {
                for (n, line) in read(&path)?.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let event: ExternalEvent = serde_json::from_str(line).map_err(|e| {
                        Failure::new(2, "inject", format!("{}:{}: {e}", path.display(), n + 1))
                    })?;
                    sim.inject(event).map_err(kernel_failure)?;
                }
            }
            let result = sim.run(until).map(|t| t.to_jsonl());
            match result {
                Ok(text) => {
                    write_out(trace.as_ref(), &text, out)?;
                    Ok(0)
                }
                Err(KernelError::Truncated { limit, partial }) => {
                    write_out(trace.as_ref(), &partial.to_jsonl(), out)?;
                    Err(Failure::new(
                        1,
                        "truncated",
                        format!("stopped after {limit} events with work pending"),
                    ))
                }
                Err(e) => Err(kernel_failure(e)),
            }
        }
        Command::Export {
            file,
            view,
            format,
            show_stars,
            filter,
            highlight,
            out: path,
        } => {
            let model = load(&file)?;
            let mut vf = ViewFilter {
                hide: filter,
                show_stars,
                ..ViewFilter::default()
            };
            for h in highlight {
                let node = h
                    .parse::<u64>()
                    .ok()
                    .map(NodeId)
                    .filter(|n| model.node(*n).is_ok())
                    .or_else(|| model.node_named(&h))
                    .ok_or_else(|| {
                        Failure::new(2, "usage", format!("no node {h:?} to highlight"))
                    })?;
                vf.highlight.insert(node);
            }
            let classes = classify(&model);
            let v = project(&model, view.into(), &vf);
            let text = match format {
                FormatArg::Dot => to_dot(&model, &v, &classes, &RenderStyle::default()),
                FormatArg::Json => to_view_json(&model, &v, &classes),
            };
            write_out(path.as_ref(), &text, out)?;
            Ok(0)
        }
        Command::Serve { file, port } => {
            let model = load(&file)?;
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| Failure::new(2, "io", e.to_string()))?;
            rt.block_on(crate::server::serve(model, port))
                .map_err(|e| Failure::new(2, "io", e.to_string()))?;
            Ok(0)
        }
    }
}

fn kernel_failure(e: KernelError) -> Failure {
    let kind = match e {
        KernelError::FlowConflict(_) => "flow_conflict",
        KernelError::Model(_) => "invalid_model",
        _ => "simulation",
    };
    Failure::new(1, kind, e.to_string())
}
