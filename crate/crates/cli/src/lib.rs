//! Command-line front end and HTTP query service for VMap layouts.

use std::fs;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vmap::datasets::{bench_aspect_ratio, bench_optimize, builtin, optimize_rows, rows_to_csv, BUILTIN_NAMES};
use vmap::graph::{load_graph, LoadedGraph};
use vmap::metrics::{CostWeights, MetricsReport};
use vmap::pipeline::{run_layout, LayoutOptions, DEFAULT_HEIGHT, DEFAULT_RATIO, DEFAULT_STAGES, DEFAULT_WIDTH};
use vmap::render::{cut_lines, render_svg, RenderOptions};
use vmap::router::RouteMode;
use vmap::service::{LayoutService, QueryError};
use vmap::{LayoutDocument, Rect};

/// Problem with user input (missing file, malformed or invalid document).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InputError>().is_some() {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "vmap", version, about = "Rectangular space-filling layouts for vertex-weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a layout and write its document, SVG, and trace.
    Layout(LayoutArgs),
    /// Render a saved layout document to SVG.
    Render(RenderArgs),
    /// Benchmark protocols.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Serve read-only layout queries over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Graph document (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in dataset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_NAMES))]
    pub builtin: Option<String>,
}

fn parse_lambda(s: &str) -> Result<CostWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, t, r] => CostWeights::new(a, t, r).map_err(|e| e.to_string()),
        _ => Err("expected three comma-separated weights a,t,r".into()),
    }
}

#[derive(Debug, Args, Clone)]
pub struct OptimizeArgs {
    /// Cost weights for areal error, topological error, and ratio loss.
    #[arg(long, value_parser = parse_lambda, default_value = "0.5,0.5,0")]
    pub lambda: CostWeights,
    /// Annealing stages.
    #[arg(long, default_value_t = DEFAULT_STAGES)]
    pub ns: usize,
    /// Iterations per stage (default: vertex count).
    #[arg(long)]
    pub ni: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent annealing chains; the best one is kept.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Target aspect ratio.
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    pub ratio: f64,
    /// Border half-width in layout units (default: fitted to the layout).
    #[arg(long)]
    pub border: Option<f64>,
    #[arg(long)]
    pub no_weight_perturb: bool,
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    pub width: f64,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    pub height: f64,
    /// Store ego channels of every vertex in the document.
    #[arg(long)]
    pub ego: bool,
}

impl OptimizeArgs {
    pub fn options(&self, record_trace: bool) -> LayoutOptions {
        LayoutOptions {
            weights: self.lambda,
            stages: self.ns,
            iterations: self.ni,
            seed: self.seed,
            restarts: self.restarts,
            ratio: self.ratio,
            border: self.border,
            weight_perturbation: !self.no_weight_perturb,
            width: self.width,
            height: self.height,
            precompute_ego: self.ego,
            record_trace,
        }
    }
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub optimize: OptimizeArgs,
    /// Layout document path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Overlay splitting lines on the SVG, thicker for earlier cuts.
    #[arg(long, requires = "svg")]
    pub cut_order: bool,
    /// Annealing trace as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Layout document.
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
    /// Overlay the ego network of this vertex.
    #[arg(long, conflicts_with = "path")]
    pub ego: Option<String>,
    /// Overlay the route between two vertices.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub path: Option<Vec<String>>,
    #[arg(long)]
    pub no_labels: bool,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Aspect-ratio loss of DAR and SEW on random log-normal inputs.
    Ratio(RatioArgs),
    /// Repeated annealing runs on one graph.
    Opt(OptArgs),
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    pub r: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "0.5,0.5,0")]
    pub lambda: CostWeights,
    #[arg(long, default_value_t = DEFAULT_STAGES)]
    pub ns: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// First seed; runs use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    pub ratio: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Serve a saved layout document instead of computing one.
    #[arg(long, conflicts_with_all = ["input", "builtin"])]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_NAMES))]
    pub builtin: Option<String>,
    #[command(flatten)]
    pub optimize: OptimizeArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

pub fn load_input(input: &InputArgs) -> Result<LoadedGraph> {
    match (&input.input, &input.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
            load_graph(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => builtin(name).map_err(|e| input_error(e.to_string())),
        (None, None) => Err(input_error("one of --input or --builtin is required")),
    }
}

pub fn load_document(path: &Path) -> Result<LayoutDocument> {
    let text =
        fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    LayoutDocument::from_json(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

pub fn metrics_line(m: &MetricsReport) -> String {
    let amended = m
        .amended_topological_error
        .map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    format!(
        "areal_error={:.6} topological_error={:.6} lost_edges={} fake_edges={} amended_topological_error={} aspect_ratio_loss={:.6} total_cost={:.6}",
        m.areal_error, m.topological_error, m.lost_edges, m.fake_edges, amended, m.aspect_ratio_loss, m.total_cost
    )
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn cmd_layout(args: &LayoutArgs) -> Result<()> {
    let loaded = load_input(&args.input)?;
    let outcome = run_layout(&loaded, &args.optimize.options(args.trace.is_some()))?;
    let json = outcome.document.to_json();
    match &args.out {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.svg {
        let options = RenderOptions {
            cuts: if args.cut_order { cut_lines(&outcome.bordered) } else { Vec::new() },
            ..RenderOptions::default()
        };
        write_file(path, &render_svg(&outcome.document, &options))?;
    }
    if let Some(path) = &args.trace {
        let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut w = BufWriter::new(file);
        for record in &outcome.anneal.trace {
            serde_json::to_writer(&mut w, record)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    eprintln!("{}", metrics_line(&outcome.document.metrics));
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let doc = load_document(&args.layout)?;
    let service = LayoutService::new(doc).map_err(|e| input_error(e.to_string()))?;
    let mut options = RenderOptions {
        hide_labels: args.no_labels,
        ..RenderOptions::default()
    };
    if let Some(id) = &args.ego {
        options.channels = service.ego(id)?.to_vec();
        options.highlighted = vec![id.clone()];
    }
    if let Some(pair) = &args.path {
        let route = service.path(&pair[0], &pair[1], RouteMode::ShortestHop)?;
        options.channels = route.channels;
        options.highlighted = route.hops;
    }
    write_file(&args.svg, &render_svg(service.document(), &options))
}

fn emit_csv(out: &Option<PathBuf>, csv: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn cmd_bench(command: &BenchCommand) -> Result<()> {
    match command {
        BenchCommand::Ratio(a) => {
            if a.trials == 0 || a.n == 0 || !(a.r >= 1.0) {
                return Err(input_error("--trials and --n must be positive and --r at least 1"));
            }
            let bench = bench_aspect_ratio(a.trials, a.n, a.r, a.seed);
            emit_csv(&a.out, &rows_to_csv(&bench.rows(a.n, a.r)))
        }
        BenchCommand::Opt(a) => {
            if a.repeats == 0 {
                return Err(input_error("--repeats must be positive"));
            }
            let loaded = load_input(&a.input)?;
            let name = a
                .input
                .builtin
                .clone()
                .or_else(|| a.input.input.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()))
                .unwrap_or_default();
            let seeds: Vec<u64> = (0..a.repeats as u64).map(|k| a.seed.wrapping_add(k)).collect();
            let display = Rect::new(0.0, 0.0, DEFAULT_WIDTH, DEFAULT_HEIGHT);
            let runs = bench_optimize(&loaded, a.lambda, a.ratio, display, a.ns, &seeds)?;
            emit_csv(&a.out, &rows_to_csv(&optimize_rows(&name, &runs)))
        }
    }
}

/// Query service routes over one immutable layout.
pub fn app(service: Arc<LayoutService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/layout", get(layout))
        .route("/ego/{id}", get(ego))
        .route("/path/{a}/{b}", get(path))
        .layer(axum::middleware::map_response(allow_any_origin))
        .with_state(service)
}

async fn allow_any_origin(mut response: Response) -> Response {
    response
        .headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    response
}

fn query_error(e: QueryError) -> Response {
    let status = match e {
        QueryError::UnknownVertex(_) => StatusCode::NOT_FOUND,
        QueryError::Disconnected(..) => StatusCode::CONFLICT,
        QueryError::SameEndpoints => StatusCode::BAD_REQUEST,
        QueryError::Route(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    (status, Json(json!({ "error": e.to_string() }))).into_response()
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn layout(State(service): State<Arc<LayoutService>>) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        service.document_json().to_string(),
    )
        .into_response()
}

async fn ego(State(service): State<Arc<LayoutService>>, UrlPath(id): UrlPath<String>) -> Response {
    match service.ego(&id) {
        Ok(channels) => Json(channels.as_ref().clone()).into_response(),
        Err(e) => query_error(e),
    }
}

#[derive(Debug, serde::Deserialize)]
struct PathQuery {
    #[serde(default)]
    mode: RouteMode,
}

async fn path(
    State(service): State<Arc<LayoutService>>,
    UrlPath((a, b)): UrlPath<(String, String)>,
    Query(q): Query<PathQuery>,
) -> Response {
    match service.path(&a, &b, q.mode) {
        Ok(route) => Json(route).into_response(),
        Err(e) => query_error(e),
    }
}

pub fn serve_document(args: &ServeArgs) -> Result<LayoutDocument> {
    match &args.layout {
        Some(path) => load_document(path),
        None => {
            let input = InputArgs {
                input: args.input.clone(),
                builtin: args.builtin.clone(),
            };
            let loaded = load_input(&input)?;
            let outcome = run_layout(&loaded, &args.optimize.options(false))?;
            eprintln!("{}", metrics_line(&outcome.document.metrics));
            Ok(outcome.document)
        }
    }
}

pub fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let document = serve_document(args)?;
    let service = Arc::new(LayoutService::new(document).map_err(|e| input_error(e.to_string()))?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| input_error(format!("invalid address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app(service)).await?;
        Ok::<_, anyhow::Error>(())
    })
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Layout(a) => cmd_layout(a),
        Command::Render(a) => cmd_render(a),
        Command::Bench(b) => cmd_bench(b),
        Command::Serve(a) => cmd_serve(a),
    }
}
