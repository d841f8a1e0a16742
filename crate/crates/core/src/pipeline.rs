//! End-to-end layout: optimize, partition, open borders, add bridges,
//! build the corridor network, and export a document.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anneal::{optimize_restarts, AnnealError, AnnealParams, AnnealResult, Problem};
use crate::border::{bridges, check_feasible, fixed_width_border, BorderError};
use crate::document::{export_layout, LayoutDocument, LayoutParts};
use crate::geometry::Rect;
use crate::graph::LoadedGraph;
use crate::metrics::{contact_eps, CostWeights};
use crate::partition::PartitionTree;
use crate::router::{build_corridor_network, ego_network, RouteError};

pub const DEFAULT_WIDTH: f64 = 1200.0;
pub const DEFAULT_HEIGHT: f64 = 800.0;
pub const DEFAULT_RATIO: f64 = 1.5;
pub const DEFAULT_STAGES: usize = 2048;
/// Default border width as a share of the shorter display side.
pub const DEFAULT_BORDER_SHARE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error(transparent)]
    Border(#[from] BorderError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("invalid option: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    pub weights: CostWeights,
    pub stages: usize,
    /// Iterations per stage; `None` means one per vertex.
    pub iterations: Option<usize>,
    pub seed: u64,
    /// Independent chains with seeds `seed, seed + 1, ...`.
    pub restarts: usize,
    pub ratio: f64,
    /// Border half-width; `None` picks one that fits the layout.
    pub border: Option<f64>,
    pub weight_perturbation: bool,
    pub width: f64,
    pub height: f64,
    pub precompute_ego: bool,
    pub record_trace: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self {
            weights: CostWeights::default(),
            stages: DEFAULT_STAGES,
            iterations: None,
            seed: 0,
            restarts: 1,
            ratio: DEFAULT_RATIO,
            border: None,
            weight_perturbation: true,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            precompute_ego: false,
            record_trace: false,
        }
    }
}

impl LayoutOptions {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.ratio >= 1.0 && self.ratio.is_finite()) {
            return Err(PipelineError::Invalid(format!("ratio must be at least 1, got {}", self.ratio)));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return Err(PipelineError::Invalid("display size must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(PipelineError::Invalid("restarts must be at least 1".into()));
        }
        if let Some(d) = self.border {
            if !(d > 0.0 && d.is_finite()) {
                return Err(BorderError::InvalidWidth(d).into());
            }
        }
        CostWeights::new(self.weights.areal, self.weights.topological, self.weights.ratio)
            .map_err(|e| PipelineError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn display(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }
}

/// Border width used when none is given: a share of the display, reduced
/// so every leaf stays wider and taller than `5d`.
pub fn default_border(raw: &PartitionTree, display: Rect) -> f64 {
    let mut min_extent = f64::INFINITY;
    raw.visit_leaves(&mut |_, r| min_extent = min_extent.min(r.w).min(r.h));
    (DEFAULT_BORDER_SHARE * display.w.min(display.h)).min(min_extent / 5.0)
}

pub struct LayoutOutcome {
    pub document: LayoutDocument,
    pub anneal: AnnealResult,
    pub bordered: PartitionTree,
}

pub fn run_layout(loaded: &LoadedGraph, options: &LayoutOptions) -> Result<LayoutOutcome, PipelineError> {
    options.validate()?;
    let graph = &loaded.graph;
    let display = options.display();
    let problem = Problem::new(graph, options.ratio, display, options.weights);
    let mut params = AnnealParams::for_graph(graph, options.ratio, options.stages, options.seed);
    params.weights = options.weights;
    params.weight_perturbation = options.weight_perturbation;
    params.record_trace = options.record_trace;
    if let Some(ni) = options.iterations {
        params.iterations = ni;
    }
    let seeds: Vec<u64> = (0..options.restarts as u64).map(|k| options.seed.wrapping_add(k)).collect();
    let anneal = optimize_restarts(&problem, &params, loaded.positions.as_deref(), &seeds)?;

    let raw = &anneal.evaluation.tree;
    let d = match options.border {
        Some(d) => d,
        None => default_border(raw, display),
    };
    check_feasible(raw, d)?;
    let bordered = fixed_width_border(raw, d)?;
    let n = graph.len();
    let rects = bordered.leaf_rects(n);
    let bridge_list = bridges(&rects, graph.edges(), d, contact_eps(display));
    let network = build_corridor_network(&bordered, d, n);
    let ego_channels = if options.precompute_ego {
        Some((0..n).map(|v| ego_network(&network, graph, v)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let document = export_layout(LayoutParts {
        graph,
        rects: &rects,
        bridges: &bridge_list,
        network: &network,
        metrics: anneal.evaluation.report.clone(),
        display,
        border_width: d,
        target_ratio: options.ratio,
        ego_channels,
    });
    Ok(LayoutOutcome {
        document,
        anneal,
        bordered,
    })
}
