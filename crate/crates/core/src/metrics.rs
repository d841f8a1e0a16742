//! Areal, topological, and aspect-ratio quality measures of a layout.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rect;
use crate::graph::{edge, Edge};
use crate::partition::aspect_ratio_loss;

/// Relative contact tolerance; scaled by the larger display extent.
pub const CONTACT_TOLERANCE: f64 = 1e-9;

pub fn contact_eps(display: Rect) -> f64 {
    CONTACT_TOLERANCE * display.w.max(display.h)
}

/// Pairs of rectangles whose closed sets intersect (within `eps`).
///
/// Corner-only contacts count. Runs a sweep over x so only rectangles with
/// overlapping x ranges are compared.
pub fn contacts(rects: &[Rect], eps: f64) -> BTreeSet<Edge> {
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_by(|&a, &b| rects[a].x.total_cmp(&rects[b].x).then(a.cmp(&b)));
    let mut out = BTreeSet::new();
    for (pos, &i) in order.iter().enumerate() {
        let reach = rects[i].right() + eps;
        for &j in &order[pos + 1..] {
            if rects[j].x > reach {
                break;
            }
            if rects[i].touches(&rects[j], eps) {
                out.insert(edge(i, j));
            }
        }
    }
    out
}

/// Sum over vertices of |area proportion - weight proportion|.
pub fn areal_error(proportions: &[f64], rects: &[Rect]) -> f64 {
    assert_eq!(proportions.len(), rects.len());
    let total: f64 = rects.iter().map(Rect::area).sum();
    proportions
        .iter()
        .zip(rects)
        .map(|(alpha, rect)| (rect.area() / total - alpha).abs())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopologyCounts {
    pub lost: usize,
    pub fake: usize,
    pub error: f64,
}

/// Lost edges, fake edges, and their share of the edge union.
pub fn topological_error(graph_edges: &BTreeSet<Edge>, layout_edges: &BTreeSet<Edge>) -> TopologyCounts {
    let lost = graph_edges.difference(layout_edges).count();
    let fake = layout_edges.difference(graph_edges).count();
    let union = graph_edges.len() + fake;
    let error = if union == 0 {
        0.0
    } else {
        (lost + fake) as f64 / union as f64
    };
    TopologyCounts { lost, fake, error }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("amended topological error is undefined for a graph without edges")]
    NoEdges,
    #[error("cost weights must be nonnegative and sum to one, got ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
}

/// Share of graph edges whose rectangles do not touch.
pub fn amended_topological_error(
    graph_edges: &BTreeSet<Edge>,
    layout_edges: &BTreeSet<Edge>,
) -> Result<f64, MetricsError> {
    if graph_edges.is_empty() {
        return Err(MetricsError::NoEdges);
    }
    let lost = graph_edges.difference(layout_edges).count();
    Ok(lost as f64 / graph_edges.len() as f64)
}

/// Weights of the three cost terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub areal: f64,
    pub topological: f64,
    pub ratio: f64,
}

impl CostWeights {
    pub fn new(areal: f64, topological: f64, ratio: f64) -> Result<Self, MetricsError> {
        let ok = [areal, topological, ratio].iter().all(|w| w.is_finite() && *w >= 0.0)
            && (areal + topological + ratio - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Self {
                areal,
                topological,
                ratio,
            })
        } else {
            Err(MetricsError::InvalidWeights(areal, topological, ratio))
        }
    }

    /// Weights with the remaining mass split evenly between areal and ratio.
    pub fn topology_tradeoff(topological: f64) -> Result<Self, MetricsError> {
        let rest = (1.0 - topological) / 2.0;
        Self::new(rest, topological, 1.0 - topological - rest)
    }
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            areal: 0.5,
            topological: 0.5,
            ratio: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub areal_error: f64,
    pub lost_edges: usize,
    pub fake_edges: usize,
    pub topological_error: f64,
    /// `None` when the graph has no edges.
    pub amended_topological_error: Option<f64>,
    pub aspect_ratio_loss: f64,
    pub total_cost: f64,
}

impl MetricsReport {
    /// Measures a layout given original proportions and the leaf rectangles
    /// (indexed like `proportions`).
    pub fn measure(
        proportions: &[f64],
        rects: &[Rect],
        graph_edges: &BTreeSet<Edge>,
        target_ratio: f64,
        weights: &CostWeights,
        eps: f64,
    ) -> (Self, BTreeSet<Edge>) {
        let layout_edges = contacts(rects, eps);
        let topo = topological_error(graph_edges, &layout_edges);
        let mut report = MetricsReport {
            areal_error: areal_error(proportions, rects),
            lost_edges: topo.lost,
            fake_edges: topo.fake,
            topological_error: topo.error,
            amended_topological_error: amended_topological_error(graph_edges, &layout_edges).ok(),
            aspect_ratio_loss: aspect_ratio_loss(rects, target_ratio),
            total_cost: 0.0,
        };
        report.total_cost = total_cost(&report, weights);
        (report, layout_edges)
    }

    /// Areal plus topological error, the figure compared across methods.
    pub fn total_error(&self) -> f64 {
        self.areal_error + self.topological_error
    }
}

pub fn total_cost(report: &MetricsReport, weights: &CostWeights) -> f64 {
    weights.areal * report.areal_error
        + weights.topological * report.topological_error
        + weights.ratio * report.aspect_ratio_loss
}
