//! Serializable layout documents.
//!
//! A document carries everything the query service and renderer need:
//! vertex rectangles, graph edges, bridges, and the corridor network.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::border::Bridge;
use crate::geometry::{Axis, Point, Rect};
use crate::graph::{GraphError, VertexRecord, VertexWeightedGraph};
use crate::metrics::MetricsReport;
use crate::router::{CorridorNetwork, NetworkEdge, NetworkNode, RouteResult, RoutedChannel};

pub const FORMAT: &str = "vmap-layout/1";

/// Qualitative 12-color palette for clusters.
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

/// Color of cluster `index`; later cycles are progressively darker.
pub fn cluster_color(index: usize) -> String {
    let base = PALETTE[index % PALETTE.len()];
    let cycle = index / PALETTE.len();
    if cycle == 0 {
        return base.to_string();
    }
    let factor = 0.75f64.powi(cycle as i32);
    let channel = |i: usize| {
        let v = u8::from_str_radix(&base[i..i + 2], 16).expect("hex palette");
        (v as f64 * factor).round() as u8
    };
    format!("#{:02x}{:02x}{:02x}", channel(1), channel(3), channel(5))
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed layout document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported layout format {0:?}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("layout document is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub label: String,
    pub cluster: String,
    pub weight: f64,
    pub rect: Rect,
    /// Weight proportion.
    pub alpha: f64,
    /// Area proportion of the drawn rectangle.
    pub alpha_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeEntry {
    pub low: String,
    pub high: String,
    pub across: Axis,
    pub rect: Rect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEntry {
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<NetworkEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub source: String,
    pub target: String,
    pub points: Vec<Point>,
    pub length: f64,
}

impl ChannelEntry {
    pub fn from_channel(graph: &VertexWeightedGraph, c: &RoutedChannel) -> Self {
        Self {
            source: graph.id(c.source).to_string(),
            target: graph.id(c.target).to_string(),
            points: c.points.clone(),
            length: c.length,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEntry {
    pub hops: Vec<String>,
    pub channels: Vec<ChannelEntry>,
    pub highlighted: Vec<String>,
}

impl PathEntry {
    pub fn from_route(graph: &VertexWeightedGraph, r: &RouteResult) -> Self {
        let ids = |v: &[usize]| v.iter().map(|&i| graph.id(i).to_string()).collect();
        Self {
            hops: ids(&r.hops),
            channels: r.channels.iter().map(|c| ChannelEntry::from_channel(graph, c)).collect(),
            highlighted: ids(&r.highlighted),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderHints {
    pub clusters: Vec<String>,
    pub palette: Vec<String>,
    pub border_width: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    pub format: String,
    pub target_ratio: f64,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<(String, String)>,
    pub bridges: Vec<BridgeEntry>,
    pub network: NetworkEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego_channels: Option<BTreeMap<String, Vec<ChannelEntry>>>,
    pub metrics: MetricsReport,
    pub render: RenderHints,
}

/// Pieces of one pipeline run.
pub struct LayoutParts<'a> {
    pub graph: &'a VertexWeightedGraph,
    pub rects: &'a [Rect],
    pub bridges: &'a [Bridge],
    pub network: &'a CorridorNetwork,
    pub metrics: MetricsReport,
    pub display: Rect,
    pub border_width: f64,
    pub target_ratio: f64,
    pub ego_channels: Option<Vec<Vec<RoutedChannel>>>,
}

pub fn export_layout(parts: LayoutParts<'_>) -> LayoutDocument {
    let g = parts.graph;
    let total_weight: f64 = g.vertices().iter().map(|v| v.weight).sum();
    let total_area: f64 = parts.rects.iter().map(Rect::area).sum();
    let vertices = g
        .vertices()
        .iter()
        .zip(parts.rects)
        .map(|(v, r)| VertexEntry {
            id: v.id.clone(),
            label: v.label.clone(),
            cluster: g.cluster_names()[v.cluster].clone(),
            weight: v.weight,
            rect: *r,
            alpha: v.weight / total_weight,
            alpha_p: r.area() / total_area,
        })
        .collect();
    let edges = g
        .edges()
        .iter()
        .map(|&(a, b)| (g.id(a).to_string(), g.id(b).to_string()))
        .collect();
    let bridges = parts
        .bridges
        .iter()
        .map(|b| BridgeEntry {
            low: g.id(b.low).to_string(),
            high: g.id(b.high).to_string(),
            across: b.across,
            rect: b.rect,
        })
        .collect();
    let ego_channels = parts.ego_channels.map(|all| {
        all.iter()
            .enumerate()
            .map(|(v, chans)| {
                (
                    g.id(v).to_string(),
                    chans.iter().map(|c| ChannelEntry::from_channel(g, c)).collect(),
                )
            })
            .collect()
    });
    LayoutDocument {
        format: FORMAT.to_string(),
        target_ratio: parts.target_ratio,
        vertices,
        edges,
        bridges,
        network: NetworkEntry {
            nodes: parts.network.nodes().to_vec(),
            edges: parts.network.edges().to_vec(),
        },
        ego_channels,
        metrics: parts.metrics,
        render: RenderHints {
            clusters: g.cluster_names().to_vec(),
            palette: (0..g.cluster_count()).map(cluster_color).collect(),
            border_width: parts.border_width,
            width: parts.display.w,
            height: parts.display.h,
        },
    }
}

impl LayoutDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, DocumentError> {
        let doc: LayoutDocument = serde_json::from_str(json)?;
        if doc.format != FORMAT {
            return Err(DocumentError::Format(doc.format));
        }
        Ok(doc)
    }

    pub fn display(&self) -> Rect {
        Rect::new(0.0, 0.0, self.render.width, self.render.height)
    }

    pub fn rects(&self) -> Vec<Rect> {
        self.vertices.iter().map(|v| v.rect).collect()
    }

    /// Rebuilds the graph the layout was computed for.
    pub fn graph(&self) -> Result<VertexWeightedGraph, DocumentError> {
        let records = self
            .vertices
            .iter()
            .map(|v| VertexRecord {
                id: v.id.clone(),
                label: Some(v.label.clone()),
                weight: v.weight,
                cluster: Some(v.cluster.clone()),
            })
            .collect();
        Ok(VertexWeightedGraph::new(records, &self.edges)?)
    }

    pub fn network(&self) -> Result<CorridorNetwork, DocumentError> {
        let n = self.network.nodes.len();
        if self.network.edges.iter().any(|&(a, b, len)| a >= n || b >= n || !(len >= 0.0)) {
            return Err(DocumentError::Inconsistent("network edge out of range".into()));
        }
        let net = CorridorNetwork::from_parts(self.network.nodes.clone(), self.network.edges.clone());
        for v in 0..self.vertices.len() {
            if v >= net.vertex_count() || net.side_nodes(v).len() != 4 {
                return Err(DocumentError::Inconsistent(format!("vertex {v} lacks side nodes")));
            }
        }
        Ok(net)
    }
}
