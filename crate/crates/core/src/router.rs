//! Corridor network in the border space and channel routing over it.
//!
//! Network nodes are rectangle-side midpoints, their projections onto the
//! nearest corridor centerline, and intersections between centerlines.
//! Centerlines are the band centers of a bordered [`PartitionTree`] plus a
//! frame line running through the middle of the outer margin. Routing runs
//! Dijkstra over Euclidean edge lengths.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::border::{band_segments, BandSegment};
use crate::geometry::{Axis, Point, Rect};
use crate::graph::{shortest_hop_path, GraphError, VertexWeightedGraph};
use crate::partition::PartitionTree;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no corridor route between {0:?} and {1:?}")]
    Unreachable(String, String),
    #[error("query endpoints must differ")]
    SameEndpoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeKind {
    /// Midpoint of one side of a vertex rectangle.
    RectSide { vertex: usize },
    /// Projection of a rectangle-side midpoint onto a corridor centerline.
    BorderSide,
    /// Intersection or end of corridor centerlines.
    Junction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl NetworkNode {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Undirected network edge `(a, b, length)`.
pub type NetworkEdge = (usize, usize, f64);

#[derive(Clone, Debug, PartialEq)]
pub struct CorridorNetwork {
    nodes: Vec<NetworkNode>,
    edges: Vec<NetworkEdge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Per vertex: side-midpoint nodes (left, top, right, bottom).
    sides: Vec<[usize; 4]>,
}

impl CorridorNetwork {
    /// Rebuilds a network from its node and edge lists.
    pub fn from_parts(nodes: Vec<NetworkNode>, edges: Vec<NetworkEdge>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b, len) in &edges {
            adjacency[a].push((b, len));
            adjacency[b].push((a, len));
        }
        for list in &mut adjacency {
            list.sort_by_key(|x| x.0);
        }
        let vertex_count = nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::RectSide { vertex } => Some(vertex + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut sides = vec![[usize::MAX; 4]; vertex_count];
        let mut filled = vec![0; vertex_count];
        for (i, n) in nodes.iter().enumerate() {
            if let NodeKind::RectSide { vertex } = n.kind {
                if filled[vertex] < 4 {
                    sides[vertex][filled[vertex]] = i;
                    filled[vertex] += 1;
                }
            }
        }
        Self {
            nodes,
            edges,
            adjacency,
            sides,
        }
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Number of vertices with side-midpoint nodes.
    pub fn vertex_count(&self) -> usize {
        self.sides.len()
    }

    /// Side-midpoint nodes of `vertex`.
    pub fn side_nodes(&self, vertex: usize) -> &[usize] {
        let s = &self.sides[vertex];
        let n = s.iter().take_while(|&&i| i != usize::MAX).count();
        &s[..n]
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        count
    }
}

/// Corridor centerlines of a bordered tree, including the frame line.
pub fn corridor_segments(adjusted: &PartitionTree, d: f64) -> Vec<BandSegment> {
    let inner = adjusted.rect();
    let frame = inner.inset(-d / 2.0);
    let eps = 1e-9 * inner.w.max(inner.h);
    let mut segments: Vec<BandSegment> = band_segments(adjusted, d)
        .into_iter()
        .map(|mut s| {
            // Ends on the inner boundary continue to the frame line.
            if (s.from - inner.start(s.along)).abs() <= eps {
                s.from = frame.start(s.along);
            }
            if (s.to - inner.end(s.along)).abs() <= eps {
                s.to = frame.end(s.along);
            }
            s
        })
        .collect();
    segments.push(BandSegment { along: Axis::X, at: frame.y, from: frame.x, to: frame.right() });
    segments.push(BandSegment { along: Axis::X, at: frame.bottom(), from: frame.x, to: frame.right() });
    segments.push(BandSegment { along: Axis::Y, at: frame.x, from: frame.y, to: frame.bottom() });
    segments.push(BandSegment { along: Axis::Y, at: frame.right(), from: frame.y, to: frame.bottom() });
    segments
}

#[derive(Clone, Copy)]
struct Stop {
    t: f64,
    /// Intersections win over other stops when merging.
    crossing: bool,
    border_side: bool,
}

/// Builds the corridor network of a bordered tree with `vertex_count`
/// leaves (items `0..vertex_count`).
pub fn build_corridor_network(adjusted: &PartitionTree, d: f64, vertex_count: usize) -> CorridorNetwork {
    let inner = adjusted.rect();
    let eps = 1e-9 * inner.w.max(inner.h);
    let segments = corridor_segments(adjusted, d);
    let rects = adjusted.leaf_rects(vertex_count);

    let mut stops: Vec<Vec<Stop>> = segments
        .iter()
        .map(|s| {
            vec![
                Stop { t: s.from, crossing: false, border_side: false },
                Stop { t: s.to, crossing: false, border_side: false },
            ]
        })
        .collect();
    for (i, s) in segments.iter().enumerate() {
        for (j, o) in segments.iter().enumerate().skip(i + 1) {
            if s.along == o.along {
                continue;
            }
            if o.at >= s.from - eps && o.at <= s.to + eps && s.at >= o.from - eps && s.at <= o.to + eps {
                stops[i].push(Stop { t: o.at, crossing: true, border_side: false });
                stops[j].push(Stop { t: s.at, crossing: true, border_side: false });
            }
        }
    }

    // Side midpoints and the centerline each one projects onto.
    let mut side_links: Vec<(usize, Point, usize, f64)> = Vec::new(); // (vertex, midpoint, segment, t)
    for (v, r) in rects.iter().enumerate() {
        let c = r.center();
        let sides = [
            (Point::new(r.x, c.y), Axis::Y, r.x, -1.0),
            (Point::new(c.x, r.y), Axis::X, r.y, -1.0),
            (Point::new(r.right(), c.y), Axis::Y, r.right(), 1.0),
            (Point::new(c.x, r.bottom()), Axis::X, r.bottom(), 1.0),
        ];
        for (mid, along, edge_at, dir) in sides {
            let t = match along {
                Axis::X => mid.x,
                Axis::Y => mid.y,
            };
            let best = segments
                .iter()
                .enumerate()
                .filter(|(_, s)| {
                    let offset = (s.at - edge_at) * dir;
                    s.along == along && offset > eps && offset <= d + eps && t >= s.from - eps && t <= s.to + eps
                })
                .min_by(|a, b| ((a.1.at - edge_at).abs()).total_cmp(&(b.1.at - edge_at).abs()).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .expect("every rectangle side faces a corridor");
            stops[best].push(Stop { t, crossing: false, border_side: true });
            side_links.push((v, mid, best, t));
        }
    }

    let mut nodes: Vec<NetworkNode> = Vec::new();
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut intern = |p: Point, kind: NodeKind, nodes: &mut Vec<NetworkNode>| -> usize {
        let key = (p.x.to_bits(), p.y.to_bits());
        if let Some(&i) = index.get(&key) {
            if kind == NodeKind::Junction {
                nodes[i].kind = NodeKind::Junction;
            }
            return i;
        }
        nodes.push(NetworkNode { x: p.x, y: p.y, kind });
        index.insert(key, nodes.len() - 1);
        nodes.len() - 1
    };

    let mut edges: Vec<NetworkEdge> = Vec::new();
    // Merged stop value per (segment, raw t) so side links find their node.
    let mut resolved: Vec<Vec<(f64, usize)>> = vec![Vec::new(); segments.len()];
    for (si, s) in segments.iter().enumerate() {
        let list = &mut stops[si];
        list.sort_by(|a, b| a.t.total_cmp(&b.t).then(b.crossing.cmp(&a.crossing)));
        let mut merged: Vec<Stop> = Vec::new();
        for stop in list.iter() {
            match merged.last_mut() {
                Some(last) if (stop.t - last.t).abs() <= eps => {
                    if stop.crossing && !last.crossing {
                        last.t = stop.t;
                        last.crossing = true;
                    }
                    last.border_side &= stop.border_side;
                }
                _ => merged.push(*stop),
            }
        }
        let mut previous: Option<(usize, f64)> = None;
        for stop in &merged {
            let kind = if stop.border_side { NodeKind::BorderSide } else { NodeKind::Junction };
            let node = intern(s.point_at(stop.t), kind, &mut nodes);
            resolved[si].push((stop.t, node));
            if let Some((prev, pt)) = previous {
                if prev != node {
                    edges.push((prev, node, stop.t - pt));
                }
            }
            previous = Some((node, stop.t));
        }
    }

    for (v, mid, seg, t) in side_links {
        let node = resolved[seg]
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|&(_, n)| n)
            .expect("segment has stops");
        let side = intern(mid, NodeKind::RectSide { vertex: v }, &mut nodes);
        let len = mid.distance(nodes[node].point());
        edges.push((side, node, len));
    }

    edges.sort_by_key(|e| (e.0.min(e.1), e.0.max(e.1)));
    edges.dedup_by(|a, b| a.0.min(a.1) == b.0.min(b.1) && a.0.max(a.1) == b.0.max(b.1));
    CorridorNetwork::from_parts(nodes, edges)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedChannel {
    pub source: usize,
    pub target: usize,
    pub points: Vec<Point>,
    pub length: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra. Side-midpoint nodes of other rectangles are never
/// passed through. Returns distances and predecessors.
fn dijkstra(network: &CorridorNetwork, sources: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let n = network.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(QueueEntry { dist: 0.0, node: s });
    }
    while let Some(QueueEntry { dist: du, node: u }) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        let is_source = sources.contains(&u);
        if !is_source && matches!(network.nodes[u].kind, NodeKind::RectSide { .. }) {
            continue;
        }
        for &(v, len) in &network.adjacency[u] {
            let nd = du + len;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(QueueEntry { dist: nd, node: v });
            }
        }
    }
    (dist, prev)
}

fn simplify(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() == Some(&p) {
            continue;
        }
        if out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let collinear = (a.x == b.x && b.x == p.x) || (a.y == b.y && b.y == p.y);
            if collinear {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

fn channel_to(network: &CorridorNetwork, source: usize, target: usize, dist: &[f64], prev: &[usize]) -> Option<RoutedChannel> {
    let end = network
        .side_nodes(target)
        .iter()
        .copied()
        .filter(|&i| dist[i].is_finite())
        .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))?;
    let mut nodes = vec![end];
    let mut cur = end;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    let points = simplify(nodes.iter().map(|&i| network.nodes[i].point()).collect());
    Some(RoutedChannel {
        source,
        target,
        points,
        length: dist[end],
    })
}

/// Shortest corridor channel between two rectangles.
pub fn route_between(network: &CorridorNetwork, graph: &VertexWeightedGraph, a: usize, b: usize) -> Result<RoutedChannel, RouteError> {
    let (dist, prev) = dijkstra(network, network.side_nodes(a));
    channel_to(network, a, b, &dist, &prev)
        .ok_or_else(|| RouteError::Unreachable(graph.id(a).to_string(), graph.id(b).to_string()))
}

/// Channels from `v` to each of its graph neighbors, in neighbor order.
pub fn ego_network(network: &CorridorNetwork, graph: &VertexWeightedGraph, v: usize) -> Result<Vec<RoutedChannel>, RouteError> {
    let neighbors = graph.neighbors(v);
    if neighbors.is_empty() {
        return Ok(Vec::new());
    }
    let (dist, prev) = dijkstra(network, network.side_nodes(v));
    neighbors
        .iter()
        .map(|&u| {
            channel_to(network, v, u, &dist, &prev)
                .ok_or_else(|| RouteError::Unreachable(graph.id(v).to_string(), graph.id(u).to_string()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteMode {
    /// Fewest graph hops, each hop routed through the corridors.
    #[default]
    ShortestHop,
    /// Single shortest corridor channel, ignoring graph edges.
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub hops: Vec<usize>,
    pub channels: Vec<RoutedChannel>,
    /// Rectangles strictly between the endpoints on the hop path.
    pub highlighted: Vec<usize>,
}

pub fn route_query(
    network: &CorridorNetwork,
    graph: &VertexWeightedGraph,
    a: usize,
    b: usize,
    mode: RouteMode,
) -> Result<RouteResult, RouteError> {
    if a == b {
        return Err(RouteError::SameEndpoints);
    }
    match mode {
        RouteMode::Geometric => Ok(RouteResult {
            hops: vec![a, b],
            channels: vec![route_between(network, graph, a, b)?],
            highlighted: Vec::new(),
        }),
        RouteMode::ShortestHop => {
            let hops = shortest_hop_path(graph, a, b)?;
            let channels = hops
                .windows(2)
                .map(|w| route_between(network, graph, w[0], w[1]))
                .collect::<Result<Vec<_>, _>>()?;
            let highlighted = hops[1..hops.len() - 1].to_vec();
            Ok(RouteResult {
                hops,
                channels,
                highlighted,
            })
        }
    }
}

/// Samples `points` every `step` units (plus every vertex).
pub fn sample_polyline(points: &[Point], step: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(b);
        let n = (len / step).ceil().max(1.0) as usize;
        for k in 0..n {
            let t = k as f64 / n as f64;
            out.push(Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t));
        }
    }
    out.extend(points.last().copied());
    out
}

/// Whether any sample of `channel` lies strictly inside a rectangle other
/// than its endpoints'.
pub fn channel_occludes(channel: &RoutedChannel, rects: &[Rect], step: f64) -> bool {
    sample_polyline(&channel.points, step).iter().any(|&p| {
        rects
            .iter()
            .enumerate()
            .any(|(i, r)| i != channel.source && i != channel.target && r.contains_strictly(p, 0.0))
    })
}
