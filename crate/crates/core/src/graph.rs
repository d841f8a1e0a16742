//! Vertex-weighted graph model and graph-level queries.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Undirected edge between two vertex indices, stored with `.0 < .1`.
pub type Edge = (usize, usize);

/// Normalizes an unordered pair so the smaller index comes first.
pub fn edge(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("nonpositive weight {weight} on vertex {id:?}")]
    NonpositiveWeight { id: String, weight: f64 },
    #[error("self-loop on vertex {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0:?} -- {1:?}")]
    DuplicateEdge(String, String),
    #[error("edge endpoint {0:?} is not a vertex")]
    DanglingEndpoint(String),
    #[error("vertex {0:?} has no cluster while other vertices do")]
    MissingCluster(String),
    #[error("position for unknown vertex {0:?}")]
    UnknownPosition(String),
    #[error("position for vertex {0:?} is not finite")]
    InvalidPosition(String),
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error("no path between {0:?} and {1:?}: disconnected")]
    Disconnected(String, String),
    #[error("malformed graph document: {0}")]
    Parse(String),
}

/// Vertex record of the graph document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
}

/// The on-disk graph document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub vertices: Vec<VertexRecord>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub label: String,
    pub weight: f64,
    /// Index into [`VertexWeightedGraph::cluster_names`].
    pub cluster: usize,
}

/// A validated, immutable vertex-weighted graph.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexWeightedGraph {
    vertices: Vec<Vertex>,
    edges: BTreeSet<Edge>,
    adjacency: Vec<Vec<usize>>,
    cluster_names: Vec<String>,
    index: HashMap<String, usize>,
}

/// Name given to the single cluster of a graph without cluster labels.
pub const IMPLICIT_CLUSTER: &str = "all";

impl VertexWeightedGraph {
    /// Builds a graph from `(id, weight, cluster)` triples and id pairs.
    pub fn new<S: AsRef<str>>(
        vertices: Vec<VertexRecord>,
        edges: &[(S, S)],
    ) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
            if !(v.weight > 0.0) || !v.weight.is_finite() {
                return Err(GraphError::NonpositiveWeight {
                    id: v.id.clone(),
                    weight: v.weight,
                });
            }
        }

        let clustered = vertices.iter().any(|v| v.cluster.is_some());
        let mut cluster_names: Vec<String> = Vec::new();
        let mut cluster_index: HashMap<String, usize> = HashMap::new();
        let mut built = Vec::with_capacity(vertices.len());
        for v in vertices {
            let name = match (&v.cluster, clustered) {
                (Some(c), _) => c.clone(),
                (None, true) => return Err(GraphError::MissingCluster(v.id)),
                (None, false) => IMPLICIT_CLUSTER.to_string(),
            };
            let cluster = *cluster_index.entry(name.clone()).or_insert_with(|| {
                cluster_names.push(name);
                cluster_names.len() - 1
            });
            built.push(Vertex {
                label: v.label.unwrap_or_else(|| v.id.clone()),
                id: v.id,
                weight: v.weight,
                cluster,
            });
        }

        let mut edge_set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); built.len()];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| GraphError::DanglingEndpoint(a.to_string()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| GraphError::DanglingEndpoint(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            if !edge_set.insert(edge(ia, ib)) {
                return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
            }
            adjacency[ia].push(ib);
            adjacency[ib].push(ia);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(Self {
            vertices: built,
            edges: edge_set,
            adjacency,
            cluster_names,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&edge(a, b))
    }

    pub fn cluster_names(&self) -> &[String] {
        &self.cluster_names
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_names.len()
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn id(&self, v: usize) -> &str {
        &self.vertices[v].id
    }

    /// Converts back into the document form (without positions).
    pub fn to_document(&self) -> GraphDocument {
        let clustered = self.cluster_names != [IMPLICIT_CLUSTER];
        GraphDocument {
            provenance: None,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexRecord {
                    id: v.id.clone(),
                    label: Some(v.label.clone()),
                    weight: v.weight,
                    cluster: clustered.then(|| self.cluster_names[v.cluster].clone()),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (self.id(a).to_string(), self.id(b).to_string()))
                .collect(),
            positions: None,
        }
    }
}

/// A parsed graph plus optional seed positions (vertex order).
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: VertexWeightedGraph,
    pub positions: Option<Vec<[f64; 2]>>,
    pub provenance: Option<String>,
}

/// Parses and validates a graph document from JSON text.
pub fn load_graph(json: &str) -> Result<LoadedGraph, GraphError> {
    let doc: GraphDocument =
        serde_json::from_str(json).map_err(|e| GraphError::Parse(e.to_string()))?;
    from_document(doc)
}

pub fn from_document(doc: GraphDocument) -> Result<LoadedGraph, GraphError> {
    let graph = VertexWeightedGraph::new(doc.vertices, &doc.edges)?;
    let positions = match doc.positions {
        None => None,
        Some(map) => {
            let mut out = vec![[0.5, 0.5]; graph.len()];
            let mut seen = vec![false; graph.len()];
            for (id, p) in map {
                let i = graph
                    .index_of(&id)
                    .map_err(|_| GraphError::UnknownPosition(id.clone()))?;
                if !p[0].is_finite() || !p[1].is_finite() {
                    return Err(GraphError::InvalidPosition(id));
                }
                out[i] = p;
                seen[i] = true;
            }
            // Partial position maps are ignored: the annealer needs all or none.
            seen.iter().all(|&s| s).then_some(out)
        }
    };
    Ok(LoadedGraph {
        graph,
        positions,
        provenance: doc.provenance,
    })
}

/// Per-vertex weight proportions, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProportions(Vec<f64>);

impl WeightProportions {
    /// Normalizes arbitrary positive weights.
    pub fn from_weights(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        Self(weights.iter().map(|w| w / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for WeightProportions {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn normalize_weights(graph: &VertexWeightedGraph) -> WeightProportions {
    let weights: Vec<f64> = graph.vertices().iter().map(|v| v.weight).collect();
    WeightProportions::from_weights(&weights)
}

/// Cluster-level aggregate of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGraph {
    pub names: Vec<String>,
    /// Sum of member proportions per cluster.
    pub weights: Vec<f64>,
    pub members: Vec<Vec<usize>>,
    pub edges: BTreeSet<Edge>,
}

pub fn cluster_graph(graph: &VertexWeightedGraph, proportions: &WeightProportions) -> ClusterGraph {
    let k = graph.cluster_count();
    let mut weights = vec![0.0; k];
    let mut members = vec![Vec::new(); k];
    for (i, v) in graph.vertices().iter().enumerate() {
        weights[v.cluster] += proportions[i];
        members[v.cluster].push(i);
    }
    let vertices = graph.vertices();
    let edges = graph
        .edges()
        .iter()
        .filter_map(|&(a, b)| {
            let (ca, cb) = (vertices[a].cluster, vertices[b].cluster);
            (ca != cb).then(|| edge(ca, cb))
        })
        .collect();
    ClusterGraph {
        names: graph.cluster_names().to_vec(),
        weights,
        members,
        edges,
    }
}

/// Minimal-hop path from `a` to `b`.
///
/// Among all minimal-hop paths, returns the lexicographically smallest
/// sequence of vertex ids.
pub fn shortest_hop_path(
    graph: &VertexWeightedGraph,
    a: usize,
    b: usize,
) -> Result<Vec<usize>, GraphError> {
    // Distances to b; then walk greedily from a choosing the smallest id
    // that stays on a shortest path.
    let mut dist = vec![usize::MAX; graph.len()];
    dist[b] = 0;
    let mut queue = VecDeque::from([b]);
    while let Some(v) = queue.pop_front() {
        if v == a {
            break;
        }
        for &u in graph.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if dist[a] == usize::MAX {
        return Err(GraphError::Disconnected(
            graph.id(a).to_string(),
            graph.id(b).to_string(),
        ));
    }
    let mut path = vec![a];
    let mut current = a;
    while current != b {
        let next = graph
            .neighbors(current)
            .iter()
            .copied()
            .filter(|&u| dist[u] != usize::MAX && dist[u] + 1 == dist[current])
            .min_by(|&x, &y| graph.id(x).cmp(graph.id(y)))
            .expect("a shortest-path successor exists");
        path.push(next);
        current = next;
    }
    Ok(path)
}
