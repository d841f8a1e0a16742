//! Read-only queries answered from a loaded layout document.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::document::{ChannelEntry, DocumentError, LayoutDocument, PathEntry};
use crate::graph::{GraphError, VertexWeightedGraph};
use crate::router::{ego_network, route_query, CorridorNetwork, RouteError, RouteMode};

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("{0:?} and {1:?} are disconnected")]
    Disconnected(String, String),
    #[error("query endpoints must differ")]
    SameEndpoints,
    #[error("{0}")]
    Route(String),
}

pub struct LayoutService {
    document: LayoutDocument,
    document_json: String,
    graph: VertexWeightedGraph,
    network: CorridorNetwork,
    ego_cache: RwLock<HashMap<usize, Arc<Vec<ChannelEntry>>>>,
}

impl LayoutService {
    pub fn new(document: LayoutDocument) -> Result<Self, DocumentError> {
        let graph = document.graph()?;
        let network = document.network()?;
        if network.vertex_count() != graph.len() {
            return Err(DocumentError::Inconsistent("network and vertex count differ".into()));
        }
        let mut cache = HashMap::new();
        if let Some(pre) = &document.ego_channels {
            for (id, channels) in pre {
                cache.insert(graph.index_of(id)?, Arc::new(channels.clone()));
            }
        }
        Ok(Self {
            document_json: document.to_json(),
            document,
            graph,
            network,
            ego_cache: RwLock::new(cache),
        })
    }

    pub fn document(&self) -> &LayoutDocument {
        &self.document
    }

    pub fn document_json(&self) -> &str {
        &self.document_json
    }

    fn vertex(&self, id: &str) -> Result<usize, QueryError> {
        self.graph.index_of(id).map_err(|_| QueryError::UnknownVertex(id.to_string()))
    }

    fn route_error(&self, e: RouteError) -> QueryError {
        match e {
            RouteError::Graph(GraphError::Disconnected(a, b)) => QueryError::Disconnected(a, b),
            RouteError::SameEndpoints => QueryError::SameEndpoints,
            other => QueryError::Route(other.to_string()),
        }
    }

    /// Channels from `id` to each graph neighbor, cached per vertex.
    pub fn ego(&self, id: &str) -> Result<Arc<Vec<ChannelEntry>>, QueryError> {
        let v = self.vertex(id)?;
        if let Some(hit) = self.ego_cache.read().expect("cache lock").get(&v) {
            return Ok(hit.clone());
        }
        let channels = ego_network(&self.network, &self.graph, v).map_err(|e| self.route_error(e))?;
        let entries = Arc::new(
            channels
                .iter()
                .map(|c| ChannelEntry::from_channel(&self.graph, c))
                .collect::<Vec<_>>(),
        );
        self.ego_cache.write().expect("cache lock").entry(v).or_insert_with(|| entries.clone());
        Ok(entries)
    }

    pub fn path(&self, a: &str, b: &str, mode: RouteMode) -> Result<PathEntry, QueryError> {
        let (va, vb) = (self.vertex(a)?, self.vertex(b)?);
        let route = route_query(&self.network, &self.graph, va, vb, mode).map_err(|e| self.route_error(e))?;
        Ok(PathEntry::from_route(&self.graph, &route))
    }
}
