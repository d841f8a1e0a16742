//! Built-in datasets, synthetic inputs, and benchmark protocols.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::anneal::{optimize, AnnealError, AnnealParams, Problem};
use crate::geometry::Rect;
use crate::graph::{load_graph, GraphError, LoadedGraph};
use crate::metrics::CostWeights;
use crate::partition::{aspect_ratio_loss, dar_partition, sew_partition, PartitionItem};

pub const BUILTIN_NAMES: [&str; 4] = ["blood", "netherlands", "germany", "les-miserables"];

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("unknown dataset {0:?}; expected one of blood, netherlands, germany, les-miserables")]
    Unknown(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn builtin_source(name: &str) -> Result<&'static str, DatasetError> {
    Ok(match name {
        "blood" => include_str!("../data/blood.json"),
        "netherlands" => include_str!("../data/netherlands.json"),
        "germany" => include_str!("../data/germany.json"),
        "les-miserables" => include_str!("../data/les-miserables.json"),
        other => return Err(DatasetError::Unknown(other.to_string())),
    })
}

pub fn builtin(name: &str) -> Result<LoadedGraph, DatasetError> {
    Ok(load_graph(builtin_source(name)?)?)
}

/// `n` items with log-normal weights (normalized) at uniform positions.
pub fn lognormal_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<PartitionItem> {
    let dist = LogNormal::new(0.0, 1.0).expect("valid parameters");
    let mut items: Vec<PartitionItem> = (0..n)
        .map(|index| PartitionItem {
            index,
            weight: dist.sample(rng),
            position: [rng.random::<f64>(), rng.random::<f64>()],
        })
        .collect();
    let total: f64 = items.iter().map(|i| i.weight).sum();
    for item in &mut items {
        item.weight /= total;
    }
    items
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub best: f64,
}

impl Summary {
    /// Sample statistics; `best` is the minimum.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            best: values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub algorithm: String,
    pub metric: String,
    #[serde(flatten)]
    pub summary: Summary,
    pub seconds: f64,
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("dataset,algorithm,metric,mean,std,best,seconds\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.3}",
            r.dataset, r.algorithm, r.metric, r.summary.mean, r.summary.std, r.summary.best, r.seconds
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioBench {
    pub dar: Vec<f64>,
    pub sew: Vec<f64>,
    pub seconds: f64,
}

impl RatioBench {
    pub fn rows(&self, n: usize, r: f64) -> Vec<BenchRow> {
        let dataset = format!("lognormal-n{n}-r{r}");
        [("dar", &self.dar), ("sew", &self.sew)]
            .into_iter()
            .map(|(algorithm, losses)| BenchRow {
                dataset: dataset.clone(),
                algorithm: algorithm.into(),
                metric: "aspect_ratio_loss".into(),
                summary: Summary::of(losses),
                seconds: self.seconds,
            })
            .collect()
    }
}

/// DAR and SEW aspect-ratio loss on identical random inputs in an `r x 1`
/// display.
pub fn bench_aspect_ratio(trials: usize, n: usize, r: f64, seed: u64) -> RatioBench {
    let start = Instant::now();
    let rect = Rect::new(0.0, 0.0, r, 1.0);
    let (dar, sew): (Vec<f64>, Vec<f64>) = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let items = lognormal_points(n, &mut trial_rng(seed, trial));
            let dar = dar_partition(rect, &items, r).leaf_rects(n);
            let sew = sew_partition(rect, &items, r).leaf_rects(n);
            (aspect_ratio_loss(&dar, r), aspect_ratio_loss(&sew, r))
        })
        .unzip();
    RatioBench {
        dar,
        sew,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeRun {
    pub seed: u64,
    pub areal_error: f64,
    pub topological_error: f64,
    pub lost_edges: usize,
    pub fake_edges: usize,
    pub aspect_ratio_loss: f64,
    pub total_error: f64,
    pub cost: f64,
    pub seconds: f64,
}

/// One annealing run per seed (in parallel).
pub fn bench_optimize(
    loaded: &LoadedGraph,
    weights: CostWeights,
    ratio: f64,
    display: Rect,
    stages: usize,
    seeds: &[u64],
) -> Result<Vec<OptimizeRun>, AnnealError> {
    let graph = &loaded.graph;
    let problem = Problem::new(graph, ratio, display, weights);
    seeds
        .par_iter()
        .map(|&seed| {
            let start = Instant::now();
            let mut params = AnnealParams::for_graph(graph, ratio, stages, seed);
            params.weights = weights;
            let result = optimize(&problem, &params, loaded.positions.as_deref())?;
            let r = &result.evaluation.report;
            Ok(OptimizeRun {
                seed,
                areal_error: r.areal_error,
                topological_error: r.topological_error,
                lost_edges: r.lost_edges,
                fake_edges: r.fake_edges,
                aspect_ratio_loss: r.aspect_ratio_loss,
                total_error: r.total_error(),
                cost: r.total_cost,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Summary rows for a set of runs; `best` comes from the lowest-cost run
/// rather than per-metric minima.
pub fn optimize_rows(dataset: &str, runs: &[OptimizeRun]) -> Vec<BenchRow> {
    let best = runs
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("at least one run");
    let seconds: f64 = runs.iter().map(|r| r.seconds).sum();
    let metric = |name: &str, f: fn(&OptimizeRun) -> f64| {
        let values: Vec<f64> = runs.iter().map(f).collect();
        let mut summary = Summary::of(&values);
        summary.best = f(best);
        BenchRow {
            dataset: dataset.into(),
            algorithm: "vmap".into(),
            metric: name.into(),
            summary,
            seconds,
        }
    };
    vec![
        metric("areal_error", |r| r.areal_error),
        metric("topological_error", |r| r.topological_error),
        metric("total_error", |r| r.total_error),
        metric("lost_edges", |r| r.lost_edges as f64),
        metric("fake_edges", |r| r.fake_edges as f64),
        metric("aspect_ratio_loss", |r| r.aspect_ratio_loss),
    ]
}
