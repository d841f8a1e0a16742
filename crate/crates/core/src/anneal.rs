//! Simulated annealing over vertex positions, weights, and the desired ratio.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rect;
use crate::graph::{normalize_weights, Edge, VertexWeightedGraph, WeightProportions};
use crate::metrics::{contact_eps, CostWeights, MetricsReport};
use crate::partition::{two_level_partition, PartitionTree};

pub const DEFAULT_UPPER_TEMPERATURE: f64 = 256.0;
pub const WEIGHT_CLIP: f64 = 64.0;
pub const RATIO_CLIP: f64 = 64.0;

#[derive(Debug, Error, PartialEq)]
pub enum AnnealError {
    #[error("invalid annealing parameters: {0}")]
    InvalidParams(String),
    #[error("initial positions must list one finite point per vertex")]
    InvalidPositions,
}

/// Annealing state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfiguration {
    pub weights: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub ratio: f64,
    pub original_weights: Vec<f64>,
    pub target_ratio: f64,
}

impl LayoutConfiguration {
    pub fn new(graph: &VertexWeightedGraph, positions: Vec<[f64; 2]>, target_ratio: f64) -> Self {
        let weights: Vec<f64> = graph.vertices().iter().map(|v| v.weight).collect();
        Self {
            original_weights: weights.clone(),
            weights,
            positions,
            ratio: target_ratio,
            target_ratio,
        }
    }

    pub fn proportions(&self) -> WeightProportions {
        WeightProportions::from_weights(&self.weights)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicWeights {
    pub random: f64,
    pub attraction: f64,
    pub repulsion: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        Self {
            random: 1.0,
            attraction: 1.0,
            repulsion: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub stages: usize,
    pub iterations: usize,
    pub t_upper: f64,
    pub t_lower: f64,
    pub weights: CostWeights,
    pub weight_perturbation: bool,
    pub heuristics: HeuristicWeights,
    pub seed: u64,
    pub record_trace: bool,
}

impl AnnealParams {
    /// Defaults for `graph`: `|V|` iterations per stage and the lower
    /// temperature derived from the smallest proportion and `target_ratio`.
    pub fn for_graph(graph: &VertexWeightedGraph, target_ratio: f64, stages: usize, seed: u64) -> Self {
        Self {
            stages,
            iterations: graph.len().max(1),
            t_upper: DEFAULT_UPPER_TEMPERATURE,
            t_lower: lower_temperature(normalize_weights(graph).min(), target_ratio),
            weights: CostWeights::default(),
            weight_perturbation: true,
            heuristics: HeuristicWeights::default(),
            seed,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), AnnealError> {
        let bad = |m: &str| Err(AnnealError::InvalidParams(m.to_string()));
        if self.stages == 0 {
            return bad("ns must be at least 1");
        }
        if self.iterations == 0 {
            return bad("ni must be at least 1");
        }
        if !(self.t_lower > 0.0 && self.t_lower < self.t_upper && self.t_upper.is_finite()) {
            return bad("temperatures must satisfy 0 < T_lb < T_ub");
        }
        let h = self.heuristics;
        if ![h.random, h.attraction, h.repulsion].iter().all(|w| w.is_finite() && *w >= 0.0) {
            return bad("heuristic weights must be nonnegative");
        }
        CostWeights::new(self.weights.areal, self.weights.topological, self.weights.ratio)
            .map_err(|e| AnnealError::InvalidParams(e.to_string()))?;
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        cooling_schedule(self.stages, self.t_upper, self.t_lower)
    }

    /// Temperature held during stage `stage` (zero-based).
    pub fn temperature(&self, stage: usize) -> f64 {
        self.t_upper * self.gamma().powi(stage as i32)
    }
}

/// Decay factor taking `t_upper` to `t_lower` in `stages` steps.
pub fn cooling_schedule(stages: usize, t_upper: f64, t_lower: f64) -> f64 {
    (t_lower / t_upper).powf(1.0 / stages as f64)
}

pub fn lower_temperature(min_proportion: f64, target_ratio: f64) -> f64 {
    (min_proportion / target_ratio).sqrt() / 128.0
}

/// Metropolis rule with temperature scaled by the upper default.
pub fn accept<R: Rng + ?Sized>(cost_old: f64, cost_new: f64, t: f64, rng: &mut R) -> bool {
    if cost_new < cost_old {
        return true;
    }
    let p = ((cost_old - cost_new) / (t / DEFAULT_UPPER_TEMPERATURE)).exp();
    rng.random::<f64>() < p
}

/// Min-max normalizes each axis to [0, 1]; a constant axis maps to 0.5.
pub fn normalize_positions(positions: &mut [[f64; 2]]) {
    for axis in 0..2 {
        let (lo, hi) = positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[axis]), hi.max(p[axis])));
        let span = hi - lo;
        for p in positions.iter_mut() {
            p[axis] = if span > 0.0 { (p[axis] - lo) / span } else { 0.5 };
        }
    }
}

/// Partners of each vertex along lost and fake edges.
#[derive(Clone, Debug, Default)]
pub struct EdgeDefects {
    pub lost: Vec<Vec<usize>>,
    pub fake: Vec<Vec<usize>>,
}

impl EdgeDefects {
    pub fn new(n: usize, graph_edges: &BTreeSet<Edge>, layout_edges: &BTreeSet<Edge>) -> Self {
        let mut lost = vec![Vec::new(); n];
        let mut fake = vec![Vec::new(); n];
        for &(a, b) in graph_edges.difference(layout_edges) {
            lost[a].push(b);
            lost[b].push(a);
        }
        for &(a, b) in layout_edges.difference(graph_edges) {
            fake[a].push(b);
            fake[b].push(a);
        }
        Self { lost, fake }
    }
}

fn scaled(v: [f64; 2], magnitude: f64) -> [f64; 2] {
    let len = v[0].hypot(v[1]);
    if len > 0.0 {
        [v[0] / len * magnitude, v[1] / len * magnitude]
    } else {
        [0.0, 0.0]
    }
}

/// Moves one random vertex by `min(1, t)` along the combined heuristic
/// direction, then renormalizes all positions. Returns the moved vertex.
pub fn perturb_position<R: Rng + ?Sized>(
    sigma: &mut LayoutConfiguration,
    t: f64,
    proportions: &[f64],
    defects: &EdgeDefects,
    heuristics: HeuristicWeights,
    rng: &mut R,
) -> usize {
    let n = sigma.positions.len();
    let i = rng.random_range(0..n);
    let p = sigma.positions[i];
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let random = [t * angle.cos(), t * angle.sin()];

    let mut pull = [0.0, 0.0];
    let near = proportions[i].sqrt() / 2.0;
    for &j in &defects.lost[i] {
        let q = sigma.positions[j];
        let v = [q[0] - p[0], q[1] - p[1]];
        let dist = v[0].hypot(v[1]);
        if dist >= near && dist > 0.0 {
            pull[0] += v[0] / dist;
            pull[1] += v[1] / dist;
        }
    }
    let attraction = scaled(pull, 1.0 + t);

    let mut push = [0.0, 0.0];
    let far = std::f64::consts::SQRT_2 / 2.0;
    for &j in &defects.fake[i] {
        let q = sigma.positions[j];
        let v = [p[0] - q[0], p[1] - q[1]];
        let dist = v[0].hypot(v[1]);
        if dist <= far && dist > 0.0 {
            push[0] += v[0] / dist;
            push[1] += v[1] / dist;
        }
    }
    let repulsion = scaled(push, t);

    let h = heuristics;
    let direction = [
        h.random * random[0] + h.attraction * attraction[0] + h.repulsion * repulsion[0],
        h.random * random[1] + h.attraction * attraction[1] + h.repulsion * repulsion[1],
    ];
    let step = scaled(direction, t.min(1.0));
    sigma.positions[i] = [p[0] + step[0], p[1] + step[1]];
    normalize_positions(&mut sigma.positions);
    i
}

fn scale_factor<R: Rng + ?Sized>(t: f64, rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0 + t
    } else {
        1.0 / (1.0 + t)
    }
}

/// Scales one random weight by `1 + t` or its inverse, within the clip
/// interval around the original. Returns the vertex.
pub fn perturb_weight<R: Rng + ?Sized>(sigma: &mut LayoutConfiguration, t: f64, rng: &mut R) -> usize {
    let i = rng.random_range(0..sigma.weights.len());
    let f = scale_factor(t, rng);
    let original = sigma.original_weights[i];
    sigma.weights[i] = (sigma.weights[i] * f).clamp(original / WEIGHT_CLIP, original * WEIGHT_CLIP);
    i
}

pub fn perturb_ratio<R: Rng + ?Sized>(sigma: &mut LayoutConfiguration, t: f64, rng: &mut R) {
    let f = scale_factor(t, rng);
    sigma.ratio = (sigma.ratio * f).clamp(1.0, RATIO_CLIP);
}

/// Fixed inputs of an optimization run.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub graph: &'a VertexWeightedGraph,
    pub proportions: WeightProportions,
    pub target_ratio: f64,
    pub display: Rect,
    pub weights: CostWeights,
}

impl<'a> Problem<'a> {
    pub fn new(graph: &'a VertexWeightedGraph, target_ratio: f64, display: Rect, weights: CostWeights) -> Self {
        Self {
            graph,
            proportions: normalize_weights(graph),
            target_ratio,
            display,
            weights,
        }
    }

    pub fn evaluate(&self, sigma: &LayoutConfiguration) -> Evaluation {
        let tree = two_level_partition(self.graph, &sigma.proportions(), &sigma.positions, sigma.ratio, self.display);
        let rects = tree.leaf_rects(self.graph.len());
        let (report, layout_edges) = MetricsReport::measure(
            self.proportions.as_slice(),
            &rects,
            self.graph.edges(),
            self.target_ratio,
            &self.weights,
            contact_eps(self.display),
        );
        Evaluation {
            report,
            tree,
            layout_edges,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub tree: PartitionTree,
    pub layout_edges: BTreeSet<Edge>,
}

impl Evaluation {
    pub fn cost(&self) -> f64 {
        self.report.total_cost
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Position,
    Weight,
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Main,
    FineTune,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub stage: usize,
    pub iteration: usize,
    pub temperature: f64,
    pub action: Action,
    pub accepted: bool,
    pub areal_error: f64,
    pub topological_error: f64,
    pub aspect_ratio_loss: f64,
    pub cost: f64,
    pub best_cost: f64,
}

#[derive(Clone, Debug)]
pub struct AnnealResult {
    pub best: LayoutConfiguration,
    pub evaluation: Evaluation,
    pub trace: Vec<TraceRecord>,
    pub seed: u64,
}

/// Random initial positions in the unit square.
pub fn random_positions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

pub fn optimize(
    problem: &Problem<'_>,
    params: &AnnealParams,
    initial: Option<&[[f64; 2]]>,
) -> Result<AnnealResult, AnnealError> {
    params.validate()?;
    let n = problem.graph.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let positions = match initial {
        Some(p) => {
            if p.len() != n || p.iter().any(|q| !q[0].is_finite() || !q[1].is_finite()) {
                return Err(AnnealError::InvalidPositions);
            }
            let mut p = p.to_vec();
            normalize_positions(&mut p);
            p
        }
        None => random_positions(n, &mut rng),
    };

    let mut actions = vec![Action::Position];
    if params.weight_perturbation {
        actions.push(Action::Weight);
    }
    actions.push(Action::Ratio);

    let mut current = LayoutConfiguration::new(problem.graph, positions, problem.target_ratio);
    let mut current_eval = problem.evaluate(&current);
    let mut best = current.clone();
    let mut best_eval = current_eval.clone();
    let mut trace = Vec::new();
    let gamma = params.gamma();

    for phase in [Phase::Main, Phase::FineTune] {
        for stage in 0..params.stages {
            let t = params.t_upper * gamma.powi(stage as i32);
            for iteration in 0..params.iterations {
                let action = *actions.choose(&mut rng).expect("actions available");
                let mut candidate = current.clone();
                match action {
                    Action::Position => {
                        let defects = EdgeDefects::new(n, problem.graph.edges(), &current_eval.layout_edges);
                        let props = current.proportions();
                        perturb_position(&mut candidate, t, props.as_slice(), &defects, params.heuristics, &mut rng);
                    }
                    Action::Weight => {
                        perturb_weight(&mut candidate, t, &mut rng);
                    }
                    Action::Ratio => perturb_ratio(&mut candidate, t, &mut rng),
                }
                let eval = problem.evaluate(&candidate);
                let accepted = match phase {
                    Phase::Main => accept(current_eval.cost(), eval.cost(), t, &mut rng),
                    Phase::FineTune => eval.cost() < current_eval.cost(),
                };
                if accepted {
                    current = candidate;
                    current_eval = eval;
                    if current_eval.cost() < best_eval.cost() {
                        best = current.clone();
                        best_eval = current_eval.clone();
                    }
                }
                if params.record_trace {
                    let r = &current_eval.report;
                    trace.push(TraceRecord {
                        phase,
                        stage,
                        iteration,
                        temperature: t,
                        action,
                        accepted,
                        areal_error: r.areal_error,
                        topological_error: r.topological_error,
                        aspect_ratio_loss: r.aspect_ratio_loss,
                        cost: r.total_cost,
                        best_cost: best_eval.cost(),
                    });
                }
            }
        }
    }

    Ok(AnnealResult {
        best,
        evaluation: best_eval,
        trace,
        seed: params.seed,
    })
}

/// Independent chains for each seed, run in parallel; the lowest final cost
/// wins, ties going to the earlier seed.
pub fn optimize_restarts(
    problem: &Problem<'_>,
    params: &AnnealParams,
    initial: Option<&[[f64; 2]]>,
    seeds: &[u64],
) -> Result<AnnealResult, AnnealError> {
    if seeds.is_empty() {
        return Err(AnnealError::InvalidParams("at least one seed is required".into()));
    }
    let results = seeds
        .par_iter()
        .map(|&seed| {
            let mut p = params.clone();
            p.seed = seed;
            optimize(problem, &p, initial)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results
        .into_iter()
        .reduce(|a, b| if b.evaluation.cost() < a.evaluation.cost() { b } else { a })
        .expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexRecord;

    fn path_graph(n: usize) -> VertexWeightedGraph {
        let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let records = ids
            .iter()
            .enumerate()
            .map(|(i, id)| VertexRecord { id: id.clone(), label: None, weight: 1.0 + i as f64, cluster: None })
            .collect();
        let edges: Vec<(String, String)> = (1..n).map(|i| (ids[i - 1].clone(), ids[i].clone())).collect();
        VertexWeightedGraph::new(records, &edges).unwrap()
    }

    #[test]
    fn schedule() {
        assert!((cooling_schedule(8, 256.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((cooling_schedule(1, 256.0, 2.0) - 2.0 / 256.0).abs() < 1e-15);
        assert!((lower_temperature(0.015, 1.5) - 7.8125e-4).abs() < 1e-15);
    }

    #[test]
    fn acceptance_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(accept(1.0, 0.5, 1e-6, &mut rng));
        assert!((0..1000).all(|_| accept(0.3, 0.3, 1e-3, &mut rng)));
        assert!(!accept(0.0, 1.0, 1e-6, &mut rng));
    }

    #[test]
    fn clipping() {
        let g = path_graph(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = LayoutConfiguration::new(&g, vec![[0.0, 0.0]; 3], 1.0);
        for _ in 0..200 {
            perturb_weight(&mut s, 10.0, &mut rng);
            perturb_ratio(&mut s, 10.0, &mut rng);
            for (w, o) in s.weights.iter().zip(&s.original_weights) {
                assert!(*w >= o / 64.0 && *w <= o * 64.0);
            }
            assert!((1.0..=64.0).contains(&s.ratio));
        }
        s.ratio = 1.0;
        s.weights[0] = 64.0 * s.original_weights[0];
        let mut s2 = s.clone();
        s2.ratio = 2.0;
        // Magnify at T = 0.5 gives 3; contracting from 1 stays at 1.
        let mut hits = (false, false);
        for _ in 0..50 {
            let mut a = s2.clone();
            perturb_ratio(&mut a, 0.5, &mut rng);
            if (a.ratio - 3.0).abs() < 1e-15 {
                hits.0 = true;
            }
            let mut b = s.clone();
            perturb_ratio(&mut b, 0.5, &mut rng);
            if b.ratio == 1.0 {
                hits.1 = true;
            }
        }
        assert!(hits.0 && hits.1);
    }

    #[test]
    fn degenerate_normalization() {
        let mut p = vec![[0.3, 2.0], [0.3, 4.0], [0.3, 3.0]];
        normalize_positions(&mut p);
        assert_eq!(p, vec![[0.5, 0.0], [0.5, 1.0], [0.5, 0.5]]);
    }

    #[test]
    fn position_step_keeps_unit_square() {
        let g = path_graph(5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = LayoutConfiguration::new(&g, random_positions(5, &mut rng), 1.0);
        let props = normalize_weights(&g);
        let defects = EdgeDefects::new(5, g.edges(), &BTreeSet::new());
        for t in [3.0, 0.5, 1e-3] {
            perturb_position(&mut s, t, props.as_slice(), &defects, HeuristicWeights::default(), &mut rng);
            for axis in 0..2 {
                let lo = s.positions.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
                let hi = s.positions.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
                assert_eq!((lo, hi), (0.0, 1.0));
            }
        }
    }

    #[test]
    fn optimize_is_reproducible_and_monotone() {
        let g = path_graph(6);
        let problem = Problem::new(&g, 1.5, Rect::new(0.0, 0.0, 1200.0, 800.0), CostWeights::default());
        let mut params = AnnealParams::for_graph(&g, 1.5, 16, 5);
        params.record_trace = true;
        let a = optimize(&problem, &params, None).unwrap();
        let b = optimize(&problem, &params, None).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
        assert_eq!(a.trace.len(), 2 * 16 * 6);
        assert!(a.trace.windows(2).all(|w| w[1].best_cost <= w[0].best_cost));
        let mut prev = f64::INFINITY;
        for r in a.trace.iter().filter(|r| r.phase == Phase::FineTune) {
            assert!(r.cost <= prev);
            prev = r.cost;
        }
        assert_eq!(a.evaluation, problem.evaluate(&a.best));
    }

    #[test]
    fn disabled_weight_perturbation_keeps_areas() {
        let g = path_graph(6);
        let problem = Problem::new(&g, 1.5, Rect::new(0.0, 0.0, 1200.0, 800.0), CostWeights::new(0.0, 1.0, 0.0).unwrap());
        let mut params = AnnealParams::for_graph(&g, 1.5, 8, 1);
        params.weight_perturbation = false;
        params.record_trace = true;
        let r = optimize(&problem, &params, None).unwrap();
        assert!(r.trace.iter().all(|t| t.action != Action::Weight));
        assert!(r.evaluation.report.areal_error < 1e-9);
    }

    #[test]
    fn invalid_params() {
        let g = path_graph(2);
        let mut p = AnnealParams::for_graph(&g, 1.0, 4, 0);
        p.stages = 0;
        assert!(p.validate().is_err());
        let mut p = AnnealParams::for_graph(&g, 1.0, 4, 0);
        p.t_lower = 300.0;
        assert!(p.validate().is_err());
    }
}
