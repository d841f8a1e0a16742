#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::Rng;
use vmap::datasets::{lognormal_points, trial_rng};
use vmap::graph::{edge, Edge};
use vmap::partition::{aspect_ratio_loss, dar_partition};
use vmap::document::LayoutDocument;
use vmap::router::NodeKind;
use vmap::{Orientation, PartitionItem, PartitionTree, Rect};

/// Random DAR tree with `n` log-normal leaves on a `1.5 sqrt(n) x sqrt(n)` rectangle.
pub fn random_tree(n: usize, seed: u64, trial: u64) -> (PartitionTree, Vec<PartitionItem>) {
    let items = lognormal_points(n, &mut trial_rng(seed, trial));
    let side = (n as f64).sqrt();
    let rect = Rect::new(0.0, 0.0, 1.5 * side, side);
    (dar_partition(rect, &items, 1.5), items)
}

/// Like [`random_tree`], with the rectangle scaled up (shape unchanged) so
/// every leaf is wider and taller than `8d`.
pub fn random_feasible_tree(n: usize, seed: u64, trial: u64, d: f64) -> (PartitionTree, Vec<PartitionItem>) {
    let (tree, items) = random_tree(n, seed, trial);
    let mut min_extent = f64::INFINITY;
    tree.visit_leaves(&mut |_, r| min_extent = min_extent.min(r.w).min(r.h));
    let scale = (8.0 * d / min_extent).max(1.0);
    let rect = tree.rect();
    let rect = Rect::new(0.0, 0.0, rect.w * scale, rect.h * scale);
    (dar_partition(rect, &items, 1.5), items)
}

pub fn targets(items: &[PartitionItem]) -> HashMap<usize, f64> {
    let total: f64 = items.iter().map(|i| i.weight).sum();
    items.iter().map(|i| (i.index, i.weight / total)).collect()
}

/// Largest relative deviation of leaf-area shares from `targets`.
pub fn max_share_deviation(tree: &PartitionTree, targets: &HashMap<usize, f64>) -> f64 {
    let total = tree.leaf_area();
    tree.leaves()
        .iter()
        .map(|(i, r)| ((r.area() / total) - targets[i]).abs() / targets[i])
        .fold(0.0, f64::max)
}

/// Root cut chosen by enumerating every subset that is a prefix of the
/// items along an axis, without sorting.
pub fn brute_force_cut(rect: Rect, items: &[PartitionItem], r: f64) -> (Orientation, usize, f64) {
    let n = items.len();
    let total: f64 = items.iter().map(|i| i.weight).sum();
    let mut best: Option<(Orientation, usize, f64)> = None;
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        let coord = |i: &PartitionItem| match orientation {
            Orientation::Horizontal => i.position[0],
            Orientation::Vertical => i.position[1],
        };
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for mask in 1u32..(1 << n) - 1 {
            let inside: Vec<&PartitionItem> = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| &items[b]).collect();
            let outside: Vec<&PartitionItem> = (0..n).filter(|b| mask & (1 << b) == 0).map(|b| &items[b]).collect();
            let max_in = inside.iter().map(|i| coord(i)).fold(f64::NEG_INFINITY, f64::max);
            let min_out = outside.iter().map(|i| coord(i)).fold(f64::INFINITY, f64::min);
            if max_in >= min_out {
                continue;
            }
            let share = inside.iter().map(|i| i.weight).sum::<f64>() / total;
            let (a, b) = match orientation {
                Orientation::Horizontal => (
                    Rect::new(rect.x, rect.y, rect.w * share, rect.h),
                    Rect::new(rect.x + rect.w * share, rect.y, rect.w * (1.0 - share), rect.h),
                ),
                Orientation::Vertical => (
                    Rect::new(rect.x, rect.y, rect.w, rect.h * share),
                    Rect::new(rect.x, rect.y + rect.h * share, rect.w, rect.h * (1.0 - share)),
                ),
            };
            candidates.push((inside.len(), aspect_ratio_loss(&[a, b], r)));
        }
        candidates.sort_by_key(|c| c.0);
        for (count, loss) in candidates {
            if best.is_none_or(|(_, _, l)| loss < l) {
                best = Some((orientation, count, loss));
            }
        }
    }
    best.expect("at least two items")
}

/// Pairs of rectangles whose closed extents overlap on both axes.
pub fn brute_force_contacts(rects: &[Rect], eps: f64) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            let (a, b) = (rects[i], rects[j]);
            let x = a.x.max(b.x) - (a.x + a.w).min(b.x + b.w);
            let y = a.y.max(b.y) - (a.y + a.h).min(b.y + b.h);
            if x <= eps && y <= eps {
                out.insert(edge(i, j));
            }
        }
    }
    out
}

/// Random rectangles on a coarse grid so that touching is common.
pub fn random_grid_rects<R: Rng>(n: usize, rng: &mut R) -> Vec<Rect> {
    (0..n)
        .map(|_| {
            let x = rng.random_range(0..16) as f64 * 0.25;
            let y = rng.random_range(0..16) as f64 * 0.25;
            let w = rng.random_range(1..6) as f64 * 0.25;
            let h = rng.random_range(1..6) as f64 * 0.25;
            Rect::new(x, y, w, h)
        })
        .collect()
}

/// Shortest corridor length between two rectangles by petgraph Dijkstra.
pub fn oracle_distance(doc: &LayoutDocument, a: usize, b: usize) -> f64 {
    let n = doc.network.nodes.len();
    let mut g = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    // Side nodes of other rectangles are not part of any corridor route.
    let through = |i: usize| match doc.network.nodes[i].kind {
        NodeKind::RectSide { vertex } => vertex == a || vertex == b,
        _ => true,
    };
    for &(x, y, len) in &doc.network.edges {
        if through(x) && through(y) {
            g.add_edge(nodes[x], nodes[y], len);
        }
    }
    let sides = |v: usize| -> Vec<usize> {
        (0..n).filter(|&i| doc.network.nodes[i].kind == NodeKind::RectSide { vertex: v }).collect()
    };
    let targets = sides(b);
    let mut best = f64::INFINITY;
    for s in sides(a) {
        let dist = dijkstra(&g, nodes[s], None, |e| *e.weight());
        for &t in &targets {
            if let Some(&d) = dist.get(&nodes[t]) {
                best = best.min(d);
            }
        }
    }
    best
}

/// Schema violations of `value` against the published layout schema, or one of its `$defs`.
pub fn schema_errors(value: &serde_json::Value, def: Option<&str>) -> Vec<String> {
    let text = include_str!("../../../../docs/layout.schema.json");
    let mut schema: serde_json::Value = serde_json::from_str(text).expect("schema parses");
    if let Some(name) = def {
        schema = serde_json::json!({ "$defs": schema["$defs"].take(), "$ref": format!("#/$defs/{name}") });
    }
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    validator.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}
