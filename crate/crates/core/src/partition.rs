//! Binary space partitioning of a rectangle among weighted 2D points.
//!
//! [`dar_partition`] scores every cut of the position-sorted item list in
//! both orientations by the aspect-ratio loss of the two resulting
//! sub-rectangles and keeps the best one. Sub-rectangle extents are always
//! proportional to the weight sums of their items, so the leaves carry no
//! areal error. [`sew_partition`] is the equal-weight baseline.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{aspect_ratio, Axis, Rect};
use crate::graph::{cluster_graph, VertexWeightedGraph, WeightProportions};

/// How an internal node divides its rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Children side by side: the width is divided, heights are shared.
    Horizontal,
    /// Children stacked: the height is divided, widths are shared.
    Vertical,
}

impl Orientation {
    /// The axis along which the parent extent is divided.
    pub fn split_axis(self) -> Axis {
        match self {
            Orientation::Horizontal => Axis::X,
            Orientation::Vertical => Axis::Y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionItem {
    /// Caller-side index; leaves report it back.
    pub index: usize,
    pub weight: f64,
    pub position: [f64; 2],
}

/// k-d tree of subdividing rectangles.
///
/// `left` is always the child with the smaller coordinate along the split
/// axis (left or top). `split` is the absolute coordinate of the splitting
/// line; after border adjustment it is the centerline of the band.
#[derive(Clone, Debug, PartialEq)]
pub enum PartitionTree {
    Leaf {
        item: usize,
        rect: Rect,
    },
    Internal {
        rect: Rect,
        orientation: Orientation,
        split: f64,
        left: Box<PartitionTree>,
        right: Box<PartitionTree>,
    },
}

impl PartitionTree {
    pub fn rect(&self) -> Rect {
        match self {
            PartitionTree::Leaf { rect, .. } | PartitionTree::Internal { rect, .. } => *rect,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            PartitionTree::Leaf { .. } => 1,
            PartitionTree::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Leaves in left-to-right traversal order.
    pub fn leaves(&self) -> Vec<(usize, Rect)> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |item, rect| out.push((item, rect)));
        out
    }

    pub fn visit_leaves(&self, f: &mut impl FnMut(usize, Rect)) {
        match self {
            PartitionTree::Leaf { item, rect } => f(*item, *rect),
            PartitionTree::Internal { left, right, .. } => {
                left.visit_leaves(f);
                right.visit_leaves(f);
            }
        }
    }

    /// Leaf rectangles indexed by item, for items `0..n`.
    ///
    /// Panics if an item index is out of range or missing.
    pub fn leaf_rects(&self, n: usize) -> Vec<Rect> {
        let mut out: Vec<Option<Rect>> = vec![None; n];
        self.visit_leaves(&mut |item, rect| out[item] = Some(rect));
        out.into_iter()
            .enumerate()
            .map(|(i, r)| r.unwrap_or_else(|| panic!("item {i} has no leaf")))
            .collect()
    }

    /// Sum of leaf areas below this node.
    pub fn leaf_area(&self) -> f64 {
        match self {
            PartitionTree::Leaf { rect, .. } => rect.area(),
            PartitionTree::Internal { left, right, .. } => left.leaf_area() + right.leaf_area(),
        }
    }

    /// Depth-first visit of internal nodes with their depth (root = 0).
    pub fn visit_internal(&self, f: &mut impl FnMut(&PartitionTree, usize)) {
        fn go(node: &PartitionTree, depth: usize, f: &mut impl FnMut(&PartitionTree, usize)) {
            if let PartitionTree::Internal { left, right, .. } = node {
                f(node, depth);
                go(left, depth + 1, f);
                go(right, depth + 1, f);
            }
        }
        go(self, 0, f);
    }

    pub fn depth(&self) -> usize {
        match self {
            PartitionTree::Leaf { .. } => 0,
            PartitionTree::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Replaces each leaf by the tree returned from `f(item, rect)`.
    pub fn graft(self, f: &mut impl FnMut(usize, Rect) -> PartitionTree) -> PartitionTree {
        match self {
            PartitionTree::Leaf { item, rect } => f(item, rect),
            PartitionTree::Internal {
                rect,
                orientation,
                split,
                left,
                right,
            } => PartitionTree::Internal {
                rect,
                orientation,
                split,
                left: Box::new(left.graft(f)),
                right: Box::new(right.graft(f)),
            },
        }
    }
}

/// Mean absolute deviation of the rectangles' aspect ratios from `r`.
pub fn aspect_ratio_loss(rects: &[Rect], r: f64) -> f64 {
    if rects.is_empty() {
        return 0.0;
    }
    rects.iter().map(|rect| (rect.aspect_ratio() - r).abs()).sum::<f64>() / rects.len() as f64
}

/// The cut chosen for one partitioning step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutChoice {
    pub orientation: Orientation,
    /// Number of items (in sorted order) assigned to the left/top child.
    pub count: usize,
    pub loss: f64,
}

fn sort_items(items: &mut [PartitionItem], axis: Axis) {
    let k = match axis {
        Axis::X => 0,
        Axis::Y => 1,
    };
    items.sort_by(|a, b| {
        a.position[k]
            .partial_cmp(&b.position[k])
            .unwrap_or(Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
}

/// Splits `rect` along `orientation` with the first child taking `share` of the extent.
fn split_rect(rect: Rect, orientation: Orientation, first: f64, total: f64) -> (Rect, Rect) {
    match orientation {
        Orientation::Horizontal => {
            let w1 = rect.w * first / total;
            (
                Rect::new(rect.x, rect.y, w1, rect.h),
                Rect::new(rect.x + w1, rect.y, rect.w - w1, rect.h),
            )
        }
        Orientation::Vertical => {
            let h1 = rect.h * first / total;
            (
                Rect::new(rect.x, rect.y, rect.w, h1),
                Rect::new(rect.x, rect.y + h1, rect.w, rect.h - h1),
            )
        }
    }
}

/// Best cut of `sorted` along one orientation: (count, loss).
fn best_cut_along(rect: Rect, sorted: &[PartitionItem], orientation: Orientation, r: f64) -> (usize, f64) {
    let total: f64 = sorted.iter().map(|it| it.weight).sum();
    let mut prefix = 0.0;
    let mut best = (0, f64::INFINITY);
    for (k, item) in sorted[..sorted.len() - 1].iter().enumerate() {
        prefix += item.weight;
        let (a, b) = split_rect(rect, orientation, prefix, total);
        let loss = ((aspect_ratio(a.w, a.h) - r).abs() + (aspect_ratio(b.w, b.h) - r).abs()) / 2.0;
        if loss < best.1 {
            best = (k + 1, loss);
        }
    }
    best
}

/// Scores all cuts in both orientations and returns the winner.
///
/// Ties prefer horizontal, then the smallest cut count. `items` must hold
/// at least two entries.
pub fn best_cut(rect: Rect, items: &[PartitionItem], r: f64) -> CutChoice {
    assert!(items.len() >= 2, "a cut needs at least two items");
    let mut by_x = items.to_vec();
    sort_items(&mut by_x, Axis::X);
    let mut by_y = items.to_vec();
    sort_items(&mut by_y, Axis::Y);
    let (hk, hl) = best_cut_along(rect, &by_x, Orientation::Horizontal, r);
    let (vk, vl) = best_cut_along(rect, &by_y, Orientation::Vertical, r);
    if vl < hl {
        CutChoice {
            orientation: Orientation::Vertical,
            count: vk,
            loss: vl,
        }
    } else {
        CutChoice {
            orientation: Orientation::Horizontal,
            count: hk,
            loss: hl,
        }
    }
}

/// Builds the child trees once a cut has been chosen.
fn build_split(
    rect: Rect,
    mut items: Vec<PartitionItem>,
    orientation: Orientation,
    count: usize,
    recurse: &impl Fn(Rect, Vec<PartitionItem>) -> PartitionTree,
) -> PartitionTree {
    sort_items(&mut items, orientation.split_axis());
    let first: f64 = items[..count].iter().map(|it| it.weight).sum();
    let total: f64 = first + items[count..].iter().map(|it| it.weight).sum::<f64>();
    let (a, b) = split_rect(rect, orientation, first, total);
    let right_items = items.split_off(count);
    let split = match orientation {
        Orientation::Horizontal => a.right(),
        Orientation::Vertical => a.bottom(),
    };
    PartitionTree::Internal {
        rect,
        orientation,
        split,
        left: Box::new(recurse(a, items)),
        right: Box::new(recurse(b, right_items)),
    }
}

/// Desired-aspect-ratio partitioning of `rect` among `items`.
pub fn dar_partition(rect: Rect, items: &[PartitionItem], r: f64) -> PartitionTree {
    assert!(!items.is_empty(), "partitioning needs at least one item");
    fn go(rect: Rect, items: Vec<PartitionItem>, r: f64) -> PartitionTree {
        if items.len() == 1 {
            return PartitionTree::Leaf {
                item: items[0].index,
                rect,
            };
        }
        let choice = best_cut(rect, &items, r);
        build_split(rect, items, choice.orientation, choice.count, &|rc, its| go(rc, its, r))
    }
    go(rect, items.to_vec(), r)
}

/// Scaled equal-weight baseline.
///
/// Items are partitioned in a space whose width is `rect.w / r` by cutting
/// the list sorted along the longer side where the prefix weight is closest
/// to half the total; all x extents are then stretched by `r`.
pub fn sew_partition(rect: Rect, items: &[PartitionItem], r: f64) -> PartitionTree {
    assert!(!items.is_empty(), "partitioning needs at least one item");
    fn go(rect: Rect, items: Vec<PartitionItem>) -> PartitionTree {
        if items.len() == 1 {
            return PartitionTree::Leaf {
                item: items[0].index,
                rect,
            };
        }
        let orientation = if rect.w >= rect.h {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        };
        let mut sorted = items.clone();
        sort_items(&mut sorted, orientation.split_axis());
        let total: f64 = sorted.iter().map(|it| it.weight).sum();
        let mut prefix = 0.0;
        let mut best = (1, f64::INFINITY);
        for (k, item) in sorted[..sorted.len() - 1].iter().enumerate() {
            prefix += item.weight;
            let gap = (prefix - total / 2.0).abs();
            if gap < best.1 {
                best = (k + 1, gap);
            }
        }
        build_split(rect, sorted, orientation, best.0, &go)
    }
    let square = Rect::new(rect.x, rect.y, rect.w / r, rect.h);
    let x0 = rect.x;
    let stretch = |rc: Rect| Rect::new(x0 + (rc.x - x0) * r, rc.y, rc.w * r, rc.h);
    fn scale(tree: PartitionTree, stretch: &impl Fn(Rect) -> Rect, x0: f64, r: f64) -> PartitionTree {
        match tree {
            PartitionTree::Leaf { item, rect } => PartitionTree::Leaf {
                item,
                rect: stretch(rect),
            },
            PartitionTree::Internal {
                rect,
                orientation,
                split,
                left,
                right,
            } => PartitionTree::Internal {
                rect: stretch(rect),
                orientation,
                split: match orientation {
                    Orientation::Horizontal => x0 + (split - x0) * r,
                    Orientation::Vertical => split,
                },
                left: Box::new(scale(*left, stretch, x0, r)),
                right: Box::new(scale(*right, stretch, x0, r)),
            },
        }
    }
    scale(go(square, items.to_vec()), &stretch, x0, r)
}

/// Partitions clusters first, then each cluster rectangle among its members.
///
/// Cluster items sit at the centroid of their members' positions and carry
/// the summed member proportions. Leaf items are vertex indices.
pub fn two_level_partition(
    graph: &VertexWeightedGraph,
    proportions: &WeightProportions,
    positions: &[[f64; 2]],
    r: f64,
    rect: Rect,
) -> PartitionTree {
    assert_eq!(positions.len(), graph.len(), "one position per vertex");
    let clusters = cluster_graph(graph, proportions);
    let cluster_items: Vec<PartitionItem> = clusters
        .members
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let n = members.len() as f64;
            let (sx, sy) = members
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &v| (sx + positions[v][0], sy + positions[v][1]));
            PartitionItem {
                index: c,
                weight: clusters.weights[c],
                position: [sx / n, sy / n],
            }
        })
        .collect();
    let top = dar_partition(rect, &cluster_items, r);
    top.graft(&mut |cluster, cluster_rect| {
        let members: Vec<PartitionItem> = clusters.members[cluster]
            .iter()
            .map(|&v| PartitionItem {
                index: v,
                weight: proportions[v],
                position: positions[v],
            })
            .collect();
        dar_partition(cluster_rect, &members, r)
    })
}
