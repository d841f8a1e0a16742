//! Border insertion that keeps leaf areas proportional.
//!
//! Each splitting line of a [`PartitionTree`] is widened into a band of
//! width `2d` and the outer rectangle is inset by `d`, so every leaf ends up
//! surrounded by a border of width `d`. Splitting lines are then moved so
//! that the remaining leaf areas stay proportional to the areas of the
//! unbordered partition:
//!
//! * the top-down stage solves, at every node from the root down, a 2x2
//!   linear system for the scale factors of the two children, estimating
//!   the encoding area of each side from band lengths and junction counts;
//! * the bottom-up stage re-solves the same system from the leaves up using
//!   exact leaf-area sums. Because bands keep their width while a subtree is
//!   rescaled, one sweep leaves a residual of order `d / extent`; sweeps are
//!   repeated until the proportions are exact to rounding.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Axis, Point, Rect};
use crate::graph::Edge;
use crate::partition::{Orientation, PartitionTree};

#[derive(Debug, Error, PartialEq)]
pub enum BorderError {
    #[error("border width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("border proportion must lie in (0, 1), got {0}")]
    InvalidProportion(f64),
    #[error("border too wide: d = {d} does not fit at node {node}")]
    BorderTooWide { d: f64, node: usize },
    #[error("border adjustment did not converge (residual {0:e})")]
    NotConverged(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BorderSpec {
    /// Bands of width `2d` between leaves and a frame of width `d`.
    FixedWidth { d: f64 },
    /// Every leaf gives up the fraction `p` of its area.
    Proportional { p: f64 },
}

/// Scale factors applied to the two children of one split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitAdjustment {
    pub c_left: f64,
    pub c_right: f64,
}

/// A band centerline: runs along `along` at coordinate `at` on the other axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandSegment {
    pub along: Axis,
    pub at: f64,
    pub from: f64,
    pub to: f64,
}

impl BandSegment {
    pub fn len(&self) -> f64 {
        self.to - self.from
    }

    pub fn is_empty(&self) -> bool {
        self.to <= self.from
    }

    pub fn start(&self) -> Point {
        self.point_at(self.from)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.to)
    }

    pub fn point_at(&self, t: f64) -> Point {
        match self.along {
            Axis::X => Point::new(t, self.at),
            Axis::Y => Point::new(self.at, t),
        }
    }

    /// Whether `p` lies on the segment strictly between its endpoints.
    pub fn contains_interior(&self, p: Point, eps: f64) -> bool {
        let (t, off) = match self.along {
            Axis::X => (p.x, p.y),
            Axis::Y => (p.y, p.x),
        };
        (off - self.at).abs() <= eps && t > self.from + eps && t < self.to - eps
    }
}

/// Which sides of a node rectangle face a band (as opposed to the boundary
/// of the region being measured).
#[derive(Clone, Copy, Debug, Default)]
struct BandSides {
    low_x: bool,
    high_x: bool,
    low_y: bool,
    high_y: bool,
}

impl BandSides {
    fn low(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.low_x,
            Axis::Y => self.low_y,
        }
    }

    fn high(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.high_x,
            Axis::Y => self.high_y,
        }
    }

    fn with_high(mut self, axis: Axis) -> Self {
        match axis {
            Axis::X => self.high_x = true,
            Axis::Y => self.high_y = true,
        }
        self
    }

    fn with_low(mut self, axis: Axis) -> Self {
        match axis {
            Axis::X => self.low_x = true,
            Axis::Y => self.low_y = true,
        }
        self
    }
}

/// Band centerlines inside `node`'s rectangle of a bordered tree.
///
/// A centerline spans its node's rectangle and reaches `d` further into any
/// enclosing band that lies inside the measured rectangle.
pub fn band_segments(node: &PartitionTree, d: f64) -> Vec<BandSegment> {
    fn go(node: &PartitionTree, sides: BandSides, d: f64, out: &mut Vec<BandSegment>) {
        if let PartitionTree::Internal {
            rect,
            orientation,
            split,
            left,
            right,
        } = node
        {
            let axis = orientation.split_axis();
            let along = axis.other();
            let from = rect.start(along) - if sides.low(along) { d } else { 0.0 };
            let to = rect.end(along) + if sides.high(along) { d } else { 0.0 };
            out.push(BandSegment {
                along,
                at: *split,
                from,
                to,
            });
            go(left, sides.with_high(axis), d, out);
            go(right, sides.with_low(axis), d, out);
        }
    }
    let mut out = Vec::new();
    go(node, BandSides::default(), d, &mut out);
    out
}

fn segment_eps(node: &PartitionTree) -> f64 {
    let r = node.rect();
    1e-9 * r.w.max(r.h)
}

/// Number of band junctions inside `node`: segment endpoints lying in the
/// interior of another segment.
pub fn junction_count(node: &PartitionTree, d: f64) -> usize {
    count_junctions(&band_segments(node, d), segment_eps(node))
}

fn count_junctions(segments: &[BandSegment], eps: f64) -> usize {
    let mut count = 0;
    for (i, s) in segments.iter().enumerate() {
        for p in [s.start(), s.end()] {
            if segments
                .iter()
                .enumerate()
                .any(|(j, o)| j != i && o.along != s.along && o.contains_interior(p, eps))
            {
                count += 1;
            }
        }
    }
    count
}

/// Border area inside `node`: total band length times `2d` minus `2d²` per junction.
pub fn border_area(node: &PartitionTree, d: f64) -> f64 {
    let segments = band_segments(node, d);
    let total: f64 = segments.iter().map(BandSegment::len).sum();
    2.0 * d * total - 2.0 * d * d * count_junctions(&segments, segment_eps(node)) as f64
}

/// Border area from its ingredients: line lengths and junction count.
pub fn border_area_from_lines(lengths: &[f64], junctions: usize, d: f64) -> f64 {
    2.0 * d * lengths.iter().sum::<f64>() - 2.0 * d * d * junctions as f64
}

/// Working representation: every split keeps the fraction of its content
/// extent (extent minus the band) given to the first child.
#[derive(Clone, Debug)]
enum Band {
    Leaf {
        item: usize,
    },
    Split {
        orientation: Orientation,
        fraction: f64,
        /// Target areas (proportional to the unbordered leaf areas).
        target_left: f64,
        target_right: f64,
        left: Box<Band>,
        right: Box<Band>,
    },
}

impl Band {
    fn from_tree(tree: &PartitionTree, targets: &HashMap<usize, f64>, gap: f64) -> (Band, f64) {
        match tree {
            PartitionTree::Leaf { item, .. } => (Band::Leaf { item: *item }, targets[item]),
            PartitionTree::Internal {
                rect,
                orientation,
                left,
                right,
                ..
            } => {
                let axis = orientation.split_axis();
                let fraction = left.rect().extent(axis) / (rect.extent(axis) - gap);
                let (l, tl) = Band::from_tree(left, targets, gap);
                let (r, tr) = Band::from_tree(right, targets, gap);
                (
                    Band::Split {
                        orientation: *orientation,
                        fraction,
                        target_left: tl,
                        target_right: tr,
                        left: Box::new(l),
                        right: Box::new(r),
                    },
                    tl + tr,
                )
            }
        }
    }

    fn layout(&self, rect: Rect, d: f64) -> PartitionTree {
        match self {
            Band::Leaf { item } => PartitionTree::Leaf { item: *item, rect },
            Band::Split {
                orientation,
                fraction,
                left,
                right,
                ..
            } => {
                let (a, b, split) = split_with_band(rect, *orientation, *fraction, d);
                PartitionTree::Internal {
                    rect,
                    orientation: *orientation,
                    split,
                    left: Box::new(left.layout(a, d)),
                    right: Box::new(right.layout(b, d)),
                }
            }
        }
    }

    /// Coefficients `(p, q)` with leaf area = `p * extent + q` when the
    /// subtree's extent along `axis` varies and its cross extent is `cross`.
    fn area_coefficients(&self, axis: Axis, cross: f64, d: f64) -> (f64, f64) {
        match self {
            Band::Leaf { .. } => (cross, 0.0),
            Band::Split {
                orientation,
                fraction,
                left,
                right,
                ..
            } => {
                if orientation.split_axis() == axis {
                    let (pl, ql) = left.area_coefficients(axis, cross, d);
                    let (pr, qr) = right.area_coefficients(axis, cross, d);
                    let p = pl * fraction + pr * (1.0 - fraction);
                    (p, ql + qr - 2.0 * d * p)
                } else {
                    let content = cross - 2.0 * d;
                    let (pl, ql) = left.area_coefficients(axis, fraction * content, d);
                    let (pr, qr) = right.area_coefficients(axis, (1.0 - fraction) * content, d);
                    (pl + pr, ql + qr)
                }
            }
        }
    }
}

/// Splits `rect` into two children separated by a band of width `2d`.
fn split_with_band(rect: Rect, orientation: Orientation, fraction: f64, d: f64) -> (Rect, Rect, f64) {
    match orientation {
        Orientation::Horizontal => {
            let w1 = fraction * (rect.w - 2.0 * d);
            let a = Rect::new(rect.x, rect.y, w1, rect.h);
            let b = Rect::new(rect.x + w1 + 2.0 * d, rect.y, rect.right() - (rect.x + w1 + 2.0 * d), rect.h);
            (a, b, rect.x + w1 + d)
        }
        Orientation::Vertical => {
            let h1 = fraction * (rect.h - 2.0 * d);
            let a = Rect::new(rect.x, rect.y, rect.w, h1);
            let b = Rect::new(rect.x, rect.y + h1 + 2.0 * d, rect.w, rect.bottom() - (rect.y + h1 + 2.0 * d));
            (a, b, rect.y + h1 + d)
        }
    }
}

/// Solves the two scale factors from the extent equation
/// `c_left * w_left + c_right * w_right = content` and the area-ratio
/// equation `target_right * (c_left * a_left - b_left) = target_left * (c_right * a_right - b_right)`,
/// where `c * a - b` is a side's encoding area after scaling by `c`.
#[allow(clippy::too_many_arguments)]
fn solve_split(
    w_left: f64,
    w_right: f64,
    content: f64,
    (a_left, b_left): (f64, f64),
    (a_right, b_right): (f64, f64),
    target_left: f64,
    target_right: f64,
) -> SplitAdjustment {
    let det = -w_left * target_left * a_right - w_right * target_right * a_left;
    let rhs = target_right * b_left - target_left * b_right;
    SplitAdjustment {
        c_left: (-content * target_left * a_right - w_right * rhs) / det,
        c_right: (w_left * rhs - target_right * a_left * content) / det,
    }
}

fn leaf_targets(raw: &PartitionTree) -> HashMap<usize, f64> {
    let mut map = HashMap::new();
    raw.visit_leaves(&mut |item, rect| {
        map.insert(item, rect.area());
    });
    map
}

fn validate_width(d: f64) -> Result<(), BorderError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(BorderError::InvalidWidth(d))
    }
}

/// Rejects `d` when some unbordered leaf is not wider and taller than `4d`.
pub fn check_feasible(raw: &PartitionTree, d: f64) -> Result<(), BorderError> {
    validate_width(d)?;
    let mut index = 0;
    let mut bad = None;
    raw.visit_leaves(&mut |_, rect| {
        if bad.is_none() && (rect.w <= 4.0 * d || rect.h <= 4.0 * d) {
            bad = Some(index);
        }
        index += 1;
    });
    match bad {
        Some(node) => Err(BorderError::BorderTooWide { d, node }),
        None => Ok(()),
    }
}

fn check_extents(tree: &PartitionTree, d: f64) -> Result<(), BorderError> {
    let mut index = 0;
    let mut bad = None;
    fn go(node: &PartitionTree, index: &mut usize, bad: &mut Option<usize>) {
        if bad.is_some() {
            return;
        }
        let r = node.rect();
        if !(r.w > 0.0 && r.h > 0.0) {
            *bad = Some(*index);
            return;
        }
        *index += 1;
        if let PartitionTree::Internal { left, right, .. } = node {
            go(left, index, bad);
            go(right, index, bad);
        }
    }
    go(tree, &mut index, &mut bad);
    match bad {
        Some(node) => Err(BorderError::BorderTooWide { d, node }),
        None => Ok(()),
    }
}

/// Coarse root-to-leaf stage. The returned tree's root is the input root
/// inset by `d`.
pub fn top_down_adjust(raw: &PartitionTree, d: f64) -> Result<PartitionTree, BorderError> {
    validate_width(d)?;
    let targets = leaf_targets(raw);
    // Unbordered fractions: share of the full extent.
    let (mut band, _) = Band::from_tree(raw, &targets, 0.0);
    let inner = raw.rect().inset(d);
    if !(inner.w > 0.0 && inner.h > 0.0) {
        return Err(BorderError::BorderTooWide { d, node: 0 });
    }
    let mut node_index = 0;
    top_down_node(&mut band, inner, d, &mut node_index)?;
    let tree = band.layout(inner, d);
    check_extents(&tree, d)?;
    Ok(tree)
}

fn top_down_node(band: &mut Band, rect: Rect, d: f64, node_index: &mut usize) -> Result<(), BorderError> {
    let this = *node_index;
    *node_index += 1;
    let Band::Split {
        orientation,
        fraction,
        target_left,
        target_right,
        left,
        right,
    } = band
    else {
        return Ok(());
    };
    let axis = orientation.split_axis();
    let extent = rect.extent(axis);
    let content = extent - 2.0 * d;
    if content <= 0.0 {
        return Err(BorderError::BorderTooWide { d, node: this });
    }
    // Children before the band opens, each laid out with its own bands.
    let w_left = *fraction * extent;
    let w_right = extent - w_left;
    let side = |child: &Band, width: f64| {
        let r = match axis {
            Axis::X => Rect::new(0.0, 0.0, width, rect.h),
            Axis::Y => Rect::new(0.0, 0.0, rect.w, width),
        };
        let sub = child.layout(r, d);
        let segments = band_segments(&sub, d);
        let stretched: f64 = segments.iter().filter(|s| s.along == axis).map(BandSegment::len).sum();
        let fixed: f64 = segments.iter().filter(|s| s.along != axis).map(BandSegment::len).sum();
        let junctions = count_junctions(&segments, segment_eps(&sub));
        // encoding(c) = c * (area - 2d * stretched) - (2d * fixed - 2d² * junctions)
        (
            r.area() - 2.0 * d * stretched,
            2.0 * d * fixed - 2.0 * d * d * junctions as f64,
        )
    };
    let adj = solve_split(
        w_left,
        w_right,
        content,
        side(left, w_left),
        side(right, w_right),
        *target_left,
        *target_right,
    );
    if !(adj.c_left > 0.0 && adj.c_right > 0.0) {
        return Err(BorderError::BorderTooWide { d, node: this });
    }
    *fraction = adj.c_left * w_left / content;
    if !(*fraction > 0.0 && *fraction < 1.0) {
        return Err(BorderError::BorderTooWide { d, node: this });
    }
    let (a, b, _) = split_with_band(rect, *orientation, *fraction, d);
    top_down_node(left, a, d, node_index)?;
    top_down_node(right, b, d, node_index)
}

/// One leaf-to-root sweep; returns the largest relative change of a fraction.
fn bottom_up_sweep(band: &mut Band, rect: Rect, d: f64, node_index: &mut usize) -> Result<f64, BorderError> {
    let this = *node_index;
    *node_index += 1;
    let Band::Split {
        orientation,
        fraction,
        target_left,
        target_right,
        left,
        right,
    } = band
    else {
        return Ok(0.0);
    };
    let axis = orientation.split_axis();
    let content = rect.extent(axis) - 2.0 * d;
    let (a, b, _) = split_with_band(rect, *orientation, *fraction, d);
    let mut change = bottom_up_sweep(left, a, d, node_index)?;
    change = change.max(bottom_up_sweep(right, b, d, node_index)?);

    let cross = rect.extent(axis.other());
    let (pl, ql) = left.area_coefficients(axis, cross, d);
    let (pr, qr) = right.area_coefficients(axis, cross, d);
    let w_left = *fraction * content;
    let w_right = content - w_left;
    // Encoding area of a side scaled by c: c * (p * w) - (-q).
    let adj = solve_split(
        w_left,
        w_right,
        content,
        (pl * w_left, -ql),
        (pr * w_right, -qr),
        *target_left,
        *target_right,
    );
    let next = adj.c_left * w_left / content;
    if !(adj.c_left > 0.0 && adj.c_right > 0.0 && next > 0.0 && next < 1.0) {
        return Err(BorderError::BorderTooWide { d, node: this });
    }
    change = change.max(((next - *fraction) / *fraction).abs());
    *fraction = next;
    Ok(change)
}

/// Largest relative deviation of leaf-area shares from target shares.
pub fn proportion_residual(tree: &PartitionTree, targets: &HashMap<usize, f64>) -> f64 {
    let leaves = tree.leaves();
    let total_area: f64 = leaves.iter().map(|(_, r)| r.area()).sum();
    let total_target: f64 = leaves.iter().map(|(i, _)| targets[i]).sum();
    leaves
        .iter()
        .map(|(i, r)| {
            let want = targets[i] / total_target;
            ((r.area() / total_area - want) / want).abs()
        })
        .fold(0.0, f64::max)
}

/// Upper bound on bottom-up sweeps.
pub const MAX_SWEEPS: usize = 1000;
const SWEEP_TOLERANCE: f64 = 1e-14;

/// Fine leaf-to-root stage on a bordered tree. `raw` supplies the target
/// proportions (its leaf areas).
pub fn bottom_up_adjust(adjusted: &PartitionTree, raw: &PartitionTree, d: f64) -> Result<PartitionTree, BorderError> {
    validate_width(d)?;
    let targets = leaf_targets(raw);
    let (mut band, _) = Band::from_tree(adjusted, &targets, 2.0 * d);
    let rect = adjusted.rect();
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let change = bottom_up_sweep(&mut band, rect, d, &mut 0)?;
        let tree = band.layout(rect, d);
        residual = proportion_residual(&tree, &targets);
        if change <= SWEEP_TOLERANCE || residual <= SWEEP_TOLERANCE {
            check_extents(&tree, d)?;
            return Ok(tree);
        }
    }
    Err(BorderError::NotConverged(residual))
}

/// Runs a single bottom-up sweep, without iterating to the fixed point.
pub fn bottom_up_single_sweep(adjusted: &PartitionTree, raw: &PartitionTree, d: f64) -> Result<PartitionTree, BorderError> {
    validate_width(d)?;
    let targets = leaf_targets(raw);
    let (mut band, _) = Band::from_tree(adjusted, &targets, 2.0 * d);
    let rect = adjusted.rect();
    bottom_up_sweep(&mut band, rect, d, &mut 0)?;
    Ok(band.layout(rect, d))
}

/// Feasibility check plus both adjustment stages.
pub fn fixed_width_border(raw: &PartitionTree, d: f64) -> Result<PartitionTree, BorderError> {
    check_feasible(raw, d)?;
    let coarse = top_down_adjust(raw, d)?;
    bottom_up_adjust(&coarse, raw, d)
}

/// Shrinks every leaf about its center to `(1 - p)` of its area.
pub fn proportional_border(tree: &PartitionTree, p: f64) -> Result<PartitionTree, BorderError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BorderError::InvalidProportion(p));
    }
    let s = (1.0 - p).sqrt();
    fn go(node: &PartitionTree, s: f64) -> PartitionTree {
        match node {
            PartitionTree::Leaf { item, rect } => {
                let (w, h) = (rect.w * s, rect.h * s);
                let c = rect.center();
                PartitionTree::Leaf {
                    item: *item,
                    rect: Rect::new(c.x - w / 2.0, c.y - h / 2.0, w, h),
                }
            }
            PartitionTree::Internal {
                rect,
                orientation,
                split,
                left,
                right,
            } => PartitionTree::Internal {
                rect: *rect,
                orientation: *orientation,
                split: *split,
                left: Box::new(go(left, s)),
                right: Box::new(go(right, s)),
            },
        }
    }
    Ok(go(tree, s))
}

/// Bridge band joining the borders of two adjacent, connected rectangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    /// Vertex on the low-coordinate side of the band.
    pub low: usize,
    /// Vertex on the high-coordinate side of the band.
    pub high: usize,
    /// Axis crossing the band (x for a vertical band).
    pub across: Axis,
    pub rect: Rect,
}

/// Bands between connected leaves whose borders share a segment of positive length.
pub fn bridges(rects: &[Rect], graph_edges: &BTreeSet<Edge>, d: f64, eps: f64) -> Vec<Bridge> {
    let mut out = Vec::new();
    for &(u, v) in graph_edges {
        for axis in [Axis::X, Axis::Y] {
            let (a, b) = (rects[u], rects[v]);
            let (low, high, lo, hi) = if a.start(axis) <= b.start(axis) {
                (u, v, a, b)
            } else {
                (v, u, b, a)
            };
            let gap = hi.start(axis) - lo.end(axis);
            if (gap - 2.0 * d).abs() > eps {
                continue;
            }
            let other = axis.other();
            let from = lo.start(other).max(hi.start(other));
            let to = lo.end(other).min(hi.end(other));
            if to - from <= eps {
                continue;
            }
            let rect = match axis {
                Axis::X => Rect::new(lo.right(), from, gap, to - from),
                Axis::Y => Rect::new(from, lo.bottom(), to - from, gap),
            };
            out.push(Bridge {
                low,
                high,
                across: axis,
                rect,
            });
        }
    }
    out
}
