use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle, origin at the top-left, `y` growing downward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Larger side over smaller side; always at least one.
    pub fn aspect_ratio(&self) -> f64 {
        aspect_ratio(self.w, self.h)
    }

    /// Extent along `axis`.
    pub fn extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.w,
            Axis::Y => self.h,
        }
    }

    pub fn start(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    pub fn end(&self, axis: Axis) -> f64 {
        self.start(axis) + self.extent(axis)
    }

    /// Rectangle shrunk by `margin` on all four sides.
    pub fn inset(&self, margin: f64) -> Rect {
        Rect::new(
            self.x + margin,
            self.y + margin,
            self.w - 2.0 * margin,
            self.h - 2.0 * margin,
        )
    }

    /// Closed-set intersection test with tolerance `eps`.
    pub fn touches(&self, other: &Rect, eps: f64) -> bool {
        self.x <= other.right() + eps
            && other.x <= self.right() + eps
            && self.y <= other.bottom() + eps
            && other.y <= self.bottom() + eps
    }

    /// Whether `p` lies in the open interior, shrunk by `eps`.
    pub fn contains_strictly(&self, p: Point, eps: f64) -> bool {
        p.x > self.x + eps && p.x < self.right() - eps && p.y > self.y + eps && p.y < self.bottom() - eps
    }

    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

pub fn aspect_ratio(w: f64, h: f64) -> f64 {
    (w / h).max(h / w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aspect_ratio_is_symmetric() {
        assert_eq!(Rect::new(0.0, 0.0, 3.0, 2.0).aspect_ratio(), 1.5);
        assert_eq!(Rect::new(0.0, 0.0, 2.0, 3.0).aspect_ratio(), 1.5);
        assert_eq!(Rect::new(5.0, 5.0, 1.0, 1.0).aspect_ratio(), 1.0);
    }

    #[test]
    fn touching() {
        let a = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(a.touches(&Rect::new(1.0, 0.0, 1.0, 1.0), 1e-9));
        assert!(a.touches(&Rect::new(1.0, 1.0, 1.0, 1.0), 1e-9));
        assert!(!a.touches(&Rect::new(1.1, 0.0, 1.0, 1.0), 1e-9));
        assert!(a.contains_strictly(Point::new(0.5, 0.5), 0.0));
        assert!(!a.contains_strictly(Point::new(1.0, 0.5), 0.0));
    }
}
