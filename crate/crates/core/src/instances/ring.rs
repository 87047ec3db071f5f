//! Empty floor plans built from a rectangular outline with a ring of rooms
//! around a rectangular corridor.
//!
//! Sides are walked counter-clockwise: bottom (left to right), right (bottom
//! to top), top (right to left), left (top to bottom). Corners are listed as
//! bottom-left, bottom-right, top-right, top-left. Edges and room corners are
//! numbered in walking order.

use crate::model::{Corner, Edge, EdgeGeometry, FloorPlanTemplate, Geometry, ModelError, Rect, Side};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Room,
    Stairs,
    Blocked,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    Edge(f64),
    Stairs(f64),
    Blocked(f64),
}

impl Segment {
    fn length(self) -> f64 {
        match self {
            Segment::Edge(l) | Segment::Stairs(l) | Segment::Blocked(l) => l,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RingSpec {
    pub id: String,
    pub width: f64,
    pub height: f64,
    /// Corridor-to-outline depth of every room strip.
    pub depth: f64,
    pub corridor: f64,
    pub corners: [Cell; 4],
    pub sides: [Vec<Segment>; 4],
}

const SIDES: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

/// Interval of corridor-centerline arc length covered by an object.
#[derive(Clone, Copy, Debug)]
struct Span(f64, f64);

impl RingSpec {
    fn interior(&self, side: usize) -> f64 {
        if side % 2 == 0 {
            self.width - 2.0 * self.depth
        } else {
            self.height - 2.0 * self.depth
        }
    }

    fn segment_rect(&self, side: usize, offset: f64, len: f64) -> Rect {
        let (w, h, d) = (self.width, self.height, self.depth);
        match side {
            0 => Rect::new(d + offset, 0.0, len, d),
            1 => Rect::new(w - d, d + offset, d, len),
            2 => Rect::new(w - d - offset - len, h - d, len, d),
            _ => Rect::new(0.0, h - d - offset - len, d, len),
        }
    }

    fn corner_rect(&self, k: usize) -> Rect {
        let (w, h, d) = (self.width, self.height, self.depth);
        match k {
            0 => Rect::new(0.0, 0.0, d, d),
            1 => Rect::new(w - d, 0.0, d, d),
            2 => Rect::new(w - d, h - d, d, d),
            _ => Rect::new(0.0, h - d, d, d),
        }
    }

    fn loop_dims(&self) -> (f64, f64, f64) {
        let a = self.depth + self.corridor / 2.0;
        (a, self.width - 2.0 * a, self.height - 2.0 * a)
    }

    fn perimeter(&self) -> f64 {
        let (_, lb, lr) = self.loop_dims();
        2.0 * (lb + lr)
    }

    fn segment_span(&self, side: usize, offset: f64, len: f64) -> Span {
        let (a, lb, lr) = self.loop_dims();
        let clip_x = |x: f64| x.clamp(a, self.width - a);
        let clip_y = |y: f64| y.clamp(a, self.height - a);
        let d = self.depth;
        match side {
            0 => Span(clip_x(d + offset) - a, clip_x(d + offset + len) - a),
            1 => Span(lb + clip_y(d + offset) - a, lb + clip_y(d + offset + len) - a),
            2 => {
                let x1 = self.width - d - offset;
                let x0 = x1 - len;
                Span(lb + lr + (self.width - a - clip_x(x1)), lb + lr + (self.width - a - clip_x(x0)))
            }
            _ => {
                let y1 = self.height - d - offset;
                let y0 = y1 - len;
                Span(2.0 * lb + lr + (self.height - a - clip_y(y1)), 2.0 * lb + lr + (self.height - a - clip_y(y0)))
            }
        }
    }

    fn corner_span(&self, k: usize) -> Span {
        let (_, lb, lr) = self.loop_dims();
        let t = [0.0, lb, lb + lr, 2.0 * lb + lr][k];
        Span(t, t)
    }

    fn span_distance(&self, p: Span, q: Span) -> f64 {
        if p.0 <= q.1 && q.0 <= p.1 {
            return 0.0;
        }
        let per = self.perimeter();
        let cd = |x: f64, y: f64| {
            let d = (x - y).abs();
            d.min(per - d)
        };
        [cd(p.0, q.0), cd(p.0, q.1), cd(p.1, q.0), cd(p.1, q.1)].into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Builds the template; distances are corridor path lengths between the
    /// closest points of two objects, rounded to whole meters.
    pub fn build(&self) -> Result<FloorPlanTemplate, ModelError> {
        let bad = |msg: String| ModelError::Template { id: self.id.clone(), msg };
        if !(self.depth > 0.0
            && self.corridor > 0.0
            && self.width > 2.0 * self.depth + self.corridor
            && self.height > 2.0 * self.depth + self.corridor)
        {
            return Err(bad("outline too small for depth and corridor".into()));
        }
        let mut edges = Vec::new();
        let mut edge_geo = Vec::new();
        let mut spans = Vec::new();
        let mut stairs_rects = Vec::new();
        let mut stairs_span = None;
        let mut blocked = Vec::new();
        // First and last segment of each side, as edge indices if they are edges.
        let mut side_ends: [(Option<usize>, Option<usize>); 4] = [(None, None); 4];

        for (k, segs) in self.sides.iter().enumerate() {
            let total: f64 = segs.iter().map(|s| s.length()).sum();
            if (total - self.interior(k)).abs() > 1e-9 {
                return Err(bad(format!("side {k} segments span {total} m, expected {}", self.interior(k))));
            }
            let mut offset = 0.0;
            for (i, seg) in segs.iter().enumerate() {
                let len = seg.length();
                if len <= 0.0 {
                    return Err(bad(format!("side {k} has a non-positive segment")));
                }
                let rect = self.segment_rect(k, offset, len);
                match seg {
                    Segment::Edge(_) => {
                        let e = edges.len();
                        edges.push(Edge {
                            id: format!("e{}", e + 1),
                            capacity: self.depth * len,
                            depth: self.depth,
                            length: len,
                        });
                        edge_geo.push(EdgeGeometry { rect, side: SIDES[k] });
                        spans.push(self.segment_span(k, offset, len));
                        if i == 0 {
                            side_ends[k].0 = Some(e);
                        }
                        if i + 1 == segs.len() {
                            side_ends[k].1 = Some(e);
                        }
                    }
                    Segment::Stairs(_) => {
                        stairs_rects.push(rect);
                        stairs_span.get_or_insert(self.segment_span(k, offset, len));
                    }
                    Segment::Blocked(_) => blocked.push(rect),
                }
                offset += len;
            }
        }

        let mut corners = Vec::new();
        let mut corner_geo = Vec::new();
        for (k, cell) in self.corners.iter().enumerate() {
            let rect = self.corner_rect(k);
            match cell {
                Cell::Room => {
                    let before = side_ends[(k + 3) % 4].1;
                    let after = side_ends[k].0;
                    let (Some(a), Some(b)) = (before, after) else {
                        return Err(bad(format!("room corner {k} needs edges on both sides")));
                    };
                    corners.push(Corner {
                        id: format!("v{}", corners.len() + 1),
                        capacity: self.depth * self.depth,
                        edges: [a, b],
                        depth_along: [self.depth, self.depth],
                    });
                    corner_geo.push(rect);
                    spans.push(self.corner_span(k));
                }
                Cell::Stairs => {
                    stairs_rects.push(rect);
                    stairs_span.get_or_insert(self.corner_span(k));
                }
                Cell::Blocked => blocked.push(rect),
            }
        }
        let stairs_span = stairs_span.ok_or_else(|| bad("no stairs".into()))?;

        let n = spans.len();
        let mut distances = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.span_distance(spans[i], spans[j]).round();
                distances[i][j] = d;
                distances[j][i] = d;
            }
        }
        let stairs = spans.iter().map(|&s| self.span_distance(s, stairs_span).round()).collect();
        let d = self.depth;
        let geometry = Geometry {
            width: self.width,
            height: self.height,
            inner: Rect::new(d, d, self.width - 2.0 * d, self.height - 2.0 * d),
            corridor_width: self.corridor,
            edges: edge_geo,
            corners: corner_geo,
            stairs: stairs_rects,
            blocked,
        };
        let t = FloorPlanTemplate {
            id: self.id.clone(),
            edges,
            corners,
            distances,
            stairs,
            derived_distances: true,
            geometry: Some(geometry),
        };
        t.validate()?;
        Ok(t)
    }
}
