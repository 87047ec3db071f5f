use serde::{Deserialize, Serialize};

use super::ModelError;

const CAPACITY_TOL: f64 = 1e-6;

/// A strip between corridor and outline. `capacity = depth * length`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub capacity: f64,
    pub depth: f64,
    pub length: f64,
}

/// The rectangle spanned by an outline corner and the matching corridor corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub id: String,
    pub capacity: f64,
    /// The two incident edges, as indices into the template's edge list.
    pub edges: [usize; 2],
    /// Strip depth a corner room keeps when it extends into `edges[i]`.
    pub depth_along: [f64; 2],
}

impl Corner {
    /// Position of `edge` in [`Corner::edges`].
    pub fn side_of(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }
}

/// An object of a single floor: edges come first, then corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectRef {
    Edge(usize),
    Corner(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Overlap area with `other`; touching rectangles give 0.
    pub fn overlap(&self, other: &Rect) -> f64 {
        let dx = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let dy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if dx > 0.0 && dy > 0.0 {
            dx * dy
        } else {
            0.0
        }
    }
}

/// Drawing data for a template. Coordinates are meters, y grows upwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub width: f64,
    pub height: f64,
    /// Region enclosed by the room ring (corridor plus any inner core).
    pub inner: Rect,
    pub corridor_width: f64,
    pub edges: Vec<EdgeGeometry>,
    pub corners: Vec<Rect>,
    pub stairs: Vec<Rect>,
    pub blocked: Vec<Rect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeGeometry {
    pub rect: Rect,
    /// Outline side the strip lies along.
    pub side: Side,
}

/// An empty floor plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorPlanTemplate {
    pub id: String,
    pub edges: Vec<Edge>,
    pub corners: Vec<Corner>,
    /// Symmetric distances over [`FloorPlanTemplate::objects`].
    pub distances: Vec<Vec<f64>>,
    /// Distance from the stairs to every object.
    pub stairs: Vec<f64>,
    /// True when distances were computed from geometry rather than given.
    pub derived_distances: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
}

impl FloorPlanTemplate {
    pub fn num_objects(&self) -> usize {
        self.edges.len() + self.corners.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectRef> + '_ {
        (0..self.edges.len()).map(ObjectRef::Edge).chain((0..self.corners.len()).map(ObjectRef::Corner))
    }

    pub fn object_index(&self, o: ObjectRef) -> usize {
        match o {
            ObjectRef::Edge(e) => e,
            ObjectRef::Corner(v) => self.edges.len() + v,
        }
    }

    pub fn object_at(&self, i: usize) -> ObjectRef {
        if i < self.edges.len() {
            ObjectRef::Edge(i)
        } else {
            ObjectRef::Corner(i - self.edges.len())
        }
    }

    pub fn object_id(&self, o: ObjectRef) -> &str {
        match o {
            ObjectRef::Edge(e) => &self.edges[e].id,
            ObjectRef::Corner(v) => &self.corners[v].id,
        }
    }

    pub fn capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.capacity).sum::<f64>() + self.corners.iter().map(|c| c.capacity).sum::<f64>()
    }

    /// Corners incident to `edge`, with the side index of `edge` in each corner.
    pub fn corners_of_edge(&self, edge: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.corners.iter().enumerate().filter_map(move |(v, c)| c.side_of(edge).map(|k| (v, k)))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Template { id: self.id.clone(), msg });
        let n = self.num_objects();
        for e in &self.edges {
            if !(e.capacity > 0.0 && e.depth > 0.0 && e.length > 0.0) {
                return bad(format!("edge {} needs positive capacity, depth and length", e.id));
            }
            if (e.capacity - e.depth * e.length).abs() > CAPACITY_TOL * e.capacity.max(1.0) {
                return bad(format!("edge {} capacity {} differs from depth x length", e.id, e.capacity));
            }
        }
        let mut incidence = vec![0usize; self.edges.len()];
        for c in &self.corners {
            if c.capacity.is_nan() || c.capacity <= 0.0 || c.depth_along.iter().any(|d| d.is_nan() || *d <= 0.0) {
                return bad(format!("corner {} needs positive capacity and depths", c.id));
            }
            if c.edges[0] == c.edges[1] || c.edges.iter().any(|&e| e >= self.edges.len()) {
                return bad(format!("corner {} must touch two distinct edges", c.id));
            }
            for &e in &c.edges {
                incidence[e] += 1;
            }
        }
        if let Some(e) = incidence.iter().position(|&k| k > 2) {
            return bad(format!("edge {} touches more than two corners", self.edges[e].id));
        }
        if self.stairs.len() != n {
            return Err(ModelError::MissingStairs(self.id.clone()));
        }
        if self.distances.len() != n || self.distances.iter().any(|r| r.len() != n) {
            return bad(format!("distance matrix must be {n}x{n}"));
        }
        for i in 0..n {
            if self.distances[i][i] != 0.0 {
                return bad("distance matrix needs a zero diagonal".into());
            }
            for j in 0..n {
                let d = self.distances[i][j];
                if !d.is_finite() || d < 0.0 || d != self.distances[j][i] {
                    return bad("distance matrix must be symmetric, finite and non-negative".into());
                }
            }
        }
        if self.stairs.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return bad("stairs distances must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Whether a room of `size` may occupy `corner` and extend into `edge`.
///
/// The excess over the corner must be strictly positive and leave a strip of
/// at least `min_front` meters along the corridor. False when `edge` is not
/// incident to `corner`.
pub fn corner_fit(size: f64, corner: &Corner, edge: usize, min_front: f64) -> bool {
    let Some(side) = corner.side_of(edge) else {
        return false;
    };
    let excess = size - corner.capacity;
    excess > 0.0 && excess / corner.depth_along[side] >= min_front - 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{corner_template, row_template};

    #[test]
    fn corner_fit_needs_a_strip_of_min_front() {
        let t = corner_template(10.0);
        let v = &t.corners[0];
        assert!(corner_fit(12.0, v, 0, 1.0));
        assert!(corner_fit(12.0, v, 1, 1.0));
        assert!(!corner_fit(11.0, v, 0, 1.0));
        assert!(corner_fit(11.0, v, 0, 0.5));
        assert!(!corner_fit(9.0, v, 0, 0.0));
        assert!(!corner_fit(12.0, v, 7, 0.0));
    }

    #[test]
    fn capacity_and_object_numbering() {
        let t = corner_template(4.0);
        assert_eq!(t.capacity(), 12.0 + 12.0 + 9.0);
        assert_eq!(t.num_objects(), 3);
        assert_eq!(t.object_at(2), ObjectRef::Corner(0));
        assert_eq!(t.object_index(ObjectRef::Corner(0)), 2);
        assert_eq!(t.object_id(ObjectRef::Edge(1)), "e2");
        assert_eq!(t.corners_of_edge(1).collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn validate_rejects_inconsistent_templates() {
        let mut t = row_template(2, 3.0, 4.0);
        t.edges[0].capacity = 11.0;
        assert!(t.validate().is_err());

        let mut t = row_template(2, 3.0, 4.0);
        t.distances[0][1] = 2.0;
        assert!(t.validate().is_err());

        let mut t = row_template(2, 3.0, 4.0);
        t.distances[1][1] = 1.0;
        t.distances[0][0] = 1.0;
        assert!(t.validate().is_err());

        let mut t = corner_template(4.0);
        t.corners[0].edges = [0, 0];
        assert!(t.validate().is_err());

        let mut t = row_template(2, 3.0, 4.0);
        t.stairs.pop();
        assert!(t.validate().is_err());
    }

    #[test]
    fn rect_overlap_ignores_touching() {
        let a = Rect::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(a.overlap(&Rect::new(2.0, 0.0, 1.0, 1.0)), 0.0);
        assert_eq!(a.overlap(&Rect::new(1.0, 1.0, 2.0, 2.0)), 1.0);
        assert_eq!(a.area(), 4.0);
    }
}
