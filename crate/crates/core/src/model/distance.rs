use super::{Building, ModelError, ObjectRef};

/// A building-wide object. Objects are numbered floor by floor, edges first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalObject {
    pub floor: usize,
    pub object: ObjectRef,
}

/// `δ(o, o')` over every object of every floor.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    offsets: Vec<usize>,
    edge_counts: Vec<usize>,
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.d[a * self.n + b]
    }

    pub fn index(&self, floor: usize, object: ObjectRef) -> usize {
        self.offsets[floor]
            + match object {
                ObjectRef::Edge(e) => e,
                ObjectRef::Corner(v) => self.edge_counts[floor] + v,
            }
    }

    pub fn edge(&self, floor: usize, e: usize) -> usize {
        self.index(floor, ObjectRef::Edge(e))
    }

    pub fn corner(&self, floor: usize, v: usize) -> usize {
        self.index(floor, ObjectRef::Corner(v))
    }

    pub fn locate(&self, i: usize) -> GlobalObject {
        let floor = self.offsets.partition_point(|&o| o <= i) - 1;
        let local = i - self.offsets[floor];
        let object = if local < self.edge_counts[floor] {
            ObjectRef::Edge(local)
        } else {
            ObjectRef::Corner(local - self.edge_counts[floor])
        };
        GlobalObject { floor, object }
    }

    /// Objects on floor `f` as a global index range.
    pub fn floor_range(&self, f: usize) -> std::ops::Range<usize> {
        let end = self.offsets.get(f + 1).copied().unwrap_or(self.n);
        self.offsets[f]..end
    }
}

/// Same-floor pairs use the template matrix; pairs on floors `i != j` go via
/// the stairs: `d(o, stairs_i) + Δ(i, j) + d(stairs_j, o')`.
pub fn build_object_distances(building: &Building) -> Result<DistanceMatrix, ModelError> {
    let mut offsets = Vec::with_capacity(building.num_floors());
    let mut edge_counts = Vec::with_capacity(building.num_floors());
    let mut n = 0;
    for f in 0..building.num_floors() {
        let t = building.floor(f);
        if t.stairs.len() != t.num_objects() {
            return Err(ModelError::MissingStairs(t.id.clone()));
        }
        offsets.push(n);
        edge_counts.push(t.edges.len());
        n += t.num_objects();
    }
    let mut d = vec![0.0; n * n];
    for fi in 0..building.num_floors() {
        let ti = building.floor(fi);
        for fj in 0..building.num_floors() {
            let tj = building.floor(fj);
            let delta = building.delta(fi, fj);
            for a in 0..ti.num_objects() {
                for b in 0..tj.num_objects() {
                    let v = if fi == fj { ti.distances[a][b] } else { ti.stairs[a] + delta + tj.stairs[b] };
                    d[(offsets[fi] + a) * n + offsets[fj] + b] = v;
                }
            }
        }
    }
    Ok(DistanceMatrix { offsets, edge_counts, n, d })
}
