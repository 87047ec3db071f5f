use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{FloorPlanTemplate, ModelError};

/// Floor-to-floor distance `Δ(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum FloorDistance {
    /// `|j - i| * step`
    Linear { step: f64 },
    /// `|j - i|^2 * step`
    Quadratic { step: f64 },
    /// Explicit symmetric table with zero diagonal.
    Table { table: Vec<Vec<f64>> },
}

impl Default for FloorDistance {
    fn default() -> Self {
        FloorDistance::Linear { step: 20.0 }
    }
}

impl FloorDistance {
    pub fn between(&self, i: usize, j: usize) -> f64 {
        let k = i.abs_diff(j) as f64;
        match self {
            FloorDistance::Linear { step } => k * step,
            FloorDistance::Quadratic { step } => k * k * step,
            FloorDistance::Table { table } => table[i][j],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Building {
    /// Distinct floor plans; floors refer to them by index.
    pub templates: Vec<FloorPlanTemplate>,
    /// Template index of each floor, bottom to top.
    pub floors: Vec<usize>,
    pub floor_distance: FloorDistance,
}

impl Building {
    pub fn uniform(template: FloorPlanTemplate, floors: usize, floor_distance: FloorDistance) -> Self {
        Self { templates: vec![template], floors: vec![0; floors], floor_distance }
    }

    pub fn num_floors(&self) -> usize {
        self.floors.len()
    }

    pub fn floor(&self, f: usize) -> &FloorPlanTemplate {
        &self.templates[self.floors[f]]
    }

    /// `κ_f`
    pub fn floor_capacity(&self, f: usize) -> f64 {
        self.floor(f).capacity()
    }

    pub fn total_capacity(&self) -> f64 {
        (0..self.num_floors()).map(|f| self.floor_capacity(f)).sum()
    }

    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.floor_distance.between(i, j)
    }

    /// Building restricted to floor `f`.
    pub fn single_floor(&self, f: usize) -> Building {
        Building::uniform(self.floor(f).clone(), 1, self.floor_distance.clone())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.floors.is_empty() {
            return Err(ModelError::Invalid("building has no floors".into()));
        }
        for t in &self.templates {
            t.validate()?;
        }
        if let Some(&t) = self.floors.iter().find(|&&t| t >= self.templates.len()) {
            return Err(ModelError::Invalid(format!("floor refers to unknown template #{t}")));
        }
        let n = self.num_floors();
        match &self.floor_distance {
            FloorDistance::Linear { step } | FloorDistance::Quadratic { step } => {
                if !step.is_finite() || *step < 0.0 {
                    return Err(ModelError::Invalid("floor distance step must be finite and non-negative".into()));
                }
            }
            FloorDistance::Table { table } => {
                if table.len() != n || table.iter().any(|r| r.len() != n) {
                    return Err(ModelError::Invalid(format!("floor distance table must be {n}x{n}")));
                }
                for i in 0..n {
                    for j in 0..n {
                        let d = table[i][j];
                        if !d.is_finite() || d < 0.0 || d != table[j][i] || (i == j && d != 0.0) {
                            return Err(ModelError::Invalid(
                                "floor distance table must be symmetric with zero diagonal".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Minimum corridor frontage of a corner room's excess strip, meters.
    pub min_front: f64,
    /// Forbid edge rooms whose footprint is more elongated than this.
    pub max_aspect: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self { min_front: 1.0, max_aspect: None }
    }
}

/// `ρ(g, s)` as a record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoomDemand {
    pub group: usize,
    pub size: f64,
    pub count: u32,
}

/// Room demands plus the building to place them in.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub building: Building,
    pub groups: Vec<String>,
    /// Distinct room sizes in m².
    pub sizes: Vec<f64>,
    /// `demand[g][s]` rooms of size `sizes[s]` for group `g`.
    pub demand: Vec<Vec<u32>>,
    pub params: Params,
}

impl Instance {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_sizes(&self) -> usize {
        self.sizes.len()
    }

    pub fn demands(&self) -> impl Iterator<Item = RoomDemand> + '_ {
        self.demand.iter().enumerate().flat_map(move |(g, row)| {
            row.iter().zip(&self.sizes).map(move |(&count, &size)| RoomDemand { group: g, size, count })
        })
    }

    pub fn group_rooms(&self, g: usize) -> u32 {
        self.demand[g].iter().sum()
    }

    pub fn group_area(&self, g: usize) -> f64 {
        self.demand[g].iter().zip(&self.sizes).map(|(&c, &s)| c as f64 * s).sum()
    }

    pub fn total_rooms(&self) -> u32 {
        (0..self.num_groups()).map(|g| self.group_rooms(g)).sum()
    }

    /// `A`
    pub fn total_area(&self) -> f64 {
        (0..self.num_groups()).map(|g| self.group_area(g)).sum()
    }

    pub fn max_size_in_use(&self) -> Option<f64> {
        (0..self.num_sizes())
            .filter(|&s| self.demand.iter().any(|row| row[s] > 0))
            .map(|s| self.sizes[s])
            .reduce(f64::max)
    }

    /// Same instance with every room size multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for s in &mut out.sizes {
            *s *= factor;
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.building.validate()?;
        if self.demand.len() != self.groups.len() {
            return Err(ModelError::Invalid("one demand row per group is required".into()));
        }
        if self.demand.iter().any(|r| r.len() != self.sizes.len()) {
            return Err(ModelError::Invalid("every demand row needs one count per size".into()));
        }
        for (i, s) in self.sizes.iter().enumerate() {
            if !(s.is_finite() && *s > 0.0) {
                return Err(ModelError::Invalid(format!("room size {s} must be positive")));
            }
            if self.sizes[..i].contains(s) {
                return Err(ModelError::Invalid(format!("room size {s} listed twice")));
            }
        }
        let mut seen = HashSet::with_capacity(self.groups.len());
        if let Some(g) = self.groups.iter().find(|g| !seen.insert(g.as_str())) {
            return Err(ModelError::Invalid(format!("group {g} listed twice")));
        }
        if !(self.params.min_front.is_finite() && self.params.min_front >= 0.0) {
            return Err(ModelError::Invalid("min_front must be finite and non-negative".into()));
        }
        if let Some(a) = self.params.max_aspect {
            if a.is_nan() || a < 1.0 {
                return Err(ModelError::Invalid("max_aspect must be at least 1".into()));
            }
        }
        Ok(())
    }
}
