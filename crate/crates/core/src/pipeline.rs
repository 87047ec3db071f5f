//! Global and split solving of multi-floor instances, scaling rescue for
//! single floors that admit no valid placement, and cost aggregation.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::fa::{build_fa_model, decode_fa_solution, FaError};
use crate::fp::{build_fp_model, decode_fp_solution, FpError};
use crate::heuristic::{fa_heu, HeuristicError};
use crate::milp::{BranchAndBound, ExternalCommand, MilpBackend, SolveError, SolveLimits, SolveStatus};
use crate::model::{
    build_object_distances, fa_cost, proximity_cost, validate_placement, Building, FloorAssignment, FloorDistance,
    Instance, ModelError, Placement, Violation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Global,
    SplitIlp,
    SplitHeuristic,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Global, Mode::SplitIlp, Mode::SplitHeuristic];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::SplitIlp => "split-ilp",
            Mode::SplitHeuristic => "split-heuristic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected global, split-ilp or split-heuristic)"))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A non-negative rational `num / den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    /// Panics if `den` is zero.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fraction {
    type Err = String;

    /// Accepts `p/q` or a decimal with at most nine fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{s}` is not a fraction");
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Fraction::new(p, q));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 9 || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let digits: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        Ok(Fraction::new(int * den + digits, den))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Per floor-planning solve, seconds.
    pub time_limit: f64,
    /// Floor-assignment solve, seconds.
    pub fa_time_limit: f64,
    /// Scaling grid step; `None` means one square meter of the floor's
    /// capacity, `1 / round(κ_f)`.
    pub scale_step: Option<Fraction>,
    /// Smallest factor tried before giving up.
    pub min_factor: f64,
    /// Overrides the instance's corner frontage when set.
    pub min_front: Option<f64>,
    /// Overrides the instance's floor distance when set.
    pub floor_distance: Option<FloorDistance>,
    /// Solve floors of the split pipeline concurrently.
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Global,
            time_limit: 600.0,
            fa_time_limit: 60.0,
            scale_step: None,
            min_factor: 0.5,
            min_front: None,
            floor_distance: None,
            parallel: true,
        }
    }
}

impl PipelineConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if !(self.time_limit > 0.0 && self.fa_time_limit > 0.0) {
            return bad("time limits must be positive");
        }
        if let Some(step) = self.scale_step {
            if step.num == 0 || step.num >= step.den {
                return bad("scale step must lie strictly between 0 and 1");
            }
        }
        if !(self.min_factor > 0.0 && self.min_factor <= 1.0) {
            return bad("minimum scaling factor must lie in (0, 1]");
        }
        if self.min_front.is_some_and(|m| !(m.is_finite() && m >= 0.0)) {
            return bad("min_front must be finite and non-negative");
        }
        Ok(())
    }

    /// The instance with the configured overrides applied.
    pub fn apply(&self, instance: &Instance) -> Instance {
        let mut out = instance.clone();
        if let Some(m) = self.min_front {
            out.params.min_front = m;
        }
        if let Some(d) = &self.floor_distance {
            out.building.floor_distance = d.clone();
        }
        out
    }

    fn step_for(&self, building: &Building) -> Fraction {
        self.scale_step.unwrap_or_else(|| Fraction::new(1, (building.floor_capacity(0).round() as u64).max(2)))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error("floor assignment failed: {0}")]
    Fa(#[from] FaError),
    #[error("floor assignment heuristic failed: {0}")]
    Heuristic(#[from] HeuristicError),
    #[error("proven infeasible")]
    Infeasible,
    #[error("no solution found within the time limit")]
    NoIncumbent,
    #[error("floor {floor}: {reason}")]
    Floor { floor: usize, reason: String },
    #[error("decoded placement breaks the rules: {0:?}")]
    InvalidPlacement(Vec<Violation>),
}

/// How one floor (or, in global mode, the whole building) was solved.
#[derive(Clone, Debug, PartialEq)]
pub struct FloorReport {
    /// Factor applied to every room size on this floor.
    pub factor: Fraction,
    /// Status of the last solve, the one that produced the placement.
    pub status: SolveStatus,
    /// Solves tried, including the successful one.
    pub attempts: u32,
    pub wall_time: Duration,
    /// Cost of this floor's rooms alone.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaReport {
    /// `ilp` or `heuristic`.
    pub method: String,
    pub status: SolveStatus,
    pub cost: f64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiFloorSolution {
    pub mode: Mode,
    pub backend: String,
    /// Rooms on all floors.
    pub placement: Placement,
    pub floors: Vec<FloorReport>,
    /// Proximity cost over the full building, recomputed from the placement.
    pub cost: f64,
    /// `Optimal` only if the global model was solved to proven optimality.
    pub status: SolveStatus,
    pub fa: Option<FaReport>,
    pub wall_time: Duration,
}

impl MultiFloorSolution {
    pub fn factors(&self) -> Vec<Fraction> {
        self.floors.iter().map(|f| f.factor).collect()
    }

    pub fn floors_scaled(&self) -> usize {
        self.floors.iter().filter(|f| f.factor != Fraction::ONE).count()
    }

    pub fn worst_factor(&self) -> Fraction {
        self.floors
            .iter()
            .map(|f| f.factor)
            .min_by(|a, b| (a.num as u128 * b.den as u128).cmp(&(b.num as u128 * a.den as u128)))
            .unwrap_or(Fraction::ONE)
    }

    /// The instance with each floor's rooms at its scaled sizes, as one
    /// single-floor instance per floor.
    pub fn floor_instance(&self, instance: &Instance, f: usize) -> Instance {
        let assignment =
            self.placement.to_assignment(instance.num_groups(), instance.num_sizes(), instance.building.num_floors());
        floor_subinstance(instance, &assignment, f).scaled(self.floors[f].factor.value())
    }
}

/// Picks the external solver named in the environment, else HiGHS when built
/// with it, else the built-in engine.
pub fn default_backend() -> Box<dyn MilpBackend> {
    if let Some(ext) = ExternalCommand::from_env() {
        return Box::new(ext);
    }
    #[cfg(feature = "highs")]
    {
        Box::new(crate::milp::Highs::default())
    }
    #[cfg(not(feature = "highs"))]
    {
        Box::new(BranchAndBound::default())
    }
}

/// Proximity cost of `placement` over the full building, including pairs of
/// objects on different floors.
pub fn aggregate_cost(placement: &Placement, building: &Building) -> Result<f64, ModelError> {
    Ok(proximity_cost(placement, &build_object_distances(building)?))
}

fn check_valid(instance: &Instance, placement: &Placement) -> Result<(), PipelineError> {
    let report = validate_placement(instance, placement)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(PipelineError::InvalidPlacement(report.violations))
    }
}

/// Outcome of a single FP solve.
enum Attempt {
    Solved(Placement, SolveStatus),
    /// Proven infeasible, or no incumbent at the time limit.
    Failed {
        proven: bool,
    },
}

fn attempt_fp(instance: &Instance, backend: &dyn MilpBackend, limits: &SolveLimits) -> Result<Attempt, PipelineError> {
    let (model, index) = match build_fp_model(instance) {
        Ok(m) => m,
        Err(FpError::InfeasibleByArea { .. }) => return Ok(Attempt::Failed { proven: true }),
        Err(e) => return Err(e.into()),
    };
    let result = backend.solve(&model, limits)?;
    match (result.status, result.has_incumbent()) {
        (SolveStatus::Infeasible, _) => Ok(Attempt::Failed { proven: true }),
        (SolveStatus::Unbounded, _) => Err(PipelineError::Floor { floor: 0, reason: "model unbounded".into() }),
        (_, false) => Ok(Attempt::Failed { proven: false }),
        (status, true) => {
            let placement = decode_fp_solution(&index, &result)?;
            check_valid(instance, &placement)?;
            Ok(Attempt::Solved(placement, status))
        }
    }
}

/// One FP model over all floors with the full object distances.
pub fn solve_global(
    instance: &Instance,
    config: &PipelineConfig,
    backend: &dyn MilpBackend,
) -> Result<MultiFloorSolution, PipelineError> {
    config.validate()?;
    let instance = config.apply(instance);
    instance.validate()?;
    let start = Instant::now();
    let limits = SolveLimits::with_time(config.time_limit);
    let (placement, status) = match attempt_fp(&instance, backend, &limits)? {
        Attempt::Solved(p, s) => (p, s),
        Attempt::Failed { proven: true } => return Err(PipelineError::Infeasible),
        Attempt::Failed { proven: false } => return Err(PipelineError::NoIncumbent),
    };
    let wall_time = start.elapsed();
    finish(
        &instance,
        Mode::Global,
        backend,
        placement,
        vec![Fraction::ONE; instance.building.num_floors()],
        status,
        None,
        |_| (status, 1, wall_time),
        wall_time,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    instance: &Instance,
    mode: Mode,
    backend: &dyn MilpBackend,
    placement: Placement,
    factors: Vec<Fraction>,
    status: SolveStatus,
    fa: Option<FaReport>,
    floor_meta: impl Fn(usize) -> (SolveStatus, u32, Duration),
    wall_time: Duration,
) -> Result<MultiFloorSolution, PipelineError> {
    let b = &instance.building;
    let floors = (0..b.num_floors())
        .map(|f| -> Result<FloorReport, PipelineError> {
            let (status, attempts, wall_time) = floor_meta(f);
            let cost = aggregate_cost(&placement.floor_part(f), &b.single_floor(f))?;
            Ok(FloorReport { factor: factors[f], status, attempts, wall_time, cost })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cost = aggregate_cost(&placement, b)?;
    let status = if status == SolveStatus::Optimal && mode == Mode::Global { status } else { SolveStatus::Feasible };
    Ok(MultiFloorSolution { mode, backend: backend.name().to_string(), placement, floors, cost, status, fa, wall_time })
}

/// The rooms `assignment` puts on floor `f`, as a single-floor instance that
/// keeps the full group and size lists.
pub fn floor_subinstance(instance: &Instance, assignment: &FloorAssignment, f: usize) -> Instance {
    Instance {
        name: format!("{}/floor{}", instance.name, f + 1),
        building: instance.building.single_floor(f),
        groups: instance.groups.clone(),
        sizes: instance.sizes.clone(),
        demand: assignment.floor_demand(f),
        params: instance.params,
    }
}

/// Floor assignment by integer program or heuristic.
pub fn assign_floors(
    instance: &Instance,
    config: &PipelineConfig,
    backend: &dyn MilpBackend,
) -> Result<(FloorAssignment, FaReport), PipelineError> {
    let start = Instant::now();
    let (assignment, method, status) = match config.mode {
        Mode::SplitHeuristic | Mode::Global => (fa_heu(instance)?, "heuristic", SolveStatus::Feasible),
        Mode::SplitIlp => {
            let (model, index) = build_fa_model(instance)?;
            let result = backend.solve(&model, &SolveLimits::with_time(config.fa_time_limit))?;
            match (result.status, result.has_incumbent()) {
                (SolveStatus::Infeasible, _) => return Err(FaError::Infeasible.into()),
                (_, false) => return Err(PipelineError::NoIncumbent),
                (status, true) => (decode_fa_solution(&index, &result)?, "ilp", status),
            }
        }
    };
    if !assignment.conserves(instance) || !assignment.overfilled_floors(instance).is_empty() {
        return Err(PipelineError::Floor { floor: 0, reason: "floor assignment breaks demand or capacity".into() });
    }
    let cost = fa_cost(&assignment, &instance.building);
    Ok((assignment, FaReport { method: method.into(), status, cost, wall_time: start.elapsed() }))
}

/// Result of [`scale_to_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledPlacement {
    pub factor: Fraction,
    pub placement: Placement,
    pub status: SolveStatus,
    pub attempts: u32,
    /// Whether the factor one step above was proven infeasible rather than
    /// merely left without an incumbent at the time limit.
    pub proven: bool,
}

/// Tries factors `1, 1 - step, 1 - 2 step, ...` on every room size of a
/// single-floor instance and returns the first that admits a valid placement.
/// Factors whose scaled area exceeds the floor capacity are skipped without a
/// solve since they are infeasible by area.
pub fn scale_to_feasible(
    floor_instance: &Instance,
    config: &PipelineConfig,
    backend: &dyn MilpBackend,
) -> Result<ScaledPlacement, PipelineError> {
    config.validate()?;
    let step = config.step_for(&floor_instance.building);
    let limits = SolveLimits::with_time(config.time_limit);
    let area = floor_instance.total_area();
    let capacity = floor_instance.building.total_capacity();
    let mut attempts = 0;
    let mut proven = true;
    let mut i = 0u64;
    loop {
        let Some(num) = step.den.checked_sub(i * step.num) else { break };
        let factor = Fraction::new(num, step.den);
        if factor.value() < config.min_factor - 1e-12 || num == 0 {
            break;
        }
        i += 1;
        if area * factor.value() > capacity + 1e-9 * capacity.max(1.0) {
            continue;
        }
        attempts += 1;
        let scaled = floor_instance.scaled(factor.value());
        match attempt_fp(&scaled, backend, &limits)? {
            Attempt::Solved(placement, status) => {
                return Ok(ScaledPlacement { factor, placement, status, attempts, proven });
            }
            Attempt::Failed { proven: p } => proven &= p,
        }
    }
    Err(PipelineError::Floor {
        floor: 0,
        reason: format!("no valid placement with room sizes scaled down to {}", config.min_factor),
    })
}

/// Floor assignment first, then one floor-planning solve per floor.
pub fn solve_split(
    instance: &Instance,
    config: &PipelineConfig,
    backend: &dyn MilpBackend,
) -> Result<MultiFloorSolution, PipelineError> {
    config.validate()?;
    if config.mode == Mode::Global {
        return Err(PipelineError::Config("split solve needs a split mode".into()));
    }
    let instance = config.apply(instance);
    instance.validate()?;
    let start = Instant::now();
    let (assignment, fa) = assign_floors(&instance, config, backend)?;
    let floors = instance.building.num_floors();
    let subs: Vec<Instance> = (0..floors).map(|f| floor_subinstance(&instance, &assignment, f)).collect();

    let solve_floor = |sub: &Instance| -> (Result<ScaledPlacement, PipelineError>, Duration) {
        let t = Instant::now();
        let r = if sub.total_rooms() == 0 {
            Ok(ScaledPlacement {
                factor: Fraction::ONE,
                placement: Placement::default(),
                status: SolveStatus::Optimal,
                attempts: 0,
                proven: true,
            })
        } else {
            scale_to_feasible(sub, config, backend)
        };
        (r, t.elapsed())
    };
    let results: Vec<(Result<ScaledPlacement, PipelineError>, Duration)> = if config.parallel && floors > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = subs.iter().map(|sub| scope.spawn(|| solve_floor(sub))).collect();
            handles.into_iter().map(|h| h.join().expect("floor solve panicked")).collect()
        })
    } else {
        subs.iter().map(solve_floor).collect()
    };

    let mut placement = Placement::default();
    let mut factors = Vec::with_capacity(floors);
    let mut meta = Vec::with_capacity(floors);
    for (f, (r, t)) in results.into_iter().enumerate() {
        let sp = r.map_err(|e| match e {
            PipelineError::Floor { reason, .. } => PipelineError::Floor { floor: f, reason },
            other => PipelineError::Floor { floor: f, reason: other.to_string() },
        })?;
        placement.merge_floor(f, &sp.placement);
        factors.push(sp.factor);
        meta.push((sp.status, sp.attempts, t));
    }
    let wall_time = start.elapsed();
    finish(&instance, config.mode, backend, placement, factors, SolveStatus::Feasible, Some(fa), |f| meta[f], wall_time)
}

/// Dispatches on `config.mode`.
pub fn solve(
    instance: &Instance,
    config: &PipelineConfig,
    backend: &dyn MilpBackend,
) -> Result<MultiFloorSolution, PipelineError> {
    match config.mode {
        Mode::Global => solve_global(instance, config, backend),
        Mode::SplitIlp | Mode::SplitHeuristic => solve_split(instance, config, backend),
    }
}

/// The built-in engine, boxed like [`default_backend`].
pub fn builtin_backend() -> Box<dyn MilpBackend> {
    Box::new(BranchAndBound::default())
}

/// Independent check of a stored solution.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// Floor of each violation; demand violations carry floor 0.
    pub violations: Vec<(usize, Violation)>,
    pub cost: f64,
    pub stored_cost: f64,
    pub factors: Vec<Fraction>,
}

impl EvalReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn cost_matches(&self) -> bool {
        (self.cost - self.stored_cost).abs() <= 1e-9 * self.cost.abs().max(1.0)
    }

    pub fn floors_scaled(&self) -> usize {
        self.factors.iter().filter(|&&f| f != Fraction::ONE).count()
    }
}

/// Re-validates every floor under its scaled sizes, checks that every demand
/// is placed once and recomputes the cost.
pub fn evaluate(instance: &Instance, solution: &MultiFloorSolution) -> Result<EvalReport, ModelError> {
    let b = &instance.building;
    if solution.floors.len() != b.num_floors() {
        return Err(ModelError::Invalid("solution and instance disagree on the number of floors".into()));
    }
    let mut violations = Vec::new();
    let assignment = solution.placement.to_assignment(instance.num_groups(), instance.num_sizes(), b.num_floors());
    for (g, row) in assignment.counts.iter().enumerate() {
        for (s, per_floor) in row.iter().enumerate() {
            let placed: u64 = per_floor.iter().map(|&c| c as u64).sum();
            let required = instance.demand[g][s];
            if placed != required as u64 {
                violations.push((0, Violation::Demand { group: g, size: s, placed, required }));
            }
        }
    }
    for f in 0..b.num_floors() {
        let sub = solution.floor_instance(instance, f);
        let report = validate_placement(&sub, &solution.placement.floor_part(f))?;
        violations.extend(report.violations.into_iter().map(|v| (f, v)));
    }
    Ok(EvalReport {
        violations,
        cost: aggregate_cost(&solution.placement, b)?,
        stored_cost: solution.cost,
        factors: solution.factors(),
    })
}
