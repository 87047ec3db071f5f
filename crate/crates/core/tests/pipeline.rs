mod common;

use common::{one_edge, tight_floor, tiny_multi};
use floorplan::fa::FaError;
use floorplan::fp::{brute_force_fp, FpError};
use floorplan::heuristic::HeuristicError;
use floorplan::instances::{named_instance, NamedInstanceId};
use floorplan::io::{solution_from_json, solution_to_json};
use floorplan::milp::{BranchAndBound, SolveStatus};
use floorplan::model::{validate_placement, FloorDistance};
use floorplan::pipeline::{evaluate, scale_to_feasible, solve, Fraction, Mode, PipelineConfig, PipelineError};

fn config(mode: Mode) -> PipelineConfig {
    PipelineConfig { time_limit: 30.0, fa_time_limit: 30.0, ..PipelineConfig::with_mode(mode) }
}

#[test]
fn two_sixes_on_a_ten_edge_need_scaling() {
    let inst = one_edge(10.0, vec![6.0], vec![vec![2]]);
    let sp = scale_to_feasible(&inst, &config(Mode::SplitIlp), &BranchAndBound::default()).unwrap();
    assert!(sp.factor.value() <= 10.0 / 12.0);
    assert_eq!(sp.factor, Fraction::new(4, 5));
    assert_eq!(sp.placement.num_rooms(), 2);
    assert!(sp.proven);
    // 9/10 is skipped by area, 8/10 is the first solve.
    assert_eq!(sp.attempts, 1);
}

#[test]
fn scaling_gives_up_below_the_minimum_factor() {
    let inst = one_edge(10.0, vec![9.0], vec![vec![2]]);
    let cfg = PipelineConfig { min_factor: 0.8, ..config(Mode::SplitIlp) };
    let err = scale_to_feasible(&inst, &cfg, &BranchAndBound::default()).unwrap_err();
    assert!(matches!(err, PipelineError::Floor { .. }));
}

#[test]
fn rescued_floors_are_valid_under_their_factor() {
    let mut rescued = 0;
    for seed in 0..200 {
        let inst = tight_floor(seed);
        if !matches!(brute_force_fp(&inst), Err(FpError::Infeasible)) {
            continue;
        }
        let sp = scale_to_feasible(&inst, &config(Mode::SplitIlp), &BranchAndBound::default()).unwrap();
        assert!(sp.factor.value() < 1.0);
        let scaled = inst.scaled(sp.factor.value());
        assert!(validate_placement(&scaled, &sp.placement).unwrap().is_valid(), "seed {seed}");
        rescued += 1;
        if rescued == 10 {
            break;
        }
    }
    assert_eq!(rescued, 10);
}

#[test]
fn global_is_never_worse_than_split_at_full_scale() {
    let backend = BranchAndBound::default();
    let mut compared = 0;
    for seed in 0..40 {
        let inst = tiny_multi(seed);
        let Ok(global) = solve(&inst, &config(Mode::Global), &backend) else { continue };
        let Ok(split) = solve(&inst, &config(Mode::SplitIlp), &backend) else { continue };
        assert_eq!(global.status, SolveStatus::Optimal);
        assert!(evaluate(&inst, &global).unwrap().is_valid());
        assert!(evaluate(&inst, &split).unwrap().is_valid());
        if split.floors_scaled() == 0 {
            assert!(global.cost <= split.cost, "seed {seed}: {} > {}", global.cost, split.cost);
            compared += 1;
        }
    }
    assert!(compared >= 20, "{compared}");
}

#[test]
fn split_solution_round_trips_and_evaluates() {
    let inst = tiny_multi(7);
    let sol = solve(&inst, &config(Mode::SplitHeuristic), &BranchAndBound::default()).unwrap();
    assert_eq!(sol.fa.as_ref().unwrap().method, "heuristic");
    let text = solution_to_json(&sol, &inst);
    let back = solution_from_json(&text, &inst).unwrap();
    assert_eq!(back.placement, sol.placement);
    assert_eq!(back.factors(), sol.factors());
    assert_eq!(solution_to_json(&back, &inst), text);
    let report = evaluate(&inst, &back).unwrap();
    assert!(report.is_valid() && report.cost_matches());
}

#[test]
fn evaluate_catches_tampering() {
    let inst = tiny_multi(3);
    let mut sol = solve(&inst, &config(Mode::SplitHeuristic), &BranchAndBound::default()).unwrap();
    sol.cost += 1.0;
    assert!(!evaluate(&inst, &sol).unwrap().cost_matches());
    let slot = *sol.placement.edge_rooms.keys().next().unwrap();
    sol.placement.add_edge_rooms(slot, 1);
    assert!(!evaluate(&inst, &sol).unwrap().is_valid());
}

#[test]
fn overrides_reach_the_solution() {
    let inst = tiny_multi(11);
    let cfg = PipelineConfig {
        floor_distance: Some(FloorDistance::Quadratic { step: 5.0 }),
        min_front: Some(0.5),
        ..config(Mode::SplitHeuristic)
    };
    let applied = cfg.apply(&inst);
    assert_eq!(applied.building.floor_distance, FloorDistance::Quadratic { step: 5.0 });
    assert_eq!(applied.params.min_front, 0.5);
    let sol = solve(&inst, &cfg, &BranchAndBound::default()).unwrap();
    assert!(evaluate(&applied, &sol).unwrap().cost_matches());
}

#[test]
fn sequential_and_parallel_split_agree() {
    let inst = tiny_multi(5);
    let par = solve(&inst, &config(Mode::SplitIlp), &BranchAndBound::default()).unwrap();
    let seq = solve(&inst, &PipelineConfig { parallel: false, ..config(Mode::SplitIlp) }, &BranchAndBound::default())
        .unwrap();
    assert_eq!(par.placement, seq.placement);
    assert_eq!(par.cost, seq.cost);
}

#[test]
fn bad_configuration_is_rejected() {
    let inst = named_instance(NamedInstanceId::SM3M);
    let cfg = PipelineConfig { time_limit: 0.0, ..PipelineConfig::default() };
    assert!(matches!(solve(&inst, &cfg, &BranchAndBound::default()), Err(PipelineError::Config(_))));
    let cfg = PipelineConfig { scale_step: Some(Fraction::ONE), ..PipelineConfig::default() };
    assert!(matches!(solve(&inst, &cfg, &BranchAndBound::default()), Err(PipelineError::Config(_))));
}

#[test]
fn overfull_building_is_infeasible() {
    let mut inst = tiny_multi(2);
    inst.demand[0][0] += 200;
    for mode in Mode::ALL {
        let err = solve(&inst, &config(mode), &BranchAndBound::default()).unwrap_err();
        assert!(
            matches!(
                err,
                PipelineError::Infeasible
                    | PipelineError::Fa(FaError::InfeasibleByArea { .. })
                    | PipelineError::Heuristic(HeuristicError::InfeasibleByArea { .. })
            ),
            "{mode}: {err}"
        );
    }
}
