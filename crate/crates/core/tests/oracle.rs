mod common;

use common::{guarded_fa, guarded_fp};
use floorplan::fa::{brute_force_fa, build_fa_model, decode_fa_solution, FaError};
use floorplan::fp::{brute_force_fp, build_fp_model, decode_fp_solution, FpError};
use floorplan::milp::{solve, SolveLimits, SolveStatus};
use floorplan::model::{fa_cost, proximity_cost, validate_placement};

#[test]
fn fp_model_optimum_equals_exhaustive_search() {
    let mut solved = 0;
    for seed in 0..60 {
        let inst = guarded_fp(seed);
        let brute = brute_force_fp(&inst);
        let built = build_fp_model(&inst);
        match (&brute, &built) {
            (Err(FpError::InfeasibleByArea { .. }), Err(FpError::InfeasibleByArea { .. })) => continue,
            (_, Err(e)) => panic!("seed {seed}: {e}"),
            _ => {}
        }
        let (model, index) = built.unwrap();
        let r = solve(&model, &SolveLimits::default()).unwrap();
        match brute {
            Err(FpError::Infeasible) => assert_eq!(r.status, SolveStatus::Infeasible, "seed {seed}"),
            Err(e) => panic!("seed {seed}: {e}"),
            Ok((best, _)) => {
                assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
                assert_eq!(r.objective, Some(best), "seed {seed}");
                let p = decode_fp_solution(&index, &r).unwrap();
                assert!(validate_placement(&inst, &p).unwrap().is_valid(), "seed {seed}");
                assert_eq!(proximity_cost(&p, &index.distances), best);
                solved += 1;
            }
        }
    }
    assert!(solved >= 30, "only {solved} feasible cases");
}

#[test]
fn fa_model_optimum_equals_exhaustive_search() {
    for seed in 0..80 {
        let inst = guarded_fa(seed);
        let brute = brute_force_fa(&inst);
        let Ok((model, index)) = build_fa_model(&inst) else {
            assert!(matches!(brute, Err(FaError::InfeasibleByArea { .. })), "seed {seed}");
            continue;
        };
        let r = solve(&model, &SolveLimits::default()).unwrap();
        match brute {
            Err(FaError::Infeasible) => assert_eq!(r.status, SolveStatus::Infeasible, "seed {seed}"),
            Err(e) => panic!("seed {seed}: {e}"),
            Ok((best, _)) => {
                assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
                assert_eq!(r.objective, Some(best), "seed {seed}");
                let a = decode_fa_solution(&index, &r).unwrap();
                assert!(a.conserves(&inst) && a.overfilled_floors(&inst).is_empty());
                assert_eq!(fa_cost(&a, &inst.building), best);
            }
        }
    }
}
