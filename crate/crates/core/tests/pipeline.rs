use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use orbivortex_core::fields::ActionData;
use orbivortex_core::moduli::{divisor_roundtrip, locate_zeros, spread_divisor};
use orbivortex_core::seifert::{moduli_status, Emptiness};
use orbivortex_core::solver::{
    feasibility, residual_check, solve_taubes, Divisor, Feasibility, SolveStatus, SolverOptions,
};
use orbivortex_core::surface::Surface;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_and_seifert_agree_on_emptiness(a in 1_i64..5, n in 0_i64..8, tau in 0.05_f64..4.0) {
        let vol = 4.0 * PI;
        let act = ActionData::new(a, tau).unwrap();
        let d = BigRational::new(BigInt::from(n), BigInt::from(a));
        let st = moduli_status(a, &d, tau, vol).unwrap();
        let feasible = feasibility(&act, n, vol) == Feasibility::Feasible;
        prop_assert_eq!(feasible, st.status == Emptiness::Nonempty);
    }
}

#[test]
fn sphere_solution_passes_residual_check() {
    let s = Surface::sphere(32, 64).unwrap();
    let act = ActionData::new(1, 3.0).unwrap();
    let d = Divisor::new(vec![((1.0, 2.0), 1), ((2.2, 5.0), 1)]);
    let (sol, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    let sol = sol.unwrap();
    let check = residual_check(&s, &sol, &act);
    assert!(check.degree_defect < 1e-6, "{check:?}");
    let zs = locate_zeros(&s, &sol, &act);
    assert!(zs.sum_matches, "{zs:?}");
}

#[test]
fn football_cone_point_round_trip() {
    let s = Surface::football(2, 32, 64).unwrap();
    let act = ActionData::new(2, 3.0).unwrap();
    let d = Divisor::new(vec![((0.0, 0.0), 1), ((1.5, 1.0), 1)]);
    let rt = divisor_roundtrip(&s, &d, &act, &SolverOptions::default()).unwrap();
    assert!(rt.success, "{rt:?}");
}

#[test]
fn spread_divisors_round_trip_on_a_rectangle() {
    let s = Surface::torus(8.0, 5.0, 64).unwrap();
    let act = ActionData::new(2, 1.0).unwrap();
    for n in 1..=3 {
        let d = spread_divisor(&s, n);
        let rt = divisor_roundtrip(&s, &d, &act, &SolverOptions::default()).unwrap();
        assert!(rt.success, "n = {n}: {rt:?}");
    }
}
