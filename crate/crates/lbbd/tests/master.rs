mod common;

use common::{build, direct, random_instance};
use pdpt_core::{Action, Journey, Route, Solution, Stop};
use pdpt_lbbd::{build_master, warm_start_from, LbbdError};
use pdpt_milp::{exact_oracle_solve, Backend, BuiltinBackend, Limits, SolveStatus, VarKind};
use proptest::prelude::*;

fn two_requests() -> pdpt_core::Instance {
    build(
        &[((0.0, 0.0), (0.0, 0.0)), ((50.0, 0.0), (50.0, 0.0))],
        &[direct((10.0, 0.0), (20.0, 0.0)), direct((30.0, 0.0), (40.0, 0.0))],
        &[(25.0, 5.0)],
        30,
    )
}

#[test]
fn variable_counts_follow_the_index_sets() {
    let inst = two_requests();
    let master = build_master(&inst);
    let (n, n_req, n_tr) = (9usize, 2usize, 1usize);
    assert_eq!(inst.n_locations(), n);
    let names: Vec<&str> = master.model.vars().iter().map(|v| v.name.as_str()).collect();
    let count = |prefix: &str| names.iter().filter(|s| s.starts_with(prefix)).count();
    assert_eq!(count("x_"), n * n);
    assert_eq!(count("y_"), n_req * n * (n - 1));
    assert_eq!(count("a_"), n - n_tr);
    assert_eq!(count("b_"), n_req * n_tr);
    assert_eq!(names.len(), 1 + n * n + n_req * n * (n - 1) + (n - n_tr) + n_req * n_tr);
    let binaries = master.model.vars().iter().filter(|v| v.kind == VarKind::Binary).count();
    assert_eq!(binaries, n * n + n_req * n * (n - 1));
}

#[test]
fn empty_fleet_plan_selects_only_the_depot_trip() {
    let inst = build(&[((0.0, 0.0), (30.0, 40.0))], &[], &[], 30);
    let master = build_master(&inst);
    let sol = Solution::empty(&inst);
    let values = warm_start_from(&inst, &master, &sol).unwrap();
    let on: Vec<(usize, usize)> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .filter(|&(i, j)| values[master.trip[i][j].0] > 0.5)
        .collect();
    assert_eq!(on, vec![(0, 1)]);
    assert!((values[master.z.0] - 50.0).abs() < 1e-9, "{}", values[master.z.0]);
}

#[test]
fn transferred_journey_maps_to_loads_through_the_transfer() {
    // vehicle 0 carries the request to the transfer point, vehicle 1 takes it on
    let inst = build(
        &[((0.0, 0.0), (0.0, 0.0)), ((100.0, 0.0), (100.0, 0.0))],
        &[direct((10.0, 0.0), (90.0, 0.0))],
        &[(50.0, 0.0)],
        30,
    );
    let (p, d, t) = (4, 5, 6);
    let route = |k: usize, stops: Vec<Stop>| Route { vehicle: k, stops };
    let routes = vec![
        route(0, vec![
            Stop::new(0, Action::Start),
            Stop::new(p, Action::Pickup(0)),
            Stop::new(t, Action::TransferDrop(0)),
            Stop::new(2, Action::End),
        ]),
        route(1, vec![
            Stop::new(1, Action::Start),
            Stop::new(t, Action::TransferPick(0)),
            Stop::new(d, Action::Deliver(0)),
            Stop::new(3, Action::End),
        ]),
    ];
    let sol = Solution::from_parts(&inst, routes, vec![Journey::transferred(0, p, t, 1, d)]);
    assert!(sol.is_schedule_valid());
    let master = build_master(&inst);
    let values = warm_start_from(&inst, &master, &sol).unwrap();
    let loaded = |i: usize, j: usize| values[master.load[0][i][j].unwrap().0] > 0.5;
    assert!(loaded(p, t) && loaded(t, d));
    assert!(!loaded(p, d));
    // drop at t: 0 -> 10 -> 50 hm at 0.3 min per hm
    let b = values[master.transfer_arrival[0][t].unwrap().0];
    assert!((b - 15.0).abs() < 1e-9, "{b}");
    assert!(master.model.violations(&values, 1e-6).is_empty());
}

#[test]
fn infeasible_plan_is_rejected() {
    let inst = two_requests();
    let master = build_master(&inst);
    let mut sol = Solution::empty(&inst);
    // served by nobody
    assert!(matches!(warm_start_from(&inst, &master, &sol), Err(LbbdError::InvalidWarmStart(_))));
    let routes = vec![
        Route { vehicle: 0, stops: vec![Stop::new(0, Action::Start), Stop::new(5, Action::Deliver(0)), Stop::new(4, Action::Pickup(0)), Stop::new(2, Action::End)] },
        sol.route(1).clone(),
    ];
    sol = Solution::from_parts(&inst, routes, vec![Journey::direct(0, 4, 5), Journey::default()]);
    assert!(warm_start_from(&inst, &master, &sol).is_err());
}

fn master_optimum(inst: &pdpt_core::Instance) -> f64 {
    let master = build_master(inst);
    let res = BuiltinBackend::new().solve(&master.model, &Limits::default(), None, None).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    res.objective.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn oracle_solution_is_a_master_point(seed in 0u64..10_000, n_req in 1usize..4) {
        let inst = random_instance(seed, n_req);
        if let Ok(sol) = exact_oracle_solve(&inst) {
            let master = build_master(&inst);
            let values = warm_start_from(&inst, &master, &sol).unwrap();
            prop_assert!((values[master.z.0] - sol.objective()).abs() < 1e-9);
            // the master relaxation never exceeds the routing optimum
            prop_assert!(master_optimum(&inst) <= sol.objective() + 1e-6);
        }
    }
}
