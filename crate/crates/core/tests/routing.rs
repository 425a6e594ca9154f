mod common;

use common::{fixed_point_schedule, loc, meta, oracle_feasible, random_instance, random_solution, resum};
use pdpt_core::routing::{apply_unchecked, check_insertion_exact, solution_from_json, solution_to_json};
use pdpt_core::{
    apply_insertion, check_insertion_feasible, compute_schedule, enumerate_insertions, evaluate,
    ranked_insertions, validate_solution, Action, Infeasibility, Instance, Journey, LocationKind,
    Placement, Property, Request, Route, Solution, Stop, Vehicle,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Collinear fixture: vehicle 0 runs o=0, p=1, d=2, e=3 on the x axis;
/// vehicle 1 sits at (0,5) -> (0,6). One transfer at (1.5, 1).
fn line_instance(with_transfer: bool) -> Instance {
    let mut locations = vec![
        loc(0, LocationKind::DepotOrigin, 0.0, 0.0, 0.0, 480.0, 0.0),
        loc(1, LocationKind::DepotOrigin, 0.0, 5.0, 0.0, 480.0, 0.0),
        loc(2, LocationKind::DepotDestination, 3.0, 0.0, 0.0, 480.0, 0.0),
        loc(3, LocationKind::DepotDestination, 0.0, 6.0, 0.0, 480.0, 0.0),
        loc(4, LocationKind::Pickup, 1.0, 0.0, 0.0, 480.0, 0.0),
        loc(5, LocationKind::Delivery, 2.0, 0.0, 0.0, 480.0, 0.0),
    ];
    let mut transfers = vec![];
    if with_transfer {
        locations.push(loc(6, LocationKind::Transfer, 1.5, 1.0, 0.0, 480.0, 0.0));
        transfers.push(6);
    }
    Instance::new(
        meta("line"),
        locations,
        vec![Request { id: 0, pickup: 4, delivery: 5, qty: 10 }],
        vec![
            Vehicle { id: 0, origin: 0, destination: 2, capacity: 40 },
            Vehicle { id: 1, origin: 1, destination: 3, capacity: 40 },
        ],
        transfers,
    )
    .unwrap()
}

fn build_greedy(inst: &Instance) -> Solution {
    let mut sol = Solution::empty(inst);
    for r in 0..inst.requests.len() {
        let best = ranked_insertions(inst, &sol, r, true).next();
        if let Some(c) = best {
            apply_insertion(inst, &mut sol, &c).unwrap();
        }
    }
    sol
}

fn transferred_any(sol: &Solution) -> Option<usize> {
    sol.journeys().iter().position(|j| j.legs.len() == 2)
}

#[test]
fn empty_solution_costs_the_depot_legs() {
    let inst = line_instance(false);
    let sol = Solution::empty(&inst);
    assert!((evaluate(&inst, &sol) - 4.0).abs() < 1e-12);
    assert_eq!(sol.objective(), evaluate(&inst, &sol));
}

#[test]
fn direct_service_on_a_line() {
    let inst = line_instance(false);
    let mut sol = Solution::empty(&inst);
    let cands = enumerate_insertions(&inst, &sol, 0);
    let on_first: Vec<_> =
        cands.iter().filter(|c| matches!(c.placement, Placement::Direct { vehicle: 0, .. })).collect();
    assert_eq!(on_first.len(), 1);
    apply_insertion(&inst, &mut sol, on_first[0]).unwrap();
    assert!((evaluate(&inst, &sol) - (3.0 + 1.0)).abs() < 1e-12);
    assert!((on_first[0].delta).abs() < 1e-12);
}

#[test]
fn single_empty_route_without_transfers_has_one_candidate() {
    let mut inst = line_instance(false);
    inst.vehicles.truncate(1);
    let sol = Solution::empty(&inst);
    assert_eq!(enumerate_insertions(&inst, &sol, 0).len(), 1);
}

#[test]
fn two_vehicles_one_transfer_hand_count() {
    // per vehicle one direct placement; transfer placements for the two
    // ordered pairs (0,1) and (1,0), each with one position per route.
    let inst = line_instance(true);
    let sol = Solution::empty(&inst);
    let cands = enumerate_insertions(&inst, &sol, 0);
    let direct = cands.iter().filter(|c| matches!(c.placement, Placement::Direct { .. })).count();
    let transfer = cands.iter().filter(|c| matches!(c.placement, Placement::Transfer { .. })).count();
    assert_eq!((direct, transfer), (2, 2));
    for c in &cands {
        if let Placement::Transfer { first, second, .. } = c.placement {
            assert_ne!(first, second);
        }
    }
}

#[test]
fn schedule_on_open_windows_is_cumulative() {
    let inst = random_instance(11, 5, 1, 0, false);
    let mut open = inst.clone();
    for l in &mut open.locations {
        l.tw.open = 0.0;
        l.tw.close = 1e6;
    }
    open.meta.horizon = 1e6;
    let sol = build_greedy(&open);
    let sched = compute_schedule(&open, &sol).unwrap();
    let stops = &sol.route(0).stops;
    let mut acc = 0.0;
    for m in 0..stops.len() {
        if m > 0 {
            acc += open.gap(stops[m - 1].loc, stops[m].loc);
        }
        assert!((sched.earliest[0][m] - acc).abs() < 1e-9);
    }
}

#[test]
fn picking_vehicle_waits_for_the_drop() {
    let base = line_instance(true);
    let mut locations = base.locations.clone();
    // vehicle 1 starts next to the transfer
    locations[1].x = 1.5;
    locations[1].y = 1.2;
    let inst = Instance::new(base.meta.clone(), locations, base.requests.clone(), base.vehicles.clone(), base.transfers.clone())
        .unwrap();
    let mut sol = Solution::empty(&inst);
    let cand = enumerate_insertions(&inst, &sol, 0)
        .into_iter()
        .find(|c| matches!(c.placement, Placement::Transfer { first: 0, .. }))
        .unwrap();
    apply_insertion(&inst, &mut sol, &cand).unwrap();
    let drop = sol.route(0).stops.iter().find(|s| matches!(s.action, Action::TransferDrop(0))).unwrap();
    let pick = sol.route(1).stops.iter().find(|s| matches!(s.action, Action::TransferPick(0))).unwrap();
    // vehicle 1 alone would reach the transfer at t(1,6); it must wait.
    assert!(inst.t(1, 6) < drop.time);
    assert!((pick.time - drop.time).abs() < 1e-12);
}

/// Two vehicles each hold a request the other needs, and each drops only
/// after picking up from the other.
fn crossing_fixture() -> (Instance, Vec<Route>) {
    let locations = vec![
        loc(0, LocationKind::DepotOrigin, 0.0, 0.0, 0.0, 480.0, 0.0),
        loc(1, LocationKind::DepotOrigin, 10.0, 0.0, 0.0, 480.0, 0.0),
        loc(2, LocationKind::DepotDestination, 0.0, 0.0, 0.0, 480.0, 0.0),
        loc(3, LocationKind::DepotDestination, 10.0, 0.0, 0.0, 480.0, 0.0),
        loc(4, LocationKind::Pickup, 1.0, 0.0, 0.0, 480.0, 0.0),
        loc(5, LocationKind::Delivery, 9.0, 1.0, 0.0, 480.0, 0.0),
        loc(6, LocationKind::Pickup, 9.0, 0.0, 0.0, 480.0, 0.0),
        loc(7, LocationKind::Delivery, 1.0, 1.0, 0.0, 480.0, 0.0),
        loc(8, LocationKind::Transfer, 4.0, 0.0, 0.0, 480.0, 0.0),
        loc(9, LocationKind::Transfer, 6.0, 0.0, 0.0, 480.0, 0.0),
    ];
    let inst = Instance::new(
        meta("crossing"),
        locations,
        vec![Request { id: 0, pickup: 4, delivery: 5, qty: 5 }, Request { id: 1, pickup: 6, delivery: 7, qty: 5 }],
        vec![
            Vehicle { id: 0, origin: 0, destination: 2, capacity: 40 },
            Vehicle { id: 1, origin: 1, destination: 3, capacity: 40 },
        ],
        vec![8, 9],
    )
    .unwrap();
    let s = Stop::new;
    let routes = vec![
        Route {
            vehicle: 0,
            stops: vec![
                s(0, Action::Start),
                s(4, Action::Pickup(0)),
                s(8, Action::TransferPick(1)),
                s(9, Action::TransferDrop(0)),
                s(7, Action::Deliver(1)),
                s(2, Action::End),
            ],
        },
        Route {
            vehicle: 1,
            stops: vec![
                s(1, Action::Start),
                s(6, Action::Pickup(1)),
                s(9, Action::TransferPick(0)),
                s(8, Action::TransferDrop(1)),
                s(5, Action::Deliver(0)),
                s(3, Action::End),
            ],
        },
    ];
    (inst, routes)
}

#[test]
fn crossing_transfers_report_a_cycle() {
    let (inst, routes) = crossing_fixture();
    let journeys = vec![Journey::transferred(0, 4, 9, 1, 5), Journey::transferred(1, 6, 8, 0, 7)];
    let sol = Solution::from_parts(&inst, routes.clone(), journeys);
    match compute_schedule(&inst, &sol) {
        Err(Infeasibility::Cycle { stops }) => {
            let vehicles: std::collections::BTreeSet<_> = stops.iter().map(|s| s.vehicle).collect();
            assert_eq!(vehicles.len(), 2, "{stops:?}");
        }
        other => panic!("expected a cycle, got {other:?}"),
    }
    let report = validate_solution(&inst, &sol);
    assert!(report.iter().any(|v| v.property == Property::Synchronization), "{report:?}");

    // exhaustive: no order of the four transfer stops satisfies both route
    // orders and both drop-before-pick constraints.
    let items = [(0usize, 2usize), (0, 3), (1, 2), (1, 3)];
    let before = |a: (usize, usize), b: (usize, usize)| -> bool {
        let (sa, sb) = (&routes[a.0].stops[a.1], &routes[b.0].stops[b.1]);
        if a.0 == b.0 {
            return a.1 < b.1;
        }
        matches!((sa.action, sb.action), (Action::TransferDrop(x), Action::TransferPick(y)) if x == y && sa.loc == sb.loc)
    };
    let mut idx = [0usize, 1, 2, 3];
    let mut any = false;
    permute(&mut idx, 0, &mut |perm| {
        let ok = (0..4).all(|i| (i + 1..4).all(|j| !before(items[perm[j]], items[perm[i]])));
        any |= ok;
    });
    assert!(!any);
    assert!(fixed_point_schedule(&inst, &routes).is_none());
}

fn permute(a: &mut [usize; 4], k: usize, f: &mut dyn FnMut(&[usize; 4])) {
    if k == a.len() {
        f(a);
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permute(a, k + 1, f);
        a.swap(k, i);
    }
}

#[test]
fn greedy_solutions_validate_clean() {
    for seed in 0..30 {
        let inst = random_instance(seed, 6, 3, 2, seed % 3 == 0);
        let sol = build_greedy(&inst);
        assert!(validate_solution(&inst, &sol).is_empty(), "seed {seed}");
    }
}

#[test]
fn swapped_pickup_and_delivery_break_precedence() {
    let inst = line_instance(false);
    let mut sol = Solution::empty(&inst);
    let c = enumerate_insertions(&inst, &sol, 0)[0];
    apply_insertion(&inst, &mut sol, &c).unwrap();
    let mut routes = sol.routes().to_vec();
    let k = routes.iter().position(|r| r.stops.len() == 4).unwrap();
    routes[k].stops.swap(1, 2);
    let bad = Solution::from_parts(&inst, routes, sol.journeys().to_vec());
    let report = validate_solution(&inst, &bad);
    assert!(report.iter().any(|v| v.property == Property::Precedence), "{report:?}");
}

#[test]
fn oversized_request_breaks_capacity() {
    let inst = random_instance(5, 4, 2, 0, false);
    let sol = build_greedy(&inst);
    let r = sol.served()[0];
    let mut heavy = inst.clone();
    heavy.requests[r].qty = heavy.capacity() + 1;
    let report = validate_solution(&heavy, &sol);
    assert!(report.iter().any(|v| v.property == Property::Capacity), "{report:?}");
}

#[test]
fn removing_everything_leaves_bare_routes() {
    let inst = random_instance(8, 6, 3, 2, false);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sol = random_solution(&inst, &mut rng);
    let served = sol.served();
    sol.remove_requests(&inst, &served).unwrap();
    for r in sol.routes() {
        assert_eq!(r.stops.len(), 2);
    }
    assert!((sol.objective() - evaluate(&inst, &Solution::empty(&inst))).abs() < 1e-9);
}

#[test]
fn removing_a_transferred_request_drops_one_pair_per_route() {
    let mut found = false;
    for seed in 0..200 {
        let inst = random_instance(seed, 5, 3, 2, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sol = random_solution(&inst, &mut rng);
        let Some(r) = transferred_any(&sol) else { continue };
        let legs = sol.journey(r).legs.clone();
        let before: Vec<usize> = sol.routes().iter().map(|x| x.stops.len()).collect();
        sol.remove_requests(&inst, &[r]).unwrap();
        for (k, x) in sol.routes().iter().enumerate() {
            let lost = before[k] - x.stops.len();
            let expect = if legs.iter().any(|l| l.vehicle == k) { 2 } else { 0 };
            assert_eq!(lost, expect);
        }
        found = true;
        break;
    }
    assert!(found, "no transferred journey in 200 random solutions");
}

#[test]
fn removal_never_breaks_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let inst = random_instance(trial, 6, 3, 2, trial % 2 == 0);
        let mut sol = random_solution(&inst, &mut rng);
        let mut served = sol.served();
        served.shuffle(&mut rng);
        let n = rng.gen_range(0..=served.len());
        sol.remove_requests(&inst, &served[..n]).unwrap();
        let report = validate_solution(&inst, &sol);
        // unserved requests are a coverage matter, not a feasibility one
        assert!(report.iter().all(|v| v.property == Property::Coverage), "trial {trial}: {report:?}");
        assert!((sol.objective() - evaluate(&inst, &sol)).abs() < 1e-9);
    }
}

#[test]
fn unknown_request_is_rejected() {
    let inst = line_instance(false);
    let mut sol = Solution::empty(&inst);
    assert!(sol.remove_requests(&inst, &[3]).is_err());
    assert!(sol.remove_requests(&inst, &[0]).is_err());
}

#[test]
fn deltas_match_re_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    while checked < 1000 {
        let inst = random_instance(rng.gen(), 6, 3, 2, false);
        let mut sol = random_solution(&inst, &mut rng);
        let served = sol.served();
        let drop: Vec<_> = served.choose_multiple(&mut rng, served.len().min(2)).copied().collect();
        sol.remove_requests(&inst, &drop).unwrap();
        for r in sol.unserved() {
            let cands = enumerate_insertions(&inst, &sol, r);
            for c in cands.choose_multiple(&mut rng, 20) {
                let after = apply_unchecked(&inst, &sol, c).unwrap();
                let want = resum(&inst, &after) - resum(&inst, &sol);
                assert!((c.delta - want).abs() < 1e-9, "{c:?}: {} vs {want}", c.delta);
                checked += 1;
            }
        }
    }
}

#[test]
fn fast_check_agrees_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let (mut total, mut feasible) = (0usize, 0usize);
    let mut seed = 0u64;
    while total < 10_000 {
        seed += 1;
        let inst = random_instance(seed, 7, 3, 2, seed % 2 == 1);
        let mut sol = random_solution(&inst, &mut rng);
        let served = sol.served();
        let k = rng.gen_range(1..=served.len().max(1)).min(served.len());
        let drop: Vec<_> = served.choose_multiple(&mut rng, k).copied().collect();
        sol.remove_requests(&inst, &drop).unwrap();
        for r in sol.unserved() {
            for c in enumerate_insertions(&inst, &sol, r) {
                let fast = check_insertion_feasible(&inst, &sol, &c);
                let oracle = oracle_feasible(&inst, &sol, &c);
                assert_eq!(fast, oracle, "seed {seed} candidate {c:?}");
                assert_eq!(check_insertion_exact(&inst, &sol, &c), oracle);
                total += 1;
                feasible += fast as usize;
            }
        }
    }
    assert!(feasible > 500 && feasible < total - 500, "{feasible} of {total}");
}

#[test]
fn wide_windows_accept_and_closed_pickup_rejects() {
    let inst = line_instance(false);
    let sol = Solution::empty(&inst);
    let c = enumerate_insertions(&inst, &sol, 0)[0];
    assert!(check_insertion_feasible(&inst, &sol, &c));

    let mut late = inst.clone();
    late.locations[4].tw.close = 0.1; // 0.3 minutes from the nearest origin
    let sol = Solution::empty(&late);
    for c in enumerate_insertions(&late, &sol, 0) {
        assert!(!check_insertion_feasible(&late, &sol, &c));
    }
}

#[test]
fn apply_then_remove_restores_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..100 {
        let inst = random_instance(seed, 6, 3, 2, false);
        let mut sol = random_solution(&inst, &mut rng);
        let Some(&r) = sol.served().first() else { continue };
        sol.remove_requests(&inst, &[r]).unwrap();
        let base = sol.objective();
        let Some(c) = ranked_insertions(&inst, &sol, r, true).next() else { continue };
        apply_insertion(&inst, &mut sol, &c).unwrap();
        assert!((sol.objective() - base - c.delta).abs() < 1e-9);
        assert!(validate_solution(&inst, &sol).iter().all(|v| v.property == Property::Coverage));
        sol.remove_requests(&inst, &[r]).unwrap();
        assert!((sol.objective() - base).abs() < 1e-9);
    }
}

#[test]
fn applying_an_infeasible_candidate_fails() {
    let mut inst = line_instance(false);
    inst.locations[4].tw.close = 0.1;
    let mut sol = Solution::empty(&inst);
    let c = enumerate_insertions(&inst, &sol, 0)[0];
    assert!(apply_insertion(&inst, &mut sol, &c).is_err());
    assert!(!sol.is_served(0));
}

#[test]
fn ranked_insertions_are_sorted_and_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for seed in 0..60 {
        let inst = random_instance(seed, 6, 3, 2, seed % 2 == 0);
        let mut sol = random_solution(&inst, &mut rng);
        let served = sol.served();
        let drop: Vec<_> = served.choose_multiple(&mut rng, 2.min(served.len())).copied().collect();
        sol.remove_requests(&inst, &drop).unwrap();
        for r in sol.unserved() {
            let ranked: Vec<_> = ranked_insertions(&inst, &sol, r, true).collect();
            for w in ranked.windows(2) {
                assert!(w[0].delta <= w[1].delta + 1e-12);
            }
            let mut want: Vec<_> = enumerate_insertions(&inst, &sol, r)
                .into_iter()
                .filter(|c| oracle_feasible(&inst, &sol, c))
                .collect();
            assert_eq!(ranked.len(), want.len(), "seed {seed} request {r}");
            want.sort_by(|a, b| a.delta.total_cmp(&b.delta));
            if let (Some(a), Some(b)) = (ranked.first(), want.first()) {
                assert!((a.delta - b.delta).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn schedules_are_minimal() {
    // every earliest start is pinned by its window opening, its route
    // predecessor or its synchronization partner
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..200 {
        let inst = random_instance(seed, 6, 3, 2, seed % 2 == 0);
        let sol = random_solution(&inst, &mut rng);
        let sched = compute_schedule(&inst, &sol).unwrap();
        for (k, route) in sol.routes().iter().enumerate() {
            for (m, s) in route.stops.iter().enumerate() {
                let e = sched.earliest[k][m];
                let mut pinned = (e - inst.tw(s.loc).open).abs() < 1e-9;
                if m > 0 {
                    let prev = sched.earliest[k][m - 1] + inst.gap(route.stops[m - 1].loc, s.loc);
                    pinned |= (e - prev).abs() < 1e-9;
                }
                if let Action::TransferPick(q) = s.action {
                    for (k2, r2) in sol.routes().iter().enumerate() {
                        for (m2, s2) in r2.stops.iter().enumerate() {
                            if s2.action == Action::TransferDrop(q) && s2.loc == s.loc {
                                pinned |= (e - sched.earliest[k2][m2]).abs() < 1e-9;
                            }
                        }
                    }
                }
                assert!(pinned, "seed {seed} vehicle {k} stop {m} could start earlier");
                assert!(e <= sched.latest[k][m] + 1e-9);
                assert_eq!(e, s.time);
            }
        }
        let oracle = fixed_point_schedule(&inst, sol.routes()).unwrap();
        for k in 0..oracle.len() {
            for m in 0..oracle[k].len() {
                assert!((oracle[k][m] - sched.earliest[k][m]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn cache_equals_recompute_after_edits() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..100 {
        let inst = random_instance(seed, 6, 3, 2, false);
        let mut sol = random_solution(&inst, &mut rng);
        let served = sol.served();
        if let Some(&r) = served.choose(&mut rng) {
            sol.remove_requests(&inst, &[r]).unwrap();
        }
        let fresh = Solution::from_parts(&inst, sol.routes().to_vec(), sol.journeys().to_vec());
        assert_eq!(sol.cache(), fresh.cache());
        let sched = compute_schedule(&inst, &sol).unwrap();
        for k in 0..sol.routes().len() {
            for m in 0..sol.route(k).stops.len() {
                assert_eq!(sol.cache().earliest(k, m), sched.earliest[k][m]);
                assert_eq!(sol.cache().latest(k, m), sched.latest[k][m]);
            }
        }
    }
}

#[test]
fn solution_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..20 {
        let inst = random_instance(seed, 5, 3, 2, false);
        let sol = random_solution(&inst, &mut rng);
        let text = solution_to_json(&sol);
        let back = solution_from_json(&inst, &text).unwrap();
        assert_eq!(back.routes(), sol.routes());
        assert_eq!(back.journeys(), sol.journeys());
        assert_eq!(solution_to_json(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_edit_sequences_keep_invariants(seed in any::<u64>(), ops in prop::collection::vec(any::<u8>(), 1..12)) {
        let inst = random_instance(seed, 6, 3, 2, seed % 2 == 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut sol = Solution::empty(&inst);
        for op in ops {
            if op % 3 == 0 && !sol.served().is_empty() {
                let served = sol.served();
                let r = served[op as usize % served.len()];
                sol.remove_requests(&inst, &[r]).unwrap();
            } else if let Some(&r) = sol.unserved().choose(&mut rng) {
                let feasible: Vec<_> = ranked_insertions(&inst, &sol, r, true).take(5).collect();
                if let Some(c) = feasible.choose(&mut rng) {
                    apply_insertion(&inst, &mut sol, c).unwrap();
                }
            }
            prop_assert!((sol.objective() - resum(&inst, &sol)).abs() < 1e-9);
            let report = validate_solution(&inst, &sol);
            prop_assert!(report.iter().all(|v| v.property == Property::Coverage), "{:?}", report);
            let sched = compute_schedule(&inst, &sol).unwrap();
            for (k, route) in sol.routes().iter().enumerate() {
                for (m, s) in route.stops.iter().enumerate() {
                    prop_assert!(sched.earliest[k][m] <= sched.latest[k][m] + 1e-9);
                    prop_assert!(s.load_after <= inst.capacity());
                }
            }
        }
    }
}
