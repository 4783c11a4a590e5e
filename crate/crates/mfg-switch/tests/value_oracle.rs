//! The dynamic-programming solver against the exhaustive-enumeration oracle.

mod common;

use common::{brute_force_value, grid_time, random_busy_field, random_weights};
use mfg_switch::cost::CostParams;
use mfg_switch::net::Node;
use mfg_switch::value::{solve_value, SolveOpts, TimeGrid};

#[test]
fn grid_times_match_the_oracle_convention_bitwise() {
    for &steps in &[8usize, 16, 33] {
        let grid = TimeGrid::new(2.0, steps).unwrap();
        for i in 0..=steps {
            assert_eq!(grid.t(i), grid_time(steps, 2.0, i));
        }
    }
}

#[test]
fn value_table_matches_exhaustive_enumeration_on_small_networks() {
    let horizon = 2.0;
    for targets in 1..=2usize {
        for seed in 0..3u64 {
            let steps = 8;
            let rho = random_busy_field(targets, horizon, seed);
            let params = CostParams::new(
                random_weights(targets, seed),
                targets,
                horizon,
                1.0,
                5.0,
            )
            .unwrap();
            let table = solve_value(&params, &rho, steps, &SolveOpts::default()).unwrap();
            for p in 0..(1usize << targets) {
                let node = Node::new(p, targets).unwrap();
                for i in 0..=steps {
                    if !node.is_goal() && i == steps {
                        continue; // terminal row, no controls to enumerate
                    }
                    let oracle = brute_force_value(node, i, steps, &rho, &params);
                    let dp = table.value(node, i);
                    assert!(
                        (dp - oracle).abs() <= 1e-12,
                        "targets {targets} seed {seed} node {p} i {i}: dp {dp} oracle {oracle}"
                    );
                }
            }
        }
    }
}
