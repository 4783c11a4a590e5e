//! Shared test infrastructure: an exhaustive-enumeration cost oracle that is
//! deliberately independent of the dynamic-programming solver, plus frozen
//! expected values derived by hand for the closed-form instances.

#![allow(dead_code)]

use mfg_switch::cost::{path_cost_cached, CostParams, EdgeCongestion};
use mfg_switch::net::{successors, Node, SwitchPath};
use mfg_switch::profile::{mass_ratio, MassField, StepProfile};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Canonical time of grid index `i` on a uniform grid with `steps` steps.
/// The solver's own grid must agree with this expression bit-for-bit.
pub fn grid_time(steps: usize, horizon: f64, i: usize) -> f64 {
    (i as f64) * horizon / (steps as f64)
}

/// Minimal total cost from `(start, grid index t_idx)` over *every*
/// admissible switching control whose instants lie on the uniform grid,
/// found by brute-force enumeration of complete controls. No value
/// recursion, no memoization: each candidate control is priced end to end
/// by the public cost evaluator, so this is an independent oracle for the
/// dynamic-programming solver.
pub fn brute_force_value(
    start: Node,
    t_idx: usize,
    steps: usize,
    rho: &MassField,
    params: &CostParams,
) -> f64 {
    let congestion = EdgeCongestion::new(params, rho).expect("congestion cache");
    let horizon = params.horizon();
    let mut best = f64::INFINITY;
    // Depth-first enumeration over (node, grid index) chains.
    let mut stack: Vec<(Vec<Node>, Vec<usize>)> = vec![(vec![start], vec![t_idx])];
    while let Some((nodes, idxs)) = stack.pop() {
        let last = *nodes.last().expect("non-empty");
        let last_idx = *idxs.last().expect("non-empty");
        // A control is complete when it sits on the goal (it then waits out
        // the horizon) or when its final switch lands exactly on the horizon.
        if last.is_goal() || last_idx == steps {
            let times: Vec<f64> = idxs.iter().map(|&i| grid_time(steps, horizon, i)).collect();
            let path = SwitchPath::new(nodes.clone(), times, horizon).expect("admissible");
            let cost = path_cost_cached(&path, &congestion, params).expect("priced");
            if cost < best {
                best = cost;
            }
        }
        if !last.is_goal() {
            for q in successors(last) {
                for j in (last_idx + 1)..=steps {
                    let mut nodes2 = nodes.clone();
                    let mut idxs2 = idxs.clone();
                    nodes2.push(q);
                    idxs2.push(j);
                    stack.push((nodes2, idxs2));
                }
            }
        }
    }
    best
}

/// Random crowd field with strictly positive mass on every node (all edges
/// non-degenerate) and exact rational values. Piece shapes vary with the
/// seed to exercise the integral path, but values are constant per piece.
pub fn random_busy_field(targets: usize, horizon: f64, seed: u64) -> MassField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1usize << targets;
    let profiles: Vec<StepProfile> = (0..n)
        .map(|_| {
            let a = mass_ratio(rng.gen_range(1..40), 20);
            if rng.gen_bool(0.5) {
                StepProfile::constant(a, horizon).unwrap()
            } else {
                let b = mass_ratio(rng.gen_range(1..40), 20);
                let cut = horizon * rng.gen_range(1..8) as f64 / 8.0;
                StepProfile::new(vec![0.0, cut, horizon], vec![a, b.clone()], b).unwrap()
            }
        })
        .collect();
    MassField::new(profiles, targets).unwrap()
}

/// Random congestion weights, bounded away from zero.
pub fn random_weights(targets: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..(1usize << targets))
        .map(|_| rng.gen_range(5..30) as f64 / 10.0)
        .collect()
}

// ---------------------------------------------------------------------------
// Frozen expected values, derived by hand before the solvers were written.
// ---------------------------------------------------------------------------

/// Interior switching instant for a two-step chain ending in a final hop
/// whose tail value is `c_out / (T - s)`: entering congestion 1, leaving
/// congestion 4, from t = 0 with horizon 2, the stationarity condition
/// gives s = sqrt(1/4) and instant (s*T + t)/(s + 1) = 2/3.
pub const TWO_STEP_PHI: f64 = 2.0 / 3.0;
pub const TWO_STEP_CBAR_IN: f64 = 1.0;
pub const TWO_STEP_CBAR_OUT: f64 = 4.0;
pub const TWO_STEP_T: f64 = 0.0;
pub const TWO_STEP_HORIZON: f64 = 2.0;

/// Two-target symmetric instance: unit weights, horizon 2, every node
/// holding constant mass 1/4 (all edge coefficients are exactly 1/2),
/// earliness rate 1, miss penalty 5. Hand solution:
///   V(goal, t)   = 2 - t
///   V(mid, t)    = 0.5 / (2 - t)
///   V(origin, t) = min( 2/(2-t),  0.5/(2-t) + 5 )   (crossover at t = 1.7)
pub const SYM2_HORIZON: f64 = 2.0;
pub const SYM2_EDGE_CBAR: f64 = 0.5;
pub const SYM2_MISS: f64 = 5.0;
/// V(origin, 0) = 2/2.
pub const SYM2_V_ORIGIN_AT_0: f64 = 1.0;
/// V(origin, 0.5) = 2/1.5.
pub const SYM2_V_ORIGIN_AT_HALF: f64 = 4.0 / 3.0;
/// V(mid, 0.5) = 0.5/1.5.
pub const SYM2_V_MID_AT_HALF: f64 = 1.0 / 3.0;
/// Past the crossover the one-switch control (eat the miss penalty) wins:
/// V(origin, 1.8) = 0.5/0.2 + 5.
pub const SYM2_V_ORIGIN_AT_1_8: f64 = 7.5;
/// At the crossover both shapes price at 20/3.
pub const SYM2_CROSSOVER_T: f64 = 1.7;
pub const SYM2_V_ORIGIN_AT_CROSSOVER: f64 = 20.0 / 3.0;
/// Optimal interior instant from the origin at t: (2 + t)/2.
pub fn sym2_origin_phi(t: f64) -> f64 {
    (2.0 + t) / 2.0
}

/// Single-target instance: V(origin, t) = cbar/(T - t), V(goal, t) = rate*(T - t).
pub fn one_target_origin_value(cbar: f64, horizon: f64, t: f64) -> f64 {
    cbar / (horizon - t)
}

/// Three parallel links with slopes (1, 2, 3): equilibrium split is the
/// normalized reciprocal slopes (6/11, 3/11, 2/11) and every used link
/// prices at (6/11) of the total mass.
pub const PAR3_SPLIT: [(i64, i64); 3] = [(6, 11), (3, 11), (2, 11)];
pub const PAR3_COST: (i64, i64) = (6, 11);

/// Two parallel links with slopes (1, 2): split (2/3, 1/3).
pub const PAR2_SPLIT: [(i64, i64); 2] = [(2, 3), (1, 3)];

/// Two-stage instance with slopes (1, 4, 3, 2) and fixed instants: the
/// first-stage split is (13/18, 5/18), the second-stage split of the lower
/// branch is (2/5, 3/5), the resulting occupancies of the two second-stage
/// nodes are 1/9 and 1/6 of the total mass, and the common path price is
/// 13/18 of the total mass.
pub const STAGED_SPLIT: [(i64, i64); 2] = [(13, 18), (5, 18)];
pub const STAGED_INNER: [(i64, i64); 2] = [(2, 5), (3, 5)];
pub const STAGED_OCCUPANCY: [(i64, i64); 2] = [(1, 9), (1, 6)];
pub const STAGED_COST: (i64, i64) = (13, 18);
