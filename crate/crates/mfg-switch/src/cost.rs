//! Switching and terminal costs.
//!
//! The built-in family couples players through time-averaged congestion: the
//! cost of switching from `p` to `p'` when committing at time `t` to switch
//! at time `tau > t` is
//!
//! ```text
//! C(p, p', t, tau, rho) = Cbar(p, p', rho) / (tau - t)
//! Cbar(p, p', rho)     = a(p)/T * integral(rho_p) + a(p')/T * integral(rho_p')
//! ```
//!
//! so crowded nodes are expensive to traverse quickly, and cost blows up as
//! the switching window shrinks. The terminal cost charges time spent parked
//! on the goal before the horizon (an earliness cost) and a flat penalty per
//! unvisited target for anyone stranded elsewhere at the horizon:
//!
//! ```text
//! terminal(goal, t) = earliness_rate * (T - t)        for t <= T
//! terminal(p, T)    = miss_penalty * (# zero bits)    for p != goal
//! ```
//!
//! The solver requires every edge coefficient `Cbar > 0`; a zero coefficient
//! kills the blow-up that keeps optimal switching instants separated, so it
//! is rejected as [`Error::DegenerateCost`] where a cost is evaluated and
//! merely *flagged* by [`validate_assumptions`], which exists to probe such
//! violations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::{successors, Node, SwitchPath};
use crate::profile::{mass_to_f64, MassField};

/// Parameters of the built-in cost family.
#[derive(Clone, Debug)]
pub struct CostParams {
    weights: Vec<f64>,
    horizon: f64,
    earliness_rate: f64,
    miss_penalty: f64,
}

impl CostParams {
    /// Validating constructor. `weights[p]` is the congestion weight `a(p)`
    /// of node id `p`; there must be `2^targets` of them, all finite and
    /// non-negative, and every edge must see at least one positive endpoint
    /// weight (otherwise that edge's cost could vanish identically).
    pub fn new(
        weights: Vec<f64>,
        targets: usize,
        horizon: f64,
        earliness_rate: f64,
        miss_penalty: f64,
    ) -> Result<Self> {
        if weights.len() != (1usize << targets) {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{} weights for {} nodes",
                    weights.len(),
                    1usize << targets
                ),
            });
        }
        if weights.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::ValidationError {
                message: "congestion weights must be finite and non-negative".into(),
            });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::ValidationError {
                message: format!("horizon T = {horizon} must be positive and finite"),
            });
        }
        if !earliness_rate.is_finite() || earliness_rate < 0.0 {
            return Err(Error::ValidationError {
                message: "earliness rate must be finite and non-negative".into(),
            });
        }
        if !miss_penalty.is_finite() || miss_penalty < 0.0 {
            return Err(Error::ValidationError {
                message: "miss penalty must be finite and non-negative".into(),
            });
        }
        for p in 0..weights.len() {
            let node = Node::with_cap(p, targets, 64).expect("validated id range");
            for q in successors(node) {
                if weights[p] == 0.0 && weights[q.id()] == 0.0 {
                    return Err(Error::ValidationError {
                        message: format!(
                            "edge {} -> {} has zero weight on both endpoints",
                            node.bit_string(),
                            q.bit_string()
                        ),
                    });
                }
            }
        }
        Ok(Self {
            weights,
            horizon,
            earliness_rate,
            miss_penalty,
        })
    }

    /// Congestion weight `a(p)`.
    pub fn weight(&self, p: Node) -> f64 {
        self.weights[p.id()]
    }

    /// All weights by node id.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of targets `N`.
    pub fn targets(&self) -> usize {
        self.weights.len().trailing_zeros() as usize
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Cost rate per unit time parked on the goal before the horizon.
    pub fn earliness_rate(&self) -> f64 {
        self.earliness_rate
    }

    /// Flat penalty per unvisited target at the horizon.
    pub fn miss_penalty(&self) -> f64 {
        self.miss_penalty
    }
}

/// Per-edge congestion coefficients `Cbar(p, p', rho)`, cached so the value
/// solver evaluates each node integral exactly once per field.
#[derive(Clone, Debug)]
pub struct EdgeCongestion {
    // Indexed by p * N + flipped-bit; `None` where the bit is already 1.
    cbar: Vec<Option<f64>>,
    targets: usize,
}

impl EdgeCongestion {
    /// Computes every edge coefficient from exact node integrals.
    pub fn new(params: &CostParams, rho: &MassField) -> Result<Self> {
        let targets = params.targets();
        if rho.targets() != targets || rho.horizon() != params.horizon() {
            return Err(Error::DimensionMismatch {
                context: "cost parameters and mass field over different networks".into(),
            });
        }
        let horizon = params.horizon();
        let integrals: Vec<f64> = (0..rho.node_count())
            .map(|p| {
                rho.profile(p)
                    .and_then(|f| f.integral_exact(0.0, horizon))
                    .map(|m| mass_to_f64(&m))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cbar = vec![None; rho.node_count() * targets];
        for p in 0..rho.node_count() {
            for bit in 0..targets {
                if (p >> bit) & 1 == 0 {
                    let q = p | (1usize << bit);
                    let value = (params.weights[p] * integrals[p]
                        + params.weights[q] * integrals[q])
                        / horizon;
                    cbar[p * targets + bit] = Some(value);
                }
            }
        }
        Ok(Self { cbar, targets })
    }

    /// Coefficient of the edge `p -> q`; errors if `q` is not a successor of `p`.
    pub fn cbar(&self, p: Node, q: Node) -> Result<f64> {
        let step = q.id() & !p.id();
        if (p.id() & !q.id()) != 0 || step.count_ones() != 1 {
            return Err(Error::NotAPath {
                context: format!("{} -> {} is not an edge", p.bit_string(), q.bit_string()),
            });
        }
        let bit = step.trailing_zeros() as usize;
        Ok(self.cbar[p.id() * self.targets + bit].expect("bit is 0 in p"))
    }

    /// Edges whose coefficient is exactly zero (blow-up assumption lost).
    pub fn degenerate_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..(self.cbar.len() / self.targets) {
            for bit in 0..self.targets {
                if let Some(c) = self.cbar[p * self.targets + bit] {
                    if c == 0.0 {
                        out.push((p, p | (1usize << bit)));
                    }
                }
            }
        }
        out
    }

    /// Largest coefficient over all edges.
    pub fn max_cbar(&self) -> f64 {
        self.cbar
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, c| acc.max(*c))
    }
}

/// Switching cost `C(p, p', t, tau, rho)` of the built-in family.
///
/// Requires `0 <= t < tau <= T`, an actual edge `p -> p'`, and a positive
/// congestion coefficient.
pub fn switch_cost(
    p: Node,
    q: Node,
    t: f64,
    tau: f64,
    rho: &MassField,
    params: &CostParams,
) -> Result<f64> {
    let congestion = EdgeCongestion::new(params, rho)?;
    switch_cost_cached(p, q, t, tau, &congestion, params)
}

/// Same as [`switch_cost`] against a prebuilt [`EdgeCongestion`] cache.
pub fn switch_cost_cached(
    p: Node,
    q: Node,
    t: f64,
    tau: f64,
    congestion: &EdgeCongestion,
    params: &CostParams,
) -> Result<f64> {
    if !(t < tau) || t < 0.0 || tau > params.horizon() {
        return Err(Error::BadTimes {
            context: format!("need 0 <= t < tau <= T, got t = {t}, tau = {tau}"),
        });
    }
    let cbar = congestion.cbar(p, q)?;
    if cbar == 0.0 {
        return Err(Error::DegenerateCost {
            context: format!(
                "edge {} -> {} has zero congestion coefficient",
                p.bit_string(),
                q.bit_string()
            ),
        });
    }
    Ok(cbar / (tau - t))
}

/// Terminal cost: linear earliness charge on the goal, per-target miss
/// penalty at the horizon elsewhere. Interior times on non-goal nodes have
/// no terminal meaning and error.
pub fn terminal_cost(p: Node, t: f64, params: &CostParams) -> Result<f64> {
    let horizon = params.horizon();
    if t < 0.0 || t > horizon {
        return Err(Error::OutOfRange {
            context: format!("terminal time {t} outside [0, {horizon}]"),
        });
    }
    if p.is_goal() {
        Ok(params.earliness_rate() * (horizon - t))
    } else if t == horizon {
        Ok(params.miss_penalty() * (p.targets() - p.ones_count()) as f64)
    } else {
        Err(Error::InvalidTerminalState { node: p.id(), t })
    }
}

/// Total cost of an admissible switching control: the sum of its switch
/// costs plus the terminal cost at the final state, exactly as the game
/// charges a single player facing the crowd `rho`.
pub fn path_cost(path: &SwitchPath, rho: &MassField, params: &CostParams) -> Result<f64> {
    if path.horizon() != params.horizon() {
        return Err(Error::DimensionMismatch {
            context: "path and cost parameters over different horizons".into(),
        });
    }
    let congestion = EdgeCongestion::new(params, rho)?;
    path_cost_cached(path, &congestion, params)
}

/// Same as [`path_cost`] against a prebuilt congestion cache.
pub fn path_cost_cached(
    path: &SwitchPath,
    congestion: &EdgeCongestion,
    params: &CostParams,
) -> Result<f64> {
    let nodes = path.nodes();
    let times = path.times();
    let mut total = 0.0;
    for i in 1..nodes.len() {
        total += switch_cost_cached(
            nodes[i - 1],
            nodes[i],
            times[i - 1],
            times[i],
            congestion,
            params,
        )?;
    }
    total += terminal_cost(
        *nodes.last().expect("non-empty"),
        *times.last().expect("non-empty"),
        params,
    )?;
    Ok(total)
}

/// Cost-model interface for the assumption checker: anything that prices a
/// single switch against a crowd field. The built-in family implements it;
/// tests plug in deliberately broken variants.
pub trait CongestionCost {
    /// Price of committing at `t` to switch `p -> q` at `tau`.
    fn switch_cost(&self, p: Node, q: Node, t: f64, tau: f64, rho: &MassField) -> Result<f64>;
    /// Horizon `T`.
    fn horizon(&self) -> f64;
    /// The reciprocal-form coefficient, when the cost has one (lets the
    /// checker detect exactly-degenerate edges instead of sampling for them).
    fn congestion_coefficient(&self, p: Node, q: Node, rho: &MassField) -> Option<f64>;
}

/// The built-in reciprocal-gap family as a [`CongestionCost`].
pub struct ReciprocalGapCost<'a> {
    params: &'a CostParams,
}

impl<'a> ReciprocalGapCost<'a> {
    pub fn new(params: &'a CostParams) -> Self {
        Self { params }
    }
}

impl CongestionCost for ReciprocalGapCost<'_> {
    fn switch_cost(&self, p: Node, q: Node, t: f64, tau: f64, rho: &MassField) -> Result<f64> {
        switch_cost(p, q, t, tau, rho, self.params)
    }

    fn horizon(&self) -> f64 {
        self.params.horizon()
    }

    fn congestion_coefficient(&self, p: Node, q: Node, rho: &MassField) -> Option<f64> {
        EdgeCongestion::new(self.params, rho)
            .ok()
            .and_then(|c| c.cbar(p, q).ok())
    }
}

/// Findings of the sampled assumption audit.
#[derive(Clone, Debug)]
pub struct AssumptionReport {
    /// Number of sampled (edge, t, tau) probes.
    pub samples: usize,
    /// True when cost never increased in the switching instant.
    pub tau_monotone_ok: bool,
    /// Worst observed increase `C(tau2) - C(tau1)` for `tau1 < tau2` (0 when monotone).
    pub worst_tau_violation: f64,
    /// True when shrinking the window by 1000x grew every sampled cost by >= 100x.
    pub blowup_ok: bool,
    /// Smallest observed cost ratio between the shrunken and wide windows.
    pub min_blowup_ratio: f64,
    /// Largest observed |dC/dt| difference quotient at window >= T/10.
    pub lipschitz_t_max_ratio: f64,
    /// Largest observed |dC| / l2-distance ratio under crowd perturbations.
    pub lipschitz_rho_max_ratio: f64,
    /// Edges with an exactly zero congestion coefficient.
    pub degenerate_edges: Vec<(usize, usize)>,
}

impl AssumptionReport {
    /// True when every audited assumption held.
    pub fn all_ok(&self) -> bool {
        self.tau_monotone_ok && self.blowup_ok && self.degenerate_edges.is_empty()
    }
}

/// Samples random edges, times and crowd perturbations and audits the model
/// assumptions: decrease in the switching instant, blow-up as the window
/// closes, and Lipschitz behaviour in `t` and in the crowd field.
pub fn validate_assumptions(
    cost: &dyn CongestionCost,
    rho: &MassField,
    samples: usize,
    seed: u64,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = cost.horizon();
    let targets = rho.targets();
    let edges: Vec<(Node, Node)> = (0..rho.node_count())
        .flat_map(|p| {
            let node = Node::with_cap(p, targets, 64).expect("id in range");
            successors(node).into_iter().map(move |q| (node, q))
        })
        .collect();

    let mut tau_monotone_ok = true;
    let mut worst_tau_violation = 0.0_f64;
    let mut min_blowup_ratio = f64::INFINITY;
    let mut lipschitz_t_max_ratio = 0.0_f64;
    let mut lipschitz_rho_max_ratio = 0.0_f64;

    let mut degenerate_edges = Vec::new();
    for (p, q) in &edges {
        if cost.congestion_coefficient(*p, *q, rho) == Some(0.0) {
            degenerate_edges.push((p.id(), q.id()));
        }
    }

    for _ in 0..samples {
        let (p, q) = edges[rng.gen_range(0..edges.len())];
        if degenerate_edges.contains(&(p.id(), q.id())) {
            continue; // degenerate edges are already reported
        }
        let t = rng.gen_range(0.0..0.5 * horizon);

        // Monotone decrease in tau.
        let tau1 = t + rng.gen_range(0.05..0.4) * horizon;
        let tau2 = tau1 + rng.gen_range(0.01..0.2) * horizon;
        if let (Ok(c1), Ok(c2)) = (
            cost.switch_cost(p, q, t, tau1, rho),
            cost.switch_cost(p, q, t, tau2, rho),
        ) {
            if c2 > c1 {
                tau_monotone_ok = false;
                worst_tau_violation = worst_tau_violation.max(c2 - c1);
            }
        }

        // Blow-up as the window closes: shrink the gap by 1000x.
        let wide = 0.2 * horizon;
        let narrow = wide / 1000.0;
        if let (Ok(cw), Ok(cn)) = (
            cost.switch_cost(p, q, t, t + wide, rho),
            cost.switch_cost(p, q, t, t + narrow, rho),
        ) {
            if cw > 0.0 {
                min_blowup_ratio = min_blowup_ratio.min(cn / cw);
            }
        }

        // Lipschitz in t at windows bounded away from zero.
        let gap = rng.gen_range(0.1..0.4) * horizon;
        let dt = rng.gen_range(0.001..0.01) * horizon;
        if t + dt + gap <= horizon {
            if let (Ok(ca), Ok(cb)) = (
                cost.switch_cost(p, q, t, t + gap, rho),
                cost.switch_cost(p, q, t + dt, t + dt + gap, rho),
            ) {
                lipschitz_t_max_ratio = lipschitz_t_max_ratio.max((ca - cb).abs() / dt);
            }
        }

        // Lipschitz in the crowd: mix toward a node-swapped variant.
        let theta = rng.gen_range(0.01..0.25);
        if let Ok(perturbed) = swap_perturbation(rho, &mut rng, theta) {
            if let (Ok(ca), Ok(cb), Ok(dist)) = (
                cost.switch_cost(p, q, t, t + gap.min(horizon - t - 1e-9), rho),
                cost.switch_cost(p, q, t, t + gap.min(horizon - t - 1e-9), &perturbed),
                crate::profile::field_l2_distance(rho, &perturbed),
            ) {
                if dist > 1e-12 {
                    lipschitz_rho_max_ratio = lipschitz_rho_max_ratio.max((ca - cb).abs() / dist);
                }
            }
        }
    }

    if !min_blowup_ratio.is_finite() {
        min_blowup_ratio = 0.0;
    }
    AssumptionReport {
        samples,
        tau_monotone_ok,
        worst_tau_violation,
        blowup_ok: min_blowup_ratio >= 100.0 && degenerate_edges.is_empty(),
        min_blowup_ratio,
        lipschitz_t_max_ratio,
        lipschitz_rho_max_ratio,
        degenerate_edges,
    }
}

/// Mass-conserving perturbation: mixes `rho` with a copy whose profiles at
/// two random nodes are swapped. `theta` controls the perturbation size.
fn swap_perturbation(rho: &MassField, rng: &mut ChaCha8Rng, theta: f64) -> Result<MassField> {
    let n = rho.node_count();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    let mut profiles = rho.profiles().to_vec();
    profiles.swap(a, b);
    let swapped = MassField::new(profiles, rho.targets())?;
    rho.convex_combination(&swapped, &crate::profile::mass_from_f64(1.0 - theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{mass_ratio, Mass, StepProfile};
    use num_traits::One;

    fn simple_params(n: usize) -> CostParams {
        CostParams::new(vec![1.0; 1 << n], n, 2.0, 1.0, 5.0).unwrap()
    }

    /// Crowd with every node holding positive constant mass (keeps all edges
    /// non-degenerate).
    fn busy_field(n: usize) -> MassField {
        let profiles = (0..(1usize << n))
            .map(|p| StepProfile::constant(mass_ratio(p as i64 + 1, 10), 2.0).unwrap())
            .collect();
        MassField::new(profiles, n).unwrap()
    }

    #[test]
    fn cbar_is_the_weighted_average_mass() {
        // One node with mass 1/2 parked forever, the other empty except for
        // transit: hand-computable integrals.
        let n = 1;
        let params = simple_params(n);
        let rho = MassField::parked(&[mass_ratio(1, 2), Mass::one()], n, 2.0).unwrap();
        let congestion = EdgeCongestion::new(&params, &rho).unwrap();
        // integrals: node0 = 1, node1 = 2; cbar = (1*1 + 1*2)/2 = 1.5
        let c = congestion
            .cbar(Node::new(0, 1).unwrap(), Node::new(1, 1).unwrap())
            .unwrap();
        assert_eq!(c, 1.5);
    }

    #[test]
    fn switch_cost_scales_reciprocally_in_the_gap() {
        let n = 1;
        let params = simple_params(n);
        let rho = busy_field(n);
        let p = Node::new(0, 1).unwrap();
        let q = Node::new(1, 1).unwrap();
        let c1 = switch_cost(p, q, 0.0, 0.5, &rho, &params).unwrap();
        let c2 = switch_cost(p, q, 0.0, 1.0, &rho, &params).unwrap();
        assert!((c1 - 2.0 * c2).abs() < 1e-12);
    }

    #[test]
    fn switch_cost_depends_only_on_the_integral() {
        // Same integral, different shapes: identical cost.
        let n = 1;
        let params = simple_params(n);
        let flat = MassField::new(
            vec![
                StepProfile::constant(mass_ratio(1, 2), 2.0).unwrap(),
                StepProfile::constant(mass_ratio(1, 2), 2.0).unwrap(),
            ],
            n,
        )
        .unwrap();
        let lumpy = MassField::new(
            vec![
                StepProfile::new(
                    vec![0.0, 1.0, 2.0],
                    vec![Mass::one(), Mass::from_integer(0.into())],
                    Mass::from_integer(0.into()),
                )
                .unwrap(),
                StepProfile::new(
                    vec![0.0, 1.0, 2.0],
                    vec![Mass::from_integer(0.into()), Mass::one()],
                    Mass::one(),
                )
                .unwrap(),
            ],
            n,
        )
        .unwrap();
        let p = Node::new(0, 1).unwrap();
        let q = Node::new(1, 1).unwrap();
        let a = switch_cost(p, q, 0.3, 1.1, &flat, &params).unwrap();
        let b = switch_cost(p, q, 0.3, 1.1, &lumpy, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn switch_cost_rejects_empty_window_and_degenerate_edge() {
        let n = 1;
        let params = simple_params(n);
        let rho = busy_field(n);
        let p = Node::new(0, 1).unwrap();
        let q = Node::new(1, 1).unwrap();
        match switch_cost(p, q, 1.0, 1.0, &rho, &params) {
            Err(Error::BadTimes { .. }) => {}
            other => panic!("expected BadTimes, got {other:?}"),
        }
        // Empty crowd: zero coefficient everywhere.
        let empty = MassField::parked(&[Mass::from_integer(0.into()), Mass::from_integer(0.into())], n, 2.0).unwrap();
        match switch_cost(p, q, 0.0, 1.0, &empty, &params) {
            Err(Error::DegenerateCost { .. }) => {}
            other => panic!("expected DegenerateCost, got {other:?}"),
        }
    }

    #[test]
    fn terminal_cost_cases() {
        let n = 2;
        let params = simple_params(n);
        let goal = Node::goal(n).unwrap();
        let origin = Node::origin(n).unwrap();
        // Early arrival at the goal: linear earliness.
        assert_eq!(terminal_cost(goal, 0.5, &params).unwrap(), 1.5);
        // Exactly at the horizon on the goal: zero, bit-exact.
        assert_eq!(terminal_cost(goal, 2.0, &params).unwrap(), 0.0);
        // Stranded at the origin: two unvisited targets.
        assert_eq!(terminal_cost(origin, 2.0, &params).unwrap(), 10.0);
        // Interior time off the goal: invalid.
        match terminal_cost(origin, 1.0, &params) {
            Err(Error::InvalidTerminalState { .. }) => {}
            other => panic!("expected InvalidTerminalState, got {other:?}"),
        }
    }

    #[test]
    fn path_cost_sums_switches_plus_terminal() {
        let n = 1;
        let params = simple_params(n);
        let rho = busy_field(n);
        let p = Node::new(0, 1).unwrap();
        let q = Node::new(1, 1).unwrap();
        let path = SwitchPath::new(vec![p, q], vec![0.0, 1.0], 2.0).unwrap();
        let expected = switch_cost(p, q, 0.0, 1.0, &rho, &params).unwrap()
            + terminal_cost(q, 1.0, &params).unwrap();
        assert_eq!(path_cost(&path, &rho, &params).unwrap(), expected);
    }

    #[test]
    fn assumptions_hold_for_the_built_in_family_on_a_busy_field() {
        let n = 2;
        let params = simple_params(n);
        let rho = busy_field(n);
        let report = validate_assumptions(&ReciprocalGapCost::new(&params), &rho, 200, 7);
        assert!(report.tau_monotone_ok, "{report:?}");
        assert!(report.blowup_ok, "{report:?}");
        assert!(report.degenerate_edges.is_empty());
        assert!(report.lipschitz_t_max_ratio.is_finite());
    }

    #[test]
    fn checker_flags_empty_crowd_as_degenerate() {
        let n = 1;
        let params = simple_params(n);
        let empty = MassField::parked(&[Mass::from_integer(0.into()), Mass::from_integer(0.into())], n, 2.0).unwrap();
        let report = validate_assumptions(&ReciprocalGapCost::new(&params), &empty, 50, 7);
        assert!(!report.blowup_ok);
        assert_eq!(report.degenerate_edges, vec![(0, 1)]);
    }

    #[test]
    fn checker_catches_a_cost_that_grows_with_the_window() {
        // Mutant: C = Cbar * (tau - t), increasing in tau.
        struct Growing<'a>(&'a CostParams);
        impl CongestionCost for Growing<'_> {
            fn switch_cost(
                &self,
                p: Node,
                q: Node,
                t: f64,
                tau: f64,
                rho: &MassField,
            ) -> Result<f64> {
                let c = EdgeCongestion::new(self.0, rho)?.cbar(p, q)?;
                Ok(c * (tau - t))
            }
            fn horizon(&self) -> f64 {
                self.0.horizon()
            }
            fn congestion_coefficient(&self, p: Node, q: Node, rho: &MassField) -> Option<f64> {
                EdgeCongestion::new(self.0, rho).ok().and_then(|c| c.cbar(p, q).ok())
            }
        }
        let n = 1;
        let params = simple_params(n);
        let rho = busy_field(n);
        let report = validate_assumptions(&Growing(&params), &rho, 100, 11);
        assert!(!report.tau_monotone_ok);
        assert!(report.worst_tau_violation > 0.0);
        assert!(!report.blowup_ok);
    }

    #[test]
    fn lipschitz_in_crowd_is_bounded_by_the_derived_constant() {
        // |C(rho1) - C(rho2)| <= (a(p) + a(q)) * sqrt(T) * dist / (T * (tau - t)).
        let n = 2;
        let params = simple_params(n);
        let rho = busy_field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Node::new(0, n).unwrap();
        let q = Node::new(1, n).unwrap();
        let (t, tau) = (0.2, 1.4);
        for _ in 0..50 {
            let theta = rng.gen_range(0.01..0.5);
            let other = swap_perturbation(&rho, &mut rng, theta).unwrap();
            let dist = crate::profile::field_l2_distance(&rho, &other).unwrap();
            if dist < 1e-12 {
                continue;
            }
            let ca = switch_cost(p, q, t, tau, &rho, &params).unwrap();
            let cb = switch_cost(p, q, t, tau, &other, &params).unwrap();
            let horizon = params.horizon();
            let bound = (params.weight(p) + params.weight(q)) * horizon.sqrt() * dist
                / (horizon * (tau - t));
            assert!(
                (ca - cb).abs() <= bound * (1.0 + 1e-12),
                "|dC| = {} > bound = {bound}",
                (ca - cb).abs()
            );
        }
    }
}
