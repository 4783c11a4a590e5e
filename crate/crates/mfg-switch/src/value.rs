//! Individual value functions against a fixed crowd field.
//!
//! The value `V(p, t)` is the least total cost an agent can still pay when
//! sitting at node `p` at time `t`, facing the crowd `rho`. Two solvers fill
//! the same table:
//!
//! * **Grid**: switching instants restricted to a uniform grid, solved by
//!   backward induction over node levels — `V(p, t_i) = min over successors
//!   q and grid instants t_j > t_i of Cbar(p,q)/(t_j - t_i) + V(q, t_j)`,
//!   with the terminal row pinned to the terminal cost. All tied minimizers
//!   are recorded.
//! * **Analytic**: free switching instants. Because both the reciprocal
//!   switch cost and the goal's earliness charge decrease in the switching
//!   instant, the *last* switch of any optimal control lands exactly on the
//!   horizon; the earlier instants satisfy interior stationarity conditions,
//!   solved in closed form for two remaining hops and by safeguarded
//!   one-dimensional minimization for longer chains. Every chain shape
//!   (including the truncated ones that stop short of the goal and pay the
//!   miss penalty) is enumerated, so this mode is meant for small networks.

use crate::cost::{terminal_cost, CostParams, EdgeCongestion};
use crate::error::{Error, Result};
use crate::net::{successors, Node};
use crate::profile::MassField;

/// Hard cap on grid resolution.
pub const MAX_STEPS: usize = 1 << 20;

/// Uniform time grid on `[0, T]` with `steps` intervals. All instants used
/// anywhere in the crate come from [`TimeGrid::t`], so equal indices always
/// produce bit-identical times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::ValidationError {
                message: format!("horizon T = {horizon} must be positive and finite"),
            });
        }
        if steps == 0 || steps > MAX_STEPS {
            return Err(Error::OutOfRange {
                context: format!("grid steps {steps} outside 1..={MAX_STEPS}"),
            });
        }
        Ok(Self { horizon, steps })
    }

    /// The canonical time of index `i`: `i * T / steps`.
    pub fn t(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        (i as f64) * self.horizon / (self.steps as f64)
    }

    /// `t(j) - t(i)` for `j > i`.
    pub fn span(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j && j <= self.steps);
        self.t(j) - self.t(i)
    }

    /// Grid spacing `T / steps`.
    pub fn step(&self) -> f64 {
        self.horizon / (self.steps as f64)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Which solver filled a [`ValueTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Switching instants restricted to the grid.
    Grid,
    /// Free switching instants via stationarity conditions.
    Analytic,
}

/// One minimizing first move: switch to node id `succ` at instant `tau`
/// (grid index `tau_idx` when the instant sits on the grid).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArgminPair {
    pub succ: usize,
    pub tau_idx: Option<usize>,
    pub tau: f64,
}

/// Solver options.
#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    /// Relative tie tolerance: pairs within `scale * (1 + |min|)` of the
    /// minimum are all recorded as minimizers.
    pub tie_tol_scale: f64,
    /// In grid mode, re-solve on a halved step whenever some minimizer sits
    /// at the first feasible instant, and fail if the value moves.
    pub grid_self_check: bool,
    /// Relative tolerance for the self-check comparison.
    pub self_check_tol: f64,
    /// Which solver to run.
    pub mode: SolveMode,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            tie_tol_scale: 1e-9,
            grid_self_check: true,
            self_check_tol: 1e-6,
            mode: SolveMode::Grid,
        }
    }
}

/// Value function of every node at every grid instant, with all tied
/// minimizing first moves.
#[derive(Clone, Debug)]
pub struct ValueTable {
    targets: usize,
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
    argmins: Vec<Vec<Vec<ArgminPair>>>,
    min_gap: f64,
    mode: SolveMode,
}

impl ValueTable {
    /// `V(p, t_i)`.
    pub fn value(&self, p: Node, i: usize) -> f64 {
        self.values[p.id()][i]
    }

    /// The full row of `V(p, .)` over the grid.
    pub fn row(&self, p: Node) -> &[f64] {
        &self.values[p.id()]
    }

    /// All minimizing first moves at `(p, t_i)`; empty on the goal and on
    /// terminal entries.
    pub fn argmins(&self, p: Node, i: usize) -> &[ArgminPair] {
        &self.argmins[p.id()][i]
    }

    /// Smallest optimal switching window `tau - t` over the whole table.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// True when no entry has tied minimizers.
    pub fn single_valued(&self) -> bool {
        self.argmins
            .iter()
            .flatten()
            .all(|pairs| pairs.len() <= 1)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn targets(&self) -> usize {
        self.targets
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }
}

/// Solves the value function of every node against the crowd `rho` on a
/// uniform grid with `steps` intervals.
pub fn solve_value(
    params: &CostParams,
    rho: &MassField,
    steps: usize,
    opts: &SolveOpts,
) -> Result<ValueTable> {
    let grid = TimeGrid::new(params.horizon(), steps)?;
    let congestion = EdgeCongestion::new(params, rho)?;
    if let Some((p, q)) = congestion.degenerate_edges().first() {
        let (p, q) = (
            Node::with_cap(*p, params.targets(), 64)?,
            Node::with_cap(*q, params.targets(), 64)?,
        );
        return Err(Error::DegenerateCost {
            context: format!(
                "edge {} -> {} has zero congestion coefficient; the value \
                 recursion needs every edge cost to blow up on short windows",
                p.bit_string(),
                q.bit_string()
            ),
        });
    }
    match opts.mode {
        SolveMode::Grid => solve_grid(params, &congestion, grid, opts),
        SolveMode::Analytic => solve_analytic(params, &congestion, grid, opts),
    }
}

fn solve_grid(
    params: &CostParams,
    congestion: &EdgeCongestion,
    grid: TimeGrid,
    opts: &SolveOpts,
) -> Result<ValueTable> {
    let targets = params.targets();
    let n = 1usize << targets;
    let steps = grid.steps();
    let mut values = vec![vec![0.0_f64; steps + 1]; n];
    let mut argmins: Vec<Vec<Vec<ArgminPair>>> = vec![vec![Vec::new(); steps + 1]; n];
    let mut min_gap = f64::INFINITY;
    // Entries whose every minimizer sits at the first feasible instant;
    // candidates for a resolution failure.
    let mut suspicious: Vec<(usize, usize)> = Vec::new();

    // Nodes by decreasing number of visited targets: successors first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|p| std::cmp::Reverse(p.count_ones()));

    for &pid in &order {
        let p = Node::with_cap(pid, targets, 64)?;
        if p.is_goal() {
            for i in 0..=steps {
                values[pid][i] = terminal_cost(p, grid.t(i), params)?;
            }
            continue;
        }
        values[pid][steps] = terminal_cost(p, grid.horizon(), params)?;
        let succs: Vec<(Node, f64)> = successors(p)
            .into_iter()
            .map(|q| congestion.cbar(p, q).map(|c| (q, c)))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..steps {
            let mut vmin = f64::INFINITY;
            for &(q, cbar) in &succs {
                for j in (i + 1)..=steps {
                    let cand = cbar / grid.span(i, j) + values[q.id()][j];
                    if cand < vmin {
                        vmin = cand;
                    }
                }
            }
            let tie_tol = opts.tie_tol_scale * (1.0 + vmin.abs());
            let mut pairs = Vec::new();
            for &(q, cbar) in &succs {
                for j in (i + 1)..=steps {
                    let cand = cbar / grid.span(i, j) + values[q.id()][j];
                    if cand <= vmin + tie_tol {
                        pairs.push(ArgminPair {
                            succ: q.id(),
                            tau_idx: Some(j),
                            tau: grid.t(j),
                        });
                        min_gap = min_gap.min(grid.span(i, j));
                    }
                }
            }
            if pairs.iter().all(|pr| pr.tau_idx == Some(i + 1)) {
                suspicious.push((pid, i));
            }
            values[pid][i] = vmin;
            argmins[pid][i] = pairs;
        }
    }

    if opts.grid_self_check && !suspicious.is_empty() {
        let fine_grid = TimeGrid::new(grid.horizon(), steps.checked_mul(2).unwrap_or(usize::MAX))?;
        let fine = solve_grid(
            params,
            congestion,
            fine_grid,
            &SolveOpts {
                grid_self_check: false,
                ..*opts
            },
        )?;
        for (pid, i) in suspicious {
            let coarse_v = values[pid][i];
            let fine_v = fine.values[pid][2 * i];
            if (coarse_v - fine_v).abs() > opts.self_check_tol * (1.0 + coarse_v.abs()) {
                return Err(Error::GridTooCoarse {
                    node: pid,
                    t_idx: i,
                    delta: grid.step(),
                });
            }
        }
    }

    Ok(ValueTable {
        targets,
        grid,
        values,
        argmins,
        min_gap,
        mode: SolveMode::Grid,
    })
}

// ---------------------------------------------------------------------------
// Analytic mode
// ---------------------------------------------------------------------------

/// Optimal interior switching instant for the two-hop tail
/// `c_in/(phi - t) + c_out/(T - phi)`: stationarity gives
/// `phi = (s T + t) / (s + 1)` with `s = sqrt(c_in / c_out)`.
pub fn phi_two_step(c_in: f64, c_out: f64, t: f64, horizon: f64) -> Result<f64> {
    if !(c_in > 0.0) || !(c_out > 0.0) || !c_in.is_finite() || !c_out.is_finite() {
        return Err(Error::DegenerateCost {
            context: format!("two-hop coefficients must be positive, got {c_in}, {c_out}"),
        });
    }
    if !(t < horizon) {
        return Err(Error::BadTimes {
            context: format!("need t < T, got t = {t}, T = {horizon}"),
        });
    }
    let s = (c_in / c_out).sqrt();
    Ok((s * horizon + t) / (s + 1.0))
}

/// Least value of `coeffs[0]/(phi_1 - t) + coeffs[1]/(phi_2 - phi_1) + ...`
/// where the final hop is pinned at the horizon and `tail_constant` is added
/// at the end. Returns the free interior instants (one fewer than the number
/// of hops) and the value.
pub fn solve_chain(
    coeffs: &[f64],
    tail_constant: f64,
    t: f64,
    horizon: f64,
) -> Result<(Vec<f64>, f64)> {
    if coeffs.is_empty() {
        return Err(Error::BadCoefficients {
            context: "chain needs at least one hop".into(),
        });
    }
    if coeffs.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
        return Err(Error::DegenerateCost {
            context: "chain coefficients must be positive and finite".into(),
        });
    }
    if !(t < horizon) {
        return Err(Error::BadTimes {
            context: format!("need t < T, got t = {t}, T = {horizon}"),
        });
    }
    let mut instants = Vec::with_capacity(coeffs.len() - 1);
    let mut u = t;
    let mut value = 0.0;
    // Peel hops off the front; each front instant is optimal against the
    // exact remaining tail, so recomputing the remainder from the chosen
    // instant reproduces the jointly optimal plan.
    let mut rest = coeffs;
    while rest.len() > 1 {
        let (phi, _) = chain_front(rest, tail_constant, u, horizon)?;
        value += rest[0] / (phi - u);
        instants.push(phi);
        u = phi;
        rest = &rest[1..];
    }
    value += rest[0] / (horizon - u) + tail_constant;
    Ok((instants, value))
}

/// First free instant and total value of a chain with at least two hops.
fn chain_front(coeffs: &[f64], tail_constant: f64, u: f64, horizon: f64) -> Result<(f64, f64)> {
    debug_assert!(coeffs.len() >= 2);
    if coeffs.len() == 2 {
        let phi = phi_two_step(coeffs[0], coeffs[1], u, horizon)?;
        let value = coeffs[0] / (phi - u) + coeffs[1] / (horizon - phi) + tail_constant;
        return Ok((phi, value));
    }
    // Objective g(phi) = c0/(phi - u) + W(phi) with W the optimal tail value
    // from phi; g is convex with infinite boundary limits, so golden-section
    // search converges to the interior minimum.
    let tail = &coeffs[1..];
    let g = |phi: f64| -> Result<f64> {
        let (_, w) = chain_front(tail, tail_constant, phi, horizon)?;
        Ok(coeffs[0] / (phi - u) + w)
    };
    let (phi, value) = golden_min(&g, u, horizon)?;
    Ok((phi, value))
}

/// Golden-section search for the interior minimum of a convex function on
/// `(lo, hi)` whose value blows up at both ends.
fn golden_min(g: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let width = hi - lo;
    let mut a = lo + 1e-13 * width;
    let mut b = hi - 1e-13 * width;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    for _ in 0..300 {
        if b - a <= 1e-14 * width {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = g(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, g(x)?))
}

/// Every ascending chain out of `p`: sequences of nodes each adding one
/// target, ending anywhere above `p` (the goal included).
fn chains_from(p: Node) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![p]];
    while let Some(chain) = stack.pop() {
        let last = *chain.last().expect("non-empty");
        if chain.len() > 1 {
            out.push(chain.clone());
        }
        for q in successors(last) {
            let mut longer = chain.clone();
            longer.push(q);
            stack.push(longer);
        }
    }
    out
}

fn solve_analytic(
    params: &CostParams,
    congestion: &EdgeCongestion,
    grid: TimeGrid,
    opts: &SolveOpts,
) -> Result<ValueTable> {
    let targets = params.targets();
    let n = 1usize << targets;
    let steps = grid.steps();
    let mut values = vec![vec![0.0_f64; steps + 1]; n];
    let mut argmins: Vec<Vec<Vec<ArgminPair>>> = vec![vec![Vec::new(); steps + 1]; n];
    let mut min_gap = f64::INFINITY;

    for pid in 0..n {
        let p = Node::with_cap(pid, targets, 64)?;
        values[pid][steps] = terminal_cost(p, grid.horizon(), params)?;
        if p.is_goal() {
            for i in 0..steps {
                values[pid][i] = terminal_cost(p, grid.t(i), params)?;
            }
            continue;
        }
        let chains = chains_from(p);
        // Precompute each chain's edge coefficients and terminal constant.
        let prepared: Vec<(Vec<f64>, f64, usize)> = chains
            .iter()
            .map(|chain| {
                let coeffs: Vec<f64> = chain
                    .windows(2)
                    .map(|w| congestion.cbar(w[0], w[1]))
                    .collect::<Result<Vec<_>>>()?;
                let k = terminal_cost(*chain.last().expect("non-empty"), grid.horizon(), params)?;
                Ok((coeffs, k, chain[1].id()))
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..steps {
            let t = grid.t(i);
            let mut best = f64::INFINITY;
            let mut solved: Vec<(f64, f64, usize)> = Vec::new(); // (value, first tau, succ)
            for (coeffs, k, succ) in &prepared {
                let (instants, value) = solve_chain(coeffs, *k, t, grid.horizon())?;
                let tau = instants.first().copied().unwrap_or(grid.horizon());
                solved.push((value, tau, *succ));
                if value < best {
                    best = value;
                }
            }
            let tie_tol = opts.tie_tol_scale * (1.0 + best.abs());
            let mut pairs: Vec<ArgminPair> = Vec::new();
            for (value, tau, succ) in solved {
                if value <= best + tie_tol {
                    let duplicate = pairs
                        .iter()
                        .any(|pr| pr.succ == succ && (pr.tau - tau).abs() <= 1e-9 * grid.horizon());
                    if !duplicate {
                        pairs.push(ArgminPair {
                            succ,
                            tau_idx: grid_index_of(grid, tau),
                            tau,
                        });
                        min_gap = min_gap.min(tau - t);
                    }
                }
            }
            pairs.sort_by(|a, b| {
                (a.succ, a.tau)
                    .partial_cmp(&(b.succ, b.tau))
                    .expect("finite instants")
            });
            values[pid][i] = best;
            argmins[pid][i] = pairs;
        }
    }

    Ok(ValueTable {
        targets,
        grid,
        values,
        argmins,
        min_gap,
        mode: SolveMode::Analytic,
    })
}

/// Grid index of `tau` when it lies on the grid up to a relative tolerance.
fn grid_index_of(grid: TimeGrid, tau: f64) -> Option<usize> {
    let step = grid.step();
    let j = (tau / step).round() as usize;
    if j <= grid.steps() && (grid.t(j) - tau).abs() <= 1e-9 * grid.horizon() {
        Some(j)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{mass_ratio, MassField, StepProfile};

    fn uniform_quarter_field(targets: usize, horizon: f64) -> MassField {
        let n = 1usize << targets;
        let profiles = (0..n)
            .map(|_| StepProfile::constant(mass_ratio(1, n as i64), horizon).unwrap())
            .collect();
        MassField::new(profiles, targets).unwrap()
    }

    fn sym2_params() -> CostParams {
        CostParams::new(vec![1.0; 4], 2, 2.0, 1.0, 5.0).unwrap()
    }

    #[test]
    fn grid_times_use_the_canonical_expression() {
        let grid = TimeGrid::new(2.0, 40).unwrap();
        for i in 0..=40 {
            assert_eq!(grid.t(i), (i as f64) * 2.0 / 40.0);
        }
        assert_eq!(grid.t(40), 2.0);
        assert_eq!(grid.span(10, 25), grid.t(25) - grid.t(10));
    }

    #[test]
    fn two_step_instant_matches_the_hand_derivation() {
        // Entering coefficient 1, leaving 4, from 0 with horizon 2: 2/3.
        let phi = phi_two_step(1.0, 4.0, 0.0, 2.0).unwrap();
        assert!((phi - 2.0 / 3.0).abs() < 1e-15);
        // And it is a true stationary point of c_in/(phi-t) + c_out/(T-phi).
        let g = |x: f64| 1.0 / x + 4.0 / (2.0 - x);
        assert!(g(phi) < g(phi - 1e-6));
        assert!(g(phi) < g(phi + 1e-6));
    }

    #[test]
    fn chain_with_one_hop_prices_the_pinned_final_switch() {
        let (instants, value) = solve_chain(&[1.5], 0.25, 0.5, 2.0).unwrap();
        assert!(instants.is_empty());
        assert_eq!(value, 1.5 / 1.5 + 0.25);
    }

    #[test]
    fn three_hop_chain_matches_a_brute_grid_scan() {
        // Minimize c1/(a-t) + c2/(b-a) + c3/(T-b) by dense scan.
        let (c1, c2, c3, t, horizon) = (1.0, 2.0, 0.5, 0.25, 2.0);
        let mut best = f64::INFINITY;
        let k = 2000;
        for ia in 1..k {
            let a = t + (horizon - t) * ia as f64 / k as f64;
            for ib in (ia + 1)..k {
                let b = t + (horizon - t) * ib as f64 / k as f64;
                let v = c1 / (a - t) + c2 / (b - a) + c3 / (horizon - b);
                if v < best {
                    best = v;
                }
            }
        }
        let (instants, value) = solve_chain(&[c1, c2, c3], 0.0, t, horizon).unwrap();
        assert_eq!(instants.len(), 2);
        assert!(instants[0] < instants[1] && instants[1] < horizon);
        assert!(
            (value - best).abs() < 1e-5,
            "chain value {value} vs scan {best}"
        );
    }

    #[test]
    fn one_target_row_is_the_reciprocal_of_the_remaining_window() {
        let params = CostParams::new(vec![1.0, 1.0], 1, 2.0, 1.0, 5.0).unwrap();
        let rho = uniform_quarter_field(1, 2.0);
        let table = solve_value(&params, &rho, 16, &SolveOpts::default()).unwrap();
        let grid = table.grid();
        let origin = Node::origin(1).unwrap();
        let congestion = EdgeCongestion::new(&params, &rho).unwrap();
        let cbar = congestion.cbar(origin, Node::goal(1).unwrap()).unwrap();
        for i in 0..16 {
            // Bit-exact: the best move is the pinned final switch, priced by
            // the identical span expression.
            assert_eq!(table.value(origin, i), cbar / grid.span(i, 16));
            assert_eq!(table.argmins(origin, i), &[ArgminPair {
                succ: 1,
                tau_idx: Some(16),
                tau: 2.0
            }]);
        }
    }

    #[test]
    fn symmetric_two_target_grid_values_match_the_hand_solution() {
        let params = sym2_params();
        let rho = uniform_quarter_field(2, 2.0);
        // steps = 40 puts t = 0.5, 1.8 and the interior optima on the grid.
        let table = solve_value(&params, &rho, 40, &SolveOpts::default()).unwrap();
        let origin = Node::origin(2).unwrap();
        let mid = Node::new(1, 2).unwrap();
        assert!((table.value(origin, 0) - 1.0).abs() < 1e-12);
        assert!((table.value(origin, 10) - 4.0 / 3.0).abs() < 1e-12);
        assert!((table.value(mid, 10) - 1.0 / 3.0).abs() < 1e-12);
        // Past the crossover the one-switch miss-penalty control wins.
        assert!((table.value(origin, 36) - 7.5).abs() < 1e-12);
        // Symmetry: both first moves are tied at the interior optimum 1.0.
        let pairs = table.argmins(origin, 0);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].succ, 1);
        assert_eq!(pairs[1].succ, 2);
        assert_eq!(pairs[0].tau, 1.0);
        assert_eq!(pairs[1].tau, 1.0);
    }

    #[test]
    fn analytic_mode_agrees_with_the_grid_on_resolved_instants() {
        let params = sym2_params();
        let rho = uniform_quarter_field(2, 2.0);
        let grid_table = solve_value(&params, &rho, 40, &SolveOpts::default()).unwrap();
        let analytic = solve_value(
            &params,
            &rho,
            40,
            &SolveOpts {
                mode: SolveMode::Analytic,
                ..Default::default()
            },
        )
        .unwrap();
        let origin = Node::origin(2).unwrap();
        // t = 0 and t = 0.5 have their true optima on the grid.
        for &i in &[0usize, 10] {
            assert!(
                (grid_table.value(origin, i) - analytic.value(origin, i)).abs() < 1e-12,
                "i = {i}"
            );
        }
        // The interior instant is (2 + t)/2.
        let pairs = analytic.argmins(origin, 10);
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].tau - 1.25).abs() < 1e-9);
        // Off-grid t: analytic is strictly no worse than the grid.
        for i in [3usize, 7, 13, 29] {
            assert!(analytic.value(origin, i) <= grid_table.value(origin, i) + 1e-12);
        }
    }

    #[test]
    fn coarse_grid_that_cannot_resolve_the_chain_is_rejected() {
        let params = sym2_params();
        let rho = uniform_quarter_field(2, 2.0);
        // One interval: the only chain through two switches is crushed onto
        // the single instant T, and halving the step drops the value a lot.
        match solve_value(&params, &rho, 1, &SolveOpts::default()) {
            Err(Error::GridTooCoarse { node: 0, t_idx: 0, .. }) => {}
            other => panic!("expected GridTooCoarse at the origin row, got {other:?}"),
        }
        // With the self-check off, the same solve goes through.
        let table = solve_value(
            &params,
            &rho,
            1,
            &SolveOpts {
                grid_self_check: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((table.value(Node::origin(2).unwrap(), 0) - 5.25).abs() < 1e-12);
    }

    #[test]
    fn parked_crowd_leaves_degenerate_edges_and_is_rejected() {
        let params = sym2_params();
        let rho = MassField::parked(
            &[
                mass_ratio(1, 1),
                mass_ratio(0, 1),
                mass_ratio(0, 1),
                mass_ratio(0, 1),
            ],
            2,
            2.0,
        )
        .unwrap();
        match solve_value(&params, &rho, 8, &SolveOpts::default()) {
            Err(Error::DegenerateCost { .. }) => {}
            other => panic!("expected DegenerateCost, got {other:?}"),
        }
    }

    #[test]
    fn min_gap_reports_the_tightest_optimal_window() {
        let params = sym2_params();
        let rho = uniform_quarter_field(2, 2.0);
        let table = solve_value(&params, &rho, 40, &SolveOpts::default()).unwrap();
        // The mid nodes switch at the horizon from every instant, so the
        // window from the last interior instant is a single step.
        assert!((table.min_gap() - table.grid().step()).abs() < 1e-15);
    }
}
