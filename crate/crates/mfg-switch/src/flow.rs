//! Crowd evolutions generated by rounded best responses.
//!
//! A **path** is a trajectory an agent can follow on the partition: nodes
//! joined by single-target switches at strictly increasing partition
//! instants. A **decision plan** assigns, to every (node, arrival instant)
//! pair it covers, an exact rational split over allowed moves. Pushing the
//! initial distribution through a plan yields a piecewise-constant crowd
//! evolution (**combine**), with every value kept as an exact rational so
//! conservation holds with zero tolerance. A single path carries an
//! **extremal** evolution. The reverse direction — deciding whether a given
//! crowd evolution could have been generated by *some* plan supported on
//! the rounded best responses — is **certification**: the plan is recovered
//! cell by cell from the evolution and the reconstruction is replayed and
//! compared against the candidate.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::discretize::{eps_argmin_map, EpsPartition, EpsTarget};
use crate::error::{Error, Result};
use crate::net::Node;
use crate::profile::{
    field_l2_distance, mass_from_f64, mass_to_f64, Mass, MassField, StepProfile,
};
use crate::value::ValueTable;

/// Default cap on enumerated paths.
pub const DEFAULT_PATH_BOUND: usize = 10_000;

/// A single-agent trajectory on the partition: `nodes[0]` from instant 0,
/// switching into `nodes[i]` at partition instant `switch_idxs[i-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsPath {
    nodes: Vec<Node>,
    switch_idxs: Vec<usize>,
}

impl EpsPath {
    pub fn new(nodes: Vec<Node>, switch_idxs: Vec<usize>, cells: usize) -> Result<Self> {
        if nodes.is_empty() || switch_idxs.len() + 1 != nodes.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "path with {} nodes and {} switch instants",
                    nodes.len(),
                    switch_idxs.len()
                ),
            });
        }
        for w in nodes.windows(2) {
            let step = w[1].id() & !w[0].id();
            if (w[0].id() & !w[1].id()) != 0 || step.count_ones() != 1 {
                return Err(Error::NotAPath {
                    context: format!(
                        "{} -> {} is not a single added target",
                        w[0].bit_string(),
                        w[1].bit_string()
                    ),
                });
            }
        }
        let mut prev = 0usize;
        for &k in &switch_idxs {
            if k <= prev || k > cells {
                return Err(Error::BadTimes {
                    context: format!(
                        "switch instants must increase strictly within 1..={cells}, got {k} after {prev}"
                    ),
                });
            }
            prev = k;
        }
        Ok(Self { nodes, switch_idxs })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Partition instants of the switches (one fewer than nodes).
    pub fn switch_indices(&self) -> &[usize] {
        &self.switch_idxs
    }
}

/// One allowed move with its exact weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanTarget {
    pub succ: usize,
    pub part_idx: usize,
    pub weight: Mass,
}

/// Exact rational decision plan: for each covered (node, arrival instant),
/// a distribution over moves. Weights per rule sum to one exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionPlan {
    targets: usize,
    cells: usize,
    rules: BTreeMap<(usize, usize), Vec<PlanTarget>>,
}

impl DecisionPlan {
    pub fn new(targets: usize, cells: usize) -> Self {
        Self {
            targets,
            cells,
            rules: BTreeMap::new(),
        }
    }

    /// Adds the rule for `(node, arrival instant k)`. Moves must go to
    /// distinct (successor, instant) pairs with instants in `(k, cells]`,
    /// and the weights must be non-negative and sum to one exactly.
    pub fn insert_rule(
        &mut self,
        node: usize,
        k: usize,
        moves: Vec<PlanTarget>,
    ) -> Result<()> {
        let p = Node::new(node, self.targets)?;
        if moves.is_empty() {
            return Err(Error::ValidationError {
                message: format!("empty rule at node {node}, instant {k}"),
            });
        }
        let mut sum = Mass::zero();
        for mv in &moves {
            let q = Node::new(mv.succ, self.targets)?;
            let step = q.id() & !p.id();
            if (p.id() & !q.id()) != 0 || step.count_ones() != 1 {
                return Err(Error::NotAPath {
                    context: format!("{} -> {} is not an edge", p.bit_string(), q.bit_string()),
                });
            }
            if mv.part_idx <= k || mv.part_idx > self.cells {
                return Err(Error::BadTimes {
                    context: format!(
                        "move instant {} outside ({k}, {}]",
                        mv.part_idx, self.cells
                    ),
                });
            }
            if mv.weight < Mass::zero() {
                return Err(Error::ValidationError {
                    message: "negative plan weight".into(),
                });
            }
            if moves
                .iter()
                .filter(|o| o.succ == mv.succ && o.part_idx == mv.part_idx)
                .count()
                > 1
            {
                return Err(Error::ValidationError {
                    message: format!(
                        "duplicate move (node {}, instant {}) in one rule",
                        mv.succ, mv.part_idx
                    ),
                });
            }
            sum += &mv.weight;
        }
        if !sum.is_one() {
            return Err(Error::ValidationError {
                message: format!("rule weights at node {node}, instant {k} sum to {sum}, not 1"),
            });
        }
        self.rules.insert((node, k), moves);
        Ok(())
    }

    pub fn rule(&self, node: usize, k: usize) -> Option<&[PlanTarget]> {
        self.rules.get(&(node, k)).map(|v| v.as_slice())
    }

    pub fn rules(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<PlanTarget>)> {
        self.rules.iter()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn targets(&self) -> usize {
        self.targets
    }
}

/// Every path supported on the rounded best responses from a start node,
/// with the decision table they came from.
#[derive(Clone, Debug)]
pub struct PathSet {
    pub paths: Vec<EpsPath>,
    /// (node, arrival instant) -> allowed moves.
    pub decision_targets: BTreeMap<(usize, usize), Vec<EpsTarget>>,
    /// Rounding collisions encountered while building the decision table.
    pub collisions: usize,
}

/// Enumerates every trajectory following rounded best responses from
/// `start` at instant 0. Fails with [`Error::PathExplosion`] beyond
/// `path_bound` paths.
pub fn enumerate_eps_paths(
    table: &ValueTable,
    part: &EpsPartition,
    start: Node,
    path_bound: usize,
) -> Result<PathSet> {
    let mut paths = Vec::new();
    let mut decision_targets: BTreeMap<(usize, usize), Vec<EpsTarget>> = BTreeMap::new();
    let mut collisions = 0usize;
    let mut stack: Vec<(Vec<Node>, Vec<usize>)> = vec![(vec![start], Vec::new())];
    while let Some((nodes, idxs)) = stack.pop() {
        let last = *nodes.last().expect("non-empty");
        let k = idxs.last().copied().unwrap_or(0);
        let done = last.is_goal() || k == part.cells();
        let moves = if done {
            &[][..]
        } else {
            if !decision_targets.contains_key(&(last.id(), k)) {
                let (targets, c) = eps_argmin_map(table, part, last, k)?;
                collisions += c;
                decision_targets.insert((last.id(), k), targets);
            }
            decision_targets
                .get(&(last.id(), k))
                .expect("just inserted")
                .as_slice()
        };
        if moves.is_empty() {
            if paths.len() >= path_bound {
                return Err(Error::PathExplosion { bound: path_bound });
            }
            paths.push(EpsPath::new(nodes, idxs, part.cells())?);
            continue;
        }
        for mv in moves {
            let mut nodes2 = nodes.clone();
            let mut idxs2 = idxs.clone();
            nodes2.push(Node::new(mv.succ, start.targets())?);
            idxs2.push(mv.part_idx);
            stack.push((nodes2, idxs2));
        }
    }
    paths.sort_by(|a, b| {
        let ka: Vec<usize> = a.nodes.iter().map(|n| n.id()).collect();
        let kb: Vec<usize> = b.nodes.iter().map(|n| n.id()).collect();
        (ka, &a.switch_idxs).cmp(&(kb, &b.switch_idxs))
    });
    Ok(PathSet {
        paths,
        decision_targets,
        collisions,
    })
}

/// The plan splitting every covered decision uniformly over its moves.
pub fn uniform_plan(set: &PathSet, targets: usize, cells: usize) -> Result<DecisionPlan> {
    let mut plan = DecisionPlan::new(targets, cells);
    for ((node, k), moves) in &set.decision_targets {
        if moves.is_empty() {
            continue;
        }
        let w = Mass::new(1.into(), (moves.len() as i64).into());
        plan.insert_rule(
            *node,
            *k,
            moves
                .iter()
                .map(|mv| PlanTarget {
                    succ: mv.succ,
                    part_idx: mv.part_idx,
                    weight: w.clone(),
                })
                .collect(),
        )?;
    }
    Ok(plan)
}

/// Pushes the initial distribution through a plan. Mass accounting is exact:
/// cell masses are rationals, every split preserves the parcel total, and a
/// parcel with no applicable rule parks where it is through the horizon.
pub fn combine(
    initial: &[(usize, Mass)],
    plan: &DecisionPlan,
    part: &EpsPartition,
) -> Result<MassField> {
    let targets = plan.targets();
    let n = 1usize << targets;
    let m = part.cells();
    if plan.cells() != m {
        return Err(Error::DimensionMismatch {
            context: format!("plan over {} cells, partition over {m}", plan.cells()),
        });
    }
    let mut cells: Vec<Vec<Mass>> = vec![vec![Mass::zero(); m]; n];
    let mut terminal: Vec<Mass> = vec![Mass::zero(); n];

    // Parcels keyed by (arrival instant, node); ascending order guarantees
    // every contribution to a parcel lands before the parcel is popped,
    // because plan instants increase strictly along any trajectory.
    let mut queue: BTreeMap<(usize, usize), Mass> = BTreeMap::new();
    for (node, mass) in initial {
        if *node >= n {
            return Err(Error::OutOfRange {
                context: format!("initial node id {node} outside 0..{n}"),
            });
        }
        if *mass < Mass::zero() {
            return Err(Error::ValidationError {
                message: "negative initial mass".into(),
            });
        }
        *queue.entry((0, *node)).or_insert_with(Mass::zero) += mass.clone();
    }

    while let Some((&(k, p), _)) = queue.iter().next() {
        let mass = queue.remove(&(k, p)).expect("key just seen");
        if mass.is_zero() {
            continue;
        }
        match plan.rule(p, k) {
            Some(rule) => {
                for mv in rule {
                    let child = &mass * &mv.weight;
                    if child.is_zero() {
                        continue;
                    }
                    for cell in cells[p].iter_mut().take(mv.part_idx).skip(k) {
                        *cell += &child;
                    }
                    *queue
                        .entry((mv.part_idx, mv.succ))
                        .or_insert_with(Mass::zero) += child;
                }
            }
            None => {
                for cell in cells[p].iter_mut().skip(k) {
                    *cell += &mass;
                }
                terminal[p] += mass;
            }
        }
    }

    let breakpoints: Vec<f64> = (0..=m).map(|k| part.time(k)).collect();
    let profiles = (0..n)
        .map(|p| StepProfile::new(breakpoints.clone(), cells[p].clone(), terminal[p].clone()))
        .collect::<Result<Vec<_>>>()?;
    MassField::new(profiles, targets)
}

/// The evolution with all of `total` riding a single path.
pub fn extremal_evolution(path: &EpsPath, total: &Mass, part: &EpsPartition) -> Result<MassField> {
    let targets = path.nodes()[0].targets();
    let mut plan = DecisionPlan::new(targets, part.cells());
    let mut k = 0usize;
    for (i, &next_k) in path.switch_indices().iter().enumerate() {
        plan.insert_rule(
            path.nodes()[i].id(),
            k,
            vec![PlanTarget {
                succ: path.nodes()[i + 1].id(),
                part_idx: next_k,
                weight: Mass::one(),
            }],
        )?;
        k = next_k;
    }
    combine(&[(path.nodes()[0].id(), total.clone())], &plan, part)
}

/// A plan that just moves everyone toward the goal at (roughly) equispaced
/// instants, splitting uniformly over open targets. Needs no value table;
/// used to seed fields where every edge sees traffic.
pub fn transit_plan(targets: usize, cells: usize, initial_nodes: &[usize]) -> Result<DecisionPlan> {
    let mut plan = DecisionPlan::new(targets, cells);
    let mut stack: Vec<(usize, usize)> = initial_nodes.iter().map(|&p| (p, 0)).collect();
    let mut seen: Vec<(usize, usize)> = Vec::new();
    while let Some((p, k)) = stack.pop() {
        if seen.contains(&(p, k)) {
            continue;
        }
        seen.push((p, k));
        let node = Node::new(p, targets)?;
        let open = targets - node.ones_count();
        if node.is_goal() || k >= cells || open == 0 {
            continue;
        }
        let stride = ((cells - k) / open).max(1);
        let next_k = (k + stride).min(cells);
        let succs = crate::net::successors(node);
        let w = Mass::new(1.into(), (succs.len() as i64).into());
        plan.insert_rule(
            p,
            k,
            succs
                .iter()
                .map(|q| PlanTarget {
                    succ: q.id(),
                    part_idx: next_k,
                    weight: w.clone(),
                })
                .collect(),
        )?;
        for q in succs {
            stack.push((q.id(), next_k));
        }
    }
    Ok(plan)
}

/// Outcome of membership certification.
#[derive(Clone, Debug)]
pub enum Certification {
    /// A generating plan was recovered and replays the candidate within
    /// tolerance.
    Certified {
        plan: DecisionPlan,
        l2_residual: f64,
        sup_residual: f64,
        /// Multi-move splits resolved by the equal-split fallback.
        ambiguous_splits: usize,
        /// Decision points never exercised by mass, filled uniformly.
        free_decisions: usize,
    },
    /// No plan supported on the rounded best responses replays the
    /// candidate: first offending cell and its mass error.
    Refused {
        node: usize,
        /// Cell index, or `cells` for the terminal instant.
        time_idx: usize,
        residual: f64,
        reason: String,
    },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified { .. })
    }
}

struct Parcel {
    m_init: Mass,
    remaining: Mass,
    by_instant: BTreeMap<usize, Vec<usize>>,
    last_instant: Option<usize>,
    alloc: BTreeMap<(usize, usize), Mass>,
}

/// Average cell values and terminal values of a field on the partition.
fn cell_values(field: &MassField, part: &EpsPartition) -> Result<(Vec<Vec<Mass>>, Vec<Mass>)> {
    let m = part.cells();
    let mut cells = Vec::with_capacity(field.node_count());
    let mut terminal = Vec::with_capacity(field.node_count());
    for p in 0..field.node_count() {
        let profile = field.profile(p)?;
        let mut row = Vec::with_capacity(m);
        for c in 0..m {
            let (a, b) = (part.time(c), part.time(c + 1));
            let len = mass_from_f64(b)? - mass_from_f64(a)?;
            row.push(profile.integral_exact(a, b)? / len);
        }
        cells.push(row);
        terminal.push(profile.terminal().clone());
    }
    Ok((cells, terminal))
}

/// Decides whether `candidate` is a crowd evolution generated by some plan
/// supported on the rounded best responses of `table`, starting from
/// `initial`. The plan is recovered forward in time from the candidate's
/// cell masses; the recovered plan is then replayed and compared with the
/// candidate, and certification succeeds only if the replay matches within
/// `tol` in both the cell sup norm and the field L2 norm.
pub fn certify_membership(
    candidate: &MassField,
    initial: &[(usize, Mass)],
    table: &ValueTable,
    part: &EpsPartition,
    tol: f64,
) -> Result<Certification> {
    let targets = table.targets();
    let n = 1usize << targets;
    let m = part.cells();
    if candidate.targets() != targets {
        return Err(Error::DimensionMismatch {
            context: "candidate field and value table over different networks".into(),
        });
    }
    let (v_cells, v_term) = cell_values(candidate, part)?;

    // Node processing order within a boundary: parents before children.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|p| p.count_ones());

    let mut parcels: BTreeMap<(usize, usize), Parcel> = BTreeMap::new();
    let spawn = |parcels: &mut BTreeMap<(usize, usize), Parcel>,
                     p: usize,
                     k: usize,
                     mass: Mass|
     -> Result<()> {
        let entry = parcels.entry((p, k));
        let parcel = match entry {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let node = Node::new(p, targets)?;
                let (targets_list, _) = if node.is_goal() || k == m {
                    (Vec::new(), 0)
                } else {
                    eps_argmin_map(table, part, node, k)?
                };
                let mut by_instant: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for t in &targets_list {
                    by_instant.entry(t.part_idx).or_default().push(t.succ);
                }
                let last_instant = by_instant.keys().next_back().copied();
                e.insert(Parcel {
                    m_init: Mass::zero(),
                    remaining: Mass::zero(),
                    by_instant,
                    last_instant,
                    alloc: BTreeMap::new(),
                })
            }
        };
        parcel.m_init += &mass;
        parcel.remaining += mass;
        Ok(())
    };

    for (p, mass) in initial {
        spawn(&mut parcels, *p, 0, mass.clone())?;
    }

    let mut ambiguous_splits = 0usize;
    let mut first_inconsistency: Option<(usize, usize, f64)> = None;

    for k in 1..=m {
        // Arrivals assembled this boundary, per node.
        let mut arrivals: BTreeMap<usize, Mass> = BTreeMap::new();
        for &p in &order {
            let arr = arrivals.get(&p).cloned().unwrap_or_else(Mass::zero);
            let prev = &v_cells[p][k - 1];
            let now = if k < m { &v_cells[p][k] } else { &v_term[p] };
            let dep_required = prev.clone() + &arr - now;

            // Parcels at p that can (or must) leave at this boundary.
            let keys: Vec<(usize, usize)> = parcels
                .range((p, 0)..=(p, k.saturating_sub(1)))
                .filter(|(_, parcel)| parcel.by_instant.contains_key(&k))
                .map(|(key, _)| *key)
                .collect();
            let mut cap = Mass::zero();
            let mut forced = Mass::zero();
            for key in &keys {
                let parcel = &parcels[key];
                cap += &parcel.remaining;
                if parcel.last_instant == Some(k) {
                    forced += &parcel.remaining;
                }
            }
            let dep = if dep_required < forced {
                let gap = mass_to_f64(&(forced.clone() - &dep_required));
                if gap > 0.0 {
                    first_inconsistency.get_or_insert((p, k, gap));
                }
                forced.clone()
            } else if dep_required > cap {
                let gap = mass_to_f64(&(dep_required.clone() - &cap));
                first_inconsistency.get_or_insert((p, k, gap));
                cap.clone()
            } else {
                dep_required
            };

            // Forced parcels drain fully; the excess is split among the
            // rest in proportion to remaining mass (exactly conservative).
            let extra = dep.clone() - &forced;
            let loose: Mass = keys
                .iter()
                .filter(|key| parcels[*key].last_instant != Some(k))
                .map(|key| parcels[key].remaining.clone())
                .sum();
            for key in &keys {
                let mu = {
                    let parcel = &parcels[key];
                    if parcel.last_instant == Some(k) {
                        parcel.remaining.clone()
                    } else if loose.is_zero() {
                        Mass::zero()
                    } else {
                        &parcel.remaining * &extra / &loose
                    }
                };
                if mu.is_zero() {
                    continue;
                }
                // Split mu over this parcel's moves at instant k.
                let succs = parcels[key].by_instant[&k].clone();
                let shares: Vec<(usize, Mass)> = if succs.len() == 1 {
                    vec![(succs[0], mu.clone())]
                } else {
                    // Need-based: proportional to each child's observed
                    // cell gain across the boundary; equal fallback.
                    let needs: Vec<Mass> = succs
                        .iter()
                        .map(|&s| {
                            let now_s = if k < m { &v_cells[s][k] } else { &v_term[s] };
                            let gain = now_s.clone() - &v_cells[s][k - 1];
                            if gain > Mass::zero() {
                                gain
                            } else {
                                Mass::zero()
                            }
                        })
                        .collect();
                    let total: Mass = needs.iter().cloned().sum();
                    if total.is_zero() {
                        ambiguous_splits += 1;
                        let w = Mass::new(1.into(), (succs.len() as i64).into());
                        succs.iter().map(|&s| (s, &mu * &w)).collect()
                    } else {
                        succs
                            .iter()
                            .zip(&needs)
                            .map(|(&s, need)| (s, &mu * need / &total))
                            .collect()
                    }
                };
                let parcel = parcels.get_mut(key).expect("known key");
                parcel.remaining -= &mu;
                for (s, share) in &shares {
                    *parcel.alloc.entry((k, *s)).or_insert_with(Mass::zero) += share;
                }
                for (s, share) in shares {
                    if share.is_zero() {
                        continue;
                    }
                    *arrivals.entry(s).or_insert_with(Mass::zero) += &share;
                    spawn(&mut parcels, s, k, share)?;
                }
            }
        }
    }

    // Extract rules from exercised parcels.
    let mut plan = DecisionPlan::new(targets, m);
    for ((p, k), parcel) in &parcels {
        if parcel.by_instant.is_empty() || parcel.m_init.is_zero() {
            continue;
        }
        let mut leftover = parcel.remaining.clone();
        let mut moves: Vec<PlanTarget> = Vec::new();
        for (instant, succs) in &parcel.by_instant {
            for &s in succs {
                let mut w = parcel
                    .alloc
                    .get(&(*instant, s))
                    .cloned()
                    .unwrap_or_else(Mass::zero);
                // Any unallocated remainder (clamped inconsistencies) is
                // dumped on the last move so weights still sum to one; the
                // replay comparison will surface the mismatch.
                if Some(*instant) == parcel.last_instant
                    && s == *succs.last().expect("non-empty")
                    && !leftover.is_zero()
                {
                    w += &leftover;
                    leftover = Mass::zero();
                }
                if !w.is_zero() {
                    moves.push(PlanTarget {
                        succ: s,
                        part_idx: *instant,
                        weight: w / &parcel.m_init,
                    });
                }
            }
        }
        if moves.is_empty() {
            continue;
        }
        plan.insert_rule(*p, *k, moves)?;
    }

    // Cover reachable decision points that no mass exercised, so the plan
    // is total over the best-response graph.
    let mut free_decisions = 0usize;
    let mut stack: Vec<(usize, usize)> = initial.iter().map(|(p, _)| (*p, 0)).collect();
    let mut seen: Vec<(usize, usize)> = Vec::new();
    while let Some((p, k)) = stack.pop() {
        if seen.contains(&(p, k)) {
            continue;
        }
        seen.push((p, k));
        let node = Node::new(p, targets)?;
        if node.is_goal() || k == m {
            continue;
        }
        let (targets_list, _) = eps_argmin_map(table, part, node, k)?;
        if targets_list.is_empty() {
            continue;
        }
        if plan.rule(p, k).is_none() {
            free_decisions += 1;
            let w = Mass::new(1.into(), (targets_list.len() as i64).into());
            plan.insert_rule(
                p,
                k,
                targets_list
                    .iter()
                    .map(|t| PlanTarget {
                        succ: t.succ,
                        part_idx: t.part_idx,
                        weight: w.clone(),
                    })
                    .collect(),
            )?;
        }
        for t in &targets_list {
            stack.push((t.succ, t.part_idx));
        }
    }

    // Replay and compare.
    let replay = combine(initial, &plan, part)?;
    let (r_cells, r_term) = cell_values(&replay, part)?;
    let mut sup_residual = 0.0_f64;
    let mut first_violation: Option<(usize, usize, f64)> = None;
    for p in 0..n {
        for c in 0..m {
            let diff = mass_to_f64(&(r_cells[p][c].clone() - &v_cells[p][c])).abs();
            sup_residual = sup_residual.max(diff);
            if diff > tol && first_violation.is_none() {
                first_violation = Some((p, c, diff));
            }
        }
        let diff = mass_to_f64(&(r_term[p].clone() - &v_term[p])).abs();
        sup_residual = sup_residual.max(diff);
        if diff > tol && first_violation.is_none() {
            first_violation = Some((p, m, diff));
        }
    }
    let l2_residual = field_l2_distance(candidate, &replay)?;

    if let Some((node, time_idx, residual)) = first_violation {
        let reason = match first_inconsistency {
            Some((ip, ik, ir)) => format!(
                "cell equations inconsistent at node {ip}, boundary {ik} (mass gap {ir:.3e})"
            ),
            None => "replayed evolution deviates from the candidate".into(),
        };
        return Ok(Certification::Refused {
            node,
            time_idx,
            residual,
            reason,
        });
    }
    if l2_residual > tol {
        return Ok(Certification::Refused {
            node: 0,
            time_idx: 0,
            residual: l2_residual,
            reason: "field distance of the replayed evolution exceeds tolerance".into(),
        });
    }
    Ok(Certification::Certified {
        plan,
        l2_residual,
        sup_residual,
        ambiguous_splits,
        free_decisions,
    })
}
