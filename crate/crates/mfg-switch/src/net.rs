//! The visiting network: binary strings, single-switch edges, admissible paths.
//!
//! A player's state records which of `N` targets have been visited. States
//! are therefore the binary strings `p = (p^1, ..., p^N)` with `p^i = 1` when
//! target `i` has been visited. Edges flip exactly one component from 0 to 1,
//! so the network is the Boolean lattice directed upwards: every walk starts
//! somewhere below and drifts towards the full string.
//!
//! Component `p^1` is stored as the least significant bit of the integer id,
//! so the origin `(0, ..., 0)` has id 0 and the goal `(1, ..., 1)` has id
//! `2^N - 1`. The string rendering (`bit_string`) lists components in
//! component order `p^1 p^2 ... p^N`, i.e. the least significant bit first.

use crate::error::{Error, Result};

/// Default upper bound on the number of targets `N`. The state space is
/// `2^N`, and every solver in this crate is meant for desk-scale studies, so
/// the constructor refuses larger networks unless a higher cap is passed
/// explicitly.
pub const DEFAULT_MAX_TARGETS: usize = 10;

/// A node of the visiting network: a binary string over `N` targets.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    id: usize,
    targets: usize,
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Node({}:{})", self.id, self.bit_string())
    }
}

impl Node {
    /// Builds the node with integer id `id` over `targets` targets.
    pub fn new(id: usize, targets: usize) -> Result<Self> {
        Self::with_cap(id, targets, DEFAULT_MAX_TARGETS)
    }

    /// Same as [`Node::new`] with an explicit cap on `targets`.
    pub fn with_cap(id: usize, targets: usize, cap: usize) -> Result<Self> {
        if targets == 0 || targets > cap {
            return Err(Error::OutOfRange {
                context: format!("targets = {targets} not in 1..={cap}"),
            });
        }
        if id >= (1usize << targets) {
            return Err(Error::OutOfRange {
                context: format!("node id {id} not in 0..{}", 1usize << targets),
            });
        }
        Ok(Self { id, targets })
    }

    /// Builds a node from its component list `(p^1, ..., p^N)`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut id = 0usize;
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::OutOfRange {
                    context: format!("bit {i} has value {b}, expected 0 or 1"),
                });
            }
            id |= (b as usize) << i;
        }
        Self::new(id, bits.len())
    }

    /// Integer id (component `p^1` is the least significant bit).
    pub fn id(&self) -> usize {
        self.id
    }

    /// Number of targets `N`.
    pub fn targets(&self) -> usize {
        self.targets
    }

    /// Component `p^i` for zero-based `i`.
    pub fn bit(&self, i: usize) -> u8 {
        ((self.id >> i) & 1) as u8
    }

    /// Component list `(p^1, ..., p^N)`.
    pub fn bits(&self) -> Vec<u8> {
        (0..self.targets).map(|i| self.bit(i)).collect()
    }

    /// String rendering in component order, e.g. `(0,1,1)` renders as `"011"`.
    pub fn bit_string(&self) -> String {
        (0..self.targets)
            .map(|i| if self.bit(i) == 1 { '1' } else { '0' })
            .collect()
    }

    /// Number of visited targets.
    pub fn ones_count(&self) -> usize {
        self.id.count_ones() as usize
    }

    /// The all-zeros origin over `targets` targets.
    pub fn origin(targets: usize) -> Result<Self> {
        Self::new(0, targets)
    }

    /// The all-ones goal over `targets` targets.
    pub fn goal(targets: usize) -> Result<Self> {
        Self::new((1usize << targets) - 1, targets)
    }

    /// True when every target has been visited.
    pub fn is_goal(&self) -> bool {
        self.id == (1usize << self.targets) - 1
    }

    /// True when `self` has a 1 everywhere `other` does (componentwise
    /// domination, i.e. `other` can still reach `self`).
    pub fn dominates(&self, other: &Node) -> bool {
        self.targets == other.targets && (other.id & !self.id) == 0
    }
}

/// Exact number of visited targets of `p` (free-function form of
/// [`Node::ones_count`]).
pub fn ones_count(p: Node) -> usize {
    p.ones_count()
}

/// Immediate successors of `p`: every node obtained by switching exactly one
/// component from 0 to 1, in ascending id order. Empty exactly on the goal.
pub fn successors(p: Node) -> Vec<Node> {
    let mut out = Vec::with_capacity(p.targets() - p.ones_count());
    for i in 0..p.targets() {
        if p.bit(i) == 0 {
            out.push(Node {
                id: p.id() | (1usize << i),
                targets: p.targets(),
            });
        }
    }
    out
}

/// All single-switch node paths from `from` to `to`, in lexicographic order
/// of the visited ids. Errors with [`Error::EmptyResult`] when `to` does not
/// dominate `from` (some component would have to switch from 1 to 0).
pub fn enumerate_node_paths(from: Node, to: Node) -> Result<Vec<Vec<Node>>> {
    if from.targets() != to.targets() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "path endpoints over {} and {} targets",
                from.targets(),
                to.targets()
            ),
        });
    }
    if !to.dominates(&from) {
        return Err(Error::EmptyResult {
            from: from.bit_string(),
            to: to.bit_string(),
        });
    }
    let mut out = Vec::new();
    let mut stack = vec![from];
    fn dfs(current: Node, to: Node, stack: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
        if current == to {
            out.push(stack.clone());
            return;
        }
        for next in successors(current) {
            // Only switch components that the target still needs.
            if to.dominates(&next) {
                stack.push(next);
                dfs(next, to, stack, out);
                stack.pop();
            }
        }
    }
    dfs(from, to, &mut stack, &mut out);
    Ok(out)
}

/// An admissible switching control: nodes `p_0, ..., p_r` visited at
/// strictly increasing instants `t_0 < t_1 < ... < t_r <= T`, where each step
/// switches exactly one component from 0 to 1 and a path that stops short of
/// the goal must stop exactly at the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchPath {
    nodes: Vec<Node>,
    times: Vec<f64>,
    horizon: f64,
}

impl SwitchPath {
    /// Validating constructor. `times[0]` is the decision (start) time of the
    /// control; `times[i]` for `i >= 1` is the instant of the i-th switch.
    pub fn new(nodes: Vec<Node>, times: Vec<f64>, horizon: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != times.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "switch path with {} nodes and {} times",
                    nodes.len(),
                    times.len()
                ),
            });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::BadTimes {
                context: format!("horizon T = {horizon} must be positive and finite"),
            });
        }
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let step_up = b.id() & !a.id();
            if a.targets() != b.targets()
                || (a.id() & !b.id()) != 0
                || step_up.count_ones() != 1
            {
                return Err(Error::NotAPath {
                    context: format!(
                        "step {} -> {} is not a single 0 -> 1 switch",
                        a.bit_string(),
                        b.bit_string()
                    ),
                });
            }
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::BadTimes {
                    context: format!("instants {} and {} are not strictly increasing", w[0], w[1]),
                });
            }
        }
        let last = *times.last().expect("non-empty");
        let first = times[0];
        if first < 0.0 || last > horizon {
            return Err(Error::BadTimes {
                context: format!("instants must stay inside [0, {horizon}]"),
            });
        }
        let end = *nodes.last().expect("non-empty");
        if !end.is_goal() && last != horizon {
            return Err(Error::NotAdmissible {
                context: format!(
                    "path stops at {} before the horizon (t_r = {last} < T = {horizon})",
                    end.bit_string()
                ),
            });
        }
        Ok(Self {
            nodes,
            times,
            horizon,
        })
    }

    /// Visited nodes `p_0, ..., p_r`.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Instants `t_0 < ... < t_r`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The horizon `T` the path was validated against.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of switches `r`.
    pub fn switch_count(&self) -> usize {
        self.nodes.len() - 1
    }
}
