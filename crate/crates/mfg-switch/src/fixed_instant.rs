//! Route games with the switching instants frozen.
//!
//! When every agent is pinned to the same switching timetable, only the
//! *routing* remains strategic: a unit of mass splits over finitely many
//! routes, each route occupies its nodes for fixed residence weights, and a
//! node's congestion price is a linear slope times its total occupancy. The
//! cost of a route is the weighted sum of the prices of the nodes it visits:
//!
//! ```text
//! C_r(mu) = sum over (p, w) in route r of  slope_p * w * occ_p(mu)
//! occ_p(mu) = sum of mu_s over routes s visiting p
//! ```
//!
//! These games have an exact quadratic potential `Phi(mu) = mu' A mu / 2`
//! with `A[r][s] = sum over shared nodes p of slope_p * w_p` (residence
//! weights must agree across routes sharing a node, which is what makes `A`
//! symmetric). Equilibria are exactly computable by support enumeration and
//! rational linear algebra, and serve as closed-form anchors for the
//! time-dependent solvers.

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::profile::{mass_to_f64, Mass};

/// A routing game with frozen switching instants.
#[derive(Clone, Debug)]
pub struct FixedSwitchInstance {
    slopes: Vec<Mass>,
    routes: Vec<Vec<(usize, Mass)>>,
}

impl FixedSwitchInstance {
    /// Validating constructor. Slopes must be non-negative (a zero slope is
    /// legal but kills strict monotonicity — the audit reports it); routes
    /// must visit distinct in-range nodes with positive residence weights,
    /// and two routes sharing a node must give it the same weight.
    pub fn new(slopes: Vec<Mass>, routes: Vec<Vec<(usize, Mass)>>) -> Result<Self> {
        if slopes.is_empty() || routes.is_empty() {
            return Err(Error::BadCoefficients {
                context: "need at least one node and one route".into(),
            });
        }
        for (i, c) in slopes.iter().enumerate() {
            if *c < Mass::zero() {
                return Err(Error::BadSlope {
                    index: i,
                    value: mass_to_f64(c),
                });
            }
        }
        let mut node_weight: Vec<Option<Mass>> = vec![None; slopes.len()];
        for route in &routes {
            if route.is_empty() {
                return Err(Error::BadCoefficients {
                    context: "empty route".into(),
                });
            }
            for (p, w) in route {
                if *p >= slopes.len() {
                    return Err(Error::OutOfRange {
                        context: format!("route node {p} outside 0..{}", slopes.len()),
                    });
                }
                if *w <= Mass::zero() {
                    return Err(Error::BadCoefficients {
                        context: format!("residence weight at node {p} must be positive"),
                    });
                }
                if route.iter().filter(|(q, _)| q == p).count() > 1 {
                    return Err(Error::NotAPath {
                        context: format!("route visits node {p} twice"),
                    });
                }
                match &node_weight[*p] {
                    Some(existing) if existing != w => {
                        return Err(Error::BadCoefficients {
                            context: format!(
                                "node {p} has conflicting residence weights across routes"
                            ),
                        });
                    }
                    Some(_) => {}
                    None => node_weight[*p] = Some(w.clone()),
                }
            }
        }
        Ok(Self { slopes, routes })
    }

    /// Parallel links: route `i` visits only node `i`, residence weight one.
    pub fn parallel_links(slopes: &[Mass]) -> Result<Self> {
        let routes = (0..slopes.len())
            .map(|i| vec![(i, Mass::one())])
            .collect();
        Self::new(slopes.to_vec(), routes)
    }

    /// Two-stage timetable: a direct route riding node 0 from the first
    /// switching instant to the horizon, against a shared first leg on
    /// node 1 that forks into nodes 2 and 3 at the second instant.
    pub fn two_stage(slopes: [Mass; 4], t1: Mass, t2: Mass, horizon: Mass) -> Result<Self> {
        if !(t1 < t2 && t2 < horizon) {
            return Err(Error::BadTimes {
                context: "need t1 < t2 < horizon".into(),
            });
        }
        let w_direct = horizon.clone() - &t1;
        let w_first = t2.clone() - &t1;
        let w_fork = horizon - &t2;
        let routes = vec![
            vec![(0usize, w_direct)],
            vec![(1usize, w_first.clone()), (2usize, w_fork.clone())],
            vec![(1usize, w_first), (3usize, w_fork)],
        ];
        Self::new(slopes.to_vec(), routes)
    }

    pub fn route_count(&self) -> usize {
        self.routes.len()
    }

    pub fn node_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[Mass] {
        &self.slopes
    }

    pub fn routes(&self) -> &[Vec<(usize, Mass)>] {
        &self.routes
    }

    /// Occupancy of every node under the route split `mu`.
    pub fn occupancies(&self, mu: &[Mass]) -> Result<Vec<Mass>> {
        if mu.len() != self.routes.len() {
            return Err(Error::DimensionMismatch {
                context: format!("{} shares for {} routes", mu.len(), self.routes.len()),
            });
        }
        let mut occ = vec![Mass::zero(); self.slopes.len()];
        for (share, route) in mu.iter().zip(&self.routes) {
            for (p, _) in route {
                occ[*p] += share;
            }
        }
        Ok(occ)
    }

    /// Exact cost of every route under the split `mu` (per unit of total
    /// mass; costs scale linearly with the population).
    pub fn route_costs(&self, mu: &[Mass]) -> Result<Vec<Mass>> {
        let occ = self.occupancies(mu)?;
        Ok(self
            .routes
            .iter()
            .map(|route| {
                route
                    .iter()
                    .map(|(p, w)| &self.slopes[*p] * w * &occ[*p])
                    .sum()
            })
            .collect())
    }

    /// The exact potential matrix `A[r][s] = sum over shared nodes of
    /// slope * residence weight`; route costs are `A mu`.
    pub fn potential_matrix(&self) -> Vec<Vec<Mass>> {
        let r = self.routes.len();
        let mut a = vec![vec![Mass::zero(); r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut sum = Mass::zero();
                for (p, w) in &self.routes[i] {
                    if self.routes[j].iter().any(|(q, _)| q == p) {
                        sum += &self.slopes[*p] * w;
                    }
                }
                a[i][j] = sum;
            }
        }
        a
    }

    /// Exact equilibrium split: on its support all routes price equally and
    /// no unused route prices below that. Found by support enumeration
    /// (largest supports first) and exact rational elimination.
    pub fn exact_equilibrium(&self) -> Result<(Vec<Mass>, Mass)> {
        let r = self.routes.len();
        let a = self.potential_matrix();
        let mut supports: Vec<Vec<usize>> = (1u32..(1u32 << r))
            .map(|bits| (0..r).filter(|i| (bits >> i) & 1 == 1).collect())
            .collect();
        supports.sort_by(|x, y| (y.len(), x.clone()).cmp(&(x.len(), y.clone())));
        for support in supports {
            if let Some((mu, cost)) = equilibrium_on_support(&a, &support, r) {
                // No route outside the support may beat the common cost.
                let costs = self.route_costs(&mu)?;
                let ok = (0..r)
                    .filter(|i| !support.contains(i))
                    .all(|i| costs[i] >= cost);
                if ok {
                    return Ok((mu, cost));
                }
            }
        }
        Err(Error::NonConvergence {
            context: "no support admits an equal-cost split".into(),
        })
    }

    /// Checks whether `mu` is an equilibrium split: a proper distribution
    /// whose used routes share one price, with every route pricing at least
    /// that. Exact arithmetic; `tol` loosens the comparisons when positive.
    pub fn certify_distribution(&self, mu: &[Mass], tol: &Mass) -> Result<FixedCertification> {
        if mu.len() != self.routes.len() {
            return Err(Error::DimensionMismatch {
                context: format!("{} shares for {} routes", mu.len(), self.routes.len()),
            });
        }
        if mu.iter().any(|x| *x < Mass::zero()) {
            return Err(Error::ValidationError {
                message: "negative route share".into(),
            });
        }
        let total: Mass = mu.iter().cloned().sum();
        if (total - Mass::one()).abs() > *tol {
            return Err(Error::ValidationError {
                message: "route shares do not sum to one".into(),
            });
        }
        let costs = self.route_costs(mu)?;
        let used: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > Mass::zero()).collect();
        if used.is_empty() {
            return Err(Error::ValidationError {
                message: "no route carries mass".into(),
            });
        }
        let common = costs[used[0]].clone();
        let mut spread = Mass::zero();
        for &i in &used {
            let d = (costs[i].clone() - &common).abs();
            if d > spread {
                spread = d;
            }
        }
        let better: Vec<usize> = (0..mu.len())
            .filter(|&i| !used.contains(&i) && costs[i].clone() + tol < common)
            .collect();
        if spread <= *tol && better.is_empty() {
            Ok(FixedCertification::Certified {
                common_cost: common,
                support: used,
            })
        } else {
            Ok(FixedCertification::Refused {
                better_routes: better,
                cost_spread: spread,
            })
        }
    }
}

/// Outcome of checking a candidate route split.
#[derive(Clone, Debug)]
pub enum FixedCertification {
    Certified {
        common_cost: Mass,
        support: Vec<usize>,
    },
    Refused {
        /// Unused routes strictly cheaper than the carried ones.
        better_routes: Vec<usize>,
        /// Largest price difference among carried routes.
        cost_spread: Mass,
    },
}

impl FixedCertification {
    pub fn is_certified(&self) -> bool {
        matches!(self, FixedCertification::Certified { .. })
    }
}

/// Solves `A_SS mu = c 1, sum mu = 1` exactly on a support; `None` when the
/// system is singular or the solution leaves the simplex.
fn equilibrium_on_support(a: &[Vec<Mass>], support: &[usize], r: usize) -> Option<(Vec<Mass>, Mass)> {
    let s = support.len();
    // Unknowns: mu over the support, then the common cost c.
    let dim = s + 1;
    let mut mat = vec![vec![Mass::zero(); dim + 1]; dim];
    for (row, &i) in support.iter().enumerate() {
        for (col, &j) in support.iter().enumerate() {
            mat[row][col] = a[i][j].clone();
        }
        mat[row][s] = -Mass::one(); // minus common cost
    }
    for col in 0..s {
        mat[s][col] = Mass::one();
    }
    mat[s][dim] = Mass::one(); // shares sum to one
    let solution = gauss_exact(&mut mat)?;
    let mu_s = &solution[..s];
    if mu_s.iter().any(|x| *x < Mass::zero()) {
        return None;
    }
    let mut mu = vec![Mass::zero(); r];
    for (row, &i) in support.iter().enumerate() {
        mu[i] = mu_s[row].clone();
    }
    Some((mu, solution[s].clone()))
}

/// Exact Gaussian elimination on an augmented matrix; `None` if singular.
fn gauss_exact(mat: &mut [Vec<Mass>]) -> Option<Vec<Mass>> {
    let n = mat.len();
    for col in 0..n {
        let pivot_row = (col..n).find(|&row| !mat[row][col].is_zero())?;
        mat.swap(col, pivot_row);
        let pivot = mat[col][col].clone();
        for entry in mat[col].iter_mut() {
            *entry /= &pivot;
        }
        for row in 0..n {
            if row != col && !mat[row][col].is_zero() {
                let factor = mat[row][col].clone();
                for k in 0..=n {
                    let delta = &factor * &mat[col][k];
                    mat[row][k] -= delta;
                }
            }
        }
    }
    Some((0..n).map(|row| mat[row][n].clone()).collect())
}

/// Step-size rule for the iterative scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpEta {
    /// Classic decreasing averaging, step `1/(k+1)`.
    Harmonic,
    /// Exact minimization of the quadratic potential along the move toward
    /// the best response (fast for interior equilibria).
    LineSearch,
}

/// Options for [`fictitious_play`].
#[derive(Clone, Copy, Debug)]
pub struct FpOpts {
    pub max_iter: usize,
    /// Stop when the best-response improvement gap drops below this.
    pub gap_tol: f64,
    pub eta: FpEta,
}

impl Default for FpOpts {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            gap_tol: 1e-13,
            eta: FpEta::LineSearch,
        }
    }
}

/// Outcome of the iterative best-response scheme.
#[derive(Clone, Debug)]
pub struct FpOutcome {
    pub mu: Vec<f64>,
    pub iterations: usize,
    /// Final best-response improvement gap (zero exactly at equilibrium).
    pub gap: f64,
    /// Gap after each iteration.
    pub trace: Vec<f64>,
}

/// Repeatedly mixes the current split toward a cheapest route. The gap
/// `mu' A mu - min_r (A mu)_r` is the incentive to deviate; it vanishes
/// exactly at equilibria of the quadratic potential.
pub fn fictitious_play(
    instance: &FixedSwitchInstance,
    start: &[f64],
    opts: &FpOpts,
) -> Result<FpOutcome> {
    let r = instance.route_count();
    if start.len() != r {
        return Err(Error::DimensionMismatch {
            context: format!("{} start shares for {r} routes", start.len()),
        });
    }
    let sum: f64 = start.iter().sum();
    if start.iter().any(|x| *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::ValidationError {
            message: "start must be a distribution over routes".into(),
        });
    }
    let a: Vec<Vec<f64>> = instance
        .potential_matrix()
        .iter()
        .map(|row| row.iter().map(mass_to_f64).collect())
        .collect();
    let mut mu: Vec<f64> = start.to_vec();
    let mut trace = Vec::new();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..opts.max_iter {
        iterations = k + 1;
        let costs: Vec<f64> = (0..r)
            .map(|i| (0..r).map(|j| a[i][j] * mu[j]).sum())
            .collect();
        let avg: f64 = (0..r).map(|i| costs[i] * mu[i]).sum();
        let (best, best_cost) = costs
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite costs"))
            .map(|(i, c)| (i, *c))
            .expect("at least one route");
        gap = avg - best_cost;
        trace.push(gap);
        if gap <= opts.gap_tol {
            break;
        }
        let eta = match opts.eta {
            FpEta::Harmonic => 1.0 / (k as f64 + 2.0),
            FpEta::LineSearch => {
                // d = e_best - mu; minimize Phi(mu + eta d):
                // eta* = -(grad . d) / (d' A d), clamped into [0, 1].
                let mut dad = 0.0;
                for i in 0..r {
                    let di = (i == best) as u8 as f64 - mu[i];
                    for j in 0..r {
                        let dj = (j == best) as u8 as f64 - mu[j];
                        dad += di * a[i][j] * dj;
                    }
                }
                if dad <= 0.0 {
                    1.0
                } else {
                    (gap / dad).clamp(0.0, 1.0)
                }
            }
        };
        for (i, share) in mu.iter_mut().enumerate() {
            let target = (i == best) as u8 as f64;
            *share += eta * (target - *share);
        }
    }
    Ok(FpOutcome {
        mu,
        iterations,
        gap,
        trace,
    })
}

/// Sampled audit of strict monotonicity of the cost map.
#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// Smallest normalized quadratic form `(d' A d) / |d|^2` over sampled
    /// distinct split pairs; strict monotonicity needs it positive.
    pub min_form: f64,
    /// Nodes whose congestion slope is exactly zero: each is a per-link
    /// strictness violation even when the aggregate form stays positive.
    pub zero_slope_nodes: Vec<usize>,
    /// True when the aggregate form stayed positive and no link is flat.
    pub strictly_monotone: bool,
}

/// Samples random pairs of route splits and evaluates the aggregate
/// monotonicity form `(C(mu1) - C(mu2)) . (mu1 - mu2)`, normalized by the
/// squared pair distance. Also reports flat links, which break per-link
/// strictness without necessarily breaking the aggregate form.
pub fn check_monotonicity(
    instance: &FixedSwitchInstance,
    samples: usize,
    seed: u64,
) -> MonotonicityReport {
    let r = instance.route_count();
    let a: Vec<Vec<f64>> = instance
        .potential_matrix()
        .iter()
        .map(|row| row.iter().map(mass_to_f64).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_form = f64::INFINITY;
    let mut drawn = 0usize;
    while drawn < samples {
        let m1 = random_simplex(&mut rng, r);
        let m2 = random_simplex(&mut rng, r);
        let d: Vec<f64> = m1.iter().zip(&m2).map(|(x, y)| x - y).collect();
        let norm2: f64 = d.iter().map(|x| x * x).sum();
        if norm2 < 1e-16 {
            continue;
        }
        drawn += 1;
        let mut form = 0.0;
        for i in 0..r {
            for j in 0..r {
                form += d[i] * a[i][j] * d[j];
            }
        }
        min_form = min_form.min(form / norm2);
    }
    let zero_slope_nodes: Vec<usize> = instance
        .slopes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_zero())
        .map(|(i, _)| i)
        .collect();
    MonotonicityReport {
        samples: drawn,
        min_form,
        zero_slope_nodes: zero_slope_nodes.clone(),
        strictly_monotone: min_form > 0.0 && zero_slope_nodes.is_empty(),
    }
}

/// The monotonicity form for two-stage instances, with the fork split
/// pinned at its equalized value: pairs of first-stage splits are sampled,
/// the fork always divides in inverse proportion to the fork leg prices,
/// and the normalized aggregate form is reported. (Unpinned fork pairs can
/// make the raw form negative without contradicting equilibrium
/// uniqueness, so the pinned family is the meaningful audit.)
pub fn staged_monotonicity(
    instance: &FixedSwitchInstance,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if instance.route_count() < 3 {
        return Err(Error::DimensionMismatch {
            context: "staged audit needs a direct route and at least two forks".into(),
        });
    }
    // Fork legs: everything except the shared prefix of routes 1.. .
    let prefix = &instance.routes()[1][0];
    let fork_prices: Vec<Mass> = instance.routes()[1..]
        .iter()
        .map(|route| {
            route
                .iter()
                .filter(|(p, _)| *p != prefix.0)
                .map(|(p, w)| &instance.slopes()[*p] * w)
                .sum()
        })
        .collect();
    if fork_prices.iter().any(|c| c.is_zero()) {
        return Err(Error::DegenerateCost {
            context: "flat fork leg; pinned split undefined".into(),
        });
    }
    let inv: Vec<Mass> = fork_prices.iter().map(|c| Mass::one() / c).collect();
    let total: Mass = inv.iter().cloned().sum();
    let pin: Vec<f64> = inv
        .iter()
        .map(|x| mass_to_f64(&(x.clone() / &total)))
        .collect();

    let r = instance.route_count();
    let a: Vec<Vec<f64>> = instance
        .potential_matrix()
        .iter()
        .map(|row| row.iter().map(mass_to_f64).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_form = f64::INFINITY;
    let mut drawn = 0usize;
    while drawn < samples {
        let l1: f64 = rng.gen_range(0.0..1.0);
        let l2: f64 = rng.gen_range(0.0..1.0);
        if (l1 - l2).abs() < 1e-12 {
            continue;
        }
        drawn += 1;
        let split = |l: f64| -> Vec<f64> {
            let mut mu = vec![1.0 - l];
            mu.extend(pin.iter().map(|q| l * q));
            mu
        };
        let m1 = split(l1);
        let m2 = split(l2);
        let d: Vec<f64> = m1.iter().zip(&m2).map(|(x, y)| x - y).collect();
        let norm2: f64 = d.iter().map(|x| x * x).sum();
        let mut form = 0.0;
        for i in 0..r {
            for j in 0..r {
                form += d[i] * a[i][j] * d[j];
            }
        }
        min_form = min_form.min(form / norm2);
    }
    Ok(min_form)
}

fn random_simplex(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..r).map(|_| -rng.gen_range(0.0_f64..1.0).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::mass_ratio;

    fn links123() -> FixedSwitchInstance {
        FixedSwitchInstance::parallel_links(&[
            mass_ratio(1, 1),
            mass_ratio(2, 1),
            mass_ratio(3, 1),
        ])
        .unwrap()
    }

    fn staged() -> FixedSwitchInstance {
        FixedSwitchInstance::two_stage(
            [mass_ratio(1, 1), mass_ratio(4, 1), mass_ratio(3, 1), mass_ratio(2, 1)],
            mass_ratio(1, 1),
            mass_ratio(3, 2),
            mass_ratio(2, 1),
        )
        .unwrap()
    }

    #[test]
    fn three_parallel_links_split_by_reciprocal_slopes() {
        let (mu, cost) = links123().exact_equilibrium().unwrap();
        assert_eq!(mu, vec![mass_ratio(6, 11), mass_ratio(3, 11), mass_ratio(2, 11)]);
        assert_eq!(cost, mass_ratio(6, 11));
    }

    #[test]
    fn two_parallel_links_split_two_to_one() {
        let inst =
            FixedSwitchInstance::parallel_links(&[mass_ratio(1, 1), mass_ratio(2, 1)]).unwrap();
        let (mu, cost) = inst.exact_equilibrium().unwrap();
        assert_eq!(mu, vec![mass_ratio(2, 3), mass_ratio(1, 3)]);
        assert_eq!(cost, mass_ratio(2, 3));
    }

    #[test]
    fn staged_instance_has_the_expected_potential_matrix() {
        let a = staged().potential_matrix();
        let expect = vec![
            vec![mass_ratio(1, 1), mass_ratio(0, 1), mass_ratio(0, 1)],
            vec![mass_ratio(0, 1), mass_ratio(7, 2), mass_ratio(2, 1)],
            vec![mass_ratio(0, 1), mass_ratio(2, 1), mass_ratio(3, 1)],
        ];
        assert_eq!(a, expect);
    }

    #[test]
    fn staged_equilibrium_matches_the_hand_solution() {
        let (mu, cost) = staged().exact_equilibrium().unwrap();
        // Route shares: direct 13/18, forks 1/9 and 1/6.
        assert_eq!(mu, vec![mass_ratio(13, 18), mass_ratio(1, 9), mass_ratio(1, 6)]);
        assert_eq!(cost, mass_ratio(13, 18));
        // First-stage split 5/18, fork split (2/5, 3/5).
        let stage: Mass = mu[1].clone() + &mu[2];
        assert_eq!(stage, mass_ratio(5, 18));
        assert_eq!(mu[1].clone() / &stage, mass_ratio(2, 5));
        assert_eq!(mu[2].clone() / &stage, mass_ratio(3, 5));
        // Node occupancies match.
        let occ = staged().occupancies(&mu).unwrap();
        assert_eq!(occ[2], mass_ratio(1, 9));
        assert_eq!(occ[3], mass_ratio(1, 6));
    }

    #[test]
    fn certification_accepts_the_equilibrium_and_rejects_a_starved_link() {
        let inst = links123();
        let zero_tol = Mass::zero();
        let (mu, _) = inst.exact_equilibrium().unwrap();
        assert!(inst.certify_distribution(&mu, &zero_tol).unwrap().is_certified());
        // (2/3, 1/3, 0): the empty third link prices at zero, beating 2/3.
        let bad = vec![mass_ratio(2, 3), mass_ratio(1, 3), mass_ratio(0, 1)];
        match inst.certify_distribution(&bad, &zero_tol).unwrap() {
            FixedCertification::Refused { better_routes, .. } => {
                assert_eq!(better_routes, vec![2]);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn line_search_play_converges_fast_from_random_starts() {
        let inst = links123();
        let exact = [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0];
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..5 {
            let start = random_simplex(&mut rng, 3);
            let out = fictitious_play(&inst, &start, &FpOpts::default()).unwrap();
            for (got, want) in out.mu.iter().zip(exact) {
                assert!((got - want).abs() < 1e-6, "{:?}", out.mu);
            }
            assert!(out.iterations < 500);
        }
    }

    #[test]
    fn harmonic_play_converges_slowly_but_surely() {
        let inst = links123();
        let out = fictitious_play(
            &inst,
            &[1.0, 0.0, 0.0],
            &FpOpts {
                max_iter: 2000,
                gap_tol: 0.0,
                eta: FpEta::Harmonic,
            },
        )
        .unwrap();
        for (got, want) in out.mu.iter().zip([6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]) {
            assert!((got - want).abs() < 1e-2, "{:?}", out.mu);
        }
        // The gap trend is downward.
        assert!(out.trace.last().unwrap() < &out.trace[1]);
    }

    #[test]
    fn monotonicity_audit_is_positive_and_flags_flat_links() {
        let report = check_monotonicity(&links123(), 2000, 9);
        assert!(report.min_form > 0.0);
        assert!(report.strictly_monotone);
        assert!(report.zero_slope_nodes.is_empty());

        let flat = FixedSwitchInstance::parallel_links(&[
            mass_ratio(1, 1),
            mass_ratio(2, 1),
            mass_ratio(0, 1),
        ])
        .unwrap();
        let report = check_monotonicity(&flat, 2000, 9);
        // Aggregate still positive: distinct splits always move some paid link.
        assert!(report.min_form > 0.0);
        assert_eq!(report.zero_slope_nodes, vec![2]);
        assert!(!report.strictly_monotone);
    }

    #[test]
    fn staged_monotonicity_with_pinned_fork_is_positive() {
        let min_form = staged_monotonicity(&staged(), 500, 11).unwrap();
        // d = (-1, 2/5, 3/5): d'Ad = 3.6, |d|^2 = 38/25.
        let expect = 3.6 / (38.0 / 25.0);
        assert!((min_form - expect).abs() < 1e-9, "{min_form}");
        assert!(min_form > 0.0);
    }

    #[test]
    fn negative_slopes_are_rejected() {
        match FixedSwitchInstance::parallel_links(&[mass_ratio(-1, 1), mass_ratio(1, 1)]) {
            Err(Error::BadSlope { index: 0, .. }) => {}
            other => panic!("expected BadSlope, got {other:?}"),
        }
    }
}
