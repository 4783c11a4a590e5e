//! Rounding optimal switching instants onto a coarse time partition.
//!
//! The crowd game is discretized on a partition of `[0, T]` into `m` equal
//! cells of length `eps = T/m`; crowd-level switching happens only at
//! partition instants. The individual solvers run on a finer grid (an
//! integer multiple of the partition), and their optimal instants are
//! mapped onto the partition by nearest-instant rounding:
//!
//! * instants on the fine grid round by exact integer arithmetic;
//! * free (analytic) instants round by floating comparison with a relative
//!   midpoint tolerance;
//! * an instant exactly halfway between two partition instants rounds to
//!   *both*;
//! * a run of adjacent tied fine-grid minimizers (a flat stretch of the
//!   objective) rounds to *every* partition instant its closure touches;
//! * a rounded instant landing on the decision instant itself is bumped one
//!   cell forward (switching requires strictly increasing instants), and the
//!   bump is counted as a rounding collision.

use crate::error::{Error, Result};
use crate::net::Node;
use crate::value::{ArgminPair, TimeGrid, ValueTable};

/// A partition of the horizon into `m` equal cells, commensurate with a
/// finer solver grid.
#[derive(Clone, Copy, Debug)]
pub struct EpsPartition {
    m: usize,
    grid: TimeGrid,
    grid_divisor: usize,
}

impl EpsPartition {
    /// Requires the fine grid to refine the partition exactly.
    pub fn new(grid: TimeGrid, m: usize) -> Result<Self> {
        if m == 0 || grid.steps() % m != 0 {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "partition with {m} cells does not divide a grid with {} steps",
                    grid.steps()
                ),
            });
        }
        Ok(Self {
            m,
            grid,
            grid_divisor: grid.steps() / m,
        })
    }

    /// Number of cells `m`.
    pub fn cells(&self) -> usize {
        self.m
    }

    /// Cell length `eps = T/m`.
    pub fn eps(&self) -> f64 {
        self.grid.horizon() / self.m as f64
    }

    /// Fine-grid steps per cell.
    pub fn grid_divisor(&self) -> usize {
        self.grid_divisor
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// Time of partition instant `k` (a fine-grid time, bit-identical to the
    /// solver's).
    pub fn time(&self, k: usize) -> f64 {
        debug_assert!(k <= self.m);
        self.grid.t(k * self.grid_divisor)
    }

    /// Fine-grid index of partition instant `k`.
    pub fn grid_index(&self, k: usize) -> usize {
        k * self.grid_divisor
    }

    /// Nearest partition instants of fine-grid index `j`, by exact integer
    /// arithmetic; two instants exactly at a midpoint.
    pub fn round_grid_instant(&self, j: usize) -> Result<Vec<usize>> {
        if j > self.grid.steps() {
            return Err(Error::BoundaryQuery {
                context: format!("grid index {j} beyond the horizon"),
            });
        }
        let q = j / self.grid_divisor;
        let r = j % self.grid_divisor;
        Ok(match (2 * r).cmp(&self.grid_divisor) {
            std::cmp::Ordering::Less => vec![q],
            std::cmp::Ordering::Greater => vec![q + 1],
            std::cmp::Ordering::Equal => vec![q, q + 1],
        })
    }

    /// Nearest partition instants of a free instant `tau`, with a relative
    /// midpoint tolerance.
    pub fn round_instant(&self, tau: f64) -> Result<Vec<usize>> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&tau) {
            return Err(Error::BoundaryQuery {
                context: format!("instant {tau} outside [0, {horizon}]"),
            });
        }
        let u = tau * self.m as f64 / horizon;
        let lo = u.floor();
        let frac = u - lo;
        let k = lo as usize;
        let tol = 1e-9;
        Ok(if (frac - 0.5).abs() <= tol {
            vec![k, k + 1]
        } else if frac < 0.5 {
            vec![k]
        } else {
            vec![(k + 1).min(self.m)]
        })
    }
}

/// One rounded best-response move: from the decision point, switch to node
/// id `succ` at partition instant `part_idx`. `source_tau` is the
/// unrounded optimal instant it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsTarget {
    pub succ: usize,
    pub part_idx: usize,
    pub source_tau: f64,
}

/// Rounds every minimizing first move at decision point `(p, instant k)`
/// onto the partition. Returns the targets (sorted, deduplicated) and the
/// number of rounding collisions (instants bumped off the decision instant).
pub fn eps_argmin_map(
    table: &ValueTable,
    part: &EpsPartition,
    p: Node,
    k: usize,
) -> Result<(Vec<EpsTarget>, usize)> {
    if k > part.cells() {
        return Err(Error::BoundaryQuery {
            context: format!("partition instant {k} beyond cell count {}", part.cells()),
        });
    }
    let pairs = table.argmins(p, part.grid_index(k));
    let mut rounded: Vec<(usize, usize, f64)> = Vec::new(); // (succ, instant, tau)

    // Group pairs by successor, preserving instant order within each group.
    let mut by_succ: Vec<(usize, Vec<&ArgminPair>)> = Vec::new();
    for pair in pairs {
        match by_succ.iter_mut().find(|(s, _)| *s == pair.succ) {
            Some((_, v)) => v.push(pair),
            None => by_succ.push((pair.succ, vec![pair])),
        }
    }

    for (succ, group) in by_succ {
        // Split the group into runs of adjacent fine-grid ties; isolated
        // (off-grid or single) instants are runs of length one.
        let mut runs: Vec<Vec<&ArgminPair>> = Vec::new();
        for pair in group {
            let adjacent = matches!(
                (runs.last().and_then(|r| r.last()), pair.tau_idx),
                (Some(prev), Some(j)) if j > 0 && prev.tau_idx == Some(j - 1)
            );
            if adjacent {
                runs.last_mut().expect("non-empty").push(pair);
            } else {
                runs.push(vec![pair]);
            }
        }
        for run in runs {
            let first = run.first().expect("non-empty run");
            let last = run.last().expect("non-empty run");
            let round = |pair: &ArgminPair| -> Result<Vec<usize>> {
                match pair.tau_idx {
                    Some(j) => part.round_grid_instant(j),
                    None => part.round_instant(pair.tau),
                }
            };
            let klo = *round(first)?.iter().min().expect("non-empty rounding");
            let khi = *round(last)?.iter().max().expect("non-empty rounding");
            for k_target in klo..=khi {
                rounded.push((succ, k_target, first.tau));
            }
        }
    }

    // Bump instants that collide with the decision instant, then dedupe.
    let mut collisions = 0usize;
    let mut targets: Vec<EpsTarget> = Vec::new();
    for (succ, k_target, tau) in rounded {
        let part_idx = if k_target <= k {
            collisions += 1;
            k + 1
        } else {
            k_target
        };
        if part_idx > part.cells() {
            return Err(Error::BoundaryQuery {
                context: format!("rounded instant {part_idx} beyond the horizon"),
            });
        }
        if !targets
            .iter()
            .any(|t| t.succ == succ && t.part_idx == part_idx)
        {
            targets.push(EpsTarget {
                succ,
                part_idx,
                source_tau: tau,
            });
        }
    }
    targets.sort_by(|a, b| (a.succ, a.part_idx).cmp(&(b.succ, b.part_idx)));
    Ok((targets, collisions))
}
