//! Piecewise-constant mass profiles with exact arithmetic.
//!
//! Every time-dependent quantity the flow machinery produces is a step
//! function of time: a node's mass is constant between consecutive switching
//! instants. Profiles therefore store explicit breakpoints and one value per
//! piece, plus a separate terminal value at `t = T` (mass that arrives
//! exactly at the horizon sits only on that final point).
//!
//! Values are exact rationals ([`Mass`]). Splitting mass by convex
//! coefficients and re-summing it must conserve the total *exactly* — a
//! floating representation loses that under regrouping — so all mass algebra
//! (integrals, combinations, conservation checks) happens in rational
//! arithmetic and converts to `f64` only at the cost-model boundary.
//! Breakpoints stay `f64`: every finite float is a rational, so converting a
//! breakpoint for exact length computations is lossless.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact mass value.
pub type Mass = BigRational;

/// Hard cap on pieces per profile; merging in this crate happens on
/// ε-partitions so realistic profiles stay tiny, and the cap only guards
/// against runaway construction.
pub const MAX_PIECES: usize = 1 << 20;

/// Exact rational image of a finite `f64`.
pub fn mass_from_f64(x: f64) -> Result<Mass> {
    BigRational::from_float(x).ok_or(Error::OutOfRange {
        context: format!("{x} is not a finite mass value"),
    })
}

/// Nearest `f64` of an exact mass value.
pub fn mass_to_f64(x: &Mass) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Convenience: exact rational `n / d`.
pub fn mass_ratio(n: i64, d: i64) -> Mass {
    Mass::new(n.into(), d.into())
}

/// A right-continuous step function on `[0, T]`: value `values[j]` on
/// `[breakpoints[j], breakpoints[j+1])` plus an explicit value at `t = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<Mass>,
    terminal: Mass,
}

impl StepProfile {
    /// Validating constructor. `breakpoints` must be strictly increasing,
    /// start at 0 and end at the horizon; `values` has one entry per piece.
    pub fn new(breakpoints: Vec<f64>, values: Vec<Mass>, terminal: Mass) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{} breakpoints with {} piece values",
                    breakpoints.len(),
                    values.len()
                ),
            });
        }
        if values.len() > MAX_PIECES {
            return Err(Error::OutOfRange {
                context: format!("{} pieces exceed the cap of {MAX_PIECES}", values.len()),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::BadTimes {
                context: "non-finite breakpoint".into(),
            });
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::BadTimes {
                context: format!("first breakpoint {} must be 0", breakpoints[0]),
            });
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::BadTimes {
                    context: format!("breakpoints {} and {} are not strictly increasing", w[0], w[1]),
                });
            }
        }
        Ok(Self {
            breakpoints,
            values,
            terminal,
        })
    }

    /// Profile holding `value` on all of `[0, T]`, including the terminal point.
    pub fn constant(value: Mass, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![value.clone()], value)
    }

    /// The zero profile on `[0, T]`.
    pub fn zero(horizon: f64) -> Result<Self> {
        Self::constant(Mass::zero(), horizon)
    }

    /// Horizon `T` (the last breakpoint).
    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("validated: >= 2 breakpoints")
    }

    /// Number of constant pieces.
    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// Breakpoints `0 = b_0 < ... < b_K = T`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Piece values, one per interval `[b_j, b_{j+1})`.
    pub fn values(&self) -> &[Mass] {
        &self.values
    }

    /// Value at the terminal point `t = T`.
    pub fn terminal(&self) -> &Mass {
        &self.terminal
    }

    /// Value at time `t` (right-continuous; `t = T` returns the terminal value).
    pub fn value_at(&self, t: f64) -> Result<&Mass> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::OutOfRange {
                context: format!("t = {t} outside [0, {horizon}]"),
            });
        }
        if t == horizon {
            return Ok(&self.terminal);
        }
        // partition_point returns the first index with breakpoint > t; the
        // piece index is one less.
        let idx = self.breakpoints.partition_point(|b| *b <= t) - 1;
        Ok(&self.values[idx])
    }

    /// Exact integral of the step function over `[a, b]` (the terminal point
    /// has measure zero and does not contribute).
    pub fn integral_exact(&self, a: f64, b: f64) -> Result<Mass> {
        let horizon = self.horizon();
        if !(a <= b) {
            return Err(Error::BadInterval { a, b });
        }
        if a < 0.0 || b > horizon {
            return Err(Error::BadInterval { a, b });
        }
        let mut acc = Mass::zero();
        for j in 0..self.values.len() {
            let lo = self.breakpoints[j].max(a);
            let hi = self.breakpoints[j + 1].min(b);
            if lo < hi {
                let len = mass_from_f64(hi)? - mass_from_f64(lo)?;
                acc += &self.values[j] * len;
            }
        }
        Ok(acc)
    }

    /// Merges adjacent pieces with equal values; the function is unchanged.
    pub fn compress(&self) -> Self {
        let mut breakpoints = vec![self.breakpoints[0]];
        let mut values: Vec<Mass> = Vec::new();
        for j in 0..self.values.len() {
            if values.last() == Some(&self.values[j]) {
                continue; // extend the previous piece
            }
            if !values.is_empty() {
                breakpoints.push(self.breakpoints[j]);
            }
            values.push(self.values[j].clone());
        }
        breakpoints.push(self.horizon());
        Self {
            breakpoints,
            values,
            terminal: self.terminal.clone(),
        }
    }

    /// Pointwise linear combination `wf * f + wg * g` on the merged partition.
    pub fn combine_linear(wf: &Mass, f: &Self, wg: &Mass, g: &Self) -> Result<Self> {
        let merged = merged_breakpoints(f, g)?;
        let mut values = Vec::with_capacity(merged.len() - 1);
        for w in merged.windows(2) {
            let vf = f.value_at(w[0])?;
            let vg = g.value_at(w[0])?;
            values.push(wf * vf + wg * vg);
        }
        let terminal = wf * &f.terminal + wg * &g.terminal;
        Self::new(merged, values, terminal).map(|p| p.compress())
    }

    /// Largest absolute difference of piece values on the merged partition,
    /// terminal point included.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        let merged = merged_breakpoints(self, other)?;
        let mut worst = (&self.terminal - &other.terminal).abs();
        for w in merged.windows(2) {
            let d = (self.value_at(w[0])? - other.value_at(w[0])?).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(mass_to_f64(&worst))
    }

    /// Exact integral of the squared difference over `[0, T]`.
    pub fn l2_squared_exact(&self, other: &Self) -> Result<Mass> {
        let merged = merged_breakpoints(self, other)?;
        let mut acc = Mass::zero();
        for w in merged.windows(2) {
            let d = self.value_at(w[0])? - other.value_at(w[0])?;
            let len = mass_from_f64(w[1])? - mass_from_f64(w[0])?;
            acc += &d * &d * len;
        }
        Ok(acc)
    }
}

/// Union of the two breakpoint sets (exact float comparison; both profiles
/// must share the horizon).
pub fn merged_breakpoints(f: &StepProfile, g: &StepProfile) -> Result<Vec<f64>> {
    if f.horizon() != g.horizon() {
        return Err(Error::DimensionMismatch {
            context: format!("horizons {} and {}", f.horizon(), g.horizon()),
        });
    }
    let mut merged: Vec<f64> = f
        .breakpoints
        .iter()
        .chain(g.breakpoints.iter())
        .copied()
        .collect();
    merged.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    merged.dedup();
    Ok(merged)
}

/// Exact step-function integral over `[a, b]`, returned as the nearest `f64`.
pub fn time_integral(f: &StepProfile, a: f64, b: f64) -> Result<f64> {
    Ok(mass_to_f64(&f.integral_exact(a, b)?))
}

/// L² distance of two step profiles on the merged partition. The terminal
/// point has measure zero and is ignored.
pub fn l2_distance(f: &StepProfile, g: &StepProfile) -> Result<f64> {
    Ok(mass_to_f64(&f.l2_squared_exact(g)?).sqrt())
}

/// One mass profile per network node, plus the conserved total.
///
/// `total_mass` is the exact sum of the values at `t = 0`; a well-formed
/// evolution keeps the instantaneous sum equal to it at every later time
/// (checked by [`check_conservation`], not enforced by the constructor, so
/// deliberately broken fields can be built for testing).
#[derive(Clone, Debug, PartialEq)]
pub struct MassField {
    profiles: Vec<StepProfile>,
    total: Mass,
    horizon: f64,
    targets: usize,
}

impl MassField {
    /// Builds a field from one profile per node id (`profiles.len() == 2^N`).
    pub fn new(profiles: Vec<StepProfile>, targets: usize) -> Result<Self> {
        if profiles.len() != (1usize << targets) {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{} profiles for a network over {targets} targets (expected {})",
                    profiles.len(),
                    1usize << targets
                ),
            });
        }
        let horizon = profiles[0].horizon();
        if profiles.iter().any(|p| p.horizon() != horizon) {
            return Err(Error::DimensionMismatch {
                context: "profiles with different horizons".into(),
            });
        }
        let mut total = Mass::zero();
        for p in &profiles {
            total += p.value_at(0.0)?;
        }
        for p in &profiles {
            if p.values.iter().chain(std::iter::once(&p.terminal)).any(|v| {
                v.is_negative() || v > &total
            }) && !total.is_zero()
            {
                return Err(Error::OutOfRange {
                    context: "profile value outside [0, total mass]".into(),
                });
            }
        }
        Ok(Self {
            profiles,
            total,
            horizon,
            targets,
        })
    }

    /// Field in which every node holds its initial mass on all of `[0, T]`
    /// (nobody moves). `initial[p]` is the mass parked on node id `p`.
    pub fn parked(initial: &[Mass], targets: usize, horizon: f64) -> Result<Self> {
        let profiles = initial
            .iter()
            .map(|m| StepProfile::constant(m.clone(), horizon))
            .collect::<Result<Vec<_>>>()?;
        Self::new(profiles, targets)
    }

    /// Number of targets `N`.
    pub fn targets(&self) -> usize {
        self.targets
    }

    /// Number of nodes `2^N`.
    pub fn node_count(&self) -> usize {
        self.profiles.len()
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Exact conserved total (sum of the values at `t = 0`).
    pub fn total_mass(&self) -> &Mass {
        &self.total
    }

    /// Profile of node id `p`.
    pub fn profile(&self, p: usize) -> Result<&StepProfile> {
        self.profiles.get(p).ok_or(Error::OutOfRange {
            context: format!("node id {p} out of range 0..{}", self.profiles.len()),
        })
    }

    /// All profiles, indexed by node id.
    pub fn profiles(&self) -> &[StepProfile] {
        &self.profiles
    }

    /// Pointwise convex combination `w * self + (1 - w) * other`.
    pub fn convex_combination(&self, other: &Self, w: &Mass) -> Result<Self> {
        if self.targets != other.targets || self.horizon != other.horizon {
            return Err(Error::DimensionMismatch {
                context: "fields over different networks or horizons".into(),
            });
        }
        if w.is_negative() || w > &Mass::from_integer(1.into()) {
            return Err(Error::BadCoefficients {
                context: format!("convex weight {} outside [0, 1]", mass_to_f64(w)),
            });
        }
        let cw = Mass::from_integer(1.into()) - w;
        let profiles = self
            .profiles
            .iter()
            .zip(&other.profiles)
            .map(|(f, g)| StepProfile::combine_linear(w, f, &cw, g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(profiles, self.targets)
    }
}

/// L² distance between two fields: square root of the summed squared
/// per-node L² distances.
pub fn field_l2_distance(a: &MassField, b: &MassField) -> Result<f64> {
    if a.targets() != b.targets() || a.horizon() != b.horizon() {
        return Err(Error::DimensionMismatch {
            context: "fields over different networks or horizons".into(),
        });
    }
    let mut acc = Mass::zero();
    for (f, g) in a.profiles.iter().zip(&b.profiles) {
        acc += f.l2_squared_exact(g)?;
    }
    Ok(mass_to_f64(&acc).sqrt())
}

/// True iff the instantaneous node sum equals the total mass, within `tol`,
/// at every piece midpoint of the merged partition. With `tol = 0` the
/// comparison is exact rational equality.
pub fn check_conservation(rho: &MassField, tol: f64) -> bool {
    let mut merged: Vec<f64> = rho
        .profiles
        .iter()
        .flat_map(|p| p.breakpoints().iter().copied())
        .collect();
    merged.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    merged.dedup();
    for w in merged.windows(2) {
        // Any interior point of the piece sees the piece value; the midpoint
        // is a convenient representative.
        let mid = 0.5 * (w[0] + w[1]);
        let mut sum = Mass::zero();
        for p in &rho.profiles {
            match p.value_at(mid) {
                Ok(v) => sum += v,
                Err(_) => return false,
            }
        }
        let gap = (&sum - &rho.total).abs();
        if tol == 0.0 {
            if !gap.is_zero() {
                return false;
            }
        } else if mass_to_f64(&gap) > tol {
            return false;
        }
    }
    true
}
