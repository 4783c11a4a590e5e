//! Time-dependent switching games on a visiting network.
//!
//! A crowd of agents starts at the origin of the network of subsets of `N`
//! targets and must visit every target before a horizon `T`, switching one
//! target at a time. Switching faster costs more, crowded nodes cost more,
//! arriving early at the goal is rewarded and unvisited targets at the
//! horizon are penalized. Each agent optimizes against the time profile of
//! the crowd, and the crowd profile must in turn be generated by optimal
//! behaviour: this crate computes individual value functions, best-response
//! crowd evolutions on a time partition, and the resulting self-consistent
//! (equilibrium) crowd profiles, with exact rational mass accounting.

pub mod cost;
pub mod discretize;
pub mod error;
pub mod flow;
pub mod net;
pub mod value;
pub mod profile;

pub use error::{Error, Result};
