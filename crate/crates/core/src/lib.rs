//! Fractional Sobolev energies of grid-sampled maps, liftings through
//! Riemannian coverings, sum-space decompositions and an inequality
//! verification harness.

pub mod covering;
pub mod decompose;
pub mod domain;
pub mod energy;
pub mod error;
pub mod ineq_lab;
pub mod lifting;
pub mod numeric;

pub use covering::{CoveringChart, CoveringFamily, DeckElement, Point, TargetGeometry};
pub use domain::{make_domain, DomainKind, GridDomain, LinePath};
pub use energy::{EnergyParams, EnergyValue, Field};
pub use error::{Error, Result};
