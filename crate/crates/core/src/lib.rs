//! Mean-field-game model of exhaustible-resource producers in Bertrand or
//! Cournot competition: a backward HJB equation for the value function
//! coupled to a forward Fokker-Planck equation for the reserve
//! distribution through the market price.

pub mod cli;
pub mod error;
pub mod fixed_point;
pub mod fp;
pub mod geometry;
pub mod hjb;
pub mod market;
pub mod variational;
pub mod viscosity;
mod tridiag;
pub mod weak_form;

pub use error::{MfgError, Result};
pub use fixed_point::{solve_mfg, FixedPointOptions, MfgSolution, SolveReport};
pub use geometry::{FieldRole, Grid, ScalarField, TimeSlice};
pub use market::{derive_params, BoundarySpec, MarketParams, MarketPath};
