//! Exact local dynamics of superattracting skew products
//! f(z, w) = (z^d, w^c + Σ_{j<c} h_j(z) w^j) with c < d.
//!
//! The core acts on Puiseux series in z and on points of the Berkovich
//! unit ball over them. Numeric complex orbits live in [`complexdyn`].

pub mod arith;
pub mod berk;
pub mod coeff;
pub mod complexdyn;
pub mod cover;
pub mod curves;
pub mod error;
pub mod green;
pub mod markov;
pub mod multiplicity;
pub mod normal;
pub mod par;
pub mod series;
pub mod skew;

pub use arith::{ExtQ, Q};
pub use coeff::{Coeff, GaussQ, Mode};
pub use error::{Error, Result};
pub use series::PuiseuxSeries;
pub use skew::SkewMap;
