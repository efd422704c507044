//! Numerical laboratory for the elastic energy of closed curves on the unit
//! 2-sphere: the L2-gradient flow of `integral 1 + k^2`, the family of closed
//! non-geodesic elastica and their closed-form energies, the second variation
//! at the doubly covered great circle, the Z/2 regular-homotopy invariant of
//! tangent frames, and Hopf lifts to Willmore tori in the 3-sphere.

pub mod catalog;
pub mod elastic;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod hopf;
pub mod ind2;
pub mod sphere;
pub mod variation;
pub mod vec3;

mod ode;
mod quat;
mod spectral;

pub use error::{Error, Result};
pub use quat::Quat;
pub use vec3::{UnitVec3, Vec3};
