//! Randomness, dense linear algebra, special functions and ODE stepping.

pub mod matrix;
pub mod ode;
pub mod pmf;
pub mod rng;
pub mod special;

pub use matrix::{dot, norm, random_orthogonal, Matrix};
pub use ode::{rk4_integrate, rk4_step, rk4_visit, Trajectory, DEFAULT_DT};
pub use pmf::Pmf;
pub use rng::{Dist, RngStream, Sample};
pub use special::lambert_w0;
