//! Split-step finite-element solver for the 2D incompressible Navier-Stokes
//! equations in velocity-pressure form.
//!
//! The solver advances the momentum equations with an explicit AB2 predictor /
//! modified AM2 corrector and obtains the pressure from a Poisson equation at
//! every stage. Equal-order Lagrange elements are used for velocity and
//! pressure; a divergence damping term and a choice of two numerical pressure
//! boundary conditions (the natural Neumann form and a node-normal weighted
//! average of the momentum equations over boundary elements) keep the discrete
//! divergence small and the pressure accurate up to the boundary.
//!
//! The [`modal`] module is an independent toolkit that evaluates the
//! closed-form Laplace-space objects of the associated half-plane model
//! problem: root functions, determinant scans and leading-order boundary-layer
//! coefficients.

pub mod assembly;
pub mod elements;
pub mod error;
pub mod harness;
pub mod linsolve;
pub mod mesh;
pub mod modal;
pub mod splitstep;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
