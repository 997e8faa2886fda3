//! Fractional Orlicz–Sobolev modulars in one space dimension.
//!
//! * [`orlicz`]: Orlicz functions, conjugates and structural constants.
//! * [`limit_density`]: the local limit density `G~` and sphere moments.
//! * [`grid`]: zero-extended piecewise-linear functions and their modulars.
//! * [`nonlocal`]: block quadrature of the fractional modular and its derivatives.
//! * [`bbm`]: nonlocal-to-local limit, Poincaré and sequence experiments.
//! * [`solver`]: minimisation of the fractional g-Laplacian Dirichlet energy.
//! * [`properties`]: seeded randomized checks of the inequalities above.

pub mod bbm;
pub mod error;
pub mod grid;
pub mod limit_density;
mod nonlocal;
pub mod orlicz;
pub mod properties;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use orlicz::{verify_orlicz, CombineMode, CustomFunction, OrliczFunction, OrliczKind, OrliczReport, StructuralConstants};
pub use limit_density::{ClosedForm, LimitDensity};
pub use grid::GridFunction;
pub use nonlocal::{fractional_modular, ModularForm, QuadratureConfig};
pub use bbm::{bbm_curve, poincare_check, sequence_limit_demo, LimitCurve, PoincareReport, SequenceReport};
pub use solver::{apply_pointwise_eps, energy, energy_gradient, gamma_run, solve, DirichletProblem, GammaReport, Scaling, SolveOptions, SolveResult};
