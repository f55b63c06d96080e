//! Numeric kernel: dense simplex LP, bracketing root finder, adaptive
//! quadrature and a small dense linear solver.

mod linsolve;
mod quadrature;
mod roots;
mod simplex;

pub use linsolve::solve_linear;
pub use quadrature::{integrate, integrate_with_breaks};
pub use roots::bisect;
pub use simplex::{solve_lp, LinearProgram, LpSolution, LpStatus};
