//! Independent solutions of the radial wave equation used to check the
//! Riemann operator: exact descent solutions for odd `n` and a leapfrog
//! solver for any `n`.

mod descent;
mod fd;
mod residual;

pub use descent::{descent_data, descent_derivative, descent_solution, Generator};
pub use fd::{fd_solve, FdField, FdGrid};
pub use residual::{residual, ResidualStats};
