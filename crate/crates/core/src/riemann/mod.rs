//! The Riemann operator `L`, its derived representations and the radial
//! solution `u0 = Lψ + ∂_t Lφ`.

mod operator;
mod profile;
mod solution;

pub use operator::Riemann;
pub use profile::{bump_taylor, Envelope, ProfileFn, RadialProfile};
pub use solution::{central_richardson, Route, SolutionEval};
