//! Small numerical building blocks shared by the solvers.

pub mod banded;
pub mod lsq;
pub mod quad;
pub mod roots;
pub mod spline;
pub mod tridiag;

pub use banded::{Banded, SingularMatrix};
pub use spline::CubicSpline;
