//! Numerical laboratory for monostable traveling fronts: wave profiles,
//! minimal speeds, tail classification (pulled, pushed, noncritical),
//! Cauchy-problem dynamics and piecewise comparison certificates.

pub mod certificates;
pub mod dynamics;
pub mod models;
pub mod numerics;
pub mod spectral;
pub mod tails;
pub mod waves;
