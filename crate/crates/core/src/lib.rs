//! Tropical degenerations of plane curves and their period matrices.

pub mod cpoly;
pub mod numverify;
pub mod periods;
pub mod plpoly;
pub mod puiseux;
pub mod roots;
pub mod tropcurve;
