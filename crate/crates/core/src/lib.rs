//! Asymptotically flat initial data sets with corners.

pub mod numgrid;
pub mod geometry;
pub mod corner;
pub mod masses;
pub mod extension;
pub mod harmonic;
