//! Source identification for the heat equation on the unit disc from
//! boundary flux recorded by a moving sensor.

pub mod experiment;
pub mod fem;
pub mod sampler;
pub mod shape;
pub mod spectral;
pub mod strategy;
