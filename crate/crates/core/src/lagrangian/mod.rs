//! Particle flows of band-limited velocity fields: forward and backward maps,
//! a scale-limited volume-preservation certificate, scalar pushforward and
//! renormalization checks.

mod flow;
mod quality;
mod transport;

pub use flow::{flow_distance, gronwall_bound, integrate_flow, seed_grid, torus_distance, wrap, Direction, FlowMap, FlowOptions};
pub use quality::{cell_counts, certify, compose_inverse, volume_check, Binning, FlowQuality, VolumeOptions};
pub use transport::{pushforward, renormalize_check, Renormalizer, TEST_WAVEVECTORS};
