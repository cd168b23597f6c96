//! Independent checks: shooting for the radial ODE and profile comparison.

mod compare;
mod shooting;

pub use compare::{compare, sampled_peaks, Metrics, Peak, Window};
pub use shooting::{
    bisect_threshold, find_tower, predicted_height, shoot, Classification, ShootConfig, ShotProfile,
};
