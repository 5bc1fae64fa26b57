use alloc::vec::Vec;

use crate::stats;

/// Per-channel standardization fitted on training data. Channel 0 is the
/// forecast target.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Population mean and standard deviation of each channel; a channel
    /// with (numerically) zero spread gets unit scale.
    pub fn fit(channels: &[&[f64]]) -> Self {
        let mut mean = Vec::with_capacity(channels.len());
        let mut std = Vec::with_capacity(channels.len());
        for c in channels {
            let m = stats::mean(c);
            let s = stats::std_dev(c);
            mean.push(m);
            std.push(if s > 1e-12 * m.abs().max(1.0) { s } else { 1.0 });
        }
        Self { mean, std }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn standardize(&self, channel: usize, x: f64) -> f64 {
        (x - self.mean[channel]) / self.std[channel]
    }

    pub fn destandardize(&self, channel: usize, z: f64) -> f64 {
        z * self.std[channel] + self.mean[channel]
    }
}
