//! Seeded random test inputs.
//!
//! Inputs are finite sums of Gaussian wave packets
//! `a exp(-pi |x - c|^2 / w^2) e^{2 pi i <nu, x>}`. They are defined on the
//! continuum, so sampling the same packets on a refined or enlarged grid gives
//! the same function. A packet's spectrum falls below `1e-16` of its peak at
//! `|xi - nu| > 3.5/w`, so with the default ranges inputs are band-limited to
//! `|xi| <= 9` up to rounding.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Field, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub amplitude: [f64; 2],
    pub center: [f64; 2],
    pub width: f64,
    pub frequency: [f64; 2],
}

impl Packet {
    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let env = (-PI * (d[0] * d[0] + d[1] * d[1]) / (self.width * self.width)).exp();
        let phase = 2.0 * PI * (self.frequency[0] * x[0] + self.frequency[1] * x[1]);
        Complex64::new(self.amplitude[0], self.amplitude[1]) * Complex64::from_polar(env, phase)
    }
}

/// A seeded sum of packets in dimension 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePackets {
    dim: usize,
    packets: Vec<Packet>,
}

/// Ranges used when drawing packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRanges {
    pub count: usize,
    /// Centres are uniform in `[-c, c]^n`.
    pub center_box: f64,
    pub width: (f64, f64),
    /// Frequencies are uniform in the ball `|nu| <= max_frequency`.
    pub max_frequency: f64,
    /// Real positive amplitudes and zero frequencies, giving `f >= 0`.
    pub nonnegative: bool,
}

impl Default for PacketRanges {
    fn default() -> Self {
        PacketRanges {
            count: 6,
            center_box: 2.0,
            width: (0.5, 1.0),
            max_frequency: 2.0,
            nonnegative: false,
        }
    }
}

impl WavePackets {
    pub fn new(dim: usize, packets: Vec<Packet>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            invalid!("dimension must be 1 or 2, got {dim}");
        }
        if packets.iter().any(|p| !(p.width > 0.0)) {
            invalid!("packet widths must be positive");
        }
        Ok(WavePackets { dim, packets })
    }

    pub fn random(dim: usize, ranges: PacketRanges, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw(dim, ranges, &mut rng)
    }

    pub fn draw(dim: usize, ranges: PacketRanges, rng: &mut impl Rng) -> Result<Self> {
        let (w0, w1) = ranges.width;
        if ranges.count == 0 || !(w0 > 0.0 && w0 <= w1) || !(ranges.center_box >= 0.0) {
            invalid!("packet ranges must have count >= 1 and 0 < w0 <= w1");
        }
        if !(ranges.max_frequency >= 0.0) {
            invalid!("max_frequency must be nonnegative");
        }
        let c = ranges.center_box;
        let coord = |rng: &mut dyn rand::RngCore, a: f64| {
            if a > 0.0 {
                rng.gen_range(-a..=a)
            } else {
                0.0
            }
        };
        let packets = (0..ranges.count)
            .map(|_| {
                let mut center = [0.0; 2];
                let mut frequency = [0.0; 2];
                for x in center.iter_mut().take(dim) {
                    *x = coord(rng, c);
                }
                if !ranges.nonnegative {
                    // Rejection sampling keeps the frequency law uniform on the ball.
                    loop {
                        for x in frequency.iter_mut().take(dim) {
                            *x = coord(rng, ranges.max_frequency);
                        }
                        if frequency[0].hypot(frequency[1]) <= ranges.max_frequency {
                            break;
                        }
                    }
                }
                let width = if w1 > w0 { rng.gen_range(w0..w1) } else { w0 };
                let amplitude = if ranges.nonnegative {
                    [rng.gen_range(0.1..1.0), 0.0]
                } else {
                    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
                };
                Packet {
                    amplitude,
                    center,
                    width,
                    frequency,
                }
            })
            .collect();
        Self::new(dim, packets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        self.packets.iter().map(|p| p.value(x)).sum()
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        if grid.dim() != self.dim {
            invalid!("packets are {}-dimensional, grid is {}-dimensional", self.dim, grid.dim());
        }
        Ok(Field::from_fn(*grid, |x| self.value(x)))
    }
}

/// Per-trial generator: stream `trial` of the ChaCha8 generator seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::forward_transform;

    #[test]
    fn deterministic_and_refinement_consistent() {
        let a = WavePackets::random(2, PacketRanges::default(), 7).unwrap();
        let b = WavePackets::random(2, PacketRanges::default(), 7).unwrap();
        assert_eq!(a, b);
        let coarse = GridSpec::new(2, 8.0, 32).unwrap();
        let fine = coarse.refined();
        let fc = a.sample(&coarse).unwrap();
        let ff = a.sample(&fine).unwrap();
        // Every coarse point is a fine point.
        let n = coarse.samples();
        for i in 0..n {
            for j in 0..n {
                let c = fc.values()[coarse.ravel([i, j])];
                let f = ff.values()[fine.ravel([2 * i, 2 * j])];
                assert!((c - f).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn nonnegative_variant_is_real_and_positive() {
        let ranges = PacketRanges {
            nonnegative: true,
            ..PacketRanges::default()
        };
        let f = WavePackets::random(1, ranges, 3)
            .unwrap()
            .sample(&GridSpec::new(1, 8.0, 256).unwrap())
            .unwrap();
        assert!(f.values().iter().all(|z| z.im == 0.0 && z.re > 0.0));
    }

    #[test]
    fn spectrum_is_concentrated_below_nyquist() {
        let grid = GridSpec::new(1, 8.0, 256).unwrap();
        let f = WavePackets::random(1, PacketRanges::default(), 11)
            .unwrap()
            .sample(&grid)
            .unwrap();
        let spec = forward_transform(&f);
        let tail: f64 = (0..grid.len())
            .filter(|&k| grid.frequency(k)[0].abs() > 9.0)
            .map(|k| spec.coeffs()[k].norm())
            .fold(0.0, f64::max);
        assert!(tail < 1e-12);
    }
}
