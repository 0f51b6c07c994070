use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::geom::Vec3;

/// Fourier features `sin(2^k π p), cos(2^k π p)` for `k < W`, per component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionalEncoding {
    pub num_frequencies: usize,
    pub include_input: bool,
}

impl PositionalEncoding {
    pub const fn new(num_frequencies: usize, include_input: bool) -> Self {
        Self { num_frequencies, include_input }
    }

    pub fn len_per_component(&self) -> usize {
        2 * self.num_frequencies + self.include_input as usize
    }

    /// Features emitted for a 3-vector.
    pub fn output_len(&self) -> usize {
        3 * self.len_per_component()
    }

    /// Per component: `[p, sin(2⁰πp), cos(2⁰πp), …]`, the raw value present
    /// only with `include_input`.
    pub fn encode(&self, v: Vec3) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_len());
        self.encode_into(v, &mut out);
        out
    }

    pub fn encode_into<S: Scalar>(&self, v: Vec3, out: &mut Vec<S>) {
        for p in v.to_array() {
            if self.include_input {
                out.push(S::of(p));
            }
            let mut freq = PI;
            for _ in 0..self.num_frequencies {
                let (s, c) = (freq * p).sin_cos();
                out.push(S::of(s));
                out.push(S::of(c));
                freq *= 2.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_gives_zero_sines_unit_cosines() {
        let e = PositionalEncoding::new(2, false).encode(Vec3::ZERO);
        assert_eq!(e.len(), 12);
        for pair in e.chunks(2) {
            assert_eq!(pair, [0.0, 1.0]);
        }
    }

    #[test]
    fn unit_x_first_frequency() {
        let e = PositionalEncoding::new(1, false).encode(Vec3::new(1.0, 0.0, 0.0));
        assert!(e[0].abs() < 1e-15);
        assert_eq!(e[1], -1.0);
    }

    #[test]
    fn lengths() {
        assert_eq!(PositionalEncoding::new(10, true).output_len(), 63);
        assert_eq!(PositionalEncoding::new(4, false).output_len(), 24);
        let e = PositionalEncoding::new(3, true).encode(Vec3::new(0.25, -0.5, 0.75));
        assert_eq!(e.len(), 21);
        assert_eq!(e[7], -0.5);
        assert!((e[8 + 2] - (2.0 * PI * -0.5).sin()).abs() < 1e-15);
    }
}
