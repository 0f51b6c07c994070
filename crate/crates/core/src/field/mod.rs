//! Scattering fields: `(position, light direction, view direction) -> (σ, ρ)`.
//!
//! `ρ` is the per-direction fraction of light arriving from the incoming
//! direction that leaves along the outgoing one, bounded to `[0, 1]` per
//! channel. It is not an energy-normalised phase function: integrating it over
//! the sphere may exceed one, and renders built on it need not conserve energy.
//!
//! Direction conventions, fixed everywhere in this crate:
//! * `incoming_dir` points from the shading point toward the light;
//! * `outgoing_dir` is the direction of the viewing ray (camera → point).

mod analytic;
mod instance;

use std::fmt;

pub use analytic::{HomogeneousBox, HomogeneousSphere, LambertianShell};
pub use instance::ObjectInstance;

use crate::geom::{Aabb, Dir3, Rgb, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("field parameter out of domain: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldQuery {
    pub position: Vec3,
    pub incoming_dir: Dir3,
    pub outgoing_dir: Dir3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldResponse {
    pub density: f64,
    pub scatter_fraction: Rgb,
}

pub trait ScatteringField: Send + Sync + fmt::Debug {
    /// Volume density at a canonical-frame position. Must not depend on any
    /// direction.
    fn density(&self, position: Vec3) -> f64;

    /// Raw scatter fraction; callers going through [`ScatteringField::query`]
    /// or [`ObjectInstance`] get it clamped to `[0, 1]`.
    fn scatter(&self, position: Vec3, incoming_dir: Dir3, outgoing_dir: Dir3) -> Rgb;

    /// Canonical-frame box outside of which the density is zero.
    fn canonical_bounds(&self) -> Aabb;

    /// Stable identity hash of the field's parameters.
    fn fingerprint(&self) -> u64;

    fn query(&self, q: &FieldQuery) -> FieldResponse {
        FieldResponse {
            density: self.density(q.position).max(0.0),
            scatter_fraction: self.scatter(q.position, q.incoming_dir, q.outgoing_dir).clamp01(),
        }
    }
}

/// FNV-1a over 64-bit words; stable across builds, unlike `DefaultHasher`.
pub(crate) fn fingerprint_words(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
