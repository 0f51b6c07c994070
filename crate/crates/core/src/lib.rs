//! Volumetric path tracing over composable object-centric scattering fields.
//!
//! * [`geom`]: vectors, rays, rigid transforms, boxes, sampling streams.
//! * [`field`]: the scattering-field abstraction and analytic fields.
//! * [`neural`]: trainable neural scattering fields.
//! * [`render`]: ray marching, shadows, indirect bounces, reference renderer.
//! * [`io`]: scene, dataset and image files, image metrics.

pub mod field;
pub mod geom;
pub mod io;
pub mod neural;
pub mod render;
