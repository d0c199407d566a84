//! Off-center perspective rendering of equirectangular panoramas.
//!
//! A camera displaced from the capture point sees the panorama painted on a
//! proxy surface. [`projector`] renders such views through either the unit
//! sphere or an upright unit cylinder (which keeps vertical scene features
//! straight), and [`dolly`] finds an alternative camera position along the
//! looking ray, with refitted field of view, that frames the same region with
//! less barrel distortion. [`evaluation`] sweeps poses and summarizes the
//! resulting distortion statistics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dolly;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod minimize;
pub mod panorama;
pub mod projector;

pub use dolly::{adjust_camera, AdjustMode, DistortionGrid, DollySolution};
pub use error::{Error, Result};
pub use geometry::{CameraPose, Surface, Vec2, Vec3};
pub use panorama::{PanoramaImage, RenderedImage};
pub use projector::{render, DollyMode, RenderRequest};
