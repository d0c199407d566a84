//! Perspective views of a panorama from an interior camera.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dolly::{adjust_camera, AdjustMode, DollySolution, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::geometry::{dir_to_spherical, spherical_to_uv, CameraPose, Surface, SurfaceHit};
use crate::panorama::{quantize, PanoramaImage, RenderedImage};

/// Which dolly-zoom adjustment to apply before rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DollyMode {
    None,
    Heuristic,
    Optimized,
}

impl std::str::FromStr for DollyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DollyMode::None),
            "heuristic" => Ok(DollyMode::Heuristic),
            "optimized" => Ok(DollyMode::Optimized),
            other => Err(format!(
                "unknown dolly mode `{other}` (expected none|heuristic|optimized)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderRequest {
    pub pose: CameraPose,
    pub surface: Surface,
    pub dolly: DollyMode,
    pub width: u32,
    pub height: u32,
}

impl RenderRequest {
    /// The pose's aspect is replaced by `width / height`.
    pub fn new(
        pose: CameraPose,
        surface: Surface,
        dolly: DollyMode,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidSize(width, height));
        }
        let pose = pose.with_aspect(width as f64 / height as f64)?;
        Ok(RenderRequest {
            pose,
            surface,
            dolly,
            width,
            height,
        })
    }
}

/// Texture coordinates seen through image position `(x, y)`.
pub fn sample_direction(pose: &CameraPose, surface: Surface, x: f64, y: f64) -> (f64, f64) {
    let ray = pose.pixel_ray(x, y);
    match surface.intersect(&pose.pos, &ray) {
        SurfaceHit::Point { point, .. } => match dir_to_spherical(&point) {
            Ok(s) => spherical_to_uv(s),
            // the camera sits exactly on the hit point only for degenerate poses
            Err(_) => spherical_to_uv(dir_to_spherical(&ray).expect("unit ray")),
        },
        SurfaceHit::PoleFallback { theta } => (0.0, if theta == 0.0 { 0.0 } else { 1.0 }),
    }
}

/// Output of [`render`]: the image plus the dolly solution when one was used.
#[derive(Debug, Clone)]
pub struct Rendering {
    pub image: RenderedImage,
    pub solution: Option<DollySolution>,
}

pub fn render(req: &RenderRequest, pano: &PanoramaImage) -> Result<Rendering> {
    let (pose, solution) = match AdjustMode::from_dolly(req.dolly) {
        None => (req.pose, None),
        Some(mode) => {
            let sol = adjust_camera(&req.pose, req.surface, mode, DEFAULT_GRID, DEFAULT_GRID)?;
            (sol.adjusted_pose, Some(sol))
        }
    };
    let image = render_pose(&pose, req.surface, req.width, req.height, pano);
    Ok(Rendering { image, solution })
}

/// Renders `pose` as-is, without any dolly adjustment.
pub fn render_pose(
    pose: &CameraPose,
    surface: Surface,
    width: u32,
    height: u32,
    pano: &PanoramaImage,
) -> RenderedImage {
    let row_len = width as usize * 3;
    let mut pixels = vec![0u8; row_len * height as usize];
    pixels
        .par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(py, row)| {
            let y = (py as f64 + 0.5) / height as f64;
            for (px, out) in row.chunks_exact_mut(3).enumerate() {
                let x = (px as f64 + 0.5) / width as f64;
                let (u, v) = sample_direction(pose, surface, x, y);
                out.copy_from_slice(&quantize(pano.sample_bilinear(u, v)));
            }
        });
    RenderedImage {
        width,
        height,
        pixels,
    }
}
