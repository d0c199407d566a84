//! Coordinate conventions, the pinhole camera, ray construction and
//! ray/surface intersections.
//!
//! The panorama lives on the unit sphere centered at the origin. `+z` is up
//! (zenith 0), `+x` is azimuth 0 on the horizon, and azimuth grows
//! counterclockwise about `+z`. The alternative proxy surface is the upright
//! unit-radius cylinder around the z-axis.

use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Cameras must stay at least this far inside the unit surface.
pub const INSIDE_MARGIN: f64 = 1e-6;

/// Rays whose horizontal squared length is below this never meet the cylinder.
pub const AXIS_EPSILON: f64 = 1e-9;

const DEGENERATE_BASIS: f64 = 1e-9;

/// Proxy surface the panorama is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    /// Unit sphere centered at the origin.
    Sphere,
    /// Unit-radius infinite cylinder with its axis on `z`.
    Cylinder,
}

impl Surface {
    pub fn as_str(self) -> &'static str {
        match self {
            Surface::Sphere => "sphere",
            Surface::Cylinder => "cylinder",
        }
    }

    /// Central projection of `p` from the origin onto the surface, i.e. `p`
    /// scaled so that it lands on the sphere or on the cylinder wall.
    pub fn project_radially(self, p: &Vec3) -> Result<Vec3> {
        match self {
            Surface::Sphere => {
                let n = p.norm();
                if n == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(p / n)
            }
            Surface::Cylinder => {
                let r = p.x.hypot(p.y);
                if r < AXIS_EPSILON {
                    return Err(Error::ZeroVector);
                }
                Ok(p / r)
            }
        }
    }

    /// Intersection of the ray leaving `origin` along `ray` with this surface.
    pub fn intersect(self, origin: &Vec3, ray: &Vec3) -> SurfaceHit {
        match self {
            Surface::Sphere => {
                let (point, t) = intersect_sphere(origin, ray);
                SurfaceHit::Point { point, t }
            }
            Surface::Cylinder => intersect_cylinder(origin, ray),
        }
    }
}

impl std::str::FromStr for Surface {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sphere" => Ok(Surface::Sphere),
            "cylinder" => Ok(Surface::Cylinder),
            other => Err(format!(
                "unknown surface `{other}` (expected sphere|cylinder)"
            )),
        }
    }
}

/// Result of casting a ray at a proxy surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceHit {
    Point {
        point: Vec3,
        t: f64,
    },
    /// Near-vertical ray against the cylinder; samples the pole row.
    PoleFallback {
        theta: f64,
    },
}

impl SurfaceHit {
    pub fn point(&self) -> Option<Vec3> {
        match *self {
            SurfaceHit::Point { point, .. } => Some(point),
            SurfaceHit::PoleFallback { .. } => None,
        }
    }
}

/// Zenith/azimuth pair. `theta` in `[0, π]` from `+z`, `phi` in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    pub theta: f64,
    pub phi: f64,
}

/// A pinhole camera inside the unit surface.
///
/// `left`, `up` and `dir` form a right-handed orthonormal basis with
/// `left = up × dir`. Horizontal extent is stored as two half-angles so that
/// skewed frusta produced by the dolly-zoom refit can be represented; the
/// vertical field of view is a full, symmetric angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub pos: Vec3,
    pub dir: Vec3,
    pub up: Vec3,
    pub left: Vec3,
    pub fovx_left: f64,
    pub fovx_right: f64,
    pub fovy: f64,
    pub aspect: f64,
}

impl CameraPose {
    /// Builds a symmetric camera. `up` is re-orthogonalized against `dir`.
    pub fn new(pos: Vec3, dir: Vec3, up: Vec3, fovx: f64, aspect: f64) -> Result<Self> {
        check_inside(&pos)?;
        if !(fovx > 0.0 && fovx < PI) {
            return Err(Error::InvalidFov(fovx));
        }
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(Error::InvalidAspect(aspect));
        }
        let (dir, up, left) = orthonormal_basis(&dir, &up)?;
        Ok(CameraPose {
            pos,
            dir,
            up,
            left,
            fovx_left: fovx / 2.0,
            fovx_right: fovx / 2.0,
            fovy: 2.0 * ((fovx / 2.0).tan() / aspect).atan(),
            aspect,
        })
    }

    /// Camera from Euler angles in radians: yaw about `+z`, then pitch about
    /// the camera's left axis (positive looks up), then roll about the looking
    /// direction (positive turns the image clockwise). The unrotated camera
    /// looks along `+x` with `+z` up.
    pub fn from_euler(
        pos: Vec3,
        yaw: f64,
        pitch: f64,
        roll: f64,
        fovx: f64,
        aspect: f64,
    ) -> Result<Self> {
        let (dir, up) = euler_basis(yaw, pitch, roll);
        Self::new(pos, dir, up, fovx, aspect)
    }

    pub fn tan_left(&self) -> f64 {
        self.fovx_left.tan()
    }

    pub fn tan_right(&self) -> f64 {
        self.fovx_right.tan()
    }

    /// Tangent of half the vertical field of view.
    pub fn tan_half_fovy(&self) -> f64 {
        (self.fovy / 2.0).tan()
    }

    /// Total horizontal field of view.
    pub fn fovx(&self) -> f64 {
        self.fovx_left + self.fovx_right
    }

    pub fn is_symmetric(&self) -> bool {
        self.fovx_left == self.fovx_right
    }

    /// Same horizontal extent, vertical extent recomputed for a new aspect.
    pub fn with_aspect(&self, aspect: f64) -> Result<Self> {
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(Error::InvalidAspect(aspect));
        }
        if aspect == self.aspect {
            return Ok(*self);
        }
        let half_width = (self.tan_left() + self.tan_right()) / 2.0;
        Ok(CameraPose {
            aspect,
            fovy: 2.0 * (half_width / aspect).atan(),
            ..*self
        })
    }

    /// Unit ray through the normalized image position `(x, y)`; `x` runs left
    /// to right, `y` top to bottom, both in `[0, 1]`.
    pub fn pixel_ray(&self, x: f64, y: f64) -> Vec3 {
        let horizontal = if self.is_symmetric() {
            (1.0 - 2.0 * x) * self.fovx_left.tan()
        } else {
            (1.0 - x) * self.tan_left() - x * self.tan_right()
        };
        let vertical = (1.0 - 2.0 * y) * self.tan_half_fovy();
        (self.dir + self.left * horizontal + self.up * vertical).normalize()
    }

    /// World point to view space: camera at the origin, `left`, `up`, `dir`
    /// along `-x`, `+y`, `-z`.
    pub fn view_transform(&self, p: &Vec3) -> Vec3 {
        let q = p - self.pos;
        Vec3::new(-q.dot(&self.left), q.dot(&self.up), -q.dot(&self.dir))
    }

    /// Perspective projection of a view-space point onto the normalized image
    /// plane, scaled by the plane's half-extents. Returns `None` for points on
    /// or behind the camera plane.
    pub fn project_view(&self, v: &Vec3) -> Option<Vec2> {
        let depth = -v.z;
        if !(depth > 0.0) {
            return None;
        }
        let tan_v = self.tan_half_fovy();
        Some(Vec2::new(
            v.x / (self.aspect * tan_v * depth),
            v.y / (tan_v * depth),
        ))
    }
}

/// `(dir, up, left)` from a looking direction and an approximate up vector.
pub fn orthonormal_basis(dir: &Vec3, up: &Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let dn = dir.norm();
    let un = up.norm();
    if dn == 0.0 || un == 0.0 || !dn.is_finite() || !un.is_finite() {
        return Err(Error::DegenerateBasis);
    }
    let d = dir / dn;
    let u0 = up / un;
    if d.cross(&u0).norm() < DEGENERATE_BASIS {
        return Err(Error::DegenerateBasis);
    }
    let u = (u0 - d * d.dot(&u0)).normalize();
    let l = u.cross(&d);
    Ok((d, u, l))
}

/// `(dir, up)` for yaw/pitch/roll in radians (see [`CameraPose::from_euler`]).
pub fn euler_basis(yaw: f64, pitch: f64, roll: f64) -> (Vec3, Vec3) {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let dir0 = Vec3::new(cy, sy, 0.0);
    let up0 = Vec3::z();
    let dir = dir0 * cp + up0 * sp;
    let up1 = up0 * cp - dir0 * sp;
    let left = up1.cross(&dir);
    let up = up1 * cr - left * sr;
    (dir, up)
}

fn check_inside(pos: &Vec3) -> Result<()> {
    let r = pos.norm();
    if !(r < 1.0 - INSIDE_MARGIN) {
        return Err(Error::PoseOutsideSurface(r));
    }
    Ok(())
}

/// Far intersection of `origin + t·ray` with the unit sphere.
///
/// `origin` must be strictly inside, so the constant term is negative and the
/// larger root is the only positive one.
pub fn intersect_sphere(origin: &Vec3, ray: &Vec3) -> (Vec3, f64) {
    let a = ray.norm_squared();
    let b = 2.0 * origin.dot(ray);
    let c = origin.norm_squared() - 1.0;
    let t = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    (origin + ray * t, t)
}

/// Far intersection of `origin + t·ray` with the upright unit cylinder.
pub fn intersect_cylinder(origin: &Vec3, ray: &Vec3) -> SurfaceHit {
    let a = ray.x * ray.x + ray.y * ray.y;
    if a < AXIS_EPSILON {
        let theta = if ray.z >= 0.0 { 0.0 } else { PI };
        return SurfaceHit::PoleFallback { theta };
    }
    let b = 2.0 * (origin.x * ray.x + origin.y * ray.y);
    let c = origin.x * origin.x + origin.y * origin.y - 1.0;
    let t = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    SurfaceHit::Point {
        point: origin + ray * t,
        t,
    }
}

pub fn dir_to_spherical(v: &Vec3) -> Result<SphericalCoord> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let theta = (v.z / n).clamp(-1.0, 1.0).acos();
    let mut phi = v.y.atan2(v.x);
    if phi < 0.0 {
        phi += TAU;
    }
    // -0.0 and values that round up to 2π both land on the seam.
    if phi >= TAU || phi == 0.0 {
        phi = 0.0;
    }
    Ok(SphericalCoord { theta, phi })
}

/// Equirectangular texture coordinates `(phi / 2π, theta / π)`.
pub fn spherical_to_uv(s: SphericalCoord) -> (f64, f64) {
    (s.phi / TAU, s.theta / PI)
}
