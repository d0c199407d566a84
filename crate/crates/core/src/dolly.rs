//! Computational dolly-zoom.
//!
//! An off-center camera bends straight scene lines because the panorama is
//! painted on a curved proxy surface. Moving the camera along its looking
//! direction and re-fitting the field of view to keep the same left/right
//! boundary points framed trades that curvature for a different stretch.
//!
//! Sign convention: `t` is a *backward* displacement, the adjusted camera sits
//! at `pos - t·dir`.
//!
//! The distortion of a pose is measured on a grid spanned by the frustum
//! corners on the surface: the corners are bilinearly interpolated, every
//! vertex is projected from the origin back onto the surface, and the squared 2D cross
//! products of consecutive vertex triples along rows and columns of the
//! projected grid are summed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraPose, Surface, SurfaceHit, Vec2, Vec3, INSIDE_MARGIN};
use crate::minimize::Minimizer;
use crate::projector::DollyMode;

/// Grid resolution used when the caller does not choose one.
pub const DEFAULT_GRID: usize = 10;

/// Minimum view-space depth a grid vertex may have under any offset.
pub const MIN_DEPTH: f64 = 1e-6;

/// Dot products this small against a unit direction are rounding noise.
const ORTHOGONAL_NOISE: f64 = 4.0 * f64::EPSILON;

/// Half-width, relative to `1 + |t|`, of the window searched for a derivative
/// root around the derivative-free minimum.
const POLISH_WIDTH: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjustMode {
    Heuristic,
    Optimized,
}

impl AdjustMode {
    pub fn from_dolly(mode: DollyMode) -> Option<Self> {
        match mode {
            DollyMode::None => None,
            DollyMode::Heuristic => Some(AdjustMode::Heuristic),
            DollyMode::Optimized => Some(AdjustMode::Optimized),
        }
    }
}

impl std::str::FromStr for AdjustMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "heuristic" => Ok(AdjustMode::Heuristic),
            "optimized" => Ok(AdjustMode::Optimized),
            other => Err(format!(
                "unknown mode `{other}` (expected heuristic|optimized)"
            )),
        }
    }
}

/// Squared 2D cross product of `b - a` and `c - a`; zero iff collinear.
pub fn linearity(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    let cross = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    cross * cross
}

/// Projects a view-space point for a camera moved back by `t` along the view
/// axis, with the image plane re-zoomed so the grid plane at depth `base`
/// keeps the half-height `half_height`.
pub fn project_with_offset(
    v: &Vec3,
    t: f64,
    base: f64,
    half_height: f64,
    aspect: f64,
) -> Result<Vec2> {
    let depth = -v.z + t;
    if !(depth > 0.0) || !(base + t > 0.0) {
        return Err(Error::PointBehindCamera(depth));
    }
    let zoom = half_height / (base + t);
    Ok(Vec2::new(
        v.x / (aspect * zoom * depth),
        v.y / (zoom * depth),
    ))
}

/// Sum of [`linearity`] over consecutive triples of every row and column of a
/// `(rows + 1) × (cols + 1)` row-major lattice.
fn grid_linearity(points: &[Vec2], rows: usize, cols: usize) -> f64 {
    let at = |i: usize, j: usize| &points[i * (cols + 1) + j];
    let mut sum = 0.0;
    for i in 0..=rows {
        for j in 1..cols {
            sum += linearity(at(i, j - 1), at(i, j), at(i, j + 1));
        }
    }
    for j in 0..=cols {
        for i in 1..rows {
            sum += linearity(at(i - 1, j), at(i, j), at(i + 1, j));
        }
    }
    sum
}

/// Surface grid spanned by a camera's frustum corners.
#[derive(Debug, Clone)]
pub struct DistortionGrid {
    pub rows: usize,
    pub cols: usize,
    /// Surface points, row-major, `(rows + 1) × (cols + 1)`.
    pub verts: Vec<Vec3>,
    /// `verts` in the camera's view space.
    pub verts_view: Vec<Vec3>,
    /// Mean view depth of the four corners.
    pub base: f64,
    /// `base · tan(fovy / 2)`.
    pub half_height: f64,
    pub aspect: f64,
}

impl DistortionGrid {
    pub fn build(pose: &CameraPose, surface: Surface, rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::GridTooSmall { rows, cols });
        }
        let corner = |x: f64, y: f64| match surface.intersect(&pose.pos, &pose.pixel_ray(x, y)) {
            SurfaceHit::Point { point, t } if t > 0.0 => Ok(point),
            _ => Err(Error::CornerBehindCamera),
        };
        let top_left = corner(0.0, 0.0)?;
        let top_right = corner(1.0, 0.0)?;
        let bottom_left = corner(0.0, 1.0)?;
        let bottom_right = corner(1.0, 1.0)?;

        let n = (rows + 1) * (cols + 1);
        let mut verts = Vec::with_capacity(n);
        let mut verts_view = Vec::with_capacity(n);
        for i in 0..=rows {
            let r = i as f64 / rows as f64;
            let left = top_left * (1.0 - r) + bottom_left * r;
            let right = top_right * (1.0 - r) + bottom_right * r;
            for j in 0..=cols {
                let s = j as f64 / cols as f64;
                let v = surface.project_radially(&(left * (1.0 - s) + right * s))?;
                let vv = pose.view_transform(&v);
                if !(vv.z < 0.0) {
                    return Err(Error::PointBehindCamera(-vv.z));
                }
                verts.push(v);
                verts_view.push(vv);
            }
        }

        let base = [top_left, top_right, bottom_left, bottom_right]
            .iter()
            .map(|c| -pose.view_transform(c).z)
            .sum::<f64>()
            / 4.0;
        Ok(DistortionGrid {
            rows,
            cols,
            verts,
            verts_view,
            base,
            half_height: base * pose.tan_half_fovy(),
            aspect: pose.aspect,
        })
    }

    pub fn vertex(&self, i: usize, j: usize) -> &Vec3 {
        &self.verts[i * (self.cols + 1) + j]
    }

    /// Smallest offset keeping every vertex at least [`MIN_DEPTH`] in front.
    pub fn min_offset(&self) -> f64 {
        let nearest = self
            .verts_view
            .iter()
            .map(|v| v.z)
            .fold(f64::NEG_INFINITY, f64::max);
        (nearest + MIN_DEPTH).max(-self.base + MIN_DEPTH)
    }

    /// Grid projected from a camera offset by `t`.
    pub fn project(&self, t: f64) -> Result<Vec<Vec2>> {
        self.verts_view
            .iter()
            .map(|v| project_with_offset(v, t, self.base, self.half_height, self.aspect))
            .collect()
    }

    /// Distortion objective as a function of the offset `t`.
    pub fn objective(&self, t: f64) -> Result<f64> {
        Ok(grid_linearity(&self.project(t)?, self.rows, self.cols))
    }

    /// Objective and its derivative with respect to `t`.
    pub fn objective_with_derivative(&self, t: f64) -> Result<(f64, f64)> {
        let mut points = Vec::with_capacity(self.verts_view.len());
        let mut slopes = Vec::with_capacity(self.verts_view.len());
        for v in &self.verts_view {
            let p = project_with_offset(v, t, self.base, self.half_height, self.aspect)?;
            // V = (B + t) / (H (t - z)) · (x / aspect, y)
            let depth = t - v.z;
            let dscale = (-v.z - self.base) / (self.half_height * depth * depth);
            points.push(p);
            slopes.push(Vec2::new(v.x / self.aspect, v.y) * dscale);
        }
        let cols = self.cols;
        let idx = |i: usize, j: usize| i * (cols + 1) + j;
        let mut value = 0.0;
        let mut deriv = 0.0;
        let mut triple = |a: usize, b: usize, c: usize| {
            let (pa, pb, pc) = (points[a], points[b], points[c]);
            let (da, db, dc) = (slopes[a], slopes[b], slopes[c]);
            let (ab, ac) = (pb - pa, pc - pa);
            let (dab, dac) = (db - da, dc - da);
            let cross = ab.x * ac.y - ac.x * ab.y;
            let dcross = dab.x * ac.y + ab.x * dac.y - dac.x * ab.y - ac.x * dab.y;
            value += cross * cross;
            deriv += 2.0 * cross * dcross;
        };
        for i in 0..=self.rows {
            for j in 1..self.cols {
                triple(idx(i, j - 1), idx(i, j), idx(i, j + 1));
            }
        }
        for j in 0..=self.cols {
            for i in 1..self.rows {
                triple(idx(i - 1, j), idx(i, j), idx(i + 1, j));
            }
        }
        Ok((value, deriv))
    }

    /// Bisects the derivative inside `[lo, hi]` when it changes sign from
    /// negative to positive there.
    fn polish(&self, lo: f64, hi: f64) -> Option<f64> {
        let slope = |t: f64| self.objective_with_derivative(t).ok().map(|(_, d)| d);
        let (mut a, mut b) = (lo, hi);
        if !(slope(a)? < 0.0 && slope(b)? > 0.0) {
            return None;
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if slope(m)? > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

/// Distortion of `pose` measured through its own perspective projection.
pub fn distortion_value(
    pose: &CameraPose,
    surface: Surface,
    rows: usize,
    cols: usize,
) -> Result<f64> {
    let grid = DistortionGrid::build(pose, surface, rows, cols)?;
    let points = grid
        .verts_view
        .iter()
        .map(|v| pose.project_view(v).ok_or(Error::PointBehindCamera(-v.z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid_linearity(&points, rows, cols))
}

/// Backward offset bringing the camera to the point of its looking line
/// nearest the origin.
pub fn heuristic_offset(pose: &CameraPose) -> f64 {
    let t = pose.pos.dot(&pose.dir);
    if t.abs() <= ORTHOGONAL_NOISE {
        0.0
    } else {
        t
    }
}

/// Position reached with [`heuristic_offset`]. A residue across `dir` at
/// rounding level is flushed, so a pure dolly lands exactly on the origin.
pub fn heuristic_position(pose: &CameraPose) -> Vec3 {
    let p = pose.pos - pose.dir * heuristic_offset(pose);
    if p.norm() <= ORTHOGONAL_NOISE * pose.pos.norm() {
        Vec3::zeros()
    } else {
        p
    }
}

/// Offsets `t` for which `pos - t·dir` stays inside the unit ball with margin.
pub fn inside_interval(pose: &CameraPose) -> Option<(f64, f64)> {
    let pd = pose.pos.dot(&pose.dir);
    let r = 1.0 - INSIDE_MARGIN;
    let disc = pd * pd - pose.pos.norm_squared() + r * r;
    if !(disc > 0.0) {
        return None;
    }
    let s = disc.sqrt();
    Some((pd - s, pd + s))
}

/// Offset minimizing the grid objective of the original pose.
pub fn optimize_offset(
    pose: &CameraPose,
    surface: Surface,
    rows: usize,
    cols: usize,
) -> Result<f64> {
    let grid = DistortionGrid::build(pose, surface, rows, cols)?;
    optimize_on_grid(pose, &grid)
}

/// Feasible offset range for optimizing on `grid`.
pub fn feasible_interval(pose: &CameraPose, grid: &DistortionGrid) -> Result<(f64, f64)> {
    let (lo, hi) = inside_interval(pose).ok_or(Error::InfeasibleInterval)?;
    let lo = lo.max(grid.min_offset());
    if !(lo < hi) {
        return Err(Error::InfeasibleInterval);
    }
    Ok((lo, hi))
}

/// Minimizes the grid objective over the feasible offsets.
///
/// A derivative-free search (scan plus Brent) finds the basin; the derivative
/// root is then bisected to pin `t` beyond what function values alone resolve
/// near a flat minimum. The untouched pose (`t = 0`) and the heuristic offset
/// are kept as candidates so the result never does worse than either.
pub fn optimize_on_grid(pose: &CameraPose, grid: &DistortionGrid) -> Result<f64> {
    let (lo, hi) = feasible_interval(pose, grid)?;
    let f = |t: f64| grid.objective(t).unwrap_or(f64::INFINITY);
    let min = Minimizer::default().minimize(f, lo, hi);

    let mut best = (min.x, min.value);
    let step = POLISH_WIDTH * (1.0 + min.x.abs());
    if let Some(t) = grid.polish((min.x - step).max(lo), (min.x + step).min(hi)) {
        let v = f(t);
        // both sit at the noise floor of the objective here
        if v <= best.1 * (1.0 + 1e-9) {
            best = (t, v);
        }
    }
    for seed in [heuristic_offset(pose), 0.0] {
        if lo <= seed && seed <= hi {
            let v = f(seed);
            if v <= best.1 {
                best = (seed, v);
            }
        }
    }
    Ok(best.0)
}

/// Moves the camera to `new_pos` on its looking line and refits the field of
/// view so the left-middle and right-middle boundary rays hit the surface at
/// the same points as before. The result may be skewed horizontally; the
/// vertical field of view stays symmetric.
pub fn refit_fov(pose: &CameraPose, new_pos: &Vec3, surface: Surface) -> Result<CameraPose> {
    if *new_pos == pose.pos {
        return Ok(*pose);
    }
    let boundary = |x: f64| match surface.intersect(&pose.pos, &pose.pixel_ray(x, 0.5)) {
        SurfaceHit::Point { point, .. } => {
            let ray = point - new_pos;
            let along = ray.dot(&pose.dir);
            if !(along > 0.0) {
                return Err(Error::RefitBehindCamera);
            }
            Ok((ray.dot(&pose.left), along))
        }
        SurfaceHit::PoleFallback { .. } => Err(Error::CornerBehindCamera),
    };
    let (left_side, left_along) = boundary(0.0)?;
    let (right_side, right_along) = boundary(1.0)?;
    let fovx_left = left_side.atan2(left_along);
    let fovx_right = (-right_side).atan2(right_along);
    if !(fovx_left + fovx_right > 0.0) {
        return Err(Error::RefitBehindCamera);
    }
    let vertical_extent = (fovx_left.tan() + fovx_right.tan()) / pose.aspect;
    Ok(CameraPose {
        pos: *new_pos,
        fovx_left,
        fovx_right,
        fovy: 2.0 * (vertical_extent / 2.0).atan(),
        ..*pose
    })
}

/// Adjusted camera and the distortion before and after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DollySolution {
    pub t: f64,
    pub adjusted_pose: CameraPose,
    /// Distortion of the original pose on its own grid.
    pub d_original: f64,
    /// Distortion of the adjusted pose on its own grid.
    pub d_adjusted: f64,
    /// Objective of the original grid at `t`; `None` when a vertex falls
    /// behind the offset camera.
    pub shared_objective: Option<f64>,
    pub mode: AdjustMode,
    /// The refit failed and the original pose was kept with `t = 0`.
    pub fallback: bool,
}

/// Wire form of a [`DollySolution`], as consumed by viewers. Angles are in
/// radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub t: f64,
    pub pos: [f64; 3],
    pub dir: [f64; 3],
    pub up: [f64; 3],
    pub fovx_left: f64,
    pub fovx_right: f64,
    pub fovy: f64,
    pub d_original: f64,
    pub d_adjusted: f64,
    pub mode: AdjustMode,
}

impl DollySolution {
    pub fn to_json(&self) -> SolutionJson {
        let p = &self.adjusted_pose;
        SolutionJson {
            t: self.t,
            pos: p.pos.into(),
            dir: p.dir.into(),
            up: p.up.into(),
            fovx_left: p.fovx_left,
            fovx_right: p.fovx_right,
            fovy: p.fovy,
            d_original: self.d_original,
            d_adjusted: self.d_adjusted,
            mode: self.mode,
        }
    }
}

pub fn adjust_camera(
    pose: &CameraPose,
    surface: Surface,
    mode: AdjustMode,
    rows: usize,
    cols: usize,
) -> Result<DollySolution> {
    let grid = DistortionGrid::build(pose, surface, rows, cols)?;
    let d_original = distortion_value(pose, surface, rows, cols)?;
    let t = match mode {
        AdjustMode::Heuristic => heuristic_offset(pose),
        AdjustMode::Optimized => optimize_on_grid(pose, &grid)?,
    };

    let new_pos = match mode {
        AdjustMode::Heuristic => heuristic_position(pose),
        AdjustMode::Optimized => pose.pos - pose.dir * t,
    };
    let adjusted = refit_fov(pose, &new_pos, surface)
        .and_then(|p| Ok((p, distortion_value(&p, surface, rows, cols)?)));
    let solution = match adjusted {
        Ok((adjusted_pose, d_adjusted)) => DollySolution {
            t,
            adjusted_pose,
            d_original,
            d_adjusted,
            shared_objective: grid.objective(t).ok(),
            mode,
            fallback: false,
        },
        Err(e) => {
            log::debug!("dolly refit failed ({e}), keeping the original pose");
            DollySolution {
                t: 0.0,
                adjusted_pose: *pose,
                d_original,
                d_adjusted: d_original,
                shared_objective: grid.objective(0.0).ok(),
                mode,
                fallback: true,
            }
        }
    };
    Ok(solution)
}
