//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use panowalk::PanoramaImage;

pub type V3 = [f64; 3];

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn axpy(a: f64, x: V3, y: V3) -> V3 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

/// Camera frame for a roll-free heading/elevation, written directly from
/// spherical angles.
pub fn frame(yaw: f64, pitch: f64) -> (V3, V3, V3) {
    let dir = [
        pitch.cos() * yaw.cos(),
        pitch.cos() * yaw.sin(),
        pitch.sin(),
    ];
    let up = [
        -pitch.sin() * yaw.cos(),
        -pitch.sin() * yaw.sin(),
        pitch.cos(),
    ];
    let left = cross(up, dir);
    (dir, up, left)
}

/// Bilinear equirectangular lookup with horizontal wrap and vertical clamp.
pub fn lookup(pano: &PanoramaImage, u: f64, v: f64) -> [f64; 3] {
    let (w, h) = (pano.width() as f64, pano.height() as f64);
    let fx = u * w - 0.5;
    let fy = (v * h - 0.5).max(0.0).min(h - 1.0);
    let (cx, cy) = (fx.floor(), fy.floor());
    let (ax, ay) = (fx - cx, fy - cy);
    let col = |c: f64| (c.rem_euclid(w)) as u32;
    let row = |r: f64| r.min(h - 1.0) as u32;
    let mut out = [0.0; 3];
    for (dc, wx) in [(0.0, 1.0 - ax), (1.0, ax)] {
        for (dr, wy) in [(0.0, 1.0 - ay), (1.0, ay)] {
            let t = pano.texel(col(cx + dc), row(cy + dr));
            for k in 0..3 {
                out[k] += wx * wy * t[k] as f64;
            }
        }
    }
    out
}

/// Brute-force renderer for a camera at `pos` looking along a roll-free
/// heading, projecting through the unit sphere. Returns 8-bit RGB.
pub fn reference_render(
    pano: &PanoramaImage,
    pos: V3,
    yaw: f64,
    pitch: f64,
    fovx: f64,
    w: u32,
    h: u32,
) -> Vec<u8> {
    let (dir, up, left) = frame(yaw, pitch);
    let tx = (fovx / 2.0).tan();
    let ty = tx * h as f64 / w as f64;
    let mut out = Vec::with_capacity((w * h * 3) as usize);
    for py in 0..h {
        for px in 0..w {
            let x = (px as f64 + 0.5) / w as f64;
            let y = (py as f64 + 0.5) / h as f64;
            let ray = axpy(
                (1.0 - 2.0 * y) * ty,
                up,
                axpy((1.0 - 2.0 * x) * tx, left, dir),
            );
            let n = dot(ray, ray).sqrt();
            let ray = ray.map(|c| c / n);
            // geometric form: closest approach, then half-chord
            let tc = -dot(pos, ray);
            let d2 = dot(pos, pos) - tc * tc;
            let t = tc + (1.0 - d2).sqrt();
            let p = axpy(t, ray, pos);
            let r = dot(p, p).sqrt();
            let theta = (p[2] / r).acos();
            let mut phi = p[1].atan2(p[0]);
            if phi < 0.0 {
                phi += 2.0 * PI;
            }
            let c = lookup(pano, phi / (2.0 * PI), theta / PI);
            out.extend(c.map(|x| x.round().clamp(0.0, 255.0) as u8));
        }
    }
    out
}

/// A 2:1 panorama with smooth gradients plus fine texture in every channel.
pub fn test_panorama(w: u32) -> PanoramaImage {
    PanoramaImage::from_fn(w, w / 2, |c, r| {
        let a = (c as f64 / w as f64 * 2.0 * PI).sin();
        [
            (127.5 + 127.0 * a) as u8,
            (r * 511 / w) as u8,
            ((c * 37 + r * 91) % 256) as u8,
        ]
    })
    .unwrap()
}

/// Largest distance of the points from the line through the two points
/// farthest apart.
pub fn line_residual(pts: &[[f64; 2]]) -> f64 {
    let mut best = (0, 0, -1.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b, len) = (pts[best.0], pts[best.1], best.2);
    pts.iter()
        .map(|p| ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])).abs() / len)
        .fold(0.0, f64::max)
}
