//! Pose sweeps and distortion statistics.
//!
//! Positions are sampled on a radial fan in the first quadrant of the y-z
//! plane and, at each position, looking directions cover the hemisphere facing
//! `+x`. This covers every pose up to the rotational and reflective symmetries
//! of the sphere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{BufRead, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dolly::{
    adjust_camera, distortion_value, optimize_on_grid, AdjustMode, DistortionGrid, DEFAULT_GRID,
};
use crate::error::{Error, Result};
use crate::geometry::{CameraPose, Surface, Vec3};

pub const CSV_HEADER: &str =
    "pos_x,pos_y,pos_z,dir_x,dir_y,dir_z,d_orig,d_heu,d_opt,imp_heu,imp_opt_orig,imp_opt_heu,t_heu,t_opt,solve_us";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub n_radii: usize,
    pub n_pos_angles: usize,
    pub n_dir_samples: usize,
    pub surface: Surface,
    pub fovx: f64,
    pub aspect: f64,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    /// Largest sampled distance from the origin.
    pub r_max: f64,
    /// Evaluate poses on the rayon pool. Timings are noisier when enabled.
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_radii: 6,
            n_pos_angles: 7,
            n_dir_samples: 64,
            surface: Surface::Cylinder,
            fovx: 90f64.to_radians(),
            aspect: 16.0 / 9.0,
            rows: DEFAULT_GRID,
            cols: DEFAULT_GRID,
            seed: 0,
            r_max: 0.9,
            parallel: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.n_radii == 0 || self.n_pos_angles == 0 || self.n_dir_samples == 0 {
            return bad("sample counts must be at least 1");
        }
        if self.rows < 2 || self.cols < 2 {
            return bad("grid needs at least 2 rows and columns");
        }
        if !(self.fovx > 0.0 && self.fovx < PI) {
            return bad("fovx must lie in (0, π)");
        }
        if !(self.aspect > 0.0 && self.aspect.is_finite()) {
            return bad("aspect must be positive");
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return bad("r_max must lie in (0, 1)");
        }
        Ok(())
    }

    /// One-line description written as a comment ahead of the CSV header.
    pub fn describe(&self) -> String {
        format!(
            "seed={} surface={} fovx_deg={} aspect={} rows={} cols={} n_radii={} n_pos_angles={} n_dir_samples={} r_max={}",
            self.seed,
            self.surface.as_str(),
            self.fovx.to_degrees(),
            self.aspect,
            self.rows,
            self.cols,
            self.n_radii,
            self.n_pos_angles,
            self.n_dir_samples,
            self.r_max
        )
    }
}

/// Directions on the `x ≥ 0` hemisphere, placed on a Fibonacci spiral whose
/// phase is drawn from `seed`.
pub fn hemisphere_directions(n: usize, seed: u64) -> Vec<Vec3> {
    let phase = ChaCha8Rng::seed_from_u64(seed).gen::<f64>() * TAU;
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            // uniform in x gives uniform area on the hemisphere
            let x = (k as f64 + 0.5) / n as f64;
            let ring = (1.0 - x * x).sqrt();
            let (s, c) = (phase + golden_angle * k as f64).sin_cos();
            Vec3::new(x, ring * c, ring * s)
        })
        .collect()
}

pub fn sample_poses(cfg: &SweepConfig) -> Result<Vec<CameraPose>> {
    cfg.validate()?;
    let dirs = hemisphere_directions(cfg.n_dir_samples, cfg.seed);
    let mut poses = Vec::with_capacity(cfg.n_radii * cfg.n_pos_angles * dirs.len());
    for i in 0..cfg.n_radii {
        let r = cfg.r_max * (i + 1) as f64 / cfg.n_radii as f64;
        for j in 0..cfg.n_pos_angles {
            let alpha = if cfg.n_pos_angles == 1 {
                0.0
            } else {
                FRAC_PI_2 * j as f64 / (cfg.n_pos_angles - 1) as f64
            };
            let pos = Vec3::new(0.0, r * alpha.sin(), r * alpha.cos());
            for dir in &dirs {
                let up = upright_up(dir);
                poses.push(CameraPose::new(pos, *dir, up, cfg.fovx, cfg.aspect)?);
            }
        }
    }
    Ok(poses)
}

/// `+z` made orthogonal to `dir`, or `+x` when they are parallel.
fn upright_up(dir: &Vec3) -> Vec3 {
    let up = Vec3::z() - dir * dir.z;
    if up.norm() < 1e-9 {
        Vec3::x()
    } else {
        up.normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub pos: Vec3,
    pub dir: Vec3,
    pub d_orig: f64,
    pub d_heu: f64,
    pub d_opt: f64,
    pub t_heu: f64,
    pub t_opt: f64,
    /// Objective of the original grid at `t_heu` and `t_opt`.
    pub shared_heu: Option<f64>,
    pub shared_opt: Option<f64>,
    pub solve_micros: u64,
    /// Some step failed: a refit fell back to the original pose, or the
    /// distortion could not be measured (values are NaN then).
    pub flagged: bool,
}

impl SweepRecord {
    pub fn imp_heu(&self) -> f64 {
        self.d_orig - self.d_heu
    }

    pub fn imp_opt_over_orig(&self) -> f64 {
        self.d_orig - self.d_opt
    }

    pub fn imp_opt_over_heu(&self) -> f64 {
        self.d_heu - self.d_opt
    }

    fn failed(pose: &CameraPose) -> Self {
        SweepRecord {
            pos: pose.pos,
            dir: pose.dir,
            d_orig: f64::NAN,
            d_heu: f64::NAN,
            d_opt: f64::NAN,
            t_heu: f64::NAN,
            t_opt: f64::NAN,
            shared_heu: None,
            shared_opt: None,
            solve_micros: 0,
            flagged: true,
        }
    }
}

/// Evaluates a single pose: original, heuristic and optimized distortion.
pub fn evaluate_pose(pose: &CameraPose, surface: Surface, rows: usize, cols: usize) -> SweepRecord {
    let run = || -> Result<SweepRecord> {
        let d_orig = distortion_value(pose, surface, rows, cols)?;
        let start = Instant::now();
        let grid = DistortionGrid::build(pose, surface, rows, cols)?;
        let t_solved = optimize_on_grid(pose, &grid)?;
        let solve_micros = start.elapsed().as_micros() as u64;
        let heu = adjust_camera(pose, surface, AdjustMode::Heuristic, rows, cols)?;
        let opt = adjust_camera(pose, surface, AdjustMode::Optimized, rows, cols)?;
        debug_assert!(opt.fallback || opt.t == t_solved);
        Ok(SweepRecord {
            pos: pose.pos,
            dir: pose.dir,
            d_orig,
            d_heu: heu.d_adjusted,
            d_opt: opt.d_adjusted,
            t_heu: heu.t,
            t_opt: opt.t,
            shared_heu: heu.shared_objective,
            shared_opt: opt.shared_objective,
            solve_micros,
            flagged: heu.fallback || opt.fallback,
        })
    };
    run().unwrap_or_else(|e| {
        log::debug!("pose at {:?} looking {:?} failed: {e}", pose.pos, pose.dir);
        SweepRecord::failed(pose)
    })
}

/// Runs the sweep. Output order follows [`sample_poses`].
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let poses = sample_poses(cfg)?;
    let eval = |p: &CameraPose| evaluate_pose(p, cfg.surface, cfg.rows, cfg.cols);
    Ok(if cfg.parallel {
        poses.par_iter().map(eval).collect()
    } else {
        poses.iter().map(eval).collect()
    })
}

/// Minimum, lower quartile, median, upper quartile and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
}

impl Quartiles {
    pub fn as_array(&self) -> [f64; 5] {
        [self.q0, self.q1, self.q2, self.q3, self.q4]
    }
}

/// Quartiles with linear interpolation between closest ranks. NaNs are
/// ignored.
pub fn quartiles(values: &[f64]) -> Result<Quartiles> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    v.sort_by(f64::total_cmp);
    let pct = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Ok(Quartiles {
        q0: v[0],
        q1: pct(0.25),
        q2: pct(0.5),
        q3: pct(0.75),
        q4: v[v.len() - 1],
    })
}

/// Quartiles of the original, heuristic and optimized distortion values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsTable {
    pub original: Quartiles,
    pub heuristic: Quartiles,
    pub optimized: Quartiles,
}

impl StatsTable {
    pub fn from_records(records: &[SweepRecord]) -> Result<Self> {
        let col = |f: fn(&SweepRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        Ok(StatsTable {
            original: quartiles(&col(|r| r.d_orig))?,
            heuristic: quartiles(&col(|r| r.d_heu))?,
            optimized: quartiles(&col(|r| r.d_opt))?,
        })
    }

    /// Aligned text table, one row per method.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8}{:>14}{:>14}{:>14}{:>14}{:>14}\n",
            "Method", "Zeroth-q", "First-q", "Second-q", "Third-q", "Fourth-q"
        );
        for (name, q) in [
            ("Ori.", &self.original),
            ("Heu.", &self.heuristic),
            ("Opt.", &self.optimized),
        ] {
            out.push_str(&format!("{name:<8}"));
            for x in q.as_array() {
                out.push_str(&format!("{x:>14.4e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes records as CSV, preceded by `#` comment lines describing the run
/// and any flagged rows.
pub fn write_csv<W: Write>(
    mut w: W,
    cfg: &SweepConfig,
    records: &[SweepRecord],
) -> std::io::Result<()> {
    writeln!(w, "# panowalk sweep {}", cfg.describe())?;
    let flagged: Vec<String> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.flagged)
        .map(|(i, _)| i.to_string())
        .collect();
    if !flagged.is_empty() {
        writeln!(w, "# flagged_rows={}", flagged.join(";"))?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let fields = [
            r.pos.x,
            r.pos.y,
            r.pos.z,
            r.dir.x,
            r.dir.y,
            r.dir.z,
            r.d_orig,
            r.d_heu,
            r.d_opt,
            r.imp_heu(),
            r.imp_opt_over_orig(),
            r.imp_opt_over_heu(),
            r.t_heu,
            r.t_opt,
        ]
        .map(fmt_f64);
        writeln!(w, "{},{}", fields.join(","), r.solve_micros)?;
    }
    Ok(())
}

/// Reads records written by [`write_csv`]. Comment lines are skipped; fields
/// not stored in the file (shared-grid objectives) come back as `None`.
pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    let mut flagged_rows: Vec<usize> = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Csv(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rows) = comment.trim().strip_prefix("flagged_rows=") {
                flagged_rows.extend(rows.split(';').filter_map(|s| s.parse::<usize>().ok()));
            }
            continue;
        }
        if !seen_header {
            if line != CSV_HEADER {
                return Err(Error::Csv(format!(
                    "line {}: unexpected header `{line}`",
                    lineno + 1
                )));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(Error::Csv(format!(
                "line {}: expected 15 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| Error::Csv(format!("line {}: bad number `{}`", lineno + 1, fields[k])))
        };
        records.push(SweepRecord {
            pos: Vec3::new(num(0)?, num(1)?, num(2)?),
            dir: Vec3::new(num(3)?, num(4)?, num(5)?),
            d_orig: num(6)?,
            d_heu: num(7)?,
            d_opt: num(8)?,
            t_heu: num(12)?,
            t_opt: num(13)?,
            shared_heu: None,
            shared_opt: None,
            solve_micros: fields[14].parse().map_err(|_| {
                Error::Csv(format!("line {}: bad integer `{}`", lineno + 1, fields[14]))
            })?,
            flagged: false,
        });
    }
    for i in flagged_rows {
        if let Some(r) = records.get_mut(i) {
            r.flagged = true;
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records)
}
