use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use panowalk::dolly::{adjust_camera, distortion_value, AdjustMode, DEFAULT_GRID};
use panowalk::evaluation::{read_csv, sweep, write_csv, StatsTable, SweepConfig};
use panowalk::panorama::{load_panorama, write_image};
use panowalk::projector::{render, DollyMode, RenderRequest};
use panowalk::{CameraPose, Error, Surface, Vec3};

#[derive(Parser)]
#[command(
    name = "panowalk",
    version,
    about = "Walk around inside a single equirectangular panorama"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a perspective view to PNG.
    Render(RenderArgs),
    /// Solve the dolly-zoom adjustment for a pose and print it as JSON.
    Adjust(AdjustArgs),
    /// Sweep poses and write per-pose distortion records as CSV.
    Sweep(SweepArgs),
    /// Print quartile statistics of a sweep CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
struct PoseArgs {
    /// Camera position inside the unit surface.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    pos: Vec3,
    /// Heading about +z, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, conflicts_with_all = ["dir", "up"])]
    yaw: f64,
    /// Elevation, degrees; positive looks up.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, conflicts_with_all = ["dir", "up"])]
    pitch: f64,
    /// Rotation about the looking direction, degrees; positive is clockwise.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, conflicts_with_all = ["dir", "up"])]
    roll: f64,
    /// Looking direction (instead of yaw/pitch/roll).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    dir: Option<Vec3>,
    /// Up hint used with --dir.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, requires = "dir")]
    up: Option<Vec3>,
    /// Horizontal field of view, degrees.
    #[arg(long, default_value_t = 90.0)]
    fovx: f64,
    /// Output size; also fixes the aspect ratio.
    #[arg(long, value_parser = parse_size, default_value = "1280x720")]
    size: (u32, u32),
    #[arg(long, default_value = "sphere")]
    surface: Surface,
}

impl PoseArgs {
    fn pose(&self) -> panowalk::Result<CameraPose> {
        let (w, h) = self.size;
        let aspect = w as f64 / h as f64;
        let fovx = self.fovx.to_radians();
        match self.dir {
            Some(dir) => {
                CameraPose::new(self.pos, dir, self.up.unwrap_or_else(Vec3::z), fovx, aspect)
            }
            None => CameraPose::from_euler(
                self.pos,
                self.yaw.to_radians(),
                self.pitch.to_radians(),
                self.roll.to_radians(),
                fovx,
                aspect,
            ),
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Equirectangular panorama (PNG or JPEG).
    #[arg(long)]
    pano: PathBuf,
    #[command(flatten)]
    pose: PoseArgs,
    #[arg(long, default_value = "none")]
    dolly: DollyMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdjustArgs {
    #[command(flatten)]
    pose: PoseArgs,
    #[arg(long, default_value = "optimized")]
    mode: AdjustMode,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    out: PathBuf,
    /// Seed for the direction sampling phase.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cylinder")]
    surface: Surface,
    /// Horizontal field of view, degrees.
    #[arg(long, default_value_t = 90.0)]
    fovx: f64,
    #[arg(long, default_value_t = 16.0 / 9.0)]
    aspect: f64,
    /// Grid rows and columns of the distortion measure.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = 6)]
    radii: usize,
    #[arg(long, default_value_t = 7)]
    angles: usize,
    #[arg(long, default_value_t = 64)]
    dirs: usize,
    #[arg(long, default_value_t = 0.9)]
    r_max: f64,
    /// Evaluate poses on one thread (steadier timings).
    #[arg(long)]
    sequential: bool,
}

impl SweepArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            n_radii: self.radii,
            n_pos_angles: self.angles,
            n_dir_samples: self.dirs,
            surface: self.surface,
            fovx: self.fovx.to_radians(),
            aspect: self.aspect,
            rows: self.grid,
            cols: self.grid,
            seed: self.seed,
            r_max: self.r_max,
            parallel: !self.sequential,
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    /// CSV written by `sweep`.
    #[arg(long = "in")]
    input: PathBuf,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("bad number `{p}`"))?;
        if !slot.is_finite() {
            return Err(format!("non-finite component `{p}`"));
        }
    }
    Ok(Vec3::from(v))
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PoseOutsideSurface(_)
        | Error::DegenerateBasis
        | Error::InvalidFov(_)
        | Error::InvalidAspect(_)
        | Error::GridTooSmall { .. }
        | Error::InvalidSize(..)
        | Error::InvalidConfig(_)
        | Error::EmptyInput => 2,
        Error::Io { .. } | Error::Decode { .. } | Error::Csv(_) => 3,
        Error::ZeroVector
        | Error::RefitBehindCamera
        | Error::CornerBehindCamera
        | Error::PointBehindCamera(_)
        | Error::InfeasibleInterval => 4,
    }
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn cmd_render(args: &RenderArgs) -> panowalk::Result<()> {
    let pose = args.pose.pose()?;
    let (w, h) = args.pose.size;
    let req = RenderRequest::new(pose, args.pose.surface, args.dolly, w, h)?;
    let pano = load_panorama(&args.pano)?;
    let out = render(&req, &pano)?;
    write_image(&out.image, &args.out)?;
    info!("wrote {}", args.out.display());

    let line = match out.solution {
        Some(sol) => {
            if sol.fallback {
                warn!("dolly adjustment failed for this pose; rendered unadjusted");
            }
            json!({ "t": sol.t, "d_original": sol.d_original, "d_adjusted": sol.d_adjusted })
        }
        None => {
            let d = distortion_value(&req.pose, req.surface, DEFAULT_GRID, DEFAULT_GRID).ok();
            json!({ "t": 0.0, "d_original": d, "d_adjusted": d })
        }
    };
    println!("{line}");
    Ok(())
}

fn cmd_adjust(args: &AdjustArgs) -> panowalk::Result<()> {
    let pose = args.pose.pose()?;
    let sol = adjust_camera(
        &pose,
        args.pose.surface,
        args.mode,
        DEFAULT_GRID,
        DEFAULT_GRID,
    )?;
    if sol.fallback {
        warn!("refit failed; reporting the unadjusted pose");
    }
    println!(
        "{}",
        serde_json::to_string(&sol.to_json()).expect("plain data serializes")
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> panowalk::Result<()> {
    let cfg = args.config();
    cfg.validate()?;
    let records = sweep(&cfg)?;
    let flagged = records.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        warn!(
            "{flagged} of {} poses fell back to the unadjusted camera",
            records.len()
        );
    }
    let file = File::create(&args.out).map_err(io_err(&args.out))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, &cfg, &records)
        .and_then(|_| w.flush())
        .map_err(io_err(&args.out))?;
    info!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> panowalk::Result<()> {
    let file = File::open(&args.input).map_err(io_err(&args.input))?;
    let records = read_csv(BufReader::new(file))?;
    let table = StatsTable::from_records(&records)?;
    print!("{}", table.to_text());
    println!(
        "{}",
        serde_json::to_string(&table).expect("plain data serializes")
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Adjust(a) => cmd_adjust(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
