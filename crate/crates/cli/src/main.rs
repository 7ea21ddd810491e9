//! `recurve` command line. Lengths are centimeters and angles degrees.
//!
//! Exit codes: 0 success, 1 invalid config or arguments, 2 detection or
//! calibration failure, 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recurve::ballistics::sample_trajectory;
use recurve::controller::{calibrate, ShootingSession, TargetWorld};
use recurve::geometry::{cm_to_m, deg_to_rad, m_to_cm, rad_to_deg, AimState};
use recurve::harness::{
    emit_csv, emit_svg_scatter, emit_svg_trajectory, fit_table, project_target, run_experiment,
    write_file, Config, ExperimentKind, ExperimentOutcome, HarnessError, ScatterFrame, SimWorld,
};
use recurve::vision::{detect_target, netpbm};

#[derive(Parser)]
#[command(name = "recurve", version, about = "Archery humanoid simulator")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the target as seen by the head camera (PGM).
    Render(RenderArgs),
    /// Find the target in a PGM or PPM image.
    Detect(DetectArgs),
    /// Run the yaw gain calibration against the simulated wall.
    Calibrate(CalibrateArgs),
    /// Fire arrows with an explicit aim.
    Shoot(ShootArgs),
    /// Run experiment 1, 2 or 3.
    Experiment(ExperimentArgs),
    /// Fit bow efficiency and drag to the range table.
    FitBallistics(FitArgs),
}

#[derive(Args)]
struct NoiseOverrides {
    #[arg(long)]
    sigma_yaw_deg: Option<f64>,
    #[arg(long)]
    sigma_roll_deg: Option<f64>,
    #[arg(long)]
    drift_deg: Option<f64>,
    /// Gray-level noise added to camera frames.
    #[arg(long)]
    pixel_noise: Option<f64>,
}

impl NoiseOverrides {
    fn apply(&self, cfg: &mut Config) {
        if let Some(v) = self.sigma_yaw_deg {
            cfg.noise.sigma_yaw_deg = v;
        }
        if let Some(v) = self.sigma_roll_deg {
            cfg.noise.sigma_roll_deg = v;
        }
        if let Some(v) = self.drift_deg {
            cfg.noise.drift_deg_per_shot = v;
        }
        if let Some(v) = self.pixel_noise {
            cfg.camera.pixel_noise_sigma = v;
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Target center, right of the line of fire.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lateral_cm: f64,
    /// Target center height; the configured target height when omitted.
    #[arg(long)]
    height_cm: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Gray-level pixel noise; 0 renders a clean image and needs no seed.
    #[arg(long, default_value_t = 0.0)]
    pixel_noise: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DetectArgs {
    image: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseOverrides,
    /// Write the calibration as TOML.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShootArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    yaw_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    roll_deg: f64,
    /// Draw length; the configured experiment draw length when omitted.
    #[arg(long)]
    draw_cm: Option<f64>,
    #[arg(long, default_value_t = 1)]
    shots: usize,
    /// Let arrows fly to the ground instead of logging wall impacts.
    #[arg(long)]
    no_wall: bool,
    #[command(flatten)]
    noise: NoiseOverrides,
    /// Shot log; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Side-view SVG of every released shot.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    number: u8,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    draw_cm: Option<f64>,
    /// Experiment 2: shoot at zero yaw instead of calibrating.
    #[arg(long)]
    no_calibration: bool,
    #[command(flatten)]
    noise: NoiseOverrides,
    /// Shot log; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Impact scatter (experiments 1 and 2) or trajectories (experiment 3).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {}

fn load_config(path: Option<&Path>) -> Result<Config, HarnessError> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::io(Path::new("<stdout>"), e)),
    }
}

fn render(cfg: &Config, args: &RenderArgs) -> Result<(), HarnessError> {
    if args.pixel_noise > 0.0 && args.seed.is_none() {
        return Err(HarnessError::Config(
            "--seed is required with --pixel-noise".into(),
        ));
    }
    if !(args.pixel_noise >= 0.0) {
        return Err(HarnessError::Config("--pixel-noise must be >= 0".into()));
    }
    let scene = cfg.scene()?;
    let height = args.height_cm.map(cm_to_m).unwrap_or(scene.target_height);
    let lateral = cm_to_m(args.lateral_cm);
    let proj = project_target(&scene, lateral, height)?;
    let mut world = SimWorld::new(
        scene,
        cfg.ring_style(),
        args.pixel_noise,
        args.seed.unwrap_or(0),
    );
    world.place_target(lateral, height);
    let img = world.render()?;
    write_file(&args.out, &netpbm::encode_gray(&img))?;
    eprintln!(
        "target center ({:.2}, {:.2}) px, inner ring radius {:.2} px",
        proj.center.0, proj.center.1, proj.ring_radius_px
    );
    Ok(())
}

fn detect(cfg: &Config, args: &DetectArgs) -> Result<(), HarnessError> {
    let bytes = std::fs::read(&args.image).map_err(|e| HarnessError::io(&args.image, e))?;
    let img = netpbm::decode(&bytes)
        .and_then(|p| p.into_gray())
        .map_err(|e| HarnessError::Config(format!("{}: {e}", args.image.display())))?;
    let det = detect_target(&img, &cfg.detector)
        .map_err(|e| HarnessError::Detection(e.to_string()))?
        .ok_or_else(|| HarnessError::Detection("no target found".into()))?;
    println!("center_x,center_y,r_avg,positive_directions");
    println!(
        "{},{},{:.3},{}",
        det.center.0, det.center.1, det.r_avg, det.positive_directions
    );
    Ok(())
}

fn calibrate_cmd(mut cfg: Config, args: &CalibrateArgs) -> Result<(), HarnessError> {
    args.noise.apply(&mut cfg);
    cfg.validate()?;
    let mut session = ShootingSession::new(cfg.rig()?, cfg.flight(true), cfg.noise(args.seed))
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut world = SimWorld::new(
        cfg.scene()?,
        cfg.ring_style(),
        cfg.camera.pixel_noise_sigma,
        args.seed ^ 0x5eed_1a6e,
    );
    let report = calibrate(
        &mut session,
        &mut world,
        &cfg.detector,
        &cfg.calibration_plan(),
    )
    .map_err(|e| HarnessError::Calibration(e.to_string()))?;
    let c = report.calibration;
    let text = format!(
        "# Yaw gain from the simulated wall, seed {}.\nk_p_deg_per_px = {}\nx_ref_px = {}\nroll_fixed_deg = {}\nshots_fired = {}\n",
        args.seed,
        rad_to_deg(c.k_p),
        c.x_ref,
        rad_to_deg(c.roll_fixed),
        session.shots_fired()
    );
    match &args.out {
        Some(p) => write_file(p, text.as_bytes()),
        None => emit(None, &text),
    }
}

fn shoot(mut cfg: Config, args: &ShootArgs) -> Result<(), HarnessError> {
    args.noise.apply(&mut cfg);
    if let Some(d) = args.draw_cm {
        cfg.experiment.draw_length_cm = d;
    }
    cfg.validate()?;
    if args.shots == 0 {
        return Err(HarnessError::Config("--shots must be >= 1".into()));
    }
    let aim = AimState::new(
        deg_to_rad(args.yaw_deg),
        deg_to_rad(args.roll_deg),
        cm_to_m(cfg.experiment.draw_length_cm),
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut session =
        ShootingSession::new(cfg.rig()?, cfg.flight(!args.no_wall), cfg.noise(args.seed))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    let records: Vec<_> = (0..args.shots)
        .map(|_| session.execute_shot(aim, None))
        .collect();
    for r in &records {
        if let Some(f) = &r.fault {
            eprintln!("shot {}: FAULT: {f}", r.shot_index);
        }
    }
    emit(args.csv.as_deref(), &emit_csv(&records)?)?;
    if let Some(path) = &args.trajectory {
        let series = records
            .iter()
            .filter_map(|r| r.launch)
            .map(|l| sample_trajectory(&l, cfg.ballistics.dt_s, 50))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        write_file(
            path,
            emit_svg_trajectory(&series, "Arrow flight")?.as_bytes(),
        )?;
    }
    Ok(())
}

fn print_summary(out: &ExperimentOutcome) {
    let s = &out.summary;
    let (a, b) = match out.kind {
        ExperimentKind::LongRange => ("downrange", "lateral"),
        _ => ("lateral", "height"),
    };
    eprintln!(
        "experiment {} seed {}: {} released, {} faulted",
        out.kind.number(),
        out.seed,
        s.released,
        s.faulted
    );
    for (k, axis) in [a, b].iter().enumerate() {
        eprintln!(
            "  {axis}: mean {:.2} cm, variance {:.4} cm^2, spread {:.2} cm",
            m_to_cm(s.mean[k]),
            m_to_cm(m_to_cm(s.variance[k])),
            m_to_cm(s.spread[k])
        );
    }
    eprintln!("  max pairwise distance {:.2} cm", m_to_cm(s.max_pairwise));
    if let Some((l, h)) = out.target {
        eprintln!("  target center ({:.2}, {:.2}) cm", m_to_cm(l), m_to_cm(h));
    }
    if let Some(e) = out.mean_lateral_error() {
        eprintln!("  mean |lateral error| {:.2} cm", m_to_cm(e));
    }
    if let Some(c) = &out.calibration {
        eprintln!(
            "  calibration: k_p {:.6} deg/px, x_ref {} px",
            rad_to_deg(c.calibration.k_p),
            c.calibration.x_ref
        );
    }
    if let Some(f) = &out.fit {
        eprintln!(
            "  fit: efficiency {:.4}, drag {:.6} 1/m, residuals {:?} m",
            f.efficiency, f.drag_coefficient, f.residuals
        );
    }
}

fn experiment(mut cfg: Config, args: &ExperimentArgs) -> Result<(), HarnessError> {
    args.noise.apply(&mut cfg);
    if let Some(n) = args.shots {
        cfg.experiment.n_shots = n;
    }
    if let Some(d) = args.draw_cm {
        cfg.experiment.draw_length_cm = d;
    }
    if args.no_calibration {
        cfg.calibration.enabled = false;
    }
    let kind = ExperimentKind::from_number(args.number)
        .ok_or_else(|| HarnessError::Config(format!("no experiment {}", args.number)))?;
    let out = run_experiment(&cfg, kind, args.seed)?;
    print_summary(&out);
    emit(args.csv.as_deref(), &emit_csv(&out.records)?)?;
    if let Some(path) = &args.svg {
        let title = format!("Experiment {}", kind.number());
        let svg = match kind {
            ExperimentKind::LongRange => {
                let series = out
                    .records
                    .iter()
                    .filter_map(|r| r.launch)
                    .map(|l| sample_trajectory(&l, cfg.ballistics.dt_s, 100))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                emit_svg_trajectory(&series, &title)?
            }
            ExperimentKind::Repeatability => {
                emit_svg_scatter(&out.records, ScatterFrame::Wall, &title)?
            }
            ExperimentKind::VisionAiming => {
                let frame = ScatterFrame::Target {
                    center: out.target.unwrap_or((0.0, 0.0)),
                    ring_radius: cfg.scene()?.ring_radius(),
                };
                emit_svg_scatter(&out.records, frame, &title)?
            }
        };
        write_file(path, svg.as_bytes())?;
    }
    Ok(())
}

fn fit_ballistics(cfg: &Config) -> Result<(), HarnessError> {
    let fit = fit_table(cfg)?.ok_or_else(|| {
        HarnessError::Config("no measured rows in experiment.table, or fit_table is off".into())
    })?;
    println!("efficiency = {}", fit.efficiency);
    println!("drag_coefficient = {}", fit.drag_coefficient);
    let measured = cfg.experiment.table.iter().filter(|r| r.range_m.is_some());
    for (row, r) in measured.zip(&fit.residuals) {
        println!(
            "# D_L {} cm, roll {} deg, measured {} m, residual {:+.3} m",
            row.draw_length_cm,
            row.roll_deg,
            row.range_m.unwrap_or(f64::NAN),
            r
        );
    }
    println!("# rms {:.3} m", fit.rms);
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Render(a) => render(&cfg, a),
        Command::Detect(a) => detect(&cfg, a),
        Command::Calibrate(a) => calibrate_cmd(cfg, a),
        Command::Shoot(a) => shoot(cfg, a),
        Command::Experiment(a) => experiment(cfg, a),
        Command::FitBallistics(_) => fit_ballistics(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
