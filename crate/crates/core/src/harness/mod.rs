//! Scenes, configuration, experiments and reports.

mod config;
mod experiment;
mod report;
mod scene;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    default_table, ArmSection, BallisticsSection, BowSection, CalibrationSection, CameraSection,
    Config, ExperimentSection, NoiseSection, SceneSection, TableRow, DEFAULT_CONFIG,
};
pub use experiment::{
    fit_table, run_experiment, ExperimentKind, ExperimentOutcome, SimWorld, Summary,
};
pub use report::{
    emit_csv, emit_svg_scatter, emit_svg_trajectory, parse_csv, rows_to_csv, write_file, CsvRow,
    ScatterFrame, CSV_COLUMNS,
};
pub use scene::{
    add_gaussian_noise, project_target, render_rings, render_target, PinholeCamera, RingStyle,
    Scene, TargetProjection,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("render error: {0}")]
    Render(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("detection failed: {0}")]
    Detection(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 1 bad config, 2 detection or calibration failure,
    /// 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Render(_) => 1,
            Self::Detection(_) | Self::Calibration(_) => 2,
            Self::Io { .. } | Self::Csv(_) => 3,
        }
    }
}
