//! CSV shot logs and SVG plots.
//!
//! CSV columns, in order: `shot_index`, `theta_cmd`, `phi_cmd`,
//! `theta_real`, `phi_real` (degrees), `d_l` (cm), `speed` (m/s),
//! `impact_x_cm` (lateral wall impact, positive right), `impact_y_cm`
//! (wall impact height above ground), `distance_m` (horizontal distance to
//! the ground landing point), `state`. Values are rounded to six decimals in
//! their unit. Absent values are empty fields. Lines end in LF.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ballistics::FlightSample;
use crate::controller::{ShootState, ShotRecord};
use crate::geometry::{m_to_cm, rad_to_deg};

pub const CSV_COLUMNS: [&str; 11] = [
    "shot_index",
    "theta_cmd",
    "phi_cmd",
    "theta_real",
    "phi_real",
    "d_l",
    "speed",
    "impact_x_cm",
    "impact_y_cm",
    "distance_m",
    "state",
];

/// One CSV line. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub shot_index: usize,
    pub theta_cmd: f64,
    pub phi_cmd: f64,
    pub theta_real: f64,
    pub phi_real: f64,
    pub d_l: f64,
    pub speed: Option<f64>,
    pub impact_x_cm: Option<f64>,
    pub impact_y_cm: Option<f64>,
    pub distance_m: Option<f64>,
    pub state: String,
}

/// Rounds to six decimals, folding negative zero.
fn r6(v: f64) -> f64 {
    let r: f64 = format!("{v:.6}").parse().unwrap_or(v);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl CsvRow {
    pub fn from_record(rec: &ShotRecord) -> Self {
        let wall = rec.wall_impact();
        Self {
            shot_index: rec.shot_index,
            theta_cmd: r6(rad_to_deg(rec.commanded.theta)),
            phi_cmd: r6(rad_to_deg(rec.commanded.phi)),
            theta_real: r6(rad_to_deg(rec.realized.theta)),
            phi_real: r6(rad_to_deg(rec.realized.phi)),
            d_l: r6(m_to_cm(rec.commanded.draw_length)),
            speed: rec.speed.map(r6),
            impact_x_cm: wall.map(|(l, _)| r6(m_to_cm(l))),
            impact_y_cm: wall.map(|(_, h)| r6(m_to_cm(h))),
            distance_m: rec.landing.map(|p| r6(p.range())),
            state: rec.state.as_str().to_string(),
        }
    }
}

impl CsvRow {
    /// Finite numbers and a known state name.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let required = [
            self.theta_cmd,
            self.phi_cmd,
            self.theta_real,
            self.phi_real,
            self.d_l,
        ];
        let optional = [
            self.speed,
            self.impact_x_cm,
            self.impact_y_cm,
            self.distance_m,
        ];
        let finite = required
            .iter()
            .chain(optional.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(HarnessError::Csv(format!(
                "shot {}: non-finite value",
                self.shot_index
            )));
        }
        if ShootState::parse(&self.state).is_none() {
            return Err(HarnessError::Csv(format!(
                "shot {}: unknown state {:?}",
                self.shot_index, self.state
            )));
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Csv(e.to_string())
}

pub fn rows_to_csv(rows: &[CsvRow]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Csv(e.to_string()))
}

pub fn emit_csv(records: &[ShotRecord]) -> Result<String, HarnessError> {
    let rows: Vec<CsvRow> = records.iter().map(CsvRow::from_record).collect();
    rows_to_csv(&rows)
}

/// Parses a shot log. The header must match the documented columns.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(HarnessError::Csv(format!(
            "unexpected header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows: Vec<CsvRow> = r
        .deserialize()
        .map(|row| row.map_err(csv_err))
        .collect::<Result<_, _>>()?;
    for row in &rows {
        row.validate()?;
    }
    Ok(rows)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// What the scatter plot's origin is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScatterFrame {
    /// Lateral against height above ground.
    Wall,
    /// Relative to a target center `(lateral, height)` in meters, drawn as
    /// the three rings of `ring_radius`.
    Target {
        center: (f64, f64),
        ring_radius: f64,
    },
}

const W: f64 = 480.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Axis range with some padding, never degenerate.
fn axis_range(vals: impl Iterator<Item = f64>, min_half: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-min_half, min_half);
    }
    let mid = 0.5 * (lo + hi);
    let half = (0.55 * (hi - lo)).max(min_half);
    (mid - half, mid + half)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Plot {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str, title: &str) {
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(
            self.body,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
            r - l,
            b - t
        );
        for (axis, (lo, hi)) in [(0, self.x), (1, self.y)] {
            let step = nice_step(hi - lo);
            let dec = (-step.log10().floor()).max(0.0) as usize;
            let mut k = (lo / step).ceil();
            while k * step <= hi {
                let v = k * step;
                let label = format!("{v:.dec$}");
                if axis == 0 {
                    let x = self.px(v);
                    let _ = writeln!(
                        self.body,
                        r##"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{label}</text>"##,
                        b + 5.0,
                        b + 18.0
                    );
                } else {
                    let y = self.py(v);
                    let _ = writeln!(
                        self.body,
                        r##"<line x1="{:.2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{label}</text>"##,
                        l - 5.0,
                        l - 8.0,
                        y + 4.0
                    );
                }
                k += 1.0;
            }
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{xlabel}</text>"#,
            W / 2.0,
            H - 12.0
        );
        let _ = writeln!(
            self.body,
            r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.1})">{ylabel}</text>"#,
            H / 2.0,
            H / 2.0
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="24" font-size="14" text-anchor="middle">{title}</text>"#,
            W / 2.0
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Scatter of wall impacts in centimeters, one marker per released shot
/// that reached the wall.
pub fn emit_svg_scatter(
    records: &[ShotRecord],
    frame: ScatterFrame,
    title: &str,
) -> Result<String, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Config("nothing to plot".into()));
    }
    let (ox, oy) = match frame {
        ScatterFrame::Wall => (0.0, 0.0),
        ScatterFrame::Target { center, .. } => center,
    };
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.wall_impact())
        .map(|(l, h)| (m_to_cm(l - ox), m_to_cm(h - oy)))
        .collect();
    let ring_cm = match frame {
        ScatterFrame::Target { ring_radius, .. } => m_to_cm(ring_radius),
        ScatterFrame::Wall => 0.0,
    };
    let mut xr = axis_range(
        pts.iter()
            .map(|p| p.0)
            .chain([-3.0 * ring_cm, 3.0 * ring_cm]),
        10.0,
    );
    let mut yr = axis_range(
        pts.iter()
            .map(|p| p.1)
            .chain([-3.0 * ring_cm, 3.0 * ring_cm]),
        10.0,
    );
    if matches!(frame, ScatterFrame::Wall) {
        yr.0 = yr.0.min(0.0);
    }
    // Equal scale on both axes.
    let half = 0.5 * (xr.1 - xr.0).max(yr.1 - yr.0);
    let (cx, cy) = (0.5 * (xr.0 + xr.1), 0.5 * (yr.0 + yr.1));
    xr = (cx - half, cx + half);
    yr = (cy - half, cy + half);

    let mut plot = Plot {
        x: xr,
        y: yr,
        body: String::new(),
    };
    let (ylabel, xlabel) = match frame {
        ScatterFrame::Wall => ("height above ground (cm)", "lateral (cm)"),
        ScatterFrame::Target { .. } => (
            "vertical from target center (cm)",
            "lateral from target center (cm)",
        ),
    };
    plot.axes(xlabel, ylabel, &xml_escape(title));
    if ring_cm > 0.0 {
        let scale = (W - 2.0 * MARGIN) / (xr.1 - xr.0);
        for k in 1..=3 {
            let _ = writeln!(
                plot.body,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#888"/>"##,
                plot.px(0.0),
                plot.py(0.0),
                k as f64 * ring_cm * scale
            );
        }
    }
    for (x, y) in &pts {
        let _ = writeln!(
            plot.body,
            r##"<circle class="shot" cx="{:.2}" cy="{:.2}" r="4" fill="#c00" fill-opacity="0.6"/>"##,
            plot.px(*x),
            plot.py(*y)
        );
    }
    Ok(plot.finish())
}

/// Side view of one or more flights: height against horizontal distance,
/// meters.
pub fn emit_svg_trajectory(
    series: &[Vec<FlightSample>],
    title: &str,
) -> Result<String, HarnessError> {
    if series.iter().all(|s| s.is_empty()) {
        return Err(HarnessError::Config("empty trajectory".into()));
    }
    let side = |s: &FlightSample| (s.position[0].hypot(s.position[1]), s.position[2]);
    let all = series.iter().flatten().map(side);
    let xmax = all.clone().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let ymax = all.map(|p| p.1).fold(0.0, f64::max).max(1.0);
    let mut plot = Plot {
        x: (0.0, 1.05 * xmax),
        y: (0.0, 1.1 * ymax),
        body: String::new(),
    };
    plot.axes("distance (m)", "height (m)", &xml_escape(title));
    const COLORS: [&str; 4] = ["#05a", "#c60", "#080", "#a0a"];
    for (k, samples) in series.iter().enumerate() {
        let mut d = String::new();
        for (i, s) in samples.iter().enumerate() {
            let (x, y) = side(s);
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { " L" },
                plot.px(x),
                plot.py(y)
            );
        }
        let _ = writeln!(
            plot.body,
            r##"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
            COLORS[k % COLORS.len()]
        );
    }
    Ok(plot.finish())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballistics::{LandingPoint, LaunchState, WallImpact};
    use crate::controller::ShootState;
    use crate::geometry::AimState;

    fn record(i: usize, lateral: f64) -> ShotRecord {
        let aim = AimState::new(0.01, 0.02, 0.65).unwrap();
        ShotRecord {
            shot_index: i,
            commanded: aim,
            realized: aim,
            speed: Some(31.234_567_89),
            launch: Some(LaunchState::default()),
            landing: Some(LandingPoint {
                x: 40.0,
                y: 0.5,
                flight_time: 1.5,
                wall: Some(WallImpact {
                    height: 1.1,
                    lateral,
                    time: 0.3,
                }),
            }),
            detection: None,
            state: ShootState::Released,
            fault: None,
        }
    }

    #[test]
    fn one_record_gives_header_and_one_row() {
        let csv = emit_csv(&[record(0, 0.1)]).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn csv_round_trip() {
        let mut faulted = record(1, -0.2);
        faulted.state = ShootState::Fault;
        faulted.landing = None;
        faulted.speed = None;
        let recs = [record(0, 0.123_456_789), faulted];
        let text = emit_csv(&recs).unwrap();
        let rows = parse_csv(&text).unwrap();
        let expect: Vec<_> = recs.iter().map(CsvRow::from_record).collect();
        assert_eq!(rows, expect);
        assert_eq!(rows[1].impact_x_cm, None);
        assert_eq!(rows_to_csv(&rows).unwrap(), text);
        assert_eq!(rows[0].impact_x_cm, Some(12.345679));
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn non_finite_values_and_unknown_states_are_rejected() {
        let good = emit_csv(&[record(0, 0.1)]).unwrap();
        assert!(parse_csv(&good.replace("RELEASED", "LAUNCHED")).is_err());
        let nan = good.replacen("65.0", "NaN", 1);
        assert_ne!(nan, good);
        assert!(parse_csv(&nan).is_err());
    }

    #[test]
    fn scatter_of_identical_points() {
        let recs: Vec<_> = (0..10).map(|i| record(i, 0.0)).collect();
        let svg = emit_svg_scatter(&recs, ScatterFrame::Wall, "Experiment 1").unwrap();
        let markers: Vec<_> = svg
            .lines()
            .filter(|l| l.contains("class=\"shot\""))
            .collect();
        assert_eq!(markers.len(), 10);
        assert!(markers.iter().all(|m| *m == markers[0]));
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert!(emit_svg_scatter(&[], ScatterFrame::Wall, "").is_err());
    }

    #[test]
    fn trajectory_plot_has_a_path() {
        let launch = LaunchState {
            speed: 30.0,
            elevation: 0.1,
            ..LaunchState::default()
        };
        let samples = crate::ballistics::sample_trajectory(&launch, 1e-3, 10).unwrap();
        let svg = emit_svg_trajectory(&[samples], "a < b").unwrap();
        assert!(svg.contains("<path d=\"M"));
        assert!(svg.contains("a &lt; b"));
    }
}
