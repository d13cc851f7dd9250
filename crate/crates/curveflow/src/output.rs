//! Artifact emission for finished (or partially finished) runs: CSV traces
//! and a simple overlaid SVG rendering.
//!
//! All floating-point values in the CSV files are written with 17 significant
//! digits, so parsing them back reproduces the in-memory values bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::geometry::PolygonalCurve;
use crate::simulation::{SimulationOutput, SnapshotRecord};
use crate::vec2::Vec2;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Paths produced by [`write_snapshots`].
#[derive(Clone, Debug)]
pub struct WrittenFiles {
    pub series: PathBuf,
    pub summary: PathBuf,
    pub final_rescaled: Option<PathBuf>,
}

pub const SERIES_HEADER: &str = "t,i,x1,x2,r,k,nu,alpha";
pub const SUMMARY_HEADER: &str = "t,L,A,mean_k_beta,omega,max_rphi_dev";
pub const FINAL_RESCALED_HEADER: &str = "i,x1,x2,r,k,nu";

/// 17 significant digits: enough to reproduce any `f64` exactly on parse.
fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    std::fs::write(path, contents).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the CSV artifacts of a run into `dir` (created if missing):
/// `series.csv` with the retained per-vertex states, `summary.csv` with the
/// every-step scalar trace, and `final_rescaled.csv` when the run ended by
/// shrinking to a point. Empty traces produce header-only files.
pub fn write_snapshots(output: &SimulationOutput, dir: &Path) -> Result<WrittenFiles, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut series = String::from(SERIES_HEADER);
    series.push('\n');
    for snapshot in &output.snapshots {
        let t = fmt_f64(snapshot.t);
        for i in 0..snapshot.vertices.len() {
            let _ = writeln!(
                series,
                "{t},{i},{},{},{},{},{},{}",
                fmt_f64(snapshot.vertices[i].x),
                fmt_f64(snapshot.vertices[i].y),
                fmt_f64(snapshot.edge_lengths[i]),
                fmt_f64(snapshot.edge_curvatures[i]),
                fmt_f64(snapshot.edge_angles[i]),
                fmt_f64(snapshot.alpha[i]),
            );
        }
    }
    let series_path = dir.join("series.csv");
    write_file(&series_path, &series)?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for record in &output.scalars {
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            fmt_f64(record.t),
            fmt_f64(record.length),
            fmt_f64(record.area),
            fmt_f64(record.mean_curvature_velocity),
            fmt_f64(record.omega),
            fmt_f64(record.max_spacing_deviation),
        );
    }
    let summary_path = dir.join("summary.csv");
    write_file(&summary_path, &summary)?;

    let final_rescaled = match &output.final_rescaled {
        Some(curve) => {
            let mut text = String::from(FINAL_RESCALED_HEADER);
            text.push('\n');
            for i in 0..curve.n() {
                let _ = writeln!(
                    text,
                    "{i},{},{},{},{},{}",
                    fmt_f64(curve.vertices()[i].x),
                    fmt_f64(curve.vertices()[i].y),
                    fmt_f64(curve.edge_lengths()[i]),
                    fmt_f64(curve.edge_curvatures()[i]),
                    fmt_f64(curve.edge_angles()[i]),
                );
            }
            let path = dir.join("final_rescaled.csv");
            write_file(&path, &text)?;
            Some(path)
        }
        None => None,
    };

    Ok(WrittenFiles {
        series: series_path,
        summary: summary_path,
        final_rescaled,
    })
}

/// One retained time level parsed back from `series.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFrame {
    pub t: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    pub nu: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Parse a `series.csv` back into per-frame arrays.
pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesFrame>, OutputError> {
    let text = std::fs::read_to_string(path).map_err(|source| OutputError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, message: String| OutputError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SERIES_HEADER => {}
        Some((_, header)) => {
            return Err(malformed(1, format!("unexpected header {header:?}")));
        }
        None => return Err(malformed(1, "empty file".to_string())),
    }

    let mut frames: Vec<SeriesFrame> = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let number = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(malformed(
                number,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let parse = |text: &str| -> Result<f64, OutputError> {
            text.parse::<f64>()
                .map_err(|e| malformed(number, format!("bad number {text:?}: {e}")))
        };
        let t = parse(fields[0])?;
        let i: usize = fields[1]
            .parse()
            .map_err(|e| malformed(number, format!("bad index {:?}: {e}", fields[1])))?;
        if i == 0 {
            frames.push(SeriesFrame {
                t,
                x1: Vec::new(),
                x2: Vec::new(),
                r: Vec::new(),
                k: Vec::new(),
                nu: Vec::new(),
                alpha: Vec::new(),
            });
        }
        let frame = frames
            .last_mut()
            .ok_or_else(|| malformed(number, "first row must have index 0".to_string()))?;
        if i != frame.x1.len() {
            return Err(malformed(
                number,
                format!("expected index {}, got {i}", frame.x1.len()),
            ));
        }
        frame.x1.push(parse(fields[2])?);
        frame.x2.push(parse(fields[3])?);
        frame.r.push(parse(fields[4])?);
        frame.k.push(parse(fields[5])?);
        frame.nu.push(parse(fields[6])?);
        frame.alpha.push(parse(fields[7])?);
    }
    Ok(frames)
}

/// Fixed world-to-pixel mapping shared by every frame of one rendering.
struct Viewport {
    min_x: f64,
    max_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Viewport {
    /// Bounding box of all points, padded by 5%; degenerate boxes (a single
    /// point, or an empty set) fall back to a unit-sized window so the SVG
    /// stays valid.
    fn fit(points: impl Iterator<Item = Vec2>) -> Viewport {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for p in points {
            if p.x.is_finite() && p.y.is_finite() {
                min_x = min_x.min(p.x);
                max_x = max_x.max(p.x);
                min_y = min_y.min(p.y);
                max_y = max_y.max(p.y);
            }
        }
        if !(min_x.is_finite() && min_y.is_finite()) {
            (min_x, max_x, min_y, max_y) = (-0.5, 0.5, -0.5, 0.5);
        }
        let span = (max_x - min_x).max(max_y - min_y);
        let pad = if span > 0.0 { 0.05 * span } else { 0.5 };
        min_x -= pad;
        max_x += pad;
        min_y -= pad;
        max_y += pad;

        let span_x = max_x - min_x;
        let span_y = max_y - min_y;
        let scale = 1000.0 / span_x.max(span_y);
        Viewport {
            min_x,
            max_y,
            scale,
            width: span_x * scale,
            height: span_y * scale,
        }
    }

    /// Pixel coordinates with the y axis flipped to SVG's convention.
    fn project(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.min_x) * self.scale, (self.max_y - p.y) * self.scale)
    }
}

/// Keep at most `target` evenly spaced items, always retaining the last.
fn thinned_indices(len: usize, target: usize) -> Vec<usize> {
    if len <= target {
        return (0..len).collect();
    }
    let stride = len.div_ceil(target);
    let mut indices: Vec<usize> = (0..len).step_by(stride).collect();
    if indices.last() != Some(&(len - 1)) {
        indices.push(len - 1);
    }
    indices
}

fn svg_document(viewport: &Viewport, body: &str) -> String {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" ",
            "viewBox=\"0 0 {w:.1} {h:.1}\">\n",
            "<rect x=\"0\" y=\"0\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"white\"/>\n",
            "{body}</svg>\n"
        ),
        w = viewport.width,
        h = viewport.height,
        body = body,
    )
}

fn polygon_element(viewport: &Viewport, points: &[Vec2], stroke: &str, width: f64) -> String {
    let mut attr = String::new();
    for (idx, &p) in points.iter().enumerate() {
        let (x, y) = viewport.project(p);
        if idx > 0 {
            attr.push(' ');
        }
        let _ = write!(attr, "{x:.2},{y:.2}");
    }
    format!(
        "<polygon points=\"{attr}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width:.2}\"/>\n"
    )
}

/// Render retained frames on a fixed viewport: every frame as point markers,
/// every third frame (and the last) as a closed outline. Long series are
/// thinned to roughly one hundred frames first.
pub fn render_svg(snapshots: &[SnapshotRecord], path: &Path) -> Result<(), OutputError> {
    let viewport = Viewport::fit(
        snapshots
            .iter()
            .flat_map(|s| s.vertices.iter().copied()),
    );
    let frames = thinned_indices(snapshots.len(), 100);

    let mut body = String::new();
    for (position, &frame) in frames.iter().enumerate() {
        if position % 3 == 0 || position + 1 == frames.len() {
            body.push_str(&polygon_element(
                &viewport,
                &snapshots[frame].vertices,
                "#4682b4",
                1.5,
            ));
        }
    }
    for &frame in &frames {
        for &p in &snapshots[frame].vertices {
            let (x, y) = viewport.project(p);
            let _ = writeln!(
                body,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.0\" fill=\"#444444\"/>"
            );
        }
    }
    write_file(path, &svg_document(&viewport, &body))
}

/// Render a single curve (e.g. the rescaled final state) as one outline.
pub fn render_curve_svg(curve: &PolygonalCurve, path: &Path) -> Result<(), OutputError> {
    let viewport = Viewport::fit(curve.vertices().iter().copied());
    let body = polygon_element(&viewport, curve.vertices(), "#b44646", 2.0);
    write_file(path, &svg_document(&viewport, &body))
}
