//! Basin classification of points and pixel grids, with PPM and CSV output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::map::GenExpMap;
use crate::pullback::HairTrace;
use crate::symbolic::IM_RESOLUTION_LIMIT;

/// Largest accepted `width * height`.
pub const MAX_PIXELS: u64 = 100_000_000;
/// Real parts beyond this are treated as escaping.
pub const ESCAPE_CAP: f64 = 1e300;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("window must satisfy x_min < x_max and y_min < y_max")]
    InvalidWindow,
    #[error("resolution must be at least 1x1")]
    ZeroResolution,
    #[error("{width}x{height} exceeds the pixel limit")]
    ResolutionTooLarge { width: usize, height: usize },
    #[error("max_iter must be at least 1")]
    ZeroIterations,
    #[error("malformed CSV: {0}")]
    BadCsv(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `Re f^n(z) <= M` at step `n`, so the orbit converges to the attracting fixed point.
    AttractedCertified { step: usize },
    /// `Re f^k(z) > M` for every computed step.
    JCandidate { iterations: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// `Re f^n(z)` at the certified step.
    pub entry_re: Option<f64>,
}

impl Classification {
    pub fn is_attracted(&self) -> bool {
        matches!(self.verdict, Verdict::AttractedCertified { .. })
    }
}

/// Iterates until the orbit enters `Re z <= M` or `max_iter` steps have passed.
/// Orbits that outgrow double precision are reported as J-candidates.
pub fn classify_point(map: &GenExpMap, z: Complex64, max_iter: usize) -> Classification {
    let big_m = map.big_m();
    let mut z = z;
    for step in 0..=max_iter {
        if z.re <= big_m {
            return Classification { verdict: Verdict::AttractedCertified { step }, entry_re: Some(z.re) };
        }
        if step == max_iter || !(z.re <= ESCAPE_CAP) || !(z.im.abs() <= IM_RESOLUTION_LIMIT) {
            break;
        }
        z = map.eval_f(z);
    }
    Classification { verdict: Verdict::JCandidate { iterations: max_iter }, entry_re: None }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridJob {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub max_iter: usize,
}

impl GridJob {
    pub fn validate(&self) -> Result<(), RenderError> {
        let w = &self.window;
        if !(w.x_min < w.x_max && w.y_min < w.y_max) || ![w.x_min, w.x_max, w.y_min, w.y_max].iter().all(|v| v.is_finite())
        {
            return Err(RenderError::InvalidWindow);
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::ZeroResolution);
        }
        if self.width as u64 * self.height as u64 > MAX_PIXELS {
            return Err(RenderError::ResolutionTooLarge { width: self.width, height: self.height });
        }
        if self.max_iter == 0 {
            return Err(RenderError::ZeroIterations);
        }
        Ok(())
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let w = &self.window;
        let dx = (w.x_max - w.x_min) / self.width as f64;
        let dy = (w.y_max - w.y_min) / self.height as f64;
        Complex64::new(w.x_min + (col as f64 + 0.5) * dx, w.y_max - (row as f64 + 0.5) * dy)
    }
}

/// Row-major classifications of every pixel of a job.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub job: GridJob,
    pub cells: Vec<Classification>,
}

impl Grid {
    pub fn get(&self, col: usize, row: usize) -> &Classification {
        &self.cells[row * self.job.width + col]
    }

    pub fn j_candidates(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_attracted()).count()
    }
}

/// Classifies every pixel center; rows are processed in parallel.
pub fn render_grid(map: &GenExpMap, job: &GridJob) -> Result<Grid, RenderError> {
    job.validate()?;
    let cells = (0..job.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..job.width).map(move |col| classify_point(map, job.pixel_center(col, row), job.max_iter))
        })
        .collect();
    Ok(Grid { job: *job, cells })
}

/// Gray level of a pixel: J-candidates are black, attracted pixels fade from
/// white (step 0) towards dark gray.
pub fn shade(c: &Classification, max_iter: usize) -> u8 {
    match c.verdict {
        Verdict::JCandidate { .. } => 0,
        Verdict::AttractedCertified { step } => {
            let step = step.min(max_iter) as u64;
            (255 - step * 223 / max_iter.max(1) as u64) as u8
        }
    }
}

/// Binary PPM (P6) bytes for a grid.
pub fn encode_ppm(grid: &Grid) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", grid.job.width, grid.job.height);
    let mut out = Vec::with_capacity(header.len() + 3 * grid.cells.len());
    out.extend_from_slice(header.as_bytes());
    for c in &grid.cells {
        let v = shade(c, grid.job.max_iter);
        out.extend_from_slice(&[v, v, v]);
    }
    out
}

pub fn write_ppm(grid: &Grid, path: &Path) -> Result<(), RenderError> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&encode_ppm(grid))?;
    f.flush()?;
    Ok(())
}

const GRID_HEADER: [&str; 7] = ["col", "row", "re", "im", "verdict", "step", "entry_re"];

/// One record per pixel: position, center, verdict and entry data.
pub fn write_grid_csv<W: Write>(grid: &Grid, out: W) -> Result<(), RenderError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for row in 0..grid.job.height {
        for col in 0..grid.job.width {
            let c = grid.get(col, row);
            let z = grid.job.pixel_center(col, row);
            let (verdict, step) = match c.verdict {
                Verdict::AttractedCertified { step } => ("attracted", step),
                Verdict::JCandidate { iterations } => ("j_candidate", iterations),
            };
            let entry = c.entry_re.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                col.to_string(),
                row.to_string(),
                z.re.to_string(),
                z.im.to_string(),
                verdict.to_string(),
                step.to_string(),
                entry,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back the classifications written by [`write_grid_csv`], in file order.
pub fn read_grid_csv<R: io::Read>(input: R) -> Result<Vec<(usize, usize, Classification)>, RenderError> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |m: &str| RenderError::BadCsv(m.to_string());
    if r.headers()?.iter().ne(GRID_HEADER) {
        return Err(bad("unexpected header"));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad("short record"));
        let num = |i: usize| field(i)?.parse::<usize>().map_err(|_| bad("bad integer"));
        let (col, row, step) = (num(0)?, num(1)?, num(5)?);
        let verdict = match field(4)? {
            "attracted" => Verdict::AttractedCertified { step },
            "j_candidate" => Verdict::JCandidate { iterations: step },
            _ => return Err(bad("unknown verdict")),
        };
        let entry_re = match field(6)? {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("bad entry_re"))?),
        };
        out.push((col, row, Classification { verdict, entry_re }));
    }
    Ok(out)
}

/// One record per hair sample: `t, re, im, depth_used`.
pub fn write_trace_csv<W: Write>(trace: &HairTrace, out: W) -> Result<(), RenderError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im", "depth_used"])?;
    for s in &trace.samples {
        w.write_record([s.t.to_string(), s.z.re.to_string(), s.z.im.to_string(), trace.depth.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
