//! 2-D projections of flowpipe segments and their text formats.

use std::fmt::Write;
use std::str::FromStr;

use subspace_reach::geometry::{polygon_vertices, GeometryError, StateSet, TemplateDirections};
use subspace_reach::reach::FlowpipeSegment;
use subspace_reach::{HybridAutomaton, VariablePartition};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Gnuplot,
    Svg,
}

impl FromStr for PlotFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(PlotFormat::Csv),
            "gnuplot" => Ok(PlotFormat::Gnuplot),
            "svg" => Ok(PlotFormat::Svg),
            other => Err(format!("unknown plot format `{other}` (expected csv, gnuplot or svg)")),
        }
    }
}

impl PlotFormat {
    /// Format implied by a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(PlotFormat::Csv),
            "gp" | "gnuplot" | "plt" => Some(PlotFormat::Gnuplot),
            "svg" => Some(PlotFormat::Svg),
            _ => None,
        }
    }
}

/// Projection of one segment onto two variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRecord {
    pub flowpipe: usize,
    pub segment: usize,
    pub location: String,
    pub t1: f64,
    pub t2: f64,
    /// Counter-clockwise vertices.
    pub vertices: Vec<[f64; 2]>,
}

fn interval(set: &StateSet, i: usize) -> Result<(f64, f64), GeometryError> {
    let mut e = vec![0.0; set.dim()];
    e[i] = 1.0;
    let hi = set.support(&e)?;
    e[i] = -1.0;
    Ok((-set.support(&e)?, hi))
}

/// Octagonal template polygon of a segment's projection onto the global
/// variables `x` and `y`.
pub fn segment_polygon(
    seg: &FlowpipeSegment,
    p: &VariablePartition,
    x: usize,
    y: usize,
) -> Result<Vec<[f64; 2]>, GeometryError> {
    let at = p.locate();
    let ((kx, px), (ky, py)) = (at[x], at[y]);
    if kx == ky && px != py {
        let (lo, hi, swap) = if px < py { (px, py, false) } else { (py, px, true) };
        let proj = seg.sets[kx].project(&[lo, hi])?;
        let poly = proj.template_eval(&TemplateDirections::octagonal(2))?;
        let mut v = polygon_vertices(poly.condition());
        if swap {
            for p in &mut v {
                p.swap(0, 1);
            }
            v.reverse();
        }
        return Ok(v);
    }
    let (xl, xh) = interval(&seg.sets[kx], px)?;
    let (yl, yh) = interval(&seg.sets[ky], py)?;
    let mut v = vec![[xl, yl], [xh, yl], [xh, yh], [xl, yh]];
    v.dedup();
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    Ok(v)
}

/// Polygons of all segments, in segment order.
pub fn polygons(
    segments: &[FlowpipeSegment],
    h: &HybridAutomaton,
    p: &VariablePartition,
    x: usize,
    y: usize,
) -> Result<Vec<PolygonRecord>, GeometryError> {
    segments
        .iter()
        .map(|seg| {
            Ok(PolygonRecord {
                flowpipe: seg.flowpipe,
                segment: seg.index,
                location: h.locations[seg.location].name.clone(),
                t1: seg.t1,
                t2: seg.t2,
                vertices: segment_polygon(seg, p, x, y)?,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "flowpipe,segment,location,t1,t2,vx,vy";

pub fn to_csv(records: &[PolygonRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        for v in &r.vertices {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.flowpipe, r.segment, r.location, r.t1, r.t2, v[0], v[1]
            );
        }
    }
    s
}

/// Reads back the output of [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<PolygonRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CliError::Plot("missing CSV header".into()));
    }
    let mut out: Vec<PolygonRecord> = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = || CliError::Plot(format!("malformed CSV row {}", n + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad());
        }
        let flowpipe: usize = f[0].parse().map_err(|_| bad())?;
        let segment: usize = f[1].parse().map_err(|_| bad())?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let (t1, t2, vx, vy) = (num(f[3])?, num(f[4])?, num(f[5])?, num(f[6])?);
        match out.last_mut() {
            Some(r) if r.flowpipe == flowpipe && r.segment == segment => r.vertices.push([vx, vy]),
            _ => out.push(PolygonRecord {
                flowpipe,
                segment,
                location: f[2].to_string(),
                t1,
                t2,
                vertices: vec![[vx, vy]],
            }),
        }
    }
    Ok(out)
}

pub fn to_gnuplot(records: &[PolygonRecord], xname: &str, yname: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# reachable segments projected onto ({xname}, {yname})");
    let _ = writeln!(s, "set xlabel \"{xname}\"");
    let _ = writeln!(s, "set ylabel \"{yname}\"");
    s.push_str("$segments << EOD\n");
    for r in records {
        let _ = writeln!(
            s,
            "# flowpipe {} segment {} location {} time [{}, {}]",
            r.flowpipe, r.segment, r.location, r.t1, r.t2
        );
        for v in r.vertices.iter().chain(r.vertices.first()) {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        s.push('\n');
    }
    s.push_str("EOD\n");
    s.push_str("plot $segments with filledcurves closed fillstyle transparent solid 0.3 notitle\n");
    s
}

pub fn to_svg(records: &[PolygonRecord]) -> String {
    let pts = records.iter().flat_map(|r| r.vertices.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h) = ((x1 - x0).max(1e-9), (y1 - y0).max(1e-9));
    let (width, height) = (800.0, 600.0);
    let map = |p: &[f64; 2]| ((p[0] - x0) / w * width, height - (p[1] - y0) / h * height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\">"
    );
    for r in records {
        let points: Vec<String> = r
            .vertices
            .iter()
            .map(|p| {
                let (a, b) = map(p);
                format!("{a:.3},{b:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            "  <polygon points=\"{}\" fill=\"steelblue\" fill-opacity=\"0.3\" stroke=\"navy\" stroke-width=\"0.5\"/>",
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
