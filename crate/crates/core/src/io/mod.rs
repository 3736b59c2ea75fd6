//! Files: trees, matrices, matchings, geodesic frames and synthetic data.

pub mod format;
pub mod synth;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::labels::LabelConstraint;
use crate::metric::{self, Metric};
use crate::qed::{GeodesicPath, MatchRow};
use crate::tree_model::TreeShape;

pub use format::{from_json, read_dir, read_tree, to_json, write_tree, EdgeRecord, TreeFile};
pub use synth::{generate_synthetic, SynthSpec};

/// All pairwise distances. Each unordered pair is computed once, so the
/// matrix is exactly symmetric.
pub fn distance_matrix(
    shapes: &[TreeShape],
    metric: &Metric,
    ordered: bool,
    labels: Option<&LabelConstraint>,
) -> Result<Vec<Vec<f64>>> {
    let n = shapes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| metric::distance(metric, &shapes[i], &shapes[j], ordered, labels))
        .collect::<Result<_>>()?;
    let mut m = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}

/// Matrix as CSV with a header row and a name column.
pub fn write_matrix_csv<W: Write>(out: W, names: &[String], m: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (name, row) in names.iter().zip(m) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Edge correspondence as CSV: `source,target,status,cost`, where status is
/// `matched`, `disappears` or `appears`.
pub fn write_matching_csv<W: Write>(out: W, rows: &[MatchRow], source: &TreeShape, target: &TreeShape) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "status", "cost"]).map_err(csv_err)?;
    for r in rows {
        let s = r.source.map_or(String::new(), |e| source.ids()[e].clone());
        let t = r.target.map_or(String::new(), |f| target.ids()[f].clone());
        let status = match (r.source, r.target) {
            (Some(_), Some(_)) => "matched",
            (Some(_), None) => "disappears",
            _ => "appears",
        };
        w.write_record([s, t, status.to_string(), r.cost.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Absolute landmark positions of every edge, root vertex at the origin.
pub fn edge_polylines(s: &TreeShape) -> Vec<Vec<Vec<f64>>> {
    let layout = s.layout();
    let mut ends: Vec<Vec<f64>> = Vec::with_capacity(s.len());
    let mut out = Vec::with_capacity(s.len());
    for e in 0..s.len() {
        let start = s.topology().parent(e).map_or(vec![0.0; layout.dim], |p| ends[p].clone());
        let pts: Vec<Vec<f64>> = s
            .attr(e)
            .landmarks(layout)
            .into_iter()
            .map(|p| p.iter().zip(&start).map(|(a, b)| a + b).collect())
            .collect();
        ends.push(pts.last().unwrap().clone());
        out.push(pts);
    }
    out
}

/// Planar shape as an SVG document, one polyline per edge.
pub fn to_svg(s: &TreeShape) -> Result<String> {
    if s.layout().dim != 2 {
        return Err(Error::Parameter("vector output needs planar shapes".into()));
    }
    let lines = edge_polylines(s);
    let (mut lo, mut hi) = ([0.0f64, 0.0f64], [0.0f64, 0.0f64]);
    for p in lines.iter().flatten() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
    let (x0, y0) = (lo[0] - pad, -(hi[1] + pad));
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.6} {y0:.6} {w:.6} {h:.6}\">\n"
    );
    let stroke = 0.005 * w.max(h);
    for (e, pts) in lines.iter().enumerate() {
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.6},{:.6}", p[0], -p[1])).collect();
        svg.push_str(&format!(
            "  <polyline id=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.6}\" points=\"{}\"/>\n",
            s.ids()[e],
            coords.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes `n` shapes at uniform arc-length fractions `i / (n − 1)` as
/// `frame_000.json`, ... and, for planar shapes, matching `.svg` files.
pub fn export_frames(path: &GeodesicPath, n: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    if n < 2 {
        return Err(Error::Parameter("at least two frames".into()));
    }
    fs::create_dir_all(dir)?;
    let width = (n - 1).to_string().len().max(3);
    let mut written = Vec::new();
    for i in 0..n {
        let shape = path.point(i as f64 / (n - 1) as f64)?;
        let file = dir.join(format!("frame_{i:0width$}.json"));
        write_tree(&file, &shape)?;
        written.push(file);
        if shape.layout().dim == 2 {
            let file = dir.join(format!("frame_{i:0width$}.svg"));
            fs::write(&file, to_svg(&shape)?)?;
            written.push(file);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::QedConfig;
    use crate::tree_model::Layout;

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let shapes: Vec<TreeShape> = ["1[2,3]", "1[2,3]", "2[1]"]
            .iter()
            .map(|t| TreeShape::from_bracket(Layout::scalar(), t).unwrap())
            .collect();
        let m = distance_matrix(&shapes, &Metric::Qed(QedConfig::default()), true, None).unwrap();
        assert_eq!(m[0][1], 0.0);
        for i in 0..3 {
            assert_eq!(m[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(m[i][j].to_bits(), m[j][i].to_bits());
            }
        }
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &["a".into(), "b".into(), "c".into()], &m).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(",a,b,c\na,0,0,"));
    }

    #[test]
    fn polylines_chain_edges() {
        let text = r#"{"dim":2,"landmarks_per_edge":2,"edges":[
            {"id":"r","parent":null,"order":0,"points":[[0,0],[0,1]]},
            {"id":"a","parent":"r","order":0,"points":[[0,0],[-1,1]]},
            {"id":"b","parent":"r","order":1,"points":[[0,0],[1,1]]}]}"#;
        let s = from_json(text).unwrap();
        let lines = edge_polylines(&s);
        assert_eq!(lines[1], vec![vec![0.0, 1.0], vec![-1.0, 2.0]]);
        assert!(to_svg(&s).unwrap().matches("<polyline").count() == 3);
    }
}
