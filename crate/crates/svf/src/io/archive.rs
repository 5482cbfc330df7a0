//! Self-contained reconstruction archive: the implicit graph spline plus
//! the boundary clouds and build bookkeeping behind it. Queries (point
//! membership, slice rasters, zero-level extraction) run directly off the
//! stored spline, so a loaded archive answers exactly like the build that
//! wrote it. Coefficient and coordinate arrays travel as base64
//! little-endian f64 blobs; everything else is readable text.

use std::fmt::Write as _;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;

use crate::error::{Error, Result};
use crate::geom::cloud::{PointCloud, PointTag};
use crate::geom::grid::GridSet;
use crate::quasi::marching::LevelSet;
use crate::quasi::{zero_level_extract, TensorSpline};
use crate::reconstruct::{
    raster_slice, BuildDiagnostics, GraphApproximant, ReconstructConfig,
};

#[derive(Debug, Clone)]
pub struct Archive {
    pub dim: usize,
    pub config: ReconstructConfig,
    pub diagnostics: BuildDiagnostics,
    pub spline: TensorSpline,
    pub q0: PointCloud,
    pub q1: PointCloud,
}

impl Archive {
    pub fn from_approximant(ga: &GraphApproximant) -> Self {
        Archive {
            dim: ga.dim(),
            config: ga.config().clone(),
            diagnostics: ga.diagnostics().clone(),
            spline: ga.spline().clone(),
            q0: ga.q0().clone(),
            q1: ga.q1().clone(),
        }
    }

    pub fn encode(&self) -> String {
        let mut out = String::new();
        out.push_str("svf-archive v1\n");
        let _ = writeln!(out, "dim {}", self.dim);
        let c = &self.config;
        let _ = writeln!(out, "config m {} k {} p {} s {}", c.m, c.k, c.p_spline, c.s_target);
        let d = &self.diagnostics;
        let _ = writeln!(
            out,
            "diagnostics total {} skipped {} failed {} reliable {} unreliable {}",
            d.sections_total, d.sections_skipped, d.sections_failed, d.curves_reliable,
            d.curves_unreliable
        );
        let _ = writeln!(
            out,
            "spline degree {} dim {} nodes {}",
            self.spline.degree(),
            self.spline.dim(),
            self.spline.n_nodes()
        );
        let _ = writeln!(out, "coeffs {}", encode_f64s(self.spline.coeffs()));
        for (name, cloud) in [("q0", &self.q0), ("q1", &self.q1)] {
            let _ = writeln!(out, "cloud {name} dim {} count {}", cloud.dim(), cloud.len());
            let mut coords = Vec::with_capacity(cloud.len() * cloud.dim());
            let mut tags = String::with_capacity(cloud.len());
            for i in 0..cloud.len() {
                coords.extend_from_slice(cloud.point(i));
                tags.push(match cloud.tag(i) {
                    PointTag::SampleBoundary => 's',
                    PointTag::LineSectionCurve => 'c',
                });
            }
            let _ = writeln!(out, "coords {}", encode_f64s(&coords));
            let _ = writeln!(out, "tags {}", if tags.is_empty() { "-".into() } else { tags });
        }
        out
    }

    pub fn parse(text: &str) -> Result<Archive> {
        let mut cur = super::Cursor::new(text);
        let header = cur.next_line("file header")?;
        if header.text != "svf-archive v1" {
            return Err(cur.fail(header.no, "expected header `svf-archive v1`"));
        }
        let dim: usize = cur.keyed_value("dim")?;

        let line = cur.next_line("`config ...`")?;
        let cfg = keyed_numbers(line.text, line.no, "config", &["m", "k", "p", "s"])?;
        let config = ReconstructConfig {
            m: cfg[0],
            k: cfg[1],
            p_spline: cfg[2],
            s_target: cfg[3],
        };

        let line = cur.next_line("`diagnostics ...`")?;
        let dg = keyed_numbers(
            line.text,
            line.no,
            "diagnostics",
            &["total", "skipped", "failed", "reliable", "unreliable"],
        )?;
        let diagnostics = BuildDiagnostics {
            sections_total: dg[0],
            sections_skipped: dg[1],
            sections_failed: dg[2],
            curves_reliable: dg[3],
            curves_unreliable: dg[4],
        };

        let line = cur.next_line("`spline ...`")?;
        let sp = keyed_numbers(line.text, line.no, "spline", &["degree", "dim", "nodes"])?;
        if sp[1] != dim + 1 {
            return Err(cur.fail(
                line.no,
                &format!("spline dim {} does not match graph dim {} + 1", sp[1], dim),
            ));
        }
        let line = cur.next_line("`coeffs <base64>`")?;
        let coeffs = decode_f64s(payload(line.text, line.no, "coeffs")?, line.no)?;
        let spline = TensorSpline::from_coeffs(sp[0], sp[1], sp[2], coeffs)?;

        let q0 = parse_cloud(&mut cur, "q0")?;
        let q1 = parse_cloud(&mut cur, "q1")?;
        if let Some(extra) = cur.peek() {
            return Err(cur.fail(extra.no, "trailing content after the cloud blocks"));
        }
        Ok(Archive {
            dim,
            config,
            diagnostics,
            spline,
            q0,
            q1,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Archive> {
        let text = std::fs::read_to_string(path)?;
        Archive::parse(&text)
    }

    /// Membership of the image point `x` at abscissa `t`.
    pub fn inclusion(&self, t: f64, x: &[f64]) -> bool {
        let mut p = Vec::with_capacity(self.dim + 1);
        p.push(t);
        p.extend_from_slice(x);
        self.spline.value(&p) >= 0.0
    }

    /// Raster of the image at `t`; `res = 0` uses the lattice resolution.
    pub fn evaluate_set(&self, t: f64, res: usize) -> Result<GridSet> {
        raster_slice(&self.spline, t, res)
    }

    /// Zero level of the image at `t`.
    pub fn boundary_slice(&self, t: f64, res: usize) -> Result<LevelSet> {
        zero_level_extract(&self.spline, &[(0, t)], res)
    }

    /// Zero level of the whole graph in ambient space.
    pub fn boundary_mesh(&self, res: usize) -> Result<LevelSet> {
        zero_level_extract(&self.spline, &[], res)
    }
}

fn encode_f64s(values: &[f64]) -> String {
    if values.is_empty() {
        return "-".into();
    }
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    B64.encode(bytes)
}

fn decode_f64s(blob: &str, line: usize) -> Result<Vec<f64>> {
    if blob == "-" {
        return Ok(Vec::new());
    }
    let bytes = B64.decode(blob).map_err(|e| Error::Parse {
        line,
        message: format!("bad base64 blob: {e}"),
    })?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            line,
            message: format!("blob length {} is not a multiple of 8", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn payload<'a>(text: &'a str, line: usize, key: &str) -> Result<&'a str> {
    text.strip_prefix(key)
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .ok_or(Error::Parse {
            line,
            message: format!("expected `{key} <payload>`"),
        })
}

/// Parses `head k1 v1 k2 v2 ...` with the given key order.
fn keyed_numbers(text: &str, line: usize, head: &str, keys: &[&str]) -> Result<Vec<usize>> {
    let mut toks = text.split_whitespace();
    let fail = |message: String| Error::Parse { line, message };
    if toks.next() != Some(head) {
        return Err(fail(format!("expected a `{head}` line")));
    }
    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        if toks.next() != Some(*key) {
            return Err(fail(format!("expected field `{key}`")));
        }
        let v = toks
            .next()
            .ok_or_else(|| fail(format!("missing value for `{key}`")))?;
        out.push(
            v.parse()
                .map_err(|_| fail(format!("bad value for `{key}`: `{v}`")))?,
        );
    }
    if toks.next().is_some() {
        return Err(fail(format!("trailing tokens on the `{head}` line")));
    }
    Ok(out)
}

fn parse_cloud(cur: &mut super::Cursor, name: &str) -> Result<PointCloud> {
    let line = cur.next_line(&format!("`cloud {name} ...`"))?;
    let mut toks = line.text.split_whitespace();
    let no = line.no;
    if toks.next() != Some("cloud") || toks.next() != Some(name) {
        return Err(cur.fail(no, &format!("expected `cloud {name} dim <d> count <n>`")));
    }
    let rest: Vec<&str> = toks.collect();
    if rest.len() != 4 || rest[0] != "dim" || rest[2] != "count" {
        return Err(cur.fail(no, &format!("expected `cloud {name} dim <d> count <n>`")));
    }
    let dim: usize = rest[1]
        .parse()
        .map_err(|_| cur.fail(no, "bad cloud dim"))?;
    let count: usize = rest[3]
        .parse()
        .map_err(|_| cur.fail(no, "bad cloud count"))?;

    let line = cur.next_line("`coords <base64>`")?;
    let coords = decode_f64s(payload(line.text, line.no, "coords")?, line.no)?;
    if coords.len() != count * dim {
        return Err(Error::DimensionMismatch(format!(
            "cloud {name} holds {} coordinates, expected {}",
            coords.len(),
            count * dim
        )));
    }
    let line = cur.next_line("`tags <chars>`")?;
    let tags = payload(line.text, line.no, "tags")?;
    let tags = if tags == "-" { "" } else { tags };
    if tags.len() != count {
        return Err(Error::DimensionMismatch(format!(
            "cloud {name} holds {} tags, expected {count}",
            tags.len()
        )));
    }
    let mut cloud = PointCloud::new(dim);
    for (i, ch) in tags.chars().enumerate() {
        let tag = match ch {
            's' => PointTag::SampleBoundary,
            'c' => PointTag::LineSectionCurve,
            other => {
                return Err(cur.fail(line.no, &format!("unknown point tag `{other}`")));
            }
        };
        cloud.push(&coords[i * dim..(i + 1) * dim], tag);
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms;
    use crate::reconstruct::build_graph_approximant;

    #[test]
    fn archive_round_trips_byte_identically() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(16, 0).unwrap();
        let ga = build_graph_approximant(&svf, &ReconstructConfig::default()).unwrap();
        let arch = Archive::from_approximant(&ga);
        let text = arch.encode();
        let back = Archive::parse(&text).unwrap();
        assert_eq!(text, back.encode());
        assert_eq!(arch.spline.coeffs(), back.spline.coeffs());
        assert_eq!(arch.q0.len(), back.q0.len());
        assert_eq!(arch.q1.len(), back.q1.len());
        for (t, y) in [(0.31, 0.52), (0.5, 0.18), (0.77, 0.61)] {
            assert_eq!(arch.inclusion(t, &[y]), ga.inclusion(t, &[y]));
        }
    }

    #[test]
    fn rejects_coefficient_blob_of_wrong_size() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(8, 0).unwrap();
        let ga = build_graph_approximant(&svf, &ReconstructConfig::default()).unwrap();
        let text = Archive::from_approximant(&ga).encode();
        let butchered: String = text
            .lines()
            .map(|l| {
                if let Some(rest) = l.strip_prefix("coeffs ") {
                    format!("coeffs {}\n", &rest[..rest.len() / 2 / 4 * 4])
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        assert!(Archive::parse(&butchered).is_err());
    }
}
