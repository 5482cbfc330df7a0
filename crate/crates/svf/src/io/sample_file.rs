//! Plain-text container for equidistant sample sequences.
//!
//! Layout: a fixed header (`svf-samples v1`, `dim`, `n`, `grid` for d >= 2,
//! optional `phantom` provenance) followed by one block per sample. Planar
//! and volumetric samples store their value grids row-major with the last
//! axis fastest, one grid row per line; interval samples store one
//! `lo hi` pair per line. Values are written in Rust's shortest
//! round-trip notation, so save followed by load reproduces every f64
//! bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::grid::GridSet;
use crate::geom::interval::IntervalUnion;
use crate::geom::sampled::{SampleSet, SampledSVF};
use crate::io::{parse_number, Cursor};

/// A parsed sample file: the sequence itself plus the phantom name the
/// file was generated from, when recorded.
#[derive(Debug, Clone)]
pub struct SampleFile {
    pub svf: SampledSVF,
    pub phantom: Option<String>,
}

pub fn encode_samples(svf: &SampledSVF, phantom: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str("svf-samples v1\n");
    let _ = writeln!(out, "dim {}", svf.dim());
    let _ = writeln!(out, "n {}", svf.n_intervals());
    if svf.dim() >= 2 {
        if let SampleSet::Grid(g) = svf.sample(0) {
            let _ = writeln!(out, "grid {}", g.n_per_axis());
        }
    }
    if let Some(name) = phantom {
        let _ = writeln!(out, "phantom {name}");
    }
    for i in 0..svf.len() {
        let _ = writeln!(out, "sample {i}");
        match svf.sample(i) {
            SampleSet::Intervals(u) => {
                let _ = writeln!(out, "intervals {}", u.count());
                for &(lo, hi) in u.intervals() {
                    let _ = writeln!(out, "{lo} {hi}");
                }
            }
            SampleSet::Grid(g) => {
                for row in g.values().chunks(g.n_per_axis()) {
                    let mut line = String::new();
                    for (j, v) in row.iter().enumerate() {
                        if j > 0 {
                            line.push(' ');
                        }
                        let _ = write!(line, "{v}");
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
            }
        }
    }
    out
}

pub fn parse_samples(text: &str) -> Result<SampleFile> {
    let mut cur = Cursor::new(text);
    let header = cur.next_line("file header")?;
    if header.text != "svf-samples v1" {
        return Err(cur.fail(header.no, "expected header `svf-samples v1`"));
    }
    let dim: usize = cur.keyed_value("dim")?;
    if !(1..=3).contains(&dim) {
        return Err(cur.fail(cur.last_no, "dim must be 1, 2 or 3"));
    }
    let n: usize = cur.keyed_value("n")?;
    if n < 1 {
        return Err(cur.fail(cur.last_no, "n must be at least 1"));
    }
    let grid = if dim >= 2 {
        let g: usize = cur.keyed_value("grid")?;
        if g < 2 {
            return Err(cur.fail(cur.last_no, "grid must be at least 2"));
        }
        Some(g)
    } else {
        None
    };
    let mut phantom = None;
    if let Some(peek) = cur.peek() {
        if let Some(rest) = peek.text.strip_prefix("phantom ") {
            phantom = Some(rest.trim().to_string());
            cur.advance();
        }
    }
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let head = cur.next_line("sample block")?;
        let want = format!("sample {i}");
        if head.text != want {
            return Err(cur.fail(head.no, &format!("expected `{want}`")));
        }
        if let Some(g) = grid {
            samples.push(SampleSet::Grid(parse_grid(&mut cur, dim, g, i)?));
        } else {
            samples.push(SampleSet::Intervals(parse_intervals(&mut cur)?));
        }
    }
    if let Some(extra) = cur.peek() {
        return Err(cur.fail(extra.no, "trailing content after the last sample"));
    }
    let svf = SampledSVF::new(samples)?;
    Ok(SampleFile { svf, phantom })
}

pub fn save_samples(path: &Path, svf: &SampledSVF, phantom: Option<&str>) -> Result<()> {
    std::fs::write(path, encode_samples(svf, phantom))?;
    Ok(())
}

pub fn load_samples(path: &Path) -> Result<SampleFile> {
    let text = std::fs::read_to_string(path)?;
    parse_samples(&text)
}

fn parse_intervals(cur: &mut Cursor) -> Result<IntervalUnion> {
    let count: usize = cur.keyed_value("intervals")?;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let line = cur.next_line("interval pair")?;
        let mut it = line.text.split_whitespace();
        let lo = parse_number(it.next(), line.no)?;
        let hi = parse_number(it.next(), line.no)?;
        if it.next().is_some() {
            return Err(cur.fail(line.no, "interval line holds more than two numbers"));
        }
        pairs.push((lo, hi));
    }
    Ok(IntervalUnion::new(pairs))
}

fn parse_grid(cur: &mut Cursor, dim: usize, n_per_axis: usize, sample_idx: usize) -> Result<GridSet> {
    let total = n_per_axis.pow(dim as u32);
    let mut values = Vec::with_capacity(total);
    while values.len() < total {
        let Some(line) = cur.peek() else {
            return Err(Error::DimensionMismatch(format!(
                "sample {sample_idx} grid payload truncated: expected {total} values, got {}",
                values.len()
            )));
        };
        if line.text.starts_with("sample ") {
            return Err(Error::DimensionMismatch(format!(
                "sample {sample_idx} grid payload truncated: expected {total} values, got {}",
                values.len()
            )));
        }
        for tok in line.text.split_whitespace() {
            values.push(parse_number(Some(tok), line.no)?);
        }
        cur.advance();
    }
    if values.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "sample {sample_idx} grid payload holds {} values, expected {total}",
            values.len()
        )));
    }
    GridSet::new(dim, n_per_axis, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms;

    #[test]
    fn interval_sequence_round_trips_bit_exact() {
        let ph = phantoms::by_name("disk").unwrap();
        let svf = ph.sample(16, 0).unwrap();
        let text = encode_samples(&svf, Some("disk"));
        let back = parse_samples(&text).unwrap();
        assert_eq!(back.phantom.as_deref(), Some("disk"));
        assert_eq!(back.svf.len(), svf.len());
        for i in 0..svf.len() {
            let (a, b) = (svf.sample(i), back.svf.sample(i));
            match (a, b) {
                (SampleSet::Intervals(u), SampleSet::Intervals(v)) => {
                    assert_eq!(u.intervals(), v.intervals(), "sample {i}");
                }
                _ => panic!("sample {i} changed representation"),
            }
        }
        assert_eq!(text, encode_samples(&back.svf, back.phantom.as_deref()));
    }

    #[test]
    fn grid_sequence_round_trips_bit_exact() {
        let ph = phantoms::by_name("ball").unwrap();
        let svf = ph.sample(8, 17).unwrap();
        let text = encode_samples(&svf, None);
        let back = parse_samples(&text).unwrap();
        assert!(back.phantom.is_none());
        for i in 0..svf.len() {
            match (svf.sample(i), back.svf.sample(i)) {
                (SampleSet::Grid(g), SampleSet::Grid(h)) => {
                    assert_eq!(g.values(), h.values(), "sample {i}");
                }
                _ => panic!("sample {i} changed representation"),
            }
        }
    }

    #[test]
    fn truncated_grid_payload_is_a_dimension_mismatch() {
        let ph = phantoms::by_name("ball").unwrap();
        let svf = ph.sample(4, 9).unwrap();
        let text = encode_samples(&svf, None);
        let cut: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
        match parse_samples(&cut) {
            Err(Error::DimensionMismatch(msg)) => assert!(msg.contains("truncated"), "{msg}"),
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_its_line() {
        let text = "svf-samples v1\ndim 1\nn 1\nsample 0\nintervals 1\n0.25 zebra\nsample 1\nintervals 0\n";
        match parse_samples(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("zebra"));
            }
            other => panic!("expected Parse error, got {other:?}"),
        }
    }
}
