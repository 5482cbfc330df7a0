//! Text containers and exports: sample sequences, reconstruction
//! archives, point and mesh dumps. Every format is UTF-8 with an explicit
//! version header; numbers use Rust's shortest round-trip notation and
//! bulk coefficient arrays travel as base64 little-endian blobs, so a
//! write/read cycle is bit-exact and deterministic input yields
//! byte-identical files.

pub mod archive;
pub mod export;
pub mod sample_file;

pub use archive::Archive;
pub use export::{grid_text, intervals_text, mesh_obj, points_text};
pub use sample_file::{encode_samples, load_samples, parse_samples, save_samples, SampleFile};

use crate::error::{Error, Result};

pub(crate) struct Line<'a> {
    pub(crate) no: usize,
    pub(crate) text: &'a str,
}

/// Line-oriented reader that skips blanks and `#` comments and tracks the
/// 1-based line number for error reporting.
pub(crate) struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    pub(crate) last_no: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| Line {
                no: i + 1,
                text: raw.trim(),
            })
            .filter(|l| !l.text.is_empty() && !l.text.starts_with('#'))
            .collect();
        Cursor {
            lines,
            pos: 0,
            last_no: 0,
        }
    }

    pub(crate) fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    pub(crate) fn advance(&mut self) {
        if let Some(l) = self.lines.get(self.pos) {
            self.last_no = l.no;
        }
        self.pos += 1;
    }

    pub(crate) fn next_line(&mut self, what: &str) -> Result<Line<'a>> {
        match self.lines.get(self.pos) {
            Some(l) => {
                let out = Line {
                    no: l.no,
                    text: l.text,
                };
                self.advance();
                Ok(out)
            }
            None => Err(Error::Parse {
                line: self.last_no + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    /// Reads a `key value` line and parses the value.
    pub(crate) fn keyed_value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.next_line(&format!("`{key} <value>`"))?;
        let rest = line
            .text
            .strip_prefix(key)
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| self.fail(line.no, &format!("expected `{key} <value>`")))?;
        rest.parse()
            .map_err(|_| self.fail(line.no, &format!("bad value for `{key}`: `{rest}`")))
    }

    pub(crate) fn fail(&self, line: usize, message: &str) -> Error {
        Error::Parse {
            line,
            message: message.to_string(),
        }
    }
}

pub(crate) fn parse_number(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or(Error::Parse {
        line,
        message: "expected a number".into(),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: `{tok}`"),
    })
}
