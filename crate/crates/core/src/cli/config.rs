//! Run configuration: one `key=value` per line, `#` comments.
//!
//! ```text
//! config  := (line '\n')* line?
//! line    := ws* | ws* '#' any* | ws* key ws* '=' ws* value ws*
//! key     := command | poly | z | a | alpha | rho | grid | depth | levels
//!          | samples | seed | tol | delta | graph | out | json
//! poly    := complex (',' complex)*          coefficients, lowest degree first
//! complex := see `parse_complex`             e.g. 0.1, -2i, 1-0.5i
//! grid    := size | bounds ',' size          bounds = x_min,x_max,y_min,y_max
//! size    := uint | uint 'x' uint
//! ```
//!
//! The original text of every line is kept, so `to_text` reproduces the
//! parsed input byte for byte. Lines changed through `set` are written back
//! as `key=value`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fatou::Grid;
use crate::poly::{parse_complex, ComplexPolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    RenderJulia,
    RenderBasin,
    Fibers,
    SolenoidDemo,
    ConjugacyCheck,
    TorusDiagnostics,
    AccessibleBoundary,
    Homology,
    CoveringCheck,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::RenderJulia,
        Command::RenderBasin,
        Command::Fibers,
        Command::SolenoidDemo,
        Command::ConjugacyCheck,
        Command::TorusDiagnostics,
        Command::AccessibleBoundary,
        Command::Homology,
        Command::CoveringCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::RenderJulia => "render-julia",
            Command::RenderBasin => "render-basin",
            Command::Fibers => "fibers",
            Command::SolenoidDemo => "solenoid-demo",
            Command::ConjugacyCheck => "conjugacy-check",
            Command::TorusDiagnostics => "torus-diagnostics",
            Command::AccessibleBoundary => "accessible-boundary",
            Command::Homology => "homology",
            Command::CoveringCheck => "covering-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::parse(0, format!("unknown command '{s}'")))
    }
}

/// Grid resolution with optional bounds; commands supply default bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub bounds: Option<[f64; 4]>,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Bounds default to `[-radius, radius]^2`.
    pub fn resolve(&self, radius: f64) -> Result<Grid> {
        let [x0, x1, y0, y1] = self.bounds.unwrap_or([-radius, radius, -radius, radius]);
        Grid::new(x0, x1, y0, y1, self.nx, self.ny)
    }
}

fn parse_uint(text: &str, offset: usize) -> Result<usize> {
    let t = text.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(offset, "expected an unsigned integer"));
    }
    t.parse().map_err(|_| Error::parse(offset, "integer out of range"))
}

fn parse_real(text: &str, offset: usize) -> Result<f64> {
    let z = parse_complex(text).map_err(|e| shift_error(e, offset))?;
    if z.im != 0.0 {
        return Err(Error::parse(offset, "expected a real number"));
    }
    Ok(z.re)
}

fn shift_error(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { offset: o, message } => Error::Parse {
            offset: o + offset,
            message,
        },
        other => other,
    }
}

pub fn parse_grid(text: &str) -> Result<GridSpec> {
    let fields: Vec<&str> = text.split(',').collect();
    let mut offsets = Vec::with_capacity(fields.len());
    let mut pos = 0;
    for f in &fields {
        offsets.push(pos);
        pos += f.len() + 1;
    }
    let (bounds, size_at) = match fields.len() {
        1 => (None, 0),
        5 => {
            let mut b = [0.0; 4];
            for i in 0..4 {
                b[i] = parse_real(fields[i], offsets[i])?;
            }
            (Some(b), 4)
        }
        _ => return Err(Error::parse(0, "grid is 'N', 'NxM' or 'x_min,x_max,y_min,y_max,NxM'")),
    };
    let size = fields[size_at];
    let base = offsets[size_at];
    let (nx, ny) = match size.split_once('x') {
        Some((a, b)) => (parse_uint(a, base)?, parse_uint(b, base + a.len() + 1)?),
        None => {
            let n = parse_uint(size, base)?;
            (n, n)
        }
    };
    let spec = GridSpec { bounds, nx, ny };
    if let Some(b) = bounds {
        Grid::new(b[0], b[1], b[2], b[3], nx, ny).map_err(|e| Error::parse(0, e.to_string()))?;
    } else if nx == 0 || ny == 0 {
        return Err(Error::parse(base, "grid resolution must be positive"));
    }
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq)]
enum Line {
    Text(String),
    Entry { key: &'static str, text: String },
}

pub const KEYS: [&str; 16] = [
    "command", "poly", "z", "a", "alpha", "rho", "grid", "depth", "levels", "samples", "seed",
    "tol", "delta", "graph", "out", "json",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    lines: Vec<Line>,
    trailing_newline: bool,
    pub command: Option<Command>,
    pub poly: Option<ComplexPolynomial>,
    pub z: Option<Complex64>,
    pub a: Option<Complex64>,
    pub alpha: Option<Complex64>,
    pub rho: Option<f64>,
    pub grid: Option<GridSpec>,
    pub depth: Option<usize>,
    pub levels: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub delta: Option<f64>,
    pub graph: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig {
            trailing_newline: text.ends_with('\n'),
            ..Default::default()
        };
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() && !cfg.trailing_newline {
            return Ok(cfg);
        }
        let mut start = 0;
        for line in body.split('\n') {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                cfg.lines.push(Line::Text(line.to_string()));
            } else {
                let Some(eq) = line.find('=') else {
                    return Err(Error::parse(start, "expected 'key=value'"));
                };
                let key = line[..eq].trim();
                let lead = line.len() - line.trim_start().len();
                let key = KEYS
                    .into_iter()
                    .find(|k| *k == key)
                    .ok_or_else(|| Error::parse(start + lead, format!("unknown key '{key}'")))?;
                if cfg.has(key) {
                    return Err(Error::parse(start + lead, format!("duplicate key '{key}'")));
                }
                let raw = &line[eq + 1..];
                let value_lead = raw.len() - raw.trim_start().len();
                cfg.apply(key, raw.trim(), start + eq + 1 + value_lead)?;
                cfg.lines.push(Line::Entry {
                    key,
                    text: line.to_string(),
                });
            }
            start += line.len() + 1;
        }
        Ok(cfg)
    }

    fn has(&self, key: &str) -> bool {
        self.lines
            .iter()
            .any(|l| matches!(l, Line::Entry { key: k, .. } if *k == key))
    }

    fn apply(&mut self, key: &str, value: &str, offset: usize) -> Result<()> {
        let at = |e: Error| shift_error(e, offset);
        if value.is_empty() {
            return Err(Error::parse(offset, format!("empty value for '{key}'")));
        }
        match key {
            "command" => self.command = Some(value.parse().map_err(at)?),
            "poly" => {
                let p: ComplexPolynomial = value.parse().map_err(at)?;
                p.require_dynamical().map_err(|e| Error::parse(offset, e.to_string()))?;
                self.poly = Some(p);
            }
            "z" => self.z = Some(parse_complex(value).map_err(at)?),
            "a" => self.a = Some(parse_complex(value).map_err(at)?),
            "alpha" => self.alpha = Some(parse_complex(value).map_err(at)?),
            "rho" => self.rho = Some(parse_real(value, offset)?),
            "grid" => self.grid = Some(parse_grid(value).map_err(at)?),
            "depth" => self.depth = Some(parse_uint(value, offset)?),
            "levels" => self.levels = Some(parse_uint(value, offset)?),
            "samples" => self.samples = Some(parse_uint(value, offset)?),
            "seed" => {
                if !value.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::parse(offset, "expected an unsigned integer"));
                }
                self.seed = Some(value.parse().map_err(|_| Error::parse(offset, "seed out of range"))?)
            }
            "tol" => self.tol = Some(parse_real(value, offset)?),
            "delta" => self.delta = Some(parse_real(value, offset)?),
            "graph" => self.graph = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "json" => self.json = Some(PathBuf::from(value)),
            other => return Err(Error::parse(offset, format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Sets or replaces `key`; the line is rewritten as `key=value`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = KEYS
            .into_iter()
            .find(|k| *k == key)
            .ok_or_else(|| Error::parse(0, format!("unknown key '{key}'")))?;
        if value.contains('\n') {
            return Err(Error::parse(0, "values cannot span lines"));
        }
        self.apply(key, value.trim(), 0)?;
        let text = format!("{key}={}", value.trim());
        match self
            .lines
            .iter_mut()
            .find(|l| matches!(l, Line::Entry { key: k, .. } if *k == key))
        {
            Some(line) => *line = Line::Entry { key, text },
            None => {
                self.lines.push(Line::Entry { key, text });
                self.trailing_newline = true;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = self
            .lines
            .iter()
            .map(|l| match l {
                Line::Text(t) | Line::Entry { text: t, .. } => t.as_str(),
            })
            .collect::<Vec<_>>()
            .join("\n");
        if self.trailing_newline {
            out.push('\n');
        }
        out
    }
}
