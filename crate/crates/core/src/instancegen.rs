//! Seeded instance generators and the canonical instance text format.
//!
//! # Random stream
//!
//! All generators draw from `Xoshiro256**` seeded through
//! `SeedableRng::seed_from_u64` (SplitMix64 expansion), as provided by the
//! `rand_xoshiro` crate. Sampling on top of the raw `u64` stream is done here,
//! not by `rand`, so the output does not depend on `rand`'s distribution code:
//!
//! * uniform integers in `0..=100`: rejection sampling on `next_u64() % 101`;
//! * uniform reals in `[0, 1)`: the top 53 bits of `next_u64()`;
//! * normal samples: Box–Muller, cosine branch only, two uniforms per sample.
//!
//! Points are drawn one after another, depot first. Per point the stream is
//! consumed as follows: uniform kind draws `x` then `y`; one-center draws the
//! angle, then the two Box–Muller uniforms for the radius; two-center does
//! the same and then draws the shift coin.
//!
//! # File format
//!
//! ```text
//! # meta kind=uniform seed=42
//! 2 3
//! 0 50 50
//! 1 10 20
//! 2 90.5 7
//! ```
//!
//! Line one holds `n alpha`; the next `n + 1` lines hold `id x y`, with id `0`
//! the depot. Lines starting with `#` are comments; a `# meta` comment carries
//! generator provenance. Floats are written in shortest round-trip form.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Read, Write};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GeneratorKind, Instance, InstanceMeta, Point};

/// Upper end of the uniform integer grid.
pub const GRID_MAX: u64 = 100;
/// Standard deviation of the clustered generators' radius.
pub const RADIUS_STDDEV: f64 = 50.0;
/// x-shift applied to half the points of the two-center generator.
pub const SECOND_CENTER_SHIFT: f64 = 200.0;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
}

struct Sampler(Xoshiro256StarStar);

impl Sampler {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    fn grid(&mut self) -> u64 {
        let span = GRID_MAX + 1;
        let zone = u64::MAX - (u64::MAX % span);
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return x % span;
            }
        }
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self, stddev: f64) -> f64 {
        let u1 = 1.0 - self.unit(); // (0, 1]
        let u2 = self.unit();
        stddev * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    fn point(&mut self, kind: GeneratorKind) -> Point {
        match kind {
            GeneratorKind::Uniform => {
                let x = self.grid() as f64;
                let y = self.grid() as f64;
                Point::new(x, y)
            }
            GeneratorKind::OneCenter | GeneratorKind::TwoCenter => {
                let a = 2.0 * PI * self.unit();
                let r = self.normal(RADIUS_STDDEV);
                let mut p = Point::new(r * a.cos(), r * a.sin());
                if kind == GeneratorKind::TwoCenter && self.unit() < 0.5 {
                    p.x += SECOND_CENTER_SHIFT;
                }
                p
            }
        }
    }
}

/// Draws `n + 1` points (depot first) from the distribution named by `spec`.
pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    if spec.n < 1 {
        return Err(GenError::InvalidSpec("n must be at least 1".into()));
    }
    if !(spec.alpha > 0.0 && spec.alpha.is_finite()) {
        return Err(GenError::InvalidSpec(format!(
            "alpha must be positive, got {}",
            spec.alpha
        )));
    }
    let mut rng = Sampler::new(spec.seed);
    let coords = (0..=spec.n).map(|_| rng.point(spec.kind)).collect();
    let inst = Instance::new(coords, spec.alpha).map_err(|e| GenError::InvalidSpec(e.to_string()))?;
    Ok(inst.with_meta(InstanceMeta {
        kind: spec.kind,
        seed: spec.seed,
    }))
}

/// Renders `inst` in the canonical text format.
pub fn format_instance(inst: &Instance) -> String {
    let mut out = String::new();
    if let Some(meta) = inst.meta() {
        let _ = writeln!(out, "# meta kind={} seed={}", meta.kind, meta.seed);
    }
    let _ = writeln!(out, "{} {}", inst.n(), inst.alpha());
    for (id, p) in inst.coords().iter().enumerate() {
        let _ = writeln!(out, "{id} {} {}", p.x, p.y);
    }
    out
}

pub fn write_instance<W: Write>(inst: &Instance, mut sink: W) -> io::Result<()> {
    sink.write_all(format_instance(inst).as_bytes())
}

pub fn read_instance<R: Read>(mut source: R) -> Result<Instance, ParseError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_instance(&text)
}

fn parse_meta(line: usize, body: &str) -> Result<InstanceMeta, ParseError> {
    let mut kind = None;
    let mut seed = None;
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("kind", v)) => kind = Some(v.parse().map_err(|e: String| syntax(line, e))?),
            Some(("seed", v)) => {
                seed = Some(
                    v.parse::<u64>()
                        .map_err(|_| syntax(line, format!("non-numeric seed `{v}`")))?,
                )
            }
            _ => return Err(syntax(line, format!("unrecognized meta field `{field}`"))),
        }
    }
    match (kind, seed) {
        (Some(kind), Some(seed)) => Ok(InstanceMeta { kind, seed }),
        _ => Err(syntax(line, "meta comment needs kind= and seed=")),
    }
}

fn num<T: std::str::FromStr>(line: usize, what: &str, tok: Option<&str>) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("non-numeric {what} `{tok}`")))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut meta = None;
    let mut header: Option<(usize, f64)> = None;
    let mut coords: Vec<Option<Point>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(body) = comment.trim_start().strip_prefix("meta ") {
                meta = Some(parse_meta(line, body)?);
            }
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        match header {
            None => {
                let n: usize = num(line, "customer count", toks.next())?;
                let alpha: f64 = num(line, "alpha", toks.next())?;
                if toks.next().is_some() {
                    return Err(syntax(line, "header must be `n alpha`"));
                }
                if n < 1 {
                    return Err(syntax(line, "customer count must be at least 1"));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(syntax(line, format!("alpha must be positive, got {alpha}")));
                }
                header = Some((n, alpha));
                coords = vec![None; n + 1];
            }
            Some((n, _)) => {
                let id: usize = num(line, "node id", toks.next())?;
                let x: f64 = num(line, "x coordinate", toks.next())?;
                let y: f64 = num(line, "y coordinate", toks.next())?;
                if toks.next().is_some() {
                    return Err(syntax(line, "coordinate line must be `id x y`"));
                }
                if !x.is_finite() || !y.is_finite() {
                    return Err(syntax(line, "coordinates must be finite"));
                }
                let seen = coords.iter().filter(|c| c.is_some()).count();
                if seen == n + 1 {
                    return Err(syntax(
                        line,
                        format!("count mismatch: header declares {n} customers but more lines follow"),
                    ));
                }
                if id > n {
                    return Err(syntax(line, format!("node id {id} outside 0..={n}")));
                }
                if coords[id].replace(Point::new(x, y)).is_some() {
                    return Err(syntax(line, format!("duplicate id {id}")));
                }
            }
        }
    }

    let Some((n, alpha)) = header else {
        return Err(syntax(last_line.max(1), "missing `n alpha` header"));
    };
    if coords[0].is_none() {
        return Err(syntax(last_line, "missing depot (id 0)"));
    }
    let found = coords.iter().filter(|c| c.is_some()).count();
    if found != n + 1 {
        return Err(syntax(
            last_line,
            format!("count mismatch: header declares {n} customers, found {} coordinate lines", found),
        ));
    }
    let points = coords.into_iter().map(Option::unwrap).collect();
    let inst = Instance::new(points, alpha).map_err(|e| syntax(last_line, e.to_string()))?;
    Ok(match meta {
        Some(m) => inst.with_meta(m),
        None => inst,
    })
}
