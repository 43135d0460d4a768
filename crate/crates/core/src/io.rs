//! Plain-text file formats.
//!
//! * state: `spin <2s>` then one `<2m>/2 <Re> <Im>` line per `m`, descending;
//! * density matrix / operator: `spin <2s>` then `row col Re Im` entries;
//! * quorum: optional `kind tripod|explicit`, then one `theta phi` line per axis.
//!
//! Floating-point values carry 17 significant digits, enough to round-trip
//! every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::measurement::{tripod_axes, Axis, QuorumSpec};
use crate::spin::{DensityMatrix, GenericOperator, PureState, SpinValue};

/// `f64` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `m` written as `<2m>/2` (or a plain integer `m`) into `2m`.
pub fn parse_m(token: &str) -> Option<i32> {
    match token.split_once('/') {
        Some((num, "2")) => num.parse().ok(),
        Some(_) => None,
        None => token.parse::<i32>().ok().map(|m| 2 * m),
    }
}

pub(crate) struct ParseCtx {
    line: usize,
}

impl ParseCtx {
    pub(crate) fn new(line: usize) -> Self {
        ParseCtx { line }
    }

    pub(crate) fn err(&self, msg: &str) -> Error {
        Error::Parse { line: self.line, msg: msg.to_string() }
    }

    pub(crate) fn field<T: FromStr>(&self, tokens: &[&str], i: usize) -> Result<T> {
        let tok = tokens.get(i).ok_or_else(|| self.err(&format!("missing field {}", i + 1)))?;
        tok.parse().map_err(|_| self.err(&format!("cannot parse `{tok}`")))
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (ParseCtx, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((ParseCtx::new(i + 1), line.split_whitespace().collect()))
        }
    })
}

/// Either kind of state file.
#[derive(Debug, Clone)]
pub enum StateFile {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateFile {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateFile::Pure(p) => p.to_density(),
            StateFile::Mixed(r) => r.clone(),
        }
    }

    pub fn spin(&self) -> SpinValue {
        match self {
            StateFile::Pure(p) => p.spin(),
            StateFile::Mixed(r) => r.spin(),
        }
    }
}

pub fn format_state(psi: &PureState) -> String {
    let spin = psi.spin();
    let mut out = format!("spin {}\n", spin.two_s());
    for (j, a) in psi.amplitudes().iter().enumerate() {
        writeln!(out, "{}/2 {} {}", spin.two_m(j), fmt_f64(a.re), fmt_f64(a.im)).unwrap();
    }
    out
}

fn format_matrix(spin: SpinValue, m: &CMatrix) -> String {
    let mut out = format!("spin {}\n", spin.two_s());
    for i in 0..m.nrows() {
        for k in 0..m.ncols() {
            let z = m[(i, k)];
            writeln!(out, "{i} {k} {} {}", fmt_f64(z.re), fmt_f64(z.im)).unwrap();
        }
    }
    out
}

pub fn format_density(rho: &DensityMatrix) -> String {
    format_matrix(rho.spin(), rho.matrix())
}

pub fn format_operator(op: &GenericOperator) -> String {
    format_matrix(op.spin(), op.matrix())
}

fn parse_spin_header(ctx: &ParseCtx, tokens: &[&str]) -> Result<SpinValue> {
    Ok(SpinValue::from_two_s(ctx.field(tokens, 1)?))
}

fn parse_matrix_entries(text: &str, spin_hint: Option<SpinValue>) -> Result<(SpinValue, CMatrix)> {
    let mut spin = spin_hint;
    let mut entries = Vec::new();
    for (ctx, tokens) in data_lines(text) {
        if tokens[0] == "spin" {
            spin = Some(parse_spin_header(&ctx, &tokens)?);
            continue;
        }
        if tokens.len() != 4 {
            return Err(ctx.err("expected `row col Re Im`"));
        }
        let i: usize = ctx.field(&tokens, 0)?;
        let k: usize = ctx.field(&tokens, 1)?;
        let re: f64 = ctx.field(&tokens, 2)?;
        let im: f64 = ctx.field(&tokens, 3)?;
        entries.push((i, k, c(re, im), ctx));
    }
    let spin = match spin {
        Some(s) => s,
        None => {
            let n = entries.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0);
            if n == 0 {
                return Err(Error::Parse { line: 1, msg: "empty matrix".into() });
            }
            SpinValue::from_two_s(n as u32 - 1)
        }
    };
    let d = spin.dim();
    let mut m = CMatrix::zeros(d, d);
    for (i, k, z, ctx) in entries {
        if i >= d || k >= d {
            return Err(ctx.err("index out of range"));
        }
        m[(i, k)] = z;
    }
    Ok((spin, m))
}

/// Parses a pure-state or density-matrix file.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let is_density = data_lines(text).any(|(_, t)| t[0] != "spin" && t.len() == 4);
    if is_density {
        let (spin, m) = parse_matrix_entries(text, None)?;
        return Ok(StateFile::Mixed(DensityMatrix::new(spin, m)?));
    }
    let mut spin = None;
    let mut amps: Vec<(i32, crate::linalg::C64, ParseCtx)> = Vec::new();
    for (ctx, tokens) in data_lines(text) {
        if tokens[0] == "spin" {
            spin = Some(parse_spin_header(&ctx, &tokens)?);
            continue;
        }
        if tokens.len() != 3 {
            return Err(ctx.err("expected `<2m>/2 Re Im`"));
        }
        let two_m = parse_m(tokens[0]).ok_or_else(|| ctx.err("bad m value"))?;
        let re: f64 = ctx.field(&tokens, 1)?;
        let im: f64 = ctx.field(&tokens, 2)?;
        amps.push((two_m, c(re, im), ctx));
    }
    let spin = spin.ok_or(Error::Parse { line: 1, msg: "missing `spin` header".into() })?;
    let mut v = CVector::zeros(spin.dim());
    for (two_m, z, ctx) in amps {
        let j = spin.index_of_two_m(two_m).ok_or_else(|| ctx.err("m out of range"))?;
        v[j] = z;
    }
    Ok(StateFile::Pure(PureState::normalized(spin, v)?))
}

/// Parses an operator file; the `spin` header is optional when the spin is
/// known from context or inferable from the largest index.
pub fn parse_operator(text: &str, spin: Option<SpinValue>) -> Result<GenericOperator> {
    let (file_spin, m) = parse_matrix_entries(text, spin)?;
    if let Some(s) = spin {
        if s != file_spin {
            return Err(Error::DimensionMismatch { expected: s.dim(), found: file_spin.dim() });
        }
    }
    GenericOperator::new(file_spin, m)
}

pub fn format_quorum(q: &QuorumSpec) -> String {
    let mut out = String::from("# theta phi\n");
    if q.kind() == crate::measurement::QuorumKind::Tripod {
        out.push_str("kind tripod\n");
    }
    for a in q.axes() {
        writeln!(out, "{} {}", fmt_f64(a.theta()), fmt_f64(a.phi())).unwrap();
    }
    out
}

pub fn parse_quorum(text: &str) -> Result<QuorumSpec> {
    let mut tripod = false;
    let mut axes = Vec::new();
    for (ctx, tokens) in data_lines(text) {
        if tokens[0] == "kind" {
            tripod = match tokens.get(1).copied() {
                Some("tripod") => true,
                Some("explicit") | Some("cone") => false,
                _ => return Err(ctx.err("unknown quorum kind")),
            };
            continue;
        }
        if tokens.len() != 2 {
            return Err(ctx.err("expected `theta phi`"));
        }
        let theta: f64 = ctx.field(&tokens, 0)?;
        let phi: f64 = ctx.field(&tokens, 1)?;
        axes.push(Axis::new(theta, phi).map_err(|e| ctx.err(&e.to_string()))?);
    }
    if tripod {
        if axes.len() != 3 {
            return Err(Error::NotTripod(format!("{} axes listed", axes.len())));
        }
        return tripod_axes(axes[0], axes[1], axes[2]);
    }
    QuorumSpec::explicit(axes)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}
