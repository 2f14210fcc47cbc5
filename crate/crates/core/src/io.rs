//! Plain-text formats for deflections and potential grids.
//!
//! Deflection file:
//! ```text
//! # deflection L=1 H=1 bc=clamped
//! -1.0 0.0 0.0
//! ...
//! ```
//! one node per line with columns `x u [u']`. Without the slope column the slopes
//! are recovered by central differences.
//!
//! Potential grid file: `nx`, `nz` and the extents of the reference rectangle, then
//! the nodal values row by row from `z = -H` upward.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hermite::{BcMode, DeflectionProfile};
use crate::transmission::PotentialField;

/// Deflection as read from a file together with the header values.
#[derive(Debug, Clone)]
pub struct DeflectionFile {
    pub profile: DeflectionProfile,
    pub half_width: f64,
    pub gap: f64,
}

fn header_lines(out: &mut String, comments: &[String]) {
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
}

pub fn write_deflection(u: &DeflectionProfile, gap: f64, comments: &[String]) -> String {
    let mut out = String::new();
    let bc = match u.bc_mode {
        BcMode::Clamped => "clamped",
        BcMode::Pinned => "pinned",
    };
    let _ = writeln!(out, "# deflection L={} H={} bc={bc}", u.half_width(), gap);
    header_lines(&mut out, comments);
    for i in 0..u.x_nodes.len() {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", u.x_nodes[i], u.u_values[i], u.du_values[i]);
    }
    out
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| Error::Parse { line, reason: format!("`{tok}` is not a number") })
}

pub fn read_deflection(text: &str, gap_floor: f64) -> Result<DeflectionFile> {
    let mut header: Option<(f64, f64, BcMode)> = None;
    let mut rows: Vec<(f64, f64, Option<f64>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(fields) = rest.strip_prefix("deflection") {
                let (mut l, mut h, mut bc) = (None, None, BcMode::Clamped);
                for f in fields.split_whitespace() {
                    match f.split_once('=') {
                        Some(("L", v)) => l = Some(parse_f64(v, line)?),
                        Some(("H", v)) => h = Some(parse_f64(v, line)?),
                        Some(("bc", "clamped")) => bc = BcMode::Clamped,
                        Some(("bc", "pinned")) => bc = BcMode::Pinned,
                        _ => return Err(Error::Parse { line, reason: format!("unknown header field `{f}`") }),
                    }
                }
                match (l, h) {
                    (Some(l), Some(h)) => header = Some((l, h, bc)),
                    _ => return Err(Error::Parse { line, reason: "header needs L= and H=".into() }),
                }
            }
            continue;
        }
        if header.is_none() {
            return Err(Error::Parse { line, reason: "data before the `# deflection` header".into() });
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(Error::Parse { line, reason: format!("expected 2 or 3 columns, found {}", toks.len()) });
        }
        let du = toks.get(2).map(|t| parse_f64(t, line)).transpose()?;
        if !rows.is_empty() && du.is_some() != rows[0].2.is_some() {
            return Err(Error::Parse { line, reason: "inconsistent column count".into() });
        }
        rows.push((parse_f64(toks[0], line)?, parse_f64(toks[1], line)?, du));
    }
    let (l, h, bc) = header.ok_or(Error::Parse { line: 1, reason: "missing `# deflection` header".into() })?;
    if rows.len() < 2 {
        return Err(Error::Parse { line: text.lines().count(), reason: "need at least two nodes".into() });
    }
    let n_elem = rows.len() - 1;
    let step = 2.0 * l / n_elem as f64;
    for (i, r) in rows.iter().enumerate() {
        if (r.0 - (-l + i as f64 * step)).abs() > 1e-9 * l.max(1.0) {
            return Err(Error::Parse { line: 0, reason: format!("node {i} at x = {} is off the uniform grid on [-{l}, {l}]", r.0) });
        }
    }
    let mut profile = DeflectionProfile::flat(l, n_elem, bc, gap_floor);
    for (i, r) in rows.iter().enumerate() {
        profile.u_values[i] = r.1;
    }
    if rows[0].2.is_some() {
        for (i, r) in rows.iter().enumerate() {
            profile.du_values[i] = r.2.unwrap_or(0.0);
        }
    } else {
        let u = &profile.u_values;
        let last = n_elem;
        let mut du = vec![0.0; rows.len()];
        for i in 1..last {
            du[i] = (u[i + 1] - u[i - 1]) / (2.0 * step);
        }
        if bc == BcMode::Pinned {
            du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2.min(last)]) / (2.0 * step);
            du[last] = (3.0 * u[last] - 4.0 * u[last - 1] + u[last.saturating_sub(2)]) / (2.0 * step);
        }
        profile.du_values = du;
    }
    profile.validate()?;
    Ok(DeflectionFile { profile, half_width: l, gap: h })
}

pub fn write_potential_grid(phi: &PotentialField, comments: &[String]) -> String {
    let m = &phi.mesh;
    let mut out = String::with_capacity(24 * m.n_nodes() + 256);
    header_lines(&mut out, comments);
    let _ = writeln!(out, "nx {}", m.nx);
    let _ = writeln!(out, "nz {}", m.nz());
    let _ = writeln!(out, "x {:.17e} {:.17e}", -m.half_width, m.half_width);
    let _ = writeln!(out, "z {:.17e} {:.17e}", -m.gap, m.thickness);
    let _ = writeln!(out, "interface_row {}", m.nz1);
    for j in 0..=m.nz() {
        let row: Vec<String> = (0..=m.nx).map(|i| format!("{:.17e}", phi.values[m.node(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Potential grid read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub nx: usize,
    pub nz: usize,
    pub x_extent: (f64, f64),
    pub z_extent: (f64, f64),
    pub interface_row: usize,
    /// Row-major, `(nz + 1) x (nx + 1)`.
    pub values: Vec<f64>,
}

pub fn read_potential_grid(text: &str) -> Result<PotentialGrid> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let mut field = |key: &str| -> Result<(usize, Vec<String>)> {
        let (k, l) = lines.next().ok_or(Error::Parse { line: 0, reason: format!("missing `{key}`") })?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some(key) {
            return Err(Error::Parse { line: k + 1, reason: format!("expected `{key}`") });
        }
        Ok((k + 1, toks.map(str::to_string).collect()))
    };
    let usize_of = |(line, t): (usize, Vec<String>)| -> Result<usize> {
        t.first().and_then(|v| v.parse().ok()).ok_or(Error::Parse { line, reason: "expected an integer".into() })
    };
    let pair_of = |(line, t): (usize, Vec<String>)| -> Result<(f64, f64)> {
        if t.len() != 2 {
            return Err(Error::Parse { line, reason: "expected two numbers".into() });
        }
        Ok((parse_f64(&t[0], line)?, parse_f64(&t[1], line)?))
    };
    let nx = usize_of(field("nx")?)?;
    let nz = usize_of(field("nz")?)?;
    let x_extent = pair_of(field("x")?)?;
    let z_extent = pair_of(field("z")?)?;
    let interface_row = usize_of(field("interface_row")?)?;
    let mut values = Vec::with_capacity((nx + 1) * (nz + 1));
    let mut rows = 0;
    for (k, l) in lines {
        let row = l.split_whitespace().map(|t| parse_f64(t, k + 1)).collect::<Result<Vec<_>>>()?;
        if row.len() != nx + 1 {
            return Err(Error::Parse { line: k + 1, reason: format!("expected {} values, found {}", nx + 1, row.len()) });
        }
        values.extend(row);
        rows += 1;
    }
    if rows != nz + 1 {
        return Err(Error::Parse { line: 0, reason: format!("expected {} rows, found {rows}", nz + 1) });
    }
    Ok(PotentialGrid { nx, nz, x_extent, z_extent, interface_row, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::Shape;

    #[test]
    fn deflection_round_trip() {
        let u = Shape::Odd.profile(-0.1, 1.0, 8, -0.999);
        let text = write_deflection(&u, 1.0, &["config_hash=abc".into()]);
        let back = read_deflection(&text, -0.999).unwrap();
        assert_eq!(back.profile.u_values, u.u_values);
        assert_eq!(back.profile.du_values, u.du_values);
        assert_eq!((back.half_width, back.gap), (1.0, 1.0));
    }

    #[test]
    fn two_column_input_recovers_slopes() {
        let f = |x: f64| 0.1 * (1.0 - x * x).powi(2);
        let mut text = String::from("# deflection L=1 H=1\n");
        for i in 0..=32 {
            let x = -1.0 + i as f64 / 16.0;
            text += &format!("{x} {}\n", f(x));
        }
        let u = read_deflection(&text, -0.999).unwrap().profile;
        let (v, dv, _) = u.eval(0.5);
        assert!((v - f(0.5)).abs() < 1e-3);
        assert!((dv + 0.4 * 0.5 * 0.75).abs() < 1e-2);
    }

    #[test]
    fn malformed_deflections_are_rejected() {
        assert!(matches!(read_deflection("1 2\n", -1.0), Err(Error::Parse { line: 1, .. })));
        assert!(read_deflection("# deflection L=1\n", -1.0).is_err());
        assert!(matches!(read_deflection("# deflection L=1 H=1\n-1 0\n0 x\n1 0\n", -1.0), Err(Error::Parse { line: 3, .. })));
        assert!(read_deflection("# deflection L=1 H=1\n-1 0\n0.3 0\n1 0\n", -1.0).is_err());
        // clamped profile with a nonzero end value
        assert!(read_deflection("# deflection L=1 H=1\n-1 0.1 0\n0 0 0\n1 0 0\n", -1.0).is_err());
    }
}
