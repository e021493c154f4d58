//! Matrix dump format.
//!
//! Text form:
//!
//! ```text
//! # qha-matrix v1
//! factors 3 4
//! convention <tag>
//! <re> <im> <re> <im> ...      one line per row
//! ```
//!
//! Binary form: magic `QHAM`, `u32` version, `u32` factor count, that many
//! `u64` factor dims, `u32` tag length and UTF-8 tag, then row-major `f64`
//! pairs. All integers and floats are little-endian.

use std::io::{BufRead, Read, Write};

use nalgebra::DMatrix;

use super::operator::OperatorMatrix;
use super::spec::FockSpec;
use crate::error::{QhaError, Result};
use crate::C64;

const MAGIC: &[u8; 4] = b"QHAM";
const VERSION: u32 = 1;

pub fn write_text<W: Write>(out: &mut W, a: &OperatorMatrix, convention: &str) -> Result<()> {
    writeln!(out, "# qha-matrix v{VERSION}")?;
    let factors: Vec<String> = a.spec.factors().iter().map(|d| d.to_string()).collect();
    writeln!(out, "factors {}", factors.join(" "))?;
    writeln!(out, "convention {convention}")?;
    for row in a.entries.row_iter() {
        let cells: Vec<String> = row.iter().map(|c| format!("{:e} {:e}", c.re, c.im)).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(input: R) -> Result<(OperatorMatrix, String)> {
    let mut lines = input.lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| QhaError::Parse("unexpected end of matrix file".into()))?.map_err(Into::into)
    };
    if next()?.trim() != format!("# qha-matrix v{VERSION}") {
        return Err(QhaError::Parse("missing qha-matrix header".into()));
    }
    let factors: Vec<usize> = next()?
        .strip_prefix("factors ")
        .ok_or_else(|| QhaError::Parse("missing factors line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| QhaError::Parse(format!("factor {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    let convention = next()?
        .strip_prefix("convention ")
        .ok_or_else(|| QhaError::Parse("missing convention line".into()))?
        .to_string();
    let spec = FockSpec::product(&factors)?;
    let d = spec.dim();
    let mut entries = DMatrix::zeros(d, d);
    for l in 0..d {
        let line = next()?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| QhaError::Parse(format!("row {l}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * d {
            return Err(QhaError::Parse(format!("row {l} has {} numbers, expected {}", vals.len(), 2 * d)));
        }
        for m in 0..d {
            entries[(l, m)] = C64::new(vals[2 * m], vals[2 * m + 1]);
        }
    }
    Ok((OperatorMatrix::new(spec, entries)?, convention))
}

pub fn write_binary<W: Write>(out: &mut W, a: &OperatorMatrix, convention: &str) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(a.spec.n() as u32).to_le_bytes())?;
    for &d in a.spec.factors() {
        out.write_all(&(d as u64).to_le_bytes())?;
    }
    out.write_all(&(convention.len() as u32).to_le_bytes())?;
    out.write_all(convention.as_bytes())?;
    for row in a.entries.row_iter() {
        for c in row.iter() {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<(OperatorMatrix, String)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(QhaError::Parse("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(QhaError::Parse(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut input)? as usize;
    let mut factors = Vec::with_capacity(n);
    for _ in 0..n {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        factors.push(u64::from_le_bytes(b) as usize);
    }
    let tag_len = read_u32(&mut input)? as usize;
    let mut tag = vec![0u8; tag_len];
    input.read_exact(&mut tag)?;
    let convention = String::from_utf8(tag).map_err(|e| QhaError::Parse(e.to_string()))?;
    let spec = FockSpec::product(&factors)?;
    let d = spec.dim();
    let mut entries = DMatrix::zeros(d, d);
    for l in 0..d {
        for m in 0..d {
            entries[(l, m)] = C64::new(read_f64(&mut input)?, read_f64(&mut input)?);
        }
    }
    Ok((OperatorMatrix::new(spec, entries)?, convention))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{weyl_operator, PhasePoint};

    fn sample() -> OperatorMatrix {
        let spec = FockSpec::product(&[3, 2]).unwrap();
        weyl_operator(&PhasePoint::new(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]), &spec)
    }

    #[test]
    fn text_round_trip() {
        let a = sample();
        let mut buf = Vec::new();
        write_text(&mut buf, &a, "weyl-half-phase").unwrap();
        let (b, tag) = read_text(buf.as_slice()).unwrap();
        assert_eq!(tag, "weyl-half-phase");
        assert_eq!(a, b);
    }

    #[test]
    fn binary_round_trip() {
        let a = sample();
        let mut buf = Vec::new();
        write_binary(&mut buf, &a, "x").unwrap();
        let (b, tag) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(tag, "x");
        assert_eq!(a, b);
        assert!(read_binary(&buf[..10]).is_err());
    }
}
