//! Textual operator snapshots.
//!
//! ```text
//! # rigid-psido snapshot
//! cutoff 16
//! time 5.0000000000000000e-1
//! symbolic 1
//! 0 1.0000000000000000e0 0.0000000000000000e0
//! kernel 2
//! -1 3 2.5000000000000000e-2 0.0000000000000000e0
//! 3 -1 2.5000000000000000e-2 0.0000000000000000e0
//! ```
//!
//! `symbolic` lists `power re im` for the coefficients of `(Δ+π)^power`;
//! `kernel` lists the nonzero entries as `row_mode col_mode re im`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rigid_psido::{FourierOperator, ModeBasis, RegularizedOperator, SpectralPolynomial};

use crate::LabError;

pub fn write_snapshot(x: &RegularizedOperator, time: f64) -> String {
    let mut out = String::from("# rigid-psido snapshot\n");
    let basis = x.basis();
    let _ = writeln!(out, "cutoff {}", basis.cutoff());
    let _ = writeln!(out, "time {time:.16e}");
    let sym: Vec<_> = x.symbolic().iter().collect();
    let _ = writeln!(out, "symbolic {}", sym.len());
    for (m, c) in sym {
        let _ = writeln!(out, "{m} {:.16e} {:.16e}", c.re, c.im);
    }
    let k = x.kernel();
    let mut lines = Vec::new();
    for row in basis.modes() {
        for col in basis.modes() {
            let v = k.entry(row, col);
            if v != C64::new(0.0, 0.0) {
                lines.push(format!("{row} {col} {:.16e} {:.16e}", v.re, v.im));
            }
        }
    }
    let _ = writeln!(out, "kernel {}", lines.len());
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Parses a snapshot into `(operator, time)`.
pub fn read_snapshot(text: &str) -> Result<(RegularizedOperator, f64), LabError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: &str| LabError::Snapshot(format!("line {line}: {msg}"));
    fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<(usize, String), LabError> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| LabError::Snapshot(format!("missing `{name}`")))?;
        let rest = l
            .strip_prefix(name)
            .ok_or_else(|| LabError::Snapshot(format!("line {n}: expected `{name}`")))?;
        Ok((n, rest.trim().to_string()))
    }
    let (n, cutoff) = header(&mut lines, "cutoff")?;
    let cutoff: usize = cutoff.parse().map_err(|_| err(n, "bad cutoff"))?;
    let basis = ModeBasis::new(cutoff).map_err(|e| err(n, &e.to_string()))?;
    let (n, time) = header(&mut lines, "time")?;
    let time: f64 = time.parse().map_err(|_| err(n, "bad time"))?;
    let num = |s: Option<&str>, n: usize| -> Result<f64, LabError> {
        s.and_then(|t| t.parse().ok()).ok_or_else(|| err(n, "bad number"))
    };
    let int = |s: Option<&str>, n: usize| -> Result<i64, LabError> {
        s.and_then(|t| t.parse().ok()).ok_or_else(|| err(n, "bad integer"))
    };

    let (n, count) = header(&mut lines, "symbolic")?;
    let count: usize = count.parse().map_err(|_| err(n, "bad count"))?;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = lines.next().ok_or_else(|| err(n, "truncated symbolic block"))?;
        let mut f = l.split_whitespace();
        let m = int(f.next(), n)?;
        let c = C64::new(num(f.next(), n)?, num(f.next(), n)?);
        pairs.push((i32::try_from(m).map_err(|_| err(n, "power out of range"))?, c));
    }
    let (n, count) = header(&mut lines, "kernel")?;
    let count: usize = count.parse().map_err(|_| err(n, "bad count"))?;
    let mut kernel = FourierOperator::zeros(basis).into_entries();
    for _ in 0..count {
        let (n, l) = lines.next().ok_or_else(|| err(n, "truncated kernel block"))?;
        let mut f = l.split_whitespace();
        let (row, col) = (int(f.next(), n)?, int(f.next(), n)?);
        let c = C64::new(num(f.next(), n)?, num(f.next(), n)?);
        let (Some(i), Some(j)) = (basis.index(row), basis.index(col)) else {
            return Err(err(n, "mode outside the window"));
        };
        kernel[[i, j]] = c;
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing content"));
    }
    let kernel = FourierOperator::from_entries(basis, kernel)?;
    Ok((RegularizedOperator::new(SpectralPolynomial::from_pairs(pairs), kernel), time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let b = ModeBasis::new(8).unwrap();
        let k = FourierOperator::from_fn(b, |j, k| C64::new(0.1 / (1.0 + (j * j + k * k) as f64), 0.01 * (j - k) as f64));
        let x = RegularizedOperator::new(SpectralPolynomial::from_pairs([(0, C64::new(1.0, 0.0)), (-1, C64::new(0.0, 0.5))]), k);
        let (y, t) = read_snapshot(&write_snapshot(&x, 0.25)).unwrap();
        assert_eq!(t, 0.25);
        assert_eq!(y, x);
    }

    #[test]
    fn rejects_truncated() {
        assert!(read_snapshot("cutoff 8\ntime 0\nsymbolic 1\n").is_err());
    }
}
