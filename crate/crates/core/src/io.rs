//! Adjacency file format: the first line is `m n`, followed by m lines of
//! n characters from {0,1}. Latent positions may follow as two
//! whitespace-separated float lines (rows first, then columns).

use std::io::{BufRead, Write};

use crate::binmat::BinMat;
use crate::error::{Error, Result};
use crate::kernels::LatentSample;

pub fn write_adjacency(
    mut w: impl Write,
    a: &BinMat,
    latents: Option<&LatentSample>,
) -> Result<()> {
    writeln!(w, "{} {}", a.m(), a.n())?;
    let mut line = String::with_capacity(a.n());
    for i in 0..a.m() {
        line.clear();
        for j in 0..a.n() {
            line.push(if a.get(i, j) { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    if let Some(l) = latents {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ");
        writeln!(w, "{}", fmt(&l.xi))?;
        writeln!(w, "{}", fmt(&l.zeta))?;
    }
    Ok(())
}

pub fn read_adjacency(r: impl BufRead) -> Result<(BinMat, Option<(Vec<f64>, Vec<f64>)>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty adjacency file".into()))??;
    let mut dims = header.split_whitespace();
    let m: usize = dims
        .next()
        .ok_or_else(|| Error::Parse("missing m in header".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad m: {e}")))?;
    let n: usize = dims
        .next()
        .ok_or_else(|| Error::Parse("missing n in header".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
    if dims.next().is_some() {
        return Err(Error::Parse("header must be exactly 'm n'".into()));
    }
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {m} adjacency rows, got {i}")))??;
        let line = line.trim_end();
        if line.len() != n {
            return Err(Error::Parse(format!(
                "row {} has {} characters, expected {n}",
                i + 1,
                line.len()
            )));
        }
        let mut row = Vec::with_capacity(n);
        for (j, c) in line.chars().enumerate() {
            match c {
                '0' => row.push(0u8),
                '1' => row.push(1u8),
                other => {
                    return Err(Error::Parse(format!(
                        "row {} column {} has '{other}', expected 0 or 1",
                        i + 1,
                        j + 1
                    )))
                }
            }
        }
        rows.push(row);
    }
    let a = BinMat::from_rows(&rows)?;

    let mut float_lines = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        float_lines.push(line);
    }
    let latents = match float_lines.len() {
        0 => None,
        2 => {
            let parse = |s: &str, expect: usize, what: &str| -> Result<Vec<f64>> {
                let v = s
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad float: {e}"))))
                    .collect::<Result<Vec<f64>>>()?;
                if v.len() != expect {
                    return Err(Error::Parse(format!(
                        "{what} latent line has {} values, expected {expect}",
                        v.len()
                    )));
                }
                Ok(v)
            };
            Some((parse(&float_lines[0], m, "row")?, parse(&float_lines[1], n, "column")?))
        }
        k => {
            return Err(Error::Parse(format!(
                "expected 0 or 2 latent lines after the adjacency rows, got {k}"
            )))
        }
    };
    Ok((a, latents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{sample_bipartite, Kernel};

    #[test]
    fn round_trip_with_latents() {
        let k = Kernel::sigmoid(3.0, 0.5).unwrap();
        let s = sample_bipartite(&k, 6, 9, 42, false).unwrap();
        let mut buf = Vec::new();
        write_adjacency(&mut buf, &s.a, Some(&s.latents)).unwrap();
        let (a, latents) = read_adjacency(buf.as_slice()).unwrap();
        assert_eq!(a, s.a);
        let (xi, zeta) = latents.unwrap();
        assert_eq!(xi, s.latents.xi);
        assert_eq!(zeta, s.latents.zeta);
    }

    #[test]
    fn round_trip_without_latents() {
        let a = BinMat::from_rows(&[vec![1, 0, 1], vec![0, 0, 1]]).unwrap();
        let mut buf = Vec::new();
        write_adjacency(&mut buf, &a, None).unwrap();
        let (back, latents) = read_adjacency(buf.as_slice()).unwrap();
        assert_eq!(back, a);
        assert!(latents.is_none());
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(read_adjacency("2 2\n10\n1".as_bytes()).is_err());
        assert!(read_adjacency("2 2\n10\n1x\n".as_bytes()).is_err());
        assert!(read_adjacency("2\n10\n11\n".as_bytes()).is_err());
    }
}
