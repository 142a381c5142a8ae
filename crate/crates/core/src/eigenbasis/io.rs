//! Text formats for bases and spectra.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use super::pca::EigenBasis;
use crate::error::{Error, Result};
use crate::shapes::MappingSpec;

/// Header line, then `mean`, `eigenvalues` and one `v<j>` line per column of V.
pub fn write_basis<W: Write>(mut out: W, basis: &EigenBasis, mapping: &MappingSpec) -> Result<()> {
    writeln!(
        out,
        "# D={};d_prime={};retained={};mapping={}",
        basis.dim(),
        basis.d_prime,
        basis.retained(),
        serde_json::to_string(mapping).map_err(|e| Error::Parse(e.to_string()))?
    )?;
    let line = |name: &str, vals: &mut dyn Iterator<Item = f64>| {
        let mut s = name.to_string();
        for v in vals {
            s.push(',');
            s.push_str(&format!("{v:e}"));
        }
        s
    };
    writeln!(out, "{}", line("mean", &mut basis.mean.iter().copied()))?;
    writeln!(out, "{}", line("eigenvalues", &mut basis.eigenvalues.iter().copied()))?;
    for j in 0..basis.retained() {
        writeln!(
            out,
            "{}",
            line(&format!("v{}", j + 1), &mut basis.vectors.column(j).iter().copied())
        )?;
    }
    Ok(())
}

pub fn read_basis<R: Read>(input: R) -> Result<(EigenBasis, MappingSpec)> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty basis file".into()))??;
    let meta = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("missing basis header".into()))?;
    let (head, mapping) = meta
        .split_once(";mapping=")
        .ok_or_else(|| Error::Parse("basis header lacks a mapping".into()))?;
    let mapping: MappingSpec = serde_json::from_str(mapping).map_err(|e| Error::Parse(e.to_string()))?;
    let mut fields = [0usize; 3];
    for (slot, kv) in fields.iter_mut().zip(head.split(';')) {
        let (_, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field '{kv}'")))?;
        *slot = v.parse().map_err(|_| Error::Parse(format!("bad header field '{kv}'")))?;
    }
    let [d, d_prime, retained] = fields;
    let mut row = |name: &str| -> Result<Vec<f64>> {
        let l = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing '{name}' line")))??;
        let mut parts = l.split(',');
        if parts.next() != Some(name) {
            return Err(Error::Parse(format!("expected '{name}' line")));
        }
        parts
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
            .collect()
    };
    let mean = row("mean")?;
    let eigenvalues = row("eigenvalues")?;
    let mut vectors = DMatrix::zeros(d, retained);
    for j in 0..retained {
        let col = row(&format!("v{}", j + 1))?;
        if col.len() != d {
            return Err(Error::Parse(format!("eigenvector {} has wrong length", j + 1)));
        }
        vectors.set_column(j, &nalgebra::DVector::from_vec(col));
    }
    if mean.len() != d {
        return Err(Error::Parse("mean has wrong length".into()));
    }
    Ok((
        EigenBasis {
            mean,
            vectors,
            eigenvalues,
            d_prime,
        },
        mapping,
    ))
}

/// `j,eigenvalue,cumulative_pct`, one row per eigenvalue.
pub fn write_spectrum<W: Write>(out: W, eigenvalues: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "eigenvalue", "cumulative_pct"])?;
    let total: f64 = eigenvalues.iter().sum();
    let mut acc = 0.0;
    for (j, l) in eigenvalues.iter().enumerate() {
        acc += l;
        let pct = if total > 0.0 { 100.0 * acc / total } else { 100.0 };
        w.write_record([(j + 1).to_string(), format!("{l:e}"), format!("{pct:.6}")])?;
    }
    w.flush()?;
    Ok(())
}
