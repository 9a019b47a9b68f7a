//! File formats.
//!
//! * Green matrices and variance profiles: CSV `x1,y1,x2,y2,g`, interior
//!   pairs in row-major order, 12 significant digits.
//! * Fields: CSV `x,y,value`, or binary: `N` as `u32` little-endian followed
//!   by `(N + 1)²` little-endian `f64` in row-major site order.
//! * Decomposition levels: CSV `x,y,value,level`.
//! * Extremes statistics: a schema line, then CSV
//!   `n,N,samples,mean_max,se_mean,var_max,dh_gap,dh_se,q10,q25,q50,q75,q90`.
//! * BRW summaries: CSV `generation,mean,median,q10,q90,dh_gap`; CDF dumps
//!   `x,F(x)`.

use std::io::{BufRead, Read, Write};

use crate::brw::{CdfGrid, GenerationSummary};
use crate::error::{Error, Result};
use crate::extremes::{MaxStats, Quantiles};
use crate::green::{GreenOperator, VarianceProfile};
use crate::hierarchy::Decomposition;
use crate::lattice::BoxSpec;
use crate::sampler::Field;

pub const GREEN_HEADER: &str = "x1,y1,x2,y2,g";
pub const FIELD_HEADER: &str = "x,y,value";
pub const LEVEL_HEADER: &str = "x,y,value,level";
pub const STATS_SCHEMA: &str = "# gffmax extremes schema v1";
pub const STATS_HEADER: &str = "n,N,samples,mean_max,se_mean,var_max,dh_gap,dh_se,q10,q25,q50,q75,q90";
pub const BRW_HEADER: &str = "generation,mean,median,q10,q90,dh_gap";
pub const CDF_HEADER: &str = "x,F(x)";

/// 12 significant digits in scientific notation.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_green_csv<W: Write>(mut w: W, g: &GreenOperator) -> Result<()> {
    let b = g.box_spec();
    let dense = g.to_dense();
    writeln!(w, "{GREEN_HEADER}")?;
    for (i, a) in b.interior_sites().enumerate() {
        for (j, c) in b.interior_sites().enumerate() {
            writeln!(w, "{},{},{},{},{}", a.x, a.y, c.x, c.y, sig12(dense[(i, j)]))?;
        }
    }
    Ok(())
}

pub fn write_variance_csv<W: Write>(mut w: W, profile: &VarianceProfile) -> Result<()> {
    writeln!(w, "{GREEN_HEADER}")?;
    for (s, v) in profile.iter() {
        writeln!(w, "{},{},{},{},{}", s.x, s.y, s.x, s.y, sig12(v))?;
    }
    Ok(())
}

/// Parse a Green/variance CSV into `(x1, y1, x2, y2, g)` rows.
pub fn read_green_csv<R: BufRead>(r: R) -> Result<Vec<([usize; 4], f64)>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == GREEN_HEADER => {}
        other => return Err(Error::Format(format!("expected header {GREEN_HEADER}, got {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Format(format!("bad green row {line:?}")));
        }
        let mut idx = [0usize; 4];
        for (slot, p) in idx.iter_mut().zip(&parts[..4]) {
            *slot = p.parse().map_err(|_| Error::Format(format!("bad index in {line:?}")))?;
        }
        let g = parts[4]
            .parse()
            .map_err(|_| Error::Format(format!("bad value in {line:?}")))?;
        rows.push((idx, g));
    }
    Ok(rows)
}

pub fn write_field_csv<W: Write>(mut w: W, field: &Field) -> Result<()> {
    writeln!(w, "{FIELD_HEADER}")?;
    for (s, v) in field.box_spec().sites().zip(field.values()) {
        writeln!(w, "{},{},{}", s.x, s.y, v)?;
    }
    Ok(())
}

pub fn write_field_binary<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let n = u32::try_from(field.box_spec().side())
        .map_err(|_| Error::InvalidArgument("side does not fit in u32".into()))?;
    w.write_all(&n.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary<R: Read>(mut r: R) -> Result<Field> {
    let mut header = [0u8; 4];
    r.read_exact(&mut header)?;
    let box_spec = BoxSpec::from_side(u32::from_le_bytes(header) as usize)?;
    let mut values = Vec::with_capacity(box_spec.site_count());
    let mut buf = [0u8; 8];
    for _ in 0..box_spec.site_count() {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after field".into()));
    }
    Field::from_values(box_spec, values)
}

pub fn write_decomposition_csv<W: Write>(mut w: W, d: &Decomposition) -> Result<()> {
    writeln!(w, "{LEVEL_HEADER}")?;
    for (k, level) in d.levels.iter().enumerate() {
        for (s, v) in d.box_spec.sites().zip(level.values()) {
            writeln!(w, "{},{},{},{}", s.x, s.y, v, k + 1)?;
        }
    }
    Ok(())
}

pub fn format_stats_row(s: &MaxStats) -> String {
    let q = &s.quantiles;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.n,
        s.side,
        s.samples,
        s.mean_max,
        s.se_mean,
        s.var_max,
        s.dh_gap,
        s.dh_se,
        q.q10,
        q.q25,
        q.q50,
        q.q75,
        q.q90
    )
}

pub fn parse_stats_row(line: &str) -> Result<MaxStats> {
    let parts: Vec<&str> = line.trim().split(',').collect();
    if parts.len() != 13 {
        return Err(Error::Format(format!(
            "expected 13 columns, got {} in {line:?}",
            parts.len()
        )));
    }
    let float = |i: usize| -> Result<f64> {
        parts[i]
            .parse()
            .map_err(|_| Error::Format(format!("column {i} of {line:?} is not a number")))
    };
    let int = |i: usize| -> Result<usize> {
        parts[i]
            .parse()
            .map_err(|_| Error::Format(format!("column {i} of {line:?} is not an integer")))
    };
    Ok(MaxStats {
        n: int(0)? as u32,
        side: int(1)?,
        samples: int(2)?,
        mean_max: float(3)?,
        se_mean: float(4)?,
        var_max: float(5)?,
        dh_gap: float(6)?,
        dh_se: float(7)?,
        quantiles: Quantiles {
            q10: float(8)?,
            q25: float(9)?,
            q50: float(10)?,
            q75: float(11)?,
            q90: float(12)?,
        },
    })
}

/// Read a statistics file written by [`write_stats`] / [`append_stats_row`].
pub fn read_stats<R: BufRead>(r: R) -> Result<Vec<MaxStats>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(l) if l.trim() == STATS_SCHEMA => {}
        other => return Err(Error::Format(format!("missing schema line, got {other:?}"))),
    }
    match lines.next().transpose()? {
        Some(l) if l.trim() == STATS_HEADER => {}
        other => return Err(Error::Format(format!("missing header, got {other:?}"))),
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(parse_stats_row(&line)?);
        }
    }
    Ok(out)
}

pub fn write_stats_preamble<W: Write>(mut w: W) -> Result<()> {
    writeln!(w, "{STATS_SCHEMA}")?;
    writeln!(w, "{STATS_HEADER}")?;
    Ok(())
}

pub fn append_stats_row<W: Write>(mut w: W, s: &MaxStats) -> Result<()> {
    writeln!(w, "{}", format_stats_row(s))?;
    Ok(())
}

pub fn write_stats<W: Write>(mut w: W, stats: &[MaxStats]) -> Result<()> {
    write_stats_preamble(&mut w)?;
    for s in stats {
        append_stats_row(&mut w, s)?;
    }
    Ok(())
}

pub fn write_brw_csv<W: Write>(mut w: W, summaries: &[GenerationSummary]) -> Result<()> {
    writeln!(w, "{BRW_HEADER}")?;
    for s in summaries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.generation, s.mean, s.median, s.q10, s.q90, s.dh_gap
        )?;
    }
    Ok(())
}

pub fn read_brw_csv<R: BufRead>(r: R) -> Result<Vec<GenerationSummary>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == BRW_HEADER => {}
        other => return Err(Error::Format(format!("expected header {BRW_HEADER}, got {other:?}"))),
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Format(format!("bad BRW row {line:?}")));
        }
        let float = |i: usize| -> Result<f64> {
            parts[i]
                .parse()
                .map_err(|_| Error::Format(format!("column {i} of {line:?} is not a number")))
        };
        out.push(GenerationSummary {
            generation: parts[0]
                .parse()
                .map_err(|_| Error::Format(format!("bad generation in {line:?}")))?,
            mean: float(1)?,
            median: float(2)?,
            q10: float(3)?,
            q90: float(4)?,
            dh_gap: float(5)?,
        });
    }
    Ok(out)
}

pub fn write_cdf_csv<W: Write>(mut w: W, grid: &CdfGrid) -> Result<()> {
    writeln!(w, "{CDF_HEADER}")?;
    for (i, v) in grid.values.iter().enumerate() {
        writeln!(w, "{},{}", grid.node(i), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{green_dense, DEFAULT_DENSE_CAP};
    use crate::lattice::Site;
    use crate::rng::SeedSpec;
    use crate::sampler::sample_spectral;
    use proptest::prelude::*;

    #[test]
    fn green_csv_n2() {
        let g = green_dense(BoxSpec::new(1).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        let mut buf = Vec::new();
        write_green_csv(&mut buf, &g).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "x1,y1,x2,y2,g\n1,1,1,1,1.00000000000e0\n"
        );
        let rows = read_green_csv(&buf[..]).unwrap();
        assert_eq!(rows, vec![([1, 1, 1, 1], 1.0)]);
    }

    #[test]
    fn binary_layout() {
        let b = BoxSpec::new(2).unwrap();
        let f = sample_spectral(b, SeedSpec::new(3, 3)).unwrap();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 4 + 25 * 8);
        assert_eq!(&buf[..4], &4u32.to_le_bytes());
        let idx = b.site_index(Site::new(1, 2));
        let v = f64::from_le_bytes(buf[4 + 8 * idx..12 + 8 * idx].try_into().unwrap());
        assert_eq!(v, f.get(Site::new(1, 2)));
        assert_eq!(read_field_binary(&buf[..]).unwrap(), f);
    }

    #[test]
    fn brw_summaries_roundtrip() {
        let spec = crate::brw::BrwSpec::new(4, 1.0, 2).unwrap();
        let run = crate::brw::brw_run(&spec).unwrap();
        let mut buf = Vec::new();
        write_brw_csv(&mut buf, &run.summaries).unwrap();
        assert_eq!(read_brw_csv(&buf[..]).unwrap(), run.summaries);
        assert!(read_brw_csv(&b"generation,mean\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn stats_rows_roundtrip(vals in proptest::collection::vec(-1e3f64..1e3, 10), n in 1u32..12, samples in 100usize..100000) {
            let s = MaxStats {
                n,
                side: 1 << n,
                samples,
                mean_max: vals[0],
                se_mean: vals[1].abs(),
                var_max: vals[2].abs(),
                dh_gap: vals[3].abs(),
                dh_se: vals[4].abs(),
                quantiles: Quantiles { q10: vals[5], q25: vals[6], q50: vals[7], q75: vals[8], q90: vals[9] },
            };
            let mut buf = Vec::new();
            write_stats(&mut buf, std::slice::from_ref(&s)).unwrap();
            prop_assert_eq!(read_stats(&buf[..]).unwrap(), vec![s]);
        }
    }
}
