//! Append-and-skip persistence of per-level extremes statistics.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gffmax_core::io::{append_stats_row, read_stats, write_stats, write_stats_preamble};
use gffmax_core::{Error, MaxStats};

pub fn stats_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("extremes_seed{seed}.csv"))
}

/// Rows of one statistics file, kept in sync with the disk.
#[derive(Debug)]
pub struct StatsStore {
    path: PathBuf,
    rows: Vec<MaxStats>,
}

impl StatsStore {
    pub fn open(path: PathBuf) -> gffmax_core::Result<Self> {
        let rows = if path.exists() {
            read_stats(BufReader::new(File::open(&path)?))?
        } else {
            Vec::new()
        };
        Ok(Self { path, rows })
    }

    pub fn rows(&self) -> &[MaxStats] {
        &self.rows
    }

    /// The persisted row for level `n`, if it was computed with `samples`.
    pub fn lookup(&self, n: u32, samples: usize) -> gffmax_core::Result<Option<&MaxStats>> {
        match self.rows.iter().find(|r| r.n == n) {
            Some(r) if r.samples != samples => Err(Error::ResumeMismatch {
                n,
                found: r.samples,
                expected: samples,
            }),
            found => Ok(found),
        }
    }

    pub fn append(&mut self, stats: MaxStats) -> gffmax_core::Result<()> {
        let fresh = !self.path.exists();
        let mut w = BufWriter::new(OpenOptions::new().create(true).append(true).open(&self.path)?);
        if fresh {
            write_stats_preamble(&mut w)?;
        }
        append_stats_row(&mut w, &stats)?;
        w.flush()?;
        self.rows.push(stats);
        Ok(())
    }

    /// Rewrite the file in level order if appends left it unsorted.
    pub fn finish(&mut self) -> gffmax_core::Result<()> {
        if self.rows.windows(2).all(|w| w[0].n < w[1].n) {
            return Ok(());
        }
        self.rows.sort_by_key(|r| r.n);
        let tmp = self.path.with_extension("csv.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            write_stats(&mut w, &self.rows)?;
            w.flush()?;
        }
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gffmax_core::extremes::Quantiles;

    fn row(n: u32, samples: usize) -> MaxStats {
        let q = Quantiles { q10: -1.0, q25: -0.5, q50: 0.0, q75: 0.5, q90: 1.0 };
        MaxStats {
            n,
            side: 1 << n,
            samples,
            mean_max: n as f64,
            var_max: 1.0,
            se_mean: 0.1,
            dh_gap: 0.5,
            dh_se: 0.01,
            quantiles: q,
        }
    }

    #[test]
    fn resume_skips_and_detects_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = stats_path(dir.path(), 7);
        let mut store = StatsStore::open(path.clone()).unwrap();
        store.append(row(2, 100)).unwrap();
        let reopened = StatsStore::open(path).unwrap();
        assert_eq!(reopened.lookup(2, 100).unwrap(), Some(&row(2, 100)));
        assert_eq!(reopened.lookup(3, 100).unwrap(), None);
        assert!(matches!(reopened.lookup(2, 200), Err(Error::ResumeMismatch { n: 2, found: 100, expected: 200 })));
    }

    #[test]
    fn finish_sorts_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = stats_path(dir.path(), 1);
        let mut store = StatsStore::open(path.clone()).unwrap();
        store.append(row(3, 100)).unwrap();
        store.append(row(1, 100)).unwrap();
        store.finish().unwrap();
        let levels: Vec<u32> = StatsStore::open(path).unwrap().rows().iter().map(|r| r.n).collect();
        assert_eq!(levels, vec![1, 3]);
    }
}
