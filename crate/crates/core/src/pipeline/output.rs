//! Versioned CSV reports.

use std::fmt::Display;
use std::io::{self, Write};

use crate::nhpp::EventStream;
use crate::nonrecursive::EquivalenceRow;
use crate::recursive::TrajectoryRow;

use super::FORMAT_HEADER;

/// CSV writer that leads with the format header and a column row.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, columns: &[&str]) -> io::Result<Self> {
        writeln!(out, "{FORMAT_HEADER}")?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { out, columns: columns.len() })
    }

    pub fn row(&mut self, fields: &[&dyn Display]) -> io::Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        let line: Vec<String> = fields.iter().map(|f| f.to_string()).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_trajectory<W: Write>(out: W, rows: &[TrajectoryRow]) -> io::Result<W> {
    let mut w = CsvWriter::new(out, &["k", "t_k", "mean_alpha", "var_alpha", "mean_beta", "var_beta"])?;
    for r in rows {
        w.row(&[&r.k, &r.t_k, &r.mean_alpha, &r.var_alpha, &r.mean_beta, &r.var_beta])?;
    }
    w.finish()
}

/// `(k, log ratio)` rows from a model comparison series.
pub fn write_comparison<W: Write>(out: W, rows: &[(u64, f64)]) -> io::Result<W> {
    let mut w = CsvWriter::new(out, &["k", "log_ratio"])?;
    for (k, r) in rows {
        w.row(&[k, r])?;
    }
    w.finish()
}

pub fn write_equivalence<W: Write>(out: W, rows: &[EquivalenceRow]) -> io::Result<W> {
    let mut w = CsvWriter::new(
        out,
        &[
            "k",
            "rec_mean_alpha",
            "nonrec_mean_alpha",
            "rec_mean_beta",
            "nonrec_mean_beta",
            "gap_alpha",
            "gap_beta",
        ],
    )?;
    for r in rows {
        w.row(&[
            &r.k,
            &r.rec_mean_alpha,
            &r.nonrec_mean_alpha,
            &r.rec_mean_beta,
            &r.nonrec_mean_beta,
            &r.gap_alpha,
            &r.gap_beta,
        ])?;
    }
    w.finish()
}

/// Count `N(x)` and `N(x)/(x/log x)` at every grid point of every stream,
/// one block of rows per replication.
pub fn write_simulation<W: Write>(out: W, streams: &[EventStream], grid: &[f64]) -> io::Result<W> {
    let mut w = CsvWriter::new(out, &["rep", "x", "count", "ratio"])?;
    for (i, s) in streams.iter().enumerate() {
        for &x in grid {
            let n = s.count_up_to(x);
            let ratio = n as f64 / (x / x.ln());
            w.row(&[&i, &x, &n, &ratio])?;
        }
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let buf = write_comparison(Vec::new(), &[(10, 0.5), (100, -1.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{FORMAT_HEADER}\nk,log_ratio\n10,0.5\n100,-1.25\n"));
    }
}
