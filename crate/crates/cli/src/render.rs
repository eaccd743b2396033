use std::io::{self, Write};

use dyadint_core::bridge::EquivalenceReport;
use dyadint_core::integrator::{DyadicSumReport, Row, Verdict};
use serde_json::Value;

use crate::args::Output;

/// A finished command: its exit status and three renderings.
pub struct Report {
    pub exit: u8,
    pub json: Value,
    /// Header row first.
    pub table: Vec<Vec<String>>,
    pub summary: Vec<String>,
}

const ROW_HEADER: [&str; 7] = ["k", "level", "L", "U", "pad", "cubes", "gap"];

pub fn rows_table(series: Option<&str>, rows: &[Row]) -> Vec<Vec<String>> {
    let mut header: Vec<String> = ROW_HEADER.iter().map(|s| s.to_string()).collect();
    if series.is_some() {
        header.insert(0, "series".into());
    }
    let mut out = vec![header];
    for r in rows {
        let mut line = vec![
            r.k.to_string(),
            r.level.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
            r.pad.to_string(),
            r.cubes.to_string(),
            r.gap().to_string(),
        ];
        if let Some(s) = series {
            line.insert(0, s.to_string());
        }
        out.push(line);
    }
    out
}

pub fn equivalence_table(r: &EquivalenceReport) -> Vec<Vec<String>> {
    let mut out = vec![["family", "label", "k", "L", "U", "pad", "cells"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for (family, rows) in [("semiclosed", &r.semiclosed), ("closed", &r.closed)] {
        for row in rows {
            out.push(vec![
                family.into(),
                format!("level {}", row.k),
                row.k.to_string(),
                row.lower.to_string(),
                row.upper.to_string(),
                row.pad.to_string(),
                String::new(),
            ]);
        }
    }
    for (i, row) in r.classical.iter().enumerate() {
        out.push(vec![
            "classical".into(),
            row.label.clone(),
            i.to_string(),
            row.sums.lower.to_string(),
            row.sums.upper.to_string(),
            "0".into(),
            row.sums.cells.to_string(),
        ]);
    }
    out
}

pub fn verdict_line(r: &DyadicSumReport) -> String {
    let (status, e) = match &r.verdict {
        Verdict::Integrable { .. } => ("integrable", r.verdict.enclosure()),
        Verdict::Undecided { .. } => ("undecided", r.verdict.enclosure()),
        Verdict::NotConverging { .. } => ("not converging", r.verdict.enclosure()),
    };
    format!("{status}, enclosure [{}, {}], gap {}", e.lo, e.hi, e.width())
}

pub fn verdict_summary(r: &DyadicSumReport) -> Vec<String> {
    vec![verdict_line(r)]
}

pub fn write(out: &mut impl Write, format: Output, report: &Report) -> io::Result<()> {
    match format {
        Output::Json => {
            serde_json::to_writer_pretty(&mut *out, &report.json)?;
            writeln!(out)
        }
        Output::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for line in &report.table {
                w.write_record(line)?;
            }
            w.flush()
        }
        Output::Table => {
            let cols = report.table.first().map_or(0, Vec::len);
            let widths: Vec<usize> =
                (0..cols).map(|c| report.table.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
            for line in &report.table {
                let cells: Vec<String> = line.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
                writeln!(out, "{}", cells.join("  ").trim_end())?;
            }
            writeln!(out)?;
            for s in &report.summary {
                writeln!(out, "{s}")?;
            }
            Ok(())
        }
    }
}
