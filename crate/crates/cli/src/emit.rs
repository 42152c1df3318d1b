//! Report output: the CSV column contract and a fixed-width table.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use einforge_core::verify::{CheckReport, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Plain,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "plain" => Ok(Format::Plain),
            other => Err(format!("unknown format '{other}' (expected csv or plain)")),
        }
    }
}

/// Header row plus one record per report. Nothing else goes in the file, so
/// two runs with the same seed produce the same bytes.
pub fn write_csv(reports: &[CheckReport], out: impl Write) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()
}

/// Same fields as the CSV, padded into columns, followed by any notes.
pub fn write_plain(reports: &[CheckReport], mut out: impl Write) -> io::Result<()> {
    let rows: Vec<[String; 7]> = reports.iter().map(CheckReport::csv_record).collect();
    let mut widths = CSV_HEADER.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line =
        |cells: &[String]| cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string();
    writeln!(out, "{}", line(&CSV_HEADER.map(String::from)))?;
    writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "))?;
    for row in &rows {
        writeln!(out, "{}", line(row))?;
    }
    for r in reports.iter().filter(|r| !r.notes.is_empty()) {
        writeln!(out)?;
        writeln!(out, "{} ({}):", r.check_name, r.scenario)?;
        for n in &r.notes {
            writeln!(out, "  {n}")?;
        }
    }
    Ok(())
}

pub fn write_reports(reports: &[CheckReport], format: Format, out: impl Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(reports, out),
        Format::Plain => write_plain(reports, out),
    }
}

/// Writes to `path`, replacing any existing file.
pub fn emit_report(reports: &[CheckReport], format: Format, path: &Path) -> io::Result<()> {
    let mut f = io::BufWriter::new(File::create(path)?);
    write_reports(reports, format, &mut f)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use einforge_core::verify::ToleranceTier;

    fn csv_of(reports: &[CheckReport]) -> String {
        let mut buf = Vec::new();
        write_csv(reports, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_list_is_header_only() {
        assert_eq!(csv_of(&[]), "check_name,scenario,samples,tolerance,max_abs_residual,mean_abs_residual,pass\n");
    }

    #[test]
    fn one_passing_report_is_two_lines() {
        let r = CheckReport::from_residuals("einstein", &[0.0], 1e-7, ToleranceTier::Analytic).with_scenario("demo");
        let text = csv_of(&[r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "einstein,demo,1,1e-7,0e0,0e0,true");
    }

    #[test]
    fn plain_table_aligns_columns() {
        let a = CheckReport::from_residuals("a", &[0.5], 1e-7, ToleranceTier::Analytic).note("why");
        let b = CheckReport::from_residuals("long-name", &[0.0], 1e-7, ToleranceTier::Analytic);
        let mut buf = Vec::new();
        write_plain(&[a, b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let col = lines[0].find("scenario").unwrap();
        assert_eq!(&lines[2][..col], format!("{:<col$}", "a"));
        assert!(text.contains("  why"));
    }

    #[test]
    fn emit_writes_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&[], Format::Csv, &path).unwrap();
        assert!(std::fs::read_to_string(path).unwrap().starts_with("check_name,"));
        assert!(emit_report(&[], Format::Csv, &dir.path().join("missing/r.csv")).is_err());
    }
}
