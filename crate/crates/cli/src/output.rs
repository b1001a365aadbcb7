//! CSV and metadata writers. Floats are written with 17 significant digits
//! so that every value round-trips.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{RunConfig, RunMetadata};
use crate::CliError;

/// A CSV cell.
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format_float(*x),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV bytes for `header` and `rows`.
pub fn csv_bytes(header: &[&str], rows: &[Vec<Cell>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `bytes` to `path` and the metadata sidecar next to it.
pub fn write_output(
    path: &Path,
    bytes: &[u8],
    config: &RunConfig,
    wall_time: f64,
) -> Result<(), CliError> {
    fs::write(path, bytes)?;
    let meta = RunMetadata::new(config.clone(), wall_time);
    let mut f = fs::File::create(meta_path(path))?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Header and rows of a CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let bytes = csv_bytes(&["a", "b"], &[vec![Cell::F(0.5), Cell::U(3)]]).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "a,b\n5.0000000000000000e-1,3\n"
        );
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            meta_path(Path::new("out/curve.csv")),
            PathBuf::from("out/curve.csv.meta.json")
        );
    }
}
