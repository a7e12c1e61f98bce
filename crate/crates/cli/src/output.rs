//! CSV and JSON writers. CSV floats carry 17 significant digits; JSON uses the shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header row and then one row per entry of `rows`.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|&x| fmt(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(std::io::Error::other)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Columns of `trajectory.csv`.
pub const TRAJECTORY_HEADER: [&str; 6] = [
    "t",
    "re_zeta",
    "im_zeta",
    "abs_zeta",
    "re_lambda",
    "im_lambda",
];

pub fn trajectory_rows<'a>(
    times: impl Iterator<Item = f64> + 'a,
    zeta: &'a [Complex64],
    lambda: &'a [Complex64],
) -> impl Iterator<Item = Vec<f64>> + 'a {
    times
        .zip(zeta.iter().zip(lambda))
        .map(|(t, (z, l))| vec![t, z.re, z.im, z.norm(), l.re, l.im])
}

/// Reads `t` and `ζ` back from a `trajectory.csv`.
pub fn read_trajectory(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != TRAJECTORY_HEADER {
        return Err(CliError::Config(format!(
            "{}: expected columns {:?}",
            path.display(),
            TRAJECTORY_HEADER
        )));
    }
    let mut t = Vec::new();
    let mut z = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].parse::<f64>().map_err(|e| {
                CliError::Config(format!(
                    "{} row {}: column {}: {e}",
                    path.display(),
                    line + 2,
                    TRAJECTORY_HEADER[i]
                ))
            })
        };
        t.push(num(0)?);
        z.push(Complex64::new(num(1)?, num(2)?));
    }
    Ok((t, z))
}

/// `field_<t>.csv` file name.
pub fn field_file_name(t: f64) -> String {
    format!("field_{t}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fmt(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trajectory.csv");
        let z = vec![Complex64::new(0.7, -0.1), Complex64::new(1e-300, 3.0)];
        let l = vec![Complex64::new(0.0, 0.0); 2];
        write_csv(
            &p,
            &TRAJECTORY_HEADER,
            trajectory_rows([0.0, 0.5].into_iter(), &z, &l),
        )
        .unwrap();
        let (t, back) = read_trajectory(&p).unwrap();
        assert_eq!(t, vec![0.0, 0.5]);
        assert_eq!(back, z);
    }

    #[test]
    fn wrong_columns_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trajectory.csv");
        std::fs::write(&p, "t,re_zeta\n0,0\n").unwrap();
        let e = read_trajectory(&p).unwrap_err();
        assert!(e.to_string().contains("re_lambda"));
    }
}
