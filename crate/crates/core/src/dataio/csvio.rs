//! Insole and force-plate CSV files.
//!
//! Insole: header `t,hl,mf,mt,to`, time in seconds, channels in volts (or ohms
//! when declared pre-converted). GRF: header `t,fv,fml`, newtons.

use std::io::{Read, Write};
use std::path::Path;

use super::series::{ChannelSeries, GrfRecording, InsoleRecording, Side, Unit};
use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

pub const INSOLE_HEADER: [&str; 5] = ["t", "hl", "mf", "mt", "to"];
pub const GRF_HEADER: [&str; 3] = ["t", "fv", "fml"];

/// Raw columns of one CSV file, time first.
struct Table {
    t: Vec<f64>,
    cols: Vec<Vec<f64>>,
}

fn read_table<R: Read>(reader: R, expected: &[&str], name: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("{name}: {e}")))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyFile(name.to_string()));
    }
    if header != expected {
        return Err(Error::Schema(format!(
            "{name}: expected header '{}', found '{}'",
            expected.join(","),
            header.join(",")
        )));
    }
    let mut t = Vec::new();
    let mut cols = vec![Vec::new(); expected.len() - 1];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(format!("{name}: {e}")))?;
        if rec.len() != expected.len() {
            return Err(Error::Schema(format!("{name}: row {} has {} fields", line + 2, rec.len())));
        }
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("{name}: row {} column '{}' is not a number", line + 2, expected[i])))
        };
        t.push(parse(0)?);
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse(c + 1)?);
        }
    }
    if t.is_empty() {
        return Err(Error::EmptyFile(name.to_string()));
    }
    if t.len() < 2 {
        return Err(Error::Schema(format!("{name}: need at least two rows")));
    }
    if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Schema(format!("{name}: time column not increasing at row {}", i + 3)));
    }
    Ok(Table { t, cols })
}

/// Resample irregular `(t, v)` pairs onto `t0 + k / rate`.
fn uniformize(t: &[f64], v: &[f64], rate: f64) -> Vec<f64> {
    let t0 = t[0];
    let n = ((t[t.len() - 1] - t0) * rate + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let tk = t0 + k as f64 / rate;
        while j + 1 < t.len() && t[j + 1] <= tk + 1e-12 {
            j += 1;
        }
        if j + 1 >= t.len() || (tk - t[j]).abs() <= 1e-12 {
            out.push(v[j]);
        } else {
            let frac = (tk - t[j]) / (t[j + 1] - t[j]);
            out.push(v[j] + (v[j + 1] - v[j]) * frac);
        }
    }
    out
}

fn rate_of(t: &[f64]) -> f64 {
    let dts: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let rate = 1.0 / median(&dts);
    // snap to a whole number of hertz when the stream is nominally integral
    if (rate - rate.round()).abs() < 1e-6 * rate {
        rate.round()
    } else {
        rate
    }
}

fn to_series<T: Scalar>(table: &Table, col: usize, rate: f64, unit: Unit) -> Result<ChannelSeries<T>> {
    let vals = uniformize(&table.t, &table.cols[col], rate);
    ChannelSeries::new(vals.into_iter().map(T::lit).collect(), rate, unit, table.t[0])
}

pub fn read_insole<T: Scalar, R: Read>(reader: R, unit: Unit, side: Side, name: &str) -> Result<InsoleRecording<T>> {
    if !matches!(unit, Unit::Volts | Unit::Ohms) {
        return Err(Error::Unit(format!("insole columns must be volts or ohms, not {unit:?}")));
    }
    let table = read_table(reader, &INSOLE_HEADER, name)?;
    let rate = rate_of(&table.t);
    InsoleRecording::new(
        [
            to_series(&table, 0, rate, unit)?,
            to_series(&table, 1, rate, unit)?,
            to_series(&table, 2, rate, unit)?,
            to_series(&table, 3, rate, unit)?,
        ],
        side,
    )
}

pub fn read_grf<T: Scalar, R: Read>(reader: R, side: Side, name: &str) -> Result<GrfRecording<T>> {
    let table = read_table(reader, &GRF_HEADER, name)?;
    let rate = rate_of(&table.t);
    GrfRecording::new(
        to_series(&table, 0, rate, Unit::Newtons)?,
        to_series(&table, 1, rate, Unit::Newtons)?,
        side,
    )
}

pub fn read_insole_file<T: Scalar>(path: &Path, unit: Unit, side: Side) -> Result<InsoleRecording<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_insole(f, unit, side, &path.display().to_string())
}

pub fn read_grf_file<T: Scalar>(path: &Path, side: Side) -> Result<GrfRecording<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_grf(f, side, &path.display().to_string())
}

fn write_rows<W: Write>(w: W, header: &[&str], t0: f64, rate: f64, cols: &[&[f64]]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    let n = cols.first().map_or(0, |c| c.len());
    let mut row = Vec::with_capacity(header.len());
    for i in 0..n {
        row.clear();
        row.push(format!("{}", t0 + i as f64 / rate));
        for c in cols {
            row.push(format!("{}", c[i]));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_insole<W: Write>(w: W, rec: &InsoleRecording<f64>) -> Result<()> {
    let c = rec.channels();
    write_rows(
        w,
        &INSOLE_HEADER,
        c[0].t0(),
        c[0].rate_hz(),
        &[c[0].values(), c[1].values(), c[2].values(), c[3].values()],
    )
}

pub fn write_grf<W: Write>(w: W, rec: &GrfRecording<f64>) -> Result<()> {
    write_rows(
        w,
        &GRF_HEADER,
        rec.vertical().t0(),
        rec.rate_hz(),
        &[rec.vertical().values(), rec.mediolateral().values()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_mismatch_is_schema_error() {
        let data = "t,hl,mf,mt\n0,1,1,1\n0.01,1,1,1\n";
        let err = read_insole::<f64, _>(data.as_bytes(), Unit::Volts, Side::Left, "x").unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");
    }

    #[test]
    fn empty_file() {
        let err = read_grf::<f64, _>("".as_bytes(), Side::Left, "x").unwrap_err();
        assert!(matches!(err, Error::EmptyFile(_)), "{err:?}");
        let err = read_grf::<f64, _>("t,fv,fml\n".as_bytes(), Side::Left, "x").unwrap_err();
        assert!(matches!(err, Error::EmptyFile(_)), "{err:?}");
    }

    #[test]
    fn bad_number_and_time_order() {
        let err = read_grf::<f64, _>("t,fv,fml\n0,a,1\n0.1,1,1\n".as_bytes(), Side::Left, "x").unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        let err = read_grf::<f64, _>("t,fv,fml\n0,1,1\n0,1,1\n".as_bytes(), Side::Left, "x").unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn uniform_round_trip() {
        let v = ChannelSeries::new(vec![1.5, 2.25, -3.0, 4.0], 200.0, Unit::Newtons, 0.5).unwrap();
        let rec = GrfRecording::new(v.clone(), v, Side::Right).unwrap();
        let mut buf = Vec::new();
        write_grf(&mut buf, &rec).unwrap();
        let back = read_grf::<f64, _>(buf.as_slice(), Side::Right, "x").unwrap();
        assert_eq!(back.vertical().values(), rec.vertical().values());
        assert_eq!(back.rate_hz(), 200.0);
        assert_eq!(back.vertical().t0(), 0.5);
    }

    #[test]
    fn jittered_timestamps_are_uniformized() {
        let t = [0.0, 0.0101, 0.0199, 0.03, 0.0402];
        let v = [0.0, 1.01, 1.99, 3.0, 4.02];
        let u = uniformize(&t, &v, 100.0);
        assert_eq!(u.len(), 5);
        for (k, x) in u.iter().enumerate() {
            assert!((x - k as f64).abs() < 1e-9);
        }
    }
}
