//! CSV formats. Energies in eV, dipoles in e·Å, positions in nm, couplings
//! in eV^{1/2}/nm; everything is converted to atomic units on read.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use nalgebra::Vector3;
use qedr_core::units::{convert, au_to_ev, ev_to_au, Unit};
use qedr_core::{PhotonMode, Spectrum, Transition, Vec3};

use crate::error::{CliError, Result};

pub const TRANSITION_COLUMNS: [&str; 8] = ["id", "omega_eV", "dx_eA", "dy_eA", "dz_eA", "x_nm", "y_nm", "z_nm"];
pub const MODE_COLUMNS: [&str; 5] = ["id", "omega_eV", "lx", "ly", "lz"];
pub const EXCITATION_COLUMNS: [&str; 6] = ["Omega_eV", "f_nn", "f_pn", "f_pp", "sigma_e", "sigma_p"];
pub const SPECTRUM_COLUMNS: [&str; 2] = ["omega_eV", "value"];

/// Shortest representation that parses back to the same `f64`; `-0` prints as `0`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn conv(v: f64, from: Unit, to: Unit) -> f64 {
    convert(v, from, to).expect("units of one dimension")
}

struct Row {
    line: u64,
    record: StringRecord,
}

struct Table<'a> {
    name: String,
    columns: &'a [&'a str],
    rows: Vec<Row>,
}

impl Table<'_> {
    fn err(&self, line: u64, msg: impl std::fmt::Display) -> CliError {
        CliError::input(format!("{}:{line}: {msg}", self.name))
    }

    fn text<'r>(&self, row: &'r Row, col: usize) -> &'r str {
        row.record.get(col).unwrap_or("")
    }

    fn float(&self, row: &Row, col: usize) -> Result<f64> {
        let s = self.text(row, col);
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(row.line, format_args!("column {}: invalid number '{s}'", self.columns[col]))),
        }
    }

    fn optional_float(&self, row: &Row, col: usize) -> Result<Option<f64>> {
        if self.text(row, col).is_empty() {
            Ok(None)
        } else {
            self.float(row, col).map(Some)
        }
    }

    fn positive(&self, row: &Row, col: usize) -> Result<f64> {
        let v = self.float(row, col)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(row.line, format_args!("non-positive {} {v}", self.columns[col])))
        }
    }

    fn id(&self, row: &Row, seen: &mut HashMap<i64, u64>) -> Result<i64> {
        let s = self.text(row, 0);
        let id: i64 = s
            .parse()
            .map_err(|_| self.err(row.line, format_args!("column id: invalid integer '{s}'")))?;
        if let Some(first) = seen.insert(id, row.line) {
            return Err(self.err(row.line, format_args!("duplicate id {id} (first on line {first})")));
        }
        Ok(id)
    }
}

fn read_table<'a>(path: &Path, columns: &'a [&'a str]) -> Result<Table<'a>> {
    let name = path.display().to_string();
    let text = std::fs::read(path).map_err(|e| CliError::input(format!("{name}: {e}")))?;
    // Reader positions may point at skipped blank or comment lines before a
    // record, so the reported line is the first content line from there.
    let lines: Vec<(u64, bool)> = {
        let mut start = 0u64;
        text.split(|&b| b == b'\n')
            .map(|l| {
                let t = String::from_utf8_lossy(l);
                let t = t.trim();
                let entry = (start, t.is_empty() || t.starts_with('#'));
                start += l.len() as u64 + 1;
                entry
            })
            .collect()
    };
    let line_of = |byte: u64| {
        let mut k = lines.partition_point(|&(s, _)| s <= byte).saturating_sub(1);
        while k + 1 < lines.len() && lines[k].1 {
            k += 1;
        }
        k as u64 + 1
    };
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(text.as_slice());
    let mut table = Table {
        name,
        columns,
        rows: Vec::new(),
    };
    let mut header_seen = false;
    for result in reader.records() {
        let record = result.map_err(|e| CliError::input(format!("{}: {e}", table.name)))?;
        let line = record.position().map_or(0, |p| line_of(p.byte()));
        if record.iter().all(str::is_empty) {
            continue;
        }
        if !header_seen {
            for (k, &want) in columns.iter().enumerate() {
                match record.get(k) {
                    None => return Err(table.err(line, format_args!("missing column {want} in header"))),
                    Some(got) if got != want => {
                        return Err(table.err(line, format_args!("expected column {want} in header, found '{got}'")))
                    }
                    _ => {}
                }
            }
            if record.len() > columns.len() {
                return Err(table.err(line, format_args!("unexpected column '{}' in header", &record[columns.len()])));
            }
            header_seen = true;
            continue;
        }
        if record.len() < columns.len() {
            return Err(table.err(line, format_args!("missing column {}", columns[record.len()])));
        }
        if record.len() > columns.len() {
            return Err(table.err(line, format_args!("expected {} columns, found {}", columns.len(), record.len())));
        }
        table.rows.push(Row { line, record });
    }
    if !header_seen {
        return Err(CliError::input(format!(
            "{}: missing header line '{}'",
            table.name,
            columns.join(", ")
        )));
    }
    Ok(table)
}

pub fn load_transitions(path: &Path) -> Result<Vec<Transition>> {
    let t = read_table(path, &TRANSITION_COLUMNS)?;
    if t.rows.is_empty() {
        return Err(CliError::input(format!("{}: no transitions", t.name)));
    }
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for row in &t.rows {
        let id = t.id(row, &mut seen)?;
        let omega = ev_to_au(t.positive(row, 1)?);
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = t.float(row, k + 2)?;
        }
        let dipole = Vector3::new(v[0], v[1], v[2]).map(|x| conv(x, Unit::ElectronAngstrom, Unit::AuDipole));
        let position = Vector3::new(v[3], v[4], v[5]).map(|x| conv(x, Unit::Nanometer, Unit::Bohr));
        out.push(Transition::new(id, omega, dipole, position).map_err(|e| t.err(row.line, e))?);
    }
    Ok(out)
}

pub fn load_modes(path: &Path) -> Result<Vec<PhotonMode>> {
    let t = read_table(path, &MODE_COLUMNS)?;
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for row in &t.rows {
        let id = t.id(row, &mut seen)?;
        let omega = ev_to_au(t.positive(row, 1)?);
        let l = Vector3::new(t.float(row, 2)?, t.float(row, 3)?, t.float(row, 4)?)
            .map(|x| conv(x, Unit::SqrtEvPerNm, Unit::AuCoupling));
        out.push(PhotonMode::new(id, omega, l).map_err(|e| t.err(row.line, e))?);
    }
    Ok(out)
}

/// File at `path`, or stdout for `None` or `-`.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f = File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_err(e: io::Error) -> CliError {
    CliError::input(format!("write failed: {e}"))
}

fn write_rows<W: Write>(mut w: W, columns: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    writeln!(w, "{}", columns.join(",")).map_err(write_err)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

fn vec_fields(v: &Vec3, from: Unit, to: Unit) -> impl Iterator<Item = String> + '_ {
    v.iter().map(move |&x| fmt_f64(conv(x, from, to)))
}

pub fn write_transitions<W: Write>(w: W, transitions: &[Transition]) -> Result<()> {
    write_rows(
        w,
        &TRANSITION_COLUMNS,
        transitions.iter().map(|t| {
            let mut row = vec![t.id.to_string(), fmt_f64(au_to_ev(t.omega))];
            row.extend(vec_fields(&t.dipole, Unit::AuDipole, Unit::ElectronAngstrom));
            row.extend(vec_fields(&t.position, Unit::Bohr, Unit::Nanometer));
            row
        }),
    )
}

pub fn write_modes<W: Write>(w: W, modes: &[PhotonMode]) -> Result<()> {
    write_rows(
        w,
        &MODE_COLUMNS,
        modes.iter().map(|m| {
            let mut row = vec![m.id.to_string(), fmt_f64(au_to_ev(m.omega))];
            row.extend(vec_fields(&m.coupling, Unit::AuCoupling, Unit::SqrtEvPerNm));
            row
        }),
    )
}

/// One row of the excitations file. `omega` in a.u.; photon strengths are
/// absent when photon vectors were not kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationRow {
    pub omega: f64,
    pub f_nn: f64,
    pub f_pn: Option<f64>,
    pub f_pp: Option<f64>,
    pub sigma_e: f64,
    pub sigma_p: f64,
}

pub fn write_excitations<W: Write>(w: W, rows: &[ExcitationRow]) -> Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    write_rows(
        w,
        &EXCITATION_COLUMNS,
        rows.iter().map(|r| {
            vec![
                fmt_f64(au_to_ev(r.omega)),
                fmt_f64(r.f_nn),
                opt(r.f_pn),
                opt(r.f_pp),
                fmt_f64(r.sigma_e),
                fmt_f64(r.sigma_p),
            ]
        }),
    )
}

pub fn load_excitations(path: &Path) -> Result<Vec<ExcitationRow>> {
    let t = read_table(path, &EXCITATION_COLUMNS)?;
    t.rows
        .iter()
        .map(|row| {
            Ok(ExcitationRow {
                omega: ev_to_au(t.positive(row, 0)?),
                f_nn: t.float(row, 1)?,
                f_pn: t.optional_float(row, 2)?,
                f_pp: t.optional_float(row, 3)?,
                sigma_e: t.float(row, 4)?,
                sigma_p: t.float(row, 5)?,
            })
        })
        .collect()
}

/// Writes `omega_eV, value`; values are multiplied by `scale` on the way out.
pub fn write_spectrum<W: Write>(w: W, spectrum: &Spectrum, scale: f64) -> Result<()> {
    write_rows(
        w,
        &SPECTRUM_COLUMNS,
        spectrum
            .grid
            .iter()
            .zip(&spectrum.values)
            .map(|(&x, &v)| vec![fmt_f64(au_to_ev(x)), fmt_f64(v * scale)]),
    )
}

/// Grid in a.u. and raw values.
pub fn load_spectrum(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = read_table(path, &SPECTRUM_COLUMNS)?;
    if t.rows.is_empty() {
        return Err(CliError::input(format!("{}: empty spectrum", t.name)));
    }
    let mut grid = Vec::with_capacity(t.rows.len());
    let mut values = Vec::with_capacity(t.rows.len());
    for row in &t.rows {
        grid.push(ev_to_au(t.float(row, 0)?));
        values.push(t.float(row, 1)?);
    }
    Ok((grid, values))
}
