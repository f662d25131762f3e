use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use dicke_core::{Error, Result};
use tempfile::NamedTempFile;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Csv { writer, rows: 0 }
    }

    /// Panics if the field count differs from the header.
    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .expect("row length matches header");
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Writes to a temporary file next to `path`, then renames it into place.
    pub fn write_atomic(&mut self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let io = |e: std::io::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
        let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
        self.writer.flush().map_err(io)?;
        tmp.write_all(self.writer.get_ref()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }
}

/// Short `key=value` rendering of the parameters for error messages.
pub fn describe(p: &dicke_core::ModelParams) -> String {
    let mut s = format!(
        "omega_a={} omega_b={} kappa={} gamma={} s={} y={}",
        p.omega_a, p.omega_b, p.kappa, p.gamma, p.s, p.y
    );
    if let Some(m) = p.omega_m {
        let _ = write!(s, " omega_m={m}");
    }
    s
}
