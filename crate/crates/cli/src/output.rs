use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// C-style `%.17g`: 17 significant digits, trailing zeros removed, exponent
/// form when the decimal exponent is below -4 or at least 17.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let digits = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.digits$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A closed pipe (for example `| head`) is not an error.
fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut so = std::io::stdout().lock();
    match so.write_all(text.as_bytes()).and_then(|_| so.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

/// A CSV table held in memory until written.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| g17(*v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Where results go: JSON lines always to stdout, files only with `--out`.
pub struct Sink {
    out: Option<PathBuf>,
    lines: Vec<String>,
}

impl Sink {
    pub fn new(out: Option<&Path>) -> Result<Self, CliError> {
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        Ok(Self {
            out: out.map(Path::to_path_buf),
            lines: Vec::new(),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.out.is_some()
    }

    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(value).map_err(|e| CliError::Config {
            param: "output".into(),
            reason: format!("cannot serialize record: {e}"),
        })?;
        write_stdout(&format!("{line}\n"))?;
        self.lines.push(line);
        Ok(())
    }

    pub fn file(&self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }

    /// Writes a table to `name` under `--out`, or to stdout without one.
    pub fn table(&self, name: &str, table: &Table) -> Result<(), CliError> {
        if self.out.is_some() {
            self.file(name, table.as_str())
        } else {
            write_stdout(table.as_str())
        }
    }

    /// Saves the JSON lines emitted so far as `name`.
    pub fn flush_records(&self, name: &str) -> Result<(), CliError> {
        if self.out.is_some() && !self.lines.is_empty() {
            let mut text = self.lines.join("\n");
            text.push('\n');
            self.file(name, &text)?;
        }
        Ok(())
    }
}
