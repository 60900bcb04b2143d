//! CSV assembly with a leading `#` metadata line. Output is built in memory
//! and written in one step so identical runs produce identical bytes.

use std::path::PathBuf;

use chanres::Result;

pub struct Sink {
    target: Option<PathBuf>,
    buf: String,
}

impl Sink {
    pub fn new(target: Option<PathBuf>) -> Self {
        Sink { target, buf: String::new() }
    }

    /// First line: tool version plus the run parameters that matter for
    /// reproducing the file.
    pub fn metadata(&mut self, fields: &str) {
        self.line(&format!("# chanres {} {fields}", env!("CARGO_PKG_VERSION")));
    }

    pub fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    pub fn finish(self) -> Result<()> {
        match self.target {
            Some(path) => std::fs::write(path, self.buf)?,
            None => print!("{}", self.buf),
        }
        Ok(())
    }
}

/// Fixed 9-decimal form so equal runs serialize identically; infinities are
/// spelled out.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.9}")
    }
}

pub fn flags_cell(flags: &[String]) -> String {
    if flags.is_empty() {
        "-".into()
    } else {
        flags.join(";")
    }
}
