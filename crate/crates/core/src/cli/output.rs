use std::fmt::Display;
use std::io::Write;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Sentences and tables for people.
    Human,
    /// One `key=value` record per line.
    Machine,
}

/// Dual-format writer: commands emit both a structured record stream and human text, and the
/// format picks which reaches stdout. Diagnostics always go to stderr.
pub struct Output {
    format: Format,
    out: Box<dyn Write>,
    err: Box<dyn Write>,
}

impl Output {
    pub fn stdout(format: Format) -> Self {
        Output { format, out: Box::new(std::io::stdout()), err: Box::new(std::io::stderr()) }
    }

    pub fn new(format: Format, out: Box<dyn Write>, err: Box<dyn Write>) -> Self {
        Output { format, out, err }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// A machine record; silent in human mode.
    pub fn field(&mut self, key: &str, value: impl Display) {
        if self.format == Format::Machine {
            let _ = writeln!(self.out, "{key}={value}");
        }
    }

    /// Human text; silent in machine mode.
    pub fn say(&mut self, text: impl Display) {
        if self.format == Format::Human {
            let _ = writeln!(self.out, "{text}");
        }
    }

    /// Raw text in either mode.
    pub fn raw(&mut self, text: &str) {
        let _ = self.out.write_all(text.as_bytes());
    }

    pub fn warn(&mut self, text: impl Display) {
        let _ = writeln!(self.err, "warning: {text}");
    }
}
