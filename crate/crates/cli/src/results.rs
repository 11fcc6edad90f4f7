//! Append-only results table and profile dumps.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, Write};
use std::path::Path;

pub const HEADER: &str = "experiment_id,command,medium_hash,angle_deg,l,c_star,residual,wall_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Stationary,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Stationary => "stationary",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    pub command: String,
    pub medium_hash: String,
    pub angle_deg: Option<f64>,
    pub l: Option<f64>,
    pub c_star: Option<f64>,
    pub residual: Option<f64>,
    pub wall_ms: u64,
    pub status: Status,
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn number(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        [
            field(&self.experiment_id),
            field(&self.command),
            field(&self.medium_hash),
            number(self.angle_deg),
            number(self.l),
            number(self.c_star),
            number(self.residual),
            self.wall_ms.to_string(),
            self.status.as_str().to_string(),
        ]
        .join(",")
    }
}

/// Appends `rows`, writing the header first when the file is new or empty.
/// Existing rows are never rewritten.
pub fn append_rows(path: &Path, rows: &[ResultRow]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let fresh = match fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            io::BufReader::new(f).read_line(&mut first)?;
            if !first.is_empty() && first.trim_end() != HEADER {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{} has a different header", path.display()),
                ));
            }
            first.is_empty()
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => true,
        Err(e) => return Err(e),
    };
    let mut out = String::new();
    if fresh {
        out.push_str(HEADER);
        out.push('\n');
    }
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(out.as_bytes())
}

/// A table destined for `profiles/<id>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub id: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Profile {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let dir = dir.join("profiles");
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("{}.csv", self.id)), self.to_csv())
    }
}
