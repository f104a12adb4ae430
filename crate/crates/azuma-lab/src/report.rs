//! Deterministic report rendering.
//!
//! Reports are ordered lists of records; records are ordered lists of
//! key/value fields. Nothing here hashes or reorders, so a report renders
//! byte-identically on every run and thread count. Floats are written with
//! 17 significant digits, enough for exact f64 round-trips. The only
//! intentionally non-reproducible output is the timestamp comment, which
//! starts with [`TIMESTAMP_PREFIX`] so downstream diffing can filter it.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

/// Prefix of the one comment line that varies between runs.
pub const TIMESTAMP_PREFIX: &str = "# generated_at_unix";

/// 17 significant digits: the shortest width that round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    F64(f64),
    U64(u64),
    I64(i64),
    Bool(bool),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::F64(x) => fmt_f64(*x),
            Value::U64(x) => x.to_string(),
            Value::I64(x) => x.to_string(),
            Value::Bool(b) => b.to_string(),
        }
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.into())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}
impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::F64(v)
    }
}
impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::U64(v)
    }
}
impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::U64(v as u64)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::U64(v as u64)
    }
}
impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::I64(v)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// One record: a kind tag plus ordered fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: String,
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Record {
            kind: kind.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// A full report: leading comment lines plus records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    /// Rendered as `# ...` lines in both formats.
    pub comments: Vec<String>,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    /// Appends the run timestamp comment (the one filterable line).
    pub fn timestamp(&mut self) {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.comments
            .push(format!("{} = {}", &TIMESTAMP_PREFIX[2..], secs));
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Kv => self.render_kv(),
            ReportFormat::Csv => self.render_csv(),
        }
    }

    /// `key = value` lines, records separated by blank lines.
    fn render_kv(&self) -> String {
        let mut out = String::new();
        for comment in &self.comments {
            writeln!(out, "# {comment}").unwrap();
        }
        for (i, record) in self.records.iter().enumerate() {
            if i > 0 || !self.comments.is_empty() {
                out.push('\n');
            }
            writeln!(out, "record = {}", record.kind).unwrap();
            for (key, value) in &record.fields {
                writeln!(out, "{key} = {}", value.render()).unwrap();
            }
        }
        out
    }

    /// Comment lines, then consecutive records sharing a schema become a
    /// header row plus data rows. The record kind is the first column.
    fn render_csv(&self) -> String {
        let mut out = String::new();
        for comment in &self.comments {
            writeln!(out, "# {comment}").unwrap();
        }
        let mut current_schema: Option<Vec<&str>> = None;
        for record in &self.records {
            let schema: Vec<&str> = record.fields.iter().map(|(k, _)| k.as_str()).collect();
            if current_schema.as_deref() != Some(&schema[..]) {
                let mut header = vec!["record"];
                header.extend(&schema);
                writeln!(out, "{}", header.join(",")).unwrap();
                current_schema = Some(schema);
            }
            let mut row = vec![csv_escape(&record.kind)];
            for (_, value) in &record.fields {
                row.push(csv_escape(&value.render()));
            }
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Kv,
    Csv,
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Drops timestamp lines; what remains must be byte-identical between two
/// runs with the same arguments.
pub fn strip_timestamps(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|line| !line.starts_with(TIMESTAMP_PREFIX))
        .map(|line| format!("{line}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_with_seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f64(1e12), "1.0000000000000000e12");
        let tricky = 0.1 + 0.2;
        let rendered = fmt_f64(tricky);
        assert_eq!(rendered.parse::<f64>().unwrap(), tricky);
        assert_eq!(rendered, "3.0000000000000004e-1");
    }

    #[test]
    fn kv_rendering_is_stable() {
        let mut report = Report::new();
        report.comment("tool v0");
        report.push(
            Record::new("bound")
                .field("mu", 2.0)
                .field("case", "large_M")
                .field("trials", 100u64),
        );
        let kv = report.render(ReportFormat::Kv);
        assert_eq!(
            kv,
            "# tool v0\n\nrecord = bound\nmu = 2.0000000000000000e0\ncase = large_M\ntrials = 100\n"
        );
    }

    #[test]
    fn csv_groups_matching_schemas_under_one_header() {
        let mut report = Report::new();
        report.push(Record::new("row").field("x", 1u64).field("y", 2u64));
        report.push(Record::new("row").field("x", 3u64).field("y", 4u64));
        report.push(Record::new("other").field("z", true));
        let csv = report.render(ReportFormat::Csv);
        assert_eq!(csv, "record,x,y\nrow,1,2\nrow,3,4\nrecord,z\nother,true\n");
    }

    #[test]
    fn timestamp_lines_are_strippable() {
        let mut a = Report::new();
        a.timestamp();
        a.push(Record::new("r").field("v", 1u64));
        let rendered = a.render(ReportFormat::Kv);
        assert!(rendered.starts_with(TIMESTAMP_PREFIX));
        let stripped = strip_timestamps(&rendered);
        assert!(!stripped.contains("generated_at"));
        assert!(stripped.contains("record = r"));
    }

    #[test]
    fn csv_escapes_embedded_delimiters() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("q\"q"), "\"q\"\"q\"");
    }
}
