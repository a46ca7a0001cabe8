//! Line-delimited output rows.

use std::fmt::Display;
use std::io::{self, Write};

use serde::ser::{Serialize, SerializeMap, Serializer};

/// One output row: ordered string fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Record {
    fields: Vec<(&'static str, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, value: impl Display) -> Self {
        self.fields.push((key, value.to_string()));
        self
    }

    /// `value` or `-` when absent.
    pub fn with_opt(self, key: &'static str, value: Option<impl Display>) -> Self {
        match value {
            Some(v) => self.with(key, v),
            None => self.with(key, "-"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.fields.iter().map(|(k, _)| *k)
    }

    pub fn values(&self) -> impl Iterator<Item = &str> + '_ {
        self.fields.iter().map(|(_, v)| v.as_str())
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.fields.len()))?;
        for (k, v) in &self.fields {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Records,
    /// CSV; a header line is written whenever the column set changes.
    Csv,
}

pub fn write_records(out: &mut impl Write, records: &[Record], format: Format) -> io::Result<()> {
    match format {
        Format::Records => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(&mut *out);
            let mut header: Vec<&str> = Vec::new();
            for r in records {
                if !r.keys().eq(header.iter().copied()) {
                    header = r.keys().collect();
                    w.write_record(&header)?;
                }
                w.write_record(r.values())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let rows = [
            Record::new().with("kind", "a").with("x", "1/2"),
            Record::new().with("kind", "a").with("x", 3),
            Record::new().with("kind", "b").with_opt("y", None::<u8>),
        ];
        let mut out = Vec::new();
        write_records(&mut out, &rows, Format::Records).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"kind\":\"a\",\"x\":\"1/2\"}\n{\"kind\":\"a\",\"x\":\"3\"}\n{\"kind\":\"b\",\"y\":\"-\"}\n"
        );
        let mut out = Vec::new();
        write_records(&mut out, &rows, Format::Csv).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "kind,x\na,1/2\na,3\nkind,y\nb,-\n"
        );
    }
}
