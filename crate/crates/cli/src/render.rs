use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Render rows as `first: rest` in text mode instead of a header and
    /// comma-separated rows.
    pub labelled: bool,
}

/// Everything a command prints: the resolved config, named values, an
/// optional table, and optionally a prebuilt JSON body.
pub struct Document {
    pub command: &'static str,
    pub config: BTreeMap<String, String>,
    pub values: Vec<(String, String)>,
    pub table: Option<Table>,
    pub json_body: Option<(&'static str, Value)>,
}

impl Document {
    pub fn new(command: &'static str, config: BTreeMap<String, String>) -> Self {
        Document {
            command,
            config,
            values: Vec::new(),
            table: None,
            json_body: None,
        }
    }

    pub fn value(&mut self, key: &str, value: impl Into<String>) {
        self.values.push((key.to_string(), value.into()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Json => self.json(),
            Format::Csv => self.csv(),
        }
    }

    fn header(&self, out: &mut String) {
        out.push_str(&format!("# kraw {}\n", self.command));
        for (k, v) in &self.config {
            out.push_str(&format!("# {k} = {v}\n"));
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        self.header(&mut out);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(t) = &self.table {
            if t.labelled {
                for row in &t.rows {
                    out.push_str(&format!("{}: {}\n", row[0], row[1..].join(", ")));
                }
            } else {
                out.push_str(&t.columns.join(","));
                out.push('\n');
                for row in &t.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
        }
        out
    }

    fn json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        doc.insert("command".into(), Value::from(self.command));
        doc.insert(
            "config".into(),
            Value::Object(
                self.config
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
                    .collect(),
            ),
        );
        // A prebuilt body already carries the values and rows.
        if let Some((key, body)) = &self.json_body {
            doc.insert(key.to_string(), body.clone());
            return finish(doc);
        }
        if !self.values.is_empty() {
            doc.insert(
                "values".into(),
                Value::Object(
                    self.values
                        .iter()
                        .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
                        .collect(),
                ),
            );
        }
        if let Some(t) = &self.table {
            let rows = t
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        t.columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), Value::from(v.as_str())))
                            .collect(),
                    )
                })
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
        }
        finish(doc)
    }

    /// Config as `#` comment lines, then one CSV table: the document's table
    /// if present, otherwise `quantity,value` rows.
    fn csv(&self) -> String {
        let mut out = String::new();
        self.header(&mut out);
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns).expect("in-memory write");
                for row in &t.rows {
                    w.write_record(row).expect("in-memory write");
                }
            }
            None => {
                w.write_record(["quantity", "value"])
                    .expect("in-memory write");
                for (k, v) in &self.values {
                    w.write_record([k, v]).expect("in-memory write");
                }
            }
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("UTF-8 input"));
        out
    }
}

fn finish(doc: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("plain JSON values");
    s.push('\n');
    s
}
