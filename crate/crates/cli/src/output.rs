//! JSON, CSV and aligned-text rendering.
//!
//! CSV columns are fixed per command (see the README) and floats use
//! `{:.16e}`, i.e. 17 significant digits.

use serde::Serialize;

use crate::config::Format;

pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.10e}"),
            other => other.csv(),
        }
    }
}

/// Anything printable as a table.
pub trait Tabular: Serialize {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<Cell>>;
    /// Lines printed above the human table.
    fn preamble(&self) -> Vec<String> {
        Vec::new()
    }
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

pub fn csv<T: Tabular + ?Sized>(t: &T) -> String {
    let mut out = t.header().join(",");
    out.push('\n');
    for row in t.rows() {
        out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn human<T: Tabular + ?Sized>(t: &T) -> String {
    let header: Vec<String> = t.header().iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = t.rows().iter().map(|r| r.iter().map(Cell::human).collect()).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    for p in t.preamble() {
        out.push_str(&p);
        out.push('\n');
    }
    out.push_str(&line(&header));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn render<T: Tabular>(t: &T, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = json(t);
            s.push('\n');
            s
        }
        Format::Csv => csv(t),
        Format::Human => human(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct T(Vec<(f64, String)>);

    impl Tabular for T {
        fn header(&self) -> Vec<&'static str> {
            vec!["v", "name"]
        }
        fn rows(&self) -> Vec<Vec<Cell>> {
            self.0.iter().map(|(v, n)| vec![Cell::Num(*v), Cell::Text(n.clone())]).collect()
        }
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let t = T(vec![(0.1, "a,b".into())]);
        assert_eq!(csv(&t), "v,name\n1.0000000000000001e-1,\"a,b\"\n");
    }

    #[test]
    fn human_aligns_columns() {
        let t = T(vec![(1.0, "x".into())]);
        let s = human(&t);
        assert_eq!(s.lines().count(), 2);
        assert!(s.lines().next().unwrap().ends_with("name"));
    }
}
