//! Deterministic CSV and JSON rendering.

use serde::Serialize;

/// Bumped whenever a JSON document changes shape.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table of floats with a header row.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(sig17).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A CSV table whose cells are already formatted.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the schema version and command name on top.
pub fn json_document<T: Serialize>(command: &str, body: &T) -> String {
    let env = Envelope { schema_version: SCHEMA_VERSION, command, body };
    let mut s = serde_json::to_string_pretty(&env).expect("plain data always serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = csv_table(&["a", "b"], vec![vec![1.0, 2.0]]);
        assert_eq!(t, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }

    #[test]
    fn json_carries_schema_version() {
        #[derive(Serialize)]
        struct B {
            x: f64,
        }
        let s = json_document("t", &B { x: 1.5 });
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "t");
        assert_eq!(v["x"], 1.5);
    }
}
