//! Deterministic report output: every float prints with 17 significant
//! digits, so identical runs produce byte-identical files.

use serde::Serialize;
use std::io::{self, Write};

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes to JSON with fixed-width float formatting.
pub fn to_json(value: &impl Serialize) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("report serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// One float cell of a CSV row, same 17-significant-digit convention.
pub fn csv_cell(value: f64) -> String {
    format!("{value:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_print_with_17_digits_and_parse_back() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
        }
        let s = S { a: 1.0 / 3.0, b: vec![0.5, -2.0] };
        let js = to_json(&s);
        assert!(js.contains("3.3333333333333331e-1"), "{js}");
        let back: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(back["a"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(back["b"][1].as_f64().unwrap(), -2.0);
    }
}
