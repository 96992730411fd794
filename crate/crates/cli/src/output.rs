//! CSV and JSON rendering.

use serde::Serialize;

use ofdmim_relay::to_db;

/// Twelve significant digits; non-finite values print as `nan`/`inf`/`-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

/// `Some(dBW)` when `watts > 0`, which keeps JSON free of non-finite numbers.
pub fn dbw(watts: f64) -> Option<f64> {
    let d = to_db(watts);
    d.is_finite().then_some(d)
}

/// Minimal CSV table. Fields are numbers and fixed identifiers, so no quoting.
#[derive(Debug, Clone)]
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Csv { out, width: header.len() }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.width, "csv row width");
        debug_assert!(fields.iter().all(|f| !f.contains(',')));
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}
