//! Metadata headers and CSV/JSON emission.

use polar_maass::arith::Mat2;
use polar_maass::poincarebasis::FourierExpansion;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Hex SHA-256 of the canonical JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordered key/value metadata written before every table.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new<T: Serialize>(command: &str, config: &T) -> Self {
        let mut m = Metadata::default();
        m.push("program", "polar-maass");
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m.push("config_hash", &config_hash(config));
        m
    }

    pub fn push(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn csv_header(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    fn json(&self) -> serde_json::Value {
        let map = self.entries.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        serde_json::Value::Object(map)
    }
}

pub fn matrix_label(m: &Mat2) -> String {
    format!("[[{}, {}], [{}, {}]]", m.a, m.b, m.c, m.d)
}

/// Round-trippable binary64 text with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct CoeffRow {
    pub n: i64,
    pub re: f64,
    pub im: f64,
    pub tail_estimate: f64,
    pub part: &'static str,
}

pub fn coeff_rows(ex: &FourierExpansion) -> Vec<CoeffRow> {
    let mut rows = Vec::new();
    for (&n, v) in &ex.holomorphic {
        let tail = ex.holomorphic_tails.get(&n).copied().unwrap_or(0.0);
        rows.push(CoeffRow { n, re: v.re, im: v.im, tail_estimate: tail, part: "hol" });
    }
    for (&n, v) in &ex.antiholomorphic {
        let tail = ex.antiholomorphic_tails.get(&n).copied().unwrap_or(0.0);
        rows.push(CoeffRow { n, re: v.re, im: v.im, tail_estimate: tail, part: "antihol" });
    }
    rows
}

pub fn render_coeffs(meta: &Metadata, rows: &[CoeffRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = meta.csv_header();
            out.push_str("n,re,im,tail_estimate,part\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.n,
                    fmt_f64(r.re),
                    fmt_f64(r.im),
                    fmt_f64(r.tail_estimate),
                    r.part
                ));
            }
            out
        }
        Format::Json => render_json(meta, "rows", rows),
    }
}

/// `{"metadata": {...}, key: payload}` followed by a newline.
pub fn render_json<T: Serialize + ?Sized>(meta: &Metadata, key: &str, payload: &T) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("metadata".into(), meta.json());
    obj.insert(key.into(), serde_json::to_value(payload).expect("payload serializes"));
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("json");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [196884.0, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&("coeffs", 1u64));
        assert_eq!(a, config_hash(&("coeffs", 1u64)));
        assert_ne!(a, config_hash(&("coeffs", 2u64)));
        assert_eq!(a.len(), 64);
    }
}
