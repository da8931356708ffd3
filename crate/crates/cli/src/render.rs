//! Number formatting and the table/JSON/CSV renderings of reports.

use std::f64::consts::PI;

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value as Json;

/// Magnitudes below this are printed as zero.
pub const CHOP: f64 = 1e-14;
pub const SIGNIFICANT: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

/// `x` with 12 significant digits, trailing zeros removed.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x.abs() < CHOP {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        // rounding may have produced "-0"
        if s == "-0" { "0".into() } else { s.into() }
    } else {
        let s = format!("{x:.prec$e}", prec = SIGNIFICANT - 1);
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exponent}")
    }
}

/// `x` rounded to what [`num`] prints.
pub fn round(x: f64) -> f64 {
    if x.is_finite() {
        num(x).parse().expect("formatted numbers parse")
    } else {
        x
    }
}

/// Rounds every non-integer number in a JSON tree.
pub fn round_json(value: &mut Json) {
    match value {
        Json::Number(n) if n.is_f64() => {
            let x = round(n.as_f64().expect("f64 number"));
            *value = serde_json::Number::from_f64(x).map_or(Json::Null, Json::Number);
        }
        Json::Array(items) => items.iter_mut().for_each(round_json),
        Json::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// A number that may be undefined, serialized as the string `"undefined"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maybe(pub Option<f64>);

impl Maybe {
    pub fn text(self) -> String {
        self.0.map_or_else(|| "undefined".into(), num)
    }
}

impl Serialize for Maybe {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(x) => s.serialize_f64(x),
            None => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Maybe {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Maybe(Some(x))),
            Raw::Text(t) if t == "undefined" => Ok(Maybe(None)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"undefined\", got {t:?}"))),
        }
    }
}

/// `re`, `re+imi` or `re-imi`.
pub fn complex(re: f64, im: f64) -> String {
    let (r, i) = (num(re), num(im));
    if i == "0" {
        r
    } else if i.starts_with('-') {
        format!("{r}{i}i")
    } else {
        format!("{r}+{i}i")
    }
}

/// Phase in `(-pi, pi]`, undefined for vanishing moduli.
pub fn phase(re: f64, im: f64, tol: f64) -> Maybe {
    if re.hypot(im) <= tol {
        return Maybe(None);
    }
    let a = im.atan2(re);
    Maybe(Some(if a <= -PI { PI } else { a }))
}

/// Left-aligned first column, right-aligned numeric columns.
pub fn grid(headers: &[String], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut out = String::new();
        for (i, cell) in cells.iter().enumerate().take(cols) {
            let pad = width[i] - cell.chars().count();
            if i == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str("  ");
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        out.trim_end().to_owned() + "\n"
    };
    let mut out = line(headers);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub fn csv_text(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut tree = serde_json::to_value(value).expect("reports serialize");
    round_json(&mut tree);
    serde_json::to_string_pretty(&tree).expect("reports serialize") + "\n"
}
