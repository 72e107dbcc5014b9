//! Number formatting and CSV/JSON helpers shared by every emitter.

use std::io::{Read, Write};

use serde_json::Value;

use crate::choice::{Scale, TreatmentConfig};
use crate::design::ChoiceRecord;
use crate::error::{Error, Result};

/// Formats `x` with 12 significant digits, `%g` style: fixed notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_json),
        Value::Object(m) => m.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes `value` as pretty JSON with rounded floats.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    round_json(&mut v);
    let mut s =
        serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub const CHOICE_COLUMNS: [&str; 9] = [
    "subject_id",
    "scale",
    "set_index",
    "position",
    "context",
    "transparency",
    "nudge",
    "deterministic",
    "chose_B",
];

pub fn write_choices_csv<W: Write>(w: W, records: &[ChoiceRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CHOICE_COLUMNS)?;
    for r in records {
        let t = &r.treatment;
        out.write_record([
            r.subject_id.to_string().as_str(),
            &t.scale.factor().to_string(),
            &r.set_index.to_string(),
            &r.position.to_string(),
            flag(t.context),
            flag(t.transparency),
            flag(t.nudge),
            flag(t.deterministic),
            flag(r.chose_b),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

fn parse_flag(s: &str, line: usize) -> Result<bool> {
    match s.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::Csv(format!(
            "line {line}: expected 0/1, found `{other}`"
        ))),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Csv(format!("line {line}: expected integer, found `{s}`")))
}

pub fn read_choices_csv<R: Read>(r: R) -> Result<Vec<ChoiceRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CHOICE_COLUMNS.iter().copied()) {
        return Err(Error::Csv(format!("unexpected header {:?}", headers)));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let scale = Scale::try_from(parse_int::<u8>(&row[1], line)?)?;
        let treatment = TreatmentConfig::new(
            parse_flag(&row[4], line)?,
            parse_flag(&row[5], line)?,
            parse_flag(&row[6], line)?,
            parse_flag(&row[7], line)?,
            scale,
        )?;
        records.push(ChoiceRecord {
            subject_id: parse_int(&row[0], line)?,
            set_index: parse_int(&row[2], line)?,
            position: parse_int(&row[3], line)?,
            treatment,
            chose_b: parse_flag(&row[8], line)?,
        });
    }
    Ok(records)
}
