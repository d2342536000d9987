//! Canonical JSON: sorted keys (serde_json's default map is ordered), every
//! float written with 17 significant digits so that parsing it back yields
//! the identical `f64`.

use std::io;

use opuc::cmv::CMatrix;
use opuc::{Complex, Polynomial, VerblunskySequence};
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn write_null<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        CompactFormatter.write_null(writer)
    }
}

/// `d.dddddddddddddddde±x`: 17 significant digits, enough to round-trip.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_canonical_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter);
    value.serialize(&mut ser).expect("serializing a Value into memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// `{schema_version, payload}`.
pub fn document(payload: Map<String, Value>) -> Value {
    json!({ "schema_version": SCHEMA_VERSION, "payload": Value::Object(payload) })
}

pub fn complex(z: Complex) -> Value {
    json!([z.re, z.im])
}

pub fn complex_list(zs: &[Complex]) -> Value {
    Value::Array(zs.iter().copied().map(complex).collect())
}

/// Ascending coefficients.
pub fn polynomial(p: &Polynomial) -> Value {
    complex_list(p.coeffs())
}

/// Row-major nested arrays.
pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn verblunsky(v: &VerblunskySequence) -> Value {
    json!({ "a": complex_list(v.coeffs()), "omega": complex(v.omega()) })
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidInput(msg.into())
}

pub fn parse_complex(value: &Value, what: &str) -> Result<Complex, CliError> {
    match value.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex::new(re, im)),
            _ => Err(invalid(format!("{what} must hold two numbers [re, im]"))),
        },
        _ => Err(invalid(format!("{what} must be a two-element array [re, im]"))),
    }
}

/// Reads `{"a": [[re, im], …], "omega": [re, im]}`, either bare or as the
/// `verblunsky` entry of an exported document's payload. `omega_arg`, when
/// given, supplies (or replaces) ω as `exp(iσ)`.
pub fn parse_verblunsky(value: &Value, omega_arg: Option<f64>) -> Result<VerblunskySequence, CliError> {
    let record = match value.get("payload") {
        Some(payload) => payload
            .get("verblunsky")
            .ok_or_else(|| invalid("document payload has no 'verblunsky' entry"))?,
        None => value,
    };
    let a = record
        .get("a")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("Verblunsky record needs an array 'a' of [re, im] pairs"))?
        .iter()
        .enumerate()
        .map(|(k, x)| parse_complex(x, &format!("a_{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let omega = match (omega_arg, record.get("omega")) {
        (Some(sigma), _) => Complex::from_polar(1.0, sigma),
        (None, Some(w)) => parse_complex(w, "omega")?,
        (None, None) => return Err(invalid("no 'omega' in the Verblunsky record and no --omega-arg")),
    };
    Ok(VerblunskySequence::new(a, omega)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.25), "-2.5000000000000000e-1");
        for x in [0.1, 1.0 / 3.0, -7.123456789012345e-300, f64::MAX, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn output_is_sorted_and_reparses_exactly() {
        let value = json!({ "zeta": [0.1, 2.0], "alpha": { "b": 1, "a": 1.0 / 3.0 } });
        let text = to_canonical_string(&value);
        assert_eq!(
            text,
            r#"{"alpha":{"a":3.3333333333333331e-1,"b":1},"zeta":[1.0000000000000001e-1,2.0000000000000000e0]}"#
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, value);
    }

    #[test]
    fn verblunsky_records_round_trip() {
        let v = VerblunskySequence::new(
            vec![Complex::new(0.1, -1.0 / 7.0), Complex::new(0.0, 0.3)],
            Complex::from_polar(1.0, 0.9),
        )
        .unwrap();
        let text = to_canonical_string(&verblunsky(&v));
        let back = parse_verblunsky(&serde_json::from_str(&text).unwrap(), None).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn malformed_records_name_the_problem() {
        let bad = json!({ "a": [[0.1]], "omega": [1, 0] });
        let err = parse_verblunsky(&bad, None).unwrap_err().to_string();
        assert!(err.contains("a_0"), "{err}");
        let outside = json!({ "a": [[1.5, 0]], "omega": [1, 0] });
        let err = parse_verblunsky(&outside, None).unwrap_err().to_string();
        assert!(err.contains("unit disk"), "{err}");
        let no_omega = json!({ "a": [[0.1, 0]] });
        assert!(parse_verblunsky(&no_omega, None).is_err());
        assert!(parse_verblunsky(&no_omega, Some(0.5)).is_ok());
    }
}
