//! JSON and CSV formats for PDOs, channels, mechanisms and results.
//!
//! Matrices are nested row arrays whose entries are `[re, im]` pairs; a bare
//! number is read as a real entry.

use serde_json::{json, Map, Value};

use crate::channel::{DensityOperator, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::measurement::{CorrelationEstimate, Mechanism};
use crate::pdo::{pdo_from_pauli_coeffs, Direction, PauliTable, Pdo, TemporalSpec};
use crate::pseudo_channel::PseudoChannel;

/// Significant digits kept in all emitted numbers.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x + 0.0;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse::<f64>()
        .map(|y| y + 0.0)
        .unwrap_or(x)
}

/// Text form of [`sig12`]: positional for moderate magnitudes, exponent
/// notation otherwise.
pub fn format_number(x: f64) -> String {
    let y = sig12(x);
    if y == 0.0 || (1e-5..1e15).contains(&y.abs()) {
        return y.to_string();
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, y);
    match s.split_once('e') {
        Some((mantissa, exp)) if mantissa.contains('.') => {
            let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
            format!("{mantissa}e{exp}")
        }
        _ => s,
    }
}

/// Applies [`sig12`] to every float in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(sig12(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn data(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("field `{field}`: {msg}"))
}

fn get<'a>(v: &'a Value, key: &str, parent: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| data(parent, format!("missing key `{key}`")))
}

fn as_f64(v: &Value, field: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| data(field, "expected a number"))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|row| Value::Array(row.into_iter().map(|z| json!([z.re, z.im])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, dim: usize, field: &str) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| data(field, "expected an array of rows"))?;
    if rows.len() != dim {
        return Err(data(field, format!("expected {dim} rows, got {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let name = format!("{field}[{i}]");
        let cols = row.as_array().ok_or_else(|| data(&name, "expected an array"))?;
        if cols.len() != dim {
            return Err(data(&name, format!("expected {dim} entries, got {}", cols.len())));
        }
        for (j, entry) in cols.iter().enumerate() {
            let name = format!("{field}[{i}][{j}]");
            let z = match entry {
                Value::Number(_) => c(as_f64(entry, &name)?, 0.0),
                Value::Array(pair) if pair.len() == 2 => {
                    c(as_f64(&pair[0], &name)?, as_f64(&pair[1], &name)?)
                }
                _ => return Err(data(&name, "expected a number or a [re, im] pair")),
            };
            entries.push(z);
        }
    }
    ComplexMatrix::from_row_major(dim, &entries)
}

fn table_from_json(v: &Value, field: &str) -> Result<PauliTable> {
    let rows = v.as_array().filter(|r| r.len() == 4).ok_or_else(|| data(field, "expected 4 rows"))?;
    let mut t = [[0.0; 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let name = format!("{field}[{i}]");
        let cols = row.as_array().filter(|r| r.len() == 4).ok_or_else(|| data(&name, "expected 4 numbers"))?;
        for (j, x) in cols.iter().enumerate() {
            t[i][j] = as_f64(x, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(t)
}

/// Reads `{"matrix": …}` or `{"pauli_coeffs": …}`. When both are present
/// they must agree.
pub fn pdo_from_json(v: &Value) -> Result<Pdo> {
    if !v.is_object() {
        return Err(data("<root>", "expected a JSON object"));
    }
    let from_table = v
        .get("pauli_coeffs")
        .map(|t| table_from_json(t, "pauli_coeffs").and_then(|t| pdo_from_pauli_coeffs(&t)))
        .transpose()?;
    match v.get("matrix") {
        Some(m) => {
            let pdo = Pdo::from_matrix(matrix_from_json(m, 4, "matrix")?)?;
            if let Some(t) = from_table {
                if t.matrix().max_abs_diff(pdo.matrix()) > 1e-9 {
                    return Err(data("pauli_coeffs", "disagrees with `matrix`"));
                }
            }
            Ok(pdo)
        }
        None => from_table.ok_or_else(|| data("<root>", "expected `matrix` or `pauli_coeffs`")),
    }
}

pub fn pdo_to_json(r: &Pdo, provenance: &str) -> Value {
    json!({
        "matrix": matrix_to_json(r.matrix()),
        "pauli_coeffs": r.pauli_coeffs(),
        "metadata": { "provenance": provenance },
    })
}

/// Reads a density operator from `{"matrix"}`, `{"ket"}` (amplitudes as
/// `[re, im]` pairs) or, for a qubit, `{"bloch": [x, y, z]}`.
pub fn state_from_json(v: &Value, dim: usize, field: &str) -> Result<DensityOperator> {
    if let Some(m) = v.get("matrix") {
        return DensityOperator::new(matrix_from_json(m, dim, &format!("{field}.matrix"))?);
    }
    if let Some(k) = v.get("ket") {
        let name = format!("{field}.ket");
        let amps = k.as_array().filter(|a| a.len() == dim).ok_or_else(|| data(&name, format!("expected {dim} amplitudes")))?;
        let psi = amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let n = format!("{name}[{i}]");
                match a {
                    Value::Number(_) => Ok(c(as_f64(a, &n)?, 0.0)),
                    Value::Array(p) if p.len() == 2 => Ok(c(as_f64(&p[0], &n)?, as_f64(&p[1], &n)?)),
                    _ => Err(data(&n, "expected a number or a [re, im] pair")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        return DensityOperator::pure(&psi);
    }
    if let Some(b) = v.get("bloch") {
        let name = format!("{field}.bloch");
        if dim != 2 {
            return Err(data(&name, "Bloch vectors describe qubits only"));
        }
        let xs = b.as_array().filter(|a| a.len() == 3).ok_or_else(|| data(&name, "expected 3 numbers"))?;
        let r = [as_f64(&xs[0], &name)?, as_f64(&xs[1], &name)?, as_f64(&xs[2], &name)?];
        return DensityOperator::from_bloch(r);
    }
    Err(data(field, "expected `matrix`, `ket` or `bloch`"))
}

/// Reads `{"choi"}`, `{"kraus": [...]}` or a named channel:
/// `{"name": "identity"}`, `{"name": "dephasing", "p": …}`,
/// `{"name": "depolarizing"}`.
pub fn channel_from_json(v: &Value, field: &str) -> Result<QuantumChannel> {
    if let Some(m) = v.get("choi") {
        return QuantumChannel::from_choi(matrix_from_json(m, 4, &format!("{field}.choi"))?);
    }
    if let Some(k) = v.get("kraus") {
        let name = format!("{field}.kraus");
        let ops = k.as_array().filter(|a| !a.is_empty()).ok_or_else(|| data(&name, "expected a non-empty array"))?;
        let ops = ops
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m, 2, &format!("{name}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return QuantumChannel::from_kraus(&ops);
    }
    if let Some(n) = v.get("name") {
        let name_field = format!("{field}.name");
        return match n.as_str() {
            Some("identity") => Ok(QuantumChannel::identity()),
            Some("dephasing") => QuantumChannel::dephasing(as_f64(get(v, "p", field)?, &format!("{field}.p"))?),
            Some("depolarizing") => QuantumChannel::constant(&DensityOperator::maximally_mixed(2)),
            _ => Err(data(&name_field, "expected identity, dephasing or depolarizing")),
        };
    }
    Err(data(field, "expected `choi`, `kraus` or `name`"))
}

pub fn direction_from_json(v: Option<&Value>, field: &str) -> Result<Direction> {
    match v {
        None => Ok(Direction::Forward),
        Some(d) => d
            .as_str()
            .ok_or_else(|| data(field, "expected a string"))?
            .parse()
            .map_err(|_| data(field, "expected `forward` or `reverse`")),
    }
}

/// Mechanism specs:
/// `{"kind": "spatial", "state": …}`,
/// `{"kind": "temporal", "initial": …, "channel": …, "direction": …}`,
/// `{"kind": "mixture", "components": [{"weight": w, "mechanism": …}]}`.
pub fn mechanism_from_json(v: &Value) -> Result<Mechanism> {
    mechanism_at(v, "<root>")
}

fn mechanism_at(v: &Value, field: &str) -> Result<Mechanism> {
    let kind_field = format!("{field}.kind");
    let m = match get(v, "kind", field)?.as_str() {
        Some("spatial") => Mechanism::Spatial(state_from_json(get(v, "state", field)?, 4, &format!("{field}.state"))?),
        Some("temporal") => Mechanism::Temporal(TemporalSpec {
            initial: state_from_json(get(v, "initial", field)?, 2, &format!("{field}.initial"))?,
            channel: channel_from_json(get(v, "channel", field)?, &format!("{field}.channel"))?,
            direction: direction_from_json(v.get("direction"), &format!("{field}.direction"))?,
        }),
        Some("mixture") => {
            let list_field = format!("{field}.components");
            let items = get(v, "components", field)?
                .as_array()
                .ok_or_else(|| data(&list_field, "expected an array"))?;
            let parts = items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    let f = format!("{list_field}[{i}]");
                    let w = as_f64(get(item, "weight", &f)?, &format!("{f}.weight"))?;
                    Ok((w, mechanism_at(get(item, "mechanism", &f)?, &format!("{f}.mechanism"))?))
                })
                .collect::<Result<Vec<_>>>()?;
            Mechanism::Mixture(parts)
        }
        _ => return Err(data(&kind_field, "expected spatial, temporal or mixture")),
    };
    m.validate().map_err(|e| data(field, e))?;
    Ok(m)
}

pub fn pseudo_channel_to_json(pc: &PseudoChannel, residual: f64) -> Value {
    json!({
        "choi": matrix_to_json(pc.choi()),
        "direction": pc.direction().as_str(),
        "tau": pc.tau().map(matrix_to_json),
        "negativity": pc.negativity(),
        "cptp": pc.is_cptp(),
        "residual": residual,
    })
}

pub fn estimate_to_csv(est: &CorrelationEstimate) -> String {
    let mut out = String::from("a,b,r_hat,standard_error,shots\n");
    for a in 0..4 {
        for b in 0..4 {
            out.push_str(&format!(
                "{a},{b},{},{},{}\n",
                format_number(est.r_hat[a][b]),
                format_number(est.standard_errors[a][b]),
                est.shots_per_setting
            ));
        }
    }
    out
}

/// Wraps a value as `{key: value}`.
pub fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_density_operator;
    use crate::pdo::pdo_from_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sig12_rounding() {
        assert_eq!(sig12(0.078512345678912345), 0.0785123456789);
        assert_eq!(sig12(-0.0), 0.0);
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(1.234e-9), "1.234e-9");
        assert_eq!(format_number(-0.0), "0");
    }

    #[test]
    fn round_json_touches_only_floats() {
        let v = round_json(json!({"a": [1.0 / 3.0, 7], "b": "x"}));
        assert_eq!(v, json!({"a": [0.333333333333, 7], "b": "x"}));
    }

    #[test]
    fn pdo_json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(139);
        let r = pdo_from_state(&random_density_operator(4, &mut rng).unwrap()).unwrap();
        let v = round_json(pdo_to_json(&r, "test"));
        let back = pdo_from_json(&v).unwrap();
        assert!(back.matrix().max_abs_diff(r.matrix()) < 1e-11);
        let only_table = json!({"pauli_coeffs": v["pauli_coeffs"].clone()});
        assert!(pdo_from_json(&only_table).unwrap().matrix().max_abs_diff(r.matrix()) < 1e-11);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = json!({"matrix": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, "x", 0], [0, 0, 0, 0]]});
        let msg = pdo_from_json(&bad).unwrap_err().to_string();
        assert!(msg.contains("matrix[2][2]"), "{msg}");
        let bad = json!({"pauli_coeffs": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0]]});
        assert!(pdo_from_json(&bad).unwrap_err().to_string().contains("pauli_coeffs"));
        let mech = json!({"kind": "temporal", "initial": {"bloch": [0, 0, 1]}, "channel": {"name": "warp"}});
        assert!(mechanism_from_json(&mech).unwrap_err().to_string().contains("channel.name"));
    }

    #[test]
    fn mechanism_parsing() {
        let mech = json!({
            "kind": "mixture",
            "components": [
                {"weight": 0.5, "mechanism": {"kind": "temporal", "initial": {"ket": [1, 0]}, "channel": {"name": "identity"}}},
                {"weight": 0.5, "mechanism": {"kind": "temporal", "initial": {"bloch": [1, 0, 0]}, "channel": {"name": "depolarizing"}, "direction": "forward"}}
            ]
        });
        let m = mechanism_from_json(&mech).unwrap();
        let r = crate::measurement::reconstruct_exact(&m).unwrap();
        assert!(r.matrix().max_abs_diff(crate::experiments::mixture_counterexample().matrix()) < 1e-12);
    }
}
