//! Canonical JSON emission: object keys sorted, stable float formatting,
//! so identical inputs serialize to identical bytes across runs and
//! thread counts.

use serde::Serialize;

/// Serializes any value to pretty JSON with lexicographically sorted keys.
/// Round-trips through `serde_json::Value`, whose object map is a BTreeMap.
pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = serde_json::to_string_pretty(&v)?;
    out.push('\n');
    Ok(out)
}

/// Serde adapter (de)serializing `BigUint` as a decimal string, keeping
/// arbitrarily large certificate numbers exact in JSON.
pub mod biguint_dec {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<BigUint>()
            .map_err(|e| D::Error::custom(format!("invalid decimal natural: {e}")))
    }
}

/// Same adapter for vectors of naturals.
pub mod biguint_dec_vec {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.into_iter()
            .map(|s| {
                s.parse::<BigUint>()
                    .map_err(|e| D::Error::custom(format!("invalid decimal natural: {e}")))
            })
            .collect()
    }
}
