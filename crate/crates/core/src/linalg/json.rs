//! Matrix exchange format: `{"dim": n, "entries": [[re, im], ...]}` in
//! row-major order. Writers emit every double with 17 significant digits.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use super::ComplexMatrix;

/// Serde adapter around [`ComplexMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJson(pub ComplexMatrix);

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("formatted float is valid json")
}

impl Serialize for MatrixJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let m = &self.0;
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = m[(r, c)];
                entries.push([raw(z.re), raw(z.im)]);
            }
        }
        let mut s = serializer.serialize_struct("Matrix", 2)?;
        s.serialize_field("dim", &n)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

#[derive(Deserialize)]
struct Wire {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl<'de> Deserialize<'de> for MatrixJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(deserializer)?;
        if w.entries.len() != w.dim * w.dim {
            return Err(D::Error::custom(format!(
                "expected {} entries for dim {}, found {}",
                w.dim * w.dim,
                w.dim,
                w.entries.len()
            )));
        }
        if w.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        let m = ComplexMatrix::from_fn(w.dim, w.dim, |r, c| {
            let [re, im] = w.entries[r * w.dim + c];
            Complex64::new(re, im)
        });
        Ok(MatrixJson(m))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson(m.clone())).expect("matrix serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_is_row_major() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.5),
                Complex64::new(3.0, 0.0),
                Complex64::new(-0.25, 4.0),
            ],
        );
        let v: serde_json::Value = serde_json::from_str(&matrix_to_json(&m)).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["entries"][1][0].as_f64(), Some(2.0));
        assert_eq!(v["entries"][1][1].as_f64(), Some(0.5));
        assert_eq!(v["entries"][3][0].as_f64(), Some(-0.25));
        assert!(matrix_to_json(&m).contains("2.0000000000000000e0"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = haar_unitary(6, &mut rng);
        let back: MatrixJson = serde_json::from_str(&matrix_to_json(&u)).unwrap();
        assert_eq!(back.0, u);
    }

    #[test]
    fn rejects_bad_entry_count() {
        let r: Result<MatrixJson, _> = serde_json::from_str(r#"{"dim":2,"entries":[[1,0]]}"#);
        assert!(r.is_err());
    }
}
