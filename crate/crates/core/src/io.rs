//! JSON operator/state files and CSV tables.
//!
//! Operators are stored as `{"dims":[dA,dB],"matrix":[[[re,im],...],...]}`
//! in row-major order; states carry an extra `"kind":"density"`. Floats are
//! written in shortest round-trip form, so a write/read cycle is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UewError};
use crate::linalg::HermitianOperator;
use crate::states::DensityMatrix;

/// Hermiticity tolerance applied to matrices read from disk.
pub const LOAD_HERMITIAN_TOL: f64 = 1e-10;

pub const DENSITY_KIND: &str = "density";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl OperatorFile {
    pub fn from_operator(op: &HermitianOperator, kind: Option<&str>) -> Self {
        let n = op.dim();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = op.entry(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        OperatorFile {
            kind: kind.map(str::to_owned),
            dims: [op.dims().0, op.dims().1],
            matrix,
        }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let dims = (self.dims[0], self.dims[1]);
        let n = dims.0 * dims.1;
        if dims.0 == 0 || dims.1 == 0 {
            return Err(UewError::InvalidParameter("dims must be positive".into()));
        }
        if self.matrix.len() != n {
            return Err(UewError::DimensionMismatch {
                expected: n,
                found: self.matrix.len(),
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in &self.matrix {
            if row.len() != n {
                return Err(UewError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(UewError::Parse("matrix entries must be finite".into()));
        }
        HermitianOperator::new_symmetrized(dims, entries, LOAD_HERMITIAN_TOL)
    }
}

pub fn parse_operator(text: &str) -> Result<HermitianOperator> {
    let file: OperatorFile = serde_json::from_str(text)?;
    file.to_operator()
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: OperatorFile = serde_json::from_str(text)?;
    match file.kind.as_deref() {
        Some(DENSITY_KIND) | None => {}
        Some(other) => {
            return Err(UewError::NotADensityMatrix(format!(
                "file kind is '{other}', expected '{DENSITY_KIND}'"
            )))
        }
    }
    DensityMatrix::new(file.to_operator()?)
}

pub fn operator_to_json(op: &HermitianOperator) -> String {
    to_json(&OperatorFile::from_operator(op, None))
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    to_json(&OperatorFile::from_operator(rho.op(), Some(DENSITY_KIND)))
}

fn to_json(file: &OperatorFile) -> String {
    serde_json::to_string(file).expect("finite floats always serialize")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| UewError::Io(format!("{}: {e}", path.display())))
}

pub fn load_operator(path: &Path) -> Result<HermitianOperator> {
    parse_operator(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn load_state(path: &Path) -> Result<DensityMatrix> {
    parse_state(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn save_operator(path: &Path, op: &HermitianOperator) -> Result<()> {
    fs::write(path, operator_to_json(op) + "\n")?;
    Ok(())
}

pub fn save_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    fs::write(path, state_to_json(rho) + "\n")?;
    Ok(())
}

fn with_path(path: &Path, e: UewError) -> UewError {
    match e {
        UewError::Parse(m) => UewError::Parse(format!("{}: {m}", path.display())),
        UewError::NotADensityMatrix(m) => UewError::NotADensityMatrix(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes a header and rows as CSV with LF line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| UewError::Io(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density_matrix_with, random_ket_with};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_round_trip() {
        let op = HermitianOperator::identity((2, 2)).unwrap();
        let text = operator_to_json(&op);
        assert!(text.starts_with("{\"dims\":[2,2]"));
        assert_eq!(parse_operator(&text).unwrap(), op);
    }

    #[test]
    fn state_kind_written_and_checked() {
        let rho = DensityMatrix::maximally_mixed((2, 2)).unwrap();
        let text = state_to_json(&rho);
        assert!(text.contains("\"kind\":\"density\""));
        assert_eq!(parse_state(&text).unwrap(), rho);
        let wrong = text.replace("density", "operator");
        assert!(matches!(parse_state(&wrong), Err(UewError::NotADensityMatrix(_))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_operator("{"), Err(UewError::Parse(_))));
        assert!(matches!(
            parse_operator(r#"{"dims":[1,2],"matrix":[[[1,0]]]}"#),
            Err(UewError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse_operator(r#"{"dims":[1,2],"matrix":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#),
            Err(UewError::NotHermitian(_))
        ));
        assert!(parse_operator(r#"{"dims":[1,1],"matrix":[[[1,0]]],"extra":1}"#).is_err());
    }

    #[test]
    fn tiny_asymmetry_symmetrized() {
        let op = parse_operator(r#"{"dims":[1,2],"matrix":[[[1,0],[0.5,1e-11]],[[0.5,0],[0,0]]]}"#).unwrap();
        assert_eq!(op.entry(0, 1), op.entry(1, 0).conj());
    }

    #[test]
    fn non_psd_state_rejected() {
        let text = r#"{"kind":"density","dims":[1,2],"matrix":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#;
        assert!(matches!(parse_state(text), Err(UewError::NotADensityMatrix(_))));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let rows = vec![
            vec!["a,b".to_string(), fmt_f64(0.1), fmt_f64(1.0 / 3.0)],
            vec!["plain".to_string(), fmt_f64(-0.0), fmt_f64(1e-20)],
        ];
        write_csv(&mut buf, &["label", "x", "y"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "label,x,y\n\"a,b\",0.1,0.3333333333333333\nplain,-0,0.00000000000000000001\n"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn header_only_csv() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["label", "x", "y"], &[]).unwrap();
        assert_eq!(buf, b"label,x,y\n");
    }

    proptest! {
        #[test]
        fn random_state_round_trip_is_exact(seed in any::<u64>(), rank in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix_with(&mut rng, (2, 2), rank).unwrap();
            let back = parse_state(&state_to_json(&rho)).unwrap();
            prop_assert_eq!(back, rho);
        }

        #[test]
        fn shortest_float_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }

        #[test]
        fn random_operator_round_trip_is_exact(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_ket_with(&mut rng, 6);
            let op = k.projector().scale(3.7).with_dims((2, 3)).unwrap();
            prop_assert_eq!(parse_operator(&operator_to_json(&op)).unwrap(), op);
        }
    }
}
