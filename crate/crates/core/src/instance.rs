//! Instance files: a seed matrix, named operators, optional A-unit vectors
//! and optional replay metadata, stored as one JSON document.
//!
//! ```json
//! {"dim": 2, "cutoff": 1e-10,
//!  "A": {"re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]},
//!  "operators": {"T": {"re": [[0, 1], [0, 0]]}},
//!  "vectors": [{"re": [1, 0]}]}
//! ```
//!
//! Matrices are nested row-major arrays; `im` may be omitted for real data.
//! Writers emit 17 significant digits so every value round-trips exactly.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{CheckOptions, OperandBundle};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ComplexVector, Tolerances};
use crate::space::SemiHilbertSpace;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<CheckOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Slack of each check recorded when the instance was generated.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub recorded: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub cutoff: f64,
    pub a: ComplexMatrix,
    pub operators: BTreeMap<String, ComplexMatrix>,
    pub vectors: Vec<ComplexVector>,
    pub meta: Option<InstanceMeta>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    dim: usize,
    #[serde(default = "default_cutoff")]
    cutoff: f64,
    #[serde(rename = "A")]
    a: MatrixRepr,
    #[serde(default)]
    operators: BTreeMap<String, MatrixRepr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vectors: Vec<VectorRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

fn default_cutoff() -> f64 {
    Tolerances::default().cutoff
}

impl MatrixRepr {
    fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&crate::linalg::Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self {
            re: rows(|z| z.re),
            im: Some(rows(|z| z.im)),
        }
    }
}

/// Line and column of the value of a nested key, for diagnostics on
/// documents that parsed but failed validation.
fn locate(text: &str, path: &[&str]) -> (usize, usize) {
    let mut pos = 0;
    for key in path {
        let quoted = format!("\"{key}\"");
        match text[pos..].find(&quoted) {
            Some(off) => pos += off,
            None => break,
        }
    }
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

struct Validator<'t> {
    text: &'t str,
    dim: usize,
}

impl Validator<'_> {
    fn fail(&self, path: &[&str], message: String) -> Error {
        let (line, column) = locate(self.text, path);
        Error::Parse {
            line,
            column,
            field: Some(path.join(".")),
            message,
        }
    }

    fn matrix(&self, repr: &MatrixRepr, path: &[&str]) -> Result<ComplexMatrix> {
        let n = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&repr.re) {
            return Err(self.fail(path, format!("real part must be {n}x{n}")));
        }
        if let Some(im) = &repr.im {
            if !shape_ok(im) {
                return Err(self.fail(path, format!("imaginary part must be {n}x{n}")));
            }
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            c64(repr.re[i][j], repr.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }

    fn vector(&self, repr: &VectorRepr, index: usize) -> Result<ComplexVector> {
        let n = self.dim;
        let ok = repr.re.len() == n && repr.im.as_ref().is_none_or(|im| im.len() == n);
        if !ok {
            let label = format!("vectors[{index}]");
            return Err(self.fail(&["vectors", &label], format!("vector must have length {n}")));
        }
        Ok(ComplexVector::from_fn(n, |i, _| {
            c64(repr.re[i], repr.im.as_ref().map_or(0.0, |im| im[i]))
        }))
    }
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let repr: InstanceRepr = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                line: inner.line(),
                column: inner.column(),
                field: (path != ".").then_some(path),
                message: inner.to_string(),
            }
        })?;
        let v = Validator { text, dim: repr.dim };
        if !(repr.cutoff >= 0.0 && repr.cutoff < 1.0) {
            return Err(v.fail(&["cutoff"], format!("cutoff {} outside [0, 1)", repr.cutoff)));
        }
        let a = v.matrix(&repr.a, &["A"])?;
        let mut operators = BTreeMap::new();
        for (name, m) in &repr.operators {
            operators.insert(name.clone(), v.matrix(m, &["operators", name])?);
        }
        let vectors = repr
            .vectors
            .iter()
            .enumerate()
            .map(|(k, x)| v.vector(x, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cutoff: repr.cutoff,
            a,
            operators,
            vectors,
            meta: repr.meta,
        })
    }

    pub fn to_json(&self) -> String {
        let repr = InstanceRepr {
            dim: self.dim(),
            cutoff: self.cutoff,
            a: MatrixRepr::from_matrix(&self.a),
            operators: self.operators.iter().map(|(k, m)| (k.clone(), MatrixRepr::from_matrix(m))).collect(),
            vectors: self
                .vectors
                .iter()
                .map(|x| VectorRepr {
                    re: x.iter().map(|z| z.re).collect(),
                    im: Some(x.iter().map(|z| z.im).collect()),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
        repr.serialize(&mut ser).expect("in-memory serialization cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    /// Tolerances from the metadata, with the top-level cutoff applied.
    pub fn tolerances(&self) -> Tolerances {
        let base = self.meta.as_ref().and_then(|m| m.tolerances).unwrap_or_default();
        Tolerances {
            cutoff: self.cutoff,
            ..base
        }
    }

    pub fn options(&self) -> CheckOptions {
        self.meta.as_ref().and_then(|m| m.options).unwrap_or_default()
    }

    pub fn space(&self) -> Result<SemiHilbertSpace> {
        SemiHilbertSpace::new(&self.a, self.tolerances())
    }

    pub fn bundle(&self) -> OperandBundle {
        OperandBundle {
            operators: self.operators.clone(),
            vectors: self.vectors.clone(),
        }
    }
}

/// Compact JSON with every float printed to 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}
