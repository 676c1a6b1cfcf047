//! JSON encodings of walk specifications and CSV number formatting.
//!
//! Matrices are written as separate real and imaginary row lists:
//! `{"re": [[...]], "im": [[...]]}`.

use serde::{Deserialize, Serialize};

use crate::error::{OqwError, Result};
use crate::matrixkit::{ComplexMatrix, C64};
use crate::walk::{LinearChainSpec, OqwSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let part = |f: fn(&C64) -> f64| {
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let ragged = |m: &Vec<Vec<f64>>| m.len() != rows || m.iter().any(|r| r.len() != cols);
        if ragged(&self.re) || ragged(&self.im) {
            return Err(OqwError::Parse("matrix re/im parts must be equal-shaped rectangles".into()));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpJson {
    pub from: usize,
    pub to: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OqwSpecJson {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "dH")]
    pub dh: usize,
    pub jumps: Vec<JumpJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub omega: f64,
    pub unitaries: Vec<MatrixJson>,
}

pub fn spec_to_json(spec: &OqwSpec) -> String {
    let jumps = spec
        .jumps()
        .iter()
        .map(|(&(from, to), b)| {
            let m = MatrixJson::from(b);
            JumpJson { from, to, re: m.re, im: m.im }
        })
        .collect();
    let doc = OqwSpecJson {
        n: spec.n_nodes(),
        dh: spec.walker_dim(),
        jumps,
    };
    serde_json::to_string_pretty(&doc).expect("spec serializes")
}

fn parse_err(e: serde_json::Error) -> OqwError {
    OqwError::Parse(e.to_string())
}

/// Shapes and indices are checked; completeness is left to `walk::validate`.
pub fn spec_from_json(text: &str) -> Result<OqwSpec> {
    let doc: OqwSpecJson = serde_json::from_str(text).map_err(parse_err)?;
    let mut jumps = std::collections::BTreeMap::new();
    for j in doc.jumps {
        let m = MatrixJson { re: j.re, im: j.im }.to_matrix()?;
        if jumps.insert((j.from, j.to), m).is_some() {
            return Err(OqwError::Parse(format!("duplicate jump {}->{}", j.from, j.to)));
        }
    }
    OqwSpec::new(doc.n, doc.dh, jumps)
}

pub fn chain_to_json(chain: &LinearChainSpec) -> String {
    let doc = ChainJson {
        n: chain.n_nodes(),
        omega: chain.omega(),
        unitaries: chain.unitaries().iter().map(MatrixJson::from).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("chain serializes")
}

/// Parsed chain document before unitarity is checked.
pub fn chain_doc_from_json(text: &str) -> Result<(usize, f64, Vec<ComplexMatrix>)> {
    let doc: ChainJson = serde_json::from_str(text).map_err(parse_err)?;
    let unitaries = doc
        .unitaries
        .iter()
        .map(MatrixJson::to_matrix)
        .collect::<Result<Vec<_>>>()?;
    Ok((doc.n, doc.omega, unitaries))
}

pub fn chain_from_json(text: &str) -> Result<LinearChainSpec> {
    let (n, omega, unitaries) = chain_doc_from_json(text)?;
    LinearChainSpec::new(n, omega, unitaries)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = fields
        .into_iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}
