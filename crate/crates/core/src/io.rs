//! JSON/CSV encodings. Reals are written with 17 significant digits, labels
//! as exact strings (`"3/2"`, `"2"`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::algebra::{m_pairs, t_pairs};
use crate::clebsch::CGTable;
use crate::contracted::{k_left, m_right, tensor_coords, BlockOperator, NaturalBasis};
use crate::decontract::{t_matrix_elements, ShearContext, SigmaLabels};
use crate::error::{Error, Result};
use crate::labels::{fmt_twice, parse_twice, ChainLabel, HighestWeight};
use crate::linalg::{zeros, CMat, C64};

/// 17 significant digits, scientific notation, no negative zero.
pub fn fmt_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// A real serialized verbatim with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(fmt_real(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn complex_pair(z: C64) -> [Real; 2] {
    [Real(z.re), Real(z.im)]
}

pub fn labels_json(hw: &HighestWeight) -> Vec<String> {
    hw.twice().iter().map(|&t| fmt_twice(t)).collect()
}

pub fn labels_parse(n: usize, labels: &[String]) -> Result<HighestWeight> {
    let twice = labels.iter().map(|s| parse_twice(s)).collect::<Result<Vec<_>>>()?;
    HighestWeight::from_twice(n, twice)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgTableJson {
    pub n: usize,
    pub hw1: Vec<String>,
    pub hw2: Vec<String>,
    pub hw3: Vec<String>,
    pub gamma: usize,
    /// `[i1, i2, i3, [re, im]]`, chain-basis indices.
    pub entries: Vec<(usize, usize, usize, [Real; 2])>,
}

impl CgTableJson {
    pub fn from_table(t: &CGTable) -> Self {
        Self {
            n: t.hw1.n(),
            hw1: labels_json(&t.hw1),
            hw2: labels_json(&t.hw2),
            hw3: labels_json(&t.hw3),
            gamma: t.gamma,
            entries: t
                .entries(0.0)
                .into_iter()
                .map(|(a, b, c, z)| (a, b, c, complex_pair(z)))
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<CGTable> {
        let hw1 = labels_parse(self.n, &self.hw1)?;
        let hw2 = labels_parse(self.n, &self.hw2)?;
        let hw3 = labels_parse(self.n, &self.hw3)?;
        let (d1, d2, d3) = (hw1.dim(), hw2.dim(), hw3.dim());
        let mut m = zeros(d1 * d2, d3);
        for &(a, b, c, [re, im]) in &self.entries {
            if a >= d1 || b >= d2 || c >= d3 {
                return Err(Error::Parse(format!("CG entry ({a},{b},{c}) out of range")));
            }
            m[(a * d2 + b, c)] = C64::new(re.0, im.0);
        }
        Ok(CGTable {
            hw1,
            hw2,
            hw3,
            gamma: self.gamma,
            matrix: m,
        })
    }
}

/// Echo of the job that produced a document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: String,
    pub n: usize,
    pub cutoff: String,
    pub spinorial: bool,
    /// `σ̃` as `[re, im]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub format: String,
}

/// `[J-labels, k-levels, m-levels]` of one basis vector. The chain levels
/// run from so(n−1) down to so(2); the so(n) level is `J` itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry(pub Vec<String>, pub Vec<Vec<String>>, pub Vec<Vec<String>>);

fn chain_levels(l: &ChainLabel) -> Vec<Vec<String>> {
    l.levels[1..].iter().map(labels_json).collect()
}

impl BasisEntry {
    pub fn new(j: &HighestWeight, k: &ChainLabel, m: &ChainLabel) -> Self {
        Self(labels_json(j), chain_levels(k), chain_levels(m))
    }
}

pub type Triplet = (usize, usize, [Real; 2]);

/// Sparse operators on a natural basis together with the basis manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub meta: JobConfig,
    pub basis: Vec<BasisEntry>,
    pub operators: BTreeMap<String, Vec<Triplet>>,
}

/// Entries at or below this modulus are omitted from the triplet lists.
pub const TRIPLET_TOL: f64 = 1e-14;

#[derive(Debug, Serialize, Deserialize)]
struct CsvEntry {
    operator: String,
    row: usize,
    col: usize,
    re: String,
    im: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvBasis {
    index: usize,
    j: String,
    k: String,
    m: String,
}

fn join_levels(levels: &[Vec<String>]) -> String {
    levels.iter().map(|l| l.join(" ")).collect::<Vec<_>>().join(";")
}

fn split_levels(s: &str) -> Vec<Vec<String>> {
    if s.is_empty() {
        return Vec::new();
    }
    s.split(';').map(|l| l.split(' ').map(str::to_string).collect()).collect()
}

fn parse_real(s: &str) -> Result<Real> {
    s.trim().parse().map(Real).map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

impl OperatorDocument {
    pub fn new(meta: JobConfig, basis: &NaturalBasis) -> Self {
        Self {
            meta,
            basis: basis.vectors().iter().map(|(j, k, m)| BasisEntry::new(j, k, m)).collect(),
            operators: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, op: &BlockOperator) {
        let t = op
            .triplets(TRIPLET_TOL)
            .into_iter()
            .map(|(r, c, z)| (r, c, complex_pair(z)))
            .collect();
        self.operators.insert(name.to_string(), t);
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dense(&self, name: &str) -> Option<CMat> {
        let d = self.dim();
        let t = self.operators.get(name)?;
        let mut m = zeros(d, d);
        for &(r, c, [re, im]) in t {
            m[(r, c)] = C64::new(re.0, im.0);
        }
        Some(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        doc.check()?;
        Ok(doc)
    }

    /// Operator triplets and the basis manifest as two CSV texts. Numbers
    /// are the same strings the JSON encoding writes.
    pub fn to_csv(&self) -> Result<(String, String)> {
        let mut ops = csv::Writer::from_writer(Vec::new());
        for (name, t) in &self.operators {
            for &(row, col, [re, im]) in t {
                ops.serialize(CsvEntry {
                    operator: name.clone(),
                    row,
                    col,
                    re: fmt_real(re.0),
                    im: fmt_real(im.0),
                })
                .map_err(csv_err)?;
            }
        }
        let mut basis = csv::Writer::from_writer(Vec::new());
        for (index, BasisEntry(j, k, m)) in self.basis.iter().enumerate() {
            basis
                .serialize(CsvBasis {
                    index,
                    j: j.join(" "),
                    k: join_levels(k),
                    m: join_levels(m),
                })
                .map_err(csv_err)?;
        }
        let text = |w: csv::Writer<Vec<u8>>| -> Result<String> {
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
        };
        Ok((text(ops)?, text(basis)?))
    }

    pub fn from_csv(meta: JobConfig, operators: &str, basis: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, rec) in csv::Reader::from_reader(basis.as_bytes()).deserialize::<CsvBasis>().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.index != i {
                return Err(Error::Parse(format!("basis row {i} has index {}", rec.index)));
            }
            let j = rec.j.split(' ').map(str::to_string).collect();
            entries.push(BasisEntry(j, split_levels(&rec.k), split_levels(&rec.m)));
        }
        let mut ops: BTreeMap<String, Vec<Triplet>> = BTreeMap::new();
        for rec in csv::Reader::from_reader(operators.as_bytes()).deserialize::<CsvEntry>() {
            let rec = rec.map_err(csv_err)?;
            let z = [parse_real(&rec.re)?, parse_real(&rec.im)?];
            ops.entry(rec.operator).or_default().push((rec.row, rec.col, z));
        }
        let doc = Self {
            meta,
            basis: entries,
            operators: ops,
        };
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<()> {
        let d = self.dim();
        for (name, t) in &self.operators {
            if let Some(&(r, c, _)) = t.iter().find(|&&(r, c, _)| r >= d || c >= d) {
                return Err(Error::Parse(format!("{name}: entry ({r},{c}) outside a basis of {d}")));
            }
        }
        for BasisEntry(j, k, m) in &self.basis {
            for s in j.iter().chain(k.iter().flatten()).chain(m.iter().flatten()) {
                parse_twice(s)?;
            }
        }
        Ok(())
    }
}

/// `M_ab`, `K_ab` and `T_ab` (closed matrix-element form, `σ̃` labels) for
/// the configuration in `meta`.
pub fn generators_document(meta: JobConfig, sigma_tilde: &SigmaLabels) -> Result<OperatorDocument> {
    let n = meta.n;
    let basis = NaturalBasis::new(n, parse_twice(&meta.cutoff)?, meta.spinorial)?;
    let ctx = ShearContext::new(basis.clone())?;
    let mut doc = OperatorDocument::new(meta, &basis);
    for (a, b) in m_pairs(n) {
        doc.insert(&format!("M_{a}{b}"), &m_right(&basis, a, b));
        doc.insert(&format!("K_{a}{b}"), &k_left(&basis, a, b));
    }
    for (a, b) in t_pairs(n) {
        doc.insert(&format!("T_{a}{b}"), &t_matrix_elements(&ctx, sigma_tilde, &tensor_coords(n, a, b)?)?);
    }
    Ok(doc)
}
