//! Irrep labels of so(n) and Gelfand-Tsetlin chain labels.
//!
//! Labels are stored doubled (`2λ`) so that half-odd spinor labels stay exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Format a doubled label as `"p/2"` for half-odd values, plain integer otherwise.
pub fn fmt_twice(t: i32) -> String {
    if t % 2 == 0 {
        format!("{}", t / 2)
    } else {
        format!("{}/2", t)
    }
}

/// Parse `"3"`, `"-1"`, `"5/2"` or `"2.5"` into a doubled label.
pub fn parse_twice(s: &str) -> Result<i32> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let p: i32 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad label {s:?}")))?;
        match den.trim() {
            "2" => Ok(p),
            "1" => Ok(2 * p),
            _ => Err(Error::Parse(format!("label {s:?}: denominator must be 1 or 2"))),
        }
    } else if let Ok(v) = s.parse::<i32>() {
        Ok(2 * v)
    } else {
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad label {s:?}")))?;
        let t = (2.0 * v).round();
        if (2.0 * v - t).abs() > 1e-9 {
            return Err(Error::Parse(format!("label {s:?} is not a half-integer")));
        }
        Ok(t as i32)
    }
}

/// Highest weight of an so(n) irrep: `⌊n/2⌋` labels, non-increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HighestWeight {
    n: usize,
    twice: Vec<i32>,
}

impl HighestWeight {
    /// Build from doubled labels, validating dominance and integrality.
    pub fn from_twice(n: usize, twice: Vec<i32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWeight(format!("n = {n} < 2")));
        }
        let rank = n / 2;
        if twice.len() != rank {
            return Err(Error::InvalidWeight(format!(
                "so({n}) needs {rank} labels, got {}",
                twice.len()
            )));
        }
        let parity = twice[0].rem_euclid(2);
        if twice.iter().any(|t| t.rem_euclid(2) != parity) {
            return Err(Error::InvalidWeight(
                "labels must be all integer or all half-odd".into(),
            ));
        }
        if n > 2 {
            for w in twice.windows(2) {
                if w[0] < w[1] {
                    return Err(Error::InvalidWeight(format!(
                        "labels must be non-increasing: {twice:?}"
                    )));
                }
            }
            let last = *twice.last().unwrap();
            if n % 2 == 1 {
                if last < 0 {
                    return Err(Error::InvalidWeight("negative label for odd n".into()));
                }
            } else if rank >= 2 && twice[rank - 2] < last.abs() {
                return Err(Error::InvalidWeight(format!(
                    "need λ_(r-1) >= |λ_r|: {twice:?}"
                )));
            }
        }
        Ok(Self { n, twice })
    }

    /// Build from ordinary (possibly half-odd) values.
    pub fn new(n: usize, labels: &[f64]) -> Result<Self> {
        let mut twice = Vec::with_capacity(labels.len());
        for &l in labels {
            let t = (2.0 * l).round();
            if (2.0 * l - t).abs() > 1e-9 {
                return Err(Error::InvalidWeight(format!("{l} is not a half-integer")));
            }
            twice.push(t as i32);
        }
        Self::from_twice(n, twice)
    }

    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            twice: vec![0; n / 2],
        }
    }

    /// The defining n-dimensional representation.
    pub fn vector(n: usize) -> Self {
        let mut twice = vec![0; n / 2];
        twice[0] = 2;
        Self { n, twice }
    }

    /// Symmetric traceless rank-2 tensors.
    pub fn symmetric(n: usize) -> Self {
        let mut twice = vec![0; n / 2];
        twice[0] = 4;
        Self { n, twice }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.n / 2
    }

    pub fn twice(&self) -> &[i32] {
        &self.twice
    }

    pub fn values(&self) -> Vec<f64> {
        self.twice.iter().map(|&t| t as f64 / 2.0).collect()
    }

    /// First (largest) label, doubled.
    pub fn first_twice(&self) -> i32 {
        self.twice[0]
    }

    pub fn is_spinorial(&self) -> bool {
        self.twice[0].rem_euclid(2) == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.twice.iter().all(|&t| t == 0)
    }

    /// Quadratic Casimir `Σ λ_i (λ_i + n - 2i)`; for so(2) this is `m²`.
    pub fn casimir2(&self) -> f64 {
        let n = self.n as f64;
        self.values()
            .iter()
            .enumerate()
            .map(|(i, &l)| l * (l + n - 2.0 * (i as f64 + 1.0)))
            .sum()
    }

    /// Eigenvalue of `M12 M34 - M13 M24 + M14 M23` on an so(4) irrep.
    pub fn pfaffian4(&self) -> Option<f64> {
        if self.n != 4 {
            return None;
        }
        let v = self.values();
        Some((v[0] + 1.0) * v[1])
    }

    /// Weyl dimension formula.
    pub fn dim(&self) -> usize {
        let n = self.n;
        if n == 2 {
            return 1;
        }
        let r = self.rank();
        let lam = self.values();
        let d = if n % 2 == 1 {
            let l: Vec<f64> = (0..r).map(|i| lam[i] + (r - i) as f64 - 0.5).collect();
            let m: Vec<f64> = (0..r).map(|i| (r - i) as f64 - 0.5).collect();
            let mut num = 1.0;
            let mut den = 1.0;
            for i in 0..r {
                num *= l[i];
                den *= m[i];
                for j in i + 1..r {
                    num *= l[i] * l[i] - l[j] * l[j];
                    den *= m[i] * m[i] - m[j] * m[j];
                }
            }
            num / den
        } else {
            let l: Vec<f64> = (0..r).map(|i| lam[i] + (r - i - 1) as f64).collect();
            let m: Vec<f64> = (0..r).map(|i| (r - i - 1) as f64).collect();
            let mut num = 1.0;
            let mut den = 1.0;
            for i in 0..r {
                for j in i + 1..r {
                    num *= l[i] * l[i] - l[j] * l[j];
                    den *= m[i] * m[i] - m[j] * m[j];
                }
            }
            num / den
        };
        d.round() as usize
    }

    /// so(n) ↓ so(n-1) branching via the betweenness conditions, ascending
    /// lexicographic order.
    pub fn branch(&self) -> Result<Vec<HighestWeight>> {
        let n = self.n;
        if n < 3 {
            return Err(Error::InvalidWeight(format!("cannot branch so({n})")));
        }
        let lam = &self.twice;
        let r = self.rank();
        // Per-component ranges [lo, hi] in doubled units.
        let ranges: Vec<(i32, i32)> = if n % 2 == 1 {
            (0..r)
                .map(|i| {
                    if i + 1 < r {
                        (lam[i + 1], lam[i])
                    } else {
                        (-lam[i], lam[i])
                    }
                })
                .collect()
        } else {
            (0..r - 1)
                .map(|i| {
                    let lo = if i + 2 < r { lam[i + 1] } else { lam[r - 1].abs() };
                    (lo, lam[i])
                })
                .collect()
        };
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(ranges.len());
        fn rec(
            ranges: &[(i32, i32)],
            cur: &mut Vec<i32>,
            n: usize,
            out: &mut Vec<HighestWeight>,
        ) {
            if cur.len() == ranges.len() {
                out.push(HighestWeight {
                    n: n - 1,
                    twice: cur.clone(),
                });
                return;
            }
            let (lo, hi) = ranges[cur.len()];
            let mut v = lo;
            while v <= hi {
                cur.push(v);
                rec(ranges, cur, n, out);
                cur.pop();
                v += 2;
            }
        }
        rec(&ranges, &mut cur, n, &mut out);
        Ok(out)
    }

    /// All chain labels of this irrep in lexicographic order.
    pub fn chain_labels(&self) -> Vec<ChainLabel> {
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        fn rec(stack: &mut Vec<HighestWeight>, out: &mut Vec<ChainLabel>) {
            let top = stack.last().unwrap().clone();
            if top.n == 2 {
                out.push(ChainLabel {
                    levels: stack.clone(),
                });
                return;
            }
            for child in top.branch().expect("n >= 3") {
                stack.push(child);
                rec(stack, out);
                stack.pop();
            }
        }
        rec(&mut stack, &mut out);
        out
    }

    /// Dominant weights of so(n) with first label at most `max_first_twice`,
    /// in the given spinor sector, ascending lexicographic order.
    pub fn enumerate(n: usize, max_first_twice: i32, spinorial: bool) -> Vec<HighestWeight> {
        let r = n / 2;
        let parity = i32::from(spinorial);
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(r);
        fn rec(n: usize, r: usize, parity: i32, hi: i32, cur: &mut Vec<i32>, out: &mut Vec<HighestWeight>) {
            if cur.len() == r {
                out.push(HighestWeight { n, twice: cur.clone() });
                return;
            }
            let lo = if cur.len() + 1 == r && n % 2 == 0 { -hi } else { parity };
            let mut v = lo;
            while v <= hi {
                cur.push(v);
                rec(n, r, parity, v, cur, out);
                cur.pop();
                v += 2;
            }
        }
        let mut hi = max_first_twice;
        if hi.rem_euclid(2) != parity {
            hi -= 1;
        }
        if hi >= parity {
            rec(n, r, parity, hi, &mut cur, &mut out);
        }
        out.sort();
        out
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.twice.iter().map(|&t| fmt_twice(t)).collect();
        write!(f, "so({})[{}]", self.n, parts.join(","))
    }
}

/// A basis vector label along Spin(n) ⊃ Spin(n-1) ⊃ … ⊃ Spin(2).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainLabel {
    /// `levels[0]` is the so(n) label, the last entry the so(2) label.
    pub levels: Vec<HighestWeight>,
}

impl ChainLabel {
    pub fn top(&self) -> &HighestWeight {
        &self.levels[0]
    }

    /// Label of the so(c) level.
    pub fn level(&self, c: usize) -> &HighestWeight {
        let n = self.levels[0].n;
        &self.levels[n - c]
    }

    /// so(2) label, doubled.
    pub fn m_twice(&self) -> i32 {
        self.levels.last().unwrap().twice[0]
    }

    /// Check the betweenness conditions level by level.
    pub fn validate(&self) -> Result<()> {
        let n = self.levels[0].n;
        if self.levels.len() != n - 1 {
            return Err(Error::InvalidLabel(format!(
                "expected {} levels, got {}",
                n - 1,
                self.levels.len()
            )));
        }
        for w in self.levels.windows(2) {
            if !w[0].branch()?.contains(&w[1]) {
                return Err(Error::InvalidLabel(format!("{} does not contain {}", w[0], w[1])));
            }
        }
        Ok(())
    }

    /// `C₂(so(c))` for c = 2..=n, in that order.
    pub fn casimirs(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(self.levels.iter().rev().map(|hw| hw.casimir2()).collect())
    }

    /// Doubled labels per level, top first.
    pub fn twice_rows(&self) -> Vec<Vec<i32>> {
        self.levels.iter().map(|hw| hw.twice.clone()).collect()
    }
}

impl fmt::Display for ChainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .levels
            .iter()
            .map(|hw| {
                hw.twice
                    .iter()
                    .map(|&t| fmt_twice(t))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}
