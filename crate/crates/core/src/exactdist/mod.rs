//! Exact probability mass functions of the two tree statistics:
//!
//! * `X`: the number of partitioning passes multiple selection performs to
//!   isolate p ranks in a file of n distinct keys — equivalently the node
//!   count of the subtree spanning the root and the p selected nodes of the
//!   corresponding binary search tree;
//! * `Y`: the node count of the minimal subtree spanning just the p selected
//!   nodes.
//!
//! Tables are built by exact integer dynamic programming over the
//! generating-function coefficient recurrences and validated against an
//! exhaustive enumeration oracle.

mod brute;
mod build;

pub use brute::{brute_force_pmfs, BruteForcePmfs, BRUTE_FORCE_MAX_N};
pub use build::{build_x_table, build_x_table_with_budget, build_y_table, build_y_table_with_budget};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{big_ratio_to_f64, binomial, factorial, Rational};

/// Which statistic a table (or report) describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    X,
    Y,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::X => "X",
            Kind::Y => "Y",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "X" => Ok(Kind::X),
            "y" | "Y" => Ok(Kind::Y),
            other => Err(format!("unknown kind {other:?}, expected x or y")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExactDistError {
    #[error("p_max = {p_max} exceeds n_max = {n_max}")]
    PMaxExceedsNMax { n_max: usize, p_max: usize },
    #[error("estimated table size {estimate} bytes exceeds the budget of {budget} bytes")]
    BudgetExceeded { estimate: u64, budget: u64 },
    #[error("(n, p) = ({n}, {p}) outside table range (n_max {n_max}, p_max {p_max}, p <= n)")]
    OutOfRange {
        n: usize,
        p: usize,
        n_max: usize,
        p_max: usize,
    },
    #[error("table kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: Kind, got: Kind },
    #[error("x table covers (n_max {have_n}, p_max {have_p}), need (n_max {need_n}, p_max {need_p})")]
    InsufficientXTable {
        have_n: usize,
        have_p: usize,
        need_n: usize,
        need_p: usize,
    },
    #[error("n = {n} exceeds the exhaustive-enumeration bound {max}")]
    TooLargeForBruteForce { n: usize, max: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("corrupt table data: {0}")]
    CorruptTable(String),
}

/// Default memory budget for table builds; admits roughly
/// (n_max, p_max) = (160, 5) and rejects sizes well beyond that.
pub const DEFAULT_TABLE_BUDGET_BYTES: u64 = 16 * 1024 * 1024;

/// Contiguous run of nonzero mass over the inner support index m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Band {
    pub lo: usize,
    pub coef: Vec<BigInt>,
}

impl Band {
    pub fn empty() -> Self {
        Band {
            lo: 0,
            coef: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn hi(&self) -> usize {
        self.lo + self.coef.len().saturating_sub(1)
    }

    pub fn get(&self, m: usize) -> Option<&BigInt> {
        if m < self.lo {
            return None;
        }
        self.coef.get(m - self.lo)
    }

    /// Trim zero entries off both ends of a full-range vector.
    pub fn from_full(full: Vec<BigInt>) -> Self {
        let lo = match full.iter().position(|c| !c.is_zero()) {
            Some(i) => i,
            None => return Band::empty(),
        };
        let hi = full.iter().rposition(|c| !c.is_zero()).unwrap();
        Band {
            lo,
            coef: full[lo..=hi].to_vec(),
        }
    }
}

/// Exact distribution table for one statistic.
///
/// Entry (n, p, m) semantically holds the weighted coefficient
/// C(n, p) * P{stat_{n,p} = m}; internally the table stores the integer
/// instance count n! * C(n, p) * P, which the coefficient recurrences
/// propagate without any division.
#[derive(Debug, Clone)]
pub struct WeightedDistTable {
    kind: Kind,
    n_max: usize,
    p_max: usize,
    /// layers[n][p] — counts over m; p axis truncated to min(n, p_max) + 1.
    pub(crate) layers: Vec<Vec<Band>>,
    pub(crate) factorials: Vec<BigInt>,
}

/// Exact moments extracted from one table entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMoments {
    pub mean: Rational,
    pub second_factorial: Rational,
    pub variance: Rational,
}

impl WeightedDistTable {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn covers(&self, n: usize, p: usize) -> bool {
        n <= self.n_max && p <= self.p_max && p <= n
    }

    fn check_range(&self, n: usize, p: usize) -> Result<(), ExactDistError> {
        if !self.covers(n, p) {
            return Err(ExactDistError::OutOfRange {
                n,
                p,
                n_max: self.n_max,
                p_max: self.p_max,
            });
        }
        Ok(())
    }

    /// Raw instance count n! * C(n,p) * P{stat = m}.
    pub fn count(&self, n: usize, p: usize, m: usize) -> Result<BigInt, ExactDistError> {
        self.check_range(n, p)?;
        Ok(self.layers[n][p].get(m).cloned().unwrap_or_else(BigInt::zero))
    }

    /// Weighted coefficient C(n,p) * P{stat = m} in lowest terms.
    pub fn weight(&self, n: usize, p: usize, m: usize) -> Result<Rational, ExactDistError> {
        self.check_range(n, p)?;
        let c = self.layers[n][p].get(m).cloned().unwrap_or_else(BigInt::zero);
        Ok(Rational::new(c, self.factorials[n].clone()))
    }

    /// Support range [lo, hi] of nonzero mass, if any.
    pub fn support(&self, n: usize, p: usize) -> Result<Option<(usize, usize)>, ExactDistError> {
        self.check_range(n, p)?;
        let band = &self.layers[n][p];
        if band.is_empty() {
            Ok(None)
        } else {
            Ok(Some((band.lo, band.hi())))
        }
    }

    /// Exact pmf as (m, probability) pairs with nonzero mass; sums to 1.
    pub fn pmf(&self, n: usize, p: usize) -> Result<Vec<(usize, Rational)>, ExactDistError> {
        self.check_range(n, p)?;
        let total = &self.factorials[n] * binomial(n as u64, p as i64);
        let band = &self.layers[n][p];
        let mut out = Vec::with_capacity(band.coef.len());
        for (i, c) in band.coef.iter().enumerate() {
            if !c.is_zero() {
                out.push((band.lo + i, Rational::new(c.clone(), total.clone())));
            }
        }
        Ok(out)
    }

    /// Probability generating function sum_m P{stat = m} v^m at exact rational v.
    pub fn pgf_rational(&self, n: usize, p: usize, v: &Rational) -> Result<Rational, ExactDistError> {
        self.check_range(n, p)?;
        let band = &self.layers[n][p];
        // Horner over the band, then shift by v^lo.
        let mut acc = Rational::zero();
        for c in band.coef.iter().rev() {
            acc = acc * v + Rational::from(c.clone());
        }
        let mut shift = Rational::one();
        for _ in 0..band.lo {
            shift *= v;
        }
        let total = &self.factorials[n] * binomial(n as u64, p as i64);
        Ok(acc * shift / Rational::from(total))
    }

    /// Probability generating function at float v.
    pub fn pgf_f64(&self, n: usize, p: usize, v: f64) -> Result<f64, ExactDistError> {
        self.check_range(n, p)?;
        let band = &self.layers[n][p];
        let total = &self.factorials[n] * binomial(n as u64, p as i64);
        let mut acc = 0.0f64;
        let mut vp = v.powi(band.lo as i32);
        for c in band.coef.iter() {
            acc += big_ratio_to_f64(c, &total) * vp;
            vp *= v;
        }
        Ok(acc)
    }

    /// Exact mean, second factorial moment and variance of one entry.
    pub fn moments_from_table(&self, n: usize, p: usize) -> Result<TableMoments, ExactDistError> {
        self.check_range(n, p)?;
        let band = &self.layers[n][p];
        let total = &self.factorials[n] * binomial(n as u64, p as i64);
        let mut sum_m = BigInt::zero();
        let mut sum_m2 = BigInt::zero();
        for (i, c) in band.coef.iter().enumerate() {
            let m = band.lo + i;
            sum_m += c * BigInt::from(m);
            sum_m2 += c * BigInt::from(m * m.saturating_sub(1));
        }
        let mean = Rational::new(sum_m, total.clone());
        let second_factorial = Rational::new(sum_m2, total);
        let variance = &second_factorial + &mean - &mean * &mean;
        Ok(TableMoments {
            mean,
            second_factorial,
            variance,
        })
    }

    /// Serializable form: one entry per nonzero weighted coefficient, in
    /// (n, p, m) order, num/den in lowest terms as decimal strings.
    pub fn to_json(&self) -> TableJson {
        let mut entries = Vec::new();
        for n in 0..=self.n_max {
            for p in 0..self.layers[n].len() {
                let band = &self.layers[n][p];
                for (i, c) in band.coef.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let w = Rational::new(c.clone(), self.factorials[n].clone());
                    entries.push(TableEntryJson {
                        n,
                        p,
                        m: band.lo + i,
                        num: w.numer().to_string(),
                        den: w.denom().to_string(),
                    });
                }
            }
        }
        TableJson {
            kind: self.kind,
            n_max: self.n_max,
            p_max: self.p_max,
            entries,
        }
    }

    /// Rebuild a table from its serialized form, re-deriving the integer
    /// counts and rejecting entries that are not valid weighted coefficients.
    pub fn from_json(json: &TableJson) -> Result<Self, ExactDistError> {
        if json.p_max > json.n_max {
            return Err(ExactDistError::PMaxExceedsNMax {
                n_max: json.n_max,
                p_max: json.p_max,
            });
        }
        let factorials: Vec<BigInt> = (0..=json.n_max as u64).map(factorial).collect();
        let mut full: Vec<Vec<Vec<BigInt>>> = (0..=json.n_max)
            .map(|n| vec![vec![BigInt::zero(); n + 2]; json.p_max.min(n) + 1])
            .collect();
        for e in &json.entries {
            if e.n > json.n_max || e.p > json.p_max.min(e.n) || e.m > e.n {
                return Err(ExactDistError::CorruptTable(format!(
                    "entry ({}, {}, {}) out of range",
                    e.n, e.p, e.m
                )));
            }
            let num: BigInt = e.num.parse().map_err(|_| {
                ExactDistError::CorruptTable(format!("bad numerator {:?}", e.num))
            })?;
            let den: BigInt = e.den.parse().map_err(|_| {
                ExactDistError::CorruptTable(format!("bad denominator {:?}", e.den))
            })?;
            if den.is_zero() || den.is_negative() || num.is_negative() {
                return Err(ExactDistError::CorruptTable(
                    "weights must be nonnegative with positive denominator".into(),
                ));
            }
            // count = num * n! / den must be an exact integer
            let scaled = num * &factorials[e.n];
            let (q, r) = num_integer::Integer::div_rem(&scaled, &den);
            if !r.is_zero() {
                return Err(ExactDistError::CorruptTable(format!(
                    "entry ({}, {}, {}) is not an exact weighted coefficient",
                    e.n, e.p, e.m
                )));
            }
            full[e.n][e.p][e.m] = q;
        }
        let layers = full
            .into_iter()
            .map(|ps| ps.into_iter().map(Band::from_full).collect())
            .collect();
        Ok(WeightedDistTable {
            kind: json.kind,
            n_max: json.n_max,
            p_max: json.p_max,
            layers,
            factorials,
        })
    }
}

/// On-disk format for cached tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub kind: Kind,
    pub n_max: usize,
    pub p_max: usize,
    pub entries: Vec<TableEntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntryJson {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub num: String,
    pub den: String,
}

/// Exact probability that the tree root belongs to the minimal subtree
/// spanning a uniform p-subset of the n nodes (equivalently P{X = Y}):
/// 1 - 2(n - p) / (n (p + 1)).
pub fn root_in_span_prob(n: usize, p: usize) -> Result<Rational, ExactDistError> {
    if p == 0 || p > n {
        return Err(ExactDistError::InvalidParameters(format!(
            "need 1 <= p <= n, got n = {n}, p = {p}"
        )));
    }
    let num = BigInt::from(2 * (n - p) as u64);
    let den = BigInt::from(n as u64) * BigInt::from((p + 1) as u64);
    Ok(Rational::one() - Rational::new(num, den))
}
