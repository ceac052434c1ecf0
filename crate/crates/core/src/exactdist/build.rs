//! Table construction by layered integer dynamic programming.
//!
//! With counts W[n][p][m] = n! * C(n,p) * P{X_{n,p} = m} the pass-count
//! recurrence reads, per target layer n+1,
//!
//! ```text
//! W[n+1][p][m] = A_p[m-1] + A_{p-1}[m-1],
//! A_q[m] = sum_{i=0}^{q} sum_{k=0}^{n} C(n,k) (W[k][i] conv_m W[n-k][q-i])[m],
//! ```
//!
//! where the i = 0 and i = q edge terms collapse to weighted prefix sums over
//! earlier layers (the p = 0 factor has all mass at m = 0) and A_0 is the
//! pure prefix square (n+1)! at m = 0. The span-size counts satisfy
//!
//! ```text
//! Y[n+1][p][m] = M_p[m-1] + A_{p-1}[m-1] + 2 T[p][m],
//! ```
//!
//! with M_q the middle part of A_q (1 <= i <= q-1) and T the weighted prefix
//! sum of Y's own layers. Everything stays an integer; there is no division.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::factorial;

use super::{Band, ExactDistError, Kind, WeightedDistTable, DEFAULT_TABLE_BUDGET_BYTES};

/// Rough per-table memory estimate used by the budget guard.
fn estimate_bytes(n_max: usize, p_max: usize) -> u64 {
    let mut total = 0u64;
    for n in 1..=n_max as u64 {
        let entries = (p_max as u64 + 1).min(n + 1) * n;
        // digits of n!-scale integers plus allocation overhead
        let bytes_per = n * (64 - n.leading_zeros() as u64) / 8 + 48;
        total += entries * bytes_per;
    }
    total
}

fn check_build_args(n_max: usize, p_max: usize, budget: u64) -> Result<(), ExactDistError> {
    if p_max > n_max {
        return Err(ExactDistError::PMaxExceedsNMax { n_max, p_max });
    }
    if n_max == 0 {
        return Err(ExactDistError::InvalidParameters(
            "n_max must be at least 1".into(),
        ));
    }
    let estimate = estimate_bytes(n_max, p_max);
    if estimate > budget {
        return Err(ExactDistError::BudgetExceeded { estimate, budget });
    }
    Ok(())
}

/// Pascal triangle of C(n, k) for 0 <= k <= n <= n_max.
fn binomial_rows(n_max: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n_max + 1);
    rows.push(vec![BigInt::one()]);
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = Vec::with_capacity(n + 1);
        row.push(BigInt::one());
        for k in 1..n {
            row.push(&prev[k - 1] + &prev[k]);
        }
        row.push(BigInt::one());
        rows.push(row);
    }
    rows
}

/// Weighted prefix sums S[p][m] = sum_{j<=n} (n!/j!) * layer_j[p][m],
/// maintained incrementally: S_n = n * S_{n-1} + layer_n.
struct PrefixSums {
    per_p: Vec<Vec<BigInt>>,
}

impl PrefixSums {
    fn new(p_max: usize) -> Self {
        PrefixSums {
            per_p: vec![Vec::new(); p_max + 1],
        }
    }

    fn fold_layer(&mut self, n: usize, layer: &[Band]) {
        for (p, acc) in self.per_p.iter_mut().enumerate() {
            for c in acc.iter_mut() {
                *c *= n as u64;
            }
            if let Some(band) = layer.get(p) {
                if band.is_empty() {
                    continue;
                }
                if band.hi() + 1 > acc.len() {
                    acc.resize(band.hi() + 1, BigInt::zero());
                }
                for (i, c) in band.coef.iter().enumerate() {
                    acc[band.lo + i] += c;
                }
            }
        }
    }
}

/// acc[m] += scale * (a conv b)[m] over the inner support index.
fn conv_add_scaled(acc: &mut [BigInt], scale: &BigInt, a: &Band, b: &Band) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    // scale the shorter operand once
    let (short, long) = if a.coef.len() <= b.coef.len() {
        (a, b)
    } else {
        (b, a)
    };
    let scaled: Vec<BigInt> = short.coef.iter().map(|c| c * scale).collect();
    let base = short.lo + long.lo;
    for (i, s) in scaled.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        for (j, l) in long.coef.iter().enumerate() {
            acc[base + i + j] += s * l;
        }
    }
}

/// Middle convolution column M_q[m] for all q <= p_max at layer n:
/// sum over 1 <= i <= q-1 of the C(n,k)-weighted layer convolutions.
fn middle_convolutions(
    layers: &[Vec<Band>],
    n: usize,
    p_max: usize,
    binomials: &[Vec<BigInt>],
) -> Vec<Vec<BigInt>> {
    let mut m_full: Vec<Vec<BigInt>> = (0..=p_max).map(|_| vec![BigInt::zero(); n + 2]).collect();
    #[allow(clippy::needless_range_loop)] // q indexes layer pairs, not one slice
    for q in 2..=p_max {
        // symmetric pairs (i, q-i) and (q-i, i) contribute equally
        for i in 1..=(q - 1) / 2 {
            let j = q - i;
            let mut acc = vec![BigInt::zero(); n + 2];
            for k in 0..=n {
                let a = layers[k].get(i);
                let b = layers[n - k].get(j);
                if let (Some(a), Some(b)) = (a, b) {
                    conv_add_scaled(&mut acc, &binomials[n][k], a, b);
                }
            }
            for (m, c) in acc.into_iter().enumerate() {
                if !c.is_zero() {
                    m_full[q][m] += c * 2u32;
                }
            }
        }
        if q.is_multiple_of(2) {
            let i = q / 2;
            let mut acc = vec![BigInt::zero(); n + 2];
            for k in 0..=n {
                let a = layers[k].get(i);
                let b = layers[n - k].get(i);
                if let (Some(a), Some(b)) = (a, b) {
                    conv_add_scaled(&mut acc, &binomials[n][k], a, b);
                }
            }
            for (m, c) in acc.into_iter().enumerate() {
                m_full[q][m] += c;
            }
        }
    }
    m_full
}

/// Full A_q[m] columns at layer n: A_0 is (n+1)! at m = 0; for q >= 1,
/// A_q = 2 * prefix + middle.
fn a_columns(
    n: usize,
    p_max: usize,
    fact_n_plus_1: &BigInt,
    prefix: &PrefixSums,
    middle: &[Vec<BigInt>],
) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(p_max + 1);
    let mut a0 = vec![BigInt::zero(); n + 2];
    a0[0] = fact_n_plus_1.clone();
    a.push(a0);
    for (mid_col, pref_col) in middle.iter().zip(prefix.per_p.iter()).skip(1) {
        let mut col = mid_col.clone();
        for (m, s) in pref_col.iter().enumerate() {
            col[m] += s * 2u32;
        }
        a.push(col);
    }
    a
}

fn layer0(_p_max: usize) -> Vec<Band> {
    // only p = 0 has mass at n = 0 (empty tree, nothing selected)
    vec![Band {
        lo: 0,
        coef: vec![BigInt::one()],
    }]
}

/// Build the exact pass-count table for 0 <= p <= p_max, 0 <= n <= n_max.
pub fn build_x_table(n_max: usize, p_max: usize) -> Result<WeightedDistTable, ExactDistError> {
    build_x_table_with_budget(n_max, p_max, DEFAULT_TABLE_BUDGET_BYTES)
}

pub fn build_x_table_with_budget(
    n_max: usize,
    p_max: usize,
    budget_bytes: u64,
) -> Result<WeightedDistTable, ExactDistError> {
    check_build_args(n_max, p_max, budget_bytes)?;
    let binomials = binomial_rows(n_max);
    let factorials: Vec<BigInt> = (0..=n_max as u64).map(factorial).collect();

    let mut layers: Vec<Vec<Band>> = Vec::with_capacity(n_max + 1);
    layers.push(layer0(p_max));
    let mut prefix = PrefixSums::new(p_max);

    for n in 0..n_max {
        prefix.fold_layer(n, &layers[n]);
        let middle = middle_convolutions(&layers, n, p_max, &binomials);
        let a = a_columns(n, p_max, &factorials[n + 1], &prefix, &middle);

        let p_top = p_max.min(n + 1);
        let mut next: Vec<Band> = Vec::with_capacity(p_top + 1);
        next.push(Band {
            lo: 0,
            coef: vec![factorials[n + 1].clone()],
        });
        for p in 1..=p_top {
            let mut full = vec![BigInt::zero(); n + 2];
            for m in 1..=n + 1 {
                full[m] = &a[p][m - 1] + &a[p - 1][m - 1];
            }
            next.push(Band::from_full(full));
        }
        layers.push(next);
    }

    Ok(WeightedDistTable {
        kind: Kind::X,
        n_max,
        p_max,
        layers,
        factorials,
    })
}

/// Build the exact span-size table; requires a pass-count table covering the
/// same (n_max, p_max).
pub fn build_y_table(
    n_max: usize,
    p_max: usize,
    x_table: &WeightedDistTable,
) -> Result<WeightedDistTable, ExactDistError> {
    build_y_table_with_budget(n_max, p_max, x_table, DEFAULT_TABLE_BUDGET_BYTES)
}

pub fn build_y_table_with_budget(
    n_max: usize,
    p_max: usize,
    x_table: &WeightedDistTable,
    budget_bytes: u64,
) -> Result<WeightedDistTable, ExactDistError> {
    check_build_args(n_max, p_max, budget_bytes)?;
    if x_table.kind() != Kind::X {
        return Err(ExactDistError::KindMismatch {
            expected: Kind::X,
            got: x_table.kind(),
        });
    }
    if x_table.n_max() < n_max || x_table.p_max() < p_max {
        return Err(ExactDistError::InsufficientXTable {
            have_n: x_table.n_max(),
            have_p: x_table.p_max(),
            need_n: n_max,
            need_p: p_max,
        });
    }
    let binomials = binomial_rows(n_max);
    let factorials: Vec<BigInt> = (0..=n_max as u64).map(factorial).collect();

    let mut layers: Vec<Vec<Band>> = Vec::with_capacity(n_max + 1);
    layers.push(layer0(p_max));
    let mut x_prefix = PrefixSums::new(p_max);
    let mut y_prefix = PrefixSums::new(p_max);

    for n in 0..n_max {
        x_prefix.fold_layer(n, &x_table.layers[n]);
        y_prefix.fold_layer(n, &layers[n]);
        let middle = middle_convolutions(&x_table.layers, n, p_max, &binomials);
        let a = a_columns(n, p_max, &factorials[n + 1], &x_prefix, &middle);

        let p_top = p_max.min(n + 1);
        let mut next: Vec<Band> = Vec::with_capacity(p_top + 1);
        next.push(Band {
            lo: 0,
            coef: vec![factorials[n + 1].clone()],
        });
        for p in 1..=p_top {
            let mut full = vec![BigInt::zero(); n + 2];
            for m in 1..=n + 1 {
                full[m] = &middle[p][m - 1] + &a[p - 1][m - 1];
            }
            for (m, t) in y_prefix.per_p[p].iter().enumerate() {
                full[m] += t * 2u32;
            }
            next.push(Band::from_full(full));
        }
        layers.push(next);
    }

    Ok(WeightedDistTable {
        kind: Kind::Y,
        n_max,
        p_max,
        layers,
        factorials,
    })
}
