//! Numeric evaluation of the closed-form trivariate generating functions of
//! the two statistics and their truncated-series counterparts.
//!
//! The pass-count generating function has the algebraic closed form
//!
//! ```text
//! Phi(z,u,v) = (W + 1 - 2v + (1-z)^W (W - 1 + 2v))
//!            / ((W + 1 - 2v(1+u) + (1-z)^W (W - 1 + 2v(1+u))) (1-z)),
//! W = sqrt(1 - 4(1+u) v (1-v)),
//! ```
//!
//! and the span-size generating function is an integral built on it:
//!
//! ```text
//! F(z,u,v) = (1 + 2z(v-1))/(1-z)^2 + (1-z)^{-2} Int_0^z PhiTilde(t,u,v) dt,
//! PhiTilde = (dPhi/dz - 2v/(1-z) Phi) (1-z)^2.
//! ```
//!
//! PhiTilde is evaluated without numeric differentiation: Phi satisfies the
//! Riccati equation dPhi/dz = v(1+u) Phi^2 + (1-v)/(1-z)^2, so
//! PhiTilde = v(1+u) Phi^2 (1-z)^2 + (1-v) - 2v Phi (1-z).
//!
//! Everything is complex: the square root turns imaginary once
//! 4(1+u)v(1-v) > 1, and correctness across that branch matters for v sweeps.
//! Principal branches throughout.

use num_complex::Complex64;
use thiserror::Error;

use crate::combinatorics::big_ratio_to_f64;
use crate::exactdist::{Kind, WeightedDistTable};

/// Magnitude floor below which the closed-form denominator counts as a pole.
pub const NEAR_POLE_FLOOR: f64 = 1e-12;
/// Default absolute quadrature tolerance for the integral form.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const MAX_QUAD_INTERVALS: usize = 2000;

#[derive(Debug, Error)]
pub enum ClosedFormError {
    #[error("|z| = {z_abs} is outside the open unit disk")]
    OutsideUnitDisk { z_abs: f64 },
    #[error("denominator magnitude {denom_mag:e} below the pole floor {NEAR_POLE_FLOOR:e}")]
    NearPole { denom_mag: f64 },
    #[error("quadrature did not converge: error estimate {achieved:e} > tolerance {requested:e}")]
    QuadratureDidNotConverge { achieved: f64, requested: f64 },
    #[error("integrand failed on the path: {0}")]
    IntegrandFailure(String),
    #[error("table (kind {kind}, n_max {n_max}) does not cover truncation N = {need}")]
    InsufficientTable {
        kind: Kind,
        n_max: usize,
        need: usize,
    },
    #[error("series over kind {expected} requires a {expected} table, got {got}")]
    WrongTableKind { expected: Kind, got: Kind },
}

/// Evaluation point (z, u, v) of the trivariate generating functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfPoint {
    pub z: Complex64,
    pub u: Complex64,
    pub v: Complex64,
}

impl GfPoint {
    pub fn new(z: Complex64, u: Complex64, v: Complex64) -> Self {
        GfPoint { z, u, v }
    }

    pub fn from_real(z: f64, u: f64, v: f64) -> Self {
        GfPoint {
            z: Complex64::new(z, 0.0),
            u: Complex64::new(u, 0.0),
            v: Complex64::new(v, 0.0),
        }
    }
}

/// Principal square root of 1 - 4(1+u)v(1-v).
pub fn omega(u: Complex64, v: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - 4.0 * (1.0 + u) * v * (1.0 - v)).sqrt()
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// (1 - z)^w with the principal logarithm.
fn one_minus_z_pow(z: Complex64, w: Complex64) -> Complex64 {
    (w * (one() - z).ln()).exp()
}

fn check_disk(z: Complex64) -> Result<(), ClosedFormError> {
    let z_abs = z.norm();
    if z_abs >= 1.0 {
        return Err(ClosedFormError::OutsideUnitDisk { z_abs });
    }
    Ok(())
}

/// Closed-form evaluation of the pass-count generating function.
pub fn phi(pt: &GfPoint) -> Result<Complex64, ClosedFormError> {
    check_disk(pt.z)?;
    let (z, u, v) = (pt.z, pt.u, pt.v);
    let w = omega(u, v);
    let pow = one_minus_z_pow(z, w);
    let numer = w + 1.0 - 2.0 * v + pow * (w - 1.0 + 2.0 * v);
    let denom = (w + 1.0 - 2.0 * v * (1.0 + u) + pow * (w - 1.0 + 2.0 * v * (1.0 + u))) * (one() - z);
    let denom_mag = denom.norm();
    if denom_mag < NEAR_POLE_FLOOR {
        return Err(ClosedFormError::NearPole { denom_mag });
    }
    Ok(numer / denom)
}

/// The integrand factor of the span-size integral, via the Riccati identity
/// (no numeric differentiation):
/// PhiTilde = v(1+u) Phi^2 (1-z)^2 + (1-v) - 2v Phi (1-z).
pub fn phi_tilde(pt: &GfPoint) -> Result<Complex64, ClosedFormError> {
    let p = phi(pt)?;
    let (z, u, v) = (pt.z, pt.u, pt.v);
    let omz = one() - z;
    Ok(v * (1.0 + u) * p * p * omz * omz + (one() - v) - 2.0 * v * p * omz)
}

/// Span-size generating function by adaptive quadrature of PhiTilde along the
/// straight segment [0, z], at the default tolerance.
pub fn f_numeric(pt: &GfPoint) -> Result<Complex64, ClosedFormError> {
    f_numeric_with_tol(pt, DEFAULT_QUAD_TOL)
}

pub fn f_numeric_with_tol(pt: &GfPoint, tol: f64) -> Result<Complex64, ClosedFormError> {
    check_disk(pt.z)?;
    let (z, u, v) = (pt.z, pt.u, pt.v);
    // Int_0^z PhiTilde dt = z * Int_0^1 PhiTilde(tau z) dtau
    let integral = if z.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let f = |tau: f64| {
            phi_tilde(&GfPoint::new(z * tau, u, v))
        };
        z * quad::adaptive_gk15(&f, tol, MAX_QUAD_INTERVALS)?
    };
    let omz2 = (one() - z) * (one() - z);
    Ok((one() + 2.0 * z * (v - 1.0)) / omz2 + integral / omz2)
}

fn series_from_table(
    pt: &GfPoint,
    n_trunc: usize,
    table: &WeightedDistTable,
    expected: Kind,
) -> Result<Complex64, ClosedFormError> {
    if table.kind() != expected {
        return Err(ClosedFormError::WrongTableKind {
            expected,
            got: table.kind(),
        });
    }
    if table.n_max() < n_trunc {
        return Err(ClosedFormError::InsufficientTable {
            kind: table.kind(),
            n_max: table.n_max(),
            need: n_trunc,
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut z_pow = one();
    for n in 0..=n_trunc {
        let mut layer_sum = Complex64::new(0.0, 0.0);
        let mut u_pow = one();
        for p in 0..=table.p_max().min(n) {
            if let Some((lo, hi)) = table.support(n, p).expect("in range") {
                let mut inner = Complex64::new(0.0, 0.0);
                let mut v_pow = pt.v.powi(lo as i32);
                for m in lo..=hi {
                    let w = table.weight(n, p, m).expect("in range");
                    inner += big_ratio_to_f64(w.numer(), w.denom()) * v_pow;
                    v_pow *= pt.v;
                }
                layer_sum += inner * u_pow;
            }
            u_pow *= pt.u;
        }
        total += layer_sum * z_pow;
        z_pow *= pt.z;
    }
    Ok(total)
}

/// Truncated series of the pass-count generating function from an exact
/// table: sum over n <= N, p <= table p_max of the weighted coefficients.
pub fn series_phi(
    pt: &GfPoint,
    n_trunc: usize,
    table: &WeightedDistTable,
) -> Result<Complex64, ClosedFormError> {
    series_from_table(pt, n_trunc, table, Kind::X)
}

/// Truncated series of the span-size generating function from an exact table.
pub fn series_f(
    pt: &GfPoint,
    n_trunc: usize,
    table: &WeightedDistTable,
) -> Result<Complex64, ClosedFormError> {
    series_from_table(pt, n_trunc, table, Kind::Y)
}

/// Per-p coefficient rows a[n][p] = sum_m w[n][p][m] v^m at fixed v, built by
/// running the coefficient recurrences directly in complex arithmetic (the
/// v-dimension collapses because every recurrence step multiplies by at most
/// one factor of v). Deep p truncations are cheap this way, where exact
/// tables are not.
fn collapsed_rows(v: Complex64, n_trunc: usize, p_trunc: usize, with_f: bool) -> CollapsedRows {
    let mut a: Vec<Vec<Complex64>> = Vec::with_capacity(n_trunc + 1);
    let mut b: Vec<Vec<Complex64>> = Vec::new();
    let zero = Complex64::new(0.0, 0.0);
    let mut row0 = vec![zero; p_trunc + 1];
    row0[0] = one();
    a.push(row0.clone());
    if with_f {
        b.push(row0);
    }
    // running prefix sums over earlier layers, per p
    let mut pref_a = vec![zero; p_trunc + 1];
    let mut pref_b = vec![zero; p_trunc + 1];

    for n in 0..n_trunc {
        for p in 0..=p_trunc {
            pref_a[p] += a[n][p];
            if with_f {
                pref_b[p] += b[n][p];
            }
        }
        let mut mid = vec![zero; p_trunc + 1];
        for q in 2..=p_trunc {
            let mut s = zero;
            for i in 1..=q - 1 {
                for k in 0..=n {
                    s += a[k][i] * a[n - k][q - i];
                }
            }
            mid[q] = s;
        }
        let conv = |q: usize, mid: &[Complex64], pref_a: &[Complex64]| -> Complex64 {
            if q == 0 {
                Complex64::new((n + 1) as f64, 0.0)
            } else {
                2.0 * pref_a[q] + mid[q]
            }
        };
        let scale = 1.0 / (n + 1) as f64;
        let mut next_a = vec![zero; p_trunc + 1];
        next_a[0] = one();
        for (p, slot) in next_a.iter_mut().enumerate().skip(1) {
            *slot = v * (conv(p, &mid, &pref_a) + conv(p - 1, &mid, &pref_a)) * scale;
        }
        a.push(next_a);
        if with_f {
            let mut next_b = vec![zero; p_trunc + 1];
            next_b[0] = one();
            for p in 1..=p_trunc {
                next_b[p] =
                    (v * (mid[p] + conv(p - 1, &mid, &pref_a)) + 2.0 * pref_b[p]) * scale;
            }
            b.push(next_b);
        }
    }
    CollapsedRows { a, b }
}

struct CollapsedRows {
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
}

fn sum_rows(rows: &[Vec<Complex64>], z: Complex64, u: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let mut z_pow = one();
    for row in rows {
        let mut layer = Complex64::new(0.0, 0.0);
        let mut u_pow = one();
        for c in row {
            layer += c * u_pow;
            u_pow *= u;
        }
        total += layer * z_pow;
        z_pow *= z;
    }
    total
}

/// Truncated series of the pass-count generating function by the recurrence
/// route, truncated at z^N and u^P. Independent of the closed form; agrees
/// with [`series_phi`] wherever an exact table covers.
pub fn series_phi_trunc(pt: &GfPoint, n_trunc: usize, p_trunc: usize) -> Complex64 {
    let rows = collapsed_rows(pt.v, n_trunc, p_trunc, false);
    sum_rows(&rows.a, pt.z, pt.u)
}

/// Truncated series of the span-size generating function by the recurrence
/// route.
pub fn series_f_trunc(pt: &GfPoint, n_trunc: usize, p_trunc: usize) -> Complex64 {
    let rows = collapsed_rows(pt.v, n_trunc, p_trunc, true);
    sum_rows(&rows.b, pt.z, pt.u)
}

/// Adaptive Gauss-Kronrod quadrature over [0, 1] for complex integrands of a
/// real parameter.
#[allow(clippy::excessive_precision)] // standard full-precision node tables
mod quad {
    use super::{ClosedFormError, Complex64};

    const XGK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WGK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];

    struct Interval {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }

    fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Interval, ClosedFormError>
    where
        F: Fn(f64) -> Result<Complex64, ClosedFormError>,
    {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center)?;
        let mut kronrod = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let dx = half * XGK[j];
            let f1 = f(center - dx)?;
            let f2 = f(center + dx)?;
            kronrod += WGK[j] * (f1 + f2);
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        kronrod *= half;
        gauss *= half;
        Ok(Interval {
            a,
            b,
            value: kronrod,
            err: (kronrod - gauss).norm(),
        })
    }

    pub fn adaptive_gk15<F>(
        f: &F,
        tol_abs: f64,
        max_intervals: usize,
    ) -> Result<Complex64, ClosedFormError>
    where
        F: Fn(f64) -> Result<Complex64, ClosedFormError>,
    {
        let mut intervals = vec![gk15(f, 0.0, 1.0)?];
        loop {
            let total_err: f64 = intervals.iter().map(|i| i.err).sum();
            if total_err <= tol_abs {
                return Ok(intervals.iter().map(|i| i.value).sum());
            }
            if intervals.len() >= max_intervals {
                return Err(ClosedFormError::QuadratureDidNotConverge {
                    achieved: total_err,
                    requested: tol_abs,
                });
            }
            let worst = intervals
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
                .map(|(i, _)| i)
                .expect("nonempty");
            let Interval { a, b, .. } = intervals.swap_remove(worst);
            let mid = 0.5 * (a + b);
            intervals.push(gk15(f, a, mid)?);
            intervals.push(gk15(f, mid, b)?);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::{build_x_table, build_y_table};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn omega_examples() {
        // radicand is 1 at v = 1 for any u
        assert!((omega(c(0.7, 0.3), c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        // 1 - 4 * 1 * 1/2 * 1/2 = 0
        assert!(omega(c(0.0, 0.0), c(0.5, 0.0)).norm() < 1e-15);
        // 1 - 4 * 2 * 2 * (-1) = 17
        assert!((omega(c(1.0, 0.0), c(2.0, 0.0)) - c(17f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn omega_square_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let u = c(rng.random_range(-1.0..1.5), rng.random_range(-0.5..0.5));
            let v = c(rng.random_range(0.2..1.8), rng.random_range(-0.5..0.5));
            let w = omega(u, v);
            let back = w * w + 4.0 * (1.0 + u) * v * (1.0 - v);
            assert!((back - c(1.0, 0.0)).norm() < 1e-12, "u={u} v={v}");
        }
    }

    #[test]
    fn phi_at_origin_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = rng.random_range(-1.0..1.0);
            let v = rng.random_range(0.5..1.5);
            let pt = GfPoint::from_real(0.0, u, v);
            assert!((phi(&pt).unwrap() - c(1.0, 0.0)).norm() < 1e-12, "u={u} v={v}");
            assert!((f_numeric(&pt).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_total_probability_line() {
        // at v = 1 the closed form collapses to 1/(1 - z(1+u))
        for &z in &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
            for &u in &[0.25, 0.5, 1.0] {
                if f64::abs(1.0 - z * (1.0 + u)) < 0.05 {
                    continue; // both sides blow up at z = 1/(1+u)
                }
                let got = phi(&GfPoint::from_real(z, u, 1.0)).unwrap();
                let want = 1.0 / (1.0 - z * (1.0 + u));
                assert!((got - c(want, 0.0)).norm() <= 1e-10, "z={z} u={u}");
            }
        }
    }

    #[test]
    fn phi_pole_detected() {
        // at v = 1, u = 1 the denominator vanishes at z = 1/2
        let err = phi(&GfPoint::from_real(0.5, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, ClosedFormError::NearPole { .. }), "{err}");
        let err = phi(&GfPoint::from_real(1.1, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, ClosedFormError::OutsideUnitDisk { .. }));
    }

    #[test]
    fn phi_matches_table_series() {
        let table = build_x_table(60, 6).unwrap();
        for &(z, u, v) in &[(0.15, 0.3, 1.1), (0.2, 0.25, 0.9), (0.1, 0.4, 1.2)] {
            let pt = GfPoint::from_real(z, u, v);
            let closed = phi(&pt).unwrap();
            let series = series_phi(&pt, 60, &table).unwrap();
            let rel = (closed - series).norm() / closed.norm();
            // p-tail of the series bounds the agreement here; the deep-p
            // comparison at 1e-9 lives in the acceptance suite
            assert!(rel < 2e-6, "(z,u,v)=({z},{u},{v}) rel={rel:e}");
        }
    }

    #[test]
    fn trunc_series_agrees_with_table_series() {
        let table = build_x_table(40, 5).unwrap();
        let y_table = build_y_table(40, 5, &table).unwrap();
        for &(z, u, v) in &[(0.2, 0.5, 1.2), (0.3, 0.25, 0.9), (0.1, 0.6, 1.05)] {
            let pt = GfPoint::from_real(z, u, v);
            let a = series_phi(&pt, 40, &table).unwrap();
            let b = series_phi_trunc(&pt, 40, 5);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "phi route split");
            let a = series_f(&pt, 40, &y_table).unwrap();
            let b = series_f_trunc(&pt, 40, 5);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "f route split");
        }
    }

    #[test]
    fn series_insufficient_table_rejected() {
        let table = build_x_table(10, 2).unwrap();
        let pt = GfPoint::from_real(0.1, 0.2, 1.0);
        assert!(matches!(
            series_phi(&pt, 20, &table),
            Err(ClosedFormError::InsufficientTable { .. })
        ));
        assert!(matches!(
            series_f(&pt, 5, &table),
            Err(ClosedFormError::WrongTableKind { .. })
        ));
    }

    /// Central finite difference of the defining expression
    /// (dPhi/dz - 2v/(1-z) Phi)(1-z)^2, as an independent oracle for the
    /// Riccati-substituted form.
    fn phi_tilde_fd(pt: &GfPoint, h: f64) -> Complex64 {
        let f = |z: Complex64| phi(&GfPoint::new(z, pt.u, pt.v)).unwrap();
        let dphi = (f(pt.z + h) - f(pt.z - h)) / (2.0 * h);
        let omz = c(1.0, 0.0) - pt.z;
        (dphi - 2.0 * pt.v / omz * f(pt.z)) * omz * omz
    }

    #[test]
    fn phi_tilde_matches_finite_difference() {
        for &(z, u, v) in &[
            (0.2, 1.0, 1.1),
            (0.1, 0.5, 0.9),
            (0.3, 0.25, 1.2),
            (0.4, 0.5, 1.0),
        ] {
            let pt = GfPoint::from_real(z, u, v);
            let direct = phi_tilde(&pt).unwrap();
            let fd = phi_tilde_fd(&pt, 1e-5);
            let rel = (direct - fd).norm() / direct.norm().max(1e-3);
            assert!(rel < 1e-6, "(z,u,v)=({z},{u},{v}) rel={rel:e}");
        }
    }

    #[test]
    fn phi_tilde_at_origin() {
        // PhiTilde(0,u,v) = v(1+u) + (1-v) - 2v = 1 - 2v + uv
        for &(u, v) in &[(0.5, 1.2), (1.0, 0.8), (0.0, 1.0)] {
            let got = phi_tilde(&GfPoint::from_real(0.0, u, v)).unwrap();
            let want = 1.0 - 2.0 * v + u * v;
            assert!((got - c(want, 0.0)).norm() < 1e-12, "u={u} v={v}");
        }
    }

    #[test]
    fn f_total_probability_line() {
        for &(z, u) in &[(0.25, 0.5), (0.2, 0.3), (0.4, 0.25)] {
            let got = f_numeric(&GfPoint::from_real(z, u, 1.0)).unwrap();
            let want = 1.0 / (1.0 - z * (1.0 + u));
            assert!((got - c(want, 0.0)).norm() < 1e-9, "z={z} u={u}");
        }
    }

    #[test]
    fn f_matches_series() {
        let x = build_x_table(60, 6).unwrap();
        let y = build_y_table(60, 6, &x).unwrap();
        for &(z, u, v) in &[(0.2, 0.3, 1.1), (0.25, 0.25, 0.9)] {
            let pt = GfPoint::from_real(z, u, v);
            let numeric = f_numeric(&pt).unwrap();
            let series = series_f(&pt, 60, &y).unwrap();
            let rel = (numeric - series).norm() / numeric.norm();
            assert!(rel < 2e-6, "(z,u,v)=({z},{u},{v}) rel={rel:e}");
        }
    }

    #[test]
    fn deep_series_covers_wider_u() {
        // truncation depth chosen so the p-tail clears 1e-9 even at u = 0.6
        let pt = GfPoint::from_real(0.3, 0.6, 1.2);
        let closed = phi(&pt).unwrap();
        let series = series_phi_trunc(&pt, 200, 24);
        let rel = (closed - series).norm() / closed.norm();
        assert!(rel <= 1e-9, "rel = {rel:e}");
    }

    #[test]
    fn integral_form_reports_pole_on_path() {
        // at v = 1, u = 1 the integrand has a pole at t = 1/2, inside [0, 0.7]
        let err = f_numeric(&GfPoint::from_real(0.7, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, ClosedFormError::NearPole { .. }), "{err}");
    }

    #[test]
    fn quadrature_known_integral() {
        // Int_0^1 e^{(1+2i)t} dt = (e^{1+2i} - 1)/(1+2i)
        let lam = c(1.0, 2.0);
        let f = |t: f64| Ok((lam * t).exp());
        let got = quad::adaptive_gk15(&f, 1e-12, 100).unwrap();
        let want = (lam.exp() - 1.0) / lam;
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn quadrature_propagates_integrand_failure() {
        // a pole sitting on the path is reported, not averaged over
        let f = |_t: f64| -> Result<Complex64, ClosedFormError> {
            Err(ClosedFormError::NearPole { denom_mag: 0.0 })
        };
        assert!(quad::adaptive_gk15(&f, 1e-10, 100).is_err());
    }
}
