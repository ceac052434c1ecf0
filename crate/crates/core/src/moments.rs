//! Exact closed-form moments of the span size Y, asymptotic moment constants
//! for both statistics, and the quasi-power parameter functions u(s), v(s)
//! whose derivatives at 0 drive the Gaussian limit behavior.
//!
//! The closed forms are evaluated entirely in exact rational arithmetic: the
//! alternating binomial sums they contain cancel catastrophically in floating
//! point. Floats appear only in the asymptotic predictions and reports.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{
    alt_harmonic_sum, binomial, harmonic, harmonic2, rational_to_f64, HarmonicPower, Rational,
};
use crate::exactdist::{ExactDistError, Kind, WeightedDistTable};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.5772156649015329;
/// pi^2 / 6.
pub const PI2_OVER_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("p must satisfy 1 <= p <= n, got n = {n}, p = {p}")]
    POutOfRange { n: usize, p: usize },
    #[error("no asymptotic form for kind {kind} at p = {p}")]
    NoAsymptoticForm { kind: Kind, p: usize },
    #[error("degenerate falling factorial (n+4-p)(n+3-p)(n+2-p)(n+1-p) = 0 at n = {n}, p = {p}")]
    DegenerateFallingFactorial { n: usize, p: usize },
    #[error("argument outside the model domain: {0}")]
    DomainViolation(String),
    #[error(transparent)]
    Table(#[from] ExactDistError),
}

fn int(v: i64) -> Rational {
    Rational::from(BigInt::from(v))
}

fn check_np(n: usize, p: usize) -> Result<(), MomentsError> {
    if p == 0 || p > n {
        return Err(MomentsError::POutOfRange { n, p });
    }
    Ok(())
}

/// Exact expectation of the span size Y_{n,p}, all terms of the closed form:
/// two rational-prefactor harmonic terms, constants, and the alternating
/// binomial sum with prefactor 2p(n+1)(-1)^p / C(n,p).
pub fn expectation_y_exact(n: usize, p: usize) -> Result<Rational, MomentsError> {
    check_np(n, p)?;
    let (n_i, p_i) = (n as i64, p as i64);
    let h_n = harmonic(n as u64);
    let h_p = harmonic(p as u64);
    let np1 = int(n_i + 1);
    let denom = int(n_i + 2 - p_i) * int(n_i + 1 - p_i);

    let t1 = int(2 * p_i) * &np1 * &np1 / &denom * (&h_n - &h_p);
    let t2 = int(2 * (2 * p_i - 1)) * &np1 / &denom;
    let t3 = int(3 + 2 * p_i);
    let t4 = -int(2 * p_i * n_i) / int(n_i + 1 - p_i);

    let sign = if p.is_multiple_of(2) { int(1) } else { int(-1) };
    let prefactor = int(2 * p_i) * &np1 * sign / Rational::from(binomial(n as u64, p_i));
    let t5 = &prefactor * &h_n;
    // sum_{k=1}^{p-1} (-1)^k / k * C(n,k) = -alt_harmonic_sum(n, p-1, 1)
    let alt = alt_harmonic_sum(n as u64, (p - 1) as u64, HarmonicPower::One)
        .expect("p - 1 <= n by precondition");
    let t6 = &prefactor * (-alt);

    Ok(t1 + t2 + t3 + t4 + t5 + t6)
}

/// Same expectation via the alternative grouping, with the full-length
/// alternating sum absorbed into the tail sum_{k=p}^{n} (-1)^(k-1)/k C(n,k).
/// Kept as an independent algebraic route for cross-checking.
#[cfg(test)]
pub(crate) fn expectation_y_exact_alt(n: usize, p: usize) -> Result<Rational, MomentsError> {
    check_np(n, p)?;
    let (n_i, p_i) = (n as i64, p as i64);
    let h_n = harmonic(n as u64);
    let h_p = harmonic(p as u64);
    let np1 = int(n_i + 1);
    let denom = int(n_i + 2 - p_i) * int(n_i + 1 - p_i);

    let t1 = int(2 * p_i) * &np1 * &np1 / &denom * (&h_n - &h_p);
    let t2 = int(2 * (2 * p_i - 1)) * &np1 / &denom;
    let t3 = int(3 + 2 * p_i);
    let t4 = -int(2 * p_i * n_i) / int(n_i + 1 - p_i);

    let sign = if p.is_multiple_of(2) { int(1) } else { int(-1) };
    let prefactor = int(2 * p_i) * &np1 * sign / Rational::from(binomial(n as u64, p_i));
    let full = alt_harmonic_sum(n as u64, n as u64, HarmonicPower::One).expect("j_max = n");
    let head = alt_harmonic_sum(n as u64, (p - 1) as u64, HarmonicPower::One).expect("p - 1 <= n");
    let tail = full - head;
    Ok(t1 + t2 + t3 + t4 + prefactor * tail)
}

fn psi3(n: &BigInt, p: &BigInt) -> BigInt {
    let n2 = n * n;
    let n3 = &n2 * n;
    let n4 = &n3 * n;
    let p2 = p * p;
    let p3 = &p2 * p;
    let p4 = &p3 * p;
    -2 * &p4
        + &p3 * (BigInt::from(16) - 6 * &n2 - 2 * &n3)
        + &p2 * (-45 * n - BigInt::from(58) - 4 * &n2 + 2 * &n4 + 7 * &n3)
        + p * (BigInt::from(56) + 78 * n + 6 * &n3 + 41 * &n2 - &n4)
        + (-BigInt::from(8) - 20 * n - 16 * &n2 - 4 * &n3)
}

fn psi4(n: &BigInt, p: &BigInt) -> BigInt {
    let n2 = n * n;
    let n3 = &n2 * n;
    let n4 = &n3 * n;
    let p2 = p * p;
    let p3 = &p2 * p;
    let p4 = &p3 * p;
    let p5 = &p4 * p;
    -6 * &p5
        + &p4 * (BigInt::from(58) + 25 * n + 2 * &n2)
        + &p3 * (-BigInt::from(173) - 152 * n - 39 * &n2 - 4 * &n3)
        + &p2 * (BigInt::from(155) + 250 * n + 119 * &n2 + 25 * &n3 + 2 * &n4)
        + p * (BigInt::from(78) + 10 * n - 35 * &n2 - 22 * &n3 - 5 * &n4)
        + (-BigInt::from(144) - 234 * n - 153 * &n2 - 42 * &n3 - 3 * &n4)
}

/// Exact variance of the span size Y_{n,p}. Deterministic cases short-circuit
/// (p = 1 and p = n give variance 0); for 2 <= p <= n the full closed form is
/// evaluated: both alternating sums, the harmonic-square combinations, the
/// two big polynomial numerators over the degree-4 falling factorial, and the
/// mean correction.
pub fn variance_y_exact(n: usize, p: usize) -> Result<Rational, MomentsError> {
    check_np(n, p)?;
    if p == 1 {
        return Ok(Rational::zero());
    }
    let (n_i, p_i) = (n as i64, p as i64);
    let ff = int(n_i + 4 - p_i) * int(n_i + 3 - p_i) * int(n_i + 2 - p_i) * int(n_i + 1 - p_i);
    if ff.is_zero() {
        return Err(MomentsError::DegenerateFallingFactorial { n, p });
    }
    let h_n = harmonic(n as u64);
    let h_p = harmonic(p as u64);
    let h_n2 = harmonic2(n as u64);
    let h_p2 = harmonic2(p as u64);
    let sign = if p.is_multiple_of(2) { int(1) } else { int(-1) };
    let np1 = int(n_i + 1);
    let binom = Rational::from(binomial(n as u64, p_i));

    let s1 = -alt_harmonic_sum(n as u64, (p - 1) as u64, HarmonicPower::One).expect("in range");
    let s2 = -alt_harmonic_sum(n as u64, (p - 1) as u64, HarmonicPower::Two).expect("in range");

    let t1 = int(4)
        * &sign
        * &np1
        * (int(2 * p_i) * &h_n - int(2 * p_i) * &h_p + int(2 - 3 * p_i * p_i))
        / (int(p_i) * &binom)
        * &s1;
    let t2 = -int(8) * &sign * &np1 / &binom * &s2;
    let t3 = int(4) * &sign * &np1 / &binom
        * (&h_n * &h_n - &h_n2 - int(2) * &h_p * &h_n);
    let t4 = int(4) * &sign * int(2 - 3 * p_i * p_i) * &np1 / (int(p_i) * &binom) * &h_n;

    let big_n = BigInt::from(n_i);
    let big_p = BigInt::from(p_i);
    let t5 = -int(4) * Rational::from(psi3(&big_n, &big_p)) / &ff * (&h_n - &h_p);
    // The (n+1)^2 power is pinned by exact equality with the enumeration and
    // table oracles over 2 <= p <= 5, n <= 16 (one power higher would also
    // make the whole expression grow like n log^2 n instead of log n).
    let t6 = int(4 * p_i) * int(n_i + 2) * &np1 * &np1
        * int(n_i * p_i + 2 + p_i)
        / &ff
        * ((&h_n - &h_p) * (&h_n - &h_p) - (&h_n2 - &h_p2));
    let t7 = int(2) * Rational::from(psi4(&big_n, &big_p)) / &ff;

    let e = expectation_y_exact(n, p)?;
    Ok(t1 + t2 + t3 + t4 + t5 + t6 + t7 + &e - &e * &e)
}

/// Asymptotic moment constants: for n -> infinity the mean and variance of
/// either statistic behave like 2p ln n + constant, with kind-specific
/// constants built from H_p, H_p^(2), gamma and pi^2/6.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticConstants {
    pub kind: Kind,
    pub p: usize,
    pub gamma: f64,
    pub pi2_over_6: f64,
    #[serde(skip)]
    pub h_p: Rational,
    #[serde(skip)]
    pub h_p2: Rational,
    pub const_mean: f64,
    pub const_var: f64,
}

/// Constant terms of the asymptotic mean/variance for the given kind.
/// The pass count X has them for every p >= 1; the span size Y only for
/// p >= 2 (Y_{n,1} is deterministic).
pub fn asymptotic_constants(kind: Kind, p: usize) -> Result<AsymptoticConstants, MomentsError> {
    if p == 0 || (kind == Kind::Y && p < 2) {
        return Err(MomentsError::NoAsymptoticForm { kind, p });
    }
    let pf = p as f64;
    let h_p = harmonic(p as u64);
    let h_p2 = harmonic2(p as u64);
    let h_pf = rational_to_f64(&h_p);
    let h_p2f = rational_to_f64(&h_p2);
    let (const_mean, const_var) = match kind {
        Kind::X => (
            1.0 - 2.0 * pf - 2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA,
            4.0 * pf - 2.0 - 2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA
                + 4.0 * pf * pf * h_p2f
                - 4.0 * pf * pf * PI2_OVER_6,
        ),
        Kind::Y => (
            3.0 - 2.0 * pf - 2.0 * pf / (pf - 1.0) - 2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA,
            -2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA - 4.0 * pf * pf * PI2_OVER_6
                + 4.0 * pf * pf * h_p2f
                + 2.0 * (2.0 * pf.powi(3) - 5.0 * pf * pf + 7.0 * pf - 2.0) / (pf - 1.0).powi(2),
        ),
    };
    Ok(AsymptoticConstants {
        kind,
        p,
        gamma: EULER_GAMMA,
        pi2_over_6: PI2_OVER_6,
        h_p,
        h_p2,
        const_mean,
        const_var,
    })
}

/// The Y-variance constant in its other printed grouping,
/// -2p(H_p - gamma) - 4p^2(pi^2/6 - H_p^(2)) + 2(-2 + 7p - 5p^2 + 2p^3)/(1-p)^2.
/// Algebraically identical to [`asymptotic_constants`]; kept as a separate
/// evaluation route for the constants cross-check.
pub fn variance_const_y_alt(p: usize) -> Result<f64, MomentsError> {
    if p < 2 {
        return Err(MomentsError::NoAsymptoticForm { kind: Kind::Y, p });
    }
    let pf = p as f64;
    let h_pf = rational_to_f64(&harmonic(p as u64));
    let h_p2f = rational_to_f64(&harmonic2(p as u64));
    Ok(-2.0 * pf * (h_pf - EULER_GAMMA) - 4.0 * pf * pf * (PI2_OVER_6 - h_p2f)
        + 2.0 * (-2.0 + 7.0 * pf - 5.0 * pf * pf + 2.0 * pf.powi(3)) / (1.0 - pf).powi(2))
}

/// Asymptotic (mean, variance) prediction 2p ln n + constant.
pub fn mean_var_asym(kind: Kind, n: usize, p: usize) -> Result<(f64, f64), MomentsError> {
    let c = asymptotic_constants(kind, p)?;
    let base = 2.0 * p as f64 * (n as f64).ln();
    Ok((base + c.const_mean, base + c.const_var))
}

/// ln Gamma by the 9-term Lanczos approximation (g = 7), |error| well below
/// 1e-10 over [0.5, 50].
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)] // published coefficient table
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // reflection keeps the approximation in its sweet spot
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    #[allow(clippy::excessive_precision)]
    let mut a = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        a += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Quasi-power parameter functions for one statistic at fixed p: the scale
/// exponent u(s) = p(2e^s - 2) (common to both kinds) and the kind-specific
/// log-prefactor v(s), together with their derivative constants at s = 0.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiPowerModel {
    pub kind: Kind,
    pub p: usize,
    pub uprime0: f64,
    pub udoubleprime0: f64,
    pub vprime0: f64,
    pub vdoubleprime0: f64,
}

/// Build the model; the pass count supports every p >= 1, the span size
/// needs p >= 2.
pub fn quasi_power_model(kind: Kind, p: usize) -> Result<QuasiPowerModel, MomentsError> {
    if p == 0 || (kind == Kind::Y && p < 2) {
        return Err(MomentsError::NoAsymptoticForm { kind, p });
    }
    let pf = p as f64;
    let h_pf = rational_to_f64(&harmonic(p as u64));
    let h_p2f = rational_to_f64(&harmonic2(p as u64));
    let (vprime0, vdoubleprime0) = match kind {
        Kind::X => (
            -2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA + 1.0 - 2.0 * pf,
            2.0 * (2.0 * pf - 1.0) - 2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA
                - 4.0 * pf * pf * PI2_OVER_6
                + 4.0 * pf * pf * h_p2f,
        ),
        Kind::Y => (
            -2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA + 3.0 - 2.0 * pf - 2.0 * pf / (pf - 1.0),
            -2.0 * pf * h_pf + 2.0 * pf * EULER_GAMMA - 4.0 * pf * pf * PI2_OVER_6
                + 4.0 * pf * pf * h_p2f
                + 2.0 * (2.0 * pf.powi(3) - 5.0 * pf * pf + 7.0 * pf - 2.0) / (pf - 1.0).powi(2),
        ),
    };
    Ok(QuasiPowerModel {
        kind,
        p,
        uprime0: 2.0 * pf,
        udoubleprime0: 2.0 * pf,
        vprime0,
        vdoubleprime0,
    })
}

impl QuasiPowerModel {
    /// Scale-exponent function u(s) = p(2e^s - 2).
    pub fn u_of_s(&self, s: f64) -> f64 {
        self.p as f64 * (2.0 * s.exp() - 2.0)
    }

    /// Log-prefactor v(s), evaluated in log space. Requires e^s > 1/2 (the
    /// prefactor has a singularity there); the span-size kind additionally
    /// needs p(2e^s - 1) > 1.
    pub fn v_of_s(&self, s: f64) -> Result<f64, MomentsError> {
        let es = s.exp();
        if 2.0 * es - 1.0 <= 0.0 {
            return Err(MomentsError::DomainViolation(format!(
                "e^s = {es} too close to the prefactor singularity at 1/2"
            )));
        }
        let pf = self.p as f64;
        let gamma_arg = pf * (2.0 * es - 1.0) + 1.0;
        let ln_fact_p = ln_gamma(pf + 1.0);
        let ln_ratio = s - (2.0 * es - 1.0).ln(); // ln(e^s / (2e^s - 1))
        match self.kind {
            Kind::X => Ok(ln_fact_p + (2.0 * pf - 1.0) * ln_ratio - ln_gamma(gamma_arg)),
            Kind::Y => {
                let pole = pf * (2.0 * es - 1.0) - 1.0;
                if pole <= 0.0 {
                    return Err(MomentsError::DomainViolation(format!(
                        "p(2e^s - 1) - 1 = {pole} <= 0"
                    )));
                }
                Ok((pf - 1.0).ln() + ln_fact_p + s + (2.0 * pf - 2.0) * ln_ratio
                    - pole.ln()
                    - ln_gamma(gamma_arg))
            }
        }
    }

    /// log of the quasi-power prediction for the probability generating
    /// function at v = e^s: u(s) ln n + v(s).
    pub fn log_prediction(&self, n: usize, s: f64) -> Result<f64, MomentsError> {
        Ok(self.u_of_s(s) * (n as f64).ln() + self.v_of_s(s)?)
    }
}

/// Exact and asymptotic moments of one (kind, n, p) cell, plus their gaps.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub kind: Kind,
    pub n: usize,
    pub p: usize,
    pub mean_exact: Rational,
    pub variance_exact: Rational,
    pub mean_float: f64,
    pub variance_float: f64,
    /// None when no asymptotic form exists (span size at p = 1)
    pub mean_asym: Option<f64>,
    pub variance_asym: Option<f64>,
    pub abs_gap_mean: Option<f64>,
    pub abs_gap_var: Option<f64>,
}

impl MomentReport {
    fn new(
        kind: Kind,
        n: usize,
        p: usize,
        mean_exact: Rational,
        variance_exact: Rational,
    ) -> Self {
        let mean_float = rational_to_f64(&mean_exact);
        let variance_float = rational_to_f64(&variance_exact);
        let asym = mean_var_asym(kind, n, p).ok();
        let (mean_asym, variance_asym) = match asym {
            Some((m, v)) => (Some(m), Some(v)),
            None => (None, None),
        };
        MomentReport {
            kind,
            n,
            p,
            mean_exact,
            variance_exact,
            mean_float,
            variance_float,
            abs_gap_mean: mean_asym.map(|m| (m - mean_float).abs()),
            abs_gap_var: variance_asym.map(|v| (v - variance_float).abs()),
            mean_asym,
            variance_asym,
        }
    }

    /// Exact moments from the closed forms (span size only).
    pub fn y_from_closed_forms(n: usize, p: usize) -> Result<Self, MomentsError> {
        Ok(Self::new(
            Kind::Y,
            n,
            p,
            expectation_y_exact(n, p)?,
            variance_y_exact(n, p)?,
        ))
    }

    /// Exact moments from a distribution table (either kind).
    pub fn from_table(table: &WeightedDistTable, n: usize, p: usize) -> Result<Self, MomentsError> {
        let m = table.moments_from_table(n, p)?;
        Ok(Self::new(table.kind(), n, p, m.mean, m.variance))
    }

    pub const CSV_HEADER: &'static str = "n,p,kind,mean_num,mean_den,mean_float,var_num,var_den,var_float,mean_asym,var_asym";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.p,
            self.kind,
            self.mean_exact.numer(),
            self.mean_exact.denom(),
            self.mean_float,
            self.variance_exact.numer(),
            self.variance_exact.denom(),
            self.variance_float,
            opt(self.mean_asym),
            opt(self.variance_asym),
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "p": self.p,
            "kind": self.kind.as_str(),
            "mean": { "num": self.mean_exact.numer().to_string(),
                      "den": self.mean_exact.denom().to_string(),
                      "float": self.mean_float },
            "variance": { "num": self.variance_exact.numer().to_string(),
                          "den": self.variance_exact.denom().to_string(),
                          "float": self.variance_float },
            "mean_asym": self.mean_asym,
            "variance_asym": self.variance_asym,
            "abs_gap_mean": self.abs_gap_mean,
            "abs_gap_var": self.abs_gap_var,
        })
    }
}
