//! Statistical validation machinery: standard-normal CDF, Kolmogorov-Smirnov
//! distance of standardized histograms, total variation and chi-square
//! against exact pmfs, and the quasi-power ratio check that compares exact
//! probability generating functions with their asymptotic prediction.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::exactdist::{ExactDistError, WeightedDistTable};
use crate::moments::{MomentsError, QuasiPowerModel};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("pmf sums to {sum}, expected 1 within 1e-12")]
    PmfNotNormalized { sum: f64 },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error(transparent)]
    Table(#[from] ExactDistError),
    #[error(transparent)]
    Moments(#[from] MomentsError),
}

/// erf by its Taylor series; accurate for |t| <= 2 (terms alternate and the
/// worst intermediate is ~20, so at most two digits cancel).
fn erf_taylor(t: f64) -> f64 {
    let t2 = t * t;
    let mut term = t;
    let mut acc = t;
    for k in 1..200 {
        term *= -t2 / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        acc += contrib;
        if contrib.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
    }
    acc * 2.0 / std::f64::consts::PI.sqrt()
}

/// erfc for t >= 2 by the continued fraction
/// erfc(t) = e^{-t^2}/sqrt(pi) * 1/(t + (1/2)/(t + 1/(t + (3/2)/(t + ...)))),
/// evaluated with the modified Lentz scheme.
fn erfc_cf(t: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = t;
    let mut c = f;
    let mut d = 0.0f64;
    for j in 1..200 {
        let a = j as f64 / 2.0;
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-t * t).exp() / (std::f64::consts::PI.sqrt() * f)
}

/// Complementary error function for nonnegative argument.
fn erfc_nonneg(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t <= 2.0 {
        1.0 - erf_taylor(t)
    } else {
        erfc_cf(t)
    }
}

/// Standard normal distribution function. The two half-lines are routed so
/// that normal_cdf(x) + normal_cdf(-x) = 1 holds exactly.
pub fn normal_cdf(x: f64) -> f64 {
    let t = x / std::f64::consts::SQRT_2;
    if x >= 0.0 {
        1.0 - 0.5 * erfc_nonneg(t)
    } else {
        0.5 * erfc_nonneg(-t)
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of a
/// standardized integer histogram and the standard normal: the sup over
/// support atoms of |F_emp - Phi|, evaluated at both one-sided limits of
/// each atom.
pub fn ks_vs_normal(
    hist: &BTreeMap<usize, u64>,
    center: f64,
    scale: f64,
) -> Result<f64, StatsError> {
    if hist.is_empty() {
        return Err(StatsError::EmptyHistogram);
    }
    if scale.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(StatsError::NonPositiveScale(scale));
    }
    let total: u64 = hist.values().sum();
    let mut cum = 0u64;
    let mut sup = 0.0f64;
    for (&m, &c) in hist {
        let x = (m as f64 - center) / scale;
        let phi = normal_cdf(x);
        let before = cum as f64 / total as f64;
        cum += c;
        let after = cum as f64 / total as f64;
        sup = sup.max((phi - before).abs()).max((after - phi).abs());
    }
    Ok(sup)
}

/// Kolmogorov-Smirnov distance between an exact standardized pmf and the
/// standard normal (same atom walk as [`ks_vs_normal`], probability weights
/// instead of counts).
pub fn ks_pmf_vs_normal(
    pmf: &BTreeMap<usize, f64>,
    center: f64,
    scale: f64,
) -> Result<f64, StatsError> {
    if pmf.is_empty() {
        return Err(StatsError::EmptyHistogram);
    }
    if scale.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(StatsError::NonPositiveScale(scale));
    }
    check_normalized(pmf)?;
    let mut cum = 0.0f64;
    let mut sup = 0.0f64;
    for (&m, &pr) in pmf {
        let x = (m as f64 - center) / scale;
        let phi = normal_cdf(x);
        sup = sup.max((phi - cum).abs());
        cum += pr;
        sup = sup.max((cum - phi).abs());
    }
    Ok(sup)
}

fn check_normalized(pmf: &BTreeMap<usize, f64>) -> Result<(), StatsError> {
    let sum: f64 = pmf.values().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(StatsError::PmfNotNormalized { sum });
    }
    Ok(())
}

/// Total variation distance (1/2) sum |a_m - b_m| over the union support.
pub fn tv_distance(
    pmf_a: &BTreeMap<usize, f64>,
    pmf_b: &BTreeMap<usize, f64>,
) -> Result<f64, StatsError> {
    check_normalized(pmf_a)?;
    check_normalized(pmf_b)?;
    let mut acc = 0.0;
    let support: std::collections::BTreeSet<usize> =
        pmf_a.keys().chain(pmf_b.keys()).copied().collect();
    for m in support {
        let a = pmf_a.get(&m).copied().unwrap_or(0.0);
        let b = pmf_b.get(&m).copied().unwrap_or(0.0);
        acc += (a - b).abs();
    }
    Ok(acc / 2.0)
}

/// Pearson chi-square statistic of an observed histogram against an expected
/// pmf, pooling adjacent support points until each pool's expected count is
/// at least 5 (a trailing under-filled pool merges into its predecessor).
pub fn chi_square(
    hist: &BTreeMap<usize, u64>,
    expected_pmf: &BTreeMap<usize, f64>,
) -> Result<f64, StatsError> {
    if hist.is_empty() {
        return Err(StatsError::EmptyHistogram);
    }
    check_normalized(expected_pmf)?;
    let total: u64 = hist.values().sum();
    let support: std::collections::BTreeSet<usize> =
        hist.keys().chain(expected_pmf.keys()).copied().collect();

    let mut pools: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for m in support {
        acc_obs += hist.get(&m).copied().unwrap_or(0) as f64;
        acc_exp += expected_pmf.get(&m).copied().unwrap_or(0.0) * total as f64;
        if acc_exp >= 5.0 {
            pools.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        if let Some(last) = pools.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            pools.push((acc_obs, acc_exp));
        }
    }
    let mut stat = 0.0;
    for (o, e) in pools {
        if e > 0.0 {
            stat += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            return Err(StatsError::DomainViolation(
                "observed mass where expected pmf is zero".into(),
            ));
        }
    }
    Ok(stat)
}

/// Standardization applied to a histogram before the normal comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub center: f64,
    pub scale: f64,
}

impl Normalization {
    /// The limit-law standardization: center 2p ln n, scale sqrt(2p ln n).
    pub fn limit_law(n: usize, p: usize) -> Self {
        let c = 2.0 * p as f64 * (n as f64).ln();
        Normalization {
            center: c,
            scale: c.sqrt(),
        }
    }

    /// Standardize by given exact moments instead (sharper at small n).
    pub fn from_moments(mean: f64, variance: f64) -> Self {
        Normalization {
            center: mean,
            scale: variance.sqrt(),
        }
    }
}

/// Goodness-of-fit summary of one histogram: KS against the standard normal
/// under the given standardization, plus total-variation and chi-square
/// against an exact pmf when one is available.
#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub kind: crate::exactdist::Kind,
    pub n: usize,
    pub p: usize,
    pub trials: u64,
    pub normalization: Normalization,
    pub ks_distance: f64,
    pub tv_distance: Option<f64>,
    pub chi_square_stat: Option<f64>,
}

impl GofReport {
    pub fn compute(
        kind: crate::exactdist::Kind,
        n: usize,
        p: usize,
        hist: &BTreeMap<usize, u64>,
        normalization: Normalization,
        exact_pmf: Option<&BTreeMap<usize, f64>>,
    ) -> Result<Self, StatsError> {
        let trials: u64 = hist.values().sum();
        let ks = ks_vs_normal(hist, normalization.center, normalization.scale)?;
        let (tv, chi) = match exact_pmf {
            Some(exact) => {
                let empirical: BTreeMap<usize, f64> = hist
                    .iter()
                    .map(|(&m, &c)| (m, c as f64 / trials as f64))
                    .collect();
                (
                    Some(tv_distance(&empirical, exact)?),
                    Some(chi_square(hist, exact)?),
                )
            }
            None => (None, None),
        };
        Ok(GofReport {
            kind,
            n,
            p,
            trials,
            normalization,
            ks_distance: ks,
            tv_distance: tv,
            chi_square_stat: chi,
        })
    }

    pub const CSV_HEADER: &'static str =
        "kind,n,p,trials,center,scale,ks_distance,tv_distance,chi_square";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.n,
            self.p,
            self.trials,
            self.normalization.center,
            self.normalization.scale,
            self.ks_distance,
            opt(self.tv_distance),
            opt(self.chi_square_stat),
        )
    }
}

/// Guard for the quasi-power comparisons: e^s must stay clear of the v = 1/2
/// prefactor singularity.
pub const MIN_ES_FOR_RATIO: f64 = 0.6;

/// Ratio of the exact probability generating function at v = e^s to the
/// quasi-power prediction exp(u(s) ln n + v(s)); approaches 1 as n grows.
pub fn quasi_power_ratio(
    table: &WeightedDistTable,
    model: &QuasiPowerModel,
    n: usize,
    p: usize,
    s: f64,
) -> Result<f64, StatsError> {
    if table.kind() != model.kind {
        return Err(StatsError::DomainViolation(format!(
            "table kind {} does not match model kind {}",
            table.kind(),
            model.kind
        )));
    }
    if model.p != p {
        return Err(StatsError::DomainViolation(format!(
            "model built for p = {}, asked for p = {p}",
            model.p
        )));
    }
    let es = s.exp();
    if es < MIN_ES_FOR_RATIO {
        return Err(StatsError::DomainViolation(format!(
            "e^s = {es} below the guard {MIN_ES_FOR_RATIO}"
        )));
    }
    let exact = table.pgf_f64(n, p, es)?;
    let predicted = model.log_prediction(n, s)?.exp();
    Ok(exact / predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::{build_x_table, build_y_table, Kind};
    use crate::moments::quasi_power_model;

    #[test]
    fn normal_cdf_basics() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // frozen reference values
        let cases = [
            (0.5, 0.6914624612740131),
            (1.0, 0.8413447460685429),
            (2.0, 0.9772498680518208),
            (3.0, 0.9986501019683699),
            (-1.5, 0.06680720126885807),
            (-4.0, 3.167124183311992e-5),
        ];
        for (x, want) in cases {
            assert!(
                (normal_cdf(x) - want).abs() < 1e-9,
                "Phi({x}) = {} want {want}",
                normal_cdf(x)
            );
        }
    }

    #[test]
    fn normal_cdf_symmetry_and_monotonicity() {
        let mut prev = 0.0;
        let mut x = -8.0;
        while x <= 8.0 {
            let v = normal_cdf(x);
            assert!((v + normal_cdf(-x) - 1.0).abs() <= 1e-12, "x = {x}");
            assert!(v >= prev, "monotone at {x}");
            prev = v;
            x += 0.05;
        }
    }

    #[test]
    fn erf_routes_agree_at_the_seam() {
        // Taylor (t <= 2) and the continued fraction (t > 2) must meet
        for t in [1.95f64, 1.99, 2.0] {
            let taylor = 1.0 - erf_taylor(t);
            let cf = erfc_cf(t);
            assert!((taylor - cf).abs() < 1e-14, "t = {t}: {taylor} vs {cf}");
        }
    }

    #[test]
    fn ks_degenerate_histogram() {
        let hist = BTreeMap::from([(10usize, 1000u64)]);
        let d = ks_vs_normal(&hist, 10.0, 2.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_affine_shift_invariance() {
        let hist: BTreeMap<usize, u64> =
            [(3usize, 5u64), (4, 20), (5, 40), (6, 25), (7, 10)].into();
        let base = ks_vs_normal(&hist, 5.0, 1.2).unwrap();
        let shifted: BTreeMap<usize, u64> = hist.iter().map(|(&m, &c)| (m + 100, c)).collect();
        let moved = ks_vs_normal(&shifted, 105.0, 1.2).unwrap();
        assert_eq!(base, moved, "same standardized atoms, same distance");
    }

    #[test]
    fn ks_of_discretized_normal_is_small() {
        // histogram built from the normal law itself on a fine integer lattice
        let scale = 100.0;
        let center = 1000.0;
        let total = 1_000_000f64;
        let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
        for m in 400..=1600usize {
            let lo = (m as f64 - 0.5 - center) / scale;
            let hi = (m as f64 + 0.5 - center) / scale;
            let c = (total * (normal_cdf(hi) - normal_cdf(lo))).round() as u64;
            if c > 0 {
                hist.insert(m, c);
            }
        }
        let d = ks_vs_normal(&hist, center, scale).unwrap();
        assert!(d < 0.005, "discretization-level distance, got {d}");
    }

    #[test]
    fn ks_pmf_route_agrees_with_histogram_route() {
        let pmf: BTreeMap<usize, f64> =
            [(3usize, 0.05f64), (4, 0.2), (5, 0.4), (6, 0.25), (7, 0.1)].into();
        let hist: BTreeMap<usize, u64> = pmf
            .iter()
            .map(|(&m, &p)| (m, (p * 1e6).round() as u64))
            .collect();
        let a = ks_pmf_vs_normal(&pmf, 5.0, 1.1).unwrap();
        let b = ks_vs_normal(&hist, 5.0, 1.1).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn ks_input_validation() {
        assert!(matches!(
            ks_vs_normal(&BTreeMap::new(), 0.0, 1.0),
            Err(StatsError::EmptyHistogram)
        ));
        let hist = BTreeMap::from([(1usize, 1u64)]);
        assert!(matches!(
            ks_vs_normal(&hist, 0.0, 0.0),
            Err(StatsError::NonPositiveScale(_))
        ));
    }

    #[test]
    fn tv_cases() {
        let a: BTreeMap<usize, f64> = [(1usize, 0.5f64), (2, 0.5)].into();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let b: BTreeMap<usize, f64> = [(3usize, 0.25f64), (4, 0.75)].into();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        let bad: BTreeMap<usize, f64> = [(1usize, 0.7f64)].into();
        assert!(matches!(
            tv_distance(&a, &bad),
            Err(StatsError::PmfNotNormalized { .. })
        ));
    }

    #[test]
    fn chi_square_zero_for_exact_counts() {
        let pmf: BTreeMap<usize, f64> = [(1usize, 0.25f64), (2, 0.5), (3, 0.25)].into();
        let hist: BTreeMap<usize, u64> = [(1usize, 250u64), (2, 500), (3, 250)].into();
        assert_eq!(chi_square(&hist, &pmf).unwrap(), 0.0);
        // mild deviation gives a small positive statistic
        let hist2: BTreeMap<usize, u64> = [(1usize, 260u64), (2, 500), (3, 240)].into();
        let stat = chi_square(&hist2, &pmf).unwrap();
        assert!(stat > 0.0 && stat < 2.0, "{stat}");
    }

    #[test]
    fn quasi_power_ratio_at_zero_is_one() {
        // every entry of both tables: total probability against Gamma(p+1) = p!
        let x = build_x_table(25, 3).unwrap();
        let y = build_y_table(25, 3, &x).unwrap();
        for (table, kinds_p) in [(&x, vec![1usize, 2, 3]), (&y, vec![2, 3])] {
            for p in kinds_p {
                let model = quasi_power_model(table.kind(), p).unwrap();
                for n in p..=25usize {
                    let r = quasi_power_ratio(table, &model, n, p, 0.0).unwrap();
                    assert!(
                        (r - 1.0).abs() < 1e-9,
                        "{} (n={n}, p={p}): ratio {r}",
                        table.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn quasi_power_guard_and_mismatch() {
        let x = build_x_table(10, 2).unwrap();
        let model = quasi_power_model(Kind::X, 2).unwrap();
        // e^s below the prefactor guard
        assert!(quasi_power_ratio(&x, &model, 10, 2, -0.6).is_err());
        // model built for a different p
        assert!(quasi_power_ratio(&x, &model, 10, 1, 0.0).is_err());
        let model_y = quasi_power_model(Kind::Y, 2).unwrap();
        assert!(quasi_power_ratio(&x, &model_y, 10, 2, 0.0).is_err());
    }

    #[test]
    fn gof_report_assembly() {
        let x = build_x_table(12, 2).unwrap();
        let pmf: BTreeMap<usize, f64> = x
            .pmf(12, 2)
            .unwrap()
            .into_iter()
            .map(|(m, r)| (m, crate::combinatorics::rational_to_f64(&r)))
            .collect();
        let hist: BTreeMap<usize, u64> = pmf
            .iter()
            .map(|(&m, &p)| (m, (p * 100000.0).round() as u64))
            .filter(|&(_, c)| c > 0)
            .collect();
        let report = GofReport::compute(
            Kind::X,
            12,
            2,
            &hist,
            Normalization::limit_law(12, 2),
            Some(&pmf),
        )
        .unwrap();
        assert!(report.tv_distance.unwrap() < 1e-4);
        assert!(report.chi_square_stat.unwrap() < 0.1);
        assert!(report.ks_distance > 0.0 && report.ks_distance <= 1.0);
        assert!(report.csv_row().starts_with("X,12,2,"));
    }
}
