//! Product weight functions `r(k) = ∏_j r_j(k_j)` and the weighted norms they
//! induce on Hermite coefficients.
//!
//! Two families are supported, both with `r_j(0) = 1`:
//!
//! * polynomial decay, `r_j(k) = γ_j k^{−α_j}` with `α_j > 1`;
//! * exponential decay, `r_j(k) = γ_j ω_j^k` with `0 < ω_j < 1`.
//!
//! The weights `γ` must be positive and non-increasing. A function belongs to
//! the space when `‖f‖²_r = Σ r(k)^{−1} f̂(k)²` is finite.

use serde::{Deserialize, Serialize};

use crate::coeffs::CoeffMap;
use crate::error::{check_dim, Error, Result};
use crate::hermite::MultiIndex;

/// Largest Touchard order supported by [`touchard_m`].
pub const MAX_TOUCHARD_ORDER: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Polynomial,
    Exponential,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Polynomial => "polynomial",
            Family::Exponential => "exponential",
        }
    }
}

/// A validated product weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpecJson", into = "WeightSpecJson")]
pub struct WeightSpec {
    family: Family,
    gamma: Vec<f64>,
    /// `α` for the polynomial family, `ω` for the exponential one.
    shape: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WeightSpecJson {
    family: Family,
    gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Vec<f64>>,
}

impl TryFrom<WeightSpecJson> for WeightSpec {
    type Error = Error;

    fn try_from(j: WeightSpecJson) -> Result<Self> {
        match (j.family, j.alpha, j.omega) {
            (Family::Polynomial, Some(alpha), None) => WeightSpec::polynomial(alpha, j.gamma),
            (Family::Exponential, None, Some(omega)) => WeightSpec::exponential(omega, j.gamma),
            (Family::Polynomial, _, _) => Err(Error::parse(
                "polynomial weight needs \"alpha\" and no \"omega\"",
            )),
            (Family::Exponential, _, _) => Err(Error::parse(
                "exponential weight needs \"omega\" and no \"alpha\"",
            )),
        }
    }
}

impl From<WeightSpec> for WeightSpecJson {
    fn from(s: WeightSpec) -> Self {
        let (alpha, omega) = match s.family {
            Family::Polynomial => (Some(s.shape), None),
            Family::Exponential => (None, Some(s.shape)),
        };
        WeightSpecJson {
            family: s.family,
            gamma: s.gamma,
            alpha,
            omega,
        }
    }
}

fn validate_gamma(gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() {
        return Err(Error::domain("weight dimension must be at least 1"));
    }
    if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::domain(format!(
            "gamma entries must be positive, got {g}"
        )));
    }
    if let Some(i) = gamma.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::domain(format!(
            "gamma must be non-increasing: gamma[{}] = {} < gamma[{}] = {}",
            i,
            gamma[i],
            i + 1,
            gamma[i + 1]
        )));
    }
    Ok(())
}

impl WeightSpec {
    pub fn polynomial(alpha: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        validate_gamma(&gamma)?;
        check_dim(gamma.len(), alpha.len())?;
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 1.0)) {
            return Err(Error::domain(format!(
                "alpha entries must exceed 1, got {a}"
            )));
        }
        Ok(WeightSpec {
            family: Family::Polynomial,
            gamma,
            shape: alpha,
        })
    }

    pub fn exponential(omega: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        validate_gamma(&gamma)?;
        check_dim(gamma.len(), omega.len())?;
        if let Some(w) = omega.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
            return Err(Error::domain(format!(
                "omega entries must lie in (0,1), got {w}"
            )));
        }
        Ok(WeightSpec {
            family: Family::Exponential,
            gamma,
            shape: omega,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight spec serializes")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        (self.family == Family::Polynomial).then_some(&self.shape[..])
    }

    pub fn omega(&self) -> Option<&[f64]> {
        (self.family == Family::Exponential).then_some(&self.shape[..])
    }

    /// `α` or `ω` of coordinate `j`.
    pub fn shape(&self, j: usize) -> f64 {
        self.shape[j]
    }

    /// The one-dimensional weight of coordinate `j`.
    pub fn restrict(&self, j: usize) -> WeightSpec {
        WeightSpec {
            family: self.family,
            gamma: vec![self.gamma[j]],
            shape: vec![self.shape[j]],
        }
    }

    /// `r_j(k)`.
    pub fn coord_weight(&self, j: usize, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let (g, s) = (self.gamma[j], self.shape[j]);
        match self.family {
            Family::Polynomial => g * (k as f64).powf(-s),
            Family::Exponential => g * s.powi(k as i32),
        }
    }

    /// `r_j(k)^{−1}`.
    pub fn coord_inv_weight(&self, j: usize, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let (g, s) = (self.gamma[j], self.shape[j]);
        match self.family {
            Family::Polynomial => (k as f64).powf(s) / g,
            Family::Exponential => s.powi(-(k as i32)) / g,
        }
    }

    /// `ln r_j(k)`, finite even where `r_j(k)` underflows.
    pub fn coord_ln_weight(&self, j: usize, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let (g, s) = (self.gamma[j], self.shape[j]);
        match self.family {
            Family::Polynomial => g.ln() - s * (k as f64).ln(),
            Family::Exponential => g.ln() + k as f64 * s.ln(),
        }
    }

    /// `r(k)`.
    pub fn weight_value(&self, k: &MultiIndex) -> Result<f64> {
        check_dim(self.dim(), k.dim())?;
        Ok(k.entries()
            .iter()
            .enumerate()
            .map(|(j, &kj)| self.coord_weight(j, kj))
            .product())
    }

    /// `ln r(k)`.
    pub fn ln_weight(&self, k: &MultiIndex) -> Result<f64> {
        check_dim(self.dim(), k.dim())?;
        Ok(k.entries()
            .iter()
            .enumerate()
            .map(|(j, &kj)| self.coord_ln_weight(j, kj))
            .sum())
    }

    /// `Σ_{k≥1} r_j(k)` for one coordinate: `γ ζ(α)` or `γ ω/(1−ω)`.
    pub fn coord_tail_sum(&self, j: usize) -> f64 {
        let (g, s) = (self.gamma[j], self.shape[j]);
        match self.family {
            Family::Polynomial => g * riemann_zeta(s).expect("alpha validated > 1"),
            Family::Exponential => g * s / (1.0 - s),
        }
    }

    /// `Σ_{k ∈ N_0^d} r(k) = ∏_j (1 + Σ_{k≥1} r_j(k))`.
    pub fn weight_sum(&self) -> f64 {
        (0..self.dim())
            .map(|j| 1.0 + self.coord_tail_sum(j))
            .product()
    }

    /// Short human-readable description.
    pub fn summary(&self) -> String {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        let sym = match self.family {
            Family::Polynomial => "alpha",
            Family::Exponential => "omega",
        };
        format!(
            "{} d={} gamma=[{}] {}=[{}]",
            self.family.name(),
            self.dim(),
            fmt(&self.gamma),
            sym,
            fmt(&self.shape)
        )
    }
}

/// `weight_value` as a free function.
pub fn weight_value(spec: &WeightSpec, k: &MultiIndex) -> Result<f64> {
    spec.weight_value(k)
}

/// `weight_sum` as a free function.
pub fn weight_sum(spec: &WeightSpec) -> f64 {
    spec.weight_sum()
}

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

/// Riemann zeta `ζ(α)` for real `α > 1`.
///
/// Direct summation of the first `N − 1` terms plus the Euler–Maclaurin tail
/// `N^{1−α}/(α−1) + N^{−α}/2 + Σ_j B_{2j}/(2j)! · α(α+1)…(α+2j−2) N^{−α−2j+1}`.
pub fn riemann_zeta(alpha: f64) -> Result<f64> {
    if alpha <= 1.0 || !alpha.is_finite() {
        return Err(Error::domain(format!("zeta needs alpha > 1, got {alpha}")));
    }
    // N grows mildly with α so the Bernoulli terms stay small relative to N^{-α}
    let n: u32 = 32 + (alpha.min(64.0) as u32);
    let nf = n as f64;
    let mut sum = 0.0;
    for k in (1..n).rev() {
        sum += (k as f64).powf(-alpha);
    }
    let mut tail = nf.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * nf.powf(-alpha);
    let mut rising = alpha;
    let mut power = nf.powf(-alpha - 1.0);
    for (j, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        tail += b * rising * power;
        let a = alpha + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        power /= nf * nf;
    }
    Ok(sum + tail)
}

/// Stirling number of the second kind `S(n, k)`, exact for `n ≤ 30`.
fn stirling2_row(n: u32) -> Vec<u128> {
    let n = n as usize;
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for i in 1..=n {
        for k in (1..=i).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    row
}

/// The Touchard auxiliary polynomial `m_α`, defined by
/// `Σ_{k≥1} k^α x^k / k! = x · m_α(x) · e^x`; it has degree `α − 1` and
/// `x m_α(x) = Σ_{j=1}^{α} S(α, j) x^j`.
pub fn touchard_m(alpha: u32, x: f64) -> Result<f64> {
    if alpha == 0 {
        return Err(Error::domain("touchard order must be at least 1"));
    }
    if alpha > MAX_TOUCHARD_ORDER {
        return Err(Error::domain(format!(
            "touchard order {alpha} exceeds {MAX_TOUCHARD_ORDER}"
        )));
    }
    let row = stirling2_row(alpha);
    // Horner over m_α(x) = Σ_{j=1}^{α} S(α,j) x^{j−1}
    Ok(row[1..]
        .iter()
        .rev()
        .fold(0.0, |acc, &s| acc * x + s as f64))
}

/// A weighted norm, or the index at which it left the representable range.
#[derive(Debug, Clone, PartialEq)]
pub struct Norm {
    /// `‖f‖_r` over the stored coefficients; `+∞` when `overflow_at` is set.
    pub value: f64,
    /// First index (canonical order) whose term `r(k)^{−1} f̂(k)²`, or the
    /// running sum, exceeded `f64::MAX`.
    pub overflow_at: Option<MultiIndex>,
}

impl Norm {
    pub fn is_finite(&self) -> bool {
        self.overflow_at.is_none()
    }

    pub fn squared(&self) -> f64 {
        self.value * self.value
    }
}

/// `r(k)^{−1} f̂(k)²`, `None` if it overflows.
fn weighted_term(spec: &WeightSpec, k: &MultiIndex, c: f64) -> Option<f64> {
    if c == 0.0 {
        return Some(0.0);
    }
    let ln_term = 2.0 * c.abs().ln() - spec.ln_weight(k).ok()?;
    if ln_term > f64::MAX.ln() {
        return None;
    }
    let direct = k
        .entries()
        .iter()
        .enumerate()
        .fold(c * c, |acc, (j, &kj)| acc * spec.coord_inv_weight(j, kj));
    if direct.is_finite() && direct > 0.0 {
        Some(direct)
    } else {
        Some(ln_term.exp())
    }
}

/// `‖f‖²_r` restricted to stored coefficients, with overflow detection.
pub fn norm(spec: &WeightSpec, coeffs: &CoeffMap) -> Result<Norm> {
    check_dim(spec.dim(), coeffs.dim())?;
    let mut total = 0.0;
    for (k, c) in coeffs.iter() {
        match weighted_term(spec, k, c) {
            Some(t) if (total + t).is_finite() => total += t,
            _ => {
                return Ok(Norm {
                    value: f64::INFINITY,
                    overflow_at: Some(k.clone()),
                })
            }
        }
    }
    Ok(Norm {
        value: total.sqrt(),
        overflow_at: None,
    })
}

/// `⟨f, g⟩_r = Σ r(k)^{−1} f̂(k) ĝ(k)`.
pub fn inner_product(spec: &WeightSpec, a: &CoeffMap, b: &CoeffMap) -> Result<f64> {
    check_dim(spec.dim(), a.dim())?;
    check_dim(spec.dim(), b.dim())?;
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut total = 0.0;
    for (k, x) in small.iter() {
        let y = large.get(k);
        if y == 0.0 || x == 0.0 {
            continue;
        }
        let inv: f64 = k
            .entries()
            .iter()
            .enumerate()
            .map(|(j, &kj)| spec.coord_inv_weight(j, kj))
            .product();
        total += inv * x * y;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Provenance;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn poly1(alpha: f64, gamma: f64) -> WeightSpec {
        WeightSpec::polynomial(vec![alpha], vec![gamma]).unwrap()
    }

    fn exp1(omega: f64, gamma: f64) -> WeightSpec {
        WeightSpec::exponential(vec![omega], vec![gamma]).unwrap()
    }

    #[test]
    fn weight_value_examples() {
        assert_eq!(
            poly1(2.0, 1.0)
                .weight_value(&MultiIndex::from([0]))
                .unwrap(),
            1.0
        );
        assert_relative_eq!(
            poly1(2.0, 0.5)
                .weight_value(&MultiIndex::from([3]))
                .unwrap(),
            0.5 / 9.0,
            epsilon = 1e-16
        );
        let e = WeightSpec::exponential(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        assert_eq!(e.weight_value(&MultiIndex::from([2, 1])).unwrap(), 0.125);
        assert!(e.weight_value(&MultiIndex::from([2])).is_err());
    }

    #[test]
    fn weight_sum_examples() {
        assert_relative_eq!(exp1(0.5, 1.0).weight_sum(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(
            poly1(2.0, 1.0).weight_sum(),
            1.0 + PI * PI / 6.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(exp1(0.5, 1e-12).weight_sum(), 1.0, epsilon = 2e-12);
        assert_relative_eq!(poly1(3.0, 1e-12).weight_sum(), 1.0, epsilon = 2e-12);
    }

    #[test]
    fn zeta_against_closed_forms() {
        assert_relative_eq!(
            riemann_zeta(2.0).unwrap(),
            PI.powi(2) / 6.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            riemann_zeta(4.0).unwrap(),
            PI.powi(4) / 90.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            riemann_zeta(6.0).unwrap(),
            PI.powi(6) / 945.0,
            max_relative = 1e-13
        );
        let z50 = riemann_zeta(50.0).unwrap();
        assert!((z50 - (1.0 + 2f64.powi(-50))).abs() <= 1e-15);
        assert!(riemann_zeta(1.0).is_err());
        assert!(riemann_zeta(0.5).is_err());
        assert!(riemann_zeta(f64::NAN).is_err());
    }

    #[test]
    fn zeta_near_pole() {
        // ζ(s) = 1/(s−1) + γ_E + O(s−1)
        let s = 1.0 + 1e-6;
        let euler_gamma = 0.577_215_664_901_532_9;
        assert_relative_eq!(
            riemann_zeta(s).unwrap(),
            1.0 / (s - 1.0) + euler_gamma,
            max_relative = 1e-10
        );
        // ζ(3/2), reference value 2.612375348685488
        assert_relative_eq!(
            riemann_zeta(1.5).unwrap(),
            2.612_375_348_685_488,
            max_relative = 1e-13
        );
    }

    #[test]
    fn touchard_examples() {
        assert_eq!(touchard_m(1, 0.3).unwrap(), 1.0);
        assert_eq!(touchard_m(2, 1.0).unwrap(), 2.0);
        assert_eq!(touchard_m(2, 0.0).unwrap(), 1.0);
        assert!(touchard_m(0, 1.0).is_err());
        assert!(touchard_m(31, 1.0).is_err());
        // Bell number B_5 = 52 = m_5(1)
        assert_eq!(touchard_m(5, 1.0).unwrap(), 52.0);
    }

    #[test]
    fn touchard_matches_series() {
        for alpha in 1..=6u32 {
            for &x in &[0.05, 0.25, 0.5, 1.0] {
                let mut s = 0.0;
                let mut term = 1.0; // x^k / k!
                for k in 1..=200u32 {
                    term *= x / k as f64;
                    s += (k as f64).powi(alpha as i32) * term;
                }
                let expected = s / (x * x.exp());
                assert_relative_eq!(
                    touchard_m(alpha, x).unwrap(),
                    expected,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn validation() {
        assert!(WeightSpec::polynomial(vec![1.0], vec![1.0]).is_err());
        assert!(WeightSpec::polynomial(vec![2.0, 2.0], vec![0.5, 1.0]).is_err());
        assert!(WeightSpec::polynomial(vec![2.0], vec![1.0, 1.0]).is_err());
        assert!(WeightSpec::exponential(vec![1.0], vec![1.0]).is_err());
        assert!(WeightSpec::exponential(vec![0.0], vec![1.0]).is_err());
        assert!(WeightSpec::exponential(vec![0.5], vec![0.0]).is_err());
        assert!(WeightSpec::exponential(vec![], vec![]).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = WeightSpec::from_json(
            r#"{"family":"exponential","gamma":[1.0,0.5],"omega":[0.5,0.25]}"#,
        )
        .unwrap();
        assert_eq!(s.omega(), Some(&[0.5, 0.25][..]));
        assert_eq!(WeightSpec::from_json(&s.to_json()).unwrap(), s);
        let p =
            WeightSpec::from_json(r#"{"family":"polynomial","gamma":[1],"alpha":[2]}"#).unwrap();
        assert_eq!(p.family(), Family::Polynomial);
        assert!(
            WeightSpec::from_json(r#"{"family":"polynomial","gamma":[1],"omega":[0.5]}"#).is_err()
        );
        assert!(WeightSpec::from_json(
            r#"{"family":"exponential","gamma":[1,2],"omega":[0.5,0.5]}"#
        )
        .is_err());
        assert!(WeightSpec::from_json(r#"{"family":"cubic","gamma":[1]}"#).is_err());
    }

    #[test]
    fn norm_examples() {
        let c = CoeffMap::from_entries(1, [(MultiIndex::from([0]), -3.5)], Provenance::Analytic)
            .unwrap();
        assert_eq!(norm(&exp1(0.3, 0.2), &c).unwrap().value, 3.5);
        let c = CoeffMap::from_entries(1, [(MultiIndex::from([1]), 1.0)], Provenance::Analytic)
            .unwrap();
        assert_eq!(norm(&poly1(2.0, 1.0), &c).unwrap().value, 1.0);
        let wrong = CoeffMap::new(2, Provenance::Analytic);
        assert!(norm(&poly1(2.0, 1.0), &wrong).is_err());
    }

    #[test]
    fn norm_overflow_sentinel() {
        let spec = poly1(4.0, 1.0);
        let c = CoeffMap::from_entries(
            1,
            [(MultiIndex::from([1 << 20]), 1e145)],
            Provenance::Analytic,
        )
        .unwrap();
        let n = norm(&spec, &c).unwrap();
        assert!(!n.is_finite());
        assert_eq!(n.value, f64::INFINITY);
        assert_eq!(n.overflow_at, Some(MultiIndex::from([1 << 20])));
        let n = norm(&poly1(2.0, 1.0), &c).unwrap();
        assert!(n.is_finite());
        assert_relative_eq!(n.value, 1e145 * (1u64 << 20) as f64, max_relative = 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let spec = poly1(2.0, 0.5);
        let a = CoeffMap::from_entries(1, [(MultiIndex::from([2]), 1.0)], Provenance::Analytic)
            .unwrap();
        let b = CoeffMap::from_entries(1, [(MultiIndex::from([2]), 3.0)], Provenance::Analytic)
            .unwrap();
        assert_relative_eq!(inner_product(&spec, &a, &b).unwrap(), 24.0, epsilon = 1e-13);
        let z = CoeffMap::from_entries(1, [(MultiIndex::from([0]), 1.0)], Provenance::Analytic)
            .unwrap();
        let o = CoeffMap::from_entries(1, [(MultiIndex::from([1]), 1.0)], Provenance::Analytic)
            .unwrap();
        assert_eq!(inner_product(&spec, &z, &o).unwrap(), 0.0);
        let n = norm(&spec, &b).unwrap().value;
        assert_relative_eq!(
            inner_product(&spec, &b, &b).unwrap(),
            n * n,
            max_relative = 1e-14
        );
    }

    #[test]
    fn product_structure() {
        let spec = WeightSpec::polynomial(vec![2.0, 3.0, 2.5], vec![1.0, 0.5, 0.25]).unwrap();
        let k = MultiIndex::from([3, 0, 2]);
        let whole = spec.weight_value(&k).unwrap();
        let parts: f64 = (0..3)
            .map(|j| {
                spec.restrict(j)
                    .weight_value(&MultiIndex::from([k.entries()[j]]))
                    .unwrap()
            })
            .product();
        assert_eq!(whole, parts);
    }
}
