//! Seifert invariants of orbifold line bundles over a base with cone points,
//! with exact rational degrees.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeifertError {
    #[error("beta has {beta} entries but mult has {mult}")]
    LengthMismatch { beta: usize, mult: usize },
    #[error("multiplicity at position {0} must be positive")]
    NonPositiveMultiplicity(usize),
    #[error("beta_{index} = {beta} is outside 0 <= beta < {m}")]
    Normalization { index: usize, beta: i64, m: i64 },
    #[error("weight a must be positive")]
    NonPositiveWeight,
    #[error("a is not a common multiple of the cone orders")]
    NotCommonMultiple,
    #[error("a*d = {0} is not an integer")]
    NonIntegral(BigRational),
    #[error("tau and vol must be positive and finite, got tau = {tau}, vol = {vol}")]
    NonPositive { tau: f64, vol: f64 },
}

/// Seifert invariant `(b; beta_1, ..., beta_k)` with cone orders `m_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeifertData {
    pub b: i64,
    pub beta: Vec<i64>,
    pub mult: Vec<i64>,
}

impl SeifertData {
    pub fn new(b: i64, beta: Vec<i64>, mult: Vec<i64>) -> Result<Self, SeifertError> {
        let s = Self { b, beta, mult };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SeifertError> {
        if self.beta.len() != self.mult.len() {
            return Err(SeifertError::LengthMismatch {
                beta: self.beta.len(),
                mult: self.mult.len(),
            });
        }
        for (i, (&beta, &m)) in self.beta.iter().zip(&self.mult).enumerate() {
            if m < 1 {
                return Err(SeifertError::NonPositiveMultiplicity(i));
            }
            if beta < 0 || beta >= m {
                return Err(SeifertError::Normalization { index: i, beta, m });
            }
        }
        Ok(())
    }
}

/// `b + sum beta_i / m_i`, exactly.
pub fn orbifold_degree(s: &SeifertData) -> Result<BigRational, SeifertError> {
    s.validate()?;
    let mut deg = BigRational::from_integer(BigInt::from(s.b));
    for (&beta, &m) in s.beta.iter().zip(&s.mult) {
        deg += BigRational::new(BigInt::from(beta), BigInt::from(m));
    }
    Ok(deg)
}

/// True iff every `m_i` divides `a`.
pub fn check_common_multiple(a: i64, mult: &[i64]) -> bool {
    a >= 1 && mult.iter().all(|&m| m >= 1 && a % m == 0)
}

fn integral_product(a: i64, d: &BigRational) -> Result<BigInt, SeifertError> {
    let ad = d * BigRational::from_integer(BigInt::from(a));
    if !ad.is_integer() {
        return Err(SeifertError::NonIntegral(ad));
    }
    Ok(ad.to_integer())
}

/// Seifert invariant `(ad; 0, ..., 0)` of the bundle associated to a
/// degree-`d` bundle through the weight-`a` character.
pub fn associated_bundle_seifert(
    a: i64,
    d: &BigRational,
    mult: &[i64],
) -> Result<SeifertData, SeifertError> {
    if a < 1 {
        return Err(SeifertError::NonPositiveWeight);
    }
    if !check_common_multiple(a, mult) {
        return Err(SeifertError::NotCommonMultiple);
    }
    let ad = integral_product(a, d)?;
    let b = ad
        .to_i64()
        .ok_or_else(|| SeifertError::NonIntegral(BigRational::from_integer(ad.clone())))?;
    SeifertData::new(b, vec![0; mult.len()], mult.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emptiness {
    Empty,
    Nonempty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuliStatus {
    pub status: Emptiness,
    /// `a d`, present only for nonempty moduli.
    pub complex_dimension: Option<i64>,
    /// `tau Vol / 4 pi`.
    pub threshold: f64,
    /// `d` equals the threshold within the guard band.
    pub boundary: bool,
}

/// Relative width of the band around `d = tau Vol / 4 pi` treated as equality.
pub const THRESHOLD_GUARD: f64 = 1e-12;

/// Emptiness of the vortex moduli space for a degree-`d` bundle.
pub fn moduli_status(
    a: i64,
    d: &BigRational,
    tau: f64,
    vol: f64,
) -> Result<ModuliStatus, SeifertError> {
    if a < 1 {
        return Err(SeifertError::NonPositiveWeight);
    }
    if !(tau > 0.0 && vol > 0.0 && tau.is_finite() && vol.is_finite()) {
        return Err(SeifertError::NonPositive { tau, vol });
    }
    let ad = integral_product(a, d)?;
    let threshold = tau * vol / (4.0 * PI);
    let df = d.to_f64().unwrap_or(f64::NAN);
    let boundary = (df - threshold).abs() <= THRESHOLD_GUARD * threshold.abs().max(1.0);
    let nonempty = !boundary && df < threshold;
    Ok(ModuliStatus {
        status: if nonempty {
            Emptiness::Nonempty
        } else {
            Emptiness::Empty
        },
        complex_dimension: if nonempty { ad.to_i64() } else { None },
        threshold,
        boundary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Established for genus zero.
    Established,
    /// Winding-class model of gauge components.
    Model,
}

/// Finite abelian group given by the orders of its cyclic factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftingCokernel {
    pub factors: Vec<u64>,
    pub provenance: Provenance,
}

impl LiftingCokernel {
    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|&f| f == 1)
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }
}

impl fmt::Display for LiftingCokernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        write!(f, "(Z/{})^{}", self.factors[0], self.factors.len())
    }
}

/// Cokernel of `g -> g^a` on components of the gauge group of a genus-`g`
/// surface. Every circle-valued map on the sphere is an `a`-th power, so
/// genus zero is trivial; in higher genus the winding numbers around the
/// `2g` generating loops are only determined modulo `a`.
pub fn lifting_cokernel(genus: u32, a: u64) -> LiftingCokernel {
    let provenance = if genus == 0 {
        Provenance::Established
    } else {
        Provenance::Model
    };
    let factors = if genus == 0 || a <= 1 {
        Vec::new()
    } else {
        vec![a; 2 * genus as usize]
    };
    LiftingCokernel {
        factors,
        provenance,
    }
}

/// Renders an exact rational as `p/q`, or `p` when integral.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `0.5` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut p: BigInt = digits.parse().ok()?;
        if negative {
            p = -p;
        }
        let q = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(p, q));
    }
    let p: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(p))
}

/// Sign of `d - tau Vol/4pi` ignoring the guard band; used by monotonicity
/// checks.
pub fn below_threshold(d: &BigRational, tau: f64, vol: f64) -> bool {
    let diff = d.to_f64().unwrap_or(f64::NAN) - tau * vol / (4.0 * PI);
    diff.is_negative()
}
