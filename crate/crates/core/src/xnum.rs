//! Extended-range magnitudes stored as finite exponential towers.
//!
//! A [`TowerReal`] holds a non-negative value as `exp` applied `height` times
//! to a mantissa in `[0, 1)`. Quantities such as `M^2(r, g)` for Hardy's
//! function, roughly `exp(exp(exp(r^2)))`, stay comparable long after `f64`
//! has overflowed.
//!
//! Addition absorbs the smaller operand whenever its contribution to the
//! logarithm of the sum rounds away in `f64`, and once the logarithm of the
//! larger operand itself leaves machine range. The rule is deterministic:
//! the same operands always produce the same tower.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest tower height any operation will produce.
pub const MAX_HEIGHT: u32 = 64;

/// Relative closeness below which a subtraction at height >= 2 is refused.
const CANCELLATION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum XnumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tower height would exceed {MAX_HEIGHT}")]
    Saturated,
    #[error("indeterminate cancellation between near-equal towers")]
    IndeterminateCancellation,
    #[error("value outside machine range")]
    OutOfRange,
    #[error("cannot parse tower literal {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, XnumError>;

/// Non-negative magnitude `exp^height(mantissa)` with `mantissa` in `[0, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct TowerReal {
    height: u32,
    mantissa: f64,
}

impl TowerReal {
    pub const ZERO: TowerReal = TowerReal { height: 0, mantissa: 0.0 };
    pub const ONE: TowerReal = TowerReal { height: 1, mantissa: 0.0 };

    /// Builds a tower from an arbitrary non-negative mantissa, lifting it into
    /// `[0, 1)` by taking logarithms.
    pub fn new(height: u32, mantissa: f64) -> Result<Self> {
        if !(mantissa >= 0.0) || !mantissa.is_finite() {
            return Err(XnumError::Domain(format!("mantissa {mantissa} is not a finite non-negative real")));
        }
        let mut h = height;
        let mut m = mantissa;
        while m >= 1.0 {
            m = m.ln();
            h += 1;
        }
        if h > MAX_HEIGHT {
            return Err(XnumError::Saturated);
        }
        Ok(TowerReal { height: h, mantissa: m })
    }

    pub fn from_real(x: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(XnumError::Domain(format!("{x} is not a finite non-negative real")));
        }
        Self::new(0, x)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn is_zero(&self) -> bool {
        self.height == 0 && self.mantissa == 0.0
    }

    /// The value as an `f64`, or `None` once it overflows.
    pub fn to_f64(&self) -> Option<f64> {
        let mut v = self.mantissa;
        for _ in 0..self.height {
            v = v.exp();
            if v.is_infinite() {
                return None;
            }
        }
        Some(v)
    }

    pub fn to_real(&self) -> Result<f64> {
        self.to_f64().ok_or(XnumError::OutOfRange)
    }

    /// Natural logarithm as an `f64`; `-inf` for zero, `None` past machine range.
    pub fn ln_f64(&self) -> Option<f64> {
        if self.height == 0 {
            return Some(self.mantissa.ln());
        }
        TowerReal { height: self.height - 1, mantissa: self.mantissa }.to_f64()
    }

    pub fn exp(&self) -> Result<Self> {
        if self.height >= MAX_HEIGHT {
            return Err(XnumError::Saturated);
        }
        Ok(TowerReal { height: self.height + 1, mantissa: self.mantissa })
    }

    pub fn ln(&self) -> Result<Self> {
        if self.height == 0 {
            return Err(XnumError::Domain("logarithm of a value below 1".into()));
        }
        Ok(TowerReal { height: self.height - 1, mantissa: self.mantissa })
    }

    /// Signed natural logarithm, defined for every positive tower.
    pub fn ln_signed(&self) -> Result<SignedTower> {
        if self.is_zero() {
            return Err(XnumError::Domain("logarithm of zero".into()));
        }
        if self.height == 0 {
            SignedTower::from_f64(self.mantissa.ln())
        } else {
            Ok(SignedTower::positive(self.ln()?))
        }
    }

    /// Next representable tower above this one.
    pub fn next_up(&self) -> Self {
        let m = self.mantissa.next_up();
        if m >= 1.0 {
            TowerReal { height: self.height + 1, mantissa: 0.0 }
        } else {
            TowerReal { height: self.height, mantissa: m }
        }
    }

    /// Next representable tower below this one (zero stays zero).
    pub fn next_down(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        if self.mantissa == 0.0 {
            TowerReal { height: self.height - 1, mantissa: 1.0f64.next_down() }
        } else {
            TowerReal { height: self.height, mantissa: self.mantissa.next_down() }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = if self >= other { (*self, *other) } else { (*other, *self) };
        if b.is_zero() {
            return Ok(a);
        }
        if a.height <= 1 {
            // both below e: plain float addition
            return Self::from_real(a.mantissa_value() + b.mantissa_value());
        }
        let Some(la) = a.ln_f64() else {
            // ln(a) is beyond f64; ln(1 + b/a) <= ln 2 sits below its resolution
            return Ok(a);
        };
        let lb = b.ln_f64().expect("b <= a, so ln(b) is in range");
        let lsum = la + (lb - la).exp().ln_1p();
        if lsum == la {
            return Ok(a);
        }
        let sum = Self::from_real(lsum)?.exp()?;
        Ok(if sum < a { a } else { sum })
    }

    /// `self - other`; requires `self >= other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (a, b) = (*self, *other);
        if b > a {
            return Err(XnumError::Domain("tower subtraction with negative result".into()));
        }
        if b.is_zero() {
            return Ok(a);
        }
        if a.height <= 1 {
            return Self::from_real(a.mantissa_value() - b.mantissa_value());
        }
        if a == b {
            return Err(XnumError::IndeterminateCancellation);
        }
        match a.ln_f64() {
            Some(la) => {
                let lb = b.ln_f64().expect("b <= a, so ln(b) is in range");
                let ratio = (lb - la).exp();
                if 1.0 - ratio < CANCELLATION_GUARD {
                    return Err(XnumError::IndeterminateCancellation);
                }
                let lres = la + (-ratio).ln_1p();
                if lres < 0.0 {
                    Self::from_real(lres.exp())
                } else {
                    Self::from_real(lres)?.exp()
                }
            }
            None => {
                // ln(a) - ln(b) is either >= 1 (b/a <= 1/e, absorbed) or unresolvable
                let gap = a.ln()?.sub(&b.ln_signed()?.as_tower_if_nonneg()?)?;
                if gap >= TowerReal::ONE {
                    Ok(a)
                } else {
                    Err(XnumError::IndeterminateCancellation)
                }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::ZERO);
        }
        if self.height <= 2 && other.height <= 2 {
            return Self::from_real(self.mantissa_value() * other.mantissa_value());
        }
        let s = self.ln_signed()?.add(&other.ln_signed()?)?;
        s.exp()
    }

    /// Multiplication by a non-negative real.
    pub fn scale(&self, c: f64) -> Result<Self> {
        self.mul(&Self::from_real(c)?)
    }

    /// `self^c` for a real exponent `c >= 0`.
    pub fn powf(&self, c: f64) -> Result<Self> {
        if c < 0.0 || !c.is_finite() {
            return Err(XnumError::Domain(format!("exponent {c} must be finite and non-negative")));
        }
        if self.is_zero() {
            return Ok(if c == 0.0 { Self::ONE } else { Self::ZERO });
        }
        self.ln_signed()?.scale(c)?.exp()
    }

    // value of a height <= 2 tower (always finite)
    fn mantissa_value(&self) -> f64 {
        self.to_f64().expect("low towers are in machine range")
    }
}

impl PartialEq for TowerReal {
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height && self.mantissa == other.mantissa
    }
}

impl Eq for TowerReal {}

impl Ord for TowerReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.height.cmp(&other.height).then(self.mantissa.total_cmp(&other.mantissa))
    }
}

impl PartialOrd for TowerReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({};{:.16e})", self.height, self.mantissa)
    }
}

impl FromStr for TowerReal {
    type Err = XnumError;

    fn from_str(s: &str) -> Result<Self> {
        let err = || XnumError::Parse(s.to_string());
        let body = s.trim().strip_prefix("T(").and_then(|b| b.strip_suffix(')')).ok_or_else(err)?;
        let (h, m) = body.split_once(';').ok_or_else(err)?;
        let height: u32 = h.trim().parse().map_err(|_| err())?;
        let mantissa: f64 = m.trim().parse().map_err(|_| err())?;
        if !(0.0..1.0).contains(&mantissa) || height > MAX_HEIGHT {
            return Err(err());
        }
        Ok(TowerReal { height, mantissa })
    }
}

impl Serialize for TowerReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TowerReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real number with a tower magnitude, used for log-moduli that may be negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedTower {
    negative: bool,
    magnitude: TowerReal,
}

impl SignedTower {
    pub const ZERO: SignedTower = SignedTower { negative: false, magnitude: TowerReal::ZERO };

    pub fn positive(magnitude: TowerReal) -> Self {
        SignedTower { negative: false, magnitude }
    }

    pub fn new(negative: bool, magnitude: TowerReal) -> Self {
        SignedTower { negative: negative && !magnitude.is_zero(), magnitude }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(XnumError::Domain(format!("{x} is not finite")));
        }
        Ok(Self::new(x < 0.0, TowerReal::from_real(x.abs())?))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn magnitude(&self) -> TowerReal {
        self.magnitude
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.magnitude.to_f64().map(|m| if self.negative { -m } else { m })
    }

    pub fn neg(&self) -> Self {
        Self::new(!self.negative, self.magnitude)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if let (Some(x), Some(y)) = (self.to_f64(), other.to_f64()) {
            let s = x + y;
            if s.is_finite() {
                return Self::from_f64(s);
            }
        }
        if self.negative == other.negative {
            return Ok(Self::new(self.negative, self.magnitude.add(&other.magnitude)?));
        }
        let (big, small) = if self.magnitude >= other.magnitude { (self, other) } else { (other, self) };
        Ok(Self::new(big.negative, big.magnitude.sub(&small.magnitude)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn add_f64(&self, x: f64) -> Result<Self> {
        self.add(&Self::from_f64(x)?)
    }

    /// Multiplication by a real constant.
    pub fn scale(&self, c: f64) -> Result<Self> {
        let m = self.magnitude.scale(c.abs())?;
        Ok(Self::new(self.negative != (c < 0.0), m))
    }

    /// `exp(self)` as a tower; values that underflow `f64` become zero.
    pub fn exp(&self) -> Result<TowerReal> {
        if !self.negative {
            return self.magnitude.exp();
        }
        match self.to_f64() {
            Some(x) => TowerReal::from_real(x.exp()),
            None => Ok(TowerReal::ZERO),
        }
    }

    fn as_tower_if_nonneg(&self) -> Result<TowerReal> {
        if self.negative {
            Ok(TowerReal::ZERO)
        } else {
            Ok(self.magnitude)
        }
    }
}

impl Ord for SignedTower {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.negative, other.negative) {
            (false, false) => self.magnitude.cmp(&other.magnitude),
            (true, true) => other.magnitude.cmp(&self.magnitude),
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
        }
    }
}

impl PartialOrd for SignedTower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SignedTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-{}", self.magnitude)
        } else {
            write!(f, "{}", self.magnitude)
        }
    }
}

impl FromStr for SignedTower {
    type Err = XnumError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix('-') {
            Some(rest) => Ok(Self::new(true, rest.parse()?)),
            None => Ok(Self::positive(s.parse()?)),
        }
    }
}

impl Serialize for SignedTower {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedTower {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Normalizes an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Non-zero complex number stored as (log-modulus, argument).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub logmod: SignedTower,
    pub arg: f64,
}

impl LogComplex {
    pub fn new(logmod: SignedTower, arg: f64) -> Self {
        LogComplex { logmod, arg: normalize_angle(arg) }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        let r = z.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(XnumError::Domain(format!("{z} has no finite logarithm")));
        }
        Ok(Self::new(SignedTower::from_f64(r.ln())?, z.arg()))
    }

    /// Ordinary complex value, or `OutOfRange` if the modulus over- or underflows.
    pub fn to_complex(&self) -> Result<Complex64> {
        let l = self.logmod.to_f64().ok_or(XnumError::OutOfRange)?;
        let r = l.exp();
        if !r.is_finite() || r < f64::MIN_POSITIVE {
            return Err(XnumError::OutOfRange);
        }
        Ok(Complex64::from_polar(r, self.arg))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.logmod.add(&other.logmod)?, self.arg + other.arg))
    }

    /// Modulus as a tower.
    pub fn modulus(&self) -> Result<TowerReal> {
        self.logmod.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn t(h: u32, m: f64) -> TowerReal {
        TowerReal::new(h, m).unwrap()
    }

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn from_real_small_values() {
        assert_eq!(TowerReal::from_real(0.0).unwrap(), TowerReal::ZERO);
        assert_eq!(TowerReal::from_real(1.0).unwrap(), t(1, 0.0));
        assert_eq!(TowerReal::from_real(E).unwrap(), t(2, 0.0));
        assert!(TowerReal::from_real(-1.0).is_err());
        assert!(TowerReal::from_real(f64::NAN).is_err());
        assert!(TowerReal::from_real(f64::INFINITY).is_err());
    }

    #[test]
    fn compare_examples() {
        assert!(t(0, 0.0) < t(1, 0.0));
        assert_eq!(t(2, 0.0).cmp(&t(2, 0.0)), Ordering::Equal);
        let a = TowerReal::from_real(10f64.exp()).unwrap();
        let b = TowerReal::from_real(9.9f64.exp()).unwrap();
        assert_eq!(a.cmp(&b), Ordering::Greater);
    }

    #[test]
    fn exp_ln_examples() {
        assert_eq!(t(2, 0.0).exp().unwrap(), t(3, 0.0));
        assert_eq!(t(1, 0.0).ln().unwrap(), TowerReal::ZERO);
        assert!(TowerReal::from_real(0.5).unwrap().ln().is_err());
        assert_eq!(t(MAX_HEIGHT, 0.5).exp(), Err(XnumError::Saturated));
    }

    #[test]
    fn exp_of_709_matches_high_precision_mantissa() {
        // ln ln ln 709, from a 40-digit decimal evaluation
        let expected = 0.632_110_873_112_651_4_f64;
        let x = TowerReal::from_real(709.0).unwrap().exp().unwrap();
        assert_eq!(x.height(), 4);
        assert!(ulps(x.mantissa(), expected) <= 2, "{} vs {expected}", x.mantissa());
    }

    #[test]
    fn add_identity_and_absorption() {
        let x = TowerReal::from_real(123.25).unwrap();
        assert_eq!(x.add(&TowerReal::ZERO).unwrap(), x);
        let big = TowerReal::from_real(1000.0).unwrap().exp().unwrap();
        let small = TowerReal::from_real(10.0).unwrap().exp().unwrap();
        let sum = big.add(&small).unwrap();
        // ln(e^1000 + e^10) = 1000 + ln1p(e^-990) = 1000 in double
        let log_sum = sum.ln_f64().unwrap();
        assert!((log_sum - 1000.0).abs() / 1000.0 < 1e-12);
        assert_eq!(sum, big);
    }

    #[test]
    fn add_small_mixed_heights_is_not_absorbed() {
        let a = TowerReal::from_real(2.745).unwrap();
        let b = TowerReal::from_real(0.9).unwrap();
        let s = a.add(&b).unwrap().to_f64().unwrap();
        assert!((s - 3.645).abs() < 1e-13);
    }

    #[test]
    fn mul_small_values() {
        let p = TowerReal::from_real(2.0).unwrap().mul(&TowerReal::from_real(3.0).unwrap()).unwrap();
        let six = TowerReal::from_real(6.0).unwrap();
        assert_eq!(p.height(), six.height());
        assert!(ulps(p.mantissa(), six.mantissa()) <= 2);
    }

    #[test]
    fn mul_at_tower_scale_adds_logs() {
        let k = TowerReal::from_real(1.0 / 2048.0).unwrap();
        let m = TowerReal::from_real(46630.0).unwrap().exp().unwrap();
        let p = k.mul(&m).unwrap();
        let l = p.ln_f64().unwrap();
        assert!((l - (46630.0 - 2048f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn sub_rules() {
        let a = TowerReal::from_real(10.0).unwrap();
        let b = TowerReal::from_real(4.0).unwrap();
        assert!((a.sub(&b).unwrap().to_f64().unwrap() - 6.0).abs() < 1e-13);
        assert!(b.sub(&a).is_err());
        let huge = TowerReal::from_real(500.0).unwrap().exp().unwrap();
        assert_eq!(huge.sub(&huge), Err(XnumError::IndeterminateCancellation));
        let tiny = TowerReal::from_real(1.0).unwrap();
        assert_eq!(huge.sub(&tiny).unwrap(), huge);
    }

    #[test]
    fn signed_add_and_exp() {
        let a = SignedTower::from_f64(5.5).unwrap();
        let b = SignedTower::from_f64(-7.25).unwrap();
        assert!((a.add(&b).unwrap().to_f64().unwrap() + 1.75).abs() < 1e-13);
        assert_eq!(a.add(&a.neg()).unwrap(), SignedTower::ZERO);
        let e = SignedTower::from_f64(-800.0).unwrap().exp().unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn powf_matches_float() {
        let x = TowerReal::from_real(3.0).unwrap().powf(1.5).unwrap();
        assert!((x.to_f64().unwrap() - 3f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let x = TowerReal::from_real(709.0).unwrap().exp().unwrap();
        let s = x.to_string();
        assert!(s.starts_with("T(4;6.3211087311265"), "{s}");
        assert_eq!(s.parse::<TowerReal>().unwrap(), x);
        assert_eq!(TowerReal::ZERO.to_string().parse::<TowerReal>().unwrap(), TowerReal::ZERO);
        assert!("T(1;1.5)".parse::<TowerReal>().is_err());
        assert!("T(1,0.5)".parse::<TowerReal>().is_err());
        let st = SignedTower::from_f64(-3.0).unwrap();
        assert_eq!(st.to_string().parse::<SignedTower>().unwrap(), st);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(serde_json::from_str::<TowerReal>(&json).unwrap(), x);
    }

    #[test]
    fn log_complex_conversion() {
        let z = Complex64::new(-1.0, -0.0);
        let l = LogComplex::from_complex(z).unwrap();
        assert_eq!(l.arg, PI);
        let big = LogComplex::new(SignedTower::from_f64(800.0).unwrap(), 0.3);
        assert_eq!(big.to_complex(), Err(XnumError::OutOfRange));
        let small = LogComplex::new(SignedTower::from_f64(-800.0).unwrap(), 0.3);
        assert_eq!(small.to_complex(), Err(XnumError::OutOfRange));
        let w = LogComplex::from_complex(Complex64::new(3.0, 4.0)).unwrap().to_complex().unwrap();
        assert!((w - Complex64::new(3.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
