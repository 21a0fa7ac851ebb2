//! The function catalog: `exp`, `i exp`, Hardy's `g_alpha` and `alpha e^z`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::xnum::{normalize_angle, LogComplex, SignedTower, TowerReal, XnumError};

/// Arguments larger than this (in radians, before reduction) are not trusted.
pub const ARG_TRUST_LIMIT: f64 = 67_108_864.0; // 2^26

/// Log-moduli beyond this are kept in tower form only.
const MACHINE_LOG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EfunError {
    #[error("invalid alpha {alpha} for {kind:?}")]
    InvalidAlpha { kind: FnKind, alpha: f64 },
    #[error(transparent)]
    Xnum(#[from] XnumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnKind {
    Exp,
    RotExp,
    HardyG,
    ExpFamily,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FunctionSpec {
    pub kind: FnKind,
    pub alpha: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: FnKind,
    #[serde(default = "default_alpha")]
    alpha: f64,
}

impl TryFrom<RawSpec> for FunctionSpec {
    type Error = EfunError;

    fn try_from(raw: RawSpec) -> Result<Self, EfunError> {
        FunctionSpec::new(raw.kind, raw.alpha)
    }
}

impl FunctionSpec {
    pub fn new(kind: FnKind, alpha: f64) -> Result<Self, EfunError> {
        let ok = match kind {
            FnKind::Exp | FnKind::RotExp => true,
            FnKind::HardyG => alpha > 0.0 && alpha.is_finite(),
            FnKind::ExpFamily => alpha > 0.0 && alpha < (-1.0f64).exp(),
        };
        if !ok {
            return Err(EfunError::InvalidAlpha { kind, alpha });
        }
        let alpha = match kind {
            FnKind::Exp | FnKind::RotExp => 1.0,
            _ => alpha,
        };
        Ok(FunctionSpec { kind, alpha })
    }

    pub fn exp() -> Self {
        FunctionSpec { kind: FnKind::Exp, alpha: 1.0 }
    }

    pub fn rot_exp() -> Self {
        FunctionSpec { kind: FnKind::RotExp, alpha: 1.0 }
    }

    pub fn hardy_g(alpha: f64) -> Result<Self, EfunError> {
        Self::new(FnKind::HardyG, alpha)
    }

    pub fn exp_family(alpha: f64) -> Result<Self, EfunError> {
        Self::new(FnKind::ExpFamily, alpha)
    }

    pub fn ln_alpha(&self) -> f64 {
        self.alpha.ln()
    }

    /// True for the three members of the form `c e^z`.
    pub fn is_exp_like(&self) -> bool {
        self.kind != FnKind::HardyG
    }

    /// Constant argument offset of `c` in `c e^z`.
    fn rotation(&self) -> f64 {
        if self.kind == FnKind::RotExp {
            FRAC_PI_2
        } else {
            0.0
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            FnKind::Exp => "exp".into(),
            FnKind::RotExp => "rot_exp".into(),
            FnKind::HardyG => format!("hardy_g({})", self.alpha),
            FnKind::ExpFamily => format!("exp_family({})", self.alpha),
        }
    }
}

/// A function value in log coordinates, with the ordinary value when it fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Option<Complex64>,
    pub logrep: LogComplex,
    /// False when the argument was reduced from a raw angle too large to trust.
    pub arg_resolved: bool,
}

impl EvalResult {
    pub fn from_log(logmod: SignedTower, raw_arg: f64) -> Self {
        let arg_resolved = raw_arg.is_finite() && raw_arg.abs() < ARG_TRUST_LIMIT;
        let arg = if raw_arg.is_finite() { normalize_angle(raw_arg) } else { 0.0 };
        let logrep = LogComplex::new(logmod, arg);
        let value = match logmod.to_f64() {
            Some(l) if arg_resolved && l.abs() <= MACHINE_LOG_LIMIT => Some(polar_exact(l.exp(), arg)),
            _ => None,
        };
        EvalResult { value, logrep, arg_resolved }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return EvalResult { value: Some(z), logrep: LogComplex::new(ZERO_LOGMOD, 0.0), arg_resolved: true };
        }
        let logrep = LogComplex::from_complex(z).expect("finite non-zero");
        EvalResult { value: Some(z), logrep, arg_resolved: true }
    }

    /// Log-modulus as an `f64`, when in range.
    pub fn log_modulus(&self) -> Option<f64> {
        if self.value == Some(Complex64::new(0.0, 0.0)) {
            return Some(f64::NEG_INFINITY);
        }
        self.logrep.logmod.to_f64()
    }

    pub fn logmod(&self) -> SignedTower {
        self.logrep.logmod
    }

    /// Modulus as a tower (zero for values that underflow).
    pub fn modulus(&self) -> TowerReal {
        if self.value == Some(Complex64::new(0.0, 0.0)) {
            return TowerReal::ZERO;
        }
        self.logrep.modulus().unwrap_or(TowerReal::ZERO)
    }
}

// placeholder log-modulus for the exact zero value; never read through logrep
const ZERO_LOGMOD: SignedTower = SignedTower::ZERO;

/// Polar form that lands exactly on the axes for the angles 0, pi/2, pi, -pi/2.
pub fn polar_exact(r: f64, theta: f64) -> Complex64 {
    if theta == 0.0 {
        Complex64::new(r, 0.0)
    } else if theta == PI {
        Complex64::new(-r, 0.0)
    } else if theta == FRAC_PI_2 {
        Complex64::new(0.0, r)
    } else if theta == -FRAC_PI_2 {
        Complex64::new(0.0, -r)
    } else {
        Complex64::from_polar(r, theta)
    }
}

/// A real quantity `lead_sign * exp(lead_log) + tail`, comparable even when
/// the exponential overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitLog {
    pub lead_sign: i8,
    pub lead_log: f64,
    pub tail: f64,
}

impl SplitLog {
    pub fn to_f64(&self) -> Option<f64> {
        if self.lead_sign == 0 {
            return Some(self.tail);
        }
        let v = f64::from(self.lead_sign) * self.lead_log.exp() + self.tail;
        v.is_finite().then_some(v)
    }

    pub fn to_signed_tower(&self) -> Result<SignedTower, XnumError> {
        if let Some(v) = self.to_f64() {
            return SignedTower::from_f64(v);
        }
        let lead = SignedTower::new(self.lead_sign < 0, TowerReal::from_real(self.lead_log)?.exp()?);
        lead.add_f64(self.tail)
    }

    /// `self - other` as an `f64`, exact in the tails when the leads coincide.
    pub fn diff(&self, other: &Self) -> f64 {
        if self.lead_sign == other.lead_sign && self.lead_log == other.lead_log {
            return self.tail - other.tail;
        }
        match (self.to_f64(), other.to_f64()) {
            (Some(a), Some(b)) => a - b,
            _ => match self.cmp_value(other) {
                Ordering::Greater => f64::INFINITY,
                Ordering::Less => f64::NEG_INFINITY,
                Ordering::Equal => 0.0,
            },
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        if self.lead_sign == other.lead_sign && self.lead_log == other.lead_log {
            return self.tail.total_cmp(&other.tail);
        }
        if self.lead_log <= MACHINE_LOG_LIMIT && other.lead_log <= MACHINE_LOG_LIMIT {
            if let (Some(a), Some(b)) = (self.to_f64(), other.to_f64()) {
                return a.total_cmp(&b);
            }
        }
        let key = |s: &SplitLog| -> (i8, f64) {
            match s.lead_sign {
                0 => (0, 0.0),
                1 => (1, s.lead_log),
                _ => (-1, -s.lead_log),
            }
        };
        let (ka, kb) = (key(self), key(other));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    }
}

fn split_term(magnitude_log: f64, factor: f64) -> (i8, f64) {
    if factor == 0.0 {
        (0, f64::NEG_INFINITY)
    } else {
        (factor.signum() as i8, magnitude_log + factor.abs().ln())
    }
}

/// Log-modulus of `g_alpha` split as `e^{x^2-y^2} cos 2xy` plus the bounded part.
pub fn hardy_logmod_split(alpha: f64, z: Complex64) -> SplitLog {
    let (x, y) = (z.re, z.im);
    let (lead_sign, lead_log) = split_term(x * x - y * y, (2.0 * x * y).cos());
    SplitLog { lead_sign, lead_log, tail: x.sin() * y.cosh() + alpha.ln() }
}

/// Argument of `g_alpha` before reduction, split the same way.
pub fn hardy_arg_split(z: Complex64) -> SplitLog {
    let (x, y) = (z.re, z.im);
    let (lead_sign, lead_log) = split_term(x * x - y * y, (2.0 * x * y).sin());
    SplitLog { lead_sign, lead_log, tail: x.cos() * y.sinh() }
}

// sin x cosh y or cos x sinh y when the hyperbolic factor overflows
fn hyperbolic_term(trig: f64, y: f64) -> Result<SignedTower, XnumError> {
    if trig == 0.0 {
        return Ok(SignedTower::ZERO);
    }
    let l = y.abs() - std::f64::consts::LN_2 + trig.abs().ln();
    Ok(SignedTower::new(trig < 0.0, TowerReal::from_real(l.max(0.0))?.exp()?))
}

fn eval_hardy(alpha: f64, z: Complex64) -> Result<EvalResult, XnumError> {
    if !(z.re * z.re - z.im * z.im).is_finite() {
        // |z|^2 overflows: only the real axis keeps a meaningful argument
        let big = TowerReal::from_real(z.re.abs().max(z.im.abs()))?.powf(2.0)?.exp()?;
        let raw_arg = if z.im == 0.0 { 0.0 } else { f64::INFINITY };
        return Ok(EvalResult::from_log(SignedTower::positive(big), raw_arg));
    }
    let lm = hardy_logmod_split(alpha, z);
    let th = hardy_arg_split(z);
    let (logmod, raw_arg) = if lm.tail.is_finite() && th.tail.is_finite() {
        (lm.to_signed_tower()?, th.to_f64().unwrap_or(f64::INFINITY))
    } else {
        let lead = SplitLog { tail: alpha.ln(), ..lm }.to_signed_tower()?;
        let sign_y = if z.im < 0.0 { -1.0 } else { 1.0 };
        (lead.add(&hyperbolic_term(z.re.sin(), z.im)?)?, f64::INFINITY * sign_y)
    };
    Ok(EvalResult::from_log(logmod, raw_arg))
}

fn eval_exp_like(f: &FunctionSpec, z: Complex64) -> Result<EvalResult, XnumError> {
    let logmod = SignedTower::from_f64(z.re + f.ln_alpha())?;
    Ok(EvalResult::from_log(logmod, z.im + f.rotation()))
}

/// `f(z)` for a finite `z`.
pub fn eval(f: &FunctionSpec, z: Complex64) -> EvalResult {
    let r = match f.kind {
        FnKind::HardyG => eval_hardy(f.alpha, z),
        _ => eval_exp_like(f, z),
    };
    r.expect("log-modulus of a catalog function at a finite point fits a tower")
}

/// `f` applied to a point known only in log coordinates.
fn eval_log_point(f: &FunctionSpec, p: &EvalResult) -> Option<EvalResult> {
    if let Some(z) = p.value {
        return Some(eval(f, z));
    }
    if !p.arg_resolved {
        return None;
    }
    let lm = p.logmod();
    if lm.is_negative() {
        // modulus below the smallest double: indistinguishable from 0
        return Some(eval(f, Complex64::new(0.0, 0.0)));
    }
    let x = lm.exp().ok()?;
    let arg = p.logrep.arg;
    match f.kind {
        FnKind::HardyG if arg == 0.0 || arg == PI => {
            // g(+-X) is a positive real; sin X and log alpha vanish against e^{X^2}
            let lead = x.powf(2.0).ok()?.exp().ok()?;
            Some(EvalResult::from_log(SignedTower::positive(lead), 0.0))
        }
        FnKind::HardyG => None,
        _ if arg == 0.0 => {
            let logmod = SignedTower::positive(x).add_f64(f.ln_alpha()).ok()?;
            Some(EvalResult::from_log(logmod, f.rotation()))
        }
        _ if arg == PI => {
            let logmod = SignedTower::new(true, x).add_f64(f.ln_alpha()).ok()?;
            Some(EvalResult::from_log(logmod, f.rotation()))
        }
        _ => None,
    }
}

/// Result of iterating a catalog function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// `points[k]` is `f^{k+1}(z)`.
    pub points: Vec<EvalResult>,
    /// Index `k` of the first iterate that could not be computed.
    pub resolution_lost_at: Option<usize>,
}

impl Orbit {
    pub fn resolution_lost(&self) -> bool {
        self.resolution_lost_at.is_some()
    }
}

/// The first `n` iterates `f(z), ..., f^n(z)`.
pub fn eval_iterate(f: &FunctionSpec, z: Complex64, n: usize) -> Orbit {
    let mut points = Vec::with_capacity(n);
    let mut cur = EvalResult::from_complex(z);
    for k in 0..n {
        match eval_log_point(f, &cur) {
            Some(next) => {
                points.push(next);
                cur = next;
            }
            None => return Orbit { points, resolution_lost_at: Some(k) },
        }
    }
    Orbit { points, resolution_lost_at: None }
}

/// `f'(z)`.
pub fn derivative(f: &FunctionSpec, z: Complex64) -> EvalResult {
    let fz = eval(f, z);
    if f.is_exp_like() {
        return fz;
    }
    let h = hardy_log_factor(z);
    let prod = fz.logrep.mul(&h).expect("sum of finite log-moduli");
    let raw = if fz.arg_resolved { prod.arg } else { f64::INFINITY };
    EvalResult::from_log(prod.logmod, raw)
}

// 2z e^{z^2} + cos z in log form
fn hardy_log_factor(z: Complex64) -> LogComplex {
    let direct = 2.0 * z * (z * z).exp() + z.cos();
    if direct.is_finite() && direct.norm() > 0.0 {
        return LogComplex::from_complex(direct).expect("finite non-zero");
    }
    let logmod = (2.0 * z.norm()).ln() + z.re * z.re - z.im * z.im;
    let arg = z.arg() + 2.0 * z.re * z.im;
    LogComplex::new(SignedTower::from_f64(logmod).expect("finite"), arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_on_imaginary_axis_has_unit_modulus() {
        let r = eval(&FunctionSpec::exp(), c(0.0, 2.5));
        assert_eq!(r.log_modulus(), Some(0.0));
    }

    #[test]
    fn hardy_at_two() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let r = eval(&g, c(2.0, 0.0));
        let expected = 4f64.exp() + 2f64.sin() + 0.01f64.ln();
        assert!((r.log_modulus().unwrap() - expected).abs() < 1e-12);
        assert_eq!(r.logrep.arg, 0.0);
        assert_eq!(r.value.unwrap().im, 0.0);
    }

    #[test]
    fn hardy_far_out_on_real_axis_stays_real() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let r = eval(&g, c(-40.0, 0.0));
        assert_eq!(r.logrep.arg, 0.0);
        assert!(r.arg_resolved);
        assert_eq!(r.logmod().magnitude().height(), 4);
    }

    #[test]
    fn iterate_exp_from_zero() {
        let o = eval_iterate(&FunctionSpec::exp(), c(0.0, 0.0), 3);
        let v: Vec<f64> = o.points.iter().map(|p| p.value.unwrap().re).collect();
        assert_eq!(v[0], 1.0);
        assert!((v[1] - E).abs() < 1e-15);
        assert!((v[2] - E.powf(E)).abs() < 1e-13);
    }

    #[test]
    fn iterate_rot_exp_from_zero() {
        let o = eval_iterate(&FunctionSpec::rot_exp(), c(0.0, 0.0), 2);
        let a = o.points[0].value.unwrap();
        let b = o.points[1].value.unwrap();
        assert_eq!(a, c(0.0, 1.0));
        let expected = c(0.0, 1.0) * c(0.0, 1.0).exp();
        assert!((b - expected).norm() < 1e-15);
    }

    #[test]
    fn iterate_exp_into_tower_range() {
        let o = eval_iterate(&FunctionSpec::exp(), c(1.0, 0.0), 6);
        assert!(!o.resolution_lost());
        let heights: Vec<u32> = o.points.iter().map(|p| p.modulus().height()).collect();
        assert_eq!(heights, vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn off_axis_tower_orbit_loses_resolution() {
        let o = eval_iterate(&FunctionSpec::exp(), c(900.0, 1.0), 3);
        assert_eq!(o.resolution_lost_at, Some(1));
    }

    #[test]
    fn exp_family_negative_axis_underflows_to_zero() {
        let f = FunctionSpec::exp_family(0.1).unwrap();
        let o = eval_iterate(&f, c(-2000.0, 0.0), 2);
        assert!(o.points[0].value.is_none());
        assert!(o.points[0].logmod().is_negative());
        assert!((o.points[1].value.unwrap() - c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivatives_at_origin() {
        assert_eq!(derivative(&FunctionSpec::exp(), c(0.0, 0.0)).value, Some(c(1.0, 0.0)));
        let f = FunctionSpec::exp_family(0.2).unwrap();
        assert!((derivative(&f, c(0.0, 0.0)).value.unwrap() - c(0.2, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn hardy_derivative_at_one() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let d = derivative(&g, c(1.0, 0.0)).value.unwrap();
        let expected = eval(&g, c(1.0, 0.0)).value.unwrap() * (2.0 * E + 1f64.cos());
        assert!((d - expected).norm() / expected.norm() < 1e-13);
    }

    #[test]
    fn spec_json() {
        let f: FunctionSpec = serde_json::from_str(r#"{"kind": "hardy_g", "alpha": 0.01}"#).unwrap();
        assert_eq!(f, FunctionSpec::hardy_g(0.01).unwrap());
        let e: FunctionSpec = serde_json::from_str(r#"{"kind": "exp"}"#).unwrap();
        assert_eq!(e, FunctionSpec::exp());
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind": "exp_family", "alpha": 0.5}"#).is_err());
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind": "hardy_g", "alpha": -1}"#).is_err());
        assert_eq!(serde_json::to_string(&FunctionSpec::rot_exp()).unwrap(), r#"{"kind":"rot_exp","alpha":1.0}"#);
    }

    #[test]
    fn split_log_orders_huge_values() {
        let a = SplitLog { lead_sign: 1, lead_log: 1e6, tail: 0.5 };
        let b = SplitLog { lead_sign: 1, lead_log: 1e6, tail: -0.5 };
        assert_eq!(a.cmp_value(&b), Ordering::Greater);
        assert_eq!(a.diff(&b), 1.0);
        let n = SplitLog { lead_sign: -1, lead_log: 1e6, tail: 0.0 };
        assert_eq!(n.cmp_value(&b), Ordering::Less);
    }
}
