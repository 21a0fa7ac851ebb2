//! The family `g(z) = alpha exp(e^{z^2} + sin z)`: real fixed points, the
//! maximum-modulus locus, preimages of rays, and inequalities in the thin
//! sector `V = {x + iy : x > K, 0 < y < e^{-x^2}}`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efun::{EfunError, FunctionSpec, SplitLog};
use crate::maxmod::{angle_dist, max_modulus, max_modulus_sampled};
use crate::xnum::{SignedTower, TowerReal, XnumError};

/// Largest `x` with `e^{x^2}` finite.
pub const X_CAP: f64 = 26.6;
pub const LOCUS_SKIP: f64 = 0.01;
pub const LOCUS_ANGLE_TOL: f64 = 1e-3;
pub const TRACE_RESIDUAL: f64 = 1e-9;
/// Below this `|y|` the tracer works with `u = ln |y|`.
const LOG_Y_SWITCH: f64 = 1e-290;
const FIXED_POINT_GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("alpha must be positive (got {0})")]
    Alpha(f64),
    #[error("no real fixed points for alpha = {0}")]
    NoRealFixedPoints(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Efun(#[from] EfunError),
    #[error(transparent)]
    Xnum(#[from] XnumError),
}

fn g_real(alpha: f64, x: f64) -> f64 {
    alpha * ((x * x).exp() + x.sin()).exp()
}

/// `g'(x) = g(x) (2x e^{x^2} + cos x)` on the real axis.
pub fn g_prime_real(alpha: f64, x: f64) -> f64 {
    g_real(alpha, x) * (2.0 * x * (x * x).exp() + x.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointPair {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub multiplier_p: f64,
    pub multiplier_q: f64,
    pub residual_p: f64,
    pub residual_q: f64,
}

fn polish(alpha: f64, mut lo: f64, mut hi: f64) -> f64 {
    let h = |x: f64| g_real(alpha, x) - x;
    let up = h(hi) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) > 0.0) == up {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d = g_prime_real(alpha, x) - 1.0;
        if d == 0.0 {
            break;
        }
        let next = x - h(x) / d;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    x
}

/// The attracting fixed point `p` and repelling fixed point `q > p` of `g` on `(0, inf)`.
///
/// `g - x` is convex for `x > 0`, so it changes sign at most twice there.
pub fn fixed_points_real(alpha: f64) -> Result<FixedPointPair, HardyError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(HardyError::Alpha(alpha));
    }
    // g(x) > x for large x; widen the range until that shows at the end
    let mut x_hi = 2.0;
    while g_real(alpha, x_hi) <= x_hi {
        x_hi += 1.0;
        if x_hi > X_CAP {
            return Err(HardyError::NoRealFixedPoints(alpha));
        }
    }
    let xs: Vec<f64> = (1..=FIXED_POINT_GRID).map(|i| x_hi * i as f64 / FIXED_POINT_GRID as f64).collect();
    let mut roots = Vec::new();
    let mut prev = (0.0, g_real(alpha, 0.0));
    for &x in &xs {
        let v = g_real(alpha, x) - x;
        if (prev.1 > 0.0) != (v > 0.0) {
            roots.push(polish(alpha, prev.0, x));
        }
        prev = (x, v);
    }
    let [p, q] = roots[..] else {
        return Err(HardyError::NoRealFixedPoints(alpha));
    };
    Ok(FixedPointPair {
        alpha,
        p,
        q,
        multiplier_p: g_prime_real(alpha, p),
        multiplier_q: g_prime_real(alpha, q),
        residual_p: (g_real(alpha, p) - p).abs(),
        residual_q: (g_real(alpha, q) - q).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocusOutcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusSample {
    pub r: f64,
    pub sin_r: f64,
    pub argmax: f64,
    pub outcome: LocusOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusReport {
    pub alpha: f64,
    pub samples: Vec<LocusSample>,
    /// Smallest tested radius from which every non-skipped radius passes.
    pub r0_empirical: Option<f64>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

fn locus_sample(f: &FunctionSpec, r: f64) -> LocusSample {
    let s = r.sin();
    let m = max_modulus_sampled(f, r);
    let argmax = m.angles.first().copied().unwrap_or(f64::NAN);
    let outcome = if s.abs() <= LOCUS_SKIP {
        LocusOutcome::Skipped
    } else {
        let target = if s > 0.0 { 0.0 } else { PI };
        if angle_dist(argmax, target) <= LOCUS_ANGLE_TOL {
            LocusOutcome::Pass
        } else {
            LocusOutcome::Fail
        }
    };
    LocusSample { r, sin_r: s, argmax, outcome }
}

/// Compares the sampled argmax angle of `|g|` on `|z| = r` with the sign of `sin r`.
pub fn hardy_locus_check(alpha: f64, r_values: &[f64]) -> Result<LocusReport, HardyError> {
    let f = FunctionSpec::hardy_g(alpha)?;
    if let Some(r) = r_values.iter().find(|r| !(**r > 0.0 && **r <= 300.0)) {
        return Err(HardyError::Domain(format!("radius {r} outside (0, 300]")));
    }
    let samples = sweep(&f, r_values);
    let count = |o| samples.iter().filter(|s| s.outcome == o).count();
    let mut order: Vec<&LocusSample> = samples.iter().collect();
    order.sort_by(|a, b| a.r.total_cmp(&b.r));
    let last_fail = order.iter().rposition(|s| s.outcome == LocusOutcome::Fail);
    let r0_empirical = match last_fail {
        None => order.first().map(|s| s.r),
        Some(i) => order[i + 1..].iter().find(|s| s.outcome == LocusOutcome::Pass).map(|s| s.r),
    };
    Ok(LocusReport {
        alpha,
        passed: count(LocusOutcome::Pass),
        failed: count(LocusOutcome::Fail),
        skipped: count(LocusOutcome::Skipped),
        samples,
        r0_empirical,
    })
}

#[cfg(feature = "parallel")]
fn sweep(f: &FunctionSpec, rs: &[f64]) -> Vec<LocusSample> {
    use rayon::prelude::*;
    rs.par_iter().map(|&r| locus_sample(f, r)).collect()
}

#[cfg(not(feature = "parallel"))]
fn sweep(f: &FunctionSpec, rs: &[f64]) -> Vec<LocusSample> {
    rs.iter().map(|&r| locus_sample(f, r)).collect()
}

/// `theta(x, y) = e^{x^2 - y^2} sin 2xy + cos x sinh y`, the unwrapped argument of `g`.
pub fn theta(x: f64, y: f64) -> f64 {
    (x * x - y * y).exp() * (2.0 * x * y).sin() + x.cos() * y.sinh()
}

/// `(d theta / dx, d theta / dy)`.
pub fn theta_gradient(x: f64, y: f64) -> (f64, f64) {
    let e = (x * x - y * y).exp();
    let (s, c) = (2.0 * x * y).sin_cos();
    let tx = e * (2.0 * x * s + 2.0 * y * c) - x.sin() * y.sinh();
    let ty = e * (-2.0 * y * s + 2.0 * x * c) + x.cos() * y.cosh();
    (tx, ty)
}

/// `ln(theta / y)` for tiny `y`, where `theta = y (2x e^{x^2} + cos x) (1 + O(y^2 x^2))`.
fn log_theta_over_y(x: f64) -> f64 {
    x * x + (2.0 * x + x.cos() * (-x * x).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// Zero once `|y|` underflows; `log_abs_y` stays exact.
    pub y: f64,
    pub log_abs_y: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageCurve {
    pub theta_target: f64,
    pub points: Vec<CurvePoint>,
    /// Set when tracing stopped before `x_max`.
    pub halted: Option<String>,
}

impl PreimageCurve {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// `y` interpolated linearly in `ln |y|` at `x`.
    pub fn log_abs_y_at(&self, x: f64) -> Option<f64> {
        let i = self.points.windows(2).position(|w| w[0].x <= x && x <= w[1].x)?;
        let (a, b) = (self.points[i], self.points[i + 1]);
        let t = (x - a.x) / (b.x - a.x);
        Some(a.log_abs_y + t * (b.log_abs_y - a.log_abs_y))
    }
}

fn correct_y(x: f64, y0: f64, target: f64) -> Option<(f64, f64)> {
    let mut y = y0;
    for _ in 0..60 {
        let r = theta(x, y) - target;
        if r.abs() < TRACE_RESIDUAL * 1e-3 {
            return Some((y, r.abs()));
        }
        let (_, ty) = theta_gradient(x, y);
        if ty == 0.0 || !ty.is_finite() {
            return None;
        }
        let next = y - r / ty;
        // keep the iterate on the seed's side of the axis
        y = if y != 0.0 && next.signum() != y.signum() { 0.5 * y } else { next };
    }
    let r = (theta(x, y) - target).abs();
    (r < TRACE_RESIDUAL).then_some((y, r))
}

/// Traces the level curve `theta(x, y) = theta_target` from `seed` for increasing `x`.
pub fn trace_preimage_ray(
    theta_target: f64,
    seed: (f64, f64),
    x_max: f64,
    step: f64,
) -> Result<PreimageCurve, HardyError> {
    let (x0, y0) = seed;
    if !(step > 0.0 && x_max > x0) {
        return Err(HardyError::Domain(format!("need step > 0 and x_max > x0 (got {step}, {x_max}, {x0})")));
    }
    if (theta(x0, y0) - theta_target).abs() >= 0.1 {
        return Err(HardyError::Domain(format!(
            "seed residual {:e} is not below 0.1",
            (theta(x0, y0) - theta_target).abs()
        )));
    }
    if theta_gradient(x0, y0).1 == 0.0 {
        return Err(HardyError::Domain("d theta / dy vanishes at the seed".into()));
    }
    let mut curve = PreimageCurve { theta_target, points: Vec::new(), halted: None };
    let Some((mut y, res)) = correct_y(x0, y0, theta_target) else {
        curve.halted = Some(format!("corrector diverged at the seed x = {x0}"));
        return Ok(curve);
    };
    let push = |c: &mut PreimageCurve, x: f64, y: f64, log_abs_y: f64, residual: f64| {
        c.points.push(CurvePoint { x, y, log_abs_y, residual });
    };
    push(&mut curve, x0, y, y.abs().ln(), res);
    let n = ((x_max - x0) / step).ceil() as usize;
    let sign = y.signum();
    let mut log_mode = false;
    for i in 1..=n {
        let x = (x0 + step * i as f64).min(x_max);
        let prev_x = curve.points.last().expect("seed pushed").x;
        if !log_mode {
            let (tx, ty) = theta_gradient(prev_x, y);
            let pred = y - tx / ty * (x - prev_x);
            let guess = if pred.signum() == sign && pred != 0.0 { pred } else { 0.5 * y };
            if theta_target != 0.0 && guess.abs() < LOG_Y_SWITCH {
                log_mode = true;
            } else {
                match correct_y(x, guess, theta_target) {
                    Some((ny, r)) => {
                        y = ny;
                        push(&mut curve, x, y, y.abs().ln(), r);
                        continue;
                    }
                    None => {
                        curve.halted = Some(format!("corrector diverged at x = {x}"));
                        break;
                    }
                }
            }
        }
        // u = ln|y| solves ln|theta_target| = u + ln(theta / y) up to O(y^2) terms
        let u = theta_target.abs().ln() - log_theta_over_y(x);
        let model = (u + log_theta_over_y(x)).exp() * sign;
        let yv = sign * u.exp();
        push(&mut curve, x, yv, u, (model - theta_target).abs());
    }
    Ok(curve)
}

/// `y` on the level curve at `x`, from the asymptotic guess `theta / (2x e^{x^2})`.
pub fn solve_level_y(theta_target: f64, x: f64) -> Option<f64> {
    let guess = theta_target / (2.0 * x * (x * x).exp() + x.cos());
    correct_y(x, guess, theta_target).map(|(y, _)| y)
}

/// Level curves `theta = pi/2 + 2 pi k` and their mirrors, for `k < count`.
pub fn figure1(x_start: f64, x_max: f64, step: f64, count: usize) -> Result<Vec<PreimageCurve>, HardyError> {
    let mut out = Vec::new();
    for k in 0..count {
        let t = FRAC_PI_2 + 2.0 * PI * k as f64;
        for target in [t, -t] {
            let y = solve_level_y(target, x_start)
                .ok_or_else(|| HardyError::Domain(format!("no seed for theta = {target} at x = {x_start}")))?;
            out.push(trace_preimage_ray(target, (x_start, y), x_max, step)?);
        }
    }
    Ok(out)
}

/// `(log(|g| / alpha) - e^{x^2}, theta / (2y) - x e^{x^2})`, computed without cancellation.
pub fn sector_deviations(x: f64, y: f64) -> (f64, f64) {
    let e = (x * x).exp();
    let (s, c) = (2.0 * x * y).sin_cos();
    let sxy = (x * y).sin();
    let dr = e * ((-y * y).exp_m1() * c - 2.0 * sxy * sxy) + x.sin() * y.cosh();
    let da = if y == 0.0 {
        // limit y -> 0 of theta / (2y)
        x.cos() / 2.0
    } else {
        let sinc = if x * y == 0.0 { 1.0 } else { s / (2.0 * x * y) };
        x * e * ((-y * y).exp() * sinc - 1.0) + x.cos() * y.sinh() / (2.0 * y)
    };
    (dr, da)
}

/// Both sector inequalities at one point: modulus band, argument band.
pub fn basic_inequalities(x: f64, y: f64) -> (bool, bool) {
    let (dr, da) = sector_deviations(x, y);
    (dr.abs() <= 2.0, da.abs() <= 1.0)
}

/// Signs of the brackets in `du/dx = u (...)` and `dv/dy = v (...)`.
fn partial_brackets(x: f64, y: f64, th: f64) -> (f64, f64) {
    let e = (x * x - y * y).exp();
    let (s, c) = (2.0 * x * y).sin_cos();
    let bx = e * (2.0 * x * c - 2.0 * y * s) + x.cos() * y.cosh()
        - th.tan() * (e * (2.0 * x * s + 2.0 * y * c) + x.sin() * y.sinh());
    let by = e * (-2.0 * y * c - 2.0 * x * s)
        + x.sin() * y.sinh()
        + (e * (-2.0 * y * s + 2.0 * x * c) + x.cos() * y.cosh()) / th.tan();
    (bx, by)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSample {
    pub x: f64,
    pub y: f64,
    pub modulus_band: bool,
    pub argument_band: bool,
    /// `None` when the point lies above the `theta = pi/4` curve.
    pub partials: Option<bool>,
}

impl SectorSample {
    fn ok(&self) -> bool {
        self.modulus_band && self.argument_band && self.partials.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSample {
    pub x: f64,
    pub y: f64,
    pub dy_dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub alpha: f64,
    pub k_candidate: f64,
    pub x_cap: f64,
    pub samples: Vec<SectorSample>,
    pub failures_above_k: usize,
    pub holds_for_k: bool,
    /// Smallest `K` in the sweep `0.5, 1.0, ...` with every sample beyond `K` passing.
    pub k_empirical: Option<f64>,
    pub gamma1_slopes: Vec<SlopeSample>,
    pub gamma1_decreasing_beyond_k: bool,
}

/// Samples `V` on `x in (x_lo, X_CAP)` and checks the sector inequalities.
///
/// The inequalities depend on `alpha` only through `log alpha`, which cancels.
pub fn sector_bounds_check(alpha: f64, k_candidate: f64, sample_count: usize) -> Result<SectorReport, HardyError> {
    if !(alpha > 0.0) {
        return Err(HardyError::Alpha(alpha));
    }
    if !(k_candidate > 0.0) {
        return Err(HardyError::Domain(format!("K must be positive (got {k_candidate})")));
    }
    let x_lo = 0.5f64.min(k_candidate);
    let cols = ((sample_count as f64).sqrt().ceil() as usize).max(2);
    let rows = sample_count.div_ceil(cols).max(1);
    let mut samples = Vec::with_capacity(cols * rows);
    for i in 0..cols {
        let x = x_lo + (X_CAP - x_lo) * (i as f64 + 0.5) / cols as f64;
        for j in 0..rows {
            let y = (-x * x).exp() * (j as f64 + 0.5) / rows as f64;
            let (modulus_band, argument_band) = basic_inequalities(x, y);
            let th = theta(x, y);
            let partials = (th > 0.0 && th <= FRAC_PI_4).then(|| {
                let (bx, by) = partial_brackets(x, y, th);
                bx > 0.0 && by > 0.0
            });
            samples.push(SectorSample { x, y, modulus_band, argument_band, partials });
        }
    }
    let failures_above_k = samples.iter().filter(|s| s.x > k_candidate && !s.ok()).count();
    let worst_fail = samples.iter().filter(|s| !s.ok()).map(|s| s.x).fold(f64::NEG_INFINITY, f64::max);
    let k_empirical = (1..=(2.0 * X_CAP) as usize).map(|i| 0.5 * i as f64).find(|k| *k >= worst_fail);
    let gamma1_slopes: Vec<SlopeSample> = (0..64)
        .filter_map(|i| {
            let x = x_lo + (X_CAP - 1.0 - x_lo) * i as f64 / 63.0;
            let y = solve_level_y(FRAC_PI_2, x)?;
            let (tx, ty) = theta_gradient(x, y);
            Some(SlopeSample { x, y, dy_dx: -tx / ty })
        })
        .collect();
    let gamma1_decreasing_beyond_k = gamma1_slopes.iter().filter(|s| s.x > k_candidate).all(|s| s.dy_dx < 0.0);
    Ok(SectorReport {
        alpha,
        k_candidate,
        x_cap: X_CAP,
        samples,
        failures_above_k,
        holds_for_k: failures_above_k == 0,
        k_empirical,
        gamma1_slopes,
        gamma1_decreasing_beyond_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsizeStep {
    pub n: usize,
    pub x_n: TowerReal,
    pub holds: bool,
    /// `log g^{n+1}(x) + 2 - log M(g^n(x))` when resolvable, in `[0, 2]` by construction.
    pub margin: Option<f64>,
    /// Both sides agree after tower absorption of the bounded terms.
    pub tower_scale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsizeReport {
    pub alpha: f64,
    pub x: f64,
    pub q: f64,
    pub steps: Vec<GsizeStep>,
    pub all_hold: bool,
}

/// Checks `g^{n+1}(x) >= e^{-2} M(g^n(x), g)` along the real orbit of `x > q`.
pub fn gsize_check(alpha: f64, x: f64, n_max: usize) -> Result<GsizeReport, HardyError> {
    let fp = fixed_points_real(alpha)?;
    if !(x > fp.q) {
        return Err(HardyError::Domain(format!("x = {x} must exceed the repelling fixed point q = {}", fp.q)));
    }
    let f = FunctionSpec::hardy_g(alpha)?;
    let ln_a = alpha.ln();
    let mut xn = TowerReal::from_real(x)?;
    let mut steps = Vec::new();
    for n in 0..=n_max {
        let (holds, margin, tower_scale, next_log) = match xn.to_f64() {
            Some(v) if (v * v).is_finite() => {
                let s = v.sin();
                let lhs = SplitLog { lead_sign: 1, lead_log: v * v, tail: s + ln_a + 2.0 };
                let rhs = SplitLog { lead_sign: 1, lead_log: v * v, tail: s.abs() + ln_a };
                let holds = lhs.cmp_value(&rhs) != Ordering::Less;
                let next = SplitLog { lead_sign: 1, lead_log: v * v, tail: s + ln_a }.to_signed_tower()?;
                (holds, Some(2.0 + s - s.abs()), false, next)
            }
            _ => {
                // sin g^n(x) is unresolved: compare lhs with sin = -1 against rhs with |sin| = 1
                let lead = SignedTower::positive(xn.powf(2.0)?.exp()?);
                let lhs = lead.add_f64(ln_a + 1.0)?;
                let rhs = crate::maxmod::max_modulus_tower(&f, xn)?;
                (lhs >= rhs, None, true, lead.add_f64(ln_a)?)
            }
        };
        steps.push(GsizeStep { n, x_n: xn, holds, margin, tower_scale });
        xn = next_log.exp()?;
    }
    Ok(GsizeReport { alpha, x, q: fp.q, all_hold: steps.iter().all(|s| s.holds), steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub alpha: f64,
    pub k: f64,
    /// `log M(2K, g)`; the disc image is inside `B(0, 1)` iff this is negative.
    pub log_max_on_disc: f64,
    /// `sup |g|` on the positive imaginary axis is `alpha e`, attained at 0.
    pub log_sup_on_axis: f64,
    pub holds: bool,
}

/// Tests `g(B(0, 2K) u {iy : y > 0}) c B(0, 1)` for one pair `(alpha, K)`.
pub fn alpha0_inclusion_check(alpha: f64, k: f64) -> Result<InclusionReport, HardyError> {
    let f = FunctionSpec::hardy_g(alpha)?;
    if !(k > 0.0) {
        return Err(HardyError::Domain(format!("K must be positive (got {k})")));
    }
    // |g(iy)| = alpha exp(e^{-y^2}) since sin(iy) is imaginary
    let log_sup_on_axis = alpha.ln() + 1.0;
    let log_max_on_disc = max_modulus(&f, 2.0 * k).logmod_f64().unwrap_or(f64::INFINITY);
    Ok(InclusionReport {
        alpha,
        k,
        log_max_on_disc,
        log_sup_on_axis,
        holds: log_max_on_disc < 0.0 && log_sup_on_axis < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points_small_alpha() {
        let fp = fixed_points_real(0.01).unwrap();
        assert!((fp.p - 0.027_975_809_943_339_35).abs() < 1e-12);
        assert!((fp.q - 1.159_561_302_210_311).abs() < 1e-12);
        assert!(fp.multiplier_p.abs() < 1.0 && fp.multiplier_q.abs() > 1.0);
    }

    #[test]
    fn no_fixed_points_for_half() {
        assert_eq!(fixed_points_real(0.5), Err(HardyError::NoRealFixedPoints(0.5)));
    }

    #[test]
    fn locus_at_quarter_turns() {
        let r = hardy_locus_check(0.01, &[2.0 * PI + FRAC_PI_2, 2.0 * PI + 1.5 * PI, 3.0 * PI]).unwrap();
        let o: Vec<LocusOutcome> = r.samples.iter().map(|s| s.outcome).collect();
        assert_eq!(o, vec![LocusOutcome::Pass, LocusOutcome::Pass, LocusOutcome::Skipped]);
        assert!(angle_dist(r.samples[1].argmax, PI) < LOCUS_ANGLE_TOL);
    }

    #[test]
    fn sector_point() {
        assert_eq!(basic_inequalities(5.0, (-25f64).exp() / 2.0), (true, true));
        let (_, da) = sector_deviations(5.0, 0.0);
        assert!(da.abs() <= 1.0);
    }

    #[test]
    fn real_axis_is_its_own_level_curve() {
        let c = trace_preimage_ray(0.0, (1.0, 0.0), 3.0, 0.1).unwrap();
        assert!(c.points.iter().all(|p| p.y == 0.0 && p.residual == 0.0));
    }

    #[test]
    fn gsize_first_step() {
        let r = gsize_check(0.01, 1.659_561_302_210_311, 2).unwrap();
        assert!(r.all_hold);
        assert!(!r.steps[0].tower_scale && r.steps[2].tower_scale);
    }
}
