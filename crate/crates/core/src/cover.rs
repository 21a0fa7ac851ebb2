//! Winding-number checks that iterate images of annuli cover target annuli.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efun::{FnKind, FunctionSpec};
use crate::maxmod::{build_ladder, min_modulus};
use crate::xnum::{TowerReal, XnumError};

pub const DEFAULT_SAMPLES: usize = 4096;
const MAX_SAMPLES: usize = 1 << 20;
const MAX_SUBDIVISION_DEPTH: u32 = 40;
const RESIDUAL_LIMIT: f64 = 0.1;
/// Fixed offset into the Halton sequence used for target sampling.
pub const TARGET_SEED: u64 = 7919;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("target too close to image of contour (min |f^n - w| = {0:e})")]
    TooClose(f64),
    #[error("inconclusive winding count (residual {0:.3})")]
    Inconclusive(f64),
    #[error("f^n leaves machine range on the contour")]
    OutOfRange,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Xnum(#[from] XnumError),
}

/// `f^n(z)` by plain complex arithmetic, `None` once it overflows.
pub fn iterate_machine(f: &FunctionSpec, n: usize, z: Complex64) -> Option<Complex64> {
    let mut w = z;
    for _ in 0..n {
        w = match f.kind {
            FnKind::Exp => w.exp(),
            FnKind::RotExp => Complex64::i() * w.exp(),
            FnKind::ExpFamily => f.alpha * w.exp(),
            FnKind::HardyG => f.alpha * ((w * w).exp() + w.sin()).exp(),
        };
        if !(w.re.is_finite() && w.im.is_finite()) {
            return None;
        }
    }
    Some(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    Circle { radius: f64 },
    /// Outer circle minus inner circle, both positively oriented.
    AnnulusBoundary { inner: f64, outer: f64 },
}

fn wrap(d: f64) -> f64 {
    let a = d.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

struct CircleWalk<'a> {
    f: &'a FunctionSpec,
    n: usize,
    w: Complex64,
    radius: f64,
    guard: f64,
    min_dist: f64,
}

impl CircleWalk<'_> {
    fn value(&mut self, t: f64) -> Result<Complex64, CoverError> {
        let z = Complex64::from_polar(self.radius, t);
        let v = iterate_machine(self.f, self.n, z).ok_or(CoverError::OutOfRange)? - self.w;
        let d = v.norm();
        self.min_dist = self.min_dist.min(d);
        if d <= self.guard {
            return Err(CoverError::TooClose(d));
        }
        Ok(v)
    }

    // argument increment of f^n - w from t0 to t1, split until each piece is below pi/2
    fn increment(&mut self, t0: f64, v0: Complex64, t1: f64, v1: Complex64, depth: u32) -> Result<f64, CoverError> {
        let d = wrap(v1.arg() - v0.arg());
        if d.abs() < FRAC_PI_2 || depth >= MAX_SUBDIVISION_DEPTH {
            return Ok(d);
        }
        let tm = 0.5 * (t0 + t1);
        let vm = self.value(tm)?;
        Ok(self.increment(t0, v0, tm, vm, depth + 1)? + self.increment(tm, vm, t1, v1, depth + 1)?)
    }

    fn total(&mut self, samples: usize) -> Result<f64, CoverError> {
        let ts: Vec<f64> = (0..=samples).map(|k| TAU * k as f64 / samples as f64).collect();
        let mut prev = self.value(ts[0])?;
        let first = prev;
        let mut sum = 0.0;
        for k in 1..=samples {
            let v = if k == samples { first } else { self.value(ts[k])? };
            sum += self.increment(ts[k - 1], prev, ts[k], v, 0)?;
            prev = v;
        }
        Ok(sum / TAU)
    }
}

fn circle_winding(f: &FunctionSpec, n: usize, radius: f64, w: Complex64, samples: usize) -> Result<i64, CoverError> {
    let guard = 1e-8 * w.norm().max(1.0);
    let mut walk = CircleWalk { f, n, w, radius, guard, min_dist: f64::INFINITY };
    // a count is accepted once two successive sample sizes agree on it
    let mut s = samples.max(16);
    let mut previous: Option<i64> = None;
    loop {
        let total = walk.total(s)?;
        let residual = (total - total.round()).abs();
        if residual < RESIDUAL_LIMIT {
            let count = total.round() as i64;
            if previous == Some(count) {
                return Ok(count);
            }
            previous = Some(count);
        } else {
            previous = None;
        }
        if s >= MAX_SAMPLES {
            return Err(CoverError::Inconclusive(residual));
        }
        s *= 2;
    }
}

/// Number of solutions of `f^n(z) = w` inside the contour, by the argument principle.
pub fn winding_count(
    f: &FunctionSpec,
    n: usize,
    contour: Contour,
    w: Complex64,
    samples: usize,
) -> Result<i64, CoverError> {
    if n == 0 {
        return Err(CoverError::Domain("n must be at least 1".into()));
    }
    match contour {
        Contour::Circle { radius } => circle_winding(f, n, radius, w, samples),
        Contour::AnnulusBoundary { inner, outer } => {
            if !(0.0 < inner && inner < outer) {
                return Err(CoverError::Domain(format!("need 0 < inner < outer (got {inner}, {outer})")));
            }
            Ok(circle_winding(f, n, outer, w, samples)? - circle_winding(f, n, inner, w, samples)?)
        }
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `count` targets log-uniform in radius over `[r_in, r_out]` and uniform in angle.
pub fn log_uniform_targets(r_in: f64, r_out: f64, count: usize) -> Vec<Complex64> {
    let (a, b) = (r_in.ln(), r_out.ln());
    (0..count as u64)
        .map(|i| {
            let u = halton(i + TARGET_SEED, 2);
            let v = halton(i + TARGET_SEED, 3);
            Complex64::from_polar((a + u * (b - a)).exp(), -PI + TAU * v)
        })
        .collect()
}

/// Targets filling a closed annulus, including both boundary circles.
pub fn closed_annulus_targets(r_in: f64, r_out: f64, count: usize) -> Vec<Complex64> {
    let edge = (count / 8).max(1);
    let mut out = Vec::with_capacity(count + 2 * edge);
    for k in 0..edge {
        let t = -PI + TAU * (k as f64 + 0.5) / edge as f64;
        out.push(Complex64::from_polar(r_in, t));
        out.push(Complex64::from_polar(r_out, t));
    }
    out.extend(log_uniform_targets(r_in, r_out, count.saturating_sub(2 * edge)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingSample {
    pub w: Complex64,
    pub count: Option<i64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchVerdict {
    SBranch,
    TBranch,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub function: FunctionSpec,
    pub n: usize,
    pub r: f64,
    pub lambda_pp: f64,
    /// Outer radius of the annulus actually integrated over.
    pub outer_radius_used: f64,
    /// True when the outer radius had to shrink to stay in machine range.
    pub truncated: bool,
    pub targets_tested: usize,
    pub covered: usize,
    pub uncovered_targets: Vec<Complex64>,
    pub winding_samples: Vec<WindingSample>,
    pub exceptional_center_estimate: Option<Complex64>,
    pub exceptional_radius_estimate: Option<f64>,
    pub branch_verdict: Option<BranchVerdict>,
}

fn circle_evaluable(f: &FunctionSpec, n: usize, radius: f64) -> bool {
    (0..DEFAULT_SAMPLES).all(|k| {
        let z = Complex64::from_polar(radius, TAU * k as f64 / DEFAULT_SAMPLES as f64);
        iterate_machine(f, n, z).is_some_and(|v| v.norm() < 1e300)
    })
}

/// Largest `rho` in `(r, outer]` whose circle stays in machine range, if any.
fn evaluable_outer(f: &FunctionSpec, n: usize, r: f64, outer: f64) -> Option<f64> {
    if circle_evaluable(f, n, outer) {
        return Some(outer);
    }
    if !circle_evaluable(f, n, r) {
        return None;
    }
    let (mut lo, mut hi) = (r.ln(), outer.ln());
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if circle_evaluable(f, n, mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = lo.exp();
    (rho > r * (1.0 + 1e-9)).then_some(rho)
}

#[cfg(feature = "parallel")]
fn count_all(
    f: &FunctionSpec,
    n: usize,
    contour: Contour,
    targets: &[Complex64],
) -> Vec<Result<i64, CoverError>> {
    use rayon::prelude::*;
    targets.par_iter().map(|&w| winding_count(f, n, contour, w, DEFAULT_SAMPLES)).collect()
}

#[cfg(not(feature = "parallel"))]
fn count_all(
    f: &FunctionSpec,
    n: usize,
    contour: Contour,
    targets: &[Complex64],
) -> Vec<Result<i64, CoverError>> {
    targets.iter().map(|&w| winding_count(f, n, contour, w, DEFAULT_SAMPLES)).collect()
}

/// Checks which targets lie in `f^n(A(r, lambda_pp r))`.
///
/// When the outer circle leaves machine range the largest evaluable
/// sub-annulus `A(r, rho)` is used instead. Its image is contained in the full
/// image, so a positive count still certifies coverage, while a zero count
/// only means "not certified".
pub fn annulus_image_covers(
    f: &FunctionSpec,
    n: usize,
    r: f64,
    lambda_pp: f64,
    targets: &[Complex64],
) -> Result<CoverageReport, CoverError> {
    if !(r > 0.0 && lambda_pp > 1.0) {
        return Err(CoverError::Domain(format!("need r > 0 and lambda'' > 1 (got {r}, {lambda_pp})")));
    }
    let outer = lambda_pp * r;
    let outer_used = evaluable_outer(f, n, r, outer).ok_or(CoverError::OutOfRange)?;
    let contour = Contour::AnnulusBoundary { inner: r, outer: outer_used };
    let results = count_all(f, n, contour, targets);
    let mut winding_samples = Vec::with_capacity(targets.len());
    let mut uncovered = Vec::new();
    for (w, res) in targets.iter().zip(results) {
        let (count, error) = match res {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        if count.is_none_or(|c| c < 1) {
            uncovered.push(*w);
        }
        winding_samples.push(WindingSample { w: *w, count, error });
    }
    let disc = minimal_enclosing_disc(&uncovered);
    Ok(CoverageReport {
        function: *f,
        n,
        r,
        lambda_pp,
        outer_radius_used: outer_used,
        truncated: outer_used < outer,
        targets_tested: targets.len(),
        covered: targets.len() - uncovered.len(),
        uncovered_targets: uncovered,
        winding_samples,
        exceptional_center_estimate: disc.map(|d| d.0),
        exceptional_radius_estimate: disc.map(|d| d.1),
        branch_verdict: None,
    })
}

fn disc_two(a: Complex64, b: Complex64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    (c, (a - c).norm())
}

fn disc_three(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (bx, by) = (b.re - a.re, b.im - a.im);
    let (cx, cy) = (c.re - a.re, c.im - a.im);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // collinear: the farthest pair spans the disc
        let cands = [disc_two(a, b), disc_two(a, c), disc_two(b, c)];
        return cands.into_iter().max_by(|x, y| x.1.total_cmp(&y.1)).expect("three candidates");
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    let center = Complex64::new(a.re + ux, a.im + uy);
    (center, (ux * ux + uy * uy).sqrt())
}

/// Smallest disc containing every point (incremental construction).
pub fn minimal_enclosing_disc(points: &[Complex64]) -> Option<(Complex64, f64)> {
    let inside = |d: &(Complex64, f64), p: Complex64| (p - d.0).norm() <= d.1 * (1.0 + 1e-12) + 1e-300;
    let first = *points.first()?;
    let mut d = (first, 0.0);
    for i in 1..points.len() {
        if inside(&d, points[i]) {
            continue;
        }
        d = (points[i], 0.0);
        for j in 0..i {
            if inside(&d, points[j]) {
                continue;
            }
            d = disc_two(points[i], points[j]);
            for k in 0..j {
                if !inside(&d, points[k]) {
                    d = disc_three(points[i], points[j], points[k]);
                }
            }
        }
    }
    Some(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinModulusHit {
    pub s: f64,
    /// `log m(s, f^n)`.
    pub log_value: f64,
}

/// Minimizes `log m(s, f^n)` over `s` on a log grid in `(2r, 4r)`.
pub fn min_modulus_search(f: &FunctionSpec, n: usize, r: f64, samples: usize) -> Result<MinModulusHit, CoverError> {
    if n == 0 || !(r > 0.0) {
        return Err(CoverError::Domain(format!("need n >= 1 and r > 0 (got n={n}, r={r})")));
    }
    let samples = samples.max(2);
    let log_m = |s: f64| -> f64 {
        if n == 1 {
            return min_modulus(f, s).logmod.to_f64().unwrap_or(f64::NEG_INFINITY);
        }
        let angles = 2048;
        (0..angles)
            .filter_map(|k| iterate_machine(f, n, Complex64::from_polar(s, TAU * k as f64 / angles as f64)))
            .map(|v| v.norm().ln())
            .fold(f64::INFINITY, f64::min)
    };
    let (a, b) = ((2.0 * r).ln(), (4.0 * r).ln());
    // open interval: grid points strictly inside
    let grid: Vec<f64> = (1..=samples).map(|i| (a + (b - a) * i as f64 / (samples + 1) as f64).exp()).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| log_m(s)).collect();
    let i = (0..grid.len()).min_by(|&x, &y| vals[x].total_cmp(&vals[y])).expect("nonempty grid");
    let mut best = MinModulusHit { s: grid[i], log_value: vals[i] };
    // golden-section refinement between the neighbours
    let lo = if i == 0 { 2.0 * r * (1.0 + 1e-12) } else { grid[i - 1] };
    let hi = if i + 1 == grid.len() { 4.0 * r * (1.0 - 1e-12) } else { grid[i + 1] };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if log_m(x1) < log_m(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let s = 0.5 * (lo + hi);
    let v = log_m(s);
    if v < best.log_value {
        best = MinModulusHit { s, log_value: v };
    }
    Ok(best)
}

/// Branch constants for the two-annulus covering check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAnnuli {
    pub s: f64,
    pub s_p: f64,
    pub t: f64,
    pub t_p: f64,
}

/// Verifies that `f^n(A(r, 8r))` contains `A(S, S')` or `A(T, T')`.
pub fn check_corollary(
    f: &FunctionSpec,
    n: usize,
    r: f64,
    annuli: BranchAnnuli,
    targets_per_annulus: usize,
) -> Result<CoverageReport, CoverError> {
    let BranchAnnuli { s, s_p, t, t_p } = annuli;
    let m_n = build_ladder(f, r, n)?.entries[n];
    let lt = |a: f64, b: f64| a < b;
    let mut failed = Vec::new();
    if !lt(2.0, s) {
        failed.push("2 < S");
    }
    if !lt(s, s_p) {
        failed.push("S < S'");
    }
    if !lt(t, t_p) {
        failed.push("T < T'");
    }
    if TowerReal::from_real(t_p)? >= m_n {
        failed.push("T' < M^n(r, f)");
    }
    if s_p > 0.5 * t {
        failed.push("S' <= T/2");
    }
    if !failed.is_empty() {
        return Err(CoverError::Domain(format!("hypotheses violated: {}", failed.join(", "))));
    }
    let hit = min_modulus_search(f, n, r, 64)?;
    if hit.log_value > 0.0 {
        return Err(CoverError::Domain(format!(
            "no s in (2r, 4r) with m(s, f^n) <= 1 (smallest log m = {} at s = {})",
            hit.log_value, hit.s
        )));
    }
    let s_targets = closed_annulus_targets(s, s_p, targets_per_annulus);
    let t_targets = closed_annulus_targets(t, t_p, targets_per_annulus);
    let all: Vec<Complex64> = s_targets.iter().chain(&t_targets).copied().collect();
    let mut report = annulus_image_covers(f, n, r, 8.0, &all)?;
    let covered = |ts: &[Complex64]| {
        report.winding_samples.iter().filter(|w| ts.contains(&w.w)).all(|w| w.count.is_some_and(|c| c >= 1))
    };
    report.branch_verdict = Some(match (covered(&s_targets), covered(&t_targets)) {
        (true, true) => BranchVerdict::Both,
        (true, false) => BranchVerdict::SBranch,
        (false, true) => BranchVerdict::TBranch,
        (false, false) => BranchVerdict::Neither,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_omits_zero() {
        let c = winding_count(&FunctionSpec::exp(), 1, Contour::Circle { radius: 3.0 }, Complex64::new(0.0, 0.0), 256);
        assert_eq!(c.unwrap(), 0);
    }

    #[test]
    fn identity_like_count() {
        // exp(z) = 1 has the single solution 0 inside |z| = 1
        let c = winding_count(&FunctionSpec::exp(), 1, Contour::Circle { radius: 1.0 }, Complex64::new(1.0, 0.0), 256);
        assert_eq!(c.unwrap(), 1);
    }

    #[test]
    fn small_disc_under_double_exp() {
        let w = Complex64::new(1e6, 3.0);
        let c = winding_count(&FunctionSpec::exp(), 2, Contour::Circle { radius: 0.1 }, w, 256);
        assert_eq!(c.unwrap(), 0);
    }

    #[test]
    fn guard_rejects_targets_on_the_image() {
        let w = Complex64::new(3f64.exp(), 0.0);
        let c = winding_count(&FunctionSpec::exp(), 1, Contour::Circle { radius: 3.0 }, w, 256);
        assert!(matches!(c, Err(CoverError::TooClose(_))));
    }

    #[test]
    fn enclosing_disc() {
        let pts = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)];
        let (c, r) = minimal_enclosing_disc(&pts).unwrap();
        assert!(c.norm() < 1e-12 && (r - 1.0).abs() < 1e-12);
        assert!(minimal_enclosing_disc(&[]).is_none());
    }

    #[test]
    fn min_modulus_search_for_exp() {
        let hit = min_modulus_search(&FunctionSpec::exp(), 1, 10.0, 64).unwrap();
        assert!(hit.s > 39.9 && hit.s < 40.0);
        assert!((hit.log_value + hit.s).abs() < 1e-12);
    }

    #[test]
    fn corollary_rejects_bad_hypotheses() {
        let bad = BranchAnnuli { s: 3.0, s_p: 60.0, t: 100.0, t_p: 1000.0 };
        let e = check_corollary(&FunctionSpec::exp(), 1, 10.0, bad, 10).unwrap_err();
        assert!(e.to_string().contains("S' <= T/2"));
    }
}
