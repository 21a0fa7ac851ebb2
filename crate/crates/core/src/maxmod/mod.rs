//! Maximum and minimum modulus on circles and the iterated ladder `M^n(R, f)`.

mod constants;
mod lemmas;
mod locus;

pub use constants::{dtau, dtau_report, epsilon_from_psi, epsilon_r, psi_c, DtauReport, EpsilonReport, PsiReport};
pub use lemmas::{check_growth_lemmas, GrowthLemma, GrowthReport, LemmaRecord, LemmaThreshold};
pub use locus::{trace_maxmod_locus, LocusCurve, LocusKind, LocusPoint, LOCUS_JUMP};

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::efun::{hardy_logmod_split, polar_exact, FnKind, FunctionSpec, SplitLog};
use crate::xnum::{normalize_angle, SignedTower, TowerReal, XnumError};

/// Smallest radius at which Hardy's function uses the closed-form maximum.
pub const HARDY_CLOSED_FORM_MIN_R: f64 = 1.0;
/// Two angles whose log-moduli differ by at most this are both reported.
pub const ANGLE_TIE_TOL: f64 = 1e-9;
const MIN_SAMPLES: usize = 4096;
const SAMPLES_PER_UNIT_RADIUS: f64 = 64.0;
const REFINE_WIDTH: f64 = 1e-12;
const REFINED_CANDIDATES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    /// `log M(r, f)` or `log m(r, f)`.
    pub logmod: SignedTower,
    /// Angles in `(-pi, pi]` where the extremum is attained.
    pub angles: Vec<f64>,
    pub closed_form: bool,
}

impl ModulusResult {
    pub fn logmod_f64(&self) -> Option<f64> {
        self.logmod.to_f64()
    }
}

/// Log-modulus of `f` at `z` in split form, used by the circle scans.
pub fn logmod_split(f: &FunctionSpec, z: Complex64) -> SplitLog {
    match f.kind {
        FnKind::HardyG => hardy_logmod_split(f.alpha, z),
        _ => SplitLog { lead_sign: 0, lead_log: f64::NEG_INFINITY, tail: z.re + f.ln_alpha() },
    }
}

fn sample_count(r: f64) -> usize {
    let n = (SAMPLES_PER_UNIT_RADIUS * r).ceil() as usize;
    let n = n.max(MIN_SAMPLES);
    n + n % 2
}

fn better(a: &SplitLog, b: &SplitLog, maximize: bool) -> bool {
    let o = a.cmp_value(b);
    if maximize {
        o == Ordering::Greater
    } else {
        o == Ordering::Less
    }
}

fn golden_refine(
    eval: &impl Fn(f64) -> SplitLog,
    mut lo: f64,
    mut hi: f64,
    maximize: bool,
) -> (f64, SplitLog) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while hi - lo > REFINE_WIDTH {
        if better(&f1, &f2, maximize) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    if better(&f1, &f2, maximize) {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans the circle `|z| = r`, refining the best local extrema by golden section.
fn scan_circle(f: &FunctionSpec, r: f64, maximize: bool) -> (SplitLog, Vec<f64>) {
    let n = sample_count(r);
    let eval = |theta: f64| logmod_split(f, polar_exact(r, normalize_angle(theta)));
    let thetas: Vec<f64> = (0..n).map(|i| TAU * (i as f64 / n as f64)).collect();
    let vals: Vec<SplitLog> = thetas.iter().map(|&t| eval(t)).collect();
    let mut local: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = &vals[(i + n - 1) % n];
            let next = &vals[(i + 1) % n];
            !better(prev, &vals[i], maximize) && !better(next, &vals[i], maximize)
        })
        .collect();
    if local.is_empty() {
        local = (0..n).collect();
    }
    local.sort_by(|&a, &b| {
        let o = vals[a].cmp_value(&vals[b]);
        if maximize {
            o.reverse()
        } else {
            o
        }
    });
    let h = TAU / n as f64;
    let mut cands: Vec<(f64, SplitLog)> = Vec::new();
    for &i in local.iter().take(REFINED_CANDIDATES) {
        cands.push((thetas[i], vals[i]));
        cands.push(golden_refine(&eval, thetas[i] - h, thetas[i] + h, maximize));
    }
    let best = cands
        .iter()
        .map(|c| c.1)
        .reduce(|a, b| if better(&b, &a, maximize) { b } else { a })
        .expect("at least one candidate");
    let mut angles: Vec<f64> = Vec::new();
    for (t, v) in &cands {
        if v.diff(&best).abs() <= ANGLE_TIE_TOL {
            let a = normalize_angle(*t);
            if !angles.iter().any(|b| angle_dist(*b, a) < 1e-6) {
                angles.push(a);
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    (best, angles)
}

/// Distance between two angles on the circle.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

fn split_result(v: SplitLog, angles: Vec<f64>, closed_form: bool) -> ModulusResult {
    let logmod = v.to_signed_tower().expect("finite circle extremum");
    ModulusResult { logmod, angles, closed_form }
}

/// `M(r, f)` by circle sampling only.
pub fn max_modulus_sampled(f: &FunctionSpec, r: f64) -> ModulusResult {
    let (v, angles) = scan_circle(f, r, true);
    split_result(v, angles, false)
}

/// `m(r, f)` by circle sampling only.
pub fn min_modulus_sampled(f: &FunctionSpec, r: f64) -> ModulusResult {
    let (v, angles) = scan_circle(f, r, false);
    split_result(v, angles, false)
}

/// Hardy's closed form `log M(r) = e^{r^2} + |sin r| + log alpha`, as a split value.
pub fn hardy_max_split(alpha: f64, r: f64) -> SplitLog {
    SplitLog { lead_sign: 1, lead_log: r * r, tail: r.sin().abs() + alpha.ln() }
}

/// `M(r, f)` in log form, with the angles where it is attained.
pub fn max_modulus(f: &FunctionSpec, r: f64) -> ModulusResult {
    assert!(r > 0.0, "radius must be positive");
    match f.kind {
        FnKind::HardyG if r >= HARDY_CLOSED_FORM_MIN_R => {
            let s = r.sin();
            let angles = if 2.0 * s.abs() <= ANGLE_TIE_TOL {
                vec![0.0, PI]
            } else if s > 0.0 {
                vec![0.0]
            } else {
                vec![PI]
            };
            if !(r * r).is_finite() {
                let t = TowerReal::from_real(r).and_then(|t| hardy_max_tower(&t)).expect("height far below the cap");
                return ModulusResult { logmod: t, angles, closed_form: true };
            }
            split_result(hardy_max_split(f.alpha, r), angles, true)
        }
        FnKind::HardyG => max_modulus_sampled(f, r),
        _ => ModulusResult {
            logmod: SignedTower::from_f64(r + f.ln_alpha()).expect("finite"),
            angles: vec![0.0],
            closed_form: true,
        },
    }
}

/// `m(r, f)` in log form, with the angles where it is attained.
pub fn min_modulus(f: &FunctionSpec, r: f64) -> ModulusResult {
    assert!(r > 0.0, "radius must be positive");
    if f.is_exp_like() {
        return ModulusResult {
            logmod: SignedTower::from_f64(-r + f.ln_alpha()).expect("finite"),
            angles: vec![PI],
            closed_form: true,
        };
    }
    min_modulus_sampled(f, r)
}

/// `log M(r, f)` for a radius given as a tower.
pub fn max_modulus_tower(f: &FunctionSpec, r: TowerReal) -> Result<SignedTower, XnumError> {
    if let Some(x) = r.to_f64() {
        if x > 0.0 {
            return Ok(max_modulus(f, x).logmod);
        }
    }
    if r.is_zero() {
        // M(0, f) = |f(0)|
        let v = crate::efun::eval(f, Complex64::new(0.0, 0.0));
        return Ok(v.logmod());
    }
    match f.kind {
        FnKind::HardyG => hardy_max_tower(&r),
        _ => SignedTower::positive(r).add_f64(f.ln_alpha()),
    }
}

// log M(r, g) once r^2 is beyond f64, where |sin r| + log alpha is absorbed
fn hardy_max_tower(r: &TowerReal) -> Result<SignedTower, XnumError> {
    Ok(SignedTower::positive(r.powf(2.0)?.exp()?))
}

/// The iterated maximum modulus `M^n(R, f)` for `n = 0..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxModLadder {
    pub base_r: f64,
    pub entries: Vec<TowerReal>,
    pub escape_certified: bool,
}

impl MaxModLadder {
    /// `log M^n(R, f)` as a signed tower.
    pub fn log_entry(&self, n: usize) -> Result<SignedTower, XnumError> {
        let e = self.entries[n];
        if e.is_zero() {
            return Err(XnumError::Domain("ladder entry is zero".into()));
        }
        e.ln_signed()
    }
}

pub fn build_ladder(f: &FunctionSpec, base_r: f64, n: usize) -> Result<MaxModLadder, XnumError> {
    let mut entries = vec![TowerReal::from_real(base_r)?];
    for k in 0..n {
        let next = max_modulus_tower(f, entries[k])?.exp()?;
        entries.push(next);
    }
    let escape_certified = entries.len() > 1 && entries[1] > entries[0];
    Ok(MaxModLadder { base_r, entries, escape_certified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_at_one() {
        let m = max_modulus(&FunctionSpec::exp(), 1.0);
        assert_eq!(m.logmod_f64(), Some(1.0));
        assert_eq!(m.angles, vec![0.0]);
        let s = max_modulus_sampled(&FunctionSpec::exp(), 1.0);
        assert!((s.logmod_f64().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s.angles, vec![0.0]);
    }

    #[test]
    fn exp_minimum() {
        let m = min_modulus(&FunctionSpec::exp(), 1.0);
        assert_eq!(m.logmod_f64(), Some(-1.0));
        assert_eq!(m.angles, vec![PI]);
        let s = min_modulus_sampled(&FunctionSpec::exp(), 30.0);
        assert!((s.logmod_f64().unwrap() + 30.0).abs() < 1e-12);
        assert_eq!(s.angles, vec![PI]);
    }

    #[test]
    fn hardy_negative_sine_gives_angle_pi() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let r = 2.0 * PI + 1.5 * PI;
        assert_eq!(max_modulus(&g, r).angles, vec![PI]);
        assert_eq!(max_modulus_sampled(&g, r).angles, vec![PI]);
    }

    #[test]
    fn hardy_at_two_matches_closed_form() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let s = max_modulus_sampled(&g, 2.0);
        let cf = 4f64.exp() + 2f64.sin() + 0.01f64.ln();
        assert!((s.logmod_f64().unwrap() - cf).abs() < 1e-10);
        assert!(s.angles[0].abs() < 1e-5);
    }

    #[test]
    fn ladder_for_exp() {
        let l = build_ladder(&FunctionSpec::exp(), 1.0, 3).unwrap();
        let e = std::f64::consts::E;
        assert!((l.entries[1].to_f64().unwrap() - e).abs() < 1e-15);
        assert!((l.entries[2].to_f64().unwrap() - e.powf(e)).abs() < 1e-13);
        assert!((l.entries[3].to_f64().unwrap() - e.powf(e.powf(e))).abs() / 3.8e6 < 1e-13);
        assert!(l.escape_certified);
    }

    #[test]
    fn ladder_for_hardy_climbs() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let l = build_ladder(&g, 2.0, 3).unwrap();
        for (k, e) in l.entries.iter().enumerate() {
            assert!(e.height() as usize >= k, "entry {k} = {e}");
        }
        assert!(l.entries.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ladder_not_certified_below_fixed_point() {
        let f = FunctionSpec::exp_family(0.1).unwrap();
        let l = build_ladder(&f, 1.0, 2).unwrap();
        assert!(!l.escape_certified);
    }
}
