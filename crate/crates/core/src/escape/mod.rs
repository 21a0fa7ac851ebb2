//! Finite-depth classification of orbits against the maximum-modulus ladder.
//!
//! A point is a fast candidate when some shift `l <= ell_max` makes
//! `|f^{n+l}(z)| >= M^n(R, f)` for every computed `n >= 1`. A fast point is a
//! maximally fast candidate when, from some `N <= depth / 2` on, every step
//! matches the maximum modulus: `|f^n(z)| = M(|f^{n-1}(z)|, f)` up to `tol_max`
//! relative error in the log-modulus.

mod chain;
mod fast_orbit;
mod grid;

pub use chain::{build_interval_chain, final_blocks_disjoint, ChainError, ChainMode, ChainStep, IntervalChain};
pub use fast_orbit::{construct_fast_orbit, Branch, Containment, FastOrbit, FastOrbitStep, BRANCH_K, M_CAP, TOWER_SCALE_LABEL};
pub use grid::{classify_grid, GridResult, Window};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efun::{eval_iterate, EvalResult, FunctionSpec};
use crate::maxmod::{build_ladder, max_modulus, max_modulus_tower, MaxModLadder};
use crate::xnum::{SignedTower, TowerReal, XnumError};

/// Consecutive steps above the escape radius needed for an escaping verdict.
const ESCAPE_RUN: usize = 5;
const AUTO_R_RATIO: f64 = 1.5;
const AUTO_R_STEPS: i32 = 80;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("depth must be at least 2 (got {0})")]
    Depth(usize),
    #[error("tol_max must lie in (0, 1e-2] (got {0})")]
    Tolerance(f64),
    #[error("ladder_r must be positive and finite (got {0})")]
    LadderR(f64),
    #[error("no radius R <= 1.5^80 with M(R) > 2R")]
    NoAutoR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub depth: usize,
    pub tol_max: f64,
    /// `None` selects the smallest `R = 1.5^k` with `M(R) > 2R`.
    pub ladder_r: Option<f64>,
    /// `None` means `depth / 2`.
    pub ell_max: Option<usize>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { depth: 20, tol_max: 1e-9, ladder_r: None, ell_max: None }
    }
}

impl ClassifierConfig {
    pub fn with_depth(depth: usize) -> Self {
        ClassifierConfig { depth, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.depth < 2 {
            return Err(ConfigError::Depth(self.depth));
        }
        if !(self.tol_max > 0.0 && self.tol_max <= 1e-2) {
            return Err(ConfigError::Tolerance(self.tol_max));
        }
        if let Some(r) = self.ladder_r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::LadderR(r));
            }
        }
        Ok(())
    }

    pub fn ell_max(&self) -> usize {
        self.ell_max.unwrap_or(self.depth / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    MaximallyFastCandidate,
    NonMaximallyFastCandidate,
    FastUndetermined,
    EscapingSlow,
    NonEscaping,
    Undetermined,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::MaximallyFastCandidate,
        Verdict::NonMaximallyFastCandidate,
        Verdict::FastUndetermined,
        Verdict::EscapingSlow,
        Verdict::NonEscaping,
        Verdict::Undetermined,
    ];

    /// Gray level used in rasters.
    pub fn gray(&self) -> u8 {
        match self {
            Verdict::MaximallyFastCandidate => 255,
            Verdict::NonMaximallyFastCandidate => 200,
            Verdict::FastUndetermined => 150,
            Verdict::EscapingSlow => 100,
            Verdict::Undetermined => 50,
            Verdict::NonEscaping => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::MaximallyFastCandidate => "MaximallyFastCandidate",
            Verdict::NonMaximallyFastCandidate => "NonMaximallyFastCandidate",
            Verdict::FastUndetermined => "FastUndetermined",
            Verdict::EscapingSlow => "EscapingSlow",
            Verdict::NonEscaping => "NonEscaping",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostic {
    pub n: usize,
    pub log_modulus: SignedTower,
    /// `log M(|f^{n-1}(z)|, f)`.
    pub log_max_modulus: SignedTower,
    /// Relative log-modulus gap; `None` when it cannot be resolved.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub ell: Option<usize>,
    pub maximal_from: Option<usize>,
    pub ra_estimate: f64,
    pub ladder_r: f64,
    pub depth: usize,
    /// Number of iterates actually computed (less than `depth` when resolution was lost).
    pub computed: usize,
    pub diagnostics: Vec<StepDiagnostic>,
}

/// Modulus of an orbit point as a tower, exact for machine values.
pub fn modulus_tower(p: &EvalResult) -> TowerReal {
    match p.value {
        Some(v) => TowerReal::from_real(v.norm()).unwrap_or_else(|_| p.modulus()),
        None => p.modulus(),
    }
}

/// `|a - b| / max(1, |b|)` for log-moduli, `None` when it cannot be resolved.
pub fn relative_gap(a: &SignedTower, b: &SignedTower) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    if let (Some(x), Some(y)) = (a.to_f64(), b.to_f64()) {
        return Some((x - y).abs() / y.abs().max(1.0));
    }
    if a.is_negative() || b.is_negative() {
        // opposite signs with one side beyond f64, or both hugely negative
        if a.is_negative() != b.is_negative() {
            return Some(f64::INFINITY);
        }
        return relative_gap(&SignedTower::positive(a.magnitude()), &SignedTower::positive(b.magnitude()));
    }
    // |a/b - 1| with a/b = exp(ln a - ln b)
    let la = a.magnitude().ln_signed().ok()?;
    let lb = b.magnitude().ln_signed().ok()?;
    let d = la.sub(&lb).ok()?;
    match d.to_f64() {
        Some(x) => Some(x.exp_m1().abs()),
        None if d.is_negative() => Some(1.0),
        None => Some(f64::INFINITY),
    }
}

/// Smallest `R = 1.5^k`, `k >= 0`, with `M(R, f) > 2R`.
pub fn auto_ladder_r(f: &FunctionSpec) -> Result<f64, ConfigError> {
    (0..=AUTO_R_STEPS)
        .map(|k| AUTO_R_RATIO.powi(k))
        .find(|&r| max_modulus(f, r).logmod > SignedTower::from_f64((2.0 * r).ln()).expect("finite"))
        .ok_or(ConfigError::NoAutoR)
}

/// Largest real fixed point of `r -> M(r, f)`, or 0 when `M(r) > r` everywhere.
pub fn max_modulus_fixed_point(f: &FunctionSpec) -> f64 {
    // log M(r) beyond f64 range is hugely positive for every kind here
    let excess = |r: f64| {
        let l = max_modulus(f, r).logmod;
        l.to_f64().unwrap_or(if l.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }) - r.ln()
    };
    let grid: Vec<f64> = (1..=2000).map(|i| 0.025 * i as f64).collect();
    let mut last = None;
    for w in grid.windows(2) {
        if (excess(w[0]) > 0.0) != (excess(w[1]) > 0.0) {
            last = Some((w[0], w[1]));
        }
    }
    let Some((mut lo, mut hi)) = last else {
        return 0.0;
    };
    let lo_sign = excess(lo) > 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Classifier with the ladder for a fixed function and configuration.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub f: FunctionSpec,
    pub cfg: ClassifierConfig,
    pub ladder: MaxModLadder,
    pub fixed_point: f64,
}

impl Classifier {
    pub fn new(f: FunctionSpec, cfg: ClassifierConfig) -> Result<Self, ClassifierError> {
        cfg.validate()?;
        let r = match cfg.ladder_r {
            Some(r) => r,
            None => auto_ladder_r(&f)?,
        };
        let ladder = build_ladder(&f, r, cfg.depth)?;
        Ok(Classifier { f, cfg, ladder, fixed_point: max_modulus_fixed_point(&f) })
    }

    pub fn ladder_r(&self) -> f64 {
        self.ladder.base_r
    }

    fn escape_radius(&self) -> f64 {
        (2.0 * self.ladder_r()).max(10.0)
    }

    pub fn classify(&self, z: Complex64) -> Classification {
        let depth = self.cfg.depth;
        let orbit = eval_iterate(&self.f, z, depth);
        let pts = &orbit.points;
        let mods: Vec<TowerReal> = pts.iter().map(modulus_tower).collect();
        let mut diagnostics = Vec::with_capacity(pts.len());
        let mut prev_mod = TowerReal::from_real(z.norm()).expect("finite input");
        for (i, p) in pts.iter().enumerate() {
            let log_max = if prev_mod.is_zero() {
                p.logmod()
            } else {
                max_modulus_tower(&self.f, prev_mod).unwrap_or(p.logmod())
            };
            let log_modulus = if p.value == Some(Complex64::new(0.0, 0.0)) {
                SignedTower::new(true, TowerReal::from_real(f64::MAX).expect("finite"))
            } else {
                p.logmod()
            };
            let gap = relative_gap(&log_modulus, &log_max);
            diagnostics.push(StepDiagnostic { n: i + 1, log_modulus, log_max_modulus: log_max, gap });
            prev_mod = mods[i];
        }
        let ra_estimate = self.estimate_ra_from(&mods);
        let base = Classification {
            verdict: Verdict::Undetermined,
            ell: None,
            maximal_from: None,
            ra_estimate,
            ladder_r: self.ladder_r(),
            depth,
            computed: pts.len(),
            diagnostics,
        };
        if orbit.resolution_lost() {
            return base;
        }
        let ell = (0..=self.cfg.ell_max()).find(|&l| self.dominates(&mods, l));
        if let Some(l) = ell {
            let (verdict, maximal_from) = self.maximality(&base.diagnostics);
            return Classification { verdict, ell: Some(l), maximal_from, ..base };
        }
        let e = TowerReal::from_real(self.escape_radius()).expect("finite");
        if mods.iter().all(|m| *m <= e) {
            return Classification { verdict: Verdict::NonEscaping, ..base };
        }
        let tail = &mods[mods.len().saturating_sub(ESCAPE_RUN)..];
        if tail.len() == ESCAPE_RUN && tail.iter().all(|m| *m > e) && tail.windows(2).all(|w| w[0] < w[1]) {
            return Classification { verdict: Verdict::EscapingSlow, ..base };
        }
        base
    }

    /// `|f^{n+l}(z)| >= M^n(R)` for every computed `n >= 1`.
    fn dominates(&self, mods: &[TowerReal], l: usize) -> bool {
        let checks = mods.len().saturating_sub(l);
        checks >= 1 && (1..=checks).all(|n| mods[n + l - 1] >= self.ladder.entries[n])
    }

    fn maximality(&self, diags: &[StepDiagnostic]) -> (Verdict, Option<usize>) {
        let tol = self.cfg.tol_max;
        let late = (self.cfg.depth / 2).max(1);
        let ok = |d: &StepDiagnostic| d.gap.is_some_and(|g| g <= tol);
        let from = diags.iter().rposition(|d| !ok(d)).map_or(1, |i| i + 2);
        if from <= late && from <= diags.len() {
            return (Verdict::MaximallyFastCandidate, Some(from));
        }
        let violated = diags.iter().filter(|d| d.n >= late).any(|d| d.gap.is_some_and(|g| g > 10.0 * tol));
        if violated {
            (Verdict::NonMaximallyFastCandidate, None)
        } else {
            (Verdict::FastUndetermined, None)
        }
    }

    /// Upper estimate of the largest admissible `R` with `|f^n(z)| >= M^n(R)` for all computed `n`.
    fn estimate_ra_from(&self, mods: &[TowerReal]) -> f64 {
        if mods.is_empty() {
            return -1.0;
        }
        let n = mods.len();
        let holds = |r: f64| -> bool {
            match build_ladder(&self.f, r, n) {
                Ok(l) => (1..=n).all(|k| mods[k - 1] >= l.entries[k]),
                Err(_) => false,
            }
        };
        let lo0 = if self.fixed_point > 0.0 { self.fixed_point * (1.0 + 1e-12) } else { 0.0 };
        if !holds(lo0) {
            return -1.0;
        }
        let mut lo = lo0;
        let mut hi = match mods[0].to_f64() {
            Some(x) => x.max(lo0 * 2.0).max(1.0),
            None => f64::MAX,
        };
        if holds(hi) {
            return hi;
        }
        while hi - lo > 1e-9 * hi {
            let mid = if hi / lo.max(1e-300) > 1e6 && lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            // lo = 0 with R_A = 0 (e.g. z = 0 for exp) shrinks hi into the subnormals
            if mid <= lo || mid >= hi {
                break;
            }
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn estimate_ra(&self, z: Complex64) -> f64 {
        let orbit = eval_iterate(&self.f, z, self.cfg.depth);
        let mods: Vec<TowerReal> = orbit.points.iter().map(modulus_tower).collect();
        self.estimate_ra_from(&mods)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Xnum(#[from] XnumError),
}

pub fn classify_point(f: &FunctionSpec, z: Complex64, cfg: &ClassifierConfig) -> Result<Classification, ClassifierError> {
    Ok(Classifier::new(*f, *cfg)?.classify(z))
}

pub fn estimate_ra(f: &FunctionSpec, z: Complex64, cfg: &ClassifierConfig) -> Result<f64, ClassifierError> {
    Ok(Classifier::new(*f, *cfg)?.estimate_ra(z))
}
