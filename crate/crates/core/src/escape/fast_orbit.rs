//! Construction of an orbit that escapes fast but never attains the maximum
//! modulus, following radii `r_{k+1} = K M^{m_k}(r_k)` or `16 K M^{m_k}(r_k)`.

use serde::{Deserialize, Serialize};

use crate::cover::{check_corollary, min_modulus_search, BranchAnnuli, BranchVerdict, CoverError};
use crate::efun::{FnKind, FunctionSpec};
use crate::maxmod::max_modulus_tower;
use crate::xnum::{SignedTower, TowerReal, XnumError};

/// `K = 1/2048`.
pub const BRANCH_K: f64 = 1.0 / 2048.0;
pub const M_CAP: usize = 8;
/// Targets sampled on each of the two candidate annuli.
pub const TARGETS_PER_ANNULUS: usize = 64;
/// Above this radius the min-modulus dip is taken from closed forms.
const MACHINE_SEARCH_LIMIT: f64 = 1e4;
/// Largest `M^{m}(r)` for which branch annuli are sampled in machine range.
const MACHINE_TARGET_LIMIT: f64 = 1e290;
const PRECONDITION_GRID: i32 = 24;
pub const TOWER_SCALE_LABEL: &str = "tower-scale: containment implied by branch constants, not re-verified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    S,
    T,
}

impl Branch {
    /// `r_{k+1} / M^{m_k}(r_k)` as a multiple of `K`.
    pub fn factor_over_k(self) -> u32 {
        match self {
            Branch::S => 1,
            Branch::T => 16,
        }
    }

    pub fn factor(self) -> f64 {
        self.factor_over_k() as f64 * BRANCH_K
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "detail")]
pub enum Containment {
    /// Winding counts show the next annulus inside the image.
    Verified,
    /// The covering check found neither annulus covered.
    Violated,
    /// Covering check could not run: the string says why.
    NotVerified(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastOrbitStep {
    pub k: usize,
    pub r_k: TowerReal,
    /// `E_k = closed A(r_k, 8 r_k)`.
    pub annulus: (TowerReal, TowerReal),
    pub m_k: usize,
    /// Radius in `(2 r_k, 4 r_k)` with `log m(s, f^{m_k}) <= 0`, when searched numerically.
    pub s: Option<f64>,
    pub log_min_modulus: Option<f64>,
    pub branch: Branch,
    pub branch_verdict: Option<BranchVerdict>,
    pub max_iter: TowerReal,
    pub mu_iter: TowerReal,
    pub r_next: TowerReal,
    pub grows: bool,
    pub above_mu: bool,
    /// `8 r_{k+1} <= M^{m_k}(r_k) / 16` from the branch constants alone.
    pub gap_symbolic: bool,
    /// The same inequality compared in tower arithmetic.
    pub gap_numeric: bool,
    pub containment: Containment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastOrbit {
    pub function: FunctionSpec,
    pub r1: f64,
    pub k_max: usize,
    /// `mu(r) > max(r^2, 2)` held on the whole test grid from `r1`.
    pub mu_precondition: bool,
    pub mu_precondition_failure: Option<f64>,
    pub steps: Vec<FastOrbitStep>,
    /// Set when some step found no min-modulus dip up to `M_CAP`.
    pub failure: Option<String>,
}

impl FastOrbit {
    pub fn radii(&self) -> Vec<TowerReal> {
        let mut out: Vec<TowerReal> = self.steps.iter().map(|s| s.r_k).collect();
        if let Some(last) = self.steps.last() {
            out.push(last.r_next);
        }
        out
    }
}

fn iterate_max(f: &FunctionSpec, r: TowerReal, m: usize) -> Result<TowerReal, XnumError> {
    let mut x = r;
    for _ in 0..m {
        x = max_modulus_tower(f, x)?.exp()?;
    }
    Ok(x)
}

fn mu(f: &FunctionSpec, r: TowerReal) -> Result<TowerReal, XnumError> {
    max_modulus_tower(f, r)?.add_f64(BRANCH_K.ln())?.exp()
}

/// First radius `r1 * 2^j` on the grid where `mu(r) > max(r^2, 2)` fails.
fn precondition_failure(f: &FunctionSpec, r1: f64) -> Result<Option<f64>, XnumError> {
    for j in 0..PRECONDITION_GRID {
        let r = r1 * 2f64.powi(j);
        let ln_mu = max_modulus_tower(f, TowerReal::from_real(r)?)?.add_f64(BRANCH_K.ln())?;
        let bound = SignedTower::from_f64((r * r).max(2.0).ln())?;
        if ln_mu <= bound {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

// log m(s, f) <= 0 for a radius s in (2r, 4r), from closed forms at n = 1
fn closed_form_dip(f: &FunctionSpec, r: &TowerReal) -> bool {
    match f.kind {
        // log m(s) = -s + ln alpha
        FnKind::Exp | FnKind::RotExp | FnKind::ExpFamily => *r > TowerReal::ZERO,
        // |g(is)| = alpha exp(exp(-s^2)) <= alpha e^{e^{-4 r^2}}
        FnKind::HardyG => f.ln_alpha() + (-4.0 * r.to_f64().map_or(f64::INFINITY, |x| x * x)).exp() <= 0.0,
    }
}

struct Dip {
    m: usize,
    s: Option<f64>,
    log_value: Option<f64>,
}

fn find_dip(f: &FunctionSpec, r: &TowerReal) -> Result<Option<Dip>, CoverError> {
    match r.to_f64() {
        Some(x) if x <= MACHINE_SEARCH_LIMIT => {
            for m in 1..=M_CAP {
                let hit = min_modulus_search(f, m, x, 64)?;
                if hit.log_value <= 0.0 {
                    return Ok(Some(Dip { m, s: Some(hit.s), log_value: Some(hit.log_value) }));
                }
            }
            Ok(None)
        }
        _ => Ok(closed_form_dip(f, r).then_some(Dip { m: 1, s: None, log_value: None })),
    }
}

fn machine_annuli(r: &TowerReal, max_iter: &TowerReal) -> Option<(f64, BranchAnnuli)> {
    let r = r.to_f64()?;
    let m = max_iter.to_f64().filter(|m| *m < MACHINE_TARGET_LIMIT)?;
    let s = BRANCH_K * m;
    Some((r, BranchAnnuli { s, s_p: 8.0 * s, t: 16.0 * s, t_p: 128.0 * s }))
}

pub fn construct_fast_orbit(f: &FunctionSpec, r1: f64, k_max: usize) -> Result<FastOrbit, CoverError> {
    if !(r1 > 0.0 && r1.is_finite()) || k_max == 0 {
        return Err(CoverError::Domain(format!("need r1 > 0 and k_max >= 1 (got {r1}, {k_max})")));
    }
    let failure_at = precondition_failure(f, r1)?;
    let mut orbit = FastOrbit {
        function: *f,
        r1,
        k_max,
        mu_precondition: failure_at.is_none(),
        mu_precondition_failure: failure_at,
        steps: Vec::new(),
        failure: None,
    };
    let mut r = TowerReal::from_real(r1)?;
    for k in 1..=k_max {
        let Some(dip) = find_dip(f, &r)? else {
            orbit.failure = Some(format!("no m <= {M_CAP} with m(s, f^m) <= 1 for s in (2r, 4r) at r = {r}"));
            break;
        };
        let max_iter = iterate_max(f, r, dip.m)?;
        let mut mu_iter = r;
        for _ in 0..dip.m {
            mu_iter = mu(f, mu_iter)?;
        }
        let (branch, branch_verdict, containment) = match machine_annuli(&r, &max_iter) {
            Some((rf, annuli)) => match check_corollary(f, dip.m, rf, annuli, TARGETS_PER_ANNULUS) {
                Ok(report) => {
                    let v = report.branch_verdict.expect("set by check_corollary");
                    let (b, c) = match v {
                        BranchVerdict::SBranch | BranchVerdict::Both => (Branch::S, Containment::Verified),
                        BranchVerdict::TBranch => (Branch::T, Containment::Verified),
                        BranchVerdict::Neither => (Branch::S, Containment::Violated),
                    };
                    (b, Some(v), c)
                }
                Err(e) => (Branch::S, None, Containment::NotVerified(format!("{TOWER_SCALE_LABEL} ({e})"))),
            },
            None => (Branch::S, None, Containment::NotVerified(TOWER_SCALE_LABEL.to_string())),
        };
        let log_max = max_iter.ln_signed()?;
        let r_next = log_max.add_f64(branch.factor().ln())?.exp()?;
        // 8 * factor * 16 <= 1 with factor = n / 2048
        let gap_symbolic = 128 * branch.factor_over_k() <= 2048;
        let lhs = r_next.ln_signed()?.add_f64(8f64.ln())?;
        let rhs = log_max.add_f64(-16f64.ln())?;
        let gap_numeric = lhs <= rhs || close(&lhs, &rhs);
        orbit.steps.push(FastOrbitStep {
            k,
            r_k: r,
            annulus: (r, r.scale(8.0)?),
            m_k: dip.m,
            s: dip.s,
            log_min_modulus: dip.log_value,
            branch,
            branch_verdict,
            max_iter,
            mu_iter,
            r_next,
            grows: r_next > r,
            above_mu: r_next >= mu_iter || close(&r_next.ln_signed()?, &mu_iter.ln_signed()?),
            gap_symbolic,
            gap_numeric,
            containment,
        });
        r = r_next;
    }
    Ok(orbit)
}

// equal up to rounding in the last few bits of the log
fn close(a: &SignedTower, b: &SignedTower) -> bool {
    match (a.to_f64(), b.to_f64()) {
        (Some(x), Some(y)) => (x - y).abs() <= 8.0 * f64::EPSILON * x.abs().max(y.abs()).max(1.0),
        _ => a.is_negative() == b.is_negative() && {
            let (x, y) = (a.magnitude(), b.magnitude());
            x.height() == y.height() && (x.mantissa() - y.mantissa()).abs() <= 8.0 * f64::EPSILON
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_first_step() {
        let orbit = construct_fast_orbit(&FunctionSpec::exp(), 10.0, 1).unwrap();
        let st = &orbit.steps[0];
        assert_eq!(st.m_k, 1);
        let r2 = st.r_next.to_f64().unwrap();
        let k_e10 = BRANCH_K * 10f64.exp();
        assert!((r2 - k_e10).abs() < 1e-12 * k_e10 || (r2 - 16.0 * k_e10).abs() < 1e-12 * k_e10);
        assert!(st.grows && st.above_mu && st.gap_symbolic && st.gap_numeric);
        assert_eq!(st.containment, Containment::Verified);
        // 10.75 < 100, so the precondition is flagged at r1 = 10
        assert_eq!(orbit.mu_precondition_failure, Some(10.0));
    }
}
