//! Growth inequalities for the maximum modulus, checked on finite grids in tower form.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_ladder, max_modulus};
use crate::efun::{eval_iterate, polar_exact, FunctionSpec};
use crate::xnum::{normalize_angle, SignedTower, XnumError};

const ITERATE_CIRCLE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GrowthLemma {
    /// `M(r^c, f) >= M(r, f)^c`
    Mrc,
    /// `M^n(r^c, f) >= M^n(r, f)^c`
    Mnrc,
    /// `M(dr, f^n) >= M^n(r, f)`
    Mdr,
}

impl std::str::FromStr for GrowthLemma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Mrc" => Ok(GrowthLemma::Mrc),
            "Mnrc" => Ok(GrowthLemma::Mnrc),
            "Mdr" => Ok(GrowthLemma::Mdr),
            _ => Err(format!("unknown lemma {s:?} (expected Mrc, Mnrc or Mdr)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub lemma: GrowthLemma,
    pub r: f64,
    /// `c` for the power inequalities, `d` for the dilation one.
    pub param: f64,
    pub n: usize,
    /// Logarithm of the left side (a lower bound for `Mdr` with `n >= 2`).
    pub lhs_log: SignedTower,
    pub rhs_log: SignedTower,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaThreshold {
    pub lemma: GrowthLemma,
    pub param: f64,
    pub n: usize,
    /// Smallest grid radius from which the inequality holds at every larger grid radius.
    pub holds_from: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub function: FunctionSpec,
    pub records: Vec<LemmaRecord>,
    pub thresholds: Vec<LemmaThreshold>,
    pub violations: usize,
}

/// Lower bound for `log M(rho, f^n)` from iterates of sample points on `|z| = rho`.
fn iterate_circle_lower_bound(f: &FunctionSpec, rho: f64, n: usize) -> Result<SignedTower, XnumError> {
    let mut best: Option<SignedTower> = None;
    for j in 0..ITERATE_CIRCLE_SAMPLES {
        let z = polar_exact(rho, normalize_angle(TAU * j as f64 / ITERATE_CIRCLE_SAMPLES as f64));
        let orbit = eval_iterate(f, z, n);
        if orbit.resolution_lost() {
            continue;
        }
        let p = orbit.points[n - 1];
        if p.value == Some(Complex64::new(0.0, 0.0)) {
            continue;
        }
        let l = p.logmod();
        if best.is_none_or(|b| l > b) {
            best = Some(l);
        }
    }
    best.ok_or_else(|| XnumError::Domain(format!("no evaluable iterate on |z| = {rho}")))
}

fn check_one(f: &FunctionSpec, lemma: GrowthLemma, r: f64, param: f64, n: usize) -> Result<LemmaRecord, XnumError> {
    let (lhs_log, rhs_log) = match lemma {
        GrowthLemma::Mrc => {
            let lhs = max_modulus(f, r.powf(param)).logmod;
            let rhs = max_modulus(f, r).logmod.scale(param)?;
            (lhs, rhs)
        }
        GrowthLemma::Mnrc => {
            let lhs = build_ladder(f, r.powf(param), n)?.log_entry(n)?;
            let rhs = build_ladder(f, r, n)?.log_entry(n)?.scale(param)?;
            (lhs, rhs)
        }
        GrowthLemma::Mdr => {
            let lhs = if n == 1 {
                max_modulus(f, param * r).logmod
            } else {
                iterate_circle_lower_bound(f, param * r, n)?
            };
            (lhs, build_ladder(f, r, n)?.log_entry(n)?)
        }
    };
    Ok(LemmaRecord { lemma, r, param, n, lhs_log, rhs_log, holds: lhs_log >= rhs_log })
}

/// Checks `Mrc` for each `c`, `Mnrc` for each `c` and `n <= n_max`, and `Mdr`
/// for each `d` and `n <= n_max`, over every radius in `r_grid`.
pub fn check_growth_lemmas(
    f: &FunctionSpec,
    lemmas: &[GrowthLemma],
    r_grid: &[f64],
    c_list: &[f64],
    d_list: &[f64],
    n_max: usize,
) -> Result<GrowthReport, XnumError> {
    let mut grid: Vec<f64> = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut records = Vec::new();
    let mut thresholds = Vec::new();
    for &lemma in lemmas {
        let (params, ns): (&[f64], Vec<usize>) = match lemma {
            GrowthLemma::Mrc => (c_list, vec![1]),
            GrowthLemma::Mnrc => (c_list, (1..=n_max).collect()),
            GrowthLemma::Mdr => (d_list, (1..=n_max).collect()),
        };
        for &param in params {
            for &n in &ns {
                let recs: Vec<LemmaRecord> =
                    grid.iter().map(|&r| check_one(f, lemma, r, param, n)).collect::<Result<_, _>>()?;
                let first_tail = recs.iter().rposition(|rec| !rec.holds).map_or(0, |i| i + 1);
                let holds_from = recs.get(first_tail).map(|rec| rec.r);
                thresholds.push(LemmaThreshold { lemma, param, n, holds_from });
                records.extend(recs);
            }
        }
    }
    let violations = records.iter().filter(|r| !r.holds).count();
    Ok(GrowthReport { function: *f, records, thresholds, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_power_growth_at_three() {
        let rec = check_one(&FunctionSpec::exp(), GrowthLemma::Mrc, 3.0, 2.0, 1).unwrap();
        assert!(rec.holds);
        assert!((rec.lhs_log.to_f64().unwrap() - 9.0).abs() < 1e-14);
        assert!((rec.rhs_log.to_f64().unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn exp_dilation_second_iterate() {
        let rec = check_one(&FunctionSpec::exp(), GrowthLemma::Mdr, 5.0, 2.0, 2).unwrap();
        assert!(rec.holds);
        let lhs = rec.lhs_log.to_f64().unwrap();
        assert!((lhs - 10f64.exp()).abs() / lhs < 1e-12);
    }

    #[test]
    fn exp_power_growth_fails_at_one() {
        let rec = check_one(&FunctionSpec::exp(), GrowthLemma::Mrc, 1.0, 2.0, 1).unwrap();
        assert!(!rec.holds);
    }

    #[test]
    fn hardy_power_growth_on_grid() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let grid: Vec<f64> = (0..=8).map(|i| 2.0 + 0.5 * i as f64).collect();
        let rep = check_growth_lemmas(&g, &[GrowthLemma::Mrc], &grid, &[1.5], &[], 1).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.thresholds[0].holds_from, Some(2.0));
    }
}
