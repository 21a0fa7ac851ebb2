use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::build_ladder;
use crate::efun::FunctionSpec;
use crate::xnum::{SignedTower, XnumError};

/// Metric used for `D_tau`: curvature -1, density `1/Im` on the upper half-plane.
pub const NORMALIZATION: &str = "curvature -1 (upper half-plane density 1/Im w)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub c: f64,
    pub r: f64,
    pub n_max: usize,
    /// `psi_c(r)`; infinite when it overflows `f64`.
    pub psi: f64,
    pub ln_psi: SignedTower,
    /// `log(M^n(cr) / M^n(r))` for `n = 1..=n_max`.
    pub log_ratios: Vec<SignedTower>,
    pub argmin_n: usize,
    /// Whether the log ratios were nondecreasing in `n`.
    pub ratios_monotone: bool,
}

// ln((e^l - 1) / 2)
fn ln_half_expm1(l: &SignedTower) -> Result<SignedTower, XnumError> {
    match l.to_f64() {
        Some(x) if x <= 0.0 => Err(XnumError::Domain(format!("ratio e^{x} is not above 1"))),
        Some(x) if x < 700.0 => SignedTower::from_f64(x.exp_m1().ln() - LN_2),
        Some(x) => SignedTower::from_f64(x + (-(-x).exp()).ln_1p() - LN_2),
        None => {
            if l.is_negative() {
                return Err(XnumError::Domain("ratio below 1".into()));
            }
            l.add_f64(-LN_2)
        }
    }
}

/// `psi_c(r) = (inf_n M^n(cr)/M^n(r) - 1) / 2`, with the infimum over `1..=n_max`.
pub fn psi_c(f: &FunctionSpec, c: f64, r: f64, n_max: usize) -> Result<PsiReport, XnumError> {
    if !(c > 1.0) || !(r > 0.0) || n_max == 0 {
        return Err(XnumError::Domain(format!("psi_c needs c > 1, r > 0, n_max >= 1 (c={c}, r={r})")));
    }
    let hi = build_ladder(f, c * r, n_max)?;
    let lo = build_ladder(f, r, n_max)?;
    let mut log_ratios = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        log_ratios.push(hi.log_entry(n)?.sub(&lo.log_entry(n)?)?);
    }
    let (argmin, min) = log_ratios
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, v)| (i + 1, *v))
        .expect("n_max >= 1");
    let ratios_monotone = log_ratios.windows(2).all(|w| w[0] <= w[1]);
    let ln_psi = ln_half_expm1(&min)?;
    let psi = ln_psi.to_f64().map_or(f64::INFINITY, f64::exp);
    Ok(PsiReport { c, r, n_max, psi, ln_psi, log_ratios, argmin_n: argmin, ratios_monotone })
}

/// `D_tau = exp(pi^2 / log tau)`.
pub fn dtau(tau: f64) -> Result<f64, XnumError> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(XnumError::Domain(format!("tau = {tau} must exceed 1")));
    }
    Ok((PI * PI / tau.ln()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtauReport {
    pub tau: f64,
    pub closed_form: f64,
    /// `exp(2 max d(z, z'))` from the distance formula, maximized over unit-circle pairs.
    pub numeric: f64,
    pub relative_difference: f64,
    /// Angle between the maximizing pair.
    pub extremal_separation: f64,
    /// Hyperbolic length of the half core circle from 1 to -1.
    pub core_arc_length: f64,
    /// Lengths of detours through `|z| = tau^s`, keyed by `s`.
    pub offcore_lengths: Vec<(f64, f64)>,
    pub normalization: String,
}

// Annulus A(1/tau, tau) is covered by the strip |Re w| < L, L = log tau, via z = e^w.
// The strip maps to the upper half-plane by zeta = exp((pi / 2L)(b + i(a + L))).
fn strip_to_half_plane(a: f64, b: f64, l: f64) -> num_complex::Complex64 {
    let k = PI / (2.0 * l);
    num_complex::Complex64::from_polar((k * b).exp(), k * (a + l))
}

fn half_plane_distance(p: num_complex::Complex64, q: num_complex::Complex64) -> f64 {
    (1.0 + (p - q).norm_sqr() / (2.0 * p.im * q.im)).acosh()
}

// density of the strip metric at Re w = a
fn strip_density(a: f64, l: f64) -> f64 {
    let k = PI / (2.0 * l);
    k / (k * a).cos()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `D_tau` both from the closed form and by maximizing the annulus distance numerically.
pub fn dtau_report(tau: f64) -> Result<DtauReport, XnumError> {
    let closed_form = dtau(tau)?;
    let l = tau.ln();
    let one = strip_to_half_plane(0.0, 0.0, l);
    let steps = 2000;
    let mut best = (0.0, 0.0);
    for i in 0..=steps {
        let phi = PI * i as f64 / steps as f64;
        let d = (-3..=3)
            .map(|k| half_plane_distance(one, strip_to_half_plane(0.0, phi + 2.0 * PI * k as f64, l)))
            .fold(f64::INFINITY, f64::min);
        if d > best.0 {
            best = (d, phi);
        }
    }
    let numeric = (2.0 * best.0).exp();
    let core_arc_length = PI * strip_density(0.0, l);
    let offcore_lengths = [0.25, 0.5, 0.75, -0.5]
        .iter()
        .map(|&s: &f64| {
            let a = s * l;
            let leg = simpson(|t| strip_density(t, l), 0.0, a.abs(), 2000);
            (s, 2.0 * leg + PI * strip_density(a, l))
        })
        .collect();
    Ok(DtauReport {
        tau,
        closed_form,
        numeric,
        relative_difference: (numeric - closed_form).abs() / closed_form,
        extremal_separation: best.1,
        core_arc_length,
        offcore_lengths,
        normalization: NORMALIZATION.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub lambda: f64,
    pub lambda_p: f64,
    pub lambda_pp: f64,
    pub r: f64,
    pub c_param: f64,
    pub tau: f64,
    pub c: f64,
    pub d_tau: f64,
    pub psi: PsiReport,
    /// `epsilon(r)`; zero when it underflows.
    pub epsilon: f64,
    pub ln_epsilon: SignedTower,
    /// Whether `2 / epsilon(r) < psi_c(r)`.
    pub epq_holds: bool,
    pub normalization: String,
}

/// `ln epsilon = ln 2 + (1 - 1/D) ln C - (ln psi) / D`.
pub fn ln_epsilon_from_ln_psi(ln_psi: &SignedTower, c_param: f64, d: f64) -> Result<SignedTower, XnumError> {
    ln_psi.scale(-1.0 / d)?.add_f64(LN_2 + (1.0 - 1.0 / d) * c_param.ln())
}

/// `epsilon = 2 C^{1 - 1/D} / psi^{1/D}` for a machine-range `psi`.
pub fn epsilon_from_psi(psi: f64, c_param: f64, d: f64) -> f64 {
    (LN_2 + (1.0 - 1.0 / d) * c_param.ln() - psi.ln() / d).exp()
}

pub fn epsilon_r(
    f: &FunctionSpec,
    lambda: f64,
    lambda_p: f64,
    lambda_pp: f64,
    r: f64,
    c_param: f64,
) -> Result<EpsilonReport, XnumError> {
    if !(1.0 < lambda && lambda < lambda_p && lambda_p < lambda_pp) {
        return Err(XnumError::Domain(format!(
            "need 1 < lambda < lambda' < lambda'' (got {lambda}, {lambda_p}, {lambda_pp})"
        )));
    }
    if !(c_param > 1.0) {
        return Err(XnumError::Domain(format!("C = {c_param} must exceed 1")));
    }
    let tau = lambda.min(lambda_pp / lambda_p);
    let c = (1.0 + lambda) / 2.0;
    let d_tau = dtau(tau)?;
    let psi = psi_c(f, c, r, 4)?;
    let ln_epsilon = ln_epsilon_from_ln_psi(&psi.ln_psi, c_param, d_tau)?;
    let epsilon = ln_epsilon.to_f64().map_or(0.0, f64::exp);
    let lhs = ln_epsilon.neg().add_f64(LN_2)?;
    let epq_holds = lhs < psi.ln_psi;
    Ok(EpsilonReport {
        lambda,
        lambda_p,
        lambda_pp,
        r,
        c_param,
        tau,
        c,
        d_tau,
        psi,
        epsilon,
        ln_epsilon,
        epq_holds,
        normalization: NORMALIZATION.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_for_exp() {
        let p = psi_c(&FunctionSpec::exp(), 1.5, 10.0, 4).unwrap();
        assert_eq!(p.argmin_n, 1);
        assert!(p.ratios_monotone);
        let expected = (5f64.exp() - 1.0) / 2.0;
        assert!((p.psi - expected).abs() / expected < 1e-12);
        let q = psi_c(&FunctionSpec::exp(), 2.0, 20.0, 4).unwrap();
        let expected = (20f64.exp() - 1.0) / 2.0;
        assert!((q.psi - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn dtau_values() {
        assert!((dtau(std::f64::consts::E).unwrap() - (PI * PI).exp()).abs() < 1e-8);
        assert!(dtau(1.0).is_err());
        let ds: Vec<f64> = [1.1, 1.5, 2.0, std::f64::consts::E].iter().map(|&t| dtau(t).unwrap()).collect();
        assert!(ds.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn numeric_dtau_agrees_and_core_is_shortest() {
        for tau in [1.5, 2.0, std::f64::consts::E] {
            let rep = dtau_report(tau).unwrap();
            assert!(rep.relative_difference < 0.01, "{rep:?}");
            assert!((rep.extremal_separation - PI).abs() < 1e-9);
            for (_, len) in &rep.offcore_lengths {
                assert!(*len > rep.core_arc_length);
            }
        }
    }

    #[test]
    fn epsilon_parameters() {
        let e = epsilon_r(&FunctionSpec::exp(), 2.0, 3.0, 12.0, 10.0, 20.0).unwrap();
        assert_eq!(e.tau, 2.0);
        assert_eq!(e.c, 1.5);
        assert!(e.epq_holds);
        assert!(epsilon_r(&FunctionSpec::exp(), 2.0, 2.0, 12.0, 10.0, 20.0).is_err());
        assert!(epsilon_r(&FunctionSpec::exp(), 2.0, 3.0, 12.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_at_boundary_psi() {
        // psi = C^{D-1} gives epsilon = 2 C^{1-1/D} / C^{(D-1)/D} = 2
        let (c, d) = (20.0f64, 3.0);
        let psi = c.powf(d - 1.0);
        assert!((epsilon_from_psi(psi, c, d) - 2.0).abs() < 1e-14);
    }
}
