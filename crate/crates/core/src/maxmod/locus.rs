use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{angle_dist, max_modulus};
use crate::efun::{eval, polar_exact, FunctionSpec};

/// Angular jump between consecutive radii that starts a new curve.
pub const LOCUS_JUMP: f64 = 0.2;
const LOCUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocusKind {
    PositiveRay,
    NegativeRay,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub r: f64,
    pub z: Complex64,
    /// `log|f(z)| - log M(r, f)`, never positive up to rounding.
    pub log_deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusCurve {
    pub points: Vec<LocusPoint>,
    pub kind: LocusKind,
}

impl LocusCurve {
    /// Every point satisfies `|f(z)| >= (1 - 1e-9) M(|z|, f)`.
    pub fn invariant_holds(&self) -> bool {
        self.points.iter().all(|p| p.log_deficit >= (-LOCUS_TOL).ln_1p())
    }
}

fn classify(points: &[LocusPoint]) -> LocusKind {
    if points.iter().all(|p| p.z.im == 0.0 && p.z.re > 0.0) {
        LocusKind::PositiveRay
    } else if points.iter().all(|p| p.z.im == 0.0 && p.z.re < 0.0) {
        LocusKind::NegativeRay
    } else {
        LocusKind::Generic
    }
}

struct Open {
    angle: f64,
    points: Vec<LocusPoint>,
}

/// Links the argmax angles of `M(r, f)` across a radius sweep into polylines.
pub fn trace_maxmod_locus(f: &FunctionSpec, r_min: f64, r_max: f64, step: f64) -> Vec<LocusCurve> {
    assert!(0.0 < r_min && r_min < r_max && step > 0.0, "need 0 < r_min < r_max and step > 0");
    let count = ((r_max - r_min) / step).floor() as usize;
    let radii: Vec<f64> = (0..=count).map(|i| r_min + step * i as f64).collect();
    let mut open: Vec<Open> = Vec::new();
    let mut done: Vec<Vec<LocusPoint>> = Vec::new();
    for r in radii {
        let m = max_modulus(f, r);
        let m_log = m.logmod;
        let mut next: Vec<Open> = Vec::new();
        for &a in &m.angles {
            let z = polar_exact(r, a);
            let fz = eval(f, z).logmod();
            let log_deficit = match fz.sub(&m_log) {
                Ok(d) => d.to_f64().unwrap_or(f64::NEG_INFINITY),
                Err(_) => 0.0,
            };
            let point = LocusPoint { r, z, log_deficit };
            let nearest = open
                .iter()
                .enumerate()
                .filter(|(_, o)| angle_dist(o.angle, a) <= LOCUS_JUMP)
                .min_by(|x, y| angle_dist(x.1.angle, a).total_cmp(&angle_dist(y.1.angle, a)))
                .map(|(i, _)| i);
            match nearest {
                Some(i) => {
                    let mut o = open.swap_remove(i);
                    o.angle = a;
                    o.points.push(point);
                    next.push(o);
                }
                None => next.push(Open { angle: a, points: vec![point] }),
            }
        }
        done.extend(open.drain(..).map(|o| o.points));
        open = next;
    }
    done.extend(open.into_iter().map(|o| o.points));
    done.sort_by(|a, b| a[0].r.total_cmp(&b[0].r).then(a[0].z.arg().total_cmp(&b[0].z.arg())));
    done.into_iter()
        .map(|points| {
            let kind = classify(&points);
            LocusCurve { points, kind }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exp_locus_is_positive_axis() {
        for f in [FunctionSpec::exp(), FunctionSpec::rot_exp()] {
            let curves = trace_maxmod_locus(&f, 1.0, 10.0, 0.25);
            assert_eq!(curves.len(), 1);
            assert_eq!(curves[0].kind, LocusKind::PositiveRay);
            assert!(curves[0].invariant_holds());
        }
    }

    #[test]
    fn hardy_locus_alternates() {
        let g = FunctionSpec::hardy_g(0.01).unwrap();
        let r0 = 1.0;
        let curves = trace_maxmod_locus(&g, r0, r0 + 6.0 * PI, 0.01);
        let kinds: Vec<LocusKind> = curves.iter().map(|c| c.kind).collect();
        assert!(kinds.len() >= 6);
        for w in kinds.windows(2) {
            assert_ne!(w[0], w[1]);
            assert_ne!(w[0], LocusKind::Generic);
        }
        for c in &curves[1..] {
            // each switch happens within one step of a zero of sin r
            let r = c.points[0].r;
            let k = (r / PI).round();
            assert!((r - k * PI).abs() <= 0.01 + 1e-12, "switch at {r}");
            assert!(c.invariant_holds());
        }
    }
}
