use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Classification, Classifier, ClassifierConfig, ClassifierError, Verdict};
use crate::efun::FunctionSpec;

pub const MAX_GRID_SIDE: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Window { x_min, y_min, x_max, y_max }
    }

    /// Center of pixel `(i, j)`; row 0 is the top edge `y_max`.
    pub fn pixel_center(&self, i: usize, j: usize, width: usize, height: usize) -> Complex64 {
        let x = self.x_min + ((i as f64 + 0.5) * (self.x_max - self.x_min)) / width as f64;
        let y = self.y_max - ((j as f64 + 0.5) * (self.y_max - self.y_min)) / height as f64;
        Complex64::new(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub function: FunctionSpec,
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub ladder_r: f64,
    /// Row-major, top row first.
    pub verdicts: Vec<Verdict>,
    pub histogram: BTreeMap<String, usize>,
}

impl GridResult {
    pub fn count(&self, v: Verdict) -> usize {
        self.histogram.get(v.name()).copied().unwrap_or(0)
    }

    pub fn verdict_at(&self, i: usize, j: usize) -> Verdict {
        self.verdicts[j * self.width + i]
    }

    /// Binary PGM (P5, maxval 255) with one gray level per verdict.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.verdicts.iter().map(Verdict::gray));
        out
    }

    /// Verdict to gray-level legend.
    pub fn legend() -> BTreeMap<String, u8> {
        Verdict::ALL.iter().map(|v| (v.name().to_string(), v.gray())).collect()
    }
}

#[cfg(feature = "parallel")]
fn classify_all(cl: &Classifier, points: &[Complex64]) -> Vec<Classification> {
    use rayon::prelude::*;
    points.par_iter().map(|&z| cl.classify(z)).collect()
}

#[cfg(not(feature = "parallel"))]
fn classify_all(cl: &Classifier, points: &[Complex64]) -> Vec<Classification> {
    points.iter().map(|&z| cl.classify(z)).collect()
}

pub fn classify_grid(
    f: &FunctionSpec,
    window: Window,
    width: usize,
    height: usize,
    cfg: &ClassifierConfig,
) -> Result<GridResult, ClassifierError> {
    assert!(
        (1..=MAX_GRID_SIDE).contains(&width) && (1..=MAX_GRID_SIDE).contains(&height),
        "grid sides must lie in 1..={MAX_GRID_SIDE}"
    );
    let cl = Classifier::new(*f, *cfg)?;
    let points: Vec<Complex64> =
        (0..height).flat_map(|j| (0..width).map(move |i| window.pixel_center(i, j, width, height))).collect();
    let verdicts: Vec<Verdict> = classify_all(&cl, &points).into_iter().map(|c| c.verdict).collect();
    let mut histogram: BTreeMap<String, usize> = Verdict::ALL.iter().map(|v| (v.name().to_string(), 0)).collect();
    for v in &verdicts {
        *histogram.get_mut(v.name()).expect("all verdicts listed") += 1;
    }
    Ok(GridResult { function: *f, window, width, height, ladder_r: cl.ladder_r(), verdicts, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_grid_is_the_center() {
        let w = Window::new(-1.0, 0.0, 3.0, 2.0);
        assert_eq!(w.pixel_center(0, 0, 1, 1), Complex64::new(1.0, 1.0));
    }

    #[test]
    fn odd_grid_has_real_axis_row() {
        let w = Window::new(-4.0, -4.0, 4.0, 4.0);
        assert_eq!(w.pixel_center(0, 32, 65, 65).im, 0.0);
    }

    #[test]
    fn pgm_header() {
        let g = classify_grid(&FunctionSpec::exp(), Window::new(-1.0, -1.0, 1.0, 1.0), 3, 2, &ClassifierConfig::with_depth(6))
            .unwrap();
        let pgm = g.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(pgm.len(), b"P5\n3 2\n255\n".len() + 6);
        assert_eq!(g.histogram.values().sum::<usize>(), 6);
    }
}
