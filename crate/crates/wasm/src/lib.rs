//! Browser bindings: verdict rasters, the Hardy preimage curves and circle profiles.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::TAU;

use escape_atlas::efun::{eval, FnKind, FunctionSpec};
use escape_atlas::escape::{classify_grid, ClassifierConfig, Verdict, Window};
use escape_atlas::hardy::{figure1, hardy_locus_check};
use escape_atlas::maxmod::max_modulus;
use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

pub const MAX_SIDE: u32 = 1024;

pub fn verdict_rgb(v: Verdict) -> [u8; 3] {
    match v {
        Verdict::MaximallyFastCandidate => [230, 80, 40],
        Verdict::NonMaximallyFastCandidate => [250, 190, 60],
        Verdict::FastUndetermined => [150, 90, 200],
        Verdict::EscapingSlow => [70, 140, 220],
        Verdict::NonEscaping => [20, 24, 40],
        Verdict::Undetermined => [128, 128, 128],
    }
}

fn spec(function: &str, alpha: f64) -> Result<FunctionSpec, String> {
    let kind = match function {
        "exp" => FnKind::Exp,
        "rot-exp" => FnKind::RotExp,
        "hardy-g" => FnKind::HardyG,
        "exp-family" => FnKind::ExpFamily,
        _ => return Err(format!("unknown function {function:?}")),
    };
    FunctionSpec::new(kind, alpha).map_err(|e| e.to_string())
}

/// Verdict raster as RGBA bytes, row 0 at `y1`.
#[allow(clippy::too_many_arguments)]
pub fn grid_rgba(
    function: &str,
    alpha: f64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    width: u32,
    height: u32,
    depth: u32,
) -> Result<Vec<u8>, String> {
    if !(x0 < x1 && y0 < y1) {
        return Err("window needs x0 < x1 and y0 < y1".into());
    }
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(format!("sides must lie in 1..={MAX_SIDE}"));
    }
    let f = spec(function, alpha)?;
    let cfg = ClassifierConfig::with_depth(depth as usize);
    cfg.validate().map_err(|e| e.to_string())?;
    let g = classify_grid(&f, Window::new(x0, y0, x1, y1), width as usize, height as usize, &cfg)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(g.verdicts.len() * 4);
    for v in &g.verdicts {
        out.extend_from_slice(&verdict_rgb(*v));
        out.push(255);
    }
    Ok(out)
}

/// Verdict names with their colours, as JSON.
pub fn legend_json() -> String {
    let rows: Vec<_> = Verdict::ALL
        .iter()
        .map(|v| {
            let [r, g, b] = verdict_rgb(*v);
            json!({ "verdict": v.name(), "rgb": [r, g, b] })
        })
        .collect();
    serde_json::Value::Array(rows).to_string()
}

/// Level curves `theta = +-(pi/2 + 2 pi k)` as JSON `[{theta, x: [..], log_abs_y: [..], y: [..]}]`.
pub fn figure1_json(x_start: f64, x_max: f64, step: f64, count: u32) -> Result<String, String> {
    if !(step > 0.0) || (x_max - x_start) / step > 1e5 {
        return Err("step must be positive and give at most 1e5 points".into());
    }
    let curves = figure1(x_start, x_max, step, count as usize).map_err(|e| e.to_string())?;
    let rows: Vec<_> = curves
        .iter()
        .map(|c| {
            json!({
                "theta": c.theta_target,
                "x": c.points.iter().map(|p| p.x).collect::<Vec<_>>(),
                "y": c.points.iter().map(|p| p.y).collect::<Vec<_>>(),
                "log_abs_y": c.points.iter().map(|p| p.log_abs_y).collect::<Vec<_>>(),
                "halted": c.halted,
            })
        })
        .collect();
    Ok(serde_json::Value::Array(rows).to_string())
}

/// `log|f(r e^{it})| - log M(r, f)` at `samples` equally spaced angles, followed by
/// `log M(r, f)` when it fits in `f64`.
pub fn circle_profile(function: &str, alpha: f64, r: f64, samples: u32) -> Result<Vec<f64>, String> {
    if !(r > 0.0 && r.is_finite()) || !(2..=1 << 16).contains(&samples) {
        return Err("need r > 0 and 2 <= samples <= 65536".into());
    }
    let f = spec(function, alpha)?;
    let m = max_modulus(&f, r).logmod;
    let m64 = m.to_f64().ok_or("log M(r) is beyond f64 range")?;
    let mut out: Vec<f64> = (0..samples)
        .map(|k| {
            let t = -std::f64::consts::PI + TAU * k as f64 / samples as f64;
            let l = eval(&f, Complex64::from_polar(r, t)).logmod();
            l.to_f64().map_or(f64::NEG_INFINITY, |x| x - m64)
        })
        .collect();
    out.push(m64);
    Ok(out)
}

/// Hardy locus check over `count` radii in `[r_min, r_max]`, as JSON.
pub fn hardy_locus_json(alpha: f64, r_min: f64, r_max: f64, count: u32) -> Result<String, String> {
    if !(0.0 < r_min && r_min < r_max) || !(2..=5000).contains(&count) {
        return Err("need 0 < r_min < r_max and 2 <= count <= 5000".into());
    }
    let rs: Vec<f64> = (0..count).map(|i| r_min + (r_max - r_min) * i as f64 / (count - 1) as f64).collect();
    let rep = hardy_locus_check(alpha, &rs).map_err(|e| e.to_string())?;
    serde_json::to_string(&rep).map_err(|e| e.to_string())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = classifyRgba)]
#[allow(clippy::too_many_arguments)]
pub fn classify_rgba(
    function: &str,
    alpha: f64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    width: u32,
    height: u32,
    depth: u32,
) -> Result<Vec<u8>, JsError> {
    grid_rgba(function, alpha, x0, y0, x1, y1, width, height, depth).map_err(js)
}

#[wasm_bindgen]
pub fn legend() -> String {
    legend_json()
}

#[wasm_bindgen(js_name = figure1Curves)]
pub fn figure1_curves(x_start: f64, x_max: f64, step: f64, count: u32) -> Result<String, JsError> {
    figure1_json(x_start, x_max, step, count).map_err(js)
}

#[wasm_bindgen(js_name = circleProfile)]
pub fn circle_profile_js(function: &str, alpha: f64, r: f64, samples: u32) -> Result<Vec<f64>, JsError> {
    circle_profile(function, alpha, r, samples).map_err(js)
}

#[wasm_bindgen(js_name = hardyLocus)]
pub fn hardy_locus(alpha: f64, r_min: f64, r_max: f64, count: u32) -> Result<String, JsError> {
    hardy_locus_json(alpha, r_min, r_max, count).map_err(js)
}
