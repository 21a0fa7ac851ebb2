use escape_atlas::escape::Verdict;
use escape_atlas_wasm::{circle_profile, figure1_json, grid_rgba, hardy_locus_json, legend_json, verdict_rgb};
use serde_json::Value;

#[test]
fn raster_is_rgba_with_legend_colours() {
    let px = grid_rgba("exp", 1.0, -4.0, -4.0, 4.0, 4.0, 17, 9, 10).unwrap();
    assert_eq!(px.len(), 17 * 9 * 4);
    let colours: Vec<[u8; 3]> = Verdict::ALL.iter().map(|v| verdict_rgb(*v)).collect();
    for p in px.chunks(4) {
        assert_eq!(p[3], 255);
        assert!(colours.contains(&[p[0], p[1], p[2]]));
    }
    // the middle row is the real axis; its right half is maximal
    let mid = 4 * 17 * 4;
    assert_eq!(&px[mid + 16 * 4..mid + 16 * 4 + 3], &verdict_rgb(Verdict::MaximallyFastCandidate));
    let legend: Value = serde_json::from_str(&legend_json()).unwrap();
    assert_eq!(legend.as_array().unwrap().len(), 6);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(grid_rgba("sin", 1.0, -1.0, -1.0, 1.0, 1.0, 4, 4, 4).is_err());
    assert!(grid_rgba("exp", 1.0, 1.0, -1.0, -1.0, 1.0, 4, 4, 4).is_err());
    assert!(grid_rgba("exp", 1.0, -1.0, -1.0, 1.0, 1.0, 0, 4, 4).is_err());
    assert!(circle_profile("hardy-g", 0.01, 40.0, 64).is_err());
    assert!(figure1_json(2.0, 3.0, 0.0, 1).is_err());
}

#[test]
fn figure1_curves_mirror() {
    let v: Value = serde_json::from_str(&figure1_json(2.0, 3.0, 0.05, 2).unwrap()).unwrap();
    let c = v.as_array().unwrap();
    assert_eq!(c.len(), 4);
    assert_eq!(c[0]["theta"].as_f64().unwrap(), -c[1]["theta"].as_f64().unwrap());
    assert_eq!(c[0]["log_abs_y"], c[1]["log_abs_y"]);
}

#[test]
fn profile_peaks_at_zero() {
    let v = circle_profile("exp", 1.0, 3.0, 256).unwrap();
    assert_eq!(v.len(), 257);
    assert!((v[256] - 3.0).abs() < 1e-12);
    // angle 0 is sample 128; there log|e^z| = log M
    assert!(v[128].abs() < 1e-12);
    assert!(v[..256].iter().all(|d| *d <= 1e-12));
}

#[test]
fn locus_report_counts_radii() {
    let v: Value = serde_json::from_str(&hardy_locus_json(0.01, 1.0, 20.0, 40).unwrap()).unwrap();
    let n = v["passed"].as_u64().unwrap() + v["failed"].as_u64().unwrap() + v["skipped"].as_u64().unwrap();
    assert_eq!(n, 40);
}
