use std::io::Write;

use geosteer::channel::{end_to_end, WavePacket};
use geosteer::emit::{emit_to_string, Format};
use geosteer::spacetime::{
    compensation_height, delta_perturbative, CompensationMode, DeltaMode, EarthModel,
    OrbitDirection, OrbitGeometry,
};
use geosteer::sweep::{
    figure_preset, run_sweep, run_sweep_sequential, Axis, AxisName, FigureId, FixedParams,
    SweepSpec,
};
use geosteer::Error;

#[test]
fn compensation_height_is_lossless_for_every_squeezing() {
    let earth = EarthModel::default();
    let h = compensation_height(&earth, CompensationMode::Exact).unwrap();
    let mut spec = SweepSpec::new(
        vec![Axis::new(AxisName::S, 0.0, 3.0, 13)],
        FixedParams {
            h_km: h / 1e3,
            ..FixedParams::default()
        },
    );
    spec.delta_mode = DeltaMode::Exact;
    for row in run_sweep(&spec).unwrap() {
        let g0 = (2.0 * row.axis(AxisName::S).unwrap()).cosh().ln();
        assert!(row.delta.abs() < 1e-20);
        assert!((row.g_ab - g0).abs() <= 1e-12 * g0.max(1.0));
        assert!((row.g_ba - g0).abs() <= 1e-12 * g0.max(1.0));
    }
}

#[test]
fn twenty_thousand_km_point() {
    let geom = OrbitGeometry::new(EarthModel::default(), 2e7, OrbitDirection::CoRotating).unwrap();
    let out = end_to_end(&geom, &WavePacket::default(), 1.0, DeltaMode::Exact).unwrap();
    assert!((out.delta + 2.257_816_467_193e-10).abs() < 1e-21);
    assert!(out.steering.g_ab > out.steering.g_ba && out.steering.g_ba > 0.0);
    let pert = end_to_end(&geom, &WavePacket::default(), 1.0, DeltaMode::Perturbative).unwrap();
    assert!((pert.steering.g_ab - out.steering.g_ab).abs() < 1e-10);
}

#[test]
fn jsonl_round_trip_is_exact() {
    let rows = run_sweep(&figure_preset(FigureId::Fig1)).unwrap();
    let text = emit_to_string(&rows, Format::Jsonl).unwrap();
    assert_eq!(text.lines().count(), rows.len());
    for (line, row) in text.lines().zip(&rows) {
        let v: serde_json::Map<String, serde_json::Value> = serde_json::from_str(line).unwrap();
        assert_eq!(v["s"].as_f64(), row.axis(AxisName::S));
        assert_eq!(v["omega2"].as_f64(), row.axis(AxisName::Omega2));
        assert_eq!(v["g_ab"].as_f64(), Some(row.g_ab));
        assert_eq!(v["g_asym"].as_f64(), Some(row.g_asym));
    }
}

#[test]
fn fig1_series_are_increasing_and_close() {
    let rows = run_sweep(&figure_preset(FigureId::Fig1)).unwrap();
    let n = rows.len() / 3;
    let series: Vec<&[geosteer::SweepRow]> = rows.chunks(n).collect();
    for s in &series {
        assert!(s.windows(2).all(|w| w[1].g_ab > w[0].g_ab));
    }
    let spread = (0..n)
        .map(|i| (series[0][i].g_ab - series[2][i].g_ab).abs())
        .fold(0.0, f64::max);
    let range = series[1][n - 1].g_ab - series[1][0].g_ab;
    // the loss term grows like sinh²s, so the series fan out towards s = 3
    assert!(spread < 0.25 * range, "{spread} vs {range}");
}

#[test]
fn fig2_steering_grows_with_bandwidth() {
    // loss ∝ 1/σ̃², so at fixed height wider packets steer better
    let rows = run_sweep(&figure_preset(FigureId::Fig2)).unwrap();
    let n = figure_preset(FigureId::Fig2).axes[1].steps;
    let at_geo = &rows[rows.len() - n..];
    assert!(at_geo.windows(2).all(|w| w[1].g_ab > w[0].g_ab));
}

#[test]
fn asymmetry_vanishes_with_frequency() {
    let spec = SweepSpec::new(
        vec![Axis::new(AxisName::Omega2, 1e-3, 1.0, 50)],
        FixedParams {
            h_km: 35_784.0,
            ..FixedParams::default()
        },
    );
    let rows = run_sweep(&spec).unwrap();
    assert!(rows.windows(2).all(|w| w[1].g_asym > w[0].g_asym));
    assert!(rows[0].g_asym < 1e-6 * rows[49].g_asym);
}

#[test]
fn sequential_and_default_paths_agree() {
    let spec = figure_preset(FigureId::Fig3a);
    assert_eq!(run_sweep(&spec).unwrap(), run_sweep_sequential(&spec).unwrap());
}

#[test]
fn constants_file_without_rotation() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "omega_rad_s = 0.0").unwrap();
    let earth = EarthModel::from_constants_file(file.path()).unwrap();
    let geom = OrbitGeometry::new(earth, 0.0, OrbitDirection::CoRotating).unwrap();
    let p = delta_perturbative(&geom).unwrap();
    assert!(p.higher_undefined);
    assert_eq!(p.total, earth.r_s_m / (8.0 * earth.r_a_m));
}

#[test]
fn constants_file_errors() {
    let missing = EarthModel::from_constants_file(std::path::Path::new("/no/such/file.toml"));
    assert!(missing.unwrap_err().is_io());
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "mass = 1.0").unwrap();
    let err = EarthModel::from_constants_file(file.path()).unwrap_err();
    assert!(matches!(err, Error::Constants { .. }) && !err.is_io());
}
