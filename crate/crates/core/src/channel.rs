//! Wavepacket overlap between the emitted and received photon, and the lossy
//! channel it induces on the satellite mode.
//!
//! The received packet is the emitted one rescaled in frequency, so its overlap
//! `Θ` with the emitted packet plays the role of an amplitude transmissivity:
//! the satellite mode becomes `Θ b2 + √(1 − Θ²) b2⊥`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_symplectic, check_theta, initial_four_mode_cm, lossy_bogoliubov, modes,
    partial_trace, CovMatrix,
};
use crate::quadrature;
use crate::spacetime::{self, DeltaMode, OrbitGeometry};
use crate::steering::{steering_asymmetry, SteeringResult};

/// Reference peak frequency for the dimensionless `Ω₂` (500 THz).
pub const PEAK_UNIT_HZ: f64 = 5e14;
/// Reference bandwidth for the dimensionless `σ̃` (1 MHz).
pub const BANDWIDTH_UNIT_HZ: f64 = 1e6;

/// Real normalized Gaussian frequency profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePacket {
    pub peak_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for WavePacket {
    fn default() -> Self {
        Self {
            peak_hz: PEAK_UNIT_HZ,
            bandwidth_hz: BANDWIDTH_UNIT_HZ,
        }
    }
}

impl WavePacket {
    pub fn new(peak_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        if !(peak_hz.is_finite() && peak_hz > 0.0) {
            return Err(Error::param("peak_hz", peak_hz, "must be positive and finite"));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::param(
                "bandwidth_hz",
                bandwidth_hz,
                "must be positive and finite",
            ));
        }
        Ok(Self {
            peak_hz,
            bandwidth_hz,
        })
    }

    /// From `Ω₂ = Ω/500 THz` and `σ̃ = σ/1 MHz`.
    pub fn from_dimensionless(omega2: f64, sigma: f64) -> Result<Self> {
        if !(omega2.is_finite() && omega2 > 0.0) {
            return Err(Error::param("omega2", omega2, "must be positive"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", sigma, "must be positive"));
        }
        Self::new(omega2 * PEAK_UNIT_HZ, sigma * BANDWIDTH_UNIT_HZ)
    }

    /// `Ω₀ / σ`.
    pub fn quality(&self) -> f64 {
        self.peak_hz / self.bandwidth_hz
    }

    /// Narrow-band regime `Ω₀ ≥ 10³ σ` in which negative frequencies are
    /// negligible.
    pub fn is_narrowband(&self) -> bool {
        self.quality() >= 1e3
    }

    /// `δ² Ω₀² / (8 σ²)`, the leading overlap deficit.
    pub fn overlap_loss(&self, delta: f64) -> f64 {
        let r = delta * self.quality();
        0.125 * r * r
    }
}

/// Overlap `Θ ∈ [0, 1]` and its value before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    pub theta: f64,
    pub theta_unclamped: f64,
}

impl ChannelParams {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            theta,
            theta_unclamped: theta,
        })
    }

    fn clamped(raw: f64) -> Result<Self> {
        if raw.is_nan() {
            return Err(Error::param("theta", raw, "overlap evaluated to NaN"));
        }
        Ok(Self {
            theta: raw.clamp(0.0, 1.0),
            theta_unclamped: raw,
        })
    }

    /// Channel fidelity `Θ²`.
    pub fn fidelity(&self) -> f64 {
        self.theta * self.theta
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= -1.0 {
        return Err(Error::param("delta", delta, "requires finite delta > -1"));
    }
    Ok(())
}

/// `Θ = √(2/(1+(1+δ)²)) · (1+δ)⁻¹ · exp(−δ²Ω₀² / (4(1+(1+δ)²)σ²))`.
pub fn overlap_theta_closed(delta: f64, wp: &WavePacket) -> Result<ChannelParams> {
    check_delta(delta)?;
    // 1 + (1+δ)² = 2(1 + δ + δ²/2)
    let half_norm = delta + 0.5 * delta * delta;
    let r = delta * wp.quality();
    let exponent = r * r / (8.0 * (1.0 + half_norm));
    let log_theta = -0.5 * half_norm.ln_1p() - delta.ln_1p() - exponent;
    ChannelParams::clamped(log_theta.exp())
}

/// `Θ ≈ 1 − δ²Ω₀²/(8σ²)`, valid while `δ²Ω₀²/σ² < 1`.
pub fn overlap_theta_perturbative(delta: f64, wp: &WavePacket) -> Result<ChannelParams> {
    check_delta(delta)?;
    ChannelParams::clamped(1.0 - wp.overlap_loss(delta))
}

/// Whether the quadratic overlap expansion applies (`δ²Ω₀²/σ² < 1`).
pub fn in_perturbative_regime(delta: f64, wp: &WavePacket) -> bool {
    8.0 * wp.overlap_loss(delta) < 1.0
}

/// How the received spectrum is rescaled relative to the emitted one:
/// `F_B(Ω) = λ^{-1/2} F_A(Ω/λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyScaling {
    /// `λ = (1+δ)²`: the metric relation with `1 + δ` the fourth root of the
    /// ratio of redshift factors.
    #[default]
    MetricFourthRoot,
    /// `λ = 1 + δ`.
    Linear,
}

impl FrequencyScaling {
    /// `λ − 1`, formed without cancellation.
    pub fn lambda_minus_one(self, delta: f64) -> f64 {
        match self {
            FrequencyScaling::MetricFourthRoot => delta * (2.0 + delta),
            FrequencyScaling::Linear => delta,
        }
    }
}

/// Analytic value of the overlap integral for a norm-preserving rescaling:
/// `√(2λ/(1+λ²)) · exp(−Ω₀²(λ−1)² / (4σ²(1+λ²)))`.
pub fn overlap_theta_rescaled(
    delta: f64,
    wp: &WavePacket,
    scaling: FrequencyScaling,
) -> Result<ChannelParams> {
    check_delta(delta)?;
    let d = scaling.lambda_minus_one(delta);
    // 1 + λ² = 2(1 + d + d²/2)
    let half_norm = d + 0.5 * d * d;
    let r = d * wp.quality();
    let log_theta =
        0.5 * d.ln_1p() - 0.5 * half_norm.ln_1p() - r * r / (8.0 * (1.0 + half_norm));
    ChannelParams::clamped(log_theta.exp())
}

/// Absolute tolerance of the overlap quadrature.
pub const QUADRATURE_ABS_TOL: f64 = 1e-12;
/// Relative tolerance, binding when the overlap itself is small.
pub const QUADRATURE_REL_TOL: f64 = 1e-13;

/// Numerical overlap `∫ F_B(Ω) F_A(Ω) dΩ` of the emitted Gaussian packet with
/// its rescaled image, using the metric relation between the two spectra.
pub fn overlap_theta_quadrature(delta: f64, wp: &WavePacket) -> Result<ChannelParams> {
    overlap_theta_quadrature_with(delta, wp, FrequencyScaling::MetricFourthRoot)
}

/// As [`overlap_theta_quadrature`] with an explicit spectrum rescaling.
///
/// Integrates in `x = (Ω − Ω₀)/σ` over a window reaching 12 effective widths
/// beyond both packet peaks. The integral runs over the whole real line in
/// principle; for `Ω₀ ≫ σ` the negative-frequency part is far outside the window.
pub fn overlap_theta_quadrature_with(
    delta: f64,
    wp: &WavePacket,
    scaling: FrequencyScaling,
) -> Result<ChannelParams> {
    check_delta(delta)?;
    let d = scaling.lambda_minus_one(delta);
    let lambda = 1.0 + d;
    // received peak sits at x = R(λ − 1)
    let shift = wp.quality() * d;
    let width = lambda.max(1.0);
    let lo = shift.min(0.0) - 12.0 * width;
    let hi = shift.max(0.0) + 12.0 * width;
    let norm = (2.0 * std::f64::consts::PI).sqrt().recip() / lambda.sqrt();
    let integrand = |x: f64| {
        let y = (x - shift) / lambda;
        norm * (-0.25 * (x * x + y * y)).exp()
    };
    let r = quadrature::integrate(integrand, lo, hi, 16, QUADRATURE_ABS_TOL, QUADRATURE_REL_TOL, 4096)?;
    ChannelParams::clamped(r.value)
}

/// Channel output on `(b1, b2)` built by the full four-mode pipeline.
pub fn propagate_two_mode(s: f64, channel: &ChannelParams) -> Result<CovMatrix> {
    let initial = initial_four_mode_cm(s)?;
    let out = apply_symplectic(&lossy_bogoliubov(channel.theta)?, &initial)?;
    partial_trace(&out, &[modes::B1, modes::B2])
}

/// Channel output on `(b1, b2)` in closed form: diagonal blocks
/// `(1 + 2 sinh²s) I₂`, `(1 + 2Θ² sinh²s) I₂`, correlations `Θ sinh 2s σz`.
pub fn final_cm_closed(s: f64, channel: &ChannelParams) -> Result<CovMatrix> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::param("s", s, "squeezing must be finite and >= 0"));
    }
    let theta = channel.theta;
    check_theta(theta)?;
    let sh2 = s.sinh().powi(2);
    let a = 1.0 + 2.0 * sh2;
    let b = 1.0 + 2.0 * theta * theta * sh2;
    let c = theta * (2.0 * s).sinh();
    CovMatrix::new(nalgebra::DMatrix::from_row_slice(
        4,
        4,
        &[
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, b, 0.0, //
            0.0, -c, 0.0, b,
        ],
    ))
}

/// Every intermediate of a single ground-to-satellite evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineOutput {
    pub delta: f64,
    pub channel: ChannelParams,
    pub steering: SteeringResult,
}

/// Orbit → shift parameter → overlap → steering in both directions.
pub fn end_to_end(
    geom: &OrbitGeometry,
    wp: &WavePacket,
    s: f64,
    mode: DeltaMode,
) -> Result<PipelineOutput> {
    let delta = spacetime::delta(geom, mode).map_err(|e| e.at_stage("frequency shift"))?;
    let channel = overlap_theta_closed(delta, wp).map_err(|e| e.at_stage("overlap"))?;
    let steering = steering_asymmetry(s, channel.theta).map_err(|e| e.at_stage("steering"))?;
    Ok(PipelineOutput {
        delta,
        channel,
        steering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{is_bona_fide, two_mode_squeezed_cm};
    use crate::spacetime::{compensation_height, CompensationMode, EarthModel, OrbitDirection};

    #[test]
    fn identity_channel_at_zero_shift() {
        let wp = WavePacket::default();
        assert_eq!(overlap_theta_closed(0.0, &wp).unwrap().theta, 1.0);
        assert_eq!(overlap_theta_perturbative(0.0, &wp).unwrap().theta, 1.0);
        let q = overlap_theta_quadrature(0.0, &wp).unwrap();
        assert!((q.theta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_overlap_reference_value() {
        // 40-digit evaluation of the closed form at δ = −2.26e-10
        let t = overlap_theta_closed(-2.26e-10, &WavePacket::default()).unwrap();
        assert!((t.theta - 0.998_405_148_468_158_7).abs() < 1e-14, "{}", t.theta);
    }

    #[test]
    fn disjoint_packets_have_no_overlap() {
        let t = overlap_theta_closed(1e-6, &WavePacket::default()).unwrap();
        assert_eq!(t.theta, 0.0);
        let t = overlap_theta_perturbative(1e-6, &WavePacket::default()).unwrap();
        assert_eq!(t.theta, 0.0);
        assert!(t.theta_unclamped < 0.0);
    }

    #[test]
    fn delta_must_exceed_minus_one() {
        let wp = WavePacket::default();
        assert!(overlap_theta_closed(-1.0, &wp).is_err());
        assert!(overlap_theta_quadrature(-1.5, &wp).is_err());
        assert!(overlap_theta_perturbative(f64::NAN, &wp).is_err());
    }

    #[test]
    fn perturbative_overlap_value_and_remainder() {
        let wp = WavePacket::default();
        let delta = 0.1 / wp.quality();
        let p = overlap_theta_perturbative(delta, &wp).unwrap().theta;
        assert!((p - 0.998_75).abs() < 1e-15);
        for k in 1..=30 {
            let delta = 0.01 * k as f64 / wp.quality();
            let x = wp.overlap_loss(delta);
            let c = overlap_theta_closed(delta, &wp).unwrap().theta_unclamped;
            let p = overlap_theta_perturbative(delta, &wp).unwrap().theta;
            assert!((c - p).abs() <= 10.0 * x * x, "k={k}");
            assert!(in_perturbative_regime(delta, &wp));
        }
        assert!(!in_perturbative_regime(2.0 / wp.quality(), &wp));
    }

    #[test]
    fn quadrature_matches_its_analytic_integral() {
        let wp = WavePacket::default();
        for scaling in [FrequencyScaling::MetricFourthRoot, FrequencyScaling::Linear] {
            for delta in [0.0, 1e-12, -1e-12, 1e-10, -1e-10, 1e-8, -1e-8] {
                let q = overlap_theta_quadrature_with(delta, &wp, scaling).unwrap().theta;
                let a = overlap_theta_rescaled(delta, &wp, scaling).unwrap().theta;
                assert!(((q - a) / a).abs() < 1e-10, "{scaling:?} {delta}: {q} vs {a}");
            }
        }
    }

    #[test]
    fn quadrature_reference_values() {
        // 40-digit mpmath quadrature of the metric-rescaled overlap.
        let wp = WavePacket::default();
        let q = overlap_theta_quadrature(1e-12, &wp).unwrap().theta;
        assert!((q - 0.999_999_875_000_007_8).abs() < 1e-13);
        let q = overlap_theta_quadrature(1e-8, &wp).unwrap().theta;
        assert!(((q - 3.726_653_637_910_35e-6) / 3.726_653_637_910_35e-6).abs() < 1e-9);
    }

    #[test]
    fn pipeline_matches_closed_output() {
        for s in [0.0, 0.5, 1.0, 2.0, 3.0] {
            for theta in [0.0, 0.3, 0.5, 0.9, 1.0] {
                let ch = ChannelParams::new(theta).unwrap();
                let a = propagate_two_mode(s, &ch).unwrap();
                let b = final_cm_closed(s, &ch).unwrap();
                assert!(a.max_abs_diff(&b) <= 1e-12 * b.matrix().amax().max(1.0));
                assert!(is_bona_fide(&b, 1e-9));
            }
        }
        let ch = ChannelParams::new(1.0).unwrap();
        let a = propagate_two_mode(1.0, &ch).unwrap();
        assert!(a.max_abs_diff(&two_mode_squeezed_cm(1.0).unwrap()) < 1e-14);
        let ch = ChannelParams::new(0.4).unwrap();
        assert_eq!(propagate_two_mode(0.0, &ch).unwrap(), CovMatrix::identity(2));
    }

    #[test]
    fn full_loss_output() {
        let ch = ChannelParams::new(0.0).unwrap();
        let m = final_cm_closed(1.5, &ch).unwrap();
        let c = 3.0_f64.cosh();
        let diag: Vec<f64> = (0..4).map(|i| m.matrix()[(i, i)]).collect();
        assert!((diag[0] - c).abs() < 1e-12 && (diag[1] - c).abs() < 1e-12);
        assert_eq!((diag[2], diag[3]), (1.0, 1.0));
        assert_eq!(m.matrix()[(0, 2)], 0.0);
    }

    #[test]
    fn end_to_end_at_compensation_height() {
        let earth = EarthModel::default();
        let h = compensation_height(&earth, CompensationMode::Full).unwrap();
        let geom = OrbitGeometry::new(earth, h, OrbitDirection::CoRotating).unwrap();
        let out = end_to_end(&geom, &WavePacket::default(), 1.0, DeltaMode::Perturbative).unwrap();
        assert!(out.delta.abs() < 1e-20);
        assert_eq!(out.channel.theta, 1.0);
        let g0 = 2.0_f64.cosh().ln();
        assert!((out.steering.g_ab - g0).abs() < 1e-13);
        assert!((out.steering.g_ba - g0).abs() < 1e-13);
        assert!(out.steering.asymmetry < 1e-13);
    }

    #[test]
    fn end_to_end_without_squeezing() {
        let geom = OrbitGeometry::new(EarthModel::default(), 2e7, OrbitDirection::CoRotating)
            .unwrap();
        let out = end_to_end(&geom, &WavePacket::default(), 0.0, DeltaMode::Exact).unwrap();
        assert_eq!(out.steering.g_ab, 0.0);
        assert_eq!(out.steering.g_ba, 0.0);
    }

    #[test]
    fn end_to_end_20000_km() {
        let geom = OrbitGeometry::new(EarthModel::default(), 2e7, OrbitDirection::CoRotating)
            .unwrap();
        let wp = WavePacket::default();
        let out = end_to_end(&geom, &wp, 1.0, DeltaMode::Exact).unwrap();
        let g0 = 2.0_f64.cosh().ln();
        let loss = g0 - out.steering.g_ab;
        assert!(loss > 1e-4 && loss < 1e-2, "{loss}");
        let p = crate::steering::steering_ab_perturbative(1.0, out.delta, wp.peak_hz, wp.bandwidth_hz)
            .unwrap();
        assert!(((g0 - p.value) - loss).abs() < 1e-2 * loss);
        assert!(out.steering.g_ab > out.steering.g_ba);
    }

    #[test]
    fn stage_labels_on_errors() {
        let geom = OrbitGeometry::new(EarthModel::default(), 2e7, OrbitDirection::CoRotating)
            .unwrap();
        let err = end_to_end(&geom, &WavePacket::default(), -1.0, DeltaMode::Exact).unwrap_err();
        assert!(err.to_string().starts_with("steering:"), "{err}");
    }

    #[test]
    fn dimensionless_wavepacket() {
        let wp = WavePacket::from_dimensionless(0.6, 2.0).unwrap();
        assert_eq!(wp.peak_hz, 3e14);
        assert_eq!(wp.bandwidth_hz, 2e6);
        assert!(wp.is_narrowband());
        assert!(!WavePacket::new(1e3, 10.0).unwrap().is_narrowband());
        assert!(WavePacket::from_dimensionless(0.0, 1.0).is_err());
        assert!(WavePacket::new(1.0, -1.0).is_err());
    }
}
