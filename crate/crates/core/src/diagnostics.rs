//! Consistency checks between quoted magnitudes and what the model computes.

use std::fmt;

use serde::Serialize;

use crate::channel::WavePacket;
use crate::error::Result;
use crate::spacetime::{delta, DeltaMode, EarthModel, OrbitDirection, OrbitGeometry, GEO_HEIGHT_M};
use crate::steering::{self, printed};

/// Loss prefactor `δ²Ω₀²/2σ²` quoted when arguing the expansion is valid.
pub const QUOTED_LOSS: f64 = 1.25e-7;
/// Order of magnitude quoted for `δ` itself.
pub const QUOTED_DELTA_SCALE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnitudeReport {
    pub peak_hz: f64,
    pub bandwidth_hz: f64,
    pub quoted_loss: f64,
    /// Prefactor at `δ = 1e-12`.
    pub loss_at_1e_12: f64,
    /// Prefactor at the quoted `δ ∼ 1e-10`.
    pub loss_at_quoted_delta: f64,
    /// `|δ|` that reproduces the quoted prefactor.
    pub implied_delta: f64,
    pub delta_20000_km: f64,
    pub loss_20000_km: f64,
    pub delta_geo: f64,
    pub loss_geo: f64,
}

impl MagnitudeReport {
    /// Whether the quoted prefactor agrees with the quoted `δ` scale to 1%.
    pub fn is_consistent(&self) -> bool {
        ((self.loss_at_quoted_delta - self.quoted_loss) / self.quoted_loss).abs() <= 0.01
    }
}

pub fn magnitude_report(earth: &EarthModel, wp: &WavePacket) -> Result<MagnitudeReport> {
    let loss = |d: f64| steering::loss_prefactor(d, wp.peak_hz, wp.bandwidth_hz);
    let at = |h: f64| -> Result<f64> {
        delta(
            &OrbitGeometry::new(*earth, h, OrbitDirection::CoRotating)?,
            DeltaMode::Exact,
        )
    };
    let delta_20000_km = at(2e7)?;
    let delta_geo = at(GEO_HEIGHT_M)?;
    Ok(MagnitudeReport {
        peak_hz: wp.peak_hz,
        bandwidth_hz: wp.bandwidth_hz,
        quoted_loss: QUOTED_LOSS,
        loss_at_1e_12: loss(1e-12)?,
        loss_at_quoted_delta: loss(QUOTED_DELTA_SCALE)?,
        implied_delta: (2.0 * QUOTED_LOSS).sqrt() / wp.quality(),
        delta_20000_km,
        loss_20000_km: loss(delta_20000_km)?,
        delta_geo,
        loss_geo: loss(delta_geo)?,
    })
}

impl fmt::Display for MagnitudeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "wavepacket: peak {:.6e} Hz, bandwidth {:.6e} Hz",
            self.peak_hz, self.bandwidth_hz
        )?;
        writeln!(f, "quoted loss prefactor        {:.11e}", self.quoted_loss)?;
        writeln!(f, "prefactor at delta = 1e-12   {:.11e}", self.loss_at_1e_12)?;
        writeln!(
            f,
            "prefactor at delta = 1e-10   {:.11e}",
            self.loss_at_quoted_delta
        )?;
        writeln!(f, "delta implied by quote       {:.11e}", self.implied_delta)?;
        writeln!(
            f,
            "delta at h = 20000 km        {:.11e} (prefactor {:.11e})",
            self.delta_20000_km, self.loss_20000_km
        )?;
        writeln!(
            f,
            "delta at GEO                 {:.11e} (prefactor {:.11e})",
            self.delta_geo, self.loss_geo
        )?;
        if self.is_consistent() {
            write!(f, "quoted prefactor and quoted delta scale agree")
        } else {
            write!(
                f,
                "INCONSISTENT: the quoted prefactor needs |delta| = {:.3e}, but delta ~ {:.0e} gives {:.3e} ({:.0}x larger)",
                self.implied_delta,
                QUOTED_DELTA_SCALE,
                self.loss_at_quoted_delta,
                self.loss_at_quoted_delta / self.quoted_loss
            )
        }
    }
}

/// Typeset steering formulas next to the covariance-matrix ones at `(s, Θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaComparison {
    pub s: f64,
    pub theta: f64,
    pub g0_derived: f64,
    pub g0_printed: f64,
    pub g_ab_derived: f64,
    pub g_ab_printed: f64,
    pub g_ba_derived: f64,
    pub g_ba_printed: f64,
    /// Coefficients of `δ²Ω₀²/2σ²` in the `b2 → b1` expansion.
    pub ba_loss_derived: f64,
    pub ba_loss_printed: f64,
}

pub fn compare_printed(s: f64, theta: f64) -> Result<FormulaComparison> {
    let sh2 = s.sinh().powi(2);
    Ok(FormulaComparison {
        s,
        theta,
        g0_derived: steering::lossless_steering(s)?,
        g0_printed: printed::g0(s)?,
        g_ab_derived: steering::steering_ab_closed(s, theta)?,
        g_ab_printed: printed::steering_ab(s, theta)?,
        g_ba_derived: steering::steering_ba_closed(s, theta)?,
        g_ba_printed: printed::steering_ba(s, theta)?,
        ba_loss_derived: sh2 + sh2 / (2.0 * s).cosh(),
        ba_loss_printed: printed::ba_loss_coefficient(s)?,
    })
}

impl fmt::Display for FormulaComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "s = {}, theta = {}", self.s, self.theta)?;
        writeln!(f, "{:<10}{:>22}{:>22}", "", "derived", "printed")?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, a: f64, b: f64| {
            writeln!(f, "{name:<10}{a:>22.11e}{b:>22.11e}")
        };
        row(f, "g0", self.g0_derived, self.g0_printed)?;
        row(f, "g_ab", self.g_ab_derived, self.g_ab_printed)?;
        row(f, "g_ba", self.g_ba_derived, self.g_ba_printed)?;
        row(f, "ba_loss", self.ba_loss_derived, self.ba_loss_printed)
    }
}
