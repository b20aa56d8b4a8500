//! Gaussian EPR steering.
//!
//! The general measure works on any bipartite covariance matrix through the
//! symplectic spectrum of a Schur complement. The closed forms below are that
//! measure evaluated on the channel-output state of [`crate::channel`], which
//! has diagonal blocks `(1 + 2 sinh²s) I`, `(1 + 2Θ² sinh²s) I` and
//! correlations `Θ sinh 2s σz`. All values are in nats.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{check_theta, symplectic_eigenvalues, CovMatrix};

const BONA_FIDE_TOL: f64 = 1e-9;

fn split_parties(n_modes: usize, steering_party: &[usize]) -> Result<Vec<usize>> {
    if steering_party.is_empty() {
        return Err(Error::InvalidModes("steering party is empty".into()));
    }
    for (k, &i) in steering_party.iter().enumerate() {
        if i >= n_modes || steering_party[..k].contains(&i) {
            return Err(Error::InvalidModes(format!(
                "invalid steering-party mode {i} for {n_modes} modes"
            )));
        }
    }
    let steered: Vec<usize> = (0..n_modes).filter(|k| !steering_party.contains(k)).collect();
    if steered.is_empty() {
        return Err(Error::InvalidModes("no mode left to steer".into()));
    }
    Ok(steered)
}

/// Symplectic eigenvalues of the Schur complement conditioning the steered
/// modes on the `steering_party`.
pub fn conditional_spectrum(sigma: &CovMatrix, steering_party: &[usize]) -> Result<Vec<f64>> {
    let steered = split_parties(sigma.n_modes(), steering_party)?;
    let nu_min = symplectic_eigenvalues(sigma)?
        .last()
        .copied()
        .unwrap_or(f64::NAN);
    if !(nu_min >= 1.0 - BONA_FIDE_TOL) {
        return Err(Error::NotBonaFide {
            min_eigenvalue: nu_min,
        });
    }
    let schur = crate::gaussian::schur_complement(sigma, &steered)?;
    symplectic_eigenvalues(&CovMatrix::new(schur)?)
}

/// Unclamped `−Σ ln ν̄ⱼ` over every conditional eigenvalue. For a single
/// steered mode this equals `½ ln(det A / det σ)`.
pub fn gaussian_steering_raw(sigma: &CovMatrix, steering_party: &[usize]) -> Result<f64> {
    Ok(-conditional_spectrum(sigma, steering_party)?
        .iter()
        .map(|v| v.ln())
        .sum::<f64>())
}

/// Steerability of the complement by `steering_party`:
/// `max{0, −Σ_{ν̄ⱼ<1} ln ν̄ⱼ}`.
pub fn gaussian_steering(sigma: &CovMatrix, steering_party: &[usize]) -> Result<f64> {
    let sum: f64 = conditional_spectrum(sigma, steering_party)?
        .iter()
        .filter(|&&v| v < 1.0)
        .map(|v| -v.ln())
        .sum();
    Ok(sum.max(0.0))
}

/// Determinant route `max{0, S(A) − S(σ)}` with Rényi-2 entropies. Coincides
/// with [`gaussian_steering`] when one mode is steered.
pub fn gaussian_steering_renyi(sigma: &CovMatrix, steering_party: &[usize]) -> Result<f64> {
    split_parties(sigma.n_modes(), steering_party)?;
    let idx: Vec<usize> = steering_party
        .iter()
        .flat_map(|&k| [2 * k, 2 * k + 1])
        .collect();
    let a = DMatrix::from_fn(idx.len(), idx.len(), |i, j| sigma.matrix()[(idx[i], idx[j])]);
    let (det_a, det_s) = (a.determinant(), sigma.det());
    if !(det_a > 0.0 && det_s > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((0.5 * (det_a / det_s).ln()).max(0.0))
}

fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::param("s", s, "squeezing must be finite and >= 0"));
    }
    Ok(())
}

/// `ln(1 + 2(1 − Θ²) sinh²s)`, the log-determinant factor shared by both
/// directions (`√det σ` of the output state).
fn log_mixedness(s: f64, theta: f64) -> f64 {
    let sh2 = s.sinh().powi(2);
    (2.0 * (1.0 - theta * theta) * sh2).ln_1p()
}

/// Unclamped `b1 → b2` value `ln[(1 + 2 sinh²s) / (1 + 2(1 − Θ²) sinh²s)]`.
pub fn steering_ab_raw(s: f64, theta: f64) -> Result<f64> {
    check_s(s)?;
    check_theta(theta)?;
    let sh2 = s.sinh().powi(2);
    Ok((2.0 * sh2).ln_1p() - log_mixedness(s, theta))
}

/// Unclamped `b2 → b1` value `ln[(1 + 2Θ² sinh²s) / (1 + 2(1 − Θ²) sinh²s)]`.
pub fn steering_ba_raw(s: f64, theta: f64) -> Result<f64> {
    check_s(s)?;
    check_theta(theta)?;
    let sh2 = s.sinh().powi(2);
    Ok((2.0 * theta * theta * sh2).ln_1p() - log_mixedness(s, theta))
}

/// Steering of the satellite photon `b2` by the ground photon `b1`.
pub fn steering_ab_closed(s: f64, theta: f64) -> Result<f64> {
    steering_ab_raw(s, theta).map(|g| g.max(0.0))
}

/// Steering of the ground photon `b1` by the satellite photon `b2`.
pub fn steering_ba_closed(s: f64, theta: f64) -> Result<f64> {
    steering_ba_raw(s, theta).map(|g| g.max(0.0))
}

/// Lossless steering `ln cosh 2s`, identical in both directions.
pub fn lossless_steering(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok((2.0 * s.sinh().powi(2)).ln_1p())
}

/// Both steering directions and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringResult {
    pub g_ab: f64,
    pub g_ba: f64,
    pub asymmetry: f64,
    /// Values before the `max{0, ·}` clamp.
    pub g_ab_raw: f64,
    pub g_ba_raw: f64,
}

impl SteeringResult {
    fn from_raw(g_ab_raw: f64, g_ba_raw: f64) -> Self {
        let (g_ab, g_ba) = (g_ab_raw.max(0.0), g_ba_raw.max(0.0));
        Self {
            g_ab,
            g_ba,
            asymmetry: (g_ab - g_ba).abs(),
            g_ab_raw,
            g_ba_raw,
        }
    }
}

pub fn steering_asymmetry(s: f64, theta: f64) -> Result<SteeringResult> {
    Ok(SteeringResult::from_raw(
        steering_ab_raw(s, theta)?,
        steering_ba_raw(s, theta)?,
    ))
}

/// Second-order expansion of a steering value in the shift parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeSteering {
    pub value: f64,
    /// Lossless value `ln cosh 2s`.
    pub g0: f64,
    /// Subtracted loss term.
    pub loss: f64,
    /// `g0 - loss` before clamping.
    pub raw: f64,
}

impl PerturbativeSteering {
    /// The expansion is trusted while the loss stays under a tenth of `g0`.
    pub fn is_reliable(&self) -> bool {
        self.loss <= 0.1 * self.g0
    }
}

/// `δ² Ω₀² / (2 σ²)`, the common prefactor of both expansions.
pub fn loss_prefactor(delta: f64, peak_hz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::param("delta", delta, "must be finite"));
    }
    if !(peak_hz > 0.0 && peak_hz.is_finite()) {
        return Err(Error::param("peak_hz", peak_hz, "must be positive"));
    }
    if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
        return Err(Error::param("bandwidth_hz", bandwidth_hz, "must be positive"));
    }
    let r = delta * peak_hz / bandwidth_hz;
    Ok(0.5 * r * r)
}

fn perturbative(s: f64, loss: f64) -> Result<PerturbativeSteering> {
    let g0 = lossless_steering(s)?;
    let raw = g0 - loss;
    Ok(PerturbativeSteering {
        value: raw.max(0.0),
        g0,
        loss,
        raw,
    })
}

/// `g0 − (δ²Ω₀²/2σ²) sinh²s`.
pub fn steering_ab_perturbative(
    s: f64,
    delta: f64,
    peak_hz: f64,
    bandwidth_hz: f64,
) -> Result<PerturbativeSteering> {
    check_s(s)?;
    let q = loss_prefactor(delta, peak_hz, bandwidth_hz)?;
    perturbative(s, q * s.sinh().powi(2))
}

/// `g0 − (δ²Ω₀²/2σ²)(sinh²s + sinh²s / cosh 2s)`.
pub fn steering_ba_perturbative(
    s: f64,
    delta: f64,
    peak_hz: f64,
    bandwidth_hz: f64,
) -> Result<PerturbativeSteering> {
    check_s(s)?;
    let q = loss_prefactor(delta, peak_hz, bandwidth_hz)?;
    let sh2 = s.sinh().powi(2);
    perturbative(s, q * (sh2 + sh2 / (2.0 * s).cosh()))
}

/// Alternative closed forms kept for side-by-side reporting (the
/// `diagnostics` command prints them next to the values used here). Their
/// squeezing dependence (`sinh²2s`, `cosh 4s`)
/// does not follow from the output covariance matrix; the functions above are
/// the ones used everywhere else.
pub mod printed {
    use super::check_s;
    use crate::error::Result;
    use crate::gaussian::check_theta;

    /// `ln[1 + 2 sinh²(2s)]`.
    pub fn g0(s: f64) -> Result<f64> {
        check_s(s)?;
        Ok((2.0 * (2.0 * s).sinh().powi(2)).ln_1p())
    }

    /// `max{0, ln[(1 + 2 sinh²2s) / (1 + 2(1 − Θ²) sinh²s)]}`.
    pub fn steering_ab(s: f64, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        let den = (2.0 * (1.0 - theta * theta) * s.sinh().powi(2)).ln_1p();
        Ok((g0(s)? - den).max(0.0))
    }

    /// `max{0, ln[(1 + 2 sinh²2s Θ²) / (1 + 2(1 − Θ²) sinh²s)]}`.
    pub fn steering_ba(s: f64, theta: f64) -> Result<f64> {
        check_s(s)?;
        check_theta(theta)?;
        let num = (2.0 * theta * theta * (2.0 * s).sinh().powi(2)).ln_1p();
        let den = (2.0 * (1.0 - theta * theta) * s.sinh().powi(2)).ln_1p();
        Ok((num - den).max(0.0))
    }

    /// Loss coefficient multiplying `δ²Ω₀²/2σ²` in the printed `b2 → b1`
    /// expansion: `sinh²s + sinh²2s / cosh 4s`.
    pub fn ba_loss_coefficient(s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(s.sinh().powi(2) + (2.0 * s).sinh().powi(2) / (4.0 * s).cosh())
    }
}
