//! Frequency shift of a photon sent from a ground station on the equator to a
//! satellite on a circular equatorial orbit in the Earth's Kerr spacetime.
//!
//! Lengths are meters and the Earth's mass enters through its Schwarzschild
//! radius (`M = r_S / 2` in geometric units). Angular velocities are converted
//! to geometric units (`ω / c`, in 1/m) at the boundary of this module.
//!
//! The shift parameter `δ = √(Ω_B/Ω_A) − 1` is of order `1e-10` and results from
//! near-cancellation of `1e-9` terms, so the exact route is evaluated in
//! double-double arithmetic and never subtracts two O(1) doubles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ddouble::DoubleDouble as Dd;
use crate::error::{Error, Result};

/// Geostationary height above the ground station, in meters.
pub const GEO_HEIGHT_M: f64 = 3.5784e7;

/// Earth parameters. Every field can be overridden from a constants file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarthModel {
    /// Radial coordinate of the ground station.
    pub r_a_m: f64,
    /// Schwarzschild radius `2GM/c²`.
    pub r_s_m: f64,
    /// Equatorial angular velocity.
    pub omega_rad_s: f64,
    /// Kerr parameter `J / (M c)` as a length.
    pub kerr_a_m: f64,
    pub c_m_s: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            r_a_m: 6.371e6,
            r_s_m: 9e-3,
            omega_rad_s: 7.292_115_0e-5,
            kerr_a_m: 3.28,
            c_m_s: 2.997_924_58e8,
        }
    }
}

impl EarthModel {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, v, "must be finite and >= 0"))
            }
        };
        if !(self.r_a_m.is_finite() && self.r_a_m > 0.0) {
            return Err(Error::param("r_a_m", self.r_a_m, "must be positive"));
        }
        if !(self.c_m_s.is_finite() && self.c_m_s > 0.0) {
            return Err(Error::param("c_m_s", self.c_m_s, "must be positive"));
        }
        finite_nonneg("r_s_m", self.r_s_m)?;
        finite_nonneg("omega_rad_s", self.omega_rad_s)?;
        finite_nonneg("kerr_a_m", self.kerr_a_m)?;
        if self.r_s_m >= 1e-6 * self.r_a_m {
            return Err(Error::param(
                "r_s_m",
                self.r_s_m,
                "weak-field model needs r_s / r_a < 1e-6",
            ));
        }
        if self.kerr_a_m >= 1e-3 * self.r_a_m {
            return Err(Error::param(
                "kerr_a_m",
                self.kerr_a_m,
                "Kerr parameter must be small compared with r_a",
            ));
        }
        Ok(())
    }

    /// Geometric mass `M = r_S / 2`.
    pub fn mass_m(&self) -> f64 {
        0.5 * self.r_s_m
    }

    /// Angular velocity in geometric units (1/m).
    pub fn omega_geo(&self) -> f64 {
        self.omega_rad_s / self.c_m_s
    }

    /// Parses a flat `key = value` override file. Keys left out keep their
    /// defaults; unknown keys are rejected.
    pub fn from_constants_str(text: &str) -> std::result::Result<Self, String> {
        let model: EarthModel = toml::from_str(text).map_err(|e| e.message().to_string())?;
        model.validate().map_err(|e| e.to_string())?;
        Ok(model)
    }

    pub fn from_constants_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ReadConstants {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_constants_str(&text).map_err(|message| Error::Constants {
            path: path.to_path_buf(),
            message,
        })
    }
}

/// Sense of the satellite orbit relative to the Earth's rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OrbitDirection {
    #[default]
    CoRotating,
    CounterRotating,
}

impl OrbitDirection {
    pub fn sign(self) -> f64 {
        match self {
            OrbitDirection::CoRotating => 1.0,
            OrbitDirection::CounterRotating => -1.0,
        }
    }

    pub fn from_sign(eps: i32) -> Option<Self> {
        match eps {
            1 => Some(OrbitDirection::CoRotating),
            -1 => Some(OrbitDirection::CounterRotating),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    pub earth: EarthModel,
    /// `r_B − r_A`.
    pub height_m: f64,
    pub direction: OrbitDirection,
}

impl OrbitGeometry {
    pub fn new(earth: EarthModel, height_m: f64, direction: OrbitDirection) -> Result<Self> {
        earth.validate()?;
        if !(height_m.is_finite() && height_m >= 0.0) {
            return Err(Error::param("height_m", height_m, "must be finite and >= 0"));
        }
        Ok(Self {
            earth,
            height_m,
            direction,
        })
    }

    pub fn r_b(&self) -> f64 {
        self.earth.r_a_m + self.height_m
    }
}

/// `Ω_B / Ω_A` together with cancellation-free derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyShift {
    pub ratio: f64,
    pub ratio_minus_one: f64,
    /// `√ratio − 1`.
    pub delta: f64,
}

/// `f(r) = 1 − r_S / r`.
pub fn schwarzschild_factor(r: f64, earth: &EarthModel) -> Result<f64> {
    if !(r > earth.r_s_m) || r.is_nan() {
        return Err(Error::param("r", r, "must exceed the Schwarzschild radius"));
    }
    Ok(1.0 - earth.r_s_m / r)
}

fn ratio_minus_one_dd(geom: &OrbitGeometry) -> Result<Dd> {
    let e = &geom.earth;
    let m = Dd::from_f64(e.mass_m());
    let a = Dd::from_f64(e.kerr_a_m);
    let r_a = Dd::from_f64(e.r_a_m);
    let r_b = r_a + geom.height_m;
    let w = Dd::from_f64(e.omega_rad_s) / e.c_m_s;

    // satellite on a circular equatorial geodesic
    let frame = geom.direction.sign() * (a / r_b) * (m / r_b).sqrt();
    let sat = -3.0 * (m / r_b) + 2.0 * frame;
    // ground station co-moving with the rotating surface:
    // -g_tt - 2 g_tφ ω - g_φφ ω² at r_A
    let ground = -2.0 * (m / r_a) * (1.0 - 2.0 * (a * w))
        - (r_a * r_a + a * a + 2.0 * m * a * a / r_a) * w * w;

    if !(sat.hi > -1.0) {
        return Err(Error::NonPositiveRadicand((1.0 + sat).to_f64()));
    }
    if !(ground.hi > -1.0) {
        return Err(Error::NonPositiveRadicand((1.0 + ground).to_f64()));
    }
    let ratio = (1.0 + frame) * (1.0 + ground).sqrt() / (1.0 + sat).sqrt();
    let u = ratio - 1.0;
    if !u.is_finite() {
        return Err(Error::NonPositiveRadicand(f64::NAN));
    }
    Ok(u)
}

/// Exact `Ω_B / Ω_A` for a circular equatorial orbit.
pub fn kerr_frequency_ratio(geom: &OrbitGeometry) -> Result<FrequencyShift> {
    let u = ratio_minus_one_dd(geom)?;
    Ok(FrequencyShift {
        ratio: (1.0 + u).to_f64(),
        ratio_minus_one: u.to_f64(),
        delta: u.sqrt1pm1().to_f64(),
    })
}

/// `δ = √(Ω_B/Ω_A) − 1` from the exact ratio.
pub fn delta_exact(geom: &OrbitGeometry) -> Result<f64> {
    Ok(kerr_frequency_ratio(geom)?.delta)
}

/// Terms of the weak-field, slow-rotation expansion of `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbativeShift {
    pub total: f64,
    /// `(r_S / 8 r_A)(1 − 2h/r_A)/(1 + h/r_A)`.
    pub schwarzschild: f64,
    /// `−(r_A ω)² / 4`.
    pub rotation: f64,
    /// `−((r_A ω)²/4)((3/4)(r_S/r_A) − 4Ma/(ω r_A³))`.
    pub higher: f64,
    /// Set when `ω = 0` made the higher-order term undefined; it is then 0.
    pub higher_undefined: bool,
}

/// First-order Schwarzschild term alone.
pub fn delta_schwarzschild_term(earth: &EarthModel, height_m: f64) -> f64 {
    let x = height_m / earth.r_a_m;
    0.125 * (earth.r_s_m / earth.r_a_m) * (1.0 - 2.0 * x) / (1.0 + x)
}

pub fn delta_perturbative(geom: &OrbitGeometry) -> Result<PerturbativeShift> {
    let e = &geom.earth;
    e.validate()?;
    let schwarzschild = delta_schwarzschild_term(e, geom.height_m);
    let w = e.omega_geo();
    let raw2 = (e.r_a_m * w).powi(2) / 4.0;
    let rotation = -raw2;
    let (higher, higher_undefined) = if w > 0.0 {
        let inner = 0.75 * e.r_s_m / e.r_a_m - 4.0 * e.mass_m() * e.kerr_a_m / (w * e.r_a_m.powi(3));
        (-raw2 * inner, false)
    } else {
        (0.0, true)
    };
    Ok(PerturbativeShift {
        total: schwarzschild + rotation + higher,
        schwarzschild,
        rotation,
        higher,
        higher_undefined,
    })
}

/// How `δ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    #[default]
    Exact,
    Perturbative,
}

impl std::str::FromStr for DeltaMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(DeltaMode::Exact),
            "perturbative" => Ok(DeltaMode::Perturbative),
            other => Err(format!("unknown delta mode `{other}` (exact|perturbative)")),
        }
    }
}

pub fn delta(geom: &OrbitGeometry, mode: DeltaMode) -> Result<f64> {
    match mode {
        DeltaMode::Exact => delta_exact(geom),
        DeltaMode::Perturbative => Ok(delta_perturbative(geom)?.total),
    }
}

/// Which shift function [`compensation_height`] roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensationMode {
    /// First-order Schwarzschild term; the root is `r_A / 2`.
    Schwarzschild,
    /// Full perturbative expansion.
    Full,
    /// Exact frequency ratio.
    Exact,
}

/// Height in `[0, r_A]` where `δ` changes sign, by bisection to relative `1e-12`.
pub fn compensation_height(earth: &EarthModel, mode: CompensationMode) -> Result<f64> {
    earth.validate()?;
    let eval = |h: f64| -> Result<f64> {
        let geom = OrbitGeometry::new(*earth, h, OrbitDirection::CoRotating)?;
        match mode {
            CompensationMode::Schwarzschild => Ok(delta_schwarzschild_term(earth, h)),
            CompensationMode::Full => Ok(delta_perturbative(&geom)?.total),
            CompensationMode::Exact => delta_exact(&geom),
        }
    };
    bisect(eval, 0.0, earth.r_a_m, 1e-13)
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 && fb == 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= rel_tol * mid.abs() || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(earth: EarthModel, h: f64) -> OrbitGeometry {
        OrbitGeometry::new(earth, h, OrbitDirection::CoRotating).unwrap()
    }

    fn schwarzschild_earth() -> EarthModel {
        EarthModel {
            omega_rad_s: 0.0,
            kerr_a_m: 0.0,
            ..EarthModel::default()
        }
    }

    #[test]
    fn schwarzschild_factor_values() {
        let e = EarthModel::default();
        assert!((schwarzschild_factor(1e30, &e).unwrap() - 1.0).abs() < 1e-30);
        assert_eq!(schwarzschild_factor(2.0 * e.r_s_m, &e).unwrap(), 0.5);
        let f = schwarzschild_factor(6.371e6, &e).unwrap();
        // 1 − 1.412651075184429e-9, resolved to one ulp of 1
        assert!(((1.0 - f) - 1.412_651_075_184_429_4e-9).abs() <= f64::EPSILON);
        assert!(schwarzschild_factor(e.r_s_m, &e).is_err());
        assert!(schwarzschild_factor(1e-3, &e).is_err());
    }

    #[test]
    fn flat_spacetime_has_no_shift() {
        let flat = EarthModel {
            r_s_m: 0.0,
            omega_rad_s: 0.0,
            kerr_a_m: 0.0,
            ..EarthModel::default()
        };
        for h in [0.0, 1e6, 3e7] {
            let s = kerr_frequency_ratio(&geom(flat, h)).unwrap();
            assert_eq!(s.ratio, 1.0);
            assert_eq!(s.delta, 0.0);
        }
    }

    #[test]
    fn reduces_to_static_schwarzschild_ratio() {
        let e = schwarzschild_earth();
        let m = e.mass_m();
        for h in [0.0, 1e6, 5e6, 2e7, GEO_HEIGHT_M] {
            let s = kerr_frequency_ratio(&geom(e, h)).unwrap();
            let r_b = e.r_a_m + h;
            let reference = ((1.0 - 2.0 * m / e.r_a_m) / (1.0 - 3.0 * m / r_b)).sqrt();
            assert!(((s.ratio - reference) / reference).abs() < 1e-14);
            // ratio² − 1 = (3M/r_B − 2M/r_A) / (1 − 3M/r_B)
            let sq_minus_one = (3.0 * m / r_b - 2.0 * m / e.r_a_m) / (1.0 - 3.0 * m / r_b);
            let expected = sq_minus_one / (1.0 + reference);
            assert!(((s.ratio_minus_one - expected) / expected).abs() < 1e-12, "h={h}");
        }
        assert!(kerr_frequency_ratio(&geom(e, 0.0)).unwrap().ratio > 1.0);
    }

    #[test]
    fn default_earth_reference_values() {
        // 50-digit evaluations of the exact ratio with the default constants.
        let cases = [
            (0.0, 1.759_810_121_554_720_8e-10),
            (5e6, -5.695_547_279_584_087_4e-11),
            (1e7, -1.476_059_122_596_141_7e-10),
            (2e7, -2.257_816_467_192_900_8e-10),
            (GEO_HEIGHT_M, -2.737_014_644_069_603_8e-10),
        ];
        for (h, expected) in cases {
            let d = delta_exact(&geom(EarthModel::default(), h)).unwrap();
            assert!(((d - expected) / expected).abs() < 1e-12, "h={h}: {d} vs {expected}");
        }
    }

    #[test]
    fn counter_rotating_reference_value() {
        let g = OrbitGeometry::new(EarthModel::default(), 2e7, OrbitDirection::CounterRotating)
            .unwrap();
        let expected = -2.257_816_467_184_583_2e-10;
        let d = delta_exact(&g).unwrap();
        assert!(((d - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn ratio_is_consistent_with_delta() {
        for h in [0.0, 3e6, 2e7, GEO_HEIGHT_M] {
            let s = kerr_frequency_ratio(&geom(EarthModel::default(), h)).unwrap();
            let sq = (1.0 + s.delta) * (1.0 + s.delta);
            assert!(((sq - s.ratio) / s.ratio).abs() < 1e-14);
            let u = 2.0 * s.delta + s.delta * s.delta;
            assert!(((u - s.ratio_minus_one) / s.ratio_minus_one).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzschild_shift_vanishes_at_half_radius() {
        let e = schwarzschild_earth();
        let d = delta_exact(&geom(e, e.r_a_m / 2.0)).unwrap();
        assert!(d.abs() < 1e-15, "{d}");
    }

    #[test]
    fn perturbative_terms() {
        let e = EarthModel {
            omega_rad_s: 0.0,
            ..EarthModel::default()
        };
        let p = delta_perturbative(&geom(e, 0.0)).unwrap();
        assert!(p.higher_undefined);
        assert_eq!(p.higher, 0.0);
        assert_eq!(p.rotation, 0.0);
        assert_eq!(p.total, e.r_s_m / (8.0 * e.r_a_m));
        assert!((p.total - 1.766e-10).abs() < 1e-13);

        let p = delta_perturbative(&geom(EarthModel::default(), 2e7)).unwrap();
        assert!((p.schwarzschild - -2.251_812_739_722_478e-10).abs() < 1e-23);
        assert!((p.rotation - -6.003_725_551_408_899e-13).abs() < 1e-25);
        assert!(!p.higher_undefined);
        assert!((p.higher - -7.256_481_555_902_352e-23).abs() < 1e-33);
    }

    #[test]
    fn schwarzschild_term_far_limit() {
        let e = EarthModel::default();
        let far = delta_schwarzschild_term(&e, 1e16);
        let limit = -0.25 * e.r_s_m / e.r_a_m;
        assert!(((far - limit) / limit).abs() < 1e-8);
    }

    #[test]
    fn compensation_heights() {
        let e = EarthModel::default();
        let h = compensation_height(&e, CompensationMode::Schwarzschild).unwrap();
        assert!(((h - e.r_a_m / 2.0) / (e.r_a_m / 2.0)).abs() <= 1e-12);

        let full = compensation_height(&e, CompensationMode::Full).unwrap();
        assert!(full < e.r_a_m / 2.0);
        assert!((full - e.r_a_m / 2.0).abs() < 0.01 * e.r_a_m / 2.0);

        let still = compensation_height(&schwarzschild_earth(), CompensationMode::Full).unwrap();
        assert!(((still - e.r_a_m / 2.0) / (e.r_a_m / 2.0)).abs() <= 1e-12);

        let exact = compensation_height(&e, CompensationMode::Exact).unwrap();
        assert!(((exact - full) / full).abs() < 1e-3);

        let flat = EarthModel {
            r_s_m: 0.0,
            ..EarthModel::default()
        };
        assert!(matches!(
            compensation_height(&flat, CompensationMode::Schwarzschild),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn constants_file_overrides() {
        let e = EarthModel::from_constants_str("omega_rad_s = 0\nkerr_a_m = 0.0\n").unwrap();
        assert_eq!(e.omega_rad_s, 0.0);
        assert_eq!(e.r_a_m, 6.371e6);
        let e = EarthModel::from_constants_str("# comment\nr_a_m = 6378137\n").unwrap();
        assert_eq!(e.r_a_m, 6_378_137.0);
        assert!(EarthModel::from_constants_str("mass_kg = 5.97e24\n").is_err());
        assert!(EarthModel::from_constants_str("r_a_m = -1\n").is_err());
        assert!(EarthModel::from_constants_str("r_a_m = \"x\"\n").is_err());
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(OrbitGeometry::new(EarthModel::default(), -1.0, OrbitDirection::CoRotating).is_err());
        assert!(
            OrbitGeometry::new(EarthModel::default(), f64::NAN, OrbitDirection::CoRotating).is_err()
        );
        let bad = EarthModel {
            r_s_m: 1.0e3,
            ..EarthModel::default()
        };
        assert!(OrbitGeometry::new(bad, 0.0, OrbitDirection::CoRotating).is_err());
    }

    #[test]
    fn delta_mode_parsing() {
        assert_eq!("exact".parse::<DeltaMode>().unwrap(), DeltaMode::Exact);
        assert_eq!("perturbative".parse::<DeltaMode>().unwrap(), DeltaMode::Perturbative);
        assert!("fast".parse::<DeltaMode>().is_err());
    }
}
