//! Parameter sweeps over the end-to-end pipeline, and the figure presets.
//!
//! Grid points are independent. With the `parallel` feature they are evaluated
//! on the rayon pool; either way rows come back in row-major grid order (first
//! axis outermost), so output does not depend on the thread count.

use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{end_to_end, WavePacket};
use crate::error::{Error, Result};
use crate::spacetime::{DeltaMode, EarthModel, OrbitDirection, OrbitGeometry, GEO_HEIGHT_M};

/// Upper end of the height domain, in km.
pub const GEO_HEIGHT_KM: f64 = GEO_HEIGHT_M / 1e3;
/// Upper end of the squeezing domain.
pub const MAX_SQUEEZING: f64 = 3.0;

/// Default points per axis for line plots and surfaces.
pub const LINE_STEPS: usize = 400;
pub const SURFACE_STEPS: usize = 200;

/// Sweepable parameters. The declaration order is the column order of emitted
/// tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxisName {
    /// Satellite height in km.
    H,
    /// Squeezing parameter.
    S,
    /// Bandwidth in units of 1 MHz.
    Sigma,
    /// Peak frequency in units of 500 THz.
    Omega2,
}

impl AxisName {
    pub fn column(self) -> &'static str {
        match self {
            AxisName::H => "h_km",
            AxisName::S => "s",
            AxisName::Sigma => "sigma",
            AxisName::Omega2 => "omega2",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = v.is_finite()
            && match self {
                AxisName::H => (0.0..=GEO_HEIGHT_KM).contains(&v),
                AxisName::S => (0.0..=MAX_SQUEEZING).contains(&v),
                AxisName::Sigma | AxisName::Omega2 => v > 0.0,
            };
        if ok {
            Ok(())
        } else {
            let domain = match self {
                AxisName::H => "[0, 35784] km",
                AxisName::S => "[0, 3]",
                AxisName::Sigma | AxisName::Omega2 => "(0, inf)",
            };
            Err(Error::InvalidSweep(format!(
                "{} = {v} is outside {domain}",
                self.column()
            )))
        }
    }
}

impl FromStr for AxisName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" | "h_km" => Ok(AxisName::H),
            "s" => Ok(AxisName::S),
            "sigma" => Ok(AxisName::Sigma),
            "omega2" => Ok(AxisName::Omega2),
            other => Err(Error::InvalidSweep(format!(
                "unknown axis `{other}` (h, s, sigma, omega2)"
            ))),
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Linearly spaced axis with `steps >= 2` points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(name: AxisName, lo: f64, hi: f64, steps: usize) -> Self {
        Self { name, lo, hi, steps }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (i as f64 / (self.steps - 1) as f64)
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `name=lo:hi:steps`, heights in km.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::InvalidSweep(format!("axis `{text}` is not name=lo:hi:steps"));
        let (name, range) = text.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(Axis {
            name: name.trim().parse()?,
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            steps: steps.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Values for every parameter not swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub h_km: f64,
    pub s: f64,
    pub sigma: f64,
    pub omega2: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            h_km: 20_000.0,
            s: 1.0,
            sigma: 1.0,
            omega2: 1.0,
        }
    }
}

impl FixedParams {
    fn get(&self, name: AxisName) -> f64 {
        match name {
            AxisName::H => self.h_km,
            AxisName::S => self.s,
            AxisName::Sigma => self.sigma,
            AxisName::Omega2 => self.omega2,
        }
    }

    fn set(&mut self, name: AxisName, v: f64) {
        match name {
            AxisName::H => self.h_km = v,
            AxisName::S => self.s = v,
            AxisName::Sigma => self.sigma = v,
            AxisName::Omega2 => self.omega2 = v,
        }
    }
}

/// Result columns a preset is about; used for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Focus {
    SteeringAb,
    BothDirections,
    Asymmetry,
}

impl Focus {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Focus::SteeringAb => &["g_ab"],
            Focus::BothDirections => &["g_ab", "g_ba"],
            Focus::Asymmetry => &["g_asym"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub fixed: FixedParams,
    pub delta_mode: DeltaMode,
    pub direction: OrbitDirection,
    pub earth: EarthModel,
    pub focus: Focus,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>, fixed: FixedParams) -> Self {
        Self {
            axes,
            fixed,
            delta_mode: DeltaMode::Exact,
            direction: OrbitDirection::CoRotating,
            earth: EarthModel::default(),
            focus: Focus::BothDirections,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!(
                "expected 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::InvalidSweep(format!(
                "axis `{}` given twice",
                self.axes[0].name
            )));
        }
        for axis in &self.axes {
            if axis.steps < 2 {
                return Err(Error::InvalidSweep(format!(
                    "axis `{}` needs at least 2 steps",
                    axis.name
                )));
            }
            if !(axis.lo < axis.hi) {
                return Err(Error::InvalidSweep(format!(
                    "axis `{}` needs lo < hi, got [{}, {}]",
                    axis.name, axis.lo, axis.hi
                )));
            }
            axis.name.check(axis.lo)?;
            axis.name.check(axis.hi)?;
        }
        for name in [AxisName::H, AxisName::S, AxisName::Sigma, AxisName::Omega2] {
            if !self.axes.iter().any(|a| a.name == name) {
                name.check(self.fixed.get(name))?;
            }
        }
        self.earth.validate()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Swept axes in column order.
    pub fn columns(&self) -> Vec<AxisName> {
        let mut names: Vec<AxisName> = self.axes.iter().map(|a| a.name).collect();
        names.sort();
        names
    }

    /// Parameter values at flat row-major `index`.
    pub fn point(&self, index: usize) -> FixedParams {
        let mut p = self.fixed;
        let mut rest = index;
        for axis in self.axes.iter().rev() {
            p.set(axis.name, axis.value(rest % axis.steps));
            rest /= axis.steps;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Swept parameter values in column order.
    pub axes: Vec<(AxisName, f64)>,
    pub delta: f64,
    pub theta: f64,
    pub g_ab: f64,
    pub g_ba: f64,
    pub g_asym: f64,
}

impl SweepRow {
    pub fn axis(&self, name: AxisName) -> Option<f64> {
        self.axes.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

fn evaluate(spec: &SweepSpec, columns: &[AxisName], index: usize) -> Result<SweepRow> {
    let p = spec.point(index);
    let wrap = |e: Error| Error::GridPoint {
        index,
        point: format!(
            "h_km={}, s={}, sigma={}, omega2={}",
            p.h_km, p.s, p.sigma, p.omega2
        ),
        source: Box::new(e),
    };
    let geom = OrbitGeometry::new(spec.earth, p.h_km * 1e3, spec.direction).map_err(wrap)?;
    let wp = WavePacket::from_dimensionless(p.omega2, p.sigma).map_err(wrap)?;
    let out = end_to_end(&geom, &wp, p.s, spec.delta_mode).map_err(wrap)?;
    Ok(SweepRow {
        axes: columns.iter().map(|&n| (n, p.get(n))).collect(),
        delta: out.delta,
        theta: out.channel.theta,
        g_ab: out.steering.g_ab,
        g_ba: out.steering.g_ba,
        g_asym: out.steering.asymmetry,
    })
}

fn first_error(results: Vec<Result<SweepRow>>) -> Result<Vec<SweepRow>> {
    results.into_iter().collect()
}

/// Evaluates the grid on the calling thread.
pub fn run_sweep_sequential(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let columns = spec.columns();
    first_error(
        (0..spec.len())
            .map(|i| evaluate(spec, &columns, i))
            .collect(),
    )
}

/// Evaluates the grid on the current rayon pool.
#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let columns = spec.columns();
    first_error(
        (0..spec.len())
            .into_par_iter()
            .map(|i| evaluate(spec, &columns, i))
            .collect(),
    )
}

/// Runs the sweep in parallel when the `parallel` feature is on.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(spec)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Preset sweep for one of the standard figures.
pub fn figure_preset(id: FigureId) -> SweepSpec {
    let h_axis = |steps| Axis::new(AxisName::H, 0.0, GEO_HEIGHT_KM, steps);
    let base = FixedParams {
        h_km: 20_000.0,
        s: 1.0,
        sigma: 1.0,
        omega2: 1.0,
    };
    let (axes, fixed, focus) = match id {
        // three Ω₂ series against squeezing
        FigureId::Fig1 => (
            vec![
                Axis::new(AxisName::Omega2, 0.6, 1.4, 3),
                Axis::new(AxisName::S, 0.0, MAX_SQUEEZING, LINE_STEPS),
            ],
            base,
            Focus::SteeringAb,
        ),
        FigureId::Fig2 => (
            vec![
                h_axis(SURFACE_STEPS),
                Axis::new(AxisName::Sigma, 0.5, 2.0, SURFACE_STEPS),
            ],
            base,
            Focus::SteeringAb,
        ),
        FigureId::Fig3a => (
            vec![h_axis(LINE_STEPS)],
            FixedParams { omega2: 0.6, ..base },
            Focus::BothDirections,
        ),
        FigureId::Fig3b => (vec![h_axis(LINE_STEPS)], base, Focus::BothDirections),
        FigureId::Fig4 => (
            vec![
                h_axis(SURFACE_STEPS),
                Axis::new(AxisName::Omega2, 0.6, 1.0, SURFACE_STEPS),
            ],
            base,
            Focus::Asymmetry,
        ),
    };
    SweepSpec {
        focus,
        ..SweepSpec::new(axes, fixed)
    }
}
