//! Transmission problem over a bounded container with an insulated wall.

use log::debug;

use super::engine::{Coupling, PicardOptions, Stepper};
use super::field::HeatField;
use super::grid::{Grid2D, Symmetry};
use super::schedule::TimeSchedule;
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::green::Medium;
use crate::series::{HeatContentSeries, HeatSample, Provenance};

pub const DEFAULT_CONTAINER_FACTOR: f64 = 4.0;
/// Allowed relative mass drift per unit time.
pub const MASS_DRIFT_RATE: f64 = 1e-6;
/// Round-off floor added to the mass drift allowance.
pub const MASS_DRIFT_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct Solve2dParams {
    pub h: f64,
    pub schedule: TimeSchedule,
    pub t_end: f64,
    pub container_factor: f64,
    pub symmetry: Symmetry,
    pub sample_times: Vec<f64>,
    /// times at which full fields are kept
    pub snapshot_times: Vec<f64>,
    pub coupling: Coupling,
    pub picard: PicardOptions,
}

impl Solve2dParams {
    pub fn new(h: f64, t_end: f64, sample_times: Vec<f64>) -> Self {
        Self {
            h,
            schedule: TimeSchedule::default(),
            t_end,
            container_factor: DEFAULT_CONTAINER_FACTOR,
            symmetry: Symmetry::Full,
            sample_times,
            snapshot_times: Vec::new(),
            coupling: Coupling::Picard,
            picard: PicardOptions::default(),
        }
    }
}

/// Time stepper over a [`Grid2D`] that can be advanced and inspected.
pub struct Simulation2d {
    grid: Grid2D,
    medium: Medium,
    stepper: Stepper,
    schedule: TimeSchedule,
    t: f64,
    mass0: f64,
    steps: usize,
    last_iters: Option<usize>,
}

impl Simulation2d {
    pub fn new(geom: &DomainGeometry, med: &Medium, params: &Solve2dParams) -> Result<Self> {
        params.schedule.validate()?;
        let grid = Grid2D::with_symmetry(geom, params.h, params.container_factor, params.symmetry)?;
        let u0 = grid.coverage().to_vec();
        let stepper = Stepper::new(&grid.mesh(), med, params.coupling, params.picard, u0)?;
        let h2 = params.h * params.h;
        let cap = params
            .schedule
            .capped(params.t_end, stepper.positivity_dt());
        if cap / h2 > super::one_d::MAX_DT_OVER_H2 {
            return Err(Error::domain(
                "solve_2d",
                "dt/h² exceeds the accuracy guard",
            ));
        }
        if !params.schedule.monotone && cap > stepper.positivity_dt() {
            log::warn!(
                "solve_2d: dt above the positivity bound {:.3e}; the maximum principle may fail",
                stepper.positivity_dt()
            );
        }
        let mass0 = grid.domain_volume();
        Ok(Self {
            grid,
            medium: *med,
            stepper,
            schedule: params.schedule,
            t: 0.0,
            mass0,
            steps: 0,
            last_iters: None,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn values(&self) -> &[f64] {
        self.stepper.field()
    }

    pub fn field(&self) -> HeatField {
        HeatField {
            nx: self.grid.nx,
            ny: self.grid.ny,
            h: self.grid.h,
            origin: self.grid.origin,
            time: self.t,
            values: self.stepper.field().to_vec(),
        }
    }

    /// ∫ u over the full container.
    pub fn mass(&self) -> f64 {
        self.grid.multiplicity()
            * self.stepper.field().iter().sum::<f64>()
            * self.grid.h
            * self.grid.h
    }

    /// N(t) = Vol(Ω) − ∫_Ω u by cellwise midpoint quadrature weighted with coverage.
    pub fn heat_content(&self) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        let sum: f64 = self
            .grid
            .coverage()
            .iter()
            .zip(self.stepper.field())
            .map(|(c, u)| c * (1.0 - u))
            .sum();
        self.grid.multiplicity() * sum * h2
    }

    pub fn last_picard_iters(&self) -> Option<usize> {
        self.last_iters
    }

    /// One step of at most `dt_limit`.
    pub fn step(&mut self, dt_limit: f64) -> Result<f64> {
        let dt = self
            .schedule
            .capped(self.t, self.stepper.positivity_dt())
            .min(dt_limit);
        self.last_iters = self.stepper.step(dt)?.picard_iters;
        self.t += dt;
        self.steps += 1;
        let drift = (self.mass() - self.mass0).abs() / self.mass0.max(f64::MIN_POSITIVE);
        if drift > MASS_DRIFT_RATE * self.t + MASS_DRIFT_FLOOR {
            return Err(Error::MassDrift {
                drift,
                time: self.t,
            });
        }
        Ok(dt)
    }

    /// Step until the clock reads `target` exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t < target {
            let rest = target - self.t;
            self.step(rest)?;
            if target - self.t < 1e-12 * target {
                self.t = target;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solve2dOutput {
    pub series: HeatContentSeries,
    pub snapshots: Vec<HeatField>,
    pub steps: usize,
}

pub fn solve_2d(
    geom: &DomainGeometry,
    med: &Medium,
    params: &Solve2dParams,
) -> Result<Solve2dOutput> {
    solve_2d_observed(geom, med, params, |_| Ok(()))
}

/// [`solve_2d`] that hands each heat-content sample to `observer` as soon as it exists.
pub fn solve_2d_observed(
    geom: &DomainGeometry,
    med: &Medium,
    params: &Solve2dParams,
    mut observer: impl FnMut(&HeatSample) -> Result<()>,
) -> Result<Solve2dOutput> {
    if !(params.t_end > 0.0) {
        return Err(Error::domain("solve_2d", "end time must be positive"));
    }
    let mut sim = Simulation2d::new(geom, med, params)?;
    let mut events: Vec<(f64, bool, bool)> = Vec::new();
    for &t in &params.sample_times {
        if t > 0.0 && t <= params.t_end {
            events.push((t, true, false));
        }
    }
    for &t in &params.snapshot_times {
        if t > 0.0 && t <= params.t_end {
            events.push((t, false, true));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut series = HeatContentSeries::new(format!("numeric h={}", params.h), Provenance::Numeric);
    let mut snapshots = Vec::new();
    for (t, sample, snap) in events {
        sim.advance_to(t)?;
        if sample && series.samples.last().is_none_or(|s| s.t < t) {
            let sample = HeatSample {
                t,
                n: sim.heat_content(),
                mass: Some(sim.mass()),
                picard_iters: sim.last_picard_iters(),
            };
            series.push(sample)?;
            observer(&sample)?;
            debug!(
                "solve_2d: t={t:.3e} N={:.6e} steps={}",
                sim.heat_content(),
                sim.steps()
            );
        }
        if snap {
            snapshots.push(sim.field());
        }
    }
    sim.advance_to(params.t_end)?;
    Ok(Solve2dOutput {
        series,
        snapshots,
        steps: sim.steps(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    /// ∫_F (1 − u) over F = {x ∈ Ω : dist(x, ∂Ω) > ε}
    pub defect: f64,
    /// Vol(∂Ω)·√(4D₊t)·exp(−ε²/(4D₊t))
    pub envelope: f64,
    pub volume_f: f64,
    pub within_envelope: bool,
}

/// Heat lost from the part of Ω farther than `eps` from the boundary.
pub fn localization_check(
    geom: &DomainGeometry,
    grid: &Grid2D,
    field: &HeatField,
    med: &Medium,
    eps: f64,
) -> Result<LocalizationReport> {
    if !(eps >= 0.0) || eps > geom.inradius() {
        return Err(Error::domain(
            "localization_check",
            format!("margin {eps} outside [0, inradius]"),
        ));
    }
    if field.values.len() != grid.len() || field.nx != grid.nx {
        return Err(Error::domain(
            "localization_check",
            "field does not belong to the grid",
        ));
    }
    let t = field.time;
    let h2 = grid.h * grid.h;
    let (mut defect, mut vol) = (0.0, 0.0);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.index(i, j);
            if grid.coverage()[k] < 1.0 {
                continue;
            }
            let c = grid.cell_center(i, j);
            if geom.boundary_distance_capped(c, eps + grid.h) > eps {
                defect += (1.0 - field.values[k]) * h2;
                vol += h2;
            }
        }
    }
    let (defect, vol) = (defect * grid.multiplicity(), vol * grid.multiplicity());
    let a2 = 4.0 * med.d_plus * t;
    let envelope = if t > 0.0 {
        geom.perimeter() * a2.sqrt() * (-eps * eps / a2).exp()
    } else {
        0.0
    };
    Ok(LocalizationReport {
        defect,
        envelope,
        volume_f: vol,
        within_envelope: defect <= envelope,
    })
}
