//! Two-media problem on a line with the interface at s = 0.

use super::engine::{Coupling, Face, Mesh, PicardOptions, Side, Stepper};
use super::schedule::TimeSchedule;
use crate::error::{Error, Result};
use crate::green::Medium;

/// Initial data, sampled as cell averages.
#[derive(Clone)]
pub enum Initial1d {
    /// indicator of s > 0
    Step,
    /// cell averages from a 4-point Gauss rule
    Profile(std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Initial1d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Initial1d::Step => write!(f, "Step"),
            Initial1d::Profile(_) => write!(f, "Profile"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solve1dParams {
    /// the line is [−L, L] with insulated ends
    pub half_width: f64,
    pub h: f64,
    pub schedule: TimeSchedule,
    pub t_end: f64,
    /// times at which the field is recorded; `t_end` is always recorded
    pub output_times: Vec<f64>,
    pub initial: Initial1d,
    pub coupling: Coupling,
    pub picard: PicardOptions,
}

impl Solve1dParams {
    pub fn new(half_width: f64, h: f64, dt: f64, t_end: f64) -> Self {
        Self {
            half_width,
            h,
            schedule: TimeSchedule::fixed(dt),
            t_end,
            output_times: Vec::new(),
            initial: Initial1d::Step,
            coupling: Coupling::Picard,
            picard: PicardOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution1d {
    pub centers: Vec<f64>,
    pub h: f64,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    /// Picard sweeps per recorded time (finite λ only)
    pub picard_iters: Vec<Option<usize>>,
}

impl Solution1d {
    pub fn last(&self) -> &[f64] {
        self.fields.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// ∫ u ds of a recorded field.
    pub fn mass(&self, k: usize) -> f64 {
        self.fields[k].iter().sum::<f64>() * self.h
    }
}

/// Rejected accuracy regime: dt/h² above this value.
pub const MAX_DT_OVER_H2: f64 = 1e4;

pub fn solve_1d(med: &Medium, params: &Solve1dParams) -> Result<Solution1d> {
    let Solve1dParams {
        half_width: l,
        h,
        t_end,
        ..
    } = *params;
    if !(h > 0.0) || !(l > 0.0) || !(t_end > 0.0) {
        return Err(Error::domain(
            "solve_1d",
            "half width, spacing and end time must be positive",
        ));
    }
    let dmax = med.d_plus.max(med.d_minus);
    if l < 6.0 * (dmax * t_end).sqrt() {
        return Err(Error::domain(
            "solve_1d",
            format!(
                "half width {l} is less than 6 diffusion lengths ({:.3e})",
                6.0 * (dmax * t_end).sqrt()
            ),
        ));
    }
    params.schedule.validate()?;
    let m = (l / h).round() as usize;
    if m == 0 {
        return Err(Error::domain(
            "solve_1d",
            "spacing larger than the half width",
        ));
    }
    let n = 2 * m;
    let centers: Vec<f64> = (0..n).map(|i| (i as f64 - m as f64 + 0.5) * h).collect();
    let mesh = Mesh {
        volume: h,
        side: (0..n)
            .map(|i| if i >= m { Side::Plus } else { Side::Minus })
            .collect(),
        faces: (0..n - 1)
            .map(|i| Face {
                a: i as u32,
                b: i as u32 + 1,
                len: 1.0,
                dist: h,
            })
            .collect(),
    };
    let u0: Vec<f64> = match &params.initial {
        Initial1d::Step => (0..n).map(|i| if i >= m { 1.0 } else { 0.0 }).collect(),
        Initial1d::Profile(f) => centers
            .iter()
            .map(|&c| cell_average(f.as_ref(), c, h))
            .collect(),
    };
    let mut stepper = Stepper::new(&mesh, med, params.coupling, params.picard, u0)?;
    let pos = stepper.positivity_dt();
    let dt_cap = params.schedule.capped(t_end, pos);
    if dt_cap / (h * h) > MAX_DT_OVER_H2 {
        return Err(Error::domain(
            "solve_1d",
            format!("dt/h² exceeds {MAX_DT_OVER_H2}"),
        ));
    }
    let mut outs: Vec<f64> = params
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    outs.sort_by(f64::total_cmp);
    outs.dedup();
    outs.push(t_end);
    let mut sol = Solution1d {
        centers,
        h,
        times: Vec::new(),
        fields: Vec::new(),
        picard_iters: Vec::new(),
    };
    let mut t = 0.0;
    let mut last_iters = None;
    for &target in &outs {
        while t < target {
            let dt = params.schedule.capped(t, pos).min(target - t);
            last_iters = stepper.step(dt)?.picard_iters;
            t = if target - (t + dt) < 1e-12 * target {
                target
            } else {
                t + dt
            };
        }
        sol.times.push(t);
        sol.fields.push(stepper.field().to_vec());
        sol.picard_iters.push(last_iters);
    }
    Ok(sol)
}

fn cell_average(f: &(dyn Fn(f64) -> f64 + Send + Sync), c: f64, h: f64) -> f64 {
    const X: [f64; 2] = [0.339_981_043_584_856, 0.861_136_311_594_053];
    const W: [f64; 2] = [0.652_145_154_862_546, 0.347_854_845_137_454];
    let mut acc = 0.0;
    for k in 0..2 {
        acc += W[k] * (f(c - 0.5 * h * X[k]) + f(c + 0.5 * h * X[k]));
    }
    0.5 * acc
}
