//! Ordered heat-content samples (t, N(t)) with their provenance.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Numeric,
    AsymptoticFull,
    AsymptoticLeading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSample {
    pub t: f64,
    pub n: f64,
    /// total heat ∫u over the computational box (numeric series only)
    pub mass: Option<f64>,
    /// Picard sweeps used by the last step before this sample (numeric series only)
    pub picard_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatContentSeries {
    /// formula id for asymptotic series, free text for numeric ones
    pub label: String,
    pub provenance: Provenance,
    pub samples: Vec<HeatSample>,
}

impl HeatContentSeries {
    pub fn new(label: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            label: label.into(),
            provenance,
            samples: Vec::new(),
        }
    }

    /// Append a sample; times must increase strictly.
    pub fn push(&mut self, s: HeatSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(s.t > last.t) {
                return Err(Error::domain(
                    "HeatContentSeries::push",
                    format!("time {} does not follow {}", s.t, last.t),
                ));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub fn push_tn(&mut self, t: f64, n: f64) -> Result<()> {
        self.push(HeatSample {
            t,
            n,
            mass: None,
            picard_iters: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.n).collect()
    }

    /// N at time `t` by log–log interpolation between bracketing samples.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let k = self.samples.partition_point(|s| s.t < t);
        if k < self.samples.len() && self.samples[k].t == t {
            return Some(self.samples[k].n);
        }
        if k == 0 || k == self.samples.len() {
            return None;
        }
        let (a, b) = (self.samples[k - 1], self.samples[k]);
        if a.n > 0.0 && b.n > 0.0 {
            let w = (t.ln() - a.t.ln()) / (b.t.ln() - a.t.ln());
            Some((a.n.ln() + w * (b.n.ln() - a.n.ln())).exp())
        } else {
            let w = (t - a.t) / (b.t - a.t);
            Some(a.n + w * (b.n - a.n))
        }
    }

    /// Least-squares slope of log N against log t over samples with t ∈ [t0, t1].
    pub fn log_slope(&self, t0: f64, t1: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.t >= t0 * (1.0 - 1e-12) && s.t <= t1 * (1.0 + 1e-12) && s.n > 0.0)
            .map(|s| (s.t.ln(), s.n.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        Some(crate::sausage::least_squares_slope(&pts))
    }

    /// `t,N,formula_id` for asymptotic series, `t,N,mass,picard_iters` for numeric ones.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self.provenance {
            Provenance::Numeric => {
                s.push_str("t,N,mass,picard_iters\n");
                for x in &self.samples {
                    let mass = x.mass.map(|m| format!("{m:.15e}")).unwrap_or_default();
                    let it = x.picard_iters.map(|i| i.to_string()).unwrap_or_default();
                    let _ = writeln!(s, "{:.15e},{:.15e},{},{}", x.t, x.n, mass, it);
                }
            }
            _ => {
                s.push_str("t,N,formula_id\n");
                for x in &self.samples {
                    let _ = writeln!(s, "{:.15e},{:.15e},{}", x.t, x.n, self.label);
                }
            }
        }
        s
    }
}
