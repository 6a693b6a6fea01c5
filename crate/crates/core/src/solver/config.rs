use std::path::Path;

use serde::{Deserialize, Serialize};

use super::engine::{Coupling, PicardOptions};
use super::grid::Symmetry;
use super::schedule::TimeSchedule;
use super::two_d::{Solve2dParams, DEFAULT_CONTAINER_FACTOR};
use crate::error::{Error, Result};
use crate::geometry::{
    make_circle, make_custom_polygon, make_minkowski_prefractal, make_square, DomainGeometry, Point,
};
use crate::green::{Lambda, Medium};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometrySpec {
    Square,
    Circle,
    Prefractal,
    Polygon,
}

/// λ as a number, or one of the words "inf", "infinity", "zero".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Word(String),
}

impl LambdaSpec {
    pub fn resolve(&self) -> Result<Lambda> {
        match self {
            LambdaSpec::Value(v) => Lambda::from_f64(*v),
            LambdaSpec::Word(w) => match w.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "infinite" => Ok(Lambda::Infinite),
                "zero" => Ok(Lambda::Zero),
                other => other
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("cannot read lambda '{w}'")))
                    .and_then(Lambda::from_f64),
            },
        }
    }
}

impl From<Lambda> for LambdaSpec {
    fn from(l: Lambda) -> Self {
        match l {
            Lambda::Infinite => LambdaSpec::Word("inf".into()),
            other => LambdaSpec::Value(other.value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleTimes {
    List(Vec<f64>),
    LogSpaced { start: f64, end: f64, count: usize },
}

impl SampleTimes {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            SampleTimes::List(v) => Ok(v.clone()),
            SampleTimes::LogSpaced { start, end, count } => {
                if !(*start > 0.0 && end > start) || *count < 2 {
                    return Err(Error::Config(
                        "log-spaced sample times need 0 < start < end, count ≥ 2".into(),
                    ));
                }
                let (a, b) = (start.ln(), end.ln());
                Ok((0..*count)
                    .map(|i| (a + (b - a) * i as f64 / (*count - 1) as f64).exp())
                    .collect())
            }
        }
    }
}

impl Default for SampleTimes {
    fn default() -> Self {
        SampleTimes::LogSpaced {
            start: 1e-5,
            end: 1e-1,
            count: 17,
        }
    }
}

/// Run description for the 2-D solver, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub geometry: GeometrySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<Point>>>,
    pub d_plus: f64,
    pub d_minus: f64,
    pub lambda: LambdaSpec,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_ratio")]
    pub dt_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_container")]
    pub container_factor: f64,
    #[serde(default)]
    pub symmetry: Symmetry,
    #[serde(default)]
    pub sample_times: SampleTimes,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default)]
    pub picard: PicardOptions,
}

fn default_h() -> f64 {
    1.0 / 256.0
}
fn default_dt() -> f64 {
    1e-6
}
fn default_ratio() -> f64 {
    0.02
}
fn default_t_end() -> f64 {
    1e-1
}
fn default_container() -> f64 {
    DEFAULT_CONTAINER_FACTOR
}

impl SolverConfig {
    pub fn new(geometry: GeometrySpec, d_plus: f64, d_minus: f64, lambda: Lambda) -> Self {
        Self {
            geometry,
            generation: None,
            side: None,
            radius: None,
            vertices: None,
            d_plus,
            d_minus,
            lambda: lambda.into(),
            h: default_h(),
            dt: default_dt(),
            dt_ratio: default_ratio(),
            dt_max: None,
            t_end: default_t_end(),
            container_factor: default_container(),
            symmetry: Symmetry::Full,
            sample_times: SampleTimes::default(),
            snapshot_times: Vec::new(),
            coupling: Coupling::default(),
            picard: PicardOptions::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load by extension: `.json` is JSON, anything else TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_geometry(&self) -> Result<DomainGeometry> {
        match self.geometry {
            GeometrySpec::Square => make_square(self.side.unwrap_or(1.0)),
            GeometrySpec::Circle => make_circle(self.radius.unwrap_or(1.0)),
            GeometrySpec::Prefractal => {
                make_minkowski_prefractal(self.generation.ok_or_else(|| {
                    Error::Config("prefractal geometry needs `generation`".into())
                })?)
            }
            GeometrySpec::Polygon => make_custom_polygon(
                self.vertices
                    .clone()
                    .ok_or_else(|| Error::Config("polygon geometry needs `vertices`".into()))?,
            ),
        }
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::new(self.d_plus, self.d_minus, self.lambda.resolve()?)
    }

    pub fn schedule(&self) -> TimeSchedule {
        TimeSchedule {
            dt_min: self.dt,
            ratio: self.dt_ratio,
            dt_max: self.dt_max,
            monotone: true,
        }
    }

    pub fn solve_params(&self) -> Result<Solve2dParams> {
        let schedule = self.schedule();
        schedule.validate()?;
        Ok(Solve2dParams {
            h: self.h,
            schedule,
            t_end: self.t_end,
            container_factor: self.container_factor,
            symmetry: self.symmetry,
            sample_times: self.sample_times.resolve()?,
            snapshot_times: self.snapshot_times.clone(),
            coupling: self.coupling,
            picard: self.picard,
        })
    }
}
