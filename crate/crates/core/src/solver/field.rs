use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Normalized temperature on a [`super::Grid2D`] at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatField {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Point,
    pub time: f64,
    /// row-major, x fastest
    pub values: Vec<f64>,
}

/// JSON sidecar of a binary snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Point,
    pub time: f64,
    /// always "f64-le-row-major"
    pub layout: String,
}

const LAYOUT: &str = "f64-le-row-major";

impl HeatField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// ∫ u over the container.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h * self.h
    }

    /// Write `<stem>.bin` and `<stem>.json` into `dir`; returns both paths.
    pub fn write_snapshot(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let bin = dir.join(format!("{stem}.bin"));
        let json = dir.join(format!("{stem}.json"));
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&bin, bytes)?;
        let header = SnapshotHeader {
            nx: self.nx,
            ny: self.ny,
            h: self.h,
            origin: self.origin,
            time: self.time,
            layout: LAYOUT.into(),
        };
        let text =
            serde_json::to_string_pretty(&header).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&json, text)?;
        Ok((bin, json))
    }

    /// Read a snapshot from its JSON sidecar; the binary sits next to it.
    pub fn read_snapshot(json: &Path) -> Result<Self> {
        let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(json)?)
            .map_err(|e| Error::Config(e.to_string()))?;
        if header.layout != LAYOUT {
            return Err(Error::Config(format!(
                "unsupported snapshot layout '{}'",
                header.layout
            )));
        }
        let bytes = fs::read(json.with_extension("bin"))?;
        if bytes.len() != 8 * header.nx * header.ny {
            return Err(Error::Config(
                "snapshot size does not match its header".into(),
            ));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            nx: header.nx,
            ny: header.ny,
            h: header.h,
            origin: header.origin,
            time: header.time,
            values,
        })
    }
}
