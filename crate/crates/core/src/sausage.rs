//! Interior Minkowski sausage μ(∂Ω, ℓ) = Vol{x ∈ Ω : dist(x, ∂Ω) < ℓ}.

use std::fmt::Write as _;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, DomainKind, Raster};

pub const DEFAULT_GRID_RESOLUTION: usize = 2048;
pub const DEFAULT_MC_SAMPLES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SausageMode {
    /// Closed forms for squares and discs.
    Analytic,
    /// Cell-centred quadrature over the bounding box with `resolution` cells per side.
    Grid {
        resolution: usize,
    },
    MonteCarlo {
        samples: u64,
        seed: u64,
    },
}

impl SausageMode {
    pub fn label(&self) -> String {
        match *self {
            SausageMode::Analytic => "analytic".into(),
            SausageMode::Grid { resolution } => format!("grid({resolution})"),
            SausageMode::MonteCarlo { samples, seed } => {
                format!("monte_carlo({samples};seed={seed})")
            }
        }
    }
}

/// A value of μ with its error estimate: zero for analytic mode, the Richardson
/// difference |μ_h − μ_2h| for grid mode, one standard error for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuEstimate {
    pub width: f64,
    pub value: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone)]
pub struct SausageProfile {
    geom: DomainGeometry,
    mode: SausageMode,
}

impl SausageProfile {
    pub fn new(geom: DomainGeometry, mode: SausageMode) -> Result<Self> {
        match mode {
            SausageMode::Analytic => {
                if !matches!(
                    geom.kind(),
                    DomainKind::Square { .. } | DomainKind::Circle { .. }
                ) {
                    return Err(Error::Geometry(format!(
                        "no analytic sausage volume for {:?}",
                        geom.kind()
                    )));
                }
            }
            SausageMode::Grid { resolution } => {
                if resolution < 4 {
                    return Err(Error::Config(format!(
                        "grid resolution must be ≥ 4, got {resolution}"
                    )));
                }
            }
            SausageMode::MonteCarlo { samples, .. } => {
                if samples == 0 {
                    return Err(Error::Config(
                        "Monte Carlo needs at least one sample".into(),
                    ));
                }
            }
        }
        Ok(Self { geom, mode })
    }

    /// Analytic mode where available, grid mode otherwise.
    pub fn auto(geom: DomainGeometry) -> Self {
        let mode = match geom.kind() {
            DomainKind::Square { .. } | DomainKind::Circle { .. } => SausageMode::Analytic,
            _ => SausageMode::Grid {
                resolution: DEFAULT_GRID_RESOLUTION,
            },
        };
        Self { geom, mode }
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geom
    }

    pub fn mode(&self) -> SausageMode {
        self.mode
    }

    pub fn mu(&self, width: f64) -> Result<MuEstimate> {
        Ok(self.mu_many(&[width])?[0])
    }

    /// μ at several widths, sharing one distance field (grid) or one sample set (Monte Carlo).
    pub fn mu_many(&self, widths: &[f64]) -> Result<Vec<MuEstimate>> {
        let wmax = widths.iter().cloned().fold(0.0, f64::max);
        let table = self.table(wmax)?;
        widths.iter().map(|&w| table.eval(w)).collect()
    }

    /// Precompute everything needed to evaluate μ cheaply for any width in [0, max_width].
    pub fn table(&self, max_width: f64) -> Result<SausageTable> {
        if !(max_width >= 0.0) || !max_width.is_finite() {
            return Err(Error::domain(
                "mu",
                format!("width must be a nonnegative real, got {max_width}"),
            ));
        }
        let data = match self.mode {
            SausageMode::Analytic => TableData::Analytic(self.geom.kind()),
            SausageMode::Grid { resolution } => TableData::Grid {
                fine: SortedRaster::new(&self.raster(resolution, max_width)),
                coarse: SortedRaster::new(&self.raster(resolution / 2, max_width)),
            },
            SausageMode::MonteCarlo { samples, seed } => self.monte_carlo(max_width, samples, seed),
        };
        Ok(SausageTable { max_width, data })
    }

    fn raster(&self, n: usize, wmax: f64) -> Raster {
        let bb = self.geom.bounding_box();
        let h = bb.width().max(bb.height()) / n as f64;
        let c = bb.center();
        let origin = [c[0] - 0.5 * n as f64 * h, c[1] - 0.5 * n as f64 * h];
        self.geom.rasterize(origin, h, n, n, wmax + h)
    }

    fn monte_carlo(&self, wmax: f64, samples: u64, seed: u64) -> TableData {
        let bb = self.geom.bounding_box();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = Vec::new();
        for _ in 0..samples {
            let p = [
                rng.random_range(bb.min[0]..bb.max[0]),
                rng.random_range(bb.min[1]..bb.max[1]),
            ];
            if self.geom.contains(p) {
                let d = self.geom.boundary_distance_capped(p, wmax);
                if d < wmax {
                    hits.push(d);
                }
            }
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        TableData::MonteCarlo {
            sorted: hits,
            samples,
            box_area: bb.width() * bb.height(),
        }
    }

    /// Least-squares slope of log μ against log ℓ; estimates n − d.
    pub fn mu_scaling_exponent(&self, widths: &[f64]) -> Result<f64> {
        let diam = self.geom.diameter();
        for &w in widths {
            if !(w > 0.0 && w < diam) {
                return Err(Error::domain(
                    "mu_scaling_exponent",
                    format!("width {w} outside (0, {diam})"),
                ));
            }
        }
        let mut distinct = widths.to_vec();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::domain(
                "mu_scaling_exponent",
                "need at least two distinct widths",
            ));
        }
        if distinct.len() < 4 || distinct[distinct.len() - 1] < 10.0 * distinct[0] * (1.0 - 1e-9) {
            warn!("mu_scaling_exponent: fewer than 4 widths or less than one decade; slope is poorly conditioned");
        }
        if let DomainKind::MinkowskiPrefractal { generation } = self.geom.kind() {
            let side = 1.0;
            let lo = side / 4f64.powi(generation as i32);
            let hi = side / 4.0;
            if distinct.iter().any(|&w| w < lo || w > hi) {
                warn!("mu_scaling_exponent: widths leave the self-similar window [{lo}, {hi}] of generation {generation}");
            }
        }
        let mus = self.mu_many(&distinct)?;
        let pts: Vec<(f64, f64)> = mus.iter().map(|m| (m.width.ln(), m.value.ln())).collect();
        Ok(least_squares_slope(&pts))
    }

    /// CSV rows `width,mu,mode,est_error`.
    pub fn to_csv(&self, widths: &[f64]) -> Result<String> {
        let mut s = String::from("width,mu,mode,est_error\n");
        if let SausageMode::MonteCarlo { seed, .. } = self.mode {
            s.insert_str(0, &format!("# seed={seed}\n"));
        }
        let label = self.mode.label();
        for m in self.mu_many(widths)? {
            let _ = writeln!(s, "{},{},{},{}", m.width, m.value, label, m.est_error);
        }
        Ok(s)
    }
}

/// Sausage data prepared for repeated evaluation up to `max_width`.
#[derive(Debug, Clone)]
pub struct SausageTable {
    max_width: f64,
    data: TableData,
}

#[derive(Debug, Clone)]
enum TableData {
    Analytic(DomainKind),
    Grid {
        fine: SortedRaster,
        coarse: SortedRaster,
    },
    MonteCarlo {
        sorted: Vec<f64>,
        samples: u64,
        box_area: f64,
    },
}

impl SausageTable {
    pub fn max_width(&self) -> f64 {
        self.max_width
    }

    pub fn eval(&self, w: f64) -> Result<MuEstimate> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::domain(
                "mu",
                format!("width must be a nonnegative real, got {w}"),
            ));
        }
        if w > self.max_width * (1.0 + 1e-12) {
            return Err(Error::domain(
                "mu",
                format!("width {w} beyond the prepared range {}", self.max_width),
            ));
        }
        Ok(match &self.data {
            TableData::Analytic(kind) => MuEstimate {
                width: w,
                value: analytic_mu(*kind, w),
                est_error: 0.0,
            },
            TableData::Grid { fine, coarse } => {
                let a = fine.mu(w);
                let b = coarse.mu(w);
                MuEstimate {
                    width: w,
                    value: a,
                    est_error: (a - b).abs(),
                }
            }
            TableData::MonteCarlo {
                sorted,
                samples,
                box_area,
            } => {
                let hits = sorted.partition_point(|&d| d < w);
                let p = hits as f64 / *samples as f64;
                MuEstimate {
                    width: w,
                    value: box_area * p,
                    est_error: box_area * (p * (1.0 - p) / *samples as f64).sqrt(),
                }
            }
        })
    }

    /// Point value only, for quadrature loops.
    pub fn value(&self, w: f64) -> Result<f64> {
        self.eval(w).map(|m| m.value)
    }
}

fn analytic_mu(kind: DomainKind, w: f64) -> f64 {
    match kind {
        DomainKind::Square { side } => {
            let l = w.min(0.5 * side);
            4.0 * side * l - 4.0 * l * l
        }
        DomainKind::Circle { radius } => {
            let l = w.min(radius);
            2.0 * std::f64::consts::PI * radius * l - std::f64::consts::PI * l * l
        }
        _ => unreachable!("checked at construction"),
    }
}

/// Cells (coverage φ, centre distance d) sorted by d, with prefix sums of φ.
#[derive(Debug, Clone)]
struct SortedRaster {
    h: f64,
    d: Vec<f64>,
    phi: Vec<f64>,
    prefix: Vec<f64>,
}

impl SortedRaster {
    fn new(r: &Raster) -> Self {
        let mut cells: Vec<(f64, f64)> = r
            .distance
            .iter()
            .zip(&r.coverage)
            .filter(|(&d, &phi)| phi > 0.0 && d < r.cap)
            .map(|(&d, &phi)| (d, phi))
            .collect();
        cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut prefix = Vec::with_capacity(cells.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for c in &cells {
            acc += c.1;
            prefix.push(acc);
        }
        Self {
            h: r.h,
            d: cells.iter().map(|c| c.0).collect(),
            phi: cells.iter().map(|c| c.1).collect(),
            prefix,
        }
    }

    /// Σ φ_c·clamp((ℓ − d_c)/h + ½, 0, 1)·h²: the smoothed indicator averages each cell
    /// over its width in the normal direction.
    fn mu(&self, w: f64) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        let h = self.h;
        let lo = self.d.partition_point(|&d| d < w - 0.5 * h);
        let hi = self.d.partition_point(|&d| d < w + 0.5 * h);
        let mut acc = self.prefix[lo];
        for k in lo..hi {
            acc += self.phi[k] * ((w - self.d[k]) / h + 0.5).clamp(0.0, 1.0);
        }
        acc * h * h
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
