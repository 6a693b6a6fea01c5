use serde::{Deserialize, Serialize};

use super::engine::{Face, Mesh, Side};
use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, DomainKind, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    InsidePlus,
    InsideMinus,
    /// has a neighbour on the other side of ∂Ω
    InterfaceAdjacent,
    /// touches the insulated container wall
    OuterWall,
}

/// Which part of the container is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    #[default]
    Full,
    /// the quadrant x, y ≥ centre of a domain symmetric under both axis reflections;
    /// the cut lines are insulated mirrors
    Quarter,
}

/// Uniform cell-centred grid over a square container around Ω.
///
/// The container is `container_factor` times the larger side of the bounding box of Ω,
/// and the bounding box corner sits on a grid line, so axis-aligned polygons with
/// vertices on multiples of h are resolved exactly.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub container_factor: f64,
    pub symmetry: Symmetry,
    coverage: Vec<f64>,
    plus: Vec<bool>,
}

pub const MIN_CONTAINER_FACTOR: f64 = 2.0;

impl Grid2D {
    pub fn new(geom: &DomainGeometry, h: f64, container_factor: f64) -> Result<Self> {
        Self::with_symmetry(geom, h, container_factor, Symmetry::Full)
    }

    pub fn with_symmetry(
        geom: &DomainGeometry,
        h: f64,
        container_factor: f64,
        symmetry: Symmetry,
    ) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(
                "Grid2D",
                format!("spacing must be positive, got {h}"),
            ));
        }
        if !(container_factor >= MIN_CONTAINER_FACTOR) {
            return Err(Error::domain(
                "Grid2D",
                format!("container factor {container_factor} is below {MIN_CONTAINER_FACTOR}"),
            ));
        }
        if !geom.is_simple() {
            return Err(Error::Geometry("domain boundary is not simple".into()));
        }
        let bb = geom.bounding_box();
        let side = container_factor * bb.width().max(bb.height());
        let cells = |len: f64| ((len / h) - 1e-9).ceil().max(1.0) as usize;
        let (wx, wy) = (cells(bb.width()), cells(bb.height()));
        let n = cells(side);
        let (mx, my) = (
            n.saturating_sub(wx).div_ceil(2),
            n.saturating_sub(wy).div_ceil(2),
        );
        let (nx, ny) = (wx + 2 * mx, wy + 2 * my);
        if nx.checked_mul(ny).is_none_or(|c| c > u32::MAX as usize / 2) {
            return Err(Error::domain("Grid2D", "grid too large"));
        }
        let mut origin = [bb.min[0] - mx as f64 * h, bb.min[1] - my as f64 * h];
        let (mut nx, mut ny) = (nx, ny);
        if symmetry == Symmetry::Quarter {
            if !matches!(
                geom.kind(),
                DomainKind::Square { .. }
                    | DomainKind::Circle { .. }
                    | DomainKind::MinkowskiPrefractal { .. }
            ) {
                return Err(Error::domain(
                    "Grid2D",
                    "quarter symmetry is only available for the built-in symmetric domains",
                ));
            }
            let c = bb.center();
            let on_line = |o: f64, n: usize, c: f64| {
                n.is_multiple_of(2) && (o + (n / 2) as f64 * h - c).abs() < 1e-9 * h.max(1.0)
            };
            if !on_line(origin[0], nx, c[0]) || !on_line(origin[1], ny, c[1]) {
                return Err(Error::domain(
                    "Grid2D",
                    "quarter symmetry needs the domain centre on a grid line",
                ));
            }
            origin = c;
            nx /= 2;
            ny /= 2;
        }
        let raster = geom.rasterize(origin, h, nx, ny, h);
        let plus = raster.coverage.iter().map(|&c| c >= 0.5).collect();
        Ok(Self {
            origin,
            h,
            nx,
            ny,
            container_factor,
            symmetry,
            coverage: raster.coverage,
            plus,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    /// Fraction of each cell inside Ω, row-major.
    pub fn coverage(&self) -> &[f64] {
        &self.coverage
    }

    /// Whether a cell is treated as part of Ω₊.
    pub fn is_plus(&self, k: usize) -> bool {
        self.plus[k]
    }

    /// Copies of the discretized region that make up the full container.
    pub fn multiplicity(&self) -> f64 {
        match self.symmetry {
            Symmetry::Full => 1.0,
            Symmetry::Quarter => 4.0,
        }
    }

    /// Σ coverage·h² over the full container, equal to Vol(Ω) up to round-off.
    pub fn domain_volume(&self) -> f64 {
        self.multiplicity() * self.coverage.iter().sum::<f64>() * self.h * self.h
    }

    pub fn container_side(&self) -> [f64; 2] {
        [self.nx as f64 * self.h, self.ny as f64 * self.h]
    }

    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        let mirrored = self.symmetry == Symmetry::Quarter;
        if (!mirrored && (i == 0 || j == 0)) || i + 1 == self.nx || j + 1 == self.ny {
            return NodeClass::OuterWall;
        }
        let k = self.index(i, j);
        let p = self.plus[k];
        let mut nb = vec![k + 1, k + self.nx];
        if i > 0 {
            nb.push(k - 1);
        }
        if j > 0 {
            nb.push(k - self.nx);
        }
        let across = nb.iter().any(|&m| self.plus[m] != p);
        match (across, p) {
            (true, _) => NodeClass::InterfaceAdjacent,
            (false, true) => NodeClass::InsidePlus,
            (false, false) => NodeClass::InsideMinus,
        }
    }

    /// Number of cell faces separating Ω₊ and Ω₋ cells in the discretized region.
    pub fn interface_faces(&self) -> usize {
        let mut n = 0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = self.index(i, j);
                if i + 1 < self.nx && self.plus[k] != self.plus[k + 1] {
                    n += 1;
                }
                if j + 1 < self.ny && self.plus[k] != self.plus[k + self.nx] {
                    n += 1;
                }
            }
        }
        n
    }

    pub(crate) fn mesh(&self) -> Mesh {
        let h = self.h;
        let mut faces = Vec::with_capacity(2 * self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = self.index(i, j) as u32;
                if i + 1 < self.nx {
                    faces.push(Face {
                        a: k,
                        b: k + 1,
                        len: h,
                        dist: h,
                    });
                }
                if j + 1 < self.ny {
                    faces.push(Face {
                        a: k,
                        b: k + self.nx as u32,
                        len: h,
                        dist: h,
                    });
                }
            }
        }
        Mesh {
            volume: h * h,
            side: self
                .plus
                .iter()
                .map(|&p| if p { Side::Plus } else { Side::Minus })
                .collect(),
            faces,
        }
    }
}
