//! Test domains: squares, discs and Minkowski-island prefractals.
//!
//! Polygonal boundaries are stored as counterclockwise loops. Distance queries are
//! edge-exact (point–segment distance plus an even–odd crossing test) and are
//! accelerated by a uniform bucket grid over the edges, so prefractals with tens of
//! thousands of edges stay cheap to query.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Largest prefractal generation accepted (4·8⁶ ≈ 10⁶ edges).
pub const MAX_GENERATION: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Square { side: f64 },
    Circle { radius: f64 },
    MinkowskiPrefractal { generation: u32 },
    CustomPolygon,
}

/// An immutable planar domain Ω.
#[derive(Debug, Clone)]
pub struct DomainGeometry {
    kind: DomainKind,
    loops: Vec<Vec<Point>>,
    perimeter: f64,
    area: f64,
    hausdorff_dim_limit: f64,
    bbox: BoundingBox,
    inradius: f64,
    index: Option<EdgeIndex>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }
    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
    pub fn center(&self) -> Point {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }
}

/// Axis-aligned square of the given side, centered at the origin.
pub fn make_square(side: f64) -> Result<DomainGeometry> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::Geometry(format!(
            "square side must be positive, got {side}"
        )));
    }
    let h = 0.5 * side;
    let lp = vec![[-h, -h], [h, -h], [h, h], [-h, h]];
    let mut g = DomainGeometry::from_polygon(DomainKind::Square { side }, vec![lp], 1.0)?;
    g.inradius = h;
    Ok(g)
}

/// Disc of the given radius centered at the origin. The boundary is analytic; the
/// stored loop is only a fine polygon used for export.
pub fn make_circle(radius: f64) -> Result<DomainGeometry> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Geometry(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    let n = 720;
    let lp = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    Ok(DomainGeometry {
        kind: DomainKind::Circle { radius },
        loops: vec![lp],
        perimeter: 2.0 * PI * radius,
        area: PI * radius * radius,
        hausdorff_dim_limit: 1.0,
        bbox: BoundingBox {
            min: [-radius, -radius],
            max: [radius, radius],
        },
        inradius: radius,
        index: None,
    })
}

/// Generation `g` of the Minkowski island built on the unit square: every edge is
/// replaced by the 8-segment quadratic Koch motif (outward bump, then inward bump)
/// with segments of a quarter of the edge length. Perimeter is `4·2^g`, area stays 1.
pub fn make_minkowski_prefractal(generation: u32) -> Result<DomainGeometry> {
    if generation > MAX_GENERATION {
        return Err(Error::Geometry(format!(
            "generation {generation} exceeds the edge budget (max {MAX_GENERATION})"
        )));
    }
    let mut lp: Vec<Point> = vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];
    for _ in 0..generation {
        lp = minkowski_step(&lp);
    }
    let mut g = DomainGeometry::from_polygon(
        DomainKind::MinkowskiPrefractal { generation },
        vec![lp],
        1.5,
    )?;
    g.perimeter = 4.0 * 2f64.powi(generation as i32);
    Ok(g)
}

fn minkowski_step(lp: &[Point]) -> Vec<Point> {
    let n = lp.len();
    let mut out = Vec::with_capacity(8 * n);
    for i in 0..n {
        let a = lp[i];
        let b = lp[(i + 1) % n];
        let d = [(b[0] - a[0]) * 0.25, (b[1] - a[1]) * 0.25];
        // right-hand normal points out of a counterclockwise loop
        let o = [d[1], -d[0]];
        let at = |s: f64, k: f64| [a[0] + s * d[0] + k * o[0], a[1] + s * d[1] + k * o[1]];
        out.extend_from_slice(&[
            a,
            at(1.0, 0.0),
            at(1.0, 1.0),
            at(2.0, 1.0),
            at(2.0, 0.0),
            at(2.0, -1.0),
            at(3.0, -1.0),
            at(3.0, 0.0),
        ]);
    }
    out
}

/// Polygon domain from user loops. Loops are reoriented counterclockwise; they must be
/// simple and mutually disjoint (holes are not supported).
pub fn make_custom_polygon(loops: Vec<Vec<Point>>) -> Result<DomainGeometry> {
    let mut loops = loops;
    for lp in &mut loops {
        if lp.len() < 3 {
            return Err(Error::Geometry("a loop needs at least 3 vertices".into()));
        }
        if signed_area(lp) < 0.0 {
            lp.reverse();
        }
    }
    let g = DomainGeometry::from_polygon(DomainKind::CustomPolygon, loops, 1.0)?;
    if !g.is_simple() {
        return Err(Error::Geometry(
            "custom polygon is self-intersecting".into(),
        ));
    }
    Ok(g)
}

impl DomainGeometry {
    fn from_polygon(kind: DomainKind, loops: Vec<Vec<Point>>, dim: f64) -> Result<Self> {
        let mut perimeter = 0.0;
        let mut area = 0.0;
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for lp in &loops {
            for (i, p) in lp.iter().enumerate() {
                if !(p[0].is_finite() && p[1].is_finite()) {
                    return Err(Error::Geometry("non-finite vertex".into()));
                }
                let q = lp[(i + 1) % lp.len()];
                perimeter += (q[0] - p[0]).hypot(q[1] - p[1]);
                for k in 0..2 {
                    min[k] = min[k].min(p[k]);
                    max[k] = max[k].max(p[k]);
                }
            }
            area += signed_area(lp);
        }
        if !(area > 0.0) {
            return Err(Error::Geometry("polygon has no interior".into()));
        }
        let bbox = BoundingBox { min, max };
        let edges: Vec<[Point; 2]> = loops
            .iter()
            .flat_map(|lp| (0..lp.len()).map(move |i| [lp[i], lp[(i + 1) % lp.len()]]))
            .collect();
        let mut next = Vec::with_capacity(edges.len());
        let mut base = 0;
        for lp in &loops {
            let n = lp.len();
            next.extend((0..n).map(|i| (base + (i + 1) % n) as u32));
            base += n;
        }
        let index = EdgeIndex::new(edges, next, bbox);
        let mut g = Self {
            kind,
            loops,
            perimeter,
            area,
            hausdorff_dim_limit: dim,
            bbox,
            inradius: 0.0,
            index: Some(index),
        };
        g.inradius = g.estimate_inradius();
        Ok(g)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }
    pub fn loops(&self) -> &[Vec<Point>] {
        &self.loops
    }
    /// Vol(∂Ω): total boundary length.
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }
    /// Vol(Ω).
    pub fn area(&self) -> f64 {
        self.area
    }
    pub fn hausdorff_dim_limit(&self) -> f64 {
        self.hausdorff_dim_limit
    }
    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }
    /// Radius of the largest inscribed disc.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }
    pub fn edge_count(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }
    /// Whole-domain diameter bound (bounding-box diagonal).
    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Circle { radius } => 2.0 * radius,
            _ => self.bbox.diagonal(),
        }
    }
    /// Boundary of class C³ (only the disc among the built-in kinds).
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, DomainKind::Circle { .. })
    }
    /// Mean curvature of a smooth boundary, positive for convex domains (1/R for a disc).
    pub fn mean_curvature(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Circle { radius } => Some(1.0 / radius),
            _ => None,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = [Point; 2]> + '_ {
        self.loops
            .iter()
            .flat_map(|lp| (0..lp.len()).map(move |i| [lp[i], lp[(i + 1) % lp.len()]]))
    }

    /// Even–odd inside test; points on the boundary count as inside.
    pub fn contains(&self, p: Point) -> bool {
        match self.kind {
            DomainKind::Circle { radius } => p[0].hypot(p[1]) <= radius,
            _ => {
                let idx = self.index.as_ref().expect("polygon index");
                if idx.distance(p, 0.0) == 0.0 {
                    return true;
                }
                idx.crossings_right(p) % 2 == 1
            }
        }
    }

    /// Unsigned distance to ∂Ω.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self.kind {
            DomainKind::Circle { radius } => (p[0].hypot(p[1]) - radius).abs(),
            _ => self
                .index
                .as_ref()
                .expect("polygon index")
                .distance(p, f64::INFINITY),
        }
    }

    /// Distance to ∂Ω, capped: returns `cap` (or anything ≥ cap) when the true distance
    /// exceeds it. Much cheaper than the uncapped query for small caps.
    pub fn boundary_distance_capped(&self, p: Point, cap: f64) -> f64 {
        match self.kind {
            DomainKind::Circle { .. } => self.boundary_distance(p).min(cap),
            _ => self
                .index
                .as_ref()
                .expect("polygon index")
                .distance(p, cap)
                .min(cap),
        }
    }

    /// Negative inside Ω, positive outside, zero on ∂Ω.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.boundary_distance(p);
        if d == 0.0 {
            0.0
        } else if self.contains(p) {
            -d
        } else {
            d
        }
    }

    /// Area of Ω ∩ [x0,x1]×[y0,y1], exact for polygons and discs.
    pub fn coverage(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        match self.kind {
            DomainKind::Circle { radius } => disc_rect_area(radius, x0, x1, y0, y1),
            _ => self
                .index
                .as_ref()
                .expect("polygon index")
                .rect_area(x0, x1, y0, y1),
        }
    }

    /// x-coordinates where the horizontal line at height `y` crosses ∂Ω, sorted.
    pub fn row_crossings(&self, y: f64) -> Vec<f64> {
        match self.kind {
            DomainKind::Circle { radius } => {
                if y.abs() < radius {
                    let x = (radius * radius - y * y).sqrt();
                    vec![-x, x]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut xs = self.index.as_ref().expect("polygon index").row_crossings(y);
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                xs
            }
        }
    }

    /// Sample Ω on a cell-centred grid of `nx × ny` square cells of side `h` whose
    /// lower-left corner is `origin`. Returns exact cell coverage fractions and the
    /// boundary distance of each cell centre, capped at `distance_cap`.
    pub fn rasterize(
        &self,
        origin: Point,
        h: f64,
        nx: usize,
        ny: usize,
        distance_cap: f64,
    ) -> Raster {
        let cap = distance_cap.max(0.75 * h);
        let n = nx * ny;
        let mut coverage = vec![0.0; n];
        for j in 0..ny {
            let yc = origin[1] + (j as f64 + 0.5) * h;
            let xs = self.row_crossings(yc);
            for pair in xs.chunks_exact(2) {
                let i0 = ((pair[0] - origin[0]) / h - 0.5).ceil().max(0.0) as usize;
                let i1 = ((pair[1] - origin[0]) / h - 0.5).floor();
                if i1 < 0.0 {
                    continue;
                }
                let i1 = (i1 as usize).min(nx.saturating_sub(1));
                if i0 <= i1 {
                    coverage[j * nx + i0..=j * nx + i1].fill(1.0);
                }
            }
        }
        let distance = self.distance_field(origin, h, nx, ny, cap);
        let near = std::f64::consts::FRAC_1_SQRT_2 * h * (1.0 + 1e-9);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if distance[k] < near {
                    let x0 = origin[0] + i as f64 * h;
                    let y0 = origin[1] + j as f64 * h;
                    coverage[k] = (self.coverage(x0, x0 + h, y0, y0 + h) / (h * h)).clamp(0.0, 1.0);
                }
            }
        }
        Raster {
            origin,
            h,
            nx,
            ny,
            cap,
            coverage,
            distance,
        }
    }

    fn distance_field(&self, origin: Point, h: f64, nx: usize, ny: usize, cap: f64) -> Vec<f64> {
        let n = nx * ny;
        let centre = |i: usize, j: usize| {
            [
                origin[0] + (i as f64 + 0.5) * h,
                origin[1] + (j as f64 + 0.5) * h,
            ]
        };
        let mut dist = vec![cap; n];
        if let DomainKind::Circle { .. } = self.kind {
            for j in 0..ny {
                for i in 0..nx {
                    dist[j * nx + i] = self.boundary_distance(centre(i, j)).min(cap);
                }
            }
            return dist;
        }
        let stamp_cost: f64 = self
            .edges()
            .map(|[a, b]| {
                ((a[0] - b[0]).abs() / h + 2.0 * cap / h + 2.0)
                    * ((a[1] - b[1]).abs() / h + 2.0 * cap / h + 2.0)
            })
            .sum();
        if stamp_cost < 25.0 * n as f64 {
            for [a, b] in self.edges() {
                let lo_x = a[0].min(b[0]) - cap;
                let hi_x = a[0].max(b[0]) + cap;
                let lo_y = a[1].min(b[1]) - cap;
                let hi_y = a[1].max(b[1]) + cap;
                let i0 = ((lo_x - origin[0]) / h - 0.5).floor().max(0.0) as usize;
                let i1 = (((hi_x - origin[0]) / h - 0.5).ceil().max(0.0) as usize)
                    .min(nx.saturating_sub(1));
                let j0 = ((lo_y - origin[1]) / h - 0.5).floor().max(0.0) as usize;
                let j1 = (((hi_y - origin[1]) / h - 0.5).ceil().max(0.0) as usize)
                    .min(ny.saturating_sub(1));
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let d = segment_distance(centre(i, j), a, b);
                        let slot = &mut dist[j * nx + i];
                        if d < *slot {
                            *slot = d;
                        }
                    }
                }
            }
        } else {
            for j in 0..ny {
                for i in 0..nx {
                    dist[j * nx + i] = self.boundary_distance_capped(centre(i, j), cap);
                }
            }
        }
        dist
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        match &self.index {
            None => true,
            Some(idx) => idx.is_simple(),
        }
    }

    fn estimate_inradius(&self) -> f64 {
        // grid search followed by local pattern refinement
        let n = 128;
        let bb = self.bbox;
        let mut best = (0.0, bb.center());
        for i in 0..n {
            for j in 0..n {
                let p = [
                    bb.min[0] + (i as f64 + 0.5) / n as f64 * bb.width(),
                    bb.min[1] + (j as f64 + 0.5) / n as f64 * bb.height(),
                ];
                if self.contains(p) {
                    let d = self.boundary_distance(p);
                    if d > best.0 {
                        best = (d, p);
                    }
                }
            }
        }
        let mut step = bb.width().max(bb.height()) / n as f64;
        let (mut r, mut c) = best;
        while step > 1e-12 * bb.diagonal() {
            let mut moved = false;
            for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
                let q = [c[0] + step * dir[0], c[1] + step * dir[1]];
                if self.contains(q) {
                    let d = self.boundary_distance(q);
                    if d > r {
                        r = d;
                        c = q;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        r
    }

    /// CSV vertex list: `x,y` per line, loops separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# x,y (dimensionless length); loops separated by blank lines\n");
        for (k, lp) in self.loops.iter().enumerate() {
            if k > 0 {
                s.push('\n');
            }
            for p in lp.iter().chain(lp.first()) {
                let _ = writeln!(s, "{},{}", p[0], p[1]);
            }
        }
        s
    }
}

/// Cell-centred sampling of a domain, see [`DomainGeometry::rasterize`].
#[derive(Debug, Clone)]
pub struct Raster {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// distances are exact below this value and clamped to it above
    pub cap: f64,
    /// fraction of each cell inside Ω, row-major
    pub coverage: Vec<f64>,
    /// capped distance from each cell centre to ∂Ω, row-major
    pub distance: Vec<f64>,
}

impl Raster {
    pub fn covered_area(&self) -> f64 {
        self.coverage.iter().sum::<f64>() * self.h * self.h
    }
}

fn signed_area(lp: &[Point]) -> f64 {
    let n = lp.len();
    0.5 * (0..n)
        .map(|i| {
            let p = lp[i];
            let q = lp[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let abx = b[0] - a[0];
    let aby = b[1] - a[1];
    let apx = p[0] - a[0];
    let apy = p[1] - a[1];
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (apx - t * abx).hypot(apy - t * aby)
}

/// ∫ clamp(√(R²−x²), lo, hi) dx over [a, b] ⊂ [−R, R], exact.
fn clamped_arc_integral(r: f64, a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let arc = |x: f64| (r * r - x * x).max(0.0).sqrt();
    let anti = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * arc(x) + r * r * (x / r).clamp(-1.0, 1.0).asin())
    };
    // breakpoints where the arc crosses lo or hi
    let mut cuts = vec![a, b];
    for level in [lo, hi] {
        if level > 0.0 && level < r {
            let xc = (r * r - level * level).sqrt();
            for x in [-xc, xc] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let y = arc(0.5 * (u + v));
        total += if y >= hi {
            hi * (v - u)
        } else if y <= lo {
            lo * (v - u)
        } else {
            anti(v) - anti(u)
        };
    }
    total
}

fn disc_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if b <= a || y1 <= y0 {
        return 0.0;
    }
    // |{y ∈ [y0,y1] : |y| ≤ g}| = clamp(g, y0, y1) + clamp(g, −y1, −y0)
    let upper = clamped_arc_integral(r, a, b, y0, y1);
    let lower_neg = clamped_arc_integral(r, a, b, -y1, -y0);
    (upper + lower_neg).max(0.0)
}

/// Bucket grid over the polygon edges.
#[derive(Debug, Clone)]
struct EdgeIndex {
    edges: Vec<[Point; 2]>,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    /// edges overlapping each grid cell
    cells: Vec<Vec<u32>>,
    /// edges whose y-range meets each horizontal band (one band per grid row)
    rows: Vec<Vec<u32>>,
    /// edges whose x-range meets each vertical band (one band per grid column)
    cols: Vec<Vec<u32>>,
    /// successor of each edge along its loop
    next: Vec<u32>,
}

impl EdgeIndex {
    fn new(edges: Vec<[Point; 2]>, next: Vec<u32>, bbox: BoundingBox) -> Self {
        let n_target = (edges.len() as f64).sqrt().ceil().max(1.0);
        let span = bbox.width().max(bbox.height());
        let cell = (span / n_target).max(1e-12);
        let pad = 1e-9 * span.max(1.0);
        let origin = [bbox.min[0] - pad, bbox.min[1] - pad];
        let nx = (((bbox.width() + 2.0 * pad) / cell).ceil() as usize).max(1);
        let ny = (((bbox.height() + 2.0 * pad) / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        let mut rows = vec![Vec::new(); ny];
        let mut cols = vec![Vec::new(); nx];
        for (k, e) in edges.iter().enumerate() {
            let (i0, i1) = Self::span_of(
                e[0][0].min(e[1][0]),
                e[0][0].max(e[1][0]),
                origin[0],
                cell,
                nx,
            );
            let (j0, j1) = Self::span_of(
                e[0][1].min(e[1][1]),
                e[0][1].max(e[1][1]),
                origin[1],
                cell,
                ny,
            );
            for j in j0..=j1 {
                rows[j].push(k as u32);
                for i in i0..=i1 {
                    cells[j * nx + i].push(k as u32);
                }
            }
            for c in &mut cols[i0..=i1] {
                c.push(k as u32);
            }
        }
        Self {
            edges,
            origin,
            cell,
            nx,
            ny,
            cells,
            rows,
            cols,
            next,
        }
    }

    fn span_of(lo: f64, hi: f64, o: f64, cell: f64, n: usize) -> (usize, usize) {
        let a = (((lo - o) / cell).floor().max(0.0) as usize).min(n - 1);
        let b = (((hi - o) / cell).floor().max(0.0) as usize).min(n - 1);
        (a, b)
    }

    fn clamp_cell(&self, v: f64, o: f64, n: usize) -> isize {
        (((v - o) / self.cell).floor() as isize).clamp(0, n as isize - 1)
    }

    /// Nearest-edge distance by expanding rings of grid cells; stops once the ring
    /// lower bound exceeds both the best distance found and `cap`.
    fn distance(&self, p: Point, cap: f64) -> f64 {
        let ci = self.clamp_cell(p[0], self.origin[0], self.nx);
        let cj = self.clamp_cell(p[1], self.origin[1], self.ny);
        // distance from p to the clamped cell block [ci, cj]
        let cell_lo = [
            self.origin[0] + ci as f64 * self.cell,
            self.origin[1] + cj as f64 * self.cell,
        ];
        let outside = {
            let dx = (cell_lo[0] - p[0])
                .max(p[0] - (cell_lo[0] + self.cell))
                .max(0.0);
            let dy = (cell_lo[1] - p[1])
                .max(p[1] - (cell_lo[1] + self.cell))
                .max(0.0);
            dx.hypot(dy)
        };
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as isize;
        for ring in 0..=max_ring {
            let bound = outside.max((ring as f64 - 1.0).max(0.0) * self.cell);
            if bound > best || bound > cap {
                break;
            }
            for j in (cj - ring)..=(cj + ring) {
                if j < 0 || j >= self.ny as isize {
                    continue;
                }
                let on_edge_row = j == cj - ring || j == cj + ring;
                let step = if on_edge_row { 1 } else { (2 * ring).max(1) };
                let mut i = ci - ring;
                while i <= ci + ring {
                    if i >= 0 && i < self.nx as isize {
                        for &k in &self.cells[j as usize * self.nx + i as usize] {
                            let e = &self.edges[k as usize];
                            best = best.min(segment_distance(p, e[0], e[1]));
                        }
                    }
                    i += step;
                }
            }
        }
        best
    }

    fn row_crossings(&self, y: f64) -> Vec<f64> {
        let j = ((y - self.origin[1]) / self.cell).floor();
        if j < 0.0 || j >= self.ny as f64 {
            return Vec::new();
        }
        let mut xs = Vec::new();
        for &k in &self.rows[j as usize] {
            let [a, b] = self.edges[k as usize];
            if (a[1] > y) != (b[1] > y) {
                xs.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        xs
    }

    /// Number of edges crossed by the ray from `p` towards +x (half-open rule).
    fn crossings_right(&self, p: Point) -> usize {
        let j = ((p[1] - self.origin[1]) / self.cell).floor();
        if j < 0.0 || j >= self.ny as f64 {
            return 0;
        }
        let mut count = 0;
        for &k in &self.rows[j as usize] {
            let [a, b] = self.edges[k as usize];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if x > p[0] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Area of polygon ∩ rectangle through −∮ (clamp(y, y0, y1) − y0) dx over the
    /// boundary portion inside the vertical slab x ∈ [x0, x1].
    fn rect_area(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let (i0, i1) = Self::span_of(x0, x1, self.origin[0], self.cell, self.nx);
        let mut seen: Vec<u32> = Vec::new();
        for c in &self.cols[i0..=i1] {
            seen.extend_from_slice(c);
        }
        if i1 > i0 {
            seen.sort_unstable();
            seen.dedup();
        }
        let mut total = 0.0;
        for &k in &seen {
            let [a, b] = self.edges[k as usize];
            total -= edge_slab_integral(a, b, x0, x1, y0, y1);
        }
        total.max(0.0)
    }

    fn is_simple(&self) -> bool {
        for cell in &self.cells {
            for (u, &ka) in cell.iter().enumerate() {
                for &kb in &cell[u + 1..] {
                    let (ka, kb) = (ka as usize, kb as usize);
                    let adjacent = self.next[ka] as usize == kb || self.next[kb] as usize == ka;
                    let ea = self.edges[ka];
                    let eb = self.edges[kb];
                    if adjacent {
                        // adjacent edges may only share their common vertex
                        if collinear_overlap(ea, eb) {
                            return false;
                        }
                        continue;
                    }
                    if segments_intersect(ea, eb) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// ∫ (clamp(y(x), y0, y1) − y0) dx along the directed segment a→b, restricted to x ∈ [x0, x1].
/// Sign follows the direction of travel in x.
fn edge_slab_integral(a: Point, b: Point, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let dx = b[0] - a[0];
    if dx == 0.0 {
        return 0.0;
    }
    let (l, r, sign) = if dx > 0.0 { (a, b, 1.0) } else { (b, a, -1.0) };
    let lo = l[0].max(x0);
    let hi = r[0].min(x1);
    if hi <= lo {
        return 0.0;
    }
    let slope = (r[1] - l[1]) / (r[0] - l[0]);
    let y_at = |x: f64| l[1] + slope * (x - l[0]);
    // split where the line crosses y0 or y1
    let mut cuts = vec![lo, hi];
    if slope != 0.0 {
        for level in [y0, y1] {
            let xc = l[0] + (level - l[1]) / slope;
            if xc > lo && xc < hi {
                cuts.push(xc);
            }
        }
    }
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let yu = y_at(u);
        let yv = y_at(v);
        let ym = 0.5 * (yu + yv);
        total += if ym >= y1 {
            (y1 - y0) * (v - u)
        } else if ym <= y0 {
            0.0
        } else {
            (0.5 * (yu + yv) - y0) * (v - u)
        };
    }
    sign * total
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(e: [Point; 2], f: [Point; 2]) -> bool {
    let d1 = orient(f[0], f[1], e[0]);
    let d2 = orient(f[0], f[1], e[1]);
    let d3 = orient(e[0], e[1], f[0]);
    let d4 = orient(e[0], e[1], f[1]);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(f[0], f[1], e[0]))
        || (d2 == 0.0 && on_segment(f[0], f[1], e[1]))
        || (d3 == 0.0 && on_segment(e[0], e[1], f[0]))
        || (d4 == 0.0 && on_segment(e[0], e[1], f[1]))
}

fn collinear_overlap(e: [Point; 2], f: [Point; 2]) -> bool {
    if orient(e[0], e[1], f[0]) != 0.0 || orient(e[0], e[1], f[1]) != 0.0 {
        return false;
    }
    // collinear: overlapping beyond a single shared vertex means the loop folds back
    let dir = [e[1][0] - e[0][0], e[1][1] - e[0][1]];
    let proj = |p: Point| (p[0] - e[0][0]) * dir[0] + (p[1] - e[0][1]) * dir[1];
    let len2 = dir[0] * dir[0] + dir[1] * dir[1];
    let (a, b) = (proj(f[0]), proj(f[1]));
    let (lo, hi) = (a.min(b), a.max(b));
    hi.min(len2) - lo.max(0.0) > 1e-12 * len2
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_crossings(g: &DomainGeometry, p: Point) -> bool {
        let mut inside = false;
        for [a, b] in g.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if x > p[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn brute_distance(g: &DomainGeometry, p: Point) -> f64 {
        g.edges()
            .map(|[a, b]| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn square_basics() {
        let s = make_square(1.0).unwrap();
        assert_eq!(s.perimeter(), 4.0);
        assert_eq!(make_square(2.0).unwrap().perimeter(), 8.0);
        assert!((s.signed_distance([0.0, 0.0]) + 0.5).abs() < 1e-15);
        assert_eq!(s.signed_distance([0.5, 0.1]), 0.0);
        assert!(s.contains([0.5, 0.1]));
        assert!(make_square(0.0).is_err());
        assert!(make_square(-1.0).is_err());
        assert!((s.inradius() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_area_of_square_and_disc() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let sq = make_square(1.0).unwrap();
        let c = make_circle(0.5).unwrap();
        let (mut hs, mut hc) = (0usize, 0usize);
        for _ in 0..n {
            let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            hs += sq.contains(p) as usize;
            hc += c.contains(p) as usize;
        }
        let area_s = 4.0 * hs as f64 / n as f64;
        let area_c = 4.0 * hc as f64 / n as f64;
        // 4.5 standard errors
        assert!((area_s - 1.0).abs() < 4.5 * 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
        let pc = PI / 16.0;
        assert!((area_c - PI / 4.0).abs() < 4.5 * 4.0 * (pc * (1.0 - pc) / n as f64).sqrt());
    }

    #[test]
    fn circle_metadata() {
        let c = make_circle(1.0).unwrap();
        assert!((c.perimeter() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(c.mean_curvature(), Some(1.0));
        assert!(c.is_smooth());
        assert!(make_circle(0.0).is_err());
        assert!((c.signed_distance([0.0, 0.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn prefractal_counts_and_perimeter() {
        for g in 0..=4u32 {
            let d = make_minkowski_prefractal(g).unwrap();
            assert_eq!(d.edge_count(), 4 * 8usize.pow(g));
            let edge_sum: f64 = d
                .edges()
                .map(|[a, b]| (b[0] - a[0]).hypot(b[1] - a[1]))
                .sum();
            assert!((edge_sum - d.perimeter()).abs() <= 1e-12 * d.perimeter());
            assert_eq!(d.perimeter(), 4.0 * 2f64.powi(g as i32));
            assert!((d.area() - 1.0).abs() < 1e-12);
        }
        assert_eq!(make_minkowski_prefractal(3).unwrap().perimeter(), 32.0);
        assert_eq!(make_minkowski_prefractal(2).unwrap().edge_count(), 256);
        assert!(make_minkowski_prefractal(MAX_GENERATION + 1).is_err());
    }

    #[test]
    fn prefractal_loops_are_simple_and_ccw() {
        for g in 0..=3 {
            let d = make_minkowski_prefractal(g).unwrap();
            assert!(d.is_simple(), "generation {g}");
            assert!(signed_area(&d.loops()[0]) > 0.0);
        }
        let bowtie =
            make_custom_polygon(vec![vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]]);
        assert!(bowtie.is_err());
    }

    #[test]
    fn custom_polygon_is_reoriented() {
        let cw = vec![vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]];
        let g = make_custom_polygon(cw).unwrap();
        assert!(signed_area(&g.loops()[0]) > 0.0);
        assert!((g.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_agrees_with_ray_casting_on_prefractal() {
        let d = make_minkowski_prefractal(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4000 {
            let p = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let sd = d.signed_distance(p);
            let inside = brute_crossings(&d, p);
            assert_eq!(sd < 0.0, inside, "p={p:?} sd={sd}");
            assert!((sd.abs() - brute_distance(&d, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn signed_distance_is_one_lipschitz() {
        let doms = [
            make_square(1.0).unwrap(),
            make_circle(0.7).unwrap(),
            make_minkowski_prefractal(2).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in &doms {
            for _ in 0..2000 {
                let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let q = [
                    p[0] + rng.random_range(-0.1..0.1),
                    p[1] + rng.random_range(-0.1..0.1),
                ];
                let lhs = (d.signed_distance(p) - d.signed_distance(q)).abs();
                let rhs = (p[0] - q[0]).hypot(p[1] - q[1]);
                assert!(lhs <= rhs + 1e-13);
            }
        }
    }

    #[test]
    fn capped_distance_matches_below_cap() {
        let d = make_minkowski_prefractal(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let p = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let exact = brute_distance(&d, p);
            let capped = d.boundary_distance_capped(p, 0.05);
            if exact < 0.05 {
                assert!((capped - exact).abs() < 1e-15);
            } else {
                assert!(capped >= 0.05 - 1e-15);
            }
        }
    }

    #[test]
    fn generator_preserves_area_by_quadrature() {
        let mut prev: Option<f64> = None;
        for g in 0..=3u32 {
            let d = make_minkowski_prefractal(g).unwrap();
            // midpoint quadrature of the indicator on a 512² grid over the bounding box
            let n = 512;
            let bb = d.bounding_box();
            let (hx, hy) = (bb.width() / n as f64, bb.height() / n as f64);
            let mut hits = 0usize;
            for i in 0..n {
                for j in 0..n {
                    let p = [
                        bb.min[0] + (i as f64 + 0.5) * hx,
                        bb.min[1] + (j as f64 + 0.5) * hy,
                    ];
                    hits += d.contains(p) as usize;
                }
            }
            let a = hits as f64 * hx * hy;
            if let Some(pa) = prev {
                assert!(((a - pa) / pa).abs() < 1e-3, "g={g}: {a} vs {pa}");
            }
            prev = Some(a);
        }
    }

    #[test]
    fn coverage_is_exact() {
        let sq = make_square(1.0).unwrap();
        assert!((sq.coverage(-1.0, 1.0, -1.0, 1.0) - 1.0).abs() < 1e-14);
        assert!((sq.coverage(0.25, 0.75, 0.0, 0.1) - 0.025).abs() < 1e-15);
        let tri = make_custom_polygon(vec![vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]]).unwrap();
        // region x,y ∈ [0, 0.5]: full quarter square minus nothing (x+y ≤ 1 everywhere)
        assert!((tri.coverage(0.0, 0.5, 0.0, 0.5) - 0.25).abs() < 1e-15);
        // [0.5,1]×[0,0.5]: triangle of legs 0.5
        assert!((tri.coverage(0.5, 1.0, 0.0, 0.5) - 0.125).abs() < 1e-15);
        let c = make_circle(0.5).unwrap();
        assert!((c.coverage(-1.0, 1.0, -1.0, 1.0) - PI * 0.25).abs() < 1e-14);
        assert!((c.coverage(0.0, 1.0, 0.0, 1.0) - PI * 0.25 / 4.0).abs() < 1e-14);
        // partial cell vs fine midpoint quadrature
        let (x0, x1, y0, y1) = (0.3, 0.45, 0.2, 0.4);
        let n = 2000;
        let mut hits = 0;
        for i in 0..n {
            for j in 0..n {
                let p = [
                    x0 + (i as f64 + 0.5) / n as f64 * (x1 - x0),
                    y0 + (j as f64 + 0.5) / n as f64 * (y1 - y0),
                ];
                hits += c.contains(p) as usize;
            }
        }
        let q = hits as f64 / (n * n) as f64 * (x1 - x0) * (y1 - y0);
        assert!((c.coverage(x0, x1, y0, y1) - q).abs() < 2e-5);
        // prefractal: all cells of a covering grid sum to the area
        let d = make_minkowski_prefractal(2).unwrap();
        let mut total = 0.0;
        let m = 37;
        let bb = d.bounding_box();
        for i in 0..m {
            for j in 0..m {
                let xa = bb.min[0] + i as f64 * bb.width() / m as f64;
                let ya = bb.min[1] + j as f64 * bb.height() / m as f64;
                total += d.coverage(
                    xa,
                    xa + bb.width() / m as f64,
                    ya,
                    ya + bb.height() / m as f64,
                );
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn raster_coverage_sums_to_area() {
        for d in [
            make_square(1.0).unwrap(),
            make_circle(0.5).unwrap(),
            make_minkowski_prefractal(2).unwrap(),
        ] {
            let bb = d.bounding_box();
            let n = 100;
            let h = bb.width().max(bb.height()) * 1.1 / n as f64;
            let c = bb.center();
            let origin = [c[0] - 0.5 * n as f64 * h, c[1] - 0.5 * n as f64 * h];
            let r = d.rasterize(origin, h, n, n, 0.0);
            assert!(
                (r.covered_area() - d.area()).abs() < 1e-12,
                "{:?}: {}",
                d.kind(),
                r.covered_area()
            );
            // capped distances agree with direct queries
            for k in (0..n * n).step_by(97) {
                let (i, j) = (k % n, k / n);
                let p = [
                    origin[0] + (i as f64 + 0.5) * h,
                    origin[1] + (j as f64 + 0.5) * h,
                ];
                assert!((r.distance[k] - d.boundary_distance(p).min(r.cap)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn csv_export_has_blank_line_separators() {
        let g = make_custom_polygon(vec![
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[3.0, 0.0], [4.0, 0.0], [3.0, 1.0]],
        ])
        .unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().filter(|l| l.is_empty()).count(), 1);
        assert_eq!(
            csv.lines()
                .filter(|l| l.contains(',') && !l.starts_with('#'))
                .count(),
            8
        );
    }
}
