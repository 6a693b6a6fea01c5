//! Cell-centred finite-volume Crank–Nicolson stepper shared by the 1-D and 2-D solvers.
//!
//! Cells have a uniform volume and belong to Ω₊ or Ω₋. A face between two cells on the
//! same side conducts with D·len/dist. A face across ∂Ω conducts with len/R, where R is
//! the series resistance dist/(2D₊) + 1/λ + dist/(2D₋) of the two half cells and the
//! interface film.

use crate::error::{Error, Result};
use crate::green::{Lambda, Medium};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Face {
    pub a: u32,
    pub b: u32,
    pub len: f64,
    pub dist: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Mesh {
    pub volume: f64,
    pub side: Vec<Side>,
    pub faces: Vec<Face>,
}

/// How the two subdomains are coupled for finite λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// alternate subdomain solves until the interface trace settles
    #[default]
    Picard,
    /// one linear solve over both subdomains
    Monolithic,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PicardOptions {
    /// L² tolerance on the interface trace mismatch
    pub tol: f64,
    pub max_iter: usize,
    /// first relaxation factor; later ones follow Aitken's rule
    pub relaxation: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            relaxation: 0.7,
        }
    }
}

/// Relative residual target of the conjugate-gradient solves.
pub(crate) const CG_TOL: f64 = 1e-13;

fn conductance(med: &Medium, side_a: Side, side_b: Side, f: &Face) -> f64 {
    let d = |s: Side| {
        if s == Side::Plus {
            med.d_plus
        } else {
            med.d_minus
        }
    };
    if side_a == side_b {
        return d(side_a) * f.len / f.dist;
    }
    let half = 0.5 * f.dist * (1.0 / med.d_plus + 1.0 / med.d_minus);
    match med.lambda {
        Lambda::Zero => 0.0,
        Lambda::Infinite => f.len / half,
        Lambda::Finite(l) => f.len / (half + 1.0 / l),
    }
}

/// Symmetric operator restricted to one set of cells.
#[derive(Debug, Clone)]
struct Block {
    cells: Vec<u32>,
    offsets: Vec<u32>,
    nbr: Vec<u32>,
    cond: Vec<f64>,
    /// Σ conductance of every face touching the cell, including coupling faces
    diag: Vec<f64>,
    /// every neighbour of local cell i is i ± 1
    chain: bool,
}

impl Block {
    fn len(&self) -> usize {
        self.cells.len()
    }

    /// out = x + c·L x where L x = diag∘x − Σ cond·x_nbr.
    fn apply(&self, c: f64, x: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let (s, e) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
            let mut acc = self.diag[i] * x[i];
            for k in s..e {
                acc -= self.cond[k] * x[self.nbr[k] as usize];
            }
            out[i] = x[i] + c * acc;
        }
    }

    /// out = x − c·L x.
    fn explicit(&self, c: f64, x: &[f64], out: &mut [f64]) {
        self.apply(-c, x, out);
    }

    /// Solve (I + cL) x = b: Thomas elimination on chains, otherwise Jacobi-preconditioned
    /// CG warm-started from `x`. Returns the CG iteration count (0 for direct solves).
    fn solve(&self, c: f64, b: &[f64], x: &mut [f64], scratch: &mut CgScratch) -> Result<usize> {
        let n = self.len();
        if n == 0 {
            return Ok(0);
        }
        scratch.resize(n);
        if self.chain {
            self.thomas(c, b, x, scratch);
            return Ok(0);
        }
        let CgScratch { r, z, p, q } = scratch;
        self.apply(c, x, q);
        let mut bnorm = 0.0;
        for i in 0..n {
            r[i] = b[i] - q[i];
            bnorm += b[i] * b[i];
        }
        let bnorm = bnorm.sqrt().max(f64::MIN_POSITIVE);
        let target = CG_TOL * bnorm;
        let mut rz = 0.0;
        for i in 0..n {
            z[i] = r[i] / (1.0 + c * self.diag[i]);
            p[i] = z[i];
            rz += r[i] * z[i];
        }
        let max_iter = 20 * (n as f64).sqrt() as usize + 200;
        let mut res = norm(r);
        for it in 0..max_iter {
            if res <= target {
                return Ok(it);
            }
            self.apply(c, p, q);
            let pq: f64 = p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            let mut rz_new = 0.0;
            for i in 0..n {
                z[i] = r[i] / (1.0 + c * self.diag[i]);
                rz_new += r[i] * z[i];
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            res = norm(r);
        }
        if res <= target {
            Ok(max_iter)
        } else {
            Err(Error::LinearSolver {
                iterations: max_iter,
                residual: res / bnorm,
            })
        }
    }
}

impl Block {
    /// Coupling to the next cell along the chain, zero if absent.
    fn upper(&self, i: usize) -> f64 {
        let (s, e) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        (s..e)
            .find(|&k| self.nbr[k] as usize == i + 1)
            .map_or(0.0, |k| self.cond[k])
    }

    fn thomas(&self, c: f64, b: &[f64], x: &mut [f64], scratch: &mut CgScratch) {
        let n = self.len();
        let (cp, dp) = (&mut scratch.r, &mut scratch.z);
        let mut lower = 0.0;
        for i in 0..n {
            let up = if i + 1 < n { -c * self.upper(i) } else { 0.0 };
            let diag = 1.0 + c * self.diag[i];
            let (prev_c, prev_d) = if i == 0 {
                (0.0, 0.0)
            } else {
                (cp[i - 1], dp[i - 1])
            };
            let m = diag - lower * prev_c;
            cp[i] = up / m;
            dp[i] = (b[i] - lower * prev_d) / m;
            lower = up;
        }
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Default, Clone)]
struct CgScratch {
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl CgScratch {
    fn resize(&mut self, n: usize) {
        for v in [&mut self.r, &mut self.z, &mut self.p, &mut self.q] {
            v.resize(n, 0.0);
        }
    }
}

/// A face between the Ω₊ block and the Ω₋ block, in block-local indices.
#[derive(Debug, Clone, Copy)]
struct CouplingFace {
    plus: u32,
    minus: u32,
    cond: f64,
    len: f64,
}

fn build_block(
    cells: Vec<u32>,
    local: &[u32],
    member: &[bool],
    mesh: &Mesh,
    cond: &[f64],
) -> Block {
    let n = cells.len();
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut diag = vec![0.0; n];
    for (f, &k) in mesh.faces.iter().zip(cond) {
        if k == 0.0 {
            continue;
        }
        let (a, b) = (f.a as usize, f.b as usize);
        match (member[a], member[b]) {
            (true, true) => {
                let (la, lb) = (local[a], local[b]);
                adj[la as usize].push((lb, k));
                adj[lb as usize].push((la, k));
                diag[la as usize] += k;
                diag[lb as usize] += k;
            }
            (true, false) => diag[local[a] as usize] += k,
            (false, true) => diag[local[b] as usize] += k,
            _ => {}
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut nbr = Vec::new();
    let mut cv = Vec::new();
    offsets.push(0u32);
    for a in adj {
        for (j, k) in a {
            nbr.push(j);
            cv.push(k);
        }
        offsets.push(nbr.len() as u32);
    }
    let chain = (0..n).all(|i| {
        nbr[offsets[i] as usize..offsets[i + 1] as usize]
            .iter()
            .all(|&j| (j as usize).abs_diff(i) == 1)
    });
    Block {
        cells,
        offsets,
        nbr,
        cond: cv,
        diag,
        chain,
    }
}

/// Outcome of one time step.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct StepInfo {
    pub picard_iters: Option<usize>,
}

enum Layout {
    Single(Block),
    Split {
        plus: Block,
        minus: Block,
        coupling: Vec<CouplingFace>,
    },
}

pub(crate) struct Stepper {
    volume: f64,
    layout: Layout,
    picard: PicardOptions,
    /// max Σcond over cells, for the positivity bound on dt
    max_diag: f64,
    u: Vec<f64>,
    /// previous field and step, for the linear warm start
    prev: Option<(Vec<f64>, f64)>,
    scratch: CgScratch,
}

impl Stepper {
    pub fn new(
        mesh: &Mesh,
        med: &Medium,
        coupling: Coupling,
        picard: PicardOptions,
        u0: Vec<f64>,
    ) -> Result<Self> {
        let n = mesh.side.len();
        if u0.len() != n {
            return Err(Error::domain(
                "Stepper",
                "initial field does not match the mesh",
            ));
        }
        if !(picard.tol > 0.0)
            || picard.max_iter == 0
            || !(picard.relaxation > 0.0 && picard.relaxation <= 1.0)
        {
            return Err(Error::Config(format!("invalid Picard options {picard:?}")));
        }
        let cond: Vec<f64> = mesh
            .faces
            .iter()
            .map(|f| conductance(med, mesh.side[f.a as usize], mesh.side[f.b as usize], f))
            .collect();
        let mut sum = vec![0.0; n];
        for (f, &k) in mesh.faces.iter().zip(&cond) {
            sum[f.a as usize] += k;
            sum[f.b as usize] += k;
        }
        let max_diag = sum.iter().cloned().fold(0.0, f64::max);
        let split = matches!(med.lambda, Lambda::Finite(_)) && coupling == Coupling::Picard;
        let layout = if split {
            let mut local = vec![0u32; n];
            let (mut pc, mut mc) = (Vec::new(), Vec::new());
            for (i, s) in mesh.side.iter().enumerate() {
                let v = if *s == Side::Plus { &mut pc } else { &mut mc };
                local[i] = v.len() as u32;
                v.push(i as u32);
            }
            let is_plus: Vec<bool> = mesh.side.iter().map(|s| *s == Side::Plus).collect();
            let is_minus: Vec<bool> = is_plus.iter().map(|b| !b).collect();
            let mut coupling = Vec::new();
            for (f, &k) in mesh.faces.iter().zip(&cond) {
                let (a, b) = (f.a as usize, f.b as usize);
                if is_plus[a] != is_plus[b] && k > 0.0 {
                    let (p, m) = if is_plus[a] { (a, b) } else { (b, a) };
                    coupling.push(CouplingFace {
                        plus: local[p],
                        minus: local[m],
                        cond: k,
                        len: f.len,
                    });
                }
            }
            Layout::Split {
                plus: build_block(pc, &local, &is_plus, mesh, &cond),
                minus: build_block(mc, &local, &is_minus, mesh, &cond),
                coupling,
            }
        } else {
            let local: Vec<u32> = (0..n as u32).collect();
            Layout::Single(build_block(
                local.clone(),
                &local,
                &vec![true; n],
                mesh,
                &cond,
            ))
        };
        Ok(Self {
            volume: mesh.volume,
            layout,
            picard,
            max_diag,
            u: u0,
            prev: None,
            scratch: CgScratch::default(),
        })
    }

    /// Largest dt for which the explicit half of Crank–Nicolson has nonnegative weights.
    pub fn positivity_dt(&self) -> f64 {
        if self.max_diag > 0.0 {
            2.0 * self.volume / self.max_diag
        } else {
            f64::INFINITY
        }
    }

    pub fn field(&self) -> &[f64] {
        &self.u
    }

    pub fn step(&mut self, dt: f64) -> Result<StepInfo> {
        let c = 0.5 * dt / self.volume;
        let guess: Vec<f64> = match &self.prev {
            Some((up, dtp)) => {
                let r = dt / dtp;
                self.u
                    .iter()
                    .zip(up)
                    .map(|(a, b)| a + r * (a - b))
                    .collect()
            }
            None => self.u.clone(),
        };
        let old = self.u.clone();
        let info = match &self.layout {
            Layout::Single(b) => {
                let mut rhs = vec![0.0; b.len()];
                b.explicit(c, &self.u, &mut rhs);
                let mut x = guess;
                b.solve(c, &rhs, &mut x, &mut self.scratch)?;
                check_finite(&x)?;
                self.u = x;
                StepInfo::default()
            }
            Layout::Split {
                plus,
                minus,
                coupling,
            } => {
                let iters = picard_step(
                    plus,
                    minus,
                    coupling,
                    c,
                    &self.picard,
                    &mut self.u,
                    &guess,
                    &mut self.scratch,
                )?;
                StepInfo {
                    picard_iters: Some(iters),
                }
            }
        };
        self.prev = Some((old, dt));
        Ok(info)
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            context: "Crank–Nicolson step",
            at: i as f64,
        }),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn picard_step(
    plus: &Block,
    minus: &Block,
    coupling: &[CouplingFace],
    c: f64,
    opts: &PicardOptions,
    u: &mut [f64],
    guess: &[f64],
    scratch: &mut CgScratch,
) -> Result<usize> {
    let gather =
        |b: &Block, v: &[f64]| b.cells.iter().map(|&g| v[g as usize]).collect::<Vec<f64>>();
    let (xp0, xm0) = (gather(plus, u), gather(minus, u));
    let mut rhs_p = vec![0.0; plus.len()];
    let mut rhs_m = vec![0.0; minus.len()];
    plus.explicit(c, &xp0, &mut rhs_p);
    minus.explicit(c, &xm0, &mut rhs_m);
    // old-time half of the coupling flux
    for f in coupling {
        rhs_p[f.plus as usize] += c * f.cond * xm0[f.minus as usize];
        rhs_m[f.minus as usize] += c * f.cond * xp0[f.plus as usize];
    }
    let mut xp = gather(plus, guess);
    let mut xm = gather(minus, guess);
    let mut trace: Vec<f64> = coupling.iter().map(|f| xm[f.minus as usize]).collect();
    let mut omega = opts.relaxation;
    let mut prev_r: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    let mut bp = vec![0.0; plus.len()];
    let mut bm = vec![0.0; minus.len()];
    for it in 1..=opts.max_iter {
        bp.copy_from_slice(&rhs_p);
        for (f, g) in coupling.iter().zip(&trace) {
            bp[f.plus as usize] += c * f.cond * g;
        }
        plus.solve(c, &bp, &mut xp, scratch)?;
        bm.copy_from_slice(&rhs_m);
        for f in coupling {
            bm[f.minus as usize] += c * f.cond * xp[f.plus as usize];
        }
        minus.solve(c, &bm, &mut xm, scratch)?;
        let r: Vec<f64> = coupling
            .iter()
            .zip(&trace)
            .map(|(f, g)| xm[f.minus as usize] - g)
            .collect();
        let res = coupling
            .iter()
            .zip(&r)
            .map(|(f, d)| f.len * d * d)
            .sum::<f64>()
            .sqrt();
        history.push(res);
        if !res.is_finite() {
            break;
        }
        if res < opts.tol {
            check_finite(&xp)?;
            check_finite(&xm)?;
            for (i, &g) in plus.cells.iter().enumerate() {
                u[g as usize] = xp[i];
            }
            for (i, &g) in minus.cells.iter().enumerate() {
                u[g as usize] = xm[i];
            }
            return Ok(it);
        }
        if let Some(pr) = &prev_r {
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in pr.iter().zip(&r) {
                let d = b - a;
                num += a * d;
                den += d * d;
            }
            if den > 0.0 {
                omega = (-omega * num / den).clamp(0.05, 1.5);
            }
        }
        for (g, d) in trace.iter_mut().zip(&r) {
            *g += omega * d;
        }
        prev_r = Some(r);
    }
    Err(Error::PicardDivergence {
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
        trace: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, split_at: usize) -> Mesh {
        let h = 1.0 / n as f64;
        Mesh {
            volume: h,
            side: (0..n)
                .map(|i| {
                    if i >= split_at {
                        Side::Plus
                    } else {
                        Side::Minus
                    }
                })
                .collect(),
            faces: (0..n - 1)
                .map(|i| Face {
                    a: i as u32,
                    b: i as u32 + 1,
                    len: 1.0,
                    dist: h,
                })
                .collect(),
        }
    }

    #[test]
    fn picard_reaches_the_monolithic_solution() {
        let mesh = chain(200, 100);
        let med = Medium::new(0.3, 2.0, Lambda::Finite(5.0)).unwrap();
        let u0: Vec<f64> = mesh
            .side
            .iter()
            .map(|s| if *s == Side::Plus { 1.0 } else { 0.0 })
            .collect();
        let mut a = Stepper::new(
            &mesh,
            &med,
            Coupling::Picard,
            PicardOptions::default(),
            u0.clone(),
        )
        .unwrap();
        let mut b = Stepper::new(
            &mesh,
            &med,
            Coupling::Monolithic,
            PicardOptions::default(),
            u0,
        )
        .unwrap();
        let dt = a.positivity_dt();
        for _ in 0..50 {
            let info = a.step(dt).unwrap();
            assert!(info.picard_iters.unwrap() < 50);
            b.step(dt).unwrap();
        }
        let err = a
            .field()
            .iter()
            .zip(b.field())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
        let mass: f64 = a.field().iter().sum::<f64>() / 200.0;
        assert!((mass - 0.5).abs() < 1e-10);
    }

    #[test]
    fn picard_failure_reports_trace() {
        let mesh = chain(50, 25);
        let med = Medium::new(1.0, 1.0, Lambda::Finite(1e3)).unwrap();
        let u0: Vec<f64> = mesh
            .side
            .iter()
            .map(|s| if *s == Side::Plus { 1.0 } else { 0.0 })
            .collect();
        let opts = PicardOptions {
            tol: 1e-30,
            max_iter: 3,
            relaxation: 0.7,
        };
        let mut s = Stepper::new(&mesh, &med, Coupling::Picard, opts, u0).unwrap();
        match s.step(1e-3) {
            Err(Error::PicardDivergence {
                iterations, trace, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
