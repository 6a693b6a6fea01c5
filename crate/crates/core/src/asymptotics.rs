//! Short-time heat-content laws N(t) built from the boundary sausage μ(∂Ω, ·).
//!
//! Every formula takes an [`AsymptoticModel`]: the medium, a source for μ, the boundary
//! measure and a list of boundary segments carrying λ, arc-length weight and optional
//! mean curvature. Boundary integrals ∫_{∂Ω}·dσ are the weighted sums over segments.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{Lambda, Medium};
use crate::sausage::{SausageProfile, SausageTable};
use crate::series::{HeatContentSeries, Provenance};
use crate::specfun::{beta_coefficient, erfcx, QuadratureRule, DEFAULT_ORDER};

/// C₀ = 1 + (3/2)erf(1) − (9/4)erf(2) + (e⁻¹ − e⁻⁴)/√π ≈ 0.2218.
pub fn c0() -> f64 {
    1.0 + 1.5 * libm::erf(1.0) - 2.25 * libm::erf(2.0)
        + ((-1.0f64).exp() - (-4.0f64).exp()) / PI.sqrt()
}

/// C₁ = 1/√π − 6 + (5e⁻⁴ − 4e⁻¹)/√π − 5erf(1) + 11erf(2) ≈ 0.5207.
pub fn c1() -> f64 {
    1.0 / PI.sqrt() - 6.0 + (5.0 * (-4.0f64).exp() - 4.0 * (-1.0f64).exp()) / PI.sqrt()
        - 5.0 * libm::erf(1.0)
        + 11.0 * libm::erf(2.0)
}

/// f(σ, z, t) = exp(2λα√t·z + λ²α²t)·erfc(z + λα√t), evaluated as e^{−z²}·erfcx(z + λα√t).
pub fn f_sigma(lambda: f64, med: &Medium, z: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(
            "f_sigma",
            format!("t must be positive, got {t}"),
        ));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(
            "f_sigma",
            format!("λ must be finite and nonnegative, got {lambda}"),
        ));
    }
    let k = lambda * med.alpha() * t.sqrt();
    let v = (-z * z).exp() * erfcx(z + k)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            context: "f_sigma",
            at: z,
        })
    }
}

/// Identifiers of the implemented short-time laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// D₊ = D₋: Gaussian-weighted sausage integral.
    EqualDiffusionFull,
    /// D₊ = D₋: β_{n−d}·μ(2√(Dt)).
    EqualDiffusionLeading,
    /// General boundary, finite λ: three-integral form.
    FiniteFull,
    /// General boundary, finite λ: power-law weights z^{n−d}.
    FiniteLeading,
    /// General boundary, λ = ∞: weighted sausage integral.
    InfiniteFull,
    /// General boundary, λ = ∞: β_{n−d}·μ(√(4D₊t)).
    InfiniteLeading,
    /// Smooth boundary, λ = ∞: √t law.
    RegularInfinite,
    /// Smooth boundary, finite λ: t and t^{3/2} terms.
    RegularFinite,
    /// Leading law with μ(ε) replaced by c·ε^{n−d}.
    DeGennes,
}

impl Formula {
    pub const ALL: [Formula; 9] = [
        Formula::EqualDiffusionFull,
        Formula::EqualDiffusionLeading,
        Formula::FiniteFull,
        Formula::FiniteLeading,
        Formula::InfiniteFull,
        Formula::InfiniteLeading,
        Formula::RegularInfinite,
        Formula::RegularFinite,
        Formula::DeGennes,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Formula::EqualDiffusionFull => "equal-diffusion-full",
            Formula::EqualDiffusionLeading => "equal-diffusion-leading",
            Formula::FiniteFull => "finite-full",
            Formula::FiniteLeading => "finite-leading",
            Formula::InfiniteFull => "infinite-full",
            Formula::InfiniteLeading => "infinite-leading",
            Formula::RegularInfinite => "regular-infinite",
            Formula::RegularFinite => "regular-finite",
            Formula::DeGennes => "de-gennes",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.id() == id)
            .ok_or_else(|| Error::Config(format!("unknown formula id '{id}'")))
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Formula::EqualDiffusionFull | Formula::FiniteFull | Formula::InfiniteFull => {
                Provenance::AsymptoticFull
            }
            _ => Provenance::AsymptoticLeading,
        }
    }
}

/// Where μ(∂Ω, ε) comes from.
#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum MuSource {
    Sausage(SausageProfile),
    /// μ(ε) = c·ε^exponent.
    PowerLaw {
        c: f64,
        exponent: f64,
    },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MuSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuSource::Sausage(p) => write!(f, "Sausage({})", p.mode().label()),
            MuSource::PowerLaw { c, exponent } => write!(f, "PowerLaw({c}·ε^{exponent})"),
            MuSource::Function(_) => write!(f, "Function"),
        }
    }
}

enum MuEval<'a> {
    Table(SausageTable),
    PowerLaw { c: f64, exponent: f64 },
    Function(&'a (dyn Fn(f64) -> f64 + Send + Sync)),
}

impl MuEval<'_> {
    fn at(&self, w: f64) -> Result<f64> {
        match self {
            MuEval::Table(t) => t.value(w),
            MuEval::PowerLaw { c, exponent } => {
                Ok(if w > 0.0 { c * w.powf(*exponent) } else { 0.0 })
            }
            MuEval::Function(f) => Ok(f(w)),
        }
    }
}

/// A piece of ∂Ω with constant λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub lambda: Lambda,
    /// arc length of the piece
    pub weight: f64,
    /// mean curvature H, positive for convex pieces
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticModel {
    pub medium: Medium,
    mu: MuSource,
    boundary_measure: f64,
    dimension: u32,
    hausdorff_dim: f64,
    segments: Vec<BoundarySegment>,
    smooth: bool,
    inradius: Option<f64>,
}

impl AsymptoticModel {
    /// Model over a whole domain with one boundary segment carrying the medium's λ.
    pub fn from_sausage(medium: Medium, sausage: SausageProfile) -> Self {
        let g = sausage.geometry();
        let seg = BoundarySegment {
            lambda: medium.lambda,
            weight: g.perimeter(),
            curvature: g.mean_curvature(),
        };
        Self {
            medium,
            boundary_measure: g.perimeter(),
            dimension: 2,
            hausdorff_dim: 1.0,
            segments: vec![seg],
            smooth: g.is_smooth(),
            inradius: Some(g.inradius()),
            mu: MuSource::Sausage(sausage),
        }
    }

    /// Model for a boundary part described only by its sausage function and measure.
    pub fn from_mu_function(
        medium: Medium,
        boundary_measure: f64,
        mu: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(boundary_measure > 0.0) {
            return Err(Error::domain(
                "AsymptoticModel",
                "boundary measure must be positive",
            ));
        }
        Ok(Self {
            medium,
            boundary_measure,
            dimension: 2,
            hausdorff_dim: 1.0,
            segments: vec![BoundarySegment {
                lambda: medium.lambda,
                weight: boundary_measure,
                curvature: None,
            }],
            smooth: false,
            inradius: None,
            mu: MuSource::Function(Arc::new(mu)),
        })
    }

    /// Replace the λ/curvature field. Weights must sum to the boundary measure.
    pub fn with_segments(mut self, segments: Vec<BoundarySegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::domain(
                "AsymptoticModel",
                "at least one boundary segment is required",
            ));
        }
        let total: f64 = segments.iter().map(|s| s.weight).sum();
        if segments.iter().any(|s| !(s.weight >= 0.0))
            || (total - self.boundary_measure).abs() > 1e-9 * self.boundary_measure
        {
            return Err(Error::domain(
                "AsymptoticModel",
                format!(
                    "segment weights sum to {total}, boundary measure is {}",
                    self.boundary_measure
                ),
            ));
        }
        for s in &segments {
            Lambda::from_f64(s.lambda.value())?;
        }
        self.segments = segments;
        Ok(self)
    }

    /// Spatial dimension n and Hausdorff dimension d of ∂Ω, with d ∈ (n−2, n].
    pub fn with_dimensions(mut self, n: u32, d: f64) -> Result<Self> {
        if n < 2 || !(d > n as f64 - 2.0 && d <= n as f64) {
            return Err(Error::domain(
                "AsymptoticModel",
                format!("need n ≥ 2 and d ∈ (n−2, n], got n={n}, d={d}"),
            ));
        }
        self.dimension = n;
        self.hausdorff_dim = d;
        Ok(self)
    }

    /// Declare the boundary regular enough for the smooth-boundary laws.
    pub fn assume_regular(mut self) -> Self {
        self.smooth = true;
        self
    }

    /// Fractal sausage approximation μ(ε) ≈ c·ε^{n−d} with the given Hausdorff dimension.
    pub fn de_gennes(&self, c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain(
                "de_gennes",
                format!("prefactor must be positive, got {c}"),
            ));
        }
        let mut m = self.clone().with_dimensions(self.dimension, d)?;
        m.mu = MuSource::PowerLaw {
            c,
            exponent: m.dimension as f64 - d,
        };
        Ok(m)
    }

    pub fn boundary_measure(&self) -> f64 {
        self.boundary_measure
    }
    pub fn dimension(&self) -> u32 {
        self.dimension
    }
    pub fn hausdorff_dim(&self) -> f64 {
        self.hausdorff_dim
    }
    pub fn segments(&self) -> &[BoundarySegment] {
        &self.segments
    }
    pub fn is_regular(&self) -> bool {
        self.smooth
    }

    fn mu_eval(&self, max_width: f64) -> Result<MuEval<'_>> {
        Ok(match &self.mu {
            MuSource::Sausage(p) => MuEval::Table(p.table(max_width)?),
            MuSource::PowerLaw { c, exponent } => MuEval::PowerLaw {
                c: *c,
                exponent: *exponent,
            },
            MuSource::Function(f) => MuEval::Function(f.as_ref()),
        })
    }

    fn guard(&self, func: &str, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(
                "asymptotics",
                format!("t must be a nonnegative real, got {t}"),
            ));
        }
        if let Some(r) = self.inradius {
            let w = (4.0 * self.medium.d_plus * t).sqrt();
            if w > 0.25 * r {
                warn!("{func}: diffusion length {w:.3e} exceeds a quarter of the inradius {r:.3e}; expansion is outside its validity window");
            }
        }
        Ok(())
    }

    fn sqrt4dt(&self, t: f64) -> f64 {
        (4.0 * self.medium.d_plus * t).sqrt()
    }

    fn require_infinite(&self, func: &'static str) -> Result<()> {
        if self.medium.lambda != Lambda::Infinite
            || self.segments.iter().any(|s| s.lambda != Lambda::Infinite)
        {
            return Err(Error::Regime {
                func,
                expected: "infinite",
                got: format!("{:?}", self.medium.lambda),
            });
        }
        Ok(())
    }

    /// (λ_i, w_i) of contributing finite segments; λ = 0 pieces are dropped, λ = ∞ rejected.
    fn finite_segments(&self, func: &'static str) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s.lambda {
                Lambda::Zero => {}
                Lambda::Finite(l) => out.push((l, s.weight)),
                Lambda::Infinite => {
                    return Err(Error::Regime {
                        func,
                        expected: "finite or zero",
                        got: "infinite".into(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// ∫_{∂Ω} λ(σ) f(σ, z, t) dσ.
    fn lambda_f(&self, segs: &[(f64, f64)], z: f64, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(l, w) in segs {
            acc += w * l * f_sigma(l, &self.medium, z, t)?;
        }
        Ok(acc)
    }

    fn max_width(&self, t: f64) -> f64 {
        2.0 * self.sqrt4dt(t)
    }

    fn eval_with(&self, formula: Formula, t: f64, mu: &MuEval<'_>) -> Result<f64> {
        if t == 0.0 {
            self.guard(formula.id(), t)?;
            return Ok(0.0);
        }
        match formula {
            Formula::EqualDiffusionFull => self.equal_diffusion(t, mu, false),
            Formula::EqualDiffusionLeading => self.equal_diffusion(t, mu, true),
            Formula::FiniteFull => self.finite(t, mu, false),
            Formula::FiniteLeading => self.finite(t, mu, true),
            Formula::InfiniteFull => self.infinite(t, mu, false),
            Formula::InfiniteLeading => self.infinite(t, mu, true),
            Formula::RegularInfinite => self.regular_infinite(t),
            Formula::RegularFinite => self.regular_finite(t),
            Formula::DeGennes => match self.mu {
                MuSource::PowerLaw { .. } => match self.medium.lambda {
                    Lambda::Infinite => self.infinite(t, mu, true),
                    Lambda::Finite(_) => self.finite(t, mu, true),
                    Lambda::Zero => Ok(0.0),
                },
                _ => Err(Error::Config(
                    "de Gennes evaluation needs a model built with `de_gennes`".into(),
                )),
            },
        }
    }

    fn equal_diffusion(&self, t: f64, mu: &MuEval<'_>, leading: bool) -> Result<f64> {
        let m = &self.medium;
        if (m.d_plus - m.d_minus).abs() > 1e-12 * m.d_plus.max(m.d_minus) {
            return Err(Error::domain(
                "n_equal_diffusion",
                format!("needs D+ = D-, got {} and {}", m.d_plus, m.d_minus),
            ));
        }
        self.require_infinite("n_equal_diffusion")?;
        self.guard("n_equal_diffusion", t)?;
        let eps = 2.0 * (m.d_plus * t).sqrt();
        if leading {
            let beta = beta_coefficient(self.dimension as f64 - self.hausdorff_dim)?;
            return Ok(beta * mu.at(eps)?);
        }
        gaussian_sausage_integral(eps, mu)
    }

    fn infinite(&self, t: f64, mu: &MuEval<'_>, leading: bool) -> Result<f64> {
        self.require_infinite("n_infinite_lambda")?;
        self.guard("n_infinite_lambda", t)?;
        let (p, q) = (self.medium.d_plus.sqrt(), self.medium.d_minus.sqrt());
        let pref = 2.0 * q / (q + p);
        let eps = self.sqrt4dt(t);
        if leading {
            let beta = beta_coefficient(self.dimension as f64 - self.hausdorff_dim)?;
            return Ok(pref * beta * mu.at(eps)?);
        }
        Ok(pref * gaussian_sausage_integral(eps, mu)?)
    }

    fn finite(&self, t: f64, mu: &MuEval<'_>, leading: bool) -> Result<f64> {
        let segs = self.finite_segments("n_finite_lambda")?;
        self.guard("n_finite_lambda", t)?;
        if segs.is_empty() {
            return Ok(0.0);
        }
        let eps = self.sqrt4dt(t);
        let x = self.dimension as f64 - self.hausdorff_dim;
        let lo = QuadratureRule::gauss_legendre(DEFAULT_ORDER, 0.0, 1.0)?;
        let hi = QuadratureRule::gauss_legendre(DEFAULT_ORDER, 1.0, 2.0)?;
        let mu_eps = mu.at(eps)?;
        let mut outer = 0.0;
        let mut shifted = 0.0;
        for (&z, &w) in hi.nodes.iter().zip(&hi.weights) {
            let lf = self.lambda_f(&segs, z, t)?;
            outer += w * lf;
            let m = if leading {
                mu_eps * (z - 1.0).powf(x)
            } else {
                mu.at(eps * (z - 1.0))?
            };
            shifted += w * m * lf;
        }
        let mut inner = 0.0;
        for (&z, &w) in lo.nodes.iter().zip(&lo.weights) {
            let lf = self.lambda_f(&segs, z, t)?;
            let m = if leading {
                mu_eps * z.powf(x)
            } else {
                mu.at(eps * z)?
            };
            inner += w * m * lf;
        }
        let bracket = mu_eps * outer - shifted + inner;
        Ok(2.0 * t.sqrt() / (self.medium.d_plus.sqrt() * self.boundary_measure) * bracket)
    }

    fn regular_infinite(&self, t: f64) -> Result<f64> {
        self.require_infinite("n_regular_infinite")?;
        if !self.smooth {
            return Err(Error::domain(
                "n_regular_infinite",
                "model is not flagged as a regular boundary",
            ));
        }
        self.guard("n_regular_infinite", t)?;
        let (p, q) = (self.medium.d_plus.sqrt(), self.medium.d_minus.sqrt());
        Ok(2.0 * (1.0 - (-4.0f64).exp()) / PI.sqrt() * p * q / (p + q)
            * self.boundary_measure
            * t.sqrt())
    }

    fn regular_finite(&self, t: f64) -> Result<f64> {
        let _ = self.finite_segments("n_regular_finite")?;
        if !self.smooth {
            warn!("n_regular_finite: boundary is not flagged regular");
        }
        self.guard("n_regular_finite", t)?;
        let m = &self.medium;
        let (mut il, mut il2, mut ilh) = (0.0, 0.0, 0.0);
        for s in &self.segments {
            let l = s.lambda.value();
            if l == 0.0 {
                continue;
            }
            let h = s.curvature.ok_or_else(|| {
                Error::domain(
                    "n_regular_finite",
                    "curvature field missing on a finite-λ segment",
                )
            })?;
            il += s.weight * l;
            il2 += s.weight * l * l;
            ilh += s.weight * l * h;
        }
        let n1 = self.dimension as f64 - 1.0;
        Ok(4.0 * c0() * t * il
            - 2.0 / 3.0 * c1() * t.powf(1.5) * (2.0 * m.alpha() * il2 - m.d_plus.sqrt() * n1 * ilh))
    }

    /// Evaluate a formula at one time.
    pub fn evaluate(&self, formula: Formula, t: f64) -> Result<f64> {
        let mu = self.mu_eval(self.max_width(t.max(0.0)))?;
        self.eval_with(formula, t, &mu)
    }

    /// Evaluate a formula on a time grid, sharing one sausage table.
    pub fn series(&self, formula: Formula, times: &[f64]) -> Result<HeatContentSeries> {
        let tmax = times.iter().cloned().fold(0.0, f64::max);
        let mu = self.mu_eval(self.max_width(tmax))?;
        let mut s = HeatContentSeries::new(formula.id(), formula.provenance());
        for &t in times {
            s.push_tn(t, self.eval_with(formula, t, &mu)?)?;
        }
        Ok(s)
    }
}

/// ∫₀² (e^{−z²}/√π)·μ(ε z) dz.
fn gaussian_sausage_integral(eps: f64, mu: &MuEval<'_>) -> Result<f64> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_ORDER, 0.0, 2.0)?;
    let mut acc = 0.0;
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * (-z * z).exp() / PI.sqrt() * mu.at(eps * z)?;
    }
    Ok(acc)
}

pub fn n_equal_diffusion(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::EqualDiffusionFull, t)
}
pub fn n_equal_diffusion_leading(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::EqualDiffusionLeading, t)
}
pub fn n_infinite_lambda(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::InfiniteFull, t)
}
pub fn n_infinite_lambda_leading(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::InfiniteLeading, t)
}
pub fn n_finite_lambda(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::FiniteFull, t)
}
pub fn n_finite_lambda_leading(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::FiniteLeading, t)
}
pub fn n_regular_infinite(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::RegularInfinite, t)
}
pub fn n_regular_finite(model: &AsymptoticModel, t: f64) -> Result<f64> {
    model.evaluate(Formula::RegularFinite, t)
}

/// One boundary part with the ids of the boundary pieces it covers.
#[derive(Debug, Clone)]
pub struct BoundaryPart {
    pub pieces: Vec<usize>,
    pub model: AsymptoticModel,
}

/// Sum of per-part heat contents; λ = 0 parts contribute nothing.
pub fn n_mixed(parts: &[BoundaryPart], t: f64) -> Result<f64> {
    let mut seen = std::collections::HashSet::new();
    for p in parts {
        for &id in &p.pieces {
            if !seen.insert(id) {
                return Err(Error::domain(
                    "n_mixed",
                    format!("boundary piece {id} belongs to more than one part"),
                ));
            }
        }
    }
    let mut total = 0.0;
    for p in parts {
        total += match p.model.medium.lambda {
            Lambda::Zero => 0.0,
            Lambda::Infinite => n_infinite_lambda(&p.model, t)?,
            Lambda::Finite(_) => n_finite_lambda(&p.model, t)?,
        };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_closed_forms() {
        assert!((c0() - 0.2218).abs() < 1e-4);
        assert!((c1() - 0.5207).abs() < 1e-4);
    }

    #[test]
    fn formula_ids_round_trip() {
        for f in Formula::ALL {
            assert_eq!(Formula::from_id(f.id()).unwrap(), f);
        }
        assert!(Formula::from_id("nope").is_err());
    }

    #[test]
    fn f_sigma_degenerate_limits() {
        let m = Medium::new(1.0, 1.0, Lambda::Finite(1.0)).unwrap();
        for &z in &[0.0, 0.5, 1.5] {
            let e = libm::erfc(z);
            assert!((f_sigma(0.0, &m, z, 0.3).unwrap() - e).abs() < 1e-15);
            assert!((f_sigma(2.0, &m, z, 1e-20).unwrap() - e).abs() < 1e-9);
        }
        assert!(f_sigma(1.0, &m, 0.5, 0.0).is_err());
        // large λ√t stays finite
        assert!(f_sigma(1e6, &m, 1.0, 10.0).unwrap().is_finite());
    }
}
