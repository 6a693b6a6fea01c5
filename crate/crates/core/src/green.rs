//! Closed-form half-line transmission heat kernels.
//!
//! The normal coordinate `s` is positive in Ω₊ and negative in Ω₋; the source point
//! `s1` always lies in Ω₊. Every exponential-times-erfc product goes through
//! [`erfcx`](crate::specfun::erfcx) so large `λ√t` never overflows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::erfcx;

/// Smallest admissible time. Values below ~1e-12 are accepted but lose physical meaning.
pub const T_MIN: f64 = 1e-300;

/// Interface resistivity coefficient λ in the Robin transmission condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda {
    /// Insulating wall: ∂ₛu₊ = 0, no exchange.
    Zero,
    Finite(f64),
    /// Perfect contact: continuous value and flux.
    Infinite,
}

impl Lambda {
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() || v < 0.0 {
            Err(Error::domain(
                "Lambda",
                format!("λ must be in [0, ∞], got {v}"),
            ))
        } else if v == 0.0 {
            Ok(Lambda::Zero)
        } else if v.is_infinite() {
            Ok(Lambda::Infinite)
        } else {
            Ok(Lambda::Finite(v))
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Lambda::Zero => 0.0,
            Lambda::Finite(l) => l,
            Lambda::Infinite => f64::INFINITY,
        }
    }

    fn name(&self) -> String {
        match self {
            Lambda::Zero => "zero".into(),
            Lambda::Finite(l) => format!("finite({l})"),
            Lambda::Infinite => "infinite".into(),
        }
    }
}

/// Two-media pair (D₊ inside Ω, D₋ outside) with the interface coefficient λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub d_plus: f64,
    pub d_minus: f64,
    pub lambda: Lambda,
}

impl Medium {
    pub fn new(d_plus: f64, d_minus: f64, lambda: Lambda) -> Result<Self> {
        if !(d_plus > 0.0 && d_plus.is_finite()) || !(d_minus > 0.0 && d_minus.is_finite()) {
            return Err(Error::domain(
                "Medium",
                format!("diffusivities must be positive, got D+={d_plus}, D-={d_minus}"),
            ));
        }
        if let Lambda::Finite(l) = lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::domain(
                    "Medium",
                    format!("finite λ must be positive, got {l}"),
                ));
            }
        }
        Ok(Self {
            d_plus,
            d_minus,
            lambda,
        })
    }

    pub fn with_lambda(&self, lambda: Lambda) -> Result<Self> {
        Self::new(self.d_plus, self.d_minus, lambda)
    }

    /// A = (√D₊ − √D₋)/(√D₊ + √D₋).
    pub fn a(&self) -> f64 {
        let (p, m) = (self.d_plus.sqrt(), self.d_minus.sqrt());
        (p - m) / (p + m)
    }

    /// B = √D₊/(√D₊ + √D₋).
    pub fn b(&self) -> f64 {
        let (p, m) = (self.d_plus.sqrt(), self.d_minus.sqrt());
        p / (p + m)
    }

    /// α = 1/√D₋ + 1/√D₊.
    pub fn alpha(&self) -> f64 {
        1.0 / self.d_minus.sqrt() + 1.0 / self.d_plus.sqrt()
    }

    /// Image coefficient of the parametrix: 1 for finite λ, A for λ = ∞.
    pub fn selector_a(&self) -> Result<f64> {
        match self.lambda {
            Lambda::Finite(_) => Ok(1.0),
            Lambda::Infinite => Ok(self.a()),
            Lambda::Zero => Err(regime("selector_a", "finite or infinite", self.lambda)),
        }
    }

    /// Weight of the Robin correction: 1 for finite λ, 0 for λ = ∞.
    pub fn selector_b(&self) -> Result<f64> {
        match self.lambda {
            Lambda::Finite(_) => Ok(1.0),
            Lambda::Infinite => Ok(0.0),
            Lambda::Zero => Err(regime("selector_b", "finite or infinite", self.lambda)),
        }
    }
}

fn regime(func: &'static str, expected: &'static str, got: Lambda) -> Error {
    Error::Regime {
        func,
        expected,
        got: got.name(),
    }
}

fn check_t(func: &'static str, t: f64) -> Result<()> {
    if t.is_nan() || t < T_MIN {
        return Err(Error::domain(
            func,
            format!("time must be ≥ {T_MIN:e}, got {t}"),
        ));
    }
    Ok(())
}

fn check_plus(func: &'static str, s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(
            func,
            format!("point must lie in Ω₊ (s ≥ 0), got {s}"),
        ));
    }
    Ok(())
}

fn check_minus(func: &'static str, s: f64) -> Result<()> {
    if s.is_nan() || s > 0.0 {
        return Err(Error::domain(
            func,
            format!("point must lie in Ω₋ (s ≤ 0), got {s}"),
        ));
    }
    Ok(())
}

fn gauss(x: f64, dt: f64) -> f64 {
    (-x * x / (4.0 * dt)).exp() / (4.0 * PI * dt).sqrt()
}

/// Γ₊₊ for perfect contact (λ = ∞), both points in Ω₊.
pub fn gamma_pp(med: &Medium, s: f64, s1: f64, t: f64) -> Result<f64> {
    gamma_reg_pp(med, 0.0, s, s1, t).map_err(|e| rename(e, "gamma_pp"))
}

/// Γ₋₊ for perfect contact, evaluation point in Ω₋ and source in Ω₊.
pub fn gamma_mp(med: &Medium, s: f64, s1: f64, t: f64) -> Result<f64> {
    gamma_reg_mp(med, 0.0, s, s1, t).map_err(|e| rename(e, "gamma_mp"))
}

fn rename(e: Error, func: &'static str) -> Error {
    match e {
        Error::Regime { expected, got, .. } => Error::Regime {
            func,
            expected,
            got,
        },
        Error::Domain { msg, .. } => Error::Domain { func, msg },
        other => other,
    }
}

/// Drift kernel Γ^reg for λ = ∞ and normal curvature sum `k`, dispatching on the sign of `s`.
///
/// In Ω₊ it solves ∂ₜu − D₊∂²ₛu + D₊k∂ₛu = 0; in Ω₋ the same with D₋. The Ω₊ branch is the
/// image sum with both arguments shifted by tD₊k. The Ω₋ branch is Γ₋₊ with its argument
/// shifted by tD₋k: it reduces to Γ₋₊ at k = 0 and matches the interface exactly when
/// D₊ = D₋. For D₊ ≠ D₋ the interface residual is O(k√t).
pub fn gamma_reg(med: &Medium, k: f64, s: f64, s1: f64, t: f64) -> Result<f64> {
    if s.is_sign_positive() {
        gamma_reg_pp(med, k, s, s1, t)
    } else {
        gamma_reg_mp(med, k, s, s1, t)
    }
}

pub fn gamma_reg_pp(med: &Medium, k: f64, s: f64, s1: f64, t: f64) -> Result<f64> {
    if med.lambda != Lambda::Infinite {
        return Err(regime("gamma_reg", "infinite", med.lambda));
    }
    check_t("gamma_reg", t)?;
    check_plus("gamma_reg", s)?;
    check_plus("gamma_reg", s1)?;
    let dt = med.d_plus * t;
    let shift = t * med.d_plus * k;
    Ok(gauss(s - s1 - shift, dt) + med.a() * gauss(s + s1 - shift, dt))
}

pub fn gamma_reg_mp(med: &Medium, k: f64, s: f64, s1: f64, t: f64) -> Result<f64> {
    if med.lambda != Lambda::Infinite {
        return Err(regime("gamma_reg", "infinite", med.lambda));
    }
    check_t("gamma_reg", t)?;
    check_minus("gamma_reg", s)?;
    check_plus("gamma_reg", s1)?;
    let x = s - s1 * (med.d_minus / med.d_plus).sqrt() - t * med.d_minus * k;
    Ok(med.b() / (PI * med.d_plus * t).sqrt() * (-x * x / (4.0 * med.d_minus * t)).exp())
}

fn finite_lambda(func: &'static str, med: &Medium) -> Result<f64> {
    match med.lambda {
        Lambda::Finite(l) => Ok(l),
        other => Err(regime(func, "finite", other)),
    }
}

/// Robin correction (λ/D₊)·exp(λα·x/√D₊ + λ²α²t)·erfc(x/(2√(D₊t)) + λα√t), evaluated
/// as (λ/D₊)·exp(−x²/(4D₊t))·erfcx(·).
fn robin_tail(lambda: f64, alpha: f64, d_plus: f64, x: f64, t: f64) -> f64 {
    let kk = lambda * alpha;
    let z = x / (2.0 * (d_plus * t).sqrt()) + kk * t.sqrt();
    lambda / d_plus * (-x * x / (4.0 * d_plus * t)).exp() * crate::specfun::erfcx_unchecked(z)
}

/// G₊₊ for finite resistivity: Neumann image sum minus the Robin correction.
pub fn g_pp_finite(med: &Medium, s: f64, s1: f64, t: f64) -> Result<f64> {
    let l = finite_lambda("g_pp_finite", med)?;
    check_t("g_pp_finite", t)?;
    check_plus("g_pp_finite", s)?;
    check_plus("g_pp_finite", s1)?;
    let dt = med.d_plus * t;
    let v =
        gauss(s - s1, dt) + gauss(s + s1, dt) - robin_tail(l, med.alpha(), med.d_plus, s + s1, t);
    finite("g_pp_finite", v, t)
}

/// G₋₊ for finite resistivity.
pub fn g_mp_finite(med: &Medium, s: f64, s1: f64, t: f64) -> Result<f64> {
    let l = finite_lambda("g_mp_finite", med)?;
    check_t("g_mp_finite", t)?;
    check_minus("g_mp_finite", s)?;
    check_plus("g_mp_finite", s1)?;
    let kk = l * med.alpha();
    let w = s1 / med.d_plus.sqrt() - s / med.d_minus.sqrt();
    let z = w / (2.0 * t.sqrt()) + kk * t.sqrt();
    let v = l / (med.d_minus * med.d_plus).sqrt() * (-w * w / (4.0 * t)).exp() * erfcx(z)?;
    finite("g_mp_finite", v, t)
}

fn finite(context: &'static str, v: f64, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { context, at })
    }
}

/// One-dimensional transmission kernel for any λ regime, with `s` on either side
/// (`-0.0` selects Ω₋, `+0.0` selects Ω₊).
/// λ = 0 gives the Neumann image kernel in Ω₊ and zero in Ω₋.
pub fn kernel_1d(med: &Medium, s: f64, s1: f64, t: f64) -> Result<f64> {
    match med.lambda {
        Lambda::Infinite => gamma_reg(med, 0.0, s, s1, t),
        Lambda::Finite(_) => {
            if s.is_sign_positive() {
                g_pp_finite(med, s, s1, t)
            } else {
                g_mp_finite(med, s, s1, t)
            }
        }
        Lambda::Zero => {
            check_t("kernel_1d", t)?;
            check_plus("kernel_1d", s1)?;
            if s.is_sign_positive() {
                let dt = med.d_plus * t;
                Ok(gauss(s - s1, dt) + gauss(s + s1, dt))
            } else {
                Ok(0.0)
            }
        }
    }
}

/// Parametrix Gaussian block h₊ with an optional drift `gamma` (sum of principal
/// curvatures at the frozen boundary point; 0 for the flat case).
pub fn h_plus(med: &Medium, s1: f64, s2: f64, t: f64, gamma: f64) -> Result<f64> {
    let a = med.selector_a().map_err(|e| rename(e, "h_plus"))?;
    check_t("h_plus", t)?;
    let dt = med.d_plus * t;
    let shift = t * med.d_plus * gamma;
    Ok(gauss(s1 - s2 - shift, dt) + a * gauss(s1 + s2 - shift, dt))
}

/// Parametrix Robin block f₊ (identically zero for λ = ∞), optionally drift-shifted.
pub fn f_plus(med: &Medium, s1: f64, s2: f64, t: f64, gamma: f64) -> Result<f64> {
    let b = med.selector_b().map_err(|e| rename(e, "f_plus"))?;
    check_t("f_plus", t)?;
    if b == 0.0 {
        return Ok(0.0);
    }
    let l = med.lambda.value();
    let x = s1 + s2 - t * med.d_plus * gamma;
    finite(
        "f_plus",
        b * robin_tail(l, med.alpha(), med.d_plus, x, t),
        t,
    )
}

/// n-D product kernel: the 1-D transmission kernel in the normal coordinate `x[0]`
/// times the free Gaussian in the tangential coordinates, with D₊ or D₋ according to
/// the side of the evaluation point.
pub fn kernel_nd(med: &Medium, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::domain(
            "kernel_nd",
            format!("dimension mismatch: {} vs {}", x.len(), y.len()),
        ));
    }
    let normal = kernel_1d(med, x[0], y[0], t)?;
    let d = if x[0].is_sign_positive() {
        med.d_plus
    } else {
        med.d_minus
    };
    let r2: f64 = x[1..]
        .iter()
        .zip(&y[1..])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let m = (x.len() - 1) as f64;
    Ok(normal * (-r2 / (4.0 * d * t)).exp() / (4.0 * PI * d * t).powf(0.5 * m))
}
