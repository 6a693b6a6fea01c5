//! Special functions and fixed-order quadrature.
//!
//! `erf`/`erfc` are backed by `libm` (a port of the musl/FreeBSD routines, accurate to
//! about one ulp). `erfcx`, the lower incomplete gamma function and the Gauss–Legendre
//! rules are implemented here.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Error function.
pub fn erf(x: f64) -> Result<f64> {
    finite_arg("erf", x)?;
    Ok(libm::erf(x))
}

/// Complementary error function `1 - erf(x)`, accurate in the tail.
pub fn erfc(x: f64) -> Result<f64> {
    finite_arg("erfc", x)?;
    Ok(libm::erfc(x))
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Never overflows for `x >= 0`. For large negative `x` the result is `+inf`, like
/// `2·exp(x²)` itself.
pub fn erfcx(x: f64) -> Result<f64> {
    finite_arg("erfcx", x)?;
    Ok(erfcx_unchecked(x))
}

pub(crate) fn erfcx_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        // exp(x²)·(2 - erfc(-x))
        let e = exp_x2(x);
        return 2.0 * e - erfcx_unchecked(-x);
    }
    if x < 25.0 {
        exp_x2(x) * libm::erfc(x)
    } else {
        erfcx_continued_fraction(x)
    }
}

/// `exp(x²)` with the square split so that the rounding error of `x²` does not get
/// amplified by the exponential.
fn exp_x2(x: f64) -> f64 {
    let x = x.abs();
    // high part keeps 26 bits so hi*hi is exact
    let hi = f64::from_bits(x.to_bits() & 0xffff_ffff_f800_0000);
    let lo = x - hi;
    (hi * hi).exp() * (lo * (2.0 * hi + lo)).exp()
}

/// Laplace continued fraction `√π·exp(x²)·erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated bottom-up. Converges very fast for `x >= 25`.
fn erfcx_continued_fraction(x: f64) -> f64 {
    let mut tail = x;
    for k in (1..=40).rev() {
        tail = x + (k as f64 * 0.5) / tail;
    }
    FRAC_1_SQRT_PI / tail
}

/// Lower incomplete gamma function `γ(a, x) = ∫₀ˣ t^{a-1} e^{-t} dt`.
///
/// Series for `x < a + 1`, Legendre continued fraction (modified Lentz) otherwise.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(
            "lower_incomplete_gamma",
            format!("a must be positive, got {a}"),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(
            "lower_incomplete_gamma",
            format!("x must be nonnegative, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let gamma_a = libm::tgamma(a);
    if x.is_infinite() {
        return Ok(gamma_a);
    }
    let log_prefactor = a * x.ln() - x;
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..1000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok(sum * log_prefactor.exp())
    } else {
        // upper gamma Γ(a, x) by continued fraction, then subtract
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(gamma_a - log_prefactor.exp() * h)
    }
}

/// Gamma function.
pub fn gamma(a: f64) -> f64 {
    libm::tgamma(a)
}

/// `β_x = ∫₀² z^x e^{-z²}/√π dz = γ((x+1)/2, 4) / (2√π)`.
pub fn beta_coefficient(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "beta_coefficient",
            format!("exponent must be nonnegative, got {x}"),
        ));
    }
    Ok(lower_incomplete_gamma(0.5 * (x + 1.0), 4.0)? * 0.5 * FRAC_1_SQRT_PI)
}

/// A Gauss–Legendre rule mapped to `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// `order`-point Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("gauss_legendre", "order must be at least 1"));
        }
        if !(a.is_finite() && b.is_finite()) || !(b > a) {
            return Err(Error::domain(
                "gauss_legendre",
                format!("invalid interval [{a}, {b}]"),
            ));
        }
        let (x, w) = legendre_nodes(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(Self {
            nodes: x.iter().map(|&xi| mid + half * xi).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
            order,
        })
    }

    /// Default rule used by the heat-content formulas: 64 points.
    pub fn default_on(a: f64, b: f64) -> Result<Self> {
        Self::gauss_legendre(DEFAULT_ORDER, a, b)
    }

    /// `Σ wᵢ f(xᵢ)`; a non-finite sample is reported as an error.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "quadrature integrand",
                    at: x,
                });
            }
            sum += w * v;
        }
        Ok(sum)
    }
}

pub const DEFAULT_ORDER: usize = 64;

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn finite_arg(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() {
        Err(Error::domain(func, "NaN argument"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maclaurin_erf(x: f64, terms: usize) -> f64 {
        // erf(x) = 2/√π Σ (-1)^n x^{2n+1} / (n! (2n+1))
        let mut sum = 0.0;
        let mut pow = x;
        let mut fact = 1.0;
        for n in 0..terms {
            if n > 0 {
                fact *= n as f64;
                pow *= x * x;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pow / (fact * (2 * n + 1) as f64);
        }
        2.0 * FRAC_1_SQRT_PI * sum
    }

    /// Composite Simpson with heavy refinement; independent of the series/CF split.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn erf_basic_values() {
        assert_eq!(erf(0.0).unwrap(), 0.0);
        assert_eq!(erfc(0.0).unwrap(), 1.0);
        let series = maclaurin_erf(1.0, 30);
        assert!((series - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(1.0).unwrap() - series).abs() < 1e-14);
        for &x in &[0.1, 0.5, 1.5, 2.0, 2.5] {
            assert!(
                (erf(x).unwrap() - maclaurin_erf(x, 60)).abs() < 1e-14,
                "x={x}"
            );
        }
    }

    #[test]
    fn nan_is_rejected() {
        assert!(erf(f64::NAN).is_err());
        assert!(erfc(f64::NAN).is_err());
        assert!(erfcx(f64::NAN).is_err());
    }

    #[test]
    fn erfcx_large_arguments_do_not_overflow() {
        for &x in &[30.0, 100.0, 1e3, 1e4] {
            let v = erfcx(x).unwrap();
            assert!(v.is_finite() && v > 0.0);
            // asymptotic series 1/(x√π)(1 - 1/(2x²) + 3/(4x⁴) - 15/(8x⁶))
            let asym =
                FRAC_1_SQRT_PI / x * (1.0 - 0.5 / (x * x) + 0.75 / x.powi(4) - 1.875 / x.powi(6));
            assert!((v - asym).abs() / asym < 1e-10, "x={x}");
        }
        // continuity across the branch switch
        let below = exp_x2(24.999_999_999) * libm::erfc(24.999_999_999);
        let above = erfcx_continued_fraction(25.0);
        assert!((below - above).abs() / above < 1e-10);
    }

    #[test]
    fn erfcx_negative_branch() {
        let x: f64 = -1.3;
        let direct = (x * x).exp() * libm::erfc(x);
        assert!((erfcx(x).unwrap() - direct).abs() / direct < 1e-14);
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let v = lower_incomplete_gamma(1.0, x).unwrap();
            assert!((v - (1.0 - f64::exp(-x))).abs() < 1e-14);
        }
        let v = lower_incomplete_gamma(0.5, 4.0).unwrap();
        let expect = PI.sqrt() * libm::erf(2.0);
        assert!((v - expect).abs() / expect < 1e-13);
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(-1.0, 1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_three_halves_against_quadrature() {
        // substitute t = u² to remove the endpoint singularity: γ(3/2, 4) = ∫₀² 2u² e^{-u²} du
        let oracle = simpson(|u| 2.0 * u * u * (-u * u).exp(), 0.0, 2.0, 20_000);
        let closed = 0.5 * PI.sqrt() * libm::erf(2.0) - 2.0 * (-4.0f64).exp();
        assert!((oracle - closed).abs() < 1e-12);
        let v = lower_incomplete_gamma(1.5, 4.0).unwrap();
        assert!((v - oracle).abs() / oracle < 1e-12);
    }

    #[test]
    fn incomplete_gamma_limits() {
        for &a in &[0.5, 1.0, 1.5, 2.0] {
            let v = lower_incomplete_gamma(a, 50.0).unwrap();
            assert!((v - gamma(a)).abs() / gamma(a) < 1e-13, "a={a}");
        }
    }

    #[test]
    fn beta_values() {
        let b1 = beta_coefficient(1.0).unwrap();
        let exact = (1.0 - (-4.0f64).exp()) / (2.0 * PI.sqrt());
        assert!((b1 - exact).abs() < 1e-15);
        assert!((b1 - 0.2769).abs() < 1e-4);
        let b0 = beta_coefficient(0.0).unwrap();
        assert!((b0 - 0.5 * libm::erf(2.0)).abs() < 1e-14);
        assert!((b0 - 0.497_66).abs() < 1e-5);
        for &x in &[0.25, 0.5, 1.5, 2.0] {
            let direct = simpson(
                |z| z.powf(x) * (-z * z).exp() * FRAC_1_SQRT_PI,
                0.0,
                2.0,
                200_000,
            );
            let tol = if x < 1.0 { 1e-7 } else { 1e-10 };
            assert!((beta_coefficient(x).unwrap() - direct).abs() < tol, "x={x}");
        }
        assert!(beta_coefficient(-0.5).is_err());
    }

    #[test]
    fn gauss_legendre_rules() {
        for order in [1, 2, 5, 16, 64] {
            let rule = QuadratureRule::gauss_legendre(order, 0.0, 2.0).unwrap();
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "order {order}");
            let deg = 2 * order - 1;
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            let approx = rule.integrate(|z| z.powi(deg as i32)).unwrap();
            assert!((approx - exact).abs() / exact < 1e-12, "order {order}");
        }
        let r = QuadratureRule::gauss_legendre(2, 0.0, 1.0).unwrap();
        assert!((r.integrate(|z| z * z).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let r = QuadratureRule::default_on(0.0, 2.0).unwrap();
        assert!((r.integrate(|_| 1.0).unwrap() - 2.0).abs() < 1e-13);
        let g = r.integrate(|z| (-z * z).exp() * FRAC_1_SQRT_PI).unwrap();
        assert!((g - 0.5 * libm::erf(2.0)).abs() < 1e-14);
        assert!(r.integrate(|_| f64::NAN).is_err());
    }
}
