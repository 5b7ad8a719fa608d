//! Complex truncated-Taylor jets and circular contour quadrature.
//!
//! A [`Jet`] stores the Taylor coefficients `c_0..c_K` of an analytic
//! function about a common expansion point, so that rational arithmetic on
//! jets propagates derivatives without symbolic work. Everything downstream
//! (spectral curve, kernel, correlators) is rational in the Zhukovsky
//! variable, so `add/sub/mul/div` plus series composition is all we need.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const I: Complex = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex {
    Complex64::new(re, im)
}

/// Truncated Taylor series of a complex analytic function about `center`:
/// `coeffs[k] = f^(k)(center) / k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: Complex,
    coeffs: Vec<Complex>,
}

impl Jet {
    /// Constant function lifted to a jet of the given truncation order.
    pub fn constant(value: Complex, center: Complex, order: usize) -> Self {
        let mut coeffs = vec![Complex::default(); order + 1];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    /// The identity function `z` expanded about `center`.
    pub fn variable(center: Complex, order: usize) -> Self {
        let mut coeffs = vec![Complex::default(); order + 1];
        coeffs[0] = center;
        if order >= 1 {
            coeffs[1] = Complex::new(1.0, 0.0);
        }
        Jet { center, coeffs }
    }

    pub fn from_coeffs(center: Complex, coeffs: Vec<Complex>) -> Self {
        assert!(!coeffs.is_empty(), "jet needs at least the constant term");
        Jet { center, coeffs }
    }

    pub fn center(&self) -> Complex {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    /// Value of the underlying function at the expansion point.
    pub fn value(&self) -> Complex {
        self.coeffs[0]
    }

    /// k-th derivative at the expansion point, i.e. `k! * coeffs[k]`.
    pub fn derivative_at(&self, k: usize) -> Complex {
        assert!(k <= self.order(), "derivative order exceeds truncation");
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.coeffs[k] * fact
    }

    /// Formal derivative of the series; the truncation order drops by one.
    pub fn derivative(&self) -> Jet {
        if self.coeffs.len() == 1 {
            return Jet::constant(Complex::default(), self.center, 0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, ck)| ck * k as f64)
            .collect();
        Jet { center: self.center, coeffs }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|ck| ck.re.is_finite() && ck.im.is_finite())
    }

    fn common_len(&self, rhs: &Jet) -> usize {
        debug_assert_eq!(
            self.center, rhs.center,
            "jet arithmetic requires a common expansion point"
        );
        self.coeffs.len().min(rhs.coeffs.len())
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let n = self.common_len(rhs);
        let coeffs = (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect();
        Jet { center: self.center, coeffs }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let n = self.common_len(rhs);
        let coeffs = (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect();
        Jet { center: self.center, coeffs }
    }

    pub fn neg(&self) -> Jet {
        let coeffs = self.coeffs.iter().map(|ck| -ck).collect();
        Jet { center: self.center, coeffs }
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let n = self.common_len(rhs);
        let mut coeffs = vec![Complex::default(); n];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.coeffs[j] * rhs.coeffs[k - j];
            }
        }
        Jet { center: self.center, coeffs }
    }

    /// Cauchy division of truncated series. Fails when the divisor vanishes
    /// at the expansion point (the quotient would have a pole there).
    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        let n = self.common_len(rhs);
        let b0 = rhs.coeffs[0];
        if b0.norm() == 0.0 {
            return Err(Error::PoleAtEvaluationPoint);
        }
        let mut coeffs = vec![Complex::default(); n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 0..k {
                acc -= coeffs[j] * rhs.coeffs[k - j];
            }
            coeffs[k] = acc / b0;
        }
        Ok(Jet { center: self.center, coeffs })
    }

    pub fn scale(&self, s: Complex) -> Jet {
        let coeffs = self.coeffs.iter().map(|ck| ck * s).collect();
        Jet { center: self.center, coeffs }
    }

    pub fn add_scalar(&self, s: Complex) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(Complex::new(1.0, 0.0), self.center, self.order());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        out
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(Complex::new(1.0, 0.0), self.center, self.order()).div(self)
    }

    /// Series composition `g ∘ (self - self.value())`, re-centered at
    /// `self.center`. `g` must be expanded about `self.value()`.
    pub fn compose(g: &Jet, inner: &Jet) -> Jet {
        debug_assert_eq!(g.center, inner.value(), "outer series must be centered at inner value");
        let n = inner.coeffs.len();
        let mut shifted = inner.clone();
        shifted.coeffs[0] = Complex::default();
        // Horner evaluation of the outer series in the shifted inner jet.
        let mut acc = Jet::constant(Complex::default(), inner.center, n - 1);
        for gk in g.coeffs.iter().rev() {
            acc = acc.mul(&shifted).add_scalar(*gk);
        }
        acc
    }
}

/// Lift a "function of z" defined on plain variable jets to arbitrary jet
/// arguments: expand it about the argument's value, then compose.
pub fn lift<F>(f: F, arg: &Jet) -> Result<Jet>
where
    F: Fn(&Jet) -> Result<Jet>,
{
    let local = f(&Jet::variable(arg.value(), arg.order()))?;
    Ok(Jet::compose(&local, arg))
}

/// Derivative of a function of z, evaluated at an arbitrary jet argument.
/// `f` is queried one order higher and formally differentiated.
pub fn lift_derivative<F>(f: F, arg: &Jet) -> Result<Jet>
where
    F: Fn(&Jet) -> Result<Jet>,
{
    let local = f(&Jet::variable(arg.value(), arg.order() + 1))?.derivative();
    Ok(Jet::compose(&local, arg))
}

/// A circle `|z - center| = radius` discretized for trapezoid quadrature.
#[derive(Debug, Clone, Copy)]
pub struct ContourSpec {
    pub center: Complex,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(center: Complex, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("contour radius must be positive".into()));
        }
        if nodes < 16 || nodes % 2 != 0 {
            return Err(Error::InvalidInput("contour nodes must be even and >= 16".into()));
        }
        Ok(ContourSpec { center, radius, nodes })
    }
}

/// `(1/2πi) ∮ f(z) dz` over the circle, by the trapezoid rule. Spectrally
/// accurate for integrands analytic in an annulus around the contour.
pub fn contour_integral<F>(f: F, spec: &ContourSpec) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let n = spec.nodes;
    let mut acc = Complex::default();
    for k in 0..n {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let dir = c(phi.cos(), phi.sin());
        let z = spec.center + spec.radius * dir;
        let fz = f(z)?;
        if !fz.re.is_finite() || !fz.im.is_finite() {
            return Err(Error::SingularityOnContour);
        }
        acc += fz * dir;
    }
    Ok(acc * spec.radius / n as f64)
}

/// Same integral with the error estimated by node doubling.
pub fn contour_integral_with_error<F>(f: F, spec: &ContourSpec) -> Result<(Complex, f64)>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let coarse = contour_integral(&f, spec)?;
    let fine_spec = ContourSpec { nodes: spec.nodes * 2, ..*spec };
    let fine = contour_integral(&f, &fine_spec)?;
    Ok((fine, (fine - coarse).norm()))
}

pub const DEFAULT_CONTOUR_NODES: usize = 512;
