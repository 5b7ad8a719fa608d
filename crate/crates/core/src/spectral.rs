//! Spectral curve of the one-cut model: endpoints, moment polynomial and
//! the Zhukovsky parametrization.
//!
//! For a quartic potential `V(x) = t4 x^4/4 + t3 x^3/3 + t2 x^2/2 + t1 x`
//! the planar resolvent is `W0(x) = V'(x)/2 + y(x)` with
//! `y(x) = M(x) sqrt((x-a)(x-b))` and `M` quadratic. The endpoints follow
//! from the two large-x matching conditions `W0(x) = t0/x + O(1/x^2)`,
//! which reduce on the cut to exact trigonometric moments of `V'`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Jet};

/// Polynomial potential plus the 't Hooft parameter `t0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Potential {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t0: f64,
}

impl Potential {
    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64, t0: f64) -> Result<Self> {
        let p = Potential { t1, t2, t3, t4, t0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) {
            return Err(Error::InvalidInput("t0 must be positive".into()));
        }
        match self.degree() {
            4 => Ok(()),
            2 if self.t3 == 0.0 => {
                if self.t2 > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidInput("degree-2 potential needs t2 > 0".into()))
                }
            }
            _ => Err(Error::InvalidInput(
                "potential degree must be 2 (t3 = t4 = 0) or 4 (t4 != 0)".into(),
            )),
        }
    }

    /// Degree of V: 4 when t4 is nonzero, otherwise 2.
    pub fn degree(&self) -> u32 {
        if self.t4 != 0.0 {
            4
        } else {
            2
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        self.t4 / 4.0 * x.powi(4) + self.t3 / 3.0 * x.powi(3) + self.t2 / 2.0 * x * x
            + self.t1 * x
    }

    pub fn v_prime(&self, x: f64) -> f64 {
        self.t4 * x.powi(3) + self.t3 * x * x + self.t2 * x + self.t1
    }

    pub fn v_second(&self, x: f64) -> f64 {
        3.0 * self.t4 * x * x + 2.0 * self.t3 * x + self.t2
    }

    pub fn v_prime_jet(&self, x: &Jet) -> Jet {
        let x2 = x.mul(x);
        let x3 = x2.mul(x);
        x3.scale(self.t4.into())
            .add(&x2.scale(self.t3.into()))
            .add(&x.scale(self.t2.into()))
            .add_scalar(self.t1.into())
    }

    pub fn v_second_jet(&self, x: &Jet) -> Jet {
        let x2 = x.mul(x);
        x2.scale((3.0 * self.t4).into())
            .add(&x.scale((2.0 * self.t3).into()))
            .add_scalar(self.t2.into())
    }

    /// Location of the (unique, by the one-cut assumption) minimum of V.
    pub fn minimum(&self) -> f64 {
        if self.degree() == 2 {
            return -self.t1 / self.t2;
        }
        let mut best_x = 0.0;
        let mut best_v = f64::INFINITY;
        for k in 0..=4000 {
            let x = -20.0 + k as f64 * 0.01;
            let vx = self.v(x);
            if vx < best_v {
                best_v = vx;
                best_x = x;
            }
        }
        // Polish with Newton on V'.
        let mut x = best_x;
        for _ in 0..60 {
            let d2 = self.v_second(x);
            if d2.abs() < 1e-300 {
                break;
            }
            let step = self.v_prime(x) / d2;
            x -= step;
            if step.abs() < 1e-14 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

/// Refinement parameters derived from (beta, N, t0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct BetaParams {
    pub beta: f64,
    pub n_eigen: u64,
    pub gamma: f64,
    pub hbar: f64,
}

impl BetaParams {
    pub fn new(beta: f64, n_eigen: u64, t0: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        if n_eigen < 1 {
            return Err(Error::InvalidInput("n_eigen must be >= 1".into()));
        }
        let sb = beta.sqrt();
        Ok(BetaParams {
            beta,
            n_eigen,
            gamma: sb - 1.0 / sb,
            hbar: t0 / (n_eigen as f64 * sb),
        })
    }
}

/// One-cut spectral curve data for a given potential.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    pub potential: Potential,
    pub a: f64,
    pub b: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub d: u32,
    /// Zeros of M in the x-plane (empty for degree-2 potentials).
    pub zeros_x: Vec<Complex>,
    /// Their Zhukovsky images on the physical sheet, |z| > 1.
    pub zeros_z: Vec<Complex>,
    /// Residuals of the two large-x matching conditions at the solution.
    pub asymptotic_residual: [f64; 2],
    /// Residuals of the endpoint system in its printed polynomial form,
    /// reported for reference only (see `printed_endpoint_residuals`).
    pub printed_residual: [f64; 2],
}

/// Angular moments <cos^k> over a period: 0 for odd k, 1/2 and 3/8 for 2, 4.
/// Matching conditions as functions of the midpoint s and half-width r:
/// `f1 = <V'(s + r cos phi)>`, `f2 = <x V'(s + r cos phi)> - 2 t0`.
fn matching_conditions(p: &Potential, s: f64, r: f64) -> [f64; 2] {
    let r2 = r * r;
    let m1 = s;
    let m2 = s * s + r2 / 2.0;
    let m3 = s.powi(3) + 1.5 * s * r2;
    let m4 = s.powi(4) + 3.0 * s * s * r2 + 0.375 * r2 * r2;
    let f1 = p.t4 * m3 + p.t3 * m2 + p.t2 * m1 + p.t1;
    let f2 = p.t4 * m4 + p.t3 * m3 + p.t2 * m2 + p.t1 * m1 - 2.0 * p.t0;
    [f1, f2]
}

fn matching_jacobian(p: &Potential, s: f64, r: f64) -> [[f64; 2]; 2] {
    let r2 = r * r;
    [
        [
            p.t4 * (3.0 * s * s + 1.5 * r2) + 2.0 * p.t3 * s + p.t2,
            p.t4 * 3.0 * s * r + p.t3 * r,
        ],
        [
            p.t4 * (4.0 * s.powi(3) + 6.0 * s * r2) + p.t3 * (3.0 * s * s + 1.5 * r2)
                + 2.0 * p.t2 * s
                + p.t1,
            p.t4 * (6.0 * s * s * r + 1.5 * r2 * r) + p.t3 * 3.0 * s * r + p.t2 * r,
        ],
    ]
}

/// Residuals of the endpoint system in the polynomial form it is usually
/// quoted in. Reported alongside the solution; not used by the solver.
pub fn printed_endpoint_residuals(p: &Potential, a: f64, b: f64) -> [f64; 2] {
    let r1 = 2.0 * p.t3 * (2.0 * a * b + 3.0 * a * a + 3.0 * b * b)
        + 8.0 * p.t2 * (a + b)
        + 16.0 * p.t1
        + p.t4 * (3.0 * a * a * b + 3.0 * a * b * b + 5.0 * a.powi(3) + 5.0 * b.powi(3));
    let r2 = 16.0 * p.t3 * (a * a * b + a * b * b - a.powi(3) - b.powi(3))
        - 16.0 * p.t2 * (a * a + b * b)
        + p.t4
            * (6.0 * a * a * b * b + 12.0 * a.powi(3) * b + 12.0 * a * b.powi(3)
                - 15.0 * (a.powi(4) + b.powi(4)))
        + 256.0 * p.t0;
    [r1, r2]
}

/// Solve for the cut endpoints by damped Newton on the matching conditions.
pub fn solve_endpoints(p: &Potential, guess: Option<(f64, f64)>) -> Result<SpectralCurve> {
    p.validate()?;
    let (mut s, mut r) = match guess {
        Some((a0, b0)) => {
            if !(a0 < b0) {
                return Err(Error::InvalidInput("endpoint guess needs a < b".into()));
            }
            ((a0 + b0) / 2.0, (b0 - a0) / 2.0)
        }
        None => {
            let half = f64::max(1.0, p.t0.powf(0.25));
            (p.minimum(), half)
        }
    };

    let scale = 1.0 + 2.0 * p.t0.abs();
    let tol = 1e-13 * scale;
    let mut res = matching_conditions(p, s, r);
    let mut norm = res[0].hypot(res[1]);
    let mut converged = norm < tol;
    for _ in 0..200 {
        if converged {
            break;
        }
        let j = matching_jacobian(p, s, r);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::EndpointSolveFailed("singular Jacobian".into()));
        }
        let ds = (res[0] * j[1][1] - res[1] * j[0][1]) / det;
        let dr = (res[1] * j[0][0] - res[0] * j[1][0]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let s_try = s - lambda * ds;
            let r_try = r - lambda * dr;
            if r_try > 0.0 {
                let res_try = matching_conditions(p, s_try, r_try);
                let norm_try = res_try[0].hypot(res_try[1]);
                if norm_try < norm {
                    s = s_try;
                    r = r_try;
                    res = res_try;
                    norm = norm_try;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = norm < tol;
    }
    if !converged && norm >= 1e-12 * scale {
        return Err(Error::EndpointSolveFailed(format!(
            "Newton stalled at residual {norm:.3e}"
        )));
    }

    let (a, b) = (s - r, s + r);
    let curve = build_curve(p, a, b, res)?;
    Ok(curve)
}

fn build_curve(p: &Potential, a: f64, b: f64, res: [f64; 2]) -> Result<SpectralCurve> {
    let m2 = -p.t4 / 2.0;
    let m1 = -(a + b) * p.t4 / 4.0 - p.t3 / 2.0;
    let m0 = -p.t4 / 16.0 * (3.0 * a * a + 3.0 * b * b + 2.0 * a * b) - p.t2 / 2.0
        - p.t3 * (a + b) / 4.0;
    let mut curve = SpectralCurve {
        potential: *p,
        a,
        b,
        m0,
        m1,
        m2,
        d: p.degree(),
        zeros_x: Vec::new(),
        zeros_z: Vec::new(),
        asymptotic_residual: res,
        printed_residual: printed_endpoint_residuals(p, a, b),
    };

    // Regularity: M must stay away from zero on the support.
    let mut min_abs = f64::INFINITY;
    for k in 0..=200 {
        let x = a + (b - a) * k as f64 / 200.0;
        min_abs = min_abs.min(curve.moment(x.into()).norm());
    }
    if min_abs <= 1e-8 {
        return Err(Error::NonRegularPotential);
    }

    let (zx, zz) = moment_zeros(&curve)?;
    curve.zeros_x = zx;
    curve.zeros_z = zz;
    Ok(curve)
}

/// Zeros of the moment polynomial and their physical-sheet images.
pub fn moment_zeros(c: &SpectralCurve) -> Result<(Vec<Complex>, Vec<Complex>)> {
    if c.d == 2 {
        return Ok((Vec::new(), Vec::new()));
    }
    let m2 = Complex64::from(c.m2);
    let m1 = Complex64::from(c.m1);
    let m0 = Complex64::from(c.m0);
    let disc = (m1 * m1 - 4.0 * m2 * m0).sqrt();
    let zeros_x = vec![(-m1 + disc) / (2.0 * m2), (-m1 - disc) / (2.0 * m2)];
    let mut zeros_z = Vec::with_capacity(2);
    for &x in &zeros_x {
        let z = c.z_of_x(x).map_err(|e| match e {
            Error::OnCutInput => Error::MomentZeroOnCut,
            other => other,
        })?;
        if (z.norm() - 1.0).abs() <= 1e-12 {
            return Err(Error::MomentZeroOnCut);
        }
        zeros_z.push(z);
    }
    Ok((zeros_x, zeros_z))
}

impl SpectralCurve {
    pub fn params(&self, beta: f64, n_eigen: u64) -> Result<BetaParams> {
        BetaParams::new(beta, n_eigen, self.potential.t0)
    }

    /// M(x) = m2 x^2 + m1 x + m0.
    pub fn moment(&self, x: Complex) -> Complex {
        (Complex64::from(self.m2) * x + self.m1) * x + self.m0
    }

    pub fn moment_jet(&self, x: &Jet) -> Jet {
        x.scale(self.m2.into())
            .add_scalar(self.m1.into())
            .mul(x)
            .add_scalar(self.m0.into())
    }

    /// M'(x) = 2 m2 x + m1.
    pub fn moment_prime(&self, x: Complex) -> Complex {
        2.0 * Complex64::from(self.m2) * x + self.m1
    }

    /// Zhukovsky map x(z) = (a+b)/2 + (b-a)/4 (z + 1/z).
    pub fn x_of_z(&self, z: Complex) -> Result<Complex> {
        if z.norm() == 0.0 {
            return Err(Error::MapPole);
        }
        Ok(Complex64::from((self.a + self.b) / 2.0)
            + (self.b - self.a) / 4.0 * (z + z.inv()))
    }

    pub fn x_of_z_jet(&self, z: &Jet) -> Result<Jet> {
        if z.value().norm() == 0.0 {
            return Err(Error::MapPole);
        }
        Ok(z
            .add(&z.recip()?)
            .scale(((self.b - self.a) / 4.0).into())
            .add_scalar(((self.a + self.b) / 2.0).into()))
    }

    /// x'(z) = (b-a)/4 (1 - 1/z^2).
    pub fn x_prime_jet(&self, z: &Jet) -> Result<Jet> {
        if z.value().norm() == 0.0 {
            return Err(Error::MapPole);
        }
        let inv2 = z.recip()?.powi(2);
        Ok(inv2.neg().add_scalar(1.0.into()).scale(((self.b - self.a) / 4.0).into()))
    }

    pub fn x_prime(&self, z: Complex) -> Result<Complex> {
        if z.norm() == 0.0 {
            return Err(Error::MapPole);
        }
        Ok(Complex64::from((self.b - self.a) / 4.0) * (Complex64::new(1.0, 0.0) - (z * z).inv()))
    }

    /// Inverse Zhukovsky map onto the physical sheet |z| > 1.
    pub fn z_of_x(&self, x: Complex) -> Result<Complex> {
        let u = 4.0 * (x - (self.a + self.b) / 2.0) / (self.b - self.a);
        let w = (u * u - 4.0).sqrt();
        let z1 = (u + w) / 2.0;
        let z2 = (u - w) / 2.0;
        let z = if z1.norm() >= z2.norm() { z1 } else { z2 };
        if (z.norm() - 1.0).abs() <= 1e-12 {
            return Err(Error::OnCutInput);
        }
        // Refine the root of z^2 - u z + 1 for round-trip accuracy.
        let mut z = z;
        for _ in 0..2 {
            let f = z * z - u * z + 1.0;
            let df = 2.0 * z - u;
            if df.norm() > 0.0 {
                z -= f / df;
            }
        }
        Ok(z)
    }

    /// Spectral curve in the Zhukovsky variable:
    /// y~(z) = M(x(z)) (b-a)/4 (z - 1/z). Odd under z -> 1/z.
    pub fn y_tilde_jet(&self, z: &Jet) -> Result<Jet> {
        let x = self.x_of_z_jet(z)?;
        let m = self.moment_jet(&x);
        let odd = z.sub(&z.recip()?);
        Ok(m.mul(&odd).scale(((self.b - self.a) / 4.0).into()))
    }

    pub fn y_tilde(&self, z: Complex) -> Result<Complex> {
        Ok(self.y_tilde_jet(&Jet::constant(z, z, 0))?.value())
    }

    /// d/dz of y~, in closed form (jet-liftable).
    pub fn y_tilde_prime_jet(&self, z: &Jet) -> Result<Jet> {
        let x = self.x_of_z_jet(z)?;
        let xp = self.x_prime_jet(z)?;
        let m = self.moment_jet(&x);
        let mp = x.scale((2.0 * self.m2).into()).add_scalar(self.m1.into());
        let quarter = Complex64::from((self.b - self.a) / 4.0);
        let odd = z.sub(&z.recip()?);
        let even = z.recip()?.powi(2).add_scalar(1.0.into());
        Ok(mp.mul(&xp).mul(&odd).add(&m.mul(&even)).scale(quarter))
    }

    pub fn y_tilde_prime(&self, z: Complex) -> Result<Complex> {
        Ok(self.y_tilde_prime_jet(&Jet::constant(z, z, 0))?.value())
    }

    /// Limiting eigenvalue density in x, rho(x) = -M(x) sqrt((x-a)(b-x)) / (pi t0),
    /// normalized to unit mass when the matching conditions hold.
    pub fn density_x(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let m = self.moment(x.into()).re;
        -m * ((x - self.a) * (self.b - x)).sqrt() / (std::f64::consts::PI * self.potential.t0)
    }

    /// Stable evaluation of the planar resolvent W0(x) away from the cut,
    /// as the Stieltjes integral of the limiting density. Used as an
    /// asymptotics oracle: no large-x cancellation.
    pub fn resolvent_from_density(&self, x: Complex, nodes: usize) -> Complex {
        let s = (self.a + self.b) / 2.0;
        let r = (self.b - self.a) / 2.0;
        let n = nodes.max(64);
        // Midpoint rule in the angle variable; integrand is smooth and
        // vanishes to second order at the ends.
        let mut acc = Complex64::default();
        for k in 0..n {
            let phi = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let lam = s + r * phi.cos();
            let m = self.moment(lam.into()).re;
            let weight = -r * r * phi.sin() * phi.sin() * m / std::f64::consts::PI;
            acc += weight / (x - lam);
        }
        acc * std::f64::consts::PI / n as f64
    }
}
