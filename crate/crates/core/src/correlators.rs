//! Correlation functions on the physical sheet: closed forms for the low
//! orders and the generic residue-formula engine.
//!
//! Orders are indexed by `(twice_g, n)` with half-integer orders stored
//! doubled. Base cases (0,1), (0,2), (1,1) are hard-coded; (1,1) in
//! particular folds the residue at infinity of its derivation into the
//! closed form, so the generic formula is never applied to it. Everything
//! else supported — (0,n), (1,n) and (2,1) — goes through the residue
//! formula
//!
//! ```text
//! W_g(z1,zK) = Rec_g(z1,zK)/(2 y(z1))
//!            + sum_i S(z1,zi) Rec_g(zi,zK)/(2 y'(zi))
//!            - sum_j d/dz [ S(z1,z) W_g(z,zK\{j}) / y(z)
//!                           * 8/((b-a)^2 (1 - 1/(z zj))^2) ]  at z = zj
//!
//! (the sign of the derivative term is fixed by symmetry of the two-point
//! half-order function, cross-checked against its written-out expansion)
//! ```
//!
//! with `Rec_g` the combination of lower orders from the loop equations.
//! In `Rec_g` the product sum keeps only pairs where at least one factor
//! carries extra points, matching the worked low orders: for a one-point
//! target the product block is absent entirely.

use crate::error::{Error, Result};
use crate::kernel::{kernel_s_dz_in_z1, kernel_s_in_z1};
use crate::numerics::{lift_derivative, Complex, Jet};
use crate::spectral::{BetaParams, SpectralCurve};

/// Order label (2g, n); half-integer g stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CorrelatorKey {
    pub twice_g: u32,
    pub n: usize,
}

impl CorrelatorKey {
    pub fn new(twice_g: u32, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("correlator needs at least one point".into()));
        }
        Ok(CorrelatorKey { twice_g, n })
    }

    pub fn is_base(&self) -> bool {
        matches!((self.twice_g, self.n), (0, 1) | (0, 2) | (1, 1))
    }

    pub fn supported(&self) -> bool {
        matches!((self.twice_g, self.n), (0, _) | (1, _) | (2, 1))
    }
}

const COINCIDENCE_EPS: f64 = 1e-13;

pub struct CorrelatorEngine {
    pub curve: SpectralCurve,
    pub params: BetaParams,
}

impl CorrelatorEngine {
    pub fn new(curve: SpectralCurve, params: BetaParams) -> Self {
        CorrelatorEngine { curve, params }
    }

    fn zero_like(&self, z: &Jet) -> Jet {
        Jet::constant(Complex::default(), z.center(), z.order())
    }

    /// W0(z) = y(z) + V'(x(z))/2, the planar resolvent in z.
    pub fn w0_one(&self, z: &Jet) -> Result<Jet> {
        let x = self.curve.x_of_z_jet(z)?;
        let vp = self.curve.potential.v_prime_jet(&x);
        Ok(self.curve.y_tilde_jet(z)?.add(&vp.scale(0.5.into())))
    }

    /// W0(z1,z2) = 16 z1^2 z2^2 / ((b-a)^2 (z1^2-1)(z2^2-1)(z1 z2-1)^2).
    pub fn w0_two(&self, z1: &Jet, z2: Complex) -> Result<Jet> {
        if (z1.value() * z2 - 1.0).norm() < COINCIDENCE_EPS {
            return Err(Error::MirrorPole);
        }
        let ba2 = (self.curve.b - self.curve.a).powi(2);
        let num = z1.powi(2).scale((16.0 * (z2 * z2) / ba2).into());
        let den = z1
            .powi(2)
            .add_scalar((-1.0).into())
            .scale(z2 * z2 - 1.0)
            .mul(&z1.scale(z2).add_scalar((-1.0).into()).powi(2));
        num.div(&den)
    }

    /// Diagonal value W0(z,z) = 16 z^4 / ((b-a)^2 (z^2-1)^4).
    pub fn w0_two_diag(&self, z: &Jet) -> Result<Jet> {
        let ba2 = (self.curve.b - self.curve.a).powi(2);
        let num = z.powi(4).scale((16.0 / ba2).into());
        num.div(&z.powi(2).add_scalar((-1.0).into()).powi(4))
    }

    /// Shifted two-point function, shift applied in the x variable:
    /// W0(z1,z2) + 1/(2 (x(z1)-x(z2))^2).
    pub fn w0_two_shifted(&self, z1: &Jet, z2: Complex) -> Result<Jet> {
        if (z1.value() - z2).norm() < COINCIDENCE_EPS {
            return Err(Error::ShiftedDiagonal);
        }
        let base = self.w0_two(z1, z2)?;
        let x2 = self.curve.x_of_z(z2)?;
        let diff = self.curve.x_of_z_jet(z1)?.add_scalar(-x2);
        Ok(base.add(&diff.powi(2).scale(2.0.into()).recip()?))
    }

    /// W_{1/2}(z), proportional to gamma:
    /// 2(d-1) gamma/((b-a)(z-1/z)) - gamma y'(z)/(2 x'(z) y(z))
    /// - gamma sum_i S(z,zi)/(2 x'(zi)).
    ///
    /// The middle term has simple poles at the moment zeros z_i which
    /// cancel against the kernel sum; with y'/y split through
    /// y = C M(x(z))(z - 1/z) the per-zero combination collapses to
    /// -gamma/2 [1/(x-x_i) + S(z,z_i)/x'(z_i)]
    ///   = -gamma/(2C) z(z_i z + 1)/((z z_i - 1)(z^2 - 1)),
    /// manifestly regular at z = z_i, so the function can be evaluated
    /// right on the zeros (the higher orders need it there).
    pub fn w_half_one(&self, z: &Jet) -> Result<Jet> {
        let gamma = self.params.gamma;
        if gamma == 0.0 {
            return Ok(self.zero_like(z));
        }
        let ba = self.curve.b - self.curve.a;
        let cc = ba / 4.0;
        let d = self.curve.d as f64;
        let odd = z.sub(&z.recip()?);
        let mut out = odd.recip()?.scale((2.0 * (d - 1.0) * gamma / ba).into());
        // u'/(x' u) part of y'/(x' y), u = z - 1/z.
        let up = z.powi(2).recip()?.add_scalar(1.0.into());
        let xp = self.curve.x_prime_jet(z)?;
        out = out.sub(&up.div(&xp.mul(&odd))?.scale((gamma / 2.0).into()));
        let z2m1 = z.powi(2).add_scalar((-1.0).into());
        for zi in &self.curve.zeros_z {
            let num = z.mul(&z.scale(*zi).add_scalar(1.0.into()));
            let den = z.scale(*zi).add_scalar((-1.0).into()).mul(&z2m1);
            out = out.sub(&num.div(&den)?.scale((gamma / (2.0 * cc)).into()));
        }
        Ok(out)
    }

    /// W_1(z) by its printed closed form; the gamma-proportional line
    /// drops out exactly at beta = 1.
    pub fn w_one_one(&self, z: &Jet) -> Result<Jet> {
        let gamma = self.params.gamma;
        let y1 = self.curve.y_tilde_jet(z)?;
        let xp1 = self.curve.x_prime_jet(z)?;
        let z2m1 = z.powi(2).add_scalar((-1.0).into());
        let mut out = y1
            .mul(&xp1.powi(2))
            .mul(&z2m1.powi(2))
            .scale(2.0.into())
            .recip()?
            .neg();
        for zi in &self.curve.zeros_z {
            let s = kernel_s_in_z1(z, *zi)?;
            let xpi = self.curve.x_prime(*zi)?;
            let ypi = self.curve.y_tilde_prime(*zi)?;
            let coef = (2.0 * xpi * xpi * (zi * zi - 1.0).powi(2) * ypi).inv();
            out = out.sub(&s.scale(coef));
        }
        if gamma != 0.0 {
            let dwh = lift_derivative(|v| self.w_half_one(v), z)?;
            out = out.sub(&dwh.div(&xp1.mul(&y1).scale(2.0.into()))?.scale(gamma.into()));
            for zi in &self.curve.zeros_z {
                let dwi = self.w_half_one(&Jet::variable(*zi, 1))?.derivative_at(1);
                let s = kernel_s_in_z1(z, *zi)?;
                let xpi = self.curve.x_prime(*zi)?;
                let ypi = self.curve.y_tilde_prime(*zi)?;
                out = out.sub(&s.scale(gamma * dwi / (2.0 * xpi * ypi)));
            }
        }
        Ok(out)
    }

    /// The loop-equation combination of lower orders:
    /// Rec_g(z,zK) = -sum' W_h(z,zI) W_{g-h}(z,zK\I) - W_{g-1}(z,z,zK)
    ///              - (gamma/x'(z)) d/dz W_{g-1/2}(z,zK),
    /// with shifted factors for the (0, one extra point) case.
    pub fn rec(&self, twice_g: u32, z: &Jet, rest: &[Complex]) -> Result<Jet> {
        let mut acc = self.zero_like(z);
        let k = rest.len();
        for twice_h in 0..=twice_g {
            for mask in 0u32..(1 << k) {
                if twice_h == 0 && mask == 0 {
                    continue;
                }
                if twice_h == twice_g && mask == (1 << k) - 1 {
                    continue;
                }
                let (pts_in, pts_out): (Vec<Complex>, Vec<Complex>) = {
                    let mut a = Vec::new();
                    let mut b = Vec::new();
                    for (i, p) in rest.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            a.push(*p);
                        } else {
                            b.push(*p);
                        }
                    }
                    (a, b)
                };
                if pts_in.is_empty() && pts_out.is_empty() {
                    // One-point times one-point: absent from the recursion
                    // at the worked orders.
                    continue;
                }
                let f1 = self.shifted_factor(twice_h, z, &pts_in)?;
                let f2 = self.shifted_factor(twice_g - twice_h, z, &pts_out)?;
                acc = acc.sub(&f1.mul(&f2));
            }
        }
        if twice_g >= 2 {
            if twice_g == 2 && rest.is_empty() {
                acc = acc.sub(&self.w0_two_diag(z)?);
            } else {
                return Err(Error::UnsupportedKey(format!(
                    "diagonal term of order (2g={}, n={})",
                    twice_g,
                    rest.len() + 1
                )));
            }
        }
        if twice_g >= 1 && self.params.gamma != 0.0 {
            let dw = lift_derivative(|v| self.eval(twice_g - 1, v, rest), z)?;
            let xp = self.curve.x_prime_jet(z)?;
            acc = acc.sub(&dw.div(&xp)?.scale(self.params.gamma.into()));
        }
        Ok(acc)
    }

    fn shifted_factor(&self, twice_h: u32, z: &Jet, pts: &[Complex]) -> Result<Jet> {
        if twice_h == 0 && pts.len() == 1 {
            self.w0_two_shifted(z, pts[0])
        } else {
            self.eval(twice_h, z, pts)
        }
    }

    /// Jet evaluation in the first variable, remaining points fixed.
    /// No sheet check: the rational expressions extend to the unit circle,
    /// which the density reconstruction relies on.
    pub fn eval(&self, twice_g: u32, z: &Jet, rest: &[Complex]) -> Result<Jet> {
        match (twice_g, rest.len()) {
            (0, 0) => self.w0_one(z),
            (0, 1) => self.w0_two(z, rest[0]),
            (1, 0) => self.w_half_one(z),
            (2, 0) | (0, _) | (1, _) => self.general(twice_g, z, rest),
            _ => Err(Error::UnsupportedKey(format!(
                "(2g={}, n={})",
                twice_g,
                rest.len() + 1
            ))),
        }
    }

    fn general(&self, twice_g: u32, z1: &Jet, rest: &[Complex]) -> Result<Jet> {
        let rec1 = self.rec(twice_g, z1, rest)?;
        let y1 = self.curve.y_tilde_jet(z1)?;
        let mut out = rec1.div(&y1.scale(2.0.into()))?;

        for zi in &self.curve.zeros_z {
            let rec_i = self.rec(twice_g, &Jet::constant(*zi, *zi, 0), rest)?.value();
            let ypi = self.curve.y_tilde_prime(*zi)?;
            let s = kernel_s_in_z1(z1, *zi)?;
            out = out.add(&s.scale(rec_i / (2.0 * ypi)));
        }

        let ba2 = (self.curve.b - self.curve.a).powi(2);
        for (j, zj) in rest.iter().enumerate() {
            let others: Vec<Complex> = rest
                .iter()
                .enumerate()
                .filter_map(|(i, p)| (i != j).then_some(*p))
                .collect();
            // H(z) = W_g(z, others)/y(z) * 8/((b-a)^2 (1 - 1/(z zj))^2),
            // expanded to first order at zj; the z1-dependence sits in the
            // kernel factors only.
            let v = Jet::variable(*zj, 1);
            let w = self.eval(twice_g, &v, &others)?;
            let y = self.curve.y_tilde_jet(&v)?;
            let geom = v
                .scale(*zj)
                .recip()?
                .neg()
                .add_scalar(1.0.into())
                .powi(2);
            let h = w.div(&y)?.div(&geom)?.scale((8.0 / ba2).into());
            let s = kernel_s_in_z1(z1, *zj)?;
            let ds = kernel_s_dz_in_z1(z1, *zj)?;
            out = out.sub(&ds.scale(h.value())).sub(&s.scale(h.derivative_at(1)));
        }
        Ok(out)
    }

    fn validate(&self, key: CorrelatorKey, points: &[Complex]) -> Result<()> {
        if key.n != points.len() {
            return Err(Error::InvalidInput(format!(
                "key expects {} points, got {}",
                key.n,
                points.len()
            )));
        }
        if !key.supported() {
            return Err(Error::UnsupportedKey(format!(
                "(2g={}, n={})",
                key.twice_g, key.n
            )));
        }
        for p in points {
            if p.norm() <= 1.0 {
                return Err(Error::NotOnPhysicalSheet);
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if (points[i] - points[j]).norm() < COINCIDENCE_EPS {
                    return Err(Error::CoincidentPoints);
                }
            }
        }
        Ok(())
    }

    /// Main entry point: W_g at physical-sheet points.
    pub fn w(&self, key: CorrelatorKey, points: &[Complex]) -> Result<Complex> {
        self.validate(key, points)?;
        let jet = Jet::variable(points[0], 0);
        Ok(self.eval(key.twice_g, &jet, &points[1..])?.value())
    }

    /// Same, with the first point carried as a jet (for derivative checks).
    pub fn w_jet(&self, key: CorrelatorKey, z1: &Jet, rest: &[Complex]) -> Result<Jet> {
        let mut points = vec![z1.value()];
        points.extend_from_slice(rest);
        self.validate(key, &points)?;
        self.eval(key.twice_g, z1, rest)
    }
}
