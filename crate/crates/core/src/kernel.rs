//! The recursion kernel
//! `S(z1, z) = (z - 1/z)^2 / ((z1 - 1/z1)(z - z1)(z - 1/z1))`.
//!
//! Simple poles at `z = z1` and `z = 1/z1` with residues `+1` and `-1`,
//! double zeros at `z = +/-1`, and `S(z1, z) -> 1/(z1 - 1/z1)` at infinity.
//! The residue formula needs it both as a function of `z` (for residues at
//! moving points) and as a function of `z1` (the jets feeding derivative
//! terms), so both liftings are provided.

use crate::error::{Error, Result};
use crate::numerics::{Complex, Jet};

const POLE_EPS: f64 = 1e-13;

fn check_z1(z1: Complex) -> Result<()> {
    if z1.norm() < POLE_EPS
        || (z1 - Complex::new(1.0, 0.0)).norm() < POLE_EPS
        || (z1 + Complex::new(1.0, 0.0)).norm() < POLE_EPS
    {
        return Err(Error::KernelPole);
    }
    Ok(())
}

fn check_z(z1: Complex, z: Complex) -> Result<()> {
    if z.norm() < POLE_EPS || (z - z1).norm() < POLE_EPS || (z - z1.inv()).norm() < POLE_EPS {
        return Err(Error::KernelPole);
    }
    Ok(())
}

/// `S(z1, z)` as a jet in the second argument.
pub fn kernel_s(z1: Complex, z: &Jet) -> Result<Jet> {
    check_z1(z1)?;
    check_z(z1, z.value())?;
    let odd = z.sub(&z.recip()?);
    let num = odd.mul(&odd);
    let denom = z
        .add_scalar(-z1)
        .mul(&z.add_scalar(-z1.inv()))
        .scale(z1 - z1.inv());
    num.div(&denom)
}

pub fn kernel_s_value(z1: Complex, z: Complex) -> Result<Complex> {
    Ok(kernel_s(z1, &Jet::constant(z, z, 0))?.value())
}

/// `S(z1, z)` as a jet in the first argument, second held fixed.
pub fn kernel_s_in_z1(z1: &Jet, z: Complex) -> Result<Jet> {
    check_z1(z1.value())?;
    check_z(z1.value(), z)?;
    let num = (z - z.inv()).powi(2);
    let u = z1.sub(&z1.recip()?);
    let p = z1.neg().add_scalar(z);
    let q = z1.recip()?.neg().add_scalar(z);
    Jet::constant(num, z1.center(), z1.order()).div(&u.mul(&p).mul(&q))
}

/// `(d/dz) S(z1, z)` at fixed `z`, as a jet in `z1`.
pub fn kernel_s_dz_in_z1(z1: &Jet, z: Complex) -> Result<Jet> {
    check_z1(z1.value())?;
    check_z(z1.value(), z)?;
    let a = (z - z.inv()).powi(2);
    let da = 2.0 * (z - z.inv()) * (Complex::new(1.0, 0.0) + (z * z).inv());
    let u = z1.sub(&z1.recip()?);
    let p = z1.neg().add_scalar(z);
    let q = z1.recip()?.neg().add_scalar(z);
    let num = p.mul(&q).scale(da).sub(&p.add(&q).scale(a));
    num.div(&u.mul(&p.powi(2)).mul(&q.powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, contour_integral, ContourSpec};
    use approx::assert_relative_eq;

    #[test]
    fn residues_at_the_two_poles() {
        let z1 = c(2.0, 0.0);
        let around_z1 = ContourSpec::new(z1, 0.3, 256).unwrap();
        let r1 = contour_integral(|z| kernel_s_value(z1, z), &around_z1).unwrap();
        assert_relative_eq!(r1.re, 1.0, epsilon = 1e-10);
        assert!(r1.im.abs() < 1e-10);

        let around_inv = ContourSpec::new(z1.inv(), 0.2, 256).unwrap();
        let r2 = contour_integral(|z| kernel_s_value(z1, z), &around_inv).unwrap();
        assert_relative_eq!(r2.re, -1.0, epsilon = 1e-10);
        assert!(r2.im.abs() < 1e-10);
    }

    #[test]
    fn double_zeros_at_plus_minus_one() {
        let z1 = c(2.0, 0.0);
        for sign in [1.0, -1.0] {
            let jet = Jet::variable(c(sign, 0.0), 1);
            let s = kernel_s(z1, &jet).unwrap();
            assert!(s.value().norm() < 1e-10);
            assert!(s.derivative_at(1).norm() < 1e-10);
        }
    }

    #[test]
    fn reflection_identity_in_z() {
        let z1 = c(1.7, -0.9);
        for z in [c(2.3, 0.4), c(0.3, 0.8), c(-1.2, 2.0), c(5.0, -3.0)] {
            let lhs = kernel_s_value(z1, z.inv()).unwrap() / (z * z);
            let rhs = kernel_s_value(z1, z).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn antisymmetry_in_z1() {
        for (z1, z) in [(c(2.0, 0.5), c(3.0, -1.0)), (c(-1.8, 0.2), c(0.4, 0.9))] {
            let lhs = kernel_s_value(z1.inv(), z).unwrap();
            let rhs = kernel_s_value(z1, z).unwrap();
            assert!((lhs + rhs).norm() <= 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn limit_at_infinity() {
        let z1 = c(2.0, 1.0);
        let s = kernel_s_value(z1, c(1e6, 0.0)).unwrap();
        let lim = (z1 - z1.inv()).inv();
        assert!((s - lim).norm() < 1e-5 * lim.norm());
    }

    #[test]
    fn no_other_residues_off_the_poles() {
        // A circle enclosing neither z1 nor 1/z1 (but enclosing the double
        // pole at 0 of the full function... it does not: center 3i radius 1).
        let z1 = c(2.0, 0.0);
        let spec = ContourSpec::new(c(0.0, 3.0), 1.0, 256).unwrap();
        let val = contour_integral(|z| kernel_s_value(z1, z), &spec).unwrap();
        assert!(val.norm() < 1e-10);
    }

    #[test]
    fn pole_evaluations_are_errors() {
        let z1 = c(2.0, 0.0);
        assert!(matches!(kernel_s_value(z1, z1), Err(Error::KernelPole)));
        assert!(matches!(kernel_s_value(z1, z1.inv()), Err(Error::KernelPole)));
        assert!(matches!(kernel_s_value(z1, c(0.0, 0.0)), Err(Error::KernelPole)));
        assert!(matches!(kernel_s_value(c(1.0, 0.0), c(3.0, 0.0)), Err(Error::KernelPole)));
    }

    #[test]
    fn z1_lifting_agrees_with_direct_evaluation() {
        let z = c(3.0, 0.7);
        let z1 = c(1.9, -0.4);
        let jet = Jet::variable(z1, 2);
        let in_z1 = kernel_s_in_z1(&jet, z).unwrap();
        assert!((in_z1.value() - kernel_s_value(z1, z).unwrap()).norm() < 1e-13);
        // Derivative in z1 checked by central difference.
        let h = 1e-6;
        let fd = (kernel_s_value(z1 + h, z).unwrap() - kernel_s_value(z1 - h, z).unwrap())
            / (2.0 * h);
        assert!((in_z1.derivative_at(1) - fd).norm() < 1e-7 * (1.0 + fd.norm()));
    }

    #[test]
    fn dz_in_z1_matches_jet_derivative_in_z() {
        let z1v = c(1.9, -0.4);
        let z = c(3.0, 0.7);
        let dz = kernel_s_dz_in_z1(&Jet::variable(z1v, 1), z).unwrap();
        let via_jet = kernel_s(z1v, &Jet::variable(z, 1)).unwrap().derivative_at(1);
        assert!((dz.value() - via_jet).norm() < 1e-12 * (1.0 + via_jet.norm()));
        // And its z1-derivative against a finite difference.
        let h = 1e-6;
        let fd = (kernel_s(z1v + h, &Jet::variable(z, 1)).unwrap().derivative_at(1)
            - kernel_s(z1v - h, &Jet::variable(z, 1)).unwrap().derivative_at(1))
            / (2.0 * h);
        assert!((dz.derivative_at(1) - fd).norm() < 1e-6 * (1.0 + fd.norm()));
    }
}
