//! Shared fixtures for the integration suites: reference potentials and an
//! independent contour-quadrature evaluator of the residue recursion,
//! assembled from the printed per-order formulas rather than the engine's
//! own residue extraction.
#![allow(dead_code)]

use beta_spectral::correlators::CorrelatorEngine;
use beta_spectral::kernel::kernel_s_value;
use beta_spectral::numerics::{contour_integral, ContourSpec};
use beta_spectral::spectral::{solve_endpoints, Potential, SpectralCurve};
use beta_spectral::{Complex, Jet, Result};

pub const QUAD_NODES: usize = 1024;

/// The running example V(x) = x^4 + x^2/2.
pub fn quartic_potential(t0: f64) -> Potential {
    Potential::new(0.0, 1.0, 0.0, 4.0, t0).unwrap()
}

pub fn quartic_curve(t0: f64) -> SpectralCurve {
    solve_endpoints(&quartic_potential(t0), None).unwrap()
}

pub fn quartic_engine(beta: f64, t0: f64) -> CorrelatorEngine {
    let curve = quartic_curve(t0);
    let params = curve.params(beta, 50).unwrap();
    CorrelatorEngine::new(curve, params)
}

pub fn gaussian_engine(beta: f64, t0: f64) -> CorrelatorEngine {
    let p = Potential::new(0.0, 1.0, 0.0, 0.0, t0).unwrap();
    let curve = solve_endpoints(&p, None).unwrap();
    let params = curve.params(beta, 50).unwrap();
    CorrelatorEngine::new(curve, params)
}

/// Deterministic physical-sheet points, radii in [2.3, 2.8), away from the
/// extra spectral-curve zeros of the running example (at |z| ~ 2.19 on the
/// imaginary axis) and outside the quadrature contour.
pub fn sheet_points(n: usize) -> Vec<Complex> {
    (0..n)
        .map(|k| Complex::from_polar(2.3 + 0.05 * (k % 10) as f64, 0.37 + 0.59 * k as f64))
        .collect()
}

/// Leading two-point function in the uniformizing variable,
/// 16 z1^2 z2^2 / ((b-a)^2 (z1^2-1)(z2^2-1)(z1 z2 - 1)^2), as a jet in z1.
pub fn w0_two_closed(ba: f64, z1: &Jet, z2: Complex) -> Jet {
    let one = Complex::new(1.0, 0.0);
    let num = z1.powi(2).scale(16.0 * z2 * z2 / (ba * ba));
    let den = z1
        .powi(2)
        .add_scalar(-one)
        .mul(&z1.scale(z2).add_scalar(-one).powi(2))
        .scale(z2 * z2 - one);
    num.div(&den).unwrap()
}

/// Shifted two-point function: the closed form above plus the double pole
/// on the diagonal, 8 / ((b-a)^2 (z1-z2)^2 (1 - 1/(z1 z2))^2) worth of
/// singular part.
pub fn w0_two_shifted_closed(ba: f64, z1: Complex, z2: Complex) -> Complex {
    let one = Complex::new(1.0, 0.0);
    let pref = 16.0 * z1 * z1 * z2 * z2 / (ba * ba * (z1 * z2 - one).powi(2));
    pref * (one / ((z1 * z1 - one) * (z2 * z2 - one)) + one / (2.0 * (z1 - z2).powi(2)))
}

/// Quadrature evaluation of the contour form of the recursion,
///   W_g(z1, rest) = -(1/2 pi i) oint S(z1, z) Rec_g(z, rest) / (2 ytilde(z)) dz,
/// on the circle |z| = radius with 1 < radius < min(|z1|, |rest|, |z_pm|):
/// the residues at z1, at the extra zeros z_pm of the spectral curve and at
/// the moving points are then all collected by the exterior of the contour.
/// Rec is assembled here from the printed per-order formulas, so this is an
/// evaluation path independent of the engine's residue extraction.
pub fn oracle_w(
    e: &CorrelatorEngine,
    twice_g: u32,
    z1: Complex,
    rest: &[Complex],
    radius: f64,
) -> Complex {
    let curve = &e.curve;
    let gamma = e.params.gamma;
    let ba = curve.b - curve.a;
    let one = Complex::new(1.0, 0.0);
    let rec = |z: Complex| -> Result<Complex> {
        let jet = Jet::variable(z, 1);
        let xp = curve.x_prime(z)?;
        match (twice_g, rest.len()) {
            // Rec_{1/2}(z) = -gamma/x'(z) * d/dz W0(z)
            (1, 0) => Ok(-gamma / xp * e.w0_one(&jet)?.derivative_at(1)),
            // Rec_1(z) = -W0(z,z) - gamma/x'(z) * d/dz W_{1/2}(z)
            (2, 0) => {
                let w0zz = 16.0 * z.powi(4) / (ba * ba * (z * z - one).powi(4));
                Ok(-w0zz - gamma / xp * e.w_half_one(&jet)?.derivative_at(1))
            }
            // Rec_{1/2}(z, z2) = -gamma/x'(z) * d/dz W0(z, z2)
            //                    - 2 * shifted-W0(z, z2) * W_{1/2}(z)
            (1, 1) => {
                let z2 = rest[0];
                let dw0 = w0_two_closed(ba, &jet, z2).derivative_at(1);
                let wh = e.w_half_one(&Jet::constant(z, z, 0))?.value();
                Ok(-gamma / xp * dw0 - 2.0 * w0_two_shifted_closed(ba, z, z2) * wh)
            }
            _ => unreachable!("oracle supports orders (1,1), (2,1) and (1,2) only"),
        }
    };
    let spec = ContourSpec::new(Complex::new(0.0, 0.0), radius, QUAD_NODES).unwrap();
    let integral = contour_integral(
        |z| Ok(kernel_s_value(z1, z)? * rec(z)? / (2.0 * curve.y_tilde(z)?)),
        &spec,
    )
    .unwrap();
    -integral
}

/// The often-quoted closed form for the first density correction of the
/// running example, -(gamma/4pi)(4 - sum_k 2(zk^2-1)/(zk^2 - 2 zk cos t + 1)).
pub fn quoted_half_density(e: &CorrelatorEngine, theta: f64) -> f64 {
    let mut s = 4.0;
    for zi in &e.curve.zeros_z {
        s -= (2.0 * (zi * zi - 1.0) / (zi * zi - 2.0 * zi * theta.cos() + 1.0)).re;
    }
    -e.params.gamma / (4.0 * std::f64::consts::PI) * s
}
