//! Cross-checks of the closed-form correlators against evaluation paths
//! that share no code with the residue engine: the x-variable form of the
//! leading two-point function, the contour form of the recursion at several
//! radii, and the Gaussian ensemble where the first density correction is
//! an exactly flat profile.

mod common;

use std::f64::consts::PI;

use beta_spectral::correlators::CorrelatorKey;
use beta_spectral::density::rho_correction;
use beta_spectral::{Complex, Jet};

use common::*;

/// x-variable closed form of the leading two-point function,
/// (1/(4 sqrt(s1) sqrt(s2))) * (((sqrt(s1)-sqrt(s2))/(x1-x2))^2 - 1) with
/// s_i = (x_i - a)(x_i - b), evaluated on the physical branch
/// sqrt(s) = (b-a)/4 * (z - 1/z).
#[test]
fn two_point_matches_x_variable_form() {
    let e = quartic_engine(2.0, 1.0);
    let curve = &e.curve;
    let cc = (curve.b - curve.a) / 4.0;
    let pts = sheet_points(8);
    for k in 0..pts.len() {
        let (z1, z2) = (pts[k], pts[(k + 5) % pts.len()]);
        let (x1, x2) = (curve.x_of_z(z1).unwrap(), curve.x_of_z(z2).unwrap());
        let s1 = cc * (z1 - z1.inv());
        let s2 = cc * (z2 - z2.inv());
        let expected = (((s1 - s2) / (x1 - x2)).powi(2) - 1.0) / (4.0 * s1 * s2);
        let got = e.w0_two(&Jet::constant(z1, z1, 0), z2).unwrap().value();
        assert!(
            (got - expected).norm() <= 1e-12 * expected.norm(),
            "x-variable two-point mismatch at ({z1}, {z2}): {got} vs {expected}"
        );
    }
}

/// The contour evaluation must not depend on the quadrature radius as long
/// as the circle separates the unit disk from the exterior poles.
#[test]
fn contour_oracle_is_radius_independent() {
    let e = quartic_engine(0.5, 1.0);
    let z1 = Complex::from_polar(2.5, 0.9);
    let z2 = Complex::from_polar(2.6, -2.1);
    for (twice_g, rest) in [(1u32, vec![]), (2, vec![]), (1, vec![z2])] {
        let base = oracle_w(&e, twice_g, z1, &rest, 1.5);
        for radius in [1.2, 1.7] {
            let other = oracle_w(&e, twice_g, z1, &rest, radius);
            assert!(
                (base - other).norm() <= 1e-10 * base.norm(),
                "order {twice_g} oracle moved between radii: {base} vs {other}"
            );
        }
    }
}

/// Full engine path (including the recursion bookkeeping behind `w`)
/// against the quadrature oracle, at a beta away from the symmetric points.
#[test]
fn engine_matches_contour_oracle_at_generic_beta() {
    let e = quartic_engine(3.7, 1.0);
    let pts = sheet_points(4);
    for (k, &z1) in pts.iter().enumerate() {
        for (twice_g, rest) in [(1u32, vec![]), (2, vec![]), (1, vec![pts[(k + 1) % 4]])] {
            let key = CorrelatorKey::new(twice_g, 1 + rest.len()).unwrap();
            let mut all = vec![z1];
            all.extend_from_slice(&rest);
            let closed = e.w(key, &all).unwrap();
            let quad = oracle_w(&e, twice_g, z1, &rest, 1.5);
            assert!(
                (closed - quad).norm() <= 1e-9 * quad.norm(),
                "order ({twice_g}, {}) mismatch at z1={z1}: {closed} vs {quad}",
                1 + rest.len()
            );
        }
    }
}

/// For the Gaussian ensemble the moment polynomial is constant, so the
/// half-order density coefficient is exactly flat: gamma/(2 pi t0). Its
/// mass gamma/2 matches the exact identity E[sum lambda^2] =
/// t0 (N - 1 + 1/beta) obtained by integration by parts on the ensemble
/// weight, once the -gamma/4 edge point masses are accounted for.
#[test]
fn gaussian_half_correction_is_flat() {
    for (beta, t0) in [(0.5, 1.0), (2.0, 0.5), (4.0, 2.0)] {
        let e = gaussian_engine(beta, t0);
        let expected = e.params.gamma / (2.0 * PI * t0);
        for k in 1..16 {
            let theta = PI * k as f64 / 16.0;
            let got = rho_correction(&e, 1, theta).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                "beta={beta}, t0={t0}, theta={theta}: {got} vs {expected}"
            );
        }
    }
}
