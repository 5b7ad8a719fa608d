//! Eigenvalue density in the angle variable and its 1/N corrections.
//!
//! With `z = e^{i theta}` the cut maps to the unit circle and the density
//! at order g is the jump `W_g(e^{-i theta}) - W_g(e^{i theta})` times the
//! Jacobian `(b-a)/2 sin(theta)`, normalized by `1/(2 i pi t0)`. The
//! leading term integrates to one analytically; it is renormalized to unit
//! mass anyway and the raw integral is reported, so a consistent prefactor
//! convention survives any rescaling. Corrections keep the same jump
//! normalization and enter the combined density weighted by `hbar^{2g}`.
//! A correction whose edge behavior is non-integrable is reported and left
//! out of the combined series (weak convergence only).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::correlators::CorrelatorEngine;
use crate::error::{Error, Result};
use crate::numerics::{Complex, Jet};
use crate::spectral::SpectralCurve;

/// Strictly increasing angles in the open interval (0, pi).
#[derive(Debug, Clone)]
pub struct ThetaGrid {
    points: Vec<f64>,
}

impl ThetaGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty theta grid".into()));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidInput("theta grid must be strictly increasing".into()));
            }
        }
        if !(points[0] > 0.0 && *points.last().unwrap() < PI) {
            return Err(Error::InvalidInput("theta grid must stay inside (0, pi)".into()));
        }
        Ok(ThetaGrid { points })
    }

    /// `count` midpoints of a uniform partition of (0, pi).
    pub fn uniform(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput("theta grid needs at least 2 points".into()));
        }
        Ok(ThetaGrid {
            points: (0..count).map(|k| PI * (k as f64 + 0.5) / count as f64).collect(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Midpoint rule on (0, pi); spectrally accurate here because every
/// integrand is a trig polynomial or a rational function of cos(theta)
/// extending to a smooth periodic function.
pub fn midpoint_integral<F>(f: F, nodes: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for k in 0..nodes {
        acc += f(PI * (k as f64 + 0.5) / nodes as f64)?;
    }
    Ok(acc * PI / nodes as f64)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::BranchPointAngle)
    }
}

/// Limiting density of angles (raw prefactor, before unit-mass scaling):
/// the jump of W0 across the circle reduces to -2 y(e^{i theta}).
pub fn rho_inf(curve: &SpectralCurve, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let z = Complex::new(theta.cos(), theta.sin());
    let jump = -2.0 * curve.y_tilde(z)?;
    let val = jump * ((curve.b - curve.a) / 2.0 * theta.sin())
        / (Complex::new(0.0, 2.0 * PI * curve.potential.t0));
    debug_assert!(val.im.abs() < 1e-10 * (1.0 + val.re.abs()));
    Ok(val.re)
}

fn one_point(engine: &CorrelatorEngine, twice_g: u32, z: Complex) -> Result<Complex> {
    let jet = Jet::constant(z, z, 0);
    match twice_g {
        0 => Ok(engine.w0_one(&jet)?.value()),
        1 => Ok(engine.w_half_one(&jet)?.value()),
        2 => Ok(engine.w_one_one(&jet)?.value()),
        _ => Err(Error::UnsupportedKey(format!("(2g={twice_g}, n=1)"))),
    }
}

/// N-free coefficient of the order-g density correction, same jump
/// normalization as [`rho_inf`]; the `hbar^{2g}` weight is applied when
/// combining.
pub fn rho_correction(engine: &CorrelatorEngine, twice_g: u32, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let z = Complex::new(theta.cos(), theta.sin());
    let jump = one_point(engine, twice_g, z.conj())? - one_point(engine, twice_g, z)?;
    let val = jump * ((engine.curve.b - engine.curve.a) / 2.0 * theta.sin())
        / (Complex::new(0.0, 2.0 * PI * engine.curve.potential.t0));
    debug_assert!(val.im.abs() < 1e-10 * (1.0 + val.re.abs()));
    Ok(val.re)
}

#[derive(Debug, Clone)]
pub struct DensitySeries {
    pub grid: ThetaGrid,
    /// Leading density, scaled to unit mass.
    pub rho0: Vec<f64>,
    /// Correction coefficients per doubled order (same scaling as rho0).
    pub corrections: BTreeMap<u32, Vec<f64>>,
    /// rho0 plus hbar^{2g}-weighted integrable corrections.
    pub combined: Vec<f64>,
    /// Integral of the raw (pre-scaling) rho0; the reported ratio.
    pub rho0_raw_integral: f64,
    pub correction_integrals: BTreeMap<u32, f64>,
    /// Orders excluded from `combined` because the edge behavior is not
    /// integrable.
    pub non_integrable: Vec<u32>,
    pub warnings: Vec<String>,
}

const QUAD_NODES: usize = 2000;

pub fn combined_density(
    engine: &CorrelatorEngine,
    max_twice_g: u32,
    grid: &ThetaGrid,
) -> Result<DensitySeries> {
    let raw_integral = midpoint_integral(|t| rho_inf(&engine.curve, t), QUAD_NODES)?;
    if !(raw_integral > 0.0) {
        return Err(Error::DegenerateConfiguration);
    }
    let rho0: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| rho_inf(&engine.curve, t).map(|v| v / raw_integral))
        .collect::<Result<_>>()?;

    let mut combined = rho0.clone();
    let mut corrections = BTreeMap::new();
    let mut correction_integrals = BTreeMap::new();
    let mut non_integrable = Vec::new();
    let mut warnings = Vec::new();

    for twice_g in 1..=max_twice_g {
        let coef = |t: f64| rho_correction(engine, twice_g, t).map(|v| v / raw_integral);
        let vals: Vec<f64> = grid.points().iter().map(|&t| coef(t)).collect::<Result<_>>()?;
        // Edge probe: an integrable correction stays bounded as theta -> 0
        // (continuous for g = 1/2); blow-up faster than 1/theta means the
        // integral diverges.
        let near = coef(1e-3)?;
        let nearer = coef(1e-4)?;
        let integrable = nearer.abs() <= 10.0 * near.abs().max(1.0);
        if integrable {
            let integral = midpoint_integral(coef, QUAD_NODES)?;
            if integral.abs() > 1e-8 {
                warnings.push(format!(
                    "correction 2g={twice_g} carries smooth mass {integral:.6e}; the full distributional correction restores zero total mass through point masses at the band edges, which an open theta grid cannot represent"
                ));
            }
            correction_integrals.insert(twice_g, integral);
            let weight = engine.params.hbar.powi(twice_g as i32);
            for (c, v) in combined.iter_mut().zip(&vals) {
                *c += weight * v;
            }
        } else {
            non_integrable.push(twice_g);
            warnings.push(format!(
                "correction 2g={twice_g} is not integrable at the edges; excluded from the combined density (weak convergence only)"
            ));
        }
        corrections.insert(twice_g, vals);
    }

    Ok(DensitySeries {
        grid: grid.clone(),
        rho0,
        corrections,
        combined,
        rho0_raw_integral: raw_integral,
        correction_integrals,
        non_integrable,
        warnings,
    })
}
