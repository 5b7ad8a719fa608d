//! Metropolis sampling of the eigenvalue measure
//! `|Delta(lambda)|^{2 beta} exp(-(N beta / t0) sum V(lambda_i))`
//! and histogram plumbing for the empirical comparisons.
//!
//! Single-site Gaussian proposals, one sweep = N proposals. The step size
//! is tuned toward 35% acceptance during burn-in only and frozen after, so
//! the recorded part of the chain satisfies detailed balance. Chains are
//! independent streams of a counter-based RNG keyed by (seed, chain), which
//! keeps runs reproducible whatever the thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{solve_endpoints, Potential, SpectralCurve};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub potential: Potential,
    pub beta: f64,
    pub n_eigen: usize,
    pub sweeps: u64,
    pub burn_in: u64,
    pub step_scale: f64,
    pub seed: u64,
    pub chains: usize,
    pub bins: usize,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if !(self.beta > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        if self.n_eigen < 2 {
            return Err(Error::InvalidInput("n_eigen must be >= 2".into()));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidInput("sweeps must exceed burn_in".into()));
        }
        if !(self.step_scale > 0.0) {
            return Err(Error::InvalidInput("step_scale must be positive".into()));
        }
        if self.chains < 1 {
            return Err(Error::InvalidInput("chains must be >= 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidInput("bins must be >= 2".into()));
        }
        Ok(())
    }
}

/// log of the (unnormalized) joint eigenvalue density.
pub fn log_weight(cfg: &EnsembleConfig, lambda: &[f64]) -> Result<f64> {
    let n = lambda.len();
    let mut vdm = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (lambda[i] - lambda[j]).abs();
            if d == 0.0 {
                return Err(Error::DegenerateConfiguration);
            }
            vdm += d.ln();
        }
    }
    let v: f64 = lambda.iter().map(|&x| cfg.potential.v(x)).sum();
    Ok(2.0 * cfg.beta * vdm - n as f64 * cfg.beta / cfg.potential.t0 * v)
}

/// Change of log_weight under moving eigenvalue `i` to `prop`; O(N).
fn delta_log_weight(cfg: &EnsembleConfig, lambda: &[f64], i: usize, prop: f64) -> f64 {
    let mut vdm = 0.0;
    for (j, &lj) in lambda.iter().enumerate() {
        if j == i {
            continue;
        }
        let dn = (prop - lj).abs();
        if dn == 0.0 {
            return f64::NEG_INFINITY;
        }
        vdm += dn.ln() - (lambda[i] - lj).abs().ln();
    }
    let dv = cfg.potential.v(prop) - cfg.potential.v(lambda[i]);
    2.0 * cfg.beta * vdm - lambda.len() as f64 * cfg.beta / cfg.potential.t0 * dv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// Bin edges, length B+1.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// All recorded samples, including those outside the range.
    pub total: u64,
    /// Samples that fell outside the binned range.
    pub outside: u64,
    /// counts / (in-range total * bin width); integrates to one.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        let edges = (0..=bins)
            .map(|k| lo + (hi - lo) * k as f64 / bins as f64)
            .collect();
        Histogram {
            edges,
            counts: vec![0; bins],
            total: 0,
            outside: 0,
            density: vec![0.0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn width(&self) -> f64 {
        (self.hi() - self.lo()) / self.bins() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins())
            .map(|k| self.lo() + (k as f64 + 0.5) * self.width())
            .collect()
    }

    pub fn record(&mut self, x: f64) {
        self.total += 1;
        let rel = (x - self.lo()) / self.width();
        if rel < 0.0 || x >= self.hi() {
            self.outside += 1;
            return;
        }
        let k = (rel as usize).min(self.bins() - 1);
        self.counts[k] += 1;
    }

    pub fn finalize(&mut self) {
        let inside = self.total - self.outside;
        if inside == 0 {
            return;
        }
        let norm = 1.0 / (inside as f64 * self.width());
        for (d, &c) in self.density.iter_mut().zip(&self.counts) {
            *d = c as f64 * norm;
        }
    }

    /// Pure pointwise reduction; associative and order-independent.
    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.edges, other.edges, "histogram ranges must match");
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        self.outside += other.outside;
        self.finalize();
    }

    /// L1 distance between the binned density and a model density sampled
    /// at bin centers.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, model: F) -> f64 {
        let w = self.width();
        self.centers()
            .iter()
            .zip(&self.density)
            .map(|(&x, &d)| (d - model(x)).abs() * w)
            .sum()
    }

    /// Kolmogorov-Smirnov distance against the model's binned CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, model: F) -> f64 {
        let w = self.width();
        let mut emp = 0.0;
        let mut th = 0.0;
        let mut ks = 0.0f64;
        for (&x, &d) in self.centers().iter().zip(&self.density) {
            emp += d * w;
            th += model(x) * w;
            ks = ks.max((emp - th).abs());
        }
        ks
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerStats {
    /// Post-burn-in acceptance rate pooled over chains.
    pub acceptance: f64,
    pub acceptance_per_chain: Vec<f64>,
    /// Tuned step sizes at the end of burn-in.
    pub step_per_chain: Vec<f64>,
    pub outside_fraction: f64,
    pub warnings: Vec<String>,
}

/// Deterministic inverse-CDF draw of n starting points from the limiting
/// density, on a 1024-point table.
fn init_from_rho0(curve: &SpectralCurve, n: usize) -> Vec<f64> {
    const TABLE: usize = 1024;
    let (a, b) = (curve.a, curve.b);
    let dx = (b - a) / TABLE as f64;
    let mut cdf = Vec::with_capacity(TABLE);
    let mut acc = 0.0;
    for j in 0..TABLE {
        let x = a + (j as f64 + 0.5) * dx;
        acc += curve.density_x(x).max(0.0) * dx;
        cdf.push(acc);
    }
    let norm = *cdf.last().unwrap();
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64 * norm;
            let j = cdf.partition_point(|&c| c < u);
            a + (j.min(TABLE - 1) as f64 + 0.5) * dx
        })
        .collect()
}

struct ChainResult {
    hist: Histogram,
    accepted: u64,
    attempted: u64,
    step: f64,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1-u keeps the log argument in (0, 1].
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn run_single_chain(cfg: &EnsembleConfig, curve: &SpectralCurve, chain: usize) -> ChainResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64 + 1);
    let n = cfg.n_eigen;
    let mut lambda = init_from_rho0(curve, n);
    let mut step = cfg.step_scale * (curve.b - curve.a) / (n as f64).sqrt();

    let pad = 0.2 * (curve.b - curve.a);
    let mut hist = Histogram::new(curve.a - pad, curve.b + pad, cfg.bins);
    let mut accepted = 0u64;
    let mut attempted = 0u64;

    for sweep in 0..cfg.sweeps {
        let mut acc_sweep = 0u64;
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let prop = lambda[i] + step * standard_normal(&mut rng);
            let delta = delta_log_weight(cfg, &lambda, i, prop);
            let accept = delta >= 0.0 || rng.gen::<f64>() < delta.exp();
            if accept {
                lambda[i] = prop;
                acc_sweep += 1;
            }
        }
        if sweep < cfg.burn_in {
            // Multiplicative tuning toward 35% acceptance, burn-in only.
            let rate = acc_sweep as f64 / n as f64;
            step *= ((rate + 0.01) / 0.36).powf(0.25).clamp(0.5, 2.0);
        } else {
            accepted += acc_sweep;
            attempted += n as u64;
            for &x in &lambda {
                hist.record(x);
            }
        }
    }
    hist.finalize();
    ChainResult { hist, accepted, attempted, step }
}

/// Run all chains (in parallel) and pool the post-burn-in samples.
pub fn run_chains(cfg: &EnsembleConfig) -> Result<(Histogram, SamplerStats)> {
    cfg.validate()?;
    let curve = solve_endpoints(&cfg.potential, None)?;
    let results: Vec<ChainResult> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_single_chain(cfg, &curve, c))
        .collect();

    let mut merged = results[0].hist.clone();
    for r in &results[1..] {
        merged.merge(&r.hist);
    }
    merged.finalize();

    let accepted: u64 = results.iter().map(|r| r.accepted).sum();
    let attempted: u64 = results.iter().map(|r| r.attempted).sum();
    let acceptance = accepted as f64 / attempted as f64;
    let outside_fraction = merged.outside as f64 / merged.total as f64;
    let mut warnings = Vec::new();
    if outside_fraction > 0.01 {
        warnings.push(format!(
            "{:.2}% of samples fell outside the padded support",
            100.0 * outside_fraction
        ));
    }
    if !(0.2..=0.6).contains(&acceptance) {
        warnings.push(format!("acceptance rate {acceptance:.3} outside [0.2, 0.6]"));
    }
    let stats = SamplerStats {
        acceptance,
        acceptance_per_chain: results
            .iter()
            .map(|r| r.accepted as f64 / r.attempted.max(1) as f64)
            .collect(),
        step_per_chain: results.iter().map(|r| r.step).collect(),
        outside_fraction,
        warnings,
    };
    Ok((merged, stats))
}

/// Re-express an x-histogram in the angle variable theta = arccos(u/2),
/// u = 4(x - (a+b)/2)/(b-a), u clamped to [-2, 2]. In-cut counts are
/// apportioned uniformly in theta over each x-bin's image; integer counts
/// are preserved by largest-remainder rounding. Mass beyond the cut
/// (finite-N leakage) is clamped into the extreme bins, per the clamp in
/// the map, and its fraction returned alongside for reporting.
pub fn histogram_in_theta(h: &Histogram, curve: &SpectralCurve, bins: usize) -> (Histogram, f64) {
    use std::f64::consts::PI;
    let (a, b) = (curve.a, curve.b);
    let center = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    let theta_of = |x: f64| ((x - center) / half).clamp(-1.0, 1.0).acos();

    let mut out = Histogram::new(0.0, PI, bins);
    let tw = PI / bins as f64;
    let mut beyond = 0.0;
    let mut carried: u64 = 0;

    for (k, &count) in h.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let (x0, x1) = (h.edges[k], h.edges[k + 1]);
        let len = x1 - x0;
        let inside_lo = x0.max(a);
        let inside_hi = x1.min(b);
        let mut share = vec![0.0f64; bins];

        // Clamped mass beyond the cut lands at theta = 0 or pi exactly,
        // i.e. in the extreme bins; it is also tallied for reporting.
        let above = (x1 - x0.max(b)).max(0.0) / len * count as f64;
        let below = (x1.min(a) - x0).max(0.0) / len * count as f64;
        share[0] += above;
        share[bins - 1] += below;
        beyond += above + below;

        if inside_hi > inside_lo {
            // Distribute the in-cut mass uniformly in theta over the image
            // interval; exact whenever the underlying theta-density is flat
            // at the bin scale, which near the edges it is (the x-density
            // edge singularity is exactly the Jacobian of the map).
            let w_in = (inside_hi - inside_lo) / len * count as f64;
            let t_lo = theta_of(inside_hi);
            let t_hi = theta_of(inside_lo);
            let span = t_hi - t_lo;
            if span <= f64::EPSILON {
                let j = ((t_lo / tw) as usize).min(bins - 1);
                share[j] += w_in;
            } else {
                for (j, s) in share.iter_mut().enumerate() {
                    let lo = t_lo.max(tw * j as f64);
                    let hi = t_hi.min(tw * (j + 1) as f64);
                    if hi > lo {
                        *s += (hi - lo) / span * w_in;
                    }
                }
            }
        }

        // Largest-remainder apportionment keeps integer counts exact.
        let mut floors: Vec<u64> = share.iter().map(|s| s.floor() as u64).collect();
        let assigned: u64 = floors.iter().sum();
        let mut remainder: Vec<(usize, f64)> = share
            .iter()
            .enumerate()
            .map(|(j, s)| (j, s - s.floor()))
            .collect();
        remainder.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        for &(j, _) in remainder.iter().take(count.saturating_sub(assigned) as usize) {
            floors[j] += 1;
        }
        for (c, f) in out.counts.iter_mut().zip(&floors) {
            *c += f;
        }
        out.total += count;
        carried += count;
    }
    out.finalize();
    let frac = if carried > 0 { beyond / carried as f64 } else { 0.0 };
    (out, frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_cfg() -> EnsembleConfig {
        EnsembleConfig {
            potential: Potential::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap(),
            beta: 1.0,
            n_eigen: 50,
            sweeps: 20_000,
            burn_in: 2_000,
            step_scale: 1.0,
            seed: 7,
            chains: 2,
            bins: 60,
        }
    }

    #[test]
    fn log_weight_small_case() {
        let mut cfg = gaussian_cfg();
        cfg.n_eigen = 2;
        let w = log_weight(&cfg, &[0.0, 1.0]).unwrap();
        assert_relative_eq!(w, -1.0, epsilon = 1e-14);
        // Permutation and parity invariance.
        let lam = [0.3, -1.2, 0.9];
        let w1 = log_weight(&cfg, &lam).unwrap();
        let w2 = log_weight(&cfg, &[-1.2, 0.9, 0.3]).unwrap();
        let w3 = log_weight(&cfg, &[-0.3, 1.2, -0.9]).unwrap();
        assert_relative_eq!(w1, w2, epsilon = 1e-12);
        assert_relative_eq!(w1, w3, epsilon = 1e-12);
        assert!(matches!(
            log_weight(&cfg, &[0.5, 0.5]),
            Err(Error::DegenerateConfiguration)
        ));
    }

    #[test]
    fn delta_matches_full_recomputation() {
        let cfg = gaussian_cfg();
        let lam = vec![-1.0, -0.2, 0.4, 1.3];
        let mut moved = lam.clone();
        moved[2] = 0.75;
        let delta = delta_log_weight(&cfg, &lam, 2, 0.75);
        let full = log_weight(&cfg, &moved).unwrap() - log_weight(&cfg, &lam).unwrap();
        assert_relative_eq!(delta, full, epsilon = 1e-10);
    }

    #[test]
    fn semicircle_is_recovered() {
        let cfg = gaussian_cfg();
        let (hist, stats) = run_chains(&cfg).unwrap();
        let semicircle = |x: f64| {
            if x.abs() >= 2.0 {
                0.0
            } else {
                (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
            }
        };
        let l1 = hist.l1_distance(semicircle);
        assert!(l1 < 0.1, "L1 = {l1}");
        assert!(
            (0.2..=0.6).contains(&stats.acceptance),
            "acceptance = {}",
            stats.acceptance
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = gaussian_cfg();
        let (h1, s1) = run_chains(&cfg).unwrap();
        let (h2, s2) = run_chains(&cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(s1.acceptance, s2.acceptance);
        let mut other = cfg;
        other.seed = 8;
        let (h3, _) = run_chains(&other).unwrap();
        assert_ne!(h1.counts, h3.counts);
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = Histogram::new(0.0, 1.0, 4);
        let mut b = Histogram::new(0.0, 1.0, 4);
        for x in [0.1, 0.15, 0.7] {
            a.record(x);
        }
        for x in [0.4, 0.9, 0.95, 0.3] {
            b.record(x);
        }
        a.finalize();
        b.finalize();
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab.counts, ba.counts);
        assert_eq!(ab.total, ba.total);
    }

    #[test]
    fn theta_transform_endpoints_and_flatness() {
        let p = Potential::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let curve = solve_endpoints(&p, None).unwrap();

        // Samples hugging the endpoints land in the extreme theta bins
        // (x-bins fine enough for the whole bin image to fit in one
        // theta bin).
        let mut h = Histogram::new(curve.a - 0.8, curve.b + 0.8, 4000);
        for _ in 0..100 {
            h.record(curve.b - 1e-4);
            h.record(curve.a + 1e-4);
        }
        h.finalize();
        let (t, beyond) = histogram_in_theta(&h, &curve, 40);
        assert_eq!(t.counts[0], 100);
        assert_eq!(t.counts[39], 100);
        assert_eq!(t.total, 200);
        assert!(beyond < 0.70); // straddling edge bins smear some mass out

        // Uniform-in-theta input becomes flat after the transform.
        let mut h = Histogram::new(curve.a - 0.8, curve.b + 0.8, 400);
        let m = 400_000;
        for i in 0..m {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
            h.record((curve.a + curve.b) / 2.0 + (curve.b - curve.a) / 2.0 * theta.cos());
        }
        h.finalize();
        let (t, _) = histogram_in_theta(&h, &curve, 20);
        let flat = 1.0 / std::f64::consts::PI;
        for d in &t.density {
            assert!((d - flat).abs() < 0.05 * flat, "density {d} vs {flat}");
        }
    }

    #[test]
    fn histogram_density_has_unit_mass() {
        let cfg = gaussian_cfg();
        let (hist, _) = run_chains(&cfg).unwrap();
        let mass: f64 = hist.density.iter().map(|d| d * hist.width()).sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_eigenvalue_marginal_matches_quadrature() {
        // Exact marginal of the N=2 Gaussian ensemble by 2-d quadrature.
        let mut cfg = gaussian_cfg();
        cfg.n_eigen = 2;
        cfg.sweeps = 400_000;
        cfg.burn_in = 20_000;
        cfg.chains = 1;
        cfg.bins = 40;
        let (hist, _) = run_chains(&cfg).unwrap();

        let weight = |x: f64, y: f64| {
            ((x - y).abs().powf(2.0 * cfg.beta))
                * (-2.0 * cfg.beta * (x * x / 2.0 + y * y / 2.0)).exp()
        };
        let grid = 600;
        let (lo, hi) = (-4.0, 4.0);
        let dx = (hi - lo) / grid as f64;
        let marginal = |x: f64| -> f64 {
            (0..grid)
                .map(|j| weight(x, lo + (j as f64 + 0.5) * dx) * dx)
                .sum()
        };
        let mut norm = 0.0;
        for j in 0..grid {
            norm += marginal(lo + (j as f64 + 0.5) * dx) * dx;
        }
        let l1 = hist.l1_distance(|x| marginal(x) / norm);
        assert!(l1 < 0.05, "L1 = {l1}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = gaussian_cfg();
        cfg.sweeps = 100;
        cfg.burn_in = 100;
        assert!(cfg.validate().is_err());
        let mut cfg = gaussian_cfg();
        cfg.n_eigen = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = gaussian_cfg();
        cfg.step_scale = 0.0;
        assert!(cfg.validate().is_err());
    }
}
