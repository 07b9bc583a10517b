//! The nonremovability witness: a discrete self-similar measure on the image
//! Cantor set, its Cauchy transform `g`, and `f = g ∘ φ`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{generation_centers, m_for_epsilon, t_prime, ConstructionParams, Disk, Side, ENUMERATION_CAP};
use crate::map::{phi, wirtinger_fd};
use crate::rng::{log_uniform, stream};
use crate::verify::{holder_estimate, FnMap, HolderConfig, MapSample};
use crate::Complex;

/// Largest layout searched when choosing `m` for a counterexample.
pub const M_SEARCH_LIMIT: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub position: Complex,
    /// Weight is `count / denominator`.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCertificate {
    pub exponent: f64,
    /// Largest `μ(B(z, ρ)) / ρ^s` over the sampled balls.
    pub constant: f64,
    pub balls: usize,
    pub worst_ball: Disk,
    pub worst_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    denominator: u64,
    resolution: f64,
    growth: Option<GrowthCertificate>,
}

impl DiscreteMeasure {
    /// Atoms with integer counts over a common denominator; the counts must
    /// sum to the denominator exactly.
    pub fn new(atoms: Vec<Atom>, denominator: u64, resolution: f64) -> Result<Self> {
        let total: u128 = atoms.iter().map(|a| a.count as u128).sum();
        if atoms.iter().any(|a| a.count == 0) || total != denominator as u128 {
            return Err(Error::Input(format!(
                "atom counts sum to {total}, expected {denominator} with every count positive"
            )));
        }
        Ok(DiscreteMeasure {
            atoms,
            denominator,
            resolution,
            growth: None,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn weight(&self, atom: &Atom) -> f64 {
        atom.count as f64 / self.denominator as f64
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// Sum of counts over the denominator, computed in integers.
    pub fn total_mass_exact(&self) -> (u128, u64) {
        (self.atoms.iter().map(|a| a.count as u128).sum(), self.denominator)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn growth(&self) -> Option<&GrowthCertificate> {
        self.growth.as_ref()
    }

    /// The measure reflected across the real axis.
    pub fn conjugate(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    position: a.position.conj(),
                    count: a.count,
                })
                .collect(),
            denominator: self.denominator,
            resolution: self.resolution,
            growth: None,
        }
    }

    /// Mass of the open ball `B(z, ρ)` by direct summation.
    pub fn ball_mass(&self, z: Complex, rho: f64) -> f64 {
        let count: u64 = self
            .atoms
            .iter()
            .filter(|a| (a.position - z).norm() < rho)
            .map(|a| a.count)
            .sum();
        count as f64 / self.denominator as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthPolicy {
    /// Certify growth with exponent `dim_image − delta`.
    pub delta: f64,
    pub balls: usize,
    pub seed: u64,
    /// Certificate fails when the measured constant exceeds this.
    pub max_constant: f64,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        GrowthPolicy {
            delta: 0.01,
            balls: 2000,
            seed: 0,
            max_constant: 16.0,
        }
    }
}

/// Number of generation-`N` image centers in the open ball `B(z, ρ)`.
fn image_count(params: &ConstructionParams, n: usize, z: Complex, rho: f64) -> u64 {
    let ratio = params.ratio(Side::Image);
    let m = params.m() as u64;
    let mut count = 0u64;
    let mut stack = vec![(Complex::new(0.0, 0.0), 0usize)];
    while let Some((c, level)) = stack.pop() {
        let dist = (c - z).norm();
        if level == n {
            count += u64::from(dist < rho);
            continue;
        }
        let radius = ratio.powi(level as i32);
        if dist - radius >= rho {
            continue;
        }
        if dist + radius < rho {
            count += m.pow((n - level) as u32);
            continue;
        }
        for &w in params.packing().centers() {
            stack.push((c + radius * w, level + 1));
        }
    }
    count
}

/// Uniform atoms of weight `m^{−N}` at the generation-`N` image centers,
/// with a growth certificate over sampled balls `B(z, ρ)`, `ρ ≥ resolution`.
pub fn frostman_measure(params: &ConstructionParams, n: usize, policy: &GrowthPolicy) -> Result<DiscreteMeasure> {
    let centers = generation_centers(n, Side::Image, params, ENUMERATION_CAP)?;
    let denominator = centers.len() as u64;
    let resolution = params.ratio(Side::Image).powi(n as i32);
    let atoms = centers
        .into_iter()
        .map(|position| Atom { position, count: 1 })
        .collect();
    let mut measure = DiscreteMeasure::new(atoms, denominator, resolution)?;
    let s = params.dim_image() - policy.delta;
    let sampled: Vec<(Disk, f64, f64)> = (0..policy.balls)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(policy.seed, b as u64);
            let k = rng.random_range(0..measure.atoms.len());
            let rho = log_uniform(&mut rng, resolution, 2.0);
            let shift = rho * crate::rng::uniform_in_disk(&mut rng);
            let z = measure.atoms[k].position + shift;
            let mass = image_count(params, n, z, rho) as f64 / denominator as f64;
            (Disk::new(z, rho), mass, mass / rho.powf(s))
        })
        .collect();
    let (worst_ball, worst_mass, constant) = sampled
        .into_iter()
        .fold((Disk::UNIT, 0.0, 0.0), |best, cur| if cur.2 > best.2 { cur } else { best });
    if constant > policy.max_constant {
        return Err(Error::Numerical(format!(
            "growth certificate failed: ball at ({}, {}) radius {} has mass {worst_mass}, ratio {constant} > {}",
            worst_ball.center.re, worst_ball.center.im, worst_ball.radius, policy.max_constant
        )));
    }
    measure.growth = Some(GrowthCertificate {
        exponent: s,
        constant,
        balls: policy.balls,
        worst_ball,
        worst_mass,
    });
    Ok(measure)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CauchyValue {
    pub value: Complex,
    /// Some atom lies within `resolution/2` of the evaluation point.
    pub near_atom: bool,
}

/// `(1/π) Σ w_k / (z − a_k)`.
pub fn cauchy_transform(measure: &DiscreteMeasure, z: Complex) -> CauchyValue {
    let half = 0.5 * measure.resolution;
    let mut sum = Complex::new(0.0, 0.0);
    let mut near_atom = false;
    for a in &measure.atoms {
        let d = z - a.position;
        near_atom |= d.norm() < half;
        sum += a.count as f64 / d;
    }
    CauchyValue {
        value: sum / (PI * measure.denominator as f64),
        near_atom,
    }
}

/// Transform value plus a Lipschitz bound valid on `B(z, radius)`; `None`
/// when the ball reaches an atom.
fn cauchy_with_lipschitz(measure: &DiscreteMeasure, z: Complex, radius: f64) -> (CauchyValue, Option<f64>) {
    let value = cauchy_transform(measure, z);
    if radius == 0.0 {
        return (value, Some(0.0));
    }
    let mut bound = 0.0;
    for a in &measure.atoms {
        let gap = (z - a.position).norm() - radius;
        if gap <= 0.0 {
            return (value, None);
        }
        bound += a.count as f64 / (gap * gap);
    }
    (value, Some(bound / (PI * measure.denominator as f64)))
}

/// `2(1 + αK)/(1 + K)`: at or below this dimension the set is removable.
pub fn removability_threshold(alpha: f64, k: f64) -> f64 {
    2.0 * (1.0 + alpha * k) / (1.0 + k)
}

/// Largest `ε` with `t − threshold ≥ ε · (2/(K+1)) · (2 + (K−1)t)`.
pub fn epsilon_max(alpha: f64, k: f64, t: f64) -> f64 {
    (t - removability_threshold(alpha, k)) / ((2.0 / (k + 1.0)) * (2.0 + (k - 1.0) * t))
}

/// `(t′ − 2ε − 1) t/t′`.
pub fn expected_f_exponent(k: f64, t: f64, epsilon: f64) -> f64 {
    let tp = t_prime(t, k);
    (tp - 2.0 * epsilon - 1.0) * t / tp
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleSpec {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub t: f64,
    pub threshold: f64,
    pub epsilon_max: f64,
    pub epsilon: f64,
    pub expected_f_exponent: f64,
    pub m: usize,
    pub generation: usize,
    pub dim_image: f64,
    pub t_prime: f64,
}

/// Checks the parameter region and derives `ε` (half the admissible maximum).
pub fn counterexample_spec(alpha: f64, k: f64, t: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param(format!("K = {k} must be at least 1")));
    }
    if !(t > 0.0 && t < 2.0) {
        return Err(Error::param(format!("t = {t} must lie in (0, 2)")));
    }
    let threshold = removability_threshold(alpha, k);
    if t <= threshold {
        return Err(Error::param(format!(
            "t = {t} does not exceed 2(1+αK)/(1+K) = {threshold}; such sets are removable"
        )));
    }
    let eps_max = epsilon_max(alpha, k, t);
    Ok((threshold, eps_max, 0.5 * eps_max))
}

pub struct Counterexample {
    pub spec: CounterexampleSpec,
    pub params: ConstructionParams,
    pub measure: DiscreteMeasure,
    pub depth_max: u32,
}

impl Counterexample {
    /// `g(w)`, the Cauchy transform of the measure.
    pub fn g(&self, w: Complex) -> CauchyValue {
        cauchy_transform(&self.measure, w)
    }

    /// `f = g ∘ φ`, with the error of `φ` propagated through a local
    /// Lipschitz bound of `g`. Flagged near atoms or when no bound exists.
    pub fn f(&self, z: Complex) -> MapSample {
        let w = phi(z, &self.params, self.depth_max);
        let (g, lip) = cauchy_with_lipschitz(&self.measure, w.value, w.err_bound);
        match lip {
            Some(l) if !g.near_atom => MapSample {
                value: g.value,
                err_bound: l * w.err_bound,
                flagged: false,
            },
            _ => MapSample {
                value: g.value,
                err_bound: f64::INFINITY,
                flagged: true,
            },
        }
    }
}

/// Builds the measure on the generation-`N` image centers of the smallest
/// hexagonal layout whose image dimension is within `ε` of `t′`.
pub fn build_counterexample(alpha: f64, k: f64, t: f64, n: usize, depth_max: u32) -> Result<Counterexample> {
    let (threshold, eps_max, epsilon) = counterexample_spec(alpha, k, t)?;
    let (m, _) = m_for_epsilon(t, k, epsilon, M_SEARCH_LIMIT).ok_or_else(|| {
        Error::Construction(format!("no layout with m <= {M_SEARCH_LIMIT} reaches epsilon = {epsilon}"))
    })?;
    let params = crate::geometry::hex_params(t, k, m)?;
    let measure = frostman_measure(&params, n, &GrowthPolicy::default())?;
    let spec = CounterexampleSpec {
        alpha,
        k,
        t,
        threshold,
        epsilon_max: eps_max,
        epsilon,
        expected_f_exponent: expected_f_exponent(k, t, epsilon),
        m,
        generation: n,
        dim_image: params.dim_image(),
        t_prime: params.t_prime(),
    };
    Ok(Counterexample {
        spec,
        params,
        measure,
        depth_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub pairs: usize,
    pub grid: usize,
    pub fd_step: f64,
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            pairs: 10_000,
            grid: 48,
            fd_step: 1e-6,
            radii: vec![10.0, 100.0],
            angles: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub t: f64,
    pub epsilon: f64,
    pub expected_f_exponent: f64,
    pub measured_exponent: Option<f64>,
    pub max_ratio: f64,
    pub pair_count: usize,
    pub flagged_pairs: usize,
    pub dbar_max: f64,
    pub dbar_points: usize,
    /// Relative error `max |z g(z) − 1/π| / (1/π)` on the largest radius.
    pub residue_error: f64,
    pub residue_errors: Vec<(f64, f64)>,
    pub m: usize,
    pub generation: usize,
    pub scale_floor: f64,
}

/// Max `|∂̄g|` by central differences over a grid on `[−1.2, 1.2]²`, skipping
/// points within `2·resolution` of an atom.
pub fn dbar_max(measure: &DiscreteMeasure, grid: usize, h: f64) -> (f64, usize) {
    let keep_out = 2.0 * measure.resolution();
    let points: Vec<Complex> = (0..grid * grid)
        .map(|k| {
            let (i, j) = (k % grid, k / grid);
            let step = 2.4 / (grid.max(2) - 1) as f64;
            Complex::new(-1.2 + i as f64 * step, -1.2 + j as f64 * step)
        })
        .filter(|z| measure.atoms().iter().all(|a| (a.position - z).norm() >= keep_out))
        .collect();
    let max = points
        .par_iter()
        .map(|&z| wirtinger_fd(|w| cauchy_transform(measure, w).value, z, h).1.norm())
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    (max, points.len())
}

/// Max relative deviation of `z g(z)` from `1/π` on the circle `|z| = radius`.
pub fn residue_error(measure: &DiscreteMeasure, radius: f64, angles: usize) -> f64 {
    (0..angles.max(1))
        .map(|k| {
            let z = Complex::from_polar(radius, std::f64::consts::TAU * k as f64 / angles.max(1) as f64);
            ((z * cauchy_transform(measure, z).value) - 1.0 / PI).norm() * PI
        })
        .fold(0.0, f64::max)
}

pub fn verify_counterexample(cx: &Counterexample, config: &VerifyConfig, seed: u64) -> CounterexampleReport {
    let f = FnMap(|z| cx.f(z));
    let holder_config = HolderConfig {
        uniform_pairs: config.pairs / 2,
        stratified_pairs: config.pairs - config.pairs / 2,
        min_separation: 1e-6,
        construction: Some(&cx.params),
        adversarial_generations: 2,
        adversarial_parents: 8,
        bins_per_decade: 4,
    };
    let holder = holder_estimate(&f, cx.spec.alpha, &holder_config, seed);
    let (dbar, dbar_points) = dbar_max(&cx.measure, config.grid, config.fd_step);
    let residue_errors: Vec<(f64, f64)> = config
        .radii
        .iter()
        .map(|&r| (r, residue_error(&cx.measure, r, config.angles)))
        .collect();
    CounterexampleReport {
        alpha: cx.spec.alpha,
        k: cx.spec.k,
        t: cx.spec.t,
        epsilon: cx.spec.epsilon,
        expected_f_exponent: cx.spec.expected_f_exponent,
        measured_exponent: holder.regression_exponent,
        max_ratio: holder.max_ratio,
        pair_count: holder.pair_count,
        flagged_pairs: holder.flagged_pairs,
        dbar_max: dbar,
        dbar_points,
        residue_error: residue_errors.last().map_or(f64::NAN, |e| e.1),
        residue_errors,
        m: cx.spec.m,
        generation: cx.spec.generation,
        scale_floor: cx.measure.resolution(),
    }
}
