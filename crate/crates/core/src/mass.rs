//! `L^p` mass of the Jacobian over the unit disk: the exact generation-by-generation
//! series and a Monte Carlo cross-check that only uses the pointwise Jacobian.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{locate_on, ConstructionParams, Location, Side, Similarity};
use crate::map::jacobian;
use crate::rng::{stream, uniform_in_disk};
use crate::Complex;

/// `|p − K/(K−1)|` below which the logarithmic annulus formula is used.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpMassReport {
    pub p: f64,
    pub gamma: f64,
    /// `c_m σ^γ`, the ratio between consecutive generations.
    pub ratio: f64,
    pub converges: bool,
    pub critical: bool,
    /// Sum of the full series; infinite (`null` in JSON) when it diverges.
    #[serde(serialize_with = "finite_or_null")]
    pub total: f64,
    /// Mass of the flat region `G^N ∖ ∪ P^{N+1}` at generation `N`.
    pub flat_terms: Vec<f64>,
    /// Mass of the rings `P^{N+1} ∖ G^{N+1}` nested in generation `N`.
    pub annulus_terms: Vec<f64>,
    /// `partial_sums[g]`: mass of every point resolved within `g` descents.
    pub partial_sums: Vec<f64>,
}

/// `γ = 2p(1/K − 1) + 2`.
pub fn gamma(p: f64, k: f64) -> f64 {
    2.0 * p * (1.0 / k - 1.0) + 2.0
}

pub fn critical_exponent(k: f64) -> f64 {
    if k > 1.0 {
        k / (k - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Annulus integral of `(Jg)^p` normalized to a unit protecting disk:
/// `(2π/K^p)|(1 − σ^γ)/γ|`, or `(2π/K^p) log(1/σ)` at the critical exponent.
pub fn annulus_factor(p: f64, k: f64, sigma: f64, critical: bool) -> f64 {
    let g = gamma(p, k);
    let lead = 2.0 * PI / k.powf(p);
    if critical {
        lead * (1.0 / sigma).ln()
    } else {
        lead * ((1.0 - sigma.powf(g)) / g).abs()
    }
}

pub fn lp_mass_closed_form(p: f64, params: &ConstructionParams, n_max: usize) -> Result<LpMassReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("p = {p} violates p >= 1")));
    }
    let (k, sigma, c) = (params.k(), params.sigma(), params.c_m());
    let critical = (p - critical_exponent(k)).abs() <= CRITICAL_TOLERANCE;
    let g = if critical { 0.0 } else { gamma(p, k) };
    let ratio = c * sigma.powf(g);
    let annulus = annulus_factor(p, k, sigma, critical);

    let mut flat_terms = Vec::with_capacity(n_max + 1);
    let mut annulus_terms = Vec::with_capacity(n_max + 1);
    let mut partial_sums = Vec::with_capacity(n_max + 2);
    partial_sums.push(0.0);
    let mut level = 1.0;
    let mut running = 0.0;
    for _ in 0..=n_max {
        let flat = level * PI * (1.0 - c);
        let ring = level * c * annulus;
        running += flat + ring;
        flat_terms.push(flat);
        annulus_terms.push(ring);
        partial_sums.push(running);
        level *= ratio;
    }
    let converges = ratio < 1.0;
    let total = if converges {
        (PI * (1.0 - c) + c * annulus) / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok(LpMassReport {
        p,
        gamma: g,
        ratio,
        converges,
        critical,
        total,
        flat_terms,
        annulus_terms,
        partial_sums,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Uniform points in the unit disk.
    Uniform,
    /// One stratum per termination depth `k`: uniform points of `G^k ∖ ∪ G^{k+1}`,
    /// weighted by its exact area.
    Stratified,
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampling::Uniform),
            "stratified" => Ok(Sampling::Stratified),
            other => Err(Error::Input(format!("unknown sampling `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub undefined: usize,
    pub undefined_fraction: f64,
    /// Exact area of the union of generation-`depth` generating disks.
    pub unresolved_area: f64,
    pub sampling: Sampling,
}

const BATCH: usize = 4096;

#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
    undefined: usize,
}

impl Moments {
    fn push(&mut self, v: Option<f64>) {
        self.n += 1;
        match v {
            Some(x) => {
                self.sum += x;
                self.sum_sq += x * x;
            }
            None => self.undefined += 1,
        }
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.undefined += o.undefined;
        self
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Variance of the sample mean.
    fn mean_variance(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sum_sq / n - m * m) * n / (n - 1.0)).max(0.0) / n
    }
}

/// Run `count` samples in fixed-size batches, one RNG stream per batch, and
/// merge in batch order.
fn batched<F>(seed: u64, stream_base: u64, count: usize, sample: F) -> Moments
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<f64> + Sync,
{
    use rayon::prelude::*;
    let batches = count.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, stream_base + b as u64);
            let n = BATCH.min(count - b * BATCH);
            let mut acc = Moments::default();
            for _ in 0..n {
                acc.push(sample(&mut rng));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Uniform point in `G^k_J ∖ ∪_i G^{k+1}_{J·i}` for a uniformly random chain of length `k`.
pub(crate) fn sample_stratum<R: Rng>(rng: &mut R, params: &ConstructionParams, k: usize) -> Complex {
    let ratio = params.ratio(Side::Source);
    let mut map = Similarity::IDENTITY;
    for _ in 0..k {
        let i = rng.random_range(0..params.m());
        map = map.compose(&Similarity::scaling(params.center(i), ratio));
    }
    loop {
        let u = uniform_in_disk(rng);
        if !matches!(locate_on(u, params, Side::Source), Location::Inside { .. }) {
            return map.apply(u);
        }
    }
}

/// Monte Carlo estimate of `∫_𝔻 (Jφ)^p` over the points resolved within
/// `depth_max` descents. Unresolved and seam points contribute zero and are counted.
pub fn lp_mass_monte_carlo(
    p: f64,
    params: &ConstructionParams,
    samples: usize,
    depth_max: u32,
    seed: u64,
    sampling: Sampling,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::Input("at least one sample is required".into()));
    }
    let depth_max = depth_max.max(1);
    let fill = params.c_m() * params.sigma() * params.sigma();
    let unresolved_area = PI * fill.powi(depth_max as i32);
    let eval = |z: Complex| jacobian(z, params, depth_max).map(|j| j.powf(p));

    let (estimate, variance, undefined) = match sampling {
        Sampling::Uniform => {
            let mom = batched(seed, 0, samples, |rng| eval(uniform_in_disk(rng)));
            (PI * mom.mean(), PI * PI * mom.mean_variance(), mom.undefined)
        }
        Sampling::Stratified => {
            let strata = depth_max as usize;
            if samples < strata {
                return Err(Error::Input(format!(
                    "stratified sampling needs at least {strata} samples"
                )));
            }
            let mut est = 0.0;
            let mut var = 0.0;
            let mut undefined = 0;
            for k in 0..strata {
                let n = samples / strata + usize::from(k < samples % strata);
                let area = PI * fill.powi(k as i32) * (1.0 - fill);
                let mom = batched(seed, (k as u64) << 40, n, |rng| eval(sample_stratum(rng, params, k)));
                est += area * mom.mean();
                var += area * area * mom.mean_variance();
                undefined += mom.undefined;
            }
            (est, var, undefined)
        }
    };
    Ok(MonteCarloEstimate {
        estimate,
        std_error: variance.sqrt(),
        samples,
        undefined,
        undefined_fraction: undefined as f64 / samples as f64,
        unresolved_area,
        sampling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hex_params;

    #[test]
    fn unit_exponent_preserves_area() {
        for (t, k, m) in [(1.0, 2.0, 100), (0.8, 3.0, 37), (1.5, 1.5, 400)] {
            let p = hex_params(t, k, m).unwrap();
            let rep = lp_mass_closed_form(1.0, &p, 40).unwrap();
            assert!(rep.converges);
            assert!((rep.total - PI).abs() < 1e-12, "total {}", rep.total);
            // direct evaluation of the truncated series
            let direct: f64 = rep.flat_terms.iter().zip(&rep.annulus_terms).map(|(a, b)| a + b).sum();
            assert!((direct - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_mass_is_area() {
        let p = hex_params(1.2, 1.0, 19).unwrap();
        for q in [1.0, 2.0, 5.0] {
            let rep = lp_mass_closed_form(q, &p, 60).unwrap();
            assert!(!rep.critical);
            assert!((rep.total - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_sums_nondecreasing() {
        let p = hex_params(0.8, 2.0, 100).unwrap();
        for q in [1.0, 1.5, 2.0, 2.1] {
            let rep = lp_mass_closed_form(q, &p, 20).unwrap();
            assert!(rep.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn critical_switches_to_log_formula() {
        let p = hex_params(1.0, 2.0, 100).unwrap();
        let crit = lp_mass_closed_form(2.0, &p, 10).unwrap();
        assert!(crit.critical);
        assert_eq!(crit.gamma, 0.0);
        assert!((crit.ratio - p.c_m()).abs() < 1e-15);
        for side in [-1e-6, 1e-6] {
            let near = lp_mass_closed_form(2.0 + side, &p, 10).unwrap();
            assert!(!near.critical);
            assert!((near.total - crit.total).abs() < 1e-4 * crit.total);
        }
    }

    #[test]
    fn rejects_small_exponent() {
        let p = hex_params(1.0, 2.0, 100).unwrap();
        assert!(matches!(lp_mass_closed_form(0.5, &p, 3), Err(Error::Parameter(_))));
    }

    #[test]
    fn supercritical_diverges_for_thin_sets() {
        let p = hex_params(0.8, 2.0, 100).unwrap();
        let rep = lp_mass_closed_form(2.1, &p, 8).unwrap();
        assert!(!rep.converges);
        assert!(rep.ratio > 1.0);
        assert!(rep.total.is_infinite());
    }

    #[test]
    fn monte_carlo_conformal() {
        let p = hex_params(1.0, 1.0, 19).unwrap();
        let est = lp_mass_monte_carlo(1.0, &p, 200_000, 6, 7, Sampling::Uniform).unwrap();
        // J ≡ 1, so only the unresolved area is missing
        let expected = PI - est.unresolved_area;
        assert!((est.estimate - expected).abs() <= 3.0 * est.std_error + 1e-3);
    }

    #[test]
    fn monte_carlo_deterministic() {
        let p = hex_params(1.0, 2.0, 19).unwrap();
        let a = lp_mass_monte_carlo(1.5, &p, 20_000, 4, 42, Sampling::Stratified).unwrap();
        let b = lp_mass_monte_carlo(1.5, &p, 20_000, 4, 42, Sampling::Stratified).unwrap();
        assert_eq!(a, b);
        let c = lp_mass_monte_carlo(1.5, &p, 20_000, 4, 43, Sampling::Stratified).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }
}
