//! Empirical checks: box-counting dimensions, Hölder exponents, the packing
//! condition and growth of the Jacobian integral over disks.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{generation_centers, ConstructionParams, Disk, Side, Similarity, ENUMERATION_CAP};
use crate::map::{jacobian, phi};
use crate::rng::{log_uniform, stream, uniform_in_disk};
use crate::stats::fit_line;
use crate::Complex;

/// Minimum `r²` for a dimension fit to count as evidence.
pub const FIT_THRESHOLD: f64 = 0.99;

// ---------------------------------------------------------------------------
// Box counting

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub side: Side,
    pub generation: usize,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub r2: f64,
    pub accepted: bool,
}

/// Scales spanning generations `1..N−1` of `side`, `per_generation` per
/// factor of the contraction ratio, strictly decreasing.
pub fn default_scales(side: Side, params: &ConstructionParams, n: usize, per_generation: usize) -> Vec<f64> {
    let ratio = params.ratio(side);
    let top = ratio;
    let generations = n.saturating_sub(2).max(1);
    let steps = generations * per_generation.max(1);
    (0..=steps)
        .map(|j| top * ratio.powf(j as f64 / per_generation.max(1) as f64))
        .collect()
}

/// Grid offsets tried per scale, in units of the box side.
const GRID_SHIFTS: usize = 4;

/// Fewest boxes of side `scale` meeting `points` over a family of shifted grids.
fn box_count(points: &[Complex], scale: f64) -> u64 {
    let mut best = u64::MAX;
    for sx in 0..GRID_SHIFTS {
        for sy in 0..GRID_SHIFTS {
            let ox = sx as f64 / GRID_SHIFTS as f64;
            let oy = sy as f64 / GRID_SHIFTS as f64;
            let boxes: HashSet<(i64, i64)> = points
                .iter()
                .map(|z| ((z.re / scale + ox).floor() as i64, (z.im / scale + oy).floor() as i64))
                .collect();
            best = best.min(boxes.len() as u64);
        }
    }
    best
}

/// Box-counting dimension of the generation-`N` centers on `side`. When
/// `scales` is `None`, [`default_scales`] with 8 scales per generation is used.
pub fn box_dimension(
    side: Side,
    params: &ConstructionParams,
    n: usize,
    scales: Option<&[f64]>,
) -> Result<DimensionEstimate> {
    let scales = match scales {
        Some(s) => s.to_vec(),
        None => default_scales(side, params, n, 8),
    };
    if scales.len() < 3 {
        return Err(Error::Input("box counting needs at least 3 scales".into()));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::Input("scales must be positive and strictly decreasing".into()));
    }
    let points = generation_centers(n, side, params, ENUMERATION_CAP)?;
    let counts: Vec<u64> = scales.par_iter().map(|&s| box_count(&points, s)).collect();
    let xs: Vec<f64> = scales.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Numerical("degenerate box-count fit".into()))?;
    Ok(DimensionEstimate {
        side,
        generation: n,
        scales,
        counts,
        slope: fit.slope,
        r2: fit.r2,
        accepted: fit.r2 >= FIT_THRESHOLD,
    })
}

// ---------------------------------------------------------------------------
// Hölder estimation

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapSample {
    pub value: Complex,
    pub err_bound: f64,
    /// The value is not trustworthy here and the pair is excluded.
    pub flagged: bool,
}

pub trait PlaneMap: Sync {
    fn sample(&self, z: Complex) -> MapSample;
}

/// `φ` evaluated to a fixed depth.
pub struct PhiMap<'a> {
    pub params: &'a ConstructionParams,
    pub depth_max: u32,
}

impl PlaneMap for PhiMap<'_> {
    fn sample(&self, z: Complex) -> MapSample {
        let r = phi(z, self.params, self.depth_max);
        MapSample {
            value: r.value,
            err_bound: r.err_bound,
            flagged: false,
        }
    }
}

/// Adapts a closure to [`PlaneMap`].
pub struct FnMap<F>(pub F);

impl<F: Fn(Complex) -> MapSample + Sync> PlaneMap for FnMap<F> {
    fn sample(&self, z: Complex) -> MapSample {
        (self.0)(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairFamily {
    Uniform,
    Stratified,
    /// Neighbouring sibling centers `φ_{J·i}(0), φ_{J·j}(0)`.
    Centers,
    /// A center against points on its generating and protecting circles.
    Radial,
}

#[derive(Clone, Debug)]
pub struct HolderConfig<'a> {
    pub uniform_pairs: usize,
    pub stratified_pairs: usize,
    /// Smallest separation for stratified pairs; the largest is 1.
    pub min_separation: f64,
    /// Construction whose generating disks seed the stratified base points
    /// and the adversarial families.
    pub construction: Option<&'a ConstructionParams>,
    pub adversarial_generations: usize,
    /// Parent chains sampled per generation for the adversarial families.
    pub adversarial_parents: usize,
    pub bins_per_decade: usize,
}

impl Default for HolderConfig<'_> {
    fn default() -> Self {
        HolderConfig {
            uniform_pairs: 10_000,
            stratified_pairs: 10_000,
            min_separation: 1e-8,
            construction: None,
            adversarial_generations: 4,
            adversarial_parents: 32,
            bins_per_decade: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderRow {
    pub separation: f64,
    pub difference: f64,
    /// Certified upper bound `(|Δf| + err_z + err_w) / |z − w|^target`.
    pub ratio: f64,
    pub family: PairFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub exponent_target: f64,
    pub max_ratio: f64,
    pub worst_pair: Option<(Complex, Complex)>,
    /// Slope of the binned maximum of `log |Δf|` against `log |z − w|`.
    pub regression_exponent: Option<f64>,
    pub regression_r2: Option<f64>,
    /// Slope over the sibling-center family alone.
    pub adversarial_exponent: Option<f64>,
    pub pair_count: usize,
    pub flagged_pairs: usize,
    #[serde(skip)]
    pub rows: Vec<HolderRow>,
}

struct Pair {
    z: Complex,
    w: Complex,
    family: PairFamily,
}

fn random_chain_map<R: Rng>(rng: &mut R, params: &ConstructionParams, len: usize) -> Similarity {
    let ratio = params.ratio(Side::Source);
    (0..len).fold(Similarity::IDENTITY, |acc, _| {
        let i = rng.random_range(0..params.m());
        acc.compose(&Similarity::scaling(params.center(i), ratio))
    })
}

/// Neighbouring pairs in the base layout, at most `limit`, closest to the origin first.
fn neighbour_pairs(params: &ConstructionParams, limit: usize) -> Vec<(usize, usize)> {
    let zs = params.packing().centers();
    let reach = 2.02 * params.r() / crate::geometry::LAYOUT_SAFETY;
    let mut pairs = Vec::new();
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            if (zs[i] - zs[j]).norm() <= reach {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        let ka = zs[a.0].norm() + zs[a.1].norm();
        let kb = zs[b.0].norm() + zs[b.1].norm();
        ka.total_cmp(&kb)
    });
    pairs.truncate(limit);
    pairs
}

fn parent_maps(
    params: &ConstructionParams,
    generation: usize,
    limit: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Similarity> {
    let depth = generation - 1;
    let total = (params.m() as u128).checked_pow(depth as u32);
    match total {
        Some(count) if count <= limit as u128 => (0..count)
            .map(|k| {
                let chain = crate::geometry::MultiIndex::from_rank(k, depth, params.m());
                crate::geometry::source_map(&chain, params).expect("chain digits below m")
            })
            .collect(),
        _ => (0..limit).map(|_| random_chain_map(rng, params, depth)).collect(),
    }
}

fn sample_pairs(config: &HolderConfig, seed: u64) -> Vec<Pair> {
    let mut pairs = Vec::with_capacity(config.uniform_pairs + config.stratified_pairs);
    let mut rng = stream(seed, 0);
    for _ in 0..config.uniform_pairs {
        let z = uniform_in_disk(&mut rng);
        let w = loop {
            let w = uniform_in_disk(&mut rng);
            if (z - w).norm() < 1.0 {
                break w;
            }
        };
        pairs.push(Pair {
            z,
            w,
            family: PairFamily::Uniform,
        });
    }
    let mut rng = stream(seed, 1);
    let min_sep = config.min_separation.clamp(1e-15, 0.5);
    for _ in 0..config.stratified_pairs {
        let base = match config.construction {
            Some(params) => {
                let len = rng.random_range(0..=config.adversarial_generations);
                random_chain_map(&mut rng, params, len).apply(uniform_in_disk(&mut rng))
            }
            None => uniform_in_disk(&mut rng),
        };
        let sep = log_uniform(&mut rng, min_sep, 1.0);
        let dir = Complex::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
        pairs.push(Pair {
            z: base,
            w: base + sep * dir,
            family: PairFamily::Stratified,
        });
    }
    if let Some(params) = config.construction {
        let mut rng = stream(seed, 2);
        let neighbours = neighbour_pairs(params, 8);
        let sigma = params.sigma();
        let radial: Vec<f64> = vec![sigma, sigma.sqrt(), 0.5 * (1.0 + sigma), 1.0 - 1e-9];
        for generation in 1..=config.adversarial_generations {
            for map in parent_maps(params, generation, config.adversarial_parents, &mut rng) {
                for &(i, j) in &neighbours {
                    pairs.push(Pair {
                        z: map.apply(params.center(i)),
                        w: map.apply(params.center(j)),
                        family: PairFamily::Centers,
                    });
                }
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                let c = params.center(0);
                for &rho in &radial {
                    pairs.push(Pair {
                        z: map.apply(c),
                        w: map.apply(c + params.r() * Complex::from_polar(rho, theta)),
                        family: PairFamily::Radial,
                    });
                }
            }
        }
    }
    pairs
}

/// Binned envelope: for each separation bin, the pair with the largest difference.
fn envelope_fit(rows: &[HolderRow], bins_per_decade: usize) -> Option<(f64, f64)> {
    let per = bins_per_decade.max(1) as f64;
    let mut bins: std::collections::BTreeMap<i64, (f64, f64)> = std::collections::BTreeMap::new();
    for row in rows {
        if row.difference <= 0.0 {
            continue;
        }
        let key = (row.separation.log10() * per).floor() as i64;
        let point = (row.separation.ln(), row.difference.ln());
        bins.entry(key)
            .and_modify(|best| {
                if point.1 > best.1 {
                    *best = point;
                }
            })
            .or_insert(point);
    }
    if bins.len() < 3 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins.values().copied().unzip();
    fit_line(&xs, &ys).map(|f| (f.slope, f.r2))
}

/// Samples point pairs with `|z − w| < 1` and reports the largest certified
/// ratio `|f(z) − f(w)| / |z − w|^target` together with fitted exponents.
pub fn holder_estimate<M: PlaneMap>(map: &M, exponent_target: f64, config: &HolderConfig, seed: u64) -> HolderReport {
    let pairs: Vec<Pair> = sample_pairs(config, seed)
        .into_iter()
        .filter(|p| {
            let d = (p.z - p.w).norm();
            d > 0.0 && d < 1.0
        })
        .collect();
    let evaluated: Vec<Option<HolderRow>> = pairs
        .par_iter()
        .map(|p| {
            let (a, b) = (map.sample(p.z), map.sample(p.w));
            if a.flagged || b.flagged {
                return None;
            }
            let separation = (p.z - p.w).norm();
            let difference = (a.value - b.value).norm();
            let upper = difference + a.err_bound + b.err_bound;
            Some(HolderRow {
                separation,
                difference,
                ratio: upper / separation.powf(exponent_target),
                family: p.family,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(evaluated.len());
    let mut max_ratio = 0.0_f64;
    let mut worst_pair = None;
    let mut flagged_pairs = 0;
    for (p, row) in pairs.iter().zip(evaluated) {
        match row {
            Some(row) => {
                if row.ratio > max_ratio {
                    max_ratio = row.ratio;
                    worst_pair = Some((p.z, p.w));
                }
                rows.push(row);
            }
            None => flagged_pairs += 1,
        }
    }
    let envelope = envelope_fit(&rows, config.bins_per_decade);
    let centers: Vec<&HolderRow> = rows
        .iter()
        .filter(|r| r.family == PairFamily::Centers && r.difference > 0.0)
        .collect();
    let adversarial_exponent = {
        let xs: Vec<f64> = centers.iter().map(|r| r.separation.ln()).collect();
        let ys: Vec<f64> = centers.iter().map(|r| r.difference.ln()).collect();
        fit_line(&xs, &ys).map(|f| f.slope)
    };
    HolderReport {
        exponent_target,
        max_ratio,
        worst_pair,
        regression_exponent: envelope.map(|e| e.0),
        regression_r2: envelope.map(|e| e.1),
        adversarial_exponent,
        pair_count: pairs.len(),
        flagged_pairs,
        rows,
    }
}

// ---------------------------------------------------------------------------
// Packing condition

/// Number of generation-`N` source disks meeting the open disk `d`.
pub fn count_meeting(params: &ConstructionParams, n: usize, d: &Disk) -> u128 {
    let ratio = params.ratio(Side::Source);
    let m = params.m() as u128;
    let mut count = 0u128;
    let mut stack = vec![(Complex::new(0.0, 0.0), 0usize)];
    while let Some((c, level)) = stack.pop() {
        let radius = ratio.powi(level as i32);
        let dist = (c - d.center).norm();
        if dist >= radius + d.radius {
            continue;
        }
        if level == n {
            count += 1;
            continue;
        }
        if dist + radius <= d.radius {
            count += m.pow((n - level) as u32);
            continue;
        }
        for &z in params.packing().centers() {
            stack.push((c + radius * z, level + 1));
        }
    }
    count
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingRow {
    pub diameter: f64,
    pub center: Complex,
    pub count: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingReport {
    pub generation: usize,
    pub trials: usize,
    pub exponents: Vec<f64>,
    /// Largest `Σ diam(G)^s / diam(D)^s` observed, one per exponent.
    pub max_constants: Vec<f64>,
    pub worst_disks: Vec<Disk>,
    /// Same maximum restricted to disks at least as wide as a generation disk.
    pub max_constants_wide: Vec<f64>,
    /// Over the wide disks, the constant for a larger exponent never exceeds
    /// the one for the smallest exponent.
    pub inherited: bool,
    #[serde(skip)]
    pub rows: Vec<PackingRow>,
}

/// Packing ratio of one disk for exponent `s`.
pub fn packing_ratio(params: &ConstructionParams, n: usize, count: u128, d: &Disk, s: f64) -> f64 {
    let g = 2.0 * params.ratio(Side::Source).powi(n as i32);
    count as f64 * (g / d.diameter()).powf(s)
}

/// Random disks with log-uniform diameter in `[(σr)^N, 2]`: even trials are
/// centered uniformly in `𝔻`, odd ones near a random generation-`N` center.
pub fn packing_condition_check(
    params: &ConstructionParams,
    n: usize,
    exponents: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PackingReport> {
    crate::geometry::check_enumeration(params.m(), n, u128::MAX)?;
    if exponents.is_empty() {
        return Err(Error::Input("at least one exponent is required".into()));
    }
    if let Some(s) = exponents.iter().find(|&&s| s < params.t() - 1e-12) {
        return Err(Error::param(format!("packing exponent {s} is below t = {}", params.t())));
    }
    let lo = params.ratio(Side::Source).powi(n as i32);
    let rows: Vec<PackingRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial as u64);
            let diameter = log_uniform(&mut rng, lo, 2.0);
            let offset = 0.5 * diameter * uniform_in_disk(&mut rng);
            let center = if trial % 2 == 0 {
                uniform_in_disk(&mut rng)
            } else {
                random_chain_map(&mut rng, params, n).apply(Complex::new(0.0, 0.0)) + offset
            };
            let count = count_meeting(params, n, &Disk::new(center, 0.5 * diameter));
            PackingRow { diameter, center, count }
        })
        .collect();
    let generation_diameter = 2.0 * lo;
    let mut max_constants = vec![0.0_f64; exponents.len()];
    let mut max_constants_wide = vec![0.0_f64; exponents.len()];
    let mut worst_disks = vec![Disk::UNIT; exponents.len()];
    for row in &rows {
        let d = Disk::new(row.center, 0.5 * row.diameter);
        for (k, &s) in exponents.iter().enumerate() {
            let c = packing_ratio(params, n, row.count, &d, s);
            if c > max_constants[k] {
                max_constants[k] = c;
                worst_disks[k] = d;
            }
            if row.diameter >= generation_diameter {
                max_constants_wide[k] = max_constants_wide[k].max(c);
            }
        }
    }
    let smallest = exponents
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let inherited = max_constants_wide
        .iter()
        .all(|&c| c <= max_constants_wide[smallest] * (1.0 + 1e-12));
    Ok(PackingReport {
        generation: n,
        trials,
        exponents: exponents.to_vec(),
        max_constants,
        worst_disks,
        max_constants_wide,
        inherited,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Jacobian integral growth

/// `2t/t′`, the exponent in `∫_D Jφ ≲ diam(D)^{2t/t′}`.
pub fn growth_exponent(params: &ConstructionParams) -> f64 {
    2.0 * params.t() / params.t_prime()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenerationGrowth {
    pub generation: usize,
    pub diameter: f64,
    /// `|ψ_J(𝔻)| = π (σ^{1/K} r)^{2N}`.
    pub integral: f64,
    /// `integral / diam^{2t/t′}`.
    pub normalized: f64,
    /// `integral / (diam^{2t/t′} c_m^{(K−1)N/K})`, the full bound shape.
    pub normalized_shape: f64,
}

/// Closed-form Jacobian integral over a generation-`N` source disk.
pub fn generation_growth(params: &ConstructionParams, n: usize) -> GenerationGrowth {
    let diameter = 2.0 * params.ratio(Side::Source).powi(n as i32);
    let integral = PI * params.ratio(Side::Image).powi(2 * n as i32);
    let normalized = integral / diameter.powf(growth_exponent(params));
    let k = params.k();
    let packing_factor = params.c_m().powf((k - 1.0) * n as f64 / k);
    GenerationGrowth {
        generation: n,
        diameter,
        integral,
        normalized,
        normalized_shape: normalized / packing_factor,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub center: Complex,
    pub diameter: f64,
    pub integral: f64,
    pub normalized: f64,
    pub std_error: f64,
    pub undefined: usize,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub exponent: f64,
    pub cap: f64,
    pub max_normalized: f64,
    pub std_error_at_max: f64,
    pub worst_disk: Disk,
    pub flagged: Vec<Disk>,
    #[serde(skip)]
    pub rows: Vec<GrowthRow>,
}

/// Monte Carlo estimate of `∫_D Jφ` over a disk; unresolved and seam points count as zero.
pub fn disk_integral(
    params: &ConstructionParams,
    disk: &Disk,
    depth: u32,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64, usize) {
    let (mut sum, mut sum_sq, mut undefined) = (0.0, 0.0, 0usize);
    for _ in 0..samples {
        let z = disk.center + disk.radius * uniform_in_disk(rng);
        match jacobian(z, params, depth) {
            Some(j) => {
                sum += j;
                sum_sq += j * j;
            }
            None => undefined += 1,
        }
    }
    let n = samples.max(1) as f64;
    let mean = sum / n;
    let var = if samples > 1 {
        ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0) / n
    } else {
        0.0
    };
    let area = disk.area();
    (area * mean, area * var.sqrt(), undefined)
}

/// Random disks as in [`packing_condition_check`] (diameters down to the
/// generation-`depth` scale); flags disks whose normalized integral exceeds
/// `cap·(1 + 3·stderr)`.
pub fn integral_growth_check(
    params: &ConstructionParams,
    trials: usize,
    seed: u64,
    depth: u32,
    mc_samples: usize,
    cap: f64,
) -> Result<GrowthReport> {
    if mc_samples == 0 || trials == 0 {
        return Err(Error::Input("trials and samples must be positive".into()));
    }
    let depth = depth.max(1);
    let s = growth_exponent(params);
    let lo = params.ratio(Side::Source).powi(depth as i32);
    let rows: Vec<GrowthRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial as u64);
            let diameter = log_uniform(&mut rng, lo, 2.0);
            let offset = 0.5 * diameter * uniform_in_disk(&mut rng);
            let center = if trial % 2 == 0 {
                uniform_in_disk(&mut rng)
            } else {
                let len = rng.random_range(0..depth as usize);
                random_chain_map(&mut rng, params, len).apply(Complex::new(0.0, 0.0)) + offset
            };
            let disk = Disk::new(center, 0.5 * diameter);
            let (integral, err, undefined) = disk_integral(params, &disk, depth, mc_samples, &mut rng);
            let scale = diameter.powf(s);
            let normalized = integral / scale;
            let std_error = err / scale;
            GrowthRow {
                center,
                diameter,
                integral,
                normalized,
                std_error,
                undefined,
                flagged: normalized > cap * (1.0 + 3.0 * std_error),
            }
        })
        .collect();
    let worst = rows
        .iter()
        .max_by(|a, b| a.normalized.total_cmp(&b.normalized))
        .copied()
        .expect("at least one trial");
    Ok(GrowthReport {
        exponent: s,
        cap,
        max_normalized: worst.normalized,
        std_error_at_max: worst.std_error,
        worst_disk: Disk::new(worst.center, 0.5 * worst.diameter),
        flagged: rows
            .iter()
            .filter(|r| r.flagged)
            .map(|r| Disk::new(r.center, 0.5 * r.diameter))
            .collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{derive_params, hex_params, DiskPacking};

    #[test]
    fn source_dimension_matches_t() {
        let p = hex_params(1.0, 2.0, 19).unwrap();
        let est = box_dimension(Side::Source, &p, 4, None).unwrap();
        assert!((est.slope - 1.0).abs() < 0.05, "slope {}", est.slope);
        assert!(est.accepted);
        assert!(est.counts.windows(2).all(|w| w[1] >= w[0]));
        let img = box_dimension(Side::Image, &p, 4, None).unwrap();
        assert!((img.slope - p.dim_image()).abs() < 0.05, "slope {}", img.slope);
    }

    #[test]
    fn square_layout_has_unit_dimension() {
        let a = 0.45;
        let centers = vec![
            Complex::new(a, a),
            Complex::new(-a, a),
            Complex::new(-a, -a),
            Complex::new(a, -a),
        ];
        let p = derive_params(1.0, 1.0, DiskPacking::new(centers, 0.3).unwrap()).unwrap();
        let est = box_dimension(Side::Source, &p, 6, None).unwrap();
        assert!((est.slope - 1.0).abs() < 0.05, "slope {}", est.slope);
    }

    #[test]
    fn too_few_scales_rejected() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        assert!(matches!(
            box_dimension(Side::Source, &p, 2, Some(&[0.5, 0.1])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn identity_holder() {
        let p = hex_params(1.0, 1.0, 7).unwrap();
        let map = PhiMap { params: &p, depth_max: 20 };
        let config = HolderConfig {
            construction: Some(&p),
            ..HolderConfig::default()
        };
        let rep = holder_estimate(&map, 1.0, &config, 3);
        assert!((rep.regression_exponent.unwrap() - 1.0).abs() < 0.02);
        assert!((rep.max_ratio - 1.0).abs() < 1e-6, "max ratio {}", rep.max_ratio);
    }

    #[test]
    fn sibling_centers_realize_the_exponent() {
        let p = hex_params(1.0, 2.0, 19).unwrap();
        let map = PhiMap { params: &p, depth_max: 30 };
        let config = HolderConfig {
            uniform_pairs: 0,
            stratified_pairs: 0,
            construction: Some(&p),
            ..HolderConfig::default()
        };
        let rep = holder_estimate(&map, 0.75, &config, 1);
        let expected = p.t() / p.dim_image();
        assert!((rep.adversarial_exponent.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn whole_disk_packing_ratio() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        let n = 3;
        for diam in [2.0, 3.0, 10.0] {
            let d = Disk::new(Complex::new(0.0, 0.0), diam / 2.0);
            let count = count_meeting(&p, n, &d);
            assert_eq!(count, 343);
            let ratio = packing_ratio(&p, n, count, &d, p.t());
            assert!((ratio - diam.powf(-p.t()) * 2f64.powf(p.t())).abs() < 1e-12);
        }
    }

    #[test]
    fn count_matches_brute_force() {
        let p = hex_params(1.2, 2.0, 7).unwrap();
        let disks = crate::geometry::generation_disks(3, Side::Source, &p, ENUMERATION_CAP).unwrap();
        let mut rng = stream(5, 0);
        for _ in 0..200 {
            let d = Disk::new(uniform_in_disk(&mut rng), log_uniform(&mut rng, 1e-3, 1.0));
            let brute = disks.iter().filter(|(_, g)| g.intersects(&d)).count() as u128;
            assert_eq!(count_meeting(&p, 3, &d), brute);
        }
    }

    #[test]
    fn generation_growth_shape_is_constant() {
        let p = hex_params(1.0, 2.0, 100).unwrap();
        let base = generation_growth(&p, 1).normalized_shape;
        for n in 2..8 {
            let g = generation_growth(&p, n);
            assert!((g.normalized_shape / base - 1.0).abs() < 1e-9);
        }
    }
}
