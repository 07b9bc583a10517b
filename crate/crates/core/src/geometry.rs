//! First-generation disk packing, construction parameters and multi-index
//! addressing of the generating disks on the source and image sides.
//!
//! Both Cantor sets are attractors of `m` pure scalings sharing the centers
//! `z_i` of the packing:
//!
//! ```text
//!     source:  z ↦ z_i + (σ r) z
//!     image:   z ↦ z_i + (σ^{1/K} r) z
//! ```
//!
//! with `σ` fixed by `m (σ r)^t = 1`. Chains are written outermost digit
//! first, so the map of `J·i` is the map of `J` composed with the map of `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// Shrink factor applied to the largest feasible common radius of the layout.
pub const LAYOUT_SAFETY: f64 = 0.999;

/// Default cap on `m^N` for enumerations.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Complex affine map `z ↦ a + b z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub a: Complex,
    pub b: Complex,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        a: Complex::new(0.0, 0.0),
        b: Complex::new(1.0, 0.0),
    };

    pub fn new(a: Complex, b: Complex) -> Self {
        debug_assert!(b.norm() > 0.0, "degenerate similarity");
        Similarity { a, b }
    }

    /// The scaling `z ↦ center + factor·z`, which maps the unit disk onto `D(center, factor)`.
    pub fn scaling(center: Complex, factor: f64) -> Self {
        Similarity::new(center, Complex::new(factor, 0.0))
    }

    #[inline]
    pub fn apply(&self, z: Complex) -> Complex {
        self.a + self.b * z
    }

    /// `self ∘ inner`.
    #[inline]
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            a: self.a + self.b * inner.a,
            b: self.b * inner.b,
        }
    }

    pub fn inverse(&self) -> Similarity {
        let inv = self.b.inv();
        Similarity { a: -self.a * inv, b: inv }
    }

    pub fn scale(&self) -> f64 {
        self.b.norm()
    }

    pub fn image_of_unit_disk(&self) -> Disk {
        Disk::new(self.a, self.scale())
    }
}

/// Open disk `D(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex,
    pub radius: f64,
}

impl Disk {
    pub const UNIT: Disk = Disk {
        center: Complex::new(0.0, 0.0),
        radius: 1.0,
    };

    pub fn new(center: Complex, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Disk { center, radius }
    }

    pub fn contains(&self, z: Complex) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// True when the open disks share a point.
    pub fn intersects(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() < self.radius + other.radius
    }

    /// True when the closed disk `other` lies inside the open disk `self`.
    pub fn contains_disk(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() + other.radius < self.radius
    }
}

/// Which of the two Cantor constructions a disk belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Image,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(Side::Source),
            "image" => Ok(Side::Image),
            other => Err(Error::Input(format!("unknown side `{other}` (expected source|image)"))),
        }
    }
}

/// Uniform grid over `[-1,1]²`; every disk is registered in each cell its
/// bounding box meets, so two intersecting disks always share a cell.
#[derive(Clone, Debug, Default)]
struct GridIndex {
    n: usize,
    cell: f64,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    fn build(centers: &[Complex], r: f64) -> Self {
        let n = ((1.0 / r).floor() as usize).clamp(1, 1024);
        let cell = 2.0 / n as f64;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n * n];
        for (i, c) in centers.iter().enumerate() {
            let (x0, x1) = Self::span(c.re - r, c.re + r, cell, n);
            let (y0, y1) = Self::span(c.im - r, c.im + r, cell, n);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    buckets[y * n + x].push(i as u32);
                }
            }
        }
        let mut starts = Vec::with_capacity(n * n + 1);
        let mut items = Vec::new();
        starts.push(0);
        for b in buckets {
            items.extend(b);
            starts.push(items.len() as u32);
        }
        GridIndex { n, cell, starts, items }
    }

    fn span(lo: f64, hi: f64, cell: f64, n: usize) -> (usize, usize) {
        let clamp = |v: f64| (((v + 1.0) / cell).floor().max(0.0) as usize).min(n - 1);
        (clamp(lo), clamp(hi))
    }

    fn cells(&self) -> impl Iterator<Item = &[u32]> {
        self.starts.windows(2).map(|w| &self.items[w[0] as usize..w[1] as usize])
    }

    #[inline]
    fn candidates(&self, z: Complex) -> &[u32] {
        if !(z.re > -1.0 && z.re < 1.0 && z.im > -1.0 && z.im < 1.0) {
            return &[];
        }
        let x = (((z.re + 1.0) / self.cell) as usize).min(self.n - 1);
        let y = (((z.im + 1.0) / self.cell) as usize).min(self.n - 1);
        let k = y * self.n + x;
        &self.items[self.starts[k] as usize..self.starts[k + 1] as usize]
    }
}

/// `m` equal disjoint disks `D(z_i, r)` inside the unit disk.
#[derive(Clone, Debug)]
pub struct DiskPacking {
    centers: Vec<Complex>,
    r: f64,
    c_m: f64,
    index: GridIndex,
}

impl DiskPacking {
    /// Validates an arbitrary layout: closed disks pairwise disjoint and inside the open unit disk.
    pub fn new(centers: Vec<Complex>, r: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Construction("a packing needs at least one disk".into()));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Construction(format!("radius {r} outside (0, 1)")));
        }
        for (i, c) in centers.iter().enumerate() {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Construction(format!("center {i} is not finite")));
            }
            if c.norm() + r >= 1.0 {
                return Err(Error::Construction(format!(
                    "disk {i} at {c} with radius {r} leaves the unit disk"
                )));
            }
        }
        let index = GridIndex::build(&centers, r);
        for bucket in index.cells() {
            for (k, &i) in bucket.iter().enumerate() {
                for &j in &bucket[k + 1..] {
                    let d = (centers[i as usize] - centers[j as usize]).norm();
                    if d <= 2.0 * r {
                        return Err(Error::Construction(format!(
                            "disks {i} and {j} overlap (distance {d}, radius {r})"
                        )));
                    }
                }
            }
        }
        let c_m = centers.len() as f64 * r * r;
        Ok(DiskPacking { centers, r, c_m, index })
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Complex] {
        &self.centers
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Area fraction `c_m = m r²`.
    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    /// Index and offset `z − z_i` of the protecting disk `D(z_i, r)` containing `z`.
    #[inline]
    pub fn find(&self, z: Complex) -> Option<(usize, Complex)> {
        for &i in self.index.candidates(z) {
            let d = z - self.centers[i as usize];
            if d.norm_sqr() < self.r * self.r {
                return Some((i as usize, d));
            }
        }
        None
    }

    /// Distance from `z` to the nearest protecting circle `|w − z_i| = r`,
    /// or infinity when no circle is close enough to share a grid cell.
    pub fn circle_gap(&self, z: Complex) -> f64 {
        self.index
            .candidates(z)
            .iter()
            .map(|&i| ((z - self.centers[i as usize]).norm() - self.r).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Hexagonal lattice points `a + b ω` (ω = e^{iπ/3}) sorted by norm, then angle.
#[derive(Clone, Debug)]
pub struct HexLadder {
    points: Vec<(i64, i64, i64)>,
}

impl HexLadder {
    /// Lattice points large enough to serve every `m ≤ m_max`.
    pub fn new(m_max: usize) -> Self {
        let reach = (m_max as f64).sqrt().ceil() as i64 + 2;
        let mut points = Vec::new();
        for a in -reach..=reach {
            for b in -reach..=reach {
                points.push((a, b, a * a + a * b + b * b));
            }
        }
        let angle = |&(a, b, _): &(i64, i64, i64)| {
            let (x, y) = Self::coords(a, b);
            y.atan2(x)
        };
        points.sort_by(|p, q| p.2.cmp(&q.2).then(angle(p).total_cmp(&angle(q))));
        // every point kept has norm below the reach, so no closer point is missing
        let limit = reach * reach * 3 / 4;
        points.retain(|p| p.2 <= limit);
        assert!(points.len() >= m_max, "hex ladder too small");
        HexLadder { points }
    }

    fn coords(a: i64, b: i64) -> (f64, f64) {
        (a as f64 + 0.5 * b as f64, b as f64 * 3f64.sqrt() / 2.0)
    }

    pub fn capacity(&self) -> usize {
        self.points.len()
    }

    /// Lattice norm of the farthest of the `m` innermost points.
    fn outer_norm(&self, m: usize) -> f64 {
        (self.points[m - 1].2 as f64).sqrt()
    }

    /// Common radius used for `m` disks: the lattice is scaled so the outer
    /// disks touch the unit circle and neighbours touch each other, then shrunk.
    pub fn radius(&self, m: usize) -> f64 {
        LAYOUT_SAFETY / (2.0 * self.outer_norm(m) + 1.0)
    }

    pub fn c_m(&self, m: usize) -> f64 {
        let r = self.radius(m);
        m as f64 * r * r
    }

    pub fn centers(&self, m: usize) -> Vec<Complex> {
        let spacing = 1.0 / (self.outer_norm(m) + 0.5);
        self.points[..m]
            .iter()
            .map(|&(a, b, _)| {
                let (x, y) = Self::coords(a, b);
                Complex::new(spacing * x, spacing * y)
            })
            .collect()
    }
}

/// Deterministic hexagonal layout of `m` equal disks in the unit disk.
pub fn build_packing(m: usize) -> Result<DiskPacking> {
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let ladder = HexLadder::new(m);
    let packing = DiskPacking::new(ladder.centers(m), ladder.radius(m))?;
    if m >= 100 && packing.c_m() < 0.5 {
        return Err(Error::Construction(format!(
            "layout for m = {m} reaches c_m = {} < 1/2",
            packing.c_m()
        )));
    }
    Ok(packing)
}

/// Dimension of the image set `t′ = 2Kt / (2 + (K−1)t)` for a set of dimension `t`.
pub fn t_prime(t: f64, k: f64) -> f64 {
    2.0 * k * t / (2.0 + (k - 1.0) * t)
}

/// Hölder exponent as the ratio `t / t′`.
pub fn holder_exponent_ratio(t: f64, k: f64) -> f64 {
    t / t_prime(t, k)
}

/// Hölder exponent as `1/K + (K−1)t / (2K)`.
pub fn holder_exponent_affine(t: f64, k: f64) -> f64 {
    1.0 / k + (k - 1.0) * t / (2.0 * k)
}

/// `1/dim = 1/t′ + (K−1)/(2K) · log(1/(m r²)) / log m`.
pub fn dim_image_identity(t: f64, k: f64, m: usize, r: f64) -> f64 {
    let lm = (m as f64).ln();
    let inv = 1.0 / t_prime(t, k) + (k - 1.0) / (2.0 * k) * (1.0 / (m as f64 * r * r)).ln() / lm;
    1.0 / inv
}

/// Self-similar dimension `log m / log(1/(σ^{1/K} r))` of the image set.
pub fn dim_image_direct(k: f64, m: usize, r: f64, sigma: f64) -> f64 {
    (m as f64).ln() / (1.0 / (sigma.powf(1.0 / k) * r)).ln()
}

/// The `σ` fixed by `m (σ r)^t = 1`.
pub fn sigma_for(t: f64, m: usize, r: f64) -> f64 {
    (m as f64).powf(-1.0 / t) / r
}

/// Everything derived from `(t, K, packing)`.
#[derive(Clone, Debug)]
pub struct ConstructionParams {
    t: f64,
    k: f64,
    packing: DiskPacking,
    sigma: f64,
    t_prime: f64,
    dim_image: f64,
    holder_exp: f64,
    image_sigma: f64,
}

/// Flat JSON record of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub m: usize,
    pub r: f64,
    pub c_m: f64,
    pub centers: Vec<[f64; 2]>,
    pub t: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub sigma: f64,
    pub t_prime: f64,
    pub dim_image: f64,
    pub holder_exp: f64,
}

pub fn derive_params(t: f64, k: f64, packing: DiskPacking) -> Result<ConstructionParams> {
    if !(t > 0.0 && t < 2.0) {
        return Err(Error::param(format!("t = {t} violates 0 < t < 2")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param(format!("K = {k} violates K >= 1")));
    }
    let m = packing.m();
    let r = packing.r();
    let sigma = sigma_for(t, m, r);
    if !(sigma < 1.0) {
        return Err(Error::param(format!(
            "sigma = m^(-1/t)/r = {sigma} violates sigma < 1 (m = {m}, r = {r}); increase m"
        )));
    }
    let tp = t_prime(t, k);
    Ok(ConstructionParams {
        t,
        k,
        sigma,
        t_prime: tp,
        dim_image: dim_image_identity(t, k, m, r),
        holder_exp: t / tp,
        image_sigma: sigma.powf(1.0 / k),
        packing,
    })
}

/// Convenience: hexagonal layout with `m` disks plus [`derive_params`].
pub fn hex_params(t: f64, k: f64, m: usize) -> Result<ConstructionParams> {
    derive_params(t, k, build_packing(m)?)
}

impl ConstructionParams {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn packing(&self) -> &DiskPacking {
        &self.packing
    }

    pub fn m(&self) -> usize {
        self.packing.m()
    }

    pub fn r(&self) -> f64 {
        self.packing.r()
    }

    pub fn c_m(&self) -> f64 {
        self.packing.c_m()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `σ^{1/K}`.
    pub fn image_sigma(&self) -> f64 {
        self.image_sigma
    }

    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    pub fn dim_image(&self) -> f64 {
        self.dim_image
    }

    pub fn holder_exp(&self) -> f64 {
        self.holder_exp
    }

    pub fn center(&self, i: usize) -> Complex {
        self.packing.centers[i]
    }

    /// Contraction ratio per generation: `σ r` on the source side, `σ^{1/K} r` on the image side.
    pub fn ratio(&self, side: Side) -> f64 {
        match side {
            Side::Source => self.sigma * self.r(),
            Side::Image => self.image_sigma * self.r(),
        }
    }

    /// Self-similar dimension `log m / log(1/ratio)` of either side.
    pub fn similarity_dimension(&self, side: Side) -> f64 {
        (self.m() as f64).ln() / (1.0 / self.ratio(side)).ln()
    }

    /// Largest deviation among the closed-form identities the parameters must satisfy.
    pub fn identity_residuals(&self) -> IdentityResiduals {
        let m = self.m() as f64;
        IdentityResiduals {
            normalization: (m * (self.sigma * self.r()).powf(self.t) - 1.0).abs(),
            holder: (holder_exponent_ratio(self.t, self.k) - holder_exponent_affine(self.t, self.k)).abs(),
            dim_image: (dim_image_direct(self.k, self.m(), self.r(), self.sigma) - self.dim_image).abs(),
        }
    }

    pub fn record(&self) -> ParamsRecord {
        ParamsRecord {
            m: self.m(),
            r: self.r(),
            c_m: self.c_m(),
            centers: self.packing.centers.iter().map(|c| [c.re, c.im]).collect(),
            t: self.t,
            k: self.k,
            sigma: self.sigma,
            t_prime: self.t_prime,
            dim_image: self.dim_image,
            holder_exp: self.holder_exp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `|m (σ r)^t − 1|`
    pub normalization: f64,
    pub holder: f64,
    pub dim_image: f64,
}

/// Chain `J = (j_1, …, j_N)` of digits in `[0, m)`; the first digit picks the outermost disk.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn root() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(digits: Vec<u32>, m: usize) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d as usize >= m) {
            return Err(Error::Input(format!("digit {d} out of range for m = {m}")));
        }
        Ok(MultiIndex(digits))
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: u32) -> Self {
        let mut d = self.0.clone();
        d.push(i);
        MultiIndex(d)
    }

    /// Decode the `index`-th chain of length `n` in lexicographic order.
    pub fn from_rank(mut index: u128, n: usize, m: usize) -> Self {
        let mut d = vec![0u32; n];
        for slot in d.iter_mut().rev() {
            *slot = (index % m as u128) as u32;
            index /= m as u128;
        }
        MultiIndex(d)
    }
}

fn chain_map(j: &MultiIndex, params: &ConstructionParams, side: Side) -> Result<Similarity> {
    let ratio = params.ratio(side);
    let mut acc = Similarity::IDENTITY;
    for &d in j.digits() {
        if d as usize >= params.m() {
            return Err(Error::Input(format!("digit {d} out of range for m = {}", params.m())));
        }
        acc = acc.compose(&Similarity::scaling(params.center(d as usize), ratio));
    }
    Ok(acc)
}

/// `φ_J`: maps the unit disk onto the generating disk `G_J`.
pub fn source_map(j: &MultiIndex, params: &ConstructionParams) -> Result<Similarity> {
    chain_map(j, params, Side::Source)
}

/// `ψ_J`: maps the unit disk onto the image generating disk `ψ_J(𝔻)`.
pub fn image_map(j: &MultiIndex, params: &ConstructionParams) -> Result<Similarity> {
    chain_map(j, params, Side::Image)
}

pub(crate) fn check_enumeration(m: usize, n: usize, cap: u128) -> Result<u128> {
    let count = (m as u128)
        .checked_pow(n as u32)
        .ok_or(Error::Size { requested: u128::MAX, cap })?;
    if count > cap {
        return Err(Error::Size { requested: count, cap });
    }
    Ok(count)
}

/// All `m^N` generation-`N` disks with their chains, in lexicographic order.
pub fn generation_disks(
    n: usize,
    side: Side,
    params: &ConstructionParams,
    cap: u128,
) -> Result<Vec<(MultiIndex, Disk)>> {
    let centers = generation_centers(n, side, params, cap)?;
    let radius = params.ratio(side).powi(n as i32);
    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(k, c)| (MultiIndex::from_rank(k as u128, n, params.m()), Disk::new(c, radius)))
        .collect())
}

/// Centers of the generation-`N` disks, lexicographic in the chain.
pub fn generation_centers(
    n: usize,
    side: Side,
    params: &ConstructionParams,
    cap: u128,
) -> Result<Vec<Complex>> {
    let count = check_enumeration(params.m(), n, cap)?;
    let ratio = params.ratio(side);
    let mut centers = Vec::with_capacity(count as usize);
    centers.push(Complex::new(0.0, 0.0));
    let mut scale = 1.0;
    for _ in 0..n {
        let zs = params.packing().centers();
        centers = centers
            .iter()
            .flat_map(|&c| zs.iter().map(move |&z| c + scale * z))
            .collect();
        scale *= ratio;
    }
    Ok(centers)
}

/// Position of a point relative to the first-generation disks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    /// Outside every protecting disk `D(z_i, r)`.
    Outside,
    /// `σ r ≤ |z − z_i| < r`; `local = (z − z_i)/r`.
    Annulus { index: usize, local: Complex },
    /// `|z − z_i| < σ r`; `local = (z − z_i)/(σ r)` lies in the unit disk.
    Inside { index: usize, local: Complex },
}

/// Source-side case split; the inner circle belongs to the annulus.
pub fn locate(z: Complex, params: &ConstructionParams) -> Location {
    locate_on(z, params, Side::Source)
}

/// Same case split against the image generating disks `D(z_i, σ^{1/K} r)`.
pub fn locate_image(w: Complex, params: &ConstructionParams) -> Location {
    locate_on(w, params, Side::Image)
}

#[inline]
pub(crate) fn locate_on(z: Complex, params: &ConstructionParams, side: Side) -> Location {
    match params.packing.find(z) {
        None => Location::Outside,
        Some((index, d)) => {
            let inner = params.ratio(side);
            if d.norm() < inner {
                Location::Inside {
                    index,
                    local: d / inner,
                }
            } else {
                Location::Annulus {
                    index,
                    local: d / params.r(),
                }
            }
        }
    }
}

/// Smallest `m` (searched up to `m_max`) whose hexagonal layout admits `σ < 1`
/// and brings the image dimension within `eps` of `t′`.
pub fn m_for_epsilon(t: f64, k: f64, eps: f64, m_max: usize) -> Option<(usize, f64)> {
    let ladder = HexLadder::new(m_max);
    let tp = t_prime(t, k);
    (2..=m_max).find_map(|m| {
        let r = ladder.radius(m);
        if sigma_for(t, m, r) >= 1.0 {
            return None;
        }
        let dim = dim_image_identity(t, k, m, r);
        (tp - dim <= eps).then_some((m, dim))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Brute-force check over all pairs, independent of the grid index.
    fn brute_force_valid(p: &DiskPacking) -> bool {
        let zs = p.centers();
        let inside = zs.iter().all(|z| z.norm() + p.r() < 1.0);
        let disjoint = (0..zs.len()).all(|i| (i + 1..zs.len()).all(|j| (zs[i] - zs[j]).norm() > 2.0 * p.r()));
        inside && disjoint
    }

    #[test]
    fn single_disk_layout() {
        let p = build_packing(1).unwrap();
        assert_eq!(p.centers(), &[c(0.0, 0.0)]);
        assert!(p.r() < 1.0);
        assert!((p.c_m() - p.r() * p.r()).abs() < 1e-15);
    }

    #[test]
    fn seven_disk_hex_ring() {
        let p = build_packing(7).unwrap();
        assert_eq!(p.m(), 7);
        // centre disk plus six neighbours at spacing 2/3: largest radius 1/3
        assert!((p.r() - LAYOUT_SAFETY / 3.0).abs() < 1e-15);
        assert!(brute_force_valid(&p));
        let ring: Vec<f64> = p.centers()[1..].iter().map(|z| z.norm()).collect();
        assert!(ring.iter().all(|d| (d - 2.0 / 3.0).abs() < 1e-12));
        // any larger common radius breaks disjointness or containment
        let grown = DiskPacking::new(p.centers().to_vec(), p.r() / LAYOUT_SAFETY * 1.0001);
        assert!(grown.is_err());
    }

    #[test]
    fn hundred_disks_reach_half_area() {
        let p = build_packing(100).unwrap();
        assert!(p.c_m() >= 0.5, "c_m = {}", p.c_m());
        assert!(brute_force_valid(&p));
        assert!((p.c_m() - 100.0 * p.r() * p.r()).abs() <= 1e-15);
    }

    #[test]
    fn layouts_valid_across_m() {
        for m in [2, 3, 5, 8, 13, 19, 37, 61, 150, 331] {
            let p = build_packing(m).unwrap();
            assert!(brute_force_valid(&p), "m = {m}");
        }
    }

    #[test]
    fn overlapping_layout_rejected() {
        let err = DiskPacking::new(vec![c(0.0, 0.0), c(0.3, 0.0)], 0.2).unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
        assert!(DiskPacking::new(vec![c(0.9, 0.0)], 0.2).is_err());
        assert!(build_packing(0).is_err());
    }

    #[test]
    fn conformal_case_keeps_dimension() {
        let p = hex_params(1.3, 1.0, 50).unwrap();
        assert!((p.t_prime() - 1.3).abs() < 1e-15);
        assert!((p.holder_exp() - 1.0).abs() < 1e-15);
        assert!((p.dim_image() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn critical_bmo_dimension_maps_to_one() {
        for k in [1.5, 2.0, 3.0, 7.0] {
            assert!((t_prime(2.0 / (k + 1.0), k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn k2_t1_substitution() {
        // t' = 2·2·1/(2+1) = 4/3 and t/t' = 3/4 = 1/2 + 1/4
        assert!((t_prime(1.0, 2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((holder_exponent_ratio(1.0, 2.0) - 0.75).abs() < 1e-15);
        assert!((holder_exponent_affine(1.0, 2.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sigma_too_large_rejected() {
        let err = hex_params(1.9, 2.0, 7).unwrap_err();
        assert!(matches!(err, Error::Parameter(ref s) if s.contains("increase m")));
        assert!(hex_params(0.0, 2.0, 7).is_err());
        assert!(hex_params(1.0, 0.5, 7).is_err());
    }

    #[test]
    fn identity_residuals_small() {
        let p = hex_params(1.0, 2.0, 100).unwrap();
        let res = p.identity_residuals();
        assert!(res.normalization < 1e-12);
        assert!(res.holder < 1e-12);
        assert!(res.dim_image < 1e-12);
    }

    #[test]
    fn empty_chain_is_identity() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        assert_eq!(source_map(&MultiIndex::root(), &p).unwrap(), Similarity::IDENTITY);
        assert_eq!(image_map(&MultiIndex::root(), &p).unwrap(), Similarity::IDENTITY);
    }

    #[test]
    fn length_one_chains() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        for i in 0..7u32 {
            let j = MultiIndex::new(vec![i], 7).unwrap();
            let s = source_map(&j, &p).unwrap();
            let w = image_map(&j, &p).unwrap();
            assert!((s.scale() - p.sigma() * p.r()).abs() < 1e-15);
            assert!((w.scale() - p.sigma().powf(0.5) * p.r()).abs() < 1e-15);
            assert_eq!(s.a, p.center(i as usize));
            assert_eq!(w.a, p.center(i as usize));
        }
    }

    #[test]
    fn length_two_image_chain() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        let rho = p.sigma().sqrt() * p.r();
        let (i, j) = (2usize, 5usize);
        let w = image_map(&MultiIndex::new(vec![i as u32, j as u32], 7).unwrap(), &p).unwrap();
        let expected = p.center(i) + rho * p.center(j);
        assert!((w.a - expected).norm() < 1e-15);
        assert!((w.scale() - rho * rho).abs() < 1e-15);
    }

    #[test]
    fn invalid_digits_rejected() {
        assert!(MultiIndex::new(vec![0, 7], 7).is_err());
        let p = hex_params(1.0, 2.0, 7).unwrap();
        let bad = MultiIndex::new(vec![9], 10).unwrap();
        assert!(source_map(&bad, &p).is_err());
    }

    #[test]
    fn generation_enumeration() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        let g0 = generation_disks(0, Side::Source, &p, ENUMERATION_CAP).unwrap();
        assert_eq!(g0.len(), 1);
        assert_eq!(g0[0].1, Disk::UNIT);
        let g1 = generation_disks(1, Side::Source, &p, ENUMERATION_CAP).unwrap();
        for (i, (j, d)) in g1.iter().enumerate() {
            assert_eq!(j.digits(), &[i as u32]);
            assert_eq!(d.center, p.center(i));
            assert!((d.radius - p.sigma() * p.r()).abs() < 1e-15);
        }
        let g2 = generation_disks(2, Side::Image, &p, ENUMERATION_CAP).unwrap();
        assert_eq!(g2.len(), 49);
        for (j, d) in &g2 {
            let w = image_map(j, &p).unwrap();
            assert!((w.a - d.center).norm() < 1e-15);
            assert!((w.scale() - d.radius).abs() < 1e-15);
        }
        assert!(matches!(
            generation_disks(9, Side::Source, &p, ENUMERATION_CAP),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn locate_cases() {
        let p = hex_params(1.0, 2.0, 7).unwrap();
        assert_eq!(locate(c(1.0, 0.0), &p), Location::Outside);
        assert_eq!(locate(c(0.3, 1.2), &p), Location::Outside);
        for i in 0..7 {
            let z = p.center(i);
            assert_eq!(locate(z, &p), Location::Inside { index: i, local: c(0.0, 0.0) });
            let mid = z + p.r() * (1.0 + p.sigma()) / 2.0;
            assert!(matches!(locate(mid, &p), Location::Annulus { index, .. } if index == i));
        }
    }

    #[test]
    fn epsilon_search_finds_layout() {
        let (m, dim) = m_for_epsilon(1.0, 2.0, 0.1, 2000).unwrap();
        assert!(t_prime(1.0, 2.0) - dim <= 0.1);
        let p = hex_params(1.0, 2.0, m).unwrap();
        assert!((p.dim_image() - dim).abs() < 1e-12);
    }
}
