//! Literal stage-by-stage composition `g_n ∘ ⋯ ∘ g_1`, built directly from the
//! three-case definition of each `g_N` over all `m^N` target disks. Quadratic
//! in `m^N` per point; only meant as an independent check of the recursive
//! evaluator.

use crate::geometry::ConstructionParams;
use crate::Complex;

pub struct LiteralComposition {
    k: f64,
    sigma: f64,
    /// `(centers z_J, radius r_N)` for `N = 1..=n`.
    levels: Vec<(Vec<Complex>, f64)>,
}

impl LiteralComposition {
    pub fn new(params: &ConstructionParams, n: usize) -> Self {
        let base: Vec<Complex> = params.packing().centers().to_vec();
        let rho = params.sigma().powf(1.0 / params.k()) * params.r();
        let mut levels = Vec::with_capacity(n);
        // z_{(j_1..j_N)} = Σ_k z_{j_k} ρ^{k−1},  r_N = ρ^{N−1} r
        let mut centers = vec![Complex::new(0.0, 0.0)];
        let mut weight = 1.0;
        for level in 1..=n {
            let mut next = Vec::with_capacity(centers.len() * base.len());
            for c in &centers {
                for z in &base {
                    next.push(c + z * weight);
                }
            }
            centers = next;
            levels.push((centers.clone(), rho.powi(level as i32 - 1) * params.r()));
            weight *= rho;
        }
        LiteralComposition {
            k: params.k(),
            sigma: params.sigma(),
            levels,
        }
    }

    pub fn stages(&self) -> usize {
        self.levels.len()
    }

    /// Target-side centers and radius `(z_J, r_N)` of stage `N` (1-based).
    pub fn level(&self, n: usize) -> (&[Complex], f64) {
        let (c, r) = &self.levels[n - 1];
        (c, *r)
    }

    /// `σ^{1/K−1}(z − z_J) + z_J`.
    pub fn linear(&self, z: Complex, center: Complex) -> Complex {
        self.sigma.powf(1.0 / self.k - 1.0) * (z - center) + center
    }

    /// `|(z − z_J)/r_N|^{1/K−1}(z − z_J) + z_J`.
    pub fn annulus(&self, z: Complex, center: Complex, r_n: f64) -> Complex {
        ((z - center) / r_n).norm().powf(1.0 / self.k - 1.0) * (z - center) + center
    }

    /// `g_N` by linear scan over all disks of stage `N`.
    pub fn g(&self, n: usize, z: Complex) -> Complex {
        let (centers, r_n) = self.level(n);
        for &c in centers {
            let d = (z - c).norm();
            if d < self.sigma * r_n {
                return self.linear(z, c);
            }
            if d < r_n {
                return self.annulus(z, c, r_n);
            }
        }
        z
    }

    /// `φ_n = g_n ∘ ⋯ ∘ g_1`.
    pub fn apply(&self, z: Complex) -> Complex {
        (1..=self.levels.len()).fold(z, |w, n| self.g(n, w))
    }
}
