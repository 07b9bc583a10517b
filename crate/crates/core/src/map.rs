//! Evaluation of the limit map `φ`, its finite stages `φ_n`, its inverse and
//! its Jacobian.
//!
//! On a generating disk `G_i = φ_i(𝔻)` the limit map satisfies
//! `φ = ψ_i ∘ φ ∘ φ_i⁻¹`, so a point is evaluated by descending through the
//! generating disks that contain it (one case split per generation) until it
//! lands in an annulus or outside every protecting disk.

use serde::Serialize;

use crate::geometry::{locate_on, ConstructionParams, Location, Side, Similarity};
use crate::Complex;

/// Relative width of the band around a seam circle where the Jacobian is not reported.
pub const SEAM_TOLERANCE: f64 = 1e-12;

/// A map value together with the generation depth used and a bound on its error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapResult {
    pub value: Complex,
    pub depth: u32,
    /// Zero when the recursion terminated; otherwise the diameter of the
    /// image disk known to contain the exact value.
    pub err_bound: f64,
}

impl MapResult {
    pub fn exact(value: Complex, depth: u32) -> Self {
        MapResult {
            value,
            depth,
            err_bound: 0.0,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.err_bound == 0.0
    }
}

/// One generation of the case split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Final(Complex),
    /// Point lies in the generating disk `i`; continue with the renormalized point.
    Descend(usize, Complex),
}

/// `u |u|^{exponent}`, the radial stretch in normalized coordinates.
#[inline]
pub fn radial_stretch(u: Complex, exponent: f64) -> Complex {
    let rho = u.norm();
    if rho == 0.0 {
        return u;
    }
    u * rho.powf(exponent)
}

/// Linear piece `σ^{1/K−1}(z − z_i) + z_i` used on the generating disk.
pub fn linear_piece(z: Complex, center: Complex, params: &ConstructionParams) -> Complex {
    center + (z - center) * params.sigma().powf(1.0 / params.k() - 1.0)
}

/// Annulus piece `|(z − z_i)/r|^{1/K−1}(z − z_i) + z_i`.
pub fn annulus_piece(z: Complex, center: Complex, params: &ConstructionParams) -> Complex {
    let r = params.r();
    center + r * radial_stretch((z - center) / r, 1.0 / params.k() - 1.0)
}

pub fn base_step(z: Complex, params: &ConstructionParams) -> Step {
    match locate_on(z, params, Side::Source) {
        Location::Outside => Step::Final(z),
        Location::Annulus { index, local } => {
            let value = params.center(index) + params.r() * radial_stretch(local, 1.0 / params.k() - 1.0);
            Step::Final(value)
        }
        Location::Inside { index, local } => Step::Descend(index, local),
    }
}

/// Shared descent. `from` is the side `z` lives on; the other side supplies
/// the scalings accumulated on the way down.
#[inline]
fn descend(z: Complex, params: &ConstructionParams, depth_max: u32, from: Side) -> MapResult {
    let depth_max = depth_max.max(1);
    let (to, exponent) = match from {
        Side::Source => (Side::Image, 1.0 / params.k() - 1.0),
        Side::Image => (Side::Source, params.k() - 1.0),
    };
    let to_ratio = params.ratio(to);
    let mut acc = Similarity::IDENTITY;
    let mut w = z;
    for depth in 0..depth_max {
        match locate_on(w, params, from) {
            Location::Outside => return MapResult::exact(acc.apply(w), depth),
            Location::Annulus { index, local } => {
                let v = params.center(index) + params.r() * radial_stretch(local, exponent);
                return MapResult::exact(acc.apply(v), depth);
            }
            Location::Inside { index, local } => {
                acc = acc.compose(&Similarity::scaling(params.center(index), to_ratio));
                w = local;
            }
        }
    }
    MapResult {
        value: acc.a,
        depth: depth_max,
        err_bound: 2.0 * to_ratio.powi(depth_max as i32),
    }
}

/// The limit map `φ`. Points still inside a generating disk after
/// `depth_max` descents return that disk's image center with its diameter as
/// the error bound. A `depth_max` of 0 is treated as 1.
pub fn phi(z: Complex, params: &ConstructionParams, depth_max: u32) -> MapResult {
    descend(z, params, depth_max, Side::Source)
}

/// The inverse `φ⁻¹`, by the same descent on the image side with the radial
/// stretch inverted in closed form.
pub fn phi_inverse(w: Complex, params: &ConstructionParams, depth_max: u32) -> MapResult {
    descend(w, params, depth_max, Side::Image)
}

/// The finite stage `φ_n = g_n ∘ ⋯ ∘ g_1`: identical to `φ` except that it
/// is linear on every generation-`n` generating disk.
pub fn phi_stage(z: Complex, params: &ConstructionParams, n: u32) -> Complex {
    let ratio = params.ratio(Side::Image);
    let mut acc = Similarity::IDENTITY;
    let mut w = z;
    for _ in 0..n {
        match base_step(w, params) {
            Step::Final(v) => return acc.apply(v),
            Step::Descend(i, local) => {
                acc = acc.compose(&Similarity::scaling(params.center(i), ratio));
                w = local;
            }
        }
    }
    acc.apply(w)
}

/// Jacobian determinant of `φ` at `z`: `σ^{2k(1/K−1)}` times the local base
/// factor (1 off the protecting disks, `(1/K) ρ^{2(1/K−1)}` on an annulus at
/// normalized radius `ρ`). `None` when the point is unresolved after
/// `depth_max` descents or sits on a seam circle.
pub fn jacobian(z: Complex, params: &ConstructionParams, depth_max: u32) -> Option<f64> {
    let depth_max = depth_max.max(1);
    let a = 1.0 / params.k() - 1.0;
    let level_factor = params.sigma().powf(2.0 * a);
    let sigma = params.sigma();
    let mut factor = 1.0;
    let mut w = z;
    for depth in 0..depth_max {
        match locate_on(w, params, Side::Source) {
            Location::Outside => {
                let on_parent_seam = depth > 0 && (w.norm() - 1.0).abs() <= SEAM_TOLERANCE;
                if on_parent_seam || params.packing().circle_gap(w) <= SEAM_TOLERANCE * params.r() {
                    return None;
                }
                return Some(factor);
            }
            Location::Annulus { local, .. } => {
                let rho = local.norm();
                if (rho - 1.0).abs() <= SEAM_TOLERANCE || (rho - sigma).abs() <= SEAM_TOLERANCE {
                    return None;
                }
                return Some(factor * rho.powf(2.0 * a) / params.k());
            }
            Location::Inside { local, .. } => {
                factor *= level_factor;
                w = local;
            }
        }
    }
    None
}

/// Finite-difference differential of a plane map at `z` with step `h`,
/// returned as `(∂f, ∂̄f)`.
pub fn wirtinger_fd(f: impl Fn(Complex) -> Complex, z: Complex, h: f64) -> (Complex, Complex) {
    let fx = (f(z + Complex::new(h, 0.0)) - f(z - Complex::new(h, 0.0))) / (2.0 * h);
    let fy = (f(z + Complex::new(0.0, h)) - f(z - Complex::new(0.0, h))) / (2.0 * h);
    let i = Complex::new(0.0, 1.0);
    ((fx - i * fy) * 0.5, (fx + i * fy) * 0.5)
}

/// Jacobian `|∂f|² − |∂̄f|²` and distortion `(|∂f| + |∂̄f|)² / J` from Wirtinger derivatives.
pub fn jacobian_and_distortion(d: Complex, dbar: Complex) -> (f64, f64) {
    let (a, b) = (d.norm(), dbar.norm());
    let jac = a * a - b * b;
    (jac, (a + b) * (a + b) / jac)
}
