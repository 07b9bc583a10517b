//! Rescaled copies `z ↦ z_j + r_j φ_j((z − z_j)/r_j)` glued over disjoint host
//! disks, identity elsewhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{hex_params, ConstructionParams, Disk, HexLadder};
use crate::map::{phi, MapResult};
use crate::Complex;

#[derive(Clone, Debug)]
pub struct GluedPiece {
    pub host: Disk,
    pub params: ConstructionParams,
}

impl GluedPiece {
    /// `m_j^{1/t − 1/t′} r_j^{1 − t/t′}`, the Hölder constant factor of the rescaled piece.
    pub fn holder_factor(&self) -> f64 {
        let (t, tp) = (self.params.t(), self.params.t_prime());
        (self.params.m() as f64).powf(1.0 / t - 1.0 / tp) * self.host.radius.powf(1.0 - t / tp)
    }

    /// `t′ − dim φ_j(E_j)`.
    pub fn epsilon(&self) -> f64 {
        self.params.t_prime() - self.params.dim_image()
    }
}

#[derive(Clone, Debug)]
pub struct GluedMapSpec {
    pieces: Vec<GluedPiece>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceSummary {
    pub center: Complex,
    pub radius: f64,
    pub m: usize,
    pub dim_image: f64,
    pub epsilon: f64,
    pub holder_factor: f64,
}

impl GluedMapSpec {
    /// Validates every invariant: hosts disjoint inside `𝔻`, common `(t, K)`,
    /// `m_j r_j^t < 1`, and for `K > 1` positive strictly decreasing `ε_j`.
    pub fn new(pieces: Vec<GluedPiece>) -> Result<Self> {
        let spec = Self::with_hosts(pieces, false)?;
        let first = &spec.pieces[0].params;
        let (t, k) = (first.t(), first.k());
        for (j, piece) in spec.pieces.iter().enumerate() {
            if piece.params.t() != t || piece.params.k() != k {
                return Err(Error::Construction(format!("piece {j} does not share (t, K)")));
            }
            let mass = piece.params.m() as f64 * piece.host.radius.powf(t);
            if mass >= 1.0 {
                return Err(Error::Construction(format!(
                    "piece {j}: m_j r_j^t = {mass} violates m_j r_j^t < 1"
                )));
            }
            if k > 1.0 {
                if piece.holder_factor() >= 1.0 {
                    return Err(Error::Construction(format!("piece {j}: Hölder factor >= 1")));
                }
                if piece.epsilon() <= 0.0 {
                    return Err(Error::Construction(format!("piece {j}: epsilon is not positive")));
                }
            }
        }
        if k > 1.0 {
            if let Some(w) = spec.pieces.windows(2).position(|w| w[1].epsilon() >= w[0].epsilon()) {
                return Err(Error::Construction(format!(
                    "epsilon must decrease strictly (pieces {w} and {})",
                    w + 1
                )));
            }
        }
        Ok(spec)
    }

    /// Only checks the host geometry (disjoint, inside the closed unit disk);
    /// admits e.g. a single piece hosted by `𝔻` itself.
    pub fn relaxed(pieces: Vec<GluedPiece>) -> Result<Self> {
        Self::with_hosts(pieces, true)
    }

    fn with_hosts(pieces: Vec<GluedPiece>, closed: bool) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Construction("a glued map needs at least one piece".into()));
        }
        for (j, p) in pieces.iter().enumerate() {
            let reach = p.host.center.norm() + p.host.radius;
            if reach > 1.0 || (!closed && reach >= 1.0) {
                return Err(Error::Construction(format!("host {j} leaves the unit disk")));
            }
            for (l, q) in pieces.iter().enumerate().skip(j + 1) {
                if (p.host.center - q.host.center).norm() <= p.host.radius + q.host.radius {
                    return Err(Error::Construction(format!("hosts {j} and {l} overlap")));
                }
            }
        }
        Ok(GluedMapSpec { pieces })
    }

    pub fn pieces(&self) -> &[GluedPiece] {
        &self.pieces
    }

    pub fn summary(&self) -> Vec<PieceSummary> {
        self.pieces
            .iter()
            .map(|p| PieceSummary {
                center: p.host.center,
                radius: p.host.radius,
                m: p.params.m(),
                dim_image: p.params.dim_image(),
                epsilon: p.epsilon(),
                holder_factor: p.holder_factor(),
            })
            .collect()
    }
}

pub fn glued_map(z: Complex, spec: &GluedMapSpec, depth_max: u32) -> MapResult {
    for piece in &spec.pieces {
        let host = piece.host;
        if host.contains(z) {
            let inner = phi((z - host.center) / host.radius, &piece.params, depth_max);
            return MapResult {
                value: host.center + host.radius * inner.value,
                depth: inner.depth,
                err_bound: host.radius * inner.err_bound,
            };
        }
    }
    MapResult::exact(z, 0)
}

/// A valid spec with `count` pieces: layouts with strictly increasing image
/// dimension (so `ε_j` decreases), hosts placed left to right along the real
/// axis with `r_j < m_j^{−1/t}`.
pub fn ladder_spec(t: f64, k: f64, count: usize, m_start: usize) -> Result<GluedMapSpec> {
    if count == 0 {
        return Err(Error::param("at least one piece is required"));
    }
    const M_LIMIT: usize = 200_000;
    let ladder = HexLadder::new(M_LIMIT);
    let mut chosen: Vec<ConstructionParams> = Vec::new();
    let mut m = m_start.max(2);
    while chosen.len() < count {
        if m > M_LIMIT {
            return Err(Error::param(format!("no layout ladder of {count} pieces below m = {M_LIMIT}")));
        }
        let r = ladder.radius(m);
        let sigma = crate::geometry::sigma_for(t, m, r);
        if sigma < 1.0 {
            let dim = crate::geometry::dim_image_identity(t, k, m, r);
            let better = chosen.last().map_or(true, |prev| dim > prev.dim_image() + 1e-9);
            if better {
                chosen.push(hex_params(t, k, m)?);
                m = (m as f64 * 1.5).ceil() as usize;
                continue;
            }
        }
        m += 1;
    }
    let slot = 1.9 / count as f64;
    let mut pieces = Vec::with_capacity(count);
    for (j, params) in chosen.into_iter().enumerate() {
        let cap = 0.9 * (params.m() as f64).powf(-1.0 / t);
        let radius = cap.min(0.45 * slot);
        let center = Complex::new(-0.95 + slot * (j as f64 + 0.5), 0.0);
        pieces.push(GluedPiece {
            host: Disk::new(center, radius),
            params,
        });
    }
    GluedMapSpec::new(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_off_hosts() {
        let spec = ladder_spec(1.0, 2.0, 3, 7).unwrap();
        let z = Complex::new(0.0, 0.9);
        assert_eq!(glued_map(z, &spec, 8), MapResult::exact(z, 0));
    }

    #[test]
    fn single_unit_host_reduces_to_phi() {
        let params = hex_params(1.0, 2.0, 19).unwrap();
        let spec = GluedMapSpec::relaxed(vec![GluedPiece {
            host: Disk::UNIT,
            params: params.clone(),
        }])
        .unwrap();
        assert!(GluedMapSpec::new(spec.pieces().to_vec()).is_err());
        for k in 0..50 {
            let z = Complex::from_polar(0.02 * k as f64, 0.7 * k as f64);
            assert_eq!(glued_map(z, &spec, 10), phi(z, &params, 10));
        }
    }

    #[test]
    fn invariant_violations_rejected() {
        let a = hex_params(1.0, 2.0, 19).unwrap();
        let big = GluedPiece {
            host: Disk::new(Complex::new(0.0, 0.0), 0.5),
            params: a.clone(),
        };
        // 19 · 0.5 ≥ 1
        assert!(GluedMapSpec::new(vec![big]).is_err());
        let p = |x: f64| GluedPiece {
            host: Disk::new(Complex::new(x, 0.0), 0.04),
            params: a.clone(),
        };
        // overlapping hosts
        assert!(GluedMapSpec::new(vec![p(0.0), p(0.05)]).is_err());
        // equal epsilons are not strictly decreasing
        assert!(GluedMapSpec::new(vec![p(0.0), p(0.5)]).is_err());
    }

    #[test]
    fn ladder_epsilons_decrease() {
        let spec = ladder_spec(1.0, 2.0, 4, 7).unwrap();
        let eps: Vec<f64> = spec.pieces().iter().map(GluedPiece::epsilon).collect();
        assert!(eps.windows(2).all(|w| w[1] < w[0]));
        assert!(spec.pieces().iter().all(|p| p.holder_factor() < 1.0));
    }
}
