//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the plain functions underneath are usable (and tested) natively.

use cantor_qc::geometry::{generation_disks, hex_params, Side};
use cantor_qc::mass::{critical_exponent, gamma};
use cantor_qc::{phi, Complex};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Generations and layouts are capped so a page never freezes.
pub const MAX_DISKS: u128 = 200_000;

/// Construction parameters plus the generation-`n` disks of both sides.
pub fn disks_json(t: f64, k: f64, m: usize, n: usize) -> Result<String, String> {
    let p = hex_params(t, k, m).map_err(|e| e.to_string())?;
    let mut sides = serde_json::Map::new();
    for (name, side) in [("source", Side::Source), ("image", Side::Image)] {
        let disks = generation_disks(n, side, &p, MAX_DISKS).map_err(|e| e.to_string())?;
        let flat: Vec<[f64; 3]> = disks.iter().map(|(_, d)| [d.center.re, d.center.im, d.radius]).collect();
        sides.insert(name.into(), json!(flat));
    }
    Ok(json!({ "params": p.record(), "generation": n, "disks": sides }).to_string())
}

/// Images under `φ` of `lines` horizontal and `lines` vertical segments
/// across `[-1.1, 1.1]²`, each sampled at `samples` points.
pub fn grid_json(t: f64, k: f64, m: usize, lines: usize, samples: usize, depth: u32) -> Result<String, String> {
    let p = hex_params(t, k, m).map_err(|e| e.to_string())?;
    let (lines, samples) = (lines.clamp(2, 200), samples.clamp(2, 4000));
    let coord = |i: usize, n: usize| -1.1 + 2.2 * i as f64 / (n - 1) as f64;
    let mut polylines = Vec::with_capacity(2 * lines);
    for vertical in [false, true] {
        for i in 0..lines {
            let line: Vec<[f64; 2]> = (0..samples)
                .map(|j| {
                    let (a, b) = (coord(i, lines), coord(j, samples));
                    let z = if vertical { Complex::new(a, b) } else { Complex::new(b, a) };
                    let w = phi(z, &p, depth).value;
                    [w.re, w.im]
                })
                .collect();
            polylines.push(line);
        }
    }
    Ok(json!({ "polylines": polylines }).to_string())
}

/// Per-generation ratio `c_m σ^γ` of the `L^p` mass series over `[p_min, p_max]`.
pub fn lp_curve_json(t: f64, k: f64, m: usize, p_min: f64, p_max: f64, steps: usize) -> Result<String, String> {
    let p = hex_params(t, k, m).map_err(|e| e.to_string())?;
    let steps = steps.clamp(2, 2000);
    let points: Vec<_> = (0..steps)
        .map(|i| {
            let q = p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64;
            let ratio = p.c_m() * p.sigma().powf(gamma(q, k));
            json!({ "p": q, "ratio": ratio, "converges": ratio < 1.0 })
        })
        .collect();
    let pc = critical_exponent(k);
    Ok(json!({
        "critical": if pc.is_finite() { Some(pc) } else { None },
        "sigma": p.sigma(),
        "c_m": p.c_m(),
        "points": points,
    })
    .to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cantor_disks(t: f64, k: f64, m: usize, n: usize) -> Result<String, JsValue> {
    js(disks_json(t, k, m, n))
}

#[wasm_bindgen]
pub fn warped_grid(t: f64, k: f64, m: usize, lines: usize, samples: usize, depth: u32) -> Result<String, JsValue> {
    js(grid_json(t, k, m, lines, samples, depth))
}

#[wasm_bindgen]
pub fn lp_mass_curve(t: f64, k: f64, m: usize, p_min: f64, p_max: f64, steps: usize) -> Result<String, JsValue> {
    js(lp_curve_json(t, k, m, p_min, p_max, steps))
}
