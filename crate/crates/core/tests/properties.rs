use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use cantor_qc::geometry::{
    generation_disks, hex_params, image_map, locate, source_map, t_prime, ConstructionParams, MultiIndex, Side,
    ENUMERATION_CAP,
};
use cantor_qc::map::{annulus_piece, jacobian, jacobian_and_distortion, linear_piece, phi_stage, wirtinger_fd};
use cantor_qc::mass::{annulus_factor, critical_exponent, lp_mass_closed_form, lp_mass_monte_carlo, Sampling};
use cantor_qc::nonremovable::{cauchy_transform, Atom, Counterexample, DiscreteMeasure};
use cantor_qc::oracle::LiteralComposition;
use cantor_qc::{phi, phi_inverse, Complex, Location};
use proptest::prelude::*;

fn params_set() -> &'static [ConstructionParams] {
    static SET: OnceLock<Vec<ConstructionParams>> = OnceLock::new();
    SET.get_or_init(|| {
        vec![
            hex_params(1.0, 2.0, 7).unwrap(),
            hex_params(1.0, 2.0, 100).unwrap(),
            hex_params(0.8, 3.0, 19).unwrap(),
            hex_params(1.5, 1.5, 37).unwrap(),
        ]
    })
}

fn point_in_disk(rho: f64, theta: f64) -> Complex {
    Complex::from_polar(rho.sqrt(), theta)
}

fn chain(digits: &[usize], p: &ConstructionParams) -> MultiIndex {
    MultiIndex::new(digits.iter().map(|&d| (d % p.m()) as u32).collect(), p.m()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conjugacy_on_generating_disks(which in 0usize..4, i in 0usize..1000, rho in 0.0f64..1.0, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let u = point_in_disk(rho, theta);
        let j = chain(&[i], p);
        let lhs = phi(source_map(&j, p).unwrap().apply(u), p, 40);
        let rhs = image_map(&j, p).unwrap().apply(phi(u, p, 39).value);
        prop_assert!((lhs.value - rhs).norm() <= 1e-12 + lhs.err_bound);
    }

    #[test]
    fn round_trip(which in 0usize..4, rho in 0.0f64..1.0, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let z = point_in_disk(rho, theta) * 1.1;
        let w = phi(z, p, 40);
        prop_assume!(w.is_resolved());
        let back = phi_inverse(w.value, p, 40);
        prop_assert!((back.value - z).norm() <= 1e-10 + back.err_bound, "{} vs {}", back.value, z);
    }

    #[test]
    fn truncation_is_monotone(which in 0usize..4, digits in proptest::collection::vec(0usize..1000, 0..6), rho in 0.0f64..1.0, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let z = source_map(&chain(&digits, p), p).unwrap().apply(point_in_disk(rho, theta));
        let deep = phi(z, p, 40);
        let mut last = f64::INFINITY;
        for d in 1..12 {
            let r = phi(z, p, d);
            prop_assert!(r.err_bound <= last);
            prop_assert!((r.value - deep.value).norm() <= r.err_bound + deep.err_bound + 1e-12);
            last = r.err_bound;
        }
    }

    #[test]
    fn stage_agrees_with_limit_off_deep_disks(which in 0usize..4, rho in 0.0f64..1.0, theta in 0.0..TAU, n in 1u32..5) {
        let p = &params_set()[which];
        let z = point_in_disk(rho, theta);
        let r = phi(z, p, n);
        if r.is_resolved() {
            prop_assert!((phi_stage(z, p, n) - r.value).norm() <= 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(which in 0usize..4, digits in proptest::collection::vec(0usize..1000, 0..2), i in 0usize..1000, s in 0.05f64..0.95, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let outer = source_map(&chain(&digits, p), p).unwrap();
        let idx = i % p.m();
        // normalized radius strictly inside the annulus σ < ρ < 1
        let rho = p.sigma() + s * (1.0 - p.sigma());
        let z = outer.apply(p.center(idx) + p.r() * Complex::from_polar(rho, theta));
        let h = 1e-4 * outer.scale() * p.r() * (rho - p.sigma()).min(1.0 - rho);
        let f = |w: Complex| phi(w, p, 40).value;
        let (d, dbar) = wirtinger_fd(f, z, h);
        let (jac_fd, distortion) = jacobian_and_distortion(d, dbar);
        let jac = jacobian(z, p, 40).unwrap();
        prop_assert!((jac_fd / jac - 1.0).abs() < 1e-4, "{jac_fd} vs {jac}");
        prop_assert!(distortion <= p.k() * 1.001);
        prop_assert!((distortion / p.k() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn linear_region_is_conformal(which in 0usize..4, digits in proptest::collection::vec(0usize..1000, 0..3), rho in 0.0f64..1.0, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let outer = source_map(&chain(&digits, p), p).unwrap();
        let u = point_in_disk(rho, theta) * if digits.is_empty() { 1.2 } else { 1.0 };
        prop_assume!(matches!(locate(u, p), Location::Outside));
        prop_assume!(p.packing().circle_gap(u) > 1e-3 && (u.norm() - 1.0).abs() > 1e-3);
        let z = outer.apply(u);
        let h = 1e-7 * outer.scale();
        let (d, dbar) = wirtinger_fd(|w| phi(w, p, 40).value, z, h);
        let (jac_fd, distortion) = jacobian_and_distortion(d, dbar);
        let jac = jacobian(z, p, 40).unwrap();
        prop_assert!((jac_fd / jac - 1.0).abs() < 1e-5);
        prop_assert!((distortion - 1.0).abs() < 1e-5);
    }

    #[test]
    fn seams_agree(which in 0usize..4, digits in proptest::collection::vec(0usize..1000, 0..3), i in 0usize..1000, theta in 0.0..TAU) {
        let p = &params_set()[which];
        let psi = image_map(&chain(&digits, p), p).unwrap();
        let c = p.center(i % p.m());
        let outer = c + p.r() * Complex::from_polar(1.0, theta);
        let inner = c + p.sigma() * p.r() * Complex::from_polar(1.0, theta);
        prop_assert!((psi.apply(annulus_piece(outer, c, p)) - psi.apply(outer)).norm() <= 1e-12);
        prop_assert!((psi.apply(annulus_piece(inner, c, p)) - psi.apply(linear_piece(inner, c, p))).norm() <= 1e-12);
    }

    #[test]
    fn parameter_identities(t in 0.05f64..1.95, k in 1.0f64..8.0, which in 0usize..4) {
        let base = &params_set()[which];
        let Ok(p) = cantor_qc::derive_params(t, k, base.packing().clone()) else {
            return Ok(());
        };
        let res = p.identity_residuals();
        prop_assert!(res.normalization.abs() < 1e-12);
        prop_assert!(res.holder.abs() < 1e-12);
        prop_assert!(res.dim_image.abs() < 1e-12);
        prop_assert!(p.dim_image() <= t_prime(t, k) + 1e-12);
        prop_assert!(p.dim_image() >= t - 1e-12);
    }

    #[test]
    fn cauchy_is_linear_and_reflects(rho in 0.0f64..1.0, theta in 0.0..TAU, a in 1u64..5, b in 1u64..5, far in 1.5f64..4.0) {
        let x = point_in_disk(rho, theta);
        let y = Complex::new(0.3, -0.2);
        let mu = DiscreteMeasure::new(vec![Atom { position: x, count: a }, Atom { position: y, count: b }], a + b, 1e-3).unwrap();
        let z = Complex::from_polar(far, theta + 0.4);
        let single = |pos: Complex| cauchy_transform(&DiscreteMeasure::new(vec![Atom { position: pos, count: 1 }], 1, 1e-3).unwrap(), z).value;
        let combined = (a as f64 * single(x) + b as f64 * single(y)) / (a + b) as f64;
        prop_assert!((cauchy_transform(&mu, z).value - combined).norm() < 1e-14);
        let reflected = cauchy_transform(&mu.conjugate(), z.conj()).value;
        prop_assert!((reflected - cauchy_transform(&mu, z).value.conj()).norm() < 1e-15);
    }
}

#[test]
fn generation_disks_nest() {
    for p in params_set().iter().filter(|p| p.m() <= 19) {
        for side in [Side::Source, Side::Image] {
            for n in 0..3 {
                let parents = generation_disks(n, side, p, ENUMERATION_CAP).unwrap();
                let children = generation_disks(n + 1, side, p, ENUMERATION_CAP).unwrap();
                for (k, (j, child)) in children.iter().enumerate() {
                    let (pj, parent) = &parents[k / p.m()];
                    assert_eq!(&j.digits()[..n], pj.digits());
                    assert!(parent.contains_disk(child));
                }
            }
        }
    }
}

#[test]
fn literal_composition_matches_stage_three() {
    let p = &params_set()[0];
    let oracle = LiteralComposition::new(p, 3);
    for k in 0..400 {
        let z = Complex::from_polar((k as f64 / 400.0).sqrt() * 1.05, 2.399 * k as f64);
        assert!((oracle.apply(z) - phi_stage(z, p, 3)).norm() < 1e-10);
    }
}

#[test]
fn critical_formula_is_the_limit() {
    let p = &params_set()[1];
    let pc = critical_exponent(p.k());
    let log_form = annulus_factor(pc, p.k(), p.sigma(), true);
    for delta in [1e-4, 1e-5, 1e-6] {
        for q in [pc - delta, pc + delta] {
            let near = annulus_factor(q, p.k(), p.sigma(), false);
            assert!((near / log_form - 1.0).abs() < 50.0 * delta, "{near} vs {log_form}");
        }
    }
    let rep = lp_mass_closed_form(pc, p, 30).unwrap();
    assert!(rep.critical);
}

#[test]
fn monte_carlo_is_deterministic() {
    let p = &params_set()[1];
    let a = lp_mass_monte_carlo(1.5, p, 20_000, 6, 42, Sampling::Stratified).unwrap();
    let b = lp_mass_monte_carlo(1.5, p, 20_000, 6, 42, Sampling::Stratified).unwrap();
    assert_eq!(a, b);
    let c = lp_mass_monte_carlo(1.5, p, 20_000, 6, 43, Sampling::Stratified).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn counterexample_composes() {
    let cx: Counterexample = cantor_qc::build_counterexample(0.5, 2.0, 1.9, 1, 30).unwrap();
    let (num, den) = cx.measure.total_mass_exact();
    assert_eq!(num, den as u128);
    for k in 1..200 {
        let z = Complex::from_polar(1.3 * (k as f64 / 200.0).sqrt(), 2.399 * k as f64);
        if cx.f(z).flagged {
            continue;
        }
        let composed = cauchy_transform(&cx.measure, phi(z, &cx.params, 30).value).value;
        assert!((cx.f(z).value - composed).norm() <= 1e-12);
    }
}

#[test]
fn single_atom_is_the_kernel() {
    let mu = DiscreteMeasure::new(vec![Atom { position: Complex::new(0.0, 0.0), count: 1 }], 1, 0.05).unwrap();
    for k in 1..50 {
        let z = Complex::from_polar(0.1 * k as f64, k as f64);
        assert!((cauchy_transform(&mu, z).value - 1.0 / (PI * z)).norm() < 1e-15);
    }
    let (dbar, points) = cantor_qc::nonremovable::dbar_max(&mu, 32, 1e-6);
    assert!(points > 0 && dbar < 1e-6, "{dbar}");
}
