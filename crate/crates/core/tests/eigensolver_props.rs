use std::f64::consts::PI;

use proptest::prelude::*;

use slosh::admissible::{self, random_admissible, Geometry, ShapeSamples};
use slosh::bond::BondNumber;
use slosh::eigensolver::{
    assemble, energies, fundamental_mode, fundamental_mode_no_st, solve_shape, surface_mass, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use slosh::shapes::{CanalCase, Case, OptimalSolution, RadialCase};
use slosh::verify::ISOPERIMETRIC_TOL;

/// First zero of J_1.
const J11: f64 = 3.831_705_970_207_512_3;
/// First zero of J_1'.
const J11_PRIME: f64 = 1.841_183_781_340_659_3;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Canal), Just(Geometry::Radial)]
}

fn parameter(geometry: Geometry, k: u32) -> f64 {
    match geometry {
        Geometry::Canal => [0.0, 1.0, PI][k as usize % 3],
        Geometry::Radial => (k % 2) as f64,
    }
}

fn case_for(geometry: Geometry, parameter: f64, bond: BondNumber, target: f64) -> Case {
    match geometry {
        Geometry::Canal => CanalCase::new(parameter, bond, target).unwrap().into(),
        Geometry::Radial => RadialCase::new(parameter as u32, bond, target).unwrap().into(),
    }
}

fn solve(shape: &ShapeSamples, p: f64, bond: BondNumber) -> slosh::EigenResult {
    solve_shape(shape, p, bond, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap()
}

#[test]
fn uniform_disc_matches_bessel_zeros() {
    let depth = 0.4;
    let shape = ShapeSamples::new(Geometry::Radial, vec![depth; 2001], PI * depth).unwrap();
    let m1 = fundamental_mode_no_st(&shape, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let m0 = fundamental_mode_no_st(&shape, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!((m1.lambda1 / (depth * J11_PRIME * J11_PRIME) - 1.0).abs() < 1e-5);
    assert!((m0.lambda1 / (depth * J11 * J11) - 1.0).abs() < 1e-5);
}

#[test]
fn uniform_canal_matches_cosine_modes() {
    for (alpha, depth) in [(0.0, 0.5), (1.0, 0.5), (2.0, 1.3)] {
        let shape = ShapeSamples::new(Geometry::Canal, vec![depth; 2001], 2.0 * depth).unwrap();
        let r = fundamental_mode_no_st(&shape, alpha, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let exact = if alpha == 0.0 {
            depth * PI * PI / 4.0
        } else {
            depth * alpha * alpha
        };
        assert!((r.lambda1 / exact - 1.0).abs() < 1e-5, "alpha = {alpha}");
    }
}

#[test]
fn outputs_are_normalized() {
    let sol = OptimalSolution::new(CanalCase::new(0.0, BondNumber::Finite(2.0), 1.0).unwrap().into()).unwrap();
    let shape = sol.samples(801).unwrap();
    let r = solve(&shape, 0.0, BondNumber::Finite(2.0));
    assert_eq!(r.coords.len(), 801);
    assert_eq!(r.zeta.len(), 801);
    assert_eq!(r.zeta[0], 0.0);
    assert_eq!(r.zeta[800], 0.0);
    assert!(r.psi[800] > 0.0);
    assert!((r.lambda1 - r.omega1 * r.omega1).abs() < 1e-14 * r.lambda1);
    let g: f64 = r.psi.iter().zip(&r.zeta).map(|(p, z)| p * z).sum::<f64>() * shape.spacing();
    assert!((g - 1.0).abs() < 1e-2);
}

#[test]
fn result_csv_round_trip() {
    let sol = OptimalSolution::new(RadialCase::new(1, BondNumber::Finite(1.0), 1.0).unwrap().into()).unwrap();
    let shape = sol.samples(201).unwrap();
    let r = solve(&shape, 1.0, BondNumber::Finite(1.0));
    let mut buf = Vec::new();
    slosh::eigensolver::write_result_csv(&r, Geometry::Radial, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega1,lambda1,residual,n"));
    let meta: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(meta[0], r.omega1);
    assert_eq!(meta[3] as usize, r.coords.len());
    assert_eq!(lines.next(), Some("r,psi,zeta"));
    assert_eq!(lines.count(), r.coords.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_shapes_are_admissible(seed in any::<u64>(), g in geometry(), modes in 0usize..8, target in 0.1f64..10.0) {
        let s = random_admissible(seed, g, 201, modes, target).unwrap();
        prop_assert!(s.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert!((admissible::quadrature(&s) / target - 1.0).abs() < 1e-12);
        let again = random_admissible(seed, g, 201, modes, target).unwrap();
        prop_assert_eq!(s.values(), again.values());
    }

    #[test]
    fn perturbations_stay_admissible(seed in any::<u64>(), g in geometry(), eps in 0.0f64..0.5) {
        let base = random_admissible(seed, g, 201, 3, 1.0).unwrap();
        let p = admissible::perturb(&base, seed ^ 0x5a5a, eps).unwrap();
        prop_assert!(p.values().iter().all(|v| *v >= 0.0));
        prop_assert!((admissible::quadrature(&p) - 1.0).abs() < 1e-12);
        for (a, b) in base.values().iter().zip(p.values()) {
            prop_assert!(*a > 0.0 || *b == 0.0);
        }
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), g in geometry()) {
        let s = random_admissible(seed, g, 65, 4, 2.0).unwrap();
        let mut buf = Vec::new();
        admissible::write_csv(&s, &mut buf).unwrap();
        let back = admissible::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.geometry(), g);
        prop_assert_eq!(back.values(), s.values());
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>(), g in geometry(), k in 0u32..3, bo in 0.1f64..100.0) {
        let p = parameter(g, k);
        let s = random_admissible(seed, g, 301, 4, 1.0).unwrap();
        let a = solve(&s, p, BondNumber::Finite(bo));
        let b = solve(&s, p, BondNumber::Finite(bo));
        prop_assert_eq!(a.lambda1, b.lambda1);
        prop_assert_eq!(a.psi, b.psi);
    }

    #[test]
    fn depth_scaling_without_surface_tension(seed in any::<u64>(), g in geometry(), k in 0u32..3, c in 0.1f64..10.0) {
        let p = parameter(g, k);
        let s = random_admissible(seed, g, 301, 4, 1.0).unwrap();
        let a = solve(&s, p, BondNumber::Infinite);
        let b = solve(&s.scaled(c).unwrap(), p, BondNumber::Infinite);
        prop_assert!((b.lambda1 / (c * a.lambda1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn canal_reflection_invariance(seed in any::<u64>(), k in 0u32..3, bo in 0.1f64..100.0) {
        let p = parameter(Geometry::Canal, k);
        let s = random_admissible(seed, Geometry::Canal, 301, 5, 1.0).unwrap();
        let a = solve(&s, p, BondNumber::Finite(bo));
        let b = solve(&s.reflected(), p, BondNumber::Finite(bo));
        prop_assert!((a.lambda1 / b.lambda1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn energy_identity_and_mass(seed in any::<u64>(), g in geometry(), k in 0u32..3, bo in 0.05f64..200.0) {
        let p = parameter(g, k);
        let s = random_admissible(seed, g, 401, 6, 1.0).unwrap();
        let op = assemble(&s, p, BondNumber::Finite(bo)).unwrap();
        let r = fundamental_mode(&op, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(r.residual < DEFAULT_TOL);
        prop_assert!(energies(&op, &r).unwrap().identity_gap(r.omega1) < 1e-8);
        if p == 0.0 {
            let scale: f64 = r.zeta.iter().map(|z| z.abs()).sum::<f64>() * s.spacing();
            prop_assert!(surface_mass(&op, &r).unwrap().abs() < 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn potential_energy_matches_matrix_form(seed in any::<u64>(), g in geometry(), k in 0u32..3) {
        let s = random_admissible(seed, g, 101, 4, 1.0).unwrap();
        let op = assemble(&s, parameter(g, k), BondNumber::Finite(1.0)).unwrap();
        let x: Vec<f64> = (0..op.len()).map(|i| ((i as f64) * 0.37 + seed as f64 * 1e-19).sin()).collect();
        let kx = op.k_psi.mul(&x);
        let quad: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        prop_assert!((op.psi_energy(&x) - quad).abs() < 1e-10 * quad.abs().max(1.0));
        prop_assert!(op.k_psi.diag.iter().all(|d| *d >= 0.0));
        prop_assert!(op.k_psi.off.iter().all(|o| *o <= 0.0));
    }

    #[test]
    fn random_shapes_do_not_beat_the_optimum(seed in any::<u64>(), g in geometry(), k in 0u32..3, bo in 0.1f64..50.0) {
        let p = parameter(g, k);
        let bond = BondNumber::Finite(bo);
        let star = case_for(g, p, bond, 1.0).lambda_star().unwrap();
        let s = random_admissible(seed, g, 801, 1 + (seed % 8) as usize, 1.0).unwrap();
        let r = solve(&s, p, bond);
        prop_assert!(r.lambda1 <= star * (1.0 + ISOPERIMETRIC_TOL), "{} > {}", r.lambda1, star);
    }

    #[test]
    fn optimum_is_attained(g in geometry(), k in 0u32..3, bo in 0.1f64..100.0) {
        let p = parameter(g, k);
        let bond = BondNumber::Finite(bo);
        let sol = OptimalSolution::new(case_for(g, p, bond, 1.0)).unwrap();
        let r = solve(&sol.samples(1001).unwrap(), p, bond);
        prop_assert!((r.lambda1 / sol.lambda_star - 1.0).abs() < 1e-4, "{} vs {}", r.lambda1, sol.lambda_star);
    }
}
