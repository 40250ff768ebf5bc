//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use slosh::admissible::{Geometry, ShapeSamples};
use slosh::bond::BondNumber;
use slosh::eigensolver::{fundamental_mode_no_st, DEFAULT_MAX_ITER, DEFAULT_TOL};
use slosh::shapes::{CanalCase, Case, RadialCase};
use slosh::specfun::{bessel_i, d_zero, hyp2f3_special, struve_l, upsilon};
use slosh::verify::{self, DEFAULT_EPSILON, DEFAULT_GRIDS, DEFAULT_LIMIT_BONDS, ENERGY_TOL, MASS_TOL};

const SEED: u64 = 20240611;
const GRID: usize = 2000;

fn families(bond: BondNumber) -> Vec<Case> {
    vec![
        CanalCase::new(0.0, bond, 1.0).unwrap().into(),
        CanalCase::new(PI, bond, 1.0).unwrap().into(),
        RadialCase::new(1, bond, 1.0).unwrap().into(),
        RadialCase::new(0, bond, 1.0).unwrap().into(),
    ]
}

fn singular(case: &Case) -> bool {
    case.mode_parameter() == 0.0
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn fail(detail: String) -> Self {
        Self { pass: false, detail }
    }
}

fn ratios() -> Outcome {
    let expected = [(16.4, 0.1), (15.6, 0.1), (25.5, 0.1), (38.8, 0.2)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (case, (want, tol)) in families(BondNumber::Finite(1.0)).iter().zip(expected) {
        let got = match (
            case.lambda_star(),
            case.with_bond(BondNumber::Infinite).and_then(|c| c.lambda_star()),
        ) {
            (Ok(a), Ok(b)) => a / b,
            _ => return Outcome::fail(format!("{} failed to evaluate", case.label())),
        };
        pass &= (got - want).abs() <= tol;
        parts.push(format!("{got:.5}"));
    }
    Outcome {
        pass,
        detail: format!("C(1) = [{}]", parts.join(", ")),
    }
}

fn slopes() -> Outcome {
    let expected = [-0.808, -0.8307, -0.86, -0.911];
    let mut pass = true;
    let mut parts = Vec::new();
    for (case, want) in families(BondNumber::Finite(1.0)).iter().zip(expected) {
        match verify::slope_for_case(case, 0.1, 10.0) {
            Ok((_, s)) => {
                pass &= (s - want).abs() <= 0.01;
                parts.push(format!("{s:.4}"));
            }
            Err(e) => return Outcome::fail(format!("{}: {e}", case.label())),
        }
    }
    Outcome {
        pass,
        detail: format!("slopes on [0.1, 10] = [{}]", parts.join(", ")),
    }
}

fn attainment() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in families(BondNumber::Finite(1.0)) {
        match verify::verify_attainment(&case, &DEFAULT_GRIDS) {
            Ok(r) => {
                pass &= r.pass;
                parts.push(format!("err {:.2e} order {:.2}", r.finest_error, r.order));
            }
            Err(e) => return Outcome::fail(format!("{}: {e}", case.label())),
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Largest energy-identity gap and conserved-mass defect seen across the randomized suites.
#[derive(Default)]
struct Invariants {
    energy_gap: f64,
    surface_mass: f64,
}

fn isoperimetric(inv: &mut Invariants) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in families(BondNumber::Finite(1.0)) {
        let iso = verify::verify_isoperimetric(&case, 100, SEED, GRID);
        let per = verify::verify_perturbations(&case, 100, SEED + 1, GRID, DEFAULT_EPSILON);
        match (iso, per) {
            (Ok(a), Ok(b)) => {
                pass &= a.pass && b.pass && a.skipped.is_empty() && b.skipped.is_empty();
                for r in [&a, &b] {
                    inv.energy_gap = inv.energy_gap.max(r.max_energy_gap);
                    if singular(&case) {
                        inv.surface_mass = inv.surface_mass.max(r.max_surface_mass);
                    }
                }
                parts.push(format!(
                    "{:.4}/{:.4}",
                    a.max_observed_lambda / a.lambda_star,
                    b.max_observed_lambda / b.lambda_star
                ));
            }
            (Err(e), _) | (_, Err(e)) => return Outcome::fail(format!("{}: {e}", case.label())),
        }
    }
    Outcome {
        pass,
        detail: format!("max lambda_1 / lambda* (random/perturbed) = [{}]", parts.join(", ")),
    }
}

fn rectangle(area: f64, n: usize) -> ShapeSamples {
    ShapeSamples::new(Geometry::Canal, vec![area / 2.0; n], area).unwrap()
}

fn parabola(area: f64, n: usize) -> ShapeSamples {
    let v = Geometry::Canal
        .nodes(n)
        .iter()
        .map(|x| 0.75 * area * (1.0 - x * x))
        .collect();
    ShapeSamples::new(Geometry::Canal, v, area).unwrap()
}

fn exact_no_surface_tension() -> Outcome {
    let area = 1.0;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut check = |shape: ShapeSamples, alpha: f64, exact: f64, tol: f64| match fundamental_mode_no_st(
        &shape,
        alpha,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
    ) {
        Ok(r) => {
            let rel = (r.lambda1 - exact).abs() / exact;
            worst = worst.max(rel);
            pass &= rel < tol;
        }
        Err(_) => pass = false,
    };
    for alpha in [1.0, 2.0, PI] {
        check(rectangle(area, GRID), alpha, alpha * alpha * area / 2.0, 1e-4);
    }
    check(parabola(area, GRID), 0.0, 1.5 * area, 1e-3);
    check(rectangle(area, GRID), 0.0, area * PI * PI / 8.0, 1e-3);
    Outcome {
        pass,
        detail: format!("worst relative error {worst:.2e}"),
    }
}

fn limits() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in families(BondNumber::Finite(1.0)) {
        match verify::verify_limits(&case, &DEFAULT_LIMIT_BONDS) {
            Ok(r) => {
                pass &= r.pass;
                parts.push(format!(
                    "ratio gap {:.1e} shape gap {:.1e}",
                    r.final_ratio_gap, r.final_shape_gap
                ));
            }
            Err(e) => return Outcome::fail(format!("{}: {e}", case.label())),
        }
    }
    match d_zero(1e3) {
        Ok(d) => {
            pass &= (d - 2.0 / 3.0).abs() < 1e-2;
            parts.push(format!("d0(kappa=1e3) = {d:.5}"));
        }
        Err(e) => return Outcome::fail(format!("d0: {e}")),
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn structural(inv: &mut Invariants) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in families(BondNumber::Finite(1.0)) {
        let opt = match verify::verify_optimality_condition(&case, GRID) {
            Ok(r) => r,
            Err(e) => return Outcome::fail(format!("{}: {e}", case.label())),
        };
        inv.energy_gap = inv.energy_gap.max(opt.energy_gap);
        if singular(&case) {
            inv.surface_mass = inv.surface_mass.max(opt.surface_mass);
        }
        let conc = match verify::verify_concavity(&case, 50, SEED + 2, GRID) {
            Ok(r) => r,
            Err(e) => return Outcome::fail(format!("{}: {e}", case.label())),
        };
        pass &= opt.pass && conc.pass;
        parts.push(format!("opt {:.1e} conc {:.1e}", opt.max_deviation, conc.min_excess));
    }
    pass &= inv.energy_gap < ENERGY_TOL && inv.surface_mass < MASS_TOL;
    Outcome {
        pass,
        detail: format!(
            "energy gap {:.1e}, surface mass {:.1e}; {}",
            inv.energy_gap,
            inv.surface_mass,
            parts.join("; ")
        ),
    }
}

fn series_i(nu: u32, x: f64) -> f64 {
    let mut t = (x / 2.0).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut s = 0.0;
    for k in 0..60 {
        s += t;
        let k = k as f64;
        t *= (x / 2.0).powi(2) / ((k + 1.0) * (k + 1.0 + nu as f64));
    }
    s
}

fn series_l(nu: u32, x: f64) -> f64 {
    // Gamma(3/2) = sqrt(pi)/2, Gamma(nu + 3/2) from the same start.
    let g32 = PI.sqrt() / 2.0;
    let gnu = if nu == 0 { g32 } else { g32 * 1.5 };
    let mut t = (x / 2.0).powi(nu as i32 + 1) / (g32 * gnu);
    let mut s = 0.0;
    for k in 0..60 {
        s += t;
        let k = k as f64;
        t *= (x / 2.0).powi(2) / ((k + 1.5) * (k + nu as f64 + 1.5));
    }
    s
}

fn series_2f3(z: f64) -> f64 {
    let mut t = 1.0;
    let mut s = 0.0;
    for k in 0..50 {
        s += t;
        let k = k as f64;
        t *= (1.0 + k) * (2.0 + k) * z / ((1.5 + k) * (2.5 + k) * (3.0 + k) * (k + 1.0));
    }
    s
}

fn special_functions() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst_series: f64 = 0.0;
    let pairs = [
        (bessel_i(1, 1.0), series_i(1, 1.0)),
        (bessel_i(2, 1.0), series_i(2, 1.0)),
        (struve_l(0, 1.0), series_l(0, 1.0)),
        (struve_l(1, 1.0), series_l(1, 1.0)),
        (hyp2f3_special(0.25), series_2f3(0.25)),
        (hyp2f3_special(0.01), series_2f3(0.01)),
        (hyp2f3_special(1.0), series_2f3(1.0)),
    ];
    for (got, want) in pairs {
        match got {
            Ok(g) => worst_series = worst_series.max(rel(g, want)),
            Err(e) => return Outcome::fail(e.to_string()),
        }
    }

    let mut sandwich = true;
    for i in 0..200 {
        let k = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
        let (Ok(u), Ok(i2)) = (upsilon(k), bessel_i(2, k)) else {
            return Outcome::fail(format!("upsilon sandwich at kappa {k}"));
        };
        let v = PI * u / (k * k * i2);
        sandwich &= 2.0 / (k * k) < v && v < 8.0 / (3.0 * k * k);
    }

    let mut worst_recurrence: f64 = 0.0;
    let mut worst_derivative: f64 = 0.0;
    for i in 1..=200 {
        let x = 0.5 * i as f64;
        let (i0, i1, i2) = (
            bessel_i(0, x).unwrap(),
            bessel_i(1, x).unwrap(),
            bessel_i(2, x).unwrap(),
        );
        worst_recurrence = worst_recurrence.max((i0 - i2 - 2.0 * i1 / x).abs() / i0);
        let h = 1e-4;
        let g = |t: f64| bessel_i(1, t).unwrap() / t;
        let d = (g(x + h) - g(x - h)) / (2.0 * h);
        worst_derivative = worst_derivative.max(rel(d, i2 / x));
    }

    let pass = worst_series < 1e-12 && sandwich && worst_recurrence < 1e-12 && worst_derivative < 1e-6;
    Outcome {
        pass,
        detail: format!(
            "series {worst_series:.1e}, sandwich {}, recurrence {worst_recurrence:.1e}, derivative {worst_derivative:.1e}",
            if sandwich { "holds" } else { "violated" }
        ),
    }
}

fn main() -> ExitCode {
    let mut inv = Invariants::default();
    let mut all = true;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "{} [{id}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    report(1, "closed-form ratios", &mut ratios);
    report(2, "log-log slopes", &mut slopes);
    report(3, "attainment and convergence", &mut attainment);
    report(4, "isoperimetric and perturbation suites", &mut || {
        isoperimetric(&mut inv)
    });
    report(5, "exact cases without surface tension", &mut exact_no_surface_tension);
    report(6, "large-Bond limits", &mut limits);
    report(7, "structural invariants", &mut || structural(&mut inv));
    report(8, "special functions", &mut special_functions);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
