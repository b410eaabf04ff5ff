mod common;

use std::f64::consts::PI;

use common::{random_coefficient, random_field, rng};
use nlheat::coefficients::loglog_fit;
use nlheat::evolve::{
    implicit_step, solve_ivp, verify_apriori, verify_energy_monotonicity, CgOptions, RunConfig,
    Scheme,
};
use nlheat::operator::{apply_l, energy, Floors, OperatorData};
use nlheat::spectral::{Field, GridSpec};

fn cosine_problem(n: usize) -> (OperatorData, Field) {
    let g = GridSpec::new(1, n, 2.0 * PI).unwrap();
    (
        OperatorData::constant(g, 0.5, 1.0, 1.0, 1.0).unwrap(),
        Field::from_fn(g, |x| x[0].cos()),
    )
}

fn error_at_final_time(scheme: Scheme, dt: f64) -> f64 {
    let (p, u0) = cosine_problem(32);
    let sol = solve_ivp(&p, &u0, &RunConfig::new(1.0, dt, scheme).with_stride(usize::MAX)).unwrap();
    let exact = u0.scale((-3.0_f64).exp());
    sol.final_state().sub(&exact).unwrap().l2_norm()
}

#[test]
fn backward_euler_error_at_small_step() {
    assert!(error_at_final_time(Scheme::BackwardEuler, 1e-3) <= 5e-3);
}

#[test]
fn temporal_orders() {
    let dts = [0.1, 0.05, 0.025, 0.0125];
    for (scheme, order) in [(Scheme::BackwardEuler, 1.0), (Scheme::CrankNicolson, 2.0)] {
        let errs: Vec<f64> = dts.iter().map(|&dt| error_at_final_time(scheme, dt)).collect();
        let fit = loglog_fit(&dts, &errs);
        assert!((fit.slope - order).abs() <= 0.1, "{scheme:?}: slope {}", fit.slope);
    }
}

fn variable_operator(g: GridSpec) -> OperatorData {
    let a = Field::from_fn(g, |x| 2.0 + x[0].sin());
    let one = Field::constant(g, 1.0);
    OperatorData::new(a, one.clone(), one, 0.5, Floors { a0: 1.0, b0: 1.0, c0: 1.0 }).unwrap()
}

#[test]
fn step_solves_its_linear_system() {
    let g = GridSpec::new(1, 128, 2.0 * PI).unwrap();
    let p = variable_operator(g);
    let opts = CgOptions::default();
    for seed in 0..5 {
        let u = random_field(g, &mut rng(seed), 12, 0.5);
        let dt = 0.05;
        let step = implicit_step(&p, &u, dt, Scheme::BackwardEuler, opts).unwrap();
        let lu = apply_l(&p, &step.u_next).unwrap();
        let back = step.u_next.add(&lu.scale(dt)).unwrap();
        let rel = back.sub(&u).unwrap().l2_norm() / u.l2_norm();
        assert!(rel <= 10.0 * opts.rel_tol, "relative residual {rel}");
    }
}

fn random_operator(g: GridSpec, seed: u64) -> OperatorData {
    let mut r = rng(seed);
    let s = 0.1 + 0.8 * ((seed * 37 % 100) as f64 / 100.0);
    let floors = Floors { a0: 0.4, b0: 0.7, c0: 0.5 };
    let a = random_coefficient(g, &mut r, floors.a0);
    let b = random_coefficient(g, &mut r, floors.b0);
    let c = random_coefficient(g, &mut r, floors.c0);
    OperatorData::new(a, b, c, s, floors).unwrap()
}

#[test]
fn energy_laws_on_random_runs() {
    let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
    for seed in 0..20 {
        let p = random_operator(g, seed);
        let u0 = random_field(g, &mut rng(1000 + seed), 8, 1.0);
        for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
            let sol = solve_ivp(&p, &u0, &RunConfig::new(0.5, 0.02, scheme)).unwrap();
            let m = verify_energy_monotonicity(&sol.trace);
            assert!(m.monotone_l2, "seed {seed} {scheme:?}");
            if scheme == Scheme::BackwardEuler {
                assert!(m.monotone_total, "seed {seed}: {}", m.max_violation);
            }
            assert!(verify_apriori(&p, &sol, &u0).unwrap().satisfied);
        }
    }
}

#[test]
fn time_derivative_identity_for_backward_euler() {
    let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
    for (k, (a0, b0, c0, s)) in [(1.0, 1.0, 1.0, 0.5), (0.3, 2.0, 0.1, 0.2), (2.0, 0.5, 1.5, 0.9)]
        .into_iter()
        .enumerate()
    {
        let p = OperatorData::constant(g, s, a0, b0, c0).unwrap();
        let u0 = random_field(g, &mut rng(k as u64), 10, 1.0);
        let sol = solve_ivp(&p, &u0, &RunConfig::new(1.0, 0.01, Scheme::BackwardEuler)).unwrap();
        let half_form = 0.5 * energy(&p, &u0).unwrap().form_part();
        assert!(sol.trace.ut_integral() <= half_form * 1.05);
    }
}

#[test]
fn differences_contract() {
    let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
    let p = random_operator(g, 3);
    let u0 = random_field(g, &mut rng(1), 8, 1.0);
    let w0 = random_field(g, &mut rng(2), 8, 1.0).scale(1e-3);
    let v0 = u0.add(&w0).unwrap();
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let cfg = RunConfig::new(0.4, 0.02, scheme).with_tolerance(1e-12);
        let a = solve_ivp(&p, &u0, &cfg).unwrap();
        let b = solve_ivp(&p, &v0, &cfg).unwrap();
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            let w = y.field.sub(&x.field).unwrap().l2_norm();
            assert!(w <= w0.l2_norm() * (1.0 + 1e-6));
        }
    }
}

#[test]
fn zero_initial_data_stays_zero() {
    let (p, u0) = cosine_problem(16);
    let z = Field::zeros(*u0.grid());
    let sol = solve_ivp(&p, &z, &RunConfig::new(0.3, 0.1, Scheme::CrankNicolson)).unwrap();
    assert!(sol.snapshots.iter().all(|s| s.field == z));
    assert!(sol.trace.cg_iterations.iter().all(|&i| i == 0));
}
